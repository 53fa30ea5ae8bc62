"""
Base Mitigator Interface

Pre-processing mitigators (reweighing, disparate impact repair) act on the
training data; the post-processing one (reject option) acts on model scores.
All of them take the protected attribute as a binary privileged indicator.
"""

from abc import ABC, abstractmethod
from typing import Any, Dict

import numpy as np

from src.config.settings import settings
from src.utils.errors import PainFairError


def aligned_group(group, n: int, what: str) -> np.ndarray:
    """``group`` as a flat 0/1 int vector of length ``n``"""
    group = np.asarray(group).ravel()
    if group.size != n:
        raise PainFairError(f"{n} {what} for {group.size} group entries")
    if group.size and not np.isin(group, (0, 1)).all():
        raise PainFairError("group must be a binary privileged indicator")
    return group.astype(int)


class BaseMitigator(ABC):
    """
    Common surface of the bias mitigators.

    Attributes:
        name (str): Mitigator name used in logs and result rows
        stage (str): "pre" or "post"
        parameters (Dict[str, Any]): Mitigator-specific parameters
    """

    stage = "pre"

    def __init__(self, name: str, **parameters):
        self.name = name
        self.parameters = parameters
        self._fitted = False
        self._validate_parameters()

    @abstractmethod
    def _validate_parameters(self) -> None:
        """Raise ValueError or PainFairError on an unusable parameter set"""

    def _check_attribute(self) -> None:
        attribute = self.parameters.get("attribute")
        if attribute is not None and attribute not in settings.protected_attributes:
            raise ValueError(f"Unknown protected attribute '{attribute}'")

    def _mark_fitted(self) -> None:
        self._fitted = True

    def _require_fitted(self) -> None:
        if not self._fitted:
            raise PainFairError(f"{self.name} must be fitted first")

    @property
    def is_fitted(self) -> bool:
        return self._fitted

    def get_parameter_info(self) -> Dict[str, Any]:
        return {"name": self.name, "stage": self.stage, "parameters": dict(self.parameters)}

    def update_parameters(self, **new_parameters) -> None:
        self.parameters.update(new_parameters)
        self._validate_parameters()

    def __repr__(self) -> str:
        params = ", ".join(f"{k}={v}" for k, v in self.parameters.items())
        return f"{self.name}({params}, stage={self.stage})"
