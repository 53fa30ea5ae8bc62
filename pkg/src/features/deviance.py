"""
Feature vectors and day-over-day deviance transforms

Variants, applied element-wise to a day's vector x_d and the previous day's x_{d-1}:

    mathematical  x_d - x_{d-1}
    logarithmic   log(max(x_d, eps)) - log(max(x_{d-1}, eps))
    cosine        cos(x_d) * cos(x_{d-1})
    logcosh       log(cosh(x_d - x_{d-1}))
"""

from dataclasses import dataclass
from typing import Dict, Iterable, Mapping, Tuple

import numpy as np

from src.config.settings import settings, FEATURE_CATALOG_VERSION
from src.utils.errors import FeatureKeyError, PainFairError

DEVIANCE_VARIANTS = ("mathematical", "logarithmic", "cosine", "logcosh")


def flatten_block(domain: str, channel: str, values: Mapping, expand_multivalued: bool = False
                  ) -> Tuple[Tuple[str, ...], np.ndarray]:
    """
    Namespace one extractor's output as ``domain.name.channel``.

    Multi-valued features contribute their first component unless
    ``expand_multivalued`` is set, in which case component i becomes
    ``domain.name_<i>.channel``.
    """
    names, flat = [], []
    for name, value in values.items():
        if np.ndim(value) == 0:
            names.append(f"{domain}.{name}.{channel}")
            flat.append(float(value))
        elif expand_multivalued:
            for i, component in enumerate(np.asarray(value, dtype=float)):
                names.append(f"{domain}.{name}_{i}.{channel}")
                flat.append(float(component))
        else:
            names.append(f"{domain}.{name}.{channel}")
            flat.append(float(np.asarray(value, dtype=float)[0]))
    return tuple(names), np.array(flat, dtype=float)


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """Ordered feature name -> finite value map"""
    names: Tuple[str, ...]
    values: np.ndarray
    catalog_version: str = FEATURE_CATALOG_VERSION

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        values.setflags(write=False)
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "values", values)
        if len(self.names) != values.size:
            raise FeatureKeyError(f"{len(self.names)} names for {values.size} values")
        if len(set(self.names)) != len(self.names):
            raise FeatureKeyError("duplicate feature names")
        bad = [n for n, v in zip(self.names, values) if not np.isfinite(v)]
        if bad:
            raise PainFairError(f"non-finite feature values: {bad[:5]}")

    @classmethod
    def concat(cls, vectors: Iterable["FeatureVector"]) -> "FeatureVector":
        vectors = list(vectors)
        return cls(
            tuple(n for v in vectors for n in v.names),
            np.concatenate([v.values for v in vectors]) if vectors else np.zeros(0),
        )

    def __len__(self) -> int:
        return len(self.names)

    def __getitem__(self, name: str) -> float:
        return float(self.values[self.names.index(name)])

    def to_dict(self) -> Dict[str, float]:
        return dict(zip(self.names, self.values.tolist()))


@dataclass(frozen=True, eq=False)
class DevianceVector(FeatureVector):
    """Feature-vector key space transformed by one deviance variant"""
    variant: str = "mathematical"

    def column_names(self) -> Tuple[str, ...]:
        return tuple(f"{name}.{self.variant}" for name in self.names)


def _logcosh(diff: np.ndarray) -> np.ndarray:
    # log(cosh(d)) = |d| + log1p(exp(-2|d|)) - log(2), overflow-free
    a = np.abs(diff)
    return np.maximum(a + np.log1p(np.exp(-2.0 * a)) - np.log(2.0), 0.0)


def deviance_values(current: np.ndarray, previous: np.ndarray, variant: str) -> np.ndarray:
    if variant == "mathematical":
        return current - previous
    if variant == "logarithmic":
        eps = settings.log_deviance_epsilon
        return np.log(np.maximum(current, eps)) - np.log(np.maximum(previous, eps))
    if variant == "cosine":
        return np.cos(current) * np.cos(previous)
    if variant == "logcosh":
        return _logcosh(current - previous)
    raise PainFairError(f"Unknown deviance variant '{variant}'. Choose from {DEVIANCE_VARIANTS}")


def deviance(current: FeatureVector, previous: FeatureVector, variant: str) -> DevianceVector:
    """
    Apply one deviance variant to a day's features against the previous day's

    Raises:
        FeatureKeyError: the two vectors have different key spaces
    """
    if current.names != previous.names:
        missing = sorted(set(current.names) ^ set(previous.names))
        detail = f"differing keys {missing[:5]}" if missing else "same keys in a different order"
        raise FeatureKeyError(f"deviance needs identical key spaces: {detail}")
    return DevianceVector(
        names=current.names,
        values=deviance_values(current.values, previous.values, variant),
        variant=variant,
    )

