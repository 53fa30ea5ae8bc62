"""Experiment specification"""
import json
from pathlib import Path
from typing import Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from src.cohort.models import EncodingPlan
from src.cohort.synthetic import SynthConfig
from src.config.settings import settings, ROC_THRESHOLD, ROC_MARGIN
from src.network.trainer import TrainConfig
from src.utils.errors import SpecError

CNN_MODELS = {"mafl_cnn": "mafl", "bce_cnn": "bce"}
BASELINE_MODELS = ("logistic", "naive_bayes", "decision_tree")

ModelName = Literal["mafl_cnn", "bce_cnn", "logistic", "naive_bayes", "decision_tree"]
MitigationName = Literal["none", "reweighing", "dir", "roc"]

DEFAULT_BASELINE_PLAN = EncodingPlan(
    mode="features",
    domains=("statistical", "temporal"),
    channels=("hr", "steps"),
    include_demographics=True,
)


class ExperimentSpec(BaseModel):
    """
    One experiment grid: repetitions x attributes x mitigations x models.

    CNN models read ``plan`` inputs, baseline models ``baseline_plan``
    inputs. With ``mafl_attributes = "all"`` the fairness loss covers every
    attribute under test at once; with "each" only the evaluated one.
    """
    model_config = ConfigDict(frozen=True)

    seed: int
    bundle: Optional[str] = None
    synth: Optional[SynthConfig] = None
    plan: EncodingPlan = EncodingPlan()
    baseline_plan: EncodingPlan = DEFAULT_BASELINE_PLAN
    attributes: Tuple[str, ...] = ("gender",)
    mafl_attributes: Literal["each", "all"] = "each"
    models: Tuple[ModelName, ...] = ("mafl_cnn", "bce_cnn")
    mitigations: Tuple[MitigationName, ...] = ("none",)
    train: TrainConfig = TrainConfig()
    repetitions: int = Field(settings.default_repetitions, ge=1)
    split_ratio: float = Field(settings.split_ratio, gt=0.0, lt=1.0)
    dir_repair_level: float = Field(1.0, ge=0.0, le=1.0)
    roc_threshold: float = Field(ROC_THRESHOLD, gt=0.0, lt=1.0)
    roc_margin: float = Field(ROC_MARGIN, ge=0.0)
    workers: int = Field(1, ge=1)
    out_dir: str = settings.results_dir

    @field_validator("attributes")
    @classmethod
    def _check_attributes(cls, value):
        if not value:
            raise ValueError("at least one protected attribute required")
        unknown = [a for a in value if a not in settings.protected_attributes]
        if unknown:
            raise ValueError(f"Unknown protected attributes: {unknown}")
        return tuple(dict.fromkeys(value))

    @field_validator("models")
    @classmethod
    def _check_models(cls, value):
        if not value:
            raise ValueError("at least one model required")
        return tuple(dict.fromkeys(value))

    @field_validator("mitigations")
    @classmethod
    def _with_unmitigated(cls, value):
        return tuple(dict.fromkeys(("none",) + tuple(value)))

    @model_validator(mode="after")
    def _check_source(self):
        if (self.bundle is None) == (self.synth is None):
            raise ValueError("exactly one data source required: 'bundle' or 'synth'")
        if self.plan.mode != "raw" and any(m in CNN_MODELS for m in self.models):
            raise ValueError("CNN models need a raw-mode plan")
        return self

    def train_config(self, model: str, attribute: str, seed: int) -> TrainConfig:
        attribute_set = self.attributes if self.mafl_attributes == "all" else (attribute,)
        return self.train.model_copy(update={
            "loss_kind": CNN_MODELS[model], "attribute_set": attribute_set, "seed": seed,
        })

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentSpec":
        try:
            return cls.model_validate_json(text)
        except ValidationError as e:
            raise SpecError(f"invalid experiment spec: {e}") from e

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ExperimentSpec":
        return cls.from_json(Path(path).read_text())
