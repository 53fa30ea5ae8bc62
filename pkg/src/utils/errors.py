"""Exception hierarchy for the pipeline.

Every error derives from ``ValueError`` so callers that only guard against
bad input keep working.
"""


class PainFairError(ValueError):
    """Base class for all pipeline errors."""


class CohortError(PainFairError):
    """Malformed cohort bundle or cohort invariant violation."""


class EmptyCohortError(CohortError):
    """No participant survived the inclusion filters."""


class SplitError(PainFairError):
    """A train/test partition would leave one side empty."""


class ImputationError(PainFairError):
    """A channel cannot be completed (e.g. every slot missing)."""


class SeriesTooShortError(PainFairError):
    """Series shorter than the feature block requires."""


class FeatureKeyError(PainFairError):
    """Feature vectors with different key spaces were combined."""


class DegenerateGroupError(PainFairError):
    """One side of a protected-attribute partition is empty."""


class UndefinedMetricError(PainFairError):
    """A rate needed by a fairness metric has an empty denominator."""


class ShapeMismatchError(PainFairError):
    """Array shape does not match the network or model."""

    def __init__(self, what: str, expected, actual):
        super().__init__(f"{what}: expected shape {expected}, got {actual}")
        self.expected = expected
        self.actual = actual


class TrainingDivergedError(PainFairError):
    """Loss became non-finite during training."""

    def __init__(self, message: str, diagnostics: dict):
        super().__init__(f"{message} (diagnostics: {diagnostics})")
        self.diagnostics = diagnostics


class SpecError(PainFairError):
    """Invalid experiment specification or CLI flags."""


class ResultIntegrityError(PainFairError):
    """Stored verdicts disagree with a recomputation from metric values."""
