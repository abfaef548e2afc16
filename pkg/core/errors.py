"""Exception hierarchy for RankSpike with machine-readable codes."""
from typing import Optional


class RankSpikeError(Exception):
    """Base class for every library error."""

    code = "error"
    exit_status = 1

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def to_dict(self) -> dict:
        return {"code": self.code, "message": self.message}


class ValidationError(RankSpikeError):
    code = "validation"
    exit_status = 2


class CurveParseError(ValidationError):
    code = "parse"

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class SingularCurveError(ValidationError):
    code = "singular_curve"


class ReductionError(RankSpikeError):
    code = "wrong_reduction"


class DependencyError(RankSpikeError):
    code = "dependency"


class PoleError(RankSpikeError):
    code = "pole"


class PrecisionError(RankSpikeError):
    code = "precision"

    def __init__(self, message: str, achieved_bound: float = float("inf")):
        super().__init__(f"{message} (achieved bound {achieved_bound:.3g})")
        self.achieved_bound = achieved_bound


class ConsistencyError(RankSpikeError):
    code = "consistency"


class InferenceError(RankSpikeError):
    code = "inference"


class IncompletenessError(RankSpikeError):
    """Zero count could not be certified; the partial list rides along."""

    code = "incomplete"
    exit_status = 3

    def __init__(self, message: str, partial: Optional[object] = None):
        super().__init__(message)
        self.partial = partial


class DomainError(RankSpikeError):
    code = "domain"


class ResourceError(RankSpikeError):
    code = "resource"


class CacheError(RankSpikeError):
    code = "cache"
