"""Sample-based certification of convexity and gradient-smoothness inequalities."""

__version__ = "0.1.0"

from .vecspace import Vector  # noqa: E402
from .funcs import FunctionHandle  # noqa: E402
from .conditions import ConditionId, ConditionInstance, residual  # noqa: E402
from .checker import SampleConfig, ToleranceMode, falsify, shrink  # noqa: E402
from .estimate import estimate_L, minimal_L, equivalence_report  # noqa: E402
from .fnspec import parse_fn_spec  # noqa: E402

__all__ = [
    "Vector",
    "FunctionHandle",
    "ConditionId",
    "ConditionInstance",
    "residual",
    "SampleConfig",
    "ToleranceMode",
    "falsify",
    "shrink",
    "estimate_L",
    "minimal_L",
    "equivalence_report",
    "parse_fn_spec",
]
