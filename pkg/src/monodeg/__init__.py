"""Topological degree for maximal monotone set-valued operators.

The pipeline approximates an operator between weighted sequence spaces by
finite-rank sections, replaces each section by an eps-accurate continuous
selection plus a small duality-map regularization, computes classical
Brouwer degrees of the regularized sections, and reports the stabilized
limit together with solvability certificates.
"""

from .errors import (
    BadParams,
    BoundaryHitsZero,
    BoundaryTooClose,
    BudgetExhausted,
    CapSensitive,
    DegenerateZero,
    DimensionMismatch,
    GridTooFine,
    HypothesisViolated,
    InadmissibleHomotopy,
    MonodegError,
    NotStabilized,
    OperatorDomainError,
    ParseError,
    RadiusSearchFailed,
    RegionUnbounded,
    ResidualNotMet,
    SchemaError,
    UnknownOperator,
    ZeroOnBoundarySample,
)

__version__ = "0.1.0"

from .backend import available_backends, backend_name  # noqa: E402
from .space import SpacePair, Vec, WeightRule, make_space  # noqa: E402
from .setval import (  # noqa: E402
    MonotoneMultiMap,
    gallery,
    gallery_names,
    monotonicity_audit,
)
from .regions import BallDomain, BoxDomain  # noqa: E402
from .selection import audit_selection, build_selection  # noqa: E402
from .galerkin import Schedule, choose_epsilon  # noqa: E402
from .degree import (  # noqa: E402
    DegreeReport,
    Homotopy,
    degree_limit,
    extract_zero,
    homotopy_check,
    inclusion_residual,
)
from .harness import (  # noqa: E402
    run_browder_surjectivity,
    run_defigueiredo,
    run_range_Nr,
)
from .scenario import load_scenario, run_scenario, validate_scenario  # noqa: E402

__all__ = [
    "__version__",
    "MonodegError",
    "OperatorDomainError",
    "DimensionMismatch",
    "UnknownOperator",
    "BadParams",
    "RegionUnbounded",
    "GridTooFine",
    "BoundaryTooClose",
    "DegenerateZero",
    "BudgetExhausted",
    "ZeroOnBoundarySample",
    "BoundaryHitsZero",
    "NotStabilized",
    "InadmissibleHomotopy",
    "ResidualNotMet",
    "HypothesisViolated",
    "CapSensitive",
    "RadiusSearchFailed",
    "ParseError",
    "SchemaError",
    "available_backends",
    "backend_name",
    "SpacePair",
    "Vec",
    "WeightRule",
    "make_space",
    "MonotoneMultiMap",
    "gallery",
    "gallery_names",
    "monotonicity_audit",
    "BallDomain",
    "BoxDomain",
    "audit_selection",
    "build_selection",
    "Schedule",
    "choose_epsilon",
    "DegreeReport",
    "Homotopy",
    "degree_limit",
    "extract_zero",
    "homotopy_check",
    "inclusion_residual",
    "run_browder_surjectivity",
    "run_defigueiredo",
    "run_range_Nr",
    "load_scenario",
    "run_scenario",
    "validate_scenario",
]
