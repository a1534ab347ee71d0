"""Preference-driven Bayesian optimization over discrete observation grids."""

from .acquisition import expected_improvement, select_next
from .agents import VoterConfig, VoterKind
from .bradley_terry import ComparisonLog, ComparisonRecord, VoteSource, fit
from .dataset import (
    ObservationGrid,
    PayloadKind,
    generate_domain_wall_grid,
    load_bundle,
    loop_area,
    write_bundle,
)
from .orchestrator import (
    Phase,
    SessionConfig,
    SessionState,
    export_session,
    import_session,
    initialize,
    run_to_completion,
    step,
)
from .similarity import find_proxy, ssim
from .surrogate import SurrogateMode, fit_gp, make_inputs, predict

__version__ = "0.1.0"

__all__ = [
    "ComparisonLog",
    "ComparisonRecord",
    "ObservationGrid",
    "PayloadKind",
    "Phase",
    "SessionConfig",
    "SessionState",
    "SurrogateMode",
    "VoteSource",
    "VoterConfig",
    "VoterKind",
    "expected_improvement",
    "export_session",
    "find_proxy",
    "fit",
    "fit_gp",
    "generate_domain_wall_grid",
    "import_session",
    "initialize",
    "load_bundle",
    "loop_area",
    "make_inputs",
    "predict",
    "run_to_completion",
    "select_next",
    "ssim",
    "step",
    "write_bundle",
]
