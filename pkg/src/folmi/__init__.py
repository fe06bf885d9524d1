"""folmi: LMI-based robust output-feedback synthesis, certification, and
simulation for fractional-order linear systems with interval uncertainty."""

from .interval import (
    IntervalMatrix,
    UncertainFoltiSystem,
    UncertaintyFactors,
    UncertaintyRealization,
    decompose,
    enumerate_vertices,
    realize,
    sample_uniform,
)
from .lmi import (
    AffineMatrixConstraint,
    LmiProblem,
    SdpSolution,
    SdpStatus,
    Sense,
    SolverConfig,
    evaluate_constraint,
    solve_feasibility,
)
from .fosim import Trajectory, gl_weights, mittag_leffler, simulate, trajectory_to_csv
from .stability import (
    SectorReport,
    closed_loop,
    low_alpha_lmi_feasible,
    high_alpha_lmi_feasible,
    sector_margin,
)
from .synthesis import (
    CertificationReport,
    DynamicController,
    SynthesisResult,
    assemble_low_alpha,
    assemble_high_alpha,
    certify,
    recover_low_alpha,
    recover_high_alpha,
    synthesize,
)

__version__ = "0.1.0"

__all__ = [
    "IntervalMatrix",
    "UncertainFoltiSystem",
    "UncertaintyFactors",
    "UncertaintyRealization",
    "decompose",
    "enumerate_vertices",
    "realize",
    "sample_uniform",
    "AffineMatrixConstraint",
    "LmiProblem",
    "SdpSolution",
    "SdpStatus",
    "Sense",
    "SolverConfig",
    "evaluate_constraint",
    "solve_feasibility",
    "Trajectory",
    "gl_weights",
    "mittag_leffler",
    "simulate",
    "trajectory_to_csv",
    "SectorReport",
    "closed_loop",
    "low_alpha_lmi_feasible",
    "high_alpha_lmi_feasible",
    "sector_margin",
    "CertificationReport",
    "DynamicController",
    "SynthesisResult",
    "assemble_low_alpha",
    "assemble_high_alpha",
    "certify",
    "recover_low_alpha",
    "recover_high_alpha",
    "synthesize",
]
