"""corrtrack: policy laboratory for tracking two correlated processes
over a shared collision channel."""

__version__ = "0.1.0"

from corrtrack.chain import (
    ChainEvaluator,
    ChainModel,
    NumericalFailure,
    ReducibleChain,
    StationaryResult,
    build_kernel,
    source_marginal,
    stationary,
)
from corrtrack.experiments import (
    PRESETS,
    ConcordanceRow,
    SweepRow,
    SweepSpec,
    run_preset,
    run_sweep,
    run_validation,
)
from corrtrack.formulas import (
    BoundaryEvaluation,
    FormulaValue,
    cost_closed_form,
    pe_closed_form,
    stationary_closed_form,
)
from corrtrack.model import (
    ChangeAware,
    ChannelOrderingWarning,
    ChannelParams,
    ErrorAware,
    MicroState,
    ParameterError,
    Policy,
    RandomSampling,
    Reconstruction,
    SemanticsAware,
    SlotOutcome,
    SourceParams,
    SourceState,
)
from corrtrack.optimize import (
    Budget,
    FeasibilityResult,
    OptResult,
    feasibility,
    optimize_ea,
    optimize_rs,
    optimize_rs_equal,
    rs_monotonicity_audit,
)
from corrtrack.simulate import MetricsReport, SimConfig, run, step

__all__ = [
    "Budget",
    "BoundaryEvaluation",
    "ChainEvaluator",
    "ChainModel",
    "ChangeAware",
    "ChannelOrderingWarning",
    "ChannelParams",
    "ConcordanceRow",
    "ErrorAware",
    "FeasibilityResult",
    "FormulaValue",
    "MetricsReport",
    "MicroState",
    "NumericalFailure",
    "OptResult",
    "PRESETS",
    "ParameterError",
    "Policy",
    "RandomSampling",
    "Reconstruction",
    "ReducibleChain",
    "SemanticsAware",
    "SimConfig",
    "SlotOutcome",
    "SourceParams",
    "SourceState",
    "StationaryResult",
    "SweepRow",
    "SweepSpec",
    "build_kernel",
    "cost_closed_form",
    "feasibility",
    "optimize_ea",
    "optimize_rs",
    "optimize_rs_equal",
    "pe_closed_form",
    "rs_monotonicity_audit",
    "run",
    "run_preset",
    "run_sweep",
    "run_validation",
    "source_marginal",
    "stationary",
    "stationary_closed_form",
    "step",
]
