"""pareto-forge: revealed-preference tests for social optimality and
adaptive mechanism design under simulated Nash play."""

from .core import (
    ConstraintFunction,
    EmpiricalStrategy,
    Family,
    Kind,
    ParetoCertificate,
    ProbeSpec,
    RPDataset,
    check_shift_invariance,
    eval_constraint,
    expected_constraint,
    generate_probes,
    load_dataset,
    save_dataset,
)
from .lp import LinearProgram, LPResult, SimplexSolver, Status, feasible, solve
from .rp import (
    GapResult,
    PreferenceProfile,
    afriat_feasible,
    ccei_scalar,
    empirical_pareto_gap,
    garp_f,
    garp_f_threshold,
    hoeffding_confidence,
    mm_garp,
    pareto_gap,
    rank_optimality_check,
    reconstruct_utility,
)
from .game import (
    AgentFeasibleSet,
    GameInterface,
    NashResult,
    RiverPollutionGame,
    best_deviation,
    collect_dataset,
    nikaido_isoda,
    payoff,
    probe_feasible_set,
    relaxation_nash,
    river_probes,
)
from .spsa import SPSAConfig, SPSATrace, gains, run_mechanism_design, spsa_step
from .dro import (
    DROConfig,
    DROState,
    PsiVector,
    ScenarioSet,
    constraint_violation,
    exchange_loop,
    h_value,
    master_solve,
    robust_gap,
    wasserstein_ball_check,
)

__version__ = "0.1.0"

__all__ = [
    "ConstraintFunction",
    "EmpiricalStrategy",
    "Family",
    "Kind",
    "ParetoCertificate",
    "ProbeSpec",
    "RPDataset",
    "check_shift_invariance",
    "eval_constraint",
    "expected_constraint",
    "generate_probes",
    "load_dataset",
    "save_dataset",
    "LinearProgram",
    "LPResult",
    "SimplexSolver",
    "Status",
    "feasible",
    "solve",
    "GapResult",
    "PreferenceProfile",
    "afriat_feasible",
    "ccei_scalar",
    "empirical_pareto_gap",
    "garp_f",
    "garp_f_threshold",
    "hoeffding_confidence",
    "mm_garp",
    "pareto_gap",
    "rank_optimality_check",
    "reconstruct_utility",
    "AgentFeasibleSet",
    "GameInterface",
    "NashResult",
    "RiverPollutionGame",
    "best_deviation",
    "collect_dataset",
    "nikaido_isoda",
    "payoff",
    "probe_feasible_set",
    "relaxation_nash",
    "river_probes",
    "SPSAConfig",
    "SPSATrace",
    "gains",
    "run_mechanism_design",
    "spsa_step",
    "DROConfig",
    "DROState",
    "PsiVector",
    "ScenarioSet",
    "constraint_violation",
    "exchange_loop",
    "h_value",
    "master_solve",
    "robust_gap",
    "wasserstein_ball_check",
]
