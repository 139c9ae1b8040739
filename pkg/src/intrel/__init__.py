"""Integer relation detection for vectors of high-precision reals.

Given x = (x_1, ..., x_n), find integers a (not all zero) with
a_1 x_1 + ... + a_n x_n = 0, or certify that no relation exists below a
Euclidean-norm bound.  The package provides the classic single-pair
algorithm, a multi-pair variant that cuts the sequential iteration count
by roughly an order of magnitude, and two-/three-level mixed-precision
drivers that run almost all iterations in hardware doubles while keeping
the full-precision state exact.

Quick start::

    from intrel import EpsilonPolicy, run_multilevel
    from intrel.constants import gen_algebraic, AlgebraicSpec, power_vector

    alpha = gen_algebraic(AlgebraicSpec(5, 5, 180))   # 3^(1/5) - 2^(1/5)
    out = run_multilevel(power_vector(alpha, 25), algo="multipair",
                         policy=EpsilonPolicy(180))
    assert out.found   # out.coefficients is its degree-25 minimal polynomial
"""

from .constants import (
    AlgebraicSpec,
    PolyRootSpec,
    SeriesSpec,
    eval_series,
    gen_algebraic,
    gen_pi,
    power_vector,
    refine_root,
)
from .multilevel import (
    LevelConfig,
    ShadowEvent,
    ShadowState,
    flush_updates,
    lq_factor,
    run_multilevel,
    spawn_shadow,
    shadow_iterate,
)
from .multipair import (
    MultiPairState,
    PairSelection,
    cycle_guard,
    mp_init_state,
    mp_iterate_once,
    select_pairs,
)
from .parallel import (
    PartitionPlan,
    par_map,
    par_matmul,
    par_matvec,
    par_vecmat,
    plan_partition,
)
from .precision import (
    DOUBLE,
    EpsilonPolicy,
    Tier,
    demote,
    digits_to_bits,
    is_exact_int,
    nint,
    promote,
    workprec,
)
from .problems import ProblemSpec, build_vector, parse_problem
from .pslq import (
    RelationOutcome,
    RelationState,
    Status,
    init_state,
    iterate_once,
    norm_bound,
    run,
)

__version__ = "0.1.0"

__all__ = [
    "AlgebraicSpec",
    "DOUBLE",
    "EpsilonPolicy",
    "LevelConfig",
    "MultiPairState",
    "PairSelection",
    "PartitionPlan",
    "PolyRootSpec",
    "ProblemSpec",
    "RelationOutcome",
    "RelationState",
    "SeriesSpec",
    "ShadowEvent",
    "ShadowState",
    "Status",
    "Tier",
    "build_vector",
    "cycle_guard",
    "demote",
    "digits_to_bits",
    "eval_series",
    "flush_updates",
    "gen_algebraic",
    "gen_pi",
    "init_state",
    "is_exact_int",
    "iterate_once",
    "lq_factor",
    "mp_init_state",
    "mp_iterate_once",
    "nint",
    "norm_bound",
    "par_map",
    "par_matmul",
    "par_matvec",
    "par_vecmat",
    "parse_problem",
    "plan_partition",
    "power_vector",
    "promote",
    "refine_root",
    "run",
    "run_multilevel",
    "select_pairs",
    "shadow_iterate",
    "spawn_shadow",
    "workprec",
]
