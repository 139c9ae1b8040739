"""Two- and three-level execution: run the iteration at a cheap tier and
fold the accumulated exact-integer updates into the full-precision state
by matrix multiplication.

A shadow replica holds tier copies of y (rescaled so its largest entry is
one), an LQ-refactored H, and identity A/B that accumulate the integer
row operations since the last flush.  Shadow entries are monitored every
iteration: crossing the entry cap or the y floor forces a flush; crossing
the tier's exact-integer boundary abandons the iteration and restores the
previous one before flushing.  After every flush into a parent, the
parent's H is re-factorized to lower-trapezoidal form before the next
replica is spawned.

The three-level scheme nests a double-precision replica inside a fixed
intermediate-precision replica inside the full-precision state; flushes
move one level up at a time.  When a parent's y spread exceeds what a
tier can track, iterations run at the parent's own precision until the
spread contracts.
"""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass

import gmpy2

from . import multipair as _mp
from . import pslq as _pslq
from .parallel import par_matmul, par_matvec
from .precision import (
    DOUBLE,
    EpsilonPolicy,
    Tier,
    TierRangeError,
    demote,
    format_sci,
    is_exact_int,
)
from .pslq import RelationOutcome, RelationState, Status

__all__ = [
    "DynamicRangeError",
    "LevelConfig",
    "ShadowCorruptionError",
    "ShadowEvent",
    "ShadowState",
    "flush_updates",
    "lq_factor",
    "run_multilevel",
    "spawn_shadow",
    "shadow_iterate",
]


class DynamicRangeError(TierRangeError):
    """The y vector spans more orders of magnitude than the tier tracks."""


class ShadowCorruptionError(RuntimeError):
    """A shadow update matrix lost integer exactness: threshold bug."""


class RankDeficiencyError(ArithmeticError):
    """H lost full column rank; treated as precision exhaustion."""


class ShadowEvent(enum.Enum):
    CONTINUE = "continue"
    FLUSH_ENTRY_CAP = "flush-entry-cap"
    FLUSH_Y_FLOOR = "flush-y-floor"
    ABANDON = "abandon"


@dataclass(frozen=True)
class LevelConfig:
    """Thresholds for multi-level execution.

    entry_cap / y_floor are the double-tier monitors; the intermediate
    tier uses caps derived from its digit count (entries below
    10**(digits-20) stay exactly representable through one more flush,
    and the y floor sits two digits above the tier's epsilon, which
    reproduces 1e-14 at the double tier's 16 digits).
    """

    levels: int = 3
    entry_cap: float = 1e13
    y_floor: float = 1e-14
    intermediate_digits: int = 125
    omit_full_a: bool | None = None

    def __post_init__(self):
        if self.levels not in (1, 2, 3):
            raise ValueError("levels must be 1, 2, or 3")
        if self.entry_cap <= 0 or self.y_floor <= 0:
            raise ValueError("thresholds must be positive")
        if self.levels == 3 and self.intermediate_digits < 64:
            raise ValueError("three-level runs need >= 64 intermediate digits")

    def resolve_omit_a(self) -> bool:
        if self.omit_full_a is not None:
            return self.omit_full_a
        return self.levels >= 2

    def entry_cap_for(self, tier: Tier):
        if tier.is_double:
            return self.entry_cap
        return 10 ** (tier.digits - 20)

    def y_floor_for(self, tier: Tier):
        if tier.is_double:
            return self.y_floor
        return gmpy2.mpfr(f"1e{2 - tier.digits}", tier.bits)

    def abandon_cap_for(self, tier: Tier) -> int:
        if tier.is_double:
            return 1 << 53
        return 10 ** (tier.digits - 1)


@dataclass
class ShadowState:
    """A reduced-precision replica accumulating updates between flushes."""

    tier: Tier
    state: RelationState           # engine state at `tier`
    scale_exp10: int               # decimal exponent folded out of ybar
    y_floor: object = None         # flush trigger in this replica's frame
    h_scale_log2: int = 0          # power-of-two folded out of Hbar
    saved_prev: tuple | None = None
    last_report: object | None = None


# --------------------------------------------------------------------------
# LQ factorization


def lq_factor(H, tier: Tier):
    """Lower-trapezoidal L with nonnegative diagonal and L@L.T == H@H.T.

    Householder reflections applied from the right, one per row of the
    trapezoid; the reflected row's tail is zeroed exactly.  Raises
    RankDeficiencyError when a whole pivot column vanishes.
    """
    n = len(H)
    m = len(H[0])
    W = [list(row) for row in H]
    zero = tier.zero()
    for j in range(m):
        Wj = W[j]
        sigma = zero
        for k in range(j + 1, m):
            sigma = sigma + Wj[k] * Wj[k]
        x0 = Wj[j]
        if sigma == 0:
            if x0 == 0:
                raise RankDeficiencyError(f"pivot column {j} vanished")
            continue
        mu = tier.sqrt(x0 * x0 + sigma)
        v0 = x0 + mu if x0 >= 0 else x0 - mu
        vtail = Wj[j + 1:m]  # copy: the loop below overwrites row j
        vnorm2 = v0 * v0 + sigma
        # apply I - (2/vnorm2) v v^T to the column span j..m-1 of rows >= j
        for i in range(j, n):
            Wi = W[i]
            w = Wi[j] * v0
            for k, vk in enumerate(vtail, j + 1):
                w = w + Wi[k] * vk
            w = (w + w) / vnorm2
            Wi[j] = Wi[j] - w * v0
            for k, vk in enumerate(vtail, j + 1):
                Wi[k] = Wi[k] - w * vk
        for k in range(j + 1, m):
            Wj[k] = zero
    for j in range(m):
        if W[j][j] < 0:
            for i in range(j, n):
                W[i][j] = -W[i][j]
    return W


# --------------------------------------------------------------------------
# shadow lifecycle


def _identity_like(n, tier):
    one, zero = tier.one(), tier.zero()
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def spawn_shadow(parent: RelationState, tier: Tier, cfg: LevelConfig,
                 parent_floor=None) -> ShadowState:
    """Re-initialize a tier replica of `parent`.

    ybar is parent.y scaled so its largest entry is unity, then demoted;
    Hbar is the demoted H, LQ-refactored at the tier.  Raises
    DynamicRangeError when the y spread exceeds the tier's capability
    (the caller then iterates at the parent's own precision instead).

    `parent_floor` is the parent-frame y level at which control must
    return to the parent (the exhaustion margin at the full level, or the
    parent replica's own floor).  It is rescaled into this replica's
    frame and combined with the tier's intrinsic floor, so a nested
    replica can never dig past a threshold an ancestor needs to see.
    """
    n = parent.n
    with parent.tier.context():
        ymax = max(abs(v) for v in parent.y)
        ymin = min(abs(v) for v in parent.y)
        if ymin == 0:
            raise DynamicRangeError("a y entry is exactly zero")
        spread = ymax / ymin
        if spread > gmpy2.mpfr(10) ** tier.range_orders:
            raise DynamicRangeError(
                f"y spans more than {tier.range_orders} orders for {tier.kind}")
        inv = 1 / ymax
        y_scaled = [v * inv for v in parent.y]
        scale_exp10 = int(gmpy2.floor(gmpy2.log10(ymax)))
        scaled_parent_floor = None
        if parent_floor is not None:
            scaled_parent_floor = parent_floor / ymax
        # power-of-two exponent shift, only when H would overflow the tier
        # (uniform H scaling leaves every pivot, multiplier, and rotation
        # unchanged; only the replica-local bound scale shifts)
        h_rows = parent.H
        h_shift = 0
        if tier.is_double:
            hmax = max(abs(v) for row in parent.H for v in row)
            excess = int(gmpy2.floor(gmpy2.log2(hmax))) - 800 if hmax > 0 else 0
            if excess > 0:
                h_shift = excess
                h_rows = [[gmpy2.mul_2exp(v, -h_shift) for v in row]
                          for row in parent.H]
    with tier.context():
        floor = cfg.y_floor_for(tier)
        if scaled_parent_floor is not None:
            try:
                sf = demote(scaled_parent_floor, tier)
            except TierRangeError:
                sf = None
            if sf is not None and sf > floor:
                floor = sf
        ybar = [demote(v, tier) for v in y_scaled]
        hbar = [[demote(v, tier) for v in row] for row in h_rows]
        hbar = lq_factor(hbar, tier)
        gamma = demote(parent.gamma, tier)
        pows = _pslq._gamma_powers(gamma, n, tier)
        if parent.algo == "multipair":
            st = _mp.MultiPairState(
                n=n, tier=tier, policy=None, gamma=gamma, gamma_pows=pows,
                x_hat=None, y=ybar, H=hbar, A=_identity_like(n, tier),
                B_rows=_identity_like(n, tier), beta=parent.beta,
            )
        else:
            st = RelationState(
                n=n, tier=tier, policy=None, gamma=gamma, gamma_pows=pows,
                x_hat=None, y=ybar, H=hbar, A=_identity_like(n, tier),
                B_cols=_identity_like(n, tier),
            )
        st.best_bound = _pslq._bound_from_h(st)
    return ShadowState(tier=tier, state=st, scale_exp10=scale_exp10,
                       y_floor=floor, h_scale_log2=h_shift)


def _b_arrays(state):
    return state.B_rows if state.algo == "multipair" else state.B_cols


def _snapshot(st):
    extra = ()
    if st.algo == "multipair":
        extra = (tuple(st.y_history), st.force_single)
    return (
        list(st.y),
        [list(r) for r in st.H],
        [list(r) for r in st.A],
        [list(r) for r in _b_arrays(st)],
        st.iter_count,
        st.best_bound,
        extra,
    )


def _restore(st, snap):
    y, H, A, B, iters, bound, extra = snap
    st.y = y
    st.H = H
    st.A = A
    if st.algo == "multipair":
        st.B_rows = B
        st.y_history = deque(extra[0], maxlen=_mp._HISTORY_DEPTH)
        st.force_single = extra[1]
    else:
        st.B_cols = B
    st.iter_count = iters
    st.best_bound = bound


def _threshold_event(shadow: ShadowState, cfg: LevelConfig) -> ShadowEvent:
    st = shadow.state
    tier = shadow.tier
    acap = cfg.abandon_cap_for(tier)
    ecap = cfg.entry_cap_for(tier)
    amax = 0
    for row in st.A:
        for v in row:
            a = -v if v < 0 else v
            if a > amax:
                amax = a
    for row in _b_arrays(st):
        for v in row:
            a = -v if v < 0 else v
            if a > amax:
                amax = a
    if amax > acap:
        return ShadowEvent.ABANDON
    if amax >= ecap:
        return ShadowEvent.FLUSH_ENTRY_CAP
    y_min = min(abs(v) for v in st.y)
    if y_min <= shadow.y_floor:
        return ShadowEvent.FLUSH_Y_FLOOR
    return ShadowEvent.CONTINUE


def shadow_iterate(shadow: ShadowState, cfg: LevelConfig) -> ShadowEvent:
    """One iteration at the shadow tier, then monitor the thresholds.

    ABANDON means the iteration pushed an entry past the tier's exact
    integer boundary (or degenerated the replica's H); the previous
    iteration's arrays have already been restored when it is returned.
    """
    st = shadow.state
    with st.tier.context():
        shadow.saved_prev = _snapshot(st)
        try:
            shadow.last_report = st.step()
        except ZeroDivisionError:
            _restore(st, shadow.saved_prev)
            return ShadowEvent.ABANDON
        ev = _threshold_event(shadow, cfg)
        if ev is ShadowEvent.ABANDON:
            _restore(st, shadow.saved_prev)
        return ev


# --------------------------------------------------------------------------
# flushes


def _promote_exact(rows, tier: Tier):
    cap = tier.exact_int_cap
    out = []
    for row in rows:
        new = []
        for v in row:
            if not is_exact_int(v, cap):
                raise ShadowCorruptionError(
                    f"shadow update entry {v!r} is not an exact integer")
            new.append(int(v))
        out.append(new)
    return out


def flush_updates(state: RelationState, shadow: ShadowState, *,
                  workers: int = 1) -> None:
    """Fold the shadow's accumulated integer updates into `state`.

    Single-pair orientation: y <- y@Bbar, B <- B@Bbar, A <- Abar@A,
    H <- Abar@H.  Multi-pair orientation (transposed B): y <- Bbar@y,
    B <- Bbar@B, A and H as before.  All products use the fixed
    ascending-index accumulation of the parallel layer, so the result is
    independent of the worker count.  The caller refactorizes H afterward.
    """
    sh = shadow.state
    abar = _promote_exact(sh.A, shadow.tier)
    bbar = _promote_exact(_b_arrays(sh), shadow.tier)
    bits = None if state.tier.is_double else state.tier.bits
    with state.tier.context():
        if state.algo == "multipair":
            # bbar rows are Bbar rows: y <- Bbar @ y, B <- Bbar @ B
            state.y = par_matvec(bbar, state.y, workers=workers, bits=bits)
            state.B_rows = par_matmul(bbar, state.B_rows, workers=workers)
        else:
            # bbar rows are Bbar columns: out[k] = sum_i y_i Bbar[i][k]
            state.y = par_matvec(bbar, state.y, workers=workers, bits=bits)
            state.B_cols = par_matmul(bbar, state.B_cols, workers=workers)
        if state.A is not None:
            state.A = par_matmul(abar, state.A, workers=workers)
        state.H = par_matmul(abar, state.H, workers=workers, bits=bits)


# --------------------------------------------------------------------------
# the multi-level driver


def _level_stats():
    return {
        "full": {"iterations": 0, "flushes": 0},
        "intermediate": {"iterations": 0, "flushes": 0},
        "double": {"iterations": 0, "flushes": 0},
    }


class _Driver:
    def __init__(self, state, cfg, max_iters, workers, log, flush_hook):
        self.state = state
        self.cfg = cfg
        self.max_iters = max_iters
        self.workers = workers
        self.log = log
        self.flush_hook = flush_hook
        self.stats = _level_stats()
        self.total = 0
        self.out = None

    def budget_left(self) -> bool:
        return self.total < self.max_iters

    def _log_step(self, level: str, report):
        if self.log is None:
            return
        self.log({
            "iter": self.total,
            "level": level,
            "y_min_exp": _exp10(report.y_min),
            "y_max_exp": _exp10(report.y_max),
            "bound": format_sci(self.state.best_bound, 6),
            "pairs": len(report.pairs),
        })

    def full_step(self):
        st = self.state
        try:
            report = st.step()
        except ZeroDivisionError:
            self.out = RelationOutcome(Status.PRECISION_EXHAUSTED, None,
                                       st.best_bound, None, self.total)
            return
        self.total += 1
        self.stats["full"]["iterations"] += 1
        self._log_step("full", report)
        self.out = _pslq.terminal_outcome(st)

    def shadow_step(self, shadow) -> ShadowEvent:
        ev = shadow_iterate(shadow, self.cfg)
        if ev is not ShadowEvent.ABANDON:
            self.total += 1
            self.stats[shadow.tier.kind]["iterations"] += 1
            if self.log is not None:
                self._log_step(shadow.tier.kind, shadow.last_report)
        return ev

    def flush_to_full(self, shadow):
        st = self.state
        flush_updates(st, shadow, workers=self.workers)
        try:
            st.H = lq_factor(st.H, st.tier)
        except RankDeficiencyError:
            self.out = RelationOutcome(Status.PRECISION_EXHAUSTED, None,
                                       st.best_bound, None, self.total)
            return
        bound = _pslq._bound_from_h(st)
        if bound > st.best_bound:
            st.best_bound = bound
        self.stats[shadow.tier.kind]["flushes"] += 1
        if self.flush_hook is not None:
            self.flush_hook(st, shadow.tier)
        self.out = _pslq.terminal_outcome(st)

    def flush_to_intermediate(self, ish, dsh):
        flush_updates(ish.state, dsh, workers=self.workers)
        with ish.tier.context():
            ish.state.H = lq_factor(ish.state.H, ish.tier)
        self.stats["double"]["flushes"] += 1


def _exp10(v) -> int | None:
    try:
        a = abs(v)
        if a == 0:
            return None
        if isinstance(a, float):
            return int(math.floor(math.log10(a)))
        return int(gmpy2.floor(gmpy2.log10(a)))
    except (OverflowError, ValueError):
        return None


def run_multilevel(x, algo: str = "multipair",
                   policy: EpsilonPolicy | None = None,
                   cfg: LevelConfig | None = None, *,
                   gamma=None, beta: float = 0.4,
                   max_iters: int = 1_000_000, workers: int = 1,
                   log=None, flush_hook=None) -> RelationOutcome:
    """Full orchestration: init, spawn/iterate/flush cycles, termination.

    `algo` is "pslq" or "multipair".  `log`, when given, receives one dict
    per iteration (iter, level, y exponents, running bound, pairs).
    `flush_hook(state, tier)` fires after every flush into the full state,
    once H is refactorized (used for determinism checks).  Returns the
    terminal report; `level_stats` carries per-tier iteration and flush
    counts, where a flush is counted against its source tier.
    """
    if policy is None:
        raise ValueError("an EpsilonPolicy is required")
    cfg = cfg or LevelConfig()
    levels = cfg.levels
    if levels == 3 and policy.work_digits < cfg.intermediate_digits + 50:
        levels = 2  # nesting an intermediate tier this close to full is noise
    maintain_a = not cfg.resolve_omit_a()

    if algo == "multipair":
        state = _mp.mp_init_state(x, gamma=gamma, beta=beta, policy=policy,
                                  maintain_a=maintain_a, workers=workers)
    elif algo == "pslq":
        state = _pslq.init_state(x, gamma=gamma, policy=policy,
                                 maintain_a=maintain_a, workers=workers)
    else:
        raise ValueError(f"unknown algorithm {algo!r}")

    drv = _Driver(state, cfg, max_iters, workers, log, flush_hook)
    with state.tier.context():
        drv.out = _pslq.terminal_outcome(state)
        if levels == 1:
            while drv.out is None and drv.budget_left():
                drv.full_step()
        elif levels == 2:
            _drive_two_level(drv)
        else:
            _drive_three_level(drv)
    out = drv.out
    if out is None:
        out = RelationOutcome(Status.ITERATION_LIMIT, None, state.best_bound,
                              None, drv.total)
    out.iterations = drv.total
    out.level_stats = drv.stats
    return out


def _drive_two_level(drv: _Driver):
    state, cfg = drv.state, drv.cfg
    consecutive_abandons = 0
    while drv.out is None and drv.budget_left():
        try:
            sh = spawn_shadow(state, DOUBLE, cfg,
                              parent_floor=state.exhaust_thr)
        except DynamicRangeError:
            drv.full_step()
            continue
        flushed = False
        while drv.out is None and drv.budget_left():
            ev = drv.shadow_step(sh)
            if ev is ShadowEvent.CONTINUE:
                continue
            flushed = True
            if ev is ShadowEvent.ABANDON:
                drv.flush_to_full(sh)  # restored arrays
                consecutive_abandons += 1
                recover = min(consecutive_abandons, 4)
                while recover and drv.out is None and drv.budget_left():
                    drv.full_step()
                    recover -= 1
            else:
                drv.flush_to_full(sh)
                consecutive_abandons = 0
            break
        if not flushed and drv.out is None:
            drv.flush_to_full(sh)  # budget ran out: keep the shadow's work


def _drive_three_level(drv: _Driver):
    state, cfg = drv.state, drv.cfg
    itier = Tier.intermediate(cfg.intermediate_digits)
    while drv.out is None and drv.budget_left():
        try:
            ish = spawn_shadow(state, itier, cfg,
                               parent_floor=state.exhaust_thr)
        except DynamicRangeError:
            drv.full_step()
            continue
        _drive_intermediate(drv, ish)


def _drive_intermediate(drv: _Driver, ish: ShadowState):
    """Run double-shadow cycles against an intermediate replica until it
    trips its own thresholds, then flush it into the full state."""
    cfg = drv.cfg
    consecutive_abandons = 0
    while drv.out is None and drv.budget_left():
        with ish.tier.context():
            trip = _threshold_event(ish, cfg)
        if trip is not ShadowEvent.CONTINUE:
            drv.flush_to_full(ish)
            return
        try:
            dsh = spawn_shadow(ish.state, DOUBLE, cfg,
                               parent_floor=ish.y_floor)
        except DynamicRangeError:
            ev = drv.shadow_step(ish)
            if ev is not ShadowEvent.CONTINUE:
                drv.flush_to_full(ish)
                return
            continue
        while drv.out is None and drv.budget_left():
            ev = drv.shadow_step(dsh)
            if ev is ShadowEvent.CONTINUE:
                continue
            if ev is ShadowEvent.ABANDON:
                drv.flush_to_intermediate(ish, dsh)  # restored arrays
                consecutive_abandons += 1
                recover = min(consecutive_abandons, 4)
                while recover and drv.out is None and drv.budget_left():
                    ev2 = drv.shadow_step(ish)
                    if ev2 is not ShadowEvent.CONTINUE:
                        drv.flush_to_full(ish)
                        return
                    recover -= 1
            else:
                drv.flush_to_intermediate(ish, dsh)
                consecutive_abandons = 0
            break
    if drv.out is None and not drv.budget_left():
        # budget ran out mid-cycle: preserve the shadow's work
        drv.flush_to_full(ish)
