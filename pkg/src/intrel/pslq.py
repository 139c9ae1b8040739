"""The standard single-pair integer relation algorithm.

State layout: `y` and `H` hold tier scalars (MPFR at the full and
intermediate tiers, Python floats at the double tier); `A` and `B` hold
exact integer content (Python ints at the full tier, tier scalars with
integer values inside shadow replicas).  B is stored column-major
(`B_cols[j]` is column j) because the algorithm exchanges and recombines
whole columns, and a detected relation is read straight out of one column.

All operations assume the caller holds the state's tier context (the
public wrappers `init_state` / `iterate_once` / `run` open it themselves).
A state is owned by one task at a time; nothing here locks.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import gmpy2

from .precision import (
    DegenerateInputError,
    EpsilonPolicy,
    Tier,
    nint,
)

__all__ = [
    "RelationOutcome",
    "RelationState",
    "Status",
    "StepReport",
    "default_gamma",
    "init_state",
    "iterate_once",
    "norm_bound",
    "run",
    "terminal_outcome",
]


class Status(str, enum.Enum):
    FOUND = "found"
    PRECISION_EXHAUSTED = "precision_exhausted"
    ITERATION_LIMIT = "iteration_limit"


@dataclass
class RelationOutcome:
    """Terminal report of a search.

    `coefficients` is present iff status is FOUND, sign-normalized so the
    first nonzero entry is positive.  `confidence` is min|y|/max|y| at the
    moment of detection; tiny values mean a genuine relation.  `norm_bound`
    is the running maximum of all exclusion bounds seen.
    """

    status: Status
    coefficients: list | None
    norm_bound: object
    confidence: object | None
    iterations: int
    level_stats: dict | None = None

    @property
    def found(self) -> bool:
        return self.status is Status.FOUND


@dataclass
class StepReport:
    pairs: tuple          # exchanged index pairs, ((m, m+1), ...) 0-based
    y_min: object
    y_max: object
    bound: object

    @property
    def pivot(self) -> int:
        return self.pairs[0][0]


class RelationState:
    """Mutable search state for the single-pair algorithm."""

    algo = "pslq"

    def __init__(self, *, n, tier, policy, gamma, gamma_pows, x_hat, y, H,
                 A, B_cols, workers=1):
        self.n = n
        self.tier = tier
        self.policy = policy
        self.gamma = gamma
        self.gamma_pows = gamma_pows
        self.x_hat = x_hat
        self.y = y
        self.H = H
        self.A = A
        self.B_cols = B_cols
        self.iter_count = 0
        self.best_bound = tier.zero()
        self.workers = workers
        self.detect_thr = policy.detect_threshold() if policy else None
        self.exhaust_thr = policy.exhaust_threshold() if policy else None

    def step(self):
        return _iterate(self)

    def b_matrix(self):
        """B in conventional row-major orientation (rows indexed first)."""
        n = self.n
        return [[self.B_cols[j][i] for j in range(n)] for i in range(n)]

    def relation_candidate(self, k):
        """Raw integer content of the relation slot for y index k."""
        return list(self.B_cols[k])


def default_gamma(digits_or_tier):
    """sqrt(4/3), the smallest admissible pivot weight, at full precision."""
    tier = (digits_or_tier if isinstance(digits_or_tier, Tier)
            else Tier.full(digits_or_tier))
    with tier.context():
        return tier.sqrt(tier.one() * 4 / 3)


# --------------------------------------------------------------------------
# initialization


def _coerce_input(x):
    xs = list(x)
    if len(xs) < 2:
        raise DegenerateInputError("need at least two input entries")
    vals = []
    for i, v in enumerate(xs):
        try:
            w = gmpy2.mpfr(v)
        except (ValueError, ArithmeticError) as e:
            raise DegenerateInputError(f"input entry {i}: {e}") from None
        if not gmpy2.is_finite(w) or w == 0:
            raise DegenerateInputError(f"input entry {i} is zero or non-finite")
        vals.append(w)
    return vals


def _normalize(vals, tier):
    # partial sums of squares s_k = sqrt(sum_{j>=k} x_j^2), then y = x / s_0
    n = len(vals)
    s = [None] * n
    acc = tier.zero()
    for k in range(n - 1, -1, -1):
        acc = acc + vals[k] * vals[k]
        s[k] = tier.sqrt(acc)
    t = tier.one() / s[0]
    y = [t * v for v in vals]
    s = [t * v for v in s]
    return y, s


def _initial_h(y, s, tier):
    n = len(y)
    zero = tier.zero()
    H = [[zero] * (n - 1) for _ in range(n)]
    for j in range(n - 1):
        H[j][j] = s[j + 1] / s[j]
        denom = s[j] * s[j + 1]
        for i in range(j + 1, n):
            H[i][j] = -(y[i] * y[j]) / denom
    return H


def _identity_rows(n, one, zero):
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def _hermite_reduce(y, H, A, B_cols):
    # full reduction pass: every row against every earlier diagonal
    n = len(y)
    for i in range(1, n):
        Hi = H[i]
        yi = y[i]
        for j in range(i - 1, -1, -1):
            t = nint(Hi[j] / H[j][j])
            if t == 0:
                continue
            y[j] = y[j] + t * yi
            Hj = H[j]
            for k in range(j + 1):
                Hi[k] = Hi[k] - t * Hj[k]
            if A is not None:
                Ai, Aj = A[i], A[j]
                for k in range(n):
                    Ai[k] = Ai[k] - t * Aj[k]
            Bj, Bi = B_cols[j], B_cols[i]
            for k in range(n):
                Bj[k] = Bj[k] + t * Bi[k]


def init_state(x, gamma=None, policy: EpsilonPolicy | None = None, *,
               maintain_a: bool = True, workers: int = 1) -> RelationState:
    """Build a reduced starting state for the input vector `x`.

    `x` entries may be MPFR scalars, ints, or decimal strings; they are
    rounded to `policy.work_digits` working digits.  A and B start as the
    identity and are immediately Hermite-reduced together with H, so all
    state invariants hold on return.
    """
    if policy is None:
        raise ValueError("an EpsilonPolicy is required")
    tier = Tier.full(policy.work_digits)
    with tier.context():
        vals = _coerce_input(x)
        n = len(vals)
        g = _check_gamma(gamma, tier)
        y, s = _normalize(vals, tier)
        x_hat = list(y)
        H = _initial_h(y, s, tier)
        A = _identity_rows(n, 1, 0) if maintain_a else None
        B_cols = _identity_rows(n, 1, 0)
        _hermite_reduce(y, H, A, B_cols)
        state = RelationState(
            n=n, tier=tier, policy=policy, gamma=g,
            gamma_pows=_gamma_powers(g, n, tier), x_hat=x_hat,
            y=y, H=H, A=A, B_cols=B_cols, workers=workers,
        )
        state.best_bound = _bound_from_h(state)
    return state


def _check_gamma(gamma, tier):
    floor_g = tier.sqrt(tier.one() * 4 / 3)
    if gamma is None:
        return floor_g
    g = gmpy2.mpfr(gamma)
    if g < floor_g and (floor_g - g) / floor_g > 1e-12:
        raise ValueError("gamma must be at least sqrt(4/3)")
    return g


def _gamma_powers(gamma, n, tier):
    pows = []
    cur = tier.one()
    for _ in range(n - 1):
        cur = cur * gamma
        pows.append(cur)
    return pows


# --------------------------------------------------------------------------
# one iteration


def _iterate(st: RelationState) -> StepReport:
    n, y, H, A, Bc = st.n, st.y, st.H, st.A, st.B_cols
    pows = st.gamma_pows

    # pivot: largest gamma^i |H_ii|, ties to the smallest index
    m = 0
    best = pows[0] * abs(H[0][0])
    for i in range(1, n - 1):
        v = pows[i] * abs(H[i][i])
        if v > best:
            best = v
            m = i

    # exchange entries m, m+1 of y, rows of A and H, columns of B
    y[m], y[m + 1] = y[m + 1], y[m]
    H[m], H[m + 1] = H[m + 1], H[m]
    if A is not None:
        A[m], A[m + 1] = A[m + 1], A[m]
    Bc[m], Bc[m + 1] = Bc[m + 1], Bc[m]

    _remove_corner(st, m)

    # partial reduction below the pivot
    for i in range(m + 1, n):
        Hi = H[i]
        yi = y[i]
        for j in range(min(i - 1, m + 1), -1, -1):
            t = nint(Hi[j] / H[j][j])
            if t == 0:
                continue
            y[j] = y[j] + t * yi
            Hj = H[j]
            for k in range(j + 1):
                Hi[k] = Hi[k] - t * Hj[k]
            if A is not None:
                Ai, Aj = A[i], A[j]
                for k in range(n):
                    Ai[k] = Ai[k] - t * Aj[k]
            Bj, Bi = Bc[j], Bc[i]
            for k in range(n):
                Bj[k] = Bj[k] + t * Bi[k]

    bound = _bound_from_h(st)
    if bound > st.best_bound:
        st.best_bound = bound
    st.iter_count += 1
    y_min, y_max = _y_extrema(y)
    return StepReport(((m, m + 1),), y_min, y_max, bound)


def _remove_corner(st, m):
    # restore the lower-trapezoidal shape after an exchange at pivot m
    n, H, tier = st.n, st.H, st.tier
    if m > n - 3:
        return
    t3 = H[m][m]
    t4 = H[m][m + 1]
    t0 = tier.sqrt(t3 * t3 + t4 * t4)
    t1 = t3 / t0
    t2 = t4 / t0
    for i in range(m, n):
        t3, t4 = H[i][m], H[i][m + 1]
        H[i][m] = t1 * t3 + t2 * t4
        H[i][m + 1] = t1 * t4 - t2 * t3
    H[m][m + 1] = tier.zero()  # exact zero of the rotation


def _y_extrema(y):
    y_min = y_max = abs(y[0])
    for v in y[1:]:
        a = abs(v)
        if a < y_min:
            y_min = a
        elif a > y_max:
            y_max = a
    return y_min, y_max


def _bound_from_h(st):
    d = abs(st.H[0][0])
    for j in range(1, st.n - 1):
        a = abs(st.H[j][j])
        if a > d:
            d = a
    if d == 0:
        raise ZeroDivisionError("H diagonal vanished")
    return st.tier.one() / d


def norm_bound(state):
    """1 / max_j |H_jj|: no relation has Euclidean norm below this."""
    with state.tier.context():
        return _bound_from_h(state)


def iterate_once(state) -> StepReport:
    """Apply one full iteration (exchange, corner removal, reduction)."""
    with state.tier.context():
        return state.step()


# --------------------------------------------------------------------------
# termination


def _normalized_relation(vec):
    coeffs = [int(v) for v in vec]
    for c in coeffs:
        if c:
            return coeffs if c > 0 else [-c2 for c2 in coeffs]
    raise ArithmeticError("relation candidate is the zero vector")


def terminal_outcome(state) -> RelationOutcome | None:
    """Detection/exhaustion test at the state's full working precision.

    Detection wins over exhaustion: a y entry below the detection
    threshold reports FOUND even though it is also below the (larger)
    exhaustion margin.
    """
    y = state.y
    k = 0
    y_min = abs(y[0])
    y_max = y_min
    for i in range(1, state.n):
        a = abs(y[i])
        if a < y_min:
            y_min = a
            k = i
        elif a > y_max:
            y_max = a
    if y_min < state.detect_thr:
        coeffs = _normalized_relation(state.relation_candidate(k))
        confidence = y_min / y_max if y_max > 0 else state.tier.zero()
        return RelationOutcome(Status.FOUND, coeffs, state.best_bound,
                               confidence, state.iter_count)
    if state.A is not None:
        cap = state.policy.a_entry_cap
        for row in state.A:
            for v in row:
                if v > cap or -v > cap:
                    return RelationOutcome(Status.PRECISION_EXHAUSTED, None,
                                           state.best_bound, None,
                                           state.iter_count)
    if y_min < state.exhaust_thr:
        return RelationOutcome(Status.PRECISION_EXHAUSTED, None,
                               state.best_bound, None, state.iter_count)
    return None


def run(state, max_iters: int) -> RelationOutcome:
    """Iterate until detection, precision exhaustion, or the cap.

    Works for any state exposing `step()` (single-pair or multi-pair).
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    with state.tier.context():
        out = terminal_outcome(state)
        while out is None and state.iter_count < max_iters:
            try:
                state.step()
            except ZeroDivisionError:
                out = RelationOutcome(Status.PRECISION_EXHAUSTED, None,
                                      state.best_bound, None, state.iter_count)
                break
            out = terminal_outcome(state)
        if out is None:
            out = RelationOutcome(Status.ITERATION_LIMIT, None,
                                  state.best_bound, None, state.iter_count)
    return out
