"""The multi-pair variant: up to beta*n disjoint adjacent exchanges per
iteration, diagonal-order reduction through a multiplier matrix T, and a
transposed B (a detected relation is read from a row, not a column).

Differences from the single-pair algorithm, all load-bearing:
  - no reduction pass during initialization;
  - B is row-major here (`B_rows[i]` is row i), maintaining y = B @ x_hat;
  - the reduction sweeps successive lower diagonals of H, consuming T
    multipliers produced earlier in the same sweep;
  - y, A and B are updated after the sweep, in the printed loop order
    (the A update is order-sensitive: row j must absorb its own updates
    before rows below subtract multiples of it);
  - a ring buffer of the last eight y vectors guards against the rare
    two-cycle: on an exact repeat the next iteration uses a single pair.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .parallel import par_map, plan_partition
from .precision import EpsilonPolicy, Tier, nint
from .pslq import (
    RelationState,
    StepReport,
    _bound_from_h,
    _check_gamma,
    _coerce_input,
    _gamma_powers,
    _identity_rows,
    _initial_h,
    _normalize,
    _remove_corner,
    _y_extrema,
)

__all__ = [
    "MultiPairState",
    "PairSelection",
    "cycle_guard",
    "mp_init_state",
    "mp_iterate_once",
    "select_pairs",
]

_HISTORY_DEPTH = 8


@dataclass(frozen=True)
class PairSelection:
    """Disjoint adjacent index pairs, in decreasing order of their sort key."""

    pairs: tuple

    @property
    def p(self) -> int:
        return len(self.pairs)


def select_pairs(diag, beta: float, max_pairs: int | None = None) -> PairSelection:
    """Greedy selection down the sorted diagonal weights.

    Walks the (n-1) weights in decreasing order (stable, so equal keys
    keep index order), skipping any index already used by a chosen pair,
    until floor(beta*n) pairs are taken or the list ends.  At least one
    pair is always allowed so tiny problems make progress.
    """
    count = len(diag)
    n = count + 1
    if max_pairs is None:
        max_pairs = max(1, int(beta * n))
    order = sorted(range(count), key=diag.__getitem__, reverse=True)
    taken = bytearray(n)
    pairs = []
    for m in order:
        if len(pairs) >= max_pairs:
            break
        if taken[m] or taken[m + 1]:
            continue
        pairs.append((m, m + 1))
        taken[m] = 1
        taken[m + 1] = 1
    return PairSelection(tuple(pairs))


class MultiPairState(RelationState):
    """Mutable search state for the multi-pair algorithm (transposed B)."""

    algo = "multipair"

    def __init__(self, *, n, tier, policy, gamma, gamma_pows, x_hat, y, H,
                 A, B_rows, beta=0.4, workers=1):
        super().__init__(n=n, tier=tier, policy=policy, gamma=gamma,
                         gamma_pows=gamma_pows, x_hat=x_hat, y=y, H=H,
                         A=A, B_cols=None, workers=workers)
        self.B_rows = B_rows
        self.beta = beta
        self.T = None
        self.y_history = deque(maxlen=_HISTORY_DEPTH)
        self.force_single = False
        self.guard_hits = 0

    def step(self):
        return _mp_iterate(self)

    def b_matrix(self):
        return [list(row) for row in self.B_rows]

    def relation_candidate(self, k):
        """Relation content lives in row k of the transposed B."""
        return list(self.B_rows[k])


def mp_init_state(x, gamma=None, beta: float = 0.4,
                  policy: EpsilonPolicy | None = None, *,
                  maintain_a: bool = True, workers: int = 1) -> MultiPairState:
    """Starting state: identical to the single-pair initialization except
    that no reduction pass is applied (the first sweep does it)."""
    if policy is None:
        raise ValueError("an EpsilonPolicy is required")
    if not (0 < beta <= 1):
        raise ValueError("beta must lie in (0, 1]")
    tier = Tier.full(policy.work_digits)
    with tier.context():
        vals = _coerce_input(x)
        n = len(vals)
        g = _check_gamma(gamma, tier)
        y, s = _normalize(vals, tier)
        x_hat = list(y)
        H = _initial_h(y, s, tier)
        A = _identity_rows(n, 1, 0) if maintain_a else None
        B_rows = _identity_rows(n, 1, 0)
        state = MultiPairState(
            n=n, tier=tier, policy=policy, gamma=g,
            gamma_pows=_gamma_powers(g, n, tier), x_hat=x_hat,
            y=y, H=H, A=A, B_rows=B_rows, beta=beta, workers=workers,
        )
        state.best_bound = _bound_from_h(state)
    return state


def cycle_guard(state: MultiPairState) -> bool:
    """True iff the current y equals one of the eight stored predecessors
    exactly (bit equality at working precision)."""
    y = state.y
    n = state.n
    for prev in state.y_history:
        if len(prev) == n and all(a == b for a, b in zip(prev, y)):
            return True
    return False


def _mp_iterate(st: MultiPairState) -> StepReport:
    n, y, H, A, B = st.n, st.y, st.H, st.A, st.B_rows
    pows = st.gamma_pows

    # steps 1-2: sort diagonal weights, pick disjoint pairs
    keys = [pows[i] * abs(H[i][i]) for i in range(n - 1)]
    cap = 1 if st.force_single else None
    st.force_single = False
    sel = select_pairs(keys, st.beta, max_pairs=cap)

    # step 3: simultaneous exchanges (disjoint index sets)
    for m, m1 in sel.pairs:
        y[m], y[m1] = y[m1], y[m]
        H[m], H[m1] = H[m1], H[m]
        if A is not None:
            A[m], A[m1] = A[m1], A[m]
        B[m], B[m1] = B[m1], B[m]

    # step 4: corner removals (disjoint column pairs)
    for m, _ in sel.pairs:
        _remove_corner(st, m)

    # step 5: reduction along successive lower diagonals, filling T
    T = [[0] * n for _ in range(n)]
    st.T = T
    for offs in range(1, n):
        for j in range(n - offs):
            l = j + offs
            Hl = H[l]
            Tl = T[l]
            v = Hl[j]
            for k in range(j + 1, l):
                tlk = Tl[k]
                if tlk:
                    v = v - tlk * H[k][j]
            t = nint(v / H[j][j])
            Tl[j] = t
            Hl[j] = v - t * H[j][j] if t else v

    # step 6: y update, original values on the right-hand side
    for j in range(n - 1):
        acc = y[j]
        for i in range(j + 1, n):
            tij = T[i][j]
            if tij:
                acc = acc + tij * y[i]
        y[j] = acc

    # step 7: A and B updates; independent across columns k, so the
    # column loop may run innermost (or partitioned across workers)
    # without changing any value
    if st.workers > 1 and n >= 16:
        _update_ab_sliced(st, T)
    else:
        _update_ab_range(st, T, 0, n)

    bound = _bound_from_h(st)
    if bound > st.best_bound:
        st.best_bound = bound
    st.iter_count += 1
    y_min, y_max = _y_extrema(y)

    if cycle_guard(st):
        st.force_single = True
        st.guard_hits += 1
    st.y_history.append(tuple(y))
    return StepReport(sel.pairs, y_min, y_max, bound)


def _update_ab_range(st, T, lo, hi):
    # the printed (k, j, i) nest with k restricted to [lo, hi)
    n, A, B = st.n, st.A, st.B_rows
    for j in range(n - 1):
        Aj = A[j] if A is not None else None
        Bj = B[j]
        for i in range(j + 1, n):
            t = T[i][j]
            if t == 0:
                continue
            if Aj is not None:
                Ai = A[i]
                for k in range(lo, hi):
                    Ai[k] = Ai[k] - t * Aj[k]
            Bi = B[i]
            for k in range(lo, hi):
                Bj[k] = Bj[k] + t * Bi[k]


def _update_ab_sliced(st, T):
    plan = plan_partition(st.n, st.workers, "column")
    bits = None if st.tier.is_double else st.tier.bits
    par_map(plan, lambda lo, hi: _update_ab_range(st, T, lo, hi), bits=bits)


def mp_iterate_once(state: MultiPairState) -> StepReport:
    """Apply one full multi-pair iteration (steps 1-7 plus bookkeeping)."""
    with state.tier.context():
        return state.step()
