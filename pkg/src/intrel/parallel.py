"""Deterministic data-parallel execution.

Workers receive disjoint slices of the index space; accumulation order
inside every dot product is fixed ascending, so results are bitwise
identical for any worker count.  A barrier (joining the pool) separates
algorithm steps; cross-step ordering is always the serial order.

Threads here buy determinism-preserving structure, not raw speed: the
interpreter serializes pure-Python arithmetic, so the win is in keeping
the partitioned code path identical to what a true parallel backend
would run.  Worker threads do not inherit the caller's MPFR context, so
tasks that touch multiprecision scalars must be given `bits`.
"""

from __future__ import annotations

import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import gmpy2

__all__ = [
    "PartitionPlan",
    "WorkerFaultError",
    "default_worker_count",
    "par_map",
    "par_matmul",
    "par_matvec",
    "par_vecmat",
    "plan_partition",
]

_ENV_VAR = "INTREL_THREADS"


class WorkerFaultError(RuntimeError):
    """A worker task raised; the state it was mutating is poisoned."""


def default_worker_count() -> int:
    try:
        return max(1, int(os.environ.get(_ENV_VAR, "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class PartitionPlan:
    """Assignment of a contiguous index space to workers.

    `spans[w]` is the half-open range owned by worker w; spans are
    ascending, disjoint, and cover [0, total) exactly once.  The plan is
    a pure function of (total, worker_count, unit).
    """

    unit: str  # "row" | "column" | "pair" | "diagonal"
    worker_count: int
    spans: tuple

    @property
    def total(self) -> int:
        return self.spans[-1][1] if self.spans else 0


def plan_partition(total: int, worker_count: int, unit: str = "row") -> PartitionPlan:
    if total < 0 or worker_count < 1:
        raise ValueError("need total >= 0 and worker_count >= 1")
    w = max(1, min(worker_count, total)) if total else 1
    base, rem = divmod(total, w)
    spans = []
    lo = 0
    for i in range(w):
        hi = lo + base + (1 if i < rem else 0)
        spans.append((lo, hi))
        lo = hi
    return PartitionPlan(unit, worker_count, tuple(spans))


_executors: dict = {}
_executors_lock = threading.Lock()


def _executor(workers: int) -> ThreadPoolExecutor:
    with _executors_lock:
        ex = _executors.get(workers)
        if ex is None:
            ex = ThreadPoolExecutor(max_workers=workers,
                                    thread_name_prefix="intrel")
            _executors[workers] = ex
        return ex


def par_map(plan: PartitionPlan, task, *, bits: int | None = None) -> None:
    """Run `task(lo, hi)` over every span of the plan.

    The task must touch only state addressed by its span; spans are
    disjoint by construction, so the end state equals sequential
    execution in ascending span order.  With one worker this *is* the
    sequential execution.  A task exception propagates (first span in
    ascending order wins) as WorkerFaultError.
    """
    spans = [s for s in plan.spans if s[0] < s[1]]
    if plan.worker_count == 1 or len(spans) <= 1:
        for lo, hi in spans:
            task(lo, hi)
        return

    def _wrapped(span):
        if bits is not None:
            gmpy2.set_context(gmpy2.context(precision=bits,
                                            trap_divzero=True,
                                            trap_invalid=True))
        task(*span)

    ex = _executor(plan.worker_count)
    futures = [ex.submit(_wrapped, span) for span in spans]
    fault = None
    for f in futures:
        exc = f.exception()
        if exc is not None and fault is None:
            fault = exc
    if fault is not None:
        raise WorkerFaultError("worker task failed; state is poisoned") from fault


# --------------------------------------------------------------------------
# fixed-order products
#
# Every element is a dot product accumulated in ascending k.  Exact-zero
# integer factors are skipped: adding a true zero never changes a value,
# so the result is identical to the unskipped order, just cheaper.


def _dot_rows(X_row, Y, c, lo, hi):
    s = 0
    for k in range(lo, hi):
        v = X_row[k]
        if v:
            s = s + v * Y[k][c]
    return s


def par_matmul(X, Y, *, workers: int = 1, bits: int | None = None) -> list:
    """X @ Y with ascending-k accumulation, row-partitioned across workers.

    X is a row-major matrix; Y is a row-major matrix.  Element types are
    whatever multiplication/addition support (ints, floats, MPFR); the
    usual use is an exact integer update matrix times a full-precision
    matrix.  Associativity is never assumed: the accumulation order is
    part of the contract.
    """
    rows = len(X)
    inner = len(Y)
    cols = len(Y[0])
    out = [None] * rows

    def _rows(lo, hi):
        for i in range(lo, hi):
            Xi = X[i]
            out[i] = [_dot_rows(Xi, Y, c, 0, inner) for c in range(cols)]

    par_map(plan_partition(rows, workers, "row"), _rows, bits=bits)
    return out


def par_matvec(X, v, *, workers: int = 1, bits: int | None = None) -> list:
    """X @ v (column vector), ascending-k accumulation, row-partitioned."""
    rows = len(X)
    inner = len(v)
    out = [None] * rows

    def _rows(lo, hi):
        for i in range(lo, hi):
            Xi = X[i]
            s = 0
            for k in range(inner):
                c = Xi[k]
                if c:
                    s = s + c * v[k]
            out[i] = s

    par_map(plan_partition(rows, workers, "row"), _rows, bits=bits)
    return out


def par_vecmat(v, Y, *, workers: int = 1, bits: int | None = None) -> list:
    """v @ Y (row vector), ascending-k accumulation, column-partitioned."""
    inner = len(v)
    cols = len(Y[0])
    out = [None] * cols

    def _cols(lo, hi):
        for c in range(lo, hi):
            s = 0
            for k in range(inner):
                w = Y[k][c]
                if w:
                    s = s + v[k] * w
            out[c] = s

    par_map(plan_partition(cols, workers, "column"), _cols, bits=bits)
    return out
