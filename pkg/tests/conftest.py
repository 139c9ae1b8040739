"""Shared fixtures and independent oracles.

The oracles here deliberately use different algorithms (and mostly a
different arithmetic library) from the package: Euler-Maclaurin for
zeta, mpmath for pi and roots, exhaustive search for minimal relations.
"""

from __future__ import annotations

import bisect
import random
import struct
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

import gmpy2
import pytest

from intrel.precision import workprec


# --------------------------------------------------------------------------
# Euler-Maclaurin zeta oracle, exact Bernoulli numbers from the defining
# recurrence sum_{k<=m} C(m+1,k) B_k = 0


@lru_cache(maxsize=None)
def bernoulli(m: int) -> Fraction:
    if m == 0:
        return Fraction(1)
    if m == 1:
        return Fraction(-1, 2)
    if m % 2 == 1:
        return Fraction(0)
    acc = Fraction(0)
    for k in range(m):
        acc += comb(m + 1, k) * bernoulli(k)
    return -acc / (m + 1)


def em_zeta(s: int, digits: int):
    """zeta(s) = sum_{k<N} k^-s + N^(1-s)/(s-1) + N^-s/2 + E-M corrections."""
    work = digits + 10
    n = max(10, int(work * 0.8)) + s
    with workprec(work):
        one = gmpy2.mpfr(1)
        acc = gmpy2.mpfr(0)
        for k in range(1, n):
            acc += one / gmpy2.mpz(k) ** s
        acc += one / ((s - 1) * gmpy2.mpz(n) ** (s - 1))
        acc += one / (2 * gmpy2.mpz(n) ** s)
        tol = gmpy2.mpfr(f"1e-{work + 2}")
        for j in range(1, 300):
            rising = 1
            for t in range(s, s + 2 * j - 1):
                rising *= t
            coeff = Fraction(bernoulli(2 * j), factorial(2 * j)) * rising
            term = (one * coeff.numerator / coeff.denominator
                    / gmpy2.mpz(n) ** (s + 2 * j - 1))
            acc += term
            if abs(term) < tol:
                break
        return acc


# --------------------------------------------------------------------------
# planted-relation instances and exhaustive minimal-relation search


def planted_instance(rng: random.Random, n: int, digits: int = 64,
                     coeff_bound: int = 10):
    """Random x in (1,2)^(n-1) plus one entry forcing a planted relation."""
    with workprec(digits):
        while True:
            a = [rng.randint(-coeff_bound, coeff_bound) for _ in range(n)]
            if any(a) and a[-1] != 0:
                break
        bits = digits * 33 // 10
        x = []
        for _ in range(n - 1):
            mant = rng.getrandbits(bits) | 1
            x.append(1 + gmpy2.mpfr(mant) / 2 ** bits)
        tail = -sum(c * v for c, v in zip(a[:-1], x)) / a[-1]
    if tail == 0:
        return planted_instance(rng, n, digits, coeff_bound)
    x.append(tail)
    return x, a


def minimal_relation_exhaustive(x, coeff_bound: int = 10, digits: int = 64):
    """Minimal-Euclidean-norm relation with |a_i| <= coeff_bound, via meet
    in the middle on half-vector dot products; None if no relation."""
    n = len(x)
    nl = n // 2
    with workprec(digits + 10):
        tol = gmpy2.mpfr(f"1e-{digits - 12}") * max(abs(v) for v in x)

        def span(vs):
            combos = [((), gmpy2.mpfr(0))]
            for v in vs:
                nxt = []
                for coeffs, s in combos:
                    for c in range(-coeff_bound, coeff_bound + 1):
                        nxt.append((coeffs + (c,), s + c * v))
                combos = nxt
            return combos

        lefts = span(x[:nl])
        rights = sorted(span(x[nl:]), key=lambda cs: cs[1])
        rvals = [float(cs[1]) for cs in rights]
        ftol = float(tol)
        best = best_norm = None
        for lc, ls in lefts:
            target = -float(ls)
            i = bisect.bisect_left(rvals, target - 2 * ftol)
            while i < len(rvals) and rvals[i] <= target + 2 * ftol:
                rc, rs = rights[i]
                i += 1
                if abs(ls + rs) > tol:
                    continue
                cand = lc + rc
                if not any(cand):
                    continue
                norm = sum(c * c for c in cand)
                if best_norm is None or norm < best_norm:
                    best, best_norm = list(cand), norm
    if best is not None and next(c for c in best if c) < 0:
        best = [-c for c in best]
    return best


# --------------------------------------------------------------------------
# bitwise serialization for determinism checks


def freeze_scalar(v):
    if isinstance(v, float):
        return ("f", struct.pack("<d", v))
    if isinstance(v, int):
        return ("i", v)
    m, e = v.as_mantissa_exp()  # exact value bits, no operation metadata
    return ("m", int(m), int(e), v.precision)


def freeze_state(state):
    b = state.B_rows if state.algo == "multipair" else state.B_cols
    return (
        tuple(freeze_scalar(v) for v in state.y),
        tuple(tuple(freeze_scalar(v) for v in row) for row in state.H),
        tuple(tuple(row) for row in state.A) if state.A is not None else None,
        tuple(tuple(row) for row in b),
    )


@pytest.fixture(scope="session")
def rng():
    return random.Random(20260808)
