"""High-precision input constants for relation searches.

Every generator takes an explicit decimal digit target, overshoots
internally by ten guard digits, and returns a scalar whose relative error
is below 10**(2-digits).  Truncation points come from proven geometric
tail bounds, documented per series.  Exact integer arithmetic (Python
ints) is used for numerators/denominators; division happens once per term
at working precision, so each term contributes at most one rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import gmpy2

from .precision import digits_to_bits, promote, workprec

__all__ = [
    "AlgebraicSpec",
    "PolyRootSpec",
    "RefinementError",
    "SeriesSpec",
    "eval_series",
    "gen_algebraic",
    "gen_pi",
    "power_vector",
    "refine_root",
]

_GUARD = 10
_LN10 = math.log(10.0)


class RefinementError(ArithmeticError):
    """Newton refinement failed to converge to a simple root."""


# --------------------------------------------------------------------------
# Series specifications


@dataclass(frozen=True)
class SeriesSpec:
    """One summable constant.

    kind "pi":            pi itself.
    kind "zeta":          zeta(s) for integer s >= 2.
    kind "central_binom": sum_{n>=1} sign^(n-1) / (n^k * C(2n, n)),
                          sign = -1 when alternating.
    kind "bbp_term":      sum_{j>=0} 1 / (base^j * (modulus*j + offset)^power).
    """

    kind: str
    digits: int
    s: int = 0
    k: int = 0
    alternating: bool = False
    base: int = 0
    modulus: int = 0
    offset: int = 0
    power: int = 0

    def __post_init__(self):
        if self.digits < 16:
            raise ValueError("digits must be at least 16")
        if self.kind == "pi":
            pass
        elif self.kind == "zeta":
            if self.s < 2:
                raise ValueError("zeta order must be >= 2")
        elif self.kind == "central_binom":
            if self.k < 2:
                raise ValueError("central binomial weight must be >= 2")
        elif self.kind == "bbp_term":
            if self.base < 2:
                raise ValueError("bbp base must be >= 2")
            if not (1 <= self.offset <= self.modulus):
                raise ValueError("need 1 <= offset <= modulus")
            if self.power < 1:
                raise ValueError("bbp power must be >= 1")
        else:
            raise ValueError(f"unsupported series kind {self.kind!r}")

    @staticmethod
    def pi(digits: int) -> "SeriesSpec":
        return SeriesSpec("pi", digits)

    @staticmethod
    def zeta(s: int, digits: int) -> "SeriesSpec":
        return SeriesSpec("zeta", digits, s=s)

    @staticmethod
    def central_binom(k: int, alternating: bool, digits: int) -> "SeriesSpec":
        return SeriesSpec("central_binom", digits, k=k, alternating=alternating)

    @staticmethod
    def bbp_term(base: int, modulus: int, offset: int, power: int,
                 digits: int) -> "SeriesSpec":
        return SeriesSpec("bbp_term", digits, base=base, modulus=modulus,
                          offset=offset, power=power)


def eval_series(spec: SeriesSpec):
    """Evaluate `spec` to an MPFR scalar accurate beyond `spec.digits`."""
    if spec.kind == "pi":
        return gen_pi(spec.digits)
    if spec.kind == "zeta":
        return _zeta(spec.s, spec.digits)
    if spec.kind == "central_binom":
        return _central_binom_sum(spec.k, spec.alternating, spec.digits)
    if spec.kind == "bbp_term":
        return _bbp_term_sum(spec.base, spec.modulus, spec.offset, spec.power,
                             spec.digits)
    raise ValueError(f"unsupported series kind {spec.kind!r}")


# --------------------------------------------------------------------------
# pi (Chudnovsky series, binary splitting)

_CHUD_A = 13591409
_CHUD_B = 545140134
_CHUD_C3_24 = 640320 ** 3 // 24


def _chud_split(a: int, b: int):
    # P, Q, T over term indices [a, b), a >= 1.
    if b - a == 1:
        p = (6 * a - 5) * (2 * a - 1) * (6 * a - 1)
        q = a * a * a * _CHUD_C3_24
        t = p * (_CHUD_A + _CHUD_B * a)
        return p, q, (-t if a & 1 else t)
    mid = (a + b) // 2
    p1, q1, t1 = _chud_split(a, mid)
    p2, q2, t2 = _chud_split(mid, b)
    return p1 * p2, q1 * q2, t1 * q2 + p1 * t2


@lru_cache(maxsize=64)
def gen_pi(digits: int):
    """pi by binary splitting of the Chudnovsky series.

    Successive terms shrink by more than 10**14 (the term ratio
    p_{k+1}/q_{k+1} is below 72(k+1)^3 / ((k+1)^3 * C^3/24) ~ 6.6e-15),
    so `work // 14 + 2` terms leave a tail below 10**-work.
    """
    if digits < 16:
        raise ValueError("digits must be at least 16")
    work = digits + _GUARD
    terms = work // 14 + 2
    _, q, t = _chud_split(1, max(2, terms))
    with workprec(work):
        num = 426880 * gmpy2.sqrt(gmpy2.mpfr(10005)) * q
        return num / (_CHUD_A * q + t)


# --------------------------------------------------------------------------
# zeta(s) for integer s >= 2 (alternating-series acceleration)

_ACCEL_RATE = math.log(3.0 + 2.0 * math.sqrt(2.0))  # ~1.7627, digits-per-term


def _accel_weights(n: int) -> list:
    # d_k = n * sum_{i<=k} (n+i-1)! 4^i / ((n-i)! (2i)!), computed with
    # exact incremental factorials; every e_i is an integer.
    top = math.factorial(n - 1)          # (n+i-1)! at i=0
    bot1 = math.factorial(n)             # (n-i)!   at i=0
    bot2 = 1                             # (2i)!    at i=0
    four = 1
    d = []
    acc = 0
    for i in range(n + 1):
        if i:
            top *= n + i - 1
            bot1 //= n - i + 1
            bot2 *= (2 * i - 1) * (2 * i)
            four *= 4
        num = n * four * top
        den = bot1 * bot2
        e, rem = divmod(num, den)
        if rem:
            raise AssertionError("acceleration weight not integral")
        acc += e
        d.append(acc)
    return d


@lru_cache(maxsize=128)
def _zeta(s: int, digits: int):
    """zeta(s), integer s >= 2, with error below 6 * (3+sqrt(8))**-n."""
    if s < 2:
        raise ValueError("zeta order must be >= 2")
    work = digits + _GUARD
    n = int((work + 3) * _LN10 / _ACCEL_RATE) + 4
    d = _accel_weights(n)
    dn = d[n]
    with workprec(work + 4):
        acc = gmpy2.mpfr(0)
        for k in range(n):
            num = d[k] - dn
            term = gmpy2.mpfr(num) / (k + 1) ** s
            acc = acc - term if k & 1 else acc + term
        twos = 1 << (s - 1)
        return -acc * twos / (dn * (twos - 1))


# --------------------------------------------------------------------------
# central binomial sums

def _central_binom_sum(k: int, alternating: bool, digits: int):
    """sum sign^(n-1) / (n^k * C(2n,n)); term ratio <= 1/3, tail < last/2."""
    work = digits + _GUARD
    terms = int(work * _LN10 / math.log(4.0)) + 8
    with workprec(work):
        one = gmpy2.mpfr(1)
        total = gmpy2.mpfr(0)
        binom = 2  # C(2n, n) at n = 1
        for n in range(1, terms + 1):
            term = one / (n ** k * binom)
            if alternating and not (n & 1):
                total -= term
            else:
                total += term
            binom = binom * 2 * (2 * n + 1) // (n + 1)
        return total


# --------------------------------------------------------------------------
# BBP-style term sums

def _bbp_term_sum(base: int, modulus: int, offset: int, power: int,
                  digits: int):
    """sum 1/(base^j (modulus*j+offset)^power); geometric tail < 2*last."""
    work = digits + _GUARD
    terms = int(work * _LN10 / math.log(base)) + 3
    with workprec(work):
        one = gmpy2.mpfr(1)
        total = gmpy2.mpfr(0)
        bj = 1
        for j in range(terms + 1):
            total += one / (bj * (modulus * j + offset) ** power)
            bj *= base
        return total


# --------------------------------------------------------------------------
# algebraic numbers 3^(1/r) - 2^(1/s)


@dataclass(frozen=True)
class AlgebraicSpec:
    """3**(1/r) - 2**(1/s); algebraic of degree r*s, so the relation
    problem on its power vector has size r*s + 1."""

    r: int
    s: int
    digits: int

    def __post_init__(self):
        if self.r < 1 or self.s < 1:
            raise ValueError("root orders must be >= 1")
        if self.digits < 16:
            raise ValueError("digits must be at least 16")

    @property
    def degree(self) -> int:
        return self.r * self.s


def _nth_root(a: int, r: int, digits: int):
    # Newton on x^r - a with doubling precision; one step per level.
    if r == 1:
        return promote(a, digits)
    precs = [24]
    while precs[-1] < digits:
        precs.append(min(2 * precs[-1] - 4, digits))
    precs.append(digits)
    x = gmpy2.mpfr(a ** (1.0 / r), digits_to_bits(24))
    rm1 = r - 1
    for p in precs:
        with workprec(p + 6):
            x = (rm1 * x + a / x ** rm1) / r
    with workprec(digits):
        resid = abs(x ** r - a)
        if resid > gmpy2.mpfr(f"1e{-digits + 6}") * a:
            raise ArithmeticError("root iteration failed to converge")
    return x


def gen_algebraic(spec: AlgebraicSpec):
    """3**(1/r) - 2**(1/s) via doubling-precision Newton on both roots."""
    work = spec.digits + _GUARD + 4
    u = _nth_root(3, spec.r, work)
    v = _nth_root(2, spec.s, work)
    with workprec(work):
        return u - v


# --------------------------------------------------------------------------
# power vectors

def power_vector(alpha, n: int) -> list:
    """(1, alpha, alpha^2, ..., alpha^n) by repeated multiplication."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if isinstance(alpha, int):
        return [alpha ** i for i in range(n + 1)]
    with gmpy2.context(precision=alpha.precision):
        out = [gmpy2.mpfr(1)]
        cur = gmpy2.mpfr(1)
        for _ in range(n):
            cur = cur * alpha
            out.append(cur)
    return out


# --------------------------------------------------------------------------
# polynomial root refinement


@dataclass(frozen=True)
class PolyRootSpec:
    """Integer polynomial (ascending-degree coefficients), a decimal seed
    inside the basin of a simple real root, and a digit target."""

    coefficients: tuple
    seed: str
    digits: int

    def __post_init__(self):
        if len(self.coefficients) < 2 or self.coefficients[-1] == 0:
            raise ValueError("need a nonconstant polynomial with nonzero lead")
        if self.digits < 16:
            raise ValueError("digits must be at least 16")


def _poly_eval(coeffs, x):
    acc = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = acc * x + c
    return acc


def _seed_sig_digits(seed: str) -> int:
    mantissa = seed.split("e")[0].split("E")[0].lstrip("+-").replace(".", "")
    return max(4, len(mantissa.lstrip("0")))


def refine_root(spec: PolyRootSpec):
    """Newton-refine the seed to `digits` digits.

    Precision doubles per step (quadratic convergence); the result must
    satisfy |p(root)| < 10**(10-digits) * scale, where scale is the sum of
    absolute term magnitudes at the root.  Raises RefinementError when the
    iteration stalls or hits a critical point.
    """
    coeffs = tuple(spec.coefficients)
    deriv = tuple(i * c for i, c in enumerate(coeffs) if i)
    target = spec.digits + _GUARD
    prec = min(_seed_sig_digits(spec.seed) + 6, target)
    x = promote(spec.seed, prec)
    steps = 0
    converged_at = 0
    while steps < 64:
        with workprec(prec + 8):
            px = _poly_eval(coeffs, x)
            dpx = _poly_eval(deriv, x)
            if dpx == 0:
                raise RefinementError("derivative vanished: root not simple")
            step = px / dpx
            x = x - step
            small = abs(step) <= abs(x) * gmpy2.mpfr(f"1e{-(prec + 2)}")
        steps += 1
        if prec >= target and small:
            converged_at += 1
            if converged_at >= 2:
                break
        prec = min(2 * prec - 4, target)
    else:
        raise RefinementError(f"no convergence after {steps} steps")
    with workprec(target):
        scale = sum(abs(c) * abs(x) ** i for i, c in enumerate(coeffs))
        resid = abs(_poly_eval(coeffs, x))
        if resid >= gmpy2.mpfr(f"1e{10 - spec.digits}") * scale:
            raise RefinementError("residual too large for requested digits")
    return x
