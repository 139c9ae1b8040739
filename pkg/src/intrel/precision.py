"""Arithmetic tiers, rounding primitives, and precision policies.

Three tiers of real arithmetic appear throughout the package: full working
precision (MPFR via gmpy2), an optional fixed intermediate precision, and
IEEE binary64 ("double").  Precision is always carried explicitly: any block
that performs multiprecision arithmetic opens a context with
``workprec(digits)`` (or ``tier.context()``).  Nothing relies on a precision
configured elsewhere, and contexts are thread-local, so scalars can be copied
freely between concurrent tasks.
"""

from __future__ import annotations

import math
import sys
from contextlib import nullcontext
from dataclasses import dataclass

import gmpy2

__all__ = [
    "DOUBLE",
    "DOUBLE_EXACT_INT_CAP",
    "DegenerateInputError",
    "EpsilonPolicy",
    "Tier",
    "TierRangeError",
    "demote",
    "digits_to_bits",
    "format_sci",
    "is_exact_int",
    "nint",
    "promote",
    "workprec",
]

_LOG2_10 = math.log2(10.0)

#: Decimal digits carried by an IEEE binary64 value.
DOUBLE_DIGITS = 16

#: Largest magnitude at which consecutive integers are still distinct doubles.
DOUBLE_EXACT_INT_CAP = 1 << 53

_DOUBLE_MAX = sys.float_info.max


class TierRangeError(ArithmeticError):
    """A value does not fit the range of the requested tier."""


class DegenerateInputError(ValueError):
    """An input vector violates the nonzero/finite preconditions."""


def digits_to_bits(digits: int) -> int:
    """Binary precision needed to carry `digits` decimal digits."""
    if digits < 1:
        raise ValueError(f"digits must be positive, got {digits}")
    return math.ceil(digits * _LOG2_10)


def workprec(digits: int):
    """Thread-local MPFR context spanning `digits` decimal digits.

    Use as ``with workprec(d): ...``.  Division by zero and invalid
    operations raise instead of silently producing inf/nan.
    """
    return gmpy2.context(
        precision=digits_to_bits(digits),
        trap_divzero=True,
        trap_invalid=True,
    )


@dataclass(frozen=True)
class Tier:
    """One of the arithmetic tiers: full(d), intermediate(d), or double.

    The intermediate tier uses the same MPFR representation as the full
    tier, just at a fixed digit count; "double" means the platform's IEEE
    binary64 format.
    """

    kind: str  # "full" | "intermediate" | "double"
    digits: int

    def __post_init__(self):
        if self.kind not in ("full", "intermediate", "double"):
            raise ValueError(f"unknown tier kind {self.kind!r}")
        if self.kind != "double" and self.digits < DOUBLE_DIGITS:
            raise ValueError("multiprecision tiers need at least 16 digits")

    @staticmethod
    def full(digits: int) -> "Tier":
        return Tier("full", digits)

    @staticmethod
    def intermediate(digits: int = 125) -> "Tier":
        return Tier("intermediate", digits)

    @property
    def is_double(self) -> bool:
        return self.kind == "double"

    @property
    def bits(self) -> int:
        return 53 if self.is_double else digits_to_bits(self.digits)

    def context(self):
        """Context manager establishing this tier's precision (no-op for double)."""
        if self.is_double:
            return nullcontext()
        return workprec(self.digits)

    def sqrt(self, x):
        return math.sqrt(x) if self.is_double else gmpy2.sqrt(x)

    def zero(self):
        return 0.0 if self.is_double else gmpy2.mpfr(0)

    def one(self):
        return 1.0 if self.is_double else gmpy2.mpfr(1)

    @property
    def exact_int_cap(self) -> int:
        """Largest magnitude below which every integer is exactly representable."""
        return DOUBLE_EXACT_INT_CAP if self.is_double else 1 << self.bits

    @property
    def range_orders(self) -> int:
        """Orders of magnitude of y-vector spread this tier can track reliably."""
        return 11 if self.is_double else self.digits - 5


DOUBLE = Tier("double", DOUBLE_DIGITS)


def nint(x) -> int:
    """Nearest integer; exact halves round away from zero (nint(2.5) = 3)."""
    if isinstance(x, float):
        if not math.isfinite(x):
            raise TierRangeError(f"nint of non-finite value {x!r}")
        return int(0.5 + x) if x >= 0.0 else -int(0.5 - x)
    if isinstance(x, int):
        return x
    if not gmpy2.is_finite(x):
        raise TierRangeError(f"nint of non-finite value {x!r}")
    return int(gmpy2.rint_round(x))


def demote(x, tier: Tier):
    """Correctly rounded conversion of `x` to `tier`.

    Raises TierRangeError instead of returning infinity when |x| exceeds
    the tier's range (this drives the multi-level fallback path).
    """
    if isinstance(x, float):
        if not math.isfinite(x):
            raise TierRangeError("cannot demote a non-finite value")
        if tier.is_double:
            return x
    elif not gmpy2.is_finite(x):
        raise TierRangeError("cannot demote a non-finite value")
    if tier.is_double:
        f = float(x)
        if math.isinf(f):
            raise TierRangeError("value exceeds double range")
        return f
    return gmpy2.mpfr(x, tier.bits)


def promote(value, digits: int):
    """Convert `value` (int, float, str, or mpfr) to a full-tier scalar.

    Integers below 2**bits and all doubles convert exactly; strings are
    parsed with correct rounding at the target precision.
    """
    with workprec(digits):
        return gmpy2.mpfr(value)


def is_exact_int(x, cap: int = DOUBLE_EXACT_INT_CAP) -> bool:
    """True iff `x` holds an exactly representable integer with |x| <= cap.

    Values at or beyond the 2**53 boundary of a double are rejected even
    when equal to `cap`, because neighbouring integers are no longer
    distinguishable there.
    """
    if isinstance(x, float):
        if cap > DOUBLE_EXACT_INT_CAP:
            raise ValueError("cap beyond 2**53 is meaningless for doubles")
        if not math.isfinite(x) or x != math.floor(x):
            return False
        a = abs(x)
        return a <= cap and a < DOUBLE_EXACT_INT_CAP
    if isinstance(x, int):
        return abs(x) <= cap
    if not gmpy2.is_finite(x) or not x.is_integer():
        return False
    a = abs(x)
    return a <= cap and a < (1 << x.precision)


def format_sci(x, sig: int = 6) -> str:
    """Scientific-notation string with `sig` significant digits.

    Works for floats and MPFR scalars of any magnitude (floats cannot
    overflow it, and it sidesteps gmpy2's format-spec quirks).
    """
    if isinstance(x, float):
        return f"{x:.{sig - 1}e}"
    if not gmpy2.is_finite(x):
        return str(float("nan") if gmpy2.is_nan(x) else x)
    if x == 0:
        return "0." + "0" * (sig - 1) + "e+00"
    mant, exp10, _ = x.digits(10, sig)
    sign = "-" if mant.startswith("-") else ""
    digits = mant.lstrip("-")
    e = exp10 - 1  # digits are 0.d1d2... * 10**exp10
    return f"{sign}{digits[0]}.{digits[1:]}e{e:+03d}"


def format_digits(x, digits: int) -> str:
    """Positional decimal string of `x` carrying `digits` significant digits."""
    if x == 0:
        return "0"
    mant, exp10, _ = x.digits(10, digits)
    sign = "-" if mant.startswith("-") else ""
    d = mant.lstrip("-")
    if 0 < exp10 <= digits:
        intpart = d[:exp10].ljust(exp10, "0")
        frac = d[exp10:]
        return f"{sign}{intpart}.{frac}" if frac else f"{sign}{intpart}"
    if -6 < exp10 <= 0:
        return f"{sign}0.{'0' * (-exp10)}{d}"
    return f"{sign}{d[0]}.{d[1:]}e{exp10 - 1:+d}"


@dataclass(frozen=True)
class EpsilonPolicy:
    """Detection and exhaustion thresholds for a run at `work_digits` digits.

    detection threshold  = 10**(detect_exp - work_digits): a y entry below
    this signals a relation (a few orders of magnitude above epsilon).
    exhaustion margin    = 10**(exhaust_exp - work_digits): a y entry below
    this without a detection means precision is spent; symmetrically, an A
    entry above 10**(work_digits - exhaust_exp) exhausts precision.
    """

    work_digits: int
    detect_exp: int = 20
    exhaust_exp: int = 25

    def __post_init__(self):
        if self.work_digits < DOUBLE_DIGITS:
            raise ValueError("work_digits must be at least 16")
        if not (0 < self.detect_exp < self.exhaust_exp < self.work_digits):
            raise ValueError(
                "need 0 < detect_exp < exhaust_exp < work_digits, got "
                f"{self.detect_exp}, {self.exhaust_exp}, {self.work_digits}"
            )

    @property
    def bits(self) -> int:
        return digits_to_bits(self.work_digits)

    def detect_threshold(self):
        with workprec(self.work_digits):
            return gmpy2.mpfr(f"1e{self.detect_exp - self.work_digits}")

    def exhaust_threshold(self):
        with workprec(self.work_digits):
            return gmpy2.mpfr(f"1e{self.exhaust_exp - self.work_digits}")

    @property
    def a_entry_cap(self) -> int:
        """Exact integer bound on |A| entries before precision is exhausted."""
        return 10 ** (self.work_digits - self.exhaust_exp)
