"""Problem presets and input-file handling.

A ProblemSpec describes how to build the input vector for one search:
from a file of decimal constants, or from one of the built-in families
(power vectors of algebraic numbers, digit-extraction term sums for pi
and pi^2, central-binomial ratios against zeta values, the period-8
bifurcation constant of the logistic map, and the degree test for the
zeta(5) binomial ratio).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import gmpy2

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
from .precision import format_digits, workprec

__all__ = [
    "BIFURCATION3_POLY",
    "BIFURCATION3_SEED",
    "ProblemSpec",
    "build_vector",
    "load_input_file",
    "parse_problem",
    "save_input_file",
]

#: Integer polynomial (ascending degree) whose root at ~3.544 marks the
#: onset of the logistic map's 8-cycle, and the decimal seed for it.
BIFURCATION3_POLY = (4913, 0, 2108, -604, -977, 8, 44, 392, -193, -40, 48,
                     -12, 1)
BIFURCATION3_SEED = "3.54409035955"

_PRESET_DEFAULT_DIGITS = {
    "bbp16pi": 200,
    "bbp3pisq": 300,
    "zetabinom": 60,
    "binom": 60,
    "bifurcation3": 250,
    "z5powers": 220,
}


@dataclass(frozen=True)
class ProblemSpec:
    """Declarative description of one input vector."""

    source: str          # file | algebraic | bbp16pi | bbp3pisq | binom |
                         # zetabinom | bifurcation3 | z5powers
    digits: int
    path: str | None = None
    r: int = 0
    s: int = 0
    k: int = 0
    m: int = 0
    degree: int = 0

    def __post_init__(self):
        if self.digits < 32:
            raise ValueError("problem digits must be at least 32")
        if self.source == "algebraic" and (self.r < 1 or self.s < 1):
            raise ValueError("algebraic preset needs r, s >= 1")
        if self.source == "zetabinom" and self.m not in (2, 3, 4):
            raise ValueError("zetabinom preset supports m in {2, 3, 4}")
        if self.source == "binom" and self.k < 2:
            raise ValueError("binom preset needs k >= 2")
        if self.source == "z5powers" and self.degree < 2:
            raise ValueError("z5powers preset needs degree >= 2")

    @property
    def n(self) -> int | None:
        """Vector length, when it is known without reading a file."""
        return {
            "algebraic": self.r * self.s + 1,
            "bbp16pi": 9,
            "bbp3pisq": 13,
            "binom": 2,
            "zetabinom": 2,
            "bifurcation3": 13,
            "z5powers": self.degree + 1,
        }.get(self.source)

    def label(self) -> str:
        if self.source == "file":
            return f"file:{self.path}"
        if self.source == "algebraic":
            return f"algebraic:{self.r},{self.s}"
        if self.source == "binom":
            return f"binom:{self.k}"
        if self.source == "zetabinom":
            return f"zetabinom:{self.m}"
        if self.source == "z5powers":
            return f"z5powers:{self.degree}"
        return self.source


def parse_problem(text: str, digits: int | None = None) -> ProblemSpec:
    """Parse a `--problem` argument like `algebraic:5,5` or `bbp16pi`."""
    name, _, arg = text.partition(":")
    name = name.strip().lower()
    if digits is None:
        digits = _PRESET_DEFAULT_DIGITS.get(name)
    if name == "algebraic":
        m = re.fullmatch(r"\s*(\d+)\s*,\s*(\d+)\s*", arg)
        if not m:
            raise ValueError("algebraic preset takes r,s, e.g. algebraic:5,5")
        if digits is None:
            raise ValueError("the algebraic preset needs an explicit --digits")
        return ProblemSpec("algebraic", digits, r=int(m[1]), s=int(m[2]))
    if digits is None:
        raise ValueError(f"--digits is required for problem {text!r}")
    if name == "bbp16pi":
        return ProblemSpec("bbp16pi", digits)
    if name == "bbp3pisq":
        return ProblemSpec("bbp3pisq", digits)
    if name == "binom":
        if not arg:
            raise ValueError("binom preset takes a weight, e.g. binom:4")
        return ProblemSpec("binom", digits, k=int(arg))
    if name == "zetabinom":
        if not arg:
            raise ValueError("zetabinom preset takes m, e.g. zetabinom:3")
        return ProblemSpec("zetabinom", digits, m=int(arg))
    if name == "bifurcation3":
        return ProblemSpec("bifurcation3", digits)
    if name == "z5powers":
        return ProblemSpec("z5powers", digits, degree=int(arg) if arg else 10)
    raise ValueError(f"unknown problem {text!r}")


def build_vector(spec: ProblemSpec) -> list:
    """Evaluate the input constants for `spec` to spec.digits accuracy."""
    d = spec.digits
    if spec.source == "file":
        vec, _ = load_input_file(spec.path)
        return vec
    if spec.source == "algebraic":
        alpha = gen_algebraic(AlgebraicSpec(spec.r, spec.s, d))
        return power_vector(alpha, spec.r * spec.s)
    if spec.source == "bbp16pi":
        terms = [eval_series(SeriesSpec.bbp_term(16, 8, j, 1, d))
                 for j in range(1, 9)]
        return [gen_pi(d)] + terms
    if spec.source == "bbp3pisq":
        pi = gen_pi(d)
        with workprec(d + 10):
            pisq = pi * pi
        terms = [eval_series(SeriesSpec.bbp_term(729, 12, j, 2, d))
                 for j in range(1, 13)]
        return [pisq] + terms
    if spec.source == "binom":
        sk = eval_series(SeriesSpec.central_binom(spec.k, False, d))
        pi = gen_pi(d)
        with workprec(d + 10):
            pik = pi ** spec.k
        return [sk, pik]
    if spec.source == "zetabinom":
        z = eval_series(SeriesSpec.zeta(spec.m, d))
        cb = eval_series(SeriesSpec.central_binom(spec.m, spec.m == 3, d))
        return [z, cb]
    if spec.source == "bifurcation3":
        root = refine_root(PolyRootSpec(BIFURCATION3_POLY, BIFURCATION3_SEED, d))
        return power_vector(root, len(BIFURCATION3_POLY) - 1)
    if spec.source == "z5powers":
        z5 = eval_series(SeriesSpec.zeta(5, d))
        alt = eval_series(SeriesSpec.central_binom(5, True, d))
        with workprec(d + 10):
            ratio = z5 / alt
        return power_vector(ratio, spec.degree)
    raise ValueError(f"unknown problem source {spec.source!r}")


# --------------------------------------------------------------------------
# input files
#
# Format: optional '#' comment lines, a 'digits: N' header, then one
# decimal constant per line, each carrying at least N significant digits.


def _significant_digits(token: str) -> int:
    mantissa = re.split(r"[eE]", token)[0]
    digits = mantissa.lstrip("+-").replace(".", "").lstrip("0")
    return len(digits)


_NUMBER_RE = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")


def load_input_file(path: str) -> tuple[list, int]:
    """Read a vector file; returns (values, digits).

    Every constant must carry at least the header's digit count; short
    constants and files with fewer than two constants are rejected with
    the offending line number.
    """
    digits = None
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if digits is None:
                m = re.fullmatch(r"digits\s*:\s*(\d+)", line)
                if not m:
                    raise ValueError(
                        f"{path}:{lineno}: expected a 'digits: N' header")
                digits = int(m[1])
                if digits < 32:
                    raise ValueError(f"{path}:{lineno}: digits must be >= 32")
                continue
            if not _NUMBER_RE.fullmatch(line):
                raise ValueError(f"{path}:{lineno}: not a decimal constant")
            if _significant_digits(line) < digits:
                raise ValueError(
                    f"{path}:{lineno}: constant carries fewer than "
                    f"{digits} significant digits")
            values.append((lineno, line))
    if digits is None:
        raise ValueError(f"{path}: missing 'digits: N' header")
    if len(values) < 2:
        raise ValueError(f"{path}: need at least two constants")
    with workprec(digits + 10):
        vec = [gmpy2.mpfr(tok) for _, tok in values]
    return vec, digits


def save_input_file(path: str, values, digits: int) -> None:
    """Write a vector file that `load_input_file` round-trips."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"digits: {digits}\n")
        with workprec(digits + 10):
            for v in values:
                fh.write(format_digits(gmpy2.mpfr(v), digits + 5) + "\n")
