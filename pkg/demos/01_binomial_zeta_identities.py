#!/usr/bin/env python3
"""Rediscover the classic central-binomial evaluations of zeta values.

Each run hands the detector a 2-vector (zeta(m), S) where S is a
central-binomial sum, and asks for integers (a, b) with
a*zeta(m) + b*S = 0.  The recovered coefficients are the textbook
identities; the confidence column is min|y|/max|y| at detection, which
for a genuine relation sits hundreds of orders below one.
"""

from intrel import EpsilonPolicy, run_multilevel
from intrel.precision import format_sci
from intrel.problems import ProblemSpec, build_vector

DIGITS = 60

CASES = [
    ("zeta(2) vs  sum 1/(k^2 C(2k,k))", ProblemSpec("zetabinom", DIGITS, m=2)),
    ("zeta(3) vs -sum (-1)^k/(k^3 C(2k,k))", ProblemSpec("zetabinom", DIGITS, m=3)),
    ("zeta(4) vs  sum 1/(k^4 C(2k,k))", ProblemSpec("zetabinom", DIGITS, m=4)),
    ("S(4)    vs  pi^4", ProblemSpec("binom", DIGITS, k=4)),
]


def main():
    print(f"searching 2-vectors at {DIGITS} digits\n")
    for label, spec in CASES:
        x = build_vector(spec)
        out = run_multilevel(x, algo="multipair", policy=EpsilonPolicy(DIGITS))
        coeffs = " ".join(str(c) for c in out.coefficients)
        print(f"{label}")
        print(f"    relation ({coeffs})   "
              f"confidence {format_sci(out.confidence, 3)}   "
              f"iterations {out.iterations}")
    print("\nreadings: (1 -3) means zeta(2) = 3*sum, (2 -5) means "
          "zeta(3) = 5/2 * sum,")
    print("(17 -36) means zeta(4) = 36/17 * sum, and (3240 -17) means "
          "S(4) = 17*pi^4/3240.")


if __name__ == "__main__":
    main()
