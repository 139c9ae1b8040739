#!/usr/bin/env python3
"""Rediscover the digit-extraction series for pi and pi^2.

The base-16 formula lets one compute the n-th hexadecimal digit of pi
without the earlier digits.  Finding it is a 9-dimensional relation
problem: the vector is (pi, S_1, ..., S_8) with
S_j = sum_k 1/(16^k (8k+j)), and the detector must pick the four-term
combination out of the air.  The base-729 analogue for pi^2 is a
13-dimensional problem with squared denominators.
"""

from intrel import EpsilonPolicy, run_multilevel
from intrel.precision import format_sci
from intrel.problems import ProblemSpec, build_vector


def show(title, spec, note):
    x = build_vector(spec)
    out = run_multilevel(x, algo="multipair",
                         policy=EpsilonPolicy(spec.digits))
    print(title)
    print(f"    n = {len(x)} at {spec.digits} digits -> "
          f"{out.status.value} in {out.iterations} iterations")
    print(f"    coefficients: {' '.join(str(c) for c in out.coefficients)}")
    print(f"    confidence:   {format_sci(out.confidence, 3)}")
    print(f"    {note}\n")


def main():
    show(
        "base-16 formula for pi",
        ProblemSpec("bbp16pi", 200),
        "reading: pi = sum_k 16^-k [4/(8k+1) - 2/(8k+4) - 1/(8k+5) - 1/(8k+6)]",
    )
    show(
        "base-3 (729 = 3^6) formula for pi^2",
        ProblemSpec("bbp3pisq", 300),
        "reading: 27 pi^2 = sum_k 729^-k [486/(12k+1)^2 - 810/(12k+2)^2 - ...]"
        " (divide through by 27/2 for the usual 2/27 prefactor)",
    )


if __name__ == "__main__":
    main()
