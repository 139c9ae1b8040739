#!/usr/bin/env python3
"""A negative result is still a result: exclusion bounds.

zeta(2), zeta(3), zeta(4) all reduce to single central-binomial sums,
so it is tempting to guess that Z5 = zeta(5) / sum_k (-1)^(k-1)/(k^5
C(2k,k)) is algebraic of low degree.  Running the detector on
(1, Z5, ..., Z5^10) exhausts 220 digits of precision without finding
anything -- and that failure carries quantitative content: no integer
polynomial of degree <= 10 with coefficient norm below the final bound
can vanish at Z5.  The bound is a running maximum, growing as the
search digs deeper.
"""

from intrel import EpsilonPolicy, LevelConfig, run_multilevel
from intrel.precision import format_sci
from intrel.problems import ProblemSpec, build_vector

DIGITS = 220
DEGREE = 10


def main():
    x = build_vector(ProblemSpec("z5powers", DIGITS, degree=DEGREE))
    print(f"degree-{DEGREE} test for Z5 at {DIGITS} digits "
          f"(n = {len(x)})\n")
    milestones = []
    out = run_multilevel(
        x, algo="multipair", policy=EpsilonPolicy(DIGITS),
        cfg=LevelConfig(levels=2), max_iters=50000,
        flush_hook=lambda st, tier: milestones.append(st.best_bound))
    for i, b in enumerate(milestones):
        if i % 4 == 0 or i == len(milestones) - 1:
            print(f"  after flush {i + 1:3d}: excluded norms below "
                  f"{format_sci(b, 4)}")
    print(f"\nterminated: {out.status.value} after {out.iterations} "
          f"iterations")
    print(f"verdict: any degree-{DEGREE} polynomial with Z5 as a root has "
          f"coefficient norm above {format_sci(out.norm_bound, 4)}")


if __name__ == "__main__":
    main()
