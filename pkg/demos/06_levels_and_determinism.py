#!/usr/bin/env python3
"""Look inside the mixed-precision machinery.

A two-level run keeps the authoritative state at full precision but
iterates on a double-precision replica, folding the replica's exact
integer updates back in by matrix multiplication whenever an entry
nears the exactness boundary or a y entry nears the replica's floor.
This script logs the level of every iteration, shows the flush cadence,
and then demonstrates the determinism contract: the same search run
with 1, 2, and 4 workers produces bit-identical states at every flush.
"""

from collections import Counter

from intrel import EpsilonPolicy, LevelConfig, run_multilevel
from intrel.constants import AlgebraicSpec, gen_algebraic, power_vector

DIGITS = 180


def main():
    alpha = gen_algebraic(AlgebraicSpec(5, 5, DIGITS))
    x = power_vector(alpha, 25)
    pol = EpsilonPolicy(DIGITS)

    records = []
    out = run_multilevel(x, algo="multipair", policy=pol,
                         cfg=LevelConfig(levels=2), max_iters=20000,
                         log=records.append)
    levels = Counter(r["level"] for r in records)
    print(f"two-level run: {out.iterations} iterations "
          f"({dict(levels)}), {sum(out.level_stats[k]['flushes'] for k in out.level_stats)} flushes")
    print("first/last few iteration records:")
    for r in records[:3] + records[-3:]:
        print(f"  iter={r['iter']:4d} level={r['level']:6s} "
              f"ymin_exp={r['y_min_exp']} bound={r['bound']}")

    print("\ndeterminism across worker counts:")
    flush_states = {}
    for workers in (1, 2, 4):
        seen = []
        run_multilevel(x, algo="multipair", policy=pol,
                       cfg=LevelConfig(levels=2), max_iters=20000,
                       workers=workers,
                       flush_hook=lambda st, tier: seen.append(
                           tuple(v.as_mantissa_exp() for v in st.y)))
        flush_states[workers] = seen
        print(f"  workers={workers}: {len(seen)} flushes recorded")
    same = flush_states[1] == flush_states[2] == flush_states[4]
    print("  post-flush y vectors bitwise identical:", same)


if __name__ == "__main__":
    main()
