#!/usr/bin/env python3
"""Close the loop on the logistic map's period-8 onset.

The smallest parameter r at which x -> r x (1-x) settles into an
8-cycle is an algebraic number of degree 12.  Starting from only an
11-digit decimal seed, we refine the root of its known polynomial to
250 digits by Newton steps, build the 13-long power vector, and ask the
detector for a relation.  It must hand back exactly the polynomial we
refined against: a closed loop through two independent computations.
"""

import gmpy2

from intrel import EpsilonPolicy, run_multilevel
from intrel.constants import PolyRootSpec, power_vector, refine_root
from intrel.precision import format_sci, workprec
from intrel.problems import BIFURCATION3_POLY, BIFURCATION3_SEED

DIGITS = 250


def main():
    print(f"seed: {BIFURCATION3_SEED} (11 digits)")
    root = refine_root(PolyRootSpec(BIFURCATION3_POLY, BIFURCATION3_SEED,
                                    DIGITS))
    with workprec(60):
        print(f"refined to {DIGITS} digits: {gmpy2.mpfr(root, 166)}...\n")

    x = power_vector(root, len(BIFURCATION3_POLY) - 1)
    out = run_multilevel(x, algo="multipair", policy=EpsilonPolicy(DIGITS))
    got = out.coefficients
    print(f"detected in {out.iterations} iterations, "
          f"confidence {format_sci(out.confidence, 3)}")
    print("recovered:", got)
    print("expected: ", list(BIFURCATION3_POLY))
    matches = got == list(BIFURCATION3_POLY) or \
        [-c for c in got] == list(BIFURCATION3_POLY)
    print("\nclosed loop:", "the detector returned the defining polynomial"
          if matches else "MISMATCH (should not happen)")


if __name__ == "__main__":
    main()
