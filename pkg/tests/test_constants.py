import gmpy2
import mpmath as mp
import pytest

from intrel.constants import (
    AlgebraicSpec,
    PolyRootSpec,
    RefinementError,
    SeriesSpec,
    eval_series,
    gen_algebraic,
    gen_pi,
    power_vector,
    refine_root,
)
from intrel.precision import workprec

from conftest import em_zeta

# frozen via the Euler-Maclaurin oracle at 60 digits
ZETA2_50 = "1.6449340668482264364724151666460251892189499012068"


def rel_err(got, want, digits):
    with workprec(digits + 30):
        return abs((gmpy2.mpfr(got) - want) / want)


class TestZeta:
    def test_frozen_value_50_digits(self):
        z = eval_series(SeriesSpec.zeta(2, 50))
        with workprec(80):
            want = gmpy2.mpfr(ZETA2_50)
            assert abs(z - want) < gmpy2.mpfr("1e-49")

    @pytest.mark.parametrize("s", [2, 3, 4, 5, 7])
    @pytest.mark.parametrize("digits", [40, 120])
    def test_against_euler_maclaurin(self, s, digits):
        z = eval_series(SeriesSpec.zeta(s, digits))
        assert rel_err(z, em_zeta(s, digits + 10), digits) \
            < gmpy2.mpfr(f"1e{2 - digits}")

    def test_against_mpmath(self):
        z = eval_series(SeriesSpec.zeta(3, 200))
        mp.mp.dps = 230
        want = str(mp.zeta(3))
        with workprec(230):
            assert abs(z - gmpy2.mpfr(want)) < gmpy2.mpfr("1e-198")

    def test_zeta2_is_pi_squared_over_six(self):
        for d in (50, 150):
            z = eval_series(SeriesSpec.zeta(2, d))
            pi = gen_pi(d)
            with workprec(d + 10):
                assert abs(z * 6 - pi * pi) < gmpy2.mpfr(f"1e{4 - d}")

    def test_self_agreement_across_digits(self):
        for d in (40, 90):
            lo = eval_series(SeriesSpec.zeta(3, d))
            hi = eval_series(SeriesSpec.zeta(3, d + 20))
            assert rel_err(lo, hi, d) < gmpy2.mpfr(f"1e{2 - d}")

    def test_rejects_bad_order(self):
        with pytest.raises(ValueError):
            SeriesSpec.zeta(1, 50)


class TestCentralBinom:
    def test_zeta2_identity(self):
        # zeta(2) equals three times the non-alternating weight-2 sum
        cb = eval_series(SeriesSpec.central_binom(2, False, 60))
        z = eval_series(SeriesSpec.zeta(2, 60))
        with workprec(70):
            assert abs(z - 3 * cb) < gmpy2.mpfr("1e-58")

    def test_zeta3_identity(self):
        cb = eval_series(SeriesSpec.central_binom(3, True, 60))
        z = eval_series(SeriesSpec.zeta(3, 60))
        with workprec(70):
            assert abs(2 * z - 5 * cb) < gmpy2.mpfr("1e-58")

    def test_zeta4_identity(self):
        cb = eval_series(SeriesSpec.central_binom(4, False, 60))
        z = eval_series(SeriesSpec.zeta(4, 60))
        with workprec(70):
            assert abs(17 * z - 36 * cb) < gmpy2.mpfr("1e-58")

    def test_weight4_pi4_identity(self):
        s4 = eval_series(SeriesSpec.central_binom(4, False, 80))
        pi = gen_pi(80)
        with workprec(90):
            assert abs(3240 * s4 - 17 * pi ** 4) < gmpy2.mpfr("1e-76")

    def test_self_agreement(self):
        lo = eval_series(SeriesSpec.central_binom(5, True, 50))
        hi = eval_series(SeriesSpec.central_binom(5, True, 70))
        assert rel_err(lo, hi, 50) < gmpy2.mpfr("1e-48")


class TestBbpTerms:
    def test_first_term_bounds(self):
        # positive terms, geometric in 1/16: S1 in (1, 16/15)
        s1 = eval_series(SeriesSpec.bbp_term(16, 8, 1, 1, 50))
        assert 1 < s1 < gmpy2.mpfr(16) / 15

    def test_base16_formula_assembles_pi(self):
        d = 80
        terms = [eval_series(SeriesSpec.bbp_term(16, 8, j, 1, d))
                 for j in range(1, 9)]
        with workprec(d + 10):
            combo = 4 * terms[0] - 2 * terms[3] - terms[4] - terms[5]
            assert abs(combo - gen_pi(d)) < gmpy2.mpfr(f"1e{2 - d}")

    def test_validation(self):
        with pytest.raises(ValueError):
            SeriesSpec.bbp_term(1, 8, 1, 1, 50)
        with pytest.raises(ValueError):
            SeriesSpec.bbp_term(16, 8, 9, 1, 50)
        with pytest.raises(ValueError):
            SeriesSpec.bbp_term(16, 8, 1, 0, 50)


class TestPi:
    def test_frozen_20_digits(self):
        got = gen_pi(20)
        with workprec(40):
            assert abs(got - gmpy2.mpfr("3.1415926535897932385")) \
                < gmpy2.mpfr("1e-18")

    def test_self_consistency_50_vs_60(self):
        lo = gen_pi(50)
        hi = gen_pi(60)
        with workprec(80):
            assert abs(lo - hi) < gmpy2.mpfr("1e-49")

    def test_against_mpmath_300(self):
        mp.mp.dps = 330
        want = str(mp.pi)
        got = gen_pi(300)
        with workprec(330):
            assert abs(got - gmpy2.mpfr(want)) < gmpy2.mpfr("1e-299")

    def test_machin_bracketing(self):
        # alternating arctan partials bracket: 16 atan(1/5) - 4 atan(1/239)
        from fractions import Fraction

        def atan_partials(inv, terms):
            acc = Fraction(0)
            out = []
            for k in range(terms):
                acc += Fraction((-1) ** k, (2 * k + 1) * inv ** (2 * k + 1))
                out.append(acc)
            return out

        p5 = atan_partials(5, 8)
        p239 = atan_partials(239, 8)
        lo = 16 * p5[7] - 4 * p239[6]   # under/over chosen by sign pattern
        hi = 16 * p5[6] - 4 * p239[7]
        pi = gen_pi(40)
        with workprec(60):
            assert gmpy2.mpfr(lo.numerator) / lo.denominator < pi
            assert gmpy2.mpfr(hi.numerator) / hi.denominator > pi


class TestAlgebraic:
    def test_sqrt3_minus_sqrt2(self):
        a = gen_algebraic(AlgebraicSpec(2, 2, 30))
        with workprec(60):
            want = gmpy2.mpfr("0.317837245195782244725757617296")
            assert abs(a - want) < gmpy2.mpfr("1e-28")

    def test_unit_orders(self):
        assert gen_algebraic(AlgebraicSpec(1, 1, 40)) == 1

    @pytest.mark.parametrize("r,s", [(2, 3), (5, 5), (3, 7)])
    def test_against_mpmath(self, r, s):
        d = 120
        a = gen_algebraic(AlgebraicSpec(r, s, d))
        mp.mp.dps = d + 30
        want = mp.root(3, r) - mp.root(2, s)
        with workprec(d + 30):
            assert abs(a - gmpy2.mpfr(str(want))) < gmpy2.mpfr(f"1e{2 - d}")


class TestPowerVector:
    def test_integers(self):
        assert power_vector(2, 3) == [1, 2, 4, 8]

    def test_golden_ratio_relation(self):
        with workprec(60):
            phi = (1 + gmpy2.sqrt(gmpy2.mpfr(5))) / 2
        v = power_vector(phi, 2)
        with workprec(60):
            assert abs(v[0] + v[1] - v[2]) < gmpy2.mpfr("1e-55")

    def test_degree4_relation(self):
        # (1, 0, -10, 0, 1) annihilates powers of sqrt(3)-sqrt(2)
        a = gen_algebraic(AlgebraicSpec(2, 2, 60))
        v = power_vector(a, 4)
        with workprec(70):
            resid = v[0] - 10 * v[2] + v[4]
            assert abs(resid) < gmpy2.mpfr("1e-55")

    def test_rejects_short(self):
        with pytest.raises(ValueError):
            power_vector(2, 0)


class TestRefineRoot:
    def test_sqrt2(self):
        r = refine_root(PolyRootSpec((-2, 0, 1), "1.4", 50))
        with workprec(80):
            assert abs(r * r - 2) < gmpy2.mpfr("1e-48")

    def test_linear_exact(self):
        assert refine_root(PolyRootSpec((-7, 1), "3.0", 30)) == 7

    def test_bifurcation_polynomial(self):
        from intrel.problems import BIFURCATION3_POLY, BIFURCATION3_SEED
        root = refine_root(PolyRootSpec(BIFURCATION3_POLY, BIFURCATION3_SEED,
                                        250))
        mp.mp.dps = 40
        assert str(gmpy2.mpfr(root, 60)).startswith("3.5440903595519228")
        # quadratic convergence: residual exponent roughly doubles per step
        with workprec(280):
            resid = abs(sum(c * root ** i
                            for i, c in enumerate(BIFURCATION3_POLY)))
            assert resid < gmpy2.mpfr("1e-240")

    def test_quadratic_convergence_residuals(self):
        # re-run the refinement manually, watching residual exponents fall
        coeffs = (-2, 0, 1)
        x = gmpy2.mpfr("1.4", 100)
        exps = []
        with workprec(120):
            for _ in range(6):
                p = x * x - 2
                x = x - p / (2 * x)
                if p != 0:
                    exps.append(int(gmpy2.floor(gmpy2.log10(abs(p)))))
        drops = [exps[i + 1] / exps[i] for i in range(len(exps) - 1)
                 if exps[i] < -2]
        assert all(r > 1.7 for r in drops)

    def test_no_real_root_fails(self):
        with pytest.raises(RefinementError):
            refine_root(PolyRootSpec((1, 0, 1), "1.0", 40))

    def test_validation(self):
        with pytest.raises(ValueError):
            PolyRootSpec((5,), "1.0", 40)
        with pytest.raises(ValueError):
            PolyRootSpec((1, 0), "1.0", 40)
