"""Unit tests for the weight catalog, moments, and multiplier oracles."""

import math

import numpy as np
import pytest

from xibergman.family import PolyW
from xibergman.weights import (
    ConstantWeight,
    JointLogDivisor,
    JointPairQuadratic,
    JointQuadraticSplit,
    LogDivisorWeight,
    LogMonomialWeight,
    Polydisc,
    QuadraticWeight,
    SumWeight,
    UnsupportedWeightError,
    WIndependentJoint,
    ZeroWeight,
    divergence_probe,
    eval_weight,
    monomial_moment,
    multiplier_membership_oracle,
    separable_radial_parts,
    substitute_base,
    weight_from_json,
    weight_to_json,
)


def polar_integral_oracle(radii, alpha, c):
    """Independent adaptive-quadrature oracle for the monomial moment."""
    from scipy.integrate import quad

    total = 1.0
    for R, a, ci in zip(radii, alpha, c):
        val, _ = quad(lambda r: r ** (2 * a + 1 - 2 * ci), 0.0, R)
        total *= 2.0 * math.pi * val
    return total


class TestPolydisc:
    def test_contains(self):
        D = Polydisc((1.0, 0.5))
        assert D.contains((0.5, 0.2))
        assert not D.contains((0.5, 0.6))

    def test_centered(self):
        D = Polydisc((1.0,), (2.0,))
        assert D.contains((2.5,)) and not D.contains((0.5,))

    def test_rejects_bad_radii(self):
        with pytest.raises(ValueError):
            Polydisc((0.0,))


class TestMoments:
    def test_unweighted_formula(self):
        # pi R^{2(a+1)} / (a+1) per coordinate
        for a in range(6):
            v = monomial_moment((0.8,), (a,))
            assert v == pytest.approx(math.pi * 0.8 ** (2 * a + 2) / (a + 1))

    def test_weighted_against_quadrature_oracle(self):
        radii, c = (1.0, 0.7), (0.5, 0.25)
        for alpha in [(0, 0), (1, 2), (3, 0)]:
            v = monomial_moment(radii, alpha, c)
            assert v == pytest.approx(
                polar_integral_oracle(radii, alpha, c), rel=1e-10
            )

    def test_non_integrable_is_infinite(self):
        assert monomial_moment((1.0,), (0,), (1.0,)) == math.inf
        assert monomial_moment((1.0,), (1,), (1.5,)) < math.inf


class TestPointwiseEvaluation:
    def test_catalog_values(self):
        assert eval_weight(ZeroWeight(2), (0.5, 0.5)) == 0.0
        assert eval_weight(ConstantWeight(1, 2.5), (0.1,)) == 2.5
        assert eval_weight(QuadraticWeight((2.0,)), (0.5,)) == pytest.approx(0.5)
        assert eval_weight(LogMonomialWeight((1.0,)), (0.5,)) == pytest.approx(
            2 * math.log(0.5)
        )
        assert eval_weight(LogMonomialWeight((1.0,)), (0.0,)) == -math.inf
        g = PolyW(1, {(1,): 1.0, (0,): -0.5})
        assert eval_weight(LogDivisorWeight(g), (0.5,)) == -math.inf
        s = SumWeight((ZeroWeight(1), ConstantWeight(1, 1.0)))
        assert eval_weight(s, (0.9,)) == 1.0

    def test_joint_weights_restrict(self):
        g = PolyW(3, {(1, 0, 0): 1.0, (0, 1, 1): -1.0})  # z1 - w z2
        jw = JointLogDivisor(g, 2)
        assert eval_weight(jw, (0.25, 0.5), (0.5,)) == -math.inf
        split = JointQuadraticSplit((1.0,), (2.0,))
        assert eval_weight(split, (1.0,), (1.0,)) == pytest.approx(3.0)
        pair = JointPairQuadratic((1.0,))
        assert eval_weight(pair, (0.7,), (0.2,)) == pytest.approx(0.25)
        indep = WIndependentJoint(QuadraticWeight((1.0,)), 1)
        assert eval_weight(indep, (0.5,), (123.0,)) == pytest.approx(0.25)

    def test_joint_requires_base_point(self):
        with pytest.raises(ValueError):
            eval_weight(JointQuadraticSplit((1.0,), (1.0,)), (0.5,))


class TestSubstituteBase:
    def test_pencil_restriction(self):
        g = PolyW(3, {(1, 0, 0): 1.0, (0, 1, 1): -1.0})
        h = substitute_base(g, 2, (0.5,))
        assert h.coeffs == {(1, 0): 1.0, (0, 1): -0.5}

    def test_constant_in_base(self):
        g = PolyW(2, {(2, 0): 3.0})
        assert substitute_base(g, 1, (0.9,)).coeffs == {(2,): 3.0}


class TestSeparability:
    def test_separable_matches_pointwise(self):
        for spec in [
            ZeroWeight(2),
            ConstantWeight(2, 0.7),
            QuadraticWeight((1.0, 2.0)),
            LogMonomialWeight((0.5, 0.0)),
            SumWeight((QuadraticWeight((1.0, 0.5)), ConstantWeight(2, 0.2))),
        ]:
            pre, dens = separable_radial_parts(spec, 2)
            z = (0.3, 0.6)
            lhs = pre * math.prod(
                float(d(np.array([abs(zi)]))[0]) for d, zi in zip(dens, z)
            )
            assert lhs == pytest.approx(math.exp(-eval_weight(spec, z)))

    def test_off_center_quadratic_not_separable(self):
        assert separable_radial_parts(QuadraticWeight((1.0,), (0.3,)), 1) is None

    def test_divisor_not_separable(self):
        g = PolyW(2, {(1, 0): 1.0, (0, 1): -1.0})
        assert separable_radial_parts(LogDivisorWeight(g), 2) is None


class TestMultiplierOracle:
    def test_nonsingular_weights_vacuous(self):
        f = PolyW(1, {(0,): 1.0})
        for spec in [ZeroWeight(1), ConstantWeight(1, 1.0), QuadraticWeight((1.0,))]:
            assert multiplier_membership_oracle(spec, f)

    def test_log_monomial_threshold(self):
        spec = LogMonomialWeight((1.5,))
        assert not multiplier_membership_oracle(spec, PolyW(1, {(0,): 1.0}))
        assert multiplier_membership_oracle(spec, PolyW(1, {(1,): 1.0}))

    def test_divisor_divisibility(self):
        g = PolyW(2, {(1, 0): 1.0, (0, 1): -1.0})  # z1 - z2
        spec = LogDivisorWeight(g)
        assert multiplier_membership_oracle(spec, g)
        assert multiplier_membership_oracle(spec, g * PolyW.variable(0, 2))
        assert not multiplier_membership_oracle(spec, PolyW(2, {(1, 0): 1.0}))

    def test_divisor_missing_origin_vacuous(self):
        g = PolyW(1, {(1,): 1.0, (0,): 0.5})
        assert multiplier_membership_oracle(
            LogDivisorWeight(g), PolyW(1, {(0,): 1.0})
        )

    def test_unsupported_exponent(self):
        g = PolyW(1, {(1,): 1.0})
        with pytest.raises(UnsupportedWeightError):
            multiplier_membership_oracle(LogDivisorWeight(g, c=2.0), g)


class TestDivergenceProbe:
    EPS = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5]

    def test_log_monomial_divergent(self):
        spec = LogMonomialWeight((1.5,))
        rep = divergence_probe(spec, PolyW(1, {(0,): 1.0}), self.EPS)
        assert rep.verdict == "DIVERGENT"

    def test_log_monomial_convergent(self):
        spec = LogMonomialWeight((1.5,))
        rep = divergence_probe(spec, PolyW(1, {(1,): 1.0}), self.EPS)
        assert rep.verdict == "CONVERGENT"

    def test_agrees_with_analytic_oracle(self):
        spec = LogMonomialWeight((0.5, 1.2))
        for f in [PolyW(2, {(0, 0): 1.0}), PolyW(2, {(0, 1): 1.0}),
                  PolyW(2, {(1, 1): 1.0})]:
            member = multiplier_membership_oracle(spec, f)
            rep = divergence_probe(spec, f, self.EPS)
            assert rep.verdict == ("CONVERGENT" if member else "DIVERGENT")

    def test_divisor_transverse(self):
        g = PolyW(2, {(1, 0): 1.0, (0, 1): -1.0})
        spec = LogDivisorWeight(g)
        assert divergence_probe(spec, PolyW(2, {(0, 0): 1.0}), self.EPS).verdict == "DIVERGENT"
        assert divergence_probe(spec, g, self.EPS).verdict == "CONVERGENT"

    def test_rejects_bad_sequences(self):
        spec = ZeroWeight(1)
        with pytest.raises(ValueError):
            divergence_probe(spec, PolyW(1, {(0,): 1.0}), [0.1, 0.2, 0.05, 0.01])
        with pytest.raises(ValueError):
            divergence_probe(spec, PolyW(1, {(0,): 1.0}), [0.1, 0.05])


class TestJson:
    def test_round_trip_catalog(self):
        g = PolyW(3, {(1, 0, 0): 1.0, (0, 1, 1): -1.0})
        specs = [
            ZeroWeight(2),
            ConstantWeight(1, 0.5),
            QuadraticWeight((1.0, 2.0), (0.1j, 0.0)),
            LogMonomialWeight((0.5,)),
            LogDivisorWeight(PolyW(1, {(1,): 1.0})),
            SumWeight((ZeroWeight(1), ConstantWeight(1, 1.0))),
            JointLogDivisor(g, 2),
            JointQuadraticSplit((1.0,), (2.0,)),
            JointPairQuadratic((1.0, 1.0)),
            WIndependentJoint(QuadraticWeight((1.0,)), 1),
        ]
        for spec in specs:
            again = weight_from_json(weight_to_json(spec))
            assert again.variant == spec.variant
            if hasattr(spec, "fiber"):
                w = (0.25,) * spec.w_arity
                z = (0.3,) * spec.z_arity
                assert eval_weight(again, z, w) == pytest.approx(
                    eval_weight(spec, z, w)
                )
            else:
                z = (0.3,) * spec.arity
                assert eval_weight(again, z) == pytest.approx(eval_weight(spec, z))
