"""Unit tests for truncated Gram models and extremal kernels."""

import math

import numpy as np
import pytest

from xibergman.bergman import (
    KernelZeroError,
    QuadSpec,
    assemble_gram,
    basis_action,
    boundedness_constant,
    extremal_function,
    model_summary_json,
    orthonormalize,
    xi_kernel,
)
from xibergman.family import PolyW
from xibergman.functional import Functional, TaylorData, apply, recenter
from xibergman.weights import (
    ConstantWeight,
    LogDivisorWeight,
    LogMonomialWeight,
    Polydisc,
    QuadraticWeight,
    SumWeight,
    UnsupportedWeightError,
    ZeroWeight,
)

DIRAC1 = Functional(1, {(0,): 1.0})


def classical_disc_kernel(z, R=1.0):
    return R**2 / (math.pi * (R**2 - abs(z) ** 2) ** 2)


class TestGramAssembly:
    def test_moment_formula_n1(self):
        D = Polydisc((0.8,))
        m = assemble_gram(D, ZeroWeight(1), 8, method="quadrature")
        for i, a in enumerate(m.basis_labels):
            expect = math.pi * 0.8 ** (2 * (a[0] + 1)) / (a[0] + 1)
            assert m.gram[i, i] == pytest.approx(expect, rel=1e-8)
        off = m.gram - np.diag(np.diag(m.gram))
        assert np.max(np.abs(off)) <= 1e-8 * np.max(np.abs(m.gram))

    def test_moment_formula_n2(self):
        D = Polydisc((1.0, 1.0))
        m = assemble_gram(D, ZeroWeight(2), 6, method="quadrature")
        for i, a in enumerate(m.basis_labels):
            expect = math.pi**2 / ((a[0] + 1) * (a[1] + 1))
            assert m.gram[i, i] == pytest.approx(expect, rel=1e-8)

    def test_closed_vs_quadrature_weighted(self):
        D = Polydisc((1.0,))
        wt = SumWeight((LogMonomialWeight((0.5,)), ConstantWeight(1, 0.3)))
        mc = assemble_gram(D, wt, 6, method="closed")
        mq = assemble_gram(D, wt, 6, method="quadrature")
        scale = np.max(np.abs(mc.gram))
        assert np.max(np.abs(mc.gram - mq.gram)) <= 1e-8 * scale

    def test_closed_form_unavailable_raises(self):
        with pytest.raises(UnsupportedWeightError):
            assemble_gram(Polydisc((1.0,)), QuadraticWeight((1.0,)), 4, method="closed")

    def test_analytic_exclusion_log_monomial(self):
        # c = 1.5 excludes the constant and linear... only alpha > 0.5 stays
        m = assemble_gram(Polydisc((1.0,)), LogMonomialWeight((1.5,)), 4)
        assert (0,) not in m.basis_labels
        assert (1,) in m.basis_labels

    def test_empty_model(self):
        m = assemble_gram(Polydisc((1.0,)), LogMonomialWeight((50.0,)), 8)
        assert m.size == 0
        orthonormalize(m)
        assert xi_kernel(m, DIRAC1, (0.0,)) == 0.0

    def test_divisor_factored_basis_gram(self):
        # weight 2log|g| with c=1: Gram of {g z^a} is the unweighted moment diag
        g = PolyW(2, {(1, 0): 1.0, (0, 1): -1.0})
        D = Polydisc((1.0, 1.0))
        m = assemble_gram(D, LogDivisorWeight(g), 4)
        plain = assemble_gram(D, ZeroWeight(2), 4, method="closed")
        assert np.allclose(m.gram, plain.gram)
        assert m.basis[0].equals(g)

    def test_divisor_requires_unit_exponent(self):
        g = PolyW(1, {(1,): 1.0})
        with pytest.raises(UnsupportedWeightError):
            assemble_gram(Polydisc((1.0,)), LogDivisorWeight(g, c=2.0), 3)

    def test_quad_spec_validation(self):
        with pytest.raises(ValueError):
            QuadSpec(radial_nodes=2)
        with pytest.raises(ValueError):
            QuadSpec(inner_cutoff=0.5).validate_for(Polydisc((1.0,)))


class TestBasisAction:
    def test_matches_recenter_oracle(self):
        D = Polydisc((1.0, 1.0))
        m = assemble_gram(D, ZeroWeight(2), 4)
        xi = Functional(2, {(0, 0): 1.0, (1, 0): 2.0 - 1j, (0, 2): 0.5})
        z0 = (0.3 - 0.1j, 0.2)
        u = basis_action(m, xi, z0)
        for j, b in enumerate(m.basis):
            t = recenter(TaylorData((0.0, 0.0), dict(b.coeffs)), z0)
            assert abs(u[j] - apply(xi, t)) < 1e-12

    def test_divisor_basis_action(self):
        g = PolyW(2, {(1, 0): 1.0, (0, 1): -1.0})
        m = assemble_gram(Polydisc((1.0, 1.0)), LogDivisorWeight(g), 2)
        u = basis_action(m, Functional(2, {(0, 0): 1.0}), (0.4, 0.1))
        # Dirac action on g * z^a at z0 is g(z0) * z0^a
        for j, a in enumerate(m.basis_labels):
            expect = (0.4 - 0.1) * (0.4 ** a[0]) * (0.1 ** a[1])
            assert abs(u[j] - expect) < 1e-12


class TestClassicalKernel:
    def test_unit_disc_dirac(self):
        m = orthonormalize(assemble_gram(Polydisc((1.0,)), ZeroWeight(1), 40))
        for z in (0.0, 0.3, 0.5):
            K = xi_kernel(m, DIRAC1, (z,))
            assert K == pytest.approx(classical_disc_kernel(z), rel=1e-6)

    def test_off_center_disc(self):
        D = Polydisc((0.5,), (0.3,))
        m = orthonormalize(assemble_gram(D, ZeroWeight(1), 30))
        K = xi_kernel(m, DIRAC1, (0.3,))
        assert K == pytest.approx(1.0 / (math.pi * 0.25), rel=1e-9)

    def test_derivative_functional_at_center(self):
        # sum over k of |d/dz e_k|^2 at 0 on the unit disc: e_k = z^k sqrt((k+1)/pi)
        m = orthonormalize(assemble_gram(Polydisc((1.0,)), ZeroWeight(1), 20))
        K = xi_kernel(m, Functional(1, {(1,): 1.0}), (0.0,))
        assert K == pytest.approx(2.0 / math.pi, rel=1e-12)

    def test_outside_domain_rejected(self):
        m = assemble_gram(Polydisc((1.0,)), ZeroWeight(1), 4)
        with pytest.raises(ValueError):
            xi_kernel(m, DIRAC1, (1.5,))


class TestExtremalFunction:
    def test_attains_kernel_value(self):
        D = Polydisc((1.0,))
        wt = QuadraticWeight((1.0,))
        m = orthonormalize(assemble_gram(D, wt, 12))
        xi = Functional(1, {(0,): 1.0, (1,): 0.5j})
        z = (0.4 - 0.2j,)
        K = xi_kernel(m, xi, z)
        c = extremal_function(m, xi, z)
        u = basis_action(m, xi, z)
        val = complex(u @ c)
        ratio = abs(val) ** 2 / m.norm_sq(c)
        assert ratio == pytest.approx(K, rel=1e-10)

    def test_kernel_zero_raises(self):
        # Dirac at 0 annihilates the divisor-factored model (g(0) = 0)
        g = PolyW(1, {(1,): 1.0})
        m = orthonormalize(assemble_gram(Polydisc((1.0,)), LogDivisorWeight(g), 4))
        assert xi_kernel(m, DIRAC1, (0.0,)) <= 1e-30
        with pytest.raises(KernelZeroError):
            extremal_function(m, DIRAC1, (0.0,))


class TestInvariants:
    def setup_method(self):
        self.model = orthonormalize(
            assemble_gram(Polydisc((1.0,)), ZeroWeight(1), 10)
        )
        self.rng = np.random.default_rng(7)

    def random_xi(self):
        deg = int(self.rng.integers(0, 4))
        coeffs = {
            (k,): complex(*self.rng.uniform(-2, 2, 2)) for k in range(deg + 1)
        }
        return Functional(1, coeffs)

    def random_point(self):
        r, t = 0.8 * self.rng.random(), 2 * math.pi * self.rng.random()
        return (r * complex(math.cos(t), math.sin(t)),)

    def test_scaling_homogeneity(self):
        for _ in range(100):
            xi, z = self.random_xi(), self.random_point()
            c = complex(*self.rng.uniform(-2, 2, 2))
            K1 = xi_kernel(self.model, c * xi, z)
            K2 = abs(c) ** 2 * xi_kernel(self.model, xi, z)
            assert abs(K1 - K2) <= 1e-9 * max(1.0, K2)

    def test_weight_shift_law(self):
        base = orthonormalize(assemble_gram(Polydisc((1.0,)), ZeroWeight(1), 8))
        for a in (-1.0, 0.5, 2.0):
            shifted = orthonormalize(
                assemble_gram(Polydisc((1.0,)), ConstantWeight(1, a), 8)
            )
            for _ in range(30):
                xi, z = self.random_xi(), self.random_point()
                K0 = xi_kernel(base, xi, z)
                Ka = xi_kernel(shifted, xi, z)
                assert Ka == pytest.approx(math.exp(a) * K0, rel=1e-9)

    def test_degree_monotonicity(self):
        models = [
            orthonormalize(assemble_gram(Polydisc((1.0,)), ZeroWeight(1), d))
            for d in (4, 8, 16)
        ]
        for _ in range(100):
            xi, z = self.random_xi(), self.random_point()
            vals = [xi_kernel(m, xi, z) for m in models]
            assert vals[0] <= vals[1] + 1e-12 and vals[1] <= vals[2] + 1e-12

    def test_domain_monotonicity(self):
        small = orthonormalize(assemble_gram(Polydisc((0.9,)), ZeroWeight(1), 10))
        big = orthonormalize(assemble_gram(Polydisc((1.1,)), ZeroWeight(1), 10))
        for _ in range(100):
            xi, z = self.random_xi(), self.random_point()
            assert xi_kernel(big, xi, z) <= xi_kernel(small, xi, z) + 1e-12


class TestBoundednessAndSummary:
    def test_boundedness_constant_is_sup(self):
        m = orthonormalize(assemble_gram(Polydisc((1.0,)), ZeroWeight(1), 10))
        grid = [(0.1 * k,) for k in range(9)]
        C = boundedness_constant(m, DIRAC1, grid)
        assert C == pytest.approx(max(xi_kernel(m, DIRAC1, z) for z in grid))
        with pytest.raises(ValueError):
            boundedness_constant(m, DIRAC1, [])

    def test_summary_json(self):
        m = assemble_gram(Polydisc((1.0,)), ZeroWeight(1), 3)
        s = model_summary_json(m)
        assert s["basisSize"] == 4 and s["rank"] == 4
        assert len(s["eigenvalues"]) == 4
