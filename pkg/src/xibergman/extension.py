"""Minimum-norm holomorphic extension from a central fiber.

Given a polynomial datum f on the fiber over w0 of a polydisc-times-disc
product, the minimizer of the joint weighted norm among truncated-basis
functions restricting to f on the fiber is found by null-space constrained
quadratic minimization.  The optimal-constant check compares the joint norm
per unit base area against the fiber norm: the ratio is at most 1 (with
equality for base-independent weights), which is the sharp constant pi r^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bergman import (
    EIG_CUTOFF_REL,
    GramModel,
    QuadSpec,
    _flatten_basis,
    _has_closed_form,
    _local_monomial,
    _log_monomial_exponents,
    _separable_quadrature_gram,
    _tensor_quadrature_gram,
    assemble_gram,
    extremal_function,
    orthonormalize,
    xi_kernel,
)
from .family import PolyW
from .functional import (
    MultiIndex,
    TaylorData,
    multi_indices_upto,
    recenter,
)
from .weights import (
    Polydisc,
    QuadraticWeight,
    eval_weight,
    monomial_moment,
    separable_radial_parts,
    substitute_base,
)

KKT_TOL = 1e-9
RESTRICTION_TOL = 1e-12


def _as_taylor(p: PolyW) -> TaylorData:
    return TaylorData((0.0,) * p.arity, dict(p.coeffs))


class InconsistentConstraintError(ValueError):
    """The fiber datum is not representable in the joint truncated basis."""


class ZeroFiberNormError(ValueError):
    """The fiber datum has zero weighted norm; the ratio is undefined."""


@dataclass(frozen=True)
class _JointView:
    """Pointwise view of a joint weight as a weight on the product domain."""

    joint: object
    z_arity: int
    variant = "joint_view"

    @property
    def arity(self) -> int:
        return self.z_arity + self.joint.w_arity

    def evaluate(self, p: Sequence[complex]) -> float:
        z, w = tuple(p[: self.z_arity]), tuple(p[self.z_arity :])
        return eval_weight(self.joint, z, w)


@dataclass
class ExtensionProblem:
    fiber_domain: Polydisc
    base_radius: float
    joint_weight: object  # joint weight with .fiber(w)
    w0: complex
    f: PolyW  # fiber datum, polynomial in z
    dz: int
    dw: int
    quad: QuadSpec = field(default_factory=QuadSpec)

    def __post_init__(self):
        if self.base_radius <= 0:
            raise ValueError("base disc radius must be positive")
        if getattr(self.joint_weight, "w_arity", 1) != 1:
            raise ValueError("extension supports a one-dimensional base only")
        self.w0 = complex(self.w0)
        if abs(self.w0) != 0 and not math.isfinite(abs(self.w0)):
            raise ValueError("bad base center")
        if self.f.arity != self.fiber_domain.arity:
            raise ValueError("fiber datum arity mismatch")

    @property
    def n(self) -> int:
        return self.fiber_domain.arity

    def joint_domain(self) -> Polydisc:
        return Polydisc(
            self.fiber_domain.radii + (self.base_radius,),
            self.fiber_domain.center + (self.w0,),
        )

    def joint_labels(self) -> list[tuple[MultiIndex, int]]:
        return [
            (a, k)
            for a in multi_indices_upto(self.n, self.dz)
            for k in range(self.dw + 1)
        ]


def _joint_gram(prob: ExtensionProblem) -> GramModel:
    """Gram model on the product domain with the (dz, dw) bidegree basis."""
    domain = prob.joint_domain()
    labels = [a + (k,) for a, k in prob.joint_labels()]
    weight = prob.joint_weight.as_product_weight()
    if weight is None:
        weight = _JointView(prob.joint_weight, prob.n)
    basis = [_local_monomial(a, domain.center) for a in labels]
    arity = domain.arity
    if _has_closed_form(weight, domain):
        cvec = _log_monomial_exponents(weight, arity)
        diag = np.array([monomial_moment(domain.radii, a, cvec) for a in labels])
        G = np.diag(diag).astype(complex)
    elif (
        separable_radial_parts(weight, arity) is not None
        and not any(c != 0 for c in domain.center)
        and not (isinstance(weight, QuadraticWeight) and weight.center != domain.center)
    ):
        G = _separable_quadrature_gram(domain, weight, labels, prob.quad)
    else:
        G = _tensor_quadrature_gram(domain, weight, basis, prob.quad)
    model = GramModel(domain, weight, prob.dz + prob.dw, basis, labels, G)
    model._flat_exps, model._flat_coeffs, model._flat_seg = _flatten_basis(
        basis, arity
    )
    return model


@dataclass
class ExtensionResult:
    problem: ExtensionProblem
    model: GramModel  # joint Gram model
    coeffs: np.ndarray  # joint coefficient vector in the local basis
    kkt_residual: float
    null_basis: np.ndarray  # constraint null space (columns)

    def joint_poly(self) -> PolyW:
        return self.model.poly_from_coeffs(self.coeffs)

    def restrict(self, w: complex) -> PolyW:
        return substitute_base(self.joint_poly(), self.problem.n, (complex(w),))

    @property
    def joint_norm(self) -> float:
        return self.model.norm_sq(self.coeffs)


def _restriction_map(prob: ExtensionProblem):
    """Rows: fiber monomials in (z - center); columns: joint basis.

    The joint basis is local at (center, w0), so restriction to w = w0 keeps
    exactly the k = 0 columns.
    """
    fiber_labels = multi_indices_upto(prob.n, prob.dz)
    row_of = {a: i for i, a in enumerate(fiber_labels)}
    pairs = prob.joint_labels()
    R = np.zeros((len(fiber_labels), len(pairs)), dtype=complex)
    for j, (a, k) in enumerate(pairs):
        if k == 0:
            R[row_of[a], j] = 1.0
    return fiber_labels, R


def _fiber_coeff_vector(prob: ExtensionProblem, fiber_labels) -> np.ndarray:
    """Coefficients of f in the local fiber monomials (z - center)^alpha."""
    local = recenter(_as_taylor(prob.f), prob.fiber_domain.center)
    b = np.zeros(len(fiber_labels), dtype=complex)
    index = {a: i for i, a in enumerate(fiber_labels)}
    for a, c in local.coeffs.items():
        if a not in index:
            raise InconsistentConstraintError(
                f"fiber datum has monomial {a} beyond degree {prob.dz}"
            )
        b[index[a]] = c
    return b


def minimal_extension(prob: ExtensionProblem) -> ExtensionResult:
    """Minimize the joint weighted norm subject to exact fiber restriction.

    Null-space method: with c = c0 + N y over the affine constraint set,
    the minimizer solves (N* G N) y = -N* G c0.
    """
    model = _joint_gram(prob)
    fiber_labels, R = _restriction_map(prob)
    b = _fiber_coeff_vector(prob, fiber_labels)
    c0, residuals, rank, _ = np.linalg.lstsq(R, b, rcond=None)
    if np.linalg.norm(R @ c0 - b) > 1e-10 * max(1.0, np.linalg.norm(b)):
        raise InconsistentConstraintError("restriction system has no solution")
    # orthonormal basis of the null space of R
    _, s, Vh = np.linalg.svd(R)
    r = int(np.sum(s > 1e-12 * (s[0] if len(s) else 1.0)))
    N = Vh[r:].conj().T
    G = 0.5 * (model.gram + np.conj(model.gram).T)
    if N.shape[1] > 0:
        H = np.conj(N).T @ G @ N
        g = np.conj(N).T @ (G @ c0)
        y, *_ = np.linalg.lstsq(H, -g, rcond=EIG_CUTOFF_REL)
        c = c0 + N @ y
    else:
        c = c0
    grad = G @ c
    proj = np.conj(N).T @ grad if N.shape[1] else np.zeros(0)
    scale = max(1.0, float(np.linalg.norm(G, ord=2)) * float(np.linalg.norm(c)))
    kkt = float(np.linalg.norm(proj)) / scale
    return ExtensionResult(prob, model, c, kkt, N)


def fiber_norm(prob: ExtensionProblem) -> float:
    """Weighted fiber norm of the datum on the central fiber."""
    fmodel = assemble_gram(
        prob.fiber_domain,
        prob.joint_weight.fiber((prob.w0,)),
        prob.dz,
        prob.quad,
    )
    index = {a: i for i, a in enumerate(fmodel.basis_labels)}
    local = recenter(_as_taylor(prob.f), prob.fiber_domain.center)
    c = np.zeros(fmodel.size, dtype=complex)
    for a, v in local.coeffs.items():
        if a not in index:
            raise InconsistentConstraintError(
                f"fiber datum monomial {a} outside the fiber model span"
            )
        c[index[a]] = v
    return fmodel.norm_sq(c)


def optimal_constant_check(prob: ExtensionProblem, result: ExtensionResult) -> float:
    """ratio = joint norm per unit base area over the fiber norm; <= 1 is sharp."""
    fn = fiber_norm(prob)
    if fn <= 0:
        raise ZeroFiberNormError("fiber datum has zero weighted norm")
    area = math.pi * prob.base_radius**2
    return result.joint_norm / (area * fn)


def extension_report(prob: ExtensionProblem, result: ExtensionResult) -> dict:
    fn = fiber_norm(prob)
    area = math.pi * prob.base_radius**2
    return {
        "ratio": result.joint_norm / (area * fn) if fn > 0 else math.inf,
        "fiberNorm": fn,
        "jointNorm": result.joint_norm,
        "kktResidual": result.kkt_residual,
    }


def jensen_diagnostic(
    prob_template: ExtensionProblem,
    family,
    z0: Sequence[complex],
    radial_nodes: int = 16,
    angular_nodes: int = 32,
    tol: float = 1e-3,
) -> dict:
    """Average of log|xi(w).F_w(z0)|^2 - log K(w) over the base disc.

    Takes the extremal fiber datum for xi(w0) at z0, extends it minimally,
    and checks the averaged lower bound against log of the fiber norm.  The
    inequality is the mechanism that transfers the extremal problem across
    fibers.
    """
    n = prob_template.n
    z0 = tuple(complex(x) for x in z0)
    w0, r = prob_template.w0, prob_template.base_radius

    fmodel = orthonormalize(
        assemble_gram(
            prob_template.fiber_domain,
            prob_template.joint_weight.fiber((w0,)),
            prob_template.dz,
            prob_template.quad,
        )
    )
    xi0 = family.eval((w0,))
    c = extremal_function(fmodel, xi0, z0)
    f = fmodel.poly_from_coeffs(c)

    prob = ExtensionProblem(
        prob_template.fiber_domain,
        r,
        prob_template.joint_weight,
        w0,
        f,
        prob_template.dz,
        prob_template.dw,
        prob_template.quad,
    )
    ext = minimal_extension(prob)
    F = ext.joint_poly()
    lhs = math.log(fiber_norm(prob))

    t, wt = np.polynomial.legendre.leggauss(radial_nodes)
    rr = 0.5 * r * (t + 1.0)
    wr = 0.5 * r * wt
    thetas = 2.0 * math.pi * np.arange(angular_nodes) / angular_nodes
    total, area = 0.0, 0.0
    fiber_cache: dict[complex, GramModel] = {}
    for rho, wgt in zip(rr, wr):
        for th in thetas:
            w = w0 + rho * complex(math.cos(th), math.sin(th))
            da = wgt * rho * (2.0 * math.pi / angular_nodes)
            Fw = substitute_base(F, n, (w,))
            xiw = family.eval((w,))
            taylor = recenter(_as_taylor(Fw), z0)
            act = sum(
                v * taylor.coeffs.get(aidx, 0.0)
                for aidx, v in xiw.coeffs.items()
            )
            model = fiber_cache.get(w)
            if model is None:
                model = orthonormalize(
                    assemble_gram(
                        prob.fiber_domain,
                        prob.joint_weight.fiber((w,)),
                        prob.dz,
                        prob.quad,
                    )
                )
                fiber_cache[w] = model
            K = xi_kernel(model, xiw, z0)
            if abs(act) == 0 or K <= 0:
                term = -math.inf
            else:
                term = math.log(abs(act) ** 2) - math.log(K)
            total += da * term
            area += da
    rhs = total / (math.pi * r**2)
    return {
        "lhs": lhs,
        "rhs": rhs,
        "margin": lhs - rhs,
        "areaCheck": area / (math.pi * r**2),
        "holds": lhs >= rhs - tol,
        "tolerance": tol,
    }
