"""Truncated models of weighted Bergman spaces and extremal kernels.

A GramModel holds a finite monomial (or divisor-factored) basis together
with the Gram matrix of the weighted inner product.  After eigenvalue
orthonormalization, the kernel value at z for a functional xi is the squared
norm of the vector of actions of xi on the orthonormal basis, which equals
the extremal ratio sup |xi.f(z)|^2 / ||f||^2 on the truncated space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import comb

from .family import PolyW
from .functional import Functional, MultiIndex, multi_indices_upto
from .weights import (
    ConstantWeight,
    LogDivisorWeight,
    LogMonomialWeight,
    Polydisc,
    QuadraticWeight,
    SumWeight,
    UnsupportedWeightError,
    ZeroWeight,
    monomial_moment,
    separable_radial_parts,
)

EIG_CUTOFF_REL = 1e-12


class EmptyModelError(ValueError):
    """All basis elements were excluded; the truncated space is {0}."""


class KernelZeroError(ValueError):
    """No extremal function exists: the kernel vanishes (annihilation)."""


@dataclass(frozen=True)
class QuadSpec:
    radial_nodes: int = 32
    angular_nodes: int = 64
    inner_cutoff: float = 0.0

    def __post_init__(self):
        if self.radial_nodes < 4 or self.angular_nodes < 4:
            raise ValueError("quadrature node counts must be >= 4")
        if self.inner_cutoff < 0:
            raise ValueError("inner cutoff must be >= 0")

    def validate_for(self, domain: Polydisc) -> None:
        if self.inner_cutoff >= min(domain.radii) / 10.0:
            raise ValueError("inner cutoff too large for domain")


@dataclass
class GramModel:
    domain: Polydisc
    weight: object
    degree: int
    basis: list[PolyW]
    basis_labels: list[MultiIndex]
    gram: np.ndarray
    transform: np.ndarray | None = None
    rank: int | None = None
    eigenvalues: np.ndarray | None = None
    # flattened basis terms for vectorized functional action
    _flat_exps: np.ndarray = field(default=None, repr=False)
    _flat_coeffs: np.ndarray = field(default=None, repr=False)
    _flat_seg: np.ndarray = field(default=None, repr=False)

    @property
    def arity(self) -> int:
        return self.domain.arity

    @property
    def size(self) -> int:
        return len(self.basis)

    def poly_from_coeffs(self, c: Sequence[complex]) -> PolyW:
        out = PolyW(self.arity, {})
        for ci, b in zip(c, self.basis):
            if ci != 0:
                out = out + ci * b
        return out

    def norm_sq(self, c: Sequence[complex]) -> float:
        c = np.asarray(c, dtype=complex)
        return float(np.real(np.conj(c) @ self.gram @ c))


def _flatten_basis(basis: list[PolyW], arity: int):
    exps, coeffs, seg = [], [], []
    for j, b in enumerate(basis):
        for a, v in b.coeffs.items():
            exps.append(a)
            coeffs.append(v)
            seg.append(j)
    if not exps:
        return (
            np.zeros((0, arity), dtype=int),
            np.zeros(0, dtype=complex),
            np.zeros(0, dtype=int),
        )
    return (
        np.array(exps, dtype=int),
        np.array(coeffs, dtype=complex),
        np.array(seg, dtype=int),
    )


def _local_monomial(alpha: MultiIndex, center: tuple[complex, ...]) -> PolyW:
    """(z - c)^alpha expanded into global monomials."""
    out = PolyW.constant(1.0, len(alpha))
    for i, (ai, ci) in enumerate(zip(alpha, center)):
        lin = PolyW(len(alpha), {})
        e = [0] * len(alpha)
        e[i] = 1
        lin = PolyW(len(alpha), {tuple(e): 1.0 + 0j, (0,) * len(alpha): -ci})
        for _ in range(ai):
            out = out * lin
    return out


def _log_monomial_exponents(weight, arity: int) -> tuple[float, ...]:
    """Aggregate log-monomial exponent vector across a (sum) weight."""
    if isinstance(weight, LogMonomialWeight):
        return weight.coeffs
    if isinstance(weight, SumWeight):
        total = [0.0] * arity
        for p in weight.parts:
            for i, c in enumerate(_log_monomial_exponents(p, arity)):
                total[i] += c
        return tuple(total)
    return (0.0,) * arity


def _has_closed_form(weight, domain: Polydisc) -> bool:
    if isinstance(weight, (ZeroWeight, ConstantWeight)):
        return True
    if isinstance(weight, LogMonomialWeight):
        return all(c == 0 for c in domain.center)
    if isinstance(weight, SumWeight):
        return all(_has_closed_form(p, domain) for p in weight.parts)
    return False


def _constant_shift(weight) -> float:
    if isinstance(weight, ConstantWeight):
        return weight.value
    if isinstance(weight, SumWeight):
        return sum(_constant_shift(p) for p in weight.parts)
    return 0.0


def _radial_quadrature_axes(domain: Polydisc, quad: QuadSpec, max_deg: int):
    """Per-coordinate polar node sets (r, wr, theta)."""
    t, wt = np.polynomial.legendre.leggauss(quad.radial_nodes)
    na = max(quad.angular_nodes, 2 * max_deg + 4)
    theta = 2.0 * math.pi * np.arange(na) / na
    axes = []
    for R in domain.radii:
        a, b = quad.inner_cutoff, R
        r = 0.5 * (b - a) * t + 0.5 * (b + a)
        wr = 0.5 * (b - a) * wt
        axes.append((r, wr, theta))
    return axes


def _separable_quadrature_gram(domain, weight, labels, quad):
    dec = separable_radial_parts(weight, domain.arity)
    pre, dens = dec
    if isinstance(weight, QuadraticWeight) and weight.center != domain.center:
        raise UnsupportedWeightError("quadratic center must match domain center")
    d = max((max(a) for a in labels), default=0)
    axes = _radial_quadrature_axes(domain, quad, d)
    mats = []
    for i, (r, wr, theta) in enumerate(axes):
        # M[a, b] = int disc (re^{it})^a conj^b f_i(r) r dr dt
        radial = np.array(
            [[np.sum(r ** (a + b + 1) * dens[i](r) * wr) for b in range(d + 1)]
             for a in range(d + 1)]
        )
        na = len(theta)
        k = np.arange(d + 1)
        ang = np.zeros((d + 1, d + 1))
        diff = k[:, None] - k[None, :]
        ang = np.real(np.exp(1j * np.outer(diff.ravel(), theta)).sum(axis=1)).reshape(
            d + 1, d + 1
        ) * (2.0 * math.pi / na)
        mats.append(radial * ang)
    p = len(labels)
    G = np.ones((p, p), dtype=complex) * pre
    for i in range(domain.arity):
        ai = np.array([a[i] for a in labels])
        G = G * mats[i][np.ix_(ai, ai)]
    return G


def _tensor_quadrature_gram(domain, weight, basis, quad):
    n = domain.arity
    d = 0
    for b in basis:
        for a in b.coeffs:
            d = max(d, max(a) if a else 0)
    axes = _radial_quadrature_axes(domain, quad, d)
    node_count = math.prod(len(r) * len(th) for r, _, th in axes)
    if node_count * max(len(basis), 1) > 5e7:
        raise UnsupportedWeightError(
            "tensor quadrature grid too large; use a separable weight or lower degree"
        )
    # build full grids of points and weights
    grids = []
    for i, (r, wr, theta) in enumerate(axes):
        zi = (r[:, None] * np.exp(1j * theta)[None, :]).ravel()
        wi = (wr[:, None] * r[:, None] * np.ones_like(theta)[None, :]).ravel() * (
            2.0 * math.pi / len(theta)
        )
        grids.append((zi + domain.center[i], wi))
    Z = np.stack(
        np.meshgrid(*[g[0] for g in grids], indexing="ij"), axis=-1
    ).reshape(-1, n)
    W = grids[0][1]
    for g in grids[1:]:
        W = np.multiply.outer(W, g[1])
    W = W.reshape(-1)
    psi = np.array([weight.evaluate(tuple(z)) for z in Z])
    dens = np.where(np.isneginf(psi), 0.0, np.exp(-np.where(np.isneginf(psi), 0.0, psi)))
    V = np.zeros((len(Z), len(basis)), dtype=complex)
    for j, b in enumerate(basis):
        vals = np.zeros(len(Z), dtype=complex)
        for a, c in b.coeffs.items():
            term = np.full(len(Z), c, dtype=complex)
            for i, ai in enumerate(a):
                if ai:
                    term = term * Z[:, i] ** ai
            vals += term
        V[:, j] = vals
    return np.conj(V).T @ (V * (W * dens)[:, None])


def assemble_gram(
    domain: Polydisc,
    weight,
    degree: int,
    quad: QuadSpec | None = None,
    method: str = "auto",
) -> GramModel:
    """Build a truncated weighted-Bergman model on a polydisc.

    method: "auto" uses closed-form moments when exact (zero, log-monomial,
    constant shifts) and the divisor-factored basis for log-divisor weights;
    "quadrature" forces numerical integration; "closed" forces the moment
    formula (error when unavailable).
    """
    if degree < 0:
        raise ValueError("basis degree must be >= 0")
    quad = quad or QuadSpec()
    quad.validate_for(domain)
    n = domain.arity
    labels = multi_indices_upto(n, degree)

    if isinstance(weight, LogDivisorWeight):
        if method == "closed":
            raise UnsupportedWeightError("no closed form for divisor weights")
        if abs(weight.c - 1.0) > 1e-12:
            raise UnsupportedWeightError(
                "factored divisor basis requires exponent c = 1"
            )
        if weight.g.arity != n:
            raise ValueError("divisor generator arity mismatch")
        basis = [weight.g * _local_monomial(a, domain.center) for a in labels]
        diag = np.array([monomial_moment(domain.radii, a) for a in labels])
        G = np.diag(diag).astype(complex)
        model = GramModel(domain, weight, degree, basis, labels, G)
        model._flat_exps, model._flat_coeffs, model._flat_seg = _flatten_basis(
            basis, n
        )
        return model

    # analytic exclusion of non-square-integrable monomials
    cvec = _log_monomial_exponents(weight, n)
    labels = [
        a for a in labels if all(ai - ci + 1.0 > 0 for ai, ci in zip(a, cvec))
    ]
    basis = [_local_monomial(a, domain.center) for a in labels]
    if not labels:
        G = np.zeros((0, 0), dtype=complex)
        model = GramModel(domain, weight, degree, [], [], G)
        model._flat_exps, model._flat_coeffs, model._flat_seg = _flatten_basis([], n)
        return model

    closed_ok = _has_closed_form(weight, domain)
    if method == "closed" and not closed_ok:
        raise UnsupportedWeightError("closed-form moments unavailable for this weight")

    if method in ("auto", "closed") and closed_ok:
        shift = _constant_shift(weight)
        diag = np.array(
            [
                monomial_moment(domain.radii, a, cvec) * math.exp(-shift)
                for a in labels
            ]
        )
        G = np.diag(diag).astype(complex)
    else:
        if separable_radial_parts(weight, n) is not None and not (
            isinstance(weight, QuadraticWeight) and weight.center != domain.center
        ):
            G = _separable_quadrature_gram(domain, weight, labels, quad)
        else:
            G = _tensor_quadrature_gram(domain, weight, basis, quad)

    model = GramModel(domain, weight, degree, basis, labels, G)
    model._flat_exps, model._flat_coeffs, model._flat_seg = _flatten_basis(basis, n)
    return model


def orthonormalize(model: GramModel) -> GramModel:
    """Eigendecompose the Gram matrix and retain the numerically stable part."""
    if model.size == 0:
        model.transform = np.zeros((0, 0), dtype=complex)
        model.rank = 0
        model.eigenvalues = np.zeros(0)
        return model
    G = 0.5 * (model.gram + np.conj(model.gram).T)
    lam, V = np.linalg.eigh(G)
    lmax = float(lam[-1]) if len(lam) else 0.0
    if lmax <= 0:
        keep = np.zeros(0, dtype=bool)
    else:
        keep = lam > EIG_CUTOFF_REL * lmax
    model.eigenvalues = lam
    model.transform = V[:, keep] / np.sqrt(lam[keep])[None, :]
    model.rank = int(keep.sum())
    return model


def basis_action(model: GramModel, xi: Functional, z: Sequence[complex]) -> np.ndarray:
    """Vector of actions (xi . b_j)(z) over the stored basis, exactly.

    Uses the binomial Taylor-shift identity: for a monomial z^gamma, the
    coefficient of (z - z0)^alpha is C(gamma, alpha) z0^{gamma - alpha}.
    """
    if xi.arity != model.arity:
        raise ValueError("functional arity mismatch")
    z0 = np.asarray([complex(x) for x in z])
    E, C, S = model._flat_exps, model._flat_coeffs, model._flat_seg
    u = np.zeros(model.size, dtype=complex)
    if len(E) == 0:
        return u
    for alpha, v in xi.coeffs.items():
        a = np.asarray(alpha, dtype=int)
        mask = np.all(E >= a[None, :], axis=1)
        if not mask.any():
            continue
        Em = E[mask]
        contrib = C[mask] * v
        for i in range(model.arity):
            k = Em[:, i] - a[i]
            contrib = contrib * comb(Em[:, i], a[i])
            pw = np.where(k == 0, 1.0 + 0j, z0[i] ** np.maximum(k, 0))
            contrib = contrib * pw
        np.add.at(u, S[mask], contrib)
    return u


def _ensure_transform(model: GramModel) -> None:
    if model.transform is None:
        orthonormalize(model)


def xi_kernel(model: GramModel, xi: Functional, z: Sequence[complex]) -> float:
    """Truncated-space extremal kernel value sum_k |(xi . e_k)(z)|^2."""
    if not model.domain.contains(z, slack=1e-9):
        raise ValueError(f"evaluation point {z} outside domain")
    if model.size == 0:
        return 0.0
    _ensure_transform(model)
    u = basis_action(model, xi, z)
    a = model.transform.T @ u
    return float(np.sum(np.abs(a) ** 2))


def extremal_function(
    model: GramModel, xi: Functional, z: Sequence[complex]
) -> np.ndarray:
    """Basis coefficients of the extremal F0 attaining the kernel value."""
    _ensure_transform(model)
    if model.size == 0:
        raise KernelZeroError("model is empty; kernel is 0")
    u = basis_action(model, xi, z)
    a = model.transform.T @ u
    K = float(np.sum(np.abs(a) ** 2))
    if K <= 1e-30:
        raise KernelZeroError("kernel vanishes: functional annihilates the model")
    return model.transform @ np.conj(a)


def boundedness_constant(model: GramModel, xi: Functional, grid) -> float:
    """Optimal constant sup over the grid of the kernel values."""
    grid = list(grid)
    if not grid:
        raise ValueError("empty grid")
    return max(xi_kernel(model, xi, z) for z in grid)


def model_summary_json(model: GramModel) -> dict:
    _ensure_transform(model)
    from .family import poly_to_json

    return {
        "arity": model.arity,
        "degree": model.degree,
        "basisSize": model.size,
        "rank": model.rank,
        "eigenvalues": [float(x) for x in np.atleast_1d(model.eigenvalues)],
        "basis": [poly_to_json(b) for b in model.basis],
    }
