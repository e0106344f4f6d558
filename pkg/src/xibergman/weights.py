"""Catalog of plurisubharmonic weights on polydiscs.

Every entry is psh by construction: sums of convex functions of |z_i|,
2c*log of the modulus of a holomorphic polynomial, and sums thereof.
User-supplied black-box weights are deliberately not accepted, since the
verification harness is only meaningful for certified-psh inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .family import PolyW
from .functional import ArityMismatchError, MultiIndex


class UnsupportedWeightError(ValueError):
    """Raised when an operation is asked of a weight outside its subcatalog."""


@dataclass(frozen=True)
class Polydisc:
    """Product of discs; radii positive, center defaults to the origin."""

    radii: tuple[float, ...]
    center: tuple[complex, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "radii", tuple(float(r) for r in self.radii))
        if any(r <= 0 for r in self.radii):
            raise ValueError("polydisc radii must be positive")
        c = self.center if self.center else (0.0,) * len(self.radii)
        object.__setattr__(self, "center", tuple(complex(x) for x in c))
        if len(self.center) != len(self.radii):
            raise ArityMismatchError("center/radii arity mismatch")

    @property
    def arity(self) -> int:
        return len(self.radii)

    def contains(self, z: Sequence[complex], slack: float = 1e-12) -> bool:
        z = tuple(complex(x) for x in z)
        if len(z) != self.arity:
            raise ArityMismatchError("point arity mismatch")
        return all(
            abs(zi - ci) < ri + slack
            for zi, ci, ri in zip(z, self.center, self.radii)
        )


# ---------------------------------------------------------------------------
# Fiber weights (functions of z alone)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ZeroWeight:
    arity: int
    variant = "zero"

    def evaluate(self, z: Sequence[complex]) -> float:
        return 0.0


@dataclass(frozen=True)
class ConstantWeight:
    arity: int
    value: float
    variant = "constant"

    def evaluate(self, z: Sequence[complex]) -> float:
        return self.value


@dataclass(frozen=True)
class QuadraticWeight:
    """psi = sum c_i |z_i - a_i|^2 with c_i >= 0."""

    coeffs: tuple[float, ...]
    center: tuple[complex, ...] = ()
    variant = "quadratic"

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if any(c < 0 for c in self.coeffs):
            raise ValueError("quadratic weight coefficients must be >= 0")
        a = self.center if self.center else (0.0,) * len(self.coeffs)
        object.__setattr__(self, "center", tuple(complex(x) for x in a))

    @property
    def arity(self) -> int:
        return len(self.coeffs)

    def evaluate(self, z: Sequence[complex]) -> float:
        return sum(
            c * abs(zi - ai) ** 2 for c, zi, ai in zip(self.coeffs, z, self.center)
        )


@dataclass(frozen=True)
class LogMonomialWeight:
    """psi = 2 sum c_i log|z_i| with c_i >= 0; -inf on the coordinate axes."""

    coeffs: tuple[float, ...]
    variant = "log_monomial"

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if any(c < 0 for c in self.coeffs):
            raise ValueError("log-monomial exponents must be >= 0")

    @property
    def arity(self) -> int:
        return len(self.coeffs)

    def evaluate(self, z: Sequence[complex]) -> float:
        total = 0.0
        for c, zi in zip(self.coeffs, z):
            if c == 0:
                continue
            m = abs(zi)
            if m == 0:
                return -math.inf
            total += 2.0 * c * math.log(m)
        return total


@dataclass(frozen=True)
class LogDivisorWeight:
    """psi = 2c log|g(z)| for a polynomial g; -inf exactly on the divisor."""

    g: PolyW
    c: float = 1.0
    variant = "log_divisor"

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("divisor weight exponent must be positive")

    @property
    def arity(self) -> int:
        return self.g.arity

    def evaluate(self, z: Sequence[complex]) -> float:
        m = abs(self.g.evaluate(tuple(z)))
        if m == 0:
            return -math.inf
        return 2.0 * self.c * math.log(m)


@dataclass(frozen=True)
class SumWeight:
    parts: tuple
    variant = "sum"

    def __post_init__(self):
        arities = {p.arity for p in self.parts}
        if len(arities) > 1:
            raise ArityMismatchError("summed weights have differing arities")

    @property
    def arity(self) -> int:
        return self.parts[0].arity

    def evaluate(self, z: Sequence[complex]) -> float:
        return sum(p.evaluate(z) for p in self.parts)


def eval_weight(spec, z: Sequence[complex], w: Sequence[complex] | None = None) -> float:
    """Pointwise weight value; joint variants require the base point w."""
    z = tuple(complex(x) for x in z)
    if hasattr(spec, "fiber"):
        if w is None:
            raise ValueError("joint weight requires a base point w")
        return spec.fiber(tuple(complex(x) for x in w)).evaluate(z)
    if len(z) != spec.arity:
        raise ArityMismatchError("point arity mismatch")
    return spec.evaluate(z)


# ---------------------------------------------------------------------------
# Joint weights psi(z, w) with fiber restriction
# ---------------------------------------------------------------------------

def substitute_base(g: PolyW, n: int, w: Sequence[complex]) -> PolyW:
    """Restrict a polynomial in (z, w) to a fiber: substitute the last
    arity-n variables by w, returning a polynomial in z alone."""
    m = g.arity - n
    w = tuple(complex(x) for x in w)
    if len(w) != m:
        raise ArityMismatchError("base point arity mismatch")
    out: dict[MultiIndex, complex] = {}
    for exps, c in g.coeffs.items():
        alpha, beta = exps[:n], exps[n:]
        val = c
        for wi, bi in zip(w, beta):
            val *= wi**bi
        out[alpha] = out.get(alpha, 0.0) + val
    return PolyW(n, out)


@dataclass(frozen=True)
class JointZero:
    z_arity: int
    w_arity: int
    variant = "joint_zero"

    def fiber(self, w):
        return ZeroWeight(self.z_arity)

    def as_product_weight(self):
        return ZeroWeight(self.z_arity + self.w_arity)


@dataclass(frozen=True)
class JointLogDivisor:
    """psi(z, w) = 2c log|g(z, w)| with g polynomial in the joint variables."""

    g: PolyW
    z_arity: int
    c: float = 1.0
    variant = "joint_log_divisor"

    @property
    def w_arity(self) -> int:
        return self.g.arity - self.z_arity

    def fiber(self, w):
        return LogDivisorWeight(substitute_base(self.g, self.z_arity, w), self.c)

    def as_product_weight(self):
        return None


@dataclass(frozen=True)
class JointQuadraticSplit:
    """psi(z, w) = sum cz_i |z_i|^2 + sum cw_j |w_j|^2."""

    cz: tuple[float, ...]
    cw: tuple[float, ...]
    variant = "joint_quadratic_split"

    @property
    def z_arity(self) -> int:
        return len(self.cz)

    @property
    def w_arity(self) -> int:
        return len(self.cw)

    def fiber(self, w):
        shift = sum(c * abs(wi) ** 2 for c, wi in zip(self.cw, w))
        quad = QuadraticWeight(self.cz)
        if shift == 0:
            return quad
        return SumWeight((quad, ConstantWeight(self.z_arity, shift)))

    def as_product_weight(self):
        return QuadraticWeight(self.cz + self.cw)


@dataclass(frozen=True)
class JointPairQuadratic:
    """psi(z, w) = sum c_i |z_i - w_i|^2; requires matching arities."""

    coeffs: tuple[float, ...]
    variant = "joint_pair_quadratic"

    @property
    def z_arity(self) -> int:
        return len(self.coeffs)

    @property
    def w_arity(self) -> int:
        return len(self.coeffs)

    def fiber(self, w):
        return QuadraticWeight(self.coeffs, tuple(w))

    def as_product_weight(self):
        return None


@dataclass(frozen=True)
class WIndependentJoint:
    """Joint weight that ignores w entirely: psi(z, w) = base(z)."""

    base: object
    w_arity: int
    variant = "w_independent"

    @property
    def z_arity(self) -> int:
        return self.base.arity

    def fiber(self, w):
        return self.base

    def as_product_weight(self):
        return extend_weight_arity(self.base, self.w_arity)


def extend_weight_arity(spec, extra: int):
    """View a z-weight as a weight on (z, w) that ignores the extra coords."""
    if extra == 0:
        return spec
    if isinstance(spec, ZeroWeight):
        return ZeroWeight(spec.arity + extra)
    if isinstance(spec, ConstantWeight):
        return ConstantWeight(spec.arity + extra, spec.value)
    if isinstance(spec, QuadraticWeight):
        return QuadraticWeight(
            spec.coeffs + (0.0,) * extra, spec.center + (0.0,) * extra
        )
    if isinstance(spec, LogMonomialWeight):
        return LogMonomialWeight(spec.coeffs + (0.0,) * extra)
    if isinstance(spec, SumWeight):
        return SumWeight(tuple(extend_weight_arity(p, extra) for p in spec.parts))
    return None


# ---------------------------------------------------------------------------
# Moments and separability
# ---------------------------------------------------------------------------

def monomial_moment(
    radii: Sequence[float], alpha: MultiIndex, c: Sequence[float] | None = None
) -> float:
    """Exact weighted moment of |z^alpha|^2 on a polydisc.

    integral over the polydisc of |z^alpha|^2 prod |z_i|^{-2 c_i} equals
    prod_i pi * R_i^{2 e_i} / e_i with e_i = alpha_i - c_i + 1, provided
    every e_i > 0; otherwise the basis element is not square-integrable and
    the moment is +inf.
    """
    if c is None:
        c = (0.0,) * len(alpha)
    total = 1.0
    for Ri, ai, ci in zip(radii, alpha, c):
        e = ai - ci + 1.0
        if e <= 0:
            return math.inf
        total *= math.pi * Ri ** (2.0 * e) / e
    return total


def separable_radial_parts(spec, arity: int):
    """Decompose e^{-psi} as prefactor * prod_i f_i(|z_i|) when possible.

    Returns (prefactor, [f_1, ..., f_n]) with vectorized radial densities,
    or None when the weight has no per-coordinate radial structure.
    """
    if isinstance(spec, ZeroWeight):
        return 1.0, [lambda r: np.ones_like(r)] * arity
    if isinstance(spec, ConstantWeight):
        return math.exp(-spec.value), [lambda r: np.ones_like(r)] * arity
    if isinstance(spec, QuadraticWeight):
        if any(a != 0 for a in spec.center):
            return None
        return 1.0, [
            (lambda ci: (lambda r: np.exp(-ci * r**2)))(ci) for ci in spec.coeffs
        ]
    if isinstance(spec, LogMonomialWeight):
        return 1.0, [
            (lambda ci: (lambda r: r ** (-2.0 * ci)))(ci) for ci in spec.coeffs
        ]
    if isinstance(spec, SumWeight):
        pre = 1.0
        parts = [[] for _ in range(arity)]
        for p in spec.parts:
            dec = separable_radial_parts(p, arity)
            if dec is None:
                return None
            pre *= dec[0]
            for i, f in enumerate(dec[1]):
                parts[i].append(f)

        def make(fs):
            return lambda r: math.prod([f(r) for f in fs], start=np.ones_like(r))

        return pre, [make(fs) for fs in parts]
    return None


# ---------------------------------------------------------------------------
# Multiplier-ideal oracles
# ---------------------------------------------------------------------------

def _poly_divides(g: PolyW, f: PolyW, tol: float = 1e-9) -> bool:
    """Least-squares test of whether g divides f in the polynomial ring."""
    if not f.coeffs:
        return True
    gmin = min(sum(a) for a in g.coeffs)
    hdeg = int(f.degree - gmin)
    if hdeg < 0:
        return False
    from .functional import multi_indices_upto

    betas = multi_indices_upto(f.arity, hdeg)
    # rows: exponents appearing in any product; columns: candidate h terms
    rows: dict[MultiIndex, int] = {}
    cols = []
    for j, beta in enumerate(betas):
        col = {}
        for a, c in g.coeffs.items():
            k = tuple(ai + bi for ai, bi in zip(a, beta))
            col[k] = col.get(k, 0.0) + c
        cols.append(col)
        for k in col:
            rows.setdefault(k, len(rows))
    for k in f.coeffs:
        rows.setdefault(k, len(rows))
    A = np.zeros((len(rows), len(betas)), dtype=complex)
    for j, col in enumerate(cols):
        for k, v in col.items():
            A[rows[k], j] = v
    b = np.zeros(len(rows), dtype=complex)
    for k, v in f.coeffs.items():
        b[rows[k]] = v
    _, res, _, _ = np.linalg.lstsq(A, b, rcond=None)
    resid = np.linalg.norm(A @ np.linalg.lstsq(A, b, rcond=None)[0] - b)
    return resid <= tol * max(1.0, np.linalg.norm(b))


def multiplier_membership_oracle(spec, f: PolyW) -> bool:
    """Exact germ membership of f in the multiplier ideal of the weight at 0.

    Supported subcatalog: log-monomial weights (per-monomial integrability
    test alpha_i > c_i - 1), log-divisor weights with c = 1 (divisibility),
    and nonsingular weights (membership is vacuous).
    """
    if isinstance(spec, (ZeroWeight, ConstantWeight, QuadraticWeight)):
        return True
    if isinstance(spec, LogMonomialWeight):
        if not f.coeffs:
            return True
        return all(
            all(ai > ci - 1.0 for ai, ci in zip(alpha, spec.coeffs))
            for alpha in f.coeffs
        )
    if isinstance(spec, LogDivisorWeight):
        g = spec.g
        g0 = g.evaluate((0.0,) * g.arity)
        if abs(g0) > 1e-12 * max(1.0, g.max_coeff()):
            return True  # weight bounded near the origin
        if abs(spec.c - 1.0) > 1e-12:
            raise UnsupportedWeightError(
                "divisor oracle supports c = 1 only; use divergence_probe"
            )
        return _poly_divides(g, f)
    raise UnsupportedWeightError(
        f"no analytic membership oracle for weight variant {spec.variant!r};"
        " use divergence_probe"
    )


# ---------------------------------------------------------------------------
# Numerical divergence probe
# ---------------------------------------------------------------------------

@dataclass
class ProbeReport:
    verdict: str  # CONVERGENT / DIVERGENT / INCONCLUSIVE
    slope: float
    values: list[float]
    radii: list[float]


def _log_gl_nodes(a: float, b: float, count: int):
    """Gauss-Legendre nodes/weights for integral over [a, b] in log radius."""
    t, wt = np.polynomial.legendre.leggauss(count)
    ta, tb = math.log(a), math.log(b)
    tt = 0.5 * (tb - ta) * t + 0.5 * (tb + ta)
    r = np.exp(tt)
    # dr = r dt
    return r, wt * 0.5 * (tb - ta) * r


def _separable_annulus_integral(spec, f: PolyW, eps: float, radii, nodes=160) -> float:
    dec = separable_radial_parts(spec, f.arity)
    assert dec is not None
    pre, dens = dec
    total = 0.0
    for alpha, c in f.coeffs.items():
        term = abs(c) ** 2
        for i, (ai, Ri) in enumerate(zip(alpha, radii)):
            r, wr = _log_gl_nodes(eps * Ri, Ri, nodes)
            term *= 2.0 * math.pi * float(np.sum(r ** (2 * ai + 1) * dens[i](r) * wr))
        total += term
    return pre * total


def _divisor_point_near_origin(g: PolyW, rng) -> tuple[complex, ...] | None:
    """A point on {g = 0} at distance ~0.3 from the origin, or None."""
    n = g.arity
    for _ in range(40):
        i0 = int(rng.integers(n))
        base = 0.3 * np.exp(2j * math.pi * rng.random(n))
        # univariate polynomial in coordinate i0 with the others frozen
        maxdeg = max((a[i0] for a in g.coeffs), default=0)
        if maxdeg == 0:
            continue
        coef = np.zeros(maxdeg + 1, dtype=complex)
        for a, c in g.coeffs.items():
            val = c
            for j in range(n):
                if j != i0:
                    val *= base[j] ** a[j]
            coef[a[i0]] += val
        if np.max(np.abs(coef[1:])) < 1e-14:
            continue
        roots = np.roots(coef[::-1])
        roots = roots[np.abs(roots) < 0.8]
        if len(roots) == 0:
            continue
        z = base.copy()
        z[i0] = roots[np.argmin(np.abs(roots))]
        return tuple(z), i0
    return None


def _divisor_transverse_integral(
    spec: LogDivisorWeight, f: PolyW, eps: float, point, i0, delta=0.05, nodes=120
) -> float:
    """Integral of |f|^2 e^{-psi} over a transverse annulus at a divisor point."""
    r, wr = _log_gl_nodes(eps * delta, delta, nodes)
    na = 32
    theta = 2.0 * math.pi * np.arange(na) / na
    total = 0.0
    for rr, ww in zip(r, wr):
        for th in theta:
            z = list(point)
            z[i0] = z[i0] + rr * np.exp(1j * th)
            gz = abs(spec.g.evaluate(tuple(z)))
            if gz == 0:
                continue
            # area element r dr dtheta; ww already carries dr
            total += (
                abs(f.evaluate(tuple(z))) ** 2
                * gz ** (-2.0 * spec.c)
                * ww
                * rr
                * (2.0 * math.pi / na)
            )
    return total


def divergence_probe(
    spec,
    f: PolyW,
    radii_sequence: Sequence[float],
    domain_radii: Sequence[float] | None = None,
    seed: int = 0,
) -> ProbeReport:
    """Numerical fallback oracle for multiplier-ideal membership.

    Integrates |f|^2 e^{-psi} over the domain with a shrinking exclusion
    around the singular locus and classifies the trend of the log-integral
    against the log of the exclusion radius.
    """
    eps_list = [float(e) for e in radii_sequence]
    if len(eps_list) < 4:
        raise ValueError("need at least 4 refinement levels")
    if any(e2 >= e1 for e1, e2 in zip(eps_list, eps_list[1:])):
        raise ValueError("radii sequence must be strictly decreasing")
    if domain_radii is None:
        domain_radii = (1.0,) * f.arity

    if isinstance(spec, LogDivisorWeight):
        rng = np.random.default_rng(seed)
        found = _divisor_point_near_origin(spec.g, rng)
        if found is None:
            # divisor misses the neighborhood: weight bounded, integral finite
            return ProbeReport("CONVERGENT", 0.0, [], eps_list)
        point, i0 = found
        values = [
            _divisor_transverse_integral(spec, f, e, point, i0) for e in eps_list
        ]
    else:
        if separable_radial_parts(spec, f.arity) is None:
            raise UnsupportedWeightError(
                f"divergence probe unsupported for variant {spec.variant!r}"
            )
        values = [
            _separable_annulus_integral(spec, f, e, domain_radii) for e in eps_list
        ]

    if all(v <= 0 for v in values):
        return ProbeReport("CONVERGENT", 0.0, values, eps_list)
    logs = np.log(np.maximum(values, 1e-300))
    x = np.log(eps_list)
    slope = float(np.polyfit(x, logs, 1)[0])
    cauchy = abs(values[-1] - values[-2]) <= 1e-2 * max(abs(values[-1]), 1e-300)
    if slope <= -0.1:
        verdict = "DIVERGENT"
    elif abs(slope) < 0.02 and cauchy:
        verdict = "CONVERGENT"
    else:
        verdict = "INCONCLUSIVE"
    return ProbeReport(verdict, slope, values, eps_list)


# ---------------------------------------------------------------------------
# JSON descriptors
# ---------------------------------------------------------------------------

def weight_to_json(spec) -> dict:
    from .family import poly_to_json

    v = spec.variant
    if v == "zero":
        return {"variant": v, "arity": spec.arity}
    if v == "constant":
        return {"variant": v, "arity": spec.arity, "value": spec.value}
    if v == "quadratic":
        return {
            "variant": v,
            "coeffs": list(spec.coeffs),
            "center": [[c.real, c.imag] for c in spec.center],
        }
    if v == "log_monomial":
        return {"variant": v, "coeffs": list(spec.coeffs)}
    if v == "log_divisor":
        return {
            "variant": v,
            "c": spec.c,
            "arity": spec.g.arity,
            "g": poly_to_json(spec.g),
        }
    if v == "sum":
        return {"variant": v, "parts": [weight_to_json(p) for p in spec.parts]}
    if v == "joint_zero":
        return {"variant": v, "zArity": spec.z_arity, "wArity": spec.w_arity}
    if v == "joint_log_divisor":
        return {
            "variant": v,
            "zArity": spec.z_arity,
            "c": spec.c,
            "arity": spec.g.arity,
            "g": poly_to_json(spec.g),
        }
    if v == "joint_quadratic_split":
        return {"variant": v, "cz": list(spec.cz), "cw": list(spec.cw)}
    if v == "joint_pair_quadratic":
        return {"variant": v, "coeffs": list(spec.coeffs)}
    if v == "w_independent":
        return {
            "variant": v,
            "wArity": spec.w_arity,
            "base": weight_to_json(spec.base),
        }
    raise UnsupportedWeightError(f"cannot serialize weight variant {v!r}")


def weight_from_json(obj: dict):
    from .family import poly_from_json

    v = obj["variant"]
    if v == "zero":
        return ZeroWeight(int(obj["arity"]))
    if v == "constant":
        return ConstantWeight(int(obj["arity"]), float(obj["value"]))
    if v == "quadratic":
        center = tuple(complex(a, b) for a, b in obj.get("center", []))
        return QuadraticWeight(tuple(obj["coeffs"]), center)
    if v == "log_monomial":
        return LogMonomialWeight(tuple(obj["coeffs"]))
    if v == "log_divisor":
        return LogDivisorWeight(
            poly_from_json(obj["g"], int(obj["arity"])), float(obj.get("c", 1.0))
        )
    if v == "sum":
        return SumWeight(tuple(weight_from_json(p) for p in obj["parts"]))
    if v == "joint_zero":
        return JointZero(int(obj["zArity"]), int(obj["wArity"]))
    if v == "joint_log_divisor":
        return JointLogDivisor(
            poly_from_json(obj["g"], int(obj["arity"])),
            int(obj["zArity"]),
            float(obj.get("c", 1.0)),
        )
    if v == "joint_quadratic_split":
        return JointQuadraticSplit(tuple(obj["cz"]), tuple(obj["cw"]))
    if v == "joint_pair_quadratic":
        return JointPairQuadratic(tuple(obj["coeffs"]))
    if v == "w_independent":
        return WIndependentJoint(weight_from_json(obj["base"]), int(obj["wArity"]))
    raise UnsupportedWeightError(f"unknown weight variant {v!r}")
