"""Cofactor annihilators for jet coefficient matrices and the Lambda scan.

Given polynomial generators F_1..F_t on a product polydisc, the truncated
ideal I_w + m^N on the fiber over w is the column span of a coefficient
matrix A(w) whose entries are polynomials in w.  A holomorphic left
annihilator B(w) with B(w) A(w) = 0 is built from bordered-minor cofactors
of a nonsingular pivot block; its rows are the coefficient vectors of
functionals that cut out the truncated ideal on the open set U where the
pivot determinant does not vanish.  Scanning the sup of the log-kernels of
these functionals over a base grid locates the inclusion locus of the
multiplier ideal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bergman import QuadSpec, assemble_gram, orthonormalize, xi_kernel
from .family import FunctionalFamily, PolyW
from .functional import MultiIndex, multi_indices_upto
from .weights import (
    ConstantWeight,
    LogDivisorWeight,
    LogMonomialWeight,
    Polydisc,
    QuadraticWeight,
    SumWeight,
    UnsupportedWeightError,
    ZeroWeight,
)

RANK_TOL = 1e-9
DETC_TOL = 1e-8
MEMBERSHIP_TOL = 1e-9
ORACLE_RESIDUAL_TOL = 1e-8
KERNEL_ZERO_TOL = 1e-14


class OutsideUError(ValueError):
    """The base point is (numerically) outside the open set U."""


class DegenerateInputError(RuntimeError):
    """No nonsingular pivot block could be found after repeated witnesses."""


@dataclass
class IdealFamily:
    z_arity: int
    w_arity: int
    generators: list[PolyW]  # polynomials in (z_1..z_n, w_1..w_m)
    truncation: int  # jet order N

    def __post_init__(self):
        if self.truncation < 1:
            raise ValueError("truncation order N must be >= 1")
        if not self.generators:
            raise ValueError("need at least one generator")
        for g in self.generators:
            if g.arity != self.z_arity + self.w_arity:
                raise ValueError("generator arity must be z_arity + w_arity")

    def fiber_generators(self, w: Sequence[complex]) -> list[PolyW]:
        from .weights import substitute_base

        return [substitute_base(g, self.z_arity, w) for g in self.generators]


def _split_generator(g: PolyW, n: int, m: int) -> dict[MultiIndex, PolyW]:
    """Collect a (z, w)-polynomial as z-monomial -> polynomial in w."""
    out: dict[MultiIndex, PolyW] = {}
    for exps, c in g.coeffs.items():
        alpha, beta = exps[:n], exps[n:]
        p = out.get(alpha)
        add = PolyW(m, {beta: c})
        out[alpha] = p + add if p is not None else add
    return out


@dataclass
class CoeffMatrixA:
    fam: IdealFamily
    basis: list[MultiIndex]  # row labels, grlex, |alpha| <= N-1
    cols: list[tuple[MultiIndex, int]]  # (beta, generator index)
    entries: list[list[PolyW]]  # p x q, polynomials in w

    @property
    def p(self) -> int:
        return len(self.basis)

    @property
    def q(self) -> int:
        return len(self.cols)

    def evaluate(self, w: Sequence[complex]) -> np.ndarray:
        w = tuple(complex(x) for x in w)
        A = np.zeros((self.p, self.q), dtype=complex)
        for i, row in enumerate(self.entries):
            for j, e in enumerate(row):
                if e.coeffs:
                    A[i, j] = e.evaluate(w)
        return A


def build_coeff_matrix(fam: IdealFamily) -> CoeffMatrixA:
    """Coefficient matrix of {z^beta f_i mod m^N} in the jet monomial basis."""
    n, m, N = fam.z_arity, fam.w_arity, fam.truncation
    basis = multi_indices_upto(n, N - 1)
    row_of = {a: i for i, a in enumerate(basis)}
    zero = PolyW(m, {})
    splits = [_split_generator(g, n, m) for g in fam.generators]
    cols: list[tuple[MultiIndex, int]] = []
    entries: list[list[PolyW]] = [[] for _ in basis]
    for i in range(len(fam.generators)):
        for beta in basis:
            cols.append((beta, i))
            col = {a: zero for a in basis}
            for gamma, pw in splits[i].items():
                alpha = tuple(bi + gi for bi, gi in zip(beta, gamma))
                if sum(alpha) <= N - 1:
                    col[alpha] = col[alpha] + pw
            for a in basis:
                entries[row_of[a]].append(col[a])
    return CoeffMatrixA(fam, basis, cols, entries)


def _numerical_rank(A: np.ndarray) -> int:
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > RANK_TOL * s[0]))


def max_rank(
    A: CoeffMatrixA, w_grid: Sequence, seed: int = 0, n_random: int = 12
) -> tuple[int, tuple[complex, ...]]:
    """Max numerical rank over the grid plus automatic generic perturbations."""
    m = A.fam.w_arity
    pts = [_as_w(w, m) for w in w_grid]
    if not pts:
        raise ValueError("empty grid")
    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        pts.append(
            tuple(
                complex(a, b)
                for a, b in zip(
                    0.6 * rng.uniform(-1, 1, m), 0.6 * rng.uniform(-1, 1, m)
                )
            )
        )
    best_r, witness = -1, pts[0]
    for w in pts:
        r = _numerical_rank(A.evaluate(w))
        if r > best_r:
            best_r, witness = r, w
    return best_r, witness


def _as_w(w, m: int) -> tuple[complex, ...]:
    if np.isscalar(w) or isinstance(w, complex):
        w = (w,) if m == 1 else w
    return tuple(complex(x) for x in w)


def _sym_det(M: list[list[PolyW]], arity: int) -> PolyW:
    """Exact determinant of a square polynomial matrix by minor expansion."""
    r = len(M)
    one = PolyW.constant(1.0, arity)
    if r == 0:
        return one
    zero = PolyW(arity, {})
    memo: dict[tuple[int, ...], PolyW] = {}

    def rec(rows: tuple[int, ...]) -> PolyW:
        if not rows:
            return one
        if rows in memo:
            return memo[rows]
        col = r - len(rows)
        total = zero
        for idx, row in enumerate(rows):
            e = M[row][col]
            if not e.coeffs:
                continue
            sub = rec(rows[:idx] + rows[idx + 1 :])
            term = e * sub
            if idx % 2:
                term = -term
            total = total + term
        memo[rows] = total
        return total

    return rec(tuple(range(r)))


@dataclass
class AnnihilatorResult:
    matrix: CoeffMatrixA
    r: int
    row_perm: list[int]  # permuted row i of the pivoted matrix = original row_perm[i]
    col_perm: list[int]
    rows: list[list[PolyW]]  # s x p annihilator in permuted-row coordinates
    det_c: PolyW
    pivot_block: list[list[PolyW]]  # the r x r block C(w)
    product_residual: float  # max relative coefficient of B(w) A(w)
    _families: list[FunctionalFamily] | None = field(default=None, repr=False)

    @property
    def p(self) -> int:
        return self.matrix.p

    @property
    def s(self) -> int:
        return len(self.rows)

    def eval_B(self, w) -> np.ndarray:
        w = _as_w(w, self.matrix.fam.w_arity)
        B = np.zeros((self.s, self.p), dtype=complex)
        for k, row in enumerate(self.rows):
            for l, e in enumerate(row):
                if e.coeffs:
                    B[k, l] = e.evaluate(w)
        return B

    def in_U(self, w) -> bool:
        w = _as_w(w, self.matrix.fam.w_arity)
        if self.r == 0:
            return True
        cvals = [
            abs(e.evaluate(w)) for row in self.pivot_block for e in row if e.coeffs
        ]
        scale = max(1.0, max(cvals, default=0.0)) ** self.r
        return abs(self.det_c.evaluate(w)) > DETC_TOL * scale

    def functionals(self) -> list[FunctionalFamily]:
        if self._families is None:
            self._families = functionals_from_annihilator(self)
        return self._families


def annihilator(
    A: CoeffMatrixA, r: int, witness, seed: int = 0
) -> AnnihilatorResult:
    """Holomorphic left annihilator via bordered-minor cofactors.

    A rank-revealing pivot search at the witness selects the r x r block
    C(w); for each extra row the bordered (r+1) x (r+1) matrix supplies
    cofactors forming a row X_j with X_j(w) A(w) = 0 identically (every
    (r+1)-minor of A vanishes since r is the maximal rank).
    """
    m = A.fam.w_arity
    p, q = A.p, A.q
    rng = np.random.default_rng(seed)
    w0 = _as_w(witness, m)
    row_perm = col_perm = None
    for attempt in range(10):
        A0 = A.evaluate(w0)
        if r == 0:
            row_perm, col_perm = list(range(p)), list(range(q))
            break
        from scipy.linalg import qr

        _, _, cp = qr(A0, pivoting=True)
        csel = list(cp[:r])
        _, _, rp = qr(A0[:, csel].conj().T, pivoting=True)
        rsel = list(rp[:r])
        block = A0[np.ix_(rsel, csel)]
        s = np.linalg.svd(block, compute_uv=False)
        if s[-1] > RANK_TOL * max(s[0], 1e-300):
            row_perm = rsel + [i for i in range(p) if i not in rsel]
            col_perm = csel + [j for j in range(q) if j not in csel]
            break
        w0 = tuple(
            complex(a, b)
            for a, b in zip(0.6 * rng.uniform(-1, 1, m), 0.6 * rng.uniform(-1, 1, m))
        )
    else:
        raise DegenerateInputError(
            "no nonsingular pivot block found after 10 witnesses"
        )

    Ap = [[A.entries[row_perm[i]][col_perm[j]] for j in range(q)] for i in range(p)]
    C = [[Ap[i][j] for j in range(r)] for i in range(r)]
    det_c = _sym_det(C, m)
    zero = PolyW(m, {})
    rows: list[list[PolyW]] = []
    for j in range(1, p - r + 1):
        # bordered matrix: pivot rows/cols plus row r+j and column r+j
        D = [
            [Ap[i][c] for c in range(r)] + [Ap[i][r + j - 1]] for i in range(r)
        ]
        D.append([Ap[r + j - 1][c] for c in range(r)] + [Ap[r + j - 1][r + j - 1]])
        X = [zero] * p
        for k in range(1, r + 1):
            minor = [
                [row[c] for c in range(r)]
                for idx, row in enumerate(D)
                if idx != k - 1
            ]
            sign = -1.0 if (k - 1 + r) % 2 else 1.0
            X[k - 1] = sign * _sym_det(minor, m)
        X[r + j - 1] = det_c
        rows.append(X)

    # certify the exact polynomial identity B(w) A(w) = 0
    residual = 0.0
    scale = max(
        max((e.max_coeff() for row in Ap for e in row), default=0.0), 1.0
    ) * max(max((e.max_coeff() for row in rows for e in row), default=0.0), 1.0)
    for X in rows:
        for c in range(q):
            acc = zero
            for l in range(p):
                if X[l].coeffs and Ap[l][c].coeffs:
                    acc = acc + X[l] * Ap[l][c]
            residual = max(residual, acc.max_coeff() / scale)
    return AnnihilatorResult(A, r, row_perm, col_perm, rows, det_c, C, residual)


def functionals_from_annihilator(res: AnnihilatorResult) -> list[FunctionalFamily]:
    """One holomorphic functional family per annihilator row, deg <= N-1."""
    n, m = res.matrix.fam.z_arity, res.matrix.fam.w_arity
    fams = []
    for row in res.rows:
        terms = {}
        for l, e in enumerate(row):
            if e.coeffs:
                terms[res.matrix.basis[res.row_perm[l]]] = e
        fams.append(FunctionalFamily(n, m, terms))
    return fams


def _truncated_coeff_vector(f: PolyW, basis: list[MultiIndex]) -> np.ndarray:
    return np.array([f.coeffs.get(a, 0.0) for a in basis], dtype=complex)


def membership_by_functionals(res: AnnihilatorResult, w, f: PolyW) -> bool:
    """f in I_w + m^N, decided by vanishing of all functional actions at 0."""
    w = _as_w(w, res.matrix.fam.w_arity)
    if not res.in_U(w):
        raise OutsideUError(f"base point {w} outside U (pivot determinant ~ 0)")
    fscale = max(1.0, f.max_coeff())
    for fam in res.functionals():
        xi = fam.eval(w)
        val = sum(v * f.coeffs.get(a, 0.0) for a, v in xi.coeffs.items())
        xscale = max(1.0, max((abs(v) for v in xi.coeffs.values()), default=0.0))
        if abs(val) > MEMBERSHIP_TOL * xscale * fscale:
            return False
    return True


def membership_oracle(
    fam: IdealFamily, w, f: PolyW, A: CoeffMatrixA | None = None
) -> bool:
    """Independent check: is the jet of f in the column span of A(w)?"""
    if A is None:
        A = build_coeff_matrix(fam)
    w = _as_w(w, fam.w_arity)
    b = _truncated_coeff_vector(f, A.basis)
    if np.linalg.norm(b) == 0:
        return True
    Aw = A.evaluate(w)
    x, _, _, _ = np.linalg.lstsq(Aw, b, rcond=None)
    resid = np.linalg.norm(Aw @ x - b)
    return resid <= ORACLE_RESIDUAL_TOL * max(1.0, np.linalg.norm(b))


def build_annihilator(
    fam: IdealFamily, w_grid: Sequence | None = None, seed: int = 0
) -> AnnihilatorResult:
    """Full pipeline: coefficient matrix, max rank, cofactor annihilator."""
    A = build_coeff_matrix(fam)
    if w_grid is None:
        w_grid = [(0.3,) * fam.w_arity]
    r, witness = max_rank(A, w_grid, seed=seed)
    return annihilator(A, r, witness, seed=seed)


# ---------------------------------------------------------------------------
# Psi_N and the Lambda scan
# ---------------------------------------------------------------------------

def multiplier_generators(weight) -> list[PolyW]:
    """Generators of the multiplier ideal germ at 0 for oracle weights."""
    if isinstance(weight, (ZeroWeight, ConstantWeight, QuadraticWeight)):
        return [PolyW.constant(1.0, weight.arity)]
    if isinstance(weight, SumWeight):
        parts = [p for p in weight.parts if not isinstance(p, (ZeroWeight, ConstantWeight, QuadraticWeight))]
        if not parts:
            return [PolyW.constant(1.0, weight.arity)]
        if len(parts) == 1:
            return multiplier_generators(parts[0])
        raise UnsupportedWeightError("no oracle for mixed singular sums")
    if isinstance(weight, LogMonomialWeight):
        a = []
        for ci in weight.coeffs:
            t = ci - 1.0
            ai = int(math.floor(t)) + 1 if abs(t - round(t)) < 1e-12 and t >= 0 else max(
                0, int(math.ceil(t))
            )
            a.append(max(0, ai))
        return [PolyW.monomial(tuple(a))]
    if isinstance(weight, LogDivisorWeight):
        g0 = weight.g.evaluate((0.0,) * weight.g.arity)
        if abs(g0) > 1e-12 * max(1.0, weight.g.max_coeff()):
            return [PolyW.constant(1.0, weight.g.arity)]
        if abs(weight.c - 1.0) > 1e-12:
            raise UnsupportedWeightError("divisor oracle supports c = 1 only")
        return [weight.g]
    raise UnsupportedWeightError(
        f"no multiplier-ideal oracle for variant {weight.variant!r}"
    )


@dataclass
class PsiPoint:
    w: tuple[complex, ...]
    flag: str  # "ok" | "minus_inf" | "outside_U"
    psi: float  # -inf when flagged minus_inf; nan when outside U
    kernels: list[float]


def psi_at(
    res: AnnihilatorResult,
    phi_joint,
    w,
    fiber_domain: Polydisc | None = None,
    degree: int = 8,
    quad: QuadSpec | None = None,
) -> PsiPoint:
    """sup over annihilator functionals of log kernel at the fiber origin."""
    fam = res.matrix.fam
    w = _as_w(w, fam.w_arity)
    if fiber_domain is None:
        fiber_domain = Polydisc((1.0,) * fam.z_arity)
    if not res.in_U(w):
        return PsiPoint(w, "outside_U", math.nan, [])
    model = orthonormalize(
        assemble_gram(fiber_domain, phi_joint.fiber(w), degree, quad or QuadSpec())
    )
    origin = (0.0,) * fam.z_arity
    kernels = [
        xi_kernel(model, f.eval(w), origin) for f in res.functionals()
    ]
    if not kernels:
        # vacuous annihilator: I_w + m^N is everything, inclusion always holds
        return PsiPoint(w, "minus_inf", -math.inf, [])
    top = max(kernels)
    if top <= KERNEL_ZERO_TOL:
        return PsiPoint(w, "minus_inf", -math.inf, kernels)
    return PsiPoint(w, "ok", math.log(top), kernels)


def psi_scan(
    fam: IdealFamily,
    phi_joint,
    w_grid: Sequence,
    fiber_domain: Polydisc | None = None,
    degree: int = 8,
    quad: QuadSpec | None = None,
    res: AnnihilatorResult | None = None,
    seed: int = 0,
) -> tuple[AnnihilatorResult, list[PsiPoint]]:
    if res is None:
        res = build_annihilator(fam, w_grid, seed=seed)
    pts = [
        psi_at(res, phi_joint, w, fiber_domain, degree, quad) for w in w_grid
    ]
    return res, pts


@dataclass
class LambdaScanResult:
    res: AnnihilatorResult
    points: list[PsiPoint]
    lambda_psi: list[int]  # grid indices with Psi_N = -inf
    lambda_membership: list[int]  # grid indices passing the functional check
    skipped: list[int]  # indices outside U
    mismatches: list[int]

    @property
    def agree(self) -> bool:
        return not self.mismatches

    def lambda_points(self) -> list[tuple[complex, ...]]:
        return [self.points[i].w for i in self.lambda_psi]


def lambda_scan(
    fam: IdealFamily,
    phi_joint,
    w_grid: Sequence,
    fiber_domain: Polydisc | None = None,
    degree: int = 8,
    quad: QuadSpec | None = None,
    res: AnnihilatorResult | None = None,
    seed: int = 0,
) -> LambdaScanResult:
    """Grid section of the inclusion locus, cross-checked two ways.

    (a) Psi_N flags from the kernel sup; (b) direct membership of every
    oracle generator of the fiber multiplier ideal (times jet monomials)
    under the annihilator functionals.  Both must coincide on U.
    """
    res, pts = psi_scan(
        fam, phi_joint, w_grid, fiber_domain, degree, quad, res, seed
    )
    n, N = fam.z_arity, fam.truncation
    betas = multi_indices_upto(n, N - 1)
    lam_a, lam_b, skipped, mismatches = [], [], [], []
    for i, pt in enumerate(pts):
        if pt.flag == "outside_U":
            skipped.append(i)
            continue
        in_a = pt.flag == "minus_inf"
        gens = multiplier_generators(phi_joint.fiber(pt.w))
        in_b = all(
            membership_by_functionals(res, pt.w, g * PolyW.monomial(beta))
            for g in gens
            for beta in betas
        )
        if in_a:
            lam_a.append(i)
        if in_b:
            lam_b.append(i)
        if in_a != in_b:
            mismatches.append(i)
    return LambdaScanResult(res, pts, lam_a, lam_b, skipped, mismatches)


@dataclass
class KrullResult:
    per_n: dict[int, LambdaScanResult]
    stabilized_at: int | None
    nested: bool

    def intersection(self) -> set:
        sets = [
            {scan.points[i].w for i in scan.lambda_psi}
            for scan in self.per_n.values()
        ]
        out = sets[0]
        for s in sets[1:]:
            out &= s
        return out


def krull_stabilize(
    fam: IdealFamily,
    phi_joint,
    w_grid: Sequence,
    n_max: int,
    fiber_domain: Polydisc | None = None,
    degree: int = 8,
    quad: QuadSpec | None = None,
    seed: int = 0,
) -> KrullResult:
    """Lambda_N grid sets for N = 2..n_max with the Krull nesting check."""
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    per_n: dict[int, LambdaScanResult] = {}
    for N in range(2, n_max + 1):
        famN = IdealFamily(fam.z_arity, fam.w_arity, fam.generators, N)
        per_n[N] = lambda_scan(
            famN, phi_joint, w_grid, fiber_domain, degree, quad, seed=seed
        )
    nested = True
    stabilized = None
    prev = None
    for N in range(2, n_max + 1):
        cur = {per_n[N].points[i].w for i in per_n[N].lambda_psi}
        if prev is not None:
            if not cur.issubset(prev):
                nested = False
            if cur == prev and stabilized is None:
                stabilized = N - 1
        prev = cur
    return KrullResult(per_n, stabilized, nested)


# ---------------------------------------------------------------------------
# JSON / CSV helpers
# ---------------------------------------------------------------------------

def ideal_to_json(fam: IdealFamily) -> dict:
    from .family import poly_to_json

    return {
        "zArity": fam.z_arity,
        "wArity": fam.w_arity,
        "truncation": fam.truncation,
        "generators": [poly_to_json(g) for g in fam.generators],
    }


def ideal_from_json(obj: dict) -> IdealFamily:
    from .family import poly_from_json

    n, m = int(obj["zArity"]), int(obj["wArity"])
    gens = [poly_from_json(g, n + m) for g in obj["generators"]]
    return IdealFamily(n, m, gens, int(obj["truncation"]))


def annihilator_to_json(res: AnnihilatorResult) -> dict:
    from .family import poly_to_json

    return {
        "rank": res.r,
        "p": res.p,
        "s": res.s,
        "rowPermutation": list(res.row_perm),
        "columnPermutation": list(res.col_perm),
        "detC": poly_to_json(res.det_c),
        "productResidual": res.product_residual,
        "rows": [[poly_to_json(e) for e in row] for row in res.rows],
        "basis": [list(a) for a in res.matrix.basis],
    }
