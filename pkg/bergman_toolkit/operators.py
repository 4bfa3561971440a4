"""
Bergman Toolkit - Operators Module
Truncated matrices of multiplication and Toeplitz operators, submodule projectors for [p],
compressed commutators and cross corners
"""

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from math import comb
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import structlog
from scipy.linalg import solve_triangular

from bergman_toolkit.config import config
from bergman_toolkit.exceptions import (
    DimensionMismatchError,
    NonFiniteMatrixError,
    SubmoduleDegeneracyError,
)
from bergman_toolkit.moments import monomial_norm_sq
from bergman_toolkit.polycore import (
    ExactComplex,
    HoloPoly,
    MultiIndex,
    check_coordinate,
    multiindex_enumerate,
    poly_mul,
    scalar_conj,
)

logger = structlog.get_logger(__name__)


# ==================== BASES ====================


@dataclass(frozen=True)
class BasisSpec:
    """Monomials z^alpha with |alpha| <= D in graded-lex order, weight t"""

    n: int
    t: int = 0
    D: int = 0

    def __post_init__(self):
        if self.n < 1 or self.t < 0 or self.D < 0:
            raise ValueError(f"invalid basis n={self.n}, t={self.t}, D={self.D}")

    @property
    def dimension(self) -> int:
        return comb(self.n + self.D, self.n)

    @cached_property
    def indices(self) -> List[MultiIndex]:
        return multiindex_enumerate(self.n, self.D)

    @cached_property
    def position(self) -> Dict[MultiIndex, int]:
        return {alpha: k for k, alpha in enumerate(self.indices)}

    @cached_property
    def norms_sq(self) -> List[Fraction]:
        return [monomial_norm_sq(alpha, self.t, self.n) for alpha in self.indices]

    @cached_property
    def norms(self) -> np.ndarray:
        return np.sqrt(np.array([float(v) for v in self.norms_sq]))

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.array([alpha.degree for alpha in self.indices])

    def index(self, alpha: MultiIndex) -> int:
        return self.position[alpha]

    def with_degree(self, D: int) -> "BasisSpec":
        return BasisSpec(self.n, self.t, D)


@dataclass(frozen=True)
class SubmoduleBasis:
    """Orthonormal basis of span{p z^beta}, one vector per generator (in pivot order)"""

    generators: Tuple[MultiIndex, ...]
    band: Tuple[int, ...]

    @property
    def dimension(self) -> int:
        return len(self.generators)


Basis = Union[BasisSpec, SubmoduleBasis]


@dataclass
class OperatorMatrix:
    """
    Dense matrix of an operator between two bases

    exact=True means monomial coordinates with ExactComplex entries (object array);
    otherwise entries are complex128 in orthonormal coordinates.
    """

    domain: Basis
    codomain: Basis
    entries: np.ndarray
    exact: bool = False
    metadata: Dict = field(default_factory=dict)

    def __post_init__(self):
        expected = (self.codomain.dimension, self.domain.dimension)
        if self.entries.shape != expected:
            raise DimensionMismatchError(f"matrix shape {self.entries.shape} != {expected}")

    @property
    def shape(self) -> Tuple[int, int]:
        return self.entries.shape

    @property
    def band_indices(self) -> Tuple[int, ...]:
        return tuple(self.metadata.get("band_indices", ()))

    def to_orthonormal(self) -> "OperatorMatrix":
        """Float matrix in orthonormal coordinates (no-op for float matrices)"""
        if not self.exact:
            return self
        if not isinstance(self.domain, BasisSpec) or not isinstance(self.codomain, BasisSpec):
            raise TypeError("exact matrices live on monomial bases only")
        dense = np.array([[complex(v) for v in row] for row in self.entries], dtype=complex).reshape(self.shape)
        scaled = dense * self.codomain.norms[:, None] / self.domain.norms[None, :]
        return OperatorMatrix(self.domain, self.codomain, scaled, False, dict(self.metadata))

    def adjoint(self) -> "OperatorMatrix":
        """Hilbert-space adjoint; in monomial coordinates G_dom^-1 M^H G_cod"""
        if not self.exact:
            return OperatorMatrix(self.codomain, self.domain, self.entries.conj().T, False)
        rows, cols = self.shape
        out = np.empty((cols, rows), dtype=object)
        g_dom = self.domain.norms_sq
        g_cod = self.codomain.norms_sq
        for a in range(cols):
            for b in range(rows):
                out[a, b] = scalar_conj(self.entries[b, a]) * (g_cod[b] / g_dom[a])
        return OperatorMatrix(self.codomain, self.domain, out, True)

    def as_complex(self) -> np.ndarray:
        m = self.to_orthonormal().entries
        if not np.all(np.isfinite(m)):
            raise NonFiniteMatrixError("operator matrix has non-finite entries")
        return m


def _exact_zeros(rows: int, cols: int) -> np.ndarray:
    out = np.empty((rows, cols), dtype=object)
    out.fill(ExactComplex(0))
    return out


def orthonormal_coordinates(f: HoloPoly, spec: BasisSpec) -> np.ndarray:
    """Coordinates of f in the orthonormal basis z^alpha / ||z^alpha||_t"""
    if f.n != spec.n:
        raise DimensionMismatchError(f"polynomial in {f.n} variables, basis in {spec.n}")
    if f.degree > spec.D:
        raise ValueError(f"degree {f.degree} exceeds basis degree {spec.D}")
    x = np.zeros(spec.dimension, dtype=complex)
    for alpha, c in f.terms.items():
        k = spec.index(alpha)
        x[k] = complex(c) * spec.norms[k]
    return x


def polynomial_from_coordinates(x: np.ndarray, spec: BasisSpec) -> HoloPoly:
    """Inverse of orthonormal_coordinates (float coefficients)"""
    return HoloPoly(
        spec.n,
        {alpha: complex(x[k]) / spec.norms[k] for k, alpha in enumerate(spec.indices) if x[k] != 0},
    )


# ==================== OPERATOR MATRICES ====================


def multiplication_matrix(f: HoloPoly, spec: BasisSpec, exact: bool = False) -> OperatorMatrix:
    """
    Matrix of g -> f g from degree <= D into degree <= D + deg f

    Args:
        f (HoloPoly): Nonzero multiplier
        spec (BasisSpec): Domain basis
        exact (bool): Monomial coordinates with exact entries instead of orthonormal floats
    """
    if f.is_zero():
        raise ValueError("multiplier must be nonzero")
    if f.n != spec.n:
        raise DimensionMismatchError(f"polynomial in {f.n} variables, basis in {spec.n}")
    codomain = spec.with_degree(spec.D + f.degree)
    if exact:
        entries = _exact_zeros(codomain.dimension, spec.dimension)
    else:
        entries = np.zeros((codomain.dimension, spec.dimension), dtype=complex)
    for col, gamma in enumerate(spec.indices):
        for alpha, c in f.terms.items():
            row = codomain.index(alpha + gamma)
            if exact:
                entries[row, col] = entries[row, col] + c
            else:
                entries[row, col] += complex(c) * codomain.norms[row] / spec.norms[col]
    return OperatorMatrix(spec, codomain, entries, exact, {"operator": f"M[{f}]"})


def compress(m: OperatorMatrix, spec: BasisSpec) -> OperatorMatrix:
    """Keep the rows of codomain monomials that lie in spec (projection back onto spec)"""
    rows = [m.codomain.index(alpha) for alpha in spec.indices]
    return OperatorMatrix(m.domain, spec, m.entries[rows, :], m.exact, dict(m.metadata))


def adjoint_action(p: HoloPoly, j: int, t: int = 0) -> HoloPoly:
    """
    T^{(t)*}_{z_j} applied to a polynomial: z^alpha -> alpha_j / (n+t+|alpha|) z^{alpha - e_j}
    """
    check_coordinate(j, p.n)
    unit = MultiIndex.unit(p.n, j)
    out = {}
    for alpha, c in p.terms.items():
        if alpha[j] > 0:
            out[alpha - unit] = c * Fraction(alpha[j], p.n + t + alpha.degree)
    return HoloPoly(p.n, out)


def coordinate_adjoint(j: int, spec: BasisSpec, exact: bool = False) -> OperatorMatrix:
    """Matrix of T^{(t)*}_{z_j} on degree <= D (the adjoint lowers degree, so it is exact)"""
    check_coordinate(j, spec.n)
    dim = spec.dimension
    entries = _exact_zeros(dim, dim) if exact else np.zeros((dim, dim), dtype=complex)
    unit = MultiIndex.unit(spec.n, j)
    for col, alpha in enumerate(spec.indices):
        if alpha[j] == 0:
            continue
        row = spec.index(alpha - unit)
        value = Fraction(alpha[j], spec.n + spec.t + alpha.degree)
        if exact:
            entries[row, col] = ExactComplex(value)
        else:
            entries[row, col] = float(value) * spec.norms[row] / spec.norms[col]
    return OperatorMatrix(spec, spec, entries, exact, {"operator": f"T*[z{j}]"})


def number_operator(spec: BasisSpec, exact: bool = False) -> OperatorMatrix:
    """Diagonal N with N z^alpha = |alpha| z^alpha"""
    if exact:
        entries = _exact_zeros(spec.dimension, spec.dimension)
        for k, d in enumerate(spec.degrees):
            entries[k, k] = ExactComplex(int(d))
    else:
        entries = np.diag(spec.degrees.astype(complex))
    return OperatorMatrix(spec, spec, entries, exact, {"operator": "N"})


# ==================== SUBMODULES ====================


@dataclass(frozen=True)
class SubmodulePlan:
    """Finite section span{p z^beta : l <= |beta| <= B} of [p] inside degree <= B + deg p + 1"""

    p: HoloPoly
    B: int
    l: int = 0

    def __post_init__(self):
        if self.p.is_zero():
            raise ValueError("generator p must be nonzero")
        if not 0 <= self.l <= self.B:
            raise ValueError(f"need 0 <= l <= B, got l={self.l}, B={self.B}")

    def __hash__(self) -> int:
        return hash((self.p.to_literal(), self.p.n, self.B, self.l))

    @property
    def n(self) -> int:
        return self.p.n

    @property
    def ambient_degree(self) -> int:
        return self.B + self.p.degree + 1

    @property
    def ambient(self) -> BasisSpec:
        return BasisSpec(self.n, 0, self.ambient_degree)

    @property
    def generators(self) -> List[MultiIndex]:
        return [beta for beta in multiindex_enumerate(self.n, self.B) if beta.degree >= self.l]

    def is_band_generator(self, beta: MultiIndex) -> bool:
        """Generators in the top deg p + 1 degrees see the truncation"""
        return beta.degree > self.B - (self.p.degree + 1)

    def generator_poly(self, beta: MultiIndex) -> HoloPoly:
        return poly_mul(self.p, HoloPoly.monomial(beta))

    def generator_matrix(self) -> np.ndarray:
        """Columns: orthonormal ambient coordinates of p z^beta"""
        ambient = self.ambient
        return np.column_stack(
            [orthonormal_coordinates(self.generator_poly(beta), ambient) for beta in self.generators]
        )


def pivoted_cholesky(gram: np.ndarray, rel_tol: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Factor gram[perm][:, perm] = L L^H with diagonal pivoting

    Raises:
        SubmoduleDegeneracyError: a pivot falls below rel_tol * largest pivot
    """
    rel_tol = config.GRAM_PIVOT_TOL if rel_tol is None else rel_tol
    a = np.array(gram, dtype=complex)
    m = a.shape[0]
    perm = np.arange(m)
    lower = np.zeros_like(a)
    largest = 0.0
    for k in range(m):
        q = k + int(np.argmax(np.real(np.diag(a))[k:]))
        if q != k:
            a[[k, q], :] = a[[q, k], :]
            a[:, [k, q]] = a[:, [q, k]]
            lower[[k, q], :k] = lower[[q, k], :k]
            perm[[k, q]] = perm[[q, k]]
        pivot = float(np.real(a[k, k]))
        largest = max(largest, pivot)
        if pivot <= rel_tol * largest:
            raise SubmoduleDegeneracyError(
                f"Gram matrix singular: pivot {pivot:.3e} vs largest {largest:.3e}",
                min_pivot=pivot,
                max_pivot=largest,
            )
        lower[k, k] = np.sqrt(pivot)
        lower[k + 1:, k] = a[k + 1:, k] / lower[k, k]
        a[k + 1:, k + 1:] -= np.outer(lower[k + 1:, k], lower[k + 1:, k].conj())
    return lower, perm


@dataclass
class SubmoduleFrame:
    """Orthonormal frame U (ambient x k) of a submodule plan plus its generator labels"""

    plan: SubmodulePlan
    U: np.ndarray
    basis: SubmoduleBasis

    @property
    def projector(self) -> np.ndarray:
        return self.U @ self.U.conj().T


@lru_cache(maxsize=32)
def submodule_frame(plan: SubmodulePlan) -> SubmoduleFrame:
    """Orthonormalize the generator set through its pivoted Cholesky factor"""
    V = plan.generator_matrix()
    gram = V.conj().T @ V
    lower, perm = pivoted_cholesky(gram)
    # U = V[:, perm] L^{-H}  <=>  L U^H = V[:, perm]^H
    U = solve_triangular(lower, V[:, perm].conj().T, lower=True).conj().T
    generators = tuple(plan.generators[k] for k in perm)
    band = tuple(k for k, beta in enumerate(generators) if plan.is_band_generator(beta))
    frame = SubmoduleFrame(plan, U, SubmoduleBasis(generators, band))
    logger.debug("📐 Submodule frame built", p=str(plan.p), B=plan.B, rank=U.shape[1])
    return frame


def _exact_solve(a: List[List[ExactComplex]], b: List[List[ExactComplex]]) -> List[List[ExactComplex]]:
    """Gauss-Jordan solve of a x = b over exact complex rationals"""
    m = len(a)
    cols = len(b[0]) if b else 0
    aug = [list(a[r]) + list(b[r]) for r in range(m)]
    for k in range(m):
        pivot_row = next((r for r in range(k, m) if not aug[r][k].is_zero()), None)
        if pivot_row is None:
            raise SubmoduleDegeneracyError("exact Gram matrix is singular")
        aug[k], aug[pivot_row] = aug[pivot_row], aug[k]
        inv = ExactComplex(1) / aug[k][k]
        aug[k] = [v * inv for v in aug[k]]
        for r in range(m):
            if r != k and not aug[r][k].is_zero():
                factor = aug[r][k]
                aug[r] = [vr - factor * vk for vr, vk in zip(aug[r], aug[k])]
    return [row[m:m + cols] for row in aug]


def inner_product_exact(f: HoloPoly, g: HoloPoly, t: int = 0) -> ExactComplex:
    """<f, g>_t with exact arithmetic"""
    total = ExactComplex(0)
    for alpha, c in f.terms.items():
        d = g.terms.get(alpha)
        if d is not None:
            total = total + c * scalar_conj(d) * monomial_norm_sq(alpha, t, f.n)
    return total


def submodule_projector(plan: SubmodulePlan, exact: bool = False) -> OperatorMatrix:
    """
    Orthogonal projector onto span{p z^beta : l <= |beta| <= B} in the ambient space

    exact=True returns monomial coordinates V (V^* G V)^{-1} V^* G with rational entries.
    """
    ambient = plan.ambient
    if not exact:
        frame = submodule_frame(plan)
        return OperatorMatrix(ambient, ambient, frame.projector, False, {"operator": "P_M"})

    gens = [plan.generator_poly(beta) for beta in plan.generators]
    gram = [[inner_product_exact(gl, gk) for gl in gens] for gk in gens]
    dim = ambient.dimension
    # Row k of rhs: functional x -> <x, g_k>, i.e. conj(g_k[alpha]) ||z^alpha||^2
    rhs = []
    for gk in gens:
        row = [ExactComplex(0)] * dim
        for alpha, c in gk.terms.items():
            idx = ambient.index(alpha)
            row[idx] = scalar_conj(c) * ambient.norms_sq[idx]
        rhs.append(row)
    coeffs = _exact_solve(gram, rhs)  # coeffs[l][col]
    entries = _exact_zeros(dim, dim)
    for l_idx, gl in enumerate(gens):
        for alpha, c in gl.terms.items():
            row = ambient.index(alpha)
            for col in range(dim):
                if not coeffs[l_idx][col].is_zero():
                    entries[row, col] = entries[row, col] + c * coeffs[l_idx][col]
    return OperatorMatrix(ambient, ambient, entries, True, {"operator": "P_M"})


def _ambient_multiplication(plan: SubmodulePlan, i: int) -> np.ndarray:
    ambient = plan.ambient
    m = multiplication_matrix(HoloPoly.coordinate(plan.n, i), ambient)
    return compress(m, ambient).entries


def compressed_commutator(plan: SubmodulePlan, i: int, j: int) -> OperatorMatrix:
    """
    Matrix of S_j* S_i - S_i S_j* on the orthonormal submodule basis

    S_i = P_M M_{z_i} P_M. Basis vectors built from generators in the top deg p + 1
    degrees are listed in metadata["band_indices"].
    """
    check_coordinate(i, plan.n)
    check_coordinate(j, plan.n)
    frame = submodule_frame(plan)
    U = frame.U
    S_i = U.conj().T @ _ambient_multiplication(plan, i) @ U
    S_j = S_i if i == j else U.conj().T @ _ambient_multiplication(plan, j) @ U
    S_j_adj = S_j.conj().T
    commutator = S_j_adj @ S_i - S_i @ S_j_adj
    return OperatorMatrix(
        frame.basis,
        frame.basis,
        commutator,
        False,
        {
            "operator": f"[S*_{j}, S_{i}]",
            "p": str(plan.p),
            "B": plan.B,
            "l": plan.l,
            "band_indices": list(frame.basis.band),
        },
    )


def cross_corner(plan: SubmodulePlan, j: int) -> OperatorMatrix:
    """(I - P_M) M*_{z_j} P_M on the ambient space"""
    ambient = plan.ambient
    P = submodule_frame(plan).projector
    adj = coordinate_adjoint(j, ambient).entries
    corner = (np.eye(ambient.dimension) - P) @ adj @ P
    return OperatorMatrix(ambient, ambient, corner, False, {"operator": f"P_perp T*[z{j}] P_M", "B": plan.B})


def submodule_distance(f: HoloPoly, plan: SubmodulePlan) -> float:
    """||f - P_M f|| in the unweighted Bergman norm"""
    x = orthonormal_coordinates(f, plan.ambient)
    U = submodule_frame(plan).U
    residual = x - U @ (U.conj().T @ x)
    return float(np.linalg.norm(residual))


def submodule_distance_sq_exact(f: HoloPoly, plan: SubmodulePlan) -> Fraction:
    """||f - P_M f||^2 by exact Gram elimination"""
    if f.degree > plan.ambient_degree:
        raise ValueError(f"degree {f.degree} exceeds ambient degree {plan.ambient_degree}")
    gens = [plan.generator_poly(beta) for beta in plan.generators]
    gram = [[inner_product_exact(gl, gk) for gl in gens] for gk in gens]
    b = [[inner_product_exact(f, gk)] for gk in gens]
    c = _exact_solve(gram, b)
    projected = ExactComplex(0)
    for l_idx in range(len(gens)):
        projected = projected + c[l_idx][0] * scalar_conj(b[l_idx][0])
    dist_sq = inner_product_exact(f, f) - projected
    if dist_sq.im != 0:
        raise ArithmeticError("squared distance came out non-real")
    return dist_sq.re


def kernel_vector(w: Sequence[complex], spec: BasisSpec) -> np.ndarray:
    """Normalized degree <= D truncation of the Bergman kernel K_w in orthonormal coordinates"""
    w = np.asarray(w, dtype=complex)
    # K_w = sum conj(w^alpha) z^alpha / ||z^alpha||^2
    x = np.array(
        [np.conj(np.prod(w ** np.array(alpha.exponents))) / spec.norms[k] for k, alpha in enumerate(spec.indices)]
    )
    return x / np.linalg.norm(x)


def kernel_orthogonality(w: Sequence[complex], plan: SubmodulePlan) -> float:
    """||P_M k_w||; vanishes when p(w) = 0"""
    w = np.asarray(w, dtype=complex)
    if w.shape != (plan.n,):
        raise DimensionMismatchError(f"point has shape {w.shape}, need ({plan.n},)")
    if np.linalg.norm(w) >= 1.0:
        raise ValueError("kernel point must lie inside the unit ball")
    x = kernel_vector(w, plan.ambient)
    U = submodule_frame(plan).U
    return float(np.linalg.norm(U.conj().T @ x))


def _ball_points(n: int, count: int, radius: float, rng: np.random.Generator) -> np.ndarray:
    raw = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    raw /= np.linalg.norm(raw, axis=1, keepdims=True)
    return raw * (radius * rng.random(count) ** (1.0 / (2 * n)))[:, None]


def sample_zero_set(p: HoloPoly, count: int, seed: int, radius: float = 0.95, max_tries: int = 10_000) -> np.ndarray:
    """
    Points w of Z(p) with |w| < radius: fix the other coordinates at random and solve for
    the first coordinate p depends on
    """
    var = next((j for j in range(1, p.n + 1) if any(alpha[j] > 0 for alpha in p.terms)), None)
    if var is None:
        raise ValueError("a constant polynomial has no zeros to sample")
    rng = np.random.default_rng(seed)
    found: List[np.ndarray] = []
    for _ in range(max_tries):
        w = _ball_points(p.n, 1, radius, rng)[0]
        coeffs = np.zeros(max(alpha[var] for alpha in p.terms) + 1, dtype=complex)
        for alpha, c in p.terms.items():
            others = np.prod([w[i - 1] ** alpha[i] for i in range(1, p.n + 1) if i != var])
            coeffs[alpha[var]] += complex(c) * others
        nonzero = np.flatnonzero(np.abs(coeffs) > 0)
        if len(nonzero) == 0 or nonzero[-1] == 0:
            continue
        for root in np.polynomial.polynomial.polyroots(coeffs[: nonzero[-1] + 1]):
            w = w.copy()
            w[var - 1] = root
            if np.linalg.norm(w) < radius:
                found.append(w)
        if len(found) >= count:
            return np.array(found[:count])
    raise ValueError(f"found only {len(found)} of {count} zeros inside radius {radius}")


def sample_off_zero_set(
    p: HoloPoly, count: int, seed: int, threshold: float = 0.1, radius: float = 0.9, max_tries: int = 1000
) -> np.ndarray:
    """Points of the ball with |p(w)| > threshold"""
    rng = np.random.default_rng(seed)
    found: List[np.ndarray] = []
    for _ in range(max_tries):
        batch = _ball_points(p.n, 4 * count, radius, rng)
        keep = np.abs(p.evaluate(batch)) > threshold
        found.extend(batch[keep])
        if len(found) >= count:
            return np.array(found[:count])
    raise ValueError(f"found only {len(found)} of {count} points with |p| > {threshold}")


# ==================== EXPORT ====================


def export_matrix(m: OperatorMatrix, path: Union[str, Path]) -> Path:
    """
    Write a matrix for external inspection

    .csv: one row per matrix row, columns re_0, im_0, re_1, im_1, ...
    .bin: row-major little-endian complex128 (re/im interleaved) plus a .json header
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    dense = m.as_complex()
    if path.suffix == ".csv":
        interleaved = np.empty((dense.shape[0], 2 * dense.shape[1]))
        interleaved[:, 0::2] = dense.real
        interleaved[:, 1::2] = dense.imag
        columns = [f"{part}_{k}" for k in range(dense.shape[1]) for part in ("re", "im")]
        pd.DataFrame(interleaved, columns=columns).to_csv(path, index=False, float_format="%.17g")
    else:
        np.ascontiguousarray(dense, dtype="<c16").tofile(path)
        header = {
            "rows": dense.shape[0],
            "cols": dense.shape[1],
            "dtype": "complex128-le",
            "order": "row-major",
            "metadata": {k: v for k, v in m.metadata.items() if isinstance(v, (int, float, str, list))},
        }
        path.with_suffix(".json").write_text(json.dumps(header, sort_keys=True, indent=2))
    logger.info("💾 Matrix exported", path=str(path), shape=dense.shape)
    return path
