"""
Bergman Toolkit - Covering Module
Anisotropic Carleson boxes Q_delta(a), their distortion bounds, and the greedy disjoint cover
of a sampled shell with bounded overlap of the dilates
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
import structlog
from pydantic import BaseModel, Field, model_validator
from scipy.spatial import cKDTree

from bergman_toolkit.config import config
from bergman_toolkit.reports import VerificationReport

logger = structlog.get_logger(__name__)

# Containment constant of the box-distortion lemma
CONTAINMENT_C = 200
SHRINK = 200.0 ** -2
DILATE = 200.0 ** 2
# c used by the covering argument itself
PROOF_C = 1.0 / (10 * 200 ** 3)


def overlap_bound(n: int) -> int:
    """N(n) + 1 with N(n) = 200^{6n+6}"""
    return 200 ** (6 * n + 6) + 1


# ==================== BOXES ====================


@dataclass(frozen=True)
class CarlesonBox:
    """Q_delta(a) = {z : |P_a z - a| < delta, |P_a^perp z| < sqrt(delta)}"""

    center: np.ndarray
    delta: float

    def __post_init__(self):
        center = np.asarray(self.center, dtype=complex).reshape(-1)
        object.__setattr__(self, "center", center)
        if self.delta <= 0:
            raise ValueError(f"box scale must be positive, got {self.delta}")
        if np.linalg.norm(center) == 0:
            raise ValueError("box center must be nonzero")

    @property
    def n(self) -> int:
        return len(self.center)

    @property
    def modulus(self) -> float:
        return float(np.linalg.norm(self.center))

    @property
    def direction(self) -> np.ndarray:
        return self.center / self.modulus

    @property
    def bounding_radius(self) -> float:
        """Radius of a ball about the center containing the box"""
        return float(np.sqrt(self.delta ** 2 + self.delta))

    def scaled(self, factor: float) -> "CarlesonBox":
        return CarlesonBox(self.center, self.delta * factor)

    def split(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Coordinates (u, w) of z = u * a/|a| + w with w orthogonal to a"""
        points = np.asarray(points, dtype=complex)
        u = points @ np.conj(self.direction)
        w = points - np.multiply.outer(u, self.direction)
        return u, w

    def contains(self, points: np.ndarray) -> Union[bool, np.ndarray]:
        points = np.asarray(points, dtype=complex)
        single = points.ndim == 1
        u, w = self.split(np.atleast_2d(points))
        inside = (np.abs(u - self.modulus) < self.delta) & (
            np.sum(np.abs(w) ** 2, axis=-1) < self.delta
        )
        return bool(inside[0]) if single else inside

    def project(self, x: np.ndarray) -> np.ndarray:
        """Nearest point of the closed box; a product of a disk and a ball projection"""
        u, w = self.split(x[None, :])
        u, w = u[0], w[0]
        offset = u - self.modulus
        if abs(offset) > self.delta:
            u = self.modulus + offset * (self.delta / abs(offset))
        w_norm = np.linalg.norm(w)
        root = np.sqrt(self.delta)
        if w_norm > root:
            w = w * (root / w_norm)
        return u * self.direction + w

    def support(self, v: np.ndarray) -> float:
        """sup of Re<x, v> over the closed box"""
        v_line = complex(np.vdot(self.direction, v))
        v_perp = v - v_line * self.direction
        return self.modulus * v_line.real + self.delta * abs(v_line) + np.sqrt(self.delta) * float(np.linalg.norm(v_perp))


def box_membership(z: np.ndarray, box: CarlesonBox) -> bool:
    return bool(box.contains(np.asarray(z, dtype=complex).reshape(-1)))


def delta_of(points: np.ndarray, c: float) -> np.ndarray:
    """delta(z) = c (1 - |z|)"""
    points = np.atleast_2d(np.asarray(points, dtype=complex))
    return c * (1.0 - np.linalg.norm(points, axis=1))


def box_at(z: np.ndarray, c: float, factor: float = 1.0) -> CarlesonBox:
    """Q_{factor * delta(z)}(z)"""
    z = np.asarray(z, dtype=complex).reshape(-1)
    return CarlesonBox(z, factor * float(delta_of(z, c)[0]))


# ==================== INTERSECTION ====================


@dataclass(frozen=True)
class IntersectionResult:
    intersect: bool
    decided: bool
    distance: float
    iterations: int
    method: str


def intersection_test(
    b1: CarlesonBox, b2: CarlesonBox, tol: Optional[float] = None, max_iter: Optional[int] = None
) -> IntersectionResult:
    """
    Decide whether two boxes meet by alternating projections

    A distance below tol means the closures meet. Disjointness is only declared with a
    separating-hyperplane certificate built from the support functions; if neither happens
    within max_iter rounds the answer is "intersect" with decided=False.
    """
    tol = config.INTERSECT_TOL if tol is None else tol
    max_iter = config.INTERSECT_MAX_ITER if max_iter is None else max_iter
    if b1.n != b2.n:
        raise ValueError(f"boxes live in C^{b1.n} and C^{b2.n}")

    gap = float(np.linalg.norm(b1.center - b2.center))
    if gap >= b1.bounding_radius + b2.bounding_radius:
        return IntersectionResult(False, True, gap - b1.bounding_radius - b2.bounding_radius, 0, "bounding-balls")
    if b1.contains(b2.center) or b2.contains(b1.center):
        return IntersectionResult(True, True, 0.0, 0, "center")

    x = b1.center
    distance = gap
    for iteration in range(1, max_iter + 1):
        y = b2.project(x)
        x = b1.project(y)
        v = y - x
        distance = float(np.linalg.norm(v))
        if distance < tol:
            return IntersectionResult(True, True, distance, iteration, "projection")
        if b1.support(v) + b2.support(-v) < 0:
            return IntersectionResult(False, True, distance, iteration, "separation")
    logger.warning("⚠️ Box intersection undecided", distance=distance, iterations=max_iter)
    return IntersectionResult(True, False, distance, max_iter, "undecided")


def boxes_intersect(b1: CarlesonBox, b2: CarlesonBox, tol: Optional[float] = None) -> bool:
    return intersection_test(b1, b2, tol).intersect


# ==================== SAMPLING ====================


def _unit_vectors(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    raw = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    return raw / np.linalg.norm(raw, axis=1, keepdims=True)


def sample_shell(n: int, r: float, count: int, seed: int) -> np.ndarray:
    """Uniform points of Omega_r = {r < |z| < 1} in C^n, shape (count, n)"""
    if not 0 <= r < 1:
        raise ValueError(f"shell radius must lie in [0, 1), got {r}")
    rng = np.random.default_rng(seed)
    directions = _unit_vectors(n, count, rng)
    inner = r ** (2 * n)
    radii = (inner + rng.random(count) * (1.0 - inner)) ** (1.0 / (2 * n))
    return directions * radii[:, None]


def sample_box(box: CarlesonBox, count: int, seed: int, boundary_bias: float = 0.5) -> np.ndarray:
    """
    Points of the open box; a boundary_bias fraction is pushed to within 1e-6 (relative) of
    the boundary of one or both factors
    """
    rng = np.random.default_rng(seed)
    n = box.n
    near = rng.random(count) < boundary_bias

    disk_radius = np.sqrt(rng.random(count))
    disk_radius[near] = 1.0 - 1e-6 * rng.random(int(near.sum()))
    u = box.modulus + box.delta * disk_radius * np.exp(2j * np.pi * rng.random(count))
    points = np.multiply.outer(u, box.direction)

    if n > 1:
        raw = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
        raw -= np.multiply.outer(raw @ np.conj(box.direction), box.direction)
        raw /= np.linalg.norm(raw, axis=1, keepdims=True)
        ball_radius = rng.random(count) ** (1.0 / (2 * (n - 1)))
        corner = near & (rng.random(count) < 0.5)
        ball_radius[corner] = 1.0 - 1e-6 * rng.random(int(corner.sum()))
        points = points + raw * (np.sqrt(box.delta) * ball_radius)[:, None]
    return points


# ==================== CONFIG ====================


class CoverConfig(BaseModel):
    """Shell radius, box scale and the sample set for a covering run"""

    r: float = 0.5
    c: float = 1e-3
    shrink: float = SHRINK
    dilate: float = DILATE
    samples: int = Field(default=1000, ge=1)
    seed: int = Field(default_factory=lambda: config.DEFAULT_SEED)

    @model_validator(mode="after")
    def _check_scales(self) -> "CoverConfig":
        if not 0.25 < self.r < 1:
            raise ValueError(f"r must lie in (1/4, 1), got {self.r}")
        limit = min((self.r - 0.25) / 4, 0.1)
        if not 0 < self.c < limit:
            raise ValueError(f"c must lie in (0, {limit:g}) for r = {self.r}, got {self.c}")
        return self


# ==================== LEMMA 3.4 ====================


def check_lemma34(
    z: np.ndarray,
    zprime: np.ndarray,
    cover: CoverConfig,
    probes: int = 1000,
    seed: Optional[int] = None,
) -> VerificationReport:
    """
    Distortion bounds for z' in Q_{delta(z)}(z):
    ratio bounds on 1-|z'|^2, 1-|z'| and |z'|, the box lying in Omega_{r-4c}, and the mutual
    containments Q_{delta(z)}(z) in Q_{200 delta(z')}(z') and back, checked on probe points
    """
    z = np.asarray(z, dtype=complex).reshape(-1)
    zprime = np.asarray(zprime, dtype=complex).reshape(-1)
    seed = cover.seed if seed is None else seed
    c, r = cover.c, cover.r
    parameters = {"n": len(z), "z": z, "zprime": zprime, "c": c, "r": r, "probes": probes}

    rz, rzp = float(np.linalg.norm(z)), float(np.linalg.norm(zprime))
    box = box_at(z, c)
    precondition = r < rz < 1 and box.contains(zprime)
    if not precondition:
        logger.warning("⚠️ Distortion check precondition violated", z_modulus=rz)
        return VerificationReport.build(
            "lemma-3.4",
            lhs=None,
            rhs=None,
            passed=False,
            parameters=parameters,
            seed=seed,
            scalar_kind="float",
            details={"precondition_violated": True},
        )

    ratio_sq = (1 - rzp ** 2) / (1 - rz ** 2)
    ratio_gap = (1 - rzp) / (1 - rz)
    ratio_modulus = rzp / rz
    outer_sq = (rz + box.delta) ** 2 + box.delta
    bounds = {
        "ratio_sq": bool(1 - 3 * c < ratio_sq < 1 + 2 * c),
        "ratio_gap": bool(1 / 3 < ratio_gap < 3),
        "ratio_modulus": bool(1 - 4 * c < ratio_modulus),
        "shell_inner": bool(rz - box.delta >= r - 4 * c),
        "shell_outer": bool(outer_sq <= 1),
    }

    violations = 0
    if probes > 0:
        box_prime = box_at(zprime, c)
        inner = sample_box(box, probes, seed)
        inner_prime = sample_box(box_prime, probes, seed + 1)
        violations += int(np.sum(~box_prime.scaled(CONTAINMENT_C).contains(inner)))
        violations += int(np.sum(~box.scaled(CONTAINMENT_C).contains(inner_prime)))
        moduli = np.linalg.norm(inner, axis=1)
        violations += int(np.sum(~((moduli > r - 4 * c) & (moduli < 1))))

    return VerificationReport.build(
        "lemma-3.4",
        lhs=violations,
        rhs=0,
        passed=all(bounds.values()) and violations == 0,
        parameters=parameters,
        seed=seed,
        scalar_kind="float",
        details={
            "precondition_violated": False,
            "ratios": {"sq": ratio_sq, "gap": ratio_gap, "modulus": ratio_modulus},
            "bounds": bounds,
            "probe_violations": violations,
        },
    )


def sample_pairs(n: int, cover: CoverConfig, count: int, seed: int) -> List[Tuple[np.ndarray, np.ndarray]]:
    """(z, z') with z uniform in Omega_r and z' in Q_{delta(z)}(z)"""
    points = sample_shell(n, cover.r, count, seed)
    child_seeds = np.random.SeedSequence(seed).spawn(count)
    pairs = []
    for z, child in zip(points, child_seeds):
        zprime = sample_box(box_at(z, cover.c), 1, int(child.generate_state(1)[0]))[0]
        pairs.append((z, zprime))
    return pairs


# ==================== GREEDY COVER ====================


@dataclass
class CoverResult:
    """Selected centers (as sample indices, in selection order) and diagnostics"""

    samples: np.ndarray
    selected: List[int]
    shrunk_delta: np.ndarray
    delta: np.ndarray
    discarded_by: np.ndarray
    covered: np.ndarray
    undecided: int = 0
    intersecting_pairs: List[Tuple[int, int]] = field(default_factory=list)
    overlap: Optional["OverlapStats"] = None

    @property
    def centers(self) -> np.ndarray:
        return self.samples[self.selected]

    @property
    def disjoint(self) -> bool:
        return not self.intersecting_pairs

    @property
    def all_covered(self) -> bool:
        return bool(np.all(self.covered))

    @property
    def monotone(self) -> bool:
        radii = self.shrunk_delta[self.selected]
        return bool(np.all(np.diff(radii) <= 0))


def _real_view(points: np.ndarray) -> np.ndarray:
    return np.hstack([points.real, points.imag])


def _disjointness_audit(result: CoverResult, tol: Optional[float]) -> List[Tuple[int, int]]:
    """Every pair of selected shrunk boxes whose bounding balls meet, decided again"""
    centers = result.centers
    if len(centers) < 2:
        return []
    rho = result.shrunk_delta[result.selected]
    reach = np.sqrt(rho ** 2 + rho)
    tree = cKDTree(_real_view(centers))
    bad = []
    for a, b in sorted(tree.query_pairs(2 * float(reach.max()))):
        if np.linalg.norm(centers[a] - centers[b]) >= reach[a] + reach[b]:
            continue
        if boxes_intersect(CarlesonBox(centers[a], rho[a]), CarlesonBox(centers[b], rho[b]), tol):
            bad.append((result.selected[a], result.selected[b]))
    return bad


def greedy_cover(samples: np.ndarray, cover: CoverConfig, tol: Optional[float] = None) -> CoverResult:
    """
    Pick the remaining sample with the largest shrunk scale shrink * delta(z), discard every
    sample whose shrunk box meets it, repeat until nothing is left

    Coverage is then checked sample by sample against the undilated box Q_{delta(z_s)}(z_s)
    of the center that discarded it.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=complex))
    if len(samples) == 0:
        raise ValueError("greedy cover needs at least one sample")
    moduli = np.linalg.norm(samples, axis=1)
    if np.any(moduli <= cover.r) or np.any(moduli >= 1):
        raise ValueError(f"all samples must lie in the shell {cover.r} < |z| < 1")

    delta = delta_of(samples, cover.c)
    rho = cover.shrink * delta
    reach = np.sqrt(rho ** 2 + rho)
    order = np.argsort(-rho, kind="stable")
    tree = cKDTree(_real_view(samples))

    alive = np.ones(len(samples), dtype=bool)
    discarded_by = np.full(len(samples), -1, dtype=int)
    selected: List[int] = []
    undecided = 0
    for idx in order:
        if not alive[idx]:
            continue
        alive[idx] = False
        selected.append(int(idx))
        discarded_by[idx] = idx
        # remaining samples have rho <= rho[idx], hence reach <= reach[idx]
        candidates = [j for j in tree.query_ball_point(_real_view(samples[idx][None, :])[0], 2 * reach[idx]) if alive[j]]
        if not candidates:
            continue
        chosen = CarlesonBox(samples[idx], rho[idx])
        for j in candidates:
            outcome = intersection_test(chosen, CarlesonBox(samples[j], rho[j]), tol)
            undecided += not outcome.decided
            if outcome.intersect:
                alive[j] = False
                discarded_by[j] = idx

    owners = samples[discarded_by]
    owner_moduli = moduli[discarded_by]
    directions = owners / owner_moduli[:, None]
    u = np.sum(samples * np.conj(directions), axis=1)
    w = samples - u[:, None] * directions
    owner_delta = delta[discarded_by]
    covered = (np.abs(u - owner_moduli) < owner_delta) & (np.sum(np.abs(w) ** 2, axis=1) < owner_delta)
    if not covered.all():
        # fall back to every selected center for the stragglers
        centers = samples[selected]
        for j in np.flatnonzero(~covered):
            covered[j] = any(
                box_membership(samples[j], CarlesonBox(center, d)) for center, d in zip(centers, delta[selected])
            )

    result = CoverResult(
        samples=samples,
        selected=selected,
        shrunk_delta=rho,
        delta=delta,
        discarded_by=discarded_by,
        covered=covered,
        undecided=undecided,
    )
    result.intersecting_pairs = _disjointness_audit(result, tol)
    logger.info(
        "🧱 Greedy cover built",
        samples=len(samples),
        centers=len(selected),
        covered=int(covered.sum()),
        undecided=undecided,
    )
    return result


# ==================== OVERLAP ====================


class OverlapStats(BaseModel):
    probes: int
    boxes: int
    dilation: float
    max_multiplicity: int
    histogram: Dict[int, int]
    bound: str


def _membership_matrix(probes: np.ndarray, centers: np.ndarray, deltas: np.ndarray) -> np.ndarray:
    moduli = np.linalg.norm(centers, axis=1)
    directions = centers / moduli[:, None]
    u = probes @ np.conj(directions).T
    perp_sq = np.sum(np.abs(probes) ** 2, axis=1)[:, None] - np.abs(u) ** 2
    return (np.abs(u - moduli[None, :]) < deltas[None, :]) & (perp_sq < deltas[None, :])


def overlap_histogram(
    centers: np.ndarray,
    deltas: np.ndarray,
    dilation: float,
    probes: np.ndarray,
    chunk_size: int = 2_000_000,
) -> OverlapStats:
    """
    Count, for each probe point, the boxes Q_{dilation * delta_s}(z_s) containing it

    Small boxes go through a KD-tree over the probes; large ones are tested densely in
    chunks.
    """
    centers = np.atleast_2d(np.asarray(centers, dtype=complex))
    probes = np.atleast_2d(np.asarray(probes, dtype=complex))
    scaled = dilation * np.asarray(deltas, dtype=float)
    reach = np.sqrt(scaled ** 2 + scaled)
    counts = np.zeros(len(probes), dtype=np.int64)

    if len(centers) and reach.max() < 0.25:
        tree = cKDTree(_real_view(probes))
        for center, d, radius in zip(centers, scaled, reach):
            near = tree.query_ball_point(_real_view(center[None, :])[0], radius)
            if near:
                near = np.asarray(near)
                counts[near] += CarlesonBox(center, d).contains(probes[near])
    elif len(centers):
        rows = max(1, chunk_size // len(centers))
        for start in range(0, len(probes), rows):
            block = probes[start:start + rows]
            counts[start:start + rows] = _membership_matrix(block, centers, scaled).sum(axis=1)

    values, freq = np.unique(counts, return_counts=True)
    n = probes.shape[1]
    return OverlapStats(
        probes=len(probes),
        boxes=len(centers),
        dilation=dilation,
        max_multiplicity=int(counts.max()) if len(counts) else 0,
        histogram={int(v): int(f) for v, f in zip(values, freq)},
        bound=str(overlap_bound(n)),
    )


def cover_overlap(result: CoverResult, cover: CoverConfig, probes: np.ndarray) -> OverlapStats:
    """Overlap of the dilate * delta(z_s) boxes of a finished cover"""
    stats = overlap_histogram(result.centers, result.delta[result.selected], cover.dilate, probes)
    result.overlap = stats
    return stats


def export_cover(result: CoverResult, path: Union[str, Path], cover: Optional[CoverConfig] = None) -> Path:
    """CSV of centers (selection order, coordinates, deltas) plus a JSON diagnostics sidecar"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    centers = result.centers
    columns = {"order": np.arange(len(result.selected)), "sample": result.selected}
    for i in range(centers.shape[1] if len(centers) else 0):
        columns[f"z{i + 1}_re"] = centers[:, i].real
        columns[f"z{i + 1}_im"] = centers[:, i].imag
    columns["delta"] = result.delta[result.selected]
    columns["shrunk_delta"] = result.shrunk_delta[result.selected]
    pd.DataFrame(columns).to_csv(path, index=False, float_format="%.17g")

    diagnostics = {
        "samples": int(len(result.samples)),
        "centers": len(result.selected),
        "all_covered": result.all_covered,
        "uncovered": [int(j) for j in np.flatnonzero(~result.covered)],
        "disjoint": result.disjoint,
        "intersecting_pairs": [list(pair) for pair in result.intersecting_pairs],
        "undecided": result.undecided,
        "monotone": result.monotone,
        "overlap": result.overlap.model_dump() if result.overlap else None,
        "config": cover.model_dump() if cover else None,
    }
    with path.with_suffix(".json").open("w", encoding="utf-8") as handle:
        json.dump(diagnostics, handle, sort_keys=True, indent=2)
    return path
