"""
Bergman Toolkit - Spectra Module
Singular values, Schatten norms and truncation-stability reports for operator matrices
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
import structlog
from pydantic import BaseModel
from scipy import linalg

from bergman_toolkit.exceptions import NonFiniteMatrixError
from bergman_toolkit.operators import OperatorMatrix

logger = structlog.get_logger(__name__)


@dataclass
class SingularSpectrum:
    """Descending singular values with a contamination mask for the truncation band"""

    values: np.ndarray
    source: str = ""
    contaminated: np.ndarray = None
    metadata: Dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.contaminated is None:
            self.contaminated = np.zeros(len(self.values), dtype=bool)
        self.contaminated = np.asarray(self.contaminated, dtype=bool)
        if np.any(self.values < 0) or np.any(np.diff(self.values) > 0):
            raise ValueError("singular values must be non-negative and sorted descending")

    @property
    def truncation_band(self) -> np.ndarray:
        """Indices flagged as truncation-contaminated"""
        return np.flatnonzero(self.contaminated)

    @property
    def interior(self) -> np.ndarray:
        return self.values[~self.contaminated]

    def __len__(self) -> int:
        return len(self.values)


def singular_values(m: Union[OperatorMatrix, np.ndarray], source: Optional[str] = None) -> SingularSpectrum:
    """
    Singular values by dense SVD

    A value is flagged contaminated when its left or right singular vector carries more than
    half of its mass on the matrix's band indices.
    """
    if isinstance(m, OperatorMatrix):
        entries = m.as_complex()
        band = list(m.band_indices)
        source = source or str(m.metadata.get("operator", ""))
        metadata = {k: v for k, v in m.metadata.items() if k != "band_indices"}
    else:
        entries = np.asarray(m, dtype=complex)
        band = []
        metadata = {}
        if not np.all(np.isfinite(entries)):
            raise NonFiniteMatrixError("matrix has non-finite entries")

    if entries.size == 0:
        return SingularSpectrum(np.zeros(0), source or "", None, metadata)

    if not band:
        values = linalg.svdvals(entries)
        return SingularSpectrum(values, source or "", None, metadata)

    left, values, right_h = linalg.svd(entries)
    k = len(values)
    left_mass = np.sum(np.abs(left[band, :k]) ** 2, axis=0)
    right_mass = np.sum(np.abs(right_h[:k, band]) ** 2, axis=1)
    contaminated = np.maximum(left_mass, right_mass) > 0.5
    return SingularSpectrum(values, source or "", contaminated, metadata)


def schatten_norm(s: SingularSpectrum, q: float, include_band: bool = False) -> float:
    """(sum sigma_k^q)^(1/q); q = inf gives the largest value"""
    if q <= 0:
        raise ValueError(f"Schatten exponent must be positive, got {q}")
    values = s.values if include_band else s.interior
    if len(values) == 0:
        return 0.0
    if np.isinf(q):
        return float(values.max())
    top = values.max()
    if top == 0:
        return 0.0
    return float(top * np.sum((values / top) ** q) ** (1.0 / q))


def default_schatten_grid(n: int) -> List[float]:
    return [float(n), n + 0.5, float(n + 1), float(2 * n)]


class DecayReport(BaseModel):
    """Stabilization of leading singular values over increasing truncation"""

    truncations: List[int]
    top_k: int
    relative_changes: List[List[float]]
    schatten: Dict[str, List[float]]
    non_stabilizing: List[int]
    last_step_growth: Dict[str, float]
    bounded: bool
    threshold: float


def decay_report(
    spectra: Sequence[SingularSpectrum],
    truncations: Optional[Sequence[int]] = None,
    q_list: Optional[Sequence[float]] = None,
    top_k: int = 10,
    threshold: float = 1e-2,
    growth_limit: float = 0.05,
) -> DecayReport:
    """
    Compare interior spectra across increasing truncation degrees

    Args:
        spectra: At least two spectra, ordered by increasing truncation
        truncations: Labels for the spectra (defaults to 0..len-1)
        q_list: Schatten exponents to tabulate
        top_k: Number of leading interior values compared step to step
        threshold: Relative change at the last step above which an index is non-stabilizing
        growth_limit: Allowed relative growth of each Schatten norm at the last step
    """
    if len(spectra) < 2:
        raise ValueError("decay report needs at least two spectra")
    truncations = list(truncations) if truncations is not None else list(range(len(spectra)))
    q_list = list(q_list) if q_list is not None else [1.0, 2.0]

    changes: List[List[float]] = []
    for prev, curr in zip(spectra[:-1], spectra[1:]):
        a, b = prev.interior[:top_k], curr.interior[:top_k]
        k = min(len(a), len(b))
        scale = np.maximum(np.abs(a[:k]), np.finfo(float).tiny)
        step = np.where(a[:k] == b[:k], 0.0, np.abs(b[:k] - a[:k]) / scale)
        changes.append([float(v) for v in step])

    schatten = {f"{q:g}": [schatten_norm(s, q) for s in spectra] for q in q_list}
    growth = {}
    for key, seq in schatten.items():
        prev, last = seq[-2], seq[-1]
        growth[key] = 0.0 if prev == 0 else (last - prev) / prev

    non_stabilizing = [k for k, v in enumerate(changes[-1]) if v > threshold]
    bounded = all(g <= growth_limit for g in growth.values())
    if non_stabilizing:
        logger.warning("⚠️ Leading singular values still moving", indices=non_stabilizing)
    return DecayReport(
        truncations=truncations,
        top_k=top_k,
        relative_changes=changes,
        schatten=schatten,
        non_stabilizing=non_stabilizing,
        last_step_growth=growth,
        bounded=bounded,
        threshold=threshold,
    )


def export_spectrum(s: SingularSpectrum, path: Union[str, Path]) -> Path:
    """CSV with columns index, value, contaminated"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(
        {"index": np.arange(len(s.values)), "value": s.values, "contaminated": s.contaminated}
    )
    frame.to_csv(path, index=False, float_format="%.17g")
    return path
