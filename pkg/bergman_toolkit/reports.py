"""
Bergman Toolkit - Reports
Structured verification results, JSON-lines output and per-claim summary CSV
"""

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union

import numpy as np
import pandas as pd
import structlog
from pydantic import BaseModel, Field

from bergman_toolkit.config import config
from bergman_toolkit.moments import PiMultiple
from bergman_toolkit.polycore import EXACT, FLOAT, ExactComplex, HoloPoly, MultiIndex

logger = structlog.get_logger(__name__)


def exact_json(value: Any) -> Any:
    """Render toolkit values as JSON-safe structures, keeping rationals exact"""
    if isinstance(value, PiMultiple):
        return value.to_json()
    if isinstance(value, Fraction):
        return {"rational": f"{value.numerator}/{value.denominator}", "pi_power": 0, "float": float(value)}
    if isinstance(value, ExactComplex):
        return {"re": exact_json(value.re), "im": exact_json(value.im)}
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, MultiIndex):
        return list(value.exponents)
    if isinstance(value, HoloPoly):
        return value.to_literal()
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.ndarray):
        return [exact_json(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): exact_json(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [exact_json(v) for v in value]
    return value


def as_float(value: Any) -> Optional[float]:
    if value is None:
        return None
    if isinstance(value, (PiMultiple, Fraction, int, float, np.floating, np.integer)):
        return float(value)
    return None


class VerificationReport(BaseModel):
    """Outcome of one identity, inequality or covering check"""

    claim_id: str
    parameters: Dict[str, Any] = Field(default_factory=dict)
    lhs: Any = None
    rhs: Any = None
    ratio: Any = None
    lhs_float: Optional[float] = None
    rhs_float: Optional[float] = None
    ratio_float: Optional[float] = None
    constant: Optional[float] = None
    passed: bool
    seed: Optional[int] = None
    scalar_kind: str = EXACT
    details: Dict[str, Any] = Field(default_factory=dict)
    schema_version: str = Field(default_factory=lambda: config.REPORT_SCHEMA_VERSION)

    @classmethod
    def build(
        cls,
        claim_id: str,
        lhs: Any,
        rhs: Any,
        passed: bool,
        parameters: Optional[Dict] = None,
        ratio: Any = None,
        constant: Optional[float] = None,
        seed: Optional[int] = None,
        scalar_kind: str = EXACT,
        details: Optional[Dict] = None,
    ) -> "VerificationReport":
        """Normalize exact values into their JSON form and fill the float renderings"""
        return cls(
            claim_id=claim_id,
            parameters=exact_json(parameters or {}),
            lhs=exact_json(lhs),
            rhs=exact_json(rhs),
            ratio=exact_json(ratio),
            lhs_float=as_float(lhs),
            rhs_float=as_float(rhs),
            ratio_float=as_float(ratio),
            constant=constant,
            passed=bool(passed),
            seed=seed,
            scalar_kind=scalar_kind,
            details=exact_json(details or {}),
        )

    def to_json_line(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))


def holds(lhs: Any, rhs: Any, exact: bool, rtol: Optional[float] = None) -> bool:
    """lhs <= rhs exactly, or lhs <= rhs (1 + rtol) for float comparisons"""
    if exact:
        return lhs <= rhs
    rtol = config.FLOAT_RTOL if rtol is None else rtol
    lhs_f, rhs_f = float(lhs), float(rhs)
    return lhs_f <= rhs_f * (1.0 + rtol) + (rtol if rhs_f == 0 else 0.0)


def kind_of(*values: Any) -> str:
    for value in values:
        if isinstance(value, PiMultiple) and not value.is_exact:
            return FLOAT
        if isinstance(value, float):
            return FLOAT
    return EXACT


def write_jsonl(records: Iterable[Union[VerificationReport, Dict]], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        for record in records:
            if isinstance(record, VerificationReport):
                handle.write(record.to_json_line())
            else:
                handle.write(json.dumps(exact_json(record), sort_keys=True, separators=(",", ":")))
            handle.write("\n")
    return path


def read_jsonl(path: Union[str, Path]) -> List[Dict]:
    with Path(path).open(encoding="utf-8") as handle:
        return [json.loads(line) for line in handle if line.strip()]


def summarize(records: Iterable[Dict]) -> pd.DataFrame:
    """Pass rate and extremal ratios per claim id"""
    rows = [r for r in records if "claim_id" in r]
    columns = ["claim_id", "trials", "passed", "pass_rate", "max_ratio", "min_ratio", "max_constant"]
    if not rows:
        return pd.DataFrame(columns=columns)
    frame = pd.DataFrame(
        {
            "claim_id": [r["claim_id"] for r in rows],
            "passed": [bool(r.get("passed")) for r in rows],
            "ratio": [r.get("ratio_float") for r in rows],
            "constant": [r.get("constant") for r in rows],
        }
    )
    frame["ratio"] = pd.to_numeric(frame["ratio"], errors="coerce")
    frame["constant"] = pd.to_numeric(frame["constant"], errors="coerce")
    grouped = frame.groupby("claim_id", sort=True)
    summary = pd.DataFrame(
        {
            "trials": grouped.size(),
            "passed": grouped["passed"].sum().astype(int),
            "max_ratio": grouped["ratio"].max(),
            "min_ratio": grouped["ratio"].min(),
            "max_constant": grouped["constant"].max(),
        }
    ).reset_index()
    summary["pass_rate"] = summary["passed"] / summary["trials"]
    return summary[columns]


def write_summary(records: Iterable[Dict], path: Union[str, Path]) -> pd.DataFrame:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    summary = summarize(records)
    summary.to_csv(path, index=False, float_format="%.17g")
    logger.info("📊 Summary written", path=str(path), claims=len(summary))
    return summary
