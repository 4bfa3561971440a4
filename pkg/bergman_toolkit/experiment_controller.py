"""
Bergman Toolkit - Experiment Controller
Orchestrates all modules (polynomials, inequalities, operator spectra, covering) into seeded,
reproducible batch runs
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, Iterator, List, Literal, Optional, Tuple, Union

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field, model_validator

from bergman_toolkit import covering, inequalities
from bergman_toolkit.config import config
from bergman_toolkit.exceptions import PolynomialParseError, SubmoduleDegeneracyError
from bergman_toolkit.moments import FULL_BALL, Region
from bergman_toolkit.operators import (
    SubmodulePlan,
    compressed_commutator,
    cross_corner,
    export_matrix,
    kernel_orthogonality,
    sample_off_zero_set,
    sample_zero_set,
)
from bergman_toolkit.polycore import HoloPoly, MultiIndex, multiindex_enumerate, parse_polynomial
from bergman_toolkit.reports import VerificationReport, write_jsonl, write_summary
from bergman_toolkit.sampling import RandomPolyModel, generate_polynomial, trial_seeds
from bergman_toolkit.spectra import (
    SingularSpectrum,
    decay_report,
    default_schatten_grid,
    export_spectrum,
    schatten_norm,
    singular_values,
)

logger = structlog.get_logger(__name__)

VERIFY_CLAIMS = (
    "prop-2.1",
    "lemma-2.3",
    "prop-2.2p",
    "prop-2.2",
    "prop-2.4",
    "lemma-3.1",
    "lemma-3.2",
    "lemma-3.6",
    "lemma-4.1",
    "identity-2.3",
    "slice-formula",
    "monte-carlo",
)

Record = Dict[str, Any]


class ExperimentConfig(BaseModel):
    """Everything one run needs; stored next to its reports so a rerun is one file away"""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["verify", "commutator", "cover", "constants"]
    n: int = Field(default=2, ge=1)
    seed: Optional[int] = None

    # polynomials: literals plus random_count draws from the random model
    polynomials: List[str] = Field(default_factory=list)
    degree: int = Field(default=2, ge=0)
    sparsity: Literal["dense", "sparse"] = "dense"
    random_count: int = Field(default=0, ge=0)

    # verify
    claims: List[str] = Field(default_factory=lambda: list(VERIFY_CLAIMS))
    max_degree: int = Field(default=4, ge=0)
    k_max: int = Field(default=2, ge=0)
    l_max: int = Field(default=1, ge=0)
    t_max: int = Field(default=3, ge=0)
    trials: int = Field(default=20, ge=1)
    cap: Optional[float] = Field(default=None, gt=1.0)

    # commutator
    B_list: List[int] = Field(default_factory=lambda: [6, 8, 10])
    q_list: Optional[List[float]] = None
    top_k: int = Field(default=10, ge=1)
    kernel_points: int = Field(default=20, ge=0)
    export_matrices: bool = False

    # cover
    r: float = 0.5
    c: float = 1e-3
    samples: int = Field(default=1000, ge=1)
    probes: int = Field(default=1000, ge=0)
    pairs: int = Field(default=1000, ge=0)
    probe_pairs: int = Field(default=100, ge=0)

    # constants
    require_stability: bool = True
    stability_tolerance: float = Field(default=0.1, gt=0.0)

    output_dir: str = "results"
    workers: int = Field(default_factory=lambda: config.DEFAULT_WORKERS, ge=1)

    @model_validator(mode="after")
    def _normalize(self) -> "ExperimentConfig":
        if self.seed is None:
            self.seed = config.DEFAULT_SEED
        if self.q_list is None:
            self.q_list = default_schatten_grid(self.n)
        if any(q <= 0 for q in self.q_list):
            raise ValueError("q_list: Schatten exponents must be positive")
        if any(b < 0 for b in self.B_list):
            raise ValueError("B_list: truncation degrees must be >= 0")
        unknown = sorted(set(self.claims) - set(VERIFY_CLAIMS))
        if unknown:
            raise ValueError(f"claims: unknown claim ids {unknown}")
        for idx, literal in enumerate(self.polynomials):
            try:
                poly = parse_polynomial(literal, self.n)
            except PolynomialParseError as e:
                raise ValueError(f"polynomials[{idx}]: {e}") from e
            if poly.is_zero():
                raise ValueError(f"polynomials[{idx}]: the zero polynomial is not allowed")
        if self.kind == "cover":
            covering.CoverConfig(r=self.r, c=self.c, samples=self.samples, seed=self.seed)
        return self

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "ExperimentConfig":
        return cls.model_validate_json(Path(path).read_text(encoding="utf-8"))

    def to_file(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.model_dump_json(indent=2), encoding="utf-8")
        return path

    @property
    def cover(self) -> covering.CoverConfig:
        return covering.CoverConfig(r=self.r, c=self.c, samples=self.samples, seed=self.seed)


@dataclass
class Trial:
    """One independent unit of work; payloads hold only plain data so they pickle cleanly"""

    trial_id: int
    task: str
    payload: Dict = field(default_factory=dict)


# ==================== TASKS ====================


def _poly(payload: Dict, key: str) -> HoloPoly:
    return parse_polynomial(payload[key], payload["n"])


def _dump(reports: List[VerificationReport]) -> List[Record]:
    return [r.model_dump(mode="json") for r in reports]


def _task_prop21(payload: Dict) -> List[Record]:
    alpha = MultiIndex(tuple(payload["alpha"]))
    reports = [
        inequalities.verify_prop21(alpha, beta, j, payload["K"])
        for beta in multiindex_enumerate(payload["n"], payload["max_degree"])
        for j in range(1, payload["n"] + 1)
    ]
    return _dump(reports)


def _task_lemma23(payload: Dict) -> List[Record]:
    f = HoloPoly.monomial(tuple(payload["alpha"]))
    reports = []
    for k in range(payload["k_max"] + 1):
        for l in range(f.degree + 1):
            reports.extend(inequalities.verify_lemma23(f, k, l))
    return _dump(reports)


def _task_prop22(payload: Dict) -> List[Record]:
    verify = inequalities.verify_prop22 if payload["norm_form"] else inequalities.verify_prop22prime
    p, f = _poly(payload, "p"), _poly(payload, "f")
    n, cap = payload["n"], payload["cap"]
    reports = []
    for k in range(payload["k_max"] + 1):
        for l in range(min(k, payload["l_max"]) + 1):
            reports.append(verify(p, f, k, l, 1, min(2, n), 1, cap))
        if n > 1:
            for i, j in ((1, 2), (2, 1)):
                reports.append(verify(p, f, k, 0, i, j, 2, cap))
        for j in range(1, n + 1):
            reports.append(verify(p, f, k, 0, 1, j, 3, cap))
    return _dump(reports)


def _task_prop24(payload: Dict) -> List[Record]:
    p, f = _poly(payload, "p"), _poly(payload, "f")
    constant = payload["constant"]
    reports = [inequalities.verify_prop24(p, f, k, 0, 1, constant) for k in range(payload["k_max"] + 1)]
    reports.append(inequalities.verify_prop24_series(p, f, 0, payload["k_max"], constant))
    return _dump(reports)


def _task_lemma31(payload: Dict) -> List[Record]:
    f = _poly(payload, "f")
    return _dump([inequalities.verify_lemma31(f, t) for t in range(payload["t_max"] + 1)])


def _task_lemma32(payload: Dict) -> List[Record]:
    rng = np.random.default_rng(payload["seed"])
    m = int(rng.integers(1, payload["m_max"] + 1))
    seeds = rng.integers(0, 2**32 - 1, size=2)
    p = generate_polynomial(RandomPolyModel(n=1, degree=m, sparsity="sparse"), int(seeds[0]))
    f_degree = int(rng.integers(0, 9))
    f = generate_polynomial(RandomPolyModel(n=1, degree=f_degree, sparsity="sparse"), int(seeds[1]))
    reports = []
    for r in payload["radii"]:
        for l in range(1, m + 1):
            report = inequalities.verify_lemma32(p, f, l, r, m=m)
            report.seed = payload["seed"]
            reports.append(report)
    return _dump(reports)


def _task_lemma36(payload: Dict) -> List[Record]:
    return _dump([inequalities.verify_lemma36(l) for l in range(1, payload["l_max"] + 1)])


def _task_lemma41(payload: Dict) -> List[Record]:
    p, f = _poly(payload, "p"), _poly(payload, "f")
    return _dump([inequalities.verify_lemma41(p, f, Fraction(r)) for r in payload["radii"]])


def _task_identity23(payload: Dict) -> List[Record]:
    p = _poly(payload, "p")
    return _dump(
        [inequalities.verify_identity23(p, j, seed=payload["seed"]) for j in range(1, payload["n"] + 1)]
    )


def _task_slice(payload: Dict) -> List[Record]:
    alpha = MultiIndex(tuple(payload["alpha"]))
    reports = [
        inequalities.verify_slice_formula(alpha, t, region)
        for t in range(payload["t_max"] + 1)
        for region in (FULL_BALL, Region.shell(Fraction(1, 2)))
    ]
    return _dump(reports)


def _task_monte_carlo(payload: Dict) -> List[Record]:
    alpha = MultiIndex(tuple(payload["alpha"]))
    return _dump([inequalities.verify_monte_carlo(alpha, payload["t"], FULL_BALL, payload["samples"], payload["seed"])])


def _task_constants(payload: Dict) -> List[Record]:
    estimate, reports = inequalities.estimate_Cnm(
        payload["n"], payload["m"], payload["trials"], payload["k_max"], payload["seed"]
    )
    summary = VerificationReport.build(
        "constant-estimate",
        lhs=estimate.constant,
        rhs=payload["cap"],
        passed=estimate.failures == 0 and np.isfinite(estimate.constant),
        parameters={"n": estimate.n, "m": estimate.m, "trials": estimate.trials, "kmax": estimate.kmax, "batch": payload["batch"]},
        constant=estimate.constant,
        seed=payload["seed"],
        scalar_kind="float",
        details=estimate.model_dump(),
    )
    return _dump([summary] + reports)


def _task_spectrum(payload: Dict) -> List[Record]:
    p = _poly(payload, "p")
    n, B = payload["n"], payload["B"]
    plan = SubmodulePlan(p, B)
    records = []
    for i, j in payload["pairs"]:
        matrix = compressed_commutator(plan, i, j)
        spectrum = singular_values(matrix)
        stem = Path(payload["output_dir"]) / "spectra" / f"p{payload['p_index']}_B{B}_{i}{j}"
        export_spectrum(spectrum, stem.with_suffix(".csv"))
        if payload["export_matrices"]:
            export_matrix(matrix, stem.with_suffix(".bin"))
        schatten = {f"{q:g}": schatten_norm(spectrum, q) for q in payload["q_list"]}
        corner = singular_values(cross_corner(plan, j))
        corner_schatten = {f"{q:g}": schatten_norm(corner, q, include_band=True) for q in (2 * n, 2 * n + 1)}

        passed = bool(np.all(np.isfinite(spectrum.values)))
        details = {
            "values": spectrum.values.tolist(),
            "contaminated": spectrum.contaminated.tolist(),
            "schatten": schatten,
            "cross_corner_schatten": corner_schatten,
            "dimension": len(spectrum),
        }
        if n == 1 and p.degree == 0:
            # p = const: interior values are 1/((k+1)(k+2)), k < B
            oracle = np.sort(np.array([1.0 / ((k + 1) * (k + 2)) for k in range(B)]))[::-1]
            interior = spectrum.interior
            error = float(np.max(np.abs(interior - oracle))) if len(interior) == len(oracle) else float("inf")
            details["oracle_error"] = error
            passed = passed and error <= 1e-12
        records.append(
            VerificationReport.build(
                "commutator-spectrum",
                lhs=schatten_norm(spectrum, float(n + 1)),
                rhs=None,
                passed=passed,
                parameters={"n": n, "p": p, "p_index": payload["p_index"], "B": B, "i": i, "j": j},
                scalar_kind="float",
                details=details,
            )
        )
    return _dump(records)


def _task_kernel(payload: Dict) -> List[Record]:
    p = _poly(payload, "p")
    plan = SubmodulePlan(p, payload["B"])
    count, seed = payload["count"], payload["seed"]
    parameters = {"n": payload["n"], "p": p, "B": payload["B"], "count": count}
    if p.degree == 0:
        return []
    zeros = [kernel_orthogonality(w, plan) for w in sample_zero_set(p, count, seed)]
    off = [kernel_orthogonality(w, plan) for w in sample_off_zero_set(p, count, seed + 1)]
    reports = [
        VerificationReport.build(
            "kernel-orthogonality",
            lhs=max(zeros) if zeros else 0.0,
            rhs=1e-10,
            passed=all(v < 1e-10 for v in zeros),
            parameters=dict(parameters, side="zero-set"),
            seed=seed,
            scalar_kind="float",
        ),
        VerificationReport.build(
            "kernel-separation",
            lhs=min(off) if off else 1.0,
            rhs=1e-6,
            passed=all(v > 1e-6 for v in off),
            parameters=dict(parameters, side="off-zero-set"),
            seed=seed + 1,
            scalar_kind="float",
        ),
    ]
    return _dump(reports)


def _task_lemma34(payload: Dict) -> List[Record]:
    cover = covering.CoverConfig(**payload["cover"])
    pairs = covering.sample_pairs(payload["n"], cover, payload["count"], payload["seed"])
    reports = []
    for idx, (z, zprime) in enumerate(pairs):
        probes = payload["probes"] if payload["first_index"] + idx < payload["probe_pairs"] else 0
        reports.append(covering.check_lemma34(z, zprime, cover, probes=probes, seed=payload["seed"] + idx))
    return _dump(reports)


def _task_disk_intersection(payload: Dict) -> List[Record]:
    rng = np.random.default_rng(payload["seed"])
    count = payload["count"]
    centers = (0.3 + 0.6 * rng.random((count, 2))) * np.exp(2j * np.pi * rng.random((count, 2)))
    deltas = 0.2 * rng.random((count, 2)) + 1e-3
    disagreements = []
    for k in range(count):
        b1 = covering.CarlesonBox(centers[k, :1], deltas[k, 0])
        b2 = covering.CarlesonBox(centers[k, 1:], deltas[k, 1])
        gap = abs(centers[k, 0] - centers[k, 1]) - deltas[k].sum()
        if abs(gap) < 1e-6:
            continue
        if covering.boxes_intersect(b1, b2) != (gap < 0):
            disagreements.append(k)
    report = VerificationReport.build(
        "box-intersection-disk",
        lhs=len(disagreements),
        rhs=0,
        passed=not disagreements,
        parameters={"pairs": count},
        seed=payload["seed"],
        scalar_kind="float",
        details={"disagreements": disagreements},
    )
    return _dump([report])


def _task_cover(payload: Dict) -> List[Record]:
    cover = covering.CoverConfig(**payload["cover"])
    n = payload["n"]
    samples = covering.sample_shell(n, cover.r, cover.samples, cover.seed)
    result = covering.greedy_cover(samples, cover)
    probes = covering.sample_shell(n, cover.r, payload["probes"], cover.seed + 1) if payload["probes"] else samples
    stats = covering.cover_overlap(result, cover, probes)
    covering.export_cover(result, Path(payload["output_dir"]) / "cover.csv", cover)
    within_bound = stats.max_multiplicity <= covering.overlap_bound(n)
    report = VerificationReport.build(
        "prop-3.5",
        lhs=stats.max_multiplicity,
        rhs=None,
        passed=result.disjoint and result.all_covered and result.monotone and within_bound,
        parameters={"n": n, "r": cover.r, "c": cover.c, "samples": cover.samples, "probes": stats.probes},
        seed=cover.seed,
        scalar_kind="float",
        details={
            "centers": len(result.selected),
            "disjoint": result.disjoint,
            "all_covered": result.all_covered,
            "monotone": result.monotone,
            "undecided": result.undecided,
            "overlap_histogram": {str(k): v for k, v in stats.histogram.items()},
            "overlap_bound": stats.bound,
        },
    )
    return _dump([report])


TASKS: Dict[str, Callable[[Dict], List[Record]]] = {
    "prop-2.1": _task_prop21,
    "lemma-2.3": _task_lemma23,
    "prop-2.2p": _task_prop22,
    "prop-2.2": _task_prop22,
    "prop-2.4": _task_prop24,
    "lemma-3.1": _task_lemma31,
    "lemma-3.2": _task_lemma32,
    "lemma-3.6": _task_lemma36,
    "lemma-4.1": _task_lemma41,
    "identity-2.3": _task_identity23,
    "slice-formula": _task_slice,
    "monte-carlo": _task_monte_carlo,
    "constants": _task_constants,
    "spectrum": _task_spectrum,
    "kernel": _task_kernel,
    "lemma-3.4": _task_lemma34,
    "disk-intersection": _task_disk_intersection,
    "cover": _task_cover,
}


def run_trial(trial: Trial) -> List[Record]:
    """Run one trial; a failure becomes an error record instead of aborting the batch"""
    try:
        records = TASKS[trial.task](trial.payload)
    except SubmoduleDegeneracyError as e:
        logger.error("❌ Degenerate submodule", task=trial.task, trial_id=trial.trial_id, error=str(e))
        return [{"trial_id": trial.trial_id, "task": trial.task, "error": str(e), "degenerate": True, "passed": False}]
    except Exception as e:
        logger.error("❌ Trial failed", task=trial.task, trial_id=trial.trial_id, error=str(e))
        return [{"trial_id": trial.trial_id, "task": trial.task, "error": str(e), "passed": False}]
    for record in records:
        record["trial_id"] = trial.trial_id
    return records


# ==================== RUNNER ====================


class ExperimentRunner:
    """Plans trials from a config, executes them (serially or on a process pool) and writes reports"""

    def __init__(self, experiment: ExperimentConfig):
        self.config = experiment
        self.output_dir = Path(experiment.output_dir)
        logger.info("🚀 Experiment runner ready", kind=experiment.kind, n=experiment.n, seed=experiment.seed)

    # ----- planning -----

    def polynomial_literals(self) -> List[str]:
        cfg = self.config
        literals = list(cfg.polynomials)
        model = RandomPolyModel(n=cfg.n, degree=cfg.degree, sparsity=cfg.sparsity)
        count = cfg.random_count if (cfg.random_count or literals) else 1
        for seed in trial_seeds(cfg.seed, count):
            literals.append(generate_polynomial(model, seed).to_literal())
        return literals

    def plan(self) -> List[Trial]:
        planner = {
            "verify": self._plan_verify,
            "commutator": self._plan_commutator,
            "cover": self._plan_cover,
            "constants": self._plan_constants,
        }[self.config.kind]
        specs = planner()
        return [Trial(trial_id, task, payload) for trial_id, (task, payload) in enumerate(specs)]

    def _plan_verify(self) -> List[Tuple[str, Dict]]:
        cfg = self.config
        n = cfg.n
        claims = set(cfg.claims)
        cap = cfg.cap if cfg.cap is not None else config.CNM_CAP
        literals = self.polynomial_literals()
        monomials = [list(a.exponents) for a in multiindex_enumerate(n, cfg.max_degree)]
        seeds = iter(trial_seeds(cfg.seed, 4 * cfg.trials + 2 * len(literals) + len(monomials)))
        specs: List[Tuple[str, Dict]] = []

        if "prop-2.1" in claims:
            specs += [("prop-2.1", {"n": n, "alpha": a, "max_degree": cfg.max_degree, "K": 8}) for a in monomials]
        if "lemma-2.3" in claims:
            specs += [("lemma-2.3", {"n": n, "alpha": a, "k_max": cfg.k_max}) for a in monomials]
        partners = ["1"] + literals[:2]
        for claim in ("prop-2.2p", "prop-2.2"):
            if claim in claims:
                specs += [
                    (claim, {"n": n, "p": p, "f": f, "k_max": cfg.k_max, "l_max": cfg.l_max, "cap": cap,
                             "norm_form": claim == "prop-2.2"})
                    for p in literals
                    for f in partners
                ]
        if "prop-2.4" in claims:
            constants = self._estimated_constants(literals, seeds)
            for p in literals:
                m = parse_polynomial(p, n).degree
                constant, constant_seed = constants[m]
                specs += [
                    ("prop-2.4", {"n": n, "p": p, "f": f, "k_max": cfg.k_max, "constant": constant,
                                  "m": m, "constant_seed": constant_seed})
                    for f in partners
                ]
        if "lemma-3.1" in claims:
            specs += [
                ("lemma-3.1", {"n": n, "f": HoloPoly.monomial(tuple(a)).to_literal(), "t_max": cfg.t_max})
                for a in monomials
            ]
            specs += [("lemma-3.1", {"n": n, "f": p, "t_max": cfg.t_max}) for p in literals]
        if "lemma-3.2" in claims:
            specs += [
                ("lemma-3.2", {"seed": next(seeds), "m_max": min(max(cfg.degree, 1), 4), "radii": [0.5, 1.0]})
                for _ in range(cfg.trials)
            ]
        if "lemma-3.6" in claims:
            specs.append(("lemma-3.6", {"l_max": 12}))
        if "lemma-4.1" in claims:
            specs += [
                ("lemma-4.1", {"n": n, "p": p, "f": HoloPoly.monomial(tuple(a)).to_literal(), "radii": ["3/5", "3/4", "9/10"]})
                for p in literals
                for a in monomials
            ]
        if "identity-2.3" in claims:
            specs += [("identity-2.3", {"n": n, "p": p, "seed": next(seeds)}) for p in literals]
        if "slice-formula" in claims:
            specs += [("slice-formula", {"alpha": a, "t_max": cfg.t_max}) for a in monomials]
        if "monte-carlo" in claims:
            specs += [
                ("monte-carlo", {"alpha": a, "t": t, "samples": 100_000, "seed": next(seeds)})
                for a in monomials[: max(1, cfg.trials // 2)]
                for t in (0, 1)
            ]
        return specs

    def _estimated_constants(self, literals: List[str], seeds: Iterator[int]) -> Dict[int, Tuple[float, int]]:
        """Empirical C(n, m) per polynomial degree, floored at 1, with the seed that produced it"""
        cfg = self.config
        constants: Dict[int, Tuple[float, int]] = {}
        for m in sorted({parse_polynomial(p, cfg.n).degree for p in literals}):
            seed = next(seeds)
            estimate, _ = inequalities.estimate_Cnm(cfg.n, m, cfg.trials, cfg.k_max, seed)
            constants[m] = (max(estimate.constant, 1.0), seed)
        logger.info("📐 Commutator-bound constants ready", constants={m: c for m, (c, _) in constants.items()})
        return constants

    def _plan_commutator(self) -> List[Tuple[str, Dict]]:
        cfg = self.config
        n = cfg.n
        pairs = [(1, 1)] + ([(1, 2)] if n > 1 else [])
        literals = self.polynomial_literals()
        specs: List[Tuple[str, Dict]] = []
        for p_index, p in enumerate(literals):
            for B in sorted(cfg.B_list):
                specs.append(
                    (
                        "spectrum",
                        {"n": n, "p": p, "p_index": p_index, "B": B, "pairs": pairs, "q_list": cfg.q_list,
                         "output_dir": cfg.output_dir, "export_matrices": cfg.export_matrices},
                    )
                )
        if cfg.kernel_points:
            seeds = trial_seeds(cfg.seed, len(literals))
            specs += [
                ("kernel", {"n": n, "p": p, "B": min(cfg.B_list), "count": cfg.kernel_points, "seed": seed})
                for p, seed in zip(literals, seeds)
            ]
        return specs

    def _plan_cover(self) -> List[Tuple[str, Dict]]:
        cfg = self.config
        cover = cfg.cover.model_dump()
        specs: List[Tuple[str, Dict]] = []
        batch = 500
        seeds = trial_seeds(cfg.seed, (cfg.pairs + batch - 1) // batch + 1)
        for k, start in enumerate(range(0, cfg.pairs, batch)):
            specs.append(
                (
                    "lemma-3.4",
                    {"n": cfg.n, "cover": cover, "count": min(batch, cfg.pairs - start), "seed": seeds[k],
                     "probes": cfg.probes, "probe_pairs": cfg.probe_pairs, "first_index": start},
                )
            )
        if cfg.pairs:
            specs.append(("disk-intersection", {"count": cfg.pairs, "seed": seeds[-1]}))
        specs.append(("cover", {"n": cfg.n, "cover": cover, "probes": cfg.probes, "output_dir": cfg.output_dir}))
        return specs

    def _plan_constants(self) -> List[Tuple[str, Dict]]:
        cfg = self.config
        cap = cfg.cap if cfg.cap is not None else config.CNM_CAP
        batch_seeds = trial_seeds(cfg.seed, 2)
        return [
            ("constants", {"n": cfg.n, "m": cfg.degree, "trials": cfg.trials, "k_max": cfg.k_max,
                           "seed": seed, "batch": batch, "cap": cap})
            for batch, seed in enumerate(batch_seeds)
        ]

    # ----- execution -----

    def execute(self, trials: List[Trial]) -> List[Record]:
        """Run trials; results come back in trial order whatever the worker count"""
        if self.config.workers == 1 or len(trials) <= 1:
            outputs = [run_trial(trial) for trial in trials]
        else:
            with ProcessPoolExecutor(max_workers=self.config.workers) as pool:
                outputs = list(pool.map(run_trial, trials))
        return [record for output in outputs for record in output]

    def post_process(self, records: List[Record]) -> List[Record]:
        """Cross-trial records: truncation decay for commutators, seed stability for constants"""
        kind = self.config.kind
        if kind == "commutator":
            return self._decay_records(records)
        if kind == "constants":
            return self._stability_records(records)
        return []

    def _decay_records(self, records: List[Record]) -> List[Record]:
        groups: Dict[Tuple, List[Record]] = {}
        for record in records:
            if record.get("claim_id") == "commutator-spectrum":
                params = record["parameters"]
                groups.setdefault((params["p_index"], params["i"], params["j"]), []).append(record)
        out = []
        for (p_index, i, j), group in sorted(groups.items()):
            group.sort(key=lambda r: r["parameters"]["B"])
            if len(group) < 2:
                continue
            spectra = [
                SingularSpectrum(np.array(r["details"]["values"]), "", np.array(r["details"]["contaminated"]))
                for r in group
            ]
            truncations = [r["parameters"]["B"] for r in group]
            report = decay_report(spectra, truncations, self.config.q_list, self.config.top_k)
            out.append(
                VerificationReport.build(
                    "commutator-decay",
                    lhs=None,
                    rhs=None,
                    passed=report.bounded and not report.non_stabilizing,
                    parameters={"n": self.config.n, "p": group[0]["parameters"]["p"], "p_index": p_index, "i": i, "j": j},
                    scalar_kind="float",
                    details=report.model_dump(),
                ).model_dump(mode="json")
            )
        return out

    def _stability_records(self, records: List[Record]) -> List[Record]:
        estimates = [r for r in records if r.get("claim_id") == "constant-estimate"]
        if len(estimates) < 2:
            return []
        a, b = estimates[0]["constant"], estimates[1]["constant"]
        spread = abs(a - b) / max(a, b) if max(a, b) > 0 else 0.0
        stable = spread <= self.config.stability_tolerance
        if not stable:
            logger.warning("⚠️ Constant estimate differs between seed batches", spread=spread)
        report = VerificationReport.build(
            "constant-stability",
            lhs=spread,
            rhs=self.config.stability_tolerance,
            passed=stable or not self.config.require_stability,
            parameters={"n": self.config.n, "m": self.config.degree, "batches": 2},
            constant=max(a, b),
            scalar_kind="float",
            details={"batch_constants": [a, b], "stable": stable},
        )
        return [report.model_dump(mode="json")]

    # ----- output -----

    def write(self, records: List[Record]) -> Dict[str, Path]:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        paths = {
            "config": self.config.to_file(self.output_dir / "config.json"),
            "reports": write_jsonl(records, self.output_dir / "reports.jsonl"),
            "summary": self.output_dir / "summary.csv",
        }
        write_summary(records, paths["summary"])
        return paths

    def run(self) -> int:
        """Plan, execute, write; 0 iff every record passed"""
        trials = self.plan()
        logger.info("📋 Trials planned", count=len(trials), workers=self.config.workers)
        records = self.execute(trials)
        records += self.post_process(records)
        paths = self.write(records)

        errors = [r for r in records if "error" in r]
        failed = [r for r in records if not r.get("passed")]
        if any(r.get("degenerate") for r in errors):
            logger.error("❌ Numerical degeneracy, see report", reports=str(paths["reports"]))
        if failed:
            logger.warning("⚠️ Experiment finished with failures", failed=len(failed), errors=len(errors),
                           reports=str(paths["reports"]))
            return 1
        logger.info("✅ Experiment passed", records=len(records), reports=str(paths["reports"]))
        return 0


def run(experiment: ExperimentConfig) -> int:
    return ExperimentRunner(experiment).run()
