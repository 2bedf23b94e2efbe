"""
Verification campaigns: seeded random instances, relation evaluation and
order-independent aggregation of the results.
"""

import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator

from src.exceptions import ParseError, UncertaintyError, UnknownRelationError
from src.linalg_core import matrix_from_dict, matrix_to_dict
from src.problem_io import parse_json, problem_from_dict, problem_to_dict
from src.quantum_model import DensityState, ObservableTuple, center
from src.relations import RELATION_IDS, RelationEvaluator, Report
from src.sampling import StateKind, random_density, random_observables, random_psd, trial_rng

logger = logging.getLogger(__name__)

THREADS_ENV = "UR_THREADS"
TIGHTNESS_BINS = tuple(np.round(np.linspace(0.0, 1.0, 11), 1)) + (float("inf"),)
RESULT_COLUMNS = [
    "trial",
    "relation",
    "dim",
    "num_observables",
    "lhs",
    "rhs",
    "margin",
    "tightness",
    "satisfied",
    "degenerate",
    "error",
]


class CampaignConfig(BaseModel):
    """Parameters of a verification campaign."""

    model_config = ConfigDict(extra="forbid", use_enum_values=True)

    dims: List[int] = [2, 3, 4, 5, 6]
    num_observables: List[int] = [2, 3, 4, 5]
    trials: int = 1000
    seed: int = 0
    relations: List[str] = list(RELATION_IDS)
    tol: float = 1e-9
    state_kind: StateKind = StateKind.MIXED_FULL_RANK

    @field_validator("dims")
    @classmethod
    def _check_dims(cls, value: List[int]) -> List[int]:
        if not value or any(d < 2 for d in value):
            raise ValueError("dims must be a nonempty list of integers >= 2")
        return value

    @field_validator("num_observables")
    @classmethod
    def _check_num_observables(cls, value: List[int]) -> List[int]:
        if not value or any(n < 1 for n in value):
            raise ValueError("num_observables must be a nonempty list of integers >= 1")
        return value

    @field_validator("trials")
    @classmethod
    def _check_trials(cls, value: int) -> int:
        if value < 1:
            raise ValueError("trials must be >= 1")
        return value

    @field_validator("seed")
    @classmethod
    def _check_seed(cls, value: int) -> int:
        if not 0 <= value < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        return value

    @field_validator("relations")
    @classmethod
    def _check_relations(cls, value: List[str]) -> List[str]:
        if value == ["all"]:
            return list(RELATION_IDS)
        unknown = [r for r in value if r not in RELATION_IDS]
        if unknown:
            raise ValueError(f"unknown relations {unknown}")
        return value

    @classmethod
    def from_file(cls, path: Union[str, Path], **overrides) -> "CampaignConfig":
        """Load a JSON config file; keyword overrides that are not None win."""
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise ParseError(f"Cannot read campaign config {path}: {e}") from e
        payload = parse_json(text, str(path))
        if not isinstance(payload, dict):
            raise ParseError(f"Campaign config {path} must be a JSON object")
        payload.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return cls.model_validate(payload)
        except ValidationError as e:
            first = e.errors()[0]
            raise ParseError(
                f"Invalid campaign config: {first.get('msg')}",
                field=".".join(str(p) for p in first.get("loc", ())),
            ) from e


@dataclass(frozen=True)
class TrialInstance:
    """Everything one trial evaluates, reproducible from (seed, trial)."""

    seed: int
    trial: int
    state: DensityState
    observables: ObservableTuple
    pair: Tuple[np.ndarray, np.ndarray]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "seed": self.seed,
            "trial": self.trial,
            "problem": problem_to_dict(self.state, self.observables),
            "pair": [matrix_to_dict(M) for M in self.pair],
        }

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "TrialInstance":
        state, observables = problem_from_dict(payload["problem"])
        A, B = (matrix_from_dict(m) for m in payload["pair"])
        return cls(int(payload["seed"]), int(payload["trial"]), state, observables, (A, B))


def draw_instance(config: CampaignConfig, trial: int) -> TrialInstance:
    """Draw the instance of one trial from its own random stream."""
    rng = trial_rng(config.seed, trial)
    dim = int(config.dims[rng.integers(len(config.dims))])
    count = int(config.num_observables[rng.integers(len(config.num_observables))])
    state = random_density(dim, rng, config.state_kind)
    observables = center(state, random_observables(dim, count, rng))
    pair = (random_psd(dim, rng), random_psd(dim, rng))
    return TrialInstance(config.seed, trial, state, observables, pair)


def _normalized_margin(report: Report) -> float:
    return report.margin / max(1.0, abs(report.rhs))


def worst_report(reports: List[Report]) -> Report:
    """Report closest to (or furthest into) violation."""
    violated = [r for r in reports if not r.satisfied]
    return min(violated or reports, key=_normalized_margin)


def evaluate_instance(
    instance: TrialInstance, relations: List[str], evaluator: RelationEvaluator
) -> List[Dict[str, Any]]:
    """
    Evaluate the configured relations on one instance.

    Returns:
        One result row per applicable relation; failures are recorded in the
        ``error`` column instead of being raised
    """
    rows = []
    base = {
        "trial": instance.trial,
        "dim": instance.state.dimension,
        "num_observables": len(instance.observables),
    }
    for relation in relations:
        try:
            reports = evaluator.evaluate(
                relation, instance.state, instance.observables, instance.pair
            )
        except UnknownRelationError:
            raise
        except (UncertaintyError, ValueError, np.linalg.LinAlgError) as e:
            logger.warning("Trial %d, %s failed: %s", instance.trial, relation, e)
            rows.append({**base, "relation": relation, "error": str(e)})
            continue
        if not reports:
            continue
        report = worst_report(reports)
        rows.append(
            {
                **base,
                "relation": relation,
                "lhs": report.lhs,
                "rhs": report.rhs,
                "margin": report.margin,
                "tightness": report.tightness,
                "satisfied": report.satisfied,
                "degenerate": getattr(report, "degenerate", False),
                "error": None,
            }
        )
    return rows


def resolve_threads(value: Optional[str] = None) -> int:
    """Parallelism degree from UR_THREADS; 0, unset or invalid means auto."""
    raw = os.environ.get(THREADS_ENV, "0") if value is None else value
    try:
        threads = int(raw)
    except ValueError:
        logger.warning("Ignoring invalid %s=%r", THREADS_ENV, raw)
        threads = 0
    if threads <= 0:
        threads = os.cpu_count() or 1
    return threads


@dataclass
class CampaignResult:
    """Aggregated campaign outcome."""

    config: CampaignConfig
    per_relation: Dict[str, Dict[str, Any]]
    trials_frame: pd.DataFrame
    elapsed: float = 0.0
    errors: int = 0

    @property
    def total_violations(self) -> int:
        return int(sum(stats["violations"] for stats in self.per_relation.values()))

    @property
    def has_violations(self) -> bool:
        return self.total_violations > 0

    def to_report(self) -> Dict[str, Any]:
        """
        Serializable report. Elapsed time is left out so identical configs
        give byte-identical reports.
        """
        return {
            "config": self.config.model_dump(mode="json"),
            "relations": self.per_relation,
            "errors": self.errors,
            "version": "1",
        }

    def export_tightness_csv(self, path: Union[str, Path]) -> str:
        """Write per-trial tightness ratios (one row per trial and relation)."""
        file_path = Path(path)
        if file_path.parent != Path(""):
            file_path.parent.mkdir(parents=True, exist_ok=True)
        columns = ["trial", "relation", "dim", "num_observables", "lhs", "rhs", "tightness"]
        frame = self.trials_frame[self.trials_frame["error"].isna()][columns]
        frame.to_csv(file_path, index=False)
        return str(file_path)


def _histogram(tightness: pd.Series) -> List[int]:
    values = np.clip(tightness.to_numpy(dtype=float), 0.0, None)
    counts, _ = np.histogram(values, bins=np.array(TIGHTNESS_BINS))
    return [int(c) for c in counts]


def aggregate(
    frame: pd.DataFrame, config: CampaignConfig
) -> Dict[str, Dict[str, Any]]:
    """
    Per-relation trials, violations, minimum margin, histogram and worst witness.

    Violating trials are listed by index; each one replays from (seed, trial).
    The worst witness is a violation whenever one exists.
    """
    summary = {}
    for relation in config.relations:
        rows = frame[frame["relation"] == relation]
        evaluated = rows[rows["error"].isna()]
        violated = evaluated["satisfied"] == False  # noqa: E712
        stats: Dict[str, Any] = {
            "trials": int(len(evaluated)),
            "violations": int(violated.sum()),
            "violatingTrials": sorted(int(t) for t in evaluated.loc[violated, "trial"]),
            "errors": int(len(rows) - len(evaluated)),
            "degenerate": int((evaluated["degenerate"] == True).sum()),  # noqa: E712
            "histogram": _histogram(evaluated["tightness"]) if len(evaluated) else [],
            "histogramBins": [float(b) for b in TIGHTNESS_BINS],
        }
        if len(evaluated):
            worst = (
                evaluated.assign(holds=~violated)
                .sort_values(["holds", "margin", "trial"], kind="mergesort")
                .iloc[0]
            )
            finite = evaluated["tightness"].replace([np.inf], np.nan).dropna()
            stats.update(
                {
                    "minMargin": float(worst["margin"]),
                    "maxTightness": float(finite.max()) if len(finite) else None,
                    "worstWitness": {
                        "seed": config.seed,
                        "trial": int(worst["trial"]),
                        "lhs": float(worst["lhs"]),
                        "rhs": float(worst["rhs"]),
                        "margin": float(worst["margin"]),
                        "instance": draw_instance(config, int(worst["trial"])).to_dict(),
                    },
                }
            )
        else:
            stats.update({"minMargin": None, "maxTightness": None, "worstWitness": None})
        summary[relation] = stats
    return summary


class CampaignRunner:
    """Runs a campaign, optionally spreading trials over a thread pool."""

    def __init__(self, config: CampaignConfig, threads: Optional[int] = None):
        """
        Args:
            config: Campaign parameters
            threads: Worker count; None reads UR_THREADS
        """
        self.config = config
        self.threads = threads if threads and threads > 0 else resolve_threads()
        self.evaluator = RelationEvaluator(tol=config.tol)

    def run_trial(self, trial: int) -> List[Dict[str, Any]]:
        instance = draw_instance(self.config, trial)
        return evaluate_instance(instance, self.config.relations, self.evaluator)

    def run(self) -> CampaignResult:
        config = self.config
        logger.info(
            "Starting campaign: %d trials, dims %s, n %s, seed %d, %d threads",
            config.trials,
            config.dims,
            config.num_observables,
            config.seed,
            self.threads,
        )
        start = time.perf_counter()
        trials = range(config.trials)
        if self.threads == 1:
            chunks = [self.run_trial(t) for t in trials]
        else:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                # map preserves trial order regardless of completion order
                chunks = list(pool.map(self.run_trial, trials))

        frame = pd.DataFrame(
            [row for chunk in chunks for row in chunk], columns=RESULT_COLUMNS
        )
        per_relation = aggregate(frame, config)
        elapsed = time.perf_counter() - start
        errors = int(frame["error"].notna().sum())

        for relation, stats in per_relation.items():
            if stats["violations"]:
                logger.warning("%s: %d violations", relation, stats["violations"])
        logger.info("Campaign finished in %.2fs with %d errors", elapsed, errors)
        return CampaignResult(config, per_relation, frame, elapsed, errors)


def run_campaign(config: CampaignConfig, threads: Optional[int] = None) -> CampaignResult:
    return CampaignRunner(config, threads).run()


def replay_witness(
    witness: Dict[str, Any], relation: str, tol: float = 1e-9
) -> Report:
    """Re-evaluate a stored worst witness and return the worst report."""
    instance = TrialInstance.from_dict(witness["instance"])
    reports = RelationEvaluator(tol).evaluate(
        relation, instance.state, instance.observables, instance.pair
    )
    return worst_report(reports)
