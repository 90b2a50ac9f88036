"""
Multi-trial evaluation: inject, impute a fresh copy, score, average.
"""

import csv
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from core.errors import ImputationError, ProtocolError
from core.intra_imputer import DEFAULT_POLICY
from core.matcher import MatchConfig
from core.pipeline import Strategy, run_strategy
from evaluation.injector import InjectionPlan, eligible_targets, inject_plan
from evaluation.metrics import score

logger = logging.getLogger(__name__)

DEFAULT_RATES = (0.01, 0.05, 0.10, 0.20, 0.30, 0.40, 0.50)
DEFAULT_TRIALS = 20

RESULT_COLUMNS = ["rate", "trials", "imputation_rate", "accuracy", "runtime_s", "strategy", "policy"]
BREAKDOWN_COLUMNS = ["rate", "dimension", "attribute", "missing", "replaced", "correct",
                     "imputation_rate", "accuracy", "lower_parameter", "distinct_ratio", "group_cv"]


def mean_defined(values):
    """Mean over the values that are not None, or None."""
    kept = [v for v in values if v is not None]
    return sum(kept) / len(kept) if kept else None


@dataclass
class RateResult:
    rate: float
    trials: int
    imputation_rate: object
    accuracy: object
    runtime_s: object
    strategy: str
    policy: str
    reports: list = field(default_factory=list, repr=False)

    def attribute_totals(self):
        """(dimension, attribute) -> summed counts over all trials."""
        totals = {}
        for report in self.reports:
            for key, s in report.attributes.items():
                t = totals.setdefault(key, {"missing": 0, "replaced": 0, "scored": 0, "correct": 0})
                t["missing"] += s.missing
                t["replaced"] += s.replaced
                t["scored"] += s.scored
                t["correct"] += s.correct
        return dict(sorted(totals.items()))


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r_squared: float


@dataclass(frozen=True)
class LowerLevelProfile:
    """Shape of the parameter a target is first matched on."""
    parameter: str
    distinct_ratio: object
    group_cv: object


def lower_level_profile(model, dimension, attribute):
    """
    Distinct-value ratio and coefficient of variation of group sizes of the
    nearest lower parameter (the owning parameter for a weak attribute).

    Returns:
        LowerLevelProfile, or None when the attribute has no lower parameter
    """
    d = model.dimension(dimension)
    lower = None
    for h in d.hierarchies:
        if attribute in h.parameters:
            level = h.index(attribute)
            lower = h.parameters[level - 1] if level > 0 else None
        else:
            lower = h.owner_of_weak(attribute)
        if lower is not None:
            break
    if lower is None or d.table is None:
        return None

    values = [v for v in d.table.column(lower) if v is not None]
    if not values:
        return LowerLevelProfile(lower, None, None)
    _, counts = np.unique(np.asarray(values), return_counts=True)
    return LowerLevelProfile(
        parameter=lower,
        distinct_ratio=len(counts) / len(values),
        group_cv=float(counts.std() / counts.mean()),
    )


class EvaluationHarness:
    """
    Runs the missing-rate sweep for one warehouse.
    """

    def __init__(self, model, targets=None, strategy=Strategy.INTRA, policy=DEFAULT_POLICY,
                 cfg=None, passes=1, seed=0, count_preexisting=False, timing=True, jobs=1):
        """
        Args:
            model: Pristine WarehouseModel (never modified)
            targets: (dimension, attribute) pairs; default every eligible target
            strategy: Strategy used for imputation
            policy: DonorPolicy
            cfg: MatchConfig
            passes: Strategy repetitions
            seed: Base seed; trial i uses seed + i
            count_preexisting: Count cells null before injection as missing
            timing: Measure imputation runtime
            jobs: Trials run concurrently
        """
        self.model = model
        self.targets = tuple(targets) if targets else tuple(eligible_targets(model))
        if not self.targets:
            raise ImputationError("no eligible target attribute in the warehouse")
        self.strategy = Strategy(strategy)
        self.policy = policy
        self.cfg = cfg or MatchConfig()
        self.passes = passes
        self.seed = seed
        self.count_preexisting = count_preexisting
        self.timing = timing
        self.jobs = jobs

    # -----------------------------------------------------
    # Single trial
    # -----------------------------------------------------
    def run_trial(self, rate, trial):
        working = self.model.clone()
        plan = InjectionPlan(self.targets, rate, self.seed + trial, self.count_preexisting)
        truth = inject_plan(working, plan)

        start = time.perf_counter()
        fills = run_strategy(working, self.strategy, self.cfg, self.policy, self.passes)
        elapsed = time.perf_counter() - start

        report = score(self._scorable(fills, truth), truth, self.policy.case_insensitive)
        report.runtime = elapsed
        return report

    def _scorable(self, fills, truth):
        """Drop repairs of cells that were already null before injection."""
        kept = []
        for fill in fills:
            addr = fill.target
            if addr in truth:
                kept.append(fill)
                continue
            table = self.model.dimension(addr.dimension).table
            if table.get(addr.row_index, addr.attribute) is not None:
                raise ProtocolError(
                    f"fill at {addr.dimension}.{addr.attribute} row {addr.row_index} "
                    f"touched a cell that was neither injected nor originally null"
                )
        return kept

    # -----------------------------------------------------
    # Sweep
    # -----------------------------------------------------
    def run_rate(self, rate, trials):
        if self.jobs > 1:
            with ThreadPoolExecutor(max_workers=self.jobs) as pool:
                reports = list(pool.map(lambda i: self.run_trial(rate, i), range(trials)))
        else:
            reports = [self.run_trial(rate, i) for i in range(trials)]

        return RateResult(
            rate=rate,
            trials=trials,
            imputation_rate=mean_defined(r.imputation_rate for r in reports),
            accuracy=mean_defined(r.accuracy for r in reports),
            runtime_s=sum(r.runtime for r in reports) / trials if self.timing else None,
            strategy=self.strategy.value,
            policy=self.policy.mode.value,
            reports=reports,
        )

    def run(self, rates=DEFAULT_RATES, trials=DEFAULT_TRIALS):
        if trials < 1:
            raise ImputationError(f"trials must be >= 1, got {trials}")
        results = []
        for rate in rates:
            result = self.run_rate(rate, trials)
            logger.info("rate %.2f: imputation rate %s, accuracy %s",
                        rate, _fmt(result.imputation_rate), _fmt(result.accuracy))
            results.append(result)
        return results


def run_trials(model, plan, rates=DEFAULT_RATES, trials=DEFAULT_TRIALS, strategy=Strategy.INTRA,
               policy=DEFAULT_POLICY, cfg=None, passes=1, timing=True, jobs=1):
    """
    Averaged metrics per missing rate.

    Args:
        model: Pristine WarehouseModel
        plan: InjectionPlan template (targets, seed0, count_preexisting; rate ignored)
        rates: Missing rates in (0, 1)
        trials: Trials per rate; trial i uses seed0 + i

    Returns:
        List of RateResult, one per rate
    """
    harness = EvaluationHarness(
        model, plan.targets, strategy, policy, cfg, passes,
        seed=plan.seed, count_preexisting=plan.count_preexisting, timing=timing, jobs=jobs,
    )
    return harness.run(rates, trials)


# -----------------------------------------------------
# Reporting
# -----------------------------------------------------
def _fmt(value, digits=6):
    return "n/a" if value is None else f"{value:.{digits}f}"


def result_row(result):
    return [
        f"{result.rate:g}",
        result.trials,
        _fmt(result.imputation_rate),
        _fmt(result.accuracy),
        _fmt(result.runtime_s, 3),
        result.strategy,
        result.policy,
    ]


def write_results(results, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(RESULT_COLUMNS)
        for r in results:
            writer.writerow(result_row(r))
    return path


def write_breakdown(results, path, model=None):
    """
    Per-attribute counts summed over the trials of each rate. With the
    pristine model, each row also profiles the target's lower parameter.
    """
    profiles = {}
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(BREAKDOWN_COLUMNS)
        for r in results:
            for (dim, attr), t in r.attribute_totals().items():
                if model is not None and (dim, attr) not in profiles:
                    profiles[(dim, attr)] = lower_level_profile(model, dim, attr)
                profile = profiles.get((dim, attr))
                writer.writerow([
                    f"{r.rate:g}", dim, attr, t["missing"], t["replaced"], t["correct"],
                    _fmt(t["replaced"] / t["missing"] if t["missing"] else None),
                    _fmt(t["correct"] / t["scored"] if t["scored"] else None),
                    profile.parameter if profile else "n/a",
                    _fmt(profile.distinct_ratio if profile else None),
                    _fmt(profile.group_cv if profile else None),
                ])
    return path


def format_results(results):
    """Per-rate table for the terminal."""
    header = f"{'rate':>6}  {'trials':>6}  {'imp. rate':>10}  {'accuracy':>10}  {'runtime s':>10}"
    lines = [header, "-" * len(header)]
    for r in results:
        lines.append(
            f"{r.rate * 100:>5g}%  {r.trials:>6}  {_fmt(r.imputation_rate, 4):>10}  "
            f"{_fmt(r.accuracy, 4):>10}  {_fmt(r.runtime_s, 3):>10}"
        )
    return "\n".join(lines)


def runtime_linearity(results):
    """Least-squares fit of mean runtime against missing rate."""
    points = [(r.rate, r.runtime_s) for r in results if r.runtime_s is not None]
    if len(points) < 3:
        raise ImputationError("runtime linearity needs at least 3 timed rates")
    xs, ys = zip(*points)
    fit = stats.linregress(xs, ys)
    return LinearFit(float(fit.slope), float(fit.intercept), float(fit.rvalue ** 2))
