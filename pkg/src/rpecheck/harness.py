"""Monte Carlo driver: simulate many noisy RPE runs and score the checks.

One run is one task.  Every run owns private random streams keyed by
``(master_seed, run_index, sequence, generation, circuit)``, and results are
folded in run order, so the output does not depend on the worker count.
"""
from __future__ import annotations

import hashlib
import json
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from .channel import NoiseConfig, exact_probabilities, sample_counts, stream
from .checks import REPORT_CRITERIA, angular_historical_check, report
from .circle import wrap
from .estimator import GenerationData, GenerationSequence, RpeRun, estimate_run

DEFAULT_RATES = tuple(2.0**-i for i in range(2, 11))
DEFAULT_WIDTHS = tuple(math.pi * f for f in (1 / 6, 1 / 4, 1 / 3, 5 / 12, 1 / 2))
DEFAULT_SPAM = 1e-2

_PRIMARY, _SECONDARY = 0, 1


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce a batch of simulated runs."""

    theta: float = 1.6
    noise: NoiseConfig = field(default_factory=lambda: NoiseConfig("none", 0.0, DEFAULT_SPAM, DEFAULT_SPAM))
    samples: int = 1000
    k_max: int = 45
    runs: int = 200
    master_seed: int = 0
    primary: Optional[tuple] = None
    secondary: Optional[tuple] = None
    with_secondary: bool = True
    L: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "theta", wrap(self.theta))
        if self.samples < 1 or self.k_max < 0 or self.runs < 1:
            raise ValueError("samples and runs must be positive, k_max non-negative")
        if self.master_seed < 0:
            raise ValueError("master_seed must be non-negative")

    @property
    def primary_sequence(self) -> tuple:
        if self.primary is not None:
            return tuple(self.primary)
        return GenerationSequence.doubling(self.k_max).lengths

    @property
    def secondary_sequence(self) -> tuple:
        """Bootstrap generation followed by the compared generations."""
        if self.secondary is not None:
            return tuple(self.secondary)
        return GenerationSequence.offset(self.k_max, bootstrap=True).lengths

    def describe(self) -> dict:
        return {
            "theta": self.theta,
            "noise": self.noise.describe(),
            "samples": self.samples,
            "k_max": self.k_max,
            "runs": self.runs,
            "master_seed": self.master_seed,
            "primary": list(self.primary_sequence),
            "secondary": list(self.secondary_sequence) if self.with_secondary else None,
            "L": self.L,
        }

    def digest(self) -> str:
        blob = json.dumps(self.describe(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _simulate_sequence(config: ExperimentConfig, run_index: int, seq_id: int, seq: tuple, bootstrap: int) -> RpeRun:
    table = exact_probabilities(config.noise, config.theta, seq)
    gens = []
    for k, (n, (pc, ps)) in enumerate(zip(seq, table)):
        sc = sample_counts(pc, config.samples, stream(config.master_seed, run_index, seq_id, k, 0))
        ss = sample_counts(ps, config.samples, stream(config.master_seed, run_index, seq_id, k, 1))
        gens.append(GenerationData(n, (sc, config.samples), (ss, config.samples)))
    return estimate_run(gens, bootstrap=bootstrap)


def simulate_run(config: ExperimentConfig, run_index: int):
    """Simulate one run pair ``(primary, secondary)``.

    The secondary run is ``None`` when ``config.with_secondary`` is false.
    Its first generation only seeds the selection loop and is marked as
    bootstrap.
    """
    primary = _simulate_sequence(config, run_index, _PRIMARY, config.primary_sequence, 0)
    secondary = None
    if config.with_secondary:
        secondary = _simulate_sequence(config, run_index, _SECONDARY, config.secondary_sequence, 1)
    return primary, secondary


def evaluate_run(config: ExperimentConfig, run_index: int, widths: Sequence[float] = ()) -> dict:
    """Simulate and score one run.

    Returns discrepancies per criterion and, for each entry of ``widths``,
    the angular-historical discrepancy in length mode at that width.
    """
    primary, secondary = simulate_run(config, run_index)
    rep = report(primary, secondary, theta_true=config.theta, L=config.L)
    out = {
        "actual": rep.actual,
        "flags": {name: v.flagged for name, v in rep.verdicts.items()},
        "discrepancy": rep.discrepancies,
        "widths": {},
    }
    if widths:
        sched = rep.schedule
        for L in widths:
            v = angular_historical_check(primary.estimates, primary.sequence, sched, L=L, mode="length")
            flag = rep.k_max + 1 if v.flagged is None else v.flagged
            out["widths"][L] = flag - rep.recorded_actual
    return out


def _evaluate_task(args):
    config, run_index, widths = args
    return evaluate_run(config, run_index, widths)


def run_batch(config: ExperimentConfig, widths: Sequence[float] = (), workers: int = 1) -> list:
    """Evaluate runs ``0 .. config.runs-1``; results are in run order."""
    tasks = [(config, i, tuple(widths)) for i in range(config.runs)]
    if workers <= 1:
        return [_evaluate_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_evaluate_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


@dataclass
class SweepResult:
    """Discrepancy histograms and means along one swept axis.

    ``histograms[(axis_value, criterion)]`` maps discrepancy to count.
    """

    axis: str
    axis_values: list
    criteria: list
    histograms: dict
    runs: int
    metadata: dict = field(default_factory=dict)
    actual: dict = field(default_factory=dict)

    def mean(self, axis_value, criterion) -> float:
        hist = self.histograms[(axis_value, criterion)]
        total = sum(hist.values())
        return sum(b * c for b, c in sorted(hist.items())) / total

    def means(self) -> dict:
        return {key: self.mean(*key) for key in self.histograms}

    def fraction(self, axis_value, criterion, predicate) -> float:
        hist = self.histograms[(axis_value, criterion)]
        return sum(c for b, c in hist.items() if predicate(b)) / sum(hist.values())

    def histogram_rows(self) -> list:
        rows = []
        for (a, crit), hist in self.histograms.items():
            for b, c in hist.items():
                rows.append((a, crit, b, c))
        rows.sort(key=lambda r: (self.axis_values.index(r[0]), r[1], r[2]))
        return rows

    def mean_rows(self) -> list:
        rows = [(a, crit, self.mean(a, crit)) for (a, crit) in self.histograms]
        rows.sort(key=lambda r: (self.axis_values.index(r[0]), r[1]))
        return rows


def _fold(results: list, axis_value, criteria, hist: dict, actual: dict, key_fn):
    for res in results:
        for crit in criteria:
            d = key_fn(res, crit)
            if d is None:
                continue
            hist.setdefault((axis_value, crit), Counter())[d] += 1
        a = res["actual"]
        actual.setdefault(axis_value, Counter())[a] += 1


def _criteria_for(config: ExperimentConfig) -> list:
    return [c for c in REPORT_CRITERIA if c != "intersequence" or config.with_secondary]


def error_rate_sweep(config: ExperimentConfig, rates: Sequence[float] = DEFAULT_RATES, workers: int = 1) -> SweepResult:
    """Discrepancy statistics for each gate error rate (noise kind fixed by ``config``)."""
    criteria = _criteria_for(config)
    hist, actual = {}, {}
    for b in rates:
        cfg = replace(config, noise=replace(config.noise, rate=b))
        results = run_batch(cfg, workers=workers)
        _fold(results, b, criteria, hist, actual, lambda r, c: r["discrepancy"].get(c))
    return SweepResult("rate", list(rates), criteria, hist, config.runs, _meta(config, "rate"), actual)


def angle_sweep(config: ExperimentConfig, thetas: Sequence[float], workers: int = 1) -> SweepResult:
    """Discrepancy statistics for each true angle at the configured error rate."""
    if not thetas:
        raise ValueError("need at least one angle")
    criteria = _criteria_for(config)
    hist, actual = {}, {}
    for th in thetas:
        cfg = replace(config, theta=th)
        results = run_batch(cfg, workers=workers)
        _fold(results, th, criteria, hist, actual, lambda r, c: r["discrepancy"].get(c))
    return SweepResult("theta", list(thetas), criteria, hist, config.runs, _meta(config, "theta"), actual)


def width_label(L: float) -> str:
    return f"angular_historical[L={L!r}]"


def interval_width_sweep(
    config: ExperimentConfig,
    widths: Sequence[float] = DEFAULT_WIDTHS,
    rates: Sequence[float] = DEFAULT_RATES,
    workers: int = 1,
) -> SweepResult:
    """Angular-historical (length form) discrepancy for each width ``L`` and rate."""
    if not widths or any(not L > 0 for L in widths):
        raise ValueError("widths must be positive")
    criteria = [width_label(L) for L in widths]
    hist, actual = {}, {}
    for b in rates:
        cfg = replace(config, noise=replace(config.noise, rate=b), with_secondary=False)
        results = run_batch(cfg, widths=widths, workers=workers)
        lookup = {width_label(L): L for L in widths}
        _fold(results, b, criteria, hist, actual, lambda r, c: r["widths"][lookup[c]])
    return SweepResult("rate", list(rates), criteria, hist, config.runs, _meta(config, "rate"), actual)


def _meta(config: ExperimentConfig, axis: str) -> dict:
    meta = config.describe()
    meta["axis"] = axis
    meta["config_hash"] = config.digest()
    return meta
