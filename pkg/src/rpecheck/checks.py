"""Self-consistency checks for RPE runs.

Every check walks the generations in order and reports the first one at
which the run stops being consistent, or ``None`` if it never does.  A
truncated run (fewer estimates than generations) is flagged at the first
generation without an estimate unless something earlier already failed.

The interval checks keep a running intersection of arcs.  Membership and
emptiness tolerances scale with the generation: ``EPS / N_k``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from sklearn.base import BaseEstimator

from ._validation import check_sequence
from .circle import EPS, Arc, arc_contains, arc_intersect, dist, expand, smallest_arc_containing
from .estimator import RpeRun, actual_failure_generation, probabilities

CRITERIA = {
    "plausible": 1,
    "consecutive": 2,
    "local": 3,
    "uniform_local": 4,
    "angular_historical": 5,
    "probability_historical": 6,
    "intersequence": 7,
}

#: Checks included in a report, in display order.
REPORT_CRITERIA = (
    "plausible",
    "consecutive",
    "uniform_local",
    "angular_historical",
    "probability_historical",
    "intersequence",
)


@dataclass(frozen=True)
class DeltaSchedule:
    """Per-generation angular error bounds ``delta_k``.

    The local interval representation is only exact when
    ``delta_k/N_k + delta_{k-1}/N_{k-1} <= pi/N_k`` for every ``k >= 1``;
    :attr:`valid` reports whether that holds.
    """

    deltas: tuple
    sequence: tuple
    uniform: bool = False
    note: str = ""

    def __post_init__(self):
        deltas = tuple(float(d) for d in self.deltas)
        seq = check_sequence(self.sequence)
        if len(deltas) != len(seq):
            raise ValueError(f"{len(deltas)} bounds for {len(seq)} generations")
        if any(not d > 0 for d in deltas):
            raise ValueError("angular error bounds must be positive")
        object.__setattr__(self, "deltas", deltas)
        object.__setattr__(self, "sequence", seq)

    @property
    def valid(self) -> bool:
        d, n = self.deltas, self.sequence
        return all(
            d[k] / n[k] + d[k - 1] / n[k - 1] <= (math.pi / n[k]) * (1 + 1e-12)
            for k in range(1, len(n))
        )

    @property
    def radii_decreasing(self) -> bool:
        """Whether ``delta_k/N_k`` strictly decreases (length and membership tests agree)."""
        r = [d / n for d, n in zip(self.deltas, self.sequence)]
        return all(b < a for a, b in zip(r, r[1:]))

    def __len__(self):
        return len(self.deltas)

    def __getitem__(self, k):
        return self.deltas[k]


def uniform_schedule(seq) -> DeltaSchedule:
    """``delta_k = pi / (1 + N_k/N_{k-1})``, with ``delta_0`` copied from ``delta_1``."""
    seq = check_sequence(seq)
    if len(seq) == 1:
        return DeltaSchedule((math.pi / 3,), seq, uniform=True, note="delta_0=pi/3 (single generation)")
    deltas = [math.pi / (1 + seq[k] / seq[k - 1]) for k in range(1, len(seq))]
    return DeltaSchedule(tuple([deltas[0]] + deltas), seq, uniform=True, note="delta_0=delta_1")


@dataclass(frozen=True)
class ConsistencyVerdict:
    """Outcome of one check: first violated generation and the last good interval."""

    criterion: str
    flagged: Optional[int]
    witness: Arc = field(default_factory=Arc.full)

    @property
    def number(self) -> int:
        return CRITERIA[self.criterion]

    def to_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "number": self.number,
            "flagged": self.flagged,
            "witness": self.witness.to_dict(),
        }


def _prepare(estimates, seq):
    seq = check_sequence(seq)
    estimates = [float(e) for e in estimates]
    if len(estimates) > len(seq):
        raise ValueError(f"{len(estimates)} estimates for {len(seq)} generations")
    return estimates, seq


def _running_intersection(criterion, arcs, seq, n_estimates) -> ConsistencyVerdict:
    running = Arc.full()
    for k, arc in enumerate(arcs):
        nxt = arc_intersect(running, arc, eps=EPS / seq[k])
        if nxt.is_empty:
            return ConsistencyVerdict(criterion, k, running)
        running = nxt
    flagged = n_estimates if n_estimates < len(seq) else None
    return ConsistencyVerdict(criterion, flagged, running)


def plausible_arc(estimate: float, N: int) -> Arc:
    """Angles for which ``estimate`` is the nearest generation-``N`` candidate."""
    return Arc.centered(estimate, math.pi / N)


def consecutive_arc(prev: float, cur: float, N: int) -> Arc:
    """Interval form of the consecutive-consistency set intersected with the plausible set.

    The shortest arc joining ``prev`` and ``cur`` widened on both sides by
    ``pi/(2N) - dist(prev, cur)/2``; empty when that margin is negative.
    """
    margin = math.pi / (2 * N) - 0.5 * dist(prev, cur)
    if margin < 0:
        return Arc.empty()
    return expand(smallest_arc_containing(prev, cur), margin)


def plausible_check(estimates, seq) -> ConsistencyVerdict:
    """Criterion 1: some angle makes every selected estimate the correct one."""
    estimates, seq = _prepare(estimates, seq)
    arcs = [plausible_arc(e, seq[k]) for k, e in enumerate(estimates)]
    return _running_intersection("plausible", arcs, seq, len(estimates))


def consecutive_check(estimates, seq) -> ConsistencyVerdict:
    """Criterion 2: some angle is close to both candidate sets of every consecutive pair."""
    estimates, seq = _prepare(estimates, seq)
    arcs = [Arc.full()] if estimates else []
    for k in range(1, len(estimates)):
        arcs.append(consecutive_arc(estimates[k - 1], estimates[k], seq[k]))
    return _running_intersection("consecutive", arcs, seq, len(estimates))


def _check_schedule(schedule: DeltaSchedule, seq):
    if tuple(schedule.sequence) != tuple(seq):
        raise ValueError("schedule was built for a different generation sequence")
    if not schedule.valid:
        raise ValueError(
            "schedule violates delta_k/N_k + delta_{k-1}/N_{k-1} <= pi/N_k; "
            "the interval form of the local sets does not apply"
        )


def local_check(estimates, seq, schedule: DeltaSchedule) -> ConsistencyVerdict:
    """Criterion 3 (criterion 4 for the uniform schedule)."""
    estimates, seq = _prepare(estimates, seq)
    _check_schedule(schedule, seq)
    name = "uniform_local" if schedule.uniform else "local"
    arcs = [Arc.centered(e, schedule[k] / seq[k]) for k, e in enumerate(estimates)]
    return _running_intersection(name, arcs, seq, len(estimates))


def angular_historical_check(
    estimates, seq, schedule: DeltaSchedule, L: Optional[float] = None, mode: str = "membership"
) -> ConsistencyVerdict:
    """Criterion 5: every estimate lies in the running intersection of local arcs.

    ``mode="membership"`` tests that directly.  ``mode="length"`` instead
    flags the first generation whose running intersection is no longer than
    ``L/N_k`` (``L`` defaults to ``delta_k``).
    """
    if mode not in ("membership", "length"):
        raise ValueError(f"mode must be 'membership' or 'length', got {mode!r}")
    if L is not None and not L > 0:
        raise ValueError("minimum interval width must be positive")
    estimates, seq = _prepare(estimates, seq)
    _check_schedule(schedule, seq)

    running = Arc.full()
    for k, est in enumerate(estimates):
        tol = EPS / seq[k]
        arc = Arc.centered(est, schedule[k] / seq[k])
        nxt = arc_intersect(running, arc, eps=tol)
        if mode == "membership":
            bad = nxt.is_empty or not arc_contains(nxt, est, eps=tol)
        else:
            width = schedule[k] if L is None else L
            bad = nxt.measure <= width / seq[k] - tol
        if bad:
            return ConsistencyVerdict("angular_historical", k, running)
        running = nxt
    flagged = len(estimates) if len(estimates) < len(seq) else None
    return ConsistencyVerdict("angular_historical", flagged, running)


def probability_bound(delta: float) -> float:
    """Largest probability error compatible with an angular error ``delta``."""
    return math.sin(delta) / (2.0 * math.sqrt(2.0))


def probability_historical_check(estimates, seq, schedule: DeltaSchedule, probs) -> ConsistencyVerdict:
    """Criterion 6: earlier measured contrasts agree with the current estimate.

    ``probs`` holds the measured ``(P_c, P_s)`` per generation.  At
    generation ``k`` the contrasts ``2P-1`` of every earlier generation
    ``k'`` are compared with ``cos``/``sin`` of ``N_k' * estimate_k``; a
    deviation above ``sin(delta_k)/sqrt(2)`` flags ``k``.
    """
    estimates, seq = _prepare(estimates, seq)
    if tuple(schedule.sequence) != tuple(seq):
        raise ValueError("schedule was built for a different generation sequence")
    probs = [(float(pc), float(ps)) for pc, ps in probs]
    if len(probs) < len(estimates):
        raise ValueError("need measured probabilities for every estimated generation")
    contrasts = [(2 * pc - 1, 2 * ps - 1) for pc, ps in probs]
    for k in range(1, len(estimates)):
        thr = 2.0 * probability_bound(schedule[k])
        est = estimates[k]
        for kp in range(k):
            phase = seq[kp] * est
            xc, xs = contrasts[kp]
            if abs(xc - math.cos(phase)) > thr or abs(xs - math.sin(phase)) > thr:
                return ConsistencyVerdict("probability_historical", k, Arc.full())
    flagged = len(estimates) if len(estimates) < len(seq) else None
    return ConsistencyVerdict("probability_historical", flagged, Arc.full())


def intersequence_check(estimates, seq, estimates2, seq2) -> ConsistencyVerdict:
    """Criterion 7: two runs with longer second sequence agree to within ``2*pi/N_k``.

    The second run must already have its bootstrap generations removed.
    """
    estimates, seq = _prepare(estimates, seq)
    estimates2, seq2 = _prepare(estimates2, seq2)
    if len(seq) != len(seq2):
        raise ValueError(f"compared runs differ in length: {len(seq)} vs {len(seq2)}")
    if any(n2 <= n for n, n2 in zip(seq, seq2)):
        raise ValueError("the second sequence must exceed the first at every generation")
    witness = Arc.full()
    n_common = min(len(estimates), len(estimates2))
    for k in range(n_common):
        a, b = estimates[k], estimates2[k]
        if dist(a, b) > 2 * math.pi / seq[k]:
            return ConsistencyVerdict("intersequence", k, witness)
        witness = arc_intersect(plausible_arc(a, seq[k]), plausible_arc(b, seq[k]), eps=EPS / seq[k])
    flagged = n_common if n_common < len(seq) else None
    return ConsistencyVerdict("intersequence", flagged, witness)


def set_formulation_witness(j: int, alpha: float, k_max: int) -> bool:
    """Whether the false angle ``2*pi * 2**-j / 3`` survives ``k_max`` generations.

    Checks ``|frac(phi * 2**k) - 1/2| > 1/2 - 2*alpha`` for ``k = 0..k_max``
    in exact rational arithmetic, with ``phi = 2**-j / 3``.  Only meaningful
    for ``1/6 < alpha <= 1/2``.
    """
    if j < 0 or k_max < 0:
        raise ValueError("j and k_max must be non-negative")
    a = Fraction(alpha)
    if not (Fraction(1, 6) < a <= Fraction(1, 2)):
        raise ValueError(f"alpha must satisfy 1/6 < alpha <= 1/2, got {alpha!r}")
    # frac(2**k / d) = r/d with r = 2**k mod d; the test |r/d - 1/2| > 1/2 - 2p/q
    # becomes |2r - d| * q > d * (q - 4p) in integers
    p, q = a.numerator, a.denominator
    d = 3 * 2**j
    rhs = d * (q - 4 * p)
    return all(abs(2 * pow(2, k, d) - d) * q > rhs for k in range(k_max + 1))


@dataclass(frozen=True)
class ConsistencyReport:
    """All verdicts for a run, plus ground-truth comparison when available."""

    k_max: int
    verdicts: dict
    actual: Optional[int] = None
    has_truth: bool = False
    schedule: Optional[DeltaSchedule] = None

    def recorded_flag(self, criterion: str) -> int:
        """Flagged generation, with "never" recorded as ``k_max + 1``."""
        f = self.verdicts[criterion].flagged
        return self.k_max + 1 if f is None else f

    @property
    def recorded_actual(self) -> int:
        return self.k_max + 1 if self.actual is None else self.actual

    def discrepancy(self, criterion: str) -> int:
        """Flagged minus actual failure generation; positive means flagged late."""
        if not self.has_truth:
            raise ValueError("no true angle supplied")
        return self.recorded_flag(criterion) - self.recorded_actual

    @property
    def discrepancies(self) -> dict:
        if not self.has_truth:
            return {}
        return {name: self.discrepancy(name) for name in self.verdicts}

    def to_dict(self) -> dict:
        out = {
            "k_max": self.k_max,
            "verdicts": {name: v.to_dict() for name, v in self.verdicts.items()},
        }
        if self.schedule is not None:
            out["schedule"] = {"deltas": list(self.schedule.deltas), "note": self.schedule.note}
        if self.has_truth:
            out["actual_failure"] = self.actual
            out["discrepancies"] = self.discrepancies
        return out


def report(
    run: RpeRun,
    run2: Optional[RpeRun] = None,
    theta_true: Optional[float] = None,
    schedule: Optional[DeltaSchedule] = None,
    L: Optional[float] = None,
) -> ConsistencyReport:
    """Evaluate every applicable check on ``run``.

    ``run2`` enables the intersequence check; its bootstrap generations are
    stripped here.  Checks needing a valid schedule are skipped when the
    schedule does not satisfy the local-interval constraint.
    """
    run = run.compared()
    seq = run.sequence
    est = run.estimates
    if schedule is None:
        schedule = uniform_schedule(seq)
    probs = [probabilities(g) for g in run.generations]

    verdicts = {
        "plausible": plausible_check(est, seq),
        "consecutive": consecutive_check(est, seq),
    }
    if schedule.valid:
        local = local_check(est, seq, schedule)
        verdicts[local.criterion] = local
        verdicts["angular_historical"] = angular_historical_check(
            est, seq, schedule, L=L, mode="membership" if L is None else "length"
        )
    verdicts["probability_historical"] = probability_historical_check(est, seq, schedule, probs)
    if run2 is not None:
        r2 = run2.compared()
        verdicts["intersequence"] = intersequence_check(est, seq, r2.estimates, r2.sequence)

    actual = None
    if theta_true is not None:
        actual = actual_failure_generation(est, theta_true, seq)
    return ConsistencyReport(
        k_max=len(seq) - 1,
        verdicts=verdicts,
        actual=actual,
        has_truth=theta_true is not None,
        schedule=schedule,
    )


class ConsistencyChecker(BaseEstimator):
    """Scikit-learn style front end to :func:`report`.

    Parameters
    ----------
    L : float, optional
        Minimum interval width for the angular-historical check.  ``None``
        uses the membership form with ``delta_k``.

    Attributes
    ----------
    report_ : ConsistencyReport
    flagged_ : dict
        First flagged generation per criterion (``None`` if never).
    last_trusted_ : int
        Last generation before the angular-historical check flags (the
        consecutive check when no valid schedule exists).
    """

    def __init__(self, L=None):
        self.L = L

    def fit(self, X, y=None, run2=None):
        """Check a run.

        ``X`` is an :class:`RpeRun` or a fitted
        :class:`~rpecheck.estimator.RobustPhaseEstimator`; ``y`` is the
        optional true angle.
        """
        run = getattr(X, "run_", X)
        if not isinstance(run, RpeRun):
            raise TypeError("expected an RpeRun or a fitted RobustPhaseEstimator")
        if run2 is not None:
            run2 = getattr(run2, "run_", run2)
        self.report_ = report(run, run2=run2, theta_true=y, L=self.L)
        self.flagged_ = {name: v.flagged for name, v in self.report_.verdicts.items()}
        rep = self.report_
        name = "angular_historical" if "angular_historical" in rep.verdicts else "consecutive"
        # last generation the preferred check still trusts
        self.last_trusted_ = rep.recorded_flag(name) - 1
        return self
