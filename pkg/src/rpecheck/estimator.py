"""Candidate angle sets and the robust phase estimation selection loop.

Each generation ``k`` applies the target rotation ``N_k`` times and measures
a cosine and a sine circuit.  The observed frequencies pin down ``N_k * theta``
modulo 2*pi, leaving ``N_k`` equally spaced candidates for ``theta``.  The
estimator walks the generations in order, each time keeping the candidate
closest to the previous estimate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_counts, check_probability, check_sequence
from .circle import EPS, TWO_PI, dist, wrap


class DegeneratePoint(ValueError):
    """Both circuit contrasts vanish, so the generation carries no angle."""


@dataclass(frozen=True)
class GenerationSequence:
    """Strictly increasing repetition counts ``N_0 < N_1 < ...``."""

    lengths: tuple

    def __post_init__(self):
        object.__setattr__(self, "lengths", check_sequence(self.lengths))

    @classmethod
    def doubling(cls, k_max: int) -> "GenerationSequence":
        """``N_k = 2**k`` for ``k = 0..k_max``."""
        return cls(tuple(2**k for k in range(k_max + 1)))

    @classmethod
    def offset(cls, k_max: int, bootstrap: bool = True) -> "GenerationSequence":
        """``2, 3, 6, 12, ...`` (``N_i = 3 * 2**(i-1)`` for ``i >= 1``).

        With ``bootstrap`` a leading single-repetition generation is
        prepended so that the selection loop has a unique starting point.
        """
        body = [2] + [3 * 2 ** (i - 1) for i in range(1, k_max + 1)]
        return cls(tuple(([1] if bootstrap else []) + body))

    @property
    def starts_at_one(self) -> bool:
        return self.lengths[0] == 1

    @property
    def k_max(self) -> int:
        return len(self.lengths) - 1

    def __len__(self) -> int:
        return len(self.lengths)

    def __iter__(self):
        return iter(self.lengths)

    def __getitem__(self, k):
        return self.lengths[k]


@dataclass(frozen=True)
class GenerationData:
    """Measurement counts for one generation."""

    N: int
    counts_c: tuple
    counts_s: tuple

    def __post_init__(self):
        if int(self.N) < 1:
            raise ValueError(f"repetition count must be positive, got {self.N!r}")
        for name in ("counts_c", "counts_s"):
            succ, trials = (int(v) for v in getattr(self, name))
            if trials < 1:
                raise ValueError(f"{name}: zero trials")
            if not 0 <= succ <= trials:
                raise ValueError(f"{name}: successes {succ} outside [0, {trials}]")
            object.__setattr__(self, name, (succ, trials))
        object.__setattr__(self, "N", int(self.N))


def probabilities(data: GenerationData) -> tuple:
    """Relative frequencies ``(P_c, P_s)`` of the two circuits."""
    (sc, tc), (ss, ts) = data.counts_c, data.counts_s
    if tc < 1 or ts < 1:
        raise ValueError("zero trials")
    return sc / tc, ss / ts


@dataclass(frozen=True)
class CandidateSet:
    """The ``N`` angles ``base/N + 2*pi*n/N`` consistent with one generation.

    ``base`` is the observed value of ``N * theta`` modulo 2*pi.  Members are
    never materialised unless :meth:`angles` is called.
    """

    N: int
    base: float

    @property
    def spacing(self) -> float:
        return TWO_PI / self.N

    def angles(self) -> np.ndarray:
        n = np.arange(self.N, dtype=float)
        return np.mod(self.base / self.N + n * self.spacing, TWO_PI)

    def _index(self, theta: float) -> float:
        # position of theta in units of the candidate spacing
        return (theta - self.base / self.N) / self.spacing

    def member(self, n: int) -> float:
        return wrap(self.base / self.N + n * self.spacing)


def candidate_set(p_c: float, p_s: float, N: int, eps: float = EPS) -> CandidateSet:
    """Candidate set from estimated probabilities of the cosine and sine circuits."""
    p_c = check_probability(p_c, "p_c")
    p_s = check_probability(p_s, "p_s")
    if int(N) < 1:
        raise ValueError(f"N must be a positive integer, got {N!r}")
    x, y = 2.0 * p_c - 1.0, 2.0 * p_s - 1.0
    if abs(x) <= eps and abs(y) <= eps:
        raise DegeneratePoint(f"both contrasts vanish at N={N}")
    return CandidateSet(int(N), wrap(math.atan2(y, x)))


def candidate_dist(theta: float, cands: CandidateSet) -> float:
    """Distance from ``theta`` to the nearest member of ``cands``.

    Equal to ``dist(N * theta, base) / N``; evaluated through the nearest
    index so that large ``N`` does not amplify rounding in ``N * theta``.
    """
    n = math.floor(cands._index(theta) + 0.5)
    return dist(theta, cands.member(n))


def candidate_nearest(theta: float, cands: CandidateSet, return_tie: bool = False):
    """Member of ``cands`` closest to ``theta``.

    When ``theta`` sits on the midpoint between two members the one
    counterclockwise of ``theta`` is returned; pass ``return_tie=True`` to
    also learn whether that happened.
    """
    u = cands._index(theta)
    n0 = math.floor(u)
    frac = u - n0
    tie = abs(frac - 0.5) <= EPS / TWO_PI
    n = n0 + 1 if (tie or frac > 0.5) else n0
    angle = cands.member(n)
    if return_tie:
        return angle, tie
    return angle


def run_rpe(candidates: Sequence[Optional[CandidateSet]], return_ties: bool = False):
    """Select one estimate per generation.

    ``candidates[0]`` must have ``N == 1``.  A ``None`` entry marks a
    generation whose candidate set could not be formed; the estimate list
    stops just before it.  With ``return_ties`` the generations where a
    midpoint tie was broken are returned as a second value.
    """
    if not candidates:
        raise ValueError("no generations")
    ns = [c.N for c in candidates if c is not None]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("repetition counts must be strictly increasing")
    first = candidates[0]
    if first is not None and first.N != 1:
        raise ValueError("the first generation must have N = 1")

    estimates, ties = [], []
    prev = None
    for k, cands in enumerate(candidates):
        if cands is None:
            break
        if prev is None:
            est = cands.base
        else:
            est, tie = candidate_nearest(prev, cands, return_tie=True)
            if tie:
                ties.append(k)
        estimates.append(est)
        prev = est
    if return_ties:
        return estimates, ties
    return estimates


@dataclass(frozen=True)
class RpeRun:
    """Counts, candidate sets and selected estimates of one RPE run.

    ``truncated_at`` is the first generation whose candidate set was
    degenerate (``None`` if the run is complete).  The first ``bootstrap``
    generations are only used to seed the selection loop and are dropped by
    :meth:`compared`.
    """

    sequence: tuple
    generations: tuple
    candidates: tuple
    estimates: tuple
    ties: tuple = ()
    truncated_at: Optional[int] = None
    bootstrap: int = 0

    @property
    def k_max(self) -> int:
        return len(self.sequence) - 1

    def compared(self) -> "RpeRun":
        """The run with its bootstrap generations stripped."""
        b = self.bootstrap
        if b == 0:
            return self
        trunc = None if self.truncated_at is None else max(self.truncated_at - b, 0)
        return RpeRun(
            sequence=self.sequence[b:],
            generations=self.generations[b:],
            candidates=self.candidates[b:],
            estimates=self.estimates[b:],
            ties=tuple(k - b for k in self.ties if k >= b),
            truncated_at=trunc,
            bootstrap=0,
        )


def estimate_run(generations: Sequence[GenerationData], bootstrap: int = 0) -> RpeRun:
    """Run the full pipeline: probabilities, candidate sets, selection."""
    generations = tuple(generations)
    seq = check_sequence([g.N for g in generations], require_unit_start=True)
    candidates = []
    truncated_at = None
    for k, g in enumerate(generations):
        try:
            candidates.append(candidate_set(*probabilities(g), g.N))
        except DegeneratePoint:
            truncated_at = k
            break
    estimates, ties = run_rpe(candidates, return_ties=True) if candidates else ([], [])
    return RpeRun(
        sequence=seq,
        generations=generations,
        candidates=tuple(candidates),
        estimates=tuple(estimates),
        ties=tuple(ties),
        truncated_at=truncated_at,
        bootstrap=bootstrap,
    )


def polar_reparam(p_c: float, p_s: float, eps: float = EPS):
    """Bloch length and phase of the measured contrasts.

    Returns ``(lam, phi)`` with ``2*p_c - 1 = lam*cos(phi)`` and
    ``2*p_s - 1 = lam*sin(phi)``.  ``phi`` is ``None`` when ``lam`` vanishes.
    """
    x = 2.0 * check_probability(p_c, "p_c") - 1.0
    y = 2.0 * check_probability(p_s, "p_s") - 1.0
    lam = math.hypot(x, y)
    if lam <= eps:
        return lam, None
    return lam, wrap(math.atan2(y, x))


def actual_failure_generation(estimates, theta_true: float, seq) -> Optional[int]:
    """First generation whose estimate is not within ``pi/N_k`` of the truth.

    Generations without an estimate (a truncated run) count as failed.
    Returns ``None`` if every generation succeeded.
    """
    seq = tuple(seq)
    for k, n in enumerate(seq):
        if k >= len(estimates):
            return k
        if dist(estimates[k], theta_true) >= math.pi / n:
            return k
    return None


class RobustPhaseEstimator(BaseEstimator):
    """Scikit-learn style wrapper around the RPE selection loop.

    Parameters
    ----------
    sequence : sequence of int, optional
        Repetition count per generation.  Defaults to ``2**k`` for as many
        generations as rows passed to :meth:`fit`.

    Attributes
    ----------
    run_ : RpeRun
        Full record of the fitted run.
    estimates_ : ndarray
        Selected estimate per generation (shorter than the input when a
        degenerate generation truncated the run).
    angle_ : float
        Final estimate.
    """

    def __init__(self, sequence=None):
        self.sequence = sequence

    def _sequence_for(self, n_rows: int) -> tuple:
        if self.sequence is None:
            return tuple(2**k for k in range(n_rows))
        seq = check_sequence(self.sequence, require_unit_start=True)
        if len(seq) != n_rows:
            raise ValueError(f"sequence has {len(seq)} generations but counts have {n_rows}")
        return seq

    def _run(self, X) -> RpeRun:
        X = check_counts(X)
        seq = self._sequence_for(X.shape[0])
        gens = [
            GenerationData(n, (row[0], row[1]), (row[2], row[3]))
            for n, row in zip(seq, X.tolist())
        ]
        return estimate_run(gens)

    def fit(self, X, y=None):
        """Estimate the rotation angle from a ``(n_generations, 4)`` counts table.

        Columns are ``successes_c, trials_c, successes_s, trials_s``.
        """
        run = self._run(X)
        if not run.estimates:
            raise DegeneratePoint("the first generation is degenerate")
        self.run_ = run
        self.estimates_ = np.asarray(run.estimates, dtype=float)
        self.angle_ = float(run.estimates[-1])
        self.n_generations_ = len(run.sequence)
        return self

    def transform(self, X):
        """Per-generation estimates for new counts; NaN after a truncation."""
        check_is_fitted(self, "run_")
        run = self._run(X)
        out = np.full(len(run.sequence), np.nan)
        out[: len(run.estimates)] = run.estimates
        return out

    def predict(self, X):
        """Ideal ``(P_c, P_s)`` at repetition counts ``X`` under the fitted angle."""
        check_is_fitted(self, "angle_")
        n = np.asarray(X, dtype=float).ravel()
        phase = n * self.angle_
        return np.column_stack([(1 + np.cos(phase)) / 2, (1 + np.sin(phase)) / 2])

    def failure_generation(self, theta_true: float) -> Optional[int]:
        """First generation where the fitted run missed ``theta_true``."""
        check_is_fitted(self, "run_")
        return actual_failure_generation(self.run_.estimates, theta_true, self.run_.sequence)
