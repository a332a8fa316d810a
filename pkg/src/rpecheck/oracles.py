"""Brute-force grid oracles for the interval forms used by the checks.

Every set is evaluated straight from its defining inequality on a uniform
grid of test angles and compared with what the interval code computes.
Nothing here shares logic with :mod:`rpecheck.checks` beyond the run data.
Inequalities are closed with a tolerance of ``EPS/N``, the same boundary
convention the arcs use; open and closed readings differ only on boundary
points.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import NoiseConfig, double_probabilities, sample_counts
from .checks import (
    angular_historical_check,
    consecutive_arc,
    consecutive_check,
    local_check,
    plausible_check,
    set_formulation_witness,
    uniform_schedule,
)
from .circle import EPS, TWO_PI
from .estimator import GenerationData, estimate_run
from .records import run_to_record


def grid(resolution: int) -> np.ndarray:
    if resolution < 2:
        raise ValueError("grid needs at least two points")
    return np.arange(resolution) * (TWO_PI / resolution)


def _dist(a, b):
    d = np.mod(np.asarray(a) - b, TWO_PI)
    return np.minimum(d, TWO_PI - d)


def set_distance(points: np.ndarray, estimate: float, N: int) -> np.ndarray:
    """``d(x, Theta)`` for the candidate set through ``estimate``, by enumeration.

    Only the two members bracketing each point can be nearest, so those are
    enumerated instead of all ``N``.
    """
    spacing = TWO_PI / N
    u = np.floor((points - estimate) / spacing)
    lo = estimate + u * spacing
    return np.minimum(_dist(points, lo), _dist(points, lo + spacing))


def phi_mask(points, estimate, N):
    """Angles whose nearest candidate is ``estimate``."""
    return _dist(points, estimate) <= math.pi / N + EPS / N


def lambda_mask(points, prev, n_prev, cur, n_cur):
    total = set_distance(points, cur, n_cur) + set_distance(points, prev, n_prev)
    return total <= math.pi / n_cur + EPS / n_cur


def arc_mask(arc, points, eps=EPS):
    """Vectorised closed-with-tolerance arc membership."""
    if arc.kind != "proper":
        return np.full(points.shape, arc.is_full)
    off = np.mod(points - arc.start, TWO_PI)
    return (off <= arc.length + eps) | (off >= TWO_PI - eps)


def delta_mask(points, estimate, N, delta):
    return set_distance(points, estimate, N) <= delta / N + EPS / N


@dataclass
class OracleReport:
    instances: int
    resolution: int
    violations: list = field(default_factory=list)
    counts: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.violations

    def add(self, kind: str, detail: str, record=None):
        entry = {"oracle": kind, "detail": detail}
        if record is not None:
            entry["record"] = record
        self.violations.append(entry)


def random_run(rng: np.random.Generator, k_max: int = 10):
    """A noisy doubling-sequence run with a random angle, rate and shot count.

    Returns ``(run, theta, noise, samples)``.
    """
    theta = float(rng.uniform(0, TWO_PI))
    rate = float(2.0 ** -rng.uniform(2, 9))
    samples = int(rng.choice([30, 100, 1000]))
    noise = NoiseConfig("depolarizing", rate, 0.01, 0.01)
    gens = []
    for k in range(k_max + 1):
        n = 2**k
        pc, ps = double_probabilities(noise, theta, n)
        gens.append(GenerationData(n, (sample_counts(pc, samples, rng), samples), (sample_counts(ps, samples, rng), samples)))
    return estimate_run(gens), theta, noise, samples


def _first_empty(masks) -> int | None:
    running = None
    for k, m in enumerate(masks):
        running = m if running is None else running & m
        if not running.any():
            return k
    return None


def hierarchy_violations(run, points) -> list:
    """Inclusions of running intersections and the order of the flags.

    Checks, at every prefix, that the grid sets obey Delta in Lambda in Phi,
    that a nonempty grid intersection is never reported as flagged, and that
    the local check flags no later than the consecutive check, which flags
    no later than the plausible check.

    Set inclusions are only asserted before the first midpoint tie: the
    inclusion argument needs a unique nearest candidate at every step.
    """
    seq, est = run.sequence, run.estimates
    limit = run.ties[0] if run.ties else len(est)
    sched = uniform_schedule(seq)
    out = []
    phi = [phi_mask(points, e, seq[k]) for k, e in enumerate(est)]
    lam = [np.ones_like(points, dtype=bool)] + [
        lambda_mask(points, est[k - 1], seq[k - 1], est[k], seq[k]) for k in range(1, len(est))
    ]
    dlt = [delta_mask(points, e, seq[k], sched[k]) for k, e in enumerate(est)]
    P = L = D = np.ones_like(points, dtype=bool)
    for k in range(limit):
        P, L, D = P & phi[k], L & lam[k], D & dlt[k]
        if np.any(D & ~L):
            out.append(f"k={k}: intersection of Delta sets not inside intersection of Lambda sets")
        if np.any(L & ~P):
            out.append(f"k={k}: intersection of Lambda sets not inside intersection of Phi sets")

    plaus = plausible_check(est, seq).flagged
    consec = consecutive_check(est, seq).flagged
    local = local_check(est, seq, sched).flagged
    big = len(seq) + 1
    p, c, l = (big if f is None else f for f in (plaus, consec, local))
    if not l <= c <= p:
        out.append(f"flag order violated: local={local} consecutive={consec} plausible={plaus}")
    for name, flagged, masks in (("plausible", plaus, phi), ("consecutive", consec, lam)):
        grid_empty = _first_empty(masks)
        if flagged is not None and flagged < limit and (grid_empty is None or grid_empty > flagged):
            out.append(f"{name} flagged at {flagged} but the grid intersection is nonempty there")
    return out


def expanded_arc_mismatch(prev: float, cur: float, n_prev: int, n_cur: int, points: np.ndarray):
    """Compare the expanded-arc formula with grid membership in Lambda and Phi.

    Returns ``None`` when every disagreement lies within one grid cell of an
    arc endpoint, else a description of the worst offender.
    """
    arc = consecutive_arc(prev, cur, n_cur)
    truth = lambda_mask(points, prev, n_prev, cur, n_cur) & phi_mask(points, cur, n_cur)
    tol = EPS / n_cur
    formula = arc_mask(arc, points, tol)
    bad = np.flatnonzero(formula != truth)
    if not len(bad):
        return None
    if arc.is_empty:
        return f"formula empty but grid has {len(bad)} members"
    cell = TWO_PI / len(points)
    ends = np.array([arc.start, arc.end])
    gap = np.min(_dist(points[bad][:, None], ends[None, :]), axis=1)
    worst = float(gap.max())
    if worst > cell * (1 + 1e-9):
        return f"{len(bad)} mismatches, farthest {worst:.3g} rad from an endpoint (cell {cell:.3g})"
    return None


def random_arc_triple(rng: np.random.Generator):
    """``(prev, cur, n_prev, n_cur)`` with ``cur`` the generation-``n_cur`` pick next to ``prev``."""
    n_cur = int(rng.integers(2, 257))
    n_prev = int(rng.integers(1, n_cur))
    prev = float(rng.uniform(0, TWO_PI))
    offset = float(rng.uniform(-1, 1)) * math.pi / n_cur
    return prev, (prev + offset) % TWO_PI, n_prev, n_cur


def equivalence_mismatch(run, L: float = math.pi / 3):
    seq, est = run.sequence, run.estimates
    sched = uniform_schedule(seq)
    a = angular_historical_check(est, seq, sched, mode="membership").flagged
    b = angular_historical_check(est, seq, sched, L=L, mode="length").flagged
    if a != b:
        return f"membership flags {a}, length flags {b}"
    return None


def witness_failures(js=range(6), alpha: float = 0.17, k_max: int = 25) -> list:
    return [j for j in js if not set_formulation_witness(j, alpha, k_max)]


def run_oracles(instances: int = 1000, resolution: int = 10_000, seed: int = 0, k_max: int = 10) -> OracleReport:
    """Run every oracle on ``instances`` random cases each."""
    if instances < 1:
        raise ValueError("need at least one instance")
    rng = np.random.default_rng(seed)
    points = grid(resolution)
    fine = grid(resolution * 10)
    rep = OracleReport(instances, resolution)
    for i in range(instances):
        run, theta, noise, samples = random_run(rng, k_max)
        meta = {"instance": i, "seed": seed, "noise": noise.describe(), "samples": samples}
        for msg in hierarchy_violations(run, points):
            rep.add("hierarchy", msg, run_to_record(run, theta, meta))
        msg = equivalence_mismatch(run)
        if msg:
            rep.add("equivalence", msg, run_to_record(run, theta, meta))
        prev, cur, n_prev, n_cur = random_arc_triple(rng)
        msg = expanded_arc_mismatch(prev, cur, n_prev, n_cur, fine)
        if msg:
            rep.add("expanded_arc", msg, {"prev": prev, "cur": cur, "n_prev": n_prev, "n_cur": n_cur})
    for j in witness_failures():
        rep.add("witness", f"false angle 2*pi*2**-{j}/3 eliminated before generation 25")
    rep.counts = {"hierarchy": instances, "equivalence": instances, "expanded_arc": instances, "witness": 6}
    return rep
