"""Angles and arcs on the unit circle.

Angles are plain floats reduced to ``[0, 2*pi)``.  Arcs are stored as a
``(start, length)`` pair running counterclockwise from ``start`` so that
wraparound never needs special casing by callers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi

#: Default membership / emptiness tolerance in radians.
EPS = 1e-12


class NonIntervalIntersection(ValueError):
    """Raised when two arcs intersect in two disjoint pieces."""


class AmbiguousArc(ValueError):
    """Raised when two angles are antipodal and no shortest arc exists."""


def wrap(x: float) -> float:
    """Reduce ``x`` modulo 2*pi into ``[0, 2*pi)``."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"angle must be finite, got {x!r}")
    r = x % TWO_PI
    # tiny negative inputs round up to exactly 2*pi
    if r >= TWO_PI:
        r = 0.0
    return r


def dist(a: float, b: float) -> float:
    """Branch-cut independent distance between two angles, in ``[0, pi]``."""
    d = (a - b) % TWO_PI
    return min(d, TWO_PI - d)


@dataclass(frozen=True)
class Arc:
    """A counterclockwise arc of the circle.

    ``kind`` is one of ``"empty"``, ``"full"`` or ``"proper"``.  For proper
    arcs ``start`` lies in ``[0, 2*pi)`` and ``0 <= length < 2*pi``; a zero
    length arc is the degenerate arc holding a single point.
    """

    kind: str
    start: float = 0.0
    length: float = 0.0

    def __post_init__(self):
        if self.kind not in ("empty", "full", "proper"):
            raise ValueError(f"unknown arc kind {self.kind!r}")
        if self.kind == "proper":
            if not (0.0 <= self.length < TWO_PI):
                raise ValueError(f"proper arc length out of range: {self.length!r}")
            if not (0.0 <= self.start < TWO_PI):
                raise ValueError(f"arc start not reduced: {self.start!r}")

    @classmethod
    def empty(cls) -> "Arc":
        return cls("empty")

    @classmethod
    def full(cls) -> "Arc":
        return cls("full", 0.0, TWO_PI)

    @classmethod
    def proper(cls, start: float, length: float) -> "Arc":
        """Arc from ``start`` of the given length, saturating to full."""
        if length < 0:
            raise ValueError(f"negative arc length {length!r}")
        if length >= TWO_PI:
            return cls.full()
        return cls("proper", wrap(start), float(length))

    @classmethod
    def centered(cls, center: float, radius: float) -> "Arc":
        return cls.proper(center - radius, 2.0 * radius)

    @property
    def is_empty(self) -> bool:
        return self.kind == "empty"

    @property
    def is_full(self) -> bool:
        return self.kind == "full"

    @property
    def measure(self) -> float:
        """Length of the arc (0 for empty, 2*pi for full)."""
        if self.kind == "empty":
            return 0.0
        if self.kind == "full":
            return TWO_PI
        return self.length

    @property
    def end(self) -> float:
        return wrap(self.start + self.length)

    @property
    def midpoint(self) -> float:
        return wrap(self.start + 0.5 * self.length)

    def to_dict(self) -> dict:
        if self.kind == "proper":
            return {"kind": "proper", "start": self.start, "length": self.length}
        return {"kind": self.kind}


def arc_contains(arc: Arc, a: float, eps: float = EPS) -> bool:
    """True iff ``a`` lies in ``arc``, endpoints included up to ``eps``."""
    if arc.kind == "full":
        return True
    if arc.kind == "empty":
        return False
    off = (a - arc.start) % TWO_PI
    return off <= arc.length + eps or off >= TWO_PI - eps


def arc_intersect(a: Arc, b: Arc, eps: float = EPS) -> Arc:
    """Intersection of two arcs as a single arc.

    Pieces shorter than ``eps`` are treated as empty.  Raises
    :class:`NonIntervalIntersection` when the intersection consists of two
    disjoint pieces, which can only happen when the lengths sum past 2*pi.
    """
    if a.kind == "empty" or b.kind == "empty":
        return Arc.empty()
    if a.kind == "full":
        return b
    if b.kind == "full":
        return a

    # work in a's frame: a = [0, la], b = [o, o + lb]
    la, lb = a.length, b.length
    o = (b.start - a.start) % TWO_PI
    if o >= TWO_PI:
        o = 0.0
    pieces = []
    lo, hi = o, min(la, o + lb)
    if hi - lo >= eps:
        pieces.append((lo, hi))
    if o + lb > TWO_PI:
        hi2 = min(la, o + lb - TWO_PI)
        if hi2 >= eps:
            pieces.append((0.0, hi2))

    if not pieces:
        return Arc.empty()
    if len(pieces) == 2:
        (lo1, hi1), (_, hi2) = pieces
        if hi2 >= lo1 - eps:
            # the wrapped piece reaches the first one: b covers all of a
            return a
        raise NonIntervalIntersection(
            f"intersection of {a} and {b} is two disjoint arcs"
        )
    lo, hi = pieces[0]
    return Arc.proper(a.start + lo, hi - lo)


def smallest_arc_containing(a: float, b: float, eps: float = EPS) -> Arc:
    """The shorter of the two arcs joining ``a`` and ``b``."""
    d = (b - a) % TWO_PI
    if abs(d - math.pi) <= eps:
        raise AmbiguousArc(f"angles {a!r} and {b!r} are antipodal")
    if d <= math.pi:
        return Arc.proper(a, d)
    return Arc.proper(b, TWO_PI - d)


def expand(arc: Arc, d: float) -> Arc:
    """Grow ``arc`` by ``d`` on both ends."""
    if d < 0:
        raise ValueError(f"expansion must be non-negative, got {d!r}")
    if arc.kind != "proper":
        return arc
    return Arc.proper(arc.start - d, arc.length + 2.0 * d)
