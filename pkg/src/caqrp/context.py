"""Per-neighbor context features: profile similarity, link stability,
remaining energy and queue load, plus assembly into a decision matrix."""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

from .errors import ValidationError
from .mcdm import BENEFIT, COST, DecisionMatrix, criteria_from

CRITERIA = ("psim", "stability", "rengy", "load")
CRITERIA_KINDS = (BENEFIT, BENEFIT, BENEFIT, COST)


@dataclass(eq=False)
class QueryVector:
    """Sparse term -> weight vector. ``qid`` is set for issued queries."""

    terms: Mapping[Hashable, float]
    qid: Hashable = None
    norm: float = field(init=False, repr=False)

    def __post_init__(self):
        self.terms = dict(self.terms)
        for t, w in self.terms.items():
            if not math.isfinite(w) or w < 0:
                raise ValidationError(f"term {t!r} has invalid weight {w!r}")
        self.norm = math.sqrt(sum(w * w for w in self.terms.values()))


def cosine(q1: QueryVector, q2: QueryVector) -> float:
    if q1.norm == 0 or q2.norm == 0:
        return 0.0
    a, b = (q1.terms, q2.terms) if len(q1.terms) <= len(q2.terms) else (q2.terms, q1.terms)
    dot = sum(w * b[t] for t, w in a.items() if t in b)
    return min(1.0, dot / (q1.norm * q2.norm))


class PeerProfile:
    """Recent queries each neighbor answered, bounded per neighbor.

    Alongside the entries we keep, per neighbor, the sum of the unit-length
    query vectors, so that the similarity score is one sparse dot product.
    """

    def __init__(self, capacity: int = 100):
        if capacity < 1:
            raise ValidationError("profile capacity must be >= 1")
        self.capacity = capacity
        self._entries: dict[Hashable, OrderedDict] = {}
        self._centroid: dict[Hashable, dict] = {}

    def entries(self, neighbor) -> list[QueryVector]:
        """Most recent first."""
        return list(reversed(self._entries.get(neighbor, {}).values()))

    def __len__(self):
        return sum(len(e) for e in self._entries.values())

    def record_answer(self, neighbor, q: QueryVector) -> None:
        entries = self._entries.setdefault(neighbor, OrderedDict())
        key = q.qid if q.qid is not None else id(q)
        if key in entries:
            entries.move_to_end(key)
            return
        entries[key] = q
        while len(entries) > self.capacity:
            entries.popitem(last=False)
        self._rebuild(neighbor)

    def _rebuild(self, neighbor) -> None:
        # recomputed from scratch rather than updated incrementally, so there is
        # no floating-point drift across evictions
        acc: dict = {}
        for q in self._entries[neighbor].values():
            if q.norm == 0:
                continue
            for t, w in q.terms.items():
                acc[t] = acc.get(t, 0.0) + w / q.norm
        self._centroid[neighbor] = acc

    def psim(self, neighbor, q: QueryVector) -> float:
        """Sum of cosines between ``q`` and the neighbor's stored queries."""
        acc = self._centroid.get(neighbor)
        if not acc or q.norm == 0:
            return 0.0
        dot = sum(w * acc[t] for t, w in q.terms.items() if t in acc)
        return max(0.0, dot / q.norm)


@dataclass(frozen=True)
class KinematicState:
    x: float
    y: float
    vx: float = 0.0
    vy: float = 0.0
    t: float = 0.0

    def at(self, t: float) -> "KinematicState":
        """Dead-reckoned state at time ``t`` assuming constant velocity."""
        dt = t - self.t
        return KinematicState(self.x + self.vx * dt, self.y + self.vy * dt, self.vx, self.vy, t)

    def distance_to(self, other: "KinematicState") -> float:
        return math.hypot(other.x - self.x, other.y - self.y)


@dataclass(frozen=True)
class EnergyState:
    remaining: float
    initial: float

    def __post_init__(self):
        if not self.initial > 0 or not 0 <= self.remaining <= self.initial:
            raise ValidationError(f"invalid energy state {self.remaining}/{self.initial} J")


@dataclass(frozen=True)
class QueueState:
    occupancy: int
    capacity: int

    def __post_init__(self):
        if self.capacity < 1 or not 0 <= self.occupancy <= self.capacity:
            raise ValidationError(f"invalid queue state {self.occupancy}/{self.capacity}")


def link_stability(own: KinematicState, nbr: KinematicState, range_m: float, horizon_s: float) -> float:
    """Seconds until ``nbr`` leaves radio range of ``own`` at constant velocities.

    Smallest t >= 0 with |dp + dv t| = range, capped at ``horizon_s``.
    """
    dx, dy = nbr.x - own.x, nbr.y - own.y
    dvx, dvy = nbr.vx - own.vx, nbr.vy - own.vy
    c = dx * dx + dy * dy - range_m * range_m
    if c > 1e-9 * range_m * range_m:
        raise ValidationError(f"peers are {math.hypot(dx, dy):.3f} m apart, beyond range {range_m} m")
    a = dvx * dvx + dvy * dvy
    if math.sqrt(a) < 1e-9:
        return horizon_s
    b = 2.0 * (dx * dvx + dy * dvy)
    c = min(c, 0.0)
    # numerically stable root selection; c <= 0 means one root is >= 0
    root = math.sqrt(b * b - 4.0 * a * c)
    # explicit sign: copysign would treat b = -0.0 as negative
    q = -0.5 * (b + root) if b >= 0 else -0.5 * (b - root)
    if q == 0.0:
        t = 0.0
    elif b >= 0:
        t = c / q
    else:
        t = q / a
    return min(max(t, 0.0), horizon_s)


def load(qs: QueueState) -> float:
    return qs.occupancy / qs.capacity


@dataclass(frozen=True)
class NeighborContext:
    neighbor: Hashable
    psim: float
    stability: float
    rengy: float
    load: float

    def row(self) -> list[float]:
        return [self.psim, self.stability, self.rengy, self.load]


def neighbor_context(q, neighbor, profile, nbr_kin, energy, queue, own, range_m, horizon_s) -> NeighborContext:
    return NeighborContext(
        neighbor,
        profile.psim(neighbor, q),
        link_stability(own, nbr_kin, range_m, horizon_s),
        energy.remaining,
        load(queue),
    )


def build_decision_matrix(
    q: QueryVector,
    neighbors: Sequence[tuple],
    own: KinematicState,
    range_m: float,
    horizon_s: float,
    weights: Sequence[float],
) -> DecisionMatrix:
    """One row per ``(id, profile, kinematics, energy, queue)`` neighbor tuple."""
    if not neighbors:
        raise ValidationError("cannot build a decision matrix without neighbors")
    rows = [neighbor_context(q, nid, prof, kin, en, qs, own, range_m, horizon_s) for nid, prof, kin, en, qs in neighbors]
    return DecisionMatrix(
        [r.neighbor for r in rows],
        criteria_from(CRITERIA, CRITERIA_KINDS, weights),
        [r.row() for r in rows],
    )
