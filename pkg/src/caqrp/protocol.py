"""Per-peer query routing: CAQRP, RBFS and Gossiping-LB neighbor selection.

Handlers never touch the network directly. They return the messages to send
as ``(destination, message)`` pairs and the simulator delivers them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .context import (
    EnergyState,
    KinematicState,
    PeerProfile,
    QueryVector,
    QueueState,
    build_decision_matrix,
)
from .errors import ValidationError
from .mcdm import topsis_rank
from .workload import Document, relevance

CAQRP = "caqrp"
RBFS = "rbfs"
GOSSIP_LB = "gossip-lb"
STRATEGIES = (CAQRP, RBFS, GOSSIP_LB)

DEFAULT_WEIGHTS = (0.235, 0.55, 0.098, 0.117)


@dataclass(frozen=True, slots=True)
class QueryMessage:
    query_id: int
    origin: int
    vector: QueryVector
    ttl: int
    path: tuple


@dataclass(frozen=True, slots=True)
class QueryHitMessage:
    query_id: int
    responder: int
    doc_ids: tuple
    # hops still to traverse, route[0] is the receiver and route[-1] the origin
    route: tuple


@dataclass(frozen=True, slots=True)
class BeaconMessage:
    sender: int
    kinematics: KinematicState
    energy_remaining: float
    energy_initial: float
    queue_occupancy: int
    queue_capacity: int

    @property
    def timestamp(self) -> float:
        return self.kinematics.t

    @property
    def load(self) -> float:
        return self.queue_occupancy / self.queue_capacity


@dataclass(frozen=True)
class Strategy:
    kind: str
    k: int = 3
    p_base: float = 1.0

    def __post_init__(self):
        if self.kind not in STRATEGIES:
            raise ValidationError(f"unknown strategy {self.kind!r}; valid: {', '.join(STRATEGIES)}")
        if self.k < 0:
            raise ValidationError("k must be >= 0")
        if not 0 <= self.p_base <= 1:
            raise ValidationError("p_base must be in [0, 1]")


@dataclass
class RoutingParams:
    range_m: float = 250.0
    horizon_s: float = 3600.0
    neighbor_timeout_s: float = 2.5
    theta: float = 0.7
    weights: Sequence[float] = DEFAULT_WEIGHTS
    learn_at_origin: bool = True


@dataclass
class SeenQuery:
    vector: QueryVector
    origin: int


class PeerNode:
    def __init__(
        self,
        peer_id: int,
        strategy: Strategy,
        params: RoutingParams | None = None,
        documents: Sequence[Document] = (),
        profile_capacity: int = 100,
        locate: Callable[[float], KinematicState] | None = None,
    ):
        self.id = peer_id
        self.strategy = strategy
        self.params = params or RoutingParams()
        self.documents = list(documents)
        self.profile = PeerProfile(profile_capacity)
        self.seen: dict[int, SeenQuery] = {}
        self.neighbors: dict[int, BeaconMessage] = {}
        self.locate = locate or (lambda t: KinematicState(0.0, 0.0, t=t))
        # for queries this peer issued: qid -> [(arrival time, doc ids), ...]
        self.answers: dict[int, list] = {}
        self.duplicates = 0

    # -- neighbor cache -------------------------------------------------

    def handle_beacon(self, b: BeaconMessage) -> bool:
        """Cache ``b`` unless we already hold a newer beacon from that sender."""
        if b.sender == self.id:
            return False
        cur = self.neighbors.get(b.sender)
        if cur is not None and cur.timestamp >= b.timestamp:
            return False
        self.neighbors[b.sender] = b
        return True

    def eligible_neighbors(self, now: float, exclude=()) -> list[BeaconMessage]:
        """Fresh cache entries believed in range, ordered by peer id."""
        own = self.locate(now)
        r2 = self.params.range_m**2
        out = []
        for nid in sorted(self.neighbors):
            b = self.neighbors[nid]
            if nid in exclude or now - b.timestamp > self.params.neighbor_timeout_s:
                continue
            est = b.kinematics.at(now)
            if (est.x - own.x) ** 2 + (est.y - own.y) ** 2 <= r2:
                out.append(b)
        return out

    # -- selection strategies -------------------------------------------

    def select_neighbors_caqrp(self, q: QueryVector, k: int, now: float, exclude=()) -> list[int]:
        eligible = self.eligible_neighbors(now, exclude)
        if not eligible or k <= 0:
            return []
        own = self.locate(now)
        rows = [
            (
                b.sender,
                self.profile,
                b.kinematics.at(now),
                EnergyState(b.energy_remaining, b.energy_initial),
                QueueState(b.queue_occupancy, b.queue_capacity),
            )
            for b in eligible
        ]
        X = build_decision_matrix(q, rows, own, self.params.range_m, self.params.horizon_s, self.params.weights)
        return topsis_rank(X).top(k)

    def select_neighbors_rbfs(self, k: int, rng: np.random.Generator, now: float, exclude=()) -> list[int]:
        eligible = self.eligible_neighbors(now, exclude)
        size = min(k, len(eligible))
        if size <= 0:
            return []
        picks = rng.choice(len(eligible), size=size, replace=False)
        return [eligible[int(i)].sender for i in picks]

    def select_neighbors_gossip_lb(self, p_base: float, rng: np.random.Generator, now: float, exclude=()) -> list[int]:
        chosen = []
        for b in self.eligible_neighbors(now, exclude):
            # one draw per candidate, whether or not it can be chosen
            if rng.random() < p_base * (1.0 - b.load):
                chosen.append(b.sender)
        return chosen

    def select(self, q: QueryVector, rng: np.random.Generator, now: float, exclude=()) -> list[int]:
        s = self.strategy
        if s.kind == CAQRP:
            return self.select_neighbors_caqrp(q, s.k, now, exclude)
        if s.kind == RBFS:
            return self.select_neighbors_rbfs(s.k, rng, now, exclude)
        return self.select_neighbors_gossip_lb(s.p_base, rng, now, exclude)

    # -- message handlers -----------------------------------------------

    def initiate_query(self, q: QueryVector, ttl: int, rng: np.random.Generator, now: float) -> list[tuple]:
        if ttl < 1:
            raise ValidationError("ttl must be >= 1")
        self.seen[q.qid] = SeenQuery(q, self.id)
        self.answers[q.qid] = []
        msg = QueryMessage(q.qid, self.id, q, ttl, (self.id,))
        return [(dst, msg) for dst in self.select(q, rng, now, exclude={self.id})]

    def handle_query(self, msg: QueryMessage, rng: np.random.Generator, now: float) -> list[tuple] | None:
        """Process a delivered query. Returns None when it is a duplicate."""
        if msg.query_id in self.seen:
            self.duplicates += 1
            return None
        self.seen[msg.query_id] = SeenQuery(msg.vector, msg.origin)
        out = []
        matched = tuple(d.doc_id for d in self.documents if relevance(d, msg.vector, self.params.theta))
        if matched:
            route = tuple(reversed(msg.path))
            out.append((route[0], QueryHitMessage(msg.query_id, self.id, matched, route)))
        ttl = msg.ttl - 1
        if ttl > 0:
            exclude = set(msg.path)
            exclude.add(self.id)
            fwd = QueryMessage(msg.query_id, msg.origin, msg.vector, ttl, msg.path + (self.id,))
            out.extend((dst, fwd) for dst in self.select(msg.vector, rng, now, exclude))
        return out

    def handle_hit(self, hit: QueryHitMessage, src: int, now: float) -> list[tuple]:
        """Record or relay a hit; either way learn that ``src`` answered the query."""
        seen = self.seen.get(hit.query_id)
        is_origin = len(hit.route) == 1
        if seen is not None and (not is_origin or self.params.learn_at_origin):
            self.profile.record_answer(src, seen.vector)
        if is_origin:
            self.answers.setdefault(hit.query_id, []).append((now, hit.doc_ids))
            return []
        nxt = QueryHitMessage(hit.query_id, hit.responder, hit.doc_ids, hit.route[1:])
        return [(nxt.route[0], nxt)]

