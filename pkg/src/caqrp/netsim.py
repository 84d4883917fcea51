"""Deterministic discrete-event MANET simulator.

One run is a pure function of ``(ScenarioConfig, seed)``. All randomness
comes from numpy's PCG64 generator; independent substreams are seeded with
``SeedSequence([seed, offset])`` so mobility, workload and protocol draws do
not perturb each other (the same seed gives every protocol the same corpus,
query stream and movement).

Energy is accounted in integer microjoules so that the conservation identity
holds exactly.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .config import ScenarioConfig
from .context import KinematicState
from .errors import ValidationError
from .metrics import MetricsReport, QueryOutcome, build_report
from .protocol import BeaconMessage, PeerNode, QueryHitMessage, QueryMessage, RoutingParams, Strategy
from .workload import generate_corpus, generate_queries, ground_truth

STREAMS = {"mobility": 1, "protocol": 2, "corpus": 3, "queries": 4, "energy": 5, "beacon": 6}

# event kinds, in the order they are documented
DELIVERY, BEACON, MOBILITY, QUERY, END = "message-delivery", "beacon-tick", "mobility-tick", "query-issue", "run-end"

UJ = 1_000_000


def stream_rng(seed: int, name: str) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, STREAMS[name]])))


def to_uj(joules: float) -> int:
    return int(round(joules * UJ))


class RandomWaypoint:
    """Random-waypoint mobility for ``n`` peers in a square of side ``area``.

    Each peer travels in a straight line toward its waypoint at a speed drawn
    uniformly from [v_min, v_max], pauses on arrival, then draws the next leg.
    """

    def __init__(self, n, area, v_min, v_max, pause, rng: np.random.Generator):
        self.area, self.v_min, self.v_max, self.pause = area, v_min, v_max, pause
        self.rng = rng
        self.pos = rng.uniform(0.0, area, size=(n, 2))
        self.waypoint = np.empty((n, 2))
        self.speed = np.empty(n)
        self.pause_left = np.zeros(n)
        self.vel = np.zeros((n, 2))
        for i in range(n):
            self._new_leg(i)
        self._update_velocity()

    def _new_leg(self, i):
        self.waypoint[i] = self.rng.uniform(0.0, self.area, size=2)
        self.speed[i] = self.rng.uniform(self.v_min, self.v_max) if self.v_max > self.v_min else self.v_min

    def _step_one(self, i, dt):
        t = dt
        while t > 0:
            if self.pause_left[i] > 0:
                used = min(t, self.pause_left[i])
                self.pause_left[i] -= used
                t -= used
                if self.pause_left[i] <= 0:
                    self.pause_left[i] = 0.0
                    self._new_leg(i)
                continue
            delta = self.waypoint[i] - self.pos[i]
            dist = math.hypot(delta[0], delta[1])
            v = self.speed[i]
            if v <= 0:
                return
            if v * t < dist:
                self.pos[i] += delta * (v * t / dist)
                return
            self.pos[i] = self.waypoint[i]
            t -= dist / v
            if self.pause > 0:
                self.pause_left[i] = self.pause
            else:
                self._new_leg(i)

    def step(self, dt: float) -> None:
        if dt <= 0:
            raise ValueError("dt must be > 0")
        delta = self.waypoint - self.pos
        dist = np.hypot(delta[:, 0], delta[:, 1])
        travel = self.speed * dt
        simple = (self.pause_left <= 0) & (travel < dist)
        frac = np.divide(travel, dist, out=np.zeros_like(dist), where=simple)
        self.pos += delta * frac[:, None]
        for i in np.flatnonzero(~simple):
            self._step_one(int(i), dt)
        np.clip(self.pos, 0.0, self.area, out=self.pos)
        self._update_velocity()

    def _update_velocity(self):
        delta = self.waypoint - self.pos
        dist = np.hypot(delta[:, 0], delta[:, 1])
        moving = (self.pause_left <= 0) & (dist > 0)
        scale = np.divide(self.speed, dist, out=np.zeros_like(dist), where=moving)
        self.vel = delta * scale[:, None]

    def state(self, i: int, t: float) -> KinematicState:
        return KinematicState(float(self.pos[i, 0]), float(self.pos[i, 1]), float(self.vel[i, 0]), float(self.vel[i, 1]), t)


@dataclass
class Counters:
    sends: int = 0  # query + hit transmissions
    deliveries: int = 0
    beacon_sends: int = 0
    beacon_deliveries: int = 0
    drops: int = 0
    hits_lost: int = 0
    duplicates: int = 0
    drop_reasons: dict = field(default_factory=dict)


@dataclass
class RunResult:
    report: MetricsReport
    counters: Counters
    initial_energy_uj: list
    final_energy_uj: list
    death_times: dict
    outcomes: list
    trace: list | None = None

    @property
    def trace_text(self) -> str:
        return "".join(line + "\n" for line in self.trace or ())


class Simulator:
    def __init__(self, config: ScenarioConfig, seed: int, trace: bool = False):
        problems = config.validate()
        if problems:
            raise ValidationError(problems)
        self.config = config
        self.seed = seed
        net, en, pr = config.network, config.energy, config.protocol
        self.n = net.n_peers
        self.range_m = net.range_m
        self.hop_delay = net.hop_delay_s
        self.e_tx, self.e_rx = to_uj(en.e_tx), to_uj(en.e_rx)
        # beacon receptions are charged E_rx unless energy.beacon_rx is off
        self.beacon_rx_uj = self.e_rx if en.beacon_rx else 0
        self.capacity, self.mu = config.queue.capacity, config.queue.mu

        self.mobility = RandomWaypoint(
            self.n, net.area_m, config.mobility.v_min, config.mobility.v_max, config.mobility.pause_s,
            stream_rng(seed, "mobility"),
        )
        self.proto_rng = stream_rng(seed, "protocol")
        self.docs = generate_corpus(config.workload, self.n, stream_rng(seed, "corpus"))
        self.queries = generate_queries(config.workload, stream_rng(seed, "queries"))
        energy_rng = stream_rng(seed, "energy")
        self.energy = [int(x) for x in energy_rng.integers(to_uj(en.e_lo), to_uj(en.e_hi), size=self.n, endpoint=True)]
        self.initial_energy = list(self.energy)
        self.alive = [True] * self.n
        self.death_times: dict[int, float] = {}
        self.occupancy = [0] * self.n

        strategy = Strategy(pr.strategy, pr.k, pr.p_base)
        params = RoutingParams(
            range_m=net.range_m,
            horizon_s=pr.horizon_s,
            neighbor_timeout_s=pr.neighbor_timeout_s,
            theta=config.workload.theta,
            weights=tuple(config.weights.resolve()),
        )
        by_owner = [[] for _ in range(self.n)]
        for d in self.docs:
            by_owner[d.owner].append(d)
        self.peers = [
            PeerNode(i, strategy, params, by_owner[i], pr.p_cap, locate=self._locator(i)) for i in range(self.n)
        ]

        self.now = 0.0
        self._heap: list = []
        self._seq = 0
        self.counters = Counters()
        self.outcomes: list[QueryOutcome] = []
        self._issued: list[tuple] = []
        self.trace = [] if trace else None

    def _locator(self, i):
        return lambda t: self.mobility.state(i, t)

    # -- scheduling -------------------------------------------------------

    def schedule(self, time: float, kind: str, payload=None) -> None:
        if time < self.now:
            raise RuntimeError(f"event {kind} scheduled in the past ({time} < {self.now})")
        heapq.heappush(self._heap, (time, self._seq, kind, payload))
        self._seq += 1

    def _log(self, kind, src="-", dst="-", qid="-", detail=""):
        if self.trace is not None:
            self.trace.append(f"{self.now:.6f} {kind} {src} {dst} {qid} {detail}".rstrip())

    # -- physical layer -----------------------------------------------------

    def in_range(self, a: int, b: int) -> bool:
        d = self.mobility.pos[a] - self.mobility.pos[b]
        return d[0] * d[0] + d[1] * d[1] <= self.range_m * self.range_m

    def neighbors_of(self, i: int) -> list[int]:
        d = self.mobility.pos - self.mobility.pos[i]
        close = (d[:, 0] ** 2 + d[:, 1] ** 2) <= self.range_m * self.range_m
        return [int(j) for j in np.flatnonzero(close) if j != i and self.alive[j]]

    def consume_energy(self, i: int, cost_uj: int, reap: bool = True) -> bool:
        """Debit ``cost_uj`` from peer ``i``; False if it cannot pay.

        A peer that cannot afford an operation dies without performing it and
        its residual charge stays in the battery. A peer drained to exactly
        zero completes the operation and then dies (deferred to the caller
        when ``reap`` is False, so the transmission is logged first).
        """
        if not self.alive[i]:
            return False
        if self.energy[i] < cost_uj:
            self._kill(i, "exhausted")
            return False
        self.energy[i] -= cost_uj
        if reap:
            self._reap(i)
        return True

    def _reap(self, i: int) -> None:
        if self.alive[i] and self.energy[i] == 0:
            self._kill(i, "drained")

    def _kill(self, i: int, reason: str) -> None:
        self.alive[i] = False
        self.death_times[i] = self.now
        self._log("death", i, detail=f"reason={reason}")

    def _drop(self, src, dst, msg, reason):
        c = self.counters
        c.drops += 1
        c.drop_reasons[reason] = c.drop_reasons.get(reason, 0) + 1
        if isinstance(msg, QueryHitMessage):
            c.hits_lost += 1
        self._log("drop", src, dst, msg.query_id, f"{_kind(msg)} reason={reason}")

    def send(self, src: int, dst: int, msg) -> bool:
        """Unicast ``msg``. Returns True if a delivery was scheduled."""
        if not self.consume_energy(src, self.e_tx, reap=False):
            return False
        self.counters.sends += 1
        self._log("send", src, dst, msg.query_id, _describe(msg))
        self._reap(src)
        if not self.alive[dst]:
            self._drop(src, dst, msg, "dead")
            return False
        if not self.in_range(src, dst):
            self._drop(src, dst, msg, "range")
            return False
        waiting = self.occupancy[dst]
        if waiting >= self.capacity:
            self._drop(src, dst, msg, "queue")
            return False
        self.occupancy[dst] = waiting + 1
        self.schedule(self.now + self.hop_delay + waiting / self.mu, DELIVERY, (src, dst, msg))
        return True

    def _send_all(self, src, outgoing):
        for dst, msg in outgoing:
            if not self.alive[src]:
                break
            self.send(src, dst, msg)

    # -- event handlers ---------------------------------------------------

    def _on_delivery(self, payload):
        src, dst, msg = payload
        if isinstance(msg, BeaconMessage):
            for j in dst:
                if self.beacon_rx_uj and not self.consume_energy(j, self.beacon_rx_uj):
                    continue
                if self.alive[j]:
                    self.counters.beacon_deliveries += 1
                    self.peers[j].handle_beacon(msg)
            return
        self.occupancy[dst] -= 1
        if not self.alive[dst]:
            self._drop(src, dst, msg, "dead")
            return
        if not self.consume_energy(dst, self.e_rx):
            self._drop(src, dst, msg, "energy")
            return
        self.counters.deliveries += 1
        if not self.alive[dst]:
            return
        peer = self.peers[dst]
        if isinstance(msg, QueryMessage):
            out = peer.handle_query(msg, self.proto_rng, self.now)
            if out is None:
                self.counters.duplicates += 1
                self._log("dup", src, dst, msg.query_id)
                return
            self._log("proc", src, dst, msg.query_id, f"ttl={msg.ttl} path={_ids(msg.path)}")
            self._send_all(dst, out)
        else:
            out = peer.handle_hit(msg, src, self.now)
            if not out:
                self._log("answer", src, dst, msg.query_id, f"responder={msg.responder} docs={_ids(msg.doc_ids)}")
            self._send_all(dst, out)

    def _on_beacon(self, i):
        if not self.alive[i]:
            return
        if not self.consume_energy(i, self.e_tx, reap=False):
            return
        receivers = self.neighbors_of(i)
        b = BeaconMessage(
            i,
            self.mobility.state(i, self.now),
            self.energy[i] / UJ,
            self.initial_energy[i] / UJ,
            self.occupancy[i],
            self.capacity,
        )
        self.counters.beacon_sends += 1
        self._log("beacon", i, "*", "-", f"n={len(receivers)}")
        self._reap(i)
        if receivers:
            self.schedule(self.now + self.hop_delay, DELIVERY, (i, receivers, b))
        if self.alive[i]:
            self.schedule(self.now + self.config.protocol.beacon_s, BEACON, i)

    def _on_query(self, index):
        sq = self.queries[index]
        alive = [i for i in range(self.n) if self.alive[i]]
        origin = sq.issuer(alive)
        owners = set(alive)
        gt = frozenset(ground_truth(self.docs, sq.vector, self.config.workload.theta, owners, exclude=origin))
        self._issued.append((sq, origin, gt))
        self._log("issue", origin if origin is not None else "-", "-", sq.qid, f"ttl={self.config.protocol.ttl} gt={len(gt)}")
        if origin is None:
            return
        out = self.peers[origin].initiate_query(sq.vector, self.config.protocol.ttl, self.proto_rng, self.now)
        self._send_all(origin, out)

    # -- main loop --------------------------------------------------------

    def run(self) -> RunResult:
        duration = self.config.run.duration_s
        self.schedule(duration, END)
        tick = self.config.mobility.tick_s
        self.schedule(tick, MOBILITY)
        phase_rng = stream_rng(self.seed, "beacon")
        phases = phase_rng.uniform(0.0, self.config.protocol.beacon_s, size=self.n)
        for i in range(self.n):
            self.schedule(float(phases[i]), BEACON, i)
        for idx, sq in enumerate(self.queries):
            if sq.issue_time < duration:
                self.schedule(sq.issue_time, QUERY, idx)

        while self._heap:
            time, _, kind, payload = heapq.heappop(self._heap)
            self.now = time
            if kind == END:
                break
            if kind == DELIVERY:
                self._on_delivery(payload)
            elif kind == BEACON:
                self._on_beacon(payload)
            elif kind == MOBILITY:
                self.mobility.step(tick)
                self.schedule(time + tick, MOBILITY)
            elif kind == QUERY:
                self._on_query(payload)
        self._log("end")
        return self._result()

    def _result(self) -> RunResult:
        outcomes = []
        for sq, origin, gt in self._issued:
            arrivals = self.peers[origin].answers.get(sq.qid, []) if origin is not None else []
            discovered = frozenset(d for _, docs in arrivals for d in docs)
            first = min((t for t, _ in arrivals), default=None)
            outcomes.append(QueryOutcome(sq.qid, sq.issue_time, gt, discovered, first))
        c = self.counters
        report = build_report(
            self.config.protocol.strategy, self.n, self.seed, outcomes, c.sends, c.hits_lost, c.drops
        )
        return RunResult(report, c, self.initial_energy, list(self.energy), dict(self.death_times), outcomes, self.trace)


def run(config: ScenarioConfig, seed: int, trace: bool = False) -> RunResult:
    return Simulator(config, seed, trace).run()


def _ids(seq) -> str:
    return ".".join(str(x) for x in seq)


def _kind(msg) -> str:
    return "query" if isinstance(msg, QueryMessage) else "hit"


def _describe(msg) -> str:
    if isinstance(msg, QueryMessage):
        return f"query ttl={msg.ttl} path={_ids(msg.path)}"
    return f"hit responder={msg.responder} route={_ids(msg.route)}"
