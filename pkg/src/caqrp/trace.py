"""Parse simulator event traces and check protocol invariants against them.

A trace line is ``time kind src dst qid [key=value ...]`` where the detail
fields depend on the kind (see ``Simulator._log``). The validator checks:

* TTL: every processed or forwarded query carries ``ttl0 - (hops so far)``
  and a forwarded query always has ttl >= 1.
* No duplicate processing: a peer processes a given query at most once and
  an origin never processes its own query.
* Reverse-path fidelity: every hit transmission follows the reverse of the
  path recorded when the responder processed the query.
* Dead-peer inertness: after its death line a peer never sends, beacons,
  issues, processes or accepts anything.
"""

from __future__ import annotations

from dataclasses import dataclass, field

# kinds in which the peer in the given column is the one doing something
_ACTOR_COLUMN = {"send": "src", "beacon": "src", "issue": "src", "proc": "dst", "dup": "dst", "answer": "dst"}


@dataclass(frozen=True)
class TraceEvent:
    line_no: int
    time: float
    kind: str
    src: str
    dst: str
    qid: str
    detail: dict = field(default_factory=dict)
    msg: str | None = None  # "query" or "hit" for send/drop lines

    def ids(self, key: str) -> tuple[int, ...]:
        raw = self.detail.get(key, "")
        return tuple(int(x) for x in raw.split(".")) if raw else ()


def parse_line(line: str, line_no: int = 0) -> TraceEvent:
    parts = line.split()
    if len(parts) < 2:
        raise ValueError(f"line {line_no}: malformed trace line {line!r}")
    time, kind = float(parts[0]), parts[1]
    src, dst, qid = (parts[2:5] + ["-", "-", "-"])[:3]
    rest = parts[5:]
    msg = None
    if rest and "=" not in rest[0]:
        msg, rest = rest[0], rest[1:]
    detail = dict(tok.split("=", 1) for tok in rest)
    return TraceEvent(line_no, time, kind, src, dst, qid, detail, msg)


def parse_trace(text_or_lines) -> list[TraceEvent]:
    lines = text_or_lines.splitlines() if isinstance(text_or_lines, str) else list(text_or_lines)
    return [parse_line(line, no) for no, line in enumerate(lines, 1) if line.strip()]


def validate_trace(events) -> list[str]:
    """Return one message per invariant violation (empty when the trace is clean)."""
    if isinstance(events, str) or (events and isinstance(events[0], str)):
        events = parse_trace(events)
    problems: list[str] = []
    ttl0: dict[str, int] = {}
    origin: dict[str, str] = {}
    processed: dict[tuple[str, str], TraceEvent] = {}
    dead: dict[str, TraceEvent] = {}
    last_time = float("-inf")

    for ev in events:
        at = f"line {ev.line_no}"
        if ev.time < last_time:
            problems.append(f"{at}: time goes backwards ({ev.time} < {last_time})")
        last_time = ev.time

        actor_col = _ACTOR_COLUMN.get(ev.kind)
        actor = getattr(ev, actor_col) if actor_col else None
        if actor is not None and actor in dead:
            problems.append(f"{at}: dead peer {actor} appears in a {ev.kind} event (died on line {dead[actor].line_no})")

        if ev.kind == "death":
            dead[ev.src] = ev
        elif ev.kind == "issue":
            ttl0[ev.qid] = int(ev.detail["ttl"])
            origin[ev.qid] = ev.src
        elif ev.kind == "proc":
            key = (ev.dst, ev.qid)
            if key in processed:
                problems.append(f"{at}: peer {ev.dst} processed query {ev.qid} again (first on line {processed[key].line_no})")
            else:
                processed[key] = ev
            if origin.get(ev.qid) == ev.dst:
                problems.append(f"{at}: origin {ev.dst} processed its own query {ev.qid}")
            problems.extend(_check_ttl(ev, ttl0, at))
            path = ev.ids("path")
            if path and str(path[-1]) != ev.src:
                problems.append(f"{at}: query {ev.qid} arrived from {ev.src} but its path ends at {path[-1]}")
        elif ev.kind == "send" and ev.msg == "query":
            problems.extend(_check_ttl(ev, ttl0, at))
            if int(ev.detail["ttl"]) < 1:
                problems.append(f"{at}: query {ev.qid} forwarded with ttl {ev.detail['ttl']}")
            path = ev.ids("path")
            if path and str(path[-1]) != ev.src:
                problems.append(f"{at}: query {ev.qid} sent by {ev.src} but its path ends at {path[-1]}")
        elif ev.kind == "send" and ev.msg == "hit":
            problems.extend(_check_reverse_path(ev, processed, at))
    return problems


def _check_ttl(ev: TraceEvent, ttl0: dict, at: str) -> list[str]:
    if ev.qid not in ttl0:
        return [f"{at}: query {ev.qid} seen before it was issued"]
    ttl, hops = int(ev.detail["ttl"]), len(ev.ids("path")) - 1
    if ttl != ttl0[ev.qid] - hops:
        return [f"{at}: query {ev.qid} has ttl {ttl} after {hops} hops, expected {ttl0[ev.qid] - hops}"]
    return []


def _check_reverse_path(ev: TraceEvent, processed: dict, at: str) -> list[str]:
    responder = ev.detail["responder"]
    proc = processed.get((responder, ev.qid))
    if proc is None:
        return [f"{at}: hit for query {ev.qid} from {responder}, which never processed it"]
    full = tuple(reversed(proc.ids("path")))
    route = ev.ids("route")
    hops_done = len(full) - len(route)
    if not route or hops_done < 0 or full[hops_done:] != route:
        return [f"{at}: hit route {route} is not a suffix of the reverse path {full}"]
    expected_src = responder if hops_done == 0 else str(full[hops_done - 1])
    problems = []
    if ev.src != expected_src:
        problems.append(f"{at}: hit for query {ev.qid} sent by {ev.src}, expected {expected_src}")
    if ev.dst != str(route[0]):
        problems.append(f"{at}: hit for query {ev.qid} sent to {ev.dst}, expected {route[0]}")
    return problems
