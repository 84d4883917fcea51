"""Per-run evaluation measures, CSV serialization and cross-seed aggregation."""

from __future__ import annotations

import csv
import io
import math
import statistics
from collections import defaultdict
from dataclasses import dataclass, fields

CSV_FIELDS = (
    "protocol",
    "n_peers",
    "seed",
    "queries_issued",
    "queries_answered",
    "hit_rate",
    "recall_mean",
    "delay_mean_s",
    "messages_total",
    "messages_per_query",
    "hits_lost",
    "drops",
)
CSV_HEADER = ",".join(CSV_FIELDS)

AGGREGATED = ("hit_rate", "recall_mean", "delay_mean_s", "messages_per_query", "hits_lost", "drops")


@dataclass(frozen=True)
class MetricsReport:
    protocol: str
    n_peers: int
    seed: int
    queries_issued: int
    queries_answered: int
    hit_rate: float | None
    recall_mean: float | None
    delay_mean_s: float | None
    messages_total: int
    messages_per_query: float | None
    hits_lost: int
    drops: int

    def to_row(self) -> list[str]:
        return ["" if v is None else repr(v) if isinstance(v, float) else str(v) for v in (getattr(self, f) for f in CSV_FIELDS)]

    @classmethod
    def from_row(cls, row: dict) -> "MetricsReport":
        kw = {}
        for f in fields(cls):
            raw = row[f.name]
            if f.name == "protocol":
                kw[f.name] = raw
            elif raw == "":
                kw[f.name] = None
            elif f.type.startswith("int"):
                kw[f.name] = int(raw)
            else:
                kw[f.name] = float(raw)
        return cls(**kw)


def per_query_recall(discovered, ground_truth) -> float | None:
    """Fraction of ``ground_truth`` found; None when there is nothing to find."""
    ground_truth = set(ground_truth)
    if not ground_truth:
        return None
    return len(ground_truth & set(discovered)) / len(ground_truth)


@dataclass(frozen=True)
class QueryOutcome:
    qid: int
    issue_time: float
    ground_truth: frozenset
    discovered: frozenset
    first_hit: float | None


def build_report(protocol, n_peers, seed, outcomes, messages_total, hits_lost, drops) -> MetricsReport:
    issued = len(outcomes)
    answered = [o for o in outcomes if o.first_hit is not None]
    recalls = [r for r in (per_query_recall(o.discovered, o.ground_truth) for o in outcomes) if r is not None]
    delays = [o.first_hit - o.issue_time for o in answered]
    return MetricsReport(
        protocol=protocol,
        n_peers=n_peers,
        seed=seed,
        queries_issued=issued,
        queries_answered=len(answered),
        hit_rate=len(answered) / issued if issued else None,
        recall_mean=math.fsum(recalls) / len(recalls) if recalls else None,
        delay_mean_s=math.fsum(delays) / len(delays) if delays else None,
        messages_total=messages_total,
        messages_per_query=messages_total / issued if issued else None,
        hits_lost=hits_lost,
        drops=drops,
    )


@dataclass(frozen=True)
class Summary:
    mean: float | None
    std: float | None
    count: int


def summarize(values) -> Summary:
    vals = [float(v) for v in values if v is not None]
    if not vals:
        return Summary(None, None, 0)
    return Summary(statistics.fmean(vals), statistics.stdev(vals) if len(vals) > 1 else None, len(vals))


def aggregate(reports, metrics=AGGREGATED) -> dict:
    """``{(protocol, n_peers): {metric: Summary}}``; absent values are skipped."""
    if not reports:
        raise ValueError("aggregate() needs at least one report")
    groups = defaultdict(list)
    for r in reports:
        groups[(r.protocol, r.n_peers)].append(r)
    return {key: {m: summarize(getattr(r, m) for r in rs) for m in metrics} for key, rs in sorted(groups.items())}


def write_csv(reports, fh, header: bool = True) -> None:
    w = csv.writer(fh, lineterminator="\n")
    if header:
        w.writerow(CSV_FIELDS)
    for r in reports:
        w.writerow(r.to_row())


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    write_csv(reports, buf)
    return buf.getvalue()


def read_csv(fh) -> list[MetricsReport]:
    reader = csv.DictReader(fh)
    if tuple(reader.fieldnames or ()) != CSV_FIELDS:
        raise ValueError(f"unexpected CSV header: {reader.fieldnames}")
    return [MetricsReport.from_row(row) for row in reader]
