"""Synthetic shared-document corpus and query stream.

The vocabulary is split into disjoint topic pools. Documents and queries
each pick one topic (Zipf-distributed) and draw distinct terms from its pool,
so queries about popular topics recur and learned profiles carry signal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .context import QueryVector, cosine
from .errors import ValidationError


@dataclass
class WorkloadConfig:
    vocab_size: int = 120
    topics: int = 12
    docs_per_peer: int = 10
    terms_per_doc: int = 3
    terms_per_query: int = 2
    queries_total: int = 200
    query_rate: float = 0.68
    zipf_s: float = 1.0
    theta: float = 0.7

    def validate(self) -> list[str]:
        problems = []
        for name in ("vocab_size", "topics", "docs_per_peer", "terms_per_doc", "terms_per_query"):
            if getattr(self, name) < 1:
                problems.append(f"workload.{name} must be >= 1")
        if self.queries_total < 0:
            problems.append("workload.queries_total must be >= 0")
        if not self.query_rate > 0:
            problems.append("workload.query_rate must be > 0")
        if self.zipf_s < 0:
            problems.append("workload.zipf_s must be >= 0")
        if not 0 < self.theta <= 1:
            problems.append("workload.theta must be in (0, 1]")
        if self.topics >= 1 and self.vocab_size >= 1:
            pool = self.vocab_size // self.topics
            if pool < max(self.terms_per_doc, self.terms_per_query):
                problems.append(
                    f"workload.vocab_size too small: {pool} terms per topic, "
                    f"need {max(self.terms_per_doc, self.terms_per_query)}"
                )
        return problems


@dataclass(eq=False)
class Document:
    doc_id: int
    vector: QueryVector
    owner: int
    topic: int = -1


@dataclass(eq=False)
class ScheduledQuery:
    vector: QueryVector
    issue_time: float
    issuer_draw: float
    topic: int = -1

    @property
    def qid(self):
        return self.vector.qid

    def issuer(self, alive: list[int]):
        """Pick the issuing peer uniformly among ``alive`` (sorted ids)."""
        if not alive:
            return None
        return alive[min(int(self.issuer_draw * len(alive)), len(alive) - 1)]


def topic_pools(config: WorkloadConfig) -> list[np.ndarray]:
    pool = config.vocab_size // config.topics
    return [np.arange(t * pool, (t + 1) * pool) for t in range(config.topics)]


def zipf_probabilities(n: int, s: float) -> np.ndarray:
    p = 1.0 / np.arange(1, n + 1) ** s
    return p / p.sum()


def _draw_terms(pool, count, rng) -> dict:
    terms = rng.choice(pool, size=count, replace=False)
    return {int(t): 1.0 for t in sorted(terms)}


def generate_corpus(config: WorkloadConfig, n_peers: int, rng: np.random.Generator) -> list[Document]:
    problems = config.validate()
    if problems:
        raise ValidationError(problems)
    pools = topic_pools(config)
    probs = zipf_probabilities(config.topics, config.zipf_s)
    docs = []
    for owner in range(n_peers):
        for _ in range(config.docs_per_peer):
            topic = int(rng.choice(config.topics, p=probs))
            terms = _draw_terms(pools[topic], config.terms_per_doc, rng)
            docs.append(Document(len(docs), QueryVector(terms), owner, topic))
    return docs


def generate_queries(config: WorkloadConfig, rng: np.random.Generator) -> list[ScheduledQuery]:
    """Queries at times 1/rate, 2/rate, ...; the issuer is resolved at issue time."""
    problems = config.validate()
    if problems:
        raise ValidationError(problems)
    pools = topic_pools(config)
    probs = zipf_probabilities(config.topics, config.zipf_s)
    out = []
    for i in range(config.queries_total):
        topic = int(rng.choice(config.topics, p=probs))
        terms = _draw_terms(pools[topic], config.terms_per_query, rng)
        draw = float(rng.random())
        out.append(ScheduledQuery(QueryVector(terms, qid=i), (i + 1) / config.query_rate, draw, topic))
    return out


def relevance(doc: Document, q: QueryVector, theta: float) -> bool:
    return cosine(doc.vector, q) >= theta - 1e-12


def ground_truth(docs, q: QueryVector, theta: float, owners=None, exclude=None) -> set[int]:
    """Brute-force relevant set, optionally restricted to ``owners``."""
    return {
        d.doc_id
        for d in docs
        if (owners is None or d.owner in owners) and d.owner != exclude and relevance(d, q, theta)
    }


def dump_corpus(docs) -> str:
    lines = []
    for d in docs:
        terms = " ".join(f"{t}:{w:g}" for t, w in d.vector.terms.items())
        lines.append(f"{d.doc_id} {d.owner} {terms}")
    return "\n".join(lines) + "\n"
