"""TOPSIS ranking and AHP weight derivation.

Everything here is a pure function of its inputs. Matrices are numpy arrays
with alternatives on rows and criteria on columns.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Sequence

import numpy as np

from .errors import ValidationError

BENEFIT = "benefit"
COST = "cost"

# Saaty's relative-importance scale (even values are the usual intermediates).
AHP_SCALE = {
    1: "j and k are equally important",
    3: "j is slightly more important than k",
    5: "j is more important than k",
    7: "j is strongly more important than k",
    9: "j is absolutely more important than k",
}

WEIGHT_SUM_TOL = 1e-9
PAIRWISE_TOL = 1e-9
DEGENERATE_TOL = 1e-12


@dataclass(frozen=True)
class CriterionSpec:
    name: str
    kind: str
    weight: float

    def __post_init__(self):
        if self.kind not in (BENEFIT, COST):
            raise ValidationError(f"criterion {self.name!r}: kind must be 'benefit' or 'cost', got {self.kind!r}")
        if not np.isfinite(self.weight) or self.weight < 0:
            raise ValidationError(f"criterion {self.name!r}: weight must be a finite value >= 0")


@dataclass
class DecisionMatrix:
    """m alternatives scored on n criteria."""

    alternatives: list[Hashable]
    criteria: list[CriterionSpec]
    values: np.ndarray

    def __post_init__(self):
        self.alternatives = list(self.alternatives)
        self.criteria = list(self.criteria)
        self.values = np.array(self.values, dtype=float, ndmin=2)
        m, n = len(self.alternatives), len(self.criteria)
        problems = []
        if m < 1 or n < 1:
            problems.append(f"need at least one alternative and one criterion, got {m}x{n}")
        if self.values.shape != (m, n):
            problems.append(f"values shape {self.values.shape} does not match {m} alternatives x {n} criteria")
        elif not np.all(np.isfinite(self.values)):
            problems.append("decision matrix contains non-finite entries")
        elif np.any(self.values < 0):
            problems.append("decision matrix entries must be >= 0")
        if n and abs(sum(c.weight for c in self.criteria) - 1.0) > WEIGHT_SUM_TOL:
            problems.append(f"criterion weights sum to {sum(c.weight for c in self.criteria)!r}, expected 1")
        if problems:
            raise ValidationError(problems)

    @property
    def weights(self) -> np.ndarray:
        return np.array([c.weight for c in self.criteria])

    @property
    def kinds(self) -> list[str]:
        return [c.kind for c in self.criteria]


@dataclass
class RankingResult:
    alternatives: list[Hashable]
    s_plus: np.ndarray
    s_minus: np.ndarray
    closeness: np.ndarray
    rank: np.ndarray = field(repr=False)

    @property
    def order(self) -> list[Hashable]:
        """Alternatives best-first."""
        by_rank = np.argsort(self.rank, kind="stable")
        return [self.alternatives[i] for i in by_rank]

    def top(self, k: int) -> list[Hashable]:
        return self.order[: max(k, 0)]

    def rows(self):
        """Yield ``(alternative, s_plus, s_minus, closeness, rank)`` in input order."""
        for i, alt in enumerate(self.alternatives):
            yield alt, float(self.s_plus[i]), float(self.s_minus[i]), float(self.closeness[i]), int(self.rank[i])


def _as_matrix(values) -> np.ndarray:
    a = np.array(values, dtype=float, ndmin=2)
    if a.ndim != 2:
        raise ValidationError(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix contains non-finite entries")
    return a


def _kinds(criteria) -> list[str]:
    return [c.kind if isinstance(c, CriterionSpec) else c for c in criteria]


def normalize_matrix(X) -> np.ndarray:
    """Vector-normalize each column; an all-zero column stays all-zero."""
    values = X.values if isinstance(X, DecisionMatrix) else _as_matrix(X)
    # prescale by the column max so tiny or huge magnitudes don't under/overflow
    peak = np.abs(values).max(axis=0)
    nonzero = peak > 0
    scaled = values / np.where(nonzero, peak, 1.0)
    norms = np.sqrt(np.sum(scaled**2, axis=0))
    return np.where(nonzero, scaled / np.where(nonzero, norms, 1.0), 0.0)


def apply_weights(R, w) -> np.ndarray:
    R = _as_matrix(R)
    w = np.asarray(w, dtype=float).ravel()
    if w.shape[0] != R.shape[1]:
        raise ValidationError(f"{w.shape[0]} weights for {R.shape[1]} criteria")
    if abs(w.sum() - 1.0) > WEIGHT_SUM_TOL:
        raise ValidationError(f"weights sum to {w.sum()!r}, expected 1")
    return R * w


def ideal_solutions(V, criteria) -> tuple[np.ndarray, np.ndarray]:
    """Positive and negative ideal points of a weighted matrix.

    ``criteria`` may be CriterionSpec objects or bare ``"benefit"``/``"cost"``
    strings.
    """
    V = _as_matrix(V)
    kinds = _kinds(criteria)
    if len(kinds) != V.shape[1]:
        raise ValidationError(f"{len(kinds)} criterion kinds for {V.shape[1]} columns")
    benefit = np.array([k == BENEFIT for k in kinds])
    col_max, col_min = V.max(axis=0), V.min(axis=0)
    a_plus = np.where(benefit, col_max, col_min)
    a_minus = np.where(benefit, col_min, col_max)
    return a_plus, a_minus


def separation_measures(V, a_plus, a_minus) -> tuple[np.ndarray, np.ndarray]:
    V = _as_matrix(V)
    a_plus = np.asarray(a_plus, dtype=float)
    a_minus = np.asarray(a_minus, dtype=float)
    if a_plus.shape != (V.shape[1],) or a_minus.shape != (V.shape[1],):
        raise ValidationError("ideal points must have one entry per criterion")
    s_plus = np.sqrt(np.sum((V - a_plus) ** 2, axis=1))
    s_minus = np.sqrt(np.sum((V - a_minus) ** 2, axis=1))
    return s_plus, s_minus


def relative_closeness(s_plus, s_minus) -> np.ndarray:
    """S- / (S+ + S-), or 0.5 when both distances vanish."""
    s_plus = np.asarray(s_plus, dtype=float)
    s_minus = np.asarray(s_minus, dtype=float)
    total = s_plus + s_minus
    degenerate = total < DEGENERATE_TOL
    rc = np.where(degenerate, 0.5, s_minus / np.where(degenerate, 1.0, total))
    return np.clip(rc, 0.0, 1.0)


def topsis_rank(X: DecisionMatrix, prenormalized: bool = False) -> RankingResult:
    """Rank alternatives by relative closeness, best first.

    With ``prenormalized`` the matrix values are taken as the normalized
    matrix directly. Ties keep input order.
    """
    R = X.values if prenormalized else normalize_matrix(X)
    V = apply_weights(R, X.weights)
    a_plus, a_minus = ideal_solutions(V, X.criteria)
    s_plus, s_minus = separation_measures(V, a_plus, a_minus)
    rc = relative_closeness(s_plus, s_minus)
    order = np.argsort(-rc, kind="stable")
    rank = np.empty(len(rc), dtype=int)
    rank[order] = np.arange(1, len(rc) + 1)
    return RankingResult(X.alternatives, s_plus, s_minus, rc, rank)


def validate_pairwise(P) -> list[str]:
    """Return a list of violated pairwise-matrix conditions (empty when valid)."""
    A = np.array(P, dtype=float, ndmin=2)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        return [f"pairwise matrix must be square, got shape {A.shape}"]
    if not np.all(np.isfinite(A)) or np.any(A <= 0):
        return ["pairwise matrix entries must be finite and positive"]
    problems = []
    n = A.shape[0]
    lo, hi = 1 / 9 - PAIRWISE_TOL, 9 + PAIRWISE_TOL
    for j in range(n):
        if abs(A[j, j] - 1) > PAIRWISE_TOL:
            problems.append(f"diagonal entry ({j + 1},{j + 1}) = {A[j, j]:g}, expected 1")
        for k in range(n):
            if not lo <= A[j, k] <= hi:
                problems.append(f"entry ({j + 1},{k + 1}) = {A[j, k]:g} outside [1/9, 9]")
            if k > j and abs(A[j, k] * A[k, j] - 1) > PAIRWISE_TOL:
                problems.append(
                    f"reciprocity violated at ({j + 1},{k + 1}): {A[j, k]:g} x {A[k, j]:g} != 1"
                )
    return problems


def ahp_weights(P) -> np.ndarray:
    """Criteria weights from a pairwise comparison matrix.

    Columns are divided by their sums, then each row is averaged.
    """
    problems = validate_pairwise(P)
    if problems:
        raise ValidationError(problems)
    A = np.array(P, dtype=float, ndmin=2)
    normalized = A / A.sum(axis=0)
    w = normalized.mean(axis=1)
    return w / w.sum()


def parse_ratio(token: str) -> float:
    """Parse ``"3"``, ``"0.2"`` or ``"1/5"``."""
    try:
        return float(Fraction(token.strip()))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"not a number or ratio: {token!r}") from exc


def criteria_from(names: Sequence[str], kinds: Sequence[str], weights: Sequence[float]) -> list[CriterionSpec]:
    if not len(names) == len(kinds) == len(weights):
        raise ValidationError("criterion names, kinds and weights differ in length")
    return [CriterionSpec(n, k, float(w)) for n, k, w in zip(names, kinds, weights)]


@dataclass
class MatrixFile:
    """Contents of a matrix file; ``pairwise`` is set when weights came from AHP."""

    matrix: DecisionMatrix
    pairwise: np.ndarray | None = None


_KIND_TOKENS = {"b": BENEFIT, "c": COST}


def parse_matrix_text(text: str, source: str = "<matrix>") -> MatrixFile:
    """Parse the plain-text matrix format.

    Layout (blank lines and ``#`` comments are ignored)::

        m n
        b b c ...          criterion kinds, b = benefit, c = cost
        w1 w2 ... wn       or the word ``ahp`` followed by n pairwise rows
        x11 ... x1n        m rows of n nonnegative reals
        ...

    Errors carry the source name and physical line number.
    """
    lines = [(no, raw.split("#", 1)[0].split()) for no, raw in enumerate(text.splitlines(), 1)]
    lines = [(no, toks) for no, toks in lines if toks]
    pos = 0

    def fail(msg, no=None):
        where = f"{source}:{no}" if no is not None else source
        raise ValidationError(f"{where}: {msg}")

    def take(what):
        nonlocal pos
        if pos >= len(lines):
            fail(f"unexpected end of file, expected {what}")
        pos += 1
        return lines[pos - 1]

    def numbers(no, toks, count, what, parse=float):
        if len(toks) != count:
            fail(f"expected {count} {what}, got {len(toks)}", no)
        out = []
        for t in toks:
            try:
                out.append(parse(t))
            except (ValueError, ValidationError):
                fail(f"not a number: {t!r}", no)
        return out

    no, toks = take("header 'm n'")
    m, n = numbers(no, toks, 2, "integers in header 'm n'", int)
    if m < 1 or n < 1:
        fail(f"m and n must be >= 1, got {m} {n}", no)

    no, toks = take("criterion kinds")
    if len(toks) != n:
        fail(f"expected {n} criterion kinds, got {len(toks)}", no)
    bad = [t for t in toks if t.lower() not in _KIND_TOKENS]
    if bad:
        fail(f"criterion kind must be 'b' or 'c', got {bad[0]!r}", no)
    kinds = [_KIND_TOKENS[t.lower()] for t in toks]

    no, toks = take("weights or 'ahp'")
    pairwise = None
    if len(toks) == 1 and toks[0].lower() == "ahp":
        rows = []
        first = None
        for _ in range(n):
            rno, rtoks = take("pairwise matrix row")
            first = first or rno
            rows.append(numbers(rno, rtoks, n, "pairwise entries", parse_ratio))
        pairwise = np.array(rows)
        problems = validate_pairwise(pairwise)
        if problems:
            raise ValidationError([f"{source}:{first}: pairwise matrix: {p}" for p in problems])
        weights = ahp_weights(pairwise)
    else:
        weights = np.array(numbers(no, toks, n, "weights", parse_ratio))
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > WEIGHT_SUM_TOL:
            fail(f"weights must be nonnegative and sum to 1, got sum {weights.sum()!r}", no)

    values = []
    for _ in range(m):
        rno, rtoks = take("matrix row")
        row = numbers(rno, rtoks, n, "values", float)
        if any(not np.isfinite(v) or v < 0 for v in row):
            fail("matrix values must be finite and >= 0", rno)
        values.append(row)
    if pos < len(lines):
        fail(f"trailing content after {m} matrix rows", lines[pos][0])

    criteria = criteria_from([f"c{j + 1}" for j in range(n)], kinds, weights)
    return MatrixFile(DecisionMatrix([f"n{i + 1}" for i in range(m)], criteria, np.array(values)), pairwise)
