"""Keyword search over patent text and MPR ranking of domains.

Text is lowercased and tokenized as maximal [a-z0-9]+ runs, then each
token is stemmed by an ordered suffix-rule table (first applicable rule
wins; a rule applies only when the stemmed result keeps at least three
characters):

    izations -> ize    ization -> ize
    ations   -> ate    ation   -> ate
    ings     -> (cut)  ing     -> (cut)
    ies      -> y      ied     -> y
    es       -> (cut)  ed      -> (cut)
    e        -> (cut)  s       -> (cut, but never after a double s)

Queries intersect the posting sets of their tokens (AND semantics).
A query's patent set Q is scored against each candidate domain D by
MPR = (precision + recall) / 2 with precision = |Q and D| / |D| and
recall = |Q and D| / |Q|; ranking is by MPR descending, ties broken by
larger intersection and then lexicographic domain code.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import CorpusStore
from .ratemodel import RateEstimate

TOKEN_RE = re.compile(r"[a-z0-9]+")

_MIN_STEM = 3

SUFFIX_RULES: tuple[tuple[str, str], ...] = (
    ("izations", "ize"),
    ("ization", "ize"),
    ("ations", "ate"),
    ("ation", "ate"),
    ("ings", ""),
    ("ing", ""),
    ("ies", "y"),
    ("ied", "y"),
    ("es", ""),
    ("ed", ""),
    ("e", ""),
    ("s", ""),
)


class EmptyQueryError(ValueError):
    """Raised when a query has no tokens after normalization."""


def stem(token: str) -> str:
    """Apply the first suffix rule that leaves a stem of length >= 3."""
    for suffix, replacement in SUFFIX_RULES:
        if not token.endswith(suffix):
            continue
        if suffix == "s" and token.endswith("ss"):
            continue
        candidate = token[: len(token) - len(suffix)] + replacement
        if len(candidate) >= _MIN_STEM:
            return candidate
    return token


def tokenize(text: str) -> list[str]:
    """Lowercase, split into alphanumeric runs, and stem each run."""
    return [stem(token) for token in TOKEN_RE.findall(text.lower())]


@dataclass
class InvertedIndex:
    """Token -> patent-id postings over titles and abstracts."""

    postings: dict[str, set[str]] = field(default_factory=dict)
    patent_count: int = 0
    skipped_empty: int = 0

    def vocabulary_size(self) -> int:
        return len(self.postings)

    def to_json(self) -> dict:
        return {
            "patent_count": self.patent_count,
            "skipped_empty": self.skipped_empty,
            "postings": {t: sorted(ids) for t, ids in sorted(self.postings.items())},
        }

    @classmethod
    def from_json(cls, payload: dict) -> "InvertedIndex":
        return cls(
            postings={t: set(ids) for t, ids in payload["postings"].items()},
            patent_count=payload["patent_count"],
            skipped_empty=payload["skipped_empty"],
        )

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            json.dump(self.to_json(), fh, sort_keys=True, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path: str | Path) -> "InvertedIndex":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def build_index(store: CorpusStore) -> InvertedIndex:
    """Index every patent's title and abstract."""
    index = InvertedIndex(patent_count=len(store.patents))
    for pid in store.sorted_ids():
        record = store.patents[pid]
        tokens = set(tokenize(record.title)) | set(tokenize(record.abstract))
        if not tokens:
            index.skipped_empty += 1
            continue
        for token in tokens:
            index.postings.setdefault(token, set()).add(pid)
    return index


def search(index: InvertedIndex, query: str) -> frozenset[str]:
    """Patent ids matching every token of the query (AND semantics)."""
    tokens = tokenize(query)
    if not tokens:
        raise EmptyQueryError(f"query {query!r} has no searchable tokens")
    result: set[str] | None = None
    for token in dict.fromkeys(tokens):
        ids = index.postings.get(token, set())
        result = set(ids) if result is None else result & ids
        if not result:
            return frozenset()
    return frozenset(result or ())


def mpr(query_size: int, domain_size: int, intersection: int) -> tuple[float, float, float]:
    """(precision, recall, mpr) for one query/domain pair.

    Precision is taken on the domain side (how much of the domain the
    query covers), recall on the query side, making the measure symmetric
    under exchange of the two sets.
    """
    if query_size <= 0 or domain_size <= 0:
        raise ValueError("query and domain must both be non-empty")
    if intersection < 0 or intersection > min(query_size, domain_size):
        raise ValueError("impossible intersection size")
    precision = intersection / domain_size
    recall = intersection / query_size
    return precision, recall, (precision + recall) / 2.0


@dataclass(frozen=True)
class DomainMatch:
    code: str
    matched_count: int
    size: int
    precision: float
    recall: float
    mpr: float
    rate: RateEstimate | None = None


def rank_domains(
    query_ids: frozenset[str] | set[str],
    domain_patents: dict[str, frozenset[str] | set[str]],
    rates: dict[str, RateEstimate] | None = None,
    top_n: int = 5,
) -> list[DomainMatch]:
    """Top domains by MPR against the query's patent set.

    Only domains with a non-empty intersection are candidates. Ties in
    MPR break toward the larger intersection, then the smaller code.
    """
    if not query_ids:
        return []
    if top_n < 1:
        raise ValueError("top_n must be positive")
    rates = rates or {}
    matches = []
    for code in sorted(domain_patents):
        patents = domain_patents[code]
        if not patents:
            continue
        intersection = len(query_ids & patents)
        if intersection == 0:
            continue
        precision, recall, score = mpr(len(query_ids), len(patents), intersection)
        matches.append(
            DomainMatch(code, intersection, len(patents), precision, recall, score,
                        rates.get(code))
        )
    matches.sort(key=lambda match: (-match.mpr, -match.matched_count, match.code))
    return matches[:top_n]


@dataclass(frozen=True)
class PatentSample:
    """Two views into a domain: most central patents and a random draw."""

    top_central: tuple[str, ...]
    random: tuple[str, ...]
    seed: int


def sample_patents(
    patents: frozenset[str] | set[str],
    percentile_of: dict[str, float],
    seed: int,
    k: int = 20,
) -> PatentSample:
    """min(k, size) top-centrality ids plus a seeded uniform random draw.

    The top list orders scored patents by percentile descending (ties by
    id) and appends unscored patents, by id, only when scored ones run
    out. The random draw is uniform without replacement over the whole
    domain and depends only on (sorted ids, seed).
    """
    ids = sorted(patents)
    if not ids:
        return PatentSample((), (), seed)
    count = min(k, len(ids))

    def top_key(pid: str):
        percentile = percentile_of.get(pid)
        if percentile is None:
            return (1, 0.0, pid)
        return (0, -percentile, pid)

    top = tuple(sorted(ids, key=top_key)[:count])
    rng = np.random.default_rng(seed)
    chosen = rng.choice(len(ids), size=count, replace=False)
    random_ids = tuple(ids[i] for i in sorted(chosen.tolist()))
    return PatentSample(top, random_ids, seed)
