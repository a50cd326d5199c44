"""Degree- and age-preserving citation rewiring and score normalization.

Arcs are partitioned into swap buckets keyed by (citing grant year, cited
grant year, citing main class, within-class flag); cited endpoints are
then shuffled by rejection-sampled pairwise swaps inside each bucket.
Because every arc of a bucket shares that key, any duplicate a proposed
swap could create must already live in the same bucket, so duplicate
detection never needs to look outside it. The construction preserves,
exactly and per patent: in-degree, out-degree, the (citing year, cited
year) histogram, and the number of outgoing within-main-class citations.

Replicate r of a null ensemble uses sub-seed ``seed XOR r``. Observed
values are reduced to z-scores against the ensemble (population std;
a degenerate ensemble yields z = 0) and then to per-cohort average-rank
percentiles in (0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from . import _kernels
from .citegraph import CitationDag, spnp_values
from .corpus import CorpusStore

UNCLASSIFIED = ""


@dataclass(frozen=True)
class SwapBucket:
    citing_year: int
    cited_year: int
    citing_class: str
    within_class: bool
    citations: tuple[tuple[str, str], ...]

    @property
    def key(self) -> tuple[int, int, str, bool]:
        return (self.citing_year, self.cited_year, self.citing_class, self.within_class)

    @property
    def size(self) -> int:
        return len(self.citations)


@dataclass(frozen=True)
class NullDistribution:
    patent_id: str
    mean: float
    std: float
    replicate_count: int


@dataclass(frozen=True)
class NormalizedCentrality:
    patent_id: str
    cohort_year: int
    z: float
    percentile: float


@dataclass(frozen=True)
class DomainCentrality:
    code: str
    mean_percentile: float
    scored_count: int
    unscored_count: int


def _node_classes(dag: CitationDag, store: CorpusStore) -> tuple[np.ndarray, list[str]]:
    """Main class per node as integer codes; patents without one share ''."""
    labels = [store.patents[pid].main_class or UNCLASSIFIED for pid in dag.patent_ids]
    classes = sorted(set(labels))
    code_of = {label: i for i, label in enumerate(classes)}
    codes = np.fromiter((code_of[l] for l in labels), dtype=np.int64, count=len(labels))
    return codes, classes


def _bucket_arrays(
    dag: CitationDag, class_codes: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Group arc indices by bucket. Returns (order, ptr, first_arc_per_bucket)."""
    m = dag.m
    if m == 0:
        return (
            np.empty(0, dtype=np.int64),
            np.zeros(1, dtype=np.int64),
            np.empty(0, dtype=np.int64),
        )
    years = dag.years
    y0 = int(years.min())
    span = int(years.max()) - y0 + 1
    n_classes = int(class_codes.max()) + 1
    ycit = years[dag.citing] - y0
    yced = years[dag.cited] - y0
    cls = class_codes[dag.citing]
    within = (class_codes[dag.citing] == class_codes[dag.cited]).astype(np.int64)
    key = ((ycit * span + yced) * n_classes + cls) * 2 + within
    order = np.argsort(key, kind="stable").astype(np.int64)
    sorted_keys = key[order]
    boundaries = np.flatnonzero(np.diff(sorted_keys)) + 1
    ptr = np.concatenate(([0], boundaries, [m])).astype(np.int64)
    first_arc = order[ptr[:-1]]
    return order, ptr, first_arc


def build_buckets(dag: CitationDag, store: CorpusStore) -> list[SwapBucket]:
    """The swap buckets of a snapshot, sorted by key."""
    class_codes, _ = _node_classes(dag, store)
    order, ptr, _ = _bucket_arrays(dag, class_codes)
    labels = [store.patents[pid].main_class or UNCLASSIFIED for pid in dag.patent_ids]
    buckets = []
    for b in range(len(ptr) - 1):
        arcs = order[ptr[b] : ptr[b + 1]]
        first = int(arcs[0])
        citing_node = int(dag.citing[first])
        cited_node = int(dag.cited[first])
        pairs = tuple(
            (dag.patent_ids[int(dag.citing[a])], dag.patent_ids[int(dag.cited[a])])
            for a in arcs
        )
        buckets.append(
            SwapBucket(
                citing_year=int(dag.years[citing_node]),
                cited_year=int(dag.years[cited_node]),
                citing_class=labels[citing_node],
                within_class=labels[citing_node] == labels[cited_node],
                citations=pairs,
            )
        )
    return sorted(buckets, key=lambda bucket: bucket.key)


@dataclass
class RewireResult:
    dag: CitationDag
    attempts: int
    rejected: int


def rewire(
    dag: CitationDag, store: CorpusStore, seed: int, swap_factor: float = 10.0
) -> RewireResult:
    """One rewired copy of a snapshot (observed arcs are never mutated)."""
    if dag.m == 0:
        clone = CitationDag(
            dag.patent_ids, dag.years, dag.citing.copy(), dag.cited.copy(),
            dag.cutoff_year, dag.dropped_arcs,
        )
        return RewireResult(clone, 0, 0)
    class_codes, _ = _node_classes(dag, store)
    order, ptr, _ = _bucket_arrays(dag, class_codes)
    sizes = np.diff(ptr)
    cap = _kernels.table_capacity(int(sizes.max()))
    key_table = np.zeros(cap, dtype=np.uint64)
    gen_table = np.zeros(cap, dtype=np.int64)
    attempts = np.zeros(len(sizes), dtype=np.int64)
    rejected = np.zeros(len(sizes), dtype=np.int64)
    cited = dag.cited.copy()
    _kernels.rewire_buckets(
        dag.citing, cited, order, ptr, dag.n, float(swap_factor),
        np.uint64(seed & 0xFFFFFFFFFFFFFFFF), key_table, gen_table,
        np.int64(0), attempts, rejected,
    )
    clone = CitationDag(
        dag.patent_ids, dag.years, dag.citing.copy(), cited, dag.cutoff_year, dag.dropped_arcs
    )
    return RewireResult(clone, int(attempts.sum()), int(rejected.sum()))


@dataclass
class NullDiagnostics:
    """Rejection behaviour of the swap chain, grouped by bucket-size decile."""

    bucket_count: int
    arc_count: int
    max_bucket_size: int
    replicates: int
    deciles: list[dict]

    def to_json(self) -> dict:
        return {
            "bucket_count": self.bucket_count,
            "arc_count": self.arc_count,
            "max_bucket_size": self.max_bucket_size,
            "replicates": self.replicates,
            "rejection_by_size_decile": self.deciles,
        }


class NullSummary:
    """Per-node ensemble mean and std, aligned with the snapshot's nodes."""

    def __init__(
        self,
        dag: CitationDag,
        mean: np.ndarray,
        std: np.ndarray,
        replicates: int,
        diagnostics: NullDiagnostics,
    ):
        self.dag = dag
        self.mean = mean
        self.std = std
        self.replicates = replicates
        self.diagnostics = diagnostics

    def records(self) -> list[NullDistribution]:
        return [
            NullDistribution(pid, float(self.mean[i]), float(self.std[i]), self.replicates)
            for i, pid in enumerate(self.dag.patent_ids)
        ]


def _decile_table(sizes: np.ndarray, attempts: np.ndarray, rejected: np.ndarray) -> list[dict]:
    if sizes.size == 0:
        return []
    edges = np.quantile(sizes, np.linspace(0.1, 0.9, 9))
    which = np.searchsorted(edges, sizes, side="right")
    table = []
    for d in range(10):
        mask = which == d
        if not mask.any():
            continue
        att = int(attempts[mask].sum())
        rej = int(rejected[mask].sum())
        table.append(
            {
                "decile": d + 1,
                "buckets": int(mask.sum()),
                "min_size": int(sizes[mask].min()),
                "max_size": int(sizes[mask].max()),
                "attempts": att,
                "rejected": rej,
                "rejection_rate": (rej / att) if att else 0.0,
            }
        )
    return table


def null_distribution(
    dag: CitationDag,
    store: CorpusStore,
    replicates: int = 1000,
    seed: int = 0,
    swap_factor: float = 10.0,
) -> NullSummary:
    """Monte Carlo null ensemble of the snapshot's centrality values.

    Generates ``replicates`` rewired copies (sub-seed = seed XOR r) and
    returns each node's ensemble mean and population standard deviation.
    """
    if replicates < 1:
        raise ValueError("replicates must be a positive integer")
    n = dag.n
    if dag.m == 0:
        diag = NullDiagnostics(0, 0, 0, replicates, [])
        return NullSummary(
            dag, np.ones(n, dtype=np.float64), np.zeros(n, dtype=np.float64), replicates, diag
        )
    class_codes, _ = _node_classes(dag, store)
    order, ptr, _ = _bucket_arrays(dag, class_codes)
    sizes = np.diff(ptr)
    cap = _kernels.table_capacity(int(sizes.max()))
    key_table = np.zeros(cap, dtype=np.uint64)
    gen_table = np.zeros(cap, dtype=np.int64)
    sums, sumsq, attempts, rejected = _kernels.null_accumulate(
        n, dag.citing, dag.cited, order, ptr, float(swap_factor),
        np.uint64(seed & 0xFFFFFFFFFFFFFFFF), int(replicates), key_table, gen_table,
    )
    mean = sums / replicates
    variance = np.maximum(sumsq / replicates - mean * mean, 0.0)
    std = np.sqrt(variance)
    diag = NullDiagnostics(
        bucket_count=int(sizes.size),
        arc_count=dag.m,
        max_bucket_size=int(sizes.max()),
        replicates=replicates,
        deciles=_decile_table(sizes, attempts, rejected),
    )
    return NullSummary(dag, mean, std, replicates, diag)


def zscore(observed: float, mean: float, std: float, epsilon: float = 1e-9) -> float:
    """Standardize one observation; a degenerate null (std = 0) gives 0."""
    if std == 0.0:
        return 0.0
    return (observed - mean) / max(std, epsilon)


def zscores(
    observed: np.ndarray, mean: np.ndarray, std: np.ndarray, epsilon: float = 1e-9
) -> np.ndarray:
    """Vectorized zscore over aligned arrays."""
    denominator = np.maximum(std, epsilon)
    raw = (np.asarray(observed, dtype=np.float64) - mean) / denominator
    return np.where(std == 0.0, 0.0, raw)


def rank_percentile(
    scored: list[tuple[str, int, float]]
) -> list[NormalizedCentrality]:
    """Average-rank percentile of z within each cohort year.

    Input triples are (patent_id, cohort_year, z). Percentiles are
    average rank divided by cohort size, so they lie in (0, 1] and tie
    groups share one value. Output is sorted by (cohort_year, patent_id).
    """
    by_cohort: dict[int, list[tuple[str, float]]] = {}
    for pid, year, z in scored:
        by_cohort.setdefault(year, []).append((pid, z))
    out: list[NormalizedCentrality] = []
    for year in sorted(by_cohort):
        rows = sorted(by_cohort[year])
        values = np.array([z for _, z in rows], dtype=np.float64)
        ranks = rankdata(values, method="average")
        m = len(rows)
        for (pid, z), rank in zip(rows, ranks):
            out.append(NormalizedCentrality(pid, year, float(z), float(rank / m)))
    return out


def domain_mean_centrality(
    domain_patents: dict[str, frozenset[str] | set[str]],
    percentile_of: dict[str, float],
) -> list[DomainCentrality]:
    """Mean normalized centrality per domain over its scored patents.

    Patents without a percentile (cohort beyond the data horizon) are
    excluded from the mean but counted. Domains with no scored patents
    get a NaN mean and must be flagged by the caller.
    """
    out = []
    for code in sorted(domain_patents):
        values = [
            percentile_of[pid]
            for pid in sorted(domain_patents[code])
            if pid in percentile_of
        ]
        total = len(domain_patents[code])
        scored = len(values)
        mean = float(np.mean(values)) if values else float("nan")
        out.append(DomainCentrality(code, mean, scored, total - scored))
    return out
