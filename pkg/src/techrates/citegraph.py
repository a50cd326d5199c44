"""Time-truncated citation snapshots and node-pair path centrality.

A snapshot keeps every patent granted up to a cutoff year, with nodes
stored in ascending (grant_year, patent_id) order. Arcs run from the
citing (later) node to the cited (earlier) node; any arc that would point
from an earlier node to a later one under that total order is dropped
during construction, which guarantees acyclicity and makes snapshots at
increasing cutoffs strictly nested.

The centrality of a node v is n_minus(v) * n_plus(v), where n_minus
counts the nodes that can reach v (v included) and n_plus the nodes v
can reach (v included). Equivalently it is the number of ordered source,
sink pairs whose connecting paths pass through v.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .corpus import CorpusStore


@dataclass(frozen=True)
class SpnpScore:
    patent_id: str
    cutoff_year: int
    n_minus: int
    n_plus: int
    value: int


class CitationDag:
    """Acyclic citation snapshot with arrays index-aligned to node order."""

    def __init__(
        self,
        patent_ids: list[str],
        years: np.ndarray,
        citing: np.ndarray,
        cited: np.ndarray,
        cutoff_year: int,
        dropped_arcs: int,
    ):
        self.patent_ids = patent_ids
        self.years = years
        self.citing = citing
        self.cited = cited
        self.cutoff_year = cutoff_year
        self.dropped_arcs = dropped_arcs
        self.index_of = {pid: i for i, pid in enumerate(patent_ids)}

    @property
    def n(self) -> int:
        return len(self.patent_ids)

    @property
    def m(self) -> int:
        return int(self.citing.shape[0])

    def topo_order(self) -> np.ndarray:
        """Node indices ordered so every arc goes from earlier to later."""
        return np.arange(self.n - 1, -1, -1, dtype=np.int64)


def build_snapshot(store: CorpusStore, cutoff_year: int) -> CitationDag:
    """Snapshot of all patents granted in or before ``cutoff_year``."""
    members = sorted(
        (pid for pid, p in store.patents.items() if p.grant_year <= cutoff_year),
        key=lambda pid: (store.patents[pid].grant_year, pid),
    )
    index = {pid: i for i, pid in enumerate(members)}
    years = np.fromiter(
        (store.patents[pid].grant_year for pid in members), dtype=np.int64, count=len(members)
    )
    citing_list: list[int] = []
    cited_list: list[int] = []
    dropped = 0
    for c in store.citations:
        ci = index.get(c.citing_id)
        cj = index.get(c.cited_id)
        if ci is None or cj is None:
            continue
        if ci > cj:
            citing_list.append(ci)
            cited_list.append(cj)
        else:
            dropped += 1
    citing = np.asarray(citing_list, dtype=np.int64)
    cited = np.asarray(cited_list, dtype=np.int64)
    return CitationDag(members, years, citing, cited, cutoff_year, dropped)


def compute_reach_counts(dag: CitationDag) -> tuple[np.ndarray, np.ndarray]:
    """(n_minus, n_plus) arrays for every node of the snapshot."""
    n = dag.n
    n_minus = np.ones(n, dtype=np.int64)
    n_plus = np.ones(n, dtype=np.int64)
    if n == 0:
        return n_minus, n_plus
    if dag.m == 0:
        return n_minus, n_plus
    words = (n + 63) >> 6
    bits = np.zeros((n, words), dtype=np.uint64)
    indptr = np.zeros(n + 1, dtype=np.int64)
    slots = np.empty(dag.m, dtype=np.int64)
    targets = np.empty(dag.m, dtype=np.int64)

    _kernels._csr_group(dag.citing, n, indptr, slots)
    targets[:] = dag.cited[slots]
    _kernels.reach_counts(n, indptr, targets, False, bits, n_plus)

    _kernels._csr_group(dag.cited, n, indptr, slots)
    targets[:] = dag.citing[slots]
    _kernels.reach_counts(n, indptr, targets, True, bits, n_minus)
    return n_minus, n_plus


def spnp_values(dag: CitationDag) -> np.ndarray:
    """Centrality value per node, index-aligned with dag.patent_ids."""
    n_minus, n_plus = compute_reach_counts(dag)
    return n_minus * n_plus


def spnp(dag: CitationDag) -> list[SpnpScore]:
    """Centrality of every node of the snapshot as records."""
    n_minus, n_plus = compute_reach_counts(dag)
    return [
        SpnpScore(
            pid, dag.cutoff_year, int(n_minus[i]), int(n_plus[i]),
            int(n_minus[i]) * int(n_plus[i]),
        )
        for i, pid in enumerate(dag.patent_ids)
    ]


_BRUTE_FORCE_LIMIT = 20


def brute_force_spnp(dag: CitationDag) -> list[SpnpScore]:
    """Reference centrality by explicit ordered-pair enumeration.

    Counts, for each node v, the ordered pairs (u, w) with u reaching v
    and v reaching w, both directions inclusive of v itself. Quadratic in
    nodes and only intended as a test oracle; refuses snapshots larger
    than 20 nodes.
    """
    n = dag.n
    if n > _BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force oracle is limited to {_BRUTE_FORCE_LIMIT} nodes, got {n}")
    children: list[set[int]] = [set() for _ in range(n)]
    for a in range(dag.m):
        children[int(dag.citing[a])].add(int(dag.cited[a]))

    def reachable_from(v: int) -> set[int]:
        seen = {v}
        stack = [v]
        while stack:
            node = stack.pop()
            for child in children[node]:
                if child not in seen:
                    seen.add(child)
                    stack.append(child)
        return seen

    down = [reachable_from(v) for v in range(n)]
    scores = []
    for v in range(n):
        ancestors = sum(1 for u in range(n) if v in down[u])
        descendants = len(down[v])
        pairs = 0
        for u in range(n):
            if v not in down[u]:
                continue
            for w in range(n):
                if w in down[v]:
                    pairs += 1
        assert pairs == ancestors * descendants
        scores.append(SpnpScore(dag.patent_ids[v], dag.cutoff_year, ancestors, descendants, pairs))
    return scores
