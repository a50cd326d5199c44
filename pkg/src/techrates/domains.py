"""Decomposition of a patent corpus into class-pair technological domains.

Every (UPC class, IPC class) pair whose member sets intersect is a
candidate domain. The pipeline is:

1. compute_overlaps: actual intersection per pair (zero overlaps skipped)
2. noise_filter: keep pairs whose actual overlap exceeds the expected
   overlap under independence, upc_size * ipc_size / total_patents
3. deduplicate: assign each patent to its largest surviving overlap
   (ties to the lexicographically smallest pair code), so surviving
   domains partition the covered patents
4. size_filter: mark domains below the minimum size as discarded

A domain's code is the UPC label concatenated with the IPC label.
coverage_report summarizes the outcome: size-band histogram, validated
share of possible pairs, and a patent conservation account in which each
patent is exactly one of assigned / noise_lost / no_overlap.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .corpus import CorpusStore, IPC, UPC


class DomainStatus(str, Enum):
    VALID = "valid"
    DISCARDED_NOISE = "discarded_noise"
    DISCARDED_SMALL = "discarded_small"
    EMPTIED = "emptied"


@dataclass(frozen=True)
class ClassPairKey:
    upc_label: str
    ipc_label: str

    @property
    def code(self) -> str:
        return f"{self.upc_label}{self.ipc_label}"


@dataclass(frozen=True)
class OverlapSet:
    key: ClassPairKey
    patents: frozenset[str]
    expected_overlap: float

    @property
    def actual_overlap(self) -> int:
        return len(self.patents)


@dataclass(frozen=True)
class Domain:
    key: ClassPairKey
    patents: frozenset[str]
    pre_dedup_size: int
    expected_overlap: float
    status: DomainStatus

    @property
    def code(self) -> str:
        return self.key.code

    @property
    def size(self) -> int:
        return len(self.patents)


def expected_overlap(upc_size: int, ipc_size: int, total_patents: int) -> float:
    """Expected intersection size if class memberships were independent."""
    if total_patents <= 0:
        raise ValueError("total_patents must be positive")
    if upc_size < 0 or ipc_size < 0:
        raise ValueError("class sizes cannot be negative")
    return (upc_size * ipc_size) / total_patents


def compute_overlaps(store: CorpusStore) -> list[OverlapSet]:
    """All class pairs with a non-empty intersection, sorted by code.

    Iterates patents rather than the full pair cross product, so pairs
    with zero overlap never materialize (their count is recoverable as
    possible pairs minus returned pairs).
    """
    total = len(store.patents)
    upc_members: dict[str, set[str]] = {}
    ipc_members: dict[str, set[str]] = {}
    pair_members: dict[tuple[str, str], set[str]] = {}
    for pid in store.sorted_ids():
        upc_labels = store.upc_memberships.get(pid, ())
        ipc_labels = store.ipc_memberships.get(pid, ())
        for u in upc_labels:
            upc_members.setdefault(u, set()).add(pid)
        for c in ipc_labels:
            ipc_members.setdefault(c, set()).add(pid)
        for u in upc_labels:
            for c in ipc_labels:
                pair_members.setdefault((u, c), set()).add(pid)
    out = []
    for (u, c), members in pair_members.items():
        expected = expected_overlap(len(upc_members[u]), len(ipc_members[c]), total)
        out.append(OverlapSet(ClassPairKey(u, c), frozenset(members), expected))
    out.sort(key=lambda o: o.key.code)
    return out


@dataclass
class NoisePartition:
    surviving: list[OverlapSet]
    discarded: list[OverlapSet]
    patents_lost: int
    patents_lost_fraction: float


def noise_filter(overlaps: list[OverlapSet], total_patents: int) -> NoisePartition:
    """Keep pairs whose actual overlap strictly exceeds the expected one.

    Patents lost to noise are those appearing only in discarded pairs.
    """
    surviving = [o for o in overlaps if o.actual_overlap > o.expected_overlap]
    discarded = [o for o in overlaps if o.actual_overlap <= o.expected_overlap]
    covered_before = set()
    for o in overlaps:
        covered_before.update(o.patents)
    covered_after: set[str] = set()
    for o in surviving:
        covered_after.update(o.patents)
    lost = len(covered_before) - len(covered_after)
    fraction = lost / total_patents if total_patents else 0.0
    return NoisePartition(surviving, discarded, lost, fraction)


def deduplicate(surviving: list[OverlapSet]) -> tuple[list[Domain], dict[str, str]]:
    """Assign each covered patent to its largest surviving overlap.

    Ties break to the lexicographically smallest pair code. Overlaps
    whose patents were all claimed elsewhere are kept with EMPTIED
    status. Returns (domains sorted by code, patent -> code assignment).
    """
    ranked: dict[str, tuple[int, str]] = {}
    by_code = {o.key.code: o for o in surviving}
    assignment: dict[str, str] = {}
    for code in sorted(by_code):
        o = by_code[code]
        for pid in o.patents:
            contender = (-o.actual_overlap, code)
            if pid not in ranked or contender < ranked[pid]:
                ranked[pid] = contender
    for pid, (_, code) in ranked.items():
        assignment[pid] = code
    members: dict[str, set[str]] = {code: set() for code in by_code}
    for pid, code in assignment.items():
        members[code].add(pid)
    domains = []
    for code in sorted(by_code):
        o = by_code[code]
        kept = frozenset(members[code])
        status = DomainStatus.EMPTIED if not kept else DomainStatus.VALID
        domains.append(
            Domain(o.key, kept, o.actual_overlap, o.expected_overlap, status)
        )
    return domains, assignment


def size_filter(domains: list[Domain], min_size: int = 100) -> list[Domain]:
    """Demote non-empty domains smaller than ``min_size`` to DISCARDED_SMALL."""
    out = []
    for d in domains:
        if d.status is DomainStatus.VALID and d.size < min_size:
            d = Domain(d.key, d.patents, d.pre_dedup_size, d.expected_overlap,
                       DomainStatus.DISCARDED_SMALL)
        out.append(d)
    return out


SIZE_BANDS = ((1, 9), (10, 99), (100, 999), (1000, 9999), (10000, None))


def _band_label(lo: int, hi: int | None) -> str:
    return f"{lo}-{hi}" if hi is not None else f"{lo}+"


@dataclass
class CoverageReport:
    total_patents: int
    possible_pairs: int
    nonzero_pairs: int
    surviving_pairs: int
    valid_domains: int
    valid_fraction_of_possible: float
    valid_patent_fraction: float
    assigned_patents: int
    assigned_to_valid: int
    noise_lost_patents: int
    noise_lost_fraction: float
    no_overlap_patents: int
    size_bands: list[dict]

    @property
    def size_histogram(self) -> dict[str, int]:
        return {band["band"]: band["domains"] for band in self.size_bands}

    def to_json(self) -> dict:
        return {
            "total_patents": self.total_patents,
            "possible_pairs": self.possible_pairs,
            "nonzero_pairs": self.nonzero_pairs,
            "surviving_pairs": self.surviving_pairs,
            "valid_domains": self.valid_domains,
            "valid_fraction_of_possible": self.valid_fraction_of_possible,
            "valid_patent_fraction": self.valid_patent_fraction,
            "patents": {
                "assigned": self.assigned_patents,
                "assigned_to_valid": self.assigned_to_valid,
                "noise_lost": self.noise_lost_patents,
                "noise_lost_fraction": self.noise_lost_fraction,
                "no_overlap": self.no_overlap_patents,
            },
            "size_bands": list(self.size_bands),
        }


@dataclass
class Decomposition:
    overlaps: list[OverlapSet]
    noise: NoisePartition
    domains: list[Domain]
    assignment: dict[str, str]
    coverage: CoverageReport

    def valid_domains(self) -> list[Domain]:
        return [d for d in self.domains if d.status is DomainStatus.VALID]


def coverage_report(
    store: CorpusStore,
    overlaps: list[OverlapSet],
    noise: NoisePartition,
    domains: list[Domain],
    assignment: dict[str, str],
) -> CoverageReport:
    """Size-band breakdown plus a patent conservation account.

    Bands partition the non-empty post-dedup domains by size; each band
    reports its domain count, that count as a fraction of all possible
    class pairs, and the number and fraction of patents it holds. Because
    dedup makes domains disjoint, band patent counts are plain sums.
    """
    total = len(store.patents)
    possible = len(store.class_lists[UPC]) * len(store.class_lists[IPC])
    bands = []
    for lo, hi in SIZE_BANDS:
        in_band = [
            d for d in domains if d.size >= lo and (hi is None or d.size <= hi)
        ]
        patents_in_band = sum(d.size for d in in_band)
        bands.append(
            {
                "band": _band_label(lo, hi),
                "domains": len(in_band),
                "fraction_of_possible_pairs": len(in_band) / possible if possible else 0.0,
                "patents": patents_in_band,
                "patent_fraction": patents_in_band / total if total else 0.0,
            }
        )
    valid = [d for d in domains if d.status is DomainStatus.VALID]
    covered_before = set()
    for o in overlaps:
        covered_before.update(o.patents)
    valid_codes = {d.code for d in valid}
    assigned_to_valid = sum(1 for code in assignment.values() if code in valid_codes)
    return CoverageReport(
        total_patents=total,
        possible_pairs=possible,
        nonzero_pairs=len(overlaps),
        surviving_pairs=len(noise.surviving),
        valid_domains=len(valid),
        valid_fraction_of_possible=len(valid) / possible if possible else 0.0,
        valid_patent_fraction=assigned_to_valid / total if total else 0.0,
        assigned_patents=len(assignment),
        assigned_to_valid=assigned_to_valid,
        noise_lost_patents=noise.patents_lost,
        noise_lost_fraction=noise.patents_lost_fraction,
        no_overlap_patents=total - len(covered_before),
        size_bands=bands,
    )


def decompose(store: CorpusStore, min_size: int = 100) -> Decomposition:
    """Run the full overlap -> noise -> dedup -> size pipeline."""
    overlaps = compute_overlaps(store)
    noise = noise_filter(overlaps, len(store.patents))
    deduped, assignment = deduplicate(noise.surviving)
    domains = size_filter(deduped, min_size)
    noise_domains = [
        Domain(o.key, frozenset(), o.actual_overlap, o.expected_overlap,
               DomainStatus.DISCARDED_NOISE)
        for o in noise.discarded
    ]
    all_domains = sorted(domains + noise_domains, key=lambda d: d.code)
    coverage = coverage_report(store, overlaps, noise, all_domains, assignment)
    return Decomposition(overlaps, noise, all_domains, assignment, coverage)
