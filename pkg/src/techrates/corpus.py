"""Patent corpus loading, validation, filtering, and synthesis.

A corpus is five tab-separated files plus two class-list files:

    patents.tsv    id, grant_date, kind_prefix, title, abstract
    upc.tsv        patent_id, class_label, is_primary
    ipc.tsv        patent_id, class_label
    citations.tsv  citing_id, cited_id
    upc_classes.txt / ipc_classes.txt   one class label per line

Dates are strict ISO-8601 (YYYY-MM-DD). Rows that reference unknown
patents or unknown class labels are dropped and counted; structurally
malformed rows are tolerated up to an error budget (default 0.1% per
file) and abort the load with their row numbers once it is exceeded.

Provides:
- load_corpus / filter_corpus with LoadReport / FilterReport
- CorpusStore, the in-memory container the rest of the pipeline reads
- validate_store, an invariant checker used heavily by the test suite
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Iterable, Iterator

UPC = "UPC"
IPC = "IPC"
SYSTEMS = (UPC, IPC)

UTILITY = "utility"
SPECIAL_PREFIXES = ("D", "PP", "H", "RE", "T")
KIND_PREFIXES = (UTILITY,) + SPECIAL_PREFIXES

MAX_REPORTED_ROWS = 100


class CorpusFormatError(ValueError):
    """Raised when a corpus file is unreadable or exceeds its error budget."""


@dataclass(frozen=True)
class PatentRecord:
    id: str
    grant_date: date
    kind_prefix: str
    main_class: str | None
    title: str
    abstract: str

    @property
    def grant_year(self) -> int:
        return self.grant_date.year


@dataclass(frozen=True)
class ClassMembership:
    patent_id: str
    system: str
    class_label: str
    is_primary: bool = False


@dataclass(frozen=True)
class CitationRecord:
    citing_id: str
    cited_id: str


class CorpusStore:
    """In-memory corpus: patents, class memberships, citations, class lists.

    Memberships are kept per system in file order (the first-listed rule
    for primary-class promotion depends on that order). Iteration helpers
    return patents sorted by id so downstream results are deterministic.
    """

    def __init__(
        self,
        patents: dict[str, PatentRecord],
        upc_memberships: dict[str, tuple[str, ...]],
        ipc_memberships: dict[str, tuple[str, ...]],
        citations: list[CitationRecord],
        class_lists: dict[str, tuple[str, ...]],
    ):
        self.patents = patents
        self.upc_memberships = upc_memberships
        self.ipc_memberships = ipc_memberships
        self.citations = citations
        self.class_lists = class_lists

    def __len__(self) -> int:
        return len(self.patents)

    def sorted_ids(self) -> list[str]:
        return sorted(self.patents)

    def memberships(self) -> Iterator[ClassMembership]:
        """All memberships as records, patents in id order."""
        for pid in self.sorted_ids():
            main = self.patents[pid].main_class
            for label in self.upc_memberships.get(pid, ()):
                yield ClassMembership(pid, UPC, label, is_primary=(label == main))
            for label in self.ipc_memberships.get(pid, ()):
                yield ClassMembership(pid, IPC, label)

    def memberships_for(self, system: str) -> dict[str, tuple[str, ...]]:
        if system == UPC:
            return self.upc_memberships
        if system == IPC:
            return self.ipc_memberships
        raise ValueError(f"unknown classification system: {system!r}")

    def year_range(self) -> tuple[int, int]:
        years = [p.grant_year for p in self.patents.values()]
        return min(years), max(years)

    def summary(self) -> dict[str, int]:
        return {
            "patents": len(self.patents),
            "upc_memberships": sum(len(v) for v in self.upc_memberships.values()),
            "ipc_memberships": sum(len(v) for v in self.ipc_memberships.values()),
            "citations": len(self.citations),
            "upc_classes": len(self.class_lists[UPC]),
            "ipc_classes": len(self.class_lists[IPC]),
        }


@dataclass
class LoadReport:
    """Counts of what was read, dropped, and repaired during loading."""

    rows_read: dict[str, int] = field(default_factory=dict)
    malformed: dict[str, int] = field(default_factory=dict)
    malformed_rows: dict[str, list[int]] = field(default_factory=dict)
    duplicate_patents: int = 0
    duplicate_memberships: int = 0
    duplicate_citations: int = 0
    self_citations: int = 0
    unknown_patent_rows: int = 0
    unknown_class_rows: int = 0
    dangling_citations: int = 0
    primary_promoted: int = 0
    primary_conflicts: int = 0
    patents_without_upc: int = 0
    patents_without_ipc: int = 0
    labels_seen: dict[str, int] = field(default_factory=dict)
    synthesized: bool = False

    def to_json(self) -> dict:
        return {
            "rows_read": dict(sorted(self.rows_read.items())),
            "malformed": dict(sorted(self.malformed.items())),
            "malformed_rows": {k: v[:MAX_REPORTED_ROWS] for k, v in sorted(self.malformed_rows.items())},
            "dropped": {
                "duplicate_patents": self.duplicate_patents,
                "duplicate_memberships": self.duplicate_memberships,
                "duplicate_citations": self.duplicate_citations,
                "self_citations": self.self_citations,
                "unknown_patent_rows": self.unknown_patent_rows,
                "unknown_class_rows": self.unknown_class_rows,
                "dangling_citations": self.dangling_citations,
            },
            "main_class": {
                "primary_promoted": self.primary_promoted,
                "primary_conflicts": self.primary_conflicts,
            },
            "patents_without_upc": self.patents_without_upc,
            "patents_without_ipc": self.patents_without_ipc,
            "labels_seen": dict(sorted(self.labels_seen.items())),
            "synthesized": self.synthesized,
        }


@dataclass
class FilterReport:
    """Counts of what the window / kind / class filter removed, by reason."""

    removed_by_prefix: dict[str, int] = field(default_factory=dict)
    removed_outside_window: int = 0
    memberships_removed: dict[str, int] = field(default_factory=dict)
    citations_dropped: int = 0
    primary_repromoted: int = 0
    patents_left_without_upc: int = 0
    patents_in: int = 0
    patents_retained: int = 0

    def to_json(self) -> dict:
        return {
            "patents_in": self.patents_in,
            "patents_retained": self.patents_retained,
            "removed_by_prefix": dict(sorted(self.removed_by_prefix.items())),
            "removed_outside_window": self.removed_outside_window,
            "memberships_removed_by_class": dict(sorted(self.memberships_removed.items())),
            "citations_dropped": self.citations_dropped,
            "primary_repromoted": self.primary_repromoted,
            "patents_left_without_upc": self.patents_left_without_upc,
        }


def _read_tsv(path: Path, expected_header: list[str]) -> Iterator[tuple[int, list[str]]]:
    """Yield (1-based row number, fields) for each data row of a TSV file."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter="\t", quoting=csv.QUOTE_NONE)
        try:
            header = next(reader)
        except StopIteration:
            raise CorpusFormatError(f"{path}: empty file, expected header {expected_header}")
        if header != expected_header:
            raise CorpusFormatError(f"{path}: bad header {header}, expected {expected_header}")
        for number, row in enumerate(reader, start=2):
            yield number, row


def _read_class_list(path: Path) -> tuple[str, ...]:
    labels: list[str] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            label = line.strip()
            if label and label not in seen:
                seen.add(label)
                labels.append(label)
    if not labels:
        raise CorpusFormatError(f"{path}: class list is empty")
    return tuple(labels)


class _BudgetedErrors:
    """Collects malformed rows for one file and aborts past the budget."""

    def __init__(self, path: Path, total_rows: int, budget: float):
        self.path = path
        self.limit = max(1, int(total_rows * budget))
        self.rows: list[int] = []
        self.count = 0

    def add(self, row_number: int, reason: str) -> None:
        self.count += 1
        if len(self.rows) < MAX_REPORTED_ROWS:
            self.rows.append(row_number)
        if self.count > self.limit:
            shown = ", ".join(str(r) for r in self.rows[:20])
            raise CorpusFormatError(
                f"{self.path}: {self.count} malformed rows exceed the error budget "
                f"of {self.limit}; offending rows include [{shown}] (last: {reason})"
            )


def _count_rows(path: Path) -> int:
    with open(path, encoding="utf-8") as fh:
        return max(0, sum(1 for _ in fh) - 1)


def _parse_bool(text: str) -> bool:
    if text == "1":
        return True
    if text == "0":
        return False
    raise ValueError(f"expected 0 or 1, got {text!r}")


def resolve_main_class(
    labels: tuple[str, ...], primary_flags: tuple[bool, ...]
) -> tuple[str | None, bool, bool]:
    """Pick the main class from ordered UPC memberships.

    Returns (main_class, promoted, conflict). Exactly one primary flag is
    the clean case; zero flags promote the first-listed label; multiple
    flags keep the first flagged label and report a conflict.
    """
    if not labels:
        return None, False, False
    flagged = [label for label, flag in zip(labels, primary_flags) if flag]
    if len(flagged) == 1:
        return flagged[0], False, False
    if not flagged:
        return labels[0], True, False
    return flagged[0], False, True


def load_corpus(
    patents_file: str | Path,
    upc_file: str | Path,
    ipc_file: str | Path,
    citations_file: str | Path,
    upc_classes_file: str | Path,
    ipc_classes_file: str | Path,
    error_budget: float = 0.001,
) -> tuple[CorpusStore, LoadReport]:
    """Load a corpus from disk, validating referential integrity.

    Returns the store plus a LoadReport of per-file row counts and every
    category of dropped or repaired row. Raises CorpusFormatError when a
    file is structurally broken or its malformed-row share exceeds
    ``error_budget``.
    """
    report = LoadReport()
    upc_classes = _read_class_list(Path(upc_classes_file))
    ipc_classes = _read_class_list(Path(ipc_classes_file))
    class_lists = {UPC: upc_classes, IPC: ipc_classes}
    upc_set, ipc_set = set(upc_classes), set(ipc_classes)

    patents_path = Path(patents_file)
    errors = _BudgetedErrors(patents_path, _count_rows(patents_path), error_budget)
    raw_patents: dict[str, tuple[date, str, str, str]] = {}
    for number, row in _read_tsv(patents_path, ["id", "grant_date", "kind_prefix", "title", "abstract"]):
        if len(row) != 5:
            errors.add(number, f"expected 5 fields, got {len(row)}")
            continue
        pid, date_text, kind, title, abstract = row
        if not pid:
            errors.add(number, "empty id")
            continue
        if kind not in KIND_PREFIXES:
            errors.add(number, f"unknown kind_prefix {kind!r}")
            continue
        try:
            granted = date.fromisoformat(date_text)
        except ValueError:
            errors.add(number, f"bad ISO-8601 date {date_text!r}")
            continue
        if pid in raw_patents:
            report.duplicate_patents += 1
            continue
        raw_patents[pid] = (granted, kind, title, abstract)
    report.rows_read["patents.tsv"] = errors.count + report.duplicate_patents + len(raw_patents)
    report.malformed["patents.tsv"] = errors.count
    report.malformed_rows["patents.tsv"] = errors.rows

    upc_memberships: dict[str, list[str]] = {}
    upc_primary: dict[str, list[bool]] = {}
    upc_path = Path(upc_file)
    errors = _BudgetedErrors(upc_path, _count_rows(upc_path), error_budget)
    rows_read = 0
    for number, row in _read_tsv(upc_path, ["patent_id", "class_label", "is_primary"]):
        rows_read += 1
        if len(row) != 3:
            errors.add(number, f"expected 3 fields, got {len(row)}")
            continue
        pid, label, primary_text = row
        try:
            primary = _parse_bool(primary_text)
        except ValueError as exc:
            errors.add(number, str(exc))
            continue
        if pid not in raw_patents:
            report.unknown_patent_rows += 1
            continue
        if label not in upc_set:
            report.unknown_class_rows += 1
            continue
        labels = upc_memberships.setdefault(pid, [])
        if label in labels:
            report.duplicate_memberships += 1
            continue
        labels.append(label)
        upc_primary.setdefault(pid, []).append(primary)
    report.rows_read["upc.tsv"] = rows_read
    report.malformed["upc.tsv"] = errors.count
    report.malformed_rows["upc.tsv"] = errors.rows

    ipc_memberships: dict[str, list[str]] = {}
    ipc_path = Path(ipc_file)
    errors = _BudgetedErrors(ipc_path, _count_rows(ipc_path), error_budget)
    rows_read = 0
    for number, row in _read_tsv(ipc_path, ["patent_id", "class_label"]):
        rows_read += 1
        if len(row) != 2:
            errors.add(number, f"expected 2 fields, got {len(row)}")
            continue
        pid, label = row
        if pid not in raw_patents:
            report.unknown_patent_rows += 1
            continue
        if label not in ipc_set:
            report.unknown_class_rows += 1
            continue
        labels = ipc_memberships.setdefault(pid, [])
        if label in labels:
            report.duplicate_memberships += 1
            continue
        labels.append(label)
    report.rows_read["ipc.tsv"] = rows_read
    report.malformed["ipc.tsv"] = errors.count
    report.malformed_rows["ipc.tsv"] = errors.rows

    citations: list[CitationRecord] = []
    seen_pairs: set[tuple[str, str]] = set()
    citations_path = Path(citations_file)
    errors = _BudgetedErrors(citations_path, _count_rows(citations_path), error_budget)
    rows_read = 0
    for number, row in _read_tsv(citations_path, ["citing_id", "cited_id"]):
        rows_read += 1
        if len(row) != 2:
            errors.add(number, f"expected 2 fields, got {len(row)}")
            continue
        citing, cited = row
        if citing not in raw_patents or cited not in raw_patents:
            report.dangling_citations += 1
            continue
        if citing == cited:
            report.self_citations += 1
            continue
        if (citing, cited) in seen_pairs:
            report.duplicate_citations += 1
            continue
        seen_pairs.add((citing, cited))
        citations.append(CitationRecord(citing, cited))
    report.rows_read["citations.tsv"] = rows_read
    report.malformed["citations.tsv"] = errors.count
    report.malformed_rows["citations.tsv"] = errors.rows

    patents: dict[str, PatentRecord] = {}
    for pid, (granted, kind, title, abstract) in raw_patents.items():
        labels = tuple(upc_memberships.get(pid, []))
        flags = tuple(upc_primary.get(pid, []))
        main, promoted, conflict = resolve_main_class(labels, flags)
        report.primary_promoted += int(promoted)
        report.primary_conflicts += int(conflict)
        if not labels:
            report.patents_without_upc += 1
        if pid not in ipc_memberships:
            report.patents_without_ipc += 1
        patents[pid] = PatentRecord(pid, granted, kind, main, title, abstract)

    report.labels_seen = {
        UPC: len({l for ls in upc_memberships.values() for l in ls}),
        IPC: len({l for ls in ipc_memberships.values() for l in ls}),
    }
    store = CorpusStore(
        patents,
        {pid: tuple(ls) for pid, ls in upc_memberships.items()},
        {pid: tuple(ls) for pid, ls in ipc_memberships.items()},
        citations,
        class_lists,
    )
    return store, report


def filter_corpus(
    store: CorpusStore,
    window_start: date,
    window_end: date,
    excluded_classes: Iterable[str] = (),
) -> tuple[CorpusStore, FilterReport]:
    """Restrict a corpus to utility patents granted inside the window.

    Non-utility kind prefixes are removed with per-prefix counts, grant
    dates outside [window_start, window_end] are removed, and memberships
    in ``excluded_classes`` are struck from both systems (re-promoting a
    main class when the struck membership was primary). Citations that
    touch a removed patent are dropped. Idempotent: filtering an already
    filtered corpus changes nothing.
    """
    report = FilterReport(patents_in=len(store.patents))
    excluded = set(excluded_classes)

    kept_ids: set[str] = set()
    for pid, record in store.patents.items():
        if record.kind_prefix != UTILITY:
            key = record.kind_prefix
            report.removed_by_prefix[key] = report.removed_by_prefix.get(key, 0) + 1
            continue
        if not (window_start <= record.grant_date <= window_end):
            report.removed_outside_window += 1
            continue
        kept_ids.add(pid)

    new_upc: dict[str, tuple[str, ...]] = {}
    new_ipc: dict[str, tuple[str, ...]] = {}
    new_patents: dict[str, PatentRecord] = {}
    for pid in kept_ids:
        record = store.patents[pid]
        upc_labels = store.upc_memberships.get(pid, ())
        kept_upc = tuple(l for l in upc_labels if l not in excluded)
        removed_here = len(upc_labels) - len(kept_upc)
        for label in upc_labels:
            if label in excluded:
                report.memberships_removed[label] = report.memberships_removed.get(label, 0) + 1
        ipc_labels = store.ipc_memberships.get(pid, ())
        kept_ipc = tuple(l for l in ipc_labels if l not in excluded)
        for label in ipc_labels:
            if label in excluded:
                report.memberships_removed[label] = report.memberships_removed.get(label, 0) + 1
        main = record.main_class
        if removed_here and main not in kept_upc:
            if kept_upc:
                main = kept_upc[0]
                report.primary_repromoted += 1
            else:
                main = None
                report.patents_left_without_upc += 1
        if kept_upc:
            new_upc[pid] = kept_upc
        if kept_ipc:
            new_ipc[pid] = kept_ipc
        new_patents[pid] = PatentRecord(
            pid, record.grant_date, record.kind_prefix, main, record.title, record.abstract
        )

    new_citations = [
        c for c in store.citations if c.citing_id in kept_ids and c.cited_id in kept_ids
    ]
    report.citations_dropped = len(store.citations) - len(new_citations)
    report.patents_retained = len(new_patents)

    class_lists = {
        system: tuple(l for l in labels if l not in excluded)
        for system, labels in store.class_lists.items()
    }
    filtered = CorpusStore(new_patents, new_upc, new_ipc, new_citations, class_lists)
    return filtered, report


def validate_store(store: CorpusStore) -> list[str]:
    """Return a list of invariant violations (empty when the store is sound)."""
    problems: list[str] = []
    upc_set = set(store.class_lists[UPC])
    ipc_set = set(store.class_lists[IPC])
    for pid, labels in store.upc_memberships.items():
        if pid not in store.patents:
            problems.append(f"UPC membership references unknown patent {pid}")
        if len(set(labels)) != len(labels):
            problems.append(f"duplicate UPC memberships for {pid}")
        for label in labels:
            if label not in upc_set:
                problems.append(f"UPC label {label} for {pid} not in class list")
    for pid, labels in store.ipc_memberships.items():
        if pid not in store.patents:
            problems.append(f"IPC membership references unknown patent {pid}")
        if len(set(labels)) != len(labels):
            problems.append(f"duplicate IPC memberships for {pid}")
        for label in labels:
            if label not in ipc_set:
                problems.append(f"IPC label {label} for {pid} not in class list")
    for pid, record in store.patents.items():
        labels = store.upc_memberships.get(pid, ())
        if labels and record.main_class not in labels:
            problems.append(f"main class of {pid} is not one of its UPC memberships")
        if not labels and record.main_class is not None:
            problems.append(f"{pid} has a main class but no UPC memberships")
    seen: set[tuple[str, str]] = set()
    for citation in store.citations:
        if citation.citing_id == citation.cited_id:
            problems.append(f"self-citation on {citation.citing_id}")
        if citation.citing_id not in store.patents or citation.cited_id not in store.patents:
            problems.append(f"dangling citation {citation.citing_id} -> {citation.cited_id}")
        pair = (citation.citing_id, citation.cited_id)
        if pair in seen:
            problems.append(f"duplicate citation {pair}")
        seen.add(pair)
    return problems


def write_corpus(store: CorpusStore, directory: str | Path) -> None:
    """Write a store back to the five-file TSV layout (deterministic order)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / "patents.tsv", "w", encoding="utf-8", newline="") as fh:
        fh.write("id\tgrant_date\tkind_prefix\ttitle\tabstract\n")
        for pid in store.sorted_ids():
            p = store.patents[pid]
            fh.write(f"{p.id}\t{p.grant_date.isoformat()}\t{p.kind_prefix}\t{p.title}\t{p.abstract}\n")
    with open(directory / "upc.tsv", "w", encoding="utf-8", newline="") as fh:
        fh.write("patent_id\tclass_label\tis_primary\n")
        for pid in store.sorted_ids():
            main = store.patents[pid].main_class
            for label in store.upc_memberships.get(pid, ()):
                fh.write(f"{pid}\t{label}\t{int(label == main)}\n")
    with open(directory / "ipc.tsv", "w", encoding="utf-8", newline="") as fh:
        fh.write("patent_id\tclass_label\n")
        for pid in store.sorted_ids():
            for label in store.ipc_memberships.get(pid, ()):
                fh.write(f"{pid}\t{label}\n")
    with open(directory / "citations.tsv", "w", encoding="utf-8", newline="") as fh:
        fh.write("citing_id\tcited_id\n")
        for c in sorted(store.citations, key=lambda c: (c.citing_id, c.cited_id)):
            fh.write(f"{c.citing_id}\t{c.cited_id}\n")
    for system, filename in ((UPC, "upc_classes.txt"), (IPC, "ipc_classes.txt")):
        with open(directory / filename, "w", encoding="utf-8", newline="") as fh:
            for label in store.class_lists[system]:
                fh.write(label + "\n")


def load_corpus_dir(directory: str | Path, error_budget: float = 0.001) -> tuple[CorpusStore, LoadReport]:
    """Load a corpus from a directory using the standard file names."""
    directory = Path(directory)
    return load_corpus(
        directory / "patents.tsv",
        directory / "upc.tsv",
        directory / "ipc.tsv",
        directory / "citations.tsv",
        directory / "upc_classes.txt",
        directory / "ipc_classes.txt",
        error_budget=error_budget,
    )


def report_to_json_file(report: dict, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(report, fh, sort_keys=True, indent=2)
        fh.write("\n")
