"""Deterministic synthetic patent corpus generation.

The generator builds a corpus with planted structure so the whole
pipeline has something real to find: each UPC class is wired to a small
set of partner IPC classes (creating strong class-pair overlaps), class
popularity follows a power law, citations prefer earlier patents of the
citing patent's main class with a configurable within-class share, and
titles/abstracts are drawn from per-class signature vocabulary plus a
shared pool so keyword queries discriminate between classes.

All randomness flows through one numpy Generator seeded by the caller;
the same (config, seed) pair always produces byte-identical corpora.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date, timedelta

import numpy as np

from .corpus import (
    SPECIAL_PREFIXES,
    UTILITY,
    CitationRecord,
    CorpusStore,
    IPC,
    PatentRecord,
    UPC,
    validate_store,
)


class InfeasibleConfigError(ValueError):
    """Raised when a synthesis configuration cannot be satisfied."""


_WORD_BANK = (
    "signal", "valve", "polymer", "stent", "laser", "battery", "antenna", "piston",
    "catalyst", "sensor", "turbine", "diode", "membrane", "router", "gearbox", "alloy",
    "reactor", "compressor", "firmware", "catheter", "pigment", "servo", "capacitor",
    "nozzle", "substrate", "modem", "bearing", "solvent", "implant", "radar", "winch",
    "enzyme", "transistor", "pump", "filament", "codec", "clutch", "resin", "electrode",
    "gyroscope", "kiln", "scanner", "dielectric", "syringe", "funnel", "transponder",
    "flywheel", "lens", "vaccine", "throttle", "welding", "cipher", "magnet", "conveyor",
    "plasma", "binder", "actuator", "antigen", "refiner", "spindle", "ledger", "coolant",
    "transducer", "mold", "oscillator", "fabric", "injector", "packet", "crucible",
    "solder", "rotor", "adhesive",
)

_SHARED_WORDS = (
    "method", "apparatus", "system", "device", "process", "control", "assembly",
    "module", "unit", "improved", "composition", "structure", "operation", "layer",
    "interface", "configuration",
)

_SIGNATURE_SIZE = 3


@dataclass
class SynthConfig:
    """Knobs for corpus synthesis; defaults give the bundled desk corpus."""

    n_patents: int = 5000
    year_start: int = 1980
    year_end: int = 2000
    n_upc_classes: int = 17
    n_ipc_classes: int = 26
    class_skew: float = 0.15
    partner_ipc_per_upc: int = 2
    partner_prob: float = 0.95
    extra_upc_mean: float = 0.4
    extra_ipc_mean: float = 0.4
    citation_rate: float = 10.0
    within_class_share: float = 0.7
    title_words: tuple[int, int] = (3, 8)
    abstract_words: tuple[int, int] = (12, 40)
    special_prefix_fraction: float = 0.0
    id_start: int = 4000000


@dataclass
class SynthReport:
    """Realized statistics of a generated corpus."""

    n_patents: int = 0
    n_citations: int = 0
    mean_citations: float = 0.0
    within_class_citations: int = 0
    skipped_draws: int = 0
    class_sizes: dict[str, int] = field(default_factory=dict)
    signature_words: dict[str, tuple[str, ...]] = field(default_factory=dict)


def _validate(config: SynthConfig) -> None:
    if config.n_patents < 10:
        raise InfeasibleConfigError("n_patents must be at least 10")
    if config.year_end < config.year_start:
        raise InfeasibleConfigError("year_end must not precede year_start")
    if config.n_upc_classes < 1 or config.n_ipc_classes < 1:
        raise InfeasibleConfigError("class counts must be positive")
    if config.partner_ipc_per_upc < 1 or config.partner_ipc_per_upc > config.n_ipc_classes:
        raise InfeasibleConfigError(
            "partner_ipc_per_upc must be between 1 and the number of IPC classes"
        )
    if not (0.0 <= config.partner_prob <= 1.0):
        raise InfeasibleConfigError("partner_prob must lie in [0, 1]")
    if not (0.0 <= config.within_class_share <= 1.0):
        raise InfeasibleConfigError("within_class_share must lie in [0, 1]")
    if config.citation_rate < 0:
        raise InfeasibleConfigError("citation_rate cannot be negative")
    if config.citation_rate > (config.n_patents - 1) / 2:
        raise InfeasibleConfigError(
            "citation_rate too high for the corpus size: distinct earlier "
            "targets would run out for most patents"
        )
    if config.extra_upc_mean < 0 or config.extra_ipc_mean < 0:
        raise InfeasibleConfigError("extra membership means cannot be negative")
    for lo, hi in (config.title_words, config.abstract_words):
        if lo < 1 or hi < lo:
            raise InfeasibleConfigError("word-count ranges must satisfy 1 <= lo <= hi")


def _upc_label(i: int) -> str:
    return str(100 + 7 * i)


def _ipc_label(i: int) -> str:
    return f"{chr(65 + i % 8)}{i // 8 + 1:02d}{chr(66 + i % 20)}"


def _signature(i: int) -> tuple[str, ...]:
    start = (i * _SIGNATURE_SIZE) % len(_WORD_BANK)
    doubled = _WORD_BANK + _WORD_BANK
    return doubled[start : start + _SIGNATURE_SIZE]


def generate_synthetic_corpus(
    config: SynthConfig | None = None, seed: int = 0
) -> tuple[CorpusStore, SynthReport]:
    """Generate a corpus; same (config, seed) gives identical output."""
    config = config or SynthConfig()
    _validate(config)
    rng = np.random.default_rng(seed)
    n = config.n_patents

    years = np.sort(rng.integers(config.year_start, config.year_end + 1, size=n))
    ids = [str(config.id_start + i) for i in range(n)]

    ranks = np.arange(1, config.n_upc_classes + 1, dtype=np.float64)
    weights = ranks**-config.class_skew
    weights /= weights.sum()
    main_upc = rng.choice(config.n_upc_classes, size=n, p=weights)

    upc_labels = [_upc_label(i) for i in range(config.n_upc_classes)]
    ipc_labels = [_ipc_label(i) for i in range(config.n_ipc_classes)]
    partners = {
        u: tuple(
            (u * config.partner_ipc_per_upc + j) % config.n_ipc_classes
            for j in range(config.partner_ipc_per_upc)
        )
        for u in range(config.n_upc_classes)
    }

    report = SynthReport(n_patents=n)
    report.signature_words = {
        upc_labels[i]: _signature(i) for i in range(config.n_upc_classes)
    }

    patents: dict[str, PatentRecord] = {}
    upc_memberships: dict[str, tuple[str, ...]] = {}
    ipc_memberships: dict[str, tuple[str, ...]] = {}
    citations: list[CitationRecord] = []
    members_by_class: dict[int, list[int]] = {u: [] for u in range(config.n_upc_classes)}

    for i in range(n):
        pid = ids[i]
        year = int(years[i])
        u = int(main_upc[i])

        extra_upc = min(int(rng.poisson(config.extra_upc_mean)), config.n_upc_classes - 1)
        upc_set = [u]
        if extra_upc:
            others = [c for c in range(config.n_upc_classes) if c != u]
            chosen = rng.choice(len(others), size=extra_upc, replace=False)
            upc_set.extend(others[int(c)] for c in sorted(chosen.tolist()))

        if rng.random() < config.partner_prob:
            first_ipc = int(partners[u][int(rng.integers(0, len(partners[u])))])
        else:
            first_ipc = int(rng.integers(0, config.n_ipc_classes))
        extra_ipc = min(int(rng.poisson(config.extra_ipc_mean)), config.n_ipc_classes - 1)
        ipc_set = [first_ipc]
        if extra_ipc:
            others = [c for c in range(config.n_ipc_classes) if c != first_ipc]
            chosen = rng.choice(len(others), size=extra_ipc, replace=False)
            ipc_set.extend(others[int(c)] for c in sorted(chosen.tolist()))

        day_count = (date(year, 12, 31) - date(year, 1, 1)).days + 1
        granted = date(year, 1, 1) + timedelta(days=int(rng.integers(0, day_count)))

        kind = UTILITY
        if config.special_prefix_fraction > 0 and rng.random() < config.special_prefix_fraction:
            kind = SPECIAL_PREFIXES[int(rng.integers(0, len(SPECIAL_PREFIXES)))]

        signature = report.signature_words[upc_labels[u]]
        lexicon = signature * 2 + _SHARED_WORDS
        title_len = int(rng.integers(config.title_words[0], config.title_words[1] + 1))
        abstract_len = int(
            rng.integers(config.abstract_words[0], config.abstract_words[1] + 1)
        )
        title_ix = rng.integers(0, len(lexicon), size=title_len)
        abstract_ix = rng.integers(0, len(lexicon), size=abstract_len)
        title_terms = [signature[0]] + [lexicon[int(w)] for w in title_ix[1:]]
        title = " ".join(title_terms)
        abstract = " ".join(lexicon[int(w)] for w in abstract_ix)

        wanted = min(int(rng.poisson(config.citation_rate)), i)
        targets: set[int] = set()
        pool = members_by_class[u]
        for _ in range(wanted):
            within = rng.random() < config.within_class_share
            found = -1
            if within:
                if pool:
                    for _attempt in range(30):
                        candidate = pool[int(rng.integers(0, len(pool)))]
                        if candidate not in targets:
                            found = candidate
                            break
            else:
                for _attempt in range(30):
                    candidate = int(rng.integers(0, i))
                    if int(main_upc[candidate]) != u and candidate not in targets:
                        found = candidate
                        break
            if found < 0:
                report.skipped_draws += 1
                continue
            targets.add(found)
            if within:
                report.within_class_citations += 1
        for t in sorted(targets):
            citations.append(CitationRecord(pid, ids[t]))

        patents[pid] = PatentRecord(pid, granted, kind, upc_labels[u], title, abstract)
        upc_memberships[pid] = tuple(upc_labels[c] for c in upc_set)
        ipc_memberships[pid] = tuple(ipc_labels[c] for c in ipc_set)
        members_by_class[u].append(i)

    report.n_citations = len(citations)
    report.mean_citations = len(citations) / n
    report.class_sizes = {
        upc_labels[u]: len(members_by_class[u]) for u in range(config.n_upc_classes)
    }

    store = CorpusStore(
        patents,
        upc_memberships,
        ipc_memberships,
        citations,
        {UPC: tuple(upc_labels), IPC: tuple(ipc_labels)},
    )
    problems = validate_store(store)
    if problems:
        raise AssertionError(f"synthesized corpus violates invariants: {problems[:3]}")
    return store, report
