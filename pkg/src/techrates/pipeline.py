"""Pipeline stages and the artifact files they exchange.

Stages run in a fixed order, each reading only files produced by earlier
stages, so any prefix of the pipeline is a valid checkpoint and a failed
stage can be rerun after fixing its cause:

    ingest      corpus/ checkpoint, filter_report.json
    decompose   domains.tsv, assignments.tsv, coverage.json
    centrality  spnp.tsv, centrality.tsv, null_diagnostics.json
    estimate    rates.tsv, model.json
    stats       fits.json, tests.json, size_regression.json,
                dedup_sensitivity.json
    index       search_index.json

Every stage finishes by rewriting manifest.json (config hash, seed, and
a sha256 per artifact file). All writers are deterministic: fixed sort
orders, shortest-round-trip float formatting, atomic replace, no
timestamps. Running stages one by one yields byte-identical artifacts to
one monolithic run because ``run`` simply calls the same functions.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .citegraph import build_snapshot, compute_reach_counts
from .config import PipelineConfig
from .corpus import (
    CorpusStore,
    LoadReport,
    filter_corpus,
    load_corpus,
    load_corpus_dir,
    write_corpus,
)
from .domains import DomainStatus, compute_overlaps, decompose, noise_filter
from .distfit import fit_all, normality_tests
from .nullmodel import (
    domain_mean_centrality,
    null_distribution,
    rank_percentile,
    zscores,
)
from .ratemodel import (
    RateEstimate,
    RegressionModel,
    dedup_sensitivity,
    estimate_k,
    size_regression,
)
from .synth import generate_synthetic_corpus
from .textsearch import build_index

SCHEMA_VERSION = "1"

STAGE_ORDER = ("ingest", "decompose", "centrality", "estimate", "stats", "index")

_MIN_FIT_SAMPLES = 30
_MIN_TEST_SAMPLES = 20
_MIN_REGRESSION_SAMPLES = 3


class StageError(RuntimeError):
    """A pipeline stage could not run or complete."""

    def __init__(self, stage: str, message: str):
        self.stage = stage
        super().__init__(f"stage '{stage}' failed: {message}")


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def write_json(path: Path, payload: dict) -> None:
    _atomic_write(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")


def read_json(path: Path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def write_tsv(path: Path, header: list[str], rows: list[tuple]) -> None:
    lines = ["\t".join(header)]
    lines.extend("\t".join(_fmt(v) for v in row) for row in rows)
    _atomic_write(path, "\n".join(lines) + "\n")


def read_tsv(path: Path) -> tuple[list[str], list[list[str]]]:
    text = path.read_text(encoding="utf-8")
    lines = text.splitlines()
    header = lines[0].split("\t")
    return header, [line.split("\t") for line in lines[1:]]


def _require(cfg: PipelineConfig, stage: str, relpath: str, producer: str) -> Path:
    path = Path(cfg.outdir) / relpath
    if not path.exists():
        raise StageError(
            stage, f"missing {relpath}; run 'techrates {producer}' first"
        )
    return path


def _update_manifest(cfg: PipelineConfig) -> None:
    outdir = Path(cfg.outdir)
    artifacts = {}
    for path in sorted(outdir.rglob("*")):
        if not path.is_file() or path.name == "manifest.json" or path.suffix == ".tmp":
            continue
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        artifacts[path.relative_to(outdir).as_posix()] = digest
    write_json(
        outdir / "manifest.json",
        {
            "schema_version": SCHEMA_VERSION,
            "config_hash": cfg.config_hash(),
            "seed": cfg.seed,
            "replicates": cfg.replicates,
            "artifacts": artifacts,
        },
    )


def _load_checkpoint(cfg: PipelineConfig, stage: str) -> CorpusStore:
    _require(cfg, stage, "corpus/patents.tsv", "ingest")
    store, _ = load_corpus_dir(Path(cfg.outdir) / "corpus", cfg.error_budget)
    return store


# --- stages ----------------------------------------------------------------


def run_ingest(cfg: PipelineConfig) -> None:
    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    if cfg.uses_synthetic_corpus():
        store, synth_report = generate_synthetic_corpus(cfg.synth_config(), cfg.seed)
        load_report = LoadReport(synthesized=True)
        load_report.rows_read = {
            "patents.tsv": synth_report.n_patents,
            "citations.tsv": synth_report.n_citations,
        }
    else:
        store, load_report = load_corpus(
            cfg.patents_file,
            cfg.upc_file,
            cfg.ipc_file,
            cfg.citations_file,
            cfg.upc_classes_file,
            cfg.ipc_classes_file,
            error_budget=cfg.error_budget,
        )
    filtered, filter_report = filter_corpus(
        store, cfg.window_start, cfg.window_end, cfg.excluded_classes
    )
    if not filtered.patents:
        raise StageError("ingest", "no patents remain after filtering")
    write_corpus(filtered, outdir / "corpus")
    write_json(
        outdir / "filter_report.json",
        {
            "schema_version": SCHEMA_VERSION,
            "load": load_report.to_json(),
            "filter": filter_report.to_json(),
        },
    )
    _update_manifest(cfg)


def run_decompose(cfg: PipelineConfig) -> None:
    store = _load_checkpoint(cfg, "decompose")
    outdir = Path(cfg.outdir)
    result = decompose(store, cfg.min_size)
    write_tsv(
        outdir / "domains.tsv",
        ["code", "upc_label", "ipc_label", "pre_dedup_size", "expected_overlap", "size", "status"],
        [
            (
                d.code,
                d.key.upc_label,
                d.key.ipc_label,
                d.pre_dedup_size,
                d.expected_overlap,
                d.size,
                d.status.value,
            )
            for d in result.domains
        ],
    )
    write_tsv(
        outdir / "assignments.tsv",
        ["patent_id", "domain_code"],
        sorted(result.assignment.items()),
    )
    write_json(
        outdir / "coverage.json",
        {"schema_version": SCHEMA_VERSION, **result.coverage.to_json()},
    )
    _update_manifest(cfg)


def _cohort_seed(seed: int, year: int) -> int:
    digest = hashlib.sha256(f"{seed}:{year}".encode("ascii")).digest()
    return int.from_bytes(digest[:8], "big")


def scored_cohorts(store: CorpusStore, horizon: int) -> tuple[list[int], list[int]]:
    """(scored cohort years, unscored cohort years) for a corpus."""
    years = sorted({p.grant_year for p in store.patents.values()})
    if not years:
        return [], []
    max_year = years[-1]
    scored = [y for y in years if y + horizon <= max_year]
    unscored = [y for y in years if y + horizon > max_year]
    return scored, unscored


def run_centrality(cfg: PipelineConfig) -> None:
    store = _load_checkpoint(cfg, "centrality")
    outdir = Path(cfg.outdir)
    scored_years, unscored_years = scored_cohorts(store, cfg.horizon_years)

    spnp_rows: list[tuple] = []
    centrality_rows: list[tuple] = []
    triples: list[tuple[str, int, float]] = []
    observed: dict[str, tuple[float, float, float]] = {}
    diagnostics: dict[str, dict] = {}

    for year in scored_years:
        cutoff = year + cfg.horizon_years
        dag = build_snapshot(store, cutoff)
        n_minus, n_plus = compute_reach_counts(dag)
        values = n_minus * n_plus
        summary = null_distribution(
            dag,
            store,
            replicates=cfg.replicates,
            seed=_cohort_seed(cfg.seed, year),
            swap_factor=cfg.swap_factor,
        )
        z = zscores(values.astype(np.float64), summary.mean, summary.std, cfg.epsilon)
        cohort = np.flatnonzero(dag.years == year)
        for i in cohort.tolist():
            pid = dag.patent_ids[i]
            spnp_rows.append((pid, cutoff, int(n_minus[i]), int(n_plus[i]), int(values[i])))
            observed[pid] = (float(values[i]), float(summary.mean[i]), float(summary.std[i]))
            triples.append((pid, year, float(z[i])))
        diagnostics[str(year)] = summary.diagnostics.to_json()

    normalized = rank_percentile(triples)
    for record in normalized:
        value, mean, std = observed[record.patent_id]
        centrality_rows.append(
            (
                record.patent_id,
                record.cohort_year,
                int(value),
                mean,
                std,
                record.z,
                record.percentile,
            )
        )
    spnp_rows.sort(key=lambda r: (r[1], r[0]))
    centrality_rows.sort(key=lambda r: (r[1], r[0]))
    write_tsv(
        outdir / "spnp.tsv",
        ["patent_id", "cutoff_year", "n_minus", "n_plus", "spnp"],
        spnp_rows,
    )
    write_tsv(
        outdir / "centrality.tsv",
        ["patent_id", "cohort_year", "spnp_observed", "null_mean", "null_std", "z", "percentile"],
        centrality_rows,
    )
    write_json(
        outdir / "null_diagnostics.json",
        {
            "schema_version": SCHEMA_VERSION,
            "horizon_years": cfg.horizon_years,
            "replicates": cfg.replicates,
            "swap_factor": cfg.swap_factor,
            "scored_cohorts": scored_years,
            "unscored_cohorts": unscored_years,
            "cohorts": diagnostics,
        },
    )
    _update_manifest(cfg)


def read_percentiles(path: Path) -> dict[str, float]:
    _, rows = read_tsv(path)
    return {row[0]: float(row[6]) for row in rows}


def read_domain_table(path: Path) -> list[dict]:
    header, rows = read_tsv(path)
    out = []
    for row in rows:
        record = dict(zip(header, row))
        record["pre_dedup_size"] = int(record["pre_dedup_size"])
        record["expected_overlap"] = float(record["expected_overlap"])
        record["size"] = int(record["size"])
        out.append(record)
    return out


def read_assignments(path: Path) -> dict[str, str]:
    _, rows = read_tsv(path)
    return {pid: code for pid, code in rows}


def valid_domain_patents(
    domain_table: list[dict], assignment: dict[str, str]
) -> dict[str, frozenset[str]]:
    valid_codes = {d["code"] for d in domain_table if d["status"] == DomainStatus.VALID.value}
    members: dict[str, set[str]] = {code: set() for code in valid_codes}
    for pid, code in assignment.items():
        if code in valid_codes:
            members[code].add(pid)
    return {code: frozenset(ids) for code, ids in members.items()}


def run_estimate(cfg: PipelineConfig) -> None:
    outdir = Path(cfg.outdir)
    domains_path = _require(cfg, "estimate", "domains.tsv", "decompose")
    assignments_path = _require(cfg, "estimate", "assignments.tsv", "decompose")
    centrality_path = _require(cfg, "estimate", "centrality.tsv", "centrality")

    domain_table = read_domain_table(domains_path)
    assignment = read_assignments(assignments_path)
    percentile_of = read_percentiles(centrality_path)
    members = valid_domain_patents(domain_table, assignment)

    model = RegressionModel(
        slope=cfg.slope,
        intercept=cfg.intercept,
        sigma2=cfg.sigma2,
        n_train=0,
        provenance="configured",
    )
    rows: list[tuple] = []
    for centrality in domain_mean_centrality(members, percentile_of):
        size = len(members[centrality.code])
        if centrality.scored_count == 0:
            rows.append((centrality.code, size, 0, "", ""))
            continue
        estimate = estimate_k(
            model,
            centrality.mean_percentile,
            domain_code=centrality.code,
            scored_patent_count=centrality.scored_count,
        )
        rows.append(
            (centrality.code, size, centrality.scored_count, estimate.mean_centrality, estimate.k)
        )
    write_tsv(
        outdir / "rates.tsv",
        ["domain_code", "size", "scored_patent_count", "mean_centrality", "k"],
        rows,
    )
    write_json(outdir / "model.json", {"schema_version": SCHEMA_VERSION, **model.to_json()})
    _update_manifest(cfg)


def read_rates(path: Path) -> list[RateEstimate]:
    """Estimated rows of rates.tsv (flagged zero-scored rows are skipped)."""
    _, rows = read_tsv(path)
    out = []
    for code, _size, scored, mean_centrality, k in rows:
        if k == "":
            continue
        out.append(RateEstimate(code, float(mean_centrality), float(k), int(scored)))
    return out


def _fit_section(values: np.ndarray) -> dict:
    if values.size < _MIN_FIT_SAMPLES:
        return {"skipped": f"only {values.size} samples (need {_MIN_FIT_SAMPLES})"}
    fits = fit_all(values)
    best = min(fits, key=lambda family: fits[family].sse)
    section = {family: fit.to_json() for family, fit in fits.items()}
    section["best_by_sse"] = best
    return section


def _test_section(values: np.ndarray) -> dict:
    if values.size < _MIN_TEST_SAMPLES:
        return {"skipped": f"only {values.size} samples (need {_MIN_TEST_SAMPLES})"}
    return normality_tests(values).to_json()


def run_stats(cfg: PipelineConfig) -> None:
    outdir = Path(cfg.outdir)
    rates_path = _require(cfg, "stats", "rates.tsv", "estimate")
    domains_path = _require(cfg, "stats", "domains.tsv", "decompose")
    centrality_path = _require(cfg, "stats", "centrality.tsv", "centrality")
    model_payload = read_json(_require(cfg, "stats", "model.json", "estimate"))
    store = _load_checkpoint(cfg, "stats")

    estimates = read_rates(rates_path)
    domain_table = read_domain_table(domains_path)
    percentile_of = read_percentiles(centrality_path)
    k_sample = np.array([e.k for e in estimates], dtype=np.float64)
    x_sample = np.array([e.mean_centrality for e in estimates], dtype=np.float64)

    write_json(
        outdir / "fits.json",
        {
            "schema_version": SCHEMA_VERSION,
            "improvement_rate": _fit_section(k_sample),
            "mean_centrality": _fit_section(x_sample),
        },
    )
    write_json(
        outdir / "tests.json",
        {
            "schema_version": SCHEMA_VERSION,
            "improvement_rate": _test_section(k_sample),
            "mean_centrality": _test_section(x_sample),
        },
    )

    size_of = {d["code"]: d["size"] for d in domain_table}
    if len(estimates) >= _MIN_REGRESSION_SAMPLES:
        regression = size_regression(estimates, size_of).to_json()
    else:
        regression = {"skipped": f"only {len(estimates)} estimates"}
    write_json(
        outdir / "size_regression.json",
        {"schema_version": SCHEMA_VERSION, **regression},
    )

    model = RegressionModel(
        slope=model_payload["slope"],
        intercept=model_payload["intercept"],
        sigma2=model_payload["sigma2"],
        n_train=model_payload["n_train"],
        provenance=model_payload["provenance"],
    )
    sensitivity = _dedup_sensitivity_section(store, estimates, percentile_of, model)
    write_json(
        outdir / "dedup_sensitivity.json",
        {"schema_version": SCHEMA_VERSION, **sensitivity},
    )
    _update_manifest(cfg)


def _dedup_sensitivity_section(
    store: CorpusStore,
    dedup_estimates: list[RateEstimate],
    percentile_of: dict[str, float],
    model: RegressionModel,
) -> dict:
    """Re-estimate rates on pre-dedup overlap patent sets and compare."""
    overlaps = compute_overlaps(store)
    surviving = noise_filter(overlaps, len(store.patents)).surviving
    overlap_by_code = {o.key.code: o.patents for o in surviving}
    original = []
    dedup_kept = []
    for estimate in dedup_estimates:
        patents = overlap_by_code.get(estimate.domain_code)
        if patents is None:
            continue
        values = [percentile_of[p] for p in sorted(patents) if p in percentile_of]
        if not values:
            continue
        original.append(
            estimate_k(
                model,
                float(np.mean(values)),
                domain_code=estimate.domain_code,
                scored_patent_count=len(values),
            )
        )
        dedup_kept.append(estimate)
    if len(original) < 2:
        return {"skipped": f"only {len(original)} comparable domains"}
    return dedup_sensitivity(original, dedup_kept).to_json()


def run_index(cfg: PipelineConfig) -> None:
    store = _load_checkpoint(cfg, "index")
    index = build_index(store)
    payload = {"schema_version": SCHEMA_VERSION, **index.to_json()}
    write_json(Path(cfg.outdir) / "search_index.json", payload)
    _update_manifest(cfg)


_STAGE_FUNCTIONS = {
    "ingest": run_ingest,
    "decompose": run_decompose,
    "centrality": run_centrality,
    "estimate": run_estimate,
    "stats": run_stats,
    "index": run_index,
}


def run_stage(name: str, cfg: PipelineConfig) -> None:
    """Run one stage, wrapping unexpected failures with the stage name."""
    function = _STAGE_FUNCTIONS[name]
    try:
        function(cfg)
    except StageError:
        raise
    except Exception as exc:
        raise StageError(
            name,
            f"{exc}; artifacts from completed stages remain under "
            f"'{cfg.outdir}'; fix the cause and rerun 'techrates {name}'",
        ) from exc


def run_all(cfg: PipelineConfig) -> None:
    """The monolithic pipeline: every stage in order, same functions."""
    for name in STAGE_ORDER:
        run_stage(name, cfg)
