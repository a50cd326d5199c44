"""Pipeline stages: artifact inventory, manifest checksums, stage
prerequisites, staged-versus-monolithic composition, and the stats
stage's sample-size gates."""

from __future__ import annotations

import hashlib
import json
import shutil
from pathlib import Path

import numpy as np
import pytest

from techrates.config import PipelineConfig
from techrates.pipeline import (
    SCHEMA_VERSION,
    STAGE_ORDER,
    StageError,
    read_assignments,
    read_domain_table,
    read_json,
    read_percentiles,
    read_rates,
    read_tsv,
    run_all,
    run_stage,
    valid_domain_patents,
    write_tsv,
)
from techrates.ratemodel import DEFAULT_MODEL, estimate_k
from conftest import mini_config

EXPECTED_FILES = [
    "assignments.tsv",
    "centrality.tsv",
    "corpus/citations.tsv",
    "corpus/ipc.tsv",
    "corpus/ipc_classes.txt",
    "corpus/patents.tsv",
    "corpus/upc.tsv",
    "corpus/upc_classes.txt",
    "coverage.json",
    "dedup_sensitivity.json",
    "domains.tsv",
    "filter_report.json",
    "fits.json",
    "manifest.json",
    "model.json",
    "null_diagnostics.json",
    "rates.tsv",
    "search_index.json",
    "size_regression.json",
    "spnp.tsv",
    "tests.json",
]

TSV_HEADERS = {
    "domains.tsv": [
        "code", "upc_label", "ipc_label", "pre_dedup_size",
        "expected_overlap", "size", "status",
    ],
    "assignments.tsv": ["patent_id", "domain_code"],
    "spnp.tsv": ["patent_id", "cutoff_year", "n_minus", "n_plus", "spnp"],
    "centrality.tsv": [
        "patent_id", "cohort_year", "spnp_observed", "null_mean",
        "null_std", "z", "percentile",
    ],
    "rates.tsv": [
        "domain_code", "size", "scored_patent_count", "mean_centrality", "k",
    ],
}


def listing(outdir: str) -> list[str]:
    root = Path(outdir)
    return sorted(
        str(p.relative_to(root)) for p in root.rglob("*") if p.is_file()
    )


class TestArtifacts:
    def test_complete_inventory(self, mini_artifacts):
        assert listing(mini_artifacts) == EXPECTED_FILES

    def test_no_temp_files_left(self, mini_artifacts):
        assert not list(Path(mini_artifacts).rglob("*.tmp"))

    def test_tsv_headers(self, mini_artifacts):
        for name, expected in TSV_HEADERS.items():
            header, _ = read_tsv(Path(mini_artifacts) / name)
            assert header == expected, name

    def test_json_artifacts_carry_schema_version(self, mini_artifacts):
        for path in Path(mini_artifacts).glob("*.json"):
            payload = json.loads(path.read_text())
            assert payload["schema_version"] == SCHEMA_VERSION, path.name
            assert path.read_text().endswith("\n"), path.name


class TestManifest:
    def test_checksums_cover_and_match_every_file(self, mini_artifacts):
        root = Path(mini_artifacts)
        manifest = read_json(root / "manifest.json")
        expected = [name for name in listing(mini_artifacts) if name != "manifest.json"]
        assert sorted(manifest["artifacts"]) == expected
        for name, digest in manifest["artifacts"].items():
            actual = hashlib.sha256((root / name).read_bytes()).hexdigest()
            assert actual == digest, name

    def test_run_parameters_recorded(self, mini_artifacts):
        manifest = read_json(Path(mini_artifacts) / "manifest.json")
        assert manifest["schema_version"] == SCHEMA_VERSION
        assert manifest["seed"] == 2024
        assert manifest["replicates"] == 8
        assert manifest["config_hash"] == mini_config(mini_artifacts).config_hash()


class TestPrerequisites:
    @pytest.mark.parametrize(
        "stage,producer",
        [
            ("decompose", "ingest"),
            ("centrality", "ingest"),
            ("estimate", "decompose"),
            ("stats", "estimate"),
            ("index", "ingest"),
        ],
    )
    def test_stages_name_their_first_missing_producer(self, tmp_path, stage, producer):
        cfg = mini_config(str(tmp_path / "empty"))
        with pytest.raises(StageError, match=f"run 'techrates {producer}' first"):
            run_stage(stage, cfg)

    def test_later_prerequisites_after_earlier_stages(self, tmp_path):
        cfg = mini_config(str(tmp_path / "partial"), synth_patents=120, replicates=2)
        run_stage("ingest", cfg)
        with pytest.raises(StageError, match="run 'techrates decompose' first") as exc:
            run_stage("estimate", cfg)
        assert exc.value.stage == "estimate"
        run_stage("decompose", cfg)
        with pytest.raises(StageError, match="run 'techrates centrality' first"):
            run_stage("estimate", cfg)

    def test_stage_error_message_carries_stage_name(self, tmp_path):
        cfg = mini_config(str(tmp_path / "empty"))
        with pytest.raises(StageError, match="stage 'decompose' failed"):
            run_stage("decompose", cfg)


def tiny_config(outdir: str, **overrides) -> PipelineConfig:
    values = dict(
        synth_patents=300,
        replicates=3,
        min_size=15,
        synth_upc_classes=4,
        synth_ipc_classes=5,
        synth_citation_rate=5.0,
    )
    values.update(overrides)
    return mini_config(outdir, **values)


class TestComposition:
    def test_staged_run_equals_monolithic_run(self, tmp_path):
        mono = str(tmp_path / "mono")
        staged = str(tmp_path / "staged")
        run_all(tiny_config(mono))
        for stage in STAGE_ORDER:
            run_stage(stage, tiny_config(staged))
        assert listing(mono) == listing(staged)
        for name in listing(mono):
            assert (Path(mono) / name).read_bytes() == (
                Path(staged) / name
            ).read_bytes(), name

    def test_rerun_is_byte_identical(self, tmp_path):
        first = str(tmp_path / "first")
        second = str(tmp_path / "second")
        run_all(tiny_config(first))
        run_all(tiny_config(second))
        for name in listing(first):
            assert (Path(first) / name).read_bytes() == (
                Path(second) / name
            ).read_bytes(), name

    def test_single_stage_rerun_rewrites_identically(self, tmp_path):
        outdir = str(tmp_path / "resume")
        run_all(tiny_config(outdir))
        domains = (Path(outdir) / "domains.tsv").read_bytes()
        manifest = (Path(outdir) / "manifest.json").read_bytes()
        run_stage("decompose", tiny_config(outdir))
        assert (Path(outdir) / "domains.tsv").read_bytes() == domains
        assert (Path(outdir) / "manifest.json").read_bytes() == manifest


class TestCohorts:
    def test_horizon_bounds_scored_cohorts(self, mini_artifacts):
        # Synthetic years run 1985-1995 and the horizon is 3, so cohorts
        # 1985-1992 are scored and 1993-1995 lack a mature snapshot.
        diagnostics = read_json(Path(mini_artifacts) / "null_diagnostics.json")
        assert diagnostics["horizon_years"] == 3
        assert diagnostics["scored_cohorts"] == list(range(1985, 1993))
        assert diagnostics["unscored_cohorts"] == [1993, 1994, 1995]
        assert sorted(diagnostics["cohorts"]) == [str(y) for y in range(1985, 1993)]

    def test_snapshot_cutoffs_follow_cohorts(self, mini_artifacts):
        _, rows = read_tsv(Path(mini_artifacts) / "spnp.tsv")
        cutoffs = {int(r[1]) for r in rows}
        assert cutoffs == {y + 3 for y in range(1985, 1993)}

    def test_percentiles_lie_in_unit_interval(self, mini_artifacts):
        percentile_of = read_percentiles(Path(mini_artifacts) / "centrality.tsv")
        values = np.array(list(percentile_of.values()))
        assert values.size > 0
        assert np.all(values > 0.0)
        assert np.all(values <= 1.0)

    def test_scored_patents_match_centrality_rows(self, mini_artifacts):
        _, rows = read_tsv(Path(mini_artifacts) / "centrality.tsv")
        percentile_of = read_percentiles(Path(mini_artifacts) / "centrality.tsv")
        assert len(rows) == len(percentile_of)


class TestReaders:
    def test_read_rates_skips_unestimated_rows(self, tmp_path):
        path = tmp_path / "rates.tsv"
        write_tsv(
            path,
            TSV_HEADERS["rates.tsv"],
            [
                ("100A01A", 40, 12, 0.5, 0.15480151980700438),
                ("100B01B", 31, 0, "", ""),
            ],
        )
        rates = read_rates(path)
        assert len(rates) == 1
        assert rates[0].domain_code == "100A01A"
        assert rates[0].k == 0.15480151980700438
        assert rates[0].scored_patent_count == 12

    def test_valid_domain_patents_excludes_demoted(self, mini_artifacts):
        table = read_domain_table(Path(mini_artifacts) / "domains.tsv")
        assignment = read_assignments(Path(mini_artifacts) / "assignments.tsv")
        members = valid_domain_patents(table, assignment)
        valid_codes = {d["code"] for d in table if d["status"] == "valid"}
        assert set(members) == valid_codes
        sizes = {d["code"]: d["size"] for d in table}
        for code, patents in members.items():
            assert len(patents) == sizes[code]

    def test_assignments_are_single_valued(self, mini_artifacts):
        assignment = read_assignments(Path(mini_artifacts) / "assignments.tsv")
        _, rows = read_tsv(Path(mini_artifacts) / "assignments.tsv")
        assert len(rows) == len(assignment)


class TestStatsGates:
    def test_enough_estimates_produce_full_fits(self, mini_artifacts, tmp_path):
        outdir = tmp_path / "stats"
        shutil.copytree(mini_artifacts, outdir)
        table = read_domain_table(outdir / "domains.tsv")
        codes = [d["code"] for d in table][:36]
        assert len(codes) >= 30
        rng = np.random.default_rng(13)
        rows = []
        for code in codes:
            x = float(rng.uniform(0.2, 0.8))
            rows.append((code, 40, 20, x, estimate_k(DEFAULT_MODEL, x).k))
        write_tsv(outdir / "rates.tsv", TSV_HEADERS["rates.tsv"], rows)
        run_stage("stats", mini_config(str(outdir)))

        fits = read_json(outdir / "fits.json")
        for section in ("improvement_rate", "mean_centrality"):
            assert set(fits[section]) == {"lognormal", "emg", "normal", "best_by_sse"}
            assert fits[section]["best_by_sse"] in ("lognormal", "emg", "normal")
        tests = read_json(outdir / "tests.json")
        assert set(tests["improvement_rate"]) == {"n", "dagostino", "ks", "anderson"}
        regression = read_json(outdir / "size_regression.json")
        assert regression["n"] == 36

    def test_no_valid_domains_still_completes(self, tmp_path):
        outdir = str(tmp_path / "sparse")
        run_all(tiny_config(outdir, min_size=100000))
        assert read_rates(Path(outdir) / "rates.tsv") == []
        fits = read_json(Path(outdir) / "fits.json")
        assert fits["improvement_rate"] == {"skipped": "only 0 samples (need 30)"}
        tests = read_json(Path(outdir) / "tests.json")
        assert tests["improvement_rate"] == {"skipped": "only 0 samples (need 20)"}
        regression = read_json(Path(outdir) / "size_regression.json")
        assert regression["skipped"] == "only 0 estimates"
        sensitivity = read_json(Path(outdir) / "dedup_sensitivity.json")
        assert sensitivity["skipped"] == "only 0 comparable domains"
        index = read_json(Path(outdir) / "search_index.json")
        assert index["patent_count"] == 300
