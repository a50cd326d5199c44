"""End-to-end acceptance checks, one test per shipped guarantee.

Each test asserts a stated tolerance or invariant and appears as one
pass/fail line in the terminal summary (see conftest). Expected numbers
were computed with independent oracles before being frozen here:
closed-form arithmetic checked with mpmath at 60 decimal digits for the
rate model, explicit pair enumeration for centrality, and scipy
reference distributions for the fitting checks.
"""

from __future__ import annotations

import json
import math
import time
from pathlib import Path

import numpy as np
import pytest
import scipy.stats

from conftest import mini_config
from _fixtures import build_store, chain_store, make_patent
from techrates.citegraph import brute_force_spnp, build_snapshot, spnp
from techrates.config import PipelineConfig
from techrates.domains import (
    ClassPairKey,
    DomainStatus,
    OverlapSet,
    decompose,
    expected_overlap,
    noise_filter,
)
from techrates.distfit import fit_all, fit_distribution, normality_tests
from techrates.nullmodel import rank_percentile, rewire
from techrates.pipeline import run_all
from techrates.ratemodel import (
    DEFAULT_MODEL,
    TrainingRecord,
    estimate_k,
    invert_k,
    train,
)
from techrates.service import ArtifactBundle
from techrates.synth import SynthConfig, generate_synthetic_corpus
from techrates.textsearch import mpr, rank_domains

# Ninety reference improvement rates in percent per year: fifty across
# the full estimated range, the twenty fastest, and the twenty slowest.
REFERENCE_RATES_PCT = (
    42.6, 7.1, 46.7, 113.9, 228.8, 5.6, 178.1, 8.9, 17.0, 23.1,
    41.2, 19.6, 38.8, 42.1, 24.1, 19.5, 23.1, 19.0, 60.9, 11.0,
    109.0, 21.0, 122.8, 20.8, 13.3, 44.9, 12.1, 11.4, 99.5, 10.3,
    109.9, 121.0, 70.5, 45.6, 6.5, 13.3, 35.0, 25.7, 16.6, 20.6,
    142.1, 8.8, 10.6, 14.0, 7.3, 27.6, 33.6, 11.7, 18.7, 128.6,
    228.8, 213.9, 202.5, 196.4, 195.9, 194.3, 193.4, 193.2, 192.8, 185.7,
    182.3, 179.3, 178.1, 175.9, 174.4, 165.7, 160.7, 154.9, 147.2, 142.1,
    1.9, 2.8, 2.8, 2.8, 2.9, 2.9, 2.9, 2.9, 3.0, 3.1,
    3.1, 3.2, 3.2, 3.2, 3.3, 3.3, 3.4, 3.4, 3.4, 3.4,
)


def test_c01_expected_overlap_value_and_noise_rule():
    """Expected co-classification size and the strict survival cutoff."""
    expected = expected_overlap(9282, 5147, 5083263)
    assert expected == pytest.approx(9.40, abs=0.01)

    t0 = time.perf_counter()
    for _ in range(1000):
        expected_overlap(9282, 5147, 5083263)
    per_call = (time.perf_counter() - t0) / 1000.0
    assert per_call < 1e-3

    pair = OverlapSet(ClassPairKey("073", "G01N"), frozenset({"A", "B"}), expected)
    part = noise_filter([pair], 5083263)
    assert part.surviving == []
    assert part.discarded == [pair]
    assert part.patents_lost == 2


def test_c02_centrality_agrees_with_pair_enumeration():
    """Fast centrality equals the quadratic oracle on 220 random DAGs."""
    t0 = time.monotonic()
    rng = np.random.default_rng(20240501)
    for _ in range(220):
        n = int(rng.integers(1, 13))
        years = sorted(int(rng.integers(1980, 1996)) for _ in range(n))
        patents = [make_patent(f"N{i}", years[i]) for i in range(n)]
        density = float(rng.uniform(0.05, 0.9))
        citations = [
            (f"N{i}", f"N{j}")
            for i in range(n)
            for j in range(i)
            if rng.random() < density
        ]
        dag = build_snapshot(build_store(patents, citations=citations), 1995)
        assert spnp(dag) == brute_force_spnp(dag)

    chain = build_snapshot(chain_store([1980, 1985, 1990]), 1995)
    by_id = {s.patent_id: s for s in spnp(chain)}
    assert by_id["P1"].value == 4
    assert (by_id["P1"].n_minus, by_id["P1"].n_plus) == (2, 2)

    lone = build_snapshot(build_store([make_patent("L", 1988)]), 1995)
    assert spnp(lone)[0].value == 1

    diamond = build_store(
        [
            make_patent("A", 1980),
            make_patent("B", 1985),
            make_patent("C", 1985),
            make_patent("D", 1990),
        ],
        citations=[("B", "A"), ("C", "A"), ("D", "B"), ("D", "C")],
    )
    scores = {s.patent_id: s for s in spnp(build_snapshot(diamond, 1995))}
    assert {pid: s.value for pid, s in scores.items()} == {
        "A": 4, "B": 4, "C": 4, "D": 4,
    }
    assert (scores["D"].n_minus, scores["D"].n_plus) == (1, 4)
    assert (scores["A"].n_minus, scores["A"].n_plus) == (4, 1)
    assert time.monotonic() - t0 < 10.0


def test_c03_rewiring_preserves_margins_at_scale():
    """Degree sequences, year-pair mix and within-class out-degrees
    survive rewiring of the full-size synthetic corpus, with no self or
    duplicate arcs, across twenty replicates."""
    t0 = time.monotonic()
    store, _ = generate_synthetic_corpus(SynthConfig(), seed=11)
    assert len(store.patents) == 5000
    dag = build_snapshot(store, cutoff_year=2001)
    assert 45000 <= dag.m <= 55000

    classes = np.array(
        [store.patents[pid].main_class or "" for pid in dag.patent_ids]
    )
    observed_cited = dag.cited.copy()
    out0 = np.bincount(dag.citing, minlength=dag.n)
    in0 = np.bincount(dag.cited, minlength=dag.n)
    pair0 = np.sort(dag.years[dag.citing].astype(np.int64) * 10000
                    + dag.years[dag.cited])
    within0 = np.bincount(
        dag.citing[classes[dag.citing] == classes[dag.cited]], minlength=dag.n
    )

    for r in range(20):
        null = rewire(dag, store, seed=9000 + r).dag
        assert np.array_equal(dag.cited, observed_cited)
        assert np.array_equal(np.bincount(null.citing, minlength=null.n), out0)
        assert np.array_equal(np.bincount(null.cited, minlength=null.n), in0)
        pair = np.sort(null.years[null.citing].astype(np.int64) * 10000
                       + null.years[null.cited])
        assert np.array_equal(pair, pair0)
        within = np.bincount(
            null.citing[classes[null.citing] == classes[null.cited]],
            minlength=null.n,
        )
        assert np.array_equal(within, within0)
        assert np.all(null.citing != null.cited)
        codes = null.citing.astype(np.int64) * null.n + null.cited
        assert np.unique(codes).size == null.m
    assert time.monotonic() - t0 < 120.0


def test_c04_percentiles_follow_uniform_law(mini_artifacts):
    """Per-cohort percentile ECDFs deviate from uniform by at most the
    tie-group allowance, and a hand fixture ranks exactly."""
    cohorts: dict[int, list[tuple[float, float]]] = {}
    lines = Path(mini_artifacts, "centrality.tsv").read_text().splitlines()
    header = lines[0].split("\t")
    for line in lines[1:]:
        row = dict(zip(header, line.split("\t")))
        cohorts.setdefault(int(row["cohort_year"]), []).append(
            (float(row["z"]), float(row["percentile"]))
        )
    assert cohorts
    for year, rows in cohorts.items():
        z = np.array([zv for zv, _ in rows])
        p = np.array([pv for _, pv in rows])
        m = len(rows)
        ties = int(np.max(np.unique(z, return_counts=True)[1]))
        ecdf = np.array([np.mean(p <= pi) for pi in p])
        assert np.max(np.abs(ecdf - p)) <= (ties + 1) / m

    fixture = [("a", 1990, -1.0), ("b", 1990, 0.0), ("c", 1990, 2.0),
               ("d", 1990, 5.0)]
    assert [r.percentile for r in rank_percentile(fixture)] == [
        0.25, 0.5, 0.75, 1.0,
    ]


def test_c05_known_rate_predictions_and_round_trip():
    """Fixed-point predictions of the built-in model and the exactness
    of inversion composed with prediction."""
    assert estimate_k(DEFAULT_MODEL, 0.0).k == pytest.approx(0.006914, abs=1e-6)
    assert estimate_k(DEFAULT_MODEL, 0.5).k == pytest.approx(
        0.15480151980700438, abs=1e-5
    )
    for x in np.linspace(0.0, 1.0, 21):
        k = estimate_k(DEFAULT_MODEL, float(x)).k
        assert invert_k(DEFAULT_MODEL, k) == pytest.approx(float(x), abs=1e-12)


def test_c06_reference_rate_range_inverts_into_unit_interval():
    """All ninety reference rates map back to centralities in (0, 1)."""
    assert len(REFERENCE_RATES_PCT) == 90
    for pct in REFERENCE_RATES_PCT:
        x = invert_k(DEFAULT_MODEL, pct / 100.0)
        assert 0.0 < x < 1.0
    assert invert_k(DEFAULT_MODEL, min(REFERENCE_RATES_PCT) / 100.0) == pytest.approx(
        0.1626, abs=1e-4
    )
    assert invert_k(DEFAULT_MODEL, max(REFERENCE_RATES_PCT) / 100.0) == pytest.approx(
        0.9332, abs=1e-4
    )


def test_c07_training_recovers_generating_coefficients():
    """Noise-free training is exact to 1e-9; with log-noise 0.3 the
    generating coefficients fall within three standard errors in at
    least 95 of 100 seeded trials."""
    xs = np.linspace(0.05, 0.95, 30)
    clean = [
        TrainingRecord(f"D{i}", float(x), math.exp(6.0 * x - 4.5))
        for i, x in enumerate(xs)
    ]
    model, _ = train(clean)
    assert model.slope == pytest.approx(6.0, abs=1e-9)
    assert model.intercept == pytest.approx(-4.5, abs=1e-9)

    hits = 0
    for trial in range(100):
        rng = np.random.default_rng(7000 + trial)
        x = rng.uniform(0.05, 0.95, 30)
        k = np.exp(6.0 * x - 4.5 + rng.normal(0.0, 0.3, 30))
        noisy, diag = train(
            [TrainingRecord(str(i), float(xi), float(ki))
             for i, (xi, ki) in enumerate(zip(x, k))]
        )
        if (abs(noisy.slope - 6.0) <= 3 * diag.se_slope
                and abs(noisy.intercept + 4.5) <= 3 * diag.se_intercept):
            hits += 1
    assert hits >= 95


def test_c08_decomposition_invariants_across_seeds():
    """Partition invariants of the decomposition hold on ten corpora,
    and the coverage histogram matches an independent re-bucketing."""
    config = SynthConfig(
        n_patents=500, n_upc_classes=5, n_ipc_classes=6, citation_rate=4.0
    )
    for seed in range(10):
        store, _ = generate_synthetic_corpus(config, seed=seed)
        result = decompose(store, min_size=20)

        for pair in result.noise.surviving:
            assert pair.actual_overlap > pair.expected_overlap
        for pair in result.noise.discarded:
            assert pair.actual_overlap <= pair.expected_overlap

        seen: dict[str, str] = {}
        for domain in result.domains:
            assert domain.size <= domain.pre_dedup_size
            if domain.status is DomainStatus.VALID:
                assert domain.size >= 20
            elif domain.status is DomainStatus.DISCARDED_SMALL:
                assert 0 < domain.size < 20
            elif domain.status is DomainStatus.EMPTIED:
                assert domain.size == 0
            else:
                assert domain.status is DomainStatus.DISCARDED_NOISE
                assert domain.size == 0
            for pid in domain.patents:
                assert pid not in seen
                seen[pid] = domain.code
        assert seen == result.assignment

        coverage = result.coverage
        assert coverage.total_patents == len(store.patents)
        assert coverage.assigned_patents == len(result.assignment)
        valid_codes = {d.code for d in result.valid_domains()}
        assert coverage.assigned_to_valid == sum(
            1 for code in result.assignment.values() if code in valid_codes
        )

        edges = ((1, 9), (10, 99), (100, 999), (1000, 9999), (10000, None))
        recounted = {}
        for lo, hi in edges:
            label = f"{lo}-{hi}" if hi is not None else f"{lo}+"
            sizes = [d.size for d in result.domains
                     if d.size >= lo and (hi is None or d.size <= hi)]
            recounted[label] = (len(sizes), sum(sizes))
        reported = {band["band"]: (band["domains"], band["patents"])
                    for band in coverage.size_bands}
        assert reported == recounted


def test_c09_distribution_fits_and_test_calibration():
    """Shape recovery on heavy-tailed data, Gaussian-plus-exponential
    winning on its own data, and 99%-level normality tests that reject
    skewed samples and accept Gaussian ones in at least 95 of 100
    seeded trials per test."""
    lognormal_sample = scipy.stats.lognorm.rvs(
        0.9424, loc=0.018, scale=0.1014, size=1757,
        random_state=np.random.default_rng(424242),
    )
    refit = fit_distribution(lognormal_sample, "lognormal")
    assert refit.params["shape"] == pytest.approx(0.9424, abs=0.1)

    emg_sample = scipy.stats.exponnorm.rvs(
        2.057, loc=0.313, scale=0.0586, size=1757,
        random_state=np.random.default_rng(434343),
    )
    fits = fit_all(emg_sample)
    assert fits["emg"].sse <= fits["lognormal"].sse

    rejected = {"dagostino": 0, "ks": 0, "anderson": 0}
    accepted = {"dagostino": 0, "ks": 0, "anderson": 0}
    for trial in range(100):
        rng = np.random.default_rng(5000 + trial)
        skewed = scipy.stats.exponnorm.rvs(
            2.057, loc=0.313, scale=0.0586, size=1757, random_state=rng
        )
        gaussian = rng.normal(0.5, 0.1, size=1757)
        skew_verdict = normality_tests(skewed).rejects(0.01)
        gauss_verdict = normality_tests(gaussian).rejects(0.01)
        for name in rejected:
            rejected[name] += skew_verdict[name]
            accepted[name] += not gauss_verdict[name]
    for name in rejected:
        assert rejected[name] >= 95
        assert accepted[name] >= 95


def test_c10_relevance_fixture_symmetry_and_ranking_oracle():
    """The precision/recall mean on a hand pair, its set-exchange
    symmetry, and agreement with a brute-force ranking of 20 domains."""
    precision, recall, score = mpr(100, 50, 40)
    assert precision == 0.8
    assert recall == 0.4
    assert score == pytest.approx(0.60, abs=1e-12)
    swapped = mpr(50, 100, 40)
    assert (swapped[0], swapped[1]) == (recall, precision)
    assert swapped[2] == score

    rng = np.random.default_rng(515151)
    universe = np.array([f"P{i:03d}" for i in range(400)])
    domains = {
        f"D{i:02d}": frozenset(
            rng.choice(universe, size=int(rng.integers(5, 60)), replace=False)
        )
        for i in range(20)
    }
    query = frozenset(rng.choice(universe, size=80, replace=False))

    expected = []
    for code in domains:
        inter = len(query & domains[code])
        if inter == 0:
            continue
        p = inter / len(domains[code])
        r = inter / len(query)
        expected.append((-(p + r) / 2.0, -inter, code))
    expected.sort()

    got = rank_domains(query, domains, top_n=20)
    assert [m.code for m in got] == [code for _, _, code in expected]
    for match in got:
        inter = len(query & domains[match.code])
        assert match.matched_count == inter
        assert match.mpr == (inter / len(domains[match.code]) + inter / 80) / 2.0


def test_c11_desk_preset_reproducible_run_and_search(tmp_path):
    """The default preset finishes each run inside five minutes, two
    runs are byte-identical, and searching the built index returns at
    most five matches with sane relevance and rate values."""
    trees = []
    for name in ("run1", "run2"):
        outdir = tmp_path / name
        t0 = time.monotonic()
        run_all(PipelineConfig(outdir=str(outdir)))
        assert time.monotonic() - t0 < 300.0
        trees.append(outdir)

    first = sorted(p.relative_to(trees[0]) for p in trees[0].rglob("*") if p.is_file())
    second = sorted(p.relative_to(trees[1]) for p in trees[1].rglob("*") if p.is_file())
    assert first == second
    for rel in first:
        assert (trees[0] / rel).read_bytes() == (trees[1] / rel).read_bytes()

    postings = json.loads((trees[0] / "search_index.json").read_text())["postings"]
    token = max(postings, key=lambda t: (len(postings[t]), t))
    payload = ArtifactBundle(trees[0]).search_response(token, 5)
    assert 1 <= len(payload["results"]) <= 5
    for row in payload["results"]:
        assert 0.0 < row["mpr"] <= 1.0
        assert row["k"] is not None and row["k"] > 0.0
