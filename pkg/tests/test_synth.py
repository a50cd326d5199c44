"""Synthetic corpus generation: determinism, realized statistics, and
configuration validation."""

from __future__ import annotations

import pytest

from techrates.corpus import UPC, validate_store, write_corpus
from techrates.synth import (
    InfeasibleConfigError,
    SynthConfig,
    generate_synthetic_corpus,
)


def small_config(**overrides) -> SynthConfig:
    base = dict(
        n_patents=800,
        year_start=1984,
        year_end=1996,
        n_upc_classes=6,
        n_ipc_classes=9,
        citation_rate=6.0,
    )
    base.update(overrides)
    return SynthConfig(**base)


@pytest.fixture(scope="module")
def generated():
    return generate_synthetic_corpus(small_config(), seed=17)


class TestDeterminism:
    def test_identical_across_calls(self, generated, tmp_path):
        store, report = generated
        again, report2 = generate_synthetic_corpus(small_config(), seed=17)
        first_dir = tmp_path / "first"
        second_dir = tmp_path / "second"
        first_dir.mkdir()
        second_dir.mkdir()
        write_corpus(store, first_dir)
        write_corpus(again, second_dir)
        for name in sorted(p.name for p in first_dir.iterdir()):
            assert (first_dir / name).read_bytes() == (second_dir / name).read_bytes()
        assert report.n_citations == report2.n_citations
        assert report.class_sizes == report2.class_sizes

    def test_seed_changes_output(self):
        a, _ = generate_synthetic_corpus(small_config(), seed=1)
        b, _ = generate_synthetic_corpus(small_config(), seed=2)
        pairs_a = {(c.citing_id, c.cited_id) for c in a.citations}
        pairs_b = {(c.citing_id, c.cited_id) for c in b.citations}
        assert pairs_a != pairs_b


class TestStructure:
    def test_store_is_internally_consistent(self, generated):
        store, _ = generated
        assert validate_store(store) == []

    def test_report_matches_store(self, generated):
        store, report = generated
        assert report.n_patents == len(store.patents) == 800
        assert report.n_citations == len(store.citations)
        assert report.mean_citations == pytest.approx(report.n_citations / 800)
        within = sum(
            1
            for c in store.citations
            if store.patents[c.citing_id].main_class == store.patents[c.cited_id].main_class
        )
        assert report.within_class_citations == within

    def test_citation_rate_near_target(self, generated):
        _, report = generated
        assert report.mean_citations == pytest.approx(6.0, rel=0.05)

    def test_within_class_share_near_target(self, generated):
        _, report = generated
        share = report.within_class_citations / report.n_citations
        assert share == pytest.approx(0.7, abs=0.05)

    def test_no_self_or_duplicate_or_forward_citations(self, generated):
        store, _ = generated
        pairs = [(c.citing_id, c.cited_id) for c in store.citations]
        assert len(pairs) == len(set(pairs))
        assert all(a != b for a, b in pairs)
        # Citations point backward in (grant year, id) order, the same
        # ordering the snapshot builder enforces.
        for citing, cited in pairs:
            assert store.patents[cited].grant_year <= store.patents[citing].grant_year
            assert cited < citing

    def test_every_patent_has_main_class_and_membership(self, generated):
        store, _ = generated
        for pid, record in store.patents.items():
            assert record.main_class is not None
            assert record.main_class in store.upc_memberships[pid]
            assert store.ipc_memberships[pid]

    def test_class_sizes_cover_all_patents(self, generated):
        store, report = generated
        assert sum(report.class_sizes.values()) == 800
        assert set(report.class_sizes) == set(store.class_lists[UPC])

    def test_class_skew_concentrates_popularity(self):
        def ratio(skew):
            _, report = generate_synthetic_corpus(
                small_config(class_skew=skew), seed=23
            )
            sizes = sorted(report.class_sizes.values())
            return sizes[-1] / sizes[0]

        assert ratio(1.2) > 2 * ratio(0.0)

    def test_signature_words_appear_in_class_text(self, generated):
        store, report = generated
        for label, words in report.signature_words.items():
            members = [p for p in store.patents.values() if p.main_class == label]
            text = " ".join(p.title + " " + p.abstract for p in members).lower()
            assert any(word in text for word in words)

    def test_exact_within_share_when_forced(self):
        store, report = generate_synthetic_corpus(
            small_config(within_class_share=1.0), seed=3
        )
        assert report.within_class_citations == report.n_citations
        for c in store.citations:
            assert (
                store.patents[c.citing_id].main_class
                == store.patents[c.cited_id].main_class
            )

    def test_special_prefixes_generated_on_request(self):
        store, _ = generate_synthetic_corpus(
            small_config(special_prefix_fraction=0.1), seed=5
        )
        prefixes = {p.kind_prefix for p in store.patents.values()}
        assert "utility" in prefixes
        assert len(prefixes) > 1


class TestValidation:
    @pytest.mark.parametrize(
        "overrides",
        [
            dict(n_patents=5),
            dict(year_end=1970),
            dict(n_upc_classes=0),
            dict(partner_ipc_per_upc=50),
            dict(partner_prob=1.5),
            dict(within_class_share=-0.1),
            dict(citation_rate=-1.0),
            dict(citation_rate=500.0),
            dict(extra_upc_mean=-0.5),
            dict(title_words=(0, 4)),
            dict(abstract_words=(9, 3)),
        ],
    )
    def test_infeasible_configs_rejected(self, overrides):
        with pytest.raises(InfeasibleConfigError):
            generate_synthetic_corpus(small_config(**overrides), seed=0)
