"""Patent-corpus decomposition into technological domains and
estimation of their yearly performance-improvement rates.

The package splits into layers that mirror the pipeline: ``corpus``
(ingestion and filtering), ``domains`` (class-overlap decomposition),
``citegraph`` and ``nullmodel`` (citation centrality against a
degree-structure-preserving null), ``ratemodel`` (centrality to rate
regression), ``distfit`` (distribution fits and normality tests),
``textsearch`` (keyword search and domain ranking), ``synth``
(self-contained synthetic corpora), and ``pipeline``/``service``/``cli``
(artifact plumbing, HTTP API, command line).
"""

from __future__ import annotations

__version__ = "0.1.0"

from .pipeline import SCHEMA_VERSION, STAGE_ORDER, StageError, run_all, run_stage
from .config import ConfigError, PipelineConfig, load_config
from .corpus import (
    CitationRecord,
    ClassMembership,
    CorpusFormatError,
    CorpusStore,
    PatentRecord,
    filter_corpus,
    load_corpus,
    load_corpus_dir,
    write_corpus,
)
from .domains import Decomposition, Domain, DomainStatus, decompose, expected_overlap
from .citegraph import CitationDag, build_snapshot, spnp
from .nullmodel import null_distribution, rank_percentile, zscore
from .ratemodel import (
    DEFAULT_MODEL,
    RateEstimate,
    RegressionModel,
    estimate_k,
    invert_k,
    project_performance,
    train,
)
from .distfit import fit_all, fit_distribution, normality_tests
from .textsearch import InvertedIndex, build_index, rank_domains, sample_patents, search
from .synth import SynthConfig, generate_synthetic_corpus
from .service import ArtifactBundle, create_app, serve

__all__ = [
    "__version__",
    "SCHEMA_VERSION",
    "STAGE_ORDER",
    "StageError",
    "run_all",
    "run_stage",
    "ConfigError",
    "PipelineConfig",
    "load_config",
    "CitationRecord",
    "ClassMembership",
    "CorpusFormatError",
    "CorpusStore",
    "PatentRecord",
    "filter_corpus",
    "load_corpus",
    "load_corpus_dir",
    "write_corpus",
    "Decomposition",
    "Domain",
    "DomainStatus",
    "decompose",
    "expected_overlap",
    "CitationDag",
    "build_snapshot",
    "spnp",
    "null_distribution",
    "rank_percentile",
    "zscore",
    "DEFAULT_MODEL",
    "RateEstimate",
    "RegressionModel",
    "estimate_k",
    "invert_k",
    "project_performance",
    "train",
    "fit_all",
    "fit_distribution",
    "normality_tests",
    "InvertedIndex",
    "build_index",
    "rank_domains",
    "sample_patents",
    "search",
    "SynthConfig",
    "generate_synthetic_corpus",
    "ArtifactBundle",
    "create_app",
    "serve",
]
