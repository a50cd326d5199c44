"""Pipeline configuration: defaults, flat key=value files, env overrides.

Every field has a default, so an empty (or absent) config file runs the
desk preset: the bundled 5,000-patent synthetic corpus with 100 null
replicates. Published-scale runs override ``replicates`` to 1000 and
point the six input-file keys at a real corpus (all six must be given
together). Values come from, in increasing precedence: field defaults,
the config file, TECHRATES_-prefixed environment variables, and explicit
CLI overrides.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, fields
from datetime import date
from pathlib import Path

from .synth import SynthConfig

ENV_PREFIX = "TECHRATES_"


class ConfigError(ValueError):
    """Raised for unreadable, unknown, or ill-typed configuration."""


_INPUT_KEYS = (
    "patents_file",
    "upc_file",
    "ipc_file",
    "citations_file",
    "upc_classes_file",
    "ipc_classes_file",
)


@dataclass
class PipelineConfig:
    # corpus inputs; all six set together, or none to synthesize
    patents_file: str | None = None
    upc_file: str | None = None
    ipc_file: str | None = None
    citations_file: str | None = None
    upc_classes_file: str | None = None
    ipc_classes_file: str | None = None

    outdir: str = "artifacts"
    seed: int = 101

    window_start: date = date(1976, 1, 1)
    window_end: date = date(2015, 6, 1)
    excluded_classes: tuple[str, ...] = ("G9B",)
    error_budget: float = 0.001

    min_size: int = 100
    horizon_years: int = 3
    replicates: int = 100
    swap_factor: float = 10.0
    epsilon: float = 1e-9

    slope: float = 6.217219
    intercept: float = -4.974221
    sigma2: float = 0.0

    top_n: int = 5
    sample_size: int = 20
    bind: str = "127.0.0.1:8340"

    # synthetic corpus shape (used only when no input files are given)
    synth_patents: int = 5000
    synth_year_start: int = 1980
    synth_year_end: int = 2000
    synth_upc_classes: int = 17
    synth_ipc_classes: int = 26
    synth_class_skew: float = 0.15
    synth_partner_ipc: int = 2
    synth_partner_prob: float = 0.95
    synth_extra_upc: float = 0.4
    synth_extra_ipc: float = 0.4
    synth_citation_rate: float = 10.0
    synth_within_share: float = 0.7
    synth_special_fraction: float = 0.0

    def validate(self) -> None:
        given = [k for k in _INPUT_KEYS if getattr(self, k) is not None]
        if given and len(given) != len(_INPUT_KEYS):
            missing = sorted(set(_INPUT_KEYS) - set(given))
            raise ConfigError(f"input files must be given together; missing {missing}")
        if self.window_end < self.window_start:
            raise ConfigError("window_end precedes window_start")
        if self.min_size < 1:
            raise ConfigError("min_size must be at least 1")
        if self.horizon_years < 0:
            raise ConfigError("horizon_years cannot be negative")
        if self.replicates < 1:
            raise ConfigError("replicates must be at least 1")
        if self.swap_factor <= 0:
            raise ConfigError("swap_factor must be positive")
        if self.epsilon <= 0:
            raise ConfigError("epsilon must be positive")
        if not (0 <= self.error_budget < 1):
            raise ConfigError("error_budget must lie in [0, 1)")
        if self.top_n < 1:
            raise ConfigError("top_n must be at least 1")
        if self.sample_size < 1:
            raise ConfigError("sample_size must be at least 1")

    def uses_synthetic_corpus(self) -> bool:
        return self.patents_file is None

    def synth_config(self) -> SynthConfig:
        return SynthConfig(
            n_patents=self.synth_patents,
            year_start=self.synth_year_start,
            year_end=self.synth_year_end,
            n_upc_classes=self.synth_upc_classes,
            n_ipc_classes=self.synth_ipc_classes,
            class_skew=self.synth_class_skew,
            partner_ipc_per_upc=self.synth_partner_ipc,
            partner_prob=self.synth_partner_prob,
            extra_upc_mean=self.synth_extra_upc,
            extra_ipc_mean=self.synth_extra_ipc,
            citation_rate=self.synth_citation_rate,
            within_class_share=self.synth_within_share,
            special_prefix_fraction=self.synth_special_fraction,
        )

    def canonical(self) -> str:
        """Stable text rendering used for the manifest's config hash.

        Skips fields that cannot change artifact content (the output
        location and the service bind address), so the same analysis
        written to two directories carries one hash.
        """
        parts = []
        for f in sorted(fields(self), key=lambda f: f.name):
            if f.name in ("outdir", "bind"):
                continue
            value = getattr(self, f.name)
            if isinstance(value, date):
                value = value.isoformat()
            elif isinstance(value, tuple):
                value = ",".join(value)
            parts.append(f"{f.name}={value}")
        return "\n".join(parts)

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode("utf-8")).hexdigest()


def _parse_value(name: str, text: str, annotation: str):
    text = text.strip()
    try:
        if annotation == "str":
            return text
        if annotation == "str | None":
            return text if text else None
        if annotation == "int":
            return int(text)
        if annotation == "float":
            return float(text)
        if annotation == "date":
            return date.fromisoformat(text)
        if annotation == "tuple[str, ...]":
            return tuple(part.strip() for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {text!r} ({exc})") from None
    raise ConfigError(f"unsupported config field type for {name}: {annotation}")


def _field_annotations() -> dict[str, str]:
    return {f.name: f.type for f in fields(PipelineConfig)}


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse flat ``key = value`` lines; '#' starts a comment."""
    annotations = _field_annotations()
    values: dict = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{number}: expected key = value, got {raw!r}")
        key, _, value_text = line.partition("=")
        key = key.strip()
        if key not in annotations:
            raise ConfigError(f"{source}:{number}: unknown config key {key!r}")
        values[key] = _parse_value(key, value_text, annotations[key])
    return values


def _env_overrides(environ) -> dict:
    annotations = _field_annotations()
    values: dict = {}
    for key, annotation in annotations.items():
        env_key = ENV_PREFIX + key.upper()
        if env_key in environ:
            values[key] = _parse_value(key, environ[env_key], annotation)
    return values


def load_config(
    path: str | Path | None = None,
    environ=None,
    overrides: dict | None = None,
) -> PipelineConfig:
    """Resolve a full configuration from file, environment, and overrides."""
    values: dict = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        values.update(parse_config_text(path.read_text(encoding="utf-8"), str(path)))
    values.update(_env_overrides(environ if environ is not None else os.environ))
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    config = PipelineConfig(**values)
    config.validate()
    return config
