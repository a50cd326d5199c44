"""Read-only HTTP API over a finished artifact directory.

The service loads every artifact it needs at startup (verifying the
sha256 checksums recorded in manifest.json), then answers queries from
immutable in-memory state, so concurrent requests share nothing mutable
and the artifact files are never written.

Endpoints (all JSON, every body carries ``schema_version``):

    GET /search?q=<text>&n=<int>        ranked domain matches, each with
                                        its rate estimate and a patent
                                        sample (top-central plus random)
    GET /domains?sort=k|size&limit=<n>  valid domains, sorted
    GET /domains/{code}                 one domain's detail row
    GET /domains/{code}/patents?kind=top|random&seed=<int>
    GET /healthz                        artifact checksum manifest

Malformed queries return 400 with a machine-readable reason; unknown
domain codes return 404. When a built web UI directory is supplied it is
served statically under /ui/.

The same response builders back the offline ``techrates search``
subcommand, which prints the identical JSON without a server.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

from .corpus import CorpusStore, load_corpus_dir
from .domains import DomainStatus
from .pipeline import (
    SCHEMA_VERSION,
    read_assignments,
    read_domain_table,
    read_json,
    read_percentiles,
    read_rates,
)
from .ratemodel import RateEstimate
from .textsearch import (
    EmptyQueryError,
    InvertedIndex,
    rank_domains,
    sample_patents,
    search,
    tokenize,
)

_REQUIRED_ARTIFACTS = (
    "manifest.json",
    "domains.tsv",
    "assignments.tsv",
    "centrality.tsv",
    "rates.tsv",
    "search_index.json",
)

_DEFAULT_LIST_LIMIT = 50
_SAMPLE_KINDS = ("top", "random")


class ArtifactError(RuntimeError):
    """The artifact directory is missing files or fails checksum checks."""


def _domain_seed(seed: int, code: str) -> int:
    digest = hashlib.sha256(f"{seed}:{code}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


class ArtifactBundle:
    """Immutable in-memory view of one pipeline run's artifacts."""

    def __init__(self, artifact_dir: str | Path, seed: int = 0, sample_size: int = 20):
        self.dir = Path(artifact_dir)
        self.seed = seed
        self.sample_size = sample_size
        for name in _REQUIRED_ARTIFACTS:
            if not (self.dir / name).exists():
                raise ArtifactError(
                    f"missing artifact '{name}' under '{self.dir}'; "
                    "run the pipeline first"
                )
        self.manifest = read_json(self.dir / "manifest.json")
        self._verify_checksums()

        self.domain_rows = read_domain_table(self.dir / "domains.tsv")
        self.domain_by_code = {row["code"]: row for row in self.domain_rows}
        assignment = read_assignments(self.dir / "assignments.tsv")
        members: dict[str, set[str]] = {}
        for pid, code in assignment.items():
            members.setdefault(code, set()).add(pid)
        self.members = {code: frozenset(ids) for code, ids in members.items()}
        self.valid_members = {
            row["code"]: self.members.get(row["code"], frozenset())
            for row in self.domain_rows
            if row["status"] == DomainStatus.VALID.value
        }
        self.rates: dict[str, RateEstimate] = {
            e.domain_code: e for e in read_rates(self.dir / "rates.tsv")
        }
        self.percentile_of = read_percentiles(self.dir / "centrality.tsv")
        index_payload = dict(read_json(self.dir / "search_index.json"))
        index_payload.pop("schema_version", None)
        self.index = InvertedIndex.from_json(index_payload)
        self.store: CorpusStore = load_corpus_dir(self.dir / "corpus")[0]

    def _verify_checksums(self) -> None:
        for relpath, expected in self.manifest["artifacts"].items():
            path = self.dir / relpath
            if not path.exists():
                raise ArtifactError(f"manifest lists '{relpath}' but the file is missing")
            actual = hashlib.sha256(path.read_bytes()).hexdigest()
            if actual != expected:
                raise ArtifactError(
                    f"checksum mismatch for '{relpath}': manifest {expected[:12]}..., "
                    f"file {actual[:12]}..."
                )

    # --- response builders ---------------------------------------------

    def _patent_entry(self, pid: str) -> dict:
        record = self.store.patents[pid]
        return {
            "id": pid,
            "title": record.title,
            "abstract": record.abstract,
            "percentile": self.percentile_of.get(pid),
        }

    def _rate_fields(self, code: str) -> dict:
        estimate = self.rates.get(code)
        if estimate is None:
            return {"k": None, "mean_centrality": None, "scored_patent_count": 0}
        return {
            "k": estimate.k,
            "mean_centrality": estimate.mean_centrality,
            "scored_patent_count": estimate.scored_patent_count,
        }

    def domain_detail(self, code: str) -> dict | None:
        row = self.domain_by_code.get(code)
        if row is None:
            return None
        return {
            "schema_version": SCHEMA_VERSION,
            "code": row["code"],
            "upc_label": row["upc_label"],
            "ipc_label": row["ipc_label"],
            "status": row["status"],
            "size": row["size"],
            "pre_dedup_size": row["pre_dedup_size"],
            "expected_overlap": row["expected_overlap"],
            **self._rate_fields(code),
        }

    def domain_list(self, sort: str = "k", limit: int = _DEFAULT_LIST_LIMIT) -> dict:
        if sort not in ("k", "size"):
            raise ValueError(f"sort must be 'k' or 'size', got {sort!r}")
        if limit < 1:
            raise ValueError(f"limit must be positive, got {limit}")
        valid = [row for row in self.domain_rows if row["status"] == DomainStatus.VALID.value]
        if sort == "size":
            valid.sort(key=lambda row: (-row["size"], row["code"]))
        else:
            def k_key(row):
                estimate = self.rates.get(row["code"])
                if estimate is None:
                    return (1, 0.0, row["code"])
                return (0, -estimate.k, row["code"])

            valid.sort(key=k_key)
        domains = [
            {
                "code": row["code"],
                "upc_label": row["upc_label"],
                "ipc_label": row["ipc_label"],
                "size": row["size"],
                **self._rate_fields(row["code"]),
            }
            for row in valid[:limit]
        ]
        return {
            "schema_version": SCHEMA_VERSION,
            "sort": sort,
            "total_valid": len(valid),
            "domains": domains,
        }

    def sample_payload(self, code: str, kind: str, seed: int | None = None) -> dict | None:
        if kind not in _SAMPLE_KINDS:
            raise ValueError(f"kind must be one of {_SAMPLE_KINDS}, got {kind!r}")
        if code not in self.domain_by_code:
            return None
        draw_seed = _domain_seed(self.seed, code) if seed is None else seed
        sample = sample_patents(
            self.members.get(code, frozenset()),
            self.percentile_of,
            draw_seed,
            self.sample_size,
        )
        ids = sample.top_central if kind == "top" else sample.random
        return {
            "schema_version": SCHEMA_VERSION,
            "code": code,
            "kind": kind,
            "seed": sample.seed,
            "patents": [self._patent_entry(pid) for pid in ids],
        }

    def _sample_section(self, code: str) -> dict:
        sample = sample_patents(
            self.members.get(code, frozenset()),
            self.percentile_of,
            _domain_seed(self.seed, code),
            self.sample_size,
        )
        return {
            "seed": sample.seed,
            "top_central": [self._patent_entry(pid) for pid in sample.top_central],
            "random": [self._patent_entry(pid) for pid in sample.random],
        }

    def search_response(self, query: str, top_n: int = 5) -> dict:
        """The /search body: ranked matches with rates and samples."""
        if top_n < 1:
            raise ValueError(f"n must be positive, got {top_n}")
        matched = search(self.index, query)
        results = []
        for match in rank_domains(matched, self.valid_members, self.rates, top_n):
            row = self.domain_by_code[match.code]
            results.append(
                {
                    "code": match.code,
                    "upc_label": row["upc_label"],
                    "ipc_label": row["ipc_label"],
                    "size": match.size,
                    "matched_count": match.matched_count,
                    "precision": match.precision,
                    "recall": match.recall,
                    "mpr": match.mpr,
                    **self._rate_fields(match.code),
                    "sample": self._sample_section(match.code),
                }
            )
        return {
            "schema_version": SCHEMA_VERSION,
            "query": query,
            "tokens": sorted(dict.fromkeys(tokenize(query))),
            "matched_patents": len(matched),
            "results": results,
        }

    def health(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "status": "ok",
            "config_hash": self.manifest["config_hash"],
            "seed": self.manifest["seed"],
            "artifacts": dict(self.manifest["artifacts"]),
        }


def create_app(artifact_dir: str | Path, seed: int = 0, ui_dir: str | Path | None = None):
    """FastAPI application serving one artifact directory."""
    from fastapi import FastAPI, HTTPException, Request
    from fastapi.exceptions import RequestValidationError
    from fastapi.responses import JSONResponse

    bundle = ArtifactBundle(artifact_dir, seed=seed)
    app = FastAPI(title="techrates", docs_url=None, redoc_url=None)
    app.state.bundle = bundle

    def _error(status: int, reason: str) -> JSONResponse:
        return JSONResponse(
            status_code=status,
            content={"schema_version": SCHEMA_VERSION, "error": reason},
        )

    @app.exception_handler(RequestValidationError)
    async def _on_validation_error(request: Request, exc: RequestValidationError):
        return _error(400, f"malformed query parameters: {exc.errors()[0]['msg']}")

    @app.exception_handler(HTTPException)
    async def _on_http_error(request: Request, exc: HTTPException):
        return _error(exc.status_code, str(exc.detail))

    @app.get("/healthz")
    def healthz():
        return bundle.health()

    @app.get("/search")
    def search_endpoint(q: str = "", n: int = 5):
        try:
            return bundle.search_response(q, n)
        except (EmptyQueryError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    @app.get("/domains")
    def domains_endpoint(sort: str = "k", limit: int = _DEFAULT_LIST_LIMIT):
        try:
            return bundle.domain_list(sort, limit)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    @app.get("/domains/{code}")
    def domain_endpoint(code: str):
        detail = bundle.domain_detail(code)
        if detail is None:
            raise HTTPException(status_code=404, detail=f"unknown domain code {code!r}")
        return detail

    @app.get("/domains/{code}/patents")
    def patents_endpoint(code: str, kind: str = "top", seed: int | None = None):
        try:
            payload = bundle.sample_payload(code, kind, seed)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        if payload is None:
            raise HTTPException(status_code=404, detail=f"unknown domain code {code!r}")
        return payload

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def parse_bind(bind: str) -> tuple[str, int]:
    """Split a host:port bind address, validating the port."""
    host, sep, port_text = bind.rpartition(":")
    if not sep or not host:
        raise ValueError(f"bind address must look like host:port, got {bind!r}")
    try:
        port = int(port_text)
    except ValueError:
        raise ValueError(f"invalid port in bind address {bind!r}") from None
    if not 0 < port < 65536:
        raise ValueError(f"port out of range in bind address {bind!r}")
    return host, port


def serve(
    artifact_dir: str | Path,
    bind: str = "127.0.0.1:8340",
    seed: int = 0,
    ui_dir: str | Path | None = None,
) -> None:
    """Run the HTTP service until interrupted."""
    import uvicorn

    host, port = parse_bind(bind)
    app = create_app(artifact_dir, seed=seed, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
