"""HTTP service: generation, study construction and trial-log analysis.

Models are loaded once at startup from a config file and shared read-only
across requests; the only mutable state is the session store, which keeps
issued study lists and their (append-only) trial logs.

Config file format, one ``key = value`` per line, ``#`` comments::

    bind = 127.0.0.1:8000
    models.sv.path = models/sv.posgram
    models.ar.path = models/ar.posgram
    lexicon.path = data/saldom.txt
    exclusions.path = data/names.txt
    store.path = sessions.json
    generate_model = sv
"""

from __future__ import annotations

import json
import secrets
import threading
import uuid
from dataclasses import dataclass
from pathlib import Path
from random import Random
from typing import Literal

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import filtering, ranker, study
from .corpus import Lexicon, load_lexicon_from_paths
from .errors import (
    GenerationExhaustedError,
    InputFormatError,
    StudyConstructionError,
)
from .generator import (
    Candidate,
    EXHAUSTIVE_MAX_LENGTH,
    Provenance,
    exhaustive,
    sample_batch,
)
from .lm import PositionalNgramModel, load_model
from .ranker import RankedList, StudyDesign, StudyList
from .study import TrialRecord

LENGTH_MIN, LENGTH_MAX = 2, 11
COUNT_MIN, COUNT_MAX = 1, 1000
DEFAULT_LENGTH, DEFAULT_COUNT = 6, 20
MAX_SEED = 2**31 - 1

API_PREFIX = "/api/v1"


def parse_config(path: str | Path) -> dict[str, str]:
    """Flat dotted-key config: ``key = value`` lines, ``#`` comments."""
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as stream:
        for lineno, raw in enumerate(stream, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise InputFormatError(f"{path}:{lineno}: expected key = value")
            key, value = line.split("=", 1)
            values[key.strip()] = value.strip()
    return values


@dataclass
class ServiceConfig:
    model_paths: dict[str, Path]
    lexicon_path: Path
    exclusions_path: Path | None = None
    store_path: Path | None = None
    generate_model: str = "sv"
    host: str = "127.0.0.1"
    port: int = 8000

    @classmethod
    def from_file(cls, path: str | Path) -> "ServiceConfig":
        values = parse_config(path)
        base = Path(path).parent
        model_paths: dict[str, Path] = {}
        for key, value in values.items():
            if key.startswith("models.") and key.endswith(".path"):
                model_id = key[len("models.") : -len(".path")]
                model_paths[model_id] = base / value
        if "lexicon.path" not in values:
            raise InputFormatError(f"{path}: missing lexicon.path")
        host, port = "127.0.0.1", 8000
        if "bind" in values:
            bind = values["bind"]
            if ":" not in bind:
                raise InputFormatError(f"{path}: bind must be host:port")
            host, port_text = bind.rsplit(":", 1)
            port = int(port_text)
        return cls(
            model_paths=model_paths,
            lexicon_path=base / values["lexicon.path"],
            exclusions_path=(
                base / values["exclusions.path"]
                if "exclusions.path" in values
                else None
            ),
            store_path=base / values["store.path"] if "store.path" in values else None,
            generate_model=values.get("generate_model", "sv"),
            host=host,
            port=port,
        )


class SessionStore:
    """Interface: persisted study lists plus append-only trial logs."""

    def put_study(self, session_id: str, doc: dict) -> None:
        raise NotImplementedError

    def get_study(self, session_id: str) -> dict | None:
        raise NotImplementedError

    def append_trials(self, session_id: str, records: list[dict]) -> int:
        raise NotImplementedError

    def get_trials(self, session_id: str) -> list[dict]:
        raise NotImplementedError


class MemorySessionStore(SessionStore):
    def __init__(self) -> None:
        self._studies: dict[str, dict] = {}
        self._trials: dict[str, list[dict]] = {}
        self._lock = threading.Lock()

    def put_study(self, session_id: str, doc: dict) -> None:
        with self._lock:
            self._studies[session_id] = doc

    def get_study(self, session_id: str) -> dict | None:
        return self._studies.get(session_id)

    def append_trials(self, session_id: str, records: list[dict]) -> int:
        with self._lock:
            log = self._trials.setdefault(session_id, [])
            log.extend(records)
            return len(log)

    def get_trials(self, session_id: str) -> list[dict]:
        return list(self._trials.get(session_id, []))


class JsonFileSessionStore(SessionStore):
    """Single-file JSON persistence; writes are atomic via replace."""

    def __init__(self, path: str | Path) -> None:
        self._path = Path(path)
        self._lock = threading.Lock()
        if self._path.exists():
            with open(self._path, encoding="utf-8") as stream:
                data = json.load(stream)
        else:
            data = {"studies": {}, "trials": {}}
        self._data = data

    def _flush(self) -> None:
        tmp = self._path.with_suffix(self._path.suffix + ".tmp")
        with open(tmp, "w", encoding="utf-8") as stream:
            json.dump(self._data, stream, ensure_ascii=False)
        tmp.replace(self._path)

    def put_study(self, session_id: str, doc: dict) -> None:
        with self._lock:
            self._data["studies"][session_id] = doc
            self._flush()

    def get_study(self, session_id: str) -> dict | None:
        return self._data["studies"].get(session_id)

    def append_trials(self, session_id: str, records: list[dict]) -> int:
        with self._lock:
            log = self._data["trials"].setdefault(session_id, [])
            log.extend(records)
            self._flush()
            return len(log)

    def get_trials(self, session_id: str) -> list[dict]:
        return list(self._data["trials"].get(session_id, []))


@dataclass
class AppState:
    models: dict[str, PositionalNgramModel]
    lexicon: Lexicon
    store: SessionStore
    generate_model: str = "sv"


class GenerateRequest(BaseModel):
    length: int = Field(default=DEFAULT_LENGTH, ge=LENGTH_MIN, le=LENGTH_MAX)
    count: int = Field(default=DEFAULT_COUNT, ge=COUNT_MIN, le=COUNT_MAX)
    l1_model: str | None = None
    seed: int | None = None


class StudyRequest(BaseModel):
    design: str
    seed: int | None = None
    groups: dict[str, list[str]] | None = None
    models: dict[str, list[str]] | None = None
    fillers: list[str] | None = None


class TrialIn(BaseModel):
    rater_id: str
    l1: str
    proficiency: Literal["B", "I", "A"]
    word: str
    group: Literal["DE", "EN", "SV", "FI"]
    response: Literal["ACCEPT", "REJECT"]
    rt_seconds: float = Field(gt=0)


class TrialsRequest(BaseModel):
    session: str
    records: list[TrialIn]


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def _sample_survivors(
    state: AppState,
    model: PositionalNgramModel,
    length: int,
    count: int,
    rng: Random,
) -> tuple[list[Candidate], filtering.FilterReport]:
    """Sample until ``count`` candidates survive the lexicon filter."""
    kept: list[Candidate] = []
    seen: set[str] = set()
    report: filtering.FilterReport | None = None
    for _ in range(50):
        need = count - len(kept)
        if need == 0:
            break
        batch = sample_batch(model, length, need, rng)
        fresh = [c for c in batch if c.text not in seen]
        seen.update(c.text for c in fresh)
        stream, pass_report = filtering.filter_lexicon(fresh, state.lexicon)
        kept.extend(stream)
        if report is None:
            report = pass_report
        else:
            report.input_count += pass_report.input_count
            report.removed_lexicon += pass_report.removed_lexicon
            report.removed_exclusion += pass_report.removed_exclusion
            report.output_count += pass_report.output_count
    if len(kept) < count:
        raise GenerationExhaustedError(
            f"only {len(kept)} of {count} candidates survived filtering"
        )
    assert report is not None
    return kept, report


def _exhaustive_survivors(
    state: AppState,
    model: PositionalNgramModel,
    model_id: str,
    length: int,
    count: int,
) -> tuple[RankedList, filtering.FilterReport]:
    """Exhaustive pipeline for short lengths: enumerate, filter, keep top.

    No separate low-probability pass here: the top-k selection already
    orders by the same score, so junk can only appear when nothing better
    exists. Bulk exports that need an explicit probability cut go through
    the filter module directly.
    """
    stream = exhaustive(model.alphabet, length)
    lexicon_stream, lexicon_report = filtering.filter_lexicon(stream, state.lexicon)
    ranked = ranker.top_ranked(lexicon_stream, model, count, model_id=model_id)
    return ranked, lexicon_report


def create_app(state: AppState) -> FastAPI:
    app = FastAPI(title="nonwords", version="0.1.0")

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        details = [
            {"field": ".".join(str(p) for p in err["loc"]), "message": err["msg"]}
            for err in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"error": "invalid request", "details": details})

    @app.get(API_PREFIX + "/models")
    def list_models():
        return [
            {
                "id": model_id,
                "order": model.order,
                "alphabet": model.alphabet,
            }
            for model_id, model in sorted(state.models.items())
        ]

    @app.post(API_PREFIX + "/generate")
    def generate(request: GenerateRequest):
        gen_id = state.generate_model
        model = state.models.get(gen_id)
        if model is None:
            return _error(404, f"generation model {gen_id!r} is not loaded")
        if request.l1_model is not None:
            l1 = state.models.get(request.l1_model)
            if l1 is None:
                return _error(404, f"unknown model id {request.l1_model!r}")
        else:
            l1 = None
        seed = request.seed if request.seed is not None else secrets.randbelow(MAX_SEED)
        try:
            if request.length <= EXHAUSTIVE_MAX_LENGTH:
                ranked, report = _exhaustive_survivors(
                    state, model, gen_id, request.length, request.count
                )
            else:
                survivors, report = _sample_survivors(
                    state, model, request.length, request.count, Random(seed)
                )
                ranked = ranker.rank(survivors, model, model_id=gen_id)
        except GenerationExhaustedError as exc:
            return _error(503, str(exc))
        if l1 is not None:
            ranked = ranker.rerank(ranked, l1, model_id=request.l1_model)
        words = [
            {
                "text": candidate.text,
                "score": candidate.scores[ranked.model_id],
                "rank": position,
            }
            for position, candidate in enumerate(ranked.items, start=1)
        ]
        return {
            "seed": seed,
            "model": gen_id,
            "l1_model": request.l1_model,
            "words": words,
            "filter_report": report.as_dict(),
        }

    @app.post(API_PREFIX + "/study")
    def build_study(request: StudyRequest):
        try:
            design = StudyDesign(request.design)
        except ValueError:
            return _error(400, f"invalid design {request.design!r}")
        seed = request.seed
        try:
            if design is StudyDesign.PERCEPTION:
                groups = request.groups or {}
                missing = [g for g in ranker.PERCEPTION_GROUPS if g not in groups]
                if missing:
                    return _error(400, f"perception design needs groups {missing}")
                study_list = ranker.build_perception_list(
                    groups["g1"], groups["g2"], groups["g3"]
                )
                study_list.seed = seed
            else:
                if not request.models or request.fillers is None:
                    return _error(
                        400, "lexical_decision design needs models and fillers"
                    )
                if seed is None:
                    seed = secrets.randbelow(MAX_SEED)
                study_list = ranker.build_decision_blocks(
                    request.models, request.fillers, Random(seed), seed=seed
                )
        except StudyConstructionError as exc:
            return _error(400, str(exc))
        session_id = uuid.uuid4().hex
        doc = {"id": session_id, **study_list.to_json_dict()}
        state.store.put_study(session_id, doc)
        return doc

    @app.get(API_PREFIX + "/study/{session_id}")
    def fetch_study(session_id: str):
        doc = state.store.get_study(session_id)
        if doc is None:
            return _error(404, f"unknown study id {session_id!r}")
        return doc

    @app.post(API_PREFIX + "/trials")
    def submit_trials(request: TrialsRequest):
        doc = state.store.get_study(request.session)
        if doc is None:
            return _error(404, f"unknown session {request.session!r}")
        issued = {item["text"] for item in doc["items"]}
        foreign = sorted({r.word for r in request.records} - issued)
        if foreign:
            return _error(
                409,
                f"words not in the session's study list: {foreign[:10]}",
            )
        stored = state.store.append_trials(
            request.session, [r.model_dump() for r in request.records]
        )
        return {"stored": len(request.records), "total": stored}

    @app.get(API_PREFIX + "/analysis/{session_id}")
    def analysis(session_id: str):
        doc = state.store.get_study(session_id)
        if doc is None:
            return _error(404, f"unknown session {session_id!r}")
        raw = state.store.get_trials(session_id)
        records = [TrialRecord(**entry) for entry in raw]
        return analysis_payload(session_id, records)

    return app


def analysis_payload(session_id: str, records: list[TrialRecord]) -> dict:
    """Accuracy, reaction-time and normalized-average tables as JSON."""
    stats = study.group_reaction_times(records)
    reaction = {
        rater: {
            group: {
                "reject_mean": cell.reject_mean,
                "accept_mean": cell.accept_mean,
                "combined_mean": cell.combined_mean,
                "n_reject": cell.n_reject,
                "n_accept": cell.n_accept,
            }
            for group in study.GROUPS
            if (cell := stats.get(rater, group)) is not None
        }
        for rater in stats.raters()
    }

    def try_navg(trial_records: list[TrialRecord]) -> dict[str, float] | None:
        if not trial_records:
            return None
        try:
            means = study.combined_means(study.group_reaction_times(trial_records))
            return study.normalized_average(means, groups=study.GROUPS)
        except (study.AnalysisError, KeyError):
            return None

    intermediate_plus = [r for r in records if r.proficiency in ("I", "A")]
    return {
        "session": session_id,
        "n_trials": len(records),
        "accuracy": study.accuracy(records),
        "reaction_times": reaction,
        "normalized_average": try_navg(records),
        "normalized_average_ia": try_navg(intermediate_plus),
        "normalized_cells": study.normalized_cell_averages(stats),
        "normalized_cells_ia": study.normalized_cell_averages(
            stats,
            raters=[
                rater
                for rater, prof in study.rater_proficiencies(records).items()
                if prof in ("I", "A")
            ],
        ),
    }


def app_from_config(config: ServiceConfig) -> FastAPI:
    models = {
        model_id: load_model(path, name=model_id)
        for model_id, path in config.model_paths.items()
    }
    lexicon = load_lexicon_from_paths(config.lexicon_path, config.exclusions_path)
    store: SessionStore
    if config.store_path is not None:
        store = JsonFileSessionStore(config.store_path)
    else:
        store = MemorySessionStore()
    state = AppState(
        models=models,
        lexicon=lexicon,
        store=store,
        generate_model=config.generate_model,
    )
    return create_app(state)


def main(argv: list[str] | None = None) -> int:
    import argparse

    import uvicorn

    parser = argparse.ArgumentParser(
        prog="nonwords-service", description="Run the nonwords HTTP service."
    )
    parser.add_argument("config", help="path to the service config file")
    args = parser.parse_args(argv)
    config = ServiceConfig.from_file(args.config)
    uvicorn.run(app_from_config(config), host=config.host, port=config.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
