"""FastAPI application for the practice loop.

Endpoints:
  GET  /api/sentences                 sentence catalog with canonical phonemes
  POST /api/attempts                  analyze a phoneme or audio attempt
  GET  /api/phonemes/{id}/diagram.svg sagittal articulation diagram
  POST /api/ratings                   store a pre/post self-rating
  GET  /api/stats                     Wilcoxon + Likert summary of all ratings

Analysis runs through the same Analyzer the library exposes, and attempt
responses embed its payload untouched, so service output and direct library
output are byte-identical on the report JSON.
"""

from __future__ import annotations

import base64
import datetime as dt
import logging
import sys
import tempfile
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse, Response

from ..analysis import Analyzer
from ..audio import CANONICAL_RATE
from ..corpus import UtterancePair, ErrorVector
from ..detect import RecognizerOutput, mock_recognize
from ..errors import CaptError, UnknownPhoneme
from ..feedback import load_knowledge_base, render_tongue_diagram
from ..inventory import N_PHONEMES, load_inventory
from ..rng import derive_seed
from ..stats import summarize_likert, wilcoxon_pratt
from .catalog import CatalogSentence, load_catalog
from .config import ServiceConfig
from .schemas import AttemptRequest, RatingRequest
from .store import SessionStore

log = logging.getLogger("hindicapt.service")


def _now() -> str:
    return dt.datetime.now(dt.timezone.utc).isoformat()


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig.from_env()
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")

    inventory = load_inventory(config.inventory_path)
    kb = load_knowledge_base(config.kb_path, inventory, locale=config.locale)
    analyzer = Analyzer(inventory=inventory, kb=kb)
    store = SessionStore(config.data_dir)

    app = FastAPI(title="hindicapt practice service")
    app.state.analyzer = analyzer
    app.state.config = config

    # the practice UI may be served from a separate static host
    from fastapi.middleware.cors import CORSMiddleware

    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    catalog: list[CatalogSentence] | None = None
    catalog_error: str | None = None
    try:
        catalog = load_catalog(analyzer, config.sentences_path)
    except (CaptError, OSError) as exc:
        catalog_error = str(exc)
        log.error("sentence catalog unavailable: %s", exc)
    by_id = {s.sentence_id: s for s in (catalog or [])}

    def require_catalog() -> list[CatalogSentence]:
        if not catalog:
            raise HTTPException(status_code=503, detail=f"sentence catalog unavailable: {catalog_error}")
        return catalog

    @app.get("/api/health")
    def health():
        return {"status": "ok", "sentences": len(catalog or [])}

    @app.get("/api/sentences")
    def sentences():
        rows = [s.to_dict(analyzer) for s in require_catalog()]
        return JSONResponse({"sentences": rows})

    @app.post("/api/attempts")
    def attempts(req: AttemptRequest):
        sentence = by_id.get(req.sentence_id)
        if sentence is None:
            require_catalog()
            raise HTTPException(status_code=404, detail=f"unknown sentence {req.sentence_id!r}")
        if (req.phonemes is None) == (req.audio is None):
            raise HTTPException(status_code=422, detail="provide exactly one of phonemes or audio")

        rec: RecognizerOutput | None = None
        if req.phonemes is not None:
            input_kind = "phonemes"
            try:
                predicted = analyzer.sequence_from_ipa(req.phonemes)
            except UnknownPhoneme as exc:
                raise HTTPException(status_code=422, detail=f"unknown phoneme symbol {exc.ipa!r}")
            except CaptError as exc:
                raise HTTPException(status_code=422, detail=str(exc))
        else:
            input_kind = "audio"
            rec = _recognize_audio(req.audio, sentence, analyzer, app.state.config)
            predicted = rec.phonemes

        payload = analyzer.analyze(sentence.canonical, predicted, rec=rec)
        record = {
            "type": "attempt",
            "session_id": req.session_id,
            "sentence_id": req.sentence_id,
            "input_kind": input_kind,
            "created_at": _now(),
            **payload,
        }
        store.append(req.session_id, record)
        return JSONResponse(record)

    @app.get("/api/phonemes/{phoneme_id}/diagram.svg")
    def diagram(phoneme_id: int):
        if not 0 <= phoneme_id < N_PHONEMES:
            raise HTTPException(status_code=404, detail=f"no phoneme with id {phoneme_id}")
        svg = render_tongue_diagram(kb.get(phoneme_id))
        return Response(content=svg, media_type="image/svg+xml")

    @app.post("/api/ratings")
    def ratings(req: RatingRequest):
        if not inventory.has_ipa(req.phoneme):
            raise HTTPException(status_code=422, detail=f"unknown phoneme symbol {req.phoneme!r}")
        record = {
            "type": "rating",
            "session_id": req.session_id,
            "phoneme": req.phoneme,
            "pre": req.pre,
            "post": req.post,
            "created_at": _now(),
        }
        store.append(req.session_id, record)
        return JSONResponse({"status": "stored"})

    @app.get("/api/stats")
    def stats():
        samples = store.all_ratings()
        if not samples:
            return JSONResponse({"n_ratings": 0, "wilcoxon": None, "likert": None})
        result = wilcoxon_pratt(samples)
        return JSONResponse(
            {
                "n_ratings": len(samples),
                "wilcoxon": result.to_dict(),
                "likert": summarize_likert(samples),
            }
        )

    @app.get("/api/sessions/{session_id}")
    def session(session_id: str):
        return JSONResponse({"session_id": session_id, "records": store.load(session_id)})

    if config.static_dir and Path(config.static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=config.static_dir, html=True), name="ui")

    return app


def _recognize_audio(audio_b64: str, sentence: CatalogSentence, analyzer: Analyzer,
                     config: ServiceConfig) -> RecognizerOutput:
    from ..audio import read_wav
    from ..errors import MalformedWav, UnsupportedWav

    try:
        wav_bytes = base64.b64decode(audio_b64, validate=True)
    except Exception:
        raise HTTPException(status_code=422, detail="audio must be valid base64")
    with tempfile.NamedTemporaryFile(suffix=".wav") as tmp:
        tmp.write(wav_bytes)
        tmp.flush()
        try:
            buf = read_wav(tmp.name)
        except (UnsupportedWav, MalformedWav) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
    if buf.sample_rate != CANONICAL_RATE:
        raise HTTPException(
            status_code=422,
            detail=f"audio must be {CANONICAL_RATE} Hz, got {buf.sample_rate}",
        )

    if config.recognizer_url:
        from ..detect import http_recognize

        try:
            return http_recognize(config.recognizer_url, wav_bytes)
        except CaptError as exc:
            raise HTTPException(status_code=502, detail=str(exc))

    # built-in mock: pretends the learner matched the canonical phonemes,
    # with fidelity-controlled noise seeded from the audio content
    pair = UtterancePair(
        sentence_id=sentence.sentence_id,
        text=sentence.text,
        canonical=sentence.canonical,
        corrupted=sentence.canonical,
        ops=[],
        error_vector=ErrorVector(tuple([0] * len(sentence.canonical.phoneme_ids()))),
        speaker_id=0,
        seed=0,
    )
    seed = derive_seed(len(wav_bytes), wav_bytes[:64].hex())
    return mock_recognize(pair, config.mock_fidelity, seed, analyzer.inventory)
