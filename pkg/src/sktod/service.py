"""Interactive dialogue service over the native pipeline.

Endpoints (JSON over HTTP, UTF-8):

    POST /v1/sessions                     {"domain": "hotel"|"restaurant"?} -> {"session_id": str}
    POST /v1/sessions/{id}/utterance      {"text": str} -> turn result
    GET  /v1/sessions/{id}                -> transcript with per-turn provenance
    GET  /v1/entities?domain=hotel        -> {"entities": [...]}
    GET  /v1/health                       -> {"status": "ok", "stages": {...}}

Sessions live in memory with a TTL; one turn is processed at a time per
session (a per-session lock serializes handle_utterance).  Non-detected
turns get a fixed task reply with detected=false and no grounding; the
engine never invokes booking backends.  When a static directory is
configured, the server also serves the chat UI from it.
"""

from __future__ import annotations

import json
import logging
import threading
import time
import uuid
from dataclasses import dataclass, field as dc_field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from . import absa, detect, generate, select, track
from .corpus import DialogueContext, Speaker, Utterance
from .errors import ConfigError
from .pipeline import Artifacts, PipelineConfig

logger = logging.getLogger(__name__)

SESSION_TTL_SECONDS = 30 * 60
NON_SUBJECTIVE_REPLY = "Sure, I can help with that. Is there anything else you would like to know?"


@dataclass
class Session:
    session_id: str
    domain: str | None
    utterances: list[Utterance] = dc_field(default_factory=list)
    turns: list[dict] = dc_field(default_factory=list)
    created: float = dc_field(default_factory=time.time)
    last_active: float = dc_field(default_factory=time.time)
    lock: threading.Lock = dc_field(default_factory=threading.Lock)

    def context(self) -> DialogueContext:
        return DialogueContext(utterances=tuple(self.utterances), instance_id=self.session_id)


class SessionStore:
    def __init__(self, ttl: float = SESSION_TTL_SECONDS, event_log: str | Path | None = None):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self.ttl = ttl
        self._event_log = Path(event_log) if event_log else None
        self._event_lock = threading.Lock()

    def create(self, domain: str | None) -> Session:
        session = Session(session_id=uuid.uuid4().hex, domain=domain)
        with self._lock:
            self._sessions[session.session_id] = session
        self._log({"event": "created", "session_id": session.session_id, "domain": domain})
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
            if session is not None and time.time() - session.last_active > self.ttl:
                del self._sessions[session_id]
                session = None
        if session is None:
            raise KeyError(session_id)
        return session

    def _log(self, payload: dict) -> None:
        if self._event_log is None:
            return
        line = json.dumps({"ts": time.time(), **payload}, ensure_ascii=False, sort_keys=True)
        with self._event_lock:
            with open(self._event_log, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")

    def log_turn(self, session_id: str, result: dict) -> None:
        self._log({"event": "turn", "session_id": session_id, "result": result})


class DialogueEngine:
    """Pipeline wiring for the interactive service."""

    def __init__(self, artifacts: Artifacts, config: PipelineConfig | None = None):
        self.artifacts = artifacts
        self.config = config or PipelineConfig(ktd="native", et="native", ks="native", rg="template")
        if self.config.ktd == "gold" or self.config.ks == "gold":
            raise ConfigError("the interactive service cannot run gold stages")
        if self.config.ktd == "native" and artifacts.detector is None:
            raise ConfigError("service needs a trained detector; run calibrate first")
        threshold = self.config.threshold
        if threshold is None:
            threshold = artifacts.thresholds.get(self.config.scorer)
        if threshold is None:
            raise ConfigError(f"no threshold for scorer {self.config.scorer!r}; run calibrate first")
        self.threshold = threshold
        self.scorer = artifacts.scorer(self.config.scorer, self.config.external_url)

    def stages(self) -> dict[str, bool]:
        return {
            "ktd": self.artifacts.detector is not None or self.config.ktd == "external",
            "et": True,
            "ks": True,
            "rg": True,
        }

    def handle_utterance(self, session: Session, text: str) -> dict:
        if not text or not text.strip():
            raise ConfigError("empty utterance")
        kb = self.artifacts.kb
        with session.lock:
            turn_index = len(session.utterances)
            session.utterances.append(Utterance(speaker=Speaker.USER, text=text, turn_index=turn_index))
            ctx = session.context()

            score = detect.detect(self.artifacts.detector, ctx)
            if not score.decision:
                result = {
                    "session_id": session.session_id,
                    "detected": False,
                    "response": NON_SUBJECTIVE_REPLY,
                    "entities": [],
                    "grounded": [],
                    "tally": {},
                }
            else:
                entities = sorted(
                    track.candidate_entities(ctx, kb, session.domain), key=lambda e: e.key())
                candidates = select.candidates_for_entities(kb, entities, session.session_id)
                selection = select.select_snippets(self.scorer, self.threshold, candidates, ctx)
                annotations = absa.tag_all(
                    self.artifacts.lexicon, (kb.snippet(r) for r in sorted(selection.selected)))
                response = generate.generate_template(ctx, selection, annotations, kb)
                tallies = generate.tally_sentiments(selection, annotations)
                grounded = []
                for ref in sorted(selection.selected):
                    ann = annotations[ref]
                    grounded.append({
                        "text": kb.snippet(ref).text,
                        "ref": ref.as_dict(),
                        "polarity": ann.polarity.value,
                        "aspect": ann.aspect_term,
                        "entity_name": kb.entity(ref.domain, ref.entity_id).name,
                    })
                shown_entities = sorted({ref.entity_key() for ref in selection.selected})
                result = {
                    "session_id": session.session_id,
                    "detected": True,
                    "response": response.text,
                    "entities": [
                        {"domain": d, "entity_id": e, "name": kb.entity(d, e).name}
                        for d, e in shown_entities
                    ],
                    "grounded": grounded,
                    "tally": {
                        f"{d}/{e}": {"name": kb.entity(d, e).name, **tally.as_dict()}
                        for (d, e), tally in sorted(tallies.items())
                    },
                }
            session.utterances.append(Utterance(
                speaker=Speaker.SYSTEM, text=result["response"], turn_index=turn_index + 1))
            session.turns.append({"user": text, **result})
            session.last_active = time.time()
            return result


class _Handler(BaseHTTPRequestHandler):
    engine: DialogueEngine
    store: SessionStore
    static_dir: Path | None = None

    def log_message(self, fmt, *args):  # route through logging, not stderr
        logger.debug("http: " + fmt, *args)

    def _send(self, status: int, doc: dict) -> None:
        body = json.dumps(doc, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.end_headers()
        self.wfile.write(body)

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        if length == 0:
            return {}
        try:
            return json.loads(self.rfile.read(length).decode("utf-8"))
        except (ValueError, UnicodeDecodeError):
            raise ValueError("request body is not valid JSON")

    def do_OPTIONS(self):
        self._send(204, {})

    def do_POST(self):
        path = urlparse(self.path).path
        try:
            body = self._read_body()
            if path == "/v1/sessions":
                domain = body.get("domain")
                if domain is not None and domain not in ("hotel", "restaurant"):
                    self._send(400, {"error": f"unknown domain {domain!r}"})
                    return
                session = self.store.create(domain)
                self._send(200, {"session_id": session.session_id})
                return
            parts = path.strip("/").split("/")
            if len(parts) == 4 and parts[:2] == ["v1", "sessions"] and parts[3] == "utterance":
                try:
                    session = self.store.get(parts[2])
                except KeyError:
                    self._send(404, {"error": "unknown or expired session"})
                    return
                text = body.get("text", "")
                result = self.engine.handle_utterance(session, text)
                self.store.log_turn(session.session_id, result)
                self._send(200, result)
                return
            self._send(404, {"error": "no such endpoint"})
        except (ValueError, ConfigError) as exc:
            self._send(400, {"error": str(exc)})
        except Exception:
            logger.exception("internal error handling %s", path)
            self._send(500, {"error": "internal error"})

    def do_GET(self):
        parsed = urlparse(self.path)
        path = parsed.path
        try:
            if path == "/v1/health":
                self._send(200, {"status": "ok", "stages": self.engine.stages()})
                return
            if path == "/v1/entities":
                query = parse_qs(parsed.query)
                domain = query.get("domain", [None])[0]
                if domain is not None and domain not in ("hotel", "restaurant"):
                    self._send(400, {"error": f"unknown domain {domain!r}"})
                    return
                ents = self.engine.artifacts.kb.entities(domain)
                self._send(200, {"entities": [
                    {"domain": e.domain, "entity_id": e.entity_id, "name": e.name} for e in ents
                ]})
                return
            parts = path.strip("/").split("/")
            if len(parts) == 3 and parts[:2] == ["v1", "sessions"]:
                try:
                    session = self.store.get(parts[2])
                except KeyError:
                    self._send(404, {"error": "unknown or expired session"})
                    return
                self._send(200, {
                    "session_id": session.session_id,
                    "domain": session.domain,
                    "turns": session.turns,
                })
                return
            if self.static_dir is not None and not path.startswith("/v1/"):
                self._serve_static(path)
                return
            self._send(404, {"error": "no such endpoint"})
        except Exception:
            logger.exception("internal error handling %s", path)
            self._send(500, {"error": "internal error"})

    def _serve_static(self, path: str) -> None:
        rel = path.lstrip("/") or "index.html"
        target = (self.static_dir / rel).resolve()
        if not str(target).startswith(str(self.static_dir.resolve())) or not target.is_file():
            self._send(404, {"error": "not found"})
            return
        ctype = {
            ".html": "text/html; charset=utf-8",
            ".js": "text/javascript; charset=utf-8",
            ".css": "text/css; charset=utf-8",
            ".map": "application/json",
        }.get(target.suffix, "application/octet-stream")
        body = target.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


def make_server(
    artifacts: Artifacts,
    config: PipelineConfig | None = None,
    bind: tuple[str, int] = ("127.0.0.1", 8080),
    static_dir: str | Path | None = None,
    event_log: str | Path | None = None,
) -> ThreadingHTTPServer:
    """Build (but do not start) the HTTP service; raises on a bad port bind."""
    engine = DialogueEngine(artifacts, config)
    store = SessionStore(event_log=event_log)
    handler = type("BoundHandler", (_Handler,), {
        "engine": engine,
        "store": store,
        "static_dir": Path(static_dir) if static_dir else None,
    })
    try:
        server = ThreadingHTTPServer(bind, handler)
    except OSError as exc:
        raise ConfigError(f"cannot bind {bind[0]}:{bind[1]}: {exc}") from exc
    logger.info("service bound on %s:%d", *bind)
    return server


def serve_forever(server: ThreadingHTTPServer) -> None:
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        logger.info("shutting down, draining in-flight requests")
    finally:
        server.shutdown()
        server.server_close()
