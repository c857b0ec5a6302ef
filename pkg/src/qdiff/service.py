"""HTTP annotation service for live pairwise difficulty judging.

Annotators fetch a question pair, pick the harder one, and the judgment is
folded into the ELO board and appended (with fsync) to a JSON-lines log,
which is the sole source of truth: restarting the service and replaying
the log reproduces the leaderboard exactly.

Concurrency: any number of reader threads may serve pair/leaderboard/
question requests, but every board mutation goes through one lock, so a
judgment is applied exactly once even when the same pair token is
submitted twice concurrently. Pair tokens are single-use and expire after
a configured timeout, returning the pair to the scheduler.
"""

from __future__ import annotations

import json
import mimetypes
import os
import secrets
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Sequence
from urllib.parse import parse_qs, unquote, urlparse

from .config import PipelineConfig
from .elo import EloBoard, Judgment, Winner, append_judgment, read_judgment_log_file
from .questions import Question


@dataclass
class PendingPair:
    token: str
    annotator: str
    left: str
    right: str
    issued_at: float  # time.monotonic()


class ApiError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


def _question_obj(question: Question) -> dict:
    obj: dict = {
        "id": question.id,
        "text": question.text,
        "template": question.template.value,
        "keywords": list(question.keywords),
    }
    if question.embedding is not None:
        obj["embedding"] = list(question.embedding)
    return obj


class AnnotationService:
    """Board, question set, and pending-pair bookkeeping behind one lock."""

    def __init__(
        self,
        questions: Sequence[Question],
        log_path: str | os.PathLike,
        config: PipelineConfig | None = None,
    ):
        self.config = config or PipelineConfig()
        self.questions = {q.id: q for q in questions}
        self.board = EloBoard(
            self.questions,
            k_factor=self.config.elo_k,
            initial_rating=self.config.initial_rating,
        )
        self.log_path = Path(log_path)
        if self.log_path.exists():
            for judgment in read_judgment_log_file(str(self.log_path)):
                self.board.apply(judgment)
        self._log_handle = open(self.log_path, "a", encoding="utf-8")
        self._lock = threading.Lock()
        self._pending_by_annotator: dict[str, PendingPair] = {}
        self._pending_by_token: dict[str, PendingPair] = {}
        # Consumed tokens map to the pair they judged, for idempotent replies.
        self._consumed: dict[str, tuple[str, str]] = {}

    # -- helpers -----------------------------------------------------------

    @property
    def board_version(self) -> int:
        return len(self.board.judgments)

    def _scheduler_seed(self) -> int:
        return self.config.seed * 1_000_003 + len(self.board.judgments)

    def _expired(self, pending: PendingPair) -> bool:
        return (
            time.monotonic() - pending.issued_at
            > self.config.pair_timeout_seconds
        )

    def _drop_pending(self, pending: PendingPair) -> None:
        self._pending_by_annotator.pop(pending.annotator, None)
        self._pending_by_token.pop(pending.token, None)

    # -- endpoint bodies -----------------------------------------------------

    def next_pair(self, annotator: str) -> dict:
        if not annotator:
            raise ApiError(400, "missing annotator id")
        with self._lock:
            if len(self.questions) < 2:
                raise ApiError(409, "need at least 2 questions to schedule pairs")
            pending = self._pending_by_annotator.get(annotator)
            if pending is not None and self._expired(pending):
                self._drop_pending(pending)
                pending = None
            if pending is None:
                left, right = self.board.next_pair(
                    self._scheduler_seed(), annotator=annotator
                )
                pending = PendingPair(
                    token=secrets.token_hex(16),
                    annotator=annotator,
                    left=left,
                    right=right,
                    issued_at=time.monotonic(),
                )
                self._pending_by_annotator[annotator] = pending
                self._pending_by_token[pending.token] = pending
            judged = sum(
                1 for j in self.board.judgments if j.annotator == annotator
            )
            return {
                "pair_token": pending.token,
                "left": _question_obj(self.questions[pending.left]),
                "right": _question_obj(self.questions[pending.right]),
                "my_judged_count": judged,
                "board_version": self.board_version,
            }

    def submit_judgment(self, pair_token: str, winner: str) -> dict:
        try:
            winner_value = Winner(winner)
        except ValueError:
            raise ApiError(400, f"winner must be LEFT or RIGHT, got {winner!r}")
        with self._lock:
            consumed = self._consumed.get(pair_token)
            if consumed is not None:
                left, right = consumed
                return {
                    "accepted": False,
                    "new_ratings": {
                        left: self.board.ratings[left],
                        right: self.board.ratings[right],
                    },
                    "board_version": self.board_version,
                }
            pending = self._pending_by_token.get(pair_token)
            if pending is None or self._expired(pending):
                if pending is not None:
                    self._drop_pending(pending)
                raise ApiError(410, "unknown or expired pair token")
            judgment = Judgment(
                judgment_id=pair_token,
                left=pending.left,
                right=pending.right,
                winner=winner_value,
                annotator=pending.annotator,
                timestamp=datetime.now(timezone.utc),
            )
            self.board.apply(judgment)
            append_judgment(judgment, self._log_handle)
            self._log_handle.flush()
            os.fsync(self._log_handle.fileno())
            self._drop_pending(pending)
            self._consumed[pair_token] = (pending.left, pending.right)
            return {
                "accepted": True,
                "new_ratings": {
                    pending.left: self.board.ratings[pending.left],
                    pending.right: self.board.ratings[pending.right],
                },
                "board_version": self.board_version,
            }

    def leaderboard(self) -> dict:
        with self._lock:
            if not self.questions:
                return {"board_version": self.board_version, "entries": []}
            labels = self.board.difficulty_labels(self.config.label_scale_max)
            entries = [
                {
                    "question_id": question_id,
                    "rating": rating,
                    "comparisons": comparisons,
                    "label": labels[question_id],
                }
                for question_id, rating, comparisons in self.board.leaderboard()
            ]
            return {"board_version": self.board_version, "entries": entries}

    def question(self, question_id: str) -> dict:
        q = self.questions.get(question_id)
        if q is None:
            raise ApiError(404, f"unknown question id: {question_id!r}")
        return _question_obj(q)

    def close(self) -> None:
        self._log_handle.close()


class _Handler(BaseHTTPRequestHandler):
    service: AnnotationService
    ui_dir: Path | None = None
    quiet = True

    # -- plumbing ----------------------------------------------------------

    def log_message(self, fmt, *args):
        if not self.quiet:
            super().log_message(fmt, *args)

    def _send_json(self, status: int, obj: dict) -> None:
        payload = json.dumps(obj, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(payload)))
        self._send_common_headers()
        self.end_headers()
        self.wfile.write(payload)

    def _send_common_headers(self) -> None:
        self.send_header("X-Board-Version", str(self.service.board_version))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")

    def do_OPTIONS(self):  # CORS preflight
        self.send_response(204)
        self._send_common_headers()
        self.end_headers()

    # -- routing -----------------------------------------------------------

    def do_GET(self):
        url = urlparse(self.path)
        try:
            if url.path == "/api/pair/next":
                params = parse_qs(url.query)
                annotator = (params.get("annotator") or [""])[0]
                self._send_json(200, self.service.next_pair(annotator))
            elif url.path == "/api/leaderboard":
                self._send_json(200, self.service.leaderboard())
            elif url.path.startswith("/api/question/"):
                question_id = unquote(url.path[len("/api/question/") :])
                self._send_json(200, self.service.question(question_id))
            elif url.path.startswith("/api/"):
                raise ApiError(404, f"no such endpoint: {url.path}")
            else:
                self._send_static(url.path)
        except ApiError as exc:
            self._send_json(exc.status, {"error": str(exc)})
        except Exception as exc:  # keep one bad request from killing the thread
            self._send_json(500, {"error": f"internal error: {exc}"})

    def do_POST(self):
        url = urlparse(self.path)
        try:
            if url.path != "/api/judgment":
                raise ApiError(404, f"no such endpoint: {url.path}")
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length)
            try:
                body = json.loads(raw)
            except json.JSONDecodeError:
                raise ApiError(400, "request body is not valid JSON")
            if not isinstance(body, dict) or "pair_token" not in body:
                raise ApiError(400, "body must carry pair_token and winner")
            self._send_json(
                200,
                self.service.submit_judgment(
                    str(body["pair_token"]), str(body.get("winner", ""))
                ),
            )
        except ApiError as exc:
            self._send_json(exc.status, {"error": str(exc)})
        except Exception as exc:  # keep one bad request from killing the thread
            self._send_json(500, {"error": f"internal error: {exc}"})

    # -- static assets -------------------------------------------------------

    def _send_static(self, path: str) -> None:
        if self.ui_dir is None:
            raise ApiError(404, "no UI bundled; use the /api endpoints")
        name = path.lstrip("/") or "index.html"
        target = (self.ui_dir / name).resolve()
        if not str(target).startswith(str(self.ui_dir.resolve())) or not (
            target.is_file()
        ):
            raise ApiError(404, f"no such file: {path}")
        payload = target.read_bytes()
        mime = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        self.send_response(200)
        self.send_header("Content-Type", mime)
        self.send_header("Content-Length", str(len(payload)))
        self._send_common_headers()
        self.end_headers()
        self.wfile.write(payload)


class _Server(ThreadingHTTPServer):
    daemon_threads = True
    # Default backlog (5) drops connections under concurrent annotator load.
    request_queue_size = 128


def make_server(
    service: AnnotationService,
    host: str = "127.0.0.1",
    port: int = 0,
    ui_dir: str | None = None,
    quiet: bool = True,
) -> ThreadingHTTPServer:
    """Build (but do not start) the HTTP server; port 0 picks a free port."""
    handler = type(
        "BoundHandler",
        (_Handler,),
        {
            "service": service,
            "ui_dir": Path(ui_dir) if ui_dir else None,
            "quiet": quiet,
        },
    )
    return _Server((host, port), handler)


def run_server(
    service: AnnotationService,
    host: str = "127.0.0.1",
    port: int = 8080,
    ui_dir: str | None = None,
) -> None:
    server = make_server(service, host=host, port=port, ui_dir=ui_dir, quiet=False)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
        service.close()
