"""HTTP generation endpoint.

One route: POST /generate with ``{"input": "..."}`` answers
``{"output": "..."}``.  Malformed requests get a 400, decode failures a
500 with the error message.  The handler keeps no per-request state and
serializes model access behind a lock, so concurrent clients are safe.
"""

from __future__ import annotations

import json
import logging
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from convsql_trainer.corpus_io import truncate_input
from convsql_trainer.model import greedy_decode
from convsql_trainer.training import load_checkpoint

log = logging.getLogger("convsql_trainer")


class CheckpointDecoder:
    """Greedy decoding over a trained checkpoint, thread-safe."""

    def __init__(self, checkpoint_path: str | Path):
        self.model, self.vocab, meta = load_checkpoint(checkpoint_path)
        self.max_input_tokens = meta["max_input_tokens"]
        self._lock = threading.Lock()

    def decode(self, text: str) -> str:
        text, dropped = truncate_input(text, self.max_input_tokens)
        if dropped:
            log.warning("request input truncated by %d segments", dropped)
        with self._lock:
            return greedy_decode(self.model, self.vocab, text)


def _as_decoder(decoder):
    if callable(getattr(decoder, "decode", None)):
        return decoder
    if callable(decoder):

        class _Wrapped:
            def decode(self, text: str) -> str:
                return decoder(text)

        return _Wrapped()
    raise TypeError("decoder must expose decode(text) or be callable")


def create_server(decoder, port: int = 8101, host: str = "127.0.0.1"):
    """Build (without starting) a ThreadingHTTPServer around ``decoder``."""
    decoder = _as_decoder(decoder)

    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            if self.path != "/generate":
                self._reply(404, {"error": f"no such route: {self.path}"})
                return
            try:
                length = int(self.headers.get("Content-Length", 0))
                body = self.rfile.read(length)
                payload = json.loads(body.decode("utf-8"))
            except (ValueError, UnicodeDecodeError) as exc:
                self._reply(400, {"error": f"malformed request body: {exc}"})
                return
            if not isinstance(payload, dict) or not isinstance(
                payload.get("input"), str
            ):
                self._reply(400, {"error": "body must be an object with string 'input'"})
                return
            try:
                output = decoder.decode(payload["input"])
            except Exception as exc:
                log.exception("decode failed")
                self._reply(500, {"error": f"decode failed: {exc}"})
                return
            self._reply(200, {"output": output})

        def do_GET(self):
            self._reply(404, {"error": "POST /generate is the only route"})

        def _reply(self, status: int, payload: dict) -> None:
            body = json.dumps(payload, ensure_ascii=False).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def log_message(self, fmt, *args):
            log.debug("http: " + fmt, *args)

    return ThreadingHTTPServer((host, port), Handler)


def serve(checkpoint_path: str | Path, port: int = 8101, host: str = "127.0.0.1"):
    """Load a checkpoint and answer /generate until interrupted."""
    server = create_server(CheckpointDecoder(checkpoint_path), port=port, host=host)
    log.info("serving %s on %s:%d", checkpoint_path, *server.server_address)
    try:
        server.serve_forever()
    finally:
        server.server_close()
