import json
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager

import pytest
import requests

from convsql_trainer import create_server
from convsql_trainer.server import _as_decoder


@contextmanager
def running(decoder):
    """Serve ``decoder`` on an ephemeral port for the duration of a test."""
    server = create_server(decoder, port=0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield f"http://127.0.0.1:{server.server_address[1]}"
    finally:
        server.shutdown()
        server.server_close()
        thread.join(timeout=5)


class EchoDecoder:
    def decode(self, text):
        return text


class TestGenerateRoute:
    def test_valid_vectors_round_trip(self, protocol_vectors):
        with running(EchoDecoder()) as base:
            for vector in protocol_vectors["valid"]:
                resp = requests.post(
                    f"{base}/generate", json={"input": vector["input"]}, timeout=10
                )
                assert resp.status_code == 200, vector["name"]
                assert resp.json() == {"output": vector["input"]}, vector["name"]

    def test_malformed_bodies_rejected(self, protocol_vectors):
        with running(EchoDecoder()) as base:
            for vector in protocol_vectors["malformed"]:
                resp = requests.post(
                    f"{base}/generate",
                    data=vector["body"].encode("utf-8"),
                    headers={"Content-Type": "application/json"},
                    timeout=10,
                )
                assert resp.status_code == vector["expect_status"], vector["name"]
                assert "error" in resp.json()

    def test_empty_body_rejected(self):
        with running(EchoDecoder()) as base:
            resp = requests.post(f"{base}/generate", data=b"", timeout=10)
            assert resp.status_code == 400

    def test_non_utf8_body_rejected(self):
        with running(EchoDecoder()) as base:
            resp = requests.post(f"{base}/generate", data=b"\xff\xfe{", timeout=10)
            assert resp.status_code == 400

    def test_unknown_routes_answer_404(self):
        with running(EchoDecoder()) as base:
            post = requests.post(f"{base}/other", json={"input": "x"}, timeout=10)
            get = requests.get(f"{base}/generate", timeout=10)
        assert post.status_code == 404
        assert get.status_code == 404

    def test_decoder_failure_answers_500(self):
        def broken(text):
            raise RuntimeError("weights on fire")

        with running(broken) as base:
            resp = requests.post(f"{base}/generate", json={"input": "x"}, timeout=10)
            assert resp.status_code == 500
            assert "decode failed: weights on fire" in resp.json()["error"]

    def test_concurrent_requests_all_answered(self):
        class SlowEcho:
            def decode(self, text):
                time.sleep(0.02)
                return text

        inputs = [f"request number {n}" for n in range(16)]
        with running(SlowEcho()) as base:
            def post(text):
                resp = requests.post(
                    f"{base}/generate", json={"input": text}, timeout=10
                )
                return resp.status_code, resp.json()["output"]

            with ThreadPoolExecutor(max_workers=8) as pool:
                results = list(pool.map(post, inputs))
        assert results == [(200, text) for text in inputs]


class TestDecoderAdapter:
    def test_plain_callable_is_wrapped(self):
        wrapped = _as_decoder(lambda text: text.upper())
        assert wrapped.decode("ok") == "OK"

    def test_decode_attribute_passes_through(self):
        echo = EchoDecoder()
        assert _as_decoder(echo) is echo

    def test_everything_else_rejected(self):
        with pytest.raises(TypeError, match="decode"):
            _as_decoder(42)
