"""HTTP client for a fill-mask service and a local stub implementing it.

Protocol::

    POST /fill     {"text": "... [MASK] ...", "mask_marker": "[MASK]", "top_k": 3}
              ->   {"candidates": [{"token": "Jones", "score": 0.41}, ...]}
    GET  /healthz  -> 200

Candidates are ranked by descending score.
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Callable, Sequence

import requests

logger = logging.getLogger(__name__)

MASK_MARKER = "[MASK]"
DEFAULT_TIMEOUT = 10.0
DEFAULT_MAX_IN_FLIGHT = 4


class FillMaskError(RuntimeError):
    pass


class FillMaskTransportError(FillMaskError):
    """The backend could not be reached or timed out."""


class FillMaskProtocolError(FillMaskError):
    """The backend answered with something that violates the protocol."""


@dataclass(frozen=True)
class FillMaskRequest:
    text: str
    top_k: int = 1
    mask_marker: str = MASK_MARKER

    def __post_init__(self):
        if self.top_k < 1:
            raise ValueError(f"top_k must be positive, got {self.top_k}")
        if not self.mask_marker:
            raise ValueError("empty mask marker")
        n = self.text.count(self.mask_marker)
        if n != 1:
            raise ValueError(f"request must hold exactly one {self.mask_marker!r}, found {n}")

    def to_json(self) -> dict:
        return {"text": self.text, "mask_marker": self.mask_marker, "top_k": self.top_k}


@dataclass(frozen=True)
class FillMaskResponse:
    candidates: tuple[tuple[str, float], ...]

    @classmethod
    def from_json(cls, payload) -> "FillMaskResponse":
        try:
            cands = tuple((str(c["token"]), float(c["score"])) for c in payload["candidates"])
        except (TypeError, KeyError, ValueError) as exc:
            raise FillMaskProtocolError(f"malformed fill-mask payload: {exc!r}") from None
        if not cands:
            raise FillMaskProtocolError("fill-mask backend returned no candidates")
        scores = [s for _, s in cands]
        if any(a < b for a, b in zip(scores, scores[1:])):
            raise FillMaskProtocolError("fill-mask candidates are not sorted by score")
        return cls(cands)

    def to_json(self) -> dict:
        return {"candidates": [{"token": t, "score": s} for t, s in self.candidates]}

    @property
    def top(self) -> str:
        return self.candidates[0][0]


class FillMaskClient:
    """Synchronous client; at most ``max_in_flight`` requests run at once."""

    def __init__(self, endpoint: str, timeout: float = DEFAULT_TIMEOUT,
                 max_in_flight: int = DEFAULT_MAX_IN_FLIGHT):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self.max_in_flight = max_in_flight
        self._slots = threading.BoundedSemaphore(max_in_flight)
        self._local = threading.local()

    def _session(self) -> requests.Session:
        s = getattr(self._local, "session", None)
        if s is None:
            s = self._local.session = requests.Session()
        return s

    def fill(self, req: FillMaskRequest) -> FillMaskResponse:
        with self._slots:
            try:
                r = self._session().post(self.endpoint + "/fill", json=req.to_json(),
                                         timeout=self.timeout)
            except requests.RequestException as exc:
                raise FillMaskTransportError(f"{self.endpoint}: {exc}") from exc
        if r.status_code != 200:
            raise FillMaskProtocolError(f"{self.endpoint}/fill answered HTTP {r.status_code}")
        try:
            payload = r.json()
        except ValueError:
            raise FillMaskProtocolError("fill-mask response is not JSON") from None
        resp = FillMaskResponse.from_json(payload)
        if len(resp.candidates) > req.top_k:
            resp = FillMaskResponse(resp.candidates[:req.top_k])
        return resp

    def healthy(self) -> bool:
        try:
            return self._session().get(self.endpoint + "/healthz",
                                       timeout=self.timeout).status_code == 200
        except requests.RequestException:
            return False

    def __getstate__(self):
        return {"endpoint": self.endpoint, "timeout": self.timeout,
                "max_in_flight": self.max_in_flight}

    def __setstate__(self, state):
        self.__init__(**state)


def fill_mask(req: FillMaskRequest, endpoint: str, timeout: float = DEFAULT_TIMEOUT) -> FillMaskResponse:
    return FillMaskClient(endpoint, timeout).fill(req)


Responder = Callable[[str, int], Sequence[tuple[str, float]]]

DEFAULT_CANNED = (("Jones", 0.41), ("Smith", 0.22), ("Brown", 0.12),
                  ("Miller", 0.07), ("Davis", 0.03))


@dataclass
class StubFillMaskServer:
    """A local fill-mask backend answering from canned candidates.

    ``responder`` overrides the canned list: it receives the request text and
    ``top_k`` and returns ``(token, score)`` pairs, which the server sorts by
    score.  Use as a context manager::

        with StubFillMaskServer(candidates=[("Jones", 1.0)]) as stub:
            client = FillMaskClient(stub.url)
    """

    candidates: Sequence[tuple[str, float]] = DEFAULT_CANNED
    responder: Responder | None = None
    host: str = "127.0.0.1"
    port: int = 0
    requests_seen: list = field(default_factory=list)

    def __post_init__(self):
        self._httpd = None
        self._thread = None

    def answer(self, text: str, top_k: int) -> list[tuple[str, float]]:
        if self.responder is not None:
            cands = list(self.responder(text, top_k))
        else:
            cands = list(self.candidates)
        cands.sort(key=lambda c: -c[1])
        return cands[:top_k]

    def _handler(self):
        stub = self

        class Handler(BaseHTTPRequestHandler):
            # keep-alive: clients reuse one connection per thread
            protocol_version = "HTTP/1.1"
            disable_nagle_algorithm = True

            def log_message(self, fmt, *args):
                logger.debug("stub: " + fmt, *args)

            def _send(self, code: int, body: dict | None = None):
                data = json.dumps(body).encode() if body is not None else b""
                self.send_response(code)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def do_GET(self):
                if self.path == "/healthz":
                    self._send(200, {"status": "ok"})
                else:
                    self._send(404, {"error": "not found"})

            def do_POST(self):
                if self.path != "/fill":
                    return self._send(404, {"error": "not found"})
                try:
                    n = int(self.headers.get("Content-Length", 0))
                    body = json.loads(self.rfile.read(n))
                    req = FillMaskRequest(body["text"], int(body.get("top_k", 1)),
                                          body.get("mask_marker", MASK_MARKER))
                except (ValueError, KeyError, TypeError) as exc:
                    return self._send(400, {"error": str(exc)})
                stub.requests_seen.append(req)
                cands = stub.answer(req.text, req.top_k)
                self._send(200, {"candidates": [{"token": t, "score": s} for t, s in cands]})

        return Handler

    def start(self) -> "StubFillMaskServer":
        self._httpd = ThreadingHTTPServer((self.host, self.port), self._handler())
        self._httpd.daemon_threads = True
        self.port = self._httpd.server_address[1]
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._thread.start()
        return self

    def serve_forever(self, ready: Callable[[str], None] | None = None) -> None:
        """Serve in the calling thread; ``ready`` gets the bound URL first."""
        self._httpd = ThreadingHTTPServer((self.host, self.port), self._handler())
        self.port = self._httpd.server_address[1]
        if ready is not None:
            ready(self.url)
        try:
            self._httpd.serve_forever()
        finally:
            self._httpd.server_close()

    def stop(self) -> None:
        if self._httpd is not None:
            self._httpd.shutdown()
            self._httpd.server_close()
            self._httpd = None

    @property
    def url(self) -> str:
        return f"http://{self.host}:{self.port}"

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()
