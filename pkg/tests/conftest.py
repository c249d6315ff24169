import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest


class StubHttpServer:
    """Scripted local HTTP server: per-path queues of (status, json_body)
    responses, consumed in order. Records every request for golden checks."""

    def __init__(self):
        self.scripts: dict[str, list[tuple[int, dict]]] = {}
        self.requests: list[dict] = []
        self._lock = threading.Lock()
        outer = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                body = json.loads(self.rfile.read(length) or b"{}")
                with outer._lock:
                    outer.requests.append({"path": self.path, "body": body,
                                           "headers": dict(self.headers)})
                    queue = outer.scripts.get(self.path, [])
                    status, payload = queue.pop(0) if queue else (404, {"error": "unscripted"})
                data = json.dumps(payload).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def log_message(self, *args):
                pass

        self._server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()

    @property
    def url(self) -> str:
        host, port = self._server.server_address
        return f"http://{host}:{port}"

    def script(self, path: str, responses: list[tuple[int, dict]]):
        self.scripts.setdefault(path, []).extend(responses)

    def close(self):
        self._server.shutdown()
        self._server.server_close()


@pytest.fixture
def stub_http():
    server = StubHttpServer()
    yield server
    server.close()
