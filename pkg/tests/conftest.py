import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlsplit

import pytest

from wikimeta import fixtures

GOLDEN = Path(__file__).parent / "golden"
DATA = Path(__file__).parent / "data"

# criterion name -> "PASS"/"FAIL", filled by test_acceptance
ACCEPTANCE = {}


class StubWiki:
    """Minimal MediaWiki stand-in answering ``/w/index.php?title=...&action=raw``."""

    def __init__(self):
        self.pages = {f"{name}.csv": fixtures.load(name).csv_text for name in fixtures.names()}
        self.pages["Major depressive disorder hippocampus.csv"] = fixtures.load("ref-3").csv_text
        self.pages["Trailing newlines.csv"] = "study,patients n\r\nA,1\r\n\r\n\r\n"
        self.pages["Blank.csv"] = "\n\n"
        self.failures = {}  # title -> list of status codes to return before succeeding
        self.requests = []
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def do_GET(self):
                parts = urlsplit(self.path)
                query = parse_qs(parts.query)
                title = query.get("title", [""])[0].replace("_", " ")
                stub.requests.append(self.path)
                pending = stub.failures.get(title)
                if pending:
                    self._send(pending.pop(0), b"upstream trouble")
                    return
                if parts.path != "/w/index.php" or query.get("action") != ["raw"] \
                        or title not in stub.pages:
                    self._send(404, b"no such page")
                    return
                self._send(200, stub.pages[title].encode("utf-8"), "text/x-wiki; charset=UTF-8")

            def _send(self, status, body, content_type="text/plain"):
                self.send_response(status)
                self.send_header("Content-Type", content_type)
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def log_message(self, *args):
                pass

        self.server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.base_url = f"http://127.0.0.1:{self.server.server_address[1]}/w"
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)

    def start(self):
        self.thread.start()
        return self

    def stop(self):
        self.server.shutdown()
        self.server.server_close()


@pytest.fixture(scope="session")
def stub_wiki():
    stub = StubWiki().start()
    yield stub
    stub.stop()


@pytest.fixture
def wiki(stub_wiki):
    stub_wiki.failures.clear()
    return stub_wiki


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for name, status in ACCEPTANCE.items():
            terminalreporter.write_line(f"[{status}] {name}")
