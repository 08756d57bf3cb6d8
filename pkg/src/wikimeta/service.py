"""HTTP front end: ``/analyze``, ``/csv`` and ``/health``.

The request handling core is :meth:`App.handle`, a pure function of the
request and the upstream CSV bytes; :func:`make_server` wraps it in a
threaded ``http.server`` for deployment.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qsl, quote, urlencode, urlsplit
from xml.sax.saxutils import escape

from . import __version__, artifacts, plots, wiki
from .errors import InvalidParameter, MetaError, NoLinkSource
from .ingest import parse_overrides
from .pooling import AnalysisConfig, analyze_text

log = logging.getLogger(__name__)

OVERRIDE_PARAMS = {
    "c1n": "group1_n", "c1m": "group1_mean", "c1s": "group1_sd",
    "c2n": "group2_n", "c2m": "group2_mean", "c2s": "group2_sd",
    "labelcol": "label", "yearcol": "year",
    "e1": "events1", "t1": "total1", "e2": "events2", "t2": "total2",
}
ANALYZE_FORMATS = ("html",) + tuple(artifacts.FORMATS)


@dataclass(frozen=True)
class ServiceConfig:
    wiki_base_url: str = "http://localhost/w"
    host: str = "127.0.0.1"
    port: int = 8080
    timeout: float = wiki.TIMEOUT

    @classmethod
    def from_env(cls, environ=None):
        env = os.environ if environ is None else environ
        return cls(wiki_base_url=env.get("WIKI_BASE_URL", cls.wiki_base_url),
                   host=env.get("HOST", cls.host),
                   port=int(env.get("PORT", cls.port)))


@dataclass(frozen=True)
class Response:
    status: int
    content_type: str
    body: bytes
    headers: tuple = ()


@dataclass(frozen=True)
class AnalysisRequest:
    source: str            # "wiki" | "inline" | "url"
    location: str          # page title, CSV text or URL
    base_url: str = ""
    overrides: dict = field(default_factory=dict)
    config: AnalysisConfig = field(default_factory=AnalysisConfig)
    format: str = "html"
    title: str | None = None
    pubmed_id: int | None = None


def _first(query, key, default=None):
    values = query.get(key)
    return values[0] if values else default


def decode_request(query, body=b"", default_base_url=""):
    """Build an :class:`AnalysisRequest` from parsed query parameters.

    Sources: ``title`` (wiki page, optional ``wiki`` base URL), ``url``
    (direct CSV URL) or inline CSV in ``data`` or the request body.
    """
    inline = _first(query, "data")
    if inline is None and body:
        inline = body.decode("utf-8", errors="replace")
    sources = [s for s, present in (("wiki", "title" in query), ("url", "url" in query),
                                    ("inline", inline is not None)) if present]
    if len(sources) != 1:
        raise InvalidParameter("give exactly one source: title (wiki page), url, or inline data",
                               sources=sources)
    source = sources[0]
    fmt = _first(query, "format", "html")
    if fmt not in ANALYZE_FORMATS:
        raise InvalidParameter(f"unknown format {fmt!r}", format=fmt)
    overrides = parse_overrides({role: _first(query, param)
                                 for param, role in OVERRIDE_PARAMS.items() if param in query})
    config = AnalysisConfig(measure=_first(query, "measure", "smd"),
                            smd_variant=_first(query, "variant", "hedges"))
    pmid = _first(query, "pmid")
    if pmid is not None:
        try:
            pmid = int(pmid)
        except ValueError:
            raise InvalidParameter(f"pmid must be an integer, got {pmid!r}") from None
        if pmid <= 0:
            raise InvalidParameter(f"pmid must be positive, got {pmid}")
    if source == "wiki":
        location = _first(query, "title")
        title = location
    else:
        location = _first(query, "url") if source == "url" else inline
        title = _first(query, "name")
    return AnalysisRequest(source=source, location=location,
                           base_url=_first(query, "wiki", default_base_url),
                           overrides=overrides, config=config, format=fmt, title=title,
                           pubmed_id=pmid)


def _error(exc):
    body = json.dumps(exc.to_dict(), indent=2, sort_keys=False) + "\n"
    return Response(exc.status, "application/json", body.encode("utf-8"))


class App:
    def __init__(self, config=None, session=None):
        self.config = config or ServiceConfig()
        self.session = session

    # -- dispatch ----------------------------------------------------------------

    def handle(self, method, target, body=b""):
        """Answer one request.  ``target`` is the request path with query string."""
        parts = urlsplit(target)
        query = {}
        for key, value in parse_qsl(parts.query, keep_blank_values=True):
            query.setdefault(key, []).append(value)
        routes = {"/analyze": self.analyze, "/csv": self.csv, "/health": self.health}
        handler = routes.get(parts.path.rstrip("/") or "/")
        if handler is None:
            return _error(NotFound(f"no route {parts.path}"))
        if method not in ("GET", "HEAD") and not (method == "POST" and handler == self.analyze):
            return _error(MethodNotAllowed(f"{method} not allowed on {parts.path}"))
        try:
            return handler(query, body, parts.query)
        except MetaError as exc:
            return _error(exc)
        except Exception as exc:  # noqa: BLE001
            log.exception("unhandled error for %s", target)
            return _error(InternalError(f"internal error: {type(exc).__name__}"))

    def health(self, query, body, raw_query):
        payload = {"status": "ok", "version": __version__}
        return Response(200, "application/json", (json.dumps(payload) + "\n").encode())

    def csv(self, query, body, raw_query):
        title = _first(query, "title")
        if title is None:
            raise InvalidParameter("missing title parameter")
        source = wiki.fetch_csv_page(_first(query, "wiki", self.config.wiki_base_url), title,
                                     timeout=self.config.timeout, session=self.session)
        download = wiki.proxy_csv(source)
        ascii_name = download.filename.encode("ascii", "replace").decode().replace("?", "_")
        disposition = ("Content-Disposition", f'attachment; filename="{ascii_name}"; '
                                              f"filename*=UTF-8''{quote(download.filename)}")
        return Response(200, download.content_type, download.body, (disposition,))

    def analyze(self, query, body, raw_query):
        request = decode_request(query, body, self.config.wiki_base_url)
        if request.source == "wiki":
            source = wiki.fetch_csv_page(request.base_url, request.location,
                                         timeout=self.config.timeout, session=self.session)
            text, uri = source.raw_text, source.url
        elif request.source == "url":
            text = wiki.fetch_url(request.location, timeout=self.config.timeout,
                                  session=self.session)
            uri = request.location
        else:
            text, uri = request.location, None
        result = analyze_text(text, request.config, overrides=request.overrides,
                              title=request.title, source_uri=uri,
                              pubmed_ids=[request.pubmed_id] if request.pubmed_id else None)
        if request.format == "html":
            page = render_html(result, request, raw_query)
            return Response(200, "text/html; charset=utf-8", page.encode("utf-8"))
        content_type, payload = artifacts.render(result, request.format, request.config)
        return Response(200, content_type, payload)


class NotFound(MetaError):
    status = 404


class MethodNotAllowed(MetaError):
    status = 405


class InternalError(MetaError):
    status = 500


# -- HTML ------------------------------------------------------------------------------

def _h(text):
    return escape(str(text), {'"': "&quot;"})


def _inline_svg(doc):
    return doc.body.split("\n", 1)[1]  # drop the XML declaration


def _format_link(raw_query, fmt):
    pairs = [(k, v) for k, v in parse_qsl(raw_query, keep_blank_values=True) if k != "format"]
    return "/analyze?" + urlencode(pairs + [("format", fmt)])


def render_html(result, request, raw_query):
    title = result.title or "Meta-analysis"
    measure = plots.MEASURE_NAMES[result.measure.value]
    out = [
        "<!DOCTYPE html>",
        '<html lang="en">',
        "<head>",
        '<meta charset="utf-8">',
        f"<title>{_h(title)}: meta-analysis</title>",
        "<style>body{font-family:sans-serif;margin:1em 2em}table{border-collapse:collapse}"
        "td,th{border:1px solid #ccc;padding:2px 6px;text-align:right}"
        "td:first-child,th:first-child{text-align:left}</style>",
        "</head>",
        "<body>",
        f"<h1>{_h(title)}</h1>",
        f"<p>Effect measure: {_h(measure)}. Studies: {result.fixed.k}. "
        f"Subjects: {result.fixed.n_total}.</p>",
    ]
    try:
        links = wiki.derive_backlinks(title=request.title if request.source == "wiki" else None,
                                      pubmed_id=request.pubmed_id, base_url=request.base_url)
    except NoLinkSource:
        links = []
    if links:
        anchors = ", ".join(f'<a href="{_h(l.target)}">{_h(l.anchor_text)}</a>' for l in links)
        out.append(f'<p class="backlinks">Wiki and literature: {anchors}</p>')

    out += ["<h2>Studies</h2>", "<table>",
            "<tr><th>Study</th><th>N</th><th>Effect</th><th>Variance</th><th>95% CI</th>"
            "<th>Weight (fixed)</th><th>Weight (random)</th></tr>"]
    rows = zip(result.estimates, result.weights("fixed"), result.weights("random_dl"))
    for est, wf, wr in rows:
        half = plots.Z_95 * est.se
        out.append(f"<tr><td>{_h(est.study_label)}</td><td>{est.n_total}</td>"
                   f"<td>{est.effect:.4f}</td><td>{est.variance:.4f}</td>"
                   f"<td>[{est.effect - half:.4f}, {est.effect + half:.4f}]</td>"
                   f"<td>{wf:.1f}%</td><td>{wr:.1f}%</td></tr>")
    out += ["</table>", "<h2>Pooled estimates</h2>", "<table>",
            "<tr><th>Model</th><th>Effect</th><th>SE</th><th>95% CI</th><th>z</th><th>p</th></tr>"]
    for name, p in (("Fixed effect", result.fixed), ("Random effects (DerSimonian-Laird)", result.random)):
        out.append(f"<tr><td>{name}</td><td>{p.effect:.4f}</td><td>{p.se:.4f}</td>"
                   f"<td>[{p.ci_low:.4f}, {p.ci_high:.4f}]</td><td>{p.z:.3f}</td>"
                   f"<td>{p.p:.4g}</td></tr>")
    het = result.heterogeneity
    out += ["</table>", "<h2>Heterogeneity</h2>",
            f'<p class="heterogeneity">Q = {het.Q:.4f}, df = {het.df}, p = {het.p_Q:.4g}, '
            f"I² = {het.I2:.1f}%, τ² = {het.tau2:.4g}</p>",
            "<h2>Forest plot</h2>", _inline_svg(plots.forest_svg(result)),
            "<h2>Funnel plot</h2>", _inline_svg(plots.funnel_svg(result)),
            "<h2>Downloads</h2>", "<ul>"]
    for fmt, label in (("json", "JSON"), ("csv", "CSV"), ("r", "R script (meta package)"),
                       ("forest_svg", "Forest plot (SVG)"), ("funnel_svg", "Funnel plot (SVG)")):
        out.append(f'<li><a href="{_h(_format_link(raw_query, fmt))}">{label}</a></li>')
    if request.source == "wiki":
        csv_link = "/csv?" + urlencode([("title", request.location), ("wiki", request.base_url)])
        out.append(f'<li><a href="{_h(csv_link)}">Raw CSV data</a></li>')
    out += ["</ul>", "</body>", "</html>", ""]
    return "\n".join(out)


# -- server ------------------------------------------------------------------------------

def make_server(app, host=None, port=None):
    """Threaded HTTP server bound to ``host:port`` (port 0 picks a free port)."""
    host = app.config.host if host is None else host
    port = app.config.port if port is None else port

    class Handler(BaseHTTPRequestHandler):
        server_version = f"wikimeta/{__version__}"

        def _respond(self, method):
            length = int(self.headers.get("Content-Length") or 0)
            body = self.rfile.read(length) if length else b""
            response = app.handle(method, self.path, body)
            self.send_response(response.status)
            self.send_header("Content-Type", response.content_type)
            self.send_header("Content-Length", str(len(response.body)))
            for name, value in response.headers:
                self.send_header(name, value)
            self.end_headers()
            if method != "HEAD":
                self.wfile.write(response.body)

        def do_GET(self):
            self._respond("GET")

        def do_HEAD(self):
            self._respond("HEAD")

        def do_POST(self):
            self._respond("POST")

        def log_message(self, fmt, *args):
            log.info("%s - %s", self.address_string(), fmt % args)

    return ThreadingHTTPServer((host, port), Handler)


def serve(config=None):
    config = config or ServiceConfig.from_env()
    server = make_server(App(config))
    log.info("serving on http://%s:%d (wiki %s)", *server.server_address[:2], config.wiki_base_url)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
