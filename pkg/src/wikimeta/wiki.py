"""Access to CSV pages on a MediaWiki site.

CSV tables live on ordinary wiki pages whose title contains ``.csv``; the
page body is the CSV text with no markup.  Pages are fetched with the
``action=raw`` URL form, which needs no API access or authentication.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import NamedTuple
from urllib.parse import quote

import requests

from .errors import EmptyPage, HttpFailure, InvalidParameter, NoLinkSource, NotCsvTitle

log = logging.getLogger(__name__)

TIMEOUT = 5.0
PUBMED_URL = "https://pubmed.ncbi.nlm.nih.gov/{}/"
_TRAILING_NEWLINES = re.compile(r"(\r?\n)(?:\r?\n)*\Z")


@dataclass(frozen=True)
class WikiSource:
    base_url: str
    page_title: str
    raw_text: str
    fetched_at: datetime

    @property
    def url(self):
        return raw_url(self.base_url, self.page_title)


@dataclass(frozen=True)
class BackLink:
    kind: str  # "wiki_page" | "pubmed"
    target: str
    anchor_text: str


class CsvDownload(NamedTuple):
    content_type: str
    body: bytes
    filename: str


def encode_title(title):
    """Wiki URL form of a page title: spaces become underscores, the rest is percent-encoded."""
    return quote(title.strip().replace(" ", "_"), safe="/:()")


def _index_url(base_url):
    base = base_url.rstrip("/")
    return base if base.endswith("index.php") else base + "/index.php"


def raw_url(base_url, title):
    return f"{_index_url(base_url)}?title={encode_title(title)}&action=raw"


def page_url(base_url, title):
    return f"{_index_url(base_url)}?title={encode_title(title)}"


def _get(url, timeout=TIMEOUT, session=None):
    """GET ``url`` and return decoded text; one retry on connection errors and 5xx."""
    http = session or requests
    response = None
    for attempt in (1, 2):
        try:
            response = http.get(url, timeout=timeout)
        except requests.RequestException as exc:
            log.warning("GET %s failed (attempt %d): %s", url, attempt, exc)
            if attempt == 2:
                raise HttpFailure(None, f"could not reach {url}: {exc}", url=url) from exc
            continue
        if response.status_code >= 500 and attempt == 1:
            log.warning("GET %s returned %d, retrying", url, response.status_code)
            continue
        break
    if response.status_code != 200:
        raise HttpFailure(response.status_code, url=url)
    return response.content.decode("utf-8", errors="replace")


def _squeeze_trailing_newlines(text):
    return _TRAILING_NEWLINES.sub(lambda m: m.group(1), text)


def fetch_url(url, timeout=TIMEOUT, session=None):
    """Fetch CSV text from an arbitrary URL."""
    text = _squeeze_trailing_newlines(_get(url, timeout, session))
    if not text.strip():
        raise EmptyPage(f"{url} returned an empty body", url=url)
    return text


def fetch_csv_page(base_url, title, timeout=TIMEOUT, session=None):
    """Fetch the raw text of the wiki page ``title``, which must contain ``.csv``."""
    if ".csv" not in title:
        raise NotCsvTitle(f"page title {title!r} does not contain '.csv'", title=title)
    url = raw_url(base_url, title)
    text = _squeeze_trailing_newlines(_get(url, timeout, session))
    if not text.strip():
        raise EmptyPage(f"wiki page {title!r} is empty", title=title)
    return WikiSource(base_url=base_url, page_title=title, raw_text=text,
                      fetched_at=datetime.now(timezone.utc))


def download_filename(title):
    name = title.strip().replace(" ", "_").replace("/", "_")
    return name if name.endswith(".csv") else name + ".csv"


def proxy_csv(source):
    """Pass the page body through unchanged with a ``text/csv`` content type."""
    return CsvDownload("text/csv", source.raw_text.encode("utf-8"),
                       download_filename(source.page_title))


def strip_csv_suffix(title):
    head, sep, tail = title.rpartition(".csv")
    return (head + tail).strip() if sep else title.strip()


def derive_backlinks(title=None, pubmed_id=None, base_url=""):
    """Links back to the wiki page behind ``title`` and to the PubMed record."""
    if not title and pubmed_id is None:
        raise NoLinkSource("need a page title or a PubMed identifier")
    links = []
    if title:
        page = strip_csv_suffix(title)
        links.append(BackLink("wiki_page", page_url(base_url, page), page))
    if pubmed_id is not None:
        if isinstance(pubmed_id, bool) or not isinstance(pubmed_id, int) or pubmed_id <= 0:
            raise InvalidParameter(f"PubMed identifier must be a positive integer, got {pubmed_id!r}")
        links.append(BackLink("pubmed", PUBMED_URL.format(pubmed_id), f"PubMed {pubmed_id}"))
        search = f"{_index_url(base_url)}?title=Special:Search&search={quote(f'PMID {pubmed_id}')}"
        links.append(BackLink("wiki_page", search, f"Wiki pages for PMID {pubmed_id}"))
    return links
