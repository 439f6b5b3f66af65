"""Fetch TimeMaps from Memento endpoints, politely, or replay fixtures offline.

The network is abstracted behind a transport with a single
`get(url) -> TransportResponse` method. RequestsTransport talks real HTTP
(descriptive user agent, Accept: application/link-format, 30s timeout, no
cookies); FixtureTransport replays canned responses from a directory and
is what every test uses.

Fixture directory format, replayed bit-exact:
  - one file per seed, named by percent-encoding the canonical URI-R with
    no safe characters (urllib.parse.quote(uri_r, safe=""));
  - the first line holds whitespace-separated HTTP status codes, one per
    successive request to that seed, the last repeating forever
    (e.g. "503 503 200");
  - everything after the first newline is the response body;
  - a missing file behaves as a 404, which by contract means "archive
    knows no mementos" and produces an empty TimeMap, not an error.

Per-host politeness: consecutive request starts to one host are spaced at
least `politeness_delay` apart, coordinated across threads. Retries use
exponential backoff (1s base, doubling; optional jitter, off by default so
runs are reproducible) and only ever re-attempt 5xx and transport-level
failures, never 4xx.
"""

from __future__ import annotations

import logging
import random
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Callable, Protocol
from urllib.parse import quote, urljoin, urlsplit

from .errors import InvariantViolation, MemstoryError
from .model import Collection, OriginalResource, TimeMap
from .timemaps import parse_link_format, TimeMapParseError, TimeMapSemanticError

logger = logging.getLogger(__name__)

USER_AGENT = "memstory-harvester/0.1"
REQUEST_TIMEOUT = 30.0
MAX_REDIRECTS = 5
BACKOFF_BASE = 1.0

#: Public Memento aggregator; any archive's own timemap endpoint works too.
DEFAULT_TIMEMAP_TEMPLATE = "http://timetravel.mementoweb.org/timemap/link/{uri_r}"


class TransportError(MemstoryError):
    """Network-level failure (connection, timeout, protocol)."""


class HarvestError(MemstoryError):
    """Harvest could not produce anything at all."""


@dataclass(frozen=True)
class TransportResponse:
    status: int
    body: bytes = b""
    location: str | None = None


class Transport(Protocol):
    def get(self, url: str) -> TransportResponse: ...


@dataclass(frozen=True)
class ArchiveEndpoint:
    """Where to ask for TimeMaps: a URI-T template plus politeness knobs."""

    name: str
    timemap_template: str = DEFAULT_TIMEMAP_TEMPLATE
    politeness_delay: timedelta = timedelta(seconds=1)
    max_retries: int = 3

    def __post_init__(self) -> None:
        if not self.name:
            raise InvariantViolation("endpoint name must not be empty")
        if self.timemap_template.count("{uri_r}") != 1:
            raise InvariantViolation(
                f"timemap_template must contain exactly one {{uri_r}} placeholder: {self.timemap_template!r}"
            )
        if self.politeness_delay < timedelta(0):
            raise InvariantViolation("politeness_delay must be >= 0")
        if not 0 <= self.max_retries <= 10:
            raise InvariantViolation(f"max_retries must be in [0, 10], got {self.max_retries}")


def discover_uri_t(endpoint: ArchiveEndpoint, uri_r: OriginalResource) -> str:
    """URI-T for a seed: the template with {uri_r} substituted, unencoded.

    Deployed aggregators take the original URI verbatim in the path, so no
    percent-encoding is applied.
    """
    return endpoint.timemap_template.replace("{uri_r}", uri_r.uri)


@dataclass(frozen=True)
class FetchReport:
    """What happened while fetching one seed's TimeMap."""

    uri_t: str
    outcome: str  # ok | http_error | network_error | parse_error
    status_code: int | None = None
    detail: str | None = None
    duration: float = 0.0
    retrieved_at: datetime = field(default_factory=lambda: datetime.now(timezone.utc))
    attempts: int = 1

    @property
    def ok(self) -> bool:
        return self.outcome == "ok"

    def describe(self) -> str:
        extra = ""
        if self.status_code is not None and self.outcome != "ok":
            extra = f" status={self.status_code}"
        if self.detail and self.outcome != "ok":
            extra += f" ({self.detail})"
        return f"{self.outcome}{extra}"


class RequestsTransport:
    """Real HTTP GET via requests; redirects are handled by the client."""

    def __init__(self, timeout: float = REQUEST_TIMEOUT) -> None:
        import requests

        self._session = requests.Session()
        self._session.headers.update({"User-Agent": USER_AGENT, "Accept": "application/link-format"})
        self._timeout = timeout
        self._requests = requests

    def get(self, url: str) -> TransportResponse:
        try:
            response = self._session.get(url, allow_redirects=False, timeout=self._timeout)
        except self._requests.RequestException as exc:
            raise TransportError(f"GET {url} failed: {exc}") from exc
        return TransportResponse(response.status_code, response.content, response.headers.get("Location"))


class FixtureTransport:
    """Replay canned per-seed responses from a directory (format above)."""

    def __init__(self, fixture_dir, timemap_template: str = DEFAULT_TIMEMAP_TEMPLATE) -> None:
        self.fixture_dir = Path(fixture_dir)
        if not self.fixture_dir.is_dir():
            raise TransportError(f"fixture directory does not exist: {fixture_dir}")
        if timemap_template.count("{uri_r}") != 1:
            raise InvariantViolation("timemap_template must contain exactly one {uri_r} placeholder")
        self._prefix, self._suffix = timemap_template.split("{uri_r}")
        self._calls: dict[str, int] = {}
        self._lock = threading.Lock()

    @staticmethod
    def filename_for(uri_r: str) -> str:
        return quote(uri_r, safe="")

    def _uri_r_from(self, url: str) -> str:
        if not (url.startswith(self._prefix) and url.endswith(self._suffix)):
            raise TransportError(f"request {url!r} does not match the endpoint template")
        end = len(url) - len(self._suffix) if self._suffix else len(url)
        return url[len(self._prefix) : end]

    def get(self, url: str) -> TransportResponse:
        uri_r = self._uri_r_from(url)
        path = self.fixture_dir / self.filename_for(uri_r)
        with self._lock:
            call_index = self._calls.get(uri_r, 0)
            self._calls[uri_r] = call_index + 1
        if not path.is_file():
            return TransportResponse(404)
        raw = path.read_bytes()
        head, _, body = raw.partition(b"\n")
        try:
            statuses = [int(token) for token in head.split()]
        except ValueError:
            raise TransportError(f"fixture {path.name}: first line must be HTTP status codes")
        if not statuses:
            raise TransportError(f"fixture {path.name}: empty status line")
        status = statuses[min(call_index, len(statuses) - 1)]
        return TransportResponse(status, body)


class _PolitenessGate:
    """Serializes request starts so same-host requests stay spaced apart."""

    def __init__(self, delay: float, clock: Callable[[], float], sleep: Callable[[float], None]) -> None:
        self._delay = delay
        self._clock = clock
        self._sleep = sleep
        self._next_allowed: dict[str, float] = {}
        self._lock = threading.Lock()

    def wait_for(self, host: str) -> None:
        if self._delay <= 0:
            return
        with self._lock:
            now = self._clock()
            start = max(now, self._next_allowed.get(host, now))
            self._next_allowed[host] = start + self._delay
        pause = start - self._clock()
        if pause > 0:
            self._sleep(pause)


class ArchiveClient:
    """Fetches TimeMaps for seeds with retries, redirects, and politeness.

    The transport, sleep, and clock are injectable so tests run offline and
    instantly. One client can be shared across threads.
    """

    def __init__(
        self,
        transport: Transport | None = None,
        *,
        sleep: Callable[[float], None] = time.sleep,
        clock: Callable[[], float] = time.monotonic,
        jitter: bool = False,
        jitter_rng: random.Random | None = None,
    ) -> None:
        self.transport = transport if transport is not None else RequestsTransport()
        self._sleep = sleep
        self._clock = clock
        self._jitter = jitter
        self._rng = jitter_rng or random.Random()
        self._gates: dict[float, _PolitenessGate] = {}
        self._gates_lock = threading.Lock()

    def _gate(self, delay: float) -> _PolitenessGate:
        with self._gates_lock:
            gate = self._gates.get(delay)
            if gate is None:
                gate = _PolitenessGate(delay, self._clock, self._sleep)
                self._gates[delay] = gate
            return gate

    def _request(self, url: str, delay: float) -> TransportResponse:
        """One GET following up to MAX_REDIRECTS redirects, politely per hop."""
        gate = self._gate(delay)
        current = url
        for _ in range(MAX_REDIRECTS + 1):
            gate.wait_for(urlsplit(current).netloc.lower())
            response = self.transport.get(current)
            if response.status in (301, 302, 303, 307, 308) and response.location:
                current = urljoin(current, response.location)
                continue
            return response
        raise TransportError(f"GET {url}: more than {MAX_REDIRECTS} redirects")

    def fetch_timemap(
        self, endpoint: ArchiveEndpoint, uri_r: OriginalResource
    ) -> tuple[TimeMap | None, FetchReport]:
        """Fetch and parse one seed's TimeMap.

        A 404 is data, not failure: a seed the archive has never captured
        yields an empty TimeMap with outcome ok. 5xx and transport errors
        are retried with exponential backoff up to max_retries; 4xx never.
        """
        url = discover_uri_t(endpoint, uri_r)
        delay = endpoint.politeness_delay.total_seconds()
        started = self._clock()
        attempts = 0
        backoff = BACKOFF_BASE

        def report(outcome: str, status: int | None = None, detail: str | None = None) -> FetchReport:
            return FetchReport(
                url, outcome, status_code=status, detail=detail,
                duration=self._clock() - started, attempts=attempts,
            )

        while True:
            attempts += 1
            try:
                response = self._request(url, delay)
            except TransportError as exc:
                if attempts <= endpoint.max_retries:
                    self._backoff_sleep(backoff)
                    backoff *= 2
                    continue
                logger.warning("fetch %s failed: %s", url, exc)
                return None, report("network_error", detail=str(exc))
            if response.status == 200:
                try:
                    timemap = parse_link_format(response.body)
                except (TimeMapParseError, TimeMapSemanticError) as exc:
                    return None, report("parse_error", status=200, detail=str(exc))
                if timemap.uri_r != uri_r:
                    return None, report(
                        "parse_error", status=200,
                        detail=f"timemap is about {timemap.uri_r.uri}, expected {uri_r.uri}",
                    )
                if timemap.uri_t is None:
                    timemap = TimeMap(timemap.uri_r, timemap.mementos, uri_t=url)
                return timemap, report("ok", status=200)
            if response.status == 404:
                return TimeMap(uri_r, (), uri_t=url), report("ok", status=404, detail="no mementos known")
            if response.status >= 500 and attempts <= endpoint.max_retries:
                self._backoff_sleep(backoff)
                backoff *= 2
                continue
            return None, report("http_error", status=response.status)

    def _backoff_sleep(self, seconds: float) -> None:
        if self._jitter:
            seconds *= 0.5 + self._rng.random()
        self._sleep(seconds)

    def harvest_collection(
        self,
        endpoint: ArchiveEndpoint,
        seeds: list[OriginalResource],
        parallelism: int = 4,
        *,
        collection_id: str = "",
        collection_name: str = "",
    ) -> tuple[Collection, list[FetchReport]]:
        """Fetch one TimeMap per distinct seed, at most `parallelism` in flight.

        The returned collection holds exactly the seeds that fetched ok
        (assembled by URI-R, so completion order never matters) and the
        report list has one entry per seed in input order. Raises
        HarvestError only when not a single seed succeeds.
        """
        if parallelism < 1:
            raise InvariantViolation(f"parallelism must be >= 1, got {parallelism}")
        distinct = list(dict.fromkeys(seeds))
        if not distinct:
            raise HarvestError("no seeds to harvest")
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            outcomes = list(pool.map(lambda seed: self.fetch_timemap(endpoint, seed), distinct))
        reports = [report for _, report in outcomes]
        timemaps = tuple(tm for tm, report in outcomes if report.ok and tm is not None)
        if not timemaps:
            raise HarvestError(
                f"all {len(distinct)} seed(s) failed: " + "; ".join(r.describe() for r in reports)
            )
        return Collection(collection_id, collection_name, timemaps), reports
