from datetime import datetime, timedelta, timezone

import pytest

from usagerel.model import LogEntry

UTC = timezone.utc
T0 = datetime(2010, 4, 25, 10, 0, 0, tzinfo=UTC)
SITE = "data.semanticweb.org"


def hit(host="h1", target="/index.html", t=0, status=200, referrer=None,
        ua="Mozilla/5.0", line_no=1, cc="US"):
    """Build a LogEntry ``t`` seconds after T0."""
    return LogEntry(
        host_hash=host,
        country_code=cc,
        timestamp=T0 + timedelta(seconds=t),
        method="GET",
        resource_raw=target,
        protocol="HTTP/1.1",
        status=status,
        bytes=100,
        referrer=referrer,
        user_agent=ua,
        line_no=line_no,
    )


def ref(path):
    return f"http://{SITE}{path}"


@pytest.fixture
def make_hit():
    return hit


def run_pipeline(lines, scenario):
    """Parse, curate and build per-window graphs the way the CLI does.

    Returns (report, hits, verdicts, views) where views maps a window label
    to (graph, paths) over clean, successful, non-bot hits.
    """
    from usagerel.clf import parse_stream
    from usagerel.curation import CurationConfig, curate
    from usagerel.footprint import build_site_graph, site_paths

    entries, report = parse_stream(lines)
    config = CurationConfig(site_host=scenario.site_host, rate_hits=scenario.rate_hits,
                            rate_seconds=scenario.rate_seconds,
                            semantic_pair_horizon=scenario.pair_horizon)
    hits, verdicts = curate(entries, config)
    views = {}
    for w in scenario.windows:
        clean = [h.entry for h in hits if not h.dropped and not h.is_bot and h.entry.timestamp in w]
        views[w.label] = (build_site_graph(clean, scenario.site_host, w),
                          site_paths(clean, config.session_gap, scenario.site_host))
    return report, hits, verdicts, views


# -- acceptance reporting ------------------------------------------------------

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, title = mark.args
    if report.when == "setup" and report.skipped:
        _CRITERIA[n] = ("SKIP", title)
    elif report.when == "call":
        _CRITERIA[n] = ("PASS" if report.passed else "FAIL", title)
    elif report.failed:
        _CRITERIA[n] = ("FAIL", title)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        status, title = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:>2}: {status}  {title}")
