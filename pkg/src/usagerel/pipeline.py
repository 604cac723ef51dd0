"""Glue between the store and the graph/relevance modules."""

from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Collection, List, Optional, Tuple, Union

from .clf import ParseReport, parse_stream, read_log_lines
from .curation import CurationConfig, curate
from .footprint import Path as TravelPath
from .footprint import UsageGraph, build_site_graph, site_paths
from .model import AccessType, Hit, LogEntry, TimeWindow
from .store import EventStore, IngestSummary


def file_id(path: Union[str, Path]) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()[:16]


def load_file(path: Union[str, Path]) -> Tuple[List[LogEntry], ParseReport]:
    return parse_stream(read_log_lines(path))


def ingest_files(
    paths: List[Union[str, Path]],
    store: EventStore,
    config: CurationConfig = CurationConfig(),
) -> List[Tuple[Path, ParseReport, IngestSummary]]:
    """Parse, curate and store several files; bots are detected across all of them."""
    parsed = []
    for p in paths:
        entries, report = load_file(p)
        parsed.append((Path(p), file_id(p), entries, report))
    all_entries = [e for _, _, entries, _ in parsed for e in entries]
    hits, _ = curate(all_entries, config)
    results = []
    offset = 0
    for p, fid, entries, report in parsed:
        batch: List[Hit] = hits[offset: offset + len(entries)]
        offset += len(entries)
        summary = store.ingest(batch, fid, config.site_host)
        results.append((p, report, summary))
    return results


def window_view(
    store: EventStore,
    window: TimeWindow,
    config: CurationConfig = CurationConfig(),
    keep_bots: bool = False,
    access_types: Optional[Collection[AccessType]] = None,
) -> Tuple[UsageGraph, List[TravelPath]]:
    """Site graph and browsing paths for one window of a store."""
    entries = store.entries(window, include_bots=keep_bots, access_types=access_types)
    site = config.site_host if config.site_host is not None else store.site_host
    graph = build_site_graph(entries, site, window)
    paths = site_paths(entries, config.session_gap, site)
    return graph, paths
