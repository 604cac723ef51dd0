"""Web Travel Footprints, site usage graphs, and the fan/weight/depth metrics."""

from __future__ import annotations

import csv
from collections import Counter, defaultdict
from dataclasses import dataclass
from datetime import datetime
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from .model import EXTERNAL, LogEntry, ResourceKey, TimeWindow, normalize_resource

DEFAULT_SESSION_GAP = 1800
SITE_WIDE = None

Edge = Tuple[ResourceKey, ResourceKey]


class UnknownNodeError(KeyError):
    pass


@dataclass(frozen=True)
class UsageGraph:
    """Weighted referrer -> resource graph over one window.

    ``host`` is the host hash for a single footprint and None when the graph
    aggregates every host (site-wide).
    """

    window: Optional[TimeWindow]
    nodes: FrozenSet[ResourceKey]
    edges: Mapping[Edge, int]
    host: Optional[str] = SITE_WIDE

    def __post_init__(self):
        for (a, b), w in self.edges.items():
            if w < 1:
                raise ValueError(f"edge {a}->{b} has weight {w}")
            if a not in self.nodes or b not in self.nodes:
                raise ValueError(f"edge {a}->{b} has an endpoint outside the node set")

    @property
    def total_weight(self) -> int:
        return sum(self.edges.values())


@dataclass(frozen=True)
class Path:
    nodes: Tuple[ResourceKey, ...]
    host: str
    start: datetime
    end: datetime

    def __len__(self) -> int:
        return len(self.nodes)


def _transition(entry: LogEntry, site_host: Optional[str]):
    """(referrer key or None, target key) for one hit; target may be EXTERNAL."""
    target = normalize_resource(entry.resource_raw, site_host)
    ref = None
    if entry.referrer:
        r = normalize_resource(entry.referrer, site_host)
        if r is not EXTERNAL:
            ref = r
    return ref, target


def _accumulate(entries: Iterable[LogEntry], site_host, nodes: set, edges: Counter) -> None:
    for e in entries:
        ref, target = _transition(e, site_host)
        if target is EXTERNAL:
            continue
        nodes.add(target)
        if ref is not None and ref != target:
            nodes.add(ref)
            edges[(ref, target)] += 1


def build_wtf(
    entries: Sequence[LogEntry],
    site_host: Optional[str] = None,
    window: Optional[TimeWindow] = None,
) -> UsageGraph:
    """Footprint of a single host: one edge increment per internal referrer hop."""
    hosts = {e.host_hash for e in entries}
    if len(hosts) > 1:
        raise ValueError(f"build_wtf needs one host, got {len(hosts)}")
    nodes: set = set()
    edges: Counter = Counter()
    _accumulate(entries, site_host, nodes, edges)
    return UsageGraph(window, frozenset(nodes), dict(edges), next(iter(hosts), None))


def merge_graphs(graphs: Iterable[UsageGraph], window: Optional[TimeWindow] = None) -> UsageGraph:
    nodes: set = set()
    edges: Counter = Counter()
    for g in graphs:
        nodes |= g.nodes
        edges.update(g.edges)
    return UsageGraph(window, frozenset(nodes), dict(edges), SITE_WIDE)


def group_by_host(entries: Iterable[LogEntry]) -> Dict[str, List[LogEntry]]:
    groups: Dict[str, List[LogEntry]] = defaultdict(list)
    for e in entries:
        groups[e.host_hash].append(e)
    return groups


def build_site_graph(
    entries: Iterable[LogEntry],
    site_host: Optional[str] = None,
    window: Optional[TimeWindow] = None,
) -> UsageGraph:
    """Site-wide graph: the edge-wise sum of every host's footprint."""
    return merge_graphs(
        (build_wtf(hits, site_host, window) for hits in group_by_host(entries).values()),
        window,
    )


def _require(graph: UsageGraph, node: str) -> None:
    if node not in graph.nodes:
        raise UnknownNodeError(node)


def fan(graph: UsageGraph, node: str) -> int:
    _require(graph, node)
    return len({b for (a, b) in graph.edges if a == node})


def weight(graph: UsageGraph, node: str) -> int:
    _require(graph, node)
    return sum(w for (a, b), w in graph.edges.items() if node in (a, b))


def extract_paths(
    entries: Sequence[LogEntry],
    session_gap: int = DEFAULT_SESSION_GAP,
    site_host: Optional[str] = None,
) -> List[Path]:
    """Chain one host's hits into browsing paths.

    A hit extends the open path whose tip equals its internal referrer and
    whose last hit is at most ``session_gap`` seconds old; among several
    candidates the most recently active one wins. Otherwise the hit starts
    a new path. Hits on external targets are ignored; every other hit lands
    in exactly one path.
    """
    hosts = {e.host_hash for e in entries}
    if len(hosts) > 1:
        raise ValueError(f"extract_paths needs one host, got {len(hosts)}")
    ordered = sorted(enumerate(entries), key=lambda p: (p[1].timestamp, p[0]))
    # each open path: [nodes list, start, last]
    paths: List[list] = []
    tips: Dict[str, List[int]] = defaultdict(list)
    for _, e in ordered:
        ref, target = _transition(e, site_host)
        if target is EXTERNAL:
            continue
        chosen = None
        if ref is not None:
            best_time = None
            for idx in tips.get(ref, ()):
                p = paths[idx]
                if (e.timestamp - p[2]).total_seconds() <= session_gap:
                    if best_time is None or p[2] > best_time:
                        chosen, best_time = idx, p[2]
        if chosen is None:
            paths.append([[target], e.timestamp, e.timestamp])
            tips[target].append(len(paths) - 1)
        else:
            p = paths[chosen]
            tips[p[0][-1]].remove(chosen)
            p[0].append(target)
            p[2] = e.timestamp
            tips[target].append(chosen)
    host = next(iter(hosts), "")
    return [Path(tuple(n), host, start, end) for n, start, end in paths]


def site_paths(
    entries: Iterable[LogEntry],
    session_gap: int = DEFAULT_SESSION_GAP,
    site_host: Optional[str] = None,
) -> List[Path]:
    out: List[Path] = []
    for host, hits in sorted(group_by_host(entries).items()):
        out.extend(extract_paths(hits, session_gap, site_host))
    return out


def depth_index(paths: Iterable[Path]) -> Dict[str, int]:
    """Longest path length containing each node."""
    depth: Dict[str, int] = {}
    for p in paths:
        n = len(p.nodes)
        for node in p.nodes:
            if depth.get(node, 0) < n:
                depth[node] = n
    return depth


def max_depth(paths: Iterable[Path], node: str) -> int:
    best = 0
    for p in paths:
        if node in p.nodes and len(p.nodes) > best:
            best = len(p.nodes)
    if not best:
        raise UnknownNodeError(node)
    return best


def write_edge_list(graph: UsageGraph, out, delimiter: str = "\t") -> None:
    writer = csv.writer(out, delimiter=delimiter, lineterminator="\n")
    writer.writerow(["from", "to", "weight"])
    for (a, b), w in sorted(graph.edges.items()):
        writer.writerow([a, b, w])
