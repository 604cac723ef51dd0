"""Strength of relevance, window rankings and DIFF graphs."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .footprint import Edge, Path, UnknownNodeError, UsageGraph, depth_index
from .model import ResourceKey, TimeWindow


@dataclass(frozen=True)
class RelevanceScore:
    resource: ResourceKey
    weight_total: int
    fan: int
    depth_max: int

    def sort_key(self):
        # weight, then fan, then depth, all descending; then name ascending
        return (-self.weight_total, -self.fan, -self.depth_max, self.resource)


@dataclass(frozen=True)
class DiffGraph:
    window_old: Optional[TimeWindow]
    window_new: Optional[TimeWindow]
    edges: Mapping[Edge, int]

    def __post_init__(self):
        for e, w in self.edges.items():
            if w < 1:
                raise ValueError(f"diff edge {e} has weight {w}")

    @property
    def nodes(self) -> frozenset:
        return frozenset(n for e in self.edges for n in e)


def _scores(edges: Mapping[Edge, int], nodes: Iterable[str], depth: Mapping[str, int]) -> List[RelevanceScore]:
    fan_sets: Dict[str, set] = {n: set() for n in nodes}
    incident: Dict[str, int] = dict.fromkeys(fan_sets, 0)
    for (a, b), w in edges.items():
        fan_sets[a].add(b)
        incident[a] += w
        incident[b] += w
    return [
        RelevanceScore(n, incident[n], len(fan_sets[n]), depth.get(n, 1))
        for n in fan_sets
    ]


def score(graph: UsageGraph, paths: Sequence[Path], node: str) -> RelevanceScore:
    if node not in graph.nodes:
        raise UnknownNodeError(node)
    incident = 0
    out = set()
    for (a, b), w in graph.edges.items():
        if a == node:
            out.add(b)
            incident += w
        elif b == node:
            incident += w
    depth = max((len(p.nodes) for p in paths if node in p.nodes), default=1)
    return RelevanceScore(node, incident, len(out), depth)


def rank(graph: UsageGraph, paths: Sequence[Path], k: int) -> List[Tuple[ResourceKey, RelevanceScore]]:
    """Top ``k`` resources by (weight_total, fan, depth_max) descending, name ascending."""
    if k < 1:
        raise ValueError("k must be >= 1")
    ranked = sorted(_scores(graph.edges, graph.nodes, depth_index(paths)), key=RelevanceScore.sort_key)
    return [(s.resource, s) for s in ranked[:k]]


def diff(graph_old: UsageGraph, graph_new: UsageGraph) -> DiffGraph:
    """Division-based change between two windows.

    Each edge of the new graph gets floor(new / max(old, 1)); edges whose
    quotient is 0 (a sharp drop) and edges only in the old graph are dropped.
    """
    edges = {}
    for e, w2 in graph_new.edges.items():
        q = w2 // max(graph_old.edges.get(e, 0), 1)
        if q > 0:
            edges[e] = q
    return DiffGraph(graph_old.window, graph_new.window, edges)


def rank_diff(diff_graph: DiffGraph, k: int) -> List[Tuple[ResourceKey, RelevanceScore]]:
    if k < 1:
        raise ValueError("k must be >= 1")
    ranked = sorted(_scores(diff_graph.edges, diff_graph.nodes, {}), key=RelevanceScore.sort_key)
    return [(s.resource, s) for s in ranked[:k]]


def write_ranking(ranking: Sequence[Tuple[ResourceKey, RelevanceScore]], out, delimiter: str = "\t") -> None:
    writer = csv.writer(out, delimiter=delimiter, lineterminator="\n")
    writer.writerow(["rank", "resource", "weight_total", "fan", "depth_max"])
    for i, (key, s) in enumerate(ranking, start=1):
        writer.writerow([i, key, s.weight_total, s.fan, s.depth_max])
