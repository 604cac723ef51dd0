"""DOT output for Kandinsky graphs and DIFF Kandinsky graphs.

Edges are coloured by weight bucket; node placement is left to Graphviz
(``circo``). Render a file with ``circo -Tsvg kg.dot > kg.svg``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Tuple, Union

from .footprint import Edge, UsageGraph
from .relevance import DiffGraph

LABEL_LIMIT = 40
MAX_PENWIDTH = 8


@dataclass(frozen=True)
class ColorScheme:
    variant: str
    # (inclusive upper bound, colour); the last bound is infinite
    thresholds: Tuple[Tuple[float, str], ...]


KG = ColorScheme(
    "KG", ((2, "gray"), (4, "black"), (10, "indigo"), (20, "green"), (math.inf, "red"))
)
DIFF_KG = ColorScheme(
    "DiffKG", ((1, "gray"), (2, "black"), (5, "indigo"), (10, "green"), (math.inf, "red"))
)


def color_for_weight(w: int, scheme: ColorScheme = KG) -> str:
    if w < 1:
        raise ValueError(f"edge weight must be >= 1, got {w}")
    for bound, color in scheme.thresholds:
        if w <= bound:
            return color
    raise AssertionError("threshold list must end with an infinite bound")


def penwidth(w: int) -> int:
    # 1 + floor(log2 w), exact for integers
    return min(MAX_PENWIDTH, int(w).bit_length())


def _escape(text: str) -> str:
    out = []
    for ch in text:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif 32 <= ord(ch) < 127:
            out.append(ch)
        else:
            out.append(f"&#{ord(ch)};")
    return "".join(out)


def _label(key: str) -> str:
    if len(key) <= LABEL_LIMIT:
        return key
    keep = LABEL_LIMIT - 3
    head = (keep + 1) // 2
    return key[:head] + "..." + key[len(key) - (keep - head):]


def emit_dot(
    graph: Union[UsageGraph, DiffGraph],
    scheme: ColorScheme = None,
    name: str = None,
) -> str:
    """Render a graph as a directed DOT document, byte-deterministic.

    Nodes are listed in key order, then edges in (from, to) order, each with
    its scheme colour, a weight label and a pen width of 1 + floor(log2 w)
    capped at 8.
    """
    if scheme is None:
        scheme = DIFF_KG if isinstance(graph, DiffGraph) else KG
    edges: Mapping[Edge, int] = graph.edges
    nodes: Iterable[str] = graph.nodes
    name = name or scheme.variant
    lines = [
        f'digraph "{_escape(name)}" {{',
        "  graph [layout=circo];",
        "  node [shape=ellipse, fontsize=10];",
        "  edge [arrowsize=0.6];",
    ]
    for n in sorted(nodes):
        lines.append(f'  "{_escape(n)}" [label="{_escape(_label(n))}"];')
    for (a, b), w in sorted(edges.items()):
        lines.append(
            f'  "{_escape(a)}" -> "{_escape(b)}" '
            f'[color={color_for_weight(w, scheme)}, label="{w}", penwidth={penwidth(w)}];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
