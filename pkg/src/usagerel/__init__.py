"""Time-windowed relevance mining over Linked Data usage logs."""

from .clf import ParseError, ParseReport, parse_line, parse_stream, serialize_entry
from .curation import (
    BotVerdict,
    CurationConfig,
    classify_access,
    curate,
    detect_bots,
    filter_status,
    strip_hosts,
)
from .footprint import (
    UsageGraph,
    build_site_graph,
    build_wtf,
    extract_paths,
    fan,
    max_depth,
    weight,
)
from .kandinsky import DIFF_KG, KG, color_for_weight, emit_dot
from .model import EXTERNAL, AccessType, Hit, LogEntry, TimeWindow, normalize_resource
from .relevance import DiffGraph, RelevanceScore, diff, rank, rank_diff, score
from .store import EventStore, HitStats

__version__ = "0.1.0"
