"""Status filtering, bot detection and access-type classification."""

from __future__ import annotations

import configparser
import enum
from collections import defaultdict, deque
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .model import EXTERNAL, AccessType, Hit, LogEntry, normalize_resource

DEFAULT_UA_PATTERNS = ("bot", "spider", "crawl", "slurp", "archiver", "wget", "curl", "libwww")
DEFAULT_REWRITE_RULES = (("/resource/", "/data/"), ("/resource/", "/page/"))
DEFAULT_EXTENSIONS = (".rdf", ".html", ".xml", ".json", ".ttl", ".n3")


class BotReason(str, enum.Enum):
    USER_AGENT_PATTERN = "UserAgentPattern"
    ROBOTS_TXT_FETCH = "RobotsTxtFetch"
    RATE_THRESHOLD = "RateThreshold"


@dataclass(frozen=True)
class BotVerdict:
    host_hash: str
    reasons: frozenset
    evidence: Tuple[Tuple[BotReason, str], ...] = ()

    def __post_init__(self):
        if not self.reasons:
            raise ValueError("a bot verdict needs at least one reason")


@dataclass(frozen=True)
class CurationConfig:
    ua_patterns: Tuple[str, ...] = DEFAULT_UA_PATTERNS
    rate_hits: int = 1000
    rate_seconds: int = 3600
    semantic_pair_horizon: int = 10
    sparql_endpoints: Tuple[str, ...] = ("/sparql",)
    search_paths: Tuple[str, ...] = ()
    site_host: Optional[str] = None
    rewrite_rules: Tuple[Tuple[str, str], ...] = DEFAULT_REWRITE_RULES
    representation_extensions: Tuple[str, ...] = DEFAULT_EXTENSIONS
    session_gap: int = 1800

    def __post_init__(self):
        if self.rate_hits < 1 or self.rate_seconds < 1:
            raise ValueError("rate limit needs hits >= 1 and seconds >= 1")
        if self.semantic_pair_horizon < 1:
            raise ValueError("semantic_pair_horizon must be >= 1")
        if self.session_gap < 1:
            raise ValueError("session_gap must be >= 1")

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "CurationConfig":
        parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
        return cls.from_parser(parser)

    @classmethod
    def from_parser(cls, parser: configparser.ConfigParser) -> "CurationConfig":
        if not parser.has_section("curation"):
            return cls()
        sec = parser["curation"]
        kwargs: dict = {}
        for key in ("ua_patterns", "sparql_endpoints", "search_paths", "representation_extensions"):
            if key in sec:
                kwargs[key] = _split_list(sec[key])
        for key in ("rate_hits", "rate_seconds", "semantic_pair_horizon", "session_gap"):
            if key in sec:
                kwargs[key] = sec.getint(key)
        if "site_host" in sec:
            kwargs["site_host"] = sec["site_host"].strip() or None
        if "rewrite_rules" in sec:
            rules = []
            for item in _split_list(sec["rewrite_rules"]):
                src, sep, dst = item.partition("->")
                if not sep:
                    raise ValueError(f"rewrite rule needs 'from -> to': {item!r}")
                rules.append((src.strip(), dst.strip()))
            kwargs["rewrite_rules"] = tuple(rules)
        unknown = set(sec) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown [curation] keys: {sorted(unknown)}")
        return cls(**kwargs)


def _split_list(text: str) -> Tuple[str, ...]:
    items = []
    for line in text.replace(",", "\n").splitlines():
        line = line.strip()
        if line:
            items.append(line)
    return tuple(items)


@dataclass(frozen=True)
class ClassifiedEntry:
    entry: LogEntry
    access_type: AccessType
    # line_no of the partner hit for Semantic pairs
    pair_line: Optional[int] = None


def filter_status(entries: Iterable[LogEntry]) -> List[LogEntry]:
    return [e for e in entries if 200 <= e.status <= 399]


def _target_key(entry: LogEntry, site_host: Optional[str]):
    return normalize_resource(entry.resource_raw, site_host)


def _by_host(entries: Iterable) -> Dict[str, list]:
    groups: Dict[str, list] = defaultdict(list)
    for e in entries:
        groups[e.host_hash].append(e)
    return groups


def _max_hits_in_span(times: Sequence[float], span: float) -> Tuple[int, float]:
    """Largest number of hits whose timestamps fit in a half-open ``span``."""
    best, best_start = 0, 0.0
    window: deque = deque()
    for t in times:
        window.append(t)
        while t - window[0] >= span:
            window.popleft()
        if len(window) > best:
            best, best_start = len(window), window[0]
    return best, best_start


def detect_bots(entries: Iterable[LogEntry], config: CurationConfig = CurationConfig()) -> List[BotVerdict]:
    """Flag hosts by user agent, robots.txt access, or hit rate.

    The rate rule flags a host when more than ``rate_hits`` of its hits fall
    within some span of ``rate_seconds`` (timestamps t with t - t0 < S).
    Verdicts come back sorted by host hash.
    """
    patterns = [p.lower() for p in config.ua_patterns if p]
    verdicts = []
    for host, hits in sorted(_by_host(entries).items()):
        evidence: Dict[BotReason, str] = {}
        for e in hits:
            ua = e.user_agent.lower()
            matched = next((p for p in patterns if p in ua), None)
            if matched is not None:
                evidence[BotReason.USER_AGENT_PATTERN] = (
                    f"user agent {e.user_agent!r} contains {matched!r}"
                )
                break
        for e in hits:
            if _target_key(e, config.site_host) == "/robots.txt":
                evidence[BotReason.ROBOTS_TXT_FETCH] = f"requested /robots.txt at line {e.line_no}"
                break
        times = sorted(e.timestamp.timestamp() for e in hits)
        if len(times) > config.rate_hits:
            count, _ = _max_hits_in_span(times, config.rate_seconds)
            if count > config.rate_hits:
                evidence[BotReason.RATE_THRESHOLD] = (
                    f"{count} hits within {config.rate_seconds}s (limit {config.rate_hits})"
                )
        if evidence:
            verdicts.append(
                BotVerdict(
                    host,
                    frozenset(evidence),
                    tuple(sorted(evidence.items(), key=lambda kv: kv[0].value)),
                )
            )
    return verdicts


def strip_hosts(entries: Iterable[LogEntry], verdicts: Iterable[BotVerdict]) -> List[LogEntry]:
    flagged = {v.host_hash for v in verdicts}
    return [e for e in entries if e.host_hash not in flagged]


def representations(resource: str, config: CurationConfig) -> List[str]:
    """Candidate representation paths for a plain resource key."""
    out = []
    for src, dst in config.rewrite_rules:
        if resource.startswith(src):
            rewritten = dst + resource[len(src):]
            out.append(rewritten)
            out.extend(rewritten + ext for ext in config.representation_extensions)
    out.extend(resource + ext for ext in config.representation_extensions)
    return out


def _under(path: str, prefixes: Iterable[str]) -> bool:
    for prefix in prefixes:
        base = prefix.rstrip("/") or "/"
        if path == base or path.startswith(base.rstrip("/") + "/"):
            return True
    return False


def classify_access(
    entries: Iterable[LogEntry], config: CurationConfig = CurationConfig()
) -> List[ClassifiedEntry]:
    """Assign one AccessType to every entry; output keeps input order.

    Per host, each 303 hit on R pairs with the earliest later 200 hit, within
    the pair horizon, on a representation of R. When several pending 303s
    accept the same 200 hit the oldest wins. Paired hits are Semantic; the
    rest fall through to Sparql, Search, or PlainHtml by path prefix.
    """
    entries = list(entries)
    keys = [_target_key(e, config.site_host) for e in entries]
    partner: Dict[int, int] = {}

    order_by_host: Dict[str, List[int]] = defaultdict(list)
    for i, e in enumerate(entries):
        order_by_host[e.host_hash].append(i)

    for idxs in order_by_host.values():
        idxs.sort(key=lambda i: (entries[i].timestamp, i))
        # pending: representation path -> FIFO of 303 indices
        pending: Dict[str, deque] = defaultdict(deque)
        for i in idxs:
            e, key = entries[i], keys[i]
            now = e.timestamp.timestamp()
            if key is EXTERNAL:
                continue
            if e.status == 200:
                queue = pending.get(key)
                while queue:
                    j = queue.popleft()
                    if j in partner:
                        continue
                    if now - entries[j].timestamp.timestamp() > config.semantic_pair_horizon:
                        continue
                    partner[i], partner[j] = j, i
                    break
            elif e.status == 303:
                for rep in dict.fromkeys(representations(key, config)):
                    pending[rep].append(i)

    out = []
    for i, e in enumerate(entries):
        key = keys[i]
        if i in partner:
            out.append(ClassifiedEntry(e, AccessType.SEMANTIC, entries[partner[i]].line_no))
        elif key is not EXTERNAL and _under(key, config.sparql_endpoints):
            out.append(ClassifiedEntry(e, AccessType.SPARQL))
        elif key is not EXTERNAL and config.search_paths and _under(key, config.search_paths):
            out.append(ClassifiedEntry(e, AccessType.SEARCH))
        else:
            out.append(ClassifiedEntry(e, AccessType.PLAIN_HTML))
    return out


def curate(
    entries: Iterable[LogEntry], config: CurationConfig = CurationConfig()
) -> Tuple[List[Hit], List[BotVerdict]]:
    """Run the full cleaning pass, tagging rather than discarding.

    Bot detection sees every parsed hit (a 404 on /robots.txt still marks
    a crawler). Error-status hits are kept as dropped so that hit totals
    stay computable; successful hits get an access type.
    """
    entries = list(entries)
    verdicts = detect_bots(entries, config)
    reasons = {v.host_hash: tuple(sorted(r.value for r in v.reasons)) for v in verdicts}
    classified = iter(classify_access(filter_status(entries), config))
    hits = []
    for e in entries:
        bot = reasons.get(e.host_hash, ())
        if 200 <= e.status <= 399:
            c = next(classified)
            hits.append(Hit(e, c.access_type, False, bot, c.pair_line))
        else:
            hits.append(Hit(e, None, True, bot))
    return hits, verdicts
