"""Synthetic extended-CLF corpora with planted ground truth.

The generator keeps its own tallies while emitting (edges, depths, bot
reasons, semantic pairs, hit counts) and derives the expected rankings from
them. None of this goes through the parser or the analysis modules, so a
corpus and its ``GroundTruth`` can be used to check the pipeline end to end.
"""

from __future__ import annotations

import configparser
import json
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .model import UTC, TimeWindow, parse_window

MONTHS = ("Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec")
COUNTRIES = ("US", "DE", "GB", "IE", "AU", "CN", "--")
OFFSETS = (0, 0, 0, 60, 120, -300, 600)  # minutes east of UTC
HUMAN_AGENTS = (
    "Mozilla/5.0 (Windows; U; Windows NT 6.1; en-US) AppleWebKit/533.4 Safari/533.4",
    "Mozilla/5.0 (X11; U; Linux i686; en-US; rv:1.9.2.3) Gecko/20100401 Firefox/3.6.3",
    "Mozilla/5.0 (Macintosh; U; Intel Mac OS X 10_6_3; en-us) Safari/531.22.7",
    "Opera/9.80 (Windows NT 5.1; U; en) Presto/2.5.24 Version/10.53",
)
AGENT_UA = "Jena/2.6.2 (LinkedData client)"
BOT_AGENTS = {
    "agent": "Googlebot/2.1 (+http://www.google.com/bot.html)",
    "robots": "Mozilla/5.0 (compatible; SiteFetcher/1.0)",
    "rate": "Mozilla/5.0 (X11; Linux x86_64) Gecko/20100101",
}
BOT_REASONS = {"agent": "UserAgentPattern", "robots": "RobotsTxtFetch", "rate": "RateThreshold"}
SEARCH_REFERRER = "http://www.google.com/search?q=semantic+web+dog+food"


def www2010_windows() -> Tuple[TimeWindow, ...]:
    """The four conference windows, as calendar-day ranges (end day inclusive)."""
    def days(label, a, b):
        return TimeWindow(
            datetime(*a, tzinfo=UTC), datetime(*b, tzinfo=UTC) + timedelta(days=1), label
        )

    return (
        days("before-submission", (2009, 10, 25), (2009, 10, 31)),
        days("before", (2010, 4, 18), (2010, 4, 24)),
        days("during", (2010, 4, 25), (2010, 5, 1)),
        days("after", (2010, 5, 2), (2010, 5, 8)),
    )


@dataclass(frozen=True)
class Scenario:
    seed: int = 0
    site_host: str = "data.semanticweb.org"
    windows: Tuple[TimeWindow, ...] = field(default_factory=www2010_windows)
    event_resource: str = "/conference/www/2009"
    event_window: Optional[str] = "during"
    burst_multiplier: int = 10
    event_sessions: int = 250  # burst sessions = event_sessions * burst_multiplier
    sessions_per_window: int = 5500
    background_hosts: int = 300
    max_walk: int = 8
    bot_hosts: int = 3
    bot_kinds: Tuple[str, ...] = ("rate", "agent", "robots")
    bot_hits: int = 5000
    bot_span: int = 600  # seconds over which a "rate" bot fires all its hits
    bot_share: Optional[float] = None
    # (nodes, repetitions, window label or None for the first window)
    trail_specs: Tuple[Tuple[Tuple[str, ...], int, Optional[str]], ...] = ()
    semantic_pair_count: int = 200
    semantic_decoy_count: int = 200
    sparql_count: int = 400
    agent_hosts: int = 20
    error_hits: int = 200
    malformed_lines: int = 0
    rate_hits: int = 1000
    rate_seconds: int = 3600
    pair_horizon: int = 10

    def __post_init__(self):
        if not self.windows:
            raise ValueError("scenario needs at least one window")
        labels = [w.label for w in self.windows]
        if None in labels or len(set(labels)) != len(labels):
            raise ValueError("windows need distinct labels")
        if self.event_window is not None and self.event_window not in labels:
            raise ValueError(f"event window {self.event_window!r} is not a scenario window")
        if self.burst_multiplier < 1:
            raise ValueError("burst_multiplier must be >= 1")
        if self.background_hosts < 1 and (self.sessions_per_window or self.trail_specs):
            raise ValueError("sessions need at least one background host")
        for name in ("sessions_per_window", "event_sessions", "bot_hosts", "bot_hits",
                     "semantic_pair_count", "semantic_decoy_count", "sparql_count",
                     "error_hits", "malformed_lines"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.max_walk < 1 or self.bot_span < 1:
            raise ValueError("max_walk and bot_span must be >= 1")
        if (self.semantic_pair_count or self.semantic_decoy_count or self.sparql_count) and self.agent_hosts < 1:
            raise ValueError("semantic/SPARQL traffic needs agent_hosts >= 1")
        for kind in self.bot_kinds:
            if kind not in BOT_AGENTS:
                raise ValueError(f"unknown bot kind {kind!r}")
        if self.bot_hosts and not self.bot_kinds:
            raise ValueError("bot_kinds must be non-empty when bot_hosts > 0")
        if self.bot_share is not None and not 0 <= self.bot_share < 1:
            raise ValueError("bot_share must be in [0, 1)")
        for nodes, reps, label in self.trail_specs:
            if not nodes or reps < 1:
                raise ValueError("trail needs nodes and repetitions >= 1")
            if any(a == b for a, b in zip(nodes, nodes[1:])):
                raise ValueError("trail must not repeat a node back to back")
            if label is not None and label not in labels:
                raise ValueError(f"trail window {label!r} is not a scenario window")

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "Scenario":
        parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        parser.optionxform = str
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
        return cls.from_parser(parser)

    @classmethod
    def from_parser(cls, parser: configparser.ConfigParser) -> "Scenario":
        kwargs: dict = {}
        if parser.has_section("scenario"):
            sec = parser["scenario"]
            for key, value in sec.items():
                if key not in cls.__dataclass_fields__ or key in ("windows", "trail_specs"):
                    raise ValueError(f"unknown [scenario] key {key!r}")
                if key in ("site_host", "event_resource"):
                    kwargs[key] = value.strip()
                elif key == "event_window":
                    kwargs[key] = value.strip() or None
                elif key == "bot_kinds":
                    kwargs[key] = tuple(v.strip() for v in value.split(",") if v.strip())
                elif key == "bot_share":
                    kwargs[key] = float(value) if value.strip() else None
                else:
                    kwargs[key] = sec.getint(key)
        if parser.has_section("windows"):
            kwargs["windows"] = tuple(
                parse_window(f"{label}|{spec}") for label, spec in parser["windows"].items()
            )
        trails = []
        for name in parser.sections():
            if name.startswith("trail"):
                sec = parser[name]
                nodes = tuple(n.strip() for n in sec["nodes"].split(",") if n.strip())
                trails.append((nodes, sec.getint("repetitions", 1), sec.get("window") or None))
        if trails:
            kwargs["trail_specs"] = tuple(trails)
        return cls(**kwargs)


@dataclass
class GroundTruth:
    lines: int = 0
    malformed_line_numbers: List[int] = field(default_factory=list)
    window_entries: Dict[str, int] = field(default_factory=dict)
    day_entries: Dict[str, int] = field(default_factory=dict)
    edges: Dict[str, Dict[Tuple[str, str], int]] = field(default_factory=dict)
    nodes: Dict[str, List[str]] = field(default_factory=dict)
    depth: Dict[str, Dict[str, int]] = field(default_factory=dict)
    ranking: Dict[str, List[str]] = field(default_factory=dict)
    diff_ranking: Dict[str, List[str]] = field(default_factory=dict)
    bots: Dict[str, List[str]] = field(default_factory=dict)
    semantic_pairs: int = 0
    semantic_entries: int = 0
    sparql_entries: int = 0
    dropped_entries: int = 0
    top_resource: Optional[str] = None
    top_resource_hits_all: int = 0
    top_resource_hits_clean: int = 0

    @property
    def rank1(self) -> Dict[str, Optional[str]]:
        return {label: (r[0] if r else None) for label, r in self.ranking.items()}

    def to_json(self) -> str:
        data = dict(self.__dict__)
        data["edges"] = {
            label: [[a, b, w] for (a, b), w in sorted(e.items())]
            for label, e in self.edges.items()
        }
        return json.dumps(data, indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "GroundTruth":
        data = json.loads(text)
        data["edges"] = {
            label: {(a, b): w for a, b, w in rows} for label, rows in data["edges"].items()
        }
        return cls(**data)


# -- site model ---------------------------------------------------------------

def _site_links(rng: random.Random, event_resource: str):
    """Fixed link structure with popularity weights for walk transitions."""
    hubs = {
        "/index.html": 30,
        "/conference/iswc/2009": 25,
        "/papers": 20,
        "/person": 14,
        "/organization": 6,
        "/conference/eswc/2007": 4,
        "/conference/www/2010": 1,
    }
    hubs.setdefault(event_resource, 2)
    people = [f"/person/person-{i}" for i in range(60)]
    papers = [f"/papers/paper-{i}" for i in range(80)]
    orgs = [f"/organization/org-{i}" for i in range(20)]
    conf_papers = {
        hub: [f"{hub}/paper/{i}" for i in range(15)]
        for hub in hubs if hub.startswith("/conference/")
    }
    links: Dict[str, List[Tuple[str, int]]] = defaultdict(list)
    for hub, w in hubs.items():
        if hub != "/index.html":
            links["/index.html"].append((hub, w))
            links[hub].append(("/index.html", 3))
    links["/papers"] += [(p, 1) for p in papers]
    links["/person"] += [(p, 1) for p in people]
    links["/organization"] += [(o, 1) for o in orgs]
    for hub, leaves in conf_papers.items():
        links[hub] += [(leaf, 2) for leaf in leaves] + [("/papers", 4)]
        for leaf in leaves:
            links[leaf] += [(hub, 3)] + [(p, 1) for p in rng.sample(people, 3)]
    for paper in papers:
        links[paper] += [("/papers", 2)] + [(p, 1) for p in rng.sample(people, 3)]
    for person in people:
        links[person] += [("/person", 2), (rng.choice(orgs), 1)] + [
            (p, 1) for p in rng.sample(papers, 2)
        ]
    for org in orgs:
        links[org] += [("/organization", 2)] + [(p, 1) for p in rng.sample(people, 3)]
    starts = list(hubs.items())
    return dict(links), starts, conf_papers.get(event_resource, [])


def _pick(rng: random.Random, weighted: Sequence[Tuple[str, int]]) -> str:
    total = sum(w for _, w in weighted)
    x = rng.randrange(total)
    for item, w in weighted:
        x -= w
        if x < 0:
            return item
    raise AssertionError("unreachable")


def _walk(rng, links, start: str, max_walk: int, extra_min: int = 0) -> List[str]:
    walk = [start]
    while len(walk) < max_walk:
        if len(walk) > extra_min and rng.random() >= 0.72:
            break
        options = [(n, w) for n, w in links.get(walk[-1], ()) if n != walk[-1]]
        if not options:
            break
        walk.append(_pick(rng, options))
    return walk


# -- emission -------------------------------------------------------------------

@dataclass
class _Host:
    token: str
    country: str
    offset: int
    agent: str


@dataclass(order=True)
class _Event:
    ts: int
    seq: int
    host: _Host = field(compare=False)
    target: str = field(compare=False)
    status: int = field(compare=False)
    referrer: Optional[str] = field(compare=False)
    size: Optional[int] = field(compare=False)
    method: str = field(compare=False, default="GET")
    agent: Optional[str] = field(compare=False, default=None)


def _format_line(ev: _Event) -> str:
    local = datetime.fromtimestamp(ev.ts, timezone(timedelta(minutes=ev.host.offset)))
    sign = "+" if ev.host.offset >= 0 else "-"
    off = abs(ev.host.offset)
    stamp = (
        f"{local.day:02d}/{MONTHS[local.month - 1]}/{local.year}:"
        f"{local.hour:02d}:{local.minute:02d}:{local.second:02d} {sign}{off // 60:02d}{off % 60:02d}"
    )
    size = "-" if ev.size is None else str(ev.size)
    ref = ev.referrer if ev.referrer is not None else "-"
    agent = ev.agent if ev.agent is not None else ev.host.agent
    return (
        f'0.0.0.0 - - [{stamp}] "{ev.method} {ev.target} HTTP/1.1" {ev.status} {size} '
        f'"{ref}" "{agent}" "{ev.host.country}" "{ev.host.token}"'
    )


class _Generator:
    def __init__(self, sc: Scenario):
        self.sc = sc
        self.rng = random.Random(sc.seed)
        self.events: List[_Event] = []
        self.seq = 0
        self.tokens: set = set()
        self.gt = GroundTruth()
        self.edges = {w.label: Counter() for w in sc.windows}
        self.nodes = {w.label: set() for w in sc.windows}
        self.depth = {w.label: {} for w in sc.windows}
        self.clean_hits: Counter = Counter()
        self.bot_hits: Counter = Counter()

    def host(self, agent: Optional[str] = None) -> _Host:
        while True:
            token = f"{self.rng.getrandbits(40):010x}"
            if token not in self.tokens:
                self.tokens.add(token)
                break
        return _Host(
            token,
            self.rng.choice(COUNTRIES),
            self.rng.choice(OFFSETS),
            agent or self.rng.choice(HUMAN_AGENTS),
        )

    def emit(self, ts: int, host: _Host, target: str, status: int = 200,
             referrer: Optional[str] = None, **kw) -> _Event:
        size = None if status in (303, 304) else self.rng.randint(200, 40000)
        ev = _Event(ts, self.seq, host, target, status, referrer, size, **kw)
        self.seq += 1
        self.events.append(ev)
        return ev

    def url(self, node: str) -> str:
        return f"http://{self.sc.site_host}{node}"

    def raw_target(self, node: str) -> str:
        r = self.rng.random()
        if node != "/" and r < 0.08:
            return node + "/"
        if r < 0.16:
            return f"{node}?lang=en"
        return node

    # -- human sessions -------------------------------------------------------
    def sessions(self, window: TimeWindow, walks: List[List[str]], hosts: List[_Host]) -> None:
        label = window.label
        per_host: Dict[int, List[List[str]]] = defaultdict(list)
        order = list(range(len(walks)))
        self.rng.shuffle(order)
        for i, idx in enumerate(order):
            per_host[i % len(hosts)].append(walks[idx])
        span = int((window.end - window.start).total_seconds())
        start0 = int(window.start.timestamp())
        for hidx in sorted(per_host):
            host, host_walks = hosts[hidx], per_host[hidx]
            slot = span // len(host_walks)
            t = start0 + self.rng.randrange(max(1, slot // 2))
            for walk in host_walks:
                steps = [self.rng.randint(5, 120) for _ in walk[1:]]
                if t + sum(steps) >= start0 + span:
                    raise ValueError(f"scenario too dense for window {label!r}")
                ref = SEARCH_REFERRER if self.rng.random() < 0.3 else None
                self.emit(t, host, self.raw_target(walk[0]), referrer=ref)
                for prev, node, step in zip(walk, walk[1:], steps):
                    t += step
                    ref = self.url(prev) + ("/" if self.rng.random() < 0.05 else "")
                    self.emit(t, host, self.raw_target(node), referrer=ref)
                    self.edges[label][(prev, node)] += 1
                for node in walk:
                    self.nodes[label].add(node)
                    if self.depth[label].get(node, 0) < len(walk):
                        self.depth[label][node] = len(walk)
                for node in walk:
                    self.clean_hits[node] += 1
                gap = max(60, slot - sum(steps))
                t += self.rng.randint(60, max(60, gap))

    # -- agents ------------------------------------------------------------------
    def agents(self) -> None:
        sc = self.sc
        if not (sc.semantic_pair_count or sc.semantic_decoy_count or sc.sparql_count):
            return
        hosts = [self.host(AGENT_UA) for _ in range(sc.agent_hosts)]
        jobs: List[Tuple[str, int]] = (
            [("pair", i) for i in range(sc.semantic_pair_count)]
            + [("decoy", i) for i in range(sc.semantic_decoy_count)]
            + [("sparql", i) for i in range(sc.sparql_count)]
        )
        self.rng.shuffle(jobs)
        # one timeline per (host, window); jobs spaced well beyond the pair horizon
        clocks: Dict[Tuple[int, int], int] = {}
        h = sc.pair_horizon
        for n, (kind, i) in enumerate(jobs):
            hidx, widx = n % len(hosts), (n // len(hosts)) % len(sc.windows)
            window = sc.windows[widx]
            key = (hidx, widx)
            if key not in clocks:
                clocks[key] = int(window.start.timestamp()) + self.rng.randint(0, 3600)
            t = clocks[key]
            clocks[key] = t + 4 * h + self.rng.randint(30, 600)
            if clocks[key] >= int(window.end.timestamp()):
                raise ValueError("too many agent jobs for the window length")
            host, label = hosts[hidx], window.label
            if kind == "pair":
                name = f"Thing_{i}"
                rep = (f"/data/{name}", f"/data/{name}.rdf", f"/page/{name}", f"/resource/{name}.rdf")[i % 4]
                self.emit(t, host, f"/resource/{name}", 303)
                self.emit(t + self.rng.randint(0, h), host, rep, 200)
                self.nodes[label] |= {f"/resource/{name}", rep}
                self.gt.semantic_pairs += 1
                self.gt.semantic_entries += 2
            elif kind == "decoy":
                name = f"Decoy_{i}"
                variant = i % 5
                if variant == 0:  # representation fetched after the horizon
                    self.emit(t, host, f"/resource/{name}", 303)
                    self.emit(t + h + 1 + self.rng.randint(0, h), host, f"/data/{name}", 200)
                    self.nodes[label] |= {f"/resource/{name}", f"/data/{name}"}
                elif variant == 1:  # representation with no preceding 303
                    self.emit(t, host, f"/data/{name}", 200)
                    self.nodes[label].add(f"/data/{name}")
                elif variant == 2:  # 303 followed by an unrelated document
                    self.emit(t, host, f"/resource/{name}", 303)
                    self.emit(t + 1, host, f"/data/Other_{name}", 200)
                    self.nodes[label] |= {f"/resource/{name}", f"/data/Other_{name}"}
                elif variant == 3:  # lone 303
                    self.emit(t, host, f"/resource/{name}", 303)
                    self.nodes[label].add(f"/resource/{name}")
                else:  # representation fetched by a different host
                    other = hosts[(hidx + 1) % len(hosts)] if len(hosts) > 1 else self.host(AGENT_UA)
                    self.emit(t, host, f"/resource/{name}", 303)
                    self.emit(t + 1, other, f"/data/{name}", 200)
                    self.nodes[label] |= {f"/resource/{name}", f"/data/{name}"}
            else:
                self.emit(t, host, f"/sparql?query=SELECT+%3Fs+WHERE+%7B%3Fs+%3Fp+{i}%7D", 200)
                self.nodes[label].add("/sparql")
                self.gt.sparql_entries += 1

    # -- bots ------------------------------------------------------------------------
    def bots(self, crawlable: List[str], focus: Optional[str], focus_total: int) -> None:
        sc = self.sc
        share = [focus_total // sc.bot_hosts] * sc.bot_hosts if sc.bot_hosts else []
        for i in range(focus_total - sum(share)):
            share[i] += 1
        crawlable = [n for n in crawlable if n != focus]
        for b in range(sc.bot_hosts):
            kind = sc.bot_kinds[b % len(sc.bot_kinds)]
            host = self.host(BOT_AGENTS[kind])
            window = sc.windows[b % len(sc.windows)]
            targets = [self.rng.choice(crawlable) for _ in range(sc.bot_hits)]
            targets += [focus] * share[b]
            self.rng.shuffle(targets)
            start = int(window.start.timestamp())
            span = int((window.end - window.start).total_seconds())
            if kind == "rate":
                start += self.rng.randrange(max(1, span - sc.bot_span))
                span = sc.bot_span
            times = [start + (k * span) // max(1, len(targets)) for k in range(len(targets))]
            if kind == "robots":
                targets = ["/robots.txt"] + targets
                times = [times[0] if times else start] + times
            for t, node in zip(times, targets):
                self.emit(t, host, node, 200)
                self.bot_hits[node] += 1
            reasons = {BOT_REASONS[kind]}
            if self._exceeds_rate(times):
                reasons.add("RateThreshold")
            self.gt.bots[host.token] = sorted(reasons)

    def _exceeds_rate(self, times: Sequence[int]) -> bool:
        ts = sorted(times)
        lo = 0
        for hi in range(len(ts)):
            while ts[hi] - ts[lo] >= self.sc.rate_seconds:
                lo += 1
            if hi - lo + 1 > self.sc.rate_hits:
                return True
        return False

    def errors(self, hosts: List[_Host]) -> None:
        for i in range(self.sc.error_hits):
            window = self.sc.windows[i % len(self.sc.windows)]
            t = self.rng.randrange(int(window.start.timestamp()), int(window.end.timestamp()))
            self.emit(t, self.rng.choice(hosts), f"/missing/page-{i}", self.rng.choice((404, 404, 500)))
            self.gt.dropped_entries += 1

    # -- expectations ---------------------------------------------------------------
    @staticmethod
    def _ranking(edges: Counter, nodes, depth: Dict[str, int], k: int = 10) -> List[str]:
        weight = Counter()
        outs = defaultdict(set)
        for (a, b), w in edges.items():
            weight[a] += w
            weight[b] += w
            outs[a].add(b)
        order = sorted(
            nodes, key=lambda n: (-weight[n], -len(outs[n]), -depth.get(n, 1), n)
        )
        return order[:k]

    def run(self) -> Tuple[List[str], GroundTruth]:
        sc, rng = self.sc, self.rng
        links, starts, event_leaves = _site_links(rng, sc.event_resource)
        hosts = [self.host() for _ in range(sc.background_hosts)]

        for window in sc.windows:
            walks = [
                _walk(rng, links, _pick(rng, starts), sc.max_walk)
                for _ in range(sc.sessions_per_window)
            ]
            if window.label == sc.event_window:
                for _ in range(sc.event_sessions * sc.burst_multiplier):
                    head = ["/index.html"] if rng.random() < 0.5 else []
                    tail = _walk(rng, links, sc.event_resource, sc.max_walk - len(head), extra_min=1)
                    walks.append(head + tail)
            for nodes, reps, label in sc.trail_specs:
                if (label or sc.windows[0].label) == window.label:
                    walks.extend(list(nodes) for _ in range(reps))
            if walks:
                self.sessions(window, walks, hosts)

        self.agents()
        if hosts:
            self.errors(hosts)

        focus, focus_total = None, 0
        if sc.bot_share is not None and self.clean_hits:
            focus = min(self.clean_hits, key=lambda n: (-self.clean_hits[n], n))
            ratio = Fraction(str(sc.bot_share)) / (1 - Fraction(str(sc.bot_share)))
            exact = self.clean_hits[focus] * ratio
            if exact.denominator != 1:
                raise ValueError("bot_share does not give a whole number of bot hits")
            focus_total = int(exact)
        crawlable = sorted(set(links) | {n for lst in links.values() for n, _ in lst})
        self.bots(crawlable, focus, focus_total)

        self.events.sort()
        lines = [_format_line(ev) for ev in self.events]
        gt = self.gt
        for ev in self.events:
            day = datetime.fromtimestamp(ev.ts, UTC).date().isoformat()
            gt.day_entries[day] = gt.day_entries.get(day, 0) + 1
        for window in sc.windows:
            lo, hi = window.start.timestamp(), window.end.timestamp()
            gt.window_entries[window.label] = sum(1 for ev in self.events if lo <= ev.ts < hi)

        if sc.malformed_lines:
            rng2 = random.Random(sc.seed + 1)
            spots = sorted(rng2.sample(range(len(lines) + sc.malformed_lines), sc.malformed_lines))
            for pos in spots:
                lines.insert(pos, _malformed(rng2))
            gt.malformed_line_numbers = [p + 1 for p in spots]
        gt.lines = len(lines)

        for label in self.edges:
            gt.edges[label] = dict(self.edges[label])
            gt.nodes[label] = sorted(self.nodes[label])
            gt.depth[label] = dict(sorted(self.depth[label].items()))
            gt.ranking[label] = self._ranking(self.edges[label], self.nodes[label], self.depth[label])
        labels = [w.label for w in sc.windows]
        for old, new in zip(labels, labels[1:]):
            e_old, e_new = self.edges[old], self.edges[new]
            d = Counter()
            for e, w2 in e_new.items():
                q = w2 // max(e_old.get(e, 0), 1)
                if q:
                    d[e] = q
            gt.diff_ranking[f"{old}->{new}"] = self._ranking(d, {n for e in d for n in e}, {})
        if focus is not None:
            gt.top_resource = focus
            gt.top_resource_hits_clean = self.clean_hits[focus]
            gt.top_resource_hits_all = self.clean_hits[focus] + self.bot_hits[focus]
        return lines, gt


def _malformed(rng: random.Random) -> str:
    # an unescaped quote inside the referrer breaks the field structure
    return (
        '0.0.0.0 - - [26/Apr/2010:11:00:00 +0000] "GET /papers HTTP/1.1" 200 100 '
        f'"http://data.semanticweb.org/search?q="oops{rng.randint(0, 999)}" "Mozilla/5.0" "US" "deadbeef"'
    )


def generate(scenario: Scenario) -> Tuple[List[str], GroundTruth]:
    """Expand a scenario into log lines and the matching ground truth."""
    return _Generator(scenario).run()


def write_corpus(scenario: Scenario, out_path: Union[str, Path]) -> Tuple[Path, Path]:
    """Write ``<out>.log`` style corpus plus ``<out>.truth.json``; returns both paths."""
    out_path = Path(out_path)
    lines, gt = generate(scenario)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    truth = out_path.with_name(out_path.name + ".truth.json")
    truth.write_text(gt.to_json() + "\n", encoding="utf-8")
    return out_path, truth
