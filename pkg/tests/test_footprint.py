import io
import random
from collections import Counter
from datetime import timedelta

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import SITE, T0, hit, ref
from usagerel.footprint import (
    UnknownNodeError,
    UsageGraph,
    build_site_graph,
    build_wtf,
    depth_index,
    extract_paths,
    fan,
    max_depth,
    merge_graphs,
    site_paths,
    weight,
    write_edge_list,
)
from usagerel.model import TimeWindow


def test_wtf_counts_internal_hops():
    hs = [
        hit(target="/a"),
        hit(target="/b", referrer=ref("/a"), t=1),
        hit(target="/b", referrer=ref("/a"), t=2),
        hit(target="/c", referrer="http://www.google.com/search?q=c", t=3),
        hit(target="/a", referrer=ref("/a"), t=4),  # refresh
    ]
    g = build_wtf(hs, SITE)
    assert g.nodes == {"/a", "/b", "/c"}
    assert dict(g.edges) == {("/a", "/b"): 2}
    assert g.host == "h1"


def test_wtf_rejects_mixed_hosts():
    with pytest.raises(ValueError):
        build_wtf([hit(host="a"), hit(host="b")])


def test_external_targets_ignored():
    g = build_wtf([hit(target="http://elsewhere.org/x", referrer=ref("/a"))], SITE)
    assert g.nodes == set() and not g.edges


def test_fan_and_weight():
    g = UsageGraph(None, frozenset("abcd"), {("a", "b"): 3, ("a", "c"): 1, ("d", "a"): 2})
    assert (fan(g, "a"), weight(g, "a")) == (2, 6)
    assert (fan(g, "b"), weight(g, "b")) == (0, 3)
    with pytest.raises(UnknownNodeError):
        fan(g, "zz")
    with pytest.raises(UnknownNodeError):
        weight(g, "zz")


def test_graph_validates_edges():
    with pytest.raises(ValueError):
        UsageGraph(None, frozenset("ab"), {("a", "b"): 0})
    with pytest.raises(ValueError):
        UsageGraph(None, frozenset("a"), {("a", "b"): 1})


def random_log(rng, n, hosts=4, nodes=6, span=7200):
    names = [f"/n{i}" for i in range(nodes)]
    out = []
    for i in range(n):
        r = rng.random()
        referrer = None if r < 0.2 else ("http://other.org/" if r < 0.3 else ref(rng.choice(names)))
        target = rng.choice(names) if rng.random() > 0.05 else "http://other.org/z"
        out.append(hit(host=f"h{rng.randrange(hosts)}", target=target, referrer=referrer,
                       t=rng.randrange(span), line_no=i))
    return out


def oracle_edges(entries):
    """Tally referrer -> target pairs straight from the raw strings."""
    prefix = f"http://{SITE}"
    tally = Counter()
    for e in entries:
        if e.referrer and e.referrer.startswith(prefix) and e.resource_raw.startswith("/"):
            a, b = e.referrer[len(prefix):], e.resource_raw
            if a != b:
                tally[(a, b)] += 1
    return tally


@given(st.integers(0, 10_000), st.integers(0, 200))
def test_site_graph_matches_oracle(seed, n):
    entries = random_log(random.Random(seed), n)
    g = build_site_graph(entries, SITE)
    assert dict(g.edges) == oracle_edges(entries)
    # conservation: total weight = number of internal, non-self transitions
    assert g.total_weight == sum(oracle_edges(entries).values())
    # every edge endpoint is a node; every node has traffic or was hit
    for a, b in g.edges:
        assert {a, b} <= g.nodes


@given(st.integers(0, 10_000), st.lists(st.integers(1, 7199), max_size=4))
def test_disjoint_windows_add_up(seed, cuts):
    entries = random_log(random.Random(seed), 150)
    bounds = [T0] + sorted({T0 + timedelta(seconds=c) for c in cuts}) + [T0 + timedelta(seconds=7200)]
    parts = []
    for a, b in zip(bounds, bounds[1:]):
        w = TimeWindow(a, b)
        parts.append(build_site_graph([e for e in entries if e.timestamp in w], SITE, w))
    union = build_site_graph(entries, SITE)
    merged = merge_graphs(parts)
    assert dict(merged.edges) == dict(union.edges)
    assert merged.nodes == union.nodes


@given(st.integers(0, 10_000), st.randoms())
def test_merge_is_order_independent(seed, shuffler):
    entries = random_log(random.Random(seed), 80)
    by_host = {}
    for e in entries:
        by_host.setdefault(e.host_hash, []).append(e)
    graphs = [build_wtf(v, SITE) for v in by_host.values()]
    shuffled = graphs[:]
    shuffler.shuffle(shuffled)
    assert merge_graphs(graphs) == merge_graphs(shuffled)


@given(st.integers(0, 10_000))
def test_fan_weight_bounds(seed):
    g = build_site_graph(random_log(random.Random(seed), 120), SITE)
    for n in g.nodes:
        assert 0 <= fan(g, n) <= len(g.nodes) - 1
        assert weight(g, n) <= 2 * g.total_weight
    assert sum(weight(g, n) for n in g.nodes) == 2 * g.total_weight


def test_paths_chain_by_referrer():
    hs = [
        hit(target="/a", t=0),
        hit(target="/b", referrer=ref("/a"), t=10),
        hit(target="/c", referrer=ref("/b"), t=20),
        hit(target="/x", t=30),
    ]
    paths = extract_paths(hs, site_host=SITE)
    assert [p.nodes for p in paths] == [("/a", "/b", "/c"), ("/x",)]
    assert paths[0].start == T0 and paths[0].end == T0 + timedelta(seconds=20)


def test_session_gap_closes_path():
    hs = [hit(target="/a", t=0), hit(target="/b", referrer=ref("/a"), t=1801)]
    assert [p.nodes for p in extract_paths(hs, 1800, SITE)] == [("/a",), ("/b",)]
    hs[1] = hit(target="/b", referrer=ref("/a"), t=1800)
    assert [p.nodes for p in extract_paths(hs, 1800, SITE)] == [("/a", "/b")]


def test_interleaved_tabs():
    hs = [
        hit(target="/a", t=0),
        hit(target="/x", t=1),
        hit(target="/b", referrer=ref("/a"), t=2),
        hit(target="/y", referrer=ref("/x"), t=3),
        hit(target="/z", referrer=ref("/y"), t=4),
    ]
    assert sorted(p.nodes for p in extract_paths(hs, site_host=SITE)) == [("/a", "/b"), ("/x", "/y", "/z")]


def test_most_recent_candidate_wins():
    hs = [
        hit(target="/a", t=0),
        hit(target="/a", t=5),
        hit(target="/q", referrer=ref("/a"), t=6),
    ]
    paths = extract_paths(hs, site_host=SITE)
    assert [p.nodes for p in paths] == [("/a",), ("/a", "/q")]


def test_six_hop_trail_depth():
    trail = ["/p0", "/p1", "/p2", "/p3", "/p4", "/p5"]
    hs = [hit(target=trail[0])]
    hs += [hit(target=b, referrer=ref(a), t=i + 1) for i, (a, b) in enumerate(zip(trail, trail[1:]))]
    paths = site_paths(hs, site_host=SITE)
    assert [len(p) for p in paths] == [6]
    assert all(max_depth(paths, n) == 6 for n in trail)
    assert depth_index(paths) == dict.fromkeys(trail, 6)
    with pytest.raises(UnknownNodeError):
        max_depth(paths, "/none")


@settings(max_examples=50)
@given(st.integers(0, 10_000))
def test_every_internal_hit_lands_in_one_path(seed):
    entries = random_log(random.Random(seed), 100, span=20_000)
    internal = [e for e in entries if e.resource_raw.startswith("/")]
    paths = site_paths(entries, site_host=SITE)
    assert sum(len(p) for p in paths) == len(internal)
    for p in paths:
        assert p.start <= p.end


def test_edge_list_output():
    g = UsageGraph(None, frozenset("ab"), {("b", "a"): 2, ("a", "b"): 1})
    buf = io.StringIO()
    write_edge_list(g, buf)
    assert buf.getvalue() == "from\tto\tweight\na\tb\t1\nb\ta\t2\n"
