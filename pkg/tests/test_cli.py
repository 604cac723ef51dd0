import json
from dataclasses import replace
from pathlib import Path

import pytest

from usagerel.cli import EXIT_CONFIG, EXIT_DUPLICATE, EXIT_IO, main
from usagerel.synth import Scenario, write_corpus

DATA = Path(__file__).parent / "data"
WINDOW = "fixture|2010-04-26..2010-04-26"


@pytest.fixture
def store(tmp_path):
    path = str(tmp_path / "store")
    assert main(["ingest", str(DATA / "fixture.log"), "--store", path]) == 0
    return path


def test_ingest_reports(tmp_path, capsys):
    assert main(["ingest", str(DATA / "fixture.log"), "--store", str(tmp_path / "s")]) == 0
    out = capsys.readouterr().out
    assert "accepted=403 rejected=0 stored=403" in out


def test_missing_input(tmp_path, capsys):
    missing = tmp_path / "nope.log"
    assert main(["ingest", str(missing), "--store", str(tmp_path / "s")]) == EXIT_IO
    assert str(missing) in capsys.readouterr().err
    assert not (tmp_path / "s").exists()


def test_malformed_lines_are_not_fatal(tmp_path, capsys):
    sc = replace(Scenario(), sessions_per_window=40, event_sessions=2, bot_hosts=0,
                 semantic_pair_count=5, semantic_decoy_count=5, sparql_count=5, error_hits=5,
                 malformed_lines=3)
    log = tmp_path / "c.log"
    write_corpus(sc, log)
    capsys.readouterr()
    assert main(["ingest", str(log), "--store", str(tmp_path / "s")]) == 0
    out = capsys.readouterr().out
    assert "rejected=3" in out
    assert out.count(": Malformed") == 3


def test_duplicate_ingest(store, capsys):
    capsys.readouterr()
    assert main(["ingest", str(DATA / "fixture.log"), "--store", store]) == EXIT_DUPLICATE
    assert "duplicate" in capsys.readouterr().err


def test_bad_config(tmp_path, capsys):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[curation]\nrate_hits = many\n")
    code = main(["ingest", str(DATA / "fixture.log"), "--store", str(tmp_path / "s"), "--config", str(cfg)])
    assert code == EXIT_CONFIG
    assert str(cfg) in capsys.readouterr().err


def test_stats(store, capsys, tmp_path):
    capsys.readouterr()
    assert main(["stats", "--store", store]) == 0
    text = capsys.readouterr().out
    assert "hits" in text and "403" in text
    out = tmp_path / "stats.json"
    assert main(["stats", "--store", store, "--json", "--window", WINDOW, "--out", str(out)]) == 0
    stats = json.loads(out.read_text())
    assert stats["hits"] == stats["successful_hits"] == 403
    assert stats["accessed_resources"] == 9  # distinct requested targets
    assert stats["days"] == 1


def test_stats_without_store(tmp_path, capsys):
    assert main(["stats", "--store", str(tmp_path / "none")]) == EXIT_IO
    assert "no store" in capsys.readouterr().err


def test_kg_matches_golden(store, tmp_path):
    out = tmp_path / "kg.dot"
    assert main(["kg", "--store", store, "--window", WINDOW, "--out", str(out)]) == 0
    assert out.read_bytes() == (DATA / "kg_fixture.dot").read_bytes()


def test_rank(store, capsys, tmp_path):
    capsys.readouterr()
    assert main(["rank", "--store", store, "--window", WINDOW, "--top", "3"]) == 0
    rows = capsys.readouterr().out.splitlines()
    assert len(rows) == 4
    assert rows[1].split() == ["1", "327", "2", "1", "/"]
    tsv = tmp_path / "r.tsv"
    assert main(["rank", "--store", store, "--window", WINDOW, "--tsv", "--out", str(tsv)]) == 0
    lines = tsv.read_text().splitlines()
    assert lines[0] == "rank\tresource\tweight_total\tfan\tdepth_max"
    assert len(lines) == 11


def test_diffkg_identical_windows_all_gray(store, tmp_path, capsys):
    out = tmp_path / "d.dot"
    assert main(["diffkg", "--store", store, "--window", WINDOW, "--window", WINDOW,
                 "--out", str(out), "--top", "2"]) == 0
    edges = [line for line in out.read_text().splitlines() if '" -> "' in line]
    assert len(edges) == 12
    assert all("color=gray" in e and 'label="1"' in e for e in edges)
    assert len(capsys.readouterr().err.splitlines()) == 2


def test_diffkg_needs_two_windows(store):
    assert main(["diffkg", "--store", store, "--window", WINDOW, "--out", "x.dot"]) == EXIT_CONFIG


def test_empty_window(store, tmp_path):
    out = tmp_path / "e.dot"
    assert main(["kg", "--store", store, "--window", "none|2011-01-01..2011-01-02", "--out", str(out)]) == 0
    text = out.read_text()
    assert text.startswith('digraph "none" {') and text.endswith("}\n") and "->" not in text


def test_bad_window_is_usage_error(store, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["rank", "--store", store, "--window", "2010-05-01..2010-04-01"])
    assert exc.value.code == 2


def test_access_type_filter(store, capsys):
    capsys.readouterr()
    assert main(["rank", "--store", store, "--window", WINDOW, "--access-type", "Sparql"]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 1


def test_synth_and_export(tmp_path, capsys):
    scen = tmp_path / "s.ini"
    scen.write_text("[scenario]\nsessions_per_window = 30\nevent_sessions = 2\nbot_hosts = 0\n"
                    "semantic_pair_count = 3\nsemantic_decoy_count = 3\nsparql_count = 3\n")
    log = tmp_path / "c.log"
    assert main(["synth", "--scenario", str(scen), "--seed", "5", "--out", str(log)]) == 0
    assert (tmp_path / "c.log.truth.json").exists()
    first = log.read_bytes()
    assert main(["synth", "--scenario", str(scen), "--seed", "5", "--out", str(log)]) == 0
    assert log.read_bytes() == first
    store = str(tmp_path / "st")
    assert main(["ingest", str(log), "--store", store]) == 0
    tsv = tmp_path / "all.tsv"
    assert main(["export", "--store", store, "--out", str(tsv)]) == 0
    assert len(tsv.read_text().splitlines()) == len(first.splitlines()) + 1
    edges = tmp_path / "e.tsv"
    assert main(["export", "--store", store, "--edges", "--window", "during|2010-04-25..2010-05-01",
                 "--out", str(edges)]) == 0
    assert edges.read_text().startswith("from\tto\tweight\n")
    assert main(["export", "--store", store, "--edges"]) == EXIT_CONFIG


def test_missing_scenario(tmp_path):
    assert main(["synth", "--scenario", str(tmp_path / "x.ini"), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
