"""Command-line entry point: ``usagerel <command> [options]``."""

from __future__ import annotations

import argparse
import io
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from . import kandinsky
from .curation import CurationConfig
from .model import AccessType, TimeWindow, parse_window
from .footprint import write_edge_list
from .pipeline import ingest_files, window_view
from .relevance import diff, rank, rank_diff, write_ranking
from .store import DuplicateBatchError, EventStore, StoreError
from .synth import Scenario, write_corpus

log = logging.getLogger("usagerel")

EXIT_OK, EXIT_IO, EXIT_CONFIG, EXIT_DUPLICATE = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message: str, status: int = EXIT_IO):
        super().__init__(message)
        self.status = status


def _window(text: str) -> TimeWindow:
    try:
        return parse_window(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _access_type(text: str) -> AccessType:
    for t in AccessType:
        if text.lower() in (t.value.lower(), t.name.lower()):
            return t
    raise argparse.ArgumentTypeError(
        f"unknown access type {text!r}; choose from {', '.join(t.value for t in AccessType)}"
    )


def _config(args) -> CurationConfig:
    if not getattr(args, "config", None):
        return CurationConfig()
    try:
        return CurationConfig.from_file(args.config)
    except FileNotFoundError:
        raise CliError(f"config file not found: {args.config}", EXIT_CONFIG) from None
    except ValueError as exc:
        raise CliError(f"bad config {args.config}: {exc}", EXIT_CONFIG) from None


def _open_store(path: str) -> EventStore:
    store = EventStore(path)
    if not (store.path / "manifest.json").exists():
        raise CliError(f"no store at {path}")
    return store


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        out = Path(path)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="ascii" if text.isascii() else "utf-8")
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}") from None


def cmd_ingest(args) -> int:
    config = _config(args)
    for p in args.inputs:
        if not Path(p).is_file():
            raise CliError(f"input file not found: {p}")
    store = EventStore(args.store)
    try:
        results = ingest_files(args.inputs, store, config)
    except DuplicateBatchError as exc:
        raise CliError(f"duplicate batch: {exc}", EXIT_DUPLICATE) from None
    except (StoreError, OSError) as exc:
        raise CliError(str(exc)) from None
    for path, report, summary in results:
        print(
            f"{path}: accepted={report.accepted} rejected={report.rejected} "
            f"stored={summary.count} dropped={summary.dropped} bot_hits={summary.bots}"
        )
        for line_no, kind in report.rejects[: args.show_rejects]:
            print(f"  line {line_no}: {kind.value}")
        if report.rejected > args.show_rejects:
            print(f"  ... {report.rejected - args.show_rejects} more rejects")
    return EXIT_OK


def cmd_stats(args) -> int:
    store = _open_store(args.store)
    stats = store.stats(args.window)
    if args.json:
        _write(args.out, json.dumps(stats.as_dict(), indent=1) + "\n")
    else:
        rows = stats.as_dict()
        width = max(len(k) for k in rows)
        _write(args.out, "".join(f"{k:<{width}}  {v:>12,}\n" for k, v in rows.items()))
    return EXIT_OK


def _view(args, window: TimeWindow):
    store = _open_store(args.store)
    types = [args.access_type] if getattr(args, "access_type", None) else None
    return window_view(store, window, _config(args), args.keep_bots, types)


def cmd_rank(args) -> int:
    graph, paths = _view(args, args.window)
    ranking = rank(graph, paths, args.top)
    if args.tsv:
        buf = io.StringIO()
        write_ranking(ranking, buf)
        _write(args.out, buf.getvalue())
    else:
        lines = [f"{'rank':>4}  {'weight':>8}  {'fan':>5}  {'depth':>5}  resource"]
        for i, (key, s) in enumerate(ranking, start=1):
            lines.append(f"{i:>4}  {s.weight_total:>8}  {s.fan:>5}  {s.depth_max:>5}  {key}")
        _write(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_kg(args) -> int:
    graph, _ = _view(args, args.window)
    _write(args.out, kandinsky.emit_dot(graph, kandinsky.KG, name=args.window.label or "KG"))
    return EXIT_OK


def cmd_diffkg(args) -> int:
    if len(args.window) != 2:
        raise CliError("diffkg needs exactly two --window options (old, then new)", EXIT_CONFIG)
    old_w, new_w = args.window
    old, _ = _view(args, old_w)
    new, _ = _view(args, new_w)
    d = diff(old, new)
    name = f"{old_w.label or 'old'}->{new_w.label or 'new'}"
    if args.top:
        for i, (key, s) in enumerate(rank_diff(d, args.top), start=1):
            print(f"{i:>4}  {s.weight_total:>8}  {s.fan:>5}  {key}", file=sys.stderr)
    _write(args.out, kandinsky.emit_dot(d, kandinsky.DIFF_KG, name=name))
    return EXIT_OK


def cmd_synth(args) -> int:
    try:
        scenario = Scenario.from_file(args.scenario) if args.scenario else Scenario()
    except FileNotFoundError:
        raise CliError(f"scenario file not found: {args.scenario}", EXIT_CONFIG) from None
    except (ValueError, KeyError) as exc:
        raise CliError(f"bad scenario: {exc}", EXIT_CONFIG) from None
    if args.seed is not None:
        scenario = replace(scenario, seed=args.seed)
    try:
        corpus, truth = write_corpus(scenario, args.out)
    except ValueError as exc:
        raise CliError(f"bad scenario: {exc}", EXIT_CONFIG) from None
    except OSError as exc:
        raise CliError(f"cannot write {args.out}: {exc}") from None
    print(f"corpus: {corpus}\ntruth: {truth}")
    return EXIT_OK


def cmd_export(args) -> int:
    store = _open_store(args.store)
    if args.edges:
        if args.window is None:
            raise CliError("--edges needs --window", EXIT_CONFIG)
        graph, _ = _view(args, args.window)
        buf = io.StringIO()
        write_edge_list(graph, buf)
        _write(args.out, buf.getvalue())
        return EXIT_OK
    try:
        if args.out in (None, "-"):
            store.export_tsv(sys.stdout, args.window)
        else:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                store.export_tsv(fh, args.window)
    except OSError as exc:
        raise CliError(f"cannot write {args.out}: {exc}") from None
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="usagerel",
        description="Time-windowed relevance mining over extended Combined Log Format logs.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def store_opt(p):
        p.add_argument("--store", required=True, help="store directory")

    def view_opts(p):
        p.add_argument("--config", help="curation config (INI, [curation] section)")
        p.add_argument("--keep-bots", action="store_true", help="include flagged bot hosts")
        p.add_argument("--access-type", type=_access_type, help="restrict to one access type")

    p = sub.add_parser("ingest", help="parse, curate and store log files")
    p.add_argument("inputs", nargs="+", help="log files (plain or gzip)")
    store_opt(p)
    p.add_argument("--config", help="curation config (INI, [curation] section)")
    p.add_argument("--show-rejects", type=int, default=20, metavar="N")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("stats", help="hit statistics")
    store_opt(p)
    p.add_argument("--window", type=_window, help="LABEL|START..END")
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("rank", help="rank resources by strength of relevance")
    store_opt(p)
    view_opts(p)
    p.add_argument("--window", type=_window, required=True, help="LABEL|START..END")
    p.add_argument("--top", type=int, default=10, metavar="K")
    p.add_argument("--tsv", action="store_true", help="delimiter-separated output")
    p.add_argument("--out")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("kg", help="write a Kandinsky graph as DOT")
    store_opt(p)
    view_opts(p)
    p.add_argument("--window", type=_window, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_kg)

    p = sub.add_parser("diffkg", help="write a DIFF Kandinsky graph as DOT")
    store_opt(p)
    view_opts(p)
    p.add_argument("--window", type=_window, action="append", required=True,
                   help="give twice: old window, then new window")
    p.add_argument("--top", type=int, default=0, metavar="K",
                   help="also print the top K diff ranking to stderr")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_diffkg)

    p = sub.add_parser("synth", help="generate a synthetic corpus with ground truth")
    p.add_argument("--scenario", help="scenario file (INI)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("export", help="export stored hits or a window's edge list")
    store_opt(p)
    view_opts(p)
    p.add_argument("--window", type=_window)
    p.add_argument("--edges", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    if args.command == "rank" and args.top < 1:
        parser.error("--top must be >= 1")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"usagerel: error: {exc}", file=sys.stderr)
        return exc.status


if __name__ == "__main__":
    sys.exit(main())
