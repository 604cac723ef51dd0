"""Embedded on-disk store for curated hits.

Layout of a store directory::

    manifest.json        committed state (batches, per-day byte/line counts)
    days/YYYY-MM-DD.jsonl  one JSON record per hit, partitioned by UTC day
    .lock                writer lock

A batch becomes visible only when ``manifest.json`` is atomically replaced.
Readers read each day file up to the committed byte count, so a writer that
dies mid-append never exposes partial data; the next writer truncates the
uncommitted tail before appending.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from dataclasses import dataclass
from datetime import date, datetime, timedelta
from pathlib import Path
from typing import Callable, Collection, Dict, Iterable, Iterator, List, Optional, Union

from filelock import FileLock

from .clf import serialize_entry
from .model import EXTERNAL, UTC, AccessType, Hit, LogEntry, TimeWindow, normalize_resource

FORMAT_VERSION = 1


class StoreError(Exception):
    pass


class DuplicateBatchError(StoreError):
    pass


@dataclass(frozen=True)
class IngestSummary:
    file_id: str
    count: int
    dropped: int
    bots: int


@dataclass(frozen=True)
class StoredHit:
    hit: Hit
    file_id: str
    seq: int

    @property
    def entry(self) -> LogEntry:
        return self.hit.entry


@dataclass(frozen=True)
class HitStats:
    accessed_resources: int = 0
    days: int = 0
    hits: int = 0
    successful_hits: int = 0
    semantic_requests: int = 0
    sparql_requests: int = 0
    distinct_hosts: int = 0

    def as_dict(self) -> Dict[str, int]:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def _encode(hit: Hit, file_id: str, seq: int) -> str:
    e = hit.entry
    return json.dumps(
        {
            "seq": seq,
            "file": file_id,
            "line": e.line_no,
            "host": e.host_hash,
            "cc": e.country_code,
            "ts": int(e.timestamp.timestamp()),
            "off": int(e.tz_offset.total_seconds()) // 60,
            "method": e.method,
            "target": e.resource_raw,
            "proto": e.protocol,
            "status": e.status,
            "bytes": e.bytes,
            "ref": e.referrer,
            "ua": e.user_agent,
            "type": hit.access_type.value if hit.access_type else None,
            "dropped": hit.dropped,
            "bot": list(hit.bot_reasons),
            "pair": hit.pair_line,
        },
        ensure_ascii=False,
        separators=(",", ":"),
    )


def _decode(line: str) -> StoredHit:
    r = json.loads(line)
    entry = LogEntry(
        host_hash=r["host"],
        country_code=r["cc"],
        timestamp=datetime.fromtimestamp(r["ts"], UTC),
        method=r["method"],
        resource_raw=r["target"],
        protocol=r["proto"],
        status=r["status"],
        bytes=r["bytes"],
        referrer=r["ref"],
        user_agent=r["ua"],
        line_no=r["line"],
        tz_offset=timedelta(minutes=r["off"]),
    )
    hit = Hit(
        entry,
        AccessType(r["type"]) if r["type"] else None,
        r["dropped"],
        tuple(r["bot"]),
        r["pair"],
    )
    return StoredHit(hit, r["file"], r["seq"])


def batch_id(hits: Iterable[Hit]) -> str:
    """Content hash used as the batch identity when no file id is given."""
    h = hashlib.sha256()
    for hit in hits:
        h.update(serialize_entry(hit.entry).encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()[:16]


class EventStore:
    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)

    # -- manifest ---------------------------------------------------------
    @property
    def _manifest_path(self) -> Path:
        return self.path / "manifest.json"

    def _day_path(self, day: str) -> Path:
        return self.path / "days" / f"{day}.jsonl"

    def manifest(self) -> dict:
        try:
            with open(self._manifest_path, encoding="utf-8") as fh:
                return json.load(fh)
        except FileNotFoundError:
            return {"version": FORMAT_VERSION, "site_host": None, "batches": [], "days": {}, "next_seq": 0}

    @property
    def site_host(self) -> Optional[str]:
        return self.manifest().get("site_host")

    def _write_manifest(self, manifest: dict) -> None:
        tmp = self._manifest_path.with_suffix(".json.tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=1, sort_keys=True)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, self._manifest_path)

    # -- writing ----------------------------------------------------------
    def ingest(
        self,
        hits: Iterable[Hit],
        file_id: Optional[str] = None,
        site_host: Optional[str] = None,
    ) -> IngestSummary:
        hits = list(hits)
        if file_id is None:
            file_id = batch_id(hits)
        try:
            (self.path / "days").mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise StoreError(f"store not writable: {self.path}: {exc}") from exc

        with FileLock(str(self.path / ".lock")):
            manifest = self.manifest()
            if any(b["file_id"] == file_id for b in manifest["batches"]):
                raise DuplicateBatchError(f"batch {file_id!r} already ingested")
            if site_host is not None:
                known = manifest.get("site_host")
                if known is not None and known != site_host:
                    raise StoreError(f"store holds site {known!r}, not {site_host!r}")
                manifest["site_host"] = site_host

            seq = manifest["next_seq"]
            by_day: Dict[str, List[str]] = {}
            for hit in hits:
                day = hit.entry.timestamp.date().isoformat()
                by_day.setdefault(day, []).append(_encode(hit, file_id, seq))
                seq += 1

            try:
                for day, lines in sorted(by_day.items()):
                    info = manifest["days"].setdefault(day, {"lines": 0, "bytes": 0})
                    payload = ("\n".join(lines) + "\n").encode("utf-8")
                    path = self._day_path(day)
                    with open(path, "ab") as fh:
                        fh.truncate(info["bytes"])
                        fh.seek(info["bytes"])
                        fh.write(payload)
                        fh.flush()
                        os.fsync(fh.fileno())
                    info["lines"] += len(lines)
                    info["bytes"] += len(payload)
            except OSError as exc:
                raise StoreError(f"store not writable: {self.path}: {exc}") from exc

            manifest["batches"].append(
                {"file_id": file_id, "count": len(hits), "seq_start": manifest["next_seq"]}
            )
            manifest["next_seq"] = seq
            self._write_manifest(manifest)

        return IngestSummary(
            file_id,
            len(hits),
            sum(h.dropped for h in hits),
            sum(h.is_bot for h in hits),
        )

    # -- reading ----------------------------------------------------------
    def _scan(self, window: Optional[TimeWindow]) -> Iterator[StoredHit]:
        manifest = self.manifest()
        first = last = None
        if window is not None:
            first = window.start.date()
            last = (window.end - timedelta(microseconds=1)).date()
        for day, info in sorted(manifest["days"].items()):
            d = date.fromisoformat(day)
            if first is not None and not first <= d <= last:
                continue
            with open(self._day_path(day), "rb") as fh:
                data = fh.read(info["bytes"])
            for line in data.decode("utf-8").splitlines():
                stored = _decode(line)
                if window is None or stored.entry.timestamp in window:
                    yield stored

    def query_window(
        self,
        window: TimeWindow,
        access_types: Optional[Collection[AccessType]] = None,
        hosts: Optional[Collection[str]] = None,
        resource: Optional[Callable[[str], bool]] = None,
        include_bots: bool = False,
        include_dropped: bool = False,
    ) -> List[StoredHit]:
        """Hits with ``start <= timestamp < end`` matching all filters, time-ordered.

        ``resource`` is a predicate over the normalized target key.
        """
        site = self.site_host
        out = []
        for s in self._scan(window):
            h = s.hit
            if h.dropped and not include_dropped:
                continue
            if h.is_bot and not include_bots:
                continue
            if access_types is not None and h.access_type not in access_types:
                continue
            if hosts is not None and h.entry.host_hash not in hosts:
                continue
            if resource is not None:
                key = normalize_resource(h.entry.resource_raw, site)
                if key is EXTERNAL or not resource(key):
                    continue
            out.append(s)
        out.sort(key=lambda s: (s.entry.timestamp, s.seq))
        return out

    def entries(self, window: TimeWindow, **filters) -> List[LogEntry]:
        return [s.entry for s in self.query_window(window, **filters)]

    def stats(self, window: Optional[TimeWindow] = None, include_bots: bool = True) -> HitStats:
        site = self.site_host
        hits = successful = semantic = sparql = 0
        days, hosts, resources = set(), set(), set()
        for s in self._scan(window):
            h = s.hit
            if h.is_bot and not include_bots:
                continue
            hits += 1
            days.add(h.entry.timestamp.date())
            hosts.add(h.entry.host_hash)
            if h.dropped:
                continue
            successful += 1
            if h.access_type is AccessType.SEMANTIC:
                semantic += 1
            elif h.access_type is AccessType.SPARQL:
                sparql += 1
            key = normalize_resource(h.entry.resource_raw, site)
            if key is not EXTERNAL:
                resources.add(key)
        return HitStats(len(resources), len(days), hits, successful, semantic, sparql, len(hosts))

    def count(self) -> int:
        return sum(info["lines"] for info in self.manifest()["days"].values())

    def export_tsv(self, out, window: Optional[TimeWindow] = None, delimiter: str = "\t") -> int:
        """Write committed hits as delimiter-separated text; returns rows written."""
        writer = csv.writer(out, delimiter=delimiter, lineterminator="\n")
        writer.writerow(
            ["timestamp", "host_hash", "country_code", "method", "resource", "status",
             "bytes", "referrer", "user_agent", "access_type", "dropped", "bot", "file_id", "line_no"]
        )
        rows = sorted(self._scan(window), key=lambda s: (s.entry.timestamp, s.seq))
        for s in rows:
            e, h = s.entry, s.hit
            writer.writerow(
                [e.timestamp.strftime("%Y-%m-%dT%H:%M:%SZ"), e.host_hash, e.country_code,
                 e.method, e.resource_raw, e.status, "" if e.bytes is None else e.bytes,
                 e.referrer or "", e.user_agent, h.access_type.value if h.access_type else "",
                 int(h.dropped), "|".join(h.bot_reasons), s.file_id, e.line_no]
            )
        return len(rows)


def ingest(
    hits: Iterable[Hit],
    store_path: Union[str, Path],
    file_id: Optional[str] = None,
    site_host: Optional[str] = None,
) -> IngestSummary:
    return EventStore(store_path).ingest(hits, file_id, site_host)


def query_window(store: EventStore, window: TimeWindow, **filters) -> List[StoredHit]:
    return store.query_window(window, **filters)


def stats(store: EventStore, window: Optional[TimeWindow] = None) -> HitStats:
    return store.stats(window)
