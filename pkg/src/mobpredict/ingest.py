"""Parsing of raw AP association logs, OUI-based device typing and
population filtering."""

from __future__ import annotations

import csv
import logging
import re
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .errors import MalformedLine, NoBuildingPrefix
from .model import DeviceClass

log = logging.getLogger(__name__)

MAC_RE = re.compile(r"^[0-9a-fA-F]{2}(:[0-9a-fA-F]{2}){5}$")
OUI_RE = re.compile(r"^[0-9a-fA-F]{2}(:[0-9a-fA-F]{2}){2}$")
DEFAULT_BUILDING_PATTERN = r"b\d+"
SECONDS_PER_DAY = 86400

MIN_DAYS = 7
MIN_APS_EXCLUSIVE = 5


@dataclass(frozen=True, slots=True)
class AssociationRecord:
    user_ip: str
    uuid: str
    ap_name: str
    ap_mac: str
    lease_begin: int
    lease_end: int

    def to_line(self, sep: str = ",") -> str:
        return sep.join(
            [self.user_ip, self.uuid, self.ap_name, self.ap_mac,
             str(self.lease_begin), str(self.lease_end)]
        )


def _split(line: str, sep: str | None) -> list[str]:
    if sep is None:
        sep = "\t" if "\t" in line else ","
    return [f.strip() for f in line.split(sep)]


def parse_record(line: str, sep: str | None = None, lineno: int | None = None) -> AssociationRecord:
    """Parse one six-field trace line (comma or tab separated)."""
    fields = _split(line.rstrip("\r\n"), sep)
    if len(fields) != 6:
        raise MalformedLine(f"expected 6 fields, got {len(fields)}", lineno, line)
    user_ip, uuid, ap_name, ap_mac, begin, end = fields
    if not MAC_RE.match(uuid):
        raise MalformedLine(f"bad device MAC {uuid!r}", lineno, line)
    if not MAC_RE.match(ap_mac):
        raise MalformedLine(f"bad AP MAC {ap_mac!r}", lineno, line)
    if not ap_name:
        raise MalformedLine("empty AP name", lineno, line)
    try:
        lease_begin = int(begin)
        lease_end = int(end)
    except ValueError:
        raise MalformedLine("non-integer timestamp", lineno, line) from None
    if lease_end < lease_begin:
        raise MalformedLine("lease ends before it begins", lineno, line)
    return AssociationRecord(user_ip, uuid.lower(), ap_name, ap_mac.lower(), lease_begin, lease_end)


def read_trace(path: Path, errors: list[MalformedLine] | None = None) -> Iterator[AssociationRecord]:
    """Yield records from a trace file, skipping comments and malformed lines.

    The separator is fixed by the first line that parses cleanly. Skipped
    lines are appended to ``errors`` when given.
    """
    sep = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            try:
                rec = parse_record(stripped, sep, lineno)
            except MalformedLine as exc:
                log.debug("%s: %s", path, exc)
                if errors is not None:
                    errors.append(exc)
                continue
            if sep is None:
                sep = "\t" if "\t" in stripped else ","
            yield rec


def dedupe(records: Iterable[AssociationRecord]) -> list[AssociationRecord]:
    """Drop repeated (uuid, ap, lease_begin) rows, keeping the first."""
    seen = set()
    out = []
    for r in records:
        key = (r.uuid, r.ap_name, r.lease_begin)
        if key in seen:
            continue
        seen.add(key)
        out.append(r)
    return out


def load_records(paths: Iterable[Path], errors: list[MalformedLine] | None = None) -> list[AssociationRecord]:
    records = []
    for p in paths:
        records.extend(read_trace(p, errors))
    records = dedupe(records)
    records.sort(key=lambda r: (r.uuid, r.lease_begin, r.ap_name))
    return records


def write_records(records: Iterable[AssociationRecord], path: Path) -> None:
    with open(path, "w") as fh:
        for r in records:
            fh.write(r.to_line() + "\n")


def group_by_device(records: Iterable[AssociationRecord]) -> dict[str, list[AssociationRecord]]:
    out: dict[str, list[AssociationRecord]] = defaultdict(list)
    for r in records:
        out[r.uuid].append(r)
    for recs in out.values():
        recs.sort(key=lambda r: (r.lease_begin, r.ap_name))
    return dict(out)


# -- device typing ---------------------------------------------------------------


class OuiMap:
    """Maps 3-byte OUI prefixes to device classes; absent prefixes are Other."""

    def __init__(self, entries: dict[str, DeviceClass] | None = None):
        self.entries: dict[str, DeviceClass] = {}
        for prefix, cls in (entries or {}).items():
            self.add(prefix, cls)

    def add(self, prefix: str, cls: DeviceClass) -> None:
        prefix = prefix.strip().lower()
        if not OUI_RE.match(prefix):
            raise ValueError(f"bad OUI prefix {prefix!r}")
        if prefix in self.entries and self.entries[prefix] != cls:
            raise ValueError(f"conflicting classes for OUI {prefix}")
        self.entries[prefix] = cls

    def lookup(self, uuid: str) -> DeviceClass:
        return self.entries.get(uuid[:8].lower(), DeviceClass.OTHER)

    @classmethod
    def load(cls, path: Path) -> "OuiMap":
        oui = cls()
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                prefix, _, name = line.partition(",")
                oui.add(prefix, DeviceClass.parse(name))
        return oui

    def dump(self, path: Path) -> None:
        with open(path, "w") as fh:
            for prefix in sorted(self.entries):
                fh.write(f"{prefix},{self.entries[prefix].value}\n")


def classify_device(uuid: str, oui_map: OuiMap) -> DeviceClass:
    return oui_map.lookup(uuid)


# -- buildings -------------------------------------------------------------------


def building_of(ap_name: str, pattern: str = DEFAULT_BUILDING_PATTERN) -> str:
    """Leading building token of an AP name, e.g. ``b422r143-win-1`` -> ``b422``."""
    if not ap_name:
        raise ValueError("empty AP name")
    m = re.match(pattern, ap_name)
    if m is None or not m.group(0):
        raise NoBuildingPrefix(ap_name)
    return m.group(0)


def building_or_fallback(ap_name: str, pattern: str = DEFAULT_BUILDING_PATTERN) -> str:
    try:
        return building_of(ap_name, pattern)
    except NoBuildingPrefix:
        return f"unknown-bldg:{ap_name}"


# -- per-device summaries --------------------------------------------------------


@dataclass(frozen=True)
class DeviceSummary:
    device: str
    n_ap: int
    n_day: int
    n_rec: int
    device_class: DeviceClass


@dataclass
class _Accumulator:
    aps: set
    days: set
    n_rec: int = 0

    def merge(self, other: "_Accumulator") -> "_Accumulator":
        return _Accumulator(self.aps | other.aps, self.days | other.days, self.n_rec + other.n_rec)


def accumulate(records: Iterable[AssociationRecord], tz_offset_s: int = 0) -> dict[str, _Accumulator]:
    """Per-shard partial summaries; merge with :func:`merge_accumulators`."""
    acc: dict[str, _Accumulator] = {}
    for r in records:
        a = acc.get(r.uuid)
        if a is None:
            a = acc[r.uuid] = _Accumulator(set(), set())
        a.aps.add(r.ap_name)
        a.days.add((r.lease_begin + tz_offset_s) // SECONDS_PER_DAY)
        a.n_rec += 1
    return acc


def merge_accumulators(*shards: dict[str, _Accumulator]) -> dict[str, _Accumulator]:
    out: dict[str, _Accumulator] = {}
    for shard in shards:
        for dev, a in shard.items():
            out[dev] = out[dev].merge(a) if dev in out else a
    return out


def summarize(records: Iterable[AssociationRecord], oui_map: OuiMap, tz_offset_s: int = 0) -> list[DeviceSummary]:
    acc = accumulate(records, tz_offset_s)
    return [
        DeviceSummary(dev, len(a.aps), len(a.days), a.n_rec, classify_device(dev, oui_map))
        for dev, a in sorted(acc.items())
    ]


def filter_population(
    summaries: Iterable[DeviceSummary],
    min_days: int = MIN_DAYS,
    min_aps_exclusive: int = MIN_APS_EXCLUSIVE,
) -> list[str]:
    """Devices seen on at least ``min_days`` days and at more than
    ``min_aps_exclusive`` distinct APs, Flutes and Cellos only."""
    keep = {
        s.device
        for s in summaries
        if s.n_day >= min_days
        and s.n_ap > min_aps_exclusive
        and s.device_class in (DeviceClass.FLUTE, DeviceClass.CELLO)
    }
    return sorted(keep)


SUMMARY_FIELDS = ["device", "class", "n_ap", "n_day", "n_rec"]


def write_summaries(summaries: Iterable[DeviceSummary], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SUMMARY_FIELDS)
        for s in summaries:
            w.writerow([s.device, s.device_class.value, s.n_ap, s.n_day, s.n_rec])


def read_summaries(path: Path) -> list[DeviceSummary]:
    with open(path, newline="") as fh:
        return [
            DeviceSummary(row["device"], int(row["n_ap"]), int(row["n_day"]),
                          int(row["n_rec"]), DeviceClass.parse(row["class"]))
            for row in csv.DictReader(fh)
        ]
