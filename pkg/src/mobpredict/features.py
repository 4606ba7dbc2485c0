"""Per-device mobility and activity features, split by weekday/weekend,
and their Pearson correlation with prediction accuracy."""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .discretize import DiscretizerConfig, normalize_intervals
from .errors import DegenerateInput, MissingCoordinates
from .ingest import DEFAULT_BUILDING_PATTERN, AssociationRecord, building_or_fallback
from .model import SECONDS_PER_DAY, DeviceClass, LocationAlphabet, SpatialResolution, is_weekend, local_day

FEATURE_NAMES = ["pdtw", "pdte", "tjw", "tje", "aatw", "aate", "aiw_assoc", "aie_assoc"]


@dataclass(frozen=True)
class DeviceFeatures:
    pdtw: float
    pdte: float
    tjw: float
    tje: float
    aatw: float
    aate: float
    aiw_assoc: float
    aie_assoc: float


@dataclass(frozen=True)
class Calendar:
    tz_offset_s: int = 0

    def weekend(self, t: int) -> bool:
        return is_weekend(t, self.tz_offset_s)

    def day(self, t: int) -> int:
        return local_day(t, self.tz_offset_s)


def load_coords(path: Path) -> dict[str, tuple[float, float]]:
    with open(path, newline="") as fh:
        return {row["building"]: (float(row["x_m"]), float(row["y_m"])) for row in csv.DictReader(fh)}


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values) if values else 0.0


def compute_features(
    records: Sequence[AssociationRecord],
    coords: Mapping[str, tuple[float, float]],
    calendar: Calendar = Calendar(),
    t_max_s: int = 3600,
    building_pattern: str = DEFAULT_BUILDING_PATTERN,
) -> DeviceFeatures:
    """Features of one device; index 0 of each pair is weekday, 1 weekend.

    * PDT: occupancy seconds at the building occupied longest in that day class
    * TJ: metres travelled between consecutive records at different buildings
    * AAT: mean per-day sum of lease durations
    * AI: mean gap between consecutive record starts on the same day
    """
    recs = sorted(records, key=lambda r: (r.lease_begin, r.ap_name, r.lease_end))
    buildings = [building_or_fallback(r.ap_name, building_pattern) for r in recs]
    missing = set(buildings) - set(coords)
    if missing:
        raise MissingCoordinates(missing)

    def part(t: int) -> int:
        return 1 if calendar.weekend(t) else 0

    # PDT: building-level occupancy, cut at local midnight
    cfg = DiscretizerConfig(t_max_s=t_max_s, spatial=SpatialResolution.BUILDING,
                            building_pattern=building_pattern)
    alphabet = LocationAlphabet()
    occupancy = [defaultdict(int), defaultdict(int)]
    for iv in normalize_intervals(recs, cfg, alphabet):
        t = iv.begin
        while t < iv.end:
            midnight = (calendar.day(t) + 1) * SECONDS_PER_DAY - calendar.tz_offset_s
            stop = min(iv.end, midnight)
            occupancy[part(t)][iv.location] += stop - t
            t = stop
    pdt = [max(occ.values(), default=0) for occ in occupancy]

    tj = [0.0, 0.0]
    for prev, cur, rec in zip(buildings, buildings[1:], recs[1:]):
        if prev != cur:
            (x0, y0), (x1, y1) = coords[prev], coords[cur]
            tj[part(rec.lease_begin)] += math.hypot(x1 - x0, y1 - y0)

    active = [defaultdict(int), defaultdict(int)]
    for r in recs:
        active[part(r.lease_begin)][calendar.day(r.lease_begin)] += r.lease_end - r.lease_begin
    aat = [_mean(list(a.values())) for a in active]

    gaps: list[list[int]] = [[], []]
    for prev, cur in zip(recs, recs[1:]):
        if calendar.day(prev.lease_begin) == calendar.day(cur.lease_begin):
            gaps[part(cur.lease_begin)].append(cur.lease_begin - prev.lease_begin)
    ai = [_mean(g) for g in gaps]

    return DeviceFeatures(pdt[0], pdt[1], tj[0], tj[1], aat[0], aat[1], ai[0], ai[1])


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    if len(x) != len(y):
        raise ValueError("length mismatch")
    n = len(x)
    if n < 2:
        raise DegenerateInput("need at least two points")
    mx, my = math.fsum(x) / n, math.fsum(y) / n
    dx = [a - mx for a in x]
    dy = [b - my for b in y]
    sxx = math.fsum(a * a for a in dx)
    syy = math.fsum(b * b for b in dy)
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateInput("zero variance")
    r = math.fsum(a * b for a, b in zip(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


@dataclass(frozen=True)
class CorrelationCell:
    device_class: str
    feature: str
    r: float | None
    n_devices: int
    n_dropped: int
    note: str = ""


def correlation_report(
    accuracies: Mapping[str, float],
    features: Mapping[str, DeviceFeatures],
    classes: Mapping[str, DeviceClass],
    class_filter: Sequence[DeviceClass] = (DeviceClass.FLUTE, DeviceClass.CELLO),
) -> list[CorrelationCell]:
    """Pearson r of accuracy against every feature, per device class.

    Devices lacking either an accuracy or features are dropped and counted.
    """
    cells = []
    for cls in class_filter:
        members = sorted(d for d, c in classes.items() if c is cls)
        joined = [d for d in members if d in accuracies and d in features]
        dropped = len(members) - len(joined)
        acc = [accuracies[d] for d in joined]
        for name in FEATURE_NAMES:
            vals = [asdict(features[d])[name] for d in joined]
            try:
                r, note = pearson(acc, vals), ""
            except DegenerateInput as exc:
                r, note = None, f"degenerate: {exc}"
            cells.append(CorrelationCell(cls.value, name, r, len(joined), dropped, note))
    return cells


def write_correlations(cells: Sequence[CorrelationCell], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["class", "feature", "r", "n_devices"])
        for c in cells:
            w.writerow([c.device_class, c.feature, "" if c.r is None else f"{c.r:.6f}", c.n_devices])


def write_features(features: Mapping[str, DeviceFeatures], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["device", *FEATURE_NAMES])
        for dev in sorted(features):
            f = asdict(features[dev])
            w.writerow([dev, *(f"{f[k]:.3f}" for k in FEATURE_NAMES)])
