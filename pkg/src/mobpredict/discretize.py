"""Association intervals -> uniformly sampled location series.

Each association at location l and time t claims the device for
``[t, min(next association, t + t_max))``; anything not claimed is the
Unknown state. Every sampling window is then represented by the location
holding the largest share of the window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import EmptyTrace
from .ingest import DEFAULT_BUILDING_PATTERN, AssociationRecord, building_or_fallback
from .model import (
    UNKNOWN,
    DeviceClass,
    DiscreteSeries,
    LocationAlphabet,
    SpatialResolution,
    TemporalResolution,
)

DEFAULT_T_MAX = 3600
SECONDS_PER_DAY = 86400


@dataclass(frozen=True)
class DiscretizerConfig:
    window_s: int = 900
    t_max_s: int = DEFAULT_T_MAX
    spatial: SpatialResolution = SpatialResolution.ACCESS_POINT
    building_pattern: str = DEFAULT_BUILDING_PATTERN
    calendar_anchor: bool = False
    tz_offset_s: int = 0

    def __post_init__(self):
        if self.window_s <= 0 or self.t_max_s <= 0:
            raise ValueError("window and t_max must be positive")

    def location_of(self, record: AssociationRecord) -> str:
        if self.spatial is SpatialResolution.BUILDING:
            return building_or_fallback(record.ap_name, self.building_pattern)
        return record.ap_name


@dataclass(frozen=True, slots=True)
class OccupancyInterval:
    location: int
    begin: int
    end: int


def normalize_intervals(
    records: Sequence[AssociationRecord],
    config: DiscretizerConfig,
    alphabet: LocationAlphabet | None = None,
) -> list[OccupancyInterval]:
    """Occupancy intervals of one device, non-overlapping and time ordered.

    Locations are interned into ``alphabet`` (a fresh one when omitted) in
    order of first association.
    """
    if alphabet is None:
        alphabet = LocationAlphabet()
    events = sorted((r.lease_begin, config.location_of(r)) for r in records)
    out: list[OccupancyInterval] = []
    for i, (t, name) in enumerate(events):
        loc = alphabet.intern(name)
        end = t + config.t_max_s
        if i + 1 < len(events):
            end = min(end, events[i + 1][0])
        if end <= t:
            continue
        if out and out[-1].location == loc and out[-1].end == t:
            out[-1] = OccupancyInterval(loc, out[-1].begin, end)
        else:
            out.append(OccupancyInterval(loc, t, end))
    return out


def _pick(weights: dict[int, list[int]]) -> int:
    # weights: loc -> [seconds inside window, earliest start inside window]
    if not weights:
        return UNKNOWN
    return min(weights, key=lambda loc: (-weights[loc][0], weights[loc][1], loc))


def step_value(window: tuple[int, int], intervals: Iterable[OccupancyInterval]) -> int:
    """Location with the most occupancy inside ``[t0, t1)``.

    Ties go to the location occupying earliest in the window, then to the
    smaller id; no overlap at all gives Unknown.
    """
    t0, t1 = window
    weights: dict[int, list[int]] = {}
    for iv in intervals:
        lo, hi = max(iv.begin, t0), min(iv.end, t1)
        if hi <= lo:
            continue
        entry = weights.setdefault(iv.location, [0, lo])
        entry[0] += hi - lo
        entry[1] = min(entry[1], lo)
    return _pick(weights)


def window_start(t: int, config: DiscretizerConfig) -> int:
    w = config.window_s
    tz = config.tz_offset_s
    if config.calendar_anchor:
        return (t + tz) // SECONDS_PER_DAY * SECONDS_PER_DAY - tz
    return (t + tz) // w * w - tz


def sample_intervals(intervals: Sequence[OccupancyInterval], start: int, w: int) -> list[int]:
    """Step values for consecutive windows of width ``w`` from ``start``
    until the last interval ends."""
    if not intervals:
        return []
    end = max(iv.end for iv in intervals)
    n = math.ceil((end - start) / w)
    per_window: list[dict[int, list[int]]] = [{} for _ in range(n)]
    for iv in intervals:
        first = (iv.begin - start) // w
        last = (iv.end - 1 - start) // w
        for i in range(first, last + 1):
            t0 = start + i * w
            lo, hi = max(iv.begin, t0), min(iv.end, t0 + w)
            entry = per_window[i].setdefault(iv.location, [0, lo])
            entry[0] += hi - lo
            if lo < entry[1]:
                entry[1] = lo
    return [_pick(weights) for weights in per_window]


def discretize(
    records: Sequence[AssociationRecord],
    config: DiscretizerConfig,
    device_class: DeviceClass = DeviceClass.OTHER,
    device: str | None = None,
) -> DiscreteSeries:
    if not records:
        raise EmptyTrace("no records for device")
    if device is None:
        device = records[0].uuid
    alphabet = LocationAlphabet()
    intervals = normalize_intervals(records, config, alphabet)
    if not intervals:
        raise EmptyTrace(f"no occupancy for device {device}")
    start = window_start(min(r.lease_begin for r in records), config)
    symbols = sample_intervals(intervals, start, config.window_s)
    return DiscreteSeries(
        device=device,
        device_class=device_class,
        spatial=config.spatial,
        temporal=TemporalResolution(config.window_s),
        start_time=start,
        symbols=tuple(symbols),
        alphabet=alphabet,
    )
