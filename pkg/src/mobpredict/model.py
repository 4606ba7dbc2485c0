"""Domain types shared across stages: device classes, resolutions,
location alphabets and the discrete-time location series."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import MobPredictError

UNKNOWN = 0
UNKNOWN_NAME = "?"

CANONICAL_WINDOWS = (300, 900, 1800, 3600, 7200)
SECONDS_PER_DAY = 86400


def local_day(t: int, tz_offset_s: int = 0) -> int:
    return (t + tz_offset_s) // SECONDS_PER_DAY


def is_weekend(t: int, tz_offset_s: int = 0) -> bool:
    # day 0 of the epoch was a Thursday
    return (local_day(t, tz_offset_s) + 3) % 7 >= 5


class DeviceClass(enum.Enum):
    FLUTE = "flute"
    CELLO = "cello"
    OTHER = "other"

    @classmethod
    def parse(cls, text: str) -> "DeviceClass":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise MobPredictError(f"unknown device class {text!r}") from None

    @property
    def label(self) -> str:
        return self.value.capitalize()


class SpatialResolution(enum.Enum):
    ACCESS_POINT = "ap"
    BUILDING = "building"

    @classmethod
    def parse(cls, text: str) -> "SpatialResolution":
        text = text.strip().lower()
        if text in ("bldg", "b"):
            text = "building"
        try:
            return cls(text)
        except ValueError:
            raise MobPredictError(f"unknown spatial resolution {text!r}") from None


@dataclass(frozen=True)
class TemporalResolution:
    window_w: int

    def __post_init__(self):
        if self.window_w <= 0:
            raise MobPredictError(f"window must be positive, got {self.window_w}")

    @classmethod
    def canonical(cls) -> list["TemporalResolution"]:
        return [cls(w) for w in CANONICAL_WINDOWS]

    def __str__(self) -> str:
        w = self.window_w
        if w % 3600 == 0:
            return f"{w // 3600}h"
        if w % 60 == 0:
            return f"{w // 60}min"
        return f"{w}s"


class LocationAlphabet:
    """Dense symbol ids for location names; id 0 is reserved for Unknown."""

    def __init__(self, names: Iterable[str] = ()):
        self._names: list[str] = [UNKNOWN_NAME]
        self._ids: dict[str, int] = {}
        for name in names:
            self.intern(name)

    def intern(self, location_name: str) -> int:
        if not location_name:
            raise ValueError("location name must be non-empty")
        if location_name == UNKNOWN_NAME:
            raise ValueError(f"{UNKNOWN_NAME!r} is reserved for the unknown state")
        sid = self._ids.get(location_name)
        if sid is None:
            sid = len(self._names)
            self._names.append(location_name)
            self._ids[location_name] = sid
        return sid

    def id_of(self, location_name: str) -> int:
        if location_name == UNKNOWN_NAME:
            return UNKNOWN
        return self._ids[location_name]

    def name_of(self, sid: int) -> str:
        return self._names[sid]

    @property
    def names(self) -> list[str]:
        """Physical location names in id order (Unknown excluded)."""
        return self._names[1:]

    def __len__(self) -> int:
        return len(self._names)

    def __contains__(self, location_name: str) -> bool:
        return location_name in self._ids

    def __repr__(self) -> str:
        return f"LocationAlphabet({self.names!r})"


def alphabet_intern(location_name: str, alphabet: LocationAlphabet) -> int:
    return alphabet.intern(location_name)


@dataclass(frozen=True)
class DiscreteSeries:
    """Uniformly sampled location sequence of one device.

    ``symbols[i]`` covers ``[start_time + i*w, start_time + (i+1)*w)``.
    """

    device: str
    device_class: DeviceClass
    spatial: SpatialResolution
    temporal: TemporalResolution
    start_time: int
    symbols: tuple[int, ...]
    alphabet: LocationAlphabet = field(compare=False, repr=False)

    def __post_init__(self):
        n = len(self.alphabet)
        for s in self.symbols:
            if not 0 <= s < n:
                raise MobPredictError(f"symbol {s} outside alphabet of size {n}")

    @property
    def window_s(self) -> int:
        return self.temporal.window_w

    def __len__(self) -> int:
        return len(self.symbols)

    def names(self) -> list[str]:
        return [self.alphabet.name_of(s) for s in self.symbols]

    def known_symbols(self) -> list[int]:
        return [s for s in self.symbols if s != UNKNOWN]

    def n_locations(self) -> int:
        return len(set(self.known_symbols()))

    def interval(self, i: int) -> tuple[int, int]:
        w = self.window_s
        return self.start_time + i * w, self.start_time + (i + 1) * w


def expected_length(span_start: int, span_end: int, w: int) -> int:
    return math.ceil((span_end - span_start) / w)


# -- columnar text format ------------------------------------------------------
# first line: device,class,spatial,window_s,start_epoch
# then one location name per line, "?" for Unknown


def dumps_series(series: DiscreteSeries) -> str:
    head = ",".join(
        [
            series.device,
            series.device_class.value,
            series.spatial.value,
            str(series.window_s),
            str(series.start_time),
        ]
    )
    return "\n".join([head, *series.names()]) + "\n"


def loads_series(text: str) -> DiscreteSeries:
    lines = text.splitlines()
    if not lines:
        raise MobPredictError("empty series file")
    parts = lines[0].split(",")
    if len(parts) != 5:
        raise MobPredictError(f"bad series header {lines[0]!r}")
    device, cls, spatial, window_s, start = parts
    alphabet = LocationAlphabet()
    symbols = []
    for name in lines[1:]:
        name = name.strip()
        if not name:
            continue
        symbols.append(UNKNOWN if name == UNKNOWN_NAME else alphabet.intern(name))
    return DiscreteSeries(
        device=device,
        device_class=DeviceClass.parse(cls),
        spatial=SpatialResolution.parse(spatial),
        temporal=TemporalResolution(int(window_s)),
        start_time=int(start),
        symbols=tuple(symbols),
        alphabet=alphabet,
    )


def write_series(series: DiscreteSeries, path: Path) -> None:
    Path(path).write_text(dumps_series(series))


def read_series(path: Path) -> DiscreteSeries:
    return loads_series(Path(path).read_text())


def series_filename(series: DiscreteSeries) -> str:
    return series.device.replace(":", "-") + ".series"


def make_series(
    device: str,
    device_class: DeviceClass,
    spatial: SpatialResolution,
    window_s: int,
    start_time: int,
    names: Sequence[str | None],
) -> DiscreteSeries:
    """Build a series from location names (``None`` or ``"?"`` for Unknown)."""
    alphabet = LocationAlphabet()
    symbols = tuple(
        UNKNOWN if name in (None, UNKNOWN_NAME) else alphabet.intern(name) for name in names
    )
    return DiscreteSeries(
        device, device_class, spatial, TemporalResolution(window_s), start_time, symbols, alphabet
    )
