"""Synthetic association traces with known building-level entropy rates.

Each device walks a first-order Markov chain over campus buildings. A
visit lasts a log-normal dwell time inside the device's daily activity
window; during the visit the device re-associates periodically with APs
of that building (occasionally hopping to a neighbouring AP). The
entropy rate of every class chain is known in closed form and written to
a sidecar so estimators can be checked against it.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigInvalid
from .ingest import AssociationRecord, OuiMap
from .model import DeviceClass, is_weekend

# 2012-04-02 00:00 UTC, a Monday
DEFAULT_START = 1333324800
DAY = 86400


@dataclass(frozen=True)
class Building:
    name: str
    n_aps: int
    x: float
    y: float


def default_campus(n_buildings: int = 12, aps_per_building: int = 8, spacing_m: float = 150.0) -> list[Building]:
    side = math.ceil(math.sqrt(n_buildings))
    return [
        Building(f"b{i + 1}", aps_per_building, spacing_m * (i % side), spacing_m * (i // side))
        for i in range(n_buildings)
    ]


@dataclass(frozen=True)
class ClassModel:
    stay: float
    dwell_median_s: float
    dwell_sigma: float = 0.6
    stay_jitter: float = 0.0
    zipf: float = 1.0
    day_start_h: float = 8.0
    day_end_h: float = 18.0
    weekday_prob: float = 1.0
    weekend_prob: float = 0.5
    pingpong: float = 0.2
    oui: str = ""


FLUTE_MODEL = ClassModel(stay=0.6, dwell_median_s=1800, dwell_sigma=0.8, pingpong=0.3, oui="a4:5e:60")
CELLO_MODEL = ClassModel(stay=0.95, dwell_median_s=7200, dwell_sigma=0.5, pingpong=0.1,
                         weekend_prob=0.3, oui="3c:07:54")


@dataclass(frozen=True)
class SynthConfig:
    n_devices: dict = field(default_factory=lambda: {DeviceClass.FLUTE: 20, DeviceClass.CELLO: 20})
    campus: tuple = field(default_factory=lambda: tuple(default_campus()))
    models: dict = field(default_factory=lambda: {DeviceClass.FLUTE: FLUTE_MODEL, DeviceClass.CELLO: CELLO_MODEL})
    n_days: int = 14
    start_epoch: int = DEFAULT_START
    reassoc_s: int = 900
    session_cap_s: int = 4 * 3600
    travel_s: tuple = (60, 600)
    seed: int = 0

    def validate(self) -> None:
        if not self.campus:
            raise ConfigInvalid("campus has no buildings")
        if len({b.name for b in self.campus}) != len(self.campus):
            raise ConfigInvalid("duplicate building names")
        if any(b.n_aps < 1 for b in self.campus):
            raise ConfigInvalid("every building needs at least one AP")
        if self.n_days < 1 or self.reassoc_s <= 0 or self.session_cap_s <= 0:
            raise ConfigInvalid("n_days, reassoc_s and session_cap_s must be positive")
        for cls, n in self.n_devices.items():
            if n < 0:
                raise ConfigInvalid(f"negative device count for {cls}")
            if n and cls not in self.models:
                raise ConfigInvalid(f"no movement model for {cls}")
        ouis = [m.oui for m in self.models.values()]
        if len(set(ouis)) != len(ouis):
            raise ConfigInvalid("classes need distinct OUI prefixes")
        for cls, m in self.models.items():
            if not 0.0 <= m.stay <= 1.0:
                raise ConfigInvalid(f"{cls.value}: stay probability outside [0, 1]")
            if m.dwell_median_s <= 0 or m.dwell_sigma <= 0:
                raise ConfigInvalid(f"{cls.value}: dwell parameters must be positive")
            if not 0 <= m.day_start_h < m.day_end_h <= 24:
                raise ConfigInvalid(f"{cls.value}: bad activity window")
            P = transition_matrix(len(self.campus), m.stay, m.zipf)
            if not np.allclose(P.sum(axis=1), 1.0, atol=1e-9):
                raise ConfigInvalid(f"{cls.value}: transition rows do not sum to 1")


def transition_matrix(n: int, stay: float, zipf: float = 1.0) -> np.ndarray:
    """Stay with probability ``stay``; otherwise move to another building
    chosen with Zipf popularity weights."""
    if n == 1:
        return np.ones((1, 1))
    weights = 1.0 / np.arange(1, n + 1) ** zipf
    P = np.empty((n, n))
    for i in range(n):
        w = weights.copy()
        w[i] = 0.0
        P[i] = (1.0 - stay) * w / w.sum()
        P[i, i] = stay
    return P


def stationary_distribution(P: np.ndarray) -> np.ndarray:
    n = P.shape[0]
    # solve pi (P - I) = 0 with sum(pi) = 1
    A = np.vstack([(P - np.eye(n)).T, np.ones(n)])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(A, b, rcond=None)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def entropy_rate(P: np.ndarray) -> float:
    """Entropy rate in bits of a stationary Markov chain."""
    pi = stationary_distribution(P)
    with np.errstate(divide="ignore", invalid="ignore"):
        row_h = -np.where(P > 0, P * np.log2(P), 0.0).sum(axis=1)
    return float(pi @ row_h)


def simulate_chain(P: np.ndarray, n_steps: int, rng: np.random.Generator, start: int = 0) -> np.ndarray:
    cdf = np.cumsum(P, axis=1)
    u = rng.random(n_steps)
    out = np.empty(n_steps, dtype=np.int64)
    state = start
    for t in range(n_steps):
        out[t] = state
        state = min(int(np.searchsorted(cdf[state], u[t], side="right")), P.shape[0] - 1)
    return out


def _mac(prefix: str, value: int) -> str:
    return prefix + ":" + ":".join(f"{(value >> s) & 0xFF:02x}" for s in (16, 8, 0))


def ap_name(building: Building, ap: int) -> str:
    return f"{building.name}r{100 + ap}-ap-{ap + 1}"


def _ap_mac(b_index: int, ap: int) -> str:
    return f"00:1d:e5:{b_index & 0xFF:02x}:{ap & 0xFF:02x}:{(b_index * 7 + ap) & 0xFF:02x}"


def _device_records(config: SynthConfig, cls: DeviceClass, index: int, class_index: int) -> list[AssociationRecord]:
    model = config.models[cls]
    campus = config.campus
    nb = len(campus)
    rng = np.random.default_rng([config.seed, class_index, index])
    stay = model.stay
    if model.stay_jitter:
        stay = float(np.clip(stay + rng.uniform(-model.stay_jitter, model.stay_jitter), 0.0, 1.0))
    # each device gets its own building ranking; the chain is a relabeling of the class chain
    perm = rng.permutation(nb)
    P = transition_matrix(nb, stay, model.zipf)
    cdf = np.cumsum(P, axis=1)
    uuid = _mac(model.oui, index)
    ip = f"10.{class_index + 1}.{(index >> 8) & 0xFF}.{index & 0xFF}"
    state = 0
    mu = math.log(model.dwell_median_s)

    records = []
    for day in range(config.n_days):
        day0 = config.start_epoch + day * DAY
        weekend = is_weekend(day0)
        if rng.random() >= (model.weekend_prob if weekend else model.weekday_prob):
            continue
        t = day0 + int(model.day_start_h * 3600 + rng.uniform(0, 3600))
        day_end = day0 + int(model.day_end_h * 3600 + rng.uniform(-1800, 1800))
        while t < day_end:
            dwell = float(rng.lognormal(mu, model.dwell_sigma))
            visit_end = min(t + max(int(dwell), 60), day_end)
            building = campus[perm[state]]
            ap = int(rng.integers(building.n_aps))
            rec_t = t
            while rec_t < visit_end:
                lease_end = rec_t + min(visit_end - rec_t, config.session_cap_s)
                records.append(AssociationRecord(
                    ip, uuid, ap_name(building, ap), _ap_mac(int(perm[state]), ap), int(rec_t), int(lease_end)))
                rec_t += config.reassoc_s
                if building.n_aps > 1 and rng.random() < model.pingpong:
                    ap = (ap + 1 + int(rng.integers(building.n_aps - 1))) % building.n_aps
            state = min(int(np.searchsorted(cdf[state], rng.random(), side="right")), nb - 1)
            t = visit_end + int(rng.integers(config.travel_s[0], config.travel_s[1] + 1))
    return records


@dataclass
class SynthOutput:
    records: list
    device_classes: dict
    oui_map: OuiMap
    ground_truth: dict  # class -> (entropy rate, transition matrix)
    coords: dict


def generate(config: SynthConfig) -> SynthOutput:
    config.validate()
    records: list[AssociationRecord] = []
    classes: dict[str, DeviceClass] = {}
    oui = OuiMap()
    truth = {}
    order = [c for c in (DeviceClass.FLUTE, DeviceClass.CELLO, DeviceClass.OTHER) if c in config.models]
    for class_index, cls in enumerate(order):
        model = config.models[cls]
        if cls is not DeviceClass.OTHER:
            oui.add(model.oui, cls)
        P = transition_matrix(len(config.campus), model.stay, model.zipf)
        truth[cls] = (entropy_rate(P), P)
        for i in range(config.n_devices.get(cls, 0)):
            recs = _device_records(config, cls, i, class_index)
            if recs:
                classes[recs[0].uuid] = cls
            records.extend(recs)
    records.sort(key=lambda r: (r.lease_begin, r.uuid, r.ap_name))
    coords = {b.name: (b.x, b.y) for b in config.campus}
    return SynthOutput(records, classes, oui, truth, coords)


def write_output(out: SynthOutput, config: SynthConfig, directory: Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / "trace.txt", "w") as fh:
        fh.write("# user_ip,uuid,ap_name,ap_mac,lease_begin,lease_end\n")
        for r in out.records:
            fh.write(r.to_line() + "\n")
    out.oui_map.dump(directory / "oui_map.csv")
    names = [b.name for b in config.campus]
    with open(directory / "ground_truth.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["class", "quantity", "from", "to", "value"])
        for cls, (rate, P) in out.ground_truth.items():
            w.writerow([cls.value, "entropy_rate_bits", "", "", f"{rate:.6f}"])
            w.writerow([cls.value, "stay", "", "", f"{config.models[cls].stay:.6f}"])
            for i, a in enumerate(names):
                for j, b in enumerate(names):
                    w.writerow([cls.value, "transition", a, b, f"{P[i, j]:.9f}"])
    with open(directory / "coords.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["building", "x_m", "y_m"])
        for name, (x, y) in out.coords.items():
            w.writerow([name, f"{x:.1f}", f"{y:.1f}"])


def read_ground_truth(path: Path) -> dict[str, float]:
    with open(path, newline="") as fh:
        return {row["class"]: float(row["value"]) for row in csv.DictReader(fh)
                if row["quantity"] == "entropy_rate_bits"}

