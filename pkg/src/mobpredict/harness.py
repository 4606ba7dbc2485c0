"""Online next-location evaluation and the device-class x resolution x
method x sequence-length experiment matrix."""

from __future__ import annotations

import csv
import logging
import statistics
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .discretize import DiscretizerConfig, discretize
from .entropy import EntropyReport, entropy_report
from .errors import ColdModel, EmptyInput, MobPredictError, SeriesTooShort
from .ingest import AssociationRecord
from .markov import MarkovModel
from .model import UNKNOWN, DeviceClass, DiscreteSeries, SpatialResolution
from .neural import NeuralConfig, make_model

log = logging.getLogger(__name__)

PREDICTOR_METHODS = ("MC", "LSTM", "CNN")
BOUND_METHODS = ("LZ", "BWT")
ALL_METHODS = PREDICTOR_METHODS + BOUND_METHODS
NEURAL_METHODS = ("LSTM", "CNN")
CLASSES = (DeviceClass.FLUTE, DeviceClass.CELLO)


@dataclass(frozen=True)
class EvalConfig:
    methods: tuple = ALL_METHODS
    seq_lens: tuple = (5, 10, 20, 40)
    windows: tuple = (300, 900, 1800, 3600, 7200)
    spatial: tuple = (SpatialResolution.ACCESS_POINT, SpatialResolution.BUILDING)
    t_max_s: int = 3600
    building_pattern: str = r"b\d+"
    nn: NeuralConfig = field(default_factory=NeuralConfig)
    nn_device_sample: int = 50
    skip_unknown_targets: bool = True
    transitions_only: bool = False
    # with skipped Unknown targets, predicting Unknown can never score; rank real locations only
    predict_known_only: bool = True
    entropy_keep_unknown: bool = False
    bwt_segments: int | None = None
    seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        bad = [m for m in self.methods if m not in ALL_METHODS]
        if bad:
            raise ValueError(f"unknown methods {bad}")
        if any(k < 1 for k in self.seq_lens) or any(w <= 0 for w in self.windows):
            raise ValueError("sequence lengths and windows must be positive")


@dataclass(frozen=True)
class MatrixRow:
    device_class: DeviceClass
    spatial: SpatialResolution
    window_s: int
    method: str
    seq_len: int  # 0 for the entropy bounds, which do not use a context window
    n_devices: int
    median_acc: float  # percent
    mean_acc: float  # percent
    wall_time_s: float


@dataclass(frozen=True)
class DeviceResult:
    device: str
    device_class: DeviceClass
    spatial: SpatialResolution
    window_s: int
    method: str
    seq_len: int
    accuracy: float  # fraction; predictability bound for LZ/BWT
    seconds: float


@dataclass
class MatrixResult:
    rows: list[MatrixRow]
    device_results: list[DeviceResult]
    entropy: list[tuple[SpatialResolution, int, EntropyReport]]
    skipped: dict = field(default_factory=dict)  # (spatial, window, method, k) -> count


# -- online evaluation -------------------------------------------------------------


def evaluate_device(
    series: DiscreteSeries | Sequence[int],
    predictor,
    k: int,
    skip_unknown_targets: bool = True,
    transitions_only: bool = False,
    predict_known_only: bool = False,
) -> float:
    """Fraction of correctly predicted next symbols, predicting from the
    previous ``k`` symbols and then revealing the truth to the predictor.

    ``predictor`` needs ``predict(window)`` and ``update(window, target)``;
    a ``predict_then_update`` method is used instead when available.
    With ``predict_known_only`` the predictor is asked never to answer
    Unknown (both accept an ``exclude`` symbol).
    """
    symbols = series.symbols if isinstance(series, DiscreteSeries) else tuple(series)
    n = len(symbols)
    if n <= k:
        raise SeriesTooShort(f"series of length {n} cannot be evaluated with k={k}")
    fused = getattr(predictor, "predict_then_update", None)
    exclude = UNKNOWN if predict_known_only else None
    correct = attempted = 0
    for t in range(k, n):
        window = symbols[t - k:t]
        target = symbols[t]
        scored = not (skip_unknown_targets and target == UNKNOWN)
        if transitions_only and target == symbols[t - 1]:
            scored = False
        if fused is not None:
            pred = fused(window, target, exclude)
        else:
            try:
                pred = predictor.predict(window, exclude)
            except ColdModel:
                pred = None
            predictor.update(window, target)
        if scored:
            attempted += 1
            correct += pred == target
    if attempted == 0:
        raise SeriesTooShort("no scorable targets in series")
    return correct / attempted


def device_seed(seed: int, device: str, method: str, k: int) -> int:
    return zlib.crc32(f"{seed}|{device}|{method}|{k}".encode())


def make_predictor(method: str, series: DiscreteSeries, k: int, config: EvalConfig):
    if method == "MC":
        return MarkovModel(k)
    if method in NEURAL_METHODS:
        nn_cfg = config.nn.with_(arch=method.lower(), seq_len=k,
                                 seed=device_seed(config.nn.seed, series.device, method, k))
        return make_model(len(series.alphabet), nn_cfg)
    raise ValueError(f"{method} is not a predictor")


# -- matrix ------------------------------------------------------------------------


def neural_sample(devices: Mapping[str, DeviceClass], n_per_class: int, seed: int) -> set[str]:
    """Deterministic per-class sample of devices for the neural predictors."""
    rng = np.random.default_rng(seed)
    chosen = set()
    for cls in CLASSES:
        members = sorted(d for d, c in devices.items() if c is cls)
        if len(members) <= n_per_class:
            chosen.update(members)
        else:
            idx = rng.choice(len(members), size=n_per_class, replace=False)
            chosen.update(members[i] for i in sorted(idx))
    return chosen


def _device_task(series: DiscreteSeries, config: EvalConfig, run_neural: bool):
    results, skipped, report = [], [], None
    base = (series.device, series.device_class, series.spatial, series.window_s)
    for method in config.methods:
        if method in BOUND_METHODS:
            continue
        if method in NEURAL_METHODS and not run_neural:
            continue
        for k in config.seq_lens:
            t0 = time.perf_counter()
            try:
                predictor = make_predictor(method, series, k, config)
                acc = evaluate_device(series, predictor, k, config.skip_unknown_targets,
                                      config.transitions_only, config.predict_known_only)
            except MobPredictError as exc:
                log.debug("%s %s k=%d skipped: %s", series.device, method, k, exc)
                skipped.append((method, k))
                continue
            results.append(DeviceResult(*base, method, k, acc, time.perf_counter() - t0))
    bounds = [m for m in config.methods if m in BOUND_METHODS]
    if bounds:
        t0 = time.perf_counter()
        try:
            report = entropy_report(series, config.entropy_keep_unknown, config.bwt_segments)
        except MobPredictError as exc:
            log.debug("%s entropy skipped: %s", series.device, exc)
            skipped.extend((m, 0) for m in bounds)
        else:
            dt = time.perf_counter() - t0
            values = {"LZ": report.pi_lz, "BWT": report.pi_bwt}
            for m in bounds:
                results.append(DeviceResult(*base, m, 0, values[m], dt))
    return results, skipped, report


def _run_task(args):
    return _device_task(*args)


def run_matrix(
    series_by_resolution: Mapping[tuple[SpatialResolution, int], Sequence[DiscreteSeries]],
    config: EvalConfig,
) -> MatrixResult:
    """Evaluate every requested method on every series and aggregate per
    (class, spatial, window, method, k). Per-device failures are counted,
    never fatal."""
    devices = {s.device: s.device_class for group in series_by_resolution.values() for s in group}
    nn_devices = neural_sample(devices, config.nn_device_sample, config.seed)
    tasks = []
    for (spatial, window), group in sorted(series_by_resolution.items(), key=lambda kv: (kv[0][0].value, kv[0][1])):
        for s in sorted(group, key=lambda s: s.device):
            if s.device_class in CLASSES:
                tasks.append((s, config, s.device in nn_devices))

    if config.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            outputs = list(pool.map(_run_task, tasks, chunksize=1))
    else:
        outputs = [_run_task(t) for t in tasks]

    device_results: list[DeviceResult] = []
    entropy: list[tuple[SpatialResolution, int, EntropyReport]] = []
    skipped: dict = {}
    for (s, _, _), (results, skips, report) in zip(tasks, outputs):
        device_results.extend(results)
        if report is not None:
            entropy.append((s.spatial, s.window_s, report))
        for method, k in skips:
            key = (s.spatial, s.window_s, method, k)
            skipped[key] = skipped.get(key, 0) + 1
    return MatrixResult(aggregate(device_results), device_results, entropy, skipped)


def aggregate(results: Iterable[DeviceResult]) -> list[MatrixRow]:
    groups: dict[tuple, list[DeviceResult]] = {}
    for r in results:
        groups.setdefault((r.device_class, r.spatial, r.window_s, r.method, r.seq_len), []).append(r)
    rows = []
    for (cls, spatial, window, method, k), rs in groups.items():
        acc = [100.0 * r.accuracy for r in rs]
        rows.append(MatrixRow(cls, spatial, window, method, k, len(rs), statistics.median(acc),
                              statistics.fmean(acc), sum(r.seconds for r in rs)))
    rows.sort(key=_row_key)
    return rows


def _row_key(r: MatrixRow):
    return (r.spatial.value, r.window_s, ALL_METHODS.index(r.method), r.seq_len, r.device_class.value)


def class_diffs(rows: Iterable[MatrixRow]) -> dict[tuple, float]:
    """Cello minus Flute median accuracy per (spatial, window, method, k)."""
    by_key: dict[tuple, dict[DeviceClass, float]] = {}
    for r in rows:
        by_key.setdefault((r.spatial, r.window_s, r.method, r.seq_len), {})[r.device_class] = r.median_acc
    return {
        key: v[DeviceClass.CELLO] - v[DeviceClass.FLUTE]
        for key, v in by_key.items()
        if DeviceClass.CELLO in v and DeviceClass.FLUTE in v
    }


# -- pipeline helpers --------------------------------------------------------------


def build_series(
    records_by_device: Mapping[str, Sequence[AssociationRecord]],
    classes: Mapping[str, DeviceClass],
    config: EvalConfig,
) -> dict[tuple[SpatialResolution, int], list[DiscreteSeries]]:
    out = {}
    for spatial in config.spatial:
        for window in config.windows:
            dcfg = DiscretizerConfig(window_s=window, t_max_s=config.t_max_s, spatial=spatial,
                                     building_pattern=config.building_pattern)
            out[(spatial, window)] = [
                discretize(records_by_device[d], dcfg, classes[d], d) for d in sorted(records_by_device)
            ]
    return out


# -- distributions -----------------------------------------------------------------


def ecdf(values: Sequence[float]) -> list[tuple[float, float]]:
    """Points ``(v, fraction of values <= v)`` at every distinct value."""
    if len(values) == 0:
        raise EmptyInput("ECDF of no values")
    xs = sorted(values)
    n = len(xs)
    points = []
    for i, v in enumerate(xs, 1):
        if points and points[-1][0] == v:
            points[-1] = (v, i / n)
        else:
            points.append((v, i / n))
    return points


def median(values: Sequence[float]) -> float:
    if len(values) == 0:
        raise EmptyInput("median of no values")
    return statistics.median(values)


# -- persistence -------------------------------------------------------------------

MATRIX_FIELDS = ["spatial", "window_s", "method", "seq_len", "flute_n", "flute_median", "flute_mean",
                 "cello_n", "cello_median", "cello_mean", "diff"]
ACCURACY_FIELDS = ["device", "class", "spatial", "window_s", "method", "seq_len", "accuracy", "seconds"]


def write_matrix(rows: Sequence[MatrixRow], path: Path) -> None:
    """Wide table, one line per (spatial, window, method, k) with both classes
    side by side; percentages with two decimals."""
    cells: dict[tuple, dict[DeviceClass, MatrixRow]] = {}
    for r in rows:
        cells.setdefault((r.spatial.value, r.window_s, ALL_METHODS.index(r.method), r.seq_len), {})[r.device_class] = r
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MATRIX_FIELDS)
        for key in sorted(cells):
            c = cells[key]
            spatial, window, m, k = key
            line = [spatial, window, ALL_METHODS[m], k if k else "-"]
            for cls in CLASSES:
                r = c.get(cls)
                line += [r.n_devices, f"{r.median_acc:.2f}", f"{r.mean_acc:.2f}"] if r else [0, "", ""]
            if DeviceClass.FLUTE in c and DeviceClass.CELLO in c:
                line.append(f"{c[DeviceClass.CELLO].median_acc - c[DeviceClass.FLUTE].median_acc:+.2f}")
            else:
                line.append("")
            w.writerow(line)


def write_accuracies(results: Sequence[DeviceResult], path: Path) -> None:
    ordered = sorted(results, key=lambda r: (r.spatial.value, r.window_s, ALL_METHODS.index(r.method),
                                             r.seq_len, r.device))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ACCURACY_FIELDS)
        for r in ordered:
            w.writerow([r.device, r.device_class.value, r.spatial.value, r.window_s, r.method,
                        r.seq_len, f"{r.accuracy:.6f}", f"{r.seconds:.4f}"])


def read_accuracies(path: Path) -> list[DeviceResult]:
    with open(path, newline="") as fh:
        return [
            DeviceResult(row["device"], DeviceClass.parse(row["class"]), SpatialResolution.parse(row["spatial"]),
                         int(row["window_s"]), row["method"], int(row["seq_len"]), float(row["accuracy"]),
                         float(row.get("seconds") or 0.0))
            for row in csv.DictReader(fh)
        ]


def write_runtimes(rows: Sequence[MatrixRow], path: Path) -> None:
    totals: dict[str, float] = {}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["class", "spatial", "window_s", "method", "seq_len", "n_devices", "wall_time_s"])
        for r in rows:
            totals[r.method] = totals.get(r.method, 0.0) + r.wall_time_s
            w.writerow([r.device_class.value, r.spatial.value, r.window_s, r.method, r.seq_len,
                        r.n_devices, f"{r.wall_time_s:.3f}"])
        for method in ALL_METHODS:
            if method in totals:
                w.writerow(["all", "all", "all", method, "all", "", f"{totals[method]:.3f}"])
