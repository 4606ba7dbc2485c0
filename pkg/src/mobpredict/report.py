"""Assemble a report directory from matrix, ECDF, entropy and correlation
results."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Sequence

from . import __version__
from .entropy import ENTROPY_FIELDS, EntropyReport
from .errors import IoFailure
from .features import CorrelationCell, write_correlations
from .harness import CLASSES, DeviceResult, MatrixRow, ecdf, median, write_matrix, write_runtimes
from .model import SpatialResolution

RUN_META = "run_meta.json"


def prepare_dir(path: Path, force: bool = False) -> Path:
    path = Path(path)
    if path.exists() and any(path.iterdir()) and not force:
        raise IoFailure(f"{path} is not empty; pass --force to overwrite")
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(str(exc)) from None
    return path


def ecdf_table(
    results: Sequence[DeviceResult], method: str, seq_len: int
) -> dict[tuple[str, str], list[float]]:
    """Per (class, spatial) accuracies of one method, all windows pooled."""
    pools: dict[tuple[str, str], list[float]] = {}
    for r in results:
        if r.method == method and r.seq_len == seq_len:
            pools.setdefault((r.device_class.value, r.spatial.value), []).append(r.accuracy)
    return pools


def write_ecdf(values: Sequence[float], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["accuracy", "fraction", "median"])
        med = median(values)
        for v, frac in ecdf(values):
            w.writerow([f"{v:.6f}", f"{frac:.6f}", f"{med:.6f}"])


def write_entropy(entropy: Sequence[tuple[SpatialResolution, int, EntropyReport]], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ENTROPY_FIELDS + ["spatial", "window_s"])
        for spatial, window, r in sorted(entropy, key=lambda e: (e[0].value, e[1], e[2].device)):
            w.writerow([r.device, r.device_class, r.n_symbols, r.n_locations,
                        *(f"{x:.6f}" for x in (r.s_unc, r.s_lz, r.s_bwt, r.pi_unc, r.pi_lz, r.pi_bwt)),
                        spatial.value, window])


def report(
    out_dir: Path,
    rows: Sequence[MatrixRow] = (),
    device_results: Sequence[DeviceResult] = (),
    entropy: Sequence[tuple[SpatialResolution, int, EntropyReport]] = (),
    correlations: Sequence[CorrelationCell] = (),
    meta: dict | None = None,
    ecdf_method: str = "LSTM",
    ecdf_seq_len: int = 40,
    force: bool = False,
) -> Path:
    if not (rows or device_results or entropy or correlations):
        raise IoFailure("nothing to report")
    out = prepare_dir(out_dir, force)
    notes = []
    written = []
    try:
        if rows:
            write_matrix(rows, out / "matrix.csv")
            write_runtimes(rows, out / "runtimes.csv")
            written += ["matrix.csv", "runtimes.csv"]
        else:
            notes.append("no matrix rows; matrix.csv and runtimes.csv omitted")
        pools = ecdf_table(device_results, ecdf_method, ecdf_seq_len)
        if pools:
            for cls in CLASSES:
                for spatial in SpatialResolution:
                    values = pools.get((cls.value, spatial.value))
                    if values:
                        name = f"ecdf_{cls.value}_{spatial.value}.csv"
                        write_ecdf(values, out / name)
                        written.append(name)
        else:
            notes.append(f"no {ecdf_method} results at seq_len {ecdf_seq_len}; ECDF files omitted")
        if entropy:
            write_entropy(entropy, out / "entropy.csv")
            written.append("entropy.csv")
        else:
            notes.append("no entropy reports; entropy.csv omitted")
        if correlations:
            write_correlations(correlations, out / "correlations.csv")
            written.append("correlations.csv")
        else:
            notes.append("no correlations; correlations.csv omitted")
        run_meta = {
            "version": __version__,
            "config": meta or {},
            "files": written,
            "notes": notes,
            "ecdf": {"method": ecdf_method, "seq_len": ecdf_seq_len},
        }
        (out / RUN_META).write_text(json.dumps(run_meta, indent=2, sort_keys=True, default=str) + "\n")
    except OSError as exc:
        raise IoFailure(str(exc)) from None
    return out
