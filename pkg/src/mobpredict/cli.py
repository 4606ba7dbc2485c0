"""Command line entry point: ``mobpredict <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, replace
from pathlib import Path

from . import __version__
from .config import eval_config, load_config, synth_config
from .discretize import DiscretizerConfig, discretize
from .entropy import entropy_report, write_entropy_csv
from .errors import ConfigInvalid, MalformedLine, MobPredictError
from .features import Calendar, compute_features, correlation_report, load_coords, write_correlations, write_features
from .harness import (
    aggregate,
    build_series,
    read_accuracies,
    run_matrix,
    write_accuracies,
    write_matrix,
    write_runtimes,
)
from .ingest import (
    OuiMap,
    filter_population,
    group_by_device,
    load_records,
    read_summaries,
    summarize,
    write_records,
    write_summaries,
)
from .model import DeviceClass, SpatialResolution, read_series, series_filename, write_series
from .report import prepare_dir, report
from .synth import generate, write_output

log = logging.getLogger("mobpredict")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _population(args, cfg) -> tuple[dict, set]:
    """Device classes and the kept population from a summaries CSV."""
    summaries = read_summaries(args.devices)
    classes = {s.device: s.device_class for s in summaries}
    if args.population:
        keep = {line.strip() for line in Path(args.population).read_text().splitlines() if line.strip()}
    else:
        keep = set(filter_population(
            summaries,
            min_days=int(cfg.get("ingest.min_days", 7)),
            min_aps_exclusive=int(cfg.get("ingest.min_aps", 5)),
        ))
    return classes, keep


def cmd_synth(args, cfg):
    out = prepare_dir(args.out, args.force)
    scfg = synth_config(cfg, args.seed)
    result = generate(scfg)
    write_output(result, scfg, out)
    print(f"wrote {len(result.records)} records for {len(result.device_classes)} devices to {out}")


def cmd_ingest(args, cfg):
    out = prepare_dir(args.out, args.force)
    errors: list[MalformedLine] = []
    records = load_records(args.traces, errors)
    write_records(records, out / "records.txt")
    with open(out / "ingest_errors.txt", "w") as fh:
        for e in errors:
            fh.write(f"{e}\n")
    print(f"{len(records)} records, {len(errors)} malformed lines skipped")


def cmd_summarize(args, cfg):
    out = prepare_dir(args.out, args.force)
    records = load_records([args.records])
    oui = OuiMap.load(args.oui)
    summaries = summarize(records, oui, int(cfg.get("tz_offset_s", 0)))
    write_summaries(summaries, out / "devices.csv")
    keep = filter_population(
        summaries,
        min_days=int(cfg.get("ingest.min_days", 7)),
        min_aps_exclusive=int(cfg.get("ingest.min_aps", 5)),
    )
    (out / "population.txt").write_text("".join(d + "\n" for d in keep))
    print(f"{len(summaries)} devices summarized, {len(keep)} kept")


def cmd_discretize(args, cfg):
    out = prepare_dir(args.out, args.force)
    classes, keep = _population(args, cfg)
    dcfg = DiscretizerConfig(
        window_s=args.window,
        t_max_s=args.tmax,
        spatial=SpatialResolution.parse(args.spatial),
        building_pattern=cfg.get("ingest.building_pattern", DiscretizerConfig.building_pattern),
        tz_offset_s=int(cfg.get("tz_offset_s", 0)),
    )
    by_dev = group_by_device(load_records([args.records]))
    n = 0
    for dev in sorted(keep):
        if dev not in by_dev:
            continue
        series = discretize(by_dev[dev], dcfg, classes.get(dev, DeviceClass.OTHER), dev)
        write_series(series, out / series_filename(series))
        n += 1
    print(f"wrote {n} series to {out}")


def cmd_entropy(args, cfg):
    out = prepare_dir(args.out, args.force)
    ecfg = eval_config(cfg)
    reports, failed = [], 0
    for path in sorted(Path(args.series).glob("*.series")):
        try:
            reports.append(entropy_report(read_series(path), ecfg.entropy_keep_unknown, ecfg.bwt_segments))
        except MobPredictError as exc:
            log.warning("%s: %s", path.name, exc)
            failed += 1
    write_entropy_csv(reports, out / "entropy.csv")
    print(f"{len(reports)} entropy reports, {failed} series skipped")


def cmd_evaluate(args, cfg):
    out = prepare_dir(args.out, args.force)
    ecfg = eval_config(cfg, args.seed, args.jobs)
    if args.transitions_only:
        ecfg = replace(ecfg, transitions_only=True)
    if args.score_unknown:
        ecfg = replace(ecfg, skip_unknown_targets=False, predict_known_only=False)
    classes, keep = _population(args, cfg)
    by_dev = {d: r for d, r in group_by_device(load_records([args.records])).items() if d in keep}
    series = build_series(by_dev, classes, ecfg)
    result = run_matrix(series, ecfg)
    write_matrix(result.rows, out / "matrix.csv")
    write_runtimes(result.rows, out / "runtimes.csv")
    write_accuracies(result.device_results, out / "accuracies.csv")
    from .report import write_entropy

    if result.entropy:
        write_entropy(result.entropy, out / "entropy.csv")
    meta = {
        "version": __version__,
        "config": _jsonable(asdict(ecfg)),
        "skipped": {f"{s.value}|{w}|{m}|{k}": n for (s, w, m, k), n in sorted(
            result.skipped.items(), key=lambda kv: (kv[0][0].value,) + kv[0][1:])},
    }
    (out / "eval_meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    print(f"{len(result.rows)} matrix rows written to {out}")


def _prefer(cfg, key, conv, preferred, available):
    """Configured value, else ``preferred`` when the results contain it,
    else the first available one."""
    if key in cfg:
        return conv(cfg[key])
    available = sorted(set(available), key=lambda v: (v != preferred, str(v)))
    return available[0] if available else preferred


def _accuracy_map(results, cfg):
    method = _prefer(cfg, "corr.method", str.upper, "MC", [r.method for r in results])
    spatial = _prefer(cfg, "corr.spatial", SpatialResolution.parse, SpatialResolution.BUILDING,
                      [r.spatial for r in results if r.method == method])
    window = _prefer(cfg, "corr.window", int, 3600,
                     [r.window_s for r in results if r.method == method and r.spatial is spatial])
    k = _prefer(cfg, "corr.seq_len", int, 5,
                [r.seq_len for r in results if r.method == method and r.spatial is spatial and r.window_s == window])
    log.info("correlating %s accuracies at %s/%ds k=%d", method, spatial.value, window, k)
    return {
        r.device: r.accuracy for r in results
        if r.method == method and r.spatial is spatial and r.window_s == window and r.seq_len == k
    }


def cmd_correlate(args, cfg):
    out = prepare_dir(args.out, args.force)
    results = read_accuracies(args.accuracies)
    accuracies = _accuracy_map(results, cfg)
    classes = {r.device: r.device_class for r in results}
    coords = load_coords(args.coords)
    by_dev = group_by_device(load_records([args.records]))
    calendar = Calendar(int(cfg.get("tz_offset_s", 0)))
    feats = {
        d: compute_features(by_dev[d], coords, calendar, int(cfg.get("tmax", 3600)),
                            cfg.get("ingest.building_pattern", r"b\d+"))
        for d in sorted(classes) if d in by_dev
    }
    cells = correlation_report(accuracies, feats, classes)
    write_features(feats, out / "features.csv")
    write_correlations(cells, out / "correlations.csv")
    print(f"{len(cells)} correlation cells over {len(accuracies)} devices")


def cmd_report(args, cfg):
    eval_dir = Path(args.eval)
    results = read_accuracies(eval_dir / "accuracies.csv")
    rows = aggregate(results)
    entropy = []
    if (eval_dir / "entropy.csv").exists():
        entropy = _read_matrix_entropy(eval_dir / "entropy.csv")
    cells = []
    if args.correlations:
        cells = _read_correlations(args.correlations)
    meta = {"eval_dir": str(eval_dir), "seed": args.seed, "config_file": str(args.config) if args.config else None,
            "config": cfg}
    if (eval_dir / "eval_meta.json").exists():
        meta["eval_meta"] = json.loads((eval_dir / "eval_meta.json").read_text())
    predictors = [r for r in results if r.seq_len > 0]
    method = _prefer(cfg, "report.ecdf_method", str.upper, "LSTM", [r.method for r in predictors])
    seq_len = _prefer(cfg, "report.ecdf_seq_len", int, 40, [r.seq_len for r in predictors if r.method == method])
    out = report(args.out, rows, results, entropy, cells, meta, ecdf_method=method, ecdf_seq_len=seq_len,
                 force=args.force)
    print(f"report written to {out}")


def _read_matrix_entropy(path):
    import csv

    from .entropy import ENTROPY_FIELDS, EntropyReport

    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rep = EntropyReport(row["device"], row["class"], int(row["n"]), int(row["N"]),
                                *(float(row[k]) for k in ENTROPY_FIELDS[4:]))
            out.append((SpatialResolution.parse(row.get("spatial", "ap")), int(row.get("window_s", 0)), rep))
    return out


def _read_correlations(path):
    import csv

    from .features import CorrelationCell

    with open(path, newline="") as fh:
        return [CorrelationCell(row["class"], row["feature"], float(row["r"]) if row["r"] else None,
                                int(row["n_devices"]), 0) for row in csv.DictReader(fh)]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "value"):
        return obj.value
    return obj


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key = value configuration file")
    common.add_argument("--jobs", type=int, default=None, help="worker processes")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", type=Path, required=True, help="output directory")
    common.add_argument("--force", action="store_true", help="write into a non-empty output directory")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="mobpredict", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", parents=[common], help="generate a synthetic trace")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("ingest", parents=[common], help="parse and deduplicate raw trace files")
    s.add_argument("traces", nargs="+", type=Path)
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("summarize", parents=[common], help="per-device statistics and population filter")
    s.add_argument("--records", type=Path, required=True)
    s.add_argument("--oui", type=Path, required=True)
    s.set_defaults(func=cmd_summarize)

    def population_args(s):
        s.add_argument("--records", type=Path, required=True)
        s.add_argument("--devices", type=Path, required=True, help="devices.csv from summarize")
        s.add_argument("--population", type=Path, help="explicit list of device ids to keep")

    s = sub.add_parser("discretize", parents=[common], help="build discrete location series")
    population_args(s)
    s.add_argument("--spatial", choices=["ap", "building"], default="ap")
    s.add_argument("--window", type=int, default=900, help="window length in seconds")
    s.add_argument("--tmax", type=int, default=3600, help="seconds a location persists after association")
    s.set_defaults(func=cmd_discretize)

    s = sub.add_parser("entropy", parents=[common], help="entropy estimates for a series directory")
    s.add_argument("--series", type=Path, required=True)
    s.set_defaults(func=cmd_entropy)

    s = sub.add_parser("evaluate", parents=[common], help="run the experiment matrix")
    population_args(s)
    s.add_argument("--transitions-only", action="store_true",
                   help="score only steps where the true location changes")
    s.add_argument("--score-unknown", action="store_true",
                   help="also score steps whose true symbol is Unknown")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("correlate", parents=[common], help="feature/accuracy correlations")
    s.add_argument("--records", type=Path, required=True)
    s.add_argument("--accuracies", type=Path, required=True, help="accuracies.csv from evaluate")
    s.add_argument("--coords", type=Path, required=True, help="building,x_m,y_m CSV")
    s.set_defaults(func=cmd_correlate)

    s = sub.add_parser("report", parents=[common], help="assemble the report directory")
    s.add_argument("--eval", type=Path, required=True, help="output directory of evaluate")
    s.add_argument("--correlations", type=Path, help="correlations.csv from correlate")
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        args.func(args, cfg)
    except ConfigInvalid as exc:
        print(f"mobpredict: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (MobPredictError, OSError) as exc:
        print(f"mobpredict: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception:
        log.exception("internal error")
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
