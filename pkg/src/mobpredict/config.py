"""Line-oriented ``key = value`` run configuration.

Lists are comma separated; ``#`` starts a comment. Unknown keys are an
error so typos do not silently fall back to defaults.
"""

from __future__ import annotations

from dataclasses import replace
from pathlib import Path

from .errors import ConfigInvalid
from .harness import ALL_METHODS, EvalConfig
from .model import DeviceClass, SpatialResolution
from .neural import NeuralConfig
from .synth import CELLO_MODEL, FLUTE_MODEL, SynthConfig, default_campus

KNOWN_KEYS = {
    "seed", "jobs", "tz_offset_s",
    "methods", "seq_lens", "windows", "spatial", "tmax",
    "eval.skip_unknown", "eval.predict_known_only", "eval.transitions_only",
    "entropy.keep_unknown", "entropy.bwt_segments",
    "nn.arch", "nn.hidden", "nn.layers", "nn.embed", "nn.lr", "nn.seed", "nn.device_sample",
    "ingest.min_days", "ingest.min_aps", "ingest.building_pattern",
    "corr.method", "corr.spatial", "corr.window", "corr.seq_len",
    "report.ecdf_method", "report.ecdf_seq_len",
    "synth.flutes", "synth.cellos", "synth.days", "synth.buildings", "synth.aps_per_building",
    "synth.flute_stay", "synth.cello_stay", "synth.stay_jitter",
    "synth.flute_dwell_s", "synth.cello_dwell_s",
}


def parse_config_text(text: str) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigInvalid(f"config line {lineno}: expected 'key = value'")
        if key not in KNOWN_KEYS:
            raise ConfigInvalid(f"config line {lineno}: unknown key {key!r}")
        out[key] = value.strip()
    return out


def load_config(path: Path | None) -> dict[str, str]:
    if path is None:
        return {}
    try:
        return parse_config_text(Path(path).read_text())
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from None


def _list(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def _bool(value: str) -> bool:
    v = value.lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigInvalid(f"not a boolean: {value!r}")


def _get(cfg, key, conv, default):
    if key not in cfg:
        return default
    try:
        return conv(cfg[key])
    except (ValueError, KeyError) as exc:
        raise ConfigInvalid(f"{key}: {exc}") from None


def eval_config(cfg: dict[str, str], seed: int | None = None, jobs: int | None = None) -> EvalConfig:
    base = EvalConfig()
    methods = base.methods
    if "methods" in cfg:
        methods = []
        for m in _list(cfg["methods"]):
            m = m.upper()
            if m == "NN":
                methods += [a.upper() for a in _list(cfg.get("nn.arch", "lstm,cnn"))]
            else:
                methods.append(m)
        bad = [m for m in methods if m not in ALL_METHODS]
        if bad:
            raise ConfigInvalid(f"unknown methods {bad}")
        methods = tuple(dict.fromkeys(methods))
    run_seed = seed if seed is not None else _get(cfg, "seed", int, base.seed)
    nn = NeuralConfig(
        hidden=_get(cfg, "nn.hidden", int, NeuralConfig.hidden),
        layers=_get(cfg, "nn.layers", int, NeuralConfig.layers),
        embed=_get(cfg, "nn.embed", int, NeuralConfig.embed),
        lr=_get(cfg, "nn.lr", float, NeuralConfig.lr),
        seed=_get(cfg, "nn.seed", int, run_seed),
    )
    skip = _get(cfg, "eval.skip_unknown", _bool, base.skip_unknown_targets)
    try:
        return replace(
            base,
            methods=methods,
            seq_lens=tuple(_get(cfg, "seq_lens", lambda v: [int(x) for x in _list(v)], base.seq_lens)),
            windows=tuple(_get(cfg, "windows", lambda v: [int(x) for x in _list(v)], base.windows)),
            spatial=tuple(_get(cfg, "spatial", lambda v: [SpatialResolution.parse(x) for x in _list(v)],
                               base.spatial)),
            t_max_s=_get(cfg, "tmax", int, base.t_max_s),
            building_pattern=cfg.get("ingest.building_pattern", base.building_pattern),
            nn=nn,
            nn_device_sample=_get(cfg, "nn.device_sample", int, base.nn_device_sample),
            skip_unknown_targets=skip,
            predict_known_only=_get(cfg, "eval.predict_known_only", _bool, skip),
            transitions_only=_get(cfg, "eval.transitions_only", _bool, base.transitions_only),
            entropy_keep_unknown=_get(cfg, "entropy.keep_unknown", _bool, base.entropy_keep_unknown),
            bwt_segments=_get(cfg, "entropy.bwt_segments", int, base.bwt_segments),
            seed=run_seed,
            jobs=jobs if jobs is not None else _get(cfg, "jobs", int, base.jobs),
        )
    except ValueError as exc:
        raise ConfigInvalid(str(exc)) from None


def synth_config(cfg: dict[str, str], seed: int | None = None) -> SynthConfig:
    base = SynthConfig()
    jitter = _get(cfg, "synth.stay_jitter", float, 0.0)
    flute = replace(FLUTE_MODEL, stay=_get(cfg, "synth.flute_stay", float, FLUTE_MODEL.stay),
                    dwell_median_s=_get(cfg, "synth.flute_dwell_s", float, FLUTE_MODEL.dwell_median_s),
                    stay_jitter=jitter)
    cello = replace(CELLO_MODEL, stay=_get(cfg, "synth.cello_stay", float, CELLO_MODEL.stay),
                    dwell_median_s=_get(cfg, "synth.cello_dwell_s", float, CELLO_MODEL.dwell_median_s),
                    stay_jitter=jitter)
    return replace(
        base,
        n_devices={DeviceClass.FLUTE: _get(cfg, "synth.flutes", int, 20),
                   DeviceClass.CELLO: _get(cfg, "synth.cellos", int, 20)},
        campus=tuple(default_campus(_get(cfg, "synth.buildings", int, 12),
                                    _get(cfg, "synth.aps_per_building", int, 8))),
        models={DeviceClass.FLUTE: flute, DeviceClass.CELLO: cello},
        n_days=_get(cfg, "synth.days", int, base.n_days),
        seed=seed if seed is not None else _get(cfg, "seed", int, base.seed),
    )
