"""Command-line front end.

    neurocomplex COMMAND [--config FILE] [--set KEY=VALUE ...] [--out DIR]

The config file holds ``key = value`` lines (``#`` starts a comment). Values
given with ``--set`` override the file. Every run writes the fully resolved
configuration to ``<out>/config.resolved``; passing that file back with
``--config`` reproduces the run.

Exit status: 0 success, 1 invalid input or configuration, 2 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import files, svg
from .categorical import CategoricalTable, categorical_som_train
from .errors import InputError, NumericError
from .forecast import TwoScaleSeries, forecast_next_vector
from .hmm_mlp import GemConfig, HmmMlpParams, gem_fit, simulate, viterbi_decode
from .metrics import (edit_distance_matrix, gram_matrix, heat_kernel_matrix, linear_kernel,
                      poly_kernel, rbf_kernel, read_edge_list, validate_dissimilarity)
from .mlp import TrainConfig, as_arrays, embed_autoregressive
from .selection import PenaltySpec, parameter_scaled_penalty, select_hidden_units
from .som import MapLattice, NeighborhoodSchedule, batch_som_train, map_quality
from .som_variants import kernel_som_train, median_som_train, q_median_som_train

log = logging.getLogger("neurocomplex")

COMMANDS = ("som-train", "som-median", "som-kernel", "som-cat", "mlp-select", "hmm-sim",
            "hmm-fit", "forecast")


class ConfigError(InputError):
    pass


@dataclass(frozen=True)
class Key:
    type: type
    default: object = None
    path: bool = False
    choices: tuple = ()


_LATTICE = {
    "lattice": Key(str, "grid", choices=("grid", "string")),
    "rows": Key(int, 5),
    "cols": Key(int, 5),
    "lattice_metric": Key(str, "euclidean", choices=("euclidean", "manhattan")),
    "neighborhood": Key(str, "gaussian", choices=("gaussian", "window")),
    "radius_initial": Key(float, None),
    "radius_final": Key(float, 0.5),
    "sweeps": Key(int, 30),
}
_COMMON = {"seed": Key(int, 0), "out": Key(str, "out"), "svg": Key(bool, True)}
_TRAIN = {
    "restarts": Key(int, 5),
    "optimizer": Key(str, "lbfgs", choices=("lbfgs", "gd")),
    "max_iter": Key(int, 500),
    "transfer": Key(str, "tanh", choices=("tanh", "logistic")),
}

SCHEMA = {
    "som-train": {"input": Key(str, None, path=True), **_LATTICE},
    "som-median": {"input": Key(str, None, path=True), "strings": Key(str, None, path=True),
                   "q": Key(int, 1), **_LATTICE},
    "som-kernel": {"input": Key(str, None, path=True), "data": Key(str, None, path=True),
                   "graph": Key(str, None, path=True),
                   "kernel": Key(str, "rbf", choices=("rbf", "poly", "linear", "heat")),
                   "gamma": Key(float, 1.0), "degree": Key(int, 2), "offset": Key(float, 0.0),
                   "beta": Key(float, 1.0), **_LATTICE},
    "som-cat": {"input": Key(str, None, path=True), "encoding": Key(str, "burt", choices=("burt", "cdt")),
                **_LATTICE},
    "mlp-select": {"input": Key(str, None, path=True), "series": Key(str, None, path=True),
                   "window": Key(int, 2), "max_k": Key(int, 5),
                   "penalty": Key(str, "logOverN", choices=("logOverN", "sqrtOverN", "paramLogOverN")),
                   "multiplier": Key(float, 1.0), **_TRAIN},
    "hmm-sim": {"model": Key(str, None, path=True), "length": Key(int, 200),
                "warm_start": Key(str, "")},
    "hmm-fit": {"input": Key(str, None, path=True), "states": Key(int, 2), "order": Key(int, 1),
                "hidden": Key(int, 2), "iterations": Key(int, 50), "refit_iter": Key(int, 30),
                "transfer": Key(str, "tanh", choices=("tanh", "logistic"))},
    "forecast": {"input": Key(str, None, path=True), "next_label": Key(str, None),
                 "method": Key(str, "seasonalNaive", choices=("seasonalNaive", "ar")),
                 "period": Key(int, 1), "ar_order": Key(int, 1), **_LATTICE},
}
for _cmd in SCHEMA:
    SCHEMA[_cmd] = {**_COMMON, **SCHEMA[_cmd]}


def _parse_value(key, spec: Key, raw: str):
    raw = raw.strip()
    if spec.type is bool:
        low = raw.lower()
        if low in ("true", "yes", "1", "on"):
            return True
        if low in ("false", "no", "0", "off"):
            return False
        raise ConfigError(f"key {key!r}: expected bool, got {raw!r}")
    if spec.type is str:
        value = raw
    else:
        try:
            value = spec.type(raw)
        except ValueError:
            raise ConfigError(f"key {key!r}: expected {spec.type.__name__}, got {raw!r}") from None
    if spec.choices and value not in spec.choices:
        raise ConfigError(f"key {key!r}: expected one of {list(spec.choices)}, got {raw!r}")
    return value


def _parse_pairs(lines, source):
    out = {}
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def parse_config(command: str, config_file=None, overrides=(), out=None) -> dict:
    """Resolve file values, ``KEY=VALUE`` overrides and defaults into a typed dict."""
    if command not in SCHEMA:
        raise ConfigError(f"unknown command {command!r}")
    schema = SCHEMA[command]
    raw = {}
    if config_file is not None:
        path = Path(config_file)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        raw.update(_parse_pairs(path.read_text().splitlines(), str(path)))
    raw.update(_parse_pairs(list(overrides), "--set"))
    if out is not None:
        raw["out"] = out
    file_cmd = raw.pop("command", command)
    if file_cmd != command:
        raise ConfigError(f"config is for command {file_cmd!r}, not {command!r}")
    for k in raw:
        if k not in schema:
            raise ConfigError(f"unknown key {k!r} for command {command!r}")
    cfg = {"command": command}
    for k, spec in schema.items():
        cfg[k] = _parse_value(k, spec, raw[k]) if k in raw else spec.default
        if spec.path and cfg[k] is not None and not Path(cfg[k]).exists():
            raise ConfigError(f"key {k!r}: path does not exist: {cfg[k]}")
    return cfg


def format_config(cfg: dict) -> str:
    lines = [f"command = {cfg['command']}"]
    for k in sorted(cfg):
        if k == "command" or cfg[k] is None:
            continue
        v = cfg[k]
        if isinstance(v, bool):
            v = "true" if v else "false"
        elif isinstance(v, float):
            v = repr(v)
        lines.append(f"{k} = {v}")
    return "\n".join(lines) + "\n"


def _require(cfg, *keys):
    for k in keys:
        if cfg.get(k) is None:
            raise ConfigError(f"missing required key {k!r} for command {cfg['command']!r}")


def _lattice(cfg):
    if cfg["lattice"] == "grid":
        lat = MapLattice.grid(cfg["rows"], cfg["cols"], cfg["lattice_metric"])
    else:
        lat = MapLattice.string(cfg["rows"], cfg["lattice_metric"])
    r0 = cfg["radius_initial"]
    if r0 is None:
        r0 = max(max(lat.rows, lat.cols) / 2.0, cfg["radius_final"])
    return lat, NeighborhoodSchedule(cfg["neighborhood"], r0, cfg["radius_final"], cfg["sweeps"])


def _write_svg(cfg, out, text):
    if cfg["svg"]:
        (out / "map.svg").write_text(text)


def _run_som_train(cfg, out):
    _require(cfg, "input")
    X = files.read_matrix(cfg["input"])
    lat, sched = _lattice(cfg)
    res = batch_som_train(X, lat, sched, cfg["seed"])
    qe, te = map_quality(X, res.prototypes, lat)
    files.write_json(out / "map.json", {
        "kind": "vector", "lattice": lat.to_dict(), "prototypes": res.prototypes,
        "assignments": res.assignments, "quantizationError": qe, "topographicError": te,
    })
    files.write_csv(out / "energy.csv", ["sweep", "energy"], enumerate(res.energy))
    _write_svg(cfg, out, svg.u_matrix_svg(res.prototypes, lat))


def _run_som_median(cfg, out):
    if cfg["strings"] is not None:
        labels = files.read_lines(cfg["strings"])
        D = edit_distance_matrix(labels)
    else:
        _require(cfg, "input")
        D = files.read_matrix(cfg["input"])
        if D.shape[0] != D.shape[1]:
            raise InputError(f"dissimilarity matrix must be square, got {D.shape}")
        bad = validate_dissimilarity(D)
        if bad:
            raise InputError("invalid dissimilarity: " + "; ".join(map(str, bad)))
    lat, sched = _lattice(cfg)
    if cfg["q"] == 1:
        st = median_som_train(D, lat, sched, cfg["seed"])
    else:
        st = q_median_som_train(D, lat, sched, cfg["q"], cfg["seed"])
    files.write_json(out / "map.json", {"kind": "median", "q": cfg["q"], "lattice": lat.to_dict(),
                                        **st.to_dict()})
    files.write_csv(out / "distortion.csv", ["sweep", "distortion"], enumerate(st.distortion))
    _write_svg(cfg, out, svg.counts_svg(st.assignments, lat))


def _kernel_matrix(cfg):
    if cfg["kernel"] == "heat":
        _require(cfg, "graph")
        return heat_kernel_matrix(read_edge_list(cfg["graph"]), cfg["beta"])
    if cfg["data"] is not None:
        X = files.read_matrix(cfg["data"])
        fn = {
            "rbf": lambda x, y: rbf_kernel(x, y, cfg["gamma"]),
            "poly": lambda x, y: poly_kernel(x, y, cfg["degree"], cfg["offset"]),
            "linear": linear_kernel,
        }[cfg["kernel"]]
        return gram_matrix(X, fn)
    _require(cfg, "input")
    return files.read_matrix(cfg["input"])


def _run_som_kernel(cfg, out):
    K = _kernel_matrix(cfg)
    lat, sched = _lattice(cfg)
    st = kernel_som_train(K, lat, sched, cfg["seed"])
    files.write_json(out / "map.json", {"kind": "kernel", "lattice": lat.to_dict(), **st.to_dict()})
    files.write_csv(out / "energy.csv", ["sweep", "energy"], enumerate(st.energy))
    _write_svg(cfg, out, svg.counts_svg(st.assignments, lat))


def _run_som_cat(cfg, out):
    _require(cfg, "input")
    header, body = files.read_categorical(cfg["input"])
    table = CategoricalTable(body, header)
    lat, sched = _lattice(cfg)
    cm = categorical_som_train(table, cfg["encoding"], lat, sched, cfg["seed"])
    files.write_json(out / "map.json", {
        "kind": "categorical", "encoding": cfg["encoding"], "lattice": lat.to_dict(),
        "rowLabels": cm.encoding.row_labels, "prototypes": cm.som.prototypes,
        "assignments": cm.som.assignments,
    })
    files.write_csv(out / "transformed.csv", None, cm.transformed.tolist())
    _write_svg(cfg, out, svg.u_matrix_svg(cm.som.prototypes, lat))


def _run_mlp_select(cfg, out):
    if cfg["series"] is not None:
        pairs = embed_autoregressive(files.read_series(cfg["series"]), cfg["window"])
    else:
        _require(cfg, "input")
        M = files.read_matrix(cfg["input"])
        if M.shape[1] < 2:
            raise InputError("training CSV needs at least one input column and a target column")
        pairs = as_arrays((M[:, :-1], M[:, -1]))
    if cfg["penalty"] == "paramLogOverN":
        pen = PenaltySpec("custom", cfg["multiplier"], parameter_scaled_penalty)
    else:
        pen = PenaltySpec(cfg["penalty"], cfg["multiplier"])
    tc = TrainConfig(cfg["restarts"], cfg["optimizer"], cfg["max_iter"], transfer=cfg["transfer"])
    trace, model = select_hidden_units(pairs, cfg["max_k"], pen, tc, cfg["seed"])
    (out / "selection.csv").write_text(trace.to_csv())
    files.write_json(out / "selection.json", {"penalty": cfg["penalty"], **trace.to_dict()})
    files.write_json(out / "model.json", model.to_dict())


def _run_hmm_sim(cfg, out):
    _require(cfg, "model")
    params = HmmMlpParams.from_dict(files.read_json(cfg["model"]))
    warm = [float(v) for v in cfg["warm_start"].split(",") if v.strip()] or [0.0] * params.order
    y, states = simulate(params, cfg["length"], warm, cfg["seed"])
    files.write_csv(out / "series.csv", ["y"], ([v] for v in y))
    files.write_csv(out / "states.csv", ["state"], ([s] for s in states))
    files.write_json(out / "simulation.json", {"warmStart": warm, "series": y, "states": states})


def _run_hmm_fit(cfg, out):
    _require(cfg, "input")
    y = files.read_series(cfg["input"])
    gc = GemConfig(iterations=cfg["iterations"], hidden_count=cfg["hidden"],
                   refit=TrainConfig(restarts=0, max_iter=cfg["refit_iter"], transfer=cfg["transfer"]))
    params, trace = gem_fit(y, cfg["states"], cfg["order"], gc, cfg["seed"])
    p = cfg["order"]
    path = viterbi_decode(params, y[p:], y[:p])
    files.write_json(out / "model.json", {**params.to_dict(), "logLikelihood": trace[-1]})
    files.write_csv(out / "loglik.csv", ["iteration", "logLikelihood"], enumerate(trace))
    files.write_csv(out / "path.csv", ["state"], ([s] for s in path))


def _run_forecast(cfg, out):
    _require(cfg, "input", "next_label")
    values, labels = files.read_labelled_rows(cfg["input"])
    lat, sched = _lattice(cfg)
    fc = forecast_next_vector(TwoScaleSeries(values, labels), cfg["next_label"], lat, sched,
                              cfg["method"], cfg["period"], cfg["ar_order"], cfg["seed"])
    files.write_csv(out / "prediction.csv", None, [fc.values.tolist()])
    files.write_json(out / "forecast.json", {"nextLabel": cfg["next_label"], **fc.to_dict(),
                                             "map": fc.profile_map.to_dict(), "lattice": lat.to_dict()})
    _write_svg(cfg, out, svg.u_matrix_svg(fc.profile_map.prototypes, lat))


RUNNERS = {
    "som-train": _run_som_train, "som-median": _run_som_median, "som-kernel": _run_som_kernel,
    "som-cat": _run_som_cat, "mlp-select": _run_mlp_select, "hmm-sim": _run_hmm_sim,
    "hmm-fit": _run_hmm_fit, "forecast": _run_forecast,
}


def run_command(cfg: dict) -> int:
    """Execute a resolved config; returns the process exit status."""
    try:
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.resolved").write_text(format_config(cfg))
        with np.errstate(over="ignore", under="ignore"):
            RUNNERS[cfg["command"]](cfg, out)
    except InputError as err:
        _diagnose("input", err)
        return 1
    except (NumericError, FloatingPointError, np.linalg.LinAlgError) as err:
        _diagnose("numeric", err)
        return 2
    return 0


def _diagnose(kind, err):
    sys.stderr.write(json.dumps({"status": "error", "kind": kind, "type": type(err).__name__,
                                 "message": str(err)}) + "\n")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="neurocomplex", description=__doc__.split("\n\n")[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="key = value config file")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", dest="overrides",
                    help="override a config key (repeatable)")
    ap.add_argument("--out", help="output directory (same as the 'out' key)")
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = parse_config(args.command, args.config, args.overrides, args.out)
    except InputError as err:
        _diagnose("input", err)
        return 1
    return run_command(cfg)


if __name__ == "__main__":
    sys.exit(main())
