"""Batch command-line front end.

A run is described by one JSON document; any scalar can be overridden with
a dotted flag such as ``--params.c3=2``.  Each run prints a single summary
line ``<command> <label-or-count> <primary-metric>`` and writes its result
files into ``output.path``.

Exit status: 0 success, 2 config parse error, 3 validation error,
4 numerical failure.  Failures print a JSON error record to stderr.
"""

from __future__ import annotations

import argparse
import copy
import json
import sys
from pathlib import Path

import numpy as np

from . import analysis, explore, io
from .core import BASIS_LABELS, TWO_PI, CouplerParams
from .dynamics import DEFAULT_STEPS, analytic_state, analytic_trajectory, integrate_rk4

COMMANDS = ("simulate", "sweep-dbeta", "sweep-c3", "sweep-2d", "classify", "check", "enumerate", "search")

EXIT_OK, EXIT_PARSE, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3, 4

DEFAULT_CONFIG = {
    "command": None,
    "params": {
        "c1": 1.0,
        "c2": 1.0,
        "c3": 1.0,
        "delta_beta": 0.0,
        "gamma": 1.0,
        "a0": 1.0,
        "a1": 1.0,
        "length": TWO_PI,
    },
    "tolerance": analysis.DEFAULT_TOL,
    "simulate": {"method": "analytic", "steps": DEFAULT_STEPS, "z_samples": 257},
    "sweep": {
        "dbeta": {"min": -6.0, "max": 6.0, "count": 241},
        "z_samples": 256,
        "c3": {"min": 0.05, "max": 4.0, "count": 80},
        "c1c2": {"min": 0.05, "max": 4.0, "count": 80},
        "rule": "minus_c3",
        "peak_rel_height": 0.25,
    },
    "classify": {"state": None, "state_file": None},
    "check": {"max_integer": analysis.DEFAULT_MAX_INTEGER},
    "enumerate": {
        "family": "hbs3",
        "bound": 8,
        "box": {"lower": [0.0, 0.0, 0.0, -4.0], "upper": [4.0, 4.0, 4.0, 4.0]},
    },
    "search": {
        "target": "ghz",
        "box": {"lower": [0.0, 0.0, 0.0, -2.0], "upper": [2.0, 2.0, 2.0, 2.0]},
        "budget": 2000,
        "seed": 0,
        "grid_per_axis": None,
    },
    "output": {"path": "triplet_walk_out", "format": "csv", "figures": False},
}


class ConfigError(Exception):
    """Malformed command line or config document (exit status 2)."""


class ValidationError(Exception):
    """Well-formed config with unusable values (exit status 3)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _merge(base: dict, override: dict, prefix: str = "") -> dict:
    for key, value in override.items():
        where = f"{prefix}{key}"
        if key not in base:
            raise ValidationError(f"unknown config key {where!r}")
        if isinstance(base[key], dict) and isinstance(value, dict) and key not in ("state",):
            _merge(base[key], value, where + ".")
        else:
            base[key] = value
    return base


def _set_dotted(config: dict, dotted: str, value):
    keys = dotted.split(".")
    node = config
    for k in keys[:-1]:
        if not isinstance(node.get(k), dict):
            raise ValidationError(f"unknown config key {dotted!r}")
        node = node[k]
    if keys[-1] not in node:
        raise ValidationError(f"unknown config key {dotted!r}")
    node[keys[-1]] = value


def _overrides(extra: list[str]) -> list[tuple[str, object]]:
    out = []
    i = 0
    while i < len(extra):
        arg = extra[i]
        if not arg.startswith("--") or len(arg) < 3:
            raise ConfigError(f"unexpected argument {arg!r}")
        key = arg[2:]
        if "=" in key:
            key, raw = key.split("=", 1)
        else:
            if i + 1 >= len(extra):
                raise ConfigError(f"missing value for --{key}")
            i += 1
            raw = extra[i]
        out.append((key, _parse_value(raw)))
        i += 1
    return out


def build_config(argv: list[str]) -> dict:
    parser = _Parser(prog="triplet-walk", description=__doc__.splitlines()[0])
    parser.add_argument("command", nargs="?", help=f"one of {', '.join(COMMANDS)}")
    parser.add_argument("--config", "-c", help="JSON config document")
    parser.add_argument("--figures", action="store_true", help="also render PNG figures")
    args, extra = parser.parse_known_args(argv)

    config = copy.deepcopy(DEFAULT_CONFIG)
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc.strerror or exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {args.config}: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config document must be a JSON object")
        _merge(config, doc)
    for key, value in _overrides(extra):
        _set_dotted(config, key, value)
    if args.command:
        config["command"] = args.command
    if args.figures:
        config["output"]["figures"] = True
    if config["command"] not in COMMANDS:
        raise ValidationError(f"command must be one of {COMMANDS}, got {config['command']!r}")
    if config["output"]["format"] not in io.FORMATS:
        raise ValidationError(f"output.format must be one of {io.FORMATS}")
    return config


def _params(config) -> CouplerParams:
    try:
        return CouplerParams(**config["params"])
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"params: {exc}") from exc


def _axis(name: str, spec: dict) -> explore.SweepAxis:
    try:
        return explore.SweepAxis(name, float(spec["min"]), float(spec["max"]), int(spec["count"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"axis {name}: {exc}") from exc


def _box(spec: dict) -> explore.ParameterBox:
    if "lower" in spec:
        lower, upper = spec["lower"], spec["upper"]
        if len(lower) != 4 or len(upper) != 4:
            raise ValidationError("box bounds need 4 entries: c1, c2, c3, delta_beta")
        return explore.ParameterBox(tuple(map(float, lower)), tuple(map(float, upper)))
    return explore.ParameterBox.uniform(spec["c_min"], spec["c_max"], spec["db_min"], spec["db_max"])


def _target(spec):
    if isinstance(spec, str):
        key = {"ghz": "GHZ-like", "hbs": None, "uniform": "uniform"}.get(spec.lower(), spec)
        if key is None:
            return analysis.HBS_TARGET
        if key not in analysis.IDEAL_STATES:
            raise ValidationError(f"unknown target {spec!r}")
        return analysis.IDEAL_STATES[key]
    return analysis.normalize(io.state_from_dict(spec))[0].amps


def _out(config, stem: str) -> Path:
    return Path(config["output"]["path"]) / f"{stem}.{config['output']['format']}"


def _figure(config, stem: str) -> Path | None:
    if not config["output"]["figures"]:
        return None
    return Path(config["output"]["path"]) / f"{stem}.png"


def _prob_columns(prefix="p"):
    return [f"{prefix}{b}" for b in BASIS_LABELS]


def _cmd_simulate(config) -> str:
    params = _params(config)
    opts = config["simulate"]
    fmt = config["output"]["format"]
    if opts["method"] == "rk4":
        traj = integrate_rk4(params, params.length, int(opts["steps"]))
    elif opts["method"] == "analytic":
        traj = analytic_trajectory(params, np.linspace(0.0, params.length, int(opts["z_samples"])))
    else:
        raise ValidationError(f"simulate.method must be 'analytic' or 'rk4', got {opts['method']!r}")
    final = traj.final.to_frame("rotating", params, params.length)
    unit, norm = analysis.normalize(final)
    report = analysis.classify(unit, float(config["tolerance"]))

    io.save_state(unit, _out(config, "state"), fmt)
    io.export_density_matrix(unit, _out(config, "density_matrix"), fmt)
    probs = np.abs(traj.amps) ** 2
    io.write_table(
        _out(config, "trajectory"),
        ["z"] + _prob_columns(),
        [[z, *row] for z, row in zip(traj.z_grid, probs)],
        fmt,
    )
    io.write_table(
        _out(config, "probabilities"),
        _prob_columns(),
        [unit.probabilities],
        fmt,
        meta={"norm": norm, "label": report.label, "scores": report.scores},
    )
    if _figure(config, "trajectory"):
        from . import plotting

        plotting.plot_trajectory(traj.z_grid, probs, _figure(config, "trajectory"))
        plotting.plot_density_matrix(analysis.density_matrix(unit).rho, _figure(config, "density_matrix"))
    return f"simulate {report.label} {report.score:.12g}"


def _cmd_classify(config) -> str:
    opts = config["classify"]
    if opts.get("state") is not None:
        state = io.state_from_dict(opts["state"])
    elif opts.get("state_file"):
        state = io.load_state(opts["state_file"])
    else:
        raise ValidationError("classify needs classify.state or classify.state_file")
    unit, norm = analysis.normalize(state)
    report = analysis.classify(unit, float(config["tolerance"]))
    io.write_table(
        _out(config, "classification"),
        ["candidate", "score", "pattern_holds"],
        [[name, report.scores[name], report.patterns[name]] for name in analysis.LABELS],
        config["output"]["format"],
        meta={"label": report.label, "tolerance": report.tol, "norm": norm},
    )
    io.export_density_matrix(unit, _out(config, "density_matrix"), config["output"]["format"])
    return f"classify {report.label} {report.score:.12g}"


def _cmd_sweep_dbeta(config) -> str:
    params = _params(config)
    opts = config["sweep"]
    result = explore.sweep_dbeta_z(params, _axis("delta_beta", opts["dbeta"]), int(opts["z_samples"]), float(config["tolerance"]))
    peaks = explore.find_norm_peaks(result, float(opts["peak_rel_height"]))
    x = result.grid.axes[0].values
    peak_set = set(np.round(peaks, 12))
    fmt = config["output"]["format"]
    io.write_table(
        _out(config, "sweep_dbeta"),
        ["delta_beta", "norm", "is_peak", "label"] + _prob_columns(),
        [[db, n, round(db, 12) in peak_set, lab, *p] for db, n, lab, p in zip(x, result.norms, result.labels, result.probabilities)],
        fmt,
    )
    io.write_table(
        _out(config, "sweep_dbeta_dynamics"),
        ["delta_beta", "z"] + _prob_columns("raw_p"),
        [[db, z, *result.dynamics[i, j]] for i, db in enumerate(x) for j, z in enumerate(result.z)],
        fmt,
    )
    fig = _figure(config, "sweep_dbeta")
    if fig:
        from . import plotting

        plotting.plot_dbeta_maps(x, result.z, result.dynamics, fig, c3=params.c3)
    return f"sweep-dbeta {len(peaks)} {','.join(format(float(p), '.12g') for p in peaks)}"


def _cmd_sweep_c3(config) -> str:
    params = _params(config)
    opts = config["sweep"]
    rule = opts["rule"]
    if isinstance(rule, (int, float)):
        rule = ("fixed", float(rule))
    try:
        result = explore.sweep_c3(params, _axis("c3", opts["c3"]), rule, float(config["tolerance"]))
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc
    x = result.grid.axes[0].values
    fn = explore._dbeta_rule(rule)
    branches = result.branches()
    io.write_table(
        _out(config, "sweep_c3"),
        ["c3", "delta_beta", "norm", "label"] + [f"branch_{n}" for n in branches] + _prob_columns(),
        [
            [c3, fn(float(c3)), result.norms[i], result.labels[i], *[b[i] for b in branches.values()], *result.probabilities[i]]
            for i, c3 in enumerate(x)
        ],
        config["output"]["format"],
        meta={"rule": result.grid.rule},
    )
    fig = _figure(config, "sweep_c3")
    if fig:
        from . import plotting

        plotting.plot_branches(x, branches, fig)
    labelled = int(np.sum(result.labels != "none"))
    return f"sweep-c3 {len(x)} {labelled}"


def _cmd_sweep_2d(config) -> str:
    params = _params(config)
    opts = config["sweep"]
    result = explore.sweep_2d_hbs(_axis("c1c2", opts["c1c2"]), _axis("c3", opts["c3"]), params, float(config["tolerance"]))
    a, b = result.grid.axes[0].values, result.grid.axes[1].values
    branches = result.branches()
    rows = []
    for i, c in enumerate(a):
        for j, c3 in enumerate(b):
            rows.append([c, c3, -c3, result.norms[i, j], result.labels[i, j], *[v[i, j] for v in branches.values()], *result.probabilities[i, j]])
    io.write_table(
        _out(config, "sweep_2d"),
        ["c1c2", "c3", "delta_beta", "norm", "label"] + [f"branch_{n}" for n in branches] + _prob_columns(),
        rows,
        config["output"]["format"],
    )
    fig = _figure(config, "sweep_2d")
    if fig:
        from . import plotting

        plotting.plot_branch_maps(a, b, branches, fig)
    hbs = int(np.sum(result.labels == "HBS"))
    return f"sweep-2d {len(rows)} {hbs}"


def _cmd_check(config) -> str:
    params = _params(config)
    bound = int(config["check"]["max_integer"])
    rows = []
    for mt in analysis.hbs_param_check(params, bound, require_admissible=False):
        rows.append([mt.family, mt.m, mt.n, mt.residual, mt.admissible])
    for mt in analysis.uniform_param_check(params, bound, require_admissible=False):
        rows.append([mt.family, mt.m, mt.n, mt.residual, mt.admissible])
    ghz = analysis.ghz_param_check(params)
    rows.append([ghz.family, "", "", ghz.residual, ghz.admissible])
    io.write_table(_out(config, "check"), ["family", "m", "n", "residual", "admissible"], rows, config["output"]["format"])
    exact = sum(1 for r in rows if r[4])
    return f"check {exact} {ghz.residual:.12g}"


def _cmd_enumerate(config) -> str:
    opts = config["enumerate"]
    params = _params(config)
    family = opts["family"]
    if family not in explore.FAMILIES:
        raise ValidationError(f"enumerate.family must be one of {explore.FAMILIES}")
    found = explore.enumerate_condition_families(family, int(opts["bound"]), _box(opts["box"]), params)
    expected = "uniform" if family == "uniform" else "HBS"
    rows = []
    for p in found:
        unit, _ = analysis.normalize(analytic_state(p, p.length))
        rows.append([p.c1, p.c2, p.c3, p.delta_beta, analysis.classify(unit, 1e-6).label])
    io.write_table(
        _out(config, "enumerate"),
        ["c1", "c2", "c3", "delta_beta", "label"],
        rows,
        config["output"]["format"],
        meta={"family": family},
    )
    verified = sum(1 for r in rows if r[-1] == expected) / len(rows) if rows else 0.0
    return f"enumerate {len(rows)} {verified:.12g}"


def _cmd_search(config) -> str:
    opts = config["search"]
    params = _params(config)
    target = _target(opts["target"])
    try:
        outcome = explore.search_max_fidelity(
            target,
            _box(opts["box"]),
            int(opts["budget"]),
            int(opts["seed"]),
            base=params,
            grid_per_axis=opts.get("grid_per_axis"),
        )
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc
    best = outcome.params
    fmt = config["output"]["format"]
    io.write_table(
        _out(config, "search"),
        ["c1", "c2", "c3", "delta_beta", "fidelity", "evaluations", "grid_best"],
        [[best.c1, best.c2, best.c3, best.delta_beta, outcome.fidelity, outcome.evaluations, outcome.grid_best]],
        fmt,
    )
    io.write_table(
        _out(config, "search_trace"),
        ["evaluation", "fidelity", "c1", "c2", "c3", "delta_beta"],
        [[e, f, *x] for e, f, x in outcome.trace],
        fmt,
    )
    fig = _figure(config, "search_trace")
    if fig:
        from . import plotting

        plotting.plot_search_trace(outcome.trace, fig)
    return f"search {outcome.evaluations} {outcome.fidelity:.12g}"


HANDLERS = {
    "simulate": _cmd_simulate,
    "sweep-dbeta": _cmd_sweep_dbeta,
    "sweep-c3": _cmd_sweep_c3,
    "sweep-2d": _cmd_sweep_2d,
    "classify": _cmd_classify,
    "check": _cmd_check,
    "enumerate": _cmd_enumerate,
    "search": _cmd_search,
}


def _fail(kind: str, status: int, message: str, stderr) -> int:
    record = {"status": status, "error": kind, "message": message}
    print(json.dumps(record), file=stderr)
    return status


def run(config: dict) -> str:
    """Execute a validated config and return the summary line."""
    return HANDLERS[config["command"]](config)


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = build_config(argv)
        with np.errstate(over="raise", invalid="raise", divide="raise"):
            summary = run(config)
    except ConfigError as exc:
        return _fail("parse", EXIT_PARSE, str(exc), stderr)
    except ValidationError as exc:
        return _fail("validation", EXIT_VALIDATION, str(exc), stderr)
    except analysis.NoTripletError as exc:
        return _fail("numerical", EXIT_NUMERICAL, str(exc), stderr)
    except (FloatingPointError, np.linalg.LinAlgError, OverflowError) as exc:
        return _fail("numerical", EXIT_NUMERICAL, str(exc), stderr)
    except OSError as exc:
        return _fail("io", EXIT_VALIDATION, str(exc), stderr)
    except (ValueError, TypeError, KeyError) as exc:
        return _fail("validation", EXIT_VALIDATION, f"{type(exc).__name__}: {exc}", stderr)
    print(summary, file=stdout)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
