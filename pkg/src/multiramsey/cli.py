"""Command-line front end.

Every subcommand takes a TOML config (``--config``) and/or flags; flags win.
Results land in ``<out>/<command>/<config_digest>/`` as ``data.csv`` (or
``data.json``) plus ``manifest.json``. The output root defaults to ``out``
and can be moved with ``--out-dir`` or ``RAMSEY_OUT_DIR``.

Angles are radians; a trailing ``pi`` multiplies (``0.2774pi``, ``pi/2``).
Grids are ``start:stop:count``; integer ranges are ``lo..hi``.

Exit codes: 0 ok, 2 config error, 3 numeric failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import re
import sys
import tempfile
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .core import ProbeState, make_parametrization
from .errors import ConfigError, InvalidArgument, RamseyError
from .fisher import cfim as cfim_matrix
from .fisher import qcrb_total_variance, qfim_pure
from .probes import (
    indirect_phi_bound,
    optimal_probe_phi,
    optimal_probe_theta,
    optimize_probe_numeric,
    qcrb_individual,
    qcrb_phi_opt,
    qcrb_theta_opt,
    variance_bound_theta,
)
from .simulator import (
    DetectionModel,
    ExperimentConfig,
    MleConfig,
    osrs_optimize,
    osrs_protocol,
    osrs_variance,
    run_monte_carlo,
    sweep_zeta_grid,
    zeta_db,
)
from .synthesis import (
    SpinRotationSpec,
    bs_cascade_angles,
    bs_cascade_unitary,
    spin_levels,
    spin_rotation,
)

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

# value parsers


_PI_RE = re.compile(r"^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$")


def parse_angle(value) -> float:
    """Radians, with an optional ``pi`` factor: ``0.3``, ``0.2774pi``, ``pi/2``."""
    if isinstance(value, bool):
        raise ValueError(f"not an angle: {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    s = str(value).strip()
    m = _PI_RE.match(s)
    if m:
        coef = float(m.group(1)) if m.group(1) not in (None, "", "+", "-") else 1.0
        if m.group(1) == "-":
            coef = -1.0
        div = float(m.group(2)) if m.group(2) else 1.0
        return coef * math.pi / div
    return float(s)


def parse_angles(value) -> list[float]:
    if isinstance(value, (list, tuple)):
        return [parse_angle(v) for v in value]
    return [parse_angle(v) for v in str(value).split(",") if v.strip()]


def parse_int_range(value) -> list[int]:
    """``3``, ``"1..10"`` or ``[1, 2, 5]``."""
    if isinstance(value, bool):
        raise ValueError(f"not an integer: {value!r}")
    if isinstance(value, int):
        return [value]
    if isinstance(value, (list, tuple)):
        return [int(v) for v in value]
    s = str(value).strip()
    if ".." in s:
        lo, hi = s.split("..", 1)
        lo, hi = int(lo), int(hi)
        if hi < lo:
            raise ValueError(f"empty range {s!r}")
        return list(range(lo, hi + 1))
    return [int(v) for v in s.split(",")]


def parse_half_range(value) -> list[float]:
    """Like :func:`parse_int_range` but for (half-)integer spins."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return [float(value)]
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    s = str(value).strip()
    if ".." in s:
        lo, hi = (float(x) for x in s.split("..", 1))
        n = int(round(hi - lo))
        return [lo + k for k in range(n + 1)]
    return [float(v) for v in s.split(",")]


def parse_grid(value) -> tuple[float, float, int]:
    """``start:stop:count`` with angle syntax for the endpoints."""
    if isinstance(value, (list, tuple)) and len(value) == 3:
        start, stop, count = value
    else:
        parts = str(value).split(":")
        if len(parts) != 3:
            raise ValueError(f"grid must be start:stop:count, got {value!r}")
        start, stop, count = parts
    count = int(count)
    if count < 1:
        raise ValueError("grid count must be positive")
    return parse_angle(start), parse_angle(stop), count


def parse_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    s = str(value).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def _positive(parser):
    def parse(v):
        x = parser(v)
        if not x > 0:
            raise ValueError(f"must be positive, got {v!r}")
        return x

    return parse


def _non_negative(parser):
    def parse(v):
        x = parser(v)
        if x < 0:
            raise ValueError(f"must be non-negative, got {v!r}")
        return x

    return parse


def _choice(*options):
    def parse(v):
        s = str(v)
        if s not in options:
            raise ValueError(f"must be one of {', '.join(options)}; got {v!r}")
        return s

    return parse


def _int(v) -> int:
    if isinstance(v, bool):
        raise ValueError(f"not an integer: {v!r}")
    if isinstance(v, float) and not v.is_integer():
        raise ValueError(f"not an integer: {v!r}")
    return int(v)


def _seed(v) -> int:
    x = _int(v)
    if not 0 <= x < 2**64:
        raise ValueError("seed must fit in an unsigned 64-bit integer")
    return x


# config schema


@dataclass(frozen=True)
class Option:
    name: str
    parse: object
    default: object = None
    required: bool = False
    section: str | None = None
    help: str = ""
    flag_type: object = str
    is_flag: bool = False


PROTOCOL = [
    Option("F", _positive(float), 1.0, section="protocol", help="spin F of the probe atoms"),
    Option("chi", parse_angle, "0.2774pi", section="protocol", help="rotation angle"),
    Option("m_i", float, None, section="protocol", help="initial sublevel (default 0, or 1/2)"),
    Option("m0", float, None, section="protocol", help="reference sublevel (default 0, or 1/2)"),
]
DETECTION = [
    Option("sigma", _non_negative(float), 0.0, section="detection", help="detection noise (atoms)"),
    Option("atoms", _positive(_int), 10_000, section="detection", help="atoms per run"),
    Option("poisson", parse_bool, False, section="detection", help="Poisson atom number", is_flag=True),
]
MLE = [
    Option("grid_points", _positive(_int), 101, section="mle", help="coarse grid points per axis"),
    Option("refine_iters", _positive(_int), 200, section="mle", help="simplex iterations"),
    Option("prob_floor", _positive(float), 1e-12, section="mle", help="likelihood probability floor"),
]

SCHEMAS: dict[str, list[Option]] = {
    "bounds": [
        Option("D", parse_int_range, required=True, help="number of parameters, e.g. 2 or 1..10"),
        Option("N", _positive(float), 1.0, help="particle number"),
        Option("scheme", _choice("all", "opt", "ind", "phi", "indirect"), "all"),
    ],
    "probe": [
        Option("D", _positive(_int), required=True),
        Option(
            "kind",
            _choice("optimal-theta", "optimal-phi", "numeric-theta", "numeric-phi"),
            "optimal-theta",
        ),
        Option("N", _positive(float), 1.0),
        Option("seed", _seed, 0, help="start point of the numeric optimizer"),
    ],
    "synth": [
        Option("target", _choice("cascade", "spin"), required=True),
        Option("D", _positive(_int), 2),
        Option("probe", _choice("optimal-theta", "optimal-phi", "uniform"), "optimal-theta"),
        Option("populations", lambda v: [float(x) for x in parse_angles(v)], None),
        Option("F", _positive(float), 1.0),
        Option("chi", parse_angle, "0.2774pi"),
    ],
    "osrs": [
        Option("F", parse_half_range, "1..5", help="spins to scan, e.g. 1..5"),
        Option("m0", float, None, help="reference sublevel (default 0, or 1/2)"),
        Option("chi_grid", _positive(_int), 2001),
        Option("curves", parse_bool, False, help="emit full variance-vs-chi curves", is_flag=True),
        Option("N", _positive(float), 1.0),
    ],
    "cfim": [
        *PROTOCOL,
        Option("theta", parse_angles, required=True, help="comma separated angles"),
        Option("N", _positive(float), 1.0),
        Option("floor", _positive(float), 1e-12),
    ],
    "simulate": [
        *PROTOCOL,
        Option("theta", parse_angles, required=True),
        *DETECTION,
        Option("runs", _positive(_int), 1000),
        Option("seed", _seed, required=True),
        *MLE,
    ],
    "sweep": [
        *PROTOCOL,
        Option("mode", _choice("cfim", "monte-carlo"), "cfim"),
        Option("grid", parse_grid, "0:pi:101", help="per-axis grid start:stop:count"),
        *DETECTION,
        Option("runs", _positive(_int), 1000),
        Option("seed", _seed, None),
        *MLE,
    ],
}

# options that never change the data payload
RUNTIME_KEYS = ("out_dir", "format", "threads", "config")


def _line_of(text: str, key: str) -> int | None:
    pat = re.compile(rf"^\s*{re.escape(key)}\s*=")
    for n, line in enumerate(text.splitlines(), start=1):
        if pat.match(line):
            return n
    return None


def load_config_file(path) -> tuple[dict, str]:
    """Read a TOML config; duplicate keys and syntax errors become ConfigError."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {str(path)!r} does not exist")
    text = path.read_text()
    try:
        return tomllib.loads(text), text
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(f"{path}: {exc}", line=int(m.group(1)) if m else None) from None


def parse_config(command: str, file_values: dict | None = None, overrides: dict | None = None,
                 text: str = "") -> dict:
    """Validate and default a command config.

    ``file_values`` may nest options in sections (``[protocol]``,
    ``[detection]``, ``[mle]``) or give them flat; ``overrides`` are flat
    command-line values and take precedence.
    """
    if command not in SCHEMAS:
        raise ConfigError(f"unknown command {command!r}")
    schema = {o.name: o for o in SCHEMAS[command]}
    sections = {o.section for o in schema.values() if o.section}
    raw: dict = {}
    for key, value in (file_values or {}).items():
        if isinstance(value, dict):
            if key not in sections:
                raise ConfigError("unknown section", field=key, line=_line_of(text, f"[{key}"))
            for sub, v in value.items():
                opt = schema.get(sub)
                if opt is None or opt.section != key:
                    raise ConfigError("unknown key", field=f"{key}.{sub}", line=_line_of(text, sub))
                if sub in raw:
                    raise ConfigError("duplicate key", field=sub, line=_line_of(text, sub))
                raw[sub] = v
        else:
            if key not in schema:
                raise ConfigError("unknown key", field=key, line=_line_of(text, key))
            if key in raw:
                raise ConfigError("duplicate key", field=key, line=_line_of(text, key))
            raw[key] = value
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in schema:
            raise ConfigError("unknown option", field=key)
        raw[key] = value

    cfg = {}
    for name, opt in schema.items():
        if name in raw:
            value = raw[name]
        elif opt.required:
            raise ConfigError("missing required value", field=name)
        else:
            value = opt.default
        if value is None:
            cfg[name] = None
            continue
        try:
            cfg[name] = opt.parse(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc), field=name, line=_line_of(text, name)) from None
    if command == "sweep" and cfg["mode"] == "monte-carlo" and cfg["seed"] is None:
        raise ConfigError("seed is mandatory for monte-carlo sweeps", field="seed")
    return cfg


def _canonical(value):
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return [_canonical(v) for v in value]
    if isinstance(value, dict):
        return {k: _canonical(v) for k, v in sorted(value.items())}
    return value


def config_digest(command: str, cfg: dict) -> str:
    payload = json.dumps({"command": command, "config": _canonical(cfg)}, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


# reports


def fmt(value) -> str:
    """CSV cell: integers verbatim, floats with 17 significant digits."""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        x = float(value)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    if value is None:
        return ""
    return str(value)


def _json_value(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        x = float(value)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(value, np.ndarray):
        return [_json_value(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_json_value(v) for v in value]
    if isinstance(value, dict):
        return {k: _json_value(v) for k, v in value.items()}
    return value


@dataclass
class Results:
    columns: list[str]
    rows: list[list]
    summary: dict = field(default_factory=dict)
    messages: list[str] = field(default_factory=list)


@dataclass
class RunManifest:
    tool_version: str
    command: str
    config_digest: str
    seed: int | None
    started_at: str
    finished_at: str
    outputs: list[str]
    config: dict
    summary: dict

    def to_dict(self) -> dict:
        return _json_value(self.__dict__)


def _atomic_write(path: Path, data: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def render_csv(results: Results) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(results.columns)
    for row in results.rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_report(results: Results, directory, fmt_name: str = "csv", manifest: dict | None = None) -> Path:
    """Write the data payload as ``data.csv`` or ``data.json``; returns the path."""
    directory = Path(directory)
    if fmt_name == "csv":
        path = directory / "data.csv"
        _atomic_write(path, render_csv(results))
    elif fmt_name == "json":
        path = directory / "data.json"
        doc = {
            "columns": results.columns,
            "rows": [[_json_value(v) for v in row] for row in results.rows],
            "summary": _json_value(results.summary),
        }
        if manifest is not None:
            doc["manifest"] = manifest
        _atomic_write(path, json.dumps(doc, indent=1) + "\n")
    else:
        raise ConfigError(f"unknown format {fmt_name!r}", field="format")
    return path


# subcommands


def _spin_spec(cfg) -> SpinRotationSpec:
    return SpinRotationSpec(cfg["F"], cfg["chi"], cfg["m_i"], cfg["m0"])


def cmd_bounds(cfg, threads) -> Results:
    scheme = cfg["scheme"]
    rows = []
    N = cfg["N"]
    for D in cfg["D"]:
        if D < 1:
            raise ConfigError("D must be positive", field="D")
        opt = qcrb_theta_opt(D, N) if scheme in ("all", "opt") else None
        ind = qcrb_individual(D, N) if scheme in ("all", "ind", "opt") else None
        phi = qcrb_phi_opt(D, N) if scheme in ("all", "phi") else None
        indirect = indirect_phi_bound(D, N) if scheme in ("all", "indirect") else None
        z = zeta_db(opt, ind) if opt is not None else None
        rows.append([D, N, opt, ind, phi, indirect, z])
    cols = ["D", "N", "var_opt_theta", "var_ind", "var_opt_phi", "var_indirect_phi", "zeta_db"]
    return Results(cols, rows)


def cmd_probe(cfg, threads) -> Results:
    D, kind = cfg["D"], cfg["kind"]
    if kind == "optimal-theta":
        probe = optimal_probe_theta(D)
    elif kind == "optimal-phi":
        probe = optimal_probe_phi(D)
    else:
        pkind = "theta_ref" if kind == "numeric-theta" else "phi_neighbor"
        probe = optimize_probe_numeric(pkind, D, seed=cfg["seed"])
    pmap = make_parametrization("phi_neighbor" if kind.endswith("phi") else "theta_ref", D)
    variance = qcrb_total_variance(qfim_pure(probe, pmap, cfg["N"]))
    rows = [[k, float(np.real(a)), float(w)] for k, (a, w) in enumerate(zip(probe.amplitudes, probe.populations))]
    return Results(["k", "amplitude", "population"], rows, {"total_variance": variance})


def cmd_synth(cfg, threads) -> Results:
    if cfg["target"] == "spin":
        spec = SpinRotationSpec(cfg["F"], cfg["chi"])
        U = spin_rotation(spec).entries
        m = spin_levels(cfg["F"])
        rows = [[r, c, m[r], m[c], U[r, c]] for r in range(U.shape[0]) for c in range(U.shape[1])]
        dev = float(np.abs(U @ U.T - np.eye(U.shape[0])).max())
        summary = {"orthogonality_max_dev": dev, "orthogonality_pass": dev <= 1e-12}
        return Results(["row", "col", "m_row", "m_col", "value"], rows, summary,
                       [f"orthogonality: max |U U^T - I| = {dev:.3e} ({'pass' if dev <= 1e-12 else 'FAIL'})"])
    D = cfg["D"]
    if cfg["populations"] is not None:
        probe = ProbeState.from_populations(cfg["populations"])
    elif cfg["probe"] == "optimal-theta":
        probe = optimal_probe_theta(D)
    elif cfg["probe"] == "optimal-phi":
        probe = optimal_probe_phi(D)
    else:
        probe = ProbeState.from_populations(np.full(D + 1, 1.0 / (D + 1)))
    angles = bs_cascade_angles(probe)
    U = bs_cascade_unitary(angles).entries
    dev = float(np.abs(U @ U.T - np.eye(U.shape[0])).max())
    recon = float(np.abs(U[:, 0] ** 2 - probe.populations).max())
    ok = dev <= 1e-12 and recon <= 1e-12
    rows = [[k, eta, math.cos(eta) ** 2] for k, eta in enumerate(angles.etas, start=1)]
    summary = {
        "orthogonality_max_dev": dev,
        "reconstruction_max_dev": recon,
        "orthogonality_pass": ok,
    }
    msg = (f"orthogonality: max |U U^T - I| = {dev:.3e}, population error = {recon:.3e} "
           f"({'pass' if ok else 'FAIL'})")
    return Results(["k", "eta_k", "cos2_eta_k"], rows, summary, [msg])


def cmd_osrs(cfg, threads) -> Results:
    rows = []
    summary = {}
    for F in cfg["F"]:
        m0 = cfg["m0"] if cfg["m0"] is not None else (round(2 * F) % 2) / 2
        if cfg["curves"]:
            chis = math.pi * np.arange(1, cfg["chi_grid"] + 1) / (cfg["chi_grid"] + 1)
            for m_i in sorted(spin_levels(F)):
                for chi in chis:
                    try:
                        v = osrs_variance(SpinRotationSpec(F, chi, m_i, m0), cfg["N"])
                    except RamseyError:
                        v = math.inf
                    rows.append([F, m_i, float(chi), v])
        else:
            chi, m_i, var = osrs_optimize(F, m0, cfg["chi_grid"])
            rows.append([F, m_i, chi, var / cfg["N"]])
            summary[f"F={fmt(F)}"] = {
                "variance": var / cfg["N"],
                "qcrb_theta_opt": qcrb_theta_opt(int(round(2 * F)), cfg["N"]),
                "qcrb_individual": qcrb_individual(int(round(2 * F)), cfg["N"]),
            }
    return Results(["F", "m_i", "chi", "variance"], rows, summary)


def cmd_cfim(cfg, threads) -> Results:
    proto = osrs_protocol(_spin_spec(cfg))
    theta = cfg["theta"]
    if len(theta) != proto.D:
        raise ConfigError(f"theta needs {proto.D} values", field="theta")
    C = cfim_matrix(proto, theta, cfg["N"], cfg["floor"]).entries
    Q = qfim_pure(proto.probe, proto.map, cfg["N"]).entries
    rows = [[l + 1, n + 1, C[l, n], Q[l, n]] for l in range(proto.D) for n in range(proto.D)]
    crb = qcrb_total_variance(C)
    summary = {
        "crb_total_variance": crb,
        "qcrb_total_variance": qcrb_total_variance(Q),
        "zeta_db": zeta_db(crb, qcrb_individual(proto.D, cfg["N"])),
    }
    return Results(["l", "n", "cfim", "qfim"], rows, summary)


def _mle(cfg) -> MleConfig:
    return MleConfig(cfg["grid_points"], (0.0, math.pi), cfg["refine_iters"], cfg["prob_floor"])


def _detection(cfg) -> DetectionModel:
    return DetectionModel(cfg["sigma"], cfg["atoms"], cfg["poisson"])


def cmd_simulate(cfg, threads) -> Results:
    proto = osrs_protocol(_spin_spec(cfg))
    exp = ExperimentConfig(proto, cfg["theta"], _detection(cfg), cfg["runs"], cfg["seed"], _mle(cfg))
    est = run_monte_carlo(exp, workers=threads)
    D = proto.D
    rows = [[r, *est.estimates[r], est.squared_errors[r]] for r in range(cfg["runs"])]
    cols = ["run", *[f"theta{k}_hat" for k in range(1, D + 1)], "sq_err_total"]
    summary = {
        "total_variance": est.total_variance,
        "per_parameter": est.per_parameter,
        "mean_estimate": est.mean_estimate,
        "zeta_db": est.zeta_db,
        "zeta_std_error_db": est.zeta_std_error_db,
    }
    return Results(cols, rows, summary)


def cmd_sweep(cfg, threads) -> Results:
    proto = osrs_protocol(_spin_spec(cfg))
    start, stop, count = cfg["grid"]
    axis = np.linspace(start, stop, count)
    axes = [axis] * proto.D
    mode = "cfim_noiseless" if cfg["mode"] == "cfim" else "monte_carlo"
    Z = sweep_zeta_grid(proto, axes, mode, _detection(cfg), cfg["runs"], cfg["seed"], _mle(cfg), threads)
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    rows = [[*p, z] for p, z in zip(pts, Z.ravel())]
    cols = [f"theta{k}" for k in range(1, proto.D + 1)] + ["zeta_db"]
    finite = np.where(np.isfinite(Z), Z, -np.inf)
    best = np.unravel_index(int(np.argmax(finite)), Z.shape)
    summary = {"max_zeta_db": float(Z[best]), "argmax_theta": [float(a[i]) for a, i in zip(axes, best)]}
    return Results(cols, rows, summary)


COMMANDS = {
    "bounds": cmd_bounds,
    "probe": cmd_probe,
    "synth": cmd_synth,
    "osrs": cmd_osrs,
    "cfim": cmd_cfim,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
}


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def run_command(command: str, cfg: dict, out_root=None, fmt_name: str = "csv", threads: int = 1) -> RunManifest:
    """Run one subcommand on a validated config and write its outputs."""
    started = _now()
    results = COMMANDS[command](cfg, threads)
    digest = config_digest(command, cfg)
    root = Path(out_root or os.environ.get("RAMSEY_OUT_DIR") or "out")
    directory = root / command / digest
    manifest = RunManifest(
        tool_version=__version__,
        command=command,
        config_digest=digest,
        seed=cfg.get("seed"),
        started_at=started,
        finished_at="",
        outputs=[],
        config=_canonical_config(cfg),
        summary=results.summary,
    )
    data_path = write_report(results, directory, fmt_name, manifest=None)
    manifest.outputs = [str(data_path), str(directory / "manifest.json")]
    manifest.finished_at = _now()
    if fmt_name == "json":
        write_report(results, directory, fmt_name, manifest=manifest.to_dict())
    _atomic_write(directory / "manifest.json", json.dumps(manifest.to_dict(), indent=1) + "\n")
    for line in results.messages:
        print(line)
    return manifest


def _canonical_config(cfg: dict) -> dict:
    return {k: _json_value(v) for k, v in cfg.items()}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="multiramsey", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, schema in SCHEMAS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", help="TOML config file")
        p.add_argument("--out-dir", dest="out_dir", help="output root (default: $RAMSEY_OUT_DIR or ./out)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--threads", type=int, default=1, help="worker processes for Monte Carlo")
        for opt in schema:
            if name == "synth" and opt.name == "target":
                p.add_argument("target", nargs="?", default=None, choices=("cascade", "spin"))
                continue
            flag = "--" + opt.name.replace("_", "-")
            if opt.is_flag:
                p.add_argument(flag, dest=opt.name, action="store_const", const=True, default=None,
                               help=opt.help)
            else:
                p.add_argument(flag, dest=opt.name, default=None, help=opt.help)
            if opt.name == "m0":
                p.add_argument("--m-0", dest="m0", default=None, help=argparse.SUPPRESS)
    return parser


def _diagnostic(exc: BaseException, kind: str) -> str:
    doc = {"error": type(exc).__name__, "kind": kind, "message": str(exc)}
    for attr in ("field", "line", "condition", "run"):
        v = getattr(exc, attr, None)
        if v is not None:
            doc[attr] = _json_value(v)
    return json.dumps(doc)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", *RUNTIME_KEYS)}
    try:
        file_values, text = ({}, "")
        if args.config:
            file_values, text = load_config_file(args.config)
        cfg = parse_config(command, file_values, overrides, text)
        t0 = time.perf_counter()
        manifest = run_command(command, cfg, args.out_dir, args.format, max(1, args.threads))
    except ConfigError as exc:
        print(_diagnostic(exc, "config"), file=sys.stderr)
        return EXIT_CONFIG
    except InvalidArgument as exc:
        print(_diagnostic(exc, "config"), file=sys.stderr)
        return EXIT_CONFIG
    except RamseyError as exc:
        print(_diagnostic(exc, "numeric"), file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(_diagnostic(exc, "io"), file=sys.stderr)
        return EXIT_IO
    elapsed = time.perf_counter() - t0
    print(f"{command}: wrote {manifest.outputs[0]} ({elapsed:.2f} s)")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
