"""Command-line front end: single evaluations, sweeps, thresholds, key rates,
shot experiments and counts ingestion, emitting CSV or JSON result rows.

Every command writes rows with one fixed column set so downstream tooling
(the plotting front end in particular) can consume any output file. Floats
are serialized with repr, which round-trips exactly; missing values are
empty cells. Sweeps fan out over a thread pool capped by QCT_THREADS, and
rows are buffered and written in grid order, so output bytes do not depend
on scheduling.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import io
import json
import math
import os
import sys
from dataclasses import replace

import numpy as np

from . import keyrate as keyrate_mod
from . import models, noise as noise_mod, protocol, shots as shots_mod
from .linalg import ConvergenceError, LinalgError
from .models import DegenerateGroundStateError, ModelSpec
from .protocol import ProtocolConfig

COLUMNS = [
    "model", "n", "j", "h", "basis", "a", "observable", "noise_kind", "noise_site",
    "p", "alpha", "xi", "eta", "theta", "delta_exact", "n_shots", "mean", "sem",
    "e_bit", "e_ph", "k_asym", "seed",
]

_OBSERVABLE_NAMES = {
    "charge": models.CHARGE,
    "energy": models.ENERGY,
    "energy-z": models.ENERGY_Z,
    "energy-xx": models.ENERGY_XX,
}
_NOISE_NAMES = {
    "classical-flip": noise_mod.CLASSICAL_FLIP,
    "excited-mixture": noise_mod.EXCITED_MIXTURE,
    "excited-superposition": noise_mod.EXCITED_SUPERPOSITION,
    "bit-flip": noise_mod.BIT_FLIP,
    "phase-flip": noise_mod.PHASE_FLIP,
}


class CliError(ValueError):
    """Bad flags, config keys, or flag combinations."""


_VALIDATION_ERRORS = (
    CliError,
    models.ModelError,
    protocol.ProtocolError,
    noise_mod.NoiseError,
    shots_mod.ShotsError,
    keyrate_mod.KeyRateError,
)
_NUMERICAL_ERRORS = (ConvergenceError, DegenerateGroundStateError, LinalgError)


def thread_count() -> int:
    raw = os.environ.get("QCT_THREADS")
    if raw is None:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise CliError(f"QCT_THREADS must be an integer >= 1, got {raw!r}") from None
    if value < 1:
        raise CliError(f"QCT_THREADS must be >= 1, got {value}")
    return value


def _map_ordered(fn, items):
    workers = thread_count()
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# option registry: drives argparse, config-file validation, and defaults
# ---------------------------------------------------------------------------

def _parse_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise CliError(f"expected a boolean, got {raw!r}")


def _parse_grid(raw: str) -> tuple[float, float, int]:
    parts = raw.split(":")
    if len(parts) != 3:
        raise CliError(f"grid must look like start:stop:steps, got {raw!r}")
    try:
        start, stop, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise CliError(f"grid must look like start:stop:steps, got {raw!r}") from None
    return start, stop, steps


class Opt:
    def __init__(self, name, type_fn, default, choices=None, help=""):
        self.name = name
        self.type_fn = type_fn
        self.default = default
        self.choices = choices
        self.help = help


_MODEL_OPTS = [
    Opt("model", str, "star", choices=("star", "nn"), help="coupling geometry"),
    Opt("n", int, 1, help="Bob's site index (N+1 qubits total)"),
    Opt("j", float, 1.0, help="coupling strength J"),
    Opt("h", float, 1.0, help="transverse field h"),
]
_PROTOCOL_OPTS = [
    Opt("basis", str, "x", choices=("x", "y"), help="Alice's measurement basis"),
    Opt("observable", str, "charge", choices=tuple(_OBSERVABLE_NAMES), help="Bob's observable"),
    Opt("a", int, 0, choices=(0, 1), help="Alice's decision bit"),
    Opt("theta", float, None, help="fixed rotation angle (default: optimal for a=0)"),
]
_NOISE_OPTS = [
    Opt("noise", str, None, choices=tuple(_NOISE_NAMES), help="noise channel"),
    Opt("site", str, None, choices=("alice", "bob"), help="flip-channel target site"),
    Opt("alpha", float, 0.0, help="superposition phase"),
    Opt("p", float, None, help="noise probability"),
]
_OUT_OPTS = [
    Opt("out", str, None, help="output file (default: stdout)"),
    Opt("format", str, None, choices=("csv", "json"), help="row format (default: by extension, else csv)"),
    Opt("verify", _parse_bool, False, help="re-audit rows against the closed-form relation"),
    Opt("config", str, None, help="flat key=value config file; flags override it"),
    Opt("seed", int, 0, help="base RNG seed"),
]

_COMMAND_OPTS = {
    "teleport": _MODEL_OPTS + _PROTOCOL_OPTS + _OUT_OPTS,
    "sweep": _MODEL_OPTS + _PROTOCOL_OPTS + _NOISE_OPTS + _OUT_OPTS + [
        Opt("variable", str, None, choices=("j", "h", "p", "n"), help="swept variable"),
        Opt("start", float, None, help="grid start"),
        Opt("stop", float, None, help="grid stop"),
        Opt("steps", int, None, help="grid size (>= 2)"),
    ],
    "noise": _MODEL_OPTS + _PROTOCOL_OPTS + _NOISE_OPTS + _OUT_OPTS + [
        Opt("p-grid", _parse_grid, (0.0, 0.5, 51), help="p grid as start:stop:steps"),
    ],
    "keyrate": _MODEL_OPTS + _OUT_OPTS + [
        Opt("noise", str, "bob-phaseflip", choices=("bob-phaseflip",), help="noise channel"),
        Opt("p", _parse_grid, (0.0, 0.1, 21), help="p grid as start:stop:steps"),
        Opt("reference", str, "exact", choices=("exact", "sampled"), help="per-round reference model"),
        Opt("block", int, 1, help="shots per round block"),
    ],
    "shots": _MODEL_OPTS + _PROTOCOL_OPTS + _OUT_OPTS + [
        Opt("n-shots", int, 10000, help="rounds to sample"),
        Opt("counts-out", str, None, help="also write the counts histogram JSON here"),
    ],
    "ingest": _OUT_OPTS + [
        Opt("j", float, None, help="coupling J (for two-file energy ingestion)"),
        Opt("h", float, None, help="field h (for two-file energy ingestion)"),
    ],
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qct", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for command, opts in _COMMAND_OPTS.items():
        p = sub.add_parser(command)
        if command == "ingest":
            p.add_argument("files", nargs="+", help="counts histogram JSON file(s)")
        for opt in opts:
            kwargs = {"default": None, "help": opt.help, "dest": opt.name.replace("-", "_")}
            if opt.type_fn is _parse_bool:
                kwargs["action"] = "store_const"
                kwargs["const"] = True
            else:
                kwargs["type"] = opt.type_fn if opt.type_fn is not str else str
                if opt.choices and opt.type_fn in (str, int):
                    kwargs["choices"] = opt.choices
            p.add_argument(f"--{opt.name}", **kwargs)
    return parser


def _load_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise CliError(f"{path}:{lineno}: expected key = value, got {text!r}")
            key, raw = text.split("=", 1)
            values[key.strip().replace("-", "_")] = raw.strip()
    return values


def _resolve_options(args: argparse.Namespace, command: str) -> dict:
    """Merge flag > config-file > default, rejecting unknown config keys."""
    opts = {opt.name.replace("-", "_"): opt for opt in _COMMAND_OPTS[command]}
    resolved = {dest: getattr(args, dest) for dest in opts}
    if resolved.get("config"):
        file_values = _load_config_file(resolved["config"])
        unknown = set(file_values) - set(opts)
        if unknown:
            raise CliError(
                f"unknown config key(s): {', '.join(sorted(unknown))}; "
                f"valid keys: {', '.join(sorted(opts))}"
            )
        for dest, raw in file_values.items():
            if resolved[dest] is None or (dest == "verify" and resolved[dest] is False):
                opt = opts[dest]
                value = opt.type_fn(raw)
                if opt.choices and value not in opt.choices:
                    raise CliError(f"config key {dest}: {value!r} not in {opt.choices}")
                resolved[dest] = value
    for dest, opt in opts.items():
        if resolved[dest] is None:
            resolved[dest] = opt.default
    if command == "ingest":
        resolved["files"] = args.files
    return resolved


# ---------------------------------------------------------------------------
# row emission
# ---------------------------------------------------------------------------

def blank_row() -> dict:
    return {col: None for col in COLUMNS}


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return repr(value)
    return str(value)


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow([_cell(row[col]) for col in COLUMNS])
    return buf.getvalue()


def rows_to_json(rows: list[dict]) -> str:
    cooked = []
    for row in rows:
        item = {}
        for col in COLUMNS:
            value = row[col]
            if isinstance(value, float) and math.isnan(value):
                value = None
            item[col] = value
        cooked.append(item)
    return json.dumps(cooked, indent=2) + "\n"


def _emit(rows: list[dict], options: dict) -> None:
    fmt = options.get("format")
    out = options.get("out")
    if fmt is None:
        fmt = "json" if (out or "").endswith(".json") else "csv"
    text = rows_to_json(rows) if fmt == "json" else rows_to_csv(rows)
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _summary(message: str, options: dict) -> None:
    stream = sys.stdout if options.get("out") else sys.stderr
    print(message, file=stream)


def _verify_rows(rows: list[dict]) -> None:
    """Re-audit clean rows: the pipeline delta must satisfy the closed form."""
    for row in rows:
        if row["noise_kind"] is not None or row["delta_exact"] is None or row["xi"] is None:
            continue
        expected = protocol.delta_at_angle(row["xi"], row["eta"], row["theta"], row["a"])
        if abs(expected - row["delta_exact"]) > 1e-9:
            raise LinalgError(
                f"verify failed: closed form {expected!r} vs pipeline {row['delta_exact']!r}"
            )
        spec = ModelSpec(kind=row["model"], n=row["n"], j=row["j"], h=row["h"])
        config = ProtocolConfig(
            spec=spec, basis=row["basis"], observable=_OBSERVABLE_NAMES[row["observable"]],
            a=row["a"], theta=row["theta"],
        )
        redo = protocol.run_on_ground_state(config)
        if abs(redo.delta - row["delta_exact"]) > 1e-12:
            raise LinalgError("verify failed: pipeline re-run deviates from emitted row")


# ---------------------------------------------------------------------------
# command implementations
# ---------------------------------------------------------------------------

def _model_spec(options: dict) -> ModelSpec:
    return ModelSpec(kind=options["model"], n=options["n"], j=options["j"], h=options["h"])


def _protocol_config(options: dict, spec: ModelSpec | None = None) -> ProtocolConfig:
    return ProtocolConfig(
        spec=spec or _model_spec(options),
        basis=options["basis"],
        observable=_OBSERVABLE_NAMES[options["observable"]],
        a=options["a"],
        theta=options["theta"],
    )


def _noise_spec(options: dict, spec: ModelSpec, p: float | None = None) -> noise_mod.NoiseSpec | None:
    if options.get("noise") is None:
        if options.get("site") is not None:
            raise CliError("--site is only meaningful together with --noise")
        return None
    kind = _NOISE_NAMES[options["noise"]]
    site = None
    if kind in (noise_mod.BIT_FLIP, noise_mod.PHASE_FLIP):
        if options.get("site") is None:
            raise CliError(f"--noise {options['noise']} requires --site alice|bob")
        site = 0 if options["site"] == "alice" else spec.n
    prob = options["p"] if p is None else p
    if prob is None:
        raise CliError("--p is required when a noise channel is set")
    return noise_mod.NoiseSpec(kind=kind, p=prob, site=site, alpha=options["alpha"])


def _base_row(options: dict, spec: ModelSpec) -> dict:
    row = blank_row()
    row.update(
        model=spec.kind, n=spec.n, j=spec.j, h=spec.h,
        basis=options.get("basis"), a=options.get("a"),
        observable=options.get("observable"), seed=options.get("seed"),
    )
    return row


def _teleport_row(options: dict, spec: ModelSpec, noise: noise_mod.NoiseSpec | None) -> dict:
    config = _protocol_config(options, spec)
    result = protocol.run_on_ground_state(config)
    row = _base_row(options, spec)
    row.update(xi=result.xi, eta=result.eta, theta=result.theta, delta_exact=result.delta)
    if noise is not None:
        row.update(
            noise_kind=noise.kind, noise_site=noise.site, p=noise.p, alpha=noise.alpha,
            delta_exact=noise_mod.noisy_delta(config, noise),
        )
    return row


def cmd_teleport(options: dict) -> tuple[list[dict], str]:
    spec = _model_spec(options)
    row = _teleport_row(options, spec, None)
    return [row], (
        f"teleport {spec.kind} n={spec.n} j={spec.j} h={spec.h} a={options['a']}: "
        f"delta={row['delta_exact']:.6f} (xi={row['xi']:.6f}, eta={row['eta']:.6f})"
    )


# default grids shaped like the published figures (h starts off the
# degenerate h=0 point)
_SWEEP_DEFAULTS = {
    "j": (0.0, 4.0, 41),
    "h": (0.1, 4.0, 40),
    "p": (0.0, 0.5, 26),
    "n": (1.0, 4.0, 4),
}


def cmd_sweep(options: dict) -> tuple[list[dict], str]:
    variable = options["variable"]
    if variable is None:
        raise CliError("--variable is required for sweep")
    defaults = _SWEEP_DEFAULTS[variable]
    start = defaults[0] if options["start"] is None else options["start"]
    stop = defaults[1] if options["stop"] is None else options["stop"]
    steps = defaults[2] if options["steps"] is None else options["steps"]
    if steps < 2:
        raise CliError(f"--steps must be >= 2, got {steps}")
    if not start < stop:
        raise CliError(f"--start must be below --stop, got {start} >= {stop}")
    if variable == "p" and (start < 0.0 or stop > 1.0):
        raise CliError("p sweeps must stay inside [0, 1]")
    if variable == "n":
        if steps != int(stop) - int(start) + 1 or start != int(start) or stop != int(stop):
            raise CliError("n sweeps need integer bounds and steps = stop - start + 1")
        grid = [float(v) for v in range(int(start), int(stop) + 1)]
    else:
        grid = [float(v) for v in np.linspace(start, stop, steps)]

    def point(value: float) -> dict:
        opts = dict(options)
        if variable in ("j", "h"):
            opts[variable] = value
        elif variable == "n":
            opts["n"] = int(value)
        spec = _model_spec(opts)
        noise = _noise_spec(opts, spec, p=value if variable == "p" else None)
        if variable == "p" and noise is None:
            raise CliError("p sweeps need --noise")
        return _teleport_row(opts, spec, noise)

    rows = _map_ordered(point, grid)
    return rows, f"sweep {variable} over [{start}, {stop}] in {len(grid)} steps"


def cmd_noise(options: dict) -> tuple[list[dict], str]:
    spec = _model_spec(options)
    start, stop, steps = options["p_grid"]
    if steps < 2 or not 0.0 <= start < stop <= 1.0:
        raise CliError(f"bad p grid {start}:{stop}:{steps}")
    template = _noise_spec(options, spec, p=start)
    if template is None:
        raise CliError("--noise is required for the noise command")
    grid = [float(v) for v in np.linspace(start, stop, steps)]
    rows = _map_ordered(lambda p: _teleport_row(options, spec, replace(template, p=p)), grid)
    config = _protocol_config(options, spec)
    threshold = noise_mod.find_sign_threshold(config, template, np.array(grid))
    note = f"threshold p*={threshold:.6f}" if threshold is not None else "no sign change on the grid"
    return rows, f"noise {template.kind} on {spec.kind} n={spec.n}: {note}"


def cmd_keyrate(options: dict) -> tuple[list[dict], str]:
    spec = _model_spec(options)
    start, stop, steps = options["p"]
    if steps < 2 or not 0.0 <= start < stop <= 1.0:
        raise CliError(f"bad p grid {start}:{stop}:{steps}")
    grid = np.linspace(start, stop, steps)
    points = _map_ordered(
        lambda p: keyrate_mod.key_rate_point(
            spec, float(p), reference=options["reference"], m=options["block"]
        ),
        list(grid),
    )
    rows = []
    for point in points:
        row = _base_row(options, spec)
        row.update(
            observable="charge", noise_kind=noise_mod.PHASE_FLIP, noise_site=spec.n,
            p=point.p, e_bit=point.e_bit, e_ph=point.e_ph, k_asym=point.k_asym,
            basis=None, a=0,
        )
        rows.append(row)
    head = points[0]
    return rows, (
        f"keyrate {spec.kind} n={spec.n} ({options['reference']} reference): "
        f"K(p={head.p:g})={head.k_asym:.4f}, e_bit={head.e_bit:.4f}, e_ph={head.e_ph:.4f}"
    )


def cmd_shots(options: dict) -> tuple[list[dict], str]:
    spec = _model_spec(options)
    config = _protocol_config(options, spec)
    n_shots, seed = options["n_shots"], options["seed"]
    resource = models.ground_spectrum(spec).ground_state
    exact = protocol.run_exact(config, resource)

    if config.observable == models.ENERGY:
        if options["counts_out"]:
            raise CliError("counts export needs a single-setting observable; sample energy components")
        batch_z = shots_mod.sample_protocol(replace(config, observable=models.ENERGY_Z), resource, n_shots, seed)
        batch_xx = shots_mod.sample_protocol(replace(config, observable=models.ENERGY_XX), resource, n_shots, seed + 1)
        stats = shots_mod.energy_stats(batch_z, batch_xx, spec.h, spec.j)
    else:
        batch = shots_mod.sample_protocol(config, resource, n_shots, seed)
        if config.observable == models.CHARGE:
            stats = shots_mod.charge_stats(batch)
        else:
            mean = batch.outcome_mean()
            scale = spec.h if config.observable == models.ENERGY_Z else spec.j
            var = scale * scale * (1.0 - mean * mean)
            stats = shots_mod.ShotStats(
                mean=scale * mean, variance_single=var,
                sem=math.sqrt(var / n_shots), n_shots=n_shots,
            )
        if options["counts_out"]:
            payload = shots_mod.counts_payload(batch, spec.n_qubits)
            with open(options["counts_out"], "w", encoding="utf-8") as fh:
                json.dump(payload, fh, indent=2, sort_keys=True)
                fh.write("\n")

    row = _base_row(options, spec)
    row.update(
        xi=exact.xi, eta=exact.eta, theta=exact.theta, delta_exact=exact.delta,
        n_shots=stats.n_shots, mean=stats.mean, sem=stats.sem,
    )
    return [row], (
        f"shots {config.observable} n_shots={n_shots} seed={seed}: "
        f"mean={stats.mean:.6f} +- {stats.sem:.6f} (exact final {exact.final_value:.6f})"
    )


def cmd_ingest(options: dict) -> tuple[list[dict], str]:
    files = options["files"]
    batches = [shots_mod.ingest_counts(path) for path in files]
    row = blank_row()
    row["seed"] = options["seed"]
    if len(batches) == 1:
        batch = batches[0]
        if batch.measured_basis == shots_mod.BASIS_Z:
            stats = shots_mod.charge_stats(batch)
            row["observable"] = "charge"
        else:
            mean = batch.outcome_mean()
            stats = shots_mod.ShotStats(
                mean=mean, variance_single=1.0 - mean * mean,
                sem=math.sqrt((1.0 - mean * mean) / batch.n_shots), n_shots=batch.n_shots,
            )
            row["observable"] = "energy-xx"
        message = f"ingest {files[0]}: mean={stats.mean:.6f} +- {stats.sem:.6f}"
    elif len(batches) == 2:
        if options["h"] is None or options["j"] is None:
            raise CliError("two-file energy ingestion needs --h and --j")
        stats = shots_mod.energy_stats(batches[0], batches[1], options["h"], options["j"])
        row.update(observable="energy", j=options["j"], h=options["h"])
        message = f"ingest energy from {files[0]} + {files[1]}: mean={stats.mean:.6f} +- {stats.sem:.6f}"
    else:
        raise CliError("ingest takes one histogram, or two (z then xx) for energy")
    row.update(n_shots=stats.n_shots, mean=stats.mean, sem=stats.sem)
    return [row], message


_COMMANDS = {
    "teleport": cmd_teleport,
    "sweep": cmd_sweep,
    "noise": cmd_noise,
    "keyrate": cmd_keyrate,
    "shots": cmd_shots,
    "ingest": cmd_ingest,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        options = _resolve_options(args, args.command)
    except OSError as exc:
        print(f"qct: {exc}", file=sys.stderr)
        return 2
    except _VALIDATION_ERRORS as exc:
        print(f"qct: {exc}", file=sys.stderr)
        return 2

    try:
        rows, message = _COMMANDS[args.command](options)
        if options.get("verify"):
            _verify_rows(rows)
        _emit(rows, options)
    except _VALIDATION_ERRORS as exc:
        print(f"qct: {exc}", file=sys.stderr)
        return 2
    except _NUMERICAL_ERRORS as exc:
        print(f"qct: numerical failure: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"qct: {exc}", file=sys.stderr)
        return 2
    _summary(message, options)
    return 0


if __name__ == "__main__":
    sys.exit(main())
