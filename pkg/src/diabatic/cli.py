"""Command-line front end: ``python -m diabatic <command> --config run.json``.

Every command is a pure function of the JSON config and the seed. Flags
override the matching config entries before the config hash is taken, so
the hash in each output file identifies the effective run.

Exit codes: 0 success, 2 config or usage error, 3 simulation failure.
"""

from __future__ import annotations

import argparse
import copy
import json
import sys
from pathlib import Path
from typing import Any

import numpy as np

from diabatic import io
from diabatic.device import DeviceParams, reference_device
from diabatic.landscape import AXES, SweepSpec, find_dips, hold_trace, optimize, sweep, sync_spectrum, tune
from diabatic.propagator import effective_unitary, full_unitary, propagate
from diabatic.pulse import TrapezoidPulse, sample
from diabatic.unitary import FsimAngles, build_unitary, fit_unitary
from diabatic.xeb import NoiseModel, alphas_from_counts, analyze, circuit_family, run_xeb

EXIT_OK, EXIT_USAGE, EXIT_SIMULATION = 0, 2, 3
COMMANDS = ("trace", "landscape", "sync-spectrum", "optimize", "fit-unitary", "xeb")


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="diabatic", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", help="output directory (default: config 'out' or ./out)")
        p.add_argument("--seed", type=int, help="overrides the config seed")
        p.add_argument("--threads", type=int, help="worker threads for sweeps and circuits")
        p.add_argument("--dt", type=float, help="propagation time step in ns")
    return parser


def load_config(args) -> dict[str, Any]:
    try:
        config = json.loads(Path(args.config).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object")
    config = copy.deepcopy(config)
    for key in ("seed", "threads", "dt"):
        value = getattr(args, key)
        if value is not None:
            config[key] = value
    if "seed" not in config:
        raise ConfigError("a seed is required (config 'seed' or --seed)")
    if not isinstance(config["seed"], int) or config["seed"] < 0:
        raise ConfigError("seed must be a non-negative integer")
    config.setdefault("dt", 0.005)
    config.setdefault("threads", 1)
    if not config["dt"] > 0:
        raise ConfigError("dt must be positive")
    if int(config["threads"]) < 1:
        raise ConfigError("threads must be >= 1")
    return config


def _section(config, name) -> dict:
    section = config.get(name)
    if not isinstance(section, dict):
        raise ConfigError(f"config needs a '{name}' object")
    return section


def _device(config) -> DeviceParams:
    spec = config.get("device", "reference")
    if spec == "reference":
        return reference_device()
    if not isinstance(spec, dict):
        raise ConfigError("device must be 'reference' or an object")
    return DeviceParams.from_dict(spec)


def _pulse(config) -> TrapezoidPulse:
    return TrapezoidPulse.from_dict(_section(config, "pulse"))


def _range(spec, name) -> tuple[float, float, int]:
    try:
        lo, hi, steps = spec
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be [min, max, steps]") from exc
    if int(steps) != steps or steps < 1:
        raise ConfigError(f"{name}: steps must be a positive integer")
    return float(lo), float(hi), int(steps)


def _angles(spec) -> FsimAngles:
    if not isinstance(spec, dict):
        raise ConfigError("angles must be an object with theta, phi, delta_plus, delta_c, delta_d")
    try:
        return FsimAngles(**{k: float(v) for k, v in spec.items()})
    except TypeError as exc:
        raise ConfigError(f"bad angles: {exc}") from exc


def cmd_trace(config, out: Path, meta) -> None:
    spec = _section(config, "trace")
    lo, hi, steps = _range(spec.get("hold"), "trace.hold")
    device, pulse = _device(config), _pulse(config)
    holds = np.linspace(lo, hi, steps)
    holds, eps_swap, eps_leak = hold_trace(pulse, device, holds, config["dt"])
    io.write_csv(out / "trace.csv", ("t_hold_ns", "eps_swap", "eps_leak", "total"),
                 zip(holds, eps_swap, eps_leak, eps_swap + eps_leak), meta)
    leak_dips = find_dips(holds, eps_leak) if steps >= 3 else []
    total_dips = find_dips(holds, eps_swap + eps_leak) if steps >= 3 else []
    positions = [d.x for d in leak_dips]
    best = int(np.argmin(eps_swap + eps_leak))
    io.write_json(
        out / "dips.json",
        {
            "leakage_dips": [{"t_hold": d.x, "eps_leak": d.value} for d in leak_dips],
            "total_dips": [{"t_hold": d.x, "total": d.value} for d in total_dips],
            "leakage_dip_spacing": list(np.diff(positions)),
            "mean_spacing": float(np.mean(np.diff(positions))) if len(positions) > 1 else None,
            "best_sample": {"t_hold": holds[best], "eps_swap": eps_swap[best], "eps_leak": eps_leak[best]},
        },
        meta,
    )


def cmd_landscape(config, out: Path, meta) -> None:
    grids = _section(config, "landscape").get("grids")
    if not isinstance(grids, list) or not grids:
        raise ConfigError("landscape.grids must be a non-empty list")
    device, pulse = _device(config), _pulse(config)
    specs = []
    for g in grids:
        try:
            specs.append(
                SweepSpec(g["axis_x"], g["axis_y"], _range(g["x"], "x"), _range(g["y"], "y"), pulse)
            )
        except KeyError as exc:
            raise ConfigError(f"grid entry missing {exc}") from exc
    for spec in specs:
        grid = sweep(spec, device, config["dt"], int(config["threads"]))
        ux, uy = AXES[spec.axis_x][1], AXES[spec.axis_y][1]
        header = (f"{spec.axis_x}_{ux}", f"{spec.axis_y}_{uy}", "eps_swap", "eps_leak", "total")
        rows = ((x, y, s, l, s + l) for x, y, s, l in grid.rows())
        io.write_csv(out / f"landscape_{spec.axis_x}_{spec.axis_y}.csv", header, rows, meta)


def cmd_sync_spectrum(config, out: Path, meta) -> None:
    spec = config.get("sync_spectrum", {})
    lo, hi = spec.get("freq_range", (4.0, 7.0))
    n_lo, n_hi = spec.get("n_range", (2, 10))
    points = sync_spectrum(
        _device(config), (float(lo), float(hi)), range(int(n_lo), int(n_hi) + 1), config["dt"],
        float(spec.get("tolerance", 1e-3)),
    )
    io.write_csv(
        out / "sync_spectrum.csv",
        ("n", "interaction_freq_GHz", "hold_time_ns", "coupling_GHz", "residual_swap", "residual_leak", "within_tolerance"),
        ((p.n, p.interaction_freq, p.hold_time, p.coupling, p.residual_swap, p.residual_leak, p.within_tolerance)
         for p in points),
        meta,
    )
    io.write_json(out / "sync_spectrum.json", {"points": [p.to_dict() for p in points]}, meta)


def cmd_optimize(config, out: Path, meta) -> None:
    spec = config.get("optimize", {})
    device, pulse = _device(config), _pulse(config)
    initial = tuple(spec["initial"]) if "initial" in spec else None
    if "freq_window" in spec:
        lo, hi = spec["freq_window"]
        result = tune(device, pulse, (float(lo), float(hi)), initial, dt=max(config["dt"], 0.01), final_dt=config["dt"])
    else:
        result = optimize(device, pulse, None, initial, dt=config["dt"], max_iter=int(spec.get("max_iter", 400)))
    best = result.pulse(pulse)
    traj = sample(best, config["dt"])
    run = propagate(traj, device, history=True)
    io.write_json(out / "optimize.json", {"result": result.to_dict(), "pulse": best.to_dict()}, meta)
    io.write_csv(out / "trajectory.csv", ("t_ns", "f_a_GHz", "f_b_GHz"), zip(traj.times, traj.f_a, traj.f_b), meta)
    io.write_csv(out / "populations.csv", ("t_ns", "p01", "p10", "p11", "p02", "p20"), run.history, meta)


def cmd_fit_unitary(config, out: Path, meta) -> None:
    spec = _section(config, "fit_unitary")
    if "matrix_file" in spec:
        path = Path(spec["matrix_file"])
        if not path.is_absolute():
            path = Path(config.get("_config_dir", ".")) / path
        try:
            target = io.load_matrix(path)
        except (OSError, ValueError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read matrix file {path}: {exc}") from exc
        source = "matrix_file"
    elif "angles" in spec:
        target = build_unitary(_angles(spec["angles"]))
        source = "angles"
    elif spec.get("from_pulse"):
        target = effective_unitary(sample(_pulse(config), config["dt"]), _device(config))
        source = "pulse"
    else:
        raise ConfigError("fit_unitary needs 'matrix_file', 'angles' or 'from_pulse'")
    if target.shape != (4, 4):
        raise ConfigError(f"target must be 4x4, got {target.shape}")
    result = fit_unitary(target)
    io.write_json(out / "fit_unitary.json", {"source": source, "fit": result.to_dict()}, meta)


def _noise(spec, config) -> tuple[NoiseModel, FsimAngles | None]:
    gate = spec.get("gate", "identity")
    action = None
    if gate == "identity":
        angles = FsimAngles()
    elif gate == "simulated":
        traj = sample(_pulse(config), config["dt"])
        device = _device(config)
        angles = fit_unitary(effective_unitary(traj, device)).angles
        action = full_unitary(traj, device)
    else:
        angles = _angles(gate)
    noise_spec = dict(spec.get("noise", {}))
    if "actual_angles" in noise_spec:
        action = _angles(noise_spec.pop("actual_angles"))
    try:
        noise = NoiseModel(two_qubit_action=action, **noise_spec)
    except TypeError as exc:
        raise ConfigError(f"bad noise spec: {exc}") from exc
    return noise, angles


def cmd_xeb(config, out: Path, meta) -> None:
    spec = _section(config, "xeb")
    n_qubits = int(spec.get("n_qubits", 2))
    n_circuits = int(spec.get("n_circuits", 100))
    depths = sorted({int(m) for m in spec.get("depths", [])})
    if n_qubits not in (1, 2):
        raise ConfigError("xeb.n_qubits must be 1 or 2")
    if len(depths) < 4 or depths[0] < 0:
        raise ConfigError("xeb.depths needs at least four non-negative depths")
    if n_circuits < 1:
        raise ConfigError("xeb.n_circuits must be positive")
    noise, angles = _noise(spec, config)
    shots = spec.get("shots")
    seed = config["seed"]

    if "counts_file" in spec:
        # Offline analysis of externally produced counts; purity and leakage are not observable.
        path = Path(spec["counts_file"])
        if not path.is_absolute():
            path = Path(config.get("_config_dir", ".")) / path
        try:
            records = io.read_counts(path)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read counts file {path}: {exc}") from exc
        circuits = circuit_family(seed, n_circuits, max(r[1] for r in records), n_qubits)
        m, alphas = alphas_from_counts(records, circuits, angles)
        ones = np.ones_like(alphas)
        report = analyze(m, alphas, ones, 0 * ones, n_qubits, seed=seed)
    else:
        report, circuits, results = run_xeb(
            angles, noise, depths, n_circuits, n_qubits, seed, shots=shots, threads=int(config["threads"]),
            return_circuits=True,
        )
        if shots:
            counts = np.array([r.counts for r in results])
            io.write_counts(out / "xeb_counts.csv", io.counts_records(range(n_circuits), depths, counts), meta)
    io.write_json(out / "xeb_report.json", report.to_dict(), meta)
    io.write_series(out / "xeb_alpha.csv", report.depths, report.alpha, report.alpha_stderr, meta)
    io.write_series(out / "xeb_purity.csv", report.depths, report.purity, report.purity_stderr, meta)
    io.write_series(out / "xeb_leakage.csv", report.depths, report.leakage, report.leakage_stderr, meta)


HANDLERS = {
    "trace": cmd_trace,
    "landscape": cmd_landscape,
    "sync-spectrum": cmd_sync_spectrum,
    "optimize": cmd_optimize,
    "fit-unitary": cmd_fit_unitary,
    "xeb": cmd_xeb,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        config = load_config(args)
    except ConfigError as exc:
        print(f"diabatic: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)

    out = Path(args.out or config.get("out", "out"))
    meta = io.metadata(config, args.command)
    config["_config_dir"] = str(Path(args.config).resolve().parent)
    try:
        out.mkdir(parents=True, exist_ok=True)
        HANDLERS[args.command](config, out, meta)
    except (ConfigError, ValueError, KeyError, TypeError) as exc:
        print(f"diabatic: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RuntimeError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"diabatic: simulation failed: {exc}", file=sys.stderr)
        return EXIT_SIMULATION
    except OSError as exc:
        print(f"diabatic: cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
