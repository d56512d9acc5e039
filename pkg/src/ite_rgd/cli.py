"""Command-line entry point.

Config files are INI-style with the sections ``hamiltonian``, ``initial_state``,
``schedule``, ``ensemble`` and ``bounds``; see ``configs/z_plus.config``. Every
scalar can be overridden from the command line.

Exit codes: 0 when every bound verdict passes, 2 when some verdict fails (the
artifacts are still written), 1 on usage or configuration errors.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from .bounds import Convention, bound_report
from .ensemble import ExperimentConfig, run_experiment, summary_document
from .evolution import ScheduleConfig, ite_path, riemannian_gradient
from .exceptions import ContractViolation, DegenerateStateError, SizeLimitExceeded
from .hamiltonian import DEFAULT_MAX_QUBITS, expectation, parse_hamiltonian
from .linalg import StateVector
from .metrics import TRAJECTORY_COLUMNS, TrajectoryRecord, fidelity_error

OUT_DIR_ENV = "ITE_RGD_OUT_DIR"
EXIT_OK, EXIT_USAGE, EXIT_BOUND_FAILED = 0, 1, 2


class ConfigError(Exception):
    pass


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _json_value(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not np.isfinite(value):
            return json.dumps(str(value))
        return format(value, ".17g")
    return json.dumps(str(value))


def dump_flat_json(doc: dict) -> str:
    """Flat JSON object, keys in insertion order, floats with 17 significant digits."""
    lines = [f"  {json.dumps(key)}: {_json_value(value)}" for key, value in doc.items()]
    return "{\n" + ",\n".join(lines) + "\n}\n"


def write_trajectory_csv(path: Path, records) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRAJECTORY_COLUMNS)
        for rec in records:
            writer.writerow([format_value(v) for v in rec.values()])


def write_state_csv(path: Path, state: StateVector) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("index", "real", "imag"))
        for i, amp in enumerate(state.amplitudes):
            writer.writerow((i, format_value(amp.real), format_value(amp.imag)))


# -- config -------------------------------------------------------------------


def parse_initial_state(section, num_qubits: int) -> tuple[StateVector, str]:
    preset = section.get("preset", "plus").strip().lower()
    if preset == "plus":
        return StateVector.plus(num_qubits), "plus"
    if preset == "basis":
        bits = section.get("bits", "").strip()
        if len(bits) != num_qubits:
            raise ConfigError(f"initial_state.bits must have {num_qubits} characters")
        return StateVector.basis(bits), f"basis:{bits}"
    if preset == "amplitudes":
        raw = section.get("amplitudes", "")
        try:
            amps = [complex(tok.strip().replace(" ", "")) for tok in raw.split(",") if tok.strip()]
        except ValueError as exc:
            raise ConfigError(f"initial_state.amplitudes: {exc}") from None
        if len(amps) != 2**num_qubits:
            raise ConfigError(f"initial_state.amplitudes needs {2**num_qubits} entries")
        return StateVector.from_amplitudes(amps), "amplitudes:" + ",".join(format_value(a) for a in amps)
    raise ConfigError(f"unknown initial_state.preset {preset!r}")


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    """Build an :class:`ExperimentConfig` from a config file plus flag overrides."""
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        parser.read_string(path.read_text(), source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None
    for name in ("hamiltonian", "schedule"):
        if not parser.has_section(name):
            raise ConfigError(f"config {path} lacks a [{name}] section")
    for name in ("initial_state", "ensemble", "bounds"):
        if not parser.has_section(name):
            parser.add_section(name)

    max_qubits = int(overrides.get("max_qubits", DEFAULT_MAX_QUBITS))
    try:
        H = parse_hamiltonian(parser["hamiltonian"].get("terms", ""), max_qubits=max_qubits)
        psi0, label = parse_initial_state(parser["initial_state"], H.num_qubits)
        sched = parser["schedule"]
        ens = parser["ensemble"]
        bnd = parser["bounds"]
        beta = float(overrides.get("beta", sched.get("beta", "1.0")))
        steps = int(overrides.get("steps", sched.get("steps", "100")))
        trajectories = int(overrides.get("trajectories", ens.get("trajectories", "0")))
        raw_seed = overrides.get("seed", ens.get("seed", "0"))
        seed = int(raw_seed, 0) if isinstance(raw_seed, str) else int(raw_seed)
        raw_restriction = ens.get("restriction", "").strip()
        restriction = tuple(int(tok) for tok in raw_restriction.split(",") if tok.strip()) or None
        delta = float(overrides.get("delta", bnd.get("delta", "0.1")))
        raw_dt = overrides.get("delta_tilde", bnd.get("delta_tilde", "").strip() or None)
        delta_tilde = None if raw_dt is None else float(raw_dt)
        convention = Convention(overrides.get("convention", bnd.get("convention", "exact")).strip().lower())
        return ExperimentConfig(
            hamiltonian=H,
            initial_state=psi0,
            schedule=ScheduleConfig(beta, steps),
            num_trajectories=trajectories,
            base_seed=seed,
            basis_restriction=restriction,
            delta=delta,
            delta_tilde=delta_tilde,
            convention=convention,
            initial_label=label,
            max_qubits=max_qubits,
        )
    except SizeLimitExceeded:
        raise
    except (ContractViolation, ValueError) as exc:
        raise ConfigError(f"invalid config {path}: {exc}") from None


# -- commands -----------------------------------------------------------------


def _out_dir(args) -> Path:
    out = Path(args.out_dir or os.environ.get(OUT_DIR_ENV) or "out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _overrides(args) -> dict:
    return {
        "beta": args.beta,
        "steps": args.steps,
        "trajectories": getattr(args, "trajectories", None),
        "seed": args.seed,
        "convention": args.convention,
        "delta": args.delta,
        "delta_tilde": args.delta_tilde,
        "max_qubits": args.max_qubits,
    }


def _write_summary(out: Path, doc: dict) -> None:
    (out / "summary.json").write_text(dump_flat_json(doc))


def _finish(result) -> int:
    for v in result.verdicts:
        status = "PASS" if v.passed else "FAIL"
        print(f"{status} {v.name} ({v.kind}): lhs={v.lhs:.6g} rhs={v.rhs:.6g}")
    return EXIT_OK if result.all_passed else EXIT_BOUND_FAILED


def cmd_ite(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    out = _out_dir(args)
    H, sched = cfg.hamiltonian, cfg.schedule
    states = ite_path(H, cfg.initial_state, sched)
    target = states[-1]
    records = [
        TrajectoryRecord(
            step=k,
            partial_beta=sched.partial_beta(k),
            energy=expectation(H, s),
            eps_rgd=None,
            fidelity_error=fidelity_error(target, s),
            eta=None,
            grad_hs_norm=riemannian_gradient(H, s).hs_norm(),
        )
        for k, s in enumerate(states)
    ]
    write_trajectory_csv(out / "ite.csv", records)
    write_state_csv(out / "state.csv", target)
    doc = {
        "command": "ite",
        "num_qubits": cfg.num_qubits,
        "initial_state": cfg.initial_label,
        "beta": sched.beta,
        "num_steps": sched.num_steps,
        "final_energy": records[-1].energy,
    }
    _write_summary(out, doc)
    return EXIT_OK


def _run_and_write(cfg: ExperimentConfig, args, command: str) -> int:
    out = _out_dir(args)
    result = run_experiment(cfg, jobs=args.jobs)
    write_trajectory_csv(out / "rgd.csv", result.rgd_records)
    width = max(3, len(str(max(cfg.num_trajectories - 1, 0))))
    for run in result.trajectories:
        write_trajectory_csv(out / f"srgd_{run.index:0{width}d}.csv", run.records)
    if command == "srgd" and result.trajectories:
        write_state_csv(out / "state.csv", result.trajectories[0].final_state)
    elif command == "rgd":
        write_state_csv(out / "state.csv", result.rgd_states[-1])
    if result.summary:
        with open(out / "ensemble.csv", "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("step", "partial_beta", "mean_fidelity_error", "variance", "tail_frequency"))
            for k, stats in enumerate(result.summary):
                writer.writerow(
                    (k, format_value(cfg.schedule.partial_beta(k)), format_value(stats.mean),
                     format_value(stats.variance), format_value(stats.tail_frequency))
                )
    doc = {"command": command}
    doc.update(summary_document(result))
    _write_summary(out, doc)
    return _finish(result)


def cmd_rgd(args) -> int:
    overrides = _overrides(args)
    overrides["trajectories"] = 0
    return _run_and_write(load_config(args.config, overrides), args, "rgd")


def cmd_srgd(args) -> int:
    overrides = _overrides(args)
    overrides["trajectories"] = 1
    return _run_and_write(load_config(args.config, overrides), args, "srgd")


def cmd_ensemble(args) -> int:
    return _run_and_write(load_config(args.config, _overrides(args)), args, "ensemble")


def cmd_bounds(args) -> int:
    for name in ("beta", "h_norm"):
        if getattr(args, name) < 0:
            raise ConfigError(f"--{name.replace('_', '-')} must be non-negative")
    if args.steps < 1 or args.D < 1 or args.d < 1 or args.delta <= 0:
        raise ConfigError("--steps, --D and --d must be positive and --delta > 0")
    doc = {}
    for conv in Convention:
        rep = bound_report(
            args.beta, args.steps, args.h_norm, args.D, args.d,
            delta=args.delta, delta_tilde=args.delta_tilde, convention=conv,
            grad_hs_sq=args.grad_hs_sq,
        )
        for key, value in rep.as_dict().items():
            doc[f"{conv.value}.{key}"] = value
    sys.stdout.write(dump_flat_json(doc))
    return EXIT_OK


# -- argument parsing ---------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_run_flags(p: argparse.ArgumentParser, ensemble: bool) -> None:
    p.add_argument("config", help="path to the experiment config file")
    p.add_argument("--out-dir", help=f"output directory (default ${OUT_DIR_ENV} or ./out)")
    p.add_argument("--beta", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--trajectories", type=int, help="ignored by the ite/rgd/srgd commands" if not ensemble else None)
    p.add_argument("--convention", choices=[c.value for c in Convention])
    p.add_argument("--delta", type=float)
    p.add_argument("--delta-tilde", type=float)
    p.add_argument("--max-qubits", type=int)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ite-rgd", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, func, ensemble in (
        ("ite", cmd_ite, False),
        ("rgd", cmd_rgd, False),
        ("srgd", cmd_srgd, False),
        ("ensemble", cmd_ensemble, True),
    ):
        p = sub.add_parser(name)
        _add_run_flags(p, ensemble)
        p.set_defaults(func=func)
    b = sub.add_parser("bounds", help="print every bound for scalar inputs")
    b.add_argument("--beta", type=float, required=True)
    b.add_argument("--steps", type=int, required=True)
    b.add_argument("--h-norm", type=float, default=1.0)
    b.add_argument("--D", type=int, default=3)
    b.add_argument("--d", type=int, default=2)
    b.add_argument("--delta", type=float, default=0.1)
    b.add_argument("--delta-tilde", type=float)
    b.add_argument("--grad-hs-sq", type=float)
    b.set_defaults(func=cmd_bounds)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except SizeLimitExceeded as exc:
        print(f"error: size cap exceeded: {exc}", file=sys.stderr)
    except DegenerateStateError as exc:
        print(f"error: degenerate input: {exc}", file=sys.stderr)
    except ContractViolation as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
