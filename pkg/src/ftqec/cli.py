"""Command-line front end: ``ancilla``, ``recover`` and ``dump`` subcommands.

Settings resolve as: command-line flags, then ``FTQEC_SEED`` / ``FTQEC_JOBS``,
then the ``--config`` file, then built-in defaults.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from dataclasses import fields
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .circuit import Circuit
from .experiments import CSV_COLUMNS, ExperimentConfig, config_dict, run_experiment
from .networks import (
    METHODS,
    RecoveryProtocol,
    build_encoder,
    build_iq_encoder,
    build_recovery,
    build_shor_cat,
    build_steane_ancilla,
    build_syndrome_round,
)

ENV_KEYS = {"seed": "FTQEC_SEED", "jobs": "FTQEC_JOBS"}


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in str(text).split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _flag(text: str) -> bool:
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# name -> converter for values coming from env or config files
_CONVERT = {
    "eps": _floats, "gamma": _floats, "gamma_ratio": float, "trials": int, "seed": int,
    "multiplier": int, "shuffle": _flag, "jobs": int, "rounds": int, "retry_cap": int,
    "paper_comparable": _flag, "chunk": int,
}
_CONFIG_FIELDS = {f.name for f in fields(ExperimentConfig)}


def read_config(path: str | Path) -> dict:
    """``key = value`` lines; ``#`` starts a comment; dashes in keys allowed."""
    out = {}
    for n, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key == "verify":
            key = "verification"
        if key not in _CONFIG_FIELDS:
            raise ValueError(f"{path}:{n}: unknown setting {key!r}")
        out[key] = _CONVERT.get(key, str)(value)
    return out


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--verify", dest="verification", choices=("on", "off", "perfect"))
    p.add_argument("--eps", type=_floats, help="memory error rate(s), comma separated")
    p.add_argument("--gamma", type=_floats, help="gate error rate(s), comma separated")
    p.add_argument("--gamma-ratio", type=float, help="use gamma = ratio * eps instead of a grid")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--multiplier", type=int)
    p.add_argument("--shuffle", action="store_const", const=True)
    p.add_argument("--backend", choices=("pauliframe", "statevector", "both"))
    p.add_argument("--one-qubit", choices=("xyz", "x", "z"))
    p.add_argument("--memory", choices=("idle", "all"), help="which qubits take memory locations")
    p.add_argument("--paper-comparable", action="store_const", const=True)
    p.add_argument("--jobs", type=int)
    p.add_argument("--config", help="key = value settings file")
    p.add_argument("--out", help="CSV path (stdout when omitted)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ftqec", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("ancilla", help="ancilla synthesis quality (F_a, P_bf)")
    a.add_argument("--variant", choices=("net1", "net2", "net3", "cat"))
    a.add_argument("--target", choices=("zero", "plus"))
    _common(a)

    r = sub.add_parser("recover", help="full information-qubit recovery")
    r.add_argument("--method", choices=METHODS + ("steane-net2",))
    r.add_argument("--rounds", type=int, choices=(1, 3))
    r.add_argument("--majority", choices=("per-type", "combined"))
    r.add_argument("--first-half", choices=("z", "x"))
    r.add_argument("--amplitude", choices=("plus", "zero"))
    _common(r)

    d = sub.add_parser("dump", help="print a canonical layout")
    d.add_argument("gadget", choices=sorted(DUMPS))
    d.add_argument("--verify", dest="verification", choices=("on", "off", "perfect"), default="on")
    d.add_argument("--target", choices=("zero", "plus"), default="zero")
    d.add_argument("--rounds", type=int, choices=(1, 3), default=1)
    return parser


DUMPS = {
    "encoder": lambda a: build_encoder().circuit,
    "iq-encoder": lambda a: build_iq_encoder(a.target).circuit,
    "steane-net1": lambda a: build_steane_ancilla("net1", a.verification, a.target).circuit,
    "steane-net3": lambda a: build_steane_ancilla("net3", a.verification, a.target).circuit,
    "shor-cat": lambda a: build_shor_cat(a.verification).circuit,
    "steane-round": lambda a: build_syndrome_round("steane").circuit,
    "shor-round": lambda a: build_syndrome_round("shor").circuit,
    "steane-recovery": lambda a: build_recovery(RecoveryProtocol("steane-net3", a.rounds)).extraction_circuit,
    "shor-recovery": lambda a: build_recovery(RecoveryProtocol("shor", a.rounds)).extraction_circuit,
}


def resolve_config(args: argparse.Namespace, environ=None) -> ExperimentConfig:
    environ = os.environ if environ is None else environ
    settings = read_config(args.config) if args.config else {}
    for key, var in ENV_KEYS.items():
        if environ.get(var):
            settings[key] = int(environ[var])
    for key, value in vars(args).items():
        if key in _CONFIG_FIELDS and value is not None:
            settings[key] = value
    settings["kind"] = "ancilla" if args.command == "ancilla" else "recovery"
    return ExperimentConfig(**settings)


def render_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        w.writerow(row.csv_fields())
    return buf.getvalue()


def write_manifest(path: Path, cfg: ExperimentConfig, started: str, argv) -> None:
    lines = [
        f"artifact_version={__version__}",
        f"start_time={started}",
        f"command={' '.join(argv)}",
        f"output={path}",
    ]
    for key, value in config_dict(cfg).items():
        if value is None:
            continue
        if isinstance(value, tuple):
            value = ",".join(repr(v) for v in value)
        lines.append(f"{key}={value}")
    Path(f"{path}.manifest").write_text("\n".join(lines) + "\n")


def _run(args, argv) -> int:
    if args.command == "dump":
        circuit: Circuit = DUMPS[args.gadget](args)
        sys.stdout.write(circuit.dump())
        return 0
    cfg = resolve_config(args)
    started = datetime.now(timezone.utc).isoformat(timespec="seconds")
    text = render_csv(run_experiment(cfg))
    if args.out:
        out = Path(args.out)
        out.write_text(text)
        write_manifest(out, cfg, started, argv)
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)  # exits with status 2 on bad flags
    try:
        return _run(args, argv)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"ftqec: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
