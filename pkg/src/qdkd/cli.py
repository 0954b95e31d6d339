"""Command-line entry point: ``qdkd {simulate,attack-sweep,security-region,efficiency}``.

Machine output (JSON or CSV) goes to ``--output`` or, if absent, to stdout.
When written to a file, a short human summary is printed to stdout instead.
Relative output paths are resolved against ``$QDKD_OUTPUT_DIR`` when set.

Exit codes: 0 success, 2 usage error, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import adversary, efficiency, protocol, security

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INVARIANT = 3
OUTPUT_DIR_ENV = "QDKD_OUTPUT_DIR"
P_CORR_TOL = 1e-9


class InvariantViolation(RuntimeError):
    def __init__(self, message: str, detail: dict):
        super().__init__(message)
        self.detail = detail


def _probability(upper: float):
    def parse(text: str) -> float:
        value = float(text)
        if not 0.0 <= value <= upper:
            raise argparse.ArgumentTypeError(f"must lie in [0, {upper}], got {value}")
        return value

    return parse


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {value}")
    return value


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _nonneg_float(text: str) -> float:
    value = float(text)
    if not (math.isfinite(value) and value >= 0):
        raise argparse.ArgumentTypeError(f"must be finite and nonnegative, got {value}")
    return value


def _float_list(text: str) -> list[float]:
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if not values:
        raise argparse.ArgumentTypeError("expected a comma-separated list of numbers")
    return values


ATTACK_CHOICES = ("none", "identity", "intercept-resend-z", "intercept-resend-x", "rotation", "random-unitary")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=0, help="master seed (default 0)")
    common.add_argument("--format", dest="output_format", choices=("json", "csv"), default=None)
    common.add_argument("--output", "-o", dest="output_path", default=None, help="write machine output here")

    parser = argparse.ArgumentParser(prog="qdkd", description="Quantum dense key distribution toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", parents=[common], help="run a protocol session")
    sim.add_argument("--rounds", type=_positive_int, default=10_000)
    sim.add_argument("--check-fraction", type=_probability(1.0), default=0.2)
    sim.add_argument("--noise", type=_probability(0.5), default=0.0, help="channel phase-flip probability")
    sim.add_argument("--correlated-noise", type=_probability(1.0), default=0.0, help="flip probability in the check")
    sim.add_argument("--disclosure", type=_probability(0.99), default=0.0, help="key fraction sacrificed for Q")
    sim.add_argument("--attack", choices=ATTACK_CHOICES, default="none")
    sim.add_argument("--theta", type=float, default=math.pi / 4, help="rotation attack angle")
    sim.add_argument("--theta-one", type=float, default=None)
    sim.add_argument("--ancilla-dim", type=_positive_int, default=2)
    sim.add_argument("--records", default=None, help="also write the per-round CSV audit trail here")
    sim.add_argument("--include-keys", action="store_true", help="include raw key bits in JSON")

    sweep = sub.add_parser("attack-sweep", parents=[common], help="tabulate P_corr, q and Holevo bounds")
    sweep.add_argument("--family", choices=("rotation", "random-unitary"), default="rotation")
    sweep.add_argument("--points", type=_positive_int, default=101)
    sweep.add_argument("--theta-min", type=float, default=0.0)
    sweep.add_argument("--theta-max", type=float, default=math.pi / 2)
    sweep.add_argument("--thetas", type=_float_list, default=None, help="explicit comma-separated angles")
    sweep.add_argument("--theta-one", type=float, default=None, help="fixed |1>-flip angle")
    sweep.add_argument("--ancilla-dim", type=_positive_int, default=2)

    region = sub.add_parser("security-region", parents=[common], help="boundary H(Q) + H(P_corr) = 1")
    region.add_argument("--resolution", type=_positive_int, default=101)

    eff = sub.add_parser("efficiency", parents=[common], help="efficiency versus link length")
    eff.add_argument("--alpha", type=_nonneg_float, default=0.2, help="fibre attenuation in dB/km")
    eff.add_argument("--lengths", type=_float_list, default=None, help="comma-separated lengths in km")
    eff.add_argument("--points", type=_positive_int, default=41)
    return parser


# --------------------------------------------------------------------------
# commands; each returns (machine_text, summary_text)


def _attack_from_args(args) -> Optional[adversary.AttackModel]:
    name = args.attack
    if name == "none":
        return None
    if name == "rotation":
        return adversary.make_attack("rotation", theta=args.theta, theta_one=args.theta_one)
    if name == "random-unitary":
        return adversary.make_attack("random-unitary", seed=args.seed, ancilla_dim=args.ancilla_dim)
    return adversary.make_attack(name)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_simulate(args) -> tuple[str, str]:
    config = protocol.SessionConfig(
        rounds=args.rounds,
        check_fraction=args.check_fraction,
        channel_flip_prob=args.noise,
        check_noise=args.correlated_noise,
        disclosure_fraction=args.disclosure,
        rng_seed=args.seed,
        attack=_attack_from_args(args),
    )
    report = protocol.run_session(config)
    qber = min(report.qber_estimate, 0.5)
    verdict = security.security_condition(qber, report.p_corr_estimate)
    if args.records:
        _resolve(args.records).write_text(protocol.records_csv(report.records))

    if args.output_format == "csv":
        rows = {**{k: v for k, v in report.to_dict().items() if not isinstance(v, dict)}, **verdict.to_dict()}
        machine = ",".join(rows) + "\n" + ",".join(_cell(v) for v in rows.values()) + "\n"
    else:
        out = report.to_dict(include_keys=args.include_keys)
        out["security"] = verdict.to_dict()
        machine = _dumps(out)
    summary = (
        f"rounds={config.rounds} checks={report.p_corr_check_count} key_bits={len(report.alice_view)}\n"
        f"P_corr={report.p_corr_estimate:.6f} Q={report.qber_estimate:.6f} "
        f"margin={verdict.margin:.6f} secure={verdict.secure}\n"
    )
    return machine, summary


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _sweep_attacks(args) -> list[adversary.AttackModel]:
    if args.family == "random-unitary":
        return [
            adversary.make_attack("random-unitary", seed=protocol.session_seed(args.seed, i), ancilla_dim=args.ancilla_dim)
            for i in range(args.points)
        ]
    if args.thetas is not None:
        thetas = args.thetas
    else:
        thetas = np.linspace(args.theta_min, args.theta_max, args.points).tolist()
    return [adversary.make_attack("rotation", theta=t, theta_one=args.theta_one) for t in thetas]


def cmd_attack_sweep(args) -> tuple[str, str]:
    outcomes = [adversary.evaluate_attack(a) for a in _sweep_attacks(args)]
    for o in outcomes:
        if not abs(o.p_corr - o.p_corr_overlap) < P_CORR_TOL:
            raise InvariantViolation(
                "P_corr trace formula and overlap formula disagree",
                {"attack": o.attack.to_dict(), "p_corr_exact": o.p_corr, "p_corr_overlap": o.p_corr_overlap},
            )
    if args.output_format == "json":
        machine = _dumps({"schema_version": protocol.SCHEMA_VERSION, "rows": [o.row() for o in outcomes]})
    else:
        machine = adversary.sweep_csv(outcomes)
    max_chi = max(max(o.chi_eve_bob, o.chi_eve_alice) for o in outcomes)
    summary = f"{len(outcomes)} attacks evaluated ({args.family}); max Holevo bound {max_chi:.6f} bits\n"
    return machine, summary


def cmd_security_region(args) -> tuple[str, str]:
    if args.resolution < 2:
        raise ValueError("resolution must be at least 2")
    if args.output_format == "json":
        curve = security.security_region(args.resolution)
        machine = _dumps(
            {
                "schema_version": protocol.SCHEMA_VERSION,
                "boundary": [{"qber": float(q), "p_corr_boundary": float(p)} for q, p in curve],
            }
        )
    else:
        machine = security.security_region_csv(args.resolution)
    return machine, f"boundary sampled at {args.resolution} error rates in [0, 0.5]\n"


def cmd_efficiency(args) -> tuple[str, str]:
    lengths = args.lengths if args.lengths is not None else efficiency.default_grid(args.alpha, args.points)
    if any(not (math.isfinite(x) and x >= 0) for x in lengths):
        raise ValueError("lengths must be finite and nonnegative")
    rows = efficiency.efficiency_table(args.alpha, lengths)
    summary_obj = efficiency.efficiency_summary(args.alpha)
    if args.output_format == "csv":
        machine = efficiency.efficiency_csv(rows)
    else:
        machine = _dumps({"schema_version": protocol.SCHEMA_VERSION, **summary_obj, "table": rows})
    l1, l2 = summary_obj["crossover_km"]
    fmt = lambda x: "unbounded" if x is None else f"{x:.4f} km"  # noqa: E731
    summary = f"alpha={args.alpha} dB/km: QDKD best below {fmt(l1)}, BB84 best beyond {fmt(l2)}\n"
    return machine, summary


COMMANDS = {
    "simulate": (cmd_simulate, "json"),
    "attack-sweep": (cmd_attack_sweep, "csv"),
    "security-region": (cmd_security_region, "csv"),
    "efficiency": (cmd_efficiency, "json"),
}


def _resolve(path: str) -> Path:
    p = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    handler, default_format = COMMANDS[args.command]
    if args.output_format is None:
        args.output_format = default_format
    try:
        machine, summary = handler(args)
    except InvariantViolation as exc:
        print(f"qdkd: invariant violated: {exc}", file=sys.stderr)
        print(json.dumps(exc.detail, sort_keys=True), file=sys.stderr)
        return EXIT_INVARIANT
    except ValueError as exc:
        print(f"qdkd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if args.output_path:
        _resolve(args.output_path).write_text(machine)
        sys.stdout.write(summary)
    else:
        sys.stdout.write(machine)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
