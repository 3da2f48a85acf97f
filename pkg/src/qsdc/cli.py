"""Command-line front end: ``qsdc {simulate,sweep,verify,table,replay}``.

Exit codes: 0 success, 1 verification/replay failure, 2 detection with
``--fail-on-detect``, 64 usage error, 65 malformed transcript.
"""

from __future__ import annotations

import argparse
import csv
import sys
from contextlib import nullcontext
from pathlib import Path

from . import acceptance
from . import transcript as tx
from .adversaries import AttackKind
from .coding import BELL_LABELS, RuleMode, corrupted_table, expected_correlation, transform
from .harness import SWEEP_COLUMNS, ExperimentSpec, run_experiment, run_sweep, write_sweep_csv
from .protocol import DetectionPolicy, SessionConfig
from .quantum import PAULI_NAMES, MeasurementBasis

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_DETECTED = 2
EXIT_USAGE = 64
EXIT_DATAERR = 65


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"{text} is not an unsigned 64-bit integer")
    return value


def _unit(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"{text} is not in [0, 1]")
    return value


def _floats(text: str) -> list[float]:
    return [_unit(t) for t in text.split(",") if t]


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t]


def _attacks(text: str) -> list[str]:
    names = [t for t in text.split(",") if t]
    for name in names:
        AttackKind(name)
    return names


ATTACK_NAMES = [k.value for k in AttackKind]


def parse_message(args) -> tuple[int, tuple[int, ...] | None]:
    """(n_messages, fixed message or None) from the mutually exclusive message flags."""
    if args.message_string is not None:
        text = args.message_string
        if not text or any(c not in "0123" for c in text):
            raise UsageError("--message-string takes a non-empty string of digits 0-3")
        return len(text), tuple(int(c) for c in text)
    if args.bits is not None:
        text = args.bits
        if not text or len(text) % 2 or any(c not in "01" for c in text):
            raise UsageError("--bits takes a non-empty binary string of even length")
        symbols = tuple(int(text[i : i + 2], 2) for i in range(0, len(text), 2))
        return len(symbols), symbols
    if args.messages < 1:
        raise UsageError("--messages must be at least 1")
    return args.messages, None


def _add_session_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lambda-c", type=_unit, required=True, help="control-mode probability per round (required)")
    p.add_argument("--rule", choices=[m.value for m in RuleMode], default="physical",
                   help="control-round correlation rule (default: %(default)s)")
    p.add_argument("--policy", choices=[d.value for d in DetectionPolicy], default="abort",
                   help="what happens after a detection (default: %(default)s)")
    p.add_argument("--max-restarts", type=int, default=8, help="restart cap (default: %(default)s)")
    p.add_argument("--seed", type=_u64, required=True, help="master seed, unsigned 64-bit (required)")
    p.add_argument("--trials", type=int, default=1, help="independent sessions (default: %(default)s)")
    p.add_argument("--workers", type=int, default=1, help="worker processes (default: %(default)s)")
    p.add_argument("--allow-channel-rewriting", action="store_true",
                   help="let the adversary rewrite the public channel; required for strong-mitm (default: off)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qsdc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="run Monte Carlo sessions and print a summary")
    msg = sim.add_mutually_exclusive_group(required=True)
    msg.add_argument("--messages", type=int, help="random message of N symbols per trial")
    msg.add_argument("--message-string", help="fixed message as base-4 digits, e.g. 0123")
    msg.add_argument("--bits", help="fixed message as a binary string, two bits per symbol")
    sim.add_argument("--attack", choices=ATTACK_NAMES, default="none", help="eavesdropper (default: %(default)s)")
    _add_session_flags(sim)
    sim.add_argument("--out", type=Path, default=None,
                     help="directory for summary.json and transcripts (default: none, print only)")
    sim.add_argument("--transcripts", action="store_true", help="write one JSONL transcript per trial (needs --out)")
    sim.add_argument("--fail-on-detect", action="store_true", help="exit 2 if any session detected Eve")

    sw = sub.add_parser("sweep", help="grid over lambda_c, message length and attack; CSV output")
    sw.add_argument("--lambda-c", type=_floats, required=True, help="comma-separated values (required)")
    sw.add_argument("--messages", type=_ints, required=True, help="comma-separated message lengths (required)")
    sw.add_argument("--attack", type=_attacks, default=["none"], help="comma-separated attacks (default: none)")
    sw.add_argument("--rule", choices=[m.value for m in RuleMode], default="physical", help="(default: %(default)s)")
    sw.add_argument("--policy", choices=[d.value for d in DetectionPolicy], default="abort", help="(default: %(default)s)")
    sw.add_argument("--seed", type=_u64, required=True, help="master seed (required)")
    sw.add_argument("--trials", type=int, default=100, help="trials per grid point (default: %(default)s)")
    sw.add_argument("--workers", type=int, default=1, help="(default: %(default)s)")
    sw.add_argument("--csv", type=Path, default=None, help="output file (default: standard output)")

    ver = sub.add_parser("verify", help="run the acceptance criteria")
    ver.add_argument("--scale", type=float, default=0.05,
                     help="fraction of full trial counts; tolerances widen accordingly (default: %(default)s)")
    ver.add_argument("--full", action="store_true", help="same as --scale 1")
    ver.add_argument("--only", type=_ints, default=None, help="comma-separated criterion numbers (default: all)")
    ver.add_argument("--workers", type=int, default=1, help="(default: %(default)s)")
    ver.add_argument("--inject-fault", choices=["transform-table"], default=None, help=argparse.SUPPRESS)

    sub.add_parser("table", help="print the Bell/Pauli transformation and correlation tables")

    rep = sub.add_parser("replay", help="re-run a transcript and check it is bit-identical")
    rep.add_argument("path", type=Path)
    return parser


# --------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    n, message = parse_message(args)
    if args.trials < 1 or args.workers < 1:
        raise UsageError("--trials and --workers must be positive")
    if args.transcripts and args.out is None:
        raise UsageError("--transcripts needs --out")
    if args.attack == AttackKind.STRONG_MITM.value and not args.allow_channel_rewriting:
        raise UsageError("strong-mitm rewrites the public channel; pass --allow-channel-rewriting")
    if args.lambda_c == 1.0:
        raise UsageError("--lambda-c 1 never reaches a message round")
    config = SessionConfig(
        n_messages=n,
        lambda_c=args.lambda_c,
        seed=args.seed,
        rule_mode=RuleMode(args.rule),
        detection_policy=DetectionPolicy(args.policy),
        max_restarts=args.max_restarts,
        allow_channel_rewriting=args.allow_channel_rewriting,
    )
    spec = ExperimentSpec(
        trials=args.trials,
        session_config=config,
        attack=AttackKind(args.attack),
        message=message,
        output_path=args.out,
        write_transcripts=args.transcripts,
        workers=args.workers,
    )
    s = run_experiment(spec)
    print(f"attack: {args.attack}   lambda_c: {args.lambda_c}   rule: {args.rule}   policy: {args.policy}")
    print(f"trials: {s.trials}   sessions with detection: {s.sessions_detected}")
    print(
        f"control rounds: {s.control_rounds_total}   detections: {s.detections}   "
        f"per-control detection: {s.detection_rate_per_control:.4f} +/- {s.detection_rate_stderr:.4f}"
    )
    completed = s.trials - s.sessions_detected
    print(
        f"bob decoded: {s.decoded_symbols - s.symbol_errors}/{s.decoded_symbols} symbols "
        f"correct in {completed} completed sessions"
    )
    print(f"rq: {s.rq:g}   rtot: {s.rtot:g}")
    mi = "n/a (under 1000 message rounds)" if s.mi_a_f is None else f"{s.mi_a_f:.4g} bit"
    print(f"I(a; f): {mi}")
    eb, ea = s.eve_accuracy["b_pairclass"], s.eve_accuracy["a_recovery"]
    print(f"eve accuracy: b (pair class) {_fmt(eb)}   a {_fmt(ea)}")
    if args.out is not None:
        print(f"summary written to {args.out / 'summary.json'}")
    if args.fail_on_detect and s.sessions_detected:
        return EXIT_DETECTED
    return EXIT_OK


def _fmt(x) -> str:
    return "n/a" if x is None else f"{x:.4f}"


def cmd_sweep(args) -> int:
    if args.trials < 1 or args.workers < 1:
        raise UsageError("--trials and --workers must be positive")
    if any(n < 1 for n in args.messages):
        raise UsageError("--messages values must be at least 1")
    if any(lam == 1.0 for lam in args.lambda_c):
        raise UsageError("--lambda-c 1 never reaches a message round")
    base = ExperimentSpec(
        trials=args.trials,
        session_config=SessionConfig(
            n_messages=args.messages[0], lambda_c=args.lambda_c[0], seed=args.seed,
            rule_mode=RuleMode(args.rule), detection_policy=DetectionPolicy(args.policy),
        ),
        workers=args.workers,
    )
    rows = run_sweep(base, {"lambda_c": args.lambda_c, "n_messages": args.messages, "attack": args.attack})
    if args.csv is not None:
        write_sweep_csv(args.csv, rows)
        print(f"{len(rows)} rows written to {args.csv}")
    else:
        writer = csv.DictWriter(sys.stdout, fieldnames=SWEEP_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if row[k] is None else row[k]) for k in SWEEP_COLUMNS})
    return EXIT_OK


def cmd_verify(args) -> int:
    scale = 1.0 if args.full else args.scale
    if not 0.0 < scale <= 1.0:
        raise UsageError("--scale must lie in (0, 1]")
    fault = corrupted_table() if args.inject_fault == "transform-table" else nullcontext()
    with fault:
        results = acceptance.run_all(scale=scale, workers=args.workers, only=args.only)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria met" + (f"; failed: {failed}" if failed else ""))
    return EXIT_OK if not failed else EXIT_FAIL


def format_tables() -> str:
    lines = ["Transformation table: f = transform(a, b), |Psi_f> ~ (1 x sigma_b)|Psi_a>", ""]
    lines.append("          " + "  ".join(f"a={a} {BELL_LABELS[a]}" for a in range(4)))
    for b in range(4):
        row = "  ".join(f"{transform(a, b):>8d}" for a in range(4))
        lines.append(f"sigma_{b} ({PAULI_NAMES[b]})  {row}")
    lines.append("")
    for b in range(1, 4):
        swaps = sorted({tuple(sorted((a, transform(a, b)))) for a in range(4)})
        lines.append(f"sigma_{b} swaps " + ", ".join(f"{x}<->{y}" for x, y in swaps))
    for mode in RuleMode:
        lines.append("")
        lines.append(f"Expected control-round correlation ({mode.value} rule)")
        for basis in MeasurementBasis:
            cells = "  ".join(f"{BELL_LABELS[a]}:{expected_correlation(a, basis, mode).value:<14s}" for a in range(4))
            lines.append(f"  {basis.name}  {cells}")
    return "\n".join(lines)


def cmd_table(args) -> int:
    print(format_tables())
    return EXIT_OK


def cmd_replay(args) -> int:
    if not args.path.is_file():
        raise UsageError(f"no such transcript: {args.path}")
    try:
        report = tx.replay(args.path)
    except tx.TranscriptFormatError as exc:
        print(f"replay: malformed transcript: {exc}", file=sys.stderr)
        return EXIT_DATAERR
    if report.identical:
        print(f"identical: {report.rounds} rounds replayed bit-for-bit")
        return EXIT_OK
    print(f"MISMATCH at record {report.first_divergence}")
    print(f"  recorded: {report.recorded}")
    print(f"  replayed: {report.replayed}")
    return EXIT_FAIL


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "table": cmd_table,
    "replay": cmd_replay,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"qsdc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
