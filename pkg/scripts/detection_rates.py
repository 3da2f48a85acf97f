"""Per-control-round detection rate of every attack, with standard errors.

    python3 scripts/detection_rates.py --trials 5000 --seed 1
"""

import argparse

from qsdc import AttackKind, ExperimentSpec, SessionConfig, run_experiment

EXPECTED = {
    AttackKind.NONE: 0.0,
    AttackKind.INTERCEPT_RESEND: 0.25,
    AttackKind.WEAK_MITM: 0.5,
    AttackKind.STRONG_MITM: 0.0,
}


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--trials", type=int, default=5000)
    ap.add_argument("--messages", type=int, default=20)
    ap.add_argument("--lambda-c", type=float, default=0.5, help="invented example value (default: 0.5)")
    ap.add_argument("--seed", type=int, required=True)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    print(f"{'attack':18s} {'controls':>9s} {'d':>8s} {'stderr':>8s} {'expected':>9s} {'bob err':>8s}")
    for attack, d in EXPECTED.items():
        config = SessionConfig(args.messages, args.lambda_c, args.seed,
                               allow_channel_rewriting=attack is AttackKind.STRONG_MITM)
        s = run_experiment(ExperimentSpec(args.trials, config, attack, workers=args.workers))
        err = "n/a" if s.bob_symbol_error_rate is None else f"{s.bob_symbol_error_rate:.4f}"
        print(f"{attack.value:18s} {s.control_rounds_total:9d} {s.detection_rate_per_control:8.4f} "
              f"{s.detection_rate_stderr:8.4f} {d:9.2f} {err:>8s}")


if __name__ == "__main__":
    main()
