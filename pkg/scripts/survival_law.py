"""Undetected fraction after k control rounds against (3/4)^k for intercept-resend.

Every trial runs a single message symbol behind a forced block of control
rounds; the survival profile is the fraction of sessions still undetected
after each prefix of that block.

    python3 scripts/survival_law.py --trials 100000 --controls 16 --seed 5
"""

import argparse
import math

from qsdc import AttackKind, ExperimentSpec, SessionConfig, run_experiment
from qsdc.harness import fit_log_survival


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--controls", type=int, default=16)
    ap.add_argument("--attack", default="intercept-resend", choices=[a.value for a in AttackKind])
    ap.add_argument("--seed", type=int, required=True)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    attack = AttackKind(args.attack)
    per_round = {AttackKind.INTERCEPT_RESEND: 0.75, AttackKind.WEAK_MITM: 0.5}.get(attack, 1.0)
    config = SessionConfig(1, 0.0, args.seed, forced_control_schedule=tuple(range(args.controls)),
                           allow_channel_rewriting=attack is AttackKind.STRONG_MITM)
    s = run_experiment(ExperimentSpec(args.trials, config, attack, workers=args.workers))
    print(f"{'k':>3s} {'reached':>9s} {'survival':>10s} {'predicted':>10s}")
    for k, frac in s.survival_profile.items():
        print(f"{k:3d} {args.trials:9d} {frac:10.5f} {per_round ** k:10.5f}")
    if per_round < 1.0:
        fit = fit_log_survival(s.survival_profile)
        print(f"slope {fit['slope']:.4f} (ln {per_round} = {math.log(per_round):.4f}), R^2 {fit['r2']:.5f}")


if __name__ == "__main__":
    main()
