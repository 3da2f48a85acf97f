"""Executable acceptance criteria.

Each ``criterion_*`` function runs one check and returns a
:class:`CriterionResult`.  ``scale`` shrinks every Monte Carlo trial count;
statistical tolerances widen by ``1/sqrt(scale)`` so the z-score of each
band is the same at any scale.  At ``scale=1`` counts and tolerances are the
pinned values below.
"""

from __future__ import annotations

import math
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import transcript as tx
from .adversaries import AttackKind, make_adversary
from .coding import RuleMode, transform
from .harness import ExperimentSpec, fit_log_survival, run_experiment
from .protocol import Mode, SessionConfig, run_session
from .quantum import (
    PAULI_MATRICES,
    MeasurementBasis,
    QuantumRegister,
    apply_pauli,
    bell_state,
    bell_vector,
    reduced_density,
    states_equal_up_to_phase,
)

EXACT_TOL = 1e-12


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    expected_fail: bool = False

    @property
    def label(self) -> str:
        if self.expected_fail:
            return "XFAIL" if self.passed else "FAIL"
        return "PASS" if self.passed else "FAIL"

    def line(self) -> str:
        return f"[{self.label:5s}] {self.number:2d}. {self.title}: {self.detail}"


def _n(count: int, scale: float, floor: int = 1) -> int:
    return max(floor, int(round(count * scale)))


def _tol(tol: float, scale: float) -> float:
    return tol / math.sqrt(min(scale, 1.0))


def criterion_1(scale: float = 1.0, workers: int = 1) -> CriterionResult:
    bad = []
    for a in range(4):
        for b in range(4):
            reg = QuantumRegister()
            s = reg.add(bell_state(a, 0, 1))
            apply_pauli(reg, 1, b)
            oracle = np.kron(np.eye(2), PAULI_MATRICES[b]) @ bell_vector(a)
            f = transform(a, b)
            ok = states_equal_up_to_phase(s.as_array(), bell_vector(f), EXACT_TOL)
            ok &= states_equal_up_to_phase(oracle, bell_vector(f), EXACT_TOL)
            if not ok:
                bad.append((a, b))
    return CriterionResult(
        1, "transform table vs state vectors", not bad,
        "16/16 pairs agree" if not bad else f"mismatch on {bad}",
    )


def criterion_2(scale: float = 1.0, workers: int = 1) -> CriterionResult:
    trials = _n(10_000, scale, 50)
    s = run_experiment(ExperimentSpec(trials, SessionConfig(50, 0.3, seed=2002), workers=workers))
    ok = s.detections == 0 and s.bob_symbol_error_rate == 0.0 and s.sessions_detected == 0
    ok &= s.message_rounds == 50 * trials
    return CriterionResult(
        2, "honest end-to-end", ok,
        f"{trials} sessions, {s.control_rounds_total} control rounds, "
        f"{s.detections} detections, Bob symbol error rate {s.bob_symbol_error_rate}",
    )


def criterion_3(scale: float = 1.0, workers: int = 1) -> CriterionResult:
    worst = 0.0
    for a in range(4):
        for b in (None, 0, 1, 2, 3):
            reg = QuantumRegister()
            reg.add(bell_state(a, 0, 1))
            if b is not None:
                apply_pauli(reg, 1, b)
            for q in (0, 1):
                worst = max(worst, float(np.max(np.abs(reduced_density(reg, q) - np.eye(2) / 2))))
    return CriterionResult(
        3, "reduced travel-qubit state is I/2", worst <= EXACT_TOL, f"max deviation {worst:.2e}"
    )


_CRIT4_CACHE: dict = {}


def _crit4_spec(scale: float, workers: int) -> ExperimentSpec:
    return ExperimentSpec(
        _n(30_000, scale, 200),
        SessionConfig(20, 0.5, seed=4004),
        attack=AttackKind.INTERCEPT_RESEND,
        workers=workers,
    )


def _crit4_main(scale: float, workers: int = 1):
    key = (scale, workers)
    if key not in _CRIT4_CACHE:
        _CRIT4_CACHE[key] = run_experiment(_crit4_spec(scale, workers))
    return _CRIT4_CACHE[key]


def _forced_bases(eve: MeasurementBasis, bob: MeasurementBasis, trials: int, n: int, seed: int, workers: int):
    return run_experiment(
        ExperimentSpec(
            trials,
            SessionConfig(n, 0.5, seed=seed, forced_control_basis=bob),
            attack=AttackKind.INTERCEPT_RESEND,
            attack_options={"basis": eve.name},
            workers=workers,
        )
    )


def criterion_4(scale: float = 1.0, workers: int = 1) -> CriterionResult:
    B0, B1 = MeasurementBasis.B0, MeasurementBasis.B1
    main = _crit4_main(scale, workers)
    need = _n(100_000, scale)
    tol = _tol(0.01, scale)
    ok_main = main.control_rounds_total >= need and abs(main.detection_rate_per_control - 0.25) <= tol

    same = [_forced_bases(e, e, _n(300, scale, 5), 20, 4100 + e, workers) for e in (B0, B1)]
    same_rounds = sum(s.control_rounds_total for s in same)
    same_det = sum(s.detections for s in same)
    ok_same = same_det == 0 and same_rounds >= _n(10_000, scale)

    diff = [_forced_bases(e, b, _n(3_000, scale, 20), 10, 4200 + e, workers) for e, b in ((B0, B1), (B1, B0))]
    diff_rounds = sum(s.control_rounds_total for s in diff)
    diff_rate = sum(s.detections for s in diff) / diff_rounds
    tol_diff = _tol(0.02, scale)
    ok_diff = diff_rounds >= _n(10_000, scale) and abs(diff_rate - 0.5) <= tol_diff

    return CriterionResult(
        4, "intercept-resend detection", ok_main and ok_same and ok_diff,
        f"d={main.detection_rate_per_control:.4f} over {main.control_rounds_total} controls "
        f"(0.25 +/- {tol:.3f}); equal bases {same_det} detections in {same_rounds}; "
        f"unequal bases {diff_rate:.4f} over {diff_rounds} (0.50 +/- {tol_diff:.3f})",
    )


def criterion_5(scale: float = 1.0, workers: int = 1) -> CriterionResult:
    trials = _n(1_000_000, scale, 1000)
    s = run_experiment(
        ExperimentSpec(
            trials,
            SessionConfig(1, 0.0, seed=5005, forced_control_schedule=tuple(range(16))),
            attack=AttackKind.INTERCEPT_RESEND,
            workers=workers,
        )
    )
    _, _, frac = s.survival_by_ncontrol[16]
    tol = _tol(0.003, scale)
    fit = fit_log_survival(s.survival_profile)
    slope_tol = _tol(0.01, scale)
    ok = abs(frac - 0.75**16) <= tol
    ok &= fit["r2"] > 0.99 and abs(fit["slope"] - math.log(0.75)) <= slope_tol
    return CriterionResult(
        5, "survival law (3/4)^Nc", ok,
        f"{trials} trials: survivors {frac:.5f} vs {0.75**16:.5f} (+/- {tol:.4f}); "
        f"slope {fit['slope']:.4f} vs {math.log(0.75):.4f} (+/- {slope_tol:.3f}), R^2 {fit['r2']:.5f}",
    )


def criterion_6(scale: float = 1.0, workers: int = 1) -> CriterionResult:
    quiet = run_experiment(
        ExperimentSpec(_n(1_000, scale, 20), SessionConfig(20, 0.0, seed=6006),
                       attack=AttackKind.WEAK_MITM, workers=workers)
    )
    ok_quiet = (
        quiet.detections == 0
        and quiet.sessions_detected == 0
        and quiet.eve_accuracy["a_recovery"] == 1.0
        and quiet.eve_accuracy["b_pairclass"] == 1.0
        and quiet.bob_symbol_error_rate == 0.0
    )
    loud = run_experiment(
        ExperimentSpec(_n(55_000, scale, 200), SessionConfig(10, 0.5, seed=6106),
                       attack=AttackKind.WEAK_MITM, workers=workers)
    )
    tol = _tol(0.01, scale)
    ok_loud = loud.control_rounds_total >= _n(100_000, scale) and abs(loud.detection_rate_per_control - 0.5) <= tol
    return CriterionResult(
        6, "weak man-in-the-middle", ok_quiet and ok_loud,
        f"lambda_c=0: {quiet.detections} detections, Eve a/b accuracy "
        f"{quiet.eve_accuracy['a_recovery']}/{quiet.eve_accuracy['b_pairclass']}, "
        f"Bob error {quiet.bob_symbol_error_rate}; with control: d={loud.detection_rate_per_control:.4f} "
        f"over {loud.control_rounds_total} (0.50 +/- {tol:.3f})",
    )


def criterion_7(scale: float = 1.0, workers: int = 1) -> CriterionResult:
    per = _n(10_000, scale, 30) // 3 + 1
    lines = []
    ok = True
    for i, lam in enumerate((0.2, 0.5, 0.8)):
        s = run_experiment(
            ExperimentSpec(per, SessionConfig(10, lam, seed=7007 + i, allow_channel_rewriting=True),
                           attack=AttackKind.STRONG_MITM, workers=workers)
        )
        ok &= (
            s.detections == 0
            and s.sessions_detected == 0
            and s.control_rounds_total > 0
            and s.eve_accuracy["a_recovery"] == 1.0
            and s.eve_accuracy["b_pairclass"] == 1.0
            and s.bob_symbol_error_rate == 0.0
        )
        lines.append(f"lambda_c={lam}: {s.detections}/{s.control_rounds_total}")
    return CriterionResult(
        7, "strong man-in-the-middle", ok, f"{3 * per} sessions, detections " + ", ".join(lines)
    )


def criterion_8(scale: float = 1.0, workers: int = 1) -> CriterionResult:
    trials = _n(2_000, scale, 20)
    s = run_experiment(ExperimentSpec(trials, SessionConfig(50, 0.0, seed=8008), workers=workers))
    pvals = [s.chi2_f_uniformity[a]["p_value"] for a in range(4)]
    # Plug-in bias is ~9/(2 n ln 2) bit, far below the limit even at small scale.
    ok = min(pvals) > 0.001 and s.mi_a_f is not None and s.mi_a_f < 0.01
    return CriterionResult(
        8, "published final states independent of message", ok,
        f"{s.message_rounds} message rounds, min chi2 p={min(pvals):.4f}, MI={s.mi_a_f:.2e} bit",
    )


def criterion_9(scale: float = 1.0, workers: int = 1) -> CriterionResult:
    s = run_experiment(ExperimentSpec(_n(200, scale, 10), SessionConfig(25, 0.0, seed=9009), workers=workers))
    return CriterionResult(
        9, "transmission rates", s.rq == 1.0 and s.rtot == 0.5, f"rq={s.rq}, rtot={s.rtot}"
    )


def criterion_10(scale: float = 1.0, workers: int = 1) -> CriterionResult:
    trials = _n(500, scale, 10)
    s = run_experiment(
        ExperimentSpec(trials, SessionConfig(20, 0.0, seed=1010), attack=AttackKind.INTERCEPT_RESEND, workers=workers)
    )
    ok = s.eve_accuracy["b_pairclass"] == 1.0 and s.message_rounds == 20 * trials
    return CriterionResult(
        10, "intercept-resend learns one bit of b", ok,
        f"pair-class accuracy {s.eve_accuracy['b_pairclass']} over {s.message_rounds} message rounds",
    )


def criterion_11(scale: float = 1.0, workers: int = 1) -> CriterionResult:
    sessions = _n(4_000, scale, 40)
    flagged = suspicious = 0
    stray = 0
    for i in range(sessions):
        config = SessionConfig(10, 0.5, seed=11_000 + i, rule_mode=RuleMode.PAPER_LITERAL)
        message = [(i + k) % 4 for k in range(10)]
        for rec in run_session(config, message).transcript:
            if rec.mode is not Mode.CONTROL:
                continue
            predicted = rec.a_n in (1, 2) and rec.control.basis is MeasurementBasis.B1
            failed = not rec.control.passed
            suspicious += predicted
            flagged += predicted and failed
            stray += failed and not predicted
    rate = flagged / suspicious if suspicious else 0.0
    ok = suspicious > 0 and rate == 1.0 and stray == 0
    return CriterionResult(
        11, "literal control rule false positives", ok,
        f"{flagged}/{suspicious} honest rounds with a in {{1,2}}, basis B1 flagged; "
        f"{stray} detections elsewhere",
        expected_fail=True,
    )


def criterion_12(scale: float = 1.0, workers: int = 1) -> CriterionResult:
    identical = 0
    total = 0
    with tempfile.TemporaryDirectory() as tmp:
        for attack in AttackKind:
            for seed in range(3):
                config = SessionConfig(12, 0.4, seed=1200 + seed,
                                       allow_channel_rewriting=attack is AttackKind.STRONG_MITM)
                message = [(seed * 7 + k) % 4 for k in range(12)]
                result = run_session(config, message, make_adversary(attack))
                path = Path(tmp) / f"{attack.value}_{seed}.jsonl"
                tx.write_transcript(path, tx.header(config, message, attack.value), result)
                identical += tx.replay(path).identical
                total += 1
    one = _crit4_main(scale, 1).to_dict()
    many = run_experiment(_crit4_spec(scale, 8)).to_dict()
    ok = identical == total and one == many
    return CriterionResult(
        12, "determinism", ok,
        f"{identical}/{total} transcripts replay bit-identically; "
        f"criterion-4 summary with 1 vs 8 workers {'identical' if one == many else 'DIFFERS'}",
    )


CRITERIA: dict[int, Callable[..., CriterionResult]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
    5: criterion_5, 6: criterion_6, 7: criterion_7, 8: criterion_8,
    9: criterion_9, 10: criterion_10, 11: criterion_11, 12: criterion_12,
}


def run_all(scale: float = 1.0, workers: int = 1, only: Optional[list[int]] = None, echo=print) -> list[CriterionResult]:
    results = []
    for number, fn in CRITERIA.items():
        if only and number not in only:
            continue
        res = fn(scale=scale, workers=workers)
        if echo is not None:
            echo(res.line())
        results.append(res)
    return results
