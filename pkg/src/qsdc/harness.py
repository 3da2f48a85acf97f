"""Monte Carlo experiments over many independent sessions.

Trial ``i`` of an experiment with master seed ``s`` runs a session seeded
with ``derive_seed(s, "trial", i)``; its random message (when none is fixed)
comes from ``derive_seed(s, "message", i)``.  Per-trial results are reduced
into integer tallies, so the summary is identical for any number of worker
processes.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .adversaries import AttackKind, make_adversary
from .coding import compute_rates
from .errors import AbortedAfterRetries, InvalidArgument
from .protocol import Mode, SessionConfig, run_session
from .quantum import RandomSource, derive_seed
from . import transcript as tx

MIN_MI_SAMPLES = 1000


@dataclass(frozen=True)
class ExperimentSpec:
    trials: int
    session_config: SessionConfig
    attack: AttackKind = AttackKind.NONE
    attack_options: Optional[dict] = None
    message: Optional[tuple[int, ...]] = None
    sweep: Optional[dict] = None
    output_path: Optional[Path] = None
    write_transcripts: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise InvalidArgument("trials must be >= 1")
        if self.workers < 1:
            raise InvalidArgument("workers must be >= 1")
        object.__setattr__(self, "attack", AttackKind(self.attack))
        if self.message is not None:
            object.__setattr__(self, "message", tuple(self.message))


# --------------------------------------------------------------------------
# tallies


@dataclass
class Tally:
    trials: int = 0
    sessions_detected: int = 0
    aborted_after_retries: int = 0
    control_rounds: int = 0
    detections: int = 0
    message_rounds: int = 0
    qubit_transmissions: int = 0
    classical_bits: int = 0
    usable_bits: int = 0
    decoded_symbols: int = 0
    symbol_errors: int = 0
    joint: list = field(default_factory=lambda: [[0] * 4 for _ in range(4)])
    by_ncontrol: dict = field(default_factory=dict)  # N_c -> [trials, survivors]
    reach: list = field(default_factory=list)  # sessions scheduled for >= k controls
    survive: list = field(default_factory=list)  # ... of which undetected after k
    b_guesses: int = 0
    b_correct: int = 0
    a_guesses: int = 0
    a_correct: int = 0

    def add_session(self, result) -> None:
        self.trials += 1
        self.sessions_detected += result.detected
        c = result.counters
        self.control_rounds += c.control_rounds
        self.message_rounds += c.message_rounds
        self.qubit_transmissions += c.qubit_transmissions
        self.classical_bits += c.classical_bits
        joint = self.joint
        for rec in result.transcript:
            if rec.mode is Mode.MESSAGE:
                joint[rec.a_n][rec.f_n] += 1
            elif rec.control.verdict == "fail":
                self.detections += 1
        if result.bob_decoded:
            self.usable_bits += 2 * len(result.bob_decoded)
            self.decoded_symbols += len(result.bob_decoded)
            self.symbol_errors += sum(x != y for x, y in zip(result.bob_decoded, result.message))
        nc = result.scheduled_control_rounds
        group = self.by_ncontrol.setdefault(nc, [0, 0])
        group[0] += 1
        group[1] += not result.detected
        while len(self.reach) <= nc:
            self.reach.append(0)
            self.survive.append(0)
        m = result.detection_control_index
        for k in range(nc + 1):
            self.reach[k] += 1
            self.survive[k] += m is None or m > k
        r = result.eve_report
        self.b_guesses += r.b_guesses
        self.b_correct += r.b_correct
        self.a_guesses += r.a_guesses
        self.a_correct += r.a_correct

    def merge(self, other: "Tally") -> "Tally":
        for name in (
            "trials", "sessions_detected", "aborted_after_retries", "control_rounds",
            "detections", "message_rounds", "qubit_transmissions", "classical_bits",
            "usable_bits", "decoded_symbols", "symbol_errors",
            "b_guesses", "b_correct", "a_guesses", "a_correct",
        ):
            setattr(self, name, getattr(self, name) + getattr(other, name))
        for i in range(4):
            for j in range(4):
                self.joint[i][j] += other.joint[i][j]
        for nc, (t, s) in other.by_ncontrol.items():
            g = self.by_ncontrol.setdefault(nc, [0, 0])
            g[0] += t
            g[1] += s
        n = max(len(self.reach), len(other.reach))
        self.reach += [0] * (n - len(self.reach))
        self.survive += [0] * (n - len(self.survive))
        for k in range(len(other.reach)):
            self.reach[k] += other.reach[k]
            self.survive[k] += other.survive[k]
        return self


# --------------------------------------------------------------------------
# statistics


def mutual_information_from_counts(counts) -> float:
    """Plug-in mutual information, in bits, of a 2-D contingency table."""
    joint = np.asarray(counts, dtype=float)
    total = joint.sum()
    if total <= 0:
        raise InvalidArgument("empty contingency table")
    p = joint / total
    px = p.sum(axis=1, keepdims=True)
    py = p.sum(axis=0, keepdims=True)
    nz = p > 0
    return float(np.sum(p[nz] * np.log2(p[nz] / (px @ py)[nz])))


def estimate_mutual_information(pairs: Sequence[tuple[int, int]]) -> float:
    """Plug-in I(a; f) in bits over the 4x4 empirical joint distribution."""
    if len(pairs) < MIN_MI_SAMPLES:
        raise InvalidArgument(f"need at least {MIN_MI_SAMPLES} pairs, got {len(pairs)}")
    counts = np.zeros((4, 4), dtype=np.int64)
    for a, f in pairs:
        counts[a, f] += 1
    return mutual_information_from_counts(counts)


def chi2_uniformity(joint) -> dict:
    """Per-row chi-square test of f uniform on 0..3 given a."""
    out = {}
    for a, row in enumerate(joint):
        n = int(sum(row))
        if n == 0:
            out[a] = None
            continue
        res = stats.chisquare(row)
        out[a] = {"n": n, "statistic": float(res.statistic), "p_value": float(res.pvalue)}
    return out


def fit_log_survival(profile: dict) -> dict:
    """Least-squares line through ln(survival) vs number of control rounds."""
    ks = [k for k, frac in sorted(profile.items()) if frac > 0]
    if len(ks) < 3:
        raise InvalidArgument("need at least three non-zero survival points to fit")
    ys = [math.log(profile[k]) for k in ks]
    fit = stats.linregress(ks, ys)
    return {"slope": float(fit.slope), "intercept": float(fit.intercept), "r2": float(fit.rvalue**2)}


def _stderr(p: float, n: int) -> float:
    return math.sqrt(p * (1.0 - p) / n) if n else 0.0


@dataclass
class SummaryStats:
    trials: int
    sessions_detected: int
    aborted_after_retries: int
    control_rounds_total: int
    detections: int
    detection_rate_per_control: float
    detection_rate_stderr: float
    survival_by_ncontrol: dict  # N_c -> (trials, survivors, survivor_fraction)
    survival_profile: dict  # k -> fraction undetected through the first k control rounds
    mi_a_f: Optional[float]
    chi2_f_uniformity: dict
    rq: float
    rtot: float
    bob_symbol_error_rate: Optional[float]
    eve_accuracy: dict
    message_rounds: int
    qubit_transmissions: int
    classical_bits: int
    decoded_symbols: int
    symbol_errors: int
    joint_a_f: list

    @classmethod
    def from_tally(cls, t: Tally) -> "SummaryStats":
        rate = t.detections / t.control_rounds if t.control_rounds else 0.0
        message_qubits = 2 * t.message_rounds
        if message_qubits:
            rates = compute_rates(message_qubits, t.usable_bits, t.classical_bits)
            rq, rtot = rates.rq, rates.rtot
        else:
            rq = rtot = 0.0
        pairs = sum(map(sum, t.joint))
        return cls(
            trials=t.trials,
            sessions_detected=t.sessions_detected,
            aborted_after_retries=t.aborted_after_retries,
            control_rounds_total=t.control_rounds,
            detections=t.detections,
            detection_rate_per_control=rate,
            detection_rate_stderr=_stderr(rate, t.control_rounds),
            survival_by_ncontrol={
                nc: (n, s, s / n) for nc, (n, s) in sorted(t.by_ncontrol.items())
            },
            survival_profile={
                k: t.survive[k] / t.reach[k] for k in range(len(t.reach)) if t.reach[k]
            },
            mi_a_f=mutual_information_from_counts(t.joint) if pairs >= MIN_MI_SAMPLES else None,
            chi2_f_uniformity=chi2_uniformity(t.joint),
            rq=rq,
            rtot=rtot,
            bob_symbol_error_rate=(
                t.symbol_errors / t.decoded_symbols if t.decoded_symbols else None
            ),
            eve_accuracy={
                "b_pairclass": t.b_correct / t.b_guesses if t.b_guesses else None,
                "a_recovery": t.a_correct / t.a_guesses if t.a_guesses else None,
            },
            message_rounds=t.message_rounds,
            qubit_transmissions=t.qubit_transmissions,
            classical_bits=t.classical_bits,
            decoded_symbols=t.decoded_symbols,
            symbol_errors=t.symbol_errors,
            joint_a_f=[list(row) for row in t.joint],
        )

    @property
    def survival_fraction(self) -> float:
        return 1.0 - self.sessions_detected / self.trials if self.trials else 0.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["survival_by_ncontrol"] = {
            str(k): {"trials": n, "survivors": s, "survivor_fraction": f}
            for k, (n, s, f) in self.survival_by_ncontrol.items()
        }
        d["survival_profile"] = {str(k): v for k, v in self.survival_profile.items()}
        d["chi2_f_uniformity"] = {str(k): v for k, v in self.chi2_f_uniformity.items()}
        return d


# --------------------------------------------------------------------------
# running


def trial_config(spec: ExperimentSpec, index: int) -> SessionConfig:
    return replace(spec.session_config, seed=derive_seed(spec.session_config.seed, "trial", index))


def trial_message(spec: ExperimentSpec, index: int) -> list[int]:
    if spec.message is not None:
        return list(spec.message)
    rng = RandomSource(derive_seed(spec.session_config.seed, "message", index))
    return [rng.choice(4) for _ in range(spec.session_config.n_messages)]


def run_trial(spec: ExperimentSpec, index: int):
    config = trial_config(spec, index)
    message = trial_message(spec, index)
    adversary = make_adversary(spec.attack, spec.attack_options)
    try:
        return config, message, run_session(config, message, adversary), False
    except AbortedAfterRetries as exc:
        return config, message, exc.result, True


def _run_chunk(spec: ExperimentSpec, start: int, stop: int) -> Tally:
    tally = Tally()
    for i in range(start, stop):
        config, message, result, capped = run_trial(spec, i)
        tally.add_session(result)
        tally.aborted_after_retries += capped
        if spec.write_transcripts and spec.output_path is not None:
            head = tx.header(config, message, spec.attack.value, spec.attack_options)
            tx.write_transcript(Path(spec.output_path) / "transcripts" / f"trial_{i:07d}.jsonl", head, result)
    return tally


def _chunks(trials: int, workers: int) -> list[tuple[int, int]]:
    pieces = 1 if workers == 1 else min(trials, 4 * workers)
    bounds = np.linspace(0, trials, pieces + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def run_experiment(spec: ExperimentSpec) -> SummaryStats:
    if spec.output_path is not None:
        out = Path(spec.output_path)
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise OSError(f"cannot create output directory {out}: {exc}") from exc
    chunks = _chunks(spec.trials, spec.workers)
    if spec.workers == 1:
        parts = [_run_chunk(spec, a, b) for a, b in chunks]
    else:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            futures = [pool.submit(_run_chunk, spec, a, b) for a, b in chunks]
            parts = [f.result() for f in futures]
    total = Tally()
    for part in parts:
        total.merge(part)
    summary = SummaryStats.from_tally(total)
    if spec.output_path is not None:
        write_summary(Path(spec.output_path) / "summary.json", spec, summary)
    return summary


def write_summary(path: Path, spec: ExperimentSpec, summary: SummaryStats) -> None:
    doc = {
        "experiment": {
            "trials": spec.trials,
            "attack": spec.attack.value,
            "attack_options": spec.attack_options,
            "session_config": spec.session_config.to_dict(),
            "message": list(spec.message) if spec.message is not None else None,
        },
        "summary": summary.to_dict(),
    }
    path.write_text(json.dumps(doc, indent=2, sort_keys=True))


def survival_curve(
    attack,
    lambda_c: float,
    n: int,
    trials: int,
    seed: int,
    workers: int = 1,
) -> list[tuple[int, float]]:
    """Undetected fraction grouped by each trial's scheduled number of control rounds."""
    spec = ExperimentSpec(
        trials=trials,
        session_config=SessionConfig(n_messages=n, lambda_c=lambda_c, seed=seed),
        attack=attack,
        workers=workers,
    )
    summary = run_experiment(spec)
    return [(nc, frac) for nc, (_, _, frac) in summary.survival_by_ncontrol.items()]


# --------------------------------------------------------------------------
# sweeps

SWEEP_COLUMNS = (
    "lambda_c", "n_messages", "attack", "detection_rate", "survival", "mi",
    "rq", "rtot", "bob_error", "eve_b_acc", "eve_a_acc",
)


def run_sweep(spec: ExperimentSpec, grid: Optional[dict] = None) -> list[dict]:
    """One experiment per point of the grid over lambda_c, n_messages and attack."""
    grid = dict(grid if grid is not None else (spec.sweep or {}))
    unknown = set(grid) - {"lambda_c", "n_messages", "attack"}
    if unknown:
        raise InvalidArgument(f"cannot sweep over {sorted(unknown)}")
    lambdas = grid.get("lambda_c", [spec.session_config.lambda_c])
    sizes = grid.get("n_messages", [spec.session_config.n_messages])
    attacks = [AttackKind(a) for a in grid.get("attack", [spec.attack])]
    rows = []
    for lam, n, attack in itertools.product(lambdas, sizes, attacks):
        point = replace(
            spec,
            session_config=replace(
                spec.session_config,
                lambda_c=float(lam),
                n_messages=int(n),
                allow_channel_rewriting=attack is AttackKind.STRONG_MITM,
            ),
            attack=attack,
            message=None,
            output_path=None,
            write_transcripts=False,
        )
        s = run_experiment(point)
        rows.append(
            {
                "lambda_c": float(lam),
                "n_messages": int(n),
                "attack": attack.value,
                "detection_rate": s.detection_rate_per_control,
                "survival": s.survival_fraction,
                "mi": s.mi_a_f,
                "rq": s.rq,
                "rtot": s.rtot,
                "bob_error": s.bob_symbol_error_rate,
                "eve_b_acc": s.eve_accuracy["b_pairclass"],
                "eve_a_acc": s.eve_accuracy["a_recovery"],
            }
        )
    return rows


def write_sweep_csv(path, rows: Sequence[dict]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if row[k] is None else row[k]) for k in SWEEP_COLUMNS})
    return path
