import csv
import json
import math
import os

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qsdc.adversaries import AttackKind
from qsdc.errors import InvalidArgument
from qsdc.harness import (
    SWEEP_COLUMNS,
    ExperimentSpec,
    Tally,
    estimate_mutual_information,
    fit_log_survival,
    mutual_information_from_counts,
    run_experiment,
    run_sweep,
    survival_curve,
    trial_config,
    write_sweep_csv,
)
from qsdc.protocol import SessionConfig


def spec(trials=200, n=10, lam=0.3, seed=1, attack="none", **kw):
    return ExperimentSpec(trials, SessionConfig(n, lam, seed), AttackKind(attack), **kw)


# -- mutual information


def test_mi_identity_coupling_is_two_bits():
    rng = np.random.default_rng(0)
    a = rng.integers(0, 4, 10_000)
    assert estimate_mutual_information(list(zip(a, a))) == pytest.approx(2.0, abs=0.01)


def test_mi_independent_uniform_is_small():
    rng = np.random.default_rng(1)
    a, f = rng.integers(0, 4, 100_000), rng.integers(0, 4, 100_000)
    assert estimate_mutual_information(list(zip(a, f))) < 0.01


def test_mi_needs_enough_samples():
    with pytest.raises(InvalidArgument):
        estimate_mutual_information([(0, 0)] * 999)


def test_mi_degenerate_operation_is_two_bits():
    # Bob never flips: f = transform(a, 0) = a, so f carries the whole message.
    from qsdc.coding import transform

    rng = np.random.default_rng(2)
    pairs = [(int(a), transform(int(a), 0)) for a in rng.integers(0, 4, 5000)]
    assert estimate_mutual_information(pairs) == pytest.approx(2.0, abs=0.01)


def test_honest_session_mi_is_small():
    s = run_experiment(spec(trials=100, n=20, lam=0.0))
    assert sum(map(sum, s.joint_a_f)) == 2000
    assert s.mi_a_f < 0.01


@given(st.lists(st.lists(st.integers(0, 50), min_size=4, max_size=4), min_size=4, max_size=4))
def test_mi_bounds(counts):
    if sum(map(sum, counts)) == 0:
        return
    mi = mutual_information_from_counts(counts)
    assert -1e-12 <= mi <= 2 + 1e-12


# -- experiments


def test_honest_experiment():
    s = run_experiment(spec(trials=2000, n=20, lam=0.3))
    assert s.detections == 0 and s.detection_rate_per_control == 0
    assert s.control_rounds_total > 0
    assert s.bob_symbol_error_rate == 0.0
    assert s.rq == 1.0 and s.rtot == 0.5
    assert s.qubit_transmissions == 2 * s.message_rounds + s.control_rounds_total


def test_intercept_resend_rate():
    s = run_experiment(spec(trials=4000, n=20, lam=0.5, attack="intercept-resend"))
    assert abs(s.detection_rate_per_control - 0.25) < 3.5 * s.detection_rate_stderr + 1e-3
    assert 0 <= s.detections <= s.control_rounds_total
    for v in (s.detection_rate_per_control, s.survival_fraction, s.bob_symbol_error_rate):
        assert 0 <= v <= 1


def test_trial_seeds_are_derived_per_index():
    sp = spec(seed=9)
    seeds = {trial_config(sp, i).seed for i in range(100)}
    assert len(seeds) == 100
    assert trial_config(sp, 7) == trial_config(spec(seed=9), 7)


def test_determinism_across_workers(tmp_path):
    base = dict(trials=120, n=8, lam=0.4, seed=3, attack="intercept-resend", write_transcripts=True)
    one = run_experiment(spec(**base, output_path=tmp_path / "w1", workers=1))
    three = run_experiment(spec(**base, output_path=tmp_path / "w3", workers=3))
    assert one == three
    s1 = json.loads((tmp_path / "w1" / "summary.json").read_text())["summary"]
    s3 = json.loads((tmp_path / "w3" / "summary.json").read_text())["summary"]
    assert s1 == s3
    names = sorted(os.listdir(tmp_path / "w1" / "transcripts"))
    assert len(names) == 120
    assert names == sorted(os.listdir(tmp_path / "w3" / "transcripts"))
    for name in names:
        assert (tmp_path / "w1" / "transcripts" / name).read_bytes() == \
            (tmp_path / "w3" / "transcripts" / name).read_bytes()


def test_tally_merge_is_order_independent():
    from qsdc.harness import _run_chunk

    sp = spec(trials=60, n=6, lam=0.5, attack="weak-mitm")
    whole = _run_chunk(sp, 0, 60)
    parts = Tally().merge(_run_chunk(sp, 0, 25)).merge(_run_chunk(sp, 25, 60))
    assert whole == parts


def test_summary_json_fields(tmp_path):
    run_experiment(spec(trials=50, output_path=tmp_path))
    doc = json.loads((tmp_path / "summary.json").read_text())
    s = doc["summary"]
    for key in ("control_rounds_total", "detections", "detection_rate_per_control",
                "detection_rate_stderr", "survival_by_ncontrol", "mi_a_f",
                "chi2_f_uniformity", "rq", "rtot", "bob_symbol_error_rate", "eve_accuracy"):
        assert key in s
    assert set(s["eve_accuracy"]) == {"b_pairclass", "a_recovery"}
    for group in s["survival_by_ncontrol"].values():
        assert set(group) == {"trials", "survivors", "survivor_fraction"}
    assert doc["experiment"]["session_config"]["seed"] == 1


def test_unwritable_output_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        run_experiment(spec(trials=2, output_path=blocker / "sub"))


def test_spec_validation():
    with pytest.raises(InvalidArgument):
        spec(trials=0)
    with pytest.raises(InvalidArgument):
        spec(workers=0)


# -- survival


def test_survival_curve_zero_controls_always_survive():
    curve = dict(survival_curve("weak-mitm", 0.4, 3, 500, seed=2))
    assert curve[0] == 1.0


def test_survival_curve_one_control_intercept_resend():
    curve = dict(survival_curve("intercept-resend", 0.5, 1, 20_000, seed=3))
    assert abs(curve[1] - 0.75) <= 0.02


def test_survival_curve_eight_controls_weak_mitm():
    spec8 = ExperimentSpec(100_000, SessionConfig(8, 0.5, 4), AttackKind.WEAK_MITM)
    s = run_experiment(spec8)
    n8, _, frac = s.survival_by_ncontrol[8]
    assert n8 > 8000
    assert abs(frac - 0.5**8) <= 0.002


def test_survival_groups_match_power_law():
    s = run_experiment(ExperimentSpec(20_000, SessionConfig(6, 0.5, 5), AttackKind.INTERCEPT_RESEND))
    for nc, (n, _, frac) in s.survival_by_ncontrol.items():
        if n < 200:
            continue
        p = 0.75**nc
        assert abs(frac - p) <= 3 * math.sqrt(p * (1 - p) / n) + 1e-12


def test_fit_log_survival_on_exact_profile():
    fit = fit_log_survival({k: 0.75**k for k in range(10)})
    assert fit["slope"] == pytest.approx(math.log(0.75))
    assert fit["r2"] == pytest.approx(1.0)
    with pytest.raises(InvalidArgument):
        fit_log_survival({0: 1.0, 1: 0.0})


# -- sweeps


def test_sweep_csv(tmp_path):
    rows = run_sweep(spec(trials=30, n=5), {"lambda_c": [0.2, 0.5], "attack": ["none", "strong-mitm"]})
    assert len(rows) == 4
    path = write_sweep_csv(tmp_path / "out" / "sweep.csv", rows)
    with path.open() as fh:
        reader = csv.DictReader(fh)
        assert tuple(reader.fieldnames) == SWEEP_COLUMNS
        got = list(reader)
    assert [(r["lambda_c"], r["attack"]) for r in got] == [
        ("0.2", "none"), ("0.2", "strong-mitm"), ("0.5", "none"), ("0.5", "strong-mitm")]
    assert all(float(r["detection_rate"]) == 0.0 for r in got)
    with pytest.raises(InvalidArgument):
        run_sweep(spec(trials=2), {"seed": [1]})
