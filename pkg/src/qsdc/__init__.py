"""Exact simulator of entanglement-based secure direct communication (double dense coding
with message and control modes), eavesdropper strategies and a Monte Carlo harness."""

from .adversaries import AttackKind, InterceptResend, NoEve, StrongMitm, WeakMitm, make_adversary
from .coding import (
    CorrelationKind,
    RuleMode,
    compute_rates,
    decode_message,
    expected_correlation,
    infer_operation,
    transform,
)
from .harness import ExperimentSpec, SummaryStats, estimate_mutual_information, run_experiment, survival_curve
from .protocol import DetectionPolicy, SessionConfig, SessionResult, run_session
from .quantum import (
    MeasurementBasis,
    QuantumRegister,
    QuantumSystem,
    RandomSource,
    apply_pauli,
    bell_measure,
    bell_state,
    measure_qubit,
    prepare_eigenstate,
    reduced_density,
)

__version__ = "0.1.0"
