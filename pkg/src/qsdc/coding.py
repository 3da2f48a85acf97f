"""Index-level algebra of double dense coding.

Bell states are numbered 0..3 as |0+>, |0->, |1+>, |1->, where
|n+-> = (|0 n> +- |1 (1-n)>)/sqrt(2).  Pauli operations are numbered
0..3 as I, X, Y, Z and always act on the travel (second) qubit.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass
from enum import Enum

from .errors import InvalidArgument
from .quantum import MeasurementBasis, check_bell, check_pauli

BELL_LABELS = ("|0+>", "|0->", "|1+>", "|1->")

# TRANSFORM_TABLE[b][a] = f with |Psi_f> ~ (1 (x) sigma_b)|Psi_a>
TRANSFORM_TABLE: list[list[int]] = [
    [0, 1, 2, 3],
    [2, 3, 0, 1],
    [3, 2, 1, 0],
    [1, 0, 3, 2],
]


class CorrelationKind(Enum):
    CORRELATED = "correlated"
    ANTICORRELATED = "anticorrelated"

    @classmethod
    def of(cls, j: int, k: int) -> "CorrelationKind":
        return cls.CORRELATED if j == k else cls.ANTICORRELATED


class RuleMode(Enum):
    """How Alice decides which correlation an honest control round must show.

    PHYSICAL uses the basis-aware table that follows from the Bell states.
    PAPER_LITERAL applies the published detection condition verbatim, which
    ignores the basis and so misjudges |0-> and |1+> in B1.
    """

    PHYSICAL = "physical"
    PAPER_LITERAL = "paper-literal"


def bell_components(a: int) -> tuple[int, str]:
    """Split a Bell index into (n, sign) with ``a = 2n + (sign == '-')``."""
    check_bell(a)
    return a >> 1, "-" if a & 1 else "+"


def bell_index(n: int, sign: str) -> int:
    if n not in (0, 1) or sign not in ("+", "-"):
        raise InvalidArgument(f"bad Bell components ({n!r}, {sign!r})")
    return 2 * n + (sign == "-")


def transform(a: int, b: int) -> int:
    return TRANSFORM_TABLE[check_pauli(b)][check_bell(a)]


def decode_message(f: int, b: int) -> int:
    # sigma_b is self-inverse, so decoding is the same table lookup.
    return transform(f, b)


def infer_operation(a: int, f: int) -> int:
    check_bell(a)
    check_bell(f)
    for b in range(4):
        if TRANSFORM_TABLE[b][a] == f:
            return b
    raise InvalidArgument(f"no Pauli operation maps {a} to {f}; table is corrupt")


def expected_correlation(
    a: int, basis: MeasurementBasis, mode: RuleMode = RuleMode.PHYSICAL
) -> CorrelationKind:
    check_bell(a)
    n, sign = a >> 1, a & 1
    if mode is RuleMode.PAPER_LITERAL or MeasurementBasis(basis) is MeasurementBasis.B0:
        return CorrelationKind.CORRELATED if n == 0 else CorrelationKind.ANTICORRELATED
    # In B1 the sign, not n, decides: |0+>, |1+> correlated; |0->, |1-> anti.
    return CorrelationKind.CORRELATED if sign == 0 else CorrelationKind.ANTICORRELATED


@dataclass(frozen=True)
class Rates:
    rq: float
    rtot: float


def compute_rates(message_qubits: int, message_bits_delivered: int, classical_bits: int) -> Rates:
    """Quantum rate (bits per qubit sent) and total rate (bits per qubit+bit sent).

    Only message-mode traffic is counted: a message round moves the travel
    qubit forth and back (2 qubits), delivers 2 bits and costs 2 classical
    bits for the published final-state symbol.
    """
    if message_qubits <= 0:
        raise InvalidArgument("rates need at least one transmitted qubit")
    if min(message_bits_delivered, classical_bits) < 0:
        raise InvalidArgument("counts must be non-negative")
    return Rates(
        rq=message_bits_delivered / message_qubits,
        rtot=message_bits_delivered / (message_qubits + classical_bits),
    )


def session_rates(message_rounds: int) -> Rates:
    return compute_rates(2 * message_rounds, 2 * message_rounds, 2 * message_rounds)


@contextmanager
def corrupted_table(b: int = 1):
    """Temporarily swap two entries of row ``b`` (fault injection for self-checks)."""
    row = TRANSFORM_TABLE[b]
    saved = list(row)
    row[0], row[1] = row[1], row[0]
    try:
        yield
    finally:
        row[:] = saved
