"""Eavesdropper strategies.

Each class is a set of :class:`~qsdc.protocol.AdversaryHooks` owned by a
single session.  ``make_adversary`` maps the CLI names onto them.
"""

from __future__ import annotations

from enum import Enum
from typing import Optional, Sequence

from .coding import decode_message, infer_operation
from .errors import InvalidArgument
from .protocol import (
    AbortNotice,
    AdversaryHooks,
    ClassicalMessage,
    ControlAnnounce,
    EveReport,
    QuantumRegister,
    RoundContext,
)
from .quantum import (
    BASES,
    MeasurementBasis,
    apply_pauli,
    bell_measure,
    bell_state,
    measure_qubit,
)

__all__ = [
    "AttackKind",
    "EveReport",
    "InterceptResend",
    "NoEve",
    "StrongMitm",
    "WeakMitm",
    "make_adversary",
]


class AttackKind(Enum):
    NONE = "none"
    INTERCEPT_RESEND = "intercept-resend"
    WEAK_MITM = "weak-mitm"
    STRONG_MITM = "strong-mitm"


class NoEve(AdversaryHooks):
    name = "none"


# Operations that leave a basis-B eigenstate in place vs. flip it.
_PAIR_CLASSES = {
    (MeasurementBasis.B0, False): (0, 3),
    (MeasurementBasis.B0, True): (1, 2),
    (MeasurementBasis.B1, False): (0, 1),
    (MeasurementBasis.B1, True): (2, 3),
}


class InterceptResend(AdversaryHooks):
    """Measure the outgoing travel qubit, forward it, measure it again on return.

    The first measurement leaves the qubit in an eigenstate of Eve's basis,
    so comparing the two outcomes tells her whether Bob's operation flipped
    that eigenstate: one bit about ``b`` per message round.

    ``basis`` pins Eve's basis; by default it is redrawn uniformly per round.
    """

    name = "intercept-resend"

    def __init__(self, basis: Optional[MeasurementBasis] = None):
        self.fixed_basis = basis

    def begin_session(self, nature, eve):
        super().begin_session(nature, eve)
        self._reset()

    def _reset(self):
        self.guessed_b: list = []
        self._pending = None
        self._new_segment = False

    def on_forward(self, reg, travel, ctx):
        if self._new_segment:
            self._reset()
        basis = self.fixed_basis if self.fixed_basis is not None else BASES[self.eve.choice(2)]
        outcome = measure_qubit(reg, travel, basis, self.nature)
        self._pending = (basis, outcome)
        ctx.events.append(f"ir:forward basis={basis.name} outcome={outcome}")
        return travel

    def on_return(self, reg, travel, ctx):
        basis, first = self._pending
        second = measure_qubit(reg, travel, basis, self.nature)
        cls = _PAIR_CLASSES[(basis, first != second)]
        self.guessed_b.append(cls)
        self._pending = None
        ctx.events.append(f"ir:return outcome={second} b_in={cls[0]}{cls[1]}")
        return travel

    def on_classical(self, msg, ctx):
        if isinstance(msg, ControlAnnounce):
            self._pending = None
        elif isinstance(msg, AbortNotice):
            # Guesses stay readable until the restarted segment begins.
            self._new_segment = True
        return msg

    def on_session_end(self, f_list):
        return EveReport(guessed_b=list(self.guessed_b), guessed_a=[None] * len(self.guessed_b))


class WeakMitm(AdversaryHooks):
    """Substitute an evil Bell pair toward Bob and relay his operation to Alice.

    Eve keeps Alice's travel qubit, sends one half of her own pair (a known
    Bell state) to Bob, recovers Bob's operation exactly by Bell-measuring
    her pair when the qubit comes back, replays that operation on Alice's
    qubit, and finally reads Alice's symbols off the published final states.
    """

    name = "weak-mitm"

    def __init__(self, evil_state: int = 0):
        if evil_state not in (0, 1, 2, 3):
            raise InvalidArgument(f"evil Bell state must be in 0..3, got {evil_state!r}")
        self.evil_state = evil_state

    def begin_session(self, nature, eve):
        super().begin_session(nature, eve)
        self._reset()

    def _reset(self):
        self.guessed_b: list = []
        self._stored = None
        self._evil_home = None
        self._new_segment = False

    def on_forward(self, reg: QuantumRegister, travel: int, ctx: RoundContext) -> int:
        if self._new_segment:
            self._reset()
        evil_home, evil_travel = reg.allocate(2)
        reg.add(bell_state(self.evil_state, evil_home, evil_travel))
        self._stored = travel
        self._evil_home = evil_home
        ctx.events.append(f"mitm:substitute evil={self.evil_state}")
        return evil_travel

    def on_return(self, reg, travel, ctx):
        f_evil = bell_measure(reg, self._evil_home, travel, self.nature)
        b = infer_operation(self.evil_state, f_evil)
        apply_pauli(reg, self._stored, b)
        self.guessed_b.append(b)
        ctx.events.append(f"mitm:relay b={b}")
        return self._stored

    def on_classical(self, msg: ClassicalMessage, ctx: RoundContext) -> ClassicalMessage:
        if isinstance(msg, AbortNotice):
            self._new_segment = True
        return msg

    def on_session_end(self, f_list: Optional[Sequence[int]]) -> EveReport:
        if f_list is None:
            guessed_a = [None] * len(self.guessed_b)
        else:
            guessed_a = [decode_message(f, b) for f, b in zip(f_list, self.guessed_b)]
        return EveReport(guessed_b=list(self.guessed_b), guessed_a=guessed_a)


class StrongMitm(WeakMitm):
    """Weak MITM plus control of the public channel.

    When Bob announces a control measurement, Eve measures Alice's stored
    travel qubit in the announced basis herself and forwards her own outcome,
    so Alice always sees the correlation she expects.
    """

    name = "strong-mitm"
    rewrites_classical = True

    def on_classical(self, msg, ctx):
        if isinstance(msg, ControlAnnounce):
            forged = ControlAnnounce(msg.basis, measure_qubit(self._reg, self._stored, msg.basis, self.nature))
            ctx.events.append(f"mitm:forge j={msg.outcome_j}->{forged.outcome_j}")
            return forged
        return super().on_classical(msg, ctx)

    def on_forward(self, reg, travel, ctx):
        self._reg = reg
        return super().on_forward(reg, travel, ctx)


def make_adversary(kind, options: Optional[dict] = None) -> AdversaryHooks:
    """Build a fresh strategy from its CLI name.

    ``options`` is the JSON-friendly form used in transcript headers:
    ``{"basis": "B0"}`` pins intercept-resend, ``{"evil_state": 2}`` picks
    the MITM pair.
    """
    kind = AttackKind(kind)
    options = dict(options or {})
    if kind is AttackKind.NONE:
        adversary = NoEve()
    elif kind is AttackKind.INTERCEPT_RESEND:
        basis = options.pop("basis", None)
        adversary = InterceptResend(MeasurementBasis[basis] if basis is not None else None)
    elif kind is AttackKind.WEAK_MITM:
        adversary = WeakMitm(options.pop("evil_state", 0))
    else:
        adversary = StrongMitm(options.pop("evil_state", 0))
    if options:
        raise InvalidArgument(f"unknown options for {kind.value}: {sorted(options)}")
    return adversary
