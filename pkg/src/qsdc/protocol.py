"""Alice/Bob state machines for the message/control-mode direct communication protocol.

One call to :func:`run_session` plays a whole session: Alice prepares a Bell
pair per symbol and sends the travel qubit out; Bob either encodes a random
Pauli operation and returns it (message mode) or measures it in a random
basis and announces the result publicly (control mode).  At the end Alice
publishes her list of final Bell states and Bob decodes.

Adversaries plug in through :class:`AdversaryHooks`.  Quantum traffic passes
through ``on_forward``/``on_return``; public-channel traffic through
``on_classical``, and the engine refuses any alteration unless the session
was explicitly configured for a channel-rewriting adversary.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Union

from .coding import CorrelationKind, RuleMode, decode_message, expected_correlation
from .errors import (
    AbortedAfterRetries,
    ChannelViolation,
    ConfigurationError,
    InvalidArgument,
)
from .quantum import (
    BASES,
    LazyRandomSource,
    MeasurementBasis,
    QuantumRegister,
    RandomSource,
    bell_measure,
    bell_state,
    derive_seed,
    measure_qubit,
    apply_pauli,
)


class Mode(Enum):
    MESSAGE = "Message"
    CONTROL = "Control"


class DetectionPolicy(Enum):
    ABORT = "abort"
    RESTART = "restart"


@dataclass(frozen=True)
class SessionConfig:
    n_messages: int
    lambda_c: float
    seed: int
    rule_mode: RuleMode = RuleMode.PHYSICAL
    detection_policy: DetectionPolicy = DetectionPolicy.ABORT
    # Round indices (wall-clock round_seq) forced into control mode; replaces the coin.
    forced_control_schedule: Optional[tuple[int, ...]] = None
    # Test override for Bob's control basis.
    forced_control_basis: Optional[MeasurementBasis] = None
    max_restarts: int = 8
    allow_channel_rewriting: bool = False

    def __post_init__(self):
        if int(self.n_messages) < 1:
            raise InvalidArgument(f"n_messages must be >= 1, got {self.n_messages}")
        if not 0.0 <= float(self.lambda_c) <= 1.0:
            raise InvalidArgument(f"lambda_c must lie in [0, 1], got {self.lambda_c}")
        if self.forced_control_schedule is None and self.lambda_c == 1.0:
            raise InvalidArgument("lambda_c = 1 never reaches a message round; use a forced schedule")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidArgument(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.max_restarts < 0:
            raise InvalidArgument("max_restarts must be non-negative")
        if self.forced_control_schedule is not None:
            object.__setattr__(
                self, "forced_control_schedule", tuple(sorted(set(self.forced_control_schedule)))
            )

    def to_dict(self) -> dict:
        return {
            "n_messages": self.n_messages,
            "lambda_c": self.lambda_c,
            "rule_mode": self.rule_mode.value,
            "detection_policy": self.detection_policy.value,
            "seed": self.seed,
            "forced_control_schedule": (
                list(self.forced_control_schedule)
                if self.forced_control_schedule is not None
                else None
            ),
            "forced_control_basis": (
                self.forced_control_basis.name if self.forced_control_basis is not None else None
            ),
            "max_restarts": self.max_restarts,
            "allow_channel_rewriting": self.allow_channel_rewriting,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SessionConfig":
        basis = d.get("forced_control_basis")
        schedule = d.get("forced_control_schedule")
        return cls(
            n_messages=int(d["n_messages"]),
            lambda_c=float(d["lambda_c"]),
            seed=int(d["seed"]),
            rule_mode=RuleMode(d.get("rule_mode", RuleMode.PHYSICAL.value)),
            detection_policy=DetectionPolicy(d.get("detection_policy", "abort")),
            forced_control_schedule=tuple(schedule) if schedule is not None else None,
            forced_control_basis=MeasurementBasis[basis] if basis is not None else None,
            max_restarts=int(d.get("max_restarts", 8)),
            allow_channel_rewriting=bool(d.get("allow_channel_rewriting", False)),
        )


# --------------------------------------------------------------------------
# public channel


@dataclass(frozen=True)
class ControlAnnounce:
    basis: MeasurementBasis
    outcome_j: int


@dataclass(frozen=True)
class FinalStates:
    f_list: tuple[int, ...]


@dataclass(frozen=True)
class AbortNotice:
    pass


ClassicalMessage = Union[ControlAnnounce, FinalStates, AbortNotice]


# --------------------------------------------------------------------------
# records


@dataclass
class ControlRecord:
    basis: MeasurementBasis
    j: int
    k: int
    verdict: str  # "pass" | "fail"

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


@dataclass
class RoundRecord:
    round_seq: int
    msg_index: int
    mode: Mode
    a_n: int
    b_n: Optional[int] = None
    f_n: Optional[int] = None
    control: Optional[ControlRecord] = None
    eve_events: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "round_seq": self.round_seq,
            "msg_index": self.msg_index,
            "mode": self.mode.value,
            "a_n": self.a_n,
            "b_n": self.b_n,
            "f_n": self.f_n,
            "control": (
                None
                if self.control is None
                else {
                    "basis": self.control.basis.name,
                    "j": self.control.j,
                    "k": self.control.k,
                    "verdict": self.control.verdict,
                }
            ),
            "eve_events": list(self.eve_events),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RoundRecord":
        expected = {"round_seq", "msg_index", "mode", "a_n", "b_n", "f_n", "control", "eve_events"}
        if set(d) != expected:
            raise InvalidArgument(f"round record fields {sorted(d)} do not match schema")
        c = d["control"]
        return cls(
            round_seq=int(d["round_seq"]),
            msg_index=int(d["msg_index"]),
            mode=Mode(d["mode"]),
            a_n=int(d["a_n"]),
            b_n=d["b_n"],
            f_n=d["f_n"],
            control=(
                None
                if c is None
                else ControlRecord(MeasurementBasis[c["basis"]], int(c["j"]), int(c["k"]), c["verdict"])
            ),
            eve_events=list(d["eve_events"]),
        )


@dataclass
class EveReport:
    """What an eavesdropper guessed, scored against the truth after the session.

    ``guessed_b`` entries are an exact Pauli index, a tuple naming the set the
    operation is known to lie in, or None; ``guessed_a`` entries are a Bell
    index or None.  Accuracies only count rounds with a guess and are None
    when there were no guesses at all.
    """

    guessed_b: list = field(default_factory=list)
    guessed_a: list = field(default_factory=list)
    b_pairclass_accuracy: Optional[float] = None
    a_recovery_accuracy: Optional[float] = None
    notes: list[str] = field(default_factory=list)
    b_guesses: int = 0
    b_correct: int = 0
    a_guesses: int = 0
    a_correct: int = 0

    def score(self, true_b: Sequence[int], true_a: Sequence[int]) -> "EveReport":
        self.b_guesses = self.b_correct = self.a_guesses = self.a_correct = 0
        for guess, b in zip(self.guessed_b, true_b):
            if guess is None:
                continue
            self.b_guesses += 1
            self.b_correct += (b in guess) if isinstance(guess, tuple) else (b == guess)
        for guess, a in zip(self.guessed_a, true_a):
            if guess is None:
                continue
            self.a_guesses += 1
            self.a_correct += a == guess
        self.b_pairclass_accuracy = self.b_correct / self.b_guesses if self.b_guesses else None
        self.a_recovery_accuracy = self.a_correct / self.a_guesses if self.a_guesses else None
        return self


@dataclass
class Counters:
    message_rounds: int = 0
    control_rounds: int = 0
    qubit_transmissions: int = 0
    classical_bits: int = 0


@dataclass
class SessionResult:
    transcript: list[RoundRecord]
    detected: bool
    detection_round: Optional[int]
    bob_decoded: list[int]
    eve_report: EveReport
    counters: Counters
    message: list[int]
    bob_operations: list[int]
    f_list: list[int]
    restarts: int = 0
    # Control rounds the first segment would have run had nobody been caught.
    scheduled_control_rounds: int = 0
    # 1-based position, among control rounds, of the first failed one.
    detection_control_index: Optional[int] = None


# --------------------------------------------------------------------------
# adversary contract


@dataclass
class RoundContext:
    round_seq: int
    msg_index: int
    events: list[str]


class AdversaryHooks:
    """Pass-through adversary; subclasses override the hooks they need.

    ``begin_session`` hands the strategy the session's Born-rule stream
    (``nature``) and its own private stream (``eve``).
    """

    name = "none"
    rewrites_classical = False

    def begin_session(self, nature: RandomSource, eve: RandomSource) -> None:
        self.nature = nature
        self.eve = eve

    def on_forward(self, reg: QuantumRegister, travel: int, ctx: RoundContext) -> int:
        return travel

    def on_return(self, reg: QuantumRegister, travel: int, ctx: RoundContext) -> int:
        return travel

    def on_classical(self, msg: ClassicalMessage, ctx: RoundContext) -> ClassicalMessage:
        return msg

    def on_session_end(self, f_list: Optional[Sequence[int]]) -> EveReport:
        return EveReport()


# --------------------------------------------------------------------------
# rounds


@dataclass
class ControlOutcome:
    basis: MeasurementBasis
    j: int
    k: int
    passed: bool


def _identity(msg, ctx=None):
    return msg


def control_round(
    a_n: int,
    reg: QuantumRegister,
    home: int,
    delivered: int,
    bob: RandomSource,
    nature: RandomSource,
    rule: RuleMode = RuleMode.PHYSICAL,
    publish=_identity,
    forced_basis: Optional[MeasurementBasis] = None,
) -> ControlOutcome:
    """Bob measures the delivered qubit and announces; Alice checks her home qubit.

    ``publish`` carries Bob's announcement over the public channel and returns
    what Alice receives.  The returned outcome reflects Alice's view.
    """
    basis = forced_basis if forced_basis is not None else BASES[bob.choice(2)]
    j = measure_qubit(reg, delivered, basis, nature)
    received = publish(ControlAnnounce(basis, j))
    k = measure_qubit(reg, home, received.basis, nature)
    seen = CorrelationKind.CORRELATED if received.outcome_j == k else CorrelationKind.ANTICORRELATED
    passed = seen is expected_correlation(a_n, received.basis, rule)
    return ControlOutcome(received.basis, received.outcome_j, k, passed)


def message_round(
    reg: QuantumRegister,
    home: int,
    delivered: int,
    b_n: int,
    nature: RandomSource,
    on_return=None,
) -> int:
    """Bob applies sigma_b and sends back; Alice Bell-measures. Returns f_n."""
    apply_pauli(reg, delivered, b_n)
    returned = on_return(reg, delivered) if on_return is not None else delivered
    return bell_measure(reg, home, returned, nature)


def draw_mode_plan(
    config: SessionConfig, coin: RandomSource, start_seq: int
) -> list[bool]:
    """Control/message flags for each round of a segment starting at ``start_seq``.

    Drawing the coin up front consumes the stream exactly as flipping it
    round by round would, and also tells the harness how many control rounds
    the segment was going to have.
    """
    plan = []
    messages = 0
    n = config.n_messages
    if config.forced_control_schedule is not None or config.lambda_c == 0.0:
        forced = set(config.forced_control_schedule or ())
        seq = start_seq
        while messages < n:
            is_control = seq in forced
            plan.append(is_control)
            messages += not is_control
            seq += 1
        return plan
    lam = config.lambda_c
    draw = coin.random
    while messages < n:
        is_control = draw() < lam
        plan.append(is_control)
        messages += not is_control
    return plan


@dataclass
class SessionStreams:
    """Independent per-session streams: Born-rule outcomes, Bob, Bob's mode coin, Eve."""

    nature: RandomSource
    bob: RandomSource
    coin: RandomSource
    eve: RandomSource

    @classmethod
    def from_seed(cls, seed: int) -> "SessionStreams":
        return cls(
            RandomSource(derive_seed(seed, "nature")),
            RandomSource(derive_seed(seed, "bob")),
            LazyRandomSource(derive_seed(seed, "coin")),
            LazyRandomSource(derive_seed(seed, "eve")),
        )


def check_message(message: Sequence[int], n: int) -> list[int]:
    message = list(message)
    if len(message) != n:
        raise InvalidArgument(f"message has {len(message)} symbols, config expects {n}")
    for s in message:
        if s not in (0, 1, 2, 3):
            raise InvalidArgument(f"message symbol {s!r} outside 0..3")
    return message


def run_session(
    config: SessionConfig,
    message: Sequence[int],
    adversary: Optional[AdversaryHooks] = None,
) -> SessionResult:
    message = check_message(message, config.n_messages)
    eve = adversary if adversary is not None else AdversaryHooks()
    if eve.rewrites_classical and not config.allow_channel_rewriting:
        raise ConfigurationError(
            f"adversary {eve.name!r} rewrites the public channel; "
            "construct the session with allow_channel_rewriting=True"
        )
    streams = SessionStreams.from_seed(config.seed)
    eve.begin_session(streams.nature, streams.eve)
    nature, bob = streams.nature, streams.bob
    rule = config.rule_mode
    forced_basis = config.forced_control_basis
    N = config.n_messages

    def publish(msg, ctx):
        received = eve.on_classical(msg, ctx)
        if received != msg and not eve.rewrites_classical:
            raise ChannelViolation(f"{eve.name!r} altered {msg!r} into {received!r}")
        return received

    transcript: list[RoundRecord] = []
    counters = Counters()
    seq = 0
    restarts = 0
    detected = False
    detection_round = None
    detection_control_index = None
    scheduled_controls = None

    while True:
        # p.0
        f_list: list[int] = []
        b_list: list[int] = []
        plan = draw_mode_plan(config, streams.coin, seq)
        if scheduled_controls is None:
            scheduled_controls = sum(plan)
        step = 0
        n = 0
        caught = False
        while n < N:
            n += 1
            a = message[n - 1]
            reg = QuantumRegister()
            home, travel = 0, 1
            reg.add(bell_state(a, home, travel))
            events: list[str] = []
            ctx = RoundContext(seq, n, events)
            delivered = eve.on_forward(reg, travel, ctx)
            counters.qubit_transmissions += 1
            if plan[step]:
                counters.control_rounds += 1
                out = control_round(
                    a, reg, home, delivered, bob, nature, rule,
                    publish=lambda m: publish(m, ctx),
                    forced_basis=forced_basis,
                )
                transcript.append(
                    RoundRecord(
                        seq, n, Mode.CONTROL, a,
                        control=ControlRecord(out.basis, out.j, out.k, "pass" if out.passed else "fail"),
                        eve_events=events,
                    )
                )
                if not out.passed:
                    if not detected:
                        detected = True
                        detection_round = seq
                        detection_control_index = counters.control_rounds
                    publish(AbortNotice(), ctx)
                    caught = True
                    seq += 1
                    break
                n -= 1
            else:
                b = bob.choice(4)
                counters.message_rounds += 1
                counters.qubit_transmissions += 1
                f = message_round(
                    reg, home, delivered, b, nature,
                    on_return=lambda r, q: eve.on_return(r, q, ctx),
                )
                b_list.append(b)
                f_list.append(f)
                transcript.append(RoundRecord(seq, n, Mode.MESSAGE, a, b_n=b, f_n=f, eve_events=events))
            seq += 1
            step += 1

        if not caught:
            end_ctx = RoundContext(seq, N, transcript[-1].eve_events if transcript else [])
            received = publish(FinalStates(tuple(f_list)), end_ctx)
            counters.classical_bits += 2 * len(received.f_list)
            bob_decoded = [decode_message(f, b) for f, b in zip(received.f_list, b_list)]
            report = eve.on_session_end(list(received.f_list)).score(b_list, message)
            return SessionResult(
                transcript, detected, detection_round, bob_decoded, report, counters,
                message, b_list, f_list, restarts, scheduled_controls, detection_control_index,
            )

        if config.detection_policy is DetectionPolicy.ABORT or restarts >= config.max_restarts:
            report = eve.on_session_end(None).score(b_list, message)
            result = SessionResult(
                transcript, True, detection_round, [], report, counters,
                message, b_list, f_list, restarts, scheduled_controls, detection_control_index,
            )
            if config.detection_policy is DetectionPolicy.RESTART:
                raise AbortedAfterRetries(
                    f"eavesdropper detected {restarts + 1} times; restart cap {config.max_restarts} reached",
                    result,
                )
            return result
        restarts += 1
