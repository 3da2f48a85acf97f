"""Exact state-vector simulation for registers of one to four qubits.

Amplitudes are stored as plain lists of Python complex numbers.  At this size
list arithmetic beats numpy's per-call overhead by a wide margin, and the
Monte Carlo harness spends almost all of its time in here.  ``as_array`` gives
a numpy view for inspection and tests.

Bit order: the first qubit of a system's ``qubits`` list is the most
significant bit of the amplitude index.
"""

from __future__ import annotations

import cmath
import hashlib
import math
import random
from dataclasses import dataclass, field
from enum import IntEnum
from functools import lru_cache
from typing import NewType

import numpy as np

from .errors import ConsistencyError, InvalidArgument

QubitId = NewType("QubitId", int)

MAX_QUBITS = 4
NORM_TOL = 1e-12
CORRUPTION_TOL = 1e-9

SQRT1_2 = 1.0 / math.sqrt(2.0)


class MeasurementBasis(IntEnum):
    """B0 is the computational basis, B1 the (|0> +/- |1>)/sqrt(2) basis."""

    B0 = 0
    B1 = 1


PAULI_NAMES = ("I", "X", "Y", "Z")

PAULI_MATRICES = (
    np.array([[1, 0], [0, 1]], dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def check_pauli(b: int) -> int:
    if b not in (0, 1, 2, 3):
        raise InvalidArgument(f"Pauli index must be in 0..3, got {b!r}")
    return b


def check_bell(a: int) -> int:
    if a not in (0, 1, 2, 3):
        raise InvalidArgument(f"Bell index must be in 0..3, got {a!r}")
    return a


# --------------------------------------------------------------------------
# randomness


def derive_seed(master: int, *path: object) -> int:
    """Mix a master seed with a path of labels into a fresh 64-bit seed.

    BLAKE2b over the decimal/str rendering of ``(master, *path)``; stable
    across platforms, Python versions and process layouts.
    """
    text = "/".join([str(int(master))] + [str(p) for p in path])
    digest = hashlib.blake2b(text.encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


class _SeededOnce(random.Random):
    # random.Random(x) seeds in __new__ and again in __init__; keep the first.
    def __init__(self, x):
        pass


if _SeededOnce(2**63 + 5).random() != random.Random(2**63 + 5).random():
    _SeededOnce = random.Random  # noqa: F811


class RandomSource:
    """Seeded, deterministic random stream (Mersenne Twister underneath)."""

    __slots__ = ("seed", "_random")

    def __init__(self, seed: int):
        if not 0 <= int(seed) < 2**64:
            raise InvalidArgument(f"seed must be an unsigned 64-bit integer, got {seed!r}")
        self.seed = int(seed)
        self._random = _SeededOnce(self.seed)

    def random(self) -> float:
        return self._random.random()

    def bernoulli(self, p: float) -> bool:
        return self._random.random() < p

    def choice(self, k: int) -> int:
        """Uniform integer in ``range(k)``."""
        return int(self._random.random() * k)

    def child(self, *path: object) -> "RandomSource":
        return RandomSource(derive_seed(self.seed, *path))


class LazyRandomSource(RandomSource):
    """RandomSource that postpones seeding until the first draw."""

    __slots__ = ()

    def __init__(self, seed: int):
        if not 0 <= int(seed) < 2**64:
            raise InvalidArgument(f"seed must be an unsigned 64-bit integer, got {seed!r}")
        self.seed = int(seed)
        self._random = None

    def random(self) -> float:
        if self._random is None:
            self._random = _SeededOnce(self.seed)
        return self._random.random()

    def bernoulli(self, p: float) -> bool:
        return self.random() < p

    def choice(self, k: int) -> int:
        return int(self.random() * k)


# --------------------------------------------------------------------------
# states


@dataclass
class QuantumSystem:
    qubits: list[int]
    amps: list[complex]

    def __post_init__(self):
        n = len(self.qubits)
        if not 1 <= n <= MAX_QUBITS:
            raise InvalidArgument(f"a system holds 1..{MAX_QUBITS} qubits, got {n}")
        if len(set(self.qubits)) != n:
            raise InvalidArgument(f"duplicate qubit ids in {self.qubits}")
        if len(self.amps) != 1 << n:
            raise InvalidArgument(f"expected {1 << n} amplitudes, got {len(self.amps)}")
        self.amps = [complex(x) for x in self.amps]
        if not all(cmath.isfinite(x) for x in self.amps):
            raise ConsistencyError("non-finite amplitude")
        if abs(self.norm() - 1.0) > NORM_TOL:
            raise InvalidArgument(f"state is not normalized (norm^2 = {self.norm()!r})")

    @property
    def n(self) -> int:
        return len(self.qubits)

    def norm(self) -> float:
        return sum(x.real * x.real + x.imag * x.imag for x in self.amps)

    def position(self, q: int) -> int:
        return self.qubits.index(q)

    def as_array(self) -> np.ndarray:
        return np.array(self.amps, dtype=complex)

    def copy(self) -> "QuantumSystem":
        return _raw_system(list(self.qubits), list(self.amps))


def _raw_system(qubits: list[int], amps: list[complex]) -> QuantumSystem:
    # Skips validation; used on hot paths that preserve the invariants.
    s = object.__new__(QuantumSystem)
    s.qubits = qubits
    s.amps = amps
    return s


@lru_cache(maxsize=None)
def _pairs(n: int, pos: int) -> tuple[tuple[int, int], ...]:
    """Index pairs (bit=0, bit=1) for qubit ``pos`` of an ``n``-qubit system."""
    step = 1 << (n - 1 - pos)
    return tuple((x, x | step) for x in range(1 << n) if not x & step)


@lru_cache(maxsize=None)
def _quads(n: int, p1: int, p2: int) -> tuple[tuple[int, int, int, int], ...]:
    """Index quadruples (00, 01, 10, 11) over qubits ``p1``, ``p2``."""
    s1 = 1 << (n - 1 - p1)
    s2 = 1 << (n - 1 - p2)
    return tuple(
        (x, x | s2, x | s1, x | s1 | s2) for x in range(1 << n) if not x & (s1 | s2)
    )


_BELL_AMPS = (
    (SQRT1_2, 0.0, 0.0, SQRT1_2),
    (SQRT1_2, 0.0, 0.0, -SQRT1_2),
    (0.0, SQRT1_2, SQRT1_2, 0.0),
    (0.0, SQRT1_2, -SQRT1_2, 0.0),
)


def bell_vector(a: int) -> np.ndarray:
    """Amplitudes of the Bell state with index ``a`` over |00>,|01>,|10>,|11>."""
    return np.array(_BELL_AMPS[check_bell(a)], dtype=complex)


def bell_state(a: int, home: int, travel: int) -> QuantumSystem:
    check_bell(a)
    if home == travel:
        raise InvalidArgument("home and travel qubit must differ")
    return _raw_system([home, travel], [complex(x) for x in _BELL_AMPS[a]])


def prepare_eigenstate(basis: MeasurementBasis, bit: int, q: int) -> QuantumSystem:
    if bit not in (0, 1):
        raise InvalidArgument(f"bit must be 0 or 1, got {bit!r}")
    if MeasurementBasis(basis) is MeasurementBasis.B0:
        amps = [1 + 0j, 0j] if bit == 0 else [0j, 1 + 0j]
    else:
        amps = [complex(SQRT1_2), complex(SQRT1_2 if bit == 0 else -SQRT1_2)]
    return _raw_system([q], amps)


def states_equal_up_to_phase(u, v, tol: float = NORM_TOL) -> bool:
    """True iff |<u|v>| = 1 within ``tol`` for normalized ``u`` and ``v``."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if u.shape != v.shape:
        return False
    return abs(abs(np.vdot(u, v)) - 1.0) <= tol


# --------------------------------------------------------------------------
# register


@dataclass
class QuantumRegister:
    """A set of disjoint systems; qubits of different systems are in product."""

    _owner: dict[int, QuantumSystem] = field(default_factory=dict)
    _next_id: int = 0

    def allocate(self, count: int = 1) -> list[int]:
        ids = list(range(self._next_id, self._next_id + count))
        self._next_id += count
        return ids

    def add(self, system: QuantumSystem) -> QuantumSystem:
        for q in system.qubits:
            if q in self._owner:
                raise InvalidArgument(f"qubit {q} already lives in this register")
        for q in system.qubits:
            self._owner[q] = system
        self._next_id = max(self._next_id, max(system.qubits) + 1)
        return system

    def system_of(self, q: int) -> QuantumSystem:
        try:
            return self._owner[q]
        except KeyError:
            raise InvalidArgument(f"unknown qubit {q!r}") from None

    def __contains__(self, q: int) -> bool:
        return q in self._owner

    @property
    def systems(self) -> list[QuantumSystem]:
        seen: dict[int, QuantumSystem] = {}
        for s in self._owner.values():
            seen.setdefault(id(s), s)
        return list(seen.values())

    def merge(self, q1: int, q2: int) -> QuantumSystem:
        """Tensor the systems owning ``q1`` and ``q2`` (no-op if shared)."""
        s1 = self.system_of(q1)
        s2 = self.system_of(q2)
        if s1 is s2:
            return s1
        if s1.n + s2.n > MAX_QUBITS:
            raise InvalidArgument(f"merged system would exceed {MAX_QUBITS} qubits")
        merged = _raw_system(
            s1.qubits + s2.qubits, [x * y for x in s1.amps for y in s2.amps]
        )
        for q in merged.qubits:
            self._owner[q] = merged
        return merged

    def discard(self, q: int) -> None:
        """Drop the whole system owning ``q``."""
        s = self.system_of(q)
        for other in s.qubits:
            del self._owner[other]


# --------------------------------------------------------------------------
# operations


def apply_pauli(reg: QuantumRegister, q: int, b: int) -> None:
    check_pauli(b)
    s = reg.system_of(q)
    if b == 0:
        return
    a = s.amps
    for x0, x1 in _pairs(s.n, s.position(q)):
        u, v = a[x0], a[x1]
        if b == 1:
            a[x0], a[x1] = v, u
        elif b == 2:
            a[x0], a[x1] = -1j * v, 1j * u
        else:
            a[x1] = -v


def _check_norm(total: float) -> None:
    deficit = abs(total - 1.0)
    if deficit > CORRUPTION_TOL:
        raise ConsistencyError(f"norm deficit {deficit:.3e} before measurement")


BASES = (MeasurementBasis.B0, MeasurementBasis.B1)


def measure_qubit(
    reg: QuantumRegister, q: int, basis: MeasurementBasis, rng: RandomSource
) -> int:
    """Projective measurement of ``q`` in ``basis``; collapses the owning system."""
    s = reg.system_of(q)
    a = s.amps
    pairs = _pairs(s.n, s.position(q))
    if basis == MeasurementBasis.B0:
        p0 = p1 = 0.0
        for x0, x1 in pairs:
            u, v = a[x0], a[x1]
            p0 += u.real * u.real + u.imag * u.imag
            p1 += v.real * v.real + v.imag * v.imag
        _check_norm(p0 + p1)
        j = 0 if rng.random() < p0 else 1
        scale = 1.0 / math.sqrt(p0 if j == 0 else p1)
        for x0, x1 in pairs:
            if j == 0:
                a[x0] *= scale
                a[x1] = 0j
            else:
                a[x1] *= scale
                a[x0] = 0j
        return j
    plus = []
    minus = []
    p0 = p1 = 0.0
    for x0, x1 in pairs:
        u, v = a[x0], a[x1]
        c, d = (u + v) * SQRT1_2, (u - v) * SQRT1_2
        plus.append(c)
        minus.append(d)
        p0 += c.real * c.real + c.imag * c.imag
        p1 += d.real * d.real + d.imag * d.imag
    _check_norm(p0 + p1)
    if rng.random() < p0:
        j, coeffs, scale, sign = 0, plus, SQRT1_2 / math.sqrt(p0), 1.0
    else:
        j, coeffs, scale, sign = 1, minus, SQRT1_2 / math.sqrt(p1), -1.0
    for (x0, x1), c in zip(pairs, coeffs):
        c *= scale
        a[x0] = c
        a[x1] = sign * c
    return j


def bell_measure(reg: QuantumRegister, q1: int, q2: int, rng: RandomSource) -> int:
    """Measure ``q1``, ``q2`` in the Bell basis, ``q1`` playing the home role."""
    if q1 == q2:
        raise InvalidArgument("Bell measurement needs two distinct qubits")
    s = reg.merge(q1, q2)
    a = s.amps
    quads = _quads(s.n, s.position(q1), s.position(q2))
    overlaps = []
    for i00, i01, i10, i11 in quads:
        u00, u01, u10, u11 = a[i00], a[i01], a[i10], a[i11]
        overlaps.append(
            (
                (u00 + u11) * SQRT1_2,
                (u00 - u11) * SQRT1_2,
                (u01 + u10) * SQRT1_2,
                (u01 - u10) * SQRT1_2,
            )
        )
    probs = [0.0, 0.0, 0.0, 0.0]
    for ov in overlaps:
        for f in range(4):
            c = ov[f]
            probs[f] += c.real * c.real + c.imag * c.imag
    _check_norm(sum(probs))
    r = rng.random()
    f = 0
    acc = probs[0]
    while f < 3 and r >= acc:
        f += 1
        acc += probs[f]
    # Rounding can leave r above the total; fall back to the last live outcome.
    while probs[f] <= 0.0:
        f -= 1
    scale = 1.0 / math.sqrt(probs[f])
    bu = _BELL_AMPS[f]
    for (i00, i01, i10, i11), ov in zip(quads, overlaps):
        c = ov[f] * scale
        a[i00] = bu[0] * c
        a[i01] = bu[1] * c
        a[i10] = bu[2] * c
        a[i11] = bu[3] * c
    return f


def reduced_density(reg: QuantumRegister, q: int) -> np.ndarray:
    """2x2 density matrix of ``q`` with every other qubit of its system traced out."""
    s = reg.system_of(q)
    a = s.amps
    rho = np.zeros((2, 2), dtype=complex)
    for x0, x1 in _pairs(s.n, s.position(q)):
        u, v = a[x0], a[x1]
        rho[0, 0] += u * u.conjugate()
        rho[0, 1] += u * v.conjugate()
        rho[1, 0] += v * u.conjugate()
        rho[1, 1] += v * v.conjugate()
    return rho


def is_density_matrix(rho: np.ndarray, tol: float = NORM_TOL) -> bool:
    rho = np.asarray(rho)
    if rho.shape != (2, 2):
        return False
    if not np.allclose(rho, rho.conj().T, atol=tol, rtol=0):
        return False
    if abs(np.trace(rho) - 1.0) > tol:
        return False
    return bool(np.all(np.linalg.eigvalsh(rho) >= -tol))
