"""Binary-symplectic Pauli operators with exact phase tracking.

A Pauli operator on ``n`` qubits is stored as ``i**phase_exp * X^x Z^z`` where
``x`` and ``z`` are bit vectors and the X factor is written to the left.  With
this convention ``Y = i X Z``, so ``Y^k = i^{|k|} X^k Z^k``.

Bit ``i`` of a :class:`BitVec` refers to qubit ``i``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

MAX_QUBITS = 64


class DimensionError(ValueError):
    """Raised when operands act on different numbers of qubits."""


@dataclass(frozen=True, order=False)
class BitVec:
    """Fixed-length vector over GF(2), packed into a Python int."""

    n: int
    bits: int = 0

    def __post_init__(self):
        if not 0 <= self.n <= MAX_QUBITS:
            raise DimensionError(f"BitVec length must be in [0, {MAX_QUBITS}], got {self.n}")
        if self.bits < 0 or self.bits >> self.n:
            raise ValueError(f"bits {self.bits:#x} do not fit in length {self.n}")

    @classmethod
    def zeros(cls, n: int) -> BitVec:
        return cls(n, 0)

    @classmethod
    def ones(cls, n: int) -> BitVec:
        return cls(n, (1 << n) - 1)

    @classmethod
    def from_list(cls, seq: Sequence[int]) -> BitVec:
        bits = 0
        for i, b in enumerate(seq):
            if b not in (0, 1, True, False):
                raise ValueError(f"entry {i} is not a bit: {b!r}")
            if b:
                bits |= 1 << i
        return cls(len(seq), bits)

    @classmethod
    def from_str(cls, s: str) -> BitVec:
        """Parse a 0/1 string; character ``i`` is qubit ``i``."""
        s = s.strip()
        if set(s) - {"0", "1"}:
            raise ValueError(f"not a bit string: {s!r}")
        return cls.from_list([int(c) for c in s])

    @classmethod
    def from_support(cls, n: int, support: Iterable[int]) -> BitVec:
        bits = 0
        for i in support:
            if not 0 <= i < n:
                raise DimensionError(f"index {i} out of range for length {n}")
            bits |= 1 << i
        return cls(n, bits)

    def _check(self, other: BitVec) -> None:
        if self.n != other.n:
            raise DimensionError(f"length mismatch: {self.n} vs {other.n}")

    def __xor__(self, other: BitVec) -> BitVec:
        self._check(other)
        return BitVec(self.n, self.bits ^ other.bits)

    def __and__(self, other: BitVec) -> BitVec:
        self._check(other)
        return BitVec(self.n, self.bits & other.bits)

    def __or__(self, other: BitVec) -> BitVec:
        self._check(other)
        return BitVec(self.n, self.bits | other.bits)

    def __invert__(self) -> BitVec:
        return BitVec(self.n, ~self.bits & ((1 << self.n) - 1))

    def dot(self, other: BitVec) -> int:
        """Inner product mod 2."""
        self._check(other)
        return (self.bits & other.bits).bit_count() & 1

    @property
    def weight(self) -> int:
        return self.bits.bit_count()

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> int:
        if not -self.n <= i < self.n:
            raise IndexError(i)
        return (self.bits >> (i % self.n)) & 1

    def __iter__(self):
        return iter(self.to_list())

    def to_list(self) -> list[int]:
        return [(self.bits >> i) & 1 for i in range(self.n)]

    def support(self) -> list[int]:
        return [i for i in range(self.n) if (self.bits >> i) & 1]

    def __str__(self) -> str:
        return "".join(str(b) for b in self.to_list())

    def __repr__(self) -> str:
        return f"BitVec('{self}')"

    def lex_key(self) -> str:
        """Sort key matching lexicographic order of the written bit string."""
        return str(self)


def _phase_token(e: int) -> str:
    return ("+", "+i", "-", "-i")[e % 4]


_PAULI_RE = re.compile(r"^\s*([+-]?)(1|i)?([IXYZ]*)\s*$")


@dataclass(frozen=True)
class PauliOp:
    """``i**phase_exp * X^x Z^z``."""

    x: BitVec
    z: BitVec
    phase_exp: int = 0

    def __post_init__(self):
        if self.x.n != self.z.n:
            raise DimensionError(f"x/z length mismatch: {self.x.n} vs {self.z.n}")
        object.__setattr__(self, "phase_exp", self.phase_exp % 4)

    @property
    def n(self) -> int:
        return self.x.n

    @classmethod
    def identity(cls, n: int) -> PauliOp:
        return cls(BitVec.zeros(n), BitVec.zeros(n))

    @classmethod
    def from_bits(cls, x: BitVec, z: BitVec, phase_exp: int = 0) -> PauliOp:
        return cls(x, z, phase_exp)

    @classmethod
    def x_type(cls, v: BitVec) -> PauliOp:
        return cls(v, BitVec.zeros(v.n))

    @classmethod
    def z_type(cls, v: BitVec) -> PauliOp:
        return cls(BitVec.zeros(v.n), v)

    @classmethod
    def y_type(cls, v: BitVec) -> PauliOp:
        """``Y^v = i^{|v|} X^v Z^v``."""
        return cls(v, v, v.weight)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> PauliOp:
        s = ["I"] * n
        s[qubit] = letter
        return cls.parse("".join(s))

    @classmethod
    def parse(cls, text: str) -> PauliOp:
        """Parse strings like ``"XIZ"``, ``"-iXYZ"`` or ``"+1ZZ"``."""
        m = _PAULI_RE.match(text)
        if m is None:
            raise ValueError(f"cannot parse Pauli string {text!r}")
        sign, unit, letters = m.groups()
        e = (2 if sign == "-" else 0) + (1 if unit == "i" else 0)
        n = len(letters)
        x = z = 0
        for q, c in enumerate(letters):
            if c in "XY":
                x |= 1 << q
            if c in "ZY":
                z |= 1 << q
            if c == "Y":
                e += 1
        return cls(BitVec(n, x), BitVec(n, z), e)

    def letters(self) -> str:
        out = []
        for q in range(self.n):
            out.append("IXZY"[self.x[q] + 2 * self.z[q]])
        return "".join(out)

    def __str__(self) -> str:
        # each Y letter absorbs one factor of i
        e = self.phase_exp - (self.x & self.z).weight
        return _phase_token(e) + self.letters()

    def __repr__(self) -> str:
        return f"PauliOp('{self}')"

    @property
    def weight(self) -> int:
        return (self.x | self.z).weight

    @property
    def is_hermitian(self) -> bool:
        # (i^e X^x Z^z)^dag = i^{-e} (-1)^{x.z} X^x Z^z, so need i^{2e} = (-1)^{x.z}
        return (self.phase_exp - self.x.dot(self.z)) % 2 == 0

    def __mul__(self, other: PauliOp) -> PauliOp:
        return mul(self, other)

    def commutes_with(self, other: PauliOp) -> bool:
        return (self.x.dot(other.z) ^ self.z.dot(other.x)) == 0

    def dagger(self) -> PauliOp:
        # (i^e X^x Z^z)^dag = i^{-e} (-1)^{x.z} X^x Z^z
        return PauliOp(self.x, self.z, -self.phase_exp + 2 * self.x.dot(self.z))

    def with_phase(self, phase_exp: int) -> PauliOp:
        return PauliOp(self.x, self.z, phase_exp)

    def strip_phase(self) -> PauliOp:
        return PauliOp(self.x, self.z, 0)

    def scalar(self) -> complex:
        return 1j ** self.phase_exp

    def to_matrix(self) -> np.ndarray:
        """Dense matrix; qubit 0 is the leftmost tensor factor."""
        X = np.array([[0, 1], [1, 0]], dtype=complex)
        Z = np.array([[1, 0], [0, -1]], dtype=complex)
        out = np.array([[1.0 + 0j]])
        for q in range(self.n):
            f = np.eye(2, dtype=complex)
            if self.x[q]:
                f = f @ X
            if self.z[q]:
                f = f @ Z
            out = np.kron(out, f)
        return self.scalar() * out

    def embed(self, m: int, qubits: Sequence[int]) -> PauliOp:
        """Place this operator on ``qubits`` of an ``m``-qubit register."""
        if len(qubits) != self.n:
            raise DimensionError(f"need {self.n} target qubits, got {len(qubits)}")
        x = BitVec.from_support(m, [qubits[i] for i in self.x.support()])
        z = BitVec.from_support(m, [qubits[i] for i in self.z.support()])
        return PauliOp(x, z, self.phase_exp)


def mul(p: PauliOp, q: PauliOp) -> PauliOp:
    """Exact product ``p @ q``.

    ``X^a Z^b X^c Z^d = (-1)^{b.c} X^{a+c} Z^{b+d}``.
    """
    if p.n != q.n:
        raise DimensionError(f"length mismatch: {p.n} vs {q.n}")
    e = p.phase_exp + q.phase_exp + 2 * p.z.dot(q.x)
    return PauliOp(p.x ^ q.x, p.z ^ q.z, e)


def hadamard_conjugate(p: PauliOp) -> PauliOp:
    """``H^n P H^n``; maps ``X^x Z^z`` to ``(-1)^{x.z} X^z Z^x``."""
    return PauliOp(p.z, p.x, p.phase_exp + 2 * p.x.dot(p.z))


def sqrt_y_conjugate(p: PauliOp) -> PauliOp:
    """``(sqrtY^dag)^n P sqrtY^n``; maps ``X^x Z^z`` to ``(-1)^{|z| + x.z} X^z Z^x``."""
    return PauliOp(p.z, p.x, p.phase_exp + 2 * (p.z.weight + p.x.dot(p.z)))


def transversal_error_map(a: BitVec, x: BitVec, z: BitVec) -> tuple[BitVec, BitVec, int]:
    """Error labels after conjugating ``X^x Z^z`` by Hadamards on the support of ``a``.

    Returns ``(u, v, alpha)`` with ``H^a X^x Z^z H^a = (-1)^alpha X^u Z^v``.
    """
    if not a.n == x.n == z.n:
        raise DimensionError(f"length mismatch: {a.n}, {x.n}, {z.n}")
    na = ~a
    u = (na & x) ^ (a & z)
    v = (na & z) ^ (a & x)
    alpha = a.dot(u & v)
    return u, v, alpha


# single-qubit gates used by the dense simulator
H_GATE = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S_GATE = np.array([[1, 0], [0, 1j]], dtype=complex)
# exp(i pi/4) * Ry(pi/2); squares to Y and sqrtY^dag X sqrtY = Z
SQRT_Y_GATE = 0.5 * (1 + 1j) * np.array([[1, -1], [1, 1]], dtype=complex)

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
