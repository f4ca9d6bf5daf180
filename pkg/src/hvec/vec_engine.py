"""Analytic term summation for the Hadamard-sandwich virtual correction scheme.

For a channel term ``p_{x,z} X^x Z^z`` the controlled-H layers leave, in the
ancilla off-diagonal block, ``(-1)^{x.z} X^z Z^x rho Z^z X^x``.  The syndrome
projection keeps only terms with ``x`` and ``z`` in the same coset ``k + L``
(``L`` the set of logical supports).  After the ``Y^k`` correction and the
``(-1)^{|k|}`` software phase, ``<X (x) O>`` is a finite sum over
``(k, u, v)`` with ``k`` a coset leader and ``u, v`` in ``L``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from math import prod
from typing import Optional

from .channels import PauliChannel
from .codes import CapacityError, ClassicalCode, DomainError
from .pauli import (
    BitVec,
    PauliOp,
    hadamard_conjugate,
    mul,
    sqrt_y_conjugate,
)

MAX_SUMMANDS = 1 << 20


class Basis(str, Enum):
    ZERO = "ZeroL"
    PLUS = "PlusL"


@dataclass(frozen=True)
class InputLogicalState:
    """``|0...0>`` or the uniform superposition over all codewords."""

    label: Basis
    code: ClassicalCode

    @classmethod
    def zero(cls, code: ClassicalCode) -> InputLogicalState:
        return cls(Basis.ZERO, code)

    @classmethod
    def plus(cls, code: ClassicalCode) -> InputLogicalState:
        return cls(Basis.PLUS, code)

    def expectation(self, p: PauliOp) -> complex:
        """Exact ``Tr(P rho)`` from stabilizer-group membership."""
        if p.n != self.code.n:
            raise DomainError(f"operator on {p.n} qubits, state on {self.code.n}")
        if self.label is Basis.ZERO:
            return p.scalar() if p.x.bits == 0 else 0.0
        if not self.code.is_logical(p.x):
            return 0.0
        if any(p.z.dot(c) for c in self.code.logicals):
            return 0.0
        return p.scalar()

    def statevector(self):
        import numpy as np

        n = self.code.n
        psi = np.zeros(1 << n, dtype=complex)
        words = [BitVec(n, 0)] if self.label is Basis.ZERO else self.code.logicals
        for w in words:
            psi[_index(w)] = 1.0
        return psi / np.linalg.norm(psi)


def _index(v: BitVec) -> int:
    """Basis-state index with qubit 0 as the most significant bit."""
    out = 0
    for q in range(v.n):
        out = (out << 1) | v[q]
    return out


def logical_x_support(code: ClassicalCode) -> BitVec:
    """Lowest-weight nonzero codeword (ties: lexicographic)."""
    nz = [v for v in code.logicals if v.bits]
    if not nz:
        raise DomainError("code has no nonzero logical")
    return min(nz, key=lambda v: (v.weight, str(v)))


def logical_x_op(code: ClassicalCode) -> PauliOp:
    return PauliOp.x_type(logical_x_support(code))


def logical_z_op(code: ClassicalCode) -> PauliOp:
    """Single-qubit Z on the first qubit of the chosen X logical."""
    q = logical_x_support(code).support()[0]
    return PauliOp.z_type(BitVec.from_support(code.n, [q]))


def default_observable(state: InputLogicalState) -> PauliOp:
    """The logical operator whose ideal expectation on ``state`` is +1."""
    if state.label is Basis.ZERO:
        return logical_z_op(state.code)
    return logical_x_op(state.code)


class Variant(str, Enum):
    H = "h"
    SQRT_Y = "sqrty"


def _check_sizes(code: ClassicalCode, ch: PauliChannel) -> None:
    if ch.n != code.n:
        raise DomainError(f"channel acts on {ch.n} qubits, code has {code.n}")
    count = len(code.leaders) * len(code.logicals) ** 2
    if count > MAX_SUMMANDS:
        raise CapacityError(f"{count} summands exceed the cap of {MAX_SUMMANDS}")


def kept_component_weight(code: ClassicalCode, ch: PauliChannel, k: BitVec, u: BitVec, v: BitVec) -> float:
    """``p_{u^k, v^k}``: the channel weight surviving projection onto syndrome ``k``."""
    if not code.is_logical(u) or not code.is_logical(v):
        raise DomainError(f"u={u} and v={v} must both be logical supports")
    return ch.prob(u ^ k, v ^ k)


def per_syndrome_terms(code: ClassicalCode, ch: PauliChannel, state: InputLogicalState,
                       obs: Optional[PauliOp] = None, variant: Variant = Variant.H,
                       software_phase: bool = True) -> dict[int, tuple[float, float]]:
    """Per-syndrome contributions ``(numerator_k, denominator_k)``.

    ``software_phase`` toggles the ``(-1)^{|k|}`` factor of the H variant and is
    exposed for fault-injection checks only.
    """
    _check_sizes(code, ch)
    variant = Variant(variant)
    n = code.n
    ident = PauliOp.identity(n)
    obs = ident if obs is None else obs
    conj = hadamard_conjugate if variant is Variant.H else sqrt_y_conjugate
    out = {}
    for s, k in code.leaders.items():
        yk = PauliOp.y_type(k)
        sign_k = -1 if (variant is Variant.H and software_phase and k.weight % 2) else 1
        num = den = 0.0
        for u in code.logicals:
            for v in code.logicals:
                x, z = u ^ k, v ^ k
                pr = ch.prob(x, z)
                if pr == 0.0:
                    continue
                err = PauliOp(x, z)
                left = mul(yk, conj(err))       # Y^k U^dag P U
                right = mul(err.dagger(), yk)   # P^dag Y^k
                # Tr(O L rho R) = Tr(R O L rho)
                m_den = mul(right, left)
                m_num = mul(right, mul(obs, left))
                den += sign_k * pr * complex(state.expectation(m_den)).real
                num += sign_k * pr * complex(state.expectation(m_num)).real
        out[s] = (num, den)
    return out


def virtual_expectation(code: ClassicalCode, ch: PauliChannel, state: InputLogicalState,
                        obs: Optional[PauliOp] = None, variant: Variant = Variant.H,
                        software_phase: bool = True) -> tuple[float, float]:
    """Exact ``(<X (x) O>, <X (x) I>)`` summed over all syndromes."""
    terms = per_syndrome_terms(code, ch, state, obs, variant, software_phase)
    num = sum(t[0] for t in terms.values())
    den = sum(t[1] for t in terms.values())
    return num, den


def virtual_logical_error(code: ClassicalCode, ch: PauliChannel, state: InputLogicalState,
                          obs: Optional[PauliOp] = None) -> float:
    """``|1 - <X O>/<X I>| / 2`` with the difference accumulated term by term.

    Summing ``den_term - num_term`` directly avoids the cancellation in
    ``1 - ratio`` when the logical error is far below machine epsilon.
    """
    obs = default_observable(state) if obs is None else obs
    _, den = virtual_expectation(code, ch, state, PauliOp.identity(code.n))
    gap = 0.0
    for k in code.leaders.values():
        yk = PauliOp.y_type(k)
        sign_k = -1 if k.weight % 2 else 1
        for u in code.logicals:
            for v in code.logicals:
                pr = ch.prob(u ^ k, v ^ k)
                if pr == 0.0:
                    continue
                err = PauliOp(u ^ k, v ^ k)
                left = mul(yk, hadamard_conjugate(err))
                right = mul(err.dagger(), yk)
                m_den = mul(right, left)
                m_num = mul(right, mul(obs, left))
                diff = complex(state.expectation(m_den)).real - complex(state.expectation(m_num)).real
                if diff:
                    gap += sign_k * pr * diff
    return abs(gap) / (2 * abs(den))


def compute_p_full(code: ClassicalCode, ch: PauliChannel, state: InputLogicalState) -> float:
    """Normalization ``<X (x) I>`` via the ``Y^{u^v}`` trace form."""
    _check_sizes(code, ch)
    total = 0.0
    for k in code.leaders.values():
        for u in code.logicals:
            for v in code.logicals:
                pr = ch.prob(u ^ k, v ^ k)
                if pr == 0.0:
                    continue
                w = u ^ v
                phase = 2 * (v.weight % 2) + w.weight
                tr = state.expectation(PauliOp.y_type(w).with_phase(PauliOp.y_type(w).phase_exp + phase))
                total += pr * complex(tr).real
    return total


def compute_p_cor(code: ClassicalCode, ch: PauliChannel) -> float:
    """Total weight of pure-Y correctable terms ``p_{k,k}``."""
    return sum(ch.prob(k, k) for k in code.leaders.values())


def compute_p_max(code: ClassicalCode, ch: PauliChannel) -> float:
    """``sum over v in L, all x, of p_{x, x^v}``."""
    if ch.n != code.n:
        raise DomainError(f"channel acts on {ch.n} qubits, code has {code.n}")
    if ch.is_factorized:
        f = ch.factors
        same = f[:, 0] + f[:, 2]   # I or Y: x == z
        diff = f[:, 1] + f[:, 3]   # X or Z: x != z
        total = 0.0
        for v in code.logicals:
            prod = 1.0
            for q in range(code.n):
                prod *= diff[q] if v[q] else same[q]
            total += prod
        return float(total)
    logical = {v.bits for v in code.logicals}
    return sum(pr for (x, z), pr in ch.items() if (x ^ z) in logical)


def compute_p_gap(code: ClassicalCode, ch: PauliChannel) -> float:
    """``P_max - P_cor`` summed from the excluded terms, avoiding cancellation."""
    if ch.n != code.n:
        raise DomainError(f"channel acts on {ch.n} qubits, code has {code.n}")
    leaders = {k.bits for k in code.leaders.values()}
    if not ch.is_factorized:
        logical = {v.bits for v in code.logicals}
        return sum(pr for (x, z), pr in ch.items()
                   if (x ^ z) in logical and not (x == z and x in leaders))
    if code.n > 20:
        return compute_p_max(code, ch) - compute_p_cor(code, ch)
    f = ch.factors
    diff = f[:, 1] + f[:, 3]
    same = f[:, 0] + f[:, 2]
    total = 0.0
    for v in code.logicals:
        if v.bits:
            total += prod(diff[q] if v[q] else same[q] for q in range(code.n))
    for x in range(1 << code.n):
        if x not in leaders:
            total += prod(f[q, 2] if (x >> q) & 1 else f[q, 0] for q in range(code.n))
    return float(total)


@dataclass(frozen=True)
class VecAnalysis:
    p_cor: float
    p_full: float
    p_max: float
    p_logical_bound: float
    overhead: float
    p_gap: float


@dataclass(frozen=True)
class LogicalBound:
    """Two normalizations of ``P_max - P_cor``."""

    over_p_max: float
    over_p_cor: float


def analyze(code: ClassicalCode, ch: PauliChannel, state: InputLogicalState) -> VecAnalysis:
    p_cor = compute_p_cor(code, ch)
    p_max = compute_p_max(code, ch)
    p_full = compute_p_full(code, ch, state)
    gap = compute_p_gap(code, ch)
    bound = gap / p_max if p_max > 0 else float("nan")
    overhead = p_cor ** -2 if p_cor > 0 else float("inf")
    return VecAnalysis(p_cor, p_full, p_max, bound, overhead, gap)


def logical_error_bound(analysis: VecAnalysis) -> LogicalBound:
    """Rough upper bound on the effective logical error rate.

    The true bias depends on the observable; both normalizations are reported.
    """
    if analysis.p_cor <= 0:
        raise DomainError("P_cor must be positive")
    gap = analysis.p_gap
    return LogicalBound(gap / analysis.p_max, gap / analysis.p_cor)


class TransformKind(str, Enum):
    TRANSVERSAL_H = "TransversalH"
    TRANSVERSAL_SQRT_Y = "TransversalSqrtY"
    SWAP = "Swap"


@dataclass(frozen=True)
class TransformCheck:
    holds: bool
    beta: Optional[int] = None  # power of i


def _swap_halves(p: PauliOp) -> PauliOp:
    h = p.n // 2
    lo = (1 << h) - 1

    def sw(b: BitVec) -> BitVec:
        return BitVec(p.n, ((b.bits & lo) << h) | (b.bits >> h))

    return PauliOp(sw(p.x), sw(p.z), p.phase_exp)


def check_transformation(kind: TransformKind | str, e: PauliOp, f: PauliOp) -> TransformCheck:
    """Test ``U^dag E_i F_j U = beta E_j F_i`` for Pauli families.

    For the transversal gates ``E_i = X^i`` and ``F_j = Z^j``.  For SWAP both
    families are the same Pauli set, with ``E`` on the first half of the
    register and ``F`` on the second.
    """
    kind = TransformKind(kind)
    if e.n != f.n:
        return TransformCheck(False)
    prod = mul(e, f)
    if kind is TransformKind.SWAP:
        if e.n % 2:
            return TransformCheck(False)
        h = e.n // 2
        lo = (1 << h) - 1
        hi = lo << h
        if (e.x.bits | e.z.bits) & hi or (f.x.bits | f.z.bits) & lo:
            return TransformCheck(False)
        lhs = _swap_halves(prod)
        # E_j F_i: F's Pauli moved to the first half, E's to the second
        target = mul(_swap_halves(f), _swap_halves(e))
    else:
        if e.z.bits or e.phase_exp or f.x.bits or f.phase_exp:
            return TransformCheck(False)
        conj = hadamard_conjugate if kind is TransformKind.TRANSVERSAL_H else sqrt_y_conjugate
        lhs = conj(prod)
        target = PauliOp(f.z, e.x)  # X^j Z^i
    if lhs.x != target.x or lhs.z != target.z:
        return TransformCheck(False)
    return TransformCheck(True, (lhs.phase_exp - target.phase_exp) % 4)
