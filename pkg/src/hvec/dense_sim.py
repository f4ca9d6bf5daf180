"""Exact density-operator simulation of the virtual correction circuits.

Qubit 0 is the most significant bit of a basis-state index.  Every builder
places ancillas first and data qubits after them.  Stabilizer measurements
branch the computation; every branch is followed to the end, so estimates are
exact sums rather than sampled averages.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .channels import PauliChannel
from .codes import CapacityError, ClassicalCode, DomainError
from .pauli import (
    H_GATE,
    PAULI_MATRICES,
    S_GATE,
    SQRT_Y_GATE,
    BitVec,
    PauliOp,
    mul,
)
from .vec_engine import InputLogicalState, default_observable

log = logging.getLogger(__name__)

MAX_DENSE_QUBITS = 12
PRUNE_TOL = 1e-15


def _mask(v: BitVec, m: int, offset: int = 0) -> int:
    out = 0
    for q in v.support():
        out |= 1 << (m - 1 - (q + offset))
    return out


@dataclass
class DensityOperator:
    m: int
    data: np.ndarray

    @classmethod
    def from_statevector(cls, psi: np.ndarray) -> DensityOperator:
        m = int(np.log2(psi.size))
        if 1 << m != psi.size:
            raise DomainError("statevector length must be a power of two")
        if m > MAX_DENSE_QUBITS:
            raise CapacityError(f"{m} qubits exceed the dense cap of {MAX_DENSE_QUBITS}")
        return cls(m, np.outer(psi, psi.conj()))

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.data - self.data.conj().T))) if self.data.size else 0.0

    def expectation(self, p: PauliOp) -> complex:
        return pauli_trace(self.data, p)

    def dump(self) -> str:
        """Row-major text matrix of ``re,im`` pairs."""
        rows = []
        for row in self.data:
            rows.append(" ".join(f"{z.real:.12g},{z.imag:.12g}" for z in row))
        return "\n".join(rows)


def _indices(m: int) -> np.ndarray:
    return np.arange(1 << m, dtype=np.int64)


def _parity(a: np.ndarray) -> np.ndarray:
    return (np.bitwise_count(a) & 1).astype(np.int8)


def pauli_left(rho: np.ndarray, p: PauliOp) -> np.ndarray:
    """``P @ rho``."""
    m = p.n
    xm, zm = _mask(p.x, m), _mask(p.z, m)
    r = _indices(m)
    src = r ^ xm
    sign = 1 - 2 * _parity(src & zm)
    return (1j ** p.phase_exp) * sign[:, None] * rho[src, :]


def pauli_right(rho: np.ndarray, p: PauliOp) -> np.ndarray:
    """``rho @ P``."""
    m = p.n
    xm, zm = _mask(p.x, m), _mask(p.z, m)
    c = _indices(m)
    sign = 1 - 2 * _parity(c & zm)
    return (1j ** p.phase_exp) * sign[None, :] * rho[:, c ^ xm]


def conjugate_pauli(rho: np.ndarray, p: PauliOp) -> np.ndarray:
    """``P rho P^dag``; the global phase of ``P`` drops out."""
    m = p.n
    xm, zm = _mask(p.x, m), _mask(p.z, m)
    r = _indices(m)
    src = r ^ xm
    sign = (1 - 2 * _parity(src & zm)).astype(float)
    return sign[:, None] * rho[np.ix_(src, src)] * sign[None, :]


def pauli_trace(rho: np.ndarray, p: PauliOp) -> complex:
    """``Tr(P rho)``."""
    m = p.n
    xm, zm = _mask(p.x, m), _mask(p.z, m)
    r = _indices(m)
    src = r ^ xm
    sign = 1 - 2 * _parity(src & zm)
    return complex((1j ** p.phase_exp) * np.sum(sign * rho[src, r]))


def apply_unitary(rho: np.ndarray, u: np.ndarray, targets: Sequence[int]) -> np.ndarray:
    """``U rho U^dag`` with ``U`` acting on ``targets`` (first target = most significant)."""
    m = int(np.log2(rho.shape[0]))
    t = len(targets)
    ut = u.reshape([2] * (2 * t))
    r = rho.reshape([2] * (2 * m))
    r = np.tensordot(ut, r, axes=(list(range(t, 2 * t)), list(targets)))
    r = np.moveaxis(r, list(range(t)), list(targets))
    cols = [m + q for q in targets]
    r = np.tensordot(r, ut.conj(), axes=(cols, list(range(t, 2 * t))))
    r = np.moveaxis(r, list(range(2 * m - t, 2 * m)), cols)
    return r.reshape(1 << m, 1 << m)


def apply_channel(rho: np.ndarray, ch: PauliChannel, targets: Sequence[int]) -> np.ndarray:
    m = int(np.log2(rho.shape[0]))
    if ch.n != len(targets):
        raise DomainError(f"channel on {ch.n} qubits applied to {len(targets)} targets")
    if ch.is_factorized:
        out = rho
        for i, q in enumerate(targets):
            f = ch.factors[i]
            if f[0] == 1.0:
                continue
            acc = f[0] * out
            for li, letter in ((1, "X"), (2, "Y"), (3, "Z")):
                if f[li] > 0:
                    acc = acc + f[li] * conjugate_pauli(out, PauliOp.single(m, q, letter))
            out = acc
        return out
    acc = np.zeros_like(rho)
    for (x, z), pr in ch.items():
        op = PauliOp(BitVec(ch.n, x), BitVec(ch.n, z)).embed(m, list(targets))
        acc += pr * conjugate_pauli(rho, op)
    return acc


def project(rho: np.ndarray, stab: PauliOp, outcome: int) -> np.ndarray:
    """``Pi rho Pi`` with ``Pi = (I + (-1)^outcome S) / 2``."""
    s = -1.0 if outcome else 1.0
    half = 0.5 * (rho + s * pauli_left(rho, stab))
    return 0.5 * (half + s * pauli_right(half, stab))


def controlled(u: np.ndarray) -> np.ndarray:
    out = np.eye(4, dtype=complex)
    out[2:, 2:] = u
    return out


CNOT = controlled(PAULI_MATRICES["X"])


# --- circuit description -------------------------------------------------

@dataclass(frozen=True)
class Unitary:
    gate: np.ndarray
    targets: tuple[int, ...]


@dataclass(frozen=True)
class Channel:
    channel: PauliChannel
    targets: tuple[int, ...]


@dataclass(frozen=True)
class ApplyPauli:
    op: PauliOp


@dataclass(frozen=True)
class Measure:
    """Project onto every joint eigenspace of ``stabilizers``.

    With ``postselect`` only the listed outcome bits are kept.
    """

    key: str
    stabilizers: tuple[PauliOp, ...]
    postselect: Optional[tuple[int, ...]] = None


@dataclass(frozen=True)
class Correction:
    """``rule(outcomes) -> (Pauli to conjugate by or None, sign)``."""

    rule: Callable[[dict], tuple[Optional[PauliOp], float]]


Instruction = Union[Unitary, Channel, ApplyPauli, Measure, Correction]


@dataclass
class Circuit:
    m: int
    instructions: list = field(default_factory=list)

    def add(self, ins: Instruction) -> Circuit:
        self.instructions.append(ins)
        return self


@dataclass
class Leaf:
    outcomes: dict
    rho: np.ndarray
    sign: float


def execute(circuit: Circuit, rho0: np.ndarray) -> list[Leaf]:
    """Run every measurement branch to completion."""
    if circuit.m > MAX_DENSE_QUBITS:
        raise CapacityError(f"{circuit.m} qubits exceed the dense cap of {MAX_DENSE_QUBITS}")
    leaves: list[Leaf] = []
    instrs = circuit.instructions

    def run(i: int, rho: np.ndarray, outcomes: dict, sign: float) -> None:
        while i < len(instrs):
            ins = instrs[i]
            if isinstance(ins, Measure):
                patterns = [ins.postselect] if ins.postselect is not None else \
                    product((0, 1), repeat=len(ins.stabilizers))
                for bits in patterns:
                    r = rho
                    for stab, b in zip(ins.stabilizers, bits):
                        r = project(r, stab, b)
                    if np.trace(r).real < PRUNE_TOL:
                        continue
                    run(i + 1, r, {**outcomes, ins.key: tuple(bits)}, sign)
                return
            if isinstance(ins, Unitary):
                rho = apply_unitary(rho, ins.gate, ins.targets)
            elif isinstance(ins, Channel):
                rho = apply_channel(rho, ins.channel, ins.targets)
            elif isinstance(ins, ApplyPauli):
                rho = conjugate_pauli(rho, ins.op)
            elif isinstance(ins, Correction):
                op, s = ins.rule(outcomes)
                if op is not None:
                    rho = conjugate_pauli(rho, op)
                sign *= s
            else:
                raise TypeError(f"unknown instruction {ins!r}")
            i += 1
        leaves.append(Leaf(outcomes, rho, sign))

    run(0, rho0, {}, 1.0)
    return leaves


# --- virtual correction circuits -----------------------------------------

@dataclass(frozen=True)
class BranchRecord:
    probability: float
    signed_weight: float      # contribution to <X (x) I>
    signed_numerator: float   # contribution to <X (x) O>


@dataclass(frozen=True)
class VirtualEstimate:
    numerator: float
    denominator: float
    per_syndrome: dict

    @property
    def ratio(self) -> float:
        if abs(self.denominator) <= 1e-12:
            raise ZeroDivisionError("denominator vanishes")
        return self.numerator / self.denominator

    @property
    def overhead(self) -> float:
        return self.denominator ** -2


@dataclass(frozen=True)
class CircuitVariant:
    """``h`` | ``multi`` | ``sqrty`` | ``biased:<sigma>``."""

    kind: str = "h"
    sigma: str = "Y"

    @classmethod
    def parse(cls, text: str) -> CircuitVariant:
        t = text.strip()
        if t in ("h", "multi", "sqrty"):
            return cls(t)
        if t.startswith("biased:") and t[7:] in ("X", "Y", "Z"):
            return cls("biased", t[7:])
        raise DomainError(f"unknown variant {text!r}")


# code basis and the remaining basis for each noise bias
_BIAS_BASES = {"Y": ("Z", "X"), "Z": ("X", "Y"), "X": ("Z", "Y")}


def _find_frame(sigma: str) -> np.ndarray:
    """Clifford ``V`` with ``V Z V^dag = sigma'`` and ``V X V^dag = sigma''``."""
    sp, spp = _BIAS_BASES[sigma]
    target_z, target_x = PAULI_MATRICES[sp], PAULI_MATRICES[spp]
    words = [np.eye(2, dtype=complex)]
    for _ in range(7):
        for v in words:
            if np.allclose(v @ PAULI_MATRICES["Z"] @ v.conj().T, target_z) and \
                    np.allclose(v @ PAULI_MATRICES["X"] @ v.conj().T, target_x):
                return v
        words = [g @ w for w in words for g in (H_GATE, S_GATE)]
    raise RuntimeError(f"no frame found for sigma={sigma}")


def _frame_images(v: np.ndarray) -> dict[str, tuple[str, int]]:
    """Images ``V P V^dag = (+/-) P'`` for P in X, Z as (letter, phase exponent)."""
    out = {}
    for letter in ("X", "Z"):
        img = v @ PAULI_MATRICES[letter] @ v.conj().T
        for cand in "XYZ":
            for e in range(4):
                if np.allclose(img, (1j ** e) * PAULI_MATRICES[cand]):
                    out[letter] = (cand, e)
    return out


def conjugate_by_frame(p: PauliOp, images: dict[str, tuple[str, int]]) -> PauliOp:
    """``V^n P V^n dag`` for a single-qubit Clifford ``V`` given by its images."""
    out = PauliOp.identity(p.n).with_phase(p.phase_exp)
    for q in range(p.n):
        for letter, bit in (("X", p.x[q]), ("Z", p.z[q])):
            if bit:
                cand, e = images[letter]
                out = mul(out, PauliOp.single(p.n, q, cand).with_phase(
                    PauliOp.single(p.n, q, cand).phase_exp + e))
    return out


def _plus_state(k: int) -> np.ndarray:
    v = np.ones(1 << k, dtype=complex)
    return v / np.linalg.norm(v)


def _x_string(m: int, qubits: Sequence[int]) -> PauliOp:
    return PauliOp.x_type(BitVec.from_support(m, qubits))


def _estimate(leaves: list[Leaf], obs_terms: list[tuple[complex, PauliOp]], anc_x: PauliOp,
              key: Optional[str]) -> VirtualEstimate:
    num = den = 0.0
    per: dict = {}
    for lf in leaves:
        d = lf.sign * pauli_trace(lf.rho, anc_x).real
        nm = 0.0
        for coef, op in obs_terms:
            nm += (coef * pauli_trace(lf.rho, mul(anc_x, op))).real
        nm *= lf.sign
        num += nm
        den += d
        if key is not None:
            s = 0
            for j, b in enumerate(lf.outcomes.get(key, ())):
                s |= b << j
            prev = per.get(s, BranchRecord(0.0, 0.0, 0.0))
            per[s] = BranchRecord(prev.probability + float(np.trace(lf.rho).real),
                                  prev.signed_weight + d, prev.signed_numerator + nm)
        if log.isEnabledFor(logging.DEBUG):
            log.debug("branch %s sign %+g\n%s", lf.outcomes, lf.sign,
                      DensityOperator(int(np.log2(lf.rho.shape[0])), lf.rho).dump())
    return VirtualEstimate(num, den, per)


def _build_hvec(code: ClassicalCode, data_ch: PauliChannel, variant: CircuitVariant,
                software_phase: bool, rounds: int = 1, check_ch: Optional[PauliChannel] = None,
                check_paulis: Optional[Sequence[Optional[PauliOp]]] = None):
    n = code.n
    na = n if variant.kind == "multi" else 1
    m = na + n
    if m > MAX_DENSE_QUBITS:
        raise CapacityError(f"{variant.kind} circuit needs {m} qubits; dense cap is {MAX_DENSE_QUBITS}")
    data = list(range(na, m))
    frame = _find_frame(variant.sigma) if variant.kind == "biased" else np.eye(2, dtype=complex)
    images = _frame_images(frame)

    if variant.kind == "sqrty":
        first, second = SQRT_Y_GATE, SQRT_Y_GATE.conj().T
    else:
        first = second = frame @ H_GATE @ frame.conj().T
    c_first, c_second = controlled(first), controlled(second)

    def ctrl(q: int) -> int:
        return q if variant.kind == "multi" else 0

    circ = Circuit(m)
    for q in range(n):
        circ.add(Unitary(c_first, (ctrl(q), na + q)))
    circ.add(Channel(data_ch, tuple(data)))
    for q in range(n):
        circ.add(Unitary(c_second, (ctrl(q), na + q)))

    stabs = tuple(conjugate_by_frame(PauliOp.z_type(c), images).embed(m, data) for c in code.checks)
    for r in range(rounds):
        if check_ch is not None:
            circ.add(Channel(check_ch, tuple(data)))
        if check_paulis is not None and check_paulis[r] is not None:
            circ.add(ApplyPauli(check_paulis[r].embed(m, data)))
        circ.add(Measure(f"s{r}", stabs))

    phase = software_phase and variant.kind != "sqrty"
    last = f"s{rounds - 1}"

    def rule(outcomes: dict):
        s = 0
        for j, b in enumerate(outcomes[last]):
            s |= b << j
        k = code.leaders[s]
        op = conjugate_by_frame(PauliOp.y_type(k), images).embed(m, data) if k.bits else None
        sign = -1.0 if (phase and k.weight % 2) else 1.0
        return op, sign

    circ.add(Correction(rule))
    return circ, na, data, images, frame, last


def _initial_state(state: InputLogicalState, na: int, frame: np.ndarray) -> np.ndarray:
    psi = state.statevector()
    if not np.allclose(frame, np.eye(2)):
        v = np.array([[1.0 + 0j]])
        for _ in range(state.code.n):
            v = np.kron(v, frame)
        psi = v @ psi
    full = np.kron(_plus_state(na), psi)
    return np.outer(full, full.conj())


def run_hvec(code: ClassicalCode, ch: PauliChannel, state: InputLogicalState,
             obs: Optional[PauliOp] = None, variant: CircuitVariant | str = "h",
             software_phase: bool = True) -> VirtualEstimate:
    """Exact ``<X (x) O>`` and ``<X (x) I>`` of the sandwich circuit.

    ``obs`` is given in the Y-noise frame on the data qubits; for biased
    variants it is mapped into the device frame together with the state,
    checks and corrections.  ``software_phase=False`` drops the ``(-1)^{|k|}``
    factor and exists for fault injection.
    """
    if isinstance(variant, str):
        variant = CircuitVariant.parse(variant)
    obs = default_observable(state) if obs is None else obs
    circ, na, data, images, frame, last = _build_hvec(code, ch, variant, software_phase)
    rho0 = _initial_state(state, na, frame)
    leaves = execute(circ, rho0)
    m = circ.m
    anc_x = _x_string(m, range(na))
    obs_m = conjugate_by_frame(obs, images).embed(m, data)
    return _estimate(leaves, [(1.0, obs_m)], anc_x, last)


def run_hvec_repeated(code: ClassicalCode, data_ch: PauliChannel, check_ch: PauliChannel, rounds: int,
                      state: Optional[InputLogicalState] = None, obs: Optional[PauliOp] = None,
                      support_condition: bool = False) -> VirtualEstimate:
    """Several check rounds after one sandwich, with check noise before each round.

    Only the last round's syndrome drives the correction.  With
    ``support_condition`` the joint distribution of data errors and check
    errors is restricted to combinations that stay correctable: the data
    term ``(x, z)`` is kept only if ``x ^ A`` and ``z ^ A`` are coset leaders,
    where ``A`` is the accumulated X-part of the check errors.  The surviving
    joint distribution is renormalized.
    """
    if rounds < 1:
        raise DomainError("rounds must be at least 1")
    state = InputLogicalState.zero(code) if state is None else state
    obs = default_observable(state) if obs is None else obs
    variant = CircuitVariant("h")
    if not support_condition:
        circ, na, data, images, frame, last = _build_hvec(code, data_ch, variant, True, rounds, check_ch)
        leaves = execute(circ, _initial_state(state, na, frame))
        return _estimate(leaves, [(1.0, obs.embed(circ.m, data))], _x_string(circ.m, range(na)), last)

    leaders = {v.bits for v in code.leaders.values()}
    check_terms = list(check_ch.items())
    data_terms = list(data_ch.items())
    num = den = total = 0.0
    for combo in product(check_terms, repeat=rounds):
        weight = 1.0
        acc = 0
        for (a, _), pr in combo:
            weight *= pr
            acc ^= a
        kept = {(x, z): pr for (x, z), pr in data_terms if (x ^ acc) in leaders and (z ^ acc) in leaders}
        mass = sum(kept.values())
        if weight * mass == 0.0:
            continue
        local = PauliChannel(code.n, terms={t: v / mass for t, v in kept.items()})
        paulis = [PauliOp(BitVec(code.n, a), BitVec(code.n, b)) for (a, b), _ in combo]
        circ, na, data, images, frame, last = _build_hvec(code, local, variant, True, rounds, None, paulis)
        leaves = execute(circ, _initial_state(state, na, frame))
        est = _estimate(leaves, [(1.0, obs.embed(circ.m, data))], _x_string(circ.m, range(na)), None)
        w = weight * mass
        num += w * est.numerator
        den += w * est.denominator
        total += w
    return VirtualEstimate(num / total, den / total, {})


def equivalence_single_vs_multi_ancilla(code: ClassicalCode, ch: PauliChannel, state: InputLogicalState,
                                        obs: Optional[PauliOp] = None) -> tuple[float, float]:
    """Absolute numerator and denominator differences between the two layouts."""
    a = run_hvec(code, ch, state, obs, "h")
    b = run_hvec(code, ch, state, obs, "multi")
    return abs(a.numerator - b.numerator), abs(a.denominator - b.denominator)


# --- purification circuits ---------------------------------------------

EPP_VARIANTS = ("Conventional1", "Conventional2", "Hvec", "SqrtY", "SymmetrizedH")

# 1/4 (II + XX - YY + ZZ) on a pair
O_BELL = ((0.25, "II"), (0.25, "XX"), (-0.25, "YY"), (0.25, "ZZ"))


def _bell_pair() -> np.ndarray:
    v = np.zeros(4, dtype=complex)
    v[0] = v[3] = 1 / np.sqrt(2)
    return np.outer(v, v.conj())


def werner_pair(p: float) -> np.ndarray:
    """Bell pair with single-qubit depolarizing noise on its second qubit."""
    from .channels import WernerParam, depolarizing_product

    WernerParam(p)
    return apply_channel(_bell_pair(), depolarizing_product(1, p), [1])


def _pairs_state(pairs: Sequence[np.ndarray]) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for r in pairs:
        out = np.kron(out, r)
    return out


def _pair_op(m: int, a: int, b: int, letters: str) -> PauliOp:
    s = ["I"] * m
    s[a], s[b] = letters[0], letters[1]
    return PauliOp.parse("".join(s))


def _bell_terms(m: int, a: int, b: int) -> list[tuple[float, PauliOp]]:
    return [(c, _pair_op(m, a, b, ls)) for c, ls in O_BELL]


def _zz_check(circ: Circuit, key: str, main: tuple[int, int], check: tuple[int, int]) -> None:
    circ.add(Unitary(CNOT, (main[0], check[0])))
    circ.add(Unitary(CNOT, (main[1], check[1])))
    circ.add(Measure(key, (_pair_op(circ.m, check[0], check[1], "ZZ"),), postselect=(0,)))


def run_epp(variant: str, p: float, check_noisy: bool = True) -> float:
    """Purified Bell-pair fidelity ``Tr(|Psi><Psi| rho) / Tr(rho)``.

    Virtual layouts use qubits ``[A2, B2, A1, B1, A3, B3]``: the pair driving
    the controlled gates, the pair being purified and the check pair.
    Conventional layouts list pairs in order, pair 1 being purified.
    """
    if variant not in EPP_VARIANTS:
        raise DomainError(f"unknown purification variant {variant!r}")
    noisy = werner_pair(p)
    ideal = _bell_pair()
    check = noisy if check_noisy else ideal

    if variant.startswith("Conventional"):
        if variant == "Conventional1":
            rho = _pairs_state([noisy, check])
            circ = Circuit(4)
            _zz_check(circ, "c", (0, 1), (2, 3))
        else:
            rho = _pairs_state([noisy, check, check, check])
            circ = Circuit(8)
            _zz_check(circ, "c1", (0, 1), (2, 3))
            _zz_check(circ, "c2", (4, 5), (6, 7))
            for q in (0, 1, 4, 5):
                circ.add(Unitary(H_GATE, (q,)))
            _zz_check(circ, "c3", (0, 1), (4, 5))
        leaves = execute(circ, rho)
        tr = sum(np.trace(lf.rho).real for lf in leaves)
        fid = sum(c * pauli_trace(lf.rho, op).real for lf in leaves for c, op in _bell_terms(circ.m, 0, 1))
        return fid / tr

    rho = _pairs_state([noisy, noisy, check])
    circ = Circuit(6)
    a2, b2, a1, b1, a3, b3 = range(6)
    if variant == "SqrtY":
        # the first controlled layer acts on an ideal pair as a phase i on |11>
        circ.add(Unitary(S_GATE, (a2,)))
        second = controlled(SQRT_Y_GATE.conj().T)
    else:
        second = controlled(H_GATE)
    circ.add(Unitary(second, (a2, a1)))
    circ.add(Unitary(second, (b2, b1)))
    _zz_check(circ, "c", (a1, b1), (a3, b3))
    if variant == "SymmetrizedH":
        circ.add(Unitary(controlled(H_GATE), (a2, a1)))
        circ.add(Unitary(controlled(H_GATE), (b2, b1)))
    leaves = execute(circ, rho)
    anc = _pair_op(6, a2, b2, "XX")
    den = sum(pauli_trace(lf.rho, anc).real for lf in leaves)
    num = sum(c * pauli_trace(lf.rho, mul(anc, op)).real for lf in leaves for c, op in _bell_terms(6, a1, b1))
    if abs(den) <= 1e-12:
        # fully mixed control pair at p = 0.75: numerator and denominator both vanish
        return float("nan")
    return num / den
