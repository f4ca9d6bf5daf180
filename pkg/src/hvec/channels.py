"""Pauli error channels ``rho -> sum p_{x,z} X^x Z^z rho (X^x Z^z)^dag``.

Single-qubit distributions are ordered ``(I, X, Y, Z)``.  A term is labelled by
the pair of packed ints ``(x, z)``; Y on qubit i sets both bit i of x and of z.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterator, Mapping, Optional

import numpy as np

from .codes import CapacityError, ClassicalCode, DomainError
from .pauli import BitVec

NORM_TOL = 1e-12
MAX_EXPLICIT_QUBITS = 13

LETTERS = "IXYZ"
# (x bit, z bit) for each letter index
LETTER_BITS = ((0, 0), (1, 0), (1, 1), (0, 1))


def _letter_index(xb: int, zb: int) -> int:
    return (0, 1, 3, 2)[xb + 2 * zb]


@dataclass(frozen=True)
class WernerParam:
    """Depolarizing strength of one branch of a noisy Bell pair."""

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 0.75:
            raise DomainError(f"Werner parameter must lie in [0, 0.75], got {self.p}")


class PauliChannel:
    """Pauli channel stored per qubit when possible, else as an explicit map."""

    def __init__(self, n: int, factors: Optional[np.ndarray] = None,
                 terms: Optional[Mapping[tuple[int, int], float]] = None):
        if (factors is None) == (terms is None):
            raise ValueError("give exactly one of factors or terms")
        self.n = n
        self._factors = None
        self._terms = None
        if factors is not None:
            f = np.array(factors, dtype=float).reshape(n, 4)
            if np.any(f < -NORM_TOL):
                raise DomainError("negative probability in factorized channel")
            f = np.clip(f, 0.0, None)
            sums = f.sum(axis=1)
            if np.any(np.abs(sums - 1.0) > NORM_TOL):
                raise DomainError(f"per-qubit distributions must sum to 1, got {sums}")
            f.setflags(write=False)
            self._factors = f
        else:
            clean = {}
            for (x, z), pr in terms.items():
                if pr < -NORM_TOL:
                    raise DomainError(f"negative probability {pr} for term {(x, z)}")
                if x >> n or z >> n:
                    raise DomainError(f"term {(x, z)} does not fit in {n} qubits")
                if pr > 0:
                    clean[(x, z)] = clean.get((x, z), 0.0) + float(pr)
            tot = sum(clean.values())
            if abs(tot - 1.0) > NORM_TOL:
                raise DomainError(f"channel probabilities sum to {tot}, not 1")
            self._terms = clean

    @property
    def is_factorized(self) -> bool:
        return self._factors is not None

    @property
    def factors(self) -> np.ndarray:
        if self._factors is None:
            raise TypeError("channel is not factorized")
        return self._factors

    def prob(self, x: int | BitVec, z: int | BitVec) -> float:
        xi = x.bits if isinstance(x, BitVec) else x
        zi = z.bits if isinstance(z, BitVec) else z
        if self._terms is not None:
            return self._terms.get((xi, zi), 0.0)
        out = 1.0
        for q in range(self.n):
            out *= self._factors[q, _letter_index((xi >> q) & 1, (zi >> q) & 1)]
            if out == 0.0:
                break
        return out

    def items(self) -> Iterator[tuple[tuple[int, int], float]]:
        """All nonzero terms.  Factorized channels are materialized lazily."""
        if self._terms is not None:
            yield from self._terms.items()
            return
        if self.n > MAX_EXPLICIT_QUBITS:
            raise CapacityError(f"explicit enumeration capped at {MAX_EXPLICIT_QUBITS} qubits")
        per_qubit = [[(li, self._factors[q, li]) for li in range(4) if self._factors[q, li] > 0]
                     for q in range(self.n)]
        for combo in product(*per_qubit):
            x = z = 0
            pr = 1.0
            for q, (li, pq) in enumerate(combo):
                xb, zb = LETTER_BITS[li]
                x |= xb << q
                z |= zb << q
                pr *= pq
            yield (x, z), pr

    def to_explicit(self) -> PauliChannel:
        return PauliChannel(self.n, terms=dict(self.items()))

    def total(self) -> float:
        if self._factors is not None:
            return float(np.prod(self._factors.sum(axis=1)))
        return sum(self._terms.values())

    def __repr__(self) -> str:
        kind = "factorized" if self.is_factorized else f"explicit[{len(self._terms)}]"
        return f"PauliChannel(n={self.n}, {kind})"


def pauli_product(dists) -> PauliChannel:
    """Product channel from per-qubit ``(pI, pX, pY, pZ)`` rows."""
    f = np.atleast_2d(np.asarray(dists, dtype=float))
    return PauliChannel(f.shape[0], factors=f)


def depolarizing_product(n: int, p: float) -> PauliChannel:
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"depolarizing probability must lie in [0, 1], got {p}")
    return pauli_product([[1 - p, p / 3, p / 3, p / 3]] * n)


def biased_check_channel(n: int, p_y: float) -> PauliChannel:
    """Per-qubit ``(1 - p_y) I + p_y Y`` noise."""
    if not 0.0 <= p_y <= 1.0:
        raise DomainError(f"p_y must lie in [0, 1], got {p_y}")
    return pauli_product([[1 - p_y, 0.0, p_y, 0.0]] * n)


def identity_channel(n: int) -> PauliChannel:
    return depolarizing_product(n, 0.0)


def relabel(ch: PauliChannel, mapping: Mapping[str, str]) -> PauliChannel:
    """Rename Pauli letters on every qubit, e.g. ``{"Y": "Z", "Z": "Y"}``."""
    perm = {c: mapping.get(c, c) for c in "IXYZ"}
    if sorted(perm.values()) != sorted("IXYZ") or perm["I"] != "I":
        raise DomainError(f"relabel must permute X, Y, Z: {mapping}")
    if ch.is_factorized:
        f = np.zeros((ch.n, 4))
        for li, c in enumerate(LETTERS):
            f[:, LETTERS.index(perm[c])] = ch.factors[:, li]
        return PauliChannel(ch.n, factors=f)
    terms = {}
    for (x, z), pr in ch.items():
        nx = nz = 0
        for q in range(ch.n):
            c = perm[LETTERS[_letter_index((x >> q) & 1, (z >> q) & 1)]]
            xb, zb = LETTER_BITS[LETTERS.index(c)]
            nx |= xb << q
            nz |= zb << q
        terms[(nx, nz)] = pr
    return PauliChannel(ch.n, terms=terms)


def prob_pure_sigma(ch: PauliChannel, sigma: str) -> float:
    """Total weight of terms whose every non-identity site is ``sigma``."""
    if sigma not in ("X", "Y", "Z"):
        raise DomainError(f"sigma must be X, Y or Z, got {sigma!r}")
    li = LETTERS.index(sigma)
    if ch.is_factorized:
        return float(np.prod(ch.factors[:, 0] + ch.factors[:, li]))
    xb, zb = LETTER_BITS[li]
    tot = 0.0
    for (x, z), pr in ch.items():
        support = x | z
        if x == (support if xb else 0) and z == (support if zb else 0):
            tot += pr
    return tot


def sampling_overhead(P: float) -> float:
    """Shot overhead ``P**-2`` of a ratio estimator with denominator ``P``."""
    if not P > 0:
        raise DomainError(f"overhead needs a positive denominator, got {P}")
    return P ** -2


def sample_batch(ch: PauliChannel, rng: np.random.Generator, shots: int) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``shots`` errors; returns boolean arrays ``x, z`` of shape (shots, n)."""
    if ch.is_factorized:
        cdf = np.cumsum(ch.factors, axis=1)
        cdf[:, -1] = 1.0
        u = rng.random((shots, ch.n))
        letters = (u[:, :, None] >= cdf[None, :, :-1]).sum(axis=2)
        x = (letters == 1) | (letters == 2)
        z = (letters == 2) | (letters == 3)
        return x, z
    keys = list(ch.items())
    probs = np.array([pr for _, pr in keys])
    idx = rng.choice(len(keys), size=shots, p=probs / probs.sum())
    xs = np.array([k[0] for k, _ in keys], dtype=np.uint64)[idx]
    zs = np.array([k[1] for k, _ in keys], dtype=np.uint64)[idx]
    bit = np.uint64(1) << np.arange(ch.n, dtype=np.uint64)
    return (xs[:, None] & bit) != 0, (zs[:, None] & bit) != 0


def sample(ch: PauliChannel, rng: np.random.Generator) -> tuple[BitVec, BitVec]:
    x, z = sample_batch(ch, rng, 1)
    return BitVec.from_list(x[0].astype(int).tolist()), BitVec.from_list(z[0].astype(int).tolist())


def restrict_to_correctable(ch: PauliChannel, code: ClassicalCode) -> tuple[PauliChannel, float]:
    """Keep only terms with both x and z in the coset-leader set, renormalized.

    Returns the restricted channel and the discarded probability mass.
    """
    if ch.n != code.n:
        raise DomainError(f"channel on {ch.n} qubits, code on {code.n}")
    if code.n > MAX_EXPLICIT_QUBITS:
        raise CapacityError(f"restriction enumerates leader pairs; capped at {MAX_EXPLICIT_QUBITS} qubits")
    leaders = [v.bits for v in code.leaders.values()]
    kept = {}
    for x in leaders:
        for z in leaders:
            pr = ch.prob(x, z)
            if pr > 0:
                kept[(x, z)] = pr
    mass = sum(kept.values())
    if mass <= 0:
        raise DomainError("channel has no weight on the correctable set")
    return PauliChannel(ch.n, terms={k: v / mass for k, v in kept.items()}), max(0.0, 1.0 - mass)
