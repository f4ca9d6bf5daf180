"""Classical bit-flip codes defined by Z-type parity checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .pauli import BitVec, DimensionError

MAX_CODE_QUBITS = 24
MAX_LOGICAL_BITS = 16


class CapacityError(RuntimeError):
    """Raised when a request exceeds an enumeration bound."""


class DomainError(ValueError):
    """Raised for arguments outside the supported domain."""


def _rref(rows: Sequence[int], n: int) -> tuple[list[int], list[int]]:
    """Row-reduce packed rows over GF(2); returns (basis rows, pivot columns)."""
    basis: list[int] = []
    pivots: list[int] = []
    for r in rows:
        for b, piv in zip(basis, pivots):
            if (r >> piv) & 1:
                r ^= b
        if r == 0:
            continue
        piv = (r & -r).bit_length() - 1
        for i, b in enumerate(basis):
            if (b >> piv) & 1:
                basis[i] = b ^ r
        basis.append(r)
        pivots.append(piv)
    return basis, pivots


def _null_space(basis: list[int], pivots: list[int], n: int) -> list[int]:
    """Basis of {x : row.x = 0 for every row}, given a reduced row basis."""
    free = [c for c in range(n) if c not in pivots]
    out = []
    for f in free:
        v = 1 << f
        for b, piv in zip(basis, pivots):
            if (b >> f) & 1:
                v |= 1 << piv
        out.append(v)
    return out


def _span(gens: list[int]) -> list[int]:
    out = [0]
    for g in gens:
        out += [v ^ g for v in out]
    return out


@dataclass(frozen=True)
class ClassicalCode:
    """Z-check code with its logical supports and a minimum-weight decoder.

    ``leaders`` maps each syndrome (packed int, bit j = check j) to the
    correction chosen for it.  Ties between equal-weight coset members go to the
    lexicographically smallest bit string.
    """

    n: int
    checks: tuple[BitVec, ...]
    logicals: tuple[BitVec, ...]
    leaders: dict = field(repr=False, compare=False)

    @property
    def num_checks(self) -> int:
        return len(self.checks)

    @property
    def k(self) -> int:
        return len(self.logicals).bit_length() - 1

    @property
    def coset_leaders(self) -> list[BitVec]:
        return [self.leaders[s] for s in sorted(self.leaders)]

    def is_logical(self, v: BitVec) -> bool:
        return self.syndrome(v).bits == 0

    def syndrome(self, x: BitVec) -> BitVec:
        if x.n != self.n:
            raise DimensionError(f"error length {x.n} does not match code length {self.n}")
        s = 0
        for j, c in enumerate(self.checks):
            s |= c.dot(x) << j
        return BitVec(len(self.checks), s)

    def decode(self, s: BitVec) -> BitVec:
        if s.n != len(self.checks):
            raise DimensionError(f"syndrome length {s.n} does not match {len(self.checks)} checks")
        return self.leaders[s.bits]

    def max_leader_weight(self) -> int:
        return max(v.weight for v in self.leaders.values())

    def min_logical_weight(self) -> Optional[int]:
        nz = [v.weight for v in self.logicals if v.bits]
        return min(nz) if nz else None


def from_parity_checks(n: int, rows: Sequence[BitVec]) -> ClassicalCode:
    """Build a code from parity-check rows (duplicates and dependent rows are dropped)."""
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    for r in rows:
        if r.n != n:
            raise DimensionError(f"check length {r.n} does not match n={n}")
    if n > MAX_CODE_QUBITS:
        raise CapacityError(f"n={n} exceeds the exhaustive enumeration cap of {MAX_CODE_QUBITS}")
    basis, pivots = _rref([r.bits for r in rows], n)
    # keep the caller's rows in order, skipping any that are dependent
    kept: list[int] = []
    span_basis: list[int] = []
    for r in rows:
        b2, _ = _rref(span_basis + [r.bits], n)
        if len(b2) > len(span_basis):
            kept.append(r.bits)
            span_basis = b2
    k = n - len(basis)
    if k > MAX_LOGICAL_BITS:
        raise CapacityError(f"k={k} exceeds the logical enumeration cap of {MAX_LOGICAL_BITS}")
    logical_ints = sorted(_span(_null_space(basis, pivots, n)))
    checks = tuple(BitVec(n, r) for r in kept)

    leaders: dict[int, BitVec] = {}
    need = 1 << len(checks)
    # sweep by weight then lexicographic bit string so the first hit wins
    for w in range(n + 1):
        hits = []
        for supp in combinations(range(n), w):
            v = BitVec.from_support(n, supp)
            s = 0
            for j, c in enumerate(kept):
                s |= ((c & v.bits).bit_count() & 1) << j
            if s not in leaders:
                hits.append((str(v), s, v))
        for _, s, v in sorted(hits, key=lambda t: t[0]):
            if s not in leaders:
                leaders[s] = v
        if len(leaders) == need:
            break
    return ClassicalCode(n, checks, tuple(BitVec(n, v) for v in logical_ints), leaders)


def repetition(d: int) -> ClassicalCode:
    """Distance-``d`` repetition code with checks Z_i Z_{i+1}."""
    if not isinstance(d, int) or d < 1 or d % 2 == 0:
        raise DomainError(f"repetition distance must be an odd positive integer, got {d!r}")
    if d == 1:
        return ClassicalCode(1, (), (BitVec(1, 0), BitVec(1, 1)), {0: BitVec(1, 0)})
    rows = [BitVec.from_support(d, (i, i + 1)) for i in range(d - 1)]
    return from_parity_checks(d, rows)


def hamming74() -> ClassicalCode:
    rows = ["1010101", "0110011", "0001111"]
    return from_parity_checks(7, [BitVec.from_str(r) for r in rows])


def syndrome(code: ClassicalCode, x: BitVec) -> BitVec:
    return code.syndrome(x)


def decode(code: ClassicalCode, s: BitVec) -> BitVec:
    return code.decode(s)


def check_kl_classical(code: ClassicalCode, errors: Optional[Iterable[BitVec]] = None) -> bool:
    """Classical Knill-Laflamme check over pairs from the correctable set.

    ``Pi X^x X^v Pi`` is nonzero only when ``x ^ v`` is a logical, so the
    condition reduces to: ``x ^ v`` logical implies ``x == v``.
    """
    errs = list(code.leaders.values()) if errors is None else list(errors)
    logical = {v.bits for v in code.logicals}
    for a, b in combinations(errs, 2):
        if a.bits != b.bits and (a.bits ^ b.bits) in logical:
            return False
    return True


def generalized_kl_class(code: ClassicalCode, u: BitVec, v: BitVec) -> Optional[BitVec]:
    """Return ``u ^ v`` if it is a logical support, otherwise ``None`` (projection vanishes)."""
    w = u ^ v
    return w if code.is_logical(w) else None


def load_code_file(path: str | Path) -> ClassicalCode:
    """Read a code file: ``n <n>`` on the first line, then one 0/1 check per line."""
    lines = [ln.strip() for ln in Path(path).read_text().splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise DomainError(f"{path}: empty code file")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "n" or not head[1].isdigit():
        raise DomainError(f"{path}: first line must be 'n <int>', got {lines[0]!r}")
    n = int(head[1])
    rows = []
    for ln in lines[1:]:
        if len(ln) != n:
            raise DomainError(f"{path}: check {ln!r} has length {len(ln)}, expected {n}")
        rows.append(BitVec.from_str(ln))
    return from_parity_checks(n, rows)
