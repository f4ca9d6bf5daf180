"""Closed-form logical error rates, overheads and purified fidelities."""

from __future__ import annotations

from enum import Enum
from math import comb

from .codes import DomainError


class Formula(str, Enum):
    REP_X = "RepX"
    REP_Z = "RepZ"
    SUR = "Sur"
    VEC = "Vec"
    PY = "PY"
    CY = "CY"
    FH = "FH"
    FSQRTY = "FSqrtY"
    FSYMH = "FSymH"
    PCOR = "PCorClosed"
    PMAX = "PMaxClosed"


_EPP = {Formula.FH, Formula.FSQRTY, Formula.FSYMH}
_D_FREE = _EPP


def _check(f: Formula, d: int, p: float) -> None:
    hi = 0.75 if f in _EPP else 1.0
    if not 0.0 <= p <= hi:
        raise DomainError(f"{f.value}: p={p} outside [0, {hi}]")
    if f not in _D_FREE and (not isinstance(d, int) or d < 1 or d % 2 == 0):
        raise DomainError(f"{f.value}: d must be an odd positive integer, got {d!r}")


def rep_x(d: int, p: float) -> float:
    """Leading-order logical bit-flip rate of the repetition code."""
    t = (d + 1) // 2
    return comb(d, t) * (1 - 2 * p / 3) ** ((d - 1) // 2) * (2 * p / 3) ** t


def rep_z(d: int, p: float) -> float:
    """Probability of at least one phase-type error; the code corrects none."""
    return 1 - (1 - 2 * p / 3) ** d


def a_d(d: int) -> int:
    """Number of weight-(d+1)/2 failing patterns of one type in the unrotated surface code."""
    if not isinstance(d, int) or d < 3 or d % 2 == 0:
        raise DomainError(f"a_d needs odd d >= 3, got {d!r}")
    return (5 * d - 4) * comb(d, (d + 1) // 2)


def sur(d: int, p: float) -> float:
    return (5 * d - 4) * rep_x(d, p)


def vec(d: int, p: float) -> float:
    t = (d + 1) // 2
    return (1 - 2 * p / 3) ** (-d) * comb(d, t) * (1 - p) ** ((d - 1) // 2) * (p / 3) ** t


def p_y(d: int, p: float) -> float:
    return (1 - 2 * p / 3) ** d


def c_y(d: int, p: float) -> float:
    return (1 - 2 * p / 3) ** (-2 * d)


def f_h(p: float) -> float:
    """Purified fidelity of the plain H variant.  The denominator vanishes at p=0.75 (returns inf)."""
    a = (1 - p) ** 2
    den = a + (1 - p) * p / 3 - 2 * p * p / 9
    return a / den if den != 0 else float("inf")


def f_sqrt_y(p: float) -> float:
    a = (1 - p) ** 2
    return a / (a + (1 - p) * p / 3 + 2 * p * p / 9)


def f_sym_h(p: float) -> float:
    a = (1 - p) ** 2
    return a / (a + p * p / 9)


def p_cor_closed(d: int, p: float) -> float:
    return sum(comb(d, w) * (1 - p) ** (d - w) * (p / 3) ** w for w in range((d - 1) // 2 + 1))


def p_max_closed(d: int, p: float) -> float:
    return (1 - 2 * p / 3) ** d + (2 * p / 3) ** d


_TABLE = {
    Formula.REP_X: rep_x,
    Formula.REP_Z: rep_z,
    Formula.SUR: sur,
    Formula.VEC: vec,
    Formula.PY: p_y,
    Formula.CY: c_y,
    Formula.PCOR: p_cor_closed,
    Formula.PMAX: p_max_closed,
}


def evaluate(formula: Formula | str, d: int, p: float) -> float:
    """Evaluate a named closed form.  The fidelity formulas ignore ``d``."""
    f = Formula(formula)
    _check(f, d, p)
    if f is Formula.FH:
        return f_h(p)
    if f is Formula.FSQRTY:
        return f_sqrt_y(p)
    if f is Formula.FSYMH:
        return f_sym_h(p)
    return float(_TABLE[f](d, p))


def rep_over_vec(d: int, p: float) -> float:
    """Ratio of the two leading-order rates, simplified so that p=0 gives the limit."""
    return 2 ** ((d + 1) // 2) * (1 - 2 * p / 3) ** ((3 * d - 1) / 2) / (1 - p) ** ((d - 1) // 2)


def improvement_ratios(d: int, p: float) -> tuple[float, float]:
    """(repetition / virtual, surface / virtual) leading-order ratios."""
    if not isinstance(d, int) or d < 3 or d % 2 == 0:
        raise DomainError(f"improvement ratios need odd d >= 3, got {d!r}")
    if not 0.0 <= p < 1.0:
        raise DomainError(f"p={p} outside [0, 1)")
    r = rep_over_vec(d, p)
    return r, (5 * d - 4) * r


def fidelity_exceeds_one(p: float) -> bool:
    """True when the plain H-based purified fidelity formula is above 1."""
    a = (1 - p) ** 2
    return a + (1 - p) * p / 3 - 2 * p * p / 9 < a
