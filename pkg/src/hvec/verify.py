"""Oracle checks behind ``hvec verify``.

Each check compares two independent computations.  ``inject`` deliberately
breaks one component so the relevant checks can be seen to fail:

* ``phase``: drop the ``(-1)^{|k|}`` software phase of the H variant.
* ``logicals``: keep only the zero vector as the repetition code's logical set.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Callable, Optional

import numpy as np

from . import closed_forms as cf
from .channels import biased_check_channel, depolarizing_product, prob_pure_sigma, restrict_to_correctable
from .codes import check_kl_classical, hamming74, repetition
from .dense_sim import equivalence_single_vs_multi_ancilla, run_epp, run_hvec
from .pauli import H_GATE, SQRT_Y_GATE, BitVec, PauliOp, hadamard_conjugate, mul, sqrt_y_conjugate
from .surface_mc import exhaustive_logical_error, mc_logical_error
from .vec_engine import (
    InputLogicalState,
    compute_p_cor,
    compute_p_full,
    compute_p_max,
    default_observable,
)

Check = tuple[str, bool, str]


def _random_pauli(rng: np.random.Generator, n: int) -> PauliOp:
    return PauliOp(BitVec(n, int(rng.integers(0, 1 << n))), BitVec(n, int(rng.integers(0, 1 << n))),
                   int(rng.integers(0, 4)))


def _kron_all(g: np.ndarray, n: int) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for _ in range(n):
        out = np.kron(out, g)
    return out


def check_pauli_algebra() -> Check:
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(20):
        p, q = _random_pauli(rng, 4), _random_pauli(rng, 4)
        worst = max(worst, np.abs(mul(p, q).to_matrix() - p.to_matrix() @ q.to_matrix()).max())
        h, s = _kron_all(H_GATE, 4), _kron_all(SQRT_Y_GATE, 4)
        worst = max(worst, np.abs(hadamard_conjugate(p).to_matrix() - h @ p.to_matrix() @ h).max())
        worst = max(worst, np.abs(sqrt_y_conjugate(p).to_matrix() - s.conj().T @ p.to_matrix() @ s).max())
    return "pauli products and conjugations vs dense matrices", worst < 1e-12, f"max deviation {worst:.1e}"


def check_codes() -> Check:
    ok = check_kl_classical(repetition(3)) and check_kl_classical(hamming74())
    ok &= len(repetition(7).leaders) == 2 ** 6 and len(hamming74().logicals) == 16
    return "code construction and Knill-Laflamme condition", ok, "repetition(3), repetition(7), Hamming(7,4)"


def check_channels() -> Check:
    worst = max(abs(prob_pure_sigma(depolarizing_product(n, 0.2), "Y") - (1 - 0.4 / 3) ** n) for n in range(1, 8))
    ch = depolarizing_product(3, 0.3)
    worst = max(worst, abs(sum(pr for _, pr in ch.items()) - 1.0))
    return "channel normalization and pure-Y weight", worst < 1e-12, f"max deviation {worst:.1e}"


def _code(inject: Optional[str], d: int):
    code = repetition(d)
    if inject == "logicals":
        code = replace(code, logicals=(BitVec(d, 0),))
    return code


def check_analytic_vs_dense(inject: Optional[str]) -> Check:
    worst = 0.0
    for d in (3, 5):
        code = repetition(d)
        for p in (0.1, 0.3):
            ch = depolarizing_product(d, p)
            for st in (InputLogicalState.zero(code), InputLogicalState.plus(code)):
                est = run_hvec(code, ch, st, software_phase=inject != "phase")
                worst = max(worst, abs(compute_p_full(code, ch, st) - est.denominator))
    return "normalization: trace formula vs dense circuit", worst < 1e-10, f"max deviation {worst:.1e}"


def check_exactness(inject: Optional[str]) -> Check:
    """Restricted channel: ratio equals the ideal value and the normalization equals P_cor."""
    worst = 0.0
    for d in (3, 5):
        code = repetition(d)
        ch, _ = restrict_to_correctable(depolarizing_product(d, 0.3), code)
        p_cor = compute_p_cor(code, ch)
        for st in (InputLogicalState.zero(code), InputLogicalState.plus(code)):
            est = run_hvec(code, ch, st, default_observable(st), software_phase=inject != "phase")
            worst = max(worst, abs(est.ratio - 1.0), abs(est.denominator - p_cor))
    return "exactness on correctable errors (ratio and normalization)", worst < 1e-10, f"max deviation {worst:.1e}"


def check_p_max(inject: Optional[str]) -> Check:
    worst = 0.0
    for d in (1, 3, 5, 7):
        code = _code(inject, d)
        for p in (0.01, 0.1, 0.3):
            worst = max(worst, abs(compute_p_max(code, depolarizing_product(d, p)) - cf.p_max_closed(d, p)))
    return "P_max vs closed form", worst < 1e-12, f"max deviation {worst:.1e}"


def check_multi_ancilla() -> Check:
    code = repetition(3)
    worst = 0.0
    for ch in (depolarizing_product(3, 0.1), biased_check_channel(3, 0.2)):
        st = InputLogicalState.zero(code)
        worst = max(worst, *equivalence_single_vs_multi_ancilla(code, ch, st))
    return "single vs per-qubit ancillas", worst < 1e-10, f"max deviation {worst:.1e}"


def check_sqrt_y(inject: Optional[str]) -> Check:
    code = repetition(3)
    ch, _ = restrict_to_correctable(depolarizing_product(3, 0.2), code)
    worst = 0.0
    for st in (InputLogicalState.zero(code), InputLogicalState.plus(code)):
        a = run_hvec(code, ch, st, variant="h", software_phase=inject != "phase")
        b = run_hvec(code, ch, st, variant="sqrty")
        worst = max(worst, abs(a.ratio - b.ratio), abs(a.denominator - b.denominator))
    return "sqrt(Y) variant vs H variant", worst < 1e-10, f"max deviation {worst:.1e}"


def check_epp() -> Check:
    worst = 0.0
    for p in (0.1, 0.3, 0.6):
        worst = max(worst, abs(run_epp("Hvec", p) - cf.f_h(p)), abs(run_epp("SqrtY", p) - cf.f_sqrt_y(p)),
                    abs(run_epp("SymmetrizedH", p) - cf.f_sym_h(p)), abs(run_epp("Hvec", p, False) - 1.0))
    return "purified fidelities vs closed forms", worst < 1e-10, f"max deviation {worst:.1e}"


def check_surface() -> Check:
    exact, _ = exhaustive_logical_error(3, 0.02, 4, "Z")
    r = mc_logical_error(3, 0.02, "Z", 200_000, seed=2024)
    ok = r.interval_lo <= exact <= r.interval_hi
    return "surface Monte Carlo vs exhaustive sum", ok, f"exact {exact:.4g}, interval [{r.interval_lo:.4g}, {r.interval_hi:.4g}]"


def check_closed_forms() -> Check:
    # reference values are quoted to a fixed number of decimals; allow one unit in the last place
    pairs = [(cf.rep_x(3, 0.1), "0.0124444"), (cf.vec(3, 0.1), "0.0036899"), (cf.sur(3, 0.1), "0.1368889"),
             (cf.c_y(3, 0.1), "1.512793"), (cf.f_h(0.3), "0.907407"), (cf.f_sqrt_y(0.3), "0.844828"),
             (cf.f_sym_h(0.3), "0.980000")]
    ok = all(abs(a - float(b)) <= 10.0 ** -len(b.split(".")[1]) for a, b in pairs)
    worst = max(abs(a - float(b)) for a, b in pairs)
    return "closed-form reference values", ok, f"max absolute deviation {worst:.1e}"


def run_checks(inject: Optional[str] = None) -> list[Check]:
    checks: list[Callable[[], Check]] = [
        check_pauli_algebra,
        check_codes,
        check_channels,
        lambda: check_analytic_vs_dense(inject),
        lambda: check_exactness(inject),
        lambda: check_p_max(inject),
        check_multi_ancilla,
        lambda: check_sqrt_y(inject),
        check_epp,
        check_surface,
        check_closed_forms,
    ]
    return [c() for c in checks]
