"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line."""

import filecmp

import numpy as np
import pytest

from hvec import closed_forms as cf
from hvec.channels import (
    PauliChannel,
    biased_check_channel,
    depolarizing_product,
    pauli_product,
    restrict_to_correctable,
)
from hvec.cli import cmd_sweep, rep_exact, resolve_config
from hvec.codes import repetition
from hvec.dense_sim import equivalence_single_vs_multi_ancilla, run_epp, run_hvec, run_hvec_repeated
from hvec.pauli import mul
from hvec.surface_mc import exhaustive_logical_error, mc_logical_error
from hvec.vec_engine import (
    InputLogicalState,
    compute_p_full,
    default_observable,
    logical_x_op,
    logical_z_op,
    virtual_logical_error,
)


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {title} [{detail}]")
        assert ok, detail

    return emit


def states(code):
    return [InputLogicalState.zero(code), InputLogicalState.plus(code)]


def correctable_channels(code, seed):
    """Restricted product channels plus random non-product channels on leader pairs."""
    n = code.n
    out = []
    for p in (0.1, 0.3, 0.6):
        out.append(restrict_to_correctable(depolarizing_product(n, p), code)[0])
    out.append(restrict_to_correctable(pauli_product([[0.6, 0.25, 0.1, 0.05]] * n), code)[0])
    rng = np.random.default_rng(seed)
    leaders = [v.bits for v in code.coset_leaders]
    for _ in range(3):
        w = rng.random((len(leaders), len(leaders)))
        w /= w.sum()
        out.append(PauliChannel(n, terms={(x, z): float(w[i, j]) for i, x in enumerate(leaders)
                                          for j, z in enumerate(leaders)}))
    return out


def logical_observables(code):
    x_l, z_l = logical_x_op(code), logical_z_op(code)
    y_l = mul(x_l, z_l).with_phase(mul(x_l, z_l).phase_exp + 1)
    return [z_l, x_l, y_l]


def test_criterion_01_exactness_on_correctable_channels(report):
    worst = 0.0
    cases = 0
    for d in (1, 3, 5):
        code = repetition(d)
        for ch in correctable_channels(code, seed=d):
            for state in states(code):
                for obs in logical_observables(code):
                    est = run_hvec(code, ch, state, obs)
                    worst = max(worst, abs(est.ratio - complex(state.expectation(obs)).real))
                    cases += 1
    report(1, "ratio equals the ideal expectation on correctable-support channels",
           worst < 1e-10, f"{cases} cases, max deviation {worst:.2e}")


def test_criterion_02_analytic_vs_dense_normalization(report):
    worst = 0.0
    for d in (1, 3, 5, 7):
        code = repetition(d)
        for p in (0.01, 0.1, 0.3):
            ch = depolarizing_product(d, p)
            for state in states(code):
                worst = max(worst, abs(compute_p_full(code, ch, state) - run_hvec(code, ch, state).denominator))
    report(2, "analytic normalization equals dense <X (x) I>", worst < 1e-10, f"max deviation {worst:.2e}")


def test_criterion_03_closed_form_reproduction(report):
    grid = (0.001, 0.005, 0.01, 0.02, 0.05)
    failures = []
    worst = {"vec": 0.0, "rep Z basis": 0.0, "rep X basis": 0.0, "ratio": 0.0}
    for d in (3, 5, 7):
        code = repetition(d)
        for p in grid:
            ch = depolarizing_product(d, p)
            for state in states(code):
                dev = abs(virtual_logical_error(code, ch, state) / cf.vec(d, p) - 1)
                worst["vec"] = max(worst["vec"], dev)
                if dev > 0.05:
                    failures.append(f"vec d={d} p={p} {state.label.value}: {dev:+.3f}")
            for basis, formula, key in (("Z", cf.rep_x, "rep Z basis"), ("X", cf.rep_z, "rep X basis")):
                dev = abs(rep_exact(code, ch, basis) / formula(d, p) - 1)
                worst[key] = max(worst[key], dev)
                if dev > 0.05:
                    failures.append(f"{key} d={d} p={p}: {dev:.3f}")
        p = 1e-3
        ch = depolarizing_product(d, p)
        ratio = rep_exact(code, ch, "Z") / virtual_logical_error(code, ch, InputLogicalState.zero(code))
        dev = abs(ratio / 2 ** ((d + 1) // 2) - 1)
        worst["ratio"] = max(worst["ratio"], dev)
        if dev > 0.05:
            failures.append(f"ratio d={d}: {dev:.3f}")
    detail = ", ".join(f"{k} max {v:.3f}" for k, v in worst.items())
    if failures:
        detail += "; over 5%: " + "; ".join(failures)
    report(3, "exact logical error rates vs leading-order closed forms", not failures, detail)


def test_criterion_04_surface_baseline(report):
    parts = []
    ok = True
    for p, seed in ((0.01, 2024), (0.02, 2025)):
        exact, _ = exhaustive_logical_error(3, p, 4, "Z")
        r = mc_logical_error(3, p, "Z", 10 ** 6, seed=seed)
        inside = r.interval_lo <= exact <= r.interval_hi
        ok &= inside
        parts.append(f"p={p}: oracle {exact:.4g} in [{r.interval_lo:.4g}, {r.interval_hi:.4g}]={inside}")
    p = 1e-3
    sur, _ = exhaustive_logical_error(3, p, 4, "Z")
    code = repetition(3)
    vec = virtual_logical_error(code, depolarizing_product(3, p), InputLogicalState.zero(code))
    target = (5 * 3 - 4) * 2 ** 2
    ratio = sur / vec
    within = target / 2 <= ratio <= 2 * target
    ok &= within
    parts.append(f"surface/vec at p=1e-3 {ratio:.2f} vs {target}")
    report(4, "surface Monte Carlo and improvement ratio", ok, "; ".join(parts))


def test_criterion_05_sampling_overhead(report):
    worst = 0.0
    for d in (3, 5, 7):
        code = repetition(d)
        for p in (0.001, 0.01, 0.02, 0.05, 0.1):
            for state in states(code):
                est = run_hvec(code, depolarizing_product(d, p), state)
                worst = max(worst, abs(est.overhead / cf.c_y(d, p) - 1))
    report(5, "denominator^-2 vs overhead closed form", worst < 0.02, f"max relative deviation {worst:.4f}")


def test_criterion_06_multi_ancilla(report):
    worst = 0.0
    for d in (3, 5):
        code = repetition(d)
        for p in (0.1, 0.3):
            for state in states(code):
                worst = max(worst, *equivalence_single_vs_multi_ancilla(code, depolarizing_product(d, p), state))
    report(6, "per-qubit ancillas reproduce the single-ancilla estimate", worst < 1e-10, f"max delta {worst:.2e}")


def test_criterion_07_repeated_checks(report):
    code = repetition(3)
    data = depolarizing_product(3, 0.1)
    worst = 0.0
    for rounds in (2, 3):
        for state in states(code):
            obs = default_observable(state)
            est = run_hvec_repeated(code, data, biased_check_channel(3, 0.05), rounds, state, obs,
                                    support_condition=True)
            worst = max(worst, abs(est.ratio - 1.0))
    x_noise = pauli_product([[0.9, 0.05, 0.05, 0.0]] * 3)
    plus = InputLogicalState.plus(code)
    broken = run_hvec_repeated(code, data, x_noise, 2, plus, logical_x_op(code), support_condition=True)
    gap = abs(broken.ratio - 1.0)
    report(7, "repeated checks with Y-biased check noise stay exact", worst < 1e-10 and gap > 1e-6,
           f"max deviation {worst:.2e}; X check noise deviation {gap:.3f}")


def test_criterion_08_purification(report):
    grid = [round(0.05 * i, 2) for i in range(1, 15)]
    worst = 0.0
    ideal = 0.0
    for p in grid:
        worst = max(worst, abs(run_epp("Hvec", p) - cf.f_h(p)), abs(run_epp("SqrtY", p) - cf.f_sqrt_y(p)),
                    abs(run_epp("SymmetrizedH", p) - cf.f_sym_h(p)))
        ideal = max(ideal, abs(run_epp("Hvec", p, check_noisy=False) - 1.0))
    fine = [round(0.05 + 0.01 * i, 2) for i in range(26)]
    margins = [run_epp("SymmetrizedH", p) - run_epp("Conventional2", p) for p in fine]
    ok = worst < 1e-10 and ideal < 1e-10 and min(margins) > 0
    report(8, "purified fidelities and ordering", ok,
           f"closed-form deviation {worst:.2e}, ideal-check deviation {ideal:.2e}, "
           f"min symmetrized-minus-two-round margin {min(margins):.4f}")


def test_criterion_09_sqrt_y_variant(report):
    worst = 0.0
    full_gap = 0.0
    for d in (3, 5):
        code = repetition(d)
        for ch in correctable_channels(code, seed=10 + d):
            for state in states(code):
                for obs in logical_observables(code):
                    a = run_hvec(code, ch, state, obs, "h")
                    b = run_hvec(code, ch, state, obs, "sqrty")
                    worst = max(worst, abs(a.ratio - b.ratio))
        ch = depolarizing_product(d, 0.1)
        state = InputLogicalState.zero(code)
        full_gap = max(full_gap, abs(run_hvec(code, ch, state, variant="h").ratio
                                     - run_hvec(code, ch, state, variant="sqrty").ratio))
    report(9, "sqrt(Y) variant without phase matches the H variant", worst < 1e-10,
           f"max deviation {worst:.2e} on correctable-support channels; "
           f"informational full-noise gap at p=0.1 {full_gap:.2e}")


def test_criterion_10_determinism(report, tmp_path):
    outputs = []
    for i, workers in enumerate((1, 4, 1)):
        path = tmp_path / f"run{i}.csv"
        flags = dict(code="surface", d="3,5", p="0.01,0.03,0.06", basis="X,Z", shots="30000", seed="99",
                     workers=str(workers), out=str(path))
        cmd_sweep(resolve_config("sweep", flags, {}))
        outputs.append(path)
    for i, code in enumerate(("rep", "vec")):
        for workers in (1, 3):
            path = tmp_path / f"{code}{workers}.csv"
            flags = dict(code=code, d="1,3,5", p="0.01,0.1", basis="X,Z", seed="99", workers=str(workers),
                         out=str(path))
            cmd_sweep(resolve_config("sweep", flags, {}))
    same = all(filecmp.cmp(outputs[0], o, shallow=False) for o in outputs[1:])
    same &= filecmp.cmp(tmp_path / "rep1.csv", tmp_path / "rep3.csv", shallow=False)
    same &= filecmp.cmp(tmp_path / "vec1.csv", tmp_path / "vec3.csv", shallow=False)
    report(10, "byte-identical sweep CSV across worker counts", same,
           f"surface rows {len(outputs[0].read_text().splitlines()) - 1}")
