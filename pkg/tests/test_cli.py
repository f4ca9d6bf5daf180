import csv
import io
from math import comb

import pytest

from hvec import closed_forms as cf
from hvec.channels import depolarizing_product
from hvec.cli import (
    EXIT_CAPACITY,
    EXIT_CONFIG,
    EXIT_OK,
    EXIT_VERIFY,
    ConfigError,
    cmd_epp,
    cmd_overhead,
    cmd_sweep,
    cmd_verify,
    main,
    rep_exact,
    resolve_config,
)
from hvec.codes import repetition
from hvec.dense_sim import run_hvec
from hvec.vec_engine import InputLogicalState


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def cfg(command="sweep", env=None, **flags):
    return resolve_config(command, dict(flags), env or {})


def test_vec_row_matches_dense():
    out = rows(cmd_sweep(cfg(code="vec", d="3", p="0.1", basis="Z")))
    assert len(out) == 1
    code = repetition(3)
    est = run_hvec(code, depolarizing_product(3, 0.1), InputLogicalState.zero(code))
    assert float(out[0]["p_l"]) == pytest.approx(abs(1 - est.ratio) / 2, rel=1e-9)
    assert float(out[0]["theory"]) == pytest.approx(cf.vec(3, 0.1), rel=1e-9)
    assert out[0]["shots"] == "0"


def test_rep_distance_one():
    out = rows(cmd_sweep(cfg(code="rep", d="1", p="0.1", basis="Z")))
    assert float(out[0]["p_l"]) == pytest.approx(0.0666667, abs=1e-7)


@pytest.mark.parametrize("d", [1, 3, 5, 7])
@pytest.mark.parametrize("p", [0.01, 0.1, 0.4])
def test_rep_exact_oracles(d, p):
    code = repetition(d)
    ch = depolarizing_product(d, p)
    q = 2 * p / 3
    tail = sum(comb(d, w) * q ** w * (1 - q) ** (d - w) for w in range((d + 1) // 2, d + 1))
    assert rep_exact(code, ch, "Z") == pytest.approx(tail, rel=1e-12)
    # phase flips are never corrected; pairs of them are stabilizers, so only odd counts fail
    assert rep_exact(code, ch, "X") == pytest.approx((1 - (1 - 2 * q) ** d) / 2, rel=1e-12)


def test_zero_noise_rows():
    text = cmd_sweep(cfg(code="rep", d="1,3", p="0", basis="X,Z"))
    text += cmd_sweep(cfg(code="vec", d="1,3", p="0", basis="X,Z"))
    text += cmd_sweep(cfg(code="surface", d="3", p="0", basis="X,Z", shots="1000", seed="1"))
    for r in rows(text):
        if r["code"] != "code":
            assert float(r["p_l"]) == 0.0


def test_canonical_order_and_header():
    text = cmd_sweep(cfg(code="rep", d="5,3", p="0.1,0.05", basis="Z,X"))
    lines = text.splitlines()
    assert lines[0] == "code,basis,d,p,shots,failures,p_l,lo,hi,seed,theory"
    keys = [(r["basis"], int(r["d"])) for r in rows(text)]
    assert keys == sorted(keys)


def test_theory_column_reproducible():
    for r in rows(cmd_sweep(cfg(code="rep", d="3,5", p="0.02,0.2", basis="X,Z"))):
        d, p = int(r["d"]), float(r["p"])
        f = cf.rep_x if r["basis"] == "Z" else cf.rep_z
        assert float(r["theory"]) == pytest.approx(f(d, p), rel=1e-9)


def test_determinism_across_workers():
    base = dict(code="surface", d="3,5", p="0.02,0.05", basis="X,Z", shots="20000", seed="123")
    a = cmd_sweep(cfg(workers="1", **base))
    b = cmd_sweep(cfg(workers="4", **base))
    assert a == b
    assert cmd_sweep(cfg(workers="2", **base)) == a


def test_surface_requires_seed():
    with pytest.raises(ConfigError):
        cmd_sweep(cfg(code="surface", d="3", p="0.1"))


def test_default_grid():
    c = cfg()
    assert c.d_list == [1, 3, 5, 7]
    assert len(c.p_grid) == 12 and c.p_grid[0] == pytest.approx(0.01) and max(c.p_grid) < 0.75
    lin = cfg(p_min="0.1", p_max="0.5", p_points="4", p_log="false")
    assert lin.p_grid == pytest.approx([0.1, 0.2, 0.3, 0.4])


def test_config_precedence(tmp_path):
    f = tmp_path / "run.cfg"
    f.write_text("# sweep settings\ncode = rep\nd = 3\nbasis = X\nseed = 5\n")
    c = cfg(config=str(f))
    assert (c.code, c.d_list, c.bases, c.seed) == ("rep", [3], ["X"], 5)
    c = cfg(config=str(f), env={"HVEC_BASIS": "Z", "HVEC_D": "5"})
    assert (c.d_list, c.bases) == ([5], ["Z"])
    c = cfg(config=str(f), env={"HVEC_BASIS": "Z"}, basis="X,Z")
    assert c.bases == ["X", "Z"]


@pytest.mark.parametrize("flags", [dict(basis="Y"), dict(code="steane"), dict(p="1.5"), dict(workers="0"),
                                   dict(d="three"), dict(p_points="0", p=""), dict(noise="amplitude")])
def test_config_errors(flags):
    with pytest.raises(ConfigError):
        cfg(**flags)


def test_bad_config_file(tmp_path):
    f = tmp_path / "bad.cfg"
    f.write_text("shots 10\n")
    with pytest.raises(ConfigError):
        cfg(config=str(f))
    f.write_text("colour = red\n")
    with pytest.raises(ConfigError):
        cfg(config=str(f))


def test_overhead_rows():
    out = rows(cmd_overhead(cfg("overhead", d="3,5", p="0,0.05,0.1")))
    for r in out:
        p = float(r["p"])
        if p == 0:
            assert float(r["overhead_sim"]) == 1.0 and float(r["overhead_theory"]) == 1.0
        else:
            assert abs(float(r["overhead_sim"]) / float(r["overhead_theory"]) - 1) < 0.02
    assert float(out[2]["overhead_theory"]) == pytest.approx(1.512793, abs=1e-6)


def test_epp_rows():
    out = rows(cmd_epp(cfg("epp", p="0,0.3")))
    assert {r["variant"] for r in out} == {"Conventional1", "Conventional2", "Hvec", "SqrtY", "SymmetrizedH"}
    for r in out:
        if float(r["p"]) == 0 or (r["variant"] == "Hvec" and r["check_noisy"] == "false"):
            assert float(r["fidelity"]) == pytest.approx(1.0, abs=1e-10)
    hv = [r for r in out if r["variant"] == "Hvec" and r["check_noisy"] == "true" and r["p"] == "0.3"]
    assert float(hv[0]["fidelity"]) == pytest.approx(cf.f_h(0.3), abs=1e-9)


def test_main_exit_codes(tmp_path, capsys):
    out = tmp_path / "o.csv"
    assert main(["sweep", "--code", "rep", "--d", "3", "--p", "0.1", "--out", str(out)]) == EXIT_OK
    assert out.read_text().startswith("code,")
    assert main(["sweep", "--code", "surface", "--d", "3", "--p", "0.1", "--out", str(out)]) == EXIT_CONFIG
    assert main(["sweep", "--code", "vec", "--variant", "multi", "--d", "7", "--p", "0.1",
                 "--out", str(out)]) == EXIT_CAPACITY
    assert main(["sweep", "--code", "nope"]) == EXIT_CONFIG
    assert main(["verify", "--inject", "phase"]) == EXIT_VERIFY
    capsys.readouterr()


def test_verify_clean_and_injected():
    buf = io.StringIO()
    assert cmd_verify(out=buf)
    lines = buf.getvalue().splitlines()
    assert all(ln.startswith("PASS") for ln in lines[:-1])
    buf = io.StringIO()
    assert not cmd_verify("phase", out=buf)
    failed = [ln for ln in buf.getvalue().splitlines() if ln.startswith("FAIL")]
    assert any("exactness" in ln for ln in failed)
    buf = io.StringIO()
    assert not cmd_verify("logicals", out=buf)
    failed = [ln for ln in buf.getvalue().splitlines() if ln.startswith("FAIL")]
    assert any("P_max" in ln for ln in failed)


def test_stdout_output(capsys):
    assert main(["sweep", "--code", "rep", "--d", "1", "--p", "0.1", "--basis", "Z"]) == EXIT_OK
    assert "0.06666666667" in capsys.readouterr().out
