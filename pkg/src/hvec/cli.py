"""Command-line front end: sweeps, overhead tables, purification tables, self-checks.

Settings are merged in increasing priority: built-in defaults, a ``key=value``
config file, ``HVEC_<KEY>`` environment variables, then command-line flags.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product
from typing import Callable, Optional

import numpy as np

from . import closed_forms as cf
from .channels import PauliChannel, biased_check_channel, depolarizing_product
from .codes import CapacityError, ClassicalCode, DomainError, load_code_file, repetition
from .dense_sim import EPP_VARIANTS, run_epp, run_hvec
from .pauli import BitVec
from .surface_mc import mc_logical_error
from .vec_engine import InputLogicalState, default_observable, logical_x_support, logical_z_op

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_CAPACITY = 0, 1, 2, 3
ENV_PREFIX = "HVEC_"

SWEEP_HEADER = ["code", "basis", "d", "p", "shots", "failures", "p_l", "lo", "hi", "seed", "theory"]

DEFAULTS = {
    "code": "vec",
    "variant": "h",
    "d": "1,3,5,7",
    "p": "",
    "p_min": "0.01",
    "p_max": "0.75",
    "p_points": "12",
    "p_log": "true",
    "basis": "X,Z",
    "shots": "100000",
    "seed": "",
    "out": "-",
    "workers": "1",
    "noise": "depolarizing",
    "code_file": "",
}


class ConfigError(ValueError):
    pass


def _fmt(x) -> str:
    if x is None or x == "":
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".10g")


def _bool(s: str) -> bool:
    t = str(s).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off", ""):
        return False
    raise ConfigError(f"not a boolean: {s!r}")


def read_config_file(path: str) -> dict:
    out = {}
    try:
        text = open(path).read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        k, v = (s.strip() for s in line.split("=", 1))
        k = k.replace("-", "_")
        if k not in DEFAULTS:
            raise ConfigError(f"{path}:{lineno}: unknown key {k!r}")
        out[k] = v
    return out


@dataclass
class RunConfig:
    command: str
    code: str
    variant: str
    d_list: list[int]
    p_grid: list[float]
    bases: list[str]
    shots: int
    seed: Optional[int]
    out: str
    workers: int
    noise: str
    code_file: str = ""


def _p_grid(s: dict) -> list[float]:
    if s["p"]:
        return [float(v) for v in s["p"].split(",")]
    lo, hi, pts = float(s["p_min"]), float(s["p_max"]), int(s["p_points"])
    if pts < 1:
        raise ConfigError("p_points must be at least 1")
    if pts == 1:
        return [lo]
    if _bool(s["p_log"]):
        if lo <= 0:
            raise ConfigError("log spacing needs p_min > 0")
        # half-open: p_max itself is excluded
        return list(np.exp(np.linspace(np.log(lo), np.log(hi), pts, endpoint=False)))
    return list(np.linspace(lo, hi, pts, endpoint=False))


def resolve_config(command: str, flags: dict, env: Optional[dict] = None) -> RunConfig:
    env = os.environ if env is None else env
    s = dict(DEFAULTS)
    if flags.get("config"):
        s.update(read_config_file(flags["config"]))
    for k in DEFAULTS:
        v = env.get(ENV_PREFIX + k.upper())
        if v is not None:
            s[k] = v
    for k, v in flags.items():
        if k in DEFAULTS and v is not None:
            s[k] = str(v)
    try:
        d_list = [int(v) for v in str(s["d"]).split(",") if v.strip()]
        p_grid = [float(p) for p in _p_grid(s)]
        bases = [b.strip().upper() for b in s["basis"].split(",") if b.strip()]
        shots = int(s["shots"])
        seed = int(s["seed"]) if str(s["seed"]).strip() else None
        workers = int(s["workers"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if not d_list or not p_grid or not bases:
        raise ConfigError("d, p grid and basis lists must be nonempty")
    if any(b not in ("X", "Z") for b in bases):
        raise ConfigError(f"basis must be X or Z, got {s['basis']!r}")
    if s["code"] not in ("rep", "vec", "surface"):
        raise ConfigError(f"code must be rep, vec or surface, got {s['code']!r}")
    if s["noise"] not in ("depolarizing", "ybias"):
        raise ConfigError(f"noise must be depolarizing or ybias, got {s['noise']!r}")
    if any(not 0.0 <= p <= 1.0 for p in p_grid):
        raise ConfigError("p values must lie in [0, 1]")
    if workers < 1 or shots < 1:
        raise ConfigError("workers and shots must be positive")
    return RunConfig(command, s["code"], s["variant"], d_list, p_grid, bases, shots, seed,
                     s["out"], workers, s["noise"], s["code_file"])


def _channel(cfg: RunConfig, n: int, p: float) -> PauliChannel:
    if cfg.noise == "ybias":
        return biased_check_channel(n, p)
    return depolarizing_product(n, p)


def _code(cfg: RunConfig, d: int) -> ClassicalCode:
    return load_code_file(cfg.code_file) if cfg.code_file else repetition(d)


def _flip_probs(ch: PauliChannel) -> tuple[np.ndarray, np.ndarray]:
    f = ch.factors
    return f[:, 1] + f[:, 2], f[:, 2] + f[:, 3]


def rep_exact(code: ClassicalCode, ch: PauliChannel, basis: str) -> float:
    """Exact logical error of the plain bit-flip code by enumerating all error parts.

    Z basis: X-type parts are decoded and fail when the residual flips the logical.
    X basis: Z-type parts are never detected and fail when they anticommute with X_L.
    """
    qx, qz = _flip_probs(ch)
    n = code.n
    lx = logical_x_support(code).bits
    lz = logical_z_op(code).z.bits
    total = 0.0
    for e in range(1 << n):
        if basis == "Z":
            pr = np.prod([qx[q] if (e >> q) & 1 else 1 - qx[q] for q in range(n)])
            resid = e ^ code.decode(code.syndrome(BitVec(n, e))).bits
            failed = bool((resid & lz).bit_count() & 1)
        else:
            pr = np.prod([qz[q] if (e >> q) & 1 else 1 - qz[q] for q in range(n)])
            failed = bool((e & lx).bit_count() & 1)
        if failed:
            total += pr
    return float(total)


def _sweep_row(cfg: RunConfig, code_name: str, basis: str, d: int, p: float) -> list[str]:
    theory = ""
    if code_name in ("rep", "vec"):
        code = _code(cfg, d)
        ch = _channel(cfg, code.n, p)
        if code_name == "rep":
            pl = rep_exact(code, ch, basis)
            if not cfg.code_file and cfg.noise == "depolarizing":
                theory = cf.rep_x(d, p) if basis == "Z" else cf.rep_z(d, p)
        else:
            state = InputLogicalState.zero(code) if basis == "Z" else InputLogicalState.plus(code)
            est = run_hvec(code, ch, state, default_observable(state), cfg.variant)
            pl = abs(1 - est.ratio) / 2
            if not cfg.code_file and cfg.noise == "depolarizing":
                theory = cf.vec(d, p)
        return [code_name, basis, str(d), _fmt(p), "0", "0", _fmt(pl), _fmt(pl), _fmt(pl),
                _fmt(cfg.seed) if cfg.seed is not None else "", _fmt(theory)]
    if cfg.noise != "depolarizing":
        raise ConfigError("surface sweeps support depolarizing noise only")
    r = mc_logical_error(d, p, basis, cfg.shots, cfg.seed, workers=1)
    if d >= 3:
        theory = cf.sur(d, p)
    return [code_name, basis, str(d), _fmt(p), str(r.shots), str(r.failures), _fmt(r.p_hat),
            _fmt(r.interval_lo), _fmt(r.interval_hi), str(r.seed), _fmt(theory)]


def _run_grid(cfg: RunConfig, keys: list, fn: Callable) -> list[list[str]]:
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(lambda k: fn(*k), keys))
    return [fn(*k) for k in keys]


def _write(cfg: RunConfig, header: list[str], rows: list[list[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    text = buf.getvalue()
    if cfg.out == "-":
        sys.stdout.write(text)
    else:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    return text


def cmd_sweep(cfg: RunConfig) -> str:
    if cfg.code == "surface" and cfg.seed is None:
        raise ConfigError("surface sweeps are stochastic; --seed is required")
    keys = [(cfg.code, b, d, p) for b, d, p in product(sorted(cfg.bases), sorted(cfg.d_list), cfg.p_grid)]
    rows = _run_grid(cfg, keys, lambda c, b, d, p: _sweep_row(cfg, c, b, d, p))
    return _write(cfg, SWEEP_HEADER, rows)


def cmd_overhead(cfg: RunConfig) -> str:
    def row(d: int, p: float) -> list[str]:
        code = repetition(d)
        est = run_hvec(code, _channel(cfg, d, p), InputLogicalState.zero(code), variant=cfg.variant)
        theory = cf.c_y(d, p) if cfg.noise == "depolarizing" else ""
        return [str(d), _fmt(p), _fmt(est.overhead), _fmt(theory)]

    keys = list(product(sorted(cfg.d_list), cfg.p_grid))
    rows = _run_grid(cfg, keys, row)
    return _write(cfg, ["d", "p", "overhead_sim", "overhead_theory"], rows)


def cmd_epp(cfg: RunConfig) -> str:
    grid = [p for p in cfg.p_grid if p <= 0.75]
    keys = list(product(EPP_VARIANTS, grid, (False, True)))

    def row(v: str, p: float, noisy: bool) -> list[str]:
        return [v, _fmt(p), "true" if noisy else "false", _fmt(run_epp(v, p, noisy))]

    rows = _run_grid(cfg, keys, row)
    return _write(cfg, ["variant", "p", "check_noisy", "fidelity"], rows)


def cmd_verify(inject: Optional[str] = None, out=None) -> bool:
    from .verify import run_checks

    results = run_checks(inject)
    out = sys.stdout if out is None else out
    ok = True
    for name, passed, detail in results:
        out.write(f"{'PASS' if passed else 'FAIL'} {name}: {detail}\n")
        ok &= passed
    out.write(f"{sum(r[1] for r in results)}/{len(results)} checks passed\n")
    return ok


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hvec", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("sweep", "overhead", "epp"):
        sp = sub.add_parser(name)
        sp.add_argument("--config")
        sp.add_argument("--code", choices=["rep", "vec", "surface"])
        sp.add_argument("--code-file", dest="code_file")
        sp.add_argument("--variant")
        sp.add_argument("--d")
        sp.add_argument("--p", help="comma-separated p values; overrides the grid")
        sp.add_argument("--p-min", dest="p_min")
        sp.add_argument("--p-max", dest="p_max")
        sp.add_argument("--p-points", dest="p_points")
        sp.add_argument("--p-log", dest="p_log", nargs="?", const="true")
        sp.add_argument("--basis")
        sp.add_argument("--shots")
        sp.add_argument("--seed")
        sp.add_argument("--noise")
        sp.add_argument("--workers")
        sp.add_argument("--out")
    vp = sub.add_parser("verify")
    vp.add_argument("--inject", choices=["phase", "logicals"], help="deliberately break one component")
    return ap


def main(argv: Optional[list[str]] = None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose > 1 else
                        logging.INFO if args.verbose else logging.WARNING)
    try:
        if args.command == "verify":
            return EXIT_OK if cmd_verify(args.inject) else EXIT_VERIFY
        cfg = resolve_config(args.command, vars(args))
        {"sweep": cmd_sweep, "overhead": cmd_overhead, "epp": cmd_epp}[args.command](cfg)
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
