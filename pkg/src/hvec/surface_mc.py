"""Code-capacity Monte Carlo for the unrotated surface code.

Layout on a ``(2d-1) x (2d-1)`` grid: data qubits where ``r + c`` is even,
Z checks at (even r, odd c), X checks at (odd r, even c).  The X logical runs
along row 0 and the Z logical down column 0.

Decoding uses minimum-weight matching on the graph whose nodes are checks plus
one shared boundary node and whose edges are data qubits.  Matching is exact
(dynamic programming over defect subsets) up to ``EXACT_DEFECTS`` defects and
greedy beyond that.
"""

from __future__ import annotations

from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb, log
from threading import Lock

import numpy as np
from scipy.optimize import brentq

from .codes import CapacityError, DomainError

EXACT_DEFECTS = 14
BLOCK_SHOTS = 1 << 14
MAX_EXHAUSTIVE = 10 ** 8
LIKELIHOOD_RATIO = 1000.0


@dataclass(frozen=True)
class SurfaceLayout:
    d: int
    data_qubits: tuple[tuple[int, int], ...]
    x_checks: tuple[tuple[int, ...], ...]
    z_checks: tuple[tuple[int, ...], ...]
    logical_x: tuple[int, ...]
    logical_z: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.data_qubits)


def build_layout(d: int) -> SurfaceLayout:
    if not isinstance(d, int) or d < 1 or d % 2 == 0:
        raise DomainError(f"surface distance must be an odd positive integer, got {d!r}")
    size = 2 * d - 1
    coords = [(r, c) for r in range(size) for c in range(size) if (r + c) % 2 == 0]
    index = {rc: i for i, rc in enumerate(coords)}

    def nbrs(r: int, c: int) -> tuple[int, ...]:
        out = [index[(r + dr, c + dc)] for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1))
               if (r + dr, c + dc) in index]
        return tuple(sorted(out))

    z_checks = tuple(nbrs(r, c) for r in range(0, size, 2) for c in range(1, size, 2))
    x_checks = tuple(nbrs(r, c) for r in range(1, size, 2) for c in range(0, size, 2))
    logical_x = tuple(index[(0, c)] for c in range(0, size, 2))
    logical_z = tuple(index[(r, 0)] for r in range(0, size, 2))
    return SurfaceLayout(d, tuple(coords), x_checks, z_checks, logical_x, logical_z)


def _mask(qubits) -> int:
    out = 0
    for q in qubits:
        out |= 1 << q
    return out


class MatchingDecoder:
    """Min-weight matching decoder for one error type.

    ``checks`` are the supports of the checks that detect this error type;
    ``logical`` is the support of the observable whose flip counts as failure.
    """

    def __init__(self, n: int, checks, logical):
        self.n = n
        self.num_checks = len(checks)
        self.logical_mask = _mask(logical)
        b = self.num_checks  # boundary node
        adj: list[list[tuple[int, int]]] = [[] for _ in range(b + 1)]
        touching: list[list[int]] = [[] for _ in range(n)]
        for j, supp in enumerate(checks):
            for q in supp:
                touching[q].append(j)
        for q in range(n):
            ends = touching[q]
            if len(ends) > 2:
                raise DomainError(f"qubit {q} is in {len(ends)} checks; matching needs at most 2")
            if len(ends) == 2:
                u, v = ends
            elif len(ends) == 1:
                u, v = ends[0], b
            else:
                continue
            adj[u].append((v, q))
            adj[v].append((u, q))
        for a in adj:
            a.sort()
        nodes = b + 1
        self.dist = np.full((nodes, nodes), -1, dtype=np.int64)
        self.path = [[0] * nodes for _ in range(nodes)]
        for s in range(nodes):
            seen = {s: (None, None)}
            dq = deque([s])
            while dq:
                u = dq.popleft()
                for v, q in adj[u]:
                    if v not in seen:
                        seen[v] = (u, q)
                        dq.append(v)
            for t in seen:
                d = 0
                m = 0
                cur = t
                while cur != s:
                    prev, q = seen[cur]
                    m ^= 1 << q
                    d += 1
                    cur = prev
                self.dist[s, t] = d
                self.path[s][t] = m
        self._cache: dict[int, tuple[int, bool]] = {}
        self._lock = Lock()
        self.approximate_hits = 0

    def _match(self, defects: list[int]) -> tuple[int, bool]:
        b = self.num_checks
        k = len(defects)
        if k > EXACT_DEFECTS:
            return self._greedy(defects), True
        full = (1 << k) - 1
        cost = [0] * (full + 1)
        choice = [(-1, -1)] * (full + 1)
        inf = 1 << 60
        for mask in range(1, full + 1):
            i = (mask & -mask).bit_length() - 1
            rest = mask & ~(1 << i)
            best = cost[rest] + int(self.dist[defects[i], b])
            pick = (i, -1)
            r = rest
            while r:
                j = (r & -r).bit_length() - 1
                r &= r - 1
                c = cost[rest & ~(1 << j)] + int(self.dist[defects[i], defects[j]])
                if c < best:
                    best, pick = c, (i, j)
            cost[mask] = best if best < inf else inf
            choice[mask] = pick
        corr = 0
        mask = full
        while mask:
            i, j = choice[mask]
            if j < 0:
                corr ^= self.path[defects[i]][b]
                mask &= ~(1 << i)
            else:
                corr ^= self.path[defects[i]][defects[j]]
                mask &= ~((1 << i) | (1 << j))
        return corr, False

    def _greedy(self, defects: list[int]) -> int:
        b = self.num_checks
        left = list(defects)
        corr = 0
        while left:
            best = None
            for a in range(len(left)):
                db = int(self.dist[left[a], b])
                if best is None or db < best[0]:
                    best = (db, a, -1)
                for c in range(a + 1, len(left)):
                    dd = int(self.dist[left[a], left[c]])
                    if dd < best[0]:
                        best = (dd, a, c)
            _, a, c = best
            if c < 0:
                corr ^= self.path[left[a]][b]
                left.pop(a)
            else:
                corr ^= self.path[left[a]][left[c]]
                left.pop(c)
                left.pop(a)
        return corr

    def decode(self, syndrome: int) -> int:
        """Correction mask (bit q = data qubit q) for a packed syndrome."""
        return self.decode_with_flag(syndrome)[0]

    def decode_with_flag(self, syndrome: int) -> tuple[int, bool]:
        hit = self._cache.get(syndrome)
        if hit is not None:
            return hit
        defects = [j for j in range(self.num_checks) if (syndrome >> j) & 1]
        res = self._match(defects)
        with self._lock:
            self._cache[syndrome] = res
        return res

    def correction_flips_logical(self, syndrome: int) -> bool:
        return bool((self.decode(syndrome) & self.logical_mask).bit_count() & 1)


@lru_cache(maxsize=None)
def decoder_for(d: int, basis: str) -> MatchingDecoder:
    """Decoder for ``basis`` Z (X-type errors vs. Z checks) or X (Z-type errors vs. X checks)."""
    lay = build_layout(d)
    if basis == "Z":
        return MatchingDecoder(lay.n, lay.z_checks, lay.logical_z)
    if basis == "X":
        return MatchingDecoder(lay.n, lay.x_checks, lay.logical_x)
    raise DomainError(f"basis must be X or Z, got {basis!r}")


def _check_matrix(n: int, checks) -> np.ndarray:
    h = np.zeros((len(checks), n), dtype=np.uint8)
    for j, supp in enumerate(checks):
        h[j, list(supp)] = 1
    return h


@dataclass(frozen=True)
class McResult:
    shots: int
    failures: int
    p_hat: float
    interval_lo: float
    interval_hi: float
    seed: int
    approximate_shots: int = 0


def likelihood_interval(failures: int, shots: int, ratio: float = LIKELIHOOD_RATIO) -> tuple[float, float]:
    """``{q : L(q) / L(p_hat) >= 1/ratio}`` for a binomial likelihood."""
    if shots < 1 or not 0 <= failures <= shots:
        raise DomainError(f"invalid counts: {failures}/{shots}")
    p_hat = failures / shots
    cut = log(ratio)

    def loglik(q: float) -> float:
        out = 0.0
        if failures:
            out += failures * log(q)
        if shots - failures:
            out += (shots - failures) * log(1 - q)
        return out

    top = loglik(p_hat) if 0 < p_hat < 1 else 0.0

    def g(q: float) -> float:
        return loglik(q) - top + cut

    tiny = 1e-300
    lo = 0.0 if failures == 0 else brentq(g, tiny, p_hat, xtol=1e-300, rtol=1e-13)
    hi = 1.0 if failures == shots else brentq(g, p_hat, 1 - 1e-16, xtol=1e-300, rtol=1e-13)
    return lo, hi


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, block]))


def _run_block(d: int, p: float, basis: str, seed: int, block: int, shots: int) -> tuple[int, int]:
    lay = build_layout(d)
    dec = decoder_for(d, basis)
    checks = lay.z_checks if basis == "Z" else lay.x_checks
    h = _check_matrix(lay.n, checks)
    rng = _block_rng(seed, block)
    u = rng.random((shots, lay.n))
    # letters: [0, 1-p) I, then X, Y, Z in thirds of p
    third = p / 3
    is_x = (u >= 1 - p) & (u < 1 - p + 2 * third)          # X or Y
    is_z = u >= 1 - p + third                              # Y or Z
    err = is_x if basis == "Z" else is_z
    err = err.astype(np.uint8)
    syn = (err @ h.T) & 1
    weights = (np.uint64(1) << np.arange(h.shape[0], dtype=np.uint64))
    keys = (syn.astype(np.uint64) * weights).sum(axis=1) if h.shape[0] else np.zeros(shots, dtype=np.uint64)
    lmask = np.zeros(lay.n, dtype=np.uint8)
    lmask[list(lay.logical_z if basis == "Z" else lay.logical_x)] = 1
    err_par = (err @ lmask) & 1
    uniq, inv = np.unique(keys, return_inverse=True)
    flips = np.empty(len(uniq), dtype=np.uint8)
    approx = np.empty(len(uniq), dtype=bool)
    for i, key in enumerate(uniq.tolist()):
        corr, flag = dec.decode_with_flag(int(key))
        flips[i] = (corr & dec.logical_mask).bit_count() & 1
        approx[i] = flag
    fails = err_par ^ flips[inv]
    return int(fails.sum()), int(approx[inv].sum())


def mc_logical_error(d: int, p: float, basis: str, shots: int, seed: int,
                     workers: int = 1, block_shots: int = BLOCK_SHOTS) -> McResult:
    """Sample depolarizing errors and count logical flips of the ``basis`` observable.

    Shots are split into fixed blocks with their own counter-based streams, so
    the result depends only on ``seed``, not on ``workers``.
    """
    if shots < 1:
        raise DomainError("shots must be at least 1")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p={p} outside [0, 1]")
    if basis not in ("X", "Z"):
        raise DomainError(f"basis must be X or Z, got {basis!r}")
    decoder_for(d, basis)
    sizes = [block_shots] * (shots // block_shots)
    if shots % block_shots:
        sizes.append(shots % block_shots)
    jobs = [(d, p, basis, seed, b, s) for b, s in enumerate(sizes)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda a: _run_block(*a), jobs))
    else:
        results = [_run_block(*a) for a in jobs]
    failures = sum(r[0] for r in results)
    approx = sum(r[1] for r in results)
    lo, hi = likelihood_interval(failures, shots)
    return McResult(shots, failures, failures / shots, lo, hi, seed, approx)


def exhaustive_logical_error(d: int, p: float, max_weight: int, basis: str = "Z") -> tuple[float, float]:
    """Exact failure probability summed over every Pauli error of weight ``<= max_weight``.

    Only the part of an error seen by ``basis`` matters to the decoder, so a
    support ``S`` contributes its ``2^{|T|}`` letter patterns for each relevant
    sub-support ``T``.  Returns ``(p_L_truncated, neglected_mass)``.
    """
    lay = build_layout(d)
    n = lay.n
    count = sum(comb(n, w) * 3 ** w for w in range(max_weight + 1))
    if count > MAX_EXHAUSTIVE:
        raise CapacityError(f"{count} patterns exceed the cap of {MAX_EXHAUSTIVE}")
    dec = decoder_for(d, basis)
    checks = lay.z_checks if basis == "Z" else lay.x_checks
    cmask = [_mask(c) for c in checks]
    lmask = dec.logical_mask

    fail_cache: dict[int, bool] = {}

    def fails(t: int) -> bool:
        hit = fail_cache.get(t)
        if hit is None:
            s = 0
            for j, cm in enumerate(cmask):
                s |= ((cm & t).bit_count() & 1) << j
            hit = bool(((t ^ dec.decode(s)) & lmask).bit_count() & 1)
            fail_cache[t] = hit
        return hit

    total = 0.0
    kept = 0.0
    for w in range(max_weight + 1):
        pw = (1 - p) ** (n - w) * (p / 3) ** w
        kept += comb(n, w) * 3 ** w * pw
        if w == 0:
            continue
        nfail = 0
        # each relevant sub-support T of a size-w support has 2^|T| patterns
        for t_size in range(1, w + 1):
            mult = 2 ** t_size * comb(n - t_size, w - t_size)
            for tsupp in combinations(range(n), t_size):
                if fails(_mask(tsupp)):
                    nfail += mult
        total += nfail * pw
    return total, max(0.0, 1.0 - kept)


def failing_patterns(d: int, weight: int, basis: str = "Z") -> int:
    """Number of single-type error supports of the given weight that cause failure."""
    lay = build_layout(d)
    dec = decoder_for(d, basis)
    checks = lay.z_checks if basis == "Z" else lay.x_checks
    cmask = [_mask(c) for c in checks]
    out = 0
    for supp in combinations(range(lay.n), weight):
        t = _mask(supp)
        s = 0
        for j, cm in enumerate(cmask):
            s |= ((cm & t).bit_count() & 1) << j
        if ((t ^ dec.decode(s)) & dec.logical_mask).bit_count() & 1:
            out += 1
    return out


def a_d_count(d: int) -> int:
    from .closed_forms import a_d

    return a_d(d)
