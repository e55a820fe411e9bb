"""Pure-Python/numpy implementations of the hot kernels.

Reference semantics for the compiled versions in _cykernels.pyx: same inputs,
same outputs, same table formats. Segment factorization is vectorized; the
per-n lambda/phi assembly in sweep_segment is plain dict merging, which is the
part the compiled backend accelerates.
"""
from __future__ import annotations

from math import gcd, isqrt, log

import numpy as np

from .tables import PTable, ragged_gather_indices

BACKEND = "python"


def sieve_primes(limit: int) -> np.ndarray:
    """All primes <= limit, ascending int64."""
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    mask = np.ones(limit + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, isqrt(limit) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return np.nonzero(mask)[0].astype(np.int64)


def factor_range(lo: int, hi: int, base_primes: np.ndarray):
    """Factor every n in [lo, hi).

    Returns (offsets, fprimes, fexps): row i holds the sorted factorization of
    lo + i. base_primes must contain all primes <= sqrt(hi - 1).
    """
    if not 1 <= lo < hi:
        raise ValueError(f"factor_range requires 1 <= lo < hi, got [{lo}, {hi})")
    n = hi - lo
    residual = np.arange(lo, hi, dtype=np.int64)
    idx_parts, p_parts, e_parts = [], [], []
    root = isqrt(hi - 1)
    for p in base_primes:
        p = int(p)
        if p > root:
            break
        start = -lo % p
        idx = np.arange(start, n, p, dtype=np.int64)
        if idx.size == 0:
            continue
        # lo may itself be divisible; also drop the row of n == p when p >= lo
        # (a prime's own row comes from the residual pass, exponent handling is
        # uniform either way since residual becomes 1 only after full division)
        r = residual[idx]
        e = np.zeros(idx.size, dtype=np.int64)
        live = np.arange(idx.size)
        while live.size:
            r_live = r[live]
            div = r_live % p == 0
            live = live[div]
            if live.size == 0:
                break
            r[live] //= p
            e[live] += 1
        keep = e > 0
        residual[idx] = r
        idx_parts.append(idx[keep])
        p_parts.append(np.full(int(keep.sum()), p, dtype=np.int64))
        e_parts.append(e[keep])
    rem = residual > 1
    idx_parts.append(np.nonzero(rem)[0].astype(np.int64))
    p_parts.append(residual[rem])
    e_parts.append(np.ones(int(rem.sum()), dtype=np.int64))

    idx = np.concatenate(idx_parts)
    fprimes = np.concatenate(p_parts)
    fexps = np.concatenate(e_parts)
    order = np.argsort(idx, kind="stable")
    counts = np.bincount(idx, minlength=n)
    offsets = np.concatenate(([0], np.cumsum(counts))).astype(np.int64)
    return offsets, fprimes[order], fexps[order]


def pminus1_table(limit: int, segment_size: int = 1 << 20) -> PTable:
    """Factored p - 1 for every prime p <= limit, built segment by segment."""
    if limit < 2:
        return PTable(
            np.empty(0, dtype=np.int64),
            np.zeros(1, dtype=np.int64),
            np.empty(0, dtype=np.int64),
            np.empty(0, dtype=np.int64),
        )
    base = sieve_primes(isqrt(limit))
    primes_parts, len_parts, fp_parts, fe_parts = [], [], [], []
    for seg_lo in range(2, limit + 1, segment_size):
        lo = seg_lo - 1
        hi = min(seg_lo + segment_size, limit + 1)
        offsets, fp, fe = factor_range(lo, hi, base)
        counts = np.diff(offsets)
        nvals = np.arange(lo, hi, dtype=np.int64)
        first = np.zeros(hi - lo, dtype=np.int64)
        nonempty = counts > 0
        first[nonempty] = fp[offsets[:-1][nonempty]]
        is_p = (counts == 1) & (first == nvals) & (nvals >= seg_lo)
        pr = nvals[is_p]
        rows = pr - 1 - lo
        starts = offsets[rows]
        lens = offsets[rows + 1] - starts
        gidx = ragged_gather_indices(starts, lens)
        primes_parts.append(pr)
        len_parts.append(lens)
        fp_parts.append(fp[gidx])
        fe_parts.append(fe[gidx])
    tprimes = np.concatenate(primes_parts)
    all_lens = np.concatenate(len_parts)
    toffsets = np.concatenate(([0], np.cumsum(all_lens))).astype(np.int64)
    return PTable(tprimes, toffsets, np.concatenate(fp_parts), np.concatenate(fe_parts))


class _SweepScratch:
    """Per-process mutable state shared across segments of one sweep."""

    def __init__(self, table: PTable, q_primes, q_logs):
        self.table = table
        self.q_primes = [int(q) for q in q_primes]
        self.q_logs = [float(x) for x in q_logs]
        self.rows: dict[int, tuple] = {}
        self.hmemo: dict[int, float] = {}

    def row(self, p: int) -> tuple:
        r = self.rows.get(p)
        if r is None:
            t = self.table
            i = int(np.searchsorted(t.primes, p))
            s, e = int(t.offsets[i]), int(t.offsets[i + 1])
            r = tuple(zip(t.fprimes[s:e].tolist(), t.fexps[s:e].tolist()))
            self.rows[p] = r
        return r

    def h_of_prime(self, p: int) -> float:
        v = self.hmemo.get(p)
        if v is None:
            v = 0.0
            for r, _ in self.row(p):
                m = r - 1
                for q, lq in zip(self.q_primes, self.q_logs):
                    if q > m:
                        break
                    c = 0
                    while m % q == 0:
                        m //= q
                        c += 1
                    if c:
                        v += c * lq
            self.hmemo[p] = v
        return v


def make_sweep_scratch(table: PTable, q_primes, q_logs):
    return _SweepScratch(table, q_primes, q_logs)


def _lambda_piece_pairs(row, q: int, b: int):
    if q == 2:
        if b == 1:
            return ()
        if b == 2:
            return ((2, 1),)
        return ((2, b - 2),)
    return row if b == 1 else row + ((q, b - 1),)


def sweep_segment(lo: int, hi: int, scratch: _SweepScratch, base_primes: np.ndarray):
    """Per-n lambda, lambda(lambda), phi(phi), h and mismatch flag over [lo, hi).

    The mismatch flag marks n whose phi(phi(n)) has a prime divisor above the
    sweep cutoff that lambda(lambda(n)) lacks. lambda(lambda) | phi(phi) is
    asserted for every n.
    """
    offsets, fp, fe = factor_range(lo, hi, base_primes)
    count = hi - lo
    lam_out = np.empty(count, dtype=np.int64)
    lamlam_out = np.empty(count, dtype=np.int64)
    phiphi_out = np.empty(count, dtype=np.int64)
    h_out = np.zeros(count, dtype=np.float64)
    mism_out = np.zeros(count, dtype=bool)
    row = scratch.row
    h_of_prime = scratch.h_of_prime
    q_cut = scratch.q_primes[-1] if scratch.q_primes else 1
    fp_l = fp.tolist()
    fe_l = fe.tolist()
    off_l = offsets.tolist()
    for i in range(count):
        s, e = off_l[i], off_l[i + 1]
        if s == e:  # n == 1
            lam_out[i] = lamlam_out[i] = phiphi_out[i] = 1
            continue
        lam: dict[int, int] = {}
        phi: dict[int, int] = {}
        hval = 0.0
        for k in range(s, e):
            p, b = fp_l[k], fe_l[k]
            rp = row(p)
            for q, f in rp:
                phi[q] = phi.get(q, 0) + f
            if b > 1:
                phi[p] = phi.get(p, 0) + b - 1
            for q, f in _lambda_piece_pairs(rp, p, b):
                if lam.get(q, 0) < f:
                    lam[q] = f
            hval += h_of_prime(p)
        lamlam: dict[int, int] = {}
        for q, b in lam.items():
            for r, f in _lambda_piece_pairs(row(q), q, b):
                if lamlam.get(r, 0) < f:
                    lamlam[r] = f
        phiphi: dict[int, int] = {}
        for q, b in phi.items():
            for r, f in row(q):
                phiphi[r] = phiphi.get(r, 0) + f
            if b > 1:
                phiphi[q] = phiphi.get(q, 0) + b - 1
        lv = llv = ppv = 1
        for q, b in lam.items():
            lv *= q**b
        for q, b in lamlam.items():
            llv *= q**b
        for q, b in phiphi.items():
            ppv *= q**b
        for q, b in lamlam.items():
            if phiphi.get(q, 0) < b:
                raise AssertionError(f"lambda(lambda({lo + i})) does not divide phi(phi({lo + i}))")
        lam_out[i] = lv
        lamlam_out[i] = llv
        phiphi_out[i] = ppv
        h_out[i] = hval
        mism_out[i] = any(q > q_cut and q not in lamlam for q in phiphi)
    return lam_out, lamlam_out, phiphi_out, h_out, mism_out


def brute_census(ell: int, n: int):
    """Cycle census of x -> x^ell mod n by pointer doubling plus cycle walks."""
    if n == 1:
        return (
            np.array([1], dtype=np.int64),
            np.array([1], dtype=np.int64),
            np.array([1], dtype=np.int64),
        )
    x = np.arange(n, dtype=np.int64)
    f = np.ones(n, dtype=np.int64)
    b = x.copy()
    e = ell
    while e:
        if e & 1:
            f = f * b % n
        e >>= 1
        if e:
            b = b * b % n
    g = f.copy()
    for _ in range(int(n).bit_length()):
        g = g[g]
    cyc = np.unique(g)
    f_l = f.tolist()
    seen = np.zeros(n, dtype=bool)
    per: dict[tuple[int, int], int] = {}
    for c in cyc.tolist():
        if seen[c]:
            continue
        t = 1
        seen[c] = True
        u = f_l[c]
        while u != c:
            seen[u] = True
            u = f_l[u]
            t += 1
        d = gcd(c, n)
        key = (d, t)
        per[key] = per.get(key, 0) + 1
    items = sorted(per.items())
    ds = np.array([d for (d, _), _ in items], dtype=np.int64)
    ts = np.array([t for (_, t), _ in items], dtype=np.int64)
    cs = np.array([c for _, c in items], dtype=np.int64)
    return ds, ts, cs
