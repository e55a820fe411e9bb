# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels: segment factorization, p-1 tables, sweep assembly, censuses.

Mirrors _pykernels exactly (same signatures, same outputs); see that module for
the reference semantics.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport log as clog
from libc.math cimport isnan, NAN

cnp.import_array()

BACKEND = "cython"

ctypedef cnp.int64_t i64
ctypedef cnp.uint8_t u8

from .tables import PTable


def sieve_primes(limit):
    """All primes <= limit, ascending int64."""
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    cdef i64 lim = limit
    cdef cnp.ndarray[u8, ndim=1] mask_arr = np.ones(lim + 1, dtype=np.uint8)
    cdef u8[::1] mask = mask_arr
    cdef i64 i, j, count
    mask[0] = 0
    mask[1] = 0
    i = 2
    while i * i <= lim:
        if mask[i]:
            j = i * i
            while j <= lim:
                mask[j] = 0
                j += i
        i += 1
    count = 0
    for i in range(lim + 1):
        if mask[i]:
            count += 1
    cdef cnp.ndarray[i64, ndim=1] out = np.empty(count, dtype=np.int64)
    cdef i64[::1] ov = out
    j = 0
    for i in range(lim + 1):
        if mask[i]:
            ov[j] = i
            j += 1
    return out


def factor_range(lo, hi, base_primes):
    """Factor every n in [lo, hi); returns (offsets, fprimes, fexps)."""
    if not 1 <= lo < hi:
        raise ValueError(f"factor_range requires 1 <= lo < hi, got [{lo}, {hi})")
    cdef i64 clo = lo, chi = hi
    cdef i64 n = chi - clo
    cdef i64[::1] base = np.ascontiguousarray(base_primes, dtype=np.int64)
    cdef cnp.ndarray[i64, ndim=1] res_arr = np.arange(clo, chi, dtype=np.int64)
    cdef i64[::1] res = res_arr
    cdef cnp.ndarray[i64, ndim=1] counts_arr = np.zeros(n, dtype=np.int64)
    cdef i64[::1] counts = counts_arr
    cdef i64 nb = base.shape[0]
    cdef i64 bi, p, start, i, v
    cdef i64 root_cap = chi - 1

    # pass A: count factor entries per n
    for bi in range(nb):
        p = base[bi]
        if p * p > root_cap:
            break
        start = (p - clo % p) % p
        for i in range(start, n, p):
            v = res[i]
            while v % p == 0:
                v //= p
            res[i] = v
            counts[i] += 1
    for i in range(n):
        if res[i] > 1:
            counts[i] += 1

    cdef cnp.ndarray[i64, ndim=1] offsets_arr = np.empty(n + 1, dtype=np.int64)
    cdef i64[::1] offsets = offsets_arr
    cdef i64 total = 0
    offsets[0] = 0
    for i in range(n):
        total += counts[i]
        offsets[i + 1] = total

    cdef cnp.ndarray[i64, ndim=1] fp_arr = np.empty(total, dtype=np.int64)
    cdef cnp.ndarray[i64, ndim=1] fe_arr = np.empty(total, dtype=np.int64)
    cdef i64[::1] fp = fp_arr
    cdef i64[::1] fe = fe_arr
    cdef cnp.ndarray[i64, ndim=1] cur_arr = offsets_arr[:n].copy()
    cdef i64[::1] cur = cur_arr
    cdef i64 e, t

    # pass B: divide again and place entries in order
    for i in range(n):
        res[i] = clo + i
    for bi in range(nb):
        p = base[bi]
        if p * p > root_cap:
            break
        start = (p - clo % p) % p
        for i in range(start, n, p):
            v = res[i]
            e = 0
            while v % p == 0:
                v //= p
                e += 1
            res[i] = v
            t = cur[i]
            fp[t] = p
            fe[t] = e
            cur[i] = t + 1
    for i in range(n):
        if res[i] > 1:
            t = cur[i]
            fp[t] = res[i]
            fe[t] = 1
            cur[i] = t + 1
    return offsets_arr, fp_arr, fe_arr


def pminus1_table(limit, segment_size=1 << 20):
    """Factored p - 1 for every prime p <= limit."""
    if limit < 2:
        return PTable(
            np.empty(0, dtype=np.int64),
            np.zeros(1, dtype=np.int64),
            np.empty(0, dtype=np.int64),
            np.empty(0, dtype=np.int64),
        )
    cdef i64 lim = limit, seg = segment_size
    cdef i64 r = 1
    while (r + 1) * (r + 1) <= lim:
        r += 1
    base_arr = sieve_primes(r)
    primes_parts = []
    len_parts = []
    fp_parts = []
    fe_parts = []
    cdef i64 seg_lo, lo, hi, i, n, s, e, np_count, ne_count, j, k
    cdef i64[::1] off, fp, fe
    cdef i64[::1] cp, cl, cfp, cfe
    seg_lo = 2
    while seg_lo <= lim:
        lo = seg_lo - 1
        hi = seg_lo + seg
        if hi > lim + 1:
            hi = lim + 1
        offsets_arr, fp_arr, fe_arr = factor_range(lo, hi, base_arr)
        off = offsets_arr
        fp = fp_arr
        fe = fe_arr
        n = hi - lo
        np_count = 0
        ne_count = 0
        for i in range(seg_lo - lo, n):
            if off[i + 1] - off[i] == 1 and fe[off[i]] == 1 and fp[off[i]] == lo + i:
                np_count += 1
                ne_count += off[i] - off[i - 1]
        cp_arr = np.empty(np_count, dtype=np.int64)
        cl_arr = np.empty(np_count, dtype=np.int64)
        cfp_arr = np.empty(ne_count, dtype=np.int64)
        cfe_arr = np.empty(ne_count, dtype=np.int64)
        cp = cp_arr
        cl = cl_arr
        cfp = cfp_arr
        cfe = cfe_arr
        j = 0
        k = 0
        for i in range(seg_lo - lo, n):
            if off[i + 1] - off[i] == 1 and fe[off[i]] == 1 and fp[off[i]] == lo + i:
                cp[j] = lo + i
                cl[j] = off[i] - off[i - 1]
                j += 1
                for s in range(off[i - 1], off[i]):
                    cfp[k] = fp[s]
                    cfe[k] = fe[s]
                    k += 1
        primes_parts.append(cp_arr)
        len_parts.append(cl_arr)
        fp_parts.append(cfp_arr)
        fe_parts.append(cfe_arr)
        seg_lo = hi
    tprimes = np.concatenate(primes_parts)
    all_lens = np.concatenate(len_parts)
    toffsets = np.concatenate(([0], np.cumsum(all_lens))).astype(np.int64)
    return PTable(tprimes, toffsets, np.concatenate(fp_parts), np.concatenate(fe_parts))


cdef inline i64 _bsearch(i64[::1] arr, i64 key) nogil:
    cdef i64 lo = 0, hi = arr.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if arr[mid] < key:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline int _merge(i64 *ap, i64 *ae, int alen,
                       i64 *bp, i64 *be, int blen,
                       i64 *outp, i64 *oute, bint add) nogil:
    cdef int i = 0, j = 0, k = 0
    while i < alen and j < blen:
        if ap[i] < bp[j]:
            outp[k] = ap[i]
            oute[k] = ae[i]
            i += 1
        elif ap[i] > bp[j]:
            outp[k] = bp[j]
            oute[k] = be[j]
            j += 1
        else:
            outp[k] = ap[i]
            if add:
                oute[k] = ae[i] + be[j]
            else:
                oute[k] = ae[i] if ae[i] >= be[j] else be[j]
            i += 1
            j += 1
        k += 1
    while i < alen:
        outp[k] = ap[i]
        oute[k] = ae[i]
        i += 1
        k += 1
    while j < blen:
        outp[k] = bp[j]
        oute[k] = be[j]
        j += 1
        k += 1
    return k


cdef enum:
    CAP = 72


cdef class CySweepScratch:
    """Per-process state for sweep segments: table views plus the H(p) memo."""
    cdef i64[::1] tp
    cdef i64[::1] toff
    cdef i64[::1] tfp
    cdef i64[::1] tfe
    cdef i64[::1] qprimes
    cdef double[::1] qlogs
    cdef double[::1] hmemo
    cdef public object table

    def __init__(self, table, q_primes, q_logs):
        self.table = table
        self.tp = np.ascontiguousarray(table.primes, dtype=np.int64)
        self.toff = np.ascontiguousarray(table.offsets, dtype=np.int64)
        self.tfp = np.ascontiguousarray(table.fprimes, dtype=np.int64)
        self.tfe = np.ascontiguousarray(table.fexps, dtype=np.int64)
        self.qprimes = np.ascontiguousarray(q_primes, dtype=np.int64)
        self.qlogs = np.ascontiguousarray(q_logs, dtype=np.float64)
        self.hmemo = np.full(self.tp.shape[0], NAN, dtype=np.float64)

    cdef double _h_of_prime(self, i64 p) nogil:
        cdef i64 ri = _bsearch(self.tp, p)
        cdef double v = self.hmemo[ri]
        cdef i64 s, r, m, q
        cdef int qi, c
        if isnan(v):
            v = 0.0
            for s in range(self.toff[ri], self.toff[ri + 1]):
                r = self.tfp[s]
                m = r - 1
                for qi in range(self.qprimes.shape[0]):
                    q = self.qprimes[qi]
                    if q > m:
                        break
                    c = 0
                    while m % q == 0:
                        m //= q
                        c += 1
                    if c:
                        v += c * self.qlogs[qi]
            self.hmemo[ri] = v
        return v


def make_sweep_scratch(table, q_primes, q_logs):
    return CySweepScratch(table, q_primes, q_logs)


def sweep_segment(lo, hi, CySweepScratch scratch, base_primes):
    """Per-n lambda, lambda(lambda), phi(phi), h and mismatch flag over [lo, hi)."""
    offsets_arr, fp_arr, fe_arr = factor_range(lo, hi, base_primes)
    cdef i64[::1] off = offsets_arr
    cdef i64[::1] fp = fp_arr
    cdef i64[::1] fe = fe_arr
    cdef i64 clo = lo, chi = hi
    cdef i64 count = chi - clo
    lam_out_arr = np.empty(count, dtype=np.int64)
    lamlam_out_arr = np.empty(count, dtype=np.int64)
    phiphi_out_arr = np.empty(count, dtype=np.int64)
    h_out_arr = np.zeros(count, dtype=np.float64)
    mism_out_arr = np.zeros(count, dtype=np.uint8)
    cdef i64[::1] lam_out = lam_out_arr
    cdef i64[::1] lamlam_out = lamlam_out_arr
    cdef i64[::1] phiphi_out = phiphi_out_arr
    cdef double[::1] h_out = h_out_arr
    cdef u8[::1] mism_out = mism_out_arr

    cdef i64 lam_p[CAP]
    cdef i64 lam_e[CAP]
    cdef i64 phi_p[CAP]
    cdef i64 phi_e[CAP]
    cdef i64 ll_p[CAP]
    cdef i64 ll_e[CAP]
    cdef i64 pp_p[CAP]
    cdef i64 pp_e[CAP]
    cdef i64 tmp_p[CAP]
    cdef i64 tmp_e[CAP]
    cdef i64 pc_p[CAP]
    cdef i64 pc_e[CAP]
    cdef int lam_len, phi_len, ll_len, pp_len, pc_len
    cdef i64 i, k, p, b, ri, s, q, qcut, bad
    cdef i64 lv, llv, ppv
    cdef double hval
    cdef int ii, jj

    qcut = scratch.qprimes[scratch.qprimes.shape[0] - 1] if scratch.qprimes.shape[0] else 1
    bad = -1
    with nogil:
        for i in range(count):
            if off[i] == off[i + 1]:  # n == 1
                lam_out[i] = 1
                lamlam_out[i] = 1
                phiphi_out[i] = 1
                continue
            lam_len = 0
            phi_len = 0
            hval = 0.0
            for k in range(off[i], off[i + 1]):
                p = fp[k]
                b = fe[k]
                ri = _bsearch(scratch.tp, p)
                # phi piece: row(p) then p^(b-1)
                pc_len = 0
                for s in range(scratch.toff[ri], scratch.toff[ri + 1]):
                    pc_p[pc_len] = scratch.tfp[s]
                    pc_e[pc_len] = scratch.tfe[s]
                    pc_len += 1
                if b > 1:
                    pc_p[pc_len] = p
                    pc_e[pc_len] = b - 1
                    pc_len += 1
                phi_len = _merge(phi_p, phi_e, phi_len, pc_p, pc_e, pc_len, tmp_p, tmp_e, True)
                for ii in range(phi_len):
                    phi_p[ii] = tmp_p[ii]
                    phi_e[ii] = tmp_e[ii]
                # lambda piece; for odd p it equals the phi piece already in pc
                if p == 2:
                    pc_len = 0
                    if b == 2:
                        pc_p[0] = 2
                        pc_e[0] = 1
                        pc_len = 1
                    elif b > 2:
                        pc_p[0] = 2
                        pc_e[0] = b - 2
                        pc_len = 1
                lam_len = _merge(lam_p, lam_e, lam_len, pc_p, pc_e, pc_len, tmp_p, tmp_e, False)
                for ii in range(lam_len):
                    lam_p[ii] = tmp_p[ii]
                    lam_e[ii] = tmp_e[ii]
                hval += scratch._h_of_prime(p)
            # lambda(lambda): fold lambda pieces of each lam entry
            ll_len = 0
            for ii in range(lam_len):
                q = lam_p[ii]
                b = lam_e[ii]
                if q == 2:
                    pc_len = 0
                    if b == 2:
                        pc_p[0] = 2
                        pc_e[0] = 1
                        pc_len = 1
                    elif b > 2:
                        pc_p[0] = 2
                        pc_e[0] = b - 2
                        pc_len = 1
                else:
                    ri = _bsearch(scratch.tp, q)
                    pc_len = 0
                    for s in range(scratch.toff[ri], scratch.toff[ri + 1]):
                        pc_p[pc_len] = scratch.tfp[s]
                        pc_e[pc_len] = scratch.tfe[s]
                        pc_len += 1
                    if b > 1:
                        pc_p[pc_len] = q
                        pc_e[pc_len] = b - 1
                        pc_len += 1
                ll_len = _merge(ll_p, ll_e, ll_len, pc_p, pc_e, pc_len, tmp_p, tmp_e, False)
                for jj in range(ll_len):
                    ll_p[jj] = tmp_p[jj]
                    ll_e[jj] = tmp_e[jj]
            # phi(phi): fold phi pieces of each phi entry
            pp_len = 0
            for ii in range(phi_len):
                q = phi_p[ii]
                b = phi_e[ii]
                ri = _bsearch(scratch.tp, q)
                pc_len = 0
                for s in range(scratch.toff[ri], scratch.toff[ri + 1]):
                    pc_p[pc_len] = scratch.tfp[s]
                    pc_e[pc_len] = scratch.tfe[s]
                    pc_len += 1
                if b > 1:
                    pc_p[pc_len] = q
                    pc_e[pc_len] = b - 1
                    pc_len += 1
                pp_len = _merge(pp_p, pp_e, pp_len, pc_p, pc_e, pc_len, tmp_p, tmp_e, True)
                for jj in range(pp_len):
                    pp_p[jj] = tmp_p[jj]
                    pp_e[jj] = tmp_e[jj]
            lv = 1
            for ii in range(lam_len):
                for jj in range(<int> lam_e[ii]):
                    lv *= lam_p[ii]
            llv = 1
            for ii in range(ll_len):
                for jj in range(<int> ll_e[ii]):
                    llv *= ll_p[ii]
            ppv = 1
            for ii in range(pp_len):
                for jj in range(<int> pp_e[ii]):
                    ppv *= pp_p[ii]
            # hard check: lambda(lambda(n)) | phi(phi(n)), exponentwise
            jj = 0
            for ii in range(ll_len):
                while jj < pp_len and pp_p[jj] < ll_p[ii]:
                    jj += 1
                if jj >= pp_len or pp_p[jj] != ll_p[ii] or pp_e[jj] < ll_e[ii]:
                    bad = clo + i
                    break
            if bad >= 0:
                break
            # mismatch: some prime > qcut divides phi(phi) but not lambda(lambda)
            jj = 0
            for ii in range(pp_len):
                if pp_p[ii] <= qcut:
                    continue
                while jj < ll_len and ll_p[jj] < pp_p[ii]:
                    jj += 1
                if jj >= ll_len or ll_p[jj] != pp_p[ii]:
                    mism_out[i] = 1
                    break
            lam_out[i] = lv
            lamlam_out[i] = llv
            phiphi_out[i] = ppv
            h_out[i] = hval
    if bad >= 0:
        raise AssertionError(f"lambda(lambda({bad})) does not divide phi(phi({bad}))")
    return lam_out_arr, lamlam_out_arr, phiphi_out_arr, h_out_arr, mism_out_arr.view(bool)


def brute_census(ell, n):
    """Cycle census of x -> x^ell mod n by iterative coloring."""
    if n == 1:
        one = np.array([1], dtype=np.int64)
        return one, one.copy(), one.copy()
    cdef i64 cn = n
    cdef cnp.ndarray[i64, ndim=1] nxt_arr = np.empty(cn, dtype=np.int64)
    cdef i64[::1] nxt = nxt_arr
    cdef i64 i, b, e, acc, sq
    cdef i64 cell = ell
    with nogil:
        for i in range(cn):
            acc = 1
            sq = i
            e = cell
            while e:
                if e & 1:
                    acc = acc * sq % cn
                e >>= 1
                if e:
                    sq = sq * sq % cn
            nxt[i] = acc
    cdef cnp.ndarray[u8, ndim=1] state_arr = np.zeros(cn, dtype=np.uint8)
    cdef u8[::1] state = state_arr
    cdef cnp.ndarray[i64, ndim=1] path_arr = np.empty(cn, dtype=np.int64)
    cdef i64[::1] path = path_arr
    cdef i64 s, u, plen, t, v, d, a, bb
    per = {}
    for s in range(cn):
        if state[s]:
            continue
        u = s
        plen = 0
        while state[u] == 0:
            state[u] = 1
            path[plen] = u
            plen += 1
            u = nxt[u]
        if state[u] == 1:
            t = 1
            v = nxt[u]
            while v != u:
                t += 1
                v = nxt[v]
            a = u
            bb = cn
            while bb:
                a, bb = bb, a % bb
            d = a
            key = (d, t)
            per[key] = per.get(key, 0) + 1
        for v in range(plen):
            state[path[v]] = 2
    items = sorted(per.items())
    ds = np.array([k[0] for k, _ in items], dtype=np.int64)
    ts = np.array([k[1] for k, _ in items], dtype=np.int64)
    cs = np.array([c for _, c in items], dtype=np.int64)
    return ds, ts, cs
