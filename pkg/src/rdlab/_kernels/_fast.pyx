# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
# distutils: language = c++
"""Compiled kernel implementations; semantics identical to reference.py."""

from cython.operator cimport dereference as deref
from libcpp.unordered_map cimport unordered_map
from libcpp.vector cimport vector

import numpy as np

cimport numpy as cnp

BACKEND = "fast"

EV_ACT = 0
EV_REFRESH_ROW = 1
EV_COUNTER_RESET = 2


cpdef long long prfm_max_hammer(long long rfm_th, long long r1,
                                long long trc_ps, long long trfm_ps,
                                long long trefw_ps):
    cdef long long s = 0, n = 0, t = 0, prev_rfms = 0, ri, rfms
    while True:
        ri = r1 - s // rfm_th
        if ri <= 0:
            break
        s += ri
        rfms = s // rfm_th
        t += ri * trc_ps + (rfms - prev_rfms) * trfm_ps
        prev_rfms = rfms
        if t > trefw_ps:
            break
        n += 1
    return n


cpdef tuple prfm_best(long long rfm_th, long long r1_lo, long long r1_hi,
                      long long trc_ps, long long trfm_ps, long long trefw_ps):
    cdef long long best = 0, best_r1 = r1_lo, r1, n
    for r1 in range(r1_lo, r1_hi + 1):
        n = prfm_max_hammer(rfm_th, r1, trc_ps, trfm_ps, trefw_ps)
        if n > best:
            best = n
            best_r1 = r1
    return best, best_r1


cpdef long long prac_rounds(long long nbor, long long slots_per_cycle,
                            long long r1, long long aboth,
                            long long trc_ps, long long trfm_ps,
                            long long trefw_ps, bint charge_prehammer):
    cdef long long t = (aboth - 1) * r1 * trc_ps if charge_prehammer else 0
    cdef long long s = 0, n = 0, prev_rfms = 0, ri, rfms
    if t > trefw_ps:
        return 0
    while True:
        ri = r1 - nbor * (s // slots_per_cycle)
        if ri <= 0:
            break
        s += ri
        rfms = nbor * (s // slots_per_cycle)
        t += ri * trc_ps + (rfms - prev_rfms) * trfm_ps
        prev_rfms = rfms
        if t > trefw_ps:
            break
        n += 1
    return n


cpdef tuple prac_best(long long nbor, long long slots_per_cycle,
                      long long r1_lo, long long r1_hi, long long aboth,
                      long long trc_ps, long long trfm_ps, long long trefw_ps,
                      bint charge_prehammer):
    cdef long long best = 0, best_r1 = r1_lo, r1, n
    for r1 in range(r1_lo, r1_hi + 1):
        n = prac_rounds(nbor, slots_per_cycle, r1, aboth, trc_ps, trfm_ps,
                        trefw_ps, charge_prehammer)
        if n > best:
            best = n
            best_r1 = r1
    return best, best_r1


cdef inline int _slot_of(long long off):
    # offsets (-2, -1, 1, 2) -> slots (0, 1, 2, 3)
    if off == -2:
        return 0
    if off == -1:
        return 1
    if off == 1:
        return 2
    return 3


cdef long long _lookup(unordered_map[long long, long long]& index,
                       vector[long long]& acts, vector[long long]& mirror,
                       vector[long long]& base, vector[char]& has_base,
                       vector[long long]& key_of, long long key):
    cdef unordered_map[long long, long long].iterator it = index.find(key)
    cdef long long idx
    if it != index.end():
        return deref(it).second
    idx = <long long> acts.size()
    index[key] = idx
    acts.push_back(0)
    mirror.push_back(0)
    has_base.push_back(0)
    key_of.push_back(key)
    base.push_back(0); base.push_back(0); base.push_back(0); base.push_back(0)
    return idx


def oracle_scan(kinds_arr, keys_arr, long long rows_per_bank, long long nrh):
    cdef cnp.int8_t[::1] kinds = np.ascontiguousarray(kinds_arr, dtype=np.int8)
    cdef cnp.int64_t[::1] keys = np.ascontiguousarray(keys_arr, dtype=np.int64)
    cdef unordered_map[long long, long long] index
    cdef vector[long long] acts, mirror, key_of, base
    cdef vector[char] has_base
    cdef long long max_exposure = 0, max_key = -1, first_violation = -1
    cdef long long i, n = kinds.shape[0]
    cdef long long key, row, bank_base, a, exposure, lo, idx, aidx, akey, arow, v, k2
    cdef int kind, j, have, nvict
    cdef long long offs[4]
    offs[0] = -2; offs[1] = -1; offs[2] = 1; offs[3] = 2

    for i in range(n):
        kind = kinds[i]
        key = keys[i]
        idx = _lookup(index, acts, mirror, base, has_base, key_of, key)
        row = key % rows_per_bank
        if kind == EV_ACT:
            acts[idx] += 1
            mirror[idx] += 1
            a = acts[idx]
            nvict = 0
            for j in range(4):
                arow = row + offs[j]
                if 0 <= arow < rows_per_bank:
                    nvict += 1
            if nvict == 0:
                continue
            if not has_base[idx]:
                exposure = a
            else:
                have = 0
                lo = 0
                for j in range(4):
                    arow = row + offs[j]
                    if 0 <= arow < rows_per_bank:
                        v = base[4 * idx + j]
                        if (not have) or v < lo:
                            lo = v
                            have = 1
                exposure = a - lo if have else a
            if exposure > max_exposure:
                max_exposure = exposure
                max_key = key
            if exposure >= nrh and first_violation < 0:
                first_violation = i
        elif kind == EV_REFRESH_ROW:
            bank_base = key - row
            for j in range(4):
                arow = row + offs[j]
                if 0 <= arow < rows_per_bank:
                    akey = bank_base + arow
                    aidx = _lookup(index, acts, mirror, base, has_base,
                                   key_of, akey)
                    has_base[aidx] = 1
                    base[4 * aidx + _slot_of(-offs[j])] = acts[aidx]
        elif kind == EV_COUNTER_RESET:
            mirror[idx] = 0
        else:
            raise ValueError(f"unknown oracle event kind {kind}")

    exposures = {}
    mirrors = {}
    for k2 in range(<long long> key_of.size()):
        if acts[k2] <= 0:
            continue
        key = key_of[k2]
        row = key % rows_per_bank
        nvict = 0
        for j in range(4):
            arow = row + offs[j]
            if 0 <= arow < rows_per_bank:
                nvict += 1
        if nvict == 0:
            exposure = 0
        elif not has_base[k2]:
            exposure = acts[k2]
        else:
            have = 0
            lo = 0
            for j in range(4):
                arow = row + offs[j]
                if 0 <= arow < rows_per_bank:
                    v = base[4 * k2 + j]
                    if (not have) or v < lo:
                        lo = v
                        have = 1
            exposure = acts[k2] - lo if have else acts[k2]
        exposures[key] = exposure
        mirrors[key] = mirror[k2]
    return max_exposure, max_key, first_violation, exposures, mirrors
