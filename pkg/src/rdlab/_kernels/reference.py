"""Pure-Python kernel implementations.

The compiled twin in _fast.pyx implements exactly the same functions with
the same semantics; tests and benchmarks/bench_kernels.py cross-check the
two backends. Keep both in sync.
"""

from __future__ import annotations

BACKEND = "reference"


def prfm_max_hammer(rfm_th: int, r1: int, trc_ps: int, trfm_ps: int,
                    trefw_ps: int) -> int:
    """Rounds the last surviving row endures against periodic refresh
    management with one preventive refresh per rfm_th bank activations.

    A round counts only if its activations and the refreshes they trigger
    still fit in the refresh-window budget (tRC per ACT, tRFM per RFM,
    nothing else).
    """
    s = 0
    n = 0
    t = 0
    prev_rfms = 0
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


def prfm_best(rfm_th: int, r1_lo: int, r1_hi: int, trc_ps: int, trfm_ps: int,
              trefw_ps: int) -> tuple[int, int]:
    """Max hammer over starting set sizes r1 in [r1_lo, r1_hi]."""
    best = 0
    best_r1 = r1_lo
    for r1 in range(r1_lo, r1_hi + 1):
        n = prfm_max_hammer(rfm_th, r1, trc_ps, trfm_ps, trefw_ps)
        if n > best:
            best = n
            best_r1 = r1
    return best, best_r1


def prac_rounds(nbor: int, slots_per_cycle: int, r1: int, aboth: int,
                trc_ps: int, trfm_ps: int, trefw_ps: int,
                charge_prehammer: bool) -> int:
    """Rounds the last surviving row endures against back-off mitigation
    that refreshes nbor rows per cycle of slots_per_cycle activations."""
    t = (aboth - 1) * r1 * trc_ps if charge_prehammer else 0
    if t > trefw_ps:
        return 0
    s = 0
    n = 0
    prev_rfms = 0
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


def prac_best(nbor: int, slots_per_cycle: int, r1_lo: int, r1_hi: int,
              aboth: int, trc_ps: int, trfm_ps: int, trefw_ps: int,
              charge_prehammer: bool) -> tuple[int, int]:
    best = 0
    best_r1 = r1_lo
    for r1 in range(r1_lo, r1_hi + 1):
        n = prac_rounds(nbor, slots_per_cycle, r1, aboth, trc_ps, trfm_ps,
                        trefw_ps, charge_prehammer)
        if n > best:
            best = n
            best_r1 = r1
    return best, best_r1


# Event kinds for the safety-oracle scan.
EV_ACT = 0
EV_REFRESH_ROW = 1
EV_COUNTER_RESET = 2

_OFFSETS = (-2, -1, 1, 2)


def oracle_scan(kinds, keys, rows_per_bank: int, nrh: int):
    """Victim-centric exposure scan over a (kind, key) event stream.

    key = bank * rows_per_bank + row. Exposure of an aggressor row is its
    activation count since the least-recently-refreshed of its blast-radius-2
    victims was refreshed. Returns
    (max_exposure, max_key, first_violation_index, exposures, mirrors)
    where exposures/mirrors map key -> final value and first_violation_index
    is the index of the first event driving some exposure to >= nrh (-1 if
    none). mirrors counts ACTs since the row's last counter-reset event
    (refresh of the row itself or an explicit reset).
    """
    acts: dict[int, int] = {}
    base: dict[int, list[int]] = {}
    mirror: dict[int, int] = {}
    max_exposure = 0
    max_key = -1
    first_violation = -1

    for i in range(len(kinds)):
        kind = kinds[i]
        key = int(keys[i])
        if kind == EV_ACT:
            a = acts.get(key, 0) + 1
            acts[key] = a
            mirror[key] = mirror.get(key, 0) + 1
            b = base.get(key)
            row = key % rows_per_bank
            if b is None:
                nvict = sum(1 for off in _OFFSETS if 0 <= row + off < rows_per_bank)
                if nvict == 0:
                    continue
                exposure = a
            else:
                lo = None
                for j, off in enumerate(_OFFSETS):
                    if 0 <= row + off < rows_per_bank:
                        v = b[j]
                        if lo is None or v < lo:
                            lo = v
                exposure = a if lo is None else a - lo
            if exposure > max_exposure:
                max_exposure = exposure
                max_key = key
            if exposure >= nrh and first_violation < 0:
                first_violation = i
        elif kind == EV_REFRESH_ROW:
            row = key % rows_per_bank
            bank_base = key - row
            for off in _OFFSETS:
                arow = row + off
                if 0 <= arow < rows_per_bank:
                    akey = bank_base + arow
                    ab = base.get(akey)
                    if ab is None:
                        ab = [0, 0, 0, 0]
                        base[akey] = ab
                    # victim sits at offset -off from the aggressor
                    ab[_OFFSETS.index(-off)] = acts.get(akey, 0)
        elif kind == EV_COUNTER_RESET:
            mirror[key] = 0
        else:
            raise ValueError(f"unknown oracle event kind {kind}")

    exposures: dict[int, int] = {}
    mirrors: dict[int, int] = {}
    for key, a in acts.items():
        row = key % rows_per_bank
        b = base.get(key)
        lo = None
        if b is not None:
            for j, off in enumerate(_OFFSETS):
                if 0 <= row + off < rows_per_bank:
                    v = b[j]
                    if lo is None or v < lo:
                        lo = v
        if not any(0 <= row + off < rows_per_bank for off in _OFFSETS):
            exposures[key] = 0
        else:
            exposures[key] = a if lo is None else a - lo
        mirrors[key] = mirror.get(key, 0)
    return max_exposure, max_key, first_violation, exposures, mirrors
