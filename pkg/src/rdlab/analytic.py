"""Closed-form security and bandwidth-consumption analysis.

Implements the balanced multi-row ("wave") attack recurrences for periodic
refresh management and for back-off counting, the concurrent-update bound,
tracking-table sizing, and the exact preventive-refresh bandwidth fractions,
plus an executable worst-case verifier that replays candidate schedules
against the device model.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import _kernels
from .timing import TimingParams, make_timing

DEFAULT_R1_MAX = 65536  # one bank's worth of decoy rows


# ---------------------------------------------------------------------------
# Recurrences

def prfm_rounds(rfm_th: int, r1_size: int) -> list[int]:
    """Surviving-set trajectory against one preventive refresh per rfm_th
    bank activations. Includes the terminal non-positive element (clamped
    at zero)."""
    if rfm_th < 1 or r1_size < 1:
        raise ValueError("rfm_th and r1_size must be >= 1")
    seq = [r1_size]
    s = r1_size
    while seq[-1] > 0:
        ri = r1_size - s // rfm_th
        seq.append(max(ri, 0))
        s += max(ri, 0)
    return seq


def prac_slots_per_cycle(n_bo_a: int, timing: TimingParams) -> int:
    """Attacker-visible activation slots per back-off cycle: the delay
    activations plus the whole-activation capacity of the normal-traffic
    window (floor division; integer slots)."""
    return n_bo_a + timing.tABOact // timing.tRC


def prac_rounds(a_both: int, n_bo_r: int, n_bo_a: int, r1_size: int,
                timing: TimingParams) -> list[int]:
    """Surviving-set trajectory against back-off mitigation refreshing
    n_bo_r rows per cycle of prac_slots_per_cycle activations."""
    if min(a_both, n_bo_r, n_bo_a, r1_size) < 1:
        raise ValueError("counts must be >= 1")
    d = prac_slots_per_cycle(n_bo_a, timing)
    seq = [r1_size]
    s = r1_size
    while seq[-1] > 0:
        ri = r1_size - n_bo_r * (s // d)
        seq.append(max(ri, 0))
        s += max(ri, 0)
    return seq


# ---------------------------------------------------------------------------
# Max-hammer extraction (budgeted by the refresh window)

def prfm_max_hammer(rfm_th: int, r1_size: int, timing: TimingParams) -> int:
    """Hammer count of the last surviving row, within the refresh-window
    time budget (tRC per activation, tRFM per preventive refresh)."""
    return _kernels.prfm_max_hammer(rfm_th, r1_size, timing.tRC, timing.tRFM,
                                    timing.tREFW)


def prfm_best(rfm_th: int, timing: TimingParams,
              r1_max: int = DEFAULT_R1_MAX) -> tuple[int, int]:
    """(max hammer, worst starting set size) over r1 in [1, r1_max]."""
    return _kernels.prfm_best(rfm_th, 1, r1_max, timing.tRC, timing.tRFM,
                              timing.tREFW)


def prac_max_hammer(a_both: int, n_bo_r: int, n_bo_a: int, r1_size: int,
                    timing: TimingParams, inflight: bool = False,
                    charge_prehammer: bool = True) -> int:
    """Max hammer = threshold preparation + surviving rounds, optionally
    plus the in-flight increments one row can absorb during a recovery."""
    d = prac_slots_per_cycle(n_bo_a, timing)
    rounds = _kernels.prac_rounds(n_bo_r, d, r1_size, a_both, timing.tRC,
                                  timing.tRFM, timing.tREFW, charge_prehammer)
    extra = (n_bo_r - 1) if inflight else 0
    return (a_both - 1) + rounds + extra


def prac_best(a_both: int, n_bo_r: int, n_bo_a: int, timing: TimingParams,
              r1_max: int = DEFAULT_R1_MAX, inflight: bool = False,
              charge_prehammer: bool = True) -> tuple[int, int]:
    d = prac_slots_per_cycle(n_bo_a, timing)
    rounds, r1 = _kernels.prac_best(n_bo_r, d, 1, r1_max, a_both, timing.tRC,
                                    timing.tRFM, timing.tREFW, charge_prehammer)
    extra = (n_bo_r - 1) if inflight else 0
    return (a_both - 1) + rounds + extra, r1


# ---------------------------------------------------------------------------
# Concurrent-update (no-delay) bound and table sizing

def chronus_bound(n_bo: int, trc, tabo_act) -> int:
    """Maximum activation count under the no-delay back-off policy:
    threshold plus the normal-traffic window capacity."""
    if n_bo < 1:
        raise ValueError("n_bo must be >= 1")
    return n_bo + int(tabo_act // trc)


def att_min_size(trc, tabo_act) -> int:
    """Minimum tracking-table capacity: normal-window activations + 1."""
    if trc <= 0:
        raise ValueError("trc must be positive")
    return int(tabo_act // trc) + 1


# ---------------------------------------------------------------------------
# Preventive-refresh bandwidth consumption (exact rationals)

def dbc_prac(a_both: int, n_bo_r: int, trfm, trc) -> Fraction:
    """Fraction of time an attacker can keep a bank inside refresh windows:
    (n_bo_r*tRFM) / (n_bo_r*tRFM + a_both*tRC)."""
    if min(a_both, n_bo_r) < 1 or trfm <= 0 or trc <= 0:
        raise ValueError("all parameters must be positive")
    num = Fraction(n_bo_r) * Fraction(trfm)
    return num / (num + Fraction(a_both) * Fraction(trc))


def dbc_chronus(n_bo: int, trfm, trc) -> Fraction:
    """Single-refresh-per-back-off instance of the same fraction."""
    return dbc_prac(n_bo, 1, trfm, trc)


# ---------------------------------------------------------------------------
# Secure-configuration search

@dataclass(frozen=True)
class SecureConfig:
    mechanism: str
    params: dict
    max_hammer: int

    def __iter__(self):  # ergonomic unpacking in tests
        yield from (self.mechanism, self.params, self.max_hammer)


_SECURE_CACHE: dict = {}


def find_secure_config(mechanism: str, n_rh: int, timing: TimingParams | None = None,
                       n_bo_r: int | None = None, r1_max: int = DEFAULT_R1_MAX,
                       inflight: bool = False) -> SecureConfig | None:
    """Least-aggressive parameterization whose worst-case hammer count over
    all starting set sizes stays below n_rh; None if no such config exists.

    Mechanisms: 'prfm' (largest secure rfm_th), 'prac-N' (largest secure
    back-off threshold, delay activations tied to N), 'chronus' (largest
    secure back-off threshold, capped by the 8-bit counter).
    """
    mech = mechanism.lower()
    key = (mech, n_rh, timing, n_bo_r, r1_max, inflight)
    if key in _SECURE_CACHE:
        return _SECURE_CACHE[key]
    found = _find_secure_config(mech, n_rh, timing, n_bo_r, r1_max, inflight)
    _SECURE_CACHE[key] = found
    return found


def _find_secure_config(mech, n_rh, timing, n_bo_r, r1_max, inflight):
    if mech == "prfm":
        timing = timing or make_timing(prac_enabled=False)
        # max hammer is monotone non-decreasing in the threshold (a larger
        # threshold mitigates less often), so binary-search the boundary
        lo, hi = 1, n_rh  # max hammer >= rfm_th, so rfm_th >= n_rh is out
        best = None
        if prfm_best(lo, timing, r1_max)[0] >= n_rh:
            return None
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if prfm_best(mid, timing, r1_max)[0] < n_rh:
                lo = mid
            else:
                hi = mid - 1
        mh, _ = prfm_best(lo, timing, r1_max)
        best = SecureConfig("prfm", {"rfm_th": lo}, mh)
        return best
    if mech.startswith("prac"):
        timing = timing or make_timing(prac_enabled=True)
        if n_bo_r is None:
            n_bo_r = int(mech.split("-")[1]) if "-" in mech else 4
        n_bo_a = n_bo_r  # the standard ties the delay count to the RFM count
        rounds, _ = prac_best(1, n_bo_r, n_bo_a, timing, r1_max, inflight=False)
        # max_hammer(a_both) = (a_both - 1) + rounds(+extras); rounds is
        # independent of a_both except through the preparation budget, so the
        # largest secure threshold follows directly.
        extra = (n_bo_r - 1) if inflight else 0
        a_both = n_rh - rounds - extra
        if a_both < 1:
            return None
        mh, _ = prac_best(a_both, n_bo_r, n_bo_a, timing, r1_max,
                          inflight=inflight)
        while mh >= n_rh:
            # the preparation budget can only lower the round count; back off
            # if the direct formula was optimistic
            a_both -= 1
            if a_both < 1:
                return None
            mh, _ = prac_best(a_both, n_bo_r, n_bo_a, timing, r1_max,
                              inflight=inflight)
        return SecureConfig(f"prac-{n_bo_r}",
                            {"a_both": a_both, "n_bo_r": n_bo_r,
                             "n_bo_a": n_bo_a}, mh)
    if mech == "chronus":
        timing = timing or make_timing(prac_enabled=False)
        a_normal = timing.a_normal()
        n_bo = min(256, n_rh - a_normal - 1)
        if n_bo < 1:
            return None
        return SecureConfig("chronus", {"n_bo": n_bo},
                            chronus_bound(n_bo, timing.tRC, timing.tABOact))
    raise ValueError(f"unknown mechanism {mechanism!r}")


# ---------------------------------------------------------------------------
# Sweep tables (consumed by the CLI and the plots bundle)

def sweep_prfm(timing: TimingParams, th_values=None,
               r1_max: int = DEFAULT_R1_MAX) -> list[dict]:
    th_values = th_values or [1, 2, 3, 4, 8, 16, 32, 64]
    rows = []
    for th in th_values:
        mh, r1 = prfm_best(th, timing, r1_max)
        rows.append({"mechanism": "prfm", "rfm_th": th, "worst_r1": r1,
                     "max_hammer": mh, "secure_min_nrh": mh + 1})
    return rows


def sweep_prac(timing: TimingParams, a_both_values=None, n_bo_r_values=None,
               r1_max: int = DEFAULT_R1_MAX, inflight: bool = False) -> list[dict]:
    a_both_values = a_both_values or [1, 2, 4, 8, 16, 32, 64]
    n_bo_r_values = n_bo_r_values or [1, 2, 4]
    rows = []
    for nbor in n_bo_r_values:
        for ab in a_both_values:
            mh, r1 = prac_best(ab, nbor, nbor, timing, r1_max, inflight=inflight)
            rows.append({"mechanism": f"prac-{nbor}", "a_both": ab,
                         "n_bo_r": nbor, "n_bo_a": nbor, "worst_r1": r1,
                         "max_hammer": mh, "secure_min_nrh": mh + 1})
    return rows


def sweep_chronus(timing: TimingParams, n_bo_values=None) -> list[dict]:
    n_bo_values = n_bo_values or [1, 2, 4, 8, 16, 32, 64, 128, 256]
    rows = []
    for n_bo in n_bo_values:
        mh = chronus_bound(n_bo, timing.tRC, timing.tABOact)
        rows.append({"mechanism": "chronus", "n_bo": n_bo,
                     "a_normal": timing.a_normal(), "max_hammer": mh,
                     "secure_min_nrh": mh + 1})
    return rows


# ---------------------------------------------------------------------------
# Executable worst-case oracle

@dataclass
class WorstCaseVerdict:
    measured: Fraction
    bound: Fraction
    passes: bool
    rfm_time: int
    window: int


def verify_worstcase(candidate, window_ps: int, policy: str, config: dict,
                     timing: TimingParams) -> WorstCaseVerdict:
    """Replay a candidate activation schedule against the device model and
    compare the measured preventive-refresh time fraction with the closed
    bound. candidate is a sequence of (bank, row) activations issued as
    early as legality permits; the back-off protocol inserts its own
    refreshes. Raises on an illegal schedule."""
    from .attacks import AttackHarness  # local import to avoid a cycle

    if policy == "prac":
        bound = dbc_prac(config["a_both"], config["n_bo_r"], timing.tRFM,
                         timing.tRC)
    elif policy == "chronus":
        bound = dbc_chronus(config["n_bo"], timing.tRFM, timing.tRC)
    else:
        raise ValueError(f"unknown policy {policy!r}")
    harness = AttackHarness.for_policy(policy, config, timing)
    for bank, row in candidate:
        if harness.now >= window_ps:
            break
        harness.hammer(bank, row)
    harness.finish()
    horizon = max(harness.now, window_ps)
    measured = Fraction(min(harness.rfm_busy, horizon), horizon)
    return WorstCaseVerdict(measured=measured, bound=bound,
                            passes=measured <= bound,
                            rfm_time=harness.rfm_busy, window=horizon)
