from fractions import Fraction

import pytest

from rdlab import analytic
from rdlab.analytic import (att_min_size, chronus_bound, dbc_chronus,
                            dbc_prac, find_secure_config, prac_best,
                            prac_max_hammer, prac_rounds, prfm_best,
                            prfm_max_hammer, prfm_rounds, verify_worstcase)
from rdlab.attacks import gen_random_schedule
from rdlab.timing import make_timing

TB = make_timing(prac_enabled=False)
TP = make_timing(prac_enabled=True)


# -- recurrences ---------------------------------------------------------------

def test_prfm_rounds_examples():
    assert prfm_rounds(1, 2) == [2, 0]
    assert prfm_rounds(2, 4) == [4, 2, 1, 1, 0]


def test_prfm_rounds_single_row_waits_for_threshold():
    # one row is only mitigated once cumulative activations reach the threshold
    seq = prfm_rounds(4, 1)
    assert seq == [1, 1, 1, 1, 0]


def test_rounds_non_increasing_after_first():
    for th in (2, 3, 5):
        for r1 in (7, 64, 333):
            seq = prfm_rounds(th, r1)
            assert all(a >= b for a, b in zip(seq[1:], seq[2:]))
    for r1 in (7, 64, 333):
        seq = prac_rounds(1, 4, 4, r1, TP)
        assert all(a >= b for a, b in zip(seq[1:], seq[2:]))


def test_prfm_max_hammer_th1():
    assert prfm_max_hammer(1, 1, TB) == 1


def test_prfm_secure_boundary_at_32():
    # at a threshold of 32 vulnerabilities appear only from rfm_th = 4 up
    assert prfm_best(3, TB)[0] < 32
    assert prfm_best(4, TB)[0] >= 32


def test_prfm_monotone_in_threshold():
    values = [prfm_best(th, TB, r1_max=20000)[0] for th in (1, 2, 3, 4, 8)]
    assert values == sorted(values)


def test_prac_recurrence_headline_value():
    mh, r1 = prac_best(1, 4, 4, TP)
    assert mh == 19
    assert r1 == 44017


def test_prac_all_rows_mitigated_at_once():
    # n_bo_r covering the whole set ends the attack almost immediately
    mh = prac_max_hammer(1, 64, 4, 64, TP)
    assert mh <= 2


def test_prac_max_hammer_monotone_in_a_both():
    values = [prac_best(ab, 4, 4, TP, r1_max=50000,
                        charge_prehammer=False)[0]
              for ab in (1, 2, 4, 8, 16)]
    assert all(a < b for a, b in zip(values, values[1:]))


def test_prac_inflight_adds_recovery_increments():
    base = prac_best(1, 4, 4, TP)[0]
    with_inflight = prac_best(1, 4, 4, TP, inflight=True)[0]
    assert with_inflight == base + 3


# -- bounds ----------------------------------------------------------------------

def test_chronus_bound_examples():
    assert chronus_bound(16, 47, 180) == 19
    assert chronus_bound(1, 47, 180) == 4
    assert chronus_bound(5, 10 ** 9, 180) == 5  # window shorter than one ACT


def test_att_min_size_examples():
    assert att_min_size(47, 180) == 4
    assert att_min_size(52, 180) == 4
    assert att_min_size(181, 180) == 1


# -- bandwidth fractions -----------------------------------------------------------

def test_dbc_prac_exact_values():
    assert dbc_prac(1, 4, 350, 52) == Fraction(1400, 1452)
    assert abs(float(dbc_prac(1, 4, 350, 52)) - 0.9642) < 5e-5
    assert dbc_prac(16, 1, 350, 47) == Fraction(350, 1102)
    assert abs(float(dbc_prac(16, 1, 350, 47)) - 0.3176) < 5e-5
    assert round(float(dbc_prac(16, 1, 350, 47)) * 100) == 32


def test_dbc_limit_large_threshold():
    assert float(dbc_prac(10 ** 9, 4, 350, 52)) < 1e-4


def test_dbc_monotonicity():
    assert dbc_prac(2, 4, 350, 52) < dbc_prac(1, 4, 350, 52)
    assert dbc_prac(1, 2, 350, 52) < dbc_prac(1, 4, 350, 52)
    assert dbc_prac(1, 4, 200, 52) < dbc_prac(1, 4, 350, 52)
    assert dbc_chronus(16, 350, 47) == dbc_prac(16, 1, 350, 47)


# -- secure configuration search ------------------------------------------------------

def test_find_secure_prac4_at_20():
    found = find_secure_config("prac-4", 20)
    assert found is not None
    assert found.params["a_both"] == 1
    assert found.params["n_bo_a"] == 1 or found.params["n_bo_a"] == 4
    assert found.max_hammer == 19


def test_find_secure_prac_none_below_20():
    assert find_secure_config("prac-4", 19) is None
    assert find_secure_config("prac-4", 10) is None


def test_find_secure_chronus():
    found = find_secure_config("chronus", 20)
    assert found.params["n_bo"] == 16
    assert found.max_hammer == 19


def test_find_secure_prfm():
    found = find_secure_config("prfm", 32)
    assert found.params["rfm_th"] == 3
    found = find_secure_config("prfm", 2)
    assert found is not None and found.params["rfm_th"] == 1


# -- executable worst-case oracle ---------------------------------------------------------

def test_verify_idle_pattern_is_zero():
    v = verify_worstcase([], 1_000_000, "prac",
                         {"a_both": 1, "n_bo_r": 4, "n_bo_a": 1}, TP)
    assert v.measured == 0
    assert v.passes


def test_verify_hammer_pattern_under_bound():
    sched = [(0, 0)] * 500
    v = verify_worstcase(sched, 500_000, "prac",
                         {"a_both": 1, "n_bo_r": 4, "n_bo_a": 1}, TP)
    assert v.passes
    assert v.measured > Fraction(1, 2)  # the protocol dominates the time


def test_verify_chronus_random_patterns():
    cfg = {"n_bo": 16}
    for seed in range(20):
        sched = gen_random_schedule(seed, 200)
        v = verify_worstcase(sched, 1_000_000, "chronus", cfg, TB)
        assert v.passes, (seed, float(v.measured), float(v.bound))


def test_verify_rejects_unknown_policy():
    with pytest.raises(ValueError):
        verify_worstcase([], 1, "turbo", {}, TB)


def test_sweep_tables_shape():
    rows = analytic.sweep_prfm(TB, [1, 2], r1_max=100)
    assert {r["rfm_th"] for r in rows} == {1, 2}
    rows = analytic.sweep_prac(TP, [1, 2], [4], r1_max=100)
    assert all(r["mechanism"] == "prac-4" for r in rows)
    rows = analytic.sweep_chronus(TB, [16])
    assert rows[0]["max_hammer"] == 19
