import dataclasses

import pytest

from rdlab.timing import (BankTimingTracker, CommandKind, ConfigError,
                          TimingViolation, make_timing, ns, replay_check)


def test_baseline_column_exact():
    t = make_timing(prac_enabled=False)
    assert t.tRAS == ns(32)
    assert t.tRP == ns(15)
    assert t.tRC == ns(47)
    assert t.tRTP == ns(7.5)
    assert t.tWR == ns(30)


def test_prac_column_exact():
    t = make_timing(prac_enabled=True)
    assert t.tRAS == ns(16)
    assert t.tRP == ns(36)
    assert t.tRC == ns(52)
    assert t.tRTP == ns(5)
    assert t.tWR == ns(10)


def test_common_parameters_both_columns():
    for prac in (False, True):
        t = make_timing(prac)
        assert t.tRFM == ns(350)
        assert t.tABOact == ns(180)
        assert t.tREFW == ns(32e6)
        assert t.tREFI == ns(3900)


def test_switching_changes_exactly_five_parameters():
    base = dataclasses.asdict(make_timing(False))
    prac = dataclasses.asdict(make_timing(True))
    changed = {k for k in base if base[k] != prac[k]}
    assert changed == {"tRAS", "tRP", "tRC", "tRTP", "tWR", "prac_enabled"}


def test_unknown_speed_bin_rejected():
    with pytest.raises(ConfigError):
        make_timing(False, speed_bin="DDR4-2400")


def test_classic_trc_identity_not_enforced():
    # only the weak bound is an invariant; a column where tRC < tRAS + tRP
    # must be accepted
    t = make_timing(True, overrides_ns={"tRP": 40})
    assert t.tRC < t.tRAS + t.tRP
    assert t.tRC >= max(t.tRAS, t.tRP)


def test_overrides_and_rejection():
    t = make_timing(False, overrides_ns={"tRFM": 195})
    assert t.tRFM == ns(195)
    with pytest.raises(ConfigError):
        make_timing(False, overrides_ns={"tXYZ": 1})


def test_act_to_pre_earliest():
    t = make_timing(False)
    tracker = BankTimingTracker(t, 4, 4)
    tracker.record(CommandKind.ACT, 0, 0)
    assert tracker.earliest_issue_time(CommandKind.PRE, 0) == ns(32)


def test_act_to_act_prac():
    t = make_timing(True)
    tracker = BankTimingTracker(t, 4, 4)
    tracker.record(CommandKind.ACT, 0, 0)
    assert tracker.earliest_issue_time(CommandKind.ACT, 0) == ns(52)


def test_pre_to_act_prac():
    t = make_timing(True)
    tracker = BankTimingTracker(t, 4, 4)
    tracker.record(CommandKind.ACT, 0, 0)
    tracker.record(CommandKind.PRE, 0, ns(100))
    assert tracker.earliest_issue_time(CommandKind.ACT, 0) == ns(136)


def test_read_write_precharge_constraints():
    t = make_timing(False)
    tracker = BankTimingTracker(t, 2, 2)
    tracker.record(CommandKind.ACT, 0, 0)
    tracker.record(CommandKind.RD, 0, t.tRCD)
    assert tracker.earliest_issue_time(CommandKind.PRE, 0) == max(
        t.tRAS, t.tRCD + t.tRTP)


def test_violation_detected():
    t = make_timing(False)
    tracker = BankTimingTracker(t, 2, 2)
    tracker.record(CommandKind.ACT, 0, 0)
    with pytest.raises(TimingViolation):
        tracker.record(CommandKind.PRE, 0, ns(10))


def test_rfm_blocks_rank():
    t = make_timing(False)
    tracker = BankTimingTracker(t, 4, 2)  # two ranks of two banks
    tracker.record(CommandKind.RFMAB, 0, 0)
    assert tracker.earliest_issue_time(CommandKind.ACT, 0) == t.tRFM
    assert tracker.earliest_issue_time(CommandKind.ACT, 1) == t.tRFM
    # the other rank is unaffected
    assert tracker.earliest_issue_time(CommandKind.ACT, 2) == 0


def test_replay_check_round_trip():
    t = make_timing(False)
    cmds = [(0, CommandKind.ACT, 0),
            (t.tRAS, CommandKind.PRE, 0),
            (t.tRAS + t.tRP, CommandKind.ACT, 0)]
    replay_check(t, 2, 2, cmds)
    with pytest.raises(TimingViolation):
        replay_check(t, 2, 2, [(0, CommandKind.ACT, 0),
                               (1, CommandKind.ACT, 0)])
