import json

from rdlab.attacks import Trace, TraceEntry, gen_mix, gen_perf_attack, gen_synthetic
from rdlab.controller import (Core, SharedCache, SimConfig, alone_ipcs,
                              cycles_to_ps, ps_to_cycles, simulate)
from rdlab.device import DeviceGeometry
from rdlab.mapping import AddressMapper
from rdlab.metrics import weighted_speedup
from rdlab.mitigations import MitigationConfig


def h_trace(n=4000, seed=1):
    return gen_synthetic("H", n, seed=seed)


def small_sim(mech="none", instructions=60_000, traces=None, **kw):
    mc = kw.pop("mitigation", None) or MitigationConfig(mechanism=mech, **kw)
    cfg = SimConfig(mitigation=mc, instructions_per_core=instructions)
    return simulate(cfg, traces or [h_trace()])


# -- cores / cache ------------------------------------------------------------

def test_cycle_conversion_roundtrip():
    for c in (1, 7, 1000, 12345):
        assert ps_to_cycles(cycles_to_ps(c)) >= c


def test_core_retires_bubbles_without_memory():
    tr = Trace([TraceEntry(100, 0, True)])  # writes never stall
    core = Core(0, tr, 5000)
    core.run(10 ** 12, lambda *a: True)
    assert core.done()
    # 4-wide: ~5000/4 cycles
    assert ps_to_cycles(core.finish_ps) <= 5000 // 4 + 2


def test_core_blocks_on_window():
    tr = Trace([TraceEntry(0, 64 * i, False) for i in range(300)])
    sub = []
    core = Core(0, tr, 1000)
    core.run(10 ** 12, lambda c, a, w, t, r: sub.append(r) or True)
    assert not core.done()
    assert len(core.outstanding) == 128  # window limit reached


def test_cache_hit_miss_writeback():
    cache = SharedCache(size_bytes=8 * 64 * 2, ways=2, line=64)  # 8 sets x 2
    hit, wb = cache.access(0, True)
    assert not hit and wb is None
    hit, wb = cache.access(0, False)
    assert hit
    # conflict-evict the dirty line
    hit, wb = cache.access(8 * 64, False)
    assert not hit and wb is None
    hit, wb = cache.access(16 * 64, False)
    assert not hit and wb == 0


# -- simulator behavior ----------------------------------------------------------

def test_baseline_no_mitigation_zero_rfm():
    res = small_sim("none")
    assert res.rfm_count == 0
    assert res.backoff_count == 0
    assert res.ipcs()[0] > 0.1


def test_determinism_byte_identical():
    a = small_sim("para", n_rh=64).to_json(64)
    b = small_sim("para", n_rh=64).to_json(64)
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_chronus_schedule_identical_to_baseline_when_quiet():
    # with a high threshold nothing fires and the concurrent-update device
    # must not perturb the schedule
    base = small_sim("none")
    chron = small_sim("chronus", n_rh=1000, n_bo=256)
    assert chron.backoff_count == 0
    assert base.commands == {**chron.commands}
    assert base.end_ps == chron.end_ps
    assert base.ipcs() == chron.ipcs()


def test_prac_timing_slows_execution():
    base = small_sim("none")
    prac = small_sim(mitigation=MitigationConfig.secure("prac-4", 1000))
    assert prac.ipcs()[0] < base.ipcs()[0]


def test_prfm_issues_rfm_at_threshold():
    mc = MitigationConfig(mechanism="prfm", n_rh=1000, rfm_th=1)
    res = small_sim(mitigation=mc, instructions=20_000)
    # one refresh-management command per activation (degenerate threshold)
    assert res.rfm_count >= res.commands["ACT"] - 64


def test_refresh_cadence_idle_system():
    tr = Trace([TraceEntry(1000, 0, False)])
    mc = MitigationConfig(mechanism="none")
    cfg = SimConfig(mitigation=mc, instructions_per_core=2_000_000)
    res = simulate(cfg, [tr])
    # an (almost) idle system refreshes every tREFI per rank
    expected = res.end_ps // cfg.timing().tREFI * cfg.geometry.ranks
    assert abs(res.ref_count - expected) <= 2 * cfg.geometry.ranks + 2


def test_refresh_postponed_under_load_but_bounded():
    res = small_sim("none", instructions=150_000)
    t = res.config.timing()
    slots = res.end_ps // t.tREFI * res.config.geometry.ranks
    # under heavy traffic refreshes postpone, but by at most 4 intervals
    assert res.ref_count >= slots - 4 * res.config.geometry.ranks - 2


def test_scheduler_cap_yields_to_older_conflict():
    """After `cap` consecutive same-row hits, an older conflicting request
    wins the bank (its precharge issues next)."""
    from rdlab.controller import ChannelSim, Request

    cfg = SimConfig(mitigation=MitigationConfig(mechanism="none"),
                    scheduler_cap=4, refresh_enabled=False)
    sim = ChannelSim(cfg, [])
    bank = 0

    def req(seq, row):
        return Request(core=-1, is_write=False, address=0, arrival=0,
                       bank=bank, row=row, column=0, rank=0, seq=seq)

    # open row 3 with an initial request, then queue: 4 hits, 1 older
    # conflict (row 9), 2 younger hits
    sim.read_q = [req(1, 3)]
    assert sim._pick_and_issue()  # ACT row 3
    sim.read_q = [req(2, 3), req(3, 3), req(4, 3), req(5, 3),
                  req(6, 9), req(7, 3), req(8, 3)]
    kinds = []
    for _ in range(6):
        assert sim._pick_and_issue()
        kinds.append(sim.tracker.last_pre[bank] >= 0 and
                     sim.device.banks[bank].open_row is None)
    # requests 1..5 were row hits (streak of 4 after the opener's read),
    # then the conflict's precharge must break the streak
    assert sim.row_hits >= 4
    assert sim.row_conflicts == 1


def test_write_drain_mode():
    entries = [TraceEntry(0, 64 * i, True) for i in range(3000)]
    tr = Trace(entries)
    cfg = SimConfig(mitigation=MitigationConfig(mechanism="none"),
                    instructions_per_core=3000, use_cache=False)
    res = simulate(cfg, [tr])
    assert res.commands["WR"] > 0


def test_multicore_weighted_speedup_sane():
    traces = gen_mix("LLLL", 1500, seed=2)
    cfg = SimConfig(mitigation=MitigationConfig(mechanism="none"),
                    instructions_per_core=40_000)
    shared = simulate(cfg, traces)
    alone = alone_ipcs(cfg, traces)
    ws = weighted_speedup(shared.ipcs(), alone)
    assert 2.0 < ws <= 4.001  # four cores, some contention


def test_no_cache_mode_treats_trace_as_miss_stream():
    tr = h_trace(2000)
    mc = MitigationConfig(mechanism="none")
    with_cache = simulate(SimConfig(mitigation=mc, instructions_per_core=30_000),
                          [tr])
    without = simulate(SimConfig(mitigation=mc, instructions_per_core=30_000,
                                 use_cache=False), [tr])
    # the cache absorbs repeat accesses; the miss-stream run sends every
    # trace entry to the controller
    demand = lambda r: r.commands["RD"] + r.commands["WR"]
    assert demand(without) >= demand(with_cache)
    assert without.row_hits + without.row_misses + without.row_conflicts >= \
        with_cache.row_misses


def test_perf_attack_triggers_backoffs_vs_prac():
    g = DeviceGeometry()
    mapper = AddressMapper(g, "mop")
    attacker = gen_perf_attack(mapper, 8, 4, length=30_000)
    mc = MitigationConfig.secure("prac-4", 64)
    cfg = SimConfig(mitigation=mc, instructions_per_core=25_000,
                    use_cache=False)
    res = simulate(cfg, [attacker])
    assert res.backoff_count > 0
    assert res.rfm_count >= 4 * res.backoff_count
    rep = res.oracle(64)
    assert not rep.violations


def test_oracle_attached_to_sim_runs():
    res = small_sim("chronus", n_rh=64, instructions=30_000)
    rep = res.oracle(64)
    assert not rep.violations
    assert rep.max_exposure < 64


def test_perf_attack_slowdown_exceeds_benign():
    """A malicious hammering core inflicts a larger worst-core slowdown
    than a benign co-runner mix, and back-off refreshes push up the
    preventive-refresh energy."""
    from rdlab.attacks import gen_mix
    from rdlab.metrics import max_slowdown

    g = DeviceGeometry()
    mapper = AddressMapper(g, "mop")
    benign = gen_mix("MMLL", 4000, seed=5)[:3]
    attacker = gen_perf_attack(mapper, 8, 4, length=30_000)
    mc = MitigationConfig.secure("prac-4", 32)
    cfg = SimConfig(mitigation=mc, instructions_per_core=50_000, seed=0)

    attacked = simulate(cfg, [attacker] + benign)
    attacked_alone = alone_ipcs(cfg, [attacker] + benign)
    benign4 = gen_mix("MMLL", 4000, seed=5)
    quiet = simulate(cfg, benign4)
    quiet_alone = alone_ipcs(cfg, benign4)

    slow_attacked = max_slowdown(attacked.ipcs()[1:], attacked_alone[1:])
    slow_quiet = max_slowdown(quiet.ipcs()[1:], quiet_alone[1:])
    assert slow_attacked > slow_quiet
    assert attacked.energy["rfm"] > quiet.energy["rfm"]
