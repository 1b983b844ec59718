"""Adversarial pattern generators, synthetic benign traffic, and trace I/O.

AttackHarness drives the device model command-by-command (legality-checked)
while honoring the back-off protocol, giving the attack generators the
privileged refresh-detection feedback the threat model grants them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .device import DevicePolicy, DeviceGeometry, DramDevice
from .mapping import AddressField, AddressMapper
from .timing import BankTimingTracker, CommandKind, TimingParams, make_timing

BIG_THRESHOLD = 1 << 60  # device threshold that never fires (plain RFM duty)


# ---------------------------------------------------------------------------
# Traces

@dataclass
class TraceEntry:
    bubbles: int
    address: int
    is_write: bool


@dataclass
class Trace:
    entries: list[TraceEntry]
    name: str = "anon"
    intensity: str | None = None  # H | M | L
    uncached: bool = False        # bypass the shared cache (flush-style access)

    def __len__(self):
        return len(self.entries)


class TraceParseError(ValueError):
    pass


def load_trace(path) -> Trace:
    """Parse a `<bubbles> <hex-address> [W]` per-line core trace."""
    entries = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) not in (2, 3):
                raise TraceParseError(f"{path}:{lineno}: expected "
                                      f"'<bubbles> <hex-address> [W]', got {text!r}")
            try:
                bubbles = int(parts[0])
                address = int(parts[1], 16)
            except ValueError as exc:
                raise TraceParseError(f"{path}:{lineno}: {exc}") from None
            if bubbles < 0:
                raise TraceParseError(f"{path}:{lineno}: negative bubble count")
            is_write = False
            if len(parts) == 3:
                if parts[2] != "W":
                    raise TraceParseError(f"{path}:{lineno}: trailing token "
                                          f"must be 'W', got {parts[2]!r}")
                is_write = True
            entries.append(TraceEntry(bubbles, address, is_write))
    if not entries:
        raise TraceParseError(f"{path}: empty trace")
    return Trace(entries, name=str(path))


def save_trace(trace: Trace, path) -> None:
    with open(path, "w") as fh:
        for e in trace.entries:
            suffix = " W" if e.is_write else ""
            fh.write(f"{e.bubbles} {e.address:#x}{suffix}\n")


# ---------------------------------------------------------------------------
# Synthetic benign traffic

_INTENSITY_PARAMS = {
    # (bubble_lo, bubble_hi, burst_blocks, working_set_bytes)
    "H": (25, 55, 3, 1 << 30),
    "M": (100, 200, 3, 1 << 30),
    "L": (350, 650, 8, 1 << 21),
}


def gen_synthetic(intensity: str, length: int, seed: int,
                  capacity: int = 1 << 33) -> Trace:
    """Pointer-chase bursts with spatial locality: a random jump followed
    by a few sequential cache blocks. Tuned so the measured row-buffer-miss
    rate lands in the intensity class band (H >= 10, M in [2,10), L < 2
    misses per kilo-instruction on the unmitigated baseline)."""
    if length < 1:
        raise ValueError("length must be >= 1")
    if intensity not in _INTENSITY_PARAMS:
        raise ValueError(f"intensity must be one of H, M, L, got {intensity!r}")
    lo, hi, burst, wset = _INTENSITY_PARAMS[intensity]
    wset = min(wset, capacity)
    rng = np.random.default_rng(seed)
    entries = []
    ptr = int(rng.integers(0, wset)) & ~63
    left = 0
    for _ in range(length):
        bubbles = int(rng.integers(lo, hi + 1))
        if left <= 0:
            ptr = int(rng.integers(0, wset)) & ~63
            left = int(rng.integers(1, 2 * burst))
        else:
            ptr = (ptr + 64) % wset
        left -= 1
        is_write = rng.random() < 0.25
        entries.append(TraceEntry(bubbles, ptr, is_write))
    return Trace(entries, name=f"synthetic-{intensity}-{seed}",
                 intensity=intensity)


WORKLOAD_TYPES = ("HHHH", "MMMM", "LLLL", "HHMM", "MMLL", "LLHH")


def gen_mix(mix_type: str, length: int, seed: int,
            capacity: int = 1 << 33) -> list[Trace]:
    """Four-core workload mix; one trace per letter of the type string."""
    if mix_type not in WORKLOAD_TYPES:
        raise ValueError(f"unknown mix type {mix_type!r}")
    return [gen_synthetic(letter, length, seed * 31 + i, capacity)
            for i, letter in enumerate(mix_type)]


def gen_workload_suite(length: int = 20000,
                       capacity: int = 1 << 33) -> dict[tuple[str, int], list[Trace]]:
    """The sixty four-core mixes: each of the six type patterns with seeds
    zero through nine."""
    return {(mix, seed): gen_mix(mix, length, seed, capacity)
            for mix in WORKLOAD_TYPES for seed in range(10)}


# ---------------------------------------------------------------------------
# Attack harness

@dataclass
class _RankProtocol:
    window_deadline: int | None = None
    window_acts: int = 0


class AttackHarness:
    """Single-channel command-level driver for adversarial schedules.

    hammer() issues one ACT/PRE pair at the earliest legal time; the
    back-off protocol (normal-traffic window, recovery refreshes, delay) is
    inserted automatically, mirroring a memory controller that serves the
    attacker as fast as legality allows. Periodic refresh is excluded, as
    in the security analysis.
    """

    def __init__(self, timing: TimingParams, policy: DevicePolicy,
                 geometry: DeviceGeometry | None = None,
                 prfm_th: int | None = None):
        self.geometry = geometry or DeviceGeometry()
        self.timing = timing
        self.policy = policy
        self.device = DramDevice(self.geometry, policy)
        self.tracker = BankTimingTracker(timing, self.geometry.banks_per_channel,
                                         self.geometry.banks_per_rank)
        self.prfm_th = prfm_th
        self.prfm_counters = [0] * self.geometry.banks_per_channel
        self.now = 0
        self.rfm_busy = 0
        self.act_count = 0
        self.rfm_count = 0
        self.protocol = [_RankProtocol() for _ in range(self.geometry.ranks)]
        self.commands: list[tuple[int, CommandKind, int]] = []

    @staticmethod
    def for_policy(policy_name: str, config: dict,
                   timing: TimingParams | None = None) -> "AttackHarness":
        if policy_name in ("prac", "prac+prfm"):
            timing = timing or make_timing(prac_enabled=True)
            # the table must hold one entry per recovery refresh
            default_att = max(4, config["n_bo_r"])
            pol = DevicePolicy(mode="prac", a_both=config["a_both"],
                               nbo_refs=config["n_bo_r"],
                               nbo_acts=config.get("n_bo_a", config["n_bo_r"]),
                               att_capacity=config.get("att_capacity",
                                                       default_att))
            th = config.get("rfm_th") if policy_name == "prac+prfm" else None
            return AttackHarness(timing, pol, prfm_th=th)
        if policy_name == "chronus":
            timing = timing or make_timing(prac_enabled=False)
            pol = DevicePolicy(mode="chronus", n_bo=config["n_bo"],
                               att_capacity=config.get("att_capacity", 4))
            return AttackHarness(timing, pol)
        if policy_name == "chronus-pb":
            timing = timing or make_timing(prac_enabled=False)
            pol = DevicePolicy(mode="chronus", backoff="prac",
                               n_bo=config["a_both"],
                               nbo_refs=config.get("n_bo_r", 4),
                               nbo_acts=config.get("n_bo_a", 4),
                               att_capacity=config.get("att_capacity", 4))
            return AttackHarness(timing, pol)
        if policy_name == "prfm":
            timing = timing or make_timing(prac_enabled=False)
            pol = DevicePolicy(mode="prac", a_both=BIG_THRESHOLD,
                               att_capacity=config.get("att_capacity", 4))
            return AttackHarness(timing, pol, prfm_th=config["rfm_th"])
        if policy_name == "none":
            timing = timing or make_timing(prac_enabled=False)
            return AttackHarness(timing, DevicePolicy.none())
        raise ValueError(f"unknown policy {policy_name!r}")

    # -- command plumbing --------------------------------------------------

    def _issue(self, cmd: CommandKind, bank: int, at: int | None = None) -> int:
        t = self.tracker.earliest_issue_time(cmd, bank, self.now if at is None else at)
        self.tracker.record(cmd, bank, t)
        self.commands.append((t, cmd, bank))
        self.now = max(self.now, t)
        return t

    def _run_recovery(self, rank: int, start: int) -> None:
        """Issue recovery refreshes for an asserted rank."""
        bo = self.device.backoff[rank]
        if bo.phase == "window":
            self.device.enter_recovery(rank)
        self.now = max(self.now, start)
        guard = 0
        while self.device.backoff[rank].phase == "recovery":
            bank0 = rank * self.geometry.banks_per_rank
            t = self._issue(CommandKind.RFMAB, bank0)
            self.device.on_rfm(rank, t)
            self.rfm_busy += self.timing.tRFM
            self.rfm_count += 1
            self.now = t + self.timing.tRFM
            guard += 1
            if guard > 100000:
                raise RuntimeError("recovery did not terminate")
        proto = self.protocol[rank]
        proto.window_deadline = None
        proto.window_acts = 0

    def force_recovery(self, rank: int = 0) -> None:
        """Start the recovery refreshes immediately (the controller may use
        less than the full normal-traffic window)."""
        if self.device.backoff[rank].asserted:
            self._run_recovery(rank, self.now)


    def _window_slot_available(self, rank: int, bank: int) -> bool:
        proto = self.protocol[rank]
        if proto.window_deadline is None:
            return True
        if proto.window_acts >= self.timing.a_normal():
            return False
        t_act = self.tracker.earliest_issue_time(CommandKind.ACT, bank, self.now)
        return t_act < proto.window_deadline

    def hammer(self, bank: int, row: int) -> int:
        """One activate/precharge pair to (bank, row); returns the ACT time."""
        rank = self.device.rank_of(bank)
        bo = self.device.backoff[rank]
        if bo.asserted and not self._window_slot_available(rank, bank):
            self._run_recovery(rank, self.protocol[rank].window_deadline or self.now)
        t_act = self._issue(CommandKind.ACT, bank)
        alert = self.device.on_activate(bank, row, t_act)
        self.act_count += 1
        if self.device.backoff[rank].asserted and self.protocol[rank].window_deadline is not None:
            self.protocol[rank].window_acts += 1
        t_pre = self._issue(CommandKind.PRE, bank)
        alert = self.device.on_precharge(bank, t_pre) or alert
        if alert is not None:
            self.protocol[rank].window_deadline = alert + self.timing.tABOact
            self.protocol[rank].window_acts = 0
        if self.prfm_th is not None:
            self.prfm_counters[bank] += 1
            if self.prfm_counters[bank] >= self.prfm_th:
                t = self._issue(CommandKind.RFMAB, rank * self.geometry.banks_per_rank)
                self.device.on_rfm(rank, t)
                self.rfm_busy += self.timing.tRFM
                self.rfm_count += 1
                self.now = t + self.timing.tRFM
                base = rank * self.geometry.banks_per_rank
                for b in range(base, base + self.geometry.banks_per_rank):
                    self.prfm_counters[b] = 0
        return t_act

    def finish(self) -> None:
        """Drain any asserted back-off so refresh accounting is complete."""
        for rank in range(self.geometry.ranks):
            if self.device.backoff[rank].asserted:
                deadline = self.protocol[rank].window_deadline or self.now
                self._run_recovery(rank, deadline)

    @property
    def refresh_feed(self):
        return self.device.refresh_feed


# ---------------------------------------------------------------------------
# Wave attack

@dataclass
class WaveResult:
    trajectory: list[int]
    rounds: int
    slots: int
    harness: AttackHarness = field(repr=False)


def run_wave_attack(policy_name: str, config: dict, r1_size: int,
                    timing: TimingParams | None = None, bank: int = 0,
                    max_rounds: int = 10_000) -> WaveResult:
    """Balanced decoy-set attack against one bank; drops rows once the
    device is seen refreshing their victims. The surviving-set trajectory
    is sampled at round starts (terminal zero included).

    Against the back-off policy a refresh takes effect at the end of its
    back-off cycle (trigger, window, recovery, delay); against periodic
    refresh management it is immediate.
    """
    harness = AttackHarness.for_policy(policy_name, config, timing)
    t = harness.timing
    # decoys are spaced so no aggressor sits in another's blast radius
    spacing = 5
    if r1_size * spacing > harness.geometry.rows_per_bank:
        raise ValueError("r1_size too large for disjoint decoy victim sets")
    rows = [i * spacing for i in range(r1_size)]
    if policy_name == "prac":
        for _ in range(config["a_both"] - 1):
            for row in rows:
                harness.hammer(bank, row)
        d = config.get("n_bo_a", config["n_bo_r"]) + t.a_normal()
        nbor = config["n_bo_r"]
    alive = rows
    trajectory = []
    slots = 0
    feed = harness.refresh_feed
    rounds = 0
    rank = 0
    while alive and rounds < max_rounds:
        trajectory.append(len(alive))
        for row in alive:
            harness.hammer(bank, row)
            slots += 1
        rounds += 1
        if policy_name == "prac":
            allowed = nbor * (slots // d)
            # a cycle whose delay ends exactly at the round boundary has its
            # recovery still pending; complete it so the refresh ledger
            # matches the cycle count
            while allowed > len(feed) and harness.device.backoff[rank].asserted:
                harness.force_recovery(rank)
        else:
            allowed = len(feed)
        gone = {row for b, row in feed[:allowed] if b == bank}
        alive = [row for row in alive if row not in gone]
    trajectory.append(len(alive))
    harness.finish()
    return WaveResult(trajectory=trajectory, rounds=rounds, slots=slots,
                      harness=harness)


# ---------------------------------------------------------------------------
# Tracking-table overwhelm pattern

def run_overwhelm(n_bo: int, n_rh: int, timing: TimingParams | None = None,
                  att_capacity: int = 4, bank: int = 0) -> AttackHarness:
    """Three-step pattern stressing the tracking table, then a max-depth
    phase realizing the activation bound on a single row.

    Step 1 hammers a_normal+1 rows to the threshold minus one; step 2 fires
    the back-off with one row; step 3 spends the normal-traffic window
    taking the remaining a_normal rows to the threshold. The follow-up
    hammers would push any row the table failed to track to the bitflip
    threshold, and the final phase drives one row to threshold + a_normal.
    """
    timing = timing or make_timing(prac_enabled=False)
    config = {"n_bo": n_bo, "att_capacity": att_capacity}
    harness = AttackHarness.for_policy("chronus", config, timing)
    a_normal = timing.a_normal()
    group = list(range(a_normal + 1))
    # step 1: balanced build-up, no back-off fires
    for _ in range(n_bo - 1):
        for row in group:
            harness.hammer(bank, row)
    # step 2: first row reaches the threshold and fires
    harness.hammer(bank, group[0])
    # step 3: remaining rows reach the threshold inside the window
    for row in group[1:]:
        harness.hammer(bank, row)
    harness.force_recovery(0)
    # follow-up: push every group row by the gap to the bitflip threshold;
    # only a row the table lost keeps accumulating exposure
    for _ in range(n_rh - n_bo):
        for row in group:
            harness.hammer(bank, row)
    # max-depth phase on a fresh row: threshold + full window on one row
    deep = a_normal + 1
    while True:
        t_act = harness.hammer(bank, deep)
        if harness.device.backoff[0].asserted:
            break
        if t_act > 10 * timing.tREFW:
            raise RuntimeError("back-off never fired in depth phase")
    for _ in range(a_normal):
        harness.hammer(bank, deep)
    harness.force_recovery(0)
    harness.finish()
    return harness


# ---------------------------------------------------------------------------
# Performance-degradation attack trace

def gen_perf_attack(mapper: AddressMapper, rows_per_bank_attacked: int = 8,
                    banks_attacked: int = 4, length: int = 100_000) -> Trace:
    """One malicious core hammering a few rows in each of a few banks as
    fast as it can (row-buffer-conflicting by construction)."""
    geometry = mapper.geometry
    addrs = []
    for r in range(rows_per_bank_attacked):
        for b in range(banks_attacked):
            field_ = AddressField(
                channel=0, rank=0,
                bank_group=b % geometry.bank_groups,
                bank=(b // geometry.bank_groups) % geometry.banks_per_group,
                row=(r * 37) % geometry.rows_per_bank,
                column=0)
            addrs.append(mapper.encode(field_))
    entries = [TraceEntry(0, addrs[i % len(addrs)], False)
               for i in range(length)]
    return Trace(entries, name=f"perf-attack-{rows_per_bank_attacked}x{banks_attacked}",
                 intensity="H", uncached=True)


# ---------------------------------------------------------------------------
# Random legal schedules (worst-case bandwidth oracle fodder)

def gen_random_schedule(seed: int, length: int, banks: int = 4,
                        rows: int = 64) -> list[tuple[int, int]]:
    rng = np.random.default_rng(seed)
    return [(int(rng.integers(0, banks)), int(rng.integers(0, rows)))
            for _ in range(length)]


# ---------------------------------------------------------------------------
# Safety stress traffic (acceptance suite fodder)

def run_safety_traffic(mitigation, n_acts: int, seed: int = 0,
                       pattern: str = "random", rows_span: int = 512,
                       banks_span: int = 8,
                       timing: TimingParams | None = None) -> DramDevice:
    """Drive one mitigation configuration with a legality-clean activation
    stream and return the device for oracle inspection.

    Patterns: 'random' (uniform rows/banks), 'roundrobin' (balanced
    hammering of a fixed decoy set), 'tight' (few rows in few banks, the
    performance-attack shape). Scheduler-side observer mechanisms run
    against the frequency semantics of the stream (the device carries no
    back-off state for them).
    """
    from .mitigations import MitigationConfig  # local import; no cycle

    assert isinstance(mitigation, MitigationConfig)
    mech = mitigation.mechanism
    if timing is None:
        timing = make_timing(prac_enabled=mitigation.prac_timing)
    policy_name = {"prac": "prac", "prac+prfm": "prac+prfm",
                   "chronus": "chronus", "chronus-pb": "chronus-pb",
                   "prfm": "prfm", "none": "none"}.get(mech, "none")
    config = {"a_both": mitigation.a_both, "n_bo_r": mitigation.n_bo_r,
              "n_bo_a": mitigation.n_bo_a, "n_bo": mitigation.n_bo,
              "rfm_th": mitigation.rfm_th,
              "att_capacity": mitigation.att_capacity}
    harness = AttackHarness.for_policy(policy_name, config, timing)
    geometry = harness.geometry
    observer = mitigation.observer(geometry, timing)
    rng = np.random.default_rng(seed)
    rows_span = min(rows_span, geometry.rows_per_bank)
    if pattern == "random":
        banks = rng.integers(0, banks_span, size=n_acts)
        rows = rng.integers(0, rows_span, size=n_acts) * 5 % geometry.rows_per_bank
    elif pattern == "roundrobin":
        decoys = max(rows_span // 8, 8)
        idx = np.arange(n_acts)
        banks = idx % banks_span
        rows = (idx // banks_span) % decoys * 5
    elif pattern == "tight":
        idx = np.arange(n_acts)
        banks = idx % 4
        rows = (idx // 4) % 8 * 37
    else:
        raise ValueError(f"unknown pattern {pattern!r}")
    window_mark = timing.tREFW
    for i in range(n_acts):
        bank = int(banks[i])
        row = int(rows[i])
        t = harness.hammer(bank, row)
        if observer is not None:
            targets, _ = observer.observe(bank, row, t, rng)
            for tb, trow in targets:
                harness.device.refresh_victims(tb, trow)
            if t >= window_mark:
                observer.window_reset()
                window_mark += timing.tREFW
    harness.finish()
    return harness.device
