"""Trace-driven memory system: 4-wide cores with a bounded instruction
window, a shared last-level cache, and a per-channel memory controller
running FR-FCFS with a column-access cap, refresh scheduling with
postponement, refresh-management counting, and the back-off response
protocol.

Within a back-off normal-traffic window the controller serves only
requests whose last data beat fits before the deadline; recovery refreshes
run synchronously (cross-rank overlap during a recovery is not modeled).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .attacks import Trace
from .device import DeviceGeometry, DramDevice
from .mapping import AddressMapper
from .metrics import CommandCounts, EnergyWeights, energy, oracle_check
from .mitigations import MitigationConfig
from .timing import BankTimingTracker, CommandKind, TimingParams, make_timing

# core clock: 4.2 GHz = 21 cycles per 5000 ps, 4-wide issue
CPU_CYCLES_NUM = 21
CPU_CYCLES_DEN_PS = 5000
ISSUE_WIDTH = 4
INSTR_WINDOW = 128
LLC_HIT_PS = 3000   # fixed hit latency charged to loads
# miss-path constant outside DRAM timing: LLC miss handling, controller
# frontend/backend, PHY round trip
MISS_PATH_PS = 50_000

READ_Q_CAP = 64
WRITE_Q_CAP = 64
WRITE_DRAIN_HI = 48   # 3/4 full starts a drain batch
WRITE_DRAIN_LO = 16


def ps_to_cycles(ps: int) -> int:
    return ps * CPU_CYCLES_NUM // CPU_CYCLES_DEN_PS


def cycles_to_ps(cycles: int) -> int:
    return -(-cycles * CPU_CYCLES_DEN_PS // CPU_CYCLES_NUM)


@dataclass
class Request:
    core: int
    is_write: bool
    address: int
    arrival: int
    bank: int
    row: int
    column: int
    rank: int
    seq: int = 0
    read_id: int = -1
    classified: bool = False


class Core:
    """Trace core: bubbles retire four per cycle; loads overlap within the
    instruction window (stall when the window fills behind an incomplete
    load); stores post without stalling."""

    def __init__(self, cid: int, trace: Trace, budget: int):
        self.cid = cid
        self.trace = trace.entries
        self.uncached = trace.uncached
        self.budget = budget
        self.pos = 0
        self.entry_started = False  # bubbles of trace[pos] already consumed
        self.slot = 0            # issue slots consumed (1 per instruction)
        self.instr = 0           # instructions dispatched
        self.reads_submitted = 0
        self.outstanding: list[list[int]] = []  # [read_id, instr_idx, completion_ps]
        self._early_binds: dict[int, int] = {}
        self.floor_ps = 0
        self.finish_ps: int | None = None

    def time_ps(self) -> int:
        paced = cycles_to_ps(-(-self.slot // ISSUE_WIDTH))
        return max(paced, self.floor_ps)

    def done(self) -> bool:
        return self.finish_ps is not None

    def bind_read(self, read_id: int, completion_ps: int) -> None:
        for entry in self.outstanding:
            if entry[0] == read_id:
                entry[2] = completion_ps
                return
        self._early_binds[read_id] = completion_ps

    def next_wakeup(self) -> int | None:
        """Earliest completion that could unblock the core, if any."""
        bound = [e[2] for e in self.outstanding if e[2] >= 0]
        return min(bound) if bound else None

    def run(self, now: int, submit) -> None:
        if self.finish_ps is not None:
            return
        trace = self.trace
        n_entries = len(trace)
        while True:
            # retire completed loads from the window head
            while self.outstanding:
                comp = self.outstanding[0][2]
                if comp < 0 or comp > now:
                    break
                if comp > self.floor_ps:
                    self.floor_ps = comp
                self.outstanding.pop(0)
            if self.instr >= self.budget:
                if self.outstanding:
                    return  # drain in-flight loads before finishing
                self.finish_ps = self.time_ps()
                return
            if self.outstanding and \
                    self.instr - self.outstanding[0][1] >= INSTR_WINDOW:
                return  # window full behind an incomplete load
            t_ps = self.time_ps()
            if t_ps > now:
                return  # ahead of the memory system clock
            entry = trace[self.pos % n_entries]
            if not self.entry_started:
                self.entry_started = True
                bubbles = min(entry.bubbles, self.budget - self.instr)
                if bubbles:
                    self.slot += bubbles
                    self.instr += bubbles
                    if self.instr >= self.budget:
                        continue
            read_id = self.reads_submitted if not entry.is_write else -1
            if not submit(self, entry.address, entry.is_write,
                          self.time_ps(), read_id):
                return  # backpressure; the entry's access retries later
            if not entry.is_write:
                comp = self._early_binds.pop(read_id, -1)
                self.outstanding.append([read_id, self.instr, comp])
                self.reads_submitted += 1
            self.slot += 1
            self.instr += 1
            self.pos += 1
            self.entry_started = False


class SharedCache:
    """8 MiB, 8-way, 64-byte-line LRU cache shared by all cores."""

    def __init__(self, size_bytes: int = 8 << 20, ways: int = 8, line: int = 64):
        self.ways = ways
        self.line_bits = line.bit_length() - 1
        self.sets = size_bytes // (ways * line)
        self.tags: list[list[int]] = [[] for _ in range(self.sets)]
        self.dirty: list[set[int]] = [set() for _ in range(self.sets)]
        self.hits = 0
        self.misses = 0

    def access(self, address: int, is_write: bool):
        """Returns (hit, writeback_address or None)."""
        block = address >> self.line_bits
        idx = block % self.sets
        tag = block // self.sets
        ways = self.tags[idx]
        if tag in ways:
            ways.remove(tag)
            ways.append(tag)
            if is_write:
                self.dirty[idx].add(tag)
            self.hits += 1
            return True, None
        self.misses += 1
        wb = None
        if len(ways) >= self.ways:
            victim = ways.pop(0)
            if victim in self.dirty[idx]:
                self.dirty[idx].discard(victim)
                wb = (victim * self.sets + idx) << self.line_bits
        ways.append(tag)
        if is_write:
            self.dirty[idx].add(tag)
        return False, wb


@dataclass
class RefState:
    next_due: int     # schedule tick; advances by tREFI regardless of issue
    debt: int = 0     # refreshes due but not yet issued (at most 4 postponed)


@dataclass
class RankProtocol:
    window_deadline: int | None = None
    recovery_active: bool = False


@dataclass
class SimConfig:
    mitigation: MitigationConfig = field(default_factory=MitigationConfig)
    geometry: DeviceGeometry = field(default_factory=DeviceGeometry)
    mapping: str = "mop"
    timing_overrides: dict = field(default_factory=dict)
    instructions_per_core: int = 1_000_000
    max_cycles: int | None = None
    seed: int = 0
    use_cache: bool = True
    scheduler_cap: int = 4
    refresh_postpone_max: int = 4
    refresh_enabled: bool = True
    energy_weights: EnergyWeights = field(default_factory=EnergyWeights)

    def timing(self) -> TimingParams:
        return make_timing(self.mitigation.prac_timing,
                           overrides_ns=self.timing_overrides)


class ChannelSim:
    """One memory channel plus its cores: the experiment unit."""

    def __init__(self, config: SimConfig, traces: list[Trace]):
        self.config = config
        self.timing = config.timing()
        self.geometry = config.geometry
        self.mapper = AddressMapper(self.geometry, config.mapping)
        self.mitigation = config.mitigation
        self.device = DramDevice(self.geometry, self.mitigation.device_policy())
        self.tracker = BankTimingTracker(self.timing,
                                         self.geometry.banks_per_channel,
                                         self.geometry.banks_per_rank)
        self.observer = self.mitigation.observer(self.geometry, self.timing)
        self.rng = np.random.default_rng(config.seed)
        self.cache = SharedCache() if config.use_cache else None
        self.cores = [Core(i, tr, config.instructions_per_core)
                      for i, tr in enumerate(traces)]
        self.now = 0
        self.read_q: list[Request] = []
        self.write_q: list[Request] = []
        self.write_drain = False
        self.seq = 0
        self.counts = CommandCounts()
        self.row_hits = 0
        self.row_misses = 0
        self.row_conflicts = 0
        self.hit_streak = [0] * self.geometry.banks_per_channel
        self.bank_busy_until = [0] * self.geometry.banks_per_channel
        self.refresh = [RefState(next_due=self.timing.tREFI)
                        for _ in range(self.geometry.ranks)]
        self.protocol = [RankProtocol() for _ in range(self.geometry.ranks)]
        self.prfm_counters = [0] * self.geometry.banks_per_channel
        self.prfm_pending: set[int] = set()
        self.completions: list[tuple[int, int, int]] = []  # (t, core, read_id)
        self.trefw_mark = self.timing.tREFW
        self.backoff_count = 0
        self.prfm_active = self.mitigation.mechanism in ("prfm", "prac+prfm")

    # -- request intake ------------------------------------------------------

    def _submit(self, core: Core, address: int, is_write: bool,
                arrival: int, read_id: int) -> bool:
        address %= self.geometry.capacity_bytes
        if self.cache is not None and not core.uncached:
            # worst case needs one fill slot and one writeback slot
            if len(self.read_q) >= READ_Q_CAP or len(self.write_q) >= WRITE_Q_CAP:
                return False
            hit, writeback = self.cache.access(address, is_write)
            if writeback is not None:
                self.write_q.append(self._mk_request(core, writeback, True,
                                                     arrival))
            if hit:
                if not is_write:
                    core.bind_read(read_id, arrival + LLC_HIT_PS)
                    self.completions.append((arrival + LLC_HIT_PS, core.cid,
                                             read_id))
                return True
            req = self._mk_request(core, address, False, arrival)
            if is_write:
                req.core = -1  # allocate-on-write fill; nobody waits
            else:
                req.read_id = read_id
            self.read_q.append(req)
            return True
        if is_write:
            if len(self.write_q) >= WRITE_Q_CAP:
                return False
            self.write_q.append(self._mk_request(core, address, True, arrival))
            return True
        if len(self.read_q) >= READ_Q_CAP:
            return False
        req = self._mk_request(core, address, False, arrival)
        req.read_id = read_id
        self.read_q.append(req)
        return True

    def _mk_request(self, core: Core, address: int, is_write: bool,
                    arrival: int) -> Request:
        f = self.mapper.decode(address)
        self.seq += 1
        return Request(core=core.cid, is_write=is_write, address=address,
                       arrival=max(arrival, 0),
                       bank=f.flat_bank(self.geometry), row=f.row,
                       column=f.column, rank=f.rank, seq=self.seq)

    # -- protocol helpers ------------------------------------------------------

    def _alert(self, assert_t: int | None, rank: int) -> None:
        if assert_t is None:
            return
        self.backoff_count += 1
        self.protocol[rank].window_deadline = assert_t + self.timing.tABOact

    def _serveable_in_window(self, cmd: CommandKind, t_cmd: int,
                             deadline: int) -> bool:
        t = self.timing
        if cmd is CommandKind.ACT:
            return t.read_data_beat(t_cmd + t.tRCD) <= deadline
        if cmd is CommandKind.RD:
            return t.read_data_beat(t_cmd) <= deadline
        if cmd is CommandKind.WR:
            return t.write_data_beat(t_cmd) <= deadline
        return True  # precharges may always proceed

    def _precharge_rank(self, rank: int) -> None:
        base = rank * self.geometry.banks_per_rank
        for bank in range(base, base + self.geometry.banks_per_rank):
            if self.device.banks[bank].open_row is not None:
                t = self.tracker.earliest_issue_time(CommandKind.PRE, bank,
                                                     self.now)
                self._record(CommandKind.PRE, bank, t)
                alert = self.device.on_precharge(bank, t)
                self._alert(alert, rank)
                self.hit_streak[bank] = 0

    def _run_recovery(self, rank: int) -> None:
        proto = self.protocol[rank]
        proto.recovery_active = True
        self._precharge_rank(rank)
        self.device.enter_recovery(rank)
        base = rank * self.geometry.banks_per_rank
        guard = 0
        while self.device.backoff[rank].phase == "recovery":
            t = self.tracker.earliest_issue_time(CommandKind.RFMAB, base,
                                                 self.now)
            self._record(CommandKind.RFMAB, base, t)
            self.counts.rfm += 1
            self.device.on_rfm(rank, t)
            self.now = t + self.timing.tRFM
            guard += 1
            if guard > 1_000_000:
                raise RuntimeError("recovery stuck")
        proto.recovery_active = False
        proto.window_deadline = None

    def _record(self, cmd: CommandKind, bank: int, t: int) -> None:
        self.tracker.record(cmd, bank, t)
        c = self.counts
        if cmd is CommandKind.ACT:
            c.act += 1
        elif cmd is CommandKind.PRE:
            c.pre += 1
        elif cmd is CommandKind.RD:
            c.rd += 1
        elif cmd is CommandKind.WR:
            c.wr += 1
        elif cmd is CommandKind.REF:
            c.ref += 1
        if t > self.now:
            self.now = t

    # -- mechanism hooks --------------------------------------------------------

    def _after_act(self, bank: int, row: int, t: int) -> None:
        rank = bank // self.geometry.banks_per_rank
        if self.prfm_active:
            self.prfm_counters[bank] += 1
            if self.prfm_counters[bank] >= self.mitigation.rfm_th:
                self.prfm_pending.add(rank)
        if self.observer is not None:
            targets, extra_cols = self.observer.observe(bank, row, t, self.rng)
            if extra_cols:
                self.bank_busy_until[bank] = max(
                    self.bank_busy_until[bank],
                    t + extra_cols * self.timing.burst_time)
            for tb, trow in targets:
                self.device.refresh_victims(tb, trow)
                n = len(self.device.victims_of(trow))
                self.counts.preventive_act_pairs += n
                start = max(t, self.bank_busy_until[tb])
                self.bank_busy_until[tb] = start + n * self.timing.tRC

    def _prfm_ripe(self, rank: int) -> bool:
        """A pending refresh-management command waits for in-flight row
        hits (open-row column accesses) to drain, so the activation that
        triggered it still completes its access."""
        banks = self.device.banks
        for queue in (self.read_q, self.write_q):
            for req in queue:
                if req.rank == rank and req.arrival <= self.now and \
                        banks[req.bank].open_row == req.row:
                    return False
        return True

    def _issue_prfm(self, rank: int) -> None:
        self._precharge_rank(rank)
        base = rank * self.geometry.banks_per_rank
        t = self.tracker.earliest_issue_time(CommandKind.RFMAB, base, self.now)
        self._record(CommandKind.RFMAB, base, t)
        self.counts.rfm += 1
        self.device.on_rfm(rank, t)
        self.now = t + self.timing.tRFM
        for bank in range(base, base + self.geometry.banks_per_rank):
            self.prfm_counters[bank] = 0
        self.prfm_pending.discard(rank)

    # -- refresh ------------------------------------------------------------------

    def _tick_refresh(self) -> bool:
        """One refresh command becomes due every tREFI; up to
        refresh_postpone_max of them may be outstanding under demand
        pressure before the next one is forced (bounding the command gap
        at (postpone_max + 1) x tREFI)."""
        t = self.timing
        issued = False
        for rank, ref in enumerate(self.refresh):
            while self.now >= ref.next_due:
                ref.debt += 1
                ref.next_due += t.tREFI
            if ref.debt == 0:
                continue
            if ref.debt <= self.config.refresh_postpone_max:
                demand_ready = any(r.arrival <= self.now for r in self.read_q) \
                    or any(r.arrival <= self.now for r in self.write_q)
                if demand_ready:
                    continue  # postpone
            self._precharge_rank(rank)
            base = rank * self.geometry.banks_per_rank
            ti = self.tracker.earliest_issue_time(CommandKind.REF, base, self.now)
            self._record(CommandKind.REF, base, ti)
            self.device.on_ref(rank, ti)
            ref.debt -= 1
            issued = True
        return issued

    # -- scheduler ------------------------------------------------------------------

    def _queue(self) -> list[Request]:
        if self.write_drain:
            if len(self.write_q) <= WRITE_DRAIN_LO:
                self.write_drain = False
            else:
                return self.write_q
        elif len(self.write_q) >= WRITE_DRAIN_HI:
            self.write_drain = True
            return self.write_q
        if not self.read_q and self.write_q:
            return self.write_q
        return self.read_q

    def _pick_and_issue(self) -> bool:
        queue = self._queue()
        if not queue:
            return False
        t_now = self.now
        cap = self.config.scheduler_cap
        banks = self.device.banks
        per_bank_oldest: dict[int, Request] = {}
        per_bank_hit: dict[int, Request] = {}
        for req in queue:
            if req.arrival > t_now:
                continue
            if self.protocol[req.rank].recovery_active:
                continue
            bank = req.bank
            hit = banks[bank].open_row == req.row
            if req.rank in self.prfm_pending and not hit:
                continue  # only open-row accesses proceed before the RFM
            if bank not in per_bank_oldest:
                per_bank_oldest[bank] = req
            if hit and bank not in per_bank_hit:
                per_bank_hit[bank] = req
        if not per_bank_oldest:
            return False
        best = None  # (issue_time, seq, req, cmd)
        for bank, oldest in per_bank_oldest.items():
            open_row = banks[bank].open_row
            hit = per_bank_hit.get(bank)
            use = hit
            if hit is not None and self.hit_streak[bank] >= cap and \
                    oldest.seq < hit.seq and oldest.row != open_row:
                use = None  # the cap yields to the older conflicting request
            if use is not None:
                req = use
                cmd = CommandKind.WR if req.is_write else CommandKind.RD
            else:
                req = oldest
                if open_row is None:
                    cmd = CommandKind.ACT
                elif open_row == req.row:
                    cmd = CommandKind.WR if req.is_write else CommandKind.RD
                else:
                    cmd = CommandKind.PRE
            t_cmd = self.tracker.earliest_issue_time(cmd, bank, t_now)
            if self.bank_busy_until[bank] > t_cmd:
                t_cmd = self.bank_busy_until[bank]
            deadline = self.protocol[req.rank].window_deadline
            if deadline is not None and \
                    not self._serveable_in_window(cmd, t_cmd, deadline):
                continue
            if best is None or (t_cmd, req.seq) < (best[0], best[1]):
                best = (t_cmd, req.seq, req, cmd)
        if best is None:
            # back-off window with nothing serveable: stop waiting, recover
            for rank, proto in enumerate(self.protocol):
                if proto.window_deadline is not None and not proto.recovery_active:
                    self._run_recovery(rank)
                    return True
            return False
        t_cmd, _, req, cmd = best
        bank = req.bank
        rank = req.rank
        self._record(cmd, bank, t_cmd)
        if cmd is CommandKind.ACT:
            alert = self.device.on_activate(bank, req.row, t_cmd)
            self._alert(alert, rank)
            if not req.classified:
                req.classified = True
                self.row_misses += 1
            self.hit_streak[bank] = 0
            self._after_act(bank, req.row, t_cmd)
        elif cmd is CommandKind.PRE:
            alert = self.device.on_precharge(bank, t_cmd)
            self._alert(alert, rank)
            if not req.classified:
                req.classified = True
                self.row_conflicts += 1
            self.hit_streak[bank] = 0
        else:
            if not req.classified:
                req.classified = True
                self.row_hits += 1
            self.hit_streak[bank] += 1
            queue.remove(req)
            if cmd is CommandKind.RD and req.core >= 0:
                completion = self.timing.read_data_beat(t_cmd) + MISS_PATH_PS
                core = self.cores[req.core]
                core.bind_read(req.read_id, completion)
                self.completions.append((completion, req.core, req.read_id))
        return True

    # -- main loop ---------------------------------------------------------------

    def run(self) -> "SimResult":
        cores = self.cores
        max_ps = cycles_to_ps(self.config.max_cycles) \
            if self.config.max_cycles is not None else None
        while True:
            if all(c.finish_ps is not None for c in cores):
                break
            if max_ps is not None and self.now > max_ps:
                break
            self._deliver_completions()
            for core in cores:
                core.run(self.now, self._submit)
            if all(c.finish_ps is not None for c in cores):
                break
            for rank, proto in enumerate(self.protocol):
                if proto.window_deadline is not None and \
                        not proto.recovery_active and \
                        self.now >= proto.window_deadline:
                    self._run_recovery(rank)
            if self.config.refresh_enabled and self._tick_refresh():
                continue
            for rank in list(self.prfm_pending):
                if not self.protocol[rank].recovery_active and \
                        self._prfm_ripe(rank):
                    self._issue_prfm(rank)
            if self.observer is not None and self.now >= self.trefw_mark:
                self.observer.window_reset()
                self.trefw_mark += self.timing.tREFW
            if self._pick_and_issue():
                continue
            nxt = self._next_event_time()
            if nxt is not None:
                self.now = nxt
            elif not self._handle_stall():
                break
        return self._result()

    def _handle_stall(self) -> bool:
        for rank, proto in enumerate(self.protocol):
            if proto.window_deadline is not None and not proto.recovery_active:
                self._run_recovery(rank)
                return True
        return False

    def _deliver_completions(self) -> None:
        if not self.completions:
            return
        now = self.now
        self.completions = [c for c in self.completions if c[0] > now]

    def _next_event_time(self):
        now = self.now
        best = None
        for t, _, _ in self.completions:
            if t > now and (best is None or t < best):
                best = t
        for req in self.read_q:
            if req.arrival > now and (best is None or req.arrival < best):
                best = req.arrival
        for req in self.write_q:
            if req.arrival > now and (best is None or req.arrival < best):
                best = req.arrival
        if self.config.refresh_enabled:
            for ref in self.refresh:
                if ref.next_due > now and (best is None or ref.next_due < best):
                    best = ref.next_due
        for proto in self.protocol:
            t = proto.window_deadline
            if t is not None and t > now and (best is None or t < best):
                best = t
        for core in self.cores:
            if core.finish_ps is None:
                w = core.next_wakeup()
                t = w if w is not None else core.time_ps()
                if t > now and (best is None or t < best):
                    best = t
        return best

    # -- results ------------------------------------------------------------------

    def _result(self) -> "SimResult":
        per_core = []
        for core in sorted(self.cores, key=lambda c: c.cid):
            t_ps = core.finish_ps if core.finish_ps is not None \
                else max(core.time_ps(), self.now)
            cycles = max(ps_to_cycles(t_ps), 1)
            per_core.append({"instructions": core.instr, "cycles": cycles,
                             "ipc": core.instr / cycles})
        total_instr = sum(pc["instructions"] for pc in per_core)
        rbmpki = (self.row_misses + self.row_conflicts) \
            / max(total_instr / 1000.0, 1e-9)
        chronus_ccu = self.mitigation.mechanism in ("chronus", "chronus-pb")
        energy_parts = energy(self.counts, self.config.energy_weights,
                              chronus_ccu=chronus_ccu)
        return SimResult(
            config=self.config,
            per_core=per_core,
            commands=self.counts.as_dict(),
            row_hits=self.row_hits,
            row_misses=self.row_misses,
            row_conflicts=self.row_conflicts,
            rbmpki=rbmpki,
            rfm_count=self.counts.rfm,
            ref_count=self.counts.ref,
            backoff_count=self.backoff_count,
            energy=energy_parts,
            device=self.device,
            end_ps=self.now,
        )


@dataclass
class SimResult:
    config: SimConfig
    per_core: list
    commands: dict
    row_hits: int
    row_misses: int
    row_conflicts: int
    rbmpki: float
    rfm_count: int
    ref_count: int
    backoff_count: int
    energy: dict
    device: DramDevice = field(repr=False)
    end_ps: int = 0

    def ipcs(self) -> list[float]:
        return [pc["ipc"] for pc in self.per_core]

    def oracle(self, n_rh: int):
        return oracle_check(self.device, n_rh)

    def to_json(self, n_rh: int | None = None) -> dict:
        cfg = {
            "mechanism": self.config.mitigation.mechanism,
            "n_rh": self.config.mitigation.n_rh,
            "mapping": self.config.mapping,
            "instructions_per_core": self.config.instructions_per_core,
            "seed": self.config.seed,
            "use_cache": self.config.use_cache,
        }
        blob = json.dumps(cfg, sort_keys=True).encode()
        out = {
            "schema_version": 1,
            "config": cfg,
            "config_hash": hashlib.sha256(blob).hexdigest()[:16],
            "per_core": [{k: (round(v, 6) if isinstance(v, float) else v)
                          for k, v in pc.items()} for pc in self.per_core],
            "commands": self.commands,
            "row_hits": self.row_hits,
            "row_misses": self.row_misses,
            "row_conflicts": self.row_conflicts,
            "rbmpki": round(self.rbmpki, 4),
            "rfm_count": self.rfm_count,
            "ref_count": self.ref_count,
            "backoff_count": self.backoff_count,
            "energy": {k: round(v, 3) for k, v in self.energy.items()},
            "end_ps": self.end_ps,
        }
        if n_rh is not None:
            out["oracle"] = self.oracle(n_rh).summary()
        return out


def simulate(config: SimConfig, traces: list[Trace]) -> SimResult:
    return ChannelSim(config, traces).run()


def alone_ipcs(config: SimConfig, traces: list[Trace]) -> list[float]:
    """Per-core IPC when each trace runs alone on the same configuration."""
    out = []
    for trace in traces:
        res = simulate(config, [trace])
        out.append(res.per_core[0]["ipc"])
    return out
