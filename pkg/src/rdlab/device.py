"""DRAM device model: banks, per-row activation counters (precharge-time
and concurrent-update variants), the aggressor tracking table, the back-off
state machine, periodic/borrowed refresh, and the 8-bit decrementer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ._kernels import EV_ACT, EV_COUNTER_RESET, EV_REFRESH_ROW
from .timing import ns

BLAST_RADIUS = 2
VICTIM_OFFSETS = (-2, -1, 1, 2)


class ProtocolError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Appendix hardware: 8-bit decrementer

def decrement8_gates(x: int) -> int:
    """Decrement an 8-bit value through the gate network.

    Per-bit expressions:
      y0 = ~x0
      y1 = x0 ? x1 : ~x1
      y2 = nor(x0, x1) ? ~x2 : x2
      yi = nand(y(i-1), ~x(i-1)) ? xi : ~xi   for i = 3..7
    """
    if not 0 <= x <= 255:
        raise ValueError("decrement8 operates on 8-bit values")
    xb = [(x >> i) & 1 for i in range(8)]
    y = [0] * 8
    y[0] = xb[0] ^ 1
    y[1] = xb[1] if xb[0] else xb[1] ^ 1
    nor01 = 1 if (xb[0] | xb[1]) == 0 else 0
    y[2] = xb[2] ^ 1 if nor01 else xb[2]
    for i in range(3, 8):
        sel = 1 - (y[i - 1] & (xb[i - 1] ^ 1))  # nand(y[i-1], ~x[i-1])
        y[i] = xb[i] if sel else xb[i] ^ 1
    return sum(bit << i for i, bit in enumerate(y))


def decrement8(x: int) -> int:
    """Gate-network decrement, cross-checked against plain arithmetic."""
    got = decrement8_gates(x)
    want = (x - 1) % 256
    if got != want:
        raise AssertionError(f"gate network disagrees at {x}: {got} != {want}")
    return got


def decrementer_cost() -> dict:
    """Gate and transistor budget of the decrementer circuit."""
    gates = {"NOT": 8, "MUX": 7, "NAND": 5, "NOR": 1}
    return {"gates": gates, "gate_total": sum(gates.values()), "transistors": 96}


# ---------------------------------------------------------------------------
# Geometry and storage arithmetic

@dataclass(frozen=True)
class DeviceGeometry:
    channels: int = 1
    ranks: int = 2
    bank_groups: int = 8
    banks_per_group: int = 4
    rows_per_bank: int = 65536
    row_size_bits: int = 16384

    def __post_init__(self):
        for name in ("channels", "ranks", "bank_groups", "banks_per_group",
                     "rows_per_bank", "row_size_bits"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")

    @property
    def banks_per_rank(self) -> int:
        return self.bank_groups * self.banks_per_group

    @property
    def banks_per_channel(self) -> int:
        return self.ranks * self.banks_per_rank

    @property
    def total_banks(self) -> int:
        return self.channels * self.banks_per_channel

    @property
    def capacity_bytes(self) -> int:
        return (self.total_banks * self.rows_per_bank * self.row_size_bits) // 8

    @property
    def column_bytes(self) -> int:
        return self.row_size_bits // 8


def counter_subarray_footprint(geometry: DeviceGeometry, counter_bits: int):
    """Size of the per-bank counter subarray holding one counter per row.

    Returns (bytes_per_bank, rows_needed, capacity_overhead_fraction).
    """
    if counter_bits < 1:
        raise ValueError("counter_bits must be >= 1")
    bits = geometry.rows_per_bank * counter_bits
    bytes_per_bank = bits // 8 if bits % 8 == 0 else bits / 8
    rows_needed = -(-bits // geometry.row_size_bits)  # ceil
    overhead = rows_needed / geometry.rows_per_bank
    return bytes_per_bank, rows_needed, overhead


# ---------------------------------------------------------------------------
# Aggressor tracking table

class AggressorTrackingTable:
    """Small per-bank table of the highest-count recently precharged rows.

    Update rules on observation of (row, count):
      1. the row is already present -> update its count;
      2. an entry is invalid -> insert;
      3. count strictly exceeds the lowest tracked count -> replace that
         minimum entry.
    """

    def __init__(self, capacity: int = 4):
        if capacity < 1:
            raise ValueError("ATT capacity must be >= 1")
        self.capacity = capacity
        self.entries: dict[int, int] = {}

    def observe(self, row: int, count: int) -> None:
        if row in self.entries:
            self.entries[row] = count
            return
        if len(self.entries) < self.capacity:
            self.entries[row] = count
            return
        victim_row, victim_count = min(self.entries.items(),
                                       key=lambda kv: (kv[1], kv[0]))
        if count > victim_count:
            del self.entries[victim_row]
            self.entries[row] = count

    def max_entry(self):
        """Highest-count entry, ties broken towards the lowest row index."""
        if not self.entries:
            return None
        return max(self.entries.items(), key=lambda kv: (kv[1], -kv[0]))

    def entries_at_least(self, threshold: int):
        return sorted(((r, c) for r, c in self.entries.items() if c >= threshold),
                      key=lambda kv: (-kv[1], kv[0]))

    def invalidate(self, row: int) -> None:
        self.entries.pop(row, None)

    def __len__(self):
        return len(self.entries)


# ---------------------------------------------------------------------------
# Row counters

class RowCounterStore:
    """Activation counters for one bank.

    'prac' mode: an unbounded up-counter incremented at precharge time.
    'chronus' mode: an 8-bit down-counter decremented at activate time;
    a preload of min(256, threshold) makes the register read zero exactly
    at the threshold'th activation since the last reset.
    """

    def __init__(self, mode: str, chronus_threshold: int = 256):
        if mode not in ("prac", "chronus"):
            raise ValueError(f"unknown counter mode {mode!r}")
        self.mode = mode
        self.preload = min(256, chronus_threshold)
        self.counts: dict[int, int] = {}
        self.regs: dict[int, int] = {}

    def increment(self, row: int) -> tuple[int, bool]:
        """Advance the row's counter; returns (acts_since_reset, fired)."""
        count = self.counts.get(row, 0) + 1
        self.counts[row] = count
        if self.mode == "chronus":
            reg = self.regs.get(row, self.preload % 256)
            reg = decrement8(reg)
            self.regs[row] = reg
            return count, reg == 0
        return count, False

    def get(self, row: int) -> int:
        return self.counts.get(row, 0)

    def reset(self, row: int) -> None:
        self.counts.pop(row, None)
        self.regs.pop(row, None)


# ---------------------------------------------------------------------------
# Back-off signal state machine (per rank)

@dataclass
class BackoffState:
    policy: str  # 'prac' | 'chronus'
    nbo_refs: int = 4
    nbo_acts: int = 4
    phase: str = "idle"  # idle | window | recovery | delay
    asserted_at: int | None = None
    rfms_in_recovery: int = 0
    acts_seen_in_delay: int = 0

    @property
    def asserted(self) -> bool:
        return self.phase in ("window", "recovery")

    def may_assert(self) -> bool:
        if self.policy == "chronus":
            return self.phase == "idle"
        return self.phase == "idle"

    def note_act(self) -> None:
        if self.policy == "prac" and self.phase == "delay":
            self.acts_seen_in_delay += 1
            if self.acts_seen_in_delay >= self.nbo_acts:
                self.phase = "idle"

    def assert_backoff(self, t: int) -> None:
        if self.phase == "delay":
            raise ProtocolError("back-off asserted during the delay phase")
        if self.phase != "idle":
            raise ProtocolError(f"back-off asserted in phase {self.phase}")
        self.phase = "window"
        self.asserted_at = t
        self.rfms_in_recovery = 0

    def enter_recovery(self) -> None:
        if self.phase != "window":
            raise ProtocolError(f"recovery entered from phase {self.phase}")
        self.phase = "recovery"

    def note_rfm(self, still_hot: bool) -> None:
        """Advance recovery bookkeeping after one RFM has been serviced."""
        if self.phase != "recovery":
            return
        self.rfms_in_recovery += 1
        if self.policy == "prac":
            if self.rfms_in_recovery >= self.nbo_refs:
                self.phase = "delay"
                self.acts_seen_in_delay = 0
        else:  # chronus: stay asserted while hot rows remain
            if not still_hot:
                self.phase = "idle"


# ---------------------------------------------------------------------------
# Device

@dataclass
class DevicePolicy:
    """Device-side mitigation parameters.

    mode selects the counter update path (precharge-time 'prac' or
    concurrent 'chronus'); backoff selects the response protocol and
    defaults to the one matching the mode. Mixing mode='chronus' with
    backoff='prac' models the concurrent-update variant that keeps the
    fixed-refresh-count back-off and delay period.
    """

    mode: str | None = None          # None | 'prac' | 'chronus'
    backoff: str | None = None       # None -> follow mode
    a_both: int = 1                  # prac back-off threshold
    n_bo: int = 256                  # chronus back-off threshold
    nbo_refs: int = 4
    nbo_acts: int = 4
    att_capacity: int = 4
    alert_delay_ps: int = ns(5)
    borrowed_refresh: bool = True

    @property
    def backoff_policy(self) -> str:
        if self.backoff is not None:
            return self.backoff
        return "chronus" if self.mode == "chronus" else "prac"

    @property
    def fire_threshold(self) -> int:
        """Counter value at which the concurrent-update path fires."""
        return self.n_bo

    @staticmethod
    def none() -> "DevicePolicy":
        return DevicePolicy(mode=None)


@dataclass
class _BankCell:
    open_row: int | None = None
    att: AggressorTrackingTable = field(default_factory=lambda: AggressorTrackingTable(4))
    counters: RowCounterStore | None = None


class DramDevice:
    """All ranks/banks of one channel, with device-side mitigation state.

    Emits (kind, key) oracle events into event_kinds/event_keys; keys are
    bank * rows_per_bank + row with a channel-flat bank index.
    """

    def __init__(self, geometry: DeviceGeometry, policy: DevicePolicy,
                 rows_per_ref: int | None = None, ref_slots: int | None = None):
        self.geometry = geometry
        self.policy = policy
        self.banks: list[_BankCell] = []
        for _ in range(geometry.banks_per_channel):
            cell = _BankCell()
            cell.att = AggressorTrackingTable(policy.att_capacity)
            if policy.mode == "prac":
                cell.counters = RowCounterStore("prac")
            elif policy.mode == "chronus":
                cell.counters = RowCounterStore("chronus", policy.n_bo)
            self.banks.append(cell)
        self.backoff = [BackoffState(policy=policy.backoff_policy,
                                     nbo_refs=policy.nbo_refs,
                                     nbo_acts=policy.nbo_acts)
                        for _ in range(geometry.ranks)]
        # periodic refresh bookkeeping (per rank)
        if ref_slots is None:
            ref_slots = 8192
        if rows_per_ref is None:
            rows_per_ref = -(-geometry.rows_per_bank // ref_slots)
        self.rows_per_ref = rows_per_ref
        self.ref_pointer = [0] * geometry.ranks
        self.ref_count = [0] * geometry.ranks
        self.ref_wraps = [0] * geometry.ranks
        # oracle event log
        self.event_kinds: list[int] = []
        self.event_keys: list[int] = []
        # refresh feedback channel (privileged; consumed by attack generators)
        self.refresh_feed: list[tuple[int, int]] = []
        self.stats = {"rfm_refreshes": 0, "borrowed_refreshes": 0,
                      "backoff_asserts": 0}

    # -- helpers ----------------------------------------------------------

    def rank_of(self, bank: int) -> int:
        return bank // self.geometry.banks_per_rank

    def _key(self, bank: int, row: int) -> int:
        return bank * self.geometry.rows_per_bank + row

    def _log(self, kind: int, bank: int, row: int) -> None:
        self.event_kinds.append(kind)
        self.event_keys.append(self._key(bank, row))

    def victims_of(self, row: int):
        rows = self.geometry.rows_per_bank
        return [row + off for off in VICTIM_OFFSETS if 0 <= row + off < rows]

    def alert(self, rank: int) -> bool:
        return self.backoff[rank].asserted

    # -- commands ---------------------------------------------------------

    def on_activate(self, bank: int, row: int, t: int):
        """Open a row. Returns the alert assertion time if the activation
        fired the device back-off condition (concurrent-update mode)."""
        cell = self.banks[bank]
        if cell.open_row is not None:
            raise ProtocolError(f"ACT to open bank {bank}")
        if not 0 <= row < self.geometry.rows_per_bank:
            raise ProtocolError(f"row {row} out of range")
        cell.open_row = row
        self._log(EV_ACT, bank, row)
        rank = self.rank_of(bank)
        bo = self.backoff[rank]
        bo.note_act()
        if self.policy.mode == "chronus":
            count, fired = cell.counters.increment(row)
            cell.att.observe(row, count)
            if self.policy.backoff_policy == "prac":
                # fixed-refresh back-off reasserts on any at-threshold row
                fired = count >= self.policy.n_bo
            if fired and bo.may_assert():
                assert_t = t + self.policy.alert_delay_ps
                bo.assert_backoff(assert_t)
                self.stats["backoff_asserts"] += 1
                return assert_t
            return None
        return None

    def on_precharge(self, bank: int, t: int):
        """Close the open row. In precharge-count mode this updates the
        row's counter and the tracking table, and may assert the back-off
        (shortly after the precharge). Returns the assertion time or None."""
        cell = self.banks[bank]
        if cell.open_row is None:
            raise ProtocolError(f"PRE to closed bank {bank}")
        row = cell.open_row
        cell.open_row = None
        if self.policy.mode != "prac":
            return None
        count, _ = cell.counters.increment(row)
        cell.att.observe(row, count)
        rank = self.rank_of(bank)
        bo = self.backoff[rank]
        if count >= self.policy.a_both and bo.may_assert():
            assert_t = t + self.policy.alert_delay_ps
            bo.assert_backoff(assert_t)
            self.stats["backoff_asserts"] += 1
            return assert_t
        return None

    def enter_recovery(self, rank: int) -> None:
        self.backoff[rank].enter_recovery()

    def _refresh_aggressor(self, bank: int, row: int,
                           stat: str = "rfm_refreshes") -> None:
        """Refresh the victims of an aggressor row and reset its counter."""
        for v in self.victims_of(row):
            self._log(EV_REFRESH_ROW, bank, v)
        self._log(EV_COUNTER_RESET, bank, row)
        cell = self.banks[bank]
        if cell.counters is not None:
            cell.counters.reset(row)
        cell.att.invalidate(row)
        self.refresh_feed.append((bank, row))
        self.stats[stat] += 1

    def _hot_rows_remain(self, rank: int) -> bool:
        start = rank * self.geometry.banks_per_rank
        for bank in range(start, start + self.geometry.banks_per_rank):
            if self.banks[bank].att.entries_at_least(self.policy.n_bo):
                return True
        return False

    def on_rfm(self, rank: int, t: int) -> list[tuple[int, int]]:
        """Service one all-bank refresh-management command for a rank.

        Refreshes one aggressor per bank: a row at/above the back-off
        threshold under the stay-asserted protocol, else the maximum-count
        table entry. Returns the refreshed (bank, row) pairs.
        """
        refreshed = []
        start = rank * self.geometry.banks_per_rank
        for bank in range(start, start + self.geometry.banks_per_rank):
            cell = self.banks[bank]
            if self.policy.backoff_policy == "chronus":
                hot = cell.att.entries_at_least(self.policy.n_bo)
                if not hot:
                    continue
                row, _ = hot[0]
            else:
                entry = cell.att.max_entry()
                if entry is None:
                    continue
                row, _ = entry
            self._refresh_aggressor(bank, row)
            refreshed.append((bank, row))
        bo = self.backoff[rank]
        bo.note_rfm(still_hot=self._hot_rows_remain(rank)
                    if self.policy.backoff_policy == "chronus" else True)
        return refreshed

    def on_ref(self, rank: int, t: int) -> None:
        """Periodic refresh: one stripe of rows in every bank of the rank,
        plus a borrowed refresh of the hottest tracked aggressor on every
        other refresh command."""
        ptr = self.ref_pointer[rank]
        rows = self.geometry.rows_per_bank
        start = rank * self.geometry.banks_per_rank
        for bank in range(start, start + self.geometry.banks_per_rank):
            cell = self.banks[bank]
            for r in range(ptr, min(ptr + self.rows_per_ref, rows)):
                self._log(EV_REFRESH_ROW, bank, r)
                self._log(EV_COUNTER_RESET, bank, r)
                if cell.counters is not None:
                    cell.counters.reset(r)
                cell.att.invalidate(r)
        nxt = ptr + self.rows_per_ref
        if nxt >= rows:
            nxt = 0
            self.ref_wraps[rank] += 1
        self.ref_pointer[rank] = nxt
        self.ref_count[rank] += 1
        if self.policy.borrowed_refresh and self.policy.mode is not None \
                and self.ref_count[rank] % 2 == 0:
            for bank in range(start, start + self.geometry.banks_per_rank):
                entry = self.banks[bank].att.max_entry()
                if entry is None:
                    continue
                row, _ = entry
                self._refresh_aggressor(bank, row, stat="borrowed_refreshes")

    def refresh_victims(self, bank: int, row: int) -> None:
        """Controller-side preventive refresh of one aggressor's victims
        (used by scheduler-level mechanisms)."""
        for v in self.victims_of(row):
            self._log(EV_REFRESH_ROW, bank, v)
        self._log(EV_COUNTER_RESET, bank, row)
        self.refresh_feed.append((bank, row))

    # -- debugging --------------------------------------------------------

    def dump_state(self) -> str:
        out = {"banks": []}
        for i, cell in enumerate(self.banks):
            out["banks"].append({
                "bank": i,
                "open_row": cell.open_row,
                "att": dict(sorted(cell.att.entries.items())),
                "counters": dict(sorted(cell.counters.counts.items()))
                if cell.counters else {},
            })
        return json.dumps(out, indent=2, sort_keys=True)
