"""Pluggable mitigation mechanisms and their storage models.

Device-side mechanisms (per-row counting with precharge-time or concurrent
updates) live in the device model; this module owns the scheduler-side
observers (frequent-item tracking, probabilistic refresh, two-level
counting, sibling-row shared counting) and the storage arithmetic for all
of them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import analytic
from .device import DeviceGeometry, DevicePolicy
from .timing import TimingParams, make_timing

MECHANISMS = ("none", "prfm", "prac", "prac+prfm", "chronus", "chronus-pb",
              "graphene", "hydra", "para", "abacus")

PRAC_PRFM_DEFAULT_TH = 75  # example configuration paired with back-off


class MisraGriesTable:
    """Frequent-item counter table with a spill (decrement-base) counter.

    Classic guarantee: any key whose true count exceeds
    stream_length / (capacity + 1) is present in the table.
    """

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.entries: dict[int, int] = {}
        self.spill = 0

    def observe(self, key: int) -> int:
        """Insert/count one occurrence; returns the key's current estimate
        (0 if the key is not tracked after the update)."""
        entries = self.entries
        if key in entries:
            entries[key] += 1
            return entries[key] - self.spill
        if len(entries) < self.capacity:
            entries[key] = self.spill + 1
            return 1
        self.spill += 1
        dead = [k for k, v in entries.items() if v <= self.spill]
        for k in dead:
            del entries[k]
        return 0

    def estimate(self, key: int) -> int:
        return max(self.entries.get(key, self.spill) - self.spill, 0)

    def drop(self, key: int) -> None:
        self.entries.pop(key, None)

    def reset(self) -> None:
        self.entries.clear()
        self.spill = 0


# ---------------------------------------------------------------------------
# Observer mechanisms (scheduler side)

class Observer:
    """Watches activations; returns aggressor rows whose victims to refresh.

    observe() -> (targets, extra_column_accesses) where targets is a list of
    (bank, row) aggressors and extra_column_accesses charges counter-fetch
    traffic to the open bank.
    """

    needs_rng = False

    def observe(self, bank: int, row: int, t: int, rng) -> tuple[list, int]:
        raise NotImplementedError

    def window_reset(self) -> None:
        """Called at refresh-window boundaries."""


class GrapheneObserver(Observer):
    def __init__(self, n_rh: int, geometry: DeviceGeometry, timing: TimingParams):
        self.threshold = max(n_rh // 2, 1)
        capacity = graphene_entries(n_rh, timing)
        self.tables = [MisraGriesTable(capacity)
                       for _ in range(geometry.banks_per_channel)]

    def observe(self, bank, row, t, rng):
        est = self.tables[bank].observe(row)
        if est >= self.threshold:
            self.tables[bank].drop(row)
            return [(bank, row)], 0
        return [], 0

    def window_reset(self):
        for table in self.tables:
            table.reset()


class AbacusObserver(Observer):
    """One shared counter per row index across all banks."""

    def __init__(self, n_rh: int, geometry: DeviceGeometry, timing: TimingParams):
        self.threshold = max(n_rh // 2, 1)
        self.geometry = geometry
        self.table = MisraGriesTable(abacus_entries(n_rh, timing))

    def observe(self, bank, row, t, rng):
        est = self.table.observe(row)
        if est >= self.threshold:
            self.table.drop(row)
            return [(b, row) for b in range(self.geometry.banks_per_channel)], 0
        return [], 0

    def window_reset(self):
        self.table.reset()


class ParaObserver(Observer):
    """Stateless: refresh the blast-radius victim set with probability p."""

    needs_rng = True

    def __init__(self, n_rh: int):
        self.p = para_probability(n_rh)

    def observe(self, bank, row, t, rng):
        if rng.random() < self.p:
            return [(bank, row)], 0
        return [], 0


class HydraObserver(Observer):
    """Two-level counting: per-group counters escalate hot groups to
    per-row counters resident in DRAM, cached in a small row-count cache;
    a cache miss costs one extra column access to the open bank.

    On escalation each row's counter starts at the group count (every row
    conservatively owns the whole group history), so a refresh triggers no
    later than row_threshold true activations."""

    GROUP_ROWS = 64
    RCC_ENTRIES = 4096

    def __init__(self, n_rh: int, geometry: DeviceGeometry):
        self.row_threshold = max(n_rh // 2, 1)
        self.group_threshold = max(self.row_threshold * 4 // 5, 1)
        self.geometry = geometry
        self.groups: dict[int, int] = {}
        self.escalated: dict[int, int] = {}  # group -> counter at escalation
        self.row_counts: dict[tuple[int, int], int] = {}
        self.rcc: dict[tuple[int, int], None] = {}

    def _group_of(self, bank: int, row: int) -> int:
        return (bank * self.geometry.rows_per_bank + row) // self.GROUP_ROWS

    def observe(self, bank, row, t, rng):
        group = self._group_of(bank, row)
        extra = 0
        if group not in self.escalated:
            count = self.groups.get(group, 0) + 1
            self.groups[group] = count
            if count >= self.group_threshold:
                self.escalated[group] = count
            return [], 0
        key = (bank, row)
        if key not in self.rcc:
            extra = 1  # fetch the DRAM-resident counter
            if len(self.rcc) >= self.RCC_ENTRIES:
                evict = next(iter(self.rcc))
                del self.rcc[evict]
            self.rcc[key] = None
        count = self.row_counts.get(key, self.escalated[group]) + 1
        self.row_counts[key] = count
        if count >= self.row_threshold:
            self.row_counts[key] = 0
            return [(bank, row)], extra
        return [], extra

    def window_reset(self):
        self.groups.clear()
        self.escalated.clear()
        self.row_counts.clear()
        self.rcc.clear()


# ---------------------------------------------------------------------------
# Sizing arithmetic

def _act_budget(timing: TimingParams) -> int:
    """Row activations that fit in one refresh window on one bank."""
    return timing.tREFW // timing.tRC


def para_probability(n_rh: int) -> float:
    """Refresh probability such that surviving n_rh activations unrefreshed
    has probability at most 1e-15."""
    if n_rh < 1:
        raise ValueError("n_rh must be >= 1")
    return 1.0 - (1e-15) ** (1.0 / n_rh)


def graphene_entries(n_rh: int, timing: TimingParams | None = None) -> int:
    timing = timing or make_timing(prac_enabled=False)
    return math.ceil(_act_budget(timing) / max(n_rh // 2, 1))


def abacus_entries(n_rh: int, timing: TimingParams | None = None) -> int:
    return graphene_entries(n_rh, timing)


def _count_bits(n_rh: int) -> int:
    return max(math.ceil(math.log2(max(n_rh // 2, 2))), 1)


ABACUS_ENTRY_METADATA_BITS = 22  # valid/spill/sibling bookkeeping per entry


def storage_model(mechanism: str, n_rh: int, geometry: DeviceGeometry,
                  timing: TimingParams | None = None) -> dict:
    """Bytes of mitigation state by location for one channel."""
    timing = timing or make_timing(prac_enabled=False)
    mech = mechanism.lower()
    banks = geometry.banks_per_channel
    rows = geometry.rows_per_bank
    row_bits = (rows - 1).bit_length()
    if mech in ("chronus", "chronus-pb", "prac", "prac+prfm"):
        dram = rows * banks  # one byte (8-bit counter) per row
        cpu = 2 * banks if "prfm" in mech else 0
        return {"cpu_bytes": cpu, "dram_bytes": dram}
    if mech == "prfm":
        return {"cpu_bytes": 2 * banks, "dram_bytes": 0}
    if mech == "para":
        return {"cpu_bytes": 0, "dram_bytes": 0}
    if mech == "graphene":
        entries = graphene_entries(n_rh, timing)
        entry_bits = row_bits + _count_bits(n_rh)
        cpu = math.ceil(entries * entry_bits / 8) * banks
        return {"cpu_bytes": cpu, "dram_bytes": 0, "entries_per_bank": entries}
    if mech == "hydra":
        gct = 32768 * _count_bits(n_rh) // 8 * geometry.ranks
        rcc = HydraObserver.RCC_ENTRIES * (row_bits + _count_bits(n_rh) + 6) // 8
        dram = math.ceil(rows * banks * _count_bits(n_rh) / 8)
        return {"cpu_bytes": gct + rcc, "dram_bytes": dram}
    if mech == "abacus":
        entries = abacus_entries(n_rh, timing)
        entry_bits = row_bits + _count_bits(n_rh) + ABACUS_ENTRY_METADATA_BITS
        cpu = math.ceil(entries * entry_bits / 8)
        return {"cpu_bytes": cpu, "dram_bytes": 0, "entries": entries}
    if mech == "none":
        return {"cpu_bytes": 0, "dram_bytes": 0}
    raise ValueError(f"unknown mechanism {mechanism!r}")


# ---------------------------------------------------------------------------
# Unified configuration

@dataclass
class MitigationConfig:
    mechanism: str = "none"
    n_rh: int = 1000
    # back-off parameters
    a_both: int = 1
    n_bo_r: int = 4
    n_bo_a: int = 4
    n_bo: int = 256  # concurrent-update back-off threshold
    rfm_th: int = 32
    att_capacity: int = 4
    para_probability: float | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mechanism not in MECHANISMS:
            raise ValueError(f"unknown mechanism {self.mechanism!r}")
        if self.n_rh < 1:
            raise ValueError("n_rh must be >= 1")

    @property
    def prac_timing(self) -> bool:
        """Whether the run uses the counter-on-precharge timing column."""
        return self.mechanism in ("prac", "prac+prfm")

    def device_policy(self) -> DevicePolicy:
        m = self.mechanism
        if m in ("prac", "prac+prfm"):
            return DevicePolicy(mode="prac", a_both=self.a_both,
                                nbo_refs=self.n_bo_r, nbo_acts=self.n_bo_a,
                                att_capacity=max(self.att_capacity,
                                                 self.n_bo_r))
        if m == "chronus":
            return DevicePolicy(mode="chronus", n_bo=self.n_bo,
                                att_capacity=self.att_capacity)
        if m == "chronus-pb":
            # concurrent counter update with the fixed-refresh back-off
            return DevicePolicy(mode="chronus", backoff="prac",
                                n_bo=self.a_both, nbo_refs=self.n_bo_r,
                                nbo_acts=self.n_bo_a,
                                att_capacity=self.att_capacity)
        if m == "prfm":
            return DevicePolicy(mode="prac", a_both=1 << 60,
                                att_capacity=self.att_capacity)
        return DevicePolicy.none()

    def observer(self, geometry: DeviceGeometry,
                 timing: TimingParams) -> Observer | None:
        m = self.mechanism
        if m == "graphene":
            return GrapheneObserver(self.n_rh, geometry, timing)
        if m == "abacus":
            return AbacusObserver(self.n_rh, geometry, timing)
        if m == "para":
            obs = ParaObserver(self.n_rh)
            if self.para_probability is not None:
                obs.p = self.para_probability
            return obs
        if m == "hydra":
            return HydraObserver(self.n_rh, geometry)
        return None

    @staticmethod
    def secure(mechanism: str, n_rh: int,
               timing: TimingParams | None = None) -> "MitigationConfig":
        """Parameterization that passes the analytic security check."""
        m = mechanism.lower()
        if m == "prfm":
            found = analytic.find_secure_config("prfm", n_rh, timing)
            if found is None:
                raise ValueError(f"no secure prfm configuration for n_rh={n_rh}")
            return MitigationConfig(mechanism="prfm", n_rh=n_rh,
                                    rfm_th=found.params["rfm_th"])
        if m.startswith("prac") and m != "prac+prfm":
            n = int(m.split("-")[1]) if "-" in m else 4
            found = analytic.find_secure_config(f"prac-{n}", n_rh, timing)
            if found is None:
                raise ValueError(f"no secure prac-{n} configuration for n_rh={n_rh}")
            return MitigationConfig(mechanism="prac", n_rh=n_rh,
                                    a_both=found.params["a_both"],
                                    n_bo_r=n, n_bo_a=n)
        if m == "prac+prfm":
            base = MitigationConfig.secure("prac", n_rh, timing)
            return MitigationConfig(mechanism="prac+prfm", n_rh=n_rh,
                                    a_both=base.a_both, n_bo_r=base.n_bo_r,
                                    n_bo_a=base.n_bo_a,
                                    rfm_th=PRAC_PRFM_DEFAULT_TH)
        if m == "chronus":
            found = analytic.find_secure_config("chronus", n_rh, timing)
            if found is None:
                raise ValueError(f"no secure chronus configuration for n_rh={n_rh}")
            return MitigationConfig(mechanism="chronus", n_rh=n_rh,
                                    n_bo=found.params["n_bo"])
        if m == "chronus-pb":
            base = MitigationConfig.secure("prac", n_rh, timing or
                                           make_timing(prac_enabled=False))
            return MitigationConfig(mechanism="chronus-pb", n_rh=n_rh,
                                    a_both=base.a_both, n_bo_r=4, n_bo_a=4)
        if m in ("graphene", "abacus", "hydra", "para"):
            return MitigationConfig(mechanism=m, n_rh=n_rh)
        if m == "none":
            return MitigationConfig(mechanism="none", n_rh=n_rh)
        raise ValueError(f"unknown mechanism {mechanism!r}")
