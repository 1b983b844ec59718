"""Safety oracle, performance metrics, and the per-command energy model."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .device import DramDevice

CHRONUS_ACT_MULTIPLIER = 1.1907  # concurrent counter update energy factor


@dataclass
class OracleReport:
    max_exposure: int
    max_bank: int
    max_row: int
    violations: bool
    first_violation_index: int
    exposures: dict
    mirrors: dict

    def summary(self) -> dict:
        return {"max_exposure": self.max_exposure,
                "max_bank": self.max_bank, "max_row": self.max_row,
                "violations": self.violations}


def oracle_check(device: DramDevice, n_rh: int) -> OracleReport:
    """Scan a device's event log with the mechanism-independent exposure
    oracle: no row may see n_rh aggressor activations between refreshes of
    its victims."""
    kinds = np.asarray(device.event_kinds, dtype=np.int8)
    keys = np.asarray(device.event_keys, dtype=np.int64)
    rows = device.geometry.rows_per_bank
    max_exp, max_key, first_violation, exposures, mirrors = \
        _kernels.oracle_scan(kinds, keys, rows, n_rh)
    return OracleReport(
        max_exposure=int(max_exp),
        max_bank=int(max_key) // rows if max_key >= 0 else -1,
        max_row=int(max_key) % rows if max_key >= 0 else -1,
        violations=first_violation >= 0,
        first_violation_index=int(first_violation),
        exposures=exposures,
        mirrors=mirrors,
    )


# ---------------------------------------------------------------------------
# Performance metrics

def weighted_speedup(shared_ipcs, alone_ipcs) -> float:
    """Sum over cores of shared-run IPC over alone-run IPC."""
    if len(shared_ipcs) != len(alone_ipcs):
        raise ValueError("core counts differ")
    if any(a <= 0 for a in alone_ipcs):
        raise ValueError("alone IPCs must be positive")
    return float(sum(s / a for s, a in zip(shared_ipcs, alone_ipcs)))


def max_slowdown(shared_ipcs, alone_ipcs) -> float:
    """1 - min over cores of shared/alone IPC."""
    if len(shared_ipcs) != len(alone_ipcs):
        raise ValueError("core counts differ")
    if any(a <= 0 for a in alone_ipcs):
        raise ValueError("alone IPCs must be positive")
    return float(1.0 - min(s / a for s, a in zip(shared_ipcs, alone_ipcs)))


# ---------------------------------------------------------------------------
# Energy model

@dataclass(frozen=True)
class EnergyWeights:
    """Per-command energy units. Absolute joules are out of scope; only
    ratios are meaningful."""

    act_pre: float = 2.0
    rd: float = 1.2
    wr: float = 1.3
    ref: float = 50.0
    rfm: float = 50.0

    def __post_init__(self):
        for name in ("act_pre", "rd", "wr", "ref", "rfm"):
            if getattr(self, name) <= 0:
                raise ValueError(f"energy weight {name} must be positive")


@dataclass
class CommandCounts:
    act: int = 0
    pre: int = 0
    rd: int = 0
    wr: int = 0
    ref: int = 0
    rfm: int = 0
    preventive_act_pairs: int = 0  # scheduler-side victim refresh activity

    def as_dict(self) -> dict:
        return {"ACT": self.act, "PRE": self.pre, "RD": self.rd,
                "WR": self.wr, "REF": self.ref, "RFMab": self.rfm,
                "preventive_act_pairs": self.preventive_act_pairs}


def energy(counts: CommandCounts, weights: EnergyWeights | None = None,
           chronus_ccu: bool = False) -> dict:
    """Weighted command energy. Concurrent-counter-update devices pay the
    measured row-access penalty on the ACT/PRE component."""
    w = weights or EnergyWeights()
    act_mult = CHRONUS_ACT_MULTIPLIER if chronus_ccu else 1.0
    act_component = counts.act * w.act_pre * act_mult \
        + counts.preventive_act_pairs * w.act_pre * act_mult
    parts = {
        "act_pre": act_component,
        "rd": counts.rd * w.rd,
        "wr": counts.wr * w.wr,
        "ref": counts.ref * w.ref,
        "rfm": counts.rfm * w.rfm,
    }
    parts["total"] = sum(parts.values())
    return parts
