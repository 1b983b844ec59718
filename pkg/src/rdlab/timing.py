"""DDR5 timing parameters and command-legality arithmetic.

All durations are held as integer picoseconds so that legality checks are
exact (tRTP is 7.5 ns, which is not integral in nanoseconds). The CLI and
config files speak nanoseconds; conversion happens at the boundary.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, fields, replace

PS_PER_NS = 1000


def ns(value: float) -> int:
    """Convert nanoseconds to integer picoseconds (exact for 0.5 ps grid)."""
    ps = round(value * PS_PER_NS)
    if abs(ps - value * PS_PER_NS) > 1e-6:
        raise ValueError(f"{value} ns is not representable in integer ps")
    return ps


class CommandKind(enum.Enum):
    ACT = "ACT"
    PRE = "PRE"
    RD = "RD"
    WR = "WR"
    REF = "REF"
    RFMAB = "RFMab"


class ConfigError(ValueError):
    """Bad configuration input (unknown speed bin, invalid override)."""


@dataclass(frozen=True)
class TimingParams:
    """One speed-bin timing set, with or without per-row-counting latencies.

    Fields are integer picoseconds.
    """

    tRC: int
    tRAS: int
    tRP: int
    tRTP: int
    tWR: int
    tRCD: int
    tREFW: int
    tREFI: int
    tRFM: int
    tABOact: int
    clock_period: int
    tRFC: int
    tCL: int
    burst_clocks: int
    prac_enabled: bool

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if f.type == "int" and v <= 0:
                raise ConfigError(f"timing parameter {f.name} must be positive, got {v}")
        # The classic tRC >= tRAS + tRP identity is violated by the
        # counter-update column (52 != 16 + 36 is false there), so only the
        # weaker bound is enforced.
        if self.tRC < max(self.tRAS, self.tRP):
            raise ConfigError("tRC must be >= max(tRAS, tRP)")
        if self.tREFI >= self.tREFW:
            raise ConfigError("tREFI must be < tREFW")

    @property
    def burst_time(self) -> int:
        return self.burst_clocks * self.clock_period

    def read_data_beat(self, rd_issue: int) -> int:
        """Time of the last data beat of a RD issued at rd_issue."""
        return rd_issue + self.tCL + self.burst_time

    def write_data_beat(self, wr_issue: int) -> int:
        return wr_issue + self.tCL + self.burst_time

    def a_normal(self) -> int:
        """Activations one bank can absorb inside the normal-traffic window."""
        return self.tABOact // self.tRC

    def as_ns_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = v / PS_PER_NS if f.type == "int" and f.name != "burst_clocks" else v
        out["burst_clocks"] = self.burst_clocks
        return out


# DDR5-3200AN, per-row-counting disabled / enabled. Only the five row-access
# parameters differ between the two columns.
_BASE_COLUMN = dict(tRAS=ns(32), tRP=ns(15), tRC=ns(47), tRTP=ns(7.5), tWR=ns(30))
_PRAC_COLUMN = dict(tRAS=ns(16), tRP=ns(36), tRC=ns(52), tRTP=ns(5), tWR=ns(10))

_COMMON = dict(
    tRCD=ns(15),
    tREFW=ns(32_000_000),  # 32 ms
    tREFI=ns(3_900),       # 3.9 us
    tRFM=ns(350),
    tABOact=ns(180),
    clock_period=ns(0.625),  # 1600 MHz clock
    tRFC=ns(350),
    tCL=ns(16.25),           # CL26 at 0.625 ns
    burst_clocks=8,          # BL16
)

SPEED_BINS = {"DDR5-3200AN"}

# Keys accepted as nanosecond overrides in run configs.
OVERRIDABLE_NS_KEYS = (
    "tRC", "tRAS", "tRP", "tRTP", "tWR", "tRFM", "tABOact",
    "tREFW", "tREFI", "tRFC", "tRCD", "tCL",
)


def make_timing(prac_enabled: bool, speed_bin: str = "DDR5-3200AN",
                overrides_ns: dict | None = None) -> TimingParams:
    """Build the tabulated timing set for a speed bin.

    overrides_ns maps parameter names (nanoseconds) onto the tabulated
    defaults; unknown keys are rejected.
    """
    if speed_bin not in SPEED_BINS:
        raise ConfigError(f"unknown speed bin {speed_bin!r}; supported: {sorted(SPEED_BINS)}")
    column = _PRAC_COLUMN if prac_enabled else _BASE_COLUMN
    params = TimingParams(**column, **_COMMON, prac_enabled=prac_enabled)
    if overrides_ns:
        bad = set(overrides_ns) - set(OVERRIDABLE_NS_KEYS)
        if bad:
            raise ConfigError(f"unknown timing override keys: {sorted(bad)}")
        params = replace(params, **{k: ns(v) for k, v in overrides_ns.items()})
    return params


class BankTimingTracker:
    """Per-bank command history plus rank-level blocking windows.

    earliest_issue_time() answers the smallest legal issue time for a
    command; record() commits an issued command. Banks are identified by a
    flat index; ranks group banks for REF/RFM blocking.
    """

    NEVER = -(10 ** 18)

    def __init__(self, timing: TimingParams, n_banks: int, banks_per_rank: int):
        self.timing = timing
        self.n_banks = n_banks
        self.banks_per_rank = banks_per_rank
        n_ranks = (n_banks + banks_per_rank - 1) // banks_per_rank
        nv = self.NEVER
        self.last_act = [nv] * n_banks
        self.last_pre = [nv] * n_banks
        self.last_rd = [nv] * n_banks
        self.last_wr = [nv] * n_banks
        self.rank_blocked_until = [0] * n_ranks  # REF / RFMab windows

    def rank_of(self, bank: int) -> int:
        return bank // self.banks_per_rank

    def earliest_issue_time(self, cmd: CommandKind, bank: int, now: int = 0) -> int:
        t = self.timing
        lo = now
        rank = self.rank_of(bank)
        if cmd in (CommandKind.ACT, CommandKind.PRE, CommandKind.RD, CommandKind.WR):
            lo = max(lo, self.rank_blocked_until[rank])
        if cmd is CommandKind.ACT:
            lo = max(lo,
                     self.last_act[bank] + t.tRC,
                     self.last_pre[bank] + t.tRP)
        elif cmd is CommandKind.PRE:
            lo = max(lo,
                     self.last_act[bank] + t.tRAS,
                     self.last_rd[bank] + t.tRTP,
                     self.last_wr[bank] + t.burst_time + t.tWR)
        elif cmd in (CommandKind.RD, CommandKind.WR):
            lo = max(lo, self.last_act[bank] + t.tRCD)
        elif cmd in (CommandKind.REF, CommandKind.RFMAB):
            # Rank-scope commands wait for every bank in the rank to be
            # precharged-quiet and for the previous blocking window.
            lo = max(lo, self.rank_blocked_until[rank])
            for b in self._rank_banks(rank):
                lo = max(lo,
                         self.last_act[b] + t.tRAS + t.tRP,
                         self.last_pre[b] + t.tRP,
                         self.last_rd[b] + t.tRTP + t.tRP,
                         self.last_wr[b] + t.burst_time + t.tWR + t.tRP)
        return lo

    def _rank_banks(self, rank: int):
        start = rank * self.banks_per_rank
        return range(start, min(start + self.banks_per_rank, self.n_banks))

    def record(self, cmd: CommandKind, bank: int, t_issue: int) -> None:
        legal = self.earliest_issue_time(cmd, bank, t_issue)
        if t_issue < legal:
            raise TimingViolation(
                f"{cmd.value} to bank {bank} at {t_issue} ps; earliest legal {legal} ps")
        if cmd is CommandKind.ACT:
            self.last_act[bank] = t_issue
        elif cmd is CommandKind.PRE:
            self.last_pre[bank] = t_issue
        elif cmd is CommandKind.RD:
            self.last_rd[bank] = t_issue
        elif cmd is CommandKind.WR:
            self.last_wr[bank] = t_issue
        elif cmd is CommandKind.REF:
            self.rank_blocked_until[self.rank_of(bank)] = t_issue + self.timing.tRFC
        elif cmd is CommandKind.RFMAB:
            self.rank_blocked_until[self.rank_of(bank)] = t_issue + self.timing.tRFM


class TimingViolation(RuntimeError):
    pass


def replay_check(timing: TimingParams, n_banks: int, banks_per_rank: int,
                 commands) -> None:
    """Re-validate a (t, kind, bank) stream; raises TimingViolation on the
    first illegal command. Used as the closed-loop legality oracle."""
    tracker = BankTimingTracker(timing, n_banks, banks_per_rank)
    for t_issue, kind, bank in commands:
        tracker.record(kind, bank, t_issue)
