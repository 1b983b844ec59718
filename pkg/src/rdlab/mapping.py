"""Physical-address <-> (channel, rank, bank group, bank, row, column)
mappings. Bijective within the configured capacity; decode/encode are
inverses, which the tests enumerate.

Layouts (high bits to low bits, 64-byte column granularity):
  robarcoch: row : bank_group : bank : rank : column : channel
  mop:       row : column_hi : rank : bank_group : bank : column_lo : channel
             (minimalist open-page: small stripes of consecutive cache
             blocks interleave across banks/bank groups before advancing
             the page)
  abacus:    row : column : bank_group : bank : rank : channel
             (sibling rows share a row index across banks; every
             consecutive cache block lands in a different bank)
"""

from __future__ import annotations

from dataclasses import dataclass

from .device import DeviceGeometry

CACHE_BLOCK = 64
MAPPINGS = ("robarcoch", "mop", "abacus")

# number of low column-block bits that stay below the bank bits in MOP
_MOP_LOW_COL_BITS = 2


def _bits(n: int) -> int:
    b = (n - 1).bit_length()
    if 1 << b != n:
        raise ValueError(f"{n} is not a power of two")
    return b


@dataclass(frozen=True)
class AddressField:
    channel: int
    rank: int
    bank_group: int
    bank: int
    row: int
    column: int

    def flat_bank(self, geometry: DeviceGeometry) -> int:
        """Channel-flat bank index (rank-major)."""
        return (self.rank * geometry.bank_groups + self.bank_group) \
            * geometry.banks_per_group + self.bank


class AddressMapper:
    def __init__(self, geometry: DeviceGeometry, mapping: str = "mop"):
        if mapping not in MAPPINGS:
            raise ValueError(f"unknown mapping {mapping!r}; one of {MAPPINGS}")
        self.geometry = geometry
        self.mapping = mapping
        g = geometry
        self.ch_bits = _bits(g.channels)
        self.rank_bits = _bits(g.ranks)
        self.bg_bits = _bits(g.bank_groups)
        self.bank_bits = _bits(g.banks_per_group)
        self.row_bits = _bits(g.rows_per_bank)
        self.col_blocks = g.row_size_bits // 8 // CACHE_BLOCK
        self.col_bits = _bits(self.col_blocks)
        self.block_bits = _bits(CACHE_BLOCK)
        self.capacity = g.capacity_bytes

    def _split(self, addr: int, widths) -> list[int]:
        """Split addr into fields, lowest-order field first."""
        out = []
        for w in widths:
            out.append(addr & ((1 << w) - 1))
            addr >>= w
        if addr:
            raise ValueError("address beyond capacity")
        return out

    def decode(self, addr: int) -> AddressField:
        if not 0 <= addr < self.capacity:
            raise ValueError(f"address {addr:#x} outside capacity {self.capacity:#x}")
        block = addr >> self.block_bits
        m = self.mapping
        if m == "robarcoch":
            ch, col, rank, bank, bg, row = self._split(
                block, (self.ch_bits, self.col_bits, self.rank_bits,
                        self.bank_bits, self.bg_bits, self.row_bits))
        elif m == "mop":
            lo = min(_MOP_LOW_COL_BITS, self.col_bits)
            ch, col_lo, bank, bg, rank, col_hi, row = self._split(
                block, (self.ch_bits, lo, self.bank_bits, self.bg_bits,
                        self.rank_bits, self.col_bits - lo, self.row_bits))
            col = (col_hi << lo) | col_lo
        else:  # abacus: every consecutive block lands in a different bank
            ch, rank, bank, bg, col, row = self._split(
                block, (self.ch_bits, self.rank_bits, self.bank_bits,
                        self.bg_bits, self.col_bits, self.row_bits))
        return AddressField(channel=ch, rank=rank, bank_group=bg, bank=bank,
                            row=row, column=col)

    def encode(self, field: AddressField) -> int:
        m = self.mapping
        if m == "robarcoch":
            parts = ((field.channel, self.ch_bits),
                     (field.column, self.col_bits),
                     (field.rank, self.rank_bits),
                     (field.bank, self.bank_bits),
                     (field.bank_group, self.bg_bits),
                     (field.row, self.row_bits))
        elif m == "mop":
            lo = min(_MOP_LOW_COL_BITS, self.col_bits)
            parts = ((field.channel, self.ch_bits),
                     (field.column & ((1 << lo) - 1), lo),
                     (field.bank, self.bank_bits),
                     (field.bank_group, self.bg_bits),
                     (field.rank, self.rank_bits),
                     (field.column >> lo, self.col_bits - lo),
                     (field.row, self.row_bits))
        else:
            parts = ((field.channel, self.ch_bits),
                     (field.rank, self.rank_bits),
                     (field.bank, self.bank_bits),
                     (field.bank_group, self.bg_bits),
                     (field.column, self.col_bits),
                     (field.row, self.row_bits))
        block = 0
        shift = 0
        for value, width in parts:
            if not 0 <= value < (1 << width):
                raise ValueError(f"field value {value} does not fit {width} bits")
            block |= value << shift
            shift += width
        return block << self.block_bits
