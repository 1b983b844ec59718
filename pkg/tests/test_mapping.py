import pytest

from rdlab.device import DeviceGeometry
from rdlab.mapping import MAPPINGS, AddressMapper

SMALL = DeviceGeometry(channels=1, ranks=2, bank_groups=2, banks_per_group=2,
                       rows_per_bank=16, row_size_bits=8192)


@pytest.mark.parametrize("mapping", MAPPINGS)
def test_address_zero_decodes_to_zero(mapping):
    mapper = AddressMapper(SMALL, mapping)
    f = mapper.decode(0)
    assert (f.channel, f.rank, f.bank_group, f.bank, f.row, f.column) == \
        (0, 0, 0, 0, 0, 0)


@pytest.mark.parametrize("mapping", MAPPINGS)
def test_bijective_over_capacity(mapping):
    mapper = AddressMapper(SMALL, mapping)
    seen = set()
    for addr in range(0, SMALL.capacity_bytes, 64):
        f = mapper.decode(addr)
        assert 0 <= f.row < SMALL.rows_per_bank
        assert 0 <= f.bank < SMALL.banks_per_group
        assert 0 <= f.bank_group < SMALL.bank_groups
        assert 0 <= f.rank < SMALL.ranks
        key = (f.channel, f.rank, f.bank_group, f.bank, f.row, f.column)
        assert key not in seen
        seen.add(key)
        assert mapper.encode(f) == addr
    assert len(seen) == SMALL.capacity_bytes // 64


def test_robarcoch_bank_bit_keeps_row():
    mapper = AddressMapper(SMALL, "robarcoch")
    a = mapper.decode(0x1000)
    # flip the lowest bank bit (just above the column:rank bits)
    col_rank_bits = mapper.col_bits + mapper.rank_bits + mapper.block_bits
    b = mapper.decode(0x1000 ^ (1 << col_rank_bits))
    assert a.row == b.row
    assert (a.bank, a.bank_group) != (b.bank, b.bank_group)


def test_mop_interleaves_block_stripes_across_banks():
    mapper = AddressMapper(SMALL, "mop")
    banks = []
    stripe = 4 * 64  # four consecutive blocks per bank before moving on
    for i in range(4):
        f = mapper.decode(i * stripe)
        banks.append((f.bank_group, f.bank))
        assert f.row == 0
    assert len(set(banks)) > 1


def test_abacus_interleaves_every_block_across_banks():
    mapper = AddressMapper(SMALL, "abacus")
    spots = set()
    for i in range(8):
        f = mapper.decode(i * 64)
        spots.add((f.rank, f.bank_group, f.bank))
        assert f.row == 0
    assert len(spots) == 8


def test_out_of_range_rejected():
    mapper = AddressMapper(SMALL, "mop")
    with pytest.raises(ValueError):
        mapper.decode(SMALL.capacity_bytes)


def test_default_geometry_roundtrip_sample():
    g = DeviceGeometry()
    for mapping in MAPPINGS:
        mapper = AddressMapper(g, mapping)
        for addr in range(0, 1 << 22, 4096 + 64):
            assert mapper.encode(mapper.decode(addr)) == addr
