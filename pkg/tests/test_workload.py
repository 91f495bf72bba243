import pytest

from cliquesim import BlockHeader, Mempool, Tx, make_genesis, tx_batch_schedule


def blk(number, txs, sealer=0):
    return BlockHeader(
        number=number,
        parent=b"\x01" * 32,
        sealer_index=sealer,
        sealer_addr=f"0x{sealer:040x}",
        difficulty=1,
        sim_time_ms=number * 5000,
        tx_ids=tuple(txs),
    )


def filled(n, start=0, created=0):
    pool = Mempool()
    pool.add([Tx(start + i, created) for i in range(n)])
    return pool


# -- stream -------------------------------------------------------------------

def test_stream_thirty_minutes_at_ten_per_second():
    batches = tx_batch_schedule(10, 1_800_000)
    assert sum(len(txs) for _, txs in batches) == 18_000
    assert batches[0][0] == 1000 and batches[-1][0] == 1_800_000


def test_stream_one_second():
    batches = tx_batch_schedule(10, 1000)
    assert sum(len(txs) for _, txs in batches) == 10


def test_stream_zero_duration():
    assert tx_batch_schedule(1, 0) == []


def test_stream_ids_unique_and_monotone():
    batches = tx_batch_schedule(7, 9000)
    ids = [tx.id for _, txs in batches for tx in txs]
    assert ids == sorted(ids) and len(set(ids)) == len(ids)


def test_stream_rejects_zero_rate():
    with pytest.raises(ValueError):
        tx_batch_schedule(0, 1000)


# -- packing ------------------------------------------------------------------

def test_pack_everything_fifo():
    pool = Mempool()
    pool.add([Tx(2, 100), Tx(0, 50), Tx(1, 50)])
    assert pool.pack_block(set()) == (0, 1, 2)
    assert pool.pending == {}


def test_pack_respects_cap():
    pool = filled(50)
    packed = pool.pack_block(set(), cap=10)
    assert packed == tuple(range(10))
    assert len(pool.pending) == 40


def test_pack_empty_mempool():
    assert Mempool().pack_block(set()) == ()


def test_pack_skips_canonical():
    pool = filled(5)
    assert pool.pack_block({0, 3}) == (1, 2, 4)


def test_restore_reinstates_packed_txs():
    pool = filled(3)
    created = {0: 0, 1: 0, 2: 0}
    packed = pool.pack_block(set())
    pool.restore(packed, created)
    assert sorted(pool.pending) == [0, 1, 2]


# -- reorg handling -------------------------------------------------------------

def test_canonical_update_no_reorg():
    pool = filled(2, start=100)
    genesis = make_genesis()
    old = [genesis, blk(1, [0, 1])]
    new = [genesis, blk(1, [0, 1]), blk(2, [2])]
    pool.on_canonical_update(old, new, {i: 0 for i in range(3)})
    assert sorted(pool.pending) == [100, 101]


def test_canonical_update_same_txs_both_sides():
    pool = Mempool()
    genesis = make_genesis()
    old = [genesis, blk(1, [0, 1], sealer=1)]
    new = [genesis, blk(1, [0, 1], sealer=2)]
    pool.on_canonical_update(old, new, {0: 0, 1: 0})
    assert pool.pending == {}


def test_canonical_update_abandoned_block_repends_txs():
    # oracle: exactly the set difference (abandoned - adopted) returns
    abandoned_txs = set(range(50))
    adopted_txs = set()
    expected = abandoned_txs - adopted_txs
    pool = Mempool()
    genesis = make_genesis()
    created = {i: 0 for i in range(50)}
    pool.on_canonical_update(
        [genesis, blk(1, sorted(abandoned_txs))],
        [genesis, blk(1, sorted(adopted_txs), sealer=2)],
        created,
    )
    assert set(pool.pending) == expected


def test_canonical_update_drops_newly_adopted_from_pending():
    pool = filled(4)
    genesis = make_genesis()
    pool.on_canonical_update([genesis], [genesis, blk(1, [1, 2])], {i: 0 for i in range(4)})
    assert sorted(pool.pending) == [0, 3]


def test_canonical_update_partial_overlap():
    pool = Mempool()
    genesis = make_genesis()
    created = {i: 0 for i in range(6)}
    old = [genesis, blk(1, [0, 1, 2])]
    new = [genesis, blk(1, [2, 3], sealer=2), blk(2, [4], sealer=3)]
    pool.on_canonical_update(old, new, created)
    assert sorted(pool.pending) == [0, 1]
