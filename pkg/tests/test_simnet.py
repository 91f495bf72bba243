import heapq
import random

import pytest

from cliquesim import (
    FIXED,
    BlockHeader,
    DelayModel,
    NonConvergenceError,
    SealerPolicy,
    Simulation,
    VULNERABLE,
    build_simulation,
    run_scenario,
    ScenarioConfig,
)
from cliquesim.simnet import BlockArrival, RunEnd, SealFire, TxBatch

from conftest import short_preset


def make_sim(n=5, flags=FIXED, delay=(0, 0), seed=0, policies=None):
    sealers = tuple(f"0x{i:040x}" for i in range(n))
    return Simulation(
        sealers=sealers,
        policies=policies or [SealerPolicy.honest()] * n,
        flags=[flags] * n,
        block_interval_ms=5000,
        delay_model=DelayModel(*delay),
        seed=seed,
    )


def sealed_by(sim, number, sealer_index, difficulty, parent=None, time_ms=None):
    store = sim.nodes[0].store
    return BlockHeader(
        number=number,
        parent=parent if parent is not None else store.genesis,
        sealer_index=sealer_index,
        sealer_addr=sim.sealers[sealer_index],
        difficulty=difficulty,
        sim_time_ms=time_ms if time_ms is not None else number * 5000,
    )


# -- scheduling ----------------------------------------------------------------

def test_same_time_events_pop_in_insertion_order():
    sim = make_sim()
    first = TxBatch(())
    second = TxBatch(())
    sim.schedule(5, first)
    sim.schedule(5, second)
    assert heapq.heappop(sim._queue)[3] is first
    assert heapq.heappop(sim._queue)[3] is second


def test_scheduling_in_the_past_is_an_error():
    sim = make_sim()
    sim.now = 10
    with pytest.raises(ValueError):
        sim.schedule(5, TxBatch(()))


def test_deliveries_pop_before_seal_timers_at_equal_time():
    sim = make_sim()
    sim.schedule(7, SealFire(0, 1))
    arrival = BlockArrival(0, sealed_by(sim, 1, 1, 2))
    sim.schedule(7, arrival)
    assert heapq.heappop(sim._queue)[3] is arrival
    sim.schedule(7, RunEnd())
    assert isinstance(heapq.heappop(sim._queue)[3], SealFire)
    assert isinstance(heapq.heappop(sim._queue)[3], RunEnd)


# -- broadcast -----------------------------------------------------------------

def test_broadcast_degenerate_delays_hit_every_peer_now():
    sim = make_sim(delay=(0, 0))
    sim.now = 100
    sim.broadcast(2, sealed_by(sim, 1, 2, 2))
    events = sorted(sim._queue)
    assert len(events) == 4
    assert all(at == 100 for at, _, _, _ in events)
    assert sorted(ev.node for _, _, _, ev in events) == [0, 1, 3, 4]


def test_broadcast_single_node_sends_nothing():
    sim = make_sim(n=1)
    sim.broadcast(0, sealed_by(sim, 1, 0, 2))
    assert sim._queue == []


def test_broadcast_delays_stay_in_bounds():
    sim = make_sim(delay=(10, 50), seed=9)
    sim.now = 1000
    for _ in range(100):
        sim.broadcast(0, sealed_by(sim, 1, 1, 2))
    delays = [at - 1000 for at, _, _, _ in sim._queue]
    assert all(10 <= d <= 50 for d in delays)
    assert min(delays) <= 15 and max(delays) >= 45


# -- arrival handling -------------------------------------------------------------

def test_honest_inturn_block_accepted_and_head_advances():
    sim = make_sim()
    sim.now = 5000
    node = sim.nodes[0]
    header = sealed_by(sim, 1, 1, 2)
    node.deliver(header)
    assert node.accepted == 1
    assert node.store.header(node.head) == header


def test_wrong_turn_block_dropped_by_hardened_node():
    sim = make_sim(flags=FIXED)
    sim.now = 5000
    node = sim.nodes[0]
    node.deliver(sealed_by(sim, 1, 3, 2))  # leader for height 1 is sealer 1
    assert node.rejected == 1
    assert node.head == node.store.genesis
    assert sim.tallies[3].rejections == {"wrong_turn_difficulty": 1}


def test_wrong_turn_block_accepted_by_vulnerable_node():
    sim = make_sim(flags=VULNERABLE)
    sim.now = 5000
    node = sim.nodes[0]
    header = sealed_by(sim, 1, 3, 2)
    node.deliver(header)
    assert node.accepted == 1
    assert node.store.header(node.head) == header


def test_orphan_buffered_then_drained_when_parent_lands():
    sim = make_sim()
    sim.now = 10_000
    node = sim.nodes[0]
    block1 = sealed_by(sim, 1, 1, 2)
    from cliquesim import hash_header

    block2 = sealed_by(sim, 2, 2, 2, parent=hash_header(block1))
    node.deliver(block2)
    assert node.counters()["orphans_pending"] == 1
    node.deliver(block1)
    assert node.counters()["orphans_pending"] == 0
    assert node.store.header(node.head) == block2


def test_duplicate_delivery_counted_once():
    sim = make_sim()
    sim.now = 5000
    node = sim.nodes[0]
    header = sealed_by(sim, 1, 1, 2)
    node.deliver(header)
    node.deliver(header)
    assert node.accepted == 1
    assert node.duplicates == 1
    assert node.arrivals == 2


def test_future_claimed_block_waits_for_its_timestamp():
    sim = make_sim()
    header = sealed_by(sim, 1, 1, 2)  # claims t=5000
    for node in sim.nodes:
        node.deliver(header)
        assert node.counters()["futures_pending"] == 1
        assert node.head == node.store.genesis
    sim.run_until(5000)
    for node in sim.nodes:
        assert node.counters()["futures_pending"] == 0
        assert node.store.header(node.head) == header


def test_delay_model_validation():
    with pytest.raises(ValueError):
        DelayModel(50, 10)
    with pytest.raises(ValueError):
        DelayModel(0, 10, drop_rate=0.5)


def test_nonconvergence_detected_at_drain():
    sim = make_sim(n=2)
    sim.nodes[0].deliver(sealed_by(sim, 1, 1, 2, time_ms=0))
    with pytest.raises(NonConvergenceError):
        sim.run_until(0)


# -- whole runs --------------------------------------------------------------------

def test_honest_minute_produces_expected_height():
    config = ScenarioConfig(n_sealers=5, duration_ms=60_000, seed=3)
    report = run_scenario(config)
    assert report.totals["canonical_height"] == 12


def test_hardened_verifier_never_rejects_honest_blocks():
    report = run_scenario(short_preset("honest", 300_000))
    assert all(s.rejections == {} for s in report.per_sealer)


def test_zero_duration_reports_genesis_only():
    report = run_scenario(ScenarioConfig(n_sealers=5, duration_ms=0))
    assert report.totals["canonical_height"] == 0
    assert len(report.block_log) == 1


def test_node_counters_balance():
    sim = build_simulation(short_preset("attack", 120_000))
    sim.run_until(120_000)
    for node in sim.nodes:
        counts = node.counters()
        assert counts["arrivals"] == (
            node.accepted
            + node.rejected
            + node.duplicates
            + counts["orphans_pending"]
            + counts["futures_pending"]
        )


@pytest.mark.parametrize("preset", ["honest", "attack", "fixed"])
def test_all_nodes_agree_at_drain(preset):
    sim = build_simulation(short_preset(preset, 120_000, seed=5))
    sim.run_until(120_000)
    assert len({node.head for node in sim.nodes}) == 1


@pytest.mark.parametrize("preset", ["honest", "attack"])
def test_liveness_no_window_without_progress(preset):
    config = short_preset(preset, 180_000)
    report = run_scenario(config)
    times = [row.time_ms for row in report.block_log]
    gaps = [b - a for a, b in zip(times, times[1:])]
    assert gaps and max(gaps) <= 2 * config.block_interval_ms


@pytest.mark.parametrize("preset", ["honest", "attack"])
def test_no_tx_appears_in_two_canonical_blocks(preset):
    sim = build_simulation(short_preset(preset, 120_000))
    result = sim.run_until(120_000)
    seen: set[int] = set()
    for header in result.canonical:
        ids = set(header.tx_ids)
        assert not ids & seen
        seen |= ids


def test_tx_conservation_per_node_honest():
    sim = build_simulation(short_preset("honest", 120_000))
    sim.run_until(120_000)
    for node in sim.nodes:
        pending = set(node.mempool.pending)
        assert not pending & node.canonical_ids
        assert pending | node.canonical_ids == set(node.tx_created)


def test_tx_conservation_per_node_attack():
    sim = build_simulation(short_preset("attack", 120_000))
    sim.run_until(120_000)
    for node in sim.nodes:
        pending = set(node.mempool.pending)
        in_flight = {tx for ids in node.own_packed.values() for tx in ids}
        assert not pending & node.canonical_ids
        assert pending | node.canonical_ids | in_flight == set(node.tx_created)
