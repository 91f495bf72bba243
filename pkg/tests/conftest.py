import dataclasses

import pytest

from cliquesim import (
    BlockHeader,
    ChainStore,
    make_genesis,
    preset_config,
)


@pytest.fixture
def store():
    return ChainStore(make_genesis())


def child_header(
    store: ChainStore,
    parent: bytes,
    sealer_index: int = 0,
    difficulty: int = 1,
    time_ms: int | None = None,
    tx_ids: tuple[int, ...] = (),
    addr: str | None = None,
) -> BlockHeader:
    """Header extending ``parent`` with plausible defaults filled in."""
    parent_header = store.header(parent)
    return BlockHeader(
        number=parent_header.number + 1,
        parent=parent,
        sealer_index=sealer_index,
        sealer_addr=addr if addr is not None else f"0x{sealer_index:040x}",
        difficulty=difficulty,
        sim_time_ms=time_ms if time_ms is not None else parent_header.sim_time_ms + 5000,
        tx_ids=tx_ids,
    )


def grow(store: ChainStore, parent: bytes, **kwargs) -> bytes:
    """Extend the store under ``parent`` and return the new hash."""
    return store.extend(child_header(store, parent, **kwargs))


def short_preset(name: str, duration_ms: int, seed: int | None = None):
    config = preset_config(name)
    replacements = {"duration_ms": duration_ms}
    if seed is not None:
        replacements["seed"] = seed
    return dataclasses.replace(config, **replacements)
