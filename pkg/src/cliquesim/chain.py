"""Content-addressed block storage and heaviest-chain fork choice.

Blocks form a tree rooted at a genesis header. Every insertion is stamped
with a monotone arrival sequence number so fork-choice ties resolve to the
branch that was seen first, and cumulative difficulty is cached per block
so head selection never re-walks the tree.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

HASH_SIZE = 32

# Parent pointer of the genesis header; never a real block hash.
NIL_PARENT = b"\x00" * HASH_SIZE

GENESIS_ADDRESS = "0x" + "0" * 40


class ChainError(Exception):
    """Base class for chain store failures."""


class UnknownParentError(ChainError):
    """Inserted header references a parent the store has never seen."""


class DuplicateBlockError(ChainError):
    """Header is already present; the insert is an idempotent no-op."""


class UnknownBlockError(ChainError):
    """Queried hash is not in the store."""


@dataclass(frozen=True)
class BlockHeader:
    """The unit of consensus: one sealed block.

    ``sim_time_ms`` is the protocol timestamp claimed by the sealer
    (parent time plus the configured block interval, or later); it is not
    necessarily the instant the block was physically broadcast.
    """

    number: int
    parent: bytes
    sealer_index: int
    sealer_addr: str
    difficulty: int
    sim_time_ms: int
    tx_ids: tuple[int, ...] = ()

    def is_genesis(self) -> bool:
        return self.number == 0 and self.parent == NIL_PARENT


def make_genesis(sim_time_ms: int = 0) -> BlockHeader:
    return BlockHeader(
        number=0,
        parent=NIL_PARENT,
        sealer_index=0,
        sealer_addr=GENESIS_ADDRESS,
        difficulty=0,
        sim_time_ms=sim_time_ms,
        tx_ids=(),
    )


def hash_header(header: BlockHeader) -> bytes:
    """Digest of the canonical field-ordered encoding of a header.

    Deterministic, and any single-field change yields a different digest.
    No signatures are involved; identities in this simulator are honest
    labels, not keys.
    """
    encoding = "|".join(
        (
            str(header.number),
            header.parent.hex(),
            str(header.sealer_index),
            header.sealer_addr,
            str(header.difficulty),
            str(header.sim_time_ms),
            ",".join(str(tx) for tx in header.tx_ids),
        )
    )
    return hashlib.sha256(encoding.encode("ascii")).digest()


@dataclass
class _Stored:
    header: BlockHeader
    arrival_seq: int
    total_difficulty: int


class ChainStore:
    """Tree of headers with first-received bookkeeping.

    The store never holds a parentless block: orphans are the caller's
    problem (the network layer buffers and re-delivers them once the
    parent lands).
    """

    def __init__(self, genesis: BlockHeader):
        if not genesis.is_genesis():
            raise ValueError("genesis header must have number 0 and a nil parent")
        if genesis.difficulty != 0 or genesis.tx_ids:
            raise ValueError("genesis carries difficulty 0 and no transactions")
        self.genesis = hash_header(genesis)
        self._blocks: dict[bytes, _Stored] = {
            self.genesis: _Stored(genesis, arrival_seq=0, total_difficulty=0)
        }
        self._children: dict[bytes, list[bytes]] = {self.genesis: []}
        # Leaves of the tree; insertion-ordered for deterministic scans.
        self._tips: dict[bytes, None] = {self.genesis: None}
        self._next_seq = 1

    def __contains__(self, block_hash: bytes) -> bool:
        return block_hash in self._blocks

    def __len__(self) -> int:
        return len(self._blocks)

    def header(self, block_hash: bytes) -> BlockHeader:
        try:
            return self._blocks[block_hash].header
        except KeyError:
            raise UnknownBlockError(block_hash.hex()) from None

    def arrival_seq(self, block_hash: bytes) -> int:
        try:
            return self._blocks[block_hash].arrival_seq
        except KeyError:
            raise UnknownBlockError(block_hash.hex()) from None

    def children(self, block_hash: bytes) -> list[bytes]:
        return list(self._children.get(block_hash, ()))

    def extend(self, header: BlockHeader) -> bytes:
        """Insert ``header`` under its parent and return its hash."""
        block_hash = hash_header(header)
        if block_hash in self._blocks:
            raise DuplicateBlockError(block_hash.hex())
        parent = self._blocks.get(header.parent)
        if parent is None:
            raise UnknownParentError(header.parent.hex())
        if header.number != parent.header.number + 1:
            raise ChainError(
                f"block number {header.number} does not follow parent "
                f"{parent.header.number}"
            )
        self._blocks[block_hash] = _Stored(
            header,
            arrival_seq=self._next_seq,
            total_difficulty=parent.total_difficulty + header.difficulty,
        )
        self._next_seq += 1
        self._children[header.parent].append(block_hash)
        self._children[block_hash] = []
        self._tips.pop(header.parent, None)
        self._tips[block_hash] = None
        return block_hash

    def total_difficulty(self, tip: bytes) -> int:
        """Sum of difficulty over the path genesis -> tip."""
        try:
            return self._blocks[tip].total_difficulty
        except KeyError:
            raise UnknownBlockError(tip.hex()) from None

    def select_head(self) -> bytes:
        """Tip with maximal cumulative difficulty; first received wins ties."""
        best = None
        best_key = None
        for tip in self._tips:
            stored = self._blocks[tip]
            key = (stored.total_difficulty, -stored.arrival_seq)
            if best_key is None or key > best_key:
                best, best_key = tip, key
        assert best is not None  # store always holds genesis
        return best

    def canonical_chain(self, head: bytes) -> list[BlockHeader]:
        """Headers from genesis to ``head``, ascending by number."""
        if head not in self._blocks:
            raise UnknownBlockError(head.hex())
        chain: list[BlockHeader] = []
        cursor = head
        while True:
            header = self._blocks[cursor].header
            chain.append(header)
            if header.is_genesis():
                break
            cursor = header.parent
        chain.reverse()
        return chain
