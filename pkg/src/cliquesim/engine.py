"""Pure Clique-style consensus rules.

Leader selection, difficulty assignment, the wiggle delay for non-leader
sealing, the recently-signed window, and the three-check verification
pipeline. Every operation here is a pure function: snapshot in, verdict or
new snapshot out. The per-check enable flags let a run model either the
hardened verifier (all three checks) or the flawed variant that only
bounds the difficulty value.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field

from .chain import BlockHeader

WIGGLE_STEP_MS = 500


def leader_index(next_number: int, n_sealers: int) -> int:
    """Index of the in-turn sealer for block ``next_number``.

    Rotation is round-robin over the ordered sealer set.
    """
    if n_sealers < 1:
        raise ValueError("sealer set must be non-empty")
    return next_number % n_sealers


def difficulty_for(sealer_index: int, next_number: int, n_sealers: int) -> int:
    """2 for the in-turn sealer, 1 for everyone else."""
    if not 0 <= sealer_index < n_sealers:
        raise ValueError(f"sealer index {sealer_index} out of range [0, {n_sealers})")
    return 2 if sealer_index == leader_index(next_number, n_sealers) else 1


def recents_window(n_sealers: int) -> int:
    """Width of the recently-signed window: floor(N/2) + 1."""
    return n_sealers // 2 + 1


def wiggle_delay(n_sealers: int, rng: random.Random) -> int:
    """Random extra delay for a non-leader, uniform over [0, (N//2+1)*500] ms."""
    return rng.randint(0, recents_window(n_sealers) * WIGGLE_STEP_MS)


@dataclass(frozen=True)
class SealerSnapshot:
    """Ordered sealer set plus the trailing recently-signed window.

    ``recents`` maps block number -> sealer index for the most recent
    canonical blocks; it is what makes a sealer temporarily ineligible
    after signing.
    """

    sealers: tuple[str, ...]
    recents: dict[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.sealers:
            raise ValueError("sealer set must be non-empty")
        if len(set(self.sealers)) != len(self.sealers):
            raise ValueError("sealer addresses must be unique")

    @property
    def size(self) -> int:
        return len(self.sealers)


def signed_recently(snapshot: SealerSnapshot, sealer_index: int, next_number: int) -> bool:
    """Whether ``sealer_index`` sealed within the window before ``next_number``.

    A sealer that signed block ``s`` stays ineligible at heights
    ``s+1 .. s+W-1`` and is free again at ``s+W`` (W = floor(N/2)+1), i.e.
    the check scans numbers in the open interval (next_number - W, next_number).
    """
    window = recents_window(snapshot.size)
    for number, sealer in snapshot.recents.items():
        if sealer == sealer_index and next_number - window < number < next_number:
            return True
    return False


def record_seal(snapshot: SealerSnapshot, number: int, sealer_index: int) -> SealerSnapshot:
    """Return a snapshot with ``number -> sealer_index`` recorded.

    Entries older than ``number - W + 1`` are evicted, keeping exactly the
    trailing window that future eligibility checks consult.
    """
    window = recents_window(snapshot.size)
    floor = number - window + 1
    recents = {n: s for n, s in snapshot.recents.items() if n >= floor}
    recents[number] = sealer_index
    return SealerSnapshot(snapshot.sealers, recents)


def snapshot_for_chain(
    sealers: tuple[str, ...], headers: list[BlockHeader]
) -> SealerSnapshot:
    """Snapshot derived from a canonical header sequence (genesis first)."""
    snapshot = SealerSnapshot(sealers)
    window = recents_window(len(sealers))
    for header in headers[-window:]:
        if header.is_genesis():
            continue
        snapshot = record_seal(snapshot, header.number, header.sealer_index)
    return snapshot


@dataclass(frozen=True)
class VerifyFlags:
    """Which of the three verification checks a node enforces."""

    check_recently_signed: bool
    check_difficulty_domain: bool
    check_inturn_identity: bool


# All three checks on: the hardened verifier.
FIXED = VerifyFlags(True, True, True)

# Only the difficulty-domain check on: the flawed variant that lets a
# non-leader claim difficulty 2 and sign without waiting out the window.
VULNERABLE = VerifyFlags(False, True, False)

PRESETS = {"fixed": FIXED, "vulnerable": VULNERABLE}


class RejectReason(enum.Enum):
    RECENTLY_SIGNED = "recently_signed"
    INVALID_DIFFICULTY = "invalid_difficulty"
    WRONG_TURN_DIFFICULTY = "wrong_turn_difficulty"


def verify_header(
    header: BlockHeader, snapshot: SealerSnapshot, flags: VerifyFlags
) -> RejectReason | None:
    """Run the enabled checks against ``header``; None means accept.

    ``snapshot`` must be the sealer snapshot as of the header's parent.
    Checks run in a fixed order; the reported reason is the first enabled
    check that fails:

    1. recently signed: the sealer must not appear in the trailing window;
    2. difficulty domain: difficulty must be 1 or 2;
    3. in-turn identity: difficulty 2 if and only if the sealer is the
       round's leader.
    """
    if flags.check_recently_signed:
        if signed_recently(snapshot, header.sealer_index, header.number):
            return RejectReason.RECENTLY_SIGNED
    if flags.check_difficulty_domain:
        if header.difficulty not in (1, 2):
            return RejectReason.INVALID_DIFFICULTY
    if flags.check_inturn_identity:
        in_turn = header.sealer_index == leader_index(header.number, snapshot.size)
        if (header.difficulty == 2) != in_turn:
            return RejectReason.WRONG_TURN_DIFFICULTY
    return None


@dataclass(frozen=True)
class ProposalContext:
    """Everything a policy needs to plan the next block on a given head."""

    parent_number: int
    parent_hash: bytes
    parent_time_ms: int
    snapshot: SealerSnapshot
    now_ms: int
    block_interval_ms: int

    def __post_init__(self) -> None:
        if self.block_interval_ms <= 0:
            raise ValueError("block interval must be positive")

    @property
    def next_number(self) -> int:
        return self.parent_number + 1

    @property
    def next_claim_ms(self) -> int:
        """Protocol timestamp of the next block: parent time + interval.

        Never earlier than planning time, mirroring clients that bump a
        stale target to the current clock.
        """
        return max(self.parent_time_ms + self.block_interval_ms, self.now_ms)
