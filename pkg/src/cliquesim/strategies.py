"""Sealer behaviour policies.

The honest policy follows the protocol: respect the recently-signed
window, claim the difficulty the rotation assigns, and hold every block
until its protocol timestamp (plus a random wiggle when out of turn). The
malicious policy is the same client with three local constraints ripped
out: it claims a fixed difficulty (2 by default, settable to an invalid
value such as 9), broadcasts with zero delay, and ignores the
recently-signed window. It still chains off whatever head its own fork
choice reports; it frontruns leadership, not consistency.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass

from .engine import (
    ProposalContext,
    difficulty_for,
    leader_index,
    signed_recently,
    wiggle_delay,
)


class PolicyKind(enum.Enum):
    HONEST = "honest"
    MALICIOUS = "malicious"


@dataclass(frozen=True)
class SealerPolicy:
    kind: PolicyKind
    forced_difficulty: int | None = None
    zero_delay: bool = False
    bypass_recents: bool = False

    def __post_init__(self) -> None:
        if self.kind is PolicyKind.HONEST:
            if self.forced_difficulty is not None or self.zero_delay or self.bypass_recents:
                raise ValueError("honest policy takes no overrides")

    @classmethod
    def honest(cls) -> "SealerPolicy":
        return cls(PolicyKind.HONEST)

    @classmethod
    def malicious(
        cls,
        forced_difficulty: int = 2,
        zero_delay: bool = True,
        bypass_recents: bool = True,
    ) -> "SealerPolicy":
        return cls(PolicyKind.MALICIOUS, forced_difficulty, zero_delay, bypass_recents)


@dataclass(frozen=True)
class ProposalPlan:
    """One scheduled sealing attempt.

    ``claim_ms`` is the protocol timestamp the block will carry;
    ``fire_at_ms`` is when the sealer actually signs and broadcasts. An
    honest sealer never fires before the claim; the zero-delay attacker
    fires immediately and lets the network sit on the block until its
    claim time.
    """

    height: int
    parent: bytes
    difficulty: int
    claim_ms: int
    fire_at_ms: int
    eligible: bool


def plan_proposal(
    policy: SealerPolicy,
    ctx: ProposalContext,
    self_index: int,
    rng: random.Random,
) -> ProposalPlan:
    """Plan the next block on top of ``ctx``'s parent under ``policy``."""
    n_sealers = ctx.snapshot.size
    height = ctx.next_number
    claim = ctx.next_claim_ms
    is_leader = self_index == leader_index(height, n_sealers)
    honest_eligible = not signed_recently(ctx.snapshot, self_index, height)

    if policy.kind is PolicyKind.HONEST:
        difficulty = difficulty_for(self_index, height, n_sealers)
        fire_at = claim if is_leader else claim + wiggle_delay(n_sealers, rng)
        eligible = honest_eligible
    else:
        difficulty = policy.forced_difficulty if policy.forced_difficulty is not None else 2
        if policy.zero_delay:
            fire_at = ctx.now_ms
        else:
            fire_at = claim if is_leader else claim + wiggle_delay(n_sealers, rng)
        eligible = True if policy.bypass_recents else honest_eligible

    return ProposalPlan(
        height=height,
        parent=ctx.parent_hash,
        difficulty=difficulty,
        claim_ms=claim,
        fire_at_ms=fire_at,
        eligible=eligible,
    )


def on_new_head(
    policy: SealerPolicy,
    ctx: ProposalContext,
    self_index: int,
    pending: ProposalPlan | None,
    rng: random.Random,
) -> ProposalPlan:
    """Replan after the local head moved.

    Returns ``pending`` unchanged when it already builds on the head named
    by ``ctx`` (duplicate delivery); otherwise the stale plan is dropped
    and a fresh one is made for the next height. The caller cancels the
    stale plan's scheduled firing when the returned plan differs.
    """
    if pending is not None and pending.parent == ctx.parent_hash:
        return pending
    return plan_proposal(policy, ctx, self_index, rng)
