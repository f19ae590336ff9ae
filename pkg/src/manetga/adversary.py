"""Attacker behaviours that replace honest node logic."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import FrozenSet, List, Optional, Tuple

from .netmodel import Pair, pair
from .routing import ControlMessage

KINDS = ("flooding", "blackhole", "misrelay", "linkspoof")


@dataclass(frozen=True)
class AttackProfile:
    node: int
    kind: str
    rate: float = 0.0
    fake_dst: int = 0
    spoof_id: Optional[int] = None
    delta: int = 1
    accomplice: Optional[int] = None
    partner: int = 0
    mode: str = "drop"
    target: int = 0
    fake_neighbor: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown attack kind {self.kind!r}")
        if self.kind == "flooding" and self.rate <= 0:
            raise ValueError("flooding rate must be > 0")
        if self.kind == "blackhole" and self.delta < 0:
            raise ValueError("blackhole delta must be >= 0")
        if self.kind == "misrelay":
            if self.partner == self.node:
                raise ValueError("misrelay partner must differ from the attacker")
            if self.mode not in ("drop", "modify"):
                raise ValueError(f"misrelay mode must be drop or modify, got {self.mode!r}")


@dataclass
class FloodClock:
    carry: float = 0.0
    next_broadcast_id: int = 1


def act_flooding(profile: AttackProfile, clock: FloodClock) -> List[ControlMessage]:
    """RREQs for a nonexistent destination; fractional rates accumulate."""
    total = clock.carry + profile.rate
    count = math.floor(total + 1e-9)
    clock.carry = total - count
    origin = profile.spoof_id if profile.spoof_id is not None else profile.node
    out = []
    for _ in range(count):
        out.append(ControlMessage(
            "RREQ", origin, profile.fake_dst,
            broadcast_id=clock.next_broadcast_id,
            path=(origin,),
        ))
        clock.next_broadcast_id += 1
    return out


def act_blackhole(profile: AttackProfile, m: ControlMessage) -> Optional[ControlMessage]:
    """Forged RREP claiming a one-hop route to the target, seq inflated by delta.

    Returns None when no loop-free forgery exists (the target or the attacker
    already appears on the request path).
    """
    if m.kind != "RREQ":
        raise ValueError("act_blackhole expects an RREQ")
    me = profile.node
    if m.target == me or m.target in m.path or me in m.path:
        return None
    tail: Tuple[int, ...] = (me,)
    if profile.accomplice is not None and profile.accomplice not in m.path and profile.accomplice != m.target:
        tail = (me, profile.accomplice)
    full = m.path + tail + (m.target,)
    return ControlMessage(
        "RREP", me, m.origin,
        broadcast_id=m.broadcast_id,
        dst_seq=m.dst_seq + profile.delta,
        hop_count=len(full) - 1,
        path=full,
        responder=me,
    )


def act_misrelay(profile: AttackProfile, m: ControlMessage, prev_hop: int) -> Tuple[str, ControlMessage]:
    """Play innocent unless the message came straight from the partner."""
    if prev_hop != profile.partner:
        return "forward_unmodified", m
    if profile.mode == "drop":
        return "drop", m
    return "modify", replace(m, dst_seq=0)


def act_linkspoof(profile: AttackProfile, true_links: FrozenSet[Pair],
                  position: Tuple[float, float], now: int, broadcast_id: int = 0) -> ControlMessage:
    claims = frozenset(true_links) | {pair(profile.node, profile.fake_neighbor)}
    return ControlMessage(
        "LINKADV", profile.node, 0,
        broadcast_id=broadcast_id,
        path=(profile.node,),
        claimed_links=claims,
        position=(position[0], position[1], now),
    )
