"""Countermeasures against the four routing attacks.

Each detector keeps per-observer state and returns a verdict; the engine
turns verdicts into accusations that are scored against attacker labels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Hashable, Iterable, List, Optional, Sequence, Set, Tuple

from .netmodel import Pair, hop_distances
from .routing import ControlMessage

DETECTORS = ("blacklist", "confirm", "quorum", "ack", "linkcheck")


@dataclass
class BlacklistState:
    window_len: int = 10
    threshold: int = 10
    counters: Dict[int, int] = field(default_factory=dict)
    blacklist: Set[int] = field(default_factory=set)
    window: int = 0


def monitor_rreq_rate(state: BlacklistState, origin: int, step: int) -> str:
    window = step // state.window_len
    if window != state.window:
        state.window = window
        state.counters.clear()
    state.counters[origin] = state.counters.get(origin, 0) + 1
    if state.counters[origin] > state.threshold:
        state.blacklist.add(origin)
        return "blacklisted"
    return "ok"


@dataclass
class PendingConfirm:
    rrep: ControlMessage
    deadline: int


@dataclass
class ConfirmationState:
    timeout: int = 8
    pending: Dict[Hashable, PendingConfirm] = field(default_factory=dict)

    def expect(self, key: Hashable, rrep: ControlMessage, now: int) -> None:
        self.pending[key] = PendingConfirm(rrep, now + self.timeout)

    def expired(self, now: int) -> List[Tuple[Hashable, ControlMessage]]:
        gone = [(k, p.rrep) for k, p in self.pending.items() if p.deadline <= now]
        for k, _ in gone:
            del self.pending[k]
        return gone


def confirm_route(state: ConfirmationState, rrep: ControlMessage,
                  crep: Optional[ControlMessage], key: Hashable = None) -> str:
    """Compare the advertised route with the one vouched for by the next hop."""
    if key is not None:
        state.pending.pop(key, None)
    if crep is None:
        return "timeout"
    return "confirmed" if tuple(crep.path) == tuple(rrep.path) else "mismatch"


@dataclass
class RrepQuorumState:
    min_count: int = 2
    collected: Dict[Hashable, List[Tuple[int, ...]]] = field(default_factory=dict)

    def add(self, key: Hashable, path: Sequence[int]) -> None:
        self.collected.setdefault(key, []).append(tuple(path))


def interior(path: Sequence[int]) -> Set[int]:
    return set(path[1:-1])


def corroborated(paths: Sequence[Sequence[int]]) -> List[int]:
    """Indices of paths sharing an interior node with some other path."""
    out = []
    for i, p in enumerate(paths):
        mine = interior(p)
        if any(mine & interior(q) for j, q in enumerate(paths) if j != i):
            out.append(i)
    return out


def quorum_check(state: RrepQuorumState, key: Hashable) -> str:
    paths = state.collected.get(key, [])
    if len(paths) < state.min_count:
        return "waiting"
    return "safe" if corroborated(paths) else "unsafe"


@dataclass
class AckWatch:
    auditor: int
    overhear_k: int = 1
    pending: Dict[int, Tuple[Tuple[int, ...], int]] = field(default_factory=dict)

    def __post_init__(self):
        if self.overhear_k < 1:
            raise ValueError("overhear_k must be >= 1")

    def watch(self, payload_id: int, route: Sequence[int], deadline: int) -> None:
        self.pending[payload_id] = (tuple(route), deadline)


def ack_audit(watch: AckWatch, observed_forwards: Set[Tuple[int, int]], received_acks: Set[int],
              adj: Dict[int, Set[int]], now: int) -> Set[int]:
    """Suspects among nearby forwarders of packets whose deadline passed without an ACK.

    Only nodes within ``overhear_k`` hops of the auditor are observable, so
    a dropper further downstream is never suspected.
    """
    dist = hop_distances(adj, watch.auditor)
    suspects: Set[int] = set()
    for pid in sorted(watch.pending):
        route, deadline = watch.pending[pid]
        if pid in received_acks:
            del watch.pending[pid]
            continue
        if deadline > now:
            continue
        del watch.pending[pid]
        for hop in route[1:-1]:
            if dist.get(hop, math.inf) > watch.overhear_k:
                continue
            if (pid, hop) not in observed_forwards:
                suspects.add(hop)
                # later hops never saw the packet
                break
    return suspects


@dataclass
class PositionTable:
    max_range: float = 250.0
    slack: float = 0.0
    positions: Dict[int, Tuple[float, float, int]] = field(default_factory=dict)

    def update(self, node: int, x: float, y: float, timestamp: int) -> None:
        old = self.positions.get(node)
        if old is None or timestamp >= old[2]:
            self.positions[node] = (x, y, timestamp)


def verify_link_claim(ptab: PositionTable, claim: Pair) -> str:
    a, b = claim
    if a not in ptab.positions or b not in ptab.positions:
        return "indeterminate"
    pa, pb = ptab.positions[a], ptab.positions[b]
    dist = math.hypot(pa[0] - pb[0], pa[1] - pb[1])
    return "flagged" if dist > ptab.max_range + ptab.slack else "plausible"


def screen_claims(ptab: PositionTable, claims: Iterable[Pair]) -> Tuple[Set[Pair], Set[Pair], Set[Pair]]:
    """Split claims into (plausible, flagged, indeterminate)."""
    ok, bad, unknown = set(), set(), set()
    for c in claims:
        verdict = verify_link_claim(ptab, c)
        (ok if verdict == "plausible" else bad if verdict == "flagged" else unknown).add(c)
    return ok, bad, unknown
