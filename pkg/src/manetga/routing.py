"""Reactive route discovery with sequence-number freshness, plus MPR selection.

RREPs carry the whole discovered route in ``path`` (requester first,
destination last) so that the confirmation and multi-reply defences can
compare routes hop by hop.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Iterable, List, NamedTuple, Optional, Set, Tuple

from .netmodel import Pair, claim_adjacency, two_hop_neighbors

log = logging.getLogger(__name__)

KINDS = ("RREQ", "RREP", "CREQ", "CREP", "LINKADV", "ACK", "DATA")


@dataclass(frozen=True)
class ControlMessage:
    kind: str
    origin: int
    target: int
    broadcast_id: int = 0
    dst_seq: int = 0
    origin_seq: int = 0
    hop_count: int = 0
    path: Tuple[int, ...] = ()
    payload_id: int = 0
    claimed_links: FrozenSet[Pair] = frozenset()
    position: Optional[Tuple[float, float, int]] = None
    # DATA/ACK/CREP: planned source route; RREP/CREQ/CREP: node that produced the reply
    route: Tuple[int, ...] = ()
    responder: int = 0
    commodity: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown message kind {self.kind!r}")


@dataclass
class RouteEntry:
    dest: int
    next_hop: int
    hop_count: int
    dst_seq: int
    full_path: Tuple[int, ...]

    @classmethod
    def from_path(cls, full_path: Tuple[int, ...], dst_seq: int) -> "RouteEntry":
        if len(full_path) < 2:
            raise ValueError("a route needs at least two nodes")
        if len(set(full_path)) != len(full_path):
            raise ValueError(f"route {full_path} has a loop")
        return cls(full_path[-1], full_path[1], len(full_path) - 1, dst_seq, tuple(full_path))


@dataclass
class RoutingTable:
    node: int
    routes: Dict[int, RouteEntry] = field(default_factory=dict)
    own_seq: int = 0
    seen_rreqs: Set[Tuple[int, int]] = field(default_factory=set)
    next_broadcast_id: int = 1
    last_seq: Dict[int, int] = field(default_factory=dict)
    pending: Set[int] = field(default_factory=set)

    def invalidate(self, dest: int) -> None:
        self.routes.pop(dest, None)


class Action(NamedTuple):
    kind: str  # forward | reply | deliver | drop
    message: Optional[ControlMessage] = None
    next_hop: Optional[int] = None
    reason: str = ""


def originate_rreq(table: RoutingTable, dst: int) -> ControlMessage:
    table.own_seq += 1
    bid = table.next_broadcast_id
    table.next_broadcast_id += 1
    table.seen_rreqs.add((table.node, bid))
    table.pending.add(dst)
    return ControlMessage(
        "RREQ", table.node, dst,
        broadcast_id=bid,
        dst_seq=table.last_seq.get(dst, 0),
        origin_seq=table.own_seq,
        path=(table.node,),
    )


def is_fresher(candidate_seq: int, candidate_hops: int, current: Optional[RouteEntry]) -> bool:
    """AODV ordering: higher seq wins, equal seq needs strictly fewer hops."""
    if current is None:
        return True
    if candidate_seq != current.dst_seq:
        return candidate_seq > current.dst_seq
    return candidate_hops < current.hop_count


def offer_route(table: RoutingTable, full_path: Tuple[int, ...], dst_seq: int) -> bool:
    if len(full_path) < 2 or full_path[0] != table.node or len(set(full_path)) != len(full_path):
        return False
    dest = full_path[-1]
    if not is_fresher(dst_seq, len(full_path) - 1, table.routes.get(dest)):
        return False
    table.routes[dest] = RouteEntry.from_path(tuple(full_path), dst_seq)
    table.last_seq[dest] = max(table.last_seq.get(dest, 0), dst_seq)
    return True


def handle_rreq(table: RoutingTable, m: ControlMessage) -> List[Action]:
    if m.kind != "RREQ":
        raise ValueError("handle_rreq expects an RREQ")
    node = table.node
    key = (m.origin, m.broadcast_id)
    if key in table.seen_rreqs:
        return []
    if node in m.path:
        return [Action("drop", reason="loop")]
    table.seen_rreqs.add(key)
    if node == m.target:
        table.own_seq = max(table.own_seq, m.dst_seq)
        rrep = ControlMessage(
            "RREP", node, m.origin,
            broadcast_id=m.broadcast_id,
            dst_seq=table.own_seq,
            hop_count=len(m.path),
            path=m.path + (node,),
            responder=node,
        )
        return [Action("reply", rrep, next_hop=m.path[-1])]
    entry = table.routes.get(m.target)
    if entry is not None and entry.dst_seq >= m.dst_seq and not set(entry.full_path) & set(m.path):
        # cached reply keeps the cached sequence number unchanged
        full = m.path + entry.full_path
        rrep = ControlMessage(
            "RREP", node, m.origin,
            broadcast_id=m.broadcast_id,
            dst_seq=entry.dst_seq,
            hop_count=len(full) - 1,
            path=full,
            responder=node,
        )
        return [Action("reply", rrep, next_hop=m.path[-1])]
    fwd = replace(m, path=m.path + (node,), hop_count=m.hop_count + 1)
    return [Action("forward", fwd)]


def learn_reverse(table: RoutingTable, m: ControlMessage) -> bool:
    """Install the reverse route to an RREQ's originator."""
    if m.origin == table.node or m.origin in table.pending or table.node in m.path:
        return False
    return offer_route(table, (table.node,) + tuple(reversed(m.path)), m.origin_seq)


def handle_rrep(table: RoutingTable, m: ControlMessage) -> bool:
    """Offer the route carried by an RREP; True when it was accepted."""
    if m.kind != "RREP":
        raise ValueError("handle_rrep expects an RREP")
    if table.node not in m.path:
        return False
    i = m.path.index(table.node)
    return offer_route(table, m.path[i:], m.dst_seq)


def rrep_next_hop(node: int, m: ControlMessage) -> Optional[int]:
    """Next node toward the requester on the RREP's recorded route."""
    i = m.path.index(node)
    return m.path[i - 1] if i > 0 else None


def forward_data(table: RoutingTable, m: ControlMessage) -> Action:
    if m.kind != "DATA":
        raise ValueError("forward_data expects DATA")
    node = table.node
    if node == m.target:
        return Action("deliver", m)
    if node in m.route:
        i = m.route.index(node)
        if i + 1 < len(m.route):
            return Action("forward", m, next_hop=m.route[i + 1])
    entry = table.routes.get(m.target)
    if entry is not None:
        return Action("forward", m, next_hop=entry.next_hop)
    return Action("drop", m, reason="no_route")


def uncoverable(one_hop: Iterable[int], claims: Iterable[Pair], self_id: int) -> Set[int]:
    claims = list(claims)
    adj = claim_adjacency(claims)
    two = two_hop_neighbors(claims, self_id)
    reach: Set[int] = set()
    for m in one_hop:
        reach |= adj.get(m, set())
    return two - reach


def select_mprs(one_hop: Iterable[int], claims: Iterable[Pair], self_id: int) -> Set[int]:
    """Greedy set cover of the advertised two-hop neighbourhood.

    Picks the one-hop neighbour covering most uncovered two-hop nodes
    (lowest id on ties), then prunes members made redundant by later picks.
    """
    claims = list(claims)
    one_hop = set(one_hop)
    adj = claim_adjacency(claims)
    missing = uncoverable(one_hop, claims, self_id)
    if missing:
        log.debug("node %s: two-hop nodes %s cannot be covered", self_id, sorted(missing))
    todo = two_hop_neighbors(claims, self_id) - missing
    cover = {m: adj.get(m, set()) & todo for m in one_hop}
    chosen: List[int] = []
    while todo:
        best = min(cover, key=lambda m: (-len(cover[m] & todo), m))
        chosen.append(best)
        todo -= cover[best]
    mprs = set(chosen)
    for m in reversed(chosen):
        rest = set().union(*(cover[k] for k in mprs - {m})) if len(mprs) > 1 else set()
        if rest >= cover[m]:
            mprs.discard(m)
    return mprs
