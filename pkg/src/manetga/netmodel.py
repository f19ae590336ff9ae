"""Node geometry, adjacency, random-waypoint mobility and clusterhead election."""

from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Iterable, Optional, Set, Tuple

Pair = Tuple[int, int]


def pair(a: int, b: int) -> Pair:
    """Canonical (low, high) key for an undirected link."""
    if a == b:
        raise ValueError(f"link endpoints must differ, got {a}-{b}")
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class NodeState:
    id: int
    pos: Tuple[float, float]
    waypoint: Optional[Tuple[float, float]] = None
    speed: float = 0.0
    cluster_id: Optional[int] = None
    is_clusterhead: bool = False

    def __post_init__(self):
        if self.id <= 0:
            raise ValueError(f"node id must be positive, got {self.id}")
        if self.speed < 0:
            raise ValueError(f"node {self.id}: speed must be >= 0")
        if not all(math.isfinite(v) for v in self.pos):
            raise ValueError(f"node {self.id}: position must be finite")
        if self.waypoint is None:
            object.__setattr__(self, "waypoint", self.pos)


@dataclass(frozen=True)
class LinkSpec:
    endpoints: Pair
    capacity: float
    up: bool = True

    def __post_init__(self):
        a, b = self.endpoints
        object.__setattr__(self, "endpoints", pair(a, b))
        if self.capacity <= 0:
            raise ValueError(f"link {a}-{b}: capacity must be > 0")


@dataclass(frozen=True)
class Commodity:
    g: int
    src: int
    dst: int
    demand: float

    def __post_init__(self):
        if self.src == self.dst:
            raise ValueError(f"commodity {self.g}: src == dst")
        if self.demand <= 0:
            raise ValueError(f"commodity {self.g}: demand must be > 0")


@dataclass(frozen=True)
class Topology:
    """Node set plus either explicit links or unit-disk adjacency.

    In explicit mode (``explicit=True``) adjacency is exactly the set of up
    links and positions only matter for location checks.  In unit-disk mode
    any pair within ``radio_range`` is adjacent unless a LinkSpec for the
    pair exists and is down.
    """

    nodes: Dict[int, NodeState]
    links: Dict[Pair, LinkSpec] = field(default_factory=dict)
    radio_range: float = 250.0
    explicit: bool = False
    width: float = 1000.0
    height: float = 1000.0
    default_capacity: float = 10.0

    def __post_init__(self):
        for key, link in self.links.items():
            if key != link.endpoints:
                raise ValueError(f"link key {key} does not match {link.endpoints}")
            for end in key:
                if end not in self.nodes:
                    raise ValueError(f"link {key[0]}-{key[1]} references unknown node {end}")

    def capacity(self, a: int, b: int) -> float:
        link = self.links.get(pair(a, b))
        return link.capacity if link is not None else self.default_capacity

    def with_link_state(self, a: int, b: int, up: bool) -> "Topology":
        key = pair(a, b)
        links = dict(self.links)
        old = links.get(key)
        links[key] = LinkSpec(key, old.capacity if old else self.default_capacity, up)
        return replace(self, links=links)


@dataclass(frozen=True)
class ClusterAssignment:
    member_of: Dict[int, int]
    heads: Dict[int, int]


def distance(p: Tuple[float, float], q: Tuple[float, float]) -> float:
    return math.hypot(p[0] - q[0], p[1] - q[1])


def neighbors(topo: Topology, n: int) -> Set[int]:
    if n not in topo.nodes:
        raise KeyError(f"unknown node id {n}")
    if topo.explicit:
        out = set()
        for (a, b), link in topo.links.items():
            if link.up and n in (a, b):
                out.add(b if a == n else a)
        return out
    here = topo.nodes[n].pos
    out = set()
    for m, other in topo.nodes.items():
        if m == n:
            continue
        link = topo.links.get(pair(n, m))
        if link is not None and not link.up:
            continue
        if distance(here, other.pos) <= topo.radio_range:
            out.add(m)
    return out


def adjacency(topo: Topology) -> Dict[int, Set[int]]:
    return {n: neighbors(topo, n) for n in sorted(topo.nodes)}


def active_links(topo: Topology) -> Dict[Pair, float]:
    """Currently usable links with their capacities, in canonical order."""
    adj = adjacency(topo)
    out = {}
    for a in sorted(adj):
        for b in sorted(adj[a]):
            if a < b:
                out[(a, b)] = topo.capacity(a, b)
    return out


def hop_distances(adj: Dict[int, Set[int]], src: int) -> Dict[int, int]:
    dist = {src: 0}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        for v in sorted(adj.get(u, ())):
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def step_mobility(topo: Topology, rng: random.Random) -> Topology:
    """Advance every moving node one step of random-waypoint motion."""
    nodes = {}
    for nid in sorted(topo.nodes):
        node = topo.nodes[nid]
        if node.speed <= 0:
            nodes[nid] = node
            continue
        waypoint = node.waypoint
        if waypoint == node.pos:
            waypoint = (rng.uniform(0.0, topo.width), rng.uniform(0.0, topo.height))
        gap = distance(node.pos, waypoint)
        if gap <= node.speed:
            pos = waypoint
        else:
            frac = node.speed / gap
            pos = (node.pos[0] + (waypoint[0] - node.pos[0]) * frac,
                   node.pos[1] + (waypoint[1] - node.pos[1]) * frac)
        nodes[nid] = replace(node, pos=pos, waypoint=waypoint)
    return replace(topo, nodes=nodes)


def elect_clusterheads(topo: Topology, c1: float = 1.0, c2: float = 1.0) -> ClusterAssignment:
    """Greedy highest-score election; score = c1*degree - c2*speed.

    Ties go to the lowest id.  Each head absorbs its still-unassigned
    neighbours, so clusters never overlap.
    """
    adj = adjacency(topo)
    score = {n: c1 * len(adj[n]) - c2 * topo.nodes[n].speed for n in adj}
    order = sorted(adj, key=lambda n: (-score[n], n))
    member_of: Dict[int, int] = {}
    heads: Dict[int, int] = {}
    for n in order:
        if n in member_of:
            continue
        cid = len(heads) + 1
        heads[cid] = n
        member_of[n] = cid
        for m in sorted(adj[n]):
            if m not in member_of:
                member_of[m] = cid
    return ClusterAssignment(member_of, heads)


def label_clusters(topo: Topology, assignment: ClusterAssignment) -> Topology:
    head_ids = set(assignment.heads.values())
    nodes = {
        n: replace(s, cluster_id=assignment.member_of[n], is_clusterhead=n in head_ids)
        for n, s in topo.nodes.items()
    }
    return replace(topo, nodes=nodes)


def claim_adjacency(claims: Iterable[Pair]) -> Dict[int, Set[int]]:
    adj: Dict[int, Set[int]] = {}
    for a, b in claims:
        if a == b:
            continue
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)
    return adj


def two_hop_neighbors(claims: Iterable[Pair], n: int) -> Set[int]:
    """Nodes exactly two advertised hops from ``n``.

    Works on advertised links, so a spoofed claim creates two-hop
    neighbours that do not physically exist.
    """
    adj = claim_adjacency(claims)
    one = adj.get(n, set())
    two: Set[int] = set()
    for m in one:
        two |= adj.get(m, set())
    return two - one - {n}


def frozen_claims(links: Iterable[Pair]) -> FrozenSet[Pair]:
    return frozenset(pair(a, b) for a, b in links)
