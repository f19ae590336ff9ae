"""Deterministic round-based world loop.

Each step: apply scheduled failures, move nodes, deliver everything sent in
the previous step to nodes still in range, let every node process its inbox,
fire timers, then emit new traffic.  A message therefore moves exactly one
hop per step, which makes route races a function of hop distance.
"""

from __future__ import annotations

import math
import random
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Deque, Dict, List, Optional, Sequence, Set, Tuple

from . import adversary, gaopt, routing, sentinel
from .netmodel import (
    Commodity, Topology, adjacency, elect_clusterheads, hop_distances, pair,
    step_mobility,
)
from .routing import ControlMessage, RoutingTable

# which detectors are expected to catch which attack kind
DOMAINS = {
    "blacklist": ("flooding",),
    "confirm": ("blackhole",),
    "quorum": ("blackhole",),
    "ack": ("misrelay", "blackhole"),
    "linkcheck": ("linkspoof",),
}


@dataclass(frozen=True)
class Failure:
    a: int
    b: Optional[int]  # None: node failure
    step: int


@dataclass(frozen=True)
class SimConfig:
    steps: int = 100
    seed: int = 1
    data_rate: float = 1.0
    failures: Tuple[Failure, ...] = ()
    routing: str = "reactive"
    drain: int = 20
    discovery_timeout: int = 12
    linkadv: bool = False
    adv_interval: int = 5
    optimize: bool = False
    cluster_c1: float = 1.0
    cluster_c2: float = 1.0

    def __post_init__(self):
        if self.steps < 0:
            raise ValueError("steps must be >= 0")
        if self.routing not in ("reactive", "proactive"):
            raise ValueError(f"routing must be reactive or proactive, got {self.routing!r}")


@dataclass(frozen=True)
class DefenseConfig:
    blacklist: bool = False
    window: int = 10
    threshold: int = 10
    confirm: bool = False
    confirm_timeout: int = 8
    quorum: bool = False
    quorum_min: int = 2
    quorum_wait: int = 6
    ack: bool = False
    ack_k: int = 1
    linkcheck: bool = False
    slack: float = -1.0  # negative: derive from node speeds

    def enabled(self) -> List[str]:
        return [d for d in sentinel.DETECTORS if getattr(self, d)]

    def off(self) -> "DefenseConfig":
        from dataclasses import replace
        return replace(self, **{d: False for d in sentinel.DETECTORS})


@dataclass
class DetectorScore:
    tp: int = 0
    fp: int = 0
    fn: int = 0


@dataclass
class MetricsReport:
    data_sent: int = 0
    data_delivered: int = 0
    data_dropped: int = 0
    in_flight: int = 0
    control_msgs: int = 0
    blacklist_events: int = 0
    max_link_utilization: float = 0.0
    route_discoveries: int = 0
    detectors: Dict[str, DetectorScore] = field(
        default_factory=lambda: {d: DetectorScore() for d in sentinel.DETECTORS})
    per_commodity: Dict[int, Tuple[int, int]] = field(default_factory=dict)

    @property
    def delivery_ratio(self) -> float:
        return self.data_delivered / self.data_sent if self.data_sent else 0.0

    def commodity_ratio(self, g: int) -> float:
        sent, got = self.per_commodity.get(g, (0, 0))
        return got / sent if sent else 0.0


Event = Tuple  # (step, kind, *fields)


def compute_metrics(events: Sequence[Event]) -> MetricsReport:
    rep = MetricsReport()
    labels: Set[int] = set()
    enabled: Set[str] = set()
    accused: Dict[str, Set[int]] = defaultdict(set)
    misbehaved: Dict[str, Set[int]] = defaultdict(set)
    sent: Dict[int, int] = defaultdict(int)
    got: Dict[int, int] = defaultdict(int)
    for ev in events:
        kind = ev[1]
        if kind == "label":
            labels.add(ev[2])
        elif kind == "detector":
            enabled.add(ev[2])
        elif kind == "data_sent":
            rep.data_sent += 1
            sent[ev[2]] += 1
        elif kind == "data_delivered":
            rep.data_delivered += 1
            got[ev[2]] += 1
        elif kind == "data_dropped":
            rep.data_dropped += 1
        elif kind == "ctrl":
            rep.control_msgs += 1
        elif kind == "blacklist":
            rep.blacklist_events += 1
        elif kind == "accuse":
            accused[ev[2]].add(ev[4])
        elif kind == "misbehave":
            misbehaved[ev[2]].add(ev[3])
        elif kind == "util":
            rep.max_link_utilization = max(rep.max_link_utilization, ev[2])
        elif kind == "discovery":
            rep.route_discoveries += 1
    rep.in_flight = rep.data_sent - rep.data_delivered - rep.data_dropped
    for det in sentinel.DETECTORS:
        if det not in enabled:
            continue
        score = rep.detectors[det]
        score.tp = len(accused[det] & labels)
        score.fp = len(accused[det] - labels)
        culprits = set().union(*(misbehaved[k] for k in DOMAINS[det])) & labels
        score.fn = len(culprits - accused[det])
    rep.per_commodity = {g: (sent[g], got[g]) for g in sorted(sent)}
    return rep


def step_rows(events: Sequence[Event], total_steps: int) -> List[Tuple[int, int, int, int, int, int]]:
    """Per-step (step, sent, delivered, dropped, in_flight, control) counters."""
    per = defaultdict(lambda: [0, 0, 0, 0])
    col = {"data_sent": 0, "data_delivered": 1, "data_dropped": 2, "ctrl": 3}
    for ev in events:
        if ev[1] in col:
            per[ev[0]][col[ev[1]]] += 1
    rows, inflight = [], 0
    for s in range(total_steps):
        a, b, c, d = per[s]
        inflight += a - b - c
        rows.append((s, a, b, c, inflight, d))
    return rows


@dataclass
class Discovery:
    dst: int
    bid: int
    deadline: int
    rreps: List[ControlMessage] = field(default_factory=list)


@dataclass
class Flow:
    com: Commodity
    carry: float = 0.0
    buffer: Deque[int] = field(default_factory=deque)
    primary: Optional[Tuple[int, ...]] = None
    backup: Optional[Tuple[int, ...]] = None
    active: Optional[Tuple[int, ...]] = None


class World:
    def __init__(self, scenario, defenses: Optional[DefenseConfig] = None, seed: Optional[int] = None):
        self.sc = scenario
        self.cfg: SimConfig = scenario.sim
        self.df: DefenseConfig = defenses if defenses is not None else scenario.defense
        self.rng = random.Random(self.cfg.seed if seed is None else seed)
        self.topo: Topology = scenario.topology
        self.dead: Set[int] = set()
        self.step = 0
        self.events: List[Event] = []
        self.outbox: List[Tuple[int, Optional[int], ControlMessage]] = []
        self.tables = {n: RoutingTable(n) for n in sorted(self.topo.nodes)}
        self.attackers = {p.node: p for p in scenario.attackers}
        self.flood_clock = {n: adversary.FloodClock() for n, p in self.attackers.items() if p.kind == "flooding"}
        self.accomplice_of = {p.accomplice: p.node for p in scenario.attackers
                              if p.kind == "blackhole" and p.accomplice is not None}
        self.flows = [Flow(c) for c in scenario.commodities]
        self.next_pid = 1
        self.pid_flow: Dict[int, int] = {}
        self.discoveries: Dict[Tuple[int, int], Discovery] = {}
        self.adj: Dict[int, Set[int]] = {}
        self._hops: Dict[int, Dict[int, int]] = {}

        self.blacklists = {n: sentinel.BlacklistState(self.df.window, self.df.threshold) for n in self.tables}
        self.confirms = {n: sentinel.ConfirmationState(self.df.confirm_timeout) for n in self.tables}
        self.quorums = {n: sentinel.RrepQuorumState(self.df.quorum_min) for n in self.tables}
        self.watches = {n: sentinel.AckWatch(n, self.df.ack_k) for n in self.tables}
        self.overheard: Dict[int, Set[Tuple[int, int]]] = defaultdict(set)
        self.acks: Dict[int, Set[int]] = defaultdict(set)

        slack = self.df.slack
        if slack < 0:
            vmax = max((s.speed for s in self.topo.nodes.values()), default=0.0)
            slack = 2 * vmax * self.cfg.adv_interval
        self.ptabs = {n: sentinel.PositionTable(self.topo.radio_range, slack) for n in self.tables}
        self.adv_seen: Dict[int, Set[Tuple[int, int]]] = defaultdict(set)
        self.claims: Dict[int, Dict[int, frozenset]] = defaultdict(dict)
        self.adv_dirty: Set[int] = set()
        self.mprs: Dict[int, Set[int]] = {}
        self.adv_bid = defaultdict(int)
        self.spoof_accused: Set[Tuple[int, int]] = set()
        self.linkadv = self.cfg.linkadv or any(p.kind == "linkspoof" for p in scenario.attackers)

    # -- bookkeeping -------------------------------------------------
    def log(self, kind: str, *fields) -> None:
        self.events.append((self.step, kind) + fields)

    def send(self, sender: int, receiver: Optional[int], msg: ControlMessage) -> None:
        self.outbox.append((sender, receiver, msg))
        if msg.kind != "DATA":
            self.log("ctrl", msg.kind, sender)

    def accuse(self, detector: str, observer: int, node: int) -> None:
        self.log("accuse", detector, observer, node)

    def hops_from(self, n: int) -> Dict[int, int]:
        if n not in self._hops:
            self._hops[n] = hop_distances(self.adj, n)
        return self._hops[n]

    def refresh_adjacency(self) -> None:
        adj = adjacency(self.topo)
        for n in self.dead:
            for m in adj.pop(n, set()):
                adj.get(m, set()).discard(n)
            adj[n] = set()
        self.adj = adj
        self._hops = {}

    # -- setup -------------------------------------------------------
    def start(self) -> None:
        for n in sorted(self.attackers):
            self.log("label", n, self.attackers[n].kind)
        for det in self.df.enabled():
            self.log("detector", det)
        self.refresh_adjacency()
        clusters = elect_clusterheads(self.topo, self.cfg.cluster_c1, self.cfg.cluster_c2)
        for cid, head in sorted(clusters.heads.items()):
            members = sorted(n for n, c in clusters.member_of.items() if c == cid)
            self.log("cluster", cid, head, "-".join(map(str, members)))
        if self.cfg.routing == "proactive":
            self.plan_routes(initial=True)

    def weights(self, net: gaopt.Network) -> List[int]:
        if not self.cfg.optimize or not self.sc.commodities:
            return [1] * net.n
        return gaopt.evolve(net, self.sc.commodities, self.sc.ga).best

    def plan_routes(self, initial: bool = False, only: Optional[Flow] = None, counted: bool = True) -> None:
        caps = {}
        for a in sorted(self.adj):
            for b in sorted(self.adj[a]):
                if a < b:
                    caps[(a, b)] = self.topo.capacity(a, b)
        if not caps:
            for fl in self.flows:
                fl.primary = fl.backup = fl.active = None
            return
        net = gaopt.Network.from_links(caps)
        w = self.weights(net) if initial else [1] * net.n
        coms = [fl.com for fl in self.flows if only is None or fl is only]
        out = gaopt.backup_paths(net, w, coms, gaopt.route_demands(net, w, coms))
        for fl in self.flows:
            if only is not None and fl is not only:
                continue
            fl.primary, fl.backup = out.primary[fl.com.g], out.backup[fl.com.g]
            fl.active = fl.primary
            if not initial and counted:
                self.log("discovery", fl.com.src, fl.com.dst, 0)
            if fl.active is not None:
                self.log("route", fl.com.g, fmt_path(fl.active))

    # -- per-step phases ---------------------------------------------
    def apply_failures(self) -> None:
        for f in self.cfg.failures:
            if f.step != self.step:
                continue
            if f.b is None:
                self.dead.add(f.a)
                self.log("node_down", f.a)
            else:
                self.topo = self.topo.with_link_state(f.a, f.b, False)
                self.log("link_down", *pair(f.a, f.b))

    def path_ok(self, path: Optional[Sequence[int]]) -> bool:
        return path is not None and all(v in self.adj.get(u, ()) for u, v in zip(path, path[1:]))

    def check_proactive(self) -> None:
        for fl in self.flows:
            if self.path_ok(fl.active):
                continue
            if fl.active == fl.primary and self.path_ok(fl.backup):
                fl.active = fl.backup
                self.log("failover", fl.com.g, fmt_path(fl.active))
            else:
                self.plan_routes(only=fl, counted=fl.active is not None)

    def deliver(self) -> Dict[int, List[Tuple[int, ControlMessage]]]:
        inbox: Dict[int, List[Tuple[int, ControlMessage]]] = defaultdict(list)
        pending, self.outbox = self.outbox, []
        for sender, receiver, msg in pending:
            reach = self.adj.get(sender, set())
            if receiver is None:
                for r in sorted(reach):
                    inbox[r].append((sender, msg))
            elif receiver in reach:
                inbox[receiver].append((sender, msg))
            elif msg.kind == "DATA":
                self.drop_data(msg, "link_down")
                if self.cfg.routing == "reactive":
                    self.tables[msg.origin].invalidate(msg.target)
            else:
                self.log("lost", msg.kind, sender, receiver)
        return inbox

    def drop_data(self, msg: ControlMessage, reason: str) -> None:
        self.log("data_dropped", msg.commodity, msg.payload_id, reason)

    # -- message handling ---------------------------------------------
    def receive(self, n: int, sender: int, msg: ControlMessage) -> None:
        prof = self.attackers.get(n)
        if prof is not None and prof.kind == "misrelay" and msg.kind != "LINKADV":
            verdict, msg = adversary.act_misrelay(prof, msg, sender)
            if verdict != "forward_unmodified":
                self.log("misbehave", "misrelay", n)
            if verdict == "drop":
                if msg.kind == "DATA":
                    self.drop_data(msg, "misrelay")
                return
        if prof is not None and prof.kind == "blackhole":
            if msg.kind == "RREQ":
                key = (msg.origin, msg.broadcast_id)
                if key in self.tables[n].seen_rreqs:
                    return
                self.tables[n].seen_rreqs.add(key)
                forged = adversary.act_blackhole(prof, msg)
                if forged is not None:
                    self.log("misbehave", "blackhole", n)
                    self.send(n, sender, forged)
                    if self.df.confirm and prof.accomplice is not None and prof.accomplice in forged.path:
                        self.send(n, prof.accomplice, self.creq_for(forged, n))
                return
            if msg.kind == "DATA" and msg.target != n:
                self.log("misbehave", "blackhole", n)
                self.drop_data(msg, "blackhole")
                return
        handler = getattr(self, "on_" + msg.kind.lower())
        handler(n, sender, msg)

    def on_rreq(self, n: int, sender: int, m: ControlMessage) -> None:
        if self.df.blacklist:
            bl = self.blacklists[n]
            if m.origin in bl.blacklist:
                return
            if m.hop_count == 0:
                if sentinel.monitor_rreq_rate(bl, m.origin, self.step) == "blacklisted":
                    self.log("blacklist", n, m.origin)
                    self.accuse("blacklist", n, m.origin)
                    return
        table = self.tables[n]
        if (m.origin, m.broadcast_id) not in table.seen_rreqs:
            routing.learn_reverse(table, m)
        for act in routing.handle_rreq(table, m):
            if act.kind == "reply":
                self.send(n, act.next_hop, act.message)
                if self.df.confirm and n != m.target:
                    self.send(n, table.routes[m.target].next_hop, self.creq_for(act.message, n))
            elif act.kind == "forward":
                self.send(n, None, act.message)
            else:
                self.log("loop_suppressed", n, m.origin, m.broadcast_id)

    def creq_for(self, rrep: ControlMessage, responder: int) -> ControlMessage:
        i = rrep.path.index(responder)
        return ControlMessage("CREQ", responder, rrep.path[i + 1], broadcast_id=rrep.broadcast_id,
                              route=rrep.path, responder=responder)

    def on_creq(self, n: int, sender: int, m: ControlMessage) -> None:
        route = m.route
        if n not in route:
            return
        i = route.index(n)
        if self.accomplice_of.get(n) == m.responder:
            vouched = route
            self.log("misbehave", "blackhole", n)
        elif n == route[-1]:
            vouched = route
        else:
            entry = self.tables[n].routes.get(route[-1])
            if entry is None:
                return
            vouched = route[:i] + entry.full_path
        back = tuple(reversed(route[:i + 1]))
        crep = ControlMessage("CREP", n, route[0], broadcast_id=m.broadcast_id, path=vouched,
                              route=back, responder=m.responder)
        self.send(n, back[1], crep)

    def relay(self, n: int, m: ControlMessage) -> bool:
        """Source-routed hop; True when ``n`` is the final hop."""
        i = m.route.index(n) if n in m.route else -1
        if i < 0:
            return False
        if i == len(m.route) - 1:
            return True
        self.send(n, m.route[i + 1], m)
        return False

    def on_crep(self, n: int, sender: int, m: ControlMessage) -> None:
        if not self.relay(n, m):
            return
        disc = self.discoveries.get((n, m.path[-1]))
        key = (m.path[-1], m.broadcast_id, m.responder)
        pend = self.confirms[n].pending.get(key)
        if disc is None or pend is None:
            return
        verdict = sentinel.confirm_route(self.confirms[n], pend.rrep, m, key)
        self.log("verdict", "confirm", n, fmt_path(pend.rrep.path), verdict)
        if verdict == "confirmed":
            self.admit(n, disc, pend.rrep)
        else:
            self.accuse("confirm", n, m.responder)

    def on_rrep(self, n: int, sender: int, m: ControlMessage) -> None:
        table = self.tables[n]
        if n != m.path[0]:
            routing.handle_rrep(table, m)
            nxt = routing.rrep_next_hop(n, m)
            if nxt is not None:
                self.send(n, nxt, m)
            return
        dst = m.path[-1]
        disc = self.discoveries.get((n, dst))
        guarded = self.df.quorum or self.df.confirm
        if disc is None or disc.bid != m.broadcast_id:
            if not guarded and routing.handle_rrep(table, m):
                self.log("route", n, fmt_path(m.path))
            return
        if self.df.confirm and m.responder != dst:
            self.confirms[n].expect((dst, m.broadcast_id, m.responder), m, self.step)
            return
        self.admit(n, disc, m)

    def admit(self, n: int, disc: Discovery, m: ControlMessage) -> None:
        """A reply that passed confirmation (or needed none)."""
        if self.df.quorum:
            disc.rreps.append(m)
            self.quorums[n].add((disc.dst, disc.bid), m.path)
            return
        table = self.tables[n]
        if routing.handle_rrep(table, m):
            table.pending.discard(disc.dst)
            self.log("route", n, fmt_path(m.path))

    def on_data(self, n: int, sender: int, m: ControlMessage) -> None:
        act = routing.forward_data(self.tables[n], m)
        if act.kind == "deliver":
            self.log("data_delivered", m.commodity, m.payload_id)
            if self.df.ack:
                back = tuple(reversed(m.route))
                ack = ControlMessage("ACK", n, m.origin, payload_id=m.payload_id, route=back)
                self.send(n, back[1], ack)
        elif act.kind == "forward":
            self.transmit_data(n, act.next_hop, m)
        else:
            self.drop_data(m, act.reason)

    def transmit_data(self, n: int, nxt: int, m: ControlMessage) -> None:
        self.send(n, nxt, m)
        if self.df.ack and n != m.origin and self.hops_from(m.origin).get(n, math.inf) <= self.df.ack_k:
            self.overheard[m.origin].add((m.payload_id, n))

    def on_ack(self, n: int, sender: int, m: ControlMessage) -> None:
        if self.relay(n, m):
            self.acks[n].add(m.payload_id)

    def on_linkadv(self, n: int, sender: int, m: ControlMessage) -> None:
        key = (m.origin, m.broadcast_id)
        if key in self.adv_seen[n] or m.origin == n:
            return
        self.adv_seen[n].add(key)
        self.claims[n][m.origin] = m.claimed_links
        if m.position is not None:
            self.ptabs[n].update(m.origin, *m.position)
        self.adv_dirty.add(n)
        self.send(n, None, m)

    # -- timers and emission -------------------------------------------
    def advertise(self) -> None:
        for n in sorted(self.tables):
            if n in self.dead:
                continue
            self.adv_bid[n] += 1
            pos = self.topo.nodes[n].pos
            true_links = frozenset(pair(n, m) for m in self.adj[n])
            prof = self.attackers.get(n)
            if prof is not None and prof.kind == "linkspoof":
                msg = adversary.act_linkspoof(prof, true_links, pos, self.step, self.adv_bid[n])
                self.log("misbehave", "linkspoof", n)
            else:
                msg = ControlMessage("LINKADV", n, 0, broadcast_id=self.adv_bid[n], path=(n,),
                                     claimed_links=true_links, position=(pos[0], pos[1], self.step))
            self.claims[n][n] = msg.claimed_links
            self.ptabs[n].update(n, pos[0], pos[1], self.step)
            self.adv_seen[n].add((n, msg.broadcast_id))
            self.adv_dirty.add(n)
            self.send(n, None, msg)

    def recompute_mprs(self) -> None:
        for n in sorted(self.adv_dirty):
            usable: Set = set()
            for origin in sorted(self.claims[n]):
                claims = self.claims[n][origin]
                if self.df.linkcheck and origin != n:
                    ok, bad, unknown = sentinel.screen_claims(self.ptabs[n], claims)
                    if bad and (n, origin) not in self.spoof_accused:
                        self.spoof_accused.add((n, origin))
                        for c in sorted(bad):
                            self.log("verdict", "linkcheck", n, fmt_path(c), "flagged")
                        self.accuse("linkcheck", n, origin)
                    claims = ok | unknown
                usable |= claims
            usable |= {pair(n, m) for m in self.adj[n]}
            mprs = routing.select_mprs(self.adj[n], usable, n)
            if mprs != self.mprs.get(n):
                self.mprs[n] = mprs
                self.log("mpr", n, "-".join(map(str, sorted(mprs))) or "none")
        self.adv_dirty.clear()

    def run_timers(self) -> None:
        for n in sorted(self.confirms):
            for key, rrep in self.confirms[n].expired(self.step):
                self.log("verdict", "confirm", n, fmt_path(rrep.path), "timeout")
                self.accuse("confirm", n, rrep.responder)
        for (src, dst), disc in sorted(self.discoveries.items()):
            if disc.deadline > self.step:
                continue
            table = self.tables[src]
            if self.df.quorum and dst in table.pending:
                self.settle_quorum(src, disc)
            if dst in table.pending:
                table.pending.discard(dst)
                self.log("discovery_timeout", src, dst, disc.bid)
            del self.discoveries[(src, dst)]
        if self.df.ack:
            for n in sorted(self.watches):
                w = self.watches[n]
                if not w.pending:
                    continue
                for s in sorted(sentinel.ack_audit(w, self.overheard[n], self.acks[n], self.adj, self.step)):
                    self.accuse("ack", n, s)

    def settle_quorum(self, src: int, disc: Discovery) -> None:
        key = (disc.dst, disc.bid)
        verdict = sentinel.quorum_check(self.quorums[src], key)
        paths = [m.path for m in disc.rreps]
        good = set(sentinel.corroborated(paths)) if verdict == "safe" else set()
        for i, m in enumerate(disc.rreps):
            label = "safe" if i in good else ("unsafe" if verdict == "safe" else verdict)
            self.log("verdict", "quorum", src, fmt_path(m.path), label)
        table = self.tables[src]
        for i, m in enumerate(disc.rreps):
            if i in good:
                if routing.handle_rrep(table, m):
                    self.log("route", src, fmt_path(m.path))
            elif verdict == "safe" and m.responder != disc.dst:
                self.accuse("quorum", src, m.responder)
        if good:
            table.pending.discard(disc.dst)
        self.quorums[src].collected.pop(key, None)

    def flood(self) -> None:
        for n in sorted(self.flood_clock):
            if n in self.dead:
                continue
            msgs = adversary.act_flooding(self.attackers[n], self.flood_clock[n])
            if msgs:
                self.log("misbehave", "flooding", n)
            for m in msgs:
                self.send(n, None, m)

    def emit(self, emitting: bool) -> None:
        for fl in self.flows:
            src = fl.com.src
            if src in self.dead:
                continue
            if emitting:
                total = fl.carry + self.cfg.data_rate
                count = math.floor(total + 1e-9)
                fl.carry = total - count
                for _ in range(count):
                    pid = self.next_pid
                    self.next_pid += 1
                    self.pid_flow[pid] = fl.com.g
                    fl.buffer.append(pid)
                    self.log("data_sent", fl.com.g, pid)
            self.flush(fl)

    def current_route(self, fl: Flow) -> Optional[Tuple[int, ...]]:
        if self.cfg.routing == "proactive":
            return fl.active
        entry = self.tables[fl.com.src].routes.get(fl.com.dst)
        return entry.full_path if entry is not None else None

    def flush(self, fl: Flow) -> None:
        src, dst = fl.com.src, fl.com.dst
        route = self.current_route(fl)
        if route is None:
            if fl.buffer and self.cfg.routing == "reactive" and (src, dst) not in self.discoveries:
                self.discover(src, dst)
            return
        while fl.buffer:
            pid = fl.buffer.popleft()
            m = ControlMessage("DATA", src, dst, payload_id=pid, path=(src,), route=route, commodity=fl.com.g)
            if self.df.ack:
                self.watches[src].watch(pid, route, self.step + 2 * len(route) + 2)
            self.transmit_data(src, route[1], m)

    def discover(self, src: int, dst: int) -> None:
        table = self.tables[src]
        m = routing.originate_rreq(table, dst)
        wait = self.df.quorum_wait if self.df.quorum else self.cfg.discovery_timeout
        self.discoveries[(src, dst)] = Discovery(dst, m.broadcast_id, self.step + wait)
        self.log("discovery", src, dst, m.broadcast_id)
        self.send(src, None, m)

    def utilization(self) -> None:
        load: Dict[Tuple[int, int], float] = defaultdict(float)
        for fl in self.flows:
            route = self.current_route(fl)
            if route is None:
                continue
            for u, v in zip(route, route[1:]):
                load[pair(u, v)] += fl.com.demand
        if load:
            self.log("util", max(l / self.topo.capacity(*k) for k, l in sorted(load.items())))

    def tick(self) -> None:
        emitting = self.step < self.cfg.steps
        self.apply_failures()
        if any(s.speed > 0 for s in self.topo.nodes.values()):
            self.topo = step_mobility(self.topo, self.rng)
        self.refresh_adjacency()
        if self.cfg.routing == "proactive":
            self.check_proactive()
        inbox = self.deliver()
        for n in sorted(inbox):
            if n in self.dead:
                continue
            for sender, msg in inbox[n]:
                self.receive(n, sender, msg)
        if self.linkadv:
            self.recompute_mprs()
        self.run_timers()
        if emitting:
            if self.linkadv and self.step % self.cfg.adv_interval == 0:
                self.advertise()
            self.flood()
        self.emit(emitting)
        self.utilization()

    def finish(self) -> None:
        for sender, receiver, msg in self.outbox:
            if msg.kind == "DATA":
                self.drop_data(msg, "expired")
        self.outbox = []
        for fl in self.flows:
            while fl.buffer:
                pid = fl.buffer.popleft()
                self.log("data_dropped", fl.com.g, pid, "expired")

    def run(self) -> Tuple[MetricsReport, List[Event]]:
        self.start()
        total = self.cfg.steps + self.cfg.drain
        for s in range(total):
            self.step = s
            self.tick()
        self.finish()
        return compute_metrics(self.events), self.events


def fmt_path(path: Sequence[int]) -> str:
    return "-".join(str(p) for p in path)


def run(scenario, defenses: Optional[DefenseConfig] = None,
        seed: Optional[int] = None) -> Tuple[MetricsReport, List[Event]]:
    """Simulate a scenario; returns the metrics and the raw event log."""
    return World(scenario, defenses, seed).run()


def total_steps(events: Sequence[Event]) -> int:
    return max((ev[0] for ev in events), default=-1) + 1
