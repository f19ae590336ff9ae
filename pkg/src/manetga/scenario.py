"""Line-oriented scenario files.

Records, one per line, ``#`` starts a comment::

    param <dotted.key> <value>
    node <id> <x> <y> [speed]
    link <id1> <id2> <capacity>
    demand <g> <src> <dst> <bandwidth>
    attacker <id> flooding <rate> <fake_dst> [spoof_id]
    attacker <id> blackhole [delta] [accomplice]
    attacker <id> misrelay <partner> drop|modify
    attacker <id> linkspoof <target> <fake_neighbor>
    failure <id1> <id2> <step>      # link failure
    failure <id> <step>             # node failure

Any ``link`` record switches the topology to explicit adjacency; without
one, nodes within ``sim.range`` of each other are neighbours.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import Any, Dict, List, Optional, Tuple

from .adversary import AttackProfile
from .engine import DefenseConfig, Failure, SimConfig
from .gaopt import GaParams
from .netmodel import Commodity, LinkSpec, NodeState, Topology, pair


class ScenarioError(ValueError):
    def __init__(self, line: int, token: str, message: str):
        super().__init__(f"line {line}: {message} (at {token!r})")
        self.line = line
        self.token = token


@dataclass(frozen=True)
class Scenario:
    topology: Topology
    commodities: Tuple[Commodity, ...] = ()
    attackers: Tuple[AttackProfile, ...] = ()
    defense: DefenseConfig = field(default_factory=DefenseConfig)
    ga: GaParams = field(default_factory=GaParams)
    sim: SimConfig = field(default_factory=SimConfig)


# param key -> (section, field name)
PARAMS: Dict[str, Tuple[str, str]] = {
    "sim.steps": ("sim", "steps"),
    "sim.seed": ("sim", "seed"),
    "sim.data_rate": ("sim", "data_rate"),
    "sim.routing": ("sim", "routing"),
    "sim.drain": ("sim", "drain"),
    "sim.discovery_timeout": ("sim", "discovery_timeout"),
    "sim.linkadv": ("sim", "linkadv"),
    "sim.adv_interval": ("sim", "adv_interval"),
    "sim.optimize": ("sim", "optimize"),
    "cluster.c1": ("sim", "cluster_c1"),
    "cluster.c2": ("sim", "cluster_c2"),
    "sim.range": ("topo", "radio_range"),
    "sim.width": ("topo", "width"),
    "sim.height": ("topo", "height"),
    "sim.capacity": ("topo", "default_capacity"),
    "ga.pop": ("ga", "pop_size"),
    "ga.max_weight": ("ga", "max_weight"),
    "ga.a": ("ga", "a"),
    "ga.b": ("ga", "b"),
    "ga.c": ("ga", "c"),
    "ga.k_c": ("ga", "k_c"),
    "ga.k_m": ("ga", "k_m"),
    "ga.generations": ("ga", "generations"),
    "ga.elite": ("ga", "elite"),
    "ga.seed": ("ga", "seed"),
    "ga.stagnation": ("ga", "stagnation"),
    "defense.blacklist": ("defense", "blacklist"),
    "defense.window": ("defense", "window"),
    "defense.threshold": ("defense", "threshold"),
    "defense.confirm": ("defense", "confirm"),
    "defense.confirm_timeout": ("defense", "confirm_timeout"),
    "defense.quorum": ("defense", "quorum"),
    "defense.quorum_min": ("defense", "quorum_min"),
    "defense.quorum_wait": ("defense", "quorum_wait"),
    "defense.ack": ("defense", "ack"),
    "defense.ack_k": ("defense", "ack_k"),
    "defense.linkcheck": ("defense", "linkcheck"),
    "defense.slack": ("defense", "slack"),
}
ALIASES = {"ga.alpha": "ga.a", "ga.beta": "ga.b"}

_TRUE = {"1", "on", "true", "yes"}
_FALSE = {"0", "off", "false", "no"}


def _types() -> Dict[Tuple[str, str], Any]:
    out = {}
    defaults = {"sim": SimConfig(), "ga": GaParams(), "defense": DefenseConfig(), "topo": Topology({})}
    for section, obj in defaults.items():
        for f in fields(obj):
            out[(section, f.name)] = type(getattr(obj, f.name))
    return out


_FIELD_TYPES = _types()


def _convert(kind: type, text: str, line: int):
    try:
        if kind is bool:
            low = text.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError
        return kind(text)
    except ValueError:
        raise ScenarioError(line, text, f"expected {kind.__name__} value") from None


def _int(tok: str, line: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ScenarioError(line, tok, "expected an integer") from None


def _float(tok: str, line: int) -> float:
    try:
        return float(tok)
    except ValueError:
        raise ScenarioError(line, tok, "expected a number") from None


def _need(toks: List[str], lo: int, hi: int, line: int) -> None:
    if not lo <= len(toks) - 1 <= hi:
        want = str(lo) if lo == hi else f"{lo}-{hi}"
        raise ScenarioError(line, toks[0], f"{toks[0]} takes {want} arguments, got {len(toks) - 1}")


def parse_scenario(text: str) -> Scenario:
    settings: Dict[str, Dict[str, Any]] = {"sim": {}, "ga": {}, "defense": {}, "topo": {}}
    where: Dict[str, Tuple[int, str]] = {}
    nodes: Dict[int, NodeState] = {}
    links: Dict[Tuple[int, int], LinkSpec] = {}
    refs: List[Tuple[int, str, int]] = []  # (line, token, node id) checked after all nodes are known
    commodities: List[Commodity] = []
    attackers: List[Tuple[int, AttackProfile]] = []
    failures: List[Failure] = []
    failure_lines: List[int] = []
    seen_g: set = set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        toks = body.split()
        rec = toks[0]
        if rec == "param":
            _need(toks, 2, 2, lineno)
            key = ALIASES.get(toks[1], toks[1])
            if key not in PARAMS:
                raise ScenarioError(lineno, toks[1], "unknown parameter")
            section, name = PARAMS[key]
            settings[section][name] = _convert(_FIELD_TYPES[(section, name)], toks[2], lineno)
            where[section] = (lineno, toks[1])
        elif rec == "node":
            _need(toks, 3, 4, lineno)
            nid = _int(toks[1], lineno)
            if nid in nodes:
                raise ScenarioError(lineno, toks[1], "duplicate node id")
            speed = _float(toks[4], lineno) if len(toks) == 5 else 0.0
            try:
                nodes[nid] = NodeState(nid, (_float(toks[2], lineno), _float(toks[3], lineno)), speed=speed)
            except ValueError as exc:
                raise ScenarioError(lineno, toks[1], str(exc)) from None
        elif rec == "link":
            _need(toks, 3, 3, lineno)
            a, b = _int(toks[1], lineno), _int(toks[2], lineno)
            if a == b:
                raise ScenarioError(lineno, toks[2], "link endpoints must differ")
            if pair(a, b) in links:
                raise ScenarioError(lineno, toks[1], "duplicate link")
            cap = _float(toks[3], lineno)
            if cap <= 0:
                raise ScenarioError(lineno, toks[3], "capacity must be > 0")
            links[pair(a, b)] = LinkSpec((a, b), cap)
            refs += [(lineno, toks[1], a), (lineno, toks[2], b)]
        elif rec == "demand":
            _need(toks, 4, 4, lineno)
            g, src, dst = (_int(t, lineno) for t in toks[1:4])
            bw = _float(toks[4], lineno)
            if g in seen_g:
                raise ScenarioError(lineno, toks[1], "duplicate commodity id")
            try:
                commodities.append(Commodity(g, src, dst, bw))
            except ValueError as exc:
                raise ScenarioError(lineno, toks[1], str(exc)) from None
            seen_g.add(g)
            refs += [(lineno, toks[2], src), (lineno, toks[3], dst)]
        elif rec == "attacker":
            attackers.append((lineno, _parse_attacker(toks, lineno)))
        elif rec == "failure":
            _need(toks, 2, 3, lineno)
            if len(toks) == 3:
                f = Failure(_int(toks[1], lineno), None, _int(toks[2], lineno))
            else:
                a, b = _int(toks[1], lineno), _int(toks[2], lineno)
                if a == b:
                    raise ScenarioError(lineno, toks[2], "link endpoints must differ")
                f = Failure(a, b, _int(toks[3], lineno))
            failures.append(f)
            failure_lines.append(lineno)
        else:
            raise ScenarioError(lineno, rec, "unknown record kind")

    for lineno, tok, nid in refs:
        if nid not in nodes:
            raise ScenarioError(lineno, tok, f"unknown node {nid}")
    _check_attackers(attackers, nodes)
    for lineno, f in zip(failure_lines, failures):
        for end in (f.a, f.b):
            if end is not None and end not in nodes:
                raise ScenarioError(lineno, str(end), f"unknown node {end}")
        if f.b is not None and links and pair(f.a, f.b) not in links:
            raise ScenarioError(lineno, f"{f.a}-{f.b}", "failure names an undeclared link")

    def build(section, factory, **extra):
        try:
            return factory(**extra, **settings[section])
        except ValueError as exc:
            line, tok = where.get(section, (1, section))
            raise ScenarioError(line, tok, str(exc)) from None

    topo = build("topo", Topology, nodes=nodes, links=links, explicit=bool(links))
    sim = build("sim", SimConfig, failures=tuple(failures))
    settings["ga"].setdefault("seed", sim.seed)
    ga = build("ga", GaParams)
    defense = build("defense", DefenseConfig)
    return Scenario(topo, tuple(commodities), tuple(p for _, p in attackers), defense, ga, sim)


def _parse_attacker(toks: List[str], line: int) -> AttackProfile:
    if len(toks) < 3:
        raise ScenarioError(line, toks[0], "attacker needs an id and a kind")
    nid, kind, args = _int(toks[1], line), toks[2], toks[3:]
    try:
        if kind == "flooding":
            if not 2 <= len(args) <= 3:
                raise ScenarioError(line, kind, "flooding takes <rate> <fake_dst> [spoof_id]")
            spoof = _int(args[2], line) if len(args) == 3 else None
            return AttackProfile(nid, kind, rate=_float(args[0], line), fake_dst=_int(args[1], line), spoof_id=spoof)
        if kind == "blackhole":
            if len(args) > 2:
                raise ScenarioError(line, kind, "blackhole takes [delta] [accomplice]")
            delta = _int(args[0], line) if args else 1
            acc = _int(args[1], line) if len(args) == 2 else None
            return AttackProfile(nid, kind, delta=delta, accomplice=acc)
        if kind == "misrelay":
            if len(args) != 2:
                raise ScenarioError(line, kind, "misrelay takes <partner> drop|modify")
            return AttackProfile(nid, kind, partner=_int(args[0], line), mode=args[1])
        if kind == "linkspoof":
            if len(args) != 2:
                raise ScenarioError(line, kind, "linkspoof takes <target> <fake_neighbor>")
            return AttackProfile(nid, kind, target=_int(args[0], line), fake_neighbor=_int(args[1], line))
    except ValueError as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(line, kind, str(exc)) from None
    raise ScenarioError(line, kind, "unknown attack kind")


def _check_attackers(attackers: List[Tuple[int, AttackProfile]], nodes: Dict[int, NodeState]) -> None:
    seen = set()
    for line, p in attackers:
        if p.node not in nodes:
            raise ScenarioError(line, str(p.node), f"unknown node {p.node}")
        if p.node in seen:
            raise ScenarioError(line, str(p.node), "node already has an attack profile")
        seen.add(p.node)
        if p.kind == "flooding":
            if p.fake_dst in nodes:
                raise ScenarioError(line, str(p.fake_dst), "flooding fake_dst must not be a real node")
            if p.spoof_id is not None and p.spoof_id not in nodes:
                raise ScenarioError(line, str(p.spoof_id), f"unknown node {p.spoof_id}")
        refs = {"blackhole": [p.accomplice], "misrelay": [p.partner],
                "linkspoof": [p.target, p.fake_neighbor]}.get(p.kind, [])
        for r in refs:
            if r is not None and r not in nodes:
                raise ScenarioError(line, str(r), f"unknown node {r}")


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    return repr(v) if isinstance(v, float) else str(v)


def render(sc: Scenario) -> str:
    """Canonical text form; ``parse_scenario(render(sc)) == sc``."""
    objs = {"sim": sc.sim, "ga": sc.ga, "defense": sc.defense, "topo": sc.topology}
    lines = []
    for key in sorted(PARAMS):
        section, name = PARAMS[key]
        lines.append(f"param {key} {_fmt(getattr(objs[section], name))}")
    for nid in sorted(sc.topology.nodes):
        n = sc.topology.nodes[nid]
        lines.append(f"node {nid} {_fmt(n.pos[0])} {_fmt(n.pos[1])} {_fmt(float(n.speed))}")
    for (a, b), link in sorted(sc.topology.links.items()):
        lines.append(f"link {a} {b} {_fmt(float(link.capacity))}")
    for c in sc.commodities:
        lines.append(f"demand {c.g} {c.src} {c.dst} {_fmt(float(c.demand))}")
    for p in sc.attackers:
        if p.kind == "flooding":
            tail = f"{_fmt(float(p.rate))} {p.fake_dst}" + (f" {p.spoof_id}" if p.spoof_id is not None else "")
        elif p.kind == "blackhole":
            tail = f"{p.delta}" + (f" {p.accomplice}" if p.accomplice is not None else "")
        elif p.kind == "misrelay":
            tail = f"{p.partner} {p.mode}"
        else:
            tail = f"{p.target} {p.fake_neighbor}"
        lines.append(f"attacker {p.node} {p.kind} {tail}")
    for f in sc.sim.failures:
        lines.append(f"failure {f.a} {f.step}" if f.b is None else f"failure {f.a} {f.b} {f.step}")
    return "\n".join(lines) + "\n"


def load(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())


def with_seed(sc: Scenario, seed: int) -> Scenario:
    return replace(sc, sim=replace(sc.sim, seed=seed), ga=replace(sc.ga, seed=seed))
