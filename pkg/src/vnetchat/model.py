"""Core data model: network topology, users, service parameters, allocations.

All types are immutable after construction and safe to share between
threads. Units are fixed: bandwidth in Gbps, latency in ms, CPU in cores.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field


class TopologyError(ValueError):
    """Malformed or invalid topology/users document."""


@dataclass(frozen=True)
class Violation:
    rule: str
    entity: str
    detail: str = ""

    def __str__(self):
        return f"{self.rule}: {self.entity}" + (f" ({self.detail})" if self.detail else "")


@dataclass(frozen=True)
class Link:
    id: int
    src: int
    dst: int
    bandwidth: float  # Gbps
    latency: float    # ms


@dataclass(frozen=True)
class Datacenter:
    id: int
    router: int
    cpu_capacity: float  # cores


@dataclass(frozen=True)
class Topology:
    routers: frozenset[int]
    links: tuple[Link, ...]
    datacenters: tuple[Datacenter, ...]
    router_names: dict[int, str] = field(default_factory=dict, compare=False)

    def link(self, link_id: int) -> Link:
        for l in self.links:
            if l.id == link_id:
                return l
        raise KeyError(f"unknown link id {link_id}")

    def datacenter(self, dc_id: int) -> Datacenter:
        for d in self.datacenters:
            if d.id == dc_id:
                return d
        raise KeyError(f"unknown datacenter id {dc_id}")


@dataclass(frozen=True)
class User:
    id: int
    router: int
    traffic: float  # Gbps


@dataclass(frozen=True)
class ServiceParams:
    cpu_param: float       # cores, > 0
    latency_bound: float   # ms, > 0

    def __post_init__(self):
        if not (math.isfinite(self.cpu_param) and self.cpu_param > 0):
            raise ValueError(f"cpu_param must be finite and > 0, got {self.cpu_param}")
        if not (math.isfinite(self.latency_bound) and self.latency_bound > 0):
            raise ValueError(f"latency_bound must be finite and > 0, got {self.latency_bound}")


@dataclass(frozen=True)
class Weights:
    w1: float
    w2: float
    w3: float

    def __post_init__(self):
        vals = (self.w1, self.w2, self.w3)
        if any(not math.isfinite(w) or w < 0 for w in vals):
            raise ValueError("weights must be finite and nonnegative")
        if all(w == 0 for w in vals):
            raise ValueError("weights must not all be zero")


@dataclass(frozen=True)
class Allocation:
    """One-hot VM placement plus one ordered route per user.

    Routes are stored as ordered link-id lists so the simple-walk
    invariant is checkable; the indicator form is derivable.
    """
    placement: dict[int, int]          # user id -> dc id
    routes: dict[int, tuple[int, ...]]  # user id -> ordered link ids

    def __post_init__(self):
        if set(self.placement) != set(self.routes):
            raise ValueError("placement and routes must cover the same users")


@dataclass(frozen=True)
class Measurement:
    actual_cpu: dict[int, float]      # user id -> cores
    actual_latency: dict[int, float]  # user id -> ms


def validate_topology(t: Topology) -> list[Violation]:
    """Return all invariant violations; empty list means valid."""
    out: list[Violation] = []
    if not t.routers:
        out.append(Violation("no-routers", "topology"))
    if not t.datacenters:
        out.append(Violation("no-datacenters", "topology"))

    seen_links: set[int] = set()
    for l in t.links:
        if l.id in seen_links:
            out.append(Violation("duplicate-id", f"link {l.id}"))
        seen_links.add(l.id)
        if l.src == l.dst:
            out.append(Violation("self-loop", f"link {l.id}"))
        if l.src not in t.routers:
            out.append(Violation("dangling-router", f"link {l.id}", f"src {l.src}"))
        if l.dst not in t.routers:
            out.append(Violation("dangling-router", f"link {l.id}", f"dst {l.dst}"))
        if not (math.isfinite(l.bandwidth) and l.bandwidth > 0):
            out.append(Violation("nonpositive-bandwidth", f"link {l.id}"))
        if not (math.isfinite(l.latency) and l.latency > 0):
            out.append(Violation("nonpositive-latency", f"link {l.id}"))

    seen_dcs: set[int] = set()
    for d in t.datacenters:
        if d.id in seen_dcs:
            out.append(Violation("duplicate-id", f"datacenter {d.id}"))
        seen_dcs.add(d.id)
        if d.router not in t.routers:
            out.append(Violation("dangling-router", f"datacenter {d.id}", f"router {d.router}"))
        if not (math.isfinite(d.cpu_capacity) and d.cpu_capacity > 0):
            out.append(Violation("nonpositive-capacity", f"datacenter {d.id}"))
    return out


def incidence_entry(t: Topology, n: int, link_id: int) -> int:
    """+1 if router n is the source of the link, -1 if destination, else 0.

    Sign convention: flow counted positive leaving the source.
    """
    if n not in t.routers:
        raise KeyError(f"unknown router id {n}")
    l = t.link(link_id)
    if l.src == n:
        return +1
    if l.dst == n:
        return -1
    return 0


def _expand_links(raw_links: list[dict]) -> list[Link]:
    links: list[Link] = []
    used_ids = {int(e["id"]) for e in raw_links}
    next_id = (max(used_ids) if used_ids else 0) + 1
    for e in raw_links:
        lid = int(e["id"])
        bw = float(e["bandwidth_gbps"])
        lat = float(e["latency_ms"])
        links.append(Link(lid, int(e["src"]), int(e["dst"]), bw, lat))
        if e.get("bidirectional", False):
            links.append(Link(next_id, int(e["dst"]), int(e["src"]), bw, lat))
            next_id += 1
    return links


def load_topology(data: bytes | str) -> Topology:
    """Parse and validate a topology document (see README for the schema)."""
    try:
        doc = json.loads(data)
        routers = frozenset(int(r["id"]) for r in doc["routers"])
        names = {int(r["id"]): r["name"] for r in doc["routers"] if "name" in r}
        links = tuple(_expand_links(doc["links"]))
        dcs = tuple(
            Datacenter(int(d["id"]), int(d["router"]), float(d["cpu_capacity_cores"]))
            for d in doc["datacenters"]
        )
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise TopologyError(f"malformed topology document: {exc}") from exc
    t = Topology(routers=routers, links=links, datacenters=dcs, router_names=names)
    violations = validate_topology(t)
    if violations:
        raise TopologyError(
            "invalid topology: " + "; ".join(str(v) for v in violations)
        )
    return t


def serialize_topology(t: Topology) -> str:
    doc = {
        "routers": [
            {"id": r, **({"name": t.router_names[r]} if r in t.router_names else {})}
            for r in sorted(t.routers)
        ],
        "links": [
            {"id": l.id, "src": l.src, "dst": l.dst,
             "bandwidth_gbps": l.bandwidth, "latency_ms": l.latency}
            for l in t.links
        ],
        "datacenters": [
            {"id": d.id, "router": d.router, "cpu_capacity_cores": d.cpu_capacity}
            for d in t.datacenters
        ],
    }
    return json.dumps(doc, indent=2)


def load_users(data: bytes | str) -> tuple[list[User], dict[int, ServiceParams]]:
    """Parse a users document; returns users plus their initial parameters."""
    try:
        doc = json.loads(data)
        users = []
        params = {}
        for e in doc:
            u = User(int(e["id"]), int(e["router"]), float(e["traffic_gbps"]))
            users.append(u)
            params[u.id] = ServiceParams(
                cpu_param=float(e["initial_cpu_cores"]),
                latency_bound=float(e["initial_latency_bound_ms"]),
            )
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise TopologyError(f"malformed users document: {exc}") from exc
    ids = [u.id for u in users]
    if len(ids) != len(set(ids)):
        raise TopologyError("duplicate user ids")
    return users, params


def validate_users(t: Topology, users: list[User]) -> list[Violation]:
    out = []
    for u in users:
        if u.router not in t.routers:
            out.append(Violation("dangling-router", f"user {u.id}", f"router {u.router}"))
        if not math.isfinite(u.traffic) or u.traffic < 0:
            out.append(Violation("negative-traffic", f"user {u.id}"))
    return out


def route_latency(t: Topology, route: tuple[int, ...]) -> float:
    return sum(t.link(lid).latency for lid in route)


def check_route_chain(t: Topology, user: User, dc: Datacenter,
                      route: tuple[int, ...]) -> bool:
    """True iff the route links chain from the user's router to the DC router."""
    at = user.router
    seen = set()
    for lid in route:
        if lid in seen:
            return False
        seen.add(lid)
        l = t.link(lid)
        if l.src != at:
            return False
        at = l.dst
    return at == dc.router
