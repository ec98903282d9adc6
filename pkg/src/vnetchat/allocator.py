"""Exact solver for the VM placement and routing problem.

Minimizes w1*J1 + w2*J2 + w3*J3 where J1 is peak link usage, J2 total
route latency, and J3 placement churn against the previous step, subject
to link-congestion, DC CPU-capacity, per-user latency-bound, one-VM and
route-connectivity constraints.

`solve` is branch and bound over per-user (dc, path) candidates;
`brute_force_solve` exhaustively enumerates the same candidate space and
serves as the test oracle. Both use the same deterministic tie-break:
lexicographic by (user id, assigned DC id, path rank).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .model import Allocation, ServiceParams, Topology, User

FEAS_TOL = 1e-9   # absolute tolerance on Gbps/ms/cores comparisons
OBJ_TOL = 1e-12   # strict-improvement threshold inside the search


@dataclass(frozen=True)
class CandidatePath:
    user: int
    dc: int
    links: tuple[int, ...]
    total_latency: float


@dataclass(frozen=True)
class SolveOutcome:
    status: str                      # "Optimal" | "Infeasible"
    allocation: Allocation | None
    objective: float
    terms: tuple[float, float, float]  # (J1, J2, J3)

    @property
    def optimal(self) -> bool:
        return self.status == "Optimal"


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    violated: list[tuple[str, str, float, float]]


class InstanceTooLarge(ValueError):
    pass


def enumerate_paths(t: Topology, src: int, dst: int,
                    latency_cap: float) -> list[CandidatePath]:
    """All simple directed paths src -> dst with total latency <= cap.

    Sorted by (total_latency, link-id sequence). Includes the empty path
    iff src == dst.
    """
    if src not in t.routers or dst not in t.routers:
        raise KeyError(f"unknown router {src if src not in t.routers else dst}")
    out_links: dict[int, list] = {r: [] for r in t.routers}
    for l in t.links:
        out_links[l.src].append(l)
    for ls in out_links.values():
        ls.sort(key=lambda l: l.id)

    found: list[tuple[float, tuple[int, ...]]] = []

    def dfs(at: int, visited: set[int], links: list[int], latency: float):
        if at == dst:
            found.append((latency, tuple(links)))
            return
        for l in out_links[at]:
            if l.dst in visited:
                continue
            nl = latency + l.latency
            if nl > latency_cap + FEAS_TOL:
                continue
            visited.add(l.dst)
            links.append(l.id)
            dfs(l.dst, visited, links, nl)
            links.pop()
            visited.discard(l.dst)

    dfs(src, {src}, [], 0.0)
    found.sort(key=lambda p: (p[0], p[1]))
    return [CandidatePath(user=-1, dc=-1, links=links, total_latency=lat)
            for lat, links in found]


def _placement_churn(user_id: int, dc: int, prev_placement: dict[int, int]) -> int:
    # One-hot row distance: 0 if unchanged, 2 if moved, 1 against the
    # all-zeros row used before the first step.
    if user_id not in prev_placement:
        return 1
    return 0 if prev_placement[user_id] == dc else 2


def objective_terms(t: Topology, users: list[User], a: Allocation,
                    prev_placement: dict[int, int]) -> tuple[float, float, float]:
    """(J1 peak link usage, J2 total latency in ms, J3 placement churn)."""
    by_id = {u.id: u for u in users}
    load: dict[int, float] = {}
    j2 = 0.0
    j3 = 0
    for uid, route in a.routes.items():
        u = by_id[uid]
        for lid in route:
            load[lid] = load.get(lid, 0.0) + u.traffic
            j2 += t.link(lid).latency
    j1 = max((load.get(l.id, 0.0) / l.bandwidth for l in t.links), default=0.0)
    for uid, dc in a.placement.items():
        j3 += _placement_churn(uid, dc, prev_placement)
    return j1, j2, float(j3)


def check_feasibility(t: Topology, users: list[User],
                      params: dict[int, ServiceParams],
                      a: Allocation) -> FeasibilityReport:
    """Check every constraint of the allocation problem on a candidate."""
    by_id = {u.id: u for u in users}
    violated: list[tuple[str, str, float, float]] = []

    load: dict[int, float] = {}
    for uid, route in a.routes.items():
        for lid in route:
            load[lid] = load.get(lid, 0.0) + by_id[uid].traffic
    for l in t.links:
        used = load.get(l.id, 0.0)
        if used > l.bandwidth + FEAS_TOL:
            violated.append(("congestion", f"link {l.id}", used, l.bandwidth))

    for d in t.datacenters:
        demand = sum(params[uid].cpu_param for uid, dc in a.placement.items() if dc == d.id)
        if demand > d.cpu_capacity + FEAS_TOL:
            violated.append(("cpu-capacity", f"datacenter {d.id}", demand, d.cpu_capacity))

    for uid, route in a.routes.items():
        lat = sum(t.link(lid).latency for lid in route)
        bound = params[uid].latency_bound
        if lat > bound + FEAS_TOL:
            violated.append(("latency-bound", f"user {uid}", lat, bound))

    for u in users:
        if u.id not in a.placement:
            violated.append(("one-vm", f"user {u.id}", 0.0, 1.0))

    # Flow conservation in coupled form: net outflow at n equals
    # [n = user router] - [n hosts the assigned DC].
    for uid, route in a.routes.items():
        u = by_id[uid]
        dc = t.datacenter(a.placement[uid])
        at = u.router
        ok = True
        seen: set[int] = set()
        for lid in route:
            if lid in seen:
                ok = False
                break
            seen.add(lid)
            l = t.link(lid)
            if l.src != at:
                ok = False
                break
            at = l.dst
        if not ok or at != dc.router:
            violated.append(("route-connectivity", f"user {uid}", 0.0, 1.0))

    return FeasibilityReport(feasible=not violated, violated=violated)


def _candidates(t: Topology, user: User, p: ServiceParams) -> list[CandidatePath]:
    """Per-user (dc, path) candidates in tie-break order (dc id, path rank)."""
    cands: list[CandidatePath] = []
    for d in sorted(t.datacenters, key=lambda d: d.id):
        for path in enumerate_paths(t, user.router, d.router, p.latency_bound):
            cands.append(CandidatePath(user=user.id, dc=d.id,
                                       links=path.links,
                                       total_latency=path.total_latency))
    return cands


def _evaluate(t, users, choice, prev_placement, w):
    a = Allocation(placement={u.id: c.dc for u, c in zip(users, choice)},
                   routes={u.id: c.links for u, c in zip(users, choice)})
    j1, j2, j3 = objective_terms(t, users, a, prev_placement)
    return a, w.w1 * j1 + w.w2 * j2 + w.w3 * j3, (j1, j2, j3)


_INFEASIBLE = SolveOutcome("Infeasible", None, float("inf"), (0.0, 0.0, 0.0))


def solve(t: Topology, users: list[User], params: dict[int, ServiceParams],
          prev_placement: dict[int, int], w) -> SolveOutcome:
    """Exact branch and bound over per-user candidates, in user-id order.

    Depth-first in tie-break order with best-only-on-strict-improvement,
    so the first optimum found is the lexicographic minimum.
    """
    users = sorted(users, key=lambda u: u.id)
    if not users:
        return SolveOutcome("Optimal", Allocation({}, {}), 0.0, (0.0, 0.0, 0.0))

    cand_lists = [_candidates(t, u, params[u.id]) for u in users]
    if any(not cl for cl in cand_lists):
        return _INFEASIBLE

    cap = {d.id: d.cpu_capacity for d in t.datacenters}
    bw = {l.id: l.bandwidth for l in t.links}

    best_obj = float("inf")
    best: SolveOutcome | None = None

    load: dict[int, float] = {}
    dc_used: dict[int, float] = {}
    choice: list[CandidatePath] = []

    def bound(acc_j2: float, acc_j3: float) -> float:
        j1_lb = max((v / bw[lid] for lid, v in load.items()), default=0.0)
        return w.w1 * j1_lb + w.w2 * acc_j2 + w.w3 * acc_j3

    def dfs(i: int, acc_j2: float, acc_j3: float):
        nonlocal best_obj, best
        if bound(acc_j2, acc_j3) >= best_obj - OBJ_TOL:
            return
        if i == len(users):
            a, obj, terms = _evaluate(t, users, choice, prev_placement, w)
            if obj < best_obj - OBJ_TOL:
                best_obj = obj
                best = SolveOutcome("Optimal", a, obj, terms)
            return
        u = users[i]
        for c in cand_lists[i]:
            if dc_used.get(c.dc, 0.0) + params[u.id].cpu_param > cap[c.dc] + FEAS_TOL:
                continue
            if any(load.get(lid, 0.0) + u.traffic > bw[lid] + FEAS_TOL
                   for lid in c.links):
                continue
            dc_used[c.dc] = dc_used.get(c.dc, 0.0) + params[u.id].cpu_param
            for lid in c.links:
                load[lid] = load.get(lid, 0.0) + u.traffic
            choice.append(c)
            dfs(i + 1,
                acc_j2 + c.total_latency,
                acc_j3 + _placement_churn(u.id, c.dc, prev_placement))
            choice.pop()
            for lid in c.links:
                load[lid] -= u.traffic
            dc_used[c.dc] -= params[u.id].cpu_param

    dfs(0, 0.0, 0.0)
    return best if best is not None else _INFEASIBLE


def brute_force_solve(t: Topology, users: list[User],
                      params: dict[int, ServiceParams],
                      prev_placement: dict[int, int], w,
                      guard: int = 10**7) -> SolveOutcome:
    """Exhaustive oracle over the full cross product of candidates."""
    users = sorted(users, key=lambda u: u.id)
    if not users:
        return SolveOutcome("Optimal", Allocation({}, {}), 0.0, (0.0, 0.0, 0.0))
    cand_lists = [_candidates(t, u, params[u.id]) for u in users]
    if any(not cl for cl in cand_lists):
        return _INFEASIBLE
    size = 1
    for cl in cand_lists:
        size *= len(cl)
        if size > guard:
            raise InstanceTooLarge(f"candidate product exceeds {guard}")

    best: SolveOutcome | None = None
    for choice in itertools.product(*cand_lists):
        a, obj, terms = _evaluate(t, users, list(choice), prev_placement, w)
        if not check_feasibility(t, users, params, a).feasible:
            continue
        if best is None or obj < best.objective - OBJ_TOL:
            best = SolveOutcome("Optimal", a, obj, terms)
    return best if best is not None else _INFEASIBLE
