"""Parameter updates, measurements, and multi-user arbitration.

The update rule re-anchors to measured values: the CPU parameter becomes
alpha^delta times the measured CPU; the latency bound is multiplied by
beta on +1, retained on 0 (non-interfering: an unprompted update must
not shrink the feasible set), and re-anchored to measured latency / beta
on -1.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .allocator import SolveOutcome, solve
from .model import Allocation, Measurement, ServiceParams, Topology, User
from .intent import UpdateMarker


class DegenerateMeasurement(ValueError):
    """A zero measurement would force a parameter to zero."""


class StandingInfeasible(RuntimeError):
    """Arbitration requires a feasible standing configuration."""


@dataclass(frozen=True)
class UpdateRates:
    alpha: float  # CPU rate, > 1
    beta: float   # latency-bound rate, > 1

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 1):
            raise ValueError(f"alpha must be > 1, got {self.alpha}")
        if not (math.isfinite(self.beta) and self.beta > 1):
            raise ValueError(f"beta must be > 1, got {self.beta}")


@dataclass(frozen=True)
class ArbitrationResult:
    accept: tuple[bool, ...]
    params_after: dict[int, ServiceParams]
    outcome: SolveOutcome


def update_params(p: ServiceParams, marker: UpdateMarker,
                  meas: tuple[float, float], rates: UpdateRates) -> ServiceParams:
    """Apply one update marker against a measurement snapshot.

    meas is (actual_cpu in cores, actual_latency in ms).
    """
    actual_cpu, actual_latency = meas
    if actual_cpu < 0 or actual_latency < 0:
        raise ValueError("measurements must be nonnegative")

    cpu = rates.alpha ** marker.cpu * actual_cpu
    if cpu <= 0:
        raise DegenerateMeasurement(
            f"degenerate-measurement: actual CPU {actual_cpu} yields nonpositive parameter")

    if marker.latency_bound == +1:
        lb = rates.beta * p.latency_bound
    elif marker.latency_bound == 0:
        lb = p.latency_bound
    else:
        if actual_latency <= 0:
            raise DegenerateMeasurement(
                "degenerate-measurement: actual latency 0 with a reduce marker")
        lb = actual_latency / rates.beta
    return ServiceParams(cpu_param=cpu, latency_bound=lb)


def measure(t: Topology, users: list[User], params: dict[int, ServiceParams],
            a: Allocation) -> Measurement:
    """Measured values of the standing allocation.

    In this simulated network the assigned CPU equals the CPU parameter
    and the latency is the route's total link latency.
    """
    actual_cpu = {}
    actual_latency = {}
    for uid in a.placement:
        actual_cpu[uid] = params[uid].cpu_param
        actual_latency[uid] = sum(t.link(lid).latency for lid in a.routes[uid])
    return Measurement(actual_cpu=actual_cpu, actual_latency=actual_latency)


def apply_prompt_batch(params: dict[int, ServiceParams],
                       markers: list[tuple[int, UpdateMarker]],
                       meas: Measurement,
                       rates: UpdateRates) -> dict[int, ServiceParams]:
    """Fold the update rule over accumulated markers, in arrival order.

    The measurement snapshot is fixed for the whole batch: a second
    marker for the same user within one step sees the same actuals.
    """
    out = dict(params)
    for uid, marker in markers:
        snapshot = (meas.actual_cpu[uid], meas.actual_latency[uid])
        out[uid] = update_params(out[uid], marker, snapshot, rates)
    return out


def _subsets_by_preference(m: int):
    # Cardinality descending; within a cardinality, earlier-arriving
    # prompts preferred (combinations() is lexicographic on indices).
    for size in range(m, -1, -1):
        yield from itertools.combinations(range(m), size)


def _try_subset(t, users, params, prev_placement, w, meas, rates, prompts, subset):
    accepted = [prompts[i] for i in subset]
    new_params = apply_prompt_batch(params, accepted, meas, rates)
    outcome = solve(t, users, new_params, prev_placement, w)
    return new_params, outcome


def arbitrate(t: Topology, users: list[User], params: dict[int, ServiceParams],
              prev_placement: dict[int, int], w, meas: Measurement,
              rates: UpdateRates,
              prompts: list[tuple[int, UpdateMarker]]) -> ArbitrationResult:
    """Accept the largest feasible subset of this step's prompts.

    Searches acceptance vectors in preference order and stops at the
    first feasible one, which is maximal by construction. Requires the
    standing (no prompts applied) configuration to be feasible.
    """
    standing = solve(t, users, params, prev_placement, w)
    if not standing.optimal:
        raise StandingInfeasible("standing configuration infeasible")
    m = len(prompts)
    for subset in _subsets_by_preference(m):
        new_params, outcome = _try_subset(
            t, users, params, prev_placement, w, meas, rates, prompts, subset)
        if outcome.optimal:
            accept = tuple(i in subset for i in range(m))
            return ArbitrationResult(accept, new_params, outcome)
    raise AssertionError("unreachable: the empty subset is the standing solve")


def brute_force_arbitrate(t: Topology, users: list[User],
                          params: dict[int, ServiceParams],
                          prev_placement: dict[int, int], w, meas: Measurement,
                          rates: UpdateRates,
                          prompts: list[tuple[int, UpdateMarker]]) -> ArbitrationResult:
    """Oracle: scan all 2^M acceptance vectors, keep the preferred best."""
    m = len(prompts)
    if m > 16:
        raise ValueError(f"too many prompts for exhaustive arbitration: {m}")
    standing = solve(t, users, params, prev_placement, w)
    if not standing.optimal:
        raise StandingInfeasible("standing configuration infeasible")

    best = None  # (subset, params, outcome)
    for subset in itertools.chain.from_iterable(
            itertools.combinations(range(m), size) for size in range(m + 1)):
        new_params, outcome = _try_subset(
            t, users, params, prev_placement, w, meas, rates, prompts, subset)
        if not outcome.optimal:
            continue
        if best is None or len(subset) > len(best[0]):
            best = (subset, new_params, outcome)
        # equal size: keep the earlier one (lexicographically preferred)
    assert best is not None
    accept = tuple(i in best[0] for i in range(m))
    return ArbitrationResult(accept, best[1], best[2])
