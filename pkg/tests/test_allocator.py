import math

import pytest

from conftest import DEFAULT_WEIGHTS, make_topology, random_instance
from vnetchat.allocator import (InstanceTooLarge, brute_force_solve,
                                check_feasibility, enumerate_paths,
                                objective_terms, solve)
from vnetchat.model import Allocation, ServiceParams, User, Weights


def _single_user_alloc(dc=1, route=(1,)):
    return Allocation(placement={1: dc}, routes={1: route})


class TestObjectiveTerms:
    def test_single_user_direct_substitution(self, two_router):
        users = [User(1, 1, 0.5)]
        a = _single_user_alloc()
        j1, j2, j3 = objective_terms(two_router, users, a, {1: 1})
        assert (j1, j2, j3) == (0.5, 1.0, 0.0)

    def test_first_step_churn_against_zero_placement(self, two_router):
        users = [User(1, 1, 0.5)]
        j1, j2, j3 = objective_terms(two_router, users, _single_user_alloc(), {})
        assert j3 == 1.0

    def test_shared_link_usage_sums(self, two_router):
        users = [User(1, 1, 0.5), User(2, 1, 0.5)]
        a = Allocation(placement={1: 1, 2: 1}, routes={1: (1,), 2: (1,)})
        j1, _, _ = objective_terms(two_router, users, a, {})
        assert j1 == 1.0

    def test_moved_user_counts_two(self, two_router):
        users = [User(1, 1, 0.5)]
        t = make_topology([1, 2], [(1, 1, 2, 1.0, 1.0)],
                          [(1, 2, 4.0), (2, 2, 4.0)])
        _, _, j3 = objective_terms(t, users, _single_user_alloc(dc=2), {1: 1})
        assert j3 == 2.0


class TestCheckFeasibility:
    def test_latency_within_bound(self, two_router):
        users = [User(1, 1, 0.5)]
        params = {1: ServiceParams(2.0, 3.0)}
        report = check_feasibility(two_router, users, params, _single_user_alloc())
        assert report.feasible

    def test_cpu_capacity_violation(self):
        t = make_topology([1], [], [(1, 1, 3.0)])
        users = [User(1, 1, 0.0), User(2, 1, 0.0)]
        params = {1: ServiceParams(2.0, 1.0), 2: ServiceParams(2.0, 1.0)}
        a = Allocation(placement={1: 1, 2: 1}, routes={1: (), 2: ()})
        report = check_feasibility(t, users, params, a)
        assert report.violated == [("cpu-capacity", "datacenter 1", 4.0, 3.0)]

    def test_congestion_violation(self, two_router):
        users = [User(1, 1, 0.6), User(2, 1, 0.5)]
        params = {1: ServiceParams(1.0, 3.0), 2: ServiceParams(1.0, 3.0)}
        a = Allocation(placement={1: 1, 2: 1}, routes={1: (1,), 2: (1,)})
        report = check_feasibility(two_router, users, params, a)
        assert ("congestion", "link 1", 1.1, 1.0) in report.violated

    def test_broken_route_chain(self, two_router):
        users = [User(1, 1, 0.5)]
        params = {1: ServiceParams(1.0, 3.0)}
        a = Allocation(placement={1: 1}, routes={1: ()})
        report = check_feasibility(two_router, users, params, a)
        assert any(v[0] == "route-connectivity" for v in report.violated)


class TestEnumeratePaths:
    def test_same_router_gives_empty_path(self, two_router):
        paths = enumerate_paths(two_router, 2, 2, 5.0)
        assert len(paths) == 1
        assert paths[0].links == () and paths[0].total_latency == 0.0

    def test_line_graph_unique_path(self):
        t = make_topology([1, 2, 3],
                          [(1, 1, 2, 1.0, 1.0), (2, 2, 3, 1.0, 1.0)],
                          [(1, 3, 4.0)])
        paths = enumerate_paths(t, 1, 3, 2.0)
        assert [p.links for p in paths] == [(1, 2)]
        assert paths[0].total_latency == 2.0

    def test_diamond_pruned_by_cap(self, diamond):
        assert enumerate_paths(diamond, 1, 4, 1.5) == []
        both = enumerate_paths(diamond, 1, 4, 2.0)
        assert [p.links for p in both] == [(1, 2), (3, 4)]

    def test_unreachable_gives_empty(self):
        t = make_topology([1, 2], [(1, 2, 1, 1.0, 1.0)], [(1, 2, 4.0)])
        assert enumerate_paths(t, 1, 2, 10.0) == []


class TestSolve:
    def test_two_router_unique_optimum(self, two_router):
        users = [User(1, 1, 0.5)]
        params = {1: ServiceParams(2.0, 3.0)}
        out = solve(two_router, users, params, {1: 1}, DEFAULT_WEIGHTS)
        assert out.status == "Optimal"
        assert out.allocation.placement == {1: 1}
        assert out.allocation.routes == {1: (1,)}
        assert math.isclose(out.objective, 0.51, abs_tol=1e-12)

    def test_unreachable_latency_bound_infeasible(self, two_router):
        users = [User(1, 1, 0.5)]
        params = {1: ServiceParams(2.0, 0.5)}
        out = solve(two_router, users, params, {1: 1}, DEFAULT_WEIGHTS)
        assert out.status == "Infeasible"
        assert out.allocation is None

    def test_empty_user_list(self, two_router):
        out = solve(two_router, [], {}, {}, DEFAULT_WEIGHTS)
        assert out.status == "Optimal"
        assert out.objective == 0.0

    def test_objective_matches_recomputed_terms(self, two_router):
        users = [User(1, 1, 0.5)]
        params = {1: ServiceParams(2.0, 3.0)}
        out = solve(two_router, users, params, {}, DEFAULT_WEIGHTS)
        j1, j2, j3 = objective_terms(two_router, users, out.allocation, {})
        assert out.terms == (j1, j2, j3)
        recomputed = 1.0 * j1 + 0.01 * j2 + 0.05 * j3
        assert math.isclose(out.objective, recomputed, abs_tol=1e-12)


class TestBruteForceOracle:
    def test_matches_on_two_router(self, two_router):
        users = [User(1, 1, 0.5)]
        params = {1: ServiceParams(2.0, 3.0)}
        a = solve(two_router, users, params, {1: 1}, DEFAULT_WEIGHTS)
        b = brute_force_solve(two_router, users, params, {1: 1}, DEFAULT_WEIGHTS)
        assert (a.status, a.allocation) == (b.status, b.allocation)

    def test_infeasible_agreement(self, two_router):
        users = [User(1, 1, 0.5)]
        params = {1: ServiceParams(2.0, 0.5)}
        b = brute_force_solve(two_router, users, params, {1: 1}, DEFAULT_WEIGHTS)
        assert b.status == "Infeasible"

    def test_guard_rejects_large_products(self, two_router):
        users = [User(1, 1, 0.5)]
        params = {1: ServiceParams(2.0, 3.0)}
        with pytest.raises(InstanceTooLarge):
            brute_force_solve(two_router, users, params, {}, DEFAULT_WEIGHTS,
                              guard=0)

    @pytest.mark.parametrize("seed", range(40))
    def test_random_instances_agree(self, seed):
        t, users, params, prev, w = random_instance(seed)
        a = solve(t, users, params, prev, w)
        b = brute_force_solve(t, users, params, prev, w)
        assert a.status == b.status
        if a.status == "Optimal":
            assert abs(a.objective - b.objective) <= 1e-9
            assert a.allocation == b.allocation


def test_optimal_outcomes_pass_feasibility():
    for seed in range(30):
        t, users, params, prev, w = random_instance(seed + 1000)
        out = solve(t, users, params, prev, w)
        if out.status == "Optimal":
            assert check_feasibility(t, users, params, out.allocation).feasible


def test_determinism():
    for seed in range(20):
        t, users, params, prev, w = random_instance(seed + 2000)
        a = solve(t, users, params, prev, w)
        b = solve(t, users, params, prev, w)
        assert a == b


def test_uniform_weight_scaling():
    for seed in range(20):
        t, users, params, prev, w = random_instance(seed + 3000)
        out = solve(t, users, params, prev, w)
        scaled = solve(t, users, params, prev,
                       Weights(3.0 * w.w1, 3.0 * w.w2, 3.0 * w.w3))
        assert out.status == scaled.status
        if out.status == "Optimal":
            assert out.allocation == scaled.allocation
            assert math.isclose(scaled.objective, 3.0 * out.objective,
                                rel_tol=1e-9, abs_tol=1e-9)
