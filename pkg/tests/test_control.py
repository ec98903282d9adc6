import math
import random

import pytest

from conftest import DEFAULT_WEIGHTS, make_topology
from vnetchat.allocator import solve
from vnetchat.control import (DegenerateMeasurement, StandingInfeasible,
                              UpdateRates, apply_prompt_batch, arbitrate,
                              brute_force_arbitrate, measure, update_params)
from vnetchat.intent import UpdateMarker
from vnetchat.model import (Allocation, Measurement, ServiceParams, User)

RATES = UpdateRates(alpha=2.0, beta=1.5)


class TestUpdateRates:
    def test_rates_must_exceed_one(self):
        with pytest.raises(ValueError):
            UpdateRates(1.0, 1.5)
        with pytest.raises(ValueError):
            UpdateRates(2.0, 0.9)


class TestUpdateParams:
    def test_latency_reduce_reanchors_to_actual(self):
        p = ServiceParams(1.0, 3.0)
        out = update_params(p, UpdateMarker(0, -1), (1.0, 2.0), RATES)
        assert math.isclose(out.latency_bound, 2.0 / 1.5, abs_tol=1e-12)

    def test_cpu_increase_doubles_actual(self):
        p = ServiceParams(1.0, 1.3333333333333333)
        out = update_params(p, UpdateMarker(1, 0), (1.0, 1.0), RATES)
        assert out.cpu_param == 2.0

    def test_no_change_is_identity(self):
        p = ServiceParams(1.5, 2.5)
        out = update_params(p, UpdateMarker(0, 0), (1.5, 7.0), RATES)
        assert out == p

    def test_latency_ease_scales_parameter_not_actual(self):
        # non-interfering on 0 and parameter-anchored on +1
        p = ServiceParams(1.0, 2.0)
        out = update_params(p, UpdateMarker(0, 1), (1.0, 0.5), RATES)
        assert out.latency_bound == 3.0

    def test_degenerate_latency_measurement(self):
        p = ServiceParams(1.0, 2.0)
        with pytest.raises(DegenerateMeasurement, match="degenerate-measurement"):
            update_params(p, UpdateMarker(0, -1), (1.0, 0.0), RATES)

    def test_negative_measurement_rejected(self):
        with pytest.raises(ValueError):
            update_params(ServiceParams(1, 1), UpdateMarker(0, 0), (-1.0, 1.0), RATES)

    def test_outputs_stay_positive(self):
        rng = random.Random(7)
        for _ in range(200):
            p = ServiceParams(rng.uniform(0.1, 5), rng.uniform(0.1, 5))
            marker = UpdateMarker(rng.choice([-1, 0, 1]), rng.choice([-1, 0, 1]))
            meas = (rng.uniform(0.01, 5), rng.uniform(0.01, 5))
            out = update_params(p, marker, meas, RATES)
            assert out.cpu_param > 0 and out.latency_bound > 0

    def test_ease_then_reduce_reanchors_regardless(self):
        p = ServiceParams(1.0, 2.0)
        eased = update_params(p, UpdateMarker(0, 1), (1.0, 1.7), RATES)
        reduced = update_params(eased, UpdateMarker(0, -1), (1.0, 1.7), RATES)
        assert math.isclose(reduced.latency_bound, 1.7 / 1.5, abs_tol=1e-12)


class TestMeasure:
    def test_route_latency_and_cpu(self, diamond):
        users = [User(1, 1, 0.5)]
        params = {1: ServiceParams(2.0, 3.0)}
        a = Allocation(placement={1: 1}, routes={1: (1, 2)})
        m = measure(diamond, users, params, a)
        assert m.actual_latency == {1: 2.0}
        assert m.actual_cpu == {1: 2.0}

    def test_colocated_empty_route(self):
        t = make_topology([1], [], [(1, 1, 4.0)])
        users = [User(1, 1, 0.0)]
        a = Allocation(placement={1: 1}, routes={1: ()})
        m = measure(t, users, {1: ServiceParams(1.0, 1.0)}, a)
        assert m.actual_latency == {1: 0.0}


class TestApplyPromptBatch:
    MEAS = Measurement(actual_cpu={1: 1.0, 2: 3.0},
                       actual_latency={1: 2.0, 2: 2.0})

    def test_distinct_users_independent(self):
        params = {1: ServiceParams(1.0, 3.0), 2: ServiceParams(3.0, 3.0)}
        out = apply_prompt_batch(params,
                                 [(1, UpdateMarker(1, 0)), (2, UpdateMarker(-1, 0))],
                                 self.MEAS, RATES)
        assert out[1].cpu_param == 2.0
        assert out[2].cpu_param == 1.5

    def test_same_user_folds_over_fixed_snapshot(self):
        # golden: the second fold re-reads the same snapshot, so two +1
        # markers still land on alpha * actual = 2.0
        params = {1: ServiceParams(1.0, 3.0), 2: ServiceParams(3.0, 3.0)}
        out = apply_prompt_batch(params,
                                 [(1, UpdateMarker(1, 0)), (1, UpdateMarker(1, 0))],
                                 self.MEAS, RATES)
        assert out[1].cpu_param == 2.0

    def test_empty_batch_is_identity(self):
        params = {1: ServiceParams(1.0, 3.0)}
        assert apply_prompt_batch(params, [], self.MEAS, RATES) == params


def _conflict_instance():
    """Two users colocated with a DC of capacity 3; each +1 prompt alone
    fits, both together do not."""
    t = make_topology([1, 2], [(1, 1, 2, 1.0, 1.0)], [(1, 2, 3.0)])
    users = [User(1, 2, 0.0), User(2, 2, 0.0)]
    params = {1: ServiceParams(1.0, 1.0), 2: ServiceParams(1.0, 1.0)}
    a = Allocation(placement={1: 1, 2: 1}, routes={1: (), 2: ()})
    meas = measure(t, users, params, a)
    prompts = [(1, UpdateMarker(1, 0)), (2, UpdateMarker(1, 0))]
    return t, users, params, {1: 1, 2: 1}, meas, prompts


class TestArbitrate:
    def test_jointly_feasible_accepts_all(self):
        t, users, params, prev, meas, _ = _conflict_instance()
        prompts = [(1, UpdateMarker(-1, 0)), (2, UpdateMarker(0, 0))]
        res = arbitrate(t, users, params, prev, DEFAULT_WEIGHTS, meas, RATES, prompts)
        assert res.accept == (True, True)
        assert res.outcome.status == "Optimal"

    def test_conflict_prefers_earlier_prompt(self):
        t, users, params, prev, meas, prompts = _conflict_instance()
        res = arbitrate(t, users, params, prev, DEFAULT_WEIGHTS, meas, RATES, prompts)
        assert res.accept == (True, False)
        assert res.params_after[1].cpu_param == 2.0
        assert res.params_after[2].cpu_param == 1.0  # rejected: untouched

    def test_standing_infeasible_rejected(self):
        t, users, params, prev, meas, prompts = _conflict_instance()
        bad = {1: ServiceParams(5.0, 1.0), 2: ServiceParams(1.0, 1.0)}
        with pytest.raises(StandingInfeasible):
            arbitrate(t, users, bad, prev, DEFAULT_WEIGHTS, meas, RATES, prompts)

    def test_empty_prompts_standing_outcome(self):
        t, users, params, prev, meas, _ = _conflict_instance()
        res = brute_force_arbitrate(t, users, params, prev, DEFAULT_WEIGHTS,
                                    meas, RATES, [])
        assert res.accept == ()
        assert res.outcome.status == "Optimal"

    def test_too_many_prompts_for_oracle(self):
        t, users, params, prev, meas, _ = _conflict_instance()
        prompts = [(1, UpdateMarker(0, 0))] * 17
        with pytest.raises(ValueError):
            brute_force_arbitrate(t, users, params, prev, DEFAULT_WEIGHTS,
                                  meas, RATES, prompts)

    def test_matches_oracle_on_random_instances(self):
        rng = random.Random(11)
        t, users, params, prev, meas, _ = _conflict_instance()
        markers = [UpdateMarker(c, 0) for c in (-1, 0, 1)]
        for _ in range(60):
            m = rng.randint(0, 4)
            prompts = [(rng.choice([1, 2]), rng.choice(markers)) for _ in range(m)]
            a = arbitrate(t, users, params, prev, DEFAULT_WEIGHTS, meas, RATES, prompts)
            b = brute_force_arbitrate(t, users, params, prev, DEFAULT_WEIGHTS,
                                      meas, RATES, prompts)
            assert a.accept == b.accept
            assert a.params_after == b.params_after

    def test_maximality_certificate(self):
        t, users, params, prev, meas, prompts = _conflict_instance()
        res = arbitrate(t, users, params, prev, DEFAULT_WEIGHTS, meas, RATES, prompts)
        accepted = [p for p, a in zip(prompts, res.accept) if a]
        for i, a in enumerate(res.accept):
            if a:
                continue
            trial = apply_prompt_batch(params, accepted + [prompts[i]], meas, RATES)
            assert solve(t, users, trial, prev, DEFAULT_WEIGHTS).status == "Infeasible"
