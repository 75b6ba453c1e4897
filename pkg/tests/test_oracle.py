import math

import numpy as np
import pytest

from fairsched import mechanisms as mech
from fairsched.core import Instance, gen_uniform
from fairsched.errors import InfeasibleError, ParameterError
from fairsched.oracle import (
    OracleConfig,
    brute_force_optimal_multi,
    brute_multi_completions,
    count_orders,
    enumerate_priority_mechanisms,
    exact_completions_by_enumeration,
    exact_multi_evaluation,
    exact_multi_fairest,
    mc_completions,
    mc_multi_brute,
    mc_multi_evaluation,
    ordered_partitions,
    worker_seeds,
)


def random_rule(sub):
    return mech.random_schedule(sub)


class TestSingleMachine:
    @pytest.mark.parametrize(
        "sizes, k, expected",
        [([1, 2, 3], 1, [1, 4.5, 5]), ([1, 2, 3], 2, [1, 3, 6]), ([1, 2], 0, [2, 2.5])],
    )
    def test_enumeration_values(self, sizes, k, expected):
        inst = Instance.from_sizes(sizes)
        got = exact_completions_by_enumeration(inst, mech.pareto_schedule(inst, k))
        np.testing.assert_allclose(got, expected, rtol=1e-12)

    def test_chunk_boundary(self):
        # 7! = 5040 orders spans more than one internal chunk
        inst = gen_uniform(7, 10, 3)
        got = exact_completions_by_enumeration(inst, mech.random_schedule(inst))
        np.testing.assert_allclose(got, mech.fairest_completions(inst), rtol=1e-9)

    def test_cap(self):
        inst = gen_uniform(12, 10, 0)
        with pytest.raises(InfeasibleError) as exc:
            exact_completions_by_enumeration(inst, mech.random_schedule(inst))
        assert exc.value.outcomes == math.factorial(12)
        assert "Monte Carlo" in str(exc.value)
        assert count_orders(mech.pareto_schedule(inst, 11)) == 1

    def test_mc_within_four_se(self, tri):
        cfg = OracleConfig(mc_samples=100_000, seed=1)
        mean, se = mc_completions(tri, mech.random_schedule(tri), cfg)
        assert np.all(np.abs(mean - [3.5, 4, 4.5]) <= 4 * se)

    def test_mc_smith_exact(self, tri):
        mean, se = mc_completions(tri, mech.smith_schedule(tri), OracleConfig(mc_samples=50))
        np.testing.assert_array_equal(mean, [1, 3, 6])
        np.testing.assert_array_equal(se, 0)

    def test_mc_deterministic(self, tri):
        cfg = OracleConfig(mc_samples=5000, seed=9)
        a = mc_completions(tri, mech.random_schedule(tri), cfg)
        b = mc_completions(tri, mech.random_schedule(tri), cfg)
        np.testing.assert_array_equal(a[0], b[0])
        c = mc_completions(tri, mech.random_schedule(tri), OracleConfig(mc_samples=5000, seed=10))
        assert not np.array_equal(a[0], c[0])

    def test_worker_seeds(self):
        a = [s.generate_state(2).tolist() for s in worker_seeds(3, 4)]
        b = [s.generate_state(2).tolist() for s in worker_seeds(3, 4)]
        assert a == b and len({tuple(x) for x in a}) == 4

    def test_config_validation(self):
        with pytest.raises(ParameterError):
            OracleConfig(max_exact_outcomes=0)


class TestPartitions:
    @pytest.mark.parametrize("n, count", [(0, 1), (1, 1), (2, 3), (3, 13), (4, 75), (5, 541), (6, 4683)])
    def test_ordered_bell(self, n, count):
        parts = list(ordered_partitions(tuple(range(n))))
        assert len(parts) == count
        assert len(set(parts)) == count
        for p in parts:
            assert sorted(j for g in p for j in g) == list(range(n))

    def test_enumerate(self, tri):
        rows = list(enumerate_priority_mechanisms(tri))
        assert len(rows) == 13
        by_groups = {s.groups: (c, f) for s, c, f in rows}
        assert by_groups[((1, 2, 3),)] == pytest.approx((12, 1))
        assert by_groups[((1,), (2,), (3,))] == pytest.approx((10, 4 / 3))
        assert len(list(enumerate_priority_mechanisms(Instance.from_sizes([4])))) == 1

    def test_enumerate_limit(self):
        with pytest.raises(InfeasibleError):
            next(enumerate_priority_mechanisms(gen_uniform(10, 1, 0)))

    def test_enumerate_agrees_with_closed_form(self):
        inst = gen_uniform(5, 10, 11)
        for sched, cost, fair in enumerate_priority_mechanisms(inst):
            comp = mech.expected_completions(inst, sched)
            assert cost == pytest.approx(mech.social_cost(comp), rel=1e-9)
            assert fair == pytest.approx(float(np.max(comp / mech.fairest_completions(inst))), rel=1e-9)


class TestMulti:
    def test_quad_symmetric(self):
        inst = Instance.from_sizes([1, 1, 2, 2])
        rule = lambda sub: mech.pareto_schedule(sub, mech.select_k(sub, 0.4))
        res = exact_multi_evaluation(inst, 2, rule)
        assert res.outcomes == 4
        assert res.by_id() == {1: 1.0, 2: 1.0, 3: 3.0, 4: 3.0}

    def test_single_machine_reduces(self, tri):
        res = exact_multi_evaluation(tri, 1, lambda sub: mech.pareto_schedule(sub, 1))
        assert res.outcomes == 1
        np.testing.assert_allclose(res.completions, [1, 4.5, 5])

    def test_closed_form_vs_brute_and_mc(self):
        inst = Instance.from_sizes([1, 2, 3, 4])
        exact = exact_multi_evaluation(inst, 2, random_rule)
        brute = brute_multi_completions(inst, 2, random_rule)
        np.testing.assert_allclose(exact.completions, brute, rtol=1e-12)
        _, mean, se = mc_multi_brute(inst, 2, random_rule, OracleConfig(mc_samples=20_000, seed=4))
        assert np.all(np.abs(mean - exact.completions) <= 4 * se)
        mc = mc_multi_evaluation(inst, 2, random_rule, OracleConfig(mc_samples=20_000, seed=4))
        assert np.all(np.abs(mc.completions - exact.completions) <= 4 * mc.std_errors + 1e-12)

    def test_padding_and_mask(self):
        inst = Instance.from_sizes([5, 3, 1])
        res = exact_multi_evaluation(inst, 2, random_rule)
        assert res.instance.n == 4
        assert res.real_mask.tolist() == [False, True, True, True]
        assert res.instance.sizes[0] == 0
        assert res.instance.ids[0] not in inst.ids

    def test_cap(self):
        with pytest.raises(InfeasibleError):
            exact_multi_evaluation(gen_uniform(30, 1, 0), 3, random_rule, OracleConfig(max_exact_outcomes=1000))

    def test_fairest(self):
        inst = Instance.from_sizes([1, 2, 3, 4])
        np.testing.assert_allclose(exact_multi_fairest(inst, 2), [3.25, 4, 4.75, 5.5], rtol=1e-12)
        np.testing.assert_allclose(exact_multi_fairest(Instance.from_sizes([1, 2, 3]), 1), [3.5, 4, 4.5])

    @pytest.mark.parametrize("sizes, m, best", [([1, 2, 3, 4], 2, 13), ([5, 3, 1], 2, 10), ([2, 7, 1], 3, 10)])
    def test_brute_optimum(self, sizes, m, best):
        assert brute_force_optimal_multi(Instance.from_sizes(sizes), m) == best

    def test_brute_optimum_cap(self):
        with pytest.raises(InfeasibleError):
            brute_force_optimal_multi(gen_uniform(20, 1, 0), 3)
