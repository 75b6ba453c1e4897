import itertools
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairsched.core import Instance, gen_lower_bound
from fairsched.errors import DegenerateInstanceError, ParameterError
from fairsched.metrics import bound_upper, evaluate
from fairsched.multimachine import (
    evaluate_multi,
    fair_multi_mechanism,
    greedy_assign,
    multi_fairest_completions,
    optimal_multi_cost,
    pad_and_blocks,
    sample_block_matching,
)
from fairsched.oracle import OracleConfig, brute_force_optimal_multi, exact_multi_fairest

from conftest import instances


class TestBlocks:
    def test_even(self):
        bs = pad_and_blocks(Instance.from_sizes([1, 2, 3, 4]), 2)
        assert (bs.tau, bs.blocks, bs.block_totals, bs.dummy_count) == (2, ((1, 2), (3, 4)), (3, 7), 0)

    def test_padded(self):
        bs = pad_and_blocks(Instance.from_sizes([5, 3, 1]), 2)
        assert bs.dummy_count == 1
        assert bs.block_totals == (1, 8)
        assert bs.blocks[0][1] == 3 and bs.blocks[1] == (2, 1)
        assert bs.blocks[0][0] in bs.dummy_ids

    def test_single_machine(self, tri):
        bs = pad_and_blocks(tri, 1)
        assert bs.tau == 3 and all(len(b) == 1 for b in bs.blocks)

    def test_bad_m(self, tri):
        with pytest.raises(ParameterError):
            pad_and_blocks(tri, 0)

    @given(instances(max_n=20, positive=False), st.integers(1, 5))
    def test_structure(self, inst, m):
        bs = pad_and_blocks(inst, m)
        assert bs.instance.n == m * bs.tau
        assert all(len(b) == m for b in bs.blocks)
        assert list(bs.block_totals) == sorted(bs.block_totals)
        assert all(bs.instance.size_of[j] == 0 for j in bs.dummy_ids)
        assert set(bs.dummy_ids) <= set(bs.instance.ids[: bs.dummy_count + inst.n])


class TestOptimum:
    @pytest.mark.parametrize(
        "sizes, m, cost", [([1, 2, 3, 4], 2, 13), ([5, 3, 1], 2, 10), ([1, 2, 3], 1, 10)]
    )
    def test_formula(self, sizes, m, cost):
        assert optimal_multi_cost(pad_and_blocks(Instance.from_sizes(sizes), m)) == cost

    def test_greedy_traces(self):
        _, comp, cost = greedy_assign(Instance.from_sizes([1, 2, 3, 4]), 2)
        assert comp.tolist() == [1, 2, 4, 6] and cost == 13
        _, comp, cost = greedy_assign(Instance.from_sizes([5, 3, 1]), 2)
        assert comp.tolist() == [0, 1, 3, 6] and cost == 10

    def test_m_at_least_n(self):
        inst = Instance.from_sizes([4, 1, 2])
        for m in (3, 5):
            _, comp, cost = greedy_assign(inst, m)
            assert cost == 7

    def test_zero_jobs_spread(self):
        inst = Instance.from_sizes([0, 0, 0, 5, 5, 5])
        a, _, _ = greedy_assign(inst, 3)
        assert a.spreads_blocks(pad_and_blocks(inst, 3))

    @settings(max_examples=80, deadline=None)
    @given(instances(max_n=6, positive=False), st.integers(1, 3))
    def test_greedy_is_optimal(self, inst, m):
        bs = pad_and_blocks(inst, m)
        a, _, cost = greedy_assign(inst, m)
        opt = optimal_multi_cost(bs)
        assert a.spreads_blocks(bs)
        assert cost == pytest.approx(opt, rel=1e-9, abs=1e-12)
        assert brute_force_optimal_multi(inst, m) == pytest.approx(opt, rel=1e-9, abs=1e-12)


class TestMatching:
    def test_identity_for_one_machine(self, tri):
        a = sample_block_matching(pad_and_blocks(tri, 1), 3)
        assert set(a.machine_of.values()) == {0}
        assert a.machines == ((1, 2, 3),)

    def test_deterministic(self):
        bs = pad_and_blocks(Instance.from_sizes(range(1, 10)), 3)
        assert sample_block_matching(bs, 8) == sample_block_matching(bs, 8)

    def test_uniform(self):
        bs = pad_and_blocks(Instance.from_sizes([1, 2, 3, 4]), 2)
        N = 100_000
        counts = Counter(
            tuple(sample_block_matching(bs, s).machine_of[j] for j in (1, 3)) for s in range(N)
        )
        assert set(counts) == set(itertools.product((0, 1), repeat=2))
        for c in counts.values():
            assert abs(c / N - 0.25) <= 0.01

    @given(instances(max_n=12), st.integers(1, 4), st.integers(0, 2**32 - 1))
    def test_spreads(self, inst, m, seed):
        bs = pad_and_blocks(inst, m)
        assert sample_block_matching(bs, seed).spreads_blocks(bs)


class TestFairMechanism:
    def test_fairest_values(self):
        inst = Instance.from_sizes([1, 2, 3, 4])
        np.testing.assert_allclose(multi_fairest_completions(inst, 2), [3.25, 4, 4.75, 5.5])
        np.testing.assert_allclose(multi_fairest_completions(Instance.from_sizes([1, 2, 3]), 1), [3.5, 4, 4.5])
        np.testing.assert_allclose(multi_fairest_completions(inst, 10**9), [1, 2, 3, 4], rtol=1e-8)

    @settings(max_examples=25, deadline=None)
    @given(instances(max_n=5), st.integers(1, 3))
    def test_fairest_matches_enumeration(self, inst, m):
        np.testing.assert_allclose(
            multi_fairest_completions(inst, m), exact_multi_fairest(inst, m), rtol=1e-9, atol=1e-12
        )

    def test_quad(self):
        inst = Instance.from_sizes([1, 1, 2, 2])
        fm = fair_multi_mechanism(inst, 2, 0.4)
        for seed in range(10):
            assignment, scheds = fm.realize(seed)
            for jobs, sched in zip(assignment.machines, scheds):
                assert sorted(inst.size_of[j] for j in jobs) == [1, 2]
                assert sched.n_groups == 2
        r = evaluate_multi(inst, 2, 0.4)
        assert r.completions_by_id() == {1: 1, 2: 1, 3: 3, 4: 3}
        np.testing.assert_allclose(r.fairness_array(), [1 / 2.25, 1 / 2.25, 1, 1])
        assert r.fairness_ratio == 1.0
        assert r.extra["expected_colocated_load"] == [2, 2, 1, 1]

    def test_zero_target(self):
        fm = fair_multi_mechanism(Instance.from_sizes([1, 2, 3, 4]), 2, 0.0)
        _, scheds = fm.realize(0)
        assert all(s.n_groups == 1 for s in scheds)

    @pytest.mark.parametrize("mech_eps", [0.0, 0.1, 0.3, 0.7])
    def test_single_machine_reduces(self, mech_eps):
        inst = Instance.from_sizes([0.5, 1, 2, 3, 7])
        a = evaluate_multi(inst, 1, mech_eps)
        b = evaluate(inst, f"target:{mech_eps!r}")
        assert a.k == b.k
        assert a.completions_by_id() == pytest.approx(b.completions_by_id(), rel=1e-12)
        assert a.fairness_ratio == pytest.approx(b.fairness_ratio, rel=1e-12)
        assert a.efficacy_ratio == pytest.approx(b.efficacy_ratio, rel=1e-12)

    def test_lower_bound_pair(self):
        base = gen_lower_bound(0.25, 12)
        inst = Instance.from_sizes(base.sizes * 2)
        r = evaluate_multi(inst, 2, 0.1)
        assert r.fairness_ratio <= 1.1 + 1e-9
        assert r.extra["outcomes"] == 2 ** r.extra["tau"]

    def test_dummies_excluded(self):
        r = evaluate_multi(Instance.from_sizes([5, 3, 1]), 2, 0.25)
        assert sorted(p.id for p in r.per_job) == [1, 2, 3]
        assert r.extra["dummy_count"] == 1
        assert r.social_cost == pytest.approx(sum(p.expected_completion for p in r.per_job))

    def test_mc_mode(self):
        inst = Instance.from_sizes([1, 2, 3, 4, 5, 6])
        exact = evaluate_multi(inst, 2, 0.25)
        mc = evaluate_multi(inst, 2, 0.25, "mc", OracleConfig(mc_samples=4000, seed=2))
        assert mc.extra["samples"] == 4000
        for p, q, se in zip(exact.per_job, mc.per_job, mc.extra["std_errors"]):
            assert abs(p.expected_completion - q.expected_completion) <= 4 * se + 1e-12

    def test_errors(self):
        with pytest.raises(DegenerateInstanceError):
            fair_multi_mechanism(Instance.from_sizes([0, 0]), 2, 0.1)
        with pytest.raises(ParameterError):
            fair_multi_mechanism(Instance.from_sizes([1]), 2, -0.1)
        with pytest.raises(ParameterError):
            evaluate_multi(Instance.from_sizes([1]), 2, 0.1, mode="fast")

    @settings(max_examples=40, deadline=None)
    @given(instances(max_n=8), st.sampled_from([0.1, 0.25, 0.5]))
    def test_fairness_and_efficacy_bounds(self, inst, eps):
        r = evaluate_multi(inst, 2, eps)
        assert r.fairness_ratio <= 1 + eps + 1e-9
        assert r.efficacy_ratio <= bound_upper(eps) + 1e-9
        assert r.epsilon_k <= eps
