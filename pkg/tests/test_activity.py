from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypercontagion.activity import (ActivityError, beta_hat_k, combinatorial_activity,
                                     exact_activity, exact_activity_value, normalize_beta1)
from hypercontagion.adaptive import paired_run
from hypercontagion.contagion import (I, S, DiseaseParams, ScalingSpec, edge_infection_prob,
                                      initial_states, iterate_once)
from hypercontagion.hypergraph import (Hypergraph, clique_complex, generate_complete,
                                       generate_er)


@pytest.fixture(scope="module")
def triangle_k2():
    return clique_complex(generate_complete(3), 2)


@pytest.fixture(scope="module")
def er50():
    return clique_complex(generate_er(50, 0.25, seed=4), 4)


class TestBetaHat:
    def test_pairwise(self):
        assert beta_hat_k(1, 0.05, 3) == pytest.approx(0.175)

    def test_triangle(self):
        assert beta_hat_k(2, 0.05, 3) == pytest.approx(0.3)

    @pytest.mark.parametrize("k", [1, 2, 3, 4, 6])
    def test_zero_beta(self, k):
        assert beta_hat_k(k, 0.0, 3) == 0.0

    def test_invalid_order(self):
        with pytest.raises(ActivityError):
            beta_hat_k(0, 0.05, 3)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(1, 6), st.floats(0, 1), st.floats(0, 1), st.floats(0, 5), st.floats(0, 5))
    def test_monotone_and_bounded(self, k, b1, b2, g1, g2):
        b_lo, b_hi = sorted((b1, b2))
        g_lo, g_hi = sorted((g1, g2))
        assert beta_hat_k(k, b_lo, g_lo) <= beta_hat_k(k, b_hi, g_lo) + 1e-15
        assert beta_hat_k(k, b_lo, g_lo) <= beta_hat_k(k, b_lo, g_hi) + 1e-15
        bound = sum(comb(k + 1, i) * (k + 1 - i) for i in range(1, k + 1)) / 2 ** (k + 1)
        assert beta_hat_k(k, b_hi, g_hi) <= bound + 1e-12

    def test_monte_carlo(self):
        # members independently S or I with probability one half; average n_S * beta_e
        rng = np.random.default_rng(0)
        k, beta, kg, n = 3, 0.05, 3.0, 200_000
        states = rng.integers(0, 2, size=(n, k + 1)).astype(np.int8)
        n_inf = states.sum(axis=1)
        samples = np.array([(k + 1 - c) * edge_infection_prob(range(k + 1), row, beta, kg)
                            for c, row in zip(n_inf[:5000], states[:5000])])
        # the per-sample value only depends on n_I, so tabulate it for the full sample
        table = {c: (k + 1 - c) * edge_infection_prob(range(k + 1), [I] * c + [S] * (k + 1 - c),
                                                      beta, kg) for c in range(k + 2)}
        assert np.allclose(samples, [table[c] for c in n_inf[:5000]])
        values = np.array([table[c] for c in n_inf])
        se = values.std(ddof=1) / np.sqrt(n)
        assert abs(values.mean() - beta_hat_k(k, beta, kg)) < 3 * se


class TestCombinatorial:
    def test_triangle_graph(self, triangle_k2):
        rep = combinatorial_activity(triangle_k2, 0.05, 3)
        assert rep.value == pytest.approx(0.20625)
        assert rep.counts.tolist() == [3, 1]
        assert rep.to_dict()["N_k"] == [3, 1]

    def test_single_order_equals_beta_hat(self):
        g = generate_er(60, 0.2, seed=1)
        assert combinatorial_activity(g, 0.03, 2).value == pytest.approx(beta_hat_k(1, 0.03, 2))

    def test_order_cut(self, er50):
        counts = er50.hyperedge_counts()
        rep = combinatorial_activity(er50, 0.05, 3, K=2)
        terms = [beta_hat_k(k, 0.05, 3) for k in (1, 2)]
        assert rep.value == pytest.approx(np.dot(counts[:2], terms) / counts[:2].sum())

    def test_empty(self):
        with pytest.raises(ActivityError):
            combinatorial_activity(Hypergraph(4, [], max_order=2), 0.05, 3)

    def test_k_above_max_order(self, triangle_k2):
        with pytest.raises(ActivityError):
            combinatorial_activity(triangle_k2, 0.05, 3, K=3)


class TestExact:
    def test_all_susceptible(self, er50):
        assert exact_activity(er50, 0.05, np.zeros(50, np.int8), 3).value == 0.0

    def test_single_edge(self):
        g = Hypergraph(2, [(0, 1)])
        assert exact_activity(g, 0.05, [S, I], 3).value == pytest.approx(0.35)

    def test_triangle_half_infected_matches_combinatorial(self, triangle_k2):
        # averaging over all 8 state assignments reproduces the i.i.d.-half assumption
        vals = []
        for code in range(8):
            states = np.array([(code >> b) & 1 for b in range(3)], np.int8)
            vals.append(exact_activity(triangle_k2, 0.05, states, 3).value)
        assert np.mean(vals) == pytest.approx(0.20625)

    def test_hot_path_agrees(self, er50):
        states = initial_states(50, 20, seed=3)
        spec = ScalingSpec.scale(1.5)
        assert exact_activity_value(er50, 0.05, states, 3.0, spec) == pytest.approx(
            exact_activity(er50, 0.05, states, 3.0, spec).value)

    def test_random_states_converge_to_combinatorial(self, er50):
        rng = np.random.default_rng(1)
        draws = np.array([exact_activity_value(er50, 0.05, rng.integers(0, 2, 50).astype(np.int8), 3.0)
                          for _ in range(4000)])
        target = combinatorial_activity(er50, 0.05, 3).value
        assert abs(draws.mean() - target) < 3 * draws.std(ddof=1) / np.sqrt(len(draws))

    def test_single_iteration_oracle(self, er50):
        states = initial_states(50, 15, seed=5)
        params = DiseaseParams(0.05, 0.0, 0.0, 3.0, 1)
        rng = np.random.default_rng(2)
        n = 20_000
        new = np.array([np.count_nonzero(iterate_once(states, er50, params, rng) == I) - 15
                        for _ in range(n)])
        target = exact_activity(er50, 0.05, states, 3.0).value
        assert abs(new.mean() - target) < 3 * new.std(ddof=1) / np.sqrt(n)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**31), st.integers(0, 2**31))
    def test_permutation_equivariant(self, seed_g, seed_p):
        g = clique_complex(generate_er(15, 0.4, seed=seed_g), 3)
        states = np.random.default_rng(seed_g).integers(0, 3, 15).astype(np.int8)
        perm = np.random.default_rng(seed_p).permutation(15)
        relabelled = Hypergraph(15, [tuple(perm[list(e)]) for e in g.edges()], max_order=3)
        moved = np.empty_like(states)
        moved[perm] = states
        assert exact_activity_value(relabelled, 0.1, moved, 2.0) == pytest.approx(
            exact_activity_value(g, 0.1, states, 2.0))


class TestNormalize:
    def test_triangle_graph(self, triangle_k2):
        b1 = normalize_beta1(triangle_k2, triangle_k2.restrict(1), 0.05, 3)
        assert b1 == pytest.approx(0.20625 / 0.175 * 0.05)
        assert b1 == pytest.approx(0.058929, abs=1e-6)

    def test_pairwise_only(self):
        g = generate_er(40, 0.2, seed=0)
        assert normalize_beta1(g, g, 0.05, 3) == pytest.approx(0.05)

    def test_zero_beta(self, triangle_k2):
        with pytest.raises(ActivityError):
            normalize_beta1(triangle_k2, triangle_k2.restrict(1), 0.0, 3)


def test_ratio_saturates_at_endemic_state():
    gK = clique_complex(generate_er(300, 0.1, seed=0), 4)
    g1 = gK.restrict(1)
    res = paired_run(gK, g1, DiseaseParams(0.05, 0.0001, 0.0, 1.0, 50), None,
                     initial_states(300, 3, seed=1), 700, seed_pair=2)
    dev = np.abs(res.trajectory_1.xi[1:] - 1.0)
    assert np.nanmean(dev[-100:]) < np.nanmean(dev[:100])
