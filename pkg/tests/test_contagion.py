import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypercontagion.contagion import (I, R, S, DiseaseParams, ScalingSpec, Simulation,
                                      SimulationError, Trajectory, edge_infection_prob,
                                      initial_states, iterate_once, run, scaling_f, step)
from hypercontagion.hypergraph import (Hypergraph, clique_complex, generate_complete,
                                       generate_er)


@pytest.fixture(scope="module")
def small_er():
    return clique_complex(generate_er(40, 0.2, seed=1), 3)


class TestScaling:
    def test_zero(self):
        assert scaling_f(0.0, 3) == 0.0

    @pytest.mark.parametrize("kg", [0.0, 0.5, 1.0, 3.0, 10.0])
    def test_half_is_one(self, kg):
        assert scaling_f(0.5, kg) == 1.0

    def test_full_amplification(self):
        assert scaling_f(1.0, 3) == 7.0

    def test_scale_misspecification(self):
        assert scaling_f(1.0, 3, ScalingSpec.scale(2)) == 13.0
        assert scaling_f(0.25, 3, ScalingSpec.scale(2)) == 0.5

    def test_form_misspecification(self):
        spec = ScalingSpec.form(2)
        assert scaling_f(0.125, 3, spec) == pytest.approx(0.5)
        assert scaling_f(0.75, 3, spec) == pytest.approx(1 + 6 * 0.25)
        assert scaling_f(1.0, 3, spec) == 7.0

    @pytest.mark.parametrize("p", [-0.01, 1.01])
    def test_domain(self, p):
        with pytest.raises(ValueError):
            scaling_f(p, 3)

    @pytest.mark.parametrize("kind,param", [("scale", 0.0), ("form", 0.5), ("form", 2.5), ("bogus", 1)])
    def test_invalid_spec(self, kind, param):
        with pytest.raises(ValueError):
            ScalingSpec(kind, param)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 20))
    def test_true_is_non_decreasing(self, a, b, kg):
        lo, hi = sorted((a, b))
        assert scaling_f(lo, kg) <= scaling_f(hi, kg)

    def test_continuity_at_half(self):
        for kg in (0.0, 1.0, 3.0):
            assert scaling_f(0.5 - 1e-12, kg) == pytest.approx(1.0, abs=1e-9)


class TestEdgeProbability:
    def test_pairwise(self):
        assert edge_infection_prob((0, 1), [I, S], 0.05, 3) == pytest.approx(0.35)

    def test_all_susceptible(self):
        assert edge_infection_prob((0, 1, 2), [S, S, S], 0.05, 3) == 0.0

    def test_triangle_two_infected(self):
        assert edge_infection_prob((0, 1, 2), [I, I, S], 0.05, 3) == pytest.approx(0.7)

    def test_triangle_one_infected_is_base_rate(self):
        assert edge_infection_prob((0, 1, 2), [I, S, S], 0.05, 3) == 0.05

    def test_clamped_at_one(self):
        assert edge_infection_prob((0, 1, 2, 3), [I, I, I, S], 0.5, 3) == 1.0

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.sampled_from([0, 1, 2]), min_size=2, max_size=5),
           st.floats(0, 1), st.floats(0, 5), st.randoms(use_true_random=False))
    def test_permutation_invariant_and_bounded(self, states, beta, kg, rnd):
        edge = list(range(len(states)))
        perm = edge[:]
        rnd.shuffle(perm)
        b = edge_infection_prob(edge, states, beta, kg)
        assert 0.0 <= b <= 1.0
        assert edge_infection_prob(perm, states, beta, kg) == b


class TestParams:
    def test_valid(self):
        DiseaseParams(0.05, 0.0001, 0.0, 3.0, 50)

    @pytest.mark.parametrize("kw", [dict(beta=1.5), dict(mu=-0.1), dict(mu=0.6, alpha=0.6),
                                    dict(k_gamma=-1), dict(m=0)])
    def test_invalid(self, kw):
        base = dict(beta=0.05, mu=0.01, alpha=0.0, k_gamma=1.0, m=5)
        base.update(kw)
        with pytest.raises(ValueError):
            DiseaseParams(**base)


class TestIterate:
    def test_all_susceptible_unchanged(self, small_er):
        states = np.zeros(40, np.int8)
        out = iterate_once(states, small_er, DiseaseParams(0.5, 0.1, 0.1, 3, 1),
                           np.random.default_rng(0))
        assert np.array_equal(out, states)

    def test_certain_recovery(self, small_er):
        states = initial_states(40, 10, seed=1)
        out = iterate_once(states, small_er, DiseaseParams(0.0, 1.0, 0.0, 3, 1),
                           np.random.default_rng(0))
        assert np.all(out == S)

    def test_certain_removal(self, small_er):
        states = initial_states(40, 10, seed=1)
        out = iterate_once(states, small_er, DiseaseParams(0.0, 0.0, 1.0, 3, 1),
                           np.random.default_rng(0))
        assert np.count_nonzero(out == R) == 10

    def test_fresh_infections_skip_same_iteration_exit(self):
        g = Hypergraph(2, [(0, 1)])
        p = DiseaseParams(0.5, 1.0, 0.0, 3, 1)  # beta_e = min(7 * 0.5, 1) = 1
        out = iterate_once(np.array([I, S], np.int8), g, p, np.random.default_rng(0))
        assert out.tolist() == [S, I]

    def test_engine_fresh_infections_skip_same_iteration_exit(self):
        g = Hypergraph(2, [(0, 1)])
        sim = Simulation(g, DiseaseParams(0.5, 1.0, 0.0, 3, 1), [I, S], np.random.default_rng(0))
        sim.step()
        assert sim.states.tolist() == [S, I]

    def test_no_edges(self):
        with pytest.raises(SimulationError):
            iterate_once(np.zeros(3, np.int8), Hypergraph(3, [], max_order=1),
                         DiseaseParams(0.1, 0.1), np.random.default_rng(0))

    def test_misspecified_dynamics_rejected(self, small_er):
        with pytest.raises(ValueError):
            iterate_once(np.zeros(40, np.int8), small_er, DiseaseParams(0.1, 0.1),
                         np.random.default_rng(0), ScalingSpec.scale(2))

    def test_input_not_mutated(self, small_er):
        states = initial_states(40, 20, seed=2)
        before = states.copy()
        iterate_once(states, small_er, DiseaseParams(0.9, 0.5, 0.2, 3, 1), np.random.default_rng(0))
        assert np.array_equal(states, before)


class TestStep:
    def test_m1_is_one_iteration(self, small_er):
        states = initial_states(40, 8, seed=3)
        p = DiseaseParams(0.2, 0.05, 0.01, 3, 1)
        a = step(states, small_er, p, np.random.default_rng(9))
        b = iterate_once(states, small_er, p, np.random.default_rng(9))
        assert np.array_equal(a, b)

    def test_m_iterations(self, small_er):
        states = initial_states(40, 8, seed=3)
        p = DiseaseParams(0.2, 0.05, 0.01, 3, 7)
        rng = np.random.default_rng(4)
        manual = states
        for _ in range(7):
            manual = iterate_once(manual, small_er, p, rng)
        assert np.array_equal(step(states, small_er, p, np.random.default_rng(4)), manual)

    def test_frozen_without_disease(self, small_er):
        states = initial_states(40, 8, seed=3)
        p = DiseaseParams(0.0, 0.0, 0.0, 3, 25)
        assert np.array_equal(step(states, small_er, p, np.random.default_rng(0)), states)


class TestEngineMatchesLiteral:
    """The scheduled-exit engine and the per-iteration update agree in distribution."""

    def test_exit_time_is_geometric(self):
        g = Hypergraph(2, [(0, 1)])
        p = DiseaseParams(0.0, 0.08, 0.02, 0.0, 1)

        def engine(r):
            sim = Simulation(g, p, [I, S], np.random.default_rng(r))
            while sim.states[0] == I:
                sim.step()
            return sim.iteration

        def literal(r):
            rng = np.random.default_rng(10_000 + r)
            states, n = np.array([I, S], np.int8), 0
            while states[0] == I:
                states = iterate_once(states, g, p, rng)
                n += 1
            return n

        for runner in (engine, literal):
            x = np.array([runner(r) for r in range(4000)])
            # geometric with success probability 0.1: mean 10, sd sqrt(0.9)/0.1
            assert abs(x.mean() - 10.0) < 4 * np.sqrt(90.0 / len(x))

    def test_removal_share(self):
        sim = Simulation(generate_complete(400), DiseaseParams(0.0, 0.3, 0.1, 0.0, 1),
                         np.full(400, I, np.int8), np.random.default_rng(5))
        for _ in range(200):
            sim.step()
        # every node exits; each exit is a removal with probability 0.1 / 0.4
        removed = np.count_nonzero(sim.states == R)
        assert np.count_nonzero(sim.states == I) == 0
        assert abs(removed / 400 - 0.25) < 4 * np.sqrt(0.25 * 0.75 / 400)

    def test_mean_infected_after_steps(self, small_er):
        p = DiseaseParams(0.05, 0.02, 0.0, 1.0, 5)
        init = initial_states(40, 4, seed=0)
        n_rep, T = 400, 6
        eng = [run(small_er, p, init, T, seed=r).I[-1] for r in range(n_rep)]
        lit = []
        for r in range(n_rep):
            rng = np.random.default_rng(50_000 + r)
            s = init
            for _ in range(T):
                s = step(s, small_er, p, rng)
            lit.append(np.count_nonzero(s == I))
        eng, lit = np.array(eng, float), np.array(lit, float)
        se = np.sqrt(eng.var() / n_rep + lit.var() / n_rep)
        assert abs(eng.mean() - lit.mean()) < 4 * se


class TestRun:
    def test_t_must_be_positive(self, small_er):
        with pytest.raises(ValueError):
            run(small_er, DiseaseParams(0.1, 0.1), np.zeros(40, np.int8), 0, seed=0)

    def test_length(self, small_er):
        tr = run(small_er, DiseaseParams(0.1, 0.1), initial_states(40, 2, 0), 1, seed=0)
        assert len(tr) == 2
        assert tr.t.tolist() == [0, 1]

    def test_disease_free_is_flat(self, small_er):
        tr = run(small_er, DiseaseParams(0.5, 0.1), np.zeros(40, np.int8), 30, seed=0)
        assert np.all(tr.I == 0)

    def test_deterministic(self, small_er):
        p = DiseaseParams(0.1, 0.01, 0.005, 3, 20)
        init = initial_states(40, 3, 0)
        a, b = run(small_er, p, init, 50, seed=42), run(small_er, p, init, 50, seed=42)
        for col in ("S", "I", "R"):
            assert np.array_equal(getattr(a, col), getattr(b, col))

    @settings(max_examples=25, deadline=None)
    @given(st.floats(0, 1), st.floats(0, 0.5), st.floats(0, 0.5), st.floats(0, 4),
           st.integers(0, 40), st.integers(0, 2**31))
    def test_conservation_and_monotone_removed(self, beta, mu, alpha, kg, n0, seed):
        g = clique_complex(generate_er(40, 0.2, seed=1), 3)
        tr = run(g, DiseaseParams(beta, mu, alpha, kg, 3), initial_states(40, n0, seed), 20, seed)
        assert np.all(tr.S + tr.I + tr.R == 40)
        assert np.all(np.diff(tr.R) >= 0)
        if alpha == 0:
            assert np.all(tr.R == 0)
        extinct = np.flatnonzero(tr.I == 0)
        if len(extinct):
            assert np.all(tr.I[extinct[0]:] == 0)

    def test_stop_when_extinct(self, small_er):
        tr = run(small_er, DiseaseParams(0.0, 1.0, 0.0, 0, 1), initial_states(40, 3, 0), 50,
                 seed=0, stop_when_extinct=True)
        assert len(tr) == 2 and tr.I[-1] == 0

    def test_sis_endemic_plateau_on_er(self):
        g = clique_complex(generate_er(500, 0.1, seed=0), 4)
        tr = run(g, DiseaseParams(0.05, 0.0001, 0.0, 3, 50), initial_states(500, 5, 1), 700, seed=2)
        tail = tr.infected_fraction[-100:]
        assert tail.mean() > 0.5
        assert tail.std() < 0.05


def test_trajectory_csv_round_trip(tmp_path, small_er):
    tr = run(small_er, DiseaseParams(0.1, 0.01), initial_states(40, 3, 0), 10, seed=0)
    tr.to_csv(tmp_path / "t.csv")
    back = Trajectory.from_csv(tmp_path / "t.csv")
    assert np.array_equal(back.I, tr.I) and back.n_nodes == 40
    assert back.beta1 is None and back.adjusted is None
    header = (tmp_path / "t.csv").read_text().splitlines()[0]
    assert header == "t,S,I,R,beta1,xi,xi_bar,adjusted"


def test_initial_states():
    s = initial_states(500, 5, seed=3)
    assert np.count_nonzero(s == I) == 5
    assert np.array_equal(s, initial_states(500, 5, seed=3))
    with pytest.raises(ValueError):
        initial_states(5, 6, seed=0)
