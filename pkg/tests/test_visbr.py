"""Stochastic-game dynamics: inner/outer loop, recording, one-sided mode."""

import numpy as np
import pytest

import zsdyn as z
from zsdyn.visbr import _weighted_rows


def _sched(alpha=0.5, beta=0.01):
    return z.StepsizeSchedule(kind="constant", alpha=alpha, beta=beta)


def _config(**kw):
    base = dict(tau=0.5, schedule=_sched(), T=2, K=10, seed=7)
    base.update(kw)
    return z.VisbrConfig(**base)


def _mp_sg(gamma=0.5):
    P = np.ones((1, 2, 2, 1))
    R1 = np.array([[[1.0, -1.0], [-1.0, 1.0]]])
    return z.validate_stochastic_game(P, R1, gamma=gamma)


def _random_sg(rng, n_states=3, n1=2, n2=2, gamma=0.8):
    P = rng.random((n_states, n1, n2, n_states)) + 0.1
    P /= P.sum(axis=3, keepdims=True)
    R1 = rng.uniform(-1.0, 1.0, (n_states, n1, n2))
    return z.validate_stochastic_game(P, R1, gamma=gamma)


def test_init_state():
    sg = _random_sg(np.random.default_rng(0))
    state = z.init_visbr(sg, _config())
    assert state.t == 0 and state.k == 0
    assert 0 <= state.s < sg.n_states
    for player, n in zip(state.players, (2, 2)):
        assert np.array_equal(player.q, np.zeros((3, n)))
        assert np.array_equal(player.pi, np.full((3, n), 0.5))
        assert np.array_equal(player.v, np.zeros(3))


def test_init_single_state_start():
    state = z.init_visbr(_mp_sg(), _config())
    assert state.s == 0


def test_init_pointmass_start_state():
    P = np.ones((2, 1, 1, 2)) * 0.5
    sg = z.validate_stochastic_game(P, np.zeros((2, 1, 1)), gamma=0.5,
                                    initial_dist=[0.0, 1.0])
    for seed in range(5):
        assert z.init_visbr(sg, _config(seed=seed)).s == 1


def test_init_same_seed_identical():
    sg = _random_sg(np.random.default_rng(1))
    a = z.init_visbr(sg, _config(seed=42))
    b = z.init_visbr(sg, _config(seed=42))
    assert a.s == b.s
    assert a.rngs[0].random() == b.rngs[0].random()
    assert a.rngs[2].random() == b.rngs[2].random()


def test_inner_step_advances_and_guards():
    sg = _mp_sg()
    config = _config(T=1, K=3)
    state = z.init_visbr(sg, config)
    for want_k in (1, 2, 3):
        state = z.inner_step(state, sg, config)
        assert state.k == want_k
    with pytest.raises(z.BadConfig):
        z.inner_step(state, sg, config)


def test_outer_update_requires_completed_inner_loop():
    sg = _mp_sg()
    config = _config(T=1, K=3)
    state = z.init_visbr(sg, config)
    with pytest.raises(z.BadConfig):
        z.outer_update(state, sg, config)
    for _ in range(3):
        state = z.inner_step(state, sg, config)
    after = z.outer_update(state, sg, config)
    assert after.t == state.t + 1 and after.k == 0
    assert after.s == state.s  # trajectory continues, no reset


def test_inner_step_keeps_values_frozen():
    sg = _random_sg(np.random.default_rng(5))
    config = _config(T=1, K=4)
    state = z.init_visbr(sg, config)
    v_before = [p.v.copy() for p in state.players]
    for _ in range(4):
        state = z.inner_step(state, sg, config)
        for p, v0 in zip(state.players, v_before):
            assert np.array_equal(p.v, v0)


def test_outer_update_is_policy_weighted_q():
    rng = np.random.default_rng(9)
    sg = _random_sg(rng, n_states=2, n1=3, n2=2)
    config = _config(T=2, K=5)
    state = z.init_visbr(sg, config)
    for _ in range(5):
        state = z.inner_step(state, sg, config)
    after = z.outer_update(state, sg, config)
    for p_new, p_old in zip(after.players, state.players):
        want = _weighted_rows(p_old.pi.tolist(), p_old.q.tolist())
        assert np.array_equal(p_new.v, np.array(want))
        assert np.allclose(p_new.v, (p_old.pi * p_old.q).sum(axis=1), atol=1e-12)
        # q and pi carry through untouched
        assert np.array_equal(p_new.q, p_old.q)
        assert np.array_equal(p_new.pi, p_old.pi)


def test_outer_update_one_hot_policy_reads_q():
    sg = _random_sg(np.random.default_rng(15), n_states=2)
    config = _config(T=1, K=1)
    state = z.init_visbr(sg, config)
    q = np.array([[0.3, -0.7], [0.1, 0.9]])
    pi = np.array([[1.0, 0.0], [0.0, 1.0]])
    forced = z.VisbrState(
        players=(z.LearnerState(q=q, pi=pi, v=np.zeros(2)),
                 z.LearnerState(q=np.zeros((2, 2)), pi=np.full((2, 2), 0.5), v=np.zeros(2))),
        s=state.s, t=0, k=1, rngs=state.rngs)
    after = z.outer_update(forced, sg, config)
    assert np.array_equal(after.players[0].v, [0.3, 0.9])
    assert np.array_equal(after.players[1].v, [0.0, 0.0])


def test_single_state_round_matches_matrix_dynamics_bitwise():
    # with one state and v = 0 the first inner round is exactly the
    # matrix-game update, and the player seed children coincide
    gamma = 0.5
    sg = _mp_sg(gamma)
    mg = z.matching_pennies()
    K = 50
    vc = _config(T=1, K=K, seed=31, tau=0.8)
    mc = z.MatrixRunConfig(tau=0.8, schedule=_sched(), K=K, seed=31)

    vs = z.init_visbr(sg, vc)
    ms = z.init_matrix_state(mg, mc)
    for _ in range(K):
        vs = z.inner_step(vs, sg, vc)
        ms = z.step_matrix(ms, mg, mc)
        for i in range(2):
            assert np.array_equal(vs.players[i].q[0], ms.players[i].q)
            assert np.array_equal(vs.players[i].pi[0], ms.players[i].pi)


def test_run_equals_stepping():
    sg = _random_sg(np.random.default_rng(21), n_states=2)
    config = _config(T=3, K=7, seed=77, record_stride=1)
    rec = z.run_visbr(sg, config)

    state = z.init_visbr(sg, config)
    rows = iter(range(1, len(rec.index)))  # row 0 is the initial (0, 0)
    assert rec.index[0].tolist() == [0, 0]
    for t in range(config.T):
        for k in range(config.K):
            state = z.inner_step(state, sg, config)
            row = next(rows)
            assert rec.index[row].tolist() == [t, k + 1]
            q_inf = max(float(np.abs(p.q).max()) for p in state.players)
            min_pi = min(float(p.pi.min()) for p in state.players)
            assert rec.series["q_inf"][row] == q_inf
            assert rec.series["min_pi"][row] == min_pi
            lsum = float(np.abs(state.players[0].v + state.players[1].v).max())
            assert rec.series["lsum"][row] == lsum
        state = z.outer_update(state, sg, config)
    final_row = next(rows)
    assert rec.index[final_row].tolist() == [config.T, 0]
    assert np.array_equal(rec.final_q[0], state.players[0].q)
    assert np.array_equal(rec.final_q[1], state.players[1].q)
    assert np.array_equal(rec.final_v[0], state.players[0].v)
    assert np.array_equal(rec.final_v[1], state.players[1].v)
    assert np.array_equal(rec.final_policy.pi1, state.players[0].pi)
    assert np.array_equal(rec.final_policy.pi2, state.players[1].pi)


def test_environment_stream_consumption():
    # one uniform for S0, then exactly one per inner step
    sg = _random_sg(np.random.default_rng(25), n_states=3)
    config = _config(T=2, K=6, seed=13)
    state = z.init_visbr(sg, config)
    for t in range(2):
        for _ in range(6):
            state = z.inner_step(state, sg, config)
        state = z.outer_update(state, sg, config)
    probe = state.rngs[2].random()

    _, _, ce = z.visbr_seed_sequences(config.seed)
    fresh = np.random.default_rng(ce)
    fresh.random(1 + 12)
    assert probe == fresh.random()


def test_record_row_structure():
    sg = _mp_sg()
    rec = z.run_visbr(sg, _config(T=3, K=50, record_stride=25))
    assert rec.index.tolist() == [[0, 0], [0, 25], [0, 50], [1, 25], [1, 50],
                                  [2, 25], [2, 50], [3, 0]]
    rec = z.run_visbr(sg, _config(T=2, K=5, record_stride=9))
    assert rec.index.tolist() == [[0, 0], [0, 5], [1, 5], [2, 0]]
    assert set(rec.series) == set(z.VISBR_METRICS) | {"v_err"}


def test_initial_row_metrics():
    sg = _mp_sg()
    rec = z.run_visbr(sg, _config(T=1, K=5))
    assert rec.series["lsum"][0] == 0.0
    assert rec.series["v_inf"][0] == 0.0
    assert rec.series["q_inf"][0] == 0.0
    assert rec.series["min_pi"][0] == 0.5


def test_identical_config_identical_record():
    sg = _random_sg(np.random.default_rng(33), n_states=2)
    config = _config(T=2, K=20, seed=99, record_stride=5)
    assert z.run_visbr(sg, config) == z.run_visbr(sg, config)


def test_iterate_bounds_on_random_runs():
    rng = np.random.default_rng(35)
    for trial in range(4):
        gamma = float(rng.uniform(0.4, 0.9))
        sg = _random_sg(rng, n_states=int(rng.integers(2, 4)), gamma=gamma)
        cap = 1.0 / (1.0 - gamma)
        if trial % 2 == 0:
            config = _config(T=3, K=40, seed=trial, tau=float(rng.uniform(0.2, 1.0)))
        else:
            eps = float(rng.uniform(0.05, 0.3))
            config = _config(T=3, K=40, seed=trial, tau=float(rng.uniform(0.2, 1.0)),
                             variant="explore", eps_bar=eps)
        rec = z.run_visbr(sg, config)
        assert (rec.metric("q_inf") <= cap).all()
        assert (rec.metric("v_inf") <= cap).all()
        if config.variant == "explore":
            bound = z.exploration_bound("stochastic", "explore",
                                        z.SoftmaxParams(tau=config.tau, eps_bar=config.eps_bar),
                                        sg.a_max)
            assert (rec.metric("min_pi") >= bound.value).all()
        assert (rec.metric("ng") >= 0.0).all()


def test_v_error_column_appears_only_under_budget():
    sg = _mp_sg()
    with_err = z.run_visbr(sg, _config(T=1, K=5))
    assert "v_err" in with_err.series
    # v* for matching pennies is 0, so v_err equals v_inf throughout
    assert np.allclose(with_err.metric("v_err"), with_err.metric("v_inf"), atol=1e-6)
    without = z.run_visbr(sg, _config(T=1, K=5), v_star_budget=0)
    assert "v_err" not in without.series


def test_frozen_opponent_mode():
    rng = np.random.default_rng(41)
    sg = _random_sg(rng, n_states=2, gamma=0.7)
    frozen = rng.random((2, 2)) + 0.2
    frozen /= frozen.sum(axis=1, keepdims=True)
    config = _config(T=2, K=30, seed=8)
    rec = z.run_visbr(sg, config, frozen_pi2=frozen)
    # player 2 never learns in this mode
    assert np.array_equal(rec.final_q[1], np.zeros((2, 2)))
    assert np.array_equal(rec.final_policy.pi2, np.full((2, 2), 0.5))
    assert np.array_equal(rec.final_v[1], np.zeros(2))
    # player 1 does
    assert float(np.abs(rec.final_q[0]).max()) > 0.0
    with pytest.raises(z.DimensionMismatch):
        z.run_visbr(sg, config, frozen_pi2=np.full((3, 2), 0.5))


def test_run_reports_warnings():
    sg = _mp_sg(gamma=0.5)
    rec = z.run_visbr(sg, _config(tau=5.0, T=1, K=3))
    assert any("1/(1-gamma)" in w for w in rec.warnings)

    # a reducible chain triggers the ergodicity note
    P = np.zeros((2, 1, 1, 2))
    P[0, 0, 0, 0] = 1.0
    P[1, 0, 0, 1] = 1.0
    stuck = z.validate_stochastic_game(P, np.zeros((2, 1, 1)), gamma=0.5)
    rec = z.run_visbr(stuck, _config(T=1, K=3))
    assert any("ergodicity" in w for w in rec.warnings)


def test_rejects_non_zero_sum_game():
    P = np.ones((1, 2, 2, 1))
    R1 = np.array([[[1.0, 0.0], [0.0, 1.0]]])
    R2 = np.zeros((1, 2, 2))
    bad = z.validate_stochastic_game(P, R1, R2, gamma=0.5, require_zero_sum=False)
    with pytest.raises(z.NotZeroSum):
        z.run_visbr(bad, _config())
    with pytest.raises(z.NotZeroSum):
        z.init_visbr(bad, _config())
