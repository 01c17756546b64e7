import numpy as np
import pytest
from hypothesis import given, strategies as st

from projsq import codes, fock, noise, projector as pj, sampler as sm
from projsq.errors import DenominatorDegenerate, InvalidArgument

XI = codes.SQUARE_XI
Z = 1.0


@pytest.fixture(scope="module")
def setup():
    p = codes.ScParams(XI, Z)
    n = 100
    state = codes.magic_state(p, n)
    spec = pj.sc_spec(XI, pj.gamma_from_dz(Z, 0.4))
    obs = codes.logical_set(p, n).x_op
    return state, spec, obs


def direct(state, spec, obs):
    out = pj.apply(spec, state)
    o = obs.hermitian_part().matrix
    return np.vdot(out.data, o @ out.data).real / out.norm**2


def test_same_seed_same_result(setup):
    state, spec, obs = setup
    plan = sm.VqedPlan(state, [spec], obs, shots=6000, seed=3)
    assert sm.run_vqed(plan) == sm.run_vqed(plan)
    assert sm.run_vqed(plan.with_(seed=4)) != sm.run_vqed(plan)


def test_blocks_make_results_prefix_stable(setup):
    state, spec, obs = setup
    m1, _ = sm.sample_values(sm.VqedPlan(state, [spec], obs, shots=sm.BLOCK, seed=9))
    m2, _ = sm.sample_values(sm.VqedPlan(state, [spec], obs, shots=sm.BLOCK + 500, seed=9))
    np.testing.assert_array_equal(m1, m2[: sm.BLOCK])


def test_enumeration_is_exact(setup):
    state, spec, obs = setup
    small = pj.sc_spec(XI, pj.gamma_from_dz(Z, 0.4), tail_tol=1e-4)
    em, emo = sm.enumerate_vqed(sm.VqedPlan(state, [small], obs))
    out = pj.apply(small, state)
    assert em == pytest.approx(out.norm**2, rel=1e-8)
    assert emo / em == pytest.approx(direct(state, small, obs), rel=1e-8)


def test_fast_and_general_engines_agree_in_exact_mode(setup):
    state, spec, obs = setup
    small = pj.sc_spec(XI, pj.gamma_from_dz(Z, 0.4), tail_tol=1e-4)
    a = sm.run_vqed(sm.VqedPlan(state, [small], obs, shots=300, seed=1, mode="exact"))
    b = sm.run_vqed(sm.VqedPlan(state.to_mixed(), [small], obs, shots=300, seed=1, mode="exact"))
    assert a.mean_m == pytest.approx(b.mean_m, abs=1e-10)
    assert a.ratio == pytest.approx(b.ratio, abs=1e-10)


def test_unbiased_at_moderate_shots(setup):
    state, spec, obs = setup
    r = sm.run_vqed(sm.VqedPlan(state, [spec], obs, shots=40_000, seed=21))
    assert abs(r.ratio - direct(state, spec, obs)) < 4 * r.stderr_ratio
    q = pj.projection_probability(state, spec)
    assert abs(r.mean_m - q) < 4 * r.stderr_m


def test_two_insertions_match_sequential_projection(setup):
    state, _, obs = setup
    s1 = pj.sc_spec(XI, pj.gamma_from_dz(Z, 0.2), tail_tol=1e-3)
    em, emo = sm.enumerate_vqed(sm.VqedPlan(state, [s1, s1], obs))
    once = pj.apply(s1, state)
    twice = pj.apply(s1, once)
    assert em == pytest.approx(np.linalg.norm(twice.data) ** 2, rel=1e-6)
    assert emo / em == pytest.approx(direct(once.normalized(), s1, obs), rel=1e-6)


def test_summarize_delta_method():
    m = np.array([1.0, 1.0, -1.0, 1.0])
    mo = np.array([0.5, 1.0, -0.5, 0.0])
    r = sm.summarize(m, mo)
    assert r.mean_m == 0.5 and r.ratio == pytest.approx(0.25 / 0.5)
    c = np.cov(m, mo)
    want = (c[1, 1] - 2 * r.ratio * c[0, 1] + r.ratio**2 * c[0, 0]) / (0.25 * 4)
    assert r.var_ratio == pytest.approx(want)
    assert r.empirical_overhead == pytest.approx(4 * want)


def test_degenerate_denominator_withholds_ratio():
    spec = pj.ProjectorSpec([0.5, 0.5], [1.0, -1.0], [0j, 0j], code="TEST")
    plan = sm.VqedPlan(fock.FockState.vacuum(5), [spec], fock.number_op(5), shots=100)
    with pytest.raises(DenominatorDegenerate) as exc:
        sm.run_vqed(plan)
    assert np.isnan(exc.value.result.ratio)


def test_plan_validation(setup):
    state, spec, obs = setup
    with pytest.raises(InvalidArgument):
        sm.VqedPlan(state, [], obs)
    with pytest.raises(InvalidArgument):
        sm.VqedPlan(state, [spec], obs, shots=0)
    with pytest.raises(InvalidArgument):
        sm.VqedPlan(state, [spec], obs, mode="fast")


@given(st.floats(0.0, 0.5), st.floats(0.0, 0.3))
def test_compensated_table_properties(g1, g2):
    spec = pj.sc_spec(XI, 2.0, tail_tol=1e-6)
    e = noise.decay_table(spec.zetas, noise.AncillaNoise(g1, g2))
    table, R = sm.noise_compensated_probs(spec, e)
    assert table.sum() == pytest.approx(1)
    assert R >= 1 - 1e-12
    # reweighting by 1/e undoes the decay exactly in expectation
    np.testing.assert_allclose(table * e * R, np.outer(spec.weights, spec.weights), atol=1e-14)


def test_noise_compensation_accepts_callable():
    spec = pj.sc_spec(XI, 2.0, tail_tol=1e-6)
    t1, r1 = sm.noise_compensated_probs(spec, lambda i, j: 1.0)
    assert r1 == pytest.approx(1)
    with pytest.raises(InvalidArgument):
        sm.noise_compensated_probs(spec, np.zeros((2, 2)))


def test_overhead_report():
    r = sm.summarize(np.ones(10), np.linspace(0, 1, 10))
    rep = sm.overhead(r, 0.5)
    assert rep.predicted == 4 and rep.ratio == pytest.approx(rep.per_shot_variance / 4)
    with pytest.raises(InvalidArgument):
        sm.overhead(r, 0)


def test_sample_pair_phase():
    spec = pj.sc_spec(XI, 2.0)
    l, lp, sign, phase = sm.sample_pair(spec, np.random.default_rng(0))
    assert sign == spec.signs[l] * spec.signs[lp]
    assert abs(phase) == pytest.approx(1)
