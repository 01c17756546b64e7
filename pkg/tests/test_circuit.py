import numpy as np
import pytest
from hypothesis import given, strategies as st

from projsq import circuit as cc, codes, fock, projector as pj
from projsq.errors import InvalidArgument, PostselectAnnihilated
from projsq.fock import FockState

XI = codes.SQUARE_XI
unit = st.floats(0.05, 0.95)


@given(unit, st.sampled_from([1, -1]), st.sampled_from([0, 1]))
def test_ancilla_rotations_orthogonal(p0, sign, ps):
    for u in (cc.ancilla_prep(p0, sign), cc.ancilla_unprep(p0, sign, ps)):
        np.testing.assert_allclose(u @ u.T, np.eye(2), atol=1e-14)
    row = cc.ancilla_unprep(p0, sign, ps)[ps]
    np.testing.assert_allclose(row, [np.sqrt(p0), sign * np.sqrt(1 - p0)])


@given(unit, st.sampled_from([1, -1]))
def test_lcu_step_realizes_two_term_combination(p0, sign):
    n = 40
    psi = codes.squeezed_coherent(0.4, 0.2, n)
    D = fock.displacement(0.5j, n)
    h = cc.HybridState.product([1, 0], psi)
    ps = 0 if sign == 1 else 1
    try:
        out, prob = cc.lcu_step(h, 0.5j, sign, ps, p0, D)
    except PostselectAnnihilated:
        return
    target = p0 * psi.data + sign * (1 - p0) * (D.matrix @ psi.data)
    assert prob == pytest.approx(np.vdot(target, target).real, rel=1e-10)
    reg, _ = out.branch(0)
    assert fock.fidelity(reg, FockState.from_vector(target)) == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("code,M", [("SC", 2), ("GKP", 1)])
def test_lcu_matches_dense_product(code, M):
    n = 80
    st_ = codes.magic_state(codes.ScParams(XI, 1.0), n) if code == "SC" else codes.magic_state(codes.GkpParams(0.15), n)
    cfg = cc.LcuConfig(code, XI, 0.5, M)
    a, qa = cc.lcu_project(st_, cfg)
    b, qb = cc.dense_lcu_project(st_, cfg)
    assert 1 - fock.fidelity(a, b) < 1e-10
    assert qa == pytest.approx(qb, rel=1e-10)


def test_product_spec_reproduces_dense_product():
    cfg = cc.LcuConfig("SC", XI, 0.5, 3)
    n = 140
    Q = cc.q_product(cfg, n).matrix
    P = pj.assemble(cc.product_spec(cfg), n).matrix
    # the truncated expm products are only exact well inside the truncation
    np.testing.assert_allclose(P[:30, :30], Q[:30, :30], atol=1e-10)


def test_binomial_width_formulas():
    assert cc.binomial_width("SC", 0.5, 4, XI) == pytest.approx((np.pi / XI) ** 2 * 4 * 0.25)
    assert cc.binomial_width("GKP", 0.5, 3, XI) == pytest.approx(8 * np.pi * 3 * 0.25)
    M = cc.min_repetitions("SC", 0.5, 25.0)
    assert cc.binomial_width("SC", 0.5, M) >= 25.0 > cc.binomial_width("SC", 0.5, M - 1)


def test_lcu_config_validation():
    with pytest.raises(InvalidArgument):
        cc.LcuConfig("XX", XI)
    with pytest.raises(InvalidArgument):
        cc.LcuConfig("SC", XI, p0=1.0)
    with pytest.raises(InvalidArgument):
        cc.LcuConfig("SC", XI, M=-1)
    assert cc.LcuConfig("SC", XI).sign == -1 and cc.LcuConfig("GKP", XI).postselect == 0


@given(st.complex_numbers(max_magnitude=1.5), st.complex_numbers(max_magnitude=1.5))
def test_compensation_phase_composition(zl, zlp):
    n = 100
    phi = cc.compensation_phase(zl, zlp)
    lhs = (fock.displacement(zl - zlp, n) @ fock.displacement(zlp, n)).matrix[:12, :12]
    rhs = np.exp(1j * phi) * fock.displacement(zl, n).matrix[:12, :12]
    np.testing.assert_allclose(lhs, rhs, atol=1e-9)


@given(st.complex_numbers(max_magnitude=1.0), st.complex_numbers(max_magnitude=1.0))
def test_hadamard_test_reads_cross_term(zl, zlp):
    n = 60
    psi = codes.squeezed_coherent(0.3, 0.3, n)
    O = fock.number_op(n)
    em, emo, _ = cc.hadamard_test_exact(psi, zl, zlp, -1, O)
    a = fock.displacement(zl, n, "exact").matrix @ psi.data
    b = fock.displacement(zlp, n, "exact").matrix @ psi.data
    assert em == pytest.approx(-np.vdot(b, a).real, abs=1e-10)
    assert emo == pytest.approx(-np.vdot(b, O.matrix @ a).real, abs=1e-9)


def test_hadamard_expm_and_exact_agree_for_small_shifts():
    psi = codes.squeezed_coherent(0.2, 0.1, 80)
    e1 = cc.hadamard_test_exact(psi, 0.3j, -0.2, 1, None, "expm")
    e2 = cc.hadamard_test_exact(psi, 0.3j, -0.2, 1, None, "exact")
    np.testing.assert_allclose(e1[:2], e2[:2], atol=1e-10)


def test_hadamard_mixed_equals_pure():
    psi = codes.squeezed_coherent(0.2, 0.1, 40)
    O = fock.number_op(40)
    a = cc.hadamard_test_exact(psi, 0.4j, 0.1, 1, O)
    b = cc.hadamard_test_exact(psi.to_mixed(), 0.4j, 0.1, 1, O)
    np.testing.assert_allclose(a[:2], b[:2], atol=1e-12)
