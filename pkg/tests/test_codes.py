import numpy as np
import pytest
from hypothesis import given, strategies as st

from projsq import codes, fock
from projsq.errors import InvalidArgument

XI = codes.SQUARE_XI


@given(st.floats(-1.5, 1.5), st.floats(0.0, 1.0))
def test_squeezed_coherent_moments(xi, z):
    n = 120
    s = codes.squeezed_coherent(xi, z, n)
    x, _ = fock.quadratures(n)
    assert fock.expectation(s, x) == pytest.approx(np.sqrt(2) * xi, abs=1e-8)
    var = fock.expectation(s, (x @ x).matrix) - fock.expectation(s, x) ** 2
    assert var == pytest.approx(np.exp(-2 * z) / 2, rel=1e-6)


@given(st.floats(-1.0, 1.0), st.floats(0.0, 1.2), st.floats(-2.0, 2.0))
def test_momentum_displacement_characteristic(xi, z, y):
    # <xi,z| D(iy) |xi,z> = exp(2i xi y) exp(-y^2 e^{-2z} / 2)
    s = codes.squeezed_coherent(xi, z, 120)
    got = fock.characteristic(s, [1j * y])[0]
    want = np.exp(2j * xi * y) * np.exp(-(y**2) * np.exp(-2 * z) / 2)
    assert got == pytest.approx(want, abs=1e-8)


def test_ideal_bloch():
    np.testing.assert_allclose(codes.ideal_bloch(1, 0), [0, 0, 1])
    np.testing.assert_allclose(codes.ideal_bloch(1, 1j), [0, 1, 0], atol=1e-15)
    r = 1 / np.sqrt(2)
    np.testing.assert_allclose(codes.ideal_bloch(1, np.exp(1j * np.pi / 4)), [r, r, 0], atol=1e-15)


@given(st.complex_numbers(max_magnitude=2), st.complex_numbers(max_magnitude=2))
def test_ideal_bloch_unit_length(a, b):
    if abs(a) + abs(b) < 1e-3:
        return
    assert np.linalg.norm(codes.ideal_bloch(a, b)) == pytest.approx(1)


def test_decay_factors_frozen():
    h, hy, hz = codes.decay_factors(codes.ScParams(XI, 1.0))
    assert h == hy == pytest.approx(np.exp(-0.5 * (np.pi / (4 * XI)) ** 2 * np.exp(-2)))
    assert hz == 1.0
    g = codes.decay_factors(codes.GkpParams(0.05))
    assert g == pytest.approx((np.exp(-0.05 * np.pi / 4), np.exp(-0.05 * np.pi / 2), np.exp(-0.05 * np.pi / 4)))


def test_sc_code_states_orthogonal_and_parity():
    p = codes.ScParams(XI, 1.0)
    s0, s1 = codes.sc_state(p, 0, 120), codes.sc_state(p, 1, 120)
    assert abs(np.vdot(s0.data, s1.data)) < 1e-6
    par = fock.rotation(np.pi, 120).matrix
    assert fock.expectation(s0, par) == pytest.approx(1, abs=1e-6)
    assert fock.expectation(s1, par) == pytest.approx(-1, abs=1e-6)


def test_sc_logical_expectations_follow_decay():
    p = codes.ScParams(XI, 1.2)
    L = codes.logical_set(p, 150)
    plus = codes.logical_state(p, 1, 1, 150)
    h, _, _ = codes.decay_factors(p)
    e = codes.logical_expectations(plus, L)
    assert e[0] == pytest.approx(h, rel=2e-3)
    assert abs(e[2]) < 1e-6


def test_gkp_zero_state_stabilized():
    p = codes.GkpParams(0.1)
    n = 200
    s = codes.gkp_state(p, 0, n)
    zl = codes.logical_set(p, n).z_op
    gx, _, gz = codes.decay_factors(p)
    # |0_L> is the +1 eigenstate of logical Z up to the envelope
    assert fock.expectation(s, zl.matrix).real == pytest.approx(gz, rel=0.02)


def test_magic_state_normalized():
    m = codes.magic_state(codes.ScParams(XI, 1.0), 100)
    assert np.linalg.norm(m.data) == pytest.approx(1)


def test_logical_y_is_ixz():
    L = codes.logical_set(codes.GkpParams(0.1), 40)
    np.testing.assert_allclose(L.y_op.matrix, 1j * L.x_op.matrix @ L.z_op.matrix)


def test_invalid_params():
    with pytest.raises(InvalidArgument):
        codes.GkpParams(0)
    with pytest.raises(InvalidArgument):
        codes.ScParams(-1, 0)
    with pytest.raises(InvalidArgument):
        codes.ScParams(np.inf, 0)


def test_with_helpers():
    assert codes.ScParams(1, 0.5).with_z(1.0).z == 1.0
    g = codes.GkpParams(0.1, comb_z=2.0).with_delta_sq(0.05)
    assert g.delta_sq == 0.05 and g.peak_z == 2.0
    assert codes.GkpParams(0.1).peak_z == pytest.approx(-0.5 * np.log(0.01))
