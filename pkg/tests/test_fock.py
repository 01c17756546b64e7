import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import eval_genlaguerre, gammaln

from projsq import fock
from projsq.errors import DimensionMismatch, InvalidArgument, InvalidDimension
from projsq.fock import FockOperator, FockState

small = st.floats(-1.5, 1.5)


def disp_element(m, n, alpha):
    """Closed-form <m|D(alpha)|n> via associated Laguerre polynomials."""
    lo, hi = min(m, n), max(m, n)
    pre = np.exp(0.5 * (gammaln(lo + 1) - gammaln(hi + 1)) - abs(alpha) ** 2 / 2)
    shift = alpha if m >= n else -np.conj(alpha)
    return pre * shift ** (hi - lo) * eval_genlaguerre(lo, hi - lo, abs(alpha) ** 2)


def test_exact_displacement_matches_laguerre_closed_form():
    alpha = 1.3 - 0.7j
    D = fock.displacement(alpha, 12, "exact").matrix
    ref = np.array([[disp_element(m, n, alpha) for n in range(12)] for m in range(12)])
    np.testing.assert_allclose(D, ref, atol=1e-13)


def test_exact_elements_survive_large_displacement():
    # |alpha|^2 = 400 far beyond what a 60-level expm can represent
    alpha = 14.0 + 14.0j
    D = fock.displacement(alpha, 60, "exact").matrix
    for m, n in [(0, 0), (59, 0), (30, 40), (59, 59)]:
        assert D[m, n] == pytest.approx(disp_element(m, n, alpha), rel=1e-9, abs=1e-300)


def test_expm_and_exact_agree_on_low_block():
    D1 = fock.displacement(0.8j, 80).matrix[:20, :20]
    D2 = fock.displacement(0.8j, 80, "exact").matrix[:20, :20]
    np.testing.assert_allclose(D1, D2, atol=1e-12)


@given(small, small)
def test_displacement_is_unitary(u, v):
    D = fock.displacement(complex(u, v), 40)
    assert D.unitary
    assert D.unitarity_defect() < 1e-10


@given(small, small, small, small)
def test_composition_law(a1, a2, b1, b2):
    a, b = complex(a1, a2), complex(b1, b2)
    n = 90
    lhs = (fock.displacement(-a, n) @ fock.displacement(b, n)).matrix[:15, :15]
    rhs = np.exp(1j * np.imag(np.conj(a) * b)) * fock.displacement(b - a, n).matrix[:15, :15]
    np.testing.assert_allclose(lhs, rhs, atol=1e-10)


def test_displacement_shifts_quadratures():
    n = 80
    x, p = fock.quadratures(n)
    psi = fock.apply(fock.displacement(0.5 + 0.25j, n), FockState.vacuum(n))
    assert fock.expectation(psi, x) == pytest.approx(np.sqrt(2) * 0.5, abs=1e-12)
    assert fock.expectation(psi, p) == pytest.approx(np.sqrt(2) * 0.25, abs=1e-12)


@given(st.floats(-0.8, 0.8))
def test_squeezed_vacuum_variance(z):
    n = 120
    x, p = fock.quadratures(n)
    sv = fock.apply(fock.squeeze(z, n), FockState.vacuum(n))
    assert fock.expectation(sv, (x @ x).matrix) == pytest.approx(np.exp(-2 * z) / 2, rel=1e-8)
    assert fock.expectation(sv, (p @ p).matrix) == pytest.approx(np.exp(2 * z) / 2, rel=1e-8)


def test_characteristic_of_vacuum():
    alphas = np.array([0, 0.3, 1 + 1j, 5j])
    chi = fock.characteristic(FockState.vacuum(30), alphas)
    np.testing.assert_allclose(chi, np.exp(-np.abs(alphas) ** 2 / 2), atol=1e-14)


def test_displacement_sum_matches_dense():
    alphas = np.array([0.4, -0.4, 0.3j])
    c = np.array([0.5, 0.25, 0.25])
    dense = sum(ci * fock.displacement(a, 25, "exact").matrix for a, ci in zip(alphas, c))
    np.testing.assert_allclose(fock.displacement_sum(alphas, c, 25), dense, atol=1e-14)


def test_canonical_commutator_on_low_block():
    x, p = fock.quadratures(40)
    comm = x.matrix @ p.matrix - p.matrix @ x.matrix
    np.testing.assert_allclose(comm[:30, :30], 1j * np.eye(30), atol=1e-12)


def test_number_operator_and_rotation():
    n = fock.number_op(10)
    assert n.hermitian
    np.testing.assert_allclose(np.diag(n.matrix), np.arange(10))
    R = fock.rotation(np.pi, 10).matrix
    np.testing.assert_allclose(np.diag(R), (-1.0) ** np.arange(10), atol=1e-14)


def test_envelope_is_diagonal_decay():
    E = fock.envelope(0.1, 6).matrix
    np.testing.assert_allclose(np.diag(E), np.exp(-0.1 * np.arange(6)))


def test_state_constructors_and_checks():
    s = FockState.from_vector([3, 4])
    assert s.norm == pytest.approx(5)
    assert np.linalg.norm(s.data) == pytest.approx(1)
    assert FockState.basis(2, 5).data[2] == 1
    mixed = s.to_mixed()
    assert not mixed.is_pure
    assert fock.fidelity(s, mixed) == pytest.approx(1)
    assert s.padded(6).dim == 6
    s.check()
    with pytest.raises(InvalidDimension):
        FockState(np.zeros(1))
    with pytest.raises(InvalidDimension):
        FockOperator(np.zeros((2, 3)))


def test_invalid_arguments():
    with pytest.raises(InvalidArgument):
        fock.displacement(np.nan, 10)
    with pytest.raises(InvalidDimension):
        fock.number_op(1)
    with pytest.raises((DimensionMismatch, InvalidDimension)):
        fock.apply(fock.number_op(5), FockState.vacuum(6))


def test_fidelity_and_trace_distance(rng):
    a = FockState.from_vector(rng.normal(size=8) + 1j * rng.normal(size=8))
    b = FockState.from_vector(rng.normal(size=8) + 1j * rng.normal(size=8))
    f = fock.fidelity(a, b)
    assert f == pytest.approx(abs(np.vdot(a.data, b.data)) ** 2)
    # pure states: D = sqrt(1 - F)
    assert fock.trace_distance(a.density(), b.density()) == pytest.approx(np.sqrt(1 - f), abs=1e-10)


def test_hermite_functions_orthonormal():
    x = np.linspace(-12, 12, 4001)
    h = fock.hermite_functions(x, 20)
    gram = h @ h.T * (x[1] - x[0])
    np.testing.assert_allclose(gram, np.eye(20), atol=1e-10)


def test_vacuum_wavefunction_maps_to_ground_state():
    x = np.linspace(-10, 10, 2001)
    c = fock.wavefunction_to_fock(np.pi**-0.25 * np.exp(-x**2 / 2), x, 10)
    assert abs(c[0]) == pytest.approx(1, abs=1e-10)
    assert np.abs(c[1:]).max() < 1e-10


def test_truncation_delta_small_for_converged_builder():
    assert fock.truncation_delta(lambda n: fock.displacement(0.3, n), 40) < 1e-10
