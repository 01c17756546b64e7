"""Squeezed-cat and approximate GKP code states, logical operators, decay factors.

States are built from their position wavefunctions, which are sums of
Gaussians, projected onto the oscillator eigenfunctions on a fine grid. That
gives the exact number-basis coefficients below the truncation, with no
boundary artefacts from exponentiating truncated generators.

Conventions: ``x = (a + a^dag)/sqrt 2``; ``D(u + iv)`` shifts position by
``sqrt(2) u`` and momentum by ``sqrt(2) v``; real ``z > 0`` squeezes position.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import fock
from .errors import CombNotConverged, DegenerateInput, InvalidArgument, TruncationOverflow
from .fock import FockOperator, FockState

SQUARE_XI = float(np.sqrt(np.pi / 2))


@dataclass(frozen=True)
class ScParams:
    xi: float
    z: float

    def __post_init__(self):
        if not (np.isfinite(self.xi) and np.isfinite(self.z)):
            raise InvalidArgument("ScParams must be finite")
        if self.xi < 0:
            raise InvalidArgument("xi must be non-negative")

    def with_z(self, z: float) -> "ScParams":
        return ScParams(self.xi, z)


@dataclass(frozen=True)
class GkpParams:
    """Approximate GKP code on a rectangular lattice.

    ``xi`` is the position half-spacing (``sqrt(pi/2)`` for the square code);
    the momentum spacing is ``pi/xi``. ``comb_peaks=None`` picks enough peaks
    to cover the position range the truncation can see; ``comb_z=None`` uses
    ``-ln(delta_sq/10)/2``.
    """

    delta_sq: float
    xi: float = SQUARE_XI
    comb_peaks: int | None = None
    comb_z: float | None = None

    def __post_init__(self):
        if not self.delta_sq > 0:
            raise InvalidArgument("delta_sq must be positive")
        if not self.xi > 0:
            raise InvalidArgument("xi must be positive")
        if self.comb_peaks is not None and self.comb_peaks < 1:
            raise InvalidArgument("comb_peaks must be >= 1")

    @property
    def peak_z(self) -> float:
        return -0.5 * np.log(self.delta_sq / 10) if self.comb_z is None else self.comb_z

    def with_delta_sq(self, delta_sq: float) -> "GkpParams":
        return GkpParams(delta_sq, self.xi, self.comb_peaks, self.comb_z)


CodeParams = Union[ScParams, GkpParams]


@dataclass(frozen=True, eq=False)
class LogicalSet:
    x_op: FockOperator
    y_op: FockOperator
    z_op: FockOperator
    code: str

    def __iter__(self):
        return iter((self.x_op, self.y_op, self.z_op))


def _grid(dim: int, width: float, max_momentum: float = 0.0) -> np.ndarray:
    # eigenfunctions below `dim` are negligible beyond the outer turning point + 8
    reach = np.sqrt(2 * dim + 1) + 8
    dx = min(width / 6, 0.02, 0.2 / (max_momentum + 1))
    n = int(np.ceil(reach / dx))
    return np.arange(-n, n + 1) * dx


def _gaussian(x, center, z, momentum=0.0):
    s = np.exp(2 * z)
    return (s / np.pi) ** 0.25 * np.exp(-0.5 * s * (x - center) ** 2 + 1j * momentum * x)


def squeezed_coherent_coeffs(xi: complex, z: float, dim: int) -> np.ndarray:
    """Unnormalized number-basis coefficients of ``D(xi) S(z)|0>`` (real ``z``)."""
    xi = complex(xi)
    u, v = xi.real, xi.imag
    x = _grid(dim, np.exp(-z) / np.sqrt(2), np.sqrt(2) * abs(v))
    psi = np.exp(-1j * u * v) * _gaussian(x, np.sqrt(2) * u, z, np.sqrt(2) * v)
    return fock.wavefunction_to_fock(psi, x, dim)


def squeezed_coherent(xi: complex, z: float, dim: int, tol: float = 1e-6) -> FockState:
    """Normalized ``|xi, z> = D(xi) S(z)|0>``.

    Raises ``TruncationOverflow`` when the truncation keeps less than
    ``1 - tol`` of the norm.
    """
    if not (np.isfinite(complex(xi)) and np.isfinite(z)):
        raise InvalidArgument("xi and z must be finite")
    c = squeezed_coherent_coeffs(xi, z, dim)
    kept = float(np.vdot(c, c).real)
    if kept < 1 - tol:
        raise TruncationOverflow(f"dim={dim} loses {1 - kept:.2e} of the norm of |{xi},{z}>")
    return FockState.from_vector(c)


def sc_state(p: ScParams, mu: int, dim: int, tol: float = 1e-6) -> FockState:
    """Squeezed-cat code state ``(|xi,z> + (-1)^mu |-xi,z>)/N_sq`` with exact ``N_sq``."""
    if mu not in (0, 1):
        raise InvalidArgument("mu must be 0 or 1")
    plus = squeezed_coherent(p.xi, p.z, dim, tol).data
    minus = squeezed_coherent(-p.xi, p.z, dim, tol).data
    v = plus + (-1) ** mu * minus
    if np.vdot(v, v).real < 1e-10:
        raise DegenerateInput(f"sc_state with xi={p.xi}, mu={mu} is (numerically) the zero vector")
    return FockState.from_vector(v)


def _default_peaks(p: GkpParams, dim: int) -> int:
    reach = np.sqrt(2 * dim + 1) + 8
    spacing = 2 * np.sqrt(2) * p.xi
    return max(1, int(np.ceil(reach / spacing)) + 1)


def _gkp_coeffs(p: GkpParams, mu: int, dim: int, peaks: int) -> np.ndarray:
    z = p.peak_z
    centers = np.sqrt(2) * (2 * np.arange(-peaks, peaks + 1) + mu) * p.xi
    x = _grid(dim, np.exp(-z) / np.sqrt(2))
    s = np.exp(2 * z)
    psi = np.zeros_like(x, dtype=complex)
    for c in centers:
        psi += np.exp(-0.5 * s * (x - c) ** 2)
    psi *= (s / np.pi) ** 0.25
    c = fock.wavefunction_to_fock(psi, x, dim)
    return c * np.exp(-p.delta_sq * np.arange(dim))


def gkp_state(p: GkpParams, mu: int, dim: int, tol: float = 1e-6) -> FockState:
    """Approximate GKP state ``exp(-delta_sq n) sum_n |(2n+mu) xi, comb_z>``, normalized."""
    if mu not in (0, 1):
        raise InvalidArgument("mu must be 0 or 1")
    if np.exp(-2 * p.peak_z) > p.delta_sq / 10 * (1 + 1e-12):
        raise InvalidArgument("comb_z too small to emulate the ideal comb (need exp(-2 comb_z) <= delta_sq/10)")
    peaks = p.comb_peaks if p.comb_peaks is not None else _default_peaks(p, dim)
    c = _gkp_coeffs(p, mu, dim, peaks)
    c /= np.linalg.norm(c)
    more = _gkp_coeffs(p, mu, dim, peaks + 1)
    more /= np.linalg.norm(more)
    if np.linalg.norm(c - more) > 1e-8:
        raise CombNotConverged(f"adding a peak beyond {peaks} changes the state")
    top = max(1, dim // 10)
    tail = float(np.vdot(c[-top:], c[-top:]).real)
    if tail > tol:
        raise TruncationOverflow(f"dim={dim}: {tail:.2e} of the GKP norm sits in the top levels")
    return FockState.from_vector(c)


def code_state(p: CodeParams, mu: int, dim: int) -> FockState:
    if isinstance(p, ScParams):
        return sc_state(p, mu, dim)
    return gkp_state(p, mu, dim)


def logical_state(p: CodeParams, c0: complex, c1: complex, dim: int) -> FockState:
    """Normalized ``c0|0_L> + c1|1_L>`` from separately normalized code states."""
    v = c0 * code_state(p, 0, dim).data + c1 * code_state(p, 1, dim).data
    return FockState.from_vector(v)


def magic_state(p: CodeParams, dim: int) -> FockState:
    """``|A> ~ |0_L> + exp(i pi/4)|1_L>``."""
    return logical_state(p, 1.0, np.exp(1j * np.pi / 4), dim)


def ideal_bloch(c0: complex, c1: complex) -> np.ndarray:
    """Bloch vector (X, Y, Z) of the qubit state ``c0|0> + c1|1>``."""
    n = np.sqrt(abs(c0) ** 2 + abs(c1) ** 2)
    c0, c1 = c0 / n, c1 / n
    off = np.conj(c0) * c1
    return np.array([2 * off.real, 2 * off.imag, abs(c0) ** 2 - abs(c1) ** 2])


def logical_set(p: CodeParams, dim: int, method: str = "expm") -> LogicalSet:
    """Logical X, Y = iXZ and Z.

    Squeezed cat: ``X = -i D(i pi/(4 xi))``, ``Z = exp(i pi n)``.
    GKP: ``X = D(xi)``, ``Z = D(i pi/(2 xi))``.
    """
    if isinstance(p, ScParams):
        if p.xi <= 0:
            raise InvalidArgument("logical X of the squeezed cat needs xi > 0")
        x = -1j * fock.displacement(1j * np.pi / (4 * p.xi), dim, method)
        z = fock.rotation(np.pi, dim)
        code = "SC"
    else:
        x = fock.displacement(p.xi, dim, method)
        z = fock.displacement(1j * np.pi / (2 * p.xi), dim, method)
        code = "GKP"
    y = 1j * (x @ z)
    return LogicalSet(x, y, z, code)


def logical_expectations(state: FockState, logicals: LogicalSet) -> np.ndarray:
    """Real parts of the logical X, Y, Z expectations."""
    return np.array([complex(fock.expectation(state, op.matrix)).real for op in logicals])


def decay_factors(p: CodeParams) -> tuple[float, float, float]:
    """Finite-squeezing shrink factors of the logical X, Y, Z expectations."""
    if isinstance(p, ScParams):
        h = float(np.exp(-0.5 * (np.pi / (4 * p.xi)) ** 2 * np.exp(-2 * p.z)))
        return h, h, 1.0
    g1 = float(np.exp(-p.delta_sq * p.xi**2 / 2))
    g2 = float(np.exp(-p.delta_sq * p.xi**2))
    return g1, g2, g1
