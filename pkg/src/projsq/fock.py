"""Dense operators and states on a truncated single-mode Fock space.

Displacements can be built in two ways:

* ``method="expm"`` exponentiates the truncated anti-Hermitian generator.
  The result is unitary to machine precision and its low-energy block
  converges as the truncation grows.
* ``method="exact"`` fills the matrix with the matrix elements of the
  untruncated operator, evaluated with a forward recurrence on normalized
  associated Laguerre functions. The block is right for arbitrarily large
  displacements, but the truncated matrix is not unitary.

Smeared projectors contain displacements far larger than ``sqrt(dim)``, so the
projector code uses the exact elements; everything else defaults to ``expm``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

from .errors import DimensionMismatch, InvalidArgument, InvalidDimension, Unsupported

__all__ = [
    "FockOperator",
    "FockState",
    "ladder",
    "number_op",
    "quadratures",
    "displacement",
    "squeeze",
    "rotation",
    "envelope",
    "expectation",
    "fidelity",
    "trace_distance",
    "characteristic",
    "displaced_states",
    "displacement_sum",
    "hermite_functions",
    "wavefunction_to_fock",
    "truncation_delta",
]

UNITARY_TOL = 1e-10


def _check_dim(dim) -> int:
    if int(dim) != dim or dim < 2:
        raise InvalidDimension(f"truncation dimension must be an integer >= 2, got {dim!r}")
    return int(dim)


def _check_finite(*values):
    for v in values:
        if not np.all(np.isfinite(v)):
            raise InvalidArgument(f"non-finite argument {v!r}")


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FockOperator:
    """Square complex matrix in the number basis, plus what we know about it."""

    matrix: np.ndarray
    unitary: bool = False
    hermitian: bool = False

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidDimension(f"operator must be square, got shape {m.shape}")
        _check_dim(m.shape[0])
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dag(self) -> "FockOperator":
        return FockOperator(self.matrix.conj().T, self.unitary, self.hermitian)

    def __matmul__(self, other):
        if isinstance(other, FockOperator):
            _match(self.dim, other.dim)
            return FockOperator(self.matrix @ other.matrix, self.unitary and other.unitary)
        return NotImplemented

    def __mul__(self, c):
        c = complex(c)
        herm = self.hermitian and c.imag == 0
        return FockOperator(c * self.matrix, self.unitary and abs(abs(c) - 1) < 1e-15, herm)

    __rmul__ = __mul__

    def hermitian_part(self) -> "FockOperator":
        return FockOperator(0.5 * (self.matrix + self.matrix.conj().T), hermitian=True)

    def unitarity_defect(self) -> float:
        m = self.matrix
        return float(np.abs(m.conj().T @ m - np.eye(self.dim)).max())


@dataclass(frozen=True, eq=False)
class FockState:
    """Pure state (vector) or density matrix on the truncated space.

    ``norm`` holds the norm (pure) or trace (mixed) of ``data`` as passed in,
    i.e. before any normalization done by :meth:`normalized`.
    """

    data: np.ndarray
    norm: float = 1.0

    def __post_init__(self):
        d = np.asarray(self.data)
        if d.ndim == 2 and d.shape[0] != d.shape[1]:
            raise InvalidDimension(f"density matrix must be square, got {d.shape}")
        if d.ndim not in (1, 2):
            raise InvalidDimension("state data must be a vector or a square matrix")
        _check_dim(d.shape[0])
        object.__setattr__(self, "data", _frozen(d))

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def kind(self) -> str:
        return "pure" if self.data.ndim == 1 else "mixed"

    @property
    def is_pure(self) -> bool:
        return self.data.ndim == 1

    @classmethod
    def from_vector(cls, vec, normalize=True) -> "FockState":
        vec = np.asarray(vec, dtype=complex)
        nrm = float(np.linalg.norm(vec))
        if normalize:
            if nrm == 0:
                raise InvalidArgument("cannot normalize the zero vector")
            vec = vec / nrm
        return cls(vec, nrm)

    @classmethod
    def from_density(cls, rho, normalize=True) -> "FockState":
        rho = np.asarray(rho, dtype=complex)
        tr = float(np.trace(rho).real)
        if normalize:
            if tr <= 0:
                raise InvalidArgument("density matrix has non-positive trace")
            rho = rho / tr
        return cls(rho, tr)

    @classmethod
    def basis(cls, n: int, dim: int) -> "FockState":
        dim = _check_dim(dim)
        if not 0 <= n < dim:
            raise InvalidArgument(f"level {n} outside truncation {dim}")
        v = np.zeros(dim, complex)
        v[n] = 1
        return cls(v)

    @classmethod
    def vacuum(cls, dim: int) -> "FockState":
        return cls.basis(0, dim)

    def normalized(self) -> "FockState":
        if self.is_pure:
            return FockState.from_vector(self.data)
        return FockState.from_density(self.data)

    def density(self) -> np.ndarray:
        if self.is_pure:
            return np.outer(self.data, self.data.conj())
        return np.array(self.data)

    def to_mixed(self) -> "FockState":
        return FockState(self.density(), self.norm)

    def padded(self, dim: int) -> "FockState":
        """Embed into a larger truncation (zero amplitude on new levels)."""
        if dim < self.dim:
            raise InvalidDimension("padding cannot shrink a state")
        if self.is_pure:
            v = np.zeros(dim, complex)
            v[: self.dim] = self.data
        else:
            v = np.zeros((dim, dim), complex)
            v[: self.dim, : self.dim] = self.data
        return FockState(v, self.norm)

    def check(self, tol: float = 1e-10, eig_floor: float = -1e-8) -> None:
        """Raise ``InvalidArgument`` if the normalization invariants fail."""
        if self.is_pure:
            if abs(np.linalg.norm(self.data) - 1) > tol:
                raise InvalidArgument("pure state is not normalized")
            return
        rho = self.data
        if abs(np.trace(rho) - 1) > tol:
            raise InvalidArgument("density matrix trace differs from 1")
        if np.abs(rho - rho.conj().T).max() > tol:
            raise InvalidArgument("density matrix is not Hermitian")
        if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < eig_floor:
            raise InvalidArgument("density matrix has negative eigenvalues")


def _match(d1: int, d2: int):
    if d1 != d2:
        raise DimensionMismatch(f"dimension mismatch: {d1} vs {d2}")


def _mat(op) -> np.ndarray:
    return op.matrix if isinstance(op, FockOperator) else np.asarray(op, dtype=complex)


def ladder(dim: int) -> tuple[FockOperator, FockOperator]:
    """Annihilation and creation operators, ``<n-1|a|n> = sqrt(n)``."""
    dim = _check_dim(dim)
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1)
    return FockOperator(a), FockOperator(a.T)


def number_op(dim: int) -> FockOperator:
    dim = _check_dim(dim)
    return FockOperator(np.diag(np.arange(dim, dtype=float)), hermitian=True)


def quadratures(dim: int) -> tuple[FockOperator, FockOperator]:
    """Position ``(a + a^dag)/sqrt 2`` and momentum ``(a - a^dag)/(sqrt 2 i)``."""
    a, ad = ladder(dim)
    x = (a.matrix + ad.matrix) / np.sqrt(2)
    p = (a.matrix - ad.matrix) / (np.sqrt(2) * 1j)
    return FockOperator(x, hermitian=True), FockOperator(p, hermitian=True)


def _laguerre_diagonals(alphas, dim: int) -> Iterator[tuple[int, np.ndarray, np.ndarray]]:
    """Walk the exact displacement matrix elements column by column.

    At step ``n`` yields ``(n, lower, upper)`` with, for every displacement
    ``b`` and offset ``k``, ``lower[b, k] = <n+k|D|n>`` and
    ``upper[b, k] = <n|D|n+k>``. Entries with ``n + k >= dim`` are junk and
    must be ignored by the caller.

    The normalized Laguerre functions ``f_n^k`` are bounded by one and the
    forward recurrence in ``n`` only ever moves from a classically forbidden
    region into the oscillating one, which keeps it stable. A per-entry log
    scale absorbs underflow of the starting values at large ``|alpha|``.
    """
    alphas = np.atleast_1d(np.asarray(alphas, dtype=complex))
    x = (np.abs(alphas) ** 2)[:, None]
    k = np.arange(dim)
    r = np.abs(alphas)
    logr = np.log(np.where(r > 0, r, 1.0))
    logf0 = -0.5 * x + k[None, :] * logr[:, None] - 0.5 * gammaln(k + 1)[None, :]
    zero = (r == 0)[:, None] & (k[None, :] > 0)
    shift = np.where(zero, 0.0, np.minimum(logf0, 0.0))
    f = np.where(zero, 0.0, np.exp(np.where(zero, 0.0, logf0 - shift)))
    f_prev = np.zeros_like(f)
    phase = np.exp(1j * k[None, :] * np.angle(alphas)[:, None])
    phase_up = ((-1.0) ** k)[None, :] * phase.conj()
    rescale = 1e150
    for n in range(dim):
        val = f * np.exp(shift)
        yield n, phase * val, phase_up * val
        f_new = ((2 * n + k + 1 - x) * f - np.sqrt(n * (n + k)) * f_prev) / np.sqrt(
            (n + 1) * (n + k + 1)
        )
        f_prev, f = f, f_new
        big = np.abs(f) > rescale
        if big.any():
            f = np.where(big, f / rescale, f)
            f_prev = np.where(big, f_prev / rescale, f_prev)
            shift = np.where(big, shift + np.log(rescale), shift)


def displacement_sum(alphas, coeffs, dim: int) -> np.ndarray:
    """Matrix of ``sum_b coeffs[b] D(alphas[b])`` from exact matrix elements."""
    dim = _check_dim(dim)
    alphas = np.atleast_1d(np.asarray(alphas, dtype=complex))
    coeffs = np.atleast_1d(np.asarray(coeffs, dtype=complex))
    out = np.zeros((dim, dim), complex)
    idx = np.arange(dim)
    for n, lower, upper in _laguerre_diagonals(alphas, dim):
        kk = dim - n
        out[n + idx[:kk], n] = coeffs @ lower[:, :kk]
        out[n, n + idx[1:kk]] = coeffs @ upper[:, 1:kk]
    return out


def displaced_states(alphas, vec) -> np.ndarray:
    """Rows ``D(alphas[b]) @ vec`` using exact matrix elements, shape (B, dim)."""
    vec = np.asarray(vec, dtype=complex)
    dim = _check_dim(vec.shape[0])
    alphas = np.atleast_1d(np.asarray(alphas, dtype=complex))
    out = np.zeros((alphas.size, dim), complex)
    for n, lower, upper in _laguerre_diagonals(alphas, dim):
        kk = dim - n
        out[:, n:] += lower[:, :kk] * vec[n]
        if kk > 1:
            out[:, n] += upper[:, 1:kk] @ vec[n + 1 :]
    return out


def characteristic(state: FockState, alphas) -> np.ndarray:
    """``Tr[D(alpha) rho]`` for many displacements at once (exact elements)."""
    alphas = np.atleast_1d(np.asarray(alphas, dtype=complex))
    dim = state.dim
    out = np.zeros(alphas.size, complex)
    d = state.data
    for n, lower, upper in _laguerre_diagonals(alphas, dim):
        kk = dim - n
        if state.is_pure:
            # rho[n, n+k] = psi_n conj(psi_{n+k})
            below = d[n] * d[n:].conj()
            above = d[n:] * np.conj(d[n])
        else:
            below = d[n, n:]
            above = d[n:, n]
        out += lower[:, :kk] @ below
        if kk > 1:
            out += upper[:, 1:kk] @ above[1:]
    return out


def displacement(zeta: complex, dim: int, method: str = "expm") -> FockOperator:
    """``D(zeta) = exp(zeta a^dag - conj(zeta) a)`` on ``dim`` levels."""
    dim = _check_dim(dim)
    _check_finite(zeta)
    zeta = complex(zeta)
    if method == "expm":
        a, ad = ladder(dim)
        gen = zeta * ad.matrix - np.conj(zeta) * a.matrix
        return FockOperator(expm(gen), unitary=True)
    if method == "exact":
        return FockOperator(displacement_sum([zeta], [1.0], dim))
    raise InvalidArgument(f"unknown displacement method {method!r}")


def squeeze(z: complex, dim: int) -> FockOperator:
    """``S(z) = exp((conj(z) a^2 - z a^dag^2)/2)``; real ``z > 0`` squeezes position."""
    dim = _check_dim(dim)
    _check_finite(z)
    a, ad = ladder(dim)
    gen = 0.5 * (np.conj(z) * (a.matrix @ a.matrix) - z * (ad.matrix @ ad.matrix))
    return FockOperator(expm(gen), unitary=True)


def rotation(theta: float, dim: int) -> FockOperator:
    """Phase-space rotation ``exp(i theta a^dag a)``; ``theta = pi`` is parity."""
    dim = _check_dim(dim)
    _check_finite(theta)
    n = np.arange(dim)
    diag = np.exp(1j * theta * n)
    # exact signs for multiples of pi/2 avoid 1e-16 residues in parity checks
    q = theta / (np.pi / 2)
    if abs(q - round(q)) < 1e-15:
        diag = (1j) ** ((round(q) * n) % 4)
    herm = bool(np.allclose(diag.imag, 0))
    return FockOperator(np.diag(diag), unitary=True, hermitian=herm)


def envelope(delta_sq: float, dim: int) -> FockOperator:
    """Diagonal damping ``exp(-delta_sq a^dag a)`` (not unitary)."""
    dim = _check_dim(dim)
    _check_finite(delta_sq)
    if delta_sq < 0:
        raise InvalidArgument("envelope parameter must be non-negative")
    return FockOperator(np.diag(np.exp(-delta_sq * np.arange(dim))), hermitian=True)


def apply(op, state: FockState) -> FockState:
    """``O|psi>`` or ``O rho O^dag``, unnormalized (``norm`` records the result)."""
    m = _mat(op)
    _match(m.shape[0], state.dim)
    if state.is_pure:
        v = m @ state.data
        return FockState(v, float(np.linalg.norm(v)))
    r = m @ state.data @ m.conj().T
    return FockState(r, float(np.trace(r).real))


def expectation(state: FockState, op) -> complex | float:
    """``<psi|O|psi>`` or ``Tr[O rho]``.

    For an operator flagged Hermitian the real part is returned; the dropped
    imaginary residue is available from :func:`expectation_residue`.
    """
    m = _mat(op)
    _match(m.shape[0], state.dim)
    if state.is_pure:
        val = complex(np.vdot(state.data, m @ state.data))
    else:
        val = complex(np.einsum("ij,ji->", m, state.data))
    if isinstance(op, FockOperator) and op.hermitian:
        return val.real
    return val


def expectation_residue(state: FockState, op) -> float:
    return abs(complex(expectation(state, _mat(op))).imag)


def fidelity(s1: FockState, s2: FockState) -> float:
    """``|<psi|phi>|^2`` or ``<psi|rho|psi>``; mixed-mixed is not supported."""
    _match(s1.dim, s2.dim)
    if s1.is_pure and s2.is_pure:
        val = abs(np.vdot(s1.data, s2.data)) ** 2
    elif s1.is_pure or s2.is_pure:
        pure, mixed = (s1, s2) if s1.is_pure else (s2, s1)
        val = np.vdot(pure.data, mixed.data @ pure.data).real
    else:
        raise Unsupported("fidelity between two mixed states is not implemented")
    return float(min(max(val, 0.0), 1.0))


def trace_distance(rho, sigma) -> float:
    r = rho.density() if isinstance(rho, FockState) else np.asarray(rho)
    s = sigma.density() if isinstance(sigma, FockState) else np.asarray(sigma)
    diff = r - s
    return float(0.5 * np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T))).sum())


def hermite_functions(x: np.ndarray, dim: int) -> np.ndarray:
    """Oscillator eigenfunctions ``<x|n>`` for ``n < dim``, shape (dim, len(x))."""
    x = np.asarray(x, dtype=float)
    out = np.empty((dim, x.size))
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * x**2)
    if dim > 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for n in range(1, dim - 1):
        out[n + 1] = np.sqrt(2.0 / (n + 1)) * x * out[n] - np.sqrt(n / (n + 1)) * out[n - 1]
    return out


def wavefunction_to_fock(psi_x: np.ndarray, x: np.ndarray, dim: int) -> np.ndarray:
    """Number-basis coefficients of a position wavefunction on a uniform grid."""
    dim = _check_dim(dim)
    dx = x[1] - x[0]
    return hermite_functions(x, dim) @ np.asarray(psi_x, dtype=complex) * dx


def truncation_delta(builder: Callable[[int], FockOperator], dim: int, support: int | None = None) -> float:
    """Max change of low-energy matrix columns when the truncation is doubled.

    Compares columns ``n < support`` (default ``dim // 2``) of ``builder(dim)``
    with the top-left block of ``builder(2 * dim)``.
    """
    support = dim // 2 if support is None else support
    small = _mat(builder(dim))
    big = _mat(builder(2 * dim))[:dim, :dim]
    return float(np.abs(small[:, :support] - big[:, :support]).max())
