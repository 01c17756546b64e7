"""Gaussian-smeared displacement-sum projectors and their projection probabilities.

A :class:`ProjectorSpec` is a finite, symmetric list of ``(weight, sign,
displacement)`` terms. The operator it stands for is
``P = sum_l w_l h_l D(zeta_l)``.

Projection probabilities ``q = Tr[P rho P^dag]`` are computed by composing
displacement pairs, ``D(-a) D(b) = exp(i Im(conj(a) b)) D(b - a)``, and then
evaluating the characteristic function of the input. That value is exact even
when ``P|psi>`` itself does not fit in the truncation.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import fock
from .errors import (
    InvalidArgument,
    ProjectionAnnihilated,
    QuadratureNotConverged,
    TruncationOverflow,
)
from .fock import FockOperator, FockState

TAIL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class ProjectorSpec:
    weights: np.ndarray
    signs: np.ndarray
    zetas: np.ndarray
    code: str
    gamma: tuple = ()
    xi: float | None = None
    cutoff: tuple = ()
    tail_tol: float = TAIL_TOL
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        s = np.asarray(self.signs, dtype=float)
        z = np.asarray(self.zetas, dtype=complex)
        if not (w.shape == s.shape == z.shape) or w.ndim != 1 or w.size == 0:
            raise InvalidArgument("weights, signs and zetas must be equal-length 1-D arrays")
        if np.any(w <= 0) or np.any(w > 1 + 1e-12):
            raise InvalidArgument("weights must lie in (0, 1]")
        if not np.all(np.isin(s, (-1.0, 1.0))):
            raise InvalidArgument("signs must be +1 or -1")
        for name, a in (("weights", w), ("signs", s), ("zetas", z)):
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    def __len__(self):
        return self.weights.size

    @property
    def terms(self) -> list[tuple[float, int, complex]]:
        return [(float(w), int(s), complex(z)) for w, s, z in zip(self.weights, self.signs, self.zetas)]

    @property
    def coefficients(self) -> np.ndarray:
        return self.weights * self.signs

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        order = np.lexsort((self.zetas.imag, self.zetas.real))
        rev = np.lexsort((-self.zetas.imag, -self.zetas.real))
        return bool(
            np.allclose(self.zetas[order], -self.zetas[rev], atol=tol)
            and np.allclose(self.weights[order], self.weights[rev], atol=tol)
            and np.array_equal(self.signs[order], self.signs[rev])
        )


@dataclass(frozen=True)
class RotationSpec:
    """Uniform average of ``rotation(2 pi k / order)``, k = 0..order-1."""

    order: int

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 1:
            raise InvalidArgument("rotation order must be an integer >= 1")

    @property
    def angles(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.order) / self.order

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.order, 1.0 / self.order)


def identity_spec() -> ProjectorSpec:
    return ProjectorSpec([1.0], [1.0], [0j], code="IDENTITY")


def gamma_from_dz(z: float, dz: float) -> float:
    """Smearing width for a squeezing increase ``dz``: ``exp(z) sqrt(exp(2 dz) - 1)``."""
    if not dz > 0:
        raise InvalidArgument("dz must be positive")
    return float(np.exp(z) * np.sqrt(np.expm1(2 * dz)))


def dz_from_gamma(z: float, gamma: float) -> float:
    return float(0.5 * np.log1p(gamma**2 * np.exp(-2 * z)))


def gamma0_from_s(delta_sq: float, s: float) -> float:
    """GKP smearing width ``sqrt((s - 1)/delta_sq)`` taking ``delta_sq -> delta_sq/s``."""
    if not s > 1:
        raise InvalidArgument("s must exceed 1")
    if not delta_sq > 0:
        raise InvalidArgument("delta_sq must be positive")
    return float(np.sqrt((s - 1) / delta_sq))


def _half_width(step: float, gamma: float, tail_tol: float) -> int:
    """Smallest L with the normalized Gaussian weight beyond |l| > L below tail_tol."""
    if gamma == 0:
        return 0
    ls = np.arange(0, 10_000)
    w = np.exp(-((step * ls) ** 2) / gamma**2)
    total = w[0] + 2 * w[1:].sum()
    kept = w[0] + 2 * np.concatenate([[0.0], np.cumsum(w[1:])])
    # tail[L] is the weight outside |l| <= L
    tail = total - kept
    ok = np.nonzero((tail / total < tail_tol) & (w > 0))[0]
    return int(ok[0]) if ok.size else ls[-1]


def _gauss_weights(step: float, gamma: float, half: int) -> tuple[np.ndarray, np.ndarray]:
    ls = np.arange(-half, half + 1)
    if gamma == 0:
        return ls, np.ones(1)
    w = np.exp(-((step * ls) ** 2) / gamma**2)
    return ls, w / w.sum()


def sc_spec(xi: float, gamma: float, tail_tol: float = TAIL_TOL) -> ProjectorSpec:
    """``sum_l p_l (-1)^l D(i pi l / (2 xi))`` with ``p_l ~ exp(-(pi l / 2 xi)^2 / gamma^2)``."""
    if not xi > 0 or gamma < 0:
        raise InvalidArgument("need xi > 0 and gamma >= 0")
    step = np.pi / (2 * xi)
    half = _half_width(step, gamma, tail_tol)
    ls, w = _gauss_weights(step, gamma, half)
    return ProjectorSpec(
        w, (-1.0) ** np.abs(ls), 1j * step * ls, code="SC", gamma=(gamma,), xi=xi, cutoff=(half,), tail_tol=tail_tol
    )


def gkp_spec(xi: float, gamma1: float, gamma2: float, tail_tol: float = TAIL_TOL) -> ProjectorSpec:
    """``sum p_{l1} p_{l2} D(2 xi l1 + i pi l2 / xi)``, separable Gaussian weights, signs +1."""
    if not xi > 0 or gamma1 < 0 or gamma2 < 0:
        raise InvalidArgument("need xi > 0 and non-negative widths")
    s1, s2 = 2 * xi, np.pi / xi
    h1 = _half_width(s1, gamma1, tail_tol / 2)
    h2 = _half_width(s2, gamma2, tail_tol / 2)
    l1, w1 = _gauss_weights(s1, gamma1, h1)
    l2, w2 = _gauss_weights(s2, gamma2, h2)
    L1, L2 = np.meshgrid(l1, l2, indexing="ij")
    w = np.outer(w1, w2).ravel()
    zetas = (s1 * L1 + 1j * s2 * L2).ravel()
    return ProjectorSpec(
        w, np.ones_like(w), zetas, code="GKP", gamma=(gamma1, gamma2), xi=xi, cutoff=(h1, h2), tail_tol=tail_tol
    )


def rotation_spec(order: int) -> RotationSpec:
    return RotationSpec(order)


def vacuum_spec(gamma: float, quad_points: int = 64) -> ProjectorSpec:
    """Gauss-Hermite discretization of ``int dy exp(-y^2/gamma^2) D(i y)``.

    The continuous projector smears along momentum, the direction in which a
    position-squeezed vacuum is (asymptotically) translation invariant.
    """
    if quad_points < 64:
        raise InvalidArgument("vacuum projector needs at least 64 quadrature points")
    if gamma == 0:
        return identity_spec()
    t, w = np.polynomial.hermite.hermgauss(quad_points)
    keep = w > 0
    w = w[keep] / w[keep].sum()
    return ProjectorSpec(
        w, np.ones_like(w), 1j * gamma * t[keep], code="VACUUM", gamma=(gamma,), cutoff=(quad_points,)
    )


def assemble(spec, dim: int) -> FockOperator:
    """Dense operator of a displacement or rotation spec."""
    if isinstance(spec, RotationSpec):
        m = sum(w * fock.rotation(a, dim).matrix for w, a in zip(spec.weights, spec.angles))
        return FockOperator(m, hermitian=True)
    m = fock.displacement_sum(spec.zetas, spec.coefficients, dim)
    # exact elements satisfy D(-z) = D(z)^dag, so symmetric specs are Hermitian
    return FockOperator(m, hermitian=spec.is_symmetric())


def pair_coefficients(spec: ProjectorSpec) -> tuple[np.ndarray, np.ndarray]:
    """Expand ``P^dag P = sum_k c_k D(lambda_k)`` over distinct ``lambda_k``."""
    c = spec.coefficients
    z = spec.zetas
    # D(-a) D(b) = exp(i Im(conj(a) b)) D(b - a)
    a, b = z[:, None], z[None, :]
    coef = (c[:, None] * c[None, :]) * np.exp(1j * np.imag(np.conj(a) * b))
    lam = (b - a).ravel()
    coef = coef.ravel()
    key = np.round(lam.real, 9) + 1j * np.round(lam.imag, 9)
    uniq, inv = np.unique(key, return_inverse=True)
    summed = np.zeros(uniq.size, complex)
    np.add.at(summed, inv.ravel(), coef)
    keep = np.abs(summed) > 1e-17
    return uniq[keep], summed[keep]


def projection_probability(state: FockState, spec) -> float:
    """``q = Tr[P rho P^dag]`` without truncating ``P rho P^dag``."""
    if isinstance(spec, RotationSpec):
        out = apply(spec, state)
        return out.norm**2 if out.is_pure else out.norm
    lam, coef = pair_coefficients(spec)
    return float(np.real(coef @ fock.characteristic(state, lam)))


def apply(spec, state: FockState) -> FockState:
    """Unnormalized ``P|psi>`` (or ``P rho P^dag``) on the state's truncation."""
    if state.is_pure and not isinstance(spec, RotationSpec):
        rows = fock.displaced_states(spec.zetas, state.data)
        v = spec.coefficients @ rows
        return FockState(v, float(np.linalg.norm(v)))
    return fock.apply(assemble(spec, state.dim), state)


def project(state: FockState, spec, leak_tol: float = 1e-4) -> tuple[FockState, float]:
    """Apply the projector and renormalize; returns ``(output, q)``.

    ``q`` is exact. If the truncated output keeps less than ``1 - leak_tol``
    of ``q`` the truncation is too small and ``TruncationOverflow`` is raised.
    """
    q = projection_probability(state, spec)
    if q < 1e-12:
        raise ProjectionAnnihilated(f"projection probability {q:.3e} is below 1e-12")
    out = apply(spec, state)
    kept = out.norm**2 if out.is_pure else out.norm
    if abs(kept / q - 1) > leak_tol:
        raise TruncationOverflow(f"projected state keeps {kept / q:.6f} of q at dim={state.dim}")
    return out.normalized(), q


def q_analytic_sc(dz: float) -> float:
    if dz < 0:
        raise InvalidArgument("dz must be non-negative")
    return float(np.exp(-dz))


def q_analytic_gkp(s: float) -> float:
    if s < 1:
        raise InvalidArgument("s must be >= 1")
    return 1.0 / s


def _pair_sum(step, gamma, decay, cutoff, tail_tol):
    """sum_{l,l'} w_l w_l' exp(-decay (l + l')^2) / (sum w)^2 for Gaussian w."""
    if gamma == 0:
        return 1.0
    half = _half_width(step, gamma, tail_tol) if cutoff is None else int(cutoff)
    ls, w = _gauss_weights(step, gamma, half)
    tot = ls[:, None] + ls[None, :]
    return float(w @ np.exp(-decay * tot**2) @ w)


def q_sum_sc(xi: float, gamma: float, z: float, cutoff: int | None = None, tail_tol: float = TAIL_TOL) -> float:
    """Lattice double sum for the squeezed-coherent projection probability."""
    step = np.pi / (2 * xi)
    return _pair_sum(step, gamma, 0.5 * np.exp(-2 * z) * step**2, cutoff, tail_tol)


def q_sum_gkp(xi: float, gamma0: float, delta_sq: float, cutoff: int | None = None, tail_tol: float = TAIL_TOL) -> float:
    """Square of the single-quadrature lattice sum for the GKP projection probability."""
    step = 2 * xi
    single = _pair_sum(step, gamma0, 2 * delta_sq * xi**2, cutoff, tail_tol)
    return single**2


@dataclass(frozen=True)
class ValidityReport:
    cond1: bool
    cond2: bool
    margin1: float
    margin2: float

    @property
    def ok(self) -> bool:
        return self.cond1 and self.cond2


def validity(xi: float, z: float, dz: float) -> ValidityReport:
    """Sum-to-integral conditions: ``e^{2z} >= (pi/2xi)^2`` and ``dz >= e^{-2z}(pi/2xi)^2/2``.

    Margins are the ratios left/right; a margin above one means the condition holds.
    """
    step_sq = (np.pi / (2 * xi)) ** 2
    m1 = np.exp(2 * z) / step_sq
    need = 0.5 * np.exp(-2 * z) * step_sq
    m2 = dz / need
    return ValidityReport(bool(m1 >= 1), bool(m2 >= 1), float(m1), float(m2))


def vacuum_project(
    state: FockState, gamma: float, quad_points: int = 64, tol: float = 1e-8, leak_tol: float = 1e-4
) -> tuple[FockState, float]:
    """Continuous Gaussian momentum smearing, via Gauss-Hermite quadrature.

    Raises ``QuadratureNotConverged`` if doubling the node count moves ``q``
    by more than ``tol``.
    """
    spec = vacuum_spec(gamma, quad_points)
    q = projection_probability(state, spec)
    q2 = projection_probability(state, vacuum_spec(gamma, 2 * quad_points))
    if abs(q - q2) > tol:
        raise QuadratureNotConverged(f"q changed by {abs(q - q2):.2e} on doubling nodes")
    out, _ = project(state, spec, leak_tol)
    return out, q


def envelope_from_displacements(delta_sq: float, dim: int, nodes: int = 40) -> np.ndarray:
    """``exp(-delta_sq n)`` rebuilt as a Gaussian integral over displacements.

    ``(pi (1 - e^{-d}))^{-1} int dX dY exp(-(X^2+Y^2)/(2 tanh(d/2))) D(X + iY)``
    evaluated with a tensor Gauss-Hermite rule. Used as a numerical cross-check.
    """
    sig2 = np.tanh(delta_sq / 2)
    t, w = np.polynomial.hermite.hermgauss(nodes)
    scale = np.sqrt(2 * sig2)
    X, Y = np.meshgrid(scale * t, scale * t, indexing="ij")
    W = np.outer(w, w) * scale**2
    pref = 1.0 / (np.pi * (1 - np.exp(-delta_sq)))
    return pref * fock.displacement_sum((X + 1j * Y).ravel(), W.ravel(), dim)
