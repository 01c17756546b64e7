"""Photon loss on the oscillator and T1/T2 decay of the Hadamard-test ancilla."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, xlogy

from . import fock
from .circuit import ancilla_x_expectations, hadamard_circuit
from .errors import InvalidArgument, StepControlFailure
from .fock import FockState


@dataclass(frozen=True)
class LossParams:
    gamma_t: float

    def __post_init__(self):
        if not (np.isfinite(self.gamma_t) and self.gamma_t >= 0):
            raise InvalidArgument("gamma_t must be finite and non-negative")

    @property
    def eta(self) -> float:
        """Surviving amplitude-squared fraction ``exp(-gamma t)``."""
        return float(np.exp(-self.gamma_t))


@dataclass(frozen=True)
class AncillaNoise:
    gamma1: float = 0.0
    gamma2: float = 0.0
    time_per_unit_displacement: float = 1.0

    def __post_init__(self):
        if self.gamma1 < 0 or self.gamma2 < 0:
            raise InvalidArgument("decay rates must be non-negative")
        if not self.time_per_unit_displacement > 0:
            raise InvalidArgument("time_per_unit_displacement must be positive")

    @property
    def rate(self) -> float:
        return self.gamma1 / 2 + 2 * self.gamma2


def _kraus_amplitudes(gamma_t: float, dim: int) -> np.ndarray:
    """``amp[k, m] = sqrt(C(m, k) (1-eta)^k eta^(m-k))`` for ``m >= k``, else 0, with ``eta = exp(-gamma t)``."""
    m = np.arange(dim)[None, :]
    k = np.arange(dim)[:, None]
    ok = m >= k
    mk = np.where(ok, m - k, 0)
    logc = gammaln(m + 1) - gammaln(k + 1) - gammaln(mk + 1)
    # xlogy keeps 0 * log(0) = 0 when gamma_t underflows 1 - eta
    lg = 0.5 * (logc + xlogy(k, -np.expm1(-gamma_t)) - mk * gamma_t)
    return np.where(ok, np.exp(lg), 0.0)


def loss_kraus(rho: np.ndarray, gamma_t: float) -> np.ndarray:
    """Amplitude damping ``sum_k A_k rho A_k^dag`` with ``A_k |m> ~ |m - k>``."""
    rho = np.asarray(rho, dtype=complex)
    if gamma_t == 0:
        return np.array(rho)
    dim = rho.shape[0]
    amp = _kraus_amplitudes(float(gamma_t), dim)
    out = np.zeros_like(rho)
    for k in range(dim):
        a = amp[k, k:]
        if not a.any():
            continue
        out[: dim - k, : dim - k] += np.outer(a, a) * rho[k:, k:]
    return out


def _lindblad_rhs(rho, a, ad, n):
    # gamma = 1; time is measured in units of 1/gamma
    return a @ rho @ ad - 0.5 * (n @ rho + rho @ n)


def _rk4(rho, total, steps, a, ad, n):
    h = total / steps
    for _ in range(steps):
        k1 = _lindblad_rhs(rho, a, ad, n)
        k2 = _lindblad_rhs(rho + 0.5 * h * k1, a, ad, n)
        k3 = _lindblad_rhs(rho + 0.5 * h * k2, a, ad, n)
        k4 = _lindblad_rhs(rho + h * k3, a, ad, n)
        rho = rho + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    return rho


def loss_rk4(rho: np.ndarray, gamma_t: float, tol: float = 1e-8, max_halvings: int = 12) -> np.ndarray:
    """Integrate the loss master equation with RK4, halving the step until converged."""
    if gamma_t == 0:
        return np.array(rho)
    dim = rho.shape[0]
    a = np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)
    ad = a.T.copy()
    n = ad @ a
    # start below the explicit stability limit ~ 2.8 / (dim - 1)
    steps = max(1, int(np.ceil(gamma_t / (2.0 / max(dim - 1, 1)))))
    prev = _rk4(rho, gamma_t, steps, a, ad, n)
    for _ in range(max_halvings):
        steps *= 2
        cur = _rk4(rho, gamma_t, steps, a, ad, n)
        if np.isfinite(cur).all() and fock.trace_distance(cur, prev) < tol:
            return cur
        prev = cur
    raise StepControlFailure(f"RK4 did not converge to {tol} after {max_halvings} halvings")


def photon_loss(state: FockState, p: LossParams, method: str = "kraus") -> FockState:
    """Loss channel of strength ``gamma t``; the output is always a density matrix."""
    rho = state.density()
    if method == "kraus":
        out = loss_kraus(rho, p.gamma_t)
    elif method == "rk4":
        out = loss_rk4(rho, p.gamma_t)
    else:
        raise InvalidArgument(f"unknown loss method {method!r}")
    out = 0.5 * (out + out.conj().T)
    return FockState(out, float(np.trace(out).real))


def ancilla_decay(zeta_l: complex, zeta_lp: complex, noise: AncillaNoise) -> float:
    """Coherence factor ``exp(-(g1/2 + 2 g2) t)`` with gate time ``t ~ |zeta_l - zeta_lp|``."""
    t = noise.time_per_unit_displacement * abs(complex(zeta_l) - complex(zeta_lp))
    return float(np.exp(-noise.rate * t))


def decay_table(zetas: np.ndarray, noise: AncillaNoise) -> np.ndarray:
    """``e[l, l']`` for all pairs of a spec's displacements."""
    z = np.asarray(zetas, dtype=complex)
    t = noise.time_per_unit_displacement * np.abs(z[:, None] - z[None, :])
    return np.exp(-noise.rate * t)


def noisy_hadamard_test(
    state: FockState,
    zeta_l: complex,
    zeta_lp: complex,
    sign: int = 1,
    observable=None,
    noise: AncillaNoise | None = None,
    method: str = "exact",
) -> tuple[float, float]:
    """Hadamard-test expectations with the ancilla coherence shrunk by :func:`ancilla_decay`.

    Only the off-diagonal ancilla blocks enter an X readout, and T1/T2 noise
    during the controlled gate scales exactly those blocks.
    """
    e = 1.0 if noise is None else ancilla_decay(zeta_l, zeta_lp, noise)
    h = hadamard_circuit(state, zeta_l, zeta_lp, method)
    xm, xmo = ancilla_x_expectations(h, observable, coherence=e)
    return sign * xm, sign * xmo
