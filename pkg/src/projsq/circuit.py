"""Qubit-ancilla plus oscillator circuits: LCU post-selection and Hadamard tests.

Hybrid states are stored ancilla-major: a pure state has shape ``(2, dim)``
(row 0 is the register amplitude with the ancilla in ``|0>``, row 1 with
``|1>``); a mixed state has shape ``(2, dim, 2, dim)`` with
``rho[a, :, b, :] = <a| rho |b>``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import binom

from . import fock
from .codes import SQUARE_XI
from .errors import DimensionMismatch, InvalidArgument, PostselectAnnihilated
from .fock import FockOperator, FockState
from .projector import ProjectorSpec

POSTSELECT_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class HybridState:
    data: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.data, dtype=complex)
        if d.shape[0] != 2 or d.ndim not in (2, 4) or (d.ndim == 4 and d.shape != (2, d.shape[1], 2, d.shape[1])):
            raise DimensionMismatch(f"bad hybrid layout {d.shape}")
        d = np.array(d)
        d.setflags(write=False)
        object.__setattr__(self, "data", d)

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    @property
    def is_pure(self) -> bool:
        return self.data.ndim == 2

    @classmethod
    def product(cls, ancilla, register: FockState) -> "HybridState":
        """``|ancilla> (x) register``; ``ancilla`` is a length-2 amplitude vector."""
        anc = np.asarray(ancilla, dtype=complex)
        anc = anc / np.linalg.norm(anc)
        if register.is_pure:
            return cls(np.outer(anc, register.data))
        ra = np.outer(anc, anc.conj())
        return cls(np.einsum("ab,nm->anbm", ra, register.data))

    def flat(self) -> np.ndarray:
        """Vector of length 2*dim or matrix of size 2*dim (same block order)."""
        n = 2 * self.dim
        return self.data.reshape(n) if self.is_pure else self.data.reshape(n, n)

    def norm(self) -> float:
        if self.is_pure:
            return float(np.linalg.norm(self.data))
        return float(np.einsum("anan->", self.data).real)

    def ancilla_unitary(self, u) -> "HybridState":
        u = np.asarray(u, dtype=complex)
        if self.is_pure:
            return HybridState(u @ self.data)
        return HybridState(np.einsum("ab,bncm,dc->andm", u, self.data, u.conj()))

    def controlled(self, op) -> "HybridState":
        """Apply ``op`` to the register when the ancilla is ``|1>``."""
        m = op.matrix if isinstance(op, FockOperator) else np.asarray(op)
        if m.shape[0] != self.dim:
            raise DimensionMismatch("controlled operator does not match the register")
        d = np.array(self.data)
        if self.is_pure:
            d[1] = m @ d[1]
        else:
            d[1] = np.einsum("nk,kbm->nbm", m, d[1])
            d[:, :, 1] = np.einsum("ank,mk->anm", d[:, :, 1], m.conj())
        return HybridState(d)

    def on_register(self, op) -> "HybridState":
        m = op.matrix if isinstance(op, FockOperator) else np.asarray(op)
        if self.is_pure:
            return HybridState(self.data @ m.T)
        return HybridState(np.einsum("nk,akbl,ml->anbm", m, self.data, m.conj()))

    def branch(self, bit: int) -> tuple[FockState, float]:
        """Unnormalized register state for ancilla outcome ``bit`` and its probability."""
        if self.is_pure:
            v = self.data[bit]
            p = float(np.vdot(v, v).real)
            return FockState(v, np.sqrt(p)), p
        r = self.data[bit, :, bit, :]
        p = float(np.trace(r).real)
        return FockState(r, p), p


def ancilla_prep(p0: float, sign: int = 1) -> np.ndarray:
    """Real orthogonal 2x2 with first column ``(sqrt p0, sign sqrt p1)``."""
    a, b = np.sqrt(p0), sign * np.sqrt(1 - p0)
    return np.array([[a, -b], [b, a]])


def ancilla_unprep(p0: float, sign: int, postselect: int) -> np.ndarray:
    """Orthogonal 2x2 whose row ``postselect`` is ``(sqrt p0, sign sqrt p1)``."""
    a, b = np.sqrt(p0), sign * np.sqrt(1 - p0)
    row, other = np.array([a, b]), np.array([-b, a])
    return np.vstack([row, other] if postselect == 0 else [other, row])


def lcu_step(
    state: HybridState,
    zeta: complex,
    sign: int,
    postselect: int,
    p0: float = 0.5,
    disp: FockOperator | None = None,
) -> tuple[HybridState, float]:
    """One select/post-select round realizing ``p0 I + sign p1 D(zeta)``.

    The ancilla must start in ``|0>``. It is rotated to
    ``sqrt p0 |0> + sqrt p1 |1>``, controls ``D(zeta)``, is rotated by a
    unitary whose row ``postselect`` is ``(sqrt p0, sign sqrt p1)``, then
    measured. Returns the renormalized state (ancilla reset to ``|0>``) and
    the probability of the kept branch.
    """
    if sign not in (1, -1) or postselect not in (0, 1):
        raise InvalidArgument("sign must be +-1 and postselect 0 or 1")
    if not 0 < p0 <= 1:
        raise InvalidArgument("p0 must lie in (0, 1]")
    d = disp if disp is not None else fock.displacement(zeta, state.dim)
    s = state.ancilla_unitary(ancilla_prep(p0)).controlled(d)
    s = s.ancilla_unitary(ancilla_unprep(p0, sign, postselect))
    reg, prob = s.branch(postselect)
    if prob < POSTSELECT_FLOOR:
        raise PostselectAnnihilated(f"post-selection probability {prob:.2e}")
    return HybridState.product([1, 0], reg.normalized()), prob


@dataclass(frozen=True)
class LcuConfig:
    """Product-form projector built from ``M`` repetitions of ``p0 I + h p1 D``.

    ``SC``: ``(Q0 Q0^dag)^M`` with ``Q0 = p0 I - p1 D(i pi/(2 xi))``, outcome 1 kept.
    ``GKP``: ``(Q1 Q1^dag Q2 Q2^dag)^M`` with ``Q1 = p0 I + p1 D(2 xi)`` and
    ``Q2 = p0 I + p1 D(i pi/xi)``, outcome 0 kept.
    """

    code: str
    xi: float
    p0: float = 0.5
    M: int = 1

    def __post_init__(self):
        if self.code not in ("SC", "GKP"):
            raise InvalidArgument("code must be SC or GKP")
        if not 0 < self.p0 < 1:
            raise InvalidArgument("p0 must lie in (0, 1)")
        if int(self.M) != self.M or self.M < 0:
            raise InvalidArgument("M must be a non-negative integer")
        if not self.xi > 0:
            raise InvalidArgument("xi must be positive")

    @property
    def sign(self) -> int:
        return -1 if self.code == "SC" else 1

    @property
    def postselect(self) -> int:
        return 1 if self.code == "SC" else 0

    def generators(self) -> list[complex]:
        """Displacements of one repetition, in circuit order."""
        if self.code == "SC":
            z = 1j * np.pi / (2 * self.xi)
            return [z, -z]
        a, b = 2 * self.xi, 1j * np.pi / self.xi
        return [a, -a, b, -b]


def lcu_project(state: FockState, cfg: LcuConfig) -> tuple[FockState, float]:
    """Run the repeated LCU circuit; returns the register state and total success probability."""
    if cfg.M == 0:
        return state, 1.0
    gens = cfg.generators()
    disps = {g: fock.displacement(g, state.dim) for g in gens}
    h = HybridState.product([1, 0], state)
    total = 1.0
    for _ in range(cfg.M):
        for g in gens:
            h, p = lcu_step(h, g, cfg.sign, cfg.postselect, cfg.p0, disps[g])
            total *= p
    reg, _ = h.branch(0)
    return reg.normalized(), total


def q_product(cfg: LcuConfig, dim: int) -> FockOperator:
    """Dense ``(Q Q^dag ...)^M`` from the same truncated displacements (test oracle)."""
    p0, p1 = cfg.p0, 1 - cfg.p0
    one = np.eye(dim)
    rep = one.astype(complex)
    for g in cfg.generators():
        rep = (p0 * one + cfg.sign * p1 * fock.displacement(g, dim).matrix) @ rep
    return FockOperator(np.linalg.matrix_power(rep, cfg.M))


def dense_lcu_project(state: FockState, cfg: LcuConfig) -> tuple[FockState, float]:
    out = fock.apply(q_product(cfg, state.dim), state)
    q = out.norm**2 if out.is_pure else out.norm
    return out.normalized(), q


def binomial_width(code: str, p0: float, M: int, xi: float = SQUARE_XI) -> float:
    """Gaussian width^2 of the product form: ``(pi/xi)^2 M p0 p1`` (SC) or ``8 pi M p0 p1`` (square GKP).

    The GKP value generalizes to ``2 (2 xi)^2 * 2 M p0 p1`` for other spacings.
    """
    var = 2 * M * p0 * (1 - p0)  # variance of the lattice index
    step = np.pi / (2 * xi) if code == "SC" else 2 * xi
    return float(2 * step**2 * var)


def min_repetitions(code: str, p0: float, gamma_sq: float, xi: float = SQUARE_XI) -> int:
    """Smallest ``M`` with ``binomial_width >= gamma_sq``."""
    per = binomial_width(code, p0, 1, xi)
    return int(np.ceil(gamma_sq / per - 1e-12))


def _binomial_index_weights(M: int, p0: float) -> tuple[np.ndarray, np.ndarray]:
    """Distribution of ``X - Y`` with ``X, Y ~ Bin(M, 1 - p0)`` independent."""
    k = np.arange(M + 1)
    b = binom.pmf(k, M, 1 - p0)
    w = np.convolve(b, b[::-1])
    return np.arange(-M, M + 1), w


def product_spec(cfg: LcuConfig) -> ProjectorSpec:
    """Exact term list of the product-form projector, as a :class:`ProjectorSpec`."""
    ls, w = _binomial_index_weights(cfg.M, cfg.p0)
    keep = w > 0
    ls, w = ls[keep], w[keep] / w[keep].sum()
    if cfg.code == "SC":
        step = np.pi / (2 * cfg.xi)
        return ProjectorSpec(w, (-1.0) ** np.abs(ls), 1j * step * ls, code="SC", xi=cfg.xi, cutoff=(cfg.M,))
    s1, s2 = 2 * cfg.xi, np.pi / cfg.xi
    L1, L2 = np.meshgrid(ls, ls, indexing="ij")
    ww = np.outer(w, w).ravel()
    return ProjectorSpec(
        ww, np.ones_like(ww), (s1 * L1 + 1j * s2 * L2).ravel(), code="GKP", xi=cfg.xi, cutoff=(cfg.M, cfg.M)
    )


def compensation_phase(zeta_l: complex, zeta_lp: complex) -> float:
    """Phase ``Im(dz conj(zeta_lp))`` picked up by ``D(dz) D(zeta_lp) = e^{i phi} D(zeta_l)``."""
    dz = complex(zeta_l) - complex(zeta_lp)
    return float(np.imag(dz * np.conj(complex(zeta_lp))))


def hadamard_circuit(
    state: FockState,
    zeta_l: complex,
    zeta_lp: complex,
    method: str = "exact",
) -> HybridState:
    """Hybrid state just before the ancilla X readout.

    Ancilla ``|+>``, unconditional ``D(zeta_lp)``, controlled ``D(zeta_l - zeta_lp)``,
    then the phase gate ``diag(1, e^{-i phi})`` that removes the composition phase.
    The ancilla coherence then carries ``D(zeta_l) rho D(zeta_lp)^dag / 2``.

    With ``method="exact"`` the controlled gate is applied in composed form,
    ``D(dz) D(zeta_lp) = e^{i phi} D(zeta_l)``, so a large intermediate
    displacement never has to fit in the truncation. ``method="expm"``
    multiplies the truncated unitaries literally.
    """
    dim = state.dim
    dz = complex(zeta_l) - complex(zeta_lp)
    phi = compensation_phase(zeta_l, zeta_lp)
    plus = HybridState.product([1, 1], state)
    if method == "expm":
        h = plus.on_register(fock.displacement(zeta_lp, dim, method))
        h = h.controlled(fock.displacement(dz, dim, method))
        return h.ancilla_unitary(np.diag([1, np.exp(-1j * phi)]))
    d_lp = fock.displacement(zeta_lp, dim, method).matrix
    d_l = np.exp(1j * phi) * fock.displacement(zeta_l, dim, method).matrix
    if state.is_pure:
        d = plus.data
        h = HybridState(np.stack([d_lp @ d[0], d_l @ d[1]]))
    else:
        ops = (d_lp, d_l)
        h = HybridState(
            np.stack(
                [np.stack([ops[a] @ plus.data[a, :, b, :] @ ops[b].conj().T for b in (0, 1)], axis=1) for a in (0, 1)]
            )
        )
    return h.ancilla_unitary(np.diag([1, np.exp(-1j * phi)]))


def ancilla_x_expectations(h: HybridState, observable=None, coherence: float = 1.0) -> tuple[float, float]:
    """``<X (x) I>`` and ``<X (x) O>`` with the ancilla coherence scaled by ``coherence``."""
    o = None
    if observable is not None:
        o = observable.matrix if isinstance(observable, FockOperator) else np.asarray(observable)
    if h.is_pure:
        a, b = h.data[0], h.data[1]
        xm = 2 * np.vdot(a, b).real
        xmo = 2 * np.vdot(a, o @ b).real if o is not None else xm
    else:
        r10 = h.data[1, :, 0, :]
        xm = 2 * np.trace(r10).real
        xmo = 2 * np.trace(o @ r10).real if o is not None else xm
    return coherence * float(xm), coherence * float(xmo)


def hadamard_test_exact(
    state: FockState,
    zeta_l: complex,
    zeta_lp: complex,
    sign: int = 1,
    observable=None,
    method: str = "exact",
) -> tuple[float, float, complex]:
    """Exact ancilla-X expectations of the virtual-projection circuit.

    Returns ``(h Re Tr[D_l rho D_lp^dag], h Re Tr[O D_l rho D_lp^dag], e^{i phi})``.
    """
    h = hadamard_circuit(state, zeta_l, zeta_lp, method)
    xm, xmo = ancilla_x_expectations(h, observable)
    return sign * xm, sign * xmo, complex(np.exp(1j * compensation_phase(zeta_l, zeta_lp)))
