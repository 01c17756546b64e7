"""Monte-Carlo virtual projection: sample displacement pairs, run Hadamard tests, divide.

Each shot draws a pair ``(l, l')`` per projector insertion, runs the
Hadamard-test circuit, and records ``m`` (sign-corrected product of ancilla
X outcomes) and ``m' = m * o`` (``o`` the observable outcome). The estimate
of ``Tr[O P rho P] / Tr[P rho P]`` is ``mean(m') / mean(m)``.

Two modes:

* ``"shots"``: ancilla and observable outcomes are sampled, as on hardware.
* ``"exact"``: outcomes are replaced by their conditional expectations, so
  only the pair sampling contributes variance.

Observables are used through their Hermitian part, which is what a
projective measurement can realize; ``Re Tr[O rho]`` is unchanged.

Random numbers come in fixed blocks of shots, each seeded by
``SeedSequence(seed, spawn_key=(block,))``, so a result depends only on the
plan, never on how blocks are scheduled.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fock
from .errors import DenominatorDegenerate, InvalidArgument
from .fock import FockOperator, FockState
from .projector import ProjectorSpec

BLOCK = 4096


@dataclass(frozen=True, eq=False)
class Insertion:
    """A projector insertion with its sampling table and optional ancilla decay.

    ``table[l, l']`` is the probability of drawing the pair; it defaults to
    ``w_l w_l'``. ``decay[l, l']`` scales the ancilla coherence of that pair.
    """

    spec: ProjectorSpec
    table: np.ndarray | None = None
    decay: np.ndarray | None = None

    def __post_init__(self):
        n = len(self.spec)
        t = np.outer(self.spec.weights, self.spec.weights) if self.table is None else np.asarray(self.table, float)
        if t.shape != (n, n) or np.any(t < 0):
            raise InvalidArgument("pair table must be a non-negative (L, L) array")
        t = t / t.sum()
        t.setflags(write=False)
        object.__setattr__(self, "table", t)
        if self.decay is not None:
            d = np.asarray(self.decay, float)
            if d.shape != (n, n) or np.any(d <= 0) or np.any(d > 1):
                raise InvalidArgument("decay values must lie in (0, 1]")
            d.setflags(write=False)
            object.__setattr__(self, "decay", d)

    def coherence(self, l, lp):
        return 1.0 if self.decay is None else self.decay[l, lp]


@dataclass(frozen=True, eq=False)
class VqedPlan:
    """``rho' = P_N U_N ... P_1 U_1 rho``, estimated for ``observable``.

    ``gates[k]`` (or ``None``) is applied right before insertion ``k``.
    """

    state: FockState
    insertions: list
    observable: FockOperator
    shots: int = 10_000
    seed: int = 0
    mode: str = "shots"
    gates: list | None = None

    def __post_init__(self):
        ins = [i if isinstance(i, Insertion) else Insertion(i) for i in self.insertions]
        if not ins:
            raise InvalidArgument("at least one insertion is required")
        if self.shots < 1:
            raise InvalidArgument("shots must be >= 1")
        if self.mode not in ("shots", "exact"):
            raise InvalidArgument("mode must be 'shots' or 'exact'")
        gates = list(self.gates) if self.gates is not None else [None] * len(ins)
        if len(gates) != len(ins):
            raise InvalidArgument("need one gate slot per insertion")
        object.__setattr__(self, "insertions", ins)
        object.__setattr__(self, "gates", gates)

    def with_(self, **kw) -> "VqedPlan":
        fields = dict(
            state=self.state,
            insertions=self.insertions,
            observable=self.observable,
            shots=self.shots,
            seed=self.seed,
            mode=self.mode,
            gates=self.gates,
        )
        fields.update(kw)
        return VqedPlan(**fields)


@dataclass(frozen=True)
class EstimatorResult:
    mean_m: float
    mean_mo: float
    ratio: float
    var_m: float  # per-shot sample variances
    var_mo: float
    cov: float
    var_ratio: float  # variance of the ratio estimate (delta method)
    shots: int
    empirical_overhead: float  # shots * var_ratio

    @property
    def stderr_m(self) -> float:
        return float(np.sqrt(self.var_m / self.shots))

    @property
    def stderr_mo(self) -> float:
        return float(np.sqrt(self.var_mo / self.shots))

    @property
    def stderr_ratio(self) -> float:
        return float(np.sqrt(self.var_ratio))


def sample_pair(spec, rng, table=None):
    """Draw ``(l, l', sign, phase)``; ``l, l'`` index the spec's terms."""
    ins = spec if isinstance(spec, Insertion) else Insertion(spec, table)
    n = len(ins.spec)
    flat = int(rng.choice(n * n, p=ins.table.ravel()))
    l, lp = divmod(flat, n)
    s = ins.spec
    sign = int(s.signs[l] * s.signs[lp])
    zl, zlp = complex(s.zetas[l]), complex(s.zetas[lp])
    phase = complex(np.exp(1j * np.imag((zl - zlp) * np.conj(zlp))))
    return l, lp, sign, phase


def _hermitian(op) -> np.ndarray:
    m = op.matrix if isinstance(op, FockOperator) else np.asarray(op)
    return 0.5 * (m + m.conj().T)


class _FastSingle:
    """One insertion on a pure state: all pair amplitudes precomputed.

    ``b[l]`` holds ``D(zeta_l) U psi`` in the eigenbasis of the observable,
    so ``<D_lp psi| O |D_l psi> = sum_k o_k conj(b[lp, k]) b[l, k]``.
    """

    def __init__(self, plan: VqedPlan):
        ins = plan.insertions[0]
        psi = plan.state.data
        if plan.gates[0] is not None:
            psi = _mat(plan.gates[0]) @ psi
        self.evals, vecs = np.linalg.eigh(_hermitian(plan.observable))
        rows = fock.displaced_states(ins.spec.zetas, psi)
        self.b = rows @ vecs.conj()
        self.ins = ins
        self.signs = ins.spec.signs

    def values(self, l, lp):
        """Exact conditional expectations of ``m`` and ``m'`` for index arrays."""
        b1, b0 = self.b[l], self.b[lp]
        cross = (b0.conj() * b1).real
        h = self.signs[l] * self.signs[lp] * self.ins.coherence(l, lp)
        return h * cross.sum(1), h * (cross @ self.evals)

    def outcomes(self, l, lp, rng):
        b1, b0 = self.b[l], self.b[lp]
        e = self.ins.coherence(l, lp)
        e = np.broadcast_to(e, l.shape)[:, None]
        diag = 0.25 * (np.abs(b0) ** 2 + np.abs(b1) ** 2)
        cross = 0.5 * e * (b0.conj() * b1).real
        probs = np.concatenate([diag + cross, diag - cross], axis=1)  # x = +1 then x = -1
        probs = np.clip(probs, 0, None)
        cdf = np.cumsum(probs, axis=1)
        u = rng.random(l.size) * cdf[:, -1]
        idx = np.minimum((cdf < u[:, None]).sum(1), probs.shape[1] - 1)
        n = self.evals.size
        x = np.where(idx < n, 1.0, -1.0)
        o = self.evals[idx % n]
        m = self.signs[l] * self.signs[lp] * x
        return m, m * o


def _mat(op) -> np.ndarray:
    return op.matrix if isinstance(op, FockOperator) else np.asarray(op)


class _General:
    """Density-matrix path for several insertions, gates, or mixed inputs."""

    def __init__(self, plan: VqedPlan):
        self.plan = plan
        self.rho = plan.state.density()
        self.obs = _hermitian(plan.observable)
        self.evals, self.vecs = np.linalg.eigh(self.obs)
        self._cache: dict = {}

    def _disp(self, k, l):
        key = (k, l)
        if key not in self._cache:
            z = self.plan.insertions[k].spec.zetas[l]
            self._cache[key] = fock.displacement(z, self.rho.shape[0], "exact").matrix
        return self._cache[key]

    def _branches(self, rho, k, l, lp):
        a, b = self._disp(k, lp), self._disp(k, l)
        diag = 0.25 * (a @ rho @ a.conj().T + b @ rho @ b.conj().T)
        cross = 0.25 * (b @ rho @ a.conj().T + a @ rho @ b.conj().T)
        return diag, cross

    def _gate(self, rho, k):
        g = self.plan.gates[k]
        if g is None:
            return rho
        u = _mat(g)
        return u @ rho @ u.conj().T

    def values(self, ls, lps):
        """Conditional expectations; ``ls[k]``, ``lps[k]`` are per-insertion indices."""
        rho = self.rho
        h = 1.0
        for k, ins in enumerate(self.plan.insertions):
            rho = self._gate(rho, k)
            _, cross = self._branches(rho, k, ls[k], lps[k])
            # E(rho) = rho_+ - rho_- = 2 * cross (times the ancilla coherence)
            rho = 2 * ins.coherence(ls[k], lps[k]) * cross
            h *= ins.spec.signs[ls[k]] * ins.spec.signs[lps[k]]
        return h * np.trace(rho).real, h * np.trace(self.obs @ rho).real

    def outcomes(self, ls, lps, rng):
        rho = self.rho
        m = 1.0
        for k, ins in enumerate(self.plan.insertions):
            rho = self._gate(rho, k)
            diag, cross = self._branches(rho, k, ls[k], lps[k])
            e = ins.coherence(ls[k], lps[k])
            plus, minus = diag + e * cross, diag - e * cross
            pp, pm = np.trace(plus).real, np.trace(minus).real
            x = 1.0 if rng.random() * (pp + pm) < pp else -1.0
            rho = plus if x > 0 else minus
            rho = rho / np.trace(rho).real
            m *= x * ins.spec.signs[ls[k]] * ins.spec.signs[lps[k]]
        pk = np.clip(np.einsum("nk,nm,mk->k", self.vecs.conj(), rho, self.vecs).real, 0, None)
        cdf = np.cumsum(pk)
        k_idx = min(int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right")), pk.size - 1)
        return m, m * self.evals[k_idx]


def _engine(plan: VqedPlan):
    if len(plan.insertions) == 1 and plan.state.is_pure:
        return _FastSingle(plan)
    return _General(plan)


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))


def _draw_pairs(plan: VqedPlan, rng, size):
    ls, lps = [], []
    for ins in plan.insertions:
        n = len(ins.spec)
        flat = rng.choice(n * n, size=size, p=ins.table.ravel())
        l, lp = np.divmod(flat, n)
        ls.append(l)
        lps.append(lp)
    return ls, lps


def _run_block(plan: VqedPlan, engine, block: int, size: int):
    rng = _block_rng(plan.seed, block)
    ls, lps = _draw_pairs(plan, rng, size)
    if isinstance(engine, _FastSingle):
        if plan.mode == "exact":
            return engine.values(ls[0], lps[0])
        return engine.outcomes(ls[0], lps[0], rng)
    m = np.empty(size)
    mo = np.empty(size)
    for i in range(size):
        li = [l[i] for l in ls]
        lpi = [lp[i] for lp in lps]
        if plan.mode == "exact":
            m[i], mo[i] = engine.values(li, lpi)
        else:
            m[i], mo[i] = engine.outcomes(li, lpi, rng)
    return m, mo


def sample_values(plan: VqedPlan) -> tuple[np.ndarray, np.ndarray]:
    """Per-shot ``m`` and ``m'`` arrays, in shot order."""
    engine = _engine(plan)
    ms, mos = [], []
    for b, start in enumerate(range(0, plan.shots, BLOCK)):
        m, mo = _run_block(plan, engine, b, min(BLOCK, plan.shots - start))
        ms.append(np.asarray(m, float))
        mos.append(np.asarray(mo, float))
    return np.concatenate(ms), np.concatenate(mos)


def summarize(m: np.ndarray, mo: np.ndarray) -> EstimatorResult:
    n = m.size
    mean_m, mean_mo = float(m.mean()), float(mo.mean())
    ddof = 1 if n > 1 else 0
    var_m = float(m.var(ddof=ddof))
    var_mo = float(mo.var(ddof=ddof))
    cov = float(np.cov(m, mo, ddof=ddof)[0, 1]) if n > 1 else 0.0
    if mean_m == 0:
        ratio, var_ratio = float("nan"), float("inf")
    else:
        ratio = mean_mo / mean_m
        var_ratio = (var_mo - 2 * ratio * cov + ratio**2 * var_m) / (mean_m**2 * n)
    return EstimatorResult(mean_m, mean_mo, ratio, var_m, var_mo, cov, var_ratio, n, var_ratio * n)


def run_vqed(plan: VqedPlan) -> EstimatorResult:
    """Run the estimator; raises ``DenominatorDegenerate`` when ``mean_m`` is within 3 sigma of 0."""
    m, mo = sample_values(plan)
    res = summarize(m, mo)
    if abs(res.mean_m) <= 3 * res.stderr_m:
        withheld = EstimatorResult(
            res.mean_m, res.mean_mo, float("nan"), res.var_m, res.var_mo, res.cov, float("nan"), res.shots, float("nan")
        )
        raise DenominatorDegenerate(
            f"mean_m={res.mean_m:.3e} within 3 sigma ({res.stderr_m:.3e}) of zero", result=withheld
        )
    return res


def enumerate_vqed(plan: VqedPlan) -> tuple[float, float]:
    """Exact expected ``(mean_m, mean_mo)`` by summing over every pair combination."""
    engine = _General(plan)
    tables = [ins.table for ins in plan.insertions]
    sizes = [t.shape[0] for t in tables]
    tm = tmo = 0.0
    for flat in np.ndindex(*[s * s for s in sizes]):
        ls = [f // s for f, s in zip(flat, sizes)]
        lps = [f % s for f, s in zip(flat, sizes)]
        w = np.prod([t[l, lp] for t, l, lp in zip(tables, ls, lps)])
        if w == 0:
            continue
        vm, vmo = engine.values(ls, lps)
        tm += w * vm
        tmo += w * vmo
    return float(tm), float(tmo)


@dataclass(frozen=True)
class OverheadReport:
    per_shot_variance: float
    predicted: float
    ratio: float


def overhead(result: EstimatorResult, q_ref: float, baseline: float = 1.0) -> OverheadReport:
    """Compare ``shots * var_ratio`` with ``baseline / q_ref^2``."""
    if not q_ref > 0:
        raise InvalidArgument("q_ref must be positive")
    pred = baseline / q_ref**2
    return OverheadReport(result.empirical_overhead, pred, result.empirical_overhead / pred)


def noise_compensated_probs(spec: ProjectorSpec, decay) -> tuple[np.ndarray, float]:
    """Reweighted pair table ``p' = w_l w_l' / e(l, l') / R`` and ``R = sum w w / e``.

    ``decay`` is an ``(L, L)`` array or a callable ``decay(l, l')``.
    """
    n = len(spec)
    if callable(decay):
        e = np.array([[decay(i, j) for j in range(n)] for i in range(n)], float)
    else:
        e = np.asarray(decay, float)
    if e.shape != (n, n):
        raise InvalidArgument("decay table has the wrong shape")
    if np.any(e <= 0) or np.any(e > 1):
        raise InvalidArgument("decay values must lie in (0, 1]")
    raw = np.outer(spec.weights, spec.weights) / e
    r = float(raw.sum())
    return raw / r, r
