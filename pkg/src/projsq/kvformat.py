"""Flat ``key = value`` text files for scenario configs, projector specs and plans."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from . import codes, projector
from .errors import InvalidArgument
from .fock import FockState


def parse_kv(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidArgument(f"line {no}: expected 'key = value', got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if not key:
            raise InvalidArgument(f"line {no}: empty key")
        if key in out:
            raise InvalidArgument(f"line {no}: duplicate key {key!r}")
        out[key] = val
    return out


def load_kv(path) -> dict[str, str]:
    return parse_kv(Path(path).read_text(encoding="utf-8"))


def _fmt(v) -> str:
    if isinstance(v, (list, tuple, np.ndarray)):
        return ", ".join(_fmt(x) for x in v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def dump_kv(d: dict) -> str:
    return "".join(f"{k} = {_fmt(v)}\n" for k, v in d.items())


class Params:
    """Typed read access to a parsed key-value map."""

    def __init__(self, raw: dict[str, str] | None = None):
        self.raw = dict(raw or {})

    def __contains__(self, key):
        return key in self.raw

    def _get(self, key, default, conv):
        if key not in self.raw:
            if default is None:
                raise InvalidArgument(f"missing parameter {key!r}")
            return default
        try:
            return conv(self.raw[key])
        except ValueError as exc:
            raise InvalidArgument(f"bad value for {key!r}: {self.raw[key]!r}") from exc

    def float(self, key, default=None) -> float:
        return self._get(key, default, lambda s: float(_expr(s)))

    def int(self, key, default=None) -> int:
        return self._get(key, default, int)

    def str(self, key, default=None) -> str:
        return self._get(key, default, str)

    def floats(self, key, default=None) -> list[float]:
        return self._get(key, default, lambda s: [float(_expr(x)) for x in s.split(",") if x.strip()])


_NAMES = {"pi": np.pi, "e": np.e, "sqrt": np.sqrt, "log": np.log, "exp": np.exp}


def _expr(s: str) -> float:
    """Numbers or tiny arithmetic such as ``-log(0.3)`` or ``sqrt(pi/2)``."""
    s = s.strip()
    try:
        return float(s)
    except ValueError:
        pass
    if not set(s) <= set("0123456789.+-*/() eE_abcdefghijklmnopqrstuvwxyz"):
        raise ValueError(s)
    code = compile(s, "<param>", "eval")
    for name in code.co_names:
        if name not in _NAMES:
            raise ValueError(f"unknown name {name!r}")
    return float(eval(code, {"__builtins__": {}}, _NAMES))


def spec_to_kv(spec: projector.ProjectorSpec) -> dict:
    d = {"code": spec.code, "xi": spec.xi, "gamma": list(spec.gamma), "tail_tol": spec.tail_tol}
    d["cutoff"] = list(spec.cutoff)
    return d


def spec_from_kv(raw: dict[str, str]) -> projector.ProjectorSpec:
    """Rebuild a spec; weights are implied by code, xi, gamma and tail_tol."""
    p = Params(raw)
    code = p.str("code")
    gam = p.floats("gamma")
    tol = p.float("tail_tol", projector.TAIL_TOL)
    if code == "SC":
        return projector.sc_spec(p.float("xi"), gam[0], tol)
    if code == "GKP":
        g1, g2 = (gam[0], gam[0]) if len(gam) == 1 else gam
        return projector.gkp_spec(p.float("xi"), g1, g2, tol)
    if code == "VACUUM":
        return projector.vacuum_spec(gam[0], p.int("cutoff", 64))
    raise InvalidArgument(f"cannot rebuild spec with code {code!r}")


def code_params(p: Params):
    """``code = SC`` uses xi, z; ``code = GKP`` uses delta_sq, xi, comb_factor."""
    code = p.str("code", "SC").upper()
    xi = p.float("xi", codes.SQUARE_XI)
    if code == "SC":
        delta_sq = p.float("delta_sq", 0.05)
        return codes.ScParams(xi, p.float("z", -0.5 * np.log(delta_sq)))
    if code == "GKP":
        delta_sq = p.float("delta_sq", 0.05)
        factor = p.float("comb_factor", 10.0)
        return codes.GkpParams(delta_sq, xi, comb_z=-0.5 * np.log(delta_sq / factor))
    raise InvalidArgument(f"unknown code {code!r}")


_LOGICAL = {"zero": (1, 0), "one": (0, 1), "plus": (1, 1), "minus": (1, -1), "magic": (1, np.exp(1j * np.pi / 4))}


def logical_input(params, name: str, dim: int) -> FockState:
    if name not in _LOGICAL:
        raise InvalidArgument(f"unknown logical state {name!r}; choose from {sorted(_LOGICAL)}")
    return codes.logical_state(params, *_LOGICAL[name], dim)


def projector_for(params, p: Params) -> projector.ProjectorSpec:
    """SC: ``dz`` (squeezing increase). GKP: ``s`` (envelope reduction factor)."""
    if isinstance(params, codes.ScParams):
        return projector.sc_spec(params.xi, projector.gamma_from_dz(params.z, p.float("dz")))
    g0 = projector.gamma0_from_s(params.delta_sq, p.float("s"))
    return projector.gkp_spec(params.xi, g0, g0)


def plan_from_kv(raw: dict[str, str], dim: int | None = None, seed: int | None = None):
    """Single-insertion plan: code params, ``dz``/``s``, ``state``, ``observable``, ``shots``, ``seed``, ``mode``."""
    from .sampler import VqedPlan

    p = Params(raw)
    dim = dim if dim is not None else p.int("dim", 150)
    params = code_params(p)
    state = logical_input(params, p.str("state", "magic"), dim)
    spec = projector_for(params, p)
    logicals = codes.logical_set(params, dim)
    obs = dict(zip("XYZ", logicals))[p.str("observable", "X").upper()]
    return VqedPlan(
        state,
        [spec],
        obs,
        shots=p.int("shots", 10_000),
        seed=seed if seed is not None else p.int("seed", 0),
        mode=p.str("mode", "shots"),
    )
