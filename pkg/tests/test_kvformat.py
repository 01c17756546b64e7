import numpy as np
import pytest
from hypothesis import given, strategies as st

from projsq import codes, projector as pj
from projsq.errors import InvalidArgument
from projsq.kvformat import Params, code_params, dump_kv, parse_kv, plan_from_kv, spec_from_kv, spec_to_kv


def test_parse_comments_and_whitespace():
    d = parse_kv("# header\nxi = 0.9  # trailing\n\n  dz=0.2, 0.4\n")
    assert d == {"xi": "0.9", "dz": "0.2, 0.4"}


@pytest.mark.parametrize("text", ["a = 1\na = 2\n", "just words\n", " = 3\n"])
def test_parse_rejects_bad_lines(text):
    with pytest.raises(InvalidArgument):
        parse_kv(text)


def test_expressions():
    p = Params({"z": "-log(0.3)", "xi": "sqrt(pi/2)", "l": "1e-3, 2*pi"})
    assert p.float("z") == pytest.approx(-np.log(0.3))
    assert p.float("xi") == pytest.approx(codes.SQUARE_XI)
    assert p.floats("l") == pytest.approx([1e-3, 2 * np.pi])
    assert p.float("missing", 7.0) == 7.0


@pytest.mark.parametrize("bad", ["__import__('os')", "pi.__class__", "open(1)", "exp"])
def test_expressions_are_restricted(bad):
    with pytest.raises((InvalidArgument, TypeError, SyntaxError)):
        Params({"k": bad}).float("k")


def test_missing_key_raises():
    with pytest.raises(InvalidArgument):
        Params({}).float("xi")


@given(st.dictionaries(st.from_regex(r"[a-z_]{1,8}", fullmatch=True), st.floats(-1e6, 1e6), max_size=6))
def test_dump_parse_roundtrip(d):
    back = parse_kv(dump_kv(d))
    assert {k: float(v) for k, v in back.items()} == d


def test_spec_roundtrip():
    for spec in (pj.sc_spec(0.9, 2.0), pj.gkp_spec(codes.SQUARE_XI, 3.0, 2.0), pj.vacuum_spec(1.0)):
        again = spec_from_kv(parse_kv(dump_kv(spec_to_kv(spec))))
        np.testing.assert_allclose(again.zetas, spec.zetas)
        np.testing.assert_allclose(again.weights, spec.weights)


def test_code_params_and_plan():
    g = code_params(Params({"code": "GKP", "delta_sq": "0.1", "comb_factor": "100"}))
    assert isinstance(g, codes.GkpParams) and g.peak_z == pytest.approx(-0.5 * np.log(1e-3))
    plan = plan_from_kv({"code": "SC", "z": "1", "dz": "0.3", "shots": "50", "state": "plus"}, dim=60, seed=4)
    assert plan.shots == 50 and plan.seed == 4 and plan.state.dim == 60
    with pytest.raises(InvalidArgument):
        code_params(Params({"code": "CAT"}))
    with pytest.raises(InvalidArgument):
        plan_from_kv({"state": "weird"}, dim=40)
