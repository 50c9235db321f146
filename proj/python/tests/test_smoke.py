from fractions import Fraction
from pathlib import Path

import pytest

import cilwb

CORPUS = Path(__file__).resolve().parents[2] / "corpus"


def load(name):
    return cilwb.Structure.from_file(str(CORPUS / f"{name}.json"))


def test_eval_and_prenex():
    s = load("triangle-P")
    f = cilwb.parse("max(sup x0. P(x0), inf x1. P(x1))", s)
    p = f.prenex()
    assert p.is_prenex()
    assert cilwb.evaluate(p, s) == cilwb.evaluate(f, s)
    assert cilwb.evaluate(cilwb.parse("inf x0. d(x0,x0)", s), s) == 0
    assert cilwb.audit_modulus(f, s) == []


def test_dual_negates():
    s = load("metric2")
    f = cilwb.parse("sup x0. inf x1. d(x0,x1)", s)
    assert cilwb.evaluate(f.dual(), s) == -cilwb.evaluate(f, s)


def test_automorphisms_and_iso():
    assert len(cilwb.automorphisms(load("cycle4"))) == 8
    assert cilwb.isomorphic(load("cycle4"), load("cycle4-relabeled"))
    v = cilwb.approx_iso(load("pair-P00"), load("pair-P01"), t="1/2", depth=3)
    assert not v["yes"] and v["sentence"]


def test_orbit_and_scott():
    s = load("path3")
    o = cilwb.orbit_formula(s, [s.points[0]])
    assert o["ok"] and o["zero_set_exact"]
    sc = cilwb.scott(s)
    assert sc["ok"]
    assert all(cilwb.evaluate(sn, s) == 0 for sn in sc["sentences"])
    assert cilwb.scott_rank(s) is not None


def test_support_and_theta():
    s = load("path3")
    r = cilwb.find_support(s, [s.points[1]])
    assert r["found"] and r["checked"]
    psi = cilwb.parse("d(x0,x0)", s)
    th = cilwb.theta(psi, "0", "1/2", s)
    assert cilwb.evaluate(th, s, [s.points[0]]) == 0


def test_henkin_empty_seed():
    h = cilwb.henkin(load("metric2"), stages=10)
    assert h["monotone"] and h["satisfiable"]
    assert h["max_error"] <= Fraction(1, 512)
    assert h["quotient"].size == 3


def test_errors():
    with pytest.raises(ValueError):
        cilwb.parse("d(x0,", load("path3"))
    assert cilwb.validate('{"signature": {}, "points": ["p","q"], "distance": [["0","1"],["1/2","0"]]}')
