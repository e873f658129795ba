"""Coefficient matcher: exact recovery, round trips, and rejections."""

import pytest

from psskit.chmatch import (CH_RHS, MatchError, match_family,
                            match_generalized_ch)
from psskit.families import FamilyParams, build_family, default_params, \
    verify_pss
from psskit.jetalg import is_zero, parse_expr


def test_ch_membership():
    res = match_generalized_ch()
    target = parse_expr(CH_RHS)
    assert is_zero(res.reassembled - target)
    assert res.lam == 1
    assert res.params.kind == "T24"
    assert verify_pss(res.instance).ok
    # the solved parameters in full
    assert res.params.mu2 == 0
    assert abs(res.params.eta2) == 1
    assert (res.params.lam * res.params.eta2) ** 2 + res.params.c1 ** 2 != 0


def test_ch_recovered_phi1():
    res = match_generalized_ch()
    phi1 = parse_expr(res.params.phi1_slot)
    want = parse_expr("u0^3 - 2*u0^2*u1 + u0*u1^2")
    eps = res.params.sign
    assert is_zero(phi1 - want) or is_zero(phi1 + want), (eps, phi1)


def test_t22_roundtrip():
    inst = build_family(default_params("T22"))
    res = match_family(inst.pde.F, "T22")
    assert is_zero(res.instance.pde.F - inst.pde.F)
    assert res.params.eta2 != 0


def test_t24_roundtrip():
    inst = build_family(default_params("T24"))
    res = match_family(inst.pde.F, "T24")
    assert is_zero(res.instance.pde.F - inst.pde.F)


def test_t24_roundtrip_nontrivial_scalars():
    p = FamilyParams("T24", mu2=0, eta2="3/2", lam="2", c1="-1/3", sign=-1,
                     f_slot="u0 - u2", phi1_slot="u0^2*u1 - u1^2 + 3*u0")
    inst = build_family(p)
    res = match_family(inst.pde.F, "T24")
    assert is_zero(res.instance.pde.F - inst.pde.F)
    assert verify_pss(res.instance).ok


def test_out_of_class_targets():
    with pytest.raises(MatchError, match="u3"):
        match_family(parse_expr("u3"), "T24")
    with pytest.raises(MatchError, match="nonlinear in u2"):
        match_family(parse_expr("u2^2"), "T24")
    with pytest.raises(MatchError, match="no exact match"):
        match_family(parse_expr("u1^3 + u0^3*u1^2"), "T24")
    with pytest.raises(MatchError, match="polynomial"):
        match_family(parse_expr("sin(u0)"), "T24")
    with pytest.raises(MatchError):
        match_family(parse_expr("u0^2*u3 + u1"), "T22")


def test_matcher_is_deterministic():
    a = match_generalized_ch()
    b = match_generalized_ch()
    assert a.params == b.params
