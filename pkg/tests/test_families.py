"""Family builders, validation, verification, and the condition checker."""

from fractions import Fraction

import pytest

from psskit.cartan import OneForm
from psskit.families import (FamilyError, FamilyParams, build_family,
                             default_params, lemma21_check, t25i_displayed_zeta1,
                             t25i_scalars, t25ii_admissible_k, t25ii_mu3_eta3,
                             verify_pss, _solve_affine_pair)
from psskit.jetalg import is_zero, jv

ALL_KINDS = ("T22", "T23", "T24", "T25i", "T25ii")


@pytest.mark.parametrize("kind", ALL_KINDS + ("SG",))
@pytest.mark.parametrize("sign", (1, -1))
def test_default_instances_verify(kind, sign):
    rep = verify_pss(build_family(default_params(kind, sign)))
    assert rep.ok
    assert rep.residuals.zero
    assert not rep.witness.is_zero


def test_t22_default_pde_and_form():
    inst = build_family(default_params("T22"))
    # f = identity, phi1 = u1 gives the law u_{0,t} - u_{2,t} = u2 + u1
    assert inst.pde.G == jv("u2") + jv("u1")
    assert inst.params.lam == 0
    assert inst.forms[0] == OneForm(jv("u0") - jv("u2"), jv("u1"))


OPAQUE_CASES = [
    FamilyParams("T22", mu2="3/4", eta2="-2", sign=-1, f_slot=None,
                 phi1_slot=None),
    FamilyParams("T22", mu2="4/3", eta2="5", sign=1,
                 f_slot="exp(u0 - u2)", phi1_slot="u0^2 + u1^3"),
    FamilyParams("T23", mu2="1/2", mu3="-1/5", eta2="5", eta3="4", lam="2",
                 f_slot=None),
    FamilyParams("T24", mu2="3/4", eta2="2", lam="1/2", c1="-3", sign=-1,
                 f_slot=None, phi1_slot=None),
    FamilyParams("T24", mu2=0, eta2=0, lam=1, c1=2, sign=1,
                 f_slot="2*u0 - 2*u2 + 1", phi1_slot="u1^2"),
    FamilyParams("T25i", mu2="3/4", eta2="5/3", lam=1, c2=3, theta="1/2",
                 nu=3, sigma=2, sign=-1),
    FamilyParams("T25i", mu2=0, eta2=1, lam=0, c2=1, theta=2, nu=1, sigma=1,
                 sign=1),
    FamilyParams("T25ii", mu2=0, eta2="5/2", lam=1, tau=3, nu=5, sigma=1,
                 sign=-1, vphi_slot="exp(u0)"),
    FamilyParams("T25ii", mu2="1/2", eta2=2, lam=3, tau=1, nu=2, sigma=4,
                 sign=1, vphi_slot=None),
]


@pytest.mark.parametrize("params", OPAQUE_CASES,
                         ids=lambda p: f"{p.kind}/{p.sign:+d}")
def test_hard_slices_verify(params):
    inst = build_family(params)
    assert verify_pss(inst).ok
    lem = lemma21_check(inst)
    assert lem.all_passed
    assert lem.delta_solved == 1


def test_kind_signatures():
    sigs = {}
    for kind in ALL_KINDS:
        inst = build_family(default_params(kind))
        sigs[kind] = (inst.Q.is_zero, inst.L2.is_zero, inst.gamma == 0)
    assert sigs["T22"] == (True, True, True)
    assert sigs["T23"] == (True, True, False)
    assert sigs["T24"] == (True, False, True)
    assert sigs["T25i"] == (False, False, False)
    assert sigs["T25ii"] == (False, False, False)


def test_validation_errors():
    with pytest.raises(FamilyError, match="eta2 != 0"):
        build_family(FamilyParams("T22", mu2=0, eta2=0, phi1_slot="u1"))
    with pytest.raises(FamilyError, match="constraint"):
        build_family(FamilyParams("T23", mu2="1/2", mu3="-1/10", eta2=5,
                                  eta3=4, lam=2))
    with pytest.raises(FamilyError, match="lam\\*eta2"):
        build_family(FamilyParams("T23", mu2=0, mu3=0, eta2=1, eta3=1, lam=0))
    with pytest.raises(FamilyError, match="c1"):
        build_family(FamilyParams("T24", mu2=0, eta2=0, lam=1, c1=0,
                                  phi1_slot="u1"))
    with pytest.raises(FamilyError, match="lam\\^2"):
        build_family(FamilyParams("T25i", lam=0, c2=0, theta=1, nu=1, sigma=1))
    with pytest.raises(FamilyError, match="tau, nu, sigma"):
        build_family(FamilyParams("T25ii", eta2=1, tau=0, nu=1, sigma=1,
                                  vphi_slot="1"))
    with pytest.raises(FamilyError, match="Pythagorean"):
        build_family(FamilyParams("T22", mu2=1, eta2=1, phi1_slot="u1"))
    with pytest.raises(FamilyError, match="nonzero phi1"):
        build_family(FamilyParams("T22", mu2=0, eta2=1, phi1_slot="0"))
    with pytest.raises(FamilyError, match="rational"):
        FamilyParams("T22", mu2=0.75, eta2=1)


def test_concrete_f_must_have_invertible_derivative():
    with pytest.raises(FamilyError, match="single product term"):
        build_family(FamilyParams("T22", mu2=0, eta2=1,
                                  f_slot="(u0 - u2)^2", phi1_slot="u1"))
    with pytest.raises(FamilyError, match="u0 - u2"):
        build_family(FamilyParams("T22", mu2=0, eta2=1, f_slot="u0 + u2",
                                  phi1_slot="u1"))


def test_lemma21_all_pass_and_delta_is_one():
    for kind in ALL_KINDS:
        inst = build_family(default_params(kind))
        rep = lemma21_check(inst)
        assert rep.all_passed, (kind, [c for c in rep.conditions if not c.passed])
        assert rep.delta_solved == 1, kind


def test_lemma21_explicit_delta():
    inst = build_family(default_params("T22"))
    good = lemma21_check(inst, delta=Fraction(1))
    assert good.all_passed
    bad = lemma21_check(inst, delta=Fraction(2))
    names = {c.cond: c.passed for c in bad.conditions}
    assert not names["third-form compatibility (delta)"]


def test_lemma21_witness_nonzero():
    inst = build_family(default_params("T22"))
    rep = lemma21_check(inst)
    w = [c for c in rep.conditions if c.cond == "nondegeneracy witness"]
    assert w and w[0].passed and "u1" in w[0].detail


def test_lemma21_rejects_sg():
    with pytest.raises(FamilyError):
        lemma21_check(build_family(default_params("SG")))


def test_planted_defect_fails_first_condition():
    inst = build_family(default_params("T22"))
    w1 = inst.forms[0]
    mutated = inst.with_forms([OneForm(jv("u1"), w1.cdt), *inst.forms[1:]])
    rep = lemma21_check(mutated)
    first = rep.conditions[0]
    assert first.cond == "dx-coefficient 1 independent of u1"
    assert not first.passed


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_mutation_breaks_verification(kind):
    inst = build_family(default_params(kind))
    w1 = inst.forms[0]
    mutated = inst.with_forms(
        [OneForm(w1.cdx + jv("u1"), w1.cdt), *inst.forms[1:]])
    rep = verify_pss(mutated)
    assert not rep.ok
    assert any(not r.is_zero for r in rep.residuals.residuals)


def test_t25i_scalars_rederived_independently():
    """The builder's closed forms for (zeta1, eta3) agree with an affine
    solve of the raw structure residuals, on every slice."""
    from psskit.families import _t25i_forms, _t25i_pde, _rho_of
    from psskit.cartan import structure_residuals
    slices = [
        FamilyParams("T25i", mu2=0, eta2=1, lam=1, c2=0, theta=1, nu=1, sigma=1),
        FamilyParams("T25i", mu2=0, eta2=1, lam=1, c2=0, theta=2, nu=1, sigma=1),
        FamilyParams("T25i", mu2="3/4", eta2="5/3", lam=1, c2=3, theta="1/2",
                     nu=3, sigma=2, sign=-1),
        FamilyParams("T25i", mu2="4/3", eta2=2, lam=2, c2=1, theta=3, nu=2,
                     sigma=5),
    ]
    for p in slices:
        rho = _rho_of(p.mu2)

        def residuals(z, e):
            return structure_residuals(*_t25i_forms(p, rho, e),
                                       _t25i_pde(p, z)).raw

        r00 = residuals(Fraction(0), Fraction(0))
        rz = [a - b for a, b in zip(residuals(Fraction(1), Fraction(0)), r00)]
        re = [a - b for a, b in zip(residuals(Fraction(0), Fraction(1)), r00)]
        solved = _solve_affine_pair(r00, rz, re)
        assert solved == t25i_scalars(p)


def test_t25i_displayed_zeta1_differs_by_fixed_term():
    # the published closed form misses 2*eta2^2/(theta*(1+mu2^2))
    for p in (default_params("T25i"),
              FamilyParams("T25i", mu2="3/4", eta2="5/3", lam=1, c2=3,
                           theta="1/2", nu=3, sigma=2)):
        z, _e3 = t25i_scalars(p)
        gap = 2 * p.eta2 ** 2 / (p.theta * (1 + p.mu2 ** 2))
        assert z - t25i_displayed_zeta1(p) == gap


def test_t25i_inconsistent_eta3_rejected():
    p = default_params("T25i")
    z, e3 = t25i_scalars(p)
    with pytest.raises(FamilyError, match="consistent value"):
        build_family(FamilyParams("T25i", mu2=0, eta2=1, lam=1, c2=0, theta=1,
                                  nu=1, sigma=1, eta3=e3 + 1))


def test_t25ii_admissibility():
    ks = t25ii_admissible_k("1/2", 2, 1, 2, 1)
    assert ks == (Fraction(-6, 5), Fraction(2))
    for k in ks:
        mu3, eta3 = t25ii_mu3_eta3("1/2", 2, 1, 2, 1, k)
        assert mu3 * 2 - Fraction(1, 2) * eta3 == k
    with pytest.raises(FamilyError, match="admissibility"):
        t25ii_admissible_k("1/2", 2, 2, "1/2", 1)


def test_t25ii_inadmissible_pair_rejected():
    mu3, eta3 = t25ii_mu3_eta3(0, 1, 1, 1, 1, "1/3")
    with pytest.raises(FamilyError, match="does not close"):
        build_family(FamilyParams("T25ii", mu2=0, eta2=1, lam=1, tau=1, nu=1,
                                  sigma=1, mu3=mu3, eta3=eta3, vphi_slot="1"))


def test_sign_branch_pairs_share_pde_where_displayed():
    # the T25i evolution law carries no branch sign
    a = build_family(default_params("T25i", 1))
    b = build_family(default_params("T25i", -1))
    assert is_zero(a.pde.G - b.pde.G)


def test_verify_report_dict():
    rep = verify_pss(build_family(default_params("T22")))
    d = rep.to_dict()
    assert d["zero"] and d["ok"] and d["family"] == "T22"
    assert d["residuals"] == ["0", "0", "0"]
    assert "cleared_denominator" in d


def test_phi_depend_only_on_u0_u1():
    for kind in ALL_KINDS:
        inst = build_family(default_params(kind))
        for phi in inst.phi:
            assert all(v[0] == "u" and v[1] <= 1 for v in phi.support_vars())


def test_all_stored_expressions_roundtrip():
    from psskit.jetalg import parse_expr, render
    for params in [default_params(k) for k in ALL_KINDS + ("SG",)] + OPAQUE_CASES:
        inst = build_family(params)
        stored = [w.cdx for w in inst.forms] + [w.cdt for w in inst.forms]
        if inst.pde.G is not None:
            stored.append(inst.pde.G)
        if inst.phi:
            stored.extend([*inst.phi, inst.L2, inst.L3, inst.M, inst.N, inst.Q])
        for e in stored:
            assert parse_expr(render(e)) == e
