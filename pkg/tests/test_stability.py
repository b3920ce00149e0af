import numpy as np
import pytest

from polyproj.builtins import builtin, ex6_projection
from polyproj.errors import AnchorInsideSet
from polyproj.projection import normal_cone_contains, project
from polyproj.representations import anchor_projection
from polyproj.scenario import instantiate, scenario_from_dict
from polyproj.stability import (
    discontinuity_probe, fit_estimate, gph_liminf_check, gr_transplant_check, lipschitz_like_C,
)

CONST = scenario_from_dict({
    "n": 2, "d": 1,
    "constraints": [{"kind": "ineq", "g": ["1", "0"], "f": "0"}, {"kind": "ineq", "g": ["0", "1"], "f": "0"}],
    "anchors": {"p": [0.0], "v": [1.0, 2.0]},
})


def test_ex6s_lipschitz_fit():
    s = builtin("ex6s")
    rep = fit_estimate(s, s.anchor_p, s.anchor_v, alpha=1)
    assert rep.fitted_l0 == pytest.approx(np.sqrt(2), rel=0.05)
    assert rep.verdict == "lipschitz-certified" and rep.kappa0 == 1


def test_ex6s_fit_matches_closed_form_oracle():
    """Worst ratio from the closed-form projection over the same pairs."""
    s = builtin("ex6s")
    rep = fit_estimate(s, s.anchor_p, s.anchor_v, alpha=1, shells=1)
    w = rep.worst_pair
    x1, x2 = ex6_projection(w["p1"][0]), ex6_projection(w["p2"][0])
    lhs = np.linalg.norm(2 * (x1 - x2))
    assert rep.fitted_l0 == pytest.approx(lhs / abs(w["p1"][0] - w["p2"][0]), rel=1e-9)
    assert rep.fitted_l0 <= np.sqrt(2) + 1e-9


def test_radius_zero_gives_zero_fit():
    for name in ("ex1", "ex6s", "hatc-demo"):
        s = builtin(name)
        rep = fit_estimate(s, s.anchor_p, s.anchor_v, radius_p=0.0, radius_v=0.5, shells=1, n_pairs=32)
        assert rep.fitted_l0 == 0
        for f in rep.shells:
            assert f.fne_violation <= 1e-9


def test_ex1_not_lipschitz():
    s = builtin("ex1")
    rep = fit_estimate(s, s.anchor_p, s.anchor_v, alpha=1)
    assert rep.verdict == "not-lipschitz"
    fits = [f.fitted_l0 for f in rep.shells]
    # average growth per halving of the radius
    assert (fits[-1] / fits[0]) ** (1 / (len(fits) - 1)) >= 2


@pytest.mark.parametrize("name", ["ex1", "ex2", "ex6s", "hatc-demo"])
def test_alpha_one_dominates_alpha_half(name):
    """Same pairs, |dp| <= 1 so |dp| <= |dp|^0.5 and the alpha=1 quotient is larger."""
    s = builtin(name)
    r1 = fit_estimate(s, s.anchor_p, s.anchor_v, alpha=1, shells=3)
    r5 = fit_estimate(s, s.anchor_p, s.anchor_v, alpha=0.5, shells=3)
    for a, b in zip(r1.shells, r5.shells):
        assert a.fitted_l0 >= b.fitted_l0 - 1e-12


def test_l0_input_violation():
    s = builtin("ex6s")
    rep = fit_estimate(s, s.anchor_p, s.anchor_v, l0_input=1.5, shells=2)
    assert rep.max_violation_at <= 0
    rep = fit_estimate(s, s.anchor_p, s.anchor_v, l0_input=0.5, shells=2)
    assert rep.max_violation_at > 0


def test_lipschitz_like_examples():
    ex2 = builtin("ex2")
    assert lipschitz_like_C(ex2, [0, 0], [0, 0]).l_est == pytest.approx(1, rel=0.1)
    assert lipschitz_like_C(CONST, [0], [0, 0]).l_est == 0
    h = builtin("hatc-demo")
    x = anchor_projection(h, h.anchor_p, h.anchor_v)
    rep = lipschitz_like_C(h, h.anchor_p, x, shells=3)
    assert np.isfinite(rep.l_est) and rep.shell_stable


def test_gr_transplant_ex6s():
    s = builtin("ex6s")
    rep = gr_transplant_check(s, s.anchor_p, s.anchor_v, (2,), stability_checked=True)
    assert rep.all_pass and np.isfinite(rep.ell) and rep.flags == []
    for w in rep.witnesses:
        poly2 = instantiate(s, w.p2)
        assert normal_cone_contains(poly2, w.x2, w.x2_normal)
        assert w.dist_x + w.dist_normal <= 2 * w.bound + 1e-9


def test_gr_transplant_constant_scenario():
    rep = gr_transplant_check(CONST, [0], [1, 2], (0, 1))
    assert rep.all_pass and "unverified-hypothesis" in rep.flags
    for w in rep.witnesses:
        assert w.dist_x == 0 and w.dist_normal == 0


def test_gr_transplant_ex1_records_failures():
    s = builtin("ex1")
    rep = gr_transplant_check(s, s.anchor_p, s.anchor_v, (0,))
    assert not rep.all_pass
    assert any(w.reason for w in rep.witnesses)


def test_discontinuity_examples():
    s = builtin("ex1")
    rep = discontinuity_probe(s, s.anchor_p, s.anchor_v)
    assert rep.max_jump >= 0.99 and rep.discontinuous
    ex2 = builtin("ex2")
    rep = discontinuity_probe(ex2, ex2.anchor_p, ex2.anchor_v)
    assert not rep.discontinuous
    for r, jmp in zip(rep.radii, rep.shell_jumps):
        assert jmp <= 2 * r + 1e-12
    assert discontinuity_probe(CONST, [0], [1, 2]).max_jump == 0


def test_gph_liminf_examples():
    for name, expect in (("ex2", True), ("ex6s", True), ("ex1", False)):
        s = builtin(name)
        assert gph_liminf_check(s, s.anchor_p, s.anchor_v).holds is expect
    with pytest.raises(AnchorInsideSet):
        gph_liminf_check(CONST, [0], [-1, -1])


def test_ex6s_certifications_agree():
    s = builtin("ex6s")
    fit = fit_estimate(s, s.anchor_p, s.anchor_v, shells=3)
    x = project(instantiate(s, s.anchor_p), s.anchor_v).x
    aub = lipschitz_like_C(s, s.anchor_p, x, shells=3)
    gr = gr_transplant_check(s, s.anchor_p, s.anchor_v, (2,), stability_checked=True)
    assert np.isfinite(fit.fitted_l0) and np.isfinite(aub.l_est) and gr.all_pass
