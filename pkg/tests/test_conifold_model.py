"""Model construction, compatibility, gluing, cutoff and rescaling."""

import math

import numpy as np
import pytest

from conifold_lab.conifold_model import (
    Cap,
    Component,
    ConifoldModel,
    EndSpec,
    GluedFamily,
    GluingError,
    check_compatible,
    cutoff_eta,
    dumbbell_family,
    model_from_config,
    model_to_config,
    neck_convergence_check,
    parametric_connect_sum,
    preset_model,
    rescale,
    spindle_family,
    warp_preset,
)
from conifold_lab.link_spectra import make_link

S2 = make_link("sphere", dim=2)


def hyperboloid_marked(beta=-0.5, Rhat=1.0):
    return ConifoldModel(3, (Component(
        link=S2, warp=warp_preset("hyperboloid", 1.0),
        left=Cap(),
        right=EndSpec("AC", S2, nu=-2.0, beta=beta, boundary=Rhat, marked=True),
    ),), label="hyperboloid_marked")


def test_check_compatible_pass():
    L = preset_model("exact_cone_cs_ac", beta=-0.5)  # CS eps = 2 marked
    report = check_compatible(L, hyperboloid_marked(beta=-0.5, Rhat=1.0))
    assert report.passed, report.failures()


def test_check_compatible_weight_mismatch():
    L = preset_model("exact_cone_cs_ac", beta=-0.5)
    report = check_compatible(L, hyperboloid_marked(beta=-0.4, Rhat=1.0))
    assert not report.passed
    assert any("weights" in c.code for c in report.failures())


def test_check_compatible_radius_violation():
    L = preset_model("exact_cone_cs_ac", beta=-0.5)
    report = check_compatible(L, hyperboloid_marked(beta=-0.5, Rhat=3.0))
    assert not report.passed
    assert any("radii" in c.code for c in report.failures())


def test_parametric_connect_sum_rejects_large_t():
    # a tight host chart (eps = 0.5) forces 2 t^tau < 0.5, so t = 0.1 is too big
    cone = ConifoldModel(3, (Component(
        link=S2, warp=warp_preset("exact_cone"),
        left=EndSpec("CS", S2, nu=1.0, beta=-0.5, boundary=0.5, marked=True),
        right=EndSpec("AC", S2, nu=-1.0, beta=-0.5, boundary=2.0),
    ),))
    partner = ConifoldModel(3, (Component(
        link=S2, warp=warp_preset("hyperboloid", 0.1),
        left=Cap(),
        right=EndSpec("AC", S2, nu=-2.0, beta=-0.5, boundary=0.25, marked=True),
    ),))
    fam = GluedFamily(cone, partner, tau=0.5, a=0.4, b=0.2)
    with pytest.raises(GluingError, match="t\\*Rhat < t\\^tau"):
        fam.at(0.1)
    assert fam.at(0.01).geometry.junctions[0].eps == 0.5


def test_glued_family_requires_ordered_cutoffs():
    L = preset_model("exact_cone_cs_ac")
    with pytest.raises(GluingError, match="0 < b < a < tau"):
        GluedFamily(L, preset_model("rxs2"), tau=0.5, a=0.2, b=0.4)


def test_exact_cone_gluing_is_identity_profile():
    cone = preset_model("exact_cone_cs_ac")
    hat = ConifoldModel(3, (Component(
        link=S2, warp=warp_preset("exact_cone"),
        left=EndSpec("CS", S2, nu=1.0, beta=-0.5, boundary=2.0),
        right=EndSpec("AC", S2, nu=-1.0, beta=-0.5, boundary=1.0, marked=True),
    ),))
    glued = parametric_connect_sum(cone, hat, 0.01, tau=0.5, a=0.4, b=0.2)
    xs = np.geomspace(1e-4, 500.0, 200)
    assert np.max(np.abs(glued.geometry.f(xs) - xs)) < 1e-14
    rows = neck_convergence_check(glued.family, 0.01, j_max=1)
    assert all(row["sup"] < 1e-12 for row in rows)


def test_dumbbell_neck_layout_matches_parameters():
    fam = dumbbell_family()
    glued = fam.at(0.01)
    (J,) = glued.geometry.junctions
    assert J.t * J.Rhat == pytest.approx(0.01)
    assert J.eps == 2.0
    # interpolation band [t^tau, 2 t^tau] = [0.1, 0.2]
    assert 0.01**0.5 == pytest.approx(0.1)
    f_in = float(glued.geometry.f(0.099))
    f_band = float(glued.geometry.f(0.15))
    f_out = float(glued.geometry.f(0.21))
    assert f_in == pytest.approx(math.sqrt(0.099**2 + 0.01**2), rel=1e-12)
    assert f_out == pytest.approx(0.21, rel=1e-12)
    assert min(f_in, f_out) < f_band < max(math.sqrt(0.15**2 + 1e-4), 0.16)


def test_glued_fields_continuous_and_positive():
    for fam, t in ((dumbbell_family(), 1e-3), (spindle_family(), 1e-2)):
        geo = fam.at(t).geometry
        if geo.circle:
            xs = np.linspace(0.0, geo.period, 4001, endpoint=False)
        else:
            xs = np.concatenate([-np.geomspace(1e-6, 100.0, 1500)[::-1],
                                 np.geomspace(1e-6, 100.0, 1500)])
        f = geo.f(xs)
        rho = geo.rho(xs)
        assert np.all(f > 0)
        assert np.all(rho > 0)
        # continuity: successive samples differ by O(local spacing)
        rel_jump = np.abs(np.diff(f)) / np.maximum(f[:-1], 1e-12)
        dx = np.abs(np.diff(xs))
        assert np.all(rel_jump < 50.0 * dx / np.maximum(rho[:-1], 1e-12) + 1e-9)


def test_glued_radius_continuous_and_blend_c2():
    fam = dumbbell_family()
    t = 1e-3
    geo = fam.at(t).geometry
    (J,) = geo.junctions
    r1, r2 = t**0.5, 2 * t**0.5
    # radius function continuity across all region boundaries
    for edge in (t * J.Rhat, r1, r2, J.eps):
        lo, hi = (1 - 1e-9) * edge, (1 + 1e-9) * edge
        vals = geo.rho(np.array([lo, hi]))
        assert abs(vals[1] - vals[0]) < 1e-6 * edge
    # the squared-warp blend is C^2 at both band edges: f and f' match,
    # and f'' jumps by at most the O(h) of the probe itself
    for edge in (r1, r2):
        eps_ = 1e-8 * edge
        xs = np.array([edge - eps_, edge + eps_])
        f = geo.f(xs)
        fp = geo.fp(xs)
        fpp = geo.fpp(xs)
        assert abs(f[1] - f[0]) < 1e-6 * f[0]
        assert abs(fp[1] - fp[0]) < 1e-5 * max(1.0, abs(fp[0]))
        assert abs(fpp[1] - fpp[0]) < 1e-3 * max(1.0, abs(fpp[0]))


def test_beta_locally_constant_on_necks():
    fam = dumbbell_family()
    geo = fam.at(1e-3).geometry
    (J,) = geo.junctions
    r = np.geomspace(J.t * J.Rhat, J.eps, 100)
    assert np.all(geo.beta(J.center + J.direction * r) == -0.5)


def test_spindle_circle_period_is_t_independent():
    fam = spindle_family()
    for t in (1e-1, 1e-2, 1e-3):
        geo = fam.at(t).geometry
        assert geo.circle
        assert geo.period == pytest.approx(math.pi, rel=1e-12)


def test_spindle_t_vector_must_match_within_component():
    fam = spindle_family()
    with pytest.raises(GluingError, match="agree within partner component"):
        fam.at((1e-2, 2e-2))


def test_rescale_examples():
    hyp = preset_model("hyperboloid_capped")
    scaled = rescale(hyp, 2.0)
    xs = np.linspace(0.1, 10.0, 50)
    got = scaled.components[0].warp.f(xs)
    assert np.allclose(got, np.sqrt(xs**2 + 4.0), rtol=1e-14)
    # chart boundaries scale, rates do not
    assert scaled.components[0].right.boundary == 2.0
    assert scaled.components[0].right.nu == -2.0


def test_rescale_group_action():
    hyp = preset_model("hyperboloid_capped")
    double = rescale(rescale(hyp, 0.5), 3.0)
    direct = rescale(hyp, 1.5)
    xs = np.linspace(0.05, 20.0, 101)
    a = double.components[0].warp.f(xs)
    b = direct.components[0].warp.f(xs)
    assert np.max(np.abs(a - b) / np.abs(b)) < 1e-14


def test_rescale_exact_cone_invariant():
    cone = preset_model("exact_cone_cs_ac")
    scaled = rescale(cone, 0.3)
    xs = np.geomspace(1e-3, 100, 64)
    assert np.allclose(scaled.components[0].warp.f(xs), xs, rtol=1e-14)


def test_cutoff_eta_support_and_values():
    eta = cutoff_eta(1e-3, 0.4, 0.2)
    t = 1e-3
    assert float(eta(t**0.4)) == 0.0
    assert float(eta(t**0.2)) == 1.0
    assert float(eta(t**0.5)) == 0.0  # below t^a
    assert float(eta.deriv(t**0.45, 1)) == 0.0  # outside the transition
    assert float(eta.deriv(t**0.1, 1)) == 0.0


def test_cutoff_eta_derivative_ratio_two():
    def max_r_eta1(t):
        eta = cutoff_eta(t, 0.4, 0.2)
        s = np.linspace(0.2, 0.4, 20001)
        r = t**s
        return float(np.max(np.abs(r * eta.deriv(r, 1))))

    ratio = max_r_eta1(1e-2) / max_r_eta1(1e-4)
    assert abs(ratio - 2.0) < 0.2  # |log 1e-4| / |log 1e-2| = 2, within 10%


def test_cutoff_eta_log_bound_uniform_over_four_decades():
    vals = []
    for t in (1e-1, 1e-2, 1e-3, 1e-4):
        eta = cutoff_eta(t, 0.4, 0.2)
        s = np.linspace(0.2, 0.4, 20001)
        r = t**s
        vals.append(float(np.max(np.abs(r * eta.deriv(r, 1)))) * abs(math.log(t)))
    assert max(vals) / min(vals) < 1.0 + 1e-9


def test_neck_convergence_decreasing_on_dumbbell():
    fam = dumbbell_family()
    sups = {0: [], 1: []}
    for t in (1e-1, 1e-2, 1e-3):
        rows = neck_convergence_check(fam, t, j_max=1)
        for row in rows:
            sups[row["j"]].append(row["sup"])
    for j in (0, 1):
        seq = sups[j]
        assert all(b < a for a, b in zip(seq, seq[1:]))


def test_config_roundtrip():
    model = preset_model("exact_cone_cs_ac", beta=-0.5)
    cfg = model_to_config(model)
    back = model_from_config(cfg)
    assert back.m == model.m
    (c0,), (c1,) = model.components, back.components
    assert c0.link == c1.link
    assert [s.beta for _, s in c0.ends()] == [s.beta for _, s in c1.ends()]
    xs = np.geomspace(0.01, 50, 20)
    assert np.allclose(c0.warp.f(xs), c1.warp.f(xs), rtol=1e-14)


def test_marked_weights_must_agree_within_component():
    with pytest.raises(ValueError, match="equal weights"):
        ConifoldModel(3, (Component(
            link=S2, warp=warp_preset("sine_spindle"),
            left=EndSpec("CS", S2, nu=2.0, beta=-0.5, boundary=1.0, marked=True),
            right=EndSpec("CS", S2, nu=2.0, beta=-0.4, boundary=1.0, marked=True),
            length=math.pi,
        ),))


def test_single_ac_must_sit_right():
    with pytest.raises(ValueError, match="right"):
        Component(link=S2, warp=warp_preset("hyperboloid", 1.0),
                  left=EndSpec("AC", S2, nu=-2.0, beta=-0.5, boundary=1.0),
                  right=Cap())


def test_end_sign_conventions_enforced():
    with pytest.raises(ValueError, match="nu > 0"):
        EndSpec("CS", S2, nu=-1.0, beta=0.0, boundary=1.0)
    with pytest.raises(ValueError, match="nu < 0"):
        EndSpec("AC", S2, nu=1.0, beta=0.0, boundary=1.0)


def test_marked_window_for_gluing():
    # marked weights outside (2-m, 0) still glue (the window is checked by
    # the solvers); but compatibility requires equality, verified here
    L = preset_model("exact_cone_cs_ac", beta=-0.5)
    H = hyperboloid_marked(beta=-0.5)
    fam = GluedFamily(L, H, tau=0.5, a=0.4, b=0.2)
    glued = fam.at(1e-2)
    assert glued.geometry.junctions[0].beta == -0.5


def test_chain_gluing_two_partners_caps_both_ends():
    # spindle host with two marked conical points, each desingularized by
    # its own capped partner: the glued space is a compact interval with
    # smooth centers at both ends and two necks
    L = preset_model("sine_spindle", beta=-0.5)
    def capped(label):
        return Component(
            link=S2, warp=warp_preset("hyperboloid", 0.5),
            left=Cap(),
            right=EndSpec("AC", S2, nu=-2.0, beta=-0.5, boundary=0.5, marked=True),
            label=label,
        )
    partner = ConifoldModel(3, (capped("h1"), capped("h2")), label="two_caps")
    fam = GluedFamily(L, partner, tau=0.5, a=0.4, b=0.2)
    glued = fam.at(1e-2)
    geo = glued.geometry
    assert not geo.circle
    assert geo.left.kind == "cap" and geo.right.kind == "cap"
    assert len(geo.junctions) == 2
    xs = np.linspace(geo.left.x0 + 1e-9, geo.right.x0 - 1e-9, 3001)
    f = geo.f(xs)
    assert np.all(f > 0)
    # far from the necks the host warp is untouched
    mid = xs[np.argmin(np.abs(xs - math.pi / 2))]
    assert float(geo.f(mid)) == pytest.approx(math.sin(mid), rel=1e-12)
