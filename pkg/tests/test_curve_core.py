import numpy as np
import pytest

from centroaffine import canonical
from centroaffine import curve_core as cc
from centroaffine.errors import (
    DegenerateInit,
    InvariantViolation,
    IrregularPoint,
    TooFewRegularPoints,
    Unclassified,
    WrongOrientation,
)

from conftest import analytic_signature, derivatives_at, random_gl2, sampled_curve_from


# ---------------------------------------------------------------------------
# brackets
# ---------------------------------------------------------------------------

def test_bracket_examples():
    assert cc.bracket((1.0, 0.0), (0.0, 1.0)) == 1.0
    assert cc.bracket((1.0, 0.0), (1.0, 0.0)) == 0.0
    # hand determinant: 2*4 - 1*3
    assert cc.bracket((2.0, 1.0), (3.0, 4.0)) == 5.0


def test_bracket_bilinear_antisymmetric(rng):
    for _ in range(50):
        a, b, c = rng.normal(size=(3, 2))
        lam = rng.normal()
        assert cc.bracket(a, b) == pytest.approx(-cc.bracket(b, a))
        assert cc.bracket(lam * a + c, b) == pytest.approx(
            lam * cc.bracket(a, b) + cc.bracket(c, b), rel=1e-12, abs=1e-12)


# ---------------------------------------------------------------------------
# pointwise invariants
# ---------------------------------------------------------------------------

def test_invariants_unit_circle():
    circ = canonical.unit_circle()
    for p in (0.0, 0.7, 2.1, 5.0):
        s = cc.invariants_at(derivatives_at(circ, p))
        assert s.eps == 1
        assert s.g == pytest.approx(1.0, abs=1e-12)
        assert s.kappa == pytest.approx(0.0, abs=1e-12)


def test_invariants_hyperbola():
    hyp = canonical.hyperbola()
    d = derivatives_at(hyp, 1.0)
    # analytic brackets at p = 1: [x, x'] = -2/p, [x', x''] = 2/p^3
    assert cc.bracket(d.pos, d.d1) == pytest.approx(-2.0)
    assert cc.bracket(d.d1, d.d2) == pytest.approx(2.0)
    s = cc.invariants_at(d)
    assert s.eps == -1
    assert s.kappa == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("phi", [np.pi / 3, np.pi / 6])
def test_invariants_log_spiral(phi):
    sp = canonical.log_spiral(phi)
    for p in (0.0, 1.3, 4.0):
        s = cc.invariants_at(derivatives_at(sp, p))
        assert s.eps == 1
        assert s.kappa == pytest.approx(2 * np.cos(phi), abs=1e-11)


def test_irregular_point_raises():
    # straight line through the origin: [x, x'] = 0
    d = cc.Derivatives3((1.0, 2.0), (0.5, 1.0), (0.0, 0.0), (0.0, 0.0))
    with pytest.raises(IrregularPoint):
        cc.invariants_at(d)


def test_gl2_invariance_pointwise(rng):
    curves = [canonical.unit_circle(), canonical.log_spiral(1.1),
              canonical.power_curve(0.3), canonical.x_log_x(),
              canonical.hyperbola()]
    for _ in range(30):
        A = random_gl2(rng, max_cond=50)
        curve = curves[rng.integers(len(curves))]
        p = rng.uniform(*curve.param_range)
        d = derivatives_at(curve, p)
        base = cc.invariants_at(d)
        moved = cc.invariants_at(cc.Derivatives3(A @ d.pos, A @ d.d1,
                                                 A @ d.d2, A @ d.d3))
        assert moved.eps == base.eps
        assert moved.g == pytest.approx(base.g, rel=1e-9)
        assert moved.kappa == pytest.approx(base.kappa, rel=1e-9, abs=1e-9)


# ---------------------------------------------------------------------------
# graph-form curvature
# ---------------------------------------------------------------------------

def test_curvature_graph_power_curves():
    for alpha in (0.25, 1.0 / 9.0):
        pc = canonical.power_curve(alpha)
        jet = cc.jet_from_derivatives(derivatives_at(pc, 1.0), pc(np.array([1.0]), 4)[0])
        eps, kappa = cc.curvature_graph(jet)
        assert eps == 1
        assert kappa == pytest.approx(1 / np.sqrt(alpha) + np.sqrt(alpha), rel=1e-12)


def test_curvature_graph_x_log_x():
    x = canonical.x_log_x()
    jet = cc.jet_from_derivatives(derivatives_at(x, 1.0))
    eps, kappa = cc.curvature_graph(jet)
    assert eps == 1
    assert kappa == pytest.approx(2.0, rel=1e-12)


def test_curvature_graph_finite_difference_jet():
    # y = x^(1/9) at x = 1 via a finite-difference jet (independent route)
    alpha = 1.0 / 9.0
    h = 1e-2
    x = 1.0 + h * np.arange(-3, 4)
    y = x ** alpha
    w = cc.fornberg_weights(1.0, x, 3)
    jet = cc.CurveJet(1.0, 1.0, float(w[1] @ y), float(w[2] @ y), float(w[3] @ y))
    eps, kappa = cc.curvature_graph(jet)
    assert eps == 1
    assert kappa == pytest.approx(3.0 + 1.0 / 3.0, abs=1e-5)


def test_graph_parametric_consistency():
    # both curvature routes agree after the pinned normalization
    curves = [canonical.power_curve(0.4), canonical.x_log_x(),
              canonical.hyperbola()]
    for curve in curves:
        for p in np.linspace(0.7, 1.8, 7):
            d = derivatives_at(curve, p)
            sample = cc.invariants_at(d)
            eps, kappa = cc.curvature_graph(cc.jet_from_derivatives(d))
            assert eps == sample.eps
            assert kappa == pytest.approx(sample.kappa, rel=1e-9, abs=1e-9)


def test_graph_factor_pinned_on_spiral():
    # ratio of the raw graph-form expression to the parametric curvature,
    # measured on the spiral with kappa = 1
    sp = canonical.log_spiral(np.pi / 3, theta_range=(-0.3, 0.3))
    d = derivatives_at(sp, 0.1)
    jet = cc.jet_from_derivatives(d)
    D = jet.x * jet.y1 - jet.y
    eps = 1 if jet.y2 / D > 0 else -1
    raw = ((3 * jet.x * jet.y2 ** 2 + (jet.y - jet.x * jet.y1) * jet.y3)
           / jet.y2 ** 2 * np.sqrt(eps * jet.y2 / D))
    kappa = cc.invariants_at(d).kappa
    assert raw / kappa == pytest.approx(1.0 / cc.GRAPH_CURVATURE_FACTOR, rel=1e-9)
    assert cc.GRAPH_CURVATURE_FACTOR == 0.5


# ---------------------------------------------------------------------------
# moving frame and jet invariantization
# ---------------------------------------------------------------------------

def test_moving_frame_circle_point():
    jet = cc.CurveJet(0.0, 1.0, 0.0, -1.0, 0.0)
    frame = cc.moving_frame(jet)
    assert frame.lam ** 4 == pytest.approx(1.0, abs=1e-12)
    u, v, vu, vuu, _ = cc.prolonged_action(frame, jet)
    assert abs(u) < 1e-12 and abs(v - 1) < 1e-12
    assert abs(vu) < 1e-12 and abs(vuu + 1) < 1e-12


def test_moving_frame_normalization_property(rng):
    count = 0
    while count < 40:
        jet = cc.CurveJet(*rng.uniform(-2, 2, size=5))
        D = jet.x * jet.y1 - jet.y
        if abs(D) < 0.2 or abs(jet.y2) < 0.2 or jet.y - jet.x * jet.y1 < 0:
            continue
        count += 1
        frame = cc.moving_frame(jet)
        eps = 1 if jet.y2 / D > 0 else -1
        u, v, vu, vuu, _ = cc.prolonged_action(frame, jet)
        assert abs(u) < 1e-10
        assert abs(v - 1) < 1e-10
        assert abs(vu) < 1e-10
        assert abs(vuu + eps) < 1e-10
        assert frame.a * frame.d - frame.b * frame.c == pytest.approx(1, abs=1e-12)


def test_moving_frame_wrong_orientation():
    x = canonical.x_log_x()
    jet = cc.jet_from_derivatives(derivatives_at(x, 1.0))  # y - x y_x = -1
    with pytest.raises(WrongOrientation):
        cc.moving_frame(jet)


def test_frame_third_order_invariant_matches_curvature():
    # iota(y_xxx) carries the graph-route scale: 2 * kappa for eps = +1
    pc = canonical.power_curve(0.25)
    jet = cc.jet_from_derivatives(derivatives_at(pc, 1.0))
    frame = cc.moving_frame(jet)
    i3 = cc.prolonged_action(frame, jet)[4]
    assert i3 == pytest.approx(2.0 * 2.5, rel=1e-10)


def _fd_kappa_s_oracle(curve, p, h=1e-4):
    """Finite-difference d(kappa)/ds via dense graph-curvature samples."""
    ps = p + h * np.arange(-2, 3)
    kappas = []
    gs = []
    for pi in ps:
        d = derivatives_at(curve, pi)
        sample = cc.invariants_at(d)
        kappas.append(sample.kappa)
        gs.append(sample.g)
    w = cc.fornberg_weights(p, ps, 1)
    dk_dp = float(w[1] @ np.array(kappas))
    return dk_dp / gs[2]


def test_jet4_raw_relation_pinned():
    # the raw order-4 substitution equals 2 eps kappa_s - 6 eps kappa^2 - 3
    curves = [canonical.power_curve(0.25),
              canonical.log_spiral(np.pi / 4, theta_range=(-0.5, 1.0))]
    for curve in curves:
        for p in np.linspace(0.2, 0.8, 5):
            d = derivatives_at(curve, p)
            d4 = curve(np.array([p]), 4)[0]
            jet = cc.jet_from_derivatives(d, d4)
            if jet.y - jet.x * jet.y1 < 0:
                continue
            raw = cc.fourth_order_invariant_raw(jet)
            sample = cc.invariants_at(d)
            ks = _fd_kappa_s_oracle(curve, p)
            expected = (2 * sample.eps * ks
                        - 6 * sample.eps * sample.kappa ** 2 - 3.0)
            assert raw == pytest.approx(expected, abs=1e-5)


def test_invariantize_jet4_examples():
    pc = canonical.power_curve(0.25)
    jet = cc.jet_from_derivatives(derivatives_at(pc, 1.0), pc(np.array([1.0]), 4)[0])
    # constant curvature: kappa_s = 0, so 1.5 * 2.5^2 - 3
    assert cc.invariantize_jet4(jet) == pytest.approx(6.375, abs=1e-9)
    # unit circle graph branch y = sqrt(1 - x^2) at x = 0
    circle_jet = cc.CurveJet(0.0, 1.0, 0.0, -1.0, 0.0, -3.0)
    assert cc.invariantize_jet4(circle_jet) == pytest.approx(-3.0, abs=1e-12)


def test_invariantize_jet4_identity_generic_curve():
    # |iota(y4) - (kappa_s + 1.5 kappa^2 - 3)| < 1e-5 with an FD kappa_s oracle
    sp = canonical.log_spiral(np.pi / 4, theta_range=(-0.5, 1.0))
    for p in np.linspace(0.0, 0.9, 10):
        d = derivatives_at(sp, p)
        jet = cc.jet_from_derivatives(d, sp(np.array([p]), 4)[0])
        if jet.y - jet.x * jet.y1 < 0:
            continue
        sample = cc.invariants_at(d)
        ks = _fd_kappa_s_oracle(sp, p)
        assert cc.invariantize_jet4(jet) == pytest.approx(
            ks + 1.5 * sample.kappa ** 2 - 3.0, abs=1e-5)


# ---------------------------------------------------------------------------
# signatures
# ---------------------------------------------------------------------------

def test_signature_unit_circle():
    curve = sampled_curve_from(canonical.unit_circle(), 256)
    sig = cc.signature(curve)
    assert np.all(sig.eps == 1)
    assert np.max(np.abs(sig.kappa)) < 1e-8
    spacing = np.diff(sig.s)
    assert np.allclose(spacing, spacing[0], atol=1e-9)
    assert sig.total_length == pytest.approx(2 * np.pi, abs=1e-8)


def test_signature_clipping_records_gap():
    # curvature profile with a narrow spike above the clip threshold
    def kappa(s):
        return 0.5 + 150.0 * np.exp(-((s - 2.0) / 0.05) ** 2)

    curve = cc.reconstruct_from_curvature(kappa, 1,
                                          (np.array([1.0, 0.0]), np.array([0.0, 1.0])),
                                          4.0, 800)
    sig = cc.signature(curve, clip=100.0)
    assert len(sig.clipped) > 0
    assert np.max(np.abs(sig.kappa)) <= 100.0
    assert sig.n + len(sig.clipped) + len(sig.irregular) == 801


def test_signature_too_few_regular():
    curve = sampled_curve_from(canonical.unit_circle(), 16)
    with pytest.raises(TooFewRegularPoints):
        cc.signature(curve, clip=1e-15)


def test_signature_gl2_invariance_analytic(rng):
    base = canonical.perturbed_circle([(2, 0.05, 0.3), (5, 0.02, 1.0)])
    ref = analytic_signature(base, 128)
    for _ in range(10):
        A = random_gl2(rng, max_cond=50)
        moved = analytic_signature(base, 128, matrix=A)
        assert np.max(np.abs(moved.kappa - ref.kappa)) < 1e-9
        assert np.max(np.abs(moved.s - ref.s)) < 1e-9
        assert np.array_equal(moved.eps, ref.eps)


def test_signature_reparametrization_invariance():
    sp = canonical.log_spiral(np.pi / 3)
    theta = np.linspace(0.0, 2.0, 200)
    pts = sp(theta, 0)
    plain = cc.signature(cc.SampledCurve(pts, False, theta))
    # orientation-preserving reparametrization of the same geometric samples
    warped = theta + 0.2 * np.sin(theta)
    warped_sig = cc.signature(cc.SampledCurve(pts, False, warped))
    assert np.max(np.abs(plain.kappa - warped_sig.kappa)) < 1e-6
    assert np.array_equal(plain.eps, warped_sig.eps)
    # cumulative trapezoid quadrature differs at O(h^2) between the grids
    assert plain.total_length == pytest.approx(warped_sig.total_length, abs=1e-5)


def test_signature_reversal_flips_kappa():
    base = canonical.perturbed_circle([(3, 0.05, 0.4)])
    curve = sampled_curve_from(base, 256)
    fwd = cc.signature(curve)
    rev = cc.signature(curve.reversed())
    # sample 0 of the reversed curve is the original last sample
    kappa_rev_reordered = rev.kappa[::-1]
    assert np.max(np.abs(kappa_rev_reordered + fwd.kappa)) < 1e-6
    assert np.array_equal(rev.eps[::-1], fwd.eps)


# ---------------------------------------------------------------------------
# arc length
# ---------------------------------------------------------------------------

def test_arc_length_circle_full_period():
    curve = sampled_curve_from(canonical.unit_circle(), 512)
    assert cc.arc_length(curve, 0, curve.n) == pytest.approx(2 * np.pi, abs=1e-9)
    assert cc.arc_length(curve, 5, 5) == 0.0


def test_arc_length_gl2_invariance(rng):
    base = canonical.unit_circle()
    for _ in range(5):
        A = random_gl2(rng, max_cond=10)
        curve = sampled_curve_from(base, 512, matrix=A)
        assert cc.arc_length(curve, 0, curve.n) == pytest.approx(2 * np.pi, abs=1e-6)


def test_arc_length_additive():
    curve = sampled_curve_from(canonical.perturbed_circle([(2, 0.05, 0.0)]), 256)
    total = cc.arc_length(curve, 0, 200)
    assert total == pytest.approx(cc.arc_length(curve, 0, 80)
                                  + cc.arc_length(curve, 80, 200), abs=1e-10)


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

def test_classify_examples():
    assert cc.classify_constant(2.5) == cc.ConstantCurvatureClass(
        "power_curve", alpha=0.25)
    assert cc.classify_constant(0.0).kind == "unit_circle"
    spiral = cc.classify_constant(1.0)
    assert spiral.kind == "log_spiral"
    assert spiral.phi == pytest.approx(np.pi / 3, rel=1e-12)
    assert cc.classify_constant(2.0).kind == "x_log_x"


def test_classify_negative_kappa_reversed():
    cls = cc.classify_constant(-1.0)
    assert cls.kind == "log_spiral" and cls.reversed
    assert cls.phi == pytest.approx(np.pi / 3)


def test_classify_eps_minus_one():
    assert cc.classify_constant(0.0, eps=-1).kind == "hyperbola"
    with pytest.raises(Unclassified):
        cc.classify_constant(1.0, eps=-1)


def test_format_class():
    assert cc.format_class(cc.classify_constant(2.5)) == "PowerCurve alpha=0.25"
    assert cc.format_class(cc.classify_constant(0.0)) == "UnitCircle"
    assert cc.format_class(cc.classify_constant(1.0)) == "LogSpiral phi=1.0472"


# ---------------------------------------------------------------------------
# reconstruction
# ---------------------------------------------------------------------------

def test_reconstruct_zero_kappa_is_circle():
    rec = cc.reconstruct_from_curvature(lambda s: 0.0, 1,
                                        (np.array([1.0, 0.0]), np.array([0.0, 1.0])),
                                        2 * np.pi, 2000)
    assert np.linalg.norm(rec.points[-1] - rec.points[0]) < 1e-6
    r = np.hypot(*rec.points.T)
    assert np.max(np.abs(r - 1)) < 1e-9


@pytest.mark.parametrize("kappa_const", [1.0, 2.5])
def test_reconstruct_constant_kappa(kappa_const):
    # kappa = 2.5 grows like e^{2s}; keep the arc short enough that finite
    # differences of the large coordinates stay roundoff-clean
    s_max, n = (4.0, 1200) if kappa_const == 1.0 else (2.0, 600)
    rec = cc.reconstruct_from_curvature(lambda s: kappa_const, 1,
                                        (np.array([1.0, 0.0]), np.array([0.0, 1.0])),
                                        s_max, n)
    sig = cc.signature(rec, clip=1e9)
    # one-sided stencils at the open ends limit the measurement there
    interior = slice(4, -4)
    assert np.max(np.abs(sig.kappa - kappa_const)[interior]) < 1e-6
    assert np.max(np.abs(sig.kappa - kappa_const)) < 1e-4
    _, g, _, _ = cc.metric_samples(rec)
    assert np.max(np.abs(g - 1.0)[interior]) < 1e-6
    cls = cc.classify_constant(float(np.median(sig.kappa)))
    if kappa_const == 2.5:
        assert cls.kind == "power_curve"
        assert cls.alpha == pytest.approx(0.25, abs=1e-7)
    else:
        assert cls.kind == "log_spiral"
        assert cls.phi == pytest.approx(np.pi / 3, abs=1e-7)


def test_reconstruct_degenerate_init():
    with pytest.raises(DegenerateInit):
        cc.reconstruct_from_curvature(lambda s: 0.0, 1,
                                      (np.array([1.0, 0.0]), np.array([2.0, 0.0])),
                                      1.0)


def test_signature_reconstruct_round_trip():
    def kappa0(s):
        return 1.0 + 0.3 * np.sin(s)

    rec = cc.reconstruct_from_curvature(kappa0, 1,
                                        (np.array([1.0, 0.0]), np.array([0.0, 1.0])),
                                        2 * np.pi, 1024)
    sig = cc.signature(rec, clip=1e9)
    again = cc.reconstruct_from_curvature((sig.s, sig.kappa), 1,
                                          (np.array([1.0, 0.0]), np.array([0.0, 1.0])),
                                          float(sig.s[-1]), 1024)
    sig2 = cc.signature(again, clip=1e9)
    ref = kappa0(sig2.s)
    interior = slice(8, -8)
    assert np.max(np.abs(sig2.kappa - ref)[interior]) < 1e-6


# ---------------------------------------------------------------------------
# domain-type validation
# ---------------------------------------------------------------------------

def test_sampled_curve_validation():
    with pytest.raises(InvariantViolation):
        cc.SampledCurve(np.zeros((3, 2)))  # too few points
    pts = np.stack([np.cos(np.linspace(0, 2 * np.pi, 16, endpoint=False)),
                    np.sin(np.linspace(0, 2 * np.pi, 16, endpoint=False))], axis=1)
    pts_dup = pts.copy()
    pts_dup[3] = pts_dup[4]
    with pytest.raises(InvariantViolation):
        cc.SampledCurve(pts_dup)
    with pytest.raises(InvariantViolation):
        cc.SampledCurve(pts, params=np.zeros(16))  # non-increasing params


def test_moving_frame_determinant_validation():
    with pytest.raises(InvariantViolation):
        cc.MovingFrame(1.0, 1.0, 0.0, 0.0, 2.0)
