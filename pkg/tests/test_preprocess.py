import numpy as np
import pytest

from centroaffine import canonical
from centroaffine import curve_core as cc
from centroaffine import preprocess as pp
from centroaffine.errors import DegenerateArea, InvariantViolation, TooFewPoints

from conftest import random_gl2, sampled_curve_from


# ---------------------------------------------------------------------------
# barycenter
# ---------------------------------------------------------------------------

def test_barycenter_unit_square():
    square = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    centered, bary = pp.center_at_barycenter(square)
    assert bary == pytest.approx([0.5, 0.5])
    assert np.allclose(centered, square - 0.5)


def test_barycenter_already_centered():
    th = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    pts = np.stack([2 * np.cos(th), np.sin(th)], axis=1)
    _, bary = pp.center_at_barycenter(pts)
    assert np.max(np.abs(bary)) < 1e-12


def test_barycenter_affine_equivariance(rng):
    th = np.linspace(0, 2 * np.pi, 50, endpoint=False)
    pts = np.stack([np.cos(th) + 0.3 * np.cos(2 * th), np.sin(th)], axis=1)
    _, bary = pp.center_at_barycenter(pts)
    for _ in range(10):
        A = random_gl2(rng, max_cond=20)
        b = rng.normal(size=2)
        _, bary2 = pp.center_at_barycenter(pts @ A.T + b)
        assert np.allclose(bary2, A @ bary + b, atol=1e-10)


def test_barycenter_degenerate():
    line = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
    with pytest.raises(DegenerateArea):
        pp.center_at_barycenter(line)


# ---------------------------------------------------------------------------
# smoothing
# ---------------------------------------------------------------------------

def test_smoothing_zero_sigma_is_identity():
    th = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    pts = np.stack([np.cos(th), np.sin(th)], axis=1)
    out = pp.gaussian_smooth(pts, 0.0)
    assert np.array_equal(out.points, pts)


def test_smoothing_constant_contour_unchanged():
    pts = np.tile([[2.0, -1.0]], (16, 1))
    out = pp.gaussian_smooth(pts, pp.SmoothingSpec(3.0))
    assert np.allclose(out.points, pts, atol=1e-14)


def test_smoothing_kernel_normalized():
    w = pp.SmoothingSpec(2.5).weights()
    assert w.sum() == pytest.approx(1.0, abs=1e-14)
    assert len(w) == 2 * int(np.ceil(10.0)) + 1


def test_smoothing_circle_attenuation():
    # circular Gaussian smoothing damps the fundamental mode by the kernel's
    # discrete Fourier transform at that mode
    n, sigma = 256, 2.0
    th = np.linspace(0, 2 * np.pi, n, endpoint=False)
    pts = np.stack([np.cos(th), np.sin(th)], axis=1)
    out = pp.gaussian_smooth(pts, sigma)
    r = np.hypot(*out.points.T)
    spec = pp.SmoothingSpec(sigma)
    w = spec.weights()
    d = np.arange(-spec.kernel_radius, spec.kernel_radius + 1)
    attenuation = float(np.sum(w * np.cos(2 * np.pi * d / n)))
    assert np.max(np.abs(r - attenuation)) < 1e-12
    # and the closed-form Fourier estimate of the same factor
    assert attenuation == pytest.approx(np.exp(-(2 * np.pi / n) ** 2 * sigma ** 2 / 2),
                                        abs=1e-3)


def test_smoothing_commutes_with_linear_maps(rng):
    th = np.linspace(0, 2 * np.pi, 100, endpoint=False)
    pts = np.stack([np.cos(th) + 0.2 * np.cos(3 * th), np.sin(th)], axis=1)
    A = random_gl2(rng)
    b = rng.normal(size=2)
    lhs = pp.gaussian_smooth(pts @ A.T, 2.0).points
    rhs = pp.gaussian_smooth(pts, 2.0).points @ A.T
    assert np.allclose(lhs, rhs, atol=1e-12)
    shifted = pp.gaussian_smooth(pts + b, 2.0).points
    assert np.allclose(shifted, pp.gaussian_smooth(pts, 2.0).points + b, atol=1e-12)


# ---------------------------------------------------------------------------
# resampling
# ---------------------------------------------------------------------------

def test_kmeans_fixed_point():
    th = np.linspace(0, 2 * np.pi, 85, endpoint=False)
    pts = np.stack([np.cos(th), np.sin(th)], axis=1)
    out = pp.kmeans_resample(pts, 85)
    assert np.array_equal(out.points, pts)


def test_kmeans_4k_circle_spacing():
    k = 85
    th = np.linspace(0, 2 * np.pi, 4 * k, endpoint=False)
    pts = np.stack([np.cos(th), np.sin(th)], axis=1)
    out = pp.kmeans_resample(pts, k)
    ang = np.unwrap(np.arctan2(out.points[:, 1], out.points[:, 0]))
    spacing = np.diff(ang)
    assert np.max(np.abs(spacing - 2 * np.pi / k)) < 2 * np.pi / (2 * k)


def test_kmeans_default_and_determinism():
    rng = np.random.default_rng(5)
    th = np.linspace(0, 2 * np.pi, 300, endpoint=False)
    pts = np.stack([np.cos(th), np.sin(th)], axis=1) + rng.normal(0, 0.002, (300, 2))
    a = pp.kmeans_resample(pts)
    b = pp.kmeans_resample(pts)
    assert a.n == 85
    assert np.array_equal(a.points, b.points)


def test_kmeans_too_few_points():
    с = np.zeros((10, 2))
    with pytest.raises(TooFewPoints):
        pp.kmeans_resample(np.stack([np.cos(np.arange(10)), np.sin(np.arange(10))], 1), 85)


def test_arclength_resample_stays_on_curve():
    th = np.linspace(0, 2 * np.pi, 400, endpoint=False)
    pts = np.stack([np.cos(th), np.sin(th)], axis=1)
    out = pp.resample_by_arclength(pts, 85)
    assert out.n == 85
    r = np.hypot(*out.points.T)
    assert np.max(np.abs(r - 1)) < 1e-5
    ang = np.unwrap(np.arctan2(out.points[:, 1], out.points[:, 0]))
    assert np.max(np.abs(np.diff(ang) - 2 * np.pi / 85)) < 1e-4


# ---------------------------------------------------------------------------
# B-spline fitting
# ---------------------------------------------------------------------------

def test_fit_circle_accuracy():
    th = np.linspace(0, 2 * np.pi, 85, endpoint=False)
    pts = np.stack([np.cos(th), np.sin(th)], axis=1)
    spl = pp.fit_bspline_closed(pts)
    dense = np.linspace(0, spl.span, 2000, endpoint=False)
    xy = spl(dense)
    assert np.max(np.abs(np.hypot(xy[:, 0], xy[:, 1]) - 1)) < 1e-3


def test_fit_interpolates_inputs():
    rng = np.random.default_rng(0)
    th = np.linspace(0, 2 * np.pi, 60, endpoint=False)
    pts = np.stack([(1 + 0.1 * np.cos(3 * th)) * np.cos(th),
                    (1 + 0.1 * np.cos(3 * th)) * np.sin(th)], axis=1)
    spl = pp.fit_bspline_closed(pts)
    assert np.max(np.abs(spl(spl.fit_params) - pts)) < 1e-8
    # even point counts must stay solvable (midpoint collocation)
    spl256 = pp.fit_bspline_closed(np.stack([np.cos(np.linspace(0, 2*np.pi, 256, endpoint=False)),
                                             np.sin(np.linspace(0, 2*np.pi, 256, endpoint=False))], 1))
    assert np.max(np.abs(spl256(spl256.fit_params).__len__() - 256)) == 0


def test_fit_affine_equivariance(rng):
    th = np.linspace(0, 2 * np.pi, 85, endpoint=False)
    pts = np.stack([np.cos(th) + 0.1 * np.cos(2 * th), np.sin(th)], axis=1)
    spl = pp.fit_bspline_closed(pts)
    for _ in range(5):
        A = random_gl2(rng, max_cond=30)
        spl2 = pp.fit_bspline_closed(pts @ A.T)
        assert np.max(np.abs(spl2.control_points - spl.control_points @ A.T)) < 1e-9


def test_fit_degree_validation():
    th = np.linspace(0, 2 * np.pi, 20, endpoint=False)
    pts = np.stack([np.cos(th), np.sin(th)], axis=1)
    with pytest.raises(InvariantViolation):
        pp.fit_bspline_closed(pts, degree=3)
    with pytest.raises(TooFewPoints):
        pp.fit_bspline_closed(pts[:5])


def test_spline_derivatives_basics():
    # straight open arc: second derivative vanishes identically
    x = np.linspace(0.0, 1.0, 32)
    line = np.stack([x, 2 * x + 1], axis=1)
    spl = pp.fit_bspline_open(line)
    u = np.linspace(0, spl.span, 200)
    assert np.max(np.abs(pp.spline_derivatives(spl, u, 2))) < 1e-8
    assert np.max(np.abs(pp.spline_derivatives(spl, spl.fit_params, 0) - line)) < 1e-9


def test_spline_signature_circle():
    th = np.linspace(0, 2 * np.pi, 85, endpoint=False)
    pts = np.stack([np.cos(th), np.sin(th)], axis=1)
    sig = pp.spline_signature(pp.fit_bspline_closed(pts))
    assert np.max(np.abs(sig.kappa)) < 1e-3
    assert np.all(sig.eps == 1)
    assert sig.total_length == pytest.approx(2 * np.pi, rel=1e-3)


# ---------------------------------------------------------------------------
# whole pipeline
# ---------------------------------------------------------------------------

def test_pipeline_affine_equivariance(rng):
    base = canonical.perturbed_circle([(2, 0.06, 0.3), (3, 0.04, 1.2)])
    for n_in in (85, 255):
        th = np.linspace(0, 2 * np.pi, n_in, endpoint=False)
        pts = base(th, 0)
        ref = pp.spline_signature(
            pp.condition_contour(pts, sigma=2.0, k=85).spline)
        for _ in range(3):
            A = random_gl2(rng, max_cond=50 if n_in == 85 else 5)
            moved = pp.spline_signature(
                pp.condition_contour(pts @ A.T, sigma=2.0, k=85).spline)
            assert moved.n == ref.n
            assert np.max(np.abs(moved.kappa - ref.kappa)) < 1e-3
            rel_len = abs(moved.total_length - ref.total_length) / ref.total_length
            assert rel_len < 1e-3


def test_pipeline_translation_removed_by_centering(rng):
    base = canonical.perturbed_circle([(3, 0.05, 0.7)])
    th = np.linspace(0, 2 * np.pi, 85, endpoint=False)
    pts = base(th, 0)
    ref = pp.spline_signature(pp.condition_contour(pts).spline)
    shifted = pp.spline_signature(pp.condition_contour(pts + [5.0, -3.0]).spline)
    assert np.max(np.abs(ref.kappa - shifted.kappa)) < 1e-9
