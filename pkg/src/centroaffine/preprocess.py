"""Contour conditioning: centering, smoothing, resampling, spline fitting.

The pipeline prepares a raw closed contour for invariant computation:
translate the area barycenter to the origin, suppress jaggedness with a
periodic Gaussian, reduce to a fixed point count, then fit a smooth periodic
B-spline whose analytic derivatives feed the invariant formulas.
"""

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import BSpline, CubicSpline

from .curve_core import (
    InvariantSignature,
    SampledCurve,
    signature_from_arrays,
)
from .errors import DegenerateArea, InvariantViolation, SingularFit, TooFewPoints


def _as_points(contour) -> tuple[np.ndarray, bool]:
    if isinstance(contour, SampledCurve):
        return contour.points, True
    pts = np.asarray(contour, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise TooFewPoints("need an (n >= 3, 2) point array")
    return pts, False


# ---------------------------------------------------------------------------
# barycenter
# ---------------------------------------------------------------------------

def polygon_area(points: np.ndarray) -> float:
    """Signed shoelace area of a closed polygon (no repeated endpoint)."""
    x, y = points[:, 0], points[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    return 0.5 * float(np.sum(x * yn - xn * y))


def polygon_barycenter(points: np.ndarray) -> np.ndarray:
    """Area centroid of a closed polygon (not the vertex mean)."""
    x, y = points[:, 0], points[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    area = 0.5 * np.sum(cross)
    diam = float(np.hypot(*(points.max(axis=0) - points.min(axis=0))))
    if abs(area) < 1e-12 * max(diam * diam, 1e-30):
        raise DegenerateArea(f"polygon area {area:.3e} is degenerate")
    cx = np.sum((x + xn) * cross) / (6.0 * area)
    cy = np.sum((y + yn) * cross) / (6.0 * area)
    return np.array([cx, cy])


def center_at_barycenter(contour):
    """Translate a closed contour so its area barycenter is the origin.

    Returns ``(centered, barycenter)``.  Accepts a SampledCurve or a plain
    (n, 2) array and returns the matching type.
    """
    pts, is_curve = _as_points(contour)
    bary = polygon_barycenter(pts)
    centered = pts - bary
    if is_curve:
        return SampledCurve(centered, True, contour.params, contour.period), bary
    return centered, bary


# ---------------------------------------------------------------------------
# smoothing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SmoothingSpec:
    """Gaussian width in index units; kernel truncated at ``kernel_radius``."""

    sigma: float
    kernel_radius: int | None = None

    def __post_init__(self):
        if self.sigma < 0:
            raise InvariantViolation("sigma must be >= 0")
        if self.kernel_radius is None:
            object.__setattr__(self, "kernel_radius", int(np.ceil(4.0 * self.sigma)))

    def weights(self) -> np.ndarray:
        r = self.kernel_radius
        if r == 0 or self.sigma == 0:
            return np.array([1.0])
        d = np.arange(-r, r + 1, dtype=float)
        w = np.exp(-0.5 * (d / self.sigma) ** 2)
        return w / w.sum()


def gaussian_smooth(contour, spec: SmoothingSpec | float) -> SampledCurve:
    """Circular convolution of the coordinate sequences with a Gaussian."""
    if not isinstance(spec, SmoothingSpec):
        spec = SmoothingSpec(float(spec))
    pts, is_curve = _as_points(contour)
    w = spec.weights()
    r = len(w) // 2
    if r == 0:
        out = pts.copy()
    else:
        if r >= len(pts):
            raise TooFewPoints("kernel radius exceeds contour length")
        padded = np.concatenate([pts[-r:], pts, pts[:r]])
        out = np.stack([np.convolve(padded[:, j], w, mode="valid") for j in (0, 1)],
                       axis=1)
    if is_curve:
        return SampledCurve(out, True, contour.params, contour.period)
    return SampledCurve(out, True)


# ---------------------------------------------------------------------------
# resampling
# ---------------------------------------------------------------------------

def kmeans_resample(contour, k: int = 85, max_iter: int = 100,
                    tol: float = 1e-10) -> SampledCurve:
    """Reduce a closed contour to ``k`` cluster centroids (deterministic).

    Initial centroids sit at k indices equally spaced along the contour;
    Lloyd iterations run on the 2-D points until centroid movement drops
    below ``tol`` or ``max_iter`` is hit.  Centroids are reordered along the
    contour by their nearest original sample index.
    """
    pts, _ = _as_points(contour)
    n = len(pts)
    if n < k:
        raise TooFewPoints(f"contour has {n} points, need at least k={k}")
    seeds = (np.arange(k, dtype=float) * n / k).astype(int)
    centroids = pts[seeds].copy()
    for _ in range(max_iter):
        d2 = ((pts[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        assign = np.argmin(d2, axis=1)
        new = centroids.copy()
        for j in range(k):
            members = pts[assign == j]
            if len(members):
                new[j] = members.mean(axis=0)
        move = np.max(np.abs(new - centroids))
        centroids = new
        if move < tol:
            break
    d2 = ((centroids[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
    anchor = np.argmin(d2, axis=1)
    order = np.argsort(anchor, kind="stable")
    return SampledCurve(centroids[order], closed=True)


def resample_by_arclength(contour, k: int = 85) -> SampledCurve:
    """Resample a closed contour at k uniform (Euclidean) arc-length stations.

    Alternative to k-means resampling; periodic cubic interpolation keeps the
    resampled contour smooth.
    """
    pts, _ = _as_points(contour)
    if len(pts) < 4:
        raise TooFewPoints("need at least 4 points")
    closed_pts = np.vstack([pts, pts[:1]])
    seg = np.hypot(*np.diff(closed_pts, axis=0).T)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    total = s[-1]
    interp = CubicSpline(s, closed_pts, bc_type="periodic")
    targets = np.linspace(0.0, total, k, endpoint=False)
    return SampledCurve(interp(targets), closed=True)


# ---------------------------------------------------------------------------
# periodic B-spline fitting
# ---------------------------------------------------------------------------

@dataclass
class BSplineCurve:
    """Uniform-knot B-spline with analytic derivatives to order 3.

    Closed curves use a periodic basis on the parameter circle [0, n);
    open ones use a clamped basis on [0, n_inner].  Degree >= 4 keeps the
    third derivative continuous.
    """

    degree: int
    control_points: np.ndarray
    knots: np.ndarray
    closed: bool
    fit_params: np.ndarray

    def __post_init__(self):
        if self.degree < 4:
            raise InvariantViolation("degree must be >= 4 for continuous third derivatives")
        self._splines = None

    def _build(self):
        if self._splines is None:
            if self.closed:
                coef = np.vstack([self.control_points,
                                  self.control_points[: self.degree]])
            else:
                coef = self.control_points
            base = BSpline(self.knots, coef, self.degree)
            self._splines = [base] + [base.derivative(m) for m in range(1, 4)]
        return self._splines

    @property
    def span(self) -> float:
        return float(len(self.control_points)) if self.closed else \
            float(self.knots[-self.degree - 1])

    def _wrap(self, u):
        u = np.asarray(u, dtype=float)
        if self.closed:
            return np.mod(u, self.span)
        return np.clip(u, 0.0, self.span)

    def evaluate(self, u, order: int = 0) -> np.ndarray:
        if not 0 <= order <= 3:
            raise InvariantViolation("derivative order must be in 0..3")
        spl = self._build()[order]
        return spl(self._wrap(u))

    def __call__(self, u, order: int = 0) -> np.ndarray:
        return self.evaluate(u, order)


def spline_derivatives(spline: BSplineCurve, u, order: int) -> np.ndarray:
    """Exact derivative of the fitted piecewise polynomial at parameter u."""
    return spline.evaluate(u, order)


_COLLOCATION_CACHE: dict = {}


def _closed_collocation(n: int, degree: int):
    key = ("closed", n, degree)
    if key not in _COLLOCATION_CACHE:
        knots = np.arange(-degree, n + degree + 1, dtype=float)
        offset = 0.5 if degree % 2 == 0 else 0.0
        u = np.arange(n, dtype=float) + offset
        M = np.zeros((n, n))
        # basis function j supported on (j - degree, j + 1); wrap columns
        for j in range(n + degree):
            c = np.zeros(n + degree)
            c[j] = 1.0
            vals = BSpline(knots, c, degree, extrapolate=False)(u)
            M[:, j % n] += np.nan_to_num(vals)
        _COLLOCATION_CACHE[key] = (M, knots, u)
    return _COLLOCATION_CACHE[key]


def _open_collocation(n: int, degree: int):
    key = ("open", n, degree)
    if key not in _COLLOCATION_CACHE:
        inner = n - degree - 1
        knots = np.concatenate([np.zeros(degree + 1),
                                np.arange(1, inner + 1, dtype=float),
                                np.full(degree + 1, inner + 1.0)])
        greville = np.array([knots[i + 1: i + degree + 1].mean()
                             for i in range(n)])
        M = np.zeros((n, n))
        for j in range(n):
            c = np.zeros(n)
            c[j] = 1.0
            M[:, j] = np.nan_to_num(
                BSpline(knots, c, degree, extrapolate=False)(greville))
        _COLLOCATION_CACHE[key] = (M, knots, greville)
    return _COLLOCATION_CACHE[key]


def fit_bspline_closed(points, degree: int = 4) -> BSplineCurve:
    """Interpolating periodic B-spline with uniform knots.

    One control point per input point; data sites sit at knot midpoints for
    even degree (knots for odd), which keeps the collocation system
    nonsingular for every point count.  The fit commutes exactly with linear
    maps of the plane.
    """
    pts, _ = _as_points(points)
    n = len(pts)
    if n < degree + 2:
        raise TooFewPoints(f"need at least degree+2={degree + 2} points")
    M, knots, u = _closed_collocation(n, degree)
    try:
        ctrl = np.linalg.solve(M, pts)
    except np.linalg.LinAlgError as exc:
        raise SingularFit(f"collocation system is singular: {exc}") from None
    if not np.all(np.isfinite(ctrl)):
        raise SingularFit("collocation solve produced non-finite control points")
    return BSplineCurve(degree, ctrl, knots, True, u)


def fit_bspline_open(points, degree: int = 4) -> BSplineCurve:
    """Interpolating clamped B-spline for open arcs (Greville collocation)."""
    pts, _ = _as_points(points)
    n = len(pts)
    if n < degree + 2:
        raise TooFewPoints(f"need at least degree+2={degree + 2} points")
    M, knots, greville = _open_collocation(n, degree)
    try:
        ctrl = np.linalg.solve(M, pts)
    except np.linalg.LinAlgError as exc:
        raise SingularFit(f"collocation system is singular: {exc}") from None
    return BSplineCurve(degree, ctrl, knots, False, greville)


def spline_signature(spline: BSplineCurve, params=None,
                     clip: float = 100.0) -> InvariantSignature:
    """Invariant signature evaluated with the spline's analytic derivatives."""
    u = spline.fit_params if params is None else np.asarray(params, dtype=float)
    pos = spline.evaluate(u, 0)
    d1 = spline.evaluate(u, 1)
    d2 = spline.evaluate(u, 2)
    d3 = spline.evaluate(u, 3)
    period = spline.span if spline.closed else None
    return signature_from_arrays(pos, d1, d2, d3, u, spline.closed, period, clip)


# ---------------------------------------------------------------------------
# full conditioning pipeline
# ---------------------------------------------------------------------------

@dataclass
class ConditionedContour:
    spline: BSplineCurve
    resampled: SampledCurve
    barycenter: np.ndarray
    smoothed: SampledCurve


def condition_contour(contour, sigma: float = 2.0, k: int = 85,
                      degree: int = 4, resample: str = "kmeans",
                      center: bool = True) -> ConditionedContour:
    """center -> smooth -> resample -> fit, returning all intermediates.

    ``resample`` is ``"kmeans"`` (2-D point clustering), ``"arclength"``
    (uniform Euclidean arc length, the affine-safe alternative), or
    ``"none"``.
    """
    pts, _ = _as_points(contour)
    if center:
        pts, bary = center_at_barycenter(pts)
    else:
        bary = np.zeros(2)
    smoothed = gaussian_smooth(pts, SmoothingSpec(sigma))
    if resample == "kmeans":
        reduced = kmeans_resample(smoothed, k)
    elif resample == "arclength":
        reduced = resample_by_arclength(smoothed, k)
    elif resample == "none":
        reduced = smoothed
    else:
        raise InvariantViolation(f"unknown resample mode {resample!r}")
    spline = fit_bspline_closed(reduced.points, degree)
    return ConditionedContour(spline, reduced, bary, smoothed)
