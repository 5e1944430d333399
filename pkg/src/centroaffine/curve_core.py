"""Pointwise and global centro-affine differential invariants of plane curves.

The invariants are built from the plane cross product (``bracket``) of the
position and its parameter derivatives:

    eps   = sign([x', x''] / [x, x'])           pointwise sign invariant
    g     = sqrt(eps [x', x''] / [x, x'])       arc-length density, ds = g dp
    kappa = lowest-order scalar invariant       (see ``invariants_at``)

Everything is invariant under invertible linear maps of the plane and under
reparametrization; kappa flips sign when the orientation is reversed.
"""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import cumulative_trapezoid, simpson

from .errors import (
    DegenerateInit,
    InvariantViolation,
    IrregularPoint,
    TooFewRegularPoints,
    Unclassified,
    WrongOrientation,
)

# Tolerance scale for calling a bracket zero: |bracket| < BRACKET_TOL * diameter^2.
BRACKET_TOL = 1e-9

# Ratio between the graph-jet curvature expression and the parametric one,
# measured once on the logarithmic spiral with kappa = 1 and pinned by a test.
# The raw graph expression evaluates to (2 eps) * kappa.
GRAPH_CURVATURE_FACTOR = 0.5

# The order-4 frame substitution evaluates, identically in the jet variables, to
#   2 eps kappa_s - 6 eps kappa^2 - 3
# (pinned by a test against a finite-difference kappa_s oracle).  These
# constants convert that raw value into kappa_s.
_JET4_SLOPE = 2.0
_JET4_KAPPA2 = -6.0
_JET4_OFFSET = -3.0

MIN_CURVE_POINTS = 7


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SampledCurve:
    """Ordered planar point sequence, optionally closed.

    ``params`` are strictly increasing parameter values (defaults to the
    sample index).  For closed curves ``period`` is the parameter period;
    it defaults to ``n`` for index parametrization.
    """

    points: np.ndarray
    closed: bool = True
    params: np.ndarray | None = None
    period: float | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise InvariantViolation("points must be an (n, 2) array")
        if len(pts) < MIN_CURVE_POINTS:
            raise InvariantViolation(
                f"a curve needs at least {MIN_CURVE_POINTS} points, got {len(pts)}")
        if not np.all(np.isfinite(pts)):
            raise InvariantViolation("points must be finite")
        nxt = np.roll(pts, -1, axis=0) if self.closed else pts[1:]
        cur = pts if self.closed else pts[:-1]
        if np.any(np.all(cur == nxt, axis=1)):
            raise InvariantViolation("consecutive points must be distinct")
        object.__setattr__(self, "points", pts)
        if self.params is not None:
            prm = np.asarray(self.params, dtype=float)
            if prm.shape != (len(pts),) or np.any(np.diff(prm) <= 0):
                raise InvariantViolation("params must be strictly increasing, one per point")
            object.__setattr__(self, "params", prm)
        if self.closed:
            period = self.period
            if period is None:
                if self.params is None:
                    period = float(len(pts))
                else:
                    raise InvariantViolation("closed curve with params needs a period")
            span = 0.0 if self.params is None else self.params[-1] - self.params[0]
            if period <= span:
                raise InvariantViolation("period must exceed the parameter span")
            object.__setattr__(self, "period", float(period))

    @property
    def n(self) -> int:
        return len(self.points)

    def parameter_values(self) -> np.ndarray:
        if self.params is not None:
            return self.params
        return np.arange(self.n, dtype=float)

    def diameter(self) -> float:
        spans = self.points.max(axis=0) - self.points.min(axis=0)
        return float(np.hypot(spans[0], spans[1]))

    def transformed(self, matrix, translation=None) -> "SampledCurve":
        A = np.asarray(matrix, dtype=float)
        pts = self.points @ A.T
        if translation is not None:
            pts = pts + np.asarray(translation, dtype=float)
        return replace(self, points=pts)

    def reversed(self) -> "SampledCurve":
        prm = self.params
        if prm is not None:
            top = prm[0] + self.period if self.closed else prm[-1]
            prm = (top - prm)[::-1] if not self.closed else (prm[0] + self.period - prm)[::-1]
        return SampledCurve(self.points[::-1].copy(), self.closed, prm, self.period)


@dataclass(frozen=True)
class Derivatives3:
    """Position and first three parameter derivatives at one curve point."""

    pos: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray

    def __post_init__(self):
        for name in ("pos", "d1", "d2", "d3"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (2,) or not np.all(np.isfinite(v)):
                raise InvariantViolation(f"{name} must be a finite 2-vector")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class CurveJet:
    """Graph-form jet (x, y, y_x, y_xx, y_xxx [, y_xxxx]) at one point."""

    x: float
    y: float
    y1: float
    y2: float
    y3: float
    y4: float | None = None


@dataclass(frozen=True)
class MovingFrame:
    """Group element lambda * [[a, b], [c, d]] with det [[a,b],[c,d]] = 1."""

    lam: float
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if self.lam == 0.0:
            raise InvariantViolation("lambda must be nonzero")
        det = self.a * self.d - self.b * self.c
        if abs(det - 1.0) > 1e-12:
            raise InvariantViolation(f"frame determinant {det} != 1")

    def matrix(self) -> np.ndarray:
        return self.lam * np.array([[self.a, self.b], [self.c, self.d]])


@dataclass(frozen=True)
class InvariantSample:
    """(s, eps, g, kappa) at one sample; ``s`` may be unset (None)."""

    eps: int
    g: float
    kappa: float
    s: float | None = None

    def __post_init__(self):
        if self.eps not in (-1, 1):
            raise InvariantViolation("eps must be +-1")
        if not self.g > 0:
            raise InvariantViolation("g must be positive")


@dataclass(frozen=True)
class RegularityStatus:
    bracket_pos_tangent: float
    bracket_tangent_accel: float
    regular: bool


@dataclass(frozen=True)
class ConstantCurvatureClass:
    """Equivalence class of a constant-curvature curve.

    ``kind`` is one of ``power_curve``, ``x_log_x``, ``unit_circle``,
    ``log_spiral``, ``hyperbola``.  ``reversed`` marks classes reached through
    an orientation reversal (negative curvature input).
    """

    kind: str
    alpha: float | None = None
    phi: float | None = None
    reversed: bool = False

    _KINDS = ("power_curve", "x_log_x", "unit_circle", "log_spiral", "hyperbola")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise InvariantViolation(f"unknown class kind {self.kind!r}")
        if self.kind == "power_curve" and not (self.alpha and 0 < self.alpha < 1):
            raise InvariantViolation("power_curve needs alpha in (0, 1)")
        if self.kind == "log_spiral" and not (self.phi and 0 < self.phi < np.pi / 2):
            raise InvariantViolation("log_spiral needs phi in (0, pi/2)")


@dataclass
class InvariantSignature:
    """Per-sample (s, kappa, eps) profile of a curve.

    ``s`` is cumulative centro-affine arc length starting at 0 over the kept
    samples; ``total_length`` is the full-curve arc length (including the
    closing segment for closed curves).  Samples removed by the curvature
    clip or by regularity failures are recorded by index.
    """

    s: np.ndarray
    kappa: np.ndarray
    eps: np.ndarray
    total_length: float
    closed: bool = True
    clipped: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))
    irregular: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))

    def __post_init__(self):
        self.s = np.asarray(self.s, dtype=float)
        self.kappa = np.asarray(self.kappa, dtype=float)
        self.eps = np.asarray(self.eps, dtype=int)
        if not len(self.s) == len(self.kappa) == len(self.eps):
            raise InvariantViolation("signature arrays must have equal length")

    @property
    def n(self) -> int:
        return len(self.s)

    def normalized(self) -> "InvariantSignature":
        """Rescale the arc-length axis to [0, 1]."""
        if self.total_length <= 0:
            raise InvariantViolation("cannot normalize a zero-length signature")
        return InvariantSignature(self.s / self.total_length, self.kappa.copy(),
                                  self.eps.copy(), 1.0, self.closed,
                                  self.clipped.copy(), self.irregular.copy())


# ---------------------------------------------------------------------------
# brackets and pointwise invariants
# ---------------------------------------------------------------------------

def bracket(a, b):
    """Plane cross product [a, b] = a_x b_y - a_y b_x (broadcasts)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def regularity(d: Derivatives3, scale: float | None = None,
               tol: float = BRACKET_TOL) -> RegularityStatus:
    """Check the two defining brackets against a scale-aware tolerance."""
    b01 = float(bracket(d.pos, d.d1))
    b12 = float(bracket(d.d1, d.d2))
    if scale is None:
        scale = max(np.abs(d.pos).max(), np.abs(d.d1).max(), 1.0)
    thr = tol * scale * scale
    return RegularityStatus(b01, b12, abs(b01) > thr and abs(b12) > thr)


def invariant_arrays(pos, d1, d2, d3, scale: float | None = None,
                     tol: float = BRACKET_TOL):
    """Vectorized (eps, g, kappa, regular) from derivative arrays of shape (n, 2).

    Irregular samples get eps=0, g=nan, kappa=nan and regular=False.
    """
    pos = np.asarray(pos, dtype=float)
    b01 = bracket(pos, d1)
    b12 = bracket(d1, d2)
    b02 = bracket(pos, d2)
    b13 = bracket(d1, d3)
    if scale is None:
        spans = pos.max(axis=0) - pos.min(axis=0) if pos.ndim == 2 else np.abs(pos)
        scale = max(float(np.hypot(*np.atleast_1d(spans)[:2])), 1e-300)
    thr = tol * scale * scale
    regular = (np.abs(b01) > thr) & (np.abs(b12) > thr)

    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = b12 / b01
        eps = np.where(ratio > 0, 1, -1)
        eps = np.where(regular, eps, 0)
        g = np.sqrt(np.where(regular, eps * ratio, np.nan))
        # kappa = sqrt(eps [x,x']/[x',x'']) * ([x,x'']/[x,x']
        #         + ([x,x''][x',x''] - [x,x'][x',x''']) / (2 [x',x''][x,x']))
        lead = np.sqrt(np.where(regular, eps * b01 / b12, np.nan))
        kappa = lead * (b02 / b01 + (b02 * b12 - b01 * b13) / (2.0 * b12 * b01))
    return eps.astype(int), g, kappa, regular


def invariants_at(d: Derivatives3, scale: float | None = None) -> InvariantSample:
    """eps, g and kappa at a single point from parameter derivatives."""
    status = regularity(d, scale)
    if not status.regular:
        raise IrregularPoint(
            f"brackets [x,x']={status.bracket_pos_tangent:.3e}, "
            f"[x',x'']={status.bracket_tangent_accel:.3e} too small")
    eps, g, kappa, _ = invariant_arrays(d.pos[None], d.d1[None], d.d2[None],
                                        d.d3[None], scale=scale or 1.0)
    return InvariantSample(int(eps[0]), float(g[0]), float(kappa[0]))


# ---------------------------------------------------------------------------
# graph-form jets
# ---------------------------------------------------------------------------

def jet_from_derivatives(d: Derivatives3, d4: np.ndarray | None = None) -> CurveJet:
    """Convert parameter derivatives into a graph-form jet via the chain rule.

    Requires a locally graph-representable point (dx/dp != 0).
    """
    x, y = d.pos
    x1, y1 = d.d1
    x2, y2 = d.d2
    x3, y3 = d.d3
    if abs(x1) < 1e-300:
        raise IrregularPoint("dx/dp vanishes; point is not graph-representable")
    yx = y1 / x1
    B = x1 * y2 - x2 * y1
    yxx = B / x1 ** 3
    Bp = x1 * y3 - x3 * y1
    C = Bp * x1 - 3.0 * x2 * B
    yxxx = C / x1 ** 5
    yxxxx = None
    if d4 is not None:
        x4, y4 = np.asarray(d4, dtype=float)
        Bpp = x1 * y4 + x2 * y3 - x4 * y1 - x3 * y2
        Cp = Bpp * x1 - 2.0 * x2 * Bp - 3.0 * x3 * B
        yxxxx = float((Cp * x1 - 5.0 * x2 * C) / x1 ** 7)
    return CurveJet(float(x), float(y), float(yx), float(yxx), float(yxxx), yxxxx)


def _jet_regularity(jet: CurveJet, tol: float = BRACKET_TOL):
    scale = max(abs(jet.x), abs(jet.y), 1.0)
    thr = tol * scale * scale
    D = jet.x * jet.y1 - jet.y  # [x, x'] in the graph parametrization
    if abs(D) <= thr:
        raise IrregularPoint("y - x y_x vanishes (radial tangency)")
    if abs(jet.y2) <= thr:
        raise IrregularPoint("y_xx vanishes (inflection / straight line)")
    return D


def curvature_graph(jet: CurveJet) -> tuple[int, float]:
    """(eps, kappa) from a graph-form jet.

    The raw third-order expression differs from the parametric curvature by
    the factor 2*eps; the returned kappa is normalized so both routes agree
    exactly (see GRAPH_CURVATURE_FACTOR).
    """
    D = _jet_regularity(jet)
    eps = 1 if jet.y2 / D > 0 else -1
    raw = ((3.0 * jet.x * jet.y2 ** 2 + (jet.y - jet.x * jet.y1) * jet.y3)
           / jet.y2 ** 2 * np.sqrt(eps * jet.y2 / D))
    return eps, float(GRAPH_CURVATURE_FACTOR * eps * raw)


def moving_frame(jet: CurveJet) -> MovingFrame:
    """Right-equivariant moving frame sending the jet to (0, 1, 0, -eps).

    Requires the orientation convention sign(y - x y_x) = +1.
    """
    D = _jet_regularity(jet)
    if jet.y - jet.x * jet.y1 < 0:
        raise WrongOrientation("sign(y - x y_x) = -1; flip the curve orientation")
    eps = 1 if jet.y2 / D > 0 else -1
    lam4 = eps * jet.y2 / D ** 3
    lam = lam4 ** 0.25
    denom = lam * (jet.y - jet.x * jet.y1)
    return MovingFrame(lam=float(lam), a=float(lam * jet.y), b=float(-lam * jet.x),
                       c=float(-jet.y1 / denom), d=float(1.0 / denom))


def prolonged_action(frame: MovingFrame, jet: CurveJet):
    """Apply the group action to a jet, returning (u, v, v_u, v_uu[, v_uuu, v_uuuu]).

    The trailing entries are present when the jet carries the matching orders.
    """
    lam, a, b, c, d = frame.lam, frame.a, frame.b, frame.c, frame.d
    x, y = jet.x, jet.y
    y1, y2, y3, y4 = jet.y1, jet.y2, jet.y3, jet.y4
    w = a + b * y1
    u = lam * (a * x + b * y)
    v = lam * (c * x + d * y)
    vu = (c + d * y1) / w
    vuu = y2 / (lam * w ** 3)
    out = [u, v, vu, vuu]
    out.append((w * y3 - 3.0 * b * y2 ** 2) / (lam ** 2 * w ** 5))
    if y4 is not None:
        out.append((w ** 2 * y4 - 10.0 * b * w * y2 * y3 + 15.0 * b ** 2 * y2 ** 3)
                   / (lam ** 3 * w ** 7))
    return tuple(out)


def fourth_order_invariant_raw(jet: CurveJet) -> float:
    """v_uuuu with the moving frame substituted (unnormalized)."""
    if jet.y4 is None:
        raise InvariantViolation("jet must carry y4")
    frame = moving_frame(jet)
    return float(prolonged_action(frame, jet)[5])


def invariantize_jet4(jet: CurveJet) -> float:
    """Fourth-order differential invariant, normalized to kappa_s + 1.5 kappa^2 - 3.

    The raw frame substitution equals 2 eps kappa_s - 6 eps kappa^2 - 3
    identically in the jet variables; kappa_s is solved from it and the
    invariant is reported in the library's normalization.
    """
    raw = fourth_order_invariant_raw(jet)
    eps, kappa = curvature_graph(jet)
    kappa_s = eps * (raw - _JET4_KAPPA2 * eps * kappa ** 2 - _JET4_OFFSET) / _JET4_SLOPE
    return float(kappa_s + 1.5 * kappa ** 2 - 3.0)


# ---------------------------------------------------------------------------
# finite differences on sampled curves
# ---------------------------------------------------------------------------

def fornberg_weights(z: float, nodes: np.ndarray, max_order: int) -> np.ndarray:
    """Finite-difference weights at ``z`` from arbitrary ``nodes``.

    Returns an array of shape (max_order + 1, len(nodes)); row m holds the
    weights of the m-th derivative.
    """
    x = np.asarray(nodes, dtype=float)
    n = len(x)
    w = np.zeros((max_order + 1, n))
    w[0, 0] = 1.0
    c1 = 1.0
    c4 = x[0] - z
    for i in range(1, n):
        mn = min(i, max_order)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    w[k, i] = c1 * (k * w[k - 1, i - 1] - c5 * w[k, i - 1]) / c2
                w[0, i] = -c1 * c5 * w[0, i - 1] / c2
            for k in range(mn, 0, -1):
                w[k, j] = ((c4 * w[k, j] - k * w[k - 1, j]) / c3)
            w[0, j] = c4 * w[0, j] / c3
        c1 = c2
    return w


class DerivativeStencil:
    """Cached finite-difference stencils for one parameter grid.

    Periodic wrap for closed grids, one-sided stencils near the ends of open
    ones.  ``apply(values, m)`` differentiates samples of shape (n,) or (n, k).
    """

    def __init__(self, params: np.ndarray, closed: bool, period: float | None,
                 max_order: int = 3, width: int = 7):
        params = np.asarray(params, dtype=float)
        n = len(params)
        if width > n:
            width = n if n % 2 == 1 else n - 1
        self.n = n
        half = width // 2
        idx = np.empty((n, width), dtype=int)
        loc = np.empty((n, width))
        if closed:
            if period is None:
                raise InvariantViolation("closed grid needs a period")
            offsets = np.arange(-half, half + 1)
            for i in range(n):
                j = (i + offsets) % n
                idx[i] = j
                wraps = (i + offsets) // n
                loc[i] = params[j] + wraps * period
        else:
            for i in range(n):
                lo = min(max(i - half, 0), n - width)
                idx[i] = np.arange(lo, lo + width)
                loc[i] = params[idx[i]]
        self.idx = idx
        weights = np.empty((max_order + 1, n, width))
        for i in range(n):
            weights[:, i, :] = fornberg_weights(params[i], loc[i], max_order)
        self.weights = weights

    def apply(self, values: np.ndarray, m: int) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        gathered = values[self.idx]  # (n, width) or (n, width, k)
        w = self.weights[m]
        if gathered.ndim == 3:
            return np.einsum("nw,nwk->nk", w, gathered)
        return np.einsum("nw,nw->n", w, gathered)


def curve_derivatives(curve: SampledCurve, max_order: int = 3, width: int = 7):
    """Finite-difference derivative arrays (d1..d_max_order) of the points."""
    stencil = DerivativeStencil(curve.parameter_values(), curve.closed,
                                curve.period, max_order, width)
    return [stencil.apply(curve.points, m) for m in range(1, max_order + 1)]


# ---------------------------------------------------------------------------
# curve-level invariants
# ---------------------------------------------------------------------------

def metric_samples(curve: SampledCurve, width: int = 7):
    """(eps, g, kappa, regular) per sample via finite differences."""
    d1, d2, d3 = curve_derivatives(curve, 3, width)
    return invariant_arrays(curve.points, d1, d2, d3, scale=curve.diameter())


def arc_length(curve: SampledCurve, i0: int, i1: int, width: int = 7) -> float:
    """Centro-affine arc length between sample i0 and i1 (composite Simpson).

    For closed curves ``i1`` may equal ``n`` to denote one full period.
    """
    n = curve.n
    if not (0 <= i0 <= i1 <= (n if curve.closed else n - 1)):
        raise InvariantViolation(f"invalid index range [{i0}, {i1}]")
    if i0 == i1:
        return 0.0
    _, g, _, regular = metric_samples(curve, width)
    params = curve.parameter_values()
    if curve.closed and i1 == n:
        g = np.concatenate([g[i0:], g[: 1]])
        params = np.concatenate([params[i0:], [params[0] + curve.period]])
        bad = np.nonzero(~np.concatenate([regular[i0:], regular[:1]]))[0]
    else:
        bad = np.nonzero(~regular[i0:i1 + 1])[0]
        g = g[i0:i1 + 1]
        params = params[i0:i1 + 1]
    if len(bad):
        raise IrregularPoint("irregular sample inside integration range",
                             index=int(i0 + bad[0]))
    return float(simpson(g, x=params))


def signature_from_arrays(pos, d1, d2, d3, params, closed: bool,
                          period: float | None = None, clip: float = 100.0,
                          scale: float | None = None) -> InvariantSignature:
    """Signature from precomputed derivative arrays (analytic or spline)."""
    eps, g, kappa, regular = invariant_arrays(pos, d1, d2, d3, scale=scale)
    params = np.asarray(params, dtype=float)
    n = len(params)
    # cumulative arc length over all samples; irregular g interpolated so the
    # axis stays monotone (their kappa samples are discarded below)
    g_filled = g.copy()
    if np.any(~regular):
        if regular.sum() < 2:
            raise TooFewRegularPoints("fewer than 2 regular samples")
        g_filled[~regular] = np.interp(params[~regular], params[regular], g[regular])
    s = cumulative_trapezoid(g_filled, params, initial=0.0)
    if closed:
        if period is None:
            raise InvariantViolation("closed signature needs a period")
        wrap_dp = period - (params[-1] - params[0])
        total = float(s[-1] + 0.5 * (g_filled[-1] + g_filled[0]) * wrap_dp)
    else:
        total = float(s[-1])

    irregular_idx = np.nonzero(~regular)[0]
    clipped_idx = np.nonzero(regular & (np.abs(kappa) > clip))[0]
    keep = regular & (np.abs(kappa) <= clip)
    if keep.sum() < MIN_CURVE_POINTS:
        raise TooFewRegularPoints(
            f"only {int(keep.sum())} regular samples remain after clipping")
    return InvariantSignature(s[keep], kappa[keep], eps[keep], total, closed,
                              clipped_idx, irregular_idx)


def signature(curve: SampledCurve, clip: float = 100.0, width: int = 7) -> InvariantSignature:
    """Finite-difference invariant signature of a sampled curve.

    Samples with |kappa| above ``clip`` are dropped and recorded, as are
    samples failing the regularity test.
    """
    d1, d2, d3 = curve_derivatives(curve, 3, width)
    return signature_from_arrays(curve.points, d1, d2, d3,
                                 curve.parameter_values(), curve.closed,
                                 curve.period, clip, scale=curve.diameter())


# ---------------------------------------------------------------------------
# constant-curvature classification and reconstruction
# ---------------------------------------------------------------------------

def classify_constant(kappa: float, eps: int = 1, tol: float = 1e-9) -> ConstantCurvatureClass:
    """Classify a constant-curvature curve by its (kappa, eps).

    Only eps = +1 is classified for kappa != 0; negative kappa is reported as
    the class of |kappa| with the ``reversed`` flag set.
    """
    if eps == -1:
        if abs(kappa) <= tol:
            return ConstantCurvatureClass("hyperbola")
        raise Unclassified("no constant-curvature classification for eps = -1, kappa != 0")
    if eps != 1:
        raise Unclassified(f"eps must be +-1, got {eps}")
    rev = kappa < 0
    k = abs(kappa)
    if k <= tol:
        return ConstantCurvatureClass("unit_circle")
    if abs(k - 2.0) <= tol:
        return ConstantCurvatureClass("x_log_x", reversed=rev)
    if k > 2.0:
        alpha = ((k - np.sqrt(k * k - 4.0)) / 2.0) ** 2
        return ConstantCurvatureClass("power_curve", alpha=float(alpha), reversed=rev)
    return ConstantCurvatureClass("log_spiral", phi=float(np.arccos(k / 2.0)), reversed=rev)


def format_class(cls: ConstantCurvatureClass) -> str:
    if cls.kind == "power_curve":
        body = f"PowerCurve alpha={cls.alpha:.4g}"
    elif cls.kind == "log_spiral":
        body = f"LogSpiral phi={cls.phi:.4f}"
    else:
        body = {"x_log_x": "XLogX", "unit_circle": "UnitCircle",
                "hyperbola": "Hyperbola"}[cls.kind]
    return body + (" reversed" if cls.reversed else "")


def reconstruct_from_curvature(kappa_of_s, eps: int, init,
                               s_max: float, n_steps: int = 2000) -> SampledCurve:
    """Integrate x'' = kappa(s) x' - eps x from (x0, x0') over [0, s_max].

    ``kappa_of_s`` is a callable or an ``(s_grid, values)`` pair.  Uses the
    classic fourth-order one-step scheme; the result is parametrized by arc
    length (measured g identically 1 up to integration error).
    """
    if callable(kappa_of_s):
        kfun = kappa_of_s
    else:
        s_grid, k_vals = kappa_of_s
        s_grid = np.asarray(s_grid, dtype=float)
        k_vals = np.asarray(k_vals, dtype=float)
        from scipy.interpolate import CubicSpline
        kfun = CubicSpline(s_grid, k_vals)
    x0, v0 = (np.asarray(v, dtype=float) for v in init)
    if abs(bracket(x0, v0)) < 1e-12 * max(1.0, np.dot(x0, x0), np.dot(v0, v0)):
        raise DegenerateInit("[x0, x0'] = 0")

    def rhs(s, state):
        x = state[:2]
        v = state[2:]
        return np.concatenate([v, float(kfun(s)) * v - eps * x])

    h = s_max / n_steps
    state = np.concatenate([x0, v0])
    out = np.empty((n_steps + 1, 2))
    out[0] = x0
    s = 0.0
    for i in range(n_steps):
        k1 = rhs(s, state)
        k2 = rhs(s + h / 2, state + h / 2 * k1)
        k3 = rhs(s + h / 2, state + h / 2 * k2)
        k4 = rhs(s + h, state + h * k3)
        state = state + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        s += h
        out[i + 1] = state[:2]
    return SampledCurve(out, closed=False,
                        params=np.linspace(0.0, s_max, n_steps + 1))
