"""Invariant curve evolution dC/dt = beta(kappa) C_ss and its curvature dynamics.

For beta = 1 (the invariant heat flow) the curvature obeys the first-order
inviscid Burgers equation kappa_t = kappa kappa_s, the ratio kappa/g is
conserved per material label, and on arcs of one-signed curvature the flow
has the closed-form solution C(p, t) = exp(-eps t) Psi(t + h(p)) with
h(p) = integral of g/kappa.

The solver is Lagrangian: sample points keep their material labels, their
positions follow the flow field, and the metric/curvature are remeasured
from the evolved polyline by finite differences.
"""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import CubicSpline, PchipInterpolator

from .curve_core import (
    DerivativeStencil,
    SampledCurve,
    invariant_arrays,
)
from .errors import (
    InvariantViolation,
    IrregularPoint,
    KappaVanishes,
    PastShock,
    RangeExceeded,
    ShockEncountered,
    StabilityViolation,
)

STABILITY_FACTOR = 0.25  # dt <= STABILITY_FACTOR * min(delta s)
DEFAULT_SHOCK_BOUND = 1e3  # sup |kappa_s| triggering shock detection


# ---------------------------------------------------------------------------
# state
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FlowState:
    """Curve + measured metric/curvature at one flow time.

    ``curve.params`` are the material labels; they survive resampling, so
    per-label quantities (kappa/g) stay comparable along a trajectory.
    """

    curve: SampledCurve
    g: np.ndarray
    kappa: np.ndarray
    eps: int
    t: float

    def __post_init__(self):
        n = self.curve.n
        if len(self.g) != n or len(self.kappa) != n:
            raise InvariantViolation("g/kappa arrays must match the curve length")
        if not np.all(self.g > 0):
            raise InvariantViolation("g must be positive everywhere")
        if self.eps not in (-1, 1):
            raise InvariantViolation("eps must be +-1")

    @property
    def labels(self) -> np.ndarray:
        return self.curve.parameter_values()

    def arclength_grid(self) -> np.ndarray:
        return cumulative_trapezoid(self.g, self.labels, initial=0.0)


@dataclass(frozen=True)
class BetaSpec:
    """Normal-speed profile beta(kappa).

    ``kind``: ``constant_one``, ``power`` (kappa ** exponent) or
    ``polynomial`` (coeffs in increasing degree).
    """

    kind: str = "constant_one"
    exponent: int = 0
    coeffs: tuple = ()

    def __post_init__(self):
        if self.kind not in ("constant_one", "power", "polynomial"):
            raise InvariantViolation(f"unknown beta kind {self.kind!r}")
        if self.kind == "power" and self.exponent < 0:
            raise InvariantViolation("exponent must be >= 0")
        if self.kind == "polynomial" and not np.all(np.isfinite(self.coeffs)):
            raise InvariantViolation("coefficients must be finite")

    @property
    def is_constant_one(self) -> bool:
        return (self.kind == "constant_one"
                or (self.kind == "power" and self.exponent == 0)
                or (self.kind == "polynomial" and tuple(self.coeffs) == (1.0,)))

    def __call__(self, kappa: np.ndarray) -> np.ndarray:
        kappa = np.asarray(kappa, dtype=float)
        if self.kind == "constant_one":
            return np.ones_like(kappa)
        if self.kind == "power":
            return kappa ** self.exponent
        out = np.zeros_like(kappa)
        for i, c in enumerate(self.coeffs):
            out = out + c * kappa ** i
        return out


@dataclass(frozen=True)
class TangentNormalCoeffs:
    """beta C_ss = W C_s + U C with W = beta kappa, U = -eps beta."""

    W: np.ndarray
    U: np.ndarray


def tangent_normal_coeffs(state: FlowState, beta: BetaSpec) -> TangentNormalCoeffs:
    b = beta(state.kappa)
    return TangentNormalCoeffs(W=b * state.kappa, U=-state.eps * b)


# ---------------------------------------------------------------------------
# measurement
# ---------------------------------------------------------------------------

def _measure(points: np.ndarray, stencil: DerivativeStencil, scale: float):
    d1 = stencil.apply(points, 1)
    d2 = stencil.apply(points, 2)
    d3 = stencil.apply(points, 3)
    eps, g, kappa, regular = invariant_arrays(points, d1, d2, d3, scale=scale)
    return d1, d2, eps, g, kappa, regular


def _state_from_points(points, labels, closed, period, t, stencil=None) -> FlowState:
    curve = SampledCurve(points, closed, labels, period)
    if stencil is None:
        stencil = DerivativeStencil(labels, closed, period, 3)
    _, _, eps, g, kappa, regular = _measure(points, stencil, curve.diameter())
    if not np.all(regular):
        raise IrregularPoint("irregular sample in flow state",
                             index=int(np.nonzero(~regular)[0][0]))
    if np.any(eps != eps[0]):
        raise IrregularPoint("eps is not uniform over the curve")
    return FlowState(curve, g, kappa, int(eps[0]), t)


def init_state(curve: SampledCurve) -> FlowState:
    """Measure g, kappa, eps on a regular curve; flow time 0."""
    return _state_from_points(curve.points, curve.parameter_values(),
                              curve.closed, curve.period, 0.0)


def kappa_over_g(state: FlowState) -> np.ndarray:
    """Elementwise kappa/g; conserved per material label under the heat flow."""
    return state.kappa / state.g


# ---------------------------------------------------------------------------
# evolution rates
# ---------------------------------------------------------------------------

def _s_derivative_stencil(state: FlowState, width: int = 5) -> DerivativeStencil:
    s = state.arclength_grid()
    period = None
    if state.curve.closed:
        wrap_dp = state.curve.period - (state.labels[-1] - state.labels[0])
        period = float(s[-1] + 0.5 * (state.g[-1] + state.g[0]) * wrap_dp)
    return DerivativeStencil(s, state.curve.closed, period, 3, width)


def evolution_rates(state: FlowState, beta: BetaSpec, width: int = 5):
    """(dg/dt, dkappa/dt) per sample for the flow dC/dt = beta C_ss.

        dg/dt / g   = (beta_ss + kappa beta_s)/2 + kappa_s beta
        dkappa/dt   = beta kappa kappa_s - 2 eps beta_s
                      + ((kappa_s + kappa^2) beta_s - beta_sss)/2

    with all derivatives taken in arc length along the current curve.
    """
    stencil = _s_derivative_stencil(state, width)
    kappa = state.kappa
    kappa_s = stencil.apply(kappa, 1)
    b = beta(kappa)
    if beta.is_constant_one:
        b_s = np.zeros_like(kappa)
        b_ss = np.zeros_like(kappa)
        b_sss = np.zeros_like(kappa)
    else:
        b_s = stencil.apply(b, 1)
        b_ss = stencil.apply(b, 2)
        b_sss = stencil.apply(b, 3)
    g_rate = state.g * (0.5 * (b_ss + kappa * b_s) + kappa_s * b)
    kappa_rate = (b * kappa * kappa_s - 2.0 * state.eps * b_s
                  + 0.5 * ((kappa_s + kappa ** 2) * b_s - b_sss))
    return g_rate, kappa_rate


# ---------------------------------------------------------------------------
# time stepping
#
# The Lagrangian dynamics dC/dt = beta C_ss rewrites, via the intrinsic
# identities C_ss = kappa C_s - eps C and g C_s = C_p, as
#
#     dC/dt = (beta kappa / g) C_p - eps beta C.
#
# Re-measuring kappa from evolving sample points feeds noise back into the
# velocity with a gain growing like (wavenumber)^3, so naive explicit
# stepping is exponentially unstable at any usable dt.  Two stable paths are
# used for the heat flow (beta = 1):
#
#   closed curves   semi-Lagrangian transport along the exact characteristics
#                   of the advection form, with the advecting field kappa/g
#                   re-measured every step and low-pass filtered;
#
#   open arcs       march the invariant fields themselves,
#                       kappa_t = (kappa/g) kappa_p,   g_t = kappa_p,
#                   together with a material anchor (position and tangent of
#                   the first sample), then rebuild the points by integrating
#                   the structure equation x_ss = kappa x_s - eps x.  The
#                   fields see no curve measurements while marching, so the
#                   feedback loop is gone; the few inflow-contaminated
#                   boundary samples are refreshed each step by polynomial
#                   extrapolation from the interior.
#
# General beta uses a direct explicit step under the conservative quadratic
# stability bound; it is intended for single steps and short runs.
# ---------------------------------------------------------------------------

OPEN_TRIM = 6   # boundary samples refreshed per step in the open-arc march
OPEN_FITW = 10  # interior samples feeding the boundary extrapolation


def min_spacing(state: FlowState) -> float:
    ds = np.diff(state.arclength_grid())
    if state.curve.closed:
        wrap_dp = state.curve.period - (state.labels[-1] - state.labels[0])
        ds = np.append(ds, 0.5 * (state.g[-1] + state.g[0]) * wrap_dp)
    return float(ds.min())


def stability_bound(state: FlowState, beta: BetaSpec = BetaSpec(),
                    factor: float = STABILITY_FACTOR) -> float:
    """Largest admissible dt.

    The heat-flow paths take a first-order bound; the general explicit path
    keeps the conservative quadratic bound that also covers finite-difference
    noise in the measured coefficients.
    """
    h = min_spacing(state)
    return factor * h if beta.is_constant_one else factor * h * h


def _fourier_lowpass(vals: np.ndarray, keep: int) -> np.ndarray:
    F = np.fft.rfft(vals)
    F[keep + 1:] = 0.0
    return np.fft.irfft(F, n=len(vals))


def _heat_step_closed(state: FlowState, dt: float,
                      stencil: DerivativeStencil) -> FlowState:
    labels = state.labels
    period = state.curve.period
    pts = state.curve.points
    q = state.kappa / state.g
    q = _fourier_lowpass(q, max(6, state.curve.n // 6))
    lab_ext = np.append(labels, labels[0] + period)
    q_spl = CubicSpline(lab_ext, np.append(q, q[0]), bc_type="periodic")
    mid = labels + 0.5 * dt * q
    feet = labels + dt * q_spl((mid - labels[0]) % period + labels[0])
    feet = (feet - labels[0]) % period + labels[0]
    pos_spl = CubicSpline(lab_ext, np.vstack([pts, pts[:1]]), bc_type="periodic")
    new_pts = np.exp(-state.eps * dt) * pos_spl(feet)
    return _state_from_points(new_pts, labels, True, period, state.t + dt, stencil)


def _extrapolation_operator(labels, src_idx, dst_idx, degree: int = 4):
    """Matrix mapping field values at src samples to extrapolated dst values."""
    ps = labels[src_idx]
    mid = ps.mean()
    half = max(float(np.ptp(ps)) / 2.0, 1e-300)
    V = np.vander((ps - mid) / half, degree + 1, increasing=True)
    Q, R = np.linalg.qr(V, mode="reduced")
    Vd = np.vander((labels[dst_idx] - mid) / half, degree + 1, increasing=True)
    return Vd @ np.linalg.solve(R, Q.T)


class _InvariantFieldMarch:
    """Explicit march of (kappa, g, anchor position, anchor tangent).

    State vector y = [kappa (n), g (n), C (2), C_s (2)] on a fixed open-arc
    label grid.  The anchor is the first sample; its motion follows the
    pointwise flow law driven by the local curvature.
    """

    def __init__(self, labels: np.ndarray, eps: int):
        self.labels = labels
        self.n = len(labels)
        self.eps = eps
        self.stencil = DerivativeStencil(labels, False, None, 1, width=7)
        trim = min(OPEN_TRIM, max(1, self.n // 8))
        fitw = min(OPEN_FITW, max(4, self.n // 4))
        self.trim = trim
        n = self.n
        self.E_lo = _extrapolation_operator(labels, np.arange(trim, trim + fitw),
                                            np.arange(trim))
        self.E_hi = _extrapolation_operator(labels,
                                            np.arange(n - trim - fitw, n - trim),
                                            np.arange(n - trim, n))
        self.fit_lo = np.arange(trim, trim + fitw)
        self.fit_hi = np.arange(n - trim - fitw, n - trim)

    @classmethod
    def from_state(cls, state: FlowState, d1_first: np.ndarray):
        march = cls(state.labels, state.eps)
        y = np.concatenate([state.kappa, state.g,
                            state.curve.points[0],
                            d1_first / state.g[0]])
        return march, y

    def rhs(self, y):
        n = self.n
        K = y[:n]
        G = y[n: 2 * n]
        C = y[2 * n: 2 * n + 2]
        Cs = y[2 * n + 2:]
        Kp = self.stencil.apply(K, 1)
        ka = K[0]
        eps = self.eps
        return np.concatenate([
            (K / G) * Kp,
            Kp,
            ka * Cs - eps * C,
            (ka * ka - eps) * Cs - eps * ka * C,
        ])

    def _refresh(self, F):
        F[: self.trim] = self.E_lo @ F[self.fit_lo]
        F[self.n - self.trim:] = self.E_hi @ F[self.fit_hi]
        return F

    def step(self, y, dt):
        a1 = self.rhs(y)
        a2 = self.rhs(y + 0.5 * dt * a1)
        a3 = self.rhs(y + 0.5 * dt * a2)
        a4 = self.rhs(y + dt * a3)
        y = y + dt / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4)
        n = self.n
        y[:n] = self._refresh(y[:n].copy())
        y[n: 2 * n] = self._refresh(y[n: 2 * n].copy())
        return y

    def sup_kappa_s(self, y):
        n = self.n
        Kp = self.stencil.apply(y[:n], 1)
        return float(np.max(np.abs(Kp / y[n: 2 * n])))

    def reconstruct(self, y):
        """Rebuild sample positions from the marched fields and anchor."""
        n = self.n
        labels = self.labels
        eps = self.eps
        K = y[:n]
        G = y[n: 2 * n]
        Kspl = CubicSpline(labels, K)
        Gspl = CubicSpline(labels, G)
        # substep nodes for classic fourth-order integration of
        # x_pp = (g kappa + g_p / g) x_p - eps g^2 x across each interval
        nodes = []
        for i in range(n - 1):
            a, b = labels[i], labels[i + 1]
            m = 0.5 * (a + b)
            nodes.extend([a, 0.5 * (a + m), m, 0.5 * (m + b), b])
        nodes = np.asarray(nodes)
        gv = Gspl(nodes)
        Av = gv * Kspl(nodes) + Gspl(nodes, 1) / gv
        Bv = -eps * gv * gv
        pts = np.empty((n, 2))
        pts[0] = y[2 * n: 2 * n + 2]
        state_vec = np.concatenate([pts[0], y[2 * n + 2:] * G[0]])

        def substep(idx, h, sv):
            # one RK4 substep; coefficient values at (p, p+h/2, p+h)
            A0, A1, A2 = Av[idx], Av[idx + 1], Av[idx + 2]
            B0, B1, B2 = Bv[idx], Bv[idx + 1], Bv[idx + 2]
            x, v = sv[:2], sv[2:]
            k1x, k1v = v, A0 * v + B0 * x
            x1, v1 = x + 0.5 * h * k1x, v + 0.5 * h * k1v
            k2x, k2v = v1, A1 * v1 + B1 * x1
            x2, v2 = x + 0.5 * h * k2x, v + 0.5 * h * k2v
            k3x, k3v = v2, A1 * v2 + B1 * x2
            x3, v3 = x + h * k3x, v + h * k3v
            k4x, k4v = v3, A2 * v3 + B2 * x3
            return np.concatenate([
                x + h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x),
                v + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v),
            ])

        for i in range(n - 1):
            h = 0.5 * (labels[i + 1] - labels[i])
            base = 5 * i
            state_vec = substep(base, h, state_vec)
            state_vec = substep(base + 2, h, state_vec)
            pts[i + 1] = state_vec[:2]
        return pts


def _heat_step_open(state: FlowState, dt: float,
                    stencil: DerivativeStencil) -> FlowState:
    d1 = stencil.apply(state.curve.points, 1)
    march, y = _InvariantFieldMarch.from_state(state, d1[0])
    y = march.step(y, dt)
    pts = march.reconstruct(y)
    return _state_from_points(pts, state.labels, False, None,
                              state.t + dt, stencil)


def _general_velocity(points, stencil, beta, scale):
    """(beta kappa / g) C_p - eps beta C from the sampled points."""
    d1 = stencil.apply(points, 1)
    d2 = stencil.apply(points, 2)
    d3 = stencil.apply(points, 3)
    eps, g, kappa, regular = invariant_arrays(points, d1, d2, d3, scale=scale)
    if not np.all(regular):
        raise IrregularPoint("irregular sample during stage evaluation",
                             index=int(np.nonzero(~regular)[0][0]))
    b = beta(kappa)
    return (b * kappa / g)[:, None] * d1 - (eps * b)[:, None] * points


def step(state: FlowState, beta: BetaSpec, dt: float,
         stencil: DerivativeStencil | None = None) -> FlowState:
    """Advance one time step; g and kappa are re-measured from the new curve.

    beta = 1 dispatches to the stable heat-flow paths; other beta use an
    explicit fourth-order step of the advection form under the conservative
    quadratic stability bound.
    """
    if dt < 0:
        raise InvariantViolation("dt must be >= 0")
    if dt == 0.0:
        return state
    bound = stability_bound(state, beta)
    if dt > bound:
        raise StabilityViolation(
            f"dt = {dt:.3e} exceeds stability bound {bound:.3e}")
    labels = state.labels
    closed = state.curve.closed
    if stencil is None:
        stencil = DerivativeStencil(labels, closed, state.curve.period, 3)
    try:
        if beta.is_constant_one:
            if closed:
                return _heat_step_closed(state, dt, stencil)
            return _heat_step_open(state, dt, stencil)
        scale = state.curve.diameter()
        pts = state.curve.points
        k1 = _general_velocity(pts, stencil, beta, scale)
        k2 = _general_velocity(pts + 0.5 * dt * k1, stencil, beta, scale)
        k3 = _general_velocity(pts + 0.5 * dt * k2, stencil, beta, scale)
        k4 = _general_velocity(pts + dt * k3, stencil, beta, scale)
        new_pts = pts + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        return _state_from_points(new_pts, labels, closed, state.curve.period,
                                  state.t + dt, stencil)
    except IrregularPoint as exc:
        raise StabilityViolation(f"post-step curve is irregular: {exc}") from exc


def _resample_uniform_s(state: FlowState) -> FlowState:
    """Redistribute samples to uniform arc length, carrying material labels."""
    s = state.arclength_grid()
    labels = state.labels
    pts = state.curve.points
    period = state.curve.period
    wrap_dp = period - (labels[-1] - labels[0])
    total = s[-1] + 0.5 * (state.g[-1] + state.g[0]) * wrap_dp
    s_ext = np.append(s, total)
    pts_ext = np.vstack([pts, pts[:1]])
    lab_ext = np.append(labels, labels[0] + period)
    interp_xy = CubicSpline(s_ext, pts_ext, bc_type="periodic")
    interp_lab = PchipInterpolator(s_ext, lab_ext)
    s_new = np.linspace(0.0, total, state.curve.n, endpoint=False)
    new_labels = interp_lab(s_new)
    new_labels[0] = labels[0]
    return _state_from_points(interp_xy(s_new), new_labels, True, period, state.t)


def evolve(curve0: SampledCurve, T: float, dt: float,
           beta: BetaSpec = BetaSpec(), resample_every: int = 10,
           shock_bound: float = DEFAULT_SHOCK_BOUND,
           save_every: int = 1) -> list[FlowState]:
    """March the invariant flow to time T, returning saved states.

    Closed curves are redistributed to uniform arc length every
    ``resample_every`` accepted steps (0 disables); material labels ride
    along so per-label diagnostics survive.  Open-arc heat flows march the
    invariant fields continuously and materialize curve states only at save
    points.  A blow-up of sup |kappa_s| beyond ``shock_bound`` raises
    ShockEncountered with the time.
    """
    if T < 0 or dt <= 0:
        raise InvariantViolation("need T >= 0 and dt > 0")
    state = init_state(curve0)
    states = [state]
    n_steps = max(1, int(round(T / dt))) if T > 0 else 0
    dt = T / n_steps if n_steps else dt
    stencil = DerivativeStencil(state.labels, curve0.closed, curve0.period, 3)

    if beta.is_constant_one and not curve0.closed and n_steps > 0:
        bound = stability_bound(state, beta)
        if dt > bound:
            raise StabilityViolation(
                f"dt = {dt:.3e} exceeds stability bound {bound:.3e}")
        d1 = stencil.apply(state.curve.points, 1)
        march, y = _InvariantFieldMarch.from_state(state, d1[0])
        for i in range(n_steps):
            y = march.step(y, dt)
            sup_ks = march.sup_kappa_s(y)
            if sup_ks > shock_bound:
                raise ShockEncountered(
                    f"sup |kappa_s| = {sup_ks:.3e} exceeds {shock_bound:.3e}",
                    time=(i + 1) * dt)
            if (i + 1) % save_every == 0 or i + 1 == n_steps:
                pts = march.reconstruct(y)
                states.append(_state_from_points(pts, state.labels, False, None,
                                                 (i + 1) * dt, stencil))
        return states

    for i in range(n_steps):
        state = step(state, beta, dt, stencil)
        sup_ks = float(np.max(np.abs(np.gradient(state.kappa, state.arclength_grid()))))
        if sup_ks > shock_bound:
            raise ShockEncountered(
                f"sup |kappa_s| = {sup_ks:.3e} exceeds {shock_bound:.3e}",
                time=state.t)
        if (resample_every and curve0.closed and (i + 1) % resample_every == 0
                and i + 1 < n_steps):
            state = _resample_uniform_s(state)
            stencil = DerivativeStencil(state.labels, True, curve0.period, 3)
        if (i + 1) % save_every == 0 or i + 1 == n_steps:
            states.append(state)
    return states


def heat_flow_evolve(curve0: SampledCurve, T: float, dt: float,
                     resample_every: int = 10,
                     shock_bound: float = DEFAULT_SHOCK_BOUND,
                     save_every: int = 1) -> list[FlowState]:
    """Invariant heat flow (beta = 1) trajectory."""
    return evolve(curve0, T, dt, BetaSpec(), resample_every, shock_bound,
                  save_every)


def conservation_drift(states: list[FlowState]) -> float:
    """max |kappa/g (label, t) - kappa/g (label, 0)| across the trajectory.

    Later states may carry different labels (after resampling); the initial
    field is interpolated onto them, periodically for closed curves.
    """
    base = states[0]
    ratio0 = kappa_over_g(base)
    labels = base.labels
    if base.curve.closed:
        labels = np.append(labels, labels[0] + base.curve.period)
        ratio0 = np.append(ratio0, ratio0[0])
    interp = PchipInterpolator(labels, ratio0)
    lo, hi = labels[0], labels[-1]
    worst = 0.0
    for st in states[1:]:
        lab = np.clip(st.labels, lo, hi)
        worst = max(worst, float(np.max(np.abs(kappa_over_g(st) - interp(lab)))))
    return worst


def arclength_rate(state: FlowState, i1: int, i2: int) -> float:
    """d/dt of the arc length between material samples i1 and i2 (heat flow).

    Equals kappa(p2) - kappa(p1); for a closed curve over the full period the
    two endpoints coincide and the rate is 0.
    """
    n = state.curve.n
    if not (0 <= i1 <= i2 <= n):
        raise InvariantViolation("invalid sample range")
    if i2 == n:  # full wrap back to the start
        i2 = i1
    return float(state.kappa[i2] - state.kappa[i1])


# ---------------------------------------------------------------------------
# characteristics of the curvature dynamics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CharacteristicField:
    """h(p) = integral of g/kappa plus lookup tables built from it.

    ``psi`` maps the h-coordinate to the initial position (the Cauchy data of
    the closed-form heat solution) and ``phi`` to the initial curvature.
    ``s0`` is the initial arc-length grid; ``shock_time`` is
    1 / max(d kappa0 / ds) when that max is positive.
    """

    labels: np.ndarray
    s0: np.ndarray
    h: np.ndarray
    shock_time: float
    psi: PchipInterpolator
    phi: PchipInterpolator
    s0_of_h: PchipInterpolator = field(repr=False, default=None)


def characteristic_field(state_or_curve, tol: float = 1e-9) -> CharacteristicField:
    """Build the characteristic tables from an initial state or curve."""
    state = state_or_curve
    if isinstance(state, SampledCurve):
        state = init_state(state)
    kappa = state.kappa
    scale = max(np.max(np.abs(kappa)), 1.0)
    if np.min(np.abs(kappa)) < tol * scale or len(np.unique(np.sign(kappa))) > 1:
        raise KappaVanishes("kappa must be nonzero and of one sign")
    labels = state.labels
    s = state.arclength_grid()
    h = cumulative_trapezoid(1.0 / kappa, s, initial=0.0)
    dk_ds = np.gradient(kappa, s)
    mx = float(np.max(dk_ds))
    shock = 1.0 / mx if mx > 0 else np.inf
    increasing = h[-1] > h[0]
    hs = h if increasing else h[::-1]
    flip = (lambda a: a) if increasing else (lambda a: a[::-1])
    psi = PchipInterpolator(hs, flip(state.curve.points))
    phi = PchipInterpolator(hs, flip(kappa))
    return CharacteristicField(labels, s, h, shock, psi, phi,
                               PchipInterpolator(hs, flip(s)))


def shock_time(s: np.ndarray, kappa0: np.ndarray) -> float:
    """1 / max(d kappa0/ds) when positive, else infinity."""
    dk = np.gradient(np.asarray(kappa0, dtype=float), np.asarray(s, dtype=float))
    mx = float(np.max(dk))
    return 1.0 / mx if mx > 0 else np.inf


def burgers_characteristics(s: np.ndarray, kappa0: np.ndarray, t: float,
                            period: float | None = None) -> np.ndarray:
    """Solve kappa_t = kappa kappa_s by straight characteristics.

    The value kappa0(s0) travels to s0 - kappa0(s0) * t; the result is
    resampled on the input grid by monotone interpolation.  ``period`` wraps
    the profile periodically; otherwise positions needing data from outside
    the sampled range take the nearest edge value.
    """
    s = np.asarray(s, dtype=float)
    kappa0 = np.asarray(kappa0, dtype=float)
    ts = shock_time(s, kappa0)
    if t < 0:
        raise InvariantViolation("t must be >= 0")
    if t >= ts:
        raise PastShock(f"t = {t:.6g} is past the shock", shock_time=ts)
    if t == 0.0:
        return kappa0.copy()
    if period is not None:
        span = s[-1] - s[0]
        if abs(span - period) <= 1e-9 * period:  # endpoint-inclusive grid
            s_base, k_base = s[:-1], kappa0[:-1]
        else:
            s_base, k_base = s, kappa0
        s_ext = np.concatenate([s_base - period, s_base, s_base + period])
        k_ext = np.tile(k_base, 3)
    else:
        s_ext, k_ext = s, kappa0
    z = s_ext - k_ext * t
    if np.any(np.diff(z) <= 0):
        raise PastShock("characteristics cross at this time", shock_time=ts)
    interp = PchipInterpolator(z, k_ext)
    return interp(np.clip(s, z[0], z[-1]))


def upwind_burgers(s: np.ndarray, kappa0: np.ndarray, t: float,
                   period: float, n_fine: int = 8192, cfl: float = 0.4) -> np.ndarray:
    """Conservative Godunov solver for kappa_t = (kappa^2/2)_s on a periodic grid.

    Independent oracle for the characteristic solution; first-order accurate.
    """
    s = np.asarray(s, dtype=float)
    kappa0 = np.asarray(kappa0, dtype=float)
    s_fine = s[0] + np.arange(n_fine) * (period / n_fine)
    s_ext = np.concatenate([s, [s[0] + period]])
    k_ext = np.concatenate([kappa0, [kappa0[0]]])
    u = np.interp(s_fine, s_ext, k_ext)
    # kappa_t - f(kappa)_s = 0 with f = kappa^2/2 becomes standard Burgers
    # u_t + f(u)_x = 0 under x = -s: solve on the reversed axis.
    u = u[::-1]
    dx = period / n_fine
    remaining = float(t)

    def godunov_flux(ul, ur):
        fl = 0.5 * np.maximum(ul, 0.0) ** 2
        fr = 0.5 * np.minimum(ur, 0.0) ** 2
        return np.maximum(fl, fr)

    while remaining > 1e-15:
        dt = min(cfl * dx / max(np.max(np.abs(u)), 1e-12), remaining)
        ul = u
        ur = np.roll(u, -1)
        flux = godunov_flux(ul, ur)
        u = u - dt / dx * (flux - np.roll(flux, 1))
        remaining -= dt
    u = u[::-1]
    fine_ext = np.concatenate([s_fine, [s[0] + period]])
    u_ext = np.concatenate([u, [u[0]]])
    return np.interp(s, fine_ext, u_ext)


# ---------------------------------------------------------------------------
# closed-form heat solution and the oracle frame
# ---------------------------------------------------------------------------

def exact_heat_solution(curve0: SampledCurve, t: float, tol: float = 1e-9):
    """Closed-form heat flow on an arc of one-signed curvature.

    Returns ``(curve_t, valid_indices)``: material sample i of ``curve0``
    moves to exp(-eps t) Psi(t + h(p_i)).  Samples whose characteristic
    argument leaves the sampled h-range are dropped (the closed form only
    determines the solution there); RangeExceeded is raised when no samples
    remain.
    """
    state = init_state(curve0)
    fld = characteristic_field(state, tol)
    if t < 0:
        raise InvariantViolation("t must be >= 0")
    arg = t + fld.h
    lo, hi = min(fld.h[0], fld.h[-1]), max(fld.h[0], fld.h[-1])
    valid = (arg >= lo) & (arg <= hi)
    if not np.any(valid):
        raise RangeExceeded(f"t = {t:.6g} pushes every sample past the arc")
    pts = np.exp(-state.eps * t) * fld.psi(arg[valid])
    labels = state.labels[valid]
    curve_t = SampledCurve(pts, closed=False, params=labels)
    return curve_t, np.nonzero(valid)[0]


def characteristic_frame(state: FlowState, fld: CharacteristicField):
    """Project measured Lagrangian curvature into the straight-characteristic frame.

    Under the heat flow the measured curvature-versus-current-arc-length
    profile is the initial profile rigidly translated; re-anchoring the
    measured arc positions with the characteristic map of the first label and
    shifting by -kappa * t places each sample where the straight-characteristic
    solution of kappa_t = kappa kappa_s carries its value (the Lagrangian
    label correction).  Returns ``(z, kappa_measured, determined)`` in initial
    arc-length units; ``determined`` masks the material samples whose
    characteristic feet stay inside the initial arc (outside it no solution
    is fixed by the initial data).
    """
    s_meas = state.arclength_grid()
    lo, hi = min(fld.h[0], fld.h[-1]), max(fld.h[0], fld.h[-1])
    anchor = float(fld.s0_of_h(np.clip(state.t + fld.h[0], lo, hi)))
    sigma = s_meas + anchor
    z = sigma - state.kappa * state.t
    arg = state.t + fld.h
    determined = (arg >= lo) & (arg <= hi)
    return z, state.kappa.copy(), determined
