"""Signature comparison, alignment, DTW correspondence, and homography
estimation.

Invariant signatures are compared as 1-D signals over the normalized
arc-length axis: a trimming/interpolation distance handles mismatched sample
grids, an exhaustive cyclic-shift/reversal search aligns two signatures, and
dynamic time warping extracts per-sample correspondences.  Matched point
pairs feed a normalized-DLT homography estimate.
"""

import os
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from .curve_core import (
    InvariantSignature,
    SampledCurve,
    arc_length,
    curve_derivatives,
)
from .curve_core import signature as curve_signature
from .errors import (
    BandInfeasible,
    DegenerateConfiguration,
    EmptyOverlap,
    InvariantViolation,
    MatchingFailure,
    PointAtInfinity,
    ZeroVariance,
)
from .preprocess import polygon_area, polygon_barycenter

EPS_MISMATCH_WEIGHT = 1.0  # weight of the eps disagreement fraction
CORNER_COST_WEIGHT = 0.1   # descriptor-cost weight per corner-count unit


# ---------------------------------------------------------------------------
# signal distance
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SignalCurve:
    """Discrete graph of a function: strictly increasing x with values y."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 1 or x.shape != y.shape or len(x) < 2:
            raise InvariantViolation("need matching 1-D arrays of length >= 2")
        if np.any(np.diff(x) <= 0):
            raise InvariantViolation("x must be strictly increasing")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise InvariantViolation("signal values must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)


@dataclass(frozen=True)
class SignalDistanceDetail:
    dist1: float
    dist2: float
    error1: float
    error2: float
    grid: np.ndarray


def _two_sided_trim(xs: np.ndarray, other: np.ndarray) -> np.ndarray:
    """Keep values with a strict neighbour from ``other`` on both sides."""
    return xs[(xs > other.min()) & (xs < other.max())]


def _enforce_interleave(xa: np.ndarray, xb: np.ndarray):
    """Drop leading points until x_a[i] > x_b[i-1] and x_b[i] > x_a[i-1]."""
    xa, xb = list(xa), list(xb)
    changed = True
    while changed and xa and xb:
        changed = False
        for i in range(1, min(len(xa), len(xb) + 1)):
            if xa[i] <= xb[i - 1]:
                del xa[0]
                changed = True
                break
        if changed:
            continue
        for i in range(1, min(len(xb), len(xa) + 1)):
            if xb[i] <= xa[i - 1]:
                del xb[0]
                changed = True
                break
    return np.asarray(xa), np.asarray(xb)


def signal_distance_detail(A: SignalCurve, B: SignalCurve) -> SignalDistanceDetail:
    """Trimming/interpolation distance between two discrete graphs.

    Both x-sets are trimmed so every kept point has two neighbours from the
    other set and the sequences interleave; the union grid carries both
    functions by piecewise-linear interpolation, with values borrowed from
    the other curve beyond each curve's own trimmed range.  dist1 is the sup
    difference, dist2 the root-sum-square scaled by 1/K; the errors divide by
    magnitude normalizers built from the untrimmed data.
    """
    xa = _two_sided_trim(A.x, B.x)
    xb = _two_sided_trim(B.x, A.x)
    if len(xa) == 0 or len(xb) == 0:
        raise EmptyOverlap("signals have no overlapping x-range after trimming")
    xa, xb = _enforce_interleave(xa, xb)
    if len(xa) == 0 or len(xb) == 0:
        raise EmptyOverlap("interleaving left no common points")
    grid = np.union1d(xa, xb)

    fa = np.interp(grid, A.x, A.y)
    fb = np.interp(grid, B.x, B.y)
    f = fa.copy()
    outside_a = (grid < xa[0]) | (grid > xa[-1])
    f[outside_a] = fb[outside_a]
    g = fb.copy()
    outside_b = (grid < xb[0]) | (grid > xb[-1])
    g[outside_b] = fa[outside_b]

    diff = np.abs(f - g)
    K = len(grid)
    dist1 = float(diff.max())
    dist2 = float(np.sqrt(np.sum(diff ** 2)) / K)
    na = len(A.x)
    nb = len(B.x)
    denom1 = np.sum(np.abs(A.y)) / (2 * na) + np.sum(np.abs(B.y)) / (2 * nb)
    denom2 = np.sqrt(np.sum(A.y ** 2)) / (2 * na) + np.sqrt(np.sum(B.y ** 2)) / (2 * nb)
    error1 = dist1 / denom1 if denom1 > 0 else np.inf
    error2 = dist2 / denom2 if denom2 > 0 else np.inf
    return SignalDistanceDetail(dist1, dist2, error1, error2, grid)


def signal_distance(A: SignalCurve, B: SignalCurve) -> tuple[float, float]:
    """(error1, error2) of the trimming/interpolation distance."""
    d = signal_distance_detail(A, B)
    return d.error1, d.error2


# ---------------------------------------------------------------------------
# dynamic time warping
# ---------------------------------------------------------------------------

def dtw_align(a, b, window: int | None = None):
    """Classic DTW of two 1-D sequences under |a_i - b_j| local cost.

    Steps are (1,0), (0,1), (1,1); ``window`` adds a band constraint
    |i - j| <= window.  Returns (path, cost) with a monotone
    boundary-to-boundary path of index pairs.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        raise InvariantViolation("dtw inputs must be nonempty")
    if window is not None and window < abs(n - m):
        raise BandInfeasible(
            f"window {window} cannot bridge length difference {abs(n - m)}")
    INF = np.inf
    D = np.full((n + 1, m + 1), INF)
    D[0, 0] = 0.0
    for i in range(1, n + 1):
        if window is None:
            lo, hi = 1, m
        else:
            lo = max(1, i - window)
            hi = min(m, i + window)
        cost_row = np.abs(a[i - 1] - b[lo - 1: hi])
        for j, c in zip(range(lo, hi + 1), cost_row):
            D[i, j] = c + min(D[i - 1, j - 1], D[i - 1, j], D[i, j - 1])
    cost = float(D[n, m])
    # backtrace, preferring the diagonal on ties
    path = [(n - 1, m - 1)]
    i, j = n, m
    while i > 1 or j > 1:
        options = (D[i - 1, j - 1], D[i - 1, j], D[i, j - 1])
        k = int(np.argmin(options))
        if k == 0:
            i, j = i - 1, j - 1
        elif k == 1:
            i = i - 1
        else:
            j = j - 1
        path.append((i - 1, j - 1))
    path.reverse()
    return path, cost


# ---------------------------------------------------------------------------
# cyclic alignment of signatures
# ---------------------------------------------------------------------------

@dataclass
class AlignmentResult:
    """Cyclic-shift/reversal alignment plus a DTW correspondence.

    ``dtw_path`` pairs index the transformed sequences (first signature
    rotated by ``cyclic_shift``, second possibly reversed);
    ``correspondences`` carries the same pairs mapped back to the original
    sample indices of both signatures.
    """

    cyclic_shift: int
    reversed: bool
    error1: float
    error2: float
    dtw_path: list = field(default_factory=list)
    correspondences: list = field(default_factory=list)

    def __post_init__(self):
        if self.error1 < 0 or self.error2 < 0:
            raise InvariantViolation("errors must be nonnegative")
        if self.dtw_path:
            if self.dtw_path[0] != (0, 0):
                raise InvariantViolation("dtw path must start at (0, 0)")
            for (i0, j0), (i1, j1) in zip(self.dtw_path, self.dtw_path[1:]):
                if (i1 - i0, j1 - j0) not in ((1, 0), (0, 1), (1, 1)):
                    raise InvariantViolation("dtw path steps must be monotone")


def rotate_signature(sig: InvariantSignature, j: int) -> InvariantSignature:
    """Re-anchor a closed signature at its j-th sample (cyclic rotation)."""
    if not sig.closed:
        raise InvariantViolation("only closed signatures rotate")
    n = sig.n
    j = j % n
    order = np.r_[j:n, 0:j]
    s = sig.s[order]
    s = np.where(np.arange(n) < n - j, s - sig.s[j],
                 s + (sig.total_length - sig.s[j]))
    return InvariantSignature(s, sig.kappa[order], sig.eps[order],
                              sig.total_length, True)


def reverse_signature(sig: InvariantSignature) -> InvariantSignature:
    """Orientation reversal: arc length reflects, kappa flips sign."""
    s = (sig.total_length - sig.s)[::-1]
    if sig.closed:
        # keep the first sample at s = 0
        s = np.r_[0.0, s[:-1]]
        order = np.r_[0, np.arange(sig.n - 1, 0, -1)]
    else:
        order = np.arange(sig.n)[::-1]
    return InvariantSignature(s, -sig.kappa[order], sig.eps[order],
                              sig.total_length, sig.closed)


def _eps_mismatch(sa: InvariantSignature, sb: InvariantSignature) -> float:
    """Fraction of disagreeing eps signs after nearest-sample lookup."""
    idx = np.searchsorted(sb.s, sa.s)
    idx = np.clip(idx, 0, sb.n - 1)
    left = np.clip(idx - 1, 0, sb.n - 1)
    use_left = (np.abs(sb.s[left] - sa.s) < np.abs(sb.s[idx] - sa.s))
    idx = np.where(use_left, left, idx)
    return float(np.mean(sa.eps != sb.eps[idx]))


def best_alignment(sa: InvariantSignature, sb: InvariantSignature,
                   eps_weight: float = EPS_MISMATCH_WEIGHT,
                   window: int | None = None) -> AlignmentResult:
    """Exhaustive cyclic-shift / reversal alignment of two signatures.

    Both signatures are normalized to the unit arc-length axis; candidate
    shifts re-anchor ``sa`` at each of its samples (so a signature rotated by
    k samples is recovered with cyclic_shift = k), the objective is the
    error2 of the kappa signals plus a weighted eps mismatch fraction.  The
    winning transform also gets a DTW correspondence of the kappa arrays.
    """
    if sa.n < 8 or sb.n < 8:
        raise InvariantViolation("signatures need at least 8 samples")
    na = sa.normalized()
    nb = sb.normalized()
    best = None
    for rev in (False, True):
        base_b = reverse_signature(nb) if rev else nb
        shifts = range(sa.n) if sa.closed else [0]
        for j in shifts:
            cand_a = rotate_signature(na, j) if sa.closed else na
            try:
                e1, e2 = signal_distance(SignalCurve(cand_a.s, cand_a.kappa),
                                         SignalCurve(base_b.s, base_b.kappa))
            except EmptyOverlap:
                continue
            objective = e2 + eps_weight * _eps_mismatch(cand_a, base_b)
            if best is None or objective < best[0]:
                best = (objective, j, rev, e1, e2, cand_a, base_b)
    if best is None:
        raise MatchingFailure("no feasible alignment (signals never overlap)")
    _, j, rev, e1, e2, cand_a, base_b = best
    if window is None:
        window = max(8, int(np.ceil(0.1 * max(sa.n, sb.n))))
    window = max(window, abs(sa.n - sb.n))
    path, _ = dtw_align(cand_a.kappa, base_b.kappa, window)
    # map transformed indices back to the original sample orders
    if sb.closed:
        order_b = np.r_[0, np.arange(sb.n - 1, 0, -1)] if rev else np.arange(sb.n)
    else:
        order_b = np.arange(sb.n)[::-1] if rev else np.arange(sb.n)
    corr = [((ia + j) % sa.n, int(order_b[ib])) for ia, ib in path]
    return AlignmentResult(j, rev, e1, e2, path, corr)


# ---------------------------------------------------------------------------
# contour descriptors and set matching
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContourDescriptor:
    total_arclength: float
    kappa_integral: float
    area: float
    barycenter: np.ndarray
    corner_count: int

    def __post_init__(self):
        if self.total_arclength < 0:
            raise InvariantViolation("total_arclength must be >= 0")


def euclidean_curvature(points: np.ndarray, d1: np.ndarray, d2: np.ndarray) -> np.ndarray:
    speed = np.hypot(d1[:, 0], d1[:, 1])
    return (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) / speed ** 3


def count_corners(points: np.ndarray, d1: np.ndarray, d2: np.ndarray,
                  threshold_factor: float = 2.0) -> int:
    """Local maxima of |Euclidean curvature| above a median-based threshold."""
    k = np.abs(euclidean_curvature(points, d1, d2))
    thr = threshold_factor * np.median(k)
    up = k > np.roll(k, 1)
    down = k > np.roll(k, -1)
    return int(np.sum(up & down & (k > thr)))


def descriptor(contour: SampledCurve, barycenter=None,
               signature: InvariantSignature | None = None) -> ContourDescriptor:
    """Global descriptor of a closed contour.

    The contour is expected centered; pass ``barycenter`` to record the
    pre-centering location (it is re-derived otherwise, which gives ~0 for a
    centered contour).  ``signature`` may be supplied to reuse a
    previously computed profile.
    """
    if not contour.closed:
        raise InvariantViolation("descriptors are defined for closed contours")
    if signature is None:
        signature = curve_signature(contour)
    if barycenter is None:
        barycenter = polygon_barycenter(contour.points)
    total = signature.total_length
    kappa_integral = float(simpson(np.abs(signature.kappa), x=signature.s))
    area = polygon_area(contour.points)
    d1, d2, _ = curve_derivatives(contour, 3)
    corners = count_corners(contour.points, d1, d2)
    return ContourDescriptor(total, kappa_integral, float(area),
                             np.asarray(barycenter, dtype=float), corners)


@dataclass
class ContourMatchItem:
    name: str
    descriptor: ContourDescriptor
    signature: InvariantSignature


@dataclass
class MatchResult:
    pairs: list            # (index_a, index_b, AlignmentResult)
    unmatched_a: list
    unmatched_b: list


def _descriptor_cost(da: ContourDescriptor, db: ContourDescriptor) -> float:
    rel_len = abs(da.total_arclength - db.total_arclength) / max(
        da.total_arclength, db.total_arclength, 1e-300)
    return rel_len + CORNER_COST_WEIGHT * abs(da.corner_count - db.corner_count)


def match_contours(set_a: list[ContourMatchItem], set_b: list[ContourMatchItem],
                   optimal: bool = False, shortlist: int = 3,
                   threads: int | None = None) -> MatchResult:
    """One-to-one matching of two contour sets.

    Descriptor distance (relative arc-length difference plus a corner-count
    penalty) shortlists candidates; alignment error2 refines the shortlisted
    costs.  Greedy ascending-cost assignment by default; ``optimal`` switches
    to the Hungarian assignment on the same cost matrix.
    """
    if not set_a or not set_b:
        raise MatchingFailure("cannot match empty contour sets")
    na, nb = len(set_a), len(set_b)
    cost = np.full((na, nb), np.inf)
    tasks = []
    for i, ia in enumerate(set_a):
        dcosts = np.array([_descriptor_cost(ia.descriptor, jb.descriptor)
                           for jb in set_b])
        for j in np.argsort(dcosts)[: min(shortlist, nb)]:
            tasks.append((i, int(j), dcosts[j]))

    def refine(task):
        i, j, dc = task
        try:
            align = best_alignment(set_a[i].signature, set_b[j].signature)
        except (MatchingFailure, InvariantViolation):
            return i, j, np.inf, None
        return i, j, dc + align.error2, align

    if threads is None:
        threads = int(os.environ.get("CENTROAFFINE_THREADS", "0")) or None
    if threads and threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(refine, tasks))
    else:
        results = [refine(t) for t in tasks]

    aligns = {}
    for i, j, c, align in results:
        cost[i, j] = c
        aligns[(i, j)] = align

    pairs = []
    if optimal:
        from scipy.optimize import linear_sum_assignment
        filled = np.where(np.isinf(cost), 1e12, cost)
        rows, cols = linear_sum_assignment(filled)
        for i, j in zip(rows, cols):
            if np.isfinite(cost[i, j]):
                pairs.append((int(i), int(j), aligns[(i, j)]))
    else:
        order = np.argsort(cost, axis=None)
        used_a, used_b = set(), set()
        for flat in order:
            i, j = divmod(int(flat), nb)
            if not np.isfinite(cost[i, j]):
                break
            if i in used_a or j in used_b:
                continue
            used_a.add(i)
            used_b.add(j)
            pairs.append((i, j, aligns[(i, j)]))
    matched_a = {i for i, _, _ in pairs}
    matched_b = {j for _, j, _ in pairs}
    return MatchResult(pairs,
                       [i for i in range(na) if i not in matched_a],
                       [j for j in range(nb) if j not in matched_b])


def correlation(u, v) -> float:
    """Pearson product-moment correlation coefficient."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.ndim != 1 or len(u) < 2:
        raise InvariantViolation("need two equal-length 1-D arrays (>= 2)")
    du = u - u.mean()
    dv = v - v.mean()
    su = np.sqrt(np.sum(du ** 2))
    sv = np.sqrt(np.sum(dv ** 2))
    if su == 0.0 or sv == 0.0:
        raise ZeroVariance("correlation undefined for constant input")
    return float(np.sum(du * dv) / (su * sv))


# ---------------------------------------------------------------------------
# homography estimation (normalized DLT)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Homography:
    """3x3 projective map, Frobenius-normalized with h[2][2] >= 0."""

    h: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float)
        if h.shape != (3, 3):
            raise InvariantViolation("homography must be 3x3")
        norm = np.linalg.norm(h)
        if norm == 0:
            raise DegenerateConfiguration("zero homography")
        h = h / norm
        if h[2, 2] < 0:
            h = -h
        sv = np.linalg.svd(h, compute_uv=False)
        if sv[-1] < 1e-12 * sv[0]:
            raise DegenerateConfiguration("homography is rank deficient")
        object.__setattr__(self, "h", h)


def _hartley_normalization(pts: np.ndarray) -> np.ndarray:
    centroid = pts.mean(axis=0)
    d = np.hypot(*(pts - centroid).T).mean()
    if d < 1e-300:
        raise DegenerateConfiguration("coincident points")
    s = np.sqrt(2.0) / d
    return np.array([[s, 0, -s * centroid[0]],
                     [0, s, -s * centroid[1]],
                     [0, 0, 1.0]])


def _collinearity_check(pts: np.ndarray):
    n = len(pts)
    if n > 12:
        return
    for i in range(n - 2):
        for j in range(i + 1, n - 1):
            for k in range(j + 1, n):
                v1 = pts[j] - pts[i]
                v2 = pts[k] - pts[i]
                area = abs(v1[0] * v2[1] - v1[1] * v2[0])
                scale = max(np.abs(v1).max(), np.abs(v2).max(), 1e-300)
                if area < 1e-12 * scale * scale:
                    raise DegenerateConfiguration(
                        f"source points {i}, {j}, {k} are collinear")


def estimate_homography(pairs) -> Homography:
    """Normalized direct linear transform from >= 4 point correspondences."""
    src = np.asarray([p for p, _ in pairs], dtype=float)
    dst = np.asarray([q for _, q in pairs], dtype=float)
    if len(src) < 4:
        raise DegenerateConfiguration("need at least 4 correspondences")
    _collinearity_check(src)
    T1 = _hartley_normalization(src)
    T2 = _hartley_normalization(dst)
    ones = np.ones((len(src), 1))
    sh = np.hstack([src, ones]) @ T1.T
    dh = np.hstack([dst, ones]) @ T2.T
    A = np.zeros((2 * len(src), 9))
    x, y = sh[:, 0], sh[:, 1]
    u, v = dh[:, 0], dh[:, 1]
    A[0::2, 0] = x
    A[0::2, 1] = y
    A[0::2, 2] = 1
    A[0::2, 6] = -u * x
    A[0::2, 7] = -u * y
    A[0::2, 8] = -u
    A[1::2, 3] = x
    A[1::2, 4] = y
    A[1::2, 5] = 1
    A[1::2, 6] = -v * x
    A[1::2, 7] = -v * y
    A[1::2, 8] = -v
    _, sv, Vt = np.linalg.svd(A)
    if len(sv) >= 9 and sv[7] < 1e-10 * sv[0]:
        raise DegenerateConfiguration("correspondences do not determine a homography")
    Hn = Vt[-1].reshape(3, 3)
    H = np.linalg.inv(T2) @ Hn @ T1
    return Homography(H)


def apply_homography(h: Homography, p) -> np.ndarray:
    """Projective application with division by the weight coordinate."""
    p = np.asarray(p, dtype=float)
    single = p.ndim == 1
    pts = np.atleast_2d(p)
    hom = np.hstack([pts, np.ones((len(pts), 1))]) @ h.h.T
    w = hom[:, 2]
    if np.any(np.abs(w) < 1e-14 * np.abs(hom[:, :2]).max(initial=1.0)):
        raise PointAtInfinity("transformed point has vanishing weight")
    out = hom[:, :2] / w[:, None]
    return out[0] if single else out


def reprojection_residual(h: Homography, pairs) -> float:
    """Root-mean-square reprojection error of the correspondences."""
    src = np.asarray([p for p, _ in pairs], dtype=float)
    dst = np.asarray([q for _, q in pairs], dtype=float)
    proj = apply_homography(h, src)
    return float(np.sqrt(np.mean(np.sum((proj - dst) ** 2, axis=1))))


def contour_arclength(contour: SampledCurve) -> float:
    """Full-period invariant arc length of a closed contour."""
    return arc_length(contour, 0, contour.n)
