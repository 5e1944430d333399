import numpy as np
import pytest

from centroaffine import canonical
from centroaffine.curve_core import Derivatives3, SampledCurve, signature_from_arrays


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


def random_gl2(rng, max_cond=50.0, min_cond=1.0):
    """Random nonsingular 2x2 matrix with condition number in [min, max]."""
    theta, phi = rng.uniform(0, 2 * np.pi, size=2)
    c, s = np.cos(theta), np.sin(theta)
    U = np.array([[c, -s], [s, c]])
    c, s = np.cos(phi), np.sin(phi)
    V = np.array([[c, -s], [s, c]])
    cond = np.exp(rng.uniform(np.log(min_cond + 1e-9), np.log(max_cond)))
    scale = np.exp(rng.uniform(-0.5, 0.5))
    D = np.diag([scale * np.sqrt(cond), scale / np.sqrt(cond)])
    A = U @ D @ V
    if rng.uniform() < 0.5:
        A[:, 0] *= -1.0  # negative determinant half the time
    return A


def derivatives_at(curve: canonical.AnalyticCurve, p: float) -> Derivatives3:
    arr = np.array([p])
    return Derivatives3(curve(arr, 0)[0], curve(arr, 1)[0],
                        curve(arr, 2)[0], curve(arr, 3)[0])


def analytic_signature(curve: canonical.AnalyticCurve, n: int, clip=100.0,
                       matrix=None):
    """Signature from exact derivatives, optionally after a linear map."""
    params = curve.sample_params(n)
    arrays = [curve(params, m) for m in range(4)]
    if matrix is not None:
        A = np.asarray(matrix, dtype=float)
        arrays = [a @ A.T for a in arrays]
    period = None
    if curve.closed:
        a, b = curve.param_range
        period = b - a
    return signature_from_arrays(arrays[0], arrays[1], arrays[2], arrays[3],
                                 params, curve.closed, period, clip)


def sampled_curve_from(curve: canonical.AnalyticCurve, n: int,
                       matrix=None) -> SampledCurve:
    params = curve.sample_params(n)
    pts = curve(params, 0)
    if matrix is not None:
        pts = pts @ np.asarray(matrix, dtype=float).T
    period = None
    if curve.closed:
        a, b = curve.param_range
        period = b - a
    return SampledCurve(pts, curve.closed, params, period)


def brute_force_dtw(a, b):
    """Exhaustive minimum accumulated |a_i - b_j| over monotone paths."""
    a = list(a)
    b = list(b)
    n, m = len(a), len(b)
    from functools import lru_cache

    @lru_cache(maxsize=None)
    def best(i, j):
        c = abs(a[i] - b[j])
        if i == 0 and j == 0:
            return c
        options = []
        if i > 0:
            options.append(best(i - 1, j))
        if j > 0:
            options.append(best(i, j - 1))
        if i > 0 and j > 0:
            options.append(best(i - 1, j - 1))
        return c + min(options)

    return best(n - 1, m - 1)
