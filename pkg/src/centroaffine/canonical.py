"""Analytic planar curve families with exact derivatives.

Each factory returns an :class:`AnalyticCurve` whose ``__call__`` evaluates the
position (``order=0``) or an exact parameter derivative of any order the family
supports (at least 4).  These are the curves on which constant centro-affine
curvature is known in closed form, plus a few generic shapes used by the
synthetic-data generator and the test suite.
"""

from dataclasses import dataclass, field
import math
from math import comb
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class AnalyticCurve:
    """A parametric curve p -> R^2 with exact derivatives.

    ``evaluate(p, order)`` returns an array of shape ``p.shape + (2,)``.
    """

    evaluate: Callable[[np.ndarray, int], np.ndarray]
    param_range: tuple[float, float]
    closed: bool = False
    name: str = ""

    def __call__(self, p, order: int = 0) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        return self.evaluate(p, order)

    def sample_params(self, n: int) -> np.ndarray:
        a, b = self.param_range
        return np.linspace(a, b, n, endpoint=not self.closed)


def _from_complex(zfun):
    def evaluate(p, order):
        z = zfun(p, order)
        return np.stack([z.real, z.imag], axis=-1)
    return evaluate


def unit_circle() -> AnalyticCurve:
    ev = _from_complex(lambda p, k: (1j) ** k * np.exp(1j * p))
    return AnalyticCurve(ev, (0.0, 2 * np.pi), closed=True, name="unit_circle")


def ellipse(a: float, b: float) -> AnalyticCurve:
    def evaluate(p, order):
        z = (1j) ** order * np.exp(1j * p)
        return np.stack([a * z.real, b * z.imag], axis=-1)
    return AnalyticCurve(evaluate, (0.0, 2 * np.pi), closed=True,
                         name=f"ellipse({a},{b})")


def log_spiral(phi: float, theta_range=(0.0, 2 * np.pi)) -> AnalyticCurve:
    """Logarithmic spiral rho = exp(theta * cot(phi)), 0 < phi < pi/2."""
    if not 0.0 < phi < np.pi / 2:
        raise ValueError("phi must lie in (0, pi/2)")
    c = 1.0 / np.tan(phi)
    w = c + 1j
    ev = _from_complex(lambda p, k: w ** k * np.exp(w * p))
    return AnalyticCurve(ev, tuple(theta_range), closed=False,
                         name=f"log_spiral({phi})")


def power_curve(alpha: float, x_range=(0.5, 2.0)) -> AnalyticCurve:
    """Graph y = x^alpha on x > 0, 0 < alpha < 1."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")

    def evaluate(p, order):
        if order == 0:
            return np.stack([p, p ** alpha], axis=-1)
        coeff = np.prod([alpha - j for j in range(order)])
        y = coeff * p ** (alpha - order)
        x = np.ones_like(p) if order == 1 else np.zeros_like(p)
        return np.stack([x, y], axis=-1)

    return AnalyticCurve(evaluate, tuple(x_range), closed=False,
                         name=f"power_curve({alpha})")


def x_log_x(x_range=(0.5, 2.0)) -> AnalyticCurve:
    """Graph y = x log x on x > 0."""

    def evaluate(p, order):
        if order == 0:
            return np.stack([p, p * np.log(p)], axis=-1)
        if order == 1:
            return np.stack([np.ones_like(p), np.log(p) + 1.0], axis=-1)
        # d^k/dx^k (x log x) = (-1)^k (k-2)! x^(1-k) for k >= 2
        coeff = (-1.0) ** order * float(math.factorial(order - 2))
        return np.stack([np.zeros_like(p), coeff * p ** (1 - order)], axis=-1)

    return AnalyticCurve(evaluate, tuple(x_range), closed=False, name="x_log_x")


def hyperbola(x_range=(0.5, 2.0)) -> AnalyticCurve:
    """Branch of y = 1/x on x > 0."""

    def evaluate(p, order):
        if order == 0:
            return np.stack([p, 1.0 / p], axis=-1)
        y = float(math.factorial(order)) * (-1.0) ** order * p ** (-1 - order)
        x = np.ones_like(p) if order == 1 else np.zeros_like(p)
        return np.stack([x, y], axis=-1)

    return AnalyticCurve(evaluate, tuple(x_range), closed=False, name="hyperbola")


def perturbed_circle(harmonics) -> AnalyticCurve:
    """Closed curve r(t) = 1 + sum_k amp * cos(k t + phase).

    ``harmonics`` is a sequence of ``(k, amp, phase)`` triples.  Small
    amplitudes keep the curve regular with eps = +1.
    """
    harmonics = [(int(k), float(a), float(ph)) for k, a, ph in harmonics]

    def r_derivative(p, m):
        out = np.ones_like(p) if m == 0 else np.zeros_like(p)
        for k, a, ph in harmonics:
            out = out + a * k ** m * np.cos(k * p + ph + m * np.pi / 2)
        return out

    def zfun(p, order):
        # z = r(t) e^{it};  z^(n) = e^{it} sum_j C(n,j) i^j r^(n-j)
        acc = np.zeros_like(p, dtype=complex)
        for j in range(order + 1):
            acc = acc + comb(order, j) * (1j) ** j * r_derivative(p, order - j)
        return acc * np.exp(1j * p)

    return AnalyticCurve(_from_complex(zfun), (0.0, 2 * np.pi), closed=True,
                         name="perturbed_circle")


def transformed(curve: AnalyticCurve, matrix, translation=None) -> AnalyticCurve:
    """Apply a linear map (plus optional translation of the position only)."""
    A = np.asarray(matrix, dtype=float)
    t = None if translation is None else np.asarray(translation, dtype=float)

    def evaluate(p, order):
        v = curve(p, order) @ A.T
        if order == 0 and t is not None:
            v = v + t
        return v

    return AnalyticCurve(evaluate, curve.param_range, curve.closed,
                         name=curve.name + "+linear")
