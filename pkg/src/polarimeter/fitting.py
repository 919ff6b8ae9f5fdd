"""
Least-squares sinusoid and straight-line fits.

The oscillation model is ``y = C + A cos(k x + phi0)``.  For fixed ``k`` it is
linear in ``(C, A cos phi0, -A sin phi0)``, so ``k`` is found by scanning the
profile chi-square on a grid, refining with Brent's method, and polishing
all four parameters with Gauss-Newton steps.
"""
from dataclasses import dataclass
import math
from typing import Optional

import numpy as np
from scipy import optimize

from .errors import NoOscillationError, PreconditionError

MIN_POINTS = 8
MIN_PERIODS = 0.75


@dataclass(frozen=True)
class FitResult:
    offset: float
    amplitude: float
    k: float
    phase: float
    offset_err: float
    amplitude_err: float
    k_err: float
    phase_err: float
    reduced_chi2: float
    n_points: int
    covariance: np.ndarray

    @property
    def contrast(self):
        return self.amplitude / self.offset

    def model(self, x):
        return self.offset + self.amplitude * np.cos(self.k * np.asarray(x) + self.phase)

    def phase_at(self, x):
        """Oscillation phase ``k x + phi0`` and its standard error at abscissa ``x``."""
        # covariance order: C, a, b, k with a = A cos phi0, b = -A sin phi0
        jac = self._phase_jacobian()
        jac = jac + np.array([0.0, 0.0, 0.0, x])
        return self.k * x + self.phase, math.sqrt(max(jac @ self.covariance @ jac, 0.0))

    def _phase_jacobian(self):
        a = self.amplitude * math.cos(self.phase)
        b = -self.amplitude * math.sin(self.phase)
        r2 = a * a + b * b
        return np.array([0.0, b / r2, -a / r2, 0.0])

    def as_dict(self):
        return {
            "offset": self.offset, "offset_err": self.offset_err,
            "amplitude": self.amplitude, "amplitude_err": self.amplitude_err,
            "k": self.k, "k_err": self.k_err,
            "phase": self.phase, "phase_err": self.phase_err,
            "contrast": self.contrast,
            "reduced_chi2": self.reduced_chi2,
            "n_points": self.n_points,
        }


def poisson_weights(counts):
    """Inverse variances ``1 / max(counts, 1)``."""
    return 1.0 / np.maximum(np.asarray(counts, dtype=float), 1.0)


def _linear_solve(x, y, sw, k):
    design = np.column_stack([np.ones_like(x), np.cos(k * x), np.sin(k * x)])
    coef, *_ = np.linalg.lstsq(design * sw[:, None], y * sw, rcond=None)
    resid = (y - design @ coef) * sw
    return coef, float(resid @ resid)


def _wrap(phase):
    w = math.remainder(phase, 2 * math.pi)
    return math.pi if w == -math.pi else w


def fit_sinusoid(xs, ys, weights=None, k_range=None):
    """
    Fit ``C + A cos(k x + phi0)``.

    Parameters
    ----------
    xs, ys : array_like
        Abscissae (m) and counts or intensities.
    weights : array_like, optional
        Inverse variances.  Without weights the covariance is scaled by the
        reduced chi-square; with weights it is taken as absolute.
    k_range : (float, float), optional
        Search interval for ``k`` in rad/m.  Defaults to ``0.75`` periods over
        the span up to the Nyquist limit of the median spacing.

    Raises
    ------
    NoOscillationError
        If the amplitude is within two standard errors of zero.
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise PreconditionError("xs and ys must be 1-d arrays of equal length")
    n = len(x)
    if n < MIN_POINTS:
        raise PreconditionError(f"need at least {MIN_POINTS} points, got {n}")
    span = float(x.max() - x.min())
    if span <= 0:
        raise PreconditionError("xs must not all be equal")
    absolute = weights is not None
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != x.shape or np.any(w <= 0):
        raise PreconditionError("weights must be positive and match xs")
    sw = np.sqrt(w)

    k_floor = 2 * math.pi * MIN_PERIODS / span
    if k_range is None:
        dx = float(np.median(np.diff(np.sort(x))))
        k_lo, k_hi = k_floor, math.pi / dx
    else:
        k_lo, k_hi = map(float, k_range)
        if k_lo < k_floor * (1 - 1e-12):
            raise PreconditionError(
                f"span {span:.4g} covers fewer than {MIN_PERIODS} periods at k = {k_lo:.4g} rad/m")
    if not k_hi > k_lo:
        raise PreconditionError("empty k search range")

    dk = 2 * math.pi / (4 * span)
    grid = np.arange(k_lo, k_hi + 0.5 * dk, dk)
    chi = np.array([_linear_solve(x, y, sw, k)[1] for k in grid])
    i = int(np.argmin(chi))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    if hi > lo:
        res = optimize.minimize_scalar(lambda k: _linear_solve(x, y, sw, k)[1], bounds=(lo, hi),
                                       method="bounded", options={"xatol": 1e-12 * hi})
        k = float(res.x)
    else:
        k = float(grid[i])
    (c, a, b), _ = _linear_solve(x, y, sw, k)
    theta = np.array([c, a, b, k])

    for _ in range(20):
        jac = _jacobian(theta, x)
        resid = y - _model(theta, x)
        step, *_ = np.linalg.lstsq(jac * sw[:, None], resid * sw, rcond=None)
        theta = theta + step
        if abs(step[3]) <= 1e-15 * abs(theta[3]) and np.all(np.abs(step[:3]) <= 1e-15 * (np.abs(theta[:3]) + 1e-300)):
            break

    resid = (y - _model(theta, x)) * sw
    chi2 = float(resid @ resid)
    dof = max(n - 4, 1)
    red = chi2 / dof
    jac = _jacobian(theta, x) * sw[:, None]
    try:
        cov = np.linalg.inv(jac.T @ jac)
    except np.linalg.LinAlgError:
        cov = np.full((4, 4), np.inf)
    if not absolute:
        cov = cov * red

    c, a, b, k = theta
    amp = math.hypot(a, b)
    scale = max(abs(c), float(np.max(np.abs(y))), 1e-300)
    if amp <= 1e-12 * scale:
        raise NoOscillationError("no oscillation detected: fitted amplitude is zero")
    ja = np.array([0.0, a / amp, b / amp, 0.0])
    amp_err = math.sqrt(max(ja @ cov @ ja, 0.0))
    if amp <= 2 * amp_err:
        raise NoOscillationError(
            f"no oscillation detected: amplitude {amp:.4g} within 2 sigma ({amp_err:.3g}) of zero")
    if k < 0:
        k, b = -k, -b
        theta = np.array([c, a, b, k])
        flip = np.diag([1.0, 1.0, -1.0, -1.0])
        cov = flip @ cov @ flip
    phase = _wrap(math.atan2(-b, a))
    jp = np.array([0.0, b / amp ** 2, -a / amp ** 2, 0.0])
    return FitResult(
        offset=float(c), amplitude=amp, k=float(k), phase=phase,
        offset_err=math.sqrt(max(cov[0, 0], 0.0)), amplitude_err=amp_err,
        k_err=math.sqrt(max(cov[3, 3], 0.0)), phase_err=math.sqrt(max(jp @ cov @ jp, 0.0)),
        reduced_chi2=red, n_points=n, covariance=cov,
    )


def _model(theta, x):
    c, a, b, k = theta
    return c + a * np.cos(k * x) + b * np.sin(k * x)


def _jacobian(theta, x):
    _, a, b, k = theta
    ck, sk = np.cos(k * x), np.sin(k * x)
    return np.column_stack([np.ones_like(x), ck, sk, x * (b * ck - a * sk)])


def extract_period(fit):
    """Period ``2 pi / k`` (m) and its first-order standard error."""
    if not fit.k > 0:
        raise PreconditionError("period needs k > 0")
    period = 2 * math.pi / fit.k
    return period, period * fit.k_err / fit.k


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    slope_err: float
    intercept_err: float
    residual_norm: float
    reduced_chi2: float


def linear_fit(xs, ys, y_errors: Optional[np.ndarray] = None):
    """
    Weighted straight line ``y = slope x + intercept``.

    With ``y_errors`` the parameter errors are absolute; without, they are
    scaled by the residual variance.
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if len(x) < 3 or x.shape != y.shape:
        raise PreconditionError("linear fit needs at least 3 points and matching arrays")
    if np.ptp(x) == 0:
        raise PreconditionError("linear fit needs distinct abscissae")
    sigma = np.ones_like(x) if y_errors is None else np.asarray(y_errors, dtype=float)
    if np.any(sigma <= 0):
        raise PreconditionError("y_errors must be positive")
    sw = 1.0 / sigma
    design = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(design * sw[:, None], y * sw, rcond=None)
    resid = (y - design @ coef) * sw
    chi2 = float(resid @ resid)
    red = chi2 / max(len(x) - 2, 1)
    cov = np.linalg.inv((design * sw[:, None]).T @ (design * sw[:, None]))
    if y_errors is None:
        cov = cov * red
    return LinearFit(float(coef[0]), float(coef[1]), math.sqrt(cov[0, 0]), math.sqrt(cov[1, 1]),
                     float(np.linalg.norm(y - design @ coef)), red)
