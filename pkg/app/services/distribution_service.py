"""Freeze-time distribution F, the kernel phi, and quadrature checks of the fixed point."""

import math
from typing import Callable, Optional, Union

import numpy as np
from scipy.integrate import trapezoid

from app.core.exceptions import PreconditionError, ValidationError
from app.core.logging import get_logger
from app.schemas.common import INF

logger = get_logger(__name__)

LN2 = math.log(2.0)

# Mass of F at infinity.
DEFECT = 1.0 - LN2

# 1 - 2 * integral_{1/2}^{1} (1 - s) ln(2s) ds, from the antiderivatives
# s ln(2s) - s and (s^2 / 2) ln(2s) - s^2 / 4.
DECAY_CONSTANT_EXACT = 1.0 - 2.0 * ((LN2 - 0.5) - (LN2 / 2.0 - 3.0 / 16.0))

MIN_STEPS = 100

ArrayLike = Union[float, np.ndarray]
CDF = Callable[[np.ndarray], np.ndarray]


def _as_output(values: np.ndarray, like: ArrayLike) -> ArrayLike:
    if np.ndim(like) == 0:
        return float(values)
    return values


def cdf_F(t: ArrayLike) -> ArrayLike:
    """Distribution function F of the directed freeze time.

    0 for t <= 1/2, ln(2t) on (1/2, 1], ln 2 on (1, inf) and 1 at inf.
    Accepts scalars or numpy arrays.
    """
    arr = np.asarray(t, dtype=float)
    finite_part = np.log(2.0 * np.clip(arr, 0.5, 1.0))
    values = np.where(np.isposinf(arr), 1.0, finite_part)
    return _as_output(values, t)


def cdf_zero(t: ArrayLike) -> ArrayLike:
    """The degenerate solution of the recursion: all mass at infinity."""
    arr = np.asarray(t, dtype=float)
    values = np.where(np.isposinf(arr), 1.0, 0.0)
    return _as_output(values, t)


def aldous_G(t: ArrayLike) -> ArrayLike:
    """Directed freeze-time distribution of the edge model with frozen boundaries.

    Reference curve for the lower bound on F_n: 1 - 1/(2t) on [1/2, 1].
    """
    arr = np.asarray(t, dtype=float)
    clipped = np.clip(arr, 0.5, 1.0)
    values = np.where(np.isposinf(arr), 1.0, 1.0 - 1.0 / (2.0 * clipped))
    return _as_output(values, t)


def freeze_time_from_uniform(v: ArrayLike) -> ArrayLike:
    """Inverse transform for F: V <= ln 2 maps to exp(V)/2, anything larger to inf."""
    arr = np.asarray(v, dtype=float)
    values = np.where(arr <= LN2, np.exp(np.minimum(arr, LN2)) / 2.0, INF)
    return _as_output(values, v)


def sample_F(rng: np.random.Generator, size: Optional[Union[int, tuple]] = None) -> ArrayLike:
    """Draw freeze times distributed per F.

    Args:
        rng: Random generator owned by the caller
        size: Output shape (None for a single float)

    Returns:
        Values in (1/2, 1] or inf; inf with probability 1 - ln 2
    """
    return freeze_time_from_uniform(rng.random(size))


def phi(x: float, y: float, z: float) -> float:
    """Kernel of the freeze-time recursion.

    Returns x if x >= z, y if x < z <= y, inf otherwise. The result is one of
    the arguments (or inf) unchanged.

    Raises:
        PreconditionError: If x > y
    """
    if x > y:
        raise PreconditionError("phi", "requires x <= y", details={"x": x, "y": y})
    if x >= z:
        return x
    if z <= y:
        return y
    return INF


def phi_array(x: np.ndarray, y: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Elementwise phi; callers pass elementwise min and max as x and y."""
    return np.where(x >= z, x, np.where(z <= y, y, INF))


def phi_of_pair(a: np.ndarray, b: np.ndarray, z: np.ndarray) -> np.ndarray:
    """phi(min(a, b), max(a, b), z), elementwise."""
    return phi_array(np.minimum(a, b), np.maximum(a, b), z)


def _grid(lower: float, upper: float, steps: int) -> np.ndarray:
    if steps < MIN_STEPS:
        raise ValidationError(
            f"Quadrature needs at least {MIN_STEPS} steps",
            details={"steps": steps},
        )
    return np.linspace(lower, upper, steps + 1)


def _evaluate(cdf: CDF, points: np.ndarray) -> np.ndarray:
    values = np.asarray(cdf(points), dtype=float)
    if values.shape != points.shape:
        values = np.vectorize(cdf, otypes=[float])(points)
    return values


def fixed_point_residual(t: float, cdf: CDF, steps: int) -> float:
    """Signed residual RHS(t) - cdf(t) of the integral form of the fixed-point equation.

    RHS(t) = t[2F(t) - F(t)^2] + 2F(t) int_0^t F - int_0^t (2F + F^2),
    integrated with the trapezoidal rule on ``steps`` intervals.

    Args:
        t: Time in [1/2, 1]
        cdf: Candidate distribution function, vectorised over numpy arrays
        steps: Number of quadrature intervals (>= 100)

    Returns:
        RHS(t) - cdf(t)
    """
    if not 0.5 <= t <= 1.0:
        raise ValidationError("Residual is defined for t in [1/2, 1]", details={"t": t})

    s = _grid(0.0, t, steps)
    f_s = _evaluate(cdf, s)
    f_t = float(_evaluate(cdf, np.array([t]))[0])

    int_f = trapezoid(f_s, s)
    int_tail = trapezoid(2.0 * f_s + f_s**2, s)

    rhs = t * (2.0 * f_t - f_t**2) + 2.0 * f_t * int_f - int_tail
    return float(rhs - f_t)


def decay_constant(steps: int) -> float:
    """Constant A = 1 - 2 int_{1/2}^1 (1 - s) ln(2s) ds of the correlation decay bound."""
    s = _grid(0.5, 1.0, steps)
    integral = trapezoid((1.0 - s) * np.log(2.0 * s), s)
    return float(1.0 - 2.0 * integral)


def single_site_green_prob(t: float, steps: int) -> float:
    """P(v is green at time t) = int_0^t [F(u) + 1 - F(t)]^3 du.

    Reduces to t for t <= 1/2 and to (3/2) ln^2 2 - 1/2 at t = 1.
    """
    if not 0.0 <= t <= 1.0:
        raise ValidationError("Green probability is defined for t in [0, 1]", details={"t": t})
    if t == 0.0:
        return 0.0

    u = _grid(0.0, t, steps)
    not_frozen_by_t = 1.0 - cdf_F(t)
    integrand = (cdf_F(u) + not_frozen_by_t) ** 3
    return float(trapezoid(integrand, u))


def phi_fixed_point_sample(rng: np.random.Generator, n: int) -> np.ndarray:
    """n draws of phi(min(Y1, Y2), max(Y1, Y2), U) with Y1, Y2 ~ F and U uniform."""
    y1 = sample_F(rng, n)
    y2 = sample_F(rng, n)
    u = rng.random(n)
    return phi_of_pair(y1, y2, u)


def ks_distance_to_F(samples: np.ndarray) -> float:
    """Kolmogorov-Smirnov distance between an empirical sample and F.

    The atom of F at infinity is handled explicitly: on (1, inf) F equals
    ln 2 while the empirical CDF equals the fraction of finite samples.
    """
    n = samples.size
    finite = np.sort(samples[np.isfinite(samples)])
    k = finite.size
    if k == 0:
        return float(LN2)

    f_vals = np.asarray(cdf_F(finite))
    upper = np.arange(1, k + 1) / n - f_vals
    lower = f_vals - np.arange(0, k) / n
    plateau = abs(k / n - LN2)

    distance = max(float(upper.max()), float(lower.max()), plateau)
    logger.debug("KS distance computed", n=n, finite=k, distance=distance)
    return distance
