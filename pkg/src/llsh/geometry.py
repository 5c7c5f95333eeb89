"""High-dimensional ball, cap, and two-ball-union volumes.

All volume arithmetic is done in log space internally: for dimensions in
the hundreds, unit-ball volumes and k-th powers of radii individually
overflow or underflow doubles even when their product is moderate.  The
plain-real API exponentiates at the end; ``*_log`` variants return the
log-volume directly for use inside exponents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc, gammaln, logsumexp

from .errors import InvalidArgumentError

# Relative tolerance for the containment/disjointness regime decisions;
# keeps degenerate cap geometry (t/r barely outside [-1, 1]) out of the
# lens formula.
_REGIME_RTOL = 1e-12


def log_unit_ball_volume(k: int) -> float:
    """log of the volume of the k-dimensional unit ball."""
    if k < 1:
        raise InvalidArgumentError(f"dimension must be >= 1, got {k}")
    return 0.5 * k * math.log(math.pi) - gammaln(0.5 * k + 1.0)


@dataclass(frozen=True)
class DimensionConstants:
    """Per-dimension normalization constants.

    Attributes:
        k: ambient dimension.
        v_unit: volume of the unit k-ball.
        tau: sqrt(k) * v_unit**(1/k); tends to sqrt(2*pi*e) for large k.
        r_unit_volume: radius of the k-ball of volume 1.
    """

    k: int
    v_unit: float
    tau: float
    r_unit_volume: float


def dimension_constants(k: int) -> DimensionConstants:
    log_vb = log_unit_ball_volume(k)
    return DimensionConstants(
        k=k,
        v_unit=math.exp(log_vb),
        tau=math.sqrt(k) * math.exp(log_vb / k),
        r_unit_volume=math.exp(-log_vb / k),
    )


def log_ball_volume(k: int, r: float) -> float:
    """log(V_B * r**k) for a k-ball of radius r; -inf for r = 0."""
    if k < 1:
        raise InvalidArgumentError(f"dimension must be >= 1, got {k}")
    if r < 0:
        raise InvalidArgumentError(f"radius must be nonnegative, got {r}")
    if r == 0.0:
        return -math.inf
    return log_unit_ball_volume(k) + k * math.log(r)


def ball_volume(k: int, r: float) -> float:
    """Volume of the k-dimensional ball of radius r."""
    return math.exp(log_ball_volume(k, r))


def ball_radius_for_volume(k: int, volume: float) -> float:
    """Radius of the k-ball of the given volume."""
    if volume < 0:
        raise InvalidArgumentError(f"volume must be nonnegative, got {volume}")
    if volume == 0.0:
        return 0.0
    return math.exp((math.log(volume) - log_unit_ball_volume(k)) / k)


def cap_fraction(k: int, t_over_r: float) -> float:
    """Fraction of a k-ball beyond the hyperplane at signed distance t.

    t_over_r is the plane's signed distance from the center divided by
    the radius.  fraction(0) = 1/2, fraction(1) = 0, fraction(-1) = 1.
    Evaluated through the regularized incomplete beta function.
    """
    if k < 1:
        raise InvalidArgumentError(f"dimension must be >= 1, got {k}")
    if not -1.0 <= t_over_r <= 1.0:
        raise InvalidArgumentError(f"t/r must lie in [-1, 1], got {t_over_r}")
    x = abs(t_over_r)
    if x == 1.0:
        frac = 0.0
    else:
        frac = 0.5 * float(betainc(0.5 * (k + 1), 0.5, 1.0 - x * x))
    return frac if t_over_r >= 0 else 1.0 - frac


def union_volume_log(k: int, r1: float, r2: float, d: float) -> float:
    """log-volume of the union of two k-balls with center distance d."""
    if r1 < 0 or r2 < 0 or d < 0:
        raise InvalidArgumentError(
            f"radii and distance must be nonnegative, got r1={r1}, r2={r2}, d={d}"
        )
    lv1 = log_ball_volume(k, r1)
    lv2 = log_ball_volume(k, r2)
    tol = _REGIME_RTOL * (r1 + r2 + d)
    if d + min(r1, r2) <= max(r1, r2) + tol:
        return max(lv1, lv2)
    if d >= r1 + r2 - tol:
        return float(logsumexp([lv1, lv2]))
    # Proper lens intersection: cap heights from the radical plane.
    t1 = (d * d + r1 * r1 - r2 * r2) / (2.0 * d)
    t2 = (d * d + r2 * r2 - r1 * r1) / (2.0 * d)
    f1 = cap_fraction(k, min(1.0, max(-1.0, t1 / r1)))
    f2 = cap_fraction(k, min(1.0, max(-1.0, t2 / r2)))
    lse = float(logsumexp([lv1, lv2]))
    # Intersection never exceeds the smaller ball, so the ratio is <= 1/2.
    ratio = math.exp(lv1 - lse) * f1 + math.exp(lv2 - lse) * f2
    return lse + math.log1p(-ratio)


def union_volume(k: int, r1: float, r2: float, d: float) -> float:
    """Volume of the union of two k-balls (radii r1, r2, center distance d).

    Handles containment (returns the larger ball) and disjointness
    (returns the sum) exactly; otherwise inclusion-exclusion with the
    two-cap lens formula.
    """
    lv = union_volume_log(k, r1, r2, d)
    return 0.0 if lv == -math.inf else math.exp(lv)


def pair_union_volume(k: int, x: np.ndarray, y: np.ndarray) -> float:
    """Volume of B_x union B_{x+y}: balls around x and x+y through the origin.

    The balls have radii |x| and |x+y| and their centers are |y| apart.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return union_volume(
        k,
        float(np.linalg.norm(x)),
        float(np.linalg.norm(x + y)),
        float(np.linalg.norm(y)),
    )
