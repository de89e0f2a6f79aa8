"""Reference generation and load-path geometry.

Two generators ship: a constant set-point and a semicircular arc in the
(x, l) plane that lifts the load over an obstacle and returns to the same
cable length. Both supply analytic first and second derivatives, which the
control law consumes as feedforward. All shipped references keep the
desired swing angle at zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from .errors import DomainError

ReferenceFn = Callable[[float], "Reference"]


@dataclass(frozen=True)
class Reference:
    """Desired positions with first and second time derivatives."""

    x_d: float
    l_d: float
    theta_d: float = 0.0
    x_dot_d: float = 0.0
    l_dot_d: float = 0.0
    theta_dot_d: float = 0.0
    x_ddot_d: float = 0.0
    l_ddot_d: float = 0.0
    theta_ddot_d: float = 0.0


@dataclass(frozen=True)
class ObstacleSpec:
    """Axis-aligned obstacle rectangle in the rail frame.

    Horizontal coordinate is trolley travel; vertical coordinate is depth
    below the rail (same frame as the load position), so the rectangle
    spans depths [top_depth, top_depth + height]. ``top_clearance`` is the
    minimum gap the load path must keep from the rectangle on all sides.
    """

    x_center: float
    top_depth: float
    width: float
    height: float
    top_clearance: float

    def __post_init__(self):
        for name in ("width", "height", "top_clearance"):
            if not getattr(self, name) > 0.0:
                raise DomainError(f"obstacle {name} must be positive")


def setpoint(target: Tuple[float, float], t: float) -> Reference:
    """Constant reference at (x*, l*) with all derivatives zero."""
    x_target, l_target = target
    if l_target <= 0.0:
        raise DomainError(
            f"set-point cable length must be positive, got {l_target}"
        )
    return Reference(x_d=float(x_target), l_d=float(l_target))


def _quintic_progress(t: float, duration: float):
    """Smooth time law s(t): s(0)=0, s(T)=1, zero end velocity/acceleration."""
    tau = t / duration
    sigma = tau ** 3 * (10.0 + tau * (-15.0 + 6.0 * tau))
    sigma_d = 30.0 * tau ** 2 * (1.0 - tau) ** 2 / duration
    sigma_dd = 60.0 * tau * (1.0 - tau) * (1.0 - 2.0 * tau) / duration ** 2
    return sigma, sigma_d, sigma_dd


def semicircle(start: Tuple[float, float], end: Tuple[float, float],
               duration: float, t: float) -> Reference:
    """Semicircular lift-over arc in the (x_d, l_d) plane.

    The arc of diameter |x1 - x0| is centered at ((x0+x1)/2, l0); the cable
    shortens toward the apex l0 - |x1-x0|/2 and returns to l0 = l1. Progress
    along the arc follows the quintic time law, so position, velocity, and
    acceleration are continuous everywhere, including the splice onto the
    final set-point hold at t >= T.
    """
    x0, l0 = start
    x1, l1 = end
    if duration <= 0.0:
        raise DomainError(f"arc duration must be positive, got {duration}")
    if x1 == x0:
        raise DomainError("degenerate arc: start and end trolley positions "
                          "coincide")
    if abs(l1 - l0) > 1e-9 * max(1.0, abs(l0)):
        raise DomainError(
            f"arc must return to the same cable length, got l0={l0}, l1={l1}"
        )
    radius = 0.5 * abs(x1 - x0)
    if l0 - radius <= 0.0:
        raise DomainError(
            f"arc apex would need cable length {l0 - radius:.4g} m <= 0"
        )
    if t <= 0.0:
        return Reference(x_d=float(x0), l_d=float(l0))
    if t >= duration:
        return Reference(x_d=float(x1), l_d=float(l1))
    center = 0.5 * (x0 + x1)
    direction = math.copysign(1.0, x1 - x0)
    sigma, sigma_d, sigma_dd = _quintic_progress(t, duration)
    ang = math.pi * sigma
    ang_d = math.pi * sigma_d
    ang_dd = math.pi * sigma_dd
    sin_a, cos_a = math.sin(ang), math.cos(ang)
    return Reference(
        x_d=center - direction * radius * cos_a,
        l_d=l0 - radius * sin_a,
        x_dot_d=direction * radius * sin_a * ang_d,
        l_dot_d=-radius * cos_a * ang_d,
        x_ddot_d=direction * radius * (cos_a * ang_d ** 2 + sin_a * ang_dd),
        l_ddot_d=radius * (sin_a * ang_d ** 2 - cos_a * ang_dd),
    )


def make_setpoint(x_target: float, l_target: float) -> ReferenceFn:
    """Bind a set-point target into a callable reference of time."""
    setpoint((x_target, l_target), 0.0)  # validate once
    return lambda t: setpoint((x_target, l_target), t)


def make_semicircle(start: Tuple[float, float], end: Tuple[float, float],
                    duration: float) -> ReferenceFn:
    """Bind semicircle parameters into a callable reference of time."""
    semicircle(start, end, duration, 0.0)  # validate once
    return lambda t: semicircle(start, end, duration, t)


def load_position(x: float, l: float, theta: float) -> Tuple[float, float]:
    """Container position in the rail frame: (horizontal, depth below rail)."""
    return x + l * math.sin(theta), l * math.cos(theta)


@dataclass(frozen=True)
class ClearanceReport:
    passed: bool
    min_gap: float      # smallest signed gap after subtracting the clearance
    worst_index: int    # path sample achieving the minimum


def clearance_check(path: np.ndarray,
                    obstacle: ObstacleSpec) -> ClearanceReport:
    """Geometric check of a sampled load path against the obstacle.

    ``path`` is an (N, 2) array of load positions (horizontal, depth).
    The signed distance to the rectangle is positive outside and equals
    minus the penetration depth inside; the check passes iff the distance
    exceeds ``top_clearance`` at every sample.
    """
    path = np.asarray(path, dtype=float)
    if path.ndim != 2 or path.shape[1] != 2 or path.shape[0] == 0:
        raise DomainError("path must be a nonempty (N, 2) array")
    px, pz = path[:, 0], path[:, 1]
    left = obstacle.x_center - 0.5 * obstacle.width
    right = obstacle.x_center + 0.5 * obstacle.width
    top = obstacle.top_depth
    bottom = obstacle.top_depth + obstacle.height
    dx = np.maximum(left - px, px - right)
    dz = np.maximum(top - pz, pz - bottom)
    outside = np.hypot(np.maximum(dx, 0.0), np.maximum(dz, 0.0))
    inside = np.minimum(np.maximum(dx, dz), 0.0)
    signed = np.where((dx > 0.0) | (dz > 0.0), outside, inside)
    gaps = signed - obstacle.top_clearance
    worst = int(np.argmin(gaps))
    min_gap = float(gaps[worst])
    return ClearanceReport(min_gap > 0.0, min_gap, worst)
