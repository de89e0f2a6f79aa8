"""Planar overhead-crane plant model.

Generalized coordinates are q = (x, l, theta): trolley travel along the
rail, cable length, and load swing angle. Forces act on the trolley (u_x)
and the cables (u_l); the swing angle is unactuated. The model is

    M(q) qdd = h(q, qd) + [u_x + f_x, u_l + f_l, 0]

with M(q) the configuration-dependent mass matrix, h the combined
Coriolis/centrifugal/gravity vector, and f_x, f_l the plant-only viscous
friction and external disturbance forces on the two actuated coordinates.
Positive l points down from the rail, so an unforced cable free-falls at g.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, IntegrationError, SingularMatrixError

# Externally supplied force as a function of time [N].
ForceFn = Callable[[float], float]


@dataclass(frozen=True)
class CraneState:
    """Full plant state: positions, velocities, and simulation time.

    Plain value container; physical validity (l > 0, finiteness) is
    enforced by the operations that consume or produce states.
    """

    x: float          # trolley position [m]
    l: float          # cable length [m]
    theta: float      # swing angle [rad]
    x_dot: float      # [m/s]
    l_dot: float      # [m/s]
    theta_dot: float  # [rad/s]
    t: float = 0.0    # simulation time [s]

    def as_array(self) -> np.ndarray:
        """State as the 6-vector (x, l, theta, x_dot, l_dot, theta_dot)."""
        return np.array(
            [self.x, self.l, self.theta, self.x_dot, self.l_dot, self.theta_dot]
        )

    @classmethod
    def from_array(cls, y, t: float = 0.0) -> "CraneState":
        return cls(y[0], y[1], y[2], y[3], y[4], y[5], t)

    def is_finite(self) -> bool:
        return all(
            math.isfinite(v)
            for v in (self.x, self.l, self.theta, self.x_dot, self.l_dot,
                      self.theta_dot, self.t)
        )


@dataclass(frozen=True)
class CraneParams:
    """Plant parameters.

    Friction and disturbance terms model the plant only; a controller's
    nominal model is obtained with :meth:`without_unmodeled`.
    """

    M: float                                  # trolley mass [kg]
    m: float                                  # container mass [kg]
    g: float = 9.81                           # gravity [m/s^2]
    friction_viscous_x: float = 0.0           # trolley viscous coeff [N s/m]
    friction_viscous_l: float = 0.0           # cable viscous coeff [N s/m]
    disturbance_x: Optional[ForceFn] = None   # external trolley force [N]
    disturbance_l: Optional[ForceFn] = None   # external cable force [N]

    def __post_init__(self):
        if not (self.M > 0.0 and self.m > 0.0 and self.g > 0.0):
            raise DomainError(
                f"masses and gravity must be positive, got M={self.M}, "
                f"m={self.m}, g={self.g}"
            )
        if self.friction_viscous_x < 0.0 or self.friction_viscous_l < 0.0:
            raise DomainError("viscous friction coefficients must be >= 0")

    def without_unmodeled(self) -> "CraneParams":
        """Copy with friction and disturbances stripped (controller model)."""
        return replace(
            self,
            friction_viscous_x=0.0,
            friction_viscous_l=0.0,
            disturbance_x=None,
            disturbance_l=None,
        )


@dataclass(frozen=True)
class ControlInput:
    """Forces on the two actuated coordinates."""

    u_x: float  # trolley force [N]
    u_l: float  # cable force [N]

    def clamped(self, u_max: float) -> "ControlInput":
        """Symmetric saturation |u| <= u_max on both channels."""
        return ControlInput(
            min(max(self.u_x, -u_max), u_max),
            min(max(self.u_l, -u_max), u_max),
        )


def mass_matrix(state: CraneState, params: CraneParams) -> np.ndarray:
    """Configuration-dependent 3x3 mass matrix in row order (x, l, theta).

    Symmetric by construction; det = M * m^2 * l^2, so it is positive
    definite for any valid parameters and l > 0.
    """
    l = state.l
    if l <= 0.0:
        raise DomainError(f"cable length must be positive, got l={l}")
    m = params.m
    sin_t, cos_t = math.sin(state.theta), math.cos(state.theta)
    m_sin = m * sin_t
    m_l_cos = m * l * cos_t
    return np.array(
        [
            [params.M + m, m_sin, m_l_cos],
            [m_sin, m, 0.0],
            [m_l_cos, 0.0, m * l * l],
        ]
    )


def bias_vector(state: CraneState, params: CraneParams) -> np.ndarray:
    """Coriolis/centrifugal/gravity force vector (x, l, theta rows)."""
    m, g = params.m, params.g
    l, ld, td = state.l, state.l_dot, state.theta_dot
    sin_t, cos_t = math.sin(state.theta), math.cos(state.theta)
    return np.array(
        [
            m * td * (td * l * sin_t - 2.0 * ld * cos_t),
            m * (l * td * td + g * cos_t),
            -m * l * (2.0 * ld * td + g * sin_t),
        ]
    )


def solve3(a: np.ndarray, b: np.ndarray, pivot_tol: float = 1e-12) -> np.ndarray:
    """Solve a 3x3 system by Gaussian elimination with partial pivoting.

    No inverse is formed. Raises :class:`SingularMatrixError` when a pivot
    magnitude falls below ``pivot_tol``.
    """
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    for k in range(2):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if abs(a[p, k]) < pivot_tol:
            raise SingularMatrixError(
                f"pivot {abs(a[p, k]):.3e} below tolerance {pivot_tol:.1e} "
                f"in column {k}"
            )
        if p != k:
            a[[k, p]] = a[[p, k]]
            b[[k, p]] = b[[p, k]]
        for i in range(k + 1, 3):
            f = a[i, k] / a[k, k]
            if f != 0.0:
                a[i, k + 1:] -= f * a[k, k + 1:]
                b[i] -= f * b[k]
    if abs(a[2, 2]) < pivot_tol:
        raise SingularMatrixError(
            f"pivot {abs(a[2, 2]):.3e} below tolerance {pivot_tol:.1e} "
            f"in column 2"
        )
    x = np.empty(3)
    x[2] = b[2] / a[2, 2]
    x[1] = (b[1] - a[1, 2] * x[2]) / a[1, 1]
    x[0] = (b[0] - a[0, 1] * x[1] - a[0, 2] * x[2]) / a[0, 0]
    return x


def _generalized_forces(state: CraneState, u: ControlInput,
                        params: CraneParams) -> np.ndarray:
    """Actuation plus plant-only friction/disturbance; theta row is zero."""
    f_x = u.u_x - params.friction_viscous_x * state.x_dot
    f_l = u.u_l - params.friction_viscous_l * state.l_dot
    if params.disturbance_x is not None:
        f_x += params.disturbance_x(state.t)
    if params.disturbance_l is not None:
        f_l += params.disturbance_l(state.t)
    return np.array([f_x, f_l, 0.0])


def forward_dynamics(state: CraneState, u: ControlInput,
                     params: CraneParams) -> np.ndarray:
    """Accelerations (xdd, ldd, thetadd) from a direct 3x3 solve.

    The third generalized force component is identically zero: the swing
    angle is unactuated.
    """
    rhs = bias_vector(state, params) + _generalized_forces(state, u, params)
    return solve3(mass_matrix(state, params), rhs)


def _state_derivative(y: np.ndarray, t: float, u: ControlInput,
                      params: CraneParams) -> np.ndarray:
    if y[1] <= 0.0:
        raise IntegrationError(
            f"cable length reached {y[1]:.6g} m during a step at t={t:.6g} s"
        )
    qdd = forward_dynamics(CraneState.from_array(y, t), u, params)
    return np.concatenate((y[3:], qdd))


def integrate_step(state: CraneState, u: ControlInput, params: CraneParams,
                   dt: float) -> CraneState:
    """Advance the plant one classical RK4 step under zero-order-hold u.

    Raises :class:`IntegrationError` when the step drives the cable length
    to zero or produces a non-finite state; propagates
    :class:`SingularMatrixError` from the inner solves.
    """
    if dt <= 0.0:
        raise DomainError(f"dt must be positive, got {dt}")
    y0 = state.as_array()
    t0 = state.t
    k1 = _state_derivative(y0, t0, u, params)
    k2 = _state_derivative(y0 + 0.5 * dt * k1, t0 + 0.5 * dt, u, params)
    k3 = _state_derivative(y0 + 0.5 * dt * k2, t0 + 0.5 * dt, u, params)
    k4 = _state_derivative(y0 + dt * k3, t0 + dt, u, params)
    y1 = y0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    new = CraneState.from_array(y1, t0 + dt)
    if not new.is_finite():
        raise IntegrationError(f"non-finite state after step at t={t0:.6g} s")
    if new.l <= 0.0:
        raise IntegrationError(
            f"cable length {new.l:.6g} m <= 0 after step at t={t0:.6g} s"
        )
    return new


def total_energy(state: CraneState, params: CraneParams) -> float:
    """Mechanical energy: kinetic from the mass matrix, potential -m g l cos(theta).

    Conserved by the ideal plant whenever the applied forces do no work
    (u = 0, or the cable held at constant length), so it serves as an
    integration-accuracy oracle.
    """
    qd = np.array([state.x_dot, state.l_dot, state.theta_dot])
    kinetic = 0.5 * float(qd @ mass_matrix(state, params) @ qd)
    return kinetic - params.m * params.g * state.l * math.cos(state.theta)


def cable_lock_force(state: CraneState, params: CraneParams) -> float:
    """Cable force that keeps ldd = 0 exactly when u_x = 0.

    Accounts for the trolley recoil through the cable:
    u_l = -M m (l thetad^2 + g cos) / (M + m sin^2).
    """
    sin_t = math.sin(state.theta)
    num = params.M * params.m * (
        state.l * state.theta_dot ** 2 + params.g * math.cos(state.theta)
    )
    return -num / (params.M + params.m * sin_t * sin_t)
