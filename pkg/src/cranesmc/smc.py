"""Smooth sliding mode controller for the underactuated crane.

Two switching variables couple the three tracking errors:

    s_x = alpha_x*exd + lambda_x*ex + alpha_theta*ethd + lambda_theta*eth
    s_l = alpha_l*eld + lambda_l*el

The control force u = -A(q)^-1 b drives s toward zero, with A the 2x2
decoupling matrix of the s-dynamics and b collecting feedforward, error
feedback, the compensation estimate d_hat, and the boundary-layer switching
term K*sat(s/phi). A is singular on the set alpha_theta*cos(theta) =
alpha_x*l, which valid gain choices keep far from the operating envelope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dynamics import ControlInput, CraneParams, CraneState, forward_dynamics
from .errors import DomainError, SingularMatrixError
from .trajectory import Reference, setpoint

SMOOTH = "smooth"
SIGNUM = "signum"  # discontinuous baseline, kept only to demonstrate chattering


@dataclass(frozen=True)
class ControllerGains:
    """Surface weights, switching gains, and boundary-layer widths.

    The theta weights may take either sign (their sign is part of what the
    stability validator checks); all other gains must be positive.
    """

    alpha_x: float
    alpha_l: float
    alpha_theta: float
    lambda_x: float
    lambda_l: float
    lambda_theta: float
    K_x: float
    K_l: float
    phi_x: float
    phi_l: float
    switching: str = SMOOTH   # SMOOTH or SIGNUM (test baseline)
    det_tol: float = 1e-8     # |det A| threshold for the singularity guard

    def __post_init__(self):
        for name in ("alpha_x", "alpha_l", "lambda_x", "lambda_l",
                     "K_x", "K_l", "phi_x", "phi_l"):
            value = getattr(self, name)
            if not value > 0.0:
                raise DomainError(f"gain {name} must be positive, got {value}")
        for name in ("alpha_theta", "lambda_theta"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"gain {name} must be finite")
        if self.switching not in (SMOOTH, SIGNUM):
            raise DomainError(
                f"switching must be '{SMOOTH}' or '{SIGNUM}', got "
                f"{self.switching!r}"
            )
        if not self.det_tol > 0.0:
            raise DomainError("det_tol must be positive")


@dataclass(frozen=True)
class SwitchingState:
    """Switching variables and the six tracking errors they combine."""

    s_x: float
    s_l: float
    e_x: float
    e_l: float
    e_theta: float
    e_x_dot: float
    e_l_dot: float
    e_theta_dot: float


def switching_variables(state: CraneState, ref: Reference,
                        gains: ControllerGains) -> SwitchingState:
    """Evaluate both switching variables; the theta errors enter only s_x."""
    e_x = state.x - ref.x_d
    e_l = state.l - ref.l_d
    e_theta = state.theta - ref.theta_d
    e_x_dot = state.x_dot - ref.x_dot_d
    e_l_dot = state.l_dot - ref.l_dot_d
    e_theta_dot = state.theta_dot - ref.theta_dot_d
    s_x = (gains.alpha_x * e_x_dot + gains.lambda_x * e_x
           + gains.alpha_theta * e_theta_dot + gains.lambda_theta * e_theta)
    s_l = gains.alpha_l * e_l_dot + gains.lambda_l * e_l
    return SwitchingState(s_x, s_l, e_x, e_l, e_theta,
                          e_x_dot, e_l_dot, e_theta_dot)


def saturation(z: float) -> float:
    """Standard saturation: identity on [-1, 1], clamped outside."""
    if z > 1.0:
        return 1.0
    if z < -1.0:
        return -1.0
    return z


def _decoupling_entries(state: CraneState, nominal: CraneParams,
                        gains: ControllerGains):
    """Entries and determinant of the 2x2 decoupling matrix."""
    if state.l <= 0.0:
        raise DomainError(f"cable length must be positive, got l={state.l}")
    M, m, l = nominal.M, nominal.m, state.l
    sin_t, cos_t = math.sin(state.theta), math.cos(state.theta)
    k = gains.alpha_theta * cos_t - gains.alpha_x * l
    a11 = -k / (M * l)
    a12 = k * sin_t / (M * l)
    a21 = -gains.alpha_l * sin_t / M
    a22 = gains.alpha_l * (m * sin_t * sin_t + M) / (M * m)
    det = a11 * a22 - a12 * a21
    return a11, a12, a21, a22, det


def decoupling_matrix(state: CraneState, nominal: CraneParams,
                      gains: ControllerGains) -> np.ndarray:
    """2x2 input matrix A of the s-dynamics, built from nominal M, m.

    Raises :class:`SingularMatrixError` when |det A| < gains.det_tol,
    which signals alpha_theta*cos(theta) ~ alpha_x*l.
    """
    a11, a12, a21, a22, det = _decoupling_entries(state, nominal, gains)
    if abs(det) < gains.det_tol:
        raise SingularMatrixError(
            f"decoupling matrix singular (|det|={abs(det):.3e} < "
            f"{gains.det_tol:.1e}): alpha_theta*cos(theta) ~ alpha_x*l "
            f"at l={state.l:.4g}, theta={state.theta:.4g}"
        )
    return np.array([[a11, a12], [a21, a22]])


def control_law(state: CraneState, ref: Reference, gains: ControllerGains,
                d_hat: Sequence[float], nominal: CraneParams) -> ControlInput:
    """Smooth sliding mode control force u = -A^-1 b.

    b_x and b_l follow the published form verbatim, including the sign
    asymmetry of its velocity-error terms (+lambda_x*exd in b_x but
    -lambda_l*eld in b_l); see ``sliding_consistency`` in the engine module
    for the runtime diagnostic that makes this asymmetry observable.
    The 2x2 system is solved directly (Cramer), never forming A^-1.
    """
    sw = switching_variables(state, ref, gains)
    a11, a12, a21, a22, det = _decoupling_entries(state, nominal, gains)
    if abs(det) < gains.det_tol:
        raise SingularMatrixError(
            f"decoupling matrix singular (|det|={abs(det):.3e} < "
            f"{gains.det_tol:.1e}) at t={state.t:.6g} s"
        )
    if gains.switching == SIGNUM:
        sw_x = math.copysign(1.0, sw.s_x) if sw.s_x != 0.0 else 0.0
        sw_l = math.copysign(1.0, sw.s_l) if sw.s_l != 0.0 else 0.0
    else:
        sw_x = saturation(sw.s_x / gains.phi_x)
        sw_l = saturation(sw.s_l / gains.phi_l)
    g, l = nominal.g, state.l
    sin_t, cos_t = math.sin(state.theta), math.cos(state.theta)
    b_x = (gains.alpha_theta * (2.0 * state.l_dot * state.theta_dot
                                + g * sin_t) / l
           + d_hat[0]
           - gains.alpha_x * ref.x_ddot_d
           - gains.alpha_theta * ref.theta_ddot_d
           + gains.lambda_x * sw.e_x_dot
           + gains.lambda_theta * sw.e_theta_dot
           + gains.K_x * sw_x)
    b_l = (gains.alpha_l * (l * state.theta_dot ** 2 + g * cos_t)
           + d_hat[1]
           - gains.alpha_l * ref.l_ddot_d
           - gains.lambda_l * sw.e_l_dot
           + gains.K_l * sw_l)
    # A u = -b by Cramer's rule
    u_x = (-b_x * a22 + b_l * a12) / det
    u_l = (-b_l * a11 + b_x * a21) / det
    return ControlInput(u_x, u_l)


@dataclass(frozen=True)
class StabilityReport:
    """Eigenvalues of the linearized closed loop about an equilibrium."""

    passed: bool
    eigenvalues: np.ndarray
    spectral_abscissa: float

    def __str__(self):
        lines = ["closed-loop eigenvalues (real, imag):"]
        for ev in self.eigenvalues:
            lines.append(f"  {ev.real:+.6e}  {ev.imag:+.6e}j")
        lines.append(f"spectral abscissa: {self.spectral_abscissa:+.6e}")
        lines.append("verdict: " + ("PASS (all real parts < 0)" if self.passed
                                    else "FAIL (non-negative real part)"))
        return "\n".join(lines)


def closed_loop_field(z: np.ndarray, gains: ControllerGains,
                      nominal: CraneParams, ref: Reference) -> np.ndarray:
    """State derivative of the ideal closed loop (no friction, d_hat = 0)."""
    state = CraneState.from_array(z)
    u = control_law(state, ref, gains, (0.0, 0.0), nominal)
    qdd = forward_dynamics(state, u, nominal)
    return np.concatenate((z[3:], qdd))


def validate_surface_stability(gains: ControllerGains, nominal: CraneParams,
                               operating_point: CraneState,
                               fd_step: float = 1e-6) -> StabilityReport:
    """Numerical gain-stability check at an equilibrium posture.

    Linearizes the nominal closed loop (frictionless plant, d_hat = 0,
    saturation in its linear region) about the operating point by central
    finite differences and reports the eigenvalues of the 6x6 state matrix.
    Passes iff every real part is strictly negative.
    """
    op = operating_point
    if not (op.x_dot == 0.0 and op.l_dot == 0.0 and op.theta_dot == 0.0
            and op.theta == 0.0):
        raise DomainError(
            "operating point must be an equilibrium: rates zero and theta=0"
        )
    if op.l <= 0.0:
        raise DomainError(f"operating point needs l > 0, got l={op.l}")
    model = nominal.without_unmodeled()
    ref = setpoint((op.x, op.l), 0.0)
    z0 = op.as_array()
    jac = np.empty((6, 6))
    for j in range(6):
        dz = np.zeros(6)
        dz[j] = fd_step
        f_plus = closed_loop_field(z0 + dz, gains, model, ref)
        f_minus = closed_loop_field(z0 - dz, gains, model, ref)
        jac[:, j] = (f_plus - f_minus) / (2.0 * fd_step)
    eigenvalues = np.linalg.eigvals(jac)
    abscissa = float(np.max(eigenvalues.real))
    return StabilityReport(abscissa < 0.0, eigenvalues, abscissa)
