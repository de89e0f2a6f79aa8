"""Adaptive Takagi-Sugeno-Kang compensator over a switching variable.

One fuzzy axis per actuated coordinate. Rule premises are triangular
memberships on the s axis whose outer rules saturate into shoulders, so the
normalized firing strengths form a partition of unity on the whole axis.
Consequents are constants ("zero-order" TSK); the compensation output is
their firing-strength-weighted average, and a gradient law integrates the
consequents online so the compensator learns whatever steady effect the
plant's unmodeled forces have on the s-dynamics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class FuzzyAxis:
    """Rule grid, consequent vector, and adaptation settings for one axis.

    centers must be strictly increasing, uniformly spaced, symmetric about
    zero, and spaced exactly one half_width apart: triangles then overlap at
    0.5 and sum to one everywhere between (and, with the shoulder rules,
    beyond) the outer centers.
    """

    centers: np.ndarray   # rule centers on the s axis
    half_width: float     # triangular membership half-width
    D_hat: np.ndarray     # consequent values [force units]
    phi_adapt: float      # adaptation rate; 0 freezes the consequents
    d_hat_cap: float      # symmetric clamp on output and consequents

    def __post_init__(self):
        centers = np.asarray(self.centers, dtype=float)
        d_hat = np.asarray(self.D_hat, dtype=float)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "D_hat", d_hat)
        n = centers.shape[0]
        if centers.ndim != 1 or n < 2:
            raise DomainError("need at least 2 rule centers")
        if d_hat.shape != centers.shape:
            raise DomainError("D_hat must match centers in length")
        spacing = np.diff(centers)
        if np.any(spacing <= 0.0):
            raise DomainError("rule centers must be strictly increasing")
        if np.max(spacing) - np.min(spacing) > 1e-9 * np.max(spacing):
            raise DomainError("rule centers must be uniformly spaced")
        if abs(centers[0] + centers[-1]) > 1e-9 * max(1.0, abs(centers[-1])):
            raise DomainError("rule centers must be symmetric about zero")
        if abs(self.half_width - spacing[0]) > 1e-9 * spacing[0]:
            raise DomainError(
                "half_width must equal the center spacing "
                f"({spacing[0]:.6g}) for the partition-of-unity property, "
                f"got {self.half_width:.6g}"
            )
        if self.phi_adapt < 0.0:
            raise DomainError("phi_adapt must be >= 0")
        if not self.d_hat_cap > 0.0:
            raise DomainError("d_hat_cap must be positive")

    @property
    def rule_count(self) -> int:
        return int(self.centers.shape[0])

    @classmethod
    def uniform_grid(cls, rule_count: int, span: float, phi_adapt: float,
                     d_hat_cap: float) -> "FuzzyAxis":
        """Zero-initialized axis with rule_count centers on [-span, span]."""
        if rule_count < 2:
            raise DomainError("need at least 2 rules")
        if span <= 0.0:
            raise DomainError("span must be positive")
        centers = np.linspace(-span, span, rule_count)
        return cls(
            centers=centers,
            half_width=2.0 * span / (rule_count - 1),
            D_hat=np.zeros(rule_count),
            phi_adapt=phi_adapt,
            d_hat_cap=d_hat_cap,
        )


def firing_strengths(axis: FuzzyAxis, s: float) -> np.ndarray:
    """Rule firing strengths at s: triangles with saturating shoulders."""
    w = np.maximum(1.0 - np.abs(s - axis.centers) / axis.half_width, 0.0)
    if s <= axis.centers[0]:
        w[0] = 1.0
    elif s >= axis.centers[-1]:
        w[-1] = 1.0
    return w


def normalized_strengths(axis: FuzzyAxis, s: float) -> np.ndarray:
    """Partition-of-unity weights psi = w / sum(w)."""
    w = firing_strengths(axis, s)
    return w / w.sum()


def infer(axis: FuzzyAxis, s: float) -> float:
    """TSK output: weighted average of consequents, clamped to +-d_hat_cap."""
    d = float(axis.D_hat @ normalized_strengths(axis, s))
    return min(max(d, -axis.d_hat_cap), axis.d_hat_cap)


def adapt(axis: FuzzyAxis, s: float, dt: float) -> FuzzyAxis:
    """One explicit-Euler step of the gradient law Dd = phi * s * psi.

    Rules with zero membership are untouched; every consequent is clamped
    to +-d_hat_cap as anti-windup. Returns a new axis (functional update).
    """
    if dt <= 0.0:
        raise DomainError(f"dt must be positive, got {dt}")
    if axis.phi_adapt == 0.0 or s == 0.0:
        return axis
    psi = normalized_strengths(axis, s)
    d_new = axis.D_hat + axis.phi_adapt * s * dt * psi
    np.clip(d_new, -axis.d_hat_cap, axis.d_hat_cap, out=d_new)
    return replace(axis, D_hat=d_new)
