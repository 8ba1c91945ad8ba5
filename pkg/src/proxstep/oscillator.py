"""Planar frictional oscillator: point mass on a plane with spring, damper,
unilateral normal contact and tangential Coulomb friction whose coefficient
depends on sliding speed and time.

Coordinates are (q_x, q_y) with the contact plane at q_y = 0.  Constraint
channel 0 is the unilateral normal impulse, channel 1 the tangential friction
impulse; the constraint matrix is the permutation [[0, 1], [1, 0]].  With the
contact initially closed the normal channel is analytically trivial
(impulse m*g*dt holds q_y = v_y = 0), so the tangential dynamics coincide
with the 1-dof reduction, bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .sets import NONNEG_HALF_LINE, ConvexSet, disc
from .stepper import MechanicalModel


@dataclass(frozen=True)
class OscillatorParams:
    """Physical parameters; see the packaged `osc-*` scenarios for values.

    ``k1`` may be zero so the spring/damper pair can be moved into a feedback
    controller for controlled runs.  ``v_half`` scales the sliding speed in
    the friction law's denominator (s/m).
    """

    m: float
    g: float
    k1: float
    k2: float
    mu1: float
    mu2: float
    mu3: float
    Omega: float
    v_half: float

    def __post_init__(self):
        if not (self.m > 0.0 and self.g > 0.0):
            raise ParameterError("m and g must be > 0")
        if self.k1 < 0.0 or self.k2 < 0.0:
            raise ParameterError("k1 and k2 must be >= 0")
        if not (self.mu1 >= self.mu2 >= self.mu3 >= 0.0):
            raise ParameterError("friction coefficients must satisfy mu1 >= mu2 >= mu3 >= 0")


def friction_coefficient(qx: float, vx: float, t: float, p: OscillatorParams) -> float:
    """Speed- and time-dependent friction coefficient.

    (mu1 - mu2)/(1 + v_half*|v_x|) + mu2 + mu3*sin(Omega*t); the position
    argument is kept for signature symmetry but unused.
    """
    return (p.mu1 - p.mu2) / (1.0 + p.v_half * abs(vx)) + p.mu2 + p.mu3 * math.sin(p.Omega * t)


def mu_lower(p: OscillatorParams) -> float:
    """Infimum of the friction coefficient over all speeds and times."""
    return p.mu2 - p.mu3


def mu_upper(p: OscillatorParams) -> float:
    """Supremum of the friction coefficient over all speeds and times."""
    return p.mu1 + p.mu3


def smooth_forces(q: np.ndarray, v: np.ndarray, p: OscillatorParams) -> np.ndarray:
    """Spring/damper force on x, gravity on y."""
    return np.array([-p.k1 * q[0] - p.k2 * v[0], -p.m * p.g])


def constraint_sets(
    q: np.ndarray, v: np.ndarray, t: float, dt: float, gamma: float, p: OscillatorParams
) -> list[ConvexSet | None]:
    """Normal half-line gated by the position prediction, friction disc with it.

    The normal contact is active when q_y + gamma*v_y*dt <= 0; the friction
    disc exists only while the normal is active.  The disc radius uses the
    friction coefficient at the midpoint configuration and time with the
    entry sliding speed.
    """
    if not (dt > 0.0):
        raise ParameterError(f"dt must be > 0, got {dt}")
    q_pred = q[1] + gamma * v[1] * dt
    if q_pred > 0.0:
        return [None, None]
    mu = friction_coefficient(q[0] + 0.5 * dt * v[0], v[0], t + 0.5 * dt, p)
    return [NONNEG_HALF_LINE, disc(mu * p.m * p.g * dt)]


def stick_band(qx: float, t: float, p: OscillatorParams) -> bool:
    """Whether static friction can hold the oscillator at rest at qx."""
    return abs(p.k1 * qx) <= friction_coefficient(qx, 0.0, t, p) * p.m * p.g


class OscillatorModel(MechanicalModel):
    """Two-dof frictional oscillator as a steppable mechanical model."""

    dof = 2
    n_constraints = 2

    def __init__(self, params: OscillatorParams):
        self.params = params
        self._w = np.array([[0.0, 1.0], [1.0, 0.0]])
        self._m = np.array([[params.m, 0.0], [0.0, params.m]])

    def mass_matrix(self, q_mid):
        return self._m

    def smooth_forces(self, q_mid, v):
        return smooth_forces(q_mid, v, self.params)

    def constraint_matrix(self, q_mid):
        return self._w

    def constraint_sets(self, q, v, t, dt, gamma):
        return constraint_sets(q, v, t, dt, gamma, self.params)

    def initial_impulses(self, sets, dt):
        # gravity-compensating warm start on the active normal channel
        lam0 = np.zeros(2)
        if sets[0] is not None:
            lam0[0] = self.params.m * self.params.g * dt
        return lam0

    def energy(self, q, v):
        q = np.asarray(q, dtype=float)
        v = np.asarray(v, dtype=float)
        p = self.params
        kinetic = 0.5 * p.m * (v[..., 0] ** 2 + v[..., 1] ** 2)
        return kinetic + 0.5 * p.k1 * q[..., 0] ** 2 + p.m * p.g * q[..., 1]


class ReducedOscillatorModel(MechanicalModel):
    """Tangential 1-dof reduction with the analytic normal force m*g.

    Integrating this model reproduces the x-channel of the 2-dof model
    exactly whenever the contact starts closed and at rest vertically.
    """

    dof = 1
    n_constraints = 1

    def __init__(self, params: OscillatorParams):
        self.params = params
        self._w = np.array([[1.0]])
        self._m = np.array([[params.m]])

    def mass_matrix(self, q_mid):
        return self._m

    def smooth_forces(self, q_mid, v):
        p = self.params
        return np.array([-p.k1 * q_mid[0] - p.k2 * v[0]])

    def constraint_matrix(self, q_mid):
        return self._w

    def constraint_sets(self, q, v, t, dt, gamma):
        if not (dt > 0.0):
            raise ParameterError(f"dt must be > 0, got {dt}")
        p = self.params
        mu = friction_coefficient(q[0] + 0.5 * dt * v[0], v[0], t + 0.5 * dt, p)
        return [disc(mu * p.m * p.g * dt)]

    def energy(self, q, v):
        q = np.asarray(q, dtype=float)
        v = np.asarray(v, dtype=float)
        p = self.params
        return 0.5 * p.m * v[..., 0] ** 2 + 0.5 * p.k1 * q[..., 0] ** 2
