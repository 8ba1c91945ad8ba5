"""Frictional Furuta pendulum: driven arm plus under-actuated pendulum arm
with dry friction moments in both joints.

Coordinates are the arm angle theta_1 and the pendulum angle theta_2
(theta_2 = 0 hanging, pi inverted).  Both joints carry annular friction
plates under uniform pressure; their distributed friction moment equals a
point Coulomb force acting at the equivalent arm R_E.  The joint normal
forces switch from static clamping values to dynamic values once the motion
loads exceed them, which couples the friction bounds to the state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .sets import ConvexSet, disc
from .stepper import MechanicalModel


def equivalent_arm(r1: float, r2: float) -> float:
    """Equivalent moment arm 2(R1^3 - R2^3)/(3(R1^2 - R2^2)) of an annulus.

    Radius at which a point friction force reproduces the distributed
    friction moment of a uniform-pressure annular plate.
    """
    if not (r1 > r2 >= 0.0):
        raise ParameterError(f"need R1 > R2 >= 0, got R1={r1}, R2={r2}")
    return 2.0 * (r1**3 - r2**3) / (3.0 * (r1**2 - r2**2))


@dataclass(frozen=True)
class FurutaParams:
    """Geometry, inertia and friction data; see the `furuta-*` scenarios.

    ``r_e1``/``r_e2`` override the per-joint moment arms; by default both
    joints share the arm computed from the single plate geometry (R1, R2).
    """

    l1: float
    c1: float
    l2: float
    c2: float
    m1: float
    m2: float
    J1: float
    J2: float
    R1: float
    R2: float
    mu: float
    lamB1_static: float
    lamB2_static: float
    g: float
    r_e1: float | None = None
    r_e2: float | None = None

    def __post_init__(self):
        for name in ("l1", "c1", "l2", "c2", "m1", "m2", "J1", "J2", "g"):
            if not (getattr(self, name) > 0.0):
                raise ParameterError(f"{name} must be > 0")
        if not (self.R1 > self.R2 >= 0.0):
            raise ParameterError("need R1 > R2 >= 0")
        if self.mu < 0.0:
            raise ParameterError("mu must be >= 0")
        if self.lamB1_static < 0.0 or self.lamB2_static < 0.0:
            raise ParameterError("static normal forces must be >= 0")

    @property
    def re1(self) -> float:
        return self.r_e1 if self.r_e1 is not None else equivalent_arm(self.R1, self.R2)

    @property
    def re2(self) -> float:
        return self.r_e2 if self.r_e2 is not None else equivalent_arm(self.R1, self.R2)


def mass_matrix(theta2: float, p: FurutaParams) -> np.ndarray:
    """Configuration-dependent mass matrix (slender-arm inertias)."""
    a = p.J1 + p.m1 * p.c1 * p.c1 + p.m2 * p.l1 * p.l1
    b = p.J2 + p.m2 * p.c2 * p.c2
    c = p.m2 * p.l1 * p.c2
    s = math.sin(theta2)
    co = math.cos(theta2)
    m12 = c * co
    return np.array([[a + b * s * s, m12], [m12, b]])


def h_vector(theta: np.ndarray, thetadot: np.ndarray, p: FurutaParams) -> np.ndarray:
    """Gyroscopic/centrifugal and gravity generalized forces."""
    th2 = theta[1]
    td1 = thetadot[0]
    td2 = thetadot[1]
    b = p.J2 + p.m2 * p.c2 * p.c2
    c = p.m2 * p.l1 * p.c2
    s = math.sin(th2)
    s2t = math.sin(2.0 * th2)
    h1 = td2 * td2 * c * s - td1 * td2 * s2t * b
    h2 = 0.5 * td1 * td1 * s2t * b - p.g * p.m2 * p.c2 * s
    return np.array([h1, h2])


def normal_forces(
    theta2: float, thetadot1: float, thetadot2: float, p: FurutaParams
) -> tuple[float, float]:
    """Joint normal forces with static/dynamic switching.

    Dynamic loads N1 (axial on the base joint) and N2 (centrifugal on the
    pendulum joint) take over once their magnitude exceeds the static clamp
    value, so each bound is max(|N_i|, static_i).
    """
    n1 = (p.m1 + p.m2) * p.g + p.m2 * p.c2 * thetadot2 * thetadot2 * math.cos(theta2)
    n2 = p.m2 * p.l1 * thetadot1 * thetadot1
    lb1 = max(abs(n1), p.lamB1_static)
    lb2 = max(abs(n2), p.lamB2_static)
    return lb1, lb2


def constraint_sets(
    q: np.ndarray, v: np.ndarray, dt: float, p: FurutaParams
) -> list[ConvexSet]:
    """Friction discs of both joints, radii mu*lambda_B*R_E*dt.

    The bounds use the normal forces at the midpoint configuration with the
    entry rates; both joints are bilateral, so the discs are always active.
    """
    if not (dt > 0.0):
        raise ParameterError(f"dt must be > 0, got {dt}")
    th2_mid = q[1] + 0.5 * dt * v[1]
    lb1, lb2 = normal_forces(th2_mid, v[0], v[1], p)
    return [disc(p.mu * lb1 * p.re1 * dt), disc(p.mu * lb2 * p.re2 * dt)]


class FurutaModel(MechanicalModel):
    """Frictional Furuta pendulum as a steppable mechanical model."""

    dof = 2
    n_constraints = 2

    def __init__(self, params: FurutaParams):
        self.params = params
        self._w = np.eye(2)

    def mass_matrix(self, q_mid):
        return mass_matrix(q_mid[1], self.params)

    def smooth_forces(self, q_mid, v):
        return h_vector(q_mid, v, self.params)

    def constraint_matrix(self, q_mid):
        return self._w

    def constraint_sets(self, q, v, t, dt, gamma):
        return constraint_sets(q, v, dt, self.params)

    def energy(self, q, v):
        q = np.asarray(q, dtype=float)
        v = np.asarray(v, dtype=float)
        p = self.params
        a = p.J1 + p.m1 * p.c1 * p.c1 + p.m2 * p.l1 * p.l1
        b = p.J2 + p.m2 * p.c2 * p.c2
        c = p.m2 * p.l1 * p.c2
        th2 = q[..., 1]
        td1 = v[..., 0]
        td2 = v[..., 1]
        s = np.sin(th2)
        m11 = a + b * s * s
        m12 = c * np.cos(th2)
        kinetic = 0.5 * (m11 * td1**2 + 2.0 * m12 * td1 * td2 + b * td2**2)
        return kinetic + p.g * p.m2 * p.c2 * (1.0 - np.cos(th2))
