"""Scalar convex sets and proximal-point operators for set-valued force laws.

Three sets cover every contact/friction law in this package: the full real
line (bilateral constraint), the non-negative half-line (unilateral contact)
and a centered disc whose radius is a friction bound (Coulomb disc).  All
laws are solved as root problems f(L, gdot) = L - prox_C(L - r*gdot) = 0,
evaluated here with an explicit interior/boundary case split.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import ParameterError, SetValuedCaseError


class SetKind(Enum):
    FULL_LINE = "full_line"
    NONNEG_HALF_LINE = "nonneg_half_line"
    DISC = "disc"


@dataclass(frozen=True)
class ConvexSet:
    """One of the three closed convex projection targets.

    ``radius`` is present iff ``kind`` is DISC; for friction laws it carries
    the impulse bound mu*|lambda_N|*dt (N*s or N*m*s).
    """

    kind: SetKind
    radius: float | None = None

    def __post_init__(self):
        if self.kind is SetKind.DISC:
            if self.radius is None:
                raise ParameterError("disc requires a radius")
            if not (self.radius >= 0.0):
                raise ParameterError(f"disc radius must be >= 0, got {self.radius}")
        elif self.radius is not None:
            raise ParameterError(f"{self.kind.value} takes no radius")


FULL_LINE = ConvexSet(SetKind.FULL_LINE)
NONNEG_HALF_LINE = ConvexSet(SetKind.NONNEG_HALF_LINE)


def disc(radius: float) -> ConvexSet:
    """Centered disc {x : |x| <= radius}."""
    return ConvexSet(SetKind.DISC, radius)


def contains(x: float, cset: ConvexSet) -> bool:
    """Membership test; disc boundary counts as inside."""
    if cset.kind is SetKind.FULL_LINE:
        return True
    if cset.kind is SetKind.NONNEG_HALF_LINE:
        return x >= 0.0
    return abs(x) <= cset.radius


def prox(x: float, cset: ConvexSet) -> float:
    """Nearest point of ``cset`` to ``x``.

    Total function: the full line returns x, the half-line clamps at 0, the
    disc clamps to its boundary preserving sign (points with |x| == radius
    are returned unchanged).
    """
    if cset.kind is SetKind.FULL_LINE:
        return x
    if cset.kind is SetKind.NONNEG_HALF_LINE:
        return x if x > 0.0 else 0.0
    rho = cset.radius
    if x > rho:
        return rho
    if x < -rho:
        return -rho
    return x


class Branch(Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class ProxResidual:
    """Residual of the prox root problem, tagged with the branch taken.

    Interior: L - r*gdot lies in the set and the value equals r*gdot.
    Boundary: the argument projects onto the set boundary b_C and the value
    equals L - b_C.  In both branches the value is L - prox(L - r*gdot).
    """

    branch: Branch
    value: float


def prox_residual(lam: float, gdot: float, r: float, cset: ConvexSet) -> ProxResidual:
    """Evaluate f(L, gdot) = L - prox_C(L - r*gdot) with its case split.

    ``r`` must be strictly positive; the root set of f is independent of it.
    """
    if not (r > 0.0):
        raise ParameterError(f"prox parameter r must be > 0, got {r}")
    arg = lam - r * gdot
    if contains(arg, cset):
        return ProxResidual(Branch.INTERIOR, r * gdot)
    return ProxResidual(Branch.BOUNDARY, lam - prox(arg, cset))


def coulomb_sliding_force(gdot_t: float, mu: float, lambda_n: float) -> float:
    """Sliding-branch Coulomb force -sign(gdot_t)*mu*|lambda_n|.

    Only valid while sliding; at gdot_t == 0 the law is set-valued and must
    be resolved through :func:`prox_residual` instead.
    """
    if gdot_t == 0.0:
        raise SetValuedCaseError(
            "friction force is set-valued at zero sliding velocity"
        )
    if mu < 0.0:
        raise ParameterError(f"friction coefficient must be >= 0, got {mu}")
    return -math.copysign(mu * abs(lambda_n), gdot_t)
