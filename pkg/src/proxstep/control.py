"""Feedback and impulse-based controllers for the two reference systems.

Both systems share the control pattern: a continuous state-feedback force
plus an impulsive controller that fires when dry friction has captured the
system at a non-zero steady-state error.  The impulse magnitude comes from
one of three estimators:

* robust analytic boundary-value estimate (oscillator): closed-form solution
  of the overdamped post-impulse dynamics with the worst-case (lowest)
  friction coefficient, with a Newton solve for the unknown arrival time;
* approximate closed form (oscillator): the small-deflection limit of the
  robust law;
* shooting (both systems): forward-simulate the true non-smooth plant and
  iterate on the post-impulse velocity until the terminal position constraint
  holds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import EstimatorError, ParameterError, SingularConfigurationError
from .furuta import FurutaModel, FurutaParams, mass_matrix
from .oscillator import OscillatorModel, OscillatorParams, mu_lower, mu_upper
from .stepper import Mode, State, StepperConfig, apply_velocity_jump, integrate


class Estimator(Enum):
    ROBUST_BVP = "robust_bvp"
    APPROX = "approx"
    SHOOTING = "shooting"


class EventKind(Enum):
    IMPULSE_OSC = "impulse_osc"
    IMPULSE_FURUTA = "impulse_furuta"


@dataclass
class ControlEvent:
    """Record of one impulsive control application."""

    t: float
    kind: EventKind
    q: np.ndarray
    pre_v: np.ndarray
    post_v: np.ndarray
    impulse: float
    estimator_iters: int


def wrap_angle_error(angle: float, target: float) -> float:
    """Signed angular error angle - (target + 2*pi*i) in [-pi, pi)."""
    d = angle - target
    return d - 2.0 * math.pi * math.floor((d + math.pi) / (2.0 * math.pi))


# ---------------------------------------------------------------------------
# oscillator control


@dataclass(frozen=True)
class OscCtrlParams:
    """Oscillator feedback gains, activation bound and estimator settings.

    ``lambda_T_max`` bounds the spring force under which sticking can occur;
    None selects the supremum of the friction force, mu_upper*m*g, so the
    activation region covers exactly the reachable stick band.  ``tol_q``
    keeps the impulse from re-firing once the stick position is this close
    to the origin.
    """

    k1: float
    k2pre: float
    k2post: float
    estimator: Estimator = Estimator.SHOOTING
    lambda_T_max: float | None = None
    tol_q: float = 1e-4
    shoot_horizon: float = 4.0
    shoot_ds: float = 1e-4
    shoot_tol: float = 1e-6
    shoot_max_iters: int = 40
    bvp_max_iters: int = 20

    def __post_init__(self):
        if self.k1 <= 0.0 or self.k2pre < 0.0 or self.k2post < 0.0:
            raise ParameterError("need k1 > 0 and non-negative damping gains")


@dataclass(frozen=True)
class BvpEstimate:
    v_plus: float
    duration: float
    iterations: int


def robust_bvp_estimate(
    qx_star: float,
    m: float,
    k1: float,
    k2post: float,
    g: float,
    mu_low: float,
    tol: float = 1e-12,
    max_iters: int = 20,
) -> BvpEstimate:
    """Post-impulse velocity that drives the overdamped worst-case reduced
    dynamics from rest at ``qx_star`` exactly into (0, 0).

    The reduced dynamics use the lower friction bound ``mu_low`` and the
    post-stick damping gain, so the estimate is robust: the true plant
    dissipates at least as much and re-sticks closer to the origin.  The
    arrival time is the root of a scalar transcendental equation, found by
    Newton iteration started one natural period out; the sign symmetry
    v+(-q) = -v+(q) is exact by construction.
    """
    if qx_star == 0.0:
        raise ParameterError("estimator undefined at the origin")
    wn = math.sqrt(k1 / m)
    theta = k2post / (2.0 * math.sqrt(m * k1))
    if not theta > 1.0:
        raise ParameterError(
            f"post-stick damping must be overdamped (got damping ratio {theta})"
        )
    root = wn * math.sqrt(theta * theta - 1.0)
    lam1 = -wn * theta + root
    lam2 = -wn * theta - root
    delta = lam2 - lam1
    c = g * mu_low / (wn * wn)
    x = -abs(qx_star)

    t_arr = 1.0
    iterations = 0
    for _ in range(max_iters):
        iterations += 1
        e1 = math.exp(-lam1 * t_arr)
        e2 = math.exp(-lam2 * t_arr)
        f = c * (lam2 / delta * e1 - lam1 / delta * e2 - 1.0) - x
        if abs(f) < tol * max(1.0, abs(x)):
            break
        fp = c * (lam1 * lam2 / delta) * (e2 - e1)
        t_arr -= f / fp
    else:
        raise EstimatorError(
            f"arrival-time Newton did not converge in {max_iters} iterations"
        )
    e1 = math.exp(-lam1 * t_arr)
    e2 = math.exp(-lam2 * t_arr)
    v_pos = c * (lam1 * lam2 / delta) * (e1 - e2)
    return BvpEstimate(math.copysign(v_pos, -qx_star), t_arr, iterations)


def approx_impulse(qx: float, m: float, k1: float, g: float, mu_low: float) -> float:
    """Small-deflection closed-form impulse -sign(q)*sqrt(2*c*wn^2*m^2*|q|)."""
    wn2 = k1 / m
    c = g * mu_low / wn2
    return -math.copysign(math.sqrt(2.0 * c * wn2 * m * m * abs(qx)), qx)


def _fd_newton(residual, s0, ds, tol, max_iters):
    """Newton iteration with a forward-difference slope on a simulated map.

    Returns (root, iterations, converged); on slope breakdown or iteration
    exhaustion the best iterate so far is returned unconverged.
    """
    s = s0
    f = residual(s)
    best = (abs(f), s)
    for it in range(1, max_iters + 1):
        if abs(f) <= tol:
            return s, it - 1, True
        slope = (residual(s + ds) - f) / ds
        if slope == 0.0 or not math.isfinite(slope):
            return best[1], it, False
        s = s - f / slope
        f = residual(s)
        if abs(f) < best[0]:
            best = (abs(f), s)
    return best[1], max_iters, abs(f) <= tol


def shoot_oscillator(
    qx_star: float,
    t0: float,
    plant: OscillatorParams,
    fb_k1: float,
    fb_k2: float,
    cfg: StepperConfig,
    horizon: float = 4.0,
    ds: float = 1e-4,
    tol: float = 1e-6,
    max_iters: int = 40,
    engine: str = "auto",
) -> tuple[float, int]:
    """Post-impulse velocity whose forward simulation lands on q_x = 0.

    Probes integrate the true non-smooth plant under the post-stick feedback
    with the impulsive controller disabled; the boundary residual is the
    terminal position q_x(t0 + horizon).  The velocity-level constraint is
    left unenforced: friction parks the oscillator wherever the position
    constraint puts it.
    """
    if qx_star == 0.0:
        raise ParameterError("estimator undefined at the origin")
    model = OscillatorModel(plant)
    fb = OscillatorController(
        plant,
        OscCtrlParams(k1=fb_k1, k2pre=fb_k2, k2post=fb_k2),
        cfg,
        impulses_on=False,
        engine=engine,
    )

    def residual(s: float) -> float:
        fb.reset()
        state = State(np.array([qx_star, 0.0]), np.array([s, 0.0]), t0)
        traj = integrate(model, state, t0 + horizon, cfg, controller=fb, engine=engine)
        return traj.q[-1, 0]

    s0 = approx_impulse(qx_star, plant.m, fb_k1, plant.g, mu_lower(plant)) / plant.m
    s, iters, converged = _fd_newton(residual, s0, ds, tol, max_iters)
    if not converged:
        raise EstimatorError(
            f"oscillator shooting did not reach |q_x| <= {tol} in {max_iters} iterations"
        )
    return s, iters


def osc_impulse_active(qx: float, vx_minus: float, p: OscCtrlParams,
                       lambda_t_max: float, tol_v: float) -> bool:
    """Static part of the oscillator impulse activation law.

    Fires only from rest, inside the force bound |q| <= lambda_T_max/k1, and
    away from the origin.  The controller additionally imposes a one-step
    refractory period after each impulse.
    """
    return (
        abs(vx_minus) <= tol_v
        and abs(qx) <= lambda_t_max / p.k1
        and abs(qx) > p.tol_q
    )


class OscillatorController:
    """Spring/damper feedback plus impulsive escape from stick.

    Holds the per-run switching state: the first stick time (after which the
    damping gain switches from k2pre to k2post) and the refractory clock.
    One instance serves exactly one integration run; probes used inside the
    shooting estimator build their own frozen-feedback instances.
    """

    def __init__(self, plant: OscillatorParams, ctrl: OscCtrlParams,
                 cfg: StepperConfig, impulses_on: bool = True, engine: str = "auto"):
        self.plant = plant
        self.ctrl = ctrl
        self.cfg = cfg
        self.impulses_on = impulses_on
        self.engine = engine
        self.reset()

    def reset(self):
        self.t_switch: float | None = None
        self._last_fire_t = -math.inf

    # --- queries used by both the python loop and the kernel driver

    def current_k2(self) -> float:
        return self.ctrl.k2post if self.t_switch is not None else self.ctrl.k2pre

    def activation_bound(self) -> float:
        if self.ctrl.lambda_T_max is not None:
            return self.ctrl.lambda_T_max
        return mu_upper(self.plant) * self.plant.m * self.plant.g

    def wants_first_stick_exit(self) -> bool:
        return self.t_switch is None

    def wants_impulse_exit(self) -> bool:
        return self.impulses_on

    # --- integration hooks

    def force(self, q, v, t) -> np.ndarray:
        k2 = self.current_k2()
        return np.array([-self.ctrl.k1 * q[0] - k2 * v[0], 0.0])

    def post_step(self, model, state, report, cfg):
        stick = report.modes[1] == Mode.STICK
        if stick and self.t_switch is None:
            self.t_switch = state.t
        if not (self.impulses_on and stick):
            return None
        if state.t - self._last_fire_t <= 1.5 * cfg.dt:
            return None
        qx = state.q[0]
        vx = state.v[0]
        if not osc_impulse_active(qx, vx, self.ctrl, self.activation_bound(), cfg.tol_v):
            return None
        v_plus, iters = self._estimate(qx, state.t)
        impulse = self.plant.m * (v_plus - vx)
        new_state = apply_velocity_jump(model, state, np.array([impulse, 0.0]))
        self._last_fire_t = state.t
        event = ControlEvent(
            t=state.t, kind=EventKind.IMPULSE_OSC, q=state.q.copy(),
            pre_v=state.v.copy(), post_v=new_state.v.copy(),
            impulse=impulse, estimator_iters=iters,
        )
        return new_state, event

    def _estimate(self, qx: float, t: float) -> tuple[float, int]:
        p = self.plant
        c = self.ctrl
        if c.estimator is Estimator.ROBUST_BVP:
            try:
                est = robust_bvp_estimate(
                    qx, p.m, c.k1, c.k2post, p.g, mu_lower(p),
                    max_iters=c.bvp_max_iters,
                )
                return est.v_plus, est.iterations
            except EstimatorError:
                return approx_impulse(qx, p.m, c.k1, p.g, mu_lower(p)) / p.m, 0
        if c.estimator is Estimator.APPROX:
            return approx_impulse(qx, p.m, c.k1, p.g, mu_lower(p)) / p.m, 0
        return shoot_oscillator(
            qx, t, p, c.k1, c.k2post, self.cfg,
            horizon=c.shoot_horizon, ds=c.shoot_ds, tol=c.shoot_tol,
            max_iters=c.shoot_max_iters, engine=self.engine,
        )


# ---------------------------------------------------------------------------
# Furuta pendulum control


@dataclass(frozen=True)
class FurutaCtrlParams:
    """Full-state feedback gains and impulse/shooting settings.

    ``theta_up`` is the pendulum angle of the inverted target configuration;
    all angle errors are taken modulo 2*pi against it.  ``cos_min`` blocks
    impulses near the singular configurations where an arm impulse cannot
    move the pendulum.
    """

    k1: float
    k2pre: float
    k2post: float
    k3: float
    k4pre: float
    k4post: float
    theta_ref: float = 0.0
    theta_up: float = math.pi
    t_shoot: float = 3.0
    ds: float = 1e-4
    tol_shoot: float = 1e-3
    max_shoot_iters: int = 25
    cos_min: float = 0.02
    tol_q: float = 5e-3

    def __post_init__(self):
        for name in ("k1", "k2pre", "k2post", "k3", "k4pre", "k4post"):
            if getattr(self, name) < 0.0:
                raise ParameterError(f"gain {name} must be >= 0")
        if self.t_shoot <= 0.0 or self.ds <= 0.0 or self.tol_shoot <= 0.0:
            raise ParameterError("shooting settings must be positive")


def furuta_impulse_torque(
    theta2: float, dv2: float, plant: FurutaParams, cos_min: float = 1e-9
) -> tuple[float, float]:
    """Arm impulse realizing a prescribed pendulum velocity jump.

    An impulsive torque on the driving arm jumps both rates in a fixed ratio
    set by the mass matrix; given the desired pendulum jump ``dv2`` this
    returns (U_tau, dv1) with the arm jump it entails.  Near |cos(theta2)|
    = 0 the coupling vanishes and the impulse cannot move the pendulum.
    """
    co = math.cos(theta2)
    if abs(co) < cos_min:
        raise SingularConfigurationError(
            f"arm impulse cannot move the pendulum at theta2={theta2}"
        )
    m = mass_matrix(theta2, plant)
    dv1 = -(m[1, 1] / m[0, 1]) * dv2
    u_tau = m[0, 0] * dv1 + m[0, 1] * dv2
    return u_tau, dv1


def furuta_impulse_active(
    q: np.ndarray, v_minus: np.ndarray, p: FurutaCtrlParams, tol_v: float
) -> bool:
    """Static part of the pendulum impulse activation law.

    Fires when at least one joint is stuck while the pendulum is away from
    the inverted target (modulo 2*pi) and outside the singular band.  The
    controller additionally imposes a one-step refractory period.
    """
    stuck = abs(v_minus[0]) <= tol_v or abs(v_minus[1]) <= tol_v
    err = wrap_angle_error(q[1], p.theta_up)
    return stuck and abs(err) > p.tol_q and abs(math.cos(q[1])) > p.cos_min


def shoot_furuta(
    q: np.ndarray,
    v_minus: np.ndarray,
    t0: float,
    plant: FurutaParams,
    cfg: StepperConfig,
    ctrl: FurutaCtrlParams,
    fb_k2: float,
    fb_k4: float,
    engine: str = "auto",
) -> tuple[float, int, bool]:
    """Pendulum velocity jump whose forward simulation reaches the inverted angle.

    Probes apply the candidate jump (coupled arm jump included), then run the
    closed-loop plant with feedback on and further impulses off over the
    shooting horizon; the residual is the terminal pendulum angle error
    against the target fixed at the current winding.  Returns (s, iterations,
    converged); per the shooting algorithm the best iterate is returned even
    when unconverged.
    """
    theta2 = q[1]
    err0 = wrap_angle_error(theta2, ctrl.theta_up)
    target = theta2 - err0
    model = FurutaModel(plant)
    fb = FurutaController(
        plant,
        FurutaCtrlParams(
            k1=ctrl.k1, k2pre=fb_k2, k2post=fb_k2, k3=ctrl.k3,
            k4pre=fb_k4, k4post=fb_k4,
            theta_ref=ctrl.theta_ref, theta_up=ctrl.theta_up,
        ),
        cfg,
        impulses_on=False,
        engine=engine,
    )

    def residual(s: float) -> float:
        _, dv1 = furuta_impulse_torque(theta2, s, plant, ctrl.cos_min)
        fb.reset()
        state = State(q.copy(), v_minus + np.array([dv1, s]), t0)
        traj = integrate(model, state, t0 + ctrl.t_shoot, cfg, controller=fb, engine=engine)
        return traj.q[-1, 1] - target

    s0 = -math.copysign(math.sqrt(10.0 * abs(err0)), err0)
    s, iters, converged = _fd_newton(
        residual, s0, ctrl.ds, ctrl.tol_shoot, ctrl.max_shoot_iters
    )
    return s, iters, converged


class FurutaController:
    """Full-state feedback on the arm plus impulsive escape from stick.

    Per-run switching state: first stick times of each joint (arm stick
    switches k2, pendulum stick switches k4) and the refractory clock.
    """

    def __init__(self, plant: FurutaParams, ctrl: FurutaCtrlParams,
                 cfg: StepperConfig, impulses_on: bool = True, engine: str = "auto"):
        self.plant = plant
        self.ctrl = ctrl
        self.cfg = cfg
        self.impulses_on = impulses_on
        self.engine = engine
        self.reset()

    def reset(self):
        self.t_switch1: float | None = None
        self.t_switch2: float | None = None
        self._last_fire_t = -math.inf

    def current_k2(self) -> float:
        return self.ctrl.k2post if self.t_switch1 is not None else self.ctrl.k2pre

    def current_k4(self) -> float:
        return self.ctrl.k4post if self.t_switch2 is not None else self.ctrl.k4pre

    def wants_first_stick_exits(self) -> tuple[bool, bool]:
        return self.t_switch1 is None, self.t_switch2 is None

    def wants_impulse_exit(self) -> bool:
        return self.impulses_on

    def force(self, q, v, t) -> np.ndarray:
        c = self.ctrl
        err2 = wrap_angle_error(q[1], c.theta_up)
        u = -(
            c.k1 * (q[0] - c.theta_ref)
            + self.current_k2() * v[0]
            + c.k3 * err2
            + self.current_k4() * v[1]
        )
        return np.array([u, 0.0])

    def post_step(self, model, state, report, cfg):
        stick1 = report.modes[0] == Mode.STICK
        stick2 = report.modes[1] == Mode.STICK
        if stick1 and self.t_switch1 is None:
            self.t_switch1 = state.t
        if stick2 and self.t_switch2 is None:
            self.t_switch2 = state.t
        if not (self.impulses_on and (stick1 or stick2)):
            return None
        if state.t - self._last_fire_t <= 1.5 * cfg.dt:
            return None
        if not furuta_impulse_active(state.q, state.v, self.ctrl, cfg.tol_v):
            return None
        s, iters, _ = shoot_furuta(
            state.q, state.v, state.t, self.plant, self.cfg, self.ctrl,
            self.current_k2(), self.current_k4(), engine=self.engine,
        )
        u_tau, _ = furuta_impulse_torque(state.q[1], s, self.plant, self.ctrl.cos_min)
        new_state = apply_velocity_jump(model, state, np.array([u_tau, 0.0]))
        self._last_fire_t = state.t
        event = ControlEvent(
            t=state.t, kind=EventKind.IMPULSE_FURUTA, q=state.q.copy(),
            pre_v=state.v.copy(), post_v=new_state.v.copy(),
            impulse=u_tau, estimator_iters=iters,
        )
        return new_state, event
