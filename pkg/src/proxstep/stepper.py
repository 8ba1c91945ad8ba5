"""Moreau midpoint time-stepping on velocity-impulse level.

Each step evaluates mass matrix, smooth forces and constraint directions at
the midpoint configuration q + dt/2*v, then solves the end-of-step contact
impulses from their prox root problems by fixed-point iteration, and finally
advances velocities (implicit impulse contribution) and positions
(trapezoidal rule).  Sticking is resolved per step, so chattering never
shrinks the step and the cost per step is bounded by 2*j_max sweeps.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import IntEnum
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import NumericalError, ParameterError
from .sets import ConvexSet, SetKind, contains, prox

if TYPE_CHECKING:
    from .control import ControlEvent


@dataclass
class State:
    """Generalized positions, velocities and the simulation clock."""

    q: np.ndarray
    v: np.ndarray
    t: float

    def copy(self) -> "State":
        return State(self.q.copy(), self.v.copy(), self.t)


@dataclass(frozen=True)
class StepperConfig:
    """Fixed-step integrator and impulse-solver settings.

    ``r_init`` overrides the per-constraint prox parameters; by default they
    are set from the inverse diagonal of the Delassus operator W^T M^-1 W,
    which makes the iteration exact in one sweep for decoupled constraints.
    On stall after ``j_max`` sweeps all r are halved once and iteration
    continues up to 2*j_max before reporting non-convergence.

    ``force_velocity`` selects the velocity argument of the smooth forces:
    "entry" uses the start-of-step velocity (the classic explicit evaluation,
    and the one the decoupled closed-form stick/slip solutions assume);
    "midpoint" resolves h at (v_n + v_{n+1})/2 inside the same fixed-point
    loop, which removes the first-order energy bias of the explicit variant
    on systems with gyroscopic forces.
    """

    dt: float
    tol: float = 1e-12
    j_max: int = 100
    gamma: float = 0.5
    restitution: float = 0.0
    r_init: tuple[float, ...] | None = None
    tol_v: float = 1e-8
    force_velocity: str = "entry"

    def __post_init__(self):
        if not (self.dt > 0.0):
            raise ParameterError(f"dt must be > 0, got {self.dt}")
        if not (self.tol > 0.0):
            raise ParameterError(f"tol must be > 0, got {self.tol}")
        if self.j_max < 1:
            raise ParameterError(f"j_max must be >= 1, got {self.j_max}")
        if not (0.0 <= self.gamma <= 1.0):
            raise ParameterError(f"gamma must be in [0, 1], got {self.gamma}")
        if not (0.0 <= self.restitution <= 1.0):
            raise ParameterError(
                f"restitution must be in [0, 1], got {self.restitution}"
            )
        if self.r_init is not None and any(r <= 0.0 for r in self.r_init):
            raise ParameterError("all r_init entries must be > 0")
        if self.force_velocity not in ("entry", "midpoint"):
            raise ParameterError(
                f"force_velocity must be 'entry' or 'midpoint', got {self.force_velocity!r}"
            )


class Mode(IntEnum):
    """Per-constraint classification of the converged impulse solve."""

    OPEN = 0      # inactive constraint or separating unilateral contact
    STICK = 1     # interior branch: constraint velocity driven to zero
    SLIP_POS = 2  # boundary branch with positive constraint velocity
    SLIP_NEG = 3  # boundary branch with negative constraint velocity


@dataclass
class ImpulseSolveReport:
    """Outcome of one per-step impulse fixed-point solve."""

    impulses: np.ndarray
    iterations: int
    residual_norm: float
    converged: bool
    modes: np.ndarray


class MechanicalModel(ABC):
    """Contract a mechanical system must fulfil to be time-stepped.

    ``dof`` is the number of generalized coordinates, ``n_constraints`` the
    number of set-valued force channels.  All matrix/vector callbacks receive
    the midpoint configuration except ``constraint_sets``, which receives the
    start-of-step state so it can build its own activation prediction
    q + gamma*v*dt.
    """

    dof: int
    n_constraints: int

    @abstractmethod
    def mass_matrix(self, q_mid: np.ndarray) -> np.ndarray:
        """Symmetric positive-definite generalized mass matrix."""

    @abstractmethod
    def smooth_forces(self, q_mid: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Smooth generalized forces h (gravity, springs, gyroscopic terms)."""

    @abstractmethod
    def constraint_matrix(self, q_mid: np.ndarray) -> np.ndarray:
        """dof x n_constraints matrix of generalized force directions."""

    @abstractmethod
    def constraint_sets(
        self, q: np.ndarray, v: np.ndarray, t: float, dt: float, gamma: float
    ) -> list[ConvexSet | None]:
        """Impulse-scaled convex set per constraint; None marks it inactive."""

    @abstractmethod
    def energy(self, q, v):
        """Total mechanical energy; broadcasts over leading axes."""

    def control_input(self, q: np.ndarray, v: np.ndarray, t: float) -> np.ndarray:
        """Model-owned applied generalized forces (default: none)."""
        return np.zeros(self.dof)

    def initial_impulses(
        self, sets: Sequence[ConvexSet | None], dt: float
    ) -> np.ndarray:
        """Warm start for the impulse iteration (default: zeros)."""
        return np.zeros(len(sets))


def solve_spd(m: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve M x = rhs for symmetric positive-definite M.

    Small systems use closed forms (diagonal 2x2 systems decouple exactly,
    which keeps a 2-dof model with independent axes bit-identical to its
    1-dof reduction); larger ones defer to LAPACK.
    """
    n = m.shape[0]
    if n == 1:
        m00 = m[0, 0]
        if m00 == 0.0 or not math.isfinite(m00):
            raise NumericalError("singular mass matrix")
        return rhs / m00
    if n == 2:
        m00, m01 = m[0, 0], m[0, 1]
        m10, m11 = m[1, 0], m[1, 1]
        if m01 == 0.0 and m10 == 0.0:
            if m00 == 0.0 or m11 == 0.0:
                raise NumericalError("singular mass matrix")
            out = np.empty_like(rhs, dtype=float)
            out[0] = rhs[0] / m00
            out[1] = rhs[1] / m11
            return out
        det = m00 * m11 - m01 * m10
        if det == 0.0 or not math.isfinite(det):
            raise NumericalError("singular mass matrix")
        out = np.empty_like(rhs, dtype=float)
        out[0] = (m11 * rhs[0] - m01 * rhs[1]) / det
        out[1] = (m00 * rhs[1] - m10 * rhs[0]) / det
        return out
    try:
        return np.linalg.solve(m, rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"singular mass matrix: {exc}") from None


def _matvec(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Mat-vec with plain left-to-right accumulation.

    BLAS may contract the products (FMA), which would break bit-equality
    with the compiled kernels; small systems therefore accumulate exactly
    like the C loops do.
    """
    n, k = a.shape
    if k == 0:
        return np.zeros(n)
    if k > 4:
        return a @ x
    out = np.empty(n)
    for i in range(n):
        s = a[i, 0] * x[0]
        for j in range(1, k):
            s = s + a[i, j] * x[j]
        out[i] = s
    return out


def midpoint_config(state: State, dt: float) -> np.ndarray:
    """Midpoint configuration q + dt/2 * v used for all matrix evaluations."""
    if not (dt > 0.0):
        raise ParameterError(f"dt must be > 0, got {dt}")
    return state.q + (0.5 * dt) * state.v


class _StepAssembly:
    """Midpoint quantities shared by the impulse solve and the state update."""

    def __init__(self, model, state, cfg, u):
        dt = cfg.dt
        self.model = model
        self.v_n = state.v
        self.q_mid = state.q + (0.5 * dt) * state.v
        self.dt = dt
        self.m_mid = np.asarray(model.mass_matrix(self.q_mid), dtype=float)
        u_total = np.asarray(model.control_input(state.q, state.v, state.t), dtype=float)
        if u is not None:
            u_total = u_total + np.asarray(u, dtype=float)
        self.u_total = u_total
        w = np.asarray(model.constraint_matrix(self.q_mid), dtype=float)
        if w.ndim == 1:
            w = w.reshape(model.dof, -1)
        self.sets = model.constraint_sets(state.q, state.v, state.t, dt, cfg.gamma)
        self.active = [k for k, s in enumerate(self.sets) if s is not None]
        self.w_act = w[:, self.active]
        self.v_free = self.free_velocity(state.v)
        if self.active:
            self.b_act = solve_spd(self.m_mid, self.w_act)
            self.gdot_minus = _matvec(self.w_act.T, state.v)
        else:
            self.b_act = np.zeros((model.dof, 0))
            self.gdot_minus = np.zeros(0)

    def free_velocity(self, v_force: np.ndarray) -> np.ndarray:
        """Impulse-free end velocity with h evaluated at ``v_force``."""
        h = np.asarray(self.model.smooth_forces(self.q_mid, v_force), dtype=float)
        return self.v_n + solve_spd(self.m_mid, (h + self.u_total) * self.dt)

    def v_plus(self, v_free: np.ndarray, lam_act: np.ndarray) -> np.ndarray:
        if lam_act.size == 0:
            return v_free
        return v_free + _matvec(self.b_act, lam_act)


def _solve_impulses(model, state, cfg, asm) -> tuple[ImpulseSolveReport, np.ndarray]:
    """Fixed-point iteration on the active prox problems.

    Every sweep recomputes the trial end-of-step velocity from the current
    impulses, then projects each impulse with its own prox parameter.  In
    "midpoint" force mode the smooth forces are re-evaluated each sweep at
    the average of entry and trial velocity, so the smooth part converges
    jointly with the impulses.  Returns the report over all constraints plus
    the final trial velocity.
    """
    n_act = len(asm.active)
    m_total = len(asm.sets)
    modes = np.full(m_total, Mode.OPEN, dtype=np.int8)
    impulses = np.zeros(m_total)
    midpoint_forces = cfg.force_velocity == "midpoint"
    if n_act == 0 and not midpoint_forces:
        return ImpulseSolveReport(impulses, 1, 0.0, True, modes), asm.v_free

    sets_act = [asm.sets[k] for k in asm.active]
    if cfg.r_init is not None:
        if len(cfg.r_init) != m_total:
            raise ParameterError("r_init must have one entry per constraint")
        r = np.array([cfg.r_init[k] for k in asm.active], dtype=float)
    else:
        gdiag = np.array(
            [_matvec(asm.w_act[:, i][None, :], asm.b_act[:, i])[0] for i in range(n_act)]
        )
        r = 1.0 / gdiag

    lam_full = np.asarray(model.initial_impulses(asm.sets, cfg.dt), dtype=float)
    lam = lam_full[asm.active].copy()
    eps = cfg.restitution

    def assemble(v_trial, lam):
        if midpoint_forces:
            v_free = asm.free_velocity(0.5 * (asm.v_n + v_trial))
        else:
            v_free = asm.v_free
        v_plus = asm.v_plus(v_free, lam)
        gdot = _matvec(asm.w_act.T, v_plus)
        if eps != 0.0:
            gdot = gdot + eps * asm.gdot_minus
        return v_plus, gdot

    converged = False
    diff = math.inf
    iterations = 0
    v_trial = asm.v_free
    for j in range(1, 2 * cfg.j_max + 1):
        iterations = j
        v_plus, gdot = assemble(v_trial, lam)
        diff = 0.0
        if midpoint_forces:
            dv = np.max(np.abs(v_plus - v_trial)) if j > 1 else math.inf
            if dv > diff:
                diff = dv
        v_trial = v_plus
        for i in range(n_act):
            new = prox(lam[i] - r[i] * gdot[i], sets_act[i])
            d = abs(new - lam[i])
            if d > diff:
                diff = d
            lam[i] = new
        if diff < cfg.tol:
            converged = True
            break
        if j == cfg.j_max:
            r = 0.5 * r
    v_plus, gdot = assemble(v_trial, lam)
    for i, k in enumerate(asm.active):
        if contains(lam[i] - r[i] * gdot[i], sets_act[i]):
            modes[k] = Mode.STICK
        elif sets_act[i].kind is SetKind.NONNEG_HALF_LINE:
            modes[k] = Mode.OPEN
        else:
            modes[k] = Mode.SLIP_POS if gdot[i] > 0.0 else Mode.SLIP_NEG
        impulses[k] = lam[i]
    report = ImpulseSolveReport(impulses, iterations, diff, converged, modes)
    return report, v_plus


def solve_impulses(
    model: MechanicalModel, state: State, cfg: StepperConfig, u: np.ndarray | None = None
) -> ImpulseSolveReport:
    """Solve the end-of-step impulses for one step without advancing time."""
    asm = _StepAssembly(model, state, cfg, u)
    report, _ = _solve_impulses(model, state, cfg, asm)
    return report


def step(
    model: MechanicalModel, state: State, cfg: StepperConfig,
    controller_force: np.ndarray | None = None,
) -> tuple[State, ImpulseSolveReport]:
    """Advance one step of size cfg.dt and return the new state + report."""
    asm = _StepAssembly(model, state, cfg, controller_force)
    report, v_new = _solve_impulses(model, state, cfg, asm)
    q_new = state.q + (0.5 * cfg.dt) * (state.v + v_new)
    if not (np.all(np.isfinite(q_new)) and np.all(np.isfinite(v_new))):
        raise NumericalError(f"non-finite state after step at t={state.t}")
    return State(q_new, v_new, state.t + cfg.dt), report


def apply_velocity_jump(
    model: MechanicalModel, state: State, generalized_impulse: np.ndarray
) -> State:
    """Instantaneous velocity jump M(q) (v+ - v-) = impulse; q and t unchanged."""
    imp = np.asarray(generalized_impulse, dtype=float)
    m = np.asarray(model.mass_matrix(state.q), dtype=float)
    return State(state.q.copy(), state.v + solve_spd(m, imp), state.t)


@dataclass
class Trajectory:
    """Recorded integration run: states per step plus solver diagnostics.

    Row i of ``q``/``v``/``t`` is the state after i steps (row 0 is the
    initial condition); row i of ``impulses``/``converged``/``iterations``/
    ``modes`` belongs to step i+1.  Velocities include any impulsive control
    jump applied at that instant; the jump itself is in ``events``.
    """

    t: np.ndarray
    q: np.ndarray
    v: np.ndarray
    impulses: np.ndarray
    converged: np.ndarray
    iterations: np.ndarray
    modes: np.ndarray
    events: list = field(default_factory=list)

    @property
    def n_steps(self) -> int:
        return self.impulses.shape[0]

    @property
    def nonconverged_count(self) -> int:
        return int(self.n_steps - np.count_nonzero(self.converged))

    @property
    def max_iterations(self) -> int:
        return int(self.iterations.max()) if self.n_steps else 0

    def final_state(self) -> State:
        return State(self.q[-1].copy(), self.v[-1].copy(), float(self.t[-1]))

    def write_csv(self, path) -> None:
        """Write `t,q_*,v_*,Lambda_*,converged` rows with 13 significant digits.

        Row 0 carries the initial state with zero impulses.
        """
        n = self.q.shape[1]
        m = self.impulses.shape[1]
        cols = (
            ["t"]
            + [f"q_{i}" for i in range(n)]
            + [f"v_{i}" for i in range(n)]
            + [f"Lambda_{k}" for k in range(m)]
            + ["converged"]
        )
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(",".join(cols) + "\n")
            for i in range(len(self.t)):
                lam = self.impulses[i - 1] if i > 0 else np.zeros(m)
                conv = int(self.converged[i - 1]) if i > 0 else 1
                vals = [self.t[i], *self.q[i], *self.v[i], *lam]
                fh.write(",".join(f"{x:.12e}" for x in vals) + f",{conv}\n")


class _Recorder:
    def __init__(self, state0: State, n_steps: int, m: int):
        n = state0.q.size
        self.t = np.empty(n_steps + 1)
        self.q = np.empty((n_steps + 1, n))
        self.v = np.empty((n_steps + 1, n))
        self.impulses = np.zeros((n_steps, m))
        self.converged = np.ones(n_steps, dtype=bool)
        self.iterations = np.zeros(n_steps, dtype=np.int32)
        self.modes = np.zeros((n_steps, m), dtype=np.int8)
        self.t[0] = state0.t
        self.q[0] = state0.q
        self.v[0] = state0.v

    def record(self, i: int, state: State, report: ImpulseSolveReport):
        self.t[i + 1] = state.t
        self.q[i + 1] = state.q
        self.v[i + 1] = state.v
        self.impulses[i] = report.impulses
        self.converged[i] = report.converged
        self.iterations[i] = report.iterations
        self.modes[i] = report.modes

    def rewrite_velocity(self, i: int, v: np.ndarray):
        self.v[i + 1] = v

    def build(self, events) -> Trajectory:
        return Trajectory(
            self.t, self.q, self.v, self.impulses, self.converged,
            self.iterations, self.modes, list(events),
        )


def integrate(
    model: MechanicalModel,
    state0: State,
    t_end: float,
    cfg: StepperConfig,
    controller=None,
    engine: str = "auto",
) -> Trajectory:
    """Integrate from state0.t to t_end, recording every step.

    ``controller`` may supply a continuous force per step and an impulse
    hook that runs after each step (see :mod:`proxstep.control`).  With
    ``engine="auto"`` the run is delegated to the compiled kernels whenever
    they support the model/controller pair; ``"python"`` forces the generic
    path, ``"compiled"`` requires the kernels and raises if unavailable.
    """
    if t_end < state0.t:
        raise ParameterError("t_end must be >= the initial time")
    n_steps = int(round((t_end - state0.t) / cfg.dt))
    state0 = State(
        np.asarray(state0.q, dtype=float).copy(),
        np.asarray(state0.v, dtype=float).copy(),
        float(state0.t),
    )
    if engine != "python":
        from . import engine as _engine

        driver = _engine.find_driver(model, controller, cfg)
        if driver is not None:
            return driver(model, state0, n_steps, cfg, controller)
        if engine == "compiled":
            raise ParameterError(
                "no compiled driver for this model/controller combination"
            )

    rec = _Recorder(state0, n_steps, model.n_constraints)
    events = []
    state = state0
    for i in range(n_steps):
        u = controller.force(state.q, state.v, state.t) if controller else None
        state, report = step(model, state, cfg, u)
        rec.record(i, state, report)
        if controller is not None:
            outcome = controller.post_step(model, state, report, cfg)
            if outcome is not None:
                state, event = outcome
                events.append(event)
                rec.rewrite_velocity(i, state.v)
    return rec.build(events)
