"""Engine selection: compiled kernels with a pure-Python fallback.

``proxstep._kernels`` is an optional Cython extension holding the hot step
loops for the two concrete models.  When it is importable, ``find_driver``
returns a callable that integrates whole runs (including feedback control
and the event exits the impulsive controllers need) with numerics that
mirror the generic stepper operation for operation; otherwise integration
stays on the generic Python path.
"""

from __future__ import annotations

import numpy as np

try:
    from . import _kernels
except ImportError:  # pure-Python install
    _kernels = None

COMPILED_AVAILABLE = _kernels is not None

# kernel exit codes
_DONE = 0
_EVENT = 1
_NONFINITE = 2


def backend_name() -> str:
    return "compiled" if COMPILED_AVAILABLE else "python"


def find_driver(model, controller, cfg):
    """Return a full-run driver for (model, controller) or None.

    Kernels cover the two concrete models with no controller or their
    dedicated controllers, at zero restitution (the only case the packaged
    scenarios exercise).
    """
    if _kernels is None or cfg.restitution != 0.0 or cfg.r_init is not None:
        return None
    from .control import FurutaController, OscillatorController
    from .furuta import FurutaModel
    from .oscillator import OscillatorModel

    if type(model) is OscillatorModel and (
        controller is None or type(controller) is OscillatorController
    ):
        return _run_oscillator
    if type(model) is FurutaModel and (
        controller is None or type(controller) is FurutaController
    ):
        return _run_furuta
    return None


class _KernelRecorder:
    """Output arrays shared with the kernels, segment by segment."""

    def __init__(self, state0, n_steps, m):
        n = state0.q.size
        self.t = np.empty(n_steps + 1)
        self.q = np.empty((n_steps + 1, n))
        self.v = np.empty((n_steps + 1, n))
        self.impulses = np.zeros((n_steps, m))
        self.converged = np.ones(n_steps, dtype=np.uint8)
        self.iterations = np.zeros(n_steps, dtype=np.int32)
        self.modes = np.zeros((n_steps, m), dtype=np.int8)
        self.t[0] = state0.t
        self.q[0] = state0.q
        self.v[0] = state0.v

    def build(self, events):
        from .stepper import Trajectory

        return Trajectory(
            self.t, self.q, self.v, self.impulses,
            self.converged.astype(bool), self.iterations, self.modes,
            list(events),
        )


def _controller_report(rec, i):
    """Reassemble the step's ImpulseSolveReport from the kernel arrays."""
    from .stepper import ImpulseSolveReport

    return ImpulseSolveReport(
        impulses=rec.impulses[i],
        iterations=int(rec.iterations[i]),
        residual_norm=0.0,
        converged=bool(rec.converged[i]),
        modes=rec.modes[i],
    )


def _event_loop(run_segment, model, state0, n_steps, cfg, controller):
    """Drive kernel segments, handing stick events to the controller.

    The kernel exits whenever the controller might act (first stick while a
    gain switch is pending, or an impulse-candidate stick).  The controller's
    post_step then runs exactly as on the Python path; if it does nothing,
    the next segment suppresses the exit check for one step so the run
    always progresses.
    """
    from .errors import NumericalError
    from .stepper import State

    rec = _KernelRecorder(state0, n_steps, model.n_constraints)
    events = []
    done = 0
    suppress = 0
    while done < n_steps:
        n_done, code = run_segment(model, cfg, controller, rec, done, n_steps, suppress)
        done += n_done
        if code == _NONFINITE:
            raise NumericalError(f"non-finite state after step at t={rec.t[done]}")
        if code == _DONE:
            break
        state = State(rec.q[done].copy(), rec.v[done].copy(), float(rec.t[done]))
        outcome = controller.post_step(model, state, _controller_report(rec, done - 1), cfg)
        suppress = 1
        if outcome is not None:
            new_state, event = outcome
            events.append(event)
            rec.v[done] = new_state.v
    return rec.build(events)


def _oscillator_segment(model, cfg, controller, rec, done, n_steps, suppress):
    p = model.params
    if controller is None:
        fb = (False, 0.0, 0.0)
        stop_first = False
        stop_impulse = False
        act_bound = 0.0
        tol_q = 0.0
    else:
        fb = (True, controller.ctrl.k1, controller.current_k2())
        stop_first = controller.wants_first_stick_exit()
        stop_impulse = controller.wants_impulse_exit()
        act_bound = controller.activation_bound()
        tol_q = controller.ctrl.tol_q
    return _kernels.oscillator_run(
        rec.q[done], rec.v[done], rec.t[done], cfg.dt, n_steps - done,
        p.m, p.g, p.k1, p.k2, p.mu1, p.mu2, p.mu3, p.Omega, p.v_half,
        cfg.gamma, cfg.tol, cfg.j_max, cfg.force_velocity == "midpoint",
        fb[0], fb[1], fb[2],
        stop_first, stop_impulse, act_bound, tol_q, cfg.tol_v, suppress,
        rec.t[done:], rec.q[done:], rec.v[done:], rec.impulses[done:],
        rec.converged[done:], rec.iterations[done:], rec.modes[done:],
    )


def _run_oscillator(model, state0, n_steps, cfg, controller):
    return _event_loop(_oscillator_segment, model, state0, n_steps, cfg, controller)


def _furuta_segment(model, cfg, controller, rec, done, n_steps, suppress):
    p = model.params
    if controller is None:
        fb = (False, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        stop_first1 = stop_first2 = stop_impulse = False
        tol_q = 0.0
        cos_min = 0.0
    else:
        c = controller.ctrl
        fb = (True, c.k1, controller.current_k2(), c.k3, controller.current_k4(),
              c.theta_ref, c.theta_up)
        stop_first1, stop_first2 = controller.wants_first_stick_exits()
        stop_impulse = controller.wants_impulse_exit()
        tol_q = c.tol_q
        cos_min = c.cos_min
    return _kernels.furuta_run(
        rec.q[done], rec.v[done], rec.t[done], cfg.dt, n_steps - done,
        p.l1, p.c1, p.c2, p.m1, p.m2, p.J1, p.J2,
        p.re1, p.re2, p.mu, p.lamB1_static, p.lamB2_static, p.g,
        cfg.tol, cfg.j_max, cfg.force_velocity == "midpoint",
        fb[0], fb[1], fb[2], fb[3], fb[4], fb[5], fb[6],
        stop_first1, stop_first2, stop_impulse, tol_q, cos_min, cfg.tol_v, suppress,
        rec.t[done:], rec.q[done:], rec.v[done:], rec.impulses[done:],
        rec.converged[done:], rec.iterations[done:], rec.modes[done:],
    )


def _run_furuta(model, state0, n_steps, cfg, controller):
    return _event_loop(_furuta_segment, model, state0, n_steps, cfg, controller)
