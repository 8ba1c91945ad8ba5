"""Throwaway measurements driving design decisions (deleted before ship)."""
import time
import numpy as np
from proxstep import State, StepperConfig, integrate
from proxstep.oscillator import OscillatorModel, OscillatorParams, friction_coefficient, mu_lower
from proxstep.furuta import FurutaModel, FurutaParams

OSC = OscillatorParams(m=1.0, g=10.0, k1=1.0, k2=0.5, mu1=0.4, mu2=0.3, mu3=0.05, Omega=4.0, v_half=0.5)
FUR = FurutaParams(l1=0.435, c1=0.217, l2=0.2, c2=0.19, m1=0.4, m2=0.55,
                   J1=0.027, J2=0.021, R1=0.08, R2=0.03, mu=0.25,
                   lamB1_static=12.0, lamB2_static=3.0, g=9.81)

cfg = StepperConfig(dt=1e-3)

# --- oscillator free motion ---
model = OscillatorModel(OSC)
s0 = State(np.array([-4.0, 0.0]), np.array([-4.0, 0.0]), 0.0)
t0 = time.perf_counter()
traj = integrate(model, s0, 7.0, cfg, engine="python")
el = time.perf_counter() - t0
print(f"osc free: wall={el:.3f}s final q={traj.q[-1]} v={traj.v[-1]}")
print(f"  max|qy|={np.max(np.abs(traj.q[:,1])):.3e} max|vy|={np.max(np.abs(traj.v[:,1])):.3e}")
print(f"  LamU always m*g*dt: {np.all(traj.impulses[:,0] == 1.0*10.0*1e-3)}")
print(f"  nonconv={traj.nonconverged_count} max_iters={traj.max_iterations}")
stick = np.abs(traj.v[:, 0]) <= 1e-8
# find final stick streak start
idx = np.where(~stick)[0]
arrival = (idx[-1] + 1) if len(idx) else 0
print(f"  terminal |vx|={abs(traj.v[-1,0]):.2e}; stick arrival t={traj.t[arrival]:.3f} qx={traj.q[arrival,0]:.5f}")
mu_arr = friction_coefficient(traj.q[arrival,0], 0.0, traj.t[arrival], OSC)
print(f"  band check |k1 qx|={abs(OSC.k1*traj.q[arrival,0]):.4f} <= mu*m*g={mu_arr*10:.4f}")
E = model.energy(traj.q, traj.v)
dE = np.diff(E)
print(f"  max energy increase per step: {dE.max():.3e}")

# --- closed-form tangential oracle on a grid ---
from proxstep import solve_impulses
def closed_form_lam_t(qx, vx, t, p, dt):
    qmx = qx + 0.5*dt*vx
    hx = -p.k1*qmx - p.k2*vx
    mu = friction_coefficient(qmx, vx, t + 0.5*dt, p)
    rho = mu*p.m*p.g*dt
    stick_lam = -p.m*vx - hx*dt
    if abs(stick_lam) <= rho:
        return stick_lam
    for sgn in (1.0, -1.0):
        lam = -sgn*rho
        v_plus = vx + (hx*dt + lam)/p.m
        if np.sign(v_plus) == sgn:
            return lam
    return np.nan

t0 = time.perf_counter()
errs = []
for qx in np.linspace(-6, 6, 30):
    for vx in np.linspace(-6, 6, 30):
        st = State(np.array([qx, 0.0]), np.array([vx, 0.0]), 0.25)
        rep = solve_impulses(model, st, cfg)
        lam_oracle = closed_form_lam_t(qx, vx, 0.25, OSC, cfg.dt)
        errs.append(abs(rep.impulses[1] - lam_oracle))
print(f"oracle grid 30x30: max err={max(errs):.2e}  wall={time.perf_counter()-t0:.3f}s")

# --- furuta free motion ---
fmodel = FurutaModel(FUR)
f0 = State(np.array([0.0, np.pi/2]), np.array([0.0, np.pi]), 0.0)
t0 = time.perf_counter()
ftraj = integrate(fmodel, f0, 30.0, cfg, engine="python")
el = time.perf_counter() - t0
print(f"furuta free: wall={el:.2f}s final v={ftraj.v[-1]} nonconv={ftraj.nonconverged_count} max_iters={ftraj.max_iterations}")
rates = np.abs(ftraj.v)
last_moving = np.where((rates[:,0] > 1e-8) | (rates[:,1] > 1e-8))[0]
print(f"  rates below 1e-8 from t={ftraj.t[last_moving[-1]+1] if len(last_moving) else 0:.3f}")
E = fmodel.energy(ftraj.q, ftraj.v)
dE = np.diff(E)
print(f"  E0={E[0]:.6f}  max dE per step={dE.max():.3e}  (E0*1e-9={E[0]*1e-9:.2e})")

# --- furuta mu=0 energy drift ---
from dataclasses import replace
fur0 = replace(FUR, mu=0.0)
fmodel0 = FurutaModel(fur0)
t0 = time.perf_counter()
ftraj0 = integrate(fmodel0, f0, 10.0, cfg, engine="python")
E = fmodel0.energy(ftraj0.q, ftraj0.v)
print(f"furuta mu=0: wall={time.perf_counter()-t0:.2f}s relative drift={abs(E[-1]-E[0])/abs(E[0]):.3e} max_iters={ftraj0.max_iterations}")
dE0 = np.diff(E)
print(f"  max dE per step={dE0.max():.3e}")
