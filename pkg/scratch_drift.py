"""Drift diagnosis for the frictionless coupled pendulum."""
import numpy as np
from dataclasses import replace
from scipy.integrate import solve_ivp
from proxstep import State, StepperConfig, integrate
from proxstep.furuta import FurutaModel, FurutaParams, mass_matrix, h_vector

FUR = FurutaParams(l1=0.435, c1=0.217, l2=0.2, c2=0.19, m1=0.4, m2=0.55,
                   J1=0.027, J2=0.021, R1=0.08, R2=0.03, mu=0.0,
                   lamB1_static=12.0, lamB2_static=3.0, g=9.81)
model = FurutaModel(FUR)
q0 = np.array([0.0, np.pi / 2])
v0 = np.array([0.0, np.pi])

def rhs(t, y):
    q = y[:2]; v = y[2:]
    m = mass_matrix(q[1], FUR)
    h = h_vector(q, v, FUR)
    return np.concatenate([v, np.linalg.solve(m, h)])

ref = solve_ivp(rhs, (0, 10.0), np.concatenate([q0, v0]), rtol=1e-12, atol=1e-12, dense_output=True)
yT = ref.y[:, -1]
E0 = model.energy(q0, v0)
print("reference final:", yT, " E_ref_end:", model.energy(yT[:2], yT[2:]), " E0:", E0)

for dt in (2e-3, 1e-3, 5e-4, 2.5e-4):
    cfg = StepperConfig(dt=dt)
    tr = integrate(model, State(q0.copy(), v0.copy(), 0.0), 10.0, cfg, engine="python")
    E = model.energy(tr.q, tr.v)
    drift = abs(E[-1] - E0) / E0
    state_err = np.max(np.abs(np.concatenate([tr.q[-1], tr.v[-1]]) - yT))
    i25 = int(round(2.5 / dt)); i50 = int(round(5.0 / dt))
    print(f"dt={dt:.1e}: drift={drift:.3e} state_err={state_err:.3e} "
          f"E@2.5={abs(E[i25]-E0)/E0:.2e} E@5={abs(E[i50]-E0)/E0:.2e} sign(dE_end)={np.sign(E[-1]-E0)}")
