"""Continuous power balance check: vT*h_gyro + 0.5 vT*Mdot*v == dV/dt along v."""
import numpy as np
from proxstep.furuta import FurutaParams, mass_matrix, h_vector

FUR = FurutaParams(l1=0.435, c1=0.217, l2=0.2, c2=0.19, m1=0.4, m2=0.55,
                   J1=0.027, J2=0.021, R1=0.08, R2=0.03, mu=0.0,
                   lamB1_static=12.0, lamB2_static=3.0, g=9.81)

rng = np.random.default_rng(0)
worst = 0.0
for _ in range(200):
    th2 = rng.uniform(-3, 3)
    v = rng.uniform(-5, 5, 2)
    q = np.array([0.0, th2])
    h = h_vector(q, v, FUR)
    # Mdot via finite difference in th2 times td2
    eps = 1e-7
    dm = (mass_matrix(th2 + eps, FUR) - mass_matrix(th2 - eps, FUR)) / (2 * eps) * v[1]
    # power balance: v.(h + grad_V) + 0.5 v.Mdot.v should vanish (h includes -dV/dq)
    dV = FUR.g * FUR.m2 * FUR.c2 * np.sin(th2) * v[1]
    balance = v @ h + 0.5 * v @ dm @ v + dV
    worst = max(worst, abs(balance))
print("max |power balance residual| =", worst)
