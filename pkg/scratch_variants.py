"""Energy drift of smooth-force velocity-evaluation variants (furuta, mu=0)."""
import numpy as np
from proxstep.furuta import FurutaParams, mass_matrix, h_vector, FurutaModel

FUR = FurutaParams(l1=0.435, c1=0.217, l2=0.2, c2=0.19, m1=0.4, m2=0.55,
                   J1=0.027, J2=0.021, R1=0.08, R2=0.03, mu=0.0,
                   lamB1_static=12.0, lamB2_static=3.0, g=9.81)
model = FurutaModel(FUR)

def run(variant, dt, t_end=10.0):
    q = np.array([0.0, np.pi / 2])
    v = np.array([0.0, np.pi])
    n = int(round(t_end / dt))
    for _ in range(n):
        qm = q + 0.5 * dt * v
        m = mass_matrix(qm[1], FUR)
        minv = np.linalg.inv(m)
        if variant == "entry":
            vп = v + minv @ (h_vector(qm, v, FUR) * dt)
        elif variant == "end":
            vп = v.copy()
            for _ in range(8):
                vп = v + minv @ (h_vector(qm, vп, FUR) * dt)
        elif variant == "midpoint":
            vп = v.copy()
            for _ in range(8):
                vп = v + minv @ (h_vector(qm, 0.5 * (v + vп), FUR) * dt)
        q = q + 0.5 * dt * (v + vп)
        v = vп
    return q, v

E0 = model.energy(np.array([0.0, np.pi / 2]), np.array([0.0, np.pi]))
for variant in ("entry", "end", "midpoint"):
    for dt in (1e-3, 5e-4):
        q, v = run(variant, dt)
        drift = abs(model.energy(q, v) - E0) / E0
        print(f"{variant:9s} dt={dt:.0e}: drift={drift:.3e}")
