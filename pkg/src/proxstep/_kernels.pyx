# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled step loops for the two concrete models.

These mirror the generic Python stepper operation for operation (same
evaluation order, same branches) so that compiled and pure-Python runs
produce identical trajectories.  Each call integrates until its step budget
is exhausted or a controller-relevant stick event occurs, then returns
control to the Python driver.

Exit codes: 0 = step budget done, 1 = stick event, 2 = non-finite state.
"""

from libc.math cimport cos, fabs, floor, isfinite, sin, M_PI

cimport numpy as cnp

cnp.import_array()

DEF MODE_OPEN = 0
DEF MODE_STICK = 1
DEF MODE_SLIP_POS = 2
DEF MODE_SLIP_NEG = 3

DEF EXIT_DONE = 0
DEF EXIT_EVENT = 1
DEF EXIT_NONFINITE = 2


cdef inline double _prox_halfline(double x) nogil:
    return x if x > 0.0 else 0.0


cdef inline double _prox_disc(double x, double rho) nogil:
    if x > rho:
        return rho
    if x < -rho:
        return -rho
    return x


cdef inline double _wrap_err(double angle, double target) nogil:
    cdef double d = angle - target
    return d - 2.0 * M_PI * floor((d + M_PI) / (2.0 * M_PI))


cdef inline (double, double) _solve2(
    double m01, double m00, double m11, double det, double rhs0, double rhs1
) nogil:
    # mirror of stepper.solve_spd for symmetric 2x2 systems
    if m01 == 0.0:
        return rhs0 / m00, rhs1 / m11
    return (m11 * rhs0 - m01 * rhs1) / det, (m00 * rhs1 - m01 * rhs0) / det


def oscillator_run(
    double[::1] q0, double[::1] v0, double t0, double dt, Py_ssize_t n_steps,
    # plant parameters
    double m, double g, double k1, double k2,
    double mu1, double mu2, double mu3, double omega, double v_half,
    # stepper config
    double gamma, double tol, int j_max, bint midpoint_forces,
    # feedback control u_x = -ck1*q_x - ck2*v_x
    bint fb_on, double ck1, double ck2,
    # event exits
    bint stop_first_stick, bint stop_impulse,
    double act_bound, double tol_q, double tol_v, Py_ssize_t suppress,
    # outputs (row 0 is the entry state, written by the caller)
    double[::1] out_t, double[:, ::1] out_q, double[:, ::1] out_v,
    double[:, ::1] out_lam, cnp.uint8_t[::1] out_conv,
    cnp.int32_t[::1] out_iters, cnp.int8_t[:, ::1] out_modes,
):
    cdef double qx = q0[0], qy = q0[1], vx = v0[0], vy = v0[1], t = t0
    cdef double half = 0.5 * dt
    cdef double invm = 1.0 / m
    cdef Py_ssize_t i
    cdef int j, iters
    cdef bint active, converged, stick_t
    cdef double qmx, qmy, hx, hy, ux, q_pred, mu, rho
    cdef double vfx, vfy, vpx, vpy, vtx, vty, vmx
    cdef double lam_u, lam_t, new_u, new_t, diff, dv, r_u, r_t, arg
    cdef double ru0, qnx, qny, t_mid
    cdef signed char mode_u, mode_t

    for i in range(n_steps):
        qmx = qx + half * vx
        qmy = qy + half * vy
        t_mid = t + half
        ux = (-ck1 * qx - ck2 * vx) if fb_on else 0.0
        hy = -m * g
        q_pred = qy + gamma * vy * dt
        active = q_pred <= 0.0
        if active:
            mu = (mu1 - mu2) / (1.0 + v_half * fabs(vx)) + mu2 + mu3 * sin(omega * t_mid)
            rho = mu * m * g * dt
            r_u = 1.0 / invm
            r_t = 1.0 / invm
            lam_u = m * g * dt
            lam_t = 0.0
        else:
            rho = 0.0
            r_u = 1.0
            r_t = 1.0
            lam_u = 0.0
            lam_t = 0.0

        hx = -k1 * qmx - k2 * vx
        # the generic path divides by m; 1/m multiplication can differ in the
        # last ulp, so divide here as well
        vfx = vx + ((hx + ux) * dt) / m
        vfy = vy + ((hy + 0.0) * dt) / m

        converged = False
        diff = 0.0
        iters = 0
        vtx = vfx
        vty = vfy
        if active or midpoint_forces:
            j = 0
            while j < 2 * j_max:
                j += 1
                iters = j
                if midpoint_forces:
                    vmx = 0.5 * (vx + vtx)
                    hx = -k1 * qmx - k2 * vmx
                    vfx = vx + ((hx + ux) * dt) / m
                    vfy = vy + ((hy + 0.0) * dt) / m
                if active:
                    vpx = vfx + invm * lam_t
                    vpy = vfy + invm * lam_u
                else:
                    vpx = vfx
                    vpy = vfy
                diff = 0.0
                if midpoint_forces:
                    if j > 1:
                        dv = fabs(vpx - vtx)
                        if fabs(vpy - vty) > dv:
                            dv = fabs(vpy - vty)
                    else:
                        dv = 2.0 * tol + 1.0
                    if dv > diff:
                        diff = dv
                vtx = vpx
                vty = vpy
                if active:
                    new_u = _prox_halfline(lam_u - r_u * vpy)
                    if fabs(new_u - lam_u) > diff:
                        diff = fabs(new_u - lam_u)
                    lam_u = new_u
                    new_t = _prox_disc(lam_t - r_t * vpx, rho)
                    if fabs(new_t - lam_t) > diff:
                        diff = fabs(new_t - lam_t)
                    lam_t = new_t
                if diff < tol:
                    converged = True
                    break
                if j == j_max and active:
                    r_u = 0.5 * r_u
                    r_t = 0.5 * r_t
        else:
            iters = 1
            converged = True

        # final assembly with the converged impulses
        if midpoint_forces:
            vmx = 0.5 * (vx + vtx)
            hx = -k1 * qmx - k2 * vmx
            vfx = vx + ((hx + ux) * dt) / m
            vfy = vy + ((hy + 0.0) * dt) / m
        if active:
            vpx = vfx + invm * lam_t
            vpy = vfy + invm * lam_u
        else:
            vpx = vfx
            vpy = vfy

        mode_u = MODE_OPEN
        mode_t = MODE_OPEN
        if active:
            arg = lam_u - r_u * vpy
            if arg >= 0.0:
                mode_u = MODE_STICK
            arg = lam_t - r_t * vpx
            if fabs(arg) <= rho:
                mode_t = MODE_STICK
            elif vpx > 0.0:
                mode_t = MODE_SLIP_POS
            else:
                mode_t = MODE_SLIP_NEG

        qnx = qx + half * (vx + vpx)
        qny = qy + half * (vy + vpy)
        qx = qnx
        qy = qny
        vx = vpx
        vy = vpy
        t = t + dt

        out_t[i + 1] = t
        out_q[i + 1, 0] = qx
        out_q[i + 1, 1] = qy
        out_v[i + 1, 0] = vx
        out_v[i + 1, 1] = vy
        out_lam[i, 0] = lam_u
        out_lam[i, 1] = lam_t
        out_conv[i] = 1 if converged else 0
        out_iters[i] = iters
        out_modes[i, 0] = mode_u
        out_modes[i, 1] = mode_t

        if not (isfinite(qx) and isfinite(qy) and isfinite(vx) and isfinite(vy)):
            return i + 1, EXIT_NONFINITE
        if i >= suppress:
            stick_t = mode_t == MODE_STICK
            if stick_t and stop_first_stick:
                return i + 1, EXIT_EVENT
            if (
                stick_t and stop_impulse and fabs(vx) <= tol_v
                and fabs(qx) > tol_q and fabs(qx) <= act_bound
            ):
                return i + 1, EXIT_EVENT
    return n_steps, EXIT_DONE


def furuta_run(
    double[::1] q0, double[::1] v0, double t0, double dt, Py_ssize_t n_steps,
    # plant parameters
    double l1, double c1, double c2, double m1, double m2,
    double j1, double j2, double re1, double re2, double mu,
    double lb1s, double lb2s, double g,
    # stepper config
    double tol, int j_max, bint midpoint_forces,
    # feedback control u = -(ck1*(th1-ref) + ck2*td1 + ck3*wrap(th2-up) + ck4*td2)
    bint fb_on, double ck1, double ck2, double ck3, double ck4,
    double theta_ref, double theta_up,
    # event exits
    bint stop_first_stick1, bint stop_first_stick2, bint stop_impulse,
    double tol_q, double cos_min, double tol_v, Py_ssize_t suppress,
    # outputs (row 0 is the entry state, written by the caller)
    double[::1] out_t, double[:, ::1] out_q, double[:, ::1] out_v,
    double[:, ::1] out_lam, cnp.uint8_t[::1] out_conv,
    cnp.int32_t[::1] out_iters, cnp.int8_t[:, ::1] out_modes,
):
    cdef double th1 = q0[0], th2 = q0[1], td1 = v0[0], td2 = v0[1], t = t0
    cdef double half = 0.5 * dt
    # constant parameter combinations, evaluated exactly as the model does
    cdef double ca = j1 + m1 * c1 * c1 + m2 * l1 * l1
    cdef double cb = j2 + m2 * c2 * c2
    cdef double cc = m2 * l1 * c2
    cdef Py_ssize_t i
    cdef int j, iters
    cdef bint converged, stick1, stick2
    cdef double qm1, qm2, s, co, s2t, m00, m01, m11, det
    cdef double h0, h1, u0, n1f, n2f, fa, lb1, lb2, rho1, rho2
    cdef double b00, b01, b10, b11, r1, r2
    cdef double vf0, vf1, vp0, vp1, vt0, vt1, ve0, ve1
    cdef double lam1, lam2, new1, new2, diff, dv, arg, werr
    cdef double qn1, qn2
    cdef signed char mode1, mode2

    for i in range(n_steps):
        qm1 = th1 + half * td1
        qm2 = th2 + half * td2
        s = sin(qm2)
        co = cos(qm2)
        s2t = sin(2.0 * qm2)
        m00 = ca + cb * s * s
        m01 = cc * co
        m11 = cb
        if fb_on:
            werr = _wrap_err(th2, theta_up)
            u0 = -(ck1 * (th1 - theta_ref) + ck2 * td1 + ck3 * werr + ck4 * td2)
        else:
            u0 = 0.0
        # friction bounds from the midpoint configuration with entry rates
        n1f = (m1 + m2) * g + m2 * c2 * td2 * td2 * cos(qm2)
        n2f = m2 * l1 * td1 * td1
        fa = fabs(n1f)
        lb1 = fa if fa > lb1s else lb1s
        fa = fabs(n2f)
        lb2 = fa if fa > lb2s else lb2s
        rho1 = mu * lb1 * re1 * dt
        rho2 = mu * lb2 * re2 * dt

        # solve helper branches exactly as solve_spd
        if m01 == 0.0:
            det = 0.0
            b00 = 1.0 / m00
            b01 = 0.0
            b10 = 0.0
            b11 = 1.0 / m11
        else:
            det = m00 * m11 - m01 * m01
            b00 = (m11 * 1.0 - m01 * 0.0) / det
            b01 = (m11 * 0.0 - m01 * 1.0) / det
            b10 = (m00 * 0.0 - m01 * 1.0) / det
            b11 = (m00 * 1.0 - m01 * 0.0) / det
        r1 = 1.0 / b00
        r2 = 1.0 / b11

        h0 = td2 * td2 * cc * s - td1 * td2 * s2t * cb
        h1 = 0.5 * td1 * td1 * s2t * cb - g * m2 * c2 * s
        vf0, vf1 = _solve2(m01, m00, m11, det, (h0 + u0) * dt, (h1 + 0.0) * dt)
        vf0 = td1 + vf0
        vf1 = td2 + vf1

        lam1 = 0.0
        lam2 = 0.0
        converged = False
        diff = 0.0
        iters = 0
        vt0 = vf0
        vt1 = vf1
        j = 0
        while j < 2 * j_max:
            j += 1
            iters = j
            if midpoint_forces:
                ve0 = 0.5 * (td1 + vt0)
                ve1 = 0.5 * (td2 + vt1)
                h0 = ve1 * ve1 * cc * s - ve0 * ve1 * s2t * cb
                h1 = 0.5 * ve0 * ve0 * s2t * cb - g * m2 * c2 * s
                vf0, vf1 = _solve2(m01, m00, m11, det, (h0 + u0) * dt, (h1 + 0.0) * dt)
                vf0 = td1 + vf0
                vf1 = td2 + vf1
            vp0 = vf0 + (b00 * lam1 + b01 * lam2)
            vp1 = vf1 + (b10 * lam1 + b11 * lam2)
            diff = 0.0
            if midpoint_forces:
                if j > 1:
                    dv = fabs(vp0 - vt0)
                    if fabs(vp1 - vt1) > dv:
                        dv = fabs(vp1 - vt1)
                else:
                    dv = 2.0 * tol + 1.0
                if dv > diff:
                    diff = dv
            vt0 = vp0
            vt1 = vp1
            new1 = _prox_disc(lam1 - r1 * vp0, rho1)
            if fabs(new1 - lam1) > diff:
                diff = fabs(new1 - lam1)
            lam1 = new1
            new2 = _prox_disc(lam2 - r2 * vp1, rho2)
            if fabs(new2 - lam2) > diff:
                diff = fabs(new2 - lam2)
            lam2 = new2
            if diff < tol:
                converged = True
                break
            if j == j_max:
                r1 = 0.5 * r1
                r2 = 0.5 * r2

        if midpoint_forces:
            ve0 = 0.5 * (td1 + vt0)
            ve1 = 0.5 * (td2 + vt1)
            h0 = ve1 * ve1 * cc * s - ve0 * ve1 * s2t * cb
            h1 = 0.5 * ve0 * ve0 * s2t * cb - g * m2 * c2 * s
            vf0, vf1 = _solve2(m01, m00, m11, det, (h0 + u0) * dt, (h1 + 0.0) * dt)
            vf0 = td1 + vf0
            vf1 = td2 + vf1
        vp0 = vf0 + (b00 * lam1 + b01 * lam2)
        vp1 = vf1 + (b10 * lam1 + b11 * lam2)

        arg = lam1 - r1 * vp0
        if fabs(arg) <= rho1:
            mode1 = MODE_STICK
        elif vp0 > 0.0:
            mode1 = MODE_SLIP_POS
        else:
            mode1 = MODE_SLIP_NEG
        arg = lam2 - r2 * vp1
        if fabs(arg) <= rho2:
            mode2 = MODE_STICK
        elif vp1 > 0.0:
            mode2 = MODE_SLIP_POS
        else:
            mode2 = MODE_SLIP_NEG

        qn1 = th1 + half * (td1 + vp0)
        qn2 = th2 + half * (td2 + vp1)
        th1 = qn1
        th2 = qn2
        td1 = vp0
        td2 = vp1
        t = t + dt

        out_t[i + 1] = t
        out_q[i + 1, 0] = th1
        out_q[i + 1, 1] = th2
        out_v[i + 1, 0] = td1
        out_v[i + 1, 1] = td2
        out_lam[i, 0] = lam1
        out_lam[i, 1] = lam2
        out_conv[i] = 1 if converged else 0
        out_iters[i] = iters
        out_modes[i, 0] = mode1
        out_modes[i, 1] = mode2

        if not (isfinite(th1) and isfinite(th2) and isfinite(td1) and isfinite(td2)):
            return i + 1, EXIT_NONFINITE
        if i >= suppress:
            stick1 = mode1 == MODE_STICK
            stick2 = mode2 == MODE_STICK
            if (stick1 and stop_first_stick1) or (stick2 and stop_first_stick2):
                return i + 1, EXIT_EVENT
            if stop_impulse and (stick1 or stick2):
                werr = _wrap_err(th2, theta_up)
                if fabs(werr) > tol_q and fabs(cos(th2)) > cos_min:
                    return i + 1, EXIT_EVENT
    return n_steps, EXIT_DONE
