# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_kernels_py``.

Signatures and return types match the numpy fallback one for one; results
agree with it to round-off (loop order differs from BLAS).
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport acos, cos, exp, fabs, sin, sqrt, tanh, M_PI

cnp.import_array()

BACKEND = "compiled"


cdef inline void _log3(double* E, double* out) noexcept nogil:
    # E is row-major 3x3
    cdef double c = 0.5 * (E[0] + E[4] + E[8] - 1.0)
    cdef double theta, f, n, bkk
    cdef int k, i
    if c > 1.0:
        c = 1.0
    elif c < -1.0:
        c = -1.0
    theta = acos(c)
    out[0] = E[3 * 2 + 1] - E[3 * 1 + 2]
    out[1] = E[3 * 0 + 2] - E[3 * 2 + 0]
    out[2] = E[3 * 1 + 0] - E[3 * 0 + 1]
    if theta < 1e-8:
        out[0] *= 0.5
        out[1] *= 0.5
        out[2] *= 0.5
    elif M_PI - theta < 1e-6:
        k = 0
        for i in range(1, 3):
            if E[3 * i + i] > E[3 * k + k]:
                k = i
        bkk = 0.5 * (E[3 * k + k] + 1.0)
        if bkk < 1e-300:
            bkk = 1e-300
        for i in range(3):
            out[i] = 0.5 * (E[3 * i + k] + (1.0 if i == k else 0.0)) / sqrt(bkk)
        n = sqrt(out[0] * out[0] + out[1] * out[1] + out[2] * out[2])
        for i in range(3):
            out[i] = theta * out[i] / n
    else:
        f = theta / (2.0 * sin(theta))
        out[0] *= f
        out[1] *= f
        out[2] *= f


cdef inline void _exp3(double* phi, double* Rout) noexcept nogil:
    # Rout is row-major 3x3
    cdef double theta = sqrt(phi[0] * phi[0] + phi[1] * phi[1] + phi[2] * phi[2])
    cdef double s, c
    cdef double K[9]
    cdef double K2[9]
    cdef int i, j, l
    K[0] = 0.0; K[1] = -phi[2]; K[2] = phi[1]
    K[3] = phi[2]; K[4] = 0.0; K[5] = -phi[0]
    K[6] = -phi[1]; K[7] = phi[0]; K[8] = 0.0
    for i in range(3):
        for j in range(3):
            K2[3 * i + j] = 0.0
            for l in range(3):
                K2[3 * i + j] += K[3 * i + l] * K[3 * l + j]
    if theta < 1e-8:
        s = 1.0
        c = 0.5
    else:
        s = sin(theta) / theta
        c = (1.0 - cos(theta)) / (theta * theta)
    for i in range(9):
        Rout[i] = s * K[i] + c * K2[i]
    Rout[0] += 1.0
    Rout[4] += 1.0
    Rout[8] += 1.0


cdef void _relax(double[:, ::1] R, double[:, ::1] R_des, double alpha,
                 double[:, ::1] out) noexcept nogil:
    cdef double phi[3]
    cdef double X[9]
    cdef double Rn[9]
    cdef double S[9]
    cdef int i, j, l
    cdef double E[9]
    if alpha >= 1.0:
        for i in range(3):
            for j in range(3):
                out[i, j] = R_des[i, j]
        return
    for i in range(3):
        for j in range(3):
            E[3 * i + j] = 0.0
            for l in range(3):
                E[3 * i + j] += R[l, i] * R_des[l, j]
    _log3(E, phi)
    phi[0] *= alpha
    phi[1] *= alpha
    phi[2] *= alpha
    _exp3(phi, X)
    for i in range(3):
        for j in range(3):
            Rn[3 * i + j] = 0.0
            for l in range(3):
                Rn[3 * i + j] += R[i, l] * X[3 * l + j]
    # S = 3I - Rn^T Rn
    for i in range(3):
        for j in range(3):
            S[3 * i + j] = 0.0
            for l in range(3):
                S[3 * i + j] -= Rn[3 * l + i] * Rn[3 * l + j]
    S[0] += 3.0
    S[4] += 3.0
    S[8] += 3.0
    for i in range(3):
        for j in range(3):
            out[i, j] = 0.0
            for l in range(3):
                out[i, j] += 0.5 * Rn[3 * i + l] * S[3 * l + j]


def so3_log(E):
    cdef double[:, ::1] Ev = np.ascontiguousarray(E, dtype=np.float64)
    cdef double Eb[9]
    cdef double phi[3]
    cdef int i, j
    for i in range(3):
        for j in range(3):
            Eb[3 * i + j] = Ev[i, j]
    _log3(Eb, phi)
    return np.array([phi[0], phi[1], phi[2]])


def so3_exp(phi):
    cdef double[::1] pv = np.ascontiguousarray(phi, dtype=np.float64)
    cdef double p[3]
    cdef double X[9]
    p[0] = pv[0]; p[1] = pv[1]; p[2] = pv[2]
    _exp3(p, X)
    return np.array([[X[0], X[1], X[2]], [X[3], X[4], X[5]], [X[6], X[7], X[8]]])


def relax_attitude(R, R_des, double alpha):
    cdef double[:, ::1] Rv = np.ascontiguousarray(R, dtype=np.float64)
    cdef double[:, ::1] Dv = np.ascontiguousarray(R_des, dtype=np.float64)
    out = np.empty((3, 3))
    cdef double[:, ::1] ov = out
    _relax(Rv, Dv, alpha, ov)
    return out


def vehicle_step(p, v, R, R_des, double thrust, double mass, f_ext, double dt,
                 double tau_att, double g):
    cdef double[::1] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef double[::1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef double[::1] fv = np.ascontiguousarray(f_ext, dtype=np.float64)
    cdef double[:, ::1] Rv = np.ascontiguousarray(R, dtype=np.float64)
    cdef double[:, ::1] Dv = np.ascontiguousarray(R_des, dtype=np.float64)
    cdef double alpha = 1.0 if tau_att <= 0.0 else 1.0 - exp(-dt / tau_att)
    cdef double alpha_mid = 1.0 if tau_att <= 0.0 else 1.0 - exp(-0.5 * dt / tau_att)
    R_mid = np.empty((3, 3))
    cdef double[:, ::1] Rm = R_mid
    R_new = np.empty((3, 3))
    p_new = np.empty(3)
    v_new = np.empty(3)
    cdef double[:, ::1] Rn = R_new
    cdef double[::1] pn = p_new
    cdef double[::1] vn = v_new
    cdef double acc
    cdef double ts = thrust / mass
    cdef int i
    _relax(Rv, Dv, alpha, Rn)
    _relax(Rv, Dv, alpha_mid, Rm)
    for i in range(3):
        acc = -Rm[i, 2] * ts + fv[i]
        if i == 2:
            acc = -Rm[i, 2] * ts + g + fv[i]
        vn[i] = vv[i] + acc * dt
        pn[i] = pv[i] + 0.5 * (vv[i] + vn[i]) * dt
    return p_new, v_new, R_new


def thrust_attitude(a_cmd, double yaw, double mass, double g, double eps):
    cdef double[::1] av = np.ascontiguousarray(a_cmd, dtype=np.float64)
    cdef double t0 = -av[0], t1 = -av[1], t2 = g - av[2]
    cdef double n = sqrt(t0 * t0 + t1 * t1 + t2 * t2)
    cdef bint saturated = False
    cdef double b3[3]
    cdef double b2[3]
    cdef double b1[3]
    cdef double xc0 = cos(yaw), xc1 = sin(yaw)
    cdef double nb
    if n < eps:
        saturated = True
        if n < 1e-12:
            t0 = 0.0; t1 = 0.0; t2 = eps
        else:
            t0 *= eps / n; t1 *= eps / n; t2 *= eps / n
        n = eps
    b3[0] = t0 / n; b3[1] = t1 / n; b3[2] = t2 / n
    # b2 = b3 x xc, xc = (cos, sin, 0)
    b2[0] = -b3[2] * xc1
    b2[1] = b3[2] * xc0
    b2[2] = b3[0] * xc1 - b3[1] * xc0
    nb = sqrt(b2[0] * b2[0] + b2[1] * b2[1] + b2[2] * b2[2])
    if nb < 1e-9:
        # b1 = yc x b3, yc = (-sin, cos, 0)
        b1[0] = xc0 * b3[2]
        b1[1] = xc1 * b3[2]
        b1[2] = -xc1 * b3[1] - xc0 * b3[0]
        nb = sqrt(b1[0] * b1[0] + b1[1] * b1[1] + b1[2] * b1[2])
        b1[0] /= nb; b1[1] /= nb; b1[2] /= nb
        b2[0] = b3[1] * b1[2] - b3[2] * b1[1]
        b2[1] = b3[2] * b1[0] - b3[0] * b1[2]
        b2[2] = b3[0] * b1[1] - b3[1] * b1[0]
    else:
        b2[0] /= nb; b2[1] /= nb; b2[2] /= nb
        b1[0] = b2[1] * b3[2] - b2[2] * b3[1]
        b1[1] = b2[2] * b3[0] - b2[0] * b3[2]
        b1[2] = b2[0] * b3[1] - b2[1] * b3[0]
    R_des = np.array([[b1[0], b2[0], b3[0]],
                      [b1[1], b2[1], b3[1]],
                      [b1[2], b2[2], b3[2]]])
    return R_des, mass * n, bool(saturated)


def downwash_mean(dp, double w0, double z_c, double sigma0, double k_spread,
                  double c_a, double lambda_r):
    cdef double[::1] d = np.ascontiguousarray(dp, dtype=np.float64)
    cdef double dz = d[2]
    cdef double r2, sigma, w, axial, radial
    if dz <= 0.0:
        return np.zeros(3)
    r2 = d[0] * d[0] + d[1] * d[1]
    sigma = sigma0 + k_spread * dz
    w = w0 * z_c / (z_c + dz) * exp(-r2 / (2.0 * sigma * sigma))
    axial = c_a * w * w
    radial = lambda_r * axial / sigma
    return np.array([radial * d[0], radial * d[1], axial])


def pendulum_step(q, w, anchor_acc, double d_p, double damping, double g, double dt):
    cdef double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    cdef double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef double[::1] av = np.ascontiguousarray(anchor_acc, dtype=np.float64)
    cdef double n[3]
    cdef double a[3]
    cdef double qn[3]
    cdef double wn[3]
    cdef double nq = sqrt(qv[0] * qv[0] + qv[1] * qv[1] + qv[2] * qv[2])
    cdef double an, ww, s
    cdef int i
    for i in range(3):
        n[i] = qv[i] / nq
        a[i] = -av[i] - damping * wv[i]
    a[2] += g
    an = a[0] * n[0] + a[1] * n[1] + a[2] * n[2]
    ww = (wv[0] * wv[0] + wv[1] * wv[1] + wv[2] * wv[2]) / d_p
    for i in range(3):
        a[i] = a[i] - an * n[i] - ww * n[i]
        wn[i] = wv[i] + a[i] * dt
        qn[i] = qv[i] + wn[i] * dt
    s = sqrt(qn[0] * qn[0] + qn[1] * qn[1] + qn[2] * qn[2])
    for i in range(3):
        qn[i] = qn[i] * (d_p / s)
        n[i] = qn[i] / d_p
    s = wn[0] * n[0] + wn[1] * n[1] + wn[2] * n[2]
    for i in range(3):
        wn[i] = wn[i] - s * n[i]
    return np.array([qn[0], qn[1], qn[2]]), np.array([wn[0], wn[1], wn[2]])


def mlp_forward(h, W1, b1, W2, b2, W3, b3):
    cdef double[::1] hv = np.ascontiguousarray(h, dtype=np.float64)
    cdef double[:, ::1] w1 = np.ascontiguousarray(W1, dtype=np.float64)
    cdef double[::1] c1 = np.ascontiguousarray(b1, dtype=np.float64)
    cdef double[:, ::1] w2 = np.ascontiguousarray(W2, dtype=np.float64)
    cdef double[::1] c2 = np.ascontiguousarray(b2, dtype=np.float64)
    cdef double[:, ::1] w3 = np.ascontiguousarray(W3, dtype=np.float64)
    cdef double[::1] c3 = np.ascontiguousarray(b3, dtype=np.float64)
    cdef Py_ssize_t n0 = w1.shape[1], n1 = w1.shape[0], n2 = w2.shape[0], n3 = w3.shape[0]
    cdef Py_ssize_t i, j
    cdef double s
    z1 = np.empty(n1)
    z2 = np.empty(n2)
    out = np.empty(n3)
    cdef double[::1] z1v = z1
    cdef double[::1] z2v = z2
    cdef double[::1] ov = out
    for i in range(n1):
        s = c1[i]
        for j in range(n0):
            s += w1[i, j] * hv[j]
        z1v[i] = tanh(s)
    for i in range(n2):
        s = c2[i]
        for j in range(n1):
            s += w2[i, j] * z1v[j]
        z2v[i] = tanh(s)
    for i in range(n3):
        s = c3[i]
        for j in range(n2):
            s += w3[i, j] * z2v[j]
        ov[i] = s
    return out
