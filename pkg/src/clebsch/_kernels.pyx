# Compiled twins of the kernels in _kernels_py.py; keep formulas in sync.

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, sqrt, fabs, INFINITY

cnp.import_array()

cdef enum:
    PEAKED = 0
    GAUSSIAN = 1

cdef double SQRT2 = sqrt(2.0)
cdef double INV_SQRT_2PI = 1.0 / sqrt(2.0 * 3.141592653589793)


cdef inline double _g(double r, int kind, double alpha) nogil:
    if kind == PEAKED:
        return exp(-r / alpha) / (2.0 * alpha)
    return exp(-0.5 * (r / alpha) * (r / alpha)) * (INV_SQRT_2PI / alpha)


def particle_rhs(Q_in, P_in, int kind, double alpha):
    cdef double[:, ::1] Q = np.ascontiguousarray(Q_in, dtype=np.float64)
    cdef double[:, ::1] P = np.ascontiguousarray(P_in, dtype=np.float64)
    cdef Py_ssize_t N = Q.shape[0], n = Q.shape[1]
    Qdot_arr = np.zeros((N, n))
    Pdot_arr = np.zeros((N, n))
    cdef double[:, ::1] Qdot = Qdot_arr
    cdef double[:, ::1] Pdot = Pdot_arr
    cdef Py_ssize_t i, j, k
    cdef double r, d, g, dg, pp, f
    cdef double g0 = _g(0.0, kind, alpha)
    with nogil:
        for i in range(N):
            for k in range(n):
                Qdot[i, k] = Qdot[i, k] + g0 * P[i, k]
            # each unordered pair once; the force is equal and opposite
            for j in range(i + 1, N):
                r = 0.0
                pp = 0.0
                for k in range(n):
                    d = Q[i, k] - Q[j, k]
                    r = r + d * d
                    pp = pp + P[i, k] * P[j, k]
                r = sqrt(r)
                g = _g(r, kind, alpha)
                for k in range(n):
                    Qdot[i, k] = Qdot[i, k] + g * P[j, k]
                    Qdot[j, k] = Qdot[j, k] + g * P[i, k]
                if r > 0.0:
                    if kind == PEAKED:
                        dg = -g / alpha
                    else:
                        dg = -(r / (alpha * alpha)) * g
                    for k in range(n):
                        f = pp * dg * ((Q[i, k] - Q[j, k]) / r)
                        Pdot[i, k] = Pdot[i, k] - f
                        Pdot[j, k] = Pdot[j, k] + f
    return Qdot_arr, Pdot_arr


def particle_hamiltonian(Q_in, P_in, int kind, double alpha):
    cdef double[:, ::1] Q = np.ascontiguousarray(Q_in, dtype=np.float64)
    cdef double[:, ::1] P = np.ascontiguousarray(P_in, dtype=np.float64)
    cdef Py_ssize_t N = Q.shape[0], n = Q.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double r, d, pp, total = 0.0
    with nogil:
        for i in range(N):
            for j in range(N):
                r = 0.0
                pp = 0.0
                for k in range(n):
                    d = Q[i, k] - Q[j, k]
                    r = r + d * d
                    pp = pp + P[i, k] * P[j, k]
                total = total + pp * _g(sqrt(r), kind, alpha)
    return 0.5 * total


def velocity_at(Q_in, P_in, X_in, int kind, double alpha):
    cdef double[:, ::1] Q = np.ascontiguousarray(Q_in, dtype=np.float64)
    cdef double[:, ::1] P = np.ascontiguousarray(P_in, dtype=np.float64)
    cdef double[:, ::1] X = np.ascontiguousarray(X_in, dtype=np.float64)
    cdef Py_ssize_t N = Q.shape[0], n = Q.shape[1], M = X.shape[0]
    out_arr = np.zeros((M, n))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t a, j, k
    cdef double r, d, g
    with nogil:
        for a in range(M):
            for j in range(N):
                r = 0.0
                for k in range(n):
                    d = X[a, k] - Q[j, k]
                    r = r + d * d
                g = _g(sqrt(r), kind, alpha)
                for k in range(n):
                    out[a, k] = out[a, k] + g * P[j, k]
    return out_arr


cdef inline void _cross(double* a, double* b, double* out) nogil:
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]


cdef int _cayley_fixed_point(double* m_prev, double* inv_i, double h, double tol,
                             int max_iter, double* m_out, double* res_out) nogil:
    cdef double x[3]
    cdef double c[3]
    cdef double m[3]
    cdef double mn[3]
    cdef double cr[3]
    cdef double xm, res, nrm, scale
    cdef int i, k
    for i in range(3):
        x[i] = m_prev[i] * inv_i[i]
    _cross(m_prev, x, cr)
    xm = x[0] * m_prev[0] + x[1] * m_prev[1] + x[2] * m_prev[2]
    for i in range(3):
        c[i] = m_prev[i] + 0.5 * h * cr[i] + 0.25 * h * h * xm * x[i]
        m[i] = m_prev[i]
    res = INFINITY
    for k in range(1, max_iter + 1):
        for i in range(3):
            x[i] = m[i] * inv_i[i]
        _cross(m, x, cr)
        xm = x[0] * m[0] + x[1] * m[1] + x[2] * m[2]
        res = 0.0
        nrm = 0.0
        for i in range(3):
            mn[i] = c[i] + 0.5 * h * cr[i] - 0.25 * h * h * xm * x[i]
            res = res + (mn[i] - m[i]) * (mn[i] - m[i])
            nrm = nrm + mn[i] * mn[i]
        res = SQRT2 * sqrt(res)
        scale = SQRT2 * sqrt(nrm)
        if scale < 1.0:
            scale = 1.0
        for i in range(3):
            m[i] = mn[i]
        if res <= tol * scale:
            for i in range(3):
                m_out[i] = m[i]
            res_out[0] = res
            return k
    for i in range(3):
        m_out[i] = m[i]
    res_out[0] = res
    return -max_iter


def cayley_rb_solve(m_prev_in, inv_inertia_in, double h, double tol, int max_iter):
    cdef double[::1] m_prev = np.ascontiguousarray(m_prev_in, dtype=np.float64)
    cdef double[::1] inv_i = np.ascontiguousarray(inv_inertia_in, dtype=np.float64)
    out_arr = np.empty(3)
    cdef double[::1] out = out_arr
    cdef double res
    cdef int k = _cayley_fixed_point(&m_prev[0], &inv_i[0], h, tol, max_iter, &out[0], &res)
    return out_arr, k, res


cdef void _cay_hat_right(double* Q, double* w, double* out) nogil:
    # out = Q @ cay(hat(w)), row-major 3x3
    cdef double W[9]
    cdef double C[9]
    cdef double f
    cdef int i, j, k
    W[0] = 0.0;   W[1] = -w[2]; W[2] = w[1]
    W[3] = w[2];  W[4] = 0.0;   W[5] = -w[0]
    W[6] = -w[1]; W[7] = w[0];  W[8] = 0.0
    f = 4.0 / (4.0 + w[0] * w[0] + w[1] * w[1] + w[2] * w[2])
    for i in range(3):
        for j in range(3):
            C[3 * i + j] = 0.0
            for k in range(3):
                C[3 * i + j] = C[3 * i + j] + W[3 * i + k] * W[3 * k + j]
    for i in range(9):
        C[i] = f * (W[i] + 0.5 * C[i])
    C[0] = C[0] + 1.0
    C[4] = C[4] + 1.0
    C[8] = C[8] + 1.0
    for i in range(3):
        for j in range(3):
            out[3 * i + j] = 0.0
            for k in range(3):
                out[3 * i + j] = out[3 * i + j] + Q[3 * i + k] * C[3 * k + j]


def cayley_rb_trajectory(m0, Q0, inv_inertia_in, double h, Py_ssize_t n_steps,
                         double tol, int max_iter):
    cdef double[::1] inv_i = np.ascontiguousarray(inv_inertia_in, dtype=np.float64)
    M_arr = np.empty((n_steps + 1, 3))
    Q_arr = np.empty((n_steps + 1, 3, 3))
    it_arr = np.zeros(n_steps, dtype=np.int64)
    M_arr[0] = m0
    Q_arr[0] = Q0
    cdef double[:, ::1] M = M_arr
    cdef double[:, :, ::1] Qs = Q_arr
    cdef long long[::1] iters = it_arr
    cdef double w[3]
    cdef double res
    cdef Py_ssize_t n
    cdef int i, k
    cdef Py_ssize_t failed = -1
    with nogil:
        for n in range(n_steps):
            for i in range(3):
                w[i] = h * M[n, i] * inv_i[i]
            _cay_hat_right(&Qs[n, 0, 0], w, &Qs[n + 1, 0, 0])
            k = _cayley_fixed_point(&M[n, 0], &inv_i[0], h, tol, max_iter, &M[n + 1, 0], &res)
            if k < 0:
                failed = n
                break
            iters[n] = k
    if failed >= 0:
        return M_arr[: failed + 1], Q_arr[: failed + 1], it_arr[:failed], failed
    return M_arr, Q_arr, it_arr, -1
