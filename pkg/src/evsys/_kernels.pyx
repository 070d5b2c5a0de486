# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled mass-action kernels.  Same contract as ``_kernels_py``."""

NAME = "cython"

cdef double C_A[7][6]
cdef double C_E[7]

C_A[1][:1] = [1.0 / 5]
C_A[2][:2] = [3.0 / 40, 9.0 / 40]
C_A[3][:3] = [44.0 / 45, -56.0 / 15, 32.0 / 9]
C_A[4][:4] = [19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729]
C_A[5][:5] = [9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656]
C_A[6][:6] = [35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84]
C_E[:] = [71.0 / 57600, 0.0, -71.0 / 16695, 71.0 / 1920, -17253.0 / 339200, 22.0 / 525, -1.0 / 40]


cdef inline double ipow(double x, long long e) nogil:
    cdef double r = 1.0
    while e > 0:
        if e & 1:
            r *= x
        x *= x
        e >>= 1
    return r


cdef inline double monomial(const double[::1] x, const long long[:, ::1] exps, Py_ssize_t j) nogil:
    cdef Py_ssize_t i
    cdef double v = 1.0
    for i in range(x.shape[0]):
        if exps[j, i]:
            v *= ipow(x[i], exps[j, i])
    return v


cdef inline double monomial_partial(const double[::1] x, const long long[:, ::1] exps,
                                    Py_ssize_t j, Py_ssize_t k) nogil:
    cdef Py_ssize_t i
    cdef long long ek = exps[j, k]
    cdef double v
    if ek == 0:
        return 0.0
    v = <double>ek
    for i in range(x.shape[0]):
        if i == k:
            if ek > 1:
                v *= ipow(x[i], ek - 1)
        elif exps[j, i]:
            v *= ipow(x[i], exps[j, i])
    return v


cdef void _rhs(const double[::1] sigma, const double[::1] tau,
               const long long[:, ::1] a, const long long[:, ::1] b,
               const long long[:, ::1] gamma, const double[::1] x, double[::1] out) nogil:
    cdef Py_ssize_t i, j
    cdef Py_ssize_t m = gamma.shape[0], n = gamma.shape[1]
    cdef double e
    for i in range(n):
        out[i] = 0.0
    for j in range(m):
        e = sigma[j] * monomial(x, a, j) - tau[j] * monomial(x, b, j)
        for i in range(n):
            if gamma[j, i]:
                out[i] += gamma[j, i] * e


def fluxes(const double[::1] sigma, const double[::1] tau,
           const long long[:, ::1] a, const long long[:, ::1] b,
           const double[::1] x, double[::1] fwd, double[::1] rev):
    cdef Py_ssize_t j
    with nogil:
        for j in range(a.shape[0]):
            fwd[j] = sigma[j] * monomial(x, a, j)
            rev[j] = tau[j] * monomial(x, b, j)


def rhs(const double[::1] sigma, const double[::1] tau,
        const long long[:, ::1] a, const long long[:, ::1] b,
        const long long[:, ::1] gamma, const double[::1] x, double[::1] out):
    with nogil:
        _rhs(sigma, tau, a, b, gamma, x, out)


def jacobian(const double[::1] sigma, const double[::1] tau,
             const long long[:, ::1] a, const long long[:, ::1] b,
             const long long[:, ::1] gamma, const double[::1] x, double[:, ::1] out):
    cdef Py_ssize_t i, j, k
    cdef Py_ssize_t m = gamma.shape[0], n = gamma.shape[1]
    cdef double de
    with nogil:
        for i in range(n):
            for k in range(n):
                out[i, k] = 0.0
        for j in range(m):
            for k in range(n):
                de = sigma[j] * monomial_partial(x, a, j, k) - tau[j] * monomial_partial(x, b, j, k)
                if de == 0.0:
                    continue
                for i in range(n):
                    if gamma[j, i]:
                        out[i, k] += gamma[j, i] * de


def dopri_step(const double[::1] sigma, const double[::1] tau,
               const long long[:, ::1] a, const long long[:, ::1] b,
               const long long[:, ::1] gamma, const double[::1] x, double h,
               double[:, ::1] k, double[::1] y_new, double[::1] err):
    cdef Py_ssize_t s, r, i
    cdef Py_ssize_t n = x.shape[0]
    cdef double acc
    with nogil:
        for s in range(1, 7):
            for i in range(n):
                acc = 0.0
                for r in range(s):
                    acc += C_A[s][r] * k[r, i]
                y_new[i] = x[i] + h * acc
            _rhs(sigma, tau, a, b, gamma, y_new, k[s])
        for i in range(n):
            acc = 0.0
            for r in range(7):
                acc += C_E[r] * k[r, i]
            err[i] = h * acc
