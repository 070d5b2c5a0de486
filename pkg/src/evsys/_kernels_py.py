"""Pure numpy implementation of the mass-action kernels.

Mirrors ``_kernels.pyx`` function for function.  Every routine writes into
caller-provided output arrays so the two backends are interchangeable.
"""
import numpy as np

# Dormand-Prince 5(4) tableau
C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
# fifth-order weights minus embedded fourth-order weights
E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

NAME = "python"


def _monomials(x, exps):
    return np.prod(np.power(x[None, :], exps), axis=1)


def fluxes(sigma, tau, a, b, x, fwd, rev):
    """Forward and reverse fluxes ``sigma_j M_j(x)`` and ``tau_j N_j(x)``."""
    fwd[:] = sigma * _monomials(x, a)
    rev[:] = tau * _monomials(x, b)


def rhs(sigma, tau, a, b, gamma, x, out):
    e = sigma * _monomials(x, a) - tau * _monomials(x, b)
    out[:] = gamma.T @ e


def _monomial_partials(x, exps):
    # d/dx_k prod_i x_i^e_i, evaluated without dividing by x_k
    m, n = exps.shape
    d = np.zeros((m, n))
    for k in range(n):
        ek = exps[:, k]
        rows = ek > 0
        if not rows.any():
            continue
        reduced = exps[rows].copy()
        reduced[:, k] -= 1
        d[rows, k] = ek[rows] * _monomials(x, reduced)
    return d


def jacobian(sigma, tau, a, b, gamma, x, out):
    de = sigma[:, None] * _monomial_partials(x, a) - tau[:, None] * _monomial_partials(x, b)
    out[:, :] = gamma.T @ de


def dopri_step(sigma, tau, a, b, gamma, x, h, k, y_new, err):
    """One Dormand-Prince step of size ``h`` from ``x``.

    ``k`` is a (7, n) work array whose first row must hold ``f(x)``; on
    return row 6 holds ``f(y_new)``.  ``err`` receives the embedded error
    estimate.
    """
    for s in range(1, 7):
        ys = x + h * (np.asarray(A[s]) @ k[:s])
        if s == 6:
            y_new[:] = ys
        rhs(sigma, tau, a, b, gamma, ys, k[s])
    err[:] = h * (np.asarray(E) @ k)
