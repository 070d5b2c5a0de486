"""Positive strong equilibria and the Lyapunov function.

A base equilibrium ``c*`` solves ``Gamma alpha = ln(sigma/tau)`` in log
space.  Every other positive strong equilibrium is ``c* * exp(K y)`` with
``K`` a right-kernel basis of ``Gamma``, and the one in the conservation
class of ``p`` minimises the strictly convex function

    phi(y) = sum_i c*_i exp((K y)_i) - p . (K y)

whose gradient ``K^T (c - p)`` vanishes exactly when ``c`` and ``p`` agree
on every conservation law.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .analysis import wegscheider_check
from .core import DimensionError, EventSystem, EventSystemError, stoichiometric_matrix
from .linalg import least_squares_solve, right_kernel

logger = logging.getLogger(__name__)

__all__ = [
    "NotNaturalError",
    "ClassError",
    "ConvergenceError",
    "EquilibriumOptions",
    "EquilibriumResult",
    "base_strong_equilibrium",
    "detailed_balance_residual",
    "class_residual",
    "ClassObjective",
    "class_objective",
    "class_equilibrium",
    "LyapunovValue",
    "lyapunov_value",
    "orbital_derivative",
]


class NotNaturalError(EventSystemError):
    """The system has an energy cycle, so no positive strong equilibrium exists."""


class ClassError(ValueError):
    """The conservation class is not represented by a positive point."""


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, iterations: int, gradient_norm: float):
        super().__init__(f"{message} (iterations={iterations}, |grad|_inf={gradient_norm:.3e})")
        self.iterations = iterations
        self.gradient_norm = gradient_norm


@dataclass(frozen=True)
class EquilibriumOptions:
    grad_tol: float = 1e-12  # relative to 1 + |p|_inf
    max_iter: int = 200
    armijo_c1: float = 1e-4
    backtrack: float = 0.5
    polish_tol: float = 1e-12
    polish_iter: int = 5


@dataclass(frozen=True)
class EquilibriumResult:
    c: np.ndarray
    detailed_balance_residual: float
    class_residual: float
    iterations: int
    gradient_norm: float = 0.0
    cholesky_checks: int = 0
    options: EquilibriumOptions = field(default_factory=EquilibriumOptions, compare=False)


def _log_ratios(E: EventSystem) -> np.ndarray:
    return np.array(
        [np.log(e.sigma.numerator) - np.log(e.sigma.denominator)
         - np.log(e.tau.numerator) + np.log(e.tau.denominator) for e in E.events]
    )


def _positive_state(E: EventSystem, x, what: str, strict: bool) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (E.dimension,):
        raise DimensionError(f"{what} has shape {x.shape}, expected ({E.dimension},)")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{what} has non-finite entries")
    if strict and not np.all(x > 0):
        raise ValueError(f"{what} must be strictly positive")
    if not strict and np.any(x < 0):
        raise ValueError(f"{what} must be non-negative")
    return x


def detailed_balance_residual(E: EventSystem, c) -> float:
    """``max_j |sigma_j M_j(c) - tau_j N_j(c)| / max(sigma_j M_j(c), tau_j N_j(c))``."""
    arr = E.arrays
    logc = np.log(np.asarray(c, dtype=float))
    fwd = arr.sigma * np.exp(arr.a @ logc)
    rev = arr.tau * np.exp(arr.b @ logc)
    return float(np.max(np.abs(fwd - rev) / np.maximum(fwd, rev)))


def class_residual(K: np.ndarray, c, p) -> float:
    """Worst scaled violation ``|v.(c - p)|`` over the columns ``v`` of ``K``."""
    if K.shape[1] == 0:
        return 0.0
    c = np.asarray(c, dtype=float)
    p = np.asarray(p, dtype=float)
    size = max(np.max(np.abs(c)), np.max(np.abs(p)))
    diff = np.abs(K.T @ (c - p))
    return float(np.max(diff / (1.0 + np.abs(K).sum(axis=0) * size)))


def base_strong_equilibrium(E: EventSystem, options: EquilibriumOptions | None = None) -> np.ndarray:
    """A positive strong equilibrium ``c* = exp(alpha)``.

    ``alpha`` is the minimum-norm least-squares solution of
    ``Gamma alpha = ln(sigma/tau)``, refined by a few Gauss-Newton passes
    on the event log-residuals ``ln(sigma_j M_j) - ln(tau_j N_j)`` when
    round-off leaves the detailed-balance residual above ``polish_tol``.

    Raises
    ------
    NotNaturalError
        If an energy cycle exists (checked exactly).
    """
    opts = options or EquilibriumOptions()
    verdict = wegscheider_check(E)
    if not verdict.natural:
        cyc = verdict.energy_cycles[0]
        raise NotNaturalError(
            f"energy cycle {cyc.vector} with rate product {cyc.exact_product}; "
            "no positive strong equilibrium exists"
        )
    G = stoichiometric_matrix(E).astype(float)
    b = _log_ratios(E)
    alpha, _ = least_squares_solve(G, b)
    for _ in range(opts.polish_iter):
        if detailed_balance_residual(E, np.exp(alpha)) <= opts.polish_tol:
            break
        delta, _ = least_squares_solve(G, b - G @ alpha)
        alpha = alpha + delta
    return np.exp(alpha)


@dataclass(frozen=True)
class ClassObjective:
    """``phi``, its gradient and Hessian in kernel coordinates."""

    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    hessian: Callable[[np.ndarray], np.ndarray]
    state: Callable[[np.ndarray], np.ndarray]


def class_objective(c_star, K, p) -> ClassObjective:
    c_star = np.asarray(c_star, dtype=float)
    K = np.asarray(K, dtype=float)
    p = np.asarray(p, dtype=float)

    def state(y):
        return c_star * np.exp(K @ y)

    def value(y):
        z = K @ y
        with np.errstate(over="ignore"):
            return float(np.sum(c_star * np.exp(z)) - p @ z)

    def gradient(y):
        return K.T @ (state(y) - p)

    def hessian(y):
        return K.T @ (state(y)[:, None] * K)

    return ClassObjective(value, gradient, hessian, state)


def class_equilibrium(
    E: EventSystem,
    c_star,
    p,
    options: EquilibriumOptions | None = None,
) -> EquilibriumResult:
    """The unique positive strong equilibrium in the conservation class of ``p``.

    Newton's method on ``phi`` with a Cholesky-factored Hessian and an
    Armijo backtracking line search.  Stops when
    ``|grad phi|_inf <= grad_tol * (1 + |p|_inf)``.

    Raises
    ------
    ClassError
        If ``p`` is not strictly positive.
    ConvergenceError
        If the iteration cap is hit or the line search stalls.
    """
    opts = options or EquilibriumOptions()
    c_star = _positive_state(E, c_star, "c_star", strict=True)
    try:
        p = _positive_state(E, p, "p", strict=True)
    except ValueError as exc:
        raise ClassError(str(exc)) from None
    K = right_kernel(stoichiometric_matrix(E)).as_array()
    if K.shape[1] == 0:
        return EquilibriumResult(
            c_star.copy(), detailed_balance_residual(E, c_star), 0.0, 0, 0.0, 0, opts
        )

    obj = class_objective(c_star, K, p)
    tol = opts.grad_tol * (1.0 + np.max(np.abs(p)))
    y = np.zeros(K.shape[1])
    f = obj.value(y)
    g = obj.gradient(y)
    checks = 0
    it = 0
    while np.max(np.abs(g)) > tol:
        if it >= opts.max_iter:
            raise ConvergenceError("Newton iteration cap reached", it, float(np.max(np.abs(g))))
        H = obj.hessian(y)
        L = np.linalg.cholesky(H)  # raises LinAlgError if not positive definite
        checks += 1
        d = -np.linalg.solve(L.T, np.linalg.solve(L, g))
        slope = float(g @ d)
        slack = 8 * np.finfo(float).eps * (abs(f) + np.sum(c_star * np.exp(K @ y)))
        t = 1.0
        while True:
            y_new = y + t * d
            f_new = obj.value(y_new)
            if np.isfinite(f_new) and f_new <= f + opts.armijo_c1 * t * slope + slack:
                break
            t *= opts.backtrack
            if t < 1e-20:
                raise ConvergenceError("line search stalled", it, float(np.max(np.abs(g))))
        g_new = obj.gradient(y_new)
        it += 1
        if f_new >= f and np.max(np.abs(g_new)) >= np.max(np.abs(g)):
            # no progress possible at this precision
            raise ConvergenceError("stalled at round-off level", it, float(np.max(np.abs(g))))
        y, f, g = y_new, f_new, g_new

    c = obj.state(y)
    return EquilibriumResult(
        c,
        detailed_balance_residual(E, c),
        class_residual(K, c, p),
        it,
        float(np.max(np.abs(g))),
        checks,
        opts,
    )


@dataclass(frozen=True)
class LyapunovValue:
    value: float
    gradient: np.ndarray | None = None


def lyapunov_value(E: EventSystem, c, x) -> LyapunovValue:
    """``g(x) = sum_i x_i (ln x_i - 1 - ln c_i) + c_i``.

    Zero components contribute ``c_i``.  The gradient ``ln(x_i / c_i)`` is
    returned only when ``x`` is strictly positive.
    """
    c = _positive_state(E, c, "c", strict=True)
    x = _positive_state(E, x, "x", strict=False)
    pos = x > 0
    terms = c.copy()
    xp = x[pos]
    terms[pos] = xp * (np.log(xp) - 1.0 - np.log(c[pos])) + c[pos]
    grad = np.log(x / c) if np.all(pos) else None
    return LyapunovValue(float(np.sum(terms)), grad)


def orbital_derivative(E: EventSystem, c, x) -> float:
    """Derivative of ``g`` along the mass-action flow at a positive ``x``:
    ``sum_j (sigma_j M_j - tau_j N_j) ln(tau_j N_j / sigma_j M_j)``.

    Never positive; zero exactly at strong equilibria.
    """
    _positive_state(E, c, "c", strict=True)
    x = _positive_state(E, x, "x", strict=True)
    arr = E.arrays
    logx = np.log(x)
    lf = np.log(arr.sigma) + arr.a @ logx
    lr = np.log(arr.tau) + arr.b @ logx
    return float(np.sum((np.exp(lf) - np.exp(lr)) * (lr - lf)))
