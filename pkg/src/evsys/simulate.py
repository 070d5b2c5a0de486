"""Mass-action ODE integration with invariant monitoring.

The default integrator is the Dormand-Prince 5(4) pair (first-same-as-last,
PI step control, quartic dense output).  Each accepted step is checked for
positivity, drift of every conservation law and growth of the Lyapunov
function; worst cases over all steps are kept in :class:`StepStats`, and
full monitor rows are kept at the sample times.

A-stable implicit midpoint with Newton iterations and step-doubling error
control is available as ``method="implicit-midpoint"`` for stiff systems.
"""
from __future__ import annotations

import csv
import enum
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from ._backend import kernels
from .analysis import AtomicityStatus, check_atomicity, wegscheider_check
from .core import DimensionError, EventSystem, mass_action_rhs, rhs_jacobian, stoichiometric_matrix
from .equilibrium import base_strong_equilibrium, class_equilibrium, lyapunov_value
from .linalg import right_kernel

logger = logging.getLogger(__name__)

__all__ = [
    "NegativityPolicy",
    "SimOptions",
    "StepStats",
    "Trajectory",
    "TrajectoryStatus",
    "IntegrationError",
    "StiffnessError",
    "integrate",
    "Crosscheck",
    "EquilibriumRun",
    "simulate_to_equilibrium",
    "MonitorReport",
    "run_monitors",
    "write_trajectory_csv",
    "equilibrium_threshold",
    "DENSE_P",
]

# Quartic dense-output coefficients for the 5(4) pair (Shampine's).
DENSE_P = np.array(
    [
        [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

_SAFETY = 0.9
_PI_ALPHA = 0.7 / 5
_PI_BETA = 0.4 / 5
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0


class NegativityPolicy(enum.Enum):
    REJECT = "reject"  # reject the step and halve h
    CLAMP = "clamp"  # floor at zero, counted in StepStats


@dataclass(frozen=True)
class SimOptions:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    t_end: float = 10.0
    max_steps: int = 200_000
    equilibrium_tol: float = 1e-9
    negativity_policy: NegativityPolicy = NegativityPolicy.REJECT
    method: str = "auto"
    stall_window: int = 500
    n_samples: int = 200
    sample_times: tuple[float, ...] | None = None
    first_step: float | None = None

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if self.max_steps <= 0 or self.n_samples < 2:
            raise ValueError("max_steps must be positive and n_samples at least 2")
        if self.equilibrium_tol < 0:
            raise ValueError("equilibrium_tol must be non-negative")
        if self.method not in ("auto", "dopri5", "implicit-midpoint"):
            raise ValueError(f"unknown method {self.method!r}")
        if isinstance(self.negativity_policy, str):
            object.__setattr__(self, "negativity_policy", NegativityPolicy(self.negativity_policy))

    def grid(self) -> np.ndarray:
        """Sample times: the explicit list, or 0 plus a geometric grid up to t_end."""
        if self.sample_times is not None:
            ts = np.unique(np.asarray(self.sample_times, dtype=float))
            if ts.size and (ts[0] < 0 or ts[-1] > self.t_end):
                raise ValueError("sample times must lie in [0, t_end]")
            return ts[ts > 0]
        return np.geomspace(self.t_end * 1e-6, self.t_end, self.n_samples - 1)


class TrajectoryStatus(enum.Enum):
    COMPLETED = "completed"  # reached t_end
    EQUILIBRIUM = "equilibrium"  # stopped on the residual threshold
    MAX_STEPS = "max-steps"


@dataclass
class StepStats:
    """Worst cases over every accepted step, not only the samples."""

    accepted: int = 0
    rejected: int = 0
    negativity_rejections: int = 0
    clamped: int = 0
    min_component: float = math.inf
    max_component: float = 0.0
    max_drift: float = 0.0
    max_lyapunov_increase: float = 0.0
    min_step: float = math.inf
    max_step: float = 0.0


@dataclass
class Trajectory:
    species: tuple[str, ...]
    times: np.ndarray
    states: np.ndarray  # (k, n)
    min_component: np.ndarray
    conservation_drift: np.ndarray  # (k, r), v.(x(t) - x0) per kernel column v
    lyapunov: np.ndarray  # nan when unavailable
    rhs_norm: np.ndarray
    kernel: np.ndarray  # (n, r)
    lyapunov_center: np.ndarray | None
    step_stats: StepStats
    status: TrajectoryStatus
    options: SimOptions
    switched_at: float | None = None  # time of the move to implicit midpoint

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def final_time(self) -> float:
        return float(self.times[-1])


class IntegrationError(RuntimeError):
    def __init__(self, message: str, t: float, state: np.ndarray, trajectory: Trajectory | None = None):
        super().__init__(f"{message} at t={t!r}")
        self.t = t
        self.state = state
        self.trajectory = trajectory


class StiffnessError(IntegrationError):
    """Step size underflow; carries the last accepted state."""


def equilibrium_threshold(E: EventSystem, x, tol: float) -> float:
    return tol * max(1.0, float(np.max(np.abs(x)))) * E.max_rate


def _lyapunov_center(E: EventSystem, x0: np.ndarray) -> np.ndarray | None:
    """A strong equilibrium to centre the Lyapunov function on, if one exists.

    Uses the equilibrium of the class of ``x0`` when ``x0`` is positive so
    that ``g`` tends to 0 along the flow.
    """
    if not wegscheider_check(E).natural:
        return None
    c_star = base_strong_equilibrium(E)
    if np.all(x0 > 0):
        try:
            return class_equilibrium(E, c_star, x0).c
        except (RuntimeError, ValueError, np.linalg.LinAlgError) as exc:
            logger.info("class equilibrium unavailable for Lyapunov centre: %s", exc)
    return c_star


class _Recorder:
    """Per-step invariant tracking plus sample rows."""

    def __init__(self, E: EventSystem, x0: np.ndarray, center: np.ndarray | None):
        self.E = E
        self.x0 = x0.copy()
        self.K = right_kernel(stoichiometric_matrix(E)).as_array()
        self.center = center
        self.stats = StepStats()
        self.g_prev = self._g(x0)
        self.rows: list[tuple] = []
        self.switched_at: float | None = None

    def _g(self, x) -> float:
        if self.center is None or np.any(x < 0):
            return math.nan
        return lyapunov_value(self.E, self.center, x).value

    def step(self, x: np.ndarray, h: float) -> None:
        s = self.stats
        s.accepted += 1
        s.min_component = min(s.min_component, float(x.min()))
        s.max_component = max(s.max_component, float(x.max()))
        s.min_step = min(s.min_step, float(h))
        s.max_step = max(s.max_step, float(h))
        if self.K.shape[1]:
            s.max_drift = max(s.max_drift, float(np.max(np.abs(self.K.T @ (x - self.x0)))))
        g = self._g(x)
        if not math.isnan(g) and not math.isnan(self.g_prev):
            s.max_lyapunov_increase = max(s.max_lyapunov_increase, g - self.g_prev)
        self.g_prev = g

    def sample(self, t: float, x: np.ndarray, f: np.ndarray | None = None) -> None:
        if f is None:
            f = mass_action_rhs(self.E, x)
        drift = self.K.T @ (x - self.x0) if self.K.shape[1] else np.zeros(0)
        self.rows.append((t, x.copy(), float(x.min()), drift, self._g(x), float(np.max(np.abs(f)))))

    def trajectory(self, status: TrajectoryStatus, opts: SimOptions) -> Trajectory:
        r = self.K.shape[1]
        return Trajectory(
            species=self.E.species,
            times=np.array([row[0] for row in self.rows]),
            states=np.array([row[1] for row in self.rows]),
            min_component=np.array([row[2] for row in self.rows]),
            conservation_drift=np.array([row[3] for row in self.rows]).reshape(len(self.rows), r),
            lyapunov=np.array([row[4] for row in self.rows]),
            rhs_norm=np.array([row[5] for row in self.rows]),
            kernel=self.K,
            lyapunov_center=self.center,
            step_stats=self.stats,
            status=status,
            switched_at=self.switched_at,
            options=opts,
        )


def _err_norm(err, x, y, opts: SimOptions) -> float:
    scale = opts.abs_tol + opts.rel_tol * np.maximum(np.abs(x), np.abs(y))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def _initial_step(E: EventSystem, x, f0, opts: SimOptions) -> float:
    """Starting step from the size of the solution and its derivatives."""
    scale = opts.abs_tol + opts.rel_tol * np.abs(x)
    d0 = np.sqrt(np.mean((x / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, opts.t_end)
    x1 = np.maximum(x + h0 * f0, 0.0)
    f1 = mass_action_rhs(E, x1)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, opts.t_end)


def _dense(x, h, k, theta: float) -> np.ndarray:
    powers = np.array([theta, theta**2, theta**3, theta**4])
    return x + h * (k.T @ (DENSE_P @ powers))


def _positive_interp(x, y, dense, theta: float) -> np.ndarray:
    """Keep interpolants of positive components positive."""
    bad = dense <= 0
    if not bad.any():
        return dense
    out = dense.copy()
    both = bad & (x > 0) & (y > 0)
    out[both] = x[both] ** (1 - theta) * y[both] ** theta
    rest = bad & ~both
    out[rest] = np.maximum((1 - theta) * x[rest] + theta * y[rest], 0.0)
    return out


def _midpoint_step(E: EventSystem, x: np.ndarray, h: float) -> np.ndarray | None:
    """One implicit midpoint step; None if Newton fails to converge."""
    n = x.size
    y = x + h * mass_action_rhs(E, x)
    eye = np.eye(n)
    for _ in range(25):
        mid = 0.5 * (x + y)
        F = y - x - h * mass_action_rhs(E, mid)
        J = eye - 0.5 * h * rhs_jacobian(E, mid)
        try:
            dy = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            return None
        y = y + dy
        if not np.all(np.isfinite(y)):
            return None
        if np.max(np.abs(dy)) <= 1e-14 * (1.0 + np.max(np.abs(y))):
            return y
    return None


def integrate(
    E: EventSystem,
    x0,
    opts: SimOptions | None = None,
    stop_at_equilibrium: bool = False,
) -> Trajectory:
    """Integrate ``x' = P_E(x)`` from ``x0`` over ``[0, t_end]``.

    Returns states at ``opts.grid()`` (plus ``t = 0`` and the final time)
    with monitor columns.  With ``stop_at_equilibrium`` the run ends as soon
    as ``|P_E(x)|_inf <= equilibrium_threshold``.

    ``method="auto"`` starts with the explicit pair and moves to implicit
    midpoint once the residual has not halved over ``stall_window`` accepted
    steps, which is what happens when the step size is pinned at the
    explicit stability limit.

    Raises
    ------
    StiffnessError
        If the step size underflows.
    """
    opts = opts or SimOptions()
    x0 = np.ascontiguousarray(x0, dtype=float)
    if x0.shape != (E.dimension,):
        raise DimensionError(f"x0 has shape {x0.shape}, expected ({E.dimension},)")
    if not np.all(np.isfinite(x0)) or np.any(x0 < 0):
        raise ValueError("x0 must be finite and non-negative")

    rec = _Recorder(E, x0, _lyapunov_center(E, x0))
    run = _Run(E, opts, rec, opts.grid(), stop_at_equilibrium)
    f0 = mass_action_rhs(E, x0)
    rec.sample(0.0, x0, f0)
    if stop_at_equilibrium and run.at_equilibrium(x0, f0):
        return rec.trajectory(TrajectoryStatus.EQUILIBRIUM, opts)
    h = opts.first_step or _initial_step(E, x0, f0, opts)
    if opts.method == "implicit-midpoint":
        status = run.midpoint(0.0, x0, h)
    else:
        status = run.dopri(0.0, x0, f0, h, stall_window=opts.stall_window if opts.method == "auto" else None)
        if status is None:
            logger.info("residual stalled at t=%g; switching to implicit midpoint", run.t)
            rec.switched_at = run.t
            status = run.midpoint(run.t, run.x, run.h)
    if rec.rows[-1][0] < run.t:
        rec.sample(run.t, run.x)
    return rec.trajectory(status, opts)


class _Run:
    """Stepping loops sharing the recorder, sample cursor and clock."""

    def __init__(self, E, opts: SimOptions, rec: _Recorder, samples, stop: bool):
        self.E = E
        self.opts = opts
        self.rec = rec
        self.samples = samples
        self.si = 0
        self.stop = stop
        self.steps = 0
        self.reject = opts.negativity_policy is NegativityPolicy.REJECT
        self.t = 0.0
        self.x = None
        self.h = 0.0

    def at_equilibrium(self, x, f) -> bool:
        return np.max(np.abs(f)) <= equilibrium_threshold(self.E, x, self.opts.equilibrium_tol)

    def _underflow(self, t, h, x) -> None:
        if h <= 16 * np.finfo(float).eps * max(1.0, abs(t)):
            raise StiffnessError(
                "step size underflow", t, x.copy(), self.rec.trajectory(TrajectoryStatus.MAX_STEPS, self.opts)
            )

    def _negative(self, x, y) -> bool:
        return bool(np.any((y < 0) | ((y <= 0) & (x > 0))))

    def _clamp(self, y) -> bool:
        neg = y < 0
        if self.reject or not neg.any():
            return False
        self.rec.stats.clamped += int(neg.sum())
        y[neg] = 0.0
        return True

    def _t_new(self, t, h) -> float:
        end = self.opts.t_end
        return end if end - (t + h) <= 1e-14 * end else t + h

    def _emit(self, t, t_new, h, x, y, fy, interp) -> None:
        s = self.samples
        while self.si < s.size and s[self.si] <= t_new:
            if s[self.si] >= t_new:
                self.rec.sample(t_new, y, fy)
            else:
                theta = (s[self.si] - t) / h
                self.rec.sample(float(s[self.si]), _positive_interp(x, y, interp(theta), theta))
            self.si += 1

    def dopri(self, t, x, f, h, stall_window=None):
        """Explicit 5(4) loop.  Returns a status, or None on a residual stall."""
        E, opts, rec = self.E, self.opts, self.rec
        arr = E.arrays
        n = E.dimension
        k = np.zeros((7, n))
        k[0] = f
        x = x.copy()
        y = np.empty(n)
        err = np.empty(n)
        err_prev = 1.0
        rejected_last = False
        best = float(np.max(np.abs(f)))
        since_best = 0
        try:
            while t < opts.t_end:
                if self.steps >= opts.max_steps:
                    logger.warning("step limit %d reached at t=%g", opts.max_steps, t)
                    return TrajectoryStatus.MAX_STEPS
                h = min(h, opts.t_end - t)
                self._underflow(t, h, x)
                self.steps += 1
                kernels.dopri_step(arr.sigma, arr.tau, arr.a, arr.b, arr.gamma, x, h, k, y, err)
                if not np.all(np.isfinite(y)):
                    rec.stats.rejected += 1
                    h *= _MIN_FACTOR
                    rejected_last = True
                    continue
                if self.reject and self._negative(x, y):
                    rec.stats.rejected += 1
                    rec.stats.negativity_rejections += 1
                    h *= 0.5
                    rejected_last = True
                    continue
                en = _err_norm(err, x, y, opts)
                if en > 1.0:
                    rec.stats.rejected += 1
                    h *= max(_MIN_FACTOR, _SAFETY * en ** (-1 / 5))
                    rejected_last = True
                    continue

                t_new = self._t_new(t, h)
                clamped = self._clamp(y)
                x_old = x.copy()
                self._emit(t, t_new, h, x_old, y, None if clamped else k[6], lambda th: _dense(x_old, h, k, th))
                rec.step(y, h)

                if en == 0.0:
                    factor = _MAX_FACTOR
                else:
                    factor = _SAFETY * en ** (-_PI_ALPHA) * err_prev**_PI_BETA
                    factor = min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
                if rejected_last:
                    factor = min(factor, 1.0)
                err_prev = max(en, 1e-4)
                rejected_last = False

                t = t_new
                x, y = y, x
                k[0] = mass_action_rhs(E, x) if clamped else k[6]
                h *= factor
                if self.stop and self.at_equilibrium(x, k[0]):
                    if rec.rows[-1][0] < t:
                        rec.sample(t, x, k[0])
                    return TrajectoryStatus.EQUILIBRIUM
                if stall_window is not None:
                    r = float(np.max(np.abs(k[0])))
                    if r < 0.5 * best:
                        best, since_best = r, 0
                    else:
                        since_best += 1
                        if since_best >= stall_window:
                            return None
            return TrajectoryStatus.COMPLETED
        finally:
            self.t, self.x, self.h = t, x.copy(), h

    def midpoint(self, t, x, h):
        """Implicit midpoint; two half steps, error from the full step."""
        E, opts, rec = self.E, self.opts, self.rec
        x = x.copy()
        fx = mass_action_rhs(E, x)
        try:
            while t < opts.t_end:
                if self.steps >= opts.max_steps:
                    return TrajectoryStatus.MAX_STEPS
                h = min(h, opts.t_end - t)
                self._underflow(t, h, x)
                self.steps += 1
                big = _midpoint_step(E, x, h)
                half = _midpoint_step(E, x, h / 2)
                two = _midpoint_step(E, half, h / 2) if half is not None else None
                if big is None or two is None:
                    rec.stats.rejected += 1
                    h *= 0.25
                    continue
                # no local extrapolation: it would lose A-stability
                err = (two - big) / 3.0
                y = two
                if self.reject and self._negative(x, y):
                    rec.stats.rejected += 1
                    rec.stats.negativity_rejections += 1
                    h *= 0.5
                    continue
                en = _err_norm(err, x, y, opts)
                if en > 1.0:
                    rec.stats.rejected += 1
                    h *= max(_MIN_FACTOR, _SAFETY * en ** (-1 / 3))
                    continue
                self._clamp(y)
                fy = mass_action_rhs(E, y)
                t_new = self._t_new(t, h)
                self._emit(t, t_new, h, x, y, fy, lambda th: _hermite(x, y, fx, fy, h, th))
                rec.step(y, h)
                t, x, fx = t_new, y, fy
                h *= min(_MAX_FACTOR, max(_MIN_FACTOR, _SAFETY * max(en, 1e-10) ** (-1 / 3)))
                if self.stop and self.at_equilibrium(x, fx):
                    if rec.rows[-1][0] < t:
                        rec.sample(t, x, fx)
                    return TrajectoryStatus.EQUILIBRIUM
            return TrajectoryStatus.COMPLETED
        finally:
            self.t, self.x, self.h = t, x.copy(), h


def _hermite(x, y, fx, fy, h, theta: float) -> np.ndarray:
    """Cubic Hermite interpolant on one step."""
    t2, t3 = theta * theta, theta**3
    return (
        (2 * t3 - 3 * t2 + 1) * x
        + (t3 - 2 * t2 + theta) * h * fx
        + (-2 * t3 + 3 * t2) * y
        + (t3 - t2) * h * fy
    )


@dataclass(frozen=True)
class Crosscheck:
    """ODE limit versus the convex class solve."""

    class_state: np.ndarray
    max_relative_difference: float
    tolerance: float

    @property
    def agrees(self) -> bool:
        return self.max_relative_difference <= self.tolerance


@dataclass(frozen=True)
class EquilibriumRun:
    trajectory: Trajectory
    state: np.ndarray
    converged: bool
    atomic: bool
    crosscheck: Crosscheck | None = None


def simulate_to_equilibrium(
    E: EventSystem,
    x0,
    opts: SimOptions | None = None,
    crosscheck_tol: float = 1e-6,
) -> EquilibriumRun:
    """Integrate until the mass-action residual drops below the threshold.

    For atomic systems with positive ``x0`` the reached state is compared
    componentwise (relative) with the class equilibrium from the convex
    solve.  ``converged`` is False if ``t_end`` or the step limit came first.
    """
    opts = opts or replace(SimOptions(), t_end=1e4)
    traj = integrate(E, x0, opts, stop_at_equilibrium=True)
    state = traj.final_state.copy()
    converged = traj.status is TrajectoryStatus.EQUILIBRIUM
    atomic = check_atomicity(E).status is AtomicityStatus.ATOMIC
    cross = None
    x0 = np.asarray(x0, dtype=float)
    if atomic and np.all(x0 > 0) and wegscheider_check(E).natural:
        c = class_equilibrium(E, base_strong_equilibrium(E), x0).c
        rel = float(np.max(np.abs(state - c) / np.abs(c)))
        cross = Crosscheck(c, rel, crosscheck_tol)
    return EquilibriumRun(traj, state, converged, atomic, cross)


@dataclass(frozen=True)
class MonitorReport:
    min_component: float
    max_component: float
    max_drift: tuple[float, ...]  # per kernel vector, at the samples
    max_step_drift: float  # any kernel vector, any accepted step
    max_lyapunov_increase: float | None
    lyapunov_available: bool
    clamped: int
    natural: bool
    notes: tuple[str, ...] = field(default=())

    def positivity_ok(self) -> bool:
        return self.min_component > 0


def run_monitors(E: EventSystem, c_opt, traj: Trajectory) -> MonitorReport:
    """Worst-case invariant violations over a trajectory.

    ``c_opt`` recentres the Lyapunov function; None keeps the centre used
    during integration.  Per-step worst cases from the integrator are merged
    with the sample rows.
    """
    natural = wegscheider_check(E).natural
    states = traj.states
    s = traj.step_stats
    x0 = states[0]
    notes = []
    if traj.kernel.shape[1]:
        max_drift = tuple(float(d) for d in np.abs(traj.kernel.T @ (states - x0).T).max(axis=1))
    else:
        max_drift = ()
    if c_opt is not None:
        g = np.array([lyapunov_value(E, c_opt, x).value for x in states])
        available = True
        step_inc = 0.0
    else:
        g = traj.lyapunov
        available = not np.all(np.isnan(g))
        step_inc = s.max_lyapunov_increase
    if available:
        inc = float(np.max(np.diff(g), initial=0.0))
        max_inc = max(inc, step_inc)
    else:
        max_inc = None
        notes.append("Lyapunov function unavailable (system not natural)")
    if not natural:
        notes.append("system is not natural; no strong equilibrium exists")
    if s.clamped:
        notes.append(f"{s.clamped} negative components clamped to 0")
    min_c = float(min(states.min(), s.min_component))
    max_c = float(max(states.max(), s.max_component))
    return MonitorReport(min_c, max_c, max_drift, max(s.max_drift, max(max_drift, default=0.0)), max_inc, available, s.clamped, natural, tuple(notes))


def write_trajectory_csv(traj: Trajectory, path_or_file) -> None:
    """Write ``t,<species...>,lyapunov,rhs_norm`` rows with round-trip floats."""
    def fmt(v: float) -> str:
        return "nan" if math.isnan(v) else repr(float(v))

    def write(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", *traj.species, "lyapunov", "rhs_norm"])
        for t, x, g, r in zip(traj.times, traj.states, traj.lyapunov, traj.rhs_norm):
            w.writerow([fmt(t), *(fmt(v) for v in x), fmt(g), fmt(r)])

    if hasattr(path_or_file, "write"):
        write(path_or_file)
    else:
        with open(path_or_file, "w", newline="", encoding="utf-8") as fh:
            write(fh)
