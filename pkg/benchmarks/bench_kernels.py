"""Compare the compiled and numpy kernel backends.

Times the per-call kernels (fluxes, field, Jacobian, one 5(4) step) on a
random event-system, then a full integration run in a subprocess per
backend so the selection at import applies end to end.

    python benchmarks/bench_kernels.py --species 6 --events 8 --repeat 2000
"""
from __future__ import annotations

import argparse
import os
import random
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np

from evsys import _backend
from evsys.core import EventSystem, Monomial, canonicalize_event


def random_system(seed: int, n: int, m: int, max_degree: int) -> EventSystem:
    rng = random.Random(seed)
    events, seen = [], set()
    while len(events) < m:
        pair = []
        for _ in range(2):
            exps = [0] * n
            for _ in range(rng.randint(0, max_degree)):
                exps[rng.randrange(n)] += 1
            pair.append(Monomial(tuple(exps)))
        a, b = pair
        if a == b or frozenset(pair) in seen:
            continue
        seen.add(frozenset(pair))
        rate = lambda: Fraction(rng.randint(1, 9), rng.randint(1, 9))  # noqa: E731
        events.append(canonicalize_event(rate(), a, rate(), b))
    return EventSystem.from_events(events)


def time_call(fn, repeat: int) -> float:
    """Best of three, in microseconds per call."""
    best = float("inf")
    for _ in range(3):
        t0 = time.perf_counter()
        for _ in range(repeat):
            fn()
        best = min(best, time.perf_counter() - t0)
    return best / repeat * 1e6


def bench_kernels(kern, E: EventSystem, repeat: int) -> dict[str, float]:
    arr = E.arrays
    n, m = E.dimension, E.n_events
    x = np.random.default_rng(0).uniform(0.5, 2.0, size=n)
    fwd, rev = np.empty(m), np.empty(m)
    f = np.empty(n)
    J = np.empty((n, n))
    k = np.zeros((7, n))
    kern.rhs(arr.sigma, arr.tau, arr.a, arr.b, arr.gamma, x, k[0])
    y, err = np.empty(n), np.empty(n)
    return {
        "fluxes": time_call(lambda: kern.fluxes(arr.sigma, arr.tau, arr.a, arr.b, x, fwd, rev), repeat),
        "rhs": time_call(lambda: kern.rhs(arr.sigma, arr.tau, arr.a, arr.b, arr.gamma, x, f), repeat),
        "jacobian": time_call(lambda: kern.jacobian(arr.sigma, arr.tau, arr.a, arr.b, arr.gamma, x, J), repeat),
        "dopri_step": time_call(
            lambda: kern.dopri_step(arr.sigma, arr.tau, arr.a, arr.b, arr.gamma, x, 1e-3, k, y, err), repeat
        ),
    }


_INTEGRATE = """
import sys, time
import numpy as np
sys.path.insert(0, {here!r})
from bench_kernels import random_system
from evsys import BACKEND
from evsys.simulate import SimOptions, integrate
E = random_system({seed}, {n}, {m}, {deg})
x0 = np.random.default_rng(1).uniform(0.5, 2.0, size=E.dimension)
t0 = time.perf_counter()
tr = integrate(E, x0, SimOptions(t_end={t_end}, method="dopri5"))
dt = time.perf_counter() - t0
print(BACKEND, dt, tr.step_stats.accepted)
"""


def bench_integrate(pure: bool, args) -> tuple[str, float, int]:
    code = _INTEGRATE.format(
        here=os.path.dirname(os.path.abspath(__file__)),
        seed=args.seed,
        n=args.species,
        m=args.events,
        deg=args.degree,
        t_end=args.t_end,
    )
    env = dict(os.environ, EVSYS_PURE_PYTHON="1" if pure else "0")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    name, dt, steps = out.stdout.split()
    return name, float(dt), int(steps)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--species", type=int, default=6)
    p.add_argument("--events", type=int, default=8)
    p.add_argument("--degree", type=int, default=2, help="max total degree of an event side")
    p.add_argument("--repeat", type=int, default=2000, help="calls per kernel timing")
    p.add_argument("--t-end", type=float, default=5.0)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    E = random_system(args.seed, args.species, args.events, args.degree)
    backends = [_backend.python_kernels]
    if _backend.compiled_kernels is None:
        print("compiled extension not built; timing the numpy backend only")
    else:
        backends.append(_backend.compiled_kernels)

    results = {kern.NAME: bench_kernels(kern, E, args.repeat) for kern in backends}
    names = [kern.NAME for kern in backends]
    print(f"system: {E.dimension} species, {E.n_events} events, degree <= {args.degree}")
    print(f"{'kernel':<12}" + "".join(f"{nm + ' (us)':>16}" for nm in names) + ("   speedup" if len(names) > 1 else ""))
    for key in results[names[0]]:
        row = f"{key:<12}" + "".join(f"{results[nm][key]:>16.2f}" for nm in names)
        if len(names) > 1:
            row += f"{results['python'][key] / results['cython'][key]:>9.1f}x"
        print(row)

    runs = [bench_integrate(True, args)]
    if _backend.compiled_kernels is not None:
        runs.append(bench_integrate(False, args))
    print(f"\nfull integration to t={args.t_end}:")
    for name, dt, steps in runs:
        print(f"  {name:<8} {dt * 1e3:10.1f} ms  ({steps} accepted steps)")
    if len(runs) == 2:
        print(f"  speedup  {runs[0][1] / runs[1][1]:10.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
