"""Gradient-free multistart minimisation over unit vectors in C^n.

A vector is carried as ``2n`` real coordinates (real parts, then imaginary
parts) and normalised before every objective call, so the search never leaves
the sphere.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

FLOOR_STEP = 1e-7


@dataclass
class LocalResult:
    value: float
    psi: np.ndarray
    evaluations: int
    restart: int


@dataclass
class MultistartResult:
    value: float
    psi: np.ndarray
    values: list[float]
    converged: bool

    @property
    def restarts_used(self) -> int:
        return len(self.values)


def to_complex(x: np.ndarray) -> np.ndarray:
    n = x.size // 2
    psi = x[:n] + 1j * x[n:]
    return psi / np.linalg.norm(psi)


def coordinate_descent(f: Callable[[np.ndarray], float], x0: np.ndarray, step: float = 0.25,
                       floor: float = FLOOR_STEP, max_evals: int = 200_000) -> tuple[np.ndarray, float, int]:
    """Minimise ``f(to_complex(x))`` by compass moves along each coordinate.

    The step halves whenever a full sweep finds no improvement; a move that
    succeeds is repeated before moving to the next coordinate.
    """
    x = np.array(x0, dtype=float)
    x /= np.linalg.norm(x)
    fx = f(to_complex(x))
    evals = 1
    while step >= floor and evals < max_evals:
        improved = False
        for i in range(x.size):
            for sign in (1.0, -1.0):
                moved = False
                while evals < max_evals:
                    trial = x.copy()
                    trial[i] += sign * step
                    norm = np.linalg.norm(trial)
                    if norm == 0:
                        break
                    trial /= norm
                    ft = f(to_complex(trial))
                    evals += 1
                    if ft < fx:
                        x, fx, moved = trial, ft, True
                    else:
                        break
                if moved:
                    improved = True
                    break
        if not improved:
            step /= 2
    return x, fx, evals


def _restart(args) -> LocalResult:
    f, n, seed_seq, restart = args
    rng = np.random.default_rng(seed_seq)
    x0 = rng.normal(size=2 * n)
    x, fx, evals = coordinate_descent(f, x0)
    return LocalResult(float(fx), to_complex(x), evals, restart)


def multistart_minimize(f: Callable[[np.ndarray], float], n: int, restarts: int = 64,
                        seed: int = 0, tol: float = 1e-6, workers: int = 1) -> MultistartResult:
    """Best of ``restarts`` independent local searches from Haar-random starts.

    ``converged`` is set when the two best restarts agree within ``tol``. Each
    restart has its own seed spawned from ``seed``, so the result does not
    depend on ``workers``. With ``workers > 1`` the objective must be picklable.
    """
    seqs = np.random.SeedSequence(seed).spawn(restarts)
    jobs = [(f, n, s, r) for r, s in enumerate(seqs)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_restart, jobs))
    else:
        results = [_restart(job) for job in jobs]
    results.sort(key=lambda r: (r.value, r.restart))
    best = results[0]
    converged = len(results) < 2 or abs(results[1].value - best.value) <= tol
    return MultistartResult(best.value, best.psi, [r.value for r in results], converged)
