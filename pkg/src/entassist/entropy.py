"""Entropic functionals in bits, minimum output entropy, and majorization."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channels import MubPair, QuantumChannel
from .qcore import DensityMatrix, DimensionError, StateError, partial_trace_matrix, projector
from .sphere import multistart_minimize

CLIP_TOL = 1e-10
ENTROPY_FLOOR = 1e-12


def shannon(p: Sequence[float]) -> float:
    """Shannon entropy in bits; entries below 1e-12 contribute nothing."""
    p = np.asarray(p, dtype=float)
    if np.any(p < -CLIP_TOL):
        raise ValueError("probabilities must be nonnegative")
    p = p[p > ENTROPY_FLOOR]
    return float(-np.sum(p * np.log2(p))) + 0.0  # no negative zero


def spectrum_entropy(lam: np.ndarray) -> float:
    lam = np.asarray(lam, dtype=float)
    if lam.size and lam.min() < -CLIP_TOL:
        raise StateError(f"eigenvalue {lam.min():.3g} below clipping tolerance")
    return shannon(np.clip(lam, 0.0, None))


def matrix_entropy(m: np.ndarray) -> float:
    """von Neumann entropy of a (trusted) density matrix given as an array."""
    return spectrum_entropy(np.linalg.eigvalsh(0.5 * (m + m.conj().T)))


def von_neumann(rho: DensityMatrix) -> float:
    return matrix_entropy(rho.matrix)


def _marginal_entropy(rho: DensityMatrix, keep) -> float:
    for i in keep:
        if not 0 <= i < len(rho.dims):
            raise DimensionError(f"subsystem index {i} out of range for dims {rho.dims}")
    return matrix_entropy(partial_trace_matrix(rho.matrix, rho.dims, keep))


def conditional_entropy(rho: DensityMatrix, target: int, cond: int) -> float:
    """``S(target | cond) = S(target, cond) - S(cond)``; other subsystems are traced out."""
    if target == cond:
        raise DimensionError("target and conditioning subsystems must differ")
    return _marginal_entropy(rho, [target, cond]) - _marginal_entropy(rho, [cond])


def coherent_information(rho: DensityMatrix) -> float:
    """``I(A>B) = S(B) - S(AB)`` for a bipartite state."""
    if len(rho.dims) != 2:
        raise DimensionError("coherent information needs a bipartite state")
    return _marginal_entropy(rho, [1]) - von_neumann(rho)


def mutual_information(rho: DensityMatrix, a: int, b: int) -> float:
    if a == b:
        raise DimensionError("mutual information needs two distinct subsystems")
    return (_marginal_entropy(rho, [a]) + _marginal_entropy(rho, [b])
            - _marginal_entropy(rho, [a, b]))


@dataclass(frozen=True)
class Ensemble:
    probs: tuple[float, ...]
    states: tuple[DensityMatrix, ...]

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.size != len(self.states) or p.size == 0:
            raise ValueError("ensemble needs one probability per state")
        if np.any(p < 0) or abs(p.sum() - 1) > 1e-10:
            raise ValueError("ensemble probabilities must be nonnegative and sum to 1")
        if len({s.dims for s in self.states}) != 1:
            raise DimensionError("ensemble states must share dims")


def holevo_of_ensemble(ens: Ensemble, ch: QuantumChannel) -> float:
    """``S(ch(ρ̄)) - Σ p_x S(ch(ρ_x))``."""
    if ens.states[0].dim != ch.dim_in:
        raise DimensionError("ensemble states do not match channel input dimension")
    outs = [ch.apply_matrix(s.matrix) for s in ens.states]
    avg = sum(p * o for p, o in zip(ens.probs, outs))
    return matrix_entropy(avg) - sum(p * matrix_entropy(o) for p, o in zip(ens.probs, outs))


# --- minimum output entropy -------------------------------------------------------

@dataclass(frozen=True)
class SminResult:
    value: float
    argmin: np.ndarray | None
    method: str
    restarts_used: int = 0
    converged: bool = True


def depolarizing_output_spectrum(d: int, t: float) -> list[float]:
    return [t + (1 - t) / d] + [(1 - t) / d] * (d - 1)


def s_min_analytic(kind: str, d: int = 2, t: float = 1.0) -> SminResult:
    """Closed-form minimum output entropy for the channels where it is known.

    Every pure input to a (transpose) depolarizing channel has the same output
    spectrum. The two-Pauli channel shrinks the Bloch axes by ``(t, 2t-1, t)``,
    so its least noisy output has Bloch length ``max(t, |2t-1|)``; at ``t = 1/3``
    every input gives spectrum (2/3, 1/3).
    """
    if kind in ("depolarizing", "transpose_depolarizing"):
        value = shannon(depolarizing_output_spectrum(d, t))
    elif kind == "two_pauli":
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"two_pauli parameter t={t} outside [0, 1]")
        r = max(t, abs(2 * t - 1))
        value = shannon([(1 + r) / 2, (1 - r) / 2])
    elif kind == "identity":
        value = 0.0
    else:
        raise ValueError(f"no analytic minimum output entropy for {kind} with t={t}")
    return SminResult(value, None, "analytic")


def analytic_smin_for_spec(spec: dict) -> SminResult | None:
    """Analytic S_min for a channel spec, or ``None`` when no formula applies."""
    try:
        return s_min_analytic(spec["kind"], int(spec.get("d", 2)), float(spec.get("t", 1.0)))
    except (ValueError, KeyError):
        return None


class _OutputEntropy:
    # module-level class so multistart workers can pickle it
    def __init__(self, ch: QuantumChannel):
        self.kraus = np.stack(ch.kraus)

    def __call__(self, psi: np.ndarray) -> float:
        v = self.kraus @ psi
        lam = np.linalg.eigvalsh(v.T @ v.conj())
        lam = lam[lam > ENTROPY_FLOOR]
        return float(-np.dot(lam, np.log2(lam)))


def s_min_numeric(ch: QuantumChannel, restarts: int = 64, tol: float = 1e-6, seed: int = 0,
                  workers: int = 1) -> SminResult:
    """Multistart search for the pure input with least output entropy.

    No exactness claim: the value is an upper bound on the true minimum that
    is at most every sampled output entropy.
    """
    res = multistart_minimize(_OutputEntropy(ch), ch.dim_in, restarts=restarts, seed=seed,
                              tol=tol, workers=workers)
    value = min(max(res.value, 0.0), float(np.log2(ch.dim_out)))
    return SminResult(value, res.psi, "multistart", res.restarts_used, res.converged)


# --- classical quantities ---------------------------------------------------------

def dary_symmetric_capacity(d: int, delta: float) -> float:
    """Capacity of the d-ary channel that keeps a symbol with probability
    ``(1+δ)/2 + (1-δ)/(2d)`` and otherwise scatters it uniformly."""
    if d < 2:
        raise ValueError("d must be at least 2")
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta={delta} outside [0, 1]")
    # closed form of shannon([off] * (d - 1) + [keep]) in log space, so that d may be
    # an arbitrarily large Python int
    log_d = math.log2(d)
    scattered = (1 - delta) / 2 * (1 - 1 / d)
    keep = 1 - scattered
    noise = -keep * math.log2(keep)
    if delta < 1:
        noise -= scattered * (math.log2(1 - delta) - 1 - log_d)
    return log_d - noise


def majorizes(a: Sequence[float], b: Sequence[float], tol: float = 1e-10) -> bool:
    """True when ``a ≻ b``: every descending partial sum of ``a`` dominates ``b``'s.

    Shorter spectra are padded with zeros.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a < -tol) or np.any(b < -tol):
        raise ValueError("spectra must be nonnegative")
    n = max(a.size, b.size)
    a = np.sort(np.pad(a, (0, n - a.size)))[::-1]
    b = np.sort(np.pad(b, (0, n - b.size)))[::-1]
    return bool(np.all(np.cumsum(a) >= np.cumsum(b) - tol))


def mub_uncertainty_check(pair: MubPair, psi: np.ndarray) -> tuple[float, float, float]:
    """Outcome entropies of measuring ``psi`` in both bases, plus the bound log2 d."""
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    h0 = shannon(np.abs(pair.basis0.conj().T @ psi) ** 2)
    h1 = shannon(np.abs(pair.basis1.conj().T @ psi) ** 2)
    return h0, h1, float(np.log2(pair.d))


def output_entropy(ch: QuantumChannel, psi: np.ndarray) -> float:
    return matrix_entropy(ch.apply_matrix(projector(psi / np.linalg.norm(psi))))
