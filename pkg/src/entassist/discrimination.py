"""Channel discrimination with and without an entangled probe, and the rate
bounds for the feedback memory channel built from a pair of channels.

Rate accounting: the feedback protocol spends two uses of the memory channel
per d-ary symbol (one probe use, one payload use). ``*_per_symbol`` figures are
per symbol slot, ``*_per_use`` figures are per channel use; gaps are always
formed per use.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channels import (
    QuantumChannel,
    apply_on_subsystem_matrix,
    fourier_matrix,
    is_entanglement_breaking,
    measure_prepare_channel,
)
from .entropy import dary_symmetric_capacity
from .qcore import DensityMatrix, DimensionError, projector, trace_norm
from .sphere import multistart_minimize

DEFAULT_C_OVERHEAD = 2.0


class _NegHalfTraceDistance:
    def __init__(self, m0: QuantumChannel, m1: QuantumChannel):
        self.k0 = np.stack(m0.kraus)
        self.k1 = np.stack(m1.kraus)

    def __call__(self, psi: np.ndarray) -> float:
        v0 = self.k0 @ psi
        v1 = self.k1 @ psi
        diff = v0.T @ v0.conj() - v1.T @ v1.conj()
        return -0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


def _check_signature(m0: QuantumChannel, m1: QuantumChannel) -> None:
    if (m0.dim_in, m0.dim_out) != (m1.dim_in, m1.dim_out):
        raise DimensionError("channels in a pair must share input and output dimensions")


@dataclass
class DistanceResult:
    value: float
    probe: np.ndarray
    converged: bool


def unassisted_distance(m0: QuantumChannel, m1: QuantumChannel, restarts: int = 256,
                        seed: int = 0, tol: float = 1e-6, workers: int = 1) -> DistanceResult:
    """``ε = ½ max_ψ ||m0(ψ) − m1(ψ)||₁`` over pure product probes.

    The objective is convex in the input state, so pure inputs suffice.
    """
    _check_signature(m0, m1)
    res = multistart_minimize(_NegHalfTraceDistance(m0, m1), m0.dim_in, restarts=restarts,
                              seed=seed, tol=tol, workers=workers)
    return DistanceResult(min(max(-res.value, 0.0), 1.0), res.psi, res.converged)


def probe_distance(m0: QuantumChannel, m1: QuantumChannel, probe: np.ndarray) -> float:
    """Half trace distance of the two outputs for a fixed input (pure vector or matrix)."""
    _check_signature(m0, m1)
    probe = np.asarray(probe, dtype=complex)
    sigma = projector(probe / np.linalg.norm(probe)) if probe.ndim == 1 else probe
    return 0.5 * trace_norm(m0.apply_matrix(sigma) - m1.apply_matrix(sigma))


def assisted_outputs(m0: QuantumChannel, m1: QuantumChannel, rho: DensityMatrix) -> tuple[np.ndarray, np.ndarray]:
    if rho.dims[0] != m0.dim_in:
        raise DimensionError(f"state's first subsystem has dim {rho.dims[0]}, channels expect {m0.dim_in}")
    return (apply_on_subsystem_matrix(m0, rho.matrix, rho.dims, 0),
            apply_on_subsystem_matrix(m1, rho.matrix, rho.dims, 0))


def assisted_distance(m0: QuantumChannel, m1: QuantumChannel, rho: DensityMatrix) -> float:
    """``δ = ½ ||(m0 ⊗ id)(ρ) − (m1 ⊗ id)(ρ)||₁`` with ``ρ`` itself as the probe."""
    _check_signature(m0, m1)
    s0, s1 = assisted_outputs(m0, m1, rho)
    return 0.5 * trace_norm(s0 - s1)


@dataclass
class HelstromPOVM:
    q: np.ndarray
    success_probability: float

    @property
    def elements(self) -> tuple[np.ndarray, np.ndarray]:
        return self.q, np.eye(self.q.shape[0]) - self.q


def helstrom_povm(s0: np.ndarray, s1: np.ndarray) -> HelstromPOVM:
    """Optimal equal-prior measurement: ``Q`` projects onto the positive part of ``s0 − s1``."""
    s0 = getattr(s0, "matrix", s0)
    s1 = getattr(s1, "matrix", s1)
    if s0.shape != s1.shape:
        raise DimensionError("states to discriminate must have equal dimensions")
    diff = s0 - s1
    lam, vecs = np.linalg.eigh(0.5 * (diff + diff.conj().T))
    pos = vecs[:, lam > 1e-14]
    q = pos @ pos.conj().T
    p = 0.5 * np.trace(q @ s0).real + 0.5 * np.trace((np.eye(q.shape[0]) - q) @ s1).real
    return HelstromPOVM(q, float(p))


# --- pairs ---------------------------------------------------------------------------

@dataclass
class ChannelPair:
    m0: QuantumChannel
    m1: QuantumChannel
    epsilon: float | None = None
    delta_by_state: dict[str, float] = field(default_factory=dict)
    probe: np.ndarray | None = None

    def __post_init__(self):
        _check_signature(self.m0, self.m1)

    def compute_epsilon(self, restarts: int = 256, seed: int = 0, workers: int = 1) -> float:
        res = unassisted_distance(self.m0, self.m1, restarts=restarts, seed=seed, workers=workers)
        self.epsilon, self.probe = res.value, res.probe
        return res.value

    def compute_delta(self, rho: DensityMatrix, label: str = "rho") -> float:
        self.delta_by_state[label] = assisted_distance(self.m0, self.m1, rho)
        return self.delta_by_state[label]


# --- rate bounds -------------------------------------------------------------------------

def lemma1_upper(epsilon: float, d: int, d_tilde: int, c: float = DEFAULT_C_OVERHEAD) -> float:
    """Unassisted feedback product capacity bound, bits per channel use:
    ``(1+ε)/4 · log2 d + c · log2 d̃``.

    ``c`` stands in for the unspecified constant of the ``O(log d̃)`` term.
    """
    if not 0.0 <= epsilon <= 1.0 or d < 2 or d_tilde < 1 or c < 0:
        raise ValueError("lemma1_upper needs 0<=ε<=1, d>=2, d̃>=1, c>=0")
    return (1 + epsilon) / 4 * math.log2(d) + c * math.log2(d_tilde)


@dataclass(frozen=True)
class Lemma2Bound:
    bound_per_symbol: float
    exact_per_symbol: float

    @property
    def bound_per_use(self) -> float:
        return self.bound_per_symbol / 2

    @property
    def exact_per_use(self) -> float:
        return self.exact_per_symbol / 2


def lemma2_lower(delta: float, d: int) -> Lemma2Bound:
    """Assisted rate of the Helstrom-feedback protocol per symbol slot: the
    closed-form bound ``(1+δ)/2 · log2 d − 1`` and the exact d-ary symmetric capacity."""
    if not 0.0 <= delta <= 1.0 or d < 2:
        raise ValueError("lemma2_lower needs 0<=δ<=1 and d>=2")
    return Lemma2Bound((1 + delta) / 2 * math.log2(d) - 1, dary_symmetric_capacity(d, delta))


@dataclass(frozen=True)
class BoundReport:
    d: int
    d_tilde: int
    c_overhead: float
    epsilon: float
    delta: float
    lemma1_upper: float
    lemma2_bound_per_symbol: float
    lemma2_exact_per_symbol: float

    @property
    def lemma2_lower(self) -> float:
        return self.lemma2_bound_per_symbol / 2

    @property
    def exact_lower(self) -> float:
        return self.lemma2_exact_per_symbol / 2

    @property
    def gap(self) -> float:
        return self.lemma2_lower - self.lemma1_upper

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "d_tilde": self.d_tilde,
            "c": self.c_overhead,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "lemma1_upper_per_use": self.lemma1_upper,
            "lemma2_bound_per_symbol": self.lemma2_bound_per_symbol,
            "lemma2_exact_per_symbol": self.lemma2_exact_per_symbol,
            "lemma2_lower_per_use": self.lemma2_lower,
            "gap_per_use": self.gap,
        }


def advantage_gap(delta: float, epsilon: float, d: int, d_tilde: int,
                  c: float = DEFAULT_C_OVERHEAD) -> BoundReport:
    """Assisted lower bound minus unassisted upper bound, per use; a positive
    gap certifies the separation for these constants."""
    l2 = lemma2_lower(delta, d)
    return BoundReport(d, d_tilde, c, epsilon, delta, lemma1_upper(epsilon, d, d_tilde, c),
                       l2.bound_per_symbol, l2.exact_per_symbol)


def min_d_for_gap(delta: float, epsilon: float, d_tilde: int, c: float = DEFAULT_C_OVERHEAD) -> int | None:
    """Smallest power of two ``d`` with a positive per-use gap, ``None`` if unbounded.

    The per-use gap is ``(δ−ε)/4 · log2 d − ½ − c · log2 d̃``, linear in ``log2 d``.
    """
    slope = (delta - epsilon) / 4
    if slope <= 0:
        return None
    offset = 0.5 + c * math.log2(d_tilde)
    k = max(1, math.floor(offset / slope) + 1)
    # guard the boundary against rounding in offset / slope
    while k > 1 and advantage_gap(delta, epsilon, 2 ** (k - 1), d_tilde, c).gap > 0:
        k -= 1
    while advantage_gap(delta, epsilon, 2 ** k, d_tilde, c).gap <= 0:
        k += 1
    return 2 ** k


# --- EB pair search ------------------------------------------------------------------------

def _random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def qc_pair_from_isometries(v0: np.ndarray, v1: np.ndarray) -> tuple[QuantumChannel, QuantumChannel]:
    """Pair of qc-channels ``σ ↦ Σ_k <k|V σ V†|k> |k><k|`` for two isometries ``V: C^n → C^K``."""
    chans = []
    for b, v in enumerate((v0, v1)):
        k_out = v.shape[0]
        povm = [np.outer(v[k].conj(), v[k]) for k in range(k_out)]
        outs = [projector(np.eye(k_out)[k]) for k in range(k_out)]
        chans.append(measure_prepare_channel(povm, outs, f"qc_pair{b}"))
    return chans[0], chans[1]


def qc_pair_epsilon(v0: np.ndarray, v1: np.ndarray) -> float:
    """Exact unassisted distance of a qc pair.

    With ``F_k = E⁰_k − E¹_k`` the output difference is diagonal, so
    ``ε = ½ max_ψ Σ_k |<ψ|F_k|ψ>| = ½ max_s λ_max(Σ_k s_k F_k)`` over all
    sign vectors ``s``.
    """
    f = np.einsum("ki,kj->kij", v0.conj(), v0) - np.einsum("ki,kj->kij", v1.conj(), v1)
    k_out = f.shape[0]
    best = 0.0
    for bits in range(2 ** k_out):
        signs = np.array([1.0 if bits >> b & 1 else -1.0 for b in range(k_out)])
        op = np.tensordot(signs, f, axes=1)
        best = max(best, float(np.linalg.eigvalsh(op)[-1]))
    return 0.5 * best


SIC_DIRECTIONS = np.array([[0, 0, 1],
                           [2 * np.sqrt(2) / 3, 0, -1 / 3],
                           [-np.sqrt(2) / 3, np.sqrt(2 / 3), -1 / 3],
                           [-np.sqrt(2) / 3, -np.sqrt(2 / 3), -1 / 3]])


def _bloch_ket(n: np.ndarray) -> np.ndarray:
    theta, phi = np.arccos(np.clip(n[2], -1, 1)), np.arctan2(n[1], n[0])
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def antipodal_qc_pair(directions: np.ndarray = SIC_DIRECTIONS) -> tuple[np.ndarray, np.ndarray]:
    """Qubit qc pair reading out the Bloch directions ``n_k`` (``m0``) or ``−n_k`` (``m1``).

    With ``K`` directions summing to zero, the POVM ``{(2/K)|n_k><n_k|}`` is
    complete. On the Bell state the two outputs are orthogonal (δ = 1) while
    ``ε = (1/K) max_r Σ_k |n_k·r|``; the tetrahedron gives ``ε = 1/√3``.
    Returns the two isometries for :func:`qc_pair_from_isometries`.
    """
    n = np.asarray(directions, dtype=float)
    n = n / np.linalg.norm(n, axis=1, keepdims=True)
    if np.max(np.abs(n.sum(axis=0))) > 1e-9:
        raise ValueError("Bloch directions must sum to zero")
    w = np.sqrt(2 / len(n))
    v0 = np.array([w * _bloch_ket(k).conj() for k in n])
    v1 = np.array([w * _bloch_ket(-k).conj() for k in n])
    return v0, v1


def _tagged_isometries(bases: list[np.ndarray], shift: int = 1) -> tuple[np.ndarray, np.ndarray]:
    n = bases[0].shape[0]
    rows0 = [b[:, k].conj() / np.sqrt(len(bases)) for b in bases for k in range(n)]
    rows1 = [b[:, (k - shift) % n].conj() / np.sqrt(len(bases)) for b in bases for k in range(n)]
    return np.array(rows0), np.array(rows1)


def _orthonormalize(v: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(v)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def search_eb_pair(rho: DensityMatrix, iters: int = 150, seed: int = 0, chains: int = 6,
                   final_restarts: int = 256) -> ChannelPair:
    """Heuristic search over pairs of qc-channels maximising ``δ − ε``.

    Each channel measures a POVM with ``n²`` outcomes (``n`` the probe
    dimension) and writes the outcome classically, so both are entanglement
    breaking by construction. Hill-climbing chains start from basis-tagged
    pairs (computational/Fourier), the tetrahedral antipodal pair for qubits,
    and from random isometries, perturbing one
    isometry at a time and scoring with the exact qc-pair ε. The returned
    pair's ε is re-derived by the generic multistart search. No optimality is
    claimed.
    """
    n = rho.dims[0]
    k_out = n * n
    rng = np.random.default_rng(seed)

    def score(pair_iso):
        m0, m1 = qc_pair_from_isometries(*pair_iso)
        return assisted_distance(m0, m1, rho) - qc_pair_epsilon(*pair_iso)

    def random_iso():
        return _orthonormalize(rng.normal(size=(k_out, n)) + 1j * rng.normal(size=(k_out, n)))

    eye = np.eye(n, dtype=complex)
    fourier = fourier_matrix(n)
    extra = [_random_unitary(n, rng) for _ in range(n - 2)]
    starts = [_tagged_isometries([eye, fourier] + extra),
              _tagged_isometries([eye, fourier.conj()] + extra)]
    if n == 2:
        starts.append(antipodal_qc_pair())
    starts += [(random_iso(), random_iso()) for _ in range(chains)]

    best, best_score = None, -np.inf
    for start in starts:
        cur, cur_score = start, score(start)
        scale = 0.5
        for _ in range(iters):
            which = int(rng.integers(2))
            g = rng.normal(size=cur[which].shape) + 1j * rng.normal(size=cur[which].shape)
            trial = list(cur)
            trial[which] = _orthonormalize(cur[which] + scale * g)
            s = score(tuple(trial))
            if s > cur_score:
                cur, cur_score = tuple(trial), s
            else:
                scale = max(scale * 0.97, 1e-3)
        if cur_score > best_score:
            best, best_score = cur, cur_score
    m0, m1 = qc_pair_from_isometries(*best)
    pair = ChannelPair(m0, m1)
    pair.compute_epsilon(restarts=final_restarts, seed=seed)
    pair.compute_delta(rho)
    return pair


def pair_is_eb(pair: ChannelPair) -> bool:
    return is_entanglement_breaking(pair.m0) == "yes" and is_entanglement_breaking(pair.m1) == "yes"
