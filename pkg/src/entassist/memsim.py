"""Monte Carlo model of the two-register memory channel and its feedback protocol.

The memory channel alternates between a probe use (one of ``m0``/``m1``,
selected by a hidden latch bit ``i``) and a payload use (the qc-channel that
measures in MUB ``i``); the latch is redrawn after every payload use.

The protocol per symbol slot: Alice sends a probe, Bob makes a Helstrom guess
``j`` of the latch and feeds it back, Alice encodes a uniform d-ary symbol in
basis ``j``, Bob reads the computational outcome. Outcome distributions are
computed exactly from density matrices and only the outcomes are sampled.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .channels import MubPair, QuantumChannel, make_mub_qc, standard_mub
from .discrimination import (
    DEFAULT_C_OVERHEAD,
    ChannelPair,
    advantage_gap,
    assisted_distance,
    assisted_outputs,
    helstrom_povm,
    unassisted_distance,
)
from .qcore import DensityMatrix, DimensionError, projector

BLOCK = 8192


@dataclass
class MemoryChannel:
    """Stateful memory channel: latch ``i_bit`` and parity ``k_bit``."""

    pair: ChannelPair
    d: int
    mubs: MubPair | None = None
    i_bit: int = 0
    k_bit: int = 0

    def __post_init__(self):
        if self.mubs is None:
            self.mubs = standard_mub(self.d)
        if self.mubs.d != self.d:
            raise DimensionError("MUB dimension does not match d")
        self.payload = (make_mub_qc(self.mubs, 0), make_mub_qc(self.mubs, 1))

    @property
    def probe_channels(self) -> tuple[QuantumChannel, QuantumChannel]:
        return self.pair.m0, self.pair.m1

    def reset(self, rng: np.random.Generator) -> None:
        self.i_bit = int(rng.integers(2))
        self.k_bit = 0

    def step(self, rho: DensityMatrix, rng: np.random.Generator) -> DensityMatrix:
        if self.k_bit == 0:
            ch = self.probe_channels[self.i_bit]
        else:
            ch = self.payload[self.i_bit]
        if rho.dim != ch.dim_in:
            raise DimensionError(f"use with k={self.k_bit} expects input dim {ch.dim_in}, got {rho.dim}")
        out = ch(rho)
        if self.k_bit == 1:
            self.i_bit = int(rng.integers(2))
        self.k_bit ^= 1
        return out


def step(spec: MemoryChannel, rho: DensityMatrix, rng: np.random.Generator) -> DensityMatrix:
    return spec.step(rho, rng)


# --- protocol --------------------------------------------------------------------------

@dataclass
class ProtocolTrace:
    """One entry per symbol slot; slot ``s`` uses rounds ``2s+1`` (probe) and ``2s+2`` (payload)."""

    i_true: np.ndarray
    j_guess: np.ndarray
    symbol_sent: np.ndarray
    symbol_decoded: np.ndarray
    seed: int
    trials: int

    @property
    def rounds(self) -> np.ndarray:
        """Rows ``(round_index, i_true, j_guess, symbol_sent, symbol_decoded)``, indexed by the probe round."""
        return np.column_stack([self.probe_rounds, self.i_true, self.j_guess,
                                self.symbol_sent, self.symbol_decoded])

    @property
    def probe_rounds(self) -> np.ndarray:
        return 2 * np.arange(self.trials) + 1

    @property
    def payload_rounds(self) -> np.ndarray:
        return 2 * np.arange(self.trials) + 2


@dataclass
class RateEstimate:
    empirical_mutual_info: float
    mutual_info_stderr: float
    delta_hat: float
    delta_stderr: float
    counts: np.ndarray
    guess_successes: int
    trials: int

    @property
    def per_use(self) -> float:
        return self.empirical_mutual_info / 2

    @property
    def per_use_stderr(self) -> float:
        return self.mutual_info_stderr / 2

    @property
    def confusion(self) -> np.ndarray:
        rows = self.counts.sum(axis=1, keepdims=True)
        return self.counts / np.maximum(rows, 1)


def mutual_information_from_counts(counts: np.ndarray) -> tuple[float, float]:
    """Plug-in mutual information (bits) of a joint count table and its
    delta-method standard error."""
    n = counts.sum()
    p = counts / n
    px = p.sum(axis=1, keepdims=True)
    py = p.sum(axis=0, keepdims=True)
    mask = p > 0
    info = np.zeros_like(p)
    info[mask] = np.log2(p[mask] / (px @ py)[mask])
    mi = float(np.sum(p * info))
    var = float(np.sum(p * info ** 2)) - mi ** 2
    return mi, math.sqrt(max(var, 0.0) / n)


@dataclass(frozen=True)
class _Law:
    """Exact ingredients for sampling: guess probabilities and payload outcome tables."""

    p_guess0: tuple[float, float]     # P(j = 0 | i) for i = 0, 1
    payload: np.ndarray               # [i, j, x, y] = P(y | latch i, basis j, symbol x)


def payload_table(mubs: MubPair) -> np.ndarray:
    """``[i, j, x, y]``: probability that the qc-channel measuring in basis ``i``
    outputs ``|y>`` when fed ``|v_x^{(j)}>``, i.e. ``|<v_y^{(i)}|v_x^{(j)}>|²``."""
    bases = (mubs.basis0, mubs.basis1)
    table = np.array([[np.abs(bases[j].T @ bases[i].conj()) ** 2 for j in range(2)] for i in range(2)])
    return table / table.sum(axis=-1, keepdims=True)


def _law_from_states(s0: np.ndarray, s1: np.ndarray, mubs: MubPair) -> _Law:
    q = helstrom_povm(s0, s1).q
    p00 = float(np.clip(np.trace(q @ s0).real, 0, 1))
    p10 = float(np.clip(np.trace(q @ s1).real, 0, 1))
    return _Law((p00, p10), payload_table(mubs))


def _run_block(args) -> tuple[np.ndarray, ...]:
    law, seed, block, n, d = args
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))
    i = rng.integers(0, 2, size=n)
    p0 = np.where(i == 0, law.p_guess0[0], law.p_guess0[1])
    j = (rng.random(n) >= p0).astype(np.int64)
    x = rng.integers(0, d, size=n)
    cdf = np.cumsum(law.payload[i, j, x], axis=1)
    y = np.minimum((rng.random(n)[:, None] >= cdf).sum(axis=1), d - 1)
    return i, j, x, y


def _simulate(law: _Law, d: int, n_symbols: int, seed: int, workers: int = 1) -> tuple[ProtocolTrace, RateEstimate]:
    sizes = [min(BLOCK, n_symbols - b * BLOCK) for b in range(math.ceil(n_symbols / BLOCK))]
    jobs = [(law, seed, b, size, d) for b, size in enumerate(sizes)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_block, jobs))
    else:
        parts = [_run_block(job) for job in jobs]
    i, j, x, y = (np.concatenate([p[k] for p in parts]) for k in range(4))
    trace = ProtocolTrace(i, j, x, y, seed, n_symbols)
    counts = np.zeros((d, d), dtype=np.int64)
    np.add.at(counts, (x, y), 1)
    mi, mi_se = mutual_information_from_counts(counts)
    hits = int(np.sum(i == j))
    p_hat = hits / n_symbols
    return trace, RateEstimate(
        empirical_mutual_info=mi,
        mutual_info_stderr=mi_se,
        delta_hat=2 * p_hat - 1,
        delta_stderr=2 * math.sqrt(p_hat * (1 - p_hat) / n_symbols),
        counts=counts,
        guess_successes=hits,
        trials=n_symbols,
    )


def simulate_assisted(spec: MemoryChannel, rho: DensityMatrix, n_symbols: int, seed: int,
                      workers: int = 1) -> tuple[ProtocolTrace, RateEstimate]:
    """Protocol with Alice's half of ``rho`` as the probe and Bob measuring the
    channel output jointly with his half."""
    m0, m1 = spec.probe_channels
    s0, s1 = assisted_outputs(m0, m1, rho)
    return _simulate(_law_from_states(s0, s1, spec.mubs), spec.d, n_symbols, seed, workers)


def simulate_unassisted(spec: MemoryChannel, probe: np.ndarray, n_symbols: int, seed: int,
                        workers: int = 1) -> tuple[ProtocolTrace, RateEstimate]:
    """Protocol with a pure product probe and Bob measuring the channel output alone."""
    m0, m1 = spec.probe_channels
    probe = np.asarray(probe, dtype=complex)
    if probe.size != m0.dim_in:
        raise DimensionError(f"probe has dimension {probe.size}, channels expect {m0.dim_in}")
    sigma = projector(probe / np.linalg.norm(probe))
    return _simulate(_law_from_states(m0.apply_matrix(sigma), m1.apply_matrix(sigma), spec.mubs),
                     spec.d, n_symbols, seed, workers)


def lag1_autocorrelation(x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    x = x - x.mean()
    denom = np.dot(x, x)
    return float(np.dot(x[:-1], x[1:]) / denom) if denom > 0 else 0.0


@dataclass
class CompareReport:
    d: int
    trials: int
    seed: int
    assisted: RateEstimate
    unassisted: RateEstimate
    epsilon: float
    delta: float
    d_tilde: int
    c_overhead: float
    extra: dict = field(default_factory=dict)

    @property
    def bounds(self):
        return advantage_gap(self.delta, self.epsilon, self.d, self.d_tilde, self.c_overhead)

    @property
    def assisted_advantage(self) -> bool:
        diff = self.assisted.per_use - self.unassisted.per_use
        se = math.hypot(self.assisted.per_use_stderr, self.unassisted.per_use_stderr)
        return bool(diff > 3 * se)

    def to_dict(self) -> dict:
        b = self.bounds
        r = lambda v: float(f"{v:.12g}")  # noqa: E731
        return {
            "tool": "entassist",
            "version": __version__,
            "d": self.d,
            "trials": self.trials,
            "seed": self.seed,
            "delta": r(self.delta),
            "epsilon": r(self.epsilon),
            "delta_hat": r(self.assisted.delta_hat),
            "stderr": r(self.assisted.delta_stderr),
            "epsilon_hat": r(self.unassisted.delta_hat),
            "epsilon_hat_stderr": r(self.unassisted.delta_stderr),
            "empirical_rate_assisted_per_use": r(self.assisted.per_use),
            "empirical_rate_assisted_stderr": r(self.assisted.per_use_stderr),
            "empirical_rate_unassisted_per_use": r(self.unassisted.per_use),
            "empirical_rate_unassisted_stderr": r(self.unassisted.per_use_stderr),
            "lemma1_upper": r(b.lemma1_upper),
            "lemma2_lower": r(b.lemma2_lower),
            "lemma2_exact_per_use": r(b.exact_lower),
            "gap_per_use": r(b.gap),
            "c": self.c_overhead,
            "d_tilde": self.d_tilde,
            "assisted_advantage": self.assisted_advantage,
            **self.extra,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def compare(spec: MemoryChannel, rho: DensityMatrix, probe: np.ndarray | None, n_symbols: int, seed: int,
            c: float = DEFAULT_C_OVERHEAD, workers: int = 1, restarts: int = 256) -> CompareReport:
    """Assisted and unassisted simulations side by side with the analytic bounds.

    Without an explicit ``probe`` the unassisted run uses the best input found
    by the ε search. Both runs share ``seed`` so their latch sequences match.
    """
    m0, m1 = spec.probe_channels
    eps_res = unassisted_distance(m0, m1, restarts=restarts, seed=seed)
    if probe is None:
        probe = eps_res.probe
    delta = assisted_distance(m0, m1, rho)
    _, assisted = simulate_assisted(spec, rho, n_symbols, seed, workers)
    _, unassisted = simulate_unassisted(spec, probe, n_symbols, seed, workers)
    return CompareReport(spec.d, n_symbols, seed, assisted, unassisted,
                         epsilon=eps_res.value, delta=min(delta, 1.0),
                         d_tilde=m0.dim_out, c_overhead=c,
                         extra={"epsilon_converged": eps_res.converged})
