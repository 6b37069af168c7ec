"""Quantum channels in Kraus form, the named channel families, and MUB machinery."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .qcore import (
    DensityMatrix,
    DimensionError,
    _parse_complex_matrix,
    check_density,
    eig_hermitian,
    partial_transpose_matrix,
    tensor,
)

TP_TOL = 1e-9
CP_TOL = 1e-9
KRAUS_CUTOFF = 1e-12

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class ChannelError(ValueError):
    """Raised when a map is not completely positive and trace preserving."""


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    dim_in: int
    dim_out: int
    kraus: tuple[np.ndarray, ...]
    label: str = "kraus"
    # set by constructors that build the map as measure-and-prepare
    measure_prepare: bool = field(default=False, compare=False)

    def __post_init__(self):
        ks = tuple(np.asarray(k, dtype=complex) for k in self.kraus)
        object.__setattr__(self, "kraus", ks)
        for k in ks:
            if k.shape != (self.dim_out, self.dim_in):
                raise DimensionError(
                    f"Kraus operator of shape {k.shape}, expected {(self.dim_out, self.dim_in)}")
        completeness = sum(k.conj().T @ k for k in ks)
        err = np.max(np.abs(completeness - np.eye(self.dim_in)))
        if err > TP_TOL:
            raise ChannelError(f"{self.label}: Kraus family not trace preserving (error {err:.3g})")

    def __call__(self, rho: DensityMatrix) -> DensityMatrix:
        return apply(self, rho)

    def apply_matrix(self, m: np.ndarray) -> np.ndarray:
        return sum(k @ m @ k.conj().T for k in self.kraus)

    def superoperator(self) -> np.ndarray:
        """Matrix ``S`` with ``vec(ch(m)) = S @ vec(m)`` for row-major ``vec``."""
        return sum(np.kron(k, k.conj()) for k in self.kraus)

    def __repr__(self):
        return f"QuantumChannel({self.label!r}, {self.dim_in}->{self.dim_out}, {len(self.kraus)} Kraus)"


def apply(ch: QuantumChannel, rho: DensityMatrix) -> DensityMatrix:
    if rho.dim != ch.dim_in:
        raise DimensionError(f"state of dimension {rho.dim} fed to channel with dim_in {ch.dim_in}")
    return DensityMatrix.trusted(ch.apply_matrix(rho.matrix), (ch.dim_out,))


def embed_operator(op: np.ndarray, dims: Sequence[int], sys: int) -> np.ndarray:
    """``I ⊗ op ⊗ I`` with ``op`` acting on subsystem ``sys``."""
    left = int(np.prod(dims[:sys])) if sys else 1
    right = int(np.prod(dims[sys + 1:])) if sys + 1 < len(dims) else 1
    return tensor(np.eye(left), op, np.eye(right))


def apply_on_subsystem_matrix(ch: QuantumChannel, m: np.ndarray, dims: Sequence[int], sys: int) -> np.ndarray:
    if not 0 <= sys < len(dims):
        raise DimensionError(f"subsystem {sys} out of range for dims {tuple(dims)}")
    if dims[sys] != ch.dim_in:
        raise DimensionError(f"subsystem {sys} has dimension {dims[sys]}, channel expects {ch.dim_in}")
    out = 0
    for k in ch.kraus:
        big = embed_operator(k, dims, sys)
        out = out + big @ m @ big.conj().T
    return out


def apply_on_subsystem(ch: QuantumChannel, rho: DensityMatrix, sys: int) -> DensityMatrix:
    """``(ch ⊗ id)`` acting on subsystem ``sys`` of ``rho``."""
    m = apply_on_subsystem_matrix(ch, rho.matrix, rho.dims, sys)
    dims = list(rho.dims)
    dims[sys] = ch.dim_out
    return DensityMatrix.trusted(m, dims)


# --- Choi / Kraus conversions --------------------------------------------------

def choi(ch: QuantumChannel) -> np.ndarray:
    """``(ch ⊗ id)(|Ω><Ω|)`` with unnormalised ``|Ω> = Σ|ii>``; output factor first."""
    vecs = [k.reshape(-1) for k in ch.kraus]
    return sum(np.outer(v, v.conj()) for v in vecs)


def choi_of_map(action, dim_in: int, dim_out: int) -> np.ndarray:
    """Choi matrix of a linear map given as a Python callable on matrices."""
    j = np.zeros((dim_out * dim_in, dim_out * dim_in), dtype=complex)
    for a in range(dim_in):
        for b in range(dim_in):
            e = np.zeros((dim_in, dim_in), dtype=complex)
            e[a, b] = 1.0
            j += tensor(action(e), e)
    return j


def kraus_from_choi(j: np.ndarray, dim_in: int, dim_out: int, cutoff: float = KRAUS_CUTOFF) -> list[np.ndarray]:
    lam, vecs = np.linalg.eigh(0.5 * (j + j.conj().T))
    if lam[0] < -CP_TOL:
        raise ChannelError(f"Choi matrix has negative eigenvalue {lam[0]:.3g}; map is not CP")
    return [np.sqrt(l) * vecs[:, i].reshape(dim_out, dim_in)
            for i, l in enumerate(lam) if l > cutoff]


def channel_from_action(action, dim_in: int, dim_out: int, label: str) -> QuantumChannel:
    j = choi_of_map(action, dim_in, dim_out)
    return QuantumChannel(dim_in, dim_out, tuple(kraus_from_choi(j, dim_in, dim_out)), label)


# --- named channels -------------------------------------------------------------

def identity_channel(d: int) -> QuantumChannel:
    return QuantumChannel(d, d, (np.eye(d, dtype=complex),), f"identity(d={d})")


def make_depolarizing(d: int, t: float) -> QuantumChannel:
    """``μ ↦ t μ + (1 - t) tr(μ) I/d``, CP for ``-1/(d²-1) <= t <= 1``."""
    if t > 1 + 1e-12:
        raise ChannelError(f"depolarizing parameter t={t} exceeds 1")
    eye = np.eye(d, dtype=complex)
    return channel_from_action(lambda m: t * m + (1 - t) * np.trace(m) * eye / d,
                               d, d, f"depolarizing(d={d},t={t:g})")


def make_transpose_depolarizing(d: int, t: float) -> QuantumChannel:
    """``μ ↦ t μ^T + (1 - t) tr(μ) I/d`` on the range ``-2/(d²-2) <= t <= 1/(d+1)``."""
    lo, hi = -2 / (d * d - 2), 1 / (d + 1)
    if not lo - 1e-12 <= t <= hi + 1e-12:
        raise ChannelError(f"transpose depolarizing t={t} outside [{lo:.6g}, {hi:.6g}]")
    eye = np.eye(d, dtype=complex)
    return channel_from_action(lambda m: t * m.T + (1 - t) * np.trace(m) * eye / d,
                               d, d, f"transpose_depolarizing(d={d},t={t:g})")


def make_two_pauli(t: float) -> QuantumChannel:
    """``μ ↦ t μ + (1-t)/2 (X μ X + Z μ Z)`` on a qubit."""
    if not 0.0 <= t <= 1.0:
        raise ChannelError(f"two-Pauli parameter t={t} outside the CP range [0, 1]")
    s = np.sqrt((1 - t) / 2)
    ks = [np.sqrt(t) * np.eye(2, dtype=complex), s * PAULI_X, s * PAULI_Z]
    return QuantumChannel(2, 2, tuple(k for k in ks if np.any(k)), f"two_pauli(t={t:g})")


def constant_channel(dim_in: int, out: np.ndarray, label: str = "constant") -> QuantumChannel:
    """Replace every input by the fixed state ``out``."""
    out = np.asarray(out, dtype=complex)
    check_density(out)
    lam, vecs = np.linalg.eigh(out)
    ks = []
    for l, v in zip(lam, vecs.T):
        if l <= KRAUS_CUTOFF:
            continue
        for a in range(dim_in):
            ks.append(np.sqrt(l) * np.outer(v, np.eye(dim_in)[a]))
    return QuantumChannel(dim_in, out.shape[0], tuple(ks), label, measure_prepare=True)


def measure_prepare_channel(povm: Sequence[np.ndarray], outputs: Sequence[np.ndarray],
                            label: str = "measure_prepare") -> QuantumChannel:
    """``σ ↦ Σ_k tr(E_k σ) τ_k``; entanglement breaking by construction."""
    dim_in = povm[0].shape[0]
    dim_out = outputs[0].shape[0]
    ks = []
    for e, tau in zip(povm, outputs):
        le, ve = np.linalg.eigh(e)
        lt, vt = np.linalg.eigh(tau)
        for a, u in zip(le, ve.T):
            if a <= KRAUS_CUTOFF:
                continue
            for b, w in zip(lt, vt.T):
                if b <= KRAUS_CUTOFF:
                    continue
                ks.append(np.sqrt(a * b) * np.outer(w, u.conj()))
    return QuantumChannel(dim_in, dim_out, tuple(ks), label, measure_prepare=True)


# --- mutually unbiased bases ------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MubPair:
    """Two orthonormal bases stored as columns of unitary matrices."""

    d: int
    basis0: np.ndarray
    basis1: np.ndarray

    def __post_init__(self):
        for b in (self.basis0, self.basis1):
            if b.shape != (self.d, self.d):
                raise DimensionError("MUB basis must be a d x d matrix of column vectors")
            if np.max(np.abs(b.conj().T @ b - np.eye(self.d))) > 1e-9:
                raise ValueError("MUB basis is not orthonormal")
        overlaps = np.abs(self.basis0.conj().T @ self.basis1) ** 2
        if np.max(np.abs(overlaps - 1 / self.d)) > 1e-9:
            raise ValueError("bases are not mutually unbiased")

    def basis(self, i: int) -> np.ndarray:
        return self.basis0 if i == 0 else self.basis1


def fourier_matrix(d: int) -> np.ndarray:
    w = np.exp(2j * np.pi / d)
    idx = np.arange(d)
    return w ** np.outer(idx, idx) / np.sqrt(d)


def standard_mub(d: int) -> MubPair:
    """Computational basis and discrete Fourier basis."""
    if d < 2:
        raise ValueError("MUBs need d >= 2")
    return MubPair(d, np.eye(d, dtype=complex), fourier_matrix(d))


def make_mub_qc(pair: MubPair, i: int) -> QuantumChannel:
    """Measure in basis ``i`` and write the outcome ``k`` as ``|k>``."""
    b = pair.basis(i)
    ks = tuple(np.outer(np.eye(pair.d)[k], b[:, k].conj()) for k in range(pair.d))
    return QuantumChannel(pair.d, pair.d, ks, f"mub_qc(d={pair.d},i={i})", measure_prepare=True)


def weyl_unitary(d: int, j: int, k: int) -> np.ndarray:
    """``X^j Z^k`` with ``X|m> = |m+1>`` and ``Z|m> = e^{2πi m/d}|m>``."""
    if not (0 <= j < d and 0 <= k < d):
        raise ValueError(f"Weyl indices ({j}, {k}) out of range for d={d}")
    x = np.roll(np.eye(d, dtype=complex), 1, axis=0)
    z = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    return np.linalg.matrix_power(x, j) @ np.linalg.matrix_power(z, k)


def shor_extend(m: QuantumChannel) -> QuantumChannel:
    """Channel on ``A ⊗ D`` with ``|D| = |B|²``: the classical control ``|jk>``
    selects the Weyl unitary applied after ``m``. Off-diagonal control blocks are
    dephased by the Kraus family itself."""
    db = m.dim_out
    ks = []
    for j in range(db):
        for k in range(db):
            u = weyl_unitary(db, j, k)
            bra = np.eye(db * db)[j * db + k][None, :]
            for a in m.kraus:
                ks.append(np.kron(u @ a, bra))
    return QuantumChannel(m.dim_in * db * db, db, tuple(ks), f"shor({m.label})",
                          measure_prepare=m.measure_prepare)


# --- structural checks --------------------------------------------------------------

def is_cptp(ch: QuantumChannel) -> bool:
    return bool(eig_hermitian(choi(ch))[-1] >= -CP_TOL)


def is_entanglement_breaking(ch: QuantumChannel) -> str:
    """``"yes"``, ``"no"`` or ``"undecided"``.

    A rank-one Kraus family certifies EB in any dimension. Otherwise an NPT Choi
    matrix rules it out, and a PPT Choi matrix is conclusive only when
    ``dim_in * dim_out <= 6``.
    """
    if ch.measure_prepare or all(np.linalg.matrix_rank(k, tol=1e-10) <= 1 for k in ch.kraus):
        return "yes"
    j = choi(ch)
    lam = eig_hermitian(partial_transpose_matrix(j, (ch.dim_out, ch.dim_in), 1))
    if lam[-1] < -CP_TOL:
        return "no"
    return "yes" if ch.dim_in * ch.dim_out <= 6 else "undecided"


# --- channel specs (CLI / config) ----------------------------------------------------

CHANNEL_KINDS = ("depolarizing", "transpose_depolarizing", "two_pauli", "mub_qc", "kraus", "identity", "constant")


def channel_from_spec(spec: dict) -> QuantumChannel:
    """Build a channel from its JSON description (see README for the schema)."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError("channel spec must be a JSON object with a 'kind'")
    kind = spec["kind"]
    if kind == "depolarizing":
        return make_depolarizing(int(spec.get("d", 2)), float(spec["t"]))
    if kind == "transpose_depolarizing":
        return make_transpose_depolarizing(int(spec.get("d", 2)), float(spec["t"]))
    if kind == "two_pauli":
        return make_two_pauli(float(spec["t"]))
    if kind == "mub_qc":
        return make_mub_qc(standard_mub(int(spec["d"])), int(spec.get("i", 0)))
    if kind == "identity":
        return identity_channel(int(spec.get("d", 2)))
    if kind == "constant":
        return constant_channel(int(spec["d_in"]), _parse_complex_matrix(spec["out"]),
                                spec.get("label", "constant"))
    if kind == "kraus":
        ks = [_parse_complex_matrix(k) for k in spec["kraus"]]
        if not ks:
            raise ValueError("kraus channel needs at least one operator")
        dout, din = ks[0].shape
        return QuantumChannel(din, dout, tuple(ks), spec.get("label", "kraus"))
    raise ValueError(f"unknown channel kind {kind!r}; expected one of {CHANNEL_KINDS}")
