"""Dense linear algebra on small Hilbert spaces and the standard two-party states.

Conventions: tensor products are row-major with the leftmost subsystem most
significant, so ``|ab>`` sits at index ``a * dim_b + b``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10
TRACE_TOL = 1e-10


class StateError(ValueError):
    """Raised when a matrix is not a valid density matrix."""


class DimensionError(ValueError):
    """Raised on subsystem index or dimension mismatches."""


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A Hermitian, positive, unit-trace matrix with its subsystem layout.

    Construction validates all three properties; use :meth:`trusted` to skip
    the eigendecomposition on internal hot paths where validity is known.
    """

    matrix: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)
        side = int(np.prod(dims))
        if m.shape != (side, side):
            raise DimensionError(f"matrix shape {m.shape} does not match dims {dims}")
        check_density(m)

    @classmethod
    def trusted(cls, matrix: np.ndarray, dims: Sequence[int]) -> "DensityMatrix":
        obj = object.__new__(cls)
        object.__setattr__(obj, "matrix", np.asarray(matrix, dtype=complex))
        object.__setattr__(obj, "dims", tuple(int(d) for d in dims))
        return obj

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __repr__(self):
        return f"DensityMatrix(dims={self.dims})"


def check_density(m: np.ndarray) -> None:
    herm_err = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if herm_err > HERMITIAN_TOL:
        raise StateError(f"not Hermitian (max deviation {herm_err:.3g})")
    tr = np.trace(m).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise StateError(f"trace {tr!r} is not 1")
    lam_min = np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0]
    if lam_min < -PSD_TOL:
        raise StateError(f"negative eigenvalue {lam_min:.3g}")


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    return m.shape[0] == m.shape[1] and bool(np.max(np.abs(m - m.conj().T)) <= tol)


def tensor(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of any number of operators or vectors, left to right."""
    out = np.asarray(ops[0])
    for op in ops[1:]:
        out = np.kron(out, op)
    return out


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def pure_state(psi: np.ndarray, dims: Sequence[int] | None = None) -> DensityMatrix:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return DensityMatrix(projector(psi), dims if dims is not None else (psi.size,))


def maximally_mixed(d: int) -> DensityMatrix:
    return DensityMatrix.trusted(np.eye(d, dtype=complex) / d, (d,))


def product_state(*states: DensityMatrix) -> DensityMatrix:
    dims = tuple(d for s in states for d in s.dims)
    return DensityMatrix.trusted(tensor(*(s.matrix for s in states)), dims)


def _check_indices(dims: Sequence[int], indices: Iterable[int]) -> list[int]:
    idx = sorted(set(int(i) for i in indices))
    for i in idx:
        if not 0 <= i < len(dims):
            raise DimensionError(f"subsystem index {i} out of range for dims {tuple(dims)}")
    return idx


def partial_trace_matrix(m: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep`` from a square matrix."""
    dims = list(dims)
    keep = _check_indices(dims, keep)
    n = len(dims)
    t = np.asarray(m).reshape(dims + dims)
    # trace the highest index first so that remaining axis positions stay valid
    for i in reversed(range(n)):
        if i in keep:
            continue
        cur = t.ndim // 2
        t = np.trace(t, axis1=i, axis2=i + cur)
    side = int(np.prod([dims[i] for i in keep])) if keep else 1
    return t.reshape(side, side)


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    keep = _check_indices(rho.dims, keep)
    m = partial_trace_matrix(rho.matrix, rho.dims, keep)
    return DensityMatrix.trusted(m, tuple(rho.dims[i] for i in keep) or (1,))


def partial_transpose_matrix(m: np.ndarray, dims: Sequence[int], sys: int) -> np.ndarray:
    dims = list(dims)
    _check_indices(dims, [sys])
    n = len(dims)
    t = np.asarray(m).reshape(dims + dims)
    axes = list(range(2 * n))
    axes[sys], axes[sys + n] = axes[sys + n], axes[sys]
    side = int(np.prod(dims))
    return t.transpose(axes).reshape(side, side)


def partial_transpose(rho: DensityMatrix, sys: int) -> np.ndarray:
    """Transpose subsystem ``sys`` in the computational basis.

    Returns a plain matrix since the result need not be positive.
    """
    return partial_transpose_matrix(rho.matrix, rho.dims, sys)


def eig_hermitian(m: np.ndarray) -> np.ndarray:
    """Real eigenvalues of a Hermitian matrix in non-increasing order."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or not is_hermitian(m):
        raise ValueError("eig_hermitian requires a Hermitian matrix")
    lam = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    return lam[::-1].copy()


def trace_norm(m: np.ndarray) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    return float(np.sum(np.abs(eig_hermitian(m))))


# --- named states ----------------------------------------------------------

def swap_operator(d: int) -> np.ndarray:
    f = np.zeros((d * d, d * d), dtype=complex)
    for a in range(d):
        for b in range(d):
            f[b * d + a, a * d + b] = 1.0
    return f


def werner_state(q: float) -> DensityMatrix:
    """Two-qubit Werner state ``(q/3) P_sym + (1-q) P_anti``.

    ``q = 0`` is the singlet; the state is separable iff ``q >= 1/2``.
    """
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"Werner parameter q={q} outside [0, 1]")
    eye = np.eye(4, dtype=complex)
    f = swap_operator(2)
    p_sym = (eye + f) / 2
    p_anti = (eye - f) / 2
    return DensityMatrix((q / 3) * p_sym + (1 - q) * p_anti, (2, 2))


def max_entangled(d: int) -> DensityMatrix:
    if d < 2:
        raise ValueError("max_entangled needs d >= 2")
    psi = np.zeros(d * d, dtype=complex)
    psi[[i * d + i for i in range(d)]] = 1 / np.sqrt(d)
    return DensityMatrix(projector(psi), (d, d))


def is_ppt(rho: DensityMatrix) -> tuple[bool, float]:
    """PPT test on a bipartite state.

    Returns ``(ppt, min_eigenvalue_of_partial_transpose)``. Exact separability
    criterion for 2x2 and 2x3.
    """
    if len(rho.dims) != 2:
        raise DimensionError("is_ppt requires a bipartite state")
    lam = eig_hermitian(partial_transpose(rho, 1))
    return bool(lam[-1] >= -PSD_TOL), float(lam[-1])


# --- random sampling ---------------------------------------------------------

def random_pure(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    g = rng.normal(size=(d, rank or d)) + 1j * rng.normal(size=(d, rank or d))
    m = g @ g.conj().T
    return m / np.trace(m).real


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (g + g.conj().T) / 2


def random_separable(dims: Sequence[int], rng: np.random.Generator, terms: int = 8) -> DensityMatrix:
    """Convex mixture of up to ``terms`` random product pure states."""
    k = int(rng.integers(1, terms + 1))
    w = rng.dirichlet(np.ones(k))
    m = np.zeros((int(np.prod(dims)),) * 2, dtype=complex)
    for p in w:
        m += p * tensor(*(projector(random_pure(d, rng)) for d in dims))
    return DensityMatrix.trusted(m, dims)


# --- state specs (CLI / config) ---------------------------------------------

def _parse_complex_matrix(rows) -> np.ndarray:
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 3 or arr.shape[-1] != 2:
        raise ValueError("complex matrices are encoded as rows of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def state_from_spec(spec: dict) -> DensityMatrix:
    """Build a state from ``{"family": "werner", "q": ...}``,
    ``{"kind": "max_entangled", "d": ...}`` or ``{"matrix": ..., "dims": [...]}``."""
    if not isinstance(spec, dict):
        raise ValueError("state spec must be a JSON object")
    if spec.get("family") == "werner":
        return werner_state(float(spec["q"]))
    if spec.get("kind") == "max_entangled":
        return max_entangled(int(spec["d"]))
    if "matrix" in spec:
        m = _parse_complex_matrix(spec["matrix"])
        dims = spec.get("dims") or [m.shape[0]]
        return DensityMatrix(m, dims)
    raise ValueError(f"unrecognised state spec: {spec!r}")
