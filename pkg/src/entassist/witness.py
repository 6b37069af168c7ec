"""Entropic entanglement witness ΔS = S(B|B̃) − S_min(M) and its sweeps.

ΔS < 0 certifies that the state is entangled, and that sharing it raises the
Holevo quantity of the Shor-extended channel built from ``M`` above its
unassisted value ``log|B| − S_min(M)``. The extended channel itself is never
materialised here; everything is computed from ``M`` directly.
"""
from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import __version__
from .channels import QuantumChannel, apply_on_subsystem, channel_from_spec, is_entanglement_breaking
from .entropy import (
    Ensemble,
    SminResult,
    analytic_smin_for_spec,
    conditional_entropy,
    majorizes,
    s_min_numeric,
)
from .qcore import DensityMatrix, DimensionError, eig_hermitian, partial_trace, pure_state, tensor, werner_state

CSV_COLUMNS = ("param", "s_cond_bits", "s_min_bits", "delta_s_bits",
               "entangled_witnessed", "eb_channel", "capacity_claim")


@dataclass(frozen=True)
class WitnessVerdict:
    s_cond: float
    s_min: float
    delta_s: float
    entangled_witnessed: bool
    eb_channel: str
    capacity_claim: str
    advisory: bool = False


def delta_s(rho: DensityMatrix, m: QuantumChannel, smin: SminResult,
            eb: str | None = None) -> WitnessVerdict:
    """Evaluate the witness for state ``rho`` with ``m`` acting on its first factor.

    ``advisory`` is set when ``smin`` comes from an unconverged numeric search;
    an overestimated S_min can only hide entanglement, never fake it.
    """
    if len(rho.dims) != 2:
        raise DimensionError("witness needs a bipartite state")
    if rho.dims[0] != m.dim_in:
        raise DimensionError(f"channel input {m.dim_in} does not match subsystem dim {rho.dims[0]}")
    omega = apply_on_subsystem(m, rho, 0)
    s_cond = conditional_entropy(omega, 0, 1)
    ds = s_cond - smin.value
    eb = eb if eb is not None else is_entanglement_breaking(m)
    return WitnessVerdict(
        s_cond=s_cond,
        s_min=smin.value,
        delta_s=ds,
        entangled_witnessed=bool(ds < 0),
        eb_channel=eb,
        capacity_claim="full_capacity" if eb == "yes" else "holevo_only",
        advisory=smin.method == "multistart" and not smin.converged,
    )


def assisted_holevo_lower(rho: DensityMatrix, m: QuantumChannel) -> float:
    """``log2|B| − S(B|B̃)`` for ``(m ⊗ id)(rho)``: the Holevo rate Alice gets by
    leaving her share of ``rho`` untouched and sending uniform Weyl labels."""
    if rho.dims[0] != m.dim_in:
        raise DimensionError("channel input does not match first subsystem")
    omega = apply_on_subsystem(m, rho, 0)
    return float(np.log2(m.dim_out)) - conditional_entropy(omega, 0, 1)


def unassisted_chi_shor(m: QuantumChannel, smin: SminResult) -> float:
    """Holevo capacity ``log2|B| − S_min(m)`` of the Shor extension of ``m``."""
    return float(np.log2(m.dim_out)) - smin.value


def shor_optimal_ensemble(m: QuantumChannel, psi_min: np.ndarray) -> Ensemble:
    """Uniform ensemble ``{ψ_min ⊗ |jk><jk|}`` that attains the Shor-extension capacity."""
    db = m.dim_out
    psi_min = np.asarray(psi_min, dtype=complex)
    states = []
    for idx in range(db * db):
        control = np.zeros(db * db, dtype=complex)
        control[idx] = 1.0
        states.append(pure_state(tensor(psi_min, control), (m.dim_in * db * db,)))
    return Ensemble(tuple([1 / db ** 2] * db ** 2), tuple(states))


# --- sweeps --------------------------------------------------------------------------

@dataclass
class SweepResult:
    rows: list[tuple[float, WitnessVerdict]]
    family_label: str
    channel_label: str
    channel_spec: dict = field(default_factory=dict)

    def __post_init__(self):
        params = [p for p, _ in self.rows]
        if any(b <= a for a, b in zip(params, params[1:])):
            raise ValueError("sweep parameters must be strictly increasing")

    @property
    def params(self) -> np.ndarray:
        return np.array([p for p, _ in self.rows])

    @property
    def delta_s(self) -> np.ndarray:
        return np.array([v.delta_s for _, v in self.rows])

    @property
    def advisory(self) -> bool:
        return any(v.advisory for _, v in self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for p, v in self.rows:
            w.writerow([fmt(p), fmt(v.s_cond), fmt(v.s_min), fmt(v.delta_s),
                        str(v.entangled_witnessed).lower(), v.eb_channel, v.capacity_claim])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "tool": "entassist",
            "version": __version__,
            "family": self.family_label,
            "channel": self.channel_label,
            "channel_spec": self.channel_spec,
            "columns": list(CSV_COLUMNS),
            "rows": [{"param": float(fmt(p)), "s_cond_bits": float(fmt(v.s_cond)),
                      "s_min_bits": float(fmt(v.s_min)), "delta_s_bits": float(fmt(v.delta_s)),
                      "entangled_witnessed": v.entangled_witnessed, "eb_channel": v.eb_channel,
                      "capacity_claim": v.capacity_claim, "advisory": v.advisory}
                     for p, v in self.rows],
        }
        return json.dumps(doc, indent=2) + "\n"


def fmt(x: float) -> str:
    """12 significant digits, the serialisation precision for all outputs."""
    return f"{x:.12g}"


FAMILIES = {"werner": werner_state}


def _family_state(family: str, param: float) -> DensityMatrix:
    try:
        return FAMILIES[family](param)
    except KeyError:
        raise ValueError(f"unknown state family {family!r}") from None


def resolve_smin(spec: dict, ch: QuantumChannel, restarts: int = 64, tol: float = 1e-6,
                 seed: int = 0) -> SminResult:
    """Analytic S_min when a formula exists for ``spec``, numeric otherwise."""
    return analytic_smin_for_spec(spec) or s_min_numeric(ch, restarts=restarts, tol=tol, seed=seed)


def _sweep_point(args):
    family, param, spec, smin, eb = args
    ch = channel_from_spec(spec)
    return delta_s(_family_state(family, param), ch, smin, eb=eb)


def witness_sweep(family: str, channel_spec: dict, grid: Sequence[float], workers: int = 1,
                  smin: SminResult | None = None, restarts: int = 64, tol: float = 1e-6,
                  seed: int = 0) -> SweepResult:
    grid = [float(g) for g in grid]
    if not grid:
        raise ValueError("empty grid")
    if family == "werner" and (min(grid) < 0 or max(grid) > 1):
        raise ValueError("Werner grid must lie in [0, 1]")
    ch = channel_from_spec(channel_spec)
    if smin is None:
        smin = resolve_smin(channel_spec, ch, restarts=restarts, tol=tol, seed=seed)
    eb = is_entanglement_breaking(ch)
    jobs = [(family, q, channel_spec, smin, eb) for q in grid]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            verdicts = list(pool.map(_sweep_point, jobs))
    else:
        verdicts = [_sweep_point(j) for j in jobs]
    return SweepResult(list(zip(grid, verdicts)), family, ch.label, dict(channel_spec))


def threshold_find(family: str, channel_spec: dict, bracket: tuple[float, float] = (0.30, 0.40),
                   tol: float = 1e-4, smin: SminResult | None = None) -> float:
    """Bisect the sign change of ΔS in the state parameter."""
    ch = channel_from_spec(channel_spec)
    if smin is None:
        smin = resolve_smin(channel_spec, ch)
    eb = is_entanglement_breaking(ch)

    def f(q):
        return delta_s(_family_state(family, q), ch, smin, eb=eb).delta_s

    lo, hi = bracket
    flo, fhi = f(lo), f(hi)
    if np.sign(flo) == np.sign(fhi):
        raise ValueError(f"ΔS does not change sign on [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def spectra_precheck(rho: DensityMatrix) -> dict:
    """Spectral obstruction test.

    If both marginal spectra majorize the global one, no channel whose output
    spectrum depends only on these spectra can witness the state (bound
    entangled states always fall in this class).
    """
    if len(rho.dims) != 2:
        raise DimensionError("precheck needs a bipartite state")
    lam_ab = eig_hermitian(rho.matrix)
    lam_a = eig_hermitian(partial_trace(rho, [0]).matrix)
    lam_b = eig_hermitian(partial_trace(rho, [1]).matrix)
    a_dom = majorizes(lam_a, lam_ab)
    b_dom = majorizes(lam_b, lam_ab)
    return {
        "witnessable_by_spectral_channels": not (a_dom and b_dom),
        "marginal_a_majorizes": a_dom,
        "marginal_b_majorizes": b_dom,
        "spectrum_ab": lam_ab.tolist(),
        "spectrum_a": lam_a.tolist(),
        "spectrum_b": lam_b.tolist(),
    }


def verdict_dict(v: WitnessVerdict) -> dict:
    return asdict(v)
