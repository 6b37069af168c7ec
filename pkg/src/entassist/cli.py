"""Command-line front end: ``entassist <command> [flags]``.

Exit codes: 0 success, 2 configuration error (nothing written), 3 numeric
advisory such as an unconverged multistart search (output still written).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .channels import channel_from_spec, is_entanglement_breaking
from .discrimination import (
    DEFAULT_C_OVERHEAD,
    ChannelPair,
    advantage_gap,
    assisted_distance,
    min_d_for_gap,
    unassisted_distance,
)
from .entropy import analytic_smin_for_spec, s_min_numeric
from .memsim import MemoryChannel, compare
from .qcore import state_from_spec
from .witness import FAMILIES, fmt, threshold_find, witness_sweep

EXIT_OK, EXIT_CONFIG, EXIT_ADVISORY = 0, 2, 3

DEFAULTS = {
    "grid": "0:1:101",
    "seed": 0,
    "trials": 100_000,
    "format": None,
    "workers": 1,
    "c_overhead": DEFAULT_C_OVERHEAD,
    "restarts": 64,
    "tol": 1e-6,
    "d": 16,
    "kmax": 40,
}


class ConfigError(Exception):
    pass


def _load_json(value):
    """Inline JSON, or a path to a JSON file."""
    if not isinstance(value, str):
        return value
    text = value.strip()
    if not text.startswith(("{", "[")):
        try:
            text = Path(value).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read {value}: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON ({exc})") from None


def parse_grid(text: str) -> np.ndarray:
    try:
        lo, hi, steps = text.split(":")
        lo, hi, steps = float(lo), float(hi), int(steps)
    except ValueError:
        raise ConfigError(f"grid must be lo:hi:steps, got {text!r}") from None
    if not lo < hi or steps < 2:
        raise ConfigError("grid needs lo < hi and steps >= 2")
    return np.linspace(lo, hi, steps)


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with defaults for any flag")
    common.add_argument("--channel", action="append", help="channel spec: JSON or file (repeat for pairs)")
    common.add_argument("--state", help="state spec: JSON or file")
    common.add_argument("--grid", help="lo:hi:steps")
    common.add_argument("--seed", type=int)
    common.add_argument("--trials", type=int)
    common.add_argument("--out", help="output path (stdout when omitted)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--workers", type=int)
    common.add_argument("--c-overhead", dest="c_overhead", type=float, help="overhead constant c in the unassisted rate bound")
    common.add_argument("--restarts", type=int)
    common.add_argument("--tol", type=float)
    common.add_argument("--d", type=int, help="payload dimension of the memory channel")
    common.add_argument("--d-tilde", dest="d_tilde", type=int)
    common.add_argument("--delta", type=float)
    common.add_argument("--epsilon", type=float)
    common.add_argument("--kmax", type=int, help="largest log2 d tabulated by capacity-bounds")

    parser = argparse.ArgumentParser(prog="entassist", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("witness-sweep", "ΔS over a state family"),
                        ("smin", "minimum output entropy of a channel"),
                        ("discriminate", "ε, δ and the rate bounds for a channel pair"),
                        ("capacity-bounds", "bound table over d = 2^k"),
                        ("simulate", "Monte Carlo of the feedback protocol")):
        sub.add_parser(name, parents=[common], help=help_)
    return parser


def resolve(args: argparse.Namespace) -> argparse.Namespace:
    """Merge defaults < config file < explicit flags."""
    config = {}
    if args.config:
        config = _load_json(args.config)
        if not isinstance(config, dict):
            raise ConfigError("config file must hold a JSON object")
    for key, value in config.items():
        key = key.replace("-", "_")
        if key in ("command", "config"):
            continue
        if not hasattr(args, key):
            raise ConfigError(f"unknown config key {key!r}")
        if getattr(args, key) is None:
            if key == "channel" and not isinstance(value, list):
                value = [value]
            setattr(args, key, value)
    for key, value in DEFAULTS.items():
        if getattr(args, key) is None:
            setattr(args, key, value)
    if args.trials < 1:
        raise ConfigError("trials must be >= 1")
    if args.workers < 1 or args.restarts < 1:
        raise ConfigError("workers and restarts must be >= 1")
    if args.c_overhead < 0:
        raise ConfigError("c-overhead must be >= 0")
    if args.d < 2:
        raise ConfigError("d must be >= 2")
    return args


def _channels(args, count: int) -> list[tuple[dict, object]]:
    specs = args.channel or []
    if len(specs) != count:
        raise ConfigError(f"{args.command} needs exactly {count} --channel spec(s), got {len(specs)}")
    out = []
    for raw in specs:
        spec = _load_json(raw)
        try:
            out.append((spec, channel_from_spec(spec)))
        except (ValueError, KeyError, TypeError, IndexError) as exc:
            raise ConfigError(f"bad channel spec {spec!r}: {exc}") from None
    return out


def _state(args):
    if args.state is None:
        raise ConfigError(f"{args.command} needs --state")
    spec = _load_json(args.state)
    try:
        return spec, state_from_spec(spec)
    except (ValueError, KeyError, TypeError, IndexError) as exc:
        raise ConfigError(f"bad state spec {spec!r}: {exc}") from None


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _info(args, line: str) -> None:
    # keep stdout clean when it carries the data itself
    print(line, file=sys.stdout if args.out else sys.stderr)


def _dump(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _r(x: float) -> float:
    return float(fmt(x))


# --- commands -------------------------------------------------------------------

def cmd_witness_sweep(args) -> int:
    (spec, ch), = _channels(args, 1)
    state_spec = _load_json(args.state) if args.state else {"family": "werner"}
    family = state_spec.get("family") if isinstance(state_spec, dict) else None
    if family not in FAMILIES:
        raise ConfigError(f"witness-sweep needs a state family, one of {sorted(FAMILIES)}")
    grid = parse_grid(args.grid)
    if family == "werner" and (grid[0] < 0 or grid[-1] > 1):
        raise ConfigError("Werner parameter grid must lie in [0, 1]")
    if FAMILIES[family](grid[0]).dims[0] != ch.dim_in:
        raise ConfigError(f"channel input dim {ch.dim_in} does not match the {family} family")
    smin = analytic_smin_for_spec(spec) or s_min_numeric(ch, restarts=args.restarts, tol=args.tol,
                                                         seed=args.seed, workers=args.workers)
    result = witness_sweep(family, spec, grid, workers=args.workers, smin=smin)
    _emit(args, result.to_json() if args.format == "json" else result.to_csv())
    ds = result.delta_s
    for a, b, fa, fb in zip(grid, grid[1:], ds, ds[1:]):
        if np.sign(fa) != np.sign(fb) and fa != 0 and fb != 0:
            q_star = threshold_find(family, spec, bracket=(a, b), tol=1e-6, smin=smin)
            _info(args, f"q* = {q_star:.6f}")
            break
    else:
        _info(args, "no sign change of delta_s on the grid")
    if result.advisory:
        _info(args, "advisory: S_min search did not converge")
        return EXIT_ADVISORY
    return EXIT_OK


def cmd_smin(args) -> int:
    (spec, ch), = _channels(args, 1)
    analytic = analytic_smin_for_spec(spec)
    numeric = s_min_numeric(ch, restarts=args.restarts, tol=args.tol, seed=args.seed, workers=args.workers)
    doc = {
        "tool": "entassist",
        "version": __version__,
        "channel": ch.label,
        "s_min_analytic_bits": None if analytic is None else _r(analytic.value),
        "s_min_numeric_bits": _r(numeric.value),
        "agreement_bits": None if analytic is None else _r(abs(analytic.value - numeric.value)),
        "converged": numeric.converged,
        "restarts": numeric.restarts_used,
        "seed": args.seed,
    }
    _emit(args, _dump(doc))
    return EXIT_OK if numeric.converged else EXIT_ADVISORY


def _pair_stats(args):
    (s0, m0), (s1, m1) = _channels(args, 2)
    if (m0.dim_in, m0.dim_out) != (m1.dim_in, m1.dim_out):
        raise ConfigError("paired channels must share input and output dimensions")
    state_spec, rho = _state(args)
    if rho.dims[0] != m0.dim_in:
        raise ConfigError(f"state's first subsystem has dim {rho.dims[0]}, channels expect {m0.dim_in}")
    return m0, m1, rho


def cmd_discriminate(args) -> int:
    m0, m1, rho = _pair_stats(args)
    eps = unassisted_distance(m0, m1, restarts=args.restarts, seed=args.seed, tol=args.tol,
                              workers=args.workers)
    delta = min(assisted_distance(m0, m1, rho), 1.0)
    d_tilde = args.d_tilde or m0.dim_out
    report = advantage_gap(delta, eps.value, args.d, d_tilde, args.c_overhead)
    doc = {k: _r(v) if isinstance(v, float) else v for k, v in report.to_dict().items()}
    doc.update({
        "tool": "entassist",
        "version": __version__,
        "seed": args.seed,
        "epsilon_converged": eps.converged,
        "min_d_for_gap": min_d_for_gap(delta, eps.value, d_tilde, args.c_overhead),
        "eb_channels": [is_entanglement_breaking(m0), is_entanglement_breaking(m1)],
    })
    _emit(args, _dump(doc))
    return EXIT_OK if eps.converged else EXIT_ADVISORY


def cmd_capacity_bounds(args) -> int:
    converged = True
    if args.delta is None or args.epsilon is None:
        m0, m1, rho = _pair_stats(args)
        eps = unassisted_distance(m0, m1, restarts=args.restarts, seed=args.seed, tol=args.tol,
                                  workers=args.workers)
        delta, epsilon, converged = min(assisted_distance(m0, m1, rho), 1.0), eps.value, eps.converged
        d_tilde = args.d_tilde or m0.dim_out
    else:
        delta, epsilon = args.delta, args.epsilon
        d_tilde = args.d_tilde or 2
    if not (0 <= delta <= 1 and 0 <= epsilon <= 1) or d_tilde < 1:
        raise ConfigError("need 0 <= delta, epsilon <= 1 and d-tilde >= 1")
    rows = [advantage_gap(delta, epsilon, 2 ** k, d_tilde, args.c_overhead) for k in range(1, args.kmax + 1)]
    cols = ("d", "lemma1_upper_per_use", "lemma2_lower_per_use", "lemma2_exact_per_use", "gap_per_use")
    min_d = min_d_for_gap(delta, epsilon, d_tilde, args.c_overhead)
    if args.format == "csv":
        lines = [",".join(cols)]
        lines += [",".join([str(r.d)] + [fmt(v) for v in (r.lemma1_upper, r.lemma2_lower, r.exact_lower, r.gap)])
                  for r in rows]
        _emit(args, "\n".join(lines) + "\n")
        _info(args, f"min_d_for_gap = {min_d}")
    else:
        _emit(args, _dump({
            "tool": "entassist",
            "version": __version__,
            "delta": _r(delta),
            "epsilon": _r(epsilon),
            "d_tilde": d_tilde,
            "c": args.c_overhead,
            "min_d_for_gap": min_d,
            "columns": list(cols),
            "rows": [[r.d, _r(r.lemma1_upper), _r(r.lemma2_lower), _r(r.exact_lower), _r(r.gap)] for r in rows],
        }))
    return EXIT_OK if converged else EXIT_ADVISORY


def cmd_simulate(args) -> int:
    m0, m1, rho = _pair_stats(args)
    spec = MemoryChannel(ChannelPair(m0, m1), args.d)
    report = compare(spec, rho, None, args.trials, args.seed, c=args.c_overhead,
                     workers=args.workers, restarts=args.restarts)
    _emit(args, report.to_json())
    return EXIT_OK if report.extra["epsilon_converged"] else EXIT_ADVISORY


COMMANDS = {
    "witness-sweep": cmd_witness_sweep,
    "smin": cmd_smin,
    "discriminate": cmd_discriminate,
    "capacity-bounds": cmd_capacity_bounds,
    "simulate": cmd_simulate,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        args = resolve(args)
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
