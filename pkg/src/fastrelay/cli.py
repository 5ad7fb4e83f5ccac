"""Command-line front end: one subcommand per figure or table.

Outputs are CSV (comma-separated, ``#``-prefixed metadata lines, one
header row, 12-significant-digit scientific floats) or JSON with the same
metadata embedded.  Files are written atomically (write then rename) and
runs are deterministic, so re-running a command reproduces the output
byte for byte.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from ._accel import backend
from .bounds import eta_from_distance, skc_bound
from .errors import InfeasibleGeometryError
from .geometry import ChannelParams
from .nesting import (critical_memory_loss, e1_min, ideal_rate,
                      memory_threshold, scaling_asymptote)
from .optimize import SweepSpec, crossover, heatmap_optimal_d2, optimize_point
from .rates import skr_small_chi
from .sim import SimConfig, simulate_heralding

__all__ = ["main"]

_CONFIG_KEYS = {
    "alpha_db_per_km", "alpha_qm_db_per_km", "c_q", "c_c", "c_qm",
    "tau_s", "eta_switch", "eta_det", "dark_rate_hz", "base_b",
}

_PRESETS = {
    "fig1c": dict(f=2.0 / 3.0, alpha=0.2, depths="0,1,2,3,4,5,inf",
                  min_km=1.0, max_km=500.0, steps=100),
    "fig2b": dict(alpha_qm=0.2, chi_max=0.25, min_km=100.0, max_km=1400.0,
                  steps=14, mode="numeric"),
    "fig2c": dict(alpha_qm=0.02, chi_max=0.25, min_km=100.0, max_km=2600.0,
                  steps=14, mode="numeric"),
    "heatmap-d2": dict(alpha_qm_min=0.004, alpha_qm_max=0.12, alpha_qm_steps=15,
                       l_list="50,100,200,400,700,1000"),
}


class CliError(Exception):
    """Validation failure reported with a nonzero exit status."""


# -- config / params --------------------------------------------------


def load_config(path: str) -> dict:
    """Flat ``key = value`` text or a JSON object; unknown keys rejected."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CliError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(raw, dict):
            raise CliError(f"{path}: top-level JSON value must be an object")
        items = [(k, v, None) for k, v in raw.items()]
    else:
        items = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            if "=" not in body:
                raise CliError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in body.split("=", 1))
            items.append((key, value, lineno))
    config = {}
    for key, value, lineno in items:
        where = f"{path}:{lineno}" if lineno else path
        if key not in _CONFIG_KEYS:
            raise CliError(f"{where}: unknown key '{key}' "
                           f"(allowed: {', '.join(sorted(_CONFIG_KEYS))})")
        try:
            config[key] = int(value) if key == "base_b" else float(value)
        except (TypeError, ValueError) as exc:
            raise CliError(f"{where}: bad value for '{key}': {value!r}") from exc
    return config


def _build_params(args) -> ChannelParams:
    overrides = {}
    if getattr(args, "config", None):
        overrides.update(load_config(args.config))
    flag_map = {
        "alpha": "alpha_db_per_km", "alpha_qm": "alpha_qm_db_per_km",
        "tau": "tau_s", "eta_switch": "eta_switch", "eta_det": "eta_det",
        "dark_rate": "dark_rate_hz", "base_b": "base_b",
    }
    for flag, key in flag_map.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides[key] = value
    if getattr(args, "no_dark_counts", False):
        overrides["dark_rate_hz"] = 0.0
    alpha_qm = overrides.pop("alpha_qm_db_per_km", 0.2)
    try:
        return ChannelParams.default(alpha_qm, **overrides)
    except (TypeError, ValueError) as exc:
        raise CliError(str(exc)) from exc


# -- output -----------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.11e}"
    return str(value)


def write_table(dest: str, columns, rows, metadata: dict, fmt: str) -> None:
    if fmt == "csv":
        lines = [f"# {key} = {metadata[key]}" for key in sorted(metadata)]
        lines.append(",".join(columns))
        for row in rows:
            lines.append(",".join(_fmt(v) for v in row))
        payload = "\n".join(lines) + "\n"
    else:
        payload = json.dumps({
            "metadata": metadata,
            "columns": list(columns),
            "rows": [[v if isinstance(v, str) else
                      (int(v) if isinstance(v, (int, np.integer)) else float(v))
                      for v in row] for row in rows],
        }, indent=2, sort_keys=True) + "\n"
    if dest == "-":
        sys.stdout.write(payload)
        return
    directory = os.path.dirname(os.path.abspath(dest))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".fastrelay-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(payload)
        os.replace(tmp, dest)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _metadata(args, params: ChannelParams | None = None, **extra) -> dict:
    meta = {"tool": "fastrelay", "version": __version__,
            "command": args.cmd, "kernel_backend": backend()}
    if params is not None:
        for key in sorted(_CONFIG_KEYS):
            meta[f"param.{key}"] = _fmt(getattr(params, key))
    meta.update({k: str(v) for k, v in extra.items()})
    return meta


# -- helpers ----------------------------------------------------------


def _parse_floats(text: str) -> list[float]:
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise CliError(f"bad numeric list: {text!r}") from exc
    if not values:
        raise CliError(f"empty numeric list: {text!r}")
    return values


def _parse_depths(text: str) -> list:
    depths = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if tok in ("inf", "Inf", "INF"):
            depths.append(math.inf)
        else:
            try:
                depths.append(int(tok))
            except ValueError as exc:
                raise CliError(f"bad nesting depth: {tok!r}") from exc
    if not depths:
        raise CliError("empty depth list")
    return depths


def _grid(args) -> np.ndarray:
    if args.max_km <= args.min_km or args.steps < 1:
        raise CliError("need max-km > min-km and steps >= 1")
    return np.linspace(args.min_km, args.max_km, args.steps + 1)


def _apply_preset(args) -> None:
    preset = getattr(args, "preset", None)
    if not preset:
        return
    if preset not in _PRESETS:
        raise CliError(f"unknown preset '{preset}'")
    for key, value in _PRESETS[preset].items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)


# -- subcommands ------------------------------------------------------


def cmd_bounds(args) -> int:
    grid = _grid(args)
    repeaters = [int(n) for n in _parse_floats(args.repeaters)]
    columns = ["L_km"] + [f"skc{n}_bits_per_use" for n in repeaters]
    rows = []
    for L in grid:
        eta = eta_from_distance(L, args.alpha)
        rows.append([L] + [skc_bound(eta, n, allow_infinite=True)
                           for n in repeaters])
    meta = _metadata(args, alpha_db_per_km=_fmt(args.alpha))
    write_table(args.output, columns, rows, meta, args.format)
    return 0


def cmd_ideal(args) -> int:
    _apply_preset(args)
    for key, default in (("f", 2.0 / 3.0), ("alpha", 0.2),
                         ("depths", "0,1,2,3,4,5,inf"),
                         ("min_km", 1.0), ("max_km", 500.0), ("steps", 100)):
        if getattr(args, key, None) is None:
            setattr(args, key, default)
    if not 0.0 < args.f < 1.0:
        raise CliError(f"speed ratio f must be in (0, 1), got {args.f}")
    depths = _parse_depths(args.depths)
    grid = _grid(args)
    columns = (["L_km"]
               + [f"k{'inf' if d == math.inf else d}_bits_per_use" for d in depths]
               + ["skc0_bits_per_use", "skc1_bits_per_use"])
    rows = []
    for L in grid:
        eta = eta_from_distance(L, args.alpha)
        rows.append([L]
                    + [ideal_rate(args.f, d, L, args.alpha) for d in depths]
                    + [skc_bound(eta, 0, allow_infinite=True),
                       skc_bound(eta, 1, allow_infinite=True)])
    k_inf = lambda L: ideal_rate(args.f, math.inf, L, args.alpha)
    meta = _metadata(
        args, f=_fmt(args.f), alpha_db_per_km=_fmt(args.alpha),
        scaling_asymptote=_fmt(scaling_asymptote(args.f)))
    for n in (0, 1):
        cross = crossover(
            k_inf,
            lambda L, n=n: skc_bound(eta_from_distance(L, args.alpha), n),
            max(args.min_km, 1.0), args.max_km)
        meta[f"crossover_skc{n}_km"] = "none" if cross is None else f"{cross:.2f}"
    write_table(args.output, columns, rows, meta, args.format)
    return 0


def cmd_practical(args) -> int:
    _apply_preset(args)
    for key, default in (("alpha_qm", 0.2), ("chi_max", 0.25), ("mode", "numeric"),
                         ("min_km", 100.0), ("max_km", 1000.0), ("steps", 9)):
        if getattr(args, key, None) is None:
            setattr(args, key, default)
    params = _build_params(args)
    grid = _grid(args)
    chi_grid = tuple(float(x) for x in np.geomspace(0.01, args.chi_max, 10))
    spec = SweepSpec(mode=args.mode, chi_grid=chi_grid, m_max=args.m_max)
    alpha = params.alpha_db_per_km
    columns = ["L_km", "skr_multi_bits_per_s", "skr_multi_bits_per_use",
               "skr_single_bits_per_s", "skr_single_bits_per_use",
               "skc0_bits_per_use", "skc1_bits_per_use",
               "best_d2_km", "best_m", "best_chi"]
    rows = []
    for L in grid:
        point = optimize_point(float(L), params, spec)
        single = _single_node_best(float(L), params, spec)
        eta = eta_from_distance(L, alpha)
        rows.append([
            float(L), point.skr_bits_per_s, point.skr_bits_per_use,
            single, single * params.tau_s,
            skc_bound(eta, 0, allow_infinite=True),
            skc_bound(eta, 1, allow_infinite=True),
            point.best_d2, point.best_m, point.best_chi,
        ])
    meta = _metadata(args, params, mode=args.mode, chi_max=_fmt(args.chi_max),
                     preset=getattr(args, "preset", None) or "none",
                     baseline="single central swap at L/2, squeezing optimized")
    write_table(args.output, columns, rows, meta, args.format)
    return 0


def _single_node_best(L: float, params: ChannelParams, spec: SweepSpec) -> float:
    """Baseline rate at L: squeezing swept over the same grid as the main curve."""
    if spec.mode == "analytic":
        eta_arm = eta_from_distance(L / 2.0, params.alpha_db_per_km)
        return max(2.0 * chi * chi * eta_arm / params.tau_s
                   for chi in spec.chi_grid)
    from .errors import ProbabilityOverflowError
    from .fock.protocol import single_node_skr
    best = 0.0
    for chi in sorted(spec.chi_grid):
        try:
            best = max(best, single_node_skr(L, params, chi).skr_bits_per_s)
        except ProbabilityOverflowError:
            continue
    return best


def cmd_heatmap(args) -> int:
    _apply_preset(args)
    for key, default in (("alpha_qm_min", 0.004), ("alpha_qm_max", 0.12),
                         ("alpha_qm_steps", 15), ("l_list", "50,100,200,400,700,1000")):
        if getattr(args, key, None) is None:
            setattr(args, key, default)
    params = _build_params(args)
    a_grid = np.linspace(args.alpha_qm_min, args.alpha_qm_max, args.alpha_qm_steps)
    l_grid = np.asarray(_parse_floats(args.l_list))
    result = heatmap_optimal_d2(a_grid, l_grid, params, SweepSpec(m_max=args.m_max))
    columns = ["L_km", "alpha_qm_db_per_km", "d2_over_l", "skr_bits_per_s",
               "feasible"]
    rows = []
    for i, L in enumerate(result.l_grid):
        for j, a in enumerate(result.alpha_qm_grid):
            rows.append([float(L), float(a), float(result.d2_over_l[i, j]),
                         float(result.skr_bits_per_s[i, j]),
                         bool(result.feasible[i, j])])
    meta = _metadata(args, params, ideal_switches="true",
                     nsp_threshold=_fmt(result.nsp_threshold))
    for i, L in enumerate(result.l_grid):
        meta[f"break_even_alpha_qm.L={L:g}"] = _fmt(result.break_even_alpha[i])
    write_table(args.output, columns, rows, meta, args.format)
    return 0


def cmd_sim(args) -> int:
    config = SimConfig(p0=args.p0, p1=args.p1, m=args.m, trials=args.trials,
                       seed=args.seed, histogram_bins=args.bins)
    stats = simulate_heralding(config)
    columns = ["bin_lo", "bin_hi", "mass"]
    rows = [[float(lo), float(hi), float(mass)]
            for lo, hi, mass in zip(stats.hist_lo, stats.hist_hi, stats.hist_mass)]
    meta = _metadata(
        args, p0=_fmt(args.p0), p1=_fmt(args.p1), m=args.m, trials=args.trials,
        seed=stats.seed, generator=stats.generator, sim_backend=stats.backend,
        mean_wait_slots=_fmt(stats.mean_wait_slots), stderr=_fmt(stats.stderr),
        empirical_rate=_fmt(stats.empirical_rate),
        mean_storage_slots=_fmt(stats.mean_storage_slots))
    write_table(args.output, columns, rows, meta, args.format)
    return 0


def cmd_thresholds(args) -> int:
    f_list = _parse_floats(args.f_list)
    gammas = np.linspace(0.0, args.gamma_max, args.gamma_steps)
    columns = ["f", "gamma", "gamma_star", "alpha_qm_crit_db_per_km",
               "e1_min_over_l", "buffered"]
    rows = []
    for f in f_list:
        info = memory_threshold(f, args.cc, args.cqm)
        crit = critical_memory_loss(f, args.cc, args.cqm, args.alpha)
        for gamma in gammas:
            rows.append([f, float(gamma), info.gamma_star, crit,
                         e1_min(float(gamma), f, args.cc, args.cqm, 1.0),
                         gamma <= info.gamma_star])
    meta = _metadata(args, alpha_db_per_km=_fmt(args.alpha),
                     c_c=_fmt(args.cc), c_qm=_fmt(args.cqm))
    write_table(args.output, columns, rows, meta, args.format)
    return 0


# -- argument parsing --------------------------------------------------


def _add_common(parser) -> None:
    parser.add_argument("-o", "--output", default="-",
                        help="output path, or - for stdout")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--config", help="channel-parameter file (key=value or JSON)")


def _add_range(parser, min_km=None, max_km=None, steps=None) -> None:
    parser.add_argument("--min-km", dest="min_km", type=float, default=min_km)
    parser.add_argument("--max-km", dest="max_km", type=float, default=max_km)
    parser.add_argument("--steps", type=int, default=steps)


def _add_channel_flags(parser) -> None:
    parser.add_argument("--alpha", type=float, help="channel loss, dB/km")
    parser.add_argument("--alpha-qm", dest="alpha_qm", type=float,
                        help="buffer loss, dB/km")
    parser.add_argument("--tau", type=float, help="pulse period, s")
    parser.add_argument("--eta-switch", dest="eta_switch", type=float)
    parser.add_argument("--eta-det", dest="eta_det", type=float)
    parser.add_argument("--dark-rate", dest="dark_rate", type=float)
    parser.add_argument("--base-b", dest="base_b", type=int)
    parser.add_argument("--no-dark-counts", dest="no_dark_counts",
                        action="store_true")
    parser.add_argument("--m-max", dest="m_max", type=int, default=4096)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fastrelay",
        description="Key-rate curves, crossovers and heatmaps for the "
                    "multi-node single-photon-interference protocol.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("bounds", help="repeaterless / n-repeater capacity curves")
    _add_common(p)
    _add_range(p, 0.0, 500.0, 100)
    p.add_argument("--alpha", type=float, default=0.2)
    p.add_argument("--repeaters", default="0,1")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("ideal", help="ideal nested-relay rate curves")
    _add_common(p)
    _add_range(p)
    p.add_argument("--preset", choices=("fig1c",))
    p.add_argument("--f", type=float, help="speed ratio c_q/c_c")
    p.add_argument("--alpha", type=float)
    p.add_argument("--depths", help="comma list of depths, inf allowed")
    p.set_defaults(func=cmd_ideal)

    p = sub.add_parser("practical",
                       help="optimized practical-protocol rate curve")
    _add_common(p)
    _add_range(p)
    _add_channel_flags(p)
    p.add_argument("--preset", choices=("fig2b", "fig2c"))
    p.add_argument("--mode", choices=("analytic", "numeric"))
    p.add_argument("--chi-max", dest="chi_max", type=float)
    p.set_defaults(func=cmd_practical)

    p = sub.add_parser("heatmap", help="optimal relay-offset heatmap")
    _add_common(p)
    _add_channel_flags(p)
    p.add_argument("--preset", choices=("heatmap-d2",))
    p.add_argument("--alpha-qm-min", dest="alpha_qm_min", type=float)
    p.add_argument("--alpha-qm-max", dest="alpha_qm_max", type=float)
    p.add_argument("--alpha-qm-steps", dest="alpha_qm_steps", type=int)
    p.add_argument("--l-list", dest="l_list")
    p.set_defaults(func=cmd_heatmap)

    p = sub.add_parser("sim", help="matching-wait Monte Carlo")
    _add_common(p)
    p.add_argument("--p0", type=float, required=True)
    p.add_argument("--p1", type=float, default=1.0)
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bins", type=int, default=0)
    p.set_defaults(func=cmd_sim)

    p = sub.add_parser("thresholds", help="memory break-even thresholds")
    _add_common(p)
    p.add_argument("--f-list", dest="f_list", default="1.0,0.66666666666666667")
    p.add_argument("--alpha", type=float, default=0.2)
    p.add_argument("--cc", type=float, default=1.0)
    p.add_argument("--cqm", type=float, default=1.0)
    p.add_argument("--gamma-max", dest="gamma_max", type=float, default=0.8)
    p.add_argument("--gamma-steps", dest="gamma_steps", type=int, default=41)
    p.set_defaults(func=cmd_thresholds)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"fastrelay: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, InfeasibleGeometryError, OSError) as exc:
        print(f"fastrelay: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
