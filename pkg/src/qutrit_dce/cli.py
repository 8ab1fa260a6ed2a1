"""Command-line front end.

Subcommands::

    qutrit-dce spectrum  ground-branch levels: exact, fourth order, quadratic fit
    qutrit-dce rates     analytic vs exact J-photon transition rates
    qutrit-dce evolve    time series and photon distributions
    qutrit-dce scan      modulation-frequency scan around the resonance

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .config import PRESETS, RunConfig, load_json, preset
from .dynamics import (
    EffectiveState,
    TimeGrid,
    effective_dt,
    evolve_effective,
    evolve_lindblad,
    evolve_schrodinger,
    pure_to_density,
)
from .errors import AmbiguousBranch, DCEError, ValidationError
from .model import bare_hamiltonian
from .perturbation import effective_spectrum, lambda_fourth_order, rate_1photon, rate_3photon
from .resonance import scan_eta
from .spectrum import diagonalize, numeric_rate, zeta_branch

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
DEFAULT_K_MAX = 10


def fmt(x):
    """Scientific notation with 15 significant digits; None/NaN become an empty field."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return f"{x:.14e}"


def write_table(path: Path, columns, rows, cfg: RunConfig | None = None):
    lines = []
    if cfg is not None:
        lines += ["# " + line for line in cfg.to_json().splitlines()]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def print_table(columns, rows, out=None):
    out = out or sys.stdout
    print(",".join(columns), file=out)
    for row in rows:
        print(",".join(v if isinstance(v, str) else fmt(v) for v in row), file=out)


def _spectrum_and_branch(cfg: RunConfig, k_max, reserve=0):
    """Spectrum and ground branch up to ``k_max + reserve``.

    With a configured ``k_max`` an ambiguous branch is an error.  With the
    default, the branch is cut at the last unambiguous level and the cut is
    reported on stderr.  Returns (spectrum, branch, rows) with rows the
    number of table rows that fit.
    """
    spec = diagonalize(bare_hamiltonian(cfg.params, cfg.space))
    try:
        return spec, zeta_branch(spec, cfg.space, k_max=k_max + reserve), k_max + 1
    except AmbiguousBranch as exc:
        if cfg.k_max is not None or exc.k - 1 - reserve < 0:
            raise
        print(f"note: ground branch ends at k={exc.k - 1} ({exc}); table truncated", file=sys.stderr)
        return spec, zeta_branch(spec, cfg.space, k_max=exc.k - 1), exc.k - reserve


def _default_k_max(cfg: RunConfig, reserve=0):
    k_max = cfg.k_max if cfg.k_max is not None else min(DEFAULT_K_MAX, cfg.space.n_max - 4 - reserve)
    if k_max < 0 or k_max + reserve > cfg.space.n_max:
        raise ValidationError(f"k_max={k_max} does not fit n_max={cfg.space.n_max}")
    return k_max


def spectrum_table(cfg: RunConfig):
    _, branch, n_rows = _spectrum_and_branch(cfg, _default_k_max(cfg))
    eff = effective_spectrum(cfg.params)
    rows = []
    for k in range(n_rows):
        rows.append((str(k), float(branch.energies[k]), lambda_fourth_order(k, cfg.params),
                     eff.omega_ef * k + eff.alpha * k**2, float(branch.overlaps[k])))
    return ("k", "lambda_num", "lambda_pert4", "lambda_quadratic", "overlap"), rows


def rates_table(cfg: RunConfig, J):
    spec, branch, n_rows = _spectrum_and_branch(cfg, _default_k_max(cfg, reserve=J), reserve=J)
    analytic = rate_3photon if J == 3 else rate_1photon
    rows = []
    for k in range(n_rows):
        a = analytic(k, cfg.params, cfg.drive).magnitude
        n = abs(numeric_rate(spec, cfg.drive, int(branch.indices[k]), int(branch.indices[k + J])))
        dev = abs(a - n) / n if n > 0 else (0.0 if a == 0 else math.inf)
        rows.append((str(k), a, n, dev))
    return ("k", "theta_analytic", "theta_numeric", "relative_deviation"), rows


def _initial_state(cfg: RunConfig):
    if cfg.initial == "ground":
        spec = diagonalize(bare_hamiltonian(cfg.params, cfg.space))
        return spec.eigenvectors[:, 0].astype(complex)
    return cfg.space.basis_state(0, 0)


def run_modes(cfg: RunConfig):
    """Run every requested mode; returns {mode: TimeSeries}."""
    psi0 = _initial_state(cfg)
    results = {}
    for mode in cfg.modes:
        if mode == "schrodinger":
            results[mode] = evolve_schrodinger(cfg.params, cfg.drive, psi0, cfg.time_grid(), cfg.space,
                                               keep_states=False)
        elif mode == "lindblad":
            results[mode] = evolve_lindblad(cfg.params, cfg.drive, cfg.dissipation, pure_to_density(psi0),
                                            cfg.time_grid(), cfg.space)
        else:
            spec = diagonalize(bare_hamiltonian(cfg.params, cfg.space))
            dt = cfg.dt or effective_dt(cfg.rotating_cutoff)
            stride = cfg.stride or max(1, int(round((cfg.sample_dt or dt) / dt)))
            grid = TimeGrid(t1=cfg.t1, dt=dt, stride=stride)
            b0 = EffectiveState.from_state(spec, cfg.drive, psi0)
            results[mode] = evolve_effective(spec, cfg.drive, b0, grid, cfg.rotating_cutoff)
    return results


def write_evolution(cfg: RunConfig, results, out: Path):
    written = []
    for mode, ts in results.items():
        path = out / f"{cfg.prefix}_{mode}_timeseries.csv"
        rows = zip(ts.t, ts.n_ph, (None if math.isnan(q) else q for q in ts.mandel_q),
                   ts.p0, ts.p1, ts.p2, ts.norm_or_trace)
        write_table(path, ("t", "n_ph", "Q", "p0", "p1", "p2", "norm_or_trace"),
                    [tuple(float(v) if v is not None else None for v in r) for r in rows], cfg)
        written.append(path)
        for snap in cfg.snapshots:
            i = int(np.argmax(ts.n_ph)) if snap == "peak" else ts.sample_index(float(snap))
            path = out / f"{cfg.prefix}_{mode}_pn_t{ts.t[i]:.6e}.csv"
            pn = ts.photon_dist[i]
            write_table(path, ("n", "P(n)"), [(str(n), float(p)) for n, p in enumerate(pn)], cfg)
            written.append(path)
    return written


def _load(args) -> RunConfig:
    if args.preset and args.config:
        raise ValidationError("use either --preset or --config, not both")
    if args.preset:
        raw = preset(args.preset)
    elif args.config:
        raw = load_json(args.config)
    else:
        raise ValidationError("a --config file or a --preset is required")
    return RunConfig.from_dict(raw, {"eta": args.eta, "n_max": args.nmax, "t1": args.tmax})


def _out_dir(args):
    if args.out is None:
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_spectrum(args):
    cfg = _load(args)
    cols, rows = spectrum_table(cfg)
    print_table(cols, rows)
    out = _out_dir(args)
    if out:
        write_table(out / f"{cfg.prefix}_spectrum.csv", cols, rows, cfg)


def cmd_rates(args):
    cfg = _load(args)
    J = args.J or cfg.J
    cols, rows = rates_table(cfg, J)
    print_table(cols, rows)
    out = _out_dir(args)
    if out:
        write_table(out / f"{cfg.prefix}_rates_J{J}.csv", cols, rows, cfg)


def cmd_evolve(args):
    cfg = _load(args)
    out = _out_dir(args) or Path(".")
    results = run_modes(cfg)
    for path in write_evolution(cfg, results, out):
        print(path)
    for mode, ts in results.items():
        i = int(np.argmax(ts.n_ph))
        print(f"{mode}: max n_ph = {ts.n_ph[i]:.6g} at t = {ts.t[i]:.6g}; "
              f"max(1 - P0) = {np.max(1 - ts.p0):.4g}; norm/trace drift = {ts.norm_drift:.3e}")
    config_path = out / f"{cfg.prefix}_config.json"
    config_path.write_text(cfg.to_json() + "\n", encoding="utf-8")


def cmd_scan(args):
    cfg = _load(args)
    J = args.J or cfg.J
    span = args.span if args.span is not None else cfg.scan["span"]
    points = args.points if args.points is not None else cfg.scan["points"]
    res = scan_eta(cfg.params, cfg.drive, J, span=span, points=points, horizon=cfg.scan["horizon"],
                   n_max=cfg.space.n_max, sample_dt=cfg.sample_dt, workers=cfg.scan["workers"])
    rows = [(float(e), None if math.isnan(m) else float(m)) for e, m in zip(res.eta_grid, res.merit)]
    print_table(("eta", "merit"), rows)
    print(f"# predicted_eta = {fmt(res.predicted_eta)}")
    print(f"# best_eta = {fmt(res.best_eta)}")
    print(f"# delta_nu = {fmt(res.delta_nu)}")
    for eta, msg in res.failures.items():
        print(f"# failed eta = {fmt(eta)}: {msg}")
    out = _out_dir(args)
    if out:
        write_table(out / f"{cfg.prefix}_scan_J{J}.csv", ("eta", "merit"), rows, cfg)


def build_parser():
    parser = argparse.ArgumentParser(prog="qutrit-dce", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--preset", choices=sorted(PRESETS), help="built-in figure configuration")
        p.add_argument("--out", help="output directory")
        p.add_argument("--eta", type=float, help="override the modulation frequency")
        p.add_argument("--nmax", type=int, help="override the Fock truncation")
        p.add_argument("--tmax", type=float, help="override the final time")
        return p

    common(sub.add_parser("spectrum", help="ground-branch energies")).set_defaults(func=cmd_spectrum)
    p = common(sub.add_parser("rates", help="J-photon transition rates"))
    p.add_argument("--J", type=int, choices=(1, 3))
    p.set_defaults(func=cmd_rates)
    common(sub.add_parser("evolve", help="time evolution")).set_defaults(func=cmd_evolve)
    p = common(sub.add_parser("scan", help="resonance scan"))
    p.add_argument("--J", type=int, choices=(1, 3))
    p.add_argument("--span", type=float)
    p.add_argument("--points", type=int)
    p.set_defaults(func=cmd_scan)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except ValidationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DCEError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
