"""Command-line front end: scenario files in, deterministic CSV/JSON out.

Exit status: 0 on success, 2 for configuration problems, 3 for numerical
failures inside the engine. Floats are emitted with 17 significant digits
and JSON keys are sorted, so identical configs (and seeds) reproduce
byte-identical outputs. NMQFI_THREADS caps sweep concurrency.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import IO, Iterable

import numpy as np

from . import correlation as corr_mod
from . import metrology, sequential
from .bath import moments
from .config import ScenarioConfig, load_config
from .errors import ConfigError, NmqfiError
from .metrology import energy_for_script_e, script_e
from .probe import (DisplacementCoefficient, covariance_snapshot, displacement,
                    quadrature_mean)
from .response import markov_closed_form, markov_decay_rate, solve_response


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _write_csv(out: IO[str], header: Iterable[str], rows: Iterable[Iterable[float]]):
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(out: IO[str], payload: dict):
    out.write(json.dumps(payload, sort_keys=True, indent=2,
                         default=lambda v: float(v)) + "\n")


def _report_times(cfg: ScenarioConfig, t0: float, t1: float) -> np.ndarray:
    n = int(cfg.options.get("report_points", 33))
    return np.linspace(t0, t1, n)


def _gamma_for(cfg: ScenarioConfig) -> float | None:
    if "gamma" in cfg.options:
        return float(cfg.options["gamma"])
    spectrum = cfg.spectrum()
    if spectrum is not None:
        return markov_decay_rate(spectrum, cfg.omega0)
    return None


def run_response(cfg: ScenarioConfig, out: IO[str], fmt: str):
    bath = cfg.bath()
    resp = solve_response(bath, cfg.grid(bath))
    taus = resp.grid.times()
    rows = zip(taus, resp.g_samples.real, resp.g_samples.imag,
               np.abs(resp.g_samples), resp.g_dot_samples.real,
               resp.g_dot_samples.imag)
    _write_csv(out, ["tau", "re_g", "im_g", "abs_g", "re_gdot", "im_gdot"], rows)


def run_moments(cfg: ScenarioConfig, out: IO[str], fmt: str):
    bath = cfg.bath()
    resp = solve_response(bath, cfg.grid(bath))
    init = cfg.init_state()
    t0, t1 = cfg.window()
    theta = float(cfg.options.get("theta", 0.0))
    amp = float(cfg.options.get("force_amplitude", 0.0))
    force = cfg.force() if "force" in cfg.raw else None
    rows = []
    for t in _report_times(cfg, t0, t1):
        win = (t0, float(t))
        if force is not None:
            disp = displacement(resp, force, cfg.omega0, win)
        else:
            disp = DisplacementCoefficient(0.0 + 0.0j, win)
        mean = quadrature_mean(init, resp, disp, theta, amp, cfg.omega0, win)
        snap = covariance_snapshot(init, resp, bath, theta, cfg.omega0, win)
        rows.append((t, theta, mean, snap.var_x_theta, snap.var_p_theta,
                     snap.det_sigma, snap.noise_term))
    _write_csv(out, ["t", "theta", "mean", "var_x", "var_p", "det_sigma", "n_b"],
               rows)


def run_qfi(cfg: ScenarioConfig, out: IO[str], fmt: str):
    bath = cfg.bath()
    resp = solve_response(bath, cfg.grid(bath))
    force = cfg.force()
    window = cfg.window()
    energy = cfg.energy()
    if energy is not None:
        result = metrology.qfi_best_state(energy, bath, resp, force,
                                          cfg.omega0, window)
        se = script_e(energy)
        init = metrology.best_state(
            energy, displacement(resp, force, cfg.omega0, window),
            resp, window).to_init()
    else:
        init = cfg.init_state()
        se = None
        try:
            result = metrology.qfi_aligned(init, bath, resp, force,
                                           cfg.omega0, window)
        except NmqfiError:
            result = metrology.qfi_general(init, bath, resp, force,
                                           cfg.omega0, window)
    snap = covariance_snapshot(init, resp, bath, 0.0, cfg.omega0, window)
    m = moments(bath)
    payload = {
        "form": result.form,
        "value": result.value,
        "abs_d": float(np.sqrt(result.numerator_abs_d_sq)),
        "variance": result.denominator_variance_or_det,
        "det_sigma": snap.det_sigma,
        "window": list(window),
        "bath_moments": {
            "k_squared": m.k_squared,
            "script_n": m.script_n,
            "omega_p": list(m.omega_p),
            "chi_q": list(m.chi_q),
        },
    }
    if se is not None:
        payload["script_e"] = se
    _write_json(out, payload)


def run_estimate(cfg: ScenarioConfig, out: IO[str], fmt: str, seed_override):
    bath = cfg.bath()
    resp = solve_response(bath, cfg.grid(bath))
    force = cfg.force()
    window = cfg.window()
    energy = cfg.energy()
    if energy is not None:
        init = metrology.best_state(
            energy, displacement(resp, force, cfg.omega0, window),
            resp, window).to_init()
    else:
        init = cfg.init_state()
    seed = int(seed_override if seed_override is not None
               else cfg.options.get("seed", 0))
    result = metrology.simulate_estimation(
        init, bath, resp, force, cfg.omega0, window,
        f_true=float(cfg.options.get("force_amplitude", 0.0)),
        nu=int(cfg.options.get("nu", 100)), seed=seed,
        replications=int(cfg.options.get("replications", 2000)))
    _write_json(out, {
        "estimate": result.estimate,
        "empirical_mse": result.empirical_mse,
        "crb": result.crb,
        "ratio_to_crb": result.ratio_to_crb,
        "nu": result.nu,
        "replications": result.replications,
        "seed": seed,
    })


def _sequential_point(cfg: ScenarioConfig, bath, resp, force, energy: float):
    block = cfg.raw["sequential"]
    total = float(block["total_window"])
    m = moments(bath)
    prefactor = bool(cfg.options.get("omega0_prefactor", True))
    if block.get("optimize", "tau" not in block):
        if "tau_bounds" in block:
            bounds = tuple(float(v) for v in block["tau_bounds"])
        else:
            bounds = sequential.default_tau_bounds(resp, total, m)
        opt = sequential.optimize_tau(total, energy, bath, resp, force,
                                      cfg.omega0, bounds)
        tau_numeric, seq, hit = opt.tau_opt, opt.seq, opt.hit_bound
    else:
        tau_numeric = float(block["tau"])
        seq = sequential.seq_qfi(sequential.SequentialScheme(total, tau_numeric),
                                 energy, bath, resp, force, cfg.omega0)
        hit = False
    ints = sequential.xi_and_c(force, cfg.omega0, total)
    tau_asym = (sequential.tau_opt_asymptotic(energy, m, ints.xi, ints.c_coeff)
                if m.script_n > 0 else None)
    fasym = (sequential.seq_qfi_asymptotic(energy, m, ints.xi, ints.c_coeff,
                                           cfg.omega0, prefactor)
             if m.script_n > 0 else None)
    gamma = _gamma_for(cfg)
    markov = None
    if gamma is not None and gamma > 0:
        markov = sequential.markov_seq(
            total, energy, gamma, float(cfg.options.get("n_thermal", 0.0)),
            ints.xi, cfg.omega0, prefactor)
    fastest = max(m.fastest_rate, cfg.omega0)
    return {
        "tau_opt_numeric": tau_numeric,
        "tau_opt_asymptotic": tau_asym,
        "total_qfi": seq.total_qfi,
        "total_qfi_asymptotic": fasym,
        "markov_bound": None if markov is None else markov.total_qfi_bound,
        "xi": seq.xi,
        "c_coeff": seq.c_coeff,
        "regime_flags": {
            "hit_bound": hit,
            "short_time_valid": bool(tau_numeric * fastest <= 0.1),
        },
    }


def run_sequential(cfg: ScenarioConfig, out: IO[str], fmt: str):
    bath = cfg.bath()
    resp = solve_response(bath, cfg.grid(bath))
    force = cfg.force()
    energy = cfg.energy()
    if energy is None:
        raise ConfigError("sequential subcommand needs probe.energy")
    if fmt == "csv":
        block = cfg.raw["sequential"]
        total = float(block["total_window"])
        m = moments(bath)
        if "tau_bounds" in block:
            lo, hi = (float(v) for v in block["tau_bounds"])
        else:
            lo, hi = sequential.default_tau_bounds(resp, total, m)
        rows = []
        for tau in np.geomspace(lo, hi, int(cfg.options.get("report_points", 33))):
            seq = sequential.seq_qfi(sequential.SequentialScheme(total, float(tau)),
                                     energy, bath, resp, force, cfg.omega0)
            rows.append((tau, seq.total_qfi))
        _write_csv(out, ["tau", "total_qfi"], rows)
        return
    payload = _sequential_point(cfg, bath, resp, force, energy)
    _write_json(out, payload)


def run_sweep(cfg: ScenarioConfig, out: IO[str], fmt: str):
    bath = cfg.bath()
    resp = solve_response(bath, cfg.grid(bath))
    force = cfg.force()
    sweep = cfg.options.get("energy_sweep")
    if not sweep:
        raise ConfigError("sweep subcommand needs options.energy_sweep "
                          "(list of script-E values)")
    threads = max(1, int(os.environ.get("NMQFI_THREADS", "1")))

    def point(se: float):
        row = _sequential_point(cfg, bath, resp, force, energy_for_script_e(se))
        return (se, row["tau_opt_numeric"], row["total_qfi"],
                row["tau_opt_asymptotic"] or float("nan"),
                row["total_qfi_asymptotic"] or float("nan"),
                row["markov_bound"] if row["markov_bound"] is not None
                else float("nan"))

    values = [float(v) for v in sweep]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(point, values))
    else:
        rows = [point(v) for v in values]
    _write_csv(out, ["script_e", "tau_opt", "total_qfi", "tau_opt_asymptotic",
                     "total_qfi_asymptotic", "markov_bound"], rows)


def run_correlation(cfg: ScenarioConfig, out: IO[str], fmt: str):
    bath = cfg.bath()
    resp = solve_response(bath, cfg.grid(bath))
    init = cfg.init_state()
    fluct = 0.5 * init.trace
    t_prime = float(cfg.options.get("t_prime", 0.0))
    rows = []
    for t in _report_times(cfg, t_prime, resp.t_end):
        r = corr_mod.bath_correlation(bath, resp, fluct, float(t), t_prime,
                                      cfg.omega0)
        rows.append((t - t_prime, r.total.real, r.total.imag,
                     r.born.real, r.born.imag, abs(r.interaction)))
    _write_csv(out, ["t_minus_tprime", "re_total", "im_total", "re_born",
                     "im_born", "abs_interaction"], rows)


def run_limits(cfg: ScenarioConfig, out: IO[str], fmt: str):
    bath = cfg.bath()
    resp = solve_response(bath, cfg.grid(bath))
    gamma = _gamma_for(cfg)
    if gamma is None:
        raise ConfigError("limits subcommand needs options.gamma or a "
                          "continuum bath block")
    omega2 = moments(bath, 2).omega(2)
    taus = resp.grid.times()
    rows = zip(taus, resp.g_samples.real, resp.g_samples.imag,
               np.abs(resp.g_samples), np.cos(omega2 * taus),
               markov_closed_form(gamma, taus))
    _write_csv(out, ["tau", "re_exact", "im_exact", "abs_exact",
                     "narrowband", "markov"], rows)


_RUNNERS = {
    "response": run_response,
    "moments": run_moments,
    "qfi": run_qfi,
    "sequential": run_sequential,
    "sweep": run_sweep,
    "correlation": run_correlation,
    "limits": run_limits,
}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nmqfi",
        description="Force-estimation engine for an oscillator probe in a "
                    "Gaussian bath")
    parser.add_argument("subcommand",
                        choices=sorted(list(_RUNNERS) + ["estimate"]))
    parser.add_argument("--config", required=True, help="scenario JSON file")
    parser.add_argument("--out", default=None,
                        help="output path (default: stdout)")
    parser.add_argument("--format", choices=["csv", "json"], default=None)
    parser.add_argument("--seed", type=int, default=None,
                        help="override options.seed")
    return parser


_FORMATS = {
    "response": ("csv",),
    "moments": ("csv",),
    "correlation": ("csv",),
    "limits": ("csv",),
    "sweep": ("csv",),
    "qfi": ("json",),
    "estimate": ("json",),
    "sequential": ("json", "csv"),
}


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        fmt = args.format or _FORMATS[args.subcommand][0]
        if fmt not in _FORMATS[args.subcommand]:
            raise ConfigError(f"subcommand {args.subcommand} emits "
                              f"{'/'.join(_FORMATS[args.subcommand])} only")
        if args.out:
            handle = open(args.out, "w", encoding="utf-8", newline="\n")
        else:
            handle = sys.stdout
        try:
            if args.subcommand == "estimate":
                run_estimate(cfg, handle, fmt, args.seed)
            else:
                _RUNNERS[args.subcommand](cfg, handle, fmt)
        finally:
            if args.out:
                handle.close()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NmqfiError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
