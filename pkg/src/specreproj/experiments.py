"""Experiment harness: test signals, scenario runs, SNR/lambda sweeps and plot data.

Every scenario samples the truth analytically on the grid, synthesizes clean
coefficients on a refined mesh, adds seeded noise and runs the requested
methods.  The noise level for a target SNR is calibrated against the DFT of
the sampled truth on the N-point grid.
"""

import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import io
from .config import ScenarioConfig
from .errors import ConfigError
from .fourier import (
    NoiseModel,
    add_noise,
    dft_forward,
    fourier_partial_sum,
    inv_variance_for_snr,
    make_grid,
    snr_db,
    synthesize_clean_coeffs,
)
from .inference import (
    analytic_band,
    bsr_map,
    credible_band,
    fixed_posterior,
    gbsr_map,
    sample_posterior,
)
from .reprojection import build_operators, gegenbauer_reconstruct
from .specfun import GegParams

# below this, errors are floored for log-scale plot files only
LOG_FLOOR = 1e-16


def exp_sin(x):
    return np.exp(x) * np.sin(5 * x)


def cos_shift(x):
    return np.cos(1.4 * np.pi * (x + 1))


SIGNALS = {"exp_sin": exp_sin, "cos_shift": cos_shift}


def get_signal(name):
    """Look up a named test signal or build ``poly:a0,a1,...`` (ascending powers)."""
    if name in SIGNALS:
        return SIGNALS[name]
    if name.startswith("poly:"):
        coef = np.array([float(t) for t in name[5:].split(",")])
        return lambda x: np.polynomial.polynomial.polyval(x, coef)
    raise ConfigError(f"unknown signal {name!r}", "signal")


def derive_seed(*keys):
    """Deterministic 32-bit seed from a tuple of non-negative integers."""
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1)[0])


@dataclass
class MetricsRecord:
    method: str
    lam: float
    snr_db: float
    l2_full: float
    err_at_minus1: float
    err_at_minus08: float
    l2_interior: float
    runtime_ms: float = 0.0
    iterations: int = 0

    FIELDS = (
        "method",
        "lambda",
        "snr_db",
        "l2_full",
        "err_at_minus1",
        "err_at_minus08",
        "l2_interior",
        "iterations",
    )

    def row(self):
        return [
            self.method,
            self.lam,
            self.snr_db,
            self.l2_full,
            self.err_at_minus1,
            self.err_at_minus08,
            self.l2_interior,
            self.iterations,
        ]


@dataclass
class Curve:
    """One method's reconstruction on the grid, with an optional credible band."""

    method: str
    lam: float
    snr_db: float
    x: np.ndarray
    truth: np.ndarray
    estimate: np.ndarray
    lower: np.ndarray = None
    upper: np.ndarray = None
    hyper: object = None
    iterations: int = 0
    converged: bool = True


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    records: list
    curves: dict
    manifest: dict
    files: list = field(default_factory=list)


def error_metrics(grid, truth, estimate):
    """l2 errors over [-1,1) and [-0.5,0.5], pointwise errors at x=-1 and nearest to -0.8."""
    err = np.abs(np.asarray(estimate) - truth)
    x = grid.points
    interior = (x >= -0.5) & (x <= 0.5)
    return {
        "l2_full": float(np.linalg.norm(err)),
        "err_at_minus1": float(err[0]),
        "err_at_minus08": float(err[grid.nearest_index(-0.8)]),
        "l2_interior": float(np.linalg.norm(err[interior])),
    }


def _noise_level(cfg, grid, truth):
    """Noise variance for ``cfg`` and the SNR it realizes (inf when noiseless)."""
    reference = dft_forward(truth, grid)
    if cfg.snr_db is not None:
        return inv_variance_for_snr(reference, cfg.snr_db), float(cfg.snr_db)
    if cfg.inv_variance == 0:
        return 0.0, float("inf")
    return cfg.inv_variance, snr_db(reference, cfg.inv_variance)


def _run_method(method, data, grid, ops, cfg, seed, want_band):
    t0 = time.perf_counter()
    lower = upper = res = None
    if method == "fourier":
        est = fourier_partial_sum(data, grid)
    elif method == "gegenbauer":
        est = gegenbauer_reconstruct(ops, data)
    else:
        res = (bsr_map if method == "bsr" else gbsr_map)(data, ops, cfg.bcd)
        est = res.estimate
        if want_band:
            post = fixed_posterior(method, res.hyper, data, ops, adjoint=cfg.bcd.gbsr_adjoint)
            if cfg.band == "analytic":
                band = analytic_band(post, cfg.credible_level)
            else:
                band = credible_band(sample_posterior(post, cfg.samples, seed), cfg.credible_level)
            lower, upper = band.lower, band.upper
    runtime_ms = 1e3 * (time.perf_counter() - t0)
    return est, lower, upper, res, runtime_ms


def run_scenario(cfg, write=True, bands=True):
    """Run every requested method on one scenario and optionally write result files.

    With ``trials > 1`` the metrics are averaged over trials (trial ``t`` uses
    seed ``derive_seed(cfg.seed, t)``; trial 0 uses ``cfg.seed`` itself) and
    the curves come from trial 0.
    """
    cfg.validate()
    func = get_signal(cfg.signal)
    grid = make_grid(cfg.n)
    truth = func(grid.points) * np.ones(grid.n)
    ops = build_operators(grid, GegParams(cfg.lam, cfg.m))
    clean = synthesize_clean_coeffs(func, cfg.n, cfg.refine)
    variance, realized_snr = _noise_level(cfg, grid, truth)

    sums = {m: np.zeros(4) for m in cfg.methods}
    iters = {m: 0 for m in cfg.methods}
    runtimes = {m: 0.0 for m in cfg.methods}
    curves = {}
    hypers = {}
    for t in range(cfg.trials):
        seed = cfg.seed if t == 0 else derive_seed(cfg.seed, t)
        data = add_noise(clean, NoiseModel(variance, seed)) if variance > 0 else clean
        for method in cfg.methods:
            est, lo, up, res, rt = _run_method(method, data, grid, ops, cfg, seed, bands and t == 0)
            it = res.iterations if res is not None else 0
            m = error_metrics(grid, truth, est)
            sums[method] += [m["l2_full"], m["err_at_minus1"], m["err_at_minus08"], m["l2_interior"]]
            iters[method] += it
            runtimes[method] += rt
            if t == 0:
                hyper = res.hyper if res is not None else None
                conv = res.converged if res is not None else True
                curves[method] = Curve(method, cfg.lam, realized_snr, grid.points, truth, est, lo, up, hyper, it, conv)
                if res is not None:
                    hypers[method] = {
                        "likelihood_precision": hyper.likelihood_precision,
                        "prior_precision": hyper.prior_precision,
                        "iterations": it,
                        "converged": conv,
                        "objective_trace": list(res.objective_trace),
                    }

    records = []
    for method in cfg.methods:
        avg = sums[method] / cfg.trials
        records.append(
            MetricsRecord(
                method,
                cfg.lam,
                realized_snr,
                *avg.tolist(),
                runtime_ms=runtimes[method] / cfg.trials,
                iterations=int(round(iters[method] / cfg.trials)),
            )
        )

    manifest = {
        "config": cfg.echo(),
        "noise_inv_variance": variance,
        "realized_snr_db": realized_snr,
        "grid_point_minus08": float(grid.points[grid.nearest_index(-0.8)]),
        "grid_point_minus1": float(grid.points[0]),
        "kappa": ops.kappa,
        "map": hypers,
    }
    result = ScenarioResult(cfg, records, curves, manifest)
    if write and cfg.output_dir:
        result.files = write_scenario(result, cfg.output_dir)
    return result


def write_scenario(result, out_dir):
    """Per-method curve CSVs, ``metrics.csv`` and ``manifest.json``."""
    out = Path(out_dir)
    files = []
    for method, c in result.curves.items():
        files.append(io.write_curve(out / f"{method}.csv", c.x, c.truth, c.estimate, c.lower, c.upper))
    files.append(io.write_table(out / "metrics.csv", MetricsRecord.FIELDS, [r.row() for r in result.records]))
    timing = {r.method: r.runtime_ms for r in result.records}
    files.append(io.write_manifest(out / "manifest.json", {**result.manifest, "runtime_ms": timing}))
    return files


def sweep_snr(cfg, snr_list, write=True, bands=False):
    """One metrics row per (method, SNR); the seed for entry i is derive_seed(seed, i).

    A single-entry list reproduces :func:`run_scenario` with that SNR.
    """
    if len(snr_list) == 0:
        raise ConfigError("SNR list must not be empty", "snr_list")
    records, curves = [], []
    single = len(snr_list) == 1
    for i, snr in enumerate(snr_list):
        seed = cfg.seed if single else derive_seed(cfg.seed, i)
        sub = replace(cfg, snr_db=float(snr), inv_variance=None, seed=seed, output_dir=None)
        res = run_scenario(sub, write=False, bands=bands)
        records += res.records
        curves += list(res.curves.values())
    records.sort(key=lambda r: (r.method, r.snr_db))
    if write and cfg.output_dir:
        io.write_table(Path(cfg.output_dir) / "sweep_snr.csv", MetricsRecord.FIELDS, [r.row() for r in records])
    return records, curves


def sweep_lambda(cfg, lambda_list, write=True, bands=False):
    """One metrics row per (method, lambda); operators are rebuilt per lambda.

    The noise realizations do not depend on lambda, so every lambda sees the
    same data.
    """
    if len(lambda_list) == 0:
        raise ConfigError("lambda list must not be empty", "lambda_list")
    records, curves = [], []
    for lam in lambda_list:
        sub = replace(cfg, lam=float(lam), output_dir=None)
        res = run_scenario(sub, write=False, bands=bands)
        records += res.records
        curves += list(res.curves.values())
    records.sort(key=lambda r: (r.method, r.lam))
    if write and cfg.output_dir:
        io.write_table(Path(cfg.output_dir) / "sweep_lambda.csv", MetricsRecord.FIELDS, [r.row() for r in records])
    return records, curves


# --------------------------------------------------------------------------
# plot data
# --------------------------------------------------------------------------

_FIG3_PANELS = ("l2_full", "err_at_minus1", "err_at_minus08", "l2_interior")
LAYOUTS = ("fig3", "fig4", "fig5")


def _log10(v):
    return float(np.log10(max(v, LOG_FLOOR)))


def _gnuplot(path, csv_name, xcol, xlabel, ylabel, methods, logx=False):
    plots = ", ".join(
        f"'{csv_name}' using {xcol}:(strcol(2) eq '{m}' ? $4 : 1/0) with linespoints title '{m}'"
        for m in methods
    )
    text = (
        "set datafile separator ','\n"
        "set key autotitle columnhead\n"
        f"set xlabel '{xlabel}'\nset ylabel '{ylabel}'\n"
        + ("set logscale x\n" if logx else "")
        + f"plot {plots}\n"
    )
    Path(path).write_text(text)
    return Path(path)


def emit_plotdata(records, layout, out_dir, gnuplot=True):
    """Write tidy CSV files (plus optional gnuplot scripts) for one figure layout.

    ``fig3`` and ``fig4`` take :class:`MetricsRecord` lists (from the SNR and
    lambda sweeps); ``fig5`` takes :class:`Curve` objects carrying bands.
    """
    records = list(records)
    if not records:
        raise ValueError("no records to emit")
    if layout not in LAYOUTS:
        raise ValueError(f"unknown layout {layout!r}; choose from {LAYOUTS}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    if layout == "fig3":
        methods = sorted({r.method for r in records})
        for panel in _FIG3_PANELS:
            rows = [
                [r.snr_db, r.method, getattr(r, panel), _log10(getattr(r, panel))]
                for r in sorted(records, key=lambda r: (r.method, r.snr_db))
            ]
            name = f"fig3_{panel}.csv"
            files.append(io.write_table(out / name, ["snr_db", "method", "value", "log10_value"], rows))
            if gnuplot:
                files.append(_gnuplot(out / f"fig3_{panel}.gp", name, 1, "SNR (dB)", f"log10 {panel}", methods))
    elif layout == "fig4":
        methods = sorted({r.method for r in records})
        for snr in sorted({r.snr_db for r in records}):
            rows = [
                [r.lam, r.method, r.l2_full, _log10(r.l2_full)]
                for r in sorted(records, key=lambda r: (r.method, r.lam))
                if r.snr_db == snr
            ]
            name = f"fig4_snr{snr:g}.csv"
            files.append(io.write_table(out / name, ["lambda", "method", "value", "log10_value"], rows))
            if gnuplot:
                files.append(_gnuplot(out / f"fig4_snr{snr:g}.gp", name, 1, "lambda", "log10 l2 error", methods))
    else:
        for c in records:
            if c.lower is None:
                raise ValueError(f"curve for {c.method} (lambda={c.lam:g}, snr={c.snr_db:g}) has no band")
            name = f"fig5_{c.method}_lambda{c.lam:g}_snr{c.snr_db:g}.csv"
            files.append(io.write_band(out / name, c.x, c.estimate, c.lower, c.upper))
    return files
