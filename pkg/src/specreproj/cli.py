"""Command-line entry point ``specreproj``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io
from .config import ScenarioConfig, config_from_mapping, dump_config, load_config
from .errors import ConfigError, NumericalError
from .experiments import (
    MetricsRecord,
    emit_plotdata,
    get_signal,
    run_scenario,
    sweep_lambda,
    sweep_snr,
    _noise_level,
)
from .fourier import NoiseModel, add_noise, make_grid, synthesize_clean_coeffs
from .inference import bsr_map, fixed_posterior, gbsr_map, credible_band, sample_posterior
from .reprojection import build_operators
from .specfun import GegParams

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


def _floats(text):
    return [float(t) for t in text.split(",") if t.strip()]


def _add_scenario_flags(p):
    p.add_argument("--config", help="key = value scenario file")
    p.add_argument("--signal", help="exp_sin, cos_shift or poly:a0,a1,...")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--lambda", dest="lam", type=float)
    noise = p.add_mutually_exclusive_group()
    noise.add_argument("--snr-db", type=float)
    noise.add_argument("--inv-variance", type=float, help="noise variance alpha^-1 (0 = noiseless)")
    p.add_argument("--seed", type=int)
    p.add_argument("--refine", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--credible-level", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--band", choices=("empirical", "analytic"))
    p.add_argument("--rel-tol", type=float)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--gbsr-adjoint", choices=("normalized", "unnormalized"))
    p.add_argument("--out", dest="output_dir", help="output directory")


_SCENARIO_KEYS = (
    "signal", "n", "m", "lam", "snr_db", "inv_variance", "seed", "refine", "trials",
    "credible_level", "samples", "band", "rel_tol", "max_iter", "gbsr_adjoint", "output_dir",
)


def _scenario(args, **extra):
    overrides = {k: getattr(args, k, None) for k in _SCENARIO_KEYS}
    for k, v in extra.items():
        if v is not None and overrides.get("inv_variance") is None and overrides.get("snr_db") is None:
            overrides[k] = v
    if getattr(args, "method", None):
        overrides["methods"] = tuple(args.method)
    if args.config:
        return load_config(args.config, overrides)
    base = ScenarioConfig(snr_db=None, inv_variance=None)
    return config_from_mapping(overrides, base).validate()


def _require_out(cfg):
    if not cfg.output_dir:
        raise ConfigError("an output directory is required (--out or output_dir)", "output_dir")
    return Path(cfg.output_dir)


def cmd_validate_config(args):
    cfg = _scenario(args)
    sys.stdout.write(dump_config(cfg))
    return EXIT_OK


def cmd_synthesize(args):
    cfg = _scenario(args)
    out = _require_out(cfg)
    func = get_signal(cfg.signal)
    grid = make_grid(cfg.n)
    truth = func(grid.points) * np.ones(grid.n)
    clean = synthesize_clean_coeffs(func, cfg.n, cfg.refine)
    variance, snr = _noise_level(cfg, grid, truth)
    noisy = add_noise(clean, NoiseModel(variance, cfg.seed))
    io.write_spectral(out / "clean.csv", clean)
    io.write_spectral(out / "noisy.csv", noisy)
    io.write_signal(out / "truth.csv", grid.points, truth)
    io.write_manifest(out / "manifest.json", {"config": cfg.echo(), "noise_inv_variance": variance, "realized_snr_db": snr})
    print(f"wrote {out}/clean.csv, noisy.csv, truth.csv (alpha^-1 = {variance:.6g}, SNR = {snr:.4f} dB)")
    return EXIT_OK


def cmd_reconstruct(args):
    cfg = _scenario(args)
    _require_out(cfg)
    res = run_scenario(cfg)
    for r in res.records:
        print(f"{r.method:>10s}  l2={r.l2_full:.4e}  err(-1)={r.err_at_minus1:.4e}  l2[-.5,.5]={r.l2_interior:.4e}")
    return EXIT_OK


def cmd_sweep_snr(args):
    snrs = _floats(args.snr_list)
    cfg = _scenario(args, snr_db=snrs[0] if snrs else None)
    out = _require_out(cfg)
    records, _ = sweep_snr(cfg, snrs)
    if args.plotdata:
        emit_plotdata(records, "fig3", out)
    print(f"wrote {len(records)} rows to {out / 'sweep_snr.csv'}")
    return EXIT_OK


def cmd_sweep_lambda(args):
    snrs = _floats(args.snr_list) if args.snr_list else [None]
    cfg = _scenario(args, snr_db=snrs[0])
    out = _require_out(cfg)
    records, curves = [], []
    for snr in snrs:
        sub = cfg if snr is None else replace(cfg, snr_db=snr, inv_variance=None)
        r, c = sweep_lambda(replace(sub, output_dir=None), _floats(args.lambda_list), write=False, bands=args.bands)
        records += r
        curves += c
    io.write_table(out / "sweep_lambda.csv", MetricsRecord.FIELDS, [r.row() for r in records])
    if args.plotdata:
        emit_plotdata(records, "fig4", out)
        if args.bands:
            emit_plotdata([c for c in curves if c.lower is not None], "fig5", out)
    print(f"wrote {len(records)} rows to {out / 'sweep_lambda.csv'}")
    return EXIT_OK


def cmd_sample_posterior(args):
    cfg = _scenario(args)
    out = _require_out(cfg)
    if args.data:
        data = io.read_spectral(args.data)
        if data.n != cfg.n:
            raise ConfigError(f"data file has {data.n} coefficients, n = {cfg.n}", "n")
    else:
        func = get_signal(cfg.signal)
        grid = make_grid(cfg.n)
        variance, _ = _noise_level(cfg, grid, func(grid.points) * np.ones(grid.n))
        data = add_noise(synthesize_clean_coeffs(func, cfg.n, cfg.refine), NoiseModel(variance, cfg.seed))
    ops = build_operators(make_grid(cfg.n), GegParams(cfg.lam, cfg.m))
    res = (bsr_map if args.method_name == "bsr" else gbsr_map)(data, ops, cfg.bcd)
    post = fixed_posterior(args.method_name, res.hyper, data, ops, adjoint=cfg.bcd.gbsr_adjoint)
    samples = sample_posterior(post, cfg.samples, cfg.seed)
    band = credible_band(samples, cfg.credible_level)
    io.write_band(out / f"{args.method_name}_band.csv", ops.grid.points, res.estimate, band.lower, band.upper)
    io.write_manifest(
        out / f"{args.method_name}_manifest.json",
        {
            "config": cfg.echo(),
            "method": args.method_name,
            "likelihood_precision": res.hyper.likelihood_precision,
            "prior_precision": res.hyper.prior_precision,
            "iterations": res.iterations,
            "converged": res.converged,
            "objective_trace": res.objective_trace,
        },
    )
    if args.save_samples:
        np.savetxt(out / f"{args.method_name}_samples.csv", samples, delimiter=",", fmt=io.FLOAT_FMT)
    print(f"wrote {out / (args.method_name + '_band.csv')}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="specreproj", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate-config", help="check a scenario and echo it in canonical form")
    _add_scenario_flags(p)
    p.set_defaults(func=cmd_validate_config)

    p = sub.add_parser("synthesize", help="write clean and noisy Fourier coefficients")
    _add_scenario_flags(p)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("reconstruct", help="run one scenario")
    _add_scenario_flags(p)
    p.add_argument("--method", action="append", choices=("fourier", "gegenbauer", "bsr", "gbsr"))
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("sweep-snr", help="metrics over a list of SNR values")
    _add_scenario_flags(p)
    p.add_argument("--method", action="append", choices=("fourier", "gegenbauer", "bsr", "gbsr"))
    p.add_argument("--snr-list", required=True, help="comma-separated SNR values in dB")
    p.add_argument("--plotdata", action="store_true", help="also write fig3 panel files")
    p.set_defaults(func=cmd_sweep_snr)

    p = sub.add_parser("sweep-lambda", help="metrics over a list of lambda values")
    _add_scenario_flags(p)
    p.add_argument("--method", action="append", choices=("fourier", "gegenbauer", "bsr", "gbsr"))
    p.add_argument("--lambda-list", required=True, help="comma-separated lambda values")
    p.add_argument("--snr-list", help="repeat the sweep for each SNR value")
    p.add_argument("--bands", action="store_true", help="compute credible bands for bsr/gbsr")
    p.add_argument("--plotdata", action="store_true", help="also write fig4 (and fig5 with --bands) files")
    p.set_defaults(func=cmd_sweep_lambda)

    p = sub.add_parser("sample-posterior", help="MAP estimate plus credible band")
    _add_scenario_flags(p)
    p.add_argument("--method", dest="method_name", choices=("bsr", "gbsr"), default="gbsr")
    p.add_argument("--data", help="noisy coefficients file (k, re, im); synthesized if omitted")
    p.add_argument("--save-samples", action="store_true")
    p.set_defaults(func=cmd_sample_posterior)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
