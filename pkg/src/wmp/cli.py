"""Command-line front end: ``wmp {denoise,evaluate,synth,theory,bench}``."""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys

import numpy as np

from . import __version__
from .bench import bench_csv, fit_envelope, run_benchmark
from .denoise import DenoiseParams, denoise
from .io import read_points, write_points, write_text
from .metrics import evaluate, reports_to_csv
from .synth import NoiseSpec, ShapeSpec, add_gaussian_noise, derive_seed, sample_shape
from .theory2d import error_grid

THEORY_COLUMNS = ("L", "kappa", "e_one_closed", "e_multi_closed", "e_one_sim", "e_multi_sim")


def _number(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    return value


def _axis(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"axis must be min:max:steps, got {text!r}")
    try:
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"axis must be min:max:steps, got {text!r}") from None
    if steps < 1:
        raise argparse.ArgumentTypeError(f"steps must be positive in {text!r}")
    return np.linspace(lo, hi, steps)


def _grid(text: str) -> tuple[np.ndarray, np.ndarray]:
    halves = text.split(",")
    if len(halves) != 2:
        raise argparse.ArgumentTypeError(f"grid must be Lmin:Lmax:steps,kmin:kmax:steps, got {text!r}")
    return _axis(halves[0]), _axis(halves[1])


def _sizes(text: str) -> list[int]:
    try:
        sizes = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"sizes must be comma-separated integers, got {text!r}") from None
    if not sizes or min(sizes) < 1:
        raise argparse.ArgumentTypeError(f"sizes must be positive, got {text!r}")
    return sizes


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wmp", description="Point cloud denoising by weighted multi-projection.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more log output on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("denoise", help="denoise an XYZ or PLY cloud")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--epsilon", required=True, type=_number, help="neighborhood radius")
    p.add_argument("--sigma", type=_number, help="Gaussian kernel width (default epsilon/2)")
    p.add_argument("--strategy", choices=("one", "one-time", "multi"), default="multi")
    p.add_argument("--iterations", type=int, default=1)

    p = sub.add_parser("evaluate", help="SNR, MSE and Chamfer distance against a reference")
    p.add_argument("--denoised", required=True)
    p.add_argument("--reference", required=True)
    p.add_argument("--noisy", help="also report the noisy input against the reference")
    p.add_argument("--output", default="-", help="CSV path (default stdout)")
    p.add_argument("--figure", help="write a PNG bar chart of the metrics here")

    p = sub.add_parser("synth", help="sample a synthetic shape, optionally with noise")
    p.add_argument("--shape", required=True, choices=("plane", "sphere", "torus", "semicircle-strip"))
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--output", required=True, help="noisy (or clean, without noise) cloud")
    p.add_argument("--clean-output", help="also write the noiseless cloud here")
    p.add_argument("--radius", type=float)
    p.add_argument("--major-radius", type=float)
    p.add_argument("--minor-radius", type=float)
    p.add_argument("--extent", type=float)
    p.add_argument("--half-angle", type=float)
    p.add_argument("--width", type=float)

    p = sub.add_parser("theory", help="closed-form and simulated one-time vs multi-projection errors")
    p.add_argument("--grid", required=True, type=_grid, help="Lmin:Lmax:steps,kmin:kmax:steps")
    p.add_argument("--simulate", action="store_true", help="also run the arc simulation per cell")
    p.add_argument("--r", type=_number, help="use the single curvature 1/r instead of the kappa axis")
    p.add_argument("--eps-arc", type=_number, default=1e-3, help="arc spacing for --simulate")
    p.add_argument("--output", default="-")
    p.add_argument("--figure", help="write a PNG of the error curves here")

    p = sub.add_parser("bench", help="wall-time scaling at fixed density")
    p.add_argument("--sizes", required=True, type=_sizes)
    p.add_argument("--epsilon", type=_number, default=0.05)
    p.add_argument("--density", type=_number, default=4000.0, help="points per unit area")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", default="-")
    p.add_argument("--figure", help="write a PNG of time against size here")
    return parser


def _cmd_denoise(args) -> None:
    params = DenoiseParams(epsilon=args.epsilon, sigma=args.sigma, strategy=args.strategy,
                           iterations=args.iterations)
    write_points(denoise(read_points(args.input), params), args.output)


def _cmd_evaluate(args) -> None:
    reference = read_points(args.reference)
    reports = [evaluate(read_points(args.denoised), reference, name="denoised")]
    if args.noisy:
        reports.append(evaluate(read_points(args.noisy), reference, name="noisy"))
    write_text(reports_to_csv(reports), args.output)
    if args.figure:
        from .plotting import plot_metrics
        plot_metrics(reports, args.figure)


_SHAPE_FLAGS = ("radius", "major_radius", "minor_radius", "extent", "half_angle", "width")


def _cmd_synth(args) -> None:
    params = {k: getattr(args, k) for k in _SHAPE_FLAGS if getattr(args, k) is not None}
    spec = ShapeSpec(kind=args.shape, n=args.n, seed=derive_seed(args.seed, "shape"), params=params)
    clean = sample_shape(spec)
    noisy = add_gaussian_noise(clean, NoiseSpec(args.noise_sigma, derive_seed(args.seed, "noise")))
    if args.clean_output:
        write_points(clean, args.clean_output)
    write_points(noisy, args.output)


def _theory_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(THEORY_COLUMNS)
    for row in rows:
        writer.writerow(["" if row[c] is None else repr(float(row[c])) for c in THEORY_COLUMNS])
    return buf.getvalue()


def _cmd_theory(args) -> None:
    Ls, kappas = args.grid
    if args.r is not None:
        if not args.r > 0:
            raise ValueError(f"--r must be positive, got {args.r}")
        kappas = np.array([1.0 / args.r])
    rows = error_grid(Ls, kappas, simulate=args.simulate, eps_arc=args.eps_arc)
    if not rows:
        raise ValueError("no grid cell satisfies L > 0, kappa > 0 and L*kappa < pi/2")
    write_text(_theory_csv(rows), args.output)
    if args.figure:
        from .plotting import plot_error_curves
        plot_error_curves(rows, args.figure)


def _cmd_bench(args) -> None:
    rows = run_benchmark(args.sizes, epsilon=args.epsilon, density=args.density,
                         repeats=args.repeats, seed=args.seed)
    write_text(bench_csv(rows), args.output)
    if args.figure:
        from .plotting import plot_bench
        plot_bench(rows, fit_envelope(rows)[0], args.figure)


COMMANDS = {"denoise": _cmd_denoise, "evaluate": _cmd_evaluate, "synth": _cmd_synth,
            "theory": _cmd_theory, "bench": _cmd_bench}


def run(args: argparse.Namespace) -> int:
    try:
        COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        message = " ".join(str(exc).split())
        print(f"wmp {args.command}: error: {message}", file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = {0: logging.ERROR, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
