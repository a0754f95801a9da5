"""Command line entry points: run, analyze, alexandrov, suite."""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .config import load_config
from .diagnostics import (
    check_energy_monotone,
    deficit_of_field,
    fit_exponential_decay,
    format_decay,
    format_deficit,
    label_regime,
)
from .errors import FlatFlowError, InsufficientWindow
from .fields import DomainKind, perimeter_estimate
from .solver import FlowKind, McfStepParams, MsStepParams, run_flow
from .spectral import SpectralWorkspace


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    from .shapes import generate_initial

    E0 = generate_initial(cfg.shapes, cfg.grid, cfg.seed)
    if cfg.flow is FlowKind.MULLINS_SEKERKA:
        p0 = perimeter_estimate(E0)
        if p0 >= 2.0 * cfg.grid.side_length:
            print(
                f"warning: initial perimeter {p0:.4f} >= 2 * side_length; "
                "strip-like limits are not excluded",
                file=sys.stderr,
            )
    m = E0.cached_area
    common = dict(
        h=cfg.h,
        m=m,
        max_pd_iters=cfg.max_pd_iters,
        tol_pd=cfg.tol_pd,
        tol_area=cfg.tol_area,
        neighbors=cfg.neighbors,
    )
    if cfg.flow is FlowKind.APMCF:
        params = McfStepParams(**common)
        workspace = None
    else:
        params = MsStepParams(**common)
        workspace = SpectralWorkspace(cfg.grid)

    os.makedirs(cfg.output_dir, exist_ok=True)
    from .formats import write_frame, write_trace

    def frame_cb(k, E):
        final = k == cfg.steps
        if (cfg.frame_every and k % cfg.frame_every == 0) or k == 0 or final:
            write_frame(E, os.path.join(cfg.output_dir, f"frame_{k:06d}.pgm"))

    result = run_flow(
        E0,
        cfg.flow,
        params,
        cfg.steps,
        workspace=workspace,
        frame_cb=frame_cb,
        deficit_every=cfg.deficit_every,
    )
    write_frame(result.final, os.path.join(cfg.output_dir, "frame_final.pgm"))
    write_trace(result.trace, os.path.join(cfg.output_dir, "trace.csv"))

    energy = check_energy_monotone(result.trace, cfg.flow)
    last = result.trace.rows[-1]
    print("run summary")
    print(f"  status        = {result.status.value}")
    print(f"  steps         = {last.step}")
    print(f"  area          = {last.area:.12g}")
    print(f"  perimeter     = {last.perimeter_poly:.12g}")
    print(f"  lambda        = {last.lam:.12g}")
    print(f"  components    = {last.n_components}")
    print(f"  energy_ok     = {energy.ok} (max violation {energy.max_violation:.3e})")
    print(f"  outputs       = {cfg.output_dir}/trace.csv, frames *.pgm")
    return 0


def _cmd_analyze(args) -> int:
    from .formats import read_trace

    trace = read_trace(args.trace)
    m = trace.m
    if args.target_d is not None:
        d_star = args.target_d
    else:
        d_star = int(trace.rows[-1].deficit_d)
        if d_star <= 0:
            raise InsufficientWindow(
                "trace has no usable deficit column; pass --target-d"
            )
    target_p = 2.0 * np.sqrt(np.pi * m * d_star)
    floor = args.floor
    if floor is None:
        floor = 3.0 * args.side_length / args.grid_n
    fit = fit_exponential_decay(trace, target_p, floor)
    regime = label_regime(trace, target_p, floor)
    print(format_decay(fit, regime))
    return 0


def _cmd_alexandrov(args) -> int:
    from .curves import alexandrov_deficit, curvature, default_smoothing_width, extract_contours
    from .formats import read_frame

    f = read_frame(args.frame, side_length=args.side_length)
    contours = extract_contours(f)
    dx = f.spec.dx
    for c in contours:
        ds = c.length / len(c.points)
        curvature(c, default_smoothing_width(dx, ds))
    rep = alexandrov_deficit(contours, args.mass)
    print(format_deficit(rep))
    return 0


def _cmd_suite(args) -> int:
    from .suite import refreeze, run_suite

    if args.refreeze:
        values = refreeze(args.refreeze)
        for name in sorted(values):
            print(f"frozen {name} = {values[name]:.12g}")
        return 0
    results = run_suite()
    bad = 0
    for r in results:
        status = "ok" if r.ok else "REGRESSION"
        print(f"{r.name}: value={r.value:.12g} baseline={r.baseline:.12g} {status}")
        bad += 0 if r.ok else 1
    return 1 if bad else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="flatflow",
        description="Minimizing-movement flows (area-preserving curvature flow, "
        "Mullins-Sekerka) with quantitative disk-convergence diagnostics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate a flow from a config file")
    p_run.add_argument("--config", required=True)

    p_an = sub.add_parser("analyze", help="decay fit and regime label for a trace CSV")
    p_an.add_argument("--trace", required=True)
    p_an.add_argument("--target-d", type=int, default=None)
    p_an.add_argument("--floor", type=float, default=None)
    p_an.add_argument("--grid-n", type=int, default=256)
    p_an.add_argument("--side-length", type=float, default=1.0)

    p_al = sub.add_parser("alexandrov", help="perimeter-deficit report for a PGM frame")
    p_al.add_argument("--frame", required=True)
    p_al.add_argument("--mass", type=float, required=True)
    p_al.add_argument("--side-length", type=float, default=1.0)

    p_su = sub.add_parser("suite", help="run the frozen property suite")
    p_su.add_argument("--refreeze", default=None, metavar="PATH",
                      help="recompute baselines and write them to PATH")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "analyze":
            return _cmd_analyze(args)
        if args.command == "alexandrov":
            return _cmd_alexandrov(args)
        return _cmd_suite(args)
    except FlatFlowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
