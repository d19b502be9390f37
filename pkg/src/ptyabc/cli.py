"""Command-line interface: ``ptyabc simulate | reconstruct | compare | toy``.

Exit codes: 0 success, 1 divergence, 2 usage or input error.
"""

import argparse
import logging
import sys

import numpy as np

from . import __version__, engine, toygeom
from .benchmark import initial_guess
from .bundleio import (
    BundleError,
    atomic_write,
    read_bundle,
    render_field,
    write_bundle,
    write_reconstruction,
    write_trace_csv,
)
from .metrics import MetricRegion
from .projections import ProbeObjectPair
from .simulate import (
    PROBE_PRESETS,
    GroundTruth,
    embed_center,
    forward,
    frame_size,
    make_phantom,
    make_probe,
    make_scan,
)

log = logging.getLogger("ptyabc")

DEFAULT_COMPARE = "dc,ar,sf,raar:0.75,rrr:0.5,tlambda:0.75"
TOY_CIRCLES = ("1,0,1", "0,1.5,1.5", "-1,-1,1.4142135623730951")


class UsageError(Exception):
    pass


def parse_preset(text):
    """``"raar:0.75"`` -> ``("raar", 0.75)``; ``"sp:shuffled"`` -> ``("sp", "shuffled")``."""
    name, sep, arg = text.strip().partition(":")
    name = name.lower()
    if name == "sp":
        order = arg or "fixed"
        if order not in ("fixed", "shuffled"):
            raise UsageError(f"sp order must be fixed or shuffled, got {order!r}")
        return name, order
    if name not in engine.PRESETS:
        raise UsageError(f"unknown preset {name!r}; valid: {', '.join(engine.PRESETS + ('sp',))}")
    if not sep:
        return name, engine.DEFAULT_PARAMETER if name in engine.PARAMETERIZED else None
    if name not in engine.PARAMETERIZED:
        raise UsageError(f"preset {name!r} takes no parameter")
    try:
        value = float(arg)
    except ValueError:
        raise UsageError(f"bad parameter in {text!r}") from None
    if not 0 < value <= 1:
        raise UsageError(f"{name} parameter must lie in (0, 1], got {value}")
    return name, value


def parse_region(text, shape):
    if text is None:
        return MetricRegion.central(shape)
    try:
        top, left, h, w = (int(v) for v in text.split(","))
        return MetricRegion(top, left, h, w).check(shape)
    except ValueError as err:
        raise UsageError(f"--region: {err}") from None


def _point(text, flag):
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"{flag} must be 'x,y', got {text!r}") from None
    return np.array([x, y])


def _load(path):
    try:
        return read_bundle(path)
    except BundleError as err:
        raise UsageError(f"{path}: {err}") from None


def _init_pair(args, geom, truth):
    if args.init == "truth":
        if truth is None:
            raise UsageError("--init truth needs a bundle with ground truth")
        return ProbeObjectPair(truth.probe, truth.object)
    radius = args.init_radius if args.init_radius is not None else 0.375 * geom.probe_size
    if not 1 <= radius <= geom.probe_size / 2:
        raise UsageError(f"--init-radius must lie in [1, {geom.probe_size / 2}], got {radius}")
    return initial_guess(geom, radius)


# ---------------------------------------------------------------- simulate


def cmd_simulate(args):
    cfg = dict(PROBE_PRESETS[args.preset_probe])
    if args.probe_radius is not None:
        cfg["radius"] = args.probe_radius
    if args.edge_smooth is not None:
        cfg["edge_smooth"] = args.edge_smooth
    m = cfg["m"]
    if not 1 <= cfg["radius"] <= m / 2:
        raise UsageError(f"--probe-radius must lie in [1, {m / 2}], got {cfg['radius']}")
    if cfg["edge_smooth"] < 0:
        raise UsageError("--edge-smooth must be >= 0")
    if args.size < 32:
        raise UsageError(f"--size must be >= 32, got {args.size}")
    if args.grid < 1 or args.step < 1 or args.jitter < 0:
        raise UsageError("--grid and --step must be >= 1 and --jitter >= 0")
    if args.photons is not None and args.photons <= 0:
        raise UsageError("--photons must be positive")
    if not 0 <= args.contrast <= 1:
        raise UsageError("--contrast must lie in [0, 1]")
    n = args.frame or frame_size(args.grid, args.step, args.jitter, m, args.size)
    if n < args.size:
        raise UsageError(f"--frame {n} smaller than --size {args.size}")
    try:
        geom = make_scan(args.grid, args.grid, args.step, args.jitter, m, n, args.seed)
    except ValueError as err:
        raise UsageError(f"--grid/--step/--frame: {err}") from None
    phantom = make_phantom(args.size, args.contrast, args.phase_range, args.cells, args.seed)
    truth = GroundTruth(embed_center(phantom, n), make_probe(m, cfg["radius"], cfg["edge_smooth"]))
    data = forward(truth, geom, args.photons, args.seed)
    meta = {
        "probe_config": args.preset_probe,
        "probe_radius": cfg["radius"],
        "edge_smooth": cfg["edge_smooth"],
        "phantom_size": args.size,
        "contrast": args.contrast,
        "phase_range": args.phase_range,
        "cells": args.cells,
        "grid": args.grid,
        "step": args.step,
        "jitter": args.jitter,
        "photons_per_pattern": args.photons,
        "seed": args.seed,
    }
    write_bundle(args.out, data, geom, truth, meta)
    photons = "noiseless" if args.photons is None else f"{args.photons:g} photons/pattern"
    print(f"wrote {args.out}: J={len(geom)} M={m} N={n} ({photons})")
    return 0


# ---------------------------------------------------------------- reconstruct


def _param_echo(name, value, given):
    if name not in engine.PARAMETERIZED:
        return name
    key = "lambda" if name == "tlambda" else "beta"
    return f"{name} {key}={value:g}" + ("" if given else " (default)")


def cmd_reconstruct(args):
    name = args.preset.lower()
    if name not in engine.PRESETS + ("sp",):
        raise UsageError(f"unknown preset {name!r}; valid: {', '.join(engine.PRESETS + ('sp',))}")
    given = args.param is not None
    value = args.param if given else engine.DEFAULT_PARAMETER
    if name in engine.PARAMETERIZED and not 0 < value <= 1:
        raise UsageError(f"--beta/--lambda must lie in (0, 1], got {value}")
    if args.iters < 1 or args.inner_iters < 1:
        raise UsageError("--iters and --inner-iters must be >= 1")
    data, geom, truth = _load(args.input)
    region = parse_region(args.region, (geom.object_size,) * 2)
    init = _init_pair(args, geom, truth)
    echo = _param_echo(name, value, given)
    if name == "sp":
        params = engine.AlgoParams(
            iters=args.iters, preset="sp", sp_order=args.order, seed=args.seed,
            sp_alpha_obj=args.alpha_obj, sp_alpha_probe=args.alpha_probe,
        )
        echo = params.label
    else:
        params = engine.AlgoParams.from_preset(
            name, value if name in engine.PARAMETERIZED else None,
            iters=args.iters, inner_iters=args.inner_iters, seed=args.seed,
        )
    comments = [
        f"ptyabc {__version__} reconstruct",
        f"bundle={args.input}",
        f"preset={echo}",
        f"a={params.a:g} b={params.b:g} c={params.c:g}",
        f"iters={args.iters} inner_iters={args.inner_iters} seed={args.seed} init={args.init}",
        f"region={region.top},{region.left},{region.height},{region.width}",
    ]
    print(f"preset: {echo}")
    status = 0
    try:
        if name == "sp":
            pair, trace = engine.sp_run(data, geom, init, params, truth, region)
        else:
            pair, trace = engine.run(data, geom, init, params, truth, region, from_pair=args.from_pair)
    except engine.DivergenceError as err:
        print(f"error: {err}", file=sys.stderr)
        pair, trace, status = err.pair, err.trace, 1
    prefix = args.out_prefix
    write_trace_csv([trace], f"{prefix}_trace.csv", comments, timing=args.timing)
    if pair is not None and status == 0:
        write_reconstruction(prefix, pair, {"preset": echo, "iters": args.iters})
        render_field(pair.object, "modulus", f"{prefix}_object_modulus.pgm")
        render_field(pair.object, "phase", f"{prefix}_object_phase.pgm")
        render_field(pair.probe, "modulus", f"{prefix}_probe_modulus.pgm")
    if len(trace):
        line = f"iterations={len(trace)} data_error={trace.data_error[-1]:.6e}"
        if trace.object_nrmse[-1] is not None:
            line += f" object_nrmse={trace.object_nrmse[-1]:.6e}"
        print(line)
    return status


# ---------------------------------------------------------------- compare


def cmd_compare(args):
    presets = [parse_preset(p) for p in args.presets.split(",") if p.strip()]
    if not presets:
        raise UsageError("--presets is empty")
    if args.iters < 1 or args.inner_iters < 1:
        raise UsageError("--iters and --inner-iters must be >= 1")
    data, geom, truth = _load(args.input)
    region = parse_region(args.region, (geom.object_size,) * 2)
    init = _init_pair(args, geom, truth)
    comments = [
        f"ptyabc {__version__} compare",
        f"bundle={args.input}",
        "presets=" + ",".join(f"{n}:{p}" if p is not None else n for n, p in presets),
        f"iters={args.iters} inner_iters={args.inner_iters} seed={args.seed} init={args.init}",
        f"region={region.top},{region.left},{region.height},{region.width}",
    ]
    traces = engine.compare(
        data, geom, init, presets, args.iters, truth, region,
        from_pair=args.from_pair, inner_iters=args.inner_iters, seed=args.seed,
    )
    write_trace_csv(traces, args.out, comments, timing=args.timing, status=True)
    diverged = [k for k, t in traces.items() if t.status != "ok"]
    for label, tr in traces.items():
        final = tr.final_nrmse
        extra = "" if final is None else f" object_nrmse={final:.4e}"
        print(f"{label:>14s} {tr.status:8s} data_error={tr.data_error[-1] if len(tr) else float('nan'):.4e}{extra}")
    return 1 if diverged and len(diverged) == len(traces) else 0


# ---------------------------------------------------------------- toy


def cmd_toy(args):
    try:
        circles = [toygeom.Circle.parse(c) for c in (args.circle or TOY_CIRCLES)]
    except ValueError as err:
        raise UsageError(f"--circle: {err}") from None
    start = _point(args.start, "--start")
    if args.iters < 1:
        raise UsageError("--iters must be >= 1")
    lines = ["sweep,component,x,y"]
    if args.algorithm == "sp":
        relax = [1.0] * len(circles)
        if args.relaxations:
            try:
                relax = [float(v) for v in args.relaxations.split(",")]
            except ValueError:
                raise UsageError("--relaxations must be comma-separated numbers") from None
            if len(relax) != len(circles):
                raise UsageError("--relaxations needs one value per circle")
        traj = toygeom.sp_iterate(start, circles, args.order, relax, args.iters, args.seed)
        fine = toygeom.sp_iterate(start, circles, args.order, relax, args.iters, args.seed, verbose=True)
        for k, p in enumerate(traj):
            lines.append(f"{k},0,{p[0]:.17g},{p[1]:.17g}")
        period = toygeom.detect_cycle(fine, max_period=2 * len(circles))
        final = traj[-1]
        last_step = toygeom.step_distances(fine)[-1]
    else:
        a, b, c = engine.preset_params(args.algorithm, args.beta if args.algorithm == "raar" else None)
        x0 = np.tile(start, (len(circles), 1))
        traj = toygeom.product_iterate(x0, circles, a, b, c, args.iters)
        for k, x in enumerate(traj):
            for i, p in enumerate(x):
                lines.append(f"{k},{i},{p[0]:.17g},{p[1]:.17g}")
        period = toygeom.detect_cycle(traj.reshape(len(traj), -1))
        final = toygeom.shadow(traj[-1], circles)
        last_step = toygeom.step_distances(traj)[-1]
    lines.append(f"# algorithm={args.algorithm} circles={';'.join(f'{c.center[0]:g},{c.center[1]:g},{c.radius:g}' for c in circles)}")
    lines.append(f"# final={final[0]:.17g},{final[1]:.17g} last_step={last_step:.3e}")
    lines.append(f"# cycle={'yes' if period else 'no'} period={period}")
    atomic_write(args.out, "\n".join(lines) + "\n")
    print(f"final=({final[0]:.10g}, {final[1]:.10g}) cycle={'yes' if period else 'no'}")
    return 0


# ---------------------------------------------------------------- parser


def build_parser():
    p = argparse.ArgumentParser(prog="ptyabc", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="write a simulated dataset bundle")
    s.add_argument("--preset-probe", choices=sorted(PROBE_PRESETS), default="big")
    s.add_argument("--probe-radius", type=float, help="override the preset radius (px)")
    s.add_argument("--edge-smooth", type=float, help="override the preset edge roll-off (px)")
    s.add_argument("--size", type=int, default=128, help="phantom size (px)")
    s.add_argument("--frame", type=int, help="object frame size (default: fit scan and phantom)")
    s.add_argument("--contrast", type=float, default=0.4)
    s.add_argument("--phase-range", type=float, default=1.0)
    s.add_argument("--cells", type=int, default=12)
    s.add_argument("--grid", type=int, default=8)
    s.add_argument("--step", type=int, default=12)
    s.add_argument("--jitter", type=int, default=2)
    s.add_argument("--photons", type=float, help="photons per pattern (default: noiseless)")
    s.add_argument("--seed", type=int, default=7)
    s.add_argument("--out", required=True, help="bundle directory")
    s.set_defaults(func=cmd_simulate)

    def common(q):
        q.add_argument("--in", dest="input", required=True, help="bundle directory")
        q.add_argument("--iters", type=int, default=300)
        q.add_argument("--inner-iters", type=int, default=1)
        q.add_argument("--seed", type=int, default=0)
        q.add_argument("--init", choices=("default", "truth"), default="default")
        q.add_argument("--init-radius", type=float, help="aperture radius of the initial probe (px)")
        q.add_argument("--region", help="metric region top,left,height,width")
        q.add_argument("--from-pair", action="store_true", help="data error from re-synthesized waves")
        q.add_argument("--timing", action="store_true", help="record elapsed_ms (not byte-reproducible)")

    r = sub.add_parser("reconstruct", help="run one algorithm on a bundle")
    common(r)
    r.add_argument("--preset", default="raar", help=f"one of {', '.join(engine.PRESETS + ('sp',))}")
    r.add_argument("--beta", "--lambda", dest="param", type=float, help="raar/rrr beta or tlambda lambda")
    r.add_argument("--order", choices=("fixed", "shuffled"), default="fixed", help="sp sweep order")
    r.add_argument("--alpha-obj", type=float, default=1.0)
    r.add_argument("--alpha-probe", type=float, default=1.0)
    r.add_argument("--out-prefix", required=True)
    r.set_defaults(func=cmd_reconstruct)

    c = sub.add_parser("compare", help="run several algorithms from the same start")
    common(c)
    c.add_argument("--presets", default=DEFAULT_COMPARE, help="comma list, name or name:param")
    c.add_argument("--out", required=True, help="trace CSV path")
    c.set_defaults(func=cmd_compare)

    t = sub.add_parser("toy", help="circle-intersection trajectories")
    t.add_argument("--circle", action="append", help="cx,cy,r (repeatable)")
    t.add_argument("--algorithm", choices=("sp", "dc", "ar", "raar"), default="sp")
    t.add_argument("--beta", type=float, default=engine.DEFAULT_PARAMETER)
    t.add_argument("--relaxations", help="sp relaxation per circle, comma-separated")
    t.add_argument("--order", choices=("fixed", "shuffled"), default="fixed")
    t.add_argument("--start", default="0.3,0.2")
    t.add_argument("--iters", type=int, default=100)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_toy)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except UsageError as err:
        parser.print_usage(sys.stderr)
        print(f"ptyabc {args.command}: error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
