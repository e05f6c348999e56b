"""Command-line interface: ``qcl volume``, ``qcl sample``, ``qcl eta``, ``qcl compare``.

Exit status is 0 on success, 2 when the flags are invalid (argparse errors,
forbidden or missing parameters, out-of-range values) and 1 when a
computation fails.
"""

from __future__ import annotations

import argparse
import contextlib
import sys
from typing import Sequence

import numpy as np

from . import __version__
from .channel import SpaceKind, is_psd, params_to_choi
from .contraction import eta_batch, eta_bounds, eta_tr, extremal_params
from .csvio import comment_line, write_channels, write_ecdf, write_profile
from .errors import DomainError, QclError, ShapeError, UsageError
from .montecarlo import estimate_fiber_volume, estimate_total_volume
from .sampler import GlobalMode, SamplerMode, sample_fiber, sample_fiber_literal, sample_global
from .stats import eta_cdf_experiment, eta_profile
from .validation import compare_with_oracle, format_report
from .volume import choi_fiber_volume, choi_total_volume, fiber_volume, total_volume, total_volume_formula

KINDS = [k.value for k in SpaceKind]


def _add_common(p: argparse.ArgumentParser, *, space=True, af=True, n=None, seed=True) -> None:
    if space:
        p.add_argument("--space", choices=KINDS, required=True)
    if af:
        p.add_argument("--a", type=float)
        p.add_argument("--f", type=float)
    if n is not None:
        p.add_argument("-n", "--samples", type=int, default=n)
    if seed:
        p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: QCL_THREADS or 1)")
    p.add_argument("--out", default="-", help="output path, '-' for stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcl", description="Volumes, samplers and contraction statistics for qubit channels.")
    parser.add_argument("--version", action="version", version=f"qcl {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    vol = sub.add_parser("volume", help="closed-form or Monte-Carlo volumes")
    vol.add_argument("method", choices=["exact", "mc"])
    _add_common(vol, n=10**6)

    smp = sub.add_parser("sample", help="draw channels and write them as CSV")
    _add_common(smp, n=1000)
    smp.add_argument("--mode", choices=["paper", "layered"], default="layered")
    smp.add_argument("--global", dest="gmode", choices=[m.value for m in GlobalMode], default=GlobalMode.DENSITY_AF.value)

    eta = sub.add_parser("eta", help="contraction-coefficient experiments")
    eta.add_argument("experiment", choices=["cdf", "profile", "bounds"])
    eta.add_argument("--space", choices=KINDS)
    eta.add_argument("--a", type=float)
    eta.add_argument("--f", type=float)
    eta.add_argument("--x", type=float)
    eta.add_argument("-n", "--samples", type=int)
    eta.add_argument("--seed", type=int, default=0)
    eta.add_argument("--alpha", type=float, default=5e-5)
    eta.add_argument("--grid", type=int, default=100)
    eta.add_argument("--mode", choices=["paper", "layered"], default="layered")
    eta.add_argument("--global", dest="gmode", choices=[m.value for m in GlobalMode], default=GlobalMode.DENSITY_AF.value)
    eta.add_argument("--threads", type=int, default=None)
    eta.add_argument("--out", default="-")

    cmp_ = sub.add_parser("compare", help="KS tests of a fast fiber sampler against the rejection oracle")
    _add_common(cmp_, n=10_000)
    cmp_.add_argument("--mode", choices=["paper", "layered"], default="layered")
    return parser


@contextlib.contextmanager
def _open_out(path: str):
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _comment(args, keys) -> str:
    return comment_line(__version__, {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None})


def _fiber_args(kind: SpaceKind, args, required: bool):
    """Validate --a/--f for the kind; returns (a, f) or (None, None)."""
    if kind.is_unital and args.f is not None:
        raise UsageError(f"--f is fixed to 1 - a for {kind}; do not pass it")
    if args.a is None:
        if args.f is not None:
            raise UsageError("--f needs --a")
        if required:
            raise UsageError("--a is required here")
        return None, None
    if not kind.is_unital and args.f is None:
        raise UsageError(f"{kind} fibers need both --a and --f")
    return args.a, args.f


def cmd_volume(args) -> None:
    kind = SpaceKind(args.space)
    a, f = _fiber_args(kind, args, required=False)
    with _open_out(args.out) as out:
        if args.method == "exact":
            if a is None:
                out.write(f"{kind} total volume = {total_volume(kind):.17g}  ({total_volume_formula(kind)})\n")
                targets = [("choi body", choi_total_volume(kind))] if kind is SpaceKind.UNITAL_COMPLEX else []
            else:
                out.write(f"{kind} fiber volume at a={a}" + (f", f={f}" if f is not None else "")
                          + f" = {fiber_volume(kind, a, f):.17g}\n")
                targets = [("choi body", choi_fiber_volume(kind, a, f))] if kind is SpaceKind.UNITAL_COMPLEX else []
            for label, val in targets:
                out.write(f"{label:>9} volume = {val:.17g}\n")
            return
        if a is None:
            est = estimate_total_volume(kind, args.samples, args.seed, args.threads)
            closed, choi = total_volume(kind), choi_total_volume(kind)
        else:
            est = estimate_fiber_volume(kind, a, f, args.samples, args.seed, args.threads)
            closed, choi = fiber_volume(kind, a, f), choi_fiber_volume(kind, a, f)
        out.write(f"estimate = {est.mean:.10g}  stderr = {est.stderr:.4g}  n = {est.n}  hits = {est.hits}\n")
        out.write(f"closed form = {closed:.10g}  z = {est.zscore(closed):+.3f}\n")
        if choi != closed:
            out.write(f"choi body   = {choi:.10g}  z = {est.zscore(choi):+.3f}\n")


def cmd_sample(args) -> None:
    kind = SpaceKind(args.space)
    a, f = _fiber_args(kind, args, required=False)
    mode = SamplerMode.parse(args.mode)
    if mode is SamplerMode.PAPER_LITERAL and kind is not SpaceKind.GENERAL_REAL:
        raise UsageError("--mode paper is only defined for general-real")
    if args.samples < 1:
        raise UsageError("-n must be positive")
    if a is None:
        batch = sample_global(kind, args.gmode, mode, rng=args.seed, size=args.samples, workers=args.threads)
    elif mode is SamplerMode.PAPER_LITERAL:
        batch = sample_fiber_literal(a, f, rng=args.seed, size=args.samples, workers=args.threads)
    else:
        batch = sample_fiber(kind, a, f, rng=args.seed, size=args.samples, workers=args.threads)
    comment = _comment(args, ["command", "space", "a", "f", "samples", "mode", "gmode", "seed"])
    with _open_out(args.out) as out:
        write_channels(out, batch, eta=eta_batch(batch), comment=comment)


def cmd_eta(args) -> None:
    if args.experiment == "bounds":
        if args.a is None or args.f is None:
            raise UsageError("eta bounds needs --a and --f")
        lo, hi = eta_bounds(args.a, args.f)
        with _open_out(args.out) as out:
            out.write(f"eta bounds at a={args.a}, f={args.f}: ({lo:.17g}, {hi:.17g})\n")
            if args.x is not None:
                p = extremal_params(args.a, args.f, args.x)
                Q = params_to_choi(p)
                out.write(f"channel with d={p.d:.17g}, e={p.e:.17g}, b=c=g=0: eta = {eta_tr(Q):.17g}, "
                          f"psd = {bool(is_psd(Q))}\n")
        return
    if args.space is None:
        raise UsageError(f"eta {args.experiment} needs --space")
    kind = SpaceKind(args.space)
    if args.experiment == "cdf":
        n = 10_000 if args.samples is None else args.samples
        mode = SamplerMode.parse(args.mode)
        if mode is SamplerMode.PAPER_LITERAL and kind is not SpaceKind.GENERAL_REAL:
            raise UsageError("--mode paper is only defined for general-real")
        _, band = eta_cdf_experiment(kind, n, args.alpha, args.seed, args.gmode, mode, args.threads)
        args.samples = n
        comment = _comment(args, ["command", "experiment", "space", "samples", "alpha", "mode", "gmode", "seed"])
        with _open_out(args.out) as out:
            write_ecdf(out, band, comment)
        return
    if not kind.is_unital:
        raise UsageError("eta profile runs over unital kinds only")
    n = 1000 if args.samples is None else args.samples
    rows = eta_profile(kind, args.grid, n, args.alpha, args.seed, args.threads)
    args.samples = n
    comment = _comment(args, ["command", "experiment", "space", "grid", "samples", "alpha", "seed"])
    with _open_out(args.out) as out:
        write_profile(out, rows, comment)


def cmd_compare(args) -> None:
    kind = SpaceKind(args.space)
    a, f = _fiber_args(kind, args, required=True)
    literal = SamplerMode.parse(args.mode) is SamplerMode.PAPER_LITERAL
    if literal and kind is not SpaceKind.GENERAL_REAL:
        raise UsageError("--mode paper is only defined for general-real")
    res = compare_with_oracle(kind, a, f, args.samples, args.seed, literal, args.threads)
    title = f"{args.mode} sampler vs oracle, {kind}, a={a}" + (f", f={f}" if f is not None else "") + f", n={args.samples}"
    with _open_out(args.out) as out:
        out.write(format_report(res, title) + "\n")


COMMANDS = {"volume": cmd_volume, "sample": cmd_sample, "eta": cmd_eta, "compare": cmd_compare}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        COMMANDS[args.command](args)
    except (UsageError, DomainError, ShapeError) as exc:
        print(f"qcl: error: {exc}", file=sys.stderr)
        return 2
    except (QclError, ArithmeticError, AssertionError, RuntimeError, np.linalg.LinAlgError, OSError) as exc:
        print(f"qcl: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
