"""Command-line entry point: ``maxflowseg {segment,synth,eval,sweep-s}``.

Exit status is 0 on success, 1 on usage errors and 2 on runtime errors.
"""

import argparse
import csv
import dataclasses
import itertools
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import io as imgio
from .capacity import PriorConfig
from .errors import EmptyMask, InvalidSpec, MaxflowSegError
from .metrics import dice, hausdorff95
from .segmenter import SegmenterConfig, foreground_mask, segment
from .solver import InnerSolverConfig
from .synth import PRESETS, Disc, Rect, SynthSpec, defect_spec, generate_synthetic

REPORT_HEADER = ["outer", "inner_iters", "residual", "energy", "cap_delta"]
CHOICES = {
    "source_mode": ("derived", "as_printed"),
    "init_strategy": ("percentile", "constants"),
    "level_update": ("calibrated", "literal"),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def fmt(x):
    return f"{x:.6g}"


def _add_dataclass_flags(parser, cls, skip=()):
    group = parser.add_argument_group(cls.__name__)
    for f in dataclasses.fields(cls):
        if f.name in skip or f.default is dataclasses.MISSING:
            continue
        flag = "--" + f.name.replace("_", "-")
        if f.type is bool:
            group.add_argument(flag, dest=f.name, action=argparse.BooleanOptionalAction,
                               default=f.default)
        elif f.type in (int, float):
            group.add_argument(flag, dest=f.name, type=f.type, default=f.default,
                               metavar=f.type.__name__.upper())
        elif f.type is str:
            group.add_argument(flag, dest=f.name, choices=CHOICES.get(f.name), default=f.default)
        else:  # Optional[float]
            group.add_argument(flag, dest=f.name, type=float, default=f.default, metavar="FLOAT")


def _pick(cls, args, **overrides):
    names = {f.name for f in dataclasses.fields(cls)}
    kwargs = {k: v for k, v in vars(args).items() if k in names}
    kwargs.update(overrides)
    return cls(**kwargs)


def build_config(args, **overrides):
    try:
        inner = _pick(InnerSolverConfig, args)
        prior = _pick(PriorConfig, args)
        return _pick(SegmenterConfig, args, inner=inner, prior=prior, **overrides)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def config_echo(cfg):
    return dataclasses.asdict(cfg)


def _metrics(pred, truth):
    score = {"dice": dice(pred, truth)}
    try:
        score["hd95"] = hausdorff95(pred, truth)
    except EmptyMask:
        score["hd95"] = float("nan")
    return score


def write_report(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REPORT_HEADER)
        for r in rows:
            writer.writerow([r["outer"], r["inner_iters"], fmt(r["residual"]), fmt(r["energy"]),
                             fmt(r["cap_delta"])])


def report_rows(result):
    return [
        {"outer": k + 1, "inner_iters": d.iterations_run, "residual": d.final_residual,
         "energy": e, "cap_delta": delta}
        for k, (d, e, delta) in enumerate(zip(result.inner_diagnostics, result.energy_history,
                                              result.capacity_deltas))
    ]


def _sidecar(report, suffix):
    report = Path(report)
    return report.with_name(report.stem + suffix)


def cmd_segment(args):
    cfg = build_config(args)
    image = imgio.load_image(args.input)
    start = time.perf_counter()
    result = segment(image, cfg)
    elapsed = time.perf_counter() - start
    mask = foreground_mask(result.mask, image, invert=args.invert)
    if args.output_mask:
        imgio.save_mask(mask, args.output_mask)

    truth = None
    scores = None
    if args.ground_truth:
        truth = imgio.load_mask(args.ground_truth)
        if truth.shape != mask.shape:
            raise MaxflowSegError(f"ground truth shape {truth.shape} != image shape {mask.shape}")
        scores = _metrics(mask, truth)

    rows = report_rows(result)
    if args.report:
        Path(args.report).parent.mkdir(parents=True, exist_ok=True)
        write_report(args.report, rows)
        meta = {
            "config": config_echo(cfg),
            "input": str(args.input),
            "invert": args.invert,
            "outer_iterations": result.outer_iterations,
            "converged": result.converged,
            "s_level_mean": float(np.mean(result.capacities.s_level)),
            "t_level_mean": float(np.mean(result.capacities.t_level)),
            "spatial_capacity": result.capacities.C,
            "metrics": None if scores is None else {
                k: (None if np.isnan(v) else v) for k, v in scores.items()},
        }
        with open(_sidecar(args.report, ".json"), "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
        if not args.no_figures:
            from .plotting import plot_convergence, plot_segmentation

            plot_convergence(rows, _sidecar(args.report, "_convergence.png"))
            plot_segmentation(image, mask, _sidecar(args.report, "_segmentation.png"), truth)

    print(f"outer_iterations={result.outer_iterations} converged={str(result.converged).lower()}")
    if scores is not None:
        print(f"dice={scores['dice']:.6f} hd95={scores['hd95']:.6f}")
    print(f"elapsed={elapsed:.3f}s", file=sys.stderr)
    return 0


def _parse_tuple(text, n, kind):
    parts = text.split(",")
    if len(parts) != n:
        raise UsageError(f"{kind} expects {n} comma-separated numbers, got {text!r}")
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise UsageError(f"{kind}: cannot parse {text!r}") from None


def cmd_synth(args):
    if args.preset:
        spec = PRESETS[args.preset](args.seed)
    else:
        shapes = []
        for d in args.disc or []:
            r, c, rad, i = _parse_tuple(d, 4, "--disc")
            shapes.append(Disc(r, c, rad, i))
        for d in args.rect or []:
            r, c, h, w, i = _parse_tuple(d, 5, "--rect")
            shapes.append(Rect(int(r), int(c), int(h), int(w), i))
        spec = SynthSpec(args.width, args.height, shapes, args.background, args.noise_sigma,
                         args.seed)
    try:
        image, mask = generate_synthetic(spec)
    except InvalidSpec as exc:
        raise UsageError(str(exc)) from exc
    imgio.save_image(image, args.out_image)
    if args.out_mask:
        imgio.save_mask(mask, args.out_mask)
    print(f"width={spec.width} height={spec.height} shapes={len(spec.shapes)} "
          f"foreground={int(mask.sum())}")
    return 0


def cmd_eval(args):
    pred = imgio.load_mask(args.pred)
    truth = imgio.load_mask(args.truth)
    scores = _metrics(pred, truth)
    print(f"dice={scores['dice']:.6f} hd95={scores['hd95']:.6f}")
    return 0


def cmd_sweep_s(args):
    try:
        levels = [float(s) for s in args.s_levels.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"--s-levels: cannot parse {args.s_levels!r}") from None
    if not levels:
        raise UsageError("--s-levels needs at least one value")
    if args.input:
        image = imgio.load_image(args.input)
    else:
        image, _ = generate_synthetic(defect_spec(args.seed))
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    masks, rows = [], []
    for s in levels:
        cfg = build_config(args, init_strategy="constants", init_s=s, init_t=args.t_level,
                           estimate_capacities=False, spatial_capacity=args.spatial_capacity,
                           max_outer=1)
        result = segment(image, cfg)
        mask = foreground_mask(result.mask, image, invert=args.invert)
        imgio.save_mask(mask, out_dir / f"mask_s{s:g}.png")
        masks.append(mask)
        diag = result.inner_diagnostics[-1]
        rows.append([fmt(s), fmt(mask.mean()), diag.iterations_run, fmt(diag.final_residual),
                     fmt(result.energy_history[-1])])
        print(f"s={s:g} t={args.t_level:g} foreground_fraction={mask.mean():.6f}")
    for (i, a), (j, b) in itertools.combinations(enumerate(masks), 2):
        print(f"dice[s={levels[i]:g},s={levels[j]:g}]={dice(a, b):.6f}")

    if args.report:
        Path(args.report).parent.mkdir(parents=True, exist_ok=True)
        with open(args.report, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["s_level", "foreground_fraction", "inner_iters", "residual", "energy"])
            writer.writerows(rows)
        if not args.no_figures:
            from .plotting import plot_sweep

            plot_sweep(image, masks, levels, args.t_level, _sidecar(args.report, "_masks.png"))
    return 0


def build_parser():
    parser = _Parser(prog="maxflowseg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("segment", help="segment an image with estimated capacities")
    p.add_argument("--input", required=True, help="PGM or PNG image")
    p.add_argument("--output-mask", help="PNG mask to write (foreground = 255)")
    p.add_argument("--ground-truth", help="reference mask; prints dice and hd95")
    p.add_argument("--report", help="CSV report; a .json config echo and figures go beside it")
    p.add_argument("--invert", action="store_true", help="report the darker region instead")
    p.add_argument("--no-figures", action="store_true", help="skip the report figures")
    _add_dataclass_flags(p, InnerSolverConfig)
    _add_dataclass_flags(p, PriorConfig)
    _add_dataclass_flags(p, SegmenterConfig)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("synth", help="render a synthetic image and its ground-truth mask")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--height", type=int, default=64)
    p.add_argument("--background", type=float, default=0.2)
    p.add_argument("--disc", action="append", metavar="ROW,COL,RADIUS,INTENSITY")
    p.add_argument("--rect", action="append", metavar="ROW,COL,HEIGHT,WIDTH,INTENSITY")
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-image", required=True)
    p.add_argument("--out-mask")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval", help="compare two masks")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep-s", help="segment with fixed capacities for several source levels")
    p.add_argument("--input", help="image (default: the built-in synthetic defect image)")
    p.add_argument("--seed", type=int, default=7, help="seed of the built-in defect image")
    p.add_argument("--t-level", type=float, default=0.3)
    p.add_argument("--s-levels", default="0.2,0.28,0.35")
    p.add_argument("--spatial-capacity", type=float, default=0.1)
    p.add_argument("--output-dir", required=True)
    p.add_argument("--report")
    p.add_argument("--invert", action="store_true")
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--threshold", type=float, default=0.5)
    _add_dataclass_flags(p, InnerSolverConfig)
    p.set_defaults(func=cmd_sweep_s)
    return parser


def run_cli(argv=None):
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (MaxflowSegError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
