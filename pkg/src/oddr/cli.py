"""Batch command-line front end.

Subcommands: defend one image, inject a synthetic patch, dump Mahalanobis
diagnostics, compute depth metrics from map files, and evaluate a corpus of
injected images.  Exit codes: 0 success, 2 bad arguments or config, 3
unreadable image, 4 internal numeric failure.
"""

import argparse
import concurrent.futures
import csv
import dataclasses
import glob
import json
import os
import sys

from .config import DefenseConfig, RngStream, config_as_dict, parse_config_file, validate_config
from .defense import defend_image
from .diagnostics import (
    export_profile_csv,
    fit_fragment_distribution,
    mahalanobis_profile,
    separation_gap,
)
from .errors import NonFiniteError, OddrError, UnreadableImage
from .fragmentation import fragment
from .metrics import affected_ratio, depth_error, depth_mse, localization_overlap, read_map
from .pngio import load_image, read_sidecar, save_image, save_text, sidecar_path, write_sidecar
from .synth import PATCH_KINDS, PatchSpec, inject


def _load_config(args) -> DefenseConfig:
    cfg = parse_config_file(args.config) if args.config else DefenseConfig()
    if getattr(args, "seed", None) is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    return validate_config(cfg)


def _report_payload(input_path, cfg, mode, result) -> dict:
    return {
        "input": str(input_path),
        "config": config_as_dict(cfg),
        "mode": mode,
        "detected": result.detected,
        "clusters": [
            {
                "center_index": c.center_index,
                "member_count": c.member_count,
                "mask": {"row0": c.mask.row0, "col0": c.mask.col0, "d": c.mask.size},
                "channels": [
                    {"rank": t.rank, "preserved": t.preserved} for t in c.channels
                ],
            }
            for c in result.clusters
        ],
        "elapsed": result.elapsed,
    }


def cmd_defend(args) -> int:
    cfg = _load_config(args)
    image = load_image(args.input)
    result = defend_image(image, cfg, mode=args.mode)
    save_image(args.output, result.defended)
    if args.report:
        payload = _report_payload(args.input, cfg, args.mode, result)
        save_text(args.report, json.dumps(payload, indent=2) + "\n")
    print(
        f"detected={'true' if result.detected else 'false'} "
        f"clusters={len(result.clusters)} elapsed={result.elapsed:.6f}s"
    )
    return 0


def cmd_inject(args) -> int:
    image = load_image(args.input)
    spec = PatchSpec(kind=args.kind, x0=args.x, y0=args.y, size=args.size)
    patched, truth = inject(image, spec, RngStream(args.seed))
    save_image(args.output, patched)
    write_sidecar(sidecar_path(args.output), truth)
    print(f"injected kind={args.kind} at (x0={args.x}, y0={args.y}) size={args.size}")
    return 0


def cmd_diagnose(args) -> int:
    cfg = _load_config(args)
    image = load_image(args.input)
    grid = fragment(image, cfg.kernel_size, cfg.stride)
    fit = fit_fragment_distribution(grid)
    distances = mahalanobis_profile(fit, grid)
    export_profile_csv(args.output, grid, distances)
    if args.truth:
        truth = read_sidecar(args.truth)
        gap = separation_gap(distances, grid, truth.region)
        print(f"separation_gap {gap:.6f}")
    return 0


def cmd_depth_metrics(args) -> int:
    clean = read_map(args.clean)
    adv = read_map(args.adv)
    focus = read_map(args.focus)
    e_d = depth_error(clean, adv, focus)
    r_a = affected_ratio(clean, adv, focus)
    mse = depth_mse(clean, adv)
    print(f"{e_d:.6f} {r_a:.6f} {mse:.6f}")
    return 0


def _eval_one(path, cfg, mode, stream):
    image = load_image(path)
    truth = read_sidecar(sidecar_path(path))
    result = defend_image(image, cfg, mode=mode, stream=stream)
    iou = (
        localization_overlap(result.clusters[0].mask, truth) if result.detected else None
    )
    return path, result.detected, iou, result.elapsed


def cmd_eval(args) -> int:
    cfg = _load_config(args)
    paths = sorted(
        p for p in glob.glob(os.path.join(args.directory, "*.png"))
        if os.path.exists(sidecar_path(p))
    )
    if not paths:
        print(f"no image/sidecar pairs under {args.directory}", file=sys.stderr)
        return 2
    base = RngStream(cfg.seed)
    workers = max(1, int(os.environ.get("ODDR_THREADS", "1")))
    jobs = [(p, cfg, args.mode, base.child(i)) for i, p in enumerate(paths)]
    if workers == 1:
        rows = [_eval_one(*job) for job in jobs]
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda job: _eval_one(*job), jobs))
    csv_path = args.csv or os.path.join(args.directory, "eval.csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["file", "detected", "iou", "elapsed"])
        for path, detected, iou, elapsed in rows:
            writer.writerow(
                [os.path.basename(path), int(detected), "" if iou is None else f"{iou:.6f}", f"{elapsed:.6f}"]
            )
    detected_rows = [row for row in rows if row[1]]
    rate = len(detected_rows) / len(rows)
    mean_iou = (
        sum(row[2] for row in detected_rows) / len(detected_rows) if detected_rows else 0.0
    )
    mean_elapsed = sum(row[3] for row in rows) / len(rows)
    print(
        f"samples={len(rows)} detection_rate={rate:.4f} "
        f"mean_iou={mean_iou:.4f} mean_elapsed={mean_elapsed:.6f}s"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oddr", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("defend", help="detect and neutralize patch-like regions in one image")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--output", "-o", required=True)
    p.add_argument("--config")
    p.add_argument("--report")
    p.add_argument("--seed", type=int)
    p.add_argument("--mode", choices=("svd", "mean"), default="svd")
    p.set_defaults(func=cmd_defend)

    p = sub.add_parser("inject", help="inject a synthetic patch and write its ground truth")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--output", "-o", required=True)
    p.add_argument("--kind", choices=PATCH_KINDS, default="noise")
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--y", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_inject)

    p = sub.add_parser("diagnose", help="export the per-fragment Mahalanobis profile as CSV")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--output", "-o", required=True)
    p.add_argument("--config")
    p.add_argument("--truth", help="ground-truth sidecar; prints the separation gap")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("depth-metrics", help="print E_d R_a MSE for a clean/adversarial map pair")
    p.add_argument("clean")
    p.add_argument("adv")
    p.add_argument("focus")
    p.set_defaults(func=cmd_depth_metrics)

    p = sub.add_parser("eval", help="defend every {image, sidecar} pair in a directory")
    p.add_argument("directory")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--mode", choices=("svd", "mean"), default="svd")
    p.add_argument("--csv", help="per-sample CSV path (default: <directory>/eval.csv)")
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NonFiniteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except UnreadableImage as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (OddrError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
