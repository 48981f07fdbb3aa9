"""Command-line interface.

Subcommands cover the full synthetic pipeline: generate frames and masks,
validate flows, propagate, and score results. Failures surface as a message
on stderr and a nonzero exit code.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import fileio
from .flow import DEFAULT_EPS_DEG, flow_validity_map
from .geometry import FrameDims, build_distortion_map
from .maskgen import MaskGenConfig, gen_mask_sequence
from .metrics import masked_region_metrics, sequence_metrics
from .propagation import propagate_sequence
from .synthetic import gen_sequence, make_test_panorama, yaw_matrix


def _list_files(directory, pattern):
    d = Path(directory)
    if not d.is_dir():
        raise FileNotFoundError(f"not a directory: {directory}")
    files = sorted(d.glob(pattern))
    if not files:
        raise FileNotFoundError(f"no {pattern} files in {directory}")
    return files


def _read_stack(paths, reader):
    return np.stack([reader(p) for p in paths])


def cmd_propagate(args) -> int:
    frames = _read_stack(_list_files(args.frames, "*.png"), fileio.read_frame)
    masks = _read_stack(_list_files(args.masks, "*.png"), fileio.read_mask)
    flows_fwd = _read_stack(_list_files(args.flows_fwd, "*.flo"), fileio.read_flow)
    flows_bwd = _read_stack(_list_files(args.flows_bwd, "*.flo"), fileio.read_flow)
    if frames.shape[:3] != masks.shape[:3]:
        raise ValueError(f"frame stack {frames.shape[:3]} does not match mask stack {masks.shape[:3]}")
    result = propagate_sequence(
        frames, masks, flows_fwd, flows_bwd,
        eps_rad=math.radians(args.eps_deg), passes=args.passes,
    )
    out = Path(args.out)
    (out / "frames").mkdir(parents=True, exist_ok=True)
    (out / "residual_masks").mkdir(parents=True, exist_ok=True)
    for t in range(frames.shape[0]):
        bit_depth = 8 if result.frames[t].ndim == 3 else 16
        fileio.write_frame(out / "frames" / f"{t:05d}.png", result.frames[t], bit_depth=bit_depth)
        fileio.write_mask(out / "residual_masks" / f"{t:05d}.png", result.residual_masks[t])
    summary = {
        "eps_deg": args.eps_deg,
        "passes": args.passes,
        "frames": int(frames.shape[0]),
        "filled_per_frame": result.fill_counts,
        "total_filled": int(sum(result.fill_counts)),
        "residual_per_frame": [int(m.sum()) for m in result.residual_masks],
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"propagated {summary['total_filled']} pixels over {summary['frames']} frames -> {out}")
    return 0


def cmd_validate_flow(args) -> int:
    fwd = fileio.read_flow(args.fwd)
    bwd = fileio.read_flow(args.bwd)
    vm = flow_validity_map(fwd, bwd, math.radians(args.eps_deg))
    fileio.write_mask(args.out, vm.valid)
    if args.err_out:
        # Errors stored as radians scaled by 1/pi into the full PGM range.
        fileio.write_pgm(args.err_out, vm.error / math.pi)
    print(f"valid fraction: {vm.valid.mean():.6f}")
    return 0


def cmd_metrics(args) -> int:
    preds = _read_stack(_list_files(args.pred, "*.png"), fileio.read_frame)
    gts = _read_stack(_list_files(args.gt, "*.png"), fileio.read_frame)
    if preds.shape != gts.shape:
        raise ValueError(f"prediction stack {preds.shape} does not match reference {gts.shape}")
    weights = build_distortion_map(FrameDims.of(preds[0]))
    if args.masks:
        masks = _read_stack(_list_files(args.masks, "*.png"), fileio.read_mask)
        if masks.shape[0] != preds.shape[0]:
            raise ValueError("mask count does not match frames")
        reports = masked_region_metrics(preds, gts, masks, weights)
    else:
        reports = sequence_metrics(preds, gts, weights)
    names = ["psnr", "ssim", "ws_psnr", "ws_ssim"]
    with open(args.out, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["frame", *names])
        for t in range(preds.shape[0]):
            writer.writerow([t, *(f"{reports[n].per_frame[t]:.6f}" for n in names)])
        writer.writerow(["mean", *(f"{reports[n].mean:.6f}" for n in names)])
    print(f"wrote {args.out}: " + " ".join(f"{n}={reports[n].mean:.4f}" for n in names))
    return 0


def cmd_gen_masks(args) -> int:
    cfg = MaskGenConfig(
        seed=args.seed,
        dims=FrameDims(width=args.width, height=args.height),
        frames=args.frames,
        n_regions=args.regions,
        size_range=(args.size_min, args.size_max),
        speed_range=(args.speed_min, args.speed_max),
        shape_irregularity=args.irregularity,
    )
    seq = gen_mask_sequence(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for t in range(cfg.frames):
        name = f"{t:05d}.png"
        fileio.write_mask(out / name, seq.masks[t])
        paths.append(name)
    manifest = fileio.SequenceManifest(
        width=cfg.dims.width, height=cfg.dims.height, num_frames=cfg.frames,
        mask_paths=paths,
        meta={
            "seed": cfg.seed, "regions": cfg.n_regions,
            "size_range": [args.size_min, args.size_max],
            "speed_range": [args.speed_min, args.speed_max],
            "irregularity": cfg.shape_irregularity,
            "merge_counts": seq.merge_counts,
        },
    )
    fileio.save_manifest(out / "manifest.json", manifest)
    print(f"wrote {cfg.frames} masks -> {out}")
    return 0


def cmd_gen_synthetic(args) -> int:
    dims = FrameDims(width=args.width, height=args.height)
    pano = make_test_panorama(dims, seed=args.seed)
    seq = gen_sequence(pano, yaw_matrix(math.radians(args.yaw_deg_per_frame)), args.frames)
    out = Path(args.out)
    for sub in ("frames", "flows_fwd", "flows_bwd"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    frame_paths, fwd_paths, bwd_paths = [], [], []
    for t in range(args.frames):
        name = f"{t:05d}.png"
        fileio.write_frame(out / "frames" / name, seq.frames[t])
        frame_paths.append(f"frames/{name}")
    for t in range(args.frames - 1):
        name = f"{t:05d}.flo"
        fileio.write_flow(out / "flows_fwd" / name, seq.flows_fwd[t])
        fileio.write_flow(out / "flows_bwd" / name, seq.flows_bwd[t])
        fwd_paths.append(f"flows_fwd/{name}")
        bwd_paths.append(f"flows_bwd/{name}")
    manifest = fileio.SequenceManifest(
        width=dims.width, height=dims.height, num_frames=args.frames,
        frame_paths=frame_paths, flow_fwd_paths=fwd_paths, flow_bwd_paths=bwd_paths,
        meta={
            "seed": args.seed,
            "yaw_deg_per_frame": args.yaw_deg_per_frame,
            "rotations": [r.reshape(-1).tolist() for r in seq.rotations],
        },
    )
    fileio.save_manifest(out / "manifest.json", manifest)
    print(f"wrote {args.frames} frames and {2 * (args.frames - 1)} flows -> {out}")
    return 0


def cmd_distortion_map(args) -> int:
    dmap = build_distortion_map(FrameDims(width=args.width, height=args.height))
    fileio.write_pgm(args.out, dmap)
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="erpkit", description=__doc__.strip().splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("propagate", help="fill masked pixels from adjacent frames along validated flows")
    sp.add_argument("--frames", required=True, help="directory of input frame PNGs")
    sp.add_argument("--masks", required=True, help="directory of mask PNGs (255 = fill)")
    sp.add_argument("--flows-fwd", required=True, help="directory of t->t+1 .flo files")
    sp.add_argument("--flows-bwd", required=True, help="directory of t+1->t .flo files")
    sp.add_argument("--eps-deg", type=float, default=DEFAULT_EPS_DEG, help="round-trip threshold, degrees")
    sp.add_argument("--passes", type=int, default=2, help="bidirectional sweep repetitions")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_propagate)

    sv = sub.add_parser("validate-flow", help="round-trip validity of one flow pair")
    sv.add_argument("--fwd", required=True)
    sv.add_argument("--bwd", required=True)
    sv.add_argument("--eps-deg", type=float, default=DEFAULT_EPS_DEG)
    sv.add_argument("--out", required=True, help="validity mask PNG")
    sv.add_argument("--err-out", default=None, help="geodesic error PGM (radians / pi)")
    sv.set_defaults(func=cmd_validate_flow)

    sm = sub.add_parser("metrics", help="PSNR/SSIM and sphere-weighted variants")
    sm.add_argument("--pred", required=True)
    sm.add_argument("--gt", required=True)
    sm.add_argument("--masks", default=None, help="restrict scoring to masked regions")
    sm.add_argument("--out", required=True, help="CSV report path")
    sm.set_defaults(func=cmd_metrics)

    sg = sub.add_parser("gen-masks", help="seeded moving-blob mask sequence")
    sg.add_argument("--seed", type=int, required=True)
    sg.add_argument("--width", type=int, default=304)
    sg.add_argument("--height", type=int, default=152)
    sg.add_argument("--frames", type=int, default=100)
    sg.add_argument("--regions", type=int, default=3)
    sg.add_argument("--size-min", type=float, default=16.0)
    sg.add_argument("--size-max", type=float, default=48.0)
    sg.add_argument("--speed-min", type=float, default=0.5)
    sg.add_argument("--speed-max", type=float, default=3.0)
    sg.add_argument("--irregularity", type=float, default=0.4)
    sg.add_argument("--out", required=True)
    sg.set_defaults(func=cmd_gen_masks)

    ss = sub.add_parser("gen-synthetic", help="rotating-camera sequence with analytic flows")
    ss.add_argument("--seed", type=int, required=True)
    ss.add_argument("--width", type=int, default=304)
    ss.add_argument("--height", type=int, default=152)
    ss.add_argument("--frames", type=int, default=100)
    ss.add_argument("--yaw-deg-per-frame", type=float, required=True)
    ss.add_argument("--out", required=True)
    ss.set_defaults(func=cmd_gen_synthetic)

    sd = sub.add_parser("distortion-map", help="latitude area-weight map as PGM")
    sd.add_argument("--width", type=int, default=304)
    sd.add_argument("--height", type=int, default=152)
    sd.add_argument("--out", required=True)
    sd.set_defaults(func=cmd_distortion_map)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
