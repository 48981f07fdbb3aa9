"""File formats: PNG frames and masks, Middlebury .flo flows, PGM maps,
JSON manifests and guidance parameters.

Frames travel as float32 in [0, 1] and are quantized on write. Flow files
follow the Middlebury layout: float32 magic 202021.25, int32 width and
height, then row-major interleaved (dx, dy) float32 pairs, all
little-endian. Big-endian files are rejected explicitly rather than decoded
into garbage.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
from PIL import Image

from .kernels import GuidanceParams

FLO_MAGIC = 202021.25


class FileFormatError(ValueError):
    """A file exists but its contents cannot be decoded."""


def write_frame(path, frame: np.ndarray, bit_depth: int = 8) -> None:
    """Write a float [0, 1] frame as PNG. 16-bit output is grayscale only."""
    frame = np.asarray(frame)
    q = np.clip(frame, 0.0, 1.0)
    if bit_depth == 8:
        arr = np.round(q * 255.0).astype(np.uint8)
        img = Image.fromarray(arr, mode="RGB" if arr.ndim == 3 else "L")
    elif bit_depth == 16:
        if frame.ndim != 2:
            raise ValueError("16-bit PNG output supports single-channel frames only")
        arr = np.round(q * 65535.0).astype(np.uint16)
        img = Image.fromarray(arr)  # uint16 maps to 16-bit grayscale
    else:
        raise ValueError("bit_depth must be 8 or 16")
    img.save(str(path), format="PNG")


def read_frame(path) -> np.ndarray:
    """Read a PNG frame into float32 [0, 1], (H, W) or (H, W, 3)."""
    try:
        with Image.open(str(path)) as img:
            img.load()
            arr = np.asarray(img)
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise FileFormatError(f"cannot decode image {path}: {exc}") from exc
    if arr.dtype == np.uint8:
        return (arr.astype(np.float32) / 255.0).astype(np.float32)
    if arr.dtype in (np.uint16, np.int32):
        # 16-bit grayscale PNG; Pillow may widen to int32.
        return (arr.astype(np.float32) / 65535.0).astype(np.float32)
    raise FileFormatError(f"unsupported PNG sample type {arr.dtype} in {path}")


def write_mask(path, mask: np.ndarray) -> None:
    """Write a boolean mask as an 8-bit 0/255 grayscale PNG."""
    arr = np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(str(path), format="PNG")


def read_mask(path) -> np.ndarray:
    arr = read_frame(path)
    if arr.ndim == 3:
        arr = arr[..., 0]
    return arr > 0.5


def write_flow(path, flow: np.ndarray) -> None:
    """Write an (H, W, 2) flow as a little-endian Middlebury .flo file."""
    flow = np.asarray(flow)
    if flow.ndim != 3 or flow.shape[-1] != 2:
        raise ValueError(f"expected (H, W, 2) flow, got {flow.shape}")
    h, w = flow.shape[:2]
    with open(str(path), "wb") as f:
        f.write(np.array([FLO_MAGIC], dtype="<f4").tobytes())
        f.write(np.array([w, h], dtype="<i4").tobytes())
        f.write(flow.astype("<f4").tobytes())


def read_flow(path) -> np.ndarray:
    """Read a Middlebury .flo file into an (H, W, 2) float32 array."""
    data = Path(str(path)).read_bytes()
    if len(data) < 12:
        raise FileFormatError(f"{path}: truncated .flo header")
    magic = np.frombuffer(data[:4], dtype="<f4")[0]
    if magic != np.float32(FLO_MAGIC):
        if np.frombuffer(data[:4], dtype=">f4")[0] == np.float32(FLO_MAGIC):
            raise FileFormatError(f"{path}: big-endian .flo not supported, expected little-endian")
        raise FileFormatError(f"{path}: bad .flo magic {magic!r}")
    w, h = (int(v) for v in np.frombuffer(data[4:12], dtype="<i4"))
    if w <= 0 or h <= 0 or w > 10**5 or h > 10**5:
        raise FileFormatError(f"{path}: implausible flow dims {w}x{h}")
    need = h * w * 2 * 4
    if len(data) - 12 != need:
        raise FileFormatError(f"{path}: expected {need} payload bytes, found {len(data) - 12}")
    return np.frombuffer(data[12:], dtype="<f4").reshape(h, w, 2).copy()


def write_pgm(path, values: np.ndarray, maxval: int = 65535) -> None:
    """Write values in [0, 1] as a binary PGM (16-bit samples big-endian)."""
    if maxval not in (255, 65535):
        raise ValueError("maxval must be 255 or 65535")
    arr = np.round(np.clip(np.asarray(values, dtype=np.float64), 0.0, 1.0) * maxval)
    arr = arr.astype(">u2" if maxval > 255 else "u1")
    h, w = arr.shape
    with open(str(path), "wb") as f:
        f.write(f"P5\n{w} {h}\n{maxval}\n".encode("ascii"))
        f.write(arr.tobytes())


def read_pgm(path):
    """Read a binary PGM written by write_pgm; returns (values, maxval)."""
    data = Path(str(path)).read_bytes()
    parts = data.split(b"\n", 3)
    if len(parts) != 4 or parts[0] != b"P5":
        raise FileFormatError(f"{path}: not a binary PGM")
    try:
        w, h = (int(v) for v in parts[1].split())
        maxval = int(parts[2])
    except ValueError as exc:
        raise FileFormatError(f"{path}: bad PGM header") from exc
    dtype = ">u2" if maxval > 255 else "u1"
    arr = np.frombuffer(parts[3], dtype=dtype, count=w * h).reshape(h, w)
    return arr.astype(np.float64) / maxval, maxval


def save_guidance_params(path, params: GuidanceParams) -> None:
    Path(str(path)).write_text(json.dumps(params.to_dict(), indent=2) + "\n")


def load_guidance_params(path) -> GuidanceParams:
    try:
        raw = json.loads(Path(str(path)).read_text())
        return GuidanceParams(scale=float(raw["scale"]), bias=float(raw["bias"]),
                              activation=str(raw["activation"]))
    except (KeyError, json.JSONDecodeError) as exc:
        raise FileFormatError(f"{path}: bad guidance parameter file: {exc}") from exc


@dataclass
class SequenceManifest:
    """Paths and shape of an on-disk sequence, relative to the manifest."""

    width: int
    height: int
    num_frames: int
    frame_paths: list[str] = field(default_factory=list)
    mask_paths: list[str] = field(default_factory=list)
    flow_fwd_paths: list[str] = field(default_factory=list)
    flow_bwd_paths: list[str] = field(default_factory=list)
    meta: dict = field(default_factory=dict)


def save_manifest(path, manifest: SequenceManifest) -> None:
    Path(str(path)).write_text(json.dumps(asdict(manifest), indent=2) + "\n")


def load_manifest(path) -> SequenceManifest:
    try:
        raw = json.loads(Path(str(path)).read_text())
        return SequenceManifest(**raw)
    except (TypeError, KeyError, json.JSONDecodeError) as exc:
        raise FileFormatError(f"{path}: bad manifest: {exc}") from exc


def validate_manifest(manifest: SequenceManifest, base_dir) -> None:
    """Check listed files exist and frame dims agree before any compute."""
    base = Path(str(base_dir))
    if manifest.frame_paths and len(manifest.frame_paths) != manifest.num_frames:
        raise FileFormatError("manifest frame count does not match num_frames")
    for rel in (*manifest.frame_paths, *manifest.mask_paths,
                *manifest.flow_fwd_paths, *manifest.flow_bwd_paths):
        p = base / rel
        if not p.exists():
            raise FileFormatError(f"manifest references missing file {rel}")
    for rel in (*manifest.frame_paths, *manifest.mask_paths):
        with Image.open(base / rel) as img:
            if img.size != (manifest.width, manifest.height):
                raise FileFormatError(
                    f"{rel}: size {img.size} does not match manifest "
                    f"{manifest.width}x{manifest.height}"
                )
