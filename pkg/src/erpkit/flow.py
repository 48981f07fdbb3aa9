"""Optical-flow warping and round-trip validity on ERP frames.

Flow fields are (H, W, 2) float32 arrays holding (dx, dy) per pixel.
Sampling wraps horizontally (the seam is a real neighborhood on the sphere)
and clamps vertically to [0, H-1]. A flow is trusted at a pixel when the
forward/backward round trip

    p' = p + F_fwd(p) + F_bwd(p + F_fwd(p))

returns within a great-circle threshold of p, i.e. the same pixel error
counts for less near the poles where columns converge.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import FrameDims, geodesic_distance, pixel_grid

DEFAULT_EPS_DEG = 0.4


def sample_bilinear(img: np.ndarray, x, y) -> np.ndarray:
    """Bilinearly sample img (H, W) or (H, W, C) at positions (x, y).

    x wraps modulo W, y clamps to [0, H-1]. Weights are computed in float64
    and the result is cast back to img's dtype, so integer positions
    reproduce stored values bit for bit.
    """
    h, w = img.shape[:2]
    x = np.asarray(x, dtype=np.float64) % w
    y = np.clip(np.asarray(y, dtype=np.float64), 0.0, float(h - 1))
    x0f = np.floor(x)
    fx = x - x0f
    y0f = np.floor(y)
    fy = y - y0f
    # The extra modulo guards the x % w == w case that rounding can produce
    # for tiny negative inputs.
    x0 = x0f.astype(np.int64) % w
    x1 = (x0 + 1) % w
    y0 = y0f.astype(np.int64)
    y1 = np.minimum(y0 + 1, h - 1)
    if img.ndim == 3:
        fx = fx[..., None]
        fy = fy[..., None]
    v00 = img[y0, x0]
    v01 = img[y0, x1]
    v10 = img[y1, x0]
    v11 = img[y1, x1]
    top = v00 * (1.0 - fx) + v01 * fx
    bot = v10 * (1.0 - fx) + v11 * fx
    out = top * (1.0 - fy) + bot * fy
    return out.astype(img.dtype, copy=False)


def warp_bilinear(src: np.ndarray, flow: np.ndarray) -> np.ndarray:
    """Warp src by flow: out(p) = src(p + flow(p)) with bilinear sampling."""
    if flow.shape[:2] != src.shape[:2] or flow.shape[-1] != 2:
        raise ValueError(f"flow shape {flow.shape} does not match frame {src.shape}")
    dims = FrameDims.of(src)
    xs, ys = pixel_grid(dims)
    return sample_bilinear(src, xs + flow[..., 0], ys + flow[..., 1])


def lookup_flow_bilinear(flow: np.ndarray, x, y) -> np.ndarray:
    """Interpolate a flow field at continuous positions, (..., 2) output."""
    if flow.ndim != 3 or flow.shape[-1] != 2:
        raise ValueError(f"expected (H, W, 2) flow, got {flow.shape}")
    return sample_bilinear(flow, x, y)


def roundtrip_positions(flow_fwd: np.ndarray, flow_bwd: np.ndarray):
    """Round-trip landing positions p' for every pixel.

    Returns float64 (px, py) grids. The backward flow is interpolated
    bilinearly at the forward target. px is reported unwrapped; distance
    evaluation wraps it implicitly.
    """
    if flow_fwd.shape != flow_bwd.shape:
        raise ValueError("forward/backward flow shapes differ")
    dims = FrameDims(width=flow_fwd.shape[1], height=flow_fwd.shape[0])
    xs, ys = pixel_grid(dims)
    tx = xs + flow_fwd[..., 0]
    ty = ys + flow_fwd[..., 1]
    back = lookup_flow_bilinear(flow_bwd.astype(np.float64, copy=False), tx, ty)
    return tx + back[..., 0], ty + back[..., 1]


@dataclass
class ValidityMap:
    """Per-pixel round-trip verdict: valid iff error < eps_rad (strict)."""

    valid: np.ndarray  # (H, W) bool
    error: np.ndarray  # (H, W) float64, radians
    eps_rad: float


def flow_validity_map(flow_fwd: np.ndarray, flow_bwd: np.ndarray, eps_rad: float) -> ValidityMap:
    """Validate flow_fwd against its reverse via the geodesic round trip.

    Swap the arguments to validate the backward flow of a frame pair.
    """
    dims = FrameDims(width=flow_fwd.shape[1], height=flow_fwd.shape[0])
    xs, ys = pixel_grid(dims)
    px, py = roundtrip_positions(flow_fwd, flow_bwd)
    err = geodesic_distance(xs, ys, px, py, dims)
    return ValidityMap(valid=err < eps_rad, error=err, eps_rad=float(eps_rad))
