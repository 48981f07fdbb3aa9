"""Convolution and sampling primitives that respect ERP boundary topology.

Feature maps are (H, W, C) arrays. Horizontal padding wraps across the seam.
Vertical padding continues over the pole: the row above row 0 is row 0
shifted by half the width (walking across the pole lands on the opposite
meridian), the next row up is row 1 shifted, and so on outward. Convolutions
here are forward-only cross-correlations; arithmetic is done in float64 and
results are returned as float64.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np
from scipy.special import expit

from .flow import sample_bilinear
from .geometry import FrameDims, pixel_grid

_ACTIVATIONS = {
    "identity": lambda z: z,
    "sigmoid": expit,
    "tanh": np.tanh,
    "relu": lambda z: np.maximum(z, 0.0),
}


def circular_pad(x: np.ndarray, pad: int) -> np.ndarray:
    """Pad (H, W[, C]) by `pad` on every side with ERP continuation.

    Horizontal neighbors wrap modulo W. Vertical neighbors reflect over the
    pole with a half-width roll, so pole padding requires even W. The
    reflection consumes one source row per padded row, hence pad <= H.
    """
    if pad < 0:
        raise ValueError("pad must be >= 0")
    if pad == 0:
        return x.copy()
    h, w = x.shape[:2]
    if pad > h:
        raise ValueError(f"pad {pad} exceeds height {h}")
    if w % 2 != 0:
        raise ValueError("pole padding needs an even width for the half-width roll")
    top = np.roll(x[:pad][::-1], w // 2, axis=1)
    bot = np.roll(x[h - pad :][::-1], w // 2, axis=1)
    stacked = np.concatenate([top, x, bot], axis=0)
    return np.concatenate([stacked[:, w - pad :], stacked, stacked[:, :pad]], axis=1)


def dilated_conv2d(x: np.ndarray, kernel: np.ndarray, dilation: int = 1) -> np.ndarray:
    """Dilated cross-correlation with ERP padding, same-size output.

    kernel has shape (C_out, C_in, k, k) with odd k. Output is
    (H, W, C_out) float64.
    """
    if x.ndim == 2:
        x = x[..., None]
    if kernel.ndim != 4 or kernel.shape[2] != kernel.shape[3]:
        raise ValueError(f"expected (C_out, C_in, k, k) kernel, got {kernel.shape}")
    c_out, c_in, k, _ = kernel.shape
    if k % 2 != 1:
        raise ValueError("kernel size must be odd")
    if dilation < 1:
        raise ValueError("dilation must be >= 1")
    if c_in != x.shape[2]:
        raise ValueError(f"kernel expects {c_in} channels, input has {x.shape[2]}")
    h, w = x.shape[:2]
    pad = dilation * (k - 1) // 2
    xp = circular_pad(x, pad).astype(np.float64, copy=False)
    k64 = kernel.astype(np.float64, copy=False)
    out = np.zeros((h, w, c_out), dtype=np.float64)
    for i in range(k):
        for j in range(k):
            patch = xp[i * dilation : i * dilation + h, j * dilation : j * dilation + w]
            out += np.einsum("hwc,oc->hwo", patch, k64[:, :, i, j])
    return out


def adaptive_dilated_conv(x, kernels, dilations, weights) -> np.ndarray:
    """Weighted sum of parallel dilated convolution branches.

    weights are one scalar or one (H, W) map per branch; callers choose them
    to sum to 1 where a convex combination is wanted. Branch order is the
    summation order, so results are deterministic.
    """
    if not (len(kernels) == len(dilations) == len(weights)):
        raise ValueError("kernels, dilations and weights must have equal length")
    if not kernels:
        raise ValueError("need at least one branch")
    out = None
    for kern, dil, wgt in zip(kernels, dilations, weights):
        branch = dilated_conv2d(x, kern, dil)
        wgt = np.asarray(wgt, dtype=np.float64)
        if wgt.ndim == 2:
            if wgt.shape != branch.shape[:2]:
                raise ValueError("per-pixel weight shape does not match input")
            wgt = wgt[..., None]
        elif wgt.ndim != 0:
            raise ValueError("weights must be scalars or (H, W) maps")
        term = wgt * branch
        out = term if out is None else out + term
    return out


@dataclass(frozen=True)
class GuidanceParams:
    """Affine-plus-activation transform of the distortion map."""

    scale: float = 1.0
    bias: float = 0.0
    activation: str = "identity"

    def __post_init__(self):
        if self.activation not in _ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}, choose from {sorted(_ACTIVATIONS)}")

    def to_dict(self) -> dict:
        return asdict(self)


def distortion_guidance(dmap: np.ndarray, params: GuidanceParams | None = None) -> np.ndarray:
    """Turn a distortion map into a per-pixel guidance gain.

    With no params this is the identity: the latitude weight itself gates
    geometry-adaptive sampling. Loadable params allow a calibrated affine
    remap followed by a pointwise activation.
    """
    dmap = np.asarray(dmap, dtype=np.float64)
    if params is None:
        return dmap.copy()
    return _ACTIVATIONS[params.activation](params.scale * dmap + params.bias)


def deformable_sample(
    feat: np.ndarray,
    base_flow: np.ndarray,
    offsets: np.ndarray,
    modulation_logits: np.ndarray,
    guidance,
) -> np.ndarray:
    """Guidance-modulated deformable sampling of a feature map.

    For each pixel p and each of K taps:

        out(p) = mean_k sigmoid(G(p) * logit_k(p)) * feat(p + flow(p) + G(p) * offset_k(p))

    Args:
        feat: (H, W, C) feature map.
        base_flow: (H, W, 2) carrier flow.
        offsets: (H, W, K, 2) per-tap offsets, scaled by the guidance.
        modulation_logits: (H, W, K) pre-sigmoid tap weights.
        guidance: scalar or (H, W) gain, typically from distortion_guidance.

    Taps are averaged, so with K = 1, zero offsets, unit guidance and a
    saturated logit this reduces to a plain bilinear warp.
    """
    if feat.ndim == 2:
        feat = feat[..., None]
    h, w = feat.shape[:2]
    if base_flow.shape != (h, w, 2):
        raise ValueError(f"base_flow must be ({h}, {w}, 2), got {base_flow.shape}")
    if offsets.ndim != 4 or offsets.shape[:2] != (h, w) or offsets.shape[3] != 2:
        raise ValueError(f"offsets must be ({h}, {w}, K, 2), got {offsets.shape}")
    k_taps = offsets.shape[2]
    if modulation_logits.shape != (h, w, k_taps):
        raise ValueError(f"modulation_logits must be ({h}, {w}, {k_taps}), got {modulation_logits.shape}")
    g = np.asarray(guidance, dtype=np.float64)
    if g.ndim not in (0, 2) or (g.ndim == 2 and g.shape != (h, w)):
        raise ValueError("guidance must be a scalar or an (H, W) map")

    xs, ys = pixel_grid(FrameDims(width=w, height=h))
    px = xs + base_flow[..., 0]
    py = ys + base_flow[..., 1]
    feat64 = feat.astype(np.float64, copy=False)
    acc = np.zeros((h, w, feat.shape[2]), dtype=np.float64)
    for k in range(k_taps):
        gate = expit(g * modulation_logits[..., k].astype(np.float64))
        tap = sample_bilinear(feat64, px + g * offsets[..., k, 0], py + g * offsets[..., k, 1])
        acc += gate[..., None] * tap
    out = acc / k_taps
    return out.astype(feat.dtype, copy=False)
