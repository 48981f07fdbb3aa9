"""Quality metrics for ERP frames, plain and sphere-weighted.

The weighted variants rescale per-pixel contributions by the latitude area
weight (see geometry.build_distortion_map), so equatorial errors dominate
and pole rows, which cover almost no solid angle, barely count. SSIM uses
the usual 11-tap Gaussian window (sigma 1.5) over the valid interior, and
its weighted variant applies the area weight at each window center.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import binary_dilation, convolve1d

from .geometry import FrameDims, build_distortion_map

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _as_chw(frame):
    # Internal layout: (H, W, C) float64, grayscale promoted to one channel.
    a = np.asarray(frame, dtype=np.float64)
    return a[..., None] if a.ndim == 2 else a


def psnr(a: np.ndarray, b: np.ndarray, peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB; +inf for identical inputs."""
    a = _as_chw(a)
    b = _as_chw(b)
    if a.shape != b.shape:
        raise ValueError("frame shapes differ")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def ws_psnr(a: np.ndarray, b: np.ndarray, weights: np.ndarray, peak: float = 1.0) -> float:
    """PSNR with per-pixel weighted MSE: sum(w * err^2) / sum(w)."""
    a = _as_chw(a)
    b = _as_chw(b)
    if a.shape != b.shape:
        raise ValueError("frame shapes differ")
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != a.shape[:2]:
        raise ValueError("weight map shape does not match frames")
    sq = ((a - b) ** 2).sum(axis=-1)
    denom = float(w.sum()) * a.shape[2]
    wmse = float((w * sq).sum()) / denom
    if wmse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / wmse)


def _gaussian_kernel1d(window: int, sigma: float) -> np.ndarray:
    r = (window - 1) // 2
    t = np.arange(window, dtype=np.float64) - r
    k = np.exp(-0.5 * (t / sigma) ** 2)
    return k / k.sum()


def _filter_valid(img: np.ndarray, k1d: np.ndarray) -> np.ndarray:
    # Separable window sum over fully interior windows only.
    r = (len(k1d) - 1) // 2
    out = convolve1d(img, k1d, axis=0, mode="constant")[r : img.shape[0] - r]
    return convolve1d(out, k1d, axis=1, mode="constant")[:, r : img.shape[1] - r]


def _local_ssim_map(a2d, b2d, window, sigma, k1, k2, peak):
    c1 = (k1 * peak) ** 2
    c2 = (k2 * peak) ** 2
    k1d = _gaussian_kernel1d(window, sigma)
    mu_a = _filter_valid(a2d, k1d)
    mu_b = _filter_valid(b2d, k1d)
    var_a = _filter_valid(a2d * a2d, k1d) - mu_a * mu_a
    var_b = _filter_valid(b2d * b2d, k1d) - mu_b * mu_b
    cov = _filter_valid(a2d * b2d, k1d) - mu_a * mu_b
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return num / den


def _ssim_maps(a, b, window, sigma, k1, k2, peak):
    a = _as_chw(a)
    b = _as_chw(b)
    if a.shape != b.shape:
        raise ValueError("frame shapes differ")
    h, w = a.shape[:2]
    if h < window or w < window:
        raise ValueError(f"frames must be at least {window}x{window} for SSIM")
    maps = [_local_ssim_map(a[..., c], b[..., c], window, sigma, k1, k2, peak) for c in range(a.shape[2])]
    return np.stack(maps, axis=-1)


def ssim(
    a, b,
    window: int = SSIM_WINDOW,
    sigma: float = SSIM_SIGMA,
    k1: float = SSIM_K1,
    k2: float = SSIM_K2,
    peak: float = 1.0,
) -> float:
    """Mean structural similarity over interior windows, channel-averaged."""
    return float(np.mean(_ssim_maps(a, b, window, sigma, k1, k2, peak)))


def ws_ssim(
    a, b,
    weights: np.ndarray,
    window: int = SSIM_WINDOW,
    sigma: float = SSIM_SIGMA,
    k1: float = SSIM_K1,
    k2: float = SSIM_K2,
    peak: float = 1.0,
) -> float:
    """SSIM with the local map weighted by the area weight at each center."""
    maps = _ssim_maps(a, b, window, sigma, k1, k2, peak).mean(axis=-1)
    r = (window - 1) // 2
    w = np.asarray(weights, dtype=np.float64)
    wc = w[r : w.shape[0] - r, r : w.shape[1] - r]
    if wc.shape != maps.shape:
        raise ValueError("weight map shape does not match frames")
    return float((wc * maps).sum() / wc.sum())


@dataclass
class MetricReport:
    """Per-frame values plus their mean (NaN frames are skipped)."""

    metric_name: str
    per_frame: list[float] = field(default_factory=list)
    mean: float = math.nan

    @classmethod
    def from_values(cls, name: str, values) -> "MetricReport":
        vals = [float(v) for v in values]
        finite_or_inf = [v for v in vals if not math.isnan(v)]
        mean = float(np.mean(finite_or_inf)) if finite_or_inf else math.nan
        return cls(metric_name=name, per_frame=vals, mean=mean)


def sequence_metrics(preds, gts, weights: np.ndarray | None = None, peak: float = 1.0) -> dict:
    """Whole-frame PSNR/SSIM and their sphere-weighted variants per frame."""
    if len(preds) != len(gts):
        raise ValueError("sequence lengths differ")
    if weights is None:
        weights = build_distortion_map(FrameDims.of(np.asarray(preds[0])))
    rows = {"psnr": [], "ws_psnr": [], "ssim": [], "ws_ssim": []}
    for p, g in zip(preds, gts):
        rows["psnr"].append(psnr(p, g, peak))
        rows["ws_psnr"].append(ws_psnr(p, g, weights, peak))
        rows["ssim"].append(ssim(p, g, peak=peak))
        rows["ws_ssim"].append(ws_ssim(p, g, weights, peak=peak))
    return {name: MetricReport.from_values(name, vals) for name, vals in rows.items()}


def masked_region_metrics(
    preds,
    gts,
    masks,
    weights: np.ndarray | None = None,
    window: int = SSIM_WINDOW,
    peak: float = 1.0,
) -> dict:
    """Metrics restricted to masked pixels (PSNR family) and to SSIM windows
    that intersect the mask. Frames with an empty mask contribute NaN and are
    skipped in the means.
    """
    if not (len(preds) == len(gts) == len(masks)):
        raise ValueError("sequence lengths differ")
    if weights is None:
        weights = build_distortion_map(FrameDims.of(np.asarray(preds[0])))
    w64 = np.asarray(weights, dtype=np.float64)
    r = (window - 1) // 2
    rows = {"psnr": [], "ws_psnr": [], "ssim": [], "ws_ssim": []}
    for p, g, m in zip(preds, gts, masks):
        a = _as_chw(p)
        b = _as_chw(g)
        m = np.asarray(m, dtype=bool)
        if not m.any():
            for key in rows:
                rows[key].append(math.nan)
            continue
        sq = ((a - b) ** 2).sum(axis=-1)
        n_ch = a.shape[2]
        mse = float(sq[m].sum()) / (int(m.sum()) * n_ch)
        rows["psnr"].append(math.inf if mse == 0.0 else 10.0 * math.log10(peak * peak / mse))
        wmse = float((w64[m] * sq[m]).sum()) / (float(w64[m].sum()) * n_ch)
        rows["ws_psnr"].append(math.inf if wmse == 0.0 else 10.0 * math.log10(peak * peak / wmse))
        # Window centers whose window overlaps the mask.
        touched = binary_dilation(m, structure=np.ones((window, window), dtype=bool))
        centers = touched[r : m.shape[0] - r, r : m.shape[1] - r]
        smap = _ssim_maps(p, g, window, SSIM_SIGMA, SSIM_K1, SSIM_K2, peak).mean(axis=-1)
        if centers.any():
            rows["ssim"].append(float(smap[centers].mean()))
            wc = w64[r : m.shape[0] - r, r : m.shape[1] - r]
            rows["ws_ssim"].append(float((wc[centers] * smap[centers]).sum() / wc[centers].sum()))
        else:
            rows["ssim"].append(math.nan)
            rows["ws_ssim"].append(math.nan)
    return {name: MetricReport.from_values(name, vals) for name, vals in rows.items()}
