"""Flow-guided propagation of visible pixels into masked regions.

A masked pixel of frame t is filled from an adjacent frame when three gates
all open: the flow between the frames survives the geodesic round-trip check,
the pixel is still masked, and the flow target in the adjacent frame touches
no masked pixel. Sequences are processed in alternating sweeps (pull from
t+1 along the forward flows, then from t-1 along the backward flows) so
fills chain across many frames; pixels are written once and then frozen.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .flow import flow_validity_map, sample_bilinear, warp_bilinear
from .geometry import FrameDims, pixel_grid


def mask_target_check(mask: np.ndarray, x, y) -> np.ndarray:
    """1 where sampling at (x, y) would touch any masked pixel, else 0.

    Conservative gate for bilinear reads: a target between a masked and an
    unmasked pixel is rejected, a target exactly on an unmasked pixel center
    is accepted even if its neighbors are masked (those carry zero weight).
    """
    sampled = sample_bilinear(mask.astype(np.float64), x, y)
    return (sampled > 0.0).astype(np.uint8)


def propagation_mask(
    mask_t: np.ndarray,
    mask_adj: np.ndarray,
    flow: np.ndarray,
    valid: np.ndarray,
) -> np.ndarray:
    """Pixels of frame t to fill from the adjacent frame along flow.

    Boolean AND of the three gates: round-trip validity, still-masked source,
    uncontaminated target.
    """
    if mask_t.shape != mask_adj.shape or mask_t.shape != valid.shape:
        raise ValueError("mask/validity shapes differ")
    if flow.shape[:2] != mask_t.shape:
        raise ValueError("flow shape does not match masks")
    dims = FrameDims.of(mask_t)
    xs, ys = pixel_grid(dims)
    target_clean = mask_target_check(mask_adj, xs + flow[..., 0], ys + flow[..., 1]) == 0
    return np.asarray(valid, dtype=bool) & np.asarray(mask_t, dtype=bool) & target_clean


def propagate_step(
    frame_t: np.ndarray,
    frame_adj: np.ndarray,
    flow: np.ndarray,
    fill_mask: np.ndarray,
) -> np.ndarray:
    """Composite warped adjacent content over frame t where fill_mask is set.

    Pixels outside fill_mask are passed through untouched (bit for bit).
    """
    warped = warp_bilinear(frame_adj, flow)
    sel = np.asarray(fill_mask, dtype=bool)
    if frame_t.ndim == 3:
        sel = sel[..., None]
    return np.where(sel, warped, frame_t)


@dataclass
class PropagationResult:
    frames: np.ndarray          # (T, H, W[, C]) filled output
    residual_masks: np.ndarray  # (T, H, W) bool, still unfilled
    fill_counts: list[int]      # pixels filled per frame, all passes


def propagate_sequence(
    frames: np.ndarray,
    masks: np.ndarray,
    flows_fwd: np.ndarray,
    flows_bwd: np.ndarray,
    eps_rad: float,
    passes: int = 2,
) -> PropagationResult:
    """Run alternating bidirectional propagation sweeps over a sequence.

    Args:
        frames: (T, H, W[, C]) float frames.
        masks: (T, H, W) boolean or 0/1 masks, 1 marking pixels to fill.
        flows_fwd: (T-1, H, W, 2); flows_fwd[t] maps frame t to frame t+1.
        flows_bwd: (T-1, H, W, 2); flows_bwd[t] maps frame t+1 to frame t.
        eps_rad: round-trip geodesic acceptance threshold, radians.
        passes: number of (backward sweep, forward sweep) repetitions.

    Each sweep recomputes the fill gates against the current residual masks,
    so pixels filled earlier act as sources later but are never overwritten.
    Flow validity is fixed per pair and computed once up front.
    """
    frames = np.asarray(frames)
    masks = np.asarray(masks).astype(bool)
    t_len = frames.shape[0]
    if masks.shape[0] != t_len:
        raise ValueError("frame/mask counts differ")
    if len(flows_fwd) != t_len - 1 or len(flows_bwd) != t_len - 1:
        raise ValueError("need T-1 forward and T-1 backward flows")
    if passes < 0:
        raise ValueError("passes must be >= 0")

    out = frames.copy()
    resid = masks.copy()
    fills = [0] * t_len
    valid_fwd = [flow_validity_map(flows_fwd[t], flows_bwd[t], eps_rad).valid for t in range(t_len - 1)]
    valid_bwd = [flow_validity_map(flows_bwd[t], flows_fwd[t], eps_rad).valid for t in range(t_len - 1)]

    def pull(t, adj, flw, vld):
        m_r = propagation_mask(resid[t], resid[adj], flw, vld)
        if m_r.any():
            out[t][m_r] = warp_bilinear(out[adj], flw)[m_r]
            resid[t][m_r] = False
            fills[t] += int(m_r.sum())

    for _ in range(passes):
        # Backward in time: frame t pulls from t+1, descending so fresh
        # fills chain toward the start of the sequence within one sweep.
        for t in range(t_len - 2, -1, -1):
            pull(t, t + 1, flows_fwd[t], valid_fwd[t])
        # Forward in time: frame t pulls from t-1, ascending.
        for t in range(1, t_len):
            pull(t, t - 1, flows_bwd[t - 1], valid_bwd[t - 1])

    return PropagationResult(frames=out, residual_masks=resid, fill_counts=fills)
