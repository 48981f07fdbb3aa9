"""Synthetic rotation-only ERP sequences with analytic ground-truth flow.

A rotating camera is the one motion whose ERP optical flow is known in
closed form: a scene point at unit vector u lands at R u, and the flow is the
pixel displacement between the two projections. Sequences rendered this way
give exact flows for exercising round-trip validation and propagation.

Rotations are 3x3 orthonormal matrices with determinant +1 (validated, not
normalized silently). Sample positions that land within 1e-9 px of an
integer are snapped, so the identity and whole-column yaws reproduce frames
through the exact gather path instead of accumulating trig rounding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .flow import sample_bilinear
from .geometry import (
    FrameDims,
    pix_to_sph,
    pixel_grid,
    sph_to_pix,
    sph_to_unit_vec,
    unit_vec_to_sph,
)

_SNAP_TOL = 1e-9


def yaw_matrix(alpha: float) -> np.ndarray:
    """Rotation about the polar axis; positive alpha increases longitude."""
    c, s = np.cos(alpha), np.sin(alpha)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def pitch_matrix(beta: float) -> np.ndarray:
    """Rotation about the y axis, tilting the forward point poleward."""
    c, s = np.cos(beta), np.sin(beta)
    return np.array([[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]])


def roll_matrix(gamma: float) -> np.ndarray:
    """Rotation about the forward (x) axis."""
    c, s = np.cos(gamma), np.sin(gamma)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rotation_from_angles(yaw: float = 0.0, pitch: float = 0.0, roll: float = 0.0) -> np.ndarray:
    return yaw_matrix(yaw) @ pitch_matrix(pitch) @ roll_matrix(roll)


def check_rotation(rot: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Validate a 3x3 rotation matrix (orthonormal, det +1)."""
    rot = np.asarray(rot, dtype=np.float64)
    if rot.shape != (3, 3):
        raise ValueError(f"rotation must be 3x3, got {rot.shape}")
    if not np.allclose(rot.T @ rot, np.eye(3), atol=tol):
        raise ValueError("matrix is not orthonormal")
    if abs(np.linalg.det(rot) - 1.0) > tol:
        raise ValueError("matrix determinant is not +1 (not a proper rotation)")
    return rot


def _snap_near_integers(a: np.ndarray) -> np.ndarray:
    rounded = np.round(a)
    return np.where(np.abs(a - rounded) < _SNAP_TOL, rounded, a)


def rotate_panorama(pano: np.ndarray, rot: np.ndarray) -> np.ndarray:
    """Render the panorama seen after rotating the camera by rot.

    Each output pixel looks up the source direction R^-1 u and samples the
    panorama bilinearly there.
    """
    rot = check_rotation(rot)
    dims = FrameDims.of(pano)
    xs, ys = pixel_grid(dims)
    phi, theta = pix_to_sph(xs, ys, dims)
    # Row-vector u times R equals R^T u, i.e. the inverse rotation.
    src = sph_to_unit_vec(phi, theta) @ rot
    sphi, stheta = unit_vec_to_sph(src)
    sx, sy = sph_to_pix(sphi, stheta, dims)
    return sample_bilinear(pano, _snap_near_integers(sx), _snap_near_integers(sy))


def flow_from_rotation(rot: np.ndarray, dims: FrameDims, dtype=np.float32) -> np.ndarray:
    """Analytic flow (H, W, 2) taking each pixel to its rotated position.

    Horizontal components are wrapped to the short way around the seam,
    (-W/2, W/2]. Pass dtype=np.float64 when downstream math needs more than
    storage precision.
    """
    rot = check_rotation(rot)
    xs, ys = pixel_grid(dims)
    phi, theta = pix_to_sph(xs, ys, dims)
    dst = sph_to_unit_vec(phi, theta) @ rot.T  # row-vector form of R u
    dphi, dtheta = unit_vec_to_sph(dst)
    tx, ty = sph_to_pix(dphi, dtheta, dims)
    dx = _snap_near_integers(tx) - xs
    dy = _snap_near_integers(ty) - ys
    half = dims.width / 2.0
    dx = (dx + half) % dims.width - half
    dx = np.where(dx == -half, half, dx)
    return np.stack([dx, dy], axis=-1).astype(dtype)


@dataclass
class SyntheticSequence:
    frames: np.ndarray      # (T, H, W[, C]) float32
    flows_fwd: np.ndarray   # (T-1, H, W, 2) float32, frame t -> t+1
    flows_bwd: np.ndarray   # (T-1, H, W, 2) float32, frame t+1 -> t
    rotations: np.ndarray   # (T, 3, 3) cumulative camera rotation per frame


def gen_sequence(pano: np.ndarray, step_rotation: np.ndarray, n_frames: int) -> SyntheticSequence:
    """Render a sequence by applying step_rotation once per frame.

    Frames are rendered from the cumulative rotation (one resampling each),
    and both flow directions are the analytic step flows, identical for all
    adjacent pairs.
    """
    if n_frames < 1:
        raise ValueError("n_frames must be >= 1")
    step = check_rotation(step_rotation)
    dims = FrameDims.of(pano)
    frames = [pano.astype(np.float32, copy=True)]
    rotations = [np.eye(3)]
    for _ in range(1, n_frames):
        rotations.append(step @ rotations[-1])
        frames.append(rotate_panorama(pano, rotations[-1]).astype(np.float32, copy=False))
    fwd = flow_from_rotation(step, dims)
    bwd = flow_from_rotation(step.T, dims)
    n_pairs = max(n_frames - 1, 0)
    return SyntheticSequence(
        frames=np.stack(frames),
        flows_fwd=np.broadcast_to(fwd, (n_pairs, *fwd.shape)).copy(),
        flows_bwd=np.broadcast_to(bwd, (n_pairs, *bwd.shape)).copy(),
        rotations=np.stack(rotations),
    )


def make_test_panorama(dims: FrameDims, seed: int = 0, channels: int = 3) -> np.ndarray:
    """Seam-continuous multi-frequency test pattern in [0, 1], float32.

    Longitude frequencies are integers so the pattern closes around the
    seam; per-channel frequencies and phases come from the seed.
    """
    rng = np.random.default_rng(seed)
    xs, ys = pixel_grid(dims)
    phi, theta = pix_to_sph(xs, ys, dims)
    out = np.empty((dims.height, dims.width, channels), dtype=np.float32)
    for c in range(channels):
        acc = np.zeros_like(phi)
        total = 0.0
        for _ in range(4):
            amp = rng.uniform(0.5, 1.0)
            m = int(rng.integers(1, 7))
            n = rng.uniform(0.5, 5.0)
            acc += amp * np.sin(m * phi + rng.uniform(0, 2 * np.pi)) * np.sin(n * theta + rng.uniform(0, 2 * np.pi))
            total += amp
        out[..., c] = (0.5 + 0.45 * acc / total).astype(np.float32)
    return out
