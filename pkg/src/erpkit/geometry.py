"""Sphere geometry for equirectangular (ERP) frames.

Pixel centers sit at integer coordinates. Pixel (x, y) in a W x H frame maps
to longitude phi = 2*pi*(x + 0.5)/W - pi and polar angle
theta = pi*(y + 0.5)/H, so row 0 hugs the north pole and the equator sits at
y = H/2 - 0.5. Unit vectors follow the polar-angle convention
(sin(theta)cos(phi), sin(theta)sin(phi), cos(theta)).

Great-circle distances are evaluated in a haversine arrangement. That form is
exactly zero for coincident inputs and well conditioned for the sub-degree
distances that flow validation compares against a threshold; it agrees with
arccos of the unit-vector dot product up to rounding. Positions outside the
frame are legal distance inputs: longitude wraps around the seam, and rows
past a pole continue onto the opposite meridian, both falling out of the
spherical mapping itself rather than explicit bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FrameDims:
    """Width and height of an ERP frame, in pixels."""

    width: int
    height: int

    def __post_init__(self):
        if self.width < 2 or self.height < 1:
            raise ValueError(f"invalid frame dims {self.width}x{self.height}")

    @classmethod
    def of(cls, array: np.ndarray) -> "FrameDims":
        """Dims of an (H, W, ...) array."""
        return cls(width=int(array.shape[1]), height=int(array.shape[0]))


def pixel_grid(dims: FrameDims):
    """Return float64 (x, y) coordinate grids, each of shape (H, W)."""
    ys, xs = np.mgrid[0 : dims.height, 0 : dims.width]
    return xs.astype(np.float64), ys.astype(np.float64)


def _pix_to_sph_raw(x, y, dims: FrameDims):
    # Total mapping, no range checks. Used for distance evaluation where
    # out-of-frame positions are meaningful.
    phi = 2.0 * np.pi * (x + 0.5) / dims.width - np.pi
    theta = np.pi * (y + 0.5) / dims.height
    return phi, theta


def pix_to_sph(x, y, dims: FrameDims):
    """Map pixel coordinates to (phi, theta), raising outside the frame.

    phi lies in [-pi, pi) and theta in (0, pi) for in-range pixel centers.
    Accepts scalars or arrays.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if np.any(x < 0.0) or np.any(x >= dims.width) or np.any(y < 0.0) or np.any(y >= dims.height):
        raise ValueError("pixel coordinates outside the frame")
    return _pix_to_sph_raw(x, y, dims)


def sph_to_pix(phi, theta, dims: FrameDims):
    """Continuous inverse of pix_to_sph (no range checks)."""
    phi = np.asarray(phi, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    x = (phi + np.pi) * dims.width / (2.0 * np.pi) - 0.5
    y = theta * dims.height / np.pi - 0.5
    return x, y


def sph_to_unit_vec(phi, theta):
    """Unit vectors for spherical coordinates, stacked on the last axis."""
    phi = np.asarray(phi, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def unit_vec_to_sph(v):
    """Spherical coordinates of 3-vectors (last axis), phi in [-pi, pi]."""
    v = np.asarray(v, dtype=np.float64)
    phi = np.arctan2(v[..., 1], v[..., 0])
    theta = np.arccos(np.clip(v[..., 2], -1.0, 1.0))
    return phi, theta


def geodesic_distance(ax, ay, bx, by, dims: FrameDims):
    """Great-circle distance in radians between two pixel positions.

    Haversine form of the spherical law of cosines under the polar-angle
    convention above:

        sin^2(d/2) = sin^2(dtheta/2) + sin(ta) sin(tb) sin^2(dphi/2)

    Identical inputs give exactly 0. Either position may lie outside the
    frame; the argument is clamped to [0, 1] to guard rounding.
    """
    pa, ta = _pix_to_sph_raw(np.asarray(ax, dtype=np.float64), np.asarray(ay, dtype=np.float64), dims)
    pb, tb = _pix_to_sph_raw(np.asarray(bx, dtype=np.float64), np.asarray(by, dtype=np.float64), dims)
    h = np.sin(0.5 * (ta - tb)) ** 2 + np.sin(ta) * np.sin(tb) * np.sin(0.5 * (pa - pb)) ** 2
    return 2.0 * np.arcsin(np.sqrt(np.clip(h, 0.0, 1.0)))


def distortion_weight(j, n_rows: int):
    """Sphere-area weight of row j in an n_rows-tall ERP frame.

    w(j) = cos((j + 0.5 - N/2) * pi / N), which equals sin(theta_j): the
    relative area a row covers on the sphere. Largest at the equator,
    tapering toward 0 at the polar rows.
    """
    j = np.asarray(j, dtype=np.float64)
    return np.cos((j + 0.5 - n_rows / 2.0) * np.pi / n_rows)


def build_distortion_map(dims: FrameDims) -> np.ndarray:
    """Per-pixel (H, W) float64 weight map; every column is identical."""
    col = distortion_weight(np.arange(dims.height), dims.height)
    return np.repeat(col[:, None], dims.width, axis=1)
