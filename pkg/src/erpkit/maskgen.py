"""Seeded generation of moving occlusion masks for ERP sequences.

Each region is a randomized star polygon that drifts rigidly with a constant
per-region velocity. Horizontal motion wraps around the seam; vertical motion
bounces inside a margin that keeps blobs clear of the polar rows. Region
starting rows are stratified over latitude bands so masks exercise different
distortion regimes. Everything is driven by one numpy Generator, so a seed
pins the output exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from PIL import Image, ImageDraw
from scipy import ndimage

from .geometry import FrameDims

_N_VERTICES = 12


@dataclass(frozen=True)
class MaskGenConfig:
    seed: int
    dims: FrameDims
    frames: int = 100
    n_regions: int = 3
    size_range: tuple = (16.0, 48.0)    # blob diameter, pixels
    speed_range: tuple = (0.5, 3.0)     # pixels per frame
    shape_irregularity: float = 0.4     # 0 = circle-ish, 1 = very ragged

    def __post_init__(self):
        if self.frames < 1:
            raise ValueError("frames must be >= 1")
        if self.n_regions < 1:
            raise ValueError("n_regions must be >= 1")
        lo, hi = self.size_range
        if not (0 < lo <= hi):
            raise ValueError("size_range must satisfy 0 < min <= max")
        if not (0.0 <= self.shape_irregularity <= 1.0):
            raise ValueError("shape_irregularity must lie in [0, 1]")
        lo_s, hi_s = self.speed_range
        if not (0 <= lo_s <= hi_s):
            raise ValueError("speed_range must satisfy 0 <= min <= max")
        if self.max_radius() * 2 >= min(self.dims.height - 2, self.dims.width):
            raise ValueError("region size does not fit in the frame")

    def max_radius(self) -> float:
        return 0.5 * self.size_range[1] * (1.0 + 0.5 * self.shape_irregularity)


@dataclass
class MaskSequence:
    masks: np.ndarray                 # (T, H, W) bool
    centers: np.ndarray               # (T, n_regions, 2) float64, (x, y)
    component_counts: list[int] = field(default_factory=list)
    merge_counts: list[int] = field(default_factory=list)


def _blob_polygon(rng: np.random.Generator, base_radius: float, irregularity: float) -> np.ndarray:
    # Star polygon around the origin: jittered angles, jittered radii.
    step = 2.0 * np.pi / _N_VERTICES
    angles = step * np.arange(_N_VERTICES) + rng.uniform(-0.5, 0.5, _N_VERTICES) * step * irregularity
    angles += rng.uniform(0.0, 2.0 * np.pi)
    radii = base_radius * (1.0 + irregularity * rng.uniform(-0.5, 0.5, _N_VERTICES))
    return np.stack([radii * np.cos(angles), radii * np.sin(angles)], axis=-1)


def _reflect(value: float, lo: float, hi: float) -> float:
    # Triangle-wave reflection of value into [lo, hi].
    span = hi - lo
    if span <= 0:
        return lo
    v = (value - lo) % (2.0 * span)
    return lo + (v if v <= span else 2.0 * span - v)


def _rasterize(polygons, w: int, h: int) -> np.ndarray:
    img = Image.new("L", (w, h), 0)
    draw = ImageDraw.Draw(img)
    for pts in polygons:
        # Draw thrice so blobs straddling the seam wrap instead of clipping.
        for shift in (-w, 0, w):
            draw.polygon([(float(px + shift), float(py)) for px, py in pts], fill=255)
    return np.asarray(img) > 0


def count_components_wrapped(mask: np.ndarray) -> int:
    """4-connected component count treating columns 0 and W-1 as adjacent."""
    labels, n = ndimage.label(mask)
    if n == 0:
        return 0
    parent = list(range(n + 1))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for left, right in zip(labels[:, 0], labels[:, -1]):
        if left and right:
            ra, rb = find(int(left)), find(int(right))
            if ra != rb:
                parent[ra] = rb
    return len({find(i) for i in range(1, n + 1)})


def gen_mask_sequence(cfg: MaskGenConfig) -> MaskSequence:
    """Generate a deterministic sequence of moving blob masks.

    Returns the (T, H, W) masks together with per-frame region centers and
    connected-component bookkeeping; fewer components than regions means
    blobs merged by overlap for that frame.
    """
    rng = np.random.default_rng(cfg.seed)
    w, h = cfg.dims.width, cfg.dims.height
    margin = cfg.max_radius() + 1.0
    y_lo, y_hi = margin, (h - 1) - margin
    band_edges = np.linspace(y_lo, y_hi, cfg.n_regions + 1)
    band_order = rng.permutation(cfg.n_regions)

    polygons, starts, velocities = [], [], []
    for i in range(cfg.n_regions):
        diameter = rng.uniform(*cfg.size_range)
        polygons.append(_blob_polygon(rng, diameter / 2.0, cfg.shape_irregularity))
        band = band_order[i]
        y0 = rng.uniform(band_edges[band], band_edges[band + 1])
        x0 = rng.uniform(0.0, w)
        starts.append((x0, y0))
        speed = rng.uniform(*cfg.speed_range)
        direction = rng.uniform(0.0, 2.0 * np.pi)
        velocities.append((speed * np.cos(direction), speed * np.sin(direction)))

    masks = np.zeros((cfg.frames, h, w), dtype=bool)
    centers = np.zeros((cfg.frames, cfg.n_regions, 2), dtype=np.float64)
    component_counts, merge_counts = [], []
    for t in range(cfg.frames):
        frame_polys = []
        for i in range(cfg.n_regions):
            cx = (starts[i][0] + velocities[i][0] * t) % w
            cy = _reflect(starts[i][1] + velocities[i][1] * t, y_lo, y_hi)
            centers[t, i] = (cx, cy)
            frame_polys.append(polygons[i] + np.array([cx, cy]))
        masks[t] = _rasterize(frame_polys, w, h)
        n_comp = count_components_wrapped(masks[t])
        component_counts.append(n_comp)
        merge_counts.append(max(cfg.n_regions - n_comp, 0))

    return MaskSequence(
        masks=masks,
        centers=centers,
        component_counts=component_counts,
        merge_counts=merge_counts,
    )
