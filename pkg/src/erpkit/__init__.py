"""Geometry-aware toolkit for equirectangular 360 video sequences."""

from .geometry import (
    FrameDims,
    build_distortion_map,
    distortion_weight,
    geodesic_distance,
    pix_to_sph,
    pixel_grid,
    sph_to_pix,
    sph_to_unit_vec,
    unit_vec_to_sph,
)
from .flow import (
    DEFAULT_EPS_DEG,
    ValidityMap,
    flow_validity_map,
    lookup_flow_bilinear,
    roundtrip_positions,
    sample_bilinear,
    warp_bilinear,
)
from .propagation import (
    PropagationResult,
    mask_target_check,
    propagate_sequence,
    propagate_step,
    propagation_mask,
)
from .kernels import (
    GuidanceParams,
    adaptive_dilated_conv,
    circular_pad,
    deformable_sample,
    dilated_conv2d,
    distortion_guidance,
)
from .metrics import (
    MetricReport,
    masked_region_metrics,
    psnr,
    sequence_metrics,
    ssim,
    ws_psnr,
    ws_ssim,
)
from .maskgen import MaskGenConfig, MaskSequence, gen_mask_sequence
from .synthetic import (
    SyntheticSequence,
    check_rotation,
    flow_from_rotation,
    gen_sequence,
    make_test_panorama,
    pitch_matrix,
    roll_matrix,
    rotate_panorama,
    rotation_from_angles,
    yaw_matrix,
)

__version__ = "0.1.0"
