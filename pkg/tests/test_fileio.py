import numpy as np
import pytest

from erpkit.fileio import (
    FileFormatError,
    SequenceManifest,
    load_guidance_params,
    load_manifest,
    read_flow,
    read_frame,
    read_mask,
    read_pgm,
    save_guidance_params,
    save_manifest,
    validate_manifest,
    write_flow,
    write_frame,
    write_mask,
    write_pgm,
)
from erpkit.kernels import GuidanceParams


# ------------------------------------------------------------------- png


def test_frame_roundtrip_8bit_rgb(tmp_path):
    rng = np.random.default_rng(0)
    frame = rng.random((12, 20, 3)).astype(np.float32)
    p = tmp_path / "f.png"
    write_frame(p, frame)
    back = read_frame(p)
    assert back.dtype == np.float32
    assert back.shape == frame.shape
    # Quantization to 255 levels: worst case half a step.
    assert np.abs(back - frame).max() <= 0.5 / 255 + 1e-6


def test_frame_roundtrip_16bit_gray(tmp_path):
    rng = np.random.default_rng(1)
    frame = rng.random((10, 16)).astype(np.float32)
    p = tmp_path / "g.png"
    write_frame(p, frame, bit_depth=16)
    back = read_frame(p)
    assert back.shape == frame.shape
    assert np.abs(back - frame).max() <= 0.5 / 65535 + 1e-7


def test_frame_quantization_is_exact_on_grid(tmp_path):
    # Values already on the 8-bit grid survive the round trip exactly.
    vals = (np.arange(256, dtype=np.float32) / 255.0).reshape(16, 16)
    p = tmp_path / "q.png"
    write_frame(p, vals)
    assert np.array_equal(read_frame(p), vals)


def test_frame_16bit_rgb_rejected(tmp_path):
    with pytest.raises(ValueError):
        write_frame(tmp_path / "x.png", np.zeros((4, 4, 3)), bit_depth=16)
    with pytest.raises(ValueError):
        write_frame(tmp_path / "x.png", np.zeros((4, 4)), bit_depth=12)


def test_frame_clips_out_of_range(tmp_path):
    frame = np.array([[-0.5, 0.0], [1.0, 2.0]])
    p = tmp_path / "c.png"
    write_frame(p, frame)
    back = read_frame(p)
    assert back[0, 0] == 0.0
    assert back[1, 1] == 1.0


def test_read_frame_corrupt_png(tmp_path):
    p = tmp_path / "bad.png"
    p.write_bytes(b"\x89PNG\r\n\x1a\n then garbage")
    with pytest.raises(FileFormatError):
        read_frame(p)
    with pytest.raises(FileNotFoundError):
        read_frame(tmp_path / "missing.png")


def test_mask_roundtrip(tmp_path):
    rng = np.random.default_rng(2)
    mask = rng.random((14, 22)) < 0.3
    p = tmp_path / "m.png"
    write_mask(p, mask)
    assert np.array_equal(read_mask(p), mask)


# ------------------------------------------------------------------- flo


def test_flow_roundtrip_bit_identical(tmp_path):
    rng = np.random.default_rng(3)
    flow = (rng.standard_normal((18, 30, 2)) * 20).astype(np.float32)
    p = tmp_path / "f.flo"
    write_flow(p, flow)
    back = read_flow(p)
    assert back.dtype == np.float32
    assert np.array_equal(back.view(np.uint32), flow.view(np.uint32))


def test_flow_write_rejects_bad_shape(tmp_path):
    with pytest.raises(ValueError):
        write_flow(tmp_path / "x.flo", np.zeros((4, 4, 3), np.float32))


def test_flow_read_rejects_bad_magic(tmp_path):
    p = tmp_path / "bad.flo"
    p.write_bytes(np.array([1.0], dtype="<f4").tobytes() + b"\x00" * 8)
    with pytest.raises(FileFormatError):
        read_flow(p)


def test_flow_read_identifies_big_endian(tmp_path):
    flow = np.zeros((3, 4, 2), dtype=np.float32)
    p = tmp_path / "be.flo"
    with open(p, "wb") as f:
        f.write(np.array([202021.25], dtype=">f4").tobytes())
        f.write(np.array([4, 3], dtype=">i4").tobytes())
        f.write(flow.astype(">f4").tobytes())
    with pytest.raises(FileFormatError, match="big-endian"):
        read_flow(p)


def test_flow_read_rejects_truncation(tmp_path):
    flow = (np.ones((6, 8, 2)) * 3).astype(np.float32)
    p = tmp_path / "t.flo"
    write_flow(p, flow)
    data = p.read_bytes()
    p.write_bytes(data[: len(data) - 7])
    with pytest.raises(FileFormatError):
        read_flow(p)
    p.write_bytes(data[:8])
    with pytest.raises(FileFormatError):
        read_flow(p)


# ------------------------------------------------------------------- pgm


def test_pgm_roundtrip_16bit(tmp_path):
    rng = np.random.default_rng(4)
    vals = rng.random((9, 13))
    p = tmp_path / "v.pgm"
    write_pgm(p, vals)
    back, maxval = read_pgm(p)
    assert maxval == 65535
    assert np.abs(back - vals).max() <= 0.5 / 65535 + 1e-9


def test_pgm_roundtrip_8bit(tmp_path):
    vals = np.linspace(0, 1, 64).reshape(8, 8)
    p = tmp_path / "v8.pgm"
    write_pgm(p, vals, maxval=255)
    back, maxval = read_pgm(p)
    assert maxval == 255
    assert np.abs(back - vals).max() <= 0.5 / 255 + 1e-9


def test_pgm_16bit_samples_are_big_endian(tmp_path):
    p = tmp_path / "one.pgm"
    write_pgm(p, np.array([[1.0]]))
    raw = p.read_bytes()
    assert raw.endswith(b"\xff\xff") or raw.endswith(bytes([0xFF, 0xFF]))
    write_pgm(p, np.array([[0.5]]))
    sample = p.read_bytes()[-2:]
    assert int.from_bytes(sample, "big") == round(0.5 * 65535)


def test_pgm_rejects_bad_maxval_and_garbage(tmp_path):
    with pytest.raises(ValueError):
        write_pgm(tmp_path / "x.pgm", np.zeros((2, 2)), maxval=1023)
    p = tmp_path / "bad.pgm"
    p.write_bytes(b"P6\n2 2\n255\n" + b"\x00" * 12)
    with pytest.raises(FileFormatError):
        read_pgm(p)


# ------------------------------------------------------------ guidance


def test_guidance_params_roundtrip(tmp_path):
    p = tmp_path / "g.json"
    params = GuidanceParams(scale=1.25, bias=-0.5, activation="sigmoid")
    save_guidance_params(p, params)
    assert load_guidance_params(p) == params


def test_guidance_params_bad_file(tmp_path):
    p = tmp_path / "g.json"
    p.write_text("{\"scale\": 2.0}\n")
    with pytest.raises(FileFormatError):
        load_guidance_params(p)
    p.write_text("not json")
    with pytest.raises(FileFormatError):
        load_guidance_params(p)


# ------------------------------------------------------------ manifest


def make_sequence_on_disk(tmp_path, t=3, h=10, w=16):
    rng = np.random.default_rng(5)
    frame_paths, mask_paths, fwd_paths, bwd_paths = [], [], [], []
    for i in range(t):
        fp = f"frame_{i:03d}.png"
        write_frame(tmp_path / fp, rng.random((h, w, 3)))
        frame_paths.append(fp)
        mp = f"mask_{i:03d}.png"
        write_mask(tmp_path / mp, rng.random((h, w)) < 0.2)
        mask_paths.append(mp)
    for i in range(t - 1):
        ff = f"fwd_{i:03d}.flo"
        write_flow(tmp_path / ff, rng.standard_normal((h, w, 2)).astype(np.float32))
        fwd_paths.append(ff)
        fb = f"bwd_{i:03d}.flo"
        write_flow(tmp_path / fb, rng.standard_normal((h, w, 2)).astype(np.float32))
        bwd_paths.append(fb)
    return SequenceManifest(
        width=w,
        height=h,
        num_frames=t,
        frame_paths=frame_paths,
        mask_paths=mask_paths,
        flow_fwd_paths=fwd_paths,
        flow_bwd_paths=bwd_paths,
    )


def test_manifest_roundtrip_and_validate(tmp_path):
    man = make_sequence_on_disk(tmp_path)
    mp = tmp_path / "manifest.json"
    save_manifest(mp, man)
    back = load_manifest(mp)
    assert back == man
    validate_manifest(back, tmp_path)  # should not raise


def test_manifest_validate_missing_file(tmp_path):
    man = make_sequence_on_disk(tmp_path)
    (tmp_path / man.frame_paths[1]).unlink()
    with pytest.raises(FileFormatError):
        validate_manifest(man, tmp_path)


def test_manifest_validate_dims_mismatch(tmp_path):
    man = make_sequence_on_disk(tmp_path)
    write_frame(tmp_path / man.frame_paths[0], np.zeros((4, 6, 3)))
    with pytest.raises(FileFormatError):
        validate_manifest(man, tmp_path)


def test_manifest_validate_count_mismatch(tmp_path):
    man = make_sequence_on_disk(tmp_path)
    man.num_frames = 5
    with pytest.raises(FileFormatError):
        validate_manifest(man, tmp_path)


def test_manifest_bad_json(tmp_path):
    p = tmp_path / "man.json"
    p.write_text("{\"widht\": 3}")
    with pytest.raises(FileFormatError):
        load_manifest(p)
