from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from odcsa.autograd import Prng
from odcsa.data import (
    NetpbmError, Sample, SynthConfig, list_ids, load_dataset, multiscale_pick, read_image, read_mask, read_netpbm,
    resize_image, resize_sample, rot90_sample, save_dataset, snap32, synth_generate, write_pgm, write_ppm,
)
from odcsa.data.netpbm import quantize


def write_bytes(tmp_path, name, data):
    path = tmp_path / name
    path.write_bytes(data)
    return path


# netpbm

def test_p5_all_white_mask(tmp_path):
    path = write_bytes(tmp_path, "m.pgm", b"P5\n3 2\n255\n" + bytes([255] * 6))
    assert np.all(read_mask(path) == 1.0) and read_mask(path).shape == (1, 2, 3)


def test_p6_red_pixel(tmp_path):
    path = write_bytes(tmp_path, "r.ppm", b"P6 1 1 255\n" + bytes([255, 0, 0]))
    assert read_image(path)[:, 0, 0].tolist() == [1.0, 0.0, 0.0]


def test_ascii_variants_and_comments(tmp_path):
    p2 = write_bytes(tmp_path, "a.pgm", b"P2\n# comment line\n2 2\n# another\n4\n0 1\n2 4\n")
    assert np.allclose(read_netpbm(p2), [[0, 0.25], [0.5, 1.0]])
    p3 = write_bytes(tmp_path, "a.ppm", b"P3 1 2 255 10 20 30 40 50 60")
    assert np.allclose(read_netpbm(p3)[:, 1, 0] * 255, [40, 50, 60])


def test_mask_binarised_at_128(tmp_path):
    path = write_bytes(tmp_path, "m.pgm", b"P5 4 1 255\n" + bytes([0, 127, 128, 255]))
    assert read_mask(path).ravel().tolist() == [0.0, 0.0, 1.0, 1.0]


@pytest.mark.parametrize("data,where", [
    (b"P4\n1 1\n", "byte 0"),
    (b"P5\n2 2\n255\n\x00\x01", "byte 13"),
    (b"P5\n2 x\n255\n", "byte 5"),
    (b"P5\n1 1\n300\n\x00", "maxval"),
    (b"P2\n2 1\n255\n3", "truncated"),
])
def test_malformed_files_report_offsets(tmp_path, data, where):
    path = write_bytes(tmp_path, "bad.pgm", data)
    with pytest.raises(NetpbmError, match=where):
        read_netpbm(path)


def test_quantisation_examples(tmp_path):
    assert quantize(np.array([0.0, 1.0, 0.5])).tolist() == [0, 255, 128]
    with pytest.raises(ValueError):
        quantize(np.array([1.2]))
    path = tmp_path / "p.pgm"
    write_pgm(np.array([[0.0, 0.5, 1.0]]), path)
    assert path.read_bytes() == b"P5\n3 1\n255\n" + bytes([0, 128, 255])


@given(arrays(np.uint8, (3, 5)))
def test_pgm_roundtrip_identity_8bit(tmp_path_factory, data):
    path = tmp_path_factory.mktemp("rt") / "x.pgm"
    write_pgm(data / 255.0, path)
    assert np.array_equal(np.round(read_netpbm(path) * 255).astype(np.uint8), data)


@given(arrays(np.float64, (4, 4), elements=st.floats(0, 1)))
def test_pgm_roundtrip_error_bound(tmp_path_factory, values):
    path = tmp_path_factory.mktemp("rt") / "x.pgm"
    write_pgm(values, path)
    assert np.max(np.abs(read_netpbm(path) - values)) <= 1 / 510 + 1e-12


def test_ppm_roundtrip(tmp_path):
    img = np.random.default_rng(0).integers(0, 256, (3, 4, 5)) / 255.0
    write_ppm(img, tmp_path / "i.ppm")
    assert np.allclose(read_image(tmp_path / "i.ppm"), img, atol=1e-15)


# samples and resizing

def test_sample_validation():
    with pytest.raises(ValueError, match="binary"):
        Sample(np.zeros((3, 4, 4)), np.full((1, 4, 4), 0.5), "x")
    with pytest.raises(ValueError):
        Sample(np.zeros((3, 4, 4)), np.zeros((1, 4, 5)), "x")


def test_resize_sample_examples():
    s = Sample(np.full((3, 16, 16), 0.3), (np.arange(256).reshape(1, 16, 16) % 3 == 0).astype(float), "a")
    r = resize_sample(s, 40)
    assert np.allclose(r.image, 0.3) and set(np.unique(r.mask)) <= {0.0, 1.0}
    back = resize_image(resize_image(s.image, 48, 48), 16, 16)
    assert np.allclose(back, 0.3, atol=1e-15)


def test_snap_and_multiscale():
    assert [snap32(v) for v in (264, 352, 440, 48, 80, 96, 10)] == [256, 352, 448, 32, 64, 96, 32]
    assert {multiscale_pick(Prng(i), 352) for i in range(60)} == {256, 352, 448}
    assert {multiscale_pick(Prng(i), 64) for i in range(60)} == {32, 64}


def test_multiscale_frequencies():
    prng = Prng(11)
    counts = Counter(multiscale_pick(prng, 352) for _ in range(3000))
    for size in (256, 352, 448):
        assert abs(counts[size] / 3000 - 1 / 3) <= 0.03


# synthetic data

def test_synth_deterministic_and_valid():
    cfg = SynthConfig(count=6, size=64, seed=3)
    a, b = synth_generate(cfg), synth_generate(cfg)
    for sa, sb in zip(a.samples, b.samples):
        assert sa.image.tobytes() == sb.image.tobytes() and sa.mask.tobytes() == sb.mask.tobytes()
        assert sa.mask.any() and set(np.unique(sa.mask)) <= {0.0, 1.0}
        assert sa.image.min() >= 0 and sa.image.max() <= 1


def test_synth_rotated_pairs_exact():
    ds = synth_generate(SynthConfig(count=4, size=32, seed=1))
    for s, r in zip(ds.samples, ds.rotated):
        assert np.array_equal(r.mask, np.rot90(s.mask, k=-1, axes=(1, 2)))
        assert np.array_equal(rot90_sample(s).image, r.image)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_synth_area_span(seed):
    areas = [s.mask.mean() for s in synth_generate(SynthConfig(count=64, size=64, seed=seed))]
    assert min(areas) <= 0.005 and max(areas) >= 0.35


def test_synth_rejects_bad_size():
    with pytest.raises(ValueError):
        SynthConfig(size=50)


# dataset layout

def test_dataset_roundtrip(tmp_path):
    ds = synth_generate(SynthConfig(count=3, size=32, seed=2))
    save_dataset(ds.samples, tmp_path)
    assert sorted(p.name for p in (tmp_path / "images").iterdir()) == [f"synth_000{i}.ppm" for i in range(3)]
    loaded = load_dataset(tmp_path)
    assert [s.id for s in loaded] == list_ids(tmp_path)
    for a, b in zip(ds.samples, loaded):
        assert np.array_equal(a.mask, b.mask)
        assert np.max(np.abs(a.image - b.image)) <= 1 / 510 + 1e-12


def test_dataset_missing_mask(tmp_path):
    ds = synth_generate(SynthConfig(count=2, size=32))
    save_dataset(ds.samples, tmp_path)
    (tmp_path / "masks" / "synth_0001.pgm").unlink()
    with pytest.raises(FileNotFoundError, match="synth_0001"):
        load_dataset(tmp_path)
