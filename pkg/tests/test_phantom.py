import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ssrt_tomo.geometry import Image
from ssrt_tomo.phantom import (
    PGMFormatError,
    UnsupportedFormatError,
    disk_phantom,
    load_pgm,
    save_pgm,
    shepp_logan,
)


def test_shepp_logan_range_and_size():
    img = shepp_logan(512)
    assert img.shape == (512, 512)
    assert img.data.max() == 255.0 and img.data.min() == 0.0


def test_shepp_logan_background_is_zero():
    img = shepp_logan(64)
    assert img.data[0, 0] == img.data[0, -1] == img.data[-1, 0] == img.data[-1, -1] == 0.0


def test_shepp_logan_resolution_consistency():
    coarse = shepp_logan(64).data
    fine = shepp_logan(128).data.reshape(64, 2, 64, 2).mean(axis=(1, 3))
    assert np.mean(np.abs(coarse - fine)) < 2.0


def test_shepp_logan_deterministic():
    assert np.array_equal(shepp_logan(48).data, shepp_logan(48).data)


def test_shepp_logan_too_small():
    with pytest.raises(ValueError):
        shepp_logan(15)


def test_disk_values():
    d = disk_phantom(64, 0.5, 1.0)
    assert d.data[32, 32] == 1.0 and d.data[0, 0] == 0.0
    assert abs(d.data.sum() - math.pi * 16**2) / (math.pi * 16**2) < 0.01


def test_disk_mass_converges():
    errs = []
    for n in (32, 128):
        area = math.pi * (0.5 * n / 2) ** 2
        errs.append(abs(disk_phantom(n, 0.5, 2.0).data.sum() - 2.0 * area) / (2.0 * area))
    assert errs[1] <= errs[0] and errs[1] < 1e-3


@pytest.mark.parametrize("r", [0.0, -0.1, 1.01])
def test_disk_radius_checked(r):
    with pytest.raises(ValueError):
        disk_phantom(32, r)


def test_pgm_three_by_two(tmp_path):
    p = tmp_path / "a.pgm"
    p.write_bytes(b"P5\n# comment\n3 2\n255\n" + bytes([0, 1, 2, 3, 4, 255]))
    img = load_pgm(p)
    assert img.shape == (2, 3)
    assert img.data[1, 2] == 255.0 and img.data[0, 1] == 1.0


def test_pgm_save_load_byte_identical(tmp_path):
    p, q = tmp_path / "a.pgm", tmp_path / "b.pgm"
    p.write_bytes(b"P5\n4 1\n255\n" + bytes([9, 8, 7, 6]))
    save_pgm(load_pgm(p), q)
    assert p.read_bytes() == q.read_bytes()


def test_pgm_rejects_ascii(tmp_path):
    p = tmp_path / "a.pgm"
    p.write_bytes(b"P2\n1 1\n255\n0\n")
    with pytest.raises(UnsupportedFormatError):
        load_pgm(p)


def test_pgm_rejects_other_maxval(tmp_path):
    p = tmp_path / "a.pgm"
    p.write_bytes(b"P5\n1 1\n65535\n\x00\x00")
    with pytest.raises(UnsupportedFormatError):
        load_pgm(p)


@pytest.mark.parametrize(
    "payload", [b"", b"P", b"X5\n1 1\n255\n\x00", b"P5\n2 x\n255\n\x00\x00", b"P5\n2 2\n255\n\x00", b"P5\n1 1"]
)
def test_pgm_malformed(tmp_path, payload):
    p = tmp_path / "bad.pgm"
    p.write_bytes(payload)
    with pytest.raises(PGMFormatError):
        load_pgm(p)


@given(arrays(float, st.tuples(st.integers(1, 6), st.integers(1, 6)), elements=st.floats(-50, 300)))
def test_pgm_round_trip_is_clamped_rounding(tmp_path_factory, data):
    p = tmp_path_factory.mktemp("pgm") / "x.pgm"
    save_pgm(Image(data), p)
    assert np.array_equal(load_pgm(p).data, np.clip(np.rint(data), 0, 255))
