import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from skimage.metrics import structural_similarity

from ssrt_tomo.geometry import Image
from ssrt_tomo.metrics import QualityReport, format_metric, mse, profile_mae, psnr, psnr_from_mse, ssim
from ssrt_tomo.phantom import shepp_logan

pixels = arrays(float, (16, 16), elements=st.floats(0, 255))


@pytest.fixture(scope="module")
def ref():
    return shepp_logan(64)


def test_psnr_examples(ref):
    assert psnr(ref, ref) == math.inf
    assert psnr(ref, Image(ref.data + 1.0)) == pytest.approx(10 * math.log10(65025))
    assert psnr(ref, Image(ref.data + 1.0)) == pytest.approx(48.13, abs=0.01)
    base = Image(np.full((8, 8), 127.5))
    checker = Image(127.5 + 255.0 * np.where(np.indices((8, 8)).sum(0) % 2, 1, -1))
    assert psnr(base, checker) == pytest.approx(0.0, abs=1e-12)


def test_shape_mismatch(ref):
    with pytest.raises(ValueError):
        psnr(ref, Image(np.zeros((8, 8))))
    with pytest.raises(ValueError):
        ssim(ref, Image(np.zeros((8, 8))))


@given(pixels, pixels)
def test_psnr_symmetric(a, b):
    assert psnr(Image(a), Image(b)) == psnr(Image(b), Image(a))


@given(st.floats(1e-6, 1e6), st.floats(1e-6, 1e6))
def test_psnr_decreasing_in_mse(m1, m2):
    if m1 < m2:
        assert psnr_from_mse(m1) > psnr_from_mse(m2)


def test_ssim_examples(ref):
    assert ssim(ref, ref) == 1.0
    inverted = ssim(ref, Image(255.0 - ref.data))
    noisy = ssim(ref, Image(ref.data + np.random.default_rng(0).normal(0, 5, ref.shape)))
    assert inverted < 0.2
    assert inverted < noisy < 1.0


def test_ssim_matches_reference_implementation(ref):
    test = Image(ref.data + np.random.default_rng(4).normal(0, 12, ref.shape))
    expected = structural_similarity(
        ref.data, test.data, gaussian_weights=True, sigma=1.5, use_sample_covariance=False, data_range=255
    )
    assert ssim(ref, test) == pytest.approx(expected, abs=1e-10)


@given(pixels, pixels)
def test_ssim_symmetric_and_bounded(a, b):
    s = ssim(Image(a), Image(b))
    assert s == pytest.approx(ssim(Image(b), Image(a)), abs=1e-12)
    assert -1.0 - 1e-9 <= s <= 1.0 + 1e-9


def test_ssim_too_small():
    with pytest.raises(ValueError):
        ssim(Image(np.zeros((8, 8))), Image(np.ones((8, 8))))


def test_profile_mae(ref):
    assert profile_mae(ref, ref, 30, (5, 50)) == 0.0
    assert profile_mae(ref, Image(ref.data + 3.5), 30, (5, 50)) == pytest.approx(3.5)
    for bad in ((64, (0, 5)), (3, (10, 5)), (3, (0, 64)), (-1, (0, 5))):
        with pytest.raises(ValueError):
            profile_mae(ref, ref, *bad)


@given(pixels, pixels, st.integers(-4, 4))
def test_profile_mae_shift_equivariant(a, b, shift):
    sa, sb = np.roll(a, shift, axis=1), np.roll(b, shift, axis=1)
    lo, hi = 5, 10
    assert profile_mae(Image(sa), Image(sb), 3, (lo + shift, hi + shift)) == pytest.approx(
        profile_mae(Image(a), Image(b), 3, (lo, hi))
    )


def test_report(ref):
    rep = QualityReport.compare(ref, Image(ref.data + 1.0), runtime_seconds=0.5)
    assert rep.mse == pytest.approx(1.0) and rep.psnr == pytest.approx(psnr_from_mse(rep.mse))
    assert rep.as_dict()["runtime_seconds"] == "0.500000"
    assert QualityReport.compare(ref, ref).as_dict()["psnr"] == "inf"
    assert format_metric(-math.inf) == "-inf"
    assert mse(ref, ref) == 0.0
