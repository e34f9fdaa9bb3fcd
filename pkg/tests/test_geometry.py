import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ssrt_tomo.geometry import (
    Image,
    Provenance,
    Sinogram,
    SinogramGeometry,
    load_sinogram_csv,
    make_geometry,
    normalize_image,
    read_keyvalue,
    save_sinogram_csv,
    write_keyvalue,
)

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


def test_image_rejects_bad_data():
    with pytest.raises(ValueError):
        Image(np.zeros(4))
    with pytest.raises(ValueError):
        Image(np.array([[0.0, np.nan]]))


def test_image_is_read_only_copy():
    src = np.zeros((3, 3))
    img = Image(src)
    src[0, 0] = 5
    assert img.data[0, 0] == 0
    with pytest.raises(ValueError):
        img.data[0, 0] = 1


def test_coordinates_are_centered_with_y_up():
    x, y = Image(np.zeros((3, 5))).coordinates()
    assert x[0, 0] == -2 and x[0, -1] == 2
    assert y[0, 0] == 1 and y[-1, 0] == -1


def test_geometry_validation():
    with pytest.raises(ValueError):
        SinogramGeometry(10, 1.0, [0.0])
    with pytest.raises(ValueError):
        SinogramGeometry(11, 0.0, [0.0])
    with pytest.raises(ValueError):
        SinogramGeometry(11, 1.0, [0.5, 0.5])
    with pytest.raises(ValueError):
        SinogramGeometry(11, 1.0, [2 * math.pi])
    with pytest.raises(ValueError):
        SinogramGeometry(11, 1.0, [])


def test_rho_grid_is_symmetric():
    g = SinogramGeometry(7, 0.5, [0.0, 1.0])
    assert np.array_equal(g.rho_grid, -g.rho_grid[::-1])
    assert g.rho_grid[3] == 0.0 and g.rho_max == 1.5


@pytest.mark.parametrize("n", [16, 64, 100, 256])
def test_make_geometry_covers_diagonal(n):
    g = make_geometry(n, 1.0)
    assert g.n_detectors % 2 == 1
    assert g.covers(Image(np.zeros((n, n))))
    assert g.n_angles == 180
    assert math.isclose(g.delta_theta_deg, 1.0)


def test_make_geometry_angle_counts():
    assert make_geometry(32, 0.5).n_angles == 360
    assert make_geometry(32, 30.0).n_angles == 6
    assert make_geometry(32, 5.0, span=360.0).n_angles == 72
    assert make_geometry(32, 7.0).n_angles == 26


@pytest.mark.parametrize("bad", [0.0, -1.0, 91.0])
def test_make_geometry_rejects_bad_step(bad):
    with pytest.raises(ValueError):
        make_geometry(32, bad)


def test_single_view_delta_theta():
    assert SinogramGeometry(5, 1.0, [0.3]).delta_theta == math.pi


@given(arrays(float, (6, 5), elements=finite), st.floats(-10, 10), st.floats(11, 300))
def test_normalize_hits_bounds(data, lo, hi):
    out = normalize_image(Image(data), lo, hi).data
    assert out.min() >= lo - 1e-9 and out.max() <= hi + 1e-9
    if np.ptp(data) > 0:
        assert out.min() == lo and out.max() == hi


def test_normalize_constant_maps_to_low():
    out = normalize_image(Image(np.full((3, 3), 7.0)), 0.0, 255.0)
    assert np.all(out.data == 0.0)


def test_provenance_rules():
    assert Provenance().is_rt
    assert Provenance("noisy", 0.0).is_rt
    assert not Provenance("ssrt", 1.0).is_rt
    assert Provenance("ssrt", 1.5).label() == "SSRT(1.5)"
    assert Provenance("noisy", 2.0).label() == "noisy(SSRT(2))"
    with pytest.raises(ValueError):
        Provenance("fbp")
    with pytest.raises(ValueError):
        Provenance("ssrt", -1.0)


def test_sinogram_shape_checked():
    g = make_geometry(16, 45.0)
    with pytest.raises(ValueError):
        Sinogram(g, np.zeros((g.n_detectors, g.n_angles + 1)))


def test_sinogram_csv_round_trip(tmp_path):
    g = make_geometry(16, 30.0)
    rng = np.random.default_rng(3)
    noise = {"i0": 5e4, "sigma_n": 0.5, "seed": 4.0, "scale": 1.0 / 3.0, "mu_max": 6.0}
    sino = Sinogram(g, rng.normal(size=(g.n_detectors, g.n_angles)), Provenance("noisy", 2.0, noise))
    path = tmp_path / "s.csv"
    save_sinogram_csv(sino, path)
    back = load_sinogram_csv(path)
    assert np.array_equal(back.values, sino.values)
    assert np.array_equal(back.geometry.angles, g.angles)
    assert back.provenance == sino.provenance
    assert back.provenance.noise == noise
    assert path.read_text().splitlines()[0] == "rho,theta_deg,value"


def test_keyvalue_parsing(tmp_path):
    path = tmp_path / "a.cfg"
    path.write_text("# header\n\nsize = 64  # trailing\nphantom=disk\n")
    assert read_keyvalue(path) == {"size": "64", "phantom": "disk"}
    write_keyvalue(path, {"a": 1, "b": "x"})
    assert read_keyvalue(path) == {"a": "1", "b": "x"}
    path.write_text("novalue\n")
    with pytest.raises(ValueError):
        read_keyvalue(path)
