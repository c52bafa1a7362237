import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vesselkit.imgcore import psnr
from vesselkit.synthgen import (
    PRESETS,
    Blob,
    Cross,
    NoiseSpec,
    SceneSpec,
    UnreachablePSNR,
    Vessel,
    apply_noise,
    noise_for_target_psnr,
    preset,
    render,
    uneven_illumination,
)


def test_blob_diameter_9_pixel_count():
    # enumeration oracle: integer points within radius 4.5
    expected = sum(1 for dx, dy in itertools.product(range(-5, 6), repeat=2) if dx * dx + dy * dy <= 4.5**2)
    assert expected == 69
    _, mask = render(SceneSpec((21, 21), (Blob((10.0, 10.0), 9.0),), smoothing=0))
    assert mask.sum() == expected


@pytest.mark.parametrize("length", [1, 5, 17])
def test_width_one_vessel_covers_length_pixels(length):
    scene = SceneSpec((30, 9), (Vessel((3.0, 4.0), (3.0 + length - 1, 4.0), 1.0),), smoothing=0)
    _, mask = render(scene)
    assert mask.sum() == length
    assert mask[4].sum() == length


def test_cross_mask_rotation_symmetric():
    _, mask = render(SceneSpec((41, 41), (Cross((20.0, 20.0), 15.0, 3.0),)))
    assert np.array_equal(np.rot90(mask), mask)


def test_render_hard_edges_match_mask():
    scene = preset("network")
    img, mask = render(SceneSpec(scene.canvas, scene.primitives, smoothing=0))
    assert np.array_equal(img > 0, mask)


def test_render_deterministic_and_bounded():
    for name in PRESETS:
        a, ma = render(preset(name))
        b, mb = render(preset(name))
        assert np.array_equal(a, b) and np.array_equal(ma, mb)
        assert a.min() >= 0 and a.max() <= 1


def test_vessel_preset_width():
    _, mask = render(preset("vessel"))
    assert mask[:, 32].sum() == 5
    assert np.array_equal(np.nonzero(mask[:, 32])[0], np.arange(30, 35))


@pytest.mark.parametrize(
    "scene",
    [
        SceneSpec((10, 10), ()),
        SceneSpec((10, 10), (Vessel((0.0, 0.0), (20.0, 0.0)),)),
        SceneSpec((10, 10), (Vessel((0.0, 0.0), (5.0, 0.0), 0.5),)),
        SceneSpec((10, 10), (Blob((5.0, 5.0), 3.0, 1.5),)),
    ],
)
def test_render_rejects_invalid_scenes(scene):
    with pytest.raises(ValueError):
        render(scene)


def test_scene_roundtrip():
    scene = preset("network")
    assert SceneSpec.from_dict(scene.to_dict()) == scene


def test_scene_from_malformed_dict():
    with pytest.raises(ValueError, match="malformed"):
        SceneSpec.from_dict({"canvas": [10, 10], "primitives": [{"kind": "tube"}]})


def test_unknown_preset():
    with pytest.raises(ValueError):
        preset("spiral")


# -- noise -----------------------------------------------------------------


@pytest.mark.parametrize("kind", ["gaussian", "speckle", "saltpepper"])
def test_zero_level_is_identity(kind, rng):
    img = rng.random((12, 12))
    assert np.array_equal(apply_noise(img, NoiseSpec(kind, 0.0, 4)), img)


@pytest.mark.parametrize("kind", ["gaussian", "speckle", "saltpepper"])
def test_same_seed_same_noise(kind, rng):
    img = rng.random((20, 20))
    a = apply_noise(img, NoiseSpec(kind, 0.2, 11))
    b = apply_noise(img, NoiseSpec(kind, 0.2, 11))
    c = apply_noise(img, NoiseSpec(kind, 0.2, 12))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert a.min() >= 0 and a.max() <= 1


def test_gaussian_sample_sigma():
    img = np.full((256, 256), 0.5)
    out = apply_noise(img, NoiseSpec("gaussian", 0.1, 0))
    # at mid-gray, 0.1 sigma clamps almost nothing
    assert abs((out - img).std() - 0.1) < 0.01


def test_saltpepper_density():
    img = np.full((200, 200), 0.5)
    out = apply_noise(img, NoiseSpec("saltpepper", 0.1, 5))
    hit = out != 0.5
    assert abs(hit.mean() - 0.1) < 0.01
    assert set(np.unique(out[hit])) <= {0.0, 1.0}
    assert abs((out[hit] == 1).mean() - 0.5) < 0.05


def test_noise_spec_validation():
    with pytest.raises(ValueError):
        NoiseSpec("poisson", 0.1)
    with pytest.raises(ValueError):
        NoiseSpec("gaussian", -0.1)
    with pytest.raises(ValueError):
        NoiseSpec("saltpepper", 1.5)


@pytest.mark.parametrize("kind,target", [("gaussian", 20.0), ("speckle", 25.0), ("saltpepper", 20.0)])
def test_target_psnr_reached(kind, target):
    img, _ = render(preset("vessel"))
    noisy, achieved, _ = noise_for_target_psnr(img, kind, target, seed=3)
    assert abs(achieved - target) <= 0.1
    assert psnr(img, noisy) == achieved


@given(st.floats(12, 35), st.integers(0, 50))
@settings(max_examples=15, deadline=None)
def test_target_psnr_within_tolerance(target, seed):
    img, _ = render(preset("cross", 48))
    noisy, achieved, _ = noise_for_target_psnr(img, "gaussian", target, seed)
    assert abs(achieved - target) <= 0.1
    assert noisy.min() >= 0 and noisy.max() <= 1


def test_target_psnr_reproducible():
    img, _ = render(preset("vessel"))
    a = noise_for_target_psnr(img, "gaussian", 15.0, seed=9)
    b = noise_for_target_psnr(img, "gaussian", 15.0, seed=9)
    assert np.array_equal(a[0], b[0]) and a[1] == b[1]


def test_unreachable_target_names_bound():
    img, _ = render(preset("vessel"))
    with pytest.raises(UnreachablePSNR, match="dB"):
        noise_for_target_psnr(img, "saltpepper", 200.0)
    with pytest.raises(UnreachablePSNR, match="lowest reachable"):
        noise_for_target_psnr(img, "saltpepper", 0.5)


# -- illumination ----------------------------------------------------------


def test_illumination_zero_strength_identity(rng):
    img = rng.random((9, 9))
    assert np.array_equal(uneven_illumination(img, 30, 0.0), img)


def test_illumination_ramp_endpoints():
    img = np.ones((8, 11))
    out = uneven_illumination(img, 0.0, 0.5)
    np.testing.assert_allclose(out[:, 0], 0.5)
    np.testing.assert_allclose(out[:, -1], 1.0)
    assert np.all(np.diff(out, axis=1) > 0)


def test_illumination_direction_90_runs_bottom_to_top():
    out = uneven_illumination(np.ones((8, 8)), 90.0, 0.4)
    np.testing.assert_allclose(out[-1], 0.6)
    np.testing.assert_allclose(out[0], 1.0)


def test_illumination_leaves_mask_alone():
    scene = preset("cross")
    img, mask = render(scene)
    out = uneven_illumination(img, 45, 0.6)
    assert out.min() >= 0 and out.max() <= 1
    assert np.array_equal(render(scene)[1], mask)


@pytest.mark.parametrize("s", [-0.1, 1.0, 1.2])
def test_illumination_strength_range(s):
    with pytest.raises(ValueError):
        uneven_illumination(np.ones((3, 3)), 0, s)
