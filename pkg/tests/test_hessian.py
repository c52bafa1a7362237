import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.ndimage import gaussian_filter

from vesselkit.hessian import (
    EigenField,
    HessianField,
    HessianParams,
    eigenvalues_2x2,
    frangi_vesselness,
    gaussian_kernels,
    hessian_field,
    jerman_vesselness,
    neuriteness,
)
from vesselkit.hessian import _jerman_scale, _neuriteness_scale

MEASURES = [frangi_vesselness, neuriteness, jerman_vesselness]


def ridge(width=2.0, shape=(41, 41), angle=0.0):
    h, w = shape
    yy, xx = np.mgrid[:h, :w].astype(float)
    rad = np.radians(angle)
    dist = (yy - h // 2) * np.cos(rad) - (xx - w // 2) * np.sin(rad)
    return np.exp(-0.5 * (dist / width) ** 2)


@pytest.mark.parametrize("sigma", [0.5, 1.0, 2.5, 6.0])
def test_kernel_moments(sigma):
    g, g1, g2 = gaussian_kernels(sigma)
    x = np.arange(len(g)) - len(g) // 2
    assert len(g) == 2 * int(np.ceil(4 * sigma)) + 1
    assert abs(g.sum() - 1) < 1e-12
    assert abs(g2.sum()) < 1e-10
    assert abs(np.dot(g1, x) - 1) < 1e-12
    assert abs(np.dot(g2, x**2) - 2) < 1e-12


def test_constant_image_has_zero_field():
    f = hessian_field(np.full((15, 15), 0.7), 2.0)
    for comp in f[:3]:
        assert np.max(np.abs(comp)) < 1e-12


def test_quadratic_field_interior():
    yy, xx = np.mgrid[:41, :41].astype(float)
    img = 0.5 * (xx - 20) ** 2
    f = hessian_field(img, 1.5, gamma=0)
    inner = (slice(10, 31), slice(10, 31))
    assert np.max(np.abs(f.h11[inner] - 1)) < 1e-3
    assert np.max(np.abs(f.h12[inner])) < 1e-3
    assert np.max(np.abs(f.h22[inner])) < 1e-3


def test_mixed_derivative_sign():
    yy, xx = np.mgrid[:41, :41].astype(float)
    # x along columns, y along rows
    f = hessian_field((xx - 20) * (yy - 20), 1.0, gamma=0)
    assert abs(f.h12[20, 20] - 1) < 1e-9


@pytest.mark.parametrize("sigma", [2.0, 3.0])
def test_matches_finite_differences_of_smoothed_image(sigma):
    yy, xx = np.mgrid[:64, :64].astype(float)
    img = np.sin(0.21 * xx) * np.cos(0.17 * yy) + 0.3 * np.sin(0.11 * (xx + yy))
    f = hessian_field(img, sigma, gamma=0)
    s = gaussian_filter(img, sigma, mode="nearest", truncate=4.0)
    fxx = s[:, 2:] - 2 * s[:, 1:-1] + s[:, :-2]
    fyy = s[2:] - 2 * s[1:-1] + s[:-2]
    fxy = 0.25 * (s[2:, 2:] - s[2:, :-2] - s[:-2, 2:] + s[:-2, :-2])
    inner = slice(16, 48)
    assert np.max(np.abs(f.h11[inner, inner] - fxx[inner, 15:47])) < 1e-2
    assert np.max(np.abs(f.h22[inner, inner] - fyy[15:47, inner])) < 1e-2
    assert np.max(np.abs(f.h12[inner, inner] - fxy[15:47, 15:47])) < 1e-2


def test_gamma_scaling():
    img = ridge()
    a = hessian_field(img, 2.0, gamma=0)
    b = hessian_field(img, 2.0, gamma=2)
    np.testing.assert_allclose(b.h11, 4 * a.h11, rtol=1e-12, atol=1e-15)


def test_eigen_diagonal():
    ev = eigenvalues_2x2((np.array([2.0]), np.array([0.0]), np.array([1.0])))
    assert ev.l1[0] == 1 and ev.l2[0] == 2


def test_eigen_off_diagonal_tie():
    ev = eigenvalues_2x2((np.array([0.0]), np.array([1.0]), np.array([0.0])))
    assert {ev.l1[0], ev.l2[0]} == {-1.0, 1.0}


@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10))
@settings(max_examples=200)
def test_eigen_matches_polynomial_roots(a, b, c):
    ev = eigenvalues_2x2((np.array([a]), np.array([b]), np.array([c])))
    roots = np.sort(np.roots([1, -(a + c), a * c - b * b]).real)
    got = np.sort([ev.l1[0], ev.l2[0]])
    np.testing.assert_allclose(got, roots, atol=1e-12 * max(1, abs(a) + abs(b) + abs(c)) * 10)
    assert abs(ev.l1[0]) <= abs(ev.l2[0])


def test_eigen_trace_and_determinant(rng):
    h11, h12, h22 = rng.normal(size=(3, 50, 50))
    ev = eigenvalues_2x2(HessianField(h11, h12, h22, 1.0))
    assert np.max(np.abs(ev.l1 + ev.l2 - (h11 + h22))) < 1e-10
    assert np.max(np.abs(ev.l1 * ev.l2 - (h11 * h22 - h12**2))) < 1e-10
    assert np.all(np.abs(ev.l1) <= np.abs(ev.l2))


@pytest.mark.parametrize("measure", MEASURES)
def test_constant_image_gives_zero(measure):
    assert np.array_equal(measure(np.full((20, 20), 0.4)), np.zeros((20, 20)))


@pytest.mark.parametrize("measure", MEASURES)
def test_range_and_rotation(measure, rng):
    img = gaussian_filter(rng.random((32, 28)), 1.0)
    p = HessianParams(scales=(1, 2))
    out = measure(img, p)
    assert out.min() >= 0 and out.max() <= 1
    np.testing.assert_allclose(measure(np.rot90(img), p), np.rot90(out), atol=1e-10)


def test_frangi_ridge_crest_vs_background():
    img = ridge(2.0) + 0.02 * np.random.default_rng(3).random((41, 41))
    v = frangi_vesselness(img, HessianParams(scales=(1, 2, 3)))
    assert v[20, 5:36].min() > 10 * max(v[2, :].mean(), 1e-6)


def test_frangi_wrong_polarity_is_zero():
    # a dark ridge has positive lambda2 at its crest
    v = frangi_vesselness(1 - ridge(2.0), HessianParams(scales=(2,)))
    assert v[20, 20] == 0.0
    w = frangi_vesselness(1 - ridge(2.0), HessianParams(scales=(2,), polarity="dark"))
    assert w[20, 20] > 0.9


def test_frangi_support_invariant_to_scaling(rng):
    img = gaussian_filter(rng.random((30, 30)), 1.5)
    p = HessianParams(scales=(1, 2, 3))
    base = frangi_vesselness(img, p) > 0
    for a in (0.01, 3.0, 250.0):
        assert np.array_equal(frangi_vesselness(a * img, p) > 0, base)


def test_neuriteness_peak_is_one_and_positive_lmax_is_zero():
    img = ridge(2.0)
    n = neuriteness(img, HessianParams(scales=(2,)))
    assert n.max() == 1.0
    l1 = np.array([0.0, 1.0, -1.0])
    l2 = np.array([-3.0, 2.0, -4.0])
    out = _neuriteness_scale(l1, l2, -1 / 3)
    assert out[1] == 0.0
    assert out.max() == 1.0


def test_neuriteness_all_background():
    out = _neuriteness_scale(np.zeros(4), np.ones(4), -1 / 3)
    assert np.array_equal(out, np.zeros(4))


def test_jerman_uniform_ridge_interior_is_one():
    v = jerman_vesselness(ridge(2.0), HessianParams(scales=(2,)))
    assert v[20, 20] == 1.0


def test_jerman_cases():
    # after the sign flip these are lambda2 = 4, 1, 0.9, -1 with max 4, tau 0.5
    l2 = -np.array([4.0, 1.0, 0.9, -1.0])
    out = _jerman_scale(l2, 0.5)
    assert out[0] == 1.0
    assert out[1] == 1.0  # 1 >= lrho / 2 with lrho = 2
    a, b = 0.9, 2.0
    assert out[2] == pytest.approx(a**2 * (b - a) * (3 / (a + b)) ** 3, rel=1e-14)
    assert out[3] == 0.0


def test_jerman_continuity_at_half():
    b = 2.0
    a = b / 2
    assert a**2 * (b - a) * (3 / (a + b)) ** 3 == pytest.approx(1.0, abs=1e-15)


def test_params_validation():
    with pytest.raises(ValueError):
        HessianParams(scales=())
    with pytest.raises(ValueError):
        HessianParams(tau=0)
    with pytest.raises(ValueError):
        HessianParams(polarity="grey")


def test_named_fields():
    ev = eigenvalues_2x2(HessianField(np.ones(1), np.zeros(1), np.ones(1), 1.0))
    assert isinstance(ev, EigenField)
