"""Hessian-based comparators: Frangi vesselness, neuriteness and Jerman's
regularized volume ratio.

All measures assume bright vessels on a dark background.  For such
structures the across-vessel second derivative is negative, so the
dominant eigenvalue ``lambda2`` is negative on vessels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.ndimage import correlate1d

from .imgcore import as_raster, normalize_minmax


class HessianField(NamedTuple):
    h11: np.ndarray  # d2/dx2 (along columns)
    h12: np.ndarray
    h22: np.ndarray  # d2/dy2 (along rows)
    sigma: float


class EigenField(NamedTuple):
    l1: np.ndarray  # smaller magnitude
    l2: np.ndarray  # larger magnitude


@dataclass(frozen=True)
class HessianParams:
    scales: Sequence[float] = (1, 2, 3, 4, 5, 6, 7, 8)
    gamma: float = 2.0
    beta: float = 0.5
    alpha: float = -1.0 / 3.0
    tau: float = 0.5
    polarity: str = "bright"

    def __post_init__(self):
        object.__setattr__(self, "scales", tuple(float(s) for s in self.scales))
        if not self.scales or any(s <= 0 for s in self.scales):
            raise ValueError("scales must be non-empty and positive")
        if not 0 < self.tau <= 1:
            raise ValueError("tau must lie in (0, 1]")
        if self.polarity not in ("bright", "dark"):
            raise ValueError("polarity must be 'bright' or 'dark'")


def gaussian_kernels(sigma: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sampled Gaussian and its first and second derivatives on ``[-ceil(4s), ceil(4s)]``.

    Kernels are laid out for correlation (``scipy.ndimage.correlate1d``) and
    corrected so their discrete moments match the continuous ones: ``g`` sums
    to 1, ``g1`` has first moment 1, ``g2`` has zero sum and second moment 2.
    Polynomials up to degree two are therefore differentiated exactly.
    """
    r = int(math.ceil(4 * sigma))
    x = np.arange(-r, r + 1, dtype=np.float64)
    g = np.exp(-0.5 * (x / sigma) ** 2)
    g /= g.sum()
    g1 = x / sigma**2 * g
    g1 /= np.dot(g1, x)
    g2 = (x**2 / sigma**4 - 1.0 / sigma**2) * g
    g2 -= g2.mean()
    g2 /= 0.5 * np.dot(g2, x**2)
    return g, g1, g2


def hessian_field(img, sigma: float, gamma: float = 2.0) -> HessianField:
    """Scale-normalized Hessian ``sigma**gamma * d2(G_sigma * img)``.

    Separable correlation, replicate borders.  ``x`` runs along columns
    and ``y`` along rows.
    """
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    img = as_raster(img)
    g, g1, g2 = gaussian_kernels(sigma)
    mode = "nearest"
    gx = correlate1d(img, g, axis=0, mode=mode)  # smoothed along rows, feeds x derivatives
    gy = correlate1d(img, g, axis=1, mode=mode)
    hxx = correlate1d(gx, g2, axis=1, mode=mode)
    hyy = correlate1d(gy, g2, axis=0, mode=mode)
    hxy = correlate1d(correlate1d(img, g1, axis=1, mode=mode), g1, axis=0, mode=mode)
    # round-off from flat regions would otherwise be normalized up to 1
    floor = 1e-12 * float(np.max(np.abs(img)))
    for h in (hxx, hxy, hyy):
        h[np.abs(h) < floor] = 0.0
    scale = sigma**gamma
    return HessianField(scale * hxx, scale * hxy, scale * hyy, float(sigma))


def eigenvalues_2x2(field) -> EigenField:
    """Closed-form eigenvalues of the symmetric 2x2 field, ordered ``|l1| <= |l2|``."""
    h11, h12, h22 = (np.asarray(a, dtype=np.float64) for a in field[:3])
    half_tr = 0.5 * (h11 + h22)
    root = 0.5 * np.sqrt((h11 - h22) ** 2 + 4.0 * h12**2)
    a = half_tr + root
    b = half_tr - root
    swap = np.abs(a) > np.abs(b)
    return EigenField(np.where(swap, b, a), np.where(swap, a, b))


def _polarized(img, polarity):
    img = as_raster(img)
    return img if polarity == "bright" else 1.0 - img


def _frangi_scale(l1, l2, beta):
    s2 = l1**2 + l2**2
    c = 0.5 * math.sqrt(float(s2.max()))
    out = np.zeros_like(l1)
    ok = l2 < 0
    if c == 0 or not ok.any():
        return out
    rb2 = (l1[ok] / l2[ok]) ** 2
    out[ok] = np.exp(-rb2 / (2 * beta**2)) * (1.0 - np.exp(-s2[ok] / (2 * c**2)))
    return out


def frangi_vesselness(img, params: HessianParams = HessianParams()) -> np.ndarray:
    """Frangi vesselness, max over scales, min-max normalized.

    ``c`` is half the largest Frobenius norm of the Hessian at each scale;
    pixels whose ``lambda2`` is non-negative are background.
    """
    img = _polarized(img, params.polarity)
    best = np.zeros_like(img)
    for s in params.scales:
        ev = eigenvalues_2x2(hessian_field(img, s, params.gamma))
        np.maximum(best, _frangi_scale(ev.l1, ev.l2, params.beta), out=best)
    return normalize_minmax(best)


def _neuriteness_scale(l1, l2, alpha):
    p1 = l1 + alpha * l2
    p2 = l2 + alpha * l1
    lmax = np.where(np.abs(p1) >= np.abs(p2), p1, p2)
    lmin = float(lmax.min())
    out = np.zeros_like(l1)
    if lmin >= 0:
        return out
    neg = lmax < 0
    out[neg] = lmax[neg] / lmin
    return out


def neuriteness(img, params: HessianParams = HessianParams()) -> np.ndarray:
    """Neuriteness from the modified eigenvalues ``l1 + a*l2`` and ``l2 + a*l1``.

    At each pixel the modified eigenvalue of larger magnitude is kept with its
    sign; negative values are divided by the most negative one in the image,
    so the strongest ridge maps to 1.  Multiple scales fuse by maximum.
    """
    img = _polarized(img, params.polarity)
    best = np.zeros_like(img)
    for s in params.scales:
        ev = eigenvalues_2x2(hessian_field(img, s, params.gamma))
        np.maximum(best, _neuriteness_scale(ev.l1, ev.l2, params.alpha), out=best)
    return best


def _jerman_scale(l2, tau):
    l2 = -l2  # vessels positive
    top = float(l2.max())
    cut = tau * top
    lrho = np.where(l2 > cut, l2, np.where(l2 > 0, cut, 0.0))
    out = np.zeros_like(l2)
    pos = (l2 > 0) & (lrho > 0)
    full = pos & (l2 >= lrho / 2)
    mid = pos & ~full
    out[full] = 1.0
    a, b = l2[mid], lrho[mid]
    out[mid] = a**2 * (b - a) * (3.0 / (a + b)) ** 3
    return out


def jerman_vesselness(img, params: HessianParams = HessianParams()) -> np.ndarray:
    """Regularized volume-ratio vesselness, max over scales, in ``[0, 1]``."""
    img = _polarized(img, params.polarity)
    best = np.zeros_like(img)
    for s in params.scales:
        ev = eigenvalues_2x2(hessian_field(img, s, params.gamma))
        np.maximum(best, _jerman_scale(ev.l2, params.tau), out=best)
    np.clip(best, 0.0, 1.0, out=best)
    return best
