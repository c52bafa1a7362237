"""Non-Hessian comparator enhancers: CLAHE, Zana-Klein top-hats, the
multiscale line detector and IUWT (a trous B3-spline) wavelets."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.ndimage import convolve1d, gaussian_laplace, uniform_filter

from .imgcore import REPLICATE, as_raster, normalize_minmax, pad
from .morph import make_line, orientations, tophat


# -- CLAHE -----------------------------------------------------------------


@dataclass(frozen=True)
class ClaheParams:
    tiles_x: int = 8
    tiles_y: int = 8
    n_bins: int = 256
    clip_limit: float = 0.01  # fraction of tile pixels allowed per bin

    def __post_init__(self):
        if self.tiles_x < 1 or self.tiles_y < 1:
            raise ValueError("tile counts must be >= 1")
        if self.n_bins < 2:
            raise ValueError("n_bins must be >= 2")
        if self.clip_limit <= 0:
            raise ValueError("clip_limit must be > 0")


def _bin_index(img: np.ndarray, n_bins: int) -> np.ndarray:
    return np.minimum((img * n_bins).astype(np.int64), n_bins - 1).clip(0)


def clip_histogram(hist: np.ndarray, ceiling: float, rounds: int = 5) -> np.ndarray:
    """Clip bins at ``ceiling`` and spread the excess evenly over all bins.

    Redistribution can push bins back over the ceiling, so it is repeated up
    to ``rounds`` times; whatever still sticks out after that is spread
    uniformly over the bins that have room left.  Total mass is preserved,
    and no bin ends above the ceiling unless the ceiling is below the mean.
    """
    h = hist.astype(np.float64).copy()
    for _ in range(rounds):
        excess = np.maximum(h - ceiling, 0.0).sum()
        if excess <= 0:
            return h
        np.minimum(h, ceiling, out=h)
        h += excess / h.size
    excess = np.maximum(h - ceiling, 0.0).sum()
    if excess <= 0:
        return h
    if ceiling * h.size <= hist.sum():
        # infeasible ceiling: the flat histogram is the only fixed point
        return np.full_like(h, hist.sum() / h.size)
    np.minimum(h, ceiling, out=h)
    while excess > 1e-12 * ceiling:
        room = h < ceiling
        share = min(excess / room.sum(), float((ceiling - h[room]).min()))
        h[room] += share
        excess -= share * room.sum()
    return h


def tile_transfer(tile: np.ndarray, params: ClaheParams) -> np.ndarray:
    """Clipped-histogram equalization lookup table for one tile (``n_bins`` values)."""
    bins = _bin_index(tile, params.n_bins).ravel()
    hist = np.bincount(bins, minlength=params.n_bins)
    hist = clip_histogram(hist, params.clip_limit * bins.size)
    cdf = np.cumsum(hist)
    return np.clip(cdf / cdf[-1], 0.0, 1.0)


def _tile_edges(n: int, tiles: int) -> np.ndarray:
    return np.linspace(0, n, tiles + 1).round().astype(int)


def clahe(img, params: ClaheParams = ClaheParams()) -> np.ndarray:
    """Contrast limited adaptive histogram equalization.

    Each tile gets its own clipped equalization table; every pixel is mapped
    through the four nearest tile tables and blended bilinearly by its
    distance to the tile centres (clamped at the image border).
    """
    img = np.clip(as_raster(img), 0.0, 1.0)
    h, w = img.shape
    if h < params.tiles_y or w < params.tiles_x:
        raise ValueError("image is smaller than the tile grid")
    ey = _tile_edges(h, params.tiles_y)
    ex = _tile_edges(w, params.tiles_x)
    luts = np.empty((params.tiles_y, params.tiles_x, params.n_bins))
    for i in range(params.tiles_y):
        for j in range(params.tiles_x):
            luts[i, j] = tile_transfer(img[ey[i] : ey[i + 1], ex[j] : ex[j + 1]], params)

    cy = 0.5 * (ey[:-1] + ey[1:]) - 0.5
    cx = 0.5 * (ex[:-1] + ex[1:]) - 0.5
    y0, fy = _interp_coords(np.arange(h), cy)
    x0, fx = _interp_coords(np.arange(w), cx)
    y1 = np.minimum(y0 + 1, params.tiles_y - 1)
    x1 = np.minimum(x0 + 1, params.tiles_x - 1)

    b = _bin_index(img, params.n_bins)
    Y0, X0 = y0[:, None], x0[None, :]
    Y1, X1 = y1[:, None], x1[None, :]
    FY, FX = fy[:, None], fx[None, :]
    top = (1 - FX) * luts[Y0, X0, b] + FX * luts[Y0, X1, b]
    bot = (1 - FX) * luts[Y1, X0, b] + FX * luts[Y1, X1, b]
    return np.clip((1 - FY) * top + FY * bot, 0.0, 1.0)


def _interp_coords(pos: np.ndarray, centres: np.ndarray):
    """Lower tile index and blend weight for each pixel position."""
    if len(centres) == 1:
        return np.zeros(len(pos), dtype=int), np.zeros(len(pos))
    idx = np.clip(np.searchsorted(centres, pos, side="right") - 1, 0, len(centres) - 2)
    frac = (pos - centres[idx]) / (centres[idx + 1] - centres[idx])
    return idx, np.clip(frac, 0.0, 1.0)


# -- Zana-Klein ------------------------------------------------------------


def zana_klein(img, line_len: int = 15, n_dirs: int = 12, sigma_log: float = 1.75) -> np.ndarray:
    """Sum of linear top-hats followed by a rectified Laplacian of Gaussian.

    The sum runs over ``n_dirs`` line orientations of a single length.  The
    LoG is negated so bright ridges give positive curvature response.
    """
    if line_len < 3:
        raise ValueError("line_len must be >= 3")
    img = as_raster(img)
    total = np.zeros_like(img)
    for theta in orientations(n_dirs):
        total += tophat(img, make_line(line_len, theta), REPLICATE)
    curv = -gaussian_laplace(total, sigma_log, mode="nearest")
    return normalize_minmax(np.maximum(curv, 0.0))


# -- multiscale line detector ----------------------------------------------


@dataclass(frozen=True)
class LineDetectorParams:
    n_dirs: int = 12
    window: int = 15
    lengths: Sequence[int] = (1, 3, 5, 7, 9, 11, 13, 15)

    def __post_init__(self):
        object.__setattr__(self, "lengths", tuple(int(x) for x in self.lengths))
        if self.n_dirs < 2:
            raise ValueError("n_dirs must be >= 2")
        if self.window % 2 == 0 or self.window < 1:
            raise ValueError("window must be odd")
        if not self.lengths or any(not 1 <= x <= self.window for x in self.lengths):
            raise ValueError("lengths must be non-empty and each in [1, window]")


def line_mean(img: np.ndarray, length: int, theta: float) -> np.ndarray:
    """Mean intensity along the digital segment of ``length`` through each pixel."""
    se = make_line(length, theta)
    m = se.extent
    P = pad(img, m, REPLICATE)
    h, w = img.shape
    acc = np.zeros_like(img)
    for r, c in se.rowcol():
        acc += P[m + r : m + r + h, m + c : m + c + w]
    return acc / len(se)


def line_response(img, length: int, window: int, n_dirs: int = 12) -> np.ndarray:
    """Basic line detector: best directional line mean minus window mean."""
    img = as_raster(img)
    best = None
    for theta in orientations(n_dirs):
        lm = line_mean(img, length, theta)
        best = lm if best is None else np.maximum(best, lm)
    r = best - uniform_filter(img, size=window, mode="nearest")
    # the two means round differently on flat regions
    r[np.abs(r) < 1e-12 * float(np.max(np.abs(img)))] = 0.0
    return r


def _standardize(x: np.ndarray) -> np.ndarray:
    sd = x.std()
    if sd == 0:
        return np.zeros_like(x)
    return (x - x.mean()) / sd


def line_detector(img, params: LineDetectorParams = LineDetectorParams()) -> np.ndarray:
    """Multiscale line detector.

    Each per-length response and the raw image are standardized to zero mean
    and unit variance, averaged with equal weights and min-max normalized.
    """
    img = as_raster(img)
    terms = [_standardize(line_response(img, n, params.window, params.n_dirs)) for n in params.lengths]
    terms.append(_standardize(img))
    return normalize_minmax(np.mean(terms, axis=0))


# -- IUWT ------------------------------------------------------------------

B3_KERNEL = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0


def atrous_kernel(level: int) -> np.ndarray:
    """B3-spline kernel with ``2**(level-1) - 1`` zeros between taps."""
    step = 2 ** (level - 1)
    k = np.zeros(4 * step + 1)
    k[::step] = B3_KERNEL
    return k


def iuwt_decompose(img, j_max: int = 4, mode: str = "nearest"):
    """Isotropic undecimated wavelet transform.

    Returns
    -------
    scaling : list of ndarray
        ``c_0 .. c_J`` with ``c_0 = img``.
    wavelets : list of ndarray
        ``w_1 .. w_J`` with ``w_j = c_{j-1} - c_j``.
    """
    if j_max < 1:
        raise ValueError("j_max must be >= 1")
    c = as_raster(img)
    scaling, wavelets = [c], []
    for j in range(1, j_max + 1):
        k = atrous_kernel(j)
        nxt = convolve1d(convolve1d(c, k, axis=0, mode=mode), k, axis=1, mode=mode)
        wavelets.append(c - nxt)
        scaling.append(nxt)
        c = nxt
    return scaling, wavelets


@dataclass(frozen=True)
class IuwtParams:
    levels: Sequence[int] = (2, 3)
    j_max: int = 4
    polarity: str = "bright"

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(int(x) for x in self.levels))
        if not self.levels or any(not 1 <= x <= self.j_max for x in self.levels):
            raise ValueError(f"levels must lie in [1, {self.j_max}]")
        if self.polarity not in ("bright", "dark"):
            raise ValueError("polarity must be 'bright' or 'dark'")


def iuwt_enhance(img, params: IuwtParams = IuwtParams()) -> np.ndarray:
    """Sum of selected wavelet levels, rectified to the vessel polarity."""
    _, w = iuwt_decompose(img, params.j_max)
    total = sum(w[j - 1] for j in params.levels)
    if params.polarity == "dark":
        total = -total
    return normalize_minmax(np.maximum(total, 0.0))
