"""Raster helpers shared by every filter.

Images are plain 2-D ``float64`` numpy arrays with values in ``[0, 1]``;
masks are 2-D ``bool`` arrays of the same shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PaddingMode:
    """Border policy used whenever a filter reads outside the image.

    ``kind`` is one of ``"replicate"``, ``"reflect"`` or ``"constant"``.
    Reflect mirrors about the edge pixel without repeating it.
    """

    kind: str = "replicate"
    value: float = 0.0

    def __post_init__(self):
        if self.kind not in ("replicate", "reflect", "constant"):
            raise ValueError(f"unknown padding kind {self.kind!r}")
        if not math.isfinite(self.value):
            raise ValueError("constant padding value must be finite")

    @classmethod
    def constant(cls, value: float) -> "PaddingMode":
        return cls("constant", float(value))

    @property
    def ndimage_mode(self) -> str:
        """Equivalent ``scipy.ndimage`` boundary mode name."""
        return {"replicate": "nearest", "reflect": "mirror", "constant": "constant"}[self.kind]


REPLICATE = PaddingMode("replicate")
REFLECT = PaddingMode("reflect")


def as_padding(padding) -> PaddingMode:
    if isinstance(padding, PaddingMode):
        return padding
    if padding is None:
        return REPLICATE
    return PaddingMode(str(padding))


def as_raster(img) -> np.ndarray:
    """Validate and convert ``img`` to a finite 2-D float64 array."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"expected a non-empty 2-D image, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("image contains NaN or Inf")
    return arr


def as_mask(mask, shape=None) -> np.ndarray:
    arr = np.asarray(mask).astype(bool)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D mask, got shape {arr.shape}")
    if shape is not None and arr.shape != tuple(shape):
        raise ValueError(f"mask shape {arr.shape} does not match image shape {tuple(shape)}")
    return arr


def normalize_minmax(img) -> np.ndarray:
    """Affinely map ``img`` onto ``[0, 1]``.

    A constant image has no structure and maps to all zeros.
    """
    arr = as_raster(img)
    lo = arr.min()
    hi = arr.max()
    if hi == lo:
        return np.zeros_like(arr)
    out = (arr - lo) / (hi - lo)
    # guard against 1 ulp overshoot from the division
    np.clip(out, 0.0, 1.0, out=out)
    return out


def pad(img, margin: int, mode=REPLICATE) -> np.ndarray:
    """Pad ``img`` by ``margin`` pixels on every side."""
    arr = np.asarray(img)
    if margin < 0:
        raise ValueError("margin must be >= 0")
    if margin == 0:
        return arr.copy()
    mode = as_padding(mode)
    if mode.kind == "replicate":
        return np.pad(arr, margin, mode="edge")
    if mode.kind == "constant":
        return np.pad(arr, margin, mode="constant", constant_values=mode.value)
    # numpy's reflect needs margin < size; fall back to symmetric tiling of the mirror
    if margin < min(arr.shape):
        return np.pad(arr, margin, mode="reflect")
    idx_r = _mirror_index(np.arange(-margin, arr.shape[0] + margin), arr.shape[0])
    idx_c = _mirror_index(np.arange(-margin, arr.shape[1] + margin), arr.shape[1])
    return arr[np.ix_(idx_r, idx_c)]


def _mirror_index(idx: np.ndarray, n: int) -> np.ndarray:
    if n == 1:
        return np.zeros_like(idx)
    period = 2 * (n - 1)
    idx = np.mod(idx, period)
    return np.where(idx < n, idx, period - idx)


def crop(img, margin: int) -> np.ndarray:
    if margin == 0:
        return img
    return img[margin:-margin, margin:-margin]


class InfinitePSNR(ArithmeticError):
    """Raised when PSNR is requested for two identical images."""


def psnr(a, b, peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio between two images, in dB.

    Raises
    ------
    InfinitePSNR
        If the images are identical (zero mean squared error).
    """
    a = as_raster(a)
    b = as_raster(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    if peak <= 0:
        raise ValueError("peak must be > 0")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        raise InfinitePSNR("images are identical")
    return 10.0 * math.log10(peak * peak / mse)


def extract_profile(img, row: int) -> np.ndarray:
    """Return one image row (the cross-section used for profile plots)."""
    arr = as_raster(img)
    if not 0 <= row < arr.shape[0]:
        raise IndexError(f"row {row} out of range for height {arr.shape[0]}")
    return arr[row].copy()
