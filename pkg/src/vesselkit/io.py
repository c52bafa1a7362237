"""Image file I/O: 8/16-bit grayscale or colour in, 16-bit PNG out."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

LUMA = np.array([0.299, 0.587, 0.114])


def _to_array(im: Image.Image) -> tuple[np.ndarray, float]:
    """Decoded pixel array and the full-scale value of its type."""
    if im.mode in ("P", "PA", "CMYK", "YCbCr", "LAB", "HSV"):
        im = im.convert("RGB")
    if im.mode == "1":
        return np.asarray(im, dtype=np.float64), 1.0
    arr = np.asarray(im)
    if im.mode.startswith("I;16") or im.mode == "I":
        return arr.astype(np.float64), 65535.0
    if im.mode == "F":
        return arr.astype(np.float64), 1.0
    if arr.dtype == np.uint8:
        return arr.astype(np.float64), 255.0
    if arr.dtype == np.uint16:
        return arr.astype(np.float64), 65535.0
    raise ValueError(f"unsupported pixel encoding {im.mode!r}")


def read_raw(path) -> np.ndarray:
    """Decode ``path`` to floats in ``[0, 1]``, keeping colour channels."""
    path = Path(path)
    try:
        with Image.open(path) as im:
            im.load()
            arr, full = _to_array(im)
    except FileNotFoundError:
        raise
    except (UnidentifiedImageError, OSError) as exc:
        raise ValueError(f"cannot read image {path}: {exc}") from exc
    return np.clip(arr / full, 0.0, 1.0)


def auto_vessels_dark(img: np.ndarray, fov=None) -> bool:
    """Guess whether vessels are darker than the background.

    Thin vessels form a minority tail of the histogram; the tail on the far
    side of the median from the bulk is taken to be the vessels.
    """
    vals = img[fov] if fov is not None else img.ravel()
    if vals.size == 0:
        return False
    p10, med, p90 = np.percentile(vals, [10, 50, 90])
    return (med - p10) > (p90 - med)


def load_image(path, polarity: str = "bright", channel: str = "green", fov=None) -> np.ndarray:
    """Load an image as a bright-vessel float raster in ``[0, 1]``.

    Parameters
    ----------
    polarity : {"bright", "dark", "auto"}
        ``dark`` inverts the image; ``auto`` decides from the FOV histogram.
    channel : {"green", "luma"}
        Channel used for colour input.  Ignored for grayscale files.
    """
    if polarity not in ("bright", "dark", "auto"):
        raise ValueError(f"unknown polarity {polarity!r}")
    if channel not in ("green", "luma"):
        raise ValueError(f"unknown channel {channel!r}")
    arr = read_raw(path)
    if arr.ndim == 3:
        if arr.shape[2] == 2:  # gray + alpha
            arr = arr[..., 0]
        elif channel == "green":
            arr = arr[..., 1]
        else:
            arr = arr[..., :3] @ LUMA
    if polarity == "dark" or (polarity == "auto" and auto_vessels_dark(arr, fov)):
        arr = 1.0 - arr
    return np.ascontiguousarray(arr, dtype=np.float64)


def load_mask(path) -> np.ndarray:
    """Binary mask: pixels above half of full scale (any channel)."""
    arr = read_raw(path)
    if arr.ndim == 3:
        arr = arr[..., :3].max(axis=2)
    return arr > 0.5


def save_image16(path, img) -> None:
    """Write ``img`` (values in ``[0, 1]``) as a 16-bit grayscale PNG."""
    q = np.round(np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0) * 65535.0).astype(np.uint16)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(q).save(path, format="PNG")


def save_mask(path, mask) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.asarray(mask, dtype=np.uint8) * 255).save(path, format="PNG")
