"""Flat grayscale morphology with disk and line structuring elements.

Offsets are stored as ``(dx, dy)`` with ``y`` pointing up, so an offset maps
to array displacement ``(row, col) = (-dy, dx)``.  Erosion is
``min_o I(p + o)`` and dilation ``max_o I(p - o)``; both read the image
through the chosen padding.

Replicate padding drops samples that fall outside the image, which is the
same as extending each ray of the element from its last in-image pixel.
For disks and axis-aligned lines this is exactly edge replication; for
oblique lines it is what keeps erosion and dilation an adjunction on the
bounded image, so openings stay anti-extensive and idempotent right up to
the border.  Every operator is an exact min/max over the
structuring element, evaluated with row-run decomposition where the element
allows it (bit-identical to the naive loop because min/max are exact).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .imgcore import REPLICATE, as_padding, as_raster, pad


@dataclass(frozen=True)
class StructuringElement:
    offsets: tuple  # sorted tuple of (dx, dy)
    kind: str = "custom"
    size: int = 0
    angle: float = 0.0
    _offset_set: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        offs = tuple(sorted({(int(dx), int(dy)) for dx, dy in self.offsets}))
        if not offs:
            raise ValueError("structuring element must be non-empty")
        object.__setattr__(self, "offsets", offs)
        object.__setattr__(self, "_offset_set", frozenset(offs))

    def __len__(self):
        return len(self.offsets)

    def __contains__(self, item):
        return tuple(item) in self._offset_set

    @property
    def extent(self) -> int:
        """Largest absolute coordinate over all offsets."""
        return max(max(abs(dx), abs(dy)) for dx, dy in self.offsets)

    def rowcol(self) -> list[tuple[int, int]]:
        return [(-dy, dx) for dx, dy in self.offsets]

    def reflected(self) -> "StructuringElement":
        return StructuringElement(tuple((-dx, -dy) for dx, dy in self.offsets), self.kind, self.size, self.angle)

    def is_symmetric(self) -> bool:
        return all((-dx, -dy) in self._offset_set for dx, dy in self.offsets)

    def as_array(self) -> np.ndarray:
        """Boolean footprint centred on the anchor (row 0 is the top, i.e. max dy)."""
        e = self.extent
        fp = np.zeros((2 * e + 1, 2 * e + 1), dtype=bool)
        for r, c in self.rowcol():
            fp[r + e, c + e] = True
        return fp


def make_disk(d: int) -> StructuringElement:
    """Disk of diameter ``d``: all offsets within Euclidean distance ``d/2``."""
    if d < 1:
        raise ValueError("disk diameter must be >= 1")
    r = d // 2
    rr = (d / 2.0) ** 2
    offs = [(dx, dy) for dy in range(-r, r + 1) for dx in range(-r, r + 1) if dx * dx + dy * dy <= rr]
    return StructuringElement(tuple(offs), "disk", d, 0.0)


def _round_half_away(x: float) -> int:
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def make_line(d: int, theta: float) -> StructuringElement:
    """1-px wide digital segment of length ``d`` at ``theta`` degrees (y up).

    The segment takes ``d // 2`` unit steps each way along its major axis
    and rounds the minor coordinate half away from zero, so it is
    point-symmetric and lines of the same angle are nested in ``d``.
    Odd ``d`` gives exactly ``d`` pixels; even ``d`` gives ``d + 1``.
    """
    if d < 1:
        raise ValueError("line length must be >= 1")
    if not 0 <= theta < 180:
        raise ValueError("line angle must lie in [0, 180)")
    n = d // 2
    rad = math.radians(theta)
    c, s = math.cos(rad), math.sin(rad)
    offs = []
    if abs(c) >= abs(s) - 1e-12:
        t = s / c
        for k in range(-n, n + 1):
            offs.append((k, _round_half_away(k * t)))
    else:
        t = c / s
        for k in range(-n, n + 1):
            offs.append((_round_half_away(k * t), k))
    return StructuringElement(tuple(offs), "line", d, float(theta))


def orientations(n_theta: int) -> list[float]:
    """Uniform angle grid ``k * 180 / n_theta`` on ``[0, 180)``."""
    return [k * 180.0 / n_theta for k in range(n_theta)]


# -- kernels ---------------------------------------------------------------


def _row_plan(rowcol: Sequence[tuple[int, int]]):
    """Split offsets into centred horizontal runs and leftover single offsets."""
    rows: dict[int, list[int]] = {}
    for r, c in rowcol:
        rows.setdefault(r, []).append(c)
    runs, singles = [], []
    for r, cols in rows.items():
        cols.sort()
        w = cols[-1]
        if len(cols) > 2 and cols[0] == -w and cols == list(range(-w, w + 1)):
            runs.append((r, w))
        else:
            singles.extend((r, c) for c in cols)
    return runs, singles


def _reduce(padded: np.ndarray, rowcol, shape, margin: int, ufunc, out=None) -> np.ndarray:
    """``out[p] = ufunc-reduce over offsets of padded[p + margin + offset]``."""
    h, w = shape
    runs, singles = _row_plan(rowcol)

    def view(arr, r, c):
        return arr[margin + r : margin + r + h, margin + c : margin + c + w]

    def acc(v):
        nonlocal out
        if out is None:
            out = v.copy()
        else:
            ufunc(out, v, out=out)

    for r, c in singles:
        acc(view(padded, r, c))
    if runs:
        # horizontal running reductions over the needed rows only, full width
        max_w = max(wd for _, wd in runs)
        by_w: dict[int, list[int]] = {}
        for r, wd in runs:
            by_w.setdefault(wd, []).append(r)
        row_lo = margin + min(r for r, _ in runs)
        row_hi = margin + max(r for r, _ in runs) + h
        band = padded[row_lo:row_hi]
        W = band.shape[1]
        run = band.copy()
        for k in range(1, max_w + 1):
            # run[:, x] covers band[:, x-k .. x+k] for the valid x range
            ufunc(run[:, k : W - k], band[:, : W - 2 * k], out=run[:, k : W - k])
            ufunc(run[:, k : W - k], band[:, 2 * k :], out=run[:, k : W - k])
            for r in by_w.get(k, ()):
                r0 = margin + r - row_lo
                acc(run[r0 : r0 + h, margin : margin + w])
    return out


def _pad_for(img, margin: int, padding, se: StructuringElement, ufunc) -> np.ndarray:
    padding = as_padding(padding)
    if padding.kind == "replicate" and (0, 0) in se:
        # out-of-image samples never win the reduction
        fill = np.inf if ufunc is np.minimum else -np.inf
        return np.pad(img, margin, mode="constant", constant_values=fill)
    return pad(img, margin, padding)


def erode(img, se: StructuringElement, padding=REPLICATE) -> np.ndarray:
    """Flat erosion: minimum of the image over ``p + se``."""
    img = as_raster(img)
    m = se.extent
    return _reduce(_pad_for(img, m, padding, se, np.minimum), se.rowcol(), img.shape, m, np.minimum)


def dilate(img, se: StructuringElement, padding=REPLICATE) -> np.ndarray:
    """Flat dilation: maximum of the image over ``p - se``."""
    img = as_raster(img)
    m = se.extent
    rc = [(-r, -c) for r, c in se.rowcol()]
    return _reduce(_pad_for(img, m, padding, se, np.maximum), rc, img.shape, m, np.maximum)


def opening(img, se: StructuringElement, padding=REPLICATE) -> np.ndarray:
    return dilate(erode(img, se, padding), se, padding)


def closing(img, se: StructuringElement, padding=REPLICATE) -> np.ndarray:
    return erode(dilate(img, se, padding), se, padding)


def tophat(img, se: StructuringElement, padding=REPLICATE) -> np.ndarray:
    """White top-hat ``img - opening(img)``; never negative."""
    img = as_raster(img)
    return img - opening(img, se, padding)


# ``open``/``close`` are the natural names; keep builtins reachable in-module
open = opening  # noqa: A001
close = closing


def open_many(img, ses: Iterable[StructuringElement], padding=REPLICATE) -> list[np.ndarray]:
    """Openings of ``img`` by each element of ``ses``, in order.

    Equal elements are computed once, and when an element contains the
    previous one its erosion is updated incrementally from the previous
    erosion instead of being recomputed from scratch.
    """
    img = as_raster(img)
    padding = as_padding(padding)
    ses = list(ses)
    if not ses:
        return []
    margin = max(se.extent for se in ses)
    padded = _pad_for(img, margin, padding, ses[0], np.minimum)
    cache: dict[tuple, np.ndarray] = {}
    prev_se, prev_ero = None, None
    out = []
    for se in ses:
        key = se.offsets
        if key in cache:
            out.append(cache[key])
            continue
        if padding.kind == "replicate" and (0, 0) not in se:
            ero = erode(img, se, padding)
        elif prev_se is not None and prev_se._offset_set <= se._offset_set:
            extra = [(-dy, dx) for dx, dy in se.offsets if (dx, dy) not in prev_se]
            ero = _reduce(padded, extra, img.shape, margin, np.minimum, out=prev_ero.copy())
        else:
            ero = _reduce(padded, se.rowcol(), img.shape, margin, np.minimum)
        opened = dilate(ero, se, padding)
        cache[key] = opened
        out.append(opened)
        prev_se, prev_ero = se, ero
    return out
