"""Multiscale bowler-hat vessel enhancement.

Two banks of openings are built for every scale ``d``: one with a disk of
diameter ``d`` and one that keeps, per pixel, the best opening over lines of
length ``d`` at ``n_theta`` orientations.  A vessel narrower than ``d`` but
longer than ``d`` survives the line openings and is erased by the disk
opening, so the per-scale difference lights it up.  Blobs survive both
openings and stay dark.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .imgcore import REPLICATE, PaddingMode, as_padding, as_raster, normalize_minmax
from .morph import make_disk, make_line, open_many, opening, orientations


@dataclass(frozen=True)
class BowlerHatParams:
    d_max: int = 15
    n_theta: int = 12
    d_step: int = 1
    padding: PaddingMode = REPLICATE

    def __post_init__(self):
        if self.d_max < 2:
            raise ValueError("d_max must be >= 2")
        if self.n_theta < 2:
            raise ValueError("n_theta must be >= 2")
        if not 1 <= self.d_step <= self.d_max:
            raise ValueError("d_step must lie in [1, d_max]")
        object.__setattr__(self, "padding", as_padding(self.padding))

    @property
    def scales(self) -> list[int]:
        return list(range(1, self.d_max + 1, self.d_step))


def _map(fn, items, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def disk_stack(img, params: BowlerHatParams = BowlerHatParams(), workers: int = 1) -> list[np.ndarray]:
    """Openings of ``img`` with disks of every diameter in ``params.scales``."""
    img = as_raster(img)
    return _map(lambda d: opening(img, make_disk(d), params.padding), params.scales, workers)


def line_stack(img, params: BowlerHatParams = BowlerHatParams(), workers: int = 1) -> list[np.ndarray]:
    """Per scale, the pixel-wise max over orientations of line openings."""
    img = as_raster(img)
    scales = params.scales

    def per_angle(theta):
        return open_many(img, [make_line(d, theta) for d in scales], params.padding)

    per_theta = _map(per_angle, orientations(params.n_theta), workers)
    stack = []
    for i in range(len(scales)):
        layer = per_theta[0][i].copy()
        for openings in per_theta[1:]:
            np.maximum(layer, openings[i], out=layer)
        stack.append(layer)
    return stack


def bowler_hat_raw(img, params: BowlerHatParams = BowlerHatParams(), workers: int = 1) -> np.ndarray:
    """Max over scales of ``|line_stack - disk_stack|`` before normalization."""
    img = as_raster(img)
    disks = disk_stack(img, params, workers)
    lines = line_stack(img, params, workers)
    out = np.zeros_like(img)
    for ld, dd in zip(lines, disks):
        np.maximum(out, np.abs(ld - dd), out=out)
    return out


def bowler_hat(img, params: BowlerHatParams = BowlerHatParams(), workers: int = 1) -> np.ndarray:
    """Enhance bright vessels on a dark background; output in ``[0, 1]``.

    Parameters
    ----------
    img : ndarray
        2-D image, vessels brighter than background.
    params : BowlerHatParams
        ``d_max`` should exceed the widest vessel; 10-12 orientations are
        usually enough.
    workers : int
        Thread count for the independent openings.  The result does not
        depend on it.
    """
    return normalize_minmax(bowler_hat_raw(img, params, workers))
