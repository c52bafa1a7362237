"""Synthetic vessel scenes, noise models and illumination ramps.

Coordinates are ``(x, y)`` = ``(column, row)`` in pixels.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Union

import numpy as np
from scipy.ndimage import gaussian_filter

from .imgcore import InfinitePSNR, as_raster, psnr


@dataclass(frozen=True)
class Vessel:
    p0: tuple
    p1: tuple
    width: float = 3.0
    intensity: float = 1.0


@dataclass(frozen=True)
class Blob:
    center: tuple
    diameter: float
    intensity: float = 1.0


@dataclass(frozen=True)
class Cross:
    center: tuple
    arm: float
    width: float = 3.0
    intensity: float = 1.0

    def vessels(self) -> tuple[Vessel, Vessel]:
        x, y = self.center
        return (
            Vessel((x - self.arm, y), (x + self.arm, y), self.width, self.intensity),
            Vessel((x, y - self.arm), (x, y + self.arm), self.width, self.intensity),
        )


Primitive = Union[Vessel, Blob, Cross]
_KINDS = {"vessel": Vessel, "blob": Blob, "cross": Cross}


@dataclass(frozen=True)
class SceneSpec:
    canvas: tuple  # (width, height)
    primitives: tuple = ()
    smoothing: float = 1.0

    def to_dict(self) -> dict:
        prims = []
        for p in self.primitives:
            d = {"kind": type(p).__name__.lower()}
            d.update({k: list(v) if isinstance(v, tuple) else v for k, v in asdict(p).items()})
            prims.append(d)
        return {"canvas": list(self.canvas), "smoothing": self.smoothing, "primitives": prims}

    @classmethod
    def from_dict(cls, data: dict) -> "SceneSpec":
        try:
            prims = []
            for item in data.get("primitives", []):
                item = dict(item)
                kind = _KINDS[item.pop("kind")]
                for key in ("p0", "p1", "center"):
                    if key in item:
                        item[key] = tuple(float(v) for v in item[key])
                prims.append(kind(**item))
            return cls(tuple(int(v) for v in data["canvas"]), tuple(prims), float(data.get("smoothing", 1.0)))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed scene spec: {exc}") from exc


def _segment_distance(xx, yy, p0, p1):
    (x0, y0), (x1, y1) = p0, p1
    dx, dy = x1 - x0, y1 - y0
    L2 = dx * dx + dy * dy
    if L2 == 0:
        t = np.zeros_like(xx)
    else:
        t = np.clip(((xx - x0) * dx + (yy - y0) * dy) / L2, 0.0, 1.0)
    return np.hypot(xx - (x0 + t * dx), yy - (y0 + t * dy))


def primitive_mask(prim: Primitive, shape) -> np.ndarray:
    h, w = shape
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    if isinstance(prim, Vessel):
        return _segment_distance(xx, yy, prim.p0, prim.p1) <= prim.width / 2.0
    if isinstance(prim, Blob):
        cx, cy = prim.center
        return np.hypot(xx - cx, yy - cy) <= prim.diameter / 2.0
    if isinstance(prim, Cross):
        a, b = prim.vessels()
        return primitive_mask(a, shape) | primitive_mask(b, shape)
    raise TypeError(f"unknown primitive {prim!r}")


def _validate(scene: SceneSpec):
    if not scene.primitives:
        raise ValueError("scene has no primitives")
    w, h = scene.canvas
    if w < 1 or h < 1:
        raise ValueError("canvas must be at least 1x1")
    for p in scene.primitives:
        if not 0 < p.intensity <= 1:
            raise ValueError("primitive intensity must lie in (0, 1]")
        pts = []
        if isinstance(p, Vessel):
            if p.width < 1:
                raise ValueError("vessel width must be >= 1")
            pts = [p.p0, p.p1]
        elif isinstance(p, Cross):
            if p.width < 1:
                raise ValueError("vessel width must be >= 1")
            pts = [p.center]
        else:
            pts = [p.center]
        for x, y in pts:
            if not (0 <= x <= w - 1 and 0 <= y <= h - 1):
                raise ValueError(f"primitive {p!r} lies outside the canvas")


def render(scene: SceneSpec) -> tuple[np.ndarray, np.ndarray]:
    """Rasterize a scene.

    Returns
    -------
    image : ndarray
        Hard-edged primitives (max intensity where they overlap), then a
        Gaussian blur of ``scene.smoothing`` pixels.
    mask : ndarray of bool
        Pixels covered by any primitive before smoothing.
    """
    _validate(scene)
    w, h = scene.canvas
    img = np.zeros((h, w))
    mask = np.zeros((h, w), dtype=bool)
    for p in scene.primitives:
        m = primitive_mask(p, (h, w))
        mask |= m
        img[m] = np.maximum(img[m], p.intensity)
    if scene.smoothing > 0:
        img = gaussian_filter(img, scene.smoothing, mode="nearest")
    return np.clip(img, 0.0, 1.0), mask


# -- presets used by the CLI and the experiment drivers ----------------------


def preset(name: str, size: int = 64) -> SceneSpec:
    """Named test scenes on a ``size`` x ``size`` canvas, centred on pixel ``size // 2``."""
    c = float(size // 2)
    if name == "vessel":
        return SceneSpec((size, size), (Vessel((4.0, c), (size - 5.0, c), 5.0, 1.0),))
    if name == "cross":
        return SceneSpec((size, size), (Cross((c, c), c - 6.0, 3.0, 1.0),))
    if name == "blob":
        return SceneSpec(
            (size, size),
            (Vessel((4.0, c), (c, c), 3.0, 1.0), Blob((c + 5.0, c), 11.0, 1.0)),
        )
    if name == "network":
        q = size / 4.0
        return SceneSpec(
            (size, size),
            (
                Vessel((4.0, q), (size - 5.0, q), 3.0, 1.0),
                Vessel((4.0, 3 * q), (size - 5.0, 2 * q), 2.0, 0.7),
                Vessel((c, 4.0), (c, size - 5.0), 4.0, 0.9),
                Blob((3 * q, 3 * q), 9.0, 0.8),
            ),
        )
    raise ValueError(f"unknown preset {name!r} (choose from vessel, cross, blob, network)")


PRESETS = ("vessel", "cross", "blob", "network")


# -- noise -----------------------------------------------------------------


@dataclass(frozen=True)
class NoiseSpec:
    kind: str  # "gaussian" | "speckle" | "saltpepper"
    level: float  # sigma, or density for salt-and-pepper
    seed: int = 0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.level < 0 or (self.kind == "saltpepper" and self.level > 1):
            raise ValueError("noise level out of range")


NOISE_KINDS = ("gaussian", "speckle", "saltpepper")


def _draws(shape, seed):
    """Fixed random fields for one seed; noise levels only rescale/threshold them."""
    rng = np.random.default_rng(seed)
    return rng.standard_normal(shape), rng.random(shape), rng.random(shape)


def _apply(img, kind, level, draws):
    n, u, v = draws
    if kind == "gaussian":
        out = img + level * n
    elif kind == "speckle":
        out = img * (1.0 + level * n)
    else:
        out = img.copy()
        hit = u < level
        out[hit] = np.where(v[hit] < 0.5, 0.0, 1.0)
    return np.clip(out, 0.0, 1.0)


def apply_noise(img, spec: NoiseSpec) -> np.ndarray:
    """Degrade ``img`` with additive Gaussian, speckle (``I*(1+n)``) or
    salt-and-pepper noise, clamped to ``[0, 1]``.  Deterministic in ``spec.seed``."""
    img = as_raster(img)
    if spec.level == 0:
        return img.copy()
    return _apply(img, spec.kind, spec.level, _draws(img.shape, spec.seed))


class UnreachablePSNR(ValueError):
    pass


_LEVEL_MAX = {"gaussian": 4.0, "speckle": 16.0, "saltpepper": 1.0}


def noise_for_target_psnr(img, kind: str, target: float, seed: int = 0, tol: float = 0.1, max_iter: int = 60):
    """Find the noise level whose output hits ``target`` dB PSNR.

    With the random fields fixed by ``seed``, PSNR decreases monotonically in
    the noise level, so plain bisection converges.

    Returns
    -------
    noisy : ndarray
    achieved : float
        PSNR in dB, within ``tol`` of ``target``.
    level : float

    Raises
    ------
    UnreachablePSNR
        If no level gets within ``tol``; the message names the reachable bound.
    """
    img = as_raster(img)
    if kind not in NOISE_KINDS:
        raise ValueError(f"unknown noise kind {kind!r}")
    draws = _draws(img.shape, seed)

    def measure(level):
        out = _apply(img, kind, level, draws)
        try:
            return out, psnr(img, out)
        except InfinitePSNR:
            return out, math.inf

    lo, hi = 0.0, _LEVEL_MAX[kind]
    out, floor_db = measure(hi)
    if floor_db > target + tol:
        raise UnreachablePSNR(f"target {target} dB is below the lowest reachable PSNR {floor_db:.2f} dB")
    if abs(floor_db - target) <= tol:
        return out, floor_db, hi
    ceiling = floor_db
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        out, db = measure(mid)
        if math.isfinite(db):
            ceiling = max(ceiling, db)
        if abs(db - target) <= tol:
            return out, db, mid
        if db > target:
            lo = mid
        else:
            hi = mid
    raise UnreachablePSNR(
        f"target {target} dB not reachable with {kind} noise; highest finite PSNR reached {ceiling:.2f} dB"
    )


def uneven_illumination(img, direction: float = 0.0, strength: float = 0.5) -> np.ndarray:
    """Multiply by a linear ramp from ``1 - strength`` to 1 along ``direction`` degrees.

    Direction 0 runs left to right; angles turn counter-clockwise (y up).
    """
    if not 0 <= strength < 1:
        raise ValueError("strength must lie in [0, 1)")
    img = as_raster(img)
    if strength == 0:
        return img.copy()
    h, w = img.shape
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    rad = math.radians(direction)
    proj = xx * math.cos(rad) - yy * math.sin(rad)
    span = proj.max() - proj.min()
    t = np.zeros_like(proj) if span == 0 else (proj - proj.min()) / span
    return np.clip(img * ((1.0 - strength) + strength * t), 0.0, 1.0)
