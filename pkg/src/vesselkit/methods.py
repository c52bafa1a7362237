"""Name-based dispatch over every enhancement method."""

from __future__ import annotations

from typing import Any, Callable, Mapping

import numpy as np

from .baselines import ClaheParams, IuwtParams, LineDetectorParams, clahe, iuwt_enhance, line_detector, zana_klein
from .bowlerhat import BowlerHatParams, bowler_hat
from .hessian import HessianParams, frangi_vesselness, jerman_vesselness, neuriteness

METHODS = ("bowlerhat", "frangi", "neuriteness", "jerman", "clahe", "zana-klein", "line-detector", "iuwt")


def _pick(params: Mapping[str, Any], *names):
    return {n: params[n] for n in names if params.get(n) is not None}


def _bowlerhat(img, p):
    kw = _pick(p, "d_max", "n_theta", "d_step")
    return bowler_hat(img, BowlerHatParams(**kw), workers=int(p.get("workers") or 1))


def _hessian(fn):
    def run(img, p):
        return fn(img, HessianParams(**_pick(p, "scales", "gamma", "beta", "alpha", "tau")))

    return run


def _clahe(img, p):
    return clahe(img, ClaheParams(**_pick(p, "tiles_x", "tiles_y", "n_bins", "clip_limit")))


def _zana(img, p):
    return zana_klein(img, **_pick(p, "line_len", "n_dirs", "sigma_log"))


def _lines(img, p):
    return line_detector(img, LineDetectorParams(**_pick(p, "n_dirs", "window", "lengths")))


def _iuwt(img, p):
    return iuwt_enhance(img, IuwtParams(**_pick(p, "levels", "j_max")))


_DISPATCH: dict[str, Callable[[np.ndarray, Mapping[str, Any]], np.ndarray]] = {
    "bowlerhat": _bowlerhat,
    "frangi": _hessian(frangi_vesselness),
    "neuriteness": _hessian(neuriteness),
    "jerman": _hessian(jerman_vesselness),
    "clahe": _clahe,
    "zana-klein": _zana,
    "line-detector": _lines,
    "iuwt": _iuwt,
}


def enhance(img, method: str, **params) -> np.ndarray:
    """Run ``method`` on a bright-vessel image.

    Keyword parameters that the method does not use are ignored, and ``None``
    means "use the method default", so one flat option set can drive every
    method.
    """
    try:
        fn = _DISPATCH[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}") from None
    return fn(img, params)
