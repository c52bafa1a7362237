"""Vessel enhancement toolkit built around the multiscale bowler-hat transform."""

__version__ = "0.1.0"

from .bowlerhat import BowlerHatParams, bowler_hat, disk_stack, line_stack
from .imgcore import REFLECT, REPLICATE, PaddingMode, normalize_minmax, psnr
from .methods import METHODS, enhance

__all__ = [
    "BowlerHatParams",
    "METHODS",
    "PaddingMode",
    "REFLECT",
    "REPLICATE",
    "bowler_hat",
    "disk_stack",
    "enhance",
    "line_stack",
    "normalize_minmax",
    "psnr",
]
