"""Discovery of image / ground-truth / FOV triples in public retinal dataset layouts.

Expected layouts (paths relative to the dataset root)::

    drive   images/01_test.tif   1st_manual/01_manual1.gif   mask/01_test_mask.gif
    stare   images/im0001.ppm    labels-ah/im0001.ah.ppm     (no FOV)
    hrf     images/01_h.jpg      manual1/01_h.tif            mask/01_h_mask.tif
    flat    images/<stem>.*      truth/<stem>.*              fov/<stem>.* (optional)

Files pair up by an image key derived from the file name.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

IMAGE_SUFFIXES = {".png", ".pgm", ".ppm", ".pnm", ".jpg", ".jpeg", ".tif", ".tiff", ".gif", ".bmp"}


class DatasetError(ValueError):
    pass


def _drive_key(p: Path) -> str:
    return p.stem.split("_")[0]


def _stare_key(p: Path) -> str:
    return p.name.split(".")[0]


def _hrf_key(p: Path) -> str:
    stem = p.stem
    return stem[: -len("_mask")] if stem.endswith("_mask") else stem


def _flat_key(p: Path) -> str:
    return p.stem


# kind -> (image dirs, truth dirs, fov dirs, key function); first existing dir wins
LAYOUTS = {
    "drive": (("images",), ("1st_manual",), ("mask",), _drive_key),
    "stare": (("images", "stare-images"), ("labels-ah", "labels_ah"), (), _stare_key),
    "hrf": (("images",), ("manual1",), ("mask",), _hrf_key),
    "flat": (("images",), ("truth",), ("fov",), _flat_key),
}


@dataclass
class Sample:
    key: str
    image: Path
    truth: Optional[Path]
    fov: Optional[Path] = None


@dataclass
class DatasetLayout:
    root: Path
    kind: str = "drive"
    samples: list = field(default_factory=list)
    skipped: list = field(default_factory=list)  # (key, reason)

    @classmethod
    def discover(cls, root, kind: str) -> "DatasetLayout":
        """Scan ``root`` for the ``kind`` layout.

        Images without a ground truth are listed in ``skipped``.

        Raises
        ------
        DatasetError
            When the image or ground-truth directory is missing or empty.
        """
        if kind not in LAYOUTS:
            raise DatasetError(f"unknown dataset kind {kind!r}; choose from {', '.join(LAYOUTS)}")
        root = Path(root)
        img_dirs, truth_dirs, fov_dirs, key = LAYOUTS[kind]
        expected = "expected subpaths under {}: {} (images), {} (ground truth){}".format(
            root,
            " or ".join(img_dirs),
            " or ".join(truth_dirs),
            f", {' or '.join(fov_dirs)} (FOV masks, optional)" if fov_dirs else "",
        )
        img_dir = _first_dir(root, img_dirs)
        truth_dir = _first_dir(root, truth_dirs)
        images = _list_images(img_dir)
        if not images or truth_dir is None:
            raise DatasetError(f"no {kind} dataset found; {expected}")
        truths = _index(_list_images(truth_dir), key)
        fovs = _index(_list_images(_first_dir(root, fov_dirs)), key)

        layout = cls(root, kind)
        for path in images:
            k = key(path)
            if k not in truths:
                layout.skipped.append((k, f"no ground truth for {path.name}"))
                continue
            layout.samples.append(Sample(k, path, truths[k], fovs.get(k)))
        return layout


def _first_dir(root: Path, names) -> Optional[Path]:
    for n in names:
        if (root / n).is_dir():
            return root / n
    return None


def _list_images(d: Optional[Path]) -> list[Path]:
    if d is None:
        return []
    return sorted(p for p in d.iterdir() if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)


def _index(paths, key) -> dict:
    out = {}
    for p in paths:
        out.setdefault(key(p), p)
    return out
