"""``vesselkit`` command line.

Subcommands: ``enhance``, ``dataset-eval``, ``synth``, ``profile``,
``noise-curve``.  Exit status is 0 on success, 1 for bad input (missing
files, malformed options, unknown methods) and 2 for internal errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .datasets import DatasetError, DatasetLayout
from .evaluation import auc_vs_noise_curve, confusion, local_threshold, roc_auc, se_sp_acc
from .imgcore import as_raster, extract_profile
from .io import load_image, load_mask, read_raw, save_image16, save_mask
from .methods import METHODS, enhance
from .synthgen import PRESETS, NOISE_KINDS, SceneSpec, noise_for_target_psnr, preset, render, uneven_illumination

log = logging.getLogger("vesselkit")

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2

# option name -> (type, default); defaults of None defer to the method's own default
METHOD_OPTIONS = {
    "dmax": (int, None),
    "ntheta": (int, None),
    "dstep": (int, None),
    "scales": (str, None),
    "alpha": (float, None),
    "tau": (float, None),
    "beta": (float, None),
    "workers": (int, 1),
}


class InputError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _float_list(text):
    return [float(v) for v in str(text).replace(",", " ").split()]


def method_params(opts: dict) -> dict:
    """Translate CLI option names to enhancement keyword arguments."""
    scales = opts.get("scales")
    return {
        "d_max": opts.get("dmax"),
        "n_theta": opts.get("ntheta"),
        "d_step": opts.get("dstep"),
        "scales": _float_list(scales) if scales else None,
        "alpha": opts.get("alpha"),
        "tau": opts.get("tau"),
        "beta": opts.get("beta"),
        "workers": opts.get("workers"),
    }


def load_config(path) -> dict:
    """Read a ``key: value`` config document; keys use the long flag names."""
    if not path:
        return {}
    try:
        data = yaml.safe_load(Path(path).read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise InputError(f"config {path} must be a key/value document")
    return {str(k).replace("-", "_"): v for k, v in data.items()}


def resolve(args: argparse.Namespace, keys) -> dict:
    """Flags override the config file, which overrides built-in defaults."""
    cfg = load_config(getattr(args, "config", None))
    out = {}
    for k in keys:
        flag = getattr(args, k, None)
        if flag is not None:
            out[k] = flag
        elif k in cfg:
            typ = METHOD_OPTIONS.get(k, (None,))[0]
            out[k] = typ(cfg[k]) if typ and cfg[k] is not None else cfg[k]
        else:
            out[k] = METHOD_OPTIONS.get(k, (None, None))[1]
    return out


def _add_method_flags(p):
    p.add_argument("--dmax", type=int, help="bowler-hat: largest structuring element size (px)")
    p.add_argument("--ntheta", type=int, help="bowler-hat: number of line orientations")
    p.add_argument("--dstep", type=int, help="bowler-hat: step between sizes")
    p.add_argument("--scales", help="Hessian methods: comma separated sigmas")
    p.add_argument("--alpha", type=float, help="neuriteness alpha")
    p.add_argument("--tau", type=float, help="Jerman cut-off in (0, 1]")
    p.add_argument("--beta", type=float, help="Frangi beta")
    p.add_argument("--workers", type=int, help="threads (results do not depend on it)")
    p.add_argument("--config", help="key: value file with defaults for these flags")


def _add_input_flags(p):
    p.add_argument("--polarity", choices=("bright", "dark", "auto"), default=None)
    p.add_argument("--channel", choices=("green", "luma"), default="green")


# -- enhance -----------------------------------------------------------------


def cmd_enhance(args) -> int:
    opts = resolve(args, list(METHOD_OPTIONS) + ["polarity"])
    fov = load_mask(args.fov) if args.fov else None
    img = load_image(args.input, polarity=opts["polarity"] or "bright", channel=args.channel, fov=fov)
    t0 = time.perf_counter()
    out = enhance(img, args.method, **method_params(opts))
    elapsed = time.perf_counter() - t0
    save_image16(args.out, out)
    print(f"{args.method}: {img.shape[1]}x{img.shape[0]} enhanced in {elapsed:.3f} s -> {args.out}")
    return EXIT_OK


# -- dataset evaluation --------------------------------------------------------


def _fill_outside(img, fov):
    if fov is None or not fov.any():
        return img
    out = img.copy()
    out[~fov] = np.median(img[fov])
    return out


def _metrics_dict(c):
    m = se_sp_acc(c)
    return {"tp": c.tp, "fp": c.fp, "tn": c.tn, "fn": c.fn, "se": m.se, "sp": m.sp, "acc": m.acc}


def evaluate_sample(sample, methods, opts, use_fov, n_thresholds, window, offset):
    fov = load_mask(sample.fov) if (use_fov and sample.fov) else None
    truth = load_mask(sample.truth)
    img = load_image(sample.image, polarity=opts["polarity"] or "auto", channel=opts["channel"], fov=fov)
    if truth.shape != img.shape:
        raise InputError(f"{sample.key}: ground truth shape {truth.shape} != image shape {img.shape}")
    img = _fill_outside(img, fov)
    rows = []
    for m in methods:
        score = enhance(img, m, **method_params(opts))
        roc = roc_auc(score, truth, fov, n_thresholds)
        seg = local_threshold(score, window, offset)
        counts = confusion(seg, truth, fov)
        valid = fov if fov is not None else np.ones_like(truth)
        rows.append(
            {
                "method": m,
                "image": sample.key,
                "auc": roc.auc,
                "counts": counts,
                "roc": roc,
                "scores": score[valid],
                "truth": truth[valid],
            }
        )
    return rows


def cmd_dataset_eval(args) -> int:
    opts = resolve(args, list(METHOD_OPTIONS) + ["polarity"])
    opts["channel"] = args.channel
    methods = args.methods
    for m in methods:
        if m not in METHODS:
            raise InputError(f"unknown method {m!r}; choose from {', '.join(METHODS)}")
    layout = DatasetLayout.discover(args.root, args.kind)
    for key, reason in layout.skipped:
        log.warning("skipping %s: %s", key, reason)
    out_dir = Path(args.out)
    (out_dir / "roc").mkdir(parents=True, exist_ok=True)
    use_fov = args.fov != "all"

    def job(sample):
        return evaluate_sample(sample, methods, opts, use_fov, args.thresholds, args.window, args.offset)

    workers = max(1, int(args.jobs or 1))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, layout.samples))
    else:
        results = [job(s) for s in layout.samples]
    # stable order: by image key, then by requested method order
    flat = sorted((r for rows in results for r in rows), key=lambda r: (r["image"], methods.index(r["method"])))

    per_image = []
    for r in flat:
        (out_dir / "roc" / f"{r['method']}_{r['image']}.csv").write_text(r["roc"].to_csv())
        entry = {"method": r["method"], "image": r["image"], "auc": r["auc"]}
        entry.update(_metrics_dict(r["counts"]))
        per_image.append(entry)

    pooled = {}
    for m in methods:
        rows = [r for r in flat if r["method"] == m]
        if not rows:
            continue
        total = rows[0]["counts"]
        for r in rows[1:]:
            total = total + r["counts"]
        aucs = [r["auc"] for r in rows if r["auc"] is not None]
        roc = roc_auc(
            np.concatenate([r["scores"] for r in rows])[None, :],
            np.concatenate([r["truth"] for r in rows])[None, :],
            n_thresholds=args.thresholds,
        )
        (out_dir / "roc" / f"{m}_pooled.csv").write_text(roc.to_csv())
        means = {}
        for k in ("se", "sp", "acc"):
            vals = [e[k] for e in per_image if e["method"] == m and e[k] is not None]
            means[f"mean_{k}"] = float(np.mean(vals)) if vals else None
        pooled[m] = {
            "images": len(rows),
            "mean_auc": float(np.mean(aucs)) if aucs else None,
            "pooled_auc": roc.auc,
            **_metrics_dict(total),
            **means,
        }

    summary = {
        "version": __version__,
        "dataset": {"root": str(layout.root), "kind": layout.kind, "images": len(layout.samples)},
        "fov": "mask" if use_fov else "all",
        "thresholder": {"kind": "windowed-mean local threshold (substituted)", "window": args.window, "offset": args.offset},
        "n_thresholds": args.thresholds,
        "skipped": [{"image": k, "reason": why} for k, why in layout.skipped],
        "per_image": per_image,
        "pooled": pooled,
    }
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    for m, p in pooled.items():
        print(f"{m}: mean AUC {p['mean_auc']}, pooled SE {p['se']}, SP {p['sp']}, ACC {p['acc']}")
    return EXIT_OK


# -- synthetic scenes ----------------------------------------------------------


def cmd_synth(args) -> int:
    if args.spec:
        try:
            data = yaml.safe_load(Path(args.spec).read_text())
        except (OSError, yaml.YAMLError) as exc:
            raise InputError(f"cannot read scene spec {args.spec}: {exc}") from exc
        if not isinstance(data, dict):
            raise InputError("malformed scene spec: expected a key/value document")
        scene = SceneSpec.from_dict(data)
    else:
        scene = preset(args.preset, args.size)
    img, mask = render(scene)
    side = {"scene": scene.to_dict()}
    if args.illum_strength:
        img = uneven_illumination(img, args.illum_direction, args.illum_strength)
        side["illumination"] = {"direction": args.illum_direction, "strength": args.illum_strength}
    if args.target_psnr is not None:
        img, achieved, level = noise_for_target_psnr(img, args.noise, args.target_psnr, seed=args.seed)
        side["noise"] = {
            "kind": args.noise,
            "seed": args.seed,
            "target_psnr": args.target_psnr,
            "achieved_psnr": achieved,
            "level": level,
        }
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_image16(out / "image.png", img)
    save_mask(out / "mask.png", mask)
    (out / "scene.json").write_text(json.dumps(side, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {out / 'image.png'} and {out / 'mask.png'}")
    return EXIT_OK


def cmd_profile(args) -> int:
    img = read_raw(args.input)
    if img.ndim == 3:
        img = img[..., 0]
    values = extract_profile(as_raster(img), args.row)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "value"])
        for x, v in enumerate(values.tolist()):
            w.writerow([x, repr(v)])
    print(f"wrote {len(values)} samples to {args.out}")
    return EXIT_OK


def cmd_noise_curve(args) -> int:
    opts = resolve(args, list(METHOD_OPTIONS))
    scene = preset(args.preset, args.size)
    params = method_params(opts)
    rows = auc_vs_noise_curve(scene, lambda im: enhance(im, args.method, **params), args.noise, args.targets, args.seed)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["psnr_db", "auc"])
        for db, auc in rows:
            w.writerow([db, auc])
    print(f"wrote {len(rows)} rows to {args.out}")
    return EXIT_OK


# -- entry point -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vesselkit", description="Vessel enhancement and evaluation toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("enhance", help="enhance one image")
    p.add_argument("input")
    p.add_argument("--method", required=True, choices=METHODS)
    p.add_argument("--out", required=True, help="output 16-bit PNG")
    p.add_argument("--fov", help="FOV mask (used by --polarity auto)")
    _add_method_flags(p)
    _add_input_flags(p)
    p.set_defaults(func=cmd_enhance)

    p = sub.add_parser("dataset-eval", help="AUC and SE/SP/ACC over a dataset")
    p.add_argument("root")
    p.add_argument("--kind", choices=("drive", "stare", "hrf", "flat"), default="drive")
    p.add_argument("--method", dest="methods", action="append", help="repeatable; default bowlerhat")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--fov", choices=("mask", "all"), default="mask", help="evaluate inside FOV masks or on all pixels")
    p.add_argument("--thresholds", type=int, default=256)
    p.add_argument("--window", type=int, default=25, help="local threshold window (px)")
    p.add_argument(
        "--offset",
        type=float,
        default=-0.03,
        help="local threshold offset; foreground where score > local mean - offset",
    )
    p.add_argument("--jobs", type=int, default=1, help="images processed in parallel")
    _add_method_flags(p)
    _add_input_flags(p)
    p.set_defaults(func=cmd_dataset_eval)

    p = sub.add_parser("synth", help="render a synthetic scene and its mask")
    p.add_argument("--preset", choices=PRESETS, default="cross")
    p.add_argument("--spec", help="scene spec file (YAML key/value)")
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--noise", choices=NOISE_KINDS, default="gaussian")
    p.add_argument("--target-psnr", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--illum-strength", type=float, default=0.0)
    p.add_argument("--illum-direction", type=float, default=0.0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("profile", help="write one image row as CSV")
    p.add_argument("input")
    p.add_argument("--row", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("noise-curve", help="AUC versus PSNR on a synthetic preset")
    p.add_argument("--method", choices=METHODS, default="bowlerhat")
    p.add_argument("--preset", choices=PRESETS, default="vessel")
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--noise", choices=NOISE_KINDS, default="gaussian")
    p.add_argument("--targets", type=_float_list, default=[25.0, 20.0, 15.0])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_method_flags(p)
    p.set_defaults(func=cmd_noise_curve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if getattr(args, "methods", None) is None and args.command == "dataset-eval":
        args.methods = ["bowlerhat"]
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, DatasetError) as exc:
        print(f"vesselkit: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"vesselkit: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
