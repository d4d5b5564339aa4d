"""Command-line front end: ``crisp {synth,refine,pick,tune,eval,fsc}``.

Settings are merged as built-in defaults < ``--config`` file < flags given
on the command line.  The config file is a flat YAML or JSON mapping whose
keys are the long option names of the subcommand (dashes or underscores);
unknown keys are rejected.  Every run writes the effective settings next to
its outputs.

Exit codes: 0 success, 2 configuration or input error, 3 I/O error,
4 numerical failure.  Failures print one line to stderr of the form
``crisp: error code=N kind=KIND reason="..."``.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .core import CrispError, Image2D, LabelMask, NumericalError, PickSet, Volume3D, binarize
from .io import (MrcFormatError, StarFormatError, read_mrc, read_mrc_stack, read_star, write_csv,
                 write_mrc, write_mrc_array, write_star)

log = logging.getLogger("crisp")

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_NUMERICAL = 0, 2, 3, 4
SIDECAR_SUFFIX = ".config.json"


class ConfigError(CrispError):
    """Invalid or incomplete settings."""


@dataclass(frozen=True)
class Opt:
    name: str
    type: type
    default: object
    help: str
    nargs: str | None = None
    choices: tuple | None = None
    output: bool = False


def _flag(value: str) -> bool:
    v = str(value).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


# Reference table of every option and its default.
OPTIONS: dict[str, tuple[Opt, ...]] = {
    "synth": (
        Opt("volume", str, None, "density MRC to project; a solid sphere is used when omitted"),
        Opt("sphere-box", int, 32, "box size of the built-in sphere volume"),
        Opt("sphere-radius", float, 10.0, "radius of the built-in sphere volume"),
        Opt("count", int, 5, "number of micrographs"),
        Opt("size", int, 512, "micrograph side in pixels"),
        Opt("particles", int, 50, "particles per micrograph"),
        Opt("snr", float, 0.005, "target signal-to-noise variance ratio"),
        Opt("defocus", float, [1.0, 1.5, 2.0, 2.5], "defocus pool in micrometres", nargs="+"),
        Opt("min-separation", float, None, "minimum center distance (default: volume box)"),
        Opt("ctf", _flag, True, "apply a contrast transfer function"),
        Opt("voltage", float, 300.0, "accelerating voltage in kV"),
        Opt("cs", float, 2.7, "spherical aberration in mm"),
        Opt("amplitude-contrast", float, 0.1, "amplitude contrast fraction"),
        Opt("out", str, None, "output directory", output=True),
    ),
    "refine": (
        Opt("prob", str, None, "probability-map MRC"),
        Opt("image", str, None, "micrograph MRC for the intensity appearance kernel"),
        Opt("features", str, None, "per-pixel feature MRC stack (d, h, w)"),
        Opt("truth", str, None, "optional label MRC; logs IoU before and after"),
        Opt("out", str, None, "refined probability-map MRC", output=True),
        Opt("solver", str, "frankwolfe", "inference algorithm", choices=("meanfield", "frankwolfe")),
        Opt("iters", int, 5, "solver iterations"),
        Opt("w0", float, 1.0, "Potts scale"),
        Opt("w-appearance", float, [2e-5, 1e-3], "appearance weight, one value or one per class",
            nargs="+"),
        Opt("w-smoothness", float, [0.1], "smoothness weight, one value or one per class", nargs="+"),
        Opt("alpha", float, 80.0, "appearance spatial bandwidth (px)"),
        Opt("beta", float, 13.0, "appearance range bandwidth"),
        Opt("gamma", float, 3.0, "smoothness bandwidth (px)"),
        Opt("regularizer", float, 1.0, "Frank-Wolfe entropy strength"),
        Opt("epsilon", float, 1e-6, "probability clamp"),
        Opt("patch-size", int, 0, "refine in overlapping patches of this size (0: whole map)"),
        Opt("overlap", int, 64, "patch overlap in pixels"),
    ),
    "pick": (
        Opt("map", str, None, "segmentation or probability MRC"),
        Opt("algorithm", str, "nms", "center finder", choices=("morphology", "crocker_grier", "nms")),
        Opt("diameter", float, None, "expected particle diameter in pixels"),
        Opt("e", float, 0.5, "algorithm-specific e"),
        Opt("s", float, 0.7, "algorithm-specific s"),
        Opt("out", str, None, "output STAR file", output=True),
        Opt("truth", str, None, "ground-truth STAR; writes a metrics report"),
        Opt("report", str, None, "metrics CSV (default: <out>.metrics.csv)", output=True),
        Opt("thresholds", float, None, "IoU thresholds (default 0.5..0.95)", nargs="+"),
    ),
    "tune": (
        Opt("maps", str, None, "ground-truth segmentation MRCs", nargs="+"),
        Opt("truth", str, None, "ground-truth STAR per map", nargs="+"),
        Opt("diameter", float, None, "expected particle diameter in pixels"),
        Opt("algorithms", str, ["morphology", "crocker_grier", "nms"], "algorithms to search",
            nargs="+"),
        Opt("thresholds", float, None, "IoU thresholds (default 0.5..0.95)", nargs="+"),
        Opt("out", str, None, "grid CSV", output=True),
    ),
    "eval": (
        Opt("pred", str, None, "predicted mask or probability MRC"),
        Opt("truth", str, None, "ground-truth label MRC"),
        Opt("threshold", float, 0.5, "binarization threshold for probability maps"),
        Opt("out", str, None, "metrics CSV", output=True),
    ),
    "fsc": (
        Opt("half1", str, None, "first half-map MRC"),
        Opt("half2", str, None, "second half-map MRC"),
        Opt("mask", str, None, "optional mask MRC multiplied into both maps"),
        Opt("threshold", float, 0.143, "FSC threshold"),
        Opt("out", str, None, "curve CSV", output=True),
        Opt("plot", str, None, "optional SVG plot of the curve", output=True),
    ),
}

REQUIRED = {
    "synth": ("out",),
    "refine": ("prob", "out"),
    "pick": ("map", "diameter", "out"),
    "tune": ("maps", "truth", "diameter", "out"),
    "eval": ("pred", "truth", "out"),
    "fsc": ("half1", "half2", "out"),
}


def _key(name: str) -> str:
    return name.replace("-", "_")


def _add_common(parser, defaults: bool):
    """Global options, accepted before or after the subcommand."""
    keep = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
    parser.add_argument("--seed", type=int, default=keep(0), help="master random seed (default 0)")
    parser.add_argument("--threads", type=int, default=keep(None),
                        help="worker threads (default: $CRISP_THREADS or 1)")
    parser.add_argument("--log-level", default=keep("INFO"),
                        choices=("DEBUG", "INFO", "WARNING", "ERROR"))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="crisp", description="Particle segmentation and picking tools.")
    parser.add_argument("--version", action="version", version=f"crisp {__version__}")
    _add_common(parser, defaults=True)
    sub = parser.add_subparsers(dest="command", required=True)
    for command, opts in OPTIONS.items():
        p = sub.add_parser(command, help=(COMMANDS[command].__doc__ or "").strip().splitlines()[0])
        _add_common(p, defaults=False)
        p.add_argument("--config", default=None, help="YAML or JSON file of option values")
        for opt in opts:
            default = "" if opt.default is None else f" (default: {opt.default})"
            p.add_argument(f"--{opt.name}", dest=_key(opt.name), type=opt.type, nargs=opt.nargs,
                           choices=opt.choices, default=argparse.SUPPRESS, help=opt.help + default)
    return parser


def _coerce(opt: Opt, value):
    try:
        if opt.nargs:
            items = value if isinstance(value, (list, tuple)) else [value]
            out = [opt.type(v) for v in items]
            if opt.choices and any(v not in opt.choices for v in out):
                raise ValueError(f"choose from {opt.choices}")
            return out
        if isinstance(value, (list, dict)):
            raise ValueError("expected a single value")
        out = opt.type(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {opt.name}: {value!r} ({exc})") from None
    if opt.choices and out not in opt.choices:
        raise ConfigError(f"bad value for {opt.name}: {out!r}, choose from {opt.choices}")
    return out


def load_config_file(path) -> dict:
    text = Path(path).read_text()
    data = json.loads(text) if str(path).endswith(".json") else yaml.safe_load(text)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a mapping")
    return data


def effective_settings(command: str, ns: argparse.Namespace) -> dict:
    opts = {_key(o.name): o for o in OPTIONS[command]}
    settings = {k: o.default for k, o in opts.items()}
    if ns.config:
        for raw_key, value in load_config_file(ns.config).items():
            key = _key(str(raw_key))
            if key not in opts:
                raise ConfigError(f"unknown config key {raw_key!r} for {command}")
            settings[key] = None if value is None else _coerce(opts[key], value)
    for key in opts:
        if key in vars(ns):
            settings[key] = getattr(ns, key)
    missing = [name for name in REQUIRED[command] if settings[_key(name)] in (None, [])]
    if missing:
        raise ConfigError(f"{command}: missing required option(s) --{', --'.join(missing)}")
    return settings


def write_sidecar(command: str, settings: dict, seed: int, target) -> Path:
    """Echo the effective settings beside ``target``; output paths are reduced to file names."""
    outputs = {_key(o.name) for o in OPTIONS[command] if o.output}
    echoed = {k: (os.path.basename(os.path.normpath(v)) if k in outputs and v else v)
              for k, v in settings.items()}
    record = {"command": command, "version": __version__, "seed": seed, "settings": echoed}
    path = Path(str(target) + SIDECAR_SUFFIX) if not Path(target).is_dir() \
        else Path(target) / ("effective" + SIDECAR_SUFFIX)
    path.write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")
    return path


def _threads(ns) -> int:
    value = ns.threads if ns.threads is not None else os.environ.get("CRISP_THREADS", "1")
    try:
        n = int(value)
    except ValueError:
        raise ConfigError(f"CRISP_THREADS must be an integer, got {value!r}") from None
    if n < 1:
        raise ConfigError("thread count must be >= 1")
    return n


def _read_image(path) -> Image2D:
    obj = read_mrc(path)
    if not isinstance(obj, Image2D):
        raise ConfigError(f"{path} holds a volume, expected a 2D image")
    return obj


def _read_volume(path) -> Volume3D:
    obj = read_mrc(path)
    if not isinstance(obj, Volume3D):
        raise ConfigError(f"{path} holds a 2D image, expected a cubic volume")
    return obj


def cmd_synth(s: dict, seed: int, threads: int) -> int:
    """Generate synthetic micrographs, label masks and ground-truth coordinates."""
    from .synth import CtfParams, SynthConfig, generate_micrograph, sphere_volume

    if s["volume"]:
        vol = _read_volume(s["volume"])
    else:
        vol = sphere_volume(s["sphere_box"], s["sphere_radius"])
    ctf = CtfParams(s["voltage"], s["cs"], s["amplitude_contrast"]) if s["ctf"] else None
    try:
        cfg = SynthConfig(size=s["size"], particles=s["particles"], snr=s["snr"],
                          defocus_pool=tuple(s["defocus"]), seed=seed,
                          min_separation=s["min_separation"], ctf=ctf)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if s["count"] < 1:
        raise ConfigError("count must be >= 1")
    out = Path(s["out"])
    out.mkdir(parents=True, exist_ok=True)

    def one(i):
        return generate_micrograph(vol, cfg, i)

    with ThreadPoolExecutor(threads) as pool:
        results = list(pool.map(one, range(s["count"])))
    rows = []
    for i, m in enumerate(results):
        stem = f"micrograph_{i:03d}"
        write_mrc(m.noisy, out / f"{stem}.mrc")
        write_mrc_array(m.labels.labels, out / f"labels_{i:03d}.mrc", m.noisy.pixel_size)
        write_star(PickSet(m.centers, vol.side, vol.side), f"{stem}.mrc", out / f"particles_{i:03d}.star")
        rows.append([i, f"{stem}.mrc", f"labels_{i:03d}.mrc", f"particles_{i:03d}.star",
                     len(m.centers), s["snr"], m.snr, "" if m.defocus is None else m.defocus,
                     m.threshold])
    write_csv(out / "manifest.csv", ["index", "micrograph", "labels", "star", "particles",
                                     "snr_target", "snr_measured", "defocus_um", "li_threshold"], rows)
    write_sidecar("synth", s, seed, out)
    log.info("wrote %d micrographs to %s", len(results), out)
    return EXIT_OK


def _stack_features(path, shape):
    stack, _ = read_mrc_stack(path)
    if stack.shape[1:] != tuple(shape):
        raise ConfigError(f"feature stack {stack.shape[1:]} does not match map {tuple(shape)}")
    return np.moveaxis(stack, 0, -1).astype(np.float64)


def _iou(mask, truth) -> float:
    from .metrics import confusion, pixel_metrics

    return pixel_metrics(confusion(mask, truth)).iou


def cmd_refine(s: dict, seed: int, threads: int) -> int:
    """Refine a probability map with a dense CRF."""
    from .core import ProbabilityMap
    from .crf import CrfConfig, refine
    from .patchwork import extract_patches, stitch_array

    prob_img = _read_image(s["prob"])
    try:
        prob = ProbabilityMap(prob_img.data, prob_img.pixel_size)
    except ValueError as exc:
        raise ConfigError(f"{s['prob']}: {exc}") from None
    image = _read_image(s["image"]) if s["image"] else None
    feats = _stack_features(s["features"], prob.shape) if s["features"] else None
    if image is not None and image.shape != prob.shape:
        raise ConfigError(f"image shape {image.shape} does not match map {prob.shape}")
    if image is None and feats is None:
        image = prob_img
    wa, ws = s["w_appearance"], s["w_smoothness"]
    try:
        cfg = CrfConfig(solver=s["solver"], iterations=s["iters"], w0=s["w0"],
                        w_appearance=tuple(wa), w_smoothness=tuple(ws), alpha=s["alpha"],
                        beta=s["beta"], gamma=s["gamma"], regularizer=s["regularizer"],
                        epsilon=s["epsilon"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    size = s["patch_size"]
    if size and max(prob.shape) > size:
        grid = extract_patches(prob, size, s["overlap"])
        img_grid = extract_patches(image, size, s["overlap"]) if image is not None else None
        feat_grids = None
        if feats is not None:
            feat_grids = [extract_patches(Image2D(feats[:, :, k]), size, s["overlap"])
                          for k in range(feats.shape[2])]

        def one(idx):
            p = ProbabilityMap(grid.patches[idx][0], prob.pixel_size)
            im = Image2D(img_grid.patches[idx][0]) if img_grid is not None else None
            f = None
            if feat_grids is not None:
                f = np.stack([g.patches[idx][0] for g in feat_grids], axis=2)
            return refine(p, im, f, cfg).data

        with ThreadPoolExecutor(threads) as pool:
            refined = list(pool.map(one, range(len(grid))))
        out_data = np.clip(stitch_array(grid.with_patches(refined)), 0.0, 1.0)
        result = ProbabilityMap(out_data, prob.pixel_size)
    else:
        result = refine(prob, image, feats, cfg)
    if s["truth"]:
        truth = LabelMask(_read_image(s["truth"]).data.astype(np.uint8))
        before = _iou(binarize(prob, 0.5), truth)
        after = _iou(binarize(result, 0.5), truth)
        log.info("IoU before %.4f after %.4f (change %+.4f)", before, after, after - before)
    write_mrc(result, s["out"])
    write_sidecar("refine", s, seed, s["out"])
    return EXIT_OK


def _gt_pickset(path, diameter) -> PickSet:
    return read_star(path).to_pickset(diameter)


def _metrics_header(thresholds):
    return ["mAP", *[f"AP@{t:g}" for t in thresholds], "precision", "recall", "f1", "n_gt", "n_pred"]


def _metrics_row(res, thresholds):
    return [res.mAP, *[res.ap[t] for t in thresholds], res.precision, res.recall, res.f1,
            res.n_gt, res.n_pred]


def cmd_pick(s: dict, seed: int, threads: int) -> int:
    """Find particle centers with one picker configuration."""
    from .picker import DEFAULT_THRESHOLDS, PickerConfig, evaluate_map

    data = read_mrc(s["map"])
    if not isinstance(data, Image2D):
        raise ConfigError(f"{s['map']} is not a 2D map")
    try:
        picks = PickerConfig(s["algorithm"], s["diameter"], s["e"], s["s"]).run(data)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if len(picks) == 0:
        raise NumericalError("no particles were picked")
    write_star(picks, Path(s["map"]).name, s["out"])
    outputs = [s["out"]]
    if s["truth"]:
        thresholds = tuple(s["thresholds"] or DEFAULT_THRESHOLDS)
        res = evaluate_map(_gt_pickset(s["truth"], s["diameter"]), picks, thresholds)
        report = s["report"] or str(s["out"]) + ".metrics.csv"
        write_csv(report, _metrics_header(thresholds), [_metrics_row(res, thresholds)])
        outputs.append(report)
        print(f"mAP={res.mAP:.6f} recall={res.recall:.6f} precision={res.precision:.6f}")
    for target in outputs:
        write_sidecar("pick", s, seed, target)
    log.info("picked %d particles", len(picks))
    return EXIT_OK


def cmd_tune(s: dict, seed: int, threads: int) -> int:
    """Search picker algorithms and (e, s) grids for the best mAP."""
    from .picker import DEFAULT_THRESHOLDS, optimize_picker

    if len(s["maps"]) != len(s["truth"]):
        raise ConfigError("--maps and --truth need the same number of files")
    maps = [_read_image(p) for p in s["maps"]]
    gts = [_gt_pickset(p, s["diameter"]) for p in s["truth"]]
    thresholds = tuple(s["thresholds"] or DEFAULT_THRESHOLDS)
    try:
        result = optimize_picker(maps, gts, s["diameter"], tuple(s["algorithms"]),
                                 thresholds=thresholds, threads=threads)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    header = ["algorithm", "e", "s", "n_picks", *_metrics_header(thresholds)]
    rows = [[r.algorithm, r.e, r.s, r.n_picks, *_metrics_row(r.result, thresholds)]
            for r in result.rows]
    write_csv(s["out"], header, rows)
    write_sidecar("tune", s, seed, s["out"])
    print(f"winner algorithm={result.algorithm} e={result.e:g} s={result.s:g} mAP={result.mAP:.6f}")
    return EXIT_OK


def cmd_eval(s: dict, seed: int, threads: int) -> int:
    """Pixel metrics and losses of a predicted mask against ground truth."""
    from .core import ProbabilityMap
    from .metrics import confusion, loss, pixel_metrics

    pred, truth = _read_image(s["pred"]), _read_image(s["truth"])
    if pred.shape != truth.shape:
        raise ConfigError(f"shape mismatch: {pred.shape} vs {truth.shape}")
    gt = binarize(truth, 0.5)
    m = pixel_metrics(confusion(binarize(pred, s["threshold"]), gt))
    header = ["iou", "precision", "recall", "accuracy", "f1", "flags"]
    row = [m.iou, m.precision, m.recall, m.accuracy, m.f1, ";".join(sorted(m.flags))]
    if pred.data.min() >= 0 and pred.data.max() <= 1:
        soft = ProbabilityMap(pred.data)
        for kind in ("dice", "jaccard", "cross_entropy"):
            header.append(f"loss_{kind}")
            row.append(loss(kind, soft, gt))
    write_csv(s["out"], header, [row])
    write_sidecar("eval", s, seed, s["out"])
    print(f"iou={m.iou:.6f} f1={m.f1:.6f}")
    return EXIT_OK


def fsc_svg(curve, threshold, resolution, width=480, height=320) -> str:
    """Minimal SVG line plot of an FSC curve with the threshold marked."""
    pad = 40
    f, c = curve.frequency, curve.correlation
    fmax = curve.nyquist

    def px(x, y):
        return pad + (width - 2 * pad) * x / fmax, height - pad - (height - 2 * pad) * (y + 0.2) / 1.2

    pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in (px(a, b) for a, b in zip(f, c)))
    x0, yt = px(0, threshold)
    x1, _ = px(fmax, threshold)
    _, y_top = px(0, 1.0)
    _, y_bot = px(0, -0.2)
    return "\n".join([
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect x="{pad}" y="{y_top:.2f}" width="{width - 2 * pad}" height="{y_bot - y_top:.2f}" '
        'fill="none" stroke="black"/>',
        f'<line x1="{x0:.2f}" y1="{yt:.2f}" x2="{x1:.2f}" y2="{yt:.2f}" stroke="gray" '
        'stroke-dasharray="4 3"/>',
        f'<polyline points="{pts}" fill="none" stroke="steelblue" stroke-width="2"/>',
        f'<text x="{pad}" y="{pad - 12}" font-size="12">FSC, {threshold:g} crossing at '
        f'{resolution.angstrom:.2f} A{" (Nyquist)" if resolution.at_nyquist else ""}</text>',
        f'<text x="{width / 2:.0f}" y="{height - 8}" font-size="12" text-anchor="middle">'
        'spatial frequency (1/A)</text>',
        "</svg>",
        "",
    ])


def cmd_fsc(s: dict, seed: int, threads: int) -> int:
    """Fourier shell correlation of two half maps and the resolution at a threshold."""
    from .metrics import fsc, resolution_at

    a, b = _read_volume(s["half1"]), _read_volume(s["half2"])
    mask = _read_volume(s["mask"]) if s["mask"] else None
    try:
        curve = fsc(a, b, mask)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    res = resolution_at(curve, s["threshold"])
    rows = [[int(k), f, 1.0 / f, c, bool(fl)]
            for k, f, c, fl in zip(curve.shells, curve.frequency, curve.correlation, curve.flagged)]
    write_csv(s["out"], ["shell", "frequency", "resolution_angstrom", "fsc", "flagged"], rows)
    outputs = [s["out"]]
    if s["plot"]:
        Path(s["plot"]).write_text(fsc_svg(curve, s["threshold"], res))
        outputs.append(s["plot"])
    for target in outputs:
        write_sidecar("fsc", s, seed, target)
    print(f"resolution_angstrom={res.angstrom:.4f} threshold={s['threshold']:g} "
          f"at_nyquist={str(res.at_nyquist).lower()}")
    return EXIT_OK


COMMANDS = {
    "synth": cmd_synth,
    "refine": cmd_refine,
    "pick": cmd_pick,
    "tune": cmd_tune,
    "eval": cmd_eval,
    "fsc": cmd_fsc,
}


def _fail(code: int, kind: str, exc) -> int:
    reason = " ".join(str(exc).split()) or type(exc).__name__
    print(f'crisp: error code={code} kind={kind} reason="{reason}"', file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "config", exc)
    logging.basicConfig(level=ns.log_level, format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr)
    try:
        settings = effective_settings(ns.command, ns)
        threads = _threads(ns)
        return COMMANDS[ns.command](settings, ns.seed, threads)
    except (ConfigError, ValueError, yaml.YAMLError, json.JSONDecodeError) as exc:
        return _fail(EXIT_CONFIG, "config", exc)
    except (OSError, MrcFormatError, StarFormatError) as exc:
        return _fail(EXIT_IO, "io", exc)
    except (NumericalError, CrispError, FloatingPointError, MemoryError) as exc:
        return _fail(EXIT_NUMERICAL, "numerical", exc)


if __name__ == "__main__":
    sys.exit(main())
