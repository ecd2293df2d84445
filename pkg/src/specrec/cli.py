"""Command-line interface.

Subcommands: mask-gen, simulate, reconstruct, metrics, compare, export.
Exit codes: 0 success, 1 data/configuration error (one-line diagnostic on
stderr), 2 usage error. Flags override values from an optional JSON
config file; config values override built-in defaults.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import io as sio
from .core import Image2D, Region, SolverParams, SpectralCube, extract_band, normalize_cube
from .csc import ConvDictionary
from .forward import Measurement, add_noise, build_system, forward, generate_mask
from .metrics import compute_report
from .pipeline import (
    CompareFixture,
    CompareScene,
    Method,
    compare_methods,
    reconstruct,
    write_compare_csv,
)
from .synthetic import dct_dictionary, get_scene, synthetic_cube

PARAM_FIELDS = [f.name for f in dataclasses.fields(SolverParams)]
BUILTIN_DICT = "builtin:dct"


class CliError(Exception):
    """User-facing error: printed as one line, exit code 1."""


def _load_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            config = json.load(fh)
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CliError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise CliError(f"config {path} must hold a JSON object")
    return config


def _merge_params(args, config: dict) -> SolverParams:
    """defaults < config values < command-line flags."""
    values = {}
    for name in PARAM_FIELDS:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
        elif name in config:
            values[name] = config[name]
    try:
        return SolverParams(**values)
    except (TypeError, ValueError) as exc:
        raise CliError(f"bad solver parameters: {exc}") from exc


def _setting(args, config: dict, name: str, default=None, required_flag=None):
    value = getattr(args, name, None)
    if value is None:
        value = config.get(name, default)
    if value is None and required_flag:
        raise CliError(f"missing required option {required_flag}")
    return value


def _add_param_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("solver parameters")
    group.add_argument("--beta", type=float)
    group.add_argument("--rho", type=float)
    group.add_argument("--kappa", type=float)
    group.add_argument("--outer-iters", dest="outer_iters", type=int)
    group.add_argument("--inner-iters", dest="inner_iters", type=int)
    group.add_argument("--tv-iters", dest="tv_iters", type=int)
    group.add_argument("--lowpass-weight", dest="lowpass_weight", type=float)
    group.add_argument("--gram-epsilon", dest="gram_epsilon", type=float)
    group.add_argument("--noise-sigma", dest="noise_sigma", type=float)


def _load_cube_any(path: str) -> SpectralCube:
    p = Path(path)
    if p.is_dir():
        return sio.load_cube_dir(p)
    obj = sio.load_raw(p)
    if not isinstance(obj, SpectralCube):
        raise CliError(f"{path} is not a cube container")
    return obj


def _load_dictionary_opt(spec: str) -> ConvDictionary:
    if spec == BUILTIN_DICT:
        return dct_dictionary()
    if spec.startswith("builtin:"):
        raise CliError(f"unknown builtin dictionary {spec!r} (only {BUILTIN_DICT})")
    return sio.load_dictionary(spec)


def _cmd_mask_gen(args) -> int:
    config = _load_config(args.config)
    width = int(_setting(args, config, "width", required_flag="--width"))
    height = int(_setting(args, config, "height", required_flag="--height"))
    seed = int(_setting(args, config, "seed", 0))
    density = float(_setting(args, config, "density", 0.5))
    mask = generate_mask(width, height, seed, density)
    sio.save_raw(mask, args.output)
    print(f"wrote mask {width}x{height} (seed={seed}, density={density}) to {args.output}")
    return 0


def _cmd_simulate(args) -> int:
    config = _load_config(args.config)
    params = _merge_params(args, config)
    cube_path = _setting(args, config, "cube", required_flag="--cube")
    mask_path = _setting(args, config, "mask", required_flag="--mask")
    shear = int(_setting(args, config, "shear_step", 1))
    noise_seed = int(_setting(args, config, "noise_seed", 0))
    cube = normalize_cube(_load_cube_any(cube_path))
    mask_obj = sio.load_raw(mask_path)
    if isinstance(mask_obj, sio.SystemMasks):
        base = Image2D(mask_obj.planes[0])
    elif isinstance(mask_obj, Image2D):
        base = mask_obj
    else:
        raise CliError(f"{mask_path} is not a mask container")
    system = build_system(base, cube.bands, shear)
    y = forward(system, cube)
    if params.noise_sigma > 0:
        y = add_noise(y, params.noise_sigma, noise_seed)
    sio.save_raw(y, args.output)
    print(f"wrote measurement {y.height}x{y.width} to {args.output}")
    return 0


def _cmd_reconstruct(args) -> int:
    config = _load_config(args.config)
    params = _merge_params(args, config)
    measurement_path = _setting(args, config, "measurement", required_flag="--measurement")
    mask_path = _setting(args, config, "mask", required_flag="--mask")
    bands = _setting(args, config, "bands", required_flag="--bands")
    shear = int(_setting(args, config, "shear_step", 1))
    method = Method.from_string(_setting(args, config, "method", "csc-tv"))

    dictionary = None
    if method is not Method.GAP_TV_ONLY:
        dict_spec = _setting(args, config, "dictionary")
        if dict_spec is None:
            raise CliError(
                f"method {method.value} requires --dictionary (path or {BUILTIN_DICT})"
            )
        dictionary = _load_dictionary_opt(dict_spec)

    y = sio.load_measurement(measurement_path)
    mask_obj = sio.load_raw(mask_path)
    if isinstance(mask_obj, sio.SystemMasks):
        base = Image2D(mask_obj.planes[0])
    elif isinstance(mask_obj, Image2D):
        base = mask_obj
    else:
        raise CliError(f"{mask_path} is not a mask container")
    system = build_system(base, int(bands), shear)

    truth = None
    truth_path = _setting(args, config, "ground_truth")
    if truth_path is not None:
        truth = normalize_cube(_load_cube_any(truth_path))

    cube, trace = reconstruct(system, y, dictionary, params, method, truth)
    sio.save_raw(cube, args.output)
    if args.trace is not None:
        trace.to_csv(args.trace)
    final = trace.records[-1]
    line = f"reconstructed {cube.bands} bands with {method.value}; fidelity {final.fidelity:.4g}"
    if final.psnr is not None:
        line += f", psnr {final.psnr:.2f} dB"
    print(line + f"; cube written to {args.output}")
    return 0


def _parse_regions(path: Optional[str]) -> list[Optional[Region]]:
    if path is None:
        return [None]
    try:
        with open(path, "r", encoding="utf-8") as fh:
            entries = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read regions file {path}: {exc}") from exc
    if not isinstance(entries, list) or not entries:
        raise CliError(f"regions file {path} must hold a non-empty JSON list")
    regions = []
    for entry in entries:
        try:
            regions.append(Region(entry["x0"], entry["y0"], entry["w"], entry["h"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise CliError(f"bad region entry {entry!r}: {exc}") from exc
    return regions


def _cmd_metrics(args) -> int:
    recon = _load_cube_any(args.recon)
    reference = _load_cube_any(args.reference)
    regions = _parse_regions(args.regions)
    lines = ["region,psnr_db,ssim,sam_rad"]
    for idx, region in enumerate(regions):
        report = compute_report(recon, reference, region)
        name = "full" if region is None else f"region{idx}"
        lines.append(f"{name},{report.to_csv_row()}")
    text = "\n".join(lines) + "\n"
    if args.output is not None:
        Path(args.output).write_text(text)
    print(text, end="")
    return 0


def _cmd_compare(args) -> int:
    config = _load_config(args.config)
    if not config:
        raise CliError("compare requires --config with scenes and methods")
    scene_entries = config.get("scenes")
    if not scene_entries:
        raise CliError("config must list at least one scene")
    scenes = []
    for entry in scene_entries:
        name = entry.get("name")
        if not name:
            raise CliError(f"scene entry missing 'name': {entry!r}")
        if "synthetic" in entry:
            spec = entry["synthetic"]
            cube = (
                get_scene(spec)
                if isinstance(spec, str)
                else synthetic_cube(*(int(v) for v in spec))
            )
        elif "cube" in entry:
            cube = _load_cube_any(entry["cube"])
        else:
            raise CliError(f"scene {name!r} needs either 'synthetic' or 'cube'")
        scenes.append(CompareScene(name, cube))

    method_names = config.get("methods") or [m.value for m in Method]
    methods = [Method.from_string(m) for m in method_names]
    params_cfg = {k: v for k, v in config.items() if k in PARAM_FIELDS}
    try:
        params = SolverParams(**params_cfg)
    except (TypeError, ValueError) as exc:
        raise CliError(f"bad solver parameters: {exc}") from exc

    dict_spec = config.get("dictionary", BUILTIN_DICT)
    needs_dict = any(m is not Method.GAP_TV_ONLY for m in methods)
    dictionary = _load_dictionary_opt(dict_spec) if needs_dict else None

    fixture = CompareFixture(
        scenes=tuple(scenes),
        mask_seed=int(config.get("seed", 7)),
        density=float(config.get("density", 0.5)),
        shear_step=int(config.get("shear_step", 1)),
        params=params,
        noise_seed=int(config.get("noise_seed", 0)),
    )

    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def sink(scene_name, method, cube):
        sio.save_raw(cube, out_dir / f"{scene_name}-{method.value}.spr")

    rows = compare_methods(fixture, methods, dictionary, timing=args.timing, cube_sink=sink)
    csv_path = out_dir / "compare.csv"
    write_compare_csv(rows, csv_path)
    print(f"wrote {len(rows)} rows to {csv_path}")
    return 0


def _cmd_export(args) -> int:
    obj = sio.load_raw(args.input)
    if isinstance(obj, Image2D):
        if args.band is not None or args.rgb_bands is not None:
            raise CliError("--band/--rgb-bands apply to cube containers only")
        sio.export_png(obj, args.output)
    elif isinstance(obj, SpectralCube):
        if args.rgb_bands is not None:
            try:
                r, g, b = (int(v) for v in args.rgb_bands.split(","))
            except ValueError as exc:
                raise CliError(f"--rgb-bands wants 'R,G,B' indices: {exc}") from exc
            sio.export_png_rgb(
                extract_band(obj, r), extract_band(obj, g), extract_band(obj, b),
                args.output,
            )
        else:
            band = args.band if args.band is not None else 0
            sio.export_png(extract_band(obj, band), args.output)
    else:
        raise CliError(f"{args.input} holds a {type(obj).__name__}; export a cube or image")
    print(f"wrote {args.output}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specrec",
        description="Snapshot compressive spectral imaging: simulation and reconstruction",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mask-gen", help="generate a random binary coding mask")
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--density", type=float)
    p.add_argument("--config")
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_mask_gen)

    p = sub.add_parser("simulate", help="code a cube into a 2-D measurement")
    p.add_argument("--cube", help="cube container or directory of 16-bit PNG bands")
    p.add_argument("--mask")
    p.add_argument("--shear-step", dest="shear_step", type=int)
    p.add_argument("--noise-seed", dest="noise_seed", type=int)
    p.add_argument("--config")
    p.add_argument("--output", required=True)
    _add_param_flags(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("reconstruct", help="recover a cube from a measurement")
    p.add_argument("--measurement")
    p.add_argument("--mask")
    p.add_argument("--bands", type=int)
    p.add_argument("--shear-step", dest="shear_step", type=int)
    p.add_argument("--dictionary", help=f"kernel container path or {BUILTIN_DICT}")
    p.add_argument("--method", choices=[m.value for m in Method])
    p.add_argument("--ground-truth", dest="ground_truth")
    p.add_argument("--trace", help="write per-iteration trace CSV here")
    p.add_argument("--config")
    p.add_argument("--output", required=True)
    _add_param_flags(p)
    p.set_defaults(func=_cmd_reconstruct)

    p = sub.add_parser("metrics", help="score a reconstruction against a reference")
    p.add_argument("--recon", required=True)
    p.add_argument("--reference", required=True)
    p.add_argument("--regions", help="JSON list of {x0,y0,w,h} regions for SAM")
    p.add_argument("--output")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("compare", help="benchmark methods over scenes from a config")
    p.add_argument("--config", required=True)
    p.add_argument("--output-dir", dest="output_dir", required=True)
    p.add_argument(
        "--timing",
        action="store_true",
        help="record wall time (off by default so outputs are byte-reproducible)",
    )
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("export", help="render a container to PNG")
    p.add_argument("--input", required=True)
    p.add_argument("--band", type=int)
    p.add_argument("--rgb-bands", dest="rgb_bands", help="three band indices 'R,G,B'")
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_export)
    return parser


def run_cli(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except (CliError, sio.FormatError, ValueError, IndexError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())
