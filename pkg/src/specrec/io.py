"""Persistence: the self-describing raw container, PNG export, cube ingestion.

The container is one UTF-8 JSON header line followed by a little-endian
float32 payload in band-major layout. One format serves cubes, single
images, mask stacks, and kernel banks; the ``kind`` field selects the
in-memory type. A JSON first line keeps the files inspectable with
ordinary shell tools.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image

from .core import Image2D, SpectralCube
from .csc import ConvDictionary
from .forward import Measurement, SystemMasks

MAGIC = "SPECREC1"
_KINDS = ("cube", "image", "mask", "dict")
_MAX_ELEMENTS = 1 << 31  # dim overflow guard

RawObject = Union[SpectralCube, Image2D, SystemMasks, ConvDictionary]


class FormatError(ValueError):
    """Raised when a container or image file violates the declared format."""


def _header_and_planes(obj: RawObject):
    if isinstance(obj, SpectralCube):
        return "cube", obj.bands, obj.data
    if isinstance(obj, SystemMasks):
        return "mask", obj.bands, obj.planes
    if isinstance(obj, ConvDictionary):
        return "dict", obj.num_kernels, obj.kernels
    if isinstance(obj, Image2D):  # covers Measurement
        return "image", 1, obj.data[None]
    raise TypeError(f"cannot serialize object of type {type(obj).__name__}")


def save_raw(obj: RawObject, path) -> None:
    """Write any raw-container object; float32 payload, band-major."""
    kind, count, planes = _header_and_planes(obj)
    header = {
        "magic": MAGIC,
        "kind": kind,
        "width": planes.shape[2],
        "height": planes.shape[1],
        "bands_or_kernels": count,
        "dtype": "f32",
        "layout": "band-major",
    }
    with open(path, "wb") as fh:
        fh.write((json.dumps(header) + "\n").encode("utf-8"))
        fh.write(np.ascontiguousarray(planes, dtype="<f4").tobytes())


def load_raw(path) -> RawObject:
    """Read a raw container back into its in-memory type.

    Kernel banks are not renormalized here, so a save/load round trip is
    bitwise at float32 precision for every kind; use
    :func:`load_dictionary` for external kernel files of unknown scaling.
    """
    with open(path, "rb") as fh:
        raw_header = fh.readline()
        if not raw_header.endswith(b"\n"):
            raise FormatError(f"{path}: missing header line terminator")
        try:
            header = json.loads(raw_header.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise FormatError(f"{path}: unparseable header: {exc}") from exc
        if not isinstance(header, dict) or header.get("magic") != MAGIC:
            raise FormatError(
                f"{path}: bad magic {header.get('magic') if isinstance(header, dict) else None!r},"
                f" expected {MAGIC!r}"
            )
        kind = header.get("kind")
        if kind not in _KINDS:
            raise FormatError(f"{path}: unknown kind {kind!r}")
        if header.get("dtype") != "f32":
            raise FormatError(f"{path}: unsupported dtype {header.get('dtype')!r}")
        if header.get("layout") != "band-major":
            raise FormatError(f"{path}: unsupported layout {header.get('layout')!r}")
        try:
            width = int(header["width"])
            height = int(header["height"])
            count = int(header["bands_or_kernels"])
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"{path}: bad dimension fields: {exc}") from exc
        if width < 1 or height < 1 or count < 1:
            raise FormatError(f"{path}: non-positive dimensions {width}x{height}x{count}")
        if width * height * count > _MAX_ELEMENTS:
            raise FormatError(f"{path}: dim overflow ({width}x{height}x{count} elements)")
        expected = width * height * count * 4
        offset = len(raw_header)
        payload = fh.read(expected + 1)
        if len(payload) < expected:
            raise FormatError(
                f"{path}: truncated payload at byte offset {offset}: "
                f"needs {expected} bytes, got {len(payload)}"
            )
        if len(payload) > expected:
            raise FormatError(
                f"{path}: trailing data after byte offset {offset + expected}"
            )
    planes = (
        np.frombuffer(payload, dtype="<f4")
        .reshape(count, height, width)
        .astype(np.float64)
    )
    if kind == "cube":
        return SpectralCube(planes)
    if kind == "image":
        return Image2D(planes[0])
    if kind == "mask":
        return SystemMasks(planes)
    if width != height:
        raise FormatError(f"{path}: dict kernels must be square, got {height}x{width}")
    return ConvDictionary(planes)


def load_measurement(path) -> Measurement:
    obj = load_raw(path)
    if not isinstance(obj, Image2D):
        raise FormatError(f"{path}: expected an image container")
    return Measurement(obj.data)


def load_dictionary(path) -> ConvDictionary:
    """Load a kernel bank, normalizing every kernel to unit norm."""
    with open(path, "rb") as fh:
        header = fh.readline()
    try:
        kind = json.loads(header.decode("utf-8")).get("kind")
    except Exception as exc:
        raise FormatError(f"{path}: unparseable header: {exc}") from exc
    if kind != "dict":
        raise FormatError(f"{path}: expected kind 'dict', got {kind!r}")
    obj = load_raw(path)
    assert isinstance(obj, ConvDictionary)
    return ConvDictionary.from_kernels(obj.kernels)


def load_cube_dir(path) -> SpectralCube:
    """Load a cube from a directory of per-band 16-bit grayscale PNGs.

    Files are taken in sorted filename order as bands; samples map to
    [0, 1] by dividing by 65535.
    """
    directory = Path(path)
    files = sorted(p for p in directory.iterdir() if p.suffix.lower() == ".png")
    if not files:
        raise FormatError(f"{directory}: no PNG band files found")
    planes = []
    for p in files:
        with Image.open(p) as im:
            arr = np.asarray(im)
        if arr.ndim != 2:
            raise FormatError(f"{p}: expected grayscale band, got shape {arr.shape}")
        if arr.dtype not in (np.uint16, np.int32, np.uint8):
            raise FormatError(f"{p}: unsupported sample type {arr.dtype}")
        if arr.dtype == np.uint8:
            raise FormatError(f"{p}: 8-bit band; 16-bit grayscale required")
        if arr.min() < 0 or arr.max() > 65535:
            raise FormatError(f"{p}: samples outside the 16-bit range")
        planes.append(arr.astype(np.float64) / 65535.0)
    shapes = {pl.shape for pl in planes}
    if len(shapes) != 1:
        raise FormatError(f"{directory}: band files have mixed dimensions {sorted(shapes)}")
    return SpectralCube(np.stack(planes))


def _to_u16(data: np.ndarray) -> np.ndarray:
    # Round half up: 0.5 maps to 32768.
    clipped = np.clip(data, 0.0, 1.0)
    return np.floor(clipped * 65535.0 + 0.5).astype(np.uint16)


def export_png(image: Image2D, path) -> None:
    """Write a [0,1]-clamped image as 16-bit grayscale PNG."""
    try:
        Image.fromarray(_to_u16(image.data)).save(path, format="PNG")
    except OSError as exc:
        raise OSError(f"failed writing PNG {path}: {exc}") from exc


def export_png_rgb(red: Image2D, green: Image2D, blue: Image2D, path) -> None:
    """Write three [0,1]-clamped planes as an 8-bit RGB composite PNG."""
    if not (red.data.shape == green.data.shape == blue.data.shape):
        raise ValueError("composite planes must share dimensions")
    channels = [
        np.floor(np.clip(c.data, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
        for c in (red, green, blue)
    ]
    try:
        Image.fromarray(np.stack(channels, axis=-1), "RGB").save(path, format="PNG")
    except OSError as exc:
        raise OSError(f"failed writing PNG {path}: {exc}") from exc
