"""Bundled synthetic fixtures: DCT dictionary and analytic test scenes.

Ships with the package so the full test and comparison tooling runs
without downloading datasets or a learned kernel bank. Full-scale runs on
real multispectral data should load a learned dictionary instead (see the
container format in :mod:`specrec.io`).
"""

from __future__ import annotations

import numpy as np

from .core import SpectralCube, normalize_cube
from .csc import ConvDictionary


def dct_dictionary(kernel_size: int = 12, num_kernels: int = 144) -> ConvDictionary:
    """Deterministic DCT kernel bank, unit-normalized.

    Atoms are 2-D DCT-II basis functions sampled on an n x n frequency
    grid with n = ceil(sqrt(num_kernels)), truncated to kernel_size and
    ordered by increasing total frequency. With num_kernels equal to
    kernel_size squared this is the complete separable DCT basis; larger
    counts densify the frequency grid.
    """
    if kernel_size < 1 or num_kernels < 1:
        raise ValueError("kernel_size and num_kernels must be >= 1")
    n = int(np.ceil(np.sqrt(num_kernels)))
    n = max(n, kernel_size)
    i = np.arange(kernel_size)
    # cos(pi * (2i + 1) * p / (2n)) rows for p = 0..n-1
    basis = np.cos(np.pi * (2 * i[None, :] + 1) * np.arange(n)[:, None] / (2 * n))
    order = sorted(
        ((p, q) for p in range(n) for q in range(n)), key=lambda pq: (sum(pq), pq)
    )[:num_kernels]
    kernels = np.stack([np.outer(basis[p], basis[q]) for p, q in order])
    return ConvDictionary.from_kernels(kernels)


def synthetic_cube(width: int = 64, height: int = 64, bands: int = 8) -> SpectralCube:
    """Analytic scene: piecewise-constant blocks, a sinusoidal texture, and
    smooth band-to-band intensity modulation. Deterministic; peak normalized.
    """
    if width < 4 or height < 4 or bands < 1:
        raise ValueError("scene must be at least 4x4 with one band")
    x = np.arange(width)[None, :]
    y = np.arange(height)[:, None]

    background = np.full((height, width), 0.25)
    background[: height // 2, : width // 2] = 0.55
    background[height // 3 : (2 * height) // 3, width // 2 :] = 0.85
    background[(3 * height) // 4 :, width // 8 : width // 2] = 0.4

    texture = np.sin(2.0 * np.pi * 4.0 * x / width) * np.sin(
        2.0 * np.pi * 3.0 * y / height
    )

    phase = np.linspace(0.0, np.pi, bands)
    bg_gain = 0.6 + 0.35 * np.sin(phase + 0.5)
    tex_gain = 0.5 + 0.45 * np.cos(phase)

    planes = [
        np.clip(bg_gain[l] * background + 0.14 * tex_gain[l] * texture, 0.0, None)
        for l in range(bands)
    ]
    return normalize_cube(SpectralCube(np.stack(planes)))


SCENES = {
    "synth64": lambda: synthetic_cube(64, 64, 8),
    "synth32": lambda: synthetic_cube(32, 32, 4),
}


def get_scene(name: str) -> SpectralCube:
    """Look up a named bundled scene."""
    try:
        builder = SCENES[name]
    except KeyError:
        raise ValueError(
            f"unknown scene {name!r}; available: {', '.join(sorted(SCENES))}"
        ) from None
    return builder()
