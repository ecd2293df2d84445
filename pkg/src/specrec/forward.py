"""Coded-mask observation operator for snapshot spectral imaging.

The detector collapses the cube along the spectral axis: every band is
modulated elementwise by its own mask plane and the modulated bands are
summed into one 2-D measurement. Because the per-band operator is a
diagonal (elementwise) weighting, the adjoint and the Gram diagonal have
closed forms that the solvers exploit directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Array, Image2D, SpectralCube, _as_readonly


@dataclass(frozen=True, eq=False)
class SystemMasks:
    """Per-band coding masks, shape (bands, height, width), weights in [0, 1]."""

    planes: Array

    def __post_init__(self):
        planes = _as_readonly(self.planes, 3, "SystemMasks.planes")
        if planes.min() < 0.0 or planes.max() > 1.0:
            raise ValueError("mask weights must lie in [0, 1]")
        object.__setattr__(self, "planes", planes)

    @property
    def bands(self) -> int:
        return self.planes.shape[0]

    @property
    def height(self) -> int:
        return self.planes.shape[1]

    @property
    def width(self) -> int:
        return self.planes.shape[2]


class Measurement(Image2D):
    """2-D coded observation, same spatial size as one mask plane."""


def generate_mask(width: int, height: int, seed: int, density: float) -> Image2D:
    """Draw a random binary {0,1} mask with the given fraction of ones.

    Deterministic per seed (PCG64 stream); the realized ones-fraction
    concentrates around ``density`` within a couple of binomial standard
    deviations.
    """
    if not 0.0 < density < 1.0:
        raise ValueError(f"density must lie in (0, 1), got {density}")
    rng = np.random.Generator(np.random.PCG64(seed))
    mask = (rng.random((height, width)) < density).astype(np.float64)
    return Image2D(mask)


def build_system(mask: Image2D, bands: int, shear_step: int) -> SystemMasks:
    """Replicate a base mask into per-band planes by circular column shifts.

    Band ``l`` is the base mask rolled by ``l * shear_step`` columns;
    ``shear_step=0`` gives identical planes (fixed-mask geometry). Circular
    shifting keeps full mask energy in every band, so no column of the
    Gram diagonal collapses to zero at the image border.
    """
    if bands < 1:
        raise ValueError("bands must be >= 1")
    if abs(shear_step) >= mask.width:
        raise ValueError(
            f"|shear_step| must be < mask width ({mask.width}), got {shear_step}"
        )
    planes = np.stack(
        [np.roll(mask.data, l * shear_step, axis=1) for l in range(bands)]
    )
    return SystemMasks(planes)


def forward(system: SystemMasks, cube: SpectralCube) -> Measurement:
    """Apply the observation operator: y(p) = sum_l h_l(p) * I_l(p)."""
    if cube.data.shape != system.planes.shape:
        raise ValueError(
            f"cube shape {cube.data.shape} does not match system {system.planes.shape}"
        )
    return Measurement((system.planes * cube.data).sum(axis=0))


def adjoint(system: SystemMasks, y: Image2D) -> SpectralCube:
    """Apply the adjoint operator: band l is h_l(p) * y(p)."""
    if y.data.shape != system.planes.shape[1:]:
        raise ValueError(
            f"measurement shape {y.data.shape} does not match system "
            f"{system.planes.shape[1:]}"
        )
    return SpectralCube(system.planes * y.data[None, :, :])


def gram_diagonal(system: SystemMasks) -> Image2D:
    """Per-pixel diagonal of H H^T: sum over bands of h_l(p)^2."""
    return Image2D((system.planes ** 2).sum(axis=0))


def add_noise(y: Measurement, sigma: float, seed: int) -> Measurement:
    """Add i.i.d. Gaussian noise of standard deviation ``sigma``.

    The generator is pinned for bit-reproducibility: a Box-Muller
    transform over two consecutive PCG64 uniform batches, so identical
    (measurement, sigma, seed) triples give identical outputs on every
    platform. ``sigma=0`` returns the input unchanged.
    """
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if sigma == 0.0:
        return y
    rng = np.random.Generator(np.random.PCG64(seed))
    u = rng.random((2, y.height, y.width))
    # u1 in (0, 1] avoids log(0); u2 in [0, 1) is fine for the phase.
    z = np.sqrt(-2.0 * np.log1p(-u[0])) * np.cos(2.0 * np.pi * u[1])
    return Measurement(y.data + sigma * z)
