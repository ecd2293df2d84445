"""Core value types shared by every solver stage.

Arrays are stored band-major as float64 (solver invariants are checked at
1e-10 and tighter, which rules out float32 internally; files use float32,
see :mod:`specrec.io`). All types are immutable values: constructors copy
their input and mark the buffer read-only, so instances can be shared
freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from numpy.typing import NDArray

Array = NDArray[np.float64]


def _as_readonly(data, ndim: int, name: str) -> Array:
    arr = np.array(data, dtype=np.float64, order="C", copy=True)
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-D, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite samples")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Image2D:
    """Single 2-D real-valued plane (one band, a mask plane, or a measurement)."""

    data: Array

    def __post_init__(self):
        object.__setattr__(self, "data", _as_readonly(self.data, 2, "Image2D.data"))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True, eq=False)
class SpectralCube:
    """3-D radiance cube stored as band-major planes, shape (bands, height, width)."""

    data: Array
    band_wavelengths: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "data", _as_readonly(self.data, 3, "SpectralCube.data"))
        if self.band_wavelengths is not None:
            wl = tuple(float(w) for w in self.band_wavelengths)
            if len(wl) != self.bands:
                raise ValueError(
                    f"band_wavelengths has {len(wl)} entries for {self.bands} bands"
                )
            object.__setattr__(self, "band_wavelengths", wl)

    @property
    def bands(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class Region:
    """Rectangular pixel region: offsets (x0, y0) and extents (w, h)."""

    x0: int
    y0: int
    w: int
    h: int

    def __post_init__(self):
        if self.x0 < 0 or self.y0 < 0:
            raise ValueError("region offsets must be non-negative")
        if self.w <= 0 or self.h <= 0:
            raise ValueError("region extents must be positive")

    def check_inside(self, width: int, height: int) -> None:
        """Raise if the region does not lie fully inside a width x height image."""
        if self.x0 + self.w > width or self.y0 + self.h > height:
            raise ValueError(
                f"region {self} exceeds image bounds {width}x{height}"
            )

    def slices(self) -> tuple[slice, slice]:
        """(row, col) slices selecting the region in a (height, width) plane."""
        return slice(self.y0, self.y0 + self.h), slice(self.x0, self.x0 + self.w)


@dataclass(frozen=True)
class SolverParams:
    """Reconstruction parameters.

    beta           TV weight in the GAP-TV stage
    rho            ADMM penalty of the sparse-coding stage
    kappa          group-shrinkage threshold applied in the delta-update
    outer_iters    outer alternation rounds
    inner_iters    ADMM rounds per sparse-coding call
    tv_iters       dual-projection iterations per TV denoise call
    lowpass_weight smoothness weight of the low/high frequency split
    gram_epsilon   clamp below which mask-coverage pixels get no correction
    noise_sigma    measurement noise standard deviation for simulation
    """

    beta: float = 0.1
    rho: float = 1.0
    kappa: float = 0.05
    outer_iters: int = 30
    inner_iters: int = 10
    tv_iters: int = 20
    lowpass_weight: float = 5.0
    gram_epsilon: float = 1e-6
    noise_sigma: float = 0.0

    def __post_init__(self):
        for name in ("beta", "rho", "kappa", "lowpass_weight", "noise_sigma"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        for name in ("outer_iters", "inner_iters", "tv_iters"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.gram_epsilon <= 0:
            raise ValueError("gram_epsilon must be > 0")


def normalize_cube(cube: SpectralCube) -> SpectralCube:
    """Scale a cube by 1/max so its maximum sample is exactly 1.

    Idempotent: a cube whose maximum is already 1.0 is returned bitwise
    unchanged (division by 1.0 is exact).
    """
    peak = float(np.max(cube.data))
    if peak <= 0.0:
        raise ValueError("degenerate cube: maximum sample is not positive")
    return SpectralCube(cube.data / peak, cube.band_wavelengths)


def extract_band(cube: SpectralCube, l: int) -> Image2D:
    """Return band ``l`` of the cube as a 2-D image."""
    if not 0 <= l < cube.bands:
        raise IndexError(f"band {l} out of range for {cube.bands}-band cube")
    return Image2D(cube.data[l])


def replace_band(cube: SpectralCube, l: int, image: Image2D) -> SpectralCube:
    """Return a copy of the cube with band ``l`` replaced."""
    if not 0 <= l < cube.bands:
        raise IndexError(f"band {l} out of range for {cube.bands}-band cube")
    if image.data.shape != cube.data.shape[1:]:
        raise ValueError("replacement band has mismatched spatial size")
    data = cube.data.copy()
    data[l] = image.data
    return SpectralCube(data, cube.band_wavelengths)


def mean_spectrum(cube: SpectralCube, region: Region) -> Array:
    """Mean spectrum over a region, max-normalized to [0, 1].

    Element ``l`` is the arithmetic mean of band ``l`` over the region,
    then the whole vector is divided by its maximum (an all-zero region
    yields an all-zero spectrum).
    """
    region.check_inside(cube.width, cube.height)
    rows, cols = region.slices()
    spectrum = cube.data[:, rows, cols].mean(axis=(1, 2))
    peak = spectrum.max()
    if peak > 0:
        spectrum = spectrum / peak
    return spectrum
