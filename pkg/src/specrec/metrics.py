"""Reconstruction quality metrics: PSNR, SSIM, and spectral angle.

PSNR uses peak 1.0 after normalization, with the MSE taken over all
voxels jointly, and is capped at the 99 dB sentinel (identical inputs
report exactly 99). SSIM follows the standard local-statistics form with
an 11x11 Gaussian window (sigma 1.5) and constants K1=0.01, K2=0.03 at
peak 1; only fully valid windows contribute. The spectral angle is the
mean of per-pixel angles over a region, with zero-norm spectra skipped.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import ndimage

from .core import Image2D, Region, SpectralCube

PSNR_CAP_DB = 99.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def psnr(a: SpectralCube, b: SpectralCube, peak: float = 1.0) -> float:
    """10*log10(peak^2 / MSE) over all voxels, capped at 99 dB."""
    if a.data.shape != b.data.shape:
        raise ValueError(f"cube shapes differ: {a.data.shape} vs {b.data.shape}")
    if peak <= 0:
        raise ValueError("peak must be > 0")
    mse = float(np.mean((a.data - b.data) ** 2))
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(10.0 * np.log10(peak * peak / mse), PSNR_CAP_DB)


def _gaussian_window(size: int, sigma: float):
    half = (size - 1) / 2.0
    g = np.exp(-((np.arange(size) - half) ** 2) / (2.0 * sigma * sigma))
    window = np.outer(g, g)
    return window / window.sum()


_SSIM_WINDOW_2D = _gaussian_window(SSIM_WINDOW, SSIM_SIGMA)


def ssim(a: Image2D, b: Image2D) -> float:
    """Mean local structural similarity over all fully valid windows."""
    if a.data.shape != b.data.shape:
        raise ValueError(f"image shapes differ: {a.data.shape} vs {b.data.shape}")
    if a.height < SSIM_WINDOW or a.width < SSIM_WINDOW:
        raise ValueError(
            f"images must be at least {SSIM_WINDOW}x{SSIM_WINDOW} for SSIM"
        )
    c1 = SSIM_K1 * SSIM_K1
    c2 = SSIM_K2 * SSIM_K2
    pad = SSIM_WINDOW // 2
    crop = (slice(pad, -pad), slice(pad, -pad))

    def local_mean(img):
        return ndimage.correlate(img, _SSIM_WINDOW_2D, mode="nearest")[crop]

    x, y = a.data, b.data
    mu_x = local_mean(x)
    mu_y = local_mean(y)
    var_x = local_mean(x * x) - mu_x * mu_x
    var_y = local_mean(y * y) - mu_y * mu_y
    cov = local_mean(x * y) - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))


def ssim_cube(a: SpectralCube, b: SpectralCube) -> float:
    """Cube-level SSIM: mean of per-band SSIM values."""
    if a.data.shape != b.data.shape:
        raise ValueError(f"cube shapes differ: {a.data.shape} vs {b.data.shape}")
    return float(
        np.mean([ssim(Image2D(a.data[l]), Image2D(b.data[l])) for l in range(a.bands)])
    )


def spectral_angles(
    a: SpectralCube, b: SpectralCube, region: Region
) -> Tuple[np.ndarray, int]:
    """Per-pixel angles (radians) over a region and the count of skipped pixels.

    Pixels where either spectrum has zero norm are skipped.
    """
    if a.data.shape != b.data.shape:
        raise ValueError(f"cube shapes differ: {a.data.shape} vs {b.data.shape}")
    region.check_inside(a.width, a.height)
    rows, cols = region.slices()
    sa = a.data[:, rows, cols].reshape(a.bands, -1)
    sb = b.data[:, rows, cols].reshape(b.bands, -1)
    na = np.linalg.norm(sa, axis=0)
    nb = np.linalg.norm(sb, axis=0)
    valid = (na > 0) & (nb > 0)
    skipped = int((~valid).sum())
    if not valid.any():
        raise ValueError("all pixels in region have zero-norm spectra")
    cos = (sa[:, valid] * sb[:, valid]).sum(axis=0) / (na[valid] * nb[valid])
    return np.arccos(np.clip(cos, -1.0, 1.0)), skipped


def sam_region(a: SpectralCube, b: SpectralCube, region: Region) -> float:
    """Mean spectral angle (radians) between two cubes over a region."""
    angles, _ = spectral_angles(a, b, region)
    return float(angles.mean())


@dataclass(frozen=True)
class MetricsReport:
    psnr_db: float
    ssim: float
    sam_rad: float

    def to_csv_row(self) -> str:
        return f"{self.psnr_db:.6f},{self.ssim:.6f},{self.sam_rad:.6f}"

    def to_json(self) -> str:
        return json.dumps(
            {"psnr_db": self.psnr_db, "ssim": self.ssim, "sam_rad": self.sam_rad}
        )


def compute_report(
    a: SpectralCube,
    b: SpectralCube,
    region: Optional[Region] = None,
    peak: float = 1.0,
) -> MetricsReport:
    """Evaluate all three metrics; the SAM region defaults to the full image."""
    if region is None:
        region = Region(0, 0, a.width, a.height)
    return MetricsReport(
        psnr_db=psnr(a, b, peak),
        ssim=ssim_cube(a, b),
        sam_rad=sam_region(a, b, region),
    )
