"""Isotropic total-variation denoising via dual projection.

Discretization: forward differences with replicate (Neumann) boundaries,
so the gradient's last row/column components are zero and the divergence
below is its exact negative adjoint. The dual step is fixed at 0.248,
just under the empirically stable 1/4 bound of the projection iteration.
"""

from __future__ import annotations

import numpy as np

from .core import Array, Image2D

DUAL_STEP = 0.248


def _grad(u: Array) -> tuple[Array, Array]:
    gx = np.zeros_like(u)
    gy = np.zeros_like(u)
    gx[:, :-1] = u[:, 1:] - u[:, :-1]
    gy[:-1, :] = u[1:, :] - u[:-1, :]
    return gx, gy


def _div(px: Array, py: Array) -> Array:
    # Negative adjoint of _grad; relies on px[:, -1] == 0 and py[-1, :] == 0,
    # which the projection iteration preserves from a zero start.
    d = px.copy()
    d[:, 1:] -= px[:, :-1]
    d[0, :] += py[0, :]
    d[1:, :] += py[1:, :] - py[:-1, :]
    return d


def tv_value(image: Image2D) -> float:
    """Isotropic TV: sum over pixels of the gradient magnitude."""
    gx, gy = _grad(image.data)
    return float(np.sum(np.sqrt(gx * gx + gy * gy)))


def tv_objective(u: Image2D, ref: Image2D, weight: float) -> float:
    """Denoising objective 0.5*||u - ref||^2 + weight * TV(u)."""
    if u.data.shape != ref.data.shape:
        raise ValueError(
            f"image shapes differ: {u.data.shape} vs {ref.data.shape}"
        )
    fidelity = 0.5 * float(np.sum((u.data - ref.data) ** 2))
    return fidelity + weight * tv_value(u)


def tv_chambolle(image: Image2D, weight: float, iters: int) -> Image2D:
    """Approximately minimize 0.5*||u - image||^2 + weight * TV(u).

    Runs a fixed number of dual projection iterations (no convergence
    test) for deterministic runtimes. ``weight=0`` returns the input
    unchanged. The iteration preserves the image mean and never increases
    the TV objective relative to the input on denoising workloads.
    """
    if weight < 0:
        raise ValueError("weight must be >= 0")
    if iters < 1:
        raise ValueError("iters must be >= 1")
    if weight == 0.0:
        return image

    f = image.data
    px = np.zeros_like(f)
    py = np.zeros_like(f)
    scaled = f / weight
    for _ in range(iters):
        gx, gy = _grad(_div(px, py) - scaled)
        denom = 1.0 + DUAL_STEP * np.sqrt(gx * gx + gy * gy)
        px = (px + DUAL_STEP * gx) / denom
        py = (py + DUAL_STEP * gy) / denom
    return Image2D(f - weight * _div(px, py))
