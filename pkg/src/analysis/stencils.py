"""
Translation stencils: sums of weighted translates  sum_m w_m f(x - d_m).

Every polar quadrature in the workbench (truncated singular integrals,
spherical means, rough maximal averages, measure maximal functions) is a
finite sum of translates of a grid field evaluated with multilinear
interpolation. Two evaluation paths are kept:

- "direct": one scipy.ndimage.shift per displacement. Slow, obviously
  correct, used as the certification oracle.
- "fft": the same sum written as a convolution with a splatted kernel
  (the transpose of multilinear interpolation) and evaluated with
  scipy.signal.fftconvolve.

Both paths treat values outside the box as zero.
"""

from __future__ import annotations

import itertools
import logging

import numpy as np
from scipy import ndimage
from scipy.signal import fftconvolve

logger = logging.getLogger(__name__)


def splat_kernel(displacements: np.ndarray, weights: np.ndarray, spacing: float) -> tuple:
    """
    Spread weighted displacements onto integer cell offsets.

    Args:
        displacements: (m, n) physical displacements d_m
        weights: (m,) weights w_m
        spacing: Grid spacing h

    Returns:
        (kernel, lowest_offset): kernel[k - lowest_offset] holds the total
        weight that the stencil puts on f_{i-k}. The offset range always
        includes 0.
    """
    displacements = np.atleast_2d(np.asarray(displacements, dtype=float))
    weights = np.asarray(weights, dtype=float).ravel()
    if displacements.shape[0] != weights.shape[0]:
        raise ValueError(f"{displacements.shape[0]} displacements but {weights.shape[0]} weights")
    dimension = displacements.shape[1]

    scaled = displacements / spacing
    base = np.floor(scaled).astype(np.int64)
    frac = scaled - base

    offsets = []
    corner_weights = []
    for corner in itertools.product((0, 1), repeat=dimension):
        corner = np.asarray(corner)
        share = np.prod(np.where(corner == 1, frac, 1.0 - frac), axis=1)
        offsets.append(base + corner)
        corner_weights.append(weights * share)
    offsets = np.concatenate(offsets)
    corner_weights = np.concatenate(corner_weights)

    lowest = np.minimum(offsets.min(axis=0), 0)
    highest = np.maximum(offsets.max(axis=0), 0)
    kernel = np.zeros(tuple(highest - lowest + 1))
    np.add.at(kernel, tuple((offsets - lowest).T), corner_weights)
    return kernel, lowest


def convolve_kernel(values: np.ndarray, kernel: np.ndarray, lowest: np.ndarray) -> np.ndarray:
    """result_i = sum_k kernel[k - lowest] * values[i - k], zero outside the box."""
    full = fftconvolve(values, kernel, mode="full")
    window = tuple(slice(-int(lo), -int(lo) + size) for lo, size in zip(lowest, values.shape))
    return full[window]


def apply_stencil(
    values: np.ndarray,
    displacements: np.ndarray,
    weights: np.ndarray,
    spacing: float,
    method: str = "fft",
) -> np.ndarray:
    """
    Evaluate sum_m w_m f(x_i - d_m) at every cell center.

    Args:
        values: Grid samples of f
        displacements: (m, n) physical displacements
        weights: (m,) weights
        spacing: Grid spacing h
        method: "fft" or "direct"
    """
    if method == "fft":
        kernel, lowest = splat_kernel(displacements, weights, spacing)
        return convolve_kernel(values, kernel, lowest)
    if method == "direct":
        displacements = np.atleast_2d(np.asarray(displacements, dtype=float))
        weights = np.asarray(weights, dtype=float).ravel()
        total = np.zeros(values.shape)
        for shift, weight in zip(displacements / spacing, weights):
            if weight == 0.0:
                continue
            total += weight * ndimage.shift(values, shift, order=1, mode="grid-constant", cval=0.0, prefilter=False)
        return total
    raise ValueError(f"unknown stencil method '{method}', expected 'fft' or 'direct'")


def certify_stencil(values: np.ndarray, displacements: np.ndarray, weights: np.ndarray, spacing: float) -> float:
    """Relative max difference between the fft and direct paths."""
    fast = apply_stencil(values, displacements, weights, spacing, method="fft")
    slow = apply_stencil(values, displacements, weights, spacing, method="direct")
    scale = max(float(np.max(np.abs(slow))), np.finfo(float).tiny)
    difference = float(np.max(np.abs(fast - slow))) / scale
    logger.debug(f"stencil certification: {len(weights)} nodes, relative difference {difference:.3e}")
    return difference
