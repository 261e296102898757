"""Image grids, preprocessing, and the image difference function.

The difference between two equal-sized views is

    diff(X, Y) = sqrt(sum_ij (X(i,j) - Y(i,j))^2) / P

with P the total pixel count. Lower means more familiar; 0 means identical.
A rotational sweep of this quantity over cyclic column shifts of a panoramic
view locates the most familiar heading at the curve minimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DimensionMismatch


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=np.float64, order="C")
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class GrayImage:
    """Grayscale pixel grid, row-major, intensities in [0, 1]."""

    pixels: np.ndarray

    def __post_init__(self):
        px = self.pixels
        if not (isinstance(px, np.ndarray) and px.ndim == 2):
            raise ValueError("pixels must be a 2-D array")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        px = _freeze(px)
        if not np.isfinite(px).all():
            raise ValueError("intensities must be finite")
        if px.min() < 0.0 or px.max() > 1.0:
            raise ValueError("intensities must lie in [0, 1]")
        object.__setattr__(self, "pixels", px)

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> "GrayImage":
        # Internal fast path for arrays we own: skips the defensive copy.
        obj = object.__new__(cls)
        arr.flags.writeable = False
        object.__setattr__(obj, "pixels", arr)
        return obj

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def pixel_count(self) -> int:
        return self.pixels.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )

    def __hash__(self):
        return hash((self.pixels.shape, self.pixels.tobytes()))


@dataclass(frozen=True)
class RgbImage:
    """Color pixel grid, row-major (r, g, b) with each channel in [0, 1]."""

    pixels: np.ndarray

    def __post_init__(self):
        px = self.pixels
        if not (isinstance(px, np.ndarray) and px.ndim == 3 and px.shape[2] == 3):
            raise ValueError("pixels must be a (height, width, 3) array")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        px = _freeze(px)
        if not np.isfinite(px).all():
            raise ValueError("intensities must be finite")
        if px.min() < 0.0 or px.max() > 1.0:
            raise ValueError("intensities must lie in [0, 1]")
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class RidfCurve:
    """Difference-vs-rotation samples; the minimum marks the best heading.

    ``angles_deg`` is strictly increasing. For panoramic rolls it spans
    [0, 360) and ``shifts`` carries the column shift per sample; for physical
    sweeps the angles are relative to the route heading and ``shifts`` is None.
    Ties resolve to the lowest index.
    """

    angles_deg: np.ndarray
    diffs: np.ndarray
    shifts: np.ndarray | None = None
    min_index: int = field(default=-1)

    def __post_init__(self):
        angles = _freeze(self.angles_deg)
        diffs = _freeze(self.diffs)
        if angles.ndim != 1 or diffs.ndim != 1 or angles.size != diffs.size:
            raise ValueError("angles and diffs must be 1-D and equally long")
        if angles.size == 0:
            raise ValueError("curve must have at least one sample")
        if np.any(np.diff(angles) <= 0):
            raise ValueError("angles must be strictly increasing")
        if diffs.min() < 0:
            raise ValueError("diffs must be non-negative")
        object.__setattr__(self, "angles_deg", angles)
        object.__setattr__(self, "diffs", diffs)
        if self.shifts is not None:
            shifts = np.array(self.shifts, dtype=np.int64)
            shifts.flags.writeable = False
            object.__setattr__(self, "shifts", shifts)
        # first index attaining the global minimum
        object.__setattr__(self, "min_index", int(np.argmin(diffs)))

    @property
    def min_angle_deg(self) -> float:
        return float(self.angles_deg[self.min_index])

    @property
    def min_diff(self) -> float:
        return float(self.diffs[self.min_index])

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.angles_deg.tolist(), self.diffs.tolist()))


# BT.601 luma weights
_LUMA_R, _LUMA_G, _LUMA_B = 0.299, 0.587, 0.114


def to_grayscale(img: RgbImage) -> GrayImage:
    """Collapse color to luma (0.299 r + 0.587 g + 0.114 b)."""
    px = img.pixels
    luma = _LUMA_R * px[:, :, 0] + _LUMA_G * px[:, :, 1] + _LUMA_B * px[:, :, 2]
    np.clip(luma, 0.0, 1.0, out=luma)
    return GrayImage._wrap(luma)


def _overlap_weights(n_in: int, n_out: int) -> np.ndarray:
    """(n_out, n_in) row-stochastic matrix of box-average interval overlaps."""
    w = np.zeros((n_out, n_in), dtype=np.float64)
    scale = n_in / n_out
    for o in range(n_out):
        lo = o * scale
        hi = (o + 1) * scale
        j0 = int(math.floor(lo))
        j1 = min(int(math.ceil(hi)), n_in)
        for j in range(j0, j1):
            w[o, j] = min(hi, j + 1) - max(lo, j)
        w[o] /= w[o].sum()
    return w


def downsample(img: GrayImage, out_w: int, out_h: int) -> GrayImage:
    """Shrink by box-average pooling over (possibly fractional) source boxes."""
    if out_w < 1 or out_h < 1:
        raise ValueError("target dimensions must be at least 1")
    if out_w > img.width or out_h > img.height:
        raise ValueError("target exceeds source")
    if out_w == img.width and out_h == img.height:
        return img
    rows = _overlap_weights(img.height, out_h)
    cols = _overlap_weights(img.width, out_w)
    out = rows @ img.pixels @ cols.T
    np.clip(out, 0.0, 1.0, out=out)
    return GrayImage._wrap(out)


def idf(x: GrayImage, y: GrayImage) -> float:
    """Image difference: sqrt of summed squared pixel differences over P.

    Symmetric and non-negative; exactly 0 iff the images are identical.
    """
    if x.pixels.shape != y.pixels.shape:
        raise DimensionMismatch(
            f"incompatible dimensions: {x.width}x{x.height} vs {y.width}x{y.height}"
        )
    s = kernels.sum_sq_diff(x.pixels, y.pixels)
    return math.sqrt(s) / x.pixel_count


def roll_columns(img: GrayImage, shift: int) -> GrayImage:
    """Cyclic column shift: output column c reads input column (c - shift) mod width."""
    s = int(shift) % img.width
    if s == 0:
        return img
    return GrayImage._wrap(np.roll(img.pixels, s, axis=1))


def ridf_panoramic(current: GrayImage, snapshot: GrayImage, step: int = 1) -> RidfCurve:
    """Difference at every cyclic column shift of ``current`` against ``snapshot``.

    One sample per shift in {0, step, 2*step, ...} below the image width;
    sample angle is shift * (360 / width) degrees.
    """
    if step < 1:
        raise ValueError("step must be >= 1")
    if current.pixels.shape != snapshot.pixels.shape:
        raise DimensionMismatch(
            f"incompatible dimensions: {current.width}x{current.height} "
            f"vs {snapshot.width}x{snapshot.height}"
        )
    sums = kernels.ridf_sum_sq(current.pixels, snapshot.pixels, int(step))
    diffs = np.sqrt(sums) / current.pixel_count
    shifts = np.arange(0, current.width, step, dtype=np.int64)
    angles = shifts * (360.0 / current.width)
    return RidfCurve(angles_deg=angles, diffs=diffs, shifts=shifts)
