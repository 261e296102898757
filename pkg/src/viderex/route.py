"""Route memory and the snapshot matcher.

A route is an ordered sequence of training views. The matcher keeps every
view verbatim and, for a query, takes the minimum image difference over all
of them: the lowest-difference snapshot is the most familiar one.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .errors import DimensionMismatch, ViderexError
from .imgproc import GrayImage, RgbImage, RidfCurve, downsample, to_grayscale

_NAME_RE = re.compile(r"^[A-Za-z0-9_-]+$")

DEFAULT_WORKING_WIDTH = 90
DEFAULT_WORKING_HEIGHT = 25


@dataclass(frozen=True)
class CaptureParams:
    """Capture-time parameters carried with a route."""

    working_width: int = DEFAULT_WORKING_WIDTH
    working_height: int = DEFAULT_WORKING_HEIGHT
    fov_deg: float = 90.0
    stride: int = 1

    def __post_init__(self):
        if self.working_width < 1 or self.working_height < 1:
            raise ValueError("working resolution must be positive")
        if not 0.0 < self.fov_deg <= 360.0:
            raise ValueError("fov_deg must be in (0, 360]")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")

    def to_json_dict(self) -> dict:
        return {
            "working_width": self.working_width,
            "working_height": self.working_height,
            "fov_deg": self.fov_deg,
            "stride": self.stride,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "CaptureParams":
        return cls(
            working_width=int(d["working_width"]),
            working_height=int(d["working_height"]),
            fov_deg=float(d["fov_deg"]),
            stride=int(d["stride"]),
        )


@dataclass(frozen=True)
class Snapshot:
    """One stored training view with optional pose metadata."""

    index: int
    image: GrayImage
    heading_deg: float | None = None
    position_label: str | None = None
    captured_at: str | None = None


@dataclass(frozen=True)
class Route:
    """Ordered snapshots forming a learned route."""

    name: str
    snapshots: tuple[Snapshot, ...]
    params: CaptureParams = field(default_factory=CaptureParams)

    def __post_init__(self):
        if not _NAME_RE.match(self.name):
            raise ValueError(
                f"route name {self.name!r} must use letters, digits, dash, underscore"
            )
        snaps = tuple(self.snapshots)
        if not snaps:
            raise ViderexError("route must contain at least one snapshot")
        for k, snap in enumerate(snaps):
            if snap.index != k:
                raise ValueError("snapshot indices must be contiguous from 0")
        shape = snaps[0].image.pixels.shape
        for snap in snaps[1:]:
            if snap.image.pixels.shape != shape:
                raise ViderexError("inconsistent capture: snapshot dimensions differ")
        object.__setattr__(self, "snapshots", snaps)

    def __len__(self) -> int:
        return len(self.snapshots)

    @property
    def frame_width(self) -> int:
        return self.snapshots[0].image.width

    @property
    def frame_height(self) -> int:
        return self.snapshots[0].image.height


@dataclass(frozen=True)
class RouteMemory:
    """A route with every view preprocessed to working resolution.

    Immutable once built; matching reads the stacked (N, P) pixel block.
    """

    route: Route
    stack: np.ndarray  # (N, working_h * working_w) float64, read-only

    @property
    def working_width(self) -> int:
        return self.route.params.working_width

    @property
    def working_height(self) -> int:
        return self.route.params.working_height

    @property
    def pixel_count(self) -> int:
        return self.working_width * self.working_height

    def __len__(self) -> int:
        return len(self.route)

    @property
    def snapshots(self) -> tuple[Snapshot, ...]:
        return self.route.snapshots


@dataclass(frozen=True)
class MatchResult:
    """Best snapshot for a query plus the full per-snapshot difference list."""

    best_index: int
    best_diff: float
    diffs: np.ndarray

    def __post_init__(self):
        diffs = np.asarray(self.diffs, dtype=np.float64)
        diffs.flags.writeable = False
        object.__setattr__(self, "diffs", diffs)


def build_memory(route: Route, working_w: int | None = None,
                 working_h: int | None = None) -> RouteMemory:
    """Grayscale + downsample every snapshot to working resolution, order kept.

    Defaults to the resolution recorded in ``route.params``.
    """
    if working_w is None:
        working_w = route.params.working_width
    if working_h is None:
        working_h = route.params.working_height
    if working_w > route.frame_width or working_h > route.frame_height:
        raise ViderexError(
            f"inconsistent capture: frames {route.frame_width}x{route.frame_height} "
            f"smaller than working resolution {working_w}x{working_h}"
        )
    n = len(route)
    stack = np.empty((n, working_h * working_w), dtype=np.float64)
    prepared = []
    for k, snap in enumerate(route.snapshots):
        img = downsample(snap.image, working_w, working_h)
        stack[k] = img.pixels.ravel()
        prepared.append(replace(snap, image=img))
    stack.flags.writeable = False
    params = replace(route.params, working_width=working_w, working_height=working_h)
    prepared_route = Route(name=route.name, snapshots=tuple(prepared), params=params)
    return RouteMemory(route=prepared_route, stack=stack)


def prepare_query(memory: RouteMemory, frame: GrayImage | RgbImage) -> GrayImage:
    """Bring a raw frame to the memory's working resolution."""
    if isinstance(frame, RgbImage):
        frame = to_grayscale(frame)
    if (frame.height, frame.width) == (memory.working_height, memory.working_width):
        return frame
    if frame.width >= memory.working_width and frame.height >= memory.working_height:
        return downsample(frame, memory.working_width, memory.working_height)
    raise DimensionMismatch(
        f"frame {frame.width}x{frame.height} below working resolution "
        f"{memory.working_width}x{memory.working_height}"
    )


def match_view(memory: RouteMemory, query: GrayImage,
               auto_preprocess: bool = False) -> MatchResult:
    """Most familiar snapshot for a query view; ties go to the lowest index."""
    if auto_preprocess:
        query = prepare_query(memory, query)
    elif (query.height, query.width) != (memory.working_height, memory.working_width):
        raise DimensionMismatch(
            f"query {query.width}x{query.height} does not match working resolution "
            f"{memory.working_width}x{memory.working_height}; "
            "preprocess it or pass auto_preprocess=True"
        )
    sums = kernels.batch_sum_sq_diff(memory.stack, query.pixels)
    diffs = np.sqrt(sums) / memory.pixel_count
    best = int(np.argmin(diffs))
    return MatchResult(best_index=best, best_diff=float(diffs[best]), diffs=diffs)


def ridf_sweep(memory: RouteMemory, sweep, auto_preprocess: bool = True) -> RidfCurve:
    """Best memory difference per sweep frame, as a curve over sweep angles.

    ``sweep`` is an ordered sequence of (angle_deg, frame) with strictly
    increasing angles supplied by the caller (capture geometry or frame order).
    """
    sweep = list(sweep)
    if not sweep:
        raise ViderexError("sweep must contain at least one frame")
    angles = np.array([a for a, _ in sweep], dtype=np.float64)
    if np.any(np.diff(angles) <= 0):
        raise ValueError("sweep angles must be strictly increasing")
    diffs = np.empty(len(sweep), dtype=np.float64)
    for i, (_, frame) in enumerate(sweep):
        diffs[i] = match_view(memory, frame, auto_preprocess=auto_preprocess).best_diff
    return RidfCurve(angles_deg=angles, diffs=diffs)


def max_pairwise_idf(memory: RouteMemory) -> float:
    """Largest difference between any two stored snapshots.

    Quadratic in route length; intended for calibration passes over
    typical routes, not for bulk datasets.
    """
    n = len(memory)
    worst = 0.0
    for i in range(n - 1):
        q = np.ascontiguousarray(memory.stack[i])
        sums = kernels.batch_sum_sq_diff(memory.stack[i + 1:], q)
        worst = max(worst, float(np.max(sums)))
    return float(np.sqrt(worst) / memory.pixel_count)
