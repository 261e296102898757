"""Evaluation harness: sweep datasets, angular errors, and a synthetic world.

The synthetic world stands in for field data: point landmarks at finite
distances around a straight route, rendered as smooth vertical features on
a 360 degree panorama over a distant background. Translating the camera
sideways shifts each landmark azimuth by roughly offset / distance, which
is enough to reproduce the way heading error grows with lateral
displacement, without any 3-D rendering.

A sweep dataset mirrors the capture protocol: at route positions (and
laterally displaced copies of them) the camera turns through an arc,
producing angle-labelled frames; angle 0 is the route heading. Evaluating
a dataset against a route memory yields one difference-vs-angle curve per
position and error summaries grouped by lateral offset.
"""

from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import StoreError, ViderexError
from .imgproc import GrayImage, RidfCurve
from .route import CaptureParams, Route, RouteMemory, Snapshot, ridf_sweep
from .store import decode_pgm, encode_pgm


# ---------------------------------------------------------------- geometry

def angular_error(estimated_deg: float, true_deg: float) -> float:
    """Smallest absolute angle between two headings, in [0, 180]."""
    d = abs(estimated_deg - true_deg) % 360.0
    return min(d, 360.0 - d)


# ---------------------------------------------------------------- dataset types

@dataclass(frozen=True)
class SweepGeometry:
    sweep_arc_deg: float = 180.0
    step_cm: float = 7.0


@dataclass(frozen=True)
class SweepPosition:
    """One rotational sweep plus forward-facing test shots at that spot.

    ``lateral_offset_cm`` is the sideways displacement of the sweep centre
    from the route point ``route_index``; 0 means on the route itself.
    Sweep angles are relative to the route heading (angle 0 = forward).
    """

    route_index: int
    lateral_offset_cm: float
    sweep_frames: tuple[tuple[float, GrayImage], ...]
    test_frames: tuple[tuple[float, GrayImage], ...] = ()

    def __post_init__(self):
        frames = tuple(self.sweep_frames)
        if not frames:
            raise ViderexError("sweep position must contain at least one frame")
        angles = [a for a, _ in frames]
        if any(b <= a for a, b in zip(angles, angles[1:])):
            raise ValueError("sweep angles must be strictly increasing")
        tests = tuple(self.test_frames)
        offsets = [o for o, _ in tests]
        if len(set(offsets)) != len(offsets):
            raise ValueError("test frame offsets must be distinct")
        object.__setattr__(self, "sweep_frames", frames)
        object.__setattr__(self, "test_frames", tests)


@dataclass(frozen=True)
class SweepDataset:
    positions: tuple[SweepPosition, ...]
    geometry: SweepGeometry = field(default_factory=SweepGeometry)

    def __post_init__(self):
        if not self.positions:
            raise ViderexError("dataset must contain at least one position")
        object.__setattr__(self, "positions", tuple(self.positions))

    def __len__(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class ErrorSummary:
    """Five-number boxplot summary of an error sample, in degrees."""

    median: float
    q1: float
    q3: float
    whisker_low: float
    whisker_high: float
    outliers: tuple[float, ...] = ()

    def __post_init__(self):
        if not self.q1 <= self.median <= self.q3:
            raise ValueError("quartiles must bracket the median")


def boxplot_stats(errors) -> ErrorSummary:
    """Median/quartiles by linear interpolation; whiskers at the furthest
    datum within 1.5 IQR of the quartiles; everything beyond is an outlier."""
    values = np.asarray(list(errors), dtype=np.float64)
    if values.size == 0:
        raise ViderexError("cannot summarize an empty error sample")
    q1, median, q3 = np.percentile(values, [25.0, 50.0, 75.0])
    iqr = q3 - q1
    lo_fence = q1 - 1.5 * iqr
    hi_fence = q3 + 1.5 * iqr
    inside = values[(values >= lo_fence) & (values <= hi_fence)]
    whisker_low = float(inside.min())
    whisker_high = float(inside.max())
    outliers = tuple(sorted(float(v) for v in values[(values < lo_fence) | (values > hi_fence)]))
    return ErrorSummary(
        median=float(median), q1=float(q1), q3=float(q3),
        whisker_low=whisker_low, whisker_high=whisker_high, outliers=outliers,
    )


# ---------------------------------------------------------------- synthetic world

@dataclass(frozen=True)
class SynthWorldParams:
    landmark_count: int = 14
    angular_size_deg: float = 14.0   # azimuthal Gaussian sigma at reference distance
    contrast: float = 0.42
    distance_min_cm: float = 150.0
    distance_max_cm: float = 500.0
    background_amplitude: float = 0.12
    panorama_width: int = 720
    panorama_height: int = 25
    fov_deg: float = 90.0


@dataclass(frozen=True)
class SynthWorld:
    """Deterministic landmark world; equal seeds render equal panoramas."""

    seed: int
    params: SynthWorldParams
    landmark_x_cm: np.ndarray
    landmark_y_cm: np.ndarray
    landmark_ref_dist_cm: np.ndarray
    landmark_amp: np.ndarray
    landmark_row_center: np.ndarray
    landmark_row_sigma: np.ndarray
    bg_freq: np.ndarray
    bg_amp: np.ndarray
    bg_phase: np.ndarray
    bg_vertical: float
    panorama: GrayImage = field(init=False, default=None)

    def __post_init__(self):
        object.__setattr__(self, "panorama", panorama_at(self, 0.0, 0.0))

    @property
    def fov_deg(self) -> float:
        return self.params.fov_deg

    @property
    def fov_columns(self) -> int:
        return round(self.params.fov_deg * self.params.panorama_width / 360.0)


def synth_world(seed: int, params: SynthWorldParams | None = None) -> SynthWorld:
    """Scatter landmarks around the origin and fix the background texture."""
    if params is None:
        params = SynthWorldParams()
    if not 0.0 < params.fov_deg <= 360.0:
        raise ValueError("fov_deg must be in (0, 360]")
    rng = np.random.default_rng(seed)
    n = params.landmark_count
    azimuth = rng.uniform(0.0, 360.0, n)
    dist = rng.uniform(params.distance_min_cm, params.distance_max_cm, n)
    az_rad = np.radians(azimuth)
    signs = rng.choice([-1.0, 1.0], n)
    amp = signs * params.contrast * rng.uniform(0.55, 1.0, n)
    h = params.panorama_height
    row_center = rng.uniform(0.30 * h, 0.70 * h, n)
    row_sigma = rng.uniform(0.25 * h, 0.55 * h, n)
    n_bg = 4
    return SynthWorld(
        seed=seed,
        params=params,
        landmark_x_cm=dist * np.sin(az_rad),
        landmark_y_cm=dist * np.cos(az_rad),
        landmark_ref_dist_cm=dist,
        landmark_amp=amp,
        landmark_row_center=row_center,
        landmark_row_sigma=row_sigma,
        bg_freq=np.arange(1, n_bg + 1, dtype=np.float64),
        bg_amp=params.background_amplitude * rng.uniform(0.3, 1.0, n_bg) / n_bg * 4,
        bg_phase=rng.uniform(0.0, 2.0 * np.pi, n_bg),
        bg_vertical=0.08,
    )


def panorama_at(world: SynthWorld, x_cm: float, y_cm: float) -> GrayImage:
    """Full 360 degree panorama seen from (x, y); heading 0 is +y."""
    p = world.params
    w, h = p.panorama_width, p.panorama_height
    col_az = np.arange(w) * (360.0 / w)

    # infinitely distant background: no parallax
    theta = np.radians(col_az)
    bg = np.zeros(w)
    for f, a, ph in zip(world.bg_freq, world.bg_amp, world.bg_phase):
        bg += a * np.sin(f * theta + ph)
    rows = np.arange(h, dtype=np.float64)
    canvas = 0.5 + bg[None, :] + world.bg_vertical * (rows[:, None] / h - 0.5)

    dx = world.landmark_x_cm - x_cm
    dy = world.landmark_y_cm - y_cm
    bearing = np.degrees(np.arctan2(dx, dy)) % 360.0
    dist = np.hypot(dx, dy)
    for k in range(len(bearing)):
        scale = world.landmark_ref_dist_cm[k] / max(dist[k], 1.0)
        sigma_az = p.angular_size_deg * scale
        delta = (col_az - bearing[k] + 180.0) % 360.0 - 180.0
        col_profile = np.exp(-0.5 * (delta / sigma_az) ** 2)
        row_sigma = world.landmark_row_sigma[k] * scale
        row_profile = np.exp(
            -0.5 * ((rows - world.landmark_row_center[k]) / row_sigma) ** 2
        )
        canvas += world.landmark_amp[k] * row_profile[:, None] * col_profile[None, :]

    np.clip(canvas, 0.0, 1.0, out=canvas)
    return GrayImage(canvas)


def _window(pano: GrayImage, heading_deg: float, fov_cols: int) -> GrayImage:
    w = pano.width
    shift = round(heading_deg * w / 360.0)
    start = (shift - fov_cols // 2) % w
    px = pano.pixels
    if start + fov_cols <= w:
        view = px[:, start:start + fov_cols]
    else:
        view = np.concatenate([px[:, start:], px[:, : (start + fov_cols) % w]], axis=1)
    return GrayImage(view)


def render_view(world: SynthWorld, position_cm: tuple[float, float],
                heading_deg: float) -> GrayImage:
    """Camera view at a position: the field-of-view window of that
    position's panorama, centred on the heading.

    Headings snap to the panorama column grid (360 / panorama_width deg).
    """
    x, y = position_cm
    pano = panorama_at(world, x, y)
    fov_cols = world.fov_columns
    if fov_cols >= pano.width:
        return pano
    return _window(pano, heading_deg, fov_cols)


# ---------------------------------------------------------------- dataset generation

def make_training_route(world: SynthWorld, n_positions: int = 8,
                        spacing_cm: float = 50.0, name: str = "synth",
                        working_w: int = 90, working_h: int = 25) -> Route:
    """Forward views along the route, one snapshot per position."""
    snaps = tuple(
        Snapshot(
            index=k,
            image=render_view(world, (0.0, k * spacing_cm), 0.0),
            heading_deg=0.0,
            position_label=f"y={k * spacing_cm:.0f}cm",
        )
        for k in range(n_positions)
    )
    params = CaptureParams(working_width=working_w, working_height=working_h,
                           fov_deg=world.fov_deg, stride=1)
    return Route(name=name, snapshots=snaps, params=params)


def make_sweep_dataset(world: SynthWorld, n_positions: int = 8,
                       spacing_cm: float = 50.0,
                       offsets_cm=(0.0, 7.0, 14.0, 21.0),
                       arc_deg: float = 180.0,
                       step_deg: float = 2.5) -> SweepDataset:
    """Rotational sweeps at every route position and lateral offset.

    Each sweep covers [-arc/2, +arc/2] at ``step_deg`` spacing (angle 0
    included), plus one forward-facing test frame at its own offset.
    """
    n_steps = int(round(arc_deg / step_deg))
    angles = [-arc_deg / 2.0 + i * step_deg for i in range(n_steps + 1)]
    fov_cols = world.fov_columns
    positions = []
    for k in range(n_positions):
        y = k * spacing_cm
        for off in offsets_cm:
            pano = panorama_at(world, float(off), y)
            sweep = tuple((a, _window(pano, a, fov_cols)) for a in angles)
            test = ((float(off), _window(pano, 0.0, fov_cols)),)
            positions.append(
                SweepPosition(route_index=k, lateral_offset_cm=float(off),
                              sweep_frames=sweep, test_frames=test)
            )
    geometry = SweepGeometry(sweep_arc_deg=arc_deg,
                             step_cm=float(offsets_cm[1] - offsets_cm[0])
                             if len(offsets_cm) > 1 else 7.0)
    return SweepDataset(positions=tuple(positions), geometry=geometry)


# ---------------------------------------------------------------- disk layout

_SWEEP_RE = re.compile(r"^a([+-]\d{4})\.pgm$")
_TEST_RE = re.compile(r"^off_([+-]\d{4})\.pgm$")


def _angle_token(value: float) -> str:
    tenths = round(value * 10)
    return f"{'+' if tenths >= 0 else '-'}{abs(tenths):04d}"


def save_dataset(dataset: SweepDataset, root: Path) -> None:
    """Write the documented on-disk layout: per-position directories with
    angle-coded sweep frames and offset-coded test frames."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    (root / "dataset.json").write_text(json.dumps({
        "sweep_arc_deg": dataset.geometry.sweep_arc_deg,
        "step_cm": dataset.geometry.step_cm,
        "positions": len(dataset.positions),
    }, indent=2), encoding="utf-8")
    for i, pos in enumerate(dataset.positions):
        pos_dir = root / f"pos_{i:03d}"
        (pos_dir / "sweep").mkdir(parents=True, exist_ok=True)
        (pos_dir / "test").mkdir(parents=True, exist_ok=True)
        (pos_dir / "meta.json").write_text(json.dumps({
            "route_index": pos.route_index,
            "lateral_offset_cm": pos.lateral_offset_cm,
        }), encoding="utf-8")
        for angle, img in pos.sweep_frames:
            (pos_dir / "sweep" / f"a{_angle_token(angle)}.pgm").write_bytes(encode_pgm(img))
        for off, img in pos.test_frames:
            (pos_dir / "test" / f"off_{_angle_token(off)}.pgm").write_bytes(encode_pgm(img))


def load_dataset(root: Path) -> SweepDataset:
    """Read a dataset directory; angles decode from filenames, sorted
    ascending, with duplicates rejected."""
    root = Path(root)
    meta_path = root / "dataset.json"
    if not meta_path.is_file():
        raise StoreError(f"not a sweep dataset: {root} has no dataset.json")
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    geometry = SweepGeometry(sweep_arc_deg=float(meta["sweep_arc_deg"]),
                             step_cm=float(meta["step_cm"]))
    positions = []
    pos_dirs = sorted(p for p in root.iterdir() if p.is_dir() and p.name.startswith("pos_"))
    if not pos_dirs:
        raise StoreError(f"no positions in {root}")
    for pos_dir in pos_dirs:
        pos_meta = json.loads((pos_dir / "meta.json").read_text(encoding="utf-8"))
        sweep = []
        seen = set()
        sweep_dir = pos_dir / "sweep"
        files = sorted(sweep_dir.iterdir()) if sweep_dir.is_dir() else []
        for f in files:
            m = _SWEEP_RE.match(f.name)
            if not m:
                raise StoreError(f"malformed sweep filename {f.name} in {pos_dir.name}")
            angle = int(m.group(1)) / 10.0
            if angle in seen:
                raise StoreError(f"duplicate angle {angle} in {pos_dir.name}")
            seen.add(angle)
            sweep.append((angle, decode_pgm(f.read_bytes())))
        if not sweep:
            raise StoreError(f"empty position {pos_dir.name}")
        sweep.sort(key=lambda t: t[0])
        tests = []
        test_dir = pos_dir / "test"
        for f in sorted(test_dir.iterdir()) if test_dir.is_dir() else []:
            m = _TEST_RE.match(f.name)
            if not m:
                raise StoreError(f"malformed test filename {f.name} in {pos_dir.name}")
            tests.append((int(m.group(1)) / 10.0, decode_pgm(f.read_bytes())))
        tests.sort(key=lambda t: t[0])
        positions.append(SweepPosition(
            route_index=int(pos_meta["route_index"]),
            lateral_offset_cm=float(pos_meta["lateral_offset_cm"]),
            sweep_frames=tuple(sweep),
            test_frames=tuple(tests),
        ))
    return SweepDataset(positions=tuple(positions), geometry=geometry)


# ---------------------------------------------------------------- evaluation

@dataclass(frozen=True)
class PositionResult:
    route_index: int
    lateral_offset_cm: float
    curve: RidfCurve
    heading_estimate_deg: float
    error_deg: float


@dataclass(frozen=True)
class EvalResult:
    positions: tuple[PositionResult, ...]
    summaries: dict[float, ErrorSummary]

    def errors_by_offset(self) -> dict[float, list[float]]:
        grouped: dict[float, list[float]] = {}
        for pos in self.positions:
            grouped.setdefault(pos.lateral_offset_cm, []).append(pos.error_deg)
        return grouped


def evaluate(dataset: SweepDataset, memory: RouteMemory) -> EvalResult:
    """Sweep every dataset position against the route memory.

    Per position: the difference curve over sweep angles, the heading
    estimate at its minimum, and the angular error against the route
    heading (angle 0). Errors are summarized per lateral offset.
    """
    results = []
    for pos in dataset.positions:
        curve = ridf_sweep(memory, pos.sweep_frames, auto_preprocess=True)
        estimate = curve.min_angle_deg
        results.append(PositionResult(
            route_index=pos.route_index,
            lateral_offset_cm=pos.lateral_offset_cm,
            curve=curve,
            heading_estimate_deg=estimate,
            error_deg=angular_error(estimate, 0.0),
        ))
    grouped: dict[float, list[float]] = {}
    for r in results:
        grouped.setdefault(r.lateral_offset_cm, []).append(r.error_deg)
    summaries = {off: boxplot_stats(errs) for off, errs in sorted(grouped.items())}
    return EvalResult(positions=tuple(results), summaries=summaries)


def widened_minimum_span(curve: RidfCurve, fraction: float = 0.1) -> int:
    """Consecutive samples around the minimum whose diff stays within
    ``fraction`` of the curve range above the minimum."""
    diffs = curve.diffs
    lo = float(diffs.min())
    threshold = lo + fraction * (float(diffs.max()) - lo)
    i = curve.min_index
    left = i
    while left > 0 and diffs[left - 1] <= threshold:
        left -= 1
    right = i
    while right < diffs.size - 1 and diffs[right + 1] <= threshold:
        right += 1
    return right - left + 1


def emit_plot_data(results: EvalResult, out_dir: Path) -> list[Path]:
    """Write ridf_<position>.csv per position and one errors.csv."""
    if not results.positions:
        raise ViderexError("no results to emit")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for i, pos in enumerate(results.positions):
        path = out_dir / f"ridf_{i:03d}.csv"
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["angle_deg", "diff"])
            for angle, diff in zip(pos.curve.angles_deg, pos.curve.diffs):
                writer.writerow([repr(float(angle)), repr(float(diff))])
        written.append(path)
    errors_path = out_dir / "errors.csv"
    with errors_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["position", "lateral_offset_cm", "error_deg"])
        for i, pos in enumerate(results.positions):
            writer.writerow([i, repr(pos.lateral_offset_cm), repr(pos.error_deg)])
    written.append(errors_path)
    return written
