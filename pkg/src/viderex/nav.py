"""Follow-route sessions: per-frame familiarity, tone and haptic feedback.

A session matches each incoming frame against the route memory and maps the
resulting difference onto an audio frequency, inverted so that a good match
sounds high. A vibration cue fires when the difference drops below a
threshold. Calibration is either fixed up front from the route memory or
tracked as a running envelope of the differences seen so far.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import ViderexError
from .imgproc import GrayImage, RgbImage
from .route import (
    CaptureParams,
    Route,
    RouteMemory,
    Snapshot,
    build_memory,
    match_view,
    max_pairwise_idf,
    prepare_query,
)

DEFAULT_TONE_MIN_HZ = 200.0
DEFAULT_TONE_MAX_HZ = 2000.0
DEFAULT_HAPTIC_FRACTION = 0.2

# half-width of the degenerate envelope around the first running-mode diff
COLD_START_EPS = 1e-6


@dataclass(frozen=True)
class FeedbackCalibration:
    """Difference-to-tone mapping range plus the haptic trigger threshold."""

    d_min: float
    d_max: float
    f_min: float = DEFAULT_TONE_MIN_HZ
    f_max: float = DEFAULT_TONE_MAX_HZ
    haptic_threshold: float = 0.0

    def __post_init__(self):
        if not self.d_min < self.d_max:
            raise ValueError("d_min must be strictly below d_max")
        if not self.f_min < self.f_max:
            raise ValueError("f_min must be strictly below f_max")
        if not self.d_min <= self.haptic_threshold <= self.d_max:
            raise ValueError("haptic_threshold must lie within [d_min, d_max]")


@dataclass(frozen=True)
class FamiliarityUpdate:
    """One processed frame: best snapshot, difference, and feedback signals."""

    frame_seq: int
    best_index: int
    diff: float
    tone_hz: float
    haptic: bool


def tone_for_diff(diff: float, calib: FeedbackCalibration) -> float:
    """Map a difference onto [f_min, f_max], inverted and clamped.

    A low difference (good match) yields a high frequency. Endpoints are
    exact: diff <= d_min gives f_max, diff >= d_max gives f_min.
    """
    if diff <= calib.d_min:
        return calib.f_max
    if diff >= calib.d_max:
        return calib.f_min
    frac = (calib.d_max - diff) / (calib.d_max - calib.d_min)
    return calib.f_min + (calib.f_max - calib.f_min) * frac


def haptic_for_diff(diff: float, calib: FeedbackCalibration) -> bool:
    """Vibration cue: fires iff the difference is strictly below threshold."""
    return diff < calib.haptic_threshold


def fixed_calibration(memory: RouteMemory,
                      f_min: float = DEFAULT_TONE_MIN_HZ,
                      f_max: float = DEFAULT_TONE_MAX_HZ,
                      haptic_fraction: float = DEFAULT_HAPTIC_FRACTION,
                      ) -> FeedbackCalibration:
    """Calibrate from the memory itself: d_min 0, d_max the worst
    snapshot-to-snapshot difference (widened slightly if degenerate)."""
    d_max = max_pairwise_idf(memory)
    if d_max <= 0.0:
        d_max = COLD_START_EPS
    return FeedbackCalibration(
        d_min=0.0, d_max=d_max, f_min=f_min, f_max=f_max,
        haptic_threshold=haptic_fraction * d_max,
    )


class NavSession:
    """Single-writer stream of frames matched against one route memory.

    mode "fixed": the calibration passed in (or derived from the memory)
    stays constant. mode "running": the envelope [d_min, d_max] widens to
    cover every difference seen, starting degenerate around the first one;
    the haptic threshold tracks the envelope at ``haptic_fraction``.
    """

    def __init__(self, memory: RouteMemory, mode: str = "fixed",
                 calib: FeedbackCalibration | None = None,
                 f_min: float = DEFAULT_TONE_MIN_HZ,
                 f_max: float = DEFAULT_TONE_MAX_HZ,
                 haptic_fraction: float = DEFAULT_HAPTIC_FRACTION):
        if mode not in ("fixed", "running"):
            raise ValueError("mode must be 'fixed' or 'running'")
        self.memory = memory
        self.mode = mode
        self.haptic_fraction = haptic_fraction
        if mode == "fixed":
            self.calib = calib if calib is not None else fixed_calibration(
                memory, f_min=f_min, f_max=f_max, haptic_fraction=haptic_fraction
            )
        else:
            # running mode has no envelope until the first frame arrives
            self.calib = calib
        self._f_min = self.calib.f_min if self.calib else f_min
        self._f_max = self.calib.f_max if self.calib else f_max
        self.history: list[FamiliarityUpdate] = []
        self._seq = 0

    def _widen_envelope(self, diff: float) -> None:
        if self.calib is None:
            self.calib = FeedbackCalibration(
                d_min=diff - COLD_START_EPS,
                d_max=diff + COLD_START_EPS,
                f_min=self._f_min,
                f_max=self._f_max,
                haptic_threshold=(diff - COLD_START_EPS)
                + self.haptic_fraction * 2 * COLD_START_EPS,
            )
            return
        d_min = min(self.calib.d_min, diff)
        d_max = max(self.calib.d_max, diff)
        if d_min != self.calib.d_min or d_max != self.calib.d_max:
            self.calib = replace(
                self.calib, d_min=d_min, d_max=d_max,
                haptic_threshold=d_min + self.haptic_fraction * (d_max - d_min),
            )

    def process_frame(self, frame: GrayImage | RgbImage,
                      auto_preprocess: bool = True) -> FamiliarityUpdate:
        """Match one frame, update calibration if running, emit feedback."""
        query = prepare_query(self.memory, frame) if auto_preprocess else frame
        res = match_view(self.memory, query)
        if self.mode == "running":
            self._widen_envelope(res.best_diff)
        update = FamiliarityUpdate(
            frame_seq=self._seq,
            best_index=res.best_index,
            diff=res.best_diff,
            tone_hz=tone_for_diff(res.best_diff, self.calib),
            haptic=haptic_for_diff(res.best_diff, self.calib),
        )
        self._seq += 1
        self.history.append(update)
        return update


def sweep_heading_estimate(updates) -> float:
    """Angle of the lowest difference in an angle-labelled update sequence.

    ``updates`` is an ordered list of (angle_deg, FamiliarityUpdate) with
    strictly increasing angles; ties resolve to the lowest angle.
    """
    updates = list(updates)
    if not updates:
        raise ViderexError("no updates to estimate a heading from")
    best_angle = None
    best_diff = None
    prev = None
    for angle, update in updates:
        if prev is not None and angle <= prev:
            raise ValueError("angles must be strictly increasing")
        prev = angle
        if best_diff is None or update.diff < best_diff:
            best_diff = update.diff
            best_angle = angle
    return float(best_angle)


def single_match(reference: GrayImage | RgbImage, frame: GrayImage | RgbImage,
                 calib: FeedbackCalibration,
                 working_w: int | None = None,
                 working_h: int | None = None) -> FamiliarityUpdate:
    """Match one frame against a single reference image.

    Equivalent to a one-snapshot session; best_index is always 0. When a
    working resolution is given both images are reduced to it, otherwise
    they must already share a shape.
    """
    from .imgproc import to_grayscale

    if isinstance(reference, RgbImage):
        reference = to_grayscale(reference)
    if working_w is None and working_h is None:
        working_w, working_h = reference.width, reference.height
    params = CaptureParams(working_width=working_w, working_height=working_h)
    route = Route(name="single", snapshots=(Snapshot(0, reference),), params=params)
    memory = build_memory(route)
    session = NavSession(memory, mode="fixed", calib=calib)
    return session.process_frame(frame, auto_preprocess=True)
