"""Familiarity-based visual navigation engine.

Learn a route from an image sequence in one pass, then recover heading
anywhere near it by comparing live views against the stored snapshots.
"""

from .errors import (
    CorruptRoute,
    DimensionMismatch,
    DuplicateRoute,
    NotARoute,
    RouteNotFound,
    StoreError,
    TransferError,
    ViderexError,
)
from .imgproc import (
    GrayImage,
    RgbImage,
    RidfCurve,
    downsample,
    idf,
    ridf_panoramic,
    roll_columns,
    to_grayscale,
)
from .nav import (
    FamiliarityUpdate,
    FeedbackCalibration,
    NavSession,
    fixed_calibration,
    haptic_for_diff,
    single_match,
    sweep_heading_estimate,
    tone_for_diff,
)
from .route import (
    CaptureParams,
    MatchResult,
    Route,
    RouteMemory,
    Snapshot,
    build_memory,
    match_view,
    prepare_query,
    ridf_sweep,
)
from .store import (
    RouteManifest,
    RouteStore,
    ingest_frames,
    load_route,
    read_image,
    save_route,
    sync_list,
    sync_pull,
    sync_push,
)

__version__ = "0.1.0"
