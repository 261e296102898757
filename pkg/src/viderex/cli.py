"""Command line entry point: record, follow, eval, serve.

    viderex record SOURCE_DIR --name office --store ./routes
    viderex follow office --frames ./sweep_frames --store ./routes
    viderex eval DATASET_DIR office --store ./routes --out ./results
    viderex serve --port 8471 --store ./routes

``follow`` writes one CSV row per frame to standard output followed by a
``# heading_estimate_deg=...`` trailer. Frame angles come from sweep-style
filenames (a+0050.pgm is 5 degrees) when every frame carries one, and fall
back to frame order otherwise.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
from pathlib import Path

from .errors import ViderexError
from .evalharness import evaluate, emit_plot_data, load_dataset
from .nav import (
    DEFAULT_HAPTIC_FRACTION,
    DEFAULT_TONE_MAX_HZ,
    DEFAULT_TONE_MIN_HZ,
    NavSession,
    sweep_heading_estimate,
)
from .route import CaptureParams, build_memory
from .store import RouteStore, ingest_frames, read_image, save_route

_ANGLE_FILE_RE = re.compile(r"^a([+-]\d{4})\.(pgm|png)$")

DEFAULT_PORT = 8471


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="viderex")
    sub = parser.add_subparsers(dest="command", required=True)

    rec = sub.add_parser("record", help="ingest a frame directory into a stored route")
    rec.add_argument("source_dir", type=Path)
    rec.add_argument("--name", help="route name (default: source directory name)")
    rec.add_argument("--store", type=Path, default=Path("routes"))
    rec.add_argument("--stride", type=int, default=1)
    rec.add_argument("--width", type=int, default=90, help="working width")
    rec.add_argument("--height", type=int, default=25, help="working height")
    rec.add_argument("--fov", type=float, default=90.0, help="camera field of view, degrees")
    rec.add_argument("--overwrite", action="store_true")

    fol = sub.add_parser("follow", help="replay frames against a stored route")
    fol.add_argument("route_name")
    fol.add_argument("--frames", type=Path, required=True)
    fol.add_argument("--store", type=Path, default=Path("routes"))
    fol.add_argument("--calib", choices=["fixed", "running"], default="fixed")
    fol.add_argument("--tone-min", type=float, default=DEFAULT_TONE_MIN_HZ)
    fol.add_argument("--tone-max", type=float, default=DEFAULT_TONE_MAX_HZ)
    fol.add_argument("--haptic-threshold", type=float, default=DEFAULT_HAPTIC_FRACTION,
                     help="haptic trigger as a fraction of the calibration range")

    ev = sub.add_parser("eval", help="run a sweep dataset against a stored route")
    ev.add_argument("dataset_dir", type=Path)
    ev.add_argument("route_name")
    ev.add_argument("--store", type=Path, default=Path("routes"))
    ev.add_argument("--out", type=Path, default=Path("eval_out"))

    srv = sub.add_parser("serve", help="run the route/session HTTP service")
    srv.add_argument("--port", type=int,
                     default=int(os.environ.get("VIDEREX_PORT", DEFAULT_PORT)))
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--store", type=Path,
                     default=Path(os.environ.get("VIDEREX_STORE", "routes")))
    return parser


def cmd_record(args) -> int:
    params = CaptureParams(working_width=args.width, working_height=args.height,
                           fov_deg=args.fov, stride=args.stride)
    route = ingest_frames(args.source_dir, stride=args.stride, params=params,
                          name=args.name)
    build_memory(route)  # validates frames against the working resolution
    manifest = save_route(route, args.store, overwrite=args.overwrite)
    print(f"saved route {manifest.name!r}: {len(manifest.frame_files)} frames "
          f"-> {args.store / manifest.name}", file=sys.stderr)
    return 0


def _labelled_frames(files: list[Path]) -> list[tuple[float, Path]]:
    """(angle, file) pairs: filename angle labels when every frame has one
    (ordered by angle), frame order otherwise."""
    matches = [_ANGLE_FILE_RE.match(f.name) for f in files]
    if all(matches):
        pairs = [(int(m.group(1)) / 10.0, f) for m, f in zip(matches, files)]
        pairs.sort(key=lambda t: t[0])
        return pairs
    return [(float(i), f) for i, f in enumerate(files)]


def cmd_follow(args) -> int:
    store = RouteStore(args.store)
    route = store.load(args.route_name)
    memory = build_memory(route)
    session = NavSession(memory, mode=args.calib,
                         f_min=args.tone_min, f_max=args.tone_max,
                         haptic_fraction=args.haptic_threshold)
    frames_dir = Path(args.frames)
    files = sorted(
        p for p in frames_dir.iterdir()
        if p.is_file() and p.suffix.lower() in (".pgm", ".png")
    ) if frames_dir.is_dir() else []
    if not files:
        raise ViderexError(f"no frames in {frames_dir}")
    print("frame_seq,angle_deg,best_index,diff,tone_hz,haptic")
    labelled = []
    for angle, path in _labelled_frames(files):
        frame = read_image(path)
        update = session.process_frame(frame, auto_preprocess=True)
        labelled.append((angle, update))
        print(f"{update.frame_seq},{angle!r},{update.best_index},"
              f"{update.diff!r},{update.tone_hz!r},{str(update.haptic).lower()}")
    estimate = sweep_heading_estimate(labelled)
    print(f"# heading_estimate_deg={estimate!r}")
    return 0


def cmd_eval(args) -> int:
    dataset = load_dataset(args.dataset_dir)
    store = RouteStore(args.store)
    memory = build_memory(store.load(args.route_name))
    results = evaluate(dataset, memory)
    written = emit_plot_data(results, args.out)
    for offset in sorted(results.summaries):
        s = results.summaries[offset]
        print(f"offset {offset:g} cm: median {s.median:.2f} deg "
              f"(q1 {s.q1:.2f}, q3 {s.q3:.2f}, outliers {len(s.outliers)})",
              file=sys.stderr)
    print(f"wrote {len(written)} files to {args.out}", file=sys.stderr)
    return 0


def cmd_serve(args) -> int:
    from .service import run_server

    run_server(args.store, host=args.host, port=args.port)
    return 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    handlers = {
        "record": cmd_record,
        "follow": cmd_follow,
        "eval": cmd_eval,
        "serve": cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except ViderexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
