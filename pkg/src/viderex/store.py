"""Route persistence: frame ingestion, on-disk layout, and remote sync.

On disk a route is a directory:

    <root>/<name>/manifest.json
    <root>/<name>/frames/frame_00000.pgm ...

Frames are binary PGM (P5, maxval 255). The manifest carries name,
created_at, frame_files, params, checksum; the checksum is SHA-256 over the
concatenated frame file bytes in manifest order, so any single corrupted
byte is detected at load time.
"""

from __future__ import annotations

import base64
import hashlib
import json
import re
import shutil
import tempfile
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import requests

from .errors import (
    CorruptRoute,
    DuplicateRoute,
    NotARoute,
    RouteNotFound,
    StoreError,
    TransferError,
)
from .imgproc import GrayImage, RgbImage, to_grayscale
from .route import CaptureParams, Route, Snapshot

MANIFEST_NAME = "manifest.json"
FRAMES_DIR = "frames"
_NAME_RE = re.compile(r"^[A-Za-z0-9_-]+$")
_FRAME_EXTENSIONS = (".pgm", ".png")


# ---------------------------------------------------------------- image codecs

def encode_pgm(img: GrayImage) -> bytes:
    """Serialize to binary PGM (P5, maxval 255); intensities quantize to 8 bit."""
    quant = np.clip(np.rint(img.pixels * 255.0), 0, 255).astype(np.uint8)
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + quant.tobytes()


def decode_pgm(data: bytes) -> GrayImage:
    """Parse a binary PGM (P5) body; maxval up to 255."""
    if not data.startswith(b"P5"):
        raise StoreError("not a binary PGM (P5) image")
    # header tokens may be separated by whitespace and '#' comments
    tokens: list[int] = []
    pos = 2
    while len(tokens) < 3:
        if pos >= len(data):
            raise StoreError("truncated PGM header")
        ch = data[pos:pos + 1]
        if ch == b"#":
            nl = data.find(b"\n", pos)
            if nl == -1:
                raise StoreError("truncated PGM header")
            pos = nl + 1
        elif ch.isspace():
            pos += 1
        else:
            end = pos
            while end < len(data) and not data[end:end + 1].isspace():
                end += 1
            tokens.append(int(data[pos:end]))
            pos = end
    pos += 1  # single whitespace after maxval
    width, height, maxval = tokens
    if not 1 <= maxval <= 255:
        raise StoreError(f"unsupported PGM maxval {maxval}")
    expected = width * height
    raster = data[pos:pos + expected]
    if len(raster) != expected:
        raise StoreError("truncated PGM raster")
    px = np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
    return GrayImage(px.astype(np.float64) / maxval)


def read_image(path: Path) -> GrayImage | RgbImage:
    """Decode a PGM (P5) or PNG file into a pixel grid."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".pgm":
        return decode_pgm(path.read_bytes())
    if suffix == ".png":
        from PIL import Image

        with Image.open(path) as im:
            if im.mode in ("L", "I;16", "I"):
                arr = np.asarray(im.convert("L"), dtype=np.float64) / 255.0
                return GrayImage(arr)
            arr = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
            return RgbImage(arr)
    raise StoreError(f"unsupported image format: {path.name}")


# ---------------------------------------------------------------- manifest

@dataclass(frozen=True)
class RouteManifest:
    """Index document for one stored route."""

    name: str
    created_at: str
    frame_files: tuple[str, ...]
    params: CaptureParams
    checksum: str

    def __post_init__(self):
        if not _NAME_RE.match(self.name):
            raise ValueError(f"invalid route name {self.name!r}")
        if not self.frame_files:
            raise ValueError("manifest must list at least one frame")
        object.__setattr__(self, "frame_files", tuple(self.frame_files))

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "created_at": self.created_at,
            "frame_files": list(self.frame_files),
            "params": self.params.to_json_dict(),
            "checksum": self.checksum,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "RouteManifest":
        return cls(
            name=d["name"],
            created_at=d["created_at"],
            frame_files=tuple(d["frame_files"]),
            params=CaptureParams.from_json_dict(d["params"]),
            checksum=d["checksum"],
        )


def _checksum(frame_blobs) -> str:
    digest = hashlib.sha256()
    for blob in frame_blobs:
        digest.update(blob)
    return digest.hexdigest()


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


# ---------------------------------------------------------------- ingestion

def ingest_frames(source_dir: Path, stride: int = 1,
                  params: CaptureParams | None = None,
                  name: str | None = None) -> Route:
    """Build a route from an image-sequence directory.

    Lexicographic filename order defines frame order; frames 0, stride,
    2*stride, ... are kept. Color frames are collapsed to grayscale on the
    way in. Video files are not handled here: extract frames first with an
    external tool (e.g. ffmpeg) and point this at the output directory.
    """
    source_dir = Path(source_dir)
    if stride < 1:
        raise ValueError("stride must be >= 1")
    files = sorted(
        p for p in source_dir.iterdir()
        if p.is_file() and p.suffix.lower() in _FRAME_EXTENSIONS
    ) if source_dir.is_dir() else []
    if not files:
        raise StoreError(f"no frames in {source_dir}")
    kept = files[::stride]
    if params is None:
        params = CaptureParams(stride=stride)
    snapshots = []
    for k, path in enumerate(kept):
        try:
            img = read_image(path)
        except Exception as exc:
            raise StoreError(f"cannot decode frame {path.name}: {exc}") from exc
        if isinstance(img, RgbImage):
            img = to_grayscale(img)
        snapshots.append(Snapshot(index=k, image=img))
    route_name = name if name is not None else source_dir.name
    return Route(name=route_name, snapshots=tuple(snapshots), params=params)


# ---------------------------------------------------------------- save / load

def save_route(route: Route, root_dir: Path, overwrite: bool = False) -> RouteManifest:
    """Write a route directory under root_dir/<name>; returns its manifest."""
    root_dir = Path(root_dir)
    dest = root_dir / route.name
    if dest.exists():
        if not overwrite:
            raise DuplicateRoute(f"route {route.name!r} already exists in {root_dir}")
        shutil.rmtree(dest)
    frames_dir = dest / FRAMES_DIR
    frames_dir.mkdir(parents=True)
    frame_files = []
    blobs = []
    for snap in route.snapshots:
        rel = f"{FRAMES_DIR}/frame_{snap.index:05d}.pgm"
        blob = encode_pgm(snap.image)
        (dest / rel).write_bytes(blob)
        frame_files.append(rel)
        blobs.append(blob)
    manifest = RouteManifest(
        name=route.name,
        created_at=_now_iso(),
        frame_files=tuple(frame_files),
        params=route.params,
        checksum=_checksum(blobs),
    )
    (dest / MANIFEST_NAME).write_text(
        json.dumps(manifest.to_json_dict(), indent=2), encoding="utf-8"
    )
    return manifest


def load_manifest(route_dir: Path) -> RouteManifest:
    route_dir = Path(route_dir)
    manifest_path = route_dir / MANIFEST_NAME
    if not manifest_path.is_file():
        raise NotARoute(f"not a route: {route_dir} has no {MANIFEST_NAME}")
    try:
        doc = json.loads(manifest_path.read_text(encoding="utf-8"))
        return RouteManifest.from_json_dict(doc)
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise NotARoute(f"not a route: malformed manifest in {route_dir}: {exc}") from exc


def load_route(route_dir: Path) -> Route:
    """Read a route directory back; verifies the checksum before decoding."""
    route_dir = Path(route_dir)
    manifest = load_manifest(route_dir)
    blobs = []
    for rel in manifest.frame_files:
        frame_path = route_dir / rel
        if not frame_path.is_file():
            raise StoreError(f"missing frame file {rel}")
        blobs.append(frame_path.read_bytes())
    if _checksum(blobs) != manifest.checksum:
        raise CorruptRoute(f"corrupt route: checksum mismatch in {route_dir}")
    snapshots = tuple(
        Snapshot(index=k, image=decode_pgm(blob)) for k, blob in enumerate(blobs)
    )
    return Route(name=manifest.name, snapshots=snapshots, params=manifest.params)


# ---------------------------------------------------------------- local catalog

class RouteStore:
    """Catalog of route directories under one root, with atomic ingestion.

    ``put_route`` stages everything in a scratch directory, verifies the
    checksum, then renames into place, so a failure at any intermediate
    step leaves the catalog unchanged. ``fault_hook`` (tests only) is
    called with a step label before each mutation.
    """

    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def route_dir(self, name: str) -> Path:
        if not _NAME_RE.match(name):
            raise StoreError(f"invalid route name {name!r}")
        return self.root / name

    def has_route(self, name: str) -> bool:
        return (self.route_dir(name) / MANIFEST_NAME).is_file()

    def list_routes(self) -> list[tuple[str, str, int]]:
        """(name, created_at, frame count) for every valid stored route."""
        entries = []
        for child in sorted(self.root.iterdir()) if self.root.is_dir() else []:
            if not child.is_dir() or child.name.startswith("."):
                continue
            try:
                manifest = load_manifest(child)
            except NotARoute:
                continue
            entries.append((manifest.name, manifest.created_at, len(manifest.frame_files)))
        return entries

    def get_manifest(self, name: str) -> RouteManifest:
        if not self.has_route(name):
            raise RouteNotFound(f"route {name!r} not found")
        return load_manifest(self.route_dir(name))

    def get_frame_bytes(self, name: str, index: int) -> bytes:
        manifest = self.get_manifest(name)
        if not 0 <= index < len(manifest.frame_files):
            raise RouteNotFound(f"route {name!r} has no frame {index}")
        return (self.route_dir(name) / manifest.frame_files[index]).read_bytes()

    def load(self, name: str) -> Route:
        if not self.has_route(name):
            raise RouteNotFound(f"route {name!r} not found")
        return load_route(self.route_dir(name))

    def put_route(self, manifest: RouteManifest, frames: list[bytes],
                  fault_hook=None) -> str:
        """Atomically add a fully verified route; returns its name."""
        def fault(step: str) -> None:
            if fault_hook is not None:
                fault_hook(step)

        if len(frames) != len(manifest.frame_files):
            raise StoreError("frame count does not match manifest")
        if _checksum(frames) != manifest.checksum:
            raise CorruptRoute("corrupt transfer: checksum mismatch")
        if self.has_route(manifest.name):
            raise DuplicateRoute(f"route {manifest.name!r} already exists")
        staging = self.root / f".staging-{uuid.uuid4().hex}"
        try:
            fault("create-staging")
            (staging / FRAMES_DIR).mkdir(parents=True)
            for rel, blob in zip(manifest.frame_files, frames):
                fault(f"write-{rel}")
                target = staging / rel
                target.parent.mkdir(parents=True, exist_ok=True)
                target.write_bytes(blob)
            fault("write-manifest")
            (staging / MANIFEST_NAME).write_text(
                json.dumps(manifest.to_json_dict(), indent=2), encoding="utf-8"
            )
            fault("commit")
            if self.has_route(manifest.name):
                raise DuplicateRoute(f"route {manifest.name!r} already exists")
            staging.rename(self.route_dir(manifest.name))
        except Exception:
            shutil.rmtree(staging, ignore_errors=True)
            raise
        return manifest.name

    def delete(self, name: str) -> None:
        if not self.has_route(name):
            raise RouteNotFound(f"route {name!r} not found")
        shutil.rmtree(self.route_dir(name))


# ---------------------------------------------------------------- remote sync

def _request(method: str, url: str, **kwargs):
    try:
        return requests.request(method, url, timeout=kwargs.pop("timeout", 30), **kwargs)
    except requests.RequestException as exc:
        raise TransferError(f"remote unreachable: {exc}") from exc


def sync_push(route_dir: Path, remote: str) -> str:
    """Upload a local route directory; returns the remote route id."""
    route_dir = Path(route_dir)
    manifest = load_manifest(route_dir)
    frames = [(route_dir / rel).read_bytes() for rel in manifest.frame_files]
    payload = {
        "manifest": manifest.to_json_dict(),
        "frames": [base64.b64encode(blob).decode("ascii") for blob in frames],
    }
    resp = _request("PUT", f"{remote.rstrip('/')}/routes/{manifest.name}", json=payload)
    if resp.status_code == 409:
        raise DuplicateRoute(f"route {manifest.name!r} already exists on remote")
    if resp.status_code not in (200, 201):
        raise TransferError(f"push rejected: {resp.status_code} {resp.text}")
    return resp.json()["id"]


def sync_pull(name: str, remote: str, dest_dir: Path) -> Path:
    """Download a remote route into dest_dir/<name>; verifies the checksum."""
    base = remote.rstrip("/")
    resp = _request("GET", f"{base}/routes/{name}")
    if resp.status_code == 404:
        raise RouteNotFound(f"route {name!r} not found on remote")
    if resp.status_code != 200:
        raise TransferError(f"pull rejected: {resp.status_code} {resp.text}")
    manifest = RouteManifest.from_json_dict(resp.json())
    blobs = []
    for i in range(len(manifest.frame_files)):
        frame_resp = _request("GET", f"{base}/routes/{name}/frames/{i}")
        if frame_resp.status_code != 200:
            raise TransferError(f"frame {i} fetch failed: {frame_resp.status_code}")
        blobs.append(frame_resp.content)
    if _checksum(blobs) != manifest.checksum:
        raise CorruptRoute(f"corrupt transfer: checksum mismatch for {name!r}")
    dest_dir = Path(dest_dir)
    dest_dir.mkdir(parents=True, exist_ok=True)
    final = dest_dir / name
    if final.exists():
        raise DuplicateRoute(f"route {name!r} already exists in {dest_dir}")
    staging = Path(tempfile.mkdtemp(prefix=".pull-", dir=dest_dir))
    try:
        (staging / FRAMES_DIR).mkdir()
        for rel, blob in zip(manifest.frame_files, blobs):
            target = staging / rel
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(blob)
        (staging / MANIFEST_NAME).write_text(
            json.dumps(manifest.to_json_dict(), indent=2), encoding="utf-8"
        )
        staging.rename(final)
    except Exception:
        shutil.rmtree(staging, ignore_errors=True)
        raise
    return final


def sync_list(remote: str) -> list[tuple[str, str, int]]:
    """Remote catalog as (name, created_at, frame count) tuples."""
    resp = _request("GET", f"{remote.rstrip('/')}/routes")
    if resp.status_code != 200:
        raise TransferError(f"list rejected: {resp.status_code} {resp.text}")
    return [
        (entry["name"], entry["created_at"], int(entry["frame_count"]))
        for entry in resp.json()
    ]
