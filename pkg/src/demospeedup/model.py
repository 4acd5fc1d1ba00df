"""Demonstration dataset model and on-disk format.

A dataset is a directory:

    manifest.json           {"version": 1, "action_dim": D, "frequency_hz": f,
                             "trajectories": [{"id": ..., "file": ..., "length": T}, ...]}
    traj_<i>.bin            one per trajectory, indexed by manifest order
    contacts_<i>.json       optional contact-event annotations
    ground_truth.json       optional, written by the synthetic generator

Trajectory binary layout, all little-endian:

    bytes 0..3   magic b"DSUP"
    byte  4      format version (1)
    bytes 5..7   reserved, zero
    bytes 8..11  u32 frame count T
    bytes 12..15 u32 action dimension D
    then T*D float32 actions, row-major (frame-major)

Actions are stored as float32; numeric code upcasts to float64 internally.
Frame indices are 1-based everywhere in this package: frame t of a
trajectory with T frames satisfies 1 <= t <= T.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._fsio import atomic_write_bytes, atomic_write_text

TRAJ_MAGIC = b"DSUP"
TRAJ_VERSION = 1
_HEADER = struct.Struct("<4sB3xII")


class DatasetFormatError(Exception):
    """A dataset directory or file does not conform to the format."""


@dataclass
class Trajectory:
    """One demonstration: T frames of D-dimensional actions.

    obs_refs are opaque per-frame observation identifiers. The on-disk
    format does not store them; they default to the frame indices 1..T
    and are regenerated on load.
    """

    trajectory_id: str
    actions: np.ndarray
    frequency_hz: float
    obs_refs: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        arr = np.asarray(self.actions, dtype=np.float32)
        if arr.ndim != 2:
            raise ValueError(f"actions must be 2-D (frames x dims), got shape {arr.shape}")
        self.actions = np.ascontiguousarray(arr)
        if not self.obs_refs:
            self.obs_refs = tuple(range(1, self.n_frames + 1))
        elif len(self.obs_refs) != self.n_frames:
            raise ValueError(
                f"obs_refs length {len(self.obs_refs)} != frame count {self.n_frames}"
            )

    @property
    def n_frames(self) -> int:
        return int(self.actions.shape[0])

    @property
    def action_dim(self) -> int:
        return int(self.actions.shape[1])


@dataclass
class Dataset:
    """A collection of trajectories sharing one action space and control rate."""

    trajectories: list[Trajectory]
    action_dim: int
    frequency_hz: float
    meta: dict[str, str] = field(default_factory=dict)

    def by_id(self, trajectory_id: str) -> Trajectory:
        for traj in self.trajectories:
            if traj.trajectory_id == trajectory_id:
                return traj
        raise KeyError(trajectory_id)


@dataclass
class ActionChunk:
    """A K-step action window starting at frame t, tail-padded past the end."""

    trajectory_id: str
    start: int
    actions: np.ndarray


@dataclass
class ContactEvent:
    """A contact annotation: the gripper attaches to or detaches from an object."""

    t: int
    kind: str  # "attach" | "detach"


@dataclass
class ValidationReport:
    """Dataset health check result; issues are (trajectory id, message) pairs."""

    issues: list[tuple[str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues


def chunk_at(traj: Trajectory, t: int, k: int) -> ActionChunk:
    """Actions for frames t..t+k-1, padding past the last frame with a_T."""
    if not 1 <= t <= traj.n_frames:
        raise ValueError(f"frame {t} outside [1, {traj.n_frames}]")
    if k < 1:
        raise ValueError(f"chunk length must be >= 1, got {k}")
    avail = traj.actions[t - 1 : t - 1 + k]
    if avail.shape[0] < k:
        pad = np.repeat(traj.actions[-1:], k - avail.shape[0], axis=0)
        avail = np.concatenate([avail, pad], axis=0)
    return ActionChunk(traj.trajectory_id, t, avail.copy())


def validate(dataset: Dataset) -> ValidationReport:
    """Flag problems without raising: validation reports, loaders reject."""
    report = ValidationReport()
    seen: set[str] = set()
    for traj in dataset.trajectories:
        tid = traj.trajectory_id
        if tid in seen:
            report.issues.append((tid, "duplicate trajectory id"))
        seen.add(tid)
        if traj.n_frames == 0:
            report.issues.append((tid, "zero-length trajectory"))
        if traj.action_dim != dataset.action_dim:
            report.issues.append(
                (tid, f"action dim {traj.action_dim} != dataset action dim {dataset.action_dim}")
            )
        if traj.frequency_hz != dataset.frequency_hz:
            report.issues.append(
                (tid, f"frequency {traj.frequency_hz} != dataset frequency {dataset.frequency_hz}")
            )
        if traj.frequency_hz <= 0:
            report.issues.append((tid, f"non-positive frequency {traj.frequency_hz}"))
        bad = ~np.isfinite(traj.actions)
        if bad.any():
            frames = np.unique(np.nonzero(bad)[0]) + 1
            report.issues.append((tid, f"non-finite actions at frames {frames[:5].tolist()}"))
    return report


def trajectory_file_name(index: int) -> str:
    return f"traj_{index}.bin"


def contacts_file_name(index: int) -> str:
    return f"contacts_{index}.json"


def _encode_trajectory(traj: Trajectory) -> bytes:
    header = _HEADER.pack(TRAJ_MAGIC, TRAJ_VERSION, traj.n_frames, traj.action_dim)
    body = np.ascontiguousarray(traj.actions, dtype="<f4").tobytes()
    return header + body


def _decode_trajectory(raw: bytes, path: Path) -> np.ndarray:
    if len(raw) < _HEADER.size:
        raise DatasetFormatError(f"{path}: truncated header ({len(raw)} bytes)")
    magic, version, n_frames, dim = _HEADER.unpack_from(raw)
    if magic != TRAJ_MAGIC:
        raise DatasetFormatError(f"{path}: bad magic {magic!r}")
    if version != TRAJ_VERSION:
        raise DatasetFormatError(f"{path}: unsupported version {version}")
    expect = _HEADER.size + 4 * n_frames * dim
    if len(raw) != expect:
        raise DatasetFormatError(f"{path}: size {len(raw)} != expected {expect}")
    flat = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size)
    actions = flat.reshape(n_frames, dim)
    if not np.isfinite(actions).all():
        raise DatasetFormatError(f"{path}: non-finite action values")
    return actions.copy()


def load_dataset(path: Path | str) -> Dataset:
    """Load a dataset directory, rejecting malformed files by name."""
    root = Path(path)
    manifest_path = root / "manifest.json"
    if not manifest_path.is_file():
        raise DatasetFormatError(f"{manifest_path}: missing manifest")
    try:
        manifest = json.loads(manifest_path.read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise DatasetFormatError(f"{manifest_path}: invalid JSON ({exc})") from exc
    if manifest.get("version") != 1:
        raise DatasetFormatError(f"{manifest_path}: unsupported version {manifest.get('version')!r}")
    for key in ("action_dim", "frequency_hz", "trajectories"):
        if key not in manifest:
            raise DatasetFormatError(f"{manifest_path}: missing key {key!r}")
    action_dim = int(manifest["action_dim"])
    frequency_hz = float(manifest["frequency_hz"])
    trajectories: list[Trajectory] = []
    for entry in manifest["trajectories"]:
        traj_path = root / entry["file"]
        if not traj_path.is_file():
            raise DatasetFormatError(f"{traj_path}: missing trajectory file")
        actions = _decode_trajectory(traj_path.read_bytes(), traj_path)
        if actions.shape[0] != int(entry["length"]):
            raise DatasetFormatError(
                f"{traj_path}: length {actions.shape[0]} != manifest length {entry['length']}"
            )
        if actions.shape[1] != action_dim:
            raise DatasetFormatError(
                f"{traj_path}: action dim {actions.shape[1]} != manifest action_dim {action_dim}"
            )
        trajectories.append(Trajectory(str(entry["id"]), actions, frequency_hz))
    meta = {str(k): str(v) for k, v in manifest.get("meta", {}).items()}
    return Dataset(trajectories, action_dim, frequency_hz, meta)


def write_dataset(dataset: Dataset, path: Path | str) -> None:
    """Write a dataset directory; equal inputs produce identical bytes."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, traj in enumerate(dataset.trajectories):
        name = trajectory_file_name(i)
        atomic_write_bytes(root / name, _encode_trajectory(traj))
        entries.append({"id": traj.trajectory_id, "file": name, "length": traj.n_frames})
    manifest: dict = {
        "version": 1,
        "action_dim": dataset.action_dim,
        "frequency_hz": dataset.frequency_hz,
        "trajectories": entries,
    }
    if dataset.meta:
        manifest["meta"] = dataset.meta
    atomic_write_text(root / "manifest.json", json.dumps(manifest, indent=2) + "\n")


def read_contacts(path: Path | str) -> list[ContactEvent]:
    path = Path(path)
    try:
        raw = json.loads(path.read_text("utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DatasetFormatError(f"{path}: cannot read contact events ({exc})") from exc
    events = []
    for item in raw:
        kind = item["event"]
        if kind not in ("attach", "detach"):
            raise DatasetFormatError(f"{path}: unknown contact event {kind!r}")
        events.append(ContactEvent(int(item["t"]), kind))
    return events


def write_contacts(events: list[ContactEvent], path: Path | str) -> None:
    payload = [{"t": e.t, "event": e.kind} for e in events]
    atomic_write_text(Path(path), json.dumps(payload, indent=2) + "\n")
