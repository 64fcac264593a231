"""Frame and sequence containers plus dataset manifest I/O.

A recording is a sequence of 8x8 temperature grids. Frame files are plain
CSV (one frame per row); which activity a recording shows, and who performed
it, lives in a JSON manifest so recordings can be re-labeled without touching
pixel data.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

GRID_SIZE = 8
PIXEL_COUNT = GRID_SIZE * GRID_SIZE

# Measurement range of the Grid-EYE style thermopile arrays this library targets.
TEMP_MIN_C = 0.0
TEMP_MAX_C = 80.0

# Processing stages of a sequence.
RAW = "raw"
SUBTRACTED = "subtracted"

# Default 7-activity label schema for overhead fall/ADL monitoring.
ADL7_LABELS = (
    "fall",
    "sit_still",
    "stand_still",
    "sit_to_stand",
    "stand_to_sit",
    "walk_left_right",
    "walk_right_left",
)

BACKGROUND_ROLE = "background"


class ThermactError(Exception):
    """Base class for errors raised by this package."""


class SequenceFormatError(ThermactError):
    """A frame CSV file violates the expected format."""


class ManifestError(ThermactError):
    """A dataset manifest is invalid. Carries every violation found."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__(
            "invalid manifest (%d problem%s):\n%s"
            % (
                len(self.violations),
                "" if len(self.violations) == 1 else "s",
                "\n".join("  - " + v for v in self.violations),
            )
        )


def _frozen_array(values, shape: tuple[int, ...]) -> np.ndarray:
    arr = np.array(values, dtype=np.float64).reshape(shape)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class ThermalFrame:
    """One 8x8 grid of temperatures (degrees Celsius), row-major.

    Frames are immutable; `pixels` is a read-only float64 array of length 64.
    `timestamp_ms` is 0 when the source carried no timing information.
    """

    pixels: np.ndarray
    timestamp_ms: int = 0

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64).reshape(-1)
        if px.shape != (PIXEL_COUNT,):
            raise ValueError(f"frame needs {PIXEL_COUNT} pixels, got {px.size}")
        if not np.all(np.isfinite(px)):
            raise ValueError("frame contains non-finite pixel values")
        if self.timestamp_ms < 0:
            raise ValueError(f"negative timestamp: {self.timestamp_ms}")
        object.__setattr__(self, "pixels", _frozen_array(px, (PIXEL_COUNT,)))
        object.__setattr__(self, "timestamp_ms", int(self.timestamp_ms))

    def grid(self) -> np.ndarray:
        """The pixels as a read-only (8, 8) array."""
        return self.pixels.reshape(GRID_SIZE, GRID_SIZE)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ThermalFrame):
            return NotImplemented
        return self.timestamp_ms == other.timestamp_ms and np.array_equal(
            self.pixels, other.pixels
        )


@dataclass(frozen=True, eq=False)
class ThermalSequence:
    """Ordered frames of one recording plus its metadata.

    `stage` tracks whether the frames are raw sensor readings or have had a
    background subtracted; raw frames must lie within the sensor measurement
    range, subtracted frames may be negative. Labeled activity instances are
    expected to hold at least 2 frames; single-frame sequences are permitted
    so that e.g. a one-frame empty-scene clip can still seed a background
    model.
    """

    frames: tuple[ThermalFrame, ...]
    label: str | None = None
    subject_id: str = ""
    session_id: str = ""
    stage: str = RAW

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(self.frames))
        if len(self.frames) < 1:
            raise ValueError("sequence needs at least one frame")
        if self.stage not in (RAW, SUBTRACTED):
            raise ValueError(f"unknown processing stage: {self.stage!r}")
        if self.stage == RAW:
            for i, frame in enumerate(self.frames):
                lo, hi = frame.pixels.min(), frame.pixels.max()
                if lo < TEMP_MIN_C or hi > TEMP_MAX_C:
                    raise ValueError(
                        f"frame {i}: raw temperature outside "
                        f"[{TEMP_MIN_C}, {TEMP_MAX_C}] C (min={lo}, max={hi})"
                    )

    def __len__(self) -> int:
        return len(self.frames)

    def pixel_matrix(self) -> np.ndarray:
        """Frames stacked as a (frame_count, 64) float64 array."""
        return np.stack([f.pixels for f in self.frames])

    def with_frames(
        self, frames: tuple[ThermalFrame, ...], stage: str | None = None
    ) -> "ThermalSequence":
        """Copy of this sequence with new frames, metadata preserved."""
        return replace(self, frames=frames, stage=stage if stage is not None else self.stage)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ThermalSequence):
            return NotImplemented
        return (
            self.label == other.label
            and self.subject_id == other.subject_id
            and self.session_id == other.session_id
            and self.stage == other.stage
            and len(self.frames) == len(other.frames)
            and all(a == b for a, b in zip(self.frames, other.frames))
        )


# ---------------------------------------------------------------------------
# Frame CSV I/O
#
# One frame per row: `timestamp_ms,p00,...,p77` (65 fields) or the 64 pixel
# fields alone. Lines starting with `#` and blank lines are ignored.
# ---------------------------------------------------------------------------


def parse_sequence(source: bytes | str) -> ThermalSequence:
    """Parse frame CSV content into a raw, unlabeled sequence.

    Raises SequenceFormatError naming the offending 1-based line for rows
    with the wrong field count, non-numeric or non-finite values, raw
    temperatures outside the sensor range, or if no data rows are present.
    """
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    else:
        text = source
    frames: list[ThermalFrame] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = stripped.split(",")
        if len(fields) not in (PIXEL_COUNT, PIXEL_COUNT + 1):
            raise SequenceFormatError(
                f"line {lineno}: expected {PIXEL_COUNT} or {PIXEL_COUNT + 1} "
                f"fields, got {len(fields)}"
            )
        try:
            values = [float(f) for f in fields]
        except ValueError as exc:
            raise SequenceFormatError(f"line {lineno}: non-numeric field ({exc})") from None
        timestamp = 0
        if len(values) == PIXEL_COUNT + 1:
            ts = values[0]
            if not np.isfinite(ts) or ts != int(ts) or ts < 0:
                raise SequenceFormatError(
                    f"line {lineno}: timestamp must be a non-negative integer, got {fields[0]}"
                )
            timestamp = int(ts)
            values = values[1:]
        pixels = np.array(values)
        if not np.all(np.isfinite(pixels)):
            raise SequenceFormatError(f"line {lineno}: non-finite pixel value")
        if pixels.min() < TEMP_MIN_C or pixels.max() > TEMP_MAX_C:
            raise SequenceFormatError(
                f"line {lineno}: raw temperature outside "
                f"[{TEMP_MIN_C}, {TEMP_MAX_C}] C"
            )
        frames.append(ThermalFrame(pixels=pixels, timestamp_ms=timestamp))
    if not frames:
        raise SequenceFormatError("no frame rows found (empty file)")
    return ThermalSequence(frames=tuple(frames))


def read_sequence(path: str | Path) -> ThermalSequence:
    """Read and parse a frame CSV file."""
    return parse_sequence(Path(path).read_bytes())


def serialize_sequence(seq: ThermalSequence) -> str:
    """Render a sequence as frame CSV at full float precision.

    The timestamp column is always written; `parse_sequence` of the result
    reproduces the frames bit-exactly.
    """
    lines = ["# timestamp_ms," + ",".join(f"p{r}{c}" for r in range(8) for c in range(8))]
    for frame in seq.frames:
        lines.append(
            str(frame.timestamp_ms) + "," + ",".join(repr(float(v)) for v in frame.pixels)
        )
    return "\n".join(lines) + "\n"


def write_sequence(seq: ThermalSequence, path: str | Path) -> None:
    Path(path).write_text(serialize_sequence(seq), encoding="utf-8")


# ---------------------------------------------------------------------------
# Dataset manifests
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ManifestEntry:
    """One labeled recording: where it lives and who/what it shows."""

    path: str
    label: str
    subject_id: str
    session_id: str


@dataclass(frozen=True)
class BackgroundEntry:
    """An empty-scene clip; session_id == "" marks the global fallback."""

    path: str
    session_id: str = ""


@dataclass(frozen=True)
class DatasetManifest:
    """Index of a dataset: labeled entries, label schema, background clips.

    Construction validates the structural invariants (non-empty, labels drawn
    from `label_set`, unique paths); file-level checks happen in
    `load_manifest`. `root` is the directory entry paths are resolved against.
    """

    entries: tuple[ManifestEntry, ...]
    label_set: tuple[str, ...]
    sensor_id: str = ""
    backgrounds: tuple[BackgroundEntry, ...] = ()
    root: Path | None = None

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        object.__setattr__(self, "label_set", tuple(self.label_set))
        object.__setattr__(self, "backgrounds", tuple(self.backgrounds))
        violations = _structural_violations(self.entries, self.label_set, self.backgrounds)
        if violations:
            raise ManifestError(violations)

    def resolve(self, path: str) -> Path:
        p = Path(path)
        if p.is_absolute() or self.root is None:
            return p
        return self.root / p

    def subjects(self) -> tuple[str, ...]:
        """Distinct subject ids in first-appearance order."""
        return tuple(dict.fromkeys(e.subject_id for e in self.entries))


def _structural_violations(entries, label_set, backgrounds) -> list[str]:
    violations = []
    if not entries:
        violations.append("empty dataset: manifest declares no entries")
    if len(set(label_set)) != len(label_set):
        violations.append("label_set contains duplicates")
    known = set(label_set)
    seen_paths: set[str] = set()
    for i, entry in enumerate(entries):
        if entry.label not in known:
            violations.append(f"entry {i} ({entry.path}): unknown label {entry.label!r}")
        if entry.path in seen_paths:
            violations.append(f"entry {i}: duplicate path {entry.path!r}")
        seen_paths.add(entry.path)
    bg_sessions: set[str] = set()
    for bg in backgrounds:
        if bg.path in seen_paths:
            violations.append(f"background {bg.path!r}: duplicate path")
        seen_paths.add(bg.path)
        if bg.session_id in bg_sessions:
            which = f"session {bg.session_id!r}" if bg.session_id else "the global fallback"
            violations.append(f"more than one background clip for {which}")
        bg_sessions.add(bg.session_id)
    return violations


def load_manifest(path: str | Path) -> DatasetManifest:
    """Load and eagerly validate a manifest JSON file.

    Every referenced frame file must exist and parse; activity entries must
    hold at least 2 frames. All violations are collected and reported
    together in a single ManifestError.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ManifestError([f"cannot read manifest {path}: {exc}"]) from exc
    except json.JSONDecodeError as exc:
        raise ManifestError([f"manifest {path} is not valid JSON: {exc}"]) from exc
    if not isinstance(data, dict):
        raise ManifestError([f"manifest {path}: top level must be a JSON object"])

    violations: list[str] = []
    label_set = data.get("label_set")
    if not isinstance(label_set, list) or not all(isinstance(s, str) for s in label_set):
        violations.append('"label_set" must be a list of strings')
        label_set = []
    sensor_id = data.get("sensor_id", "")
    raw_entries = data.get("entries")
    if not isinstance(raw_entries, list):
        violations.append('"entries" must be a list')
        raw_entries = []

    entries: list[ManifestEntry] = []
    backgrounds: list[BackgroundEntry] = []
    for i, item in enumerate(raw_entries):
        if not isinstance(item, dict) or not isinstance(item.get("path"), str):
            violations.append(f'entry {i}: must be an object with a string "path" field')
            continue
        if item.get("role") == BACKGROUND_ROLE:
            backgrounds.append(
                BackgroundEntry(path=item["path"], session_id=str(item.get("session", "")))
            )
        else:
            if not isinstance(item.get("label"), str):
                violations.append(f'entry {i} ({item["path"]}): missing or non-string "label"')
                continue
            entries.append(
                ManifestEntry(
                    path=item["path"],
                    label=item["label"],
                    subject_id=str(item.get("subject", "")),
                    session_id=str(item.get("session", "")),
                )
            )

    violations.extend(_structural_violations(entries, tuple(label_set), backgrounds))

    root = path.parent

    def resolve(p: str) -> Path:
        candidate = Path(p)
        return candidate if candidate.is_absolute() else root / candidate

    for entry in entries:
        violations.extend(_file_violations(resolve(entry.path), min_frames=2))
    for bg in backgrounds:
        violations.extend(_file_violations(resolve(bg.path), min_frames=1))

    if violations:
        raise ManifestError(violations)
    return DatasetManifest(
        entries=tuple(entries),
        label_set=tuple(label_set),
        sensor_id=sensor_id,
        backgrounds=tuple(backgrounds),
        root=root,
    )


def _file_violations(path: Path, min_frames: int) -> list[str]:
    if not path.is_file():
        return [f"missing file: {path}"]
    try:
        seq = read_sequence(path)
    except SequenceFormatError as exc:
        return [f"{path}: {exc}"]
    if len(seq) < min_frames:
        return [f"{path}: needs at least {min_frames} frames, has {len(seq)}"]
    return []


def load_sequences(manifest: DatasetManifest) -> list[ThermalSequence]:
    """Parse every activity entry, attaching label and subject metadata.

    Sequences come back in manifest order.
    """
    out = []
    for entry in manifest.entries:
        seq = read_sequence(manifest.resolve(entry.path))
        out.append(
            replace(
                seq,
                label=entry.label,
                subject_id=entry.subject_id,
                session_id=entry.session_id,
            )
        )
    return out


def load_backgrounds(manifest: DatasetManifest) -> dict[str, ThermalSequence]:
    """Background clips keyed by session id ("" = global fallback)."""
    return {
        bg.session_id: replace(read_sequence(manifest.resolve(bg.path)), session_id=bg.session_id)
        for bg in manifest.backgrounds
    }


def write_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    """Write a manifest as JSON (paths as stored, i.e. relative to the file)."""
    items = [
        {"path": e.path, "label": e.label, "subject": e.subject_id, "session": e.session_id}
        for e in manifest.entries
    ]
    for bg in manifest.backgrounds:
        item = {"path": bg.path, "role": BACKGROUND_ROLE}
        if bg.session_id:
            item["session"] = bg.session_id
        items.append(item)
    payload = {
        "label_set": list(manifest.label_set),
        "sensor_id": manifest.sensor_id,
        "entries": items,
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
