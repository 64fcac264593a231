"""Synthetic 8x8 thermal sequence generator.

A single Gaussian "body" blob moves over a noisy ambient field; at this
resolution that is visually indistinguishable from a real person and,
unlike real recordings, comes with analytic ground truth. Seven built-in
activity scripts mirror the overhead fall/ADL label schema:

* fall: fast lateral displacement while the blob spreads and cools;
* sit_still / stand_still: static blobs whose size and warmth ranges
  deliberately overlap, so these two stay the hardest pair to tell apart;
* sit_to_stand / stand_to_sit: opposite slow ramps between the two still
  poses, distinguishable by the time order of frame-wise spatial features;
* the two walks: exact left-right mirror paths. Because the feature stage
  keeps only transform magnitudes, a constant-speed constant-heat walk and
  its mirror would be mathematically identical; the scripts therefore walk
  with a gentle accelerating gait and warm slightly along the way, which is
  direction-revealing while keeping the mirror symmetry exact.

Everything is deterministic given the seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .core import (
    ADL7_LABELS,
    GRID_SIZE,
    PIXEL_COUNT,
    RAW,
    TEMP_MAX_C,
    TEMP_MIN_C,
    BackgroundEntry,
    DatasetManifest,
    ManifestEntry,
    ThermalFrame,
    ThermalSequence,
    _frozen_array,
    write_manifest,
    write_sequence,
)

# Fixed pattern used when no per-sensor offsets are supplied.
_OFFSET_SEED = 8833

DEFAULT_DURATIONS_S = {
    "fall": 1.0,
    "sit_still": 5.0,
    "stand_still": 5.0,
    "sit_to_stand": 2.0,
    "stand_to_sit": 2.0,
    "walk_left_right": 3.0,
    "walk_right_left": 3.0,
}

# Canonical blob parameters for the two still poses. Overhead, a standing
# person is nearer the sensor: smaller and warmer than a seated one.
_STAND_SIGMA, _STAND_AMP = 0.78, 6.3
_SIT_SIGMA, _SIT_AMP = 1.05, 5.7


def default_pixel_offsets() -> np.ndarray:
    return np.random.default_rng(_OFFSET_SEED).uniform(-0.5, 0.5, PIXEL_COUNT)


@dataclass(frozen=True, eq=False)
class SceneParams:
    """Sensor and environment model for rendering."""

    ambient_mean: float = 21.0
    ambient_pixel_offsets: np.ndarray = field(default_factory=default_pixel_offsets)
    noise_std: float = 0.25
    frame_rate_hz: float = 10.0
    quantize_step: float = 0.25

    def __post_init__(self):
        offsets = np.asarray(self.ambient_pixel_offsets, dtype=np.float64).reshape(-1)
        if offsets.shape != (PIXEL_COUNT,):
            raise ValueError(f"need {PIXEL_COUNT} pixel offsets, got {offsets.size}")
        if not TEMP_MIN_C <= self.ambient_mean <= TEMP_MAX_C:
            raise ValueError("ambient_mean outside the sensor range")
        if self.noise_std <= 0:
            raise ValueError("noise_std must be positive")
        if self.frame_rate_hz <= 0:
            raise ValueError("frame_rate_hz must be positive")
        if self.quantize_step < 0:
            raise ValueError("quantize_step must be >= 0")
        object.__setattr__(
            self, "ambient_pixel_offsets", _frozen_array(offsets, (PIXEL_COUNT,))
        )

    def to_dict(self) -> dict:
        return {
            "ambient_mean": self.ambient_mean,
            "ambient_pixel_offsets": list(self.ambient_pixel_offsets),
            "noise_std": self.noise_std,
            "frame_rate_hz": self.frame_rate_hz,
            "quantize_step": self.quantize_step,
        }


def scene_from_dict(data: dict) -> SceneParams:
    allowed = {
        "ambient_mean",
        "ambient_pixel_offsets",
        "noise_std",
        "frame_rate_hz",
        "quantize_step",
    }
    unknown = set(data) - allowed
    if unknown:
        raise ValueError(f"unknown scene key(s): {sorted(unknown)}")
    return SceneParams(**data)


@dataclass(frozen=True)
class ScriptKey:
    """Blob state at time fraction u of the script (0 = start, 1 = end)."""

    u: float
    x: float
    y: float
    sigma_x: float
    sigma_y: float
    amplitude: float


@dataclass(frozen=True)
class ActivityScript:
    """Piecewise-linear blob trajectory for one activity instance.

    Between keys every channel (position, spread, amplitude) interpolates
    linearly. Paths must stay within the grid padded outward by two sigmas
    unless `allow_offgrid` is set (fall and exit style scripts).
    """

    label: str | None
    duration_s: float
    keys: tuple[ScriptKey, ...]
    allow_offgrid: bool = False

    def __post_init__(self):
        object.__setattr__(self, "keys", tuple(self.keys))
        if self.duration_s <= 0:
            raise ValueError("duration_s must be positive")
        if not self.keys:
            raise ValueError("script needs at least one key")
        us = [k.u for k in self.keys]
        if us != sorted(us) or us[0] < 0 or us[-1] > 1:
            raise ValueError("key time fractions must be non-decreasing within [0, 1]")
        for k in self.keys:
            if k.sigma_x <= 0 or k.sigma_y <= 0:
                raise ValueError(f"degenerate blob sigma at u={k.u}")
            if not self.allow_offgrid:
                lim = GRID_SIZE - 1
                if not (-2 * k.sigma_x <= k.x <= lim + 2 * k.sigma_x) or not (
                    -2 * k.sigma_y <= k.y <= lim + 2 * k.sigma_y
                ):
                    raise ValueError(f"blob path leaves the padded grid at u={k.u}")

    def sample(self, u: np.ndarray) -> tuple[np.ndarray, ...]:
        """(x, y, sigma_x, sigma_y, amplitude) arrays at time fractions u."""
        u = np.asarray(u, dtype=np.float64)
        us = np.array([k.u for k in self.keys])
        channels = []
        for attr in ("x", "y", "sigma_x", "sigma_y", "amplitude"):
            vals = np.array([getattr(k, attr) for k in self.keys])
            channels.append(np.interp(u, us, vals))
        return tuple(channels)

    def mirrored_x(self, label: str | None = None) -> "ActivityScript":
        """The same script reflected left-right (x -> 7 - x)."""
        keys = tuple(replace(k, x=(GRID_SIZE - 1) - k.x) for k in self.keys)
        return replace(self, keys=keys, label=label if label is not None else self.label)


def blob_field(script: ActivityScript, u: np.ndarray) -> np.ndarray:
    """Noise-free blob contribution at pixel centers, shape (len(u), 64)."""
    x, y, sx, sy, amp = script.sample(u)
    cols = np.arange(GRID_SIZE, dtype=np.float64)
    rows = np.arange(GRID_SIZE, dtype=np.float64)
    dx2 = (cols[None, :] - x[:, None]) ** 2 / (2.0 * sx[:, None] ** 2)
    dy2 = (rows[None, :] - y[:, None]) ** 2 / (2.0 * sy[:, None] ** 2)
    blob = amp[:, None, None] * np.exp(-(dy2[:, :, None] + dx2[:, None, :]))
    return blob.reshape(len(np.atleast_1d(u)), PIXEL_COUNT)


def frame_times(scene: SceneParams, script: ActivityScript) -> np.ndarray:
    n = max(1, round(script.duration_s * scene.frame_rate_hz))
    return np.arange(n) / scene.frame_rate_hz


def render_frames(
    scene: SceneParams, script: ActivityScript, seed: int | np.random.Generator
) -> tuple[np.ndarray, int]:
    """Raw pixel values (frame_count, 64) plus the count of clamped values.

    Frame f sits at time f / frame_rate; the value of each pixel is ambient
    mean + fixed per-pixel offset + blob + i.i.d. Gaussian noise, optionally
    quantized, then clamped to the sensor range (clamping should not occur
    at default settings).
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    times = frame_times(scene, script)
    u = np.clip(times / script.duration_s, 0.0, 1.0)
    values = (
        scene.ambient_mean
        + scene.ambient_pixel_offsets[None, :]
        + blob_field(script, u)
        + rng.normal(0.0, scene.noise_std, (len(times), PIXEL_COUNT))
    )
    if scene.quantize_step > 0:
        values = np.round(values / scene.quantize_step) * scene.quantize_step
    clamped = int(np.count_nonzero((values < TEMP_MIN_C) | (values > TEMP_MAX_C)))
    values = np.clip(values, TEMP_MIN_C, TEMP_MAX_C)
    return values, clamped


def render_sequence(
    scene: SceneParams, script: ActivityScript, seed: int | np.random.Generator
) -> ThermalSequence:
    """Render a script into a raw labeled sequence."""
    values, _ = render_frames(scene, script, seed)
    times = frame_times(scene, script)
    frames = tuple(
        ThermalFrame(pixels=row, timestamp_ms=int(round(1000.0 * t)))
        for row, t in zip(values, times)
    )
    return ThermalSequence(frames=frames, label=script.label, stage=RAW)


# ---------------------------------------------------------------------------
# Built-in activity scripts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SubjectProfile:
    """Per-subject habits: where they linger, how warm/big/fast they read."""

    center_x: float = 3.5
    center_y: float = 3.5
    sigma_shift: float = 0.0
    amplitude_shift: float = 0.0
    speed_factor: float = 1.0
    walk_lane: float = 3.5

    @classmethod
    def draw(cls, rng: np.random.Generator) -> "SubjectProfile":
        return cls(
            center_x=3.5 + rng.uniform(-0.6, 0.6),
            center_y=3.5 + rng.uniform(-0.6, 0.6),
            sigma_shift=rng.uniform(-0.08, 0.08),
            amplitude_shift=rng.uniform(-0.25, 0.25),
            speed_factor=rng.uniform(0.88, 1.12),
            walk_lane=3.5 + rng.uniform(-0.8, 0.8),
        )


class _Draw:
    """Uniform draws from an rng, or the interval midpoint when canonical."""

    def __init__(self, rng: np.random.Generator | None):
        self.rng = rng

    def __call__(self, lo: float, hi: float) -> float:
        if self.rng is None:
            return (lo + hi) / 2.0
        return float(self.rng.uniform(lo, hi))


def _still_script(label, draw, profile, duration):
    sit = label == "sit_still"
    sigma = (_SIT_SIGMA if sit else _STAND_SIGMA) + profile.sigma_shift + draw(-0.09, 0.09)
    amp = (_SIT_AMP if sit else _STAND_AMP) + profile.amplitude_shift + draw(-0.22, 0.22)
    cx = profile.center_x + draw(-0.35, 0.35)
    cy = profile.center_y + draw(-0.35, 0.35)
    keys = (
        ScriptKey(0.0, cx, cy, sigma, sigma, amp),
        ScriptKey(1.0, cx, cy, sigma, sigma, amp),
    )
    return ActivityScript(label=label, duration_s=duration, keys=keys)


def _transition_script(label, draw, profile, duration):
    sit_sigma = _SIT_SIGMA + profile.sigma_shift + draw(-0.06, 0.06)
    stand_sigma = _STAND_SIGMA + profile.sigma_shift + draw(-0.06, 0.06)
    sit_amp = _SIT_AMP + profile.amplitude_shift + draw(-0.18, 0.18)
    stand_amp = _STAND_AMP + profile.amplitude_shift + draw(-0.18, 0.18)
    cx = profile.center_x + draw(-0.35, 0.35)
    cy = profile.center_y + draw(-0.35, 0.35)
    dx, dy = draw(-0.3, 0.3), draw(-0.3, 0.3)
    if label == "sit_to_stand":
        start = (sit_sigma, sit_amp)
        end = (stand_sigma, stand_amp)
    else:
        start = (stand_sigma, stand_amp)
        end = (sit_sigma, sit_amp)
    # Mid-motion the body leans and moves: it reads briefly more compact and
    # warmer than either pose. Stills never show this bump, which keeps
    # slow transitions with similar endpoints from looking like one.
    mid_sigma = 0.82 * (start[0] + end[0]) / 2.0
    mid_amp = max(start[1], end[1]) + 0.45
    keys = (
        ScriptKey(0.0, cx, cy, start[0], start[0], start[1]),
        ScriptKey(0.45, cx + 0.6 * dx, cy + 0.6 * dy, mid_sigma, mid_sigma, mid_amp),
        ScriptKey(1.0, cx + dx, cy + dy, end[0], end[0], end[1]),
    )
    return ActivityScript(label=label, duration_s=duration, keys=keys)


def _fall_script(draw, profile, duration):
    cx = min(max(profile.center_x + draw(-0.45, 0.45), 2.6), 4.4)
    cy = min(max(profile.center_y + draw(-0.45, 0.45), 2.6), 4.4)
    angle = draw(0.0, 2.0 * np.pi)
    dist = draw(1.9, 2.5)
    ex, ey = cx + dist * np.cos(angle), cy + dist * np.sin(angle)
    amp0 = 6.3 + profile.amplitude_shift + draw(-0.15, 0.15)
    sigma0 = 0.8 + profile.sigma_shift + draw(-0.05, 0.05)
    keys = (
        ScriptKey(0.0, cx, cy, sigma0, sigma0, amp0),
        ScriptKey(0.4, cx + 0.55 * (ex - cx), cy + 0.55 * (ey - cy), 1.15, 1.15, amp0 - 0.7),
        ScriptKey(1.0, ex, ey, 1.7 + profile.sigma_shift, 1.7 + profile.sigma_shift, 3.9 + profile.amplitude_shift),
    )
    return ActivityScript(label="fall", duration_s=duration, keys=keys, allow_offgrid=True)


def _walk_script(draw, profile, duration):
    # Left-to-right form; the right-to-left script is its exact x mirror.
    # The gait accelerates and the blob warms along the way: magnitude-only
    # features cannot tell mirrored constant walks apart, these asymmetries
    # in time are what make the two directions separable.
    lane = profile.walk_lane + draw(-0.25, 0.25)
    x0 = 0.45 + draw(0.0, 0.2)
    x1 = 6.55 - draw(0.0, 0.2)
    sigma = 0.85 + profile.sigma_shift + draw(-0.07, 0.07)
    amp0 = 5.85 + profile.amplitude_shift + draw(-0.15, 0.15)
    amp1 = amp0 + 0.6
    span = x1 - x0
    keys = (
        ScriptKey(0.0, x0, lane, sigma, sigma, amp0),
        ScriptKey(0.3, x0 + 0.22 * span, lane, sigma, sigma, amp0 + 0.18),
        ScriptKey(0.6, x0 + 0.55 * span, lane, sigma, sigma, amp0 + 0.38),
        ScriptKey(1.0, x1, lane, sigma, sigma, amp1),
    )
    return ActivityScript(label="walk_left_right", duration_s=duration, keys=keys)


def builtin_scripts(
    rng: np.random.Generator | None = None,
    profile: SubjectProfile | None = None,
    durations: dict[str, float] | None = None,
) -> dict[str, ActivityScript]:
    """One script per built-in label, jittered from `rng` when given.

    The two walk scripts share one parameter draw, so with the same rng state
    they are exact mirror images of each other.
    """
    profile = profile or SubjectProfile()
    durations = {**DEFAULT_DURATIONS_S, **(durations or {})}
    draw = _Draw(rng)

    def dur(label):
        return durations[label] * profile.speed_factor * draw(0.92, 1.08)

    # falls complete within their nominal duration: jitter only shortens them
    fall_duration = min(durations["fall"], dur("fall"))
    scripts = {
        "fall": _fall_script(draw, profile, fall_duration),
        "sit_still": _still_script("sit_still", draw, profile, dur("sit_still")),
        "stand_still": _still_script("stand_still", draw, profile, dur("stand_still")),
        "sit_to_stand": _transition_script("sit_to_stand", draw, profile, dur("sit_to_stand")),
        "stand_to_sit": _transition_script("stand_to_sit", draw, profile, dur("stand_to_sit")),
    }
    walk = _walk_script(draw, profile, dur("walk_left_right"))
    scripts["walk_left_right"] = walk
    scripts["walk_right_left"] = walk.mirrored_x(label="walk_right_left")
    return scripts


def empty_scene_script(duration_s: float = 6.0) -> ActivityScript:
    """A zero-amplitude script: rendering it yields pure ambient + noise."""
    keys = (
        ScriptKey(0.0, 3.5, 3.5, 1.0, 1.0, 0.0),
        ScriptKey(1.0, 3.5, 3.5, 1.0, 1.0, 0.0),
    )
    return ActivityScript(label=None, duration_s=duration_s, keys=keys)


# ---------------------------------------------------------------------------
# Corpus generation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CorpusSummary:
    manifest_path: Path
    sequence_count: int
    clamped_values: int


def generate_corpus(
    out_dir: str | Path,
    subjects: int = 8,
    reps: int = 3,
    seed: int = 42,
    scene: SceneParams | None = None,
) -> CorpusSummary:
    """Write a labeled corpus: frame CSVs, a background clip, manifest JSON.

    Layout: subjects x reps x the 7 built-in activities, one session per
    (subject, rep), a single global background clip. Same seed, same bytes.
    """
    if subjects < 1 or reps < 1:
        raise ValueError("subjects and reps must be >= 1")
    scene = scene or SceneParams()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    root_ss = np.random.SeedSequence(seed)
    children = root_ss.spawn(subjects + 1)
    clamped = 0

    bg_rng = np.random.default_rng(children[0])
    bg_values, c = render_frames(scene, empty_scene_script(), bg_rng)
    clamped += c
    bg_frames = tuple(
        ThermalFrame(pixels=row, timestamp_ms=int(round(1000.0 * i / scene.frame_rate_hz)))
        for i, row in enumerate(bg_values)
    )
    write_sequence(ThermalSequence(frames=bg_frames), out / "background.csv")

    entries = []
    for si in range(1, subjects + 1):
        subj_ss = children[si]
        subj_children = subj_ss.spawn(1 + reps * len(ADL7_LABELS))
        profile = SubjectProfile.draw(np.random.default_rng(subj_children[0]))
        subject_id = f"s{si:02d}"
        inst = 1
        for rep in range(1, reps + 1):
            session_id = f"{subject_id}r{rep}"
            for label in ADL7_LABELS:
                rng = np.random.default_rng(subj_children[inst])
                inst += 1
                script = builtin_scripts(rng, profile)[label]
                values, c = render_frames(scene, script, rng)
                clamped += c
                times = frame_times(scene, script)
                frames = tuple(
                    ThermalFrame(pixels=row, timestamp_ms=int(round(1000.0 * t)))
                    for row, t in zip(values, times)
                )
                seq = ThermalSequence(
                    frames=frames, label=label, subject_id=subject_id, session_id=session_id
                )
                name = f"{session_id}_{label}.csv"
                write_sequence(seq, out / name)
                entries.append(
                    ManifestEntry(path=name, label=label, subject_id=subject_id, session_id=session_id)
                )

    manifest = DatasetManifest(
        entries=tuple(entries),
        label_set=ADL7_LABELS,
        sensor_id="synthetic-grid8",
        backgrounds=(BackgroundEntry(path="background.csv"),),
        root=out,
    )
    manifest_path = out / "manifest.json"
    write_manifest(manifest, manifest_path)
    (out / "generation.json").write_text(
        json.dumps(
            {"seed": seed, "subjects": subjects, "reps": reps, "scene": scene.to_dict()},
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    return CorpusSummary(
        manifest_path=manifest_path,
        sequence_count=len(entries),
        clamped_values=clamped,
    )


# ---------------------------------------------------------------------------
# Toy feature clusters (for exercising the classifier without the pipeline)
# ---------------------------------------------------------------------------


def toy_clusters(
    n_classes: int = 7,
    per_class: int = 24,
    dim: int = 20,
    separation: float = 8.0,
    noise: float = 1.0,
    seed: int = 0,
) -> tuple[np.ndarray, list[str]]:
    """Gaussian clusters on orthogonal axes, margin-separated by design.

    Centers sit at `separation` along distinct coordinate axes, so the gap
    between projected clusters is separation * sqrt(2) against unit-variance
    noise; the defaults leave well over a 4-sigma margin.
    """
    if dim < n_classes:
        raise ValueError("dim must be >= n_classes for orthogonal centers")
    rng = np.random.default_rng(seed)
    X = np.empty((n_classes * per_class, dim))
    labels = []
    for c in range(n_classes):
        center = np.zeros(dim)
        center[c] = separation
        X[c * per_class : (c + 1) * per_class] = center + rng.normal(
            0.0, noise, (per_class, dim)
        )
        labels.extend([f"class_{c}"] * per_class)
    return X, labels
