"""Background estimation, subtraction, and equal-interval resampling.

Empty-scene clips give a per-pixel mean background; subtracting it from a
recording makes body heat dominate the signal. Resampling picks frames at
equal intervals so every recording reaches a common length without
interpolation blur.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    RAW,
    SUBTRACTED,
    TEMP_MAX_C,
    TEMP_MIN_C,
    PIXEL_COUNT,
    ThermalFrame,
    ThermalSequence,
    _frozen_array,
)

DEFAULT_TARGET_LEN = 20


@dataclass(frozen=True, eq=False)
class BackgroundModel:
    """Per-pixel mean temperature of an empty scene."""

    mean_pixels: np.ndarray
    source_frame_count: int

    def __post_init__(self):
        mp = np.asarray(self.mean_pixels, dtype=np.float64).reshape(-1)
        if mp.shape != (PIXEL_COUNT,):
            raise ValueError(f"background needs {PIXEL_COUNT} pixel means, got {mp.size}")
        if not np.all(np.isfinite(mp)):
            raise ValueError("background contains non-finite values")
        if mp.min() < TEMP_MIN_C or mp.max() > TEMP_MAX_C:
            raise ValueError(f"background mean outside [{TEMP_MIN_C}, {TEMP_MAX_C}] C")
        if self.source_frame_count < 1:
            raise ValueError("source_frame_count must be >= 1")
        object.__setattr__(self, "mean_pixels", _frozen_array(mp, (PIXEL_COUNT,)))


def estimate_background(empty_scene: ThermalSequence) -> BackgroundModel:
    """Average each pixel over all frames of a raw empty-scene clip."""
    if empty_scene.stage != RAW:
        raise ValueError("background must be estimated from a raw sequence")
    matrix = empty_scene.pixel_matrix()
    return BackgroundModel(
        mean_pixels=matrix.mean(axis=0), source_frame_count=len(empty_scene)
    )


def subtract_background(seq: ThermalSequence, bg: BackgroundModel) -> ThermalSequence:
    """Subtract the background mean from every pixel of every frame.

    Metadata and timestamps are preserved; the result is marked subtracted.
    Subtracting twice is an error.
    """
    if seq.stage != RAW:
        raise ValueError("sequence is already background-subtracted")
    frames = tuple(
        ThermalFrame(pixels=f.pixels - bg.mean_pixels, timestamp_ms=f.timestamp_ms)
        for f in seq.frames
    )
    return seq.with_frames(frames, stage=SUBTRACTED)


def add_background(seq: ThermalSequence, bg: BackgroundModel) -> ThermalSequence:
    """Inverse of `subtract_background`; restores the raw sequence exactly."""
    if seq.stage != SUBTRACTED:
        raise ValueError("sequence is not background-subtracted")
    frames = tuple(
        ThermalFrame(pixels=f.pixels + bg.mean_pixels, timestamp_ms=f.timestamp_ms)
        for f in seq.frames
    )
    return seq.with_frames(frames, stage=RAW)


def resample_indices(length: int, target_len: int) -> np.ndarray:
    """Source frame indices for equal-interval selection.

    Index j maps to round(j * (length - 1) / (target_len - 1)) with ties
    rounded half-up, so the first and last frames are always kept when
    target_len >= 2. A target of 1 keeps frame 0.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    if target_len < 1:
        raise ValueError("target_len must be >= 1")
    if target_len == 1:
        return np.zeros(1, dtype=np.intp)
    j = np.arange(target_len, dtype=np.float64)
    exact = j * (length - 1) / (target_len - 1)
    return np.floor(exact + 0.5).astype(np.intp)


def resample_equal_interval(seq: ThermalSequence, target_len: int) -> ThermalSequence:
    """Select frames at equal intervals to reach exactly `target_len` frames.

    Frames are picked, never interpolated; shorter inputs are upsampled by
    duplicating frames through the same index formula.
    """
    indices = resample_indices(len(seq), target_len)
    frames = tuple(seq.frames[i] for i in indices)
    return seq.with_frames(frames)
