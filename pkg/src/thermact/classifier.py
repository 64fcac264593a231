"""One-vs-rest linear SVM with built-in feature standardization.

Each class gets a binary L2-regularized hinge-loss classifier trained on
z-scored features; the z-scoring statistics come from the training set only
and are baked into the model, so prediction takes raw feature vectors.

Training minimizes the averaged primal objective

    lam/2 * ||w||^2 + (1/m) * sum_i max(0, 1 - y_i (w.z_i + b)),
    lam = 1 / (regularization_c * m)

by sequential sub-gradient steps over the samples, reshuffled each epoch
from the seed, with step size 1 / (lam * t) at the t-th update. The bias
rides along as a constant unit feature, so it shares the step schedule's
self-averaging (an update-indexed step and the augmented bias are what make
this schedule converge; a step held fixed across each epoch leaves the bias
doing an undamped random walk). No external solver, bit-reproducible given
the seed.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .core import ThermactError
from .features import FeatureVector

MODEL_FORMAT_VERSION = 1

# Dimensions with (population) std below this are treated as constant and
# pass through centered rather than dividing by ~0.
STD_FLOOR = 1e-8


class ModelFormatError(ThermactError):
    """A model file is corrupt or has an unsupported version."""


@dataclass(frozen=True)
class SvmConfig:
    regularization_c: float = 1.0
    max_epochs: int = 200
    tolerance: float = 1e-4
    seed: int = 42

    def __post_init__(self):
        if self.regularization_c <= 0:
            raise ValueError("regularization_c must be positive")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")


@dataclass(frozen=True, eq=False)
class SvmModel:
    """Per-class weights and biases plus the training-time scaler."""

    classes: tuple[str, ...]
    weights: np.ndarray  # (C, D)
    biases: np.ndarray  # (C,)
    scaler_mean: np.ndarray  # (D,)
    scaler_std: np.ndarray  # (D,)
    train_config: SvmConfig

    @property
    def dimension(self) -> int:
        return self.weights.shape[1]

    def standardize(self, features: np.ndarray) -> np.ndarray:
        return (features - self.scaler_mean) / self.scaler_std

    def decision_scores(self, features: np.ndarray) -> np.ndarray:
        """Raw features in, one score per class out (batched if 2-D)."""
        features = np.asarray(features, dtype=np.float64)
        if features.shape[-1] != self.dimension:
            raise ValueError(
                f"feature dimension {features.shape[-1]} does not match "
                f"model dimension {self.dimension}"
            )
        return self.standardize(features) @ self.weights.T + self.biases


def _as_matrix(features) -> np.ndarray:
    if isinstance(features, np.ndarray) and features.ndim == 2:
        return np.asarray(features, dtype=np.float64)
    rows = [f.combined if isinstance(f, FeatureVector) else np.asarray(f, dtype=np.float64) for f in features]
    if not rows:
        raise ValueError("no training examples")
    lengths = {r.size for r in rows}
    if len(lengths) != 1:
        raise ValueError(f"feature dimension mismatch: {sorted(lengths)}")
    return np.stack(rows)


def _train_binary(
    Zb: np.ndarray, y: np.ndarray, cfg: SvmConfig
) -> tuple[np.ndarray, float]:
    # Zb carries the constant bias column as its last coordinate.
    m = Zb.shape[0]
    lam = 1.0 / (cfg.regularization_c * m)
    rng = np.random.default_rng(cfg.seed)
    w = np.zeros(Zb.shape[1])
    t = 0
    prev_obj = None
    for _ in range(cfg.max_epochs):
        for i in rng.permutation(m):
            t += 1
            eta = 1.0 / (lam * t)
            w *= 1.0 - eta * lam
            if y[i] * (Zb[i] @ w) < 1.0:
                w += (eta * y[i]) * Zb[i]
        hinge = np.maximum(0.0, 1.0 - y * (Zb @ w))
        obj = 0.5 * lam * (w @ w) + hinge.mean()
        if prev_obj is not None and abs(prev_obj - obj) <= cfg.tolerance * max(1.0, abs(prev_obj)):
            break
        prev_obj = obj
    return w[:-1], float(w[-1])


def train(
    features,
    labels,
    cfg: SvmConfig | None = None,
    classes: tuple[str, ...] | None = None,
) -> SvmModel:
    """Fit a one-vs-rest linear SVM.

    `features` may be FeatureVectors, 1-D arrays, or a (N, D) matrix.
    `classes` fixes the class order (default: sorted distinct labels); every
    listed class must appear in `labels` at least once.
    """
    cfg = cfg or SvmConfig()
    X = _as_matrix(features)
    labels = [str(l) for l in labels]
    if len(labels) != X.shape[0]:
        raise ValueError(f"{X.shape[0]} feature rows but {len(labels)} labels")
    present = set(labels)
    if len(present) < 2:
        raise ValueError("training needs at least 2 distinct labels")
    ordered = tuple(classes) if classes is not None else tuple(sorted(present))
    missing = [c for c in ordered if c not in present]
    if missing:
        raise ValueError(f"no training examples for class(es): {missing}")
    unknown = present - set(ordered)
    if unknown:
        raise ValueError(f"labels outside the class list: {sorted(unknown)}")

    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std < STD_FLOOR, 1.0, std)
    Z = (X - mean) / std
    Zb = np.hstack([Z, np.ones((Z.shape[0], 1))])

    y_index = np.array([ordered.index(l) for l in labels])
    weights = np.empty((len(ordered), X.shape[1]))
    biases = np.empty(len(ordered))
    for c in range(len(ordered)):
        y = np.where(y_index == c, 1.0, -1.0)
        weights[c], biases[c] = _train_binary(Zb, y, cfg)

    weights.flags.writeable = False
    biases.flags.writeable = False
    mean.flags.writeable = False
    std.flags.writeable = False
    return SvmModel(
        classes=ordered,
        weights=weights,
        biases=biases,
        scaler_mean=mean,
        scaler_std=std,
        train_config=cfg,
    )


def predict(model: SvmModel, feature) -> tuple[str, np.ndarray]:
    """Predicted label and the per-class decision scores for one vector.

    Ties go to the lowest class index in the model's class order.
    """
    vec = feature.combined if isinstance(feature, FeatureVector) else np.asarray(feature, dtype=np.float64)
    scores = model.decision_scores(vec.reshape(-1))
    return model.classes[int(np.argmax(scores))], scores


def predict_batch(model: SvmModel, features) -> tuple[list[str], np.ndarray]:
    """Labels and (N, C) score matrix for many vectors.

    Rows go through the same path as `predict`, so batch output is
    bit-identical to one-at-a-time prediction.
    """
    X = _as_matrix(features)
    scores = np.stack([model.decision_scores(row) for row in X])
    labels = [model.classes[i] for i in np.argmax(scores, axis=1)]
    return labels, scores


def save_model(model: SvmModel, path: str | Path, config: dict | None = None) -> None:
    """Write a model as versioned JSON at full float precision.

    `config` replaces the embedded configuration block; it must contain an
    "svm" section if given (the CLI stores the whole pipeline configuration
    here so prediction can reproduce preprocessing).
    """
    payload = {
        "version": MODEL_FORMAT_VERSION,
        "classes": list(model.classes),
        "weights": [list(row) for row in model.weights],
        "biases": list(model.biases),
        "scaler_mean": list(model.scaler_mean),
        "scaler_std": list(model.scaler_std),
        "config": config if config is not None else {"svm": asdict(model.train_config)},
    }
    try:
        Path(path).write_text(json.dumps(payload) + "\n", encoding="utf-8")
    except OSError as exc:
        raise ThermactError(f"cannot write model to {path}: {exc}") from exc


def load_model(path: str | Path) -> tuple[SvmModel, dict]:
    """Read a model file back; returns the model and its embedded config."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ThermactError(f"cannot read model from {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path} is not a valid model file: {exc}") from exc
    if not isinstance(data, dict) or "version" not in data:
        raise ModelFormatError(f"{path} is not a valid model file (no version field)")
    if data["version"] != MODEL_FORMAT_VERSION:
        raise ModelFormatError(
            f"{path}: unsupported model version {data['version']!r} "
            f"(expected {MODEL_FORMAT_VERSION})"
        )
    try:
        config = data.get("config", {})
        svm_cfg = SvmConfig(**config.get("svm", {}))
        weights = np.array(data["weights"], dtype=np.float64)
        biases = np.array(data["biases"], dtype=np.float64)
        mean = np.array(data["scaler_mean"], dtype=np.float64)
        std = np.array(data["scaler_std"], dtype=np.float64)
        classes = tuple(data["classes"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"{path}: malformed model file ({exc})") from exc
    if weights.ndim != 2 or weights.shape != (len(classes), mean.size) or biases.shape != (len(classes),):
        raise ModelFormatError(f"{path}: inconsistent model dimensions")
    for arr in (weights, biases, mean, std):
        arr.flags.writeable = False
    model = SvmModel(
        classes=classes,
        weights=weights,
        biases=biases,
        scaler_mean=mean,
        scaler_std=std,
        train_config=svm_cfg,
    )
    return model, config
