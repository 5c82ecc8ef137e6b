"""Gaze and scene-object features plus a softmax-regression classifier.

The linear classifier stands in for a probability-emitting SVM: all that
fusion needs is a categorical distribution over intentions.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .distributions import CategoricalDistribution, make_distribution

log = logging.getLogger(__name__)

UNIT_TOL = 1e-6


class InputError(ValueError):
    pass


class DegenerateGazeError(InputError):
    pass


class SchemaError(ValueError):
    pass


# -- geometry --------------------------------------------------------------------


@dataclass(frozen=True)
class GazeRecord:
    origin: np.ndarray
    directions: np.ndarray
    rate_hz: float = 250.0

    def __post_init__(self):
        origin = np.asarray(self.origin, dtype=float).reshape(3)
        dirs = np.asarray(self.directions, dtype=float).reshape(-1, 3)
        norms = np.linalg.norm(dirs, axis=1)
        if np.any(np.abs(norms - 1.0) > UNIT_TOL):
            raise InputError("gaze directions must be unit vectors")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "directions", dirs)


@dataclass(frozen=True)
class SceneLayout:
    """Static scene geometry shared by the gaze and object feature extractors.

    ``locations`` are the gaze locations of interest; ``objects`` is the
    ordered schema of scene objects whose distances feed the object
    classifier.
    """

    locations: Mapping[str, tuple[float, float, float]]
    objects: tuple[str, ...]
    center: tuple[float, float] = (0.4, 0.0)
    working_radius: float = 0.4
    sentinel: float = 10.0

    def __post_init__(self):
        if self.working_radius <= 0:
            raise ValueError("working radius must be positive")
        if self.sentinel <= self.working_radius:
            raise ValueError("sentinel must exceed the working radius")
        object.__setattr__(self, "objects", tuple(self.objects))
        object.__setattr__(
            self, "locations", {k: tuple(map(float, v)) for k, v in self.locations.items()}
        )

    @property
    def location_names(self) -> tuple[str, ...]:
        return tuple(self.locations)

    def to_dict(self) -> dict:
        return {
            "locations": {k: list(v) for k, v in self.locations.items()},
            "objects": list(self.objects),
            "center": list(self.center),
            "working_radius": self.working_radius,
            "sentinel": self.sentinel,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SceneLayout":
        return cls(
            locations={k: tuple(v) for k, v in data["locations"].items()},
            objects=tuple(data["objects"]),
            center=tuple(data["center"]),
            working_radius=float(data["working_radius"]),
            sentinel=float(data["sentinel"]),
        )


@dataclass(frozen=True)
class FeatureVector:
    names: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (len(self.names),):
            raise SchemaError("feature values do not match the schema")
        if not np.all(np.isfinite(values)):
            raise InputError("feature values must be finite")
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "values", values)


def mean_gaze(record: GazeRecord, window: int = 900) -> np.ndarray:
    """Unit mean of the last ``window`` gaze directions."""
    if record.directions.shape[0] == 0:
        raise InputError("gaze record has no samples")
    m = record.directions[-window:].mean(axis=0)
    n = np.linalg.norm(m)
    if n < 1e-12:
        raise DegenerateGazeError("gaze directions cancel out")
    return m / n


def ray_point_distance(origin, direction, point) -> float:
    """Perpendicular distance from ``point`` to the line through ``origin`` along ``direction``."""
    d = np.asarray(direction, dtype=float)
    if abs(np.linalg.norm(d) - 1.0) > UNIT_TOL:
        raise InputError("direction must be a unit vector")
    r = np.asarray(point, dtype=float) - np.asarray(origin, dtype=float)
    return float(np.linalg.norm(r - (r @ d) * d))


def gaze_features(record: GazeRecord, layout: SceneLayout, window: int = 900) -> FeatureVector:
    d = mean_gaze(record, window)
    names = layout.location_names
    values = [ray_point_distance(record.origin, d, layout.locations[n]) for n in names]
    return FeatureVector(names, np.array(values))


def object_features(positions: Mapping[str, Sequence[float]], layout: SceneLayout) -> FeatureVector:
    """Horizontal distance of each scene object to the working-area center.

    Objects outside the working area, or absent from ``positions``, get the
    layout's sentinel value.
    """
    unknown = set(positions) - set(layout.objects)
    if unknown:
        raise SchemaError(f"unknown scene objects {sorted(unknown)}")
    center = np.asarray(layout.center, dtype=float)
    values = []
    for name in layout.objects:
        if name not in positions:
            values.append(layout.sentinel)
            continue
        dist = float(np.linalg.norm(np.asarray(positions[name], dtype=float)[:2] - center))
        values.append(dist if dist <= layout.working_radius else layout.sentinel)
    return FeatureVector(layout.objects, np.array(values))


# -- softmax regression ----------------------------------------------------------


@dataclass(frozen=True)
class LinearHyper:
    learning_rate: float = 0.5
    epochs: int = 500
    l2: float = 1e-2


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray  # (n_classes, n_kept)
    bias: np.ndarray  # (n_classes,)
    feature_names: tuple[str, ...]
    kept: tuple[str, ...]
    mean: np.ndarray
    std: np.ndarray
    hyper: LinearHyper = field(default_factory=LinearHyper)

    @property
    def dropped(self) -> tuple[str, ...]:
        return tuple(n for n in self.feature_names if n not in self.kept)

    @property
    def n_classes(self) -> int:
        return self.bias.shape[0]

    def to_dict(self) -> dict:
        return {
            "weights": self.weights.tolist(),
            "bias": self.bias.tolist(),
            "feature_names": list(self.feature_names),
            "kept": list(self.kept),
            "mean": self.mean.tolist(),
            "std": self.std.tolist(),
            "hyper": {
                "learning_rate": self.hyper.learning_rate,
                "epochs": self.hyper.epochs,
                "l2": self.hyper.l2,
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LinearModel":
        n_classes = len(data["bias"])
        return cls(
            weights=np.asarray(data["weights"], dtype=float).reshape(n_classes, len(data["kept"])),
            bias=np.asarray(data["bias"], dtype=float),
            feature_names=tuple(data["feature_names"]),
            kept=tuple(data["kept"]),
            mean=np.asarray(data["mean"], dtype=float),
            std=np.asarray(data["std"], dtype=float),
            hyper=LinearHyper(**data["hyper"]),
        )


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def loss_and_grad(
    weights: np.ndarray, bias: np.ndarray, x: np.ndarray, y: np.ndarray, l2: float
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean multinomial cross-entropy plus ``l2/2 * ||W||^2`` and its gradients.

    ``y`` holds integer labels.  The bias is not regularized.
    """
    n, n_classes = x.shape[0], bias.shape[0]
    logits = x @ weights.T + bias
    z = logits - logits.max(axis=1, keepdims=True)
    log_p = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y] = 1.0
    loss = -np.sum(onehot * log_p) / n + 0.5 * l2 * np.sum(weights**2)
    resid = (np.exp(log_p) - onehot) / n
    return float(loss), resid.T @ x + l2 * weights, resid.sum(axis=0)


def train_linear(
    features: Sequence[FeatureVector],
    labels: Sequence[int],
    n_classes: int,
    hyper: LinearHyper = LinearHyper(),
) -> LinearModel:
    """Full-batch gradient descent from a zero initialization.

    Features with zero variance on the training data are dropped (logged and
    recorded in :attr:`LinearModel.dropped`).
    """
    if not features:
        raise InputError("no training examples")
    names = features[0].names
    if any(f.names != names for f in features):
        raise SchemaError("training features disagree on the schema")
    y = np.asarray(labels, dtype=int)
    if y.shape[0] != len(features):
        raise InputError("need one label per feature vector")
    if np.any(y < 0) or np.any(y >= n_classes):
        raise InputError("labels outside the intention range")
    if np.unique(y).size < 2:
        raise InputError("need at least two classes to train")

    x_all = np.stack([f.values for f in features])
    mean = x_all.mean(axis=0)
    std = x_all.std(axis=0)
    keep = std > 1e-12
    if not keep.all():
        dropped = [n for n, k in zip(names, keep) if not k]
        log.warning("dropping zero-variance features %s", dropped)
    kept = tuple(n for n, k in zip(names, keep) if k)
    mean, std = mean[keep], std[keep]
    x = (x_all[:, keep] - mean) / std

    w = np.zeros((n_classes, x.shape[1]))
    b = np.zeros(n_classes)
    for _ in range(hyper.epochs):
        _, gw, gb = loss_and_grad(w, b, x, y, hyper.l2)
        w -= hyper.learning_rate * gw
        b -= hyper.learning_rate * gb
    return LinearModel(w, b, names, kept, mean, std, hyper)


def linear_logits(model: LinearModel, f: FeatureVector) -> np.ndarray:
    if f.names != model.feature_names:
        raise InputError(f"feature schema {f.names} does not match model {model.feature_names}")
    idx = [model.feature_names.index(n) for n in model.kept]
    z = (f.values[idx] - model.mean) / model.std
    return model.weights @ z + model.bias


def predict_linear(model: LinearModel, f: FeatureVector) -> CategoricalDistribution:
    return make_distribution(softmax(linear_logits(model, f)))
