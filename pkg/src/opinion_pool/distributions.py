"""Categorical distributions over intentions and the fusion algebra.

Every classifier in the package emits a :class:`CategoricalDistribution`.
Distributions are combined with the Independent Opinion Pool (elementwise
product, renormalized) and speech frame streams are collapsed with a
per-intention maximum.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

#: Minimum probability assigned to any intention.
FLOOR = 1e-6


class InvalidDistributionError(ValueError):
    pass


class FusionError(ValueError):
    pass


class PoolingError(ValueError):
    pass


@dataclass(frozen=True)
class IntentionSet:
    """Ordered, duplicate-free intention labels; index order is fixed."""

    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(self.labels)
        if not labels:
            raise ValueError("intention set must not be empty")
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate intention labels in {labels}")
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def label(self, index: int) -> str:
        return self.labels[index]


class CategoricalDistribution:
    """Immutable probability vector, floored at :data:`FLOOR` and summing to one.

    Construct through :func:`make_distribution`; the constructor assumes its
    input is already valid.
    """

    __slots__ = ("_probs",)

    def __init__(self, probs: np.ndarray):
        arr = np.array(probs, dtype=float)
        arr.setflags(write=False)
        self._probs = arr

    @property
    def probs(self) -> np.ndarray:
        return self._probs

    def __len__(self) -> int:
        return self._probs.shape[0]

    def __getitem__(self, i):
        return self._probs[i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, CategoricalDistribution):
            return NotImplemented
        return np.array_equal(self._probs, other._probs)

    def __hash__(self) -> int:
        return hash(self._probs.tobytes())

    def __repr__(self) -> str:
        return f"CategoricalDistribution({np.array2string(self._probs, precision=6)})"

    def tolist(self) -> list[float]:
        return self._probs.tolist()


def _apply_floor(p: np.ndarray, floor: float) -> np.ndarray:
    # Entries ending below the floor are pinned at it; the remaining mass is
    # spread proportionally over the others.  Iterates until the pinned set is
    # stable (it only grows, so at most k rounds).
    k = p.shape[0]
    if floor * k >= 1.0:
        raise InvalidDistributionError(f"floor {floor} too large for {k} categories")
    pinned = np.zeros(k, dtype=bool)
    out = p / p.sum()
    while True:
        newly = (out < floor) & ~pinned
        if not newly.any():
            return out
        pinned |= newly
        free = ~pinned
        free_mass = 1.0 - floor * pinned.sum()
        out = np.where(pinned, floor, 0.0)
        out[free] = p[free] / p[free].sum() * free_mass


def make_distribution(
    weights: Iterable[float],
    intentions: Optional[IntentionSet] = None,
    floor: float = FLOOR,
) -> CategoricalDistribution:
    """Normalize non-negative weights into a floored categorical distribution.

    Entries whose normalized value would fall below ``floor`` are raised to
    exactly ``floor`` and the rest rescaled, so the result sums to one and no
    entry is below the floor.

    >>> make_distribution([2, 2]).tolist()
    [0.5, 0.5]
    """
    w = np.asarray(list(weights) if not isinstance(weights, np.ndarray) else weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise InvalidDistributionError("weights must be a non-empty 1-d sequence")
    if intentions is not None and w.size != len(intentions):
        raise InvalidDistributionError(
            f"got {w.size} weights for {len(intentions)} intentions"
        )
    if not np.all(np.isfinite(w)):
        raise InvalidDistributionError("weights contain NaN or infinite entries")
    if np.any(w < 0):
        raise InvalidDistributionError("weights contain negative entries")
    if not np.any(w > 0):
        raise InvalidDistributionError("weights are all zero")
    return CategoricalDistribution(_apply_floor(w, floor))


def uniform(k: int) -> CategoricalDistribution:
    return make_distribution(np.ones(k))


def from_log_weights(log_w: np.ndarray, floor: float = FLOOR) -> CategoricalDistribution:
    """Normalize unnormalized log-weights with log-sum-exp, then floor."""
    log_w = np.asarray(log_w, dtype=float)
    if np.any(np.isnan(log_w)) or np.all(np.isneginf(log_w)):
        raise InvalidDistributionError("log-weights are NaN or all -inf")
    # max-shift keeps exp() in range; -inf entries map to zero weight
    shifted = log_w - np.max(log_w)
    return make_distribution(np.exp(shifted), floor=floor)


def entropy(d: CategoricalDistribution) -> float:
    """Shannon entropy in nats."""
    p = d.probs
    return float(-np.sum(p * np.log(p)))


def score_difference(d: CategoricalDistribution) -> float:
    """Gap between the largest and second-largest probability."""
    if len(d) < 2:
        raise ValueError("score difference needs at least two categories")
    top2 = np.partition(d.probs, -2)[-2:]
    return float(top2[1] - top2[0])


def predict_label(d: CategoricalDistribution) -> int:
    # np.argmax returns the first maximum, i.e. ties go to the lowest index.
    return int(np.argmax(d.probs))


def fuse_iop(ds: Sequence[CategoricalDistribution]) -> CategoricalDistribution:
    """Independent Opinion Pool: product of the inputs, renormalized.

    Computed as a sum of logs followed by log-sum-exp normalization.
    """
    ds = list(ds)
    if not ds:
        raise FusionError("nothing to fuse")
    k = len(ds[0])
    if any(len(d) != k for d in ds):
        raise FusionError(f"distributions have mismatched lengths {[len(d) for d in ds]}")
    log_w = np.sum([np.log(d.probs) for d in ds], axis=0)
    return from_log_weights(log_w)


def max_pool_frames(frames: Sequence[CategoricalDistribution]) -> CategoricalDistribution:
    """Per-intention maximum over a stream of frame distributions, renormalized."""
    frames = list(frames)
    if not frames:
        raise PoolingError("no frames to pool")
    k = len(frames[0])
    if any(len(f) != k for f in frames):
        raise PoolingError("frames have mismatched lengths")
    return make_distribution(np.max([f.probs for f in frames], axis=0))
