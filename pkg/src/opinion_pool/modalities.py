"""Base classifiers, one per modality, behind a common interface.

Each classifier maps a :class:`MultimodalExample` to a categorical
distribution over the intention set; any object with that ``predict`` method
can take part in fusion.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence

from .distributions import CategoricalDistribution, IntentionSet, max_pool_frames
from .features import (
    LinearHyper,
    LinearModel,
    SceneLayout,
    gaze_features,
    object_features,
    predict_linear,
    train_linear,
)
from .promp import BasisConfig, InteractionMixture, classify_gesture, train_mixture
from .scenario import Dataset, MultimodalExample

MODALITIES = ("speech", "gesture", "gaze", "objects")


class ProbabilisticClassifier(Protocol):
    intentions: IntentionSet

    def predict(self, example: MultimodalExample) -> CategoricalDistribution: ...


@dataclass(frozen=True)
class SpeechClassifier:
    """Pools keyword-spotter frame distributions; needs no training."""

    intentions: IntentionSet

    def predict(self, example: MultimodalExample) -> CategoricalDistribution:
        return max_pool_frames(example.speech_frames)


@dataclass(frozen=True)
class GestureClassifier:
    intentions: IntentionSet
    mixture: InteractionMixture

    def predict(self, example: MultimodalExample) -> CategoricalDistribution:
        return classify_gesture(self.mixture, example.gesture_point, example.gesture_time)


@dataclass(frozen=True)
class GazeClassifier:
    intentions: IntentionSet
    layout: SceneLayout
    model: LinearModel
    window: int = 900

    def features(self, example: MultimodalExample):
        return gaze_features(example.gaze, self.layout, self.window)

    def predict(self, example: MultimodalExample) -> CategoricalDistribution:
        return predict_linear(self.model, self.features(example))


@dataclass(frozen=True)
class ObjectClassifier:
    intentions: IntentionSet
    layout: SceneLayout
    model: LinearModel

    def features(self, example: MultimodalExample):
        return object_features(example.objects, self.layout)

    def predict(self, example: MultimodalExample) -> CategoricalDistribution:
        return predict_linear(self.model, self.features(example))


def train_classifiers(
    train: Dataset,
    layout: SceneLayout,
    basis: BasisConfig = BasisConfig(),
    hyper: LinearHyper = LinearHyper(),
    window: int = 900,
) -> dict[str, ProbabilisticClassifier]:
    """Fit all four base classifiers on a training split."""
    intentions = train.intentions
    k = len(intentions)
    labels = train.labels()
    mixture = train_mixture(list(train.demos), k, basis)
    gaze_x = [gaze_features(e.gaze, layout, window) for e in train.examples]
    obj_x = [object_features(e.objects, layout) for e in train.examples]
    return {
        "speech": SpeechClassifier(intentions),
        "gesture": GestureClassifier(intentions, mixture),
        "gaze": GazeClassifier(intentions, layout, train_linear(gaze_x, labels, k, hyper), window),
        "objects": ObjectClassifier(intentions, layout, train_linear(obj_x, labels, k, hyper)),
    }


def predict_all(
    classifiers: dict[str, ProbabilisticClassifier], examples: Sequence[MultimodalExample]
) -> dict[str, list[CategoricalDistribution]]:
    return {name: [c.predict(e) for e in examples] for name, c in classifiers.items()}
