"""On-disk formats: dataset JSON and per-modality model files.

All documents are written with a fixed key order and ``repr`` floats so
identical inputs produce byte-identical files.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Mapping, Optional

import numpy as np

from .distributions import IntentionSet, InvalidDistributionError, make_distribution
from .features import GazeRecord, InputError, LinearModel, SceneLayout
from .modalities import (
    MODALITIES,
    GazeClassifier,
    GestureClassifier,
    ObjectClassifier,
    SpeechClassifier,
)
from .promp import Demo, Trajectory, mixture_from_dict, mixture_to_dict
from .scenario import Dataset, MultimodalExample

SCHEMA_VERSION = 1


class DataError(ValueError):
    """Malformed or inconsistent dataset / model input."""


def dumps(doc) -> str:
    return json.dumps(doc, separators=(",", ":"), allow_nan=False) + "\n"


def write_json(path, doc) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(doc))
    return p


def read_json(path):
    p = Path(path)
    if not p.is_file():
        raise DataError(f"{p}: file not found")
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{p}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def fingerprint(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# -- dataset ---------------------------------------------------------------------


def _traj_to_dict(t: Trajectory) -> dict:
    return {"times": t.times.tolist(), "points": t.points.tolist()}


def example_to_dict(e: MultimodalExample, intentions: IntentionSet) -> dict:
    return {
        "id": e.id,
        "label": intentions.label(e.label),
        "speech_frames": [f.tolist() for f in e.speech_frames],
        "gesture": {"point": np.asarray(e.gesture_point).tolist(), "time": e.gesture_time},
        "gaze": {
            "origin": e.gaze.origin.tolist(),
            "rate_hz": e.gaze.rate_hz,
            "directions": e.gaze.directions.tolist(),
        },
        "objects": {k: list(v) for k, v in e.objects.items()},
    }


def example_from_dict(d: Mapping, intentions: IntentionSet) -> MultimodalExample:
    try:
        label = d["label"]
        if label not in intentions.labels:
            raise DataError(f"example {d.get('id')!r}: unknown intention {label!r}")
        frames = tuple(make_distribution(f, intentions) for f in d["speech_frames"])
        if not frames:
            raise DataError(f"example {d.get('id')!r}: no speech frames")
        return MultimodalExample(
            id=str(d["id"]),
            label=intentions.index(label),
            speech_frames=frames,
            gesture_point=np.asarray(d["gesture"]["point"], dtype=float).reshape(3),
            gesture_time=float(d["gesture"].get("time", 1.0)),
            gaze=GazeRecord(
                d["gaze"]["origin"], d["gaze"]["directions"], float(d["gaze"].get("rate_hz", 250.0))
            ),
            objects={k: tuple(float(c) for c in v) for k, v in d["objects"].items()},
        )
    except DataError:
        raise
    except KeyError as exc:
        raise DataError(f"example {d.get('id')!r}: missing field {exc}") from None
    except (TypeError, ValueError, InvalidDistributionError, InputError) as exc:
        raise DataError(f"example {d.get('id')!r}: {exc}") from None


def dataset_to_dict(data: Dataset, config: Optional[dict] = None, layout: Optional[SceneLayout] = None) -> dict:
    doc = {"schema_version": SCHEMA_VERSION, "intentions": list(data.intentions.labels)}
    if config is not None:
        doc["config"] = config
    if layout is not None:
        doc["layout"] = layout.to_dict()
    doc["gesture_demos"] = [
        {
            "label": data.intentions.label(demo.label),
            "human": _traj_to_dict(demo.human),
            "robot": _traj_to_dict(demo.robot),
        }
        for demo in data.demos
    ]
    doc["examples"] = [example_to_dict(e, data.intentions) for e in data.examples]
    return doc


def dataset_from_dict(doc) -> Dataset:
    if not isinstance(doc, Mapping):
        raise DataError("dataset must be a JSON object")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise DataError(f"unsupported dataset schema_version {doc.get('schema_version')!r}")
    try:
        intentions = IntentionSet(tuple(doc["intentions"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"bad intentions list: {exc}") from None
    demos = []
    for i, d in enumerate(doc.get("gesture_demos", [])):
        try:
            demos.append(
                Demo(
                    intentions.index(d["label"]),
                    Trajectory(d["human"]["times"], d["human"]["points"]),
                    Trajectory(d["robot"]["times"], d["robot"]["points"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"gesture demo {i}: {exc}") from None
    if "examples" not in doc or not isinstance(doc["examples"], list):
        raise DataError("dataset has no examples array")
    examples = tuple(example_from_dict(e, intentions) for e in doc["examples"])
    return Dataset(intentions, examples, tuple(demos))


def save_dataset(path, data: Dataset, config: Optional[dict] = None, layout: Optional[SceneLayout] = None) -> Path:
    return write_json(path, dataset_to_dict(data, config, layout))


def load_dataset(path) -> tuple[Dataset, dict]:
    """Return the dataset and the raw document (for its config and layout)."""
    doc = read_json(path)
    return dataset_from_dict(doc), doc


# -- models ----------------------------------------------------------------------


def _header(modality: str, intentions: IntentionSet) -> dict:
    return {"schema_version": SCHEMA_VERSION, "modality": modality, "intentions": list(intentions.labels)}


def classifier_to_dict(name: str, clf, extra: Optional[dict] = None) -> dict:
    doc = _header(name, clf.intentions)
    if isinstance(clf, SpeechClassifier):
        doc["pooling"] = "max"
    elif isinstance(clf, GestureClassifier):
        doc["mixture"] = mixture_to_dict(clf.mixture)
    elif isinstance(clf, GazeClassifier):
        doc["window"] = clf.window
        doc["layout"] = clf.layout.to_dict()
        doc["features"] = list(clf.layout.location_names)
        doc["model"] = clf.model.to_dict()
    elif isinstance(clf, ObjectClassifier):
        doc["layout"] = clf.layout.to_dict()
        doc["features"] = list(clf.layout.objects)
        doc["model"] = clf.model.to_dict()
    else:
        raise TypeError(f"cannot serialize classifier {type(clf).__name__}")
    doc.update(extra or {})
    return doc


def classifier_from_dict(doc: Mapping):
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise DataError(f"unsupported model schema_version {doc.get('schema_version')!r}")
    intentions = IntentionSet(tuple(doc["intentions"]))
    kind = doc["modality"]
    if kind == "speech":
        return SpeechClassifier(intentions)
    if kind == "gesture":
        mix = mixture_from_dict(doc["mixture"])
        if len(mix) != len(intentions):
            raise DataError("gesture model component count does not match its intentions")
        return GestureClassifier(intentions, mix)
    layout = SceneLayout.from_dict(doc["layout"])
    model = LinearModel.from_dict(doc["model"])
    if tuple(doc["features"]) != model.feature_names or model.n_classes != len(intentions):
        raise DataError(f"{kind} model schema echo does not match its parameters")
    if kind == "gaze":
        if model.feature_names != layout.location_names:
            raise DataError("gaze model features do not match its layout")
        return GazeClassifier(intentions, layout, model, int(doc["window"]))
    if kind == "objects":
        if model.feature_names != layout.objects:
            raise DataError("object model features do not match its layout")
        return ObjectClassifier(intentions, layout, model)
    raise DataError(f"unknown modality {kind!r}")


def save_models(directory, classifiers: Mapping, extra: Optional[Mapping[str, dict]] = None) -> list[Path]:
    out = Path(directory)
    extra = extra or {}
    return [
        write_json(out / f"{name}.json", classifier_to_dict(name, classifiers[name], extra.get(name)))
        for name in MODALITIES
    ]


def load_models(directory) -> tuple[dict, dict]:
    """Load all four model files; returns ``(classifiers, raw documents)``."""
    src = Path(directory)
    classifiers, docs = {}, {}
    for name in MODALITIES:
        doc = read_json(src / f"{name}.json")
        try:
            if doc.get("modality") != name:
                raise DataError(f"{name}.json declares modality {doc.get('modality')!r}")
            classifiers[name] = classifier_from_dict(doc)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, DataError):
                raise
            raise DataError(f"{src / (name + '.json')}: {exc}") from None
        docs[name] = doc
    sets = {c.intentions for c in classifiers.values()}
    if len(sets) != 1:
        raise DataError("model files disagree on the intention set")
    return classifiers, docs
