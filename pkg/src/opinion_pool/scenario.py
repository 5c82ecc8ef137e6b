"""Seeded synthetic kitchen scenario.

Each intention has a location on an arc around the seated human (the gaze
target and the robot's pick-up point), a hand-reach endpoint, a template of
scene objects placed in the working area, and a row of the speech confusion
matrix.  Confusable intention pairs share nearby locations, similar object
templates and cross-confused keywords, so every base classifier genuinely
mixes them up.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .distributions import CategoricalDistribution, IntentionSet, make_distribution
from .features import GazeRecord, SceneLayout
from .promp import Demo, Trajectory


class ScenarioConfigError(ValueError):
    pass


class SplitError(ValueError):
    pass


DEFAULT_INTENTIONS = (
    "board", "tomato", "potato", "roll", "bowl", "dressing", "coke", "towel", "stand-up",
)

# azimuth (deg, +y to the left), height (m) of each intention's location
_ARC = {
    "board": (-72.0, 0.80),
    "potato": (-50.0, 0.95),
    "tomato": (-27.0, 1.00),
    "roll": (-21.0, 1.00),
    "bowl": (2.0, 0.80),
    "dressing": (22.0, 1.10),
    "coke": (42.0, 0.90),
    "towel": (62.0, 1.05),
    "stand-up": (85.0, 1.30),
}
_ARC_RADIUS = 1.2

SCENE_OBJECTS = ("board", "tomato", "bowl", "coke", "water", "sponge", "glass", "knife")
DISTRACTORS = ("glass", "knife")

# object -> (dx, dy) offset from the working-area center
_TEMPLATES = {
    "board": {"tomato": (0.10, 0.05), "bowl": (-0.15, 0.10)},
    "tomato": {"board": (0.05, 0.05)},
    "roll": {"board": (0.08, 0.06), "sponge": (-0.12, -0.12)},
    "potato": {"board": (0.00, -0.20), "bowl": (0.15, 0.15)},
    "bowl": {"board": (0.10, -0.10), "tomato": (-0.20, 0.15)},
    "dressing": {"bowl": (0.05, 0.00)},
    "coke": {"water": (0.10, 0.20), "bowl": (-0.20, -0.15)},
    "towel": {"sponge": (0.00, 0.15)},
    "stand-up": {},
}

# keywords that sound alike besides the confusable pairs
_SOUND_ALIKE = (("tomato", "potato"), ("roll", "bowl"), ("coke", "towel"), ("board", "bowl"))


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


@dataclass(frozen=True)
class NoiseConfig:
    gesture: float = 0.07  # std of reach endpoints (m)
    gaze_bias: float = 0.16  # std of the per-trial fixation offset (rad)
    gaze_jitter: float = 0.05  # std of per-sample gaze jitter (rad)
    object_position: float = 0.04  # std of object placement (m)
    object_flip: float = 0.06  # prob a template object is away / a stray object is in the area
    speech: float = 0.05  # scale of frame-level Dirichlet jitter (inverse concentration)

    def __post_init__(self):
        for f in dataclasses.fields(self):
            if getattr(self, f.name) < 0:
                raise ScenarioConfigError(f"noise scale {f.name} must be non-negative")
        if self.object_flip > 1:
            raise ScenarioConfigError("object_flip is a probability")


def default_locations() -> dict[str, tuple[float, float, float]]:
    out = {}
    for name, (az, z) in _ARC.items():
        a = np.deg2rad(az)
        out[name] = (round(_ARC_RADIUS * np.cos(a), 6), round(_ARC_RADIUS * np.sin(a), 6), z)
    return out


def default_confusion(
    intentions: Sequence[str],
    confusable: Sequence[tuple[str, str]],
    p_true: float = 0.34,
    p_alike: float = 0.16,
) -> list[list[float]]:
    """Keyword confusion rows: mass on the spoken word, its sound-alikes, the rest spread evenly."""
    k = len(intentions)
    idx = {n: i for i, n in enumerate(intentions)}
    pairs = [p for p in tuple(confusable) + _SOUND_ALIKE if p[0] in idx and p[1] in idx]
    rows = []
    for i, name in enumerate(intentions):
        alike = sorted({idx[b] for a, b in pairs if a == name} | {idx[a] for a, b in pairs if b == name})
        row = np.zeros(k)
        row[i] = p_true
        row[alike] = p_alike
        rest = [j for j in range(k) if j != i and j not in alike]
        if rest:
            row[rest] = max(0.0, 1.0 - row.sum()) / len(rest)
        rows.append((row / row.sum()).round(12).tolist())
    return rows


@dataclass(frozen=True)
class ScenarioConfig:
    intentions: tuple[str, ...] = DEFAULT_INTENTIONS
    locations: Mapping[str, tuple[float, float, float]] = field(default_factory=default_locations)
    object_templates: Mapping[str, Mapping[str, tuple[float, float]]] = field(
        default_factory=lambda: {k: dict(v) for k, v in _TEMPLATES.items()}
    )
    scene_objects: tuple[str, ...] = SCENE_OBJECTS
    distractors: tuple[str, ...] = DISTRACTORS
    confusable_pairs: tuple[tuple[str, str], ...] = (("tomato", "roll"),)
    speech_confusion: Optional[Sequence[Sequence[float]]] = None
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    examples_per_intention: int = 40
    demos_per_intention: int = 20
    n_speech_frames: int = 6
    n_gaze_samples: int = 1250
    gaze_rate_hz: float = 250.0
    gaze_origin: tuple[float, float, float] = (0.0, 0.0, 1.2)
    shoulder: tuple[float, float, float] = (0.0, -0.2, 1.05)
    hand_rest: tuple[float, float, float] = (0.25, -0.2, 0.8)
    reach: float = 0.6
    handover_offset: tuple[float, float, float] = (0.1, 0.0, 0.05)
    demo_samples: int = 60
    center: tuple[float, float] = (0.4, 0.0)
    working_radius: float = 0.4
    sentinel: float = 10.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "intentions", tuple(self.intentions))
        object.__setattr__(
            self, "confusable_pairs", tuple(tuple(p) for p in self.confusable_pairs)
        )
        if self.speech_confusion is None:
            object.__setattr__(
                self,
                "speech_confusion",
                default_confusion(self.intentions, self.confusable_pairs),
            )
        self.validate()

    def validate(self):
        names = IntentionSet(self.intentions).labels
        k = len(names)
        for n in names:
            if n not in self.locations:
                raise ScenarioConfigError(f"no location for intention {n!r}")
            if n not in self.object_templates:
                raise ScenarioConfigError(f"no object template for intention {n!r}")
            for obj in self.object_templates[n]:
                if obj not in self.scene_objects or obj in self.distractors:
                    raise ScenarioConfigError(f"template for {n!r} uses invalid object {obj!r}")
        locs = np.array([self.locations[n] for n in names], dtype=float)
        if len({tuple(r) for r in locs.round(9)}) != k:
            raise ScenarioConfigError("intention locations must be distinct")
        conf = np.asarray(self.speech_confusion, dtype=float)
        if conf.shape != (k, k) or np.any(conf < 0) or not np.allclose(conf.sum(axis=1), 1.0):
            raise ScenarioConfigError("speech confusion rows must be distributions over intentions")
        for a, b in self.confusable_pairs:
            if a not in names or b not in names:
                raise ScenarioConfigError(f"confusable pair ({a}, {b}) names unknown intentions")
        if self.examples_per_intention < 1 or self.demos_per_intention < 2:
            raise ScenarioConfigError("need >= 1 example and >= 2 demos per intention")
        if self.n_speech_frames < 1 or self.n_gaze_samples < 1:
            raise ScenarioConfigError("need at least one speech frame and one gaze sample")
        if self.working_radius <= 0 or self.sentinel <= self.working_radius:
            raise ScenarioConfigError("need 0 < working_radius < sentinel")

    @property
    def intention_set(self) -> IntentionSet:
        return IntentionSet(self.intentions)

    @property
    def layout(self) -> SceneLayout:
        return SceneLayout(
            locations={n: self.locations[n] for n in self.intentions},
            objects=self.scene_objects,
            center=self.center,
            working_radius=self.working_radius,
            sentinel=self.sentinel,
        )

    def confusable_labels(self) -> set[int]:
        idx = self.intention_set
        return {idx.index(n) for pair in self.confusable_pairs for n in pair}

    def gesture_anchor(self, name: str) -> np.ndarray:
        s = np.asarray(self.shoulder, dtype=float)
        return s + self.reach * _unit(np.asarray(self.locations[name]) - s)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["locations"] = {k: list(v) for k, v in self.locations.items()}
        d["object_templates"] = {
            k: {o: list(p) for o, p in v.items()} for k, v in self.object_templates.items()
        }
        d["speech_confusion"] = [list(map(float, r)) for r in self.speech_confusion]
        for key in ("intentions", "scene_objects", "distractors", "gaze_origin", "shoulder",
                    "hand_rest", "handover_offset", "center"):
            d[key] = list(d[key])
        d["confusable_pairs"] = [list(p) for p in self.confusable_pairs]
        return d

    @classmethod
    def from_dict(cls, data: Mapping) -> "ScenarioConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ScenarioConfigError(f"unknown scenario keys {sorted(unknown)}")
        kw = dict(data)
        if "noise" in kw:
            try:
                kw["noise"] = NoiseConfig(**kw["noise"])
            except TypeError as exc:
                raise ScenarioConfigError(str(exc)) from None
        for key in ("intentions", "scene_objects", "distractors"):
            if key in kw:
                kw[key] = tuple(kw[key])
        for key in ("gaze_origin", "shoulder", "hand_rest", "handover_offset", "center"):
            if key in kw:
                kw[key] = tuple(float(v) for v in kw[key])
        if "locations" in kw:
            kw["locations"] = {k: tuple(float(c) for c in v) for k, v in kw["locations"].items()}
        if "object_templates" in kw:
            kw["object_templates"] = {
                k: {o: tuple(p) for o, p in v.items()} for k, v in kw["object_templates"].items()
            }
        if "confusable_pairs" in kw:
            kw["confusable_pairs"] = tuple(tuple(p) for p in kw["confusable_pairs"])
        try:
            return cls(**kw)
        except (TypeError, ValueError) as exc:
            raise ScenarioConfigError(str(exc)) from None


@dataclass(frozen=True)
class MultimodalExample:
    id: str
    label: int
    speech_frames: tuple[CategoricalDistribution, ...]
    gesture_point: np.ndarray
    gesture_time: float
    gaze: GazeRecord
    objects: Mapping[str, tuple[float, ...]]


@dataclass(frozen=True)
class Dataset:
    intentions: IntentionSet
    examples: tuple[MultimodalExample, ...]
    demos: tuple[Demo, ...] = ()

    def __len__(self) -> int:
        return len(self.examples)

    def labels(self) -> list[int]:
        return [e.label for e in self.examples]


# -- generation ------------------------------------------------------------------


def _perturb_direction(d: np.ndarray, sigma: float, rng: np.random.Generator, n: int = 1) -> np.ndarray:
    noise = rng.normal(0.0, sigma, size=(n, 3)) if sigma > 0 else np.zeros((n, 3))
    noise -= (noise @ d)[:, None] * d[None, :]
    out = d[None, :] + noise
    return out / np.linalg.norm(out, axis=1, keepdims=True)


def _dirichlet(mean: np.ndarray, jitter: float, rng: np.random.Generator) -> np.ndarray:
    if jitter == 0:
        return mean.copy()
    return rng.dirichlet(mean / jitter)


def min_jerk(start, end, times) -> np.ndarray:
    s = np.asarray(times, dtype=float)[:, None]
    profile = 10 * s**3 - 15 * s**4 + 6 * s**5
    return np.asarray(start)[None, :] + profile * (np.asarray(end) - np.asarray(start))[None, :]


def _speech_frames(cfg: ScenarioConfig, label: int, rng: np.random.Generator):
    k = len(cfg.intentions)
    row = np.asarray(cfg.speech_confusion[label], dtype=float)
    flat = np.full(k, 1.0 / k)
    keyword_pos = int(rng.integers(cfg.n_speech_frames))
    frames = []
    for i in range(cfg.n_speech_frames):
        mean = row if i == keyword_pos else flat
        frames.append(make_distribution(_dirichlet(mean, cfg.noise.speech, rng)))
    return tuple(frames)


def _gaze(cfg: ScenarioConfig, name: str, rng: np.random.Generator, window: int = 900) -> GazeRecord:
    origin = np.asarray(cfg.gaze_origin, dtype=float)
    target = _unit(np.asarray(cfg.locations[name]) - origin)
    fixation = _perturb_direction(target, cfg.noise.gaze_bias, rng)[0]
    n = cfg.n_gaze_samples
    n_fix = min(window, n)
    dirs = np.empty((n, 3))
    # early glances over random locations of interest, outside the averaging window
    others = [m for m in cfg.intentions if m != name] or [name]
    for start in range(0, n - n_fix, 50):
        stop = min(start + 50, n - n_fix)
        look = others[int(rng.integers(len(others)))]
        d = _unit(np.asarray(cfg.locations[look]) - origin)
        dirs[start:stop] = _perturb_direction(d, cfg.noise.gaze_jitter, rng, stop - start)
    dirs[n - n_fix :] = _perturb_direction(fixation, cfg.noise.gaze_jitter, rng, n_fix)
    return GazeRecord(origin, dirs, cfg.gaze_rate_hz)


def _objects(cfg: ScenarioConfig, name: str, rng: np.random.Generator) -> dict[str, tuple[float, ...]]:
    center = np.asarray(cfg.center, dtype=float)
    template = cfg.object_templates[name]
    flip = cfg.noise.object_flip
    table_z = 0.75
    out = {}
    for obj in cfg.scene_objects:
        inside = obj in template
        if obj not in cfg.distractors and flip > 0 and rng.random() < flip:
            inside = not inside
        if inside:
            if obj in template:
                base = center + np.asarray(template[obj], dtype=float)
            else:
                r = cfg.working_radius * 0.8 * np.sqrt(rng.random())
                a = rng.uniform(0, 2 * np.pi)
                base = center + r * np.array([np.cos(a), np.sin(a)])
            xy = base + rng.normal(0.0, cfg.noise.object_position, 2) if cfg.noise.object_position > 0 else base
            # keep template objects inside the area despite placement noise
            off = xy - center
            lim = 0.95 * cfg.working_radius
            if np.linalg.norm(off) > lim:
                xy = center + off / np.linalg.norm(off) * lim
        else:
            r = rng.uniform(cfg.working_radius * 1.25, cfg.working_radius * 2.5)
            a = rng.uniform(0, 2 * np.pi)
            xy = center + r * np.array([np.cos(a), np.sin(a)])
        out[obj] = (float(xy[0]), float(xy[1]), table_z)
    return out


def _endpoint(cfg: ScenarioConfig, name: str, rng: np.random.Generator) -> np.ndarray:
    anchor = cfg.gesture_anchor(name)
    if cfg.noise.gesture == 0:
        return anchor
    return anchor + rng.normal(0.0, cfg.noise.gesture, 3)


def generate_demos(cfg: ScenarioConfig, rng: Optional[np.random.Generator] = None) -> tuple[Demo, ...]:
    """Paired human reach / robot handover demonstrations, per intention.

    The robot starts at the intention's location and ends at a handover point
    offset from the human's reach endpoint, so the two are correlated.
    """
    rng = np.random.default_rng([cfg.seed, 1]) if rng is None else rng
    times = np.linspace(0.0, 1.0, cfg.demo_samples)
    demos = []
    for label, name in enumerate(cfg.intentions):
        for _ in range(cfg.demos_per_intention):
            end = _endpoint(cfg, name, rng)
            human = min_jerk(cfg.hand_rest, end, times)
            robot = min_jerk(cfg.locations[name], end + np.asarray(cfg.handover_offset), times)
            demos.append(Demo(label, Trajectory(times, human), Trajectory(times, robot)))
    return tuple(demos)


def generate_dataset(cfg: ScenarioConfig) -> Dataset:
    """Labeled multimodal examples and gesture demonstrations, fully determined by ``cfg.seed``."""
    cfg.validate()
    # independent stream per modality, so one modality's settings never
    # reshuffle another's samples
    speech_rng, gesture_rng, gaze_rng, object_rng = (
        np.random.default_rng([cfg.seed, 0, i]) for i in range(4)
    )
    examples = []
    for label, name in enumerate(cfg.intentions):
        for j in range(cfg.examples_per_intention):
            examples.append(
                MultimodalExample(
                    id=f"{name}-{j:03d}",
                    label=label,
                    speech_frames=_speech_frames(cfg, label, speech_rng),
                    gesture_point=_endpoint(cfg, name, gesture_rng),
                    gesture_time=1.0,
                    gaze=_gaze(cfg, name, gaze_rng),
                    objects=_objects(cfg, name, object_rng),
                )
            )
    return Dataset(cfg.intention_set, tuple(examples), generate_demos(cfg))


def split_dataset(data: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Stratified split; per intention ``floor(n * fraction)`` go to train.

    Gesture demos stay with the training part.
    """
    if not 0 < train_fraction < 1:
        raise SplitError("train fraction must lie strictly between 0 and 1")
    rng = np.random.default_rng([seed, 2])
    train_idx, test_idx = [], []
    for label in range(len(data.intentions)):
        idx = [i for i, e in enumerate(data.examples) if e.label == label]
        if not idx:
            continue
        n_train = int(np.floor(len(idx) * train_fraction))
        if n_train == 0 or n_train == len(idx):
            raise SplitError(
                f"fraction {train_fraction} leaves intention {data.intentions.label(label)!r} "
                "empty in one split"
            )
        perm = rng.permutation(len(idx))
        train_idx += sorted(idx[p] for p in perm[:n_train])
        test_idx += sorted(idx[p] for p in perm[n_train:])
    train = Dataset(data.intentions, tuple(data.examples[i] for i in sorted(train_idx)), data.demos)
    test = Dataset(data.intentions, tuple(data.examples[i] for i in sorted(test_idx)), ())
    return train, test
