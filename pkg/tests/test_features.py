import logging
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opinion_pool.features import (
    DegenerateGazeError,
    FeatureVector,
    GazeRecord,
    InputError,
    LinearHyper,
    LinearModel,
    SceneLayout,
    SchemaError,
    gaze_features,
    linear_logits,
    loss_and_grad,
    mean_gaze,
    object_features,
    predict_linear,
    ray_point_distance,
    softmax,
    train_linear,
)

LAYOUT = SceneLayout(
    locations={"a": (1.0, 0.0, 0.0), "b": (0.0, 2.0, 0.0), "c": (1.0, 1.0, 1.0)},
    objects=("cup", "plate", "knife"),
    center=(0.0, 0.0),
    working_radius=0.6,
    sentinel=10.0,
)


def _unit(v):
    v = np.asarray(v, float)
    return v / np.linalg.norm(v)


class TestMeanGaze:
    def test_identical_samples(self):
        d = _unit([1, 2, 3])
        rec = GazeRecord(np.zeros(3), np.tile(d, (50, 1)))
        np.testing.assert_allclose(mean_gaze(rec), d, atol=1e-15)

    def test_window(self):
        rng = np.random.default_rng(0)
        early = rng.normal(size=(350, 3))
        early /= np.linalg.norm(early, axis=1, keepdims=True)
        late = np.tile([0.0, 0.0, 1.0], (900, 1))
        rec = GazeRecord(np.zeros(3), np.vstack([early, late]))
        np.testing.assert_allclose(mean_gaze(rec, 900), [0, 0, 1], atol=1e-15)

    def test_symmetric_pair(self):
        a, b = _unit([1, 0.3, 0]), _unit([1, -0.3, 0])
        rec = GazeRecord(np.zeros(3), np.array([a, b] * 10))
        np.testing.assert_allclose(mean_gaze(rec), [1, 0, 0], atol=1e-15)

    def test_errors(self):
        with pytest.raises(InputError):
            mean_gaze(GazeRecord(np.zeros(3), np.zeros((0, 3))))
        with pytest.raises(DegenerateGazeError):
            mean_gaze(GazeRecord(np.zeros(3), np.array([[1.0, 0, 0], [-1.0, 0, 0]])))
        with pytest.raises(InputError):
            GazeRecord(np.zeros(3), np.array([[2.0, 0, 0]]))

    @given(st.lists(st.tuples(*[st.floats(-1, 1)] * 3), min_size=1, max_size=30))
    def test_unit_norm(self, vecs):
        v = np.array(vecs, float)
        n = np.linalg.norm(v, axis=1)
        v = v[n > 1e-3]
        if len(v) == 0:
            return
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        try:
            m = mean_gaze(GazeRecord(np.zeros(3), v))
        except DegenerateGazeError:
            return
        assert abs(np.linalg.norm(m) - 1) < 1e-9


class TestRayPointDistance:
    def test_on_ray(self):
        assert ray_point_distance([1, 1, 1], _unit([1, 2, 2]), np.array([1, 1, 1]) + 3 * _unit([1, 2, 2])) == pytest.approx(0, abs=1e-12)

    def test_unit_offset(self):
        assert ray_point_distance([0, 0, 0], [1, 0, 0], [1, 1, 0]) == pytest.approx(1.0, abs=1e-15)

    def test_hand_value(self):
        assert ray_point_distance([0, 0, 0], [1, 0, 0], [2, 3, 4]) == pytest.approx(5.0, abs=1e-15)

    def test_non_unit(self):
        with pytest.raises(InputError):
            ray_point_distance([0, 0, 0], [1.1, 0, 0], [1, 1, 1])

    @settings(max_examples=50)
    @given(st.integers(0, 2**31 - 1))
    def test_translation_and_rotation_invariance(self, seed):
        rng = np.random.default_rng(seed)
        o, p = rng.normal(size=3), rng.normal(size=3)
        d = _unit(rng.normal(size=3))
        base = ray_point_distance(o, d, p)
        shift = rng.normal(size=3) * 5
        assert ray_point_distance(o + shift, d, p + shift) == pytest.approx(base, abs=1e-12)
        # Rodrigues rotation of p about the gaze line
        theta = rng.uniform(0, 2 * np.pi)
        r = p - o
        rot = r * math.cos(theta) + np.cross(d, r) * math.sin(theta) + d * (d @ r) * (1 - math.cos(theta))
        assert ray_point_distance(o, d, o + rot) == pytest.approx(base, abs=1e-12)


class TestGazeFeatures:
    def test_aimed_at_location(self):
        rec = GazeRecord(np.zeros(3), np.tile(_unit([0, 2, 0]), (10, 1)))
        f = gaze_features(rec, LAYOUT)
        assert f.names == ("a", "b", "c")
        assert f.values[1] == pytest.approx(0, abs=1e-15)

    def test_symmetric_locations(self):
        layout = SceneLayout({"l": (1, 0.5, 0), "r": (1, -0.5, 0)}, objects=())
        rec = GazeRecord(np.zeros(3), np.tile([1.0, 0, 0], (10, 1)))
        f = gaze_features(rec, layout)
        assert f.values[0] == pytest.approx(f.values[1], abs=1e-15)

    def test_hand_geometry(self):
        origin = np.array([0.0, 0.0, 1.0])
        d = _unit([1, 1, 0])
        rec = GazeRecord(origin, np.tile(d, (5, 1)))
        f = gaze_features(rec, LAYOUT)
        # a: r = (1,0,-1); along-ray 1/sqrt2; perp^2 = 2 - 1/2
        # b: r = (0,2,-1); along-ray sqrt2; perp^2 = 5 - 2
        # c: r = (1,1,0); on the ray
        np.testing.assert_allclose(f.values, [math.sqrt(1.5), math.sqrt(3.0), 0.0], atol=1e-12)


class TestObjectFeatures:
    def test_values(self):
        f = object_features({"cup": (0.0, 0.0, 0.7), "plate": (0.3, 0.4, 0.7), "knife": (0.9, 0, 0.7)}, LAYOUT)
        np.testing.assert_allclose(f.values, [0.0, 0.5, 10.0], atol=1e-15)

    def test_missing_is_outside(self):
        f = object_features({"cup": (0.1, 0.0)}, LAYOUT)
        np.testing.assert_allclose(f.values, [0.1, 10.0, 10.0], atol=1e-15)

    def test_unknown_object(self):
        with pytest.raises(SchemaError):
            object_features({"spoon": (0, 0)}, LAYOUT)

    @settings(max_examples=50)
    @given(st.floats(0.61, 50), st.floats(0, 2 * np.pi), st.floats(0.61, 50), st.floats(0, 2 * np.pi))
    def test_outside_positions_irrelevant(self, r1, a1, r2, a2):
        pos = lambda r, a: (r * math.cos(a), r * math.sin(a), 0.7)
        f1 = object_features({"cup": (0.1, 0.1), "knife": pos(r1, a1)}, LAYOUT)
        f2 = object_features({"cup": (0.1, 0.1), "knife": pos(r2, a2)}, LAYOUT)
        np.testing.assert_array_equal(f1.values, f2.values)


def _blobs(rng, n=50, sep=5.0, dim=2, k=2):
    xs, ys = [], []
    for c in range(k):
        center = np.zeros(dim)
        center[c % dim] = sep * (c + 1)
        xs.append(center + rng.normal(size=(n, dim)))
        ys += [c] * n
    x = np.vstack(xs)
    names = tuple(f"f{i}" for i in range(dim))
    return [FeatureVector(names, row) for row in x], ys


class TestGradient:
    def test_finite_differences(self):
        rng = np.random.default_rng(42)
        for _ in range(20):
            n, f, k = rng.integers(3, 12), rng.integers(1, 5), rng.integers(2, 5)
            x = rng.normal(size=(n, f))
            y = rng.integers(0, k, n)
            w, b = rng.normal(size=(k, f)), rng.normal(size=k)
            l2 = rng.uniform(0, 0.1)
            _, gw, gb = loss_and_grad(w, b, x, y, l2)
            eps = 1e-6
            fw = np.zeros_like(w)
            for idx in np.ndindex(w.shape):
                wp, wm = w.copy(), w.copy()
                wp[idx] += eps
                wm[idx] -= eps
                fw[idx] = (loss_and_grad(wp, b, x, y, l2)[0] - loss_and_grad(wm, b, x, y, l2)[0]) / (2 * eps)
            fb = np.zeros_like(b)
            for i in range(k):
                bp, bm = b.copy(), b.copy()
                bp[i] += eps
                bm[i] -= eps
                fb[i] = (loss_and_grad(w, bp, x, y, l2)[0] - loss_and_grad(w, bm, x, y, l2)[0]) / (2 * eps)
            analytic = np.concatenate([gw.ravel(), gb])
            numeric = np.concatenate([fw.ravel(), fb])
            rel = np.linalg.norm(analytic - numeric) / max(np.linalg.norm(numeric), 1e-12)
            assert rel < 1e-5


class TestTrainLinear:
    def test_separable_blobs(self):
        feats, ys = _blobs(np.random.default_rng(0))
        # weaker L2 than the scenario default, which caps confidence near 0.99
        model = train_linear(feats, ys, 2, LinearHyper(l2=1e-3))
        preds = [int(np.argmax(predict_linear(model, f).probs)) for f in feats]
        assert np.mean(np.array(preds) == ys) == 1.0
        for c, center in enumerate([(5.0, 0.0), (0.0, 10.0)]):
            d = predict_linear(model, FeatureVector(("f0", "f1"), center))
            assert d.probs[c] > 0.99

    def test_zero_model_uniform(self):
        model = LinearModel(np.zeros((4, 2)), np.zeros(4), ("x", "y"), ("x", "y"), np.zeros(2), np.ones(2))
        d = predict_linear(model, FeatureVector(("x", "y"), [3.0, -1.0]))
        np.testing.assert_allclose(d.probs, 0.25, atol=1e-15)

    def test_duplicated_dataset(self):
        feats, ys = _blobs(np.random.default_rng(1), n=20, sep=1.5)
        a = train_linear(feats, ys, 2)
        b = train_linear(feats + feats, ys + ys, 2)
        np.testing.assert_allclose(a.weights, b.weights, atol=1e-9)
        np.testing.assert_allclose(a.bias, b.bias, atol=1e-9)

    def test_symmetric_model(self):
        feats = [FeatureVector(("x",), [v]) for v in (-2.0, -1.0, 1.0, 2.0)]
        model = train_linear(feats, [0, 0, 1, 1], 2)
        d = predict_linear(model, FeatureVector(("x",), [0.0]))
        np.testing.assert_allclose(d.probs, [0.5, 0.5], atol=1e-12)

    def test_drops_constant_features(self, caplog):
        rng = np.random.default_rng(2)
        names = ("a", "const", "b")
        feats = [FeatureVector(names, [rng.normal(), 10.0, rng.normal()]) for _ in range(20)]
        with caplog.at_level(logging.WARNING):
            model = train_linear(feats, [i % 3 for i in range(20)], 3)
        assert model.dropped == ("const",)
        assert model.kept == ("a", "b")
        assert "const" in caplog.text
        d = predict_linear(model, feats[0])
        assert abs(d.probs.sum() - 1) < 1e-12

    def test_deterministic(self):
        feats, ys = _blobs(np.random.default_rng(3), k=3, dim=3)
        a, b = train_linear(feats, ys, 3), train_linear(feats, ys, 3)
        np.testing.assert_array_equal(a.weights, b.weights)

    def test_needs_two_classes(self):
        feats, _ = _blobs(np.random.default_rng(4), n=5)
        with pytest.raises(InputError):
            train_linear(feats, [0] * len(feats), 2)

    def test_schema_mismatch(self):
        feats, ys = _blobs(np.random.default_rng(5))
        model = train_linear(feats, ys, 2)
        with pytest.raises(InputError):
            predict_linear(model, FeatureVector(("g0", "g1"), [0, 0]))

    def test_roundtrip(self):
        feats, ys = _blobs(np.random.default_rng(6), k=3, dim=3)
        model = train_linear(feats, ys, 4, LinearHyper(epochs=50))
        back = LinearModel.from_dict(model.to_dict())
        np.testing.assert_array_equal(back.weights, model.weights)
        assert back.hyper == model.hyper and back.kept == model.kept

    @given(st.lists(st.floats(-30, 30), min_size=2, max_size=9), st.floats(-100, 100))
    def test_argmax_shift_invariant(self, logits, c):
        z = np.array(logits)
        np.testing.assert_allclose(softmax(z + c), softmax(z), atol=1e-12)
        assert np.argmax(softmax(z + c)) == np.argmax(softmax(z))

    @given(st.lists(st.floats(-5, 5), min_size=2, max_size=2))
    def test_any_input_valid(self, x):
        feats, ys = _blobs(np.random.default_rng(7), n=10)
        model = train_linear(feats, ys, 2, LinearHyper(epochs=20))
        d = predict_linear(model, FeatureVector(("f0", "f1"), x))
        assert abs(d.probs.sum() - 1) < 1e-12
        assert linear_logits(model, FeatureVector(("f0", "f1"), x)).shape == (2,)
