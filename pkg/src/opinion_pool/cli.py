"""Command-line entry point.

Exit codes: 0 success, 2 usage / config / data error, 1 internal error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import RunConfig, RunConfigError, env_seed, load_run_config
from .distributions import InvalidDistributionError, entropy, fuse_iop, predict_label, score_difference
from .evaluation import ProtocolError, evaluate, write_report
from .features import InputError, SceneLayout, SchemaError
from .modalities import MODALITIES, train_classifiers
from .promp import TrainingError, condition_response
from .scenario import ScenarioConfigError, SplitError, generate_dataset, split_dataset
from .storage import (
    DataError,
    dataset_from_dict,
    example_from_dict,
    fingerprint,
    load_dataset,
    load_models,
    read_json,
    save_dataset,
    save_models,
    write_json,
)

log = logging.getLogger("opinion_pool")

USER_ERRORS = (
    RunConfigError,
    ScenarioConfigError,
    SplitError,
    DataError,
    ProtocolError,
    TrainingError,
    InputError,
    SchemaError,
    InvalidDistributionError,
    OSError,
)


def cmd_config(args) -> int:
    doc = RunConfig().to_dict()
    if args.out:
        write_json(args.out, doc)
    else:
        print(json.dumps(doc, indent=2))
    return 0


def cmd_generate(args) -> int:
    if args.config is None:
        seed = env_seed()
        cfg = RunConfig() if seed is None else RunConfig(seed=seed)
    else:
        cfg = load_run_config(args.config)
    data = generate_dataset(cfg.scenario)
    train, test = split_dataset(data, cfg.train_fraction, cfg.seed)
    out = Path(args.out)
    doc_cfg = cfg.to_dict()
    layout = cfg.scenario.layout
    save_dataset(out / "train.json", train, doc_cfg, layout)
    save_dataset(out / "test.json", test, doc_cfg, layout)
    print(f"wrote {len(train)} training and {len(test)} test examples to {out}")
    return 0


def _run_config_from_doc(doc) -> RunConfig:
    if "config" not in doc:
        return RunConfig()
    return RunConfig.from_dict(doc["config"])


def cmd_train(args) -> int:
    train, doc = load_dataset(args.data)
    cfg = _run_config_from_doc(doc)
    if tuple(cfg.scenario.intentions) != train.intentions.labels:
        raise DataError("dataset intentions do not match its embedded config")
    if "layout" not in doc:
        raise DataError("dataset carries no scene layout")
    layout = SceneLayout.from_dict(doc["layout"])
    if not train.examples:
        raise DataError("training set is empty")
    if not train.demos:
        raise DataError("training set has no gesture demonstrations")
    classifiers = train_classifiers(train, layout, cfg.basis, cfg.linear, cfg.gaze_window)
    extra = {"gesture": {"response_points": cfg.response_points}}
    paths = save_models(args.out, classifiers, extra)
    print(f"wrote {len(paths)} model files to {args.out}")
    return 0


def cmd_eval(args) -> int:
    classifiers, _ = load_models(args.models)
    test, doc = load_dataset(args.test)
    if not test.examples:
        raise DataError("test set is empty")
    intentions = classifiers["speech"].intentions
    if test.intentions != intentions:
        raise DataError("test set intentions do not match the models")
    meta = {
        "seed": doc.get("config", {}).get("seed"),
        "config": doc.get("config"),
        "dataset_sha256": fingerprint(args.test),
        "intentions": list(intentions.labels),
        "n_test": len(test),
    }
    report = evaluate(classifiers, list(test.examples), intentions, meta)
    write_report(report, args.out)
    for r in report.results:
        print(f"{r.name:30s} acc={r.accuracy:.3f} entropy={r.entropy_mean:.3f} scorediff={r.scorediff_mean:.3f}")
    return 0


def _describe(d, intentions) -> dict:
    return {
        "probs": d.tolist(),
        "predicted": intentions.label(predict_label(d)),
        "entropy": entropy(d),
        "score_difference": score_difference(d),
    }


def cmd_infer(args) -> int:
    classifiers, docs = load_models(args.models)
    intentions = classifiers["speech"].intentions
    doc = read_json(args.example)
    if isinstance(doc, dict) and "examples" in doc:
        data = dataset_from_dict(doc)
        if not 0 <= args.index < len(data.examples):
            raise DataError(f"example index {args.index} out of range for {len(data.examples)} examples")
        if data.intentions != intentions:
            raise DataError("example intentions do not match the models")
        example = data.examples[args.index]
    else:
        example = example_from_dict(doc, intentions)
    outputs = {name: classifiers[name].predict(example) for name in MODALITIES}
    fused = fuse_iop(list(outputs.values()))
    k = predict_label(fused)
    result = {
        "example_id": example.id,
        "intentions": list(intentions.labels),
        "modalities": {name: _describe(d, intentions) for name, d in outputs.items()},
        "fused": _describe(fused, intentions),
        "predicted_intention": intentions.label(k),
    }
    if args.respond:
        n_points = int(docs["gesture"].get("response_points", 50))
        traj = condition_response(
            classifiers["gesture"].mixture, k, example.gesture_point, example.gesture_time,
            n_points=n_points,
        )
        result["response"] = {
            "intention": intentions.label(k),
            "times": traj.times.tolist(),
            "points": traj.points.tolist(),
        }
    print(json.dumps(result, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="opinion-pool",
        description="Multimodal intention recognition with Independent Opinion Pool fusion.",
    )
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("config", help="print or write the default run config")
    c.add_argument("--out")
    c.set_defaults(func=cmd_config)

    g = sub.add_parser("generate", help="generate train/test datasets")
    g.add_argument("--config", help="run config JSON (defaults used when omitted)")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    t = sub.add_parser("train", help="train the four base classifiers")
    t.add_argument("--data", required=True)
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="evaluate every modality subset on a test set")
    e.add_argument("--models", required=True)
    e.add_argument("--test", required=True)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_eval)

    i = sub.add_parser("infer", help="classify one example")
    i.add_argument("--models", required=True)
    i.add_argument("--example", required=True)
    i.add_argument("--index", type=int, default=0, help="example index when --example is a dataset")
    i.add_argument("--respond", action="store_true", help="include the conditioned robot trajectory")
    i.set_defaults(func=cmd_infer)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except USER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
