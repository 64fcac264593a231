"""Command-line interface.

Subcommands: generate, featurize, train, evaluate, predict. Exit codes:
0 success, 1 runtime failure, 2 usage error. Configuration comes from
defaults, then an optional JSON file (--config), then dotted-key overrides
such as --features.temporal_k.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .classifier import load_model, predict, save_model, train
from .config import PipelineConfig, apply_overrides, load_config
from .core import (
    ThermactError,
    load_manifest,
    read_sequence,
)
from .evaluate import (
    loso_split,
    prepare_features,
    run_pipeline_cv,
    stratified_kfold_split,
)
from .features import extract_features
from .preprocess import estimate_background, resample_equal_interval, subtract_background
from .synth import SceneParams, generate_corpus, scene_from_dict

_OVERRIDE_FLAGS = [
    ("preprocess.target_len", int),
    ("features.temporal_k", int),
    ("features.spatial_block", int),
    ("svm.regularization_c", float),
    ("svm.max_epochs", int),
    ("svm.tolerance", float),
    ("svm.seed", int),
    ("eval.protocol", str),
    ("eval.k", int),
    ("eval.seed", int),
]


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON pipeline configuration file")
    for key, typ in _OVERRIDE_FLAGS:
        parser.add_argument(f"--{key}", type=typ, dest=key, default=None, help=argparse.SUPPRESS)


def _effective_config(args: argparse.Namespace) -> PipelineConfig:
    config = load_config(args.config) if args.config else PipelineConfig()
    overrides = {key: getattr(args, key) for key, _ in _OVERRIDE_FLAGS if hasattr(args, key)}
    return apply_overrides(config, overrides)


def _folds_for(config: PipelineConfig, manifest):
    if config.eval.protocol == "loso":
        return loso_split(manifest)
    return stratified_kfold_split(manifest, k=config.eval.k, seed=config.eval.seed)


def cmd_generate(args: argparse.Namespace) -> int:
    scene = None
    if args.scene:
        scene = scene_from_dict(json.loads(Path(args.scene).read_text(encoding="utf-8")))
    summary = generate_corpus(
        args.out, subjects=args.subjects, reps=args.reps, seed=args.seed, scene=scene
    )
    print(
        f"wrote {summary.sequence_count} sequences + background to {args.out} "
        f"(manifest: {summary.manifest_path}, clamped values: {summary.clamped_values})"
    )
    return 0


def cmd_featurize(args: argparse.Namespace) -> int:
    config = _effective_config(args)
    manifest = load_manifest(args.data)
    X, labels = prepare_features(
        manifest, config.preprocess.target_len, config.feature_config()
    )
    lines = ["# label,subject," + ",".join(f"f{i}" for i in range(X.shape[1]))]
    for entry, row in zip(manifest.entries, X):
        lines.append(
            f"{entry.label},{entry.subject_id}," + ",".join(repr(float(v)) for v in row)
        )
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {X.shape[0]} x {X.shape[1]} feature rows to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    config = _effective_config(args)
    manifest = load_manifest(args.data)
    X, labels = prepare_features(
        manifest, config.preprocess.target_len, config.feature_config()
    )
    model = train(X, labels, config.svm, classes=manifest.label_set)
    save_model(model, args.model, config=config.to_dict())
    print(f"trained on {len(labels)} sequences ({len(model.classes)} classes) -> {args.model}")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = _effective_config(args)
    manifest = load_manifest(args.data)
    folds = _folds_for(config, manifest)
    report = run_pipeline_cv(
        manifest,
        folds,
        target_len=config.preprocess.target_len,
        feature_config=config.feature_config(),
        svm_config=config.svm,
        config_echo=config.to_dict(),
    )
    print(report.confusion.to_text())
    print(f"overall accuracy:  {100.0 * report.overall_accuracy:.2f}%")
    if report.fall_sensitivity is not None:
        print(f"fall sensitivity:  {100.0 * report.fall_sensitivity:.2f}%")
    if report.fall_specificity is not None:
        print(f"fall specificity:  {100.0 * report.fall_specificity:.2f}%")
    if args.report:
        payload = report.to_json_dict()
        payload["protocol"] = config.eval.protocol
        payload["tool_version"] = __version__
        payload["config_hash"] = config.config_hash()
        Path(args.report).write_text(json.dumps(payload) + "\n", encoding="utf-8")
        print(f"report written to {args.report}")
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    model, embedded = load_model(args.model)
    config = PipelineConfig() if not embedded else _config_from_embedded(embedded)
    background = estimate_background(read_sequence(args.background))
    feature_cfg = config.feature_config()
    for path in args.sequences:
        seq = read_sequence(path)
        seq = subtract_background(seq, background)
        seq = resample_equal_interval(seq, config.preprocess.target_len)
        vector = extract_features(seq, feature_cfg)
        if len(vector) != model.dimension:
            raise ThermactError(
                f"{path}: feature dimension {len(vector)} does not match model "
                f"dimension {model.dimension} (was the model trained with a "
                f"different configuration?)"
            )
        label, scores = predict(model, vector)
        if args.scores:
            rendered = " ".join(
                f"{cls}={score:.6g}" for cls, score in zip(model.classes, scores)
            )
            print(f"{path}\t{label}\t{rendered}")
        else:
            print(f"{path}\t{label}")
    return 0


def _config_from_embedded(embedded: dict) -> PipelineConfig:
    from .config import config_from_dict

    known = {k: v for k, v in embedded.items() if k in ("preprocess", "features", "svm", "eval")}
    return config_from_dict(known)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thermact",
        description="Activity and fall recognition from 8x8 thermal array recordings.",
    )
    parser.add_argument("--version", action="version", version=f"thermact {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a synthetic labeled corpus")
    p.add_argument("--out", required=True, type=Path, help="output directory")
    p.add_argument("--subjects", type=int, default=8)
    p.add_argument("--reps", type=int, default=3, help="sessions per subject")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--scene", type=Path, help="scene parameter JSON file")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("featurize", help="emit feature vectors as CSV")
    p.add_argument("--data", required=True, type=Path, help="manifest JSON")
    p.add_argument("--out", type=Path, help="output CSV (default: stdout)")
    _add_config_flags(p)
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("train", help="train a model on a full dataset")
    p.add_argument("--data", required=True, type=Path, help="manifest JSON")
    p.add_argument("--model", required=True, type=Path, help="output model file")
    _add_config_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="cross-validate and report metrics")
    p.add_argument("--data", required=True, type=Path, help="manifest JSON")
    p.add_argument("--report", type=Path, help="write the full report JSON here")
    _add_config_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", help="classify sequence files with a trained model")
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--background", required=True, type=Path, help="empty-scene frame CSV")
    p.add_argument("--scores", action="store_true", help="also print per-class scores")
    p.add_argument("sequences", nargs="+", type=Path)
    p.set_defaults(func=cmd_predict)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ThermactError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
