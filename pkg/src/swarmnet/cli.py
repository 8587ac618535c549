"""Command-line pipeline: generate, select, train, evaluate, compare, reproduce-paper."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import data
from .backprop import BpConfig, train_bp
from .cfs import select_features
from .data import ClassLabel
from .evaluation import (
    ConfusionMatrix,
    EvaluationReport,
    TOLERANT_NOTE,
    compare_models,
    format_results_table,
    predictions_for,
    report_from_predictions,
)
from .network import Network, Topology, load_model, save_model
from .pso import PsoConfig, pso_train

SEED_ENV_VAR = "SWARMNET_SEED"


def _parse_hidden(text: str) -> tuple[int, ...]:
    try:
        sizes = tuple(int(part) for part in str(text).split(",") if part.strip() != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad hidden layer list {text!r}") from None
    if not sizes:
        raise argparse.ArgumentTypeError("hidden layer list is empty")
    return sizes


def _add_seed_option(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--seed",
        type=int,
        default=None,
        help=f"master seed; falls back to ${SEED_ENV_VAR}, then 0",
    )


def _add_config_option(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--config",
        default=None,
        help="key=value file supplying defaults for this command's options",
    )


def _add_pso_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--inertia", type=float, default=0.729, help="velocity carry-over weight")
    parser.add_argument("--cognitive", type=float, default=1.4944, help="pull toward a particle's own best")
    parser.add_argument("--social", type=float, default=1.4944, help="pull toward the swarm best")
    parser.add_argument("--particles", type=int, default=24)
    parser.add_argument("--exit-error", type=float, default=0.0, help="stop once the best error is below this")
    parser.add_argument("--pos-low", type=float, default=-1.0, help="position init lower bound")
    parser.add_argument("--pos-high", type=float, default=1.0, help="position init upper bound")
    parser.add_argument("--vel-low", type=float, default=-0.5, help="velocity init lower bound")
    parser.add_argument("--vel-high", type=float, default=0.5, help="velocity init upper bound")
    parser.add_argument("--vel-clamp", type=float, default=1.0, help="absolute per-dimension velocity cap")
    parser.add_argument(
        "--scalar-r",
        action="store_true",
        help="draw one random coefficient per update instead of one per dimension",
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="swarmnet",
        description="Train and evaluate a small grade classifier by swarm search or backpropagation.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    commands: dict[str, argparse.ArgumentParser] = {}

    gen = subparsers.add_parser("generate", help="write a synthetic labeled dataset CSV")
    gen.add_argument("--count", type=int, default=313, help="rows to generate (minimum 10)")
    gen.add_argument("--noise", type=float, default=0.0, help="feature noise scale")
    gen.add_argument("--missing-rate", type=float, default=0.0, help="probability a cell is blank")
    gen.add_argument("--out", required=True, help="output CSV path")
    _add_seed_option(gen)
    _add_config_option(gen)
    commands["generate"] = gen

    sel = subparsers.add_parser("select", help="reduce a dataset to an informative column subset")
    sel.add_argument("--data", required=True, help="input CSV")
    group = sel.add_mutually_exclusive_group(required=True)
    group.add_argument("--preset", choices=sorted(data.FEATURE_PRESETS), help="use a shipped column list")
    group.add_argument("--cfs", action="store_true", help="search for the best correlation-merit subset")
    sel.add_argument("--out", required=True, help="reduced CSV path")
    sel.add_argument("--report", default=None, help="selection report JSON path")
    _add_config_option(sel)
    commands["select"] = sel

    train = subparsers.add_parser("train", help="preprocess a CSV and train a model")
    train.add_argument("--data", required=True, help="input CSV")
    train.add_argument("--trainer", choices=("pso", "bp"), default="pso")
    train.add_argument("--hidden", type=_parse_hidden, default=(12, 8), help="hidden layer sizes, e.g. 12,8")
    train.add_argument("--epochs", type=int, default=500)
    train.add_argument("--train-fraction", type=float, default=0.9)
    train.add_argument(
        "--balance-to",
        default="auto",
        help="oversampling target: a row count, 'auto' (equalize upward), or 'none'",
    )
    train.add_argument("--model-out", required=True, help="model file path")
    train.add_argument("--trace-out", default=None, help="per-epoch error CSV (default: MODEL.trace.csv)")
    train.add_argument("--stats-out", default=None, help="normalization JSON (default: MODEL.stats.json)")
    train.add_argument("--train-out", default=None, help="optional CSV of the preprocessed training split")
    train.add_argument("--test-out", default=None, help="optional CSV of the preprocessed test split")
    train.add_argument("--lr", type=float, default=0.3, help="backpropagation learning rate")
    train.add_argument("--momentum", type=float, default=0.9, help="backpropagation momentum")
    train.add_argument("--target-error", type=float, default=0.0, help="backpropagation stop threshold")
    _add_pso_options(train)
    _add_seed_option(train)
    _add_config_option(train)
    commands["train"] = train

    ev = subparsers.add_parser("evaluate", help="score a model file against a dataset CSV")
    ev.add_argument("--model", required=True)
    ev.add_argument("--data", required=True)
    ev.add_argument("--mode", choices=("strict", "tolerant", "both"), default="both")
    ev.add_argument(
        "--stats",
        default=None,
        help="normalization JSON from training; apply it (plus mean imputation) before scoring",
    )
    ev.add_argument("--report-out", default=None, help="report JSON path")
    _add_config_option(ev)
    commands["evaluate"] = ev

    cmp_parser = subparsers.add_parser("compare", help="compare strict and tolerant report files")
    cmp_parser.add_argument("--strict", required=True, help="report JSON containing a strict section")
    cmp_parser.add_argument("--tolerant", required=True, help="report JSON containing a tolerant section")
    cmp_parser.add_argument("--out", default=None, help="comparison JSON path")
    _add_config_option(cmp_parser)
    commands["compare"] = cmp_parser

    rep = subparsers.add_parser(
        "reproduce-paper",
        help="run the full reference pipeline end to end on synthetic data",
    )
    rep.add_argument("--out-dir", required=True)
    rep.add_argument("--count", type=int, default=313, help="raw rows to generate")
    rep.add_argument("--noise", type=float, default=0.05)
    rep.add_argument("--missing-rate", type=float, default=0.0)
    rep.add_argument("--balance-to", type=int, default=580)
    rep.add_argument("--train-fraction", type=float, default=0.9)
    rep.add_argument("--hidden", type=_parse_hidden, default=(12, 8))
    rep.add_argument("--epochs", type=int, default=500)
    _add_pso_options(rep)
    _add_seed_option(rep)
    _add_config_option(rep)
    commands["reproduce-paper"] = rep

    return parser, commands


def _parse_config_file(path: Path) -> dict[str, str]:
    if not path.exists():
        raise ValueError(f"config file {path} does not exist")
    entries: dict[str, str] = {}
    for number, line in enumerate(path.read_text(encoding="ascii").splitlines(), start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        if "=" not in text:
            raise ValueError(f"{path}: line {number}: expected key=value, got {text!r}")
        key, value = text.split("=", 1)
        entries[key.strip()] = value.strip()
    return entries


_TRUE_WORDS = ("1", "true", "yes", "on")
_FALSE_WORDS = ("0", "false", "no", "off")


def _config_tokens(command_parser: argparse.ArgumentParser, path: Path) -> list[str]:
    actions = {
        action.dest: action
        for action in command_parser._actions
        if action.option_strings
    }
    tokens: list[str] = []
    for key, value in _parse_config_file(path).items():
        dest = key.replace("-", "_")
        if dest == "config":
            continue
        action = actions.get(dest)
        if action is None:
            raise ValueError(f"config key {key!r} is not an option of this command")
        option = action.option_strings[-1]
        if isinstance(action, argparse._StoreTrueAction):
            word = value.lower()
            if word in _TRUE_WORDS:
                tokens.append(option)
            elif word not in _FALSE_WORDS:
                raise ValueError(f"config key {key!r} needs a true/false value, got {value!r}")
        else:
            tokens.extend([option, value])
    return tokens


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return int(args.seed)
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None and env.strip() != "":
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"${SEED_ENV_VAR} must be an integer, got {env!r}") from None
    return 0


def _stage_seeds(master: int, count: int) -> list[int]:
    return [int(v) for v in np.random.SeedSequence(master).generate_state(count, dtype=np.uint64)]


def _pso_config(args, seed: int) -> PsoConfig:
    return PsoConfig(
        inertia=args.inertia,
        cognitive=args.cognitive,
        social=args.social,
        particle_count=args.particles,
        max_epochs=args.epochs,
        exit_error=args.exit_error,
        position_init_range=(args.pos_low, args.pos_high),
        velocity_init_range=(args.vel_low, args.vel_high),
        velocity_clamp=args.vel_clamp,
        scalar_r=args.scalar_r,
        seed=seed,
    )


def _write_trace_csv(path, errors, first_epoch: int) -> None:
    lines = ["epoch,error"]
    lines.extend(
        f"{epoch},{value!r}" for epoch, value in enumerate(errors, start=first_epoch)
    )
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def _write_json(document: dict, path) -> None:
    Path(path).write_text(json.dumps(document, indent=2) + "\n", encoding="ascii")


def cmd_generate(args) -> int:
    seed = _resolve_seed(args)
    dataset = data.synthesize(
        args.count, seed, noise_level=args.noise, missing_rate=args.missing_rate
    )
    data.save_csv(dataset, args.out)
    counts = dataset.class_counts()
    print(f"wrote {dataset.n_samples} samples to {args.out}")
    for label in ClassLabel:
        print(f"  class {label.grade}: {counts[label]}")
    return 0


def cmd_select(args) -> int:
    dataset = data.load_csv(args.data)
    if args.preset:
        names = data.FEATURE_PRESETS[args.preset]
        reduced = dataset.select(names)
        report = {
            "method": "preset",
            "preset": args.preset,
            "names": list(names),
            "indices": [dataset.feature_names.index(name) for name in names],
        }
    else:
        complete = data.impute_mean(dataset)  # correlations need every cell present
        result = select_features(complete.features, complete.codes())
        names = tuple(dataset.feature_names[i] for i in result.indices)
        reduced = dataset.select(names)
        report = {"method": "cfs", **result.to_json_dict(dataset.feature_names)}
    data.save_csv(reduced, args.out)
    if args.report:
        _write_json(report, args.report)
    print(f"kept {reduced.n_features} of {dataset.n_features} columns -> {args.out}")
    print("  " + ", ".join(reduced.feature_names))
    return 0


def _balance_target(balanced_to: str, dataset) -> int | None:
    word = str(balanced_to).strip().lower()
    if word == "none":
        return None
    counts = [n for n in dataset.class_counts().values() if n > 0]
    if word == "auto":
        return max(counts) * len(counts)
    try:
        return int(word)
    except ValueError:
        raise ValueError(f"--balance-to must be a row count, 'auto', or 'none', got {balanced_to!r}") from None


def cmd_train(args) -> int:
    seed = _resolve_seed(args)
    dataset = data.load_csv(args.data)
    seeds = _stage_seeds(seed, 4)
    normalized, stats = data.normalize_minmax(dataset)
    imputed = data.impute_mean(normalized)
    target_total = _balance_target(args.balance_to, imputed)
    if target_total is None:
        balanced = imputed
    else:
        balanced = data.balance_oversample(
            imputed, target_total, seeds[0], required_classes=tuple(ClassLabel)
        )
    train_set, test_set = data.stratified_split(balanced, args.train_fraction, seeds[1])

    topology = Topology(train_set.n_features, args.hidden, 1)
    if args.trainer == "pso":
        result = pso_train(train_set.features, train_set.targets(), topology, _pso_config(args, seeds[2]))
        network = Network.from_vector(topology, result.best_position)
        errors, first_epoch, final_error = result.trace, 0, result.best_error
    else:
        start = Network.random(topology, seeds[2])
        config = BpConfig(
            learning_rate=args.lr,
            momentum=args.momentum,
            max_epochs=args.epochs,
            target_error=args.target_error,
            seed=seeds[3],
        )
        network, trace = train_bp(start, train_set.features, train_set.targets(), config)
        errors, first_epoch, final_error = trace.epoch_errors, 1, trace.epoch_errors[-1]

    model_path = Path(args.model_out)
    save_model(network, model_path)
    trace_path = Path(args.trace_out) if args.trace_out else model_path.with_suffix(model_path.suffix + ".trace.csv")
    _write_trace_csv(trace_path, errors, first_epoch)
    stats_path = Path(args.stats_out) if args.stats_out else model_path.with_suffix(model_path.suffix + ".stats.json")
    data.save_normalization_stats(stats, stats_path)
    if args.train_out:
        data.save_csv(train_set, args.train_out)
    if args.test_out:
        data.save_csv(test_set, args.test_out)
    print(f"trained {args.trainer} model on {train_set.n_samples} samples "
          f"({test_set.n_samples} held out), final error {final_error:.6f}")
    print(f"model -> {model_path}; trace -> {trace_path}; stats -> {stats_path}")
    return 0


def _evaluation_document(network, dataset, mode: str) -> dict:
    predictions = predictions_for(network, dataset)
    document: dict = {}
    modes = ("strict", "tolerant") if mode == "both" else (mode,)
    reports = {m: report_from_predictions(predictions, m) for m in modes}
    for m in modes:
        document[m] = reports[m].to_json_dict()
    if mode == "both":
        document["comparison"] = compare_models(reports["strict"], reports["tolerant"]).to_json_dict()
    return document


def _print_evaluation(document: dict) -> None:
    rows = []
    for mode in ("strict", "tolerant"):
        if mode in document:
            rows.append(("dataset", _report_from_record(document[mode])))
    print(format_results_table(rows))
    for mode in ("strict", "tolerant"):
        if mode in document:
            print(f"\nconfusion matrix ({mode}):")
            print(_report_from_record(document[mode]).matrix.format_text())
    if "comparison" in document:
        comparison = document["comparison"]
        print(
            f"\ntolerant - strict accuracy: {comparison['difference_percent']:.2f} points "
            f"({comparison['strict_accuracy_percent']:.2f}% -> {comparison['tolerant_accuracy_percent']:.2f}%)"
        )
    if "tolerant" in document:
        print(f"note: {TOLERANT_NOTE}")


def _report_from_record(record) -> EvaluationReport:
    if isinstance(record, EvaluationReport):
        return record
    return EvaluationReport(
        mode=record["mode"],
        correct=int(record["correct"]),
        incorrect=int(record["incorrect"]),
        mae=float(record["mae"]),
        rmse=float(record["rmse"]),
        mae_raw=float(record["mae_raw_scale"]),
        rmse_raw=float(record["rmse_raw_scale"]),
        matrix=ConfusionMatrix(np.array(record["confusion_matrix"])),
    )


def cmd_evaluate(args) -> int:
    network = load_model(args.model)
    dataset = data.load_csv(args.data)
    if args.stats:
        stats = data.load_normalization_stats(args.stats)
        dataset = data.impute_mean(data.apply_normalization(dataset, stats))
    document = _evaluation_document(network, dataset, args.mode)
    if args.report_out:
        _write_json(document, args.report_out)
    _print_evaluation(document)
    return 0


def _section(document: dict, mode: str, path: str) -> EvaluationReport:
    if mode in document:
        return _report_from_record(document[mode])
    if document.get("mode") == mode:
        return _report_from_record(document)
    raise ValueError(f"{path}: no {mode} report section found")


def cmd_compare(args) -> int:
    strict_doc = json.loads(Path(args.strict).read_text(encoding="ascii"))
    tolerant_doc = json.loads(Path(args.tolerant).read_text(encoding="ascii"))
    record = compare_models(
        _section(strict_doc, "strict", args.strict),
        _section(tolerant_doc, "tolerant", args.tolerant),
    )
    if args.out:
        _write_json(record.to_json_dict(), args.out)
    print(
        f"strict {record.strict_accuracy:.2f}% vs tolerant {record.tolerant_accuracy:.2f}% "
        f"(+{record.difference:.2f} points)"
    )
    print(f"note: {TOLERANT_NOTE}")
    return 0


def cmd_reproduce(args) -> int:
    seed = _resolve_seed(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    seeds = _stage_seeds(seed, 4)

    raw = data.synthesize(args.count, seeds[0], noise_level=args.noise, missing_rate=args.missing_rate)
    data.save_csv(raw, out_dir / "dataset.csv")
    reduced = raw.select(data.REDUCED_FEATURES)
    data.save_csv(reduced, out_dir / "reduced.csv")

    normalized, stats = data.normalize_minmax(reduced)
    data.save_normalization_stats(stats, out_dir / "stats.json")
    imputed = data.impute_mean(normalized)
    balanced = data.balance_oversample(
        imputed, args.balance_to, seeds[1], required_classes=tuple(ClassLabel)
    )
    train_set, test_set = data.stratified_split(balanced, args.train_fraction, seeds[2])
    data.save_csv(train_set, out_dir / "train.csv")
    data.save_csv(test_set, out_dir / "test.csv")

    topology = Topology(train_set.n_features, args.hidden, 1)
    result = pso_train(train_set.features, train_set.targets(), topology, _pso_config(args, seeds[3]))
    network = Network.from_vector(topology, result.best_position)
    save_model(network, out_dir / "model.txt")
    _write_trace_csv(out_dir / "trace.csv", result.trace, 0)

    documents = {}
    for phase, subset in (("train", train_set), ("test", test_set)):
        document = _evaluation_document(network, subset, "both")
        documents[phase] = document
        _write_json(document, out_dir / f"report_{phase}.json")

    lines = [
        "Synthetic rehearsal of the full pipeline (not real appraisal data)",
        f"seed {seed}: {raw.n_samples} raw rows -> {reduced.n_features} columns -> "
        f"{balanced.n_samples} balanced -> {train_set.n_samples}/{test_set.n_samples} split",
        "",
        format_results_table(
            [
                ("training", _report_from_record(documents["train"]["strict"])),
                ("training", _report_from_record(documents["train"]["tolerant"])),
                ("testing", _report_from_record(documents["test"]["strict"])),
                ("testing", _report_from_record(documents["test"]["tolerant"])),
            ]
        ),
        "",
        "test confusion matrix (tolerant):",
        _report_from_record(documents["test"]["tolerant"]).matrix.format_text(),
        "",
        f"note: {TOLERANT_NOTE}",
    ]
    summary = "\n".join(lines) + "\n"
    (out_dir / "summary.txt").write_text(summary, encoding="ascii")
    print(summary, end="")
    return 0


_HANDLERS = {
    "generate": cmd_generate,
    "select": cmd_select,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "compare": cmd_compare,
    "reproduce-paper": cmd_reproduce,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, commands = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "config", None):
            tokens = _config_tokens(commands[args.command], Path(args.config))
            insert_at = argv.index(args.command) + 1
            parser, commands = build_parser()
            args = parser.parse_args(argv[:insert_at] + tokens + argv[insert_at:])
        return _HANDLERS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
