"""Command-line surface: profile, run, benchmark, rank, analyze, recommend."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from .benchmark import (
    DEFAULT_RANK_METRICS,
    ExperimentGrid,
    prepare_splits,
    run_benchmark,
    scenario_name,
    scenario_rank_tables,
)
from .exceptions import InvalidInputError, ModcastError
from .io import load_csv, read_results
from .metrics import METRIC_NAMES
from .pipeline import compose, config_to_known_model, enumerate_design_space
from .profiler import DataProfile, profile_dataset, profile_from_text, profile_to_text
from .selector import (
    BoostedEnsemble,
    claims_to_text,
    effectiveness_scan,
    fit_recommender,
    parse_config_id,
    recommend_top_k,
)
from .training import TrainSpec, evaluate, train


# --- argument types -----------------------------------------------------------------
def positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def non_negative_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {v}")
    return v


def non_negative_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not v >= 0 or v == float("inf"):
        raise argparse.ArgumentTypeError(f"expected a finite non-negative number, got {text}")
    return v


def probability(text: str) -> float:
    v = non_negative_float(text)
    if v > 1:
        raise argparse.ArgumentTypeError(f"expected a value in [0, 1], got {text}")
    return v


def int_list(text: str) -> list[int]:
    try:
        out = [positive_int(t) for t in text.split(",") if t.strip()]
    except argparse.ArgumentTypeError as exc:
        raise argparse.ArgumentTypeError(f"in list {text!r}: {exc}") from None
    if not out:
        raise argparse.ArgumentTypeError("at least one value is required")
    return out


def seed_list(text: str) -> list[int]:
    out = []
    for t in text.split(","):
        if not t.strip():
            continue
        if not t.strip().isdigit():
            raise argparse.ArgumentTypeError(f"seeds must be non-negative integers, got {t!r}")
        out.append(int(t))
    if not out:
        raise argparse.ArgumentTypeError("at least one seed is required")
    return out


def metric_list(text: str) -> list[str]:
    names = [t.strip() for t in text.split(",") if t.strip()]
    bad = [n for n in names if n not in METRIC_NAMES]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"metrics must be drawn from {METRIC_NAMES}, got {text!r}")
    return names


# --- helpers ------------------------------------------------------------------------
def _train_spec(args) -> TrainSpec:
    return TrainSpec(lr=args.lr, epochs=args.epochs, batch_size=args.batch_size)


def _add_training_flags(p):
    p.add_argument("--epochs", type=non_negative_int, default=10)
    p.add_argument("--lr", type=non_negative_float, default=1e-3)
    p.add_argument("--batch-size", type=positive_int, default=32)
    p.add_argument("--no-standardize", action="store_true", help="train on raw values")


def _add_data_flags(p):
    p.add_argument("--target", help="column for univariate mode")
    p.add_argument("--period", type=positive_int, help="seasonal period of the data")
    p.add_argument("--fill", choices=("error", "ffill"), default="error", help="handling of empty cells")


def read_profile_document(path) -> tuple[DataProfile, dict]:
    """A profile from key=value text or a JSON object, plus its extra keys."""
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        raw = json.loads(text)
        text = "\n".join(f"{k}={'absent' if v is None else v}" for k, v in raw.items())
    profile = profile_from_text(text)
    extra = {}
    for line in text.splitlines():
        key, _, value = line.partition("=")
        if key.strip() in ("dataset", "lookback", "horizon", "task"):
            extra[key.strip()] = value.strip()
    return profile, extra


def _profile_scenario(profile: DataProfile, extra: dict, path) -> tuple:
    missing = [k for k in ("dataset", "lookback", "horizon") if k not in extra]
    if missing:
        raise InvalidInputError(f"profile {path} lacks {missing}")
    task = extra.get("task") or ("univariate" if profile.n_feature == 1 else "multivariate")
    return (extra["dataset"], task, int(extra["lookback"]), int(extra["horizon"]))


def _load_profiles(paths) -> dict:
    out = {}
    for p in paths:
        profile, extra = read_profile_document(p)
        out[_profile_scenario(profile, extra, p)] = profile
    return out


def _config_line(rank: int, c) -> str:
    name = config_to_known_model(c)
    return f"{rank}. {c.config_id}" + (f"  ({name})" if name else "")


# --- subcommands --------------------------------------------------------------------
def cmd_profile(args, out) -> int:
    src = load_csv(args.data, target=args.target, fill=args.fill, frequency=args.period)
    profile = profile_dataset(src.values, args.lookback, args.horizon, period=args.period)
    task = "univariate" if args.target else "multivariate"
    text = f"task={task}\n" + profile_to_text(profile, src.name, args.lookback, args.horizon)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    out.write(text)
    return 0


def cmd_run(args, out) -> int:
    src = load_csv(args.data, target=args.target, fill=args.fill, frequency=args.period)
    cols = parse_config_id(args.config)
    space = enumerate_design_space(args.lookback, args.horizon, src.channels)
    match = [c for c in space if c.config_id == args.config]
    if not match:
        raise InvalidInputError(f"{args.config} is not a valid config ({cols})")
    c = match[0]
    splits = prepare_splits(src.values, args.lookback, args.horizon, (0.7, 0.1, 0.2), not args.no_standardize, src.frequency)
    m = compose(c, args.seed)
    res = train(m, splits[0], _train_spec(args), splits[1])
    out.write(f"config={c.config_id}\n")
    name = config_to_known_model(c)
    if name:
        out.write(f"known_model={name}\n")
    out.write(f"params={m.param_count}\n")
    if res.failed:
        out.write(f"status=failed\nfailed_epoch={res.failed_epoch}\n")
        return 1
    report = evaluate(m, splits[2], src.frequency)
    out.write("status=ok\n")
    for k, v in report.to_dict().items():
        out.write(f"{k}={'undefined' if v is None else repr(v)}\n")
    return 0


def cmd_benchmark(args, out) -> int:
    sources = [load_csv(p, fill=args.fill, frequency=args.period) for p in args.data]
    configs = None if args.configs == "all" else [c.strip() for c in args.configs.split(",") if c.strip()]
    grid = ExperimentGrid(
        datasets=sources,
        horizons=args.horizons,
        lookbacks=args.lookbacks,
        configs=configs,
        seeds=args.seeds,
        task=args.task,
        target=args.target,
        spec=_train_spec(args),
        standardize=not args.no_standardize,
    )
    outcome = run_benchmark(grid, args.out, workers=args.workers, metrics=args.metrics)
    out.write(f"rows={len(outcome.rows)} new_runs={outcome.new_runs} failures={outcome.failures}\n")
    for key in sorted(outcome.rank_tables):
        out.write(f"# {scenario_name(key)}\n")
        out.write(outcome.rank_tables[key].sorted().to_text())
    return outcome.exit_status


def cmd_rank(args, out) -> int:
    rows = read_results(args.results)
    if not rows:
        raise InvalidInputError(f"{args.results} has no result rows")
    tables = scenario_rank_tables(rows, args.metrics)
    for key in sorted(tables):
        out.write(f"# {scenario_name(key)}\n")
        out.write(tables[key].to_text())
    return 0


def cmd_analyze(args, out) -> int:
    rows = read_results(args.results)
    profiles = _load_profiles(args.profiles)
    tables = scenario_rank_tables(rows, args.metrics)
    results = {scenario_name(k): t for k, t in tables.items() if k in profiles}
    by_name = {scenario_name(k): p for k, p in profiles.items() if scenario_name(k) in results}
    settings = {scenario_name(k): k[1] for k in tables if k in profiles}
    scan = effectiveness_scan(results, by_name, settings, alpha=args.alpha)
    out.write(claims_to_text(scan))
    for note in scan.notes if args.notes else ():
        out.write(f"# {note}\n")
    return 0


def _training_rows(results_path, profile_paths, metrics, setting: str) -> list:
    rows = read_results(results_path)
    profiles = _load_profiles(profile_paths)
    tables = scenario_rank_tables(rows, metrics)
    out = []
    for key in sorted(tables):
        if key not in profiles or key[1] != setting:
            continue
        for r in tables[key].rows:
            cols = parse_config_id(r.config_id)
            out.append((profiles[key], (cols["IN"], cols["SD"], cols["fusion"], cols["embed"], cols["arch"]), r.score))
    return out


def cmd_recommend(args, out) -> int:
    profile, extra = read_profile_document(args.profile)
    setting = "univariate" if profile.n_feature == 1 else "multivariate"
    model_path = Path(args.model) if args.model else None
    if model_path is not None and model_path.exists() and not args.results:
        model = BoostedEnsemble.load(model_path)
    elif args.results:
        rows = _training_rows(args.results, args.profiles or [], args.metrics, setting)
        model = fit_recommender(rows, n_trees=args.trees, depth=args.depth, shrinkage=args.shrinkage)
        if model_path is not None:
            model.save(model_path)
    else:
        raise InvalidInputError("give an existing --model file or --results/--profiles to fit one")
    lookback = args.lookback or int(extra.get("lookback", 0))
    horizon = args.horizon or int(extra.get("horizon", 0))
    channels = args.channels or profile.n_feature
    if lookback < 1 or horizon < 1:
        raise InvalidInputError("lookback and horizon are needed (flags or profile keys)")
    for i, c in enumerate(recommend_top_k(model, profile, args.k, lookback, horizon, channels), start=1):
        out.write(_config_line(i, c) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="modcast", description="Modular forecasting pipelines: profile, benchmark, analyze, recommend.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="compute the data profile of a CSV file")
    p.add_argument("--data", required=True)
    p.add_argument("--lookback", type=positive_int, required=True)
    p.add_argument("--horizon", type=positive_int, required=True)
    p.add_argument("--out", help="also write the profile document here")
    _add_data_flags(p)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("run", help="train and test one config on one dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--config", required=True, help="config id, e.g. in1-sd0-temporal-none-mlp")
    p.add_argument("--lookback", type=positive_int, required=True)
    p.add_argument("--horizon", type=positive_int, required=True)
    p.add_argument("--seed", type=non_negative_int, default=0)
    _add_data_flags(p)
    _add_training_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("benchmark", help="run a resumable grid and write a results table")
    p.add_argument("--data", required=True, nargs="+")
    p.add_argument("--lookbacks", type=int_list, required=True)
    p.add_argument("--horizons", type=int_list, required=True)
    p.add_argument("--configs", default="all", help="'all' or comma-separated config ids")
    p.add_argument("--seeds", type=seed_list, default=[0, 1, 2, 3])
    p.add_argument("--task", choices=("multivariate", "univariate"), default="multivariate")
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=positive_int, help="parallel cells (default: $RECIPE_WORKERS or 1)")
    p.add_argument("--metrics", type=metric_list, default=list(DEFAULT_RANK_METRICS))
    _add_data_flags(p)
    _add_training_flags(p)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("rank", help="rank tables per scenario from a results table")
    p.add_argument("--results", required=True)
    p.add_argument("--metrics", type=metric_list, default=list(DEFAULT_RANK_METRICS))
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("analyze", help="property-conditioned module effectiveness claims")
    p.add_argument("--results", required=True)
    p.add_argument("--profiles", required=True, nargs="+")
    p.add_argument("--metrics", type=metric_list, default=list(DEFAULT_RANK_METRICS))
    p.add_argument("--alpha", type=probability, default=0.05)
    p.add_argument("--notes", action="store_true", help="also print coverage notes")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("recommend", help="top-k configs for a data profile")
    p.add_argument("--profile", required=True)
    p.add_argument("--model", help="model file to load (or to write after fitting)")
    p.add_argument("--results", help="results table to fit on")
    p.add_argument("--profiles", nargs="+", help="profiles of the benchmarked scenarios")
    p.add_argument("--k", type=positive_int, default=3)
    p.add_argument("--lookback", type=positive_int)
    p.add_argument("--horizon", type=positive_int)
    p.add_argument("--channels", type=positive_int)
    p.add_argument("--metrics", type=metric_list, default=list(DEFAULT_RANK_METRICS))
    p.add_argument("--trees", type=non_negative_int, default=200)
    p.add_argument("--depth", type=positive_int, default=3)
    p.add_argument("--shrinkage", type=probability, default=0.1)
    p.set_defaults(func=cmd_recommend)
    return parser


def main(argv: Sequence[str] | None = None, out=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors
        return int(exc.code or 0)
    out = out or sys.stdout
    try:
        return args.func(args, out)
    except (ModcastError, OSError) as exc:
        print(f"modcast {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
