"""Command-line front end.

    nessbench [--seed S] [--out DIR] [--threads T] COMMAND ...

Commands
--------
synth    generate an SBM dataset (features/edges/labels text files)
split    random edge split (+ optional static K-way partition) -> split.json
train    train one configuration -> model.ckpt, metrics.csv, manifest.json
eval     test AUC/AP of a checkpoint -> eval.json
analyze  subgraph analyses of a checkpoint -> analysis.json/.csv/.png
compare  configs x seeds sweep -> runs.csv, summary.csv, compare.png

Config files are flat ``key = value`` lines whose keys are TrainConfig
fields; ``#`` starts a comment.  A compare matrix holds one ``[name]``
section per configuration in the same syntax.

Exit codes: 0 success, 2 usage/config error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import datetime as dt
import hashlib
import io
import json
import logging
import os
import platform
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import __version__
from .data import (
    DataError,
    SbmParams,
    export_dataset,
    generate_sbm,
    load_dataset,
    load_split,
    row_normalize_features,
    save_split,
)
from .encoders import CheckpointError, encoder_forward, load_checkpoint, save_checkpoint
from .evaluation import MetricError, aggregate, aggregation_vs_direct, analyze_subgraphs, evaluate_embedding
from .graph import GraphError, normalize_adjacency
from .objective import NumericalError
from .plotting import plot_compare, plot_subgraph_analysis, plot_training_curves
from .splitter import SplitError, partition_k, res_split
from .trainer import ConfigError, TrainConfig, TrainingDiverged, full_training_adjacency, train

log = logging.getLogger("nessbench")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 2, 3, 4
ANALYSES = ("fig3a", "fig3b", "fig3c", "fig4a", "fig5")
METRICS_HEADER = ["epoch", "L_t", "L_r", "L_c", "val_loss", "val_auc", "wall_ms"]


class UsageError(Exception):
    pass


# -- config files --------------------------------------------------------------


def _coerce(name: str, raw: str):
    defaults = {f.name: f.default for f in fields(TrainConfig)}
    if name not in defaults:
        raise ConfigError(f"unknown config key {name!r}")
    kind = type(defaults[name])
    raw = raw.strip()
    if kind is bool:
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{name}: expected a boolean, got {raw!r}")
    try:
        return kind(raw)
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {raw!r} as {kind.__name__}") from None


def parse_config_text(text: str, origin: str = "<config>") -> dict:
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{origin}:{lineno}: expected key = value")
        key = key.strip()
        if key in values:
            raise ConfigError(f"{origin}:{lineno}: duplicate key {key!r}")
        values[key] = _coerce(key, value)
    return values


def load_config(path=None, overrides=()) -> TrainConfig:
    values = parse_config_text(Path(path).read_text(encoding="utf-8"), str(path)) if path else {}
    for item in overrides:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        values[key.strip()] = _coerce(key.strip(), value)
    return TrainConfig.from_dict(values)


def load_matrix(path) -> list[tuple[str, TrainConfig]]:
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#",), inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string(Path(path).read_text(encoding="utf-8"), source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    matrix = []
    for name in parser.sections():
        values = {k: _coerce(k, v) for k, v in parser[name].items()}
        matrix.append((name, TrainConfig.from_dict(values)))
    if not matrix:
        raise ConfigError(f"{path}: no [config] sections")
    return matrix


# -- shared helpers ------------------------------------------------------------


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _now() -> str:
    return dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds")


def _data_paths(args) -> dict:
    if args.data:
        root = Path(args.data)
        paths = {"features": root / f"{args.prefix}.features", "edges": root / f"{args.prefix}.edges"}
        labels = root / f"{args.prefix}.labels"
        if labels.exists():
            paths["labels"] = labels
    else:
        if not (args.features and args.edges):
            raise UsageError("give --data DIR or both --features and --edges")
        paths = {"features": Path(args.features), "edges": Path(args.edges)}
        if args.labels:
            paths["labels"] = Path(args.labels)
    return paths


def _load_data(args):
    paths = _data_paths(args)
    bundle = load_dataset(paths["features"], paths["edges"], paths.get("labels"))
    graph = row_normalize_features(bundle.graph) if args.row_normalize else bundle.graph
    h = hashlib.sha256()
    for key in sorted(paths):
        h.update(key.encode())
        h.update(sha256_file(paths[key]).encode())
    identity = {
        "name": bundle.name,
        "files": {k: str(v) for k, v in paths.items()},
        "sha256": h.hexdigest(),
        "row_normalized": bool(args.row_normalize),
    }
    return graph, identity


def _partition_for(config: TrainConfig, split, stored):
    """The static partition a model uses: the split file's if K matches, else derived."""
    if stored is not None and stored.k == config.k:
        return stored, "split"
    return partition_k(split.train, config.k, config.seed, split.num_nodes), "derived"


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n", encoding="utf-8")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "nan" if np.isnan(v) else repr(v)
    return str(v)


def _write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    path.write_text(buf.getvalue(), encoding="utf-8")


def _clean(obj):
    """JSON-safe copy with NaN mapped to null."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return None if np.isnan(obj) else float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def metrics_rows(history):
    for r in history:
        yield [r.epoch, r.loss.total, r.loss.recon, r.loss.contrastive, r.val_loss, r.val_auc, r.wall_ms]


def verify_manifest(path) -> dict:
    """Recompute every recorded output hash; raise DataError on mismatch."""
    manifest = json.loads(Path(path).read_text(encoding="utf-8"))
    for name, entry in manifest.get("outputs", {}).items():
        target = Path(entry["path"])
        if not target.exists() or sha256_file(target) != entry["sha256"]:
            raise DataError(f"{path}: output {name!r} ({target}) does not match its recorded hash")
    return manifest


def _load_model(args):
    ckpt = Path(args.checkpoint)
    manifest_path = Path(args.manifest) if args.manifest else ckpt.with_name("manifest.json")
    if manifest_path.exists():
        verify_manifest(manifest_path)
    encoder, projection, header = load_checkpoint(ckpt)
    config = TrainConfig.from_dict(header["config"])
    return encoder, projection, header, config


# -- commands ------------------------------------------------------------------


def cmd_synth(args) -> int:
    blocks = tuple(int(b) for b in args.blocks.split(","))
    params = SbmParams(blocks, args.intra_p, args.inter_p, args.feature_dim, args.noise, args.seed)
    bundle = generate_sbm(params)
    out = args.out
    paths = export_dataset(bundle.graph, out, args.prefix)
    _write_json(out / f"{args.prefix}.json", {"name": bundle.name, "source": bundle.source,
                                               "files": {k: str(v) for k, v in paths.items()}})
    print(f"{bundle.name}: {bundle.graph.num_nodes} nodes, {bundle.graph.num_edges} edges -> {out}")
    return EXIT_OK


def cmd_split(args) -> int:
    graph, _ = _load_data(args)
    try:
        ratios = tuple(float(r) for r in args.ratios.split(","))
    except ValueError:
        raise UsageError(f"--ratios must be three comma-separated numbers, got {args.ratios!r}") from None
    if len(ratios) != 3:
        raise UsageError("--ratios needs exactly three values")
    split = res_split(graph, ratios, args.seed)
    partition = partition_k(split.train, args.k, args.seed, graph.num_nodes) if args.k > 0 else None
    path = args.out / "split.json"
    save_split(split, partition, path)
    print(f"train {len(split.train)}  val {len(split.val_pos)}  test {len(split.test_pos)}  K={args.k} -> {path}")
    return EXIT_OK


def cmd_train(args) -> int:
    config = load_config(args.config, args.set)
    if args.seed_given:
        config.seed = args.seed
    graph, identity = _load_data(args)
    split, stored = load_split(args.split)
    partition, source = _partition_for(config, split, stored) if config.mode == "ness" else (None, None)
    out = args.out
    started = _now()
    metrics_path = out / "metrics.csv"
    try:
        result = train(config, graph, split, partition, record_wall_clock=args.wall_clock)
    except TrainingDiverged as exc:
        _write_csv(metrics_path, METRICS_HEADER, metrics_rows(exc.history))
        raise
    ckpt = out / "model.ckpt"
    save_checkpoint(
        ckpt,
        result.encoder,
        result.projection,
        config=config.to_dict(),
        seed=config.seed,
        epoch=result.best_epoch,
        best_epoch=result.best_epoch,
        epochs_run=result.epochs_run,
        partition_source=source,
        dataset_sha256=identity["sha256"],
    )
    _write_csv(metrics_path, METRICS_HEADER, metrics_rows(result.history))
    outputs = {"checkpoint": ckpt, "metrics": metrics_path}
    if not args.no_figures:
        outputs["figure"] = plot_training_curves(result.history, out / "training.png", config.label)
    manifest = {
        "tool": "nessbench",
        "version": __version__,
        "command": "train",
        "config": config.to_dict(),
        "seeds": [config.seed],
        "dataset": identity,
        "split": {"path": str(args.split), "sha256": sha256_file(args.split)},
        "partition_source": source,
        "best_epoch": result.best_epoch,
        "epochs_run": result.epochs_run,
        "outputs": {k: {"path": str(p), "sha256": sha256_file(p)} for k, p in outputs.items()},
        "started": started,
        "finished": _now(),
        "host": platform.node(),
        "python": platform.python_version(),
    }
    _write_json(out / "manifest.json", manifest)
    print(f"{config.label}: best epoch {result.best_epoch} of {result.epochs_run} -> {ckpt}")
    return EXIT_OK


def _embeddings(encoder, config, graph, split, stored):
    full_adj = full_training_adjacency(split)
    partition, _ = _partition_for(config, split, stored)
    views = [encoder_forward(encoder, graph.features, normalize_adjacency(s.adjacency)) for s in partition.subgraphs]
    if config.mode == "ness":
        z = aggregate(views, config.aggregation)
    else:
        z = encoder_forward(encoder, graph.features, full_adj)
    return z, views, partition, full_adj


def cmd_eval(args) -> int:
    encoder, _, header, config = _load_model(args)
    graph, _ = _load_data(args)
    split, stored = load_split(args.split)
    z, _, _, _ = _embeddings(encoder, config, graph, split, stored)
    pos, neg = (split.test_pos, split.test_neg) if args.on == "test" else (split.val_pos, split.val_neg)
    report = evaluate_embedding(z, pos, neg).to_dict()
    doc = {"model": config.label, "on": args.on, "best_epoch": header.get("best_epoch"), **report}
    _write_json(args.out / "eval.json", _clean(doc))
    print(json.dumps(_clean(doc), sort_keys=True))
    return EXIT_OK


def run_analyses(encoder, config, graph, split, stored, wanted=ANALYSES) -> dict:
    z, views, partition, full_adj = _embeddings(encoder, config, graph, split, stored)
    pos, neg = split.test_pos, split.test_neg
    out = {"model": config.label, "k": partition.k}
    if len(views) > 1 and {"fig3a", "fig3b", "fig3c", "fig5"} & set(wanted):
        a = analyze_subgraphs(views, partition, pos, neg)
        if "fig3a" in wanted:
            out["fig3a"] = {"pearson": a.to_dict()["pearson"], "mean_pairwise_pearson": a.mean_pairwise_pearson}
        if "fig3b" in wanted:
            out["fig3b"] = {"consensus_ratio": a.consensus_ratio, "per_subgraph_accuracy": a.per_subgraph_accuracy}
        if "fig3c" in wanted:
            out["fig3c"] = {"aggregate_auc": a.aggregate_auc, "per_subgraph_auc": a.per_subgraph_auc}
        if "fig5" in wanted:
            out["fig5"] = {"gradual_auc": a.gradual_auc, "ensemble_auc": a.ensemble_auc,
                           "per_subgraph_auc": a.per_subgraph_auc}
        out["_full"] = a.to_dict()
    if "fig4a" in wanted:
        adjs = [normalize_adjacency(s.adjacency) for s in partition.subgraphs]
        agg, direct, delta = aggregation_vs_direct(encoder, graph.features, adjs, full_adj, pos, neg, config.aggregation)
        out["fig4a"] = {"auc_agg": agg, "auc_direct": direct, "delta": delta}
    return out


def _flatten(prefix, value, rows):
    if isinstance(value, dict):
        for k in sorted(value):
            _flatten(f"{prefix}.{k}" if prefix else k, value[k], rows)
    elif isinstance(value, list):
        for i, v in enumerate(value):
            _flatten(f"{prefix}[{i}]", v, rows)
    else:
        rows.append([prefix, value])


def cmd_analyze(args) -> int:
    wanted = tuple(a.strip() for a in args.analyses.split(",")) if args.analyses else ANALYSES
    bad = sorted(set(wanted) - set(ANALYSES))
    if bad:
        raise UsageError(f"unknown analyses {bad}; choose from {', '.join(ANALYSES)}")
    encoder, _, _, config = _load_model(args)
    graph, _ = _load_data(args)
    split, stored = load_split(args.split)
    result = run_analyses(encoder, config, graph, split, stored, wanted)
    full = result.pop("_full", None)
    result = _clean(result)
    _write_json(args.out / "analysis.json", result)
    rows: list = []
    _flatten("", {k: v for k, v in result.items() if k in ANALYSES}, rows)
    _write_csv(args.out / "analysis.csv", ["key", "value"], rows)
    if full is not None and not args.no_figures:
        plot_subgraph_analysis(_clean(full), args.out / "analysis.png")
    print(f"{config.label}: {', '.join(k for k in wanted if k in result)} -> {args.out / 'analysis.json'}")
    return EXIT_OK


# -- compare -------------------------------------------------------------------

RUN_HEADER = ["name", "label", "seed", "auc", "ap", "best_epoch", "epochs_run",
              "mean_pearson", "consensus", "ensemble_auc", "direct_auc"]
SUMMARY_HEADER = ["name", "label", "runs", "auc_mean", "auc_std", "ap_mean", "ap_std"]


def compare_run(task) -> list:
    """One (config, seed) cell; top-level so worker processes can pickle it."""
    name, config_dict, seed, graph, ratios, fixed_split = task
    config = TrainConfig.from_dict({**config_dict, "seed": seed})
    split, stored = fixed_split if fixed_split is not None else (res_split(graph, ratios, seed), None)
    partition, _ = _partition_for(config, split, stored) if config.mode == "ness" else (None, None)
    result = train(config, graph, split, partition)
    report = evaluate_embedding(result.embedding, split.test_pos, split.test_neg)
    extra = [None, None, None, None]
    if config.mode == "ness" and config.k > 1:
        a = run_analyses(result.encoder, config, graph, split, stored)
        extra = [a["fig3a"]["mean_pairwise_pearson"], a["fig3b"]["consensus_ratio"],
                 a["fig5"]["ensemble_auc"], a["fig4a"]["auc_direct"]]
    return [name, config.label, seed, report.auc, report.ap, result.best_epoch, result.epochs_run, *extra]


def summarize(runs: list[list], names: list[str]) -> list[dict]:
    summary = []
    for name in names:
        rows = [r for r in runs if r[0] == name]
        auc_v = np.array([r[3] for r in rows])
        ap_v = np.array([r[4] for r in rows])
        summary.append({
            "name": name, "label": rows[0][1], "runs": len(rows),
            "auc_mean": float(auc_v.mean()), "auc_std": float(auc_v.std()),
            "ap_mean": float(ap_v.mean()), "ap_std": float(ap_v.std()),
        })
    return summary


def _seed_list(args) -> list[int]:
    if args.seeds:
        try:
            return [int(s) for s in args.seeds.split(",")]
        except ValueError:
            raise UsageError(f"--seeds must be comma-separated integers, got {args.seeds!r}") from None
    if args.num_seeds < 1:
        raise UsageError("--num-seeds must be >= 1")
    return list(range(args.seed, args.seed + args.num_seeds))


def cmd_compare(args) -> int:
    matrix = load_matrix(args.matrix)
    seeds = _seed_list(args)
    graph, identity = _load_data(args)
    ratios = tuple(float(r) for r in args.ratios.split(","))
    fixed = load_split(args.split) if args.split else None
    tasks = [(name, cfg.to_dict(), seed, graph, ratios, fixed) for name, cfg in matrix for seed in seeds]
    threads = args.threads
    started = _now()
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            runs = list(pool.map(compare_run, tasks))
    else:
        runs = []
        for t in tasks:
            runs.append(compare_run(t))
            log.info("%s seed %d: AUC %.4f", runs[-1][1], runs[-1][2], runs[-1][3])
    names = [name for name, _ in matrix]
    summary = summarize(runs, names)
    out = args.out
    _write_csv(out / "runs.csv", RUN_HEADER, runs)
    _write_csv(out / "summary.csv", SUMMARY_HEADER, [[row[h] for h in SUMMARY_HEADER] for row in summary])
    outputs = {"runs": out / "runs.csv", "summary": out / "summary.csv"}
    if not args.no_figures:
        outputs["figure"] = plot_compare(summary, out / "compare.png")
    _write_json(out / "manifest.json", {
        "tool": "nessbench",
        "version": __version__,
        "command": "compare",
        "configs": {name: cfg.to_dict() for name, cfg in matrix},
        "seeds": seeds,
        "dataset": identity,
        "split": {"path": str(args.split), "sha256": sha256_file(args.split)} if args.split else {"ratios": list(ratios)},
        "outputs": {k: {"path": str(p), "sha256": sha256_file(p)} for k, p in outputs.items()},
        "started": started,
        "finished": _now(),
        "host": platform.node(),
    })
    for row in summary:
        print(f"{row['name']:>12s} {row['label']:>8s}  AUC {100 * row['auc_mean']:6.2f} ± {100 * row['auc_std']:.2f}"
              f"  AP {100 * row['ap_mean']:6.2f} ± {100 * row['ap_std']:.2f}  (n={row['runs']})")
    return EXIT_OK


# -- argument parsing ----------------------------------------------------------


def _global_options(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=int, default=default(None), help="master seed (default 0)")
    parser.add_argument("--out", type=Path, default=default(None), help="output directory (default .)")
    parser.add_argument("--threads", type=int, default=default(None),
                        help="worker processes for compare (fallback: NESSBENCH_THREADS, else 1)")
    parser.add_argument("-v", "--verbose", action="store_true", default=default(False))


def _data_options(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("dataset")
    g.add_argument("--data", help="directory holding PREFIX.features/.edges[/.labels]")
    g.add_argument("--prefix", default="graph")
    g.add_argument("--features")
    g.add_argument("--edges")
    g.add_argument("--labels")
    g.add_argument("--row-normalize", action="store_true", help="scale feature rows to unit L1 norm")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nessbench", description="Static-subgraph graph autoencoder experiments.")
    _global_options(parser, suppress=False)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    _global_options(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="generate an SBM dataset")
    p.add_argument("--blocks", default="200,200,200", help="comma-separated block sizes")
    p.add_argument("--intra-p", type=float, default=0.05)
    p.add_argument("--inter-p", type=float, default=0.002)
    p.add_argument("--feature-dim", type=int, default=None)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--prefix", default="graph")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("split", parents=[common], help="random edge split and static partition")
    _data_options(p)
    p.add_argument("--ratios", default="0.85,0.05,0.10", help="train,val,test fractions")
    p.add_argument("--k", type=int, default=2, help="subgraphs in the stored partition (0 = none)")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train", parents=[common], help="train one configuration")
    _data_options(p)
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
    p.add_argument("--split", required=True)
    p.add_argument("--wall-clock", action="store_true", help="record per-epoch wall time (breaks byte-identity)")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_train)

    for name, func, helptext in (("eval", cmd_eval, "evaluate a checkpoint"),
                                 ("analyze", cmd_analyze, "subgraph analyses of a checkpoint")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        _data_options(p)
        p.add_argument("--checkpoint", required=True)
        p.add_argument("--manifest", help="manifest to verify (default: manifest.json next to the checkpoint)")
        p.add_argument("--split", required=True)
        if name == "eval":
            p.add_argument("--on", choices=("test", "val"), default="test")
        else:
            p.add_argument("--analyses", help=f"comma-separated subset of {','.join(ANALYSES)}")
            p.add_argument("--no-figures", action="store_true")
        p.set_defaults(func=func)

    p = sub.add_parser("compare", parents=[common], help="multi-seed sweep over a config matrix")
    _data_options(p)
    p.add_argument("--matrix", required=True, help="INI-style file, one [name] section per config")
    p.add_argument("--seeds", help="explicit comma-separated seeds")
    p.add_argument("--num-seeds", type=int, default=10, help="seeds seed..seed+N-1 when --seeds is absent")
    p.add_argument("--ratios", default="0.85,0.05,0.10")
    p.add_argument("--split", help="fixed split file for every seed (default: a fresh split per seed)")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_compare)
    return parser


def _resolve_globals(args) -> None:
    args.seed_given = args.seed is not None
    if args.seed is None:
        args.seed = 0
    args.out = Path(args.out) if args.out is not None else Path(".")
    if args.threads is None:
        env = os.environ.get("NESSBENCH_THREADS", "")
        try:
            args.threads = int(env) if env else 1
        except ValueError:
            raise UsageError(f"NESSBENCH_THREADS must be an integer, got {env!r}") from None
    if args.threads < 1:
        raise UsageError("--threads must be >= 1")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        _resolve_globals(args)
        args.out.mkdir(parents=True, exist_ok=True)
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"nessbench {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, GraphError, SplitError, CheckpointError, MetricError, OSError) as exc:
        print(f"nessbench {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"nessbench {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
