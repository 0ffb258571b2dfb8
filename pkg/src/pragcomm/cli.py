"""Command-line entry points.

Subcommands: gen-data, pretrain, train, eval, rtd, stability, covariance.
Exit codes: 0 success, 1 configuration error, 2 data error, 3 numeric or
training failure.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import evalsuite, rtd as rtd_mod
from .errors import ConfigError, DataError, NumericError, ProtocolError, TrainingError
from .io import (
    MetricsWriter,
    check_exclusive,
    generate_datasets,
    load_config,
    read_games,
    restore_pair,
    save_pair,
    write_games,
    write_matrix_csv,
)
from .trainer import build_pair, evaluation_snapshot, pretrain_pair, train

COVARIANCE_TARGETS = 58   # matches the reported analysis; capped by the dataset
COVARIANCE_GAMES = 100


def _load(args, needs_out=False):
    overrides = {}
    if args.seed is not None:
        overrides["train_seed"] = args.seed
    cfg = load_config(args.config, overrides=overrides)
    out_dir = None
    if getattr(args, "out", None):
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
    elif needs_out:
        raise ConfigError("--out is required for this subcommand")
    return cfg, out_dir


def _dataset(cfg, space, path, count=None):
    games = read_games(path, space, message_cost=cfg.game_message_cost,
                       max_rounds=cfg.game_max_rounds)
    return games if count is None else games[:count]


def cmd_gen_data(args):
    cfg, out_dir = _load(args, needs_out=True)
    space = cfg.to_space()
    bundle = generate_datasets(
        space, cfg.game_candidates,
        cfg.data_train_count, cfg.data_test_count, cfg.data_novel_count,
        cfg.data_instance_holdout, cfg.train_seed,
        message_cost=cfg.game_message_cost, max_rounds=cfg.game_max_rounds)
    write_games(out_dir / "train.jsonl", bundle["train"], seed=cfg.train_seed)
    write_games(out_dir / "test.jsonl", bundle["test"], seed=cfg.train_seed)
    if bundle["novel"]:
        write_games(out_dir / "novel.jsonl", bundle["novel"], seed=cfg.train_seed)
    overlap = check_exclusive(bundle["train"], bundle["test"])
    if overlap:
        raise DataError(f"generated splits share {len(overlap)} candidate sets")
    manifest = {
        "seed": cfg.train_seed,
        "space_kind": cfg.space_kind,
        "train_games": len(bundle["train"]),
        "test_games": len(bundle["test"]),
        "novel_games": len(bundle["novel"]),
        "heldout_instance_ids": bundle["heldout_instance_ids"],
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=2))
    print(f"wrote {len(bundle['train'])} train / {len(bundle['test'])} test / "
          f"{len(bundle['novel'])} novel games to {out_dir}")
    return 0


def cmd_pretrain(args):
    cfg, out_dir = _load(args, needs_out=True)
    space = cfg.to_space()
    tcfg = cfg.to_train_config()
    pair = build_pair(tcfg, space)
    with MetricsWriter(out_dir / "pretrain_metrics.jsonl") as writer:
        reports = pretrain_pair(pair, tcfg, space, metrics=writer.write)
    rng = np.random.default_rng((tcfg.seed, 3))
    ckpt = out_dir / "pretrained.ckpt"
    save_pair(ckpt, cfg.fingerprint(), 0, pair, rng)
    for agent, report in reports.items():
        print(f"{agent}: held-out mean L1 = {report['holdout_l1']:.4f}")
    print(f"checkpoint written to {ckpt}")
    return 0


def cmd_train(args):
    cfg, out_dir = _load(args, needs_out=True)
    space = cfg.to_space()
    tcfg = cfg.to_train_config()
    train_path = args.games or cfg.data_train
    train_games = _dataset(cfg, space, train_path)
    eval_games = _dataset(cfg, space, cfg.data_test, count=tcfg.eval_game_count)

    pair = None
    resume_split = 0
    rng = None
    if args.checkpoint:
        pair = build_pair(tcfg, space)
        resume_split, rng = restore_pair(args.checkpoint, cfg.fingerprint(), pair)
        print(f"resuming from split {resume_split}")

    ckpt_dir = out_dir / "checkpoints"
    ckpt_dir.mkdir(exist_ok=True)

    def checkpoint_fn(split_index, current_pair, current_rng):
        if cfg.checkpoint_cadence and split_index % cfg.checkpoint_cadence == 0:
            path = ckpt_dir / f"split_{split_index:03d}.ckpt"
            save_pair(path, cfg.fingerprint(), split_index, current_pair, current_rng)
            save_pair(ckpt_dir / "latest.ckpt", cfg.fingerprint(),
                      split_index, current_pair, current_rng)

    with MetricsWriter(out_dir / "metrics.jsonl", out_dir / "metrics.csv") as writer:
        pair, _history = train(
            tcfg, space, train_games, eval_games,
            metrics=writer.write, checkpoint_fn=checkpoint_fn,
            pair=pair, resume_split=resume_split, rng=rng)

    final = evaluation_snapshot(pair, eval_games)
    (out_dir / "final_eval.json").write_text(json.dumps(final, sort_keys=True, indent=2))
    print(json.dumps(final, sort_keys=True))
    return 0


def _restore(cfg, args):
    if not args.checkpoint:
        raise ConfigError("--checkpoint is required for this subcommand")
    space = cfg.to_space()
    pair = build_pair(cfg.to_train_config(), space)
    restore_pair(args.checkpoint, cfg.fingerprint(), pair)
    return space, pair


def cmd_eval(args):
    cfg, out_dir = _load(args)
    space, pair = _restore(cfg, args)
    games = _dataset(cfg, space, args.games or cfg.data_test)
    report = evalsuite.evaluate(pair, games, seed=cfg.train_seed, keep_per_game=True)
    payload = report.to_dict()
    print(json.dumps(payload, sort_keys=True))
    if out_dir:
        (out_dir / "eval_report.json").write_text(
            json.dumps(payload, sort_keys=True, indent=2))
        with open(out_dir / "eval_per_game.csv", "w", encoding="utf-8") as fh:
            fh.write("index,level,correct,valid,gain,difficulty,message\n")
            for row in report.per_game:
                fh.write(f"{row['index']},{row['level']},{row['correct']},"
                         f"{row['valid']},{row['gain']!r},{row['difficulty']!r},"
                         f"{row['message']}\n")
    return 0


def cmd_rtd(args):
    if not args.games:
        raise ConfigError("--games must point at a concept-class file")
    cclass = rtd_mod.read_concept_class(args.games)
    hierarchy = rtd_mod.teaching_hierarchy(cclass)
    for j, (concepts, difficulty) in enumerate(hierarchy.levels, start=1):
        shown = ["".join(str(v) for v in c) for c in concepts]
        print(f"level {j}: difficulty {difficulty}, concepts {shown}")
    print(f"RTD = {rtd_mod.rtd(cclass)}")
    return 0


def cmd_stability(args):
    cfg, out_dir = _load(args)
    space, pair = _restore(cfg, args)
    games = _dataset(cfg, space, args.games or cfg.data_test)
    rng = np.random.default_rng((cfg.train_seed, 23))
    mapped, unmapped = evalsuite.stability_eval(pair, games, space, rng)
    payload = {"mapped_accuracy": mapped, "unmapped_accuracy": unmapped,
               "games": len(games), "seed": cfg.train_seed}
    print(json.dumps(payload, sort_keys=True))
    if out_dir:
        (out_dir / "stability.json").write_text(
            json.dumps(payload, sort_keys=True, indent=2))
    return 0


def cmd_covariance(args):
    cfg, out_dir = _load(args, needs_out=True)
    space, pair = _restore(cfg, args)
    games = _dataset(cfg, space, args.games or cfg.data_novel)
    targets = []
    seen = set()
    for game in games:
        inst = game.instances[game.target_index]
        if inst not in seen:
            seen.add(inst)
            targets.append(inst)
        if len(targets) >= COVARIANCE_TARGETS:
            break
    rng = np.random.default_rng((cfg.train_seed, 29))
    cov = evalsuite.covariance_analysis(
        pair, targets, COVARIANCE_GAMES, cfg.game_candidates, space, rng,
        message_cost=cfg.game_message_cost, max_rounds=cfg.game_max_rounds)
    write_matrix_csv(out_dir / "covariance.csv", cov.matrix)
    payload = {"targets": cov.targets, "games_per_target": cov.games_per_target,
               "mean_diagonal": cov.mean_diagonal()}
    print(json.dumps(payload, sort_keys=True))
    (out_dir / "covariance.json").write_text(json.dumps(payload, sort_keys=True, indent=2))
    return 0


COMMANDS = {
    "gen-data": cmd_gen_data,
    "pretrain": cmd_pretrain,
    "train": cmd_train,
    "eval": cmd_eval,
    "rtd": cmd_rtd,
    "stability": cmd_stability,
    "covariance": cmd_covariance,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pragcomm",
        description="Referential-game communication protocols: train and evaluate.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat key=value configuration file")
        p.add_argument("--seed", type=int, default=None, help="override train.seed")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--checkpoint", default=None, help="checkpoint path")
        p.add_argument("--games", default=None, help="dataset or concept-class path")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        if args.command != "rtd" and not args.config:
            raise ConfigError("--config is required")
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except (NumericError, TrainingError, ProtocolError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
