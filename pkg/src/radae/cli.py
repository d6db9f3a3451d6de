"""Command-line harness: run / compare / summarize / report.

Output root resolution: --out beats RADAE_OUT beats ./runs. A run directory
always receives the resolved config echo (config.cfg), the episode and
summary CSVs, the net snapshot, and a wall-clock timing sidecar.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from .adaptation import dump_q_table
from .config import Config, parse_config, preset_config
from .errors import ConfigError, ContractError
from .metrics import summarize, table1_aggregate
from .model import save_net
from .navigator import run_experiment
from .perception import write_pgm
from .runio import (
    read_episode_csv,
    write_comparison_csv,
    write_episode_csv,
    write_qtable_csv,
    write_summary_csv,
    write_timings_csv,
)


def _load_config(spec: str) -> Config:
    path = Path(spec)
    if path.is_file():
        return parse_config(path)
    if path.suffix or os.sep in spec:
        raise ConfigError(f"config file not found: {spec}")
    return preset_config(spec)  # bundled preset name, e.g. `desk`


def _out_root(cli_out: str | None) -> Path:
    if cli_out:
        return Path(cli_out)
    return Path(os.environ.get("RADAE_OUT", "runs"))


def _frame_sink(frames_dir: Path, frame_width: int):
    frames_dir.mkdir(parents=True, exist_ok=True)

    def sink(episode, frames):
        for j, frame in enumerate(frames):
            write_pgm(frame, frame_width, frames_dir / f"ep{episode:05d}_f{j:02d}.pgm")
    return sink


def _execute_run(cfg: Config, run_dir: Path, dump_frames: bool,
                 dump_qtable: bool) -> None:
    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / "config.cfg").write_text(cfg.echo(), encoding="utf-8")
    sink = _frame_sink(run_dir / "frames", cfg.frame_width) if dump_frames else None
    log = run_experiment(cfg, frame_sink=sink)
    write_episode_csv(run_dir / "episodes.csv", log.records)
    sums = summarize(log.records, m=cfg.window, skip=cfg.skip)
    write_summary_csv(run_dir / "summary.csv", sums)
    write_timings_csv(run_dir / "timings.csv", log.records)
    save_net(log.net, run_dir / "net.rada")
    if dump_qtable and log.controller is not None:
        write_qtable_csv(run_dir / "qtable.csv", dump_q_table(log.controller))
    agg = table1_aggregate(sums, m=cfg.window)
    collided = sum(1 for r in log.records if r.collided)
    print(f"{run_dir}: {cfg.variant} seed={cfg.seed} episodes={cfg.n} "
          f"collisions={collided} last-windows pct={agg['pct']:.1f}")


def cmd_run(args) -> int:
    cfg = _load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    stem = Path(args.config).stem
    run_dir = Path(args.out) if args.out \
        else _out_root(None) / f"{stem}-{cfg.variant}-s{cfg.seed}"
    _execute_run(cfg, run_dir, args.dump_frames, args.dump_qtable)
    return 0


def cmd_compare(args) -> int:
    seeds = [int(s) for s in args.seeds.split(",") if s.strip() != ""]
    if not seeds:
        raise ConfigError("--seeds must name at least one seed")
    root = _out_root(args.out) / "compare"
    rows = []
    for spec in args.configs:
        base = _load_config(spec)
        stem = Path(spec).stem
        for seed in seeds:
            cfg = replace(base, seed=seed)
            run_dir = root / f"{stem}-{cfg.variant}-s{seed}"
            _execute_run(cfg, run_dir, args.dump_frames, args.dump_qtable)
            records = read_episode_csv(run_dir / "episodes.csv")
            for s in summarize(records, m=cfg.window, skip=cfg.skip):
                rows.append((stem, cfg.variant, seed, s))
    write_comparison_csv(root / "comparison.csv", rows)
    print(f"{root / 'comparison.csv'}: {len(rows)} window rows")
    return 0


def cmd_summarize(args) -> int:
    log_path = Path(args.log)
    records = read_episode_csv(log_path)
    sums = summarize(records, m=args.window, skip=args.skip)
    out = Path(args.out) if args.out else log_path.parent / "summary.csv"
    write_summary_csv(out, sums)
    agg = table1_aggregate(sums, m=args.window)
    print(f"{out}: {len(sums)} windows, last-windows pct={agg['pct']:.1f} "
          f"weighted={agg['w_pct']:.2f}")
    return 0


def cmd_report(args) -> int:
    from . import report
    made = report.render_report(Path(args.run))
    for p in made:
        print(p)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="radae",
        description="Self-supervised navigation with width-adaptive denoising autoencoders.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    run = sub.add_parser("run", help="run one experiment")
    run.add_argument("--config", required=True,
                     help="config file path or bundled preset name (desk, full, ...)")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--out", default=None, help="run directory")
    run.add_argument("--dump-frames", action="store_true")
    run.add_argument("--dump-qtable", action="store_true")
    run.set_defaults(fn=cmd_run)

    cmp_ = sub.add_parser("compare", help="run a config x seed matrix")
    cmp_.add_argument("--configs", nargs="+", required=True)
    cmp_.add_argument("--seeds", required=True, help="comma-separated, e.g. 1,2,3")
    cmp_.add_argument("--out", default=None, help="output root")
    cmp_.add_argument("--dump-frames", action="store_true")
    cmp_.add_argument("--dump-qtable", action="store_true")
    cmp_.set_defaults(fn=cmd_compare)

    summ = sub.add_parser("summarize", help="recompute window summaries from a CSV")
    summ.add_argument("--log", required=True, help="episodes.csv path")
    summ.add_argument("--window", type=int, default=25)
    summ.add_argument("--skip", type=int, default=100)
    summ.add_argument("--out", default=None, help="summary CSV path")
    summ.set_defaults(fn=cmd_summarize)

    rep = sub.add_parser("report", help="render figures for a run directory")
    rep.add_argument("--run", required=True, help="run or compare directory")
    rep.set_defaults(fn=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, ContractError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
