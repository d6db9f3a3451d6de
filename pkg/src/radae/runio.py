"""CSV/artifact serialization for runs.

All CSVs are comma-separated, UTF-8, LF-terminated, header row first.
Floats are written with repr (shortest round-trip form), so parsing a CSV
back yields bit-identical values; percentages are fixed to one decimal with
the raw counts kept alongside.
"""
from __future__ import annotations

import csv

from .episode import EpisodeRecord
from .errors import ContractError
from .metrics import WindowSummary

EPISODE_FIELDS = [
    "episode", "action", "collided", "p_chosen",
    "width_l1", "width_l2", "width_l3",
    "adapt_action", "reward", "L_g", "L_c",
    "train_time_s", "predict_time_s", "x", "y", "heading",
]

SUMMARY_FIELDS = [
    "window_end", "l_nw", "l_w", "pct",
    "mean_width_l1", "mean_width_l2", "mean_width_l3",
    "mean_train_time_s", "mean_predict_time_s",
]


def _f(x: float) -> str:
    return repr(float(x))


def _open_writer(path):
    f = open(path, "w", encoding="utf-8", newline="")
    return f, csv.writer(f, lineterminator="\n")


def write_episode_csv(path, records: list[EpisodeRecord]) -> None:
    f, w = _open_writer(path)
    with f:
        w.writerow(EPISODE_FIELDS)
        for r in records:
            x, y, heading = r.pose_after
            w.writerow([
                r.episode, r.action, int(r.collided), _f(r.p_chosen),
                r.width(0), r.width(1), r.width(2),
                r.adapt_action, "" if r.reward is None else _f(r.reward),
                _f(r.l_g), _f(r.l_c),
                _f(r.train_time_s), _f(r.predict_time_s),
                _f(x), _f(y), _f(heading),
            ])


def read_episode_csv(path) -> list[EpisodeRecord]:
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != EPISODE_FIELDS:
            raise ContractError(f"{path}: unexpected episode CSV header")
        records = []
        for row in reader:
            widths = [int(row["width_l1"]), int(row["width_l2"]),
                      int(row["width_l3"])]
            while widths and widths[-1] == 0:  # padding, not real layers
                widths.pop()
            records.append(EpisodeRecord(
                episode=int(row["episode"]),
                action=row["action"],
                collided=bool(int(row["collided"])),
                p_chosen=float(row["p_chosen"]),
                widths=widths,
                adapt_action=row["adapt_action"],
                reward=None if row["reward"] == "" else float(row["reward"]),
                l_g=float(row["L_g"]),
                l_c=float(row["L_c"]),
                train_time_s=float(row["train_time_s"]),
                predict_time_s=float(row["predict_time_s"]),
                pose_before=(0.0, 0.0, 0.0),  # only the end pose is serialized
                pose_after=(float(row["x"]), float(row["y"]),
                            float(row["heading"])),
            ))
    return records


def write_summary_csv(path, summaries: list[WindowSummary]) -> None:
    f, w = _open_writer(path)
    with f:
        w.writerow(SUMMARY_FIELDS)
        for s in summaries:
            w.writerow([
                s.window_end, s.l_nw, _f(s.l_w), f"{s.pct:.1f}",
                _f(s.mean_width_l1), _f(s.mean_width_l2), _f(s.mean_width_l3),
                _f(s.mean_train_time_s), _f(s.mean_predict_time_s),
            ])


def write_timings_csv(path, records: list[EpisodeRecord]) -> None:
    """Measured wall-clock sidecar; excluded from the determinism contract."""
    f, w = _open_writer(path)
    with f:
        w.writerow(["episode", "wall_train_time_s", "wall_predict_time_s"])
        for r in records:
            w.writerow([r.episode, _f(r.wall_train_time_s),
                        _f(r.wall_predict_time_s)])


def write_qtable_csv(path, rows) -> None:
    """Rows from adaptation.dump_q_table."""
    f, w = _open_writer(path)
    with f:
        w.writerow(["state_bin_g", "state_bin_c", "state_bin_nu", "action", "q_value"])
        for g, c, nu, action, q in rows:
            w.writerow([g, c, nu, action, _f(q)])


def write_comparison_csv(path, rows) -> None:
    """Merged per-window rows across variants and seeds."""
    f, w = _open_writer(path)
    with f:
        w.writerow(["config", "variant", "seed"] + SUMMARY_FIELDS)
        for label, variant, seed, s in rows:
            w.writerow([
                label, variant, seed,
                s.window_end, s.l_nw, _f(s.l_w), f"{s.pct:.1f}",
                _f(s.mean_width_l1), _f(s.mean_width_l2), _f(s.mean_width_l3),
                _f(s.mean_train_time_s), _f(s.mean_predict_time_s),
            ])
