"""Sliding-window collision metrics over episode records.

A window [i-M, i-1] counts collisions (l_nw), sums the probabilities the
model had assigned to the colliding actions (l_w), and averages widths and
per-episode times. Windows tile the run back-to-back after an initial skip.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import ContractError


@dataclass
class WindowSummary:
    window_end: int
    l_nw: int
    l_w: float
    pct: float
    mean_width_l1: float
    mean_width_l2: float
    mean_width_l3: float
    mean_train_time_s: float
    mean_predict_time_s: float


def _check_window(records, i, m):
    if m < 1:
        raise ContractError(f"window size must be >= 1, got {m}")
    if i < m or i > len(records):
        raise ContractError(f"window [{i - m}, {i}) out of range for {len(records)} records")


def l_nw(records, i: int, m: int) -> int:
    """Collision count over episodes [i-m, i-1]."""
    _check_window(records, i, m)
    return sum(1 for r in records[i - m:i] if r.collided)


def l_w(records, i: int, m: int) -> float:
    """Sum of p_chosen over collided episodes in [i-m, i-1].

    Episode 0 is skipped: its action was forced, its recorded probability is
    a placeholder.
    """
    _check_window(records, i, m)
    return float(sum(r.p_chosen for r in records[i - m:i]
                     if r.collided and r.episode != 0))


def summarize(records, m: int = 25, skip: int = 0) -> list[WindowSummary]:
    """Non-overlapping windows ending at skip+m, skip+2m, ...; [] when too short."""
    if m < 1:
        raise ContractError(f"window size must be >= 1, got {m}")
    if skip < 0:
        raise ContractError(f"skip must be >= 0, got {skip}")
    out = []
    end = skip + m
    while end <= len(records):
        win = records[end - m:end]
        out.append(WindowSummary(
            window_end=end,
            l_nw=l_nw(records, end, m),
            l_w=l_w(records, end, m),
            pct=l_nw(records, end, m) * (100.0 / m),
            mean_width_l1=sum(r.width(0) for r in win) / m,
            mean_width_l2=sum(r.width(1) for r in win) / m,
            mean_width_l3=sum(r.width(2) for r in win) / m,
            mean_train_time_s=sum(r.train_time_s for r in win) / m,
            mean_predict_time_s=sum(r.predict_time_s for r in win) / m,
        ))
        end += m
    return out


def table1_aggregate(summaries: list[WindowSummary], m: int, span: int = 250) -> dict:
    """Mean unweighted/weighted percentages over the windows of the last `span` episodes."""
    if not summaries:
        return {"windows": 0, "pct": float("nan"), "w_pct": float("nan")}
    k = min(len(summaries), max(1, span // m))
    tail = summaries[-k:]
    return {
        "windows": k,
        "pct": sum(s.pct for s in tail) / k,
        "w_pct": sum(s.l_w * (100.0 / m) for s in tail) / k,
    }
