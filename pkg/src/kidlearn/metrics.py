"""Progress metrics over session traces.

Two scalar scores summarize where a learner stands after t exercises.
The reached score credits the highest level presented per exercise
family, weighted by the family factor (M 1, MM 2, R 3, RM 4):

    reached(t) = sum over families f of factor(f) * max level seen

The success score weights each reached level by the success rate over
the last at most four attempts at exactly that (family, level) cell and
keeps the best level per family:

    success(t) = sum over families f of factor(f) * max over levels j of
                 rate(f, j, t) * j

A learner at M level 4, MM level 2 and R level 1 with nothing in RM has
reached 4*1 + 2*2 + 1*3 + 0*4 = 11; the whole space tops out at
6 + 8 + 12 + 16 = 42.
"""

from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from .money import EXERCISE_TYPES, LADDER_TOP, TYPE_FACTOR

RATE_WINDOW = 4

MAX_SCORE = sum(TYPE_FACTOR[t] * LADDER_TOP[t] for t in EXERCISE_TYPES)


class MetricsError(Exception):
    pass


@dataclass
class StepRow:
    t: int
    exercise_type: str
    level: int
    carried: str
    presentation: str
    shape: str
    outcome: int
    choice: int = -1        # display position picked, -1 when no choice
    step_label: str = ""    # ladder label under the predefined sequence


@dataclass
class SessionTrace:
    condition: str
    learner_id: int
    rows: list[StepRow] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)


def score_reached(trace: SessionTrace, t: int) -> float:
    best: dict[str, int] = {}
    for row in trace.rows:
        if row.t > t:
            break
        if row.level > best.get(row.exercise_type, 0):
            best[row.exercise_type] = row.level
    return float(sum(TYPE_FACTOR[f] * lvl for f, lvl in best.items()))


def score_success(trace: SessionTrace, t: int) -> float:
    recent: dict[tuple[str, int], deque] = {}
    for row in trace.rows:
        if row.t > t:
            break
        key = (row.exercise_type, row.level)
        if key not in recent:
            recent[key] = deque(maxlen=RATE_WINDOW)
        recent[key].append(row.outcome)
    total = 0.0
    for f in EXERCISE_TYPES:
        best = 0.0
        for (family, level), window in recent.items():
            if family == f:
                best = max(best, level * sum(window) / len(window))
        total += TYPE_FACTOR[f] * best
    return total


def score_series(trace: SessionTrace) -> tuple[np.ndarray, np.ndarray]:
    """Both scores after every step, computed in one pass."""
    n = len(trace.rows)
    reached = np.zeros(n)
    success = np.zeros(n)
    best: dict[str, int] = {}
    recent: dict[tuple[str, int], deque] = {}
    reached_total = 0.0
    for i, row in enumerate(trace.rows):
        f = row.exercise_type
        if row.level > best.get(f, 0):
            reached_total += TYPE_FACTOR[f] * (row.level - best.get(f, 0))
            best[f] = row.level
        key = (f, row.level)
        if key not in recent:
            recent[key] = deque(maxlen=RATE_WINDOW)
        recent[key].append(row.outcome)
        reached[i] = reached_total
        per_family: dict[str, float] = {}
        for (family, level), window in recent.items():
            v = level * sum(window) / len(window)
            if v > per_family.get(family, 0.0):
                per_family[family] = v
        success[i] = sum(TYPE_FACTOR[fam] * v
                         for fam, v in per_family.items())
    return reached, success


CHRONO_UNTOUCHED = "untouched"
CHRONO_EXPLORED = "explored"
CHRONO_CURRENT = "current"


def chronograph(trace: SessionTrace, t: int) -> dict[str, tuple[str, float]]:
    """Cell states after t steps: untouched, explored, or current.

    Returns cell id ("M3", "RM1", ...) to (state, recent success rate).
    """
    from .money import ladder_cells
    recent: dict[str, deque] = {}
    current = ""
    for row in trace.rows:
        if row.t > t:
            break
        cell = f"{row.exercise_type}{row.level}"
        if cell not in recent:
            recent[cell] = deque(maxlen=RATE_WINDOW)
        recent[cell].append(row.outcome)
        current = cell
    out = {}
    for family, level in ladder_cells():
        cell = f"{family}{level}"
        if cell == current:
            state = CHRONO_CURRENT
        elif cell in recent:
            state = CHRONO_EXPLORED
        else:
            state = CHRONO_UNTOUCHED
        window = recent.get(cell)
        rate = sum(window) / len(window) if window else 0.0
        out[cell] = (state, rate)
    return out


def sem(values) -> float:
    """Standard error of the mean, sample standard deviation over sqrt n."""
    arr = np.asarray(values, dtype=float)
    if arr.size < 2:
        return float("nan")
    return float(arr.std(ddof=1) / math.sqrt(arr.size))


@dataclass(frozen=True)
class WelchResult:
    statistic: float
    pvalue: float
    degenerate: bool = False


def welch_test(a, b) -> WelchResult:
    """Two-sided Welch t-test.

    Two samples without any variance cannot be told apart by a t-test;
    that case comes back flagged with p = 1 when the means agree and
    p = 0 when they differ, instead of a silent nan.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise MetricsError("welch test needs at least two values per side")
    if a.var(ddof=1) == 0.0 and b.var(ddof=1) == 0.0:
        same = a.mean() == b.mean()
        return WelchResult(0.0 if same else math.inf,
                           1.0 if same else 0.0, degenerate=True)
    stat, p = stats.ttest_ind(a, b, equal_var=False)
    return WelchResult(float(stat), float(p))


def cohort_scores(traces: list[SessionTrace]) -> dict[str, np.ndarray]:
    """Stack per-learner score series into (n_learners, n_steps) arrays."""
    if not traces:
        raise MetricsError("no traces to summarize")
    lengths = {len(tr) for tr in traces}
    if len(lengths) != 1:
        raise MetricsError(f"traces disagree on length: {sorted(lengths)}")
    reached = []
    success = []
    for tr in traces:
        r, s = score_series(tr)
        reached.append(r)
        success.append(s)
    return {"reached": np.vstack(reached), "success": np.vstack(success)}


def summary_rows(cohorts: dict[str, dict[str, np.ndarray]]) -> list[dict]:
    """Mean and sem per condition, step and score kind."""
    rows = []
    for condition in cohorts:
        for kind, table in cohorts[condition].items():
            for step in range(table.shape[1]):
                col = table[:, step]
                rows.append({
                    "condition": condition,
                    "score": kind,
                    "t": step + 1,
                    "mean": float(col.mean()),
                    "sem": sem(col),
                })
    return rows


def pvalue_rows(cohorts: dict[str, dict[str, np.ndarray]]) -> list[dict]:
    """Pairwise Welch p per step for every condition pair and score kind."""
    rows = []
    conditions = list(cohorts)
    for i, ca in enumerate(conditions):
        for cb in conditions[i + 1:]:
            for kind in ("reached", "success"):
                ta, tb = cohorts[ca][kind], cohorts[cb][kind]
                for step in range(min(ta.shape[1], tb.shape[1])):
                    res = welch_test(ta[:, step], tb[:, step])
                    rows.append({
                        "condition_a": ca,
                        "condition_b": cb,
                        "score": kind,
                        "t": step + 1,
                        "p": res.pvalue,
                        "degenerate": int(res.degenerate),
                    })
    return rows


_TRACE_FIELDS = ["t", "exercise_type", "level", "carried_numbers",
                 "price_presentation", "money_shape", "outcome", "choice",
                 "step_label"]


def write_trace(trace: SessionTrace, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(_TRACE_FIELDS)
        for r in trace.rows:
            w.writerow([r.t, r.exercise_type, r.level, r.carried,
                        r.presentation, r.shape, r.outcome, r.choice,
                        r.step_label])


def read_trace(path: str | Path, condition: str = "",
               learner_id: int = -1) -> SessionTrace:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != _TRACE_FIELDS:
            raise MetricsError(f"{path} is not a session trace")
        for rec in reader:
            rows.append(StepRow(
                t=int(rec["t"]),
                exercise_type=rec["exercise_type"],
                level=int(rec["level"]),
                carried=rec["carried_numbers"],
                presentation=rec["price_presentation"],
                shape=rec["money_shape"],
                outcome=int(rec["outcome"]),
                choice=int(rec["choice"]),
                step_label=rec["step_label"],
            ))
    return SessionTrace(condition, learner_id, rows)
