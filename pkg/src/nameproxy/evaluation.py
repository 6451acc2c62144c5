"""Confusion-matrix metrics, ROC curves, and report emission.

Metrics are one-vs-rest per race.  Records a model declined are excluded
from the confusion counts and show up only through the coverage and
support columns; that separation is what lets partially-covering models
(the Bayes predictors) be compared fairly against always-on models.
A strict mode that scores declines as misses is available for callers
who want a single blended number.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .core import RaceSet
from .errors import LengthMismatchError, SingleClassError
from .sampling import largest_remainder_quotas, representative_sample  # noqa: F401

__all__ = [
    "MetricRow",
    "ClassReport",
    "RocCurve",
    "class_metrics",
    "roc_curve",
    "intersect_covered",
    "emit_report",
    "representative_sample",
    "largest_remainder_quotas",
]


@dataclass(frozen=True)
class MetricRow:
    accuracy: float
    precision: float
    recall: float
    f1: float
    coverage: float
    support: int


@dataclass(frozen=True)
class ClassReport:
    races: RaceSet
    rows: dict[str, MetricRow]

    def __getitem__(self, race: str) -> MetricRow:
        return self.rows[race]


@dataclass(frozen=True)
class RocCurve:
    """One-vs-rest ROC points from (0,0) to (1,1) and the trapezoidal AUC."""

    fpr: np.ndarray
    tpr: np.ndarray
    auc: float


def class_metrics(truths, predictions, races: RaceSet | None = None, strict: bool = False) -> ClassReport:
    """Per-race one-vs-rest metrics.

    ``predictions`` holds a race label per record or ``None`` for a decline.
    Declines are excluded from the confusion counts unless ``strict`` is
    set, in which case they count as a false negative for the true race.
    Support is the covered count among records whose truth is the given
    race; coverage is support over that race's truth count.
    """
    races = races or RaceSet()
    if len(truths) != len(predictions):
        raise LengthMismatchError(
            f"{len(truths)} truths vs {len(predictions)} predictions"
        )
    for t in truths:
        if t not in races:
            raise ValueError(f"unknown truth label {t!r}")
    rows: dict[str, MetricRow] = {}
    scored = [
        (t, p) for t, p in zip(truths, predictions) if strict or p is not None
    ]
    for race in races:
        tp = fp = fn = tn = 0
        for t, p in scored:
            if p == race:
                if t == race:
                    tp += 1
                else:
                    fp += 1
            elif t == race:
                fn += 1
            else:
                tn += 1
        denom = tp + tn + fp + fn
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        accuracy = (tp + tn) / denom if denom else 0.0
        truth_count = sum(1 for t in truths if t == race)
        support = sum(
            1 for t, p in zip(truths, predictions) if t == race and p is not None
        )
        coverage = support / truth_count if truth_count else 0.0
        rows[race] = MetricRow(accuracy, precision, recall, f1, coverage, support)
    return ClassReport(races=races, rows=rows)


def roc_curve(truths, scores, race: str, races: RaceSet | None = None) -> RocCurve:
    """One-vs-rest ROC for ``race`` over per-record probability vectors.

    Sweeps every distinct score of that race's probability; tied scores
    collapse into one step.  AUC is trapezoidal, which matches the
    tie-corrected pairwise (Mann-Whitney) statistic exactly.

    Raises:
        SingleClassError: the one-vs-rest truth set has no positives or
            no negatives.
    """
    races = races or RaceSet()
    if len(truths) != len(scores):
        raise LengthMismatchError(f"{len(truths)} truths vs {len(scores)} score vectors")
    idx = races.index(race)
    y = np.array([t == race for t in truths], dtype=bool)
    s = np.array([np.asarray(vec, dtype=np.float64)[idx] for vec in scores])
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClassError(
            f"ROC for {race!r} needs both positives and negatives "
            f"(got {n_pos} positive, {n_neg} negative)"
        )
    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    y_sorted = y[order]
    # indices where the threshold changes (last element of each tie group)
    distinct = np.nonzero(np.diff(s_sorted))[0]
    boundaries = np.concatenate([distinct, [y.size - 1]])
    tps = np.cumsum(y_sorted)[boundaries]
    fps = np.cumsum(~y_sorted)[boundaries]
    tpr = np.concatenate([[0.0], tps / n_pos])
    fpr = np.concatenate([[0.0], fps / n_neg])
    auc = float(np.trapezoid(tpr, fpr))
    return RocCurve(fpr=fpr, tpr=tpr, auc=auc)


def intersect_covered(prediction_sets) -> list[int]:
    """Indices where every model produced a valid prediction."""
    sets = list(prediction_sets)
    if not sets:
        return []
    length = len(sets[0])
    for preds in sets[1:]:
        if len(preds) != length:
            raise LengthMismatchError("prediction lists differ in length")
    return [
        i for i in range(length) if all(preds[i] is not None for preds in sets)
    ]


def emit_report(
    reports: dict[str, ClassReport],
    rocs: dict[str, dict[str, RocCurve]] | None,
    out_dir,
) -> list[str]:
    """Write per-model metric tables, ROC points, and an F1 comparison.

    Output is deterministic: models sorted by id, races in race-set order,
    values printed with 6 decimal places.  Returns the written paths.
    """
    from pathlib import Path

    out_dir = Path(out_dir)
    rocs = rocs or {}
    written: list[str] = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for model in sorted(reports):
            report = reports[model]
            path = out_dir / f"metrics_{model}.csv"
            with open(path, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(
                    ["race", "accuracy", "precision", "recall", "f1", "coverage", "support"]
                )
                for race in report.races:
                    row = report[race]
                    writer.writerow(
                        [
                            race,
                            f"{row.accuracy:.6f}",
                            f"{row.precision:.6f}",
                            f"{row.recall:.6f}",
                            f"{row.f1:.6f}",
                            f"{row.coverage:.6f}",
                            row.support,
                        ]
                    )
            written.append(str(path))
        roc_models = sorted(set(rocs))
        for model in roc_models:
            path = out_dir / f"roc_{model}.csv"
            with open(path, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(["model", "race", "fpr", "tpr"])
                curves = rocs[model]
                for race in sorted(curves, key=_race_order(reports, model)):
                    curve = curves[race]
                    if curve is None:
                        continue
                    for x, t in zip(curve.fpr, curve.tpr):
                        writer.writerow([model, race, f"{x:.6f}", f"{t:.6f}"])
            written.append(str(path))
        if reports:
            path = out_dir / "f1_comparison.csv"
            with open(path, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(["model", "race", "f1"])
                for model in sorted(reports):
                    report = reports[model]
                    for race in report.races:
                        writer.writerow([model, race, f"{report[race].f1:.6f}"])
            written.append(str(path))
    except OSError as exc:
        raise OSError(f"failed writing report under {out_dir}: {exc}") from exc
    return written


def _race_order(reports, model):
    report = reports.get(model)
    if report is None:
        return lambda race: race
    order = {race: i for i, race in enumerate(report.races)}
    return lambda race: order.get(race, len(order))
