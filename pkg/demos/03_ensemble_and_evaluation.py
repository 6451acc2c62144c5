"""Combine partially-covering predictors and evaluate them side by side.

Builds three synthetic "models" with different strengths and coverage,
averages them with the equal-weight ensemble, and produces the metric
tables and ROC point files the evaluation harness emits.
"""

import tempfile
from pathlib import Path

import numpy as np

from nameproxy import RaceSet, argmax_race
from nameproxy.ensemble import EnsembleSpec, ensemble_predict
from nameproxy.evaluation import class_metrics, emit_report, intersect_covered, roc_curve

races = RaceSet()
rng = np.random.default_rng(13)

n = 3000
truths = [races.labels[int(rng.integers(4))] for _ in range(n)]


def noisy_model(quality, coverage):
    """A synthetic predictor: mostly right with prob=quality, else random."""
    preds = []
    for t in truths:
        if rng.random() > coverage:
            preds.append(None)
            continue
        target = races.index(t) if rng.random() < quality else int(rng.integers(4))
        probs = rng.dirichlet(np.ones(4) * 0.5)
        probs[target] += 2.0
        preds.append(probs / probs.sum())
    return preds


models = {
    "wide_but_noisy": noisy_model(quality=0.65, coverage=1.0),
    "sharp_but_narrow": noisy_model(quality=0.9, coverage=0.6),
    "middling": noisy_model(quality=0.75, coverage=0.85),
}

spec = EnsembleSpec(members=tuple(models))
combined = [
    ensemble_predict([models[m][i] for m in spec.members], spec) for i in range(n)
]
models["ensemble"] = combined

print("coverage per model:")
for name, preds in models.items():
    covered = sum(p is not None for p in preds)
    print(f"  {name:18s} {covered / n:.3f}")

print("\nper-race F1 (declines excluded from the confusion counts):")
reports = {}
rocs = {}
for name, preds in models.items():
    labels = [argmax_race(p, races) if p is not None else None for p in preds]
    report = class_metrics(truths, labels)
    reports[name] = report
    covered_truths = [t for t, p in zip(truths, preds) if p is not None]
    covered_probs = [p for p in preds if p is not None]
    rocs[name] = {race: roc_curve(covered_truths, covered_probs, race) for race in races}
    f1s = " ".join(f"{race}={report[race].f1:.3f}" for race in races)
    print(f"  {name:18s} {f1s}")

subset = intersect_covered(list(models.values()))
print(f"\nsubset where every model predicts: {len(subset)} of {n} records")
sub_truths = [truths[i] for i in subset]
for name, preds in models.items():
    labels = [argmax_race(preds[i], races) for i in subset]
    report = class_metrics(sub_truths, labels)
    mean_f1 = np.mean([report[race].f1 for race in races])
    print(f"  {name:18s} mean F1 on shared subset: {mean_f1:.3f}")

with tempfile.TemporaryDirectory() as tmp:
    written = emit_report(reports, rocs, tmp)
    print(f"\nemit_report wrote {len(written)} files:")
    for path in written:
        print(f"  {Path(path).name}")
    sample = Path(written[0]).read_text().splitlines()
    print(f"\nfirst rows of {Path(written[0]).name}:")
    for line in sample[:3]:
        print(f"  {line}")
