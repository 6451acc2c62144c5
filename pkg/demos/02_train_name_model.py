"""Train the character-level BiLSTM on a synthetic separable task.

The task: the class is a deterministic function of the first letter of
the first name, so a working model should approach perfect validation
accuracy within a few epochs.  Uses desk-scale dimensions; the
production defaults (embedding 256, hidden 512, 4 layers) train the same
way, just slower.
"""

import tempfile
from pathlib import Path

import numpy as np

from nameproxy import RaceSet, PersonRecord
from nameproxy.lstm import (
    TrainConfig,
    load_params,
    predict_proba,
    save_params,
    train,
)

races = RaceSet()
rng = np.random.default_rng(3)

groups = {"asian": "abcdef", "black": "ghijklm", "hispanic": "nopqrs", "white": "tuvwxyz"}
records = []
for _ in range(2000):
    race = races.labels[int(rng.integers(4))]
    letters = groups[race]
    first = letters[int(rng.integers(len(letters)))] + "".join(
        chr(ord("a") + int(c)) for c in rng.integers(0, 26, size=5)
    )
    last = "".join(chr(ord("a") + int(c)) for c in rng.integers(0, 26, size=6))
    records.append(PersonRecord(first, last, "00000", race))
print(f"{len(records)} synthetic records; class = f(first letter)")

cfg = TrainConfig(
    seed=11,
    epochs=5,
    batch_size=128,
    embed_dim=32,
    hidden=64,
    layers=2,
    lr=0.01,
    weight_decay=0.0,
    dropout=0.2,
)
print(f"training: {cfg.layers} BiLSTM layers, hidden {cfg.hidden}, embed {cfg.embed_dim}")
params, log = train(records, cfg)
for row in log:
    print(f"  epoch {row.epoch}: train loss {row.train_loss:.4f}, "
          f"val accuracy {row.val_accuracy:.3f}")

print("\nsample predictions (first letter decides the class):")
for first, last in [("amy", "zzzz"), ("karen", "aaaa"), ("pablo", "qqqq"), ("xena", "mmmm")]:
    probs = predict_proba(params, first, last)
    top = races.labels[int(np.argmax(probs))]
    print(f"  {first:6s} {last}: {np.round(probs, 3).tolist()} -> {top}")

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "params.bin"
    save_params(params, path)
    reloaded = load_params(path)
    same = all(
        np.array_equal(a, b)
        for (_, a), (_, b) in zip(params.named_arrays(), reloaded.named_arrays())
    )
    print(f"\nsaved {path.stat().st_size} bytes; reload bit-identical: {same}")
