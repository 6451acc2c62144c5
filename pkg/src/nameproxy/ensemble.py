"""Equal-weight averaging over whichever member models made a prediction."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import renormalize

#: Default member ids: the geography-augmented name model plus the two
#: Bayes predictors built on merged (internal + external) tables.
DEFAULT_MEMBERS = ("first_last_zcta", "ibisg", "ibifsg")


@dataclass(frozen=True)
class EnsembleSpec:
    """Ordered member model ids and their positive weights."""

    members: tuple[str, ...] = DEFAULT_MEMBERS
    weights: tuple[float, ...] = field(default=None)

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise ValueError("ensemble needs at least one member")
        weights = self.weights
        if weights is None:
            weights = (1.0,) * len(members)
        weights = tuple(float(w) for w in weights)
        if len(weights) != len(members):
            raise ValueError("weights must align with members")
        if any(w <= 0 for w in weights):
            raise ValueError("weights must be positive")
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "weights", weights)


def ensemble_predict(predictions, spec: EnsembleSpec) -> np.ndarray | None:
    """Weighted mean of the present member predictions, renormalized.

    ``predictions`` aligns with ``spec.members``; ``None`` entries are
    members that declined.  Weights are renormalized over the present
    members for each call, so every member that can predict carries its
    full relative weight.  Returns ``None`` only when every member
    declined.
    """
    if len(predictions) != len(spec.members):
        raise ValueError(
            f"got {len(predictions)} predictions for {len(spec.members)} members"
        )
    present = [
        (np.asarray(p, dtype=np.float64), w)
        for p, w in zip(predictions, spec.weights)
        if p is not None
    ]
    if not present:
        return None
    first = present[0][0]
    if all(np.array_equal(vec, first) for vec, _ in present):
        # unanimous members pass through exactly, no averaging drift
        return first.copy()
    acc = np.zeros_like(first)
    total = 0.0
    for vec, weight in present:
        acc += weight * vec
        total += weight
    return renormalize(acc / total)
