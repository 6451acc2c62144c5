"""Core domain types shared by every predictor and the evaluation harness.

Probability vectors are plain float64 numpy arrays ordered like the active
:class:`RaceSet`.  A model that cannot score a record returns ``None``
instead of a vector; that absence is what the coverage metric counts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ZeroMassError

#: Canonical four-category race set, in fixed index order.
DEFAULT_RACES = ("asian", "black", "hispanic", "white")

PROB_SUM_TOL = 1e-9

_EPS = float(np.finfo(np.float64).eps)


@dataclass(frozen=True)
class RaceSet:
    """Ordered, immutable list of race category labels.

    Index ``i`` refers to the same category for the lifetime of a run;
    every probability vector in the system is ordered this way.
    """

    labels: tuple[str, ...] = DEFAULT_RACES

    def __post_init__(self):
        labels = tuple(self.labels)
        if not labels:
            raise ValueError("race set must be non-empty")
        if len(set(labels)) != len(labels):
            raise ValueError(f"race labels must be unique, got {labels!r}")
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def __contains__(self, label: str) -> bool:
        return label in self.labels


@dataclass(frozen=True)
class PersonRecord:
    """One person: first name, last name, geography id, optional true race."""

    first: str
    last: str
    geo: str = ""
    race: str | None = None


@dataclass(frozen=True)
class Prediction:
    """A model's output for one record; ``probs is None`` means it declined."""

    model_id: str
    probs: np.ndarray | None = None
    reason: str | None = field(default=None, compare=False)

    @property
    def covered(self) -> bool:
        return self.probs is not None


def renormalize(raw) -> np.ndarray:
    """Scale a vector of non-negative reals so it sums to 1.

    Exactly idempotent: an input whose sum already sits within the
    floating-point error band of 1.0 is returned unchanged, and a single
    division always lands inside that band.

    Raises:
        ZeroMassError: all entries are zero.
        ValueError: any entry is negative or non-finite.
    """
    x = np.asarray(raw, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-d vector, got shape {x.shape}")
    if not np.isfinite(x).all():
        raise ValueError("probability mass must be finite")
    if (x < 0).any():
        raise ValueError("probability mass must be non-negative")
    s = float(x.sum())
    if s == 0.0:
        raise ZeroMassError("cannot normalize a vector of zeros")
    if abs(s - 1.0) <= 64.0 * x.size * _EPS:
        return x.copy()
    return x / s


def is_prob_vector(p, n_races: int | None = None) -> bool:
    """True when ``p`` is a valid probability vector (non-negative, sums to 1)."""
    v = np.asarray(p, dtype=np.float64)
    if v.ndim != 1 or (n_races is not None and v.size != n_races):
        return False
    return bool(
        np.isfinite(v).all() and (v >= 0).all() and abs(v.sum() - 1.0) <= PROB_SUM_TOL
    )


def argmax_race(p, races: RaceSet) -> str:
    """Decision rule: the label with the highest probability.

    Ties break toward the lowest index, so the result is deterministic.
    """
    v = np.asarray(p, dtype=np.float64)
    if v.size != len(races):
        raise ValueError(f"vector has {v.size} entries for {len(races)} races")
    return races.labels[int(np.argmax(v))]
