"""Right-censored survival records and the cumulative count matrix built from them.

Columns of a :class:`CumulativeMatrix` are numbered ``1..K`` in time order.
Two virtual columns complete the picture: column ``0`` sits at time 0 with no
events, and column ``K + 1`` sits past the last observation and repeats the
final cumulative counts.  Every operation here accepts the virtual indices.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import InvalidInputError


class EventKind(enum.Enum):
    FAILURE = "failure"
    LOST_TO_FOLLOWUP = "ltf"


@dataclass(frozen=True)
class SubjectRecord:
    time: float
    kind: EventKind

    def __post_init__(self):
        t = float(self.time)
        if not math.isfinite(t) or t <= 0:
            raise InvalidInputError(f"record time must be positive and finite, got {self.time!r}")
        object.__setattr__(self, "time", t)
        if not isinstance(self.kind, EventKind):
            object.__setattr__(self, "kind", EventKind(self.kind))

    @property
    def is_failure(self) -> bool:
        return self.kind is EventKind.FAILURE


@dataclass(frozen=True)
class SurvivalDataset:
    """One arm of a trial: exactly one record per subject."""

    records: tuple[SubjectRecord, ...]

    def __post_init__(self):
        recs = tuple(self.records)
        if not recs:
            raise InvalidInputError("a survival dataset needs at least one record")
        object.__setattr__(self, "records", recs)

    @property
    def m(self) -> int:
        return len(self.records)

    @classmethod
    def from_arrays(cls, times: Iterable[float], events: Iterable[int]) -> "SurvivalDataset":
        """Build from parallel sequences; ``event == 1`` is a failure, 0 a loss to followup."""
        times = list(times)
        events = list(events)
        if len(times) != len(events):
            raise InvalidInputError("times and events differ in length")
        kinds = []
        for e in events:
            if e not in (0, 1):
                raise InvalidInputError(f"event indicator must be 0 or 1, got {e!r}")
            kinds.append(EventKind.FAILURE if e == 1 else EventKind.LOST_TO_FOLLOWUP)
        return cls(tuple(SubjectRecord(t, k) for t, k in zip(times, kinds)))

    @classmethod
    def from_lists(cls, failures: Iterable[float] = (), ltfs: Iterable[float] = ()) -> "SurvivalDataset":
        recs = [SubjectRecord(t, EventKind.FAILURE) for t in failures]
        recs += [SubjectRecord(t, EventKind.LOST_TO_FOLLOWUP) for t in ltfs]
        return cls(tuple(recs))

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(times, events)`` with events coded 1/0."""
        times = np.array([r.time for r in self.records], dtype=float)
        events = np.array([1 if r.is_failure else 0 for r in self.records], dtype=int)
        return times, events


def _frozen(a) -> np.ndarray:
    a = np.asarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class CumulativeMatrix:
    """Distinct observed times with cumulative failure (``c1``) and LTF (``c2``) counts."""

    times: np.ndarray
    c1: np.ndarray
    c2: np.ndarray
    m: int

    @property
    def K(self) -> int:
        return len(self.times)

    @property
    def end_index(self) -> int:
        """Index of the virtual column past the last observation."""
        return len(self.times) + 1

    def _check(self, k: int) -> None:
        if not 0 <= k <= self.end_index:
            raise InvalidInputError(f"column index {k} outside 0..{self.end_index}")

    def time_at(self, k: int) -> float:
        self._check(k)
        if k == 0:
            return 0.0
        if k == self.end_index:
            return math.inf
        return float(self.times[k - 1])

    def failures_through(self, k: int) -> int:
        """``C_{1,k}``, valid for virtual columns too."""
        self._check(k)
        if k == 0:
            return 0
        return int(self.c1[min(k, self.K) - 1])

    def ltfs_through(self, k: int) -> int:
        """``C_{2,k}``, valid for virtual columns too."""
        self._check(k)
        if k == 0:
            return 0
        return int(self.c2[min(k, self.K) - 1])

    def column(self, t: float) -> int:
        """Index of the column observed exactly at time ``t``."""
        i = int(np.searchsorted(self.times, t))
        if i < self.K and self.times[i] == t:
            return i + 1
        raise KeyError(f"no observation at time {t}")

    def has_failure(self, k: int) -> bool:
        """Whether at least one failure was observed in column ``k`` (a real column)."""
        if not 1 <= k <= self.K:
            return False
        return self.failures_through(k) > self.failures_through(k - 1)

    def with_ltfs_capped(self, phi: float) -> "CumulativeMatrix":
        """Copy whose LTF counts are ``floor(phi * C2)`` column by column."""
        if not 0.0 <= phi <= 1.0:
            raise InvalidInputError(f"phi must lie in [0, 1], got {phi}")
        # rounding guard: 0.29 * 100 must floor to 29, not 28
        capped = np.floor(np.round(phi * self.c2.astype(float), 9)).astype(np.int64)
        return CumulativeMatrix(self.times, self.c1, _frozen(capped), self.m)

    def to_dict(self) -> dict:
        return {
            "times": self.times.tolist(),
            "c1": self.c1.tolist(),
            "c2": self.c2.tolist(),
            "m": self.m,
        }


def build_cumulative_matrix(dataset: SurvivalDataset) -> CumulativeMatrix:
    if not isinstance(dataset, SurvivalDataset) or dataset.m == 0:
        raise InvalidInputError("build_cumulative_matrix needs a non-empty SurvivalDataset")
    times, events = dataset.arrays()
    uniq, inverse = np.unique(times, return_inverse=True)
    fail = np.bincount(inverse, weights=events, minlength=len(uniq)).astype(np.int64)
    ltf = np.bincount(inverse, weights=1 - events, minlength=len(uniq)).astype(np.int64)
    return CumulativeMatrix(
        times=_frozen(uniq.astype(float)),
        c1=_frozen(np.cumsum(fail)),
        c2=_frozen(np.cumsum(ltf)),
        m=dataset.m,
    )


def failure_bounds(C: CumulativeMatrix, j: int, k: int) -> tuple[int, int]:
    """Bounds ``(d, e)`` on the number of failures in ``(t_j, t_k]``.

    ``d`` counts observed failures; ``e`` adds every LTF accumulated up to
    ``t_k``, any of whom may have failed inside the window.
    """
    if j > k:
        raise InvalidInputError(f"failure_bounds needs j <= k, got j={j}, k={k}")
    d = C.failures_through(k) - C.failures_through(j)
    return d, d + C.ltfs_through(k)


def bracket_indices(C: CumulativeMatrix, t: float) -> tuple[int, int]:
    """Nearest columns at or below and at or above time ``t``.

    Column 0 (time 0) acts as an observed time, so ``t = 0`` brackets as ``(0, 0)``.
    """
    if not t >= 0:
        raise InvalidInputError(f"bracket time must be non-negative, got {t}")
    if t == 0:
        return 0, 0
    below = int(np.searchsorted(C.times, t, side="right"))  # count of times <= t
    above = int(np.searchsorted(C.times, t, side="left")) + 1
    return below, min(above, C.end_index)


def next_failure_index(C: CumulativeMatrix, t: float) -> int:
    """Smallest column at or after ``t`` holding a failure (virtual end if none).

    Column 0 qualifies when ``t == 0`` because F(0) = 0 is known exactly.
    """
    if t == 0:
        return 0
    k = int(np.searchsorted(C.times, t, side="left")) + 1
    while k <= C.K and not C.has_failure(k):
        k += 1
    return k


def convert_to_ltf(dataset: SurvivalDataset, index: int, time: float | None = None) -> SurvivalDataset:
    """Return a copy with record ``index`` turned into a loss to followup.

    ``time`` defaults to the record's own time; any value must not exceed it.
    """
    rec = dataset.records[index]
    if not rec.is_failure:
        raise InvalidInputError(f"record {index} is not a failure")
    t = rec.time if time is None else float(time)
    if t > rec.time:
        raise InvalidInputError("an LTF conversion may only move a record earlier")
    recs = list(dataset.records)
    recs[index] = SubjectRecord(t, EventKind.LOST_TO_FOLLOWUP)
    return SurvivalDataset(tuple(recs))
