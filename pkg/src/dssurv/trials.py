"""Trial CSV ingestion and synthetic trial generation.

CSV schema: a header with ``time`` and ``event`` columns and an optional
``arm`` column.  ``event`` is 1 for a failure and 0 for a censored subject.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, TextIO, Union

import numpy as np

from .data import SurvivalDataset
from .errors import ConfigError, ParseError
from .montecarlo import stream_rng

REQUIRED_COLUMNS = ("time", "event")


@dataclass(frozen=True)
class TrialTable:
    times: tuple[float, ...]
    events: tuple[int, ...]
    arms: Optional[tuple[str, ...]] = None

    def __len__(self) -> int:
        return len(self.times)

    @property
    def arm_labels(self) -> list[str]:
        if self.arms is None:
            return []
        return sorted(set(self.arms))

    def dataset(self, arm: Optional[str] = None) -> SurvivalDataset:
        """Records of one arm, or of the whole table when ``arm`` is None."""
        if arm is None:
            return SurvivalDataset.from_arrays(self.times, self.events)
        if self.arms is None:
            raise ConfigError(f"arm {arm!r} requested but the table has no arm column")
        if arm not in self.arms:
            raise ConfigError(f"arm {arm!r} not found; labels are {self.arm_labels}")
        keep = [i for i, a in enumerate(self.arms) if a == arm]
        return SurvivalDataset.from_arrays([self.times[i] for i in keep], [self.events[i] for i in keep])


def _parse_rows(reader, source: str) -> TrialTable:
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError(f"{source} is empty", line=1) from None
    names = [h.strip().lower() for h in header]
    for col in REQUIRED_COLUMNS:
        if col not in names:
            raise ParseError(f"missing required column {col!r}", line=1, column=col)
    i_time, i_event = names.index("time"), names.index("event")
    i_arm = names.index("arm") if "arm" in names else None

    times, events, arms = [], [], []
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) < len(names):
            raise ParseError(f"expected {len(names)} fields, found {len(row)}", line=line)
        raw = row[i_time].strip()
        try:
            t = float(raw)
        except ValueError:
            raise ParseError(f"non-numeric time {raw!r}", line=line, column="time") from None
        if not math.isfinite(t) or t <= 0:
            raise ParseError(f"time must be positive and finite, got {raw!r}", line=line, column="time")
        raw = row[i_event].strip()
        if raw not in ("0", "1"):
            raise ParseError(f"event must be 0 or 1, got {raw!r}", line=line, column="event")
        times.append(t)
        events.append(int(raw))
        if i_arm is not None:
            label = row[i_arm].strip()
            if not label:
                raise ParseError("empty arm label", line=line, column="arm")
            arms.append(label)
            if len(set(arms)) > 2:
                raise ParseError(f"more than two arm labels ({sorted(set(arms))})", line=line, column="arm")
    if not times:
        raise ParseError(f"{source} has no data rows")
    return TrialTable(tuple(times), tuple(events), tuple(arms) if i_arm is not None else None)


def parse_trial_csv(path: Union[str, Path]) -> TrialTable:
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            return _parse_rows(csv.reader(fh), str(path))
    except FileNotFoundError:
        raise ParseError(f"no such file: {path}") from None


def parse_trial_text(text: str) -> TrialTable:
    return _parse_rows(csv.reader(io.StringIO(text)), "<text>")


def write_trial_csv(table: TrialTable, out: TextIO) -> None:
    w = csv.writer(out, lineterminator="\n")
    if table.arms is None:
        w.writerow(["time", "event"])
        for t, e in zip(table.times, table.events):
            w.writerow([repr(t), e])
    else:
        w.writerow(["time", "event", "arm"])
        for t, e, a in zip(table.times, table.events, table.arms):
            w.writerow([repr(t), e, a])


def _piecewise_failure_times(u_exp: np.ndarray, rates: Sequence[float], breaks: Sequence[float]) -> np.ndarray:
    """Invert the cumulative hazard of a piecewise-constant rate at unit-exponential levels."""
    edges = np.concatenate(([0.0], np.asarray(breaks, dtype=float)))
    rates = np.asarray(rates, dtype=float)
    cum = np.concatenate(([0.0], np.cumsum(rates[:-1] * np.diff(edges))))
    piece = np.searchsorted(cum, u_exp, side="right") - 1
    with np.errstate(divide="ignore"):
        t = edges[piece] + (u_exp - cum[piece]) / rates[piece]
    return t


def simulate_arm(
    m: int,
    rates: Sequence[float],
    breaks: Sequence[float] = (),
    censor_rate: float = 0.0,
    followup: Optional[float] = None,
    rng: Optional[np.random.Generator] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Failure times under a piecewise-constant hazard with independent exponential censoring.

    ``followup`` adds administrative censoring at the end of the trial.
    """
    rates = [float(r) for r in rates]
    breaks = [float(b) for b in breaks]
    if m < 1:
        raise ConfigError(f"m must be at least 1, got {m}")
    if not rates or any(not math.isfinite(r) or r < 0 for r in rates):
        raise ConfigError(f"hazard rates must be finite and non-negative, got {rates}")
    if len(breaks) != len(rates) - 1:
        raise ConfigError(f"{len(rates)} hazard pieces need {len(rates) - 1} breaks, got {len(breaks)}")
    if any(b <= 0 for b in breaks) or any(y <= x for x, y in zip(breaks, breaks[1:])):
        raise ConfigError("hazard breaks must be positive and strictly increasing")
    if not math.isfinite(censor_rate) or censor_rate < 0:
        raise ConfigError(f"censoring rate must be finite and non-negative, got {censor_rate}")
    if followup is not None and not (math.isfinite(followup) and followup > 0):
        raise ConfigError(f"followup must be positive, got {followup}")
    if rates[-1] == 0 and followup is None and censor_rate == 0:
        raise ConfigError("a zero final hazard needs censoring or a followup time")
    if rng is None:
        rng = np.random.default_rng()

    fail = _piecewise_failure_times(rng.standard_exponential(m), rates, breaks)
    cens = rng.standard_exponential(m) / censor_rate if censor_rate > 0 else np.full(m, np.inf)
    if followup is not None:
        cens = np.minimum(cens, followup)
    times = np.minimum(fail, cens)
    events = (fail <= cens).astype(int)
    return times, events


def simulate_trial(
    m: int,
    rates: Sequence[float],
    breaks: Sequence[float] = (),
    censor_rate: float = 0.0,
    followup: Optional[float] = None,
    seed: int = 0,
    arms: Optional[Sequence[str]] = None,
    hazard_ratio: float = 1.0,
) -> TrialTable:
    """One-arm table, or two arms of ``m`` each when ``arms`` names them.

    With two arms the first receives the hazard scaled by ``hazard_ratio``
    (the vaccine arm by convention); each arm draws from its own stream.
    """
    if arms is None:
        t, e = simulate_arm(m, rates, breaks, censor_rate, followup, stream_rng(seed, 0))
        return TrialTable(tuple(t.tolist()), tuple(e.tolist()))
    if len(arms) != 2 or arms[0] == arms[1]:
        raise ConfigError(f"need two distinct arm labels, got {list(arms)}")
    if not math.isfinite(hazard_ratio) or hazard_ratio < 0:
        raise ConfigError(f"hazard ratio must be non-negative, got {hazard_ratio}")
    times, events, labels = [], [], []
    for k, (label, scale) in enumerate(zip(arms, (hazard_ratio, 1.0))):
        t, e = simulate_arm(m, [r * scale for r in rates], breaks, censor_rate, followup, stream_rng(seed, k))
        times += t.tolist()
        events += e.tolist()
        labels += [label] * m
    return TrialTable(tuple(times), tuple(events), tuple(labels))
