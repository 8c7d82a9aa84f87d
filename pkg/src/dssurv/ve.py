"""Two-arm evidence about vaccine efficacy, ``VE = 1 - r_v / r_p``.

Each arm's window failure fraction gets a focal interval per auxiliary draw
(arms are drawn independently).  Interval arithmetic on the ratio turns the
pair into a VE interval on the extended real line, which is then scored
against a one-sided threshold assertion.  The LTF sensitivity cap ``phi``
limits how many accumulated losses to followup may count as failures.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .data import CumulativeMatrix
from .errors import InvalidInputError
from .inference import EvidenceTriple, IntervalCounts, interval_counts
from .montecarlo import chunk_size_for, reduce_chunks, stream_rng
from .spacings import SpacingDraw, sample_spacings_batch


class Direction(enum.Enum):
    GREATER = "gt"
    LESS = "lt"


@dataclass(frozen=True)
class VEAssertion:
    """``VE > theta`` or ``VE < theta`` over the window ``(t_l, t_u]``."""

    t_l: float
    t_u: float
    theta: float
    direction: Direction = Direction.GREATER

    def __post_init__(self):
        if not (0 <= self.t_l < self.t_u) or not math.isfinite(self.t_u):
            raise InvalidInputError(f"need 0 <= t_l < t_u < inf, got ({self.t_l}, {self.t_u})")
        if not self.theta < 1 or math.isnan(self.theta):
            raise InvalidInputError(f"VE threshold must be below 1, got {self.theta}")
        if not isinstance(self.direction, Direction):
            object.__setattr__(self, "direction", Direction(self.direction))

    def to_dict(self) -> dict:
        return {"t_l": self.t_l, "t_u": self.t_u, "theta": self.theta, "direction": self.direction.value}


def _check_phi(phi: float) -> float:
    phi = float(phi)
    if not 0.0 <= phi <= 1.0:
        raise InvalidInputError(f"phi must lie in [0, 1], got {phi}")
    return phi


def capped_interval_counts(C: CumulativeMatrix, t_l: float, t_u: float, phi: float = 1.0) -> IntervalCounts:
    """Interval counts with every ``e`` bound shrunk to ``d + floor(phi * C2)``."""
    return interval_counts(C.with_ltfs_capped(_check_phi(phi)), t_l, t_u)


def rate_bounds_for_draw(counts: IntervalCounts, draw: SpacingDraw) -> tuple[float, float]:
    """Failure-fraction focal interval for one draw: sums of the first ``v_n_l`` and ``v_x_u`` gaps."""
    if draw.m != counts.m:
        raise InvalidInputError(f"draw has m={draw.m} but counts have m={counts.m}")
    lo, hi = rate_bounds_batch(counts, draw.gaps[None, :])
    return float(lo[0]), float(hi[0])


def rate_bounds_batch(counts: IntervalCounts, gaps: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if gaps.shape[1] != counts.m + 1:
        raise InvalidInputError(f"gaps have {gaps.shape[1]} cells, expected {counts.m + 1}")
    y = _running_sums(gaps)
    return y[:, counts.v_n_l], y[:, counts.v_x_u]


def _running_sums(gaps: np.ndarray) -> np.ndarray:
    y = np.zeros((gaps.shape[0], gaps.shape[1] + 1))
    np.cumsum(gaps, axis=1, out=y[:, 1:])
    return y


def ve_interval(lv, uv, lp, up) -> tuple[np.ndarray, np.ndarray]:
    """VE bounds ``[1 - uv/lp, 1 - lv/up]`` with the division guards.

    ``x / 0`` is ``+inf`` for any ``x`` in the upper ratio (``0 / 0``
    included, since the placebo rate might be zero), and ``0 / y`` is 0 in
    the lower ratio whatever ``y``.
    """
    lv, uv, lp, up = (np.asarray(a, dtype=float) for a in (lv, uv, lp, up))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio_hi = np.where(lp > 0, uv / np.where(lp > 0, lp, 1.0), np.inf)
        ratio_lo = np.where(lv > 0, np.where(up > 0, lv / np.where(up > 0, up, 1.0), np.inf), 0.0)
    return 1.0 - ratio_hi, 1.0 - ratio_lo


def classify(ve_lo: np.ndarray, ve_hi: np.ndarray, assertion: VEAssertion) -> tuple[np.ndarray, np.ndarray]:
    """Boolean masks ``(supports, refutes)`` for VE focal intervals."""
    theta = assertion.theta
    if assertion.direction is Direction.GREATER:
        return ve_lo > theta, ve_hi <= theta
    return ve_hi < theta, ve_lo >= theta


@dataclass(frozen=True)
class SensitivityReport:
    assertion: VEAssertion
    rows: tuple[tuple[float, EvidenceTriple], ...]

    @property
    def phis(self) -> list[float]:
        return [phi for phi, _ in self.rows]

    def to_rows(self) -> list[dict]:
        return [{"phi": phi, **ev.to_dict()} for phi, ev in self.rows]


def sensitivity_sweep(
    arm_v: CumulativeMatrix,
    arm_p: CumulativeMatrix,
    assertion: VEAssertion,
    phis: Iterable[float],
    n_draws: int = 100_000,
    seed: int = 0,
    workers: int = 1,
) -> SensitivityReport:
    """Evidence for one assertion under several LTF caps, all scored on the same draws."""
    phis = sorted({_check_phi(p) for p in phis})
    if not phis:
        raise InvalidInputError("sensitivity sweep needs at least one phi")
    t_l, t_u = assertion.t_l, assertion.t_u
    cv = [capped_interval_counts(arm_v, t_l, t_u, phi) for phi in phis]
    cp = [capped_interval_counts(arm_p, t_l, t_u, phi) for phi in phis]
    chunk = chunk_size_for(max(arm_v.m, arm_p.m))

    def task(i: int, n: int) -> np.ndarray:
        yv = _running_sums(sample_spacings_batch(arm_v.m, n, stream_rng(seed, i, 0)))
        yp = _running_sums(sample_spacings_batch(arm_p.m, n, stream_rng(seed, i, 1)))
        out = np.zeros((len(phis), 2), dtype=np.int64)
        for j, (kv, kp) in enumerate(zip(cv, cp)):
            lo, hi = ve_interval(yv[:, kv.v_n_l], yv[:, kv.v_x_u], yp[:, kp.v_n_l], yp[:, kp.v_x_u])
            supports, refutes = classify(lo, hi, assertion)
            out[j] = supports.sum(), refutes.sum()
        return out

    totals = reduce_chunks(n_draws, chunk, task, workers)
    rows = tuple(
        (phi, EvidenceTriple.from_counts(int(f), int(a), n_draws)) for phi, (f, a) in zip(phis, totals)
    )
    return SensitivityReport(assertion, rows)


def ve_evidence(
    arm_v: CumulativeMatrix,
    arm_p: CumulativeMatrix,
    assertion: VEAssertion,
    phi: float = 1.0,
    n_draws: int = 100_000,
    seed: int = 0,
    workers: int = 1,
) -> EvidenceTriple:
    report = sensitivity_sweep(arm_v, arm_p, assertion, [phi], n_draws, seed, workers)
    return report.rows[0][1]
