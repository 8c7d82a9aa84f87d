"""One-sample Dempster-Shafer evidence about the failure fraction in a time window.

For a window ``(t_l, t_u]`` the population fraction failing, ``F(t_u) - F(t_l)``,
is bracketed by two sums of uniform spacings: an internal block (between the
observed times just inside the window) and an external block (between the
observed times just outside it).  Losses to followup widen both blocks from
counts ``d`` to ``e``.  Each auxiliary draw therefore yields a focal interval
``[W_internal_min, W_external_max]`` and an assertion ``q_l <= fraction <= q_u``
is scored as supported, contradicted or undecided by that interval.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from .betafn import beta_cdf_below, beta_quantile, beta_sf
from .data import (
    CumulativeMatrix,
    bracket_indices,
    failure_bounds,
    next_failure_index,
)
from .errors import InvalidInputError
from .montecarlo import chunk_size_for, reduce_chunks, stream_rng
from .spacings import joint_rect_prob, order_statistics_batch


@dataclass(frozen=True)
class MassAssertion:
    """``q_l <= F(t_u) - F(t_l) <= q_u``."""

    t_l: float
    t_u: float
    q_l: float = 0.0
    q_u: float = 1.0

    def __post_init__(self):
        if not (0 <= self.t_l < self.t_u) or not math.isfinite(self.t_u):
            raise InvalidInputError(f"need 0 <= t_l < t_u < inf, got ({self.t_l}, {self.t_u})")
        _check_quantiles(self.q_l, self.q_u)


def _check_quantiles(q_l: float, q_u: float) -> None:
    if not (0.0 <= q_l <= q_u <= 1.0):
        raise InvalidInputError(f"need 0 <= q_l <= q_u <= 1, got ({q_l}, {q_u})")


@dataclass(frozen=True)
class IntervalCounts:
    """Minimum/maximum internal (``n``) and external (``x``) failure counts."""

    v_n_l: int
    v_n_u: int
    v_x_l: int
    v_x_u: int
    m: int

    def __post_init__(self):
        ok = (
            0 <= self.v_n_l <= self.v_n_u <= self.v_x_u <= self.m
            and self.v_n_l <= self.v_x_l <= self.v_x_u
        )
        if not ok:
            raise InvalidInputError(f"inconsistent interval counts {self}")

    def as_tuple(self) -> tuple[int, int, int, int]:
        return self.v_n_l, self.v_n_u, self.v_x_l, self.v_x_u

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class EvidenceTriple:
    """Evidence for (``p``), against (``q``) and undecided (``r``).

    Monte Carlo triples carry per-component binomial standard errors and
    ``mc_se``, the largest of them.
    """

    p: float
    q: float
    r: float
    mc_se: Optional[float] = None
    se: Optional[tuple[float, float, float]] = None
    n_draws: Optional[int] = None

    def __post_init__(self):
        for name in ("p", "q", "r"):
            v = getattr(self, name)
            if not -1e-12 <= v <= 1.0 + 1e-12:
                raise InvalidInputError(f"evidence component {name}={v} outside [0, 1]")

    @classmethod
    def from_counts(cls, n_for: int, n_against: int, n: int) -> "EvidenceTriple":
        p, q = n_for / n, n_against / n
        r = (n - n_for - n_against) / n
        se = tuple(math.sqrt(f * (1.0 - f) / n) for f in (p, q, r))
        return cls(p, q, r, mc_se=max(se), se=se, n_draws=n)

    def as_tuple(self) -> tuple[float, float, float]:
        return self.p, self.q, self.r

    def to_dict(self) -> dict:
        d = {"p": self.p, "q": self.q, "r": self.r, "mc_se": self.mc_se}
        if self.se is not None:
            d["se"] = {"p": self.se[0], "q": self.se[1], "r": self.se[2]}
            d["n_draws"] = self.n_draws
        return d


@dataclass(frozen=True)
class WindowAnchors:
    """Column indices bracketing a window, as used by :func:`interval_counts`."""

    lower_below: int
    lower_above: int
    upper_below: int
    upper_above: int


def window_anchors(C: CumulativeMatrix, t_l: float, t_u: float) -> WindowAnchors:
    if not (0 <= t_l < t_u):
        raise InvalidInputError(f"need 0 <= t_l < t_u, got ({t_l}, {t_u})")
    kl_b, _ = bracket_indices(C, t_l)
    ku_b, ku_a = bracket_indices(C, t_u)
    # inner edge must be a failure column: F at an LTF-only time is not an order statistic
    kl_a = next_failure_index(C, t_l)
    return WindowAnchors(kl_b, kl_a, ku_b, ku_a)


def interval_counts(C: CumulativeMatrix, t_l: float, t_u: float) -> IntervalCounts:
    a = window_anchors(C, t_l, t_u)
    if a.lower_above > a.upper_below:
        v_n_l, v_n_u = 0, C.ltfs_through(a.upper_below)
    else:
        v_n_l, v_n_u = failure_bounds(C, a.lower_above, a.upper_below)
    v_x_l, v_x_u = failure_bounds(C, a.lower_below, a.upper_above)
    return IntervalCounts(v_n_l, v_n_u, v_x_l, v_x_u, C.m)


def evidence_exact(counts: IntervalCounts, q_l: float, q_u: float) -> EvidenceTriple:
    """Closed-form (plus one quadrature) evidence for ``q_l <= fraction <= q_u``."""
    _check_quantiles(q_l, q_u)
    m = counts.m
    inner, outer = counts.v_n_l, counts.v_x_u
    q = beta_cdf_below(q_l, outer, m + 1 - outer) + beta_sf(q_u, inner, m + 1 - inner)
    p = joint_rect_prob(inner, outer, m, q_l, q_u)
    r = max(0.0, 1.0 - p - q)
    return EvidenceTriple(p, q, r)


def evidence_mc(
    C: CumulativeMatrix,
    assertion: MassAssertion,
    n_draws: int,
    seed: int,
    workers: int = 1,
) -> EvidenceTriple:
    """Brute-force evidence: classify the focal interval of each spacing draw.

    The blocks sit at their natural order-statistic positions: the external
    block starts at ``Y[C1(lower_below)]`` and the internal one at
    ``Y[C1(lower_above)]``.
    """
    counts = interval_counts(C, assertion.t_l, assertion.t_u)
    anchors = window_anchors(C, assertion.t_l, assertion.t_u)
    m = C.m
    out_lo = C.failures_through(anchors.lower_below)
    out_hi = out_lo + counts.v_x_u
    in_lo = C.failures_through(anchors.lower_above) if counts.v_n_l else 0
    in_hi = in_lo + counts.v_n_l
    q_l, q_u = assertion.q_l, assertion.q_u

    def task(i: int, n: int) -> np.ndarray:
        y = order_statistics_batch(m, n, stream_rng(seed, i))
        inner = y[:, in_hi] - y[:, in_lo]
        outer = y[:, out_hi] - y[:, out_lo]
        supports = (inner >= q_l) & (outer <= q_u)
        refutes = (outer < q_l) | (inner > q_u)
        return np.array([supports.sum(), refutes.sum()], dtype=np.int64)

    n_for, n_against = reduce_chunks(n_draws, chunk_size_for(m), task, workers)
    return EvidenceTriple.from_counts(int(n_for), int(n_against), n_draws)


@dataclass(frozen=True)
class EnvelopePoint:
    t: float
    min_count: int
    max_count: int
    lower: float
    upper: float


def cdf_envelope(C: CumulativeMatrix, grid: Sequence[float], level: float = 0.95) -> list[EnvelopePoint]:
    """Equal-tailed bounds on ``F(t)`` at each grid time.

    ``F(t)`` lies above the order statistic of rank ``min_count`` and below
    that of rank ``max_count`` (the internal counts of the window ``(0, t]``);
    the band takes the lower Beta quantile of the first and the upper Beta
    quantile of the second.
    """
    grid = [float(t) for t in grid]
    if not grid:
        raise InvalidInputError("envelope grid is empty")
    if any(t <= 0 or not math.isfinite(t) for t in grid):
        raise InvalidInputError("envelope grid times must be positive and finite")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise InvalidInputError("envelope grid must be strictly increasing")
    if not 0.0 < level < 1.0:
        raise InvalidInputError(f"envelope level must lie in (0, 1), got {level}")
    tail = (1.0 - level) / 2.0
    m = C.m
    out = []
    for t in grid:
        c = interval_counts(C, 0.0, t)
        lo = beta_quantile(tail, c.v_n_l, m + 1 - c.v_n_l) if c.v_n_l else 0.0
        hi = beta_quantile(1.0 - tail, c.v_n_u, m + 1 - c.v_n_u) if c.v_n_u else 0.0
        out.append(EnvelopePoint(t, c.v_n_l, c.v_n_u, lo, hi))
    return out
