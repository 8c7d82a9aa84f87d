"""Uniform spacings and the joint law of two nested spacing sums.

The ``m`` auxiliary uniforms cut ``[0, 1]`` into ``m + 1`` gaps that are
jointly flat-Dirichlet.  Any ``v`` of them sum to a ``Beta(v, m + 1 - v)``
variable, and for nested blocks of ``v_inner <= v_outer`` gaps the three
aggregated cells follow ``Dirichlet(v_inner, v_outer - v_inner, m + 1 - v_outer)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .betafn import beta_cdf, beta_cdf_below, beta_pdf
from .errors import DomainError, InvalidInputError


@dataclass(frozen=True, eq=False)
class SpacingDraw:
    gaps: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gaps, dtype=float)
        if g.ndim != 1 or len(g) < 2:
            raise InvalidInputError("a spacing draw needs at least two gaps")
        if np.any(g < 0) or abs(g.sum() - 1.0) > 1e-12:
            raise InvalidInputError("spacing gaps must be non-negative and sum to 1")
        g.setflags(write=False)
        object.__setattr__(self, "gaps", g)

    @property
    def m(self) -> int:
        return len(self.gaps) - 1

    def order_statistics(self) -> np.ndarray:
        """``Y_0 = 0, Y_1, ..., Y_m, Y_{m+1} = 1``."""
        return np.concatenate(([0.0], np.cumsum(self.gaps[:-1]), [1.0]))


def sample_spacings_batch(m: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """``(n, m + 1)`` array of spacing vectors, one flat-Dirichlet draw per row."""
    if m < 1:
        raise DomainError(f"spacings need m >= 1, got {m}")
    e = rng.standard_exponential((n, m + 1))
    return e / e.sum(axis=1, keepdims=True)


def order_statistics_batch(m: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """``(n, m + 2)`` array of ``Y_0 = 0 <= Y_1 <= ... <= Y_{m+1} = 1`` per row.

    Consumes the stream exactly like :func:`sample_spacings_batch`.  Built
    from running sums so every row is monotone and bounded by 1 in floating
    point.
    """
    if m < 1:
        raise DomainError(f"spacings need m >= 1, got {m}")
    e = rng.standard_exponential((n, m + 1))
    y = np.zeros((n, m + 2))
    np.cumsum(e, axis=1, out=y[:, 1:])
    y /= y[:, -1:]
    y[:, -1] = 1.0
    return y


def sample_spacings(m: int, rng: np.random.Generator) -> SpacingDraw:
    gaps = sample_spacings_batch(m, 1, rng)[0]
    # renormalize once more so the stored draw sums to 1 to the last ulp
    return SpacingDraw(gaps / math.fsum(gaps))


def _count_law(v: int, m: int) -> tuple[int, int]:
    return v, m + 1 - v


def joint_rect_prob(v_inner: int, v_outer: int, m: int, q_l: float, q_u: float) -> float:
    """``Pr(W_inner >= q_l and W_outer <= q_u)`` for nested sums of ``v_inner <= v_outer`` gaps.

    One-sided and degenerate cases reduce to single Beta CDFs; the general
    case integrates the inner Beta density against the conditional tail of
    the remaining outer mass, ``W_outer - W_inner = (1 - W_inner) B`` with
    ``B ~ Beta(v_outer - v_inner, m + 1 - v_outer)``.
    """
    if not (0 <= v_inner <= v_outer <= m):
        raise InvalidInputError(f"need 0 <= v_inner <= v_outer <= m, got {v_inner}, {v_outer}, {m}")
    if not (0.0 <= q_l <= q_u <= 1.0):
        raise InvalidInputError(f"need 0 <= q_l <= q_u <= 1, got {q_l}, {q_u}")

    if v_inner == v_outer:
        a, b = _count_law(v_inner, m)
        return max(0.0, beta_cdf(q_u, a, b) - beta_cdf_below(q_l, a, b))
    if q_l == 0.0:
        return beta_cdf(q_u, *_count_law(v_outer, m))
    if v_inner == 0 or q_l == q_u:
        return 0.0
    a, b = _count_law(v_inner, m)
    if q_u == 1.0:
        return 1.0 - beta_cdf(q_l, a, b)

    ca, cb = v_outer - v_inner, m + 1 - v_outer

    def integrand(w: float) -> float:
        return beta_pdf(w, a, b) * beta_cdf((q_u - w) / (1.0 - w), ca, cb)

    points = None
    if a > 1:
        mode = (a - 1) / (a + b - 2)
        if q_l < mode < q_u:
            points = [mode]
    val, _ = quad(integrand, q_l, q_u, epsabs=1e-13, epsrel=1e-11, limit=400, points=points)
    return min(1.0, max(0.0, val))
