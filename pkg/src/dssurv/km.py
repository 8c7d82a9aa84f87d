"""Kaplan-Meier product-limit baseline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import SurvivalDataset


@dataclass(frozen=True, eq=False)
class KaplanMeierCurve:
    times: np.ndarray       # distinct failure times
    survival: np.ndarray    # S just after each time
    at_risk: np.ndarray
    events: np.ndarray

    def __call__(self, t) -> np.ndarray:
        """Right-continuous step function ``S(t)``."""
        idx = np.searchsorted(self.times, np.asarray(t, dtype=float), side="right")
        return np.concatenate(([1.0], self.survival))[idx]


def kaplan_meier(dataset: SurvivalDataset) -> KaplanMeierCurve:
    times, events = dataset.arrays()
    fail_times = np.unique(times[events == 1])
    # subjects censored at a failure time are still at risk there
    at_risk = np.array([(times >= t).sum() for t in fail_times], dtype=np.int64)
    deaths = np.array([((times == t) & (events == 1)).sum() for t in fail_times], dtype=np.int64)
    surv = np.cumprod(1.0 - deaths / at_risk) if len(fail_times) else np.empty(0)
    return KaplanMeierCurve(fail_times, surv, at_risk, deaths)
