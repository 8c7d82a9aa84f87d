"""Nonparametric Dempster-Shafer inference for right-censored survival data."""

__version__ = "0.1.0"

from .betafn import beta_cdf, beta_quantile
from .data import (
    CumulativeMatrix,
    EventKind,
    SubjectRecord,
    SurvivalDataset,
    bracket_indices,
    build_cumulative_matrix,
    failure_bounds,
)
from .errors import ConfigError, DomainError, DSSurvError, InvalidInputError, ParseError
from .inference import (
    EvidenceTriple,
    IntervalCounts,
    MassAssertion,
    cdf_envelope,
    evidence_exact,
    evidence_mc,
    interval_counts,
)
from .km import kaplan_meier
from .spacings import SpacingDraw, joint_rect_prob, sample_spacings
from .trials import TrialTable, parse_trial_csv, simulate_trial
from .ve import (
    Direction,
    SensitivityReport,
    VEAssertion,
    capped_interval_counts,
    rate_bounds_for_draw,
    sensitivity_sweep,
    ve_evidence,
)
