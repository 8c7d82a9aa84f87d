import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.stats import beta as beta_dist

from dssurv.data import SurvivalDataset, build_cumulative_matrix, convert_to_ltf
from dssurv.errors import InvalidInputError
from dssurv.inference import (
    EvidenceTriple,
    IntervalCounts,
    MassAssertion,
    cdf_envelope,
    evidence_exact,
    evidence_mc,
    interval_counts,
)
from dssurv.km import kaplan_meier
from dssurv.trials import simulate_arm
from dssurv.montecarlo import stream_rng

# exact values from the binomial-tail oracle; 0.85**10 for P
EXAMPLE_A = (0.19687440434072265, 0.1798035196324219, 0.6233220760268555)
EXAMPLE_B_Q = 0.049969798878515624


@st.composite
def continuous_datasets(draw, min_m=1, max_m=20):
    m = draw(st.integers(min_m, max_m))
    times = draw(st.lists(st.floats(0.5, 100.0), min_size=m, max_size=m, unique=True))
    events = draw(st.lists(st.integers(0, 1), min_size=m, max_size=m))
    return SurvivalDataset.from_arrays(times, events)


class TestIntervalCounts:
    def test_example_a(self, matrix_a):
        assert interval_counts(matrix_a, 25, 75).as_tuple() == (1, 1, 3, 3)

    def test_example_b(self, matrix_b):
        assert interval_counts(matrix_b, 25, 75).as_tuple() == (1, 2, 3, 4)

    def test_window_on_observed_times(self, matrix_a):
        assert interval_counts(matrix_a, 30, 100).as_tuple() == (2, 2, 2, 2)

    def test_window_past_last_observation(self, matrix_a):
        c = interval_counts(matrix_a, 0, 500)
        assert c.as_tuple() == (10, 10, 10, 10)

    def test_empty_window_interior(self, matrix_a):
        # no observation in (31, 54]: inner block empty, outer spans 30..55
        assert interval_counts(matrix_a, 31, 54).as_tuple() == (0, 0, 1, 1)

    def test_bad_window(self, matrix_a):
        with pytest.raises(InvalidInputError):
            interval_counts(matrix_a, 75, 25)

    def test_inconsistent_counts_rejected(self):
        with pytest.raises(InvalidInputError):
            IntervalCounts(3, 2, 3, 4, 10)

    @given(continuous_datasets(), st.floats(0, 110), st.floats(0.1, 50))
    def test_ordering(self, ds, t_l, width):
        c = interval_counts(build_cumulative_matrix(ds), t_l, t_l + width)
        assert 0 <= c.v_n_l <= c.v_n_u <= c.v_x_u <= c.m
        assert c.v_n_l <= c.v_x_l <= c.v_x_u


class TestEvidenceExact:
    def test_example_a(self, matrix_a):
        ev = evidence_exact(interval_counts(matrix_a, 25, 75), 0.15, 1.0)
        assert ev.as_tuple() == pytest.approx(EXAMPLE_A, abs=1e-12)
        assert ev.p == pytest.approx(0.85**10, abs=1e-14)

    def test_example_b(self, matrix_b):
        ev = evidence_exact(interval_counts(matrix_b, 25, 75), 0.15, 1.0)
        assert ev.p == pytest.approx(EXAMPLE_A[0], abs=1e-12)
        assert ev.q == pytest.approx(EXAMPLE_B_Q, abs=1e-12)
        assert ev.r == pytest.approx(1 - EXAMPLE_A[0] - EXAMPLE_B_Q, abs=1e-12)

    def test_vacuous(self, matrix_b):
        ev = evidence_exact(interval_counts(matrix_b, 25, 75), 0.0, 1.0)
        assert ev.as_tuple() == pytest.approx((1.0, 0.0, 0.0), abs=1e-14)

    def test_bad_quantiles(self, matrix_a):
        with pytest.raises(InvalidInputError):
            evidence_exact(interval_counts(matrix_a, 25, 75), 0.5, 0.2)

    @given(continuous_datasets(), st.floats(0, 100), st.floats(0.1, 60), st.floats(0, 1), st.floats(0, 1))
    @settings(deadline=None)
    def test_sums_to_one(self, ds, t_l, width, a, b):
        q_l, q_u = sorted((a, b))
        ev = evidence_exact(interval_counts(build_cumulative_matrix(ds), t_l, t_l + width), q_l, q_u)
        assert min(ev.as_tuple()) >= 0
        assert sum(ev.as_tuple()) == pytest.approx(1.0, abs=1e-9)

    @given(continuous_datasets(), st.floats(0, 100), st.floats(0.1, 60), st.lists(st.floats(0, 1), min_size=3, max_size=3))
    @settings(deadline=None)
    def test_monotone_in_bounds(self, ds, t_l, width, qs):
        a, b, c = sorted(qs)
        counts = interval_counts(build_cumulative_matrix(ds), t_l, t_l + width)
        wide, tight_lo, tight_hi = (evidence_exact(counts, *q) for q in ((a, c), (b, c), (a, b)))
        tol = 1e-9
        assert tight_lo.p <= wide.p + tol and tight_lo.q >= wide.q - tol
        assert tight_hi.p <= wide.p + tol and tight_hi.q >= wide.q - tol

    @given(st.lists(st.floats(0.5, 100), min_size=2, max_size=20, unique=True), st.data(), st.floats(0, 1))
    @settings(deadline=None)
    def test_observed_endpoints_without_censoring_leave_nothing_undecided(self, times, data, q):
        ds = SurvivalDataset.from_lists(times)
        s = sorted(times)
        i = data.draw(st.integers(0, len(s) - 2))
        j = data.draw(st.integers(i + 1, len(s) - 1))
        ev = evidence_exact(interval_counts(build_cumulative_matrix(ds), s[i], s[j]), q, 1.0)
        assert ev.p + ev.q == pytest.approx(1.0, abs=1e-10)


class TestCensoringMonotonicity:
    def test_ltf_between_window_edges(self, example_a):
        # the converted failure lands as an LTF before the first failure inside the window
        before = evidence_exact(interval_counts(build_cumulative_matrix(example_a), 25, 75), 0.15, 1.0)
        moved = convert_to_ltf(example_a, 9, time=27.0)
        after = evidence_exact(interval_counts(build_cumulative_matrix(moved), 25, 75), 0.15, 1.0)
        assert after.p <= before.p
        assert after.q <= before.q

    @given(continuous_datasets(min_m=2), st.data(), st.floats(0, 100), st.floats(0.1, 60))
    @settings(max_examples=150, deadline=None)
    def test_earlier_ltf_never_adds_evidence(self, ds, data, t_l, width):
        fails = [i for i, r in enumerate(ds.records) if r.is_failure]
        assume(fails)
        i = data.draw(st.sampled_from(fails))
        t_new = data.draw(st.floats(0.01, ds.records[i].time))
        taken = {r.time for r in ds.records}
        assume(t_new not in taken or t_new == ds.records[i].time)
        q_l, q_u = sorted(data.draw(st.lists(st.floats(0, 1), min_size=2, max_size=2)))
        t_u = t_l + width
        before = evidence_exact(interval_counts(build_cumulative_matrix(ds), t_l, t_u), q_l, q_u)
        moved = convert_to_ltf(ds, i, time=t_new)
        after = evidence_exact(interval_counts(build_cumulative_matrix(moved), t_l, t_u), q_l, q_u)
        assert after.p <= before.p + 1e-12
        assert after.q <= before.q + 1e-12


class TestEvidenceMC:
    def test_vacuous_assertion_is_certain(self, matrix_b):
        ev = evidence_mc(matrix_b, MassAssertion(25, 75, 0.0, 1.0), 5000, seed=1)
        assert ev.as_tuple() == (1.0, 0.0, 0.0)
        assert ev.mc_se == 0.0

    def test_frozen_draws(self, matrix_a):
        ev = evidence_mc(matrix_a, MassAssertion(25, 75, 0.1, 0.2), 100_000, seed=0)
        assert ev.as_tuple() == (0.03031, 0.1772, 0.79249)
        assert ev.n_draws == 100_000

    @pytest.mark.parametrize("fixture", ["matrix_a", "matrix_b"])
    @pytest.mark.parametrize("q", [(0.15, 1.0), (0.1, 0.2), (0.0, 0.3)])
    def test_agrees_with_exact(self, request, fixture, q):
        C = request.getfixturevalue(fixture)
        exact = evidence_exact(interval_counts(C, 25, 75), *q)
        mc = evidence_mc(C, MassAssertion(25, 75, *q), 200_000, seed=3)
        for e, x, se in zip(exact.as_tuple(), mc.as_tuple(), mc.se):
            assert abs(e - x) <= 4 * se + 1e-9

    def test_worker_count_irrelevant(self, matrix_b):
        a = evidence_mc(matrix_b, MassAssertion(25, 75, 0.1, 0.3), 150_000, seed=9, workers=1)
        b = evidence_mc(matrix_b, MassAssertion(25, 75, 0.1, 0.3), 150_000, seed=9, workers=4)
        assert a == b

    def test_triple_from_counts(self):
        ev = EvidenceTriple.from_counts(25, 25, 100)
        assert ev.as_tuple() == (0.25, 0.25, 0.5)
        assert ev.mc_se == pytest.approx(0.05)


class TestEnvelope:
    def test_example_a_at_60(self, matrix_a):
        (pt,) = cdf_envelope(matrix_a, [60])
        assert (pt.min_count, pt.max_count) == (3, 3)
        lo, hi = beta_dist.ppf([0.025, 0.975], 3, 8)
        assert (pt.lower, pt.upper) == pytest.approx((lo, hi), abs=1e-12)

    def test_uncensored_counts_coincide(self, matrix_a):
        for pt in cdf_envelope(matrix_a, [5, 20, 60, 120, 300]):
            assert pt.min_count == pt.max_count

    def test_all_censored_band_is_wide(self):
        C = build_cumulative_matrix(SurvivalDataset.from_lists([], [1, 2, 3, 4, 5, 6]))
        for pt in cdf_envelope(C, [1.5, 3.5, 10]):
            assert pt.lower == 0.0
        assert cdf_envelope(C, [10])[0].upper > 0.6

    def test_band_is_monotone(self, matrix_b):
        pts = cdf_envelope(matrix_b, np.linspace(1, 250, 40))
        for a, b in zip(pts, pts[1:]):
            assert b.lower >= a.lower and b.upper >= a.upper
        assert all(p.lower <= p.upper for p in pts)

    @pytest.mark.parametrize("grid", [[], [0.0], [3, 2], [float("inf")]])
    def test_bad_grid(self, matrix_a, grid):
        with pytest.raises(InvalidInputError):
            cdf_envelope(matrix_a, grid)

    def test_bad_level(self, matrix_a):
        with pytest.raises(InvalidInputError):
            cdf_envelope(matrix_a, [10], level=1.0)

    def test_kaplan_meier_mostly_inside(self):
        t, e = simulate_arm(200, [0.02], censor_rate=0.01, rng=stream_rng(21))
        ds = SurvivalDataset.from_arrays(t, e)
        grid = np.quantile(t, np.linspace(0.05, 0.95, 30))
        km = kaplan_meier(ds)
        pts = cdf_envelope(build_cumulative_matrix(ds), grid)
        inside = [p.lower <= 1 - km(p.t) <= p.upper for p in pts]
        assert np.mean(inside) >= 0.9


class TestKaplanMeier:
    def test_uncensored_is_empirical(self, example_a):
        km = kaplan_meier(example_a)
        assert km(0) == 1.0
        assert km(55) == pytest.approx(0.7)
        assert km(54.9) == pytest.approx(0.8)
        assert km(1000) == 0.0

    def test_example_b(self, example_b):
        km = kaplan_meier(example_b)
        # the LTF at 50 leaves 7 at risk at 55
        assert km(55) == pytest.approx(0.8 * 6 / 7)

    def test_against_statsmodels(self):
        sm = pytest.importorskip("statsmodels.api")
        t, e = simulate_arm(150, [0.03, 0.01], breaks=[20], censor_rate=0.02, rng=stream_rng(8))
        ds = SurvivalDataset.from_arrays(t, e)
        ours = kaplan_meier(ds)
        ref = sm.SurvfuncRight(t, e)
        assert np.allclose(ours.times, ref.surv_times)
        assert np.allclose(ours.survival, ref.surv_prob, atol=1e-12)
        assert np.array_equal(ours.at_risk, ref.n_risk)
