import datetime as dt
import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from positivity.ingest import (
    CountError,
    DailyRecord,
    DateParseError,
    DuplicateDateError,
    MissingColumnError,
    TestSeries,
    cumulative_stats,
    daily_ppt,
    moving_average,
    negbinom_fit_overlay,
    parse_report,
    summarize_series,
    write_report,
)
from positivity.synthetic import indiana_scale_series, simulate_series, theta_for_mean

from oracles import naive_moving_average, naive_summary, naive_totals

GOOD = b"""DATE,COVID_TEST,COVID_COUNT,COVID_DEATHS,DAILY_DELTA_TESTS
2020-03-18,900,80,1,3
2020-03-16,652,4,0,1
2020-03-17,1000,100,0,2
"""


def series_of(pairs, start=dt.date(2020, 3, 16), drop_last=0):
    return TestSeries(
        tuple(DailyRecord(start + dt.timedelta(days=i), k, y) for i, (k, y) in enumerate(pairs)),
        drop_last=drop_last,
    )


def test_parse_well_formed():
    s = parse_report(GOOD, drop_last=0)
    assert len(s) == 3
    assert s.dates == [dt.date(2020, 3, 16), dt.date(2020, 3, 17), dt.date(2020, 3, 18)]
    np.testing.assert_array_equal(s.tests, [652, 1000, 900])
    np.testing.assert_array_equal(s.positives, [4, 100, 80])


def test_parse_from_path_and_stream(tmp_path):
    p = tmp_path / "r.csv"
    p.write_bytes(GOOD)
    assert parse_report(p, drop_last=0) == parse_report(str(p), drop_last=0)
    assert parse_report(io.StringIO(GOOD.decode()), drop_last=0) == parse_report(GOOD, drop_last=0)
    with open(p, "rb") as fh:
        assert parse_report(fh, drop_last=0) == parse_report(GOOD, drop_last=0)


def test_parse_default_drops_three():
    s = indiana_scale_series()
    buf = io.StringIO()
    write_report(s, buf)
    parsed = parse_report(buf.getvalue().encode())
    assert len(parsed.records) == 112 and parsed.m == 109


def test_127_rows_effective_124():
    s = simulate_series(127, 0.1, seed=3)
    buf = io.StringIO()
    write_report(s, buf)
    assert parse_report(io.StringIO(buf.getvalue()), drop_last=3).m == 124


def test_start_date_window():
    s = parse_report(GOOD, drop_last=0, start_date=dt.date(2020, 3, 17))
    assert s.dates[0] == dt.date(2020, 3, 17) and len(s) == 2


@pytest.mark.parametrize(
    "text,err,fragment",
    [
        (b"DATE,COVID_TEST\n2020-03-16,5\n", MissingColumnError, "COVID_COUNT"),
        (b"DATE,COVID_TEST,COVID_COUNT\n2020-03-16,5,1\n03/17/2020,5,1\n", DateParseError, "row 3"),
        (b"DATE,COVID_TEST,COVID_COUNT\n2020-03-16,5,1\n2020-03-16,6,1\n", DuplicateDateError, "row 3"),
        (b"DATE,COVID_TEST,COVID_COUNT\n2020-03-16,5,1\n2020-03-17,5,6\n", CountError, "row 3"),
        (b"DATE,COVID_TEST,COVID_COUNT\n2020-03-16,-5,1\n", CountError, "row 2"),
        (b"DATE,COVID_TEST,COVID_COUNT\n2020-03-16,5.5,1\n", CountError, "row 2"),
        (b"DATE,COVID_TEST,COVID_COUNT\n2020-03-16,abc,1\n", CountError, "row 2"),
    ],
)
def test_parse_errors(text, err, fragment):
    with pytest.raises(err, match=fragment):
        parse_report(text)


def test_error_kinds_are_distinct():
    kinds = {MissingColumnError, DateParseError, DuplicateDateError, CountError}
    assert len(kinds) == 4
    for a in kinds:
        for b in kinds - {a}:
            assert not issubclass(a, b)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 10**6), st.floats(0, 1)), min_size=0, max_size=40),
       st.integers(0, 5))
def test_round_trip(rows, drop):
    s = series_of([(k, int(k * f)) for k, f in rows], drop_last=drop)
    buf = io.StringIO()
    write_report(s, buf)
    assert parse_report(buf.getvalue().encode(), drop_last=drop) == s


def test_daily_ppt():
    s = series_of([(652, 4), (10, 0), (7, 7), (0, 0)])
    ppt = daily_ppt(s)
    assert ppt[0] == pytest.approx(0.006135, abs=5e-7)
    assert ppt[1] == 0 and ppt[2] == 1
    assert math.isnan(ppt[3])


def test_moving_average_examples():
    np.testing.assert_allclose(moving_average([1, 2, 3, 4], 2), [1, 1.5, 2.5, 3.5])
    np.testing.assert_array_equal(moving_average([0.3] * 10, 7), [0.3] * 10)
    x = np.random.default_rng(0).random(30)
    np.testing.assert_array_equal(moving_average(x, 1), x)
    with pytest.raises(ValueError):
        moving_average(x, 0)


def test_moving_average_skips_undefined():
    out = moving_average([1.0, math.nan, 3.0, math.nan, math.nan, math.nan], 3)
    np.testing.assert_allclose(out[:5], [1, 1, 2, 3, 3])
    assert math.isnan(out[5])


def test_moving_average_fixture_vs_naive():
    ppt = daily_ppt(indiana_scale_series())
    np.testing.assert_allclose(moving_average(ppt, 7), naive_moving_average(list(ppt), 7), rtol=0, atol=1e-12)


def test_cumulative_stats():
    s = indiana_scale_series()
    first = cumulative_stats(s, 1)
    assert (first.m, first.X, first.N) == (1, s.records[0].positives, s.records[0].tests)
    full = cumulative_stats(s)
    assert (full.m, full.X, full.N) == (109, 46907, 522946)
    assert (full.X, full.N) == naive_totals(s.records, 109)
    for bad in (0, 110):
        with pytest.raises(IndexError):
            cumulative_stats(s, bad)


def test_cumulative_stats_monotone():
    s = simulate_series(40, 0.2, seed=1)
    prev = (0, 0)
    for n in range(1, 41):
        st_ = cumulative_stats(s, n)
        assert st_.X >= prev[0] and st_.N >= prev[1]
        prev = (st_.X, st_.N)


def test_summary_single_and_small():
    one = summarize_series(series_of([(100, 7)]))
    t = one.tests
    assert t.min == t.q1 == t.median == t.q3 == t.max == 100 and t.sd == 0
    five = summarize_series(series_of([(k, 0) for k in (5, 3, 1, 2, 4)]))
    assert (five.tests.median, five.tests.q1, five.tests.q3) == (3, 2, 4)


def test_summary_vs_naive():
    s = indiana_scale_series()
    summ = summarize_series(s)
    for col, values in ((summ.tests, s.tests), (summ.positives, s.positives), (summ.ppt, daily_ppt(s))):
        ref = naive_summary([float(v) for v in values])
        for key, val in ref.items():
            assert getattr(col, key) == pytest.approx(val, rel=1e-12, abs=1e-12)
        assert col.min <= col.q1 <= col.median <= col.q3 <= col.max


def test_mean_ppt_differs_from_cumulative_rate():
    s = series_of([(10, 9), (10000, 100)])
    assert summarize_series(s).ppt.mean == pytest.approx(0.455)
    assert cumulative_stats(s).cumulative_ppt == pytest.approx(109 / 10010)


def test_summary_table_text():
    text = summarize_series(indiana_scale_series()).table()
    assert "1st Qu." in text and "COVID_COUNT" in text


def test_overlay_constant_series():
    ov = negbinom_fit_overlay([500] * 10, 3, 0.99)
    assert ov.counts.tolist() == [10]
    assert 0 < ov.fitted_prob.sum() <= 1


def test_overlay_mass_grows_with_range():
    theta = theta_for_mean(20, 3)
    narrow = negbinom_fit_overlay([15, 20, 25], 3, theta).fitted_prob.sum()
    wide = negbinom_fit_overlay([0, 20, 400], 3, theta).fitted_prob.sum()
    assert narrow < wide <= 1 + 1e-12
    assert wide == pytest.approx(1.0, abs=1e-9)


def test_overlay_chi_square_on_model_data():
    s = simulate_series(2000, 0.1, r=3, mean_tests=300, seed=7)
    ov = negbinom_fit_overlay(s.tests, 3, theta_for_mean(300, 3), bins=25)
    chi2, dof = ov.chi_square()
    assert ov.counts.sum() == 2000
    assert chi2 < stats.chi2.ppf(0.99, dof)
    # a badly wrong size parameter is rejected
    bad_chi2, bad_dof = negbinom_fit_overlay(s.tests, 30, theta_for_mean(300, 30), bins=25).chi_square()
    assert bad_chi2 > stats.chi2.ppf(0.99, bad_dof)
