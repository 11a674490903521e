"""Calendar derivations, country table, cleaning, CSV round-trips."""

import io
from datetime import date, timedelta

import pytest
from hypothesis import given, settings, strategies as st

from dwe import corpus as cm

DATES = st.dates(min_value=date(1990, 1, 1), max_value=date(2040, 12, 31))


class TestWeekday:
    def test_monday_is_one(self):
        assert cm.derive_weekday(date(2024, 1, 1)) == 1  # a Monday

    def test_sunday_is_seven(self):
        assert cm.derive_weekday(date(2024, 1, 7)) == 7

    def test_known_friday(self):
        assert cm.derive_weekday(date(2005, 12, 9)) == 5

    @given(DATES)
    def test_range(self, d):
        assert 1 <= cm.derive_weekday(d) <= 7

    @given(DATES)
    def test_consecutive_days_cycle(self, d):
        w1 = cm.derive_weekday(d)
        w2 = cm.derive_weekday(d + timedelta(days=1))
        assert w2 == w1 % 7 + 1


class TestWeekNumber:
    def test_worked_rows(self, sample_week_rows):
        for row in sample_week_rows:
            assert cm.derive_week_number(row["received"]) == row["week"], \
                row["received"]

    def test_jan_first_in_week_one(self):
        for year in range(1995, 2030):
            assert cm.derive_week_number(date(year, 1, 1)) == 1

    def test_week_54_exists(self):
        # 2000 starts on a Saturday; its Dec 31 lands in a 54th week
        assert cm.derive_week_number(date(2000, 12, 31)) == 54

    @given(DATES)
    def test_range(self, d):
        assert 1 <= cm.derive_week_number(d) <= 54

    @given(DATES)
    def test_weeks_start_on_sunday(self, d):
        # week number increments exactly when a Sunday starts
        w_today = cm.derive_week_number(d)
        nxt = d + timedelta(days=1)
        if nxt.year != d.year:
            return
        w_next = cm.derive_week_number(nxt)
        if cm.derive_weekday(nxt) == 7:
            assert w_next == w_today + 1
        else:
            assert w_next == w_today


class TestSeason:
    def test_winter_wraps_year_end(self):
        assert cm.derive_season(date(2010, 12, 25)) == "winter"
        assert cm.derive_season(date(2011, 1, 5)) == "winter"
        assert cm.derive_season(date(2011, 2, 28)) == "winter"

    def test_quarters(self):
        assert cm.derive_season(date(2010, 3, 1)) == "spring"
        assert cm.derive_season(date(2010, 6, 1)) == "summer"
        assert cm.derive_season(date(2010, 9, 1)) == "fall"

    @given(DATES)
    def test_total_partition(self, d):
        assert cm.derive_season(d) in cm.SEASONS


class TestChristmasWindow:
    def test_window_edges(self):
        assert cm.in_christmas_window(date(2010, 12, 20))
        assert cm.in_christmas_window(date(2011, 1, 10))
        assert not cm.in_christmas_window(date(2010, 12, 19))
        assert not cm.in_christmas_window(date(2011, 1, 11))

    @given(DATES)
    def test_inside_iff_day_in_window(self, d):
        inside = ((d.month == 12 and d.day >= 20)
                  or (d.month == 1 and d.day <= 10))
        assert cm.in_christmas_window(d) == inside


class TestWeekendSchedules:
    def test_default_weekend(self, country_table):
        us = country_table["US"]
        assert us.weekend_days(date(2015, 6, 6)) == frozenset({6, 7})

    def test_saudi_switch(self, country_table):
        sa = country_table["SA"]
        # Thu/Fri weekend before mid-2013, Fri/Sat after
        assert sa.weekend_days(date(2013, 6, 1)) == frozenset({4, 5})
        assert sa.weekend_days(date(2013, 6, 29)) == frozenset({5, 6})
        assert cm.classify_weekend(date(2015, 6, 5), sa)   # a Friday
        assert not cm.classify_weekend(date(2015, 6, 7), sa)  # a Sunday

    def test_nepal_single_day(self, country_table):
        np_ = country_table["NP"]
        assert np_.weekend_days(date(2015, 6, 6)) == frozenset({6})

    def test_table_is_wellformed(self, country_table):
        for iso, profile in country_table.items():
            assert profile.iso == iso
            assert profile.continent in cm.CONTINENTS
            assert 0.0 < profile.hdi <= 1.0
            assert profile.lto is None or 0 <= profile.lto <= 100
            froms = [entry[0] for entry in profile.weekend_schedule]
            assert froms == sorted(froms)
            assert froms[0] == date.min


class TestDeriveFeatures:
    def test_log_features(self, country_table):
        art = cm.ArticleRecord(id=1, journal="j", received=date(2012, 3, 9),
                               revised=None, online=None, author_count=10,
                               page_count=4, country="US")
        f = cm.derive_features(art, country_table["US"])
        assert f.log10_authors == 1.0
        assert f.weekday == 5 and f.season == "spring"
        assert f.continent == "america"
        assert not f.is_weekend and not f.is_christmas

    def test_lto_zero_is_missing(self, country_table):
        profile = cm.make_profile(iso="XX", continent="asia", hdi=0.7,
                                  lto=None, names=("nowhere",))
        art = cm.ArticleRecord(id=1, journal="j", received=date(2012, 3, 9),
                               revised=None, online=None, author_count=2,
                               page_count=4, country="XX")
        f = cm.derive_features(art, profile)
        assert f.log10_lto is None


class TestCleaning:
    def _raw(self, **kw):
        base = dict(id=1, journal="j", received=date(2010, 5, 3),
                    revised=None, online=None, author_count=2,
                    page_count=3, country="US")
        base.update(kw)
        return cm.RawRecord(**base)

    def test_drops_counted_by_reason(self, country_table):
        rows = [self._raw(),
                self._raw(id=2, received=None),
                self._raw(id=3, country=""),
                self._raw(id=4, country="ZZ"),
                self._raw(id=5, author_count=0)]
        c = cm.clean_corpus(rows, country_table)
        assert len(c.records) == 1
        assert c.cleaning_report["no-reception-date"] == 1
        assert c.cleaning_report["unclear-country"] == 2
        assert c.cleaning_report["no-authors"] == 1

    def test_duplicate_id_is_error(self, country_table):
        rows = [self._raw(), self._raw()]
        with pytest.raises(ValueError, match="duplicate"):
            cm.clean_corpus(rows, country_table)

    def test_idempotent(self, country_table):
        rows = [self._raw(id=i) for i in range(1, 6)]
        once = cm.clean_corpus(rows, country_table)
        again = cm.clean_corpus(
            [cm.raw_from_article(r.article) for r in once.records],
            country_table)
        assert [r.article for r in again.records] \
            == [r.article for r in once.records]

    def test_output_sorted_by_id(self, country_table):
        rows = [self._raw(id=i) for i in (5, 2, 9, 1)]
        c = cm.clean_corpus(rows, country_table)
        assert [r.article.id for r in c.records] == [1, 2, 5, 9]


raw_records = st.builds(
    cm.RawRecord,
    id=st.integers(min_value=1, max_value=10**6),
    journal=st.sampled_from(["plos one", "nature", "cell"]),
    received=st.one_of(st.none(), DATES),
    revised=st.none(),
    online=st.none(),
    author_count=st.integers(min_value=0, max_value=50),
    page_count=st.integers(min_value=0, max_value=80),
    country=st.sampled_from(["US", "DE", "JP", "ZZ", ""]),
)


class TestCsvRoundTrip:
    @settings(max_examples=50)
    @given(st.lists(raw_records, max_size=30))
    def test_rows_survive(self, tmp_path_factory, rows):
        path = tmp_path_factory.mktemp("csv") / "c.csv"
        cm.write_corpus_csv(rows, str(path))
        back = cm.read_corpus_csv(str(path))
        assert back == rows

    def test_header_enforced(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ValueError, match="header"):
            cm.read_corpus_csv(str(path))


class TestCountriesCfg:
    def test_round_trip(self, tmp_path, country_table):
        path = tmp_path / "countries.cfg"
        cm.write_countries_cfg(country_table, str(path))
        back = cm.read_countries_cfg(str(path))
        assert back == country_table

    def test_parse_schedule_line(self, tmp_path):
        path = tmp_path / "one.cfg"
        path.write_text(
            'iso=SA continent=asia hdi=0.85 lto=36 name="saudi arabia" '
            "from=2013-06-29 days=5,6\n")
        table = cm.read_countries_cfg(str(path))
        sa = table["SA"]
        assert sa.weekend_days(date(2014, 1, 1)) == frozenset({5, 6})
        assert sa.weekend_days(date(2010, 1, 1)) == cm.DEFAULT_WEEKEND

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "one.cfg"
        path.write_text("iso=US continent=america hdi=0.9 wat=1\n")
        with pytest.raises(ValueError):
            cm.read_countries_cfg(str(path))
