"""Synthetic corpora and panels with planted effects.

Experiment support: generate article flows whose weekday mix, Christmas
clustering, country mix, and panel variance components are known, then
check that the estimators recover them.  Everything is driven by a single
integer seed through numpy's Generator, so a given config is reproducible
bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from datetime import date, timedelta

import numpy as np

from .corpus import (Corpus, RawRecord, clean_corpus, derive_season,
                     in_christmas_window, load_default_countries)
from .panel import PANEL_COLUMNS, PanelCell, PanelData, _cell_row

#: Sat/Sun-weekend countries with LTO present in the shipped table, biggest
#: publishers first; a natural default mix for planted-effect corpora.
DEFAULT_COUNTRIES = ("US", "CN", "DE", "GB", "FR", "JP", "IT", "CA",
                     "ES", "AU", "RO")

FLAT_WEEK = (1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0)
#: strong working-week profile: submissions mostly Mon-Fri.
OFFICE_WEEK = (1.6, 1.45, 1.3, 1.2, 1.05, 0.25, 0.2)
#: Christmas-window profile: the few submissions bunch early in the week.
BUNCHED_WEEK = (3.0, 2.0, 1.0, 0.5, 0.4, 0.1, 0.1)


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    start_year: int = 2010
    end_year: int = 2014
    articles_per_week: float = 40.0
    journals: tuple[str, ...] = ("plos-one",)
    journal_weights: tuple[float, ...] | None = None
    countries: tuple[str, ...] = DEFAULT_COUNTRIES
    country_weights: tuple[float, ...] | None = None
    weekday_weights: tuple[float, ...] = OFFICE_WEEK
    christmas_weekday_weights: tuple[float, ...] | None = None
    christmas_volume_factor: float = 1.0
    mean_authors: float = 4.0


def _norm(weights, size) -> np.ndarray:
    if weights is None:
        return np.full(size, 1.0 / size)
    w = np.asarray(weights, dtype=float)
    if w.size != size or np.any(w < 0) or w.sum() <= 0:
        raise ValueError("bad weight vector")
    return w / w.sum()


def make_corpus_rows(config: SynthConfig) -> list[RawRecord]:
    """Draw raw article rows day by day over the configured years."""
    rng = np.random.default_rng(config.seed)
    jw = _norm(config.journal_weights, len(config.journals))
    cw = _norm(config.country_weights, len(config.countries))
    base = np.asarray(config.weekday_weights, dtype=float)
    if base.size != 7 or np.any(base < 0) or base.sum() <= 0:
        raise ValueError("weekday_weights needs 7 non-negative entries")
    festive = config.christmas_weekday_weights
    festive = base if festive is None else np.asarray(festive, dtype=float)
    if festive.size != 7:
        raise ValueError("christmas_weekday_weights needs 7 entries")

    rows: list[RawRecord] = []
    next_id = 1
    day = date(config.start_year, 1, 1)
    last = date(config.end_year, 12, 31)
    while day <= last:
        if in_christmas_window(day):
            profile, volume = festive, config.christmas_volume_factor
        else:
            profile, volume = base, 1.0
        rate = config.articles_per_week * volume \
            * profile[day.isoweekday() - 1] / profile.sum()
        count = int(rng.poisson(rate))
        for _ in range(count):
            journal = config.journals[int(rng.choice(len(jw), p=jw))]
            country = config.countries[int(rng.choice(len(cw), p=cw))]
            authors = 1 + int(rng.poisson(max(config.mean_authors - 1.0,
                                              0.0)))
            rows.append(RawRecord(
                id=next_id, journal=journal, received=day,
                revised=day + timedelta(days=int(rng.integers(20, 80))),
                online=day + timedelta(days=int(rng.integers(90, 200))),
                author_count=authors,
                page_count=int(rng.integers(4, 20)),
                country=country))
            next_id += 1
        day += timedelta(days=1)
    return rows


def make_corpus(config: SynthConfig, countries=None) -> Corpus:
    """Cleaned synthetic corpus against the shipped (or given) country table."""
    table = countries if countries is not None else load_default_countries()
    return clean_corpus(make_corpus_rows(config), table)


# -- synthetic panels -------------------------------------------------------

@dataclass(frozen=True)
class PanelPlant:
    """Planted data-generating process for a balanced daily panel."""

    seed: int = 0
    n_countries: int = 11
    T: int = 2435
    start: date = date(2010, 1, 1)
    sigma_country: float = 0.05  # sd of the per-country effect
    sigma_idio: float = 1.0     # sd of the cell noise
    betas: tuple[tuple[str, float], ...] = (
        ("const", 0.5), ("weekend", -0.3), ("monday", 0.08),
        ("christmas", 0.15), ("log10_authors", 0.1), ("trend", -0.02))


def make_synthetic_panel(plant: PanelPlant) -> tuple[PanelData, dict]:
    """Balanced panel with known coefficients and variance components.

    Returns the panel plus the ground truth (betas, variances, the planted
    variance share).  All countries use Sat/Sun weekends here; the planted
    weekend coefficient therefore acts on literal Saturdays and Sundays.
    """
    rng = np.random.default_rng(plant.seed)
    beta = dict(plant.betas)
    coef = np.asarray([beta.get(name, 0.0) for name in PANEL_COLUMNS])
    countries = [f"C{i:02d}" for i in range(plant.n_countries)]
    u = rng.normal(0.0, plant.sigma_country, size=plant.n_countries)
    hdi = rng.uniform(0.5, 0.95, size=plant.n_countries)
    lto = rng.uniform(20.0, 90.0, size=plant.n_countries)

    cells = []
    for ci, iso in enumerate(countries):
        noise = rng.normal(0.0, plant.sigma_idio, size=plant.T)
        authors = rng.normal(0.55, 0.2, size=plant.T)
        sizes = 1 + rng.poisson(4.0, size=plant.T)
        for t in range(1, plant.T + 1):
            day = plant.start + timedelta(days=t - 1)
            cell = PanelCell(
                country=iso, t=t, day=day, n_ct=int(sizes[t - 1]),
                y=0.0,  # placeholder, filled below
                mean_log10_authors=float(authors[t - 1]),
                weekday=day.isoweekday(),
                season=derive_season(day),
                is_weekend=day.isoweekday() in (6, 7),
                is_christmas=in_christmas_window(day),
                log10_hdi=math.log10(hdi[ci]),
                log10_lto=math.log10(lto[ci]))
            row = np.asarray(_cell_row(cell, "log10"))
            y = float(row @ coef) + float(u[ci]) + float(noise[t - 1])
            cells.append(replace(cell, y=y))

    end = plant.start + timedelta(days=plant.T - 1)
    var_c = plant.sigma_country ** 2
    var_i = plant.sigma_idio ** 2
    truth = {"betas": beta, "sigma2_country": var_c, "sigma2_idio": var_i,
             "rho_share": var_c / (var_c + var_i) if var_c + var_i > 0
             else 0.0}
    return PanelData(cells=tuple(cells), start=plant.start, end=end,
                     countries=tuple(countries)), truth
