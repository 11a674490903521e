"""Daily country-level panel and random-effects EGLS estimation.

Articles are aggregated into (country, day) cells over a fixed day range:
the cell outcome is the mean log10 ratio of the articles received that day
from that country, the author covariate is the mean log10 author count, and
the calendar dummies (weekday, season, Christmas window, country-specific
weekend) describe the day itself.  A deterministic trend enters as the log
of the day index.

Estimation is error-components GLS: variance components come from a
pooled-OLS residual decomposition (within-country residual variance for the
idiosyncratic part; group-mean residual dispersion, less its idiosyncratic
share, for the country effect), then each country is quasi-demeaned by

    theta_c = 1 - sqrt(s2_id / (s2_id + T_c * s2_country))

and the transformed data refit by OLS.  A negative country-variance moment
is clamped to zero (flagged), which collapses the estimator to pooled OLS.

The "weighted" variant reproduces a literal cell-size weighting: the
outcome and the continuous regressors (not the dummies) of every cell are
multiplied by the cell's article count before estimation.  A conventional
sqrt-weight WLS is available as weight_mode="wls".
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date, timedelta
from typing import Mapping, Sequence

import numpy as np
from scipy import stats as _sps

from .corpus import (Corpus, classify_weekend, derive_season,
                     derive_weekday, in_christmas_window)
from .linmod import CONST, _drop_dependent, _qr_solve, _stars
from .rud import CONSOLIDATED, build_rud_dataset

#: panel column order; trend always last.
PANEL_COLUMNS = (CONST, "monday", "tuesday", "wednesday", "thursday",
                 "weekend", "spring", "summer", "fall", "christmas",
                 "log10_authors", "log10_hdi", "log10_lto", "trend")

CONTINUOUS_COLUMNS = ("log10_authors", "log10_hdi", "log10_lto", "trend")


@dataclass(frozen=True)
class PanelCell:
    country: str
    t: int  # day index, 1..T
    day: date
    n_ct: int
    y: float
    mean_log10_authors: float
    weekday: int
    season: str
    is_weekend: bool
    is_christmas: bool
    log10_hdi: float
    log10_lto: float | None


@dataclass(frozen=True)
class PanelData:
    cells: tuple[PanelCell, ...]
    start: date
    end: date
    countries: tuple[str, ...]

    @property
    def T(self) -> int:
        return (self.end - self.start).days + 1


def build_panel(corpus: Corpus, start: date, end: date, top_n: int = 11,
                scope: str = CONSOLIDATED) -> PanelData:
    """Aggregate per-article ratios into (country, day) cells.

    Ratios are computed over the full corpus first (an article's week group
    is its journal's whole flow, not the panel subset), then restricted to
    the day range and the top_n countries by article count inside it.
    Cells exist only for populated (country, day) pairs.
    """
    if end < start:
        raise ValueError(f"range ends before it starts: {start}..{end}")
    observations = build_rud_dataset(corpus, scope)
    in_range = [o for o in observations if start <= o.received <= end]
    counts: dict[str, int] = {}
    for rec in corpus.records:
        if start <= rec.article.received <= end:
            counts[rec.article.country] = \
                counts.get(rec.article.country, 0) + 1
    ranked = sorted(counts, key=lambda iso: (-counts[iso], iso))
    if len(ranked) < top_n:
        raise ValueError(
            f"only {len(ranked)} countries have articles in range, "
            f"need {top_n}")
    top = ranked[:top_n]
    top_set = set(top)

    country_of = {rec.article.id: rec.article.country
                  for rec in corpus.records}
    grouped: dict[tuple[str, date], list] = {}
    for o in in_range:
        iso = country_of[o.article_id]
        if iso in top_set:
            grouped.setdefault((iso, o.received), []).append(o)

    cells = []
    for (iso, day), obs in sorted(grouped.items()):
        profile = corpus.countries[iso]
        lto = profile.lto
        cells.append(PanelCell(
            country=iso,
            t=(day - start).days + 1,
            day=day,
            n_ct=len(obs),
            y=float(np.mean([math.log10(o.rud) for o in obs])),
            mean_log10_authors=float(np.mean(
                [o.features.log10_authors for o in obs])),
            weekday=derive_weekday(day),
            season=derive_season(day),
            is_weekend=classify_weekend(day, profile),
            is_christmas=in_christmas_window(day),
            log10_hdi=math.log10(profile.hdi),
            log10_lto=math.log10(lto) if lto else None))
    return PanelData(cells=tuple(cells), start=start, end=end,
                     countries=tuple(sorted(top)))


def _cell_row(cell: PanelCell, trend_base: str) -> list[float] | None:
    if cell.log10_lto is None:
        return None
    trend = math.log10(cell.t) if trend_base == "log10" else math.log(cell.t)
    return [1.0,
            float(cell.weekday == 1), float(cell.weekday == 2),
            float(cell.weekday == 3), float(cell.weekday == 4),
            float(cell.is_weekend),
            float(cell.season == "spring"), float(cell.season == "summer"),
            float(cell.season == "fall"), float(cell.is_christmas),
            cell.mean_log10_authors, cell.log10_hdi, cell.log10_lto,
            trend]


@dataclass(frozen=True)
class PanelFit:
    columns: tuple[str, ...]
    coefficients: np.ndarray
    standard_errors: np.ndarray
    t_stats: np.ndarray
    p_values: np.ndarray
    stars: tuple[str, ...]
    adjusted_r_squared: float
    sigma2_country: float
    sigma2_idio: float
    rho_share: float      # sigma2_country / (sigma2_country + sigma2_idio)
    rho_ratio: float      # sigma2_country / sigma2_idio
    theta: Mapping[str, float]
    n_cells: int
    n_countries: int
    weighted: bool
    weight_mode: str
    clamped: bool
    dropped_columns: tuple[str, ...]
    n_dropped_rows: int
    stationarity_note: str = ""

    def coefficient(self, term: str) -> float:
        return float(self.coefficients[self.columns.index(term)])


def re_egls_fit(panel: PanelData, weighted: bool = False,
                weight_mode: str = "multiply",
                trend_base: str = "log10") -> PanelFit:
    """Random-effects EGLS over the panel cells (see module docstring)."""
    if weight_mode not in ("multiply", "wls"):
        raise ValueError(f"unknown weight mode {weight_mode!r}")
    if trend_base not in ("log10", "ln"):
        raise ValueError(f"unknown trend base {trend_base!r}")

    rows: list[list[float]] = []
    yvals: list[float] = []
    sizes: list[float] = []
    groups: list[str] = []
    n_dropped_rows = 0
    for cell in panel.cells:
        row = _cell_row(cell, trend_base)
        if row is None:
            n_dropped_rows += 1
            continue
        rows.append(row)
        yvals.append(cell.y)
        sizes.append(float(cell.n_ct))
        groups.append(cell.country)
    if not rows:
        raise ValueError("no usable panel cells")
    X = np.asarray(rows, dtype=float)
    y = np.asarray(yvals, dtype=float)
    n_ct = np.asarray(sizes, dtype=float)
    labels = list(PANEL_COLUMNS)

    if weighted:
        if weight_mode == "multiply":
            y = y * n_ct
            for name in CONTINUOUS_COLUMNS:
                j = labels.index(name)
                X[:, j] = X[:, j] * n_ct
        else:
            sw = np.sqrt(n_ct)
            y = y * sw
            X = X * sw[:, None]

    keep = []
    dropped: list[str] = []
    for j, name in enumerate(labels):
        col = X[:, j]
        if name != CONST and float(col.max()) == float(col.min()):
            dropped.append(name)
        else:
            keep.append(j)
    X = X[:, keep]
    labels = [labels[j] for j in keep]
    X, labels, dep = _drop_dependent(X, labels)
    dropped.extend(dep)

    M, p = X.shape
    codes = sorted(set(groups))
    N = len(codes)
    index_of = {c: i for i, c in enumerate(codes)}
    g = np.asarray([index_of[c] for c in groups])
    T_c = np.bincount(g, minlength=N).astype(float)
    if M <= p + N:
        raise ValueError(f"{M} cells cannot support {p} columns "
                         f"and {N} country means")

    beta_pooled, _ = _qr_solve(X, y, labels)
    resid = y - X @ beta_pooled

    group_mean_resid = np.bincount(g, weights=resid, minlength=N) / T_c
    within_resid = resid - group_mean_resid[g]

    # count columns with any within-country variation (the country-fixed
    # ones and the constant carry none and drop out of the within df)
    Xbar = np.vstack([np.bincount(g, weights=X[:, j], minlength=N) / T_c
                      for j in range(p)]).T
    within_X = X - Xbar[g]
    k_within = int(np.sum(np.max(np.abs(within_X), axis=0) > 1e-10))
    df_within = M - N - k_within
    if df_within <= 0:
        raise ValueError("not enough cells for the within residual variance")
    sigma2_idio = float(within_resid @ within_resid) / df_within

    # columns flat within every country (constant, HDI, LTO) soak up
    # k_between of the N between degrees of freedom, for the country
    # effect and the averaged noise alike; dividing the between sum of
    # squares by N - k_between recenters the moment
    k_between = p - k_within
    df_between = N - k_between
    if df_between <= 0:
        raise ValueError(f"{N} countries cannot support {k_between} "
                         "country-level columns in the between variance")
    raw_between = float(np.sum(group_mean_resid ** 2)) / df_between \
        - sigma2_idio * float(np.mean(1.0 / T_c))
    clamped = raw_between < 0.0
    sigma2_country = max(0.0, raw_between)

    if sigma2_idio > 0.0:
        theta_by_code = 1.0 - np.sqrt(
            sigma2_idio / (sigma2_idio + T_c * sigma2_country))
    else:
        theta_by_code = np.ones(N)  # full demeaning when no noise variance

    ybar = np.bincount(g, weights=y, minlength=N) / T_c
    y_t = y - theta_by_code[g] * ybar[g]
    X_t = X - theta_by_code[g][:, None] * Xbar[g]

    beta, xtx_inv = _qr_solve(X_t, y_t, labels)
    fitted = X_t @ beta
    e = y_t - fitted
    rss = float(e @ e)
    df = M - p
    sigma2 = rss / df
    se = np.sqrt(np.maximum(sigma2 * np.diag(xtx_inv), 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0, beta / se, np.inf * np.sign(beta))
    pvals = 2.0 * _sps.t.sf(np.abs(t), df)
    tss = float(np.sum((y_t - y_t.mean()) ** 2))
    r2 = 1.0 - rss / tss if tss > 0 else math.nan
    adj = 1.0 - (1.0 - r2) * (M - 1) / df if not math.isnan(r2) else math.nan

    denom = sigma2_country + sigma2_idio
    return PanelFit(
        columns=tuple(labels), coefficients=beta, standard_errors=se,
        t_stats=t, p_values=pvals,
        stars=tuple(_stars(pv) for pv in pvals),
        adjusted_r_squared=adj,
        sigma2_country=sigma2_country, sigma2_idio=sigma2_idio,
        rho_share=sigma2_country / denom if denom > 0 else math.nan,
        rho_ratio=(sigma2_country / sigma2_idio if sigma2_idio > 0
                   else math.inf if sigma2_country > 0 else math.nan),
        theta={code: float(theta_by_code[i])
               for i, code in enumerate(codes)},
        n_cells=M, n_countries=N, weighted=weighted,
        weight_mode=weight_mode if weighted else "",
        clamped=clamped, dropped_columns=tuple(dropped),
        n_dropped_rows=n_dropped_rows)
