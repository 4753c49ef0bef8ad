"""Markov-versus-trend test for systemness in a category x year count matrix.

Each row of the matrix (a category) can be forecast from its own history,
or the whole column (a year) can be forecast as a reproduction of the
previous year's distribution. Whichever forecast generates less expected
information when the target year's observation arrives is the better
explanation. A positive ``info_trend - info_markov`` means the categories
develop as a system.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import HelixError, InsufficientHistoryError, ParseError
from .infotheory import expected_info

TREND_MODELS = ("log_linear", "linear")
DEFAULT_WINDOW = 2


@dataclass(frozen=True)
class CategorySeries:
    categories: tuple[str, ...]
    years: tuple[int, ...]
    counts: np.ndarray  # shape (len(years), len(categories))

    def __post_init__(self):
        cats = tuple(self.categories)
        years = tuple(int(y) for y in self.years)
        arr = np.array(self.counts, dtype=float)
        if arr.shape != (len(years), len(cats)):
            raise ValueError(
                f"counts shape {arr.shape} does not match {len(years)} years x {len(cats)} categories"
            )
        if len(set(cats)) != len(cats):
            raise ValueError("category labels must be unique")
        if any(b <= a for a, b in zip(years, years[1:])):
            raise ValueError("years must be strictly increasing")
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise ValueError("counts must be finite and non-negative")
        arr.setflags(write=False)
        object.__setattr__(self, "categories", cats)
        object.__setattr__(self, "years", years)
        object.__setattr__(self, "counts", arr)

    def row(self, year: int) -> np.ndarray:
        try:
            return self.counts[self.years.index(year)]
        except ValueError:
            raise InsufficientHistoryError(f"year {year} not in series") from None

    def restrict(self, subset: Sequence[str]) -> "CategorySeries":
        missing = [c for c in subset if c not in self.categories]
        if missing:
            raise HelixError(f"unknown categories {missing}; have {list(self.categories)}")
        idx = [self.categories.index(c) for c in subset]
        return CategorySeries(tuple(subset), self.years, self.counts[:, idx])

    def scaled(self, k: float) -> "CategorySeries":
        return CategorySeries(self.categories, self.years, self.counts * k)


def _shares(counts: np.ndarray) -> np.ndarray:
    total = math.fsum(counts)
    if total <= 0:
        raise HelixError("cannot form a distribution from an all-zero count vector")
    return counts / total


def predict_markov(series: CategorySeries, target_year: int) -> np.ndarray:
    """The previous year's category shares, carried forward unchanged."""
    prior = series.row(target_year - 1)
    if math.fsum(prior) <= 0:
        raise HelixError(f"year {target_year - 1} has zero total; no Markov prediction")
    return _shares(prior)


def _fit_line(x: np.ndarray, y: np.ndarray, at: float) -> float:
    if len(x) == 2:
        # exact two-point continuation
        return y[1] + (y[1] - y[0]) * (at - x[1]) / (x[1] - x[0])
    slope, intercept = np.polyfit(x, y, 1)
    return intercept + slope * at


def trend_counts(
    series: CategorySeries,
    target_year: int,
    model: str = "log_linear",
    window: int = DEFAULT_WINDOW,
) -> np.ndarray:
    """Per-category extrapolated counts for ``target_year`` (not normalized).

    Each category is fit over the years in ``[target_year - window,
    target_year - 1]``. ``log_linear`` fits log(count) against year, i.e.
    constant geometric growth; a category with a zero inside the window
    has no logarithm and is extrapolated linearly instead. Negative
    extrapolations are clamped to 0.
    """
    if model not in TREND_MODELS:
        raise ValueError(f"trend model must be one of {TREND_MODELS}, got {model!r}")
    if window < 2:
        raise InsufficientHistoryError("trend window must cover at least 2 years")
    idx = [k for k, y in enumerate(series.years) if target_year - window <= y < target_year]
    if len(idx) < 2:
        raise InsufficientHistoryError(
            f"need at least 2 years in [{target_year - window}, {target_year - 1}], found {len(idx)}"
        )
    x = np.array([series.years[k] for k in idx], dtype=float)
    hist = series.counts[idx]
    out = np.empty(hist.shape[1])
    for j in range(hist.shape[1]):
        y = hist[:, j]
        if model == "log_linear" and np.all(y > 0):
            if len(x) == 2:
                # geometric continuation without a log/exp round trip
                out[j] = y[1] * (y[1] / y[0]) ** ((target_year - x[1]) / (x[1] - x[0]))
            else:
                out[j] = math.exp(_fit_line(x, np.log(y), target_year))
        else:
            out[j] = _fit_line(x, y, target_year)
    return np.clip(out, 0.0, None)


def predict_trend(
    series: CategorySeries,
    target_year: int,
    model: str = "log_linear",
    window: int = DEFAULT_WINDOW,
) -> np.ndarray:
    counts = trend_counts(series, target_year, model, window)
    if math.fsum(counts) <= 0:
        raise HelixError("every category extrapolates to zero")
    return _shares(counts)


@dataclass(frozen=True)
class SubsetScore:
    subset: tuple[str, ...]
    info_trend_mbits: float
    info_markov_mbits: float

    @property
    def systemness_mbits(self) -> float:
        return self.info_trend_mbits - self.info_markov_mbits

    @property
    def verdict(self) -> str:
        return "corroborated" if self.systemness_mbits > 0 else "rejected"


@dataclass(frozen=True)
class SystemnessReport:
    target_year: int
    scores: tuple[SubsetScore, ...]
    model: str = "log_linear"
    window: int = DEFAULT_WINDOW
    alpha: float | None = None


def _score(observed, trend, markov, alpha):
    if alpha is None:
        return (
            expected_info(_shares(observed), _shares(trend)),
            expected_info(_shares(observed), _shares(markov)),
        )
    return expected_info(observed, trend, alpha), expected_info(observed, markov, alpha)


def systemness_test(
    series: CategorySeries,
    target_year: int,
    subsets: Iterable[Sequence[str]] | None = None,
    model: str = "log_linear",
    window: int = DEFAULT_WINDOW,
    alpha: float | None = None,
) -> SystemnessReport:
    """Score trend and Markov forecasts of ``target_year`` per category subset.

    Observation and both predictions are restricted to the subset and
    renormalized before comparison. Trend forecasts extrapolate counts and
    normalize afterwards. ``alpha`` enables additive smoothing of all three
    count vectors (see :func:`~triplehelix.infotheory.expected_info`).
    """
    subsets = [tuple(series.categories)] if subsets is None else [tuple(s) for s in subsets]
    scores = []
    for subset in subsets:
        sub = series.restrict(subset)
        observed = sub.row(target_year)
        if math.fsum(observed) <= 0:
            raise HelixError(f"subset {','.join(subset)}: no observations in {target_year}")
        markov_counts = sub.row(target_year - 1)
        if math.fsum(markov_counts) <= 0:
            raise HelixError(f"subset {','.join(subset)}: zero total in {target_year - 1}")
        trend = trend_counts(sub, target_year, model, window)
        if math.fsum(trend) <= 0:
            raise HelixError(f"subset {','.join(subset)}: every category extrapolates to zero")
        info_trend, info_markov = _score(observed, trend, markov_counts, alpha)
        scores.append(SubsetScore(subset, info_trend, info_markov))
    return SystemnessReport(target_year, tuple(scores), model, window, alpha)


@dataclass(frozen=True)
class RowColumnForecast:
    categories: tuple[str, ...]
    target_year: int
    trend_counts: np.ndarray
    markov: np.ndarray
    # per-category terms of the expected information, filled in by compare()
    contributions: dict = field(default_factory=dict)

    @property
    def trend(self) -> np.ndarray:
        return _shares(self.trend_counts)

    def compare(self, observed_counts) -> dict[str, tuple[float, float]]:
        """Per-category millibit terms ``q log2(q/p)`` for (trend, markov).

        Terms can be negative individually; they sum to the two expected
        information values. Categories with large trend terms are poorly
        explained by their own history, and likewise for Markov.
        """
        q = _shares(np.asarray(observed_counts, dtype=float))
        out = {}
        for c, qi, pt, pm in zip(self.categories, q, self.trend, self.markov):
            if qi == 0:
                out[c] = (0.0, 0.0)
                continue
            t = math.inf if pt == 0 else 1000 * qi * math.log2(qi / pt)
            m = math.inf if pm == 0 else 1000 * qi * math.log2(qi / pm)
            out[c] = (t, m)
        return out


def row_column_forecast(
    series: CategorySeries,
    target_year: int,
    model: str = "log_linear",
    window: int = DEFAULT_WINDOW,
) -> RowColumnForecast:
    """Both raw forecasts of ``target_year``: one per row, one per column."""
    return RowColumnForecast(
        categories=series.categories,
        target_year=target_year,
        trend_counts=trend_counts(series, target_year, model, window),
        markov=predict_markov(series, target_year),
    )


# -- CSV ------------------------------------------------------------------------

REPORT_COLUMNS = ("subset", "info_trend_mbits", "info_markov_mbits", "systemness_mbits", "verdict")


def read_series_csv(path) -> CategorySeries:
    """First column is the year, every further column one category."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", 1, str(path)) from None
        if len(header) < 2 or header[0].strip().lower() != "year":
            raise ParseError("header must be year,<category>,...", 1, str(path))
        cats = [h.strip() for h in header[1:]]
        years, rows = [], []
        for lineno, rec in enumerate(reader, start=2):
            if not rec or not any(f.strip() for f in rec):
                continue
            if len(rec) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(rec)}", lineno, str(path))
            try:
                years.append(int(rec[0]))
                rows.append([float(v) for v in rec[1:]])
            except ValueError as exc:
                raise ParseError(str(exc), lineno, str(path)) from None
    try:
        return CategorySeries(tuple(cats), tuple(years), np.array(rows, dtype=float).reshape(len(years), len(cats)))
    except ValueError as exc:
        raise ParseError(str(exc), None, str(path)) from None


def write_series_csv(series: CategorySeries, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["year", *series.categories])
    for y, row in zip(series.years, series.counts):
        w.writerow([y, *(int(v) if float(v).is_integer() else repr(float(v)) for v in row)])


def write_report_csv(report: SystemnessReport, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for s in report.scores:
        w.writerow(
            [
                ",".join(s.subset),
                f"{s.info_trend_mbits:.2f}",
                f"{s.info_markov_mbits:.2f}",
                f"{s.systemness_mbits:.2f}",
                s.verdict,
            ]
        )
