"""Contingency cubes and indicator rows for university-industry-government data.

Two inputs feed the same machinery: classified document corpora (each
document profiled by which sectors appear among its addresses) and
inclusive hit counts, as returned by a search engine for the three terms
and their AND-combinations. Both end up as seven mutually exclusive Venn
cells whose union is the sample space.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .classifier import DEFAULT_RULES, RuleSet, SectorProfile, profile_document
from .corpus import Document
from .errors import HelixError, InconsistentCountsError, ParseError, UnknownSliceError
from .infotheory import ContingencyCube, TransmissionReport, transmission3

CELL_NAMES = ("u_only", "i_only", "g_only", "ui", "ug", "ig", "uig")
CELL_INDEX = {
    "u_only": (1, 0, 0),
    "i_only": (0, 1, 0),
    "g_only": (0, 0, 1),
    "ui": (1, 1, 0),
    "ug": (1, 0, 1),
    "ig": (0, 1, 1),
    "uig": (1, 1, 1),
}

ALL = "all"
INTERNATIONAL = "internationally coauthored"
_SLICE_SYNONYMS = {
    "internat": INTERNATIONAL,
    "international": INTERNATIONAL,
    "internat. coauthored": INTERNATIONAL,
    "internationally coauthored": INTERNATIONAL,
    "intl": INTERNATIONAL,
    "all": ALL,
}

#: EU membership in 2000 (EU-15) and the Nordic block.
DEFAULT_AGGREGATES: dict[str, frozenset[str]] = {
    "EU": frozenset(
        {
            "AUSTRIA", "BELGIUM", "DENMARK", "FINLAND", "FRANCE", "GERMANY", "GREECE",
            "IRELAND", "ITALY", "LUXEMBOURG", "NETHERLANDS", "PORTUGAL", "SPAIN",
            "SWEDEN", "UK",
        }
    ),
    "SCAND": frozenset({"DENMARK", "FINLAND", "NORWAY", "SWEDEN", "ICELAND"}),
}

#: Abbreviated slice names accepted for countries.
COUNTRY_SLICE_ALIASES = {"NETHERL": "NETHERLANDS"}


@dataclass(frozen=True)
class VennCells:
    u_only: float = 0
    i_only: float = 0
    g_only: float = 0
    ui: float = 0
    ug: float = 0
    ig: float = 0
    uig: float = 0

    def __post_init__(self):
        for name in CELL_NAMES:
            if getattr(self, name) < 0:
                raise InconsistentCountsError(name, getattr(self, name))

    @property
    def union(self):
        return sum(getattr(self, n) for n in CELL_NAMES)

    @property
    def univ_total(self):
        return self.u_only + self.ui + self.ug + self.uig

    @property
    def ind_total(self):
        return self.i_only + self.ui + self.ig + self.uig

    @property
    def gov_total(self):
        return self.g_only + self.ug + self.ig + self.uig

    def as_dict(self) -> dict:
        return {n: getattr(self, n) for n in CELL_NAMES}

    def to_cube(self, unidentified=0) -> ContingencyCube:
        cells = {CELL_INDEX[n]: getattr(self, n) for n in CELL_NAMES}
        cells[(0, 0, 0)] = unidentified
        return ContingencyCube.from_cells(cells)

    @classmethod
    def from_cube(cls, cube: ContingencyCube) -> "VennCells":
        c = cube.counts
        return cls(**{n: _num(c[CELL_INDEX[n]]) for n in CELL_NAMES})

    @classmethod
    def from_table_row(cls, ui, ug, ig, uig, univ, industry, govern) -> "VennCells":
        """Recover exclusive cells from a row holding exclusive pair/triple
        cells plus inclusive per-sector totals, as in the report row layout."""
        return cls(
            u_only=univ - ui - ug - uig,
            i_only=industry - ui - ig - uig,
            g_only=govern - ug - ig - uig,
            ui=ui,
            ug=ug,
            ig=ig,
            uig=uig,
        )


def _num(x):
    x = float(x)
    return int(x) if x.is_integer() else x


@dataclass(frozen=True)
class YearlyHits:
    """Inclusive counts for one year: u means "contains u", ui "u AND i"."""

    year: int
    u: float
    i: float
    g: float
    ui: float
    ug: float
    ig: float
    uig: float


@dataclass(frozen=True)
class HelixRow:
    slice_name: str
    number: float
    total: float
    pct_identified: float
    t_uig_mbits: float | None
    cells: VennCells
    excluded: float = 0
    report: TransmissionReport | None = None

    @property
    def univ_total(self):
        return self.cells.univ_total

    @property
    def ind_total(self):
        return self.cells.ind_total

    @property
    def gov_total(self):
        return self.cells.gov_total

    @property
    def undefined(self) -> bool:
        return self.t_uig_mbits is None


def cube_from_profiles(
    profiles: Iterable[SectorProfile], include_unidentified: bool = False
) -> tuple[ContingencyCube, int]:
    """Count profiles into a 2x2x2 cube.

    Returns the cube and the number of unidentified profiles. Those are
    left out (cell (0,0,0) stays 0) unless ``include_unidentified`` is set.
    """
    counts = np.zeros((2, 2, 2))
    for p in profiles:
        counts[int(p.has_u), int(p.has_i), int(p.has_g)] += 1
    excluded = int(counts[0, 0, 0])
    if not include_unidentified:
        counts[0, 0, 0] = 0
    return ContingencyCube(counts), excluded


def venn_from_inclusive(h: YearlyHits) -> VennCells:
    """Exclusive Venn cells from inclusive counts by inclusion-exclusion.

    Raises :class:`InconsistentCountsError` naming the first negative cell.
    """
    derived = {
        "uig": h.uig,
        "ui": h.ui - h.uig,
        "ug": h.ug - h.uig,
        "ig": h.ig - h.uig,
        "u_only": h.u - h.ui - h.ug + h.uig,
        "i_only": h.i - h.ui - h.ig + h.uig,
        "g_only": h.g - h.ug - h.ig + h.uig,
    }
    year = getattr(h, "year", None)
    for name in ("uig", "ui", "ug", "ig", "u_only", "i_only", "g_only"):
        if derived[name] < 0:
            raise InconsistentCountsError(name, derived[name], year)
    return VennCells(**derived)


def inclusive_from_venn(cells: VennCells, year: int = 0) -> YearlyHits:
    return YearlyHits(
        year=year,
        u=cells.univ_total,
        i=cells.ind_total,
        g=cells.gov_total,
        ui=cells.ui + cells.uig,
        ug=cells.ug + cells.uig,
        ig=cells.ig + cells.uig,
        uig=cells.uig,
    )


def row_from_cells(
    name: str, cells: VennCells, total=None, include_unidentified=False
) -> HelixRow:
    """Indicator row for given exclusive cells.

    ``total`` is the number of records in the slice (identified or not);
    it defaults to the union, i.e. 100% identified.
    """
    number = cells.union
    total = number if total is None else total
    excluded = total - number
    if excluded < 0:
        raise HelixError(f"slice {name}: total {total} smaller than identified {number}")
    pct = round(100.0 * number / total, 1) if total else 0.0
    cube = cells.to_cube(excluded if include_unidentified else 0)
    report = transmission3(cube) if cube.n > 0 else None
    return HelixRow(
        slice_name=name,
        number=number,
        total=total,
        pct_identified=pct,
        t_uig_mbits=report.t_uig_mbits if report else None,
        cells=cells,
        excluded=excluded,
        report=report,
    )


class SliceResolver:
    """Decides which documents fall into a named slice."""

    def __init__(self, aggregates: Mapping[str, Iterable[str]] | None = None):
        aggs = DEFAULT_AGGREGATES if aggregates is None else aggregates
        self.aggregates = {k.upper(): frozenset(c.upper() for c in v) for k, v in aggs.items()}

    @classmethod
    def from_csv(cls, path) -> "SliceResolver":
        """Aggregate file: CSV with columns aggregate,country."""
        aggs: dict[str, set[str]] = {}
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"aggregate", "country"} <= set(reader.fieldnames):
                raise ParseError("aggregate file needs columns aggregate,country", 1, str(path))
            for row in reader:
                aggs.setdefault(row["aggregate"].strip(), set()).add(row["country"].strip())
        return cls(aggs)

    def known(self, documents: Sequence[Document] = ()) -> set[str]:
        names = {ALL, INTERNATIONAL} | set(self.aggregates)
        for members in self.aggregates.values():
            names |= members
        for d in documents:
            names |= d.countries
        return names

    def canonical(self, name: str, documents: Sequence[Document] = ()) -> str:
        key = name.strip()
        if key.lower() in _SLICE_SYNONYMS:
            return _SLICE_SYNONYMS[key.lower()]
        key = COUNTRY_SLICE_ALIASES.get(key.upper(), key.upper())
        if key not in self.known(documents):
            raise UnknownSliceError(name, self.known(documents))
        return key

    def predicate(self, name: str, documents: Sequence[Document] = ()):
        key = self.canonical(name, documents)
        if key == ALL:
            return lambda d: bool(d.addresses)
        if key == INTERNATIONAL:
            return lambda d: len(d.countries) >= 2
        if key in self.aggregates:
            members = self.aggregates[key]
            return lambda d: not members.isdisjoint(d.countries)
        return lambda d: key in d.countries


def helix_report(
    documents: Sequence[Document],
    rules: RuleSet = DEFAULT_RULES,
    slice: str = ALL,
    aggregates: SliceResolver | Mapping | None = None,
    include_unidentified: bool = False,
    mode: str = "token",
) -> HelixRow:
    """One indicator row for a slice of the corpus.

    Only documents with at least one address enter a slice. The identified
    share is identified / documents-in-slice. T(uig) is computed on the
    identified records alone unless ``include_unidentified`` adds the rest
    as cell (0,0,0). An empty slice yields a row with ``t_uig_mbits=None``.
    """
    resolver = aggregates if isinstance(aggregates, SliceResolver) else SliceResolver(aggregates)
    keep = resolver.predicate(slice, documents)
    selected = [d for d in documents if keep(d)]
    profiles = [profile_document(d, rules, mode) for d in selected]
    cube, excluded = cube_from_profiles(profiles)
    cells = VennCells.from_cube(cube)
    name = resolver.canonical(slice, documents)
    return row_from_cells(name, cells, total=len(selected), include_unidentified=include_unidentified)


def country_counts(documents: Iterable[Document], mode: str = "integer") -> dict[str, float]:
    """Documents per country.

    ``integer`` credits each distinct country on a document with 1.
    ``fractional`` splits one unit per document over its countries in
    proportion to their share of its addresses (addresses without a
    resolvable country do not count toward the share).
    """
    if mode not in ("integer", "fractional"):
        raise ValueError(f"counting mode must be integer or fractional, got {mode!r}")
    totals: dict[str, float] = {}
    for doc in documents:
        if mode == "integer":
            for c in doc.countries:
                totals[c] = totals.get(c, 0) + 1
            continue
        per = Counter(a.country for a in doc.addresses if a.country)
        n = sum(per.values())
        for c, k in per.items():
            totals[c] = totals.get(c, 0.0) + k / n
    return dict(sorted(totals.items()))


def t_trajectory(series: Sequence[YearlyHits]) -> list[tuple[int, float]]:
    """T(uig) in millibits per year, using the union as sample space."""
    out = []
    prev = None
    for h in series:
        if prev is not None and h.year <= prev:
            raise HelixError(f"years must be strictly increasing ({prev} then {h.year})")
        prev = h.year
        cells = venn_from_inclusive(h)
        if cells.union <= 0:
            raise HelixError(f"year {h.year}: no hits at all")
        out.append((h.year, transmission3(cells.to_cube()).t_uig_mbits))
    return out


@dataclass(frozen=True)
class TrendFit:
    slope: float
    intercept: float
    r_squared: float


def linear_trend(trajectory: Sequence[tuple[int, float]], from_year: int | None = None) -> TrendFit:
    """Ordinary least squares of T against year over ``year >= from_year``."""
    pts = [(y, t) for y, t in trajectory if from_year is None or y >= from_year]
    if len(pts) < 2:
        raise HelixError(f"linear_trend needs at least 2 points, got {len(pts)}")
    x = np.array([p[0] for p in pts], dtype=float)
    y = np.array([p[1] for p in pts], dtype=float)
    if np.ptp(x) == 0:
        raise HelixError("linear_trend needs at least 2 distinct years")
    xm, ym = x.mean(), y.mean()
    sxx = math.fsum((x - xm) ** 2)
    slope = math.fsum((x - xm) * (y - ym)) / sxx
    intercept = ym - slope * xm
    resid = y - (intercept + slope * x)
    ss_res = math.fsum(resid**2)
    ss_tot = math.fsum((y - ym) ** 2)
    if ss_tot == 0 or len(pts) == 2:
        r2 = 1.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return TrendFit(slope, intercept, r2)


# -- CSV interfaces -----------------------------------------------------------

HITS_COLUMNS = ("year", "u", "i", "g", "ui", "ug", "ig", "uig")
ROW_COLUMNS = (
    "slice", "number", "pct_identified", "t_uig_mbits",
    "ui", "ug", "ig", "uig", "univ", "industry", "govern",
)


def _parse_number(text, lineno, source, column):
    try:
        v = float(text)
    except (TypeError, ValueError):
        raise ParseError(f"column {column}: not a number: {text!r}", lineno, source) from None
    if not math.isfinite(v):
        raise ParseError(f"column {column}: not finite", lineno, source)
    return int(v) if v.is_integer() else v


def read_hits_csv(path) -> list[YearlyHits]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not set(HITS_COLUMNS) <= {f.strip() for f in reader.fieldnames}:
            raise ParseError(f"header must be {','.join(HITS_COLUMNS)}", 1, str(path))
        for lineno, row in enumerate(reader, start=2):
            row = {k.strip(): v for k, v in row.items()}
            vals = {c: _parse_number(row[c], lineno, str(path), c) for c in HITS_COLUMNS}
            if vals["year"] != int(vals["year"]):
                raise ParseError("year must be an integer", lineno, str(path))
            vals["year"] = int(vals["year"])
            out.append(YearlyHits(**vals))
    return out


def write_hits_csv(series: Iterable[YearlyHits], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(HITS_COLUMNS)
    for h in series:
        w.writerow([h.year, h.u, h.i, h.g, h.ui, h.ug, h.ig, h.uig])


def format_mbits(v) -> str:
    return "NA" if v is None else f"{v:.1f}"


def _fmt_count(v) -> str:
    return str(int(v)) if float(v).is_integer() else f"{v:.6f}"


def write_rows_csv(rows: Iterable[HelixRow], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(ROW_COLUMNS)
    for r in rows:
        c = r.cells
        w.writerow(
            [
                r.slice_name, _fmt_count(r.number), f"{r.pct_identified:.1f}",
                format_mbits(r.t_uig_mbits),
                _fmt_count(c.ui), _fmt_count(c.ug), _fmt_count(c.ig), _fmt_count(c.uig),
                _fmt_count(r.univ_total), _fmt_count(r.ind_total), _fmt_count(r.gov_total),
            ]
        )


def read_rows_csv(path) -> list[tuple[str, VennCells]]:
    """Read a HelixRow CSV back into (slice, exclusive cells) pairs."""
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        need = {"slice", "ui", "ug", "ig", "uig", "univ", "industry", "govern"}
        if reader.fieldnames is None or not need <= set(reader.fieldnames):
            raise ParseError(f"header must include {','.join(ROW_COLUMNS)}", 1, str(path))
        for lineno, row in enumerate(reader, start=2):
            vals = {k: _parse_number(row[k], lineno, str(path), k) for k in need - {"slice"}}
            try:
                cells = VennCells.from_table_row(**vals)
            except InconsistentCountsError as exc:
                raise ParseError(str(exc), lineno, str(path)) from None
            out.append((row["slice"], cells))
    return out


def write_trajectory_csv(traj, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["year", "t_mbits"])
    for year, t in traj:
        w.writerow([year, format_mbits(t)])


def write_trend_csv(fit: TrendFit, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["slope", "intercept", "r2"])
    w.writerow([f"{fit.slope:.6f}", f"{fit.intercept:.6f}", f"{fit.r_squared:.6f}"])
