"""Seeded synthetic corpora, profiles and series with known ground truth.

Randomness comes from numpy's PCG64 bit generator, seeded explicitly, so
the same spec and seed give the same bytes. Exact-allocation mode replaces
sampling by largest-remainder rounding of ``n * p`` per cell; published tables
can then be embedded as fixtures with no sampling noise.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np
from scipy.optimize import brentq

from .classifier import DEFAULT_RULES, SectorLabel, SectorProfile
from .corpus import Address, Document, tokenize
from .errors import HelixError
from .helix import CELL_INDEX, CELL_NAMES, VennCells, YearlyHits, inclusive_from_venn
from .infotheory import ContingencyCube, transmission3
from .systemness import CategorySeries

CELLS = tuple(itertools.product((0, 1), repeat=3))
COUPLINGS = ("independent", "coordinated", "bilateral_xor", "explicit_cube")
REGIMES = ("markov_stationary", "independent_trends", "linear_T_decline")
LABELS3 = (SectorLabel.UNIVERSITY, SectorLabel.INDUSTRY, SectorLabel.GOVERNMENT)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


def largest_remainder(n: int, weights) -> np.ndarray:
    """Integers summing to ``n``, proportional to ``weights``.

    Ties in the remainders go to the lower index, so the result is fully
    deterministic.
    """
    w = np.asarray(weights, dtype=float)
    if n < 0 or np.any(w < 0) or w.sum() <= 0:
        raise HelixError("largest_remainder needs n >= 0 and non-negative weights with positive sum")
    quotas = n * w / w.sum()
    base = np.floor(quotas).astype(np.int64)
    short = n - int(base.sum())
    order = sorted(range(len(w)), key=lambda k: (-(quotas[k] - base[k]), k))
    for k in order[:short]:
        base[k] += 1
    return base


@dataclass(frozen=True)
class CorpusSpec:
    """What to generate.

    ``n_documents`` counts documents with at least one address; cell
    (0,0,0) of the joint yields documents whose addresses are all
    unidentified. ``n_without_address`` adds address-less records on top.
    ``extra_addresses`` (label value -> count) distributes surplus addresses
    over documents that already carry that label, leaving profiles intact.
    """

    n_documents: int
    years: tuple[int, int] = (2000, 2000)
    p_u: float = 0.5
    p_i: float = 0.5
    p_g: float = 0.5
    coupling: str = "independent"
    rho: float = 0.0
    cube_weights: Mapping[tuple[int, int, int], float] | None = None
    countries: Mapping[str, float] = field(default_factory=lambda: {"USA": 1.0})
    p_international: float = 0.0
    n_without_address: int = 0
    extra_addresses: Mapping[str, int] = field(default_factory=dict)
    exact: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.n_documents < 0 or self.n_without_address < 0:
            raise HelixError("document counts must be non-negative")
        for name in ("p_u", "p_i", "p_g", "rho", "p_international"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise HelixError(f"{name}={v} outside [0, 1]")
        if self.coupling not in COUPLINGS:
            raise HelixError(f"unknown coupling {self.coupling!r}; expected one of {COUPLINGS}")
        if self.coupling == "explicit_cube":
            if not self.cube_weights:
                raise HelixError("explicit_cube coupling needs cube_weights")
            if any(w < 0 for w in self.cube_weights.values()) or sum(self.cube_weights.values()) <= 0:
                raise HelixError("cube weights must be non-negative, not all zero")
            if any(tuple(c) not in CELLS for c in self.cube_weights):
                raise HelixError("cube weight keys must be (u, i, g) 0/1 triples")
        if not self.countries or any(w < 0 for w in self.countries.values()) or sum(self.countries.values()) <= 0:
            raise HelixError("country weights must be non-negative, not all zero")
        if self.p_international > 0 and len(self.countries) < 2:
            raise HelixError("international coauthorship needs at least two countries")
        idents = set().union(*(ids for _, ids in DEFAULT_RULES.tiers))
        for c in self.countries:
            if set(tokenize(c)) & idents:
                raise HelixError(f"country name {c!r} contains a sector identifier token")
        if self.years[0] > self.years[1]:
            raise HelixError("year range is reversed")
        for label, k in self.extra_addresses.items():
            SectorLabel.parse(label)
            if k < 0:
                raise HelixError("extra address counts must be non-negative")


def joint_distribution(spec: CorpusSpec) -> np.ndarray:
    """The 2x2x2 probability array a CorpusSpec describes."""
    p = np.zeros((2, 2, 2))
    if spec.coupling in ("independent", "coordinated"):
        for c in CELLS:
            p[c] = math.prod(q if b else 1 - q for q, b in zip((spec.p_u, spec.p_i, spec.p_g), c))
        if spec.coupling == "coordinated":
            full = np.zeros((2, 2, 2))
            full[0, 0, 0] = full[1, 1, 1] = 0.5
            p = (1 - spec.rho) * p + spec.rho * full
    elif spec.coupling == "bilateral_xor":
        for c in CELLS:
            if sum(c) % 2 == 0:
                p[c] = 0.25
    else:
        for c, w in spec.cube_weights.items():
            p[tuple(c)] = w
        p = p / p.sum()
    return p


@dataclass(frozen=True)
class GeneratedProfiles:
    profiles: list[SectorProfile]
    cube: ContingencyCube  # realized counts, cell (0,0,0) included
    joint: np.ndarray  # generating probabilities


def _draw_cells(spec: CorpusSpec, rng) -> list[tuple[int, int, int]]:
    joint = joint_distribution(spec).ravel()
    if spec.exact:
        alloc = largest_remainder(spec.n_documents, joint)
        cells = [CELLS[k] for k, m in enumerate(alloc) for _ in range(m)]
        order = rng.permutation(len(cells))
        return [cells[k] for k in order]
    idx = rng.choice(8, size=spec.n_documents, p=joint)
    return [CELLS[k] for k in idx]


def gen_profiles(spec: CorpusSpec) -> GeneratedProfiles:
    rng = make_rng(spec.seed)
    cells = _draw_cells(spec, rng)
    counts = np.zeros((2, 2, 2))
    for c in cells:
        counts[c] += 1
    return GeneratedProfiles(
        [SectorProfile.from_cell(c) for c in cells],
        ContingencyCube(counts),
        joint_distribution(spec),
    )


_INSTITUTIONS = {
    SectorLabel.UNIVERSITY: ("UNIV {city}", "COLL MED {city}", "UNIV {city}, DEPT PHYS"),
    SectorLabel.INDUSTRY: ("{city} PHARM CORP", "ELECTR LTD {city}", "MAT RES INC"),
    SectorLabel.GOVERNMENT: ("NATL LAB {city}", "INST APPL RES", "MINIST HLTH, {city}"),
    SectorLabel.UNIDENTIFIED: ("RES CTR {city}", "PRIVATE CLIN {city}", "FDN MOL MED"),
}
_CITIES = ("NORTHTOWN", "RIVERSIDE", "LAKEVIEW", "HILLCREST", "EASTPORT", "WESTFIELD")


def _address(label: SectorLabel, country: str, k: int) -> str:
    return _address_text(label, country, k % 6)


@functools.lru_cache(maxsize=4096)
def _address_text(label, country, k):
    tmpl = _INSTITUTIONS[label][k % 3]
    return f"{tmpl.format(city=_CITIES[k % len(_CITIES)])}, {country}"


def _assign(n: int, weights: Mapping[str, float], exact: bool, rng) -> list[str]:
    names = list(weights)
    w = np.array([weights[c] for c in names], dtype=float)
    if exact:
        alloc = largest_remainder(n, w)
        out = [names[k] for k, m in enumerate(alloc) for _ in range(m)]
        return [out[k] for k in rng.permutation(n)]
    return [names[k] for k in rng.choice(len(names), size=n, p=w / w.sum())]


def _raw_documents(spec: CorpusSpec):
    rng = make_rng(spec.seed)
    cells = _draw_cells(spec, rng)
    n = len(cells)
    countries = _assign(n, spec.countries, spec.exact, rng)
    y0, y1 = spec.years
    if spec.exact:
        years = [y0 + k % (y1 - y0 + 1) for k in range(n)]
    else:
        years = [int(y) for y in rng.integers(y0, y1 + 1, size=n)]
    if spec.exact:
        intl = set(int(k) for k in rng.permutation(n)[: round(spec.p_international * n)])
    else:
        intl = set(int(k) for k in np.nonzero(rng.random(n) < spec.p_international)[0])
    names = list(spec.countries)

    labels_per_doc: list[list[SectorLabel]] = []
    for c in cells:
        labs = [lab for lab, b in zip(LABELS3, c) if b] or [SectorLabel.UNIDENTIFIED]
        labels_per_doc.append(labs)

    # surplus addresses, round robin over eligible documents
    extras: list[list[SectorLabel]] = [[] for _ in range(n)]
    for key, count in spec.extra_addresses.items():
        label = SectorLabel.parse(key)
        if label is SectorLabel.UNIDENTIFIED:
            eligible = list(range(n))
        else:
            eligible = [k for k in range(n) if label in labels_per_doc[k]]
        if count and not eligible:
            raise HelixError(f"no document carries label {label.value} for extra addresses")
        for j in range(count):
            extras[eligible[j % len(eligible)]].append(label)

    width = max(7, len(str(n + spec.n_without_address)))
    raws = []
    for k in range(n):
        country = countries[k]
        addrs = [_address(lab, country, k + j) for j, lab in enumerate(labels_per_doc[k] + extras[k])]
        if k in intl:
            other = names[(names.index(country) + 1 + k % (len(names) - 1)) % len(names)]
            addrs.append(_address(labels_per_doc[k][0], other, k + 7))
        raws.append((f"SYN{spec.seed}-{k:0{width}d}", years[k], addrs))
    for j in range(spec.n_without_address):
        raws.append((f"SYN{spec.seed}-{n + j:0{width}d}", y0 + j % (y1 - y0 + 1), []))
    return raws, [SectorProfile.from_cell(c) for c in cells]


def gen_documents(spec: CorpusSpec) -> tuple[list[Document], list[SectorProfile]]:
    """Documents realizing drawn profiles, plus those profiles (address-less
    records excluded from the profile list)."""
    raws, profiles = _raw_documents(spec)
    docs = [
        Document(id=uid, year=year, addresses=tuple(Address.from_raw(a) for a in addrs))
        for uid, year, addrs in raws
    ]
    return docs, profiles


def gen_corpus(spec: CorpusSpec) -> str:
    """Record-format text for a generated corpus."""
    raws, _ = _raw_documents(spec)
    parts = []
    for uid, year, addrs in raws:
        parts.append(f"UT {uid}\nPY {year}\n")
        parts.extend(f"C1 {a}\n" for a in addrs)
        parts.append("ER\n\n")
    return "".join(parts)


# Reference profile of the SCI 2000 CD-ROM: 778,446 records, 53,092
# without address, 1,432,401 addresses.
SCI2000_ALL_CELLS = {
    (1, 0, 0): 412733,
    (0, 1, 0): 15412,
    (0, 0, 1): 113617,
    (1, 1, 0): 16270,
    (1, 0, 1): 108919,
    (0, 1, 1): 4359,
    (1, 1, 1): 5201,
}
SCI2000_ADDRESS_LABELS = {
    "University": 878427,
    "Industry": 46952,
    "Government": 314469,
    "Unidentified": 192553,
}


def sci2000_spec(seed: int = 2000, scale: float = 1.0) -> CorpusSpec:
    """Exact-allocation spec matching the SCI 2000 address and record counts.

    ``scale`` shrinks every count proportionally (rounded) for quick runs.
    """

    def s(x):
        return int(round(x * scale))

    cells = {c: s(v) for c, v in SCI2000_ALL_CELLS.items()}
    with_address = s(725354)
    cells[(0, 0, 0)] = with_address - sum(cells.values())
    minimal = {
        "University": sum(v for c, v in cells.items() if c[0]),
        "Industry": sum(v for c, v in cells.items() if c[1]),
        "Government": sum(v for c, v in cells.items() if c[2]),
        "Unidentified": cells[(0, 0, 0)],
    }
    extra = {k: s(v) - minimal[k] for k, v in SCI2000_ADDRESS_LABELS.items()}
    return CorpusSpec(
        n_documents=with_address,
        coupling="explicit_cube",
        cube_weights=cells,
        n_without_address=s(778446) - with_address,
        extra_addresses=extra,
        exact=True,
        seed=seed,
    )


# -- series -------------------------------------------------------------------


@dataclass(frozen=True)
class GeneratedSeries:
    regime: str
    seed: int
    series: CategorySeries | None = None
    hits: list[YearlyHits] | None = None
    target_t_mbits: list[float] | None = None


def _years(params) -> list[int]:
    y0, y1 = params.get("years", (1993, 2000))
    if y1 - y0 < 2:
        raise HelixError("series need at least three years")
    return list(range(int(y0), int(y1) + 1))


def gen_series(regime: str, params: Mapping | None = None, seed: int = 0) -> GeneratedSeries:
    """Generate a category series or yearly hits under a named regime.

    markov_stationary
        Fixed category shares, totals growing geometrically. With
        ``noise=True`` (default) each year is a multinomial draw of the
        year's total; without noise each year is an integer multiple of
        the base counts, so shares reproduce exactly.
    independent_trends
        Every category grows at its own rate (``rates`` or drawn uniformly
        from ``rate_range``); with noise, Poisson draws around the curve.
    linear_T_decline
        Yearly inclusive hit counts whose T(uig) falls linearly from
        ``t0`` by ``slope`` mbits per year, totals growing geometrically.

    Common params: ``years`` (first, last), ``n0`` first-year total,
    ``growth`` per-year factor, ``n_categories``, ``noise``.
    """
    params = dict(params or {})
    rng = make_rng(seed)
    years = _years(params)
    noise = bool(params.get("noise", True))
    n0 = float(params.get("n0", 10_000))
    growth = float(params.get("growth", 1.3))
    if n0 <= 0 or growth <= 0:
        raise HelixError("n0 and growth must be positive")

    if regime == "linear_T_decline":
        return _gen_t_decline(params, years, n0, growth, noise, rng, seed)

    k = int(params.get("n_categories", 7))
    if k < 1:
        raise HelixError("n_categories must be >= 1")
    labels = tuple(params.get("categories", [f"C{j + 1}" for j in range(k)]))
    if len(labels) != k:
        raise HelixError("categories must have n_categories labels")
    t = np.arange(len(years))

    if regime == "markov_stationary":
        shares = np.asarray(params.get("shares", rng.dirichlet(np.full(k, 2.0))), dtype=float)
        if shares.shape != (k,) or np.any(shares < 0) or shares.sum() <= 0:
            raise HelixError("shares must be k non-negative weights")
        shares = shares / shares.sum()
        totals = n0 * growth**t
        if noise:
            counts = np.array([rng.multinomial(int(round(m)), shares) for m in totals], dtype=float)
        else:
            base = largest_remainder(int(round(n0)), shares)
            mult = np.maximum(1, np.round(growth**t * 100)).astype(np.int64)
            counts = np.outer(mult, base).astype(float)
    elif regime == "independent_trends":
        lo, hi = params.get("rate_range", (0.9, 1.6))
        rates = np.asarray(params.get("rates", rng.uniform(lo, hi, size=k)), dtype=float)
        if rates.shape != (k,) or np.any(rates <= 0):
            raise HelixError("rates must be k positive growth factors")
        start = np.asarray(params.get("start", rng.dirichlet(np.full(k, 2.0)) * n0), dtype=float)
        mean = start[None, :] * rates[None, :] ** t[:, None]
        counts = rng.poisson(mean).astype(float) if noise else mean
    else:
        raise HelixError(f"unknown regime {regime!r}; expected one of {REGIMES}")
    return GeneratedSeries(regime, seed, series=CategorySeries(labels, tuple(years), counts))


_T_FAMILY_P = 0.9
_T_FAMILY_WMIN = 0.1


def _t_family(w: float) -> np.ndarray:
    """Seven-cell probabilities: a union-restricted independent cube with
    marginals 0.9 mixed with weight ``w`` into the pure-pairs pattern.
    T(uig) falls monotonically from about -1 to -415 mbits on [0.1, 1]."""
    p = np.zeros((2, 2, 2))
    for c in CELLS:
        if any(c):
            p[c] = math.prod(_T_FAMILY_P if b else 1 - _T_FAMILY_P for b in c)
    p /= p.sum()
    pairs = np.zeros((2, 2, 2))
    for c in ((1, 1, 0), (1, 0, 1), (0, 1, 1)):
        pairs[c] = 1 / 3
    return (1 - w) * p + w * pairs


def _t_of(w):
    return transmission3(ContingencyCube(_t_family(w))).t_uig_mbits


def cells_for_t(target_mbits: float) -> np.ndarray:
    """Seven-cell distribution (as a 2x2x2 array) with the requested T."""
    hi, lo = _t_of(_T_FAMILY_WMIN), _t_of(1.0)
    if not lo <= target_mbits <= hi:
        raise HelixError(f"target T {target_mbits} mbits outside reachable range [{lo:.1f}, {hi:.1f}]")
    w = brentq(lambda x: _t_of(x) - target_mbits, _T_FAMILY_WMIN, 1.0, xtol=1e-14)
    return _t_family(w)


def _gen_t_decline(params, years, n0, growth, noise, rng, seed) -> GeneratedSeries:
    t0 = float(params.get("t0", -30.0))
    slope = float(params.get("slope", -15.0))
    targets = [t0 + slope * (y - years[0]) for y in years]
    hits = []
    for j, (year, target) in enumerate(zip(years, targets)):
        probs = cells_for_t(target)
        flat = np.array([probs[CELL_INDEX[n]] for n in CELL_NAMES])
        total = int(round(n0 * growth**j))
        if noise:
            counts = rng.multinomial(total, flat)
        else:
            counts = largest_remainder(total, flat)
        cells = VennCells(**{n: int(v) for n, v in zip(CELL_NAMES, counts)})
        hits.append(inclusive_from_venn(cells, year))
    return GeneratedSeries("linear_T_decline", seed, hits=hits, target_t_mbits=targets)


def with_seed(spec: CorpusSpec, seed: int) -> CorpusSpec:
    return replace(spec, seed=seed)
