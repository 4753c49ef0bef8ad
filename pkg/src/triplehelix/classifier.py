"""Tiered attribution of addresses to university, industry or government.

Tiers are scanned in order and the first tier holding a matching identifier
wins, so an address carrying both ``UNIV`` and ``LTD`` is a university
address. Matching is on whole tokens by default; ``mode="substring"`` tests
identifiers against the raw uppercased address instead, which is only
meant for sensitivity checks (``US`` occurs inside many words).
"""

from __future__ import annotations

import csv
import enum
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .corpus import Address, Document
from .errors import ParseError

MATCH_MODES = ("token", "substring")


class SectorLabel(enum.Enum):
    UNIVERSITY = "University"
    INDUSTRY = "Industry"
    GOVERNMENT = "Government"
    UNIDENTIFIED = "Unidentified"

    @classmethod
    def parse(cls, text: str) -> "SectorLabel":
        key = text.strip().lower()
        for label in cls:
            if label.value.lower() == key or label.name.lower() == key or label.value[0].lower() == key:
                return label
        raise ValueError(f"unknown sector label {text!r}")


LABEL_ORDER = (
    SectorLabel.UNIVERSITY,
    SectorLabel.INDUSTRY,
    SectorLabel.GOVERNMENT,
    SectorLabel.UNIDENTIFIED,
)


@dataclass(frozen=True)
class RuleSet:
    tiers: tuple[tuple[SectorLabel, frozenset[str]], ...]

    def __post_init__(self):
        tiers = []
        for label, idents in self.tiers:
            if label is SectorLabel.UNIDENTIFIED:
                raise ValueError("a tier cannot assign the Unidentified label")
            idents = frozenset(i.strip().upper() for i in idents)
            if not all(idents):
                raise ValueError("identifiers must be non-empty")
            tiers.append((label, idents))
        object.__setattr__(self, "tiers", tuple(tiers))

    @classmethod
    def from_csv(cls, path) -> "RuleSet":
        """Load ``tier_index,label,identifier`` rows; tiers sort by index."""
        grouped: dict[int, tuple[SectorLabel, set[str]]] = {}
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            need = {"tier_index", "label", "identifier"}
            if reader.fieldnames is None or not need <= set(reader.fieldnames):
                raise ParseError("rule file needs columns tier_index,label,identifier", 1, str(path))
            for lineno, row in enumerate(reader, start=2):
                try:
                    idx = int(row["tier_index"])
                    label = SectorLabel.parse(row["label"])
                except ValueError as exc:
                    raise ParseError(str(exc), lineno, str(path)) from None
                prev = grouped.setdefault(idx, (label, set()))
                if prev[0] is not label:
                    raise ParseError(f"tier {idx} mixes labels", lineno, str(path))
                prev[1].add(row["identifier"])
        return cls(tuple((lab, frozenset(ids)) for _, (lab, ids) in sorted(grouped.items())))


DEFAULT_RULES = RuleSet(
    (
        (SectorLabel.UNIVERSITY, frozenset({"UNIV", "COLL"})),
        (SectorLabel.INDUSTRY, frozenset({"CORP", "INC", "LTD", "SA", "AG"})),
        (
            SectorLabel.GOVERNMENT,
            frozenset(
                {
                    "NATL", "NACL", "NAZL", "GOVT", "MINIST", "ACAD", "INST", "NIH",
                    "HOSP", "HOP", "EUROPEAN", "US", "CNRS", "CERN", "INRA", "BUNDES",
                }
            ),
        ),
    )
)


@dataclass(frozen=True)
class SectorProfile:
    has_u: bool = False
    has_i: bool = False
    has_g: bool = False

    @property
    def identified(self) -> bool:
        return self.has_u or self.has_i or self.has_g

    @property
    def cell(self) -> tuple[int, int, int]:
        return (int(self.has_u), int(self.has_i), int(self.has_g))

    @classmethod
    def from_cell(cls, cell) -> "SectorProfile":
        u, i, g = cell
        return cls(bool(u), bool(i), bool(g))


def classify_address(address: Address, rules: RuleSet = DEFAULT_RULES, mode: str = "token") -> SectorLabel:
    if mode == "token":
        tokens = set(address.tokens)
        for label, idents in rules.tiers:
            if not tokens.isdisjoint(idents):
                return label
    elif mode == "substring":
        text = address.raw.upper()
        for label, idents in rules.tiers:
            if any(i in text for i in idents):
                return label
    else:
        raise ValueError(f"unknown match mode {mode!r}; expected one of {MATCH_MODES}")
    return SectorLabel.UNIDENTIFIED


def profile_document(document: Document, rules: RuleSet = DEFAULT_RULES, mode: str = "token") -> SectorProfile:
    labels = {classify_address(a, rules, mode) for a in document.addresses}
    return SectorProfile(
        SectorLabel.UNIVERSITY in labels,
        SectorLabel.INDUSTRY in labels,
        SectorLabel.GOVERNMENT in labels,
    )


@dataclass(frozen=True)
class ClassificationTable:
    """Per-label address counts, one row per label plus the total."""

    counts: dict[SectorLabel, int]
    total: int

    @property
    def undefined(self) -> bool:
        """True when there are no addresses and percentages are meaningless."""
        return self.total == 0

    def percent(self, label: SectorLabel) -> float:
        if self.total == 0:
            return 0.0
        return round(100.0 * self.counts.get(label, 0) / self.total, 1)

    @property
    def identified(self) -> int:
        return self.total - self.counts.get(SectorLabel.UNIDENTIFIED, 0)

    def rows(self) -> list[tuple[str, int, float]]:
        return [(lab.value, self.counts.get(lab, 0), self.percent(lab)) for lab in LABEL_ORDER]


def table_from_counts(counts: dict) -> ClassificationTable:
    full = {lab: int(counts.get(lab, 0)) for lab in LABEL_ORDER}
    return ClassificationTable(full, sum(full.values()))


def classification_table(
    documents: Iterable[Document], rules: RuleSet = DEFAULT_RULES, mode: str = "token"
) -> ClassificationTable:
    counts: Counter[SectorLabel] = Counter()
    for doc in documents:
        for a in doc.addresses:
            counts[classify_address(a, rules, mode)] += 1
    return table_from_counts(counts)


def profile_documents(
    documents: Sequence[Document], rules: RuleSet = DEFAULT_RULES, mode: str = "token"
) -> list[SectorProfile]:
    return [profile_document(d, rules, mode) for d in documents]
