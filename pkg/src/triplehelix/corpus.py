"""Field-tagged bibliographic records: parsing, serialization, statistics.

The record format is a line-oriented stand-in for ISI exports::

    UT A1
    PY 2000
    C1 UNIV AMSTERDAM, NETHERLANDS
    C1 PHILIPS RES LABS, EINDHOVEN, NETHERLANDS
    ER

``UT`` (id) and ``PY`` (year) are required, ``C1`` repeats once per address
and ``ER`` closes the block. As in ISI exports, a line starting with
whitespace continues the previous tag, so an indented line after ``C1`` is
one more address. Other tags are kept verbatim in ``Document.extra``; ``AU``
lines are also counted into ``author_count``.
"""

from __future__ import annotations

import csv
import functools
import io
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Mapping

from .errors import ParseError

RECORD_FORMATS = ("isi",)

_TOKEN = re.compile(r"[0-9A-Z]+")

#: Alias -> canonical country designator. Applied to the trailing address segment.
DEFAULT_COUNTRY_ALIASES: dict[str, str] = {
    "ENGLAND": "UK",
    "SCOTLAND": "UK",
    "WALES": "UK",
    "NORTH IRELAND": "UK",
    "NORTHERN IRELAND": "UK",
    "UNITED KINGDOM": "UK",
    "GER": "GERMANY",
    "FED REP GER": "GERMANY",
    "NETHERL": "NETHERLANDS",
    "RUSSIAN FEDERATION": "RUSSIA",
    "UNITED STATES": "USA",
    "U S A": "USA",
}


def tokenize(raw: str) -> tuple[str, ...]:
    """Uppercase and split on every non-alphanumeric character."""
    return tuple(_TOKEN.findall(raw.upper()))


class CountryAliases:
    """Maps the trailing segment of an address to a country designator.

    Segments not in the table pass through unchanged unless ``strict`` is
    set, in which case only known aliases and canonical names are accepted.
    A canonical value of ``""`` rejects the alias outright.
    """

    def __init__(self, aliases: Mapping[str, str] | None = None, strict=False):
        table = DEFAULT_COUNTRY_ALIASES if aliases is None else aliases
        self.table = {k.strip().upper(): v.strip().upper() for k, v in table.items()}
        self.strict = strict
        self.canonical = {v for v in self.table.values() if v}

    @classmethod
    def from_csv(cls, path, strict=False) -> "CountryAliases":
        table = dict(DEFAULT_COUNTRY_ALIASES)
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"alias", "canonical"} <= set(
                reader.fieldnames
            ):
                raise ParseError("alias table needs columns alias,canonical", 1, path)
            for row in reader:
                table[row["alias"]] = row["canonical"]
        return cls(table, strict=strict)

    def resolve(self, segment: str) -> str | None:
        seg = " ".join(segment.upper().split())
        if not seg:
            return None
        if seg in self.table:
            return self.table[seg] or None
        toks = tokenize(seg)
        # US addresses end in "<STATE> <ZIP> USA"
        if toks and toks[-1] == "USA":
            return "USA"
        if self.strict and seg not in self.canonical:
            return None
        return seg


DEFAULT_ALIASES = CountryAliases()


@dataclass(frozen=True)
class Address:
    raw: str
    tokens: tuple[str, ...] = ()
    country: str | None = None

    @classmethod
    def from_raw(cls, raw: str, aliases: CountryAliases | None = None) -> "Address":
        return _cached_address(raw, aliases or DEFAULT_ALIASES)


@functools.lru_cache(maxsize=1 << 16)
def _cached_address(raw: str, aliases: CountryAliases) -> Address:
    # real corpora repeat institution strings heavily; Address is immutable
    tokens = tokenize(raw)
    country = extract_country_raw(raw, aliases) if tokens else None
    return Address(raw=raw, tokens=tokens, country=country)


@dataclass(frozen=True)
class Document:
    id: str
    year: int
    addresses: tuple[Address, ...] = ()
    author_count: int = 0
    extra: tuple[tuple[str, str], ...] = field(default=(), compare=True)

    @property
    def countries(self) -> frozenset[str]:
        return frozenset(a.country for a in self.addresses if a.country)


@dataclass
class CorpusStats:
    total_records: int = 0
    total_addresses: int = 0
    records_without_address: int = 0
    records_by_country: dict[str, int] = field(default_factory=dict)

    @property
    def pct_without_address(self) -> float:
        if not self.total_records:
            return 0.0
        return round(100.0 * self.records_without_address / self.total_records, 1)


def extract_country_raw(raw: str, aliases: CountryAliases | None = None) -> str | None:
    aliases = aliases or DEFAULT_ALIASES
    return aliases.resolve(raw.rsplit(",", 1)[-1])


def extract_country(address: Address, aliases: CountryAliases | None = None) -> str | None:
    """Country designator from the last comma-separated segment of an address.

    >>> extract_country(Address.from_raw("IBM CORP, YORKTOWN HTS, NY 10598, USA"))
    'USA'
    """
    if not address.tokens:
        raise ValueError("extract_country needs an address with at least one token")
    return extract_country_raw(address.raw, aliases)


# -- parsing -----------------------------------------------------------------


class _Block:
    __slots__ = ("start", "uid", "year", "addresses", "authors", "extra")

    def __init__(self, start):
        self.start = start
        self.uid = None
        self.year = None
        self.addresses = []
        self.authors = 0
        self.extra = []


def _text_lines(stream) -> Iterator[str]:
    if isinstance(stream, (bytes, bytearray)):
        stream = io.BytesIO(stream)
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    if isinstance(stream, io.TextIOBase):
        yield from stream
        return
    yield from io.TextIOWrapper(stream, encoding="utf-8-sig", newline=None)


def iter_records(
    stream,
    format: str = "isi",
    aliases: CountryAliases | None = None,
    source: str | None = None,
) -> Iterator[Document]:
    """Yield documents one at a time from a record stream.

    Memory use is one record plus the set of ids seen (for the duplicate
    check). ``stream`` may be a binary or text file object, bytes, or str.
    """
    if format not in RECORD_FORMATS:
        raise ValueError(f"unknown record format {format!r}; expected one of {RECORD_FORMATS}")
    aliases = aliases or DEFAULT_ALIASES
    seen: set[str] = set()
    block = None
    last_tag = None
    lineno = 0
    for lineno, line in enumerate(_text_lines(stream), start=1):
        line = line.rstrip("\r\n")
        if not line.strip():
            if block is not None:
                last_tag = None
            continue
        if line[0] in " \t":
            if block is None or last_tag is None:
                raise ParseError("continuation line outside a tagged field", lineno, source)
            tag, value = last_tag, line.strip()
        else:
            tag, _, value = line.partition(" ")
            value = value.strip()
            if tag == "ER":
                if block is None:
                    raise ParseError("ER without an open record", lineno, source)
                if block.uid is None:
                    raise ParseError("record has no UT tag", block.start, source)
                if block.year is None:
                    raise ParseError("record has no PY tag", block.start, source)
                if block.uid in seen:
                    raise ParseError(f"duplicate record id {block.uid!r}", block.start, source)
                seen.add(block.uid)
                yield Document(
                    id=block.uid,
                    year=block.year,
                    addresses=tuple(block.addresses),
                    author_count=block.authors,
                    extra=tuple(block.extra),
                )
                block = None
                last_tag = None
                continue
            if block is None:
                if tag != "UT" and tag in ("FN", "VR", "EF"):
                    # ISI file header/footer lines
                    continue
                block = _Block(lineno)
        last_tag = tag
        if tag == "UT":
            if block.uid is not None:
                raise ParseError("second UT in one record (missing ER?)", lineno, source)
            if not value:
                raise ParseError("empty UT", lineno, source)
            block.uid = value
        elif tag == "PY":
            if not value.isdigit():
                raise ParseError(f"non-numeric year {value!r}", lineno, source)
            year = int(value)
            if not 1900 <= year <= 2100:
                raise ParseError(f"year {year} outside [1900, 2100]", lineno, source)
            block.year = year
        elif tag == "C1":
            if value:
                block.addresses.append(Address.from_raw(value, aliases))
        else:
            if tag == "AU":
                block.authors += 1
            block.extra.append((tag, value))
    if block is not None:
        raise ParseError(f"record starting at line {block.start} has no ER terminator", lineno, source)


def parse_records(stream, format: str = "isi", aliases=None, source=None) -> list[Document]:
    return list(iter_records(stream, format=format, aliases=aliases, source=source))


def read_records(path, format: str = "isi", aliases=None) -> list[Document]:
    with open(path, "rb") as fh:
        return parse_records(fh, format=format, aliases=aliases, source=str(path))


def format_record(doc: Document) -> str:
    lines = [f"UT {doc.id}", f"PY {doc.year}"]
    lines.extend(f"C1 {a.raw}" for a in doc.addresses)
    n_au = 0
    for tag, value in doc.extra:
        n_au += tag == "AU"
        lines.append(f"{tag} {value}" if value else tag)
    lines.extend("AU ANONYMOUS" for _ in range(doc.author_count - n_au))
    lines.append("ER")
    return "\n".join(lines) + "\n"


def write_records(docs: Iterable[Document], fh: IO[str]) -> None:
    for doc in docs:
        fh.write(format_record(doc))
        fh.write("\n")


def corpus_stats(documents: Iterable[Document]) -> CorpusStats:
    stats = CorpusStats()
    by_country: Counter[str] = Counter()
    for doc in documents:
        stats.total_records += 1
        stats.total_addresses += len(doc.addresses)
        if not doc.addresses:
            stats.records_without_address += 1
        by_country.update(doc.countries)
    stats.records_by_country = dict(sorted(by_country.items()))
    return stats
