"""Parsing, validation and filtering of the survey and membership tables.

Three CSV files feed the pipeline:

* ``subsidiaries.csv`` -- one row per overseas subsidiary, with the Japanese
  owners packed into a single ``owners`` column as ``id:share`` pairs joined
  by ``;``.
* ``memberships.csv`` -- ``investor_id,group,basis`` rows for the six
  horizontal keiretsu.
* ``macroareas.csv`` -- ``country,macroarea`` lookup, shipped with the
  package and overridable.

Local (non-Japanese) partners only ever appear as the aggregate
``local_share``; they never become network nodes.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import warnings
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from typing import Iterable, Mapping, TextIO

from .errors import InputError, ParseError, RowError

logger = logging.getLogger(__name__)

__all__ = [
    "Group",
    "Basis",
    "Macroarea",
    "SubsidiaryRecord",
    "InvestorRecord",
    "KeiretsuMembership",
    "FilterSpec",
    "SUBSIDIARY_COLUMNS",
    "MEMBERSHIP_COLUMNS",
    "MANUFACTURING_CODES",
    "NON_MANUFACTURING",
    "parse_subsidiaries",
    "write_subsidiaries",
    "parse_memberships",
    "write_memberships",
    "parse_investors",
    "load_macroareas",
    "write_macroareas",
    "macroarea_of",
    "dual_affiliations",
    "apply_filter",
    "descriptive_stats",
    "CoinvestorRow",
]

SHARE_EPS = 1e-6

MANUFACTURING_CODES = frozenset(range(600, 2301, 100))
NON_MANUFACTURING = 0
VALID_SECTOR_CODES = MANUFACTURING_CODES | {NON_MANUFACTURING}

SUBSIDIARY_COLUMNS = (
    "subsidiary_id",
    "name",
    "country",
    "sector_code",
    "paidup_capital",
    "num_employees",
    "year_established",
    "owners",
    "local_share",
)
MEMBERSHIP_COLUMNS = ("investor_id", "group", "basis")
MACROAREA_COLUMNS = ("country", "macroarea")


class Group(str, Enum):
    MITSUI = "Mitsui"
    MITSUBISHI = "Mitsubishi"
    SUMITOMO = "Sumitomo"
    SANWA = "Sanwa"
    FUYO = "Fuyo"
    IKKAN = "Ikkan"


class Basis(str, Enum):
    PRESIDENTS_CLUB = "PresidentsClub"
    TOP50_EQUITY = "Top50Equity"
    BOTH = "Both"


class Macroarea(str, Enum):
    ASEAN = "ASEAN"
    CHINA_TAIWAN = "ChinaTaiwan"
    EU = "EU"
    NORTH_AMERICA = "NorthAmerica"
    OTHER = "Other"


@dataclass(frozen=True)
class SubsidiaryRecord:
    subsidiary_id: str
    name: str
    country: str
    sector_code: int
    paidup_capital: float | None
    owners: tuple[tuple[str, float], ...]
    local_share: float = 0.0
    num_employees: int | None = None
    year_established: int | None = None

    @property
    def owner_ids(self) -> tuple[str, ...]:
        return tuple(i for i, _ in self.owners)

    @property
    def is_manufacturing(self) -> bool:
        return self.sector_code in MANUFACTURING_CODES


@dataclass(frozen=True)
class InvestorRecord:
    investor_id: str
    name: str


@dataclass(frozen=True)
class KeiretsuMembership:
    investor_id: str
    group: Group
    basis: Basis
    dual: bool = field(default=False, compare=False)


@dataclass(frozen=True)
class FilterSpec:
    """Record selection. Unset fields do not filter.

    ``snapshot_year`` keeps subsidiaries established on or before that year;
    records with an unknown establishment year are dropped when it is set.
    """

    macroarea: Macroarea | None = None
    sector_codes: frozenset[int] | None = None
    snapshot_year: int | None = None
    manufacturing_only: bool = False

    def __post_init__(self):
        if self.macroarea is not None and not isinstance(self.macroarea, Macroarea):
            object.__setattr__(self, "macroarea", _enum_value(Macroarea, self.macroarea))
        if self.sector_codes is not None and not isinstance(self.sector_codes, frozenset):
            object.__setattr__(self, "sector_codes", frozenset(int(c) for c in self.sector_codes))

    @property
    def is_empty(self) -> bool:
        return (
            self.macroarea is None
            and self.sector_codes is None
            and self.snapshot_year is None
            and not self.manufacturing_only
        )


def _enum_value(enum_cls, value):
    if isinstance(value, enum_cls):
        return value
    for member in enum_cls:
        if member.value.lower() == str(value).strip().lower():
            return member
    valid = ", ".join(m.value for m in enum_cls)
    raise InputError(f"unknown {enum_cls.__name__.lower()} {value!r}; valid names: {valid}")


# -- subsidiaries ------------------------------------------------------------


def _reader(source: TextIO | str, columns: tuple[str, ...], what: str):
    if isinstance(source, str):
        source = io.StringIO(source)
    reader = csv.DictReader(source)
    header = reader.fieldnames
    if header is None:
        raise InputError(f"{what}: empty input, expected header {','.join(columns)}")
    header = [h.strip() for h in header]
    missing = [c for c in columns if c not in header]
    if missing:
        raise InputError(f"{what}: header is missing column(s) {', '.join(missing)}")
    reader.fieldnames = header
    return reader


def _parse_share(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"share {text!r} is not finite")
    return value


def _parse_owners(text: str) -> tuple[tuple[str, float], ...]:
    owners = []
    seen = set()
    text = text.strip()
    if not text:
        raise ValueError("no Japanese owner listed")
    for chunk in text.split(";"):
        inv, sep, share_text = chunk.partition(":")
        inv = inv.strip()
        if not sep or not inv:
            raise ValueError(f"malformed owner entry {chunk!r}, expected id:share")
        try:
            share = _parse_share(share_text)
        except ValueError:
            raise ValueError(f"owner {inv!r} has non-numeric share {share_text!r}") from None
        if not 0.0 < share <= 1.0:
            raise ValueError(f"share out of range for owner {inv!r}: {share} not in (0, 1]")
        if inv in seen:
            raise ValueError(f"duplicate owner {inv!r}")
        seen.add(inv)
        owners.append((inv, share))
    return tuple(owners)


def _optional(text: str | None, conv):
    if text is None or not text.strip():
        return None
    return conv(text.strip())


def parse_subsidiaries(source: TextIO | str, *, name: str = "subsidiaries.csv") -> list[SubsidiaryRecord]:
    """Parse ``subsidiaries.csv`` content into validated records.

    Every row is checked; if any fail, a single :class:`ParseError` lists
    all of them with their line numbers (the header is line 1).
    """
    reader = _reader(source, SUBSIDIARY_COLUMNS, name)
    records: list[SubsidiaryRecord] = []
    errors: list[RowError] = []
    first_seen: dict[str, int] = {}

    for line, row in enumerate(reader, start=2):
        if None in row:
            errors.append(RowError(line, "*", "too many fields"))
            continue
        current = "subsidiary_id"
        try:
            sid = (row["subsidiary_id"] or "").strip()
            if not sid:
                raise ValueError("empty subsidiary_id")
            current = "sector_code"
            sector = int(row["sector_code"])
            if sector not in VALID_SECTOR_CODES:
                raise ValueError(f"sector code {sector} not in 600..2300 (step 100) or {NON_MANUFACTURING}")
            current = "paidup_capital"
            capital = _optional(row["paidup_capital"], float)
            if capital is not None and not (math.isfinite(capital) and capital >= 0):
                raise ValueError(f"negative or non-finite capital {capital}")
            current = "num_employees"
            employees = _optional(row["num_employees"], int)
            if employees is not None and employees < 0:
                raise ValueError(f"negative employee count {employees}")
            current = "year_established"
            year = _optional(row["year_established"], int)
            if year is not None and not 1000 <= year <= 9999:
                raise ValueError(f"year {year} is not a 4-digit year")
            current = "owners"
            owners = _parse_owners(row["owners"] or "")
            current = "local_share"
            local = _optional(row["local_share"], _parse_share) or 0.0
            if not 0.0 <= local <= 1.0:
                raise ValueError(f"share out of range: local share {local} not in [0, 1]")
            if sum(s for _, s in owners) + local > 1.0 + SHARE_EPS:
                raise ValueError("owner shares plus local share exceed 1")
        except (ValueError, TypeError) as exc:
            errors.append(RowError(line, current, str(exc)))
            continue

        if sid in first_seen:
            errors.append(
                RowError(line, "subsidiary_id", f"duplicate subsidiary_id {sid!r} (first seen at row {first_seen[sid]})")
            )
            continue
        first_seen[sid] = line
        records.append(
            SubsidiaryRecord(
                subsidiary_id=sid,
                name=(row["name"] or "").strip(),
                country=(row["country"] or "").strip(),
                sector_code=sector,
                paidup_capital=capital,
                owners=owners,
                local_share=local,
                num_employees=employees,
                year_established=year,
            )
        )

    if errors:
        raise ParseError(errors, name)
    return records


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_subsidiaries(records: Iterable[SubsidiaryRecord], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(SUBSIDIARY_COLUMNS)
    for r in records:
        owners = ";".join(f"{i}:{s!r}" for i, s in r.owners)
        writer.writerow(
            [
                r.subsidiary_id,
                r.name,
                r.country,
                r.sector_code,
                _fmt(r.paidup_capital),
                _fmt(r.num_employees),
                _fmt(r.year_established),
                owners,
                _fmt(float(r.local_share)),
            ]
        )


# -- memberships -------------------------------------------------------------


def parse_memberships(source: TextIO | str, *, name: str = "memberships.csv") -> list[KeiretsuMembership]:
    """Parse ``memberships.csv``; investors listed under several groups get ``dual=True``."""
    reader = _reader(source, MEMBERSHIP_COLUMNS, name)
    parsed: list[tuple[str, Group, Basis]] = []
    errors: list[RowError] = []
    seen: dict[tuple[str, Group], int] = {}
    for line, row in enumerate(reader, start=2):
        inv = (row["investor_id"] or "").strip()
        if not inv:
            errors.append(RowError(line, "investor_id", "empty investor_id"))
            continue
        try:
            group = _enum_value(Group, row["group"] or "")
        except InputError:
            errors.append(RowError(line, "group", f"unknown group {row['group']!r}; valid names: " + ", ".join(g.value for g in Group)))
            continue
        try:
            basis = _enum_value(Basis, row["basis"] or "")
        except InputError as exc:
            errors.append(RowError(line, "basis", str(exc)))
            continue
        key = (inv, group)
        if key in seen:
            errors.append(RowError(line, "group", f"duplicate membership {inv}/{group.value} (first seen at row {seen[key]})"))
            continue
        seen[key] = line
        parsed.append((inv, group, basis))
    if errors:
        raise ParseError(errors, name)

    counts = Counter(inv for inv, _, _ in parsed)
    duals = sum(1 for c in counts.values() if c > 1)
    if duals:
        logger.info("%d investor(s) with dual keiretsu affiliation", duals)
    return [KeiretsuMembership(inv, g, b, dual=counts[inv] > 1) for inv, g, b in parsed]


def write_memberships(memberships: Iterable[KeiretsuMembership], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(MEMBERSHIP_COLUMNS)
    for m in memberships:
        writer.writerow([m.investor_id, m.group.value, m.basis.value])


def dual_affiliations(memberships: Iterable[KeiretsuMembership]) -> set[str]:
    counts = Counter(m.investor_id for m in memberships)
    return {inv for inv, c in counts.items() if c > 1}


def parse_investors(source: TextIO | str, *, name: str = "investors.csv") -> list[InvestorRecord]:
    reader = _reader(source, ("investor_id", "name"), name)
    out, errors, seen = [], [], {}
    for line, row in enumerate(reader, start=2):
        inv = (row["investor_id"] or "").strip()
        if not inv:
            errors.append(RowError(line, "investor_id", "empty investor_id"))
        elif inv in seen:
            errors.append(RowError(line, "investor_id", f"duplicate investor_id {inv!r} (first seen at row {seen[inv]})"))
        else:
            seen[inv] = line
            out.append(InvestorRecord(inv, (row["name"] or "").strip()))
    if errors:
        raise ParseError(errors, name)
    return out


# -- macro-areas -------------------------------------------------------------


def load_macroareas(source: TextIO | str | None = None) -> dict[str, Macroarea]:
    """Load a country -> macro-area table; ``None`` loads the bundled one."""
    if source is None:
        text = resources.files("keiretsunet").joinpath("data/macroareas.csv").read_text(encoding="utf-8")
        source = io.StringIO(text)
    reader = _reader(source, MACROAREA_COLUMNS, "macroareas.csv")
    table: dict[str, Macroarea] = {}
    errors = []
    for line, row in enumerate(reader, start=2):
        try:
            table[(row["country"] or "").strip()] = _enum_value(Macroarea, row["macroarea"] or "")
        except InputError as exc:
            errors.append(RowError(line, "macroarea", str(exc)))
    if errors:
        raise ParseError(errors, "macroareas.csv")
    return table


def write_macroareas(table: Mapping[str, Macroarea], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(MACROAREA_COLUMNS)
    for country, area in table.items():
        writer.writerow([country, Macroarea(area).value])


class UnmappedCountryWarning(UserWarning):
    pass


def macroarea_of(country: str, table: Mapping[str, Macroarea]) -> Macroarea:
    return table.get(country, Macroarea.OTHER)


# -- filtering and descriptive statistics ------------------------------------


def apply_filter(
    records: Iterable[SubsidiaryRecord],
    spec: FilterSpec,
    macroareas: Mapping[str, Macroarea] | None = None,
) -> list[SubsidiaryRecord]:
    records = list(records)
    if spec.is_empty:
        return records
    table = None
    if spec.macroarea is not None:
        table = load_macroareas() if macroareas is None else macroareas
        unknown = sorted({r.country for r in records} - set(table))
        if unknown:
            warnings.warn(
                f"countries missing from the macro-area table, treated as Other: {', '.join(unknown)}",
                UnmappedCountryWarning,
                stacklevel=2,
            )

    out = []
    for r in records:
        if spec.manufacturing_only and not r.is_manufacturing:
            continue
        if spec.sector_codes is not None and r.sector_code not in spec.sector_codes:
            continue
        if spec.snapshot_year is not None and (r.year_established is None or r.year_established > spec.snapshot_year):
            continue
        if table is not None and macroarea_of(r.country, table) != spec.macroarea:
            continue
        out.append(r)
    return out


@dataclass(frozen=True)
class CoinvestorRow:
    group: str
    count: int
    average: float
    histogram: tuple[int, int, int, int, int]  # owner counts 1, 2, 3, 4, 5+
    pct_two_plus: float

    COLUMNS = ("group", "n", "avg", "1", "2", "3", "4", "5+", "pct_2plus")

    def as_row(self) -> list:
        return [self.group, self.count, f"{self.average:.2f}", *self.histogram, f"{self.pct_two_plus:.1f}"]


def descriptive_stats(
    records: Iterable[SubsidiaryRecord],
    group_by: str = "macroarea",
    macroareas: Mapping[str, Macroarea] | None = None,
) -> list[CoinvestorRow]:
    """Co-investors per subsidiary, grouped by macro-area or sector code.

    Owner counts are Japanese owners only; the local partner, if any, is
    not counted.
    """
    if group_by not in ("macroarea", "sector"):
        raise InputError(f"group_by must be 'macroarea' or 'sector', got {group_by!r}")
    if group_by == "macroarea":
        table = load_macroareas() if macroareas is None else macroareas
        key = lambda r: macroarea_of(r.country, table).value  # noqa: E731
        order = [m.value for m in Macroarea]
    else:
        key = lambda r: r.sector_code  # noqa: E731
        order = None

    by_group: dict = defaultdict(list)
    for r in records:
        by_group[key(r)].append(len(r.owners))

    groups = [g for g in order if g in by_group] if order else sorted(by_group)
    rows = []
    for g in groups:
        counts = by_group[g]
        hist = [0] * 5
        for c in counts:
            hist[min(max(c, 1), 5) - 1] += 1
        n = len(counts)
        two_plus = sum(1 for c in counts if c >= 2)
        rows.append(CoinvestorRow(str(g), n, sum(counts) / n, tuple(hist), 100.0 * two_plus / n))
    return rows
