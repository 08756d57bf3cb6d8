"""CSV ingest: separator guessing, header matching and row parsing.

A study table is one CSV page: the first non-empty line is the header and
every further line holds one study.  Columns are assigned to statistical
roles by matching the header text against a synonym dictionary
(``synonyms.json``); explicit overrides always win over guessed roles.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from typing import Mapping

from .errors import (
    AmbiguousHeader,
    ColumnConflict,
    InvalidParameter,
    InvariantViolation,
    MissingRequiredColumns,
    NoConsistentSeparator,
    NonNumericCell,
    ParseError,
    RowArityMismatch,
)


class Separator(str, Enum):
    COMMA = ","
    SEMICOLON = ";"
    TAB = "\t"

    @property
    def label(self):
        return self.name.lower()


# preference order for ties
SEPARATORS = (Separator.COMMA, Separator.SEMICOLON, Separator.TAB)


class ColumnRole(str, Enum):
    GROUP1_N = "group1_n"
    GROUP1_MEAN = "group1_mean"
    GROUP1_SD = "group1_sd"
    GROUP2_N = "group2_n"
    GROUP2_MEAN = "group2_mean"
    GROUP2_SD = "group2_sd"
    LABEL = "label"
    YEAR = "year"
    EVENTS1 = "events1"
    TOTAL1 = "total1"
    EVENTS2 = "events2"
    TOTAL2 = "total2"


CONTINUOUS_ROLES = (
    ColumnRole.GROUP1_N, ColumnRole.GROUP1_MEAN, ColumnRole.GROUP1_SD,
    ColumnRole.GROUP2_N, ColumnRole.GROUP2_MEAN, ColumnRole.GROUP2_SD,
)
BINARY_ROLES = (ColumnRole.EVENTS1, ColumnRole.TOTAL1, ColumnRole.EVENTS2, ColumnRole.TOTAL2)
REQUIRED_ROLES = {"continuous": CONTINUOUS_ROLES, "binary": BINARY_ROLES}

_NUMBER = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")


@dataclass(frozen=True)
class RawTable:
    separator: Separator
    header: list
    rows: list
    # 1-based source line number of each row
    line_numbers: list = field(default_factory=list, compare=False)


@dataclass(frozen=True)
class ColumnMap:
    roles: dict            # ColumnRole -> column index
    covariates: dict       # column index -> covariate name
    source: str = "guessed"  # guessed | explicit | mixed

    def index(self, role):
        return self.roles.get(ColumnRole(role))

    def missing(self, kind):
        return [r.value for r in REQUIRED_ROLES[kind] if r not in self.roles]

    def has(self, kind):
        return not self.missing(kind)


@dataclass(frozen=True)
class GroupSummary:
    n: int
    mean: float
    sd: float

    def __post_init__(self):
        if self.n < 2:
            raise InvariantViolation(f"group size must be at least 2, got {self.n}")
        if not self.sd > 0:
            raise InvariantViolation(f"standard deviation must be positive, got {self.sd}")


@dataclass(frozen=True)
class CountTable:
    events1: int
    total1: int
    events2: int
    total2: int

    def __post_init__(self):
        for events, total in ((self.events1, self.total1), (self.events2, self.total2)):
            if total < 1:
                raise InvariantViolation(f"arm total must be at least 1, got {total}")
            if events < 0 or events > total:
                raise InvariantViolation(f"events must lie in [0, total], got {events}/{total}")


@dataclass(frozen=True)
class StudyRecord:
    label: str
    group1: GroupSummary | None = None
    group2: GroupSummary | None = None
    counts: CountTable | None = None
    covariates: dict = field(default_factory=dict)
    year: str | None = None

    def __post_init__(self):
        if (self.group1 is None or self.group2 is None) and self.counts is None:
            raise InvariantViolation(f"study {self.label!r} has neither two groups nor a count table")


@dataclass(frozen=True)
class StudyTable:
    records: list
    column_map: ColumnMap
    header: list
    separator: Separator = Separator.COMMA
    source_uri: str | None = None
    title: str | None = None

    @property
    def kinds(self):
        return [kind for kind in ("continuous", "binary") if self.column_map.has(kind)]


# -- header normalization --------------------------------------------------

def normalize_header(text):
    """Lowercase, turn punctuation/underscores into spaces, collapse whitespace
    and drop a plural 's' from longer tokens."""
    text = re.sub(r"[\W_]+", " ", text.lower()).strip()
    tokens = [t[:-1] if len(t) > 3 and t.endswith("s") else t for t in text.split()]
    return " ".join(tokens)


def covariate_name(text):
    return " ".join(text.lower().split())


def load_synonyms(path=None):
    """Return the synonym dictionary as ``{normalized pattern: ColumnRole}``."""
    if path is None:
        raw = resources.files("wikimeta").joinpath("synonyms.json").read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            raw = fh.read()
    table = {}
    for role, patterns in json.loads(raw).items():
        if role.startswith("_"):
            continue
        for pattern in patterns:
            table[normalize_header(pattern)] = ColumnRole(role)
    return table


_SYNONYMS = load_synonyms()


# -- separator guessing ------------------------------------------------------

def _split_lines(raw_text):
    """Yield ``(line_number, line)`` for non-blank lines, dropping trailing CR."""
    for number, line in enumerate(raw_text.split("\n"), start=1):
        line = line[:-1] if line.endswith("\r") else line
        if line.strip():
            yield number, line


def _split_cells(line, separator, line_number=None):
    try:
        cells = next(csv.reader([line], delimiter=separator.value, quotechar='"',
                                doublequote=True, strict=True))
    except csv.Error as exc:
        raise ParseError(f"malformed quoting on line {line_number}: {exc}", line=line_number) from exc
    return cells


def guess_separator(raw_text):
    """Pick the separator whose per-line count is positive and constant.

    Counts ignore separators inside double-quoted fields.  Ties are resolved
    comma, then semicolon, then tab.
    """
    lines = [line for _, line in _split_lines(raw_text)]
    if not lines:
        raise NoConsistentSeparator("no non-empty lines")
    for sep in SEPARATORS:
        counts = set()
        for line in lines:
            try:
                counts.add(len(_split_cells(line, sep)) - 1)
            except ParseError:
                counts.add(-1)
            if len(counts) > 1:
                break
        if len(counts) == 1 and counts.pop() >= 1:
            return sep
    raise NoConsistentSeparator("no candidate separator occurs a constant, positive number "
                                "of times on every line")


def _header_separator(line):
    for sep in SEPARATORS:
        try:
            if len(_split_cells(line, sep)) > 1:
                return sep
        except ParseError:
            continue
    return None


# -- header matching ---------------------------------------------------------

def match_columns(header, synonyms=None):
    """Map header strings to column roles using the synonym dictionary."""
    if not header:
        raise InvalidParameter("empty header")
    synonyms = _SYNONYMS if synonyms is None else synonyms
    roles = {}
    covariates = {}
    for index, text in enumerate(header):
        role = synonyms.get(normalize_header(text))
        if role is None:
            covariates[index] = covariate_name(text)
            continue
        if role in roles:
            raise AmbiguousHeader(
                f"columns {roles[role]} ({header[roles[role]]!r}) and {index} ({text!r}) "
                f"both match role {role.value}",
                role=role.value, columns=[roles[role], index])
        roles[role] = index
    return ColumnMap(roles=roles, covariates=_dedupe(covariates), source="guessed")


def _dedupe(covariates):
    seen = {}
    out = {}
    for index in sorted(covariates):
        name = covariates[index]
        seen[name] = seen.get(name, 0) + 1
        out[index] = name if seen[name] == 1 else f"{name}_{seen[name]}"
    return out


def apply_overrides(column_map, header, overrides):
    """Overwrite guessed roles with explicit ``role -> index`` assignments.

    An override may point at a column that already carries a guessed role;
    the explicit assignment is taken as intended.  Two overrides naming the
    same column for different roles are rejected.
    """
    if not overrides:
        return column_map
    explicit = {}
    for role, index in overrides.items():
        try:
            role = ColumnRole(role)
        except ValueError:
            raise InvalidParameter(f"unknown column role {role!r}", role=str(role)) from None
        if isinstance(index, bool) or not isinstance(index, int):
            raise InvalidParameter(f"column index for {role.value} must be an integer",
                                   role=role.value)
        if not 0 <= index < len(header):
            raise InvalidParameter(f"column index {index} for {role.value} is out of range "
                                   f"(0..{len(header) - 1})", role=role.value, index=index)
        explicit[role] = index
    by_index = {}
    for role, index in explicit.items():
        if index in by_index:
            raise ColumnConflict(f"column {index} assigned to both {by_index[index].value} "
                                 f"and {role.value}", column=index)
        by_index[index] = role

    roles = dict(column_map.roles)
    roles.update(explicit)
    used = set(roles.values())
    covariates = {i: covariate_name(text) for i, text in enumerate(header) if i not in used}
    covariates = _dedupe(covariates)
    required = [r for kind in REQUIRED_ROLES.values() if all(x in roles for x in kind) for r in kind]
    source = "explicit" if required and all(r in explicit for r in required) else "mixed"
    return ColumnMap(roles=roles, covariates=covariates, source=source)


# -- table parsing -------------------------------------------------------------

def read_table(raw_text, separator=None):
    """Split CSV text into a :class:`RawTable` without interpreting cells."""
    if not raw_text or not raw_text.strip():
        raise InvalidParameter("empty CSV text")
    lines = list(_split_lines(raw_text))
    if separator is not None:
        sep = Separator(separator)
    else:
        try:
            sep = guess_separator(raw_text)
        except NoConsistentSeparator:
            # rows disagree; split by the header's separator so the bad line can be reported
            sep = _header_separator(lines[0][1])
            if sep is None:
                raise
    header_line, header_text = lines[0]
    header = [cell.strip() for cell in _split_cells(header_text, sep, header_line)]
    for column, cell in enumerate(header):
        if not cell:
            raise InvariantViolation(f"header cell {column} is empty", line=header_line, column=column)
    rows, numbers = [], []
    for number, line in lines[1:]:
        cells = [cell.strip() for cell in _split_cells(line, sep, number)]
        if len(cells) != len(header):
            raise RowArityMismatch(f"line {number} has {len(cells)} cells, header has {len(header)}",
                                   line=number, cells=len(cells), expected=len(header))
        rows.append(cells)
        numbers.append(number)
    return RawTable(separator=sep, header=header, rows=rows, line_numbers=numbers)


def _number(cell, line, column):
    if not cell:
        raise NonNumericCell(f"empty value on line {line}, column {column}", line=line, column=column)
    if not _NUMBER.fullmatch(cell):
        raise NonNumericCell(f"non-numeric value {cell!r} on line {line}, column {column}",
                             line=line, column=column, value=cell)
    return float(cell)


def _count(cell, line, column):
    value = _number(cell, line, column)
    if value != int(value):
        raise NonNumericCell(f"count {cell!r} on line {line}, column {column} is not an integer",
                             line=line, column=column, value=cell)
    return int(value)


def parse_table(raw_text, overrides=None, require=None, source_uri=None, title=None):
    """Parse CSV text into a :class:`StudyTable`.

    ``require`` is ``"continuous"``, ``"binary"`` or ``None`` (accept whichever
    complete role set the columns provide).  Raises
    :class:`MissingRequiredColumns` listing the roles that are absent.
    """
    raw = read_table(raw_text)
    column_map = apply_overrides(match_columns(raw.header), raw.header, overrides)

    if require is not None:
        if require not in REQUIRED_ROLES:
            raise InvalidParameter(f"unknown table kind {require!r}")
        missing = column_map.missing(require)
        if missing:
            raise MissingRequiredColumns(missing)
        kinds = [require]
    else:
        kinds = [k for k in REQUIRED_ROLES if column_map.has(k)]
        if not kinds:
            raise MissingRequiredColumns(column_map.missing("continuous"),
                                         message="no complete set of continuous or binary columns; "
                                                 "missing continuous roles: "
                                                 + ", ".join(column_map.missing("continuous")))
    if not raw.rows:
        raise InvalidParameter("table has a header but no data rows")

    records = [_record(row, line, i, column_map, kinds)
               for i, (row, line) in enumerate(zip(raw.rows, raw.line_numbers), start=1)]
    return StudyTable(records=records, column_map=column_map, header=raw.header,
                      separator=raw.separator, source_uri=source_uri, title=title)


def _record(row, line, position, column_map, kinds):
    roles = column_map.roles

    def cell(role):
        index = roles[role]
        return row[index], index

    label = cell(ColumnRole.LABEL)[0] if ColumnRole.LABEL in roles else ""
    label = label or f"Study {position}"
    year = cell(ColumnRole.YEAR)[0] or None if ColumnRole.YEAR in roles else None
    group1 = group2 = counts = None
    try:
        if "continuous" in kinds:
            group1 = _group(cell, line, 1)
            group2 = _group(cell, line, 2)
        if "binary" in kinds:
            values = []
            for role in BINARY_ROLES:
                text, column = cell(role)
                values.append(_count(text, line, column))
            counts = CountTable(*values)
    except InvariantViolation as exc:
        raise InvariantViolation(f"line {line}: {exc.message}", line=line, label=label) from None
    covariates = {name: row[index] for index, name in sorted(column_map.covariates.items())}
    return StudyRecord(label=label, group1=group1, group2=group2, counts=counts,
                       covariates=covariates, year=year)


def _group(cell, line, which):
    n_role, mean_role, sd_role = CONTINUOUS_ROLES[3 * (which - 1):3 * which]
    n_text, n_col = cell(n_role)
    mean_text, mean_col = cell(mean_role)
    sd_text, sd_col = cell(sd_role)
    return GroupSummary(_count(n_text, line, n_col), _number(mean_text, line, mean_col),
                        _number(sd_text, line, sd_col))


# -- serialization -------------------------------------------------------------

def _format_float(value):
    text = repr(float(value))
    return text[:-2] if text.endswith(".0") else text


def write_table(table, separator=None):
    """Serialize a :class:`StudyTable` back to CSV text (header included)."""
    sep = Separator(separator) if separator is not None else table.separator
    by_index = {}
    # first role wins when an override aliases a guessed column
    for role, index in sorted(table.column_map.roles.items(), key=lambda kv: list(ColumnRole).index(kv[0])):
        by_index.setdefault(index, role)

    def value(record, index):
        role = by_index.get(index)
        if role is None:
            return record.covariates.get(table.column_map.covariates.get(index), "")
        if role is ColumnRole.LABEL:
            return record.label
        if role is ColumnRole.YEAR:
            return record.year or ""
        if role in CONTINUOUS_ROLES:
            group = record.group1 if role.value.startswith("group1") else record.group2
            if group is None:
                return ""
            attr = role.value.split("_", 1)[1]
            return str(group.n) if attr == "n" else _format_float(getattr(group, attr))
        if record.counts is None:
            return ""
        return str(getattr(record.counts, role.value))

    out = io.StringIO()
    writer = csv.writer(out, delimiter=sep.value, quotechar='"', lineterminator="\n",
                        quoting=csv.QUOTE_MINIMAL)
    writer.writerow(table.header)
    for record in table.records:
        writer.writerow([value(record, i) for i in range(len(table.header))])
    return out.getvalue()


def parse_overrides(pairs: Mapping | None):
    """Coerce ``{role: index}`` with string indices (from query strings or flags)."""
    if not pairs:
        return {}
    out = {}
    for role, index in pairs.items():
        try:
            out[role] = int(index)
        except (TypeError, ValueError):
            raise InvalidParameter(f"column index for {role} must be an integer, got {index!r}",
                                   role=str(role)) from None
    return out
