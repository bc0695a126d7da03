"""
Reading and writing the record files consumed and produced by the CLI.

Input records are comma separated numbers, one record per line. Blank lines
and lines starting with "#" are skipped, and the first line may be a header.
Output tables are written as CSV (with any summary appended as "# key,value"
comment lines) or as a JSON object with "rows" and "summary" keys.
"""

import csv
import io
import json
import math
from collections.abc import Iterable, Mapping, Sequence
from typing import IO, NamedTuple

import numpy as np

from lgfibration.errors import RecordParseError
from lgfibration.multicomplex import FloatArray
from lgfibration.utils import OutputFormat, format_float

type Cell = float | int | str | bool | None


class Record(NamedTuple):
    line_number: int
    values: FloatArray


class Table(NamedTuple):
    fields: list[str]
    rows: list[list[Cell]]
    summary: dict[str, Cell] | None = None


def _is_number(field: str) -> bool:
    try:
        float(field)
    except ValueError:
        return False
    return True


def parse_records(text: str) -> list[Record]:
    records: list[Record] = []
    header_allowed = True
    width: int | None = None

    for line_number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue

        fields = [field.strip() for field in next(csv.reader([stripped]))]
        if header_allowed and not any(_is_number(field) for field in fields):
            header_allowed = False
            continue
        header_allowed = False

        try:
            values = [float(field) for field in fields]
        except ValueError as e:
            raise RecordParseError(f"could not parse {stripped!r} as numbers", line_number) from e
        if not all(math.isfinite(value) for value in values):
            raise RecordParseError(f"non-finite value in {stripped!r}", line_number)

        if width is None:
            width = len(values)
        elif len(values) != width:
            raise RecordParseError(f"expected {width} fields, got {len(values)}", line_number)

        records.append(Record(line_number, np.array(values)))

    return records


def _csv_cell(value: Cell) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def _json_cell(value: Cell) -> Cell:
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, float):
        return float(value)
    return int(value)


class TableWriter:
    """
    Write a table to an open file one batch of rows at a time.

    The summary is only passed to close(), once every row has been written.
    """

    def __init__(self, fp: IO[str], fields: Sequence[str], output_format: OutputFormat) -> None:
        self.fp = fp
        self.fields = list(fields)
        self.output_format = output_format
        self.row_count = 0
        if output_format is OutputFormat.JSON:
            fp.write('{\n  "rows": [')
        else:
            self._csv = csv.writer(fp, lineterminator="\n")
            self._csv.writerow(self.fields)

    def write_rows(self, rows: Iterable[Sequence[Cell]]) -> None:
        if self.output_format is OutputFormat.JSON:
            for row in rows:
                document = {
                    field: _json_cell(cell) for field, cell in zip(self.fields, row, strict=True)
                }
                self.fp.write("\n    " if self.row_count == 0 else ",\n    ")
                self.fp.write(_indent_json(document, "    "))
                self.row_count += 1
        else:
            for row in rows:
                self._csv.writerow([_csv_cell(cell) for cell in row])
                self.row_count += 1

    def close(self, summary: Mapping[str, Cell] | None = None) -> None:
        if self.output_format is OutputFormat.JSON:
            self.fp.write("\n  ]" if self.row_count else "]")
            if summary is not None:
                document = {key: _json_cell(value) for key, value in summary.items()}
                self.fp.write(f',\n  "summary": {_indent_json(document, "  ")}')
            self.fp.write("\n}\n")
        else:
            for key, value in (summary or {}).items():
                self.fp.write(f"# {key},{_csv_cell(value)}\n")


def _indent_json(document: Mapping[str, Cell], prefix: str) -> str:
    return json.dumps(document, indent=2).replace("\n", "\n" + prefix)


def _render(table: Table, output_format: OutputFormat) -> str:
    buffer = io.StringIO()
    writer = TableWriter(buffer, table.fields, output_format)
    writer.write_rows(table.rows)
    writer.close(table.summary)
    return buffer.getvalue()


def render_csv(table: Table) -> str:
    return _render(table, OutputFormat.CSV)


def render_json(table: Table) -> str:
    return _render(table, OutputFormat.JSON)


def render_table(table: Table, output_format: OutputFormat) -> str:
    return _render(table, output_format)
