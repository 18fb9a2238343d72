"""Tab-separated output shared by every table the pipeline writes.

Files are UTF-8, LF-terminated, with a header row. Inside a field a literal
backslash is written as ``\\\\``, a tab as ``\\t`` and a line feed as ``\\n``;
nothing else is escaped.
"""

from __future__ import annotations

import os
from typing import Iterable, Iterator, Sequence

_ESCAPES = {"\\": "\\\\", "\t": "\\t", "\n": "\\n"}
_UNESCAPES = {"\\": "\\", "t": "\t", "n": "\n"}


def escape_field(value: str) -> str:
    if "\\" not in value and "\t" not in value and "\n" not in value:
        return value
    return "".join(_ESCAPES.get(c, c) for c in value)


def unescape_field(value: str) -> str:
    if "\\" not in value:
        return value
    out = []
    i = 0
    n = len(value)
    while i < n:
        c = value[i]
        if c == "\\" and i + 1 < n and value[i + 1] in _UNESCAPES:
            out.append(_UNESCAPES[value[i + 1]])
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def format_value(value) -> str:
    if value is None:
        return ""
    if value is True:
        return "1"
    if value is False:
        return "0"
    if isinstance(value, float):
        return f"{value:.2f}"
    return escape_field(str(value))


def format_row(row: Sequence) -> str:
    return "\t".join(format_value(v) for v in row) + "\n"


class TsvWriter:
    """Writes one table. Use as a context manager; counts rows written."""

    def __init__(self, path, header: Sequence[str]):
        self.path = os.fspath(path)
        self.header = tuple(header)
        self.rows = 0
        self._fh = None

    def __enter__(self):
        self._fh = open(self.path, "w", encoding="utf-8", newline="\n")
        self._fh.write("\t".join(self.header) + "\n")
        return self

    def write(self, row: Sequence) -> None:
        if len(row) != len(self.header):
            raise ValueError(
                f"{self.path}: row width {len(row)} != header width {len(self.header)}"
            )
        self._fh.write(format_row(row))
        self.rows += 1

    def write_all(self, rows: Iterable[Sequence]) -> int:
        for row in rows:
            self.write(row)
        return self.rows

    def __exit__(self, *exc):
        self._fh.close()
        return False


def write_tsv(path, header: Sequence[str], rows: Iterable[Sequence]) -> int:
    with TsvWriter(path, header) as w:
        return w.write_all(rows)


def read_tsv(path, with_header: bool = False) -> Iterator[list[str]]:
    """Yield rows of unescaped string fields, skipping the header row.

    If ``with_header`` is true the header is yielded first.
    """
    with open(path, "r", encoding="utf-8", newline="\n") as fh:
        header = fh.readline()
        if with_header:
            yield header.rstrip("\n").split("\t")
        for line in fh:
            line = line[:-1] if line.endswith("\n") else line
            yield [unescape_field(f) for f in line.split("\t")]


def read_header(path) -> list[str]:
    with open(path, "r", encoding="utf-8", newline="\n") as fh:
        return fh.readline().rstrip("\n").split("\t")


def count_rows(path) -> int:
    """Data rows in a TSV file (line count minus the header)."""
    n = 0
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            n += block.count(b"\n")
    return max(n - 1, 0)


def read_int_table(path, ncols: int, chunk_bytes: int = 1 << 24) -> Iterator["np.ndarray"]:
    """Yield ``(k, ncols)`` int64 blocks of an all-integer TSV, header skipped.

    Much faster than :func:`read_tsv` for the large edge tables.
    """
    import numpy as np

    with open(path, "rb") as fh:
        fh.readline()
        tail = b""
        while True:
            block = fh.read(chunk_bytes)
            data = tail + block
            if not block:
                tail = b""
            else:
                cut = data.rfind(b"\n") + 1
                data, tail = data[:cut], data[cut:]
            if data.strip():
                flat = np.array(data.split(), dtype=np.int64)
                if len(flat) % ncols:
                    raise ValueError(f"{path}: ragged rows in integer table")
                yield flat.reshape(-1, ncols)
            if not block:
                return
