"""Streaming reader for MediaWiki SQL table dumps.

Only ``INSERT INTO ... VALUES (...),(...);`` statements carry data; every
other statement (``CREATE TABLE``, ``LOCK``, comments, ``/*!...*/``
directives) is skipped. The literal grammar is the subset ``mysqldump``
emits: single-quoted strings with backslash escapes, integers, floats,
``NULL`` and ``0x`` hex blobs.

A statement is held in memory only while it is being decoded, so peak memory
is bounded by the longest single statement.
"""

from __future__ import annotations

import re
from typing import BinaryIO, Iterable, Iterator, Sequence

from wikikg.errors import ColumnCountMismatch, MalformedStatement

# column kinds accepted in a schema
INT, FLOAT, STR, BYTES, ANY = "int", "float", "str", "bytes", "any"

_INSERT_HEAD = re.compile(
    rb"\s*INSERT\s+(?:IGNORE\s+)?INTO\s+`?([A-Za-z0-9_$]+)`?\s*(?:\([^)]*\)\s*)?VALUES\s*",
    re.I,
)

_TOKEN = re.compile(
    rb"""[ \t\r\n]*(?:
        '([^'\\]*(?:\\.[^'\\]*)*)'          # 1: quoted string body
      | (NULL)(?![A-Za-z0-9_])              # 2
      | 0x([0-9A-Fa-f]*)                    # 3: hex blob
      | ([-+]?(?:[0-9]+\.?[0-9]*|\.[0-9]+)(?:[eE][-+]?[0-9]+)?)   # 4: number
      | ([(),;])                            # 5: punctuation
    )""",
    re.X | re.S,
)

_ESCAPE = re.compile(rb"\\(.)", re.S)
_ESCAPE_MAP = {
    b"0": b"\x00",
    b"'": b"'",
    b'"': b'"',
    b"b": b"\x08",
    b"n": b"\n",
    b"r": b"\r",
    b"t": b"\t",
    b"Z": b"\x1a",
    b"\\": b"\\",
}


def _unescape(raw: bytes) -> bytes:
    if b"\\" not in raw:
        return raw
    return _ESCAPE.sub(lambda m: _ESCAPE_MAP.get(m.group(1), m.group(1)), raw)


_VALUE = rb"('[^'\\]*(?:\\.[^'\\]*)*'|NULL|0x[0-9A-Fa-f]*|[-+]?(?:[0-9]+\.?[0-9]*|\.[0-9]+)(?:[eE][-+]?[0-9]+)?)"
_row_patterns: dict[int, "re.Pattern[bytes]"] = {}


def _row_pattern(width: int) -> "re.Pattern[bytes]":
    """Regex matching one whole row of ``width`` literals plus its separator."""
    pat = _row_patterns.get(width)
    if pat is None:
        ws = rb"[ \t\r\n]*"
        body = (ws + b"," + ws).join([_VALUE] * width)
        pat = re.compile(ws + rb"\(" + ws + body + ws + rb"\)" + ws + rb"([,;])", re.S)
        _row_patterns[width] = pat
    return pat


def _literal(tok: bytes):
    first = tok[:1]
    if first == b"'":
        return _unescape(tok[1:-1])
    if first == b"N":
        return None
    if tok[:2] == b"0x":
        if len(tok) % 2:
            raise ValueError("odd-length hex literal")
        return bytes.fromhex(tok[2:].decode("ascii"))
    if b"." in tok or b"e" in tok or b"E" in tok:
        return float(tok)
    return int(tok)


class _Incomplete(Exception):
    """The buffer ends inside a row; more input is needed."""


def _to_int(value):
    if value is None or type(value) is int:
        return value
    return int(value)


def _to_float(value):
    return None if value is None else float(value)


def _to_str(value):
    if type(value) is bytes:
        return value.decode("utf-8", "replace")
    return None if value is None else str(value)


def _to_bytes(value):
    if value is None or type(value) is bytes:
        return value
    return str(value).encode("utf-8")


_CONVERTERS = {
    INT: _to_int,
    FLOAT: _to_float,
    STR: _to_str,
    BYTES: _to_bytes,
    ANY: lambda v: v,
}


def _need_more(buf: bytes, pos: int) -> bool:
    rest = buf[pos:].lstrip()
    return not rest or rest[:1] == b"'"


def _scan_rows(buf: bytes, pos: int, final: bool, base_offset: int, width: int | None = None):
    """Decode complete rows starting at ``pos``.

    Returns ``(rows, pos, done)`` where ``pos`` is the start of the first row
    not yet decoded and ``done`` is true once the closing ``;`` was consumed.
    Strings are returned as raw bytes with escapes resolved.
    """
    rows = []
    match = _TOKEN.match
    fast = _row_pattern(width).match if width else None
    while True:
        row_start = pos
        if fast is not None:
            fm = fast(buf, pos)
            if fm is not None:
                try:
                    rows.append([_literal(t) for t in fm.groups()[:-1]])
                except ValueError:
                    pass  # fall through to the token scanner for a precise error
                else:
                    pos = fm.end()
                    if fm.group(width + 1) == b";":
                        return rows, pos, True
                    continue
        try:
            m = match(buf, pos)
            if m is None or m.group(5) != b"(":
                if m is None and _need_more(buf, pos):
                    raise _Incomplete
                raise MalformedStatement("expected '('", base_offset + pos)
            pos = m.end()
            row = []
            while True:
                m = match(buf, pos)
                if m is None:
                    if _need_more(buf, pos):
                        raise _Incomplete
                    raise MalformedStatement("unrecognised literal", base_offset + pos)
                pos = m.end()
                if m.group(1) is not None:
                    row.append(_unescape(m.group(1)))
                elif m.group(2) is not None:
                    row.append(None)
                elif m.group(3) is not None:
                    hexdigits = m.group(3)
                    if len(hexdigits) % 2:
                        raise MalformedStatement("odd-length hex literal", base_offset + m.start(3))
                    row.append(bytes.fromhex(hexdigits.decode("ascii")))
                elif m.group(4) is not None:
                    text = m.group(4)
                    if b"." in text or b"e" in text or b"E" in text:
                        row.append(float(text))
                    else:
                        row.append(int(text))
                else:
                    raise MalformedStatement(
                        f"unexpected {m.group(5).decode()!r}", base_offset + m.start(5)
                    )
                m = match(buf, pos)
                if m is None or m.group(5) not in (b",", b")"):
                    if m is None and _need_more(buf, pos):
                        raise _Incomplete
                    raise MalformedStatement("expected ',' or ')'", base_offset + pos)
                pos = m.end()
                if m.group(5) == b")":
                    break
            m = match(buf, pos)
            if m is None or m.group(5) not in (b",", b";"):
                if m is None and _need_more(buf, pos):
                    raise _Incomplete
                raise MalformedStatement("expected ',' or ';' after row", base_offset + pos)
        except _Incomplete:
            if final:
                raise MalformedStatement(
                    "unterminated statement at end of stream", base_offset + row_start
                ) from None
            return rows, row_start, False
        pos = m.end()
        rows.append(row)
        if m.group(5) == b";":
            return rows, pos, True


def iter_insert_rows(
    stream: BinaryIO, table: str | None = None, width: int | None = None
) -> Iterator[tuple[int, list]]:
    """Yield ``(statement_index, raw_row)`` for every row of every INSERT.

    Raw rows hold ``bytes`` for strings (escapes resolved), ``int``/``float``
    for numbers and ``None`` for NULL. ``width`` is only a speed hint: rows of
    that many columns are decoded with a single regex match.
    """
    target = table.encode() if table else None
    statement_index = -1
    offset = 0  # stream offset of the first byte after ``buf``
    buf = b""
    while True:
        if not buf.strip():
            buf = stream.readline()
            if not buf:
                return
            offset += len(buf)
        buf_offset = offset - len(buf)
        head = _INSERT_HEAD.match(buf)
        if head is None:
            buf = b""
            continue
        statement_index += 1
        skip = target is not None and head.group(1) != target
        pos = head.end()
        final = False
        while True:
            rows, pos, done = _scan_rows(buf, pos, final, buf_offset, width)
            if not skip:
                for row in rows:
                    yield statement_index, row
            if done:
                break
            more = stream.readline()
            final = not more
            offset += len(more)
            buf_offset += pos
            buf = buf[pos:] + more
            pos = 0
        buf = buf[pos:]


def parse_sql_dump(
    stream: BinaryIO,
    schema: Sequence[tuple[str, str]],
    table: str | None = None,
) -> Iterator[tuple]:
    """Yield every row of every INSERT statement, coerced to ``schema``.

    ``schema`` is the ordered column list as ``(name, kind)`` pairs, kind one
    of ``int``, ``float``, ``str``, ``bytes`` or ``any``. When ``table`` is
    given, INSERTs into other tables are skipped.
    """
    try:
        converters = [_CONVERTERS[kind] for _, kind in schema]
    except KeyError as exc:
        raise ValueError(f"unknown column kind {exc.args[0]!r}") from None
    width = len(converters)
    for statement_index, row in iter_insert_rows(stream, table, width):
        if len(row) != width:
            raise ColumnCountMismatch(statement_index, width, len(row))
        try:
            yield tuple([conv(v) for conv, v in zip(converters, row)])
        except ValueError as exc:
            raise MalformedStatement(
                f"statement #{statement_index}: {exc}", -1
            ) from None


def select_columns(rows: Iterable[tuple], schema: Sequence[tuple[str, str]], names: Sequence[str]):
    """Project full-schema rows onto ``names``."""
    index = {name: i for i, (name, _) in enumerate(schema)}
    picks = [index[n] for n in names]
    for row in rows:
        yield tuple(row[i] for i in picks)


# -- writing (fixtures and round-trip checks) --------------------------------

_SQL_ESCAPES = {
    "\\": "\\\\",
    "'": "\\'",
    '"': '\\"',
    "\x00": "\\0",
    "\n": "\\n",
    "\r": "\\r",
    "\x1a": "\\Z",
}


def sql_literal(value) -> str:
    if value is None:
        return "NULL"
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, bytes):
        return "0x" + value.hex() if value else "''"
    return "'" + "".join(_SQL_ESCAPES.get(c, c) for c in value) + "'"


def format_insert(table: str, rows: Iterable[Sequence]) -> str:
    body = ",".join("(" + ",".join(sql_literal(v) for v in row) + ")" for row in rows)
    return f"INSERT INTO `{table}` VALUES {body};\n"
