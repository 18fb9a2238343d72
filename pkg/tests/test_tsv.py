from hypothesis import given, strategies as st

from wikikg.tsv import (
    escape_field,
    format_row,
    read_int_table,
    read_tsv,
    unescape_field,
    write_tsv,
    count_rows,
)


def test_escapes_are_exact():
    assert escape_field("a\tb\nc\\d") == "a\\tb\\nc\\\\d"
    assert escape_field("plain") == "plain"


def test_formatting_of_booleans_floats_and_missing():
    assert format_row([1, True, False, None, 2.0, 10.014]) == "1\t1\t0\t\t2.00\t10.01\n"


@given(st.text())
def test_escape_round_trip(text):
    assert unescape_field(escape_field(text)) == text
    assert "\t" not in escape_field(text) and "\n" not in escape_field(text)


def test_write_then_read(tmp_path):
    path = tmp_path / "t.tsv"
    rows = [[1, "a\tb"], [2, "back\\slash\nline"], [3, ""]]
    assert write_tsv(path, ("id", "text"), rows) == 3
    assert path.read_bytes().startswith(b"id\ttext\n")
    assert list(read_tsv(path)) == [["1", "a\tb"], ["2", "back\\slash\nline"], ["3", ""]]
    assert count_rows(path) == 3


def test_read_int_table_in_small_chunks(tmp_path):
    path = tmp_path / "edges.tsv"
    rows = [(i, i * 7 % 13) for i in range(1000)]
    write_tsv(path, ("a", "b"), rows)
    blocks = list(read_int_table(path, 2, chunk_bytes=64))
    got = [tuple(r) for b in blocks for r in b.tolist()]
    assert got == rows
