import random

import pytest
from hypothesis import given, strategies as st

from wikikg.errors import EmptyIdentifierSet, InvalidDoi, InvalidIdentifier, InvalidIsbn, UnknownScheme
from wikikg.normalize.identifiers import (
    DEFAULT_SCHEMES,
    KEY_SEPARATOR,
    IdentifierPair,
    normalize_doi,
    normalize_identifier,
    normalize_identifiers,
    normalize_isbn,
    pub_identity_key,
    split_identity_key,
)


# -- check-digit oracle, written from the ISBN definitions ---------------------------

def oracle_isbn10_check(first9):
    s = sum((10 - i) * int(d) for i, d in enumerate(first9))
    c = (11 - s % 11) % 11
    return "X" if c == 10 else str(c)


def oracle_isbn13_valid(isbn):
    return len(isbn) == 13 and isbn.isdigit() and \
        sum(int(d) * (1 if i % 2 == 0 else 3) for i, d in enumerate(isbn)) % 10 == 0


def oracle_isbn10_to_13(isbn10):
    body = "978" + isbn10[:9]
    for c in "0123456789":
        if oracle_isbn13_valid(body + c):
            return body + c
    raise AssertionError("no check digit")


def test_ten_thousand_random_isbn10s():
    rng = random.Random(10)
    for _ in range(10_000):
        first9 = "".join(rng.choice("0123456789") for _ in range(9))
        isbn10 = first9 + oracle_isbn10_check(first9)
        dashed = f"{isbn10[0]}-{isbn10[1:4]}-{isbn10[4:9]}-{isbn10[9]}" if rng.random() < 0.5 else isbn10
        out = normalize_isbn(dashed.lower() if rng.random() < 0.1 else dashed)
        assert out == IdentifierPair("isbn", oracle_isbn10_to_13(isbn10))
        assert oracle_isbn13_valid(out.value)


@pytest.mark.parametrize("raw,expected", [
    ("978-0-306-40615-7", "9780306406157"),
    ("0-306-40615-2", "9780306406157"),
    ("ISBN 0-306-40615-2", "9780306406157"),
    ("ISBN-13: 978 0 306 40615 7", "9780306406157"),
    ("0-8044-2957-X", "9780804429573"),
    ("080442957x", "9780804429573"),
])
def test_isbn_golden(raw, expected):
    assert normalize_isbn(raw).value == expected


@pytest.mark.parametrize("raw", ["978-0-306-40615-8", "0-306-40615-3", "12345", "", "97803064061570",
                                 "X306406152", "٠٣٠٦٤٠٦١٥٢"])
def test_isbn_invalid(raw):
    with pytest.raises(InvalidIsbn):
        normalize_isbn(raw)


@given(st.text(max_size=20))
def test_valid_isbn_output_passes_check_digit(text):
    try:
        value = normalize_isbn(text).value
    except InvalidIsbn:
        return
    assert oracle_isbn13_valid(value)


DOI_GOLDEN = [
    (" https://doi.org/10.1162/QSS_a_00105.", "10.1162/qss_a_00105"),
    ("10.1371/journal.pone.0228713", "10.1371/journal.pone.0228713"),
    ("doi:10.1/x", "10.1/x"),
    ("DOI: 10.1000/ABC;", "10.1000/abc"),
    ("http://dx.doi.org/10.1038/nature12373,", "10.1038/nature12373"),
    ("https://www.doi.org/10.5555/12345678", "10.5555/12345678"),
    ("10.1002/(SICI)1097-4571(199806)49:8<693::AID-ASI4>3.0.CO;2-0", "10.1002/(sici)1097-4571(199806)49:8<693::aid-asi4>3.0.co;2-0"),
    ("(10.1000/xyz)", None),
    ("10.1000/a(b))", "10.1000/a(b)"),
    ("doi: https://doi.org/10.1/nested.", "10.1/nested"),
]


@pytest.mark.parametrize("raw,expected", DOI_GOLDEN)
def test_doi_golden(raw, expected):
    if expected is None:
        with pytest.raises(InvalidDoi):
            normalize_doi(raw)
    else:
        assert normalize_doi(raw) == IdentifierPair("doi", expected)


@pytest.mark.parametrize("raw", ["not-a-doi", "", "10.abc/x", "10.1000/", "11.1000/x", "10.1000/with space"])
def test_doi_invalid(raw):
    with pytest.raises(InvalidDoi):
        normalize_doi(raw)


def test_other_schemes():
    assert normalize_identifier("PMID", " 12345 ") == IdentifierPair("pmid", "12345")
    assert normalize_identifier("doi", "doi:10.1/x") == IdentifierPair("doi", "10.1/x")
    assert normalize_identifier("pmc", "pmc123") == normalize_identifier("PMC", "123") == IdentifierPair("pmc", "PMC123")
    assert normalize_identifier("arxiv", "ArXiv:1501.00001") == IdentifierPair("arxiv", "arxiv:1501.00001")
    assert normalize_identifier("issn", "0028-0836x") == IdentifierPair("issn", "0028-0836X")
    assert normalize_identifier("bibcode", "2019ApJ...882L..12A").value == "2019ApJ...882L..12A"
    with pytest.raises(UnknownScheme):
        normalize_identifier("frobnitz", "x")
    with pytest.raises(InvalidIdentifier):
        normalize_identifier("pmid", "   ")
    with pytest.raises(InvalidIdentifier):
        normalize_identifier("pmid", "1" + KEY_SEPARATOR + "2")


def test_vocabulary_has_twenty_schemes():
    assert len(DEFAULT_SCHEMES) == 20 == len(set(DEFAULT_SCHEMES))


def test_bulk_normalisation_counts_drops():
    counters = {}
    out = normalize_identifiers([("doi", "10.1/a"), ("doi", "junk"), ("frob", "1"), ("isbn", "0-306-40615-2")],
                                counters=counters)
    assert [str(p) for p in out] == ["doi:10.1/a", "isbn:9780306406157"]
    assert counters == {"identifiers.invalid_doi": 1, "identifiers.unknown_scheme": 1}


# -- identity keys ------------------------------------------------------------------

def test_order_invariance():
    a = pub_identity_key([("doi", "a"), ("isbn", "b")])
    assert a == pub_identity_key([("isbn", "b"), ("doi", "a")])
    assert split_identity_key(a) == [IdentifierPair("doi", "a"), IdentifierPair("isbn", "b")]


def test_chapter_and_book_do_not_merge():
    book = normalize_isbn("978-0-306-40615-7")
    chapter1 = pub_identity_key([normalize_doi("10.1007/978-0-306-40615-7_1"), book])
    chapter2 = pub_identity_key([normalize_doi("10.1007/978-0-306-40615-7_2"), book])
    whole_book = pub_identity_key([book])
    assert len({chapter1, chapter2, whole_book}) == 3


def test_empty_set():
    with pytest.raises(EmptyIdentifierSet):
        pub_identity_key([])


pairs = st.lists(st.tuples(st.sampled_from(DEFAULT_SCHEMES), st.text("abc019./", min_size=1, max_size=6)),
                 min_size=1, max_size=8)


@given(pairs, st.randoms())
def test_key_depends_on_the_set_only(items, rnd):
    shuffled = list(items) + rnd.sample(items, k=min(len(items), 3))  # duplicates too
    rnd.shuffle(shuffled)
    assert pub_identity_key(items) == pub_identity_key(shuffled)


@given(pairs, pairs)
def test_different_sets_give_different_keys(a, b):
    assert (pub_identity_key(a) == pub_identity_key(b)) == (set(a) == set(b))


@given(st.text(max_size=40), st.text(max_size=40))
def test_normalizers_only_raise_typed_errors(scheme, value):
    for fn in (lambda: normalize_identifier(scheme, value), lambda: normalize_doi(value),
               lambda: normalize_isbn(value)):
        try:
            fn()
        except (InvalidIdentifier, UnknownScheme):
            pass
