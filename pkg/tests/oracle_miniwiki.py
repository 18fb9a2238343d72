"""Brute-force reference computation of the article metrics for the mini-wiki.

Reads only the raw fixture files and shares no code with the package: its
own SQL tokenizer, a whole-document ElementTree parse, and just enough URL
and identifier folding for the cases the fixture contains. Slow and simple
on purpose.

    python3 tests/oracle_miniwiki.py tests/fixtures/miniwiki
"""

from __future__ import annotations

import bz2
import csv
import glob
import gzip
import os
import re
import sys
import xml.etree.ElementTree as ET
from datetime import date, datetime

AS_OF = date(2021, 7, 1)
WINDOW = (date(2021, 4, 1), date(2021, 6, 30))
WIKI = "en.wikipedia"

_TOKEN = re.compile(r"""'((?:[^'\\]|\\.)*)'|(NULL)|(-?\d+\.\d+(?:[eE][-+]?\d+)?)|(-?\d+)|(\()|(\))""", re.S)
_ESC = {"0": "\0", "n": "\n", "r": "\r", "t": "\t", "Z": "\x1a", "b": "\b"}


def sql_rows(path):
    text = open(path, encoding="utf-8").read()
    rows = []
    for stmt in re.finditer(r"^INSERT INTO `\w+` VALUES (.*);$", text, re.M):
        row = None
        for m in _TOKEN.finditer(stmt.group(1)):
            s, null, flt, num, op, cl = m.groups()
            if op:
                row = []
            elif cl:
                rows.append(tuple(row))
            elif s is not None:
                row.append(re.sub(r"\\(.)", lambda e: _ESC.get(e.group(1), e.group(1)), s))
            elif null:
                row.append(None)
            elif flt:
                row.append(float(flt))
            else:
                row.append(int(num))
    return rows


def tkey(title):
    t = title.replace(" ", "_")
    return t[:1].upper() + t[1:]


def read_text(path):
    if path.endswith(".gz"):
        return gzip.open(path, "rt", encoding="utf-8").read()
    if path.endswith(".bz2"):
        return bz2.open(path, "rt", encoding="utf-8").read()
    return open(path, encoding="utf-8").read()


# -- just enough canonicalisation for the fixture's links ------------------------

def canon_url(raw):
    u = re.sub(r"[\r\n]", "", raw.strip()).replace(" ", "%20")
    while True:
        u = re.sub(r"^[A-Za-z]+:/{1,3}", "", u)
        u = u[2:] if u.startswith("//") else u
        m = re.match(r"(?i)^web\.archive\.org/web/[0-9*]+/(.+)$", u)
        if not m:
            break
        u = m.group(1)
    host, _, rest = u.partition("/")
    host = host.lower()
    if "." not in host:
        return None
    u = host + ("/" + rest if rest or u.endswith("/") else "")
    if re.match(r"^books\.google\.", host):
        ident = re.search(r"[?&]id=([^&#]*)", u).group(1)
        u = u.split("?")[0] + "?id=" + ident
    while True:
        v = u.rstrip("/")
        if v.endswith("?") and v.count("?") == 1:
            v = v[:-1]
        if v == u:
            break
        u = v
    return u


def isbn13(raw):
    d = re.sub(r"[^0-9Xx]", "", raw).upper()
    if len(d) == 10:
        if sum((10 - i) * (10 if c == "X" else int(c)) for i, c in enumerate(d)) % 11:
            return None
        d = "978" + d[:9]
        d += str((10 - sum(int(c) * (1 if i % 2 == 0 else 3) for i, c in enumerate(d)) % 10) % 10)
    if len(d) != 13 or sum(int(c) * (1 if i % 2 == 0 else 3) for i, c in enumerate(d)) % 10:
        return None
    return d


def canon_id(scheme, value):
    scheme = scheme.lower()
    value = value.strip()
    if scheme == "doi":
        value = re.sub(r"(?i)^https?://(dx\.)?doi\.org/", "", value).lower()
        return ("doi", value) if re.match(r"^10\.\d+(\.\d+)*/\S+$", value) else None
    if scheme == "isbn":
        v = isbn13(value)
        return ("isbn", v) if v else None
    if scheme == "pmc":
        return ("pmc", value.upper().removeprefix("PMC"))
    return (scheme, value)


def id_list(text):
    text = text.strip()
    if not text:
        return []
    return [(k, v.strip()) for k, v in re.findall(r"(\w+)=([^,}]*)", text.strip("{}"))]


# -- the metrics -------------------------------------------------------------------------

def oracle(fixture_dir):
    j = lambda name: os.path.join(fixture_dir, name)
    pages = {}
    for r in sql_rows(j("page.sql")):
        pages[r[0]] = {"ns": r[1], "title": r[2], "redirect": r[4] == 1, "len": r[10]}
    by_title = {(p["ns"], tkey(p["title"])): pid for pid, p in pages.items()}
    scope = {pid for pid, p in pages.items() if p["ns"] == 0 and not p["redirect"]}

    # revisions
    edits, editors, created = {}, {}, {}
    for path in sorted(glob.glob(j("history-*"))):
        root = ET.fromstring(read_text(path))
        for page in root.iter("{http://www.mediawiki.org/xml/export-0.10/}page"):
            ns_ = "{http://www.mediawiki.org/xml/export-0.10/}"
            pid = int(page.find(ns_ + "id").text)
            for rev in page.iter(ns_ + "revision"):
                ts = datetime.strptime(rev.find(ns_ + "timestamp").text, "%Y-%m-%dT%H:%M:%SZ")
                c = rev.find(ns_ + "contributor")
                if c.get("deleted"):
                    who = "deleted"
                elif c.find(ns_ + "id") is not None:
                    who = "u" + c.find(ns_ + "id").text
                else:
                    who = "ip" + c.find(ns_ + "ip").text
                edits[pid] = edits.get(pid, 0) + 1
                editors.setdefault(pid, set()).add(who)
                created[pid] = min(created.get(pid, ts), ts)

    # views
    views = {}
    prefixes = {"Talk:": 1, "Wikipedia:": 4, "Category:": 14}
    for path in sorted(glob.glob(j("pageviews-*"))):
        day = datetime.strptime(re.search(r"(\d{8})", os.path.basename(path)).group(1), "%Y%m%d").date()
        if not WINDOW[0] <= day <= WINDOW[1]:
            continue
        for line in read_text(path).splitlines():
            f = line.split("\t")
            if len(f) < 5 or f[0] != WIKI:
                continue
            if f[2]:
                pid = int(f[2])
            else:
                ns, title = 0, f[1]
                for pre, n in prefixes.items():
                    if title.startswith(pre):
                        ns, title = n, title[len(pre):]
                pid = by_title.get((ns, tkey(title)))
            if pid in pages:
                views[pid] = views.get(pid, 0) + int(f[4])

    # links
    edges = set()
    for frm, ns, title, _ in sql_rows(j("pagelinks.sql")):
        to = by_title.get((ns, tkey(title)))
        if frm in scope and to in scope:
            edges.add((frm, to))
    links = {p: sum(1 for e in edges if e[0] == p) for p in scope}
    linked = {p: sum(1 for e in edges if e[1] == p) for p in scope}

    # urls and references
    urls = {p: set() for p in pages}
    for _, frm, raw, _, _ in sql_rows(j("externallinks.sql")):
        u = canon_url(raw)
        if frm in pages and u:
            urls[frm].add(u)
    refs = {p: 0 for p in pages}
    pubs = {p: set() for p in pages}
    with open(j("citations.tsv"), encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh, delimiter="\t", quoting=csv.QUOTE_NONE):
            pid = by_title.get((0, tkey(row["page_title"])))
            if pid is None:
                continue
            refs[pid] += 1
            if row["URL"]:
                u = canon_url(row["URL"])
                if u:
                    urls[pid].add(u)
            key = frozenset(filter(None, (canon_id(s, v) for s, v in id_list(row["ID_list"]))))
            if key:
                pubs[pid].add(key)

    out = {}
    for pid in sorted(scope):
        title = pages[pid]["title"]
        talk = by_title.get((1, tkey(title)))
        if pid in created:
            days = (AS_OF - created[pid].date()).days
            age = round(days / 365.25, 2) if days >= 0 else 0.0
        else:
            age = 0.0
        out[pid] = (
            len(editors.get(pid, ())), edits.get(pid, 0), linked[pid], links[pid], age,
            pages[pid]["len"], len(editors.get(talk, ())), edits.get(talk, 0), views.get(pid, 0),
            refs[pid], len(pubs[pid]), len(urls[pid]),
        )
    return out


if __name__ == "__main__":
    d = sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(__file__), "fixtures", "miniwiki")
    print("page_id\teditors\tedits\tlinked\tlinks\tage\tlength\ttalkers\ttalks\tviews\treferences\tpub_referenced\turls")
    for pid, row in oracle(d).items():
        print("\t".join([str(pid)] + [f"{v:.2f}" if isinstance(v, float) else str(v) for v in row]))
