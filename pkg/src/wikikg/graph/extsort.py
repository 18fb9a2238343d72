"""External-memory sorting, grouping and sort-merge joins over tuples.

Records are plain tuples compared with Python's natural ordering, so callers
arrange fields so that the natural order is the order they need. Sorted runs
spill to temporary files as pickled blocks and are merged with
:func:`heapq.merge`, which is stable: equal records come out in insertion
order, keeping every pass deterministic.
"""

from __future__ import annotations

import heapq
import os
import pickle
import shutil
import tempfile
from itertools import groupby
from typing import Callable, Iterable, Iterator, Optional

BLOCK = 4096
# rough resident cost of one small tuple record: tuple, boxed fields, a short
# string and the list slot
BYTES_PER_RECORD = 256


def records_for_budget(memory_bytes: int, per_record: int = BYTES_PER_RECORD) -> int:
    """How many records one in-memory chunk may hold under ``memory_bytes``.

    Half the budget goes to the chunk being sorted, the rest is headroom for
    the merge buffers and the caller's own state.
    """
    return max(BLOCK, memory_bytes // 2 // per_record)


def _write_run(items: list, directory: str) -> str:
    fd, path = tempfile.mkstemp(prefix="run-", suffix=".pkl", dir=directory)
    with os.fdopen(fd, "wb") as fh:
        for i in range(0, len(items), BLOCK):
            pickle.dump(items[i:i + BLOCK], fh, protocol=pickle.HIGHEST_PROTOCOL)
    return path


def _read_run(path: str) -> Iterator:
    with open(path, "rb") as fh:
        while True:
            try:
                block = pickle.load(fh)
            except EOFError:
                return
            yield from block


class ExternalSorter:
    """Accumulate records, then iterate them in sorted order.

    At most ``max_records`` records are held in memory; beyond that, sorted
    runs are written under ``tmpdir``. Iterating consumes the sorter.
    """

    def __init__(self, max_records: int = 1_000_000, tmpdir: Optional[str] = None,
                 key: Optional[Callable] = None):
        self.max_records = max(1, int(max_records))
        self.key = key
        self._parent = tmpdir
        self._dir: Optional[str] = None
        self._chunk: list = []
        self._runs: list[str] = []
        self.count = 0

    @property
    def spilled_runs(self) -> int:
        return len(self._runs)

    def add(self, record) -> None:
        self._chunk.append(record)
        self.count += 1
        if len(self._chunk) >= self.max_records:
            self._spill()

    def extend(self, records: Iterable) -> "ExternalSorter":
        for r in records:
            self.add(r)
        return self

    def _spill(self) -> None:
        if self._dir is None:
            self._dir = tempfile.mkdtemp(prefix="extsort-", dir=self._parent)
        self._chunk.sort(key=self.key)
        self._runs.append(_write_run(self._chunk, self._dir))
        self._chunk = []

    def __iter__(self) -> Iterator:
        try:
            if not self._runs:
                self._chunk.sort(key=self.key)
                chunk, self._chunk = self._chunk, []
                yield from chunk
                return
            if self._chunk:
                self._spill()
            yield from heapq.merge(*(_read_run(p) for p in self._runs), key=self.key)
        finally:
            self.close()

    def close(self) -> None:
        self._chunk = []
        if self._dir is not None:
            shutil.rmtree(self._dir, ignore_errors=True)
            self._dir = None
        self._runs = []


def external_sort(records: Iterable, max_records: int = 1_000_000,
                  tmpdir: Optional[str] = None, key: Optional[Callable] = None) -> Iterator:
    return iter(ExternalSorter(max_records, tmpdir, key).extend(records))


class SortedFile:
    """A sorted record stream persisted once so it can be scanned many times."""

    def __init__(self, records: Iterable, directory: str, name: str):
        self.path = os.path.join(directory, name + ".pkl")
        self.count = 0
        block = []
        with open(self.path, "wb") as fh:
            for r in records:
                block.append(r)
                if len(block) >= BLOCK:
                    pickle.dump(block, fh, protocol=pickle.HIGHEST_PROTOCOL)
                    self.count += len(block)
                    block = []
            if block:
                pickle.dump(block, fh, protocol=pickle.HIGHEST_PROTOCOL)
                self.count += len(block)

    def __iter__(self) -> Iterator:
        return _read_run(self.path)

    def remove(self) -> None:
        if os.path.exists(self.path):
            os.remove(self.path)


class SpillFile:
    """Append-only record spill, read back in insertion order."""

    def __init__(self, directory: str, name: str):
        self.path = os.path.join(directory, name + ".pkl")
        self._fh = open(self.path, "wb")
        self._block: list = []
        self.count = 0

    def add(self, record) -> None:
        self._block.append(record)
        self.count += 1
        if len(self._block) >= BLOCK:
            pickle.dump(self._block, self._fh, protocol=pickle.HIGHEST_PROTOCOL)
            self._block = []

    def __iter__(self) -> Iterator:
        if self._fh is not None:
            if self._block:
                pickle.dump(self._block, self._fh, protocol=pickle.HIGHEST_PROTOCOL)
                self._block = []
            self._fh.close()
            self._fh = None
        return _read_run(self.path)

    def remove(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None
        if os.path.exists(self.path):
            os.remove(self.path)


def dedup_sorted(records: Iterable, counter: Optional[list] = None) -> Iterator:
    """Drop adjacent duplicates; ``counter[0]`` is incremented per dropped record."""
    sentinel = object()
    last = sentinel
    dropped = 0
    for r in records:
        if r == last:
            dropped += 1
            continue
        last = r
        yield r
    if counter is not None:
        counter[0] += dropped


def merge_join(left: Iterable, right: Iterable, left_key: Callable, right_key: Callable,
               on_unmatched: Optional[Callable] = None) -> Iterator[tuple]:
    """Inner join of two streams sorted by their keys; yields ``(l, r)``.

    ``right`` must have unique keys (a lookup table). Left records with no
    partner are passed to ``on_unmatched`` if given.
    """
    right_it = iter(right)
    r = next(right_it, None)
    rk = right_key(r) if r is not None else None
    for l in left:
        lk = left_key(l)
        while r is not None and rk < lk:
            r = next(right_it, None)
            rk = right_key(r) if r is not None else None
        if r is not None and rk == lk:
            yield l, r
        elif on_unmatched is not None:
            on_unmatched(l)


def group_sorted(records: Iterable, key: Callable) -> Iterator[tuple]:
    for k, grp in groupby(records, key=key):
        yield k, list(grp)
