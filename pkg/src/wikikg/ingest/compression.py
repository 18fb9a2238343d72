import bz2
import gzip
import os


def open_input(path):
    """Open a dump for binary reading; ``.gz``/``.bz2`` are decompressed on the fly."""
    path = os.fspath(path)
    if path.endswith(".gz"):
        return gzip.open(path, "rb")
    if path.endswith(".bz2"):
        return bz2.open(path, "rb")
    return open(path, "rb")
