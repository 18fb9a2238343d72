import os
import sys

import pytest

HERE = os.path.dirname(os.path.abspath(__file__))
MINIWIKI = os.path.join(HERE, "fixtures", "miniwiki")
CONFIG = os.path.join(MINIWIKI, "config.ini")
GOLDEN = os.path.join(MINIWIKI, "golden")

# the oracle script and the support helpers are imported as plain modules
sys.path.insert(0, HERE)


def run_cli(*args) -> int:
    from wikikg.cli import main

    return main([str(a) for a in args])


def run_pipeline(out_dir, *extra) -> None:
    for cmd in ("build", "metrics", "analyze"):
        code = run_cli(cmd, "--config", CONFIG, "--out", out_dir, *extra)
        assert code == 0, f"{cmd} exited with {code}"


@pytest.fixture(scope="session")
def miniwiki_out(tmp_path_factory):
    """One full pipeline run over the mini-wiki, shared by the read-only tests."""
    out = tmp_path_factory.mktemp("miniwiki") / "out"
    run_pipeline(out)
    return out


# -- acceptance lines ---------------------------------------------------------------

ACCEPTANCE: dict = {}


def record_criterion(number: int, title: str, status: str, detail: str = "") -> None:
    line = f"criterion {number}: {status}  {title}" + (f"  ({detail})" if detail else "")
    ACCEPTANCE[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])
