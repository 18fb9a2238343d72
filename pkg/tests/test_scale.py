import json
import os
import subprocess
import sys

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def run_scale(tmp_path, edges, pages, ceiling) -> dict:
    out = subprocess.run([sys.executable, "-m", "tests.support.scale_links", str(edges), str(pages),
                          str(ceiling), str(tmp_path / "graph")],
                         cwd=ROOT, check=True, capture_output=True, text=True).stdout
    return json.loads(out)


def test_million_edges_under_a_small_ceiling_spill_and_balance(tmp_path):
    r = run_scale(tmp_path, 1_000_000, 100_000, 64 << 20)
    assert r["violations"] == 0
    assert r["links"] == r["linked"] == r["counters"]["page_link.edges"]
    c = r["counters"]
    # every input row is either an edge, a duplicate or a drop
    dropped = sum(v for k, v in c.items() if k.startswith("page_link.dropped"))
    assert c["page_link.rows_in"] == 1_000_000 == c["page_link.edges"] + c["page_link.deduplicated"] + dropped
    assert c["page_link.dropped_unresolved"] > 0
