"""Smoke test for the `sdmapkit` extension module.

Build and install first, e.g.
    maturin build --release -m crates/py/Cargo.toml -o dist && pip install dist/sdmapkit-*.whl
then run `python python/smoke_test.py` (or under pytest).
"""

import json
import math
from pathlib import Path

import sdmapkit

FIXTURES = Path(__file__).resolve().parent.parent / "crates" / "cli" / "tests" / "fixtures"


def read(name):
    return (FIXTURES / name).read_text()


def test_projection():
    x, y = sdmapkit.project((0.0, 0.0), (0.0, 0.001))
    assert abs(x - 111.319) < 0.01 and abs(y) < 1e-9


def test_pipeline():
    g = sdmapkit.ingest(read("town.osm"), read("poses.json"))
    assert (g.node_count, g.edge_count) == (255, 252)
    assert g.component_count() == 3
    assert g.max_edge_length() <= 1.0 + 1e-9
    assert g.origin == (37.0, -122.00002)

    back = sdmapkit.SdGraph.from_sdg(g.to_sdg())
    assert back.to_sdg() == g.to_sdg()
    assert back.nodes() == g.nodes()

    canvas = sdmapkit.rasterize(g)
    assert canvas.shape == (200, 100, 4)
    assert sum(v > 0 for v in canvas.values()) > 0
    assert sdmapkit.BevCanvas.from_bytes(canvas.to_bytes()).values() == canvas.values()
    assert canvas.to_png()[:8] == b"\x89PNG\r\n\x1a\n"

    feats = sdmapkit.align(g, canvas)
    assert len(feats) == g.node_count
    (row, col, inside), vec = feats[0]
    assert len(vec) == 27 + 4

    same, _ = g.perturb(0.0, 0.0, seed=1)
    assert same.to_sdg() == g.to_sdg()
    moved, (rot, tx, ty) = g.perturb(1.0, 5.0, seed=1)
    assert abs(math.hypot(tx, ty) - 1.0) < 1e-9
    assert abs(abs(math.degrees(rot)) - 5.0) < 1e-9
    assert moved.edges() == g.edges()


def test_metrics():
    assert sdmapkit.chamfer([(0, 0)], [(3, 4)]) == 5.0
    assert sdmapkit.frechet([(0, 0), (1, 0)], [(0, 1), (1, 1)]) == 1.0
    assert sorted(sdmapkit.hungarian([[4, 1], [2, 8]])) == [(0, 1), (1, 0)]
    assert abs(sdmapkit.ols(0.284, 0.45, 0.0415, 0.207) - 0.348) < 0.01

    report = sdmapkit.evaluate(read("pred.olann.jsonl"), read("gt.olann.jsonl"))
    golden = json.loads(read("report.golden.json"))
    for key in ("det_l", "det_t", "top_ll", "top_lt", "ols"):
        assert abs(report[key] - golden[key]) < 1e-12, key
    same = sdmapkit.evaluate(read("gt.olann.jsonl"), read("gt.olann.jsonl"), task="perception")
    assert same["map"] == 1.0


def test_errors():
    for call in (
        lambda: sdmapkit.ingest("<osm><way", "[]"),
        lambda: sdmapkit.evaluate("{}", "", task="bogus"),
        lambda: sdmapkit.rasterize(sdmapkit.SdGraph.from_sdg(""), resolution=0.0),
        lambda: sdmapkit.BevCanvas.from_bytes(b"nope"),
    ):
        try:
            call()
        except ValueError:
            continue
        raise AssertionError("expected ValueError")


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_"):
            fn()
            print(f"ok {name}")
