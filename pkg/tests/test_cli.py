import json
import subprocess
import sys

import pytest

from treemorph import geom
from treemorph.cli import (SchemaError, dumps, main, render_svg, roundtrip,
                           trace_doc, tree_doc)
from treemorph.trace import Trace, verify_trace
from treemorph.tree import LabeledPlaneTree, random_tree, validate_tree
from treemorph.xform import convex_transform_by_slides, hull_path, star


def run(tmp_path, *argv):
    return main([str(a) for a in argv])


@pytest.fixture
def tree_file(tmp_path):
    assert run(tmp_path, "gen", "--kind", "random_convex", "--n", 12,
               "--seed", 3, "--tree", "random",
               "-o", tmp_path / "t.json") == 0
    return tmp_path / "t.json"


def test_gen_point_set(tmp_path):
    out = tmp_path / "ps.json"
    assert run(tmp_path, "gen", "--kind", "convex_regular", "--n", 8,
               "-o", out) == 0
    ps = geom.PointSet.from_json(out.read_text())
    assert ps.n == 8 and ps.position is geom.Position.CONVEX


def test_gen_is_reproducible(tmp_path):
    for name in ("a", "b"):
        run(tmp_path, "gen", "--kind", "random_general", "--n", 30,
            "--seed", 9, "--tree", "random", "-o", tmp_path / name)
    assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()


def test_transform_pipeline(tmp_path, tree_file):
    out = tmp_path / "trace.json"
    assert run(tmp_path, "transform", "--alg", "sim_slide_star", "--tree",
               tree_file, "--root", 0, "-o", out) == 0
    doc = json.loads(out.read_text())
    ps = geom.PointSet.from_json(json.dumps({"points": doc["points"]}))
    tr = Trace.from_json(ps, json.dumps(
        {k: v for k, v in doc.items() if k != "points"}))
    assert verify_trace(tr, star(ps, 0))
    assert run(tmp_path, "verify", "--trace", out) == 0


@pytest.mark.parametrize("alg,extra", [
    ("rotation_star", ["--root", 0]),
    ("starify", ["--root", 0]),
    ("sim_rotation_star", ["--root", 0]),
    ("empty_tri_star", ["--root", 0]),
    ("sim_empty_tri_star", ["--root", 0]),
    ("sim_empty_tri_hull_path", ["--avoid", 0, 1]),
    ("slide_transform", ["--target", "T"]),
    ("sim_empty_tri_transform", ["--target", "T"]),
    ("labeled_rotations", ["--target", "T"]),
    ("labeled_sim_exchange", ["--target", "T", "--compatible"]),
    ("labeled_sim_empty_tri", ["--target", "T"]),
    ("labeled_cx_empty_tri", ["--target", "T", "--simultaneous"]),
    ("labeled_cx_slides", ["--target", "T"]),
    ("convex_transform_by_slides", ["--target", "T"]),
])
def test_every_algorithm(tmp_path, alg, extra):
    run(tmp_path, "gen", "--kind", "convex_regular", "--n", 9, "--seed", 1,
        "--tree", "random", "--labeled", "-o", tmp_path / "a.json")
    run(tmp_path, "gen", "--kind", "convex_regular", "--n", 9, "--seed", 2,
        "--tree", "random", "-o", tmp_path / "b.json")
    extra = [tmp_path / "b.json" if x == "T" else x for x in extra]
    out = tmp_path / "tr.json"
    assert run(tmp_path, "transform", "--alg", alg, "--tree",
               tmp_path / "a.json", *extra, "-o", out) == 0
    assert run(tmp_path, "verify", "--trace", out) == 0


def test_diameter_row(tmp_path, capsys):
    run(tmp_path, "gen", "--kind", "convex_regular", "--n", 6,
        "-o", tmp_path / "ps.json")
    capsys.readouterr()
    assert run(tmp_path, "diameter", "--ps", tmp_path / "ps.json",
               "--kind", "slide") == 0
    row = capsys.readouterr().out.strip().split(",")
    assert row[:7] == ["6", "convex", "slide", "0", "0", "273", "6"]


def test_enum_distance_neighbors(tmp_path, capsys):
    ps = tmp_path / "ps.json"
    run(tmp_path, "gen", "--kind", "convex_regular", "--n", 6, "-o", ps)
    run(tmp_path, "gen", "--kind", "convex_regular", "--n", 6,
        "--tree", "star", "-o", tmp_path / "s.json")
    run(tmp_path, "gen", "--kind", "convex_regular", "--n", 6,
        "--tree", "hull_path", "-o", tmp_path / "p.json")
    capsys.readouterr()
    assert run(tmp_path, "enum", "--ps", ps, "--count-only") == 0
    assert json.loads(capsys.readouterr().out) == {"count": "273"}
    assert run(tmp_path, "neighbors", "--tree", tmp_path / "s.json",
               "--kind", "slide") == 0
    assert json.loads(capsys.readouterr().out)["count"] == "8"
    assert run(tmp_path, "distance", "--ps", ps, "--kind", "slide",
               "--source", tmp_path / "s.json",
               "--target", tmp_path / "p.json") == 0
    d = int(capsys.readouterr().out)
    assert 0 < d <= 7
    assert run(tmp_path, "enum", "--ps", ps, "--cap", 10) == 1


def test_rlg_roundtrip(tmp_path, capsys):
    run(tmp_path, "gen", "--kind", "convex_regular", "--n", 7,
        "--tree", "random", "--seed", 4, "--labeled",
        "-o", tmp_path / "t.json")
    assert run(tmp_path, "rlg", "build", "--tree", tmp_path / "t.json",
               "-o", tmp_path / "g.json") == 0
    assert run(tmp_path, "rlg", "reconstruct", "--rlg",
               tmp_path / "g.json", "-o", tmp_path / "back.json") == 0
    back = json.loads((tmp_path / "back.json").read_text())
    assert len(back["edges"]) == 6 and sorted(back["labels"]) == \
        list(range(1, 7))


class TestExitCodes:
    def test_unknown_flag(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as ei:
            main(["gen", "--kind", "convex_regular", "--n", "4", "--bogus"])
        assert ei.value.code == 2
        assert "usage" in capsys.readouterr().err

    def test_short_flags_rejected(self):
        with pytest.raises(SystemExit) as ei:
            main(["gen", "--kind", "convex_regular", "-n", "4"])
        assert ei.value.code == 2

    def test_no_abbreviations(self):
        with pytest.raises(SystemExit) as ei:
            main(["gen", "--ki", "convex_regular", "--n", "4"])
        assert ei.value.code == 2

    def test_missing_required_for_algorithm(self, tmp_path, tree_file):
        assert run(tmp_path, "transform", "--alg", "sim_slide_star",
                   "--tree", tree_file) == 2

    def test_domain_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"points": [["0", "0"], ["1", "0"],
                                              ["0", "1"], ["1", "1"]],
                                   "edges": [[0, 3], [1, 2], [0, 1]]}))
        assert run(tmp_path, "neighbors", "--tree", bad,
                   "--kind", "slide") == 1
        assert "cross" in capsys.readouterr().err

    def test_tampered_trace(self, tmp_path, tree_file):
        out = tmp_path / "tr.json"
        run(tmp_path, "transform", "--alg", "rotation_star", "--tree",
            tree_file, "--root", 0, "-o", out)
        doc = json.loads(out.read_text())
        doc["bound"] = "0"
        out.write_text(json.dumps(doc))
        assert run(tmp_path, "verify", "--trace", out) == 1

    def test_module_entry_point(self, tmp_path):
        r = subprocess.run([sys.executable, "-m", "treemorph", "gen",
                            "--kind", "convex_regular", "--n", "5"],
                           capture_output=True, text=True)
        assert r.returncode == 0 and json.loads(r.stdout)["points"]
        r = subprocess.run([sys.executable, "-m", "treemorph", "nope"],
                           capture_output=True, text=True)
        assert r.returncode == 2


class TestSchema:
    def test_pointer_diagnostics(self, tmp_path):
        with pytest.raises(SchemaError) as ei:
            roundtrip(json.dumps({"points": [["1", "2"], [3, "4"]]}))
        assert ei.value.pointer == "/points/1/0"
        with pytest.raises(SchemaError) as ei:
            roundtrip(json.dumps({"points": [["0", "0"], ["1", "0"]],
                                  "edges": [[0, "x"]]}))
        assert ei.value.pointer == "/edges/0/1"

    def test_forty_digit_points(self):
        big = "1" + "0" * 39
        doc = {"points": [[big, "0"], ["0", big], ["-" + big, "-7"]]}
        text = dumps(doc)
        assert roundtrip(text) == text
        ps = geom.PointSet.from_json(text)
        assert ps[0].x == 10**39

    def test_labeled_tree(self):
        ps = geom.convex_regular(6)
        t = LabeledPlaneTree.of(hull_path(ps, (0, 5)),
                                {(0, 1): 5, (1, 2): 4, (2, 3): 3,
                                 (3, 4): 2, (4, 5): 1})
        text = dumps(tree_doc(t))
        assert roundtrip(text) == text
        assert json.loads(text)["labels"] == [5, 4, 3, 2, 1]

    def test_trace(self):
        ps = geom.random_convex(10, 2)
        tr = convex_transform_by_slides(random_tree(ps, 1),
                                        random_tree(ps, 2))
        text = dumps(trace_doc(tr))
        assert roundtrip(text) == text


class TestRender:
    def test_square_star(self):
        sq = geom.PointSet.of([(0, 0), (1, 0), (1, 1), (0, 1)])
        svg = render_svg(star(sq, 0))
        assert svg.count("<line") == 3
        assert 'viewBox="0 0 1000 1000"' in svg

    def test_trace_frames_and_styles(self):
        ps = geom.convex_regular(6)
        t = star(ps, 0)
        tr = Trace(t, [], 2)
        from treemorph.moves import Kind, Move
        tr.steps = [Move((0, 2), (1, 2), Kind.SLIDE),
                    Move((0, 3), (2, 3), Kind.SLIDE)]
        frames = render_svg(tr)
        assert len(frames) == 3
        assert frames[0].count("stroke-dasharray=\"12 8\"") == 1
        assert frames[0].count("stroke-dasharray=\"2 6\"") == 1
        assert "dasharray" not in frames[2]

    def test_deterministic(self, tmp_path, tree_file):
        outs = []
        for name in ("a.svg", "b.svg"):
            run(tmp_path, "render", "--tree", tree_file,
                "-o", tmp_path / name)
            outs.append((tmp_path / name).read_bytes())
        assert outs[0] == outs[1]

    def test_trace_files(self, tmp_path, tree_file):
        run(tmp_path, "transform", "--alg", "starify", "--tree", tree_file,
            "--root", 0, "-o", tmp_path / "tr.json")
        n = len(json.loads((tmp_path / "tr.json").read_text())["steps"])
        assert run(tmp_path, "render", "--trace", tmp_path / "tr.json",
                   "-o", tmp_path / "f.svg") == 0
        assert len(list(tmp_path.glob("f-*.svg"))) == n + 1
