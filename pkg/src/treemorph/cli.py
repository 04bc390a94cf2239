"""Command-line front end.

Every artifact is a JSON document with sorted keys.  Point sets carry
coordinates as decimal strings; trees and traces refer to points by
index and may embed their point set under ``"points"`` so that a single
file is self-contained.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

import jsonschema

from . import graphx, labeled, xform
from .geom import GeometryError, PointSet, generate
from .moves import Kind, MoveError, SimMove, enumerate_neighbors
from .trace import Trace, verify_trace
from .tree import (AnyTree, LabeledPlaneTree, PlaneTree, ReducedLineGraph,
                   TreeError, random_tree, rlg_build, rlg_reconstruct,
                   validate_tree)

log = logging.getLogger(__name__)

KINDS = [k.value for k in Kind]


class SchemaError(ValueError):
    """A document does not match its schema; ``pointer`` locates the fault."""

    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- schemas

_DEC = {"type": "string", "pattern": r"^-?[0-9]+$"}
_IDX = {"type": "integer", "minimum": 0}
_EDGE = {"type": "array", "items": _IDX, "minItems": 2, "maxItems": 2}
_POINTS = {"type": "array",
           "items": {"type": "array", "items": _DEC,
                     "minItems": 2, "maxItems": 2}}

POINTSET_SCHEMA = {
    "type": "object",
    "required": ["points"],
    "properties": {"points": _POINTS,
                   "names": {"type": "array", "items": {"type": "string"}}},
}
TREE_SCHEMA = {
    "type": "object",
    "required": ["edges"],
    "properties": {"points": _POINTS,
                   "edges": {"type": "array", "items": _EDGE},
                   "labels": {"type": "array", "items": _IDX}},
}
_PAIR = {"type": "array", "items": _EDGE, "minItems": 2, "maxItems": 2}
TRACE_SCHEMA = {
    "type": "object",
    "required": ["initial", "steps"],
    "properties": {
        "points": _POINTS,
        "initial": TREE_SCHEMA,
        "theorem": {"type": "string"},
        "bound": {"type": "string", "pattern": r"^[0-9]+(\.[0-9]+)?$"},
        "steps": {"type": "array", "items": {
            "type": "object",
            "required": ["kind", "pairs"],
            "properties": {"kind": {"enum": KINDS},
                           "pairs": {"type": "array", "items": _PAIR,
                                     "minItems": 1},
                           "restricted": {"type": "boolean"},
                           "sim": {"type": "boolean"}}}},
    },
}
RLG_SCHEMA = {
    "type": "object",
    "required": ["vertices", "adjacency", "tags"],
    "properties": {
        "vertices": {"type": "array", "items": _IDX},
        "adjacency": {"type": "array", "items": _EDGE},
        "tags": {"type": "array",
                 "items": {"type": "array", "items": _IDX,
                           "minItems": 3, "maxItems": 3}},
        "n": _IDX,
    },
}


def check_schema(doc, schema: dict) -> None:
    err = jsonschema.exceptions.best_match(
        jsonschema.Draft202012Validator(schema).iter_errors(doc))
    if err is not None:
        pointer = "".join(f"/{p}" for p in err.absolute_path)
        raise SchemaError(pointer, err.message)


# -------------------------------------------------------------------- io

def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True) + "\n"


def load_json(path: str | Path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"not JSON: {exc}") from None


def pointset_doc(ps: PointSet) -> dict:
    return json.loads(ps.to_json())


def pointset_from_doc(doc: dict) -> PointSet:
    check_schema(doc, POINTSET_SCHEMA)
    return PointSet.from_json(json.dumps(doc))


def tree_doc(t: AnyTree, with_points: bool = True) -> dict:
    doc = json.loads(t.to_json())
    if with_points:
        doc["points"] = pointset_doc(t.ps)["points"]
    return doc


def tree_from_doc(doc: dict, ps: PointSet | None = None) -> AnyTree:
    check_schema(doc, TREE_SCHEMA)
    if ps is None:
        if "points" not in doc:
            raise SchemaError("/points", "tree has no embedded point set; "
                              "pass --ps")
        ps = pointset_from_doc({"points": doc["points"]})
    return validate_tree(ps, doc["edges"], doc.get("labels"))


def trace_doc(tr: Trace) -> dict:
    doc = json.loads(tr.to_json())
    doc["points"] = pointset_doc(tr.initial.ps)["points"]
    return doc


def trace_from_doc(doc: dict, ps: PointSet | None = None) -> Trace:
    check_schema(doc, TRACE_SCHEMA)
    if ps is None:
        if "points" not in doc:
            raise SchemaError("/points", "trace has no embedded point set; "
                              "pass --ps")
        ps = pointset_from_doc({"points": doc["points"]})
    inner = {k: v for k, v in doc.items() if k != "points"}
    return Trace.from_json(ps, json.dumps(inner))


def roundtrip(text: str) -> str:
    """Decode and re-encode any artifact; canonical input comes back
    byte for byte."""
    doc = json.loads(text)
    if "steps" in doc:
        return dumps(trace_doc(trace_from_doc(doc)))
    if "edges" in doc:
        return dumps(tree_doc(tree_from_doc(doc), "points" in doc))
    if "vertices" in doc:
        check_schema(doc, RLG_SCHEMA)
        return dumps(doc)
    return dumps(pointset_doc(pointset_from_doc(doc)))


def write_out(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# ------------------------------------------------------------------- svg

VIEW = 1000
PAD = 40


def _frame(ps: PointSet):
    xs = [p.x for p in ps.points]
    ys = [p.y for p in ps.points]
    x0, y0 = min(xs), min(ys)
    span = max(max(xs) - x0, max(ys) - y0, 1)
    scale = Fraction(VIEW - 2 * PAD, span)

    def at(i: int) -> tuple[str, str]:
        p = ps[i]
        x = PAD + (p.x - x0) * scale
        y = VIEW - PAD - (p.y - y0) * scale
        return f"{float(x):.2f}", f"{float(y):.2f}"
    return at


def _svg(ps: PointSet, edges, dashed=(), dotted=(),
         labels: dict | None = None, title: str = "") -> str:
    at = _frame(ps)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" '
           f'viewBox="0 0 {VIEW} {VIEW}" width="{VIEW}" height="{VIEW}">']
    if title:
        out.append(f"<title>{title}</title>")
    out.append('<g stroke="black" stroke-width="3">')
    for e in sorted(edges):
        (x1, y1), (x2, y2) = at(e[0]), at(e[1])
        style = ""
        if e in dashed:
            style = ' stroke-dasharray="12 8"'
        out.append(f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}"{style}/>')
    for e in sorted(dotted):
        (x1, y1), (x2, y2) = at(e[0]), at(e[1])
        out.append(f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" '
                   f'stroke-dasharray="2 6" stroke-linecap="round"/>')
    out.append("</g>")
    if labels:
        out.append('<g font-size="18" text-anchor="middle">')
        for e in sorted(labels):
            (x1, y1), (x2, y2) = at(e[0]), at(e[1])
            mx = (float(x1) + float(x2)) / 2
            my = (float(y1) + float(y2)) / 2
            out.append(f'<text x="{mx:.2f}" y="{my:.2f}">{labels[e]}</text>')
        out.append("</g>")
    out.append('<g fill="black">')
    for i in range(ps.n):
        x, y = at(i)
        out.append(f'<circle cx="{x}" cy="{y}" r="6"/>')
    out.append("</g></svg>\n")
    return "\n".join(out)


def render_svg(obj: AnyTree | Trace) -> str | list[str]:
    """One SVG for a tree; one frame per tree of a trace.  In frame i the
    edges step i removes are dashed and the edges it inserts dotted."""
    if not isinstance(obj, Trace):
        lab = obj.label_map if isinstance(obj, LabeledPlaneTree) else None
        return _svg(obj.ps, obj.edges, labels=lab)
    trees = obj.trees()
    frames = []
    for i, t in enumerate(trees):
        lab = t.label_map if isinstance(t, LabeledPlaneTree) else None
        if i < len(obj.steps):
            s = obj.steps[i]
            frames.append(_svg(t.ps, t.edges, set(s.removed if isinstance(
                s, SimMove) else [s.removed]), set(s.inserted if isinstance(
                    s, SimMove) else [s.inserted]), lab,
                f"step {i + 1} of {len(obj.steps)}"))
        else:
            frames.append(_svg(t.ps, t.edges, labels=lab, title="final"))
    return frames


# ------------------------------------------------------------ algorithms

def _star_alg(fn: Callable) -> Callable:
    def run(t, args):
        p = _need(args.root, "--root")
        tr = fn(t, p)
        return tr, xform.star(t.ps, p)
    return run


def _pair_alg(fn: Callable, **kw) -> Callable:
    def run(t, args):
        t2 = _target(t, args)
        opts = {k: getattr(args, k) for k in kw}
        return fn(t, t2, **opts), t2
    return run


def _hull_path(t, args):
    avoid = tuple(args.avoid) if args.avoid else None
    return xform.convex_hull_path_by_sim_empty_tri(t, avoid), None


def _as_labeled(fn: Callable, **kw) -> Callable:
    def run(t, args):
        t1 = t if isinstance(t, LabeledPlaneTree) else LabeledPlaneTree.of(t)
        t2 = _target(t1, args)
        if not isinstance(t2, LabeledPlaneTree):
            t2 = LabeledPlaneTree.of(t2)
        opts = {k: getattr(args, k) for k in kw}
        return fn(t1, t2, **opts), t2
    return run


ALGORITHMS: dict[str, Callable] = {
    "rotation_star": _star_alg(xform.star_by_rotations),
    "starify": _star_alg(xform.star_by_sim_compatible),
    "sim_rotation_star": _star_alg(xform.star_by_sim_rotations),
    "empty_tri_star": _star_alg(xform.star_by_empty_tri),
    "sim_empty_tri_star": _star_alg(xform.star_by_sim_empty_tri),
    "sim_slide_star": _star_alg(xform.convex_star_by_sim_slides),
    "sim_empty_tri_hull_path": _hull_path,
    "sim_empty_tri_transform": _pair_alg(
        xform.convex_transform_by_sim_empty_tri),
    "slide_transform": _pair_alg(xform.convex_transform_by_slides),
    "path_slides": _pair_alg(xform.path_to_path_slides),
    "labeled_rotations": _as_labeled(labeled.labeled_transform_rotations),
    "labeled_sim_exchange": _as_labeled(
        labeled.labeled_sim_exchange_transform, compatible=True),
    "labeled_sim_empty_tri": _as_labeled(
        labeled.labeled_sim_empty_tri_transform),
    "labeled_cx_empty_tri": _as_labeled(
        labeled.labeled_cx_empty_tri_transform, simultaneous=True),
    "labeled_cx_slides": _as_labeled(
        labeled.labeled_cx_slides_transform, simultaneous=True),
}
# the library names work too
ALIASES = {
    "star_by_rotations": "rotation_star",
    "star_by_sim_compatible": "starify",
    "star_by_sim_rotations": "sim_rotation_star",
    "star_by_empty_tri": "empty_tri_star",
    "star_by_sim_empty_tri": "sim_empty_tri_star",
    "convex_star_by_sim_slides": "sim_slide_star",
    "convex_hull_path_by_sim_empty_tri": "sim_empty_tri_hull_path",
    "convex_transform_by_sim_empty_tri": "sim_empty_tri_transform",
    "convex_transform_by_slides": "slide_transform",
    "path_to_path_slides": "path_slides",
    "labeled_transform_rotations": "labeled_rotations",
    "labeled_sim_exchange_transform": "labeled_sim_exchange",
    "labeled_sim_empty_tri_transform": "labeled_sim_empty_tri",
    "labeled_cx_empty_tri_transform": "labeled_cx_empty_tri",
    "labeled_cx_slides_transform": "labeled_cx_slides",
}


def _need(value, flag: str):
    if value is None:
        raise UsageError(f"{flag} is required for this algorithm")
    return value


def _target(t: AnyTree, args) -> AnyTree:
    path = _need(args.target, "--target")
    return tree_from_doc(load_json(path), t.ps)


# -------------------------------------------------------------- commands

def _ps_arg(args) -> PointSet | None:
    return pointset_from_doc(load_json(args.ps)) if args.ps else None


def cmd_gen(args) -> int:
    params = {"n": args.n, "k": args.k}
    if args.kind in ("convex_regular", "random_general",
                     "random_convex") and args.n is None:
        raise UsageError("--n is required for this kind")
    if args.kind == "binary_tower" and args.k is None:
        raise UsageError("--k is required for binary_tower")
    ps = generate(args.kind, params, args.seed)
    if args.tree is None:
        write_out(dumps(pointset_doc(ps)), args.output)
        return 0
    if args.tree == "random":
        t: AnyTree = random_tree(ps, args.seed)
    elif args.tree == "star":
        t = xform.star(ps, args.root or 0)
    else:
        t = xform.hull_path(ps, min(ps.hull_edges))
    if args.labeled:
        t = LabeledPlaneTree.of(t)
    write_out(dumps(tree_doc(t)), args.output)
    return 0


def cmd_enum(args) -> int:
    ps = pointset_from_doc(load_json(args.ps))
    states = graphx.enumerate_trees(ps, args.labeled, args.cap)
    doc: dict = {"count": str(len(states))}
    if not args.count_only:
        doc["trees"] = [json.loads(graphx.state_to_tree(ps, s).to_json())
                        for s in states]
    write_out(dumps(doc), args.output)
    return 0


def cmd_neighbors(args) -> int:
    t = tree_from_doc(load_json(args.tree), _ps_arg(args))
    moves = enumerate_neighbors(t, args.kind)
    doc = {"count": str(len(moves)),
           "moves": [m.to_dict() for m in moves]}
    write_out(dumps(doc), args.output)
    return 0


def cmd_transform(args) -> int:
    name = ALIASES.get(args.alg, args.alg)
    t = tree_from_doc(load_json(args.tree), _ps_arg(args))
    tr, target = ALGORITHMS[name](t, args)
    v = verify_trace(tr, target)
    if not v:
        print(f"trace failed verification at step {v.index}: {v.reason}",
              file=sys.stderr)
        return 1
    log.info("%s: %d steps (bound %s)", name, len(tr), tr.claimed_bound)
    write_out(dumps(trace_doc(tr)), args.output)
    return 0


def _graph(args, ps: PointSet) -> graphx.TransitionGraph:
    return graphx.build_transition_graph(
        ps, args.kind, simultaneous=args.simultaneous,
        restricted=args.restricted, labeled=args.labeled, cap=args.cap)


def cmd_distance(args) -> int:
    ps = pointset_from_doc(load_json(args.ps))
    a = tree_from_doc(load_json(args.source), ps)
    b = tree_from_doc(load_json(args.target), ps)
    if args.labeled:
        a = a if isinstance(a, LabeledPlaneTree) else LabeledPlaneTree.of(a)
        b = b if isinstance(b, LabeledPlaneTree) else LabeledPlaneTree.of(b)
    g = _graph(args, ps)
    write_out(f"{graphx.distance(g, a, b)}\n", args.output)
    return 0


def cmd_diameter(args) -> int:
    ps = pointset_from_doc(load_json(args.ps))
    g = _graph(args, ps)
    res = graphx.diameter(g, approximate=args.approximate)
    text = graphx.diameter_csv_row(g, res)
    if args.header:
        text = graphx.CSV_HEADER + text
    write_out(text, args.output)
    return 0


def cmd_verify(args) -> int:
    ps = _ps_arg(args)
    tr = trace_from_doc(load_json(args.trace), ps)
    target = None
    if args.target:
        target = tree_from_doc(load_json(args.target), tr.initial.ps)
    v = verify_trace(tr, target)
    if v:
        print(f"ok: {len(tr)} steps, bound {tr.claimed_bound}")
        return 0
    print(f"invalid at step {v.index}: {v.reason}")
    return 1


def cmd_render(args) -> int:
    if (args.tree is None) == (args.trace is None):
        raise UsageError("give exactly one of --tree and --trace")
    ps = _ps_arg(args)
    if args.tree:
        write_out(render_svg(tree_from_doc(load_json(args.tree), ps)),
                  args.output)
        return 0
    frames = render_svg(trace_from_doc(load_json(args.trace), ps))
    if args.output is None or args.output == "-":
        sys.stdout.write("".join(frames))
        return 0
    out = Path(args.output)
    for i, svg in enumerate(frames):
        out.with_name(f"{out.stem}-{i:03d}{out.suffix or '.svg'}"
                      ).write_text(svg)
    return 0


def cmd_rlg(args) -> int:
    if args.action == "build":
        t = tree_from_doc(load_json(_need(args.tree, "--tree")),
                          _ps_arg(args))
        doc = json.loads(rlg_build(t, args.tags).to_json())
        doc["n"] = t.n
        write_out(dumps(doc), args.output)
        return 0
    doc = load_json(_need(args.rlg, "--rlg"))
    check_schema(doc, RLG_SCHEMA)
    n = args.n if args.n is not None else doc.get("n")
    if n is None:
        raise UsageError("--n is required when the graph does not store it")
    g = ReducedLineGraph(
        tuple(doc["vertices"]),
        frozenset(tuple(e) for e in doc["adjacency"]),
        tuple(((v, w), k) for v, w, k in doc["tags"]))
    t = rlg_reconstruct(g, n, args.tags)
    write_out(dumps(tree_doc(t)), args.output)
    return 0


# ---------------------------------------------------------------- parser

class _Parser(argparse.ArgumentParser):
    """Usage errors print the full help and exit with status 2."""

    def error(self, message):
        self.print_help(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _graph_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--ps", required=True, help="point-set JSON")
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--simultaneous", action="store_true")
    p.add_argument("--restricted", action="store_true",
                   help="restricted simultaneous slides")
    p.add_argument("--labeled", action="store_true")
    p.add_argument("--cap", type=int, default=graphx.ENUM_CAP,
                   help="maximum number of enumerated trees")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="treemorph", allow_abbrev=False,
                  description="Transform plane spanning trees.")
    top.add_argument("--verbose", action="store_true")
    sub = top.add_subparsers(dest="command", required=True,
                             parser_class=_Parser)

    def cmd(name, fn, help_):
        p = sub.add_parser(name, help=help_, allow_abbrev=False)
        p.set_defaults(func=fn)
        p.add_argument("--output", "-o", default=None,
                       help="output path (default stdout)")
        return p

    p = cmd("gen", cmd_gen, "generate a point set or a tree on one")
    p.add_argument("--kind", required=True,
                   choices=["convex_regular", "random_general",
                            "random_convex", "binary_tower",
                            "sim_rotation_lb"])
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tree", choices=["random", "star", "hull_path"])
    p.add_argument("--root", type=int)
    p.add_argument("--labeled", action="store_true")

    p = cmd("enum", cmd_enum, "enumerate all plane spanning trees")
    p.add_argument("--ps", required=True)
    p.add_argument("--labeled", action="store_true")
    p.add_argument("--cap", type=int, default=graphx.ENUM_CAP)
    p.add_argument("--count-only", action="store_true")

    p = cmd("neighbors", cmd_neighbors, "list single moves of one kind")
    p.add_argument("--tree", required=True)
    p.add_argument("--ps")
    p.add_argument("--kind", required=True, choices=KINDS)

    p = cmd("transform", cmd_transform, "run a transformation algorithm")
    p.add_argument("--alg", required=True,
                   choices=sorted(ALGORITHMS) + sorted(ALIASES),
                   metavar="ALG")
    p.add_argument("--tree", required=True)
    p.add_argument("--ps")
    p.add_argument("--root", type=int, help="star centre")
    p.add_argument("--target", help="target tree JSON")
    p.add_argument("--avoid", type=int, nargs=2, metavar=("U", "V"),
                   help="hull edge the hull path leaves out")
    p.add_argument("--compatible", action="store_true")
    p.add_argument("--simultaneous", action="store_true")

    p = cmd("distance", cmd_distance, "exact transformation distance")
    _graph_flags(p)
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)

    p = cmd("diameter", cmd_diameter, "exact transition-graph diameter")
    _graph_flags(p)
    p.add_argument("--approximate", action="store_true",
                   help="double-sweep lower bound")
    p.add_argument("--header", action="store_true")

    p = cmd("verify", cmd_verify, "replay and check a trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--ps")
    p.add_argument("--target")

    p = cmd("render", cmd_render, "draw a tree or trace as SVG")
    p.add_argument("--tree")
    p.add_argument("--trace")
    p.add_argument("--ps")

    p = cmd("rlg", cmd_rlg, "reduced line graph of a convex tree")
    p.add_argument("action", choices=["build", "reconstruct"])
    p.add_argument("--tree")
    p.add_argument("--ps")
    p.add_argument("--rlg")
    p.add_argument("--n", type=int)
    p.add_argument("--tags", choices=["slot", "compact"], default="slot")
    return top


DOMAIN_ERRORS = (TreeError, MoveError, GeometryError, SchemaError,
                 xform.TransformError, labeled.GadgetError,
                 graphx.CapExceeded, graphx.Disconnected, graphx.Unreachable,
                 OSError, ValueError)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose
                        else logging.WARNING, format="%(message)s")
    if "TREEMORPH_THREADS" in os.environ:
        log.debug("worker cap %d", graphx.threads())
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_help(sys.stderr)
        print(f"treemorph: error: {exc}", file=sys.stderr)
        return 2
    except DOMAIN_ERRORS as exc:
        print(f"treemorph: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


dispatch = main

if __name__ == "__main__":
    sys.exit(main())
