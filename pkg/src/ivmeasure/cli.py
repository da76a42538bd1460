"""Command-line front end.

Exit codes: 0 ok, 1 a check failed or the model is inconsistent, 2 budget
exhausted, 3 malformed input.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path

import jsonschema

from . import centerpoint as cp
from . import cubes as cb
from . import graded_algebra as ga
from . import ideals as idl
from . import ivm_engine as ie
from . import novikov as nv
from .cubical_space import AxisInterval, BudgetError, ModelError, Polyinterval, SphereModel, TorusGrid

EXIT_OK, EXIT_FAIL, EXIT_BUDGET, EXIT_SCHEMA = 0, 1, 2, 3


class SchemaError(ValueError):
    pass


class CheckFailed(RuntimeError):
    pass


# ----------------------------------------------------------------------------
# schemas

_RING = {"type": ["object", "null"]}
_INTERVAL = {
    "type": "object",
    "properties": {"kind": {"enum": ["full", "empty", "closed", "open"]},
                   "start": {"type": "integer"}, "length": {"type": "integer"}},
    "required": ["kind"],
}

SCHEMAS = {
    "algebra": {
        "type": "object",
        "properties": {
            "kind": {"const": "algebra"},
            "ground": {"enum": ["F2", "Q"]},
            "model": {"type": "object", "properties": {"name": {"type": "string"}},
                      "required": ["name"]},
            "basis": {"type": "array", "items": {
                "type": "object", "required": ["label", "degree"],
                "properties": {"label": {"type": "string"}, "degree": {"type": "integer"}}}},
            "products": {"type": "array"},
            "modulus": {"type": "integer", "minimum": 0},
            "ring": _RING,
        },
        "oneOf": [{"required": ["model"]}, {"required": ["basis"]}],
    },
    "ivm-query": {
        "type": "object",
        "properties": {
            "kind": {"const": "ivm-query"},
            "model": {"enum": ["sphere", "torus"]},
            "ground": {"enum": ["F2", "Q"]},
            "areas": {"type": "array", "items": {"type": ["string", "integer", "number"]},
                      "minItems": 12, "maxItems": 12},
            "faces": {"type": "array", "items": {"type": "integer", "minimum": 0, "maximum": 11}},
            "n": {"type": "integer", "minimum": 1, "maximum": 3},
            "box": {"type": "object", "required": ["axes", "sizes"],
                    "properties": {"axes": {"type": "array", "items": _INTERVAL},
                                   "sizes": {"type": "array", "items": {"type": "integer"}}}},
        },
        "required": ["model"],
    },
    "axioms-query": {
        "type": "object",
        "properties": {
            "kind": {"const": "axioms-query"},
            "model": {"enum": ["sphere", "cohomology", "trivial"]},
            "areas": {"type": "array", "minItems": 12, "maxItems": 12},
            "m": {"type": "integer", "minimum": 3, "maximum": 4},
        },
        "required": ["model"],
    },
    "pushforward-query": {
        "type": "object",
        "properties": {
            "kind": {"const": "pushforward-query"},
            "n": {"type": "integer", "minimum": 1, "maximum": 2},
            "m": {"type": "integer", "minimum": 3, "maximum": 6},
            "coordinate": {"type": "string", "pattern": "^[pq][1-9]$"},
            "ground": {"enum": ["F2", "Q"]},
        },
    },
    "centerpoint-query": {
        "type": "object",
        "properties": {
            "kind": {"const": "centerpoint-query"},
            "grid": {"type": "object", "properties": {
                "m": {"type": "integer", "minimum": 3, "maximum": 8}}},
            "target": {"type": "object", "required": ["axes"]},
            "map": {"type": "object", "properties": {
                "kind": {"enum": ["projection", "random"]},
                "axis": {"type": "integer", "minimum": 0, "maximum": 1},
                "seed": {"type": "integer"}}, "required": ["kind"]},
            "ideal": {"enum": ["whole", "top", "zero"]},
        },
        "required": ["target", "map"],
    },
    "cube": {
        "type": "object",
        "properties": {
            "kind": {"const": "cube"},
            "n": {"type": "integer", "minimum": 0, "maximum": 6},
            "modulus": {"type": "integer", "minimum": 0},
            "ring": _RING,
            "vertices": {"type": "object", "additionalProperties": {
                "type": "object", "required": ["degrees"],
                "properties": {"degrees": {"type": "array", "items": {"type": "integer"}},
                               "labels": {"type": "array", "items": {"type": "integer"}}}}},
            "maps": {"type": "array", "items": {
                "type": "object", "required": ["face", "entries"],
                "properties": {"face": {"type": "string", "pattern": "^[01*]*$"},
                               "entries": {"type": "array", "items": {
                                   "type": "array", "minItems": 3, "maxItems": 3}}}}},
        },
        "required": ["kind", "n", "vertices"],
    },
    "ray": {
        "type": "object",
        "properties": {
            "kind": {"const": "ray"},
            "tail": {"enum": list(cb.TAILS)},
            "cubes": {"type": "array", "minItems": 1},
            "maps": {"type": "array"},
        },
        "required": ["kind", "cubes", "maps"],
    },
    "demo": {
        "type": "object",
        "properties": {"demo": {"type": "string"}, "params": {"type": "object"},
                       "expect": {"type": "object"}},
        "required": ["demo", "params", "expect"],
    },
}


def validate(doc, schema: str):
    try:
        jsonschema.validate(doc, SCHEMAS[schema])
    except jsonschema.ValidationError as exc:
        raise SchemaError(f"{schema} document: {exc.message}") from None


def load(path: str, schema: str):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
        doc = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from None
    validate(doc, schema)
    return doc


def _ground(name: str | None) -> nv.GroundField:
    return nv.QQ if name == "Q" else nv.F2


# ----------------------------------------------------------------------------
# builders shared by commands and demos


def build_algebra_doc(doc) -> ga.GradedAlgebra:
    ground = _ground(doc.get("ground"))
    if "model" in doc:
        params = {k: v for k, v in doc["model"].items() if k != "name"}
        return ga.standard_model(doc["model"]["name"], ground, **params)
    return ga.build_algebra(doc)


def sphere_model(areas) -> SphereModel:
    return SphereModel(None if areas is None else [Fraction(str(a)) for a in areas])


def hemisphere_areas(center: int, inner: str, outer: str) -> tuple[list[Fraction], list[int]]:
    """Areas giving the face ``center`` and its neighbours area ``inner``
    each, the other faces ``outer``; returns the areas and the hemisphere."""
    m = SphereModel()
    hemi = sorted({center} | set(m.face_adjacency()[center]))
    areas = [Fraction(inner) if f in hemi else Fraction(outer) for f in range(12)]
    return areas, hemi


def torus_box(doc) -> ie.TorusBox:
    box = ie.TorusBox.from_json(doc)
    box.validate()
    return box


# ----------------------------------------------------------------------------
# output


def emit(result: dict, fmt: str, out=None):
    out = out or sys.stdout
    if fmt == "json":
        out.write(json.dumps(result, sort_keys=True, indent=2, default=str) + "\n")
        return
    for key in sorted(result):
        val = result[key]
        if isinstance(val, (dict, list)):
            val = json.dumps(val, sort_keys=True, default=str)
        out.write(f"{key:28s} {val}\n")


# ----------------------------------------------------------------------------
# commands


def cmd_algebra(args) -> dict:
    doc = load(args.input, "algebra")
    alg = build_algebra_doc(doc)
    if args.action == "build":
        return {"algebra": alg.to_json(), "dim": alg.dim,
                "degrees": sorted(set(alg.degrees))}
    if args.action == "rank":
        rep = idl.d_rank(alg, args.d, mode=args.mode, budget=args.budget)
        if rep.detail.get("reason") == "budget exceeded":
            args.exit_code = EXIT_BUDGET
        return rep.to_json()
    res = idl.a_slash_r(alg, args.r, budget=args.budget)
    if res.status != "exact":
        args.exit_code = EXIT_BUDGET
    return res.to_json()


def cmd_ivm(args) -> dict:
    if args.action == "eval":
        doc = load(args.input, "ivm-query")
        ground = _ground(doc.get("ground"))
        if doc["model"] == "sphere":
            model = sphere_model(doc.get("areas"))
            meas = ie.SphereIVQM(model, ground)
            region = model.region(doc.get("faces", []))
            val = meas.value(region)
            return {"ideal": val.to_json(), "area": str(model.area(region[0])),
                    "disk": model.is_disk(region), "value": val.describe()}
        if "box" not in doc or "n" not in doc:
            raise SchemaError("torus queries need n and box")
        meas = ie.TorusIVQM(doc["n"], ground)
        box = torus_box(doc["box"])
        if len(box.axes) != 2 * doc["n"]:
            raise SchemaError("box needs 2n intervals")
        val = meas.value(box)
        return {"ideal": val.to_json(), "value": val.describe(), "displaceable": box.displaceable()}
    if args.action == "check-axioms":
        doc = load(args.input, "axioms-query")
        if doc["model"] == "sphere":
            rep = ie.check_sphere_ivqm(ie.SphereIVQM(sphere_model(doc.get("areas"))))
        else:
            grid = TorusGrid(2, doc.get("m", 3))
            lattice = ie.torus_square_lattice(grid)
            if doc["model"] == "cohomology":
                meas = ie.CohomologyMeasure(grid)
            else:
                meas = ie.TrivialMeasure(grid.algebra(), lambda s: s.is_full())
            rep = ie.check_axioms(meas, lattice)
        out = rep.to_json()
        if not rep.ok:
            raise CheckFailed(json.dumps(out, default=str))
        return out
    doc = load(args.input, "pushforward-query")
    n, m = doc.get("n", 1), doc.get("m", 4)
    meas = ie.TorusIVQM(n, _ground(doc.get("ground")))
    push = ie.circle_pushforward(meas, m, doc.get("coordinate", "p1"))
    rep = ie.check_axioms(push, ie.circle_lattice(m))
    out = {"kind": push.kind, "axioms": rep.to_json(),
           "values": {str(s): push.value(s).describe() for s in ie.circle_subcomplexes(m)[:8]}}
    if not rep.ok:
        raise CheckFailed(json.dumps(out, default=str))
    return out


def cmd_centerpoint(args) -> dict:
    if args.action == "harness":
        if args.kind == "gromov":
            rep = cp.gromov_harness(args.count, args.size or 16, args.path_vertices, args.seed)
        else:
            rep = cp.simplex_harness(args.count, args.size or 12, args.levels, args.seed)
        out = rep.to_json()
        if not rep.ok:
            raise CheckFailed(json.dumps(out, default=str))
        return out
    doc = load(args.input, "centerpoint-query")
    return solve_centerpoint(doc)


def solve_centerpoint(doc) -> dict:
    import random
    target = cp.FiniteTarget.from_json(doc["target"])
    grid = TorusGrid(2, doc.get("grid", {}).get("m", 4))
    mdoc = doc["map"]
    if mdoc["kind"] == "projection":
        axis = mdoc.get("axis", 0)
        top = target.axes[0][0]
        wrap = target.axes[0][1]

        m = grid.sizes[axis]

        def fn(v):
            x = v[axis]
            # a path target gets the folded circle, clipped; still 1-Lipschitz
            return x % top if wrap else min(x, m - x, top)
        fmap = cp.map_from_function(grid, target, fn)
    else:
        fmap = cp.random_lipschitz_map(grid, target, random.Random(mdoc.get("seed", 0)))
    base = ie.CohomologyMeasure(grid)
    alg = base.algebra
    kind = doc.get("ideal", "whole")
    if kind == "whole":
        ideal = idl.whole(alg)
    elif kind == "zero":
        ideal = idl.zero_ideal(alg)
    else:
        ideal = idl.ideal_from_generators(alg, [alg.basis(alg.dim - 1)])
    problem = cp.CenterpointProblem(target, lambda z: base.value(fmap.preimage(z)), ideal)
    res = cp.find_centerpoints(problem)
    enum = cp.centerpoints_by_enumeration(problem)
    out = res.to_json()
    out["enumeration_agrees"] = enum == res.points
    if not out["enumeration_agrees"]:
        raise CheckFailed("solver and enumeration disagree")
    return out


def cmd_cubes(args) -> dict:
    if args.action == "telescope":
        doc = load(args.input, "ray")
        ray = cb.CubeRay.from_json(doc)
        tel = cb.telescope(ray)
        return {"cube": tel.to_json(), "prefix_homology": cb.homology(tel).to_json(), "tail": ray.tail}
    doc = load(args.input, "cube")
    cube = cb.Cube.from_json(doc)
    if args.action == "validate":
        cube.validate()
        return {"valid": True, "n": cube.n, "nonzero_faces": len(cube.maps)}
    cube.validate()
    if args.action == "cone":
        out = cb.cocone(cube, args.direction) if args.cocone else cb.cone(cube, args.direction)
        out.validate()
        return out.to_json()
    rep = cb.homology(cube, args.torsion)
    return rep.to_json()


# ----------------------------------------------------------------------------
# demos


def demo_path(name: str):
    return resources.files("ivmeasure") / "data" / "demos" / f"{name}.json"


def demo_names() -> list[str]:
    base = resources.files("ivmeasure") / "data" / "demos"
    return sorted(p.name[:-5] for p in base.iterdir() if p.name.endswith(".json"))


def _interval(doc) -> AxisInterval:
    return AxisInterval.from_json(doc)


def run_demo(doc) -> tuple[dict, dict]:
    """Run a demo document; returns (result, expectations)."""
    name, p = doc["demo"], doc["params"]
    ground = _ground(p.get("ground"))
    if name == "sphere-ivqm":
        areas, hemi = hemisphere_areas(p["center"], p["inner_area"], p["outer_area"])
        model = SphereModel(areas)
        meas = ie.SphereIVQM(model, ground)
        small = model.region(hemi)
        big = model.region([f for f in range(12) if f not in hemi])
        res = {"small_disk_area": str(model.area(small[0])),
               "small_disk_value": meas.value(small).describe(),
               "large_disk_area": str(model.area(big[0])),
               "large_disk_value": meas.value(big).describe(),
               "small_disk_displaceable": meas.displaceable(small)}
        if p.get("full_suite"):
            res["axioms_ok"] = ie.check_sphere_ivqm(meas).ok
        return res, doc["expect"]
    if name == "torus-meridians":
        out = {}
        for case in p["cases"]:
            rep = ie.meridian_product(case["n"], _ground(case["ground"]))
            out[f"n={case['n']},{case['ground']}"] = rep.to_json()
        return out, doc["expect"]
    if name == "three-cover":
        meas = ie.TorusIVQM(1, ground)
        cover = [ie.TorusBox(tuple(_interval(a) for a in b["axes"]), tuple(b["sizes"]))
                 for b in p["cover"]]
        rep = ie.torus_box_cover_obstruction(meas, cover)
        return rep.to_json(), doc["expect"]
    if name == "torus-cross-core":
        rep = ie.torus_cross_core(ground)
        return rep.to_json(), doc["expect"]
    if name == "gromov-torus":
        rep = cp.gromov_harness(p["count"], p["size"], p["path_vertices"], p["seed"])
        return {"runs": rep.runs, "failures": rep.failures}, doc["expect"]
    if name == "simplex-centerpoint":
        rep = cp.simplex_harness(p["count"], p["N"], p["levels"], p["seed"])
        return {"runs": rep.runs, "failures": rep.failures}, doc["expect"]
    if name == "novikov-vanishing":
        out = {}
        ray = nv.multiplication_ray(ground, Fraction(str(p["c"])))
        for r in p["precisions"]:
            col = nv.completed_colimit(ray, r)
            out[str(r)] = {"zero": col.is_zero, "steps": nv.steps_to_vanish(Fraction(str(p["c"])), r)}
        return out, doc["expect"]
    if name == "mayer-vietoris":
        rep = cb.torus_mayer_vietoris(p["n"], p["m"])
        return rep.to_json(), doc["expect"]
    raise SchemaError(f"unknown demo {name!r}")


def _matches(result, expect) -> list[str]:
    bad = []
    for key, want in expect.items():
        got = result.get(key) if isinstance(result, dict) else None
        if isinstance(want, dict) and isinstance(got, dict):
            bad += [f"{key}.{b}" for b in _matches(got, want)]
        elif got != want:
            bad.append(f"{key}: expected {want!r}, got {got!r}")
    return bad


def cmd_demo(args) -> dict:
    if args.name == "list":
        return {"demos": demo_names()}
    if args.input:
        doc = load(args.input, "demo")
    else:
        path = demo_path(args.name)
        if not path.is_file():
            raise SchemaError(f"unknown demo {args.name!r}; available: {', '.join(demo_names())}")
        doc = json.loads(path.read_text())
        validate(doc, "demo")
    result, expect = run_demo(doc)
    bad = _matches(result, expect)
    out = {"demo": doc["demo"], "result": result, "matches_expectations": not bad}
    if bad:
        out["mismatches"] = bad
        raise CheckFailed(json.dumps(out, sort_keys=True, default=str))
    return out


# ----------------------------------------------------------------------------
# parser and entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ivmeasure", description="Ideal-valued measures toolkit")
    ap.add_argument("--format", choices=["table", "json"], default="table")
    sub = ap.add_subparsers(dest="command", required=True)

    alg = sub.add_parser("algebra", help="graded algebras and rank invariants")
    alg.add_argument("action", choices=["build", "rank", "slash-r"])
    alg.add_argument("input")
    alg.add_argument("--d", type=int, default=1)
    alg.add_argument("--r", type=int, default=2)
    alg.add_argument("--mode", choices=["exact", "lower_bound"], default="exact")
    alg.add_argument("--budget", type=int, default=2_000_000)
    alg.set_defaults(func=cmd_algebra)

    ivm = sub.add_parser("ivm", help="evaluate measures and check axioms")
    ivm.add_argument("action", choices=["eval", "check-axioms", "pushforward"])
    ivm.add_argument("input")
    ivm.set_defaults(func=cmd_ivm)

    cen = sub.add_parser("centerpoint", help="centerpoint solver and harnesses")
    cen.add_argument("action", choices=["solve", "harness"])
    cen.add_argument("input", nargs="?", default="-")
    cen.add_argument("--kind", choices=["gromov", "simplex"], default="gromov")
    cen.add_argument("--count", type=int, default=10)
    cen.add_argument("--size", type=int, default=None,
                     help="torus grid size (gromov, default 16) or simplex subdivision (default 12)")
    cen.add_argument("--path-vertices", type=int, default=10)
    cen.add_argument("--levels", type=int, default=10)
    cen.add_argument("--seed", type=int, default=0)
    cen.set_defaults(func=cmd_centerpoint)

    cub = sub.add_parser("cubes", help="cubes of complexes")
    cub.add_argument("action", choices=["validate", "cone", "telescope", "homology"])
    cub.add_argument("input")
    cub.add_argument("--direction", type=int, default=1)
    cub.add_argument("--cocone", action="store_true")
    cub.add_argument("--torsion", type=Fraction, default=None,
                     help="truncation for torsion exponents (Novikov coefficients)")
    cub.set_defaults(func=cmd_cubes)

    dem = sub.add_parser("demo", help="run a shipped example ('list' to enumerate)")
    dem.add_argument("name")
    dem.add_argument("--input", help="run a modified demo document instead")
    dem.set_defaults(func=cmd_demo)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        result = args.func(args)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (BudgetError, idl.BudgetExceeded) as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except cb.RelationError as exc:
        print(json.dumps({"valid": False, "face": exc.face, "error": str(exc)}, sort_keys=True))
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except CheckFailed as exc:
        print(str(exc))
        print("check failed", file=sys.stderr)
        return EXIT_FAIL
    except (KeyError, TypeError) as exc:
        print(f"schema error: malformed input ({exc})", file=sys.stderr)
        return EXIT_SCHEMA
    except (ModelError, cb.CubeError, ie.MeasureError, cp.CenterpointError, ga.AlgebraError,
            idl.IdealError, nv.NovikovError, AssertionError) as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    emit(result, args.format)
    return getattr(args, "exit_code", EXIT_OK)


if __name__ == "__main__":
    sys.exit(main())
