"""Command-line interface: JSON documents in, constructions and reports out.

Documents are ``{"version": 1, "kind": K, "body": B}`` with K one of poset,
functor, vec_diagram, chain_diagram, chain_map or complex.  Exit codes: 0 on
success, 1 when a suite or check fails, 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import exactlin as el
from . import fincat as fc
from . import repmodel as rm
from . import stablemodel as sm
from . import verify
from .exactlin import QQ
from .fincat import FinPoset, FunctorData

VERSION = 1
KINDS = ("poset", "functor", "vec_diagram", "chain_diagram", "chain_map", "complex")


class DocumentError(Exception):
    pass


class IoError(DocumentError):
    pass


class SchemaError(DocumentError):
    def __init__(self, pointer, message):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer or "/"


class InvariantError(DocumentError):
    def __init__(self, message, objects=()):
        super().__init__(message)
        self.objects = list(objects)


class Document:
    def __init__(self, version, kind, body, value):
        self.version = version
        self.kind = kind
        self.body = body
        self.value = value

    def __repr__(self):
        return f"Document(v{self.version}, {self.kind})"


# --- schema checks ----------------------------------------------------------------------------


def _ptr(*parts):
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in parts)


def _need(cond, pointer, msg):
    if not cond:
        raise SchemaError(pointer, msg)


def _obj(x, ptr, keys=(), optional=()):
    _need(isinstance(x, dict), ptr, "expected an object")
    for k in keys:
        _need(k in x, _ptr(*_split(ptr), k), "missing required key")
    allowed = set(keys) | set(optional)
    for k in x:
        _need(k in allowed, _ptr(*_split(ptr), k), "unexpected key")


def _split(ptr):
    return [p.replace("~1", "/").replace("~0", "~") for p in ptr.split("/")[1:]] if ptr else []


def _label_list(x, ptr):
    _need(isinstance(x, list), ptr, "expected an array")
    for i, v in enumerate(x):
        _need(isinstance(v, str), _ptr(*_split(ptr), i), "labels must be strings")


def _check_poset(x, ptr):
    _obj(x, ptr, ("objects",), ("leq",))
    _label_list(x["objects"], ptr + "/objects")
    for i, p in enumerate(x.get("leq", [])):
        q = f"{ptr}/leq/{i}"
        _need(isinstance(p, list) and len(p) == 2 and all(isinstance(a, str) for a in p),
              q, "relations are pairs of labels")


def _check_scalar(v, ptr):
    ok = isinstance(v, int) and not isinstance(v, bool)
    if isinstance(v, str):
        try:
            Fraction(v)
            ok = True
        except (ValueError, ZeroDivisionError):
            ok = False
    _need(ok, ptr, "entries are integers or rational strings p/q")


def _check_matrix(m, ptr):
    _need(isinstance(m, list), ptr, "matrices are arrays of rows")
    width = None
    for i, row in enumerate(m):
        q = f"{ptr}/{i}"
        _need(isinstance(row, list), q, "rows are arrays")
        if width is None:
            width = len(row)
        _need(len(row) == width, q, "ragged matrix")
        for j, v in enumerate(row):
            _check_scalar(v, f"{q}/{j}")


def _check_int_map(d, ptr, what):
    _need(isinstance(d, dict), ptr, "expected an object")
    for k, v in d.items():
        try:
            int(k)
        except ValueError:
            raise SchemaError(_ptr(*_split(ptr), k), "keys are integer degrees") from None
        if what == "dim":
            _need(isinstance(v, int) and not isinstance(v, bool) and v >= 0,
                  _ptr(*_split(ptr), k), "dimensions are non-negative integers")
        else:
            _check_matrix(v, _ptr(*_split(ptr), k))


def _check_complex(x, ptr):
    _obj(x, ptr, ("dims",), ("window", "diff"))
    if "window" in x:
        w = x["window"]
        _need(isinstance(w, list) and len(w) == 2 and all(isinstance(a, int) for a in w),
              ptr + "/window", "window is [lo, hi]")
    _check_int_map(x["dims"], ptr + "/dims", "dim")
    _check_int_map(x.get("diff", {}), ptr + "/diff", "matrix")


def _check_body(kind, b):
    if kind == "poset":
        _check_poset(b, "/body")
    elif kind == "functor":
        _obj(b, "/body", ("source", "target", "map"))
        _check_poset(b["source"], "/body/source")
        _check_poset(b["target"], "/body/target")
        _need(isinstance(b["map"], dict) and all(isinstance(v, str) for v in b["map"].values()),
              "/body/map", "map sends labels to labels")
    elif kind == "vec_diagram":
        _obj(b, "/body", ("shape", "dims"), ("maps",))
        _check_poset(b["shape"], "/body/shape")
        _need(isinstance(b["dims"], dict), "/body/dims", "expected an object")
        for k, v in b["dims"].items():
            _need(isinstance(v, int) and not isinstance(v, bool) and v >= 0,
                  _ptr("body", "dims", k), "dimensions are non-negative integers")
        _need(isinstance(b.get("maps", {}), dict), "/body/maps", "expected an object")
        for k, m in b.get("maps", {}).items():
            _check_matrix(m, _ptr("body", "maps", k))
    elif kind == "chain_diagram":
        _obj(b, "/body", ("shape", "complexes"), ("maps",))
        _check_poset(b["shape"], "/body/shape")
        _need(isinstance(b["complexes"], dict), "/body/complexes", "expected an object")
        for k, c in b["complexes"].items():
            _check_complex(c, _ptr("body", "complexes", k))
        _need(isinstance(b.get("maps", {}), dict), "/body/maps", "expected an object")
        for k, m in b.get("maps", {}).items():
            _need("->" in k, _ptr("body", "maps", k), "map keys are 'a->b'")
            _check_int_map(m, _ptr("body", "maps", k), "matrix")
    elif kind == "chain_map":
        _obj(b, "/body", ("source", "target"), ("maps",))
        _check_complex(b["source"], "/body/source")
        _check_complex(b["target"], "/body/target")
        _check_int_map(b.get("maps", {}), "/body/maps", "matrix")
    elif kind == "complex":
        _check_complex(b, "/body")


# --- loading ---------------------------------------------------------------------------------


def _poset(doc):
    P = FinPoset.from_json(doc)
    if len(set(doc["objects"])) != len(doc["objects"]):
        raise InvariantError("duplicate object labels", doc["objects"])
    return P


def _build(kind, b, field):
    if kind == "poset":
        return _poset(b)
    if kind == "functor":
        S, T = _poset(b["source"]), _poset(b["target"])
        missing = [x for x in S.elements if x not in b["map"]]
        if missing:
            raise InvariantError(f"map is undefined on {missing}", missing)
        bad = [x for x, y in b["map"].items() if y not in T]
        if bad:
            raise InvariantError(f"map leaves the target at {bad}", bad)
        return FunctorData(S, T, b["map"])
    if kind == "vec_diagram":
        P = _poset(b["shape"])
        missing = [x for x in P.elements if x not in b["dims"]]
        if missing:
            raise InvariantError(f"no dimension for {missing}", missing)
        return rm.VecDiagram.from_json(b, P, field)
    if kind == "chain_diagram":
        P = _poset(b["shape"])
        missing = [x for x in P.elements if x not in b["complexes"]]
        if missing:
            raise InvariantError(f"no complex for {missing}", missing)
        return sm.ChainDiagram.from_json(b, field)
    if kind == "chain_map":
        return sm.ChainMap.from_json(b, field)
    if kind == "complex":
        return sm.Complex.from_json(b, field)
    raise SchemaError("/kind", f"unknown kind {kind!r}")


def load_document(doc, field=QQ):
    """Validate a decoded JSON document and build its domain object."""
    _obj(doc, "", ("version", "kind", "body"), ("field",))
    _need(isinstance(doc["version"], int) and doc["version"] == VERSION, "/version",
          f"unsupported version {doc['version']!r}")
    _need(doc["kind"] in KINDS, "/kind", f"unknown kind {doc['kind']!r}")
    if "field" in doc:
        try:
            field = el.parse_field(doc["field"])
        except el.LinAlgError as e:
            raise SchemaError("/field", str(e)) from None
    _check_body(doc["kind"], doc["body"])
    try:
        value = _build(doc["kind"], doc["body"], field)
    except DocumentError:
        raise
    except (fc.FincatError, rm.FunctorialityError, sm.StableModelError, el.LinAlgError,
            KeyError, ValueError) as e:
        msg = str(e) if not isinstance(e, KeyError) else f"unknown object {e}"
        raise InvariantError(msg) from None
    return Document(doc["version"], doc["kind"], doc["body"], value)


def parse_document(path, field=QQ):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise IoError(f"cannot read {path}: {e.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise IoError(f"{path} is not valid JSON: {e.msg} at line {e.lineno}") from None
    return load_document(doc, field)


def envelope(kind, body):
    return {"version": VERSION, "kind": kind, "body": body}


def serialize(obj):
    """Document for a domain object (inverse of load_document)."""
    if isinstance(obj, FinPoset):
        return envelope("poset", obj.to_json())
    if isinstance(obj, FunctorData):
        return envelope("functor", obj.to_json())
    if isinstance(obj, rm.VecDiagram):
        P = obj.shape.to_poset()
        return envelope("vec_diagram", obj.to_json(P.to_json()))
    if isinstance(obj, sm.ChainDiagram):
        return envelope("chain_diagram", obj.to_json())
    if isinstance(obj, sm.ChainMap):
        return envelope("chain_map", obj.to_json())
    if isinstance(obj, sm.Complex):
        return envelope("complex", obj.to_json())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# --- commands --------------------------------------------------------------------------------


class _Usage(Exception):
    pass


def _load(path, args, *kinds):
    d = parse_document(path, args.field_obj)
    if kinds and d.kind not in kinds:
        if d.kind == "chain_diagram" and "complex" in kinds and len(d.value.shape) == 1:
            return next(iter(d.value.values.values()))
        raise SchemaError("/kind", f"expected {' or '.join(kinds)}, got {d.kind}")
    return d.value


def _dims(X):
    return sm.homology(X).to_json()


def cmd_shape(args):
    params = {}
    for p in args.param or []:
        k, _, v = p.partition("=")
        try:
            params[k] = int(v)
        except ValueError:
            raise _Usage(f"shape parameters are integers: {p}") from None
    sh = fc.named_shape(args.name, params)
    out = {"shape": serialize(sh.poset)}
    if sh.maps:
        out["maps"] = {k: serialize(m) for k, m in sorted(sh.maps.items())}
    return out, 0


def cmd_slice(args):
    u = _load(args.functor, args, "functor")
    S, pr = fc.slice(u, args.object, args.side)
    return {"slice": serialize(S), "projection": serialize(pr)}, 0


def cmd_comma(args):
    u1 = _load(args.u1, args, "functor")
    u2 = _load(args.u2, args, "functor")
    C, p1, p2, _ = fc.comma(u1, u2)
    return {"comma": serialize(C), "pr1": serialize(p1), "pr2": serialize(p2)}, 0


def cmd_kan(args):
    u = _load(args.functor, args, "functor")
    d = parse_document(args.diagram, args.field_obj)
    if d.kind == "vec_diagram":
        return serialize(rm.kan(u, d.value, args.side)), 0
    if d.kind == "chain_diagram":
        return serialize(sm.hkan(u, d.value, args.side)), 0
    raise SchemaError("/kind", "kan needs a vec_diagram or chain_diagram")


def cmd_hocolim(args):
    X = _load(args.diagram, args, "chain_diagram")
    side = "right" if args.holim else "left"
    total, _ = sm.hoKanExt_point(X.shape, X, side)
    return {"complex": serialize(total), "homology": _dims(total)}, 0


def cmd_cone(args):
    f = _load(args.map, args, "chain_map")
    if args.fiber:
        F, p = sm.pointed_functor("fiber", f)
        return {"fiber": serialize(F), "p": serialize(p), "homology": _dims(F)}, 0
    C, g = sm.pointed_functor("cone", f)
    return {"cone": serialize(C), "g": serialize(g), "homology": _dims(C)}, 0


def cmd_suspension(args):
    d = parse_document(args.input, args.field_obj)
    op, opm = (sm.loop, sm.loop_map) if args.loop else (sm.suspension, sm.suspension_map)
    if d.kind == "complex":
        R = op(d.value)
        return {"complex": serialize(R), "homology": _dims(R)}, 0
    if d.kind == "chain_map":
        return serialize(opm(d.value)), 0
    if d.kind == "chain_diagram":
        X = d.value
        vals = {x: op(X.values[x]) for x in X.shape.elements}
        maps = {(a, b): opm(X.map(a, b)) for a, b in X.shape.covers()}
        return serialize(sm.ChainDiagram(X.shape, vals, maps)), 0
    raise SchemaError("/kind", "suspension needs a complex, chain_map or chain_diagram")


def _write(path, doc):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _write_witnesses(out, witnesses):
    for w in witnesses:
        name = "".join(c if c.isalnum() else "_" for c in w.name).strip("_")
        _write(os.path.join(out, "witnesses", name + ".json"),
               {"name": w.name, "quasi_iso": w.verify(), "steps": w.to_json()["steps"]})


def cmd_triangle(args):
    f = _load(args.map, args, "chain_map")
    t = sm.triangle(f)
    les = verify.long_exact_check(t)
    summary = {"homology": {k: {str(n): d for n, d in sorted(v.items()) if d}
                            for k, v in t.dims().items()},
               "squares": {"|".join(k): v for k, v in sorted(t.square_status.items())},
               "witnesses": t.verify_witnesses(), "les": les.to_json()}
    if args.out:
        for k, c in (("Y", t.Y), ("C", t.C), ("S", t.S)):
            _write(os.path.join(args.out, f"{k}.json"), serialize(c))
        for k, m in (("f", t.f), ("g", t.g), ("h", t.h)):
            _write(os.path.join(args.out, f"{k}.json"), serialize(m))
        _write_witnesses(args.out, t.witnesses)
        _write(os.path.join(args.out, "triangle.json"), summary)
    return summary, 0 if les.passed else 1


def cmd_rotate(args):
    f = _load(args.map, args, "chain_map")
    r = sm.rotate(f)
    les = verify.long_exact_check(r.triangle, "rotated_les")
    out = dict(r.to_json(), les=les.to_json())
    return out, 0 if (r.sign_ok and les.passed) else 1


def cmd_octahedron(args):
    f1 = _load(args.f1, args, "chain_map")
    f2 = _load(args.f2, args, "chain_map")
    try:
        o = sm.octahedron(f1, f2, args.model)
    except sm.CompositionMismatch as e:
        raise InvariantError(str(e)) from None
    tri = {k: verify.long_exact_check(t, k).to_json() for k, t in sorted(o.triangles.items())}
    wit = {w.name: w.verify() for w in o.witnesses.values()}
    out = {"model": o.model, "all_bicartesian": o.all_bicartesian(),
           "triangles": tri, "witnesses": wit,
           "homology": {k: _dims(o.diagram.values[k]) for k in o.diagram.shape.elements}}
    if args.out:
        _write(os.path.join(args.out, "diagram.json"), serialize(o.diagram))
        _write_witnesses(args.out, o.witnesses.values())
        _write(os.path.join(args.out, "octahedron.json"), out)
    ok = o.all_bicartesian() and all(t["pass"] for t in tri.values()) and all(wit.values())
    return out, 0 if ok else 1


def cmd_biproduct(args):
    X = _load(args.x, args, "complex")
    Y = _load(args.y, args, "complex")
    r = sm.biproduct(X, Y)
    wit = {k: w.verify() for k, w in sorted(r.witnesses.items())}
    out = {"B": serialize(r.B), "homology": _dims(r.B), "witnesses": wit,
           "squares": {"|".join(k): v for k, v in sorted(r.squares.items())}}
    return out, 0


def cmd_status(args):
    d = parse_document(args.input, args.field_obj)
    if d.kind == "functor":
        u = d.value
        return {"sieve": fc.sieve_status(u), **fc.fibration_status(u)}, 0
    if d.kind == "chain_diagram":
        try:
            return sm.cocartesian_status(d.value), 0
        except sm.WrongShape as e:
            raise InvariantError(str(e)) from None
    raise SchemaError("/kind", "status needs a functor or a chain_diagram on [1]x[1]")


def cmd_check(args):
    u1 = _load(args.u1, args, "functor")
    u2 = _load(args.u2, args, "functor")
    v = _load(args.v, args, "functor")
    w = _load(args.w, args, "functor")
    X = _load(args.sample, args, "vec_diagram")
    direction = fc.TO_W_U1 if args.side == "left" else fc.TO_U2_V
    try:
        sq = fc.SquareData(u1, u2, v, w, direction=direction)
    except fc.FincatError as e:
        raise InvariantError(str(e)) from None
    verdict = rm.exact_square_verdict(sq, [X], "exact_square")
    return verdict.to_json(), 0 if verdict.passed else 1


def cmd_suite(args):
    try:
        rep = verify.run_suite(args.name, args.seed, args.trials)
    except verify.UnknownSuite:
        raise _Usage(f"unknown suite {args.name!r}; known: {', '.join(verify.SUITES)}") from None
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "report.json"), "w", encoding="utf-8") as fh:
            fh.write(rep.dumps() + "\n")
        with open(os.path.join(args.out, "report.txt"), "w", encoding="utf-8") as fh:
            fh.write(rep.table() + "\n")
        for i, v in enumerate(rep.failures()):
            _write(os.path.join(args.out, "witnesses", f"{i:03d}.json"), v.to_json())
    return rep, 0 if rep.passed else 1


COMMANDS = {
    "shape": cmd_shape, "slice": cmd_slice, "comma": cmd_comma, "kan": cmd_kan,
    "hocolim": cmd_hocolim, "cone": cmd_cone, "suspension": cmd_suspension,
    "triangle": cmd_triangle, "rotate": cmd_rotate, "octahedron": cmd_octahedron,
    "biproduct": cmd_biproduct, "status": cmd_status, "check": cmd_check, "suite": cmd_suite,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Usage(message)


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=1)
    common.add_argument("--trials", type=int, default=10)
    common.add_argument("--field", default="q")
    common.add_argument("--out")
    common.add_argument("--json", action="store_true")
    p = _Parser(prog="derivkit", description="Finite models of derivators.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    s = sub.add_parser("shape", parents=[common], help="named index shape")
    s.add_argument("name")
    s.add_argument("param", nargs="*", help="key=value")
    s = sub.add_parser("slice", parents=[common], help="slice of a functor at an object")
    s.add_argument("functor")
    s.add_argument("object")
    s.add_argument("--side", choices=["over", "under"], default="over")
    s = sub.add_parser("comma", parents=[common], help="comma poset of two functors")
    s.add_argument("u1")
    s.add_argument("u2")
    s = sub.add_parser("kan", parents=[common], help="(homotopy) Kan extension")
    s.add_argument("functor")
    s.add_argument("diagram")
    s.add_argument("--side", choices=["left", "right"], default="left")
    s = sub.add_parser("hocolim", parents=[common], help="homotopy colimit of a diagram")
    s.add_argument("diagram")
    s.add_argument("--holim", action="store_true")
    s = sub.add_parser("cone", parents=[common], help="cone (or fiber) of a chain map")
    s.add_argument("map")
    s.add_argument("--fiber", action="store_true")
    s = sub.add_parser("suspension", parents=[common], help="suspension (or loop)")
    s.add_argument("input")
    s.add_argument("--loop", action="store_true")
    for name in ("triangle", "rotate"):
        s = sub.add_parser(name, parents=[common])
        s.add_argument("map")
    s = sub.add_parser("octahedron", parents=[common])
    s.add_argument("f1")
    s.add_argument("f2")
    s.add_argument("--model", choices=["reduced", "literal"], default="reduced")
    s = sub.add_parser("biproduct", parents=[common])
    s.add_argument("x")
    s.add_argument("y")
    s = sub.add_parser("status", parents=[common],
                       help="sieve/fibration status of a functor or (co)Cartesianness of a square")
    s.add_argument("input")
    s = sub.add_parser("check", parents=[common], help="mate check of a single square")
    for k in ("u1", "u2", "v", "w", "sample"):
        s.add_argument(k)
    s.add_argument("--side", choices=["left", "right"], default="left")
    s = sub.add_parser("suite", parents=[common])
    s.add_argument("name")
    return p


def _emit(result, args, stdout):
    if isinstance(result, verify.Report):
        text = result.dumps() if args.json else result.table()
    else:
        text = json.dumps(result, indent=None if args.json else 2, sort_keys=True)
    stdout.write(text + "\n")


def run_command(argv, stdout=None, stderr=None):
    """Run one subcommand; returns the exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if args.trials < 1:
            raise _Usage("--trials must be at least 1")
        try:
            args.field_obj = el.parse_field(args.field)
        except el.LinAlgError as e:
            raise _Usage(str(e)) from None
        result, code = COMMANDS[args.command](args)
    except _Usage as e:
        stderr.write(f"usage error: {e}\n")
        return 2
    except DocumentError as e:
        stderr.write(f"{type(e).__name__}: {e}\n")
        return 2
    except (fc.FincatError, rm.FunctorialityError, rm.ShapeMismatch, sm.StableModelError,
            el.LinAlgError) as e:
        stderr.write(f"{type(e).__name__}: {e}\n")
        return 2
    _emit(result, args, stdout)
    return code


def main(argv=None):
    sys.exit(run_command(sys.argv[1:] if argv is None else argv))
