import io
import json
import os
import subprocess
import sys

import pytest

from derivkit import cli, verify
from derivkit import stablemodel as sm
from derivkit.exactlin import QMatrix
from derivkit.fincat import chain
from derivkit.stablemodel import ChainMap, Complex

Q0 = Complex.point(0)


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run_command([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def put(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def poset_doc(objects, le):
    return {"version": 1, "kind": "poset", "body": {"objects": objects, "leq": le}}


def test_parse_poset(tmp_path):
    d = cli.parse_document(put(tmp_path, "p.json", poset_doc(["0", "1"], [["0", "1"]])))
    assert d.kind == "poset" and d.value == chain(1)


def test_bad_version_has_pointer(tmp_path):
    doc = poset_doc(["0"], [])
    doc["version"] = 99
    with pytest.raises(cli.SchemaError) as e:
        cli.parse_document(put(tmp_path, "p.json", doc))
    assert e.value.pointer == "/version"
    code, _, err = run("status", put(tmp_path, "p.json", doc))
    assert code == 2 and err.startswith("SchemaError: /version")


def test_schema_pointer_inside_body(tmp_path):
    doc = {"version": 1, "kind": "vec_diagram",
           "body": {"shape": {"objects": ["a"], "leq": []}, "dims": {"a": -1}}}
    with pytest.raises(cli.SchemaError) as e:
        cli.load_document(doc)
    assert e.value.pointer == "/body/dims/a"


def test_io_errors(tmp_path):
    with pytest.raises(cli.IoError):
        cli.parse_document(str(tmp_path / "missing.json"))
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(cli.IoError):
        cli.parse_document(str(p))


def test_noncommuting_square_is_invariant_error(tmp_path):
    maps = {r: ChainMap.identity(Q0) for r in sm.BOX.covers()}
    body = sm.ChainDiagram(sm.BOX, {x: Q0 for x in sm.BOX.elements}, maps).to_json()
    body["maps"]["0,0->1,0"] = ChainMap(Q0, Q0, {0: QMatrix(1, 1, [[2]])}).to_json()["maps"]
    doc = {"version": 1, "kind": "chain_diagram", "body": body}
    with pytest.raises(cli.InvariantError, match="does not commute"):
        cli.load_document(doc)
    code, _, err = run("status", put(tmp_path, "sq.json", doc))
    assert code == 2 and "InvariantError" in err


@pytest.mark.parametrize("kind", ["poset", "monotone_map", "vec_diagram", "chain_diagram",
                                  "chain_map"])
def test_serialize_roundtrip(kind):
    obj = verify.gen_instance(kind, 5)
    doc = cli.serialize(obj)
    again = cli.load_document(json.loads(json.dumps(doc))).value
    assert cli.serialize(again) == doc


def test_usage_errors():
    assert run("suite", "nope")[0] == 2
    assert run("frobnicate")[0] == 2
    assert run("suite", "pointed", "--trials", "0")[0] == 2
    assert run("suite", "pointed", "--field", "fp:6")[0] == 2


def test_suite_json_exit_zero(tmp_path):
    code, out, _ = run("suite", "triangulation", "--seed", 1, "--trials", 10, "--json")
    assert code == 0
    doc = json.loads(out)
    assert doc["pass"] and doc["suite"] == "triangulation"
    code, out2, _ = run("suite", "triangulation", "--seed", 1, "--trials", 10, "--json")
    assert out2 == out


def test_suite_out_dir(tmp_path):
    code, out, _ = run("suite", "pointed", "--trials", 2, "--out", tmp_path / "r")
    assert code == 0 and "overall PASS" in out
    assert json.loads((tmp_path / "r" / "report.json").read_text())["pass"]
    assert (tmp_path / "r" / "report.txt").read_text().strip().endswith("overall PASS")


def test_triangle_out(tmp_path):
    f = ChainMap(Complex.point(0, 2), Q0, {0: QMatrix(1, 2, [[1, 0]])})
    path = put(tmp_path, "f.json", cli.serialize(f))
    code, out, _ = run("triangle", path, "--out", tmp_path / "tri")
    assert code == 0
    summary = json.loads(out)
    assert summary["homology"]["C"] == {"1": 1} and summary["les"]["pass"]
    for name in ("Y", "C", "S", "f", "g", "h", "triangle"):
        assert (tmp_path / "tri" / f"{name}.json").exists()
    C = cli.parse_document(str(tmp_path / "tri" / "C.json")).value
    assert C == sm.triangle(f).C
    assert os.listdir(tmp_path / "tri" / "witnesses")


def test_status_and_cone(tmp_path):
    const = sm.ChainDiagram(sm.BOX, {x: Q0 for x in sm.BOX.elements},
                            {r: ChainMap.identity(Q0) for r in sm.BOX.covers()})
    code, out, _ = run("status", put(tmp_path, "sq.json", cli.serialize(const)), "--json")
    assert code == 0 and json.loads(out) == {"cartesian": True, "coCartesian": True}
    z = ChainMap.zero(Q0, Complex.zero())
    code, out, _ = run("cone", put(tmp_path, "z.json", cli.serialize(z)))
    assert code == 0 and json.loads(out)["homology"] == {"1": 1}
    code, out, _ = run("shape", "pull_n", "n=2")
    assert code == 0 and len(json.loads(out)["shape"]["body"]["objects"]) == 3 + 1


def test_rotate_and_octahedron(tmp_path):
    idq = put(tmp_path, "id.json", cli.serialize(ChainMap.identity(Q0)))
    z = put(tmp_path, "z.json", cli.serialize(ChainMap.zero(Q0, Q0)))
    code, out, _ = run("rotate", idq)
    assert code == 0
    code, out, _ = run("octahedron", z, z)
    doc = json.loads(out)
    assert code == 0 and all(t["pass"] for t in doc["triangles"].values())
    other = put(tmp_path, "o.json", cli.serialize(ChainMap.identity(Complex.point(1))))
    assert run("octahedron", idq, other)[0] == 2


def test_prime_field_documents(tmp_path):
    f = verify.gen_instance("chain_map", 9)
    doc = dict(cli.serialize(f), field="fp:5")
    code, out, _ = run("triangle", put(tmp_path, "f.json", doc))
    assert code == 0 and json.loads(out)["les"]["pass"]


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "derivkit", "shape", "box", "--json"],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert len(json.loads(r.stdout)["shape"]["body"]["objects"]) == 4
