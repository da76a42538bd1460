import json
import shutil
import subprocess
from importlib import resources

import pytest

from ivmeasure import ivm_engine as ie
from ivmeasure.cli import demo_names, main
from ivmeasure.ideals import GradedIdeal, ideal_from_generators

EXAMPLES = resources.files("ivmeasure") / "data" / "examples"


def run(capsys, *argv):
    code = main(["--format", "json", *argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def example(name):
    return str(EXAMPLES / name)


@pytest.mark.parametrize("name", demo_names())
def test_demo_exits_zero(capsys, name):
    code, out, _ = run(capsys, "demo", name)
    assert code == 0
    assert json.loads(out)["matches_expectations"] is True


def test_demo_list(capsys):
    code, out, _ = run(capsys, "demo", "list")
    assert code == 0 and "torus-cross-core" in json.loads(out)["demos"]


def test_unknown_demo_is_schema_error(capsys):
    code, _, err = run(capsys, "demo", "klein-bottle")
    assert code == 3 and "unknown demo" in err


def test_demo_with_wrong_expectation_fails(capsys, tmp_path):
    doc = json.loads((resources.files("ivmeasure") / "data" / "demos" / "sphere-ivqm.json").read_text())
    doc["expect"]["small_disk_value"] = "A"
    path = tmp_path / "demo.json"
    path.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "demo", "sphere-ivqm", "--input", str(path))
    assert code == 1 and "small_disk_value" in out


def test_corrupted_cube_reports_face(capsys):
    code, out, _ = run(capsys, "cubes", "validate", example("square-corrupted.json"))
    assert code == 1
    doc = json.loads(out.splitlines()[0])
    assert doc["valid"] is False and doc["face"] == "**"


def test_commuting_square_validates(capsys):
    code, _, _ = run(capsys, "cubes", "validate", example("square-commuting.json"))
    assert code == 0


def test_schema_error_exit_code(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"kind": "cube", "n": "two"}))
    code, _, err = run(capsys, "cubes", "validate", str(path))
    assert code == 3 and "schema error" in err
    path.write_text("{not json")
    code, _, _ = run(capsys, "cubes", "validate", str(path))
    assert code == 3


def test_eval_ideal_round_trips(capsys):
    code, out, _ = run(capsys, "ivm", "eval", example("torus-meridian-box.json"))
    assert code == 0
    doc = json.loads(out)
    alg = ie.TorusIVQM(1).algebra
    ideal = GradedIdeal.from_json(alg, doc["ideal"])
    assert ideal == ideal_from_generators(alg, [alg.basis("p1")])
    assert doc["value"] == "span{p1, p1^q1}"


def test_eval_sphere_small_disk_is_zero(capsys):
    code, out, _ = run(capsys, "ivm", "eval", example("sphere-small-disk.json"))
    doc = json.loads(out)
    assert code == 0 and doc["area"] == "2/5" and doc["value"] == "0" and doc["ideal"]["dim"] == 0


def test_check_axioms_and_pushforward(capsys):
    code, out, _ = run(capsys, "ivm", "check-axioms", example("axioms-trivial.json"))
    assert code == 0 and json.loads(out)["ok"] is True
    code, out, _ = run(capsys, "ivm", "pushforward", example("pushforward-circle.json"))
    assert code == 0


def test_same_seed_same_bytes(capsys):
    args = ("centerpoint", "harness", "--count", "4", "--size", "8", "--path-vertices", "5", "--seed", "9")
    _, first, _ = run(capsys, *args)
    _, second, _ = run(capsys, *args)
    assert first == second
    _, simplex, _ = run(capsys, "centerpoint", "harness", "--kind", "simplex", "--count", "5", "--seed", "9")
    assert json.loads(simplex)["ok"] is True


def test_centerpoint_solve(capsys):
    code, out, _ = run(capsys, "centerpoint", "solve", example("centerpoint-cycle.json"))
    doc = json.loads(out)
    assert code == 0 and doc["enumeration_agrees"] and doc["status"] in ("protected", "unprotected")


def test_cross_core_demo_reports_witness(capsys):
    code, out, _ = run(capsys, "demo", "torus-cross-core")
    assert code == 0
    assert json.loads(out)["result"]["witness"] == "(T^1)*p1^p2^p3^q1^q2^q3⊗h"


def test_algebra_commands(capsys):
    code, out, _ = run(capsys, "algebra", "rank", example("algebra-torus2.json"), "--d", "2")
    assert code == 0
    code, _, _ = run(capsys, "algebra", "slash-r", example("algebra-torus2.json"), "--r", "2")
    assert code == 0


def test_cubes_homology_with_torsion(capsys):
    code, out, _ = run(capsys, "cubes", "homology", example("weighted-pair.json"), "--torsion", "2")
    assert code == 0 and json.loads(out)["torsion"] == ["1/2"]
    code, out, _ = run(capsys, "cubes", "telescope", example("contracting-ray.json"))
    assert code == 0 and json.loads(out)["tail"] == "contracting"


def test_cone_command(capsys):
    code, out, _ = run(capsys, "cubes", "cone", example("square-commuting.json"), "--direction", "2")
    assert code == 0


@pytest.mark.skipif(shutil.which("ivmeasure") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["ivmeasure", "demo", "list"], capture_output=True, text=True, timeout=60)
    assert proc.returncode == 0 and "three-cover" in proc.stdout
