import json

import pytest
from jsonschema import Draft202012Validator
from referencing import Registry, Resource

from multilevel.cli import main
from multilevel.constructors import GraphSpec
from multilevel.schemas import NAMES, load_schema
from multilevel.statevec import DensityMatrix, density_to_json


@pytest.fixture(scope="module")
def validators():
    schemas = {n: load_schema(n) for n in NAMES}
    registry = Registry().with_resources(
        (f"{n}.schema.json", Resource.from_contents(s)) for n, s in schemas.items()
    ).with_resources((s["$id"], Resource.from_contents(s)) for s in schemas.values())
    return {n: Draft202012Validator(s, registry=registry) for n, s in schemas.items()}


@pytest.fixture
def run(capsys, validators):
    def _run(*argv, code=0):
        rc = main([str(a) for a in argv])
        out = capsys.readouterr().out
        assert rc == code
        if "--format" in argv or code == 1:
            return out
        doc = json.loads(out)
        validators["output"].validate(doc)
        return doc

    return _run


@pytest.fixture
def files(tmp_path, run):
    paths = {}
    for name, extra in (("psi4", ["maxent", "--d", "4"]), ("ex3", ["example3"]), ("ghz6", ["ghz", "--n", "3", "--d", "6"]),
                        ("xi1", ["xi1"]), ("chain", ["chain4x4"])):
        p = tmp_path / f"{name}.json"
        run("gen", *extra, "--out", p)
        paths[name] = p
    return paths


def test_generated_files_match_state_schema(files, validators):
    for p in files.values():
        validators["state"].validate(json.loads(p.read_text()))


def test_gen_to_stdout_and_unknown_name(run):
    doc = run("gen", "ghz", "--n", "3", "--d", "2")
    assert doc["state"]["dims"] == [2, 2, 2]
    run("gen", "nonsense", code=1)


def test_gen_graph(tmp_path, run, validators):
    g = GraphSpec(3, 2, ((0, 1, 1), (1, 2, 1)))
    p = tmp_path / "g.json"
    p.write_text(json.dumps(g.to_json()))
    validators["graph"].validate(g.to_json())
    doc = run("gen", "graph", "--graph", p)
    assert doc["state"]["dims"] == [2, 2, 2]
    assert len(doc["manifest"]["input_digests"]) == 1


def test_check_exit_codes(files, run):
    doc = run("check", "--state", files["psi4"], "--cut", "0|1", "--shape", "2x2")
    assert doc["decomposable"] is True
    doc = run("check", "--state", files["ex3"], "--cut", "0|1,2", "--shape", "2x2", code=2)
    assert doc["decomposable"] is False


def test_schmidt_example3(files, run):
    doc = run("schmidt", "--state", files["ex3"], "--cut", "0|1,2")
    assert doc["coeffs"] == pytest.approx([0.551, 0.5, 0.5, 0.443], abs=5e-4)


def test_max_overlap(files, run):
    doc = run("max-overlap", "--state", files["xi1"], "--shape", "2x2")
    assert doc["value"] == pytest.approx(0.934172, abs=1e-6)


def test_witness(tmp_path, files, run, validators):
    doc = run("witness", "--xi", "xi1", "--rho", files["xi1"])
    assert doc["certificate"]["violated"] and doc["value"] < 0
    rho = tmp_path / "rho.json"
    rho.write_text(json.dumps(density_to_json(DensityMatrix.maximally_mixed((4, 4)))))
    validators["density"].validate(json.loads(rho.read_text()))
    doc = run("witness", "--xi", "xi1", "--rho", rho, code=2)
    assert doc["value"] > 0


def test_table1_single_row(run):
    doc = run("table1", "--source", "3x3", "--rank", "8")
    assert doc["value"] == pytest.approx(0.9659258, abs=1e-6)
    run("table1", "--source", "9x9", code=1)


def test_tableaux(run):
    assert run("tableaux", "--shape", "2x2", "--count-only")["count"] == 2
    assert len(run("tableaux", "--shape", "2x3")["tableaux"]) == 5


def test_seesaw_command(files, run):
    doc = run("seesaw", "--state", files["ghz6"], "--factorization", "2x3,2x3,2x3", "--restarts", "8", "--seed", "7")
    assert doc["verdict"] == "CERTIFIED"
    assert [f["dims"] for f in doc["certificate"]["factor_states"]] == [[2, 2, 2], [3, 3, 3]]
    doc = run("seesaw", "--state", files["chain"], "--factorization", "2x2,2x2,2x2,2x2", "--restarts", "4", code=2)
    assert "certificate" not in doc
    doc = run("seesaw", "--state", files["chain"], "--factorization", "4x4,4x4", "--merge", "0,3|1,2",
              "--restarts", "8", "--seed", "7")
    assert doc["best_overlap"] == pytest.approx(1, abs=1e-6)
    run("seesaw", "--state", files["chain"], code=1)


def test_seesaw_is_reproducible_apart_from_timing(files, capsys):
    outs = []
    for _ in range(2):
        main(["seesaw", "--state", str(files["psi4"]), "--factorization", "2x2,2x2", "--restarts", "3", "--seed", "5"])
        doc = json.loads(capsys.readouterr().out)
        doc["manifest"].pop("wall_time")
        outs.append(doc)
    assert outs[0] == outs[1]


def test_seed_from_environment(files, run, monkeypatch):
    monkeypatch.setenv("MULTILEVEL_SEED", "42")
    doc = run("seesaw", "--state", files["psi4"], "--factorization", "2x2,2x2", "--restarts", "2")
    assert doc["manifest"]["seed"] == 42
    monkeypatch.setenv("MULTILEVEL_SEED", "x")
    run("seesaw", "--state", files["psi4"], "--factorization", "2x2,2x2", code=1)


def test_classify_command(files, run):
    assert run("classify", "--state", files["ex3"], "--seed", "7")["verdict"] == "GMME"
    assert run("classify", "--state", files["ghz6"], "--restarts", "8")["verdict"] == "FULLY_DECOMPOSABLE"


def test_classify_vacuous_exit_code(tmp_path, run):
    p = tmp_path / "ghz3.json"
    run("gen", "ghz", "--n", "3", "--d", "3", "--out", p)
    with pytest.warns(UserWarning):
        assert run("classify", "--state", p, code=2)["verdict"] == "VACUOUS"


def test_renormalize_flag(tmp_path, run):
    p = tmp_path / "raw.json"
    p.write_text(json.dumps({"dims": [2, 2], "amps": [[1, 0], [0, 0], [0, 0], [1, 0]]}))
    run("schmidt", "--state", p, code=1)
    doc = run("schmidt", "--state", p, "--renormalize")
    assert doc["coeffs"] == pytest.approx([2**-0.5] * 2)


def test_errors_exit_one(tmp_path, run):
    run("schmidt", "--state", tmp_path / "missing.json", code=1)
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    run("schmidt", "--state", bad, code=1)
    with pytest.raises(SystemExit) as exc:
        main(["check", "--shape", "2by2"])
    assert exc.value.code == 1


def test_text_format(files, run):
    out = run("schmidt", "--state", files["psi4"], "--format", "text")
    assert "coeffs: [0.5" in out
    assert "manifest.command: schmidt" in out


def test_reproduce_with_csv(tmp_path, run):
    csv_path = tmp_path / "r.csv"
    doc = run("reproduce", "eq8", "--csv", csv_path)
    assert doc["passed"]
    lines = csv_path.read_text().splitlines()
    assert lines[0].startswith("recipe,name") and len(lines) == 4
    run("reproduce", "nope", code=1)


def test_reproduce_negative_exit_code(run):
    doc = run("reproduce", "ame6", code=2)
    assert not doc["passed"]
