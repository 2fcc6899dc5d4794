import json
import shutil
import subprocess
import sys

import pytest

from starval.cli import main, parse_body, parse_grid, parse_theta, UsageError


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_eval_ball(capsys):
    code, out, _ = run(["eval", "--theta", "power:3", "--grid", "circle:64", "--body", "ball:2"], capsys)
    assert code == 0
    assert json.loads(out)["results"][0]["value"] == pytest.approx(8.0, abs=1e-12)


def test_eval_ellipse_csv(capsys):
    code, out, _ = run(["eval", "--theta", "power:2", "--grid", "circle:2048",
                        "--body", "ellipsoid:2,1", "--body", "origin", "--format", "csv"], capsys)
    lines = out.splitlines()
    assert code == 0 and lines[0] == "body,value"
    assert abs(float(lines[1].split(",")[-1]) - 2.0) <= 1e-6
    assert float(lines[2].split(",")[-1]) == 0.0


def test_eval_domain_error(capsys):
    code, _, err = run(["eval", "--theta", "power:1", "--domain", "1", "--body", "ball:2"], capsys)
    assert code == 1 and "domain" in err


@pytest.mark.parametrize("argv", [
    ["eval", "--theta", "cosine:1"],
    ["eval", "--grid", "circle:1"],
    ["eval", "--body", "cube:1"],
    ["grid", "--grid", "hex:4"],
    ["split", "--grid", "latlong:4,4"],
    ["split", "--cover", "cap:0,1"],
])
def test_bad_descriptors_exit_2(argv, capsys):
    assert run(argv, capsys)[0] == 2


def test_argparse_usage_error_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["check", "nonsense"])
    assert exc.value.code == 2


def test_decompose_table_columns(capsys):
    code, out, _ = run(["decompose", "--theta", "sine:1,1", "--format", "csv", "--bodies", "20"], capsys)
    lines = out.splitlines()
    assert code == 0
    assert lines[0] == "lambda,theta,theta_plus,theta_minus"
    rows = [list(map(float, ln.split(","))) for ln in lines[1:]]
    assert len(rows) == 101
    for lam, th, tp, tm in rows:
        assert abs(tp - tm - th) <= 1e-12 and tp >= 0 and tm >= 0


def test_decompose_report(tmp_path, capsys):
    rep = tmp_path / "r.json"
    code, out, _ = run(["decompose", "--theta", "neg-power:1", "--bodies", "10", "--report", str(rep)], capsys)
    assert code == 0
    d = json.loads(rep.read_text())
    assert d["report"]["ok"] and d["report"]["offset"] == 0.0
    assert json.loads(out)["table"]["columns"] == ["lambda", "theta", "theta_plus", "theta_minus"]


def test_decompose_tolerance_failure(capsys):
    code, _, err = run(["decompose", "--theta", "sine:1,1", "--resolution", "3", "--tol", "1e-300"], capsys)
    assert code == 1 and "reconstruction" in err


def test_reruns_are_byte_identical(tmp_path, capsys):
    outs = []
    for i in range(2):
        path = tmp_path / f"o{i}.json"
        assert main(["check", "continuity", "--seed", "7", "--probes", "20", "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    capsys.readouterr()
    assert outs[0] == outs[1]


def test_seed_env_variable(monkeypatch, capsys):
    monkeypatch.setenv("STARVAL_SEED", "42")
    _, a, _ = run(["check", "bounded", "--trials", "50"], capsys)
    _, b, _ = run(["check", "bounded", "--trials", "50", "--seed", "42"], capsys)
    _, c, _ = run(["check", "bounded", "--trials", "50", "--seed", "43"], capsys)
    assert json.loads(a)["seed"] == 42
    assert a == b and a != c
    monkeypatch.setenv("STARVAL_SEED", "x")
    assert run(["check", "bounded", "--trials", "5"], capsys)[0] == 2


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"theta": "power:2", "grid": "circle:128", "body": ["ball:1.5"]}))
    code, out, _ = run(["eval", "--config", str(cfg)], capsys)
    assert code == 0 and json.loads(out)["results"][0]["value"] == pytest.approx(2.25, abs=1e-12)
    # flags on the command line win
    code, out, _ = run(["eval", "--config", str(cfg), "--theta", "power:1"], capsys)
    assert json.loads(out)["results"][0]["value"] == pytest.approx(1.5, abs=1e-12)
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]")
    assert run(["eval", "--config", str(bad)], capsys)[0] == 2
    assert run(["eval", "--config", str(tmp_path / "missing.json")], capsys)[0] == 2


@pytest.mark.parametrize("name,extra", [
    ("identity", ["--pairs", "20"]),
    ("invariance", []),
    ("bounded", ["--trials", "2000"]),
    ("bounded", ["--trials", "200", "--model", "smooth", "--grid", "circle:64"]),
    ("continuity", ["--probes", "20"]),
    ("rims", ["--point-base"]),
    ("oracle", ["--trials", "3", "--nodes", "4", "--levels", "4"]),
    ("split", ["--trials", "3"]),
])
def test_checks_pass(name, extra, capsys):
    code, out, _ = run(["check", name] + extra, capsys)
    d = json.loads(out)
    assert code == 0 and d["passed"] and d["check"] == name


def test_check_failure_exits_1(capsys):
    code, out, _ = run(["check", "identity", "--pairs", "5", "--tol", "-1"], capsys)
    assert code == 1 and json.loads(out)["passed"] is False


def test_grid_and_body_output(capsys):
    code, out, _ = run(["grid", "--grid", "mc:3,5", "--seed", "3"], capsys)
    g = json.loads(out)
    assert code == 0 and g["seed"] == 3 and len(g["nodes"]) == 5
    code, out, _ = run(["body", "--grid", "circle:8", "--body", "ellipsoid:2,1", "--format", "csv"], capsys)
    assert code == 0 and out.splitlines()[0] == "angle,value" and len(out.splitlines()) == 9


def test_rims_and_split_commands(capsys):
    code, out, _ = run(["rims", "--grid", "circle:512", "--point-base", "--format", "csv"], capsys)
    assert code == 0 and out.splitlines()[0] == "omega,sup_abs_V,band_measure"
    code, out, _ = run(["split", "--grid", "circle:32", "--cover", "arc:0,2", "--cover", "arc:3.14159,2"], capsys)
    d = json.loads(out)
    assert code == 0 and d["table"]["columns"][:4] == ["node", "angle", "phi_1", "phi_2"]


def test_parsers():
    assert parse_grid("circle:16").size == 16
    assert parse_grid("latlong:3,4").size == 12
    assert parse_theta("neg-power:2", 3.0)(1.5) == pytest.approx(-2.25)
    assert parse_theta("pl:0,0,1,2", 1.0)(0.5) == 1.0
    assert parse_body("ball:2", 2).kind == "ball"
    with pytest.raises(UsageError):
        parse_theta("power:a", 1.0)


@pytest.mark.skipif(shutil.which("starval") is None, reason="console script not installed")
def test_console_script():
    out = subprocess.run(["starval", "eval", "--theta", "power:1", "--body", "ball:0.5"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and json.loads(out.stdout)["results"][0]["value"] == 0.5


def test_module_entry():
    out = subprocess.run([sys.executable, "-m", "starval.cli", "grid", "--grid", "circle:3"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and json.loads(out.stdout)["params"] == {"N": 3}


def _schema(name):
    from importlib.resources import files

    return json.loads(files("starval").joinpath("schemas", f"{name}.schema.json").read_text())


@pytest.mark.parametrize("schema,argv", [
    ("grid", ["grid", "--grid", "latlong:3,4"]),
    ("eval", ["eval", "--body", "ball:1", "--body", "ellipsoid:1,0.5"]),
    ("decompose", ["decompose", "--bodies", "5"]),
    ("check", ["check", "identity", "--pairs", "3"]),
    ("check", ["check", "rims"]),
    ("rims", ["rims", "--grid", "circle:128"]),
    ("split", ["split", "--grid", "circle:16"]),
])
def test_outputs_match_schemas(schema, argv, capsys):
    jsonschema = pytest.importorskip("jsonschema")
    code, out, _ = run(argv, capsys)
    assert code == 0
    jsonschema.validate(json.loads(out), _schema(schema))
