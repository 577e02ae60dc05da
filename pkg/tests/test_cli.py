import json

import pytest

from gwtheta.cli import main
from gwtheta.environment import ThetaModel
from gwtheta.harness import scenario_model


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_analyze_json(capsys):
    code, out, _ = run(capsys, "analyze", "--scenario", "Ex1",
                       "--theta", "1", "--sigma", "1", "--n", "100")
    assert code == 0
    rows = json.loads(out)
    assert rows[0]["n"] == 100
    assert abs(rows[0]["F_n(0)"]) < 1e-12
    assert rows[0]["A_n"] == pytest.approx(1 / 101)


def test_analyze_csv_format(capsys, tmp_path):
    path = tmp_path / "table.csv"
    code, _, _ = run(capsys, "analyze", "--scenario", "Ex2",
                     "--ns", "10,20", "--format", "csv",
                     "--out", str(path))
    assert code == 0
    lines = path.read_text().strip().splitlines()
    assert lines[0].startswith("n,A_n,C_n")
    assert len(lines) == 3
    # 17 significant digits, '.' decimal
    a10 = lines[1].split(",")[1]
    assert float(a10) == pytest.approx(13 / 33, rel=1e-15)
    assert "," not in a10 and "e" not in a10.split(".")[0]


def test_pmf_csv(capsys):
    code, out, _ = run(capsys, "pmf", "--scenario", "Ex9i", "--n", "2")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "j,weight"
    assert lines[-1].startswith("cutoff,")


def test_classify(capsys):
    code, out, _ = run(capsys, "classify", "--scenario", "Ex3")
    assert code == 0
    assert json.loads(out)["regime"] == "critical"


def test_simulate_deterministic(capsys, tmp_path):
    argv = ("simulate", "--scenario", "Ex1", "--horizon", "10",
            "--replicates", "200", "--seed", "5")
    code1, out1, _ = run(capsys, *argv)
    code2, out2, _ = run(capsys, *argv)
    assert code1 == code2 == 0
    assert out1 == out2
    payload = json.loads(out1)
    assert payload["seed"] == 5
    assert payload["replicates"] == 200


def test_simulate_trajectory_file(capsys, tmp_path):
    path = tmp_path / "traj.csv"
    code, _, _ = run(capsys, "simulate", "--scenario", "Ex3",
                     "--horizon", "8", "--replicates", "10", "--seed", "1",
                     "--trajectory", str(path))
    assert code == 0
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "generation,state"
    assert len(lines) == 10


def test_simulate_logs_generated_seed(capsys, caplog):
    code = main(["simulate", "--scenario", "Ex1", "--horizon", "5",
                 "--replicates", "50"])
    capsys.readouterr()
    assert code == 0
    assert any("seed" in rec.message for rec in caplog.records)


def test_verify_single_scenario(capsys):
    code, out, err = run(capsys, "verify", "--scenario", "Ex4a",
                         "--seed", "7")
    assert code == 0
    payload = json.loads(out)
    assert payload["summary"][0]["pass"] is True
    assert "Ex4a" in err


def test_model_json_round_trip(capsys, tmp_path):
    path = tmp_path / "model.json"
    code, _, _ = run(capsys, "classify", "--scenario", "Ex7ii",
                     "--write-model", str(path))
    assert code == 0
    reparsed = ThetaModel.from_dict(json.loads(path.read_text()))
    assert reparsed == scenario_model("Ex7ii")
    # and the written file is accepted as a --model source
    code, out, _ = run(capsys, "classify", "--model", str(path))
    assert code == 0
    assert json.loads(out)["regime"] == "defective"


def test_usage_errors_exit_2(capsys):
    code, _, err = run(capsys, "classify")          # no model source
    assert code == 2 and "scenario" in err
    code, _, err = run(capsys, "classify", "--scenario", "Ex1",
                       "--model", "x.json")
    assert code == 2
    code, _, err = run(capsys, "classify", "--scenario", "Ex99")
    assert code == 2
    code, _, err = run(capsys, "analyze", "--scenario", "Ex7i",
                       "--sigma", "9")
    assert code == 2 and "violates" in err


def test_model_overrides_rejected_with_model_file(capsys, tmp_path):
    path = tmp_path / "model.json"
    path.write_text(json.dumps(scenario_model("Ex1").to_dict()))
    code, _, err = run(capsys, "classify", "--model", str(path),
                       "--theta", "0.5")
    assert code == 2 and "--theta" in err
