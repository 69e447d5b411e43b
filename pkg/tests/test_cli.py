import json

import pytest

from isac_region import cli
from isac_region.fixtures import cascade, clean_legit_bsc_eav, uniform_x_aux, x_bypass
from isac_region.io import dump_aux, dump_spec, spec_to_dict


@pytest.fixture
def files(tmp_path):
    dump_spec(cascade(), tmp_path / "cascade.json")
    dump_spec(x_bypass(), tmp_path / "bypass.json")
    dump_spec(clean_legit_bsc_eav(0.1), tmp_path / "bsc.json")
    dump_aux(uniform_x_aux(clean_legit_bsc_eav(0.1)), tmp_path / "bsc_aux.json")
    dump_aux(uniform_x_aux(cascade()), tmp_path / "cascade_aux.json")
    (tmp_path / "sim.json").write_text(
        json.dumps({"spec": "cascade.json", "aux": "cascade_aux.json", "n": 3, "bins": [2, 2, 2], "trials": 300})
    )
    return tmp_path


def result_text(path):
    return json.dumps(json.loads(path.read_text())["result"], sort_keys=True)


def csv_body(path):
    header, body = path.read_text().split("\n", 1)
    assert header.startswith("# manifest {")
    return body


def test_validate_exit_codes(files, capsys):
    assert cli.main(["validate", str(files / "cascade.json")]) == 0
    doc = spec_to_dict(cascade())
    doc["main_kernel"][0][0][0][0][0] -= 0.01
    (files / "broken.json").write_text(json.dumps(doc))
    capsys.readouterr()
    assert cli.main(["validate", str(files / "broken.json")]) == 1
    lines = [json.loads(l) for l in capsys.readouterr().err.splitlines()]
    assert len(lines) == 1 and lines[0]["code"] == "stochasticity"
    assert cli.main(["validate", str(files / "missing.json")]) == 2


def test_ragged_input_is_usage_error(files):
    doc = spec_to_dict(cascade())
    doc["state_kernel"] = [[1.0], [0.5, 0.5]]
    (files / "ragged.json").write_text(json.dumps(doc))
    assert cli.main(["validate", str(files / "ragged.json")]) == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["region"])
    assert exc.value.code == 2


def test_degraded_exit_codes(files, capsys):
    out = files / "deg.json"
    assert cli.main(["degraded", str(files / "cascade.json"), "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["manifest"]["command"] == "degraded" and doc["result"]["is_degraded"]
    assert cli.main(["degraded", str(files / "bypass.json")]) == 1
    assert "violating_context" in capsys.readouterr().out


def test_invalid_spec_for_compute_command(files, capsys):
    doc = spec_to_dict(cascade())
    doc["main_kernel"][0][0][0][0][0] -= 0.01
    (files / "broken.json").write_text(json.dumps(doc))
    assert cli.main(["degraded", str(files / "broken.json")]) == 2
    assert "stochasticity" in capsys.readouterr().err


def test_region_outputs_and_reproducibility(files):
    args = ["region", str(files / "cascade.json"), "--restarts", "2", "--iters", "20", "--seed", "4"]
    assert cli.main(args + ["--out", str(files / "a")]) == 0
    assert cli.main(args + ["--out", str(files / "b")]) == 0
    assert cli.main(["--threads", "4"] + args + ["--out", str(files / "c")]) == 0
    assert result_text(files / "a.json") == result_text(files / "b.json") == result_text(files / "c.json")
    assert csv_body(files / "a.csv") == csv_body(files / "c.csv")
    manifest = json.loads((files / "a.json").read_text())["manifest"]
    assert manifest["seed"] == 4 and manifest["params"]["restarts"] == 2


def test_fbl_outputs(files, capsys):
    prefix = files / "f"
    code = cli.main(
        ["fbl", str(files / "bsc.json"), str(files / "bsc_aux.json"), "--n-grid", "100,1000,10000", "--out", str(prefix)]
    )
    assert code == 0
    rows = json.loads((files / "f.json").read_text())["result"]
    assert [r["n"] for r in rows] == [100, 1000, 10000]
    body = csv_body(files / "f.csv").splitlines()
    assert len(body) == 4 and "r2" in body[0].split(",")
    assert cli.main(
        ["fbl", str(files / "bsc.json"), str(files / "bsc_aux.json"), "--mode", "explicit", "--n", "6"]
    ) == 0
    assert "explicit" in capsys.readouterr().out


def test_simulate_outputs_and_reproducibility(files, monkeypatch):
    cfg = str(files / "sim.json")
    assert cli.main(["simulate", cfg, "--seed", "5", "--out", str(files / "s1.json"), "--trace", str(files / "t.csv")]) == 0
    assert cli.main(["simulate", cfg, "--seed", "5", "--out", str(files / "s2.json")]) == 0
    monkeypatch.setenv("ISAC_REGION_THREADS", "4")
    assert cli.main(["simulate", cfg, "--seed", "5", "--out", str(files / "s3.json")]) == 0
    assert result_text(files / "s2.json") == result_text(files / "s3.json")
    first = json.loads((files / "s1.json").read_text())["result"]
    second = json.loads((files / "s2.json").read_text())["result"]
    assert first["per_trial_seedchain"] == second["per_trial_seedchain"]
    assert first["error_rate"] == second["error_rate"]
    trace = csv_body(files / "t.csv").splitlines()
    assert len(trace) == 301 and trace[0].startswith("trial,m1,m2,f")
    assert cli.main(["simulate", cfg, "--trials", "50", "--no-exact-secrecy", "--out", str(files / "p.json")]) == 0
    assert json.loads((files / "p.json").read_text())["result"]["secrecy_method"].startswith("plug-in")


def test_bad_rates_exit_two(files):
    (files / "bad.json").write_text(
        json.dumps({"spec": "cascade.json", "aux": "cascade_aux.json", "n": 3, "rates": [0.5, 0, 0]})
    )
    assert cli.main(["simulate", str(files / "bad.json")]) == 2
