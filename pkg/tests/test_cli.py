import json

import pytest

from randgame.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def jsonl(text):
    return [json.loads(line) for line in text.splitlines()]


def test_classify(capsys):
    code, out, _ = run(capsys, "classify", "--n", "3", "--k", "5", "--samples", "4", "--seed", "2")
    assert code == 0
    recs = jsonl(out)
    assert [r["sample"] for r in recs] == [0, 1, 2, 3]
    assert set(recs[0]["flags"]) == {"pne", "connected", "weakly_acyclic", "acyclic"}


def test_global_flags_before_subcommand(capsys):
    _, a, _ = run(capsys, "--k", "5", "--samples", "2", "classify")
    _, b, _ = run(capsys, "classify", "--k", "5", "--samples", "2")
    assert a == b


def test_classify_better_and_table(capsys, tmp_path):
    _, out, _ = run(capsys, "classify", "--better", "--n", "2", "--k", "3", "--samples", "3")
    assert len(jsonl(out)) == 3
    table = tmp_path / "t.json"
    table.write_text(json.dumps({"n": 2, "k": 2, "winners": [1, 0, 0, 1]}))
    _, out, _ = run(capsys, "classify", "--table", str(table))
    (rec,) = jsonl(out)
    assert rec["sinks"] == [] and not rec["flags"]["pne"]


def test_census(capsys):
    code, out, err = run(capsys, "census", "--k", "16", "--samples", "5", "--epsilon", "0.3")
    assert code == 0 and "tv=" in err
    for r in jsonl(out):
        assert r["X"] + r["Y"] == len(r["good"]) + len(r["bad"])


def test_slices(capsys):
    _, out, _ = run(capsys, "slices", "--n", "2", "--k", "10", "--samples", "20")
    recs = jsonl(out)
    assert recs and set(recs[0]) >= {"anchor", "length", "basin_size", "good"}
    _, out, _ = run(capsys, "slices", "--stats", "--k", "6", "--samples", "2")
    assert all("lemma9" in r for r in jsonl(out))


def test_gw(capsys):
    _, out, _ = run(capsys, "gw", "--samples", "2000", "--mean", "2", "--init", "1")
    d = json.loads(out)
    assert abs(d["extinction_frequency"] - d["extinction_probability"]) < 0.05
    _, out, _ = run(capsys, "gw", "--offspring", "binomial", "--trials", "3", "--success", "0.9", "--samples", "100")
    assert json.loads(out)["mean"] == pytest.approx(2.7)


def test_asymptotics_formats(capsys):
    _, out, _ = run(capsys, "asymptotics", "--n-min", "3", "--n-max", "5")
    lines = out.splitlines()
    assert lines[0].startswith("n,eta,p,lambda_n,zeta") and len(lines) == 4
    _, out, _ = run(capsys, "asymptotics", "--n-max", "4", "--format", "json")
    rows = json.loads(out)
    assert rows[0]["zeta"] == pytest.approx(0.0132, abs=5e-4)
    code, _, err = run(capsys, "asymptotics", "--n-min", "6", "--n-max", "4")
    assert code == 1 and "--n-max" in err


def test_dynamics_schema(capsys):
    _, out, _ = run(capsys, "dynamics", "--k", "8", "--samples", "2", "--starts", "3", "--condition", "connected")
    recs = jsonl(out)
    assert len(recs) == 6
    assert set(recs[0]) >= {"seed", "n", "k", "q", "start", "converged", "steps", "sink"}
    assert all(r["converged"] for r in recs)


def test_experiment_and_oracle(capsys, tmp_path):
    code, out, _ = run(capsys, "experiment", "--kind", "connectivity", "--k-sweep", "4,6",
                       "--samples", "10", "--out", str(tmp_path / "e"))
    assert code == 0 and out.startswith("kind,n,k,metric")
    assert (tmp_path / "e" / "manifest.json").exists()
    _, out, _ = run(capsys, "oracle", "--n", "2", "--k", "2")
    assert json.loads(out)["with_pne"] == 14
    _, out, _ = run(capsys, "experiment", "--kind", "oracle", "--n", "2", "--k", "2")
    assert json.loads(out)["tables"] == 16


def test_out_file(capsys, tmp_path):
    target = tmp_path / "c.csv"
    run(capsys, "classify", "--samples", "3", "--format", "csv", "--out", str(target))
    assert target.read_text().splitlines()[0].startswith("sample,seed,n,k")


@pytest.mark.parametrize("argv, fragment", [
    (["classify", "--n", "1"], "--n: must be >= 2"),
    (["classify", "--k", "x"], "expected an integer"),
    (["census", "--epsilon", "0.5"], "--epsilon: must lie in (0.0, 0.5)"),
    (["classify", "--samples", "0"], "--samples: must be >= 1"),
    (["classify", "--workers", "0"], "--workers: must be >= 1"),
    (["--seed", "-3", "classify"], "--seed: must be >= 0"),
    (["dynamics", "--q", "0"], "--q: must lie in (0.0, 1.0]"),
    (["gw", "--mean", "0"], "--mean: must lie in"),
    (["gw", "--success", "1.5"], "--success: must lie in [0.0, 1.0]"),
    (["experiment", "--kind", "slices", "--k-sweep", "4,1"], "must be >= 2"),
])
def test_range_errors(capsys, argv, fragment):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2
    assert fragment in capsys.readouterr().err


def test_runtime_errors_exit_one(capsys, tmp_path):
    code, _, err = run(capsys, "experiment", "--kind", "connectivity", "--samples", "2",
                       "--out", str(tmp_path / "no" / "where"))
    assert code == 1 and "does not exist" in err
    code, _, err = run(capsys, "oracle", "--n", "3", "--k", "3")
    assert code == 1 and "enumeration cap" in err
    code, _, err = run(capsys, "classify", "--n", "8", "--k", "200")
    assert code == 1 and "cap" in err


def test_module_entry_point():
    import subprocess
    import sys

    out = subprocess.run([sys.executable, "-m", "randgame", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "randgame" in out.stdout
