import csv
import io
import json
import xml.dom.minidom

import pytest

from nnoracle import cli
from nnoracle.subject import FIELDS, approve


def record(amount=None, **fields):
    rec = dict(citizenship=1, state=1, region=3, sex=0, age=40, marital=1, dependents=0, income=2)
    rec.update(fields)
    rec["amount"] = approve([rec[f] for f in FIELDS]).amount if amount is None else amount
    return rec


@pytest.fixture(scope="module")
def model(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "model.json"
    assert cli.main(["train", "--variant", "uni", "--n", "10", "--epochs", "20", "--seed", "3",
                     "--log-every", "10", "--out", str(path)]) == 0
    return path


def test_train_logs_progress(tmp_path, capsys):
    out = tmp_path / "d.json"
    assert cli.main(["train", "--variant", "direct", "--epochs", "4", "--log-every", "2",
                     "--out", str(out)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert [line.split()[1] for line in lines[:2]] == ["2", "4"]
    assert lines[2].startswith("final mse")
    assert json.loads(out.read_text())["meta"] == {"data_seed": 0, "n_train": 500}


def test_train_divergence_exit_code(tmp_path):
    args = ["train", "--lr", "1e308", "--epochs", "50", "--out", str(tmp_path / "x.json")]
    assert cli.main(args) == cli.EXIT_DIVERGED
    assert not (tmp_path / "x.json").exists()


def test_usage_errors(model):
    with pytest.raises(SystemExit) as exc:
        cli.main(["eval", "--model", str(model), "--aggressiveness", "6"])
    assert exc.value.code == cli.EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate"])
    assert exc.value.code == cli.EXIT_USAGE
    assert cli.main(["sweep", "--variants", "bogus"]) == cli.EXIT_USAGE


def test_eval(model, tmp_path, capsys):
    out = tmp_path / "e.csv"
    assert cli.main(["eval", "--model", str(model), "--aggressiveness", "2", "--csv", str(out)]) == 0
    text = capsys.readouterr().out
    assert "TP rate" in text and "M21" in text
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert rows[0]["variant"] == "uni" and rows[0]["aggressiveness"] == "2"
    assert rows[0]["data_seed"] == "3"


def test_bad_model_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    assert cli.main(["eval", "--model", str(bad)]) == cli.EXIT_MODEL
    assert cli.main(["check", "--model", str(bad)]) == cli.EXIT_MODEL


def run_check(model, tmp_path, lines, *extra):
    src = tmp_path / "records.jsonl"
    src.write_text("\n".join(lines) + "\n")
    return cli.main(["check", "--model", str(model), "--input", str(src), *extra])


def test_check_accepts(model, tmp_path, capsys):
    # the most lenient level never rejects a non clear-cut case
    code = run_check(model, tmp_path, [json.dumps(record())], "--aggressiveness", "0")
    out = capsys.readouterr().out.splitlines()
    assert out[-1].startswith("summary\ttotal=1")
    assert code in (0, 1)
    assert out[0].split("\t")[1] == ("accept" if code == 0 else "reject")


def test_check_rejects_everything_unclear_at_top_aggressiveness(model, tmp_path, capsys):
    recs = [json.dumps(record(amount=a)) for a in (0, 9000, 18000)]
    code = run_check(model, tmp_path, recs, "--aggressiveness", "5")
    out = capsys.readouterr().out.splitlines()
    verdicts = [line.split("\t")[1:3] for line in out[:-1]]
    assert all(v != ["accept", "non_clear_cut"] for v in verdicts)
    assert code == (0 if all(v[0] == "accept" for v in verdicts) else 1)


@pytest.mark.parametrize(
    "bad",
    [
        "{not json",
        json.dumps({"amount": 5}),
        json.dumps(record(amount=0, region=7)),
        json.dumps({**record(), "extra": 1}),
        json.dumps(record(amount=18001)),
    ],
)
def test_check_parse_errors(model, tmp_path, capsys, bad):
    code = run_check(model, tmp_path, [json.dumps(record()), bad])
    out = capsys.readouterr().out.splitlines()
    assert code == cli.EXIT_PARSE
    assert out[1].startswith("2\terror\t")
    assert "errors=1" in out[-1]


def test_check_stdin(model, monkeypatch, capsys):
    monkeypatch.setattr("sys.stdin", io.StringIO(json.dumps(record()) + "\n\n"))
    assert cli.main(["check", "--model", str(model)]) in (0, 1)
    assert "total=1" in capsys.readouterr().out


def test_mutants(capsys):
    assert cli.main(["mutants"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 21
    assert lines[0].startswith("M1 ")


def test_sweep_outputs_are_deterministic(tmp_path, capsys):
    args = ["sweep", "--variants", "uni", "--ns", "10", "--aggressiveness", "0,5", "--epochs", "3"]
    assert cli.main([*args, "--out-dir", str(tmp_path / "a")]) == 0
    assert cli.main([*args, "--out-dir", str(tmp_path / "b")]) == 0
    for name in ("sweep.csv", "sweep.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    xml.dom.minidom.parse(str(tmp_path / "a" / "sweep.svg"))
    assert (tmp_path / "a" / "sweep.csv").read_text().count("\n") == 3


def test_fig4_chart_has_error_bars():
    from nnoracle import harness

    reports = [harness.evaluate(c, oracle=harness.PerfectOracle()) for c in harness.preset("fig4")]
    svg = cli.sweep_chart("fig4", reports)
    doc = xml.dom.minidom.parseString(svg)
    assert len(doc.getElementsByTagName("rect")) > 4 * 21
    assert "M21" in svg
