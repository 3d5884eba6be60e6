import json
import subprocess
import sys

import pytest

from causalkg.cli import main

TINY = {"k": 4, "eta": 2, "epochs": 2, "batches_count": 1, "loss": "nll", "learning_rate": 0.01}


def _json(capsys):
    return json.loads(capsys.readouterr().out)


@pytest.fixture
def workdir(tmp_path, capsys):
    corpus = tmp_path / "corpus.json"
    assert main(["synth", "--n-graphs", "25", "--confounder-rate", "1.0", "--seed", "2", "--out", str(corpus)]) == 0
    assert _json(capsys)["graphs"] == 25
    assert main(["ingest", str(corpus), "--out", str(tmp_path / "nets")]) == 0
    assert _json(capsys)["networks"] == 25
    return tmp_path


def test_stage_by_stage(workdir, capsys):
    w = workdir
    assert main(["split", str(w / "nets"), "--regime", "no_sufficient", "--seed", "1", "--out", str(w / "split")]) == 0
    assert _json(capsys)["train"] == 20
    assert main(["compile", str(w / "nets"), "--split", str(w / "split"), "--subgraph", "CT", "--out", str(w / "kg")]) == 0
    assert _json(capsys)["relations"] == 5
    (w / "train.json").write_text(json.dumps(TINY))
    model = w / "m.bin"
    assert main(["train", str(w / "kg"), "--config", str(w / "train.json"), "--weighted", "--out", str(model)]) == 0
    assert _json(capsys)["epochs"] == 2
    assert main(["eval", str(model), "--kg", str(w / "kg"), "--task", "causal_explanation", "--out", str(w / "r.json")]) == 0
    rep = _json(capsys)
    assert 0 < rep["mrr"] <= 1 and rep["task"] == "causal_explanation"


def test_backdoor_command(workdir, capsys):
    index = json.loads((workdir / "nets" / "index.json").read_text())
    cid = index[0] if isinstance(index, list) else sorted(index)[0]
    # n1 -> n2 is the spine link; with rate 1 it carries a planted confounder
    assert main(["backdoor", str(workdir / "nets"), "--cn", cid, "--cause", "n1", "--effect", "n2"]) == 0
    out = _json(capsys)
    assert out["paths"] and out["sufficient"] and set(out["sufficient"]) <= set(out["maximum"])


def test_run_and_report(workdir, capsys):
    cfg = {"corpus": str(workdir / "corpus.json"), "regimes": ["with_backdoor", "no_maximum"], "train": TINY}
    (workdir / "run.json").write_text(json.dumps(cfg))
    assert main(["run", "--config", str(workdir / "run.json"), "--deterministic", "--out", str(workdir / "r")]) == 0
    assert _json(capsys)["status"] == "complete"
    assert main(["report", str(workdir / "r")]) == 0
    assert len(_json(capsys)["rows"]) == 2


def test_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps([{"ceg_id": "x", "scene_id": "s", "objects": [], "nodes": [], "edges": [{"src": "a", "dst": "b", "score": 9}]}]))
    assert main(["ingest", str(bad), "--out", str(tmp_path / "n")]) == 2
    assert "record" in capsys.readouterr().err
    assert main(["run", "--corpus", str(bad), "--out", str(tmp_path / "r")]) == 2
    assert main(["run", "--out", str(tmp_path / "r")]) == 2
    assert main(["ingest", str(tmp_path / "missing.json"), "--out", str(tmp_path / "n")]) == 1


def test_console_entry_point(tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "causalkg.cli", "synth", "--n-graphs", "3", "--out", str(tmp_path / "c.json")],
        capture_output=True,
        text=True,
    )
    assert out.returncode == 0, out.stderr
    assert len(json.loads((tmp_path / "c.json").read_text())) == 3
