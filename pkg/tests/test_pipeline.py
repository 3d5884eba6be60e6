import csv
import json

import pytest

from causalkg.evaluation import RankReport
from causalkg.network import enumerate_backdoor_paths
from causalkg.pipeline import (
    PipelineConfig,
    PipelineError,
    comparison_table,
    inflation,
    ingest_stage,
    load_reports,
    model_name,
    report,
    run,
    stage_seed,
)
from causalkg.synthetic import gen_synthetic

TINY = {"k": 4, "eta": 2, "epochs": 2, "batches_count": 1, "loss": "multiclass_nll", "learning_rate": 0.01}


@pytest.fixture(scope="module")
def small_corpus(tmp_path_factory):
    path = tmp_path_factory.mktemp("corpus") / "synthetic.json"
    gen_synthetic(20, 0.8, seed=3, path=path)
    return path


def _descendants(cn, u):
    out, stack = set(), [u]
    while stack:
        for c in cn.children(stack.pop()):
            if c not in out:
                out.add(c)
                stack.append(c)
    return out


def test_synthetic_rate_zero_has_no_backdoor(tmp_path):
    gen_synthetic(60, 0.0, seed=1, path=tmp_path / "c.json")
    nets, _ = ingest_stage(tmp_path / "c.json")
    assert len(nets) == 60
    for cn in nets:
        for u in cn.nodes:
            for v in _descendants(cn, u):
                assert enumerate_backdoor_paths(cn, u, v) == []


def test_synthetic_rate_one_confounds_every_graph(tmp_path):
    gen_synthetic(100, 1.0, seed=2, path=tmp_path / "c.json")
    nets, rejected = ingest_stage(tmp_path / "c.json")
    assert not rejected and len(nets) == 100
    for cn in nets:
        assert any(enumerate_backdoor_paths(cn, u, v) for (u, v) in cn.edges)


def test_synthetic_same_seed_same_bytes(tmp_path):
    gen_synthetic(15, 0.5, seed=9, path=tmp_path / "a.json")
    gen_synthetic(15, 0.5, seed=9, path=tmp_path / "b.json")
    gen_synthetic(15, 0.5, seed=10, path=tmp_path / "c.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    assert (tmp_path / "a.json").read_bytes() != (tmp_path / "c.json").read_bytes()


def test_synthetic_validation():
    with pytest.raises(ValueError):
        gen_synthetic(0, 0.5)
    with pytest.raises(ValueError):
        gen_synthetic(5, 1.5)


def test_stage_seed_and_names():
    assert stage_seed(0, "split") == stage_seed(0, "split")
    assert stage_seed(0, "split") != stage_seed(1, "split")
    assert stage_seed(0, "train", "TransE", "C") != stage_seed(0, "train", "HolE", "C")
    assert model_name("no_sufficient", "weighted") == "CausalKGE-W-WithoutSufficientBackdoor"
    assert model_name("with_backdoor", "base") == "CausalKGE-Base-WithBackdoor"


def test_single_cell_run(small_corpus, tmp_path):
    cfg = PipelineConfig(corpus=str(small_corpus), regimes=["with_backdoor"], train=TINY)
    out = run(cfg, tmp_path / "run")
    assert len(list(out.glob("models/**/*.bin"))) == 1
    assert len(list(out.glob("reports/**/*.json"))) == 2
    doc = json.loads((out / "run.json").read_text())
    assert doc["status"] == "complete" and not (out / "STALE").exists()
    rows = list(csv.DictReader(open(out / "summary.csv")))
    assert len(rows) == 2  # one per task, no average row
    assert all(r["subgraph"] == "C" for r in rows)


def test_full_grid_counts(small_corpus, tmp_path):
    cfg = PipelineConfig(
        corpus=str(small_corpus),
        scorers=["TransE", "DistMult", "HolE", "ComplEx"],
        weighting=["base", "weighted"],
        train=TINY,
    )
    out = run(cfg, tmp_path / "run")
    assert len(list(out.glob("models/**/*.bin"))) == 24
    assert len(list(out.glob("reports/**/*.json"))) == 48
    for p in out.glob("kg/*/C/stats.json"):
        assert json.loads(p.read_text())["links"] > 0


def test_run_is_byte_identical(small_corpus, tmp_path):
    cfg = PipelineConfig(corpus=str(small_corpus), subgraphs=["CT"], regimes=["no_maximum"], train=TINY, seed=4)
    a, b = run(cfg, tmp_path / "a"), run(cfg, tmp_path / "b")
    files = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
    assert files == sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file())
    for f in files:
        assert (a / f).read_bytes() == (b / f).read_bytes(), f


def test_run_failure_records_stage(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("[{]")
    cfg = PipelineConfig(corpus=str(bad), train=TINY)
    with pytest.raises(PipelineError) as err:
        run(cfg, tmp_path / "run")
    assert err.value.stage == "ingest"
    doc = json.loads((tmp_path / "run" / "run.json").read_text())
    assert doc["status"] == "failed" and (tmp_path / "run" / "STALE").exists()


def _rep(regime, sg, mrr, weighted=False):
    tags = {"task": "causal_prediction", "regime": regime, "scorer": "TransE", "subgraph": sg, "weighted": weighted}
    return RankReport([1], mrr, {1: 1.0, 3: 1.0, 10: 1.0}, tags)


def test_average_and_inflation_rows():
    reps = []
    for sg, mrr in zip(("C", "CT", "CTP"), (0.43, 0.23, 0.30)):
        reps.append(_rep("with_backdoor", sg, mrr))
        reps.append(_rep("no_sufficient", sg, mrr * 0.207 / 0.319))
        reps.append(_rep("no_maximum", sg, mrr / 2))
    table = comparison_table(reps)
    avg = [r for r in table.rows if r["subgraph"] == "Average"]
    assert len(avg) == 1
    assert avg[0]["mrr_with_bd"] == pytest.approx(0.32, abs=0.005)
    assert avg[0]["inflation_vs_sufficient_pct"] == pytest.approx(54.1, abs=0.1)
    assert not table.missing


def test_inflation_example():
    assert inflation(0.319, 0.207) == pytest.approx(54.1, abs=0.05)


def test_missing_cells_partial_table(tmp_path):
    table = comparison_table([_rep("with_backdoor", "C", 0.5)])
    assert len(table.rows) == 1 and table.rows[0]["mrr_without_sufficient"] is None
    assert sorted(table.missing) == ["causal_prediction/base/TransE/C/no_maximum", "causal_prediction/base/TransE/C/no_sufficient"]


def test_report_over_run_dir(small_corpus, tmp_path):
    cfg = PipelineConfig(corpus=str(small_corpus), subgraphs=["C", "CTP"], train=TINY, tasks=["causal_explanation"])
    out = run(cfg, tmp_path / "run")
    table = report(out)
    assert {r["subgraph"] for r in table.rows} == {"C", "CTP", "Average"}
    assert len(load_reports(out)) == 6


def test_config_validation(small_corpus):
    with pytest.raises(ValueError):
        PipelineConfig(corpus="x", scorers=["RotatE"])
    with pytest.raises(ValueError):
        PipelineConfig(corpus="x", train={"k": -1})
    cfg = PipelineConfig.from_dict({"corpus": str(small_corpus), "subgraph_tag": "CTP"})
    assert cfg.subgraphs == ["CTP"]
