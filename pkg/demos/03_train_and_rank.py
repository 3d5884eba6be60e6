"""Split, train one embedding model and rank held-out causal links."""
# %%
import tempfile
from pathlib import Path

import numpy as np

from causalkg.evaluation import EvalTask, evaluate
from causalkg.kg import compile_kg
from causalkg.kge import TrainConfig, train
from causalkg.pipeline import ingest_stage, model_vocabulary, training_parts
from causalkg.pipeline import test_links as held_out_links
from causalkg.split import build_manifest
from causalkg.synthetic import gen_synthetic

work = Path(tempfile.mkdtemp())
gen_synthetic(120, confounder_rate=0.8, seed=1, path=work / "corpus.json")
networks, _ = ingest_stage(work / "corpus.json")
by_id = {cn.cn_id: cn for cn in networks}

# %%
# Whole graphs go to train or test. Inside each test graph some links are
# held out, and the parent edges of every held-out link stay in training.
manifest = build_manifest(networks, ratio=0.8, seed=1)
print(len(manifest.train_cegs), "train graphs,", len(manifest.test_cegs), "test graphs,",
      len(manifest.test_links()), "held-out links")

kg = compile_kg(training_parts(manifest, by_id), "C")
tests = held_out_links(manifest, by_id, "causal_prediction")
ents, rels = model_vocabulary(kg, tests)

# %%
# Weighted training scales every score by a blend of the link weight that
# starts neutral and ends fully weight-driven.
cfg = TrainConfig(k=50, eta=5, epochs=60, batches_count=10, loss="multiclass_nll", learning_rate=0.01, seed=3)
for weighted in (False, True):
    model, trace = train(kg.quads, cfg, "TransE", weighted, entities=ents, relations=rels)
    task = EvalTask("causal_prediction", tests, kg.triples() | {q.triple for q in tests})
    rep = evaluate(model, task)
    print(f"weighted={weighted}: loss {trace[0]:.1f} -> {trace[-1]:.1f}, MRR {rep.mrr:.3f}, "
          f"Hits@1/3/10 {[round(rep.hits[k], 3) for k in (1, 3, 10)]}")

# %%
# Rank distribution of the last model.
ranks = np.array(rep.ranks)
print("median rank", np.median(ranks), "of", len(ents), "entities")
