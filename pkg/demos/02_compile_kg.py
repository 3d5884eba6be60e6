"""From annotated event graphs to a weighted quad store."""
# %%
import tempfile
from pathlib import Path

from causalkg.kg import closure_violations, compile_kg, kg_stats
from causalkg.pipeline import ingest_stage
from causalkg.synthetic import gen_synthetic

work = Path(tempfile.mkdtemp())
gen_synthetic(30, confounder_rate=0.5, seed=7, path=work / "corpus.json")

# %%
# Ingest drops score-1 annotations, breaks cycles, and rejects graphs whose
# longest causal chain is shorter than two links.
networks, rejected = ingest_stage(work / "corpus.json")
print(len(networks), "networks,", len(rejected), "rejected")
cn = networks[0]
for (s, d), w in sorted(cn.edges.items()):
    print(f"  {s}:{cn.nodes[s].event_label} -> {d}:{cn.nodes[d].event_label}  w={w}")

# %%
# Each causal edge turns into four quads: the instance link, its inverse,
# and two links from an instance to the other end's event type.
kg_c = compile_kg([cn], "C")
for q in kg_c.quads[:8]:
    print(q)

# %%
# The larger subgraphs add event typing, scene membership, participants and
# object properties. Every quad of a smaller subgraph survives in the larger.
for sg in ("C", "CT", "CTP"):
    kg = compile_kg(networks, sg)
    print(sg, kg_stats(kg), "closure violations:", len(closure_violations(kg)))
