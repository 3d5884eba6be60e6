"""Backdoor paths and adjustment sets on a hand-built causal network."""
# %%
# A network is a weighted DAG over event nodes. Node payloads only matter
# for knowledge graph compilation, so plain "move" events do here.
from causalkg.ingest import EventNode, SceneObject
from causalkg.network import (
    CausalNetwork,
    backdoor_edges,
    enumerate_backdoor_paths,
    maximum_backdoor_set,
    sufficient_backdoor_set,
)

edges = {("G", "P"): 0.75, ("P", "A"): 0.5, ("G", "H"): 1.0, ("A", "H"): 0.25, ("A", "B"): 0.5}
nodes = {n: EventNode(n, "move", ("o1",)) for n in "ABGHP"}
cn = CausalNetwork("demo", nodes, edges, "s0", {"o1": SceneObject("o1", "cube", "red", "metal")})

# %%
# G drives H directly and reaches A through P, so the link A -> H shares
# a common cause with its own effect. The only backdoor path runs A <- P <- G -> H.
for bp in enumerate_backdoor_paths(cn, "A", "H"):
    print(" - ".join(bp.nodes), bp.edges)

# %%
# The sufficient set keeps only the parent of A that opens the path; the
# maximum set takes every interior node.
print("sufficient:", sorted(sufficient_backdoor_set(cn, "A", "H").members))
print("maximum:   ", sorted(maximum_backdoor_set(cn, "A", "H").members))

# %%
# Removal differs accordingly: the sufficient variant cuts the entry edge
# P -> A, the maximum variant cuts every edge of the path that is not also
# on a directed route from A to H.
print("sufficient removes:", sorted(backdoor_edges(cn, [("A", "H")], "sufficient")))
print("maximum removes:   ", sorted(backdoor_edges(cn, [("A", "H")], "maximum")))
