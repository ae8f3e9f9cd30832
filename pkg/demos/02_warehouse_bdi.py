"""A BDI picker and a rational dispatcher on a noisy warehouse floor.

Orders and mess drift at random, so the run depends on the seed, and only
on the seed: two runs with the same seed agree byte for byte.
"""

import numpy as np

from masforge import models_dir
from masforge.agents import run_model
from masforge.cognition import Desire, filter_desires
from masforge.modelc import load_model

model = load_model(models_dir() / "warehouse.mas")

# %% The filter on its own: fulfil and tidy conflict, so only one survives.
desires = [Desire("fulfil", 5, frozenset({"tidy"})), Desire("tidy", 3, frozenset({"fulfil"})), Desire("rest", 1)]
print("filtered:", [d.goal_id for d in filter_desires(desires, {})])

# %% A short run. Intention status changes are part of the trace.
trace, system = run_model(model, 20, seed=4)
for record in trace.records[1:]:
    acts = [f"{a.actor}.{a.action}" for a in record.step.actions]
    moves = [f"{c['agent']}:{c['intention']}->{c['status']}" for c in record.step.changes if "intention" in c]
    print(f"tick {record.tick:>2}  {dict(record.state.values)}  {acts}  {moves}")

# %% Replay is exact.
again, _ = run_model(model, 20, seed=4)
assert again.dumps() == trace.dumps()

# %% Across seeds the floor behaves differently; summarize with numpy.
finals = np.array([[run_model(model, 40, seed=s)[0].final_state[v] for v in ("orders", "mess", "shelved")] for s in range(30)])
print("mean orders/mess/shelved after 40 ticks:", finals.mean(axis=0).round(2))
print("std:", finals.std(axis=0).round(2))
