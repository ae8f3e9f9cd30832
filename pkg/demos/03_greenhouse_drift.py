"""Continuous drift, an adaptive controller and relayed readings.

The outside temperature falls steadily; once it is cold enough the sensor
declares winter, the controller perceives the new season and rewrites its
knowledge base.
"""

import numpy as np

from masforge import models_dir
from masforge.agents import run_model
from masforge.modelc import load_model

model = load_model(models_dir() / "greenhouse.mas")
trace, system = run_model(model, 24, seed=0, substeps=8, dt=1.0)

# %% Every tick records the intermediate drift states; stack them into one curve.
curve = np.array([s["temperature"] for r in trace.records[1:] for s in r.as_dict().get("drift", [])])
print(f"{curve.size} substeps, temperature range {curve.min():.2f} .. {curve.max():.2f}")
print("mean over the last 8 ticks:", curve[-64:].mean().round(3))

# %% When did the controller change its mind about the season?
for r in trace.records[1:]:
    for change in r.step.changes:
        if "knowledge" in change:
            print(f"tick {r.tick}: {change['agent']} now believes {change['knowledge']}")
print("controller knowledge at the end:", dict(system["controller"].cognition.knowledge))

# %% The relay spreads readings; the logger keeps the latest one it heard.
print("logger representation:", system["logger"].representations.get("temperature"))
