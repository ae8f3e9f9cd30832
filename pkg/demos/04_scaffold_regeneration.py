"""Generate a project scaffold, fill in a method, regenerate.

Hand-written code lives inside keep regions; everything else is owned by
the generator and is rewritten on every run.
"""

import tempfile
from pathlib import Path

from masforge import chat_model_path
from masforge.modelc import generate, load_model, pim_to_psm

model = load_model(chat_model_path())
plan = pim_to_psm(model)
print("plan digest", plan.digest()[:16])
for path in plan.paths:
    print("  ", path)

with tempfile.TemporaryDirectory() as tmp:
    out = Path(tmp) / "chat"
    print(generate(plan, out).summary())

    # %% Implement bob's Run() inside its keep region.
    stub = out / "core/agents/bob.py"
    text = stub.read_text()
    stub.write_text(text.replace('raise NotImplementedError("bob.Run")', "return self.percepts"))

    # %% Regenerating keeps the edit and reports it as a preserved region.
    report = generate(plan, out)
    print(report.summary())
    assert "return self.percepts" in stub.read_text()

    # %% Edits outside regions do not survive.
    stub.write_text(stub.read_text().replace("class bob:", "class Bob:"))
    print(generate(plan, out).summary())
    assert "class bob:" in stub.read_text()
