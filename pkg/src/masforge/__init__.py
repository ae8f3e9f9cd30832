"""masforge: multi-agent system models, from source text to running simulations and code scaffolds.

The layers, bottom up:

- :mod:`masforge.metamodel`: agent kinds, model types, validation, flattening.
- :mod:`masforge.environment`: environment state, percepts, actions, traces.
- :mod:`masforge.cognition`: decide pipelines of the cognitive agent family.
- :mod:`masforge.agents`: agent lifecycle, message bus, dependency analysis.
- :mod:`masforge.modelc`: ``.mas`` parser, printer, scaffold planner and generator.
- :mod:`masforge.chatapp`: the three-chatter application.
- :mod:`masforge.cli`: the ``masforge`` command.
"""

from pathlib import Path

__version__ = "0.1.0"


def models_dir() -> Path:
    """Directory of the example models shipped with the package."""
    return Path(__file__).parent / "models"


def chat_model_path() -> Path:
    return models_dir() / "chat.mas"


__all__ = ["__version__", "chat_model_path", "models_dir"]
