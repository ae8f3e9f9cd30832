"""Model compiler: parse, lower, validate, plan and generate."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from ..metamodel import Diagnostic, ModelSpec, validate_model
from .ast import ModelAst
from .generate import WriteReport, generate, merge
from .lower import lower, raise_model
from .parser import SourceText, parse, tokenize
from .plan import DEFAULT_PROFILE, ScaffoldPlan, TemplateSet, pim_to_psm
from .printer import format_model


@dataclass
class Compilation:
    """Outcome of parse + lower + validate on one source."""

    source: SourceText
    ast: ModelAst
    model: ModelSpec | None
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.model is not None and not any(d.severity == "error" for d in self.diagnostics)


def compile_source(source: SourceText | str, path: str = "<string>") -> Compilation:
    if isinstance(source, str):
        source = SourceText(path, source)
    tree, diags = parse(source)
    if any(d.severity == "error" for d in diags):
        return Compilation(source, tree, None, diags)
    model, lower_diags = lower(tree, source.path)
    diags = diags + lower_diags
    diags += list(validate_model(model).diagnostics)
    return Compilation(source, tree, model, diags)


def compile_file(path: str | Path) -> Compilation:
    return compile_source(SourceText.from_file(path))


def load_model(path: str | Path) -> ModelSpec:
    """Compile ``path`` and return its model, raising if it has errors."""
    from ..errors import ModelError

    result = compile_file(path)
    if not result.ok:
        errors = [str(d) for d in result.diagnostics if d.severity == "error"]
        raise ModelError(f"{path}: " + "; ".join(errors))
    return result.model


__all__ = [
    "DEFAULT_PROFILE",
    "Compilation",
    "ScaffoldPlan",
    "TemplateSet",
    "WriteReport",
    "generate",
    "merge",
    "pim_to_psm",
    "raise_model",
    "SourceText",
    "compile_file",
    "compile_source",
    "format_model",
    "load_model",
    "lower",
    "parse",
    "tokenize",
]
