"""Platform-specific scaffold plans rendered from shipped template sets."""

from __future__ import annotations

import hashlib
import keyword
import re
from dataclasses import dataclass
from importlib import resources
from typing import Any, Mapping

import jinja2
from jinja2 import meta

from ..errors import ProfileError
from ..expr import format_literal
from ..metamodel import FlatClassModel, ModelSpec, flatten
from .lower import raise_model
from .printer import format_model

ROLES = {
    "agent": "agent.py.j2",
    "environment": "environment.py.j2",
    "common": "common.py.j2",
    "app": "app.py.j2",
    "manifest": "manifest.toml.j2",
    "readme": "readme.md.j2",
}
DEFAULT_PROFILE = "self"

REGION = re.compile(
    r"(?P<open>^[^\n]*// <masforge:keep (?P<name>[^>\n]+)>[^\n]*\n)"
    r"(?P<body>.*?)"
    r"(?P<close>^[^\n]*// </masforge:keep>)",
    re.M | re.S,
)


def ident(name: str) -> str:
    return f"{name}_" if keyword.iskeyword(name) else name


def pyliteral(text: str) -> str:
    return {"true": "True", "false": "False"}.get(text, text)


def doc(text: object) -> str:
    """Make ``text`` safe inside a triple-quoted docstring."""
    return str(text).replace("\\", "\\\\").replace('"""', '\\"\\"\\"')


def distname(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "-", name).strip("-").lower() or "model"


def profiles() -> list[str]:
    root = resources.files("masforge") / "templates"
    return sorted(p.name for p in root.iterdir() if p.is_dir() and not p.name.startswith(("_", ".")))


@dataclass(frozen=True)
class TemplateSet:
    """Jinja2 sources for each artifact role of one profile."""

    profile: str
    sources: Mapping[str, str]

    @classmethod
    def load(cls, profile: str = DEFAULT_PROFILE) -> "TemplateSet":
        if profile not in profiles():
            raise ProfileError(f"no template set named {profile!r} (have {', '.join(profiles())})")
        root = resources.files("masforge") / "templates" / profile
        return cls(profile, {role: (root / name).read_text(encoding="utf-8") for role, name in ROLES.items()})

    def environment(self) -> jinja2.Environment:
        env = jinja2.Environment(
            loader=jinja2.DictLoader(dict(self.sources)),
            undefined=jinja2.StrictUndefined,
            keep_trailing_newline=True,
            trim_blocks=True,
            lstrip_blocks=True,
            autoescape=False,
        )
        env.filters.update(ident=ident, pyliteral=pyliteral, distname=distname, doc=doc)
        return env

    def placeholders(self, role: str) -> set[str]:
        env = self.environment()
        return meta.find_undeclared_variables(env.parse(self.sources[role]))

    def render(self, role: str, context: Mapping[str, Any]) -> str:
        return self.environment().get_template(role).render(**context)


@dataclass(frozen=True)
class PlannedFile:
    path: str
    contents: str
    regions: tuple[str, ...] = ()


@dataclass(frozen=True)
class ScaffoldPlan:
    profile: str
    files: tuple[PlannedFile, ...]

    def __post_init__(self):
        paths = [f.path for f in self.files]
        if paths != sorted(paths) or len(set(paths)) != len(paths):
            raise ValueError("plan paths must be unique and ascending")

    @property
    def paths(self) -> list[str]:
        return [f.path for f in self.files]

    def get(self, path: str) -> PlannedFile:
        return next(f for f in self.files if f.path == path)

    def digest(self) -> str:
        h = hashlib.sha256()
        for f in self.files:
            h.update(f.path.encode() + b"\0" + f.contents.encode("utf-8") + b"\0")
        return h.hexdigest()


def region_names(text: str) -> tuple[str, ...]:
    return tuple(m.group("name") for m in REGION.finditer(text))


def _file(path: str, contents: str) -> PlannedFile:
    names = region_names(contents)
    if len(set(names)) != len(names):
        raise ValueError(f"{path}: duplicate keep regions")
    return PlannedFile(path, contents, names)


def contexts(flat: FlatClassModel, profile: str) -> dict[str, Any]:
    """Template variables shared by every role."""
    return {
        "model_name": flat.name,
        "profile": profile,
        "environment": flat.of("environment")[0],
        "agents": flat.of("agent"),
        "actions": flat.of("action"),
        "interactions": flat.of("interaction"),
    }


def pim_to_psm(
    model: ModelSpec, profile: str = DEFAULT_PROFILE, templates: TemplateSet | None = None
) -> ScaffoldPlan:
    """Render the scaffold for ``model``; a pure function of its inputs."""
    templates = templates or TemplateSet.load(profile)
    flat = flatten(model)
    shared = contexts(flat, profile)
    files = [
        _file(f"model/{model.name}.mas", format_model(raise_model(model))),
        _file("common/types.py", templates.render("common", shared)),
        _file("app/main.py", templates.render("app", shared)),
        _file("pyproject.toml", templates.render("manifest", shared)),
        _file("README.md", templates.render("readme", shared)),
    ]
    env_cls = shared["environment"]
    files.append(
        _file(
            f"core/environment/{ident(env_cls.title)}.py",
            templates.render("environment", {**shared, "cls": env_cls}),
        )
    )
    for cls in shared["agents"]:
        files.append(
            _file(f"core/agents/{ident(cls.title)}.py", templates.render("agent", {**shared, "cls": cls}))
        )
    return ScaffoldPlan(profile, tuple(sorted(files, key=lambda f: f.path)))


__all__ = [
    "DEFAULT_PROFILE", "PlannedFile", "REGION", "ScaffoldPlan", "TemplateSet",
    "pim_to_psm", "profiles", "region_names", "format_literal",
]
