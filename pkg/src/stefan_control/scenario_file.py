"""
JSON scenario files.

A file is parsed in two stages: the schema below checks structure and types
(unknown keys are rejected), then :meth:`ScenarioFile.build` constructs the
domain objects, whose own invariants apply.  Every failure is reported as a
:class:`ScenarioError` naming the file position or the dotted field path.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

from pydantic import (
    BaseModel, ConfigDict, Discriminator, Field, Tag, ValidationError, field_validator, model_validator,
)

from .controllers import ControlLaw, ObserverInit
from .domain import PRESETS, Perturbation, derive_params
from .errors import ScenarioError, StefanError
from .simulator import ObserverConfig, Scenario, SimConfig, linear_scenario

DEFAULT_T_CAP = 100_000.0


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class MaterialSpec(_Section):
    rho: float
    cp: float
    k: float
    dh: float
    tm: float


class PerturbationSpec(_Section):
    eps1: float = 0.0
    eps2: float = 0.0


class InitialSpec(_Section):
    s0: float
    H: float


class PulseSpec(_Section):
    level: Optional[float] = None
    duration: Optional[float] = None


class _Missing(ValueError):
    """A field required only for some controller kinds; reported under its own path."""

    def __init__(self, name: str, reason: str):
        super().__init__(f"required field missing ({reason})")
        self.name = name


class ControllerSpec(_Section):
    kind: Literal["pulse", "state-feedback", "output-feedback", "constant"]
    actuation: Literal["neumann", "dirichlet"] = "neumann"
    c: Optional[float] = None
    s_r: Optional[float] = None
    pulse: Optional[PulseSpec] = None
    level: Optional[float] = None

    @model_validator(mode="after")
    def _required_per_kind(self):
        if self.kind != "constant" and self.s_r is None:
            raise _Missing("s_r", f"kind '{self.kind}'")
        if self.kind in ("state-feedback", "output-feedback") and self.c is None:
            raise _Missing("c", f"kind '{self.kind}'")
        if self.kind == "pulse" and self.pulse is None:
            raise _Missing("pulse", "kind 'pulse' needs level or duration")
        if self.kind == "constant" and self.level is None:
            raise _Missing("level", "kind 'constant'")
        return self


class ObserverSpec(_Section):
    enabled: bool = True
    lam: float = Field(alias="lambda")
    h_hat: float
    h_l: Optional[float] = None
    h_u: Optional[float] = None


class SimSpec(_Section):
    n: int = 200
    cfl_fraction: Optional[float] = None
    dt: Optional[float] = None
    t_end: Optional[float] = None
    convergence_tol: Optional[float] = None
    integrator: Literal["euler", "rk2"] = "euler"

    @model_validator(mode="after")
    def _policies(self):
        if self.cfl_fraction is not None and self.dt is not None:
            raise ValueError("give either 'cfl_fraction' or 'dt', not both")
        if self.t_end is None and self.convergence_tol is None:
            raise ValueError("give 't_end', 'convergence_tol' or both")
        return self


class OutputSpec(_Section):
    csv: Optional[str] = None
    svg: Optional[str] = None
    sample_every: float = 10.0


def _material_tag(value) -> str:
    return "preset" if isinstance(value, str) else "explicit"


Material = Annotated[
    Union[Annotated[str, Tag("preset")], Annotated[MaterialSpec, Tag("explicit")]],
    Discriminator(_material_tag),
]
_TAGS = {"preset", "explicit"}


class ScenarioFile(_Section):
    """Top-level schema; ``description`` is free text for annotating examples."""

    name: str = "scenario"
    description: Optional[str] = None
    material: Material = "zinc"
    perturbation: PerturbationSpec = PerturbationSpec()
    initial: InitialSpec
    controller: ControllerSpec
    observer: Optional[ObserverSpec] = None
    sim: SimSpec
    output: OutputSpec = OutputSpec()
    strict: bool = False

    @field_validator("material")
    @classmethod
    def _known_preset(cls, v):
        if isinstance(v, str) and v not in PRESETS:
            raise ValueError(f"unknown preset {v!r} (known: {', '.join(sorted(PRESETS))})")
        return v

    def build(self, strict: bool | None = None) -> Scenario:
        with _field("material"):
            params = (PRESETS[self.material] if isinstance(self.material, str)
                      else derive_params(**self.material.model_dump()))
        with _field("perturbation"):
            pert = Perturbation(self.perturbation.eps1, self.perturbation.eps2)
        c = self.controller
        with _field("controller"):
            law = ControlLaw(
                kind=c.kind, actuation=c.actuation, c=c.c, s_r=c.s_r,
                level=c.pulse.level if c.pulse else c.level,
                duration=c.pulse.duration if c.pulse else None,
            )
        observer = None
        if self.observer is not None and self.observer.enabled:
            o = self.observer
            with _field("observer"):
                observer = ObserverConfig(o.lam, ObserverInit(o.h_hat, o.h_l, o.h_u))
        s = self.sim
        with _field("sim"):
            sim = SimConfig(
                t_end=s.t_end if s.t_end is not None else DEFAULT_T_CAP,
                n=s.n, cfl_fraction=s.cfl_fraction if s.cfl_fraction is not None else 0.4,
                dt=s.dt, sample_every=self.output.sample_every, integrator=s.integrator,
                convergence_tol=s.convergence_tol,
            )
        with _field("initial"):
            return linear_scenario(
                params, law, sim, s0=self.initial.s0, H=self.initial.H, perturbation=pert,
                observer=observer, name=self.name,
                strict=self.strict if strict is None else strict,
            )


class _field:
    """Re-raise domain invariant errors with the section they came from."""

    def __init__(self, path: str):
        self.path = path

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and isinstance(exc, (StefanError, ValueError)) and not isinstance(exc, ScenarioError):
            raise ScenarioError(str(exc), path=self.path) from exc
        return False


def _format_loc(loc) -> str:
    return ".".join(str(part) for part in loc if part not in _TAGS)


def _validate(text: str, source: str) -> ScenarioFile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{source}:{exc.lineno}:{exc.colno}: invalid JSON ({exc.msg})",
                            line=exc.lineno) from exc
    try:
        return ScenarioFile.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        path = _format_loc(first["loc"]) or "<root>"
        msg = first["msg"]
        if first["type"] == "extra_forbidden":
            msg = "unknown key"
        elif first["type"] == "missing":
            msg = "required field missing"
        elif first["type"] == "value_error":
            err = first["ctx"]["error"]
            msg = str(err)
            if isinstance(err, _Missing):
                path = f"{path}.{err.name}" if path != "<root>" else err.name
        raise ScenarioError(f"{source}: field '{path}': {msg}", path=path) from exc


def _build(spec: ScenarioFile, source: str, strict: bool | None) -> Scenario:
    try:
        return spec.build(strict)
    except ScenarioError as exc:
        raise ScenarioError(f"{source}: field '{exc.path}': {exc}", path=exc.path) from exc


def parse_scenario_text(text: str, source: str = "<string>", strict: bool | None = None) -> Scenario:
    return _build(_validate(text, source), source, strict)


def load_scenario(path, strict: bool | None = None) -> tuple[Scenario, OutputSpec]:
    """Read and validate a scenario file; returns the scenario and its ``output`` section."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"{path}: cannot read scenario ({exc.strerror})") from exc
    spec = _validate(text, str(path))
    return _build(spec, str(path), strict), spec.output


def parse_scenario(path, strict: bool | None = None) -> Scenario:
    """Read and validate a scenario file; see the README for the schema."""
    return load_scenario(path, strict)[0]
