"""
Input validation models for schlafli-lab
Validates every JSON input file and the suite configuration before any numerics run
"""
import json
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Type, TypeVar

import numpy as np
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from modules.fixtures import (
    POLYHEDRON_FAMILIES, REP_PATHS, polyhedron_family, polyhedron_family_params, rep_path, strip_prefix,
)
from modules.laminations import Curve, RationalLamination, Rep, RepPath
from modules.minkowski_core import MPoint
from modules.polyhedra import ConvexPolyhedron, PolyhedronFamily, hull

Model = TypeVar("Model", bound=BaseModel)

DEFAULT_FAMILIES = [
    "builtin:rigid-tetra-v1",
    "builtin:stretch-tetra-v1",
    "builtin:breathing-tetra-v1",
    "builtin:twist-tetra-v1",
    "builtin:bipyramid-v1",
]


class InputFileError(ValueError):
    """Malformed input file, reported with its path and a JSON pointer"""

    def __init__(self, path: str, pointer: str, message: str):
        self.path = path
        self.pointer = pointer
        super().__init__(f"{path}#{pointer}: {message}")


def json_pointer(loc) -> str:
    """RFC 6901 pointer for a pydantic error location"""
    parts = [str(p).replace("~", "~0").replace("/", "~1") for p in loc]
    return "/" + "/".join(parts) if parts else ""


def read_json(path: str) -> Any:
    """
    Parse a JSON file

    Raises:
        InputFileError: unreadable file or invalid JSON
    """
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise InputFileError(path, "", f"cannot read file: {e.strerror}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InputFileError(path, "", f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}")


def load_model(path: str, model: Type[Model]) -> Model:
    """Read a JSON file and validate it against a model, raising InputFileError on failure"""
    return validate_data(read_json(path), model, path)


def validate_data(data: Any, model: Type[Model], source: str = "<input>") -> Model:
    try:
        return model.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        raise InputFileError(source, json_pointer(first["loc"]), first["msg"])


class PointModel(BaseModel):
    """Point of H^3 given either on the hyperboloid or in the Klein ball"""

    model_config = {"extra": "forbid"}

    mink: Optional[List[float]] = Field(None, min_length=4, max_length=4, description="Hyperboloid coordinates")
    klein: Optional[List[float]] = Field(None, min_length=3, max_length=3, description="Klein ball coordinates")

    @model_validator(mode="after")
    def exactly_one_chart(self):
        if (self.mink is None) == (self.klein is None):
            raise ValueError("give exactly one of 'mink' or 'klein'")
        if self.klein is not None and sum(y * y for y in self.klein) >= 1.0:
            raise ValueError("Klein point must lie inside the unit ball")
        return self

    def to_point(self) -> MPoint:
        if self.klein is not None:
            return MPoint.from_klein(self.klein)
        return MPoint(np.array(self.mink))


class PolyhedronInputModel(BaseModel):
    """Compact convex polyhedron as the hull of vertices"""

    model_config = {"extra": "forbid"}

    vertices: List[PointModel] = Field(..., min_length=4, description="Points whose convex hull is the polyhedron")
    tol: float = Field(default=1e-10, gt=0, le=1e-4, description="Coplanarity tolerance of the hull")

    def to_polyhedron(self) -> ConvexPolyhedron:
        return hull([p.to_point() for p in self.vertices], tol=self.tol)


class SampleModel(BaseModel):
    """Vertices of a sampled family at one time"""

    model_config = {"extra": "forbid"}

    t: float
    vertices: List[PointModel] = Field(..., min_length=4)


class FamilyInputModel(BaseModel):
    """Polyhedron family: a versioned built-in with optional parameters, or dense time samples of the vertices"""

    model_config = {"extra": "forbid"}

    kind: Optional[str] = Field(None, description="'builtin:<name>' or 'samples'; may be omitted with samples")
    params: Dict[str, float] = Field(default_factory=dict, description="Parameters of a built-in family")
    name: Optional[str] = Field(None, max_length=100, description="Name of a sampled family")
    samples: Optional[List[SampleModel]] = Field(None, description="Vertex lists with strictly increasing times")
    degree: int = Field(default=4, ge=2, le=8, description="Local interpolation degree")

    @field_validator("kind")
    @classmethod
    def validate_kind(cls, v: Optional[str]) -> Optional[str]:
        if v is None or v == "samples":
            return v
        if not v.startswith("builtin:"):
            raise ValueError("kind must be 'samples' or 'builtin:<name>'")
        if strip_prefix(v) not in POLYHEDRON_FAMILIES:
            raise ValueError(f"unknown built-in family {v!r}")
        return v

    @property
    def sampled(self) -> bool:
        return self.kind in (None, "samples")

    @model_validator(mode="after")
    def consistent_source(self):
        if not self.sampled:
            if self.samples is not None:
                raise ValueError("built-in families take no 'samples'")
            unknown = sorted(set(self.params) - set(polyhedron_family_params(self.kind)))
            if unknown:
                raise ValueError(f"{self.kind} does not accept parameters {unknown}")
            return self
        if not self.samples:
            raise ValueError("give 'kind' as 'builtin:<name>' or a non-empty 'samples' list")
        if self.params:
            raise ValueError("sampled families take no 'params'")
        times = [s.t for s in self.samples]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("sample times must be strictly increasing")
        if len({len(s.vertices) for s in self.samples}) != 1:
            raise ValueError("every sample must list the same number of vertices")
        if len(self.samples) < self.degree + 1:
            raise ValueError(f"degree {self.degree} interpolation needs at least {self.degree + 1} samples")
        return self

    def to_family(self) -> PolyhedronFamily:
        if self.sampled:
            times = [s.t for s in self.samples]
            arrays = [np.array([p.to_point().x for p in s.vertices]) for s in self.samples]
            return PolyhedronFamily.from_samples(self.name or "samples", times, arrays, self.degree)
        return polyhedron_family(self.kind, **self.params)


class SmoothFamilyModel(BaseModel):
    """Closed-form model family moving by normal flow"""

    model_config = {"extra": "forbid"}

    kind: Literal["geodesic_sphere", "plane_tube", "line_tube"]
    start: float = Field(..., gt=0, description="Radius or eps at t = 0")
    speed: float = Field(default=1.0, ge=0, description="Normal speed")
    width: float = Field(default=1.0, gt=0)
    half_height: float = Field(default=0.5, gt=0)
    length: float = Field(default=1.0, gt=0)
    theta0: float = Field(default=2.0 * math.pi, gt=0, le=2.0 * math.pi)


def _complex_matrix(entries: List[List[float]]) -> np.ndarray:
    return np.array([complex(re, im) for re, im in entries]).reshape(2, 2)


class RepModel(BaseModel):
    """Generators as four [re, im] pairs in row-major order"""

    model_config = {"extra": "forbid"}

    generators: List[List[List[float]]] = Field(..., min_length=1)

    @field_validator("generators")
    @classmethod
    def validate_shape(cls, v):
        for k, g in enumerate(v):
            if len(g) != 4 or any(len(entry) != 2 for entry in g):
                raise ValueError(f"generator {k} must be four [re, im] pairs")
        return v

    def to_rep(self) -> Rep:
        return Rep(tuple(_complex_matrix(g) for g in self.generators))


class CurveModel(BaseModel):
    model_config = {"extra": "forbid"}

    word: str = Field(..., min_length=1, max_length=200)
    weight: float = Field(..., gt=0)


class LaminationModel(BaseModel):
    """Rational measured lamination: weighted cyclically reduced words"""

    model_config = {"extra": "forbid"}

    curves: List[CurveModel] = Field(..., min_length=1)

    def to_lamination(self) -> RationalLamination:
        return RationalLamination(tuple(Curve(c.word, c.weight) for c in self.curves))


class RepPathModel(BaseModel):
    model_config = {"extra": "forbid"}

    kind: str = Field(..., description="'builtin:<name>'")
    params: Dict[str, float] = Field(default_factory=dict)

    @field_validator("kind")
    @classmethod
    def validate_kind(cls, v: str) -> str:
        if not v.startswith("builtin:"):
            raise ValueError("representation paths are built-in only: 'builtin:<name>'")
        if strip_prefix(v) not in REP_PATHS:
            raise ValueError(f"unknown built-in representation path {v!r}")
        return v

    def to_path(self) -> RepPath:
        try:
            return rep_path(self.kind, **self.params)
        except TypeError:
            raise ValueError(f"{self.kind} does not accept parameters {sorted(self.params)}")


class PathLaminationModel(BaseModel):
    model_config = {"extra": "forbid"}

    path: RepPathModel
    lamination: LaminationModel


class CheckInputModel(BaseModel):
    """Input of the single-check command; which fields are needed depends on the check"""

    model_config = {"extra": "forbid"}

    family: Optional[FamilyInputModel] = None
    smooth: Optional[SmoothFamilyModel] = None
    inner: Optional[PolyhedronInputModel] = None
    outer: Optional[PolyhedronInputModel] = None
    polyhedron: Optional[PolyhedronInputModel] = None
    delta: float = Field(default=1e-3, ge=0, le=0.05, description="Perturbation size for continuity checks")
    samples: int = Field(default=8, ge=1, le=1000)
    mode: Literal["random", "isometry"] = "random"


class SuiteInputModel(BaseModel):
    """User-supplied inputs appended to the built-in fixtures of the suites"""

    model_config = {"extra": "forbid"}

    families: List[FamilyInputModel] = Field(default_factory=list)
    polyhedra: List[PolyhedronInputModel] = Field(default_factory=list)
    paths: List[PathLaminationModel] = Field(default_factory=list)


class SuiteConfigModel(BaseModel):
    """Effective suite configuration, echoed into every report"""

    model_config = {"extra": "forbid"}

    seed: int = Field(default=0, description="Seed of every randomized check")
    threads: int = Field(default=1, ge=1, le=256)
    quadrature_tol: float = Field(default=1e-10, ge=1e-12, le=1e-4)
    fd_step: float = Field(default=1e-4, gt=0, le=5e-2)
    t_grid: List[float] = Field(default_factory=lambda: [-0.1, -0.05, 0.0, 0.05, 0.1], min_length=1)
    eps_grid: List[float] = Field(default_factory=lambda: [0.05, 0.1, 0.25, 0.5, 0.75, 1.0], min_length=1)
    margin_eps: float = Field(default=0.5, gt=0, le=2.0)
    margin_times: List[float] = Field(default_factory=lambda: [-0.02, -0.01, -0.005, 0.005, 0.01, 0.02], min_length=1)
    monotonic_pairs: int = Field(default=100, ge=0, le=10000)
    smooth_radii: List[float] = Field(default_factory=lambda: [0.1, 0.3, 0.5, 0.7, 0.9, 1.1, 1.3, 1.5])
    families: List[str] = Field(default_factory=lambda: list(DEFAULT_FAMILIES))

    @field_validator("t_grid")
    @classmethod
    def validate_t_grid(cls, v):
        if any(abs(t) > 0.2 for t in v):
            raise ValueError("family parameters must satisfy |t| <= 0.2")
        return v

    @field_validator("eps_grid")
    @classmethod
    def validate_eps_grid(cls, v):
        if any(e < 0 or e > 2.0 for e in v):
            raise ValueError("eps values must lie in [0, 2]")
        return v

    @field_validator("margin_times")
    @classmethod
    def validate_margin_times(cls, v):
        if any(t == 0 or abs(t) > 0.1 for t in v):
            raise ValueError("margin times must be nonzero with |t| <= 0.1")
        return v

    @field_validator("smooth_radii")
    @classmethod
    def validate_radii(cls, v):
        if any(r <= 0.01 or r > 3.0 for r in v):
            raise ValueError("smooth radii must lie in (0.01, 3]")
        return v

    @field_validator("families")
    @classmethod
    def validate_families(cls, v):
        for name in v:
            if not name.startswith("builtin:"):
                raise ValueError(f"suite families are built-in names, got {name!r}")
            if strip_prefix(name) not in POLYHEDRON_FAMILIES:
                raise ValueError(f"unknown built-in family {name!r}")
        return v
