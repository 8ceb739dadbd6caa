"""Job documents: pydantic models for the JSON input and their conversion to domain objects."""

from __future__ import annotations

from typing import Annotated, Any, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from . import models
from .errors import SchemaError

SCHEMA_VERSION = "1.0"

COMMANDS = ("charge", "flow", "eta", "forms", "validate", "reference", "suite")
Command = Literal["charge", "flow", "eta", "forms", "validate", "reference", "suite"]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class WindowSpec(_Strict):
    t1: float
    t2: float


class PlateauSpec(_Strict):
    kind: Literal["plateau"] = "plateau"
    v_start: float
    v_end: float
    ramp_fraction: float = Field(0.1, gt=0.0, lt=0.5)

    def build(self, window: models.TimeWindow) -> models.Profile:
        return models.PlateauProfile(self.v_start, self.v_end, window, self.ramp_fraction)


class SampledSpec(_Strict):
    kind: Literal["sampled"]
    values: list[float] = Field(min_length=2)
    end_fraction: float = Field(0.1, gt=0.0, lt=0.5)

    def build(self, window):
        return models.SampledProfile(tuple(self.values), window, self.end_fraction)


class AffineSpec(_Strict):
    kind: Literal["affine"]
    v_start: float
    slope: float
    end_fraction: float = Field(0.1, gt=0.0, lt=0.5)

    def build(self, window):
        return models.AffineProfile(self.v_start, self.slope, window, self.end_fraction)


ProfileSpec = Annotated[Union[PlateauSpec, SampledSpec, AffineSpec], Field(discriminator="kind")]


class CylinderSpec(_Strict):
    type: Literal["cylinder"]
    L: float = Field(gt=0.0)
    spin: Literal["trivial", "nontrivial"] = "trivial"
    gauge: ProfileSpec
    window: WindowSpec

    def build(self):
        w = models.TimeWindow(self.window.t1, self.window.t2)
        return models.Cylinder(self.L, models.CircleSpin(self.spin), self.gauge.build(w), w)


class BianchiISpec(_Strict):
    type: Literal["bianchi_i"]
    a1: ProfileSpec
    a2: ProfileSpec
    a3: ProfileSpec
    spin: int = Field(0, ge=0, le=7)
    window: WindowSpec

    def build(self):
        w = models.TimeWindow(self.window.t1, self.window.t2)
        return models.BianchiI(self.a1.build(w), self.a2.build(w), self.a3.build(w), self.spin, w)


class BianchiIISpec(_Strict):
    type: Literal["bianchi_ii"]
    a: ProfileSpec
    b: ProfileSpec
    spin: int = Field(0, ge=0, le=3)
    window: WindowSpec
    N1: Optional[int] = None
    N2: Optional[int] = None

    def build(self):
        w = models.TimeWindow(self.window.t1, self.window.t2)
        return models.BianchiII(self.a.build(w), self.b.build(w), self.spin, w, self.N1, self.N2)


class SphereSpec(_Strict):
    type: Literal["sphere_reference"]
    k: int = Field(ge=1)

    def build(self):
        return models.SphereReference(self.k)


ModelSpec = Annotated[
    Union[CylinderSpec, BianchiISpec, BianchiIISpec, SphereSpec], Field(discriminator="type")
]


class Tolerances(_Strict):
    quadrature: float = Field(1e-9, gt=0.0)
    eta_oracle: float = Field(1e-6, gt=0.0)


class OutputSpec(_Strict):
    report_path: Optional[str] = None
    csv_path: Optional[str] = None


class SuiteSpec(_Strict):
    cylinder_cases: int = Field(500, ge=1)
    hurwitz_cases: int = Field(1000, ge=1)
    eta_oracle_cases: int = Field(100, ge=1)
    symmetry_cases: int = Field(50, ge=1)
    bianchi_points: int = Field(20, ge=1)


class JobSpec(_Strict):
    schema_version: Literal["1.0"] = SCHEMA_VERSION
    command: Optional[Command] = None
    model: Optional[ModelSpec] = None
    tolerances: Tolerances = Tolerances()
    output: OutputSpec = OutputSpec()
    seed: int = Field(0, ge=0, lt=2**64)
    samples: int = Field(257, ge=2)
    suite: SuiteSpec = SuiteSpec()


def json_pointer(doc: Any, loc: tuple) -> str:
    """Map a pydantic error location onto the raw document.

    Discriminated unions insert the tag into ``loc``; those entries are not
    keys of the document and are skipped.
    """
    parts = []
    node = doc
    for i, item in enumerate(loc):
        if isinstance(node, dict) and item in node:
            node = node[item]
        elif isinstance(node, list) and isinstance(item, int) and 0 <= item < len(node):
            node = node[item]
        elif i < len(loc) - 1:
            continue
        else:
            node = None
        parts.append(str(item).replace("~", "~0").replace("/", "~1"))
    return "/" + "/".join(parts)


def parse_job(doc: Any) -> JobSpec:
    try:
        return JobSpec.model_validate(doc)
    except ValidationError as exc:
        err = exc.errors()[0]
        raise SchemaError(err["msg"], json_pointer(doc, tuple(err["loc"]))) from None


def dump_job(job: JobSpec) -> dict:
    return job.model_dump(mode="json")


def job_schema() -> dict:
    schema = JobSpec.model_json_schema()
    schema["$id"] = f"anomaly-forge/jobspec-{SCHEMA_VERSION}"
    return schema
