"""
JSON curve and pattern files.
Coefficient arrays are ascending; floats are written with repr precision so
a read after a write reproduces every coefficient exactly.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, ValidationError, field_validator

from knotforge.errors import InputError
from knotforge.services.curve import Parameterization
from knotforge.services.diagram import Constraint, SignPattern
from knotforge.services.ratfunc import RationalFunction

logger = logging.getLogger("knotforge.files")


class CoordinateModel(BaseModel):
    num: List[float] = Field(..., min_length=1, description="Numerator coefficients, ascending powers")
    den: List[float] = Field(..., min_length=1, description="Denominator coefficients, ascending powers")

    @field_validator("den")
    @classmethod
    def den_not_zero(cls, value: List[float]) -> List[float]:
        if all(c == 0 for c in value):
            raise ValueError("denominator is identically zero")
        return value

    def to_rational(self) -> RationalFunction:
        return RationalFunction.from_coeffs(self.num, self.den)

    @classmethod
    def from_rational(cls, rf: RationalFunction) -> "CoordinateModel":
        return cls(num=list(rf.num.coeffs), den=list(rf.den.coeffs))


class CurveFile(BaseModel):
    name: str = Field("curve", description="Curve name")
    x: CoordinateModel
    y: CoordinateModel
    z: Optional[CoordinateModel] = None
    meta: Dict[str, Any] = Field(default_factory=dict, description="Source, seed and tolerances")

    def to_parameterization(self) -> Parameterization:
        z = self.z.to_rational() if self.z is not None else None
        return Parameterization(self.x.to_rational(), self.y.to_rational(), z, self.name)

    @classmethod
    def from_parameterization(cls, p: Parameterization, meta: Optional[Dict[str, Any]] = None) -> "CurveFile":
        return cls(
            name=p.name,
            x=CoordinateModel.from_rational(p.x),
            y=CoordinateModel.from_rational(p.y),
            z=CoordinateModel.from_rational(p.z) if p.z is not None else None,
            meta=meta or {},
        )


class ConstraintModel(BaseModel):
    i: int = Field(..., ge=1, description="Earlier parameter index (1-based)")
    j: int = Field(..., ge=1, description="Later parameter index (1-based)")
    rel: str = Field(..., pattern=r"^[<>]$", description="'>' if the strand at t_i passes over")


class PatternFile(BaseModel):
    constraints: List[ConstraintModel] = Field(default_factory=list)

    def to_pattern(self) -> SignPattern:
        return SignPattern(tuple(Constraint(c.i, c.j, c.rel) for c in self.constraints))

    @classmethod
    def from_pattern(cls, pattern: SignPattern) -> "PatternFile":
        return cls(constraints=[ConstraintModel(i=c.i, j=c.j, rel=c.rel) for c in pattern.constraints])


def dumps_curve(p: Parameterization, meta: Optional[Dict[str, Any]] = None) -> str:
    return json.dumps(CurveFile.from_parameterization(p, meta).model_dump(exclude_none=True), indent=2) + "\n"


def loads_curve(text: str) -> Parameterization:
    try:
        return CurveFile.model_validate_json(text).to_parameterization()
    except ValidationError as e:
        raise InputError(f"invalid curve file: {e}") from e


def read_curve(path: str) -> Parameterization:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise InputError(f"cannot read curve file {path}: {e}") from e
    return loads_curve(text)


def write_curve(path: str, p: Parameterization, meta: Optional[Dict[str, Any]] = None) -> None:
    Path(path).write_text(dumps_curve(p, meta))
    logger.info(f"✓ Wrote {p.name} to {path}")


def loads_pattern(text: str) -> SignPattern:
    try:
        return PatternFile.model_validate_json(text).to_pattern()
    except ValidationError as e:
        raise InputError(f"invalid pattern file: {e}") from e


def read_pattern(path: str) -> SignPattern:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise InputError(f"cannot read pattern file {path}: {e}") from e
    return loads_pattern(text)


def dumps_pattern(pattern: SignPattern) -> str:
    return json.dumps(PatternFile.from_pattern(pattern).model_dump(), indent=2) + "\n"
