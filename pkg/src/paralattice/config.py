"""Run configuration: JSON schema, matrix/number parsing.

Matrix entries may be JSON numbers or expression strings built from
numbers, ``sqrt(...)``, ``+``, ``-``, ``*``, ``/`` and parentheses, e.g.
``"1/sqrt(3)"`` or ``"-sqrt(6)/sqrt(5)"``.
"""

from __future__ import annotations

import ast
import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .errors import ConfigError

COMMANDS = ("construct", "verify", "certify", "decompose", "bounds", "emit-points")
RULES = ("auto", "rounded-dual", "rectangular", "spectral-norm", "dual-lattice", "integer", "beatty")
SERIES = ("lattice", "dual", "rounded", "vertices")

_BINOPS = {ast.Add: lambda a, b: a + b, ast.Sub: lambda a, b: a - b,
           ast.Mult: lambda a, b: a * b, ast.Div: lambda a, b: a / b}


def _eval_node(node, exact: bool):
    if isinstance(node, ast.Expression):
        return _eval_node(node.body, exact)
    if isinstance(node, ast.Constant) and type(node.value) in (int, float):
        return Fraction(node.value) if exact and isinstance(node.value, int) else node.value
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_node(node.operand, exact)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_node(node.left, exact), _eval_node(node.right, exact))
    if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id == "sqrt"
            and len(node.args) == 1 and not node.keywords):
        arg = float(_eval_node(node.args[0], exact))
        if arg < 0:
            raise ValueError("sqrt of a negative number")
        return math.sqrt(arg)
    raise ValueError(f"unsupported expression element {ast.dump(node)[:40]}")


def parse_number(value, *, exact: bool = False):
    """Evaluate a JSON number or a restricted arithmetic expression.

    With ``exact=True`` integer arithmetic without ``sqrt`` stays a
    :class:`~fractions.Fraction`.
    """
    if isinstance(value, bool):
        raise ValueError("booleans are not numbers")
    if isinstance(value, (int, float)):
        out = Fraction(value) if exact and isinstance(value, int) else value
    elif isinstance(value, str):
        try:
            tree = ast.parse(value.strip(), mode="eval")
        except SyntaxError as exc:
            raise ValueError(f"cannot parse expression {value!r}") from exc
        try:
            out = _eval_node(tree, exact)
        except ZeroDivisionError as exc:
            raise ValueError(f"division by zero in {value!r}") from exc
    else:
        raise ValueError(f"expected a number or expression string, got {type(value).__name__}")
    if isinstance(out, Fraction):
        return out
    out = float(out)
    if not math.isfinite(out):
        raise ValueError(f"{value!r} is not finite")
    return out


Number = Union[int, float, str]


def _matrix(rows) -> list[list[float]]:
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ValueError("matrix must be a non-empty list of rows")
    d = len(rows)
    if any(len(r) != d for r in rows):
        raise ValueError("matrix must be square")
    return [[float(parse_number(v)) for v in r] for r in rows]


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


class WitnessConfig(_Model):
    R: list[list[Number]]
    H: list[list[Number]]
    P: Optional[list[int]] = None
    mode: Optional[Literal["orthogonal", "riesz"]] = None  # inherits RunConfig.mode

    _mats = field_validator("R", "H", mode="before")(classmethod(lambda cls, v: _matrix(v)))


class ConstructionConfig(_Model):
    rule: Literal[RULES] = "auto"
    N: int = Field(10, ge=0)
    diagonals: Optional[list[Number]] = None
    offsets: Optional[list[Number]] = None
    alpha: Optional[Number] = None
    beta: Number = 0

    @field_validator("diagonals", "offsets", mode="before")
    @classmethod
    def _vec(cls, v):
        return None if v is None else [float(parse_number(x)) for x in v]

    @field_validator("alpha", "beta", mode="before")
    @classmethod
    def _scalar(cls, v):
        if v is None:
            return None
        parse_number(v)
        return v


class LindnerConfig(_Model):
    B: Number
    delta: Number
    L: Number
    P: int = Field(ge=1)

    _nums = field_validator("B", "delta", "L", mode="before")(
        classmethod(lambda cls, v: float(parse_number(v))))


class TransformConfig(_Model):
    op: Literal["translate-domain", "translate-frequency", "linear-map"]
    A: Optional[list[list[Number]]] = None

    _mat = field_validator("A", mode="before")(
        classmethod(lambda cls, v: None if v is None else _matrix(v)))


class SequenceConfig(_Model):
    values: list[Number]
    start: int = 0
    P: Optional[int] = Field(None, ge=1)
    sep_min: Number = 1e-9

    _vals = field_validator("values", mode="before")(
        classmethod(lambda cls, v: [float(parse_number(x)) for x in v]))
    _sep = field_validator("sep_min", mode="before")(classmethod(lambda cls, v: float(parse_number(v))))


class BoundsConfig(_Model):
    kadec: Optional[Number] = None
    tensor: Optional[list[Number]] = None
    lindner: Optional[LindnerConfig] = None
    transform: Optional[TransformConfig] = None
    sequence: Optional[SequenceConfig] = None

    _k = field_validator("kadec", mode="before")(
        classmethod(lambda cls, v: None if v is None else float(parse_number(v))))
    _t = field_validator("tensor", mode="before")(
        classmethod(lambda cls, v: None if v is None else [float(parse_number(x)) for x in v]))


class EquidistConfig(_Model):
    alpha: Number
    betas: list[Number] = [0.0]
    P: int = Field(ge=1)
    m_range: tuple[int, int] = (0, 10)
    epsilon: Number = 1e-3

    _a = field_validator("alpha", "epsilon", mode="before")(
        classmethod(lambda cls, v: float(parse_number(v))))
    _b = field_validator("betas", mode="before")(
        classmethod(lambda cls, v: [float(parse_number(x)) for x in v]))


class Tolerances(_Model):
    num: float = Field(1e-9, ge=0)
    interlace: float = Field(1e-8, ge=0)
    orthogonality: float = Field(1e-9, ge=0)
    density: float = Field(0.05, ge=0)


class RunConfig(_Model):
    command: Optional[Literal[COMMANDS]] = None
    A: Optional[list[list[Number]]] = None
    B: Optional[list[list[Number]]] = None
    mode: Literal["orthogonal", "riesz"] = "riesz"
    witness: Optional[WitnessConfig] = None
    construction: ConstructionConfig = ConstructionConfig()
    ladder_radii: Optional[list[int]] = None
    density_radii: Optional[list[float]] = None
    normalized: bool = False
    tolerances: Tolerances = Tolerances()
    bounds: Optional[BoundsConfig] = None
    equidistribution: Optional[EquidistConfig] = None
    series: list[Literal[SERIES]] = list(SERIES)

    _mats = field_validator("A", "B", mode="before")(
        classmethod(lambda cls, v: None if v is None else _matrix(v)))

    @field_validator("ladder_radii")
    @classmethod
    def _radii(cls, v):
        if v is not None and (not v or any(r < 0 for r in v) or any(b <= a for a, b in zip(v, v[1:]))):
            raise ValueError("ladder radii must be a non-empty increasing list of non-negative integers")
        return v

    @field_validator("density_radii")
    @classmethod
    def _dradii(cls, v):
        if v is not None and (not v or any(r <= 0 for r in v) or any(b <= a for a, b in zip(v, v[1:]))):
            raise ValueError("density radii must be a non-empty increasing list of positive numbers")
        return v

    @property
    def dim(self) -> int | None:
        for m in (self.A, self.B):
            if m is not None:
                return len(m)
        if self.witness is not None:
            return len(self.witness.H)
        return None

    def check_dimensions(self) -> None:
        dims = {}
        for name, m in (("A", self.A), ("B", self.B)):
            if m is not None:
                dims[name] = len(m)
        if self.witness is not None:
            dims["witness.R"] = len(self.witness.R)
            dims["witness.H"] = len(self.witness.H)
        if len(set(dims.values())) > 1:
            raise ConfigError(next(iter(dims)), f"matrices differ in dimension: {dims}")
        if self.witness is not None:
            if self.witness.mode is None:
                self.witness.mode = self.mode
            elif self.witness.mode != self.mode:
                raise ConfigError("witness.mode", f"witness mode {self.witness.mode!r} differs from run mode {self.mode!r}")


def _loc(err: dict) -> str:
    return ".".join(str(p) for p in err.get("loc", ()))


def validate_config(data: dict, command: str | None = None) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("", "configuration must be a JSON object")
    try:
        cfg = RunConfig.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        raise ConfigError(_loc(first), first.get("msg", "invalid value")) from exc
    if command is not None:
        if cfg.command is not None and cfg.command != command:
            raise ConfigError("command", f"config is for {cfg.command!r}, invoked as {command!r}")
        cfg.command = command
    if cfg.command is None:
        raise ConfigError("command", "no command given")
    cfg.check_dimensions()
    return cfg


def load_config(path: str | Path, command: str | None = None) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"invalid JSON: {exc}") from exc
    return validate_config(data, command)
