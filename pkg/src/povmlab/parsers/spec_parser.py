from typing import Any, Dict, List, Optional, Tuple
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..models.kernels import (
    KernelError, KernelWeight, MarkovKernel, binomial_kernel, convolution_kernel,
    gaussian_kernel, point_kernel,
)
from ..models.reports import ProbeMode
from ..models.sets import (
    CircleSet, LineSet, MeasurableSet, NatSet, ReferenceMeasure, SetError, SetKind,
    growing_family, random_family, shrinking_family,
)
from ..utils.numeric_utils import TWO_PI
from .set_parser import SetParseError, parse_number, parse_set

SHRINKING_KINDS = ("nested-interval", "nested-point", "escaping-halfline", "shrinking-arc", "nat-tail")
GROWING_KINDS = ("growing-interval", "growing-arc", "nat-head")
RANDOM_KINDS = {
    "random-intervals": "intervals",
    "random-arcs": "arcs",
    "random-nat": "nat",
    "random-points": "points",
    "random-circle-points": "circle-points",
}
DEFAULT_FAMILY_SIZE = 20


class SpecParseError(Exception):
    """Exception raised for malformed spec strings."""
    def __init__(self, message: str, spec: Optional[str] = None):
        self.message = message
        self.spec = spec
        super().__init__(self._format_message())

    def _format_message(self) -> str:
        """Format the error message with the offending spec string."""
        if self.spec is not None:
            return f"Spec '{self.spec}': {self.message}"
        return self.message


class SpecTerm(BaseModel):
    """A spec string split into its name, key=value parameters and bare arguments."""
    name: str
    params: Dict[str, str] = Field(default_factory=dict)
    args: List[str] = Field(default_factory=list)

    def number(self, key: str, default: Optional[float] = None) -> float:
        if key not in self.params:
            if default is None:
                raise ValueError(f"missing parameter '{key}'")
            return default
        return parse_number(self.params[key])

    def integer(self, key: str, default: Optional[int] = None) -> int:
        value = self.number(key, None if default is None else float(default))
        if value != int(value):
            raise ValueError(f"parameter '{key}' must be an integer")
        return int(value)


class FamilySpec(BaseModel):
    """A parsed set family ready for a probe."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    description: str
    kind: str
    members: List[Any]
    mode: ProbeMode = ProbeMode.FROM_ABOVE
    limit: Optional[Any] = None


class StateSpec(BaseModel):
    """A parsed state description, resolved against an observable's dimension."""
    kind: str = Field(..., description="basis, uniform, random or position")
    index: Optional[int] = None
    x: Optional[float] = None
    seed: Optional[int] = None


def split_spec(text: str) -> SpecTerm:
    """Split 'name:key=value,key=value,arg' into a SpecTerm.

    Raises:
        SpecParseError: If the text is empty or a parameter is repeated
    """
    if text is None or not text.strip():
        raise SpecParseError("spec string is empty", text)
    name, _, rest = text.strip().partition(":")
    term = SpecTerm(name=name.strip().lower())
    for token in filter(None, (t.strip() for t in rest.split(","))):
        if "=" in token:
            key, value = (part.strip() for part in token.split("=", 1))
            if key in term.params:
                raise SpecParseError(f"parameter '{key}' given twice", text)
            term.params[key] = value
        else:
            term.args.append(token)
    return term


class SpecParser:
    """Parser for kernel, measure, family, partition and state spec strings."""

    def parse_kernel(self, text: str) -> MarkovKernel:
        """Parse 'gaussian:l=1.0', 'binomial:eps=0.5', 'conv:default', 'conv:uniform' or 'point'.

        Raises:
            SpecParseError: Unknown kernel or invalid parameters
        """
        term = split_spec(text)
        try:
            if term.name == "gaussian":
                return gaussian_kernel(term.number("l", 1.0))
            if term.name == "binomial":
                return binomial_kernel(term.number("eps"))
            if term.name == "conv":
                weight = (term.args or [term.params.get("weight", "default")])[0]
                if weight == "default":
                    return convolution_kernel(KernelWeight.default())
                if weight == "uniform":
                    return convolution_kernel(KernelWeight.uniform())
                raise SpecParseError(f"unknown convolution weight '{weight}'", text)
            if term.name == "point":
                return point_kernel(SetKind(term.params.get("domain", "line")))
        except (KernelError, ValueError) as e:
            raise SpecParseError(str(e), text)
        raise SpecParseError(f"unknown kernel '{term.name}'", text)

    def parse_measure(self, text: str, kind: SetKind = SetKind.LINE) -> ReferenceMeasure:
        """Parse 'lebesgue', 'lebesgue-line', 'lebesgue-circle', 'counting' or 'weighted:M=1.5,window=-1:1'.

        Plain 'lebesgue' picks the line or circle measure from ``kind``.
        """
        term = split_spec(text)
        try:
            if term.name == "lebesgue":
                if SetKind(kind) == SetKind.CIRCLE:
                    return ReferenceMeasure.lebesgue_circle()
                return ReferenceMeasure.lebesgue_line()
            if term.name == "lebesgue-line":
                return ReferenceMeasure.lebesgue_line()
            if term.name == "lebesgue-circle":
                return ReferenceMeasure.lebesgue_circle()
            if term.name == "counting":
                return ReferenceMeasure.counting()
            if term.name == "weighted":
                lower, upper = self._window(term.params.get("window", "-1:1"))
                return ReferenceMeasure.weighted_restricted(term.number("M", 1.5), lower, upper)
        except ValueError as e:
            raise SpecParseError(str(e), text)
        raise SpecParseError(f"unknown measure '{term.name}'", text)

    def _window(self, text: str) -> Tuple[float, float]:
        lower, sep, upper = text.partition(":")
        if not sep:
            raise ValueError(f"window must look like 'u:v', got '{text}'")
        return parse_number(lower), parse_number(upper)

    def parse_sets(self, text: str, kind: SetKind) -> List[MeasurableSet]:
        """Parse a ';'-separated list of set texts."""
        try:
            return [parse_set(part, kind) for part in text.split(";") if part.strip()]
        except SetParseError as e:
            raise SpecParseError(str(e), text)

    def parse_family(self, text: str, kind: SetKind = SetKind.LINE, seed: Optional[int] = None) -> FamilySpec:
        """Parse a family spec.

        Forms: '<shrinking kind>:count=50,...', '<growing kind>:count=20,...',
        'random-intervals:count=200,seed=7,...' and 'sets:A;B;C'.

        Raises:
            SpecParseError: Unknown kind or invalid parameters
        """
        if text.strip().startswith("sets:"):
            members = self.parse_sets(text.strip()[5:], kind)
            if not members:
                raise SpecParseError("explicit family is empty", text)
            return FamilySpec(description=text.strip(), kind="sets", members=members)
        term = split_spec(text)
        try:
            count = term.integer("count", DEFAULT_FAMILY_SIZE)
            params = {k: parse_number(v) for k, v in term.params.items() if k not in ("count", "seed")}
            if term.name in SHRINKING_KINDS:
                members = shrinking_family(term.name, count, **params)
                return FamilySpec(description=text.strip(), kind=term.name, members=members)
            if term.name in GROWING_KINDS:
                members, limit = growing_family(term.name, count, **params)
                return FamilySpec(description=text.strip(), kind=term.name, members=members,
                                  mode=ProbeMode.FROM_BELOW, limit=limit)
            if term.name in RANDOM_KINDS:
                family_seed = term.integer("seed", seed) if ("seed" in term.params or seed is not None) else None
                members = random_family(RANDOM_KINDS[term.name], count, family_seed, **params)
                return FamilySpec(description=text.strip(), kind=term.name, members=members)
        except (SetError, ValueError) as e:
            raise SpecParseError(str(e), text)
        raise SpecParseError(f"unknown family kind '{term.name}'", text)

    def parse_partition(self, text: str, kind: SetKind = SetKind.LINE) -> List[MeasurableSet]:
        """Parse a partition spec into disjoint cells.

        Forms:
            grid:lower=-3,upper=3,cells=8   (−∞, lower), equal cells, [upper, ∞)
            arcs:cells=8,start=0            equal arcs of the circle
            nat:cells=10                    {0}, ..., {9} and co{0..9}
            sets:A;B;C                      explicit cells

        Raises:
            SpecParseError: Unknown form or invalid parameters
        """
        if text.strip().startswith("sets:"):
            return self.parse_sets(text.strip()[5:], kind)
        term = split_spec(text)
        try:
            cells = term.integer("cells", 8)
            if cells < 1:
                raise ValueError("a partition needs at least one cell")
            if term.name == "grid":
                lower, upper = term.number("lower", -3.0), term.number("upper", 3.0)
                if not lower < upper:
                    raise ValueError("grid partition needs lower < upper")
                edges = np.linspace(lower, upper, cells + 1)
                edges[-1] = upper
                result = [LineSet.interval(-math.inf, lower)]
                result += [LineSet.interval(a, b) for a, b in zip(edges[:-1], edges[1:])]
                result.append(LineSet.interval(upper, math.inf))
                return result
            if term.name == "arcs":
                start = term.number("start", 0.0)
                width = TWO_PI / cells
                if cells == 1:
                    return [CircleSet.full()]
                return [CircleSet.arc(start + j * width, start + (j + 1) * width) for j in range(cells)]
            if term.name == "nat":
                result = [NatSet.singleton(n) for n in range(cells)]
                result.append(NatSet.of(range(cells), cofinite=True))
                return result
        except (SetError, ValueError) as e:
            raise SpecParseError(str(e), text)
        raise SpecParseError(f"unknown partition form '{term.name}'", text)

    def parse_state(self, text: str) -> StateSpec:
        """Parse 'uniform', 'basis:k=3', 'random:seed=7' or 'position:x=0.5'."""
        term = split_spec(text)
        try:
            if term.name == "uniform":
                return StateSpec(kind="uniform")
            if term.name == "basis":
                return StateSpec(kind="basis", index=term.integer("k", 0))
            if term.name == "random":
                seed = term.integer("seed") if "seed" in term.params else None
                return StateSpec(kind="random", seed=seed)
            if term.name == "position":
                return StateSpec(kind="position", x=term.number("x"))
        except ValueError as e:
            raise SpecParseError(str(e), text)
        raise SpecParseError(f"unknown state '{term.name}'", text)
