"""
Exact algebra of the measurable sets the toolkit quantifies over.

Line and circle sets are finite unions of half-open intervals [a, b) together with a
finite set of *flipped* points: a point listed in ``points`` belongs to the set iff it
does not belong to the interval part. Flipped points outside the intervals are atoms
(singleton probes such as {x}); flipped points inside are punctures (the left end of
an open interval (a, b) is a puncture of [a, b)). The representation is unique and
closed under every Boolean operation.

Subsets of the naturals are finite sets or complements of finite sets.
"""
import bisect
import math
from enum import Enum
from typing import Callable, ClassVar, Iterable, List, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..utils.numeric_utils import (
    ENDPOINT_TOL, TWO_PI, format_endpoint, make_rng, reduce_angle,
)


class SetKind(str, Enum):
    """Domain of a measurable set."""
    LINE = "line"
    CIRCLE = "circle"
    NATURALS = "naturals"


class NatMode(str, Enum):
    """Storage mode of a natural-number set."""
    FINITE = "finite"
    COFINITE = "cofinite"


class MeasureKind(str, Enum):
    """Reference measures ν for absolute-continuity fits."""
    LEBESGUE_LINE = "lebesgue-line"
    LEBESGUE_CIRCLE = "lebesgue-circle"
    COUNTING = "counting"
    WEIGHTED_RESTRICTED = "weighted-restricted"


class SetError(Exception):
    """Exception raised for malformed sets and invalid set operations."""
    def __init__(self, message: str, index: Optional[int] = None):
        self.message = message
        self.index = index
        super().__init__(self._format_message())

    def _format_message(self) -> str:
        """Format the error message with the offending piece index."""
        if self.index is not None:
            return f"Piece {self.index}: {self.message}"
        return self.message


def _merge_intervals(intervals: Iterable[Tuple[float, float]]) -> List[Tuple[float, float]]:
    """Sort intervals and merge overlapping or adjacent ones."""
    merged: List[Tuple[float, float]] = []
    for a, b in sorted(intervals):
        if merged and a <= merged[-1][1] + ENDPOINT_TOL:
            if b > merged[-1][1]:
                merged[-1] = (merged[-1][0], b)
        else:
            merged.append((a, b))
    return merged


def _in_intervals(intervals: Sequence[Tuple[float, float]], x: float) -> bool:
    index = bisect.bisect_right(intervals, (x, math.inf)) - 1
    return index >= 0 and intervals[index][0] <= x < intervals[index][1]


def _dedupe_points(points: Iterable[float]) -> List[float]:
    unique: List[float] = []
    for p in sorted(points):
        if not unique or p > unique[-1] + ENDPOINT_TOL:
            unique.append(p)
    return unique


class _IntervalUnion(BaseModel):
    """Shared implementation of line and circle sets."""
    model_config = ConfigDict(frozen=True)

    kind: ClassVar[SetKind]
    lower_bound: ClassVar[float]
    upper_bound: ClassVar[float]
    text_prefix: ClassVar[str] = ""

    intervals: Tuple[Tuple[float, float], ...] = Field(
        default=(), description="Sorted, disjoint, non-adjacent half-open intervals [a, b)")
    points: Tuple[float, ...] = Field(
        default=(), description="Sorted points whose membership is flipped")

    @model_validator(mode="after")
    def check_canonical(self):
        """Reject non-canonical interval lists and misplaced points."""
        previous_end = None
        for a, b in self.intervals:
            if math.isnan(a) or math.isnan(b) or not a < b:
                raise ValueError(f"interval [{a}, {b}) is empty or malformed")
            if a < self.lower_bound or b > self.upper_bound:
                raise ValueError(f"interval [{a}, {b}) leaves the domain")
            if previous_end is not None and a <= previous_end + ENDPOINT_TOL:
                raise ValueError("intervals must be sorted, disjoint and non-adjacent")
            previous_end = b
        for p in self.points:
            if not math.isfinite(p) or p < self.lower_bound or p >= self.upper_bound:
                raise ValueError(f"point {p} is outside the domain")
        for p, q in zip(self.points, self.points[1:]):
            if q <= p + ENDPOINT_TOL:
                raise ValueError("points must be strictly increasing")
        return self

    @classmethod
    def empty(cls):
        return cls()

    @classmethod
    def full(cls):
        return cls(intervals=((cls.lower_bound, cls.upper_bound),))

    @classmethod
    def singleton(cls, x: float):
        """Zero-length probe {x}."""
        return cls(points=(cls._reduce_point(x),))

    @classmethod
    def _reduce_point(cls, x: float) -> float:
        return float(x)

    @classmethod
    def _from_intervals(cls, intervals: Iterable[Tuple[float, float]],
                        flips: Iterable[float] = ()):
        return cls(intervals=tuple(_merge_intervals(intervals)),
                   points=tuple(_dedupe_points(flips)))

    @classmethod
    def from_parts(cls, intervals: Iterable[Tuple[float, float]] = (),
                   atoms: Iterable[float] = (), punctures: Iterable[float] = ()):
        """Build a set from raw intervals, extra points and removed points.

        Args:
            intervals: Raw half-open pieces (validated and canonicalized)
            atoms: Points to add
            punctures: Points to remove (applied last)

        Returns:
            Canonical set
        """
        result = canonicalize(list(intervals), cls.kind)
        for x in atoms:
            result = union(result, cls.singleton(x))
        for x in punctures:
            result = difference(result, cls.singleton(x))
        return result

    def in_intervals(self, x: float) -> bool:
        """Membership in the interval part only."""
        return _in_intervals(self.intervals, x)

    def is_flipped(self, x: float) -> bool:
        index = bisect.bisect_left(self.points, x - ENDPOINT_TOL)
        return index < len(self.points) and abs(self.points[index] - x) <= ENDPOINT_TOL

    def contains(self, x: float) -> bool:
        """Membership of a point."""
        return self.in_intervals(x) != self.is_flipped(x)

    @property
    def atoms(self) -> Tuple[float, ...]:
        """Isolated points of the set (outside the interval part)."""
        return tuple(p for p in self.points if not self.in_intervals(p))

    @property
    def punctures(self) -> Tuple[float, ...]:
        """Points removed from the interval part."""
        return tuple(p for p in self.points if self.in_intervals(p))

    @property
    def is_empty(self) -> bool:
        return not self.intervals and not self.points

    @property
    def length(self) -> float:
        """Lebesgue measure; points carry no length."""
        return float(sum(b - a for a, b in self.intervals))

    def to_text(self) -> str:
        """Canonical text form; parses back to the same set."""
        if self.is_empty:
            return f"{self.text_prefix}∅"
        punctures = set(self.punctures)
        pieces = []
        for a, b in self.intervals:
            left = "["
            if math.isinf(a):
                left = "("
            elif a in punctures:
                left = "("
                punctures.discard(a)
            pieces.append(f"{left}{format_endpoint(a)},{format_endpoint(b)})")
        atoms = self.atoms
        if atoms:
            pieces.append("{" + ",".join(format_endpoint(p) for p in atoms) + "}")
        text = "∪".join(pieces)
        if punctures:
            text += "∖{" + ",".join(format_endpoint(p) for p in sorted(punctures)) + "}"
        return f"{self.text_prefix}{text}"

    def __str__(self) -> str:
        return self.to_text()


class LineSet(_IntervalUnion):
    """Finite union of half-open intervals on the extended real line, with flipped points."""
    kind: ClassVar[SetKind] = SetKind.LINE
    lower_bound: ClassVar[float] = -math.inf
    upper_bound: ClassVar[float] = math.inf

    @classmethod
    def interval(cls, a: float, b: float) -> "LineSet":
        return canonicalize([(a, b)], SetKind.LINE)

    @classmethod
    def open_interval(cls, a: float, b: float) -> "LineSet":
        """(a, b), i.e. [a, b) without a."""
        result = cls.interval(a, b)
        if math.isfinite(a):
            result = difference(result, cls.singleton(a))
        return result


class CircleSet(_IntervalUnion):
    """Finite union of half-open arcs of [0, 2*pi), split at zero, with flipped points."""
    kind: ClassVar[SetKind] = SetKind.CIRCLE
    lower_bound: ClassVar[float] = 0.0
    upper_bound: ClassVar[float] = TWO_PI
    text_prefix: ClassVar[str] = "circ:"

    @classmethod
    def _reduce_point(cls, x: float) -> float:
        return reduce_angle(x)

    @classmethod
    def arc(cls, a: float, b: float) -> "CircleSet":
        """Arc from a to b counter-clockwise; wraps through zero when a > b after reduction."""
        return canonicalize([(a, b)], SetKind.CIRCLE)

    @classmethod
    def open_arc(cls, a: float, b: float) -> "CircleSet":
        return difference(cls.arc(a, b), cls.singleton(a))

    def shifted(self, theta: float) -> "CircleSet":
        return shift_circle(self, theta)


class NatSet(BaseModel):
    """Finite or cofinite subset of the naturals {0, 1, 2, ...}."""
    model_config = ConfigDict(frozen=True)

    kind: ClassVar[SetKind] = SetKind.NATURALS

    mode: NatMode = Field(NatMode.FINITE, description="finite: members are the set; cofinite: members are the complement")
    members: Tuple[int, ...] = Field(default=(), description="Strictly increasing naturals")

    @field_validator('members')
    @classmethod
    def validate_members(cls, value):
        """Members must be strictly increasing naturals."""
        for n in value:
            if n < 0:
                raise ValueError(f"negative member {n}")
        for a, b in zip(value, value[1:]):
            if b <= a:
                raise ValueError("members must be strictly increasing without duplicates")
        return value

    @classmethod
    def of(cls, members: Iterable[int], cofinite: bool = False) -> "NatSet":
        """Canonical set from arbitrary members (sorted, deduplicated)."""
        values = sorted(set(int(n) for n in members))
        if values and values[0] < 0:
            raise SetError(f"negative natural {values[0]}")
        return cls(mode=NatMode.COFINITE if cofinite else NatMode.FINITE, members=tuple(values))

    @classmethod
    def empty(cls) -> "NatSet":
        return cls()

    @classmethod
    def full(cls) -> "NatSet":
        return cls(mode=NatMode.COFINITE)

    @classmethod
    def singleton(cls, n: int) -> "NatSet":
        return cls.of([n])

    @property
    def is_cofinite(self) -> bool:
        return self.mode == NatMode.COFINITE

    @property
    def is_empty(self) -> bool:
        return not self.is_cofinite and not self.members

    @property
    def cardinality(self) -> float:
        return math.inf if self.is_cofinite else float(len(self.members))

    def contains(self, n: int) -> bool:
        return (n in self.members) != self.is_cofinite

    def complement(self) -> "NatSet":
        mode = NatMode.FINITE if self.is_cofinite else NatMode.COFINITE
        return NatSet(mode=mode, members=self.members)

    def to_text(self) -> str:
        body = "{" + ",".join(str(n) for n in self.members) + "}"
        return f"nat:co{body}" if self.is_cofinite else f"nat:{body}"

    def __str__(self) -> str:
        return self.to_text()


MeasurableSet = Union[LineSet, CircleSet, NatSet]

_SET_TYPES = {SetKind.LINE: LineSet, SetKind.CIRCLE: CircleSet, SetKind.NATURALS: NatSet}


def set_type(kind: SetKind):
    """Model class for a domain kind."""
    return _SET_TYPES[SetKind(kind)]


def full_set(kind: SetKind) -> MeasurableSet:
    return set_type(kind).full()


def empty_set(kind: SetKind) -> MeasurableSet:
    return set_type(kind).empty()


def _split_arc(a: float, b: float, index: int) -> List[Tuple[float, float]]:
    if math.isnan(a) or math.isnan(b) or math.isinf(a) or math.isinf(b):
        raise SetError(f"arc endpoints must be finite, got [{a}, {b})", index)
    if b - a >= TWO_PI - ENDPOINT_TOL:
        return [(0.0, TWO_PI)]
    start, stop = reduce_angle(a), reduce_angle(b)
    if abs(start - stop) <= ENDPOINT_TOL:
        raise SetError(f"arc [{a}, {b}) has zero length", index)
    if start < stop:
        return [(start, stop)]
    pieces = [(start, TWO_PI)]
    if stop > 0:
        pieces.append((0.0, stop))
    return pieces


def canonicalize(raw: Sequence, kind: SetKind = SetKind.LINE) -> MeasurableSet:
    """Canonical set from raw pieces.

    Args:
        raw: Intervals/arcs as (a, b) pairs, or naturals for the naturals domain
        kind: Target domain

    Returns:
        Canonical LineSet, CircleSet or NatSet

    Raises:
        SetError: If a piece is malformed (the error carries its index)
    """
    kind = SetKind(kind)
    if kind == SetKind.NATURALS:
        for index, n in enumerate(raw):
            if int(n) != n or n < 0:
                raise SetError(f"{n} is not a natural number", index)
        return NatSet.of(raw)
    pieces: List[Tuple[float, float]] = []
    for index, piece in enumerate(raw):
        try:
            a, b = float(piece[0]), float(piece[1])
        except (TypeError, ValueError, IndexError):
            raise SetError(f"cannot read interval from {piece!r}", index)
        if kind == SetKind.CIRCLE:
            pieces.extend(_split_arc(a, b, index))
        else:
            if math.isnan(a) or math.isnan(b) or not a < b:
                raise SetError(f"malformed interval [{a}, {b}): need a < b", index)
            pieces.append((a, b))
    return set_type(kind)._from_intervals(pieces)


def _check_same_kind(a: MeasurableSet, b: MeasurableSet) -> None:
    if a.kind != b.kind:
        raise SetError(f"mixed domains: {a.kind.value} and {b.kind.value}")


def _combine(a: _IntervalUnion, b: _IntervalUnion, op: Callable[[bool, bool], bool]):
    """Boolean combination by an endpoint sweep, then point flips."""
    edges = sorted(set(e for iv in a.intervals + b.intervals for e in iv))
    segments = []
    for left, right in zip(edges, edges[1:]):
        if right - left <= ENDPOINT_TOL:
            continue
        if op(a.in_intervals(left), b.in_intervals(left)):
            segments.append((left, right))
    merged = _merge_intervals(segments)
    flips = []
    for p in _dedupe_points(a.points + b.points):
        if op(a.contains(p), b.contains(p)) != _in_intervals(merged, p):
            flips.append(p)
    return type(a)(intervals=tuple(merged), points=tuple(flips))


def _nat_union(a: NatSet, b: NatSet) -> NatSet:
    sa, sb = set(a.members), set(b.members)
    if not a.is_cofinite and not b.is_cofinite:
        return NatSet.of(sa | sb)
    if a.is_cofinite and b.is_cofinite:
        return NatSet.of(sa & sb, cofinite=True)
    finite, cofinite = (sa, sb) if b.is_cofinite else (sb, sa)
    return NatSet.of(cofinite - finite, cofinite=True)


def union(a: MeasurableSet, b: MeasurableSet) -> MeasurableSet:
    _check_same_kind(a, b)
    if isinstance(a, NatSet):
        return _nat_union(a, b)
    return _combine(a, b, lambda x, y: x or y)


def complement(a: MeasurableSet) -> MeasurableSet:
    """Complement in R, [0, 2*pi) or N."""
    if isinstance(a, NatSet):
        return a.complement()
    return _combine(type(a).full(), a, lambda x, y: x and not y)


def intersection(a: MeasurableSet, b: MeasurableSet) -> MeasurableSet:
    _check_same_kind(a, b)
    if isinstance(a, NatSet):
        return _nat_union(a.complement(), b.complement()).complement()
    return _combine(a, b, lambda x, y: x and y)


def difference(a: MeasurableSet, b: MeasurableSet) -> MeasurableSet:
    _check_same_kind(a, b)
    if isinstance(a, NatSet):
        return intersection(a, b.complement())
    return _combine(a, b, lambda x, y: x and not y)


def is_subset(a: MeasurableSet, b: MeasurableSet) -> bool:
    return difference(a, b).is_empty


def union_all(sets: Iterable[MeasurableSet], kind: SetKind) -> MeasurableSet:
    result = empty_set(kind)
    for s in sets:
        result = union(result, s)
    return result


def first_overlap(sets: Sequence[MeasurableSet]) -> Optional[Tuple[int, int]]:
    """Indices of the first pair of intersecting sets, or None when pairwise disjoint."""
    for i in range(len(sets)):
        for j in range(i + 1, len(sets)):
            if not intersection(sets[i], sets[j]).is_empty:
                return i, j
    return None


def shift_circle(delta: CircleSet, theta: float) -> CircleSet:
    """Translate every arc by theta modulo 2*pi.

    Args:
        delta: Canonical circle set
        theta: Shift angle

    Returns:
        CircleSet: The shifted set, re-canonicalized
    """
    pieces: List[Tuple[float, float]] = []
    for a, b in delta.intervals:
        pieces.extend(_split_arc(a + theta, b + theta, 0))
    flips = [reduce_angle(p + theta) for p in delta.points]
    return CircleSet._from_intervals(pieces, flips)


class ReferenceMeasure(BaseModel):
    """Reference measure ν: Lebesgue on the line or circle, counting, or M·|Δ ∩ [u, v]|."""
    model_config = ConfigDict(frozen=True)

    kind: MeasureKind = Field(..., description="Measure family")
    scale: float = Field(1.0, gt=0, description="Scale M of the weighted-restricted measure")
    window: Optional[Tuple[float, float]] = Field(None, description="Window [u, v] of the weighted-restricted measure")

    @model_validator(mode="after")
    def check_window(self):
        """Weighted-restricted measures need a proper window."""
        if self.kind == MeasureKind.WEIGHTED_RESTRICTED:
            if self.window is None or not self.window[0] < self.window[1]:
                raise ValueError("weighted-restricted measure needs a window u < v")
        return self

    @classmethod
    def lebesgue_line(cls) -> "ReferenceMeasure":
        return cls(kind=MeasureKind.LEBESGUE_LINE)

    @classmethod
    def lebesgue_circle(cls) -> "ReferenceMeasure":
        return cls(kind=MeasureKind.LEBESGUE_CIRCLE)

    @classmethod
    def counting(cls) -> "ReferenceMeasure":
        return cls(kind=MeasureKind.COUNTING)

    @classmethod
    def weighted_restricted(cls, scale: float, lower: float, upper: float) -> "ReferenceMeasure":
        return cls(kind=MeasureKind.WEIGHTED_RESTRICTED, scale=scale, window=(lower, upper))

    @property
    def domain(self) -> Optional[SetKind]:
        """Domain the measure lives on; None for counting (any domain)."""
        if self.kind == MeasureKind.LEBESGUE_CIRCLE:
            return SetKind.CIRCLE
        if self.kind == MeasureKind.COUNTING:
            return None
        return SetKind.LINE

    def describe(self) -> str:
        if self.kind == MeasureKind.WEIGHTED_RESTRICTED:
            return f"weighted:M={self.scale},window={self.window[0]}:{self.window[1]}"
        return self.kind.value


def measure(nu: ReferenceMeasure, delta: MeasurableSet) -> float:
    """Value ν(Δ); may be +inf.

    Args:
        nu: Reference measure
        delta: Canonical set of a compatible domain

    Returns:
        float: Nonnegative extended real

    Raises:
        SetError: If the measure and the set live on different domains
    """
    if nu.domain is not None and nu.domain != delta.kind:
        raise SetError(f"measure {nu.kind.value} cannot measure a {delta.kind.value} set")
    if nu.kind == MeasureKind.COUNTING:
        if isinstance(delta, NatSet):
            return delta.cardinality
        return math.inf if delta.intervals else float(len(delta.points))
    if nu.kind == MeasureKind.WEIGHTED_RESTRICTED:
        window = LineSet.interval(*nu.window)
        return nu.scale * intersection(delta, window).length
    return delta.length


def _param(params: dict, name: str, default: float) -> float:
    return float(params.get(name, default))


def shrinking_family(kind: str, count: int, **params) -> List[MeasurableSet]:
    """Decreasing families Δ_1 ⊇ Δ_2 ⊇ ... used by continuity probes.

    Kinds:
        nested-interval: (c, c + w/i), decreasing to the empty set
        nested-point: [c, c + w/i), decreasing to {c}
        escaping-halfline: (-inf, start - step*i), decreasing to the empty set
        shrinking-arc: (s, s + w/i) on the circle, decreasing to the empty set
        nat-tail: {m > i}, decreasing to the empty set

    Raises:
        SetError: Unknown kind or count < 1
    """
    if count < 1:
        raise SetError(f"family size must be at least 1, got {count}")
    indices = range(1, count + 1)
    if kind == "nested-interval":
        c, w = _param(params, "center", 0.0), _param(params, "width", 1.0)
        return [LineSet.open_interval(c, c + w / i) for i in indices]
    if kind == "nested-point":
        c, w = _param(params, "center", 0.0), _param(params, "width", 1.0)
        return [LineSet.interval(c, c + w / i) for i in indices]
    if kind == "escaping-halfline":
        start, step = _param(params, "start", 0.0), _param(params, "step", 1.0)
        return [LineSet.interval(-math.inf, start - step * i) for i in indices]
    if kind == "shrinking-arc":
        s, w = _param(params, "start", 0.0), _param(params, "width", math.pi)
        return [CircleSet.open_arc(s, s + w / i) for i in indices]
    if kind == "nat-tail":
        return [NatSet.of(range(i + 1), cofinite=True) for i in indices]
    raise SetError(f"unknown shrinking family kind '{kind}'")


def growing_family(kind: str, count: int, **params) -> Tuple[List[MeasurableSet], MeasurableSet]:
    """Increasing families Δ_i ↑ Δ with their limit Δ.

    Kinds:
        growing-interval: [a, b - (b - a)/(i + 1)) ↑ [a, b)
        growing-arc: [s, s + w*i/(i + 1)) ↑ [s, s + w)
        nat-head: {0, ..., i - 1} ↑ N

    Raises:
        SetError: Unknown kind or count < 1
    """
    if count < 1:
        raise SetError(f"family size must be at least 1, got {count}")
    indices = range(1, count + 1)
    if kind == "growing-interval":
        a, b = _param(params, "lower", 0.0), _param(params, "upper", 1.0)
        members = [LineSet.interval(a, b - (b - a) / (i + 1)) for i in indices]
        return members, LineSet.interval(a, b)
    if kind == "growing-arc":
        s, w = _param(params, "start", 0.0), _param(params, "width", math.pi)
        members = [CircleSet.arc(s, s + w * i / (i + 1)) for i in indices]
        return members, CircleSet.arc(s, s + w)
    if kind == "nat-head":
        return [NatSet.of(range(i)) for i in indices], NatSet.full()
    raise SetError(f"unknown growing family kind '{kind}'")


def random_family(kind: str, count: int, seed: Optional[int] = None, **params) -> List[MeasurableSet]:
    """Reproducible random sets for property checks.

    Kinds:
        intervals: unions of up to ``pieces`` intervals inside [low, high)
        arcs: unions of up to ``pieces`` arcs of length at most ``max_length``
        nat: finite sets of up to ``pieces`` naturals below ``high``
        points: line singletons in [low, high)
        circle-points: circle singletons

    Raises:
        SetError: Unknown kind
    """
    rng = make_rng(seed)
    pieces = int(params.get("pieces", 3))
    low, high = _param(params, "low", -2.0), _param(params, "high", 2.0)
    members: List[MeasurableSet] = []
    for _ in range(count):
        k = int(rng.integers(1, pieces + 1))
        if kind == "intervals":
            ends = rng.uniform(low, high, size=(k, 2))
            raw = [(min(e), max(e)) for e in ends if max(e) - min(e) > ENDPOINT_TOL]
            members.append(canonicalize(raw or [(low, high)], SetKind.LINE))
        elif kind == "arcs":
            max_length = _param(params, "max_length", math.pi)
            starts = rng.uniform(0.0, TWO_PI, size=k)
            lengths = rng.uniform(0.0, max_length, size=k)
            raw = [(s, s + l) for s, l in zip(starts, lengths) if l > 1e-9]
            members.append(canonicalize(raw or [(0.0, max_length)], SetKind.CIRCLE))
        elif kind == "nat":
            top = int(params.get("high", 20))
            members.append(NatSet.of(rng.integers(0, top, size=k).tolist()))
        elif kind == "points":
            members.append(LineSet.singleton(float(rng.uniform(low, high))))
        elif kind == "circle-points":
            members.append(CircleSet.singleton(float(rng.uniform(0.0, TWO_PI))))
        else:
            raise SetError(f"unknown random family kind '{kind}'")
    return members
