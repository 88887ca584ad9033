from typing import List, Optional, Tuple
import math

from ..models.sets import (
    CircleSet, LineSet, MeasurableSet, NatSet, SetError, SetKind,
    difference, union,
)

UNION_SEPARATORS = ("∪", "|")
DIFFERENCE_MARKERS = ("∖", "\\")
EMPTY_MARKERS = ("∅", "{}")
PREFIXES = {"circ:": SetKind.CIRCLE, "nat:": SetKind.NATURALS, "line:": SetKind.LINE}


class SetParseError(Exception):
    """Exception raised for malformed set text."""
    def __init__(self, message: str, position: Optional[int] = None):
        self.message = message
        self.position = position
        super().__init__(self._format_message())

    def _format_message(self) -> str:
        """Format the error message with the character position."""
        if self.position is not None:
            return f"Position {self.position}: {self.message}"
        return self.message


def parse_number(token: str) -> float:
    """Parse an endpoint: plain floats, inf/∞ and multiples of pi ("pi", "3pi/2", "-pi/4").

    Raises:
        ValueError: If the token is not a number
    """
    token = token.strip().replace("∞", "inf").replace("π", "pi")
    if "pi" in token:
        head, _, tail = token.partition("pi")
        head = head.rstrip("*")
        coefficient = {"": 1.0, "+": 1.0, "-": -1.0}.get(head)
        if coefficient is None:
            coefficient = float(head)
        denominator = 1.0
        if tail:
            if not tail.startswith("/"):
                raise ValueError(f"cannot read '{token}'")
            denominator = float(tail[1:])
        return coefficient * math.pi / denominator
    value = float(token)
    if math.isnan(value):
        raise ValueError("nan is not a valid endpoint")
    return value


class SetParser:
    """Parser for the text syntax of measurable sets.

    Grammar (whitespace ignored)::

        set    := [prefix] body
        prefix := "circ:" | "nat:" | "line:"
        body   := "∅" | piece ("∪" piece)* ["∖{" numbers "}"]
        piece  := ("[" | "(") number "," number (")" | "]") | "{" numbers "}"

    Naturals use ``nat:{0,1,2}`` or ``nat:co{0..9}`` (ranges inclusive).
    """

    def parse(self, text: str, default_kind: SetKind = SetKind.LINE) -> MeasurableSet:
        """Parse set text into a canonical set.

        Args:
            text: Set text
            default_kind: Domain used when the text has no prefix

        Returns:
            MeasurableSet: Canonical LineSet, CircleSet or NatSet

        Raises:
            SetParseError: If the text is malformed
        """
        if text is None or not text.strip():
            raise SetParseError("set text is empty", 0)
        self._text = text
        self._pos = 0
        self._skip_space()
        kind = SetKind(default_kind)
        for prefix, prefix_kind in PREFIXES.items():
            if self._text.startswith(prefix, self._pos):
                kind = prefix_kind
                self._pos += len(prefix)
                break
        self._skip_space()
        if kind == SetKind.NATURALS:
            result = self._parse_naturals()
        else:
            result = self._parse_intervals(kind)
        self._skip_space()
        if self._pos != len(self._text):
            raise SetParseError(f"unexpected trailing text '{self._text[self._pos:]}'", self._pos)
        return result

    def _skip_space(self) -> None:
        while self._pos < len(self._text) and self._text[self._pos].isspace():
            self._pos += 1

    def _peek(self) -> str:
        return self._text[self._pos] if self._pos < len(self._text) else ""

    def _expect(self, options: str) -> str:
        self._skip_space()
        char = self._peek()
        if not char or char not in options:
            found = char or "end of text"
            raise SetParseError(f"expected one of '{options}', found '{found}'", self._pos)
        self._pos += 1
        return char

    def _starts_with_any(self, markers) -> Optional[str]:
        for marker in markers:
            if self._text.startswith(marker, self._pos):
                return marker
        return None

    def _read_token(self) -> Tuple[str, int]:
        self._skip_space()
        start = self._pos
        while self._pos < len(self._text) and self._text[self._pos] not in ",)]}":
            self._pos += 1
        return self._text[start:self._pos].strip(), start

    def _read_number(self) -> float:
        token, start = self._read_token()
        try:
            return parse_number(token)
        except ValueError:
            raise SetParseError(f"invalid number '{token}'", start)

    def _read_number_list(self) -> List[float]:
        self._expect("{")
        values: List[float] = []
        self._skip_space()
        if self._peek() == "}":
            self._pos += 1
            return values
        while True:
            values.append(self._read_number())
            if self._expect(",}") == "}":
                return values

    def _parse_naturals(self) -> NatSet:
        cofinite = False
        if self._text.startswith("co", self._pos):
            cofinite = True
            self._pos += 2
        elif self._starts_with_any(("∅",)):
            self._pos += 1
            return NatSet.empty()
        self._expect("{")
        members: List[int] = []
        while True:
            self._skip_space()
            if self._peek() == "}":
                self._pos += 1
                break
            token, start = self._read_token()
            try:
                if ".." in token:
                    low, high = token.split("..", 1)
                    members.extend(range(int(low), int(high) + 1))
                else:
                    members.append(int(token))
            except ValueError:
                raise SetParseError(f"invalid natural '{token}'", start)
            if members and min(members) < 0:
                raise SetParseError(f"negative natural in '{token}'", start)
            if self._expect(",}") == "}":
                break
        return NatSet.of(members, cofinite=cofinite)

    def _parse_intervals(self, kind: SetKind):
        cls = CircleSet if kind == SetKind.CIRCLE else LineSet
        if self._starts_with_any(("∅",)):
            self._pos += 1
            return cls.empty()
        result = cls.empty()
        while True:
            result = union(result, self._parse_piece(cls))
            self._skip_space()
            separator = self._starts_with_any(UNION_SEPARATORS)
            if separator is None:
                break
            self._pos += len(separator)
        marker = self._starts_with_any(DIFFERENCE_MARKERS)
        if marker is not None:
            self._pos += len(marker)
            for p in self._read_number_list():
                result = difference(result, cls.singleton(p))
        return result

    def _parse_piece(self, cls):
        self._skip_space()
        start = self._pos
        if self._peek() == "{":
            result = cls.empty()
            for p in self._read_number_list():
                if math.isinf(p):
                    raise SetParseError("a point must be finite", start)
                result = union(result, cls.singleton(p))
            return result
        left = self._expect("[(")
        a = self._read_number()
        self._expect(",")
        b = self._read_number()
        right = self._expect(")]")
        try:
            piece = cls.arc(a, b) if cls is CircleSet else cls.interval(a, b)
            if left == "(" and math.isfinite(a):
                piece = difference(piece, cls.singleton(a))
            if right == "]" and math.isfinite(b):
                piece = union(piece, cls.singleton(b))
        except SetError as e:
            raise SetParseError(e.message, start)
        return piece


def parse_set(text: str, default_kind: SetKind = SetKind.LINE) -> MeasurableSet:
    """Parse set text with a fresh parser."""
    return SetParser().parse(text, default_kind)


def format_set(delta: MeasurableSet) -> str:
    """Canonical text of a set (inverse of ``parse_set``)."""
    return delta.to_text()
