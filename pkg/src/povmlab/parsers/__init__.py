from .set_parser import SetParser, SetParseError, parse_set, format_set
from .spec_parser import SpecParser, SpecParseError

__all__ = ['SetParser', 'SetParseError', 'parse_set', 'format_set', 'SpecParser', 'SpecParseError']
