import os
import json
import math
import yaml
from typing import Any


class FileFormatError(Exception):
    """Exception raised for errors in the file format."""
    pass


def ensure_directory(path: str) -> str:
    """Create a directory (and parents) if it does not exist yet.

    Args:
        path: Directory path

    Returns:
        str: The same path
    """
    if path and not os.path.exists(path):
        os.makedirs(path, exist_ok=True)
    return path


def write_text_file(file_path: str, content: str) -> None:
    """Write content to a text file, creating the parent directory if needed.

    Args:
        file_path: Path to the file to write
        content: Content to write to the file

    Raises:
        PermissionError: If the file cannot be written
    """
    ensure_directory(os.path.dirname(file_path))
    with open(file_path, 'w', encoding='utf-8') as file:
        file.write(content)


def json_safe(value: Any) -> Any:
    """Recursively replace non-finite floats by their string names.

    JSON has no literal for infinities; measures of half-lines are +inf, so reports
    carry them as "inf" / "-inf" / "nan".
    """
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, dict):
        return {str(k): json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    return value


def dump_json(data: Any, indent: int = 2) -> str:
    """Serialize data deterministically (sorted keys, finite-safe floats)."""
    return json.dumps(json_safe(data), indent=indent, sort_keys=True, allow_nan=False)


def load_json(file_path: str) -> Any:
    """Load JSON data from a file.

    Args:
        file_path: Path to the JSON file

    Returns:
        The parsed JSON data

    Raises:
        FileNotFoundError: If the file does not exist
        FileFormatError: If the JSON cannot be parsed
    """
    try:
        with open(file_path, 'r', encoding='utf-8') as file:
            return json.load(file)
    except json.JSONDecodeError as e:
        raise FileFormatError(f"JSON parsing error in {file_path}: {str(e)}")


def save_json(file_path: str, data: Any, indent: int = 2) -> None:
    """Save data to a JSON file.

    Args:
        file_path: Path to the JSON file
        data: Data to save
        indent: Indentation level for pretty-printing

    Raises:
        PermissionError: If the file cannot be written
        TypeError: If the data cannot be serialized to JSON
    """
    write_text_file(file_path, dump_json(data, indent=indent) + "\n")


def load_yaml(file_path: str) -> Any:
    """Load YAML (or JSON, which is valid YAML) data from a file.

    Args:
        file_path: Path to the YAML file

    Returns:
        The parsed YAML data

    Raises:
        FileNotFoundError: If the file does not exist
        FileFormatError: If the YAML cannot be parsed
    """
    try:
        with open(file_path, 'r', encoding='utf-8') as file:
            return yaml.safe_load(file)
    except yaml.YAMLError as e:
        raise FileFormatError(f"YAML parsing error in {file_path}: {str(e)}")
