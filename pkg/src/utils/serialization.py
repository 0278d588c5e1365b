"""
JSON/CSV output with round-trip exact floats.

Every float is printed with 17 significant digits so that reading the value
back reproduces the same double. Complex numbers are written as [re, im]
pairs, numpy arrays as nested lists.
"""

import csv
import io
import json
import math
from fractions import Fraction
from typing import Any, Iterable, List, Sequence

import numpy as np


def format_float(value: float) -> str:
    """17-significant-digit text for a double, with JSON-safe specials."""
    if math.isnan(value):
        return "NaN"
    if math.isinf(value):
        return "Infinity" if value > 0 else "-Infinity"
    text = format(value, ".17g")
    if text == "-0":
        text = "0"
    return text


def _normalize(obj: Any) -> Any:
    """Convert numpy/complex/Fraction values into JSON-ready structures."""
    if isinstance(obj, dict):
        return {str(key): _normalize(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_normalize(item) for item in obj]
    if isinstance(obj, np.ndarray):
        return _normalize(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_FloatToken(float(obj.real)), _FloatToken(float(obj.imag))]
    if isinstance(obj, (float, np.floating)):
        return _FloatToken(float(obj))
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


class _FloatToken:
    __slots__ = ("value",)

    def __init__(self, value: float):
        self.value = value


def _emit(obj: Any, indent: int, level: int, out: List[str]) -> None:
    pad = " " * (indent * (level + 1))
    closing = " " * (indent * level)
    if isinstance(obj, _FloatToken):
        out.append(format_float(obj.value))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        items = list(obj.items())
        for index, (key, value) in enumerate(items):
            out.append(f"{pad}{json.dumps(key)}: ")
            _emit(value, indent, level + 1, out)
            out.append(",\n" if index < len(items) - 1 else "\n")
        out.append(closing + "}")
    elif isinstance(obj, list):
        # short scalar lists stay on one line
        if all(not isinstance(item, (dict, list)) for item in obj):
            parts: List[str] = []
            for item in obj:
                _emit(item, indent, level + 1, parts)
                parts.append(", ")
            out.append("[" + "".join(parts[:-1]) + "]")
            return
        out.append("[\n")
        for index, item in enumerate(obj):
            out.append(pad)
            _emit(item, indent, level + 1, out)
            out.append(",\n" if index < len(obj) - 1 else "\n")
        out.append(closing + "]")
    else:
        out.append(json.dumps(obj))


def dumps(obj: Any, indent: int = 2) -> str:
    """Serialize ``obj`` to deterministic JSON text."""
    out: List[str] = []
    _emit(_normalize(obj), indent, 0, out)
    return "".join(out) + "\n"


def loads(text: str) -> Any:
    return json.loads(text)


def complex_pairs(values: Iterable[complex]) -> List[List[float]]:
    return [[float(np.real(value)), float(np.imag(value))] for value in values]


def complex_from_pairs(pairs: Sequence[Sequence[float]]) -> np.ndarray:
    return np.array([complex(pair[0], pair[1]) for pair in pairs], dtype=complex)


def matrix_pairs(matrix: np.ndarray) -> List[List[List[float]]]:
    """Complex matrix as rows of [re, im] pairs."""
    return [complex_pairs(row) for row in np.asarray(matrix)]


def to_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """CSV text with floats formatted the same way as the JSON output."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([
            format_float(float(cell)) if isinstance(cell, (float, np.floating)) else cell
            for cell in row
        ])
    return buffer.getvalue()
