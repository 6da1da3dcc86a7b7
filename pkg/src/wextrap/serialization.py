"""Canonical JSON writer: deterministic key order and float formatting.

Certificates must be byte-identical across reruns with the same config and
seed, so floats are rendered with a fixed 17-significant-digit format and
non-finite values become the strings "inf", "-inf", "nan".
"""

from __future__ import annotations

import math
from enum import Enum
from fractions import Fraction

import numpy as np


def _format_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    if x == int(x) and abs(x) < 1e16:
        return f"{x:.1f}"
    return format(x, ".17g")


def _escape(s: str) -> str:
    out = []
    for ch in s:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    return "".join(out)


def _render(obj, indent: int, level: int) -> str:
    pad = " " * (indent * level)
    pad_in = " " * (indent * (level + 1))
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if isinstance(obj, Fraction):
        return f'"{obj.numerator}/{obj.denominator}"'
    if isinstance(obj, Enum):
        return _render(obj.value, indent, level)
    if isinstance(obj, str):
        return f'"{_escape(obj)}"'
    if isinstance(obj, (list, tuple, np.ndarray)):
        items = list(obj)
        if not items:
            return "[]"
        body = ",\n".join(pad_in + _render(v, indent, level + 1) for v in items)
        return "[\n" + body + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        keys = sorted(obj.keys(), key=str)
        body = ",\n".join(
            f'{pad_in}"{_escape(str(k))}": {_render(obj[k], indent, level + 1)}'
            for k in keys)
        return "{\n" + body + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def canonical_json(obj, indent: int = 2) -> str:
    return _render(obj, indent, 0) + "\n"


def write_csv(path, rows: list[dict], columns: list[str]) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            cells = []
            for col in columns:
                v = row[col]
                if isinstance(v, (float, np.floating)):
                    cells.append(format(float(v), ".17g"))
                else:
                    cells.append(str(v))
            fh.write(",".join(cells) + "\n")
