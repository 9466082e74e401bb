"""CSV output with a ``#`` provenance header.

Floats are written with 12 significant digits; ``None`` and NaN become empty
(masked) cells.
"""
from __future__ import annotations

import csv
import io
import math
from typing import Iterable, Mapping, Optional, Sequence, TextIO

from . import __version__


def format_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return ""
        return format(v, ".12g")
    return str(v)


def write_csv(
    out: TextIO,
    header: Sequence[str],
    rows: Iterable[Sequence],
    command: Optional[str] = None,
    params: Optional[Mapping] = None,
    seed: Optional[int] = None,
) -> None:
    if command is not None:
        out.write(f"# command={command}\n")
        for key in sorted(params or {}):
            out.write(f"# {key}={format_cell(params[key])}\n")
        if seed is not None:
            out.write(f"# seed={seed}\n")
        out.write(f"# version={__version__}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    width = len(header)
    for row in rows:
        if len(row) != width:
            raise ValueError(f"row has {len(row)} cells, header has {width}")
        writer.writerow([format_cell(v) for v in row])


def read_csv(src) -> tuple[list[str], list[list[Optional[float]]], dict]:
    """Parse a file written by :func:`write_csv`.

    Returns ``(header, rows, provenance)``; numeric cells become floats,
    empty cells None, anything else stays a string.
    """
    text = src if isinstance(src, str) else src.read()
    provenance = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            provenance[key] = value
        elif line:
            body.append(line)
    reader = csv.reader(io.StringIO("\n".join(body)))
    header = next(reader)
    rows = []
    for rec in reader:
        parsed = []
        for cell in rec:
            if cell == "":
                parsed.append(None)
            else:
                try:
                    parsed.append(float(cell))
                except ValueError:
                    parsed.append(cell)
        rows.append(parsed)
    return header, rows, provenance
