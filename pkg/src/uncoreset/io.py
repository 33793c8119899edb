"""Reading and writing uncertain point sets and JSON reports.

Coordinates are parsed as exact rationals. JSON numbers go through
``Fraction`` directly; rationals without a finite decimal expansion are
written as "p/q" strings, which the reader also accepts.
"""

from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Any

from .model import UncertainPoint, UncertainPointSet

FORMATS = ("jsonl", "csv")


class FormatError(ValueError):
    """The input could not be parsed as an uncertain point set."""


def detect_format(path: str | Path) -> str:
    return "csv" if str(path).lower().endswith(".csv") else "jsonl"


def parse_coord(v) -> Fraction:
    if isinstance(v, bool):
        raise FormatError(f"coordinate {v!r} is not a number")
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    if isinstance(v, str):
        try:
            return Fraction(v.strip())
        except (ValueError, ZeroDivisionError):
            raise FormatError(f"coordinate {v!r} is not an exact decimal or p/q") from None
    if isinstance(v, float):
        if not math.isfinite(v):
            raise FormatError(f"coordinate {v!r} is not finite")
        return Fraction(v)
    raise FormatError(f"coordinate {v!r} is not a number")


def format_coord(x) -> str:
    """Shortest exact text for a coordinate: a decimal when one exists, else p/q."""
    f = Fraction(x)
    if f.denominator == 1:
        return str(f.numerator)
    d = f.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"{f.numerator}/{f.denominator}"
    places = max(twos, fives)
    digits = str(abs(f.numerator) * 10**places // f.denominator).rjust(places + 1, "0")
    sign = "-" if f < 0 else ""
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


def _json_coord(x) -> str:
    text = format_coord(x)
    return json.dumps(text) if "/" in text else text


def _point(obj: Any, where: str) -> UncertainPoint:
    if not isinstance(obj, dict):
        raise FormatError(f"{where}: expected a JSON object")
    extra = set(obj) - {"id", "locations"}
    if extra:
        # weighted or otherwise annotated locations are not supported
        raise FormatError(f"{where}: unexpected fields {sorted(extra)}")
    pid, locs = obj.get("id"), obj.get("locations")
    if isinstance(pid, Fraction) and pid.denominator == 1:
        pid = int(pid)
    if not isinstance(pid, int) or isinstance(pid, bool):
        raise FormatError(f"{where}: id must be an integer")
    if not isinstance(locs, list) or not all(isinstance(loc, list) for loc in locs):
        raise FormatError(f"{where}: locations must be a list of coordinate lists")
    try:
        return UncertainPoint(pid, tuple(tuple(parse_coord(c) for c in loc) for loc in locs))
    except (TypeError, ValueError) as e:
        raise FormatError(f"{where}: {e}") from None


def _build(points: list[UncertainPoint], source: str) -> UncertainPointSet:
    try:
        return UncertainPointSet(tuple(points))
    except ValueError as e:
        raise FormatError(f"{source}: {e}") from None


def loads_jsonl(text: str, source: str = "<jsonl>") -> UncertainPointSet:
    points = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line, parse_float=Fraction, parse_int=Fraction)
        except json.JSONDecodeError as e:
            raise FormatError(f"{source}:{lineno}: {e.msg}") from None
        points.append(_point(obj, f"{source}:{lineno}"))
    return _build(points, source)


def dumps_jsonl(P: UncertainPointSet) -> str:
    lines = []
    for p in P:
        locs = ", ".join("[" + ", ".join(_json_coord(c) for c in loc) + "]" for loc in p.locations)
        lines.append(f'{{"id": {p.id}, "locations": [{locs}]}}')
    return "\n".join(lines) + "\n"


def loads_csv(text: str, source: str = "<csv>") -> UncertainPointSet:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None:
        raise FormatError(f"{source}: empty file")
    header = [h.strip() for h in header]
    d = len(header) - 2
    if d < 1 or header[:2] != ["id", "loc_index"] or header[2:] != [f"x{a}" for a in range(1, d + 1)]:
        raise FormatError(f"{source}: header must be id, loc_index, x1..xd")
    rows: dict[int, dict[int, tuple]] = {}
    for lineno, rec in enumerate(reader, start=2):
        if not rec:
            continue
        if len(rec) != d + 2:
            raise FormatError(f"{source}:{lineno}: expected {d + 2} fields, got {len(rec)}")
        try:
            pid, j = int(rec[0]), int(rec[1])
        except ValueError:
            raise FormatError(f"{source}:{lineno}: id and loc_index must be integers") from None
        locs = rows.setdefault(pid, {})
        if j in locs:
            raise FormatError(f"{source}:{lineno}: duplicate location {j} of point {pid}")
        locs[j] = tuple(parse_coord(c) for c in rec[2:])
    points = []
    for pid, locs in rows.items():
        if sorted(locs) != list(range(len(locs))):
            raise FormatError(f"{source}: point {pid} has loc_index values {sorted(locs)}")
        try:
            points.append(UncertainPoint(pid, tuple(locs[j] for j in range(len(locs)))))
        except (TypeError, ValueError) as e:
            raise FormatError(f"{source}: {e}") from None
    return _build(points, source)


def dumps_csv(P: UncertainPointSet) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["id", "loc_index"] + [f"x{a}" for a in range(1, P.d + 1)])
    for p in P:
        for j, loc in enumerate(p.locations):
            w.writerow([p.id, j] + [format_coord(c) for c in loc])
    return out.getvalue()


def read_points(path: str | Path, fmt: str | None = None) -> UncertainPointSet:
    fmt = fmt or detect_format(path)
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise FormatError(f"{path}: {e.strerror}") from None
    return loads_csv(text, str(path)) if fmt == "csv" else loads_jsonl(text, str(path))


def write_points(P: UncertainPointSet, path: str | Path, fmt: str | None = None) -> None:
    fmt = fmt or detect_format(path)
    Path(path).write_text(dumps_csv(P) if fmt == "csv" else dumps_jsonl(P))


def to_jsonable(x):
    """Plain JSON values; exact rationals become their exact text."""
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if isinstance(x, Fraction):
        return format_coord(x)
    if isinstance(x, float):
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")
    if isinstance(x, (bool, int, str)) or x is None:
        return x
    if hasattr(x, "item"):
        return to_jsonable(x.item())
    return repr(x)


def dumps_report(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n"
