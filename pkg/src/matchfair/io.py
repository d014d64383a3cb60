"""JSON file formats.

Every rational is written as a ``"num/den"`` string; on input plain integers
are accepted too.  Float literals are rejected so nothing is rounded on the
way in.

Instance file::

    {"agents": ["i", "i'"], "items": ["j", "j'"],
     "utilities": [["-1/1", "-10/1"], ["0/1", "-1/1"]],
     "demands": ["1/1", "1/1"]}

Allocation, price and earnings files hold a single key each:
``{"allocation": [[...], ...]}``, ``{"prices": [...]}``, ``{"earnings": [...]}``.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any

from .core import Instance, MatchfairError, format_rational, to_fraction, validate_instance
from .transforms import AffineRecord


class ParseError(MatchfairError, ValueError):
    pass


class _FloatLiteral(str):
    pass


def _reject_constant(name):
    raise ValueError(f"non-finite literal {name} is not a rational")


def loads(text: str, source: str = "<string>") -> Any:
    try:
        return json.loads(text, parse_float=_FloatLiteral, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    except ValueError as exc:
        raise ParseError(f"{source}: {exc}") from None


def read_json(path) -> Any:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None
    return loads(text, str(path))


def _rational(value, where: str) -> Fraction:
    if isinstance(value, _FloatLiteral):
        raise ParseError(f"{where}: float literal {value} is not exact; write it as \"num/den\"")
    try:
        return to_fraction(value)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"{where}: {exc}") from None


def _vector(values, where: str) -> tuple[Fraction, ...]:
    if not isinstance(values, list):
        raise ParseError(f"{where}: expected a list")
    return tuple(_rational(v, f"{where}[{k}]") for k, v in enumerate(values))


def _matrix(rows, where: str):
    if not isinstance(rows, list):
        raise ParseError(f"{where}: expected a list of rows")
    return tuple(_vector(r, f"{where}[{i}]") for i, r in enumerate(rows))


def _field(doc, key: str, source: str):
    if not isinstance(doc, dict) or key not in doc:
        raise ParseError(f"{source}: missing key {key!r}")
    return doc[key]


def instance_from_doc(doc, source: str = "<instance>") -> Instance:
    u = _matrix(_field(doc, "utilities", source), f"{source}: utilities")
    demands = doc.get("demands")
    d = _vector(demands, f"{source}: demands") if demands is not None else None
    agents = doc.get("agents")
    items = doc.get("items")
    try:
        inst = Instance(
            u,
            d,
            tuple(str(a) for a in agents) if agents is not None else None,
            tuple(str(g) for g in items) if items is not None else None,
        )
        return validate_instance(inst)
    except MatchfairError as exc:
        raise ParseError(f"{source}: {exc}") from None


def instance_to_doc(inst: Instance, **extra) -> dict:
    doc = {
        "agents": list(inst.agent_names()),
        "items": list(inst.item_names()),
        "utilities": [[format_rational(v) for v in row] for row in inst.utilities],
        "demands": [format_rational(v) for v in inst.demands],
    }
    doc.update(extra)
    return doc


def read_instance(path) -> tuple[Instance, dict]:
    doc = read_json(path)
    return instance_from_doc(doc, str(path)), doc


def read_allocation(path):
    return _matrix(_field(read_json(path), "allocation", str(path)), f"{path}: allocation")


def read_vector(path, key: str):
    return _vector(_field(read_json(path), key, str(path)), f"{path}: {key}")


def read_records(path) -> tuple[AffineRecord, ...]:
    recs = _field(read_json(path), "records", str(path))
    return tuple(
        AffineRecord(_rational(r["offset"], f"{path}: records[{k}].offset"), _rational(r["width"], f"{path}: records[{k}].width"))
        for k, r in enumerate(recs)
    )


def to_plain(obj) -> Any:
    """Recursively convert to JSON-ready values, rationals as ``"num/den"``."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, int):
        return obj
    if isinstance(obj, float):
        return repr(obj)
    if isinstance(obj, AffineRecord):
        return {"offset": format_rational(obj.offset), "width": format_rational(obj.width)}
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def digest(inst: Instance) -> str:
    canonical = json.dumps(instance_to_doc(inst), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def write_atomic(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
