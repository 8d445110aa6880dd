"""JSON interchange for codes and repair schemes."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .base_code import BaseCode
from .errors import ParameterError, ShapeError
from .gf import FieldCtx
from .linalg import GfMatrix
from .piggyback import LINEBACK, PIGGYBACK, PiggybackCode
from .repair import RepairScheme


class ParseError(ValueError):
    """A code or scheme file is malformed; the message names the field."""


def _render(obj: Any, indent: int = 0) -> str:
    # Lists of scalars stay on one line so matrices read row by row.
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}  {json.dumps(k)}: {_render(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, list):
        if all(not isinstance(v, (list, dict)) for v in obj):
            return json.dumps(obj)
        items = [pad + "  " + _render(v, indent + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    return json.dumps(obj)


def dumps(obj: Any) -> str:
    return _render(obj) + "\n"


def code_to_dict(code: PiggybackCode) -> dict:
    piggy = [
        {"i": i, "j": j, "matrix": m.tolist()}
        for (i, j), m in sorted(code.piggy.items())
        if not m.is_zero()
    ]
    return {
        "q": code.q,
        "n": code.n,
        "k": code.k,
        "t": code.t,
        "kind": code.kind,
        "F": code.F.tolist(),
        "piggy": piggy,
    }


def scheme_to_dict(scheme: RepairScheme) -> dict:
    return {
        "failed": scheme.failed,
        "repair_set": sorted(scheme.repair_set),
        "matrices": [w.tolist() for w in scheme.matrices],
    }


def _field(doc: dict, name: str, kind: type, where: str) -> Any:
    if name not in doc:
        raise ParseError(f"{where}: missing field {name!r}")
    val = doc[name]
    if kind is int and (isinstance(val, bool) or not isinstance(val, int)):
        raise ParseError(f"{where}: field {name!r} must be an integer, got {val!r}")
    if kind is not int and not isinstance(val, kind):
        raise ParseError(f"{where}: field {name!r} must be {kind.__name__}, got {type(val).__name__}")
    return val


def _int_matrix(val: Any, rows: int, cols: int, q: int, where: str) -> list[list[int]]:
    if not isinstance(val, list) or len(val) != rows:
        raise ParseError(f"{where}: expected {rows} rows")
    for r, row in enumerate(val):
        if not isinstance(row, list) or len(row) != cols:
            raise ParseError(f"{where}[{r}]: expected {cols} entries")
        for c, v in enumerate(row):
            if isinstance(v, bool) or not isinstance(v, int) or not 0 <= v < q:
                raise ParseError(f"{where}[{r}][{c}]: {v!r} is not a residue mod {q}")
    return val


def _load_json(text: str, source: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{source}: top level must be a JSON object")
    return doc


def code_from_dict(doc: dict, source: str = "code") -> PiggybackCode:
    q = _field(doc, "q", int, source)
    n = _field(doc, "n", int, source)
    k = _field(doc, "k", int, source)
    t = _field(doc, "t", int, source)
    kind = doc.get("kind", PIGGYBACK)
    if kind not in (PIGGYBACK, LINEBACK):
        raise ParseError(f"{source}: field 'kind' must be {PIGGYBACK!r} or {LINEBACK!r}, got {kind!r}")
    try:
        field = FieldCtx(q)
    except ValueError as exc:
        raise ParseError(f"{source}: field 'q': {exc}") from exc
    f = _int_matrix(_field(doc, "F", list, source), k, n, q, f"{source}: F")
    piggy = {}
    for idx, entry in enumerate(_field(doc, "piggy", list, source)):
        where = f"{source}: piggy[{idx}]"
        if not isinstance(entry, dict):
            raise ParseError(f"{where}: must be an object")
        i = _field(entry, "i", int, where)
        j = _field(entry, "j", int, where)
        if (i, j) in piggy:
            raise ParseError(f"{where}: duplicate piggyback index ({i},{j})")
        piggy[(i, j)] = GfMatrix(field, _int_matrix(_field(entry, "matrix", list, where), k, n, q, f"{where}.matrix"))
    return PiggybackCode(BaseCode(GfMatrix(field, f)), t, piggy, kind)


def scheme_from_dict(doc: dict, code: PiggybackCode, source: str = "scheme") -> RepairScheme:
    failed = _field(doc, "failed", int, source)
    rs = _field(doc, "repair_set", list, source)
    if any(isinstance(v, bool) or not isinstance(v, int) for v in rs):
        raise ParseError(f"{source}: field 'repair_set' must list node indices")
    mats = _field(doc, "matrices", list, source)
    if len(mats) != code.t:
        raise ParseError(f"{source}: expected {code.t} matrices, got {len(mats)}")
    parsed = tuple(
        GfMatrix(code.field, _int_matrix(m, code.n, code.t, code.q, f"{source}: matrices[{j}]"))
        for j, m in enumerate(mats)
    )
    try:
        return RepairScheme(code, failed, frozenset(rs), parsed)
    except ShapeError as exc:
        raise ParseError(f"{source}: {exc}") from exc


def read_code(path: str | Path) -> PiggybackCode:
    path = Path(path)
    doc = _load_json(path.read_text(encoding="utf-8"), str(path))
    try:
        return code_from_dict(doc, str(path))
    except ParameterError:
        raise
    except ShapeError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def read_scheme(path: str | Path, code: PiggybackCode) -> RepairScheme:
    path = Path(path)
    return scheme_from_dict(_load_json(path.read_text(encoding="utf-8"), str(path)), code, str(path))


def write_code(path: str | Path, code: PiggybackCode) -> None:
    Path(path).write_text(dumps(code_to_dict(code)), encoding="utf-8")


def write_scheme(path: str | Path, scheme: RepairScheme) -> None:
    Path(path).write_text(dumps(scheme_to_dict(scheme)), encoding="utf-8")
