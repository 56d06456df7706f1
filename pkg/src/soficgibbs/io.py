"""JSON loaders and writers for presentations, potentials and result tables."""

from __future__ import annotations

import csv
import hashlib
import io as _io
import json
import math
from pathlib import Path

from .errors import InvalidPotential, ParseError, PresentationError
from .potential import Potential
from .symbolic import Alphabet, SoficPresentation


def _read_json(source):
    """Parse a path, JSON text or already decoded object; returns ``(obj, raw_bytes)``."""
    if isinstance(source, dict):
        return source, json.dumps(source, sort_keys=True).encode()
    path = Path(source)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}", path=str(path)) from None
    try:
        return json.loads(raw.decode("utf-8")), raw
    except UnicodeDecodeError:
        raise ParseError(f"{path} is not UTF-8 text", path=str(path)) from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg}", path=str(path), line=exc.lineno, column=exc.colno) from None


def sha256_of(source) -> str:
    _, raw = _read_json(source)
    return hashlib.sha256(raw).hexdigest()


def presentation_from_dict(obj: dict, *, require_primitive: bool = True) -> SoficPresentation:
    """Build a presentation from its JSON object.

    Accepted shapes: explicit graph (``alphabet``, ``vertices``, ``edges``),
    forbidden words (``alphabet``, ``forbidden``), beta-shift
    (``beta_expansion_prefix``, optional ``period``) and ``{"full_shift": k}``.
    """
    if not isinstance(obj, dict):
        raise ParseError("presentation must be a JSON object")
    if "beta_expansion_prefix" in obj:
        return SoficPresentation.beta_shift(obj["beta_expansion_prefix"], int(obj.get("period", 0)),
                                            require_primitive=require_primitive)
    if "full_shift" in obj:
        return SoficPresentation.full_shift(obj.get("alphabet") or int(obj["full_shift"]))
    if "alphabet" not in obj:
        raise ParseError("presentation needs an 'alphabet' field")
    alphabet = Alphabet(tuple(obj["alphabet"]))
    if "forbidden" in obj:
        forb = obj["forbidden"]
        if not isinstance(forb, list):
            raise ParseError("'forbidden' must be a list of words")
        return SoficPresentation.from_forbidden(alphabet, forb, require_primitive=require_primitive)
    if "edges" in obj:
        verts = obj.get("vertices")
        edges = obj["edges"]
        if not isinstance(edges, list):
            raise ParseError("'edges' must be a list of [source, label, target]")
        if verts is None:
            seen = {}
            for e in edges:
                if isinstance(e, list) and len(e) == 3:
                    seen.setdefault(e[0], None)
                    seen.setdefault(e[2], None)
            verts = list(seen)
        try:
            edges = [tuple(e) for e in edges]
        except TypeError:
            raise ParseError("each edge must be a list [source, label, target]") from None
        return SoficPresentation(alphabet, verts, edges, require_primitive=require_primitive)
    raise ParseError("presentation needs 'edges', 'forbidden', 'beta_expansion_prefix' or 'full_shift'")


def load_presentation(source, *, require_primitive: bool = True) -> SoficPresentation:
    obj, _ = _read_json(source)
    return presentation_from_dict(obj, require_primitive=require_primitive)


def presentation_to_dict(P: SoficPresentation) -> dict:
    return {
        "alphabet": list(P.alphabet.symbols),
        "vertices": [str(v) for v in P.vertices],
        "edges": [[str(u), a, str(v)] for u, a, v in P.edges],
    }


def potential_from_dict(obj: dict, alphabet: Alphabet | None = None) -> Potential:
    """Build a potential from ``{"range", "table", "variation", ["tail"], ["default"]}``.

    ``{"zero": true}``, ``{"constant": c}`` and ``{"bernoulli": [p...]}`` are
    accepted as shorthands.  Missing table entries take ``default`` when given.
    """
    if not isinstance(obj, dict):
        raise ParseError("potential must be a JSON object")
    if "alphabet" in obj:
        own = Alphabet(tuple(obj["alphabet"]))
        if alphabet is not None and own != alphabet:
            raise InvalidPotential("potential alphabet differs from the subshift alphabet")
        alphabet = own
    if alphabet is None:
        raise InvalidPotential("potential needs an alphabet (from the file or the subshift)")
    if obj.get("zero"):
        return Potential.zero(alphabet)
    if "constant" in obj:
        return Potential.constant(alphabet, float(obj["constant"]))
    if "bernoulli" in obj:
        return Potential.bernoulli(alphabet, obj["bernoulli"])
    try:
        r = int(obj["range"])
        table = obj["table"]
    except KeyError as exc:
        raise InvalidPotential(f"potential is missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError):
        raise InvalidPotential("potential range must be an integer") from None
    if not isinstance(table, dict):
        raise InvalidPotential("potential table must map words to numbers")
    if "default" in obj:
        from itertools import product

        full = {alphabet.decode(w): float(obj["default"]) for w in product(range(len(alphabet)), repeat=r)}
        for k, v in table.items():
            full[alphabet.decode(alphabet.encode(k))] = v
        table = full
    try:
        table = {k: float(v) for k, v in table.items()}
    except (TypeError, ValueError):
        raise InvalidPotential("potential values must be numbers") from None
    tail = obj.get("tail", (0.0, 0.0))
    return Potential(alphabet, table, r, obj.get("variation"), tail, name=obj.get("name"))


def load_potential(source, alphabet: Alphabet | None = None) -> Potential:
    obj, _ = _read_json(source)
    return potential_from_dict(obj, alphabet)


def _plain(x):
    return x.item() if hasattr(x, "item") and not isinstance(x, str) else x


def _fmt(x) -> str:
    x = _plain(x)
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(x)
    return str(x)


def write_table(path, columns, rows, fmt: str = "csv", provenance: dict | None = None) -> str:
    """Write rows as CSV (header plus one line per row) or JSON with a provenance block."""
    if fmt == "csv":
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r.get(c)) for c in columns])
        text = buf.getvalue()
    elif fmt == "json":
        def clean(v):
            v = _plain(v)
            if isinstance(v, float) and not math.isfinite(v):
                return _fmt(v)
            return v
        payload = {"columns": list(columns),
                   "rows": [{c: clean(r.get(c)) for c in columns} for r in rows],
                   "provenance": provenance or {}}
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is not None:
        Path(path).write_text(text)
    return text


__all__ = [
    "PresentationError",
    "load_presentation",
    "load_potential",
    "presentation_from_dict",
    "presentation_to_dict",
    "potential_from_dict",
    "sha256_of",
    "write_table",
]
