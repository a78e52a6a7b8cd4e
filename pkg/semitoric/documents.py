"""
JSON documents: loading with schema checks, canonical serialization.

Kinds
- monoid: {"kind", "rank", "generators"}
- fan_with_groups: {"kind", "rank", "rays", "cones", "groups"?, "names"?}
- fan_with_monoids: {"kind", "rank", "rays", "cones", "monoids", "names"?}
- hom: {"kind", "rank", "target_rank"?, "matrix", "source"?, "target"?}

Cones are lists of ray indices; groups and monoids are keyed by the
comma-joined sorted indices ("" is the zero cone) or by an alias from
"names". Integers may be given as strings when they are large.
"""
from __future__ import annotations

import json
import logging
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from semitoric.cones import Fan, fan_from_max_cones, make_cone, perp_lattice
from semitoric.errors import ParseError, SchemaError
from semitoric.fans import FanWithGroups, FanWithMonoids
from semitoric.lattice import IntVec, LatticeHom, Sublattice
from semitoric.monoids import AffineMonoid, make_monoid

logger = logging.getLogger(__name__)

KINDS = ("monoid", "fan_with_groups", "fan_with_monoids", "hom")
_INTEGER = re.compile(r"^-?\d+$")


@dataclass
class HomBody:
    phi: LatticeHom
    source: "Document | None" = None
    target: "Document | None" = None


@dataclass
class Document:
    kind: str
    rank: int
    body: AffineMonoid | FanWithGroups | FanWithMonoids | HomBody
    names: dict[str, str] = field(default_factory=dict)

    def resolve(self, key: str) -> str:
        """Canonical cone key for a key or alias."""
        if key in self.names:
            return self.names[key]
        return canonical_key(key, "/cone")


def _pointer(*parts) -> str:
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in parts)


def canonical_key(key: str, path: str) -> str:
    text = str(key).strip()
    if not text:
        return ""
    try:
        indices = sorted(int(p) for p in text.split(","))
    except ValueError:
        raise SchemaError(path, f"'{key}' is not a cone key.") from None
    return ",".join(str(i) for i in indices)


def _integer(value: Any, path: str) -> int:
    if isinstance(value, bool):
        raise SchemaError(path, "expected an integer.")
    if isinstance(value, int):
        return value
    if isinstance(value, str) and _INTEGER.match(value.strip()):
        return int(value.strip())
    raise SchemaError(path, "expected an integer.")


def _vector(value: Any, length: int, path: str) -> IntVec:
    if not isinstance(value, list):
        raise SchemaError(path, "expected a list of integers.")
    if len(value) != length:
        raise SchemaError(path, f"expected {length} entries, got {len(value)}.")
    return tuple(_integer(x, f"{path}/{i}") for i, x in enumerate(value))


def _vectors(value: Any, length: int, path: str) -> list[IntVec]:
    if not isinstance(value, list):
        raise SchemaError(path, "expected a list of vectors.")
    return [_vector(v, length, f"{path}/{i}") for i, v in enumerate(value)]


def _require(raw: dict, name: str, path: str = "") -> Any:
    if name not in raw:
        raise SchemaError(_pointer(name) if not path else f"{path}{_pointer(name)}", "missing field.")
    return raw[name]


def _read_bytes(source: str | Path | bytes) -> tuple[bytes, Path | None]:
    if isinstance(source, (bytes, bytearray)):
        return bytes(source), None
    if str(source) == "-":
        return sys.stdin.buffer.read(), None
    path = Path(source)
    try:
        return path.read_bytes(), path.parent
    except OSError as exc:
        raise ParseError(f"Cannot read {path}: {exc.strerror}.") from exc


def _decode(data: bytes) -> Any:
    try:
        return json.loads(data.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise ParseError("Document is not valid UTF-8.") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"Invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}.") from exc


def load_document(
    source: str | Path | bytes, base_dir: Path | None = None, seen: frozenset[Path] = frozenset()
) -> Document:
    """
    Parse and check a document from a path, '-' for stdin, or raw bytes.
    `seen` holds the resolved paths of the documents referring to this one.
    """
    data, parent = _read_bytes(source)
    if parent is not None:
        seen = seen | {Path(source).resolve()}
    return parse_document(_decode(data), base_dir if base_dir is not None else parent, seen)


def parse_document(raw: Any, base_dir: Path | None = None, seen: frozenset[Path] = frozenset()) -> Document:
    if not isinstance(raw, dict):
        raise SchemaError("", "a document is a JSON object.")
    kind = _require(raw, "kind")
    if kind not in KINDS:
        raise SchemaError("/kind", f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}.")
    rank = _integer(_require(raw, "rank"), "/rank")
    if rank < 1:
        raise SchemaError("/rank", "rank must be positive.")

    if kind == "monoid":
        return Document(kind, rank, make_monoid(_vectors(_require(raw, "generators"), rank, "/generators"), rank))
    if kind == "hom":
        return Document(kind, rank, _parse_hom(raw, rank, base_dir, seen))

    fan, names = _parse_fan(raw, rank)
    if kind == "fan_with_groups":
        return Document(kind, rank, _parse_groups(raw, fan, names), names)
    return Document(kind, rank, _parse_monoids(raw, fan, names), names)


def _parse_fan(raw: dict, rank: int) -> tuple[Fan, dict[str, str]]:
    rays = _vectors(_require(raw, "rays"), rank, "/rays")
    cones_raw = _require(raw, "cones")
    if not isinstance(cones_raw, list):
        raise SchemaError("/cones", "expected a list of ray index lists.")
    cones = []
    for i, cone in enumerate(cones_raw):
        if not isinstance(cone, list):
            raise SchemaError(f"/cones/{i}", "expected a list of ray indices.")
        indices = [_integer(x, f"/cones/{i}/{j}") for j, x in enumerate(cone)]
        for j, index in enumerate(indices):
            if not 0 <= index < len(rays):
                raise SchemaError(f"/cones/{i}/{j}", f"ray index {index} is out of range.")
        cones.append(make_cone([rays[k] for k in indices], rank))
    fan = fan_from_max_cones(cones, rays=rays, ambient_dim=rank)

    names_raw = raw.get("names", {})
    if not isinstance(names_raw, dict):
        raise SchemaError("/names", "expected an object mapping aliases to cone keys.")
    names = {}
    for alias, key in names_raw.items():
        path = _pointer("names", alias)
        if not isinstance(key, str):
            raise SchemaError(path, "expected a cone key string.")
        canonical = canonical_key(key, path)
        if canonical not in fan.keys:
            raise SchemaError(path, f"'{key}' does not name a cone of the fan.")
        names[alias] = canonical
    return fan, names


def _keyed(raw: dict, field_name: str, fan: Fan, names: dict[str, str]) -> dict[str, tuple[str, Any]]:
    entries = raw.get(field_name, {})
    if not isinstance(entries, dict):
        raise SchemaError(_pointer(field_name), "expected an object keyed by cone.")
    result = {}
    for key, value in entries.items():
        path = _pointer(field_name, key)
        canonical = names.get(key)
        if canonical is None:
            canonical = canonical_key(key, path)
        if canonical not in fan.keys:
            raise SchemaError(path, f"'{key}' does not name a cone of the fan.")
        if canonical in result:
            raise SchemaError(path, f"cone '{canonical}' is given twice.")
        result[canonical] = (path, value)
    return result


def _parse_groups(raw: dict, fan: Fan, names: dict[str, str]) -> FanWithGroups:
    rank = fan.ambient_dim
    given = _keyed(raw, "groups", fan, names)
    full = Sublattice.full(rank)
    groups = {}
    for cone in fan.cones:
        key = fan.key(cone)
        if key in given:
            path, value = given[key]
            groups[key] = Sublattice.span(_vectors(value, rank, path), rank)
        else:
            groups[key] = perp_lattice(cone, full)
    if groups.get("") != full:
        logger.warning("Zero-cone group %s replaced by the full lattice.", groups.get("").to_list())
        groups[""] = full
    return FanWithGroups(fan, groups)


def _parse_monoids(raw: dict, fan: Fan, names: dict[str, str]) -> FanWithMonoids:
    rank = fan.ambient_dim
    _require(raw, "monoids")
    given = _keyed(raw, "monoids", fan, names)
    return FanWithMonoids(
        fan, {key: make_monoid(_vectors(value, rank, path), rank) for key, (path, value) in given.items()}
    )


def _parse_hom(raw: dict, rank: int, base_dir: Path | None, seen: frozenset[Path]) -> HomBody:
    target_rank = _integer(raw.get("target_rank", rank), "/target_rank")
    matrix_raw = _require(raw, "matrix")
    if not isinstance(matrix_raw, list) or len(matrix_raw) != target_rank:
        raise SchemaError("/matrix", f"expected {target_rank} rows.")
    rows = tuple(_vector(row, rank, f"/matrix/{i}") for i, row in enumerate(matrix_raw))
    body = HomBody(LatticeHom(rows, rank, target_rank))
    for side, expected in (("source", rank), ("target", target_rank)):
        if side not in raw:
            continue
        value = raw[side]
        if isinstance(value, str):
            path = Path(value)
            if not path.is_absolute() and base_dir is not None:
                path = base_dir / path
            if path.resolve() in seen:
                raise SchemaError(f"/{side}", f"{value!r} refers back to a document that is being loaded.")
            document = load_document(path, seen=seen)
        else:
            try:
                document = parse_document(value, base_dir, seen)
            except SchemaError as exc:
                raise SchemaError(f"/{side}{exc.path}", str(exc).split(": ", 1)[-1]) from exc
        if document.rank != expected:
            raise SchemaError(f"/{side}", f"expected a rank {expected} document, got rank {document.rank}.")
        setattr(body, side, document)
    return body


def _fan_payload(fan: Fan) -> dict:
    return {
        "rays": [list(r) for r in fan.rays],
        "cones": [sorted(fan.index_of(r) for r in c.rays) for c in fan.maximal_cones],
    }


def serialize(document: Document) -> dict:
    """Canonical payload: every group in HNF, every generator list sorted, every cone key canonical."""
    payload: dict[str, Any] = {"kind": document.kind, "rank": document.rank}
    body = document.body
    if isinstance(body, AffineMonoid):
        payload["generators"] = body.to_list()
    elif isinstance(body, FanWithGroups):
        payload.update(_fan_payload(body.fan))
        payload["groups"] = {key: group.to_list() for key, group in body.groups.items()}
    elif isinstance(body, FanWithMonoids):
        payload.update(_fan_payload(body.fan))
        payload["monoids"] = {key: monoid.to_list() for key, monoid in body.monoids.items()}
    else:
        payload["target_rank"] = body.phi.target_dim
        payload["matrix"] = [list(row) for row in body.phi.matrix]
        for side in ("source", "target"):
            if getattr(body, side) is not None:
                payload[side] = serialize(getattr(body, side))
    if document.names:
        payload["names"] = dict(document.names)
    return payload


def dump(payload: Any) -> str:
    """Canonical JSON text: sorted keys, no spaces, trailing newline."""
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"
