"""Scene documents: labeled geometry with canonical, byte-stable JSON.

Floats are serialized with 17 significant digits so write -> read -> write
is byte-identical; keys are sorted and labels must be unique across all
object categories.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .confocal import ConfocalFamily, conic_at
from .conics import Conic
from .errors import SchemaError
from .poncelet import PonceletPair, PonceletPolygon, assemble_polygon
from .projective import HomPoint

SCHEMA_VERSION = 1


def _float_str(x: float) -> str:
    if not math.isfinite(x):
        raise SchemaError("scene documents only hold finite numbers")
    return format(x, ".17g")


def _emit(value, indent: int) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = []
        for key in sorted(value):
            if not isinstance(key, str):
                raise SchemaError("JSON object keys must be strings")
            items.append(f"{inner}{json.dumps(key)}: {_emit(value[key], indent + 1)}")
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        items = [f"{inner}{_emit(v, indent + 1)}" for v in value]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return _float_str(float(value))
    if isinstance(value, str):
        return json.dumps(value)
    if value is None:
        return "null"
    raise SchemaError(f"cannot serialize {type(value).__name__}")


def canonical_dumps(value) -> str:
    return _emit(value, 0) + "\n"


@dataclass
class SceneDocument:
    """Labeled polygons, conics (6-vector form), and point sets plus metadata."""

    metadata: dict = field(default_factory=dict)
    conics: dict = field(default_factory=dict)
    polygons: dict = field(default_factory=dict)
    points: dict = field(default_factory=dict)

    def validate(self) -> None:
        labels = list(self.conics) + list(self.polygons) + list(self.points)
        if len(labels) != len(set(labels)):
            raise SchemaError("scene labels must be unique across all categories")
        for label, vec in self.conics.items():
            if len(vec) != 6:
                raise SchemaError(f"conic {label!r} must be a 6-vector")
            _check_finite(vec, label)
        for label, verts in self.polygons.items():
            if len(verts) < 3:
                raise SchemaError(f"polygon {label!r} needs at least 3 vertices")
            for xy in verts:
                _check_finite(xy, label)
        for label, pts in self.points.items():
            for xy in pts:
                _check_finite(xy, label)

    def to_json_dict(self) -> dict:
        self.validate()
        return {
            "schema": SCHEMA_VERSION,
            "metadata": self.metadata,
            "conics": self.conics,
            "polygons": self.polygons,
            "points": self.points,
        }

    def dumps(self) -> str:
        return canonical_dumps(self.to_json_dict())

    def save(self, path) -> None:
        with open(path, "w") as handle:
            handle.write(self.dumps())

    @classmethod
    def from_json_dict(cls, data: dict) -> "SceneDocument":
        if not isinstance(data, dict) or data.get("schema") != SCHEMA_VERSION:
            raise SchemaError(f"unsupported or missing schema version (want {SCHEMA_VERSION})")
        doc = cls(
            metadata=data.get("metadata", {}),
            conics=data.get("conics", {}),
            polygons=data.get("polygons", {}),
            points=data.get("points", {}),
        )
        doc.validate()
        return doc

    @classmethod
    def load(cls, path) -> "SceneDocument":
        with open(path) as handle:
            return cls.from_json_dict(json.loads(handle.read()))


def _check_finite(values, label: str) -> None:
    for v in values:
        if not math.isfinite(float(v)):
            raise SchemaError(f"non-finite number in {label!r}")


def conic_to_list(c: Conic) -> list:
    return [float(v) for v in c.vec6]


def polygon_to_list(poly) -> list:
    return [[float(x), float(y)] for x, y in poly.affine]


def points_to_list(points) -> list:
    return [[float(x), float(y)] for x, y in (p.affine() for p in points)]


def family_from_metadata(meta: dict) -> ConfocalFamily:
    try:
        return ConfocalFamily(float(meta["a2"]), float(meta["b2"]))
    except KeyError as exc:
        raise SchemaError(f"metadata lacks {exc} for the confocal family") from exc


def pair_from_document(doc: SceneDocument) -> PonceletPair:
    meta = doc.metadata
    for key in ("n", "winding", "closure_error"):
        if key not in meta:
            raise SchemaError(f"metadata lacks {key!r}")
    if "outer" not in doc.conics or "inner" not in doc.conics:
        raise SchemaError("document lacks the outer/inner conic pair")
    return PonceletPair(
        outer=Conic.from_vec6(doc.conics["outer"]),
        inner=Conic.from_vec6(doc.conics["inner"]),
        n=int(meta["n"]),
        winding=int(meta["winding"]),
        closure_error=float(meta["closure_error"]),
    )


def polygon_from_document(doc: SceneDocument, label: str = "P") -> PonceletPolygon:
    if label not in doc.polygons:
        raise SchemaError(f"document lacks polygon {label!r}")
    pair = pair_from_document(doc)
    vertices = [HomPoint(x, y) for x, y in doc.polygons[label]]
    return assemble_polygon(pair, vertices)
