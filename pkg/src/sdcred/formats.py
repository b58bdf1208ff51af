"""Registered credential formats and canonical JSON helpers."""
from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import FormatError
from .pedersen import MAX_INT_ATTRIBUTE

INT = "int"
TEXT = "text"
FIELD_TYPES = (INT, TEXT)


def canonical_json(obj) -> bytes:
    """UTF-8, sorted keys, no insignificant whitespace."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def unhex(value: str, size: int | None = None, what: str = "value") -> bytes:
    if not isinstance(value, str):
        raise FormatError(f"{what}: expected hex string")
    try:
        raw = bytes.fromhex(value)
    except ValueError:
        raise FormatError(f"{what}: not valid hex") from None
    if value != raw.hex():
        raise FormatError(f"{what}: hex must be lowercase")
    if size is not None and len(raw) != size:
        raise FormatError(f"{what}: expected {size} bytes, got {len(raw)}")
    return raw


@dataclass(frozen=True)
class FieldSpec:
    name: str
    type: str
    range_hint: tuple | None = None  # (lo, hi, bits)

    def to_json(self) -> dict:
        d = {"name": self.name, "type": self.type}
        if self.range_hint is not None:
            d["range_hint"] = list(self.range_hint)
        return d


@dataclass(frozen=True)
class CredentialFormat:
    """Ordered attribute schema; field order fixes Merkle leaf positions."""

    format_id: str
    fields: tuple

    def __post_init__(self):
        if not self.format_id or not isinstance(self.format_id, str):
            raise FormatError("format_id must be a non-empty string")
        fields = tuple(f if isinstance(f, FieldSpec) else FieldSpec(*f) for f in self.fields)
        object.__setattr__(self, "fields", fields)
        if not fields:
            raise FormatError(f"format {self.format_id!r} has no fields")
        names = [f.name for f in fields]
        if len(set(names)) != len(names):
            raise FormatError(f"format {self.format_id!r} has duplicate field names")
        for f in fields:
            if f.type not in FIELD_TYPES:
                raise FormatError(f"field {f.name!r}: unknown type {f.type!r}")
            if f.range_hint is not None and f.type != INT:
                raise FormatError(f"field {f.name!r}: range hint on a non-integer field")

    @property
    def names(self) -> list[str]:
        return [f.name for f in self.fields]

    def __len__(self):
        return len(self.fields)

    def index_of(self, name: str) -> int:
        for i, f in enumerate(self.fields):
            if f.name == name:
                return i
        raise FormatError(f"attribute {name!r} not in format {self.format_id!r}")

    def field(self, name: str) -> FieldSpec:
        return self.fields[self.index_of(name)]

    def check_value(self, name: str, value) -> None:
        ftype = self.field(name).type
        if ftype == INT:
            if isinstance(value, bool) or not isinstance(value, int):
                raise FormatError(f"{name}: expected integer value")
            if not 0 <= value < MAX_INT_ATTRIBUTE:
                raise FormatError(f"{name}: integer outside [0, 2^64)")
        elif not isinstance(value, str):
            raise FormatError(f"{name}: expected text value")

    def check_values(self, values) -> None:
        if len(values) != len(self.fields):
            raise FormatError(f"format {self.format_id!r} expects {len(self.fields)} values, got {len(values)}")
        for f, v in zip(self.fields, values):
            self.check_value(f.name, v)

    def to_json(self) -> dict:
        return {"format_id": self.format_id, "fields": [f.to_json() for f in self.fields]}

    @classmethod
    def from_json(cls, d: dict) -> "CredentialFormat":
        try:
            fields = [
                FieldSpec(f["name"], f["type"], tuple(f["range_hint"]) if f.get("range_hint") else None)
                for f in d["fields"]
            ]
            return cls(d["format_id"], tuple(fields))
        except (KeyError, TypeError) as exc:
            raise FormatError(f"malformed format description: {exc}") from None
