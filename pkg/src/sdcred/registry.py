"""Public registry of keys (with proofs of possession), formats and issuance records.

The file-backed store is an append-only log of canonical JSON lines, one
record per line, tagged with ``kind``. The in-memory index is rebuilt on load.
"""
from __future__ import annotations

import fcntl
import json
import os
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType

from . import bls
from .bls import PossessionProof, PublicKey
from .credential import IssuanceRecord
from .errors import (
    DuplicateRootError,
    FormatError,
    ImmutableFormatError,
    InvalidCredentialError,
    ParameterError,
    RegistryLockedError,
    RogueKeyError,
    UnknownFormatError,
    UntrustedKeyError,
)
from .formats import CredentialFormat, canonical_json, unhex

ROLES = ("issuer", "holder")
ENV_PATH = "SD_REGISTRY_PATH"


@dataclass(frozen=True)
class KeyRecord:
    owner_id: str
    role: str
    pk: PublicKey
    pop: PossessionProof

    def to_json(self) -> dict:
        return {
            "kind": "key",
            "owner_id": self.owner_id,
            "role": self.role,
            "pk": self.pk.hex(),
            "pop": self.pop.to_bytes().hex(),
        }

    @classmethod
    def from_json(cls, d: dict) -> "KeyRecord":
        return cls(
            d["owner_id"],
            d["role"],
            PublicKey.from_bytes(unhex(d["pk"], 48, "pk")),
            PossessionProof.from_bytes(unhex(d["pop"], 96, "pop")),
        )


class RegistryView:
    """Immutable snapshot used by verifiers."""

    def __init__(self, keys: dict, formats: dict, records: dict):
        self.keys = MappingProxyType(dict(keys))
        self.formats = MappingProxyType(dict(formats))
        self.records = MappingProxyType(dict(records))

    def lookup_root(self, root: bytes) -> IssuanceRecord | None:
        return self.records.get(bytes(root))

    def get_format(self, format_id: str) -> CredentialFormat:
        try:
            return self.formats[format_id]
        except KeyError:
            raise UnknownFormatError(f"format {format_id!r} is not registered") from None

    def key_record(self, pk: PublicKey) -> KeyRecord | None:
        return self.keys.get(pk.to_bytes())

    def require_key(self, pk: PublicKey, role: str | None = None) -> KeyRecord:
        rec = self.key_record(pk)
        if rec is None:
            raise UntrustedKeyError(f"public key {pk.hex()[:16]}... is not registered with a proof of possession")
        if role is not None and rec.role != role:
            raise UntrustedKeyError(f"public key of {rec.owner_id!r} is registered as {rec.role}, not {role}")
        return rec


def lookup_root(view: RegistryView, root: bytes) -> IssuanceRecord | None:
    return view.lookup_root(root)


class Registry:
    """Single-writer store. ``path=None`` keeps everything in memory."""

    def __init__(self, path: str | os.PathLike | None = None):
        self.path = Path(path) if path is not None else None
        self._keys: dict[bytes, KeyRecord] = {}
        self._formats: dict[str, CredentialFormat] = {}
        self._records: dict[bytes, IssuanceRecord] = {}
        self._lines: list[bytes] = []
        if self.path is not None and self.path.exists():
            self._load()

    @classmethod
    def from_env(cls) -> "Registry":
        return cls(os.environ.get(ENV_PATH, "registry.jsonl"))

    # -- persistence -----------------------------------------------------

    def _load(self) -> None:
        with open(self.path, "rb") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip(b"\n")
                if not line:
                    continue
                try:
                    d = json.loads(line)
                    kind = d.pop("kind")
                    if kind == "key":
                        self._apply_key(KeyRecord.from_json(d))
                    elif kind == "format":
                        self._apply_format(CredentialFormat.from_json(d))
                    elif kind == "issuance":
                        self._apply_record(IssuanceRecord.from_json(d))
                    else:
                        raise FormatError(f"unknown record kind {kind!r}")
                except (ValueError, KeyError) as exc:
                    raise FormatError(f"{self.path}:{lineno}: {exc}") from None
                self._lines.append(line)

    def _append(self, obj: dict) -> None:
        line = canonical_json(obj)
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "ab") as fh:
                try:
                    fcntl.flock(fh, fcntl.LOCK_EX | fcntl.LOCK_NB)
                except BlockingIOError:
                    raise RegistryLockedError(f"registry {self.path} is locked by another writer") from None
                try:
                    fh.write(line + b"\n")
                    fh.flush()
                finally:
                    fcntl.flock(fh, fcntl.LOCK_UN)
        self._lines.append(line)

    def dump_bytes(self) -> bytes:
        """Canonical serialization of the whole store."""
        return b"".join(line + b"\n" for line in self._lines)

    # -- index updates ---------------------------------------------------

    def _apply_key(self, rec: KeyRecord) -> None:
        self._keys[rec.pk.to_bytes()] = rec

    def _apply_format(self, fmt: CredentialFormat) -> None:
        self._formats[fmt.format_id] = fmt

    def _apply_record(self, rec: IssuanceRecord) -> None:
        self._records[rec.root] = rec

    # -- public operations -----------------------------------------------

    def register_key(self, owner_id: str, role: str, pk: PublicKey, pop: PossessionProof) -> KeyRecord:
        if role not in ROLES:
            raise ParameterError(f"role must be one of {ROLES}, got {role!r}")
        if not bls.verify_possession(pk, pop):
            raise RogueKeyError(f"proof of possession for {owner_id!r} does not verify")
        existing = self._keys.get(pk.to_bytes())
        if existing is not None:
            if (existing.owner_id, existing.role) != (owner_id, role):
                raise ParameterError("public key already registered to a different owner or role")
            return existing
        rec = KeyRecord(owner_id, role, pk, pop)
        self._append(rec.to_json())
        self._apply_key(rec)
        return rec

    def register_format(self, fmt: CredentialFormat) -> str:
        existing = self._formats.get(fmt.format_id)
        if existing is not None:
            if existing != fmt:
                raise ImmutableFormatError(f"format {fmt.format_id!r} is already registered with other fields")
            return fmt.format_id
        self._append({"kind": "format", **fmt.to_json()})
        self._apply_format(fmt)
        return fmt.format_id

    def record_issuance(self, record: IssuanceRecord) -> None:
        if record.format_id not in self._formats:
            raise UnknownFormatError(f"format {record.format_id!r} is not registered")
        if not record.issuer_keys:
            raise UntrustedKeyError("issuance record lists no issuer keys")
        for pk in record.issuer_keys:
            rec = self._keys.get(pk.to_bytes())
            if rec is None or rec.role != "issuer":
                raise UntrustedKeyError(f"issuer key {pk.hex()[:16]}... is not a registered issuer key")
        if record.root in self._records:
            raise DuplicateRootError(f"root {record.root.hex()} already recorded")
        if not record.verify():
            raise InvalidCredentialError("issuance record signature does not verify")
        self._append({"kind": "issuance", **record.to_json()})
        self._apply_record(record)

    def snapshot(self) -> RegistryView:
        return RegistryView(self._keys, self._formats, self._records)

    def lookup_root(self, root: bytes) -> IssuanceRecord | None:
        return self._records.get(bytes(root))

    def audit(self) -> list[str]:
        """Re-verify every stored record; returns a list of problems (empty when clean)."""
        problems = []
        for key in self._keys.values():
            if not bls.verify_possession(key.pk, key.pop):
                problems.append(f"key {key.owner_id}: proof of possession fails")
        for root, rec in self._records.items():
            if rec.format_id not in self._formats:
                problems.append(f"record {root.hex()}: unknown format {rec.format_id!r}")
            for pk in rec.issuer_keys:
                if pk.to_bytes() not in self._keys:
                    problems.append(f"record {root.hex()}: unregistered issuer key")
            if not rec.verify():
                problems.append(f"record {root.hex()}: signature does not verify")
        return problems
