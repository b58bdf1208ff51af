"""Credential issuance: salted Pedersen leaves, Merkle root, BLS signature(s)."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from . import bls, crypto, merkle
from .bls import DOMAIN_CRED_ROOT, PrivateKey, PublicKey, Signature
from .errors import DecodeError, EmptyAggregateError, FormatError, InvalidCredentialError, ParameterError
from .formats import INT, TEXT, CredentialFormat, canonical_json, unhex
from .pedersen import attribute_to_scalar, commit, default_params, random_salt


@dataclass(frozen=True)
class IssuanceRecord:
    root: bytes
    signature: Signature
    issuer_keys: tuple
    format_id: str

    def verify(self) -> bool:
        return bls.aggregate_verify([(pk, self.root, DOMAIN_CRED_ROOT) for pk in self.issuer_keys], self.signature)

    def to_json(self) -> dict:
        return {
            "format_id": self.format_id,
            "root": self.root.hex(),
            "signature": self.signature.hex(),
            "issuer_pks": [pk.hex() for pk in self.issuer_keys],
        }

    @classmethod
    def from_json(cls, d: dict) -> "IssuanceRecord":
        try:
            return cls(
                unhex(d["root"], 32, "root"),
                Signature.from_bytes(unhex(d["signature"], 96, "signature")),
                tuple(PublicKey.from_bytes(unhex(h, 48, "issuer pk")) for h in d["issuer_pks"]),
                d["format_id"],
            )
        except (KeyError, TypeError) as exc:
            raise FormatError(f"malformed issuance record: {exc}") from None


@dataclass(frozen=True)
class Credential:
    format_id: str
    attributes: tuple  # ((name, value), ...) in format order
    salts: tuple
    root: bytes
    issuer_signature: Signature
    issuer_keys: tuple
    holder_key: PublicKey | None = None
    version_index: int = 0

    @property
    def names(self) -> list[str]:
        return [name for name, _ in self.attributes]

    @property
    def values(self) -> list:
        return [value for _, value in self.attributes]

    def value_of(self, name: str):
        for n, v in self.attributes:
            if n == name:
                return v
        raise FormatError(f"credential has no attribute {name!r}")

    def commitments(self, params=None) -> list:
        params = params or default_params()
        # instances are frozen, so the commitments can be cached per params object
        cached = self.__dict__.get("_commitments")
        if cached is None or cached[0] is not params:
            values = [
                commit(params, attribute_to_scalar(name, value), salt)
                for (name, value), salt in zip(self.attributes, self.salts)
            ]
            cached = (params, values)
            object.__setattr__(self, "_commitments", cached)
        return list(cached[1])

    def leaf_labels(self, params=None) -> list[bytes]:
        return [merkle.leaf_label(c) for c in self.commitments(params)]

    def tree(self, params=None) -> merkle.MerkleTree:
        return merkle.build(self.leaf_labels(params))

    def signers(self) -> list[PublicKey]:
        keys = list(self.issuer_keys)
        if self.holder_key is not None:
            keys.append(self.holder_key)
        return keys

    def to_json(self) -> dict:
        d = {
            "format_id": self.format_id,
            "attributes": [
                {"name": n, "type": INT if isinstance(v, int) else TEXT, "value": v} for n, v in self.attributes
            ],
            "salts": [crypto.scalar_to_bytes(s).hex() for s in self.salts],
            "root": self.root.hex(),
            "issuer_sig": self.issuer_signature.hex(),
            "issuer_pks": [pk.hex() for pk in self.issuer_keys],
        }
        if self.holder_key is not None:
            d["holder_pk"] = self.holder_key.hex()
        return d

    def to_bytes(self) -> bytes:
        if any(s is None for s in self.salts):
            raise InvalidCredentialError("credential still has unopened holder commitments")
        return canonical_json(self.to_json())

    @classmethod
    def from_json(cls, d: dict) -> "Credential":
        try:
            attrs = []
            for a in d["attributes"]:
                value = a["value"]
                if a["type"] == INT and (isinstance(value, bool) or not isinstance(value, int)):
                    raise FormatError(f"attribute {a['name']!r}: declared int, got {value!r}")
                if a["type"] == TEXT and not isinstance(value, str):
                    raise FormatError(f"attribute {a['name']!r}: declared text, got {value!r}")
                if a["type"] not in (INT, TEXT):
                    raise FormatError(f"attribute {a['name']!r}: unknown type {a['type']!r}")
                attrs.append((a["name"], value))
            salts = tuple(crypto.scalar_from_bytes(unhex(s, 32, "salt")) for s in d["salts"])
            holder = d.get("holder_pk")
            return cls(
                format_id=d["format_id"],
                attributes=tuple(attrs),
                salts=salts,
                root=unhex(d["root"], 32, "root"),
                issuer_signature=Signature.from_bytes(unhex(d["issuer_sig"], 96, "issuer_sig")),
                issuer_keys=tuple(PublicKey.from_bytes(unhex(h, 48, "issuer pk")) for h in d["issuer_pks"]),
                holder_key=PublicKey.from_bytes(unhex(holder, 48, "holder pk")) if holder else None,
            )
        except (KeyError, TypeError) as exc:
            raise FormatError(f"malformed credential: {exc}") from None
        except DecodeError as exc:
            raise FormatError(f"malformed credential: {exc}") from None

    @classmethod
    def from_bytes(cls, data: bytes) -> "Credential":
        return cls.from_json(json.loads(data))


@dataclass(frozen=True)
class CredentialBatch:
    versions: tuple
    records: tuple = field(default=())

    def __len__(self):
        return len(self.versions)

    def __iter__(self):
        return iter(self.versions)


def _leaves(fmt: CredentialFormat, values, salts, params, precommitted) -> list:
    out = []
    for f, v, s in zip(fmt.fields, values, salts):
        if f.name in precommitted:
            out.append(precommitted[f.name])
        else:
            out.append(commit(params, attribute_to_scalar(f.name, v), s))
    return out


def _issue_root(fmt, values, rng, params, precommitted):
    precommitted = dict(precommitted or {})
    for name in precommitted:
        fmt.index_of(name)
    if len(values) != len(fmt.fields):
        raise FormatError(f"format {fmt.format_id!r} expects {len(fmt.fields)} values, got {len(values)}")
    for f, v in zip(fmt.fields, values):
        if f.name not in precommitted:
            fmt.check_value(f.name, v)
    salts = [None if f.name in precommitted else random_salt(rng) for f in fmt.fields]
    values = [None if f.name in precommitted else v for f, v in zip(fmt.fields, values)]
    leaves = _leaves(fmt, values, salts, params, precommitted)
    root = merkle.build([merkle.leaf_label(c) for c in leaves]).root
    return values, salts, root


def issue_multi_issuer(fmt: CredentialFormat, values, issuer_sks, rng=None, params=None, precommitted=None):
    """Every issuer signs the same root; the credential carries the aggregate."""
    issuer_sks = list(issuer_sks)
    if not issuer_sks:
        raise EmptyAggregateError("at least one issuer key is required")
    params = params or default_params()
    values, salts, root = _issue_root(fmt, list(values), rng, params, precommitted)
    sig = bls.aggregate([bls.sign(sk, root, DOMAIN_CRED_ROOT) for sk in issuer_sks])
    pks = tuple(sk.public_key() for sk in issuer_sks)
    cred = Credential(
        format_id=fmt.format_id,
        attributes=tuple(zip(fmt.names, values)),
        salts=tuple(salts),
        root=root,
        issuer_signature=sig,
        issuer_keys=pks,
    )
    return cred, IssuanceRecord(root, sig, pks, fmt.format_id)


def issue(fmt: CredentialFormat, values, issuer_sk: PrivateKey, rng=None, params=None, precommitted=None):
    """Issue a credential; returns ``(credential, issuance_record)``.

    ``precommitted`` maps attribute names to commitments the holder made
    beforehand. Those leaves are used as given and their value and salt stay
    unknown to the issuer until the holder calls :func:`open_precommitted`.
    """
    return issue_multi_issuer(fmt, values, [issuer_sk], rng=rng, params=params, precommitted=precommitted)


def holder_precommit(fmt: CredentialFormat, values: dict, rng=None, params=None):
    """Holder side of issuance without issuer-known salts: ``(commitments, openings)``."""
    params = params or default_params()
    commitments, openings = {}, {}
    for name, value in values.items():
        fmt.check_value(name, value)
        salt = random_salt(rng)
        commitments[name] = commit(params, attribute_to_scalar(name, value), salt)
        openings[name] = (value, salt)
    return commitments, openings


def open_precommitted(cred: Credential, openings: dict, params=None) -> Credential:
    """Fill in holder-side openings and check the root still recomputes."""
    attrs, salts = list(cred.attributes), list(cred.salts)
    for i, (name, _) in enumerate(attrs):
        if name in openings:
            value, salt = openings[name]
            attrs[i] = (name, value)
            salts[i] = salt
    if any(s is None for s in salts):
        raise InvalidCredentialError("openings missing for some precommitted attributes")
    opened = replace(cred, attributes=tuple(attrs), salts=tuple(salts))
    if opened.tree(params).root != cred.root:
        raise InvalidCredentialError("openings do not match the issued commitments")
    return opened


def co_sign_holder(cred: Credential, holder_sk: PrivateKey) -> Credential:
    """Aggregate the holder's signature on the root into the credential signature."""
    if cred.holder_key is not None:
        raise InvalidCredentialError("credential is already co-signed by a holder")
    entries = [(pk, cred.root, DOMAIN_CRED_ROOT) for pk in cred.issuer_keys]
    if not bls.aggregate_verify(entries, cred.issuer_signature):
        raise InvalidCredentialError("issuer signature does not verify; refusing to co-sign")
    holder_sig = bls.sign(holder_sk, cred.root, DOMAIN_CRED_ROOT)
    return replace(
        cred,
        issuer_signature=bls.aggregate([cred.issuer_signature, holder_sig]),
        holder_key=holder_sk.public_key(),
    )


def issue_versions(fmt, values, issuer_sk, count: int, rng=None, params=None, registry=None) -> CredentialBatch:
    """``count`` independently salted copies of one credential.

    Each version gets its own root and record. If ``registry`` is given the
    records are written to it.
    """
    if count < 1:
        raise ParameterError("version count must be at least 1")
    versions, records = [], []
    for i in range(count):
        cred, rec = issue(fmt, values, issuer_sk, rng=rng, params=params)
        versions.append(replace(cred, version_index=i))
        records.append(rec)
        if registry is not None:
            registry.record_issuance(rec)
    return CredentialBatch(tuple(versions), tuple(records))


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    reason: str = "ok"

    def __bool__(self):
        return self.ok


def validate(cred: Credential, record: IssuanceRecord, params=None) -> ValidationResult:
    """Full-disclosure check of a credential against its public issuance record."""
    if any(s is None for s in cred.salts):
        return ValidationResult(False, "unopened-commitments")
    if cred.format_id != record.format_id:
        return ValidationResult(False, "format-mismatch")
    try:
        root = cred.tree(params).root
    except Exception:
        return ValidationResult(False, "unencodable-values")
    if root != cred.root:
        return ValidationResult(False, "root-mismatch")
    if root != record.root:
        return ValidationResult(False, "record-root-mismatch")
    if list(cred.issuer_keys) != list(record.issuer_keys):
        return ValidationResult(False, "issuer-keys-mismatch")
    entries = [(pk, root, DOMAIN_CRED_ROOT) for pk in cred.signers()]
    if not bls.aggregate_verify(entries, cred.issuer_signature):
        return ValidationResult(False, "bad-signature")
    return ValidationResult(True)
