"""Selective-disclosure presentations over one or more credentials.

A presentation carries, per credential, the disclosed (value, salt) pairs,
range proofs for hidden integer attributes, and the Merkle nodes needed to
rebuild the root. One BLS aggregate covers every issuer signature on the
roots plus the holder's signature on a manifest of (roots, verifier nonce).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import bls, crypto, merkle
from .bls import DOMAIN_CRED_ROOT, DOMAIN_PRESENT, PrivateKey, PublicKey, Signature
from .credential import Credential
from .errors import (
    AttributeTypeError,
    DecodeError,
    FormatError,
    InvalidCredentialError,
    MalformedProofError,
    OutOfRangeError,
    SDError,
)
from .formats import INT, TEXT, canonical_json, unhex
from .pedersen import attribute_to_scalar, commit, default_params
from .rangeproof import RangeProof, RangeStatement, prove_range, verify_range

OFFLINE_NONCE = bytes(32)


def manifest_digest(roots, nonce: bytes) -> bytes:
    return crypto.sha256(b"MANIFEST", *[bytes(r) for r in roots], bytes(nonce))


# -- request ---------------------------------------------------------------

@dataclass(frozen=True)
class CredentialRequest:
    disclose: frozenset = frozenset()
    range_prove: dict = field(default_factory=dict)  # name -> (lo, hi, bits)

    def __post_init__(self):
        object.__setattr__(self, "disclose", frozenset(self.disclose))
        object.__setattr__(self, "range_prove", {k: tuple(v) for k, v in dict(self.range_prove).items()})
        overlap = self.disclose & set(self.range_prove)
        if overlap:
            raise FormatError(f"attributes both disclosed and range-proved: {sorted(overlap)}")


@dataclass(frozen=True)
class DisclosureRequest:
    credentials: tuple
    nonce: bytes

    def __post_init__(self):
        object.__setattr__(self, "credentials", tuple(self.credentials))
        if not isinstance(self.nonce, (bytes, bytearray)) or not self.nonce:
            raise FormatError("a non-empty nonce is required (use OFFLINE_NONCE for stored presentations)")

    @classmethod
    def from_json(cls, d: dict) -> "DisclosureRequest":
        try:
            items = []
            for c in d["credentials"]:
                ranges = {}
                for name, spec in c.get("range_prove", {}).items():
                    if isinstance(spec, dict):
                        spec = (spec["lo"], spec["hi"], spec["bits"])
                    ranges[name] = tuple(int(x) for x in spec)
                items.append(CredentialRequest(frozenset(c.get("disclose", [])), ranges))
            return cls(tuple(items), unhex(d["nonce"], what="nonce"))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, SDError):
                raise
            raise FormatError(f"malformed disclosure request: {exc}") from None

    def to_json(self) -> dict:
        return {
            "nonce": self.nonce.hex(),
            "credentials": [
                {
                    "disclose": sorted(c.disclose),
                    "range_prove": {k: list(v) for k, v in sorted(c.range_prove.items())},
                }
                for c in self.credentials
            ],
        }


# -- presentation data -----------------------------------------------------

@dataclass(frozen=True)
class RangedClaim:
    name: str
    statement: RangeStatement
    proof: RangeProof


@dataclass(frozen=True)
class CredentialSlice:
    format_id: str
    claimed_root: bytes
    disclosed: tuple  # ((name, value, salt), ...)
    ranged: tuple  # (RangedClaim, ...)
    aux_nodes: dict  # (level, index) -> digest
    issuer_keys: tuple
    holder_key: PublicKey | None = None  # set when the credential was co-signed

    def to_json(self) -> dict:
        d = {
            "format_id": self.format_id,
            "root": self.claimed_root.hex(),
            "disclosed": [
                {
                    "name": n,
                    "type": INT if isinstance(v, int) else TEXT,
                    "value": v,
                    "salt": crypto.scalar_to_bytes(s).hex(),
                }
                for n, v, s in self.disclosed
            ],
            "ranged": [
                {
                    "name": rc.name,
                    "commitment": crypto.g1_to_bytes(rc.statement.commitment).hex(),
                    "lo": rc.statement.lo,
                    "hi": rc.statement.hi,
                    "bits": rc.statement.bits,
                    "proof": rc.proof.to_bytes().hex(),
                }
                for rc in self.ranged
            ],
            "aux_nodes": [
                {"level": lvl, "index": idx, "digest": self.aux_nodes[(lvl, idx)].hex()}
                for lvl, idx in sorted(self.aux_nodes)
            ],
            "issuer_pks": [pk.hex() for pk in self.issuer_keys],
        }
        if self.holder_key is not None:
            d["holder_pk"] = self.holder_key.hex()
        return d

    @classmethod
    def from_json(cls, d: dict) -> "CredentialSlice":
        disclosed = []
        for e in d["disclosed"]:
            v = e["value"]
            if e["type"] == INT and (isinstance(v, bool) or not isinstance(v, int)):
                raise FormatError(f"disclosed {e['name']!r}: declared int, got {v!r}")
            if e["type"] == TEXT and not isinstance(v, str):
                raise FormatError(f"disclosed {e['name']!r}: declared text, got {v!r}")
            if e["type"] not in (INT, TEXT):
                raise FormatError(f"disclosed {e['name']!r}: unknown type")
            disclosed.append((e["name"], v, crypto.scalar_from_bytes(unhex(e["salt"], 32, "salt"))))
        ranged = []
        for e in d["ranged"]:
            stmt = RangeStatement(
                crypto.g1_from_bytes(unhex(e["commitment"], 48, "commitment")), e["lo"], e["hi"], e["bits"]
            )
            ranged.append(RangedClaim(e["name"], stmt, RangeProof.from_bytes(unhex(e["proof"], what="proof"))))
        aux = {}
        for e in d["aux_nodes"]:
            key = (int(e["level"]), int(e["index"]))
            if key in aux:
                raise MalformedProofError(f"duplicate auxiliary node {key}")
            aux[key] = unhex(e["digest"], 32, "aux digest")
        holder = d.get("holder_pk")
        return cls(
            format_id=d["format_id"],
            claimed_root=unhex(d["root"], 32, "root"),
            disclosed=tuple(disclosed),
            ranged=tuple(ranged),
            aux_nodes=aux,
            issuer_keys=tuple(PublicKey.from_bytes(unhex(h, 48, "issuer pk")) for h in d["issuer_pks"]),
            holder_key=PublicKey.from_bytes(unhex(holder, 48, "holder pk")) if holder else None,
        )


@dataclass(frozen=True)
class Presentation:
    slices: tuple
    holder_key: PublicKey
    nonce: bytes
    aggregated_signature: Signature

    def roots(self) -> list[bytes]:
        return [s.claimed_root for s in self.slices]

    def signature_entries(self, nonce: bytes | None = None) -> list:
        """(pk, message, domain) triples the aggregate must verify against."""
        nonce = self.nonce if nonce is None else nonce
        entries = []
        for s in self.slices:
            entries += [(pk, s.claimed_root, DOMAIN_CRED_ROOT) for pk in s.issuer_keys]
            if s.holder_key is not None:
                entries.append((s.holder_key, s.claimed_root, DOMAIN_CRED_ROOT))
        entries.append((self.holder_key, manifest_digest(self.roots(), nonce), DOMAIN_PRESENT))
        return entries

    def to_json(self) -> dict:
        return {
            "nonce": self.nonce.hex(),
            "holder_pk": self.holder_key.hex(),
            "agg_sig": self.aggregated_signature.hex(),
            "slices": [s.to_json() for s in self.slices],
        }

    def to_bytes(self) -> bytes:
        return canonical_json(self.to_json())

    @classmethod
    def from_json(cls, d: dict) -> "Presentation":
        try:
            return cls(
                slices=tuple(CredentialSlice.from_json(s) for s in d["slices"]),
                holder_key=PublicKey.from_bytes(unhex(d["holder_pk"], 48, "holder_pk")),
                nonce=unhex(d["nonce"], what="nonce"),
                aggregated_signature=Signature.from_bytes(unhex(d["agg_sig"], 96, "agg_sig")),
            )
        except (KeyError, TypeError) as exc:
            raise FormatError(f"malformed presentation: {exc}") from None
        except DecodeError as exc:
            raise FormatError(f"malformed presentation: {exc}") from None

    @classmethod
    def from_bytes(cls, data: bytes) -> "Presentation":
        try:
            return cls.from_json(json.loads(data))
        except json.JSONDecodeError as exc:
            raise FormatError(f"presentation is not JSON: {exc}") from None


# -- building --------------------------------------------------------------

def _check_credential(cred: Credential, params) -> None:
    if any(s is None for s in cred.salts):
        raise InvalidCredentialError("credential has unopened commitments")
    if cred.tree(params).root != cred.root:
        raise InvalidCredentialError(f"credential {cred.format_id!r}: root does not recompute")
    entries = [(pk, cred.root, DOMAIN_CRED_ROOT) for pk in cred.signers()]
    if not bls.aggregate_verify(entries, cred.issuer_signature):
        raise InvalidCredentialError(f"credential {cred.format_id!r}: signature does not verify")


def _build_slice(cred: Credential, req: CredentialRequest, params, rng) -> CredentialSlice:
    names = cred.names
    for name in list(req.disclose) + list(req.range_prove):
        if name not in names:
            raise FormatError(f"attribute {name!r} not present in credential {cred.format_id!r}")
    commitments = cred.commitments(params)
    tree = merkle.build([merkle.leaf_label(c) for c in commitments])

    disclosed, ranged, shown = [], [], []
    for i, ((name, value), salt) in enumerate(zip(cred.attributes, cred.salts)):
        if name in req.disclose:
            disclosed.append((name, value, salt))
            shown.append(i)
        elif name in req.range_prove:
            if not isinstance(value, int) or isinstance(value, bool):
                raise AttributeTypeError(f"range proof requested on non-integer attribute {name!r}")
            lo, hi, bits = req.range_prove[name]
            stmt = RangeStatement(commitments[i], lo, hi, bits)
            try:
                proof = prove_range(params, value, salt, stmt, rng=rng)
            except OutOfRangeError:
                raise OutOfRangeError(f"{name}: value outside requested range [{lo}, {hi}]") from None
            ranged.append(RangedClaim(name, stmt, proof))
            shown.append(i)
    mp = merkle.prove_multi(tree, shown)
    return CredentialSlice(
        format_id=cred.format_id,
        claimed_root=cred.root,
        disclosed=tuple(disclosed),
        ranged=tuple(ranged),
        aux_nodes=dict(mp.auxiliary_nodes),
        issuer_keys=tuple(cred.issuer_keys),
        holder_key=cred.holder_key,
    )


def build(creds, holder_sk: PrivateKey, request: DisclosureRequest, rng=None, params=None) -> Presentation:
    creds = list(creds)
    params = params or default_params()
    if len(creds) != len(request.credentials):
        raise FormatError(f"request covers {len(request.credentials)} credentials, got {len(creds)}")
    holder_pk = holder_sk.public_key()
    slices = []
    for cred, req in zip(creds, request.credentials):
        _check_credential(cred, params)
        if cred.holder_key is not None and cred.holder_key != holder_pk:
            raise InvalidCredentialError(f"credential {cred.format_id!r} is bound to a different holder")
        slices.append(_build_slice(cred, req, params, rng))
    digest = manifest_digest([s.claimed_root for s in slices], request.nonce)
    holder_sig = bls.sign(holder_sk, digest, DOMAIN_PRESENT)
    agg = bls.aggregate([c.issuer_signature for c in creds] + [holder_sig])
    return Presentation(tuple(slices), holder_pk, bytes(request.nonce), agg)


# -- verification ----------------------------------------------------------

@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    slice_index: int | None = None
    detail: str = ""

    def __str__(self):
        where = f"[slice {self.slice_index}] " if self.slice_index is not None else ""
        status = "PASS" if self.ok else "FAIL"
        return f"{status} {where}{self.name}" + (f": {self.detail}" if self.detail else "")


@dataclass
class VerificationReport:
    checks: list = field(default_factory=list)

    def add(self, name, ok, slice_index=None, detail=""):
        self.checks.append(Check(name, bool(ok), slice_index, detail))

    @property
    def ok(self) -> bool:
        return bool(self.checks) and all(c.ok for c in self.checks)

    def failed(self) -> list:
        return [c for c in self.checks if not c.ok]

    def failed_names(self) -> set:
        return {c.name for c in self.failed()}

    def __bool__(self):
        return self.ok

    def lines(self) -> list[str]:
        return [str(c) for c in self.checks]


def _verify_slice(j: int, s: CredentialSlice, view, params, report: VerificationReport) -> None:
    fmt = view.get_format(s.format_id)
    for pk in s.issuer_keys:
        view.require_key(pk, "issuer")
    if s.holder_key is not None:
        view.require_key(s.holder_key, "holder")

    # structure: names exist once, types agree with the registered format
    labels = {}
    problems = []
    seen = set()
    for name, value, salt in s.disclosed:
        if name in seen or name not in fmt.names:
            problems.append(f"unexpected or repeated attribute {name!r}")
            continue
        seen.add(name)
        try:
            fmt.check_value(name, value)
            labels[fmt.index_of(name)] = merkle.leaf_label(commit(params, attribute_to_scalar(name, value), salt))
        except SDError as exc:
            problems.append(str(exc))
    for rc in s.ranged:
        if rc.name in seen or rc.name not in fmt.names:
            problems.append(f"unexpected or repeated attribute {rc.name!r}")
            continue
        seen.add(rc.name)
        if fmt.field(rc.name).type != INT:
            problems.append(f"range proof on non-integer attribute {rc.name!r}")
            continue
        labels[fmt.index_of(rc.name)] = merkle.leaf_label(rc.statement.commitment)
    report.add("structure", not problems, j, "; ".join(problems))

    # (1) range proofs against the very commitments that sit in the leaves
    for rc in s.ranged:
        try:
            ok = verify_range(params, rc.statement, rc.proof)
            detail = f"{rc.name} in [{rc.statement.lo}, {rc.statement.hi}]"
        except MalformedProofError as exc:
            ok, detail = False, f"{rc.name}: {exc}"
        report.add("range_proof", ok, j, detail)

    # (2)+(3) leaf labels and root reconstruction
    mp = merkle.MultiProof(tuple(sorted(labels)), dict(s.aux_nodes))
    try:
        root = merkle.recompute_root(labels, mp, len(fmt))
        report.add("root_recompute", root == s.claimed_root, j, "" if root == s.claimed_root else "root mismatch")
    except MalformedProofError as exc:
        report.add("root_recompute", False, j, str(exc))

    # (4) issuance record
    record = view.lookup_root(s.claimed_root)
    if record is None:
        report.add("root_registered", False, j, "no issuance record for root")
    elif record.format_id != s.format_id or list(record.issuer_keys) != list(s.issuer_keys):
        report.add("root_registered", False, j, "issuance record disagrees with slice")
    else:
        report.add("root_registered", True, j)


def verify(p: Presentation, view, nonce: bytes | None = None, params=None) -> VerificationReport:
    """Run every check and report each outcome; nothing short-circuits.

    ``nonce`` is the verifier's own challenge; ``None`` accepts the nonce
    carried in the presentation (offline use only).
    """
    params = params or default_params()
    expected = p.nonce if nonce is None else bytes(nonce)
    report = VerificationReport()
    if not p.slices:
        report.add("structure", False, None, "presentation has no credential slices")
    view.require_key(p.holder_key, "holder")
    for j, s in enumerate(p.slices):
        _verify_slice(j, s, view, params, report)

    # holder binding on co-signed credentials
    bound_ok = all(s.holder_key is None or s.holder_key == p.holder_key for s in p.slices)
    report.add("holder_binding", bound_ok, None, "" if bound_ok else "credential bound to a different holder")

    report.add("nonce", p.nonce == expected, None, "" if p.nonce == expected else "presentation nonce differs")
    sig_ok = bls.aggregate_verify(p.signature_entries(expected), p.aggregated_signature)
    report.add("aggregate_signature", sig_ok, None, "" if sig_ok else "issuer/holder aggregate signature invalid")
    return report


def verify_report_is_binding(p: Presentation) -> bool:
    """Did ``p.holder_key`` take part in the aggregate, and does it match every co-signed credential?"""
    if any(s.holder_key is not None and s.holder_key != p.holder_key for s in p.slices):
        return False
    return bls.aggregate_verify(p.signature_entries(), p.aggregated_signature)
