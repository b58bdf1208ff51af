"""BLS signatures on BLS12-381, public keys in G1 and signatures in G2.

Aggregation over identical messages is only safe for keys that came with a
proof of possession; the registry refuses keys whose PoP does not verify.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

from . import crypto
from .errors import DecodeError, EmptyAggregateError

DOMAIN_CRED_ROOT = b"CRED-ROOT"
DOMAIN_PRESENT = b"PRESENT"
DOMAIN_POP = b"POP"


@dataclass(frozen=True, repr=False)
class PrivateKey:
    x: int

    def __post_init__(self):
        if not 0 < self.x < crypto.R:
            raise ValueError("private key must satisfy 0 < x < R")

    def to_bytes(self) -> bytes:
        return crypto.scalar_to_bytes(self.x)

    @classmethod
    def from_bytes(cls, data: bytes) -> "PrivateKey":
        x = crypto.scalar_from_bytes(data)
        if x == 0:
            raise DecodeError("zero is not a valid private key")
        return cls(x)

    def public_key(self) -> "PublicKey":
        return PublicKey(crypto.mul(crypto.g1_generator(), self.x))

    def __repr__(self):
        return "PrivateKey(<redacted>)"


@dataclass(frozen=True)
class PublicKey:
    point: crypto.G1

    def to_bytes(self) -> bytes:
        return crypto.g1_to_bytes(self.point)

    @classmethod
    def from_bytes(cls, data: bytes) -> "PublicKey":
        p = crypto.g1_from_bytes(data)
        if p == crypto.g1_identity():
            raise DecodeError("identity is not a valid public key")
        return cls(p)

    def hex(self) -> str:
        return self.to_bytes().hex()

    def __hash__(self):
        return hash(self.to_bytes())

    def __eq__(self, other):
        return isinstance(other, PublicKey) and self.to_bytes() == other.to_bytes()


@dataclass(frozen=True)
class Signature:
    point: crypto.G2

    def to_bytes(self) -> bytes:
        return crypto.g2_to_bytes(self.point)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Signature":
        return cls(crypto.g2_from_bytes(data))

    def hex(self) -> str:
        return self.to_bytes().hex()

    def __hash__(self):
        return hash(self.to_bytes())

    def __eq__(self, other):
        return isinstance(other, Signature) and self.to_bytes() == other.to_bytes()


@dataclass(frozen=True)
class PossessionProof:
    sig_on_pk: Signature

    def to_bytes(self) -> bytes:
        return self.sig_on_pk.to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "PossessionProof":
        return cls(Signature.from_bytes(data))


def _coerce_sig(sig) -> Signature:
    if isinstance(sig, Signature):
        return sig
    if isinstance(sig, (bytes, bytearray)):
        return Signature.from_bytes(bytes(sig))
    raise TypeError(f"expected Signature or bytes, got {type(sig).__name__}")


def _coerce_pk(pk) -> PublicKey:
    if isinstance(pk, PublicKey):
        return pk
    if isinstance(pk, (bytes, bytearray)):
        return PublicKey.from_bytes(bytes(pk))
    raise TypeError(f"expected PublicKey or bytes, got {type(pk).__name__}")


def keygen(seed: bytes) -> tuple[PrivateKey, PublicKey, PossessionProof]:
    """Deterministic key pair plus proof of possession from 32 bytes of entropy."""
    if len(seed) < 32:
        raise ValueError("seed must carry at least 32 bytes of entropy")
    counter = 0
    while True:
        x = crypto.hash_to_scalar(b"BLS-KEYGEN", bytes(seed) + struct.pack(">I", counter))
        if x:
            break
        counter += 1
    sk = PrivateKey(x)
    pk = sk.public_key()
    return sk, pk, prove_possession(sk)


def sign(sk: PrivateKey, message: bytes, domain: bytes) -> Signature:
    h = crypto.hash_to_point_g2(domain, message)
    return Signature(crypto.mul(h, sk.x))


def verify(pk, message: bytes, domain: bytes, sig) -> bool:
    """Check e(sig, g) == e(H(m), pk). Malformed encodings raise DecodeError."""
    pk = _coerce_pk(pk)
    sig = _coerce_sig(sig)
    h = crypto.hash_to_point_g2(domain, message)
    return crypto.pairing_product_is_one([(sig.point, -crypto.g1_generator()), (h, pk.point)])


def prove_possession(sk: PrivateKey) -> PossessionProof:
    return PossessionProof(sign(sk, sk.public_key().to_bytes(), DOMAIN_POP))


def verify_possession(pk, pop: PossessionProof) -> bool:
    pk = _coerce_pk(pk)
    return verify(pk, pk.to_bytes(), DOMAIN_POP, pop.sig_on_pk)


def aggregate(sigs) -> Signature:
    sigs = [_coerce_sig(s) for s in sigs]
    if not sigs:
        raise EmptyAggregateError("cannot aggregate an empty list of signatures")
    acc = sigs[0].point
    for s in sigs[1:]:
        acc = acc + s.point
    return Signature(acc)


def aggregate_verify(entries, agg) -> bool:
    """Check e(agg, g) == prod e(H(m_i), pk_i) over (pk, message, domain) entries.

    Keys signing the same (message, domain) are summed first. That is only
    sound when every key has a verified proof of possession, which callers
    must guarantee (the registry enforces it).
    """
    entries = list(entries)
    if not entries:
        raise EmptyAggregateError("aggregate verification needs at least one entry")
    agg = _coerce_sig(agg)
    grouped: dict[tuple[bytes, bytes], crypto.G1] = {}
    for pk, message, domain in entries:
        pk = _coerce_pk(pk)
        key = (bytes(domain), bytes(message))
        grouped[key] = grouped[key] + pk.point if key in grouped else pk.point
    pairs = [(agg.point, -crypto.g1_generator())]
    for (domain, message), pk_sum in grouped.items():
        pairs.append((crypto.hash_to_point_g2(domain, message), pk_sum))
    return crypto.pairing_product_is_one(pairs)
