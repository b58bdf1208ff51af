"""Pedersen commitments over G1: ``value * G_val + salt * G_blind``."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from . import crypto
from .crypto import R
from .errors import EncodingError

MAX_INT_ATTRIBUTE = 1 << 64


@dataclass(frozen=True)
class PedersenParams:
    G_val: crypto.G1
    G_blind: crypto.G1

    def tables(self) -> list:
        """Fixed-base tables for (G_val, G_blind)."""
        return [crypto.fixed_base(self.G_val), crypto.fixed_base(self.G_blind)]


@lru_cache(maxsize=None)
def default_params() -> PedersenParams:
    # nothing-up-my-sleeve generators; discrete log between them is unknown
    g_val = crypto.hash_to_point_g1(b"PEDERSEN", b"value generator")
    g_blind = crypto.hash_to_point_g1(b"PEDERSEN", b"blinding generator")
    assert g_val != g_blind
    return PedersenParams(g_val, g_blind)


def commit(params: PedersenParams, value: int, salt: int) -> crypto.G1:
    return crypto.fixed_multiexp(params.tables(), [value, salt])


def shift_commitment(params: PedersenParams, c: crypto.G1, delta: int) -> crypto.G1:
    """Commitment to ``value - delta`` under the same salt."""
    return c - crypto.fixed_multiexp(params.tables()[:1], [delta])


def random_salt(rng=None) -> int:
    return crypto.random_scalar(rng)


def attribute_to_scalar(name: str, value) -> int:
    """Embed an attribute value as a scalar.

    Integers in [0, 2**64) map to themselves so they can be range-proved;
    text is hashed under a per-attribute-name tag.
    """
    if isinstance(value, bool):
        raise EncodingError(f"{name}: booleans are not attribute values")
    if isinstance(value, int):
        if not 0 <= value < MAX_INT_ATTRIBUTE:
            raise EncodingError(f"{name}: integer {value} outside [0, 2^64)")
        return value
    if isinstance(value, str):
        return crypto.hash_to_scalar(b"LEAF-VAL:" + name.encode("utf-8"), value.encode("utf-8"))
    raise EncodingError(f"{name}: unsupported attribute value type {type(value).__name__}")


def commitment_to_bytes(c: crypto.G1) -> bytes:
    return crypto.g1_to_bytes(c)


def commitment_from_bytes(data: bytes) -> crypto.G1:
    return crypto.g1_from_bytes(data)


__all__ = [
    "PedersenParams",
    "default_params",
    "commit",
    "shift_commitment",
    "random_salt",
    "attribute_to_scalar",
    "commitment_to_bytes",
    "commitment_from_bytes",
    "MAX_INT_ATTRIBUTE",
    "R",
]
