"""BLS12-381 group/field plumbing, hashing to scalars and points, byte encodings.

Scalars are plain Python ints reduced modulo ``R``. Points are
``py_arkworks_bls12381`` objects; hash-to-curve goes through ``blspy``
(RFC 9380 SSWU suites) and is moved across by compressed bytes.

Encodings used everywhere else in the package:

    Scalar  32 bytes, little-endian, fully reduced
    G1      48 bytes, compressed
    G2      96 bytes, compressed
    Digest  32 bytes (SHA-256)
"""
from __future__ import annotations

import functools
import hashlib
import secrets
import struct

import blspy
from py_arkworks_bls12381 import G1Point, G2Point, GT, Scalar as _ArkScalar

from .errors import DecodeError

# prime order of G1, G2 and GT
R = 0x73EDA753299D7D483339D80809A1D80553BDA402FFFE5BFEFFFFFFFF00000001

SCALAR_SIZE = 32
G1_SIZE = 48
G2_SIZE = 96
DIGEST_SIZE = 32

G1 = G1Point
G2 = G2Point


def g1_generator() -> G1Point:
    return G1Point()


def g2_generator() -> G2Point:
    return G2Point()


def g1_identity() -> G1Point:
    return G1Point.identity()


def g2_identity() -> G2Point:
    return G2Point.identity()


# -- scalars ---------------------------------------------------------------

def random_scalar(rng=None, nonzero: bool = True) -> int:
    """Uniform scalar from ``rng`` (anything with ``randrange``), default OS randomness."""
    rng = rng or secrets.SystemRandom()
    lo = 1 if nonzero else 0
    return rng.randrange(lo, R)


def scalar_to_bytes(x: int) -> bytes:
    return (x % R).to_bytes(SCALAR_SIZE, "little")


def scalar_from_bytes(data: bytes) -> int:
    if len(data) != SCALAR_SIZE:
        raise DecodeError(f"scalar must be {SCALAR_SIZE} bytes, got {len(data)}")
    x = int.from_bytes(data, "little")
    if x >= R:
        raise DecodeError("non-canonical scalar encoding")
    return x


def inv(x: int) -> int:
    if x % R == 0:
        raise ZeroDivisionError("zero has no inverse mod R")
    return pow(x, -1, R)


def ark(x: int) -> _ArkScalar:
    return _ArkScalar(x % R)


def mul(point, x: int):
    """Scalar multiplication of a G1 or G2 point by an int."""
    return point * _ArkScalar(x % R)


def multiexp(points: list, scalars: list[int]) -> G1Point:
    """sum(s_i * P_i) over G1."""
    if len(points) != len(scalars):
        raise ValueError("points and scalars differ in length")
    if not points:
        return G1Point.identity()
    return G1Point.multiexp_unchecked(list(points), [_ArkScalar(s % R) for s in scalars])


# -- fixed-base tables -----------------------------------------------------
#
# Generators are reused for every commitment and proof. A table of digit
# multiples per 6-bit window turns a scalar multiple into ~43 point
# additions, about 3x cheaper than a general multi-exponentiation term.
# Like multiexp_unchecked this is variable-time in the scalar.

_WINDOW = 6
_DIGITS = (1 << _WINDOW) - 1
_WINDOWS = -(-R.bit_length() // _WINDOW)
_TABLES: dict[bytes, list] = {}


def fixed_base(point: G1Point) -> list:
    """Window table for ``point``, built once per distinct point."""
    key = bytes(point.to_compressed_bytes())
    table = _TABLES.get(key)
    if table is None:
        table, base = [], point
        for _ in range(_WINDOWS):
            row, acc = [None], G1Point.identity()
            for _ in range(_DIGITS):
                acc = acc + base
                row.append(acc)
            table.append(row)
            base = acc + base
        _TABLES[key] = table
    return table


def fixed_multiexp(tables: list, scalars: list[int]) -> G1Point:
    """sum(s_i * P_i) for tables built by ``fixed_base``."""
    acc = G1Point.identity()
    for rows, x in zip(tables, scalars, strict=True):
        x %= R
        j = 0
        while x:
            d = x & _DIGITS
            if d:
                acc = acc + rows[j][d]
            x >>= _WINDOW
            j += 1
    return acc


# -- points ----------------------------------------------------------------

def g1_to_bytes(p: G1Point) -> bytes:
    return bytes(p.to_compressed_bytes())


def g2_to_bytes(p: G2Point) -> bytes:
    return bytes(p.to_compressed_bytes())


def g1_from_bytes(data: bytes) -> G1Point:
    """Decode a compressed G1 point; rejects off-curve and off-subgroup input."""
    if len(data) != G1_SIZE:
        raise DecodeError(f"G1 point must be {G1_SIZE} bytes, got {len(data)}")
    return _g1_decode(bytes(data))


# Decompression plus the subgroup check costs ~0.1 ms. Points are immutable
# and failures raise (so are never cached), which makes memoizing safe.
@functools.lru_cache(maxsize=4096)
def _g1_decode(data: bytes) -> G1Point:
    try:
        p = G1Point.from_compressed_bytes(data)
    except BaseException as exc:  # the binding raises a pyo3 PanicException on some inputs
        if isinstance(exc, (KeyboardInterrupt, SystemExit)):
            raise
        raise DecodeError(f"invalid G1 encoding: {exc}") from None
    if g1_to_bytes(p) != data:
        raise DecodeError("non-canonical G1 encoding")
    return p


def g2_from_bytes(data: bytes) -> G2Point:
    """Decode a compressed G2 point; rejects off-curve and off-subgroup input."""
    if len(data) != G2_SIZE:
        raise DecodeError(f"G2 point must be {G2_SIZE} bytes, got {len(data)}")
    try:
        p = G2Point.from_compressed_bytes(bytes(data))
    except BaseException as exc:
        if isinstance(exc, (KeyboardInterrupt, SystemExit)):
            raise
        raise DecodeError(f"invalid G2 encoding: {exc}") from None
    if g2_to_bytes(p) != bytes(data):
        raise DecodeError("non-canonical G2 encoding")
    return p


# -- hashing ---------------------------------------------------------------

def sha256(*parts: bytes) -> bytes:
    h = hashlib.sha256()
    for part in parts:
        h.update(part)
    return h.digest()


def _framed(tag: bytes) -> bytes:
    return struct.pack(">H", len(tag)) + tag


def hash_to_scalar(domain_tag: bytes, data: bytes) -> int:
    """Deterministic map of (tag, data) to [0, R).

    512 bits of SHA-512 output reduced mod R, so the bias is below 2^-256.
    """
    if not domain_tag:
        raise ValueError("domain_tag must be non-empty")
    digest = hashlib.sha512(b"SDCRED-H2S" + _framed(domain_tag) + data).digest()
    return int.from_bytes(digest, "big") % R


def _dst(domain_tag: bytes, group: bytes) -> bytes:
    return b"SDCRED-V01-" + domain_tag + b"-with-BLS12381" + group + b"_XMD:SHA-256_SSWU_RO_"


def hash_to_point_g1(domain_tag: bytes, message: bytes) -> G1Point:
    raw = bytes(blspy.G1Element.from_message(bytes(message), _dst(domain_tag, b"G1")))
    return G1Point.from_compressed_bytes(raw)


def hash_to_point_g2(domain_tag: bytes, message: bytes) -> G2Point:
    raw = bytes(blspy.G2Element.from_message(bytes(message), _dst(domain_tag, b"G2")))
    return G2Point.from_compressed_bytes(raw)


# -- pairing ---------------------------------------------------------------

def pairing(a: G2Point, b: G1Point) -> GT:
    return GT.pairing(b, a)


def pairing_product_is_one(pairs: list[tuple[G2Point, G1Point]]) -> bool:
    """True iff prod e(a_i, b_i) is the identity of GT."""
    return GT.multi_pairing([b for _, b in pairs], [a for a, _ in pairs]) == GT.one()


def gt_one() -> GT:
    return GT.one()
