"""Bulletproofs range proofs over the Pedersen commitments of ``pedersen``.

A statement ``lo <= v <= hi`` about ``C = v*G_val + s*G_blind`` is split into
two standard n-bit proofs::

    v - lo  in [0, 2^n)   against  C - lo*G_val        (blinding  s)
    hi - v  in [0, 2^n)   against  hi*G_val - C        (blinding -s)

Both run on one Fiat-Shamir transcript that has absorbed the generators, the
original commitment and (lo, hi, n) before the first challenge is drawn, so
a proof cannot be replayed against another commitment or range.

The inner-product argument never folds generator points. Each folded
generator is tracked as per-original-generator coefficients, which turns
every round into a single multi-exponentiation. All prover bases are fixed
generators, so the prover works from precomputed tables throughout.
"""
from __future__ import annotations

import hashlib
import secrets
import struct
from dataclasses import dataclass
from functools import lru_cache

from . import crypto
from .crypto import R, inv
from .errors import DecodeError, MalformedProofError, OutOfRangeError, ParameterError, UnsupportedBitWidthError
from .pedersen import PedersenParams, commit, shift_commitment

SUPPORTED_BITS = (8, 16, 32, 64)
MAX_BITS = max(SUPPORTED_BITS)
TRANSCRIPT_TAG = b"sdcred/rangeproof/v1"

# per sub-proof: A, S, T1, T2 | tau_x, mu, t_hat, a, b
_POINTS_PER_SUB = 4
_SCALARS_PER_SUB = 5

_VERIFIER_RNG = secrets.SystemRandom()


@lru_cache(maxsize=None)
def _generators() -> tuple:
    gs = tuple(crypto.hash_to_point_g1(b"BULLETPROOF", b"G" + struct.pack(">I", i)) for i in range(MAX_BITS))
    hs = tuple(crypto.hash_to_point_g1(b"BULLETPROOF", b"H" + struct.pack(">I", i)) for i in range(MAX_BITS))
    u = crypto.hash_to_point_g1(b"BULLETPROOF", b"U")
    return gs, hs, u


@lru_cache(maxsize=None)
def _tables(n: int) -> tuple:
    gs, hs, u = _generators()
    return [crypto.fixed_base(p) for p in gs[:n]], [crypto.fixed_base(p) for p in hs[:n]], crypto.fixed_base(u)


def _log2(n: int) -> int:
    return n.bit_length() - 1


def _check_bits(n_bits: int) -> None:
    if n_bits not in SUPPORTED_BITS:
        raise UnsupportedBitWidthError(f"bit width {n_bits} not in {SUPPORTED_BITS}")


def proof_size_elements(n_bits: int) -> int:
    """Serialized group elements plus scalars in one n-bit sub-proof."""
    _check_bits(n_bits)
    return _POINTS_PER_SUB + 2 * _log2(n_bits) + _SCALARS_PER_SUB


@dataclass(frozen=True)
class RangeStatement:
    commitment: crypto.G1
    lo: int
    hi: int
    bits: int

    def __post_init__(self):
        _check_bits(self.bits)
        if not (0 <= self.lo < self.hi < (1 << 64)):
            raise ParameterError(f"range must satisfy 0 <= lo < hi < 2^64, got [{self.lo}, {self.hi}]")
        if self.hi - self.lo > (1 << self.bits) - 1:
            raise ParameterError(f"range [{self.lo}, {self.hi}] wider than {self.bits} bits")


@dataclass(frozen=True)
class RangeProof:
    round_commitments: tuple  # G1 points, 4 per sub-proof
    final_scalars: tuple  # ints, 5 per sub-proof
    inner_product_rounds: tuple  # (L, R) pairs, log2(n) per sub-proof

    def element_count(self) -> int:
        return len(self.round_commitments) + len(self.final_scalars) + 2 * len(self.inner_product_rounds)

    def to_bytes(self) -> bytes:
        out = [struct.pack(">H", len(self.round_commitments))]
        out += [crypto.g1_to_bytes(p) for p in self.round_commitments]
        out.append(struct.pack(">H", len(self.final_scalars)))
        out += [crypto.scalar_to_bytes(s) for s in self.final_scalars]
        out.append(struct.pack(">H", len(self.inner_product_rounds)))
        for left, right in self.inner_product_rounds:
            out += [crypto.g1_to_bytes(left), crypto.g1_to_bytes(right)]
        return b"".join(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "RangeProof":
        data = bytes(data)
        pos = 0

        def take(k: int) -> bytes:
            nonlocal pos
            if pos + k > len(data):
                raise MalformedProofError("truncated range proof")
            chunk = data[pos:pos + k]
            pos += k
            return chunk

        try:
            (n_pts,) = struct.unpack(">H", take(2))
            points = tuple(crypto.g1_from_bytes(take(crypto.G1_SIZE)) for _ in range(n_pts))
            (n_sc,) = struct.unpack(">H", take(2))
            scalars = tuple(crypto.scalar_from_bytes(take(crypto.SCALAR_SIZE)) for _ in range(n_sc))
            (n_rounds,) = struct.unpack(">H", take(2))
            rounds = tuple(
                (crypto.g1_from_bytes(take(crypto.G1_SIZE)), crypto.g1_from_bytes(take(crypto.G1_SIZE)))
                for _ in range(n_rounds)
            )
        except DecodeError as exc:
            raise MalformedProofError(f"bad element in range proof: {exc}") from None
        if pos != len(data):
            raise MalformedProofError("trailing bytes after range proof")
        return cls(points, scalars, rounds)


class Transcript:
    """Running SHA-256 over length-framed (label, data) records."""

    def __init__(self, tag: bytes = TRANSCRIPT_TAG):
        self._h = hashlib.sha256()
        self.append(b"protocol", tag)

    def append(self, label: bytes, data: bytes) -> None:
        self._h.update(struct.pack(">H", len(label)) + label + struct.pack(">I", len(data)) + data)

    def append_point(self, label: bytes, p) -> None:
        self.append(label, crypto.g1_to_bytes(p))

    def append_scalar(self, label: bytes, x: int) -> None:
        self.append(label, crypto.scalar_to_bytes(x))

    def challenge(self, label: bytes) -> int:
        self.append(b"challenge", label)
        c = crypto.hash_to_scalar(b"BP-CHALLENGE", self._h.copy().digest())
        self.append_scalar(b"challenge-value", c)
        return c


def statement_transcript(params: PedersenParams, stmt: RangeStatement) -> Transcript:
    t = Transcript()
    t.append_point(b"G_val", params.G_val)
    t.append_point(b"G_blind", params.G_blind)
    t.append_point(b"commitment", stmt.commitment)
    t.append(b"range", struct.pack(">QQB", stmt.lo, stmt.hi, stmt.bits))
    return t


# -- small vector helpers over Z_R ---------------------------------------

def _powers(x: int, n: int) -> list[int]:
    out, acc = [], 1
    for _ in range(n):
        out.append(acc)
        acc = acc * x % R
    return out


def _ip(a, b) -> int:
    return sum(x * y for x, y in zip(a, b)) % R


# -- one n-bit sub-proof ---------------------------------------------------

def _prove_sub(params, t: Transcript, label: bytes, V, v: int, gamma: int, n: int, rng):
    gs, hs, _ = _generators()
    gt, ht, ut = _tables(n)
    g, h = params.tables()
    t.append(b"sub-proof", label)
    t.append_point(b"V", V)

    a_L = [(v >> i) & 1 for i in range(n)]
    a_R = [(bit - 1) % R for bit in a_L]
    alpha = crypto.random_scalar(rng)
    rho = crypto.random_scalar(rng)
    s_L = [crypto.random_scalar(rng) for _ in range(n)]
    s_R = [crypto.random_scalar(rng) for _ in range(n)]
    # bits are 0/1, so A is one multiplication plus point additions
    A = crypto.fixed_multiexp([h], [alpha])
    for i, bit in enumerate(a_L):
        A = A + gs[i] if bit else A - hs[i]
    S = crypto.fixed_multiexp([h, *gt, *ht], [rho, *s_L, *s_R])
    t.append_point(b"A", A)
    t.append_point(b"S", S)
    y = t.challenge(b"y")
    z = t.challenge(b"z")
    if y == 0 or z == 0:
        raise ArithmeticError("degenerate Fiat-Shamir challenge")

    yn = _powers(y, n)
    twon = _powers(2, n)
    z2 = z * z % R
    l0 = [(a - z) % R for a in a_L]
    l1 = s_L
    r0 = [(yn[i] * (a_R[i] + z) + z2 * twon[i]) % R for i in range(n)]
    r1 = [yn[i] * s_R[i] % R for i in range(n)]
    t1 = (_ip(l0, r1) + _ip(l1, r0)) % R
    t2 = _ip(l1, r1)
    tau1 = crypto.random_scalar(rng)
    tau2 = crypto.random_scalar(rng)
    T1 = crypto.fixed_multiexp([g, h], [t1, tau1])
    T2 = crypto.fixed_multiexp([g, h], [t2, tau2])
    t.append_point(b"T1", T1)
    t.append_point(b"T2", T2)
    x = t.challenge(b"x")
    if x == 0:
        raise ArithmeticError("degenerate Fiat-Shamir challenge")

    l = [(l0[i] + l1[i] * x) % R for i in range(n)]
    r = [(r0[i] + r1[i] * x) % R for i in range(n)]
    t_hat = _ip(l, r)
    tau_x = (tau2 * x * x + tau1 * x + z2 * gamma) % R
    mu = (alpha + rho * x) % R
    t.append_scalar(b"tau_x", tau_x)
    t.append_scalar(b"mu", mu)
    t.append_scalar(b"t_hat", t_hat)
    w = t.challenge(b"w")
    if w == 0:
        raise ArithmeticError("degenerate Fiat-Shamir challenge")

    # inner-product argument on (l, r) with H'_i = y^-i H_i
    y_inv = inv(y)
    gc = [1] * n
    hc = _powers(y_inv, n)
    a, b = l, r
    rounds = []
    m = n
    while m > 1:
        half = m // 2
        a_lo, a_hi = a[:half], a[half:]
        b_lo, b_hi = b[:half], b[half:]
        c_L = _ip(a_lo, b_hi)
        c_R = _ip(a_hi, b_lo)
        # L = <a_lo, G_hi> + <b_hi, H_lo> + c_L Q;  R = <a_hi, G_lo> + <b_lo, H_hi> + c_R Q,  Q = w u
        pts_L, sc_L, pts_R, sc_R = [ut], [c_L * w], [ut], [c_R * w]
        for i in range(n):
            k = i % m
            if k >= half:
                pts_L.append(gt[i])
                sc_L.append(a_lo[k - half] * gc[i])
                pts_R.append(ht[i])
                sc_R.append(b_lo[k - half] * hc[i])
            else:
                pts_L.append(ht[i])
                sc_L.append(b_hi[k] * hc[i])
                pts_R.append(gt[i])
                sc_R.append(a_hi[k] * gc[i])
        L = crypto.fixed_multiexp(pts_L, sc_L)
        Rr = crypto.fixed_multiexp(pts_R, sc_R)
        t.append_point(b"L", L)
        t.append_point(b"R", Rr)
        xj = t.challenge(b"ipa")
        if xj == 0:
            raise ArithmeticError("degenerate Fiat-Shamir challenge")
        xj_inv = inv(xj)
        a = [(xj * a_lo[k] + xj_inv * a_hi[k]) % R for k in range(half)]
        b = [(xj_inv * b_lo[k] + xj * b_hi[k]) % R for k in range(half)]
        for i in range(n):
            if i % m < half:
                gc[i] = gc[i] * xj_inv % R
                hc[i] = hc[i] * xj % R
            else:
                gc[i] = gc[i] * xj % R
                hc[i] = hc[i] * xj_inv % R
        rounds.append((L, Rr))
        m = half

    return [A, S, T1, T2], [tau_x, mu, t_hat, a[0], b[0]], rounds


def _verify_sub(params, t: Transcript, label: bytes, V, n: int, points, scalars, rounds) -> bool:
    gt, ht, ut = _tables(n)
    g, h = params.tables()
    A, S, T1, T2 = points
    tau_x, mu, t_hat, a, b = scalars

    t.append(b"sub-proof", label)
    t.append_point(b"V", V)
    t.append_point(b"A", A)
    t.append_point(b"S", S)
    y = t.challenge(b"y")
    z = t.challenge(b"z")
    t.append_point(b"T1", T1)
    t.append_point(b"T2", T2)
    x = t.challenge(b"x")
    t.append_scalar(b"tau_x", tau_x)
    t.append_scalar(b"mu", mu)
    t.append_scalar(b"t_hat", t_hat)
    w = t.challenge(b"w")
    challenges = []
    for L, Rr in rounds:
        t.append_point(b"L", L)
        t.append_point(b"R", Rr)
        challenges.append(t.challenge(b"ipa"))
    if 0 in (y, z, x, w, *challenges):
        return False

    yn = _powers(y, n)
    twon = _powers(2, n)
    z2 = z * z % R
    z3 = z2 * z % R
    delta = ((z - z2) * sum(yn) - z3 * sum(twon)) % R

    # The polynomial check  t_hat*g + tau_x*h == z^2 V + delta g + x T1 + x^2 T2
    # joins the inner-product check in one multi-exponentiation, weighted by
    # a fresh random c so one equation cannot cancel the other.
    c = crypto.random_scalar(_VERIFIER_RNG)

    # coefficient of each original generator after all folds
    gc, gc_inv = [1] * n, [1] * n
    m = n
    for xj in challenges:
        xj_inv = inv(xj)
        half = m // 2
        for i in range(n):
            lo = i % m < half
            gc[i] = gc[i] * (xj_inv if lo else xj) % R
            gc_inv[i] = gc_inv[i] * (xj if lo else xj_inv) % R
        m = half
    y_inv = inv(y)
    y_inv_n = _powers(y_inv, n)

    g_scalars = [(-z - a * gc[i]) % R for i in range(n)]
    h_scalars = [(z + (z2 * twon[i] - b * gc_inv[i]) * y_inv_n[i]) % R for i in range(n)]
    fixed = crypto.fixed_multiexp(
        [h, ut, *gt, *ht, g],
        [(c * tau_x - mu) % R, w * (t_hat - a * b) % R, *g_scalars, *h_scalars, c * (t_hat - delta) % R],
    )
    pts = [A, S, V, T1, T2]
    scs = [1, x, -c * z2 % R, -c * x % R, -c * x * x % R]
    for xj, (L, Rr) in zip(challenges, rounds):
        pts += [L, Rr]
        x2 = xj * xj % R
        scs += [x2, inv(x2)]
    return fixed + crypto.multiexp(pts, scs) == crypto.g1_identity()


def _sub_commitments(params, stmt: RangeStatement):
    lower = shift_commitment(params, stmt.commitment, stmt.lo)
    upper = crypto.fixed_multiexp(params.tables()[:1], [stmt.hi]) - stmt.commitment
    return lower, upper


def prove_range(params: PedersenParams, value: int, salt: int, stmt: RangeStatement, rng=None) -> RangeProof:
    if not stmt.lo <= value <= stmt.hi:
        raise OutOfRangeError(f"value outside [{stmt.lo}, {stmt.hi}]; refusing to prove")
    if commit(params, value, salt) != stmt.commitment:
        raise ValueError("statement commitment does not open to (value, salt)")
    n = stmt.bits
    lower, upper = _sub_commitments(params, stmt)
    t = statement_transcript(params, stmt)
    p1, s1, r1 = _prove_sub(params, t, b"lower", lower, value - stmt.lo, salt, n, rng)
    p2, s2, r2 = _prove_sub(params, t, b"upper", upper, stmt.hi - value, -salt % R, n, rng)
    return RangeProof(tuple(p1 + p2), tuple(s1 + s2), tuple(r1 + r2))


def verify_range(params: PedersenParams, stmt: RangeStatement, proof: RangeProof) -> bool:
    """Check both sub-proofs. Wrong element counts raise MalformedProofError."""
    n = stmt.bits
    k = _log2(n)
    if (
        len(proof.round_commitments) != 2 * _POINTS_PER_SUB
        or len(proof.final_scalars) != 2 * _SCALARS_PER_SUB
        or len(proof.inner_product_rounds) != 2 * k
    ):
        raise MalformedProofError(f"range proof shape does not match a {n}-bit statement")
    lower, upper = _sub_commitments(params, stmt)
    t = statement_transcript(params, stmt)
    P, S, rounds = proof.round_commitments, proof.final_scalars, proof.inner_product_rounds
    if not _verify_sub(params, t, b"lower", lower, n, P[:4], S[:5], rounds[:k]):
        return False
    return _verify_sub(params, t, b"upper", upper, n, P[4:], S[5:], rounds[k:])
