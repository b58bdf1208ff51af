import random

import pytest

from sdcred import crypto
from sdcred.crypto import R
from sdcred.errors import EncodingError
from sdcred.pedersen import attribute_to_scalar, commit, shift_commitment


def test_zero_commitment_is_identity(params):
    assert commit(params, 0, 0) == crypto.g1_identity()


def test_additive_homomorphism_example(params):
    assert commit(params, 2, 3) + commit(params, 5, 7) == commit(params, 7, 10)


def test_scalar_multiple_randomized(params):
    rng = random.Random(11)
    for _ in range(50):
        k, x, r = (rng.randrange(R) for _ in range(3))
        assert commit(params, k * x, k * r) == crypto.mul(commit(params, x, r), k)


def test_generators_distinct_and_independent_of_bls_generator(params):
    assert params.G_val != params.G_blind
    assert crypto.g1_generator() not in (params.G_val, params.G_blind)


def test_commitment_encoding_is_48_bytes(params):
    assert len(crypto.g1_to_bytes(commit(params, 38, 12345))) == 48


@pytest.mark.parametrize(
    "name,value,expected",
    [("gpa", 38, 38), ("gpa", 0, 0), ("gpa", 2**64 - 1, 2**64 - 1)],
)
def test_attribute_to_scalar_integers(name, value, expected):
    assert attribute_to_scalar(name, value) == expected


def test_attribute_to_scalar_text():
    s = attribute_to_scalar("school", "Economics")
    assert s == attribute_to_scalar("school", "Economics")
    assert s == crypto.hash_to_scalar(b"LEAF-VAL:school", b"Economics")
    assert s != attribute_to_scalar("degree", "Economics")


@pytest.mark.parametrize("bad", [2**64, -1, True, 1.5, None])
def test_attribute_to_scalar_rejects(bad):
    with pytest.raises(EncodingError):
        attribute_to_scalar("gpa", bad)


def test_shift_commitment(params):
    s = 987654321
    assert shift_commitment(params, commit(params, 38, s), 18) == commit(params, 20, s)
    c = commit(params, 5, 6)
    assert shift_commitment(params, c, 0) == c
    rng = random.Random(4)
    for _ in range(100):
        v, s, d = rng.randrange(R), rng.randrange(R), rng.randrange(R)
        assert shift_commitment(params, commit(params, v, s), d) == commit(params, (v - d) % R, s)


def test_binding_and_salt_injectivity_fuzz(params):
    rng = random.Random(21)
    seen = {}
    for _ in range(5_000):
        v, s = rng.randrange(2**64), rng.randrange(R)
        key = crypto.g1_to_bytes(commit(params, v, s))
        assert seen.setdefault(key, (v, s)) == (v, s)
    # fixed value, many salts
    salts = {crypto.g1_to_bytes(commit(params, 42, rng.randrange(R))) for _ in range(5_000)}
    assert len(salts) == 5_000
