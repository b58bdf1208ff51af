import fcntl
import json
import random

import pytest

from sdcred import bls
from sdcred.credential import issue
from sdcred.errors import (
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
from sdcred.formats import CredentialFormat
from sdcred.registry import Registry

from conftest import DIPLOMA, DIPLOMA_VALUES, LICENCE


def populate(reg, seed=0):
    rng = random.Random(seed)
    sk, pk, pop = bls.keygen(rng.randbytes(32))
    reg.register_key("university", "issuer", pk, pop)
    reg.register_format(DIPLOMA)
    cred, rec = issue(DIPLOMA, DIPLOMA_VALUES, sk, rng=rng)
    reg.record_issuance(rec)
    return sk, cred, rec


def test_file_reload_is_byte_identical(tmp_path):
    path = tmp_path / "reg.jsonl"
    reg = Registry(path)
    _, cred, rec = populate(reg)
    raw = path.read_bytes()
    assert raw == reg.dump_bytes()
    again = Registry(path)
    assert again.dump_bytes() == raw
    assert again.lookup_root(cred.root) == rec
    assert again.snapshot().get_format("diploma") == DIPLOMA
    for line in raw.splitlines():
        assert json.loads(line)["kind"] in ("key", "format", "issuance")


def test_snapshot_is_isolated():
    reg = Registry()
    sk, _, _ = populate(reg)
    view = reg.snapshot()
    cred, rec = issue(DIPLOMA, DIPLOMA_VALUES, sk, rng=random.Random(5))
    reg.record_issuance(rec)
    assert view.lookup_root(rec.root) is None
    assert reg.snapshot().lookup_root(rec.root) == rec
    with pytest.raises(TypeError):
        view.records[b"x"] = rec


def test_registration_rules():
    reg = Registry()
    rng = random.Random(2)
    sk, pk, pop = bls.keygen(rng.randbytes(32))
    _, pk2, pop2 = bls.keygen(rng.randbytes(32))
    with pytest.raises(ParameterError):
        reg.register_key("x", "verifier", pk, pop)
    with pytest.raises(RogueKeyError):
        reg.register_key("x", "issuer", pk, pop2)
    reg.register_key("x", "issuer", pk, pop)
    reg.register_key("x", "issuer", pk, pop)  # idempotent
    with pytest.raises(ParameterError):
        reg.register_key("y", "holder", pk, pop)
    assert len(reg.dump_bytes().splitlines()) == 1


def test_formats_are_immutable():
    reg = Registry()
    reg.register_format(DIPLOMA)
    reg.register_format(DIPLOMA)
    with pytest.raises(ImmutableFormatError):
        reg.register_format(CredentialFormat("diploma", (("university", "text"),)))
    with pytest.raises(UnknownFormatError):
        reg.snapshot().get_format("nope")


def test_record_issuance_rules():
    reg = Registry()
    rng = random.Random(3)
    sk, pk, pop = bls.keygen(rng.randbytes(32))
    hsk, hpk, hpop = bls.keygen(rng.randbytes(32))
    cred, rec = issue(DIPLOMA, DIPLOMA_VALUES, sk, rng=rng)
    with pytest.raises(UnknownFormatError):
        reg.record_issuance(rec)
    reg.register_format(DIPLOMA)
    with pytest.raises(UntrustedKeyError):
        reg.record_issuance(rec)
    reg.register_key("holder", "holder", hpk, hpop)
    hcred, hrec = issue(DIPLOMA, DIPLOMA_VALUES, hsk, rng=rng)
    with pytest.raises(UntrustedKeyError):
        reg.record_issuance(hrec)  # a holder key cannot issue
    reg.register_key("uni", "issuer", pk, pop)
    reg.record_issuance(rec)
    with pytest.raises(DuplicateRootError):
        reg.record_issuance(rec)
    _, rec2 = issue(DIPLOMA, DIPLOMA_VALUES, sk, rng=rng)
    from dataclasses import replace

    with pytest.raises(InvalidCredentialError):
        reg.record_issuance(replace(rec2, signature=rec.signature))


def test_require_key_roles(world):
    view = world.view()
    alice = world.sk("alice").public_key()
    assert view.require_key(alice, "holder").owner_id == "alice"
    with pytest.raises(UntrustedKeyError):
        view.require_key(alice, "issuer")
    stranger = bls.keygen(bytes(32))[1]
    with pytest.raises(UntrustedKeyError):
        view.require_key(stranger)


def test_locked_registry_refuses_writes(tmp_path):
    path = tmp_path / "reg.jsonl"
    reg = Registry(path)
    with open(path, "ab") as holder:
        fcntl.flock(holder, fcntl.LOCK_EX)
        with pytest.raises(RegistryLockedError):
            reg.register_format(DIPLOMA)
    reg.register_format(DIPLOMA)
    assert Registry(path).snapshot().get_format("diploma") == DIPLOMA


def test_corrupt_file_reports_line(tmp_path):
    path = tmp_path / "reg.jsonl"
    reg = Registry(path)
    reg.register_format(LICENCE)
    with open(path, "ab") as fh:
        fh.write(b'{"kind": "mystery"}\n')
    with pytest.raises(FormatError, match=":2:"):
        Registry(path)


def test_audit_clean_and_dirty(tmp_path):
    path = tmp_path / "reg.jsonl"
    reg = Registry(path)
    populate(reg)
    assert reg.audit() == []
    # tamper with the stored signature by editing the log
    lines = path.read_bytes().splitlines()
    rec = json.loads(lines[-1])
    other = bls.sign(bls.keygen(bytes(32))[0], b"x", bls.DOMAIN_CRED_ROOT)
    rec["signature"] = other.hex()
    lines[-1] = json.dumps(rec).encode()
    path.write_bytes(b"\n".join(lines) + b"\n")
    problems = Registry(path).audit()
    assert len(problems) == 1 and "signature" in problems[0]
