"""Byte-for-byte stability of canonical serializations.

Regenerate with ``SDCRED_REGEN_GOLDEN=1 pytest tests/test_golden.py`` only
when the wire format changes on purpose.
"""
import os
import random
import subprocess
import sys
from pathlib import Path

from sdcred import bls, presentation as pres
from sdcred.credential import co_sign_holder, issue
from sdcred.registry import Registry

from conftest import DIPLOMA, DIPLOMA_VALUES

GOLDEN = Path(__file__).parent / "golden"
NONCE = bytes(range(32))


def golden_objects():
    """(credential bytes, presentation bytes, registry) for seed 2024."""
    rng = random.Random(2024)
    isk, ipk, ipop = bls.keygen(bytes([1]) * 32)
    hsk, hpk, hpop = bls.keygen(bytes([2]) * 32)
    reg = Registry()
    reg.register_key("university", "issuer", ipk, ipop)
    reg.register_key("alice", "holder", hpk, hpop)
    reg.register_format(DIPLOMA)
    cred, rec = issue(DIPLOMA, DIPLOMA_VALUES, isk, rng=rng)
    reg.record_issuance(rec)
    cred = co_sign_holder(cred, hsk)
    req = pres.DisclosureRequest(
        (pres.CredentialRequest({"university", "degree"}, {"gpa": (30, 45, 8)}),), NONCE
    )
    p = pres.build([cred], hsk, req, rng=rng)
    return cred.to_bytes(), p.to_bytes(), reg


def _check(name, data):
    path = GOLDEN / name
    if os.environ.get("SDCRED_REGEN_GOLDEN"):
        GOLDEN.mkdir(exist_ok=True)
        path.write_bytes(data)
    assert data == path.read_bytes()


def test_golden_credential_and_presentation():
    cred, p, reg = golden_objects()
    _check("credential.json", cred)
    _check("presentation.json", p)
    report = pres.verify(pres.Presentation.from_bytes(p), reg.snapshot(), NONCE)
    assert report.ok, report.lines()


def test_golden_stable_in_fresh_interpreter():
    code = (
        "import sys; sys.path.insert(0, %r)\n"
        "from test_golden import golden_objects\n"
        "c, p, _ = golden_objects()\n"
        "sys.stdout.buffer.write(c + b'\\n' + p)\n"
    ) % str(Path(__file__).parent)
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, check=True).stdout
    assert out == (GOLDEN / "credential.json").read_bytes() + b"\n" + (GOLDEN / "presentation.json").read_bytes()
