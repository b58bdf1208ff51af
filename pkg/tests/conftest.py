import sys
import random

import pytest

from sdcred import CredentialFormat, Registry, keygen
from sdcred.pedersen import default_params

DIPLOMA = CredentialFormat(
    "diploma",
    (("university", "text"), ("degree", "text"), ("gpa", "int", (0, 50, 8)), ("domain", "text")),
)
DIPLOMA_VALUES = ["Unv.Economics", "Economics", 38, "Management"]

LICENCE = CredentialFormat("drivers-licence", (("name", "text"), ("validity", "text"), ("category", "text")))
LICENCE_VALUES = ["Alice Example", "2031-05-01", "B"]


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture(scope="session")
def params():
    return default_params()


class World:
    """Registry with two issuers, a second co-signer and one holder, formats registered."""

    def __init__(self, seed=99):
        self.rng = random.Random(seed)
        self.registry = Registry()
        self.keys = {}
        for owner, role in [("university", "issuer"), ("rector", "issuer"), ("police", "issuer"),
                            ("alice", "holder"), ("mallory", "holder")]:
            sk, pk, pop = keygen(self.rng.randbytes(32))
            self.registry.register_key(owner, role, pk, pop)
            self.keys[owner] = sk
        self.registry.register_format(DIPLOMA)
        self.registry.register_format(LICENCE)

    def sk(self, owner):
        return self.keys[owner]

    def view(self):
        return self.registry.snapshot()


@pytest.fixture
def world():
    return World()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS, key=lambda s: int(s.split()[1].rstrip("."))):
        terminalreporter.write_line(line)
