import fcntl
import json
import os
import subprocess
import sys

import pytest

from sdcred import bench

from conftest import DIPLOMA, DIPLOMA_VALUES, LICENCE, LICENCE_VALUES

NONCE = "c3" * 16


class Cli:
    def __init__(self, tmp_path):
        self.dir = tmp_path
        self.env = dict(os.environ, SD_REGISTRY_PATH=str(tmp_path / "registry.jsonl"))

    def __call__(self, *args, ok=True):
        proc = subprocess.run(
            [sys.executable, "-m", "sdcred", *map(str, args)],
            cwd=self.dir, env=self.env, capture_output=True, text=True,
        )
        if ok:
            assert proc.returncode == 0, proc.stderr
        return proc

    def file(self, name, obj):
        path = self.dir / name
        path.write_text(json.dumps(obj))
        return path

    def keygen(self, owner, role, seed):
        self("keygen", "--owner", owner, "--role", role, "--out", f"{owner}.key.json", "--seed", seed * 32)
        return self.dir / f"{owner}.key.json"


@pytest.fixture
def cli(tmp_path):
    c = Cli(tmp_path)
    c.keygen("university", "issuer", "01")
    c.keygen("alice", "holder", "02")
    c("register-format", "--file", c.file("diploma.json", DIPLOMA.to_json()))
    return c


def test_keygen_writes_private_key_file(cli):
    path = cli.dir / "university.key.json"
    assert oct(path.stat().st_mode & 0o777) == "0o600"
    d = json.loads(path.read_text())
    assert set(d) == {"owner_id", "role", "sk", "pk", "pop"}
    assert len(bytes.fromhex(d["pk"])) == 48


def test_disclosure_flow(cli):
    cli("issue", "--format-id", "diploma", "--values", cli.file("v.json", DIPLOMA_VALUES),
        "--issuer-key", "university.key.json", "--out", "cred.json", "--seed", 1)
    req = {"nonce": NONCE, "credentials": [{"disclose": ["university", "degree"]}]}
    cli("present", "--credential", "cred.json", "--request", cli.file("req.json", req),
        "--holder-key", "alice.key.json", "--out", "p.json", "--seed", 2)
    out = cli("verify", "--presentation", "p.json", "--nonce", NONCE).stdout
    assert out.strip().endswith("VALID") and "FAIL" not in out
    bad = cli("verify", "--presentation", "p.json", "--nonce", "d4" * 16, ok=False)
    assert bad.returncode == 1 and bad.stdout.strip().endswith("INVALID")
    assert "Management" not in (cli.dir / "p.json").read_text()


def test_two_issuer_flow(cli):
    cli.keygen("police", "issuer", "03")
    cli("register-format", "--file", cli.file("licence.json", LICENCE.to_json()))
    cli("issue", "--format-id", "diploma", "--values", cli.file("v.json", DIPLOMA_VALUES),
        "--issuer-key", "university.key.json", "--out", "d.json")
    cli("issue", "--format-id", "drivers-licence", "--values", cli.file("l.json", LICENCE_VALUES),
        "--issuer-key", "police.key.json", "--holder-cosign", "alice.key.json", "--out", "l.json")
    req = {"nonce": NONCE, "credentials": [{"disclose": ["degree"]}, {"disclose": ["category"]}]}
    cli("present", "--credential", "d.json", "--credential", "l.json", "--request", cli.file("r.json", req),
        "--holder-key", "alice.key.json", "--out", "p.json")
    assert cli("verify", "--presentation", "p.json", "--nonce", NONCE).stdout.strip().endswith("VALID")
    p = json.loads((cli.dir / "p.json").read_text())
    assert len(bytes.fromhex(p["agg_sig"])) == 96
    assert cli("audit").stdout.strip() == "registry OK"


def test_range_flow(cli):
    cli("issue", "--format-id", "diploma", "--values", cli.file("v.json", DIPLOMA_VALUES),
        "--issuer-key", "university.key.json", "--out", "cred.json")
    req = {"nonce": NONCE, "credentials": [{"disclose": ["university"], "range_prove": {"gpa": [30, 45, 8]}}]}
    cli("present", "--credential", "cred.json", "--request", cli.file("req.json", req),
        "--holder-key", "alice.key.json", "--out", "p.json")
    out = cli("verify", "--presentation", "p.json", "--nonce", NONCE).stdout
    assert "PASS [slice 0] range_proof" in out
    req["credentials"][0]["range_prove"]["gpa"] = [40, 45, 8]
    refused = cli("present", "--credential", "cred.json", "--request", cli.file("req2.json", req),
                  "--holder-key", "alice.key.json", "--out", "p2.json", ok=False)
    assert refused.returncode == 1 and "OutOfRangeError" in refused.stderr
    assert not (cli.dir / "p2.json").exists()


def test_multi_version_and_cosign_commands(cli):
    out = cli("issue", "--format-id", "diploma", "--values", cli.file("v.json", DIPLOMA_VALUES),
              "--issuer-key", "university.key.json", "--versions", 3, "--out", "cred.json").stdout.split()
    assert [os.path.basename(p) for p in out] == ["cred-v0.json", "cred-v1.json", "cred-v2.json"]
    roots = {json.loads((cli.dir / p).read_text())["root"] for p in out}
    assert len(roots) == 3
    cli("cosign", "--credential", "cred-v0.json", "--holder-key", "alice.key.json")
    assert "holder_pk" in json.loads((cli.dir / "cred-v0.json").read_text())
    again = cli("cosign", "--credential", "cred-v0.json", "--holder-key", "alice.key.json", ok=False)
    assert again.returncode == 1


def test_exit_codes(cli):
    bad_role = cli("keygen", "--owner", "x", "--role", "verifier", ok=False)
    assert bad_role.returncode == 1 and "usage" in bad_role.stderr
    missing = cli("verify", "--presentation", "nope.json", ok=False)
    assert missing.returncode == 2
    (cli.dir / "junk.json").write_text("{}")
    assert cli("verify", "--presentation", "junk.json", ok=False).returncode == 1
    unknown = cli("issue", "--format-id", "nope", "--values", cli.file("v.json", []),
                  "--issuer-key", "university.key.json", "--out", "c.json", ok=False)
    assert unknown.returncode == 1
    wrong = cli("issue", "--format-id", "diploma", "--values", cli.file("w.json", ["a", "b", "c", "d"]),
                "--issuer-key", "university.key.json", "--out", "c.json", ok=False)
    assert wrong.returncode == 1


def test_locked_registry_exit_2(cli):
    with open(cli.dir / "registry.jsonl", "ab") as fh:
        fcntl.flock(fh, fcntl.LOCK_EX)
        locked = cli("keygen", "--owner", "bob", "--role", "holder", ok=False)
    assert locked.returncode == 2 and "locked" in locked.stderr


def test_registry_flag_overrides_env(cli, tmp_path):
    other = tmp_path / "other.jsonl"
    cli("--registry", other, "keygen", "--owner", "carol", "--role", "holder", "--out", "carol.json")
    assert b"carol" in other.read_bytes()
    assert b"carol" not in (cli.dir / "registry.jsonl").read_bytes()


def test_bench_command_small(cli):
    cli("bench", "--suite", "present", "--max-claims", 3, "--max-disclosed", 2, "--out-csv", "b.csv")
    rows = bench.read_csv(cli.dir / "b.csv")
    assert {r.operation for r in rows} == {"present-text", "present-range"}
    assert (cli.dir / "b.csv").read_text().splitlines()[0] == ",".join(bench.CSV_COLUMNS)
    too_few = cli("bench", "--suite", "issue", "--repetitions", 3, "--out-csv", "c.csv", ok=False)
    assert too_few.returncode == 1
