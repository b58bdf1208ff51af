"""Command-line driver for the issuer / holder / verifier flows.

Exit codes: 0 success, 1 domain failure (bad input, failed verification),
2 environment failure (unreadable files, locked registry).
"""
from __future__ import annotations

import argparse
import json
import os
import random
import secrets
import sys
from pathlib import Path

from . import bench, bls, credential, presentation
from .bls import PossessionProof, PrivateKey, PublicKey
from .credential import Credential
from .errors import RegistryLockedError, SDError
from .formats import CredentialFormat, canonical_json, unhex
from .registry import ENV_PATH, ROLES, Registry

EXIT_OK, EXIT_FAIL, EXIT_ENV = 0, 1, 2


class EnvFailure(Exception):
    pass


def _registry(args) -> Registry:
    path = args.registry or os.environ.get(ENV_PATH) or "registry.jsonl"
    try:
        return Registry(path)
    except OSError as exc:
        raise EnvFailure(f"cannot open registry {path}: {exc}") from None


def _read_json(path):
    try:
        with open(path, "rb") as fh:
            return json.loads(fh.read())
    except OSError as exc:
        raise EnvFailure(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise SDError(f"{path}: not valid JSON ({exc})") from None


def _write(path, data: bytes) -> None:
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise EnvFailure(f"cannot write {path}: {exc}") from None


def _load_key(path) -> tuple[str, str, PrivateKey]:
    d = _read_json(path)
    try:
        sk = PrivateKey.from_bytes(unhex(d["sk"], 32, "sk"))
        return d["owner_id"], d["role"], sk
    except (KeyError, TypeError) as exc:
        raise SDError(f"{path}: malformed key file ({exc})") from None


def _rng(seed):
    return random.Random(seed) if seed is not None else None


# -- commands ----------------------------------------------------------------

def cmd_keygen(args) -> int:
    if args.role not in ROLES:
        print(f"error: --role must be one of {', '.join(ROLES)}", file=sys.stderr)
        args.parser.print_usage(sys.stderr)
        return EXIT_FAIL
    seed = bytes.fromhex(args.seed) if args.seed else secrets.token_bytes(32)
    sk, pk, pop = bls.keygen(seed)
    reg = _registry(args)
    reg.register_key(args.owner, args.role, pk, pop)
    out = args.out or f"{args.owner}-{pk.hex()[:12]}.key.json"
    key_file = {
        "owner_id": args.owner,
        "role": args.role,
        "sk": sk.to_bytes().hex(),
        "pk": pk.hex(),
        "pop": pop.to_bytes().hex(),
    }
    _write(out, canonical_json(key_file))
    os.chmod(out, 0o600)
    print(pk.hex())
    return EXIT_OK


def cmd_register_format(args) -> int:
    fmt = CredentialFormat.from_json(_read_json(args.file))
    reg = _registry(args)
    print(reg.register_format(fmt))
    return EXIT_OK


def _values_for(fmt: CredentialFormat, raw) -> list:
    if isinstance(raw, dict):
        missing = [n for n in fmt.names if n not in raw]
        extra = [n for n in raw if n not in fmt.names]
        if missing or extra:
            raise SDError(f"values do not match format: missing {missing}, unexpected {extra}")
        return [raw[n] for n in fmt.names]
    if isinstance(raw, list):
        return raw
    raise SDError("values file must hold a JSON list or object")


def cmd_issue(args) -> int:
    reg = _registry(args)
    fmt = reg.snapshot().get_format(args.format_id)
    values = _values_for(fmt, _read_json(args.values))
    fmt.check_values(values)
    issuer_sks = [_load_key(p)[2] for p in args.issuer_key]
    holder_sk = _load_key(args.holder_cosign)[2] if args.holder_cosign else None
    if args.versions < 1:
        raise SDError("--versions must be at least 1")
    rng = _rng(args.seed)
    out = Path(args.out)
    written = []
    for i in range(args.versions):
        cred, rec = credential.issue_multi_issuer(fmt, values, issuer_sks, rng=rng)
        if holder_sk is not None:
            cred = credential.co_sign_holder(cred, holder_sk)
        reg.record_issuance(rec)
        path = out if args.versions == 1 else out.with_name(f"{out.stem}-v{i}{out.suffix}")
        _write(path, cred.to_bytes())
        written.append(path)
    for path in written:
        print(path)
    return EXIT_OK


def cmd_cosign(args) -> int:
    cred = Credential.from_json(_read_json(args.credential))
    holder_sk = _load_key(args.holder_key)[2]
    _write(args.out or args.credential, credential.co_sign_holder(cred, holder_sk).to_bytes())
    return EXIT_OK


def cmd_present(args) -> int:
    creds = [Credential.from_json(_read_json(p)) for p in args.credential]
    request = presentation.DisclosureRequest.from_json(_read_json(args.request))
    holder_sk = _load_key(args.holder_key)[2]
    p = presentation.build(creds, holder_sk, request, rng=_rng(args.seed))
    _write(args.out, p.to_bytes())
    return EXIT_OK


def cmd_verify(args) -> int:
    reg = _registry(args)
    try:
        raw = Path(args.presentation).read_bytes()
    except OSError as exc:
        raise EnvFailure(f"cannot read {args.presentation}: {exc}") from None
    p = presentation.Presentation.from_bytes(raw)
    nonce = unhex(args.nonce, what="nonce") if args.nonce else None
    report = presentation.verify(p, reg.snapshot(), nonce=nonce)
    for line in report.lines():
        print(line)
    print("VALID" if report.ok else "INVALID")
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_bench(args) -> int:
    rows = bench.run_suite(
        args.suite,
        max_claims=args.max_claims,
        max_disclosed=args.max_disclosed,
        repetitions=args.repetitions,
        seed=args.seed,
    )
    try:
        bench.write_csv(rows, args.out_csv)
    except OSError as exc:
        raise EnvFailure(f"cannot write {args.out_csv}: {exc}") from None
    print(f"{len(rows)} rows -> {args.out_csv}")
    return EXIT_OK


def cmd_audit(args) -> int:
    problems = _registry(args).audit()
    for p in problems:
        print(p)
    print("registry OK" if not problems else f"{len(problems)} problem(s)")
    return EXIT_OK if not problems else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sdcred", description=__doc__.splitlines()[0])
    parser.add_argument("--registry", help=f"registry file (default: ${ENV_PATH} or ./registry.jsonl)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", help="generate and register a BLS key pair")
    p.add_argument("--owner", required=True)
    p.add_argument("--role", required=True, help="issuer or holder")
    p.add_argument("--out", help="private key file to write")
    p.add_argument("--seed", help="hex seed (testing only)")
    p.set_defaults(func=cmd_keygen, parser=p)

    p = sub.add_parser("register-format", help="register a credential format from a JSON file")
    p.add_argument("--file", required=True)
    p.set_defaults(func=cmd_register_format)

    p = sub.add_parser("issue", help="issue credential(s) and record them in the registry")
    p.add_argument("--format-id", required=True)
    p.add_argument("--values", required=True, help="JSON list (format order) or object of attribute values")
    p.add_argument("--issuer-key", required=True, action="append", help="repeat for multi-issuer credentials")
    p.add_argument("--holder-cosign", help="holder key file; aggregate the holder's signature into the credential")
    p.add_argument("--versions", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_issue)

    p = sub.add_parser("cosign", help="add a holder co-signature to an issued credential")
    p.add_argument("--credential", required=True)
    p.add_argument("--holder-key", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_cosign)

    p = sub.add_parser("present", help="build a selective-disclosure presentation")
    p.add_argument("--credential", required=True, action="append")
    p.add_argument("--request", required=True)
    p.add_argument("--holder-key", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_present)

    p = sub.add_parser("verify", help="verify a presentation against the registry")
    p.add_argument("--presentation", required=True)
    p.add_argument("--nonce", help="verifier nonce (hex); omit to accept the embedded nonce")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="timing harness, writes CSV")
    p.add_argument("--suite", choices=("issue", "present", "verify", "all"), default="all")
    p.add_argument("--max-claims", type=int, default=100)
    p.add_argument("--max-disclosed", type=int, default=50)
    p.add_argument("--repetitions", type=int, default=bench.MIN_REPETITIONS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-csv", required=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("audit", help="re-verify every registry record")
    p.set_defaults(func=cmd_audit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (EnvFailure, RegistryLockedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ENV
    except SDError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
