"""Timing harness: issuance over 1..N claims, presentation and verification
over 1..K disclosed claims, split into plain disclosure and range proofs."""
from __future__ import annotations

import csv
import functools
import gc
import random
import statistics
import time
from dataclasses import astuple, dataclass

from . import presentation as pres
from .bls import keygen
from .credential import issue
from .formats import CredentialFormat, FieldSpec
from .pedersen import default_params
from .rangeproof import _generators
from .registry import Registry

CSV_COLUMNS = ("operation", "claim_count", "disclosed_count", "wall_time_us", "repetitions")
OPERATIONS = ("issue", "present-text", "present-range", "verify-text", "verify-range")
MIN_REPETITIONS = 10

# range proofs in the bench: 8-bit values proved inside [0, 255]
BENCH_RANGE = (0, 255, 8)


@dataclass(frozen=True)
class BenchResult:
    operation: str
    claim_count: int
    disclosed_count: int
    wall_time_us: float
    repetitions: int


def _time_ns(fn) -> int:
    # cyclic GC off while timing, as timeit does
    enabled = gc.isenabled()
    gc.disable()
    try:
        t0 = time.perf_counter_ns()
        fn()
        return time.perf_counter_ns() - t0
    finally:
        if enabled:
            gc.enable()


def _median_us(fn, repetitions: int) -> float:
    return statistics.median(_time_ns(fn) for _ in range(repetitions)) / 1000.0


def _interleaved_medians_us(fns: list, repetitions: int) -> list[float]:
    """Medians for several workloads, timed round-robin so that slow phases
    of the machine hit every workload alike instead of a contiguous run."""
    samples = [[] for _ in fns]
    for _ in range(repetitions):
        for fn, out in zip(fns, samples):
            out.append(_time_ns(fn))
    return [statistics.median(out) / 1000.0 for out in samples]


def _format(n: int, kind: str) -> CredentialFormat:
    return CredentialFormat(f"bench-{kind}-{n}", tuple(FieldSpec(f"claim{i}", kind) for i in range(n)))


def _values(n: int, kind: str, rng: random.Random) -> list:
    if kind == "int":
        return [rng.randrange(0, 256) for _ in range(n)]
    return ["".join(rng.choice("abcdefghijklmnopqrstuvwxyz") for _ in range(12)) for _ in range(n)]


class _World:
    def __init__(self, seed: int):
        self.rng = random.Random(seed)
        self.issuer_sk, ipk, ipop = keygen(self.rng.randbytes(32))
        self.holder_sk, hpk, hpop = keygen(self.rng.randbytes(32))
        self.registry = Registry()
        self.registry.register_key("bench-issuer", "issuer", ipk, ipop)
        self.registry.register_key("bench-holder", "holder", hpk, hpop)
        default_params()
        _generators()


def run_issue(max_claims: int = 100, repetitions: int = MIN_REPETITIONS, seed: int = 0) -> list[BenchResult]:
    w = _World(seed)
    counts = range(1, max_claims + 1)
    jobs = []
    for n in counts:
        fmt, values = _format(n, "text"), _values(n, "text", w.rng)
        jobs.append(functools.partial(issue, fmt, values, w.issuer_sk, rng=w.rng))
    times = _interleaved_medians_us(jobs, repetitions)
    return [BenchResult("issue", n, 0, t, repetitions) for n, t in zip(counts, times)]


def _credential(w: _World, n: int, kind: str):
    fmt = _format(n, kind)
    w.registry.register_format(fmt)
    cred, rec = issue(fmt, _values(n, kind, w.rng), w.issuer_sk, rng=w.rng)
    w.registry.record_issuance(rec)
    return cred


def _request(k: int, kind: str, nonce: bytes) -> pres.DisclosureRequest:
    names = [f"claim{i}" for i in range(k)]
    if kind == "text":
        item = pres.CredentialRequest(frozenset(names), {})
    else:
        item = pres.CredentialRequest(frozenset(), {name: BENCH_RANGE for name in names})
    return pres.DisclosureRequest((item,), nonce)


def run_present_verify(
    max_claims: int = 100,
    max_disclosed: int = 50,
    repetitions: int = MIN_REPETITIONS,
    seed: int = 0,
    do_present: bool = True,
    do_verify: bool = True,
) -> list[BenchResult]:
    w = _World(seed)
    creds = {"text": _credential(w, max_claims, "text"), "range": _credential(w, max_claims, "int")}
    view = w.registry.snapshot()
    nonce = w.rng.randbytes(32)
    rows = []
    for kind in ("text", "range"):
        cred = creds[kind]
        for k in range(1, min(max_disclosed, max_claims) + 1):
            req = _request(k, kind, nonce)
            built = []
            if do_present:
                t = _median_us(lambda: built.append(pres.build([cred], w.holder_sk, req, rng=w.rng)), repetitions)
                rows.append(BenchResult(f"present-{kind}", max_claims, k, t, repetitions))
            if do_verify:
                p = built[-1] if built else pres.build([cred], w.holder_sk, req, rng=w.rng)
                assert pres.verify(p, view, nonce=nonce).ok
                t = _median_us(lambda: pres.verify(p, view, nonce=nonce), repetitions)
                rows.append(BenchResult(f"verify-{kind}", max_claims, k, t, repetitions))
    return rows


def run_suite(suite: str, max_claims=100, max_disclosed=50, repetitions=MIN_REPETITIONS, seed=0):
    if repetitions < MIN_REPETITIONS:
        raise ValueError(f"at least {MIN_REPETITIONS} repetitions are required")
    if suite == "issue":
        return run_issue(max_claims, repetitions, seed)
    if suite == "present":
        return run_present_verify(max_claims, max_disclosed, repetitions, seed, do_verify=False)
    if suite == "verify":
        return run_present_verify(max_claims, max_disclosed, repetitions, seed, do_present=False)
    if suite == "all":
        return run_issue(max_claims, repetitions, seed) + run_present_verify(
            max_claims, max_disclosed, repetitions, seed
        )
    raise ValueError(f"unknown bench suite {suite!r}")


def write_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            op, n, k, t, reps = astuple(row)
            writer.writerow((op, n, k, f"{t:.1f}", reps))


def read_csv(path) -> list[BenchResult]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        return [
            BenchResult(r["operation"], int(r["claim_count"]), int(r["disclosed_count"]),
                        float(r["wall_time_us"]), int(r["repetitions"]))
            for r in reader
        ]
