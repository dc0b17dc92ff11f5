"""Corpus-level audit: run every screen and both attacks, emit one report.

Pipeline order is fixed: (1) even-modulus and small-factor screens, (2)
duplicate-modulus detection, (3) batch GCD across the surviving moduli, (4)
a per-key Fermat walk. A key can appear in several findings — a duplicated
modulus whose primes are also close is two independent problems and gets
reported as both.

Every piece of evidence is re-verified before it reaches the report: factors
are checked to divide the modulus, and reconstructed private keys must
round-trip decrypt(encrypt(2)) = 2 or they are dropped. Reports are
deterministic for a given corpus and config (timings aside) and invariant
under corpus permutation: findings are sorted by key id, peer lists are
sorted, and batch GCD is fed moduli in a canonical order so its fallback
divisor choices cannot depend on input order.
"""

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum

from .arith import _sieve, is_probable_prime
from .batchgcd import ModulusStatus, batch_gcd
from .fermat import fermat_factor
from .rsa import PrivateKey, PublicKey, decrypt, encrypt, reconstruct_private

__all__ = [
    "Vuln",
    "Finding",
    "AuditConfig",
    "Report",
    "run_audit",
    "report_to_dict",
    "render_report",
]


class Vuln(Enum):
    CLOSE_PRIME = "ClosePrime"
    SHARED_PRIME = "SharedPrime"
    DUPLICATE_MODULUS = "DuplicateModulus"
    SMALL_FACTOR = "SmallFactor"
    EVEN_MODULUS = "EvenModulus"


@dataclass(frozen=True)
class Finding:
    """One detected weakness on one key.

    factors holds whatever divisor(s) the detecting phase recovered;
    iterations_used is set for ClosePrime findings, peers for
    SharedPrime/DuplicateModulus ones.
    """

    key_id: str
    vuln: Vuln
    factors: tuple[int, ...] = ()
    iterations_used: int | None = None
    peers: tuple[str, ...] = ()
    reconstructed: PrivateKey | None = None


@dataclass(frozen=True)
class AuditConfig:
    fermat_budget: int = 100_000
    small_prime_bound: int = 1 << 16
    reconstruct: bool = False
    threads: int = 1
    # The batch-GCD-only entry point reuses this pipeline with the Fermat
    # phase switched off.
    run_fermat: bool = True

    def __post_init__(self):
        if self.fermat_budget < 0:
            raise ValueError("fermat_budget must be nonnegative")
        if self.small_prime_bound < 0:
            raise ValueError("small_prime_bound must be nonnegative")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    def as_dict(self) -> dict:
        return {
            "fermat_budget": self.fermat_budget,
            "small_prime_bound": self.small_prime_bound,
            "reconstruct": self.reconstruct,
            "threads": self.threads,
            "run_fermat": self.run_fermat,
        }


@dataclass(frozen=True)
class TagSummary:
    vulnerable_count: int
    percentage: float


@dataclass(frozen=True)
class Report:
    corpus_size: int
    findings: tuple[Finding, ...]
    per_tag_summary: dict[str, TagSummary]
    timings: dict[str, float]
    config: AuditConfig


def _small_factor(n: int, primes: list[int]) -> int | None:
    if n <= 1:
        return None
    for p in primes:
        if n % p == 0:
            return p
    return None


def _fermat_all(values: list[int], budget: int, threads: int) -> dict[int, object]:
    def attack(v):
        return fermat_factor(v, budget)

    if threads > 1 and len(values) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(attack, values))
    else:
        results = [attack(v) for v in values]
    return dict(zip(values, results))


def _attach_reconstruction(finding: Finding, n: int, e: int) -> Finding:
    """Rebuild the private key when a recovered factor allows it; the result
    must survive an encrypt/decrypt round trip or nothing is attached."""
    for factor in finding.factors:
        if not 1 < factor < n or n % factor or not is_probable_prime(factor):
            continue
        try:
            key = reconstruct_private(PublicKey(n, e), factor)
        except ValueError:
            continue
        if n > 2 and decrypt(key, encrypt(key.public(), 2)) == 2:
            return replace(finding, reconstructed=key)
    return finding


def run_audit(corpus, config: AuditConfig = AuditConfig()) -> Report:
    """Audit a sequence of KeyRecord and return the full report.

    Raises ValueError on duplicate key ids; every other per-key problem
    becomes a finding rather than an exception.
    """
    records = list(corpus)
    seen = set()
    for record in records:
        if record.id in seen:
            raise ValueError(f"duplicate key id {record.id!r}")
        seen.add(record.id)

    findings: list[Finding] = []

    # Phase 1: structural screens.
    screen_primes = _sieve(config.small_prime_bound) if config.small_prime_bound else []
    survivors = []
    for record in records:
        n = record.key.n
        if n % 2 == 0:
            findings.append(Finding(record.id, Vuln.EVEN_MODULUS, factors=(2,)))
            continue
        factor = _small_factor(n, screen_primes)
        if factor is not None:
            findings.append(Finding(record.id, Vuln.SMALL_FACTOR, factors=(factor,)))
            continue
        survivors.append(record)

    # Phase 2: duplicate moduli.
    by_value: dict[int, list] = {}
    for record in survivors:
        by_value.setdefault(record.key.n, []).append(record)
    for value, group in by_value.items():
        if len(group) > 1:
            ids = sorted(r.id for r in group)
            for record in group:
                peers = tuple(i for i in ids if i != record.id)
                findings.append(
                    Finding(record.id, Vuln.DUPLICATE_MODULUS, peers=peers)
                )

    # Phase 3: batch GCD over the distinct surviving moduli. Sorting the
    # values first makes the fully-shared fallback's divisor choice a
    # function of the value set, not of corpus order.
    batch_start = time.perf_counter()
    unique_values = sorted(by_value)
    # n = 1 slips past both screens but cannot share anything and is not a
    # legal batch input; leave it out rather than abort the run.
    batch_values = [v for v in unique_values if v >= 2]
    shared_divisor: dict[int, int] = {}
    if len(batch_values) >= 2:
        result = batch_gcd(batch_values)
        for value, outcome in zip(batch_values, result.per_modulus):
            if outcome.status in (ModulusStatus.SHARED_FACTOR, ModulusStatus.FULLY_SHARED):
                shared_divisor[value] = outcome.divisor
    flagged_records = [r for r in survivors if r.key.n in shared_divisor]
    for record in flagged_records:
        n = record.key.n
        peers = sorted(
            other.id
            for other in flagged_records
            if other.id != record.id and math.gcd(n, other.key.n) > 1
        )
        findings.append(
            Finding(
                record.id,
                Vuln.SHARED_PRIME,
                factors=(shared_divisor[n],),
                peers=tuple(peers),
            )
        )
    batch_ms = (time.perf_counter() - batch_start) * 1000.0

    # Phase 4: per-key Fermat walk. Shared or duplicated keys take it too; a
    # close-prime pair that also leaked through a shared pool is both
    # findings. Each distinct modulus is attacked once.
    fermat_start = time.perf_counter()
    fermat_ms = 0.0
    if config.run_fermat:
        attackable = [v for v in unique_values if v >= 9]
        outcomes = _fermat_all(attackable, config.fermat_budget, config.threads)
        for record in survivors:
            outcome = outcomes.get(record.key.n)
            if outcome is not None and outcome.factored:
                findings.append(
                    Finding(
                        record.id,
                        Vuln.CLOSE_PRIME,
                        factors=(outcome.p, outcome.q),
                        iterations_used=outcome.iterations_used,
                    )
                )
        fermat_ms = (time.perf_counter() - fermat_start) * 1000.0

    # Evidence check: a factor that does not divide its modulus would be a
    # pipeline bug; refuse to report it.
    keys_by_id = {r.id: r.key for r in records}
    for finding in findings:
        n = keys_by_id[finding.key_id].n
        for factor in finding.factors:
            if factor == 0 or n % factor:
                raise AssertionError(
                    f"internal error: factor {factor} does not divide modulus of "
                    f"{finding.key_id}"
                )

    if config.reconstruct:
        findings = [
            _attach_reconstruction(
                f, keys_by_id[f.key_id].n, keys_by_id[f.key_id].e
            )
            if f.factors
            else f
            for f in findings
        ]

    findings.sort(key=lambda f: (f.key_id, f.vuln.value))

    vulnerable_ids = {f.key_id for f in findings}
    tags_by_id = {r.id: r.tag for r in records}
    per_tag: dict[str, int] = {}
    for key_id in vulnerable_ids:
        tag = tags_by_id[key_id]
        if tag is not None:
            per_tag[tag] = per_tag.get(tag, 0) + 1
    total_vulnerable = len(vulnerable_ids)
    summary = {
        tag: TagSummary(count, round(count * 100.0 / total_vulnerable, 1))
        for tag, count in sorted(per_tag.items())
    }

    return Report(
        corpus_size=len(records),
        findings=tuple(findings),
        per_tag_summary=summary,
        timings={"fermat_total": fermat_ms, "batchgcd_total": batch_ms},
        config=config,
    )


def _finding_to_dict(finding: Finding) -> dict:
    entry = {
        "key_id": finding.key_id,
        "vuln": finding.vuln.value,
        "factors": [format(f, "x") for f in finding.factors],
        "iterations_used": finding.iterations_used,
        "peers": list(finding.peers),
    }
    if finding.reconstructed is not None:
        key = finding.reconstructed
        entry["reconstructed"] = {
            "p": format(key.p, "x"),
            "q": format(key.q, "x"),
            "d": format(key.d, "x"),
        }
    else:
        entry["reconstructed"] = None
    return entry


def report_to_dict(report: Report) -> dict:
    return {
        "corpus_size": report.corpus_size,
        "findings": [_finding_to_dict(f) for f in report.findings],
        "per_tag_summary": {
            tag: {"vulnerable_count": s.vulnerable_count, "percentage": s.percentage}
            for tag, s in report.per_tag_summary.items()
        },
        "timings": dict(report.timings),
        "config": report.config.as_dict(),
    }


def render_report(report: Report) -> str:
    return json.dumps(report_to_dict(report), indent=2) + "\n"
