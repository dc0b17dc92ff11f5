"""Command-line front end.

Subcommands:
  audit      run the full pipeline (screens, duplicates, batch GCD, Fermat)
  batchgcd   the same pipeline without the Fermat phase
  fermat     factor a single modulus given as hex
  gen-corpus emit a synthetic corpus under a chosen generation mode
  validate   run the key-quality checks on public or private keys

Exit codes: 0 completed with no findings, 1 completed with findings (for
validate: at least one failed check), 2 usage or configuration error, 3
input parse error.
"""

import argparse
import json
import sys
from pathlib import Path

from .arith import RandomSource
from .audit import AuditConfig, render_report, run_audit
from .fermat import DEFAULT_BUDGET, fermat_factor
from .keyio import (
    CorpusError,
    KeyFormatError,
    KeyRecord,
    parse_pem,
    parse_ssh_rsa,
    read_corpus,
    write_corpus,
)
from .rsa import (
    ClosePrime,
    Hardened,
    KeyGenPolicy,
    LowEntropy,
    PrivateKey,
    SharedPrime,
    generate_corpus,
    validate_private,
    validate_public,
)

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2
EXIT_PARSE = 3


def _add_input_flags(sub):
    sub.add_argument("--corpus", action="append", metavar="PATH",
                     help="JSON-lines corpus file (repeatable)")
    sub.add_argument("--pem", action="append", metavar="PATH",
                     help="PEM file of PUBLIC KEY blocks (repeatable)")
    sub.add_argument("--ssh", action="append", metavar="PATH",
                     help="file of ssh-rsa lines (repeatable)")


def _load_inputs(args) -> list[KeyRecord]:
    records: list[KeyRecord] = []
    for path in args.corpus or []:
        with open(path, encoding="utf-8") as handle:
            records.extend(read_corpus(handle))
    for path in args.pem or []:
        keys = parse_pem(Path(path).read_text(encoding="utf-8"))
        records.extend(
            KeyRecord(id=f"{path}#{i}", key=key, source=path)
            for i, key in enumerate(keys)
        )
    for path in args.ssh or []:
        with open(path, encoding="utf-8") as handle:
            for lineno, raw in enumerate(handle, 1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                records.append(
                    KeyRecord(
                        id=f"{path}:{lineno}",
                        key=parse_ssh_rsa(line),
                        source=f"{path}:{lineno}",
                    )
                )
    seen = set()
    for record in records:
        if record.id in seen:
            raise CorpusError(f"duplicate key id {record.id!r} across inputs")
        seen.add(record.id)
    return records


def _emit_report(report, args) -> int:
    text = render_report(report)
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_FINDINGS if report.findings else EXIT_OK


def _require_inputs(args) -> bool:
    return bool(args.corpus or args.pem or args.ssh)


def cmd_audit(args) -> int:
    if not _require_inputs(args):
        print("error: no inputs; pass --corpus, --pem, or --ssh", file=sys.stderr)
        return EXIT_USAGE
    config = AuditConfig(
        fermat_budget=args.fermat_budget,
        small_prime_bound=args.small_prime_bound,
        reconstruct=args.reconstruct,
        threads=args.threads,
    )
    return _emit_report(run_audit(_load_inputs(args), config), args)


def cmd_batchgcd(args) -> int:
    if not _require_inputs(args):
        print("error: no inputs; pass --corpus, --pem, or --ssh", file=sys.stderr)
        return EXIT_USAGE
    config = AuditConfig(
        small_prime_bound=args.small_prime_bound,
        reconstruct=args.reconstruct,
        threads=args.threads,
        run_fermat=False,
    )
    return _emit_report(run_audit(_load_inputs(args), config), args)


def cmd_fermat(args) -> int:
    try:
        n = int(args.n, 16)
    except ValueError:
        print(f"error: --n must be hex, got {args.n!r}", file=sys.stderr)
        return EXIT_PARSE
    result = fermat_factor(n, args.budget)
    if result.factored:
        print(f"p = {result.p:x}")
        print(f"q = {result.q:x}")
        print(f"iterations = {result.iterations_used}")
        return EXIT_FINDINGS
    print(f"budget exhausted after {result.iterations_used} iterations")
    return EXIT_OK


_MODE_NAMES = ("hardened", "close", "shared", "lowentropy")


def _build_mode(args):
    if args.mode == "hardened":
        return Hardened()
    if args.mode == "close":
        return ClosePrime(gap_bits=args.gap_bits)
    if args.mode == "shared":
        return SharedPrime(pool_size=args.pool_size)
    return LowEntropy(seed_bits=args.seed_bits)


def cmd_gen_corpus(args) -> int:
    policy = KeyGenPolicy(modulus_bits=args.bits, mode=_build_mode(args))
    keys = generate_corpus(policy, args.count, RandomSource(args.seed))
    records = [
        KeyRecord(id=f"key-{i:06d}", key=key.public(), tag=args.tag)
        for i, key in enumerate(keys)
    ]
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            write_corpus(records, handle)
    else:
        write_corpus(records, sys.stdout)
    if args.private_out:
        with open(args.private_out, "w", encoding="utf-8") as handle:
            for record, key in zip(records, keys):
                handle.write(json.dumps({
                    "id": record.id,
                    "n": format(key.n, "x"),
                    "e": format(key.e, "x"),
                    "d": format(key.d, "x"),
                    "p": format(key.p, "x"),
                    "q": format(key.q, "x"),
                }) + "\n")
    return EXIT_OK


def _private_from_line(line: str, lineno: int) -> tuple[str, PrivateKey]:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorpusError(f"line {lineno}: invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise CorpusError(f"line {lineno}: record must be an object")
    values = {}
    for name in ("n", "e", "d", "p", "q"):
        raw = obj.get(name)
        try:
            values[name] = int(raw, 16)
        except (TypeError, ValueError):
            raise CorpusError(
                f"line {lineno}: field {name!r} must be lowercase hex"
            ) from None
    key_id = obj.get("id") or f"line-{lineno}"
    phi = (values["p"] - 1) * (values["q"] - 1)
    return key_id, PrivateKey(
        n=values["n"], e=values["e"], d=values["d"],
        p=values["p"], q=values["q"], phi=phi,
    )


def _print_report(ident: str, report) -> bool:
    verdict = "PASS" if report.passed else "FAIL"
    details = "; ".join(
        f"{check.name}={check.status}" for check in report.checks
    )
    print(f"{ident}: {verdict} ({details})")
    for check in report.checks:
        if check.status == "fail" and check.detail:
            print(f"  {check.name}: {check.detail}")
    return report.passed


def cmd_validate(args) -> int:
    chosen = [flag for flag in (args.pem, args.ssh, args.private) if flag]
    if len(chosen) != 1:
        print("error: pass exactly one of --pem, --ssh, --private", file=sys.stderr)
        return EXIT_USAGE
    all_passed = True
    if args.pem:
        keys = parse_pem(Path(args.pem).read_text(encoding="utf-8"))
        if not keys:
            print("error: no PUBLIC KEY blocks found", file=sys.stderr)
            return EXIT_USAGE
        for i, key in enumerate(keys):
            report = validate_public(key, args.fermat_budget)
            all_passed &= _print_report(f"{args.pem}#{i}", report)
    elif args.ssh:
        with open(args.ssh, encoding="utf-8") as handle:
            lines = [
                (i, line.strip()) for i, line in enumerate(handle, 1)
                if line.strip() and not line.lstrip().startswith("#")
            ]
        if not lines:
            print("error: no ssh-rsa lines found", file=sys.stderr)
            return EXIT_USAGE
        for lineno, line in lines:
            report = validate_public(parse_ssh_rsa(line), args.fermat_budget)
            all_passed &= _print_report(f"{args.ssh}:{lineno}", report)
    else:
        with open(args.private, encoding="utf-8") as handle:
            any_key = False
            for lineno, raw in enumerate(handle, 1):
                line = raw.strip()
                if not line:
                    continue
                any_key = True
                key_id, key = _private_from_line(line, lineno)
                bits = args.bits or (key.n.bit_length() + 1) // 2 * 2
                report = validate_private(key, bits, args.fermat_budget)
                all_passed &= _print_report(key_id, report)
        if not any_key:
            print("error: no private keys found", file=sys.stderr)
            return EXIT_USAGE
    return EXIT_OK if all_passed else EXIT_FINDINGS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="primeaudit",
        description="Detect close-prime and shared-prime failures in RSA key corpora.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    audit = sub.add_parser("audit", help="run every screen and both attacks")
    _add_input_flags(audit)
    audit.add_argument("--fermat-budget", type=int, default=DEFAULT_BUDGET)
    audit.add_argument("--small-prime-bound", type=int, default=1 << 16)
    audit.add_argument("--reconstruct", action="store_true",
                       help="rebuild private keys from recovered factors")
    audit.add_argument("--report", metavar="PATH", help="write report here instead of stdout")
    audit.add_argument("--threads", type=int, default=1)
    audit.set_defaults(func=cmd_audit)

    batch = sub.add_parser("batchgcd", help="audit pipeline without the Fermat phase")
    _add_input_flags(batch)
    batch.add_argument("--small-prime-bound", type=int, default=1 << 16)
    batch.add_argument("--reconstruct", action="store_true")
    batch.add_argument("--report", metavar="PATH")
    batch.add_argument("--threads", type=int, default=1)
    batch.set_defaults(func=cmd_batchgcd)

    fermat = sub.add_parser("fermat", help="factor one modulus by the close-prime walk")
    fermat.add_argument("--n", required=True, metavar="HEX")
    fermat.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    fermat.set_defaults(func=cmd_fermat)

    gen = sub.add_parser("gen-corpus", help="emit a synthetic corpus")
    gen.add_argument("--mode", required=True, choices=_MODE_NAMES)
    gen.add_argument("--count", required=True, type=int)
    gen.add_argument("--bits", required=True, type=int)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--tag", default=None)
    gen.add_argument("--gap-bits", type=int, default=24,
                     help="close mode: bit length of the prime gap")
    gen.add_argument("--pool-size", type=int, default=32,
                     help="shared mode: number of primes in the shared pool")
    gen.add_argument("--seed-bits", type=int, default=8,
                     help="lowentropy mode: entropy of each per-prime seed")
    gen.add_argument("--out", metavar="PATH", help="corpus path (default stdout)")
    gen.add_argument("--private-out", metavar="PATH",
                     help="also write the private halves as JSON lines")
    gen.set_defaults(func=cmd_gen_corpus)

    val = sub.add_parser("validate", help="run key-quality checks")
    val.add_argument("--pem", metavar="PATH")
    val.add_argument("--ssh", metavar="PATH")
    val.add_argument("--private", metavar="PATH",
                     help="JSON-lines private keys with hex n, e, d, p, q")
    val.add_argument("--fermat-budget", type=int, default=DEFAULT_BUDGET)
    val.add_argument("--bits", type=int, default=None,
                     help="modulus size for the distance check (default: inferred)")
    val.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except KeyFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entrypoint() -> None:
    sys.exit(main())
