"""Toolkit for finding RSA keys whose primes were chosen badly.

Two generation failures dominate real-world factorable keys: primes picked
too close together (broken by a difference-of-squares walk) and primes
shared between keys (broken by batch GCD across a corpus). This package
generates such keys on purpose, detects them at corpus scale, rebuilds the
private keys from the recovered factors, and validates fresh keys against
the checks that would have prevented the whole mess.
"""

from .arith import (
    RandomSource,
    ceil_isqrt,
    gcd,
    is_probable_prime,
    isqrt,
    mod_inverse,
    mod_pow,
    next_prime,
    random_prime,
)
from .audit import AuditConfig, Finding, Report, Vuln, render_report, run_audit
from .batchgcd import (
    BatchResult,
    ModulusResult,
    ModulusStatus,
    ProductTree,
    batch_gcd,
    build_product_tree,
    naive_pairwise_gcd,
    remainder_tree,
)
from .fermat import (
    DEFAULT_BUDGET,
    FermatOutcome,
    FermatResult,
    exact_iterations,
    fermat_factor,
)
from .keyio import (
    CorpusError,
    DerError,
    DerIntegerError,
    DerOidError,
    DerStructureError,
    DerTrailingDataError,
    KeyFormatError,
    KeyRecord,
    PemError,
    SshKeyError,
    encode_der_spki,
    encode_pem,
    encode_ssh_rsa,
    parse_der_spki,
    parse_pem,
    parse_ssh_rsa,
    read_corpus,
    write_corpus,
)
from .rsa import (
    CheckOutcome,
    CheckStatus,
    ClosePrime,
    Hardened,
    KeyGenPolicy,
    KeyGenerator,
    LowEntropy,
    PrivateKey,
    PublicKey,
    SharedPrime,
    ValidationReport,
    decrypt,
    encrypt,
    generate_corpus,
    generate_keypair,
    reconstruct_private,
    validate_private,
    validate_public,
)

__version__ = "0.1.0"
