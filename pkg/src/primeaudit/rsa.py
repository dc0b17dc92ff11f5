"""RSA key material: generation, validation, and recovery.

Key generation supports one hardened mode and three deliberately broken
ones that reproduce the classic prime-selection failures:

* ClosePrime picks q just above p, so the modulus falls to the difference
  of squares walk in fermat.
* SharedPrime draws p from a fixed pool, so distinct keys collide on a
  prime and pairwise gcds of their moduli give it away.
* LowEntropy reseeds the prime stream from a tiny seed value per prime,
  the way devices that key right after boot do; with few possible seeds,
  independent keys repeat primes or entire moduli.

Encryption here is textbook (no padding): the attacks target key material,
and raw round trips are what prove a recovered private key works.

PublicKey and PrivateKey are plain carriers and accept whatever values
they are given; real-world corpora contain structurally invalid keys (even
moduli, corrupted exponents) and the point of this package is to examine
those, not refuse to represent them. The generation functions only produce
keys satisfying the documented invariants, and validate_private /
validate_public check them explicitly.
"""

from dataclasses import dataclass

from .arith import RandomSource, is_probable_prime, mod_inverse, mod_pow, next_prime, random_prime
from .fermat import fermat_factor

__all__ = [
    "PublicKey",
    "PrivateKey",
    "Hardened",
    "ClosePrime",
    "SharedPrime",
    "LowEntropy",
    "KeyGenPolicy",
    "KeyGenerator",
    "generate_keypair",
    "generate_corpus",
    "CheckStatus",
    "CheckOutcome",
    "ValidationReport",
    "validate_private",
    "validate_public",
    "encrypt",
    "decrypt",
    "reconstruct_private",
]

# Fermat self-test budget applied while generating hardened keys. The
# distance check already rules out any modulus a realistic budget could
# crack, so generation only needs a token sweep; audits apply their own,
# much larger budget.
GENERATION_FERMAT_BUDGET = 1024

_MAX_GENERATION_ATTEMPTS = 10_000


@dataclass(frozen=True)
class PublicKey:
    n: int
    e: int


@dataclass(frozen=True)
class PrivateKey:
    n: int
    e: int
    d: int
    p: int
    q: int
    phi: int

    def public(self) -> PublicKey:
        return PublicKey(self.n, self.e)


@dataclass(frozen=True)
class Hardened:
    pass


@dataclass(frozen=True)
class ClosePrime:
    gap_bits: int


@dataclass(frozen=True)
class SharedPrime:
    pool_size: int


@dataclass(frozen=True)
class LowEntropy:
    seed_bits: int


Mode = Hardened | ClosePrime | SharedPrime | LowEntropy


@dataclass(frozen=True)
class KeyGenPolicy:
    modulus_bits: int
    public_exponent: int = 65537
    mode: Mode = Hardened()
    primality_rounds: int = 24

    def __post_init__(self):
        if self.modulus_bits < 64 or self.modulus_bits % 2:
            raise ValueError("modulus_bits must be even and >= 64")
        if self.public_exponent < 3 or self.public_exponent % 2 == 0:
            raise ValueError("public exponent must be odd and >= 3")
        if self.primality_rounds < 1:
            raise ValueError("primality_rounds must be >= 1")
        mode = self.mode
        if isinstance(mode, ClosePrime):
            if not 1 <= mode.gap_bits < self.modulus_bits // 2:
                raise ValueError("gap_bits must be in [1, modulus_bits/2)")
        elif isinstance(mode, SharedPrime):
            if mode.pool_size < 1:
                raise ValueError("pool_size must be >= 1")
        elif isinstance(mode, LowEntropy):
            if not 1 <= mode.seed_bits <= 64:
                raise ValueError("seed_bits must be in [1, 64]")
        elif not isinstance(mode, Hardened):
            raise ValueError(f"unknown generation mode: {mode!r}")


class KeyGenerator:
    """Stateful generator bound to one policy and one random stream.

    SharedPrime keeps its prime pool here, so keys sharing a pool must come
    from the same generator instance. Everything a generator emits is a
    deterministic function of (policy, rng seed).
    """

    def __init__(self, policy: KeyGenPolicy, rng: RandomSource):
        self._policy = policy
        self._rng = rng
        self._pool: list[int] | None = None

    def generate(self) -> PrivateKey:
        policy = self._policy
        for _ in range(_MAX_GENERATION_ATTEMPTS):
            mode = policy.mode
            if isinstance(mode, Hardened):
                key = self._attempt_hardened()
            elif isinstance(mode, ClosePrime):
                key = self._attempt_close(mode)
            elif isinstance(mode, SharedPrime):
                key = self._attempt_shared(mode)
            else:
                key = self._attempt_lowentropy(mode)
            if key is not None:
                return key
        raise RuntimeError("key generation failed to converge")

    def _prime(self, rng: RandomSource) -> int:
        return random_prime(
            self._policy.modulus_bits // 2, rng, self._policy.primality_rounds
        )

    def _assemble(self, p: int, q: int) -> PrivateKey | None:
        """None when gcd(e, phi) != 1; the caller regenerates primes."""
        if p > q:
            p, q = q, p
        phi = (p - 1) * (q - 1)
        e = self._policy.public_exponent
        d = mod_inverse(e, phi)
        if d is None:
            return None
        return PrivateKey(n=p * q, e=e, d=d, p=p, q=q, phi=phi)

    def _attempt_hardened(self) -> PrivateKey | None:
        p = self._prime(self._rng)
        q = self._prime(self._rng)
        if p == q:
            return None
        key = self._assemble(p, q)
        if key is None:
            return None
        report = validate_private(
            key, self._policy.modulus_bits, GENERATION_FERMAT_BUDGET
        )
        # Failed candidates are thrown away whole; nudging a prime that sat
        # too close to its partner would bias the distribution.
        return key if report.passed else None

    def _attempt_close(self, mode: ClosePrime) -> PrivateKey | None:
        p = self._prime(self._rng)
        delta = self._rng.getrandbits(mode.gap_bits) | (1 << (mode.gap_bits - 1))
        q = next_prime(p + delta, self._policy.primality_rounds)
        return self._assemble(p, q)

    def _attempt_shared(self, mode: SharedPrime) -> PrivateKey | None:
        if self._pool is None:
            self._pool = [self._prime(self._rng) for _ in range(mode.pool_size)]
        p = self._pool[self._rng.randrange(mode.pool_size)]
        q = self._prime(self._rng)
        if p == q:
            return None
        return self._assemble(p, q)

    def _attempt_lowentropy(self, mode: LowEntropy) -> PrivateKey | None:
        # Each prime draws its own starved seed. The two positions seed
        # from disjoint ranges so a key never pairs a prime with itself,
        # but across keys there are only 2**seed_bits streams per position,
        # which is what makes corpora collide.
        seed_p = self._rng.getrandbits(mode.seed_bits)
        p = self._prime(RandomSource(seed_p))
        seed_q = self._rng.getrandbits(mode.seed_bits)
        q = self._prime(RandomSource((1 << mode.seed_bits) + seed_q))
        if p == q:
            return None
        return self._assemble(p, q)


def generate_keypair(policy: KeyGenPolicy, rng: RandomSource) -> PrivateKey:
    """One key under the policy. For SharedPrime corpora use KeyGenerator
    or generate_corpus, since the pool lives on the generator instance."""
    return KeyGenerator(policy, rng).generate()


def generate_corpus(policy: KeyGenPolicy, count: int, rng: RandomSource) -> list[PrivateKey]:
    if count < 0:
        raise ValueError("count must be nonnegative")
    gen = KeyGenerator(policy, rng)
    return [gen.generate() for _ in range(count)]


class CheckStatus:
    PASS = "pass"
    FAIL = "fail"
    NOT_APPLICABLE = "n/a"


@dataclass(frozen=True)
class CheckOutcome:
    name: str
    status: str
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[CheckOutcome, ...]

    @property
    def passed(self) -> bool:
        return all(c.status != CheckStatus.FAIL for c in self.checks)

    def check(self, name: str) -> CheckOutcome:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _distance_threshold(modulus_bits: int) -> int:
    # |p - q| must exceed 2**(modulus_bits/2 - 100); for tiny toy moduli the
    # exponent goes negative and any nonzero distance passes.
    shift = modulus_bits // 2 - 100
    return 1 << shift if shift >= 0 else 0


def _fermat_selftest(n: int, budget: int) -> CheckOutcome:
    result = fermat_factor(n, budget)
    if result.factored:
        return CheckOutcome(
            "fermat",
            CheckStatus.FAIL,
            f"factored in {result.iterations_used} iterations "
            f"(p={result.p}, q={result.q})",
        )
    return CheckOutcome("fermat", CheckStatus.PASS, f"survived budget {budget}")


def validate_private(key: PrivateKey, modulus_bits: int, fermat_budget: int) -> ValidationReport:
    """Generation-quality checks on a private key.

    distance: |p - q| above the 2**(modulus_bits/2 - 100) floor.
    fermat: the modulus survives a difference-of-squares walk of
    fermat_budget steps.
    consistency: p * q == n, phi == (p-1)(q-1), e * d == 1 mod phi.
    """
    threshold = _distance_threshold(modulus_bits)
    distance = abs(key.p - key.q)
    checks = [
        CheckOutcome(
            "distance",
            CheckStatus.PASS if distance > threshold else CheckStatus.FAIL,
            f"|p - q| has {distance.bit_length()} bits, "
            f"threshold 2^{max(modulus_bits // 2 - 100, 0)}",
        ),
        _fermat_selftest(key.n, fermat_budget)
        if key.n % 2 and key.n >= 9
        else CheckOutcome("fermat", CheckStatus.FAIL, "modulus even or too small"),
    ]
    problems = []
    if key.p * key.q != key.n:
        problems.append("p * q != n")
    if key.phi != (key.p - 1) * (key.q - 1):
        problems.append("phi != (p-1)(q-1)")
    if key.phi < 1 or key.e * key.d % key.phi != 1:
        problems.append("e * d != 1 mod phi")
    checks.append(
        CheckOutcome(
            "consistency",
            CheckStatus.FAIL if problems else CheckStatus.PASS,
            "; ".join(problems),
        )
    )
    return ValidationReport(tuple(checks))


def _smallest_factor_below(n: int, bound: int) -> int | None:
    if n % 2 == 0:
        return 2
    f = 3
    while f < bound and f * f <= n:
        if n % f == 0:
            return f
        f += 2
    return None


def validate_public(key: PublicKey, fermat_budget: int) -> ValidationReport:
    """Checks possible without the factors: small-factor screen (primes
    below 2**16) and the Fermat self-test. The two are independent signals
    and both always run when they can; distance is reported n/a."""
    small = _smallest_factor_below(key.n, 1 << 16)
    checks = [
        CheckOutcome("distance", CheckStatus.NOT_APPLICABLE, "factors unknown"),
        _fermat_selftest(key.n, fermat_budget)
        if key.n % 2 and key.n >= 9
        else CheckOutcome(
            "fermat", CheckStatus.NOT_APPLICABLE, "modulus even or too small"
        ),
        CheckOutcome(
            "small_factor",
            CheckStatus.PASS if small is None else CheckStatus.FAIL,
            "" if small is None else f"divisible by {small}",
        ),
    ]
    return ValidationReport(tuple(checks))


def encrypt(key: PublicKey, m: int) -> int:
    if not 0 <= m < key.n:
        raise ValueError("message out of range")
    return mod_pow(m, key.e, key.n)


def decrypt(key: PrivateKey, c: int) -> int:
    if not 0 <= c < key.n:
        raise ValueError("ciphertext out of range")
    return mod_pow(c, key.d, key.n)


def reconstruct_private(pub: PublicKey, p: int, primality_rounds: int = 24) -> PrivateKey:
    """Rebuild the full private key from the public half and one prime factor.

    This is the payoff step after either attack recovers p: q = n / p,
    phi = (p-1)(q-1), d = inverse of e mod phi.
    """
    if not 1 < p < pub.n:
        raise ValueError("factor must be a proper divisor")
    if pub.n % p != 0:
        raise ValueError("factor does not divide the modulus")
    if not is_probable_prime(p, primality_rounds):
        raise ValueError("factor is not prime")
    q = pub.n // p
    if p > q:
        p, q = q, p
    phi = (p - 1) * (q - 1)
    d = mod_inverse(pub.e, phi)
    if d is None:
        raise ValueError("public exponent not invertible mod phi")
    return PrivateKey(n=pub.n, e=pub.e, d=d, p=p, q=q, phi=phi)
