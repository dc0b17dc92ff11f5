"""Arbitrary-precision integer primitives.

All values are plain Python ints, which are unbounded; "natural" here means
a nonnegative int. Functions raise ValueError on negative inputs or other
precondition violations and otherwise always return a value.

Every source of randomness in this package is a RandomSource, a seeded
deterministic stream. Two sources built from the same seed produce the same
values forever, which is what makes generated key corpora reproducible.
"""

import random

import gmpy2

__all__ = [
    "RandomSource",
    "isqrt",
    "ceil_isqrt",
    "perfect_square_root",
    "gcd",
    "mod_inverse",
    "mod_pow",
    "is_probable_prime",
    "random_prime",
    "next_prime",
]

# Retry cap for prime generation; failing it means the candidate stream is
# broken, not unlucky (miss probability is below e^-25 for any bit size).
MAX_PRIME_ATTEMPTS = 10_000


class RandomSource:
    """Deterministic random bit stream from an integer seed.

    A thin wrapper over random.Random kept deliberately small: holders draw
    bits or bounded ints and nothing else. A source is single-owner; never
    share one between concurrent generators, fork a new seed instead.
    """

    def __init__(self, seed: int):
        self._rng = random.Random(seed)
        self.seed = seed

    def getrandbits(self, k: int) -> int:
        if k < 0:
            raise ValueError("bit count must be nonnegative")
        if k == 0:
            return 0
        return self._rng.getrandbits(k)

    def randrange(self, bound: int) -> int:
        """Uniform int in [0, bound)."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        return self._rng.randrange(bound)

    def __repr__(self) -> str:
        return f"RandomSource(seed={self.seed!r})"


def isqrt(n: int) -> int:
    """Floor square root by Newton's integer iteration.

    Returns r with r*r <= n < (r+1)*(r+1).
    """
    if n < 0:
        raise ValueError("isqrt of negative value")
    if n < 2:
        return n
    # Start above the root; the iteration then decreases monotonically and
    # the first non-decrease is the floor root.
    x = 1 << (n.bit_length() + 1) // 2
    while True:
        y = (x + n // x) // 2
        if y >= x:
            return x
        x = y


def ceil_isqrt(n: int) -> int:
    """Smallest r with r*r >= n."""
    r = isqrt(n)
    return r if r * r == n else r + 1


def perfect_square_root(n: int) -> int | None:
    """Exact square root of n, or None when n is not a perfect square."""
    if n < 0:
        raise ValueError("square root of negative value")
    r = isqrt(n)
    return r if r * r == n else None


def gcd(a: int, b: int) -> int:
    """Greatest common divisor by the Euclidean algorithm; gcd(0, 0) == 0."""
    if a < 0 or b < 0:
        raise ValueError("gcd of negative value")
    while b:
        a, b = b, a % b
    return a


def mod_inverse(a: int, m: int) -> int | None:
    """Inverse of a modulo m in [1, m), or None when gcd(a, m) != 1.

    Extended Euclidean algorithm; m must be >= 2.
    """
    if m < 2:
        raise ValueError("modulus must be >= 2")
    if a < 0:
        raise ValueError("negative operand")
    r0, r1 = m, a % m
    s0, s1 = 0, 1
    while r1:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if r0 != 1:
        return None
    return s0 % m


def mod_pow(base: int, exp: int, m: int) -> int:
    """base**exp mod m by binary square-and-multiply; m must be >= 1."""
    if m < 1:
        raise ValueError("modulus must be >= 1")
    if base < 0 or exp < 0:
        raise ValueError("negative operand")
    result = 1 % m
    b = base % m
    e = exp
    while e:
        if e & 1:
            result = result * b % m
        b = b * b % m
        e >>= 1
    return result


def _sieve(limit: int) -> list[int]:
    flags = bytearray([1]) * limit
    flags[0:2] = b"\x00\x00"
    for i in range(2, isqrt(limit - 1) + 1):
        if flags[i]:
            flags[i * i :: i] = bytearray(len(range(i * i, limit, i)))
    return [i for i in range(limit) if flags[i]]

# Trial-division primes: enough to decide everything below 2**16 exactly and
# to screen large candidates cheaply before Miller-Rabin.
_SMALL_PRIMES = _sieve(2048)

_EXACT_LIMIT = 1 << 16

# These twelve bases are a proven deterministic witness set for all n < 2**64.
_DET_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def _miller_rabin(n: int, bases) -> bool:
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    nz = gmpy2.mpz(n)
    n1 = n - 1
    for a in bases:
        a %= n
        if a < 2:
            continue
        x = gmpy2.powmod(a, d, nz)
        if x == 1 or x == n1:
            continue
        for _ in range(s - 1):
            x = gmpy2.powmod(x, 2, nz)
            if x == n1:
                break
        else:
            return False
    return True


def is_probable_prime(n: int, rounds: int = 40) -> bool:
    """Miller-Rabin primality test.

    False is always certain. True is certain below 2**16 (trial division)
    and below 2**64 (deterministic witness set); above that the error
    probability is at most 4**-rounds. Witnesses above 2**64 are drawn from
    a stream seeded by n itself, so results are reproducible.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    if n < 2:
        return False
    if n < _EXACT_LIMIT:
        for p in _SMALL_PRIMES:
            if p * p > n:
                return True
            if n % p == 0:
                return n == p
        return True
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return False
    if n < 1 << 64:
        return _miller_rabin(n, _DET_BASES)
    witness_rng = random.Random(n)
    bases = [witness_rng.randrange(2, n - 1) for _ in range(rounds)]
    return _miller_rabin(n, bases)


def random_prime(bits: int, rng: RandomSource, rounds: int = 40) -> int:
    """Random prime with exactly `bits` bits (top bit set).

    Deterministic for a fixed rng state. Raises RuntimeError if no prime
    turns up within the retry cap.
    """
    if bits < 8:
        raise ValueError("bits must be >= 8")
    top = 1 << (bits - 1)
    for _ in range(MAX_PRIME_ATTEMPTS):
        candidate = rng.getrandbits(bits) | top | 1
        if is_probable_prime(candidate, rounds):
            return candidate
    raise RuntimeError(f"no {bits}-bit prime found in {MAX_PRIME_ATTEMPTS} attempts")


def next_prime(n: int, rounds: int = 40) -> int:
    """Smallest prime strictly greater than n."""
    if n < 2:
        return 2
    candidate = n + 1
    if candidate % 2 == 0:
        candidate += 1
    if n == 2:
        candidate = 3
    while not is_probable_prime(candidate, rounds):
        candidate += 2
    return candidate
