"""Fermat factorization of a single odd modulus.

Writes an odd n as a*a - b*b and returns the factors (a - b, a + b). The
search starts at the ceiling square root of n and walks a upward, so the
cost is driven entirely by how close the two prime factors are: a modulus
whose primes nearly coincide falls in a handful of steps no matter how many
bits it has, while well-separated primes push the answer far beyond any
realistic iteration budget.

Iteration counting: the test at the starting value of a is iteration 0, and
iterations_used counts increments of a past it. A budget of B therefore
allows B + 1 candidate tests.
"""

from dataclasses import dataclass
from enum import Enum

from .arith import ceil_isqrt, isqrt

__all__ = [
    "FermatOutcome",
    "FermatResult",
    "fermat_factor",
    "exact_iterations",
    "DEFAULT_BUDGET",
]

# Default iteration budget for audit-style self-tests. Any key passing this
# many steps without factoring is far outside the reach of the attack.
DEFAULT_BUDGET = 100_000


class FermatOutcome(Enum):
    FACTORED = "factored"
    BUDGET_EXHAUSTED = "budget_exhausted"


@dataclass(frozen=True)
class FermatResult:
    outcome: FermatOutcome
    p: int | None
    q: int | None
    iterations_used: int
    initial_a: int

    @property
    def factored(self) -> bool:
        return self.outcome is FermatOutcome.FACTORED


def _square_flags(modulus: int) -> bytes:
    flags = bytearray(modulus)
    for i in range(modulus):
        flags[i * i % modulus] = 1
    return bytes(flags)


# Fast rejection of a*a - n as a square candidate: a non-residue modulo
# either modulus below can never be a perfect square. 64 and 63*65*11 kill
# about 99.2% of candidates with small-int arithmetic only; survivors get
# the exact integer square root check. The filter cannot change results.
_FILTER_MOD = 63 * 65 * 11
_SQ_64 = _square_flags(64)
_SQ_F = _square_flags(_FILTER_MOD)


def fermat_factor(n: int, max_iterations: int | None = DEFAULT_BUDGET) -> FermatResult:
    """Attempt to factor odd n >= 9 within an iteration budget.

    On success p * q == n with 1 < p <= q; a perfect-square n yields p == q.
    The trivial split (p == 1), which every odd number eventually reaches,
    is never reported. max_iterations=None removes the budget; only use
    that on inputs known to be composite, since a prime n has no nontrivial
    representation to find (an unbounded search stops, budget exhausted, if
    it walks all the way to the trivial split).
    """
    if n % 2 == 0:
        raise ValueError("n must be odd")
    if n < 9:
        raise ValueError("n must be >= 9")
    a0 = ceil_isqrt(n)
    # r tracks (a0 + k)^2 - n modulo the filter constants only; the full
    # value is recomputed on the rare filter pass. Stepping a by one adds
    # 2a + 1 to r.
    r0 = a0 * a0 - n
    r64 = r0 & 63
    rf = r0 % _FILTER_MOD
    a64 = a0 & 63
    af = a0 % _FILTER_MOD
    k = 0
    while True:
        if _SQ_64[r64] and _SQ_F[rf]:
            a = a0 + k
            r = a * a - n
            b = isqrt(r)
            if b * b == r:
                p = a - b
                if p > 1:
                    return FermatResult(FermatOutcome.FACTORED, p, a + b, k, a0)
                if max_iterations is None:
                    # Trivial split reached: n is prime, nothing left to find.
                    return FermatResult(
                        FermatOutcome.BUDGET_EXHAUSTED, None, None, k, a0
                    )
        if max_iterations is not None and k >= max_iterations:
            return FermatResult(
                FermatOutcome.BUDGET_EXHAUSTED, None, None, max_iterations, a0
            )
        r64 = (r64 + 2 * a64 + 1) & 63
        rf = (rf + 2 * af + 1) % _FILTER_MOD
        a64 = (a64 + 1) & 63
        af = (af + 1) % _FILTER_MOD
        k += 1


def exact_iterations(p: int, q: int) -> int:
    """Exact number of iterations fermat_factor needs for n = p * q.

    Equals (p + q) // 2 - ceil_isqrt(p * q) for odd primes p <= q. This is
    the true cost; the folklore (q - p) / 4 estimate overshoots it badly
    once the gap is small relative to the modulus.
    """
    if p % 2 == 0 or q % 2 == 0:
        raise ValueError("p and q must be odd")
    if not 3 <= p <= q:
        raise ValueError("need 3 <= p <= q")
    return (p + q) // 2 - ceil_isqrt(p * q)
