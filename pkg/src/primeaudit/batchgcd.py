"""Shared-factor detection across a whole corpus of moduli.

The quasilinear route multiplies every modulus together with a balanced
product tree, then walks back down reducing the running product modulo the
square of each node (a remainder tree). That yields z_i = P mod n_i**2 for
every input in one pass, and gcd(n_i, z_i / n_i) exposes exactly the part
of n_i that some other modulus shares. A direct pairwise sweep over all
O(k**2) pairs is kept as naive_pairwise_gcd; it is the correctness oracle
and the performance baseline the tree route is measured against.

Heavy arithmetic runs on gmpy2 integers; the public surface speaks plain
ints.
"""

from dataclasses import dataclass
from enum import Enum
from math import gcd as _int_gcd

import gmpy2

__all__ = [
    "ModulusStatus",
    "ModulusResult",
    "BatchResult",
    "ProductTree",
    "build_product_tree",
    "remainder_tree",
    "batch_gcd",
    "naive_pairwise_gcd",
]


class ModulusStatus(Enum):
    CLEAN = "clean"
    SHARED_FACTOR = "shared_factor"
    FULLY_SHARED = "fully_shared"
    DUPLICATE = "duplicate"


@dataclass(frozen=True)
class ModulusResult:
    index: int
    divisor: int
    status: ModulusStatus


@dataclass(frozen=True)
class BatchResult:
    per_modulus: tuple[ModulusResult, ...]

    def flagged(self) -> tuple[ModulusResult, ...]:
        return tuple(r for r in self.per_modulus if r.divisor > 1)


@dataclass(frozen=True)
class ProductTree:
    """Levels of pairwise products; level 0 is the input, the top is one
    value equal to the product of everything. An odd element at the end of
    a level is carried up unchanged."""

    levels: tuple[tuple[int, ...], ...]

    @property
    def root(self) -> int:
        if not self.levels:
            raise ValueError("empty tree has no root")
        return self.levels[-1][0]


def _check_moduli(moduli) -> list[int]:
    values = [int(m) for m in moduli]
    for m in values:
        if m < 2:
            raise ValueError("moduli must be >= 2")
    return values


def build_product_tree(moduli) -> ProductTree:
    """Balanced product tree over the moduli; empty input gives an empty tree."""
    values = _check_moduli(moduli)
    if not values:
        return ProductTree(())
    level = [gmpy2.mpz(v) for v in values]
    levels = [tuple(values)]
    while len(level) > 1:
        nxt = [level[i] * level[i + 1] for i in range(0, len(level) - 1, 2)]
        if len(level) % 2:
            nxt.append(level[-1])
        levels.append(tuple(int(v) for v in nxt))
        level = nxt
    return ProductTree(tuple(levels))


def remainder_tree(tree: ProductTree) -> list[int]:
    """z_i = root mod n_i**2 for every level-0 modulus n_i, by descent.

    Each child's residue comes from its parent's residue reduced modulo
    the child's square, which is valid because the child's square divides
    the parent's square at every step.
    """
    if not tree.levels:
        raise ValueError("remainder tree needs a nonempty product tree")
    rems = [gmpy2.mpz(tree.root)]
    for level in reversed(tree.levels[:-1]):
        nxt = []
        for i, v in enumerate(level):
            vz = gmpy2.mpz(v)
            nxt.append(rems[i // 2] % (vz * vz))
        rems = nxt
    return [int(r) for r in rems]


def _classify(
    values: list[int],
    value_divisor: dict[int, int],
    duplicates: set[int],
    flagged_order: list[int],
) -> BatchResult:
    """Shared per-index classification for both the tree and naive routes.

    value_divisor maps each distinct modulus value to the portion of it
    shared with the rest of the corpus. A divisor equal to the modulus is
    ambiguous (everything shared), so those fall back to pairwise gcd
    against the other flagged values, in corpus order, to pull out a proper
    factor; only when that fails is the entry reported fully shared.
    """
    resolved: dict[int, tuple[int, ModulusStatus]] = {}
    for v, g in value_divisor.items():
        if g == 1:
            resolved[v] = (1, ModulusStatus.CLEAN)
        elif g < v:
            resolved[v] = (g, ModulusStatus.SHARED_FACTOR)
        else:
            proper = None
            for other in flagged_order:
                if other == v:
                    continue
                cand = _int_gcd(v, other)
                if 1 < cand < v:
                    proper = cand
                    break
            if proper is not None:
                resolved[v] = (proper, ModulusStatus.SHARED_FACTOR)
            else:
                resolved[v] = (v, ModulusStatus.FULLY_SHARED)
    results = []
    for i, v in enumerate(values):
        if v in duplicates:
            results.append(ModulusResult(i, v, ModulusStatus.DUPLICATE))
        else:
            divisor, status = resolved[v]
            results.append(ModulusResult(i, divisor, status))
    return BatchResult(tuple(results))


def batch_gcd(moduli) -> BatchResult:
    """Find, for every modulus, the factor it shares with the rest.

    Duplicate values are collapsed before the tree is built (they would
    otherwise flag themselves) and reported with status DUPLICATE and the
    full modulus as divisor. Everything else gets gcd(n_i, z_i / n_i) from
    one product-tree / remainder-tree pass over the distinct values.
    """
    values = _check_moduli(moduli)
    if not values:
        return BatchResult(())
    counts: dict[int, int] = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    unique = list(counts)
    duplicates = {v for v, c in counts.items() if c > 1}

    value_divisor: dict[int, int] = {}
    if len(unique) == 1:
        value_divisor[unique[0]] = 1
    else:
        tree = build_product_tree(unique)
        rems = remainder_tree(tree)
        for v, z in zip(unique, rems):
            value_divisor[v] = int(gmpy2.gcd(v, z // v))
    flagged_order = [v for v in unique if value_divisor[v] > 1]
    return _classify(values, value_divisor, duplicates, flagged_order)


def naive_pairwise_gcd(moduli) -> BatchResult:
    """O(k**2) pairwise sweep with the same flags and statuses as batch_gcd.

    Per distinct value the shared portion is accumulated as the lcm of its
    pairwise gcds, which matches the tree result for squarefree moduli
    (RSA moduli are). Kept deliberately straightforward: this is the oracle
    batch_gcd is checked against, and the baseline it is timed against.
    """
    values = _check_moduli(moduli)
    if not values:
        return BatchResult(())
    counts: dict[int, int] = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    unique = list(counts)
    duplicates = {v for v, c in counts.items() if c > 1}

    value_divisor = {v: 1 for v in unique}
    k = len(unique)
    for i in range(k):
        vi = unique[i]
        for j in range(i + 1, k):
            g = _int_gcd(vi, unique[j])
            if g > 1:
                for v in (vi, unique[j]):
                    d = value_divisor[v]
                    value_divisor[v] = d * g // _int_gcd(d, g)
    flagged_order = [v for v in unique if value_divisor[v] > 1]
    return _classify(values, value_divisor, duplicates, flagged_order)
