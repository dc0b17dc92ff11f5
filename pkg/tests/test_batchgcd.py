"""Product tree, remainder tree, and the two shared-factor routes.

The quasilinear tree route and the O(k^2) pairwise sweep must agree
exactly on RSA-shaped (squarefree) moduli; the sweep doubles as the
planted-ground-truth oracle.
"""

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from primeaudit.arith import RandomSource, random_prime
from primeaudit.batchgcd import (
    ModulusStatus,
    ProductTree,
    batch_gcd,
    build_product_tree,
    naive_pairwise_gcd,
    remainder_tree,
)


class TestProductTree:
    def test_worked_example(self):
        tree = build_product_tree([143, 187, 35])
        assert tree.levels == ((143, 187, 35), (26741, 35), (935935,))
        assert tree.root == 935935

    def test_root_is_full_product(self):
        values = [3, 5, 7, 11, 13, 17, 19]
        tree = build_product_tree(values)
        assert tree.root == math.prod(values)

    def test_power_of_two_leaf_count(self):
        tree = build_product_tree([3, 5, 7, 11])
        assert tree.levels == ((3, 5, 7, 11), (15, 77), (1155,))

    def test_single_value(self):
        tree = build_product_tree([21])
        assert tree.levels == ((21,),)
        assert tree.root == 21

    def test_empty_input(self):
        tree = build_product_tree([])
        assert tree.levels == ()
        with pytest.raises(ValueError):
            tree.root

    def test_level_sizes_halve(self):
        tree = build_product_tree(list(range(2, 2 + 37)))
        sizes = [len(level) for level in tree.levels]
        for a, b in zip(sizes, sizes[1:]):
            assert b == (a + 1) // 2
        assert sizes[-1] == 1

    def test_rejects_tiny_moduli(self):
        with pytest.raises(ValueError):
            build_product_tree([15, 1])
        with pytest.raises(ValueError):
            build_product_tree([0])


class TestRemainderTree:
    def test_worked_example(self):
        tree = build_product_tree([143, 187, 35])
        assert remainder_tree(tree) == [15730, 26741, 35]

    def test_definition_holds(self):
        values = [1009 * 1013, 1013 * 1019, 1021 * 1031, 1033]
        tree = build_product_tree(values)
        root = tree.root
        assert remainder_tree(tree) == [root % (v * v) for v in values]

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            remainder_tree(ProductTree(()))


class TestBatchGcd:
    def test_worked_example(self):
        result = batch_gcd([143, 187, 35])
        statuses = [(r.divisor, r.status) for r in result.per_modulus]
        assert statuses == [
            (11, ModulusStatus.SHARED_FACTOR),
            (11, ModulusStatus.SHARED_FACTOR),
            (1, ModulusStatus.CLEAN),
        ]
        assert [r.index for r in result.per_modulus] == [0, 1, 2]

    def test_fully_shared_falls_back_to_pairwise(self):
        # Every prime of every modulus is shared, so the tree alone says
        # "everything"; the pairwise fallback still recovers proper factors.
        result = batch_gcd([143, 187, 221])
        assert [(r.divisor, r.status) for r in result.per_modulus] == [
            (11, ModulusStatus.SHARED_FACTOR),
            (11, ModulusStatus.SHARED_FACTOR),
            (13, ModulusStatus.SHARED_FACTOR),
        ]

    def test_true_fully_shared(self):
        # 15 divides 225: no proper split of 15 exists in this corpus.
        result = batch_gcd([15, 225])
        assert result.per_modulus[0].status is ModulusStatus.FULLY_SHARED
        assert result.per_modulus[0].divisor == 15
        assert result.per_modulus[1].status is ModulusStatus.SHARED_FACTOR
        assert result.per_modulus[1].divisor == 15

    def test_duplicates(self):
        result = batch_gcd([15, 15])
        for entry in result.per_modulus:
            assert entry.status is ModulusStatus.DUPLICATE
            assert entry.divisor == 15

    def test_duplicate_does_not_poison_others(self):
        # The duplicated value participates once in the tree, so a third
        # modulus sharing a prime with it is still caught.
        result = batch_gcd([15, 15, 21, 11 * 13])
        assert result.per_modulus[2].status is ModulusStatus.SHARED_FACTOR
        assert result.per_modulus[2].divisor == 3
        assert result.per_modulus[3].status is ModulusStatus.CLEAN

    def test_all_clean(self):
        result = batch_gcd([15, 77, 221])
        assert all(r.status is ModulusStatus.CLEAN for r in result.per_modulus)
        assert result.flagged() == ()

    def test_single_modulus_is_clean(self):
        result = batch_gcd([391])
        assert result.per_modulus[0].status is ModulusStatus.CLEAN

    def test_empty(self):
        assert batch_gcd([]).per_modulus == ()

    def test_flagged_helper(self):
        result = batch_gcd([143, 187, 35])
        assert [r.index for r in result.flagged()] == [0, 1]


def _planted_corpus(seed, total, planted_pairs, prime_bits=64):
    """RSA-shaped moduli with known shared-prime pairs; returns the moduli
    and the set of indices that must be flagged."""
    rng = random.Random(seed)
    draw = lambda: random_prime(prime_bits, RandomSource(rng.getrandbits(48)))
    moduli = []
    expected = set()
    for _ in range(planted_pairs):
        shared, a, b = draw(), draw(), draw()
        expected.add(len(moduli))
        moduli.append(shared * a)
        expected.add(len(moduli))
        moduli.append(shared * b)
    while len(moduli) < total:
        moduli.append(draw() * draw())
    rng.shuffle(moduli)
    flagged = {i for i, m in enumerate(moduli)
               if any(j != i and math.gcd(m, moduli[j]) > 1 for j in range(len(moduli)))}
    assert len(flagged) == 2 * planted_pairs, "accidental collision in corpus build"
    return moduli, flagged


class TestRoutesAgree:
    def test_planted_500(self):
        moduli, expected = _planted_corpus(seed=202, total=500, planted_pairs=20)
        fast = batch_gcd(moduli)
        slow = naive_pairwise_gcd(moduli)
        assert fast == slow
        assert {r.index for r in fast.flagged()} == expected
        for entry in fast.flagged():
            n = moduli[entry.index]
            assert entry.status is ModulusStatus.SHARED_FACTOR
            assert 1 < entry.divisor < n
            assert n % entry.divisor == 0

    @given(st.lists(st.sampled_from([3, 5, 7, 11, 13, 17, 19, 23]), min_size=0, max_size=10),
           st.data())
    @settings(max_examples=150)
    def test_squarefree_corpora(self, pool, data):
        # Moduli are products of two distinct primes from a small pool, so
        # sharing and duplication happen constantly.
        if len(set(pool)) < 2:
            return
        primes = sorted(set(pool))
        count = data.draw(st.integers(min_value=0, max_value=8))
        moduli = []
        for _ in range(count):
            pair = data.draw(st.permutations(primes))[:2]
            moduli.append(pair[0] * pair[1])
        assert batch_gcd(moduli) == naive_pairwise_gcd(moduli)

    def test_every_divisor_divides(self):
        moduli, _ = _planted_corpus(seed=7, total=60, planted_pairs=5, prime_bits=32)
        for entry in batch_gcd(moduli).per_modulus:
            assert moduli[entry.index] % entry.divisor == 0


class TestSoundnessCompleteness:
    def test_no_false_positives_on_clean_corpus(self):
        moduli, flagged = _planted_corpus(seed=99, total=80, planted_pairs=0)
        assert not flagged
        assert batch_gcd(moduli).flagged() == ()

    def test_three_way_share(self):
        shared = 2**61 - 1
        others = [random_prime(61, RandomSource(s)) for s in (1, 2, 3)]
        moduli = [shared * o for o in others]
        result = batch_gcd(moduli)
        for entry in result.per_modulus:
            assert entry.status is ModulusStatus.SHARED_FACTOR
            assert entry.divisor == shared
