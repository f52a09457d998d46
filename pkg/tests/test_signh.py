import pytest

from uod.arith import ArchimedeanBackend, FunctionFieldBackend
from uod.distmod import build_af, distribution_relations
from uod.signh import (
    OrderViolation,
    TateInput,
    functoriality_report,
    sign_homology_U,
    tate_homology,
    tate_pair,
    verify_rank_theorem,
)
from uod.znf import AbGroupInvariants, IntMatrix, block_diagonal, cokernel

Q = ArchimedeanBackend()
F3 = FunctionFieldBackend(3)
F2 = FunctionFieldBackend(2)
F5 = FunctionFieldBackend(5)
T = (0, 1)

Z2 = AbGroupInvariants(0, (2,))
TRIV = AbGroupInvariants(0)


class TestTate:
    def test_trivial_z(self):
        even, odd = tate_homology(TateInput(1, IntMatrix.identity(1), 2))
        assert even == Z2 and odd == TRIV

    def test_swap_module_vanishes(self):
        swap = IntMatrix([[0, 1], [1, 0]])
        even, odd = tate_homology(TateInput(2, swap, 2))
        assert even == TRIV and odd == TRIV

    def test_order_violation(self):
        with pytest.raises(OrderViolation):
            tate_homology(TateInput(1, IntMatrix([[2]]), 2))

    def test_full_cycle_permutation_vanishes(self):
        # regular representation of Z/m: induced module, so both parities die
        for m in (2, 3, 4):
            perm = IntMatrix.from_columns(
                [[1 if i == (j + 1) % m else 0 for i in range(m)] for j in range(m)]
            )
            even, odd = tate_pair(perm, m)
            assert even == TRIV and odd == TRIV

    def test_additivity_under_direct_sum(self):
        swap = IntMatrix([[0, 1], [1, 0]])
        neg = IntMatrix([[-1]])
        combo = block_diagonal([IntMatrix.identity(1), swap, neg])
        even, odd = tate_pair(combo, 2)
        e1, o1 = tate_pair(IntMatrix.identity(1), 2)
        e2, o2 = tate_pair(swap, 2)
        e3, o3 = tate_pair(neg, 2)
        assert even.free_rank == e1.free_rank + e2.free_rank + e3.free_rank
        assert sorted(even.torsion) == sorted(e1.torsion + e2.torsion + e3.torsion)
        assert sorted(odd.torsion) == sorted(o1.torsion + o2.torsion + o3.torsion)

    def test_order_one_group(self):
        even, odd = tate_pair(IntMatrix.identity(3), 1)
        assert even == TRIV and odd == TRIV


class TestSignHomologyU:
    def test_u3(self):
        table = sign_homology_U(Q, 3)
        assert table[0] == Z2 and table[1] == Z2

    def test_u4(self):
        table = sign_homology_U(Q, 4)
        assert table[0] == Z2 and table[1] == Z2

    def test_u15(self):
        table = sign_homology_U(Q, 15)
        expected = AbGroupInvariants(0, (2, 2))
        assert table[0] == expected and table[1] == expected

    def test_ff_two_primes(self):
        f = F3.mul(T, (1, 1))
        table = sign_homology_U(F3, f)
        expected = AbGroupInvariants(0, (2, 2))
        assert table[0] == expected and table[1] == expected

    def test_euler_symmetry(self):
        # |even| = |odd| on every computed table
        for f in (3, 4, 5, 8, 9, 12):
            table = sign_homology_U(Q, f)
            assert table[0].order() == table[1].order()

    def test_independent_of_section_choice(self):
        # recompute the quotient with a shuffled basis enumeration and an
        # arbitrary SNF section; the invariants cannot change
        import random

        af = build_af(Q, 12)
        rel = distribution_relations(af)
        rng = random.Random(7)
        perm = list(range(af.rank))
        rng.shuffle(perm)
        pmat = IntMatrix.from_columns(
            [[1 if i == p else 0 for i in range(af.rank)] for p in perm]
        )
        rel_shuffled = pmat * rel
        gamma_shuffled = pmat * af.operators.operator("gamma0") * pmat.transpose()
        cok = cokernel(rel_shuffled)
        induced = cok.induce(gamma_shuffled)
        even, odd = tate_pair(induced, 2)
        table = sign_homology_U(Q, 12)
        assert (even, odd) == (table[0], table[1])


class TestRankTheorem:
    def test_kubert_instances(self):
        for f, copies in ((3, 1), (4, 1), (15, 2), (105, 4)):
            report = verify_rank_theorem(Q, f)
            assert report.applicable and report.passed
            assert report.expected == AbGroupInvariants(0, (2,) * copies)

    def test_not_applicable(self):
        assert not verify_rank_theorem(Q, 1).applicable
        assert not verify_rank_theorem(Q, 6).applicable
        assert verify_rank_theorem(Q, 6).verdict == "NOT_APPLICABLE"

    def test_yin_instances_q3(self):
        report = verify_rank_theorem(F3, T)
        assert report.passed and report.expected == Z2

    def test_yin_q2_trivial(self):
        report = verify_rank_theorem(F2, T)
        assert report.passed and report.expected == TRIV

    def test_yin_q5(self):
        report = verify_rank_theorem(F5, T)
        assert report.passed
        assert report.expected == AbGroupInvariants(0, (4,))


class TestFunctoriality:
    def test_3_into_15(self):
        report = functoriality_report(Q, 3, 15)
        assert report.injective
        assert report.source_even == Z2
        assert report.target_even == AbGroupInvariants(0, (2, 2))
        assert report.g_acts_trivially

    def test_identity_map(self):
        report = functoriality_report(Q, 5, 5)
        assert report.injective

    def test_requires_divisibility(self):
        with pytest.raises(ValueError):
            functoriality_report(Q, 4, 5)
