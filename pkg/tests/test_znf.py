import pytest
from hypothesis import given, settings, strategies as st

from uod.znf import (
    AbGroupInvariants,
    IntMatrix,
    NoIntegerSolution,
    ShapeMismatch,
    block_diagonal,
    cokernel,
    homology_pair,
    image_basis,
    kernel_basis,
    lattice_contains,
    preimage_lattice,
    snf,
    snf_invariants,
    solve,
    subquotient,
)


def det2(m):
    return m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]


def det_laplace(m):
    # brute-force determinant, used as an independent oracle only
    n = m.rows
    if n == 0:
        return 1
    if n == 1:
        return m[0, 0]
    total = 0
    for j in range(n):
        if m[0, j]:
            minor = m.submatrix(range(1, n), [c for c in range(n) if c != j])
            total += (-1) ** j * m[0, j] * det_laplace(minor)
    return total


small_matrices = st.integers(0, 4).flatmap(
    lambda r: st.integers(0, 4).flatmap(
        lambda c: st.lists(
            st.lists(st.integers(-9, 9), min_size=c, max_size=c),
            min_size=r,
            max_size=r,
        ).map(lambda rows: IntMatrix(rows, cols=c))
    )
)


class TestSnf:
    def test_identity(self):
        assert snf(IntMatrix.identity(2)).invariants == (1, 1)

    def test_two_by_two(self):
        # d1 = gcd of entries = 2, d1*d2 = |det| = |16 - 24| = 8, so (2, 4)
        m = IntMatrix([[2, 4], [6, 8]])
        res = snf(m)
        assert res.invariants == (2, 4)
        assert res.left * m * res.right == res.diagonal()

    def test_zero_1x1(self):
        assert snf(IntMatrix([[0]])).invariants == (0,)

    def test_empty(self):
        res = snf(IntMatrix.zeros(0, 3))
        assert res.invariants == ()
        assert res.right.rows == 3

    @settings(max_examples=150, deadline=None)
    @given(small_matrices)
    def test_transforms_and_chain(self, m):
        res = snf(m)
        assert res.left * m * res.right == res.diagonal()
        assert res.left * res.left_inv == IntMatrix.identity(m.rows)
        assert res.right * res.right_inv == IntMatrix.identity(m.cols)
        assert det_laplace(res.left) in (1, -1)
        assert det_laplace(res.right) in (1, -1)
        inv = res.invariants
        assert all(d >= 0 for d in inv)
        for a, b in zip(inv, inv[1:]):
            assert (b == 0) if a == 0 else (b % a == 0)

    @settings(max_examples=60, deadline=None)
    @given(small_matrices, st.randoms(use_true_random=False))
    def test_cokernel_permutation_invariant(self, m, rng):
        rows = list(range(m.rows))
        cols = list(range(m.cols))
        rng.shuffle(rows)
        rng.shuffle(cols)
        shuffled = m.submatrix(rows, cols)
        assert cokernel(m).invariants == cokernel(shuffled).invariants


class TestCokernel:
    def test_two_times_identity(self):
        res = cokernel(IntMatrix.diagonal([2, 2]))
        assert res.invariants == AbGroupInvariants(0, (2, 2))

    def test_single_column(self):
        res = cokernel(IntMatrix([[1], [1]]))
        assert res.invariants == AbGroupInvariants(1)
        assert res.projection * res.section == IntMatrix.identity(1)

    def test_u4_relation_matrix(self):
        # A(4) has basis [0], [1/4], [1/2], [3/4]; the two level-4 relations
        # are [0] - [0] - [1/2] and [1/2] - [1/4] - [3/4].
        rel = IntMatrix.from_columns([(0, 0, -1, 0), (0, -1, 1, -1)])
        res = cokernel(rel)
        assert res.invariants == AbGroupInvariants(2)

    def test_induce_on_free_quotient(self):
        # Z^2 / span((0,2)): free part generated by e1; any op preserving the
        # relation lattice induces a 1x1 matrix.
        rel = IntMatrix.from_columns([(0, 2)])
        res = cokernel(rel)
        op = IntMatrix([[3, 0], [1, 5]])
        assert res.induce(op) == IntMatrix([[3]])

    def test_induce_undefined(self):
        rel = IntMatrix.from_columns([(0, 2)])
        op = IntMatrix([[1, 1], [0, 1]])  # sends (0,2) to (2,2), not in lattice
        with pytest.raises(NoIntegerSolution):
            cokernel(rel).induce(op)


class TestKernel:
    def test_identity_has_no_kernel(self):
        assert kernel_basis(IntMatrix.identity(3)).cols == 0

    def test_row_sum(self):
        k = kernel_basis(IntMatrix([[1, 1]]))
        assert k.cols == 1
        assert set(k.column(0)) == {1, -1}

    def test_rank_one(self):
        # rows are (2,4) and (1,2); kernel generated by (2,-1)
        k = kernel_basis(IntMatrix([[2, 4], [1, 2]]))
        assert k.cols == 1
        col = k.column(0)
        assert col in ((2, -1), (-2, 1))

    @settings(max_examples=150, deadline=None)
    @given(small_matrices)
    def test_kernel_properties(self, m):
        k = kernel_basis(m)
        assert (m * k).is_zero()
        # saturated: SNF of the basis matrix has all invariants 1
        assert all(d == 1 for d in snf_invariants(k))
        # full kernel: rank-nullity against the rank of m
        rank = sum(1 for d in snf_invariants(m) if d)
        assert k.cols == m.cols - rank


class TestSolveAndLattices:
    def test_solve_exact(self):
        a = IntMatrix([[2, 0], [0, 3]])
        b = IntMatrix.from_columns([(4, 9)])
        assert a * solve(a, b) == b

    def test_solve_unsolvable(self):
        a = IntMatrix([[2]])
        with pytest.raises(NoIntegerSolution):
            solve(a, IntMatrix([[3]]))

    @settings(max_examples=100, deadline=None)
    @given(small_matrices, st.lists(st.integers(-4, 4), min_size=1, max_size=3))
    def test_solve_recovers_membership(self, m, coeffs):
        # any integer combination of columns must be solvable back
        if m.cols == 0:
            return
        coeffs = (coeffs * m.cols)[: m.cols]
        vec = tuple(
            sum(m[i, j] * coeffs[j] for j in range(m.cols)) for i in range(m.rows)
        )
        b = IntMatrix.from_columns([vec], rows=m.rows)
        assert m * solve(m, b) == b

    @settings(max_examples=100, deadline=None)
    @given(small_matrices)
    def test_image_basis_spans(self, m):
        basis = image_basis(m)
        # a basis has full column rank and spans exactly the column lattice
        assert all(d != 0 for d in snf_invariants(basis))
        assert lattice_contains(basis, m)
        assert lattice_contains(m, basis)

    def test_preimage_lattice(self):
        # {x in Z^2 : 2x1 + 0x2 in 4Z} = 2Z x Z
        a = IntMatrix([[2, 0]])
        den = IntMatrix([[4]])
        pre = preimage_lattice(a, den)
        assert lattice_contains(pre, IntMatrix.from_columns([(2, 0), (0, 1)]))
        assert not lattice_contains(pre, IntMatrix.from_columns([(1, 0)]))


class TestSubquotient:
    def test_z_mod_2(self):
        num = IntMatrix.identity(1)
        den = IntMatrix([[2]])
        assert subquotient(num, den).invariants == AbGroupInvariants(0, (2,))

    def test_homology_pair(self):
        # 0 -> Z --2--> Z -> 0 concentrated so that H_0 = Z/2
        d_out = IntMatrix.zeros(0, 1)
        d_in = IntMatrix([[2]])
        assert homology_pair(d_out, d_in).invariants == AbGroupInvariants(0, (2,))


def test_block_diagonal():
    b = block_diagonal([IntMatrix([[2]]), IntMatrix([[0, 1]])])
    assert b.rows == 2 and b.cols == 3
    assert b[0, 0] == 2 and b[1, 2] == 1 and b[1, 0] == 0


def test_matrix_shape_errors():
    with pytest.raises(ShapeMismatch):
        IntMatrix([[1], [2, 3]])
    with pytest.raises(ShapeMismatch):
        IntMatrix.identity(2) * IntMatrix.identity(3)
