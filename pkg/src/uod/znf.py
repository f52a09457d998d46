"""Exact linear algebra over Z: Smith normal form, kernels, cokernel presentations.

Everything here works with arbitrary-precision Python integers; there is no
floating point and no modular shortcut anywhere.  Matrices are immutable
values, so all operations return new objects and are safe to share between
threads.

The workhorse is ``snf``, which returns the diagonal invariant factors
together with the unimodular transforms (and their inverses) realizing them.
On top of it sit the lattice utilities used by every homology computation in
the package: integer kernels (automatically saturated), column‑lattice bases,
exact linear solves, cokernel presentations with a splitting of the free
part, and subquotient invariants lattice(num)/lattice(den).
"""

from __future__ import annotations

from dataclasses import dataclass


class ShapeMismatch(ValueError):
    """Operands have incompatible dimensions."""


class NoIntegerSolution(ValueError):
    """A x = b has no solution over Z."""


class IntMatrix:
    """Immutable dense integer matrix.

    Rows are stored as tuples of Python ints, so entries never overflow.
    ``rows == 0`` or ``cols == 0`` are legal and show up routinely as empty
    differentials or empty relation sets.
    """

    __slots__ = ("rows", "cols", "data", "_hash")

    def __init__(self, data, cols=None):
        data = tuple(tuple(int(x) for x in row) for row in data)
        if data:
            width = len(data[0])
            if any(len(row) != width for row in data):
                raise ShapeMismatch("ragged rows")
            if cols is not None and cols != width:
                raise ShapeMismatch("cols does not match row width")
            cols = width
        else:
            cols = 0 if cols is None else int(cols)
        object.__setattr__(self, "rows", len(data))
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "data", data)

    def __setattr__(self, *args):
        raise AttributeError("IntMatrix is immutable")

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n)), cols=n)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(tuple((0,) * cols for _ in range(rows)), cols=cols)

    @classmethod
    def diagonal(cls, entries, rows=None, cols=None) -> "IntMatrix":
        entries = [int(e) for e in entries]
        rows = len(entries) if rows is None else rows
        cols = len(entries) if cols is None else cols
        return cls(
            tuple(
                tuple(entries[i] if i == j and i < len(entries) else 0 for j in range(cols))
                for i in range(rows)
            ),
            cols=cols,
        )

    @classmethod
    def from_columns(cls, columns, rows=None) -> "IntMatrix":
        columns = [tuple(c) for c in columns]
        if columns:
            rows = len(columns[0])
        elif rows is None:
            rows = 0
        return cls(tuple(tuple(c[i] for c in columns) for i in range(rows)), cols=len(columns))

    def __getitem__(self, ij):
        i, j = ij
        return self.data[i][j]

    def row(self, i):
        return self.data[i]

    def column(self, j):
        return tuple(row[j] for row in self.data)

    def columns(self):
        return [self.column(j) for j in range(self.cols)]

    def __eq__(self, other):
        return (
            isinstance(other, IntMatrix)
            and self.cols == other.cols
            and self.data == other.data
        )

    def __hash__(self):
        try:
            return self._hash
        except AttributeError:
            h = hash((self.cols, self.data))
            object.__setattr__(self, "_hash", h)
            return h

    def __repr__(self):
        return f"IntMatrix({self.rows}x{self.cols})"

    def is_zero(self) -> bool:
        return all(all(x == 0 for x in row) for row in self.data)

    def __neg__(self):
        return IntMatrix(tuple(tuple(-x for x in row) for row in self.data), cols=self.cols)

    def __add__(self, other):
        if self.rows != other.rows or self.cols != other.cols:
            raise ShapeMismatch(f"add {self.rows}x{self.cols} vs {other.rows}x{other.cols}")
        return IntMatrix(
            tuple(tuple(a + b for a, b in zip(r1, r2)) for r1, r2 in zip(self.data, other.data)),
            cols=self.cols,
        )

    def __sub__(self, other):
        return self + (-other)

    def scale(self, k: int) -> "IntMatrix":
        return IntMatrix(tuple(tuple(k * x for x in row) for row in self.data), cols=self.cols)

    def __mul__(self, other):
        # Sparse-friendly row accumulation: zero entries are skipped, which
        # matters because most operators here are permutations or fiber sums.
        if self.cols != other.rows:
            raise ShapeMismatch(f"mul {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        odata = other.data
        out = []
        for row in self.data:
            acc = [0] * other.cols
            for k, a in enumerate(row):
                if a:
                    brow = odata[k]
                    if a == 1:
                        for j, b in enumerate(brow):
                            if b:
                                acc[j] += b
                    elif a == -1:
                        for j, b in enumerate(brow):
                            if b:
                                acc[j] -= b
                    else:
                        for j, b in enumerate(brow):
                            if b:
                                acc[j] += a * b
            out.append(tuple(acc))
        return IntMatrix(tuple(out), cols=other.cols)

    def apply(self, vector):
        """Matrix times column vector (sequence of ints)."""
        vector = list(vector)
        if len(vector) != self.cols:
            raise ShapeMismatch("vector length mismatch")
        return tuple(sum(a * v for a, v in zip(row, vector) if a) for row in self.data)

    def transpose(self) -> "IntMatrix":
        return IntMatrix(
            tuple(tuple(self.data[i][j] for i in range(self.rows)) for j in range(self.cols)),
            cols=self.rows,
        )

    def hstack(self, other) -> "IntMatrix":
        if self.rows != other.rows:
            raise ShapeMismatch("hstack row mismatch")
        return IntMatrix(
            tuple(r1 + r2 for r1, r2 in zip(self.data, other.data)),
            cols=self.cols + other.cols,
        )

    def vstack(self, other) -> "IntMatrix":
        if self.cols != other.cols:
            raise ShapeMismatch("vstack col mismatch")
        return IntMatrix(self.data + other.data, cols=self.cols)

    def submatrix(self, row_indices, col_indices) -> "IntMatrix":
        row_indices = list(row_indices)
        col_indices = list(col_indices)
        return IntMatrix(
            tuple(tuple(self.data[i][j] for j in col_indices) for i in row_indices),
            cols=len(col_indices),
        )


def block_diagonal(blocks) -> IntMatrix:
    blocks = list(blocks)
    rows = sum(b.rows for b in blocks)
    cols = sum(b.cols for b in blocks)
    data = [[0] * cols for _ in range(rows)]
    r0 = c0 = 0
    for b in blocks:
        for i in range(b.rows):
            row = b.data[i]
            for j in range(b.cols):
                if row[j]:
                    data[r0 + i][c0 + j] = row[j]
        r0 += b.rows
        c0 += b.cols
    return IntMatrix(data, cols=cols)


@dataclass(frozen=True)
class AbGroupInvariants:
    """A finitely generated abelian group: free rank plus elementary divisors.

    ``torsion`` is the divisibility chain d_1 | d_2 | ... with every d_i >= 2;
    Z/1 factors are dropped.
    """

    free_rank: int
    torsion: tuple[int, ...] = ()

    def __post_init__(self):
        if self.free_rank < 0:
            raise ValueError("negative free rank")
        for a, b in zip(self.torsion, self.torsion[1:]):
            if b % a:
                raise ValueError(f"torsion {self.torsion} is not a divisibility chain")
        if any(d < 2 for d in self.torsion):
            raise ValueError("torsion entries must be >= 2")

    @property
    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    @property
    def is_free(self) -> bool:
        return not self.torsion

    def order(self):
        """Group order, or None if infinite."""
        if self.free_rank:
            return None
        n = 1
        for d in self.torsion:
            n *= d
        return n

    def __str__(self):
        parts = []
        if self.free_rank == 1:
            parts.append("Z")
        elif self.free_rank > 1:
            parts.append(f"Z^{self.free_rank}")
        parts.extend(f"Z/{d}" for d in self.torsion)
        return " + ".join(parts) if parts else "0"


@dataclass(frozen=True)
class SnfResult:
    """L * M * R = diagonal(invariants), with all four transforms unimodular."""

    invariants: tuple[int, ...]
    left: IntMatrix
    right: IntMatrix
    left_inv: IntMatrix
    right_inv: IntMatrix

    def diagonal(self) -> IntMatrix:
        return IntMatrix.diagonal(self.invariants, rows=self.left.rows, cols=self.right.rows)


def _xgcd(a: int, b: int):
    """Return (g, s, t) with s*a + t*b = g = gcd(a, b), g >= 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


class _Smith:
    """Mutable SNF state; each transform is tracked only when requested."""

    def __init__(self, m: IntMatrix, need_left: bool, need_right: bool,
                 need_left_inv: bool, need_right_inv: bool):
        self.r, self.c = m.rows, m.cols
        self.a = [list(row) for row in m.data]

        def ident(n):
            return [[1 if i == j else 0 for j in range(n)] for i in range(n)]

        self.L = ident(self.r) if need_left else None
        self.Li = ident(self.r) if need_left_inv else None
        self.R = ident(self.c) if need_right else None
        self.Ri = ident(self.c) if need_right_inv else None

    # Elementary operations keep the identities L*M0*R == A, Li == L^-1,
    # Ri == R^-1 at every step.

    def row_swap(self, i, t):
        if i == t:
            return
        self.a[i], self.a[t] = self.a[t], self.a[i]
        if self.L is not None:
            self.L[i], self.L[t] = self.L[t], self.L[i]
        if self.Li is not None:
            for row in self.Li:
                row[i], row[t] = row[t], row[i]

    def col_swap(self, j, t):
        if j == t:
            return
        for row in self.a:
            row[j], row[t] = row[t], row[j]
        if self.R is not None:
            for row in self.R:
                row[j], row[t] = row[t], row[j]
        if self.Ri is not None:
            self.Ri[j], self.Ri[t] = self.Ri[t], self.Ri[j]

    def row_negate(self, i):
        self.a[i] = [-x for x in self.a[i]]
        if self.L is not None:
            self.L[i] = [-x for x in self.L[i]]
        if self.Li is not None:
            for row in self.Li:
                row[i] = -row[i]

    def row_two(self, t, i, s, u, x, y):
        """Rows (t, i) <- (s*row_t + u*row_i, x*row_t + y*row_i); det = +-1."""
        at, ai = self.a[t], self.a[i]
        self.a[t] = [s * p + u * q for p, q in zip(at, ai)]
        self.a[i] = [x * p + y * q for p, q in zip(at, ai)]
        if self.L is not None:
            lt, li = self.L[t], self.L[i]
            self.L[t] = [s * p + u * q for p, q in zip(lt, li)]
            self.L[i] = [x * p + y * q for p, q in zip(lt, li)]
        if self.Li is not None:
            det = s * y - u * x
            for row in self.Li:
                p, q = row[t], row[i]
                row[t] = (y * p - x * q) * det
                row[i] = (-u * p + s * q) * det

    def col_two(self, t, j, s, u, x, y):
        """Cols (t, j) <- (s*col_t + u*col_j, x*col_t + y*col_j); det = +-1."""
        for row in self.a:
            p, q = row[t], row[j]
            row[t] = s * p + u * q
            row[j] = x * p + y * q
        if self.R is not None:
            for row in self.R:
                p, q = row[t], row[j]
                row[t] = s * p + u * q
                row[j] = x * p + y * q
        if self.Ri is not None:
            det = s * y - u * x
            rt, rj = self.Ri[t], self.Ri[j]
            self.Ri[t] = [(y * p - x * q) * det for p, q in zip(rt, rj)]
            self.Ri[j] = [(-u * p + s * q) * det for p, q in zip(rt, rj)]

    def _find_pivot(self, t):
        best = None
        for i in range(t, self.r):
            row = self.a[i]
            for j in range(t, self.c):
                v = row[j]
                if v:
                    av = -v if v < 0 else v
                    if av == 1:
                        return 1, i, j
                    if best is None or av < best[0]:
                        best = (av, i, j)
        return best

    def _clear_cross(self, t):
        """Zero out column t below and row t to the right of the pivot."""
        while True:
            for i in range(t + 1, self.r):
                v = self.a[i][t]
                if v:
                    p = self.a[t][t]
                    if v % p == 0:
                        self.row_two(t, i, 1, 0, -(v // p), 1)
                    else:
                        g, s, u = _xgcd(p, v)
                        self.row_two(t, i, s, u, -(v // g), p // g)
            row_gcd_steps = False
            for j in range(t + 1, self.c):
                v = self.a[t][j]
                if v:
                    p = self.a[t][t]
                    if v % p == 0:
                        self.col_two(t, j, 1, 0, -(v // p), 1)
                    else:
                        g, s, u = _xgcd(p, v)
                        self.col_two(t, j, s, u, -(v // g), p // g)
                        row_gcd_steps = True
            if not row_gcd_steps:
                # Division-only column operations leave column t untouched,
                # so both the row and the column are now clear.
                return

    def reduce(self):
        k = min(self.r, self.c)
        for t in range(k):
            piv = self._find_pivot(t)
            if piv is None:
                break
            _, i0, j0 = piv
            self.row_swap(t, i0)
            self.col_swap(t, j0)
            while True:
                self._clear_cross(t)
                if self.a[t][t] < 0:
                    self.row_negate(t)
                p = self.a[t][t]
                bad = None
                for i in range(t + 1, self.r):
                    row = self.a[i]
                    for j in range(t + 1, self.c):
                        if row[j] % p:
                            bad = i
                            break
                    if bad is not None:
                        break
                if bad is None:
                    break
                # Fold the offending row into the pivot row; the next pass
                # shrinks the pivot to a proper divisor, so this terminates.
                self.row_two(t, bad, 1, 1, 0, 1)
        return tuple(self.a[i][i] for i in range(k))


def _run_smith(m, need_left, need_right, need_left_inv, need_right_inv):
    st = _Smith(m, need_left, need_right, need_left_inv, need_right_inv)
    diag = st.reduce()
    pack = lambda rows, n: IntMatrix(rows, cols=n) if rows is not None else None
    return (
        diag,
        pack(st.L, st.r),
        pack(st.R, st.c),
        pack(st.Li, st.r),
        pack(st.Ri, st.c),
    )


def snf(m: IntMatrix) -> SnfResult:
    """Smith normal form with transforms: left * m * right = diagonal.

    The invariant factors are nonnegative and form a divisibility chain
    (zeros trail).  ``left``/``right`` and their inverses are unimodular.
    """
    diag, left, right, left_inv, right_inv = _run_smith(m, True, True, True, True)
    return SnfResult(diag, left, right, left_inv, right_inv)


def snf_invariants(m: IntMatrix) -> tuple[int, ...]:
    """Invariant factors only; much cheaper than full ``snf``."""
    return _run_smith(m, False, False, False, False)[0]


def kernel_basis(m: IntMatrix) -> IntMatrix:
    """Columns form a basis of {x : m x = 0}.

    The kernel of an integer matrix is a saturated sublattice (Z^n modulo it
    embeds in the free group Z^m), so any basis of it is automatically
    primitive: the SNF of the returned matrix has all invariants 1.
    """
    diag, _, right, _, _ = _run_smith(m, False, True, False, False)
    zero_cols = [j for j in range(m.cols) if j >= len(diag) or diag[j] == 0]
    return right.submatrix(range(m.cols), zero_cols)


def image_basis(m: IntMatrix) -> IntMatrix:
    """Columns form a basis of the lattice spanned by the columns of m."""
    diag, _, _, left_inv, _ = _run_smith(m, False, False, True, False)
    cols = []
    for j, d in enumerate(diag):
        if d:
            cols.append(tuple(d * left_inv.data[i][j] for i in range(m.rows)))
    return IntMatrix.from_columns(cols, rows=m.rows)


def solve(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    """Some integer X with a @ X = b, or raise NoIntegerSolution.

    When the columns of ``a`` are a lattice basis the solution is unique.
    """
    if a.rows != b.rows:
        raise ShapeMismatch("solve: row mismatch")
    diag, left, right, _, _ = _run_smith(a, True, True, False, False)
    lb = left * b
    y = [[0] * b.cols for _ in range(a.cols)]
    for i in range(a.rows):
        d = diag[i] if i < len(diag) else 0
        for j in range(b.cols):
            v = lb.data[i][j]
            if d == 0:
                if v:
                    raise NoIntegerSolution(f"inconsistent row {i}")
            else:
                q, rem = divmod(v, d)
                if rem:
                    raise NoIntegerSolution(f"divisibility fails at row {i}")
                if i < a.cols:
                    y[i][j] = q
    return right * IntMatrix(y, cols=b.cols)


def lattice_contains(basis_or_gens: IntMatrix, vectors: IntMatrix) -> bool:
    """True when every column of ``vectors`` lies in the span of the columns."""
    try:
        solve(basis_or_gens, vectors)
        return True
    except NoIntegerSolution:
        return False


def _invariants_from_diag(ambient: int, diag) -> AbGroupInvariants:
    nonzero = [d for d in diag if d]
    torsion = tuple(d for d in nonzero if d > 1)
    return AbGroupInvariants(ambient - len(nonzero), torsion)


@dataclass(frozen=True)
class Cokernel:
    """Presentation of Z^n / column-lattice(relations).

    ``section`` maps the free quotient back into Z^n (its columns project to
    a basis of the free part) and ``projection`` gives quotient coordinates;
    projection @ section is the identity.  The pair expresses endomorphisms
    on the quotient whenever the quotient is free.
    """

    invariants: AbGroupInvariants
    section: IntMatrix
    projection: IntMatrix
    relations: IntMatrix

    def induce(self, op: IntMatrix) -> IntMatrix:
        """Matrix of the endomorphism induced on the free quotient.

        Raises NoIntegerSolution when ``op`` does not preserve the relation
        lattice (the induced map would be undefined).
        """
        solve(self.relations, op * self.relations)
        return self.projection * op * self.section


def cokernel(m: IntMatrix) -> Cokernel:
    """Invariants and free-part splitting of Z^rows / im(m)."""
    n = m.rows
    diag, left, _, left_inv, _ = _run_smith(m, True, False, True, False)
    free_idx = [i for i in range(n) if i >= len(diag) or diag[i] == 0]
    section = left_inv.submatrix(range(n), free_idx)
    projection = left.submatrix(free_idx, range(n))
    return Cokernel(_invariants_from_diag(n, diag), section, projection, m)


@dataclass(frozen=True)
class Subquotient:
    """lattice(numerator)/lattice(denominator) with explicit representatives.

    ``basis`` columns are a lattice basis of the numerator; ``rel`` expresses
    the denominator generators in that basis, so the group is presented as
    Z^s / im(rel) and ``invariants`` describes it.
    """

    invariants: AbGroupInvariants
    basis: IntMatrix
    rel: IntMatrix


def subquotient(numerator_gens: IntMatrix, denominator_gens: IntMatrix) -> Subquotient:
    """Quotient of one column lattice by another; denominator must be contained."""
    basis = image_basis(numerator_gens)
    if denominator_gens.cols == 0:
        rel = IntMatrix.zeros(basis.cols, 0)
    else:
        rel = solve(basis, denominator_gens)
    inv = _invariants_from_diag(basis.cols, snf_invariants(rel))
    return Subquotient(inv, basis, rel)


def preimage_lattice(a: IntMatrix, denominator_gens: IntMatrix) -> IntMatrix:
    """Basis of {x : a x in lattice(denominator_gens)}."""
    k = kernel_basis(a.hstack(denominator_gens))
    gens = k.submatrix(range(a.cols), range(k.cols))
    return image_basis(gens)


def homology_pair(d_out: IntMatrix, d_in: IntMatrix) -> Subquotient:
    """ker(d_out)/im(d_in) for one spot of a complex of free groups."""
    if d_out.cols != d_in.rows:
        raise ShapeMismatch("homology_pair: ambient rank mismatch")
    return subquotient(kernel_basis(d_out), d_in)
