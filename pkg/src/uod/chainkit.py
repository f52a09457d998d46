"""Chain complexes of free abelian groups, twists, cones, and the
Koszul-Tate style double complex with its companion complexes.

A double complex here has a finite Koszul direction (rows 0..m_max indexed by
subset size) and an infinite two-periodic direction that is materialized on a
finite degree window.  Interior degrees far enough from the window edges are
exact; ``HomologyTable.stable`` records which ones.

Quotient companions (by the image of one operator, or of all Koszul
operators) are returned as complexes of *presented* abelian groups.  Their
homology at degree n is computed by the exact subquotient formula

    {x : d_n x in relations} / (im d_{n+1} + relations),

which avoids resolving each term; when every term happens to be Z-free the
complex is first reduced to an honest free complex, which is much cheaper.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .znf import (
    AbGroupInvariants,
    IntMatrix,
    block_diagonal,
    cokernel,
    homology_pair,
    lattice_contains,
    preimage_lattice,
    subquotient,
)


class ShapeMismatch(ValueError):
    pass


class NotAComplex(ValueError):
    def __init__(self, degree, message="differentials do not compose to zero"):
        self.degree = degree
        super().__init__(f"{message} (degree {degree})")


class PlusMinusNotZero(ValueError):
    pass


class NonCommutingOperators(ValueError):
    pass


class WindowTooSmall(ValueError):
    pass


@dataclass(frozen=True)
class HomologyTable:
    """Per-degree abelian group invariants.

    ``stable`` is the inclusive degree range that is unaffected by window
    truncation (None means every listed degree is exact).  ``periodic`` marks
    two-periodic theories reported at degrees 0 and 1 only.
    """

    entries: dict
    stable: tuple | None = None
    periodic: bool = False

    def __getitem__(self, n) -> AbGroupInvariants:
        if self.periodic:
            return self.entries[n % 2]
        return self.entries[n]

    def stable_degrees(self):
        if self.stable is None:
            return sorted(self.entries)
        lo, hi = self.stable
        return [n for n in sorted(self.entries) if lo <= n <= hi]

    def stable_entries(self) -> dict:
        return {n: self.entries[n] for n in self.stable_degrees()}

    def agrees_with(self, other: "HomologyTable") -> bool:
        """Equality of invariants on the common stable degrees.

        An empty comparison range counts as disagreement: windows too small
        to overlap provide no evidence.
        """
        if self.periodic and other.periodic:
            return all(self[i] == other[i] for i in (0, 1))
        mine, theirs = set(self.stable_degrees()), set(other.stable_degrees())
        if self.periodic:
            common = theirs
        elif other.periodic:
            common = mine
        else:
            common = mine & theirs
        if not common:
            return False
        return all(self[n] == other[n] for n in common)

    def constant_value(self):
        """The single invariant shared by all stable degrees, or None."""
        values = {self.entries[n] for n in self.stable_degrees()}
        return values.pop() if len(values) == 1 else None


class ChainComplex:
    """Finitely supported complex of free abelian groups.

    ``diff[n]`` is the matrix of the map from degree n to degree n-1; absent
    degrees have rank zero.  Composition of consecutive differentials is
    checked at construction.
    """

    def __init__(self, ranks: dict, diff: dict, stable=None, check=True):
        self.ranks = {n: r for n, r in ranks.items() if r}
        self.diff = {}
        self.stable = stable
        if self.ranks:
            self.lo = min(self.ranks)
            self.hi = max(self.ranks)
        else:
            self.lo, self.hi = 0, -1
        for n, m in diff.items():
            if m.rows != self.rank(n - 1) or m.cols != self.rank(n):
                raise ShapeMismatch(
                    f"differential at degree {n} is {m.rows}x{m.cols}, "
                    f"expected {self.rank(n - 1)}x{self.rank(n)}"
                )
            if m.rows and m.cols:
                self.diff[n] = m
        if check:
            for n in list(self.diff):
                if n + 1 in self.diff and not (self.diff[n] * self.diff[n + 1]).is_zero():
                    raise NotAComplex(n)

    def rank(self, n: int) -> int:
        return self.ranks.get(n, 0)

    def differential(self, n: int) -> IntMatrix:
        if n in self.diff:
            return self.diff[n]
        return IntMatrix.zeros(self.rank(n - 1), self.rank(n))

    def degrees(self):
        return range(self.lo, self.hi + 1)

    def euler_characteristic(self) -> int:
        return sum((-1) ** n * r for n, r in self.ranks.items())

    def homology(self) -> HomologyTable:
        entries = {
            n: homology_pair(self.differential(n), self.differential(n + 1)).invariants
            for n in self.degrees()
        }
        return HomologyTable(entries, stable=self.stable)

    def shift_eq(self, other: "ChainComplex") -> bool:
        return self.ranks == other.ranks and all(
            self.differential(n) == other.differential(n)
            for n in range(self.lo, self.hi + 2)
        )


def make_complex(ranks, differentials, bottom_degree: int = 0) -> ChainComplex:
    """Complex from a rank list and consecutive differentials.

    ``differentials[i]`` maps degree bottom+i+1 to degree bottom+i and must be
    shaped ranks[i] x ranks[i+1].  Rejects data violating d*d = 0.
    """
    ranks = list(ranks)
    differentials = [
        d if isinstance(d, IntMatrix) else IntMatrix(d) for d in differentials
    ]
    if len(differentials) != max(len(ranks) - 1, 0):
        raise ShapeMismatch("need exactly len(ranks)-1 differentials")
    rank_map = {bottom_degree + i: r for i, r in enumerate(ranks)}
    diff_map = {bottom_degree + i + 1: d for i, d in enumerate(differentials)}
    return ChainComplex(rank_map, diff_map)


def twist(c: ChainComplex, k: int) -> ChainComplex:
    """Degree shift by k with differentials scaled by (-1)^k."""
    sign = -1 if k % 2 else 1
    ranks = {n + k: r for n, r in c.ranks.items()}
    diff = {n + k: (d if sign == 1 else -d) for n, d in c.diff.items()}
    return ChainComplex(ranks, diff, check=False)


class ChainMap:
    """Degreewise map commuting with the differentials."""

    def __init__(self, source: ChainComplex, target: ChainComplex, components: dict, check=True):
        self.source = source
        self.target = target
        self.components = {}
        for n, m in components.items():
            if m.rows != target.rank(n) or m.cols != source.rank(n):
                raise ShapeMismatch(f"component at degree {n} has wrong shape")
            if m.rows and m.cols:
                self.components[n] = m
        if check:
            lo = min(source.lo, target.lo)
            hi = max(source.hi, target.hi)
            for n in range(lo, hi + 2):
                lhs = self.component(n - 1) * source.differential(n)
                rhs = target.differential(n) * self.component(n)
                if lhs != rhs:
                    raise NotAComplex(n, "chain map does not commute with differentials")

    def component(self, n: int) -> IntMatrix:
        if n in self.components:
            return self.components[n]
        return IntMatrix.zeros(self.target.rank(n), self.source.rank(n))


@dataclass(frozen=True)
class MappingCone:
    """Cone(f) together with the maps realizing 0 -> Y -> Cone -> X[1] -> 0."""

    complex: ChainComplex
    inclusion: ChainMap
    projection: ChainMap


def mapping_cone(f: ChainMap) -> MappingCone:
    x, y = f.source, f.target
    lo = min(x.lo + 1, y.lo)
    hi = max(x.hi + 1, y.hi)
    ranks = {n: x.rank(n - 1) + y.rank(n) for n in range(lo, hi + 1)}
    diff = {}
    for n in range(lo, hi + 2):
        # block differential [[-dX, 0], [f, dY]] from X_{n-1} (+) Y_n
        top = (-x.differential(n - 1)).hstack(
            IntMatrix.zeros(x.rank(n - 2), y.rank(n))
        )
        bottom = f.component(n - 1).hstack(y.differential(n))
        m = top.vstack(bottom)
        if m.rows and m.cols:
            diff[n] = m
    cone = ChainComplex(ranks, diff)
    incl = ChainMap(
        y,
        cone,
        {
            n: IntMatrix.zeros(x.rank(n - 1), y.rank(n)).vstack(IntMatrix.identity(y.rank(n)))
            for n in range(y.lo, y.hi + 1)
        },
    )
    x1 = twist(x, 1)
    proj = ChainMap(
        cone,
        x1,
        {
            n: IntMatrix.identity(x.rank(n - 1)).hstack(
                IntMatrix.zeros(x.rank(n - 1), y.rank(n))
            )
            for n in range(lo, hi + 1)
        },
    )
    return MappingCone(cone, incl, proj)


class ActionModule:
    """Free Z-module with named commuting endomorphisms.

    Operator names follow the conventions used downstream: ``X[p]`` for the
    fiber-sum operator of an ideal p, ``G[t]`` for a group element, and
    ``gamma0`` for the sign generator.  ``nu`` holds the integer scalars
    attached to ideal names.
    """

    def __init__(self, rank: int, operators: dict, nu: dict | None = None,
                 gamma_order_bound: int = 64, check=True):
        self.rank = rank
        self.operators = dict(operators)
        self.nu = dict(nu or {})
        for name, op in self.operators.items():
            if op.rows != rank or op.cols != rank:
                raise ShapeMismatch(f"operator {name!r} is not {rank}x{rank}")
        if check:
            names = sorted(self.operators)
            for a, b in itertools.combinations(names, 2):
                ma, mb = self.operators[a], self.operators[b]
                if ma * mb != mb * ma:
                    raise NonCommutingOperators(f"{a!r} and {b!r} do not commute")
            if "gamma0" in self.operators:
                g = self.operators["gamma0"]
                power = g
                ident = IntMatrix.identity(rank)
                for _ in range(gamma_order_bound):
                    if power == ident:
                        break
                    power = power * g
                else:
                    raise ValueError(
                        f"gamma0 has no order up to bound {gamma_order_bound}"
                    )

    def operator(self, name: str) -> IntMatrix:
        return self.operators[name]

    def with_operator(self, name: str, op: IntMatrix) -> "ActionModule":
        ops = dict(self.operators)
        ops[name] = op
        return ActionModule(self.rank, ops, self.nu)

    def gamma_order(self) -> int:
        g = self.operators["gamma0"]
        ident = IntMatrix.identity(self.rank)
        power = g
        m = 1
        while power != ident:
            power = power * g
            m += 1
        return m


class DoubleComplex:
    """Bigraded free complex: horizontal d of bidegree (-1,0), vertical of (0,-1).

    Rows m run over 0..m_max (Koszul subset size); columns n over the stored
    window.  d^2 = 0 both ways and anticommutation are checked entrywise.
    """

    def __init__(self, m_max: int, n_lo: int, n_hi: int, ranks: dict,
                 horiz: dict, vert: dict, check=True):
        self.m_max = m_max
        self.n_lo = n_lo
        self.n_hi = n_hi
        self.ranks = ranks
        self.horiz = horiz
        self.vert = vert
        if check:
            self._validate()

    def rank(self, m: int, n: int) -> int:
        return self.ranks.get((m, n), 0)

    def horizontal(self, m: int, n: int) -> IntMatrix:
        return self.horiz.get((m, n), IntMatrix.zeros(self.rank(m - 1, n), self.rank(m, n)))

    def vertical(self, m: int, n: int) -> IntMatrix:
        return self.vert.get((m, n), IntMatrix.zeros(self.rank(m, n - 1), self.rank(m, n)))

    def bidegrees(self):
        return [
            (m, n)
            for m in range(self.m_max + 1)
            for n in range(self.n_lo, self.n_hi + 1)
        ]

    def _validate(self):
        # identical matrix objects are shared across the window, so memoize
        # the zero checks by object identity
        seen = set()

        def zero_product(a, b):
            key = (id(a), id(b))
            if key in seen:
                return True
            ok = (a * b).is_zero()
            if ok:
                seen.add(key)
            return ok

        anti_seen = set()
        for m, n in self.bidegrees():
            if m >= 2 and not zero_product(self.horizontal(m - 1, n), self.horizontal(m, n)):
                raise NotAComplex((m, n), "horizontal d^2 != 0")
            if n >= self.n_lo + 2 and not zero_product(
                self.vertical(m, n - 1), self.vertical(m, n)
            ):
                raise NotAComplex((m, n), "vertical d^2 != 0")
            if m >= 1 and n >= self.n_lo + 1:
                h1, v1 = self.horizontal(m, n - 1), self.vertical(m, n)
                v2, h2 = self.vertical(m - 1, n), self.horizontal(m, n)
                key = (id(h1), id(v1), id(v2), id(h2))
                if key in anti_seen:
                    continue
                if not (h1 * v1 + v2 * h2).is_zero():
                    raise NotAComplex((m, n), "rows and columns do not anticommute")
                anti_seen.add(key)


def _check_window(window, r):
    if window is None:
        window = (-(r + 3), r + 3)
    lo, hi = window
    if hi - lo + 1 < 2 * r + 4:
        raise WindowTooSmall(
            f"window [{lo},{hi}] shorter than {2 * r + 4} for {r} Koszul operators"
        )
    if not (lo <= 0 <= hi):
        raise WindowTooSmall("window must contain degree 0")
    return lo, hi


def build_kt(module: ActionModule, ideal_names, plus_name: str, minus_name: str,
             window=None) -> DoubleComplex:
    """The Koszul-Tate double complex of a module with chosen operators.

    Row m is spanned by symbols [I, k] over size-m subsets I of the ideal
    list (kept in the given linear order); the horizontal differential
    removes one ideal at a time with the alternating subset sign, and the
    vertical one applies the plus operator at even k and the minus operator
    at odd k, scaled by (-1)^|I|.
    """
    ideal_names = list(ideal_names)
    r = len(ideal_names)
    n_lo, n_hi = _check_window(window, r)
    ops = [module.operator(name) for name in ideal_names]
    plus = module.operator(plus_name)
    minus = module.operator(minus_name)
    if not (plus * minus).is_zero():
        raise PlusMinusNotZero(f"{plus_name!r} * {minus_name!r} is not zero")
    involved = ops + [plus, minus]
    for a, b in itertools.combinations(range(len(involved)), 2):
        if involved[a] * involved[b] != involved[b] * involved[a]:
            raise NonCommutingOperators("KT operators must commute pairwise")

    d = module.rank
    subsets = {m: list(itertools.combinations(range(r), m)) for m in range(r + 1)}
    index = {m: {s: i for i, s in enumerate(subsets[m])} for m in range(r + 1)}

    ranks = {}
    horiz = {}
    vert = {}
    horiz_per_m = {}
    for m in range(r + 1):
        ranks_m = d * len(subsets[m])
        for n in range(n_lo, n_hi + 1):
            ranks[(m, n)] = ranks_m
        if m >= 1:
            rows = d * len(subsets[m - 1])
            data = [[0] * ranks_m for _ in range(rows)]
            for si, subset in enumerate(subsets[m]):
                for pos, i in enumerate(subset):
                    target = tuple(x for x in subset if x != i)
                    ti = index[m - 1][target]
                    sign = -1 if pos % 2 else 1
                    op = ops[i]
                    for a in range(d):
                        row = op.data[a]
                        for b in range(d):
                            if row[b]:
                                data[ti * d + a][si * d + b] += sign * row[b]
            horiz_per_m[m] = IntMatrix(data, cols=ranks_m)
    for m in range(1, r + 1):
        for n in range(n_lo, n_hi + 1):
            horiz[(m, n)] = horiz_per_m[m]
    for m in range(r + 1):
        sign = -1 if m % 2 else 1
        count = len(subsets[m])
        even_block = block_diagonal([plus.scale(sign)] * count) if count else IntMatrix.zeros(0, 0)
        odd_block = block_diagonal([minus.scale(sign)] * count) if count else IntMatrix.zeros(0, 0)
        for n in range(n_lo + 1, n_hi + 1):
            vert[(m, n)] = even_block if n % 2 == 0 else odd_block
    return DoubleComplex(r, n_lo, n_hi, ranks, horiz, vert)


class PresentedComplex:
    """Complex whose terms are presented abelian groups Z^g / relation lattice.

    Differentials are given on generators; at construction it is checked that
    they carry relations into relations and compose to zero modulo relations.
    """

    def __init__(self, ranks: dict, rels: dict, diff: dict, stable=None, check=True):
        self.ranks = {n: r for n, r in ranks.items() if r}
        self.rels = {n: m for n, m in rels.items() if m.cols and not m.is_zero()}
        self.diff = {n: m for n, m in diff.items() if m.rows and m.cols}
        self.stable = stable
        if self.ranks:
            self.lo, self.hi = min(self.ranks), max(self.ranks)
        else:
            self.lo, self.hi = 0, -1
        if check:
            for n, m in self.diff.items():
                if m.rows != self.rank(n - 1) or m.cols != self.rank(n):
                    raise ShapeMismatch(f"differential shape at degree {n}")
            for n in self.degrees():
                moved = self.differential(n) * self.relations(n)
                if not moved.is_zero() and not lattice_contains(
                    self.relations(n - 1), moved
                ):
                    raise NotAComplex(n, "differential does not preserve relations")
                composite = self.differential(n - 1) * self.differential(n)
                if not composite.is_zero() and not lattice_contains(
                    self.relations(n - 2), composite
                ):
                    raise NotAComplex(n, "d*d is nonzero modulo relations")

    def rank(self, n: int) -> int:
        return self.ranks.get(n, 0)

    def relations(self, n: int) -> IntMatrix:
        return self.rels.get(n, IntMatrix.zeros(self.rank(n), 0))

    def differential(self, n: int) -> IntMatrix:
        if n in self.diff:
            return self.diff[n]
        return IntMatrix.zeros(self.rank(n - 1), self.rank(n))

    def degrees(self):
        return range(self.lo, self.hi + 1)

    def term_invariants(self, n: int) -> AbGroupInvariants:
        return cokernel(self.relations(n)).invariants

    def homology(self) -> HomologyTable:
        coks = {}
        for n in self.degrees():
            rel = self.relations(n)
            if rel not in coks:
                coks[rel] = cokernel(rel)
        if all(c.invariants.is_free for c in coks.values()):
            return self._homology_via_free(coks)
        return self._homology_generic()

    def _homology_via_free(self, coks) -> HomologyTable:
        ranks = {}
        diff = {}
        for n in self.degrees():
            ranks[n] = coks[self.relations(n)].invariants.free_rank
        for n in range(self.lo + 1, self.hi + 1):
            # relation preservation was validated at construction, so the
            # induced matrix on free quotients can be formed directly
            src = coks[self.relations(n)]
            dst = coks[self.relations(n - 1)]
            diff[n] = dst.projection * self.differential(n) * src.section
        free = ChainComplex(ranks, diff, stable=self.stable)
        return free.homology()

    def _homology_generic(self) -> HomologyTable:
        entries = {}
        cache = {}
        for n in self.degrees():
            key = (
                self.differential(n),
                self.differential(n + 1),
                self.relations(n - 1),
                self.relations(n),
            )
            if key not in cache:
                d_out, d_in, rel_prev, rel_here = key
                num = preimage_lattice(d_out, rel_prev)
                den = d_in.hstack(rel_here)
                cache[key] = subquotient(num, den).invariants
            entries[n] = cache[key]
        return HomologyTable(entries, stable=self.stable)


def total_complex(d: DoubleComplex, keep=None, stable=None) -> ChainComplex:
    """Total complex with differential induced by the sum of both directions.

    ``keep`` optionally filters bidegrees (used for the k >= 0 truncation).
    """
    keep = keep or (lambda m, n: True)
    blocks = {}
    for total in range(d.n_lo, d.n_hi + d.m_max + 1):
        parts = [
            (m, total - m)
            for m in range(d.m_max + 1)
            if d.n_lo <= total - m <= d.n_hi and keep(m, total - m)
        ]
        blocks[total] = parts
    ranks = {t: sum(d.rank(m, n) for m, n in parts) for t, parts in blocks.items()}
    offsets = {}
    for t, parts in blocks.items():
        off = {}
        pos = 0
        for m, n in parts:
            off[(m, n)] = pos
            pos += d.rank(m, n)
        offsets[t] = off
    diff = {}
    for t in blocks:
        if t - 1 not in blocks:
            continue
        rows, cols = ranks[t - 1], ranks[t]
        data = [[0] * cols for _ in range(rows)]

        def paste(mat, r0, c0):
            for i in range(mat.rows):
                row = mat.data[i]
                for j in range(mat.cols):
                    if row[j]:
                        data[r0 + i][c0 + j] += row[j]

        for m, n in blocks[t]:
            c0 = offsets[t][(m, n)]
            if (m - 1, n) in offsets[t - 1]:
                paste(d.horizontal(m, n), offsets[t - 1][(m - 1, n)], c0)
            if (m, n - 1) in offsets[t - 1]:
                paste(d.vertical(m, n), offsets[t - 1][(m, n - 1)], c0)
        diff[t] = IntMatrix(data, cols=cols)
    return ChainComplex(ranks, diff, stable=stable)


def companion(d: DoubleComplex, which: str):
    """One of the named companion complexes of a KT-style double complex.

    K and T are the edge row and column; Kbar and Tbar are the same shapes
    over the quotient modules (returned as presented complexes); KTtot and
    KTplus are the total complex and its k >= 0 truncation.
    """
    r = d.m_max
    if d.n_hi - d.n_lo + 1 < 2 * r + 4:
        raise WindowTooSmall("double complex window is too small for companions")
    stable = (d.n_lo + r + 2, d.n_hi - 2)
    if which == "K":
        ranks = {m: d.rank(m, 0) for m in range(r + 1)}
        diff = {m: d.horizontal(m, 0) for m in range(1, r + 1)}
        return ChainComplex(ranks, diff)
    if which == "T":
        ranks = {n: d.rank(0, n) for n in range(d.n_lo, d.n_hi + 1)}
        diff = {n: d.vertical(0, n) for n in range(d.n_lo + 1, d.n_hi + 1)}
        return ChainComplex(ranks, diff, stable=(d.n_lo + 1, d.n_hi - 1))
    if which == "Kbar":
        # quotient of each Koszul spot by the image of the odd (minus) operator
        minus = d.vertical(0, _odd_in(d))
        ranks = {m: d.rank(m, 0) for m in range(r + 1)}
        rels = {}
        for m in range(r + 1):
            copies = d.rank(m, 0) // max(minus.rows, 1) if minus.rows else 0
            rels[m] = block_diagonal([minus] * copies) if copies else IntMatrix.zeros(d.rank(m, 0), 0)
        diff = {m: d.horizontal(m, 0) for m in range(1, r + 1)}
        return PresentedComplex(ranks, rels, diff)
    if which == "Tbar":
        # quotient of the Tate column by the images of all Koszul operators
        rel = _koszul_images(d)
        ranks = {n: d.rank(0, n) for n in range(d.n_lo, d.n_hi + 1)}
        rels = {n: rel for n in ranks}
        diff = {n: d.vertical(0, n) for n in range(d.n_lo + 1, d.n_hi + 1)}
        return PresentedComplex(ranks, rels, diff, stable=(d.n_lo + 1, d.n_hi - 1))
    if which == "KTtot":
        return total_complex(d, stable=stable)
    if which == "KTplus":
        return total_complex(
            d,
            keep=lambda m, n: n >= 0,
            stable=(max(d.n_lo, 0) + r + 2, d.n_hi - 2),
        )
    raise ValueError(f"unknown companion {which!r}")


def _odd_in(d: DoubleComplex):
    for n in range(d.n_lo + 1, d.n_hi + 1):
        if n % 2 == 1:
            return n
    raise WindowTooSmall("window has no odd degree")


def _koszul_images(d: DoubleComplex) -> IntMatrix:
    """Concatenated images of the Koszul operators acting on the module."""
    r = d.m_max
    rank0 = d.rank(0, 0)
    if r == 0:
        return IntMatrix.zeros(rank0, 0)
    # the horizontal differential from each singleton row recovers f_s itself
    h = d.horizontal(1, 0)
    pieces = [
        h.submatrix(range(rank0), range(s * rank0, (s + 1) * rank0)) for s in range(r)
    ]
    out = pieces[0]
    for p in pieces[1:]:
        out = out.hstack(p)
    return out


def homology(c) -> HomologyTable:
    """Homology of a free or presented chain complex."""
    return c.homology()
