"""The free module on torsion classes, its operators, and the universal
ordinary distribution at a finite level.

A(f) is the free abelian group on Xi(f).  Each maximal p | f acts by the
fiber-sum operator: on classes of order dividing f/p this is the honest sum
over the Y_p fiber (which stays inside Xi(f)); on the boundary layer, whose
fibers escape the level, the operator is completed by the scalar nu_p, the
value it takes on the level-f^infinity quotient.  With that completion all
operators commute, and they descend to the quotient

    U(f) = A(f) / < nu_p xi - sum_{Y_p eta = xi} eta :  p | f, xi in Xi(f/p) >

which is Z-free of rank |G_f| with basis the depth-zero classes.  The depth
of a class of exact order f is computed from the torsor decomposition over a
fixed transversal of ker(G_f -> G_{f/rad f}) and the per-prime kernel
components; depth zero means no kernel component is trivial.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import arith
from .arith import (
    GfElement,
    GfGroup,
    XiClass,
    fiber_map,
    g_action,
    gf_group,
    sign_group,
    xi_classes,
    xi_in_level,
    y_map,
)
from .chainkit import ActionModule
from .znf import (
    AbGroupInvariants,
    IntMatrix,
    cokernel,
    image_basis,
    snf,
    snf_invariants,
)


class OrderMismatch(ValueError):
    pass


class InducedOperatorUndefined(RuntimeError):
    pass


class BasisCertificateFailed(RuntimeError):
    pass


class StructureCheckFailed(RuntimeError):
    """A theorem-backed structural assertion failed; indicates a bug."""


def nu_value(bk, nu: dict, g) -> int:
    """Multiplicative extension of the per-prime values to any divisor."""
    out = 1
    for p, e in bk.factor(g):
        out *= nu.get(p, 1) ** e
    return out


def x_op_name(bk, p) -> str:
    return f"X[{bk.format_ideal(p)}]"


def g_op_name(bk, residue) -> str:
    return f"G[{bk.format_residue(residue)}]"


@dataclass
class AfModule:
    """A(f) with its operator package."""

    backend: object
    level: object
    nu: dict
    basis: tuple
    index: dict
    primes: tuple
    fibers: dict            # p -> {xi in Xi(f/p): full Y_p fiber in Xi(f)}
    operators: ActionModule
    group: GfGroup

    @property
    def rank(self) -> int:
        return len(self.basis)

    def class_vector(self, coeffs: dict) -> tuple:
        v = [0] * self.rank
        for xi, c in coeffs.items():
            v[self.index[xi]] += c
        return tuple(v)

    def x_operator(self, p) -> IntMatrix:
        return self.operators.operator(x_op_name(self.backend, p))

    def gamma_operator(self) -> IntMatrix:
        return self.operators.operator("gamma0")

    def permutation_matrix(self, mapping) -> IntMatrix:
        """Matrix of a permutation of the basis given as a callable."""
        cols = []
        for xi in self.basis:
            target = mapping(xi)
            col = [0] * self.rank
            col[self.index[target]] = 1
            cols.append(col)
        return IntMatrix.from_columns(cols, rows=self.rank)


def build_af(bk, f, nu: dict | None = None) -> AfModule:
    """Assemble A(f): basis Xi(f), fiber-sum operators, group generators, sign."""
    nu = dict(nu or {})
    basis = tuple(xi_classes(bk, f))
    index = {xi: i for i, xi in enumerate(basis)}
    primes = tuple(p for p, _ in bk.factor(f))
    fibers = {p: fiber_map(bk, p, f) for p in primes}
    rank = len(basis)

    ops = {}
    for p in primes:
        sub_level = bk.divide(f, p)
        cols = []
        for xi in basis:
            col = [0] * rank
            if xi_in_level(bk, xi, sub_level):
                for eta in fibers[p][xi]:
                    col[index[eta]] += 1
            else:
                col[index[xi]] = nu.get(p, 1)
            cols.append(col)
        ops[x_op_name(bk, p)] = IntMatrix.from_columns(cols, rows=rank)

    group = gf_group(bk, f)
    for gen in group.generators():
        cols = []
        for xi in basis:
            col = [0] * rank
            col[index[g_action(bk, gen, xi)]] = 1
            cols.append(col)
        ops[g_op_name(bk, gen.residue)] = IntMatrix.from_columns(cols, rows=rank)

    cols = []
    for xi in basis:
        col = [0] * rank
        col[index[arith.sign_action(bk, xi)]] = 1
        cols.append(col)
    ops["gamma0"] = IntMatrix.from_columns(cols, rows=rank)

    module = ActionModule(rank, ops, {x_op_name(bk, p): nu.get(p, 1) for p in primes})
    af = AfModule(bk, f, nu, basis, index, primes, fibers, module, group)
    _check_fiber_sums(af)
    return af


def _check_fiber_sums(af: AfModule):
    # X_p xi must be the full Y_p fiber sum wherever that fiber stays at level f
    bk = af.backend
    for p in af.primes:
        sub = bk.divide(af.level, p)
        want = bk.norm(p)
        for xi in af.basis:
            if xi_in_level(bk, xi, sub):
                if len(af.fibers[p][xi]) != want:
                    raise StructureCheckFailed(
                        f"fiber over {xi} has {len(af.fibers[p][xi])} elements, expected {want}"
                    )


def distribution_relations(af: AfModule) -> IntMatrix:
    """Columns nu_p xi - sum(fiber) for each maximal p | f and xi in Xi(f/p)."""
    bk = af.backend
    cols = []
    for p in af.primes:
        sub = bk.divide(af.level, p)
        nu_p = af.nu.get(p, 1)
        for xi in af.basis:
            if not xi_in_level(bk, xi, sub):
                continue
            col = [0] * af.rank
            col[af.index[xi]] += nu_p
            for eta in af.fibers[p][xi]:
                col[af.index[eta]] -= 1
            cols.append(col)
    return IntMatrix.from_columns(cols, rows=af.rank)


@dataclass
class UModule:
    """U(f) presented on A(f), with the depth-zero classes as free basis."""

    parent: AfModule
    relation_matrix: IntMatrix
    invariants: AbGroupInvariants
    basis_classes: tuple
    section: IntMatrix      # |Xi(f)| x rank, columns are the basis classes
    projection: IntMatrix   # rank x |Xi(f)|, kills exactly the relations
    operators: dict         # induced operator matrices on the free basis

    @property
    def rank(self) -> int:
        return self.invariants.free_rank

    def reduce_vector(self, vector) -> tuple:
        return self.projection.apply(vector)

    def induce(self, op: IntMatrix) -> IntMatrix:
        # the projection kills exactly the relation lattice, so op preserves
        # relations iff projection @ op @ relations vanishes
        if not (self.projection * (op * self.relation_matrix)).is_zero():
            raise InducedOperatorUndefined(
                "operator does not preserve the distribution relations"
            )
        return self.projection * op * self.section


def u_module(af: AfModule) -> UModule:
    bk = af.backend
    rel = distribution_relations(af)
    cok = cokernel(rel)
    expected_rank = len(af.group)
    if not cok.invariants.is_free or cok.invariants.free_rank != expected_rank:
        raise StructureCheckFailed(
            f"U({bk.format_ideal(af.level)}) computed as {cok.invariants}, "
            f"expected free of rank {expected_rank}"
        )
    xi0 = [xi for xi in af.basis if depth(bk, xi) == 0]
    if len(xi0) != expected_rank:
        raise StructureCheckFailed(
            f"|Xi_0 ∩ Xi(f)| = {len(xi0)} != |G_f| = {expected_rank}"
        )
    section = IntMatrix.from_columns(
        [_unit_vector(af.rank, af.index[xi]) for xi in xi0], rows=af.rank
    )
    rel_basis = image_basis(rel)
    w = section.hstack(rel_basis)
    if w.rows != w.cols:
        raise BasisCertificateFailed("basis + relations do not fill A(f)")
    res = snf(w)
    if any(d != 1 for d in res.invariants):
        raise BasisCertificateFailed(
            "depth-zero classes do not complement the relation lattice"
        )
    w_inv = res.right * res.left
    projection = w_inv.submatrix(range(expected_rank), range(af.rank))
    induced = {}
    u = UModule(af, rel, cok.invariants, tuple(xi0), section, projection, induced)
    for name, op in af.operators.operators.items():
        induced[name] = u.induce(op)
    return u


def _unit_vector(n, i):
    v = [0] * n
    v[i] = 1
    return v


# ---------------------------------------------------------------------------
# The depth partition of Xi


@dataclass(frozen=True)
class PartitionTag:
    """Torsor decomposition of a class of exact order f.

    sigma lives at level f/rad(f) (its chosen lift is sigma_lift); kappas maps
    each maximal p | f to the kernel component at level f.  The depth counts
    trivial kernel components; depth zero marks the basis classes.
    """

    xi: XiClass
    depth: int
    sigma: GfElement
    sigma_lift: GfElement
    kappas: dict


class _LevelPartition:
    """Per-level transversal and kernel data used to tag exact-order classes."""

    def __init__(self, bk, f):
        self.backend = bk
        self.level = f
        self.group = gf_group(bk, f)
        self.primes = [p for p, _ in bk.factor(f)]
        self.prime_powers = {p: bk.power(p, e) for p, e in bk.factor(f)}
        self.radical = bk.radical(f)
        self.base = bk.divide(f, self.radical)
        self.base_group = gf_group(bk, self.base)
        self.kernels = {
            p: frozenset(
                e.residue
                for e in self.group
                if self._is_one_mod(e.residue, bk.divide(f, p))
            )
            for p in self.primes
        }
        self.one = self.group.identity.residue
        self.transversal = self._build_transversal()

    def _is_one_mod(self, residue, modulus) -> bool:
        bk = self.backend
        if bk.norm(modulus) == 1:
            return True
        one = 1 if bk.kind == "archimedean" else bk.residue_of(bk.one, modulus)
        return bk.residue_of(residue, modulus) == one

    def _build_transversal(self) -> dict:
        bk = self.backend
        if bk.norm(self.base) == 1:
            return {self.base_group.identity.residue: self.one}
        gamma_f = sign_group(bk, self.level).gamma
        gamma_base = self.group.reduce_to(gamma_f, self.base)
        stabilize = self.group.element_order(
            self.group.element(gamma_f.residue)
        ) == self.base_group.element_order(self.base_group.element(gamma_base.residue))
        trans: dict = {}
        for e in self.base_group:
            if e.residue in trans:
                continue
            rep = self._least_lift(e.residue)
            if not stabilize:
                trans[e.residue] = rep
                continue
            ub, lift = e.residue, rep
            while True:
                trans[ub] = lift
                ub = bk.residue_mul(ub, gamma_base.residue, self.base)
                if ub == e.residue:
                    break
                lift = bk.residue_mul(lift, gamma_f.residue, self.level)
        return trans

    def _least_lift(self, base_residue):
        """Smallest residue mod f that is prime to f and reduces to the input."""
        bk = self.backend
        if bk.kind == "archimedean":
            t = base_residue
            while True:
                if t and bk.coprime(t, self.level):
                    return t % self.level
                t += self.base
        for a in bk.residues(self.level):
            if bk.coprime(a, self.level) and bk.residue_of(a, self.base) == base_residue:
                return a
        raise StructureCheckFailed("no coprime lift found")

    def _crt_component(self, x_residue, p):
        """The factor of x in ker(G_f -> G_{f/p}) under the CRT splitting."""
        bk = self.backend
        pe = self.prime_powers[p]
        co = bk.divide(self.level, pe)
        if bk.norm(co) == 1:
            return x_residue
        if bk.kind == "archimedean":
            inv = pow(co % pe, -1, pe) if pe > 1 else 0
            t = (1 + co * (((x_residue - 1) * inv) % pe)) % self.level
            return t
        inv = bk.residue_inverse(bk.residue_of(co, pe), pe)
        diff = bk.residue_of(
            arith.poly_sub(bk.fq, x_residue, bk.one), pe
        )
        t = arith.poly_add(
            bk.fq, bk.one, arith.poly_mul(bk.fq, co, bk.residue_mul(diff, inv, pe))
        )
        return bk.residue_of(t, self.level)

    def decompose(self, residue):
        """residue = sigma_lift * prod kappas, all inside G_f."""
        bk = self.backend
        base_res = bk.residue_of(residue, self.base) if bk.norm(self.base) > 1 else (
            self.base_group.identity.residue
        )
        lift = self.transversal[base_res]
        lift_inv = bk.residue_inverse(lift, self.level)
        x = bk.residue_mul(residue, lift_inv, self.level)
        kappas = {}
        check = self.one
        for p in self.primes:
            comp = self._crt_component(x, p)
            if comp not in self.kernels[p]:
                raise StructureCheckFailed("CRT component missed its kernel")
            kappas[p] = comp
            check = bk.residue_mul(check, comp, self.level)
        if check != x:
            raise StructureCheckFailed("kernel components do not multiply back")
        return base_res, lift, kappas


_partition_cache: dict = {}


def level_partition(bk, f) -> _LevelPartition:
    key = (bk.key, bk.ideal_key(f))
    if key not in _partition_cache:
        _partition_cache[key] = _LevelPartition(bk, f)
    return _partition_cache[key]


def partition_tag(bk, xi: XiClass, context_level=None) -> PartitionTag:
    """Depth tag of a class, computed at its exact order."""
    if context_level is not None and not bk.divides(xi.order, context_level):
        raise OrderMismatch(
            f"class of order {bk.format_ideal(xi.order)} does not divide the context level"
        )
    f = xi.order
    if bk.norm(f) == 1:
        trivial = gf_group(bk, f).identity
        return PartitionTag(xi, 0, trivial, trivial, {})
    part = level_partition(bk, f)
    base_res, lift, kappas = part.decompose(xi.num)
    depth_count = sum(1 for v in kappas.values() if v == part.one)
    return PartitionTag(
        xi,
        depth_count,
        GfElement(bk.key, part.base, base_res),
        GfElement(bk.key, f, lift),
        {p: GfElement(bk.key, f, v) for p, v in kappas.items()},
    )


def depth(bk, xi: XiClass) -> int:
    return partition_tag(bk, xi).depth


def xi0_set(bk, f) -> list[XiClass]:
    """Depth-zero classes at level f; cardinality |G_f| by the counting lemma."""
    return [xi for xi in xi_classes(bk, f) if depth(bk, xi) == 0]


@dataclass(frozen=True)
class Xi0Basis:
    classes: tuple                 # Xi_0 at the module level
    pair_index: tuple              # (divisor g, class xi) per basis column
    lattice_invariants: tuple      # SNF of the X_g xi change of basis
    quotient_invariants: tuple     # SNF of the images of Xi_0 in U(f)
    unimodular: bool


def xi0_basis(af: AfModule) -> Xi0Basis:
    """Certify the monomial basis of A(f) and the induced basis of U(f).

    The first certificate checks that the family X_g xi (g | f, xi depth-zero
    at level f/g) is a Z-basis of A(f): the change-of-basis matrix must be
    square with all invariant factors 1.  The second maps the depth-zero
    classes at level f through an independently computed splitting of U(f)
    (the generic SNF section, not the depth-zero one) and checks
    unimodularity there too.
    """
    bk = af.backend
    f = af.level
    pairs = []
    columns = []
    for g in bk.divisors(f):
        sub = bk.divide(f, g)
        fibers = fiber_map(bk, g, f) if bk.norm(g) > 1 else None
        for xi in xi0_set(bk, sub):
            col = [0] * af.rank
            if fibers is None:
                col[af.index[xi]] = 1
            else:
                for eta in fibers[xi]:
                    col[af.index[eta]] += 1
            pairs.append((g, xi))
            columns.append(col)
    change = IntMatrix.from_columns(columns, rows=af.rank)
    if change.rows != change.cols:
        raise BasisCertificateFailed(
            f"monomial family has {change.cols} members for rank {change.rows}"
        )
    lattice_inv = snf_invariants(change)

    cok = cokernel(distribution_relations(af))
    xi0_here = xi0_set(bk, f)
    images = IntMatrix.from_columns(
        [cok.projection.column(af.index[xi]) for xi in xi0_here],
        rows=cok.invariants.free_rank,
    )
    quotient_inv = snf_invariants(images)
    ok = all(d == 1 for d in lattice_inv) and all(d == 1 for d in quotient_inv)
    if not ok:
        raise BasisCertificateFailed(
            f"certificates: lattice {lattice_inv}, quotient {quotient_inv}"
        )
    return Xi0Basis(tuple(xi0_here), tuple(pairs), lattice_inv, quotient_inv, ok)


# ---------------------------------------------------------------------------
# The fiber identity (kernel transversal form)


@dataclass(frozen=True)
class FiberIdentityReport:
    lhs: dict
    rhs: dict
    equal: bool
    multiplicity: int


def lemma411_check(bk, p, f, xi: XiClass) -> FiberIdentityReport:
    """Both sides of the fiber identity for a class of exact order f.

    Left side: the full Y_p fiber over Y_p(xi) at level f.  Right side: the
    kernel ker(G_f -> G_{f/p}) applied to xi, plus, when p divides f exactly
    once, the extra term phi^{-1} Y_p xi with phi the class of p at level
    f/p^n.
    """
    if xi.order != f:
        raise OrderMismatch("class must have exact order f")
    if not bk.divides(p, f):
        raise OrderMismatch("p must divide f")
    n = 0
    rest = f
    while bk.divides(p, rest):
        rest = bk.divide(rest, p)
        n += 1
    c = rest

    image = y_map(bk, p, xi)
    lhs: dict = {}
    for eta in arith.y_fiber(bk, p, image, f):
        lhs[eta] = lhs.get(eta, 0) + 1

    rhs: dict = {}
    part = level_partition(bk, f)
    for residue in sorted(part.kernels[p], key=bk.residue_key):
        sigma = GfElement(bk.key, f, residue)
        eta = g_action(bk, sigma, xi)
        rhs[eta] = rhs.get(eta, 0) + 1
    if n == 1:
        if bk.norm(c) == 1:
            extra = image
        else:
            phi = bk.residue_of(p, c)
            phi_inv = bk.residue_inverse(phi, c)
            extra = g_action(bk, GfElement(bk.key, c, phi_inv), image)
        rhs[extra] = rhs.get(extra, 0) + 1

    return FiberIdentityReport(lhs, rhs, lhs == rhs, n)


# ---------------------------------------------------------------------------
# Towers


@dataclass
class TowerLevel:
    exponent: int
    level: object
    u: UModule
    sign_invariants: tuple  # (even, odd) AbGroupInvariants


@dataclass
class TowerReport:
    levels: list
    transitions: list       # U(f^k) -> U(f^{k+1}) in the depth-zero bases
    stabilized: bool
    exception_flagged: bool
    squarefree: bool


def u_tower(bk, f, n_levels: int, nu: dict | None = None) -> TowerReport:
    """U(f), U(f^2), ..., with transition maps and sign-homology per level.

    The archimedean levels with f exactly divisible by 2 are exempt from the
    stabilization expectation and flagged instead.
    """
    from .signh import tate_pair  # late import: signh builds on this module

    if n_levels < 1:
        raise ValueError("need at least one level")
    squarefree = all(e == 1 for _, e in bk.factor(f))
    exception = (
        bk.kind == "archimedean" and f % 2 == 0 and (f // 2) % 2 == 1
    )
    levels = []
    afs = []
    for k in range(1, n_levels + 1):
        fk = bk.power(f, k)
        af = build_af(bk, fk, nu)
        u = u_module(af)
        even, odd = tate_pair(u.operators["gamma0"], bk.sign_order)
        levels.append(TowerLevel(k, fk, u, (even, odd)))
        afs.append(af)
    transitions = []
    for k in range(len(levels) - 1):
        small, big = afs[k], afs[k + 1]
        incl_cols = []
        for xi in small.basis:
            col = [0] * big.rank
            col[big.index[xi]] = 1
            incl_cols.append(col)
        incl = IntMatrix.from_columns(incl_cols, rows=big.rank)
        transitions.append(levels[k + 1].u.projection * incl * levels[k].u.section)
    first = levels[0].sign_invariants
    stabilized = all(lv.sign_invariants == first for lv in levels)
    return TowerReport(levels, transitions, stabilized, exception, squarefree)
