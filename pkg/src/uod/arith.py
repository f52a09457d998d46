"""Arithmetic backends and the torsion-class combinatorics built on them.

Two backends are supported, both with narrow class number one:

* archimedean: ring Z inside R, positive = positive, two roots of unity;
* function field: F_q[T] inside F_q((1/T)), positive = monic, q - 1 roots
  of unity (F_q is table-driven, so prime powers work).

Because every homothety class of lattices is trivial here, a homothety class
of f-torsion lattice translates is just an element of f^{-1}A/A, stored in
lowest terms as (order, numerator); the ray-class group at level f is
(A/f)^x acting by numerator multiplication; and the sign generator acts by
the inverse of a fixed generator of the roots of unity.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import gcd


class NotDivisible(ValueError):
    pass


class LevelMismatch(ValueError):
    pass


class ParseError(ValueError):
    pass


# ---------------------------------------------------------------------------
# F_q arithmetic tables


def _prime_power(q: int):
    if q < 2:
        raise ValueError(f"{q} is not a prime power")
    for p in range(2, q + 1):
        if q % p == 0:
            d = 0
            n = q
            while n % p == 0:
                n //= p
                d += 1
            if n != 1:
                raise ValueError(f"{q} is not a prime power")
            return p, d
    raise ValueError(f"{q} is not a prime power")


def _poly_mod_p(coeffs, p):
    coeffs = [c % p for c in coeffs]
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return coeffs


def _poly_divmod_p(a, b, p):
    a = list(a)
    out = [0] * max(len(a) - len(b) + 1, 0)
    inv_lead = pow(b[-1], -1, p)
    while len(a) >= len(b) and a:
        q = (a[-1] * inv_lead) % p
        shift = len(a) - len(b)
        out[shift] = q
        for i, c in enumerate(b):
            a[shift + i] = (a[shift + i] - q * c) % p
        a = _poly_mod_p(a, p)
        if not a:
            break
    return out, a


def _least_irreducible(p: int, d: int):
    """Monic irreducible of degree d over F_p with the smallest digit code."""
    for code in range(p**d):
        coeffs = [(code // p**i) % p for i in range(d)] + [1]
        if _is_irreducible_p(coeffs, p):
            return coeffs
    raise RuntimeError("no irreducible found")


def _is_irreducible_p(coeffs, p):
    d = len(coeffs) - 1
    if d == 1:
        return True
    for tcode in range(1, p ** ((d // 2) + 1)):
        tdeg = 0
        n = tcode
        while n >= p:
            n //= p
            tdeg += 1
        if tdeg == 0:
            continue
        trial = [(tcode // p**i) % p for i in range(tdeg)] + [1]
        if len(trial) - 1 > d // 2:
            break
        _, rem = _poly_divmod_p(coeffs, trial, p)
        if not rem:
            return False
    return True


class FqTable:
    """The field with q elements, elements encoded as integers 0..q-1.

    For q = p^d with d > 1 the code is the base-p digit vector of the
    residue modulo the lexicographically least monic irreducible of degree d.
    """

    def __init__(self, q: int):
        self.q = q
        self.p, self.deg = _prime_power(q)
        p, d = self.p, self.deg
        if d == 1:
            self.modulus = None
        else:
            self.modulus = _least_irreducible(p, d)
        self.add_table = [[self._add_raw(a, b) for b in range(q)] for a in range(q)]
        self.mul_table = [[self._mul_raw(a, b) for b in range(q)] for a in range(q)]
        self.neg_table = [self._sub_codes(0, a) for a in range(q)]
        self.inv_table = [None] * q
        for a in range(1, q):
            for b in range(1, q):
                if self.mul_table[a][b] == 1:
                    self.inv_table[a] = b
                    break
        self.generator = self._least_generator()

    def _digits(self, code):
        return [(code // self.p**i) % self.p for i in range(self.deg)]

    def _code(self, digits):
        return sum(d * self.p**i for i, d in enumerate(digits))

    def _add_raw(self, a, b):
        return self._code([(x + y) % self.p for x, y in zip(self._digits(a), self._digits(b))])

    def _sub_codes(self, a, b):
        return self._code([(x - y) % self.p for x, y in zip(self._digits(a), self._digits(b))])

    def _mul_raw(self, a, b):
        if self.deg == 1:
            return (a * b) % self.p
        da, db = self._digits(a), self._digits(b)
        prod = [0] * (2 * self.deg - 1)
        for i, x in enumerate(da):
            if x:
                for j, y in enumerate(db):
                    prod[i + j] = (prod[i + j] + x * y) % self.p
        _, rem = _poly_divmod_p(_poly_mod_p(prod, self.p), self.modulus, self.p)
        rem = rem + [0] * (self.deg - len(rem))
        return self._code(rem)

    def _least_generator(self):
        target = self.q - 1
        for g in range(1, self.q):
            x, order = g, 1
            while x != 1:
                x = self.mul_table[x][g]
                order += 1
            if order == target:
                return g
        return 1  # q = 2

    def add(self, a, b):
        return self.add_table[a][b]

    def mul(self, a, b):
        return self.mul_table[a][b]

    def neg(self, a):
        return self.neg_table[a]

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of 0 in F_q")
        return self.inv_table[a]


@lru_cache(maxsize=None)
def fq_table(q: int) -> FqTable:
    return FqTable(q)


# ---------------------------------------------------------------------------
# Polynomials over F_q: tuples of codes, low degree first, no trailing zeros


def poly_trim(coeffs):
    coeffs = list(coeffs)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


def poly_deg(a):
    return len(a) - 1  # deg(0) = -1


def poly_add(fq, a, b):
    n = max(len(a), len(b))
    a = list(a) + [0] * (n - len(a))
    b = list(b) + [0] * (n - len(b))
    return poly_trim(fq.add(x, y) for x, y in zip(a, b))


def poly_neg(fq, a):
    return tuple(fq.neg(x) for x in a)


def poly_sub(fq, a, b):
    return poly_add(fq, a, poly_neg(fq, b))


def poly_mul(fq, a, b):
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] = fq.add(out[i + j], fq.mul(x, y))
    return poly_trim(out)


def poly_scale(fq, c, a):
    return poly_trim(fq.mul(c, x) for x in a)


def poly_divmod(fq, a, b):
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = list(a)
    inv_lead = fq.inv(b[-1])
    out = [0] * max(len(a) - len(b) + 1, 0)
    while len(a) >= len(b):
        q = fq.mul(a[-1], inv_lead)
        shift = len(a) - len(b)
        if q:
            out[shift] = q
            for i, c in enumerate(b):
                a[shift + i] = fq.add(a[shift + i], fq.neg(fq.mul(q, c)))
        while a and a[-1] == 0:
            a.pop()
        if len(a) - 1 < len(b) - 1:
            break
    return poly_trim(out), poly_trim(a)


def poly_gcd(fq, a, b):
    while b:
        a, b = b, poly_divmod(fq, a, b)[1]
    return poly_monic(fq, a)


def poly_monic(fq, a):
    if not a:
        return a
    return poly_scale(fq, fq.inv(a[-1]), a)


# ---------------------------------------------------------------------------
# Backends


class ArchimedeanBackend:
    """Basic data (R, Z, x -> x/|x|): ideals are positive integers."""

    kind = "archimedean"
    q = None

    def __init__(self):
        self._factor_cache = {}

    @property
    def key(self):
        return ("archimedean",)

    one = 1
    sign_order = 2
    sign_label = "-1"

    def norm(self, f: int) -> int:
        return f

    def residues(self, f: int):
        return range(f)

    def residue_of(self, a: int, f: int) -> int:
        return a % f

    def residue_mul(self, a, b, f):
        return (a * b) % f

    def residue_neg(self, a, f):
        return (-a) % f

    def residue_key(self, a):
        return a

    def coprime(self, a, f) -> bool:
        return gcd(a, f) == 1

    def residue_inverse(self, a, f):
        return pow(a, -1, f) if f > 1 else 0

    def mul(self, f, g):
        return f * g

    def power(self, f, n):
        return f**n

    def divide(self, f, g):
        if f % g:
            raise NotDivisible(f"{g} does not divide {f}")
        return f // g

    def divides(self, g, f) -> bool:
        return f % g == 0

    def gcd(self, f, g):
        return gcd(f, g)

    def factor(self, f):
        if f in self._factor_cache:
            return self._factor_cache[f]
        out = []
        n = f
        p = 2
        while p * p <= n:
            if n % p == 0:
                e = 0
                while n % p == 0:
                    n //= p
                    e += 1
                out.append((p, e))
            p += 1
        if n > 1:
            out.append((n, 1))
        self._factor_cache[f] = out
        return out

    def radical(self, f):
        r = 1
        for p, _ in self.factor(f):
            r *= p
        return r

    def divisors(self, f):
        divs = [1]
        for p, e in self.factor(f):
            divs = [d * p**i for d in divs for i in range(e + 1)]
        return sorted(divs)

    def ideal_key(self, f):
        return f

    def format_ideal(self, f) -> str:
        return str(f)

    def parse_ideal(self, text: str):
        try:
            f = int(text.strip())
        except ValueError as exc:
            raise ParseError(f"not an integer ideal: {text!r}") from exc
        if f < 1:
            raise ParseError("integer ideals are positive")
        return f

    def format_residue(self, a) -> str:
        return str(a)

    @property
    def sign_scalar(self):
        """Numerator multiplier of the sign generator: (sgn gamma_0)^{-1}."""
        return -1

    def scalar_mul(self, scalar, a, f):
        return (scalar * a) % f if f > 1 else 0


class FunctionFieldBackend:
    """Basic data (F_q((1/T)), F_q[T], leading coefficient)."""

    kind = "function_field"

    def __init__(self, q: int):
        self.q = q
        self.fq = fq_table(q)
        self.one = (1,)
        self.sign_order = q - 1
        self._factor_cache = {}

    @property
    def key(self):
        return ("function_field", self.q)

    @property
    def sign_label(self) -> str:
        return str(self.fq.generator)

    def norm(self, f) -> int:
        return self.q ** poly_deg(f)

    def residues(self, f):
        d = poly_deg(f)
        return [self._decode(i, d) for i in range(self.q**d)]

    def _decode(self, index, d):
        return poly_trim((index // self.q**i) % self.q for i in range(d))

    def residue_of(self, a, f):
        return poly_divmod(self.fq, a, f)[1]

    def residue_mul(self, a, b, f):
        return self.residue_of(poly_mul(self.fq, a, b), f)

    def residue_neg(self, a, f):
        return poly_neg(self.fq, a)

    def residue_key(self, a):
        return sum(c * self.q**i for i, c in enumerate(a))

    def coprime(self, a, f) -> bool:
        return self._gcd_raw(a, f) == self.one

    def residue_inverse(self, a, f):
        if poly_deg(f) < 1:
            return ()
        # extended Euclid over F_q[T]
        r0, r1 = f, a
        s0, s1 = (), (1,)
        while r1:
            qp, rem = poly_divmod(self.fq, r0, r1)
            r0, r1 = r1, rem
            s0, s1 = s1, poly_sub(self.fq, s0, poly_mul(self.fq, qp, s1))
        if poly_deg(r0) != 0:
            raise ZeroDivisionError("residue not invertible")
        return self.residue_of(poly_scale(self.fq, self.fq.inv(r0[0]), s0), f)

    def mul(self, f, g):
        return poly_mul(self.fq, f, g)

    def power(self, f, n):
        out = self.one
        for _ in range(n):
            out = poly_mul(self.fq, out, f)
        return out

    def divide(self, f, g):
        q, r = poly_divmod(self.fq, f, g)
        if r:
            raise NotDivisible(
                f"{self.format_ideal(g)} does not divide {self.format_ideal(f)}"
            )
        return q

    def divides(self, g, f) -> bool:
        return not poly_divmod(self.fq, f, g)[1]

    def gcd(self, f, g):
        return self._gcd_raw(f, g)

    def _gcd_raw(self, a, b):
        while b:
            a, b = b, poly_divmod(self.fq, a, b)[1]
        return poly_monic(self.fq, a)

    def factor(self, f):
        """Monic irreducible factors with multiplicities, by trial division."""
        if f in self._factor_cache:
            return self._factor_cache[f]
        out = []
        rest = poly_monic(self.fq, f)
        while poly_deg(rest) >= 1:
            found = None
            limit_deg = poly_deg(rest) // 2
            c = self.q
            while True:
                trial = self._decode_monic(c)
                if poly_deg(trial) > limit_deg:
                    break
                if self.divides(trial, rest):
                    found = trial
                    break
                c += 1
            if found is None:
                found = rest
            e = 0
            while self.divides(found, rest):
                rest = self.divide(rest, found)
                e += 1
            out.append((found, e))
        out.sort(key=lambda pe: self.ideal_key(pe[0]))
        self._factor_cache[f] = out
        return out

    def _decode_monic(self, code):
        # code >= 1 enumerates all monic polynomials: degree d block covers
        # codes q^d .. q^{d+1}-1 via digits below the leading 1
        d = 0
        n = code
        while n >= self.q:
            n //= self.q
            d += 1
        return poly_trim([(code // self.q**i) % self.q for i in range(d)] + [1])

    def radical(self, f):
        r = self.one
        for p, _ in self.factor(f):
            r = poly_mul(self.fq, r, p)
        return r

    def divisors(self, f):
        divs = [self.one]
        for p, e in self.factor(f):
            divs = [poly_mul(self.fq, d, self.power(p, i)) for d in divs for i in range(e + 1)]
        return sorted(divs, key=self.ideal_key)

    def ideal_key(self, f):
        return (poly_deg(f), self.residue_key(f))

    def format_ideal(self, f) -> str:
        return self.format_residue(f) if f else "0"

    def format_residue(self, a) -> str:
        if not a:
            return "0"
        parts = []
        for i in range(len(a) - 1, -1, -1):
            c = a[i]
            if not c:
                continue
            if i == 0:
                parts.append(self._coeff_str(c))
            else:
                tpow = "T" if i == 1 else f"T^{i}"
                parts.append(tpow if c == 1 else f"{self._coeff_str(c)}*{tpow}")
        return " + ".join(parts)

    def _coeff_str(self, c) -> str:
        if c < self.fq.p:
            return str(c)
        return f"[{c}]"  # extension-field element, shown by its code

    def parse_ideal(self, text: str):
        poly = parse_polynomial(text, self.q)
        if not poly:
            raise ParseError("the zero polynomial is not an ideal")
        if poly[-1] != 1:
            raise ParseError(f"ideals are monic; got {self.format_ideal(poly)}")
        return poly

    @property
    def sign_scalar(self):
        """Constant (sgn gamma_0)^{-1}; generates F_q^x."""
        return self.fq.inv(self.fq.generator) if self.q > 2 else 1

    def scalar_mul(self, scalar, a, f):
        return self.residue_of(poly_scale(self.fq, scalar, a), f)


def backend(kind: str, q: int | None = None):
    if kind in ("archimedean", "q"):
        return ArchimedeanBackend()
    if kind in ("function_field", "fq"):
        if q is None:
            raise ValueError("function field backend needs q")
        return FunctionFieldBackend(q)
    raise ValueError(f"unknown backend kind {kind!r}")


# ---------------------------------------------------------------------------
# Polynomial expression parser ("T^2+2*T+1", "T*(T+1)", ...)


def parse_polynomial(text: str, q: int):
    fq = fq_table(q)
    tokens = _tokenize(text)
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else None

    def take():
        nonlocal pos
        if pos >= len(tokens):
            raise ParseError(f"unexpected end of polynomial: {text!r}")
        tok = tokens[pos]
        pos += 1
        return tok

    def parse_expr():
        node = parse_term()
        while peek() in ("+", "-"):
            op = take()
            rhs = parse_term()
            node = poly_add(fq, node, rhs if op == "+" else poly_neg(fq, rhs))
        return node

    def parse_term():
        node = parse_factor()
        while peek() == "*" or peek() in ("T", "(") or isinstance(peek(), int):
            if peek() == "*":
                take()
            node = poly_mul(fq, node, parse_factor())
        return node

    def parse_factor():
        node = parse_atom()
        if peek() == "^":
            take()
            exp = take()
            if not isinstance(exp, int) or exp < 0:
                raise ParseError("exponent must be a nonnegative integer")
            out = (1,)
            for _ in range(exp):
                out = poly_mul(fq, out, node)
            return out
        return node

    def parse_atom():
        tok = take() if peek() is not None else None
        if tok == "(":
            node = parse_expr()
            if peek() != ")":
                raise ParseError("unbalanced parentheses")
            take()
            return node
        if tok == "T":
            return (0, 1)
        if tok == "-":
            return poly_neg(fq, parse_atom())
        if isinstance(tok, int):
            return poly_trim([tok % fq.p])
        raise ParseError(f"unexpected token {tok!r} in polynomial")

    result = parse_expr()
    if pos != len(tokens):
        raise ParseError(f"trailing input in polynomial: {text!r}")
    return result


def _tokenize(text: str):
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "+-*^()":
            tokens.append(ch)
            i += 1
        elif ch in ("T", "t"):
            tokens.append("T")
            i += 1
        elif ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            tokens.append(int(text[i:j]))
            i = j
        else:
            raise ParseError(f"bad character {ch!r} in polynomial")
    if not tokens:
        raise ParseError("empty polynomial")
    return tokens


# ---------------------------------------------------------------------------
# Torsion classes and groups


@dataclass(frozen=True)
class XiClass:
    """Homothety class of a torsion lattice translate, in lowest terms.

    Represents [num/order + A]; the numerator is a canonical residue modulo
    the order and is coprime to it (order one means the zero class).
    """

    backend_key: tuple
    order: object
    num: object

    def __repr__(self):
        return f"Xi({self.num}/{self.order})"


def xi_from_fraction(bk, a, f) -> XiClass:
    """Canonical class of [a/f + A]."""
    a = bk.residue_of(a, f)
    if bk.kind == "archimedean":
        if f == 1:
            return XiClass(bk.key, 1, 0)
        d = gcd(a, f)
        order = f // d
        num = (a // d) % order if order > 1 else 0
        return XiClass(bk.key, order, num)
    d = bk.gcd(a if a else f, f)
    order = bk.divide(f, d)
    if poly_deg(order) < 1:
        return XiClass(bk.key, bk.one, ())
    num = bk.residue_of(bk.divide(a, d) if a else (), order)
    return XiClass(bk.key, order, num)


def xi_zero(bk) -> XiClass:
    return XiClass(bk.key, bk.one, 0 if bk.kind == "archimedean" else ())


def xi_sort_key(bk, xi: XiClass):
    return (bk.ideal_key(xi.order), bk.residue_key(xi.num))


def xi_classes(bk, f) -> list[XiClass]:
    """All homothety classes of f-torsion translates (|A/f| of them)."""
    out = [xi_from_fraction(bk, a, f) for a in bk.residues(f)]
    out.sort(key=lambda xi: xi_sort_key(bk, xi))
    return out


def xi_in_level(bk, xi: XiClass, f) -> bool:
    return bk.divides(xi.order, f)


def y_map(bk, g, xi: XiClass) -> XiClass:
    """[x + W] -> [x + g^{-1} W]: numerator multiplication by g."""
    if xi.order == bk.one:
        return xi
    lifted = bk.residue_of(bk.mul(g, xi.num) if bk.kind != "archimedean" else g * xi.num, xi.order)
    return xi_from_fraction(bk, lifted, xi.order)


def y_fiber(bk, g, xi: XiClass, within_level) -> list[XiClass]:
    """All classes at the given level mapping to xi under Y_g."""
    if not bk.divides(g, within_level):
        raise LevelMismatch("g must divide the ambient level")
    if not xi_in_level(bk, xi, bk.divide(within_level, g)):
        raise LevelMismatch("xi must be torsion at level within_level/g")
    fibers = fiber_map(bk, g, within_level)
    return fibers.get(xi, [])


def fiber_map(bk, g, level) -> dict:
    """Y_g fibers over all of Xi(level/g), computed in one pass."""
    out: dict = {}
    for eta in xi_classes(bk, level):
        image = y_map(bk, g, eta)
        out.setdefault(image, []).append(eta)
    return out


@dataclass(frozen=True)
class GfElement:
    """Element of the level-f ray class group, as a unit residue mod f."""

    backend_key: tuple
    level: object
    residue: object

    def __repr__(self):
        return f"Gf({self.residue} mod {self.level})"


class GfGroup:
    """(A/f)^x with its action bookkeeping; trivial class group makes this G_f."""

    def __init__(self, bk, f):
        self.backend = bk
        self.level = f
        units = [a for a in bk.residues(f) if bk.coprime(a, f)]
        units.sort(key=bk.residue_key)
        self.elements = tuple(GfElement(bk.key, f, u) for u in units)
        self._index = {e.residue: i for i, e in enumerate(self.elements)}

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    @property
    def identity(self) -> GfElement:
        one = 1 % self.backend.norm(self.level) if self.backend.kind == "archimedean" else (
            self.backend.residue_of(self.backend.one, self.level)
        )
        return GfElement(self.backend.key, self.level, one)

    def element(self, residue) -> GfElement:
        residue = self.backend.residue_of(residue, self.level)
        if residue not in self._index:
            raise LevelMismatch(f"{residue} is not a unit mod {self.level}")
        return GfElement(self.backend.key, self.level, residue)

    def mul(self, x: GfElement, y: GfElement) -> GfElement:
        res = self.backend.residue_mul(x.residue, y.residue, self.level)
        return GfElement(self.backend.key, self.level, res)

    def inv(self, x: GfElement) -> GfElement:
        res = self.backend.residue_inverse(x.residue, self.level)
        return GfElement(self.backend.key, self.level, res)

    def power(self, x: GfElement, n: int) -> GfElement:
        if n < 0:
            x = self.inv(x)
            n = -n
        out = self.identity
        for _ in range(n):
            out = self.mul(out, x)
        return out

    def element_order(self, x: GfElement) -> int:
        out = x
        n = 1
        while out != self.identity:
            out = self.mul(out, x)
            n += 1
        return n

    def generators(self) -> list[GfElement]:
        """A deterministic generating set, grown greedily in residue order."""
        gens: list[GfElement] = []
        have = {self.identity.residue}
        for e in self.elements:
            if e.residue in have:
                continue
            gens.append(e)
            have = self._closure(gens)
            if len(have) == len(self.elements):
                break
        return gens

    def _closure(self, gens):
        have = {self.identity.residue}
        frontier = [self.identity.residue]
        while frontier:
            fresh = []
            for a in frontier:
                for g in gens:
                    c = self.backend.residue_mul(a, g.residue, self.level)
                    if c not in have:
                        have.add(c)
                        fresh.append(c)
            frontier = fresh
        return have

    def reduce_to(self, x: GfElement, g) -> GfElement:
        """Image under the natural surjection G_f -> G_g for g | f."""
        if not self.backend.divides(g, self.level):
            raise LevelMismatch("target level must divide the source level")
        return GfElement(self.backend.key, g, self.backend.residue_of(x.residue, g))


_group_cache: dict = {}


def gf_group(bk, f) -> GfGroup:
    """Level group, cached: the instances are read-only after construction."""
    key = (bk.key, bk.ideal_key(f))
    if key not in _group_cache:
        _group_cache[key] = GfGroup(bk, f)
    return _group_cache[key]


def g_action(bk, sigma: GfElement, xi: XiClass) -> XiClass:
    """Action of the ray class group on classes: numerator multiplication."""
    if not bk.divides(xi.order, sigma.level):
        raise LevelMismatch("sigma's level must be divisible by the class order")
    if xi.order == bk.one:
        return xi
    t = bk.residue_of(sigma.residue, xi.order)
    num = bk.residue_mul(xi.num, t, xi.order)
    return XiClass(bk.key, xi.order, num)


@dataclass(frozen=True)
class SignGroup:
    """The cyclic sign group at a level: order m and the acting residue.

    ``gamma`` is the image of the chosen generator in the level-f group; it
    acts on classes by numerator multiplication with (sgn gamma_0)^{-1},
    which is -1 archimedean and the inverse of the chosen generator of
    F_q^x in the function field case.
    """

    backend_key: tuple
    level: object
    order: int
    gamma: GfElement
    sgn_value: str


def sign_group(bk, f) -> SignGroup:
    scalar = bk.sign_scalar
    if bk.kind == "archimedean":
        residue = scalar % f if f > 1 else 0
    else:
        residue = bk.residue_of(poly_trim([scalar]), f)
    gamma = GfElement(bk.key, f, residue)
    return SignGroup(bk.key, f, bk.sign_order, gamma, bk.sign_label)


def sign_action(bk, xi: XiClass) -> XiClass:
    """The sign generator acting on a class."""
    if xi.order == bk.one:
        return xi
    num = bk.scalar_mul(bk.sign_scalar, xi.num, xi.order)
    return XiClass(bk.key, xi.order, num)


def ideal_arithmetic(bk, op: str, *inputs):
    """Dispatcher matching the ideal-arithmetic contract."""
    if op == "multiply":
        out = inputs[0]
        for f in inputs[1:]:
            out = bk.mul(out, f)
        return out
    if op == "divide":
        return bk.divide(*inputs)
    if op == "gcd":
        out = inputs[0]
        for f in inputs[1:]:
            out = bk.gcd(out, f)
        return out
    if op == "radical":
        return bk.radical(inputs[0])
    if op == "factor":
        return bk.factor(inputs[0])
    raise ValueError(f"unknown ideal operation {op!r}")
