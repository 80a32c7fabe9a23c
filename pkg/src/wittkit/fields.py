"""Field towers, monomial elements, square classes, valuations and places.

The computational universe is a FieldTower: a base field that is one of

* ``Q``      the rationals,
* ``F<p>``   a prime field of odd characteristic,
* ``Q(s)``   the rational function field in one variable over Q,

under finitely many iterated Laurent-series steps ``[[t1]][[t2]]...``.
Elements at the Laurent layers are monomials ``c * t1^e1 * ... * tn^en``
with a nonzero base-field coefficient.  Over a henselian valued field of
residue characteristic different from 2 every 1-unit is a square, so the
monomial classes exhaust the square classes; that is why the element model
never needs honest series.

Square classes are held in a canonical form that makes equality testing,
products and GF(2) rank computations trivial:

* over ``Q``      a signed squarefree integer,
* over ``F_p``    1 or the least positive quadratic non-residue,
* over ``Q(s)``   a signed squarefree integer times a product of distinct
                  irreducible primitive integer polynomials with positive
                  leading coefficient,

with every Laurent exponent reduced mod 2.
"""

from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    BadDiscriminant,
    DegenerateExtension,
    FieldMismatch,
    ParseError,
    UnsupportedField,
    ZeroElement,
)
from .numutil import (
    factorint,
    is_prime,
    is_square_fraction,
    least_nonresidue,
    legendre,
    sqrt_fraction,
    squarefree_of_fraction,
)


# ---------------------------------------------------------------------------
# base fields and towers


@dataclass(frozen=True)
class Rationals:
    def __str__(self):
        return "Q"


@dataclass(frozen=True)
class PrimeField:
    p: int

    def __post_init__(self):
        if self.p == 2 or not is_prime(self.p):
            raise UnsupportedField("base must be F_p with p an odd prime, got %r" % (self.p,))

    def __str__(self):
        return "F%d" % self.p


@dataclass(frozen=True)
class RationalFunction:
    var: str = "s"

    def __post_init__(self):
        if not self.var.isidentifier():
            raise UnsupportedField("bad function-field variable %r" % (self.var,))

    def __str__(self):
        return "Q(%s)" % self.var


@dataclass(frozen=True)
class FieldTower:
    """A base field under an ordered tuple of Laurent-series variables."""

    base: object
    steps: tuple = ()

    def __post_init__(self):
        if not isinstance(self.base, (Rationals, PrimeField, RationalFunction)):
            raise UnsupportedField("unsupported base field %r" % (self.base,))
        object.__setattr__(self, "steps", tuple(self.steps))
        names = list(self.steps)
        if len(set(names)) != len(names):
            raise UnsupportedField("duplicate Laurent variable names")
        for name in names:
            if not name.isidentifier():
                raise UnsupportedField("bad Laurent variable name %r" % (name,))
            if isinstance(self.base, RationalFunction) and name == self.base.var:
                raise UnsupportedField("Laurent variable clashes with base variable")

    @property
    def n_steps(self):
        return len(self.steps)

    def base_only(self):
        return FieldTower(self.base)

    def drop_top(self):
        if not self.steps:
            raise UnsupportedField("no Laurent step to drop")
        return FieldTower(self.base, self.steps[:-1])

    def __str__(self):
        return str(self.base) + "".join("[[%s]]" % t for t in self.steps)


QQ = FieldTower(Rationals())


def rationals_tower(*steps):
    return FieldTower(Rationals(), steps)


# ---------------------------------------------------------------------------
# Q(s) coefficient canonical form


@dataclass(frozen=True)
class CoeffQs:
    """Canonical square-class representative over Q(s): a signed squarefree
    integer times distinct irreducible primitive integer polynomials (stored
    as ascending coefficient tuples, positive leading coefficient)."""

    unit: int
    polys: tuple = ()

    def value_at(self, c):
        """Evaluate the representative at a rational point."""
        out = Fraction(self.unit)
        for poly in self.polys:
            out *= poly_eval(poly, c)
        return out

    def is_one(self):
        return self.unit == 1 and not self.polys

    def times(self, other):
        unit = squarefree_of_fraction(Fraction(self.unit) * other.unit)
        mine = set(self.polys)
        polys = tuple(sorted(mine.symmetric_difference(other.polys), key=_poly_key))
        return CoeffQs(unit, polys)

    def __str__(self):
        parts = [] if self.unit == 1 and self.polys else [str(self.unit)]
        parts += ["(%s)" % poly_str(p) for p in self.polys]
        return "*".join(parts) or "1"


def _poly_key(poly):
    return (len(poly), poly)


def poly_eval(poly, c):
    out = Fraction(0)
    for k, a in enumerate(poly):
        out += a * Fraction(c) ** k
    return out


def poly_deg(poly):
    return len(poly) - 1


def poly_str(poly, var="s"):
    terms = []
    for k in range(len(poly) - 1, -1, -1):
        a = poly[k]
        if a == 0:
            continue
        if k == 0:
            terms.append(str(a))
        else:
            head = "" if a == 1 else ("-" if a == -1 else str(a) + "*")
            terms.append("%s%s" % (head, var if k == 1 else "%s^%d" % (var, k)))
    out = "+".join(terms) if terms else "0"
    return out.replace("+-", "-")


def _canon_qs_coeff(value, var):
    """Canonical CoeffQs for an arbitrary exact Q(s) value (sympy expression,
    Fraction, int, or an already-canonical CoeffQs)."""
    if isinstance(value, CoeffQs):
        return value
    if isinstance(value, (int, Fraction)):
        if value == 0:
            raise ZeroElement("zero has no square class")
        return CoeffQs(squarefree_of_fraction(Fraction(value)))
    import sympy

    s = sympy.Symbol(var)
    expr = sympy.cancel(sympy.sympify(value))
    if expr == 0:
        raise ZeroElement("zero has no square class")
    num, den = sympy.fraction(sympy.together(expr))
    work = sympy.expand(num * den)
    if work.is_number:
        return CoeffQs(squarefree_of_fraction(Fraction(work.p, work.q)))
    poly = sympy.Poly(work, s, domain="QQ")
    const, factors = poly.factor_list()
    unit = Fraction(const.p, const.q)
    polys = []
    for fac, mult in factors:
        if mult % 2 == 0:
            continue
        content, prim = fac.primitive()
        unit *= Fraction(content.p, content.q)
        coeffs = [int(c) for c in prim.all_coeffs()][::-1]
        if coeffs[-1] < 0:
            coeffs = [-c for c in coeffs]
            unit *= -1
        polys.append(tuple(coeffs))
    return CoeffQs(squarefree_of_fraction(unit), tuple(sorted(polys, key=_poly_key)))


def qs_value(expr_or_poly, var="s"):
    """Convenience: build an exact Q(s) value from a coefficient tuple
    (ascending degree) or pass a sympy expression through."""
    if isinstance(expr_or_poly, (tuple, list)):
        import sympy

        s = sympy.Symbol(var)
        return sum(sympy.Integer(1) * a * s**k for k, a in enumerate(expr_or_poly))
    return expr_or_poly


# ---------------------------------------------------------------------------
# elements and square classes


@dataclass(frozen=True)
class MonomialElement:
    """c * t1^e1 * ... * tn^en with a nonzero base-field coefficient c."""

    field: FieldTower
    coeff: object
    exps: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "exps", tuple(int(e) for e in self.exps))
        if len(self.exps) != self.field.n_steps:
            raise FieldMismatch(
                "exponent vector length %d does not match tower with %d steps"
                % (len(self.exps), self.field.n_steps)
            )
        base = self.field.base
        c = self.coeff
        if isinstance(base, Rationals):
            c = Fraction(c)
            if c == 0:
                raise ZeroElement("zero coefficient")
        elif isinstance(base, PrimeField):
            c = _fp_value(c, base.p)
            if c == 0:
                raise ZeroElement("zero coefficient")
        else:
            if isinstance(c, (int, Fraction)):
                c = Fraction(c)
                if c == 0:
                    raise ZeroElement("zero coefficient")
        object.__setattr__(self, "coeff", c)

    def times(self, other):
        if other.field != self.field:
            raise FieldMismatch("elements live in different towers")
        base = self.field.base
        if isinstance(base, Rationals):
            c = self.coeff * other.coeff
        elif isinstance(base, PrimeField):
            c = self.coeff * other.coeff % base.p
        else:
            if isinstance(self.coeff, Fraction) and isinstance(other.coeff, Fraction):
                c = self.coeff * other.coeff
            else:
                import sympy

                c = sympy.cancel(sympy.sympify(self.coeff) * sympy.sympify(other.coeff))
        exps = tuple(a + b for a, b in zip(self.exps, other.exps))
        return MonomialElement(self.field, c, exps)

    def neg(self):
        base = self.field.base
        if isinstance(base, PrimeField):
            return MonomialElement(self.field, (-self.coeff) % base.p, self.exps)
        return MonomialElement(self.field, -self.coeff, self.exps)

    def __str__(self):
        cs = str(self.coeff)
        if any(ch in cs for ch in "+- ") and not cs.lstrip("-").isdigit():
            cs = "(%s)" % cs.replace(" ", "")
        parts = [cs]
        for name, e in zip(self.field.steps, self.exps):
            if e == 0:
                continue
            parts.append(name if e == 1 else "%s^%d" % (name, e))
        return "*".join(parts)


def _fp_value(c, p):
    if isinstance(c, Fraction):
        num, den = c.numerator, c.denominator
        if den % p == 0:
            raise ZeroElement("denominator divisible by the characteristic")
        return num % p * pow(den % p, -1, p) % p
    return int(c) % p


@dataclass(frozen=True)
class SquareClass:
    """Canonical square-class representative in a field tower."""

    field: FieldTower
    coeff: object
    exps: tuple = ()

    def __post_init__(self):
        if any(e not in (0, 1) for e in self.exps):
            object.__setattr__(self, "exps", tuple(e % 2 for e in self.exps))

    def times(self, other):
        if other.field != self.field:
            raise FieldMismatch("classes live in different towers")
        base = self.field.base
        if isinstance(base, Rationals):
            c = squarefree_of_fraction(Fraction(self.coeff) * other.coeff)
        elif isinstance(base, PrimeField):
            c = _fp_class(self.coeff * other.coeff, base.p)
        else:
            c = self.coeff.times(other.coeff)
        exps = tuple((a + b) % 2 for a, b in zip(self.exps, other.exps))
        return SquareClass(self.field, c, exps)

    def inverse(self):
        # square classes form an elementary 2-group
        return self

    def neg(self):
        return self.times(minus_one_class(self.field))

    def is_one(self):
        if any(self.exps):
            return False
        base = self.field.base
        if isinstance(base, RationalFunction):
            return self.coeff.is_one()
        return self.coeff == 1

    def is_minus_one(self):
        return self.neg().is_one()

    def base_class(self):
        """The same coefficient class viewed in the base-only tower."""
        return SquareClass(self.field.base_only(), self.coeff, ())

    def __str__(self):
        parts = []
        sign = ""
        cs = str(self.coeff)
        if cs == "-1" and any(self.exps):
            sign = "-"
        elif cs != "1" or not any(self.exps):
            parts.append(cs)
        for name, e in zip(self.field.steps, self.exps):
            if e:
                parts.append(name)
        return sign + "*".join(parts)


def _fp_class(c, p):
    c %= p
    if c == 0:
        raise ZeroElement("zero has no square class")
    return 1 if legendre(c, p) == 1 else least_nonresidue(p)


def canonical_square_class(x, field=None):
    """Canonical square-class representative of a nonzero element.

    ``x`` may be a MonomialElement, an already-canonical SquareClass, an
    element literal like ``"3*t1"``, or a bare base-field value (int,
    Fraction, sympy expression over Q(s)) when ``field`` is given.
    """
    if isinstance(x, SquareClass):
        return x
    if isinstance(x, str) and field is not None and not isinstance(field.base, RationalFunction):
        x = parse_element(x, field)
    if isinstance(x, MonomialElement):
        field = x.field
        coeff, exps = x.coeff, x.exps
    else:
        if field is None:
            raise FieldMismatch("a bare value needs an explicit field")
        coeff, exps = x, (0,) * field.n_steps
    base = field.base
    if isinstance(base, Rationals):
        if Fraction(coeff) == 0:
            raise ZeroElement("zero has no square class")
        c = squarefree_of_fraction(Fraction(coeff))
    elif isinstance(base, PrimeField):
        c = _fp_class(_fp_value(coeff, base.p), base.p)
    else:
        c = _canon_qs_coeff(coeff, base.var)
    return SquareClass(field, c, tuple(e % 2 for e in exps))


def is_square(x, field=None):
    return canonical_square_class(x, field).is_one()


def one_class(field):
    base = field.base
    if isinstance(base, RationalFunction):
        c = CoeffQs(1)
    else:
        c = 1
    return SquareClass(field, c, (0,) * field.n_steps)


def minus_one_class(field):
    base = field.base
    if isinstance(base, Rationals):
        c = -1
    elif isinstance(base, PrimeField):
        c = _fp_class(base.p - 1, base.p)
    else:
        c = CoeffQs(-1)
    return SquareClass(field, c, (0,) * field.n_steps)


# ---------------------------------------------------------------------------
# valuations


@dataclass(frozen=True)
class ValuationData:
    """Value vector (step order) of the composite valuation, plus the angular
    component: the square class of the coefficient in the residue field.

    The composite valuation peels the most recently adjoined variable first,
    so lexicographic comparisons weight the last coordinate heaviest.
    """

    value: tuple
    angular: SquareClass

    def lex_key(self):
        return tuple(reversed(self.value))

    def __lt__(self, other):
        return self.lex_key() < other.lex_key()

    def is_even(self):
        return all(e % 2 == 0 for e in self.value)


def valuation(x, field=None):
    """Composite valuation of a nonzero monomial element."""
    if isinstance(x, SquareClass):
        return ValuationData(x.exps, x.base_class())
    if not isinstance(x, MonomialElement):
        if field is None:
            raise FieldMismatch("a bare value needs an explicit field")
        x = MonomialElement(field, x, (0,) * field.n_steps)
    angular = canonical_square_class(x.coeff, x.field.base_only())
    return ValuationData(x.exps, angular)


# ---------------------------------------------------------------------------
# multiquadratic degree: 2 ** rank of classes in K*/K*^2


def _class_markers(c):
    """GF(2) coordinates of a square class over a fixed marker basis."""
    marks = set()
    for i, e in enumerate(c.exps):
        if e:
            marks.add(("t", i))
    base = c.field.base
    if isinstance(base, Rationals):
        n = c.coeff
        if n < 0:
            marks.add(("sign", 0))
        for p in factorint(n):
            marks.add(("p", p))
    elif isinstance(base, PrimeField):
        if c.coeff != 1:
            marks.add(("n", 0))
    else:
        if c.coeff.unit < 0:
            marks.add(("sign", 0))
        for p in factorint(c.coeff.unit):
            marks.add(("p", p))
        for poly in c.coeff.polys:
            marks.add(("q", poly))
    return marks


def gf2_rank(vectors):
    basis = {}
    rank = 0
    for vec in vectors:
        v = set(vec)
        while v:
            piv = max(v)
            if piv in basis:
                v ^= basis[piv]
            else:
                basis[piv] = v
                rank += 1
                break
    return rank


def multiquad_degree(elements, field):
    """Degree of K(sqrt(a1), ..., sqrt(ar)) over K, as 2 ** rank."""
    classes = [canonical_square_class(a, field) for a in elements]
    for c in classes:
        if c.field != field:
            raise FieldMismatch("class outside the given tower")
    return 2 ** gf2_rank(_class_markers(c) for c in classes)


# ---------------------------------------------------------------------------
# places


@dataclass(frozen=True)
class RealEmbedding:
    """A real place; ``signs`` fixes the sign of each adjoined square root
    for embeddings of quadratic towers (empty over Q itself)."""

    signs: tuple = ()

    def __str__(self):
        if not self.signs:
            return "real"
        return "real(%s)" % ",".join("+" if s > 0 else "-" for s in self.signs)


@dataclass(frozen=True)
class RationalPrime:
    p: int

    def __str__(self):
        return "p=%d" % self.p


@dataclass(frozen=True)
class QuadFieldPrime:
    """A prime of Q(sqrt(d)) above p; tag describes the splitting behaviour
    (split primes come in conjugate pairs, indexed 0 and 1)."""

    p: int
    tag: str
    index: int = 0

    def __str__(self):
        if self.tag == "split":
            return "p=%d(split,%d)" % (self.p, self.index)
        return "p=%d(%s)" % (self.p, self.tag)


@dataclass(frozen=True)
class PolyPlace:
    """Finite place of Q(s): an irreducible primitive integer polynomial with
    positive leading coefficient, stored as an ascending coefficient tuple."""

    poly: tuple

    @property
    def degree(self):
        return poly_deg(self.poly)

    def __str__(self):
        return "(%s)" % poly_str(self.poly)


@dataclass(frozen=True)
class DegreePlace:
    """The place at infinity of Q(s) (uniformizer 1/s)."""

    def __str__(self):
        return "(1/s)"


def split_prime_in_quadratic(p, d):
    """Splitting type of the rational prime p in Q(sqrt(d)).

    d must be a squarefree integer different from 0 and 1.
    """
    if d in (0, 1) or squarefree_of_fraction(d) != d:
        raise BadDiscriminant("d must be squarefree and not 0 or 1, got %r" % (d,))
    if not is_prime(p):
        raise BadDiscriminant("p must be prime, got %r" % (p,))
    if p == 2:
        m = d % 8
        if m == 1:
            return "split"
        if m == 5:
            return "inert"
        return "ramified"
    if d % p == 0:
        return "ramified"
    return "split" if legendre(d, p) == 1 else "inert"


# ---------------------------------------------------------------------------
# quadratic number-field towers over Q (depth <= 2)


class QuadField:
    """Q(sqrt(r1)) or Q(sqrt(r1), sqrt(r2)) with rational square roots.

    Roots are kept as signed squarefree integers.  Construction verifies that
    each adjoined root is a non-square at its level, so the degree really is
    2 ** depth.
    """

    def __init__(self, *roots):
        roots = tuple(squarefree_of_fraction(Fraction(r)) for r in roots)
        if not 1 <= len(roots) <= 2:
            raise DegenerateExtension("supported depth is 1 or 2")
        if roots[0] == 1:
            raise DegenerateExtension("sqrt of a square adjoined at level 1")
        if len(roots) == 2 and roots[1] in (1, roots[0]):
            raise DegenerateExtension("sqrt of a square adjoined at level 2")
        self.roots = roots

    @property
    def depth(self):
        return len(self.roots)

    def __eq__(self, other):
        return isinstance(other, QuadField) and self.roots == other.roots

    def __hash__(self):
        return hash(("QuadField", self.roots))

    def __str__(self):
        return "Q(%s)" % ", ".join("sqrt(%d)" % r for r in self.roots)

    def num(self, co):
        return QuadNum(self, _coerce_coords(co, self.depth))

    def from_rational(self, a):
        a = Fraction(a)
        if self.depth == 1:
            return QuadNum(self, (a, Fraction(0)))
        zero = (Fraction(0), Fraction(0))
        return QuadNum(self, ((a, Fraction(0)), zero))

    def sub_field(self):
        if self.depth == 1:
            return None
        return QuadField(self.roots[0])


def _coerce_coords(co, depth):
    if depth == 1:
        a, b = co
        return (Fraction(a), Fraction(b))
    alpha, beta = co
    return (_coerce_coords(alpha, 1), _coerce_coords(beta, 1))


def _pair_add(x, y):
    return (x[0] + y[0], x[1] + y[1])


def _pair_mul(x, y, r):
    a, b = x
    c, d = y
    return (a * c + b * d * r, a * d + b * c)


def _pair_scale(x, q):
    return (x[0] * q, x[1] * q)


class QuadNum:
    """Element of a QuadField, as nested coordinate pairs over Q."""

    __slots__ = ("field", "co")

    def __init__(self, field, co):
        self.field = field
        self.co = co

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        if self.field.depth == 1:
            return QuadNum(self.field, _pair_add(self.co, other.co))
        return QuadNum(
            self.field,
            (_pair_add(self.co[0], other.co[0]), _pair_add(self.co[1], other.co[1])),
        )

    def __neg__(self):
        if self.field.depth == 1:
            return QuadNum(self.field, (-self.co[0], -self.co[1]))
        return QuadNum(
            self.field,
            (
                (-self.co[0][0], -self.co[0][1]),
                (-self.co[1][0], -self.co[1][1]),
            ),
        )

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __mul__(self, other):
        other = self._coerce(other)
        r1 = Fraction(self.field.roots[0])
        if self.field.depth == 1:
            return QuadNum(self.field, _pair_mul(self.co, other.co, r1))
        r2 = Fraction(self.field.roots[1])
        a, b = self.co
        c, d = other.co
        ac = _pair_mul(a, c, r1)
        bd = _pair_mul(b, d, r1)
        ad = _pair_mul(a, d, r1)
        bc = _pair_mul(b, c, r1)
        return QuadNum(self.field, (_pair_add(ac, _pair_scale(bd, r2)), _pair_add(ad, bc)))

    def _coerce(self, other):
        if isinstance(other, QuadNum):
            if other.field != self.field:
                raise FieldMismatch("numbers from different quadratic towers")
            return other
        return self.field.from_rational(other)

    def conj_top(self):
        """Conjugate over the next field down: sqrt(r_top) -> -sqrt(r_top)."""
        if self.field.depth == 1:
            return QuadNum(self.field, (self.co[0], -self.co[1]))
        return QuadNum(self.field, (self.co[0], (-self.co[1][0], -self.co[1][1])))

    def norm_down(self):
        """Norm to the next field down: a Fraction (depth 1) or a depth-1
        QuadNum (depth 2)."""
        prod = self * self.conj_top()
        if self.field.depth == 1:
            return prod.co[0]
        sub = self.field.sub_field()
        return QuadNum(sub, prod.co[0])

    def full_norm(self):
        """Norm all the way down to Q."""
        n = self.norm_down()
        if isinstance(n, QuadNum):
            return n.norm_down()
        return n

    def is_zero(self):
        if self.field.depth == 1:
            return self.co == (0, 0)
        return self.co[0] == (0, 0) and self.co[1] == (0, 0)

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        if self.field.depth == 1:
            n = self.norm_down()
            return QuadNum(self.field, (self.co[0] / n, -self.co[1] / n))
        n = self.norm_down().inverse()
        conj = self.conj_top()
        lifted = QuadNum(self.field, (n.co, (Fraction(0), Fraction(0))))
        return conj * lifted

    def __eq__(self, other):
        return (
            isinstance(other, QuadNum)
            and self.field == other.field
            and self.co == other.co
        )

    def __hash__(self):
        return hash((self.field, self.co))

    # -- depth-1 utilities ---------------------------------------------------

    def rational_part(self):
        if self.field.depth != 1:
            raise UnsupportedField("rational_part is a depth-1 utility")
        return self.co

    def is_square(self):
        """Exact squareness test in Q(sqrt(r)), depth 1 only."""
        if self.field.depth != 1:
            raise UnsupportedField("is_square is a depth-1 utility")
        a, b = self.co
        r = Fraction(self.field.roots[0])
        if self.is_zero():
            return True
        if b == 0:
            return is_square_fraction(a) or is_square_fraction(a / r)
        n2 = a * a - r * b * b
        if not is_square_fraction(n2):
            return False
        n = sqrt_fraction(n2)
        for cand in ((a + n) / 2, (a - n) / 2):
            if cand > 0 and is_square_fraction(cand):
                u = sqrt_fraction(cand)
                if u != 0:
                    v = b / (2 * u)
                    if u * u + r * v * v == a:
                        return True
        return False

    def sign_at(self, eps):
        """Sign of a + eps*b*sqrt(r) under the real embedding (r > 0)."""
        if self.field.depth != 1:
            raise UnsupportedField("sign_at is a depth-1 utility")
        a, b = self.co
        r = Fraction(self.field.roots[0])
        if r < 0:
            raise UnsupportedField("no real embedding for negative root")
        b = b * eps
        if b == 0:
            return 0 if a == 0 else (1 if a > 0 else -1)
        if a == 0:
            return 1 if b > 0 else -1
        sa = 1 if a > 0 else -1
        sb = 1 if b > 0 else -1
        if sa == sb:
            return sa
        diff = a * a - r * b * b
        if diff == 0:
            return 0
        return sa * (1 if diff > 0 else -1)

    def __str__(self):
        if self.field.depth == 1:
            a, b = self.co
            return "%s + %s*sqrt(%d)" % (a, b, self.field.roots[0])
        (a, b) = self.co
        sub = self.field.sub_field()
        return "(%s) + (%s)*sqrt(%d)" % (
            QuadNum(sub, a),
            QuadNum(sub, b),
            self.field.roots[1],
        )


# ---------------------------------------------------------------------------
# parsing: field specs and element literals


def parse_field_spec(src):
    """Parse ``Q``, ``F<p>``, ``Q(s)`` followed by ``[[name]]`` steps."""
    i = 0
    n = len(src)
    if src.startswith("Q(") :
        j = src.find(")")
        if j < 0:
            raise ParseError("unclosed base-variable parenthesis", position=1)
        base = RationalFunction(src[2:j])
        i = j + 1
    elif src.startswith("Q"):
        base = Rationals()
        i = 1
    elif src.startswith("F"):
        j = 1
        while j < n and src[j].isdigit():
            j += 1
        if j == 1:
            raise ParseError("expected a prime after F", position=1)
        try:
            base = PrimeField(int(src[1:j]))
        except UnsupportedField as exc:
            raise ParseError(str(exc), position=1) from None
        i = j
    else:
        raise ParseError("expected base field Q, F<p> or Q(s)", position=0)
    steps = []
    while i < n:
        if not src.startswith("[[", i):
            raise ParseError("expected [[var]]", position=i)
        j = src.find("]]", i + 2)
        if j < 0:
            raise ParseError("unclosed [[", position=i)
        steps.append(src[i + 2 : j])
        i = j + 2
    try:
        return FieldTower(base, tuple(steps))
    except UnsupportedField as exc:
        raise ParseError(str(exc), position=0) from None


class _Scanner:
    def __init__(self, src):
        self.src = src
        self.i = 0

    def skip_ws(self):
        while self.i < len(self.src) and self.src[self.i] in " \t":
            self.i += 1

    def peek(self):
        self.skip_ws()
        return self.src[self.i] if self.i < len(self.src) else ""

    def eat(self, ch):
        if self.peek() != ch:
            raise ParseError("expected %r" % ch, position=self.i)
        self.i += 1

    def at_end(self):
        return self.peek() == ""

    def read_int(self):
        self.skip_ws()
        j = self.i
        if j < len(self.src) and self.src[j] in "+-":
            j += 1
        k = j
        while k < len(self.src) and self.src[k].isdigit():
            k += 1
        if k == j:
            raise ParseError("expected an integer", position=self.i)
        val = int(self.src[self.i : k])
        self.i = k
        return val

    def read_name(self):
        self.skip_ws()
        j = self.i
        while j < len(self.src) and (self.src[j].isalnum() or self.src[j] == "_"):
            j += 1
        if j == self.i:
            raise ParseError("expected a name", position=self.i)
        name = self.src[self.i : j]
        self.i = j
        return name


def parse_element(src, field):
    """Parse an element literal like ``-3/5*t1*t2^3`` or ``2*(s^2+8)*t1``."""
    sc = _Scanner(src)
    coeff, exps = _parse_term(sc, field)
    if not sc.at_end():
        raise ParseError("trailing input", position=sc.i)
    return MonomialElement(field, coeff, exps)


def _parse_term(sc, field):
    sign = 1
    while sc.peek() in "+-":
        if sc.peek() == "-":
            sign = -sign
        sc.i += 1
    coeff = Fraction(sign)
    qs_factors = []
    exps = [0] * field.n_steps
    names = list(field.steps)
    while True:
        ch = sc.peek()
        if ch.isdigit():
            num = sc.read_int()
            if sc.peek() == "/":
                sc.eat("/")
                den = sc.read_int()
                if den == 0:
                    raise ParseError("zero denominator", position=sc.i)
                coeff *= Fraction(num, den)
            else:
                coeff *= num
        elif ch == "(":
            if not isinstance(field.base, RationalFunction):
                raise ParseError("polynomial factor outside Q(s)", position=sc.i)
            terms = _parse_poly(sc, field.base.var)
            e = 1
            if sc.peek() == "^":
                sc.eat("^")
                e = sc.read_int()
            qs_factors.extend([terms] * e)
        elif ch.isalpha() or ch == "_":
            pos = sc.i
            name = sc.read_name()
            e = 1
            if sc.peek() == "^":
                sc.eat("^")
                e = sc.read_int()
            if name in names:
                exps[names.index(name)] += e
            elif isinstance(field.base, RationalFunction) and name == field.base.var:
                qs_factors.append([(e, Fraction(1))])
            else:
                raise ParseError("unknown variable %r" % name, position=pos)
        else:
            raise ParseError("expected a factor", position=sc.i)
        if sc.peek() == "*":
            sc.eat("*")
            continue
        break
    if qs_factors:
        import sympy

        s = sympy.Symbol(field.base.var)
        value = sympy.Rational(coeff.numerator, coeff.denominator)
        for fac in qs_factors:
            value *= sum(sympy.Rational(a.numerator, a.denominator) * s**k if isinstance(a, Fraction) else a * s**k for k, a in _as_terms(fac))
        return value, tuple(exps)
    return coeff, tuple(exps)


def _as_terms(fac):
    for item in fac:
        k, a = item
        yield k, a


def _parse_poly(sc, var):
    """Parse a parenthesized polynomial in the base variable; returns a list
    of (degree, coefficient) terms."""
    sc.eat("(")
    terms = []
    while True:
        sign = 1
        while sc.peek() in "+-":
            if sc.peek() == "-":
                sign = -sign
            sc.i += 1
        coeff = Fraction(sign)
        deg = 0
        saw = False
        while True:
            ch = sc.peek()
            if ch.isdigit():
                num = sc.read_int()
                if sc.peek() == "/":
                    sc.eat("/")
                    coeff *= Fraction(num, sc.read_int())
                else:
                    coeff *= num
                saw = True
            elif ch.isalpha() or ch == "_":
                pos = sc.i
                name = sc.read_name()
                if name != var:
                    raise ParseError("unknown variable %r in polynomial" % name, position=pos)
                e = 1
                if sc.peek() == "^":
                    sc.eat("^")
                    e = sc.read_int()
                deg += e
                saw = True
            else:
                break
            if sc.peek() == "*":
                sc.eat("*")
        if not saw:
            raise ParseError("expected a polynomial term", position=sc.i)
        terms.append((deg, coeff))
        if sc.peek() in "+-":
            continue
        break
    sc.eat(")")
    return terms
