"""Second-residue machinery over Q(s) and the shifted-conic generator.

Hyperbolicity over the rational function field is decided through residue
forms: a diagonal form is hyperbolic iff its second residue at every finite
place is hyperbolic over the residue field and a good specialization over Q
is hyperbolic.  Residues of a hyperbolic form vanish, and once every residue
vanishes the Witt class comes from the constant subring, where a
specialization avoiding zeros and poles of the entries detects it exactly.

The same residue route decides whether a sum of quaternion symbols over Q(s)
is trivial: all tame residues must be squares in their residue fields, after
which the class is constant and a specialized Hilbert-symbol product settles
it place by place over Q.

Residue fields are Q at linear places and Q(sqrt(disc)) at irreducible
quadratic places; anything of higher degree raises UnsupportedResidueField,
which marks the extension boundary of this layer.
"""

from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    PreconditionFailed,
    UnsupportedField,
    UnsupportedResidueField,
    ZeroArgument,
)
from .fields import (
    CoeffQs,
    DegreePlace,
    FieldTower,
    PolyPlace,
    QQ,
    QuadField,
    QuadNum,
    RationalFunction,
    SquareClass,
    canonical_square_class,
    multiquad_degree,
    poly_deg,
    poly_eval,
    poly_str,
)
from .forms import QuadForm, quadform
from .numutil import is_square_fraction, squarefree_of_fraction, sqrt_fraction
from . import localglobal


QS = FieldTower(RationalFunction("s"))


def _require_qs(field):
    if field.steps or not isinstance(field.base, RationalFunction):
        raise UnsupportedField("expected a form over the rational function field")


def _entry_coeff(entry):
    if not isinstance(entry.coeff, CoeffQs):
        raise UnsupportedField("entry is not a canonical Q(s) class")
    return entry.coeff


# ---------------------------------------------------------------------------
# residue fields of places


def _residue_datum(place):
    """(kind, data) for the residue field at a place: ("Q", root) for linear
    places, ("quad", (d, sbar)) for irreducible quadratic places with
    generator sbar = image of s, ("Q", None) for the degree place."""
    if isinstance(place, DegreePlace):
        return ("Q", None)
    poly = place.poly
    deg = poly_deg(poly)
    if deg == 1:
        c0, c1 = poly
        return ("Q", Fraction(-c0, c1))
    if deg == 2:
        c, b, a = poly
        disc = Fraction(b * b - 4 * a * c)
        d = squarefree_of_fraction(disc)
        m = sqrt_fraction(disc / d)
        K = QuadField(d)
        sbar = QuadNum(K, (Fraction(-b, 2 * a), m / (2 * a)))
        return ("quad", (d, sbar))
    raise UnsupportedResidueField(
        "residue field of degree %d at %s" % (deg, place)
    )


def _eval_unit(unit, polys, kind, data):
    """Value of unit * prod(polys) in the residue field (nonzero since the
    factors are coprime to the place polynomial)."""
    if kind == "Q":
        out = Fraction(unit)
        for q in polys:
            out *= poly_eval(q, data)
        return out
    d, sbar = data
    out = sbar.field.from_rational(unit)
    for q in polys:
        acc = sbar.field.from_rational(q[-1])
        for a in reversed(q[:-1]):
            acc = acc * sbar + a
        out = out * acc
    return out


@dataclass(frozen=True)
class ResidueForm:
    """Diagonal form over a quadratic residue field Q(sqrt(d))."""

    d: int
    entries: tuple

    @property
    def dim(self):
        return len(self.entries)

    def is_hyperbolic(self):
        return localglobal.is_hyperbolic_quadfield(list(self.entries), self.d)

    def __str__(self):
        return "<%s> over Q(sqrt(%d))" % (
            ", ".join(str(e) for e in self.entries),
            self.d,
        )


def second_residue(phi, place):
    """Second residue of a diagonal form at a place of Q(s).

    Entries are written u * p^eps with u coprime to the place polynomial p
    and eps in {0, 1}; the residue collects u mod p over the odd-valuation
    entries.  At the degree place the uniformizer is 1/s, the valuation of
    an entry is minus its total degree, and the residue of an odd-degree
    entry is its leading coefficient class.  The result is a QuadForm over Q
    for rational residue fields and a ResidueForm over Q(sqrt(d)) at
    irreducible quadratic places.
    """
    _require_qs(phi.field)
    kind, data = _residue_datum(place)
    values = []
    if isinstance(place, DegreePlace):
        for e in phi.entries:
            c = _entry_coeff(e)
            if sum(poly_deg(q) for q in c.polys) % 2:
                lead = c.unit
                for q in c.polys:
                    lead *= q[-1]
                values.append(Fraction(lead))
        return quadform(QQ, values)
    for e in phi.entries:
        c = _entry_coeff(e)
        if place.poly in c.polys:
            rest = tuple(q for q in c.polys if q != place.poly)
            values.append(_eval_unit(c.unit, rest, kind, data))
    if kind == "Q":
        return quadform(QQ, values)
    d, _ = data
    entries = tuple(v for v in values)
    return ResidueForm(d, entries)


def support_places(phi):
    """Finite places carrying a nonzero valuation of some entry."""
    _require_qs(phi.field)
    polys = set()
    for e in phi.entries:
        polys.update(_entry_coeff(e).polys)
    return [PolyPlace(p) for p in sorted(polys, key=lambda q: (len(q), q))]


def good_point(polys, avoid=()):
    """Small rational point where none of the given polynomials vanish."""
    k = 0
    while True:
        for x in (k, -k) if k else (0,):
            x = Fraction(x)
            if x in avoid:
                continue
            if all(poly_eval(q, x) != 0 for q in polys):
                return x
        k += 1


def specialize_form(phi, x0):
    """The form over Q obtained by evaluating every entry at s = x0."""
    _require_qs(phi.field)
    values = [_entry_coeff(e).value_at(x0) for e in phi.entries]
    if any(v == 0 for v in values):
        raise ZeroArgument("specialization point hits a zero of an entry")
    return quadform(QQ, values)


@dataclass(frozen=True)
class SecondResidueProfile:
    """All residue data of a form over Q(s): the second residues at the
    support places and the degree place, plus a specialization over Q at a
    recorded good point standing in for the constant part."""

    residues: tuple
    constant_part: QuadForm
    point: Fraction

    def residue_at(self, place):
        for p, form in self.residues:
            if p == place:
                return form
        return None


def second_residue_profile(phi):
    _require_qs(phi.field)
    residues = []
    for place in support_places(phi):
        residues.append((place, second_residue(phi, place)))
    inf = second_residue(phi, DegreePlace())
    if inf.dim:
        residues.append((DegreePlace(), inf))
    polys = set()
    for e in phi.entries:
        polys.update(_entry_coeff(e).polys)
    x0 = good_point(polys)
    return SecondResidueProfile(tuple(residues), specialize_form(phi, x0), x0)


def is_hyperbolic_Qs(phi):
    """Hyperbolicity over Q(s) via residues plus one good specialization."""
    _require_qs(phi.field)
    if phi.dim % 2:
        return False
    profile = second_residue_profile(phi)
    for place, form in profile.residues:
        if isinstance(form, ResidueForm):
            if not form.is_hyperbolic():
                return False
        elif not localglobal.is_hyperbolic_Q(form):
            return False
    return localglobal.is_hyperbolic_Q(profile.constant_part)


# ---------------------------------------------------------------------------
# triviality of symbol sums over Q(s)


def _tame_residue(u, w, poly):
    """Square class of the tame residue of the symbol (u, w) at the place:
    (-1)^(alpha*beta) * U^beta * W^alpha with u = U*p^alpha, w = W*p^beta."""
    alpha = 1 if poly in u.polys else 0
    beta = 1 if poly in w.polys else 0
    out = CoeffQs(-1 if alpha and beta else 1)
    if beta:
        out = out.times(CoeffQs(u.unit, tuple(q for q in u.polys if q != poly)))
    if alpha:
        out = out.times(CoeffQs(w.unit, tuple(q for q in w.polys if q != poly)))
    return out


def symbols_trivial_qs(pairs):
    """Is a sum of quaternion symbols (u_i, w_i) over Q(s) trivial?

    True iff every tame residue is a square in its residue field and the
    specialized symbol product at a good rational point is +1 at every place
    of Q.
    """
    pairs = tuple(pairs)
    if not pairs:
        return True
    coeffs = []
    for u, w in pairs:
        coeffs.append(_entry_coeff(u))
        coeffs.append(_entry_coeff(w))
    polys = set()
    for c in coeffs:
        polys.update(c.polys)
    for poly in sorted(polys, key=lambda q: (len(q), q)):
        kind, data = _residue_datum(PolyPlace(poly))
        res = CoeffQs(1)
        for u, w in pairs:
            res = res.times(_tame_residue(_entry_coeff(u), _entry_coeff(w), poly))
        value = _eval_unit(res.unit, res.polys, kind, data)
        if kind == "Q":
            if not is_square_fraction(value):
                return False
        elif not value.is_square():
            return False
    x0 = good_point(polys)
    values = [c.value_at(x0) for c in coeffs]
    for place in localglobal.places_Q(values):
        prod = 1
        for u, w in pairs:
            prod *= localglobal.hilbert_symbol(
                _entry_coeff(u).value_at(x0), _entry_coeff(w).value_at(x0), place
            )
        if prod != 1:
            return False
    return True


# ---------------------------------------------------------------------------
# the shifted-conic generator: towers of quadratic extensions of Q(s) whose
# shared norms are provably not a single full norm


@dataclass(frozen=True)
class CitedAssumption:
    """A claim imported from the literature, recorded verbatim and never
    recomputed; reports must keep these separate from computed facts."""

    claim: str
    reference: str

    def describe(self):
        return {"claim": self.claim, "reference": self.reference, "cited": True}

    def __str__(self):
        return "%s [%s]" % (self.claim, self.reference)


@dataclass(frozen=True)
class SivatskiPrecondition:
    """Outcome of the entry checks for the shifted-conic generator; truthy
    exactly when every check passed, with the conic points retained."""

    ok: bool
    degree: int
    d_nonsquare: bool
    points: tuple = ()
    reason: str = ""

    def __bool__(self):
        return self.ok


def sivatski_precondition(a1, a2, d):
    """Check the inputs for sivatski_generate.

    Requires [Q(sqrt(a1), sqrt(a2)) : Q] = 4, d a nonsquare, and d a norm
    from both Q(sqrt(a1)) and Q(sqrt(a2)), witnessed by solved conics
    x^2 - a_i y^2 = d whose points are stored on the report.
    """
    from .groups import conic_point

    a1, a2, d = Fraction(a1), Fraction(a2), Fraction(d)
    if a1 == 0 or a2 == 0 or d == 0:
        raise ZeroArgument("nonzero inputs required")
    degree = multiquad_degree([a1, a2], QQ)
    if degree != 4:
        return SivatskiPrecondition(
            False, degree, not is_square_fraction(d),
            reason="the two square roots generate degree %d, not 4" % degree,
        )
    if is_square_fraction(d):
        return SivatskiPrecondition(False, degree, False, reason="d is a square")
    points = []
    for a in (a1, a2):
        pt = conic_point(a, d)
        if pt is None:
            return SivatskiPrecondition(
                False, degree, True, tuple(points),
                "d is not a norm from Q(sqrt(%s))" % a,
            )
        points.append(pt)
    return SivatskiPrecondition(True, degree, True, tuple(points))


def _pmul(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def _ptrim(p):
    while len(p) > 1 and p[-1] == 0:
        p = p[:-1]
    return tuple(p)


@dataclass(frozen=True)
class SivatskiWitness:
    """Exact norm witness d*c^2 = x(s)^2 - a(s)*y(s)^2 for a generated root
    a(s); coordinate polynomials are stored ascending."""

    root: SquareClass
    c: int
    x_poly: tuple
    y_poly: tuple
    value: Fraction

    def verify(self):
        a_poly = self._a_poly()
        lhs = [v for v in _pmul(self.x_poly, self.x_poly)]
        ay2 = _pmul(a_poly, _pmul(self.y_poly, self.y_poly))
        n = max(len(lhs), len(ay2))
        lhs += [Fraction(0)] * (n - len(lhs))
        ay2 += [Fraction(0)] * (n - len(ay2))
        diff = _ptrim([u - v for u, v in zip(lhs, ay2)])
        return diff == (self.value,)

    def _a_poly(self):
        coeff = self.root.coeff
        out = [Fraction(coeff.unit)]
        for q in coeff.polys:
            out = _pmul(out, [Fraction(v) for v in q])
        return out

    def describe(self):
        return {
            "root": str(self.root),
            "scalar": self.c,
            "x": [str(v) for v in self.x_poly],
            "y": [str(v) for v in self.y_poly],
            "norm": str(self.value),
        }


@dataclass(frozen=True)
class SivatskiInstance:
    """A family of quadratic extensions of Q(s) sharing the norm d.

    The roots are a1, a2 (constants) and a_i = s^2 - 4*d*c_i^2 for the
    stored scalars; each carries an exact witness that d is a norm modulo
    squares, while the non-membership of d in the square classes times the
    full norm group is a cited assumption, not a computed fact.
    """

    a1: Fraction
    a2: Fraction
    d: Fraction
    scalars: tuple
    generated: tuple
    witnesses: tuple
    points: tuple
    cited: CitedAssumption

    @property
    def roots(self):
        first = (
            canonical_square_class(self.a1, QS),
            canonical_square_class(self.a2, QS),
        )
        return first + self.generated

    def describe(self):
        return {
            "a1": str(self.a1),
            "a2": str(self.a2),
            "d": str(self.d),
            "scalars": list(self.scalars),
            "generated": [str(a) for a in self.generated],
            "witnesses": [w.describe() for w in self.witnesses],
            "conic_points": [[str(x), str(y)] for x, y in self.points],
            "cited": self.cited.describe(),
        }


def sivatski_generate(a1, a2, d, r=3):
    """Generate the family a_i = s^2 - 4*d*c_i^2 with exact norm witnesses.

    The scalars are c_3 = 1, c_4 = 2, ..., c_r = r - 2, so their squares are
    distinct; each a_i is irreducible over Q(s) because 4*d*c_i^2 is a
    nonsquare, and d*c_i^2 = ((s/2))^2 - a_i*(1/2)^2 exhibits d as a norm
    from Q(s)(sqrt(a_i)) modulo squares.  The claim that d is not a product
    of a square and a single full norm from the composite is recorded as a
    CitedAssumption.
    """
    pre = sivatski_precondition(a1, a2, d)
    if not pre:
        raise PreconditionFailed(pre.reason)
    if r < 3:
        raise PreconditionFailed("need at least one generated root (r >= 3)")
    a1, a2, d = Fraction(a1), Fraction(a2), Fraction(d)
    import sympy

    s = sympy.Symbol(QS.base.var)
    scalars = tuple(range(1, r - 1))
    generated = []
    witnesses = []
    for c in scalars:
        expr = s * s - 4 * sympy.Rational(d) * c * c
        root = canonical_square_class(expr, QS)
        if not (len(root.coeff.polys) == 1 and poly_deg(root.coeff.polys[0]) == 2):
            raise PreconditionFailed(
                "generated root s^2 - %s is not an irreducible quadratic"
                % (4 * d * c * c)
            )
        wit = SivatskiWitness(
            root=root,
            c=c,
            x_poly=(Fraction(0), Fraction(1, 2)),
            y_poly=(Fraction(1, 2),),
            value=d * c * c,
        )
        if not wit.verify():
            raise PreconditionFailed("norm witness failed exact verification")
        generated.append(root)
        witnesses.append(wit)
    for (x, y), a in zip(pre.points, (a1, a2)):
        if x * x - a * y * y != d:
            raise PreconditionFailed("stored conic point failed verification")
    names = ["sqrt(%s)" % a1, "sqrt(%s)" % a2] + [
        "sqrt(%s)" % poly_str(g.coeff.polys[0]) for g in generated
    ]
    cited = CitedAssumption(
        claim=(
            "%s is not a product of a square and a norm from "
            "K(%s) over K = Q(s)" % (d, ", ".join(names[:3]))
        ),
        reference="A. S. Sivatski, Cor. 10",
    )
    return SivatskiInstance(
        a1=a1,
        a2=a2,
        d=d,
        scalars=scalars,
        generated=tuple(generated),
        witnesses=tuple(witnesses),
        points=pre.points,
        cited=cited,
    )
