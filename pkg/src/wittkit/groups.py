"""Similarity factors, norm-generated subgroups, and hyperbolicity
certificates.

The central objects are G(phi) = {a : a*phi is isometric to phi} and the
subgroup of the multiplicative group generated by norms from quadratic
2-extension towers that split phi.  Membership in the latter is witnessed by
HypCertificate values: explicit towers, exact norm chains, and per-extension
evidence that the form goes hyperbolic.  Everything a certificate claims can
be re-checked by verify_certificate without trusting the emitter.
"""

import itertools
import math
import os
from dataclasses import dataclass, field as dfield, replace
from fractions import Fraction

from .errors import (
    CertificateSearchExhausted,
    DecompositionNotFound,
    DegenerateExtension,
    DepthLimitExceeded,
    FieldMismatch,
    FormIsSplit,
    NotASimilarityFactor,
    NotTorsion,
    PreconditionFailed,
    SearchExhausted,
    UndecidableLayer,
    UnsupportedField,
    WittkitError,
    ZeroArgument,
    ZeroElement,
)
from .fields import (
    FieldTower,
    PrimeField,
    QQ,
    RationalFunction,
    Rationals,
    SquareClass,
    canonical_square_class,
    is_square,
    minus_one_class,
    multiquad_degree,
    one_class,
)
from .forms import QuadForm, discriminant, in_In, orthogonal_sum, quadform, scale, tensor
from .numutil import (
    factorint,
    is_square_fraction,
    legendre,
    sqrt_fraction,
    sqrt_mod_prime,
    squarefree_of_fraction,
    squarefree_part,
)
from . import henselian, localglobal


# ---------------------------------------------------------------------------
# certificate data model


@dataclass(frozen=True)
class TwoExtensionTower:
    """An iterated quadratic extension K(sqrt(r1), sqrt(r2), ...).

    Roots are square classes of the ground field, listed bottom-up; the
    extension has degree 2^len(roots) once every root is verified a
    nonsquare at its level.
    """

    field: FieldTower
    roots: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "roots", tuple(self.roots))
        for r in self.roots:
            if not isinstance(r, SquareClass) or r.field != self.field:
                raise FieldMismatch("tower root %r does not live in %s" % (r, self.field))

    @property
    def depth(self):
        return len(self.roots)

    @property
    def degree(self):
        return 2 ** len(self.roots)

    def describe(self):
        return [str(r) for r in self.roots]


@dataclass(frozen=True)
class HypAttestation:
    """Evidence that a form becomes hyperbolic over a tower.

    kind "decided": re-decidable by the layer machinery (degree <= 2 over a
    number-field layer, or a Laurent tower where the adjoined root has odd
    value or lives in the base).  kind "symbolic": the form is
    Witt-equivalent to an orthogonal sum of pieces, each annihilated over
    the subfield cut out by a subset of the tower roots; parts is a tuple of
    (entries, mask) pairs where mask is a 0/1 tuple over the roots and the
    piece goes hyperbolic over K(sqrt of the masked product).  Binary pieces
    whose discriminant matches the masked product need no decision layer at
    all, which keeps them checkable over any field.
    """

    kind: str
    parts: tuple = ()


DECIDED = HypAttestation("decided")


@dataclass(frozen=True)
class NormPart:
    """One factor of a norm chain: an element of a quadratic 2-extension
    tower together with evidence that the target form splits there.

    The element is a coordinate pair (x, y) over the level below the top,
    representing x + y*sqrt(r_top); over a depth-2 tower the coordinates are
    themselves pairs.  Coordinates are exact rationals over number-field
    ground layers; over Laurent towers one coordinate must vanish so that
    the norm stays monomial.
    """

    tower: TwoExtensionTower
    element: tuple
    attestation: HypAttestation = DECIDED

    def norm_class(self):
        """Square class of the norm of the element down to the ground field."""
        value = _norm_down(self.tower.field, self.tower.roots, self.element)
        if isinstance(value, SquareClass):
            return value
        return canonical_square_class(value, self.tower.field)


@dataclass(frozen=True)
class HypCertificate:
    """Witness that a target class is a product of norms from quadratic
    2-extension towers splitting the form, modulo squares.

    An empty part list certifies a square target (the empty norm product).
    """

    field: FieldTower
    target: SquareClass
    parts: tuple = ()
    note: str = ""

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        if self.target.field != self.field:
            raise FieldMismatch("target does not live in the certificate field")

    @property
    def max_depth(self):
        return max((p.tower.depth for p in self.parts), default=0)

    def norm_product(self):
        out = one_class(self.field)
        for p in self.parts:
            out = out.times(p.norm_class())
        return out

    def describe(self):
        return {
            "field": str(self.field),
            "target": str(self.target),
            "parts": [
                {
                    "tower": p.tower.describe(),
                    "element": _describe_coords(p.element),
                    "attestation": {
                        "kind": p.attestation.kind,
                        "parts": [
                            {"entries": [str(e) for e in entries], "mask": list(mask)}
                            for entries, mask in p.attestation.parts
                        ],
                    },
                }
                for p in self.parts
            ],
            "note": self.note,
        }


def _describe_coords(coords):
    if isinstance(coords, tuple):
        return [_describe_coords(c) for c in coords]
    if isinstance(coords, SquareClass):
        return str(coords)
    return str(Fraction(coords))


def _norm_down(field, roots, element):
    """Exact norm of a tower element down to the ground field.

    Coordinates are rationals (or nested pairs of them) over a rational
    ground layer; over other layers the tower must have depth one and one of
    the two coordinates must be zero, keeping the computation inside
    square-class arithmetic.
    """
    if not roots:
        return _coerce_class(field, element)
    rational = (isinstance(field.base, Rationals)
                and all(not any(r.exps) for r in roots)
                and not _has_class_coord(element))
    if rational:
        values = [Fraction(r.coeff) for r in roots]
        z = _alg_coerce(element, len(roots))
        for level in range(len(roots), 0, -1):
            x, y = z
            xx = _alg_mul(x, x, values, level - 1)
            ryy = _alg_mul(_alg_embed(values[level - 1], level - 1),
                           _alg_mul(y, y, values, level - 1), values, level - 1)
            z = _alg_sub(xx, ryy, level - 1)
        if z == 0:
            raise ZeroElement("norm of a zero tower element")
        return z
    if len(roots) != 1:
        raise UndecidableLayer("deep tower norms need a rational ground layer")
    r = roots[0]
    x, y = element
    if _coord_is_zero(y):
        cls = _coerce_class(field, x)
        return cls.times(cls)
    if _coord_is_zero(x):
        cls = _coerce_class(field, y)
        return cls.times(cls).times(r.neg())
    raise UndecidableLayer("norm with two nonzero coordinates needs a rational ground layer")


# depth-d tower elements as nested coordinate pairs with Fraction leaves


def _alg_embed(q, depth):
    if depth == 0:
        return Fraction(q)
    return (_alg_embed(q, depth - 1), _alg_embed(0, depth - 1))


def _alg_coerce(c, depth):
    if depth == 0:
        if isinstance(c, tuple):
            raise FieldMismatch("coordinate nesting deeper than the tower")
        return Fraction(c)
    if isinstance(c, tuple):
        if len(c) != 2:
            raise FieldMismatch("tower coordinates must come in pairs")
        return (_alg_coerce(c[0], depth - 1), _alg_coerce(c[1], depth - 1))
    return _alg_embed(Fraction(c), depth)


def _alg_add(x, y, depth):
    if depth == 0:
        return x + y
    return (_alg_add(x[0], y[0], depth - 1), _alg_add(x[1], y[1], depth - 1))


def _alg_sub(x, y, depth):
    if depth == 0:
        return x - y
    return (_alg_sub(x[0], y[0], depth - 1), _alg_sub(x[1], y[1], depth - 1))


def _alg_mul(x, y, values, depth):
    if depth == 0:
        return x * y
    a, b = x
    c, d = y
    r = _alg_embed(values[depth - 1], depth - 1)
    ac = _alg_mul(a, c, values, depth - 1)
    bd = _alg_mul(b, d, values, depth - 1)
    ad = _alg_mul(a, d, values, depth - 1)
    bc = _alg_mul(b, c, values, depth - 1)
    return (_alg_add(ac, _alg_mul(r, bd, values, depth - 1), depth - 1),
            _alg_add(ad, bc, depth - 1))


def _has_class_coord(c):
    if isinstance(c, tuple):
        return any(_has_class_coord(v) for v in c)
    return isinstance(c, SquareClass)


def _coord_is_zero(c):
    if isinstance(c, tuple):
        return all(_coord_is_zero(v) for v in c)
    if isinstance(c, SquareClass):
        return False
    return Fraction(c) == 0


def _coerce_class(field, c):
    if isinstance(c, SquareClass):
        if c.field != field:
            raise FieldMismatch("coordinate lives in the wrong field")
        return c
    return canonical_square_class(Fraction(c), field)


# ---------------------------------------------------------------------------
# the conic solver: rational points on x^2 - a*y^2 = b


def conic_obstruction(a, b):
    """First place of Q at which x^2 - a*y^2 = b is locally insolvable.

    Returns None when b is a norm from Q(sqrt(a)) everywhere locally, which
    by the local-global principle for ternary forms means a rational point
    exists.
    """
    a, b = Fraction(a), Fraction(b)
    if a == 0 or b == 0:
        raise ZeroArgument("conic needs nonzero coefficients")
    for place in localglobal.places_Q([a, b]):
        if localglobal.hilbert_symbol(a, b, place) == -1:
            return place
    return None


def conic_point(a, b):
    """Exact rational point (x, y) with x^2 - a*y^2 = b, or None.

    The local test runs first; None is returned exactly when some place
    obstructs (see conic_obstruction).  Otherwise a point is produced by
    Lagrange descent on the associated ternary form and verified before it
    is returned.  A descent that fails to terminate within its step budget
    raises SearchExhausted, which is distinct from insolvability.
    """
    a, b = Fraction(a), Fraction(b)
    if a == 0 or b == 0:
        raise ZeroArgument("conic needs nonzero coefficients")
    if is_square_fraction(b):
        return (sqrt_fraction(b), Fraction(0))
    if is_square_fraction(a):
        # x - my and x + my can be chosen freely with product b
        m = sqrt_fraction(a)
        return ((b + 1) / 2, (b - 1) / (2 * m))
    if conic_obstruction(a, b) is not None:
        return None
    a0 = squarefree_of_fraction(a)
    alpha = sqrt_fraction(a / a0)
    b0 = squarefree_of_fraction(b)
    beta = sqrt_fraction(b / b0)
    z, y, w = _legendre_point(a0, b0, 0)
    if w == 0:
        raise SearchExhausted("descent returned a degenerate point")
    x_out = abs(Fraction(z, w) * beta)
    y_out = abs(Fraction(y, w) * beta / alpha)
    if x_out * x_out - a * y_out * y_out != b:
        raise SearchExhausted("descent point failed verification")
    return (x_out, y_out)


_DESCENT_LIMIT = 200


def _legendre_point(a, b, depth):
    """Nontrivial integer solution (z, y, w) of z^2 = a*y^2 + b*w^2 for
    squarefree integers a, b, assumed solvable (caller checks locally)."""
    if depth > _DESCENT_LIMIT:
        raise SearchExhausted("descent depth limit hit")
    if b == 1:
        return (1, 0, 1)
    if a == 1:
        return (1, 1, 0)
    if abs(a) > abs(b):
        z, y, w = _legendre_point(b, a, depth + 1)
        return (z, w, y)
    if b == -1:
        # |a| <= 1 here, so a = -1: z^2 = -y^2 - w^2 has no nontrivial zero
        raise SearchExhausted("descent reached an insolvable core")
    t = _sqrt_mod_squarefree(a % abs(b), abs(b))
    if t is None:
        raise SearchExhausted("no square root during descent")
    if t > abs(b) // 2:
        t -= abs(b)
    c = (t * t - a) // b
    if c == 0:
        return (t, 1, 0)
    c0 = squarefree_part(c)
    m = sqrt_fraction(Fraction(c, c0))
    z1, y1, w1 = _legendre_point(a, c0, depth + 1)
    if w1 == 0:
        raise SearchExhausted("descent returned a degenerate point")
    # (z1^2 - a*y1^2)(t^2 - a) = b*(c0*m*w1)^2 and the left side is the
    # norm of (z1 + y1*sqrt(a))(t + sqrt(a))
    z2 = z1 * t + a * y1
    y2 = z1 + y1 * t
    w2 = c0 * int(m) * w1
    g = math.gcd(math.gcd(z2, y2), w2)
    if g > 1:
        z2, y2, w2 = z2 // g, y2 // g, w2 // g
    return (z2, y2, w2)


def _sqrt_mod_squarefree(a, n):
    """t with t^2 = a mod n for squarefree n > 0, or None."""
    t, mod = 0, 1
    for p in factorint(n):
        if p == 2:
            tp = a % 2
        else:
            ap = a % p
            if ap == 0:
                tp = 0
            elif legendre(ap, p) == 1:
                tp = sqrt_mod_prime(ap, p)
            else:
                return None
        # CRT combine
        inv = pow(mod, -1, p)
        t = t + mod * ((tp - t) * inv % p)
        mod *= p
    return t % mod


# ---------------------------------------------------------------------------
# similarity factors


def in_G(a, phi):
    """Is a a similarity factor of phi, i.e. a*phi isometric to phi?

    Decided through hyperbolicity of <1,-a> tensor phi over the form's
    field, dispatching by tower structure.
    """
    a = canonical_square_class(a, phi.field)
    if a.is_one():
        return True
    test = orthogonal_sum(phi, scale(a, phi).neg())
    return henselian.is_hyperbolic_tower(test)


def in_G_tuple(a, phis):
    """Conjunction of in_G over a list of forms (true when empty)."""
    return all(in_G(a, phi) for phi in phis)


# ---------------------------------------------------------------------------
# bounded searches shared by the certificate emitters


def _require_rational_base(field):
    if not isinstance(field.base, Rationals) or field.steps:
        raise UnsupportedField("this operation runs over the plain rationals")


def _search_bound(default=60):
    """Default magnitude bound for represented-value searches, overridable
    through the WITTKIT_SEARCH_BOUND environment variable."""
    try:
        return max(4, int(os.environ.get("WITTKIT_SEARCH_BOUND", default)))
    except ValueError:
        return default


def _rep_values(phi, bound=None, cap=64):
    """Squarefree representatives of square classes the form represents
    over Q: diagonal entries first, then small candidates confirmed by an
    exact isotropy test on the one-dimensional extension.  The test sees
    values only reachable through non-integral vectors, which a raw
    small-vector scan would miss."""
    if bound is None:
        bound = _search_bound()
    entries = [Fraction(e.coeff) for e in phi.entries]
    out, seen = [], set()

    def push(v):
        v0 = squarefree_of_fraction(v)
        if v0 not in seen:
            seen.add(v0)
            out.append(Fraction(v0))

    for e in entries:
        push(e)
    if not entries:
        return out
    universal = localglobal.anisotropic_dim_Q(phi) < phi.dim
    for k in range(1, bound + 1):
        if len(out) >= cap:
            break
        for c in (k, -k):
            c0 = squarefree_part(c)
            if c0 in seen:
                continue
            if universal:
                push(c0)
                continue
            probe = orthogonal_sum(phi, quadform(phi.field, [-c0]))
            if localglobal.anisotropic_dim_Q(probe) <= phi.dim:
                push(c0)
    return out


def _kill_candidates(an, cap=400):
    """Candidate discriminants d = -(product of two represented values),
    diagonal pairs of the anisotropic part first, then remaining pairs in
    order of magnitude.  Every candidate is re-verified by the caller, so
    the pool only affects completeness."""
    entries = [Fraction(e.coeff) for e in an.entries]
    values = _rep_values(an)
    out, seen = [], set()

    def push(x, y):
        d = squarefree_of_fraction(-x * y)
        if d != 1 and d not in seen:
            seen.add(d)
            out.append(Fraction(d))

    for i, x in enumerate(entries):
        for y in entries[i + 1:]:
            push(x, y)
    head = len(out)
    for i, x in enumerate(values):
        for y in values[i + 1:]:
            push(x, y)
    tail = sorted(out[head:], key=abs)
    return (out[:head] + tail)[:cap]


def _splitting_root(a_val, phi):
    """First candidate root d with a a norm from Q(sqrt(d)) and phi
    hyperbolic over Q(sqrt(d)); None when the bounded search misses."""
    an = localglobal.anisotropic_part_Q(phi)
    if an.dim == 0:
        return None
    for d_val in _kill_candidates(an):
        point = conic_point(d_val, a_val)
        if point is None:
            continue
        if localglobal.is_hyperbolic_quadfield(phi, d_val):
            return d_val, point
    return None


# ---------------------------------------------------------------------------
# one descent step: a root that is both a norm source and an isotropy source


@dataclass(frozen=True)
class NotFound:
    """Falsy marker for an exhausted bounded search.  Distinct from a
    disproof: no search failure here ever asserts non-existence."""

    reason: str = ""

    def __bool__(self):
        return False


@dataclass(frozen=True)
class BetaStep:
    """A root d with the target a norm from K(sqrt(d)) and the form's Witt
    index strictly increased there, plus the exact conic witness."""

    root: SquareClass
    witness: tuple
    witt_index: int

    def __iter__(self):
        return iter((self.root, self.witness, self.witt_index))


def beta_step(a, phi):
    """Find d with a = x^2 - d*y^2 solvable and phi gaining Witt index over
    Q(sqrt(d)).

    Candidates run over negated products of represented-value pairs of the
    anisotropic part (diagonal pairs first); each one is re-verified by a
    conic solve and a Witt index comparison, so a returned step is sound
    regardless of how the candidate was produced.  Returns a falsy NotFound
    when the bounded pool is exhausted.
    """
    field = phi.field
    _require_rational_base(field)
    an = localglobal.anisotropic_part_Q(phi)
    if an.dim < 2:
        raise FormIsSplit("no binary subform to descend through: anisotropic dimension %d" % an.dim)
    a = canonical_square_class(a, field)
    if not in_G(a, phi):
        raise NotASimilarityFactor("%s is not a similarity factor of the form" % a)
    a_val = Fraction(a.coeff)
    i_old = (phi.dim - an.dim) // 2
    for d_val in _kill_candidates(an):
        point = conic_point(d_val, a_val)
        if point is None:
            continue
        dim_new = localglobal.anisotropic_dim_quadfield(phi, d_val)
        i_new = (phi.dim - dim_new) // 2
        if i_new > i_old:
            return BetaStep(canonical_square_class(d_val, field), point, i_new)
    return NotFound("no candidate root passed both the conic solve and the Witt index check")


# ---------------------------------------------------------------------------
# combining two quadratic norm witnesses into a biquadratic one


_COMBINE_BOUND = 4


def _validate_norm_witness(c_val, u_val, witness):
    x, y = witness
    x, y = Fraction(x), Fraction(y)
    value = x * x - u_val * y * y
    if value == 0:
        raise ZeroElement("membership witness has zero norm")
    if squarefree_of_fraction(value) != squarefree_of_fraction(c_val):
        raise PreconditionFailed(
            "witness norm %s does not match %s modulo squares" % (value, c_val))
    return x, y, value


def biquadratic_combine(c, u, w, witness1, witness2, field=QQ, bound=None):
    """Element z of K(sqrt(u), sqrt(w)) with N(z) = c modulo squares.

    witness1 and witness2 are conic points certifying c as a norm from each
    quadratic subfield.  Candidates are seeded by signed sums of the
    normalized witnesses and extended by a bounded coordinate grid; every
    candidate is checked by exact norm evaluation, so the returned fragment
    never depends on the search heuristics.  The attestation on the returned
    NormPart is a placeholder for the caller to fill in.
    """
    _require_rational_base(field)
    bound = _COMBINE_BOUND if bound is None else bound
    c_cl = canonical_square_class(c, field)
    u_cl = canonical_square_class(u, field)
    w_cl = canonical_square_class(w, field)
    if u_cl.is_one() or w_cl.is_one():
        raise DegenerateExtension("adjoined roots must be nonsquares")
    c_val = Fraction(c_cl.coeff)
    u_val = Fraction(u_cl.coeff)
    w_val = Fraction(w_cl.coeff)
    if c_cl.is_one():
        tower = TwoExtensionTower(field, (u_cl, w_cl))
        return NormPart(tower, ((Fraction(1), Fraction(0)), (Fraction(0), Fraction(0))))
    if u_cl == w_cl:
        x, y, _ = _validate_norm_witness(c_val, u_val, witness1)
        return NormPart(TwoExtensionTower(field, (u_cl,)), (x, y))
    x1, y1, n1 = _validate_norm_witness(c_val, u_val, witness1)
    x2, y2, n2 = _validate_norm_witness(c_val, w_val, witness2)
    tower = TwoExtensionTower(field, (u_cl, w_cl))
    k1 = sqrt_fraction(n1 / c_val)
    k2 = sqrt_fraction(n2 / c_val)
    x1, y1 = x1 / k1, y1 / k1
    x2, y2 = x2 / k2, y2 / k2
    candidates = []
    for s1, s2 in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
        candidates.append(((s1 * x1 + s2 * x2, s1 * y1), (s2 * y2, Fraction(0))))
    grid = [Fraction(t) for t in range(-bound, bound + 1)]
    candidates.extend(
        ((g0, g1), (g2, g3))
        for g0, g1, g2, g3 in itertools.product(grid, repeat=4))
    for z in candidates:
        if all(_coord_is_zero(side) for side in z):
            continue
        try:
            value = _norm_down(field, tower.roots, z)
        except ZeroElement:
            continue
        if canonical_square_class(value, field) == c_cl:
            return NormPart(tower, z)
    raise CertificateSearchExhausted(
        "no biquadratic element with norm %s modulo squares within bound %d" % (c_cl, bound))


# ---------------------------------------------------------------------------
# certificate emitters


def _empty_certificate(field, a):
    return HypCertificate(field, a, (), note="square target, empty norm product")


def _ground_split_certificate(field, a):
    part = NormPart(TwoExtensionTower(field), a)
    return HypCertificate(field, a, (part,),
                          note="the form is already split over the ground field")


def pfister_hyp_certificate(a, pi):
    """Certificate that a similarity factor of a (possibly scaled) Pfister
    form is a norm from a single quadratic extension splitting it.

    Tower depth is at most 1: isotropy forces hyperbolicity for scaled
    Pfister forms, so one splitting root carries the whole certificate.
    """
    field = pi.field
    _require_rational_base(field)
    a = canonical_square_class(a, field)
    if not in_G(a, pi):
        raise NotASimilarityFactor("%s is not a similarity factor of the form" % a)
    if a.is_one():
        return _empty_certificate(field, a)
    if localglobal.is_hyperbolic_Q(pi):
        return _ground_split_certificate(field, a)
    hit = _splitting_root(Fraction(a.coeff), pi)
    if hit is None:
        raise CertificateSearchExhausted(
            "no single splitting root found; the input may not be a scaled Pfister form")
    d_val, point = hit
    tower = TwoExtensionTower(field, (canonical_square_class(d_val, field),))
    part = NormPart(tower, point)
    return HypCertificate(field, a, (part,),
                          note="one quadratic step splits the Pfister form")


def two_pfister_certificate(a, pi, rho, scalars=None):
    """Certificate for a similarity factor of c1*pi + c2*rho where pi and
    rho are Pfister forms of different fold.

    The factor restricts to each scaled piece; one splitting root per piece
    is found and the two norm witnesses are merged into a biquadratic
    element, so the tower depth is at most 2 (extension degree <= 4).
    """
    field = pi.field
    _require_rational_base(field)
    if rho.field != field:
        raise FieldMismatch("the two Pfister forms live over different fields")
    c1, c2 = scalars if scalars is not None else (1, 1)
    piece1 = scale(c1, pi)
    piece2 = scale(c2, rho)
    if piece1.dim == piece2.dim:
        raise PreconditionFailed(
            "the similarity intersection argument needs Pfister pieces of different fold")
    if piece1.dim > piece2.dim:
        piece1, piece2 = piece2, piece1
    phi = orthogonal_sum(piece1, piece2)
    a = canonical_square_class(a, field)
    if not in_G(a, phi):
        raise NotASimilarityFactor("%s is not a similarity factor of the sum" % a)
    if a.is_one():
        return _empty_certificate(field, a)
    if localglobal.is_hyperbolic_Q(phi):
        return _ground_split_certificate(field, a)
    a_val = Fraction(a.coeff)
    hit = _splitting_root(a_val, phi)
    if hit is not None:
        d_val, point = hit
        tower = TwoExtensionTower(field, (canonical_square_class(d_val, field),))
        part = NormPart(tower, point)
        return HypCertificate(field, a, (part,),
                              note="a single quadratic step splits both pieces")
    if not (in_G(a, piece1) and in_G(a, piece2)):
        raise NotASimilarityFactor(
            "the factor does not restrict to both Pfister pieces")
    hit1 = _splitting_root(a_val, piece1)
    hit2 = _splitting_root(a_val, piece2)
    if hit1 is None or hit2 is None:
        raise CertificateSearchExhausted(
            "no splitting root found for one of the Pfister pieces")
    d1, wit1 = hit1
    d2, wit2 = hit2
    if d1 == d2:
        tower = TwoExtensionTower(field, (canonical_square_class(d1, field),))
        part = NormPart(tower, wit1)
        return HypCertificate(field, a, (part,),
                              note="both pieces split over the same quadratic extension")
    fragment = biquadratic_combine(a, d1, d2, wit1, wit2, field=field)
    att = HypAttestation("symbolic", ((piece1.entries, (1, 0)), (piece2.entries, (0, 1))))
    part = replace(fragment, attestation=att)
    return HypCertificate(field, a, (part,),
                          note="the two pieces split over the two legs of a biquadratic tower")


def _peel_root(an, d_val):
    """Split an anisotropic form as (pairs t*<1,-d>, complement psi) where
    psi stays anisotropic over Q(sqrt(d)).

    Peels one binary piece per round through represented-value candidates;
    None when the bounded search cannot realize a peel that the quadratic
    Witt index says must exist.
    """
    field = an.field
    if an.dim == 0:
        return [], an
    target = localglobal.anisotropic_dim_quadfield(an, d_val)
    remaining = an
    pairs = []
    while remaining.dim > target:
        progressed = False
        for t in _rep_values(remaining):
            pair = quadform(field, [t, -d_val * t])
            rest = localglobal.anisotropic_part_Q(orthogonal_sum(remaining, pair.neg()))
            if rest.dim == remaining.dim - 2:
                pairs.append(pair)
                remaining = rest
                progressed = True
                break
        if not progressed:
            return None
    return pairs, remaining


def height2_certificate(a, phi):
    """Certificate for a similarity factor of a form whose anisotropic part
    dies after at most two strict Witt index increases.

    Follows a splitting root d, peels the part of the form annihilated by
    Q(sqrt(d)), then splits the surviving complement over a second root and
    merges the two norm witnesses; tower depth at most 2.
    """
    field = phi.field
    _require_rational_base(field)
    a = canonical_square_class(a, field)
    if not in_G(a, phi):
        raise NotASimilarityFactor("%s is not a similarity factor of the form" % a)
    if a.is_one():
        return _empty_certificate(field, a)
    if localglobal.is_hyperbolic_Q(phi):
        return _ground_split_certificate(field, a)
    step = beta_step(a, phi)
    if not step:
        raise CertificateSearchExhausted("no first descent root found")
    d_val = Fraction(step.root.coeff)
    peeled = _peel_root(localglobal.anisotropic_part_Q(phi), d_val)
    if peeled is None:
        raise DecompositionNotFound(
            "no diagonal-aligned decomposition along the first root within the search bound")
    pairs, psi = peeled
    if psi.dim == 0:
        part = NormPart(TwoExtensionTower(field, (step.root,)), step.witness)
        return HypCertificate(field, a, (part,),
                              note="a single quadratic step splits the form")
    if not in_G(a, psi):
        raise DecompositionNotFound(
            "the complement does not share the similarity factor; height above 2?")
    hit = _splitting_root(Fraction(a.coeff), psi)
    if hit is None:
        raise DecompositionNotFound(
            "no single root splits the complement within the search bound")
    e_val, wit2 = hit
    if squarefree_of_fraction(e_val) == squarefree_of_fraction(d_val):
        raise DecompositionNotFound(
            "the complement splits only over the first root, contradicting its residual anisotropy")
    fragment = biquadratic_combine(a, d_val, e_val, step.witness, wit2, field=field)
    theta_entries = tuple(itertools.chain.from_iterable(p.entries for p in pairs))
    att = HypAttestation("symbolic", ((theta_entries, (1, 0)), (psi.entries, (0, 1))))
    part = replace(fragment, attestation=att)
    return HypCertificate(field, a, (part,),
                          note="two-step decomposition: peeled pairs die over the first root, "
                               "the complement over the second")


def torsion_hyp_certificate(a, phi):
    """Certificate for an arbitrary target over a torsion form with trivial
    discriminant and even dimension.

    Over the rationals such a form has anisotropic dimension 0 or 4, so one
    descent root always finishes: after the Witt index increases, trivial
    discriminant leaves no room for a binary survivor.
    """
    field = phi.field
    _require_rational_base(field)
    inv = localglobal.local_invariants(phi)
    if any(s != 0 for s in inv.signatures.values()):
        raise NotTorsion("the form has a nonzero signature")
    if phi.dim % 2 or not discriminant(phi).is_one():
        raise NotTorsion("the torsion route needs even dimension and trivial discriminant")
    a = canonical_square_class(a, field)
    if a.is_one():
        return _empty_certificate(field, a)
    if localglobal.is_hyperbolic_Q(phi):
        return _ground_split_certificate(field, a)
    step = beta_step(a, phi)
    if not step:
        raise CertificateSearchExhausted("no descent root found for the torsion recursion")
    d_val = Fraction(step.root.coeff)
    if not localglobal.is_hyperbolic_quadfield(phi, d_val):
        raise DepthLimitExceeded(
            "one quadratic step leaves the form alive; deeper towers are beyond the decision "
            "layer (partial trace: root %s, Witt index %d)" % (step.root, step.witt_index))
    part = NormPart(TwoExtensionTower(field, (step.root,)), step.witness)
    return HypCertificate(field, a, (part,),
                          note="trivial discriminant forces a one-step split")


def in_G_H_certificate(a, phi):
    """Certificate that a similarity factor is a product of norms modulo
    squares, for an arbitrary form over the plain rationals.

    Odd dimension admits only squares.  Otherwise the discriminant extension
    absorbs the factor, its complement in the fundamental-ideal filtration
    is split over a second root, and the two witnesses merge; routes that
    would need a tower deeper than 2 raise DepthLimitExceeded.
    """
    field = phi.field
    _require_rational_base(field)
    a = canonical_square_class(a, field)
    if phi.dim % 2:
        if a.is_one():
            return HypCertificate(field, a, (),
                                  note="odd dimension: only squares are similarity factors")
        raise NotASimilarityFactor("odd-dimensional forms admit only square similarity factors")
    if not in_G(a, phi):
        raise NotASimilarityFactor("%s is not a similarity factor of the form" % a)
    if a.is_one():
        return _empty_certificate(field, a)
    if localglobal.is_hyperbolic_Q(phi):
        return _ground_split_certificate(field, a)
    inv = localglobal.local_invariants(phi)
    torsion = all(s == 0 for s in inv.signatures.values())
    d_class = discriminant(phi)
    if torsion and d_class.is_one():
        return torsion_hyp_certificate(a, phi)
    a_val = Fraction(a.coeff)
    hit = _splitting_root(a_val, phi)
    if hit is not None:
        d_val, point = hit
        tower = TwoExtensionTower(field, (canonical_square_class(d_val, field),))
        part = NormPart(tower, point)
        return HypCertificate(field, a, (part,),
                              note="a single quadratic step splits the form")
    if d_class.is_one():
        raise DepthLimitExceeded(
            "trivial discriminant with nonzero signature: the splitting routes need towers "
            "beyond depth 2")
    d_val = Fraction(d_class.coeff)
    wit_d = conic_point(d_val, a_val)
    if wit_d is None:
        raise NotASimilarityFactor(
            "the factor is not a norm from the discriminant extension, contradicting the "
            "similarity hypothesis")
    pi_form = quadform(field, [1, -d_val])
    rho = localglobal.anisotropic_part_Q(orthogonal_sum(phi, pi_form.neg()))
    if rho.dim and not in_G(a, rho):
        raise NotASimilarityFactor(
            "the factor does not restrict to the fundamental-ideal complement")
    w_root_val = None
    hit2 = _splitting_root(a_val, rho) if rho.dim else None
    if hit2 is not None and squarefree_of_fraction(hit2[0]) != squarefree_of_fraction(d_val):
        w_root_val, w_wit, rho_mask = hit2[0], hit2[1], (0, 1)
    else:
        neg_a = squarefree_of_fraction(-a_val)
        neg_ad = squarefree_of_fraction(-a_val * d_val)
        if neg_a != 1 and neg_a != squarefree_of_fraction(d_val):
            if localglobal.is_hyperbolic_quadfield(rho, neg_a):
                w_root_val, w_wit, rho_mask = -a_val, (Fraction(0), Fraction(1)), (0, 1)
            elif neg_ad != 1 and localglobal.is_hyperbolic_quadfield(rho, neg_ad):
                w_root_val, w_wit, rho_mask = -a_val, (Fraction(0), Fraction(1)), (1, 1)
    if w_root_val is None:
        raise DepthLimitExceeded(
            "the fundamental-ideal complement survives every depth-2 route")
    fragment = biquadratic_combine(a, d_val, w_root_val, wit_d, w_wit, field=field)
    att = HypAttestation("symbolic", ((pi_form.entries, (1, 0)), (rho.entries, rho_mask)))
    part = replace(fragment, attestation=att)
    return HypCertificate(field, a, (part,),
                          note="discriminant step plus a complement-splitting step")


# ---------------------------------------------------------------------------
# norm-intersection queries against multiquadratic extensions


NOT_IN_INTERSECTION = "NotInIntersection"
IN_INTERSECTION_WITNESSED = "InIntersectionWitnessed"
FULL_NORM_WITNESS_FOUND = "FullNormWitnessFound"
NON_MEMBERSHIP_CITED = "NonMembershipCitedAssumption"


def _describe_witness(w):
    if isinstance(w, NormPart):
        return {"tower": w.tower.describe(), "element": _describe_coords(w.element)}
    if isinstance(w, tuple) and len(w) == 2 and isinstance(w[0], SquareClass):
        return {"root": str(w[0]), "point": _describe_coords(tuple(w[1]))}
    if hasattr(w, "describe"):
        return w.describe()
    return str(w)


@dataclass(frozen=True)
class LambdaReport:
    """Where a queried class sits relative to the intersection of the
    quadratic norm groups of K(sqrt(r_i)) and the full norm group of their
    compositum; statuses are mutually exclusive and witnesses re-verify."""

    roots: tuple
    d: SquareClass
    status: str
    witnesses: tuple = ()
    cited: object = None
    note: str = ""

    def describe(self):
        out = {
            "roots": [str(r) for r in self.roots],
            "d": str(self.d),
            "status": self.status,
            "witnesses": [_describe_witness(w) for w in self.witnesses],
            "note": self.note,
        }
        if self.cited is not None:
            out["cited"] = self.cited.describe()
        return out


def _nest(flat):
    if len(flat) == 1:
        return flat[0]
    half = len(flat) // 2
    return (_nest(flat[:half]), _nest(flat[half:]))


def _full_norm_search(field, classes, d_cl, grid=(0, 1, -1, 2), cap=80000):
    """Bounded grid search for a tower element whose norm matches d_cl."""
    tower = TwoExtensionTower(field, classes)
    leaves = 2 ** len(classes)
    count = 0
    for flat in itertools.product([Fraction(g) for g in grid], repeat=leaves):
        count += 1
        if count > cap:
            return None
        if not any(flat):
            continue
        element = _nest(flat)
        try:
            value = _norm_down(field, tower.roots, element)
        except ZeroElement:
            continue
        if canonical_square_class(value, field) == d_cl:
            return NormPart(tower, element)
    return None


def lambda_query(roots, d, field=None, instance=None):
    """Locate d relative to the quadratic norm groups of the K(sqrt(r_i))
    and the full norm group of their compositum L.

    Over the plain rationals: one conic solve per root (any failure settles
    NotInIntersection with the obstruction place); for at most two roots a
    full-norm witness always exists and is produced; for deeper towers a
    bounded search either finds one or reports InIntersectionWitnessed
    without claiming non-membership.  A carried function-field instance
    answers through its stored witnesses and its cited assumption.
    """
    if instance is not None:
        return _lambda_from_instance(roots, d, instance)
    field = QQ if field is None else field
    _require_rational_base(field)
    classes = tuple(canonical_square_class(r, field) for r in roots)
    if multiquad_degree(classes, field) != 2 ** len(classes):
        raise DegenerateExtension("the roots generate an extension of degree below 2^r")
    d_cl = canonical_square_class(d, field)
    if d_cl.is_one():
        return LambdaReport(classes, d_cl, FULL_NORM_WITNESS_FOUND,
                            note="square classes are norms from every extension")
    d_val = Fraction(d_cl.coeff)
    points = []
    for c in classes:
        point = conic_point(Fraction(c.coeff), d_val)
        if point is None:
            place = conic_obstruction(Fraction(c.coeff), d_val)
            return LambdaReport(
                classes, d_cl, NOT_IN_INTERSECTION, witnesses=tuple(points),
                note="not a norm from the sqrt(%s) extension (local obstruction at %s)"
                     % (c, place))
        points.append((c, point))
    r = len(classes)
    if r == 0:
        part = NormPart(TwoExtensionTower(field), d_cl)
        return LambdaReport(classes, d_cl, FULL_NORM_WITNESS_FOUND, witnesses=(part,),
                            note="trivial extension")
    if r == 1:
        part = NormPart(TwoExtensionTower(field, classes), points[0][1])
        return LambdaReport(classes, d_cl, FULL_NORM_WITNESS_FOUND, witnesses=(part,))
    if r == 2:
        part = biquadratic_combine(d_cl, classes[0], classes[1],
                                   points[0][1], points[1][1], field=field)
        return LambdaReport(classes, d_cl, FULL_NORM_WITNESS_FOUND, witnesses=(part,),
                            note="biquadratic combination of the two conic witnesses")
    part = _full_norm_search(field, classes, d_cl)
    if part is not None:
        return LambdaReport(classes, d_cl, FULL_NORM_WITNESS_FOUND, witnesses=(part,))
    return LambdaReport(
        classes, d_cl, IN_INTERSECTION_WITNESSED, witnesses=tuple(points),
        note="in every quadratic norm group; the bounded full-norm search found no witness")


def _lambda_from_instance(roots, d, instance):
    from .functionfield import QS, SivatskiInstance

    if not isinstance(instance, SivatskiInstance):
        raise PreconditionFailed("instance queries need a generated function-field instance")
    inst_roots = tuple(instance.roots)
    q_roots = tuple(canonical_square_class(r, QS) for r in roots)
    if q_roots != inst_roots:
        raise PreconditionFailed("queried roots do not match the carried instance")
    d_cl = canonical_square_class(d, QS)
    if d_cl != canonical_square_class(instance.d, QS):
        raise PreconditionFailed("queried element does not match the carried instance")
    if multiquad_degree(q_roots, QS) != 2 ** len(q_roots):
        raise DegenerateExtension("the roots generate an extension of degree below 2^r")
    d_val = Fraction(instance.d)
    for a_i, point in zip((instance.a1, instance.a2), instance.points):
        x, y = Fraction(point[0]), Fraction(point[1])
        value = x * x - Fraction(a_i) * y * y
        if value == 0 or squarefree_of_fraction(value) != squarefree_of_fraction(d_val):
            raise PreconditionFailed("a stored constant-root membership point fails to verify")
    for wit in instance.witnesses:
        if not wit.verify():
            raise PreconditionFailed("a stored polynomial membership witness fails to verify")
    return LambdaReport(
        q_roots, d_cl, NON_MEMBERSHIP_CITED,
        witnesses=tuple(instance.points) + tuple(instance.witnesses),
        cited=instance.cited,
        note="membership in every quadratic norm group is witnessed exactly; exclusion from "
             "the full norm group rests on the cited assumption")


# ---------------------------------------------------------------------------
# the verifier: everything a certificate claims, re-checked from scratch


@dataclass(frozen=True)
class VerificationReport:
    """Boolean-like verdict; a False verdict carries diagnostics."""

    ok: bool
    diagnostics: tuple = ()

    def __bool__(self):
        return self.ok

    def describe(self):
        return {"ok": self.ok, "diagnostics": list(self.diagnostics)}


def _safe_hyperbolic(phi):
    try:
        return henselian.is_hyperbolic_tower(phi)
    except WittkitError:
        return None


def _decide_single_root(phi, s):
    """Hyperbolicity of phi over field(sqrt(s)) where the layers decide it;
    None beyond that support."""
    field = phi.field
    try:
        if not field.steps:
            if isinstance(field.base, Rationals):
                return localglobal.is_hyperbolic_quadfield(phi, Fraction(s.coeff))
            if isinstance(field.base, PrimeField):
                # every base unit is a square upstairs, so parity decides
                return phi.dim % 2 == 0
            return None
        if any(s.exps):
            _, rewritten = henselian.adjoin_sqrt_odd(phi, s)
            return _safe_hyperbolic(rewritten)
        pieces = henselian.base_residue_pieces(phi)
        if isinstance(field.base, Rationals):
            return all(
                localglobal.is_hyperbolic_quadfield(piece, Fraction(s.coeff))
                for piece in pieces.values())
        if isinstance(field.base, PrimeField):
            return all(piece.dim % 2 == 0 for piece in pieces.values())
        return None
    except WittkitError:
        return None


def _decide_over_tower(phi, tower):
    if tower.depth == 0:
        return _safe_hyperbolic(phi)
    if tower.depth == 1:
        return _decide_single_root(phi, tower.roots[0])
    return None


def _check_attestation(field, phi, part, label, diags):
    att = part.attestation
    depth = part.tower.depth
    if att.kind == "decided":
        verdict = _decide_over_tower(phi, part.tower)
        if verdict is None:
            diags.append("%s: decided attestation is beyond the decision layers (depth %d)"
                         % (label, depth))
        elif not verdict:
            diags.append("%s: the form stays non-hyperbolic over the attested tower" % label)
        return
    if att.kind != "symbolic":
        diags.append("%s: unknown attestation kind %r" % (label, att.kind))
        return
    pieces = []
    for j, item in enumerate(att.parts):
        try:
            entries, mask = item
            piece = QuadForm(field, tuple(entries))
        except (WittkitError, TypeError, ValueError) as exc:
            diags.append("%s piece %d: malformed (%s)" % (label, j, exc))
            return
        pieces.append(piece)
        if len(mask) != depth or not all(m in (0, 1) for m in mask):
            diags.append("%s piece %d: mask does not match the tower" % (label, j))
            continue
        s = one_class(field)
        for flag, root in zip(mask, part.tower.roots):
            if flag:
                s = s.times(root)
        if s.is_one():
            verdict = _safe_hyperbolic(piece)
            if verdict is None:
                diags.append("%s piece %d: ground-field split cannot be re-decided" % (label, j))
            elif not verdict:
                diags.append("%s piece %d: claimed ground-field split fails" % (label, j))
            continue
        if piece.dim == 2 and piece.entries[0].times(piece.entries[1]).neg() == s:
            continue  # binary piece with discriminant equal to the adjoined root
        verdict = _decide_single_root(piece, s)
        if verdict is None:
            diags.append("%s piece %d: split claim is beyond the decision layers" % (label, j))
        elif not verdict:
            diags.append("%s piece %d: the piece stays non-hyperbolic over its root" % (label, j))
    total = phi
    for piece in pieces:
        total = orthogonal_sum(total, piece.neg())
    verdict = _safe_hyperbolic(total)
    if verdict is None:
        diags.append("%s: Witt equivalence of the pieces cannot be re-decided" % label)
    elif not verdict:
        diags.append("%s: the pieces are not Witt-equivalent to the form" % label)


def verify_certificate(cert, phi):
    """Re-check a hyperbolicity certificate against a form from scratch.

    Confirms that every adjoined root is a nonsquare at its level, that the
    norm chain multiplies to the target modulo squares, that each claimed
    split re-decides (or holds symbolically through a matching
    discriminant), and that the target is a similarity factor wherever that
    is decidable.  Never raises; a False verdict carries diagnostics.
    """
    if not isinstance(cert, HypCertificate) or not isinstance(phi, QuadForm):
        return VerificationReport(False, ("not a certificate/form pair",))
    if cert.field != phi.field:
        return VerificationReport(
            False, ("FieldMismatch: certificate and form live over different fields",))
    field = cert.field
    diags = []
    for k, part in enumerate(cert.parts):
        label = "part %d" % k
        try:
            if multiquad_degree(part.tower.roots, field) != 2 ** part.tower.depth:
                diags.append(
                    "SquareAdjoined: %s tower collapses, a root is a square at its level" % label)
        except WittkitError as exc:
            diags.append("SquareAdjoined: %s tower is malformed (%s)" % (label, exc))
    try:
        total = cert.norm_product()
        if total != cert.target:
            diags.append("NormMismatch: the norm chain gives %s, certificate targets %s"
                         % (total, cert.target))
    except WittkitError as exc:
        diags.append("NormMismatch: norm chain fails to evaluate (%s)" % exc)
    for k, part in enumerate(cert.parts):
        _check_attestation(field, phi, part, "part %d" % k, diags)
    try:
        if not in_G(cert.target, phi):
            diags.append("similarity audit: the target is not a similarity factor of the form")
    except WittkitError:
        pass
    return VerificationReport(not diags, tuple(diags))


# ---------------------------------------------------------------------------
# sampled group identities


def odd_multiplier_check(phi, psi, samples):
    """Sampled confirmation that tensoring with an odd-dimensional form
    leaves the similarity group unchanged."""
    if psi.dim % 2 == 0:
        raise PreconditionFailed("the multiplier form must have odd dimension")
    product = tensor(phi, psi)
    return all(in_G(x, product) == in_G(x, phi) for x in samples)


def ap_trick_check(pi, rho, samples, witness=None):
    """Sampled confirmation that the similarity factors of pi + rho are
    exactly the common factors of the two summands.

    Requires rho to sit in a power of the fundamental ideal deep enough for
    dim(pi): the smallest n with dim(pi) < 2^n.
    """
    if pi.field != rho.field:
        raise FieldMismatch("the two forms live over different fields")
    if pi.dim:
        n = pi.dim.bit_length()
        if in_In(rho, n, witness) != "yes":
            raise PreconditionFailed(
                "the second form is not exhibited in the required ideal power (n=%d)" % n)
    total = orthogonal_sum(pi, rho)
    return all(in_G(x, total) == (in_G(x, pi) and in_G(x, rho)) for x in samples)
