"""Decision procedures over the base layers: Hilbert symbols, local
invariants, Hasse-Minkowski isotropy / hyperbolicity / anisotropic dimension
over Q and Q(sqrt(d)), and finite-field decisions.

Everything is exact.  Odd places use the tame closed form; the dyadic place
of Q uses the classical closed form; dyadic places of Q(sqrt(d)) are decided
by exhaustive search modulo pi^N with the Hensel precision bound
N = 2*v(4) + 1, which keeps the search space at most a megapair.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    UnsupportedField,
    UnsupportedLocalField,
    ZeroArgument,
    ZeroSlot,
)
from .fields import (
    QuadField,
    QuadFieldPrime,
    QuadNum,
    RationalPrime,
    Rationals,
    RealEmbedding,
    SquareClass,
    canonical_square_class,
    split_prime_in_quadratic,
)
from .forms import QuadForm, hyperbolic, quadform
from .numutil import (
    factorint,
    is_square_fraction,
    legendre,
    sqrt_mod_2_power,
    sqrt_mod_prime_power,
    squarefree_of_fraction,
    unit_mod,
    vp,
)


def _as_fraction(x):
    if isinstance(x, SquareClass):
        return Fraction(x.coeff)
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    raise UnsupportedField("expected a rational value, got %r" % (x,))


def _frac_mod(q, m):
    """Residue of a rational with denominator prime to m."""
    q = Fraction(q)
    return q.numerator % m * pow(q.denominator % m, -1, m) % m


def _leg_unit(q, p):
    """Legendre symbol of the unit part of a nonzero rational at an odd p."""
    return legendre(unit_mod(q, p, 1), p)


def _eps2(u):
    # (u-1)/2 mod 2 for odd u
    return (u - 1) // 2 % 2


def _omega2(u):
    # (u^2-1)/8 mod 2 for odd u
    return (u * u - 1) // 8 % 2


def _hilbert_Q2(a, b):
    alpha, beta = vp(a, 2), vp(b, 2)
    u = unit_mod(a, 2, 3)  # unit part mod 8
    w = unit_mod(b, 2, 3)
    exp = _eps2(u) * _eps2(w) + alpha * _omega2(w) + beta * _omega2(u)
    return -1 if exp % 2 else 1


def _hilbert_Qp(a, b, p):
    alpha, beta = vp(a, p), vp(b, p)
    sign = 1
    if alpha % 2 and beta % 2 and (p - 1) // 2 % 2:
        sign = -sign
    if beta % 2:
        sign *= _leg_unit(a, p)
    if alpha % 2:
        sign *= _leg_unit(b, p)
    return sign


def hilbert_symbol(a, b, place, d=None):
    """Hilbert symbol (a, b) at a place of Q or of Q(sqrt(d)).

    For places of Q(sqrt(d)) pass the discriminant as ``d``; the arguments
    may then be QuadNum values of that field (rationals are coerced).
    """
    if isinstance(place, QuadFieldPrime) or (
        isinstance(place, RealEmbedding) and place.signs
    ):
        if d is None:
            raise UnsupportedLocalField("a quadratic-field place needs the field datum d")
        return quad_context(d).symbol(a, b, place)
    if isinstance(a, QuadNum) or isinstance(b, QuadNum):
        raise UnsupportedLocalField("QuadNum arguments need a quadratic-field place")
    a, b = _as_fraction(a), _as_fraction(b)
    if a == 0 or b == 0:
        raise ZeroArgument("hilbert symbol needs nonzero arguments")
    if isinstance(place, RealEmbedding):
        return -1 if a < 0 and b < 0 else 1
    if isinstance(place, RationalPrime):
        if place.p == 2:
            return _hilbert_Q2(a, b)
        return _hilbert_Qp(a, b, place.p)
    raise UnsupportedLocalField("unsupported place %r" % (place,))


def symbol_support(values):
    """Finite places of Q that can carry a nontrivial symbol or squareness
    datum for the given nonzero rationals: 2 and every odd prime dividing a
    numerator or denominator."""
    support = {2}
    for x in values:
        x = _as_fraction(x)
        support.update(factorint(x.numerator * x.denominator))
    support.discard(1)
    return sorted(support)


def places_Q(values):
    return [RealEmbedding()] + [RationalPrime(p) for p in symbol_support(values)]


def _is_square_Qp(q, p):
    """Is the nonzero rational q a square in Q_p?"""
    if vp(q, p) % 2:
        return False
    if p == 2:
        return unit_mod(q, 2, 3) == 1
    return _leg_unit(q, p) == 1


# ---------------------------------------------------------------------------
# local invariants over Q


@dataclass(frozen=True)
class LocalInvariants:
    """Classifying data of a form: dimension, signed discriminant, the Hasse
    symbol at each place of the finite support, and real signatures."""

    dim: int
    disc: SquareClass
    hasse: dict
    signatures: dict

    def hasse_at(self, place):
        return self.hasse.get(place, 1)


def _entry_fractions(phi):
    """Diagonal entries of a rational form as Fractions.

    Accepts a Form over the plain rationals or a bare sequence of nonzero
    rational numbers."""
    if hasattr(phi, "field"):
        if not isinstance(phi.field.base, Rationals) or phi.field.steps:
            raise UnsupportedField("rational-base forms only")
        return [Fraction(e.coeff) for e in phi.entries]
    entries = [Fraction(e) for e in phi]
    if any(e == 0 for e in entries):
        raise ZeroSlot("diagonal entries must be nonzero")
    return entries


def _hasse_at(entries, place, d=None):
    out = 1
    for i in range(len(entries)):
        for j in range(i + 1, len(entries)):
            out *= hilbert_symbol(entries[i], entries[j], place, d=d)
    return out


def local_invariants(phi):
    """Local invariants of a form over Q."""
    from .forms import discriminant

    entries = _entry_fractions(phi)
    places = places_Q(entries) if entries else places_Q([Fraction(1)])
    hasse = {}
    for place in places:
        if not isinstance(place, RealEmbedding):
            hasse[place] = _hasse_at(entries, place)
    hasse[RealEmbedding()] = _hasse_at(entries, RealEmbedding())
    sig = sum(1 if e > 0 else -1 for e in entries)
    return LocalInvariants(
        dim=len(entries),
        disc=discriminant(phi),
        hasse=hasse,
        signatures={RealEmbedding(): sig},
    )


# ---------------------------------------------------------------------------
# Hasse-Minkowski decisions over Q


def is_isotropic_Q(phi):
    """Isotropy over Q by the per-dimension local criteria."""
    entries = _entry_fractions(phi)
    n = len(entries)
    if n <= 1:
        return False
    det = Fraction(1)
    for e in entries:
        det *= e
    if n == 2:
        return is_square_fraction(-det)
    sig = sum(1 if e > 0 else -1 for e in entries)
    if abs(sig) == n:
        return False
    if n >= 5:
        return True
    places = places_Q(entries)
    for place in places:
        if isinstance(place, RealEmbedding):
            continue
        eps = _hasse_at(entries, place)
        p = place.p
        if n == 3:
            md = -det
            minus_one_minus_d = (
                _hilbert_Q2(Fraction(-1), md) if p == 2 else _hilbert_Qp(Fraction(-1), md, p)
            )
            if eps != minus_one_minus_d:
                return False
        else:  # n == 4
            if _is_square_Qp(det, p):
                ref = _hilbert_Q2(Fraction(-1), Fraction(-1)) if p == 2 else _hilbert_Qp(
                    Fraction(-1), Fraction(-1), p
                )
                if eps != ref:
                    return False
    return True


def is_hyperbolic_Q(phi):
    """Hyperbolicity over Q: same classifying invariants as m x H."""
    entries = _entry_fractions(phi)
    n = len(entries)
    if n % 2:
        return False
    if n == 0:
        return True
    det = Fraction(1)
    for e in entries:
        det *= e
    ref_entries = [Fraction(1), Fraction(-1)] * (n // 2)
    if squarefree_of_fraction(det) != squarefree_of_fraction(Fraction((-1) ** (n // 2))):
        return False
    sig = sum(1 if e > 0 else -1 for e in entries)
    if sig != 0:
        return False
    for place in places_Q(entries):
        if _hasse_at(entries, place) != _hasse_at(ref_entries, place):
            return False
    return True


class _StageData:
    """Witt-class invariant data after removing k hyperbolic planes."""

    __slots__ = ("det", "hasse", "sig", "places")

    def __init__(self, det, hasse, sig, places):
        self.det = det
        self.hasse = hasse
        self.sig = sig
        self.places = places

    def peel(self):
        new_det = squarefree_of_fraction(-self.det)
        hasse = {}
        for place, val in self.hasse.items():
            hasse[place] = val * hilbert_symbol(Fraction(new_det), Fraction(-1), place)
        return _StageData(new_det, hasse, self.sig, self.places)


def _stage_from_entries(entries):
    det = Fraction(1)
    for e in entries:
        det *= e
    places = [p for p in places_Q(entries) if not isinstance(p, RealEmbedding)]
    hasse = {p: _hasse_at(entries, p) for p in places}
    sig = sum(1 if e > 0 else -1 for e in entries)
    return _StageData(squarefree_of_fraction(det), hasse, sig, places)


def _sig_det_consistent(r, det, sig):
    # |sig| <= r, parity match, and the real sign of det fixed by sig
    if abs(sig) > r or (r - sig) % 2:
        return False
    negatives = (r - sig) // 2
    det_sign = -1 if det < 0 else 1
    return det_sign == (-1) ** negatives


def _stage_anisotropic_Q(r, stage):
    """Does an anisotropic rational form of dimension r with this stage data
    exist?  Assumes the data comes from an honest Witt class."""
    D, sig = stage.det, stage.sig
    if not _sig_det_consistent(r, D, sig):
        return False
    if r == 0:
        return False
    if r == 1:
        return all(v == 1 for v in stage.hasse.values())
    if r == 2:
        if is_square_fraction(Fraction(-D)):
            return False
        for place, val in stage.hasse.items():
            if val == -1 and _is_square_Qp(Fraction(-D), place.p):
                return False
        return True
    if r == 3:
        if abs(sig) == 3:
            return True
        for place in stage.places:
            ref = hilbert_symbol(Fraction(-1), Fraction(-D), place)
            if stage.hasse.get(place, 1) != ref:
                return True
        return False
    if r == 4:
        if abs(sig) == 4:
            return True
        for place in stage.places:
            if _is_square_Qp(Fraction(D), place.p):
                ref = hilbert_symbol(Fraction(-1), Fraction(-1), place)
                if stage.hasse.get(place, 1) != ref:
                    return True
        return False
    return abs(sig) == r


def anisotropic_dim_Q(phi):
    """Dimension of the anisotropic kernel, computed from the Witt-class
    invariants by peeling virtual hyperbolic planes."""
    entries = _entry_fractions(phi)
    n = len(entries)
    stage = _stage_from_entries(entries)
    for k in range(n // 2 + 1):
        r = n - 2 * k
        if r == 0:
            return 0
        if _stage_anisotropic_Q(r, stage):
            return r
        stage = stage.peel()
    return 0


# ---------------------------------------------------------------------------
# realization of an anisotropic part over Q


def _inv_realizable(r, det, hasse, sig):
    """Do the data (r, det, hasse, sig) belong to some rational form?"""
    if not _sig_det_consistent(r, det, sig):
        return False
    if r == 0:
        return squarefree_of_fraction(det) == 1 and all(v == 1 for v in hasse.values())
    if r == 1:
        return all(v == 1 for v in hasse.values())
    if r == 2:
        for place, val in hasse.items():
            if val == -1 and _is_square_Qp(Fraction(-det), place.p):
                return False
        return True
    return True


_REALIZE_BUDGET = 40000


def realize_form_Q(r, det, hasse, sig, field):
    """Construct a rational diagonal form with the given classifying data,
    or None if the bounded search misses.  det is a squarefree int, hasse a
    map on finite places (missing means +1), sig an integer."""
    support = {2} | set(factorint(det))
    for place in hasse:
        support.add(place.p)
    primes = sorted(support)
    pool = [1]
    for p in primes:
        pool = pool + [x * p for x in pool]
    pool = sorted(set(pool) | {x * q for x in pool for q in (3, 5, 7)})
    candidates = []
    for x in sorted(pool):
        candidates.extend((x, -x))

    budget = [_REALIZE_BUDGET]

    def go(r, det, hasse, sig):
        if budget[0] <= 0:
            return None
        if r == 0:
            return []
        if r == 1:
            a = Fraction(det)
            places = set(hasse) | {RationalPrime(p) for p in symbol_support([a])}
            for place in places:
                if hasse.get(place, 1) != 1:
                    return None
            return [a] if (a > 0) == (sig > 0) else None
        for a in candidates:
            budget[0] -= 1
            new_sig = sig - (1 if a > 0 else -1)
            new_det = squarefree_of_fraction(Fraction(det) / a)
            places = set(hasse) | {
                RationalPrime(p) for p in symbol_support([Fraction(a), Fraction(det)])
            }
            new_hasse = {}
            ok_h = True
            for place in places:
                val = hasse.get(place, 1) * hilbert_symbol(Fraction(a), Fraction(new_det), place)
                new_hasse[place] = val
            if not _inv_realizable(r - 1, new_det, new_hasse, new_sig):
                continue
            rest = go(r - 1, new_det, new_hasse, new_sig)
            if rest is not None:
                return [Fraction(a)] + rest
        return None

    entries = go(r, det, dict(hasse), sig)
    if entries is None or field is None:
        return entries
    return quadform(field, entries)


def anisotropic_part_Q(phi):
    """Best-effort construction of the anisotropic part over Q (None when
    the bounded realization search misses)."""
    entries = _entry_fractions(phi)
    as_form = hasattr(phi, "field")
    n = len(entries)
    stage = _stage_from_entries(entries)
    r = n
    for k in range(n // 2 + 1):
        r = n - 2 * k
        if r == 0 or _stage_anisotropic_Q(r, stage):
            break
        stage = stage.peel()
    if r == 0:
        return QuadForm(phi.field, ()) if as_form else []
    part = realize_form_Q(r, stage.det, stage.hasse, stage.sig, None)
    if part is None:
        return None
    # postcondition: right class and genuinely anisotropic
    if anisotropic_dim_Q(part) != r:
        return None
    if not is_hyperbolic_Q(entries + [-e for e in part]):
        return None
    return quadform(phi.field, part) if as_form else part


# ---------------------------------------------------------------------------
# finite fields


def is_isotropic_Fp(phi):
    """Isotropy over F_p (p odd): dim >= 3 always; dim 2 iff the signed
    discriminant is trivial; dim <= 1 never."""
    from .forms import discriminant

    n = phi.dim
    if n >= 3:
        return True
    if n <= 1:
        return False
    return discriminant(phi).is_one()


def witt_index_Fp(phi):
    from .forms import discriminant

    n = phi.dim
    if n % 2:
        return (n - 1) // 2
    return n // 2 if discriminant(phi).is_one() else (n - 2) // 2


# ---------------------------------------------------------------------------
# Q(sqrt(d)) contexts


_CTX_CACHE = {}


def quad_context(d):
    d = squarefree_of_fraction(Fraction(d))
    ctx = _CTX_CACHE.get(d)
    if ctx is None:
        ctx = _QuadContext(d)
        _CTX_CACHE[d] = ctx
    return ctx


class _QuadContext:
    """Exact local computations for K = Q(sqrt(d))."""

    def __init__(self, d):
        self.d = d
        self.K = QuadField(d)
        self._sym_cache = {}
        self._sq_cache = {}
        self._sqsets = {}

    # -- element plumbing ----------------------------------------------------

    def coerce(self, x):
        if isinstance(x, QuadNum):
            if x.field != self.K:
                raise UnsupportedField("element of %s in a %s context" % (x.field, self.K))
            return x
        if isinstance(x, SquareClass):
            x = Fraction(x.coeff)
        return self.K.from_rational(Fraction(x))

    def real_embeddings(self):
        if self.d < 0:
            return []
        return [RealEmbedding((1,)), RealEmbedding((-1,))]

    def support_primes(self, elements):
        support = {2} | set(factorint(self.d))
        for x in elements:
            n = self.coerce(x).full_norm()
            if n == 0:
                raise ZeroArgument("zero element")
            support.update(factorint(n.numerator * n.denominator))
        support.discard(1)
        return sorted(support)

    def places(self, elements):
        out = list(self.real_embeddings())
        for p in self.support_primes(elements):
            tag = split_prime_in_quadratic(p, self.d)
            if tag == "split":
                out.append(QuadFieldPrime(p, "split", 0))
                out.append(QuadFieldPrime(p, "split", 1))
            else:
                out.append(QuadFieldPrime(p, tag))
        return out

    # -- valuations and residues ----------------------------------------------

    def _split_image(self, x, p, index, min_prec=8):
        """The image of x in Q_p under sqrt(d) -> (-1)^index * s, as a
        Fraction exact to the precision actually needed for its valuation."""
        x = self.coerce(x)
        a, b = x.co
        if b == 0:
            return a, vp(a, p)
        bound = vp(x.full_norm(), p)
        prec = max(min_prec, bound + 4)
        while True:
            if p == 2:
                s = sqrt_mod_2_power(self.d % (1 << prec), prec)
            else:
                s = sqrt_mod_prime_power(self.d, p, prec)
            if index == 1:
                s = -s
            t = a + b * s
            if t != 0 and vp(t, p) <= bound:
                return t, vp(t, p)
            prec *= 2

    def valuation(self, x, place):
        x = self.coerce(x)
        if x.is_zero():
            raise ZeroArgument("zero element")
        p = place.p
        n = x.full_norm()
        if place.tag == "split":
            return self._split_image(x, p, place.index)[1]
        if place.tag == "inert":
            return vp(n, p) // 2
        return vp(n, p)

    def _unit_residue_square(self, x, place):
        """Is the unit part of x a square in the residue field at an odd
        place?"""
        x = self.coerce(x)
        p = place.p
        if place.tag == "split":
            t, val = self._split_image(x, p, place.index)
            return legendre(unit_mod(t, p, 1), p) == 1
        if place.tag == "inert":
            alpha = self.valuation(x, place)
            n = x.full_norm() / Fraction(p) ** (2 * alpha)
            # unit u has residue in F_{p^2}; u is a residue square iff its
            # norm to F_p is a square there
            return legendre(unit_mod(n, p, 1), p) == 1
        # ramified: unit part taken with respect to pi = sqrt(d) for both
        # parities, so residues of different arguments are comparable
        alpha = self.valuation(x, place)
        a, b = x.co
        if alpha % 2 == 0:
            res = unit_mod(a / Fraction(self.d) ** (alpha // 2), p, 1)
        else:
            res = unit_mod(b / Fraction(self.d) ** ((alpha - 1) // 2), p, 1)
        return legendre(res, p) == 1

    # -- dyadic canonical residues --------------------------------------------

    def _dyadic_kind(self):
        m = self.d % 8 if self.d % 2 else 0
        if m == 1:
            return "split"
        if m == 5:
            return "unramified"
        return "ramified"

    def _pi(self):
        """A global uniformizer for the ramified dyadic place."""
        if self.d % 2 == 0:
            return self.K.num((0, 1))  # sqrt(d)
        return self.K.num((1, 1))  # 1 + sqrt(d)

    def _norm_val_dyadic(self, x):
        """v_P(x) at the nonsplit dyadic place."""
        n = x.full_norm()
        v = vp(n, 2)
        if self._dyadic_kind() == "unramified":
            return v // 2
        return v

    def _normalize_dyadic(self, x):
        """Divide by a square to bring v_P into {0, 1}; the result is
        integral at the place, so its coordinates have odd denominators."""
        x = self.coerce(x)
        kind = self._dyadic_kind()
        v = self._norm_val_dyadic(x)
        k = v // 2  # floor; v % 2 stays as the residual valuation
        if kind == "unramified":
            return x * self.K.from_rational(Fraction(1, 4) ** k), v % 2
        pi = self._pi()
        pi2 = pi * pi
        step = pi2.inverse() if k > 0 else pi2
        y = x
        for _ in range(abs(k)):
            y = y * step
        return y, v % 2

    def _ram_params(self, N):
        k1 = (N - 1) // 2
        k0 = k1 + 1
        return (1 << k0), (1 << k1)

    def _reduce_ram(self, w0, w1, N):
        """Canonical representative of w0 + w1*sqrt(d) mod pi^N (ramified)."""
        m0, m1 = self._ram_params(N)
        if self.d % 2 == 0:
            return w0 % m0, w1 % m1
        w1m = w1 % m1
        k = (w1 - w1m) // m1
        w0 = w0 - m1 * k
        return w0 % m0, w1m

    def _coords_mod(self, x, m):
        a, b = x.co
        return (_frac_mod(a, m) if a else 0), (_frac_mod(b, m) if b else 0)

    def _omega_coords_mod(self, x, m):
        # coordinates in the dyadic integral basis (1, w), w = (1+sqrt(d))/2;
        # needed when d = 5 mod 8, where Z_2[sqrt(d)] has index 2
        a, b = x.co
        c0, c1 = a - b, 2 * b
        return (_frac_mod(c0, m) if c0 else 0), (_frac_mod(c1, m) if c1 else 0)

    def _square_sets(self, N):
        """Sets of canonical keys of squares mod pi^N: (all z, unit z)."""
        key = ("sq", N)
        if key in self._sqsets:
            return self._sqsets[key]
        kind = self._dyadic_kind()
        if kind == "unramified":
            m = 1 << N
            mq = (self.d - 1) // 4 % m  # w^2 = w + mq in the integral basis
            w0, w1 = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
            w0 = w0.ravel().astype(np.int64)
            w1 = w1.ravel().astype(np.int64)
            s0 = (w0 * w0 + mq * w1 * w1) % m
            s1 = (2 * w0 * w1 + w1 * w1) % m
            keys = s0 * m + s1
            unit = (w0 % 2 != 0) | (w1 % 2 != 0)
        else:
            m0, m1 = self._ram_params(N)
            dm = self.d % m0
            w0, w1 = np.meshgrid(np.arange(m0), np.arange(m1), indexing="ij")
            w0 = w0.ravel().astype(np.int64)
            w1 = w1.ravel().astype(np.int64)
            s0 = w0 * w0 + dm * w1 * w1
            s1 = 2 * w0 * w1
            s0, s1 = self._reduce_ram_np(s0, s1, N)
            keys = s0 * m1 + s1
            if self.d % 2 == 0:
                unit = w0 % 2 != 0
            else:
                unit = (w0 + w1) % 2 != 0
        all_set = np.unique(keys)
        unit_set = np.unique(keys[unit])
        self._sqsets[key] = (all_set, unit_set)
        return all_set, unit_set

    def _reduce_ram_np(self, s0, s1, N):
        m0, m1 = self._ram_params(N)
        if self.d % 2 == 0:
            return s0 % m0, s1 % m1
        s1m = s1 % m1
        k = (s1 - s1m) // m1
        s0 = (s0 - m1 * k) % m0
        return s0, s1m

    def _is_square_dyadic(self, x):
        """Is x a square in the nonsplit dyadic completion?"""
        kind = self._dyadic_kind()
        if kind == "split":
            raise UnsupportedLocalField("split place handled elsewhere")
        y, parity = self._normalize_dyadic(x)
        if parity:
            return False
        N = 3 if kind == "unramified" else 5  # precision 2*v(2) + 1 for units
        _, unit_set = self._square_sets(N)
        if kind == "unramified":
            m = 1 << N
            w0, w1 = self._omega_coords_mod(y, m)
            key = w0 * m + w1
        else:
            m0, m1 = self._ram_params(N)
            w0, w1 = self._coords_mod(y, m0)
            w0, w1 = self._reduce_ram(w0, w1, N)
            key = w0 * m1 + w1
        return bool(np.isin(np.int64(key), unit_set))

    # -- the dyadic symbol search ----------------------------------------------

    def _dyadic_symbol_search(self, a, b):
        """(a, b) at the nonsplit dyadic place by primitive-solution search
        modulo pi^N, N = 2*v(4)+1."""
        kind = self._dyadic_kind()
        a, _ = self._normalize_dyadic(a)
        b, _ = self._normalize_dyadic(b)
        if kind == "unramified":
            N = 5
            m = 1 << N
            mq = (self.d - 1) // 4 % m  # w^2 = w + mq in the integral basis
            w0, w1 = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
            w0 = w0.ravel().astype(np.int64)
            w1 = w1.ravel().astype(np.int64)
            x0 = (w0 * w0 + mq * w1 * w1) % m
            x1 = (2 * w0 * w1 + w1 * w1) % m
            unit = (w0 % 2 != 0) | (w1 % 2 != 0)

            def times(c, e0, e1):
                c0, c1 = self._omega_coords_mod(c, m)
                return (c0 * e0 + mq * c1 * e1) % m, (c0 * e1 + c1 * e0 + c1 * e1) % m

            ax0, ax1 = times(a, x0, x1)
            by0, by1 = times(b, x0, x1)
            all_set, unit_set = self._square_sets(N)
            v0 = (ax0[:, None] + by0[None, :]) % m
            v1 = (ax1[:, None] + by1[None, :]) % m
            keys = v0 * m + v1
            both_nonunit = (~unit[:, None]) & (~unit[None, :])
            ok_all = np.isin(keys, all_set)
            ok_unit = np.isin(keys, unit_set)
            return 1 if bool(np.any(np.where(both_nonunit, ok_unit, ok_all))) else -1

        N = 9
        m0, m1 = self._ram_params(N)
        dm = self.d % m0
        w0, w1 = np.meshgrid(np.arange(m0), np.arange(m1), indexing="ij")
        w0 = w0.ravel().astype(np.int64)
        w1 = w1.ravel().astype(np.int64)
        x0 = w0 * w0 + dm * w1 * w1
        x1 = 2 * w0 * w1
        x0, x1 = self._reduce_ram_np(x0, x1, N)
        if self.d % 2 == 0:
            unit = w0 % 2 != 0
        else:
            unit = (w0 + w1) % 2 != 0

        def times(c, e0, e1):
            c0, c1 = self._coords_mod(c, m0)
            f0 = c0 * e0 + dm * c1 * e1
            f1 = c0 * e1 + c1 * e0
            return self._reduce_ram_np(f0, f1, N)

        ax0, ax1 = times(a, x0, x1)
        by0, by1 = times(b, x0, x1)
        all_set, unit_set = self._square_sets(N)
        v0 = ax0[:, None] + by0[None, :]
        v1 = ax1[:, None] + by1[None, :]
        v0, v1 = self._reduce_ram_np(v0, v1, N)
        keys = v0 * m1 + v1
        both_nonunit = (~unit[:, None]) & (~unit[None, :])
        ok_all = np.isin(keys, all_set)
        ok_unit = np.isin(keys, unit_set)
        return 1 if bool(np.any(np.where(both_nonunit, ok_unit, ok_all))) else -1

    # -- the symbol -------------------------------------------------------------

    def _cache_key(self, x):
        x = self.coerce(x)
        return x.co

    def symbol(self, a, b, place):
        a = self.coerce(a)
        b = self.coerce(b)
        if a.is_zero() or b.is_zero():
            raise ZeroArgument("hilbert symbol needs nonzero arguments")
        key = (self._cache_key(a), self._cache_key(b), place)
        hit = self._sym_cache.get(key)
        if hit is not None:
            return hit
        val = self._symbol_impl(a, b, place)
        self._sym_cache[key] = val
        self._sym_cache[(key[1], key[0], key[2])] = val
        return val

    def _symbol_impl(self, a, b, place):
        if isinstance(place, RealEmbedding):
            eps = place.signs[0]
            return -1 if a.sign_at(eps) < 0 and b.sign_at(eps) < 0 else 1
        p = place.p
        if p != 2:
            alpha = self.valuation(a, place)
            beta = self.valuation(b, place)
            if place.tag == "inert":
                eps_q = 0  # residue field F_{p^2}, (q-1)/2 even
            else:
                eps_q = (p - 1) // 2 % 2
            sign = -1 if (alpha % 2) and (beta % 2) and eps_q else 1
            if beta % 2:
                sign *= 1 if self._unit_residue_square(a, place) else -1
            if alpha % 2:
                sign *= 1 if self._unit_residue_square(b, place) else -1
            return sign
        kind = self._dyadic_kind()
        if place.tag == "split":
            ta, _ = self._split_image(a, 2, place.index)
            tb, _ = self._split_image(b, 2, place.index)
            return _hilbert_Q2(ta, tb)
        if kind == "split":
            raise UnsupportedLocalField("the dyadic places of this field are split; use an indexed place")
        return self._dyadic_symbol_search(a, b)

    # -- squareness, signs, invariants ------------------------------------------

    def is_local_square(self, x, place):
        x = self.coerce(x)
        if isinstance(place, RealEmbedding):
            return x.sign_at(place.signs[0]) > 0
        p = place.p
        if p != 2:
            if self.valuation(x, place) % 2:
                return False
            return self._unit_residue_square(x, place)
        if place.tag == "split":
            t, _ = self._split_image(x, 2, place.index)
            return _is_square_Qp(t, 2)
        return self._is_square_dyadic(x)

    def is_global_square(self, x):
        x = self.coerce(x)
        if self.K.depth != 1:
            raise UnsupportedField("depth-1 squareness only")
        return x.is_square()

    def signatures(self, entries):
        out = {}
        for emb in self.real_embeddings():
            out[emb] = sum(self.coerce(e).sign_at(emb.signs[0]) for e in entries)
        return out

    def hasse_profile(self, entries, places):
        prof = {}
        for place in places:
            if isinstance(place, RealEmbedding):
                continue
            val = 1
            for i in range(len(entries)):
                for j in range(i + 1, len(entries)):
                    val *= self.symbol(entries[i], entries[j], place)
            prof[place] = val
        return prof


def _quadfield_entries(phi_or_entries, ctx):
    if isinstance(phi_or_entries, QuadForm):
        if phi_or_entries.field.steps or not isinstance(
            phi_or_entries.field.base, Rationals
        ):
            raise UnsupportedField("expected a rational-base form")
        return [ctx.coerce(Fraction(e.coeff)) for e in phi_or_entries.entries]
    return [ctx.coerce(x) for x in phi_or_entries]


def is_hyperbolic_quadfield(phi, d):
    """Hyperbolicity of a form over K = Q(sqrt(d)): same classifying data as
    the split form of equal dimension at every place of K."""
    ctx = quad_context(d)
    entries = _quadfield_entries(phi, ctx)
    n = len(entries)
    if n % 2:
        return False
    if n == 0:
        return True
    det = entries[0]
    for e in entries[1:]:
        det = det * e
    disc = det if (n * (n - 1) // 2) % 2 == 0 else -det
    if not ctx.is_global_square(disc):
        return False
    sigs = ctx.signatures(entries)
    if any(v != 0 for v in sigs.values()):
        return False
    ref = [ctx.coerce(1), ctx.coerce(-1)] * (n // 2)
    places = ctx.places(entries)
    prof = ctx.hasse_profile(entries, places)
    ref_prof = ctx.hasse_profile(ref, places)
    return all(prof[p] == ref_prof[p] for p in prof)


class _StageDataK:
    __slots__ = ("ctx", "det", "hasse", "sigs", "places")

    def __init__(self, ctx, det, hasse, sigs, places):
        self.ctx = ctx
        self.det = det
        self.hasse = hasse
        self.sigs = sigs
        self.places = places

    def peel(self):
        new_det = -self.det
        minus_one = self.ctx.coerce(-1)
        hasse = {
            place: val * self.ctx.symbol(new_det, minus_one, place)
            for place, val in self.hasse.items()
        }
        return _StageDataK(self.ctx, new_det, hasse, self.sigs, self.places)


def _stage_anisotropic_K(r, st):
    ctx = st.ctx
    sig_vals = list(st.sigs.values())
    if any(abs(s) > r for s in sig_vals):
        return False
    if r == 0:
        return False
    if r == 1:
        return all(v == 1 for v in st.hasse.values())
    if r == 2:
        if ctx.is_global_square(-st.det):
            return False
        for place, val in st.hasse.items():
            if val == -1 and ctx.is_local_square(-st.det, place):
                return False
        for emb, s in st.sigs.items():
            pos = st.det.sign_at(emb.signs[0]) > 0
            if pos and abs(s) != 2:
                return False
            if not pos and s != 0:
                return False
        return True
    if r == 3:
        if any(abs(s) == 3 for s in sig_vals):
            return True
        minus_one = ctx.coerce(-1)
        for place in st.places:
            if isinstance(place, RealEmbedding):
                continue
            ref = ctx.symbol(minus_one, -st.det, place)
            if st.hasse.get(place, 1) != ref:
                return True
        return False
    if r == 4:
        if any(abs(s) == 4 for s in sig_vals):
            return True
        minus_one = ctx.coerce(-1)
        for place in st.places:
            if isinstance(place, RealEmbedding):
                continue
            if ctx.is_local_square(st.det, place):
                ref = ctx.symbol(minus_one, minus_one, place)
                if st.hasse.get(place, 1) != ref:
                    return True
        return False
    return any(abs(s) == r for s in sig_vals)


def anisotropic_dim_quadfield(phi, d):
    """Anisotropic dimension over Q(sqrt(d)) by the stage machinery."""
    ctx = quad_context(d)
    entries = _quadfield_entries(phi, ctx)
    n = len(entries)
    if n == 0:
        return 0
    det = entries[0]
    for e in entries[1:]:
        det = det * e
    places = ctx.places(entries)
    st = _StageDataK(
        ctx,
        det,
        ctx.hasse_profile(entries, places),
        ctx.signatures(entries),
        places,
    )
    for k in range(n // 2 + 1):
        r = n - 2 * k
        if r == 0:
            return 0
        if _stage_anisotropic_K(r, st):
            return r
        st = st.peel()
    return 0


def is_isotropic_quadfield(phi, d):
    entries = phi.entries if isinstance(phi, QuadForm) else phi
    n = len(tuple(entries))
    return anisotropic_dim_quadfield(phi, d) < n
