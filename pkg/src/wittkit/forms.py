"""Diagonal quadratic forms: constructors, algebra, classical invariants,
and isometry tests that delegate the hyperbolicity decision to the layer
machinery.

A form is a tuple of canonical square classes over a field tower.  The
zero-dimensional form is allowed and acts as the additive identity.
"""

from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    DegenerateGram,
    FieldMismatch,
    ParseError,
    UnsupportedField,
    ZeroElement,
    ZeroSlot,
)
from .fields import (
    FieldTower,
    MonomialElement,
    PrimeField,
    RationalFunction,
    Rationals,
    SquareClass,
    canonical_square_class,
    minus_one_class,
    one_class,
    parse_element,
)
from .numutil import factorint


@dataclass(frozen=True)
class QuadForm:
    """A diagonal quadratic form <a1, ..., an>."""

    field: FieldTower
    entries: tuple

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        for e in self.entries:
            if not isinstance(e, SquareClass) or e.field != self.field:
                raise FieldMismatch("entry %r does not live in %s" % (e, self.field))

    @property
    def dim(self):
        return len(self.entries)

    def neg(self):
        return QuadForm(self.field, tuple(e.neg() for e in self.entries))

    def det_class(self):
        d = one_class(self.field)
        for e in self.entries:
            d = d.times(e)
        return d

    def __str__(self):
        return "<%s>" % ", ".join(str(e) for e in self.entries)


def quadform(field, items):
    """Build a form from raw entries (elements, classes, ints, Fractions,
    sympy expressions over Q(s))."""
    entries = tuple(canonical_square_class(x, field) for x in items)
    return QuadForm(field, entries)


def pfister(field, slots):
    """The 2^n-dimensional form <1,-a1> x ... x <1,-an>; n = 0 gives <1>."""
    entries = [one_class(field)]
    for a in slots:
        try:
            c = canonical_square_class(a, field)
        except ZeroElement:
            raise ZeroSlot("zero slot in a multiplicative generator list") from None
        minus_a = c.neg()
        entries = entries + [e.times(minus_a) for e in entries]
    return QuadForm(field, tuple(entries))


def hyperbolic(m, field):
    one = one_class(field)
    pair = (one, minus_one_class(field))
    return QuadForm(field, pair * m)


def orthogonal_sum(phi, psi):
    if phi.field != psi.field:
        raise FieldMismatch("summands live over different fields")
    return QuadForm(phi.field, phi.entries + psi.entries)


def tensor(phi, psi):
    if phi.field != psi.field:
        raise FieldMismatch("factors live over different fields")
    entries = tuple(a.times(b) for a in phi.entries for b in psi.entries)
    return QuadForm(phi.field, entries)


def scale(a, phi):
    c = canonical_square_class(a, phi.field)
    return QuadForm(phi.field, tuple(c.times(e) for e in phi.entries))


def discriminant(phi):
    """Signed discriminant: (-1)^(n(n-1)/2) times the determinant class."""
    d = phi.det_class()
    if (phi.dim * (phi.dim - 1) // 2) % 2:
        d = d.neg()
    return d


# ---------------------------------------------------------------------------
# Brauer classes of Clifford algebras


@dataclass(frozen=True, eq=False)
class BrauerClass2:
    """A 2-torsion Brauer class over a field tower, held as a reduced
    multiset of quaternion symbols together with a normal form that makes
    equality decidable: the class of Br2(k((t1))...((tn))) splits into a
    base-field part, one square class per Laurent step, and one bit per
    step pair.

    Over a rational base the base part is the set of places carrying local
    invariant -1 (even cardinality, by the product formula); over a prime
    field it is empty; over Q(s) it is a reduced symbol list whose
    triviality is decided by residue data plus specialization.
    """

    field: FieldTower
    symbols: tuple
    base_part: object
    step_classes: tuple
    step_pairs: frozenset

    def is_trivial(self):
        if any(not c.is_one() for c in self.step_classes) or self.step_pairs:
            return False
        base = self.field.base
        if isinstance(base, PrimeField):
            return True
        if isinstance(base, Rationals):
            return not self.base_part
        from .functionfield import symbols_trivial_qs

        return symbols_trivial_qs(self.base_part)

    def __eq__(self, other):
        if not isinstance(other, BrauerClass2) or self.field != other.field:
            return False
        if self.step_classes != other.step_classes or self.step_pairs != other.step_pairs:
            return False
        base = self.field.base
        if isinstance(base, (Rationals, PrimeField)):
            return self.base_part == other.base_part
        diff = _reduce_pair_multiset(tuple(self.base_part) + tuple(other.base_part))
        from .functionfield import symbols_trivial_qs

        return symbols_trivial_qs(diff)

    def plus(self, other):
        if self.field != other.field:
            raise FieldMismatch("classes live over different fields")
        return brauer_from_symbols(self.field, self.symbols + other.symbols)

    def local_vector(self):
        """Over a rational base: the sorted support of places with local
        invariant -1 (primes ascending, the real place last)."""
        if not isinstance(self.field.base, Rationals):
            raise UnsupportedField("local invariants only over a rational base")
        primes = sorted(m for m in self.base_part if isinstance(m, int))
        tail = ["real"] if "real" in self.base_part else []
        return tuple(primes + tail)

    def __str__(self):
        if self.is_trivial():
            return "trivial"
        return " + ".join("(%s, %s)" % (a, b) for a, b in self.symbols) or "trivial"


def _pair_key(pair):
    a, b = pair
    return tuple(sorted((str(a), str(b))))


def _reduce_pair_multiset(pairs):
    counts = {}
    for pair in pairs:
        key = _pair_key(pair)
        if key in counts:
            del counts[key]
        else:
            counts[key] = pair
    return tuple(counts[k] for k in sorted(counts))


def _q_symbol_places(a, b):
    """Places of Q where the quaternion symbol (a, b) is nonsplit, as a
    frozenset of markers (prime ints and the string 'real')."""
    from .localglobal import hilbert_symbol
    from .fields import RationalPrime, RealEmbedding

    support = {2}
    for x in (a, b):
        support |= set(factorint(Fraction(x).numerator * Fraction(x).denominator))
    support.discard(2)
    marks = set()
    for p in sorted(support | {2}):
        if hilbert_symbol(a, b, RationalPrime(p)) == -1:
            marks.add(p)
    if hilbert_symbol(a, b, RealEmbedding()) == -1:
        marks.add("real")
    return frozenset(marks)


def brauer_from_symbols(field, pairs):
    """Assemble a BrauerClass2 from quaternion symbols over the tower."""
    canon = []
    for x, y in pairs:
        cx = canonical_square_class(x, field)
        cy = canonical_square_class(y, field)
        if cx.is_one() or cy.is_one():
            continue
        if cy == cx.neg():
            continue  # (a, -a) splits
        canon.append((cx, cy))
    symbols = _reduce_pair_multiset(canon)

    n = field.n_steps
    base_only = field.base_only()
    step_classes = [one_class(base_only) for _ in range(n)]
    step_pairs = set()
    base_syms = []
    for x, y in symbols:
        u, w = x.base_class(), y.base_class()
        e, f = x.exps, y.exps
        base_syms.append((u, w))
        for i in range(n):
            if e[i]:
                step_classes[i] = step_classes[i].times(w)
            if f[i]:
                step_classes[i] = step_classes[i].times(u)
            if e[i] and f[i]:
                step_classes[i] = step_classes[i].times(minus_one_class(base_only))
        for i in range(n):
            for j in range(i + 1, n):
                if (e[i] and f[j]) != (e[j] and f[i]):
                    step_pairs.symmetric_difference_update({(i, j)})

    base = field.base
    if isinstance(base, PrimeField):
        base_part = frozenset()
    elif isinstance(base, Rationals):
        part = frozenset()
        for u, w in base_syms:
            part ^= _q_symbol_places(u.coeff, w.coeff)
        base_part = part
    else:
        keep = []
        for u, w in base_syms:
            if u.is_one() or w.is_one() or w == u.neg():
                continue
            keep.append((u, w))
        base_part = _reduce_pair_multiset(keep)
    return BrauerClass2(field, symbols, base_part, tuple(step_classes), frozenset(step_pairs))


def clifford_class(phi):
    """Brauer class of the Clifford algebra of a diagonal form.

    Uses the standard case split on dim mod 8 applied to the pairwise
    symbol product s = prod_{i<j} (ai, aj).
    """
    field = phi.field
    if not isinstance(field.base, (Rationals, PrimeField, RationalFunction)):
        raise UnsupportedField("unsupported base field")
    pairs = []
    n = phi.dim
    for i in range(n):
        for j in range(i + 1, n):
            pairs.append((phi.entries[i], phi.entries[j]))
    m = n % 8
    minus_one = minus_one_class(field)
    d = discriminant(phi)
    if m in (3, 4):
        pairs.append((minus_one, d.neg()))
    elif m in (5, 6):
        pairs.append((minus_one, minus_one))
    elif m in (7, 0):
        pairs.append((minus_one, d))
    return brauer_from_symbols(field, pairs)


# ---------------------------------------------------------------------------
# Witt data and decisions


@dataclass(frozen=True)
class WittData:
    """Witt decomposition summary: phi = phi_an + witt_index * H."""

    witt_index: int
    anisotropic_dim: int
    anisotropic_part: object = None  # QuadForm when constructible


def witt_data(phi):
    from . import henselian

    w = henselian.witt_index_tower(phi)
    an = henselian.anisotropic_part_tower(phi)
    return WittData(w, phi.dim - 2 * w, an)


def is_isometric(phi, psi):
    """True iff equal dimension and phi + (-psi) is hyperbolic."""
    if phi.field != psi.field:
        raise FieldMismatch("forms live over different fields")
    if phi.dim != psi.dim:
        return False
    from . import henselian

    return henselian.is_hyperbolic_tower(orthogonal_sum(phi, psi.neg()))


@dataclass(frozen=True)
class PfisterSumWitness:
    """Witness that a form lies in the n-th power of the fundamental ideal:
    an explicit Witt-equivalence to a sum of scaled multiplicative forms,
    each given as (scalar, slots) with at least n slots."""

    parts: tuple


def in_In(phi, n, witness=None):
    """Membership of phi in the n-th power of the fundamental ideal.

    Returns "yes", "no", or "unknown".  Levels 1..3 are decided through
    dimension parity, the signed discriminant and the Clifford class; higher
    levels answer yes only when a PfisterSumWitness checks out.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if phi.dim % 2:
        return "no"
    if n >= 2 and not discriminant(phi).is_one():
        return "no"
    if n >= 3 and not clifford_class(phi).is_trivial():
        return "no"
    if n <= 3:
        return "yes"
    if witness is None:
        return "unknown"
    total = QuadForm(phi.field, ())
    for scalar, slots in witness.parts:
        if len(tuple(slots)) < n:
            return "unknown"
        total = orthogonal_sum(total, scale(scalar, pfister(phi.field, slots)))
    from . import henselian

    if henselian.is_hyperbolic_tower(orthogonal_sum(phi, total.neg())):
        return "yes"
    return "unknown"


def karpenko_bound(dim, n, h):
    """True iff dim >= (2^h - 1) * 2^(n+1-h)."""
    return dim >= (2**h - 1) * 2 ** (n + 1 - h)


def height_le1(phi):
    """Whether the anisotropic part is a nonzero scaled multiplicative form:
    yes iff dim(phi_an) = 2^m with m >= 1 and the class sits in the m-th
    ideal power.  Returns "yes", "no", or "unknown"."""
    from . import henselian

    w = henselian.witt_index_tower(phi)
    dim_an = phi.dim - 2 * w
    if dim_an == 0 or dim_an & (dim_an - 1):
        return "no"
    m = dim_an.bit_length() - 1
    if m == 0:
        return "no"
    # invariants through level 3 agree between phi and its anisotropic part
    return in_In(phi, m)


# ---------------------------------------------------------------------------
# Gram input over base fields


def diagonalize_gram(field, gram):
    """Symmetric-Gauss diagonalization of a nondegenerate Gram matrix over a
    base field (no Laurent steps).  Returns the diagonal form."""
    if field.steps:
        raise UnsupportedField("Gram input is supported over base fields only")
    base = field.base
    n = len(gram)
    if any(len(row) != n for row in gram):
        raise DegenerateGram("matrix is not square")

    if isinstance(base, Rationals):
        coerce = Fraction
        is_zero = lambda x: x == 0
        div = lambda x, y: x / y
    elif isinstance(base, PrimeField):
        p = base.p
        coerce = lambda x: int(x) % p
        is_zero = lambda x: x % p == 0
        div = lambda x, y: x * pow(y, -1, p) % p
    else:
        import sympy

        coerce = lambda x: sympy.cancel(sympy.sympify(x))
        is_zero = lambda x: sympy.cancel(x) == 0
        div = lambda x, y: sympy.cancel(x / y)

    A = [[coerce(x) for x in row] for row in gram]
    for i in range(n):
        for j in range(i + 1, n):
            if not is_zero(A[i][j] - A[j][i]):
                raise DegenerateGram("matrix is not symmetric")

    diag = []
    for k in range(n):
        pivot = next((i for i in range(k, n) if not is_zero(A[i][i])), None)
        if pivot is None:
            spot = next(
                ((i, j) for i in range(k, n) for j in range(i + 1, n) if not is_zero(A[i][j])),
                None,
            )
            if spot is None:
                raise DegenerateGram("matrix is singular")
            i, j = spot
            for c in range(n):
                A[i][c] = A[i][c] + A[j][c]
            for r in range(n):
                A[r][i] = A[r][i] + A[r][j]
            pivot = i
        if pivot != k:
            A[k], A[pivot] = A[pivot], A[k]
            for r in range(n):
                A[r][k], A[r][pivot] = A[r][pivot], A[r][k]
        d = A[k][k]
        diag.append(d)
        for i in range(k + 1, n):
            if is_zero(A[i][k]):
                continue
            f = div(A[i][k], d)
            for j in range(k, n):
                A[i][j] = A[i][j] - f * A[k][j]
        for i in range(k + 1, n):
            A[k][i] = A[i][k]
    try:
        return quadform(field, diag)
    except ZeroElement:
        raise DegenerateGram("matrix is singular") from None


# ---------------------------------------------------------------------------
# form expression grammar: <a1,...,an>, pfi(...), H(m), +, *


def parse_form_expr(src, field):
    parser = _FormParser(src, field)
    result = parser.parse_expr()
    parser.skip_ws()
    if parser.i < len(src):
        raise ParseError("trailing input", position=parser.i)
    if not isinstance(result, QuadForm):
        raise ParseError("expression is a scalar, not a form", position=0)
    return result


class _FormParser:
    def __init__(self, src, field):
        self.src = src
        self.field = field
        self.i = 0

    def skip_ws(self):
        while self.i < len(self.src) and self.src[self.i] in " \t":
            self.i += 1

    def peek(self):
        self.skip_ws()
        return self.src[self.i] if self.i < len(self.src) else ""

    def parse_expr(self):
        total = self.parse_term()
        while self.peek() == "+":
            self.i += 1
            nxt = self.parse_term()
            if not isinstance(total, QuadForm) or not isinstance(nxt, QuadForm):
                raise ParseError("scalar term in a sum of forms", position=self.i)
            total = orthogonal_sum(total, nxt)
        return total

    def parse_term(self):
        out = self.parse_factor()
        while self.peek() == "*":
            self.i += 1
            nxt = self.parse_factor()
            out = self._combine(out, nxt)
        return out

    def _combine(self, x, y):
        if isinstance(x, QuadForm) and isinstance(y, QuadForm):
            return tensor(x, y)
        if isinstance(x, QuadForm):
            return scale(y, x)
        if isinstance(y, QuadForm):
            return scale(x, y)
        return x.times(y)

    def parse_factor(self):
        ch = self.peek()
        if ch == "<":
            return self._parse_diag()
        if ch == "":
            raise ParseError("expected a form or scalar", position=self.i)
        if ch.isalpha():
            mark = self.i
            name = self._read_name()
            if name == "pfi" and self.peek() == "(":
                return pfister(self.field, self._parse_args())
            if name == "H" and self.peek() == "(":
                args = self._parse_args()
                if len(args) != 1:
                    raise ParseError("H takes one argument", position=mark)
                m = args[0]
                if m.exps != (0,) * self.field.n_steps or Fraction(str(m.coeff)).denominator != 1:
                    raise ParseError("H takes a natural number", position=mark)
                return hyperbolic(int(Fraction(str(m.coeff))), self.field)
            self.i = mark
        return self._parse_scalar()

    def _read_name(self):
        self.skip_ws()
        j = self.i
        while j < len(self.src) and (self.src[j].isalnum() or self.src[j] == "_"):
            j += 1
        name = self.src[self.i : j]
        self.i = j
        return name

    def _parse_diag(self):
        self.skip_ws()
        start = self.i
        self.i += 1  # consume '<'
        chunks = self._split_until({">"})
        if self.i >= len(self.src) or self.src[self.i] != ">":
            raise ParseError("unclosed <", position=start)
        self.i += 1
        if chunks == [""]:
            return QuadForm(self.field, ())
        entries = []
        for chunk, pos in self._with_positions(chunks, start + 1):
            entries.append(self._parse_chunk(chunk, pos))
        return quadform(self.field, entries)

    def _parse_args(self):
        self.skip_ws()
        start = self.i
        self.i += 1  # consume '('
        chunks = self._split_until({")"})
        if self.i >= len(self.src) or self.src[self.i] != ")":
            raise ParseError("unclosed (", position=start)
        self.i += 1
        if chunks == [""]:
            return []
        return [
            self._parse_chunk(chunk, pos)
            for chunk, pos in self._with_positions(chunks, start + 1)
        ]

    def _split_until(self, closers):
        chunks = []
        depth = 0
        buf = []
        while self.i < len(self.src):
            ch = self.src[self.i]
            if depth == 0 and ch in closers:
                break
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
                if depth < 0:
                    raise ParseError("unbalanced )", position=self.i)
            if depth == 0 and ch == ",":
                chunks.append("".join(buf))
                buf = []
            else:
                buf.append(ch)
            self.i += 1
        chunks.append("".join(buf))
        return chunks

    def _with_positions(self, chunks, start):
        pos = start
        for chunk in chunks:
            yield chunk, pos
            pos += len(chunk) + 1

    def _parse_chunk(self, chunk, pos):
        try:
            return parse_element(chunk.strip(), self.field)
        except ParseError as exc:
            raise ParseError(str(exc).split(" (at position")[0], position=pos) from None

    def _parse_scalar(self):
        # a bare element literal: runs to the next top-level +, * or end
        self.skip_ws()
        start = self.i
        depth = 0
        while self.i < len(self.src):
            ch = self.src[self.i]
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
                if depth < 0:
                    raise ParseError("unbalanced )", position=self.i)
            elif depth == 0 and ch in "+*<>,":
                break
            self.i += 1
        chunk = self.src[start : self.i].strip()
        if not chunk:
            raise ParseError("expected a scalar", position=start)
        try:
            return parse_element(chunk, self.field)
        except ParseError as exc:
            raise ParseError(str(exc).split(" (at position")[0], position=start) from None
