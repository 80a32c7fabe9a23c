"""Small exact number-theory helpers: factorization, square parts, residues.

Inputs are desk scale (entries of quadratic forms, conic coefficients), so
trial division with a Pollard rho fallback is plenty.  Everything is exact
integer / Fraction arithmetic.
"""

import math
import random
from fractions import Fraction

_SIEVE_BOUND = 10000


def _sieve(n):
    flags = bytearray([1]) * (n + 1)
    flags[0:2] = b"\x00\x00"
    for i in range(2, int(n**0.5) + 1):
        if flags[i]:
            flags[i * i :: i] = bytearray(len(flags[i * i :: i]))
    return [i for i in range(n + 1) if flags[i]]


SMALL_PRIMES = _sieve(_SIEVE_BOUND)
_SMALL_PRIME_SET = set(SMALL_PRIMES)


def is_prime(n):
    if n < 2:
        return False
    if n <= _SIEVE_BOUND:
        return n in _SMALL_PRIME_SET
    if any(n % p == 0 for p in SMALL_PRIMES if p * p <= n):
        return False
    # deterministic Miller-Rabin for 64-bit-ish inputs
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if a % n == 0:
            continue
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_rho(n):
    if n % 2 == 0:
        return 2
    rng = random.Random(0xC0FFEE ^ n)
    while True:
        c = rng.randrange(1, n)
        f = lambda x: (x * x + c) % n
        x = y = rng.randrange(2, n)
        d = 1
        while d == 1:
            x = f(x)
            y = f(f(y))
            d = math.gcd(abs(x - y), n)
        if d != n:
            return d


def factorint(n):
    """Factor a nonzero integer; returns {prime: exponent} ignoring the sign."""
    n = abs(n)
    if n == 0:
        raise ValueError("factorint(0)")
    out = {}
    for p in SMALL_PRIMES:
        if p * p > n:
            break
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    if n > 1:
        stack = [n]
        while stack:
            m = stack.pop()
            if m == 1:
                continue
            if is_prime(m):
                out[m] = out.get(m, 0) + 1
                continue
            d = _pollard_rho(m)
            stack.append(d)
            stack.append(m // d)
    return out


def squarefree_part(n):
    """Signed squarefree part of a nonzero integer (sign is preserved)."""
    if n == 0:
        raise ValueError("squarefree_part(0)")
    sign = -1 if n < 0 else 1
    out = sign
    for p, e in factorint(n).items():
        if e % 2:
            out *= p
    return out


def squarefree_of_fraction(q):
    """Signed squarefree integer representing the square class of a rational."""
    q = Fraction(q)
    if q == 0:
        raise ValueError("square class of 0")
    return squarefree_part(q.numerator * q.denominator)


def is_square_fraction(q):
    q = Fraction(q)
    if q <= 0:
        return q == 0 and False
    return (
        math.isqrt(q.numerator) ** 2 == q.numerator
        and math.isqrt(q.denominator) ** 2 == q.denominator
    )


def sqrt_fraction(q):
    """Exact square root of a rational perfect square."""
    q = Fraction(q)
    return Fraction(math.isqrt(q.numerator), math.isqrt(q.denominator))


def legendre(a, p):
    """Legendre symbol (a|p) in {-1, 0, 1} for odd prime p."""
    a %= p
    if a == 0:
        return 0
    t = pow(a, (p - 1) // 2, p)
    return 1 if t == 1 else -1


def least_nonresidue(p):
    for n in range(2, p):
        if legendre(n, p) == -1:
            return n
    raise ValueError("no nonresidue mod %d" % p)


def sqrt_mod_prime(a, p):
    """Tonelli-Shanks: x with x*x = a mod p, for odd prime p, (a|p) = 1."""
    a %= p
    if a == 0:
        return 0
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = least_nonresidue(p)
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, tt = 0, t
        while tt != 1:
            tt = tt * tt % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


def sqrt_mod_prime_power(a, p, k):
    """x with x*x = a mod p**k; odd p, a a unit square mod p.  Hensel lift."""
    x = sqrt_mod_prime(a, p)
    pe = p
    while pe < p**k:
        pe *= p
        # f(x) = x^2 - a ; x <- x - f(x)/(2x) mod pe
        inv = pow(2 * x, -1, pe)
        x = (x - (x * x - a) * inv) % pe
    return x % (p**k)


def sqrt_mod_2_power(a, k):
    """x with x*x = a mod 2**k for odd a = 1 mod 8, k >= 3."""
    if a % 8 != 1:
        raise ValueError("not a 2-adic square")
    x = 1
    for j in range(3, k):
        if (x * x - a) % (1 << (j + 1)):
            x += 1 << (j - 1)
    return x % (1 << k)


def vp(q, p):
    """p-adic valuation of a nonzero rational."""
    q = Fraction(q)
    if q == 0:
        raise ValueError("vp(0)")
    v = 0
    n = q.numerator
    while n % p == 0:
        n //= p
        v += 1
    d = q.denominator
    while d % p == 0:
        d //= p
        v -= 1
    return v


def unit_part(q, p):
    """q / p**vp(q) as a Fraction (a p-adic unit)."""
    return Fraction(q) / Fraction(p) ** vp(q, p)


def unit_mod(q, p, k=1):
    """Residue of the p-adic unit part of a nonzero rational mod p**k."""
    q = unit_part(q, p)
    m = p**k
    den_inv = pow(q.denominator % m, -1, m)
    return q.numerator % m * den_inv % m
