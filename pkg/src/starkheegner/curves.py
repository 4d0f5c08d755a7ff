"""Elliptic curves over Q: invariants, reduction data, point counts, and a
field-generic Weierstrass group law.

Curves are long Weierstrass models y^2 + a1 x y + a3 y = x^3 + a2 x^2 + a4 x + a6
with integer coefficients, assumed globally minimal (the bundled corpus models
are).  Reduction data is computed from scratch: a_ell at good primes by point
counting over F_ell, at bad primes by counting smooth points on the reduction
(split multiplicative +1, nonsplit -1, additive 0).

The group law is written against plain Python operators so the same three
functions serve exact rationals (fractions.Fraction), the tracked p-adic
classes, exact real-quadratic numbers, and mpmath complex numbers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


class UnsupportedCurve(ValueError):
    """Model outside the supported range (non-minimal, or additive at 2, 3)."""


CURVE_DB = {
    "11a": (0, -1, 1, -10, -20),
    "14a": (1, 0, 1, 4, -6),
    "15a": (1, 1, 1, -10, -10),
    "37a": (0, 0, 1, -1, 0),
    "37b": (0, 1, 1, -23, -50),
}


@dataclass(frozen=True)
class EllipticCurve:
    a1: int
    a2: int
    a3: int
    a4: int
    a6: int
    label: str = ""

    @classmethod
    def from_label(cls, label: str) -> "EllipticCurve":
        key = label.strip().lower()
        if key.endswith("1") and key[:-1] in CURVE_DB:
            key = key[:-1]
        if key not in CURVE_DB:
            raise UnsupportedCurve(
                f"unknown label {label!r}; known: {sorted(CURVE_DB)} "
                "(or pass five a-invariants)"
            )
        return cls(*CURVE_DB[key], label=key)

    @classmethod
    def from_ainvs(cls, ainvs, label: str = "") -> "EllipticCurve":
        a = [int(v) for v in ainvs]
        if len(a) != 5:
            raise UnsupportedCurve("need exactly five a-invariants a1 a2 a3 a4 a6")
        return cls(*a, label=label)

    @property
    def ainvs(self):
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    # -- standard invariants ------------------------------------------------

    @property
    def b2(self):
        return self.a1 * self.a1 + 4 * self.a2

    @property
    def b4(self):
        return 2 * self.a4 + self.a1 * self.a3

    @property
    def b6(self):
        return self.a3 * self.a3 + 4 * self.a6

    @property
    def b8(self):
        return (
            self.a1 * self.a1 * self.a6
            + 4 * self.a2 * self.a6
            - self.a1 * self.a3 * self.a4
            + self.a2 * self.a3 * self.a3
            - self.a4 * self.a4
        )

    @property
    def c4(self):
        return self.b2 * self.b2 - 24 * self.b4

    @property
    def c6(self):
        return -self.b2**3 + 36 * self.b2 * self.b4 - 216 * self.b6

    @property
    def discriminant(self):
        return (
            -self.b2 * self.b2 * self.b8
            - 8 * self.b4**3
            - 27 * self.b6 * self.b6
            + 9 * self.b2 * self.b4 * self.b6
        )

    @property
    def j_invariant(self) -> Fraction:
        return Fraction(self.c4**3, self.discriminant)

    # -- reduction ----------------------------------------------------------

    def reduction_type(self, p: int) -> str:
        """'good' | 'split multiplicative' | 'nonsplit multiplicative' | 'additive'."""
        from .padics import valuation_of_int

        if self.discriminant % p != 0:
            return "good"
        if self.c4 % p != 0:
            a = self.ap(p)
            return "split multiplicative" if a == 1 else "nonsplit multiplicative"
        c4_val_big = self.c4 == 0 or valuation_of_int(self.c4, p) >= 4
        if c4_val_big and valuation_of_int(self.discriminant, p) >= 12:
            raise UnsupportedCurve(f"model is not minimal at {p}")
        return "additive"

    def conductor(self) -> int:
        from .padics import valuation_of_int

        n = 1
        for p in prime_factors(abs(self.discriminant)):
            t = self.reduction_type(p)
            if t.endswith("multiplicative"):
                n *= p
            else:
                if p in (2, 3):
                    raise UnsupportedCurve(
                        f"additive reduction at {p} is outside the supported range"
                    )
                n *= p * p
        if self.label:
            stated = int("".join(ch for ch in self.label if ch.isdigit()) or 0)
            if stated and stated != n:
                raise UnsupportedCurve(
                    f"label {self.label!r} conflicts with computed conductor {n}"
                )
        return n

    # -- point counts / Fourier coefficients ---------------------------------

    def count_points(self, ell: int) -> int:
        """#E(F_ell) for a prime of good reduction, including infinity."""
        if self.discriminant % ell == 0:
            raise ValueError(f"{ell} is a bad prime")
        if ell == 2:
            cnt = 1
            for x in range(2):
                for y in range(2):
                    if (
                        y * y
                        + self.a1 * x * y
                        + self.a3 * y
                        - (x**3 + self.a2 * x * x + self.a4 * x + self.a6)
                    ) % 2 == 0:
                        cnt += 1
            return cnt
        # complete the square: (2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6
        b2, b4, b6 = self.b2, self.b4, self.b6
        half = (ell - 1) // 2
        cnt = ell + 1
        for x in range(ell):
            r = (4 * x**3 + b2 * x * x + 2 * b4 * x + b6) % ell
            if r == 0:
                continue
            cnt += 1 if pow(r, half, ell) == 1 else -1
        return cnt

    def ap(self, p: int) -> int:
        """Trace of Frobenius at good p; +1/-1/0 at split/nonsplit/additive p."""
        if self.discriminant % p != 0:
            return p + 1 - self.count_points(p)
        pts = []
        for x in range(p):
            for y in range(p):
                if (
                    y * y
                    + self.a1 * x * y
                    + self.a3 * y
                    - (x**3 + self.a2 * x * x + self.a4 * x + self.a6)
                ) % p == 0:
                    pts.append((x, y))
        nsing = sum(
            1
            for (x, y) in pts
            if (2 * y + self.a1 * x + self.a3) % p == 0
            and (3 * x * x + 2 * self.a2 * x + self.a4 - self.a1 * y) % p == 0
        )
        smooth = len(pts) - nsing + 1
        return p - smooth

    def an_coefficients(self, bound: int) -> list[int]:
        """[a_0 .. a_bound] with a_0 = 0, via multiplicativity and the Hecke
        recursion a_{l^(k+1)} = a_l a_{l^k} - l a_{l^(k-1)} at good l, a_{l^k} =
        a_l^k at bad l."""
        an = [0] * (bound + 1)
        if bound >= 1:
            an[1] = 1
        for ell in prime_sieve(bound):
            a_ell = self.ap(ell)
            good = self.discriminant % ell != 0
            # fill prime powers
            power, prev, cur = ell, 1, a_ell
            while power <= bound:
                an[power] = cur
                prev, cur = cur, a_ell * cur - (ell * prev if good else 0)
                power *= ell
        # multiplicativity: build a_n for composite n from coprime parts
        for n in range(2, bound + 1):
            if an[n] != 0 or n == 1:
                continue
            m = n
            ell = smallest_prime_factor(n)
            q = 1
            while m % ell == 0:
                m //= ell
                q *= ell
            if m > 1:
                an[n] = an[q] * an[m]
        return an

    # -- model transforms -----------------------------------------------------

    def short_model(self) -> tuple[int, int]:
        """(A, B) with E isomorphic over Q to Y^2 = X^3 + A X + B via
        X = 36x + 3b2, Y = 108(2y + a1 x + a3); A = -27 c4, B = -54 c6."""
        return (-27 * self.c4, -54 * self.c6)

    def to_short_point(self, pt):
        """Map a point (x, y) on this model to the short model (X, Y)."""
        if pt is None:
            return None
        x, y = pt
        return (36 * x + 3 * self.b2, 108 * (2 * y + self.a1 * x + self.a3))

    def from_short_point(self, pt):
        """Inverse of to_short_point; works over any field of characteristic 0."""
        if pt is None:
            return None
        X, Y = pt
        x = (X - 3 * self.b2) / 36
        y = (Y / 108 - self.a1 * x - self.a3) / 2
        return (x, y)


def quadratic_twist_short(curve: EllipticCurve, d: int) -> EllipticCurve:
    """The quadratic twist by d of the short model: Y^2 = X^3 + A d^2 X + B d^3.

    A point (X, Y) on the twist corresponds to (X/d, Y/(d*sqrt(d))) on the
    short model of the original curve, over Q(sqrt(d)).
    """
    a, b = curve.short_model()
    return EllipticCurve(0, 0, 0, a * d * d, b * d**3)


# ---------------------------------------------------------------------------
# small prime utilities


def prime_sieve(bound: int) -> list[int]:
    if bound < 2:
        return []
    sieve = bytearray([1]) * (bound + 1)
    sieve[0] = sieve[1] = 0
    for i in range(2, int(bound**0.5) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(sieve[i * i :: i]))
    return [i for i in range(2, bound + 1) if sieve[i]]


def smallest_prime_factor(n: int) -> int:
    if n % 2 == 0:
        return 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return f
        f += 2
    return n


def prime_factors(n: int) -> list[int]:
    out = []
    n = abs(n)
    while n > 1:
        f = smallest_prime_factor(n)
        out.append(f)
        while n % f == 0:
            n //= f
    return out


# ---------------------------------------------------------------------------
# generic group law


def ec_negate(curve: EllipticCurve, pt):
    if pt is None:
        return None
    x, y = pt
    return (x, -y - curve.a1 * x - curve.a3)


def ec_add(curve: EllipticCurve, pt1, pt2, eq=lambda u, v: u == v):
    """Group law on the long Weierstrass model; None is the identity.

    eq is the field's equality predicate (tolerance-based for floats)."""
    if pt1 is None:
        return pt2
    if pt2 is None:
        return pt1
    a1, a2, a3, a4, _ = curve.ainvs
    x1, y1 = pt1
    x2, y2 = pt2
    if eq(x1, x2):
        if eq(y2, -y1 - a1 * x1 - a3):
            return None
        lam = (3 * x1 * x1 + 2 * a2 * x1 + a4 - a1 * y1) / (2 * y1 + a1 * x1 + a3)
    else:
        lam = (y2 - y1) / (x2 - x1)
    nu = y1 - lam * x1
    x3 = lam * lam + a1 * lam - a2 - x1 - x2
    y3 = -(lam + a1) * x3 - nu - a3
    return (x3, y3)


def ec_mul(curve: EllipticCurve, n: int, pt, eq=lambda u, v: u == v):
    if n < 0:
        return ec_mul(curve, -n, ec_negate(curve, pt), eq)
    result = None
    base = pt
    while n:
        if n & 1:
            result = ec_add(curve, result, base, eq)
        base = ec_add(curve, base, base, eq)
        n >>= 1
    return result


def ec_equation_residual(curve: EllipticCurve, pt):
    """LHS - RHS of the Weierstrass equation at pt (zero iff on the curve)."""
    x, y = pt
    a1, a2, a3, a4, a6 = curve.ainvs
    return y * y + a1 * x * y + a3 * y - (x**3 + a2 * x * x + a4 * x + a6)


def torsion_order(curve: EllipticCurve, pt, eq=lambda u, v: u == v, bound: int = 12):
    """The order of pt if it is torsion of order <= bound, else None."""
    acc = pt
    for n in range(1, bound + 1):
        if acc is None:
            return n
        acc = ec_add(curve, acc, pt, eq)
    return None


# ---------------------------------------------------------------------------
# naive global point search


def rational_points_naive(
    curve: EllipticCurve, max_x_height: int = 40, max_den: int = 12
):
    """All rational points (x, y) with x = m/e^2, |m| <= max_x_height * e^2,
    e <= max_den, by direct solution of the Weierstrass quadratic in y."""
    from math import isqrt

    a1, a2, a3, a4, a6 = curve.ainvs
    found = set()
    for e in range(1, max_den + 1):
        e2, e3 = e * e, e**3
        bound = max_x_height * e2
        for m in range(-bound, bound + 1):
            blin = a1 * m * e + a3 * e3
            rhs = m**3 + a2 * m * m * e2 + a4 * m * e3 * e + a6 * e3 * e3
            disc = blin * blin + 4 * rhs
            if disc < 0:
                continue
            r = isqrt(disc)
            if r * r != disc:
                continue
            for sgn in (1, -1) if r else (1,):
                num = -blin + sgn * r
                if num % 2:
                    continue
                found.add((Fraction(m, e2), Fraction(num // 2, e3)))
    return sorted(found)


def infinite_order_points(curve: EllipticCurve, points):
    """Filter a list of rational points down to those of infinite order."""
    return [pt for pt in points if torsion_order(curve, pt) is None]
