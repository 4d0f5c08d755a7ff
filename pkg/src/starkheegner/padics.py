"""Precision-tracked arithmetic in Q_p and its unramified quadratic extension.

Elements are kept in the normal form

    p^val * unit + O(p^absprec)

where ``unit`` is an integer prime to p, reduced modulo p^(absprec - val).
Precision follows the ultrametric rules: addition keeps the minimum absolute
precision of the operands, multiplication keeps the minimum relative precision
(absprec - val).  An element whose unit vanishes modulo its own modulus
collapses to the "indistinguishable from zero" state O(p^absprec), encoded as
unit == 0 and val == absprec.

The quadratic extension is Q_p(omega) with omega^2 = n_p, the smallest
positive quadratic nonresidue modulo p.  For odd p this is the unramified
quadratic extension; the choice of n_p is deterministic so cached artifacts
agree across runs.  Frobenius is a + b*omega -> a - b*omega.

log uses the branch with log(p) = 0 and log(teichmueller) = 0, which extends
it to all nonzero elements; exp requires valuation >= 1 (p odd throughout).
"""

from __future__ import annotations

from fractions import Fraction


class PrecisionError(ArithmeticError):
    """An operation needed more p-adic precision than its inputs carry."""


class NotASquareError(ArithmeticError):
    """Square root of an element that is not a square in the given field."""


# ---------------------------------------------------------------------------
# integer helpers


def valuation_of_int(n: int, p: int) -> int:
    """Largest e with p^e | n.  Raises on n == 0."""
    if n == 0:
        raise ValueError("valuation of 0 is infinite")
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e


def legendre_symbol(a: int, p: int) -> int:
    """(a/p) for odd prime p: 1, -1, or 0."""
    a %= p
    if a == 0:
        return 0
    t = pow(a, (p - 1) // 2, p)
    return 1 if t == 1 else -1


def smallest_nonresidue(p: int) -> int:
    """The smallest positive quadratic nonresidue modulo the odd prime p."""
    n = 2
    while legendre_symbol(n, p) != -1:
        n += 1
    return n


def tonelli_sqrt_mod_p(a: int, p: int) -> int:
    """A square root of a modulo the odd prime p (Tonelli-Shanks).

    Returns the root r with r <= p - r (i.e. r <= (p-1)/2), so the choice is
    deterministic.  Raises NotASquareError if a is a nonresidue.
    """
    a %= p
    if a == 0:
        return 0
    if legendre_symbol(a, p) != 1:
        raise NotASquareError(f"{a} is not a square mod {p}")
    if p % 4 == 3:
        r = pow(a, (p + 1) // 4, p)
        return min(r, p - r)
    # write p - 1 = q * 2^s with q odd
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = smallest_nonresidue(p)
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        t2, i = t, 0
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return min(r, p - r)


# ---------------------------------------------------------------------------
# Q_p


class PadicElement:
    """An element of Q_p with tracked precision: p^val * unit + O(p^absprec)."""

    __slots__ = ("p", "val", "unit", "absprec")

    def __init__(self, p: int, val: int, unit: int, absprec: int):
        self.p = p
        if absprec <= val:
            self.val, self.unit, self.absprec = absprec, 0, absprec
            return
        unit %= p ** (absprec - val)
        if unit == 0:
            self.val, self.unit, self.absprec = absprec, 0, absprec
            return
        while unit % p == 0:
            unit //= p
            val += 1
        self.val, self.unit, self.absprec = val, unit, absprec

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_int(cls, n: int, p: int, absprec: int) -> "PadicElement":
        return cls(p, 0, n, absprec)

    @classmethod
    def from_rational(cls, num: int, den: int, p: int, absprec: int) -> "PadicElement":
        if den == 0:
            raise ZeroDivisionError("rational with zero denominator")
        if num == 0:
            return cls.zero(p, absprec)
        vn = valuation_of_int(num, p)
        vd = valuation_of_int(den, p)
        val = vn - vd
        num //= p ** vn
        den //= p ** vd
        rel = absprec - val
        if rel <= 0:
            return cls(p, val, 0, absprec)
        unit = num * pow(den, -1, p ** rel) % p ** rel
        return cls(p, val, unit, absprec)

    @classmethod
    def from_fraction(cls, q: Fraction, p: int, absprec: int) -> "PadicElement":
        return cls.from_rational(q.numerator, q.denominator, p, absprec)

    @classmethod
    def zero(cls, p: int, absprec: int) -> "PadicElement":
        return cls(p, absprec, 0, absprec)

    @classmethod
    def one(cls, p: int, absprec: int) -> "PadicElement":
        return cls(p, 0, 1, absprec)

    # -- queries -----------------------------------------------------------

    def is_zero(self) -> bool:
        """True if the element is indistinguishable from 0 at its precision."""
        return self.unit == 0

    @property
    def valuation(self) -> int:
        """v_p of the element; for a precision-zero this is absprec (a bound)."""
        return self.val

    @property
    def relprec(self) -> int:
        return self.absprec - self.val

    def lift(self) -> int:
        """Canonical integer representative (requires val >= 0)."""
        if self.unit == 0:
            return 0
        if self.val < 0:
            raise ValueError("negative valuation: no integer lift")
        return self.p**self.val * self.unit

    def lift_mod(self, modulus: int) -> int:
        """lift() reduced modulo the given modulus (a power of p <= p^absprec)."""
        return self.lift() % modulus

    def residue(self) -> int:
        """Image in F_p (requires val >= 0 and absprec >= 1)."""
        if self.val < 0:
            raise ValueError("negative valuation: no residue")
        if self.absprec < 1:
            raise PrecisionError("no digits known")
        return self.unit % self.p if self.val == 0 else 0

    def unit_part(self) -> "PadicElement":
        """The unit u in x = p^val * u, with the same relative precision."""
        if self.unit == 0:
            raise ZeroDivisionError("unit part of (indistinguishable) zero")
        return PadicElement(self.p, 0, self.unit, self.relprec)

    def add_bigoh(self, absprec: int) -> "PadicElement":
        """Cap the absolute precision at the given value."""
        return PadicElement(self.p, self.val, self.unit, min(self.absprec, absprec))

    # -- coercion ----------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, PadicElement):
            if other.p != self.p:
                raise ValueError("mixed primes")
            return other
        if isinstance(other, int):
            other = Fraction(other)
        if isinstance(other, Fraction):
            if other == 0:
                v = 0
            else:
                v = valuation_of_int(other.numerator, self.p) - valuation_of_int(
                    other.denominator, self.p
                )
            rel = max(self.absprec - self.val, self.absprec - v)
            return PadicElement.from_fraction(other, self.p, v + rel)
        return NotImplemented

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        absprec = min(self.absprec, other.absprec)
        val = min(self.val, other.val)
        if absprec <= val:
            return PadicElement(self.p, absprec, 0, absprec)
        m = self.p ** (absprec - val)
        s = (
            self.unit * self.p ** (self.val - val)
            + other.unit * self.p ** (other.val - val)
        ) % m
        return PadicElement(self.p, val, s, absprec)

    __radd__ = __add__

    def __neg__(self):
        return PadicElement(self.p, self.val, -self.unit, self.absprec)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        absprec = min(self.absprec + other.val, other.absprec + self.val)
        val = self.val + other.val
        if absprec <= val:
            return PadicElement(self.p, absprec, 0, absprec)
        m = self.p ** (absprec - val)
        return PadicElement(self.p, val, self.unit * other.unit % m, absprec)

    __rmul__ = __mul__

    def inverse(self) -> "PadicElement":
        if self.unit == 0:
            raise ZeroDivisionError("inverse of (indistinguishable) zero")
        rel = self.relprec
        inv = pow(self.unit, -1, self.p**rel)
        return PadicElement(self.p, -self.val, inv, -self.val + rel)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = PadicElement(self.p, 0, 1, self.relprec)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return (self - other).is_zero()

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    __hash__ = None

    def __repr__(self):
        if self.unit == 0:
            return f"O({self.p}^{self.absprec})"
        return f"{self.unit}*{self.p}^{self.val} + O({self.p}^{self.absprec})"

    # -- analytic ----------------------------------------------------------

    def teichmueller(self) -> "PadicElement":
        """The Teichmueller representative congruent to the unit part mod p.

        Returns the (p-1)-st root of unity t with t = unit_part mod p, at the
        relative precision of self (valuation 0).
        """
        if self.unit == 0:
            raise ZeroDivisionError("teichmueller of zero")
        rel = self.relprec
        m = self.p**rel
        t = self.unit % m
        for _ in range(rel):
            t = pow(t, self.p, m)
        return PadicElement(self.p, 0, t, rel)

    def sqrt(self) -> "PadicElement":
        """Square root in Q_p (p odd).  Deterministic branch: residue <= (p-1)/2.

        Raises NotASquareError for odd valuation or nonresidue unit.
        """
        if self.unit == 0:
            if self.absprec % 2:
                raise PrecisionError("sqrt of zero at odd precision")
            return PadicElement.zero(self.p, self.absprec // 2)
        if self.val % 2:
            raise NotASquareError("odd valuation")
        p, rel = self.p, self.relprec
        r = tonelli_sqrt_mod_p(self.unit % p, p)
        k, m = 1, p
        while k < rel:
            k = min(2 * k, rel)
            m = p**k
            r = (r + self.unit % m * pow(r, -1, m)) * pow(2, -1, m) % m
        if r % p > p - r % p:
            r = m - r
        return PadicElement(p, self.val // 2, r, self.val // 2 + rel)

    def is_square(self) -> bool:
        if self.unit == 0:
            return True
        return self.val % 2 == 0 and legendre_symbol(self.unit, self.p) == 1


# ---------------------------------------------------------------------------
# Q_{p^2} = Q_p(omega), omega^2 = smallest positive nonresidue


class QuadExtElement:
    """An element of the unramified quadratic extension of Q_p.

    Normal form p^val * (ua + ub*omega) + O(p^absprec) with (ua, ub) not both
    divisible by p (unless the element is an indistinguishable zero), both
    reduced modulo p^(absprec - val).  omega^2 = nonres.
    """

    __slots__ = ("p", "nonres", "val", "ua", "ub", "absprec")

    def __init__(self, p: int, nonres: int, val: int, ua: int, ub: int, absprec: int):
        self.p, self.nonres = p, nonres
        if absprec <= val:
            self.val, self.ua, self.ub, self.absprec = absprec, 0, 0, absprec
            return
        m = p ** (absprec - val)
        ua %= m
        ub %= m
        if ua == 0 and ub == 0:
            self.val, self.ua, self.ub, self.absprec = absprec, 0, 0, absprec
            return
        while ua % p == 0 and ub % p == 0:
            ua //= p
            ub //= p
            val += 1
        self.val, self.ua, self.ub, self.absprec = val, ua, ub, absprec

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_base(cls, x: PadicElement, nonres: int) -> "QuadExtElement":
        return cls(x.p, nonres, x.val, x.unit, 0, x.absprec)

    @classmethod
    def from_pair(
        cls, a: PadicElement, b: PadicElement, nonres: int
    ) -> "QuadExtElement":
        """The element a + b*omega from two base-field coordinates."""
        if a.p != b.p:
            raise ValueError("mixed primes")
        absprec = min(a.absprec, b.absprec)
        val = min(a.val, b.val)
        if absprec <= val:
            return cls(a.p, nonres, absprec, 0, 0, absprec)
        ua = a.unit * a.p ** (a.val - val)
        ub = b.unit * b.p ** (b.val - val)
        return cls(a.p, nonres, val, ua, ub, absprec)

    @classmethod
    def zero(cls, p: int, nonres: int, absprec: int) -> "QuadExtElement":
        return cls(p, nonres, absprec, 0, 0, absprec)

    @classmethod
    def one(cls, p: int, nonres: int, absprec: int) -> "QuadExtElement":
        return cls(p, nonres, 0, 1, 0, absprec)

    @classmethod
    def omega(cls, p: int, nonres: int, absprec: int) -> "QuadExtElement":
        return cls(p, nonres, 0, 0, 1, absprec)

    # -- queries -----------------------------------------------------------

    def is_zero(self) -> bool:
        return self.ua == 0 and self.ub == 0

    @property
    def valuation(self) -> int:
        return self.val

    @property
    def relprec(self) -> int:
        return self.absprec - self.val

    def coeff_a(self) -> PadicElement:
        """The omega^0-coordinate as a base-field element."""
        return PadicElement(self.p, self.val, self.ua, self.absprec)

    def coeff_b(self) -> PadicElement:
        """The omega^1-coordinate as a base-field element."""
        return PadicElement(self.p, self.val, self.ub, self.absprec)

    def is_in_base(self) -> bool:
        return self.ub == 0

    def to_base(self) -> PadicElement:
        if not self.is_in_base():
            raise ValueError("element has a nonzero omega-coordinate")
        return PadicElement(self.p, self.val, self.ua, self.absprec)

    def residue_pair(self) -> tuple[int, int]:
        """Image in F_{p^2} as a coefficient pair (requires val >= 0)."""
        if self.val < 0:
            raise ValueError("negative valuation: no residue")
        if self.absprec < 1:
            raise PrecisionError("no digits known")
        if self.val > 0:
            return (0, 0)
        return (self.ua % self.p, self.ub % self.p)

    def unit_part(self) -> "QuadExtElement":
        if self.is_zero():
            raise ZeroDivisionError("unit part of (indistinguishable) zero")
        return QuadExtElement(self.p, self.nonres, 0, self.ua, self.ub, self.relprec)

    def add_bigoh(self, absprec: int) -> "QuadExtElement":
        return QuadExtElement(
            self.p, self.nonres, self.val, self.ua, self.ub, min(self.absprec, absprec)
        )

    # -- coercion ----------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, QuadExtElement):
            if other.p != self.p or other.nonres != self.nonres:
                raise ValueError("mixed fields")
            return other
        if isinstance(other, PadicElement):
            if other.p != self.p:
                raise ValueError("mixed primes")
            return QuadExtElement.from_base(other, self.nonres)
        if isinstance(other, int):
            other = Fraction(other)
        if isinstance(other, Fraction):
            if other == 0:
                v = 0
            else:
                v = valuation_of_int(other.numerator, self.p) - valuation_of_int(
                    other.denominator, self.p
                )
            rel = max(self.absprec - self.val, self.absprec - v)
            return QuadExtElement.from_base(
                PadicElement.from_fraction(other, self.p, v + rel), self.nonres
            )
        return NotImplemented

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        absprec = min(self.absprec, other.absprec)
        val = min(self.val, other.val)
        if absprec <= val:
            return QuadExtElement(self.p, self.nonres, absprec, 0, 0, absprec)
        m = self.p ** (absprec - val)
        sa = (
            self.ua * self.p ** (self.val - val)
            + other.ua * self.p ** (other.val - val)
        ) % m
        sb = (
            self.ub * self.p ** (self.val - val)
            + other.ub * self.p ** (other.val - val)
        ) % m
        return QuadExtElement(self.p, self.nonres, val, sa, sb, absprec)

    __radd__ = __add__

    def __neg__(self):
        return QuadExtElement(
            self.p, self.nonres, self.val, -self.ua, -self.ub, self.absprec
        )

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        absprec = min(self.absprec + other.val, other.absprec + self.val)
        val = self.val + other.val
        if absprec <= val:
            return QuadExtElement(self.p, self.nonres, absprec, 0, 0, absprec)
        m = self.p ** (absprec - val)
        a, b, c, d = self.ua, self.ub, other.ua, other.ub
        ra = (a * c + b * d % m * self.nonres) % m
        rb = (a * d + b * c) % m
        return QuadExtElement(self.p, self.nonres, val, ra, rb, absprec)

    __rmul__ = __mul__

    def frobenius(self) -> "QuadExtElement":
        """The nontrivial automorphism over Q_p: omega -> -omega."""
        return QuadExtElement(
            self.p, self.nonres, self.val, self.ua, -self.ub, self.absprec
        )

    def norm(self) -> PadicElement:
        """Norm to Q_p: x * frobenius(x)."""
        rel = self.relprec
        if self.is_zero():
            return PadicElement.zero(self.p, 2 * self.val)
        m = self.p**rel
        n = (self.ua * self.ua - self.ub * self.ub % m * self.nonres) % m
        return PadicElement(self.p, 2 * self.val, n, 2 * self.val + rel)

    def trace(self) -> PadicElement:
        """Trace to Q_p: x + frobenius(x)."""
        return PadicElement(self.p, self.val, 2 * self.ua, self.absprec)

    def inverse(self) -> "QuadExtElement":
        if self.is_zero():
            raise ZeroDivisionError("inverse of (indistinguishable) zero")
        rel = self.relprec
        m = self.p**rel
        n = (self.ua * self.ua - self.ub * self.ub % m * self.nonres) % m
        ninv = pow(n, -1, m)
        return QuadExtElement(
            self.p,
            self.nonres,
            -self.val,
            self.ua * ninv % m,
            -self.ub * ninv % m,
            -self.val + rel,
        )

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = QuadExtElement.one(self.p, self.nonres, self.relprec)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return (self - other).is_zero()

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    __hash__ = None

    def __repr__(self):
        if self.is_zero():
            return f"O({self.p}^{self.absprec})"
        return (
            f"({self.ua} + {self.ub}*w)*{self.p}^{self.val}"
            f" + O({self.p}^{self.absprec})  [w^2={self.nonres}]"
        )

    # -- analytic ----------------------------------------------------------

    def teichmueller(self) -> "QuadExtElement":
        """The (p^2-1)-st root of unity congruent to the unit part mod p."""
        if self.is_zero():
            raise ZeroDivisionError("teichmueller of zero")
        t = self.unit_part()
        p2 = self.p * self.p
        for _ in range(self.relprec):
            t = t**p2
        return t


# ---------------------------------------------------------------------------
# log / exp / sqrt across both fields


def _ilog(n: int, base: int) -> int:
    """floor(log_base(n)) for n >= 1."""
    e, t = 0, base
    while t <= n:
        t *= base
        e += 1
    return e


def _one_unit_log(u):
    """log of a 1-unit (valuation of u-1 >= 1) by the alternating series.

    Works for PadicElement and QuadExtElement alike; the tracked precision of
    the result is the honest one (each term x^j/j is known past the input
    precision because (j-1)*val(x) >= val(j)).
    """
    x = u - 1
    if x.is_zero():
        return x
    k = x.absprec
    nterms = k + _ilog(max(k, 1), x.p) + 2
    total = x
    xpow = x
    for j in range(2, nterms + 1):
        xpow = xpow * x
        term = xpow / j
        total = total + (-term if j % 2 == 0 else term)
    return total


def padic_log(x):
    """Branch-fixed logarithm (log p = 0, log of Teichmueller parts = 0).

    Defined for every nonzero x in Q_p or its quadratic extension; returns an
    element of the same field with valuation >= 1.
    """
    if x.is_zero():
        raise ZeroDivisionError("log of zero")
    u = x.unit_part()
    t = u.teichmueller()
    return _one_unit_log(u / t)


def padic_exp(x):
    """Exponential, requiring valuation >= 1 (odd p)."""
    if x.is_zero():
        return x + 1
    if x.valuation < 1:
        raise PrecisionError("exp requires valuation >= 1")
    k = x.absprec
    p = x.p
    # need j*val - val(j!) >= k; val(j!) <= (j-1)/(p-1)
    nterms = (k * (p - 1)) // (p - 2) + 2
    total = x + 1
    xpow = x
    fact = 1
    for j in range(2, nterms + 1):
        xpow = xpow * x
        fact *= j
        total = total + xpow / fact
    return total


def padic_sqrt(x: PadicElement) -> PadicElement:
    """Square root inside Q_p; raises NotASquareError when there is none."""
    return x.sqrt()


def sqrt_in_quadratic_ext(x: PadicElement, nonres: int) -> QuadExtElement:
    """Square root of a base-field element inside Q_p(omega), omega^2 = nonres.

    Exists iff the valuation is even (the extension is unramified).  For a
    residue unit this embeds the base-field root; for a nonresidue it returns
    omega * sqrt(x / nonres).  Deterministic branch as in PadicElement.sqrt.
    """
    if x.is_zero():
        return QuadExtElement.from_base(x.sqrt(), nonres)
    if x.val % 2:
        raise NotASquareError("odd valuation: root lives in a ramified extension")
    if legendre_symbol(x.unit % x.p, x.p) == 1:
        return QuadExtElement.from_base(x.sqrt(), nonres)
    r = (x / nonres).sqrt()
    return QuadExtElement(x.p, nonres, r.val, 0, r.unit, r.absprec)
