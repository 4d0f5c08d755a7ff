"""Quadratic fields and binary quadratic forms.

Indefinite forms (positive nonsquare discriminant) carry the real-quadratic
class data: narrow classes are enumerated as cycles of reduced forms under
the standard reduction step, composition is Gauss's rule on concordant
representatives, and genus characters evaluate a Kronecker symbol on a
represented value coprime to the discriminant.

Positive-definite forms (negative discriminant) supply the CM side: reduced
representatives, class numbers, and a form of discriminant D with leading
coefficient divisible by a prescribed level (whose root in the upper half
plane is the corresponding CM point).

An optimal embedding packages a form (A, B, C) with M | A and p coprime to
A: its fixed point tau = (-B + sqrt(D))/(2A) lives in the unramified
quadratic extension of Q_p when p is inert, and the automorph attached to
the fundamental totally-positive Pell unit is an integer matrix in
Gamma_0(M) fixing tau.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt

from .padics import PadicElement, QuadExtElement, sqrt_in_quadratic_ext


# ---------------------------------------------------------------------------
# Kronecker symbol


def kronecker_symbol(a: int, n: int) -> int:
    """The Kronecker symbol (a|n), totally multiplicative extension of Jacobi."""
    if n == 0:
        return 1 if a in (1, -1) else 0
    sign = 1
    if n < 0:
        n = -n
        if a < 0:
            sign = -sign
    # factor out 2s from n: (a|2) = 0, 1, -1 for a even, a = +-1 (8), a = +-3 (8)
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            sign = -sign
    a %= n
    # Jacobi for odd positive n
    while a != 0:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                sign = -sign
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            sign = -sign
        a %= n
    return sign if n == 1 else 0


def is_discriminant(d: int) -> bool:
    return d % 4 in (0, 1)


def is_fundamental_discriminant(d: int) -> bool:
    if d == 1 or not is_discriminant(d):
        return False
    if d % 4 == 1:
        return _squarefree(d)
    m = d // 4
    return _squarefree(m) and m % 4 in (2, 3)


def _squarefree(n: int) -> bool:
    n = abs(n)
    if n == 0:
        return False
    k = 2
    while k * k <= n:
        if n % (k * k) == 0:
            return False
        k += 1
    return True


# ---------------------------------------------------------------------------
# binary quadratic forms


@dataclass(frozen=True)
class BinaryQF:
    """A x^2 + B x y + C y^2 with integer coefficients."""

    a: int
    b: int
    c: int

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def value(self, x: int, y: int) -> int:
        return self.a * x * x + self.b * x * y + self.c * y * y

    def is_primitive(self) -> bool:
        return gcd(gcd(self.a, self.b), self.c) == 1

    def transform(self, m) -> "BinaryQF":
        """The form f((x,y) * m^T), m = ((p, q), (r, s)) with det 1."""
        (p, q), (r, s) = m
        assert p * s - q * r == 1
        a2 = self.value(p, r)
        c2 = self.value(q, s)
        b2 = 2 * (self.a * p * q + self.c * r * s) + self.b * (p * s + q * r)
        return BinaryQF(a2, b2, c2)

    # -- indefinite (D > 0 nonsquare) -------------------------------------

    def is_reduced_indefinite(self) -> bool:
        """Exact test: 0 < b < sqrt(D) and sqrt(D) - b < 2|a| < sqrt(D) + b."""
        d = self.disc
        if d <= 0 or isqrt(d) ** 2 == d:
            raise ValueError("need a positive nonsquare discriminant")
        b = self.b
        if b <= 0 or b * b >= d:
            return False
        a2 = 2 * abs(self.a)
        # sqrt(D) - b < a2  <=>  D < (a2 + b)^2
        if d >= (a2 + b) ** 2:
            return False
        # a2 < sqrt(D) + b  <=>  (a2 - b)^2 < D whenever a2 > b
        if a2 > b and (a2 - b) ** 2 >= d:
            return False
        return True

    def reduction_step(self) -> "BinaryQF":
        """rho: (a, b, c) -> (c, r, (r^2 - D)/(4c)) with r = -b mod 2|c|
        placed in (sqrt(D) - 2|c|, sqrt(D)) — or (-|c|, |c|] when |c| exceeds
        sqrt(D)."""
        d = self.disc
        c = self.c
        sq = isqrt(d)
        ca = abs(c)
        if ca > sq:
            r = (-self.b) % (2 * ca)
            if r > ca:
                r -= 2 * ca
        else:
            r = sq - ((sq + self.b) % (2 * ca))
        return BinaryQF(c, r, (r * r - d) // (4 * c))

    def reduce_indefinite(self) -> "BinaryQF":
        f = self
        for _ in range(10000):
            if f.is_reduced_indefinite():
                return f
            f = f.reduction_step()
        raise RuntimeError("reduction did not terminate")

    def cycle(self) -> list["BinaryQF"]:
        """The full cycle of reduced forms equivalent to this one."""
        f0 = self.reduce_indefinite()
        out = [f0]
        f = f0.reduction_step()
        while f != f0:
            out.append(f)
            f = f.reduction_step()
            if len(out) > 10000:
                raise RuntimeError("cycle walk did not close")
        return out

    def equivalent_indefinite(self, other: "BinaryQF") -> bool:
        if self.disc != other.disc:
            return False
        return other.reduce_indefinite() in self.cycle()

    # -- definite (D < 0, a > 0) -------------------------------------------

    def reduce_definite(self) -> "BinaryQF":
        a, b, c = self.a, self.b, self.c
        assert self.disc < 0 and a > 0
        while True:
            if -a < b <= a <= c:
                if a == c and b < 0:
                    b = -b
                return BinaryQF(a, b, c)
            if c < a or (c == a and b < 0):
                a, b, c = c, -b, a
                continue
            delta = _round_to_nearest(b, 2 * a)
            b2 = b - 2 * a * delta
            c2 = (b2 * b2 - self.disc) // (4 * a)
            b, c = b2, c2

    def represent_coprime_to(self, n: int, positive: bool = True) -> int:
        """A value f(x, y) coprime to n (and positive if asked)."""
        for box in range(1, 40):
            for x in range(-box, box + 1):
                for y in range(-box, box + 1):
                    v = self.value(x, y)
                    if v != 0 and (v > 0 or not positive) and gcd(v, n) == 1:
                        return v
        raise RuntimeError("no coprime represented value found in search box")


def _round_to_nearest(num: int, den: int) -> int:
    """Nearest integer to num/den, ties toward zero; den may be negative."""
    if den < 0:
        num, den = -num, -den
    q, r = divmod(num, den)
    return q + (1 if 2 * r > den else 0)


def reduced_indefinite_forms(d: int) -> list[BinaryQF]:
    """All reduced forms of positive nonsquare discriminant d."""
    sq = isqrt(d)
    assert d > 0 and sq * sq != d and is_discriminant(d)
    out = []
    for b in range(1, sq + 1):
        if (d - b * b) % 4 != 0:
            continue
        prod = (d - b * b) // 4  # = -a*c > 0, so |a| divides it
        for a_abs in range(1, sq + 2):  # reduced forces 2|a| < sqrt(d) + b
            if prod % a_abs != 0:
                continue
            for a in (a_abs, -a_abs):
                c = (b * b - d) // (4 * a)
                f = BinaryQF(a, b, c)
                if f.is_reduced_indefinite() and f.is_primitive():
                    out.append(f)
    return out


def narrow_class_representatives(d: int) -> list[BinaryQF]:
    """One reduced representative per narrow ideal class (= cycle of forms)."""
    remaining = set(reduced_indefinite_forms(d))
    reps = []
    while remaining:
        f = min(remaining, key=lambda g: (abs(g.a), g.a < 0, g.b))
        cyc = f.cycle()
        reps.append(cyc[0] if f not in cyc else f)
        for g in cyc:
            remaining.discard(g)
    return sorted(reps, key=lambda g: (abs(g.a), g.a < 0, g.b))


def reduced_definite_forms(d: int) -> list[BinaryQF]:
    """All reduced primitive positive-definite forms of discriminant d < 0."""
    assert d < 0 and is_discriminant(d)
    out = []
    b = d % 2
    while b * b <= -d // 3:
        m = (b * b - d) // 4
        for a in range(max(b, 1), isqrt(m) + 1):
            if m % a != 0:
                continue
            c = m // a
            f = BinaryQF(a, b, c)
            if not f.is_primitive():
                continue
            if -a < b <= a <= c and not (a == c and b < 0):
                out.append(f)
                if 0 < b < a < c:
                    out.append(BinaryQF(a, -b, c))
        b += 2
    return sorted(out, key=lambda g: (g.a, g.b))


def class_number(d: int) -> int:
    if d < 0:
        return len(reduced_definite_forms(d))
    return len(narrow_class_representatives(d))


# ---------------------------------------------------------------------------
# Pell units


def pell_plus_four(d: int) -> tuple[int, int]:
    """Smallest (t, u), u >= 1, with t^2 - d u^2 = 4: the totally positive
    fundamental unit (t + u sqrt(d))/2 of the order of discriminant d."""
    u = 1
    while True:
        t2 = 4 + d * u * u
        t = isqrt(t2)
        if t * t == t2:
            return (t, u)
        u += 1


def fundamental_unit_norm(d: int) -> int:
    """-1 if x^2 - d y^2 = -4 is solvable below the +4 solution, else +1."""
    t_plus, u_plus = pell_plus_four(d)
    for u in range(1, u_plus + 1):
        t2 = d * u * u - 4
        if t2 >= 0:
            t = isqrt(t2)
            if t * t == t2:
                return -1
    return 1


# ---------------------------------------------------------------------------
# composition and genus characters


def compose(f1: BinaryQF, f2: BinaryQF) -> BinaryQF:
    """Gauss composition via concordant representatives (same discriminant)."""
    assert f1.disc == f2.disc
    d = f1.disc
    # replace f2 by an equivalent form whose leading coefficient is coprime
    # to 2 a1: primitive forms represent such values on primitive vectors
    a1 = f1.a
    x = y = a2 = None
    for box in range(1, 60):
        for xx in range(-box, box + 1):
            for yy in range(-box, box + 1):
                if gcd(xx, yy) != 1:
                    continue
                v = f2.value(xx, yy)
                if v != 0 and gcd(v, 2 * a1) == 1:
                    x, y, a2 = xx, yy, v
                    break
            if a2:
                break
        if a2:
            break
    if a2 is None:
        raise RuntimeError("no concordant representative found")
    # complete (x, y) to a unimodular matrix and transform
    _, r, s = _xgcd(x, y)
    m = ((x, -s), (y, r))
    (pp, qq), (rr, ss) = m
    if pp * ss - qq * rr != 1:
        m = ((x, s), (y, -r))
    f2p = f2.transform(m)
    assert f2p.a == a2
    # concordant pair: common middle coefficient B = b1 mod 2a1, b2' mod 2a2
    b1, b2 = f1.b, f2p.b
    m1, m2 = 2 * a1, 2 * a2
    # CRT (moduli with gcd 2 dividing b2 - b1: both b's share the parity of D)
    gmod = gcd(m1, m2)
    assert (b2 - b1) % gmod == 0
    lcm = m1 // gmod * m2
    k = ((b2 - b1) // gmod * pow(m1 // gmod, -1, m2 // gmod)) % (m2 // gmod)
    bb = (b1 + m1 * k) % lcm
    cc_num = bb * bb - d
    assert cc_num % (4 * a1 * a2) == 0
    return BinaryQF(a1 * a2, bb, cc_num // (4 * a1 * a2))


def splits_as_fundamental_pair(d: int, d1: int) -> bool:
    """d = d1 * d2 with both factors fundamental discriminants."""
    if d1 in (1, d) or d % d1 != 0:
        return False
    d2 = d // d1
    return is_fundamental_discriminant(d1) and is_fundamental_discriminant(d2)


def genus_character(d1: int, form: BinaryQF) -> int:
    """chi_{d1}(class of form): Kronecker (d1 | m) on a represented m
    coprime to the discriminant."""
    d = form.disc
    assert splits_as_fundamental_pair(d, d1)
    m = form.represent_coprime_to(2 * abs(d))
    return kronecker_symbol(d1, m)


# ---------------------------------------------------------------------------
# exact elements of Q(sqrt(d))


@dataclass(frozen=True)
class QuadNumber:
    """a + b sqrt(d) with exact rational coordinates."""

    d: int
    a: Fraction
    b: Fraction

    @classmethod
    def make(cls, d: int, a, b=0) -> "QuadNumber":
        return cls(d, Fraction(a), Fraction(b))

    def __add__(self, other):
        other = self._coerce(other)
        return QuadNumber(self.d, self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __neg__(self):
        return QuadNumber(self.d, -self.a, -self.b)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        return QuadNumber(
            self.d,
            self.a * other.a + self.b * other.b * self.d,
            self.a * other.b + self.b * other.a,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def _coerce(self, other) -> "QuadNumber":
        if isinstance(other, QuadNumber):
            assert other.d == self.d
            return other
        return QuadNumber(self.d, Fraction(other), Fraction(0))

    def conjugate(self) -> "QuadNumber":
        return QuadNumber(self.d, self.a, -self.b)

    def norm(self) -> Fraction:
        return self.a * self.a - self.b * self.b * self.d

    def trace(self) -> Fraction:
        return 2 * self.a

    def inverse(self) -> "QuadNumber":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError
        return QuadNumber(self.d, self.a / n, -self.b / n)

    def __pow__(self, n: int) -> "QuadNumber":
        if n < 0:
            return self.inverse() ** (-n)
        result = QuadNumber(self.d, Fraction(1), Fraction(0))
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def is_rational(self) -> bool:
        return self.b == 0

    def embed_padic(self, p: int, nonres: int, prec: int) -> QuadExtElement:
        """Image in Q_p(omega) sending sqrt(d) to the canonical square root."""
        root = sqrt_in_quadratic_ext(PadicElement.from_int(self.d, p, prec), nonres)
        a = QuadExtElement.from_base(PadicElement.from_fraction(self.a, p, prec), nonres)
        b = QuadExtElement.from_base(PadicElement.from_fraction(self.b, p, prec), nonres)
        return a + b * root

    def embed_real(self, mp_ctx):
        """Image in R using the positive square root (any mpmath context)."""
        return mp_ctx.mpf(self.a.numerator) / self.a.denominator + (
            mp_ctx.mpf(self.b.numerator) / self.b.denominator
        ) * mp_ctx.sqrt(self.d)


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        qq = old_r // r
        old_r, r = r, old_r - qq * r
        old_s, s = s, old_s - qq * s
        old_t, t = t, old_t - qq * t
    return old_r, old_s, old_t


# ---------------------------------------------------------------------------
# optimal embeddings


@dataclass(frozen=True)
class OptimalEmbedding:
    """A form (A, B, C) of discriminant D with M | A and gcd(A, p) = 1,
    together with the automorph of the fundamental +4 Pell unit.

    tau = (-B + sqrt(D)) / (2A) is the fixed point; with p inert in the real
    quadratic field it lies in the unramified quadratic extension."""

    form: BinaryQF
    level_m: int
    p: int

    def __post_init__(self):
        a = self.form.a
        assert a % self.level_m == 0, "level must divide the leading coefficient"
        assert a % self.p != 0, "leading coefficient must be a p-unit"
        assert self.form.disc > 0 and kronecker_symbol(self.form.disc, self.p) == -1

    @property
    def disc(self) -> int:
        return self.form.disc

    def automorph(self) -> tuple[tuple[int, int], tuple[int, int]]:
        """gamma in Gamma_0(M) (det 1, trace t) fixing tau."""
        t, u = pell_plus_four(self.disc)
        a, b, c = self.form.a, self.form.b, self.form.c
        assert (t - b * u) % 2 == 0
        return (((t - b * u) // 2, -c * u), (a * u, (t + b * u) // 2))

    def tau_padic(self, nonres: int, prec: int) -> QuadExtElement:
        num = QuadNumber(self.disc, Fraction(-self.form.b, 2 * self.form.a),
                         Fraction(1, 2 * self.form.a))
        return num.embed_padic(self.p, nonres, prec)

    def tau_conjugate_padic(self, nonres: int, prec: int) -> QuadExtElement:
        num = QuadNumber(self.disc, Fraction(-self.form.b, 2 * self.form.a),
                         Fraction(-1, 2 * self.form.a))
        return num.embed_padic(self.p, nonres, prec)


def embedding_for_class(
    form: BinaryQF, level_m: int, p: int, search_box: int = 60
) -> OptimalEmbedding:
    """An optimal embedding in the narrow class of the given form.

    Scans primitive vectors until the form represents a leading coefficient
    divisible by level_m and coprime to p, then changes variables."""
    for box in range(1, search_box + 1):
        for x in range(-box, box + 1):
            for y in range(-box, box + 1):
                if gcd(x, y) != 1:
                    continue
                v = form.value(x, y)
                if v == 0 or v % level_m != 0 or v % p == 0:
                    continue
                _, r, s = _xgcd(x, y)
                m = ((x, -s), (y, r))
                (pp, qq), (rr, ss) = m
                if pp * ss - qq * rr != 1:
                    m = ((x, s), (y, -r))
                g = form.transform(m)
                assert g.a == v
                return OptimalEmbedding(g, level_m, p)
    raise RuntimeError("no admissible representative found")


def heegner_form(n: int, d: int) -> BinaryQF:
    """A form (A, B, C) of discriminant d < 0 with n | A, smallest B >= 0.

    Its root (-B + sqrt(d))/(2A) in the upper half plane is a CM point whose
    image under z -> n z is CM by the same order."""
    assert d < 0 and is_discriminant(d)
    for b in range(abs(d) % 2, 2 * n, 2):
        if (b * b - d) % (4 * n) == 0:
            return BinaryQF(n, b, (b * b - d) // (4 * n))
    raise ValueError(f"discriminant {d} admits no form of level {n}")


def negative_class_number(d: int) -> int:
    """The number of classes of primitive forms of discriminant d < 0, by
    counting reduced forms (|b| <= a <= c, with b >= 0 when |b| = a or a = c)."""
    assert d < 0 and is_discriminant(d)
    count = 0
    b = abs(d) % 2
    while b * b <= -d // 3 + 1:
        m = (b * b - d) // 4
        if (b * b - d) % 4 == 0:
            a = max(b, 1)
            while a * a <= m:
                if m % a == 0:
                    c = m // a
                    if gcd(gcd(a, b), c) == 1:
                        count += 1
                        if 0 < b < a < c:
                            count += 1  # (a, -b, c) is a distinct class
                a += 1
        b += 2
    return count
