"""Rigid-analytic uniformization of multiplicative-reduction curves.

For E/Q_p with multiplicative reduction the parameter q with j(q) = j(E) is
found by inverting the exact integer q-expansion of j with a contracting
fixed-point iteration in Q_p (v(q) = -v(j) > 0).  The standard parametrizing
series

    X(u) = sum_n q^n u / (1 - q^n u)^2 - 2 s_1(q)
    Y(u) = sum_n (q^n u)^2 / (1 - q^n u)^3 + s_1(q)

land on the model y^2 + x y = x^3 + a4(q) x + a6(q) with a4 = -5 s_3 and
a6 = -(5 s_3 + 7 s_5)/12, s_k(q) = sum sigma_k(m) q^m.  A coordinate change
(u0, r, s, t) moves this onto the minimal model of E; solving for it needs
one square root, which lives in Q_p exactly when the reduction is split and
in the unramified quadratic extension otherwise — the same code path covers
both, and the splitting diagnosis is cross-checked against a_p.

All series are evaluated through plain Python operators, so the same
functions run on tracked p-adic elements and on mpmath complex numbers (the
archimedean uniformization reuses them).
"""

from __future__ import annotations

from .curves import EllipticCurve
from .padics import (
    PadicElement,
    QuadExtElement,
    smallest_nonresidue,
    sqrt_in_quadratic_ext,
)


# ---------------------------------------------------------------------------
# exact integer q-expansions


def _zseries_mul(a, b, n):
    out = [0] * n
    for i, ai in enumerate(a[:n]):
        if ai:
            for j, bj in enumerate(b[: n - i]):
                out[i + j] += ai * bj
    return out


def _zseries_inv(a, n):
    assert a[0] in (1, -1)
    inv = [a[0]] + [0] * (n - 1)
    for k in range(1, n):
        acc = 0
        for i in range(1, min(k, len(a) - 1) + 1):
            acc += a[i] * inv[k - i]
        inv[k] = -a[0] * acc
    return inv


def sigma_series(k: int, n: int):
    """[0, sigma_k(1), ..., sigma_k(n-1)] — sums of k-th powers of divisors."""
    out = [0] * n
    for d in range(1, n):
        dk = d**k
        for m in range(d, n, d):
            out[m] += dk
    return out


def j_expansion_times_q(n: int):
    """Coefficients of q*j(q) = E4(q)^3 / (Delta(q)/q), an element of Z[[q]]."""
    e4 = [1] + [240 * c for c in sigma_series(3, n)[1:]]
    euler = [0] * n
    euler[0] = 1
    k = 1
    while k * (3 * k - 1) // 2 < n:
        for m in (k * (3 * k - 1) // 2, k * (3 * k + 1) // 2):
            if m < n:
                euler[m] += (-1) ** k
        k += 1
    # Delta/q = (Euler product)^24, built by repeated squaring
    e2 = _zseries_mul(euler, euler, n)
    e4p = _zseries_mul(e2, e2, n)
    e8p = _zseries_mul(e4p, e4p, n)
    e16p = _zseries_mul(e8p, e8p, n)
    delta_over_q = _zseries_mul(e16p, e8p, n)
    num = _zseries_mul(_zseries_mul(e4, e4, n), e4, n)
    return _zseries_mul(num, _zseries_inv(delta_over_q, n), n)


def tate_model_series(n: int):
    """(a4, a6, s1) integer coefficient lists for the uniformized model."""
    s1 = sigma_series(1, n)
    s3 = sigma_series(3, n)
    s5 = sigma_series(5, n)
    a4 = [-5 * c for c in s3]
    a6 = []
    for m in range(n):
        num = -(5 * s3[m] + 7 * s5[m])
        assert num % 12 == 0
        a6.append(num // 12)
    return a4, a6, s1


# ---------------------------------------------------------------------------
# the parameter q


def tate_parameter(curve: EllipticCurve, p: int, prec: int) -> PadicElement:
    """q with j(q) = j(E) in Q_p; v(q) = -v_p(j) > 0.  Verified on return."""
    j = PadicElement.from_fraction(curve.j_invariant, p, prec)
    if j.valuation >= 0:
        raise ValueError(f"{curve.label or curve.ainvs} is not multiplicative at {p}")
    n = -j.valuation
    nterms = prec // n + 3
    jc = j_expansion_times_q(nterms + 1)

    def tail(qq):  # c(q) = j(q) - 1/q evaluated at qq
        acc = PadicElement.from_int(jc[1], p, prec)
        qpow = PadicElement.one(p, prec)
        for k in range(2, nterms + 1):
            qpow = qpow * qq
            acc = acc + qpow * jc[k]
        return acc

    q = j.inverse()
    for _ in range(2 * prec):
        q_new = (j - tail(q)).inverse()
        if (q_new - q).is_zero():
            q = q_new
            break
        q = q_new
    # verification: q * j(q) == sum jc[k] q^k
    acc = PadicElement.zero(p, prec + n)
    qpow = PadicElement.one(p, prec + n)
    for k in range(nterms + 1):
        acc = acc + qpow * jc[k]
        qpow = qpow * q
    assert (q * j - acc).is_zero(), "tate parameter verification failed"
    assert q.valuation == n
    return q


# ---------------------------------------------------------------------------
# generic series evaluation (p-adic or complex)


def xy_from_parameter(u, q, s1_value, nterms: int):
    """(X, Y) of the uniformized model at parameter u; u must not be 1."""
    one = (u - u) + 1  # 1 in the field of u
    x = u / (1 - u) ** 2
    y = u * u / (1 - u) ** 3
    ui = one / u
    qn = one
    for _ in range(1, nterms + 1):
        qn = qn * q
        a = qn * u
        b = qn * ui
        x = x + a / (1 - a) ** 2 + b / (1 - b) ** 2
        y = y + a * a / (1 - a) ** 3 - b / (1 - b) ** 3
    return x - 2 * s1_value, y + s1_value


def evaluate_series(coeffs, q, upto: int):
    """sum coeffs[m] q^m for m < upto, in the field of q."""
    acc = (q - q) + coeffs[0]
    qpow = (q - q) + 1
    for m in range(1, min(upto, len(coeffs))):
        qpow = qpow * q
        acc = acc + qpow * coeffs[m]
    return acc


def solve_model_transport(curve: EllipticCurve, a4q, a6q, sqrt_fn):
    """(u0, r, s, t) carrying y^2+xy = x^3+a4q x+a6q onto the curve's model.

    sqrt_fn extracts the one square root needed; p-adically it may land in
    the quadratic extension (nonsplit case), over C it is the usual branch."""
    c4_src = 1 - 48 * a4q
    c6_src = -1 + 72 * a4q - 864 * a6q
    u2 = (c6_src * curve.c4) / (c4_src * curve.c6)
    u0 = sqrt_fn(u2)
    s = (u0 * curve.a1 - 1) / 2
    r = (u0 * u0 * curve.a2 + s + s * s) / 3
    t = (u0 ** 3 * curve.a3 - r) / 2
    return u0, r, s, t


class TateCurve:
    """The p-adic uniformization of a multiplicative-reduction curve.

    parametrize() maps the quadratic extension's units (mod q^Z) to points of
    the curve over that extension; it is a group homomorphism, split or not.
    """

    def __init__(self, curve: EllipticCurve, p: int, prec: int):
        self.curve = curve
        self.p = p
        self.prec = prec
        self.nonres = smallest_nonresidue(p)
        self.q = tate_parameter(curve, p, prec)
        self.ord_q = self.q.valuation
        nterms = prec // self.ord_q + 3
        a4c, a6c, s1c = tate_model_series(nterms + 1)
        self.a4q = evaluate_series(a4c, self.q, nterms + 1)
        self.a6q = evaluate_series(a6c, self.q, nterms + 1)
        u0, r, s, t = solve_model_transport(
            curve,
            self.a4q,
            self.a6q,
            lambda v: sqrt_in_quadratic_ext(v, self.nonres),
        )
        self.u0, self.r, self.s, self.t = u0, r, s, t
        self.is_split = u0.is_in_base()
        expected_split = curve.ap(p) == 1
        assert self.is_split == expected_split, (
            "splitting diagnosis disagrees with a_p"
        )
        self._nterms = nterms
        self._q_ext = QuadExtElement.from_base(self.q, self.nonres)
        self._s1v = evaluate_series(s1c, self._q_ext, nterms + 1)

    def _to_ext(self, x) -> QuadExtElement:
        if isinstance(x, QuadExtElement):
            return x
        return QuadExtElement.from_base(x, self.nonres)

    def normalize_parameter(self, u) -> QuadExtElement:
        """Multiply by a power of q so that 0 <= val < ord_q."""
        u = self._to_ext(u)
        k = u.valuation // self.ord_q
        return u * self._to_ext(self.q) ** (-k)

    def parameter_descends(self, u) -> bool:
        """Does the class of u give a point over the base field?

        Split case: u must lie in Q_p (mod q^Z).  Nonsplit case: the norm of
        u must land in q^Z exactly --- otherwise the parametrized point lives
        on the quadratic twist, and callers should report that rather than
        quietly accept the point.
        """
        u = self.normalize_parameter(u)
        if self.is_split:
            return u.is_in_base()
        nm = self._to_ext(u.norm())
        k, rem = divmod(nm.valuation, self.ord_q)
        if rem != 0:
            return False
        return (nm * self._q_ext ** (-k) - 1).is_zero()

    def parametrize(self, u):
        """The point of E attached to the unit u (None for the identity class)."""
        u = self.normalize_parameter(u)
        if (u - 1).is_zero():
            return None
        x_src, y_src = xy_from_parameter(u, self._q_ext, self._s1v, self._nterms)
        u0, r, s, t = self.u0, self.r, self.s, self.t
        x = (x_src - r) / (u0 * u0)
        y = (y_src - s * (x_src - r) - t) / (u0 ** 3)
        return (x, y)
