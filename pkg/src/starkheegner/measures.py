"""Boundary measures on P^1(Q_p) attached to a p-new Hecke eigensymbol.

For a curve of conductor N = p*M (p exactly dividing N, p coprime to M) the
U_p-eigensymbol phi with eigenvalue a_p = +-1 induces a family of Z-valued
measures mu_{r->s} on P^1(Q_p), one for each pair of cusps, additive in the
path.  On a canonical finite ball a + p^n Z_p the value is

    mu_{r->s}(a + p^n Z_p) = a_p^n * phi{ (r-a)/p^n  ->  (s-a)/p^n },

i.e. the level-raising matrix [[1, -a], [0, p^n]] moves the ball to Z_p and
the path along with it; the a_p-power compensates its determinant.

Balls around infinity are handled by transport through sigma = [[1,0],[M,1]],
an element of Gamma_0(M): if W = { t : 1/t in b + p^n Z_p } with b = 0 mod p,
then sigma^(-1) W = { u : 1/u in (b - M) + p^n Z_p } is the *finite* ball
centered at (b - M)^(-1) mod p^n (b - M is a p-unit), so

    mu_{r->s}(W) = mu_{sigma^(-1) r -> sigma^(-1) s}(sigma^(-1) W).

The whole system is determined by these two rules.  Its coherence (the same
value no matter how a ball is reached), U_p-harmonicity, total mass zero, and
Gamma_0(M)-equivariance are consequences of the eigen property; the test suite
checks them exactly, as integers, at all depths used.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .modsym import EigenSymbol


@dataclass(frozen=True)
class Ball:
    """A canonical ball of P^1(Q_p).

    infinite=False: the set center + p^depth Z_p with 0 <= center < p^depth.
    infinite=True:  the set { t : 1/t in center + p^depth Z_p } with
                    center = 0 mod p (these partition P^1 minus Z_p).
    """

    infinite: bool
    center: int
    depth: int

    def validate(self, p: int) -> "Ball":
        if self.depth < 0 or not 0 <= self.center < p**self.depth:
            raise ValueError(f"non-canonical ball {self}")
        if self.infinite and (self.depth < 1 or self.center % p != 0):
            raise ValueError(f"non-canonical ball around infinity {self}")
        return self

    def children(self, p: int):
        """The p canonical balls refining this one."""
        step = p**self.depth
        return [
            Ball(self.infinite, self.center + c * step, self.depth + 1)
            for c in range(p)
        ]


def zp_ball() -> Ball:
    return Ball(False, 0, 0)


def complement_ball() -> Ball:
    """P^1(Q_p) minus Z_p as a single canonical ball."""
    return Ball(True, 0, 1)


def depth_partition(p: int, depth: int):
    """Partition of P^1(Q_p) into p^depth + p^(depth-1) canonical balls."""
    if depth < 1:
        return [zp_ball(), complement_ball()]
    fin = [Ball(False, a, depth) for a in range(p**depth)]
    inf = [Ball(True, b, depth) for b in range(0, p**depth, p)]
    return fin + inf


def shift_cusp(cusp, a: int, pn: int):
    """(x - a) / pn on cusps (None = infinity is fixed)."""
    if cusp is None:
        return None
    return (Fraction(cusp) - a) / pn


def sigma_inverse_cusp(cusp, m: int):
    """Action of [[1,0],[-m,1]] on a cusp: x -> x/(1 - m x)."""
    if cusp is None:
        return Fraction(-1, m)
    x = Fraction(cusp)
    den = 1 - m * x
    if den == 0:
        return None
    return x / den


class BoundaryMeasure:
    """The Z-valued measure system mu_{r->s} of a p-new eigensymbol."""

    def __init__(self, symbol: EigenSymbol, p: int):
        n = symbol.curve.conductor()
        if n % p != 0 or (n // p) % p == 0:
            raise ValueError(f"{p} must divide the conductor {n} exactly once")
        self.symbol = symbol
        self.p = p
        self.m = n // p
        self.ap = symbol.curve.ap(p)
        if self.ap not in (1, -1):
            raise ValueError("multiplicative reduction required (a_p = +-1)")
        self._cache: dict = {}

    def of(self, ball: Ball, start, end) -> int:
        """mu_{start->end}(ball), an exact integer."""
        ball.validate(self.p)
        key = (ball, start, end)
        if key in self._cache:
            return self._cache[key]
        if ball.infinite:
            pn = self.p**ball.depth
            c = pow(ball.center - self.m, -1, pn) % pn
            val = self._finite(
                c,
                ball.depth,
                sigma_inverse_cusp(start, self.m),
                sigma_inverse_cusp(end, self.m),
            )
        else:
            val = self._finite(ball.center, ball.depth, start, end)
        self._cache[key] = val
        return val

    def _finite(self, a: int, n: int, start, end) -> int:
        pn = self.p**n
        value = self.symbol.path_value(shift_cusp(start, a, pn), shift_cusp(end, a, pn))
        return value if self.ap == 1 or n % 2 == 0 else -value

    # -- exact law checks (used by tests and certificate residuals) ---------

    def total_mass(self, start, end) -> int:
        return self.of(zp_ball(), start, end) + self.of(complement_ball(), start, end)

    def harmonicity_defect(self, ball: Ball, start, end) -> int:
        """mu(ball) - sum of mu over the p children; zero for a true measure."""
        total = sum(self.of(child, start, end) for child in ball.children(self.p))
        return self.of(ball, start, end) - total

    def refinement_defect(self, ball: Ball, start, end) -> int:
        """Compatibility of mu with the degree-p scaling x -> p x.

        The matrix [[p,0],[0,1]] sends the finite ball (a, n) to (p a, n+1)
        and twists the system by a_p; the defect
            mu_{p*start -> p*end}(p a, n+1) - a_p * mu_{start->end}(a, n)
        vanishes identically."""
        if ball.infinite:
            raise ValueError("refinement defect is defined for finite balls")
        image = Ball(False, self.p * ball.center, ball.depth + 1)
        lhs = self.of(
            image,
            None if start is None else Fraction(start) * self.p,
            None if end is None else Fraction(end) * self.p,
        )
        return lhs - self.ap * self.of(ball, start, end)
