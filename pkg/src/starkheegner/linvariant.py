"""The L-invariant of a curve with multiplicative reduction at p.

Computed on the automorphic side from the boundary-measure system.  For a
quadratic Dirichlet character chi of conductor f coprime to the conductor,
twisting the measure's Mellin transform by chi gives a p-adic L-function
whose interpolation factor vanishes exactly when chi(p) equals the U_p
eigenvalue a_p.  At such a character the central value is a trivial zero and
the derivative splits into local-times-global parts:

    sum_a chi(a) int_{Z_p^x - a/f} log_p(t + a/f) dmu_{-a/f -> oo}(t)
        =  (L-invariant) * sum_a chi(a) phi{-a/f -> oo} .

The left side is a moment integral (overconvergent ball moments of the lift
against the local expansions of log_p); the right side's sum is an exact
integer, the algebraic part of the twisted central L-value.  Their quotient
is independent of the character and equals log_p(q)/ord_p(q) for the Tate
parameter q.  The test suite checks this against an independent computation
of q from the j-invariant, curve by curve; no Tate data enters the
computation itself.

Odd p only (the logarithm and Teichmueller conventions used here degenerate
at p = 2).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, gcd

from .curves import EllipticCurve
from .measures import Ball, BoundaryMeasure
from .modsym import EigenSymbol, eigensymbol_for_curve
from .overconvergent import MomentLift
from .padics import PadicElement, padic_log, valuation_of_int
from .quadfields import is_fundamental_discriminant, kronecker_symbol
from .tate import tate_parameter


def character_values(disc: int):
    """The quadratic character attached to a fundamental discriminant (or the
    trivial character for disc = 1) as a dict a -> value on a mod |disc|."""
    if disc == 1:
        return 1, {0: 1}
    if not is_fundamental_discriminant(disc):
        raise ValueError(f"{disc} is not a fundamental discriminant")
    f = abs(disc)
    return f, {a: kronecker_symbol(disc, a) for a in range(f)}


def shifted_unit_log_integral(
    lift: MomentLift, measure: BoundaryMeasure, shift: Fraction
) -> PadicElement:
    """int over (Z_p^x - shift) of log_p(t + shift) dmu_{-shift -> oo}(t).

    The domain splits into the p-1 canonical balls whose centers c satisfy
    c + shift != 0 mod p; on each, log_p(t + shift) expands around the unit
    c + shift and integrates against the centered ball moments."""
    p, w, modulus = lift.p, lift.w, lift.modulus
    path = (-shift, None)
    num, den = shift.numerator, shift.denominator
    if den % p == 0:
        raise ValueError("shift denominator must be prime to p")
    inv_den = pow(den, -1, p)
    total = PadicElement.zero(p, w)
    one = PadicElement.one(p, w)
    for b in range(1, p):
        center = (b - num * inv_den) % p
        center_plus_shift = PadicElement.from_rational(center * den + num, den, p, w)
        mass = measure.of(Ball(False, center, 1), *path)
        if mass:
            total = total + mass * padic_log(center_plus_shift)
        raw = lift.ball_moments(center, 1, *path)
        dinv = center_plus_shift.inverse()
        dpow = one
        for j in range(1, w):
            dpow = dpow * dinv
            c_j = sum(comb(j, i) * pow(-center, j - i) * raw[i] for i in range(j + 1))
            c_j %= modulus
            if c_j == 0:
                continue
            numerator = c_j if j % 2 else -c_j
            total = total + dpow * PadicElement.from_rational(
                numerator, j, p, w - valuation_of_int(j, p)
            )
    return total


def twisted_symbol_value(symbol: EigenSymbol, disc: int) -> int:
    """sum_a chi(a) phi{-a/f -> oo}: the exact integer that plays the role of
    the algebraic part of the chi-twisted central L-value."""
    f, chi = character_values(disc)
    total = 0
    for a in range(f):
        if chi[a] == 0:
            continue
        total += chi[a] * symbol.path_value(-Fraction(a, f), None)
    return total


def twisted_log_derivative(lift: MomentLift, disc: int) -> PadicElement:
    """sum_a chi(a) int log_p(t + a/f) dmu_{-a/f -> oo} over shifted units."""
    f, chi = character_values(disc)
    measure = BoundaryMeasure(lift.symbol, lift.p)
    total = PadicElement.zero(lift.p, lift.w)
    for a in range(f):
        if chi[a] == 0:
            continue
        term = shifted_unit_log_integral(lift, measure, Fraction(a, f))
        total = total + chi[a] * term
    return total


def exceptional_twist(symbol: EigenSymbol, p: int, search_bound: int = 60) -> int:
    """The smallest usable character discriminant: chi(p) must equal a_p (so
    the twist sits on the trivial zero) and the twisted symbol value must be
    nonzero (so the quotient is defined)."""
    n = symbol.curve.conductor()
    ap = symbol.curve.ap(p)
    candidates = [1] if ap == 1 else []
    for f in range(2, search_bound + 1):
        for d in (f, -f):
            if is_fundamental_discriminant(d) and gcd(abs(d), n) == 1:
                candidates.append(d)
    for d in candidates:
        if d != 1 and kronecker_symbol(d, p) != ap:
            continue
        if twisted_symbol_value(symbol, d) != 0:
            return d
    raise ValueError(f"no usable twist below {search_bound} for this curve at {p}")


@dataclass(frozen=True)
class LInvariantResult:
    p: int
    moments: int
    character_disc: int
    ord_part: int
    log_part: PadicElement
    value: PadicElement


def l_invariant(
    curve_or_label,
    p: int,
    moments: int,
    disc: int | None = None,
    lift: MomentLift | None = None,
) -> LInvariantResult:
    """The L-invariant log_part/ord_part from the automorphic data alone."""
    if p == 2:
        raise ValueError("odd p only")
    curve = (
        curve_or_label
        if isinstance(curve_or_label, EllipticCurve)
        else EllipticCurve.from_label(curve_or_label)
    )
    symbol = lift.symbol if lift is not None else eigensymbol_for_curve(curve)
    if disc is None:
        disc = exceptional_twist(symbol, p)
    else:
        f, chi = character_values(disc)
        chi_p = 1 if disc == 1 else chi[p % f]
        if chi_p != curve.ap(p):
            raise ValueError(
                f"character {disc} is not exceptional at {p} for this curve"
            )
    if lift is None:
        lift = MomentLift(symbol, p, moments)
    elif lift.p != p or lift.w != moments:
        raise ValueError("supplied lift does not match p and moments")
    ord_part = twisted_symbol_value(symbol, disc)
    if ord_part == 0:
        raise ValueError(f"twisted symbol value vanishes for discriminant {disc}")
    log_part = twisted_log_derivative(lift, disc)
    return LInvariantResult(
        p=p,
        moments=moments,
        character_disc=disc,
        ord_part=ord_part,
        log_part=log_part,
        value=log_part / ord_part,
    )


def tate_l_invariant(curve_or_label, p: int, prec: int) -> PadicElement:
    """log_p(q)/ord_p(q) from the Tate parameter: the rigid-geometry side of
    the same invariant, for cross-checks."""
    curve = (
        curve_or_label
        if isinstance(curve_or_label, EllipticCurve)
        else EllipticCurve.from_label(curve_or_label)
    )
    q = tate_parameter(curve, p, prec)
    return padic_log(q) / q.valuation
