"""Multiplicative line integrals of t - tau against boundary measures.

The period machinery pairs the measures mu_{r->s} on P^1(Q_p) with the
function t - tau, where tau generates the unramified quadratic extension
(irrational residue, valuation zero).  The multiplicative integral is the
limit over refining partitions of the Riemann products

    prod over balls U :  F(t_U) ^ mu(U) ,

one sample point t_U per ball.  Since tau has an irrational residue, t - tau
is a unit at every rational sample, so each product is a unit of Q_p(omega)
and refining past depth n only changes it by 1 + O(p^n).

On the complement of Z_p the integrand is read through the coordinate
w = 1/t, with patch F(w) = 1 - tau*w; the sample at the w-center 0 is exactly
1, so the complement contributes only analytic corrections.  The patch fixes
the *unit part* of the period; the valuation part it discards is supplied
separately by an integer cocycle (see linvariant).  Because the patched and
unpatched integrands differ by the constant-free factor w, any combination
whose measure weights sum to zero --- ratios (t - tau)/(t - tau'), character
sums over class representatives --- is patch-independent.

Two interchangeable evaluators:

  * riemann_product: the definition at a fixed depth n; accuracy 1 + O(p^n),
    cost about p^n exact measure values.
  * moment_product: depth-1 balls only, with the full local expansion of
    log(t - tau) around each center summed against the ball moments of an
    overconvergent lift; accuracy ~ 1 + O(p^W) at cost linear in p.

For the moment evaluator the finite ball centered at b uses

    xint_B (t - tau) dmu = (b - tau)^mu(B) * exp( sum_{j>=1} (-1)^(j-1)
                            c_j / (j (b - tau)^j) ),

with c_j the centered ball moments; the complement of Z_p is transported to a
finite ball by sigma = [[1,0],[M,1]] (as in the measure system), where the
pushed-forward integrand 1 - tau/(sigma u) expands in inverse powers of u,
again integrable against centered moments because u runs over units.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb

from .measures import Ball, BoundaryMeasure, depth_partition, sigma_inverse_cusp
from .overconvergent import MomentLift
from .padics import PadicElement, QuadExtElement, padic_exp, valuation_of_int


def normalize_cusp(x):
    """Cusps are Fractions, or None for infinity."""
    return None if x is None else Fraction(x)


def mobius_cusp(mat, cusp):
    """Action of an integer matrix, (a, b, c, d) or ((a, b), (c, d)), on a cusp."""
    if len(mat) == 2:
        (a, b), (c, d) = mat
    else:
        a, b, c, d = mat
    if cusp is None:
        return None if c == 0 else Fraction(a, c)
    x = Fraction(cusp)
    den = c * x + d
    if den == 0:
        return None
    return (a * x + b) / den


def check_integration_point(tau: QuadExtElement) -> QuadExtElement:
    """The integrand t - tau stays a unit only for tau a residue-irrational
    unit; reject anything else early."""
    if tau.valuation != 0 or tau.residue_pair()[1] == 0:
        raise ValueError("integration point must be a unit with irrational residue")
    return tau


def patch_center_value(tau: QuadExtElement, ball: Ball) -> QuadExtElement:
    """The integrand sample at the ball's center.

    Finite balls read t - tau at t = center; balls around infinity read the
    patch 1 - tau*w at w = center."""
    if ball.infinite:
        return 1 - tau * ball.center
    return ball.center - tau


def riemann_product(
    measure: BoundaryMeasure, tau: QuadExtElement, start, end, depth: int
) -> QuadExtElement:
    """The multiplicative integral of t - tau against mu_{start->end},
    evaluated as the depth-n Riemann product.

    The result is a unit equal to the limit up to 1 + O(p^depth)."""
    check_integration_point(tau)
    start, end = normalize_cusp(start), normalize_cusp(end)
    total = QuadExtElement.one(tau.p, tau.nonres, tau.absprec)
    for ball in depth_partition(measure.p, depth):
        weight = measure.of(ball, start, end)
        if weight:
            total = total * patch_center_value(tau, ball) ** weight
    return total


def _centered_moments(raw: list[int], center: int, modulus: int) -> list[int]:
    """Moments of (t - center)^j from raw moments of t^i, mod modulus."""
    out = []
    for j in range(len(raw)):
        acc = 0
        for i in range(j + 1):
            acc += comb(j, i) * pow(-center, j - i) * raw[i]
        out.append(acc % modulus)
    return out


def _log_factor(numerator: int, j: int, p: int, w: int) -> PadicElement:
    """The rational coefficient numerator/j as a base element; dividing a
    residue known mod p^w by j costs v_p(j) digits of honest precision."""
    return PadicElement.from_rational(numerator, j, p, w - valuation_of_int(j, p))


def moment_product(
    lift: MomentLift, tau: QuadExtElement, start, end
) -> QuadExtElement:
    """The same multiplicative integral from overconvergent ball moments.

    Works at depth 1 only, with every higher-order correction supplied by the
    lift; the result is a unit equal to the limit up to roughly 1 + O(p^W)
    (a few digits are spent on denominators j and on the j >= W tail).  Build
    tau at absolute precision W for full accuracy."""
    check_integration_point(tau)
    start, end = normalize_cusp(start), normalize_cusp(end)
    p, w, modulus = lift.p, lift.w, lift.modulus
    measure = BoundaryMeasure(lift.symbol, p)
    one = QuadExtElement.one(tau.p, tau.nonres, tau.absprec)
    total = one
    logsum = QuadExtElement.zero(tau.p, tau.nonres, tau.absprec)

    # -- finite balls b + pZ_p ----------------------------------------------
    for b in range(p):
        weight = measure.of(Ball(False, b, 1), start, end)
        dist = b - tau
        if weight:
            total = total * dist**weight
        centered = _centered_moments(lift.ball_moments(b, 1, start, end), b, modulus)
        dinv = dist.inverse()
        dpow = one
        for j in range(1, w):
            dpow = dpow * dinv
            c_j = centered[j]
            if c_j == 0:
                continue
            sign = 1 if j % 2 == 1 else -1
            logsum = logsum + dpow * _log_factor(sign * c_j, j, p, w)

    # -- the complement of Z_p, through u = sigma^(-1) t --------------------
    # The w-center is 0, where the patch value is exactly 1, so only the
    # analytic part remains:  log(1 - tau*w) = -sum_j (tau^j / j) * I_j with
    # I_j the j-th moment of 1/t.  Pushing through sigma turns 1/t into
    # M + 1/u on the finite unit ball centered at b0 = (0 - M)^(-1) mod p,
    # and 1/u integrates by the geometric expansion around b0.
    m_level = measure.m
    b0 = pow(-m_level, -1, p)
    s_start = sigma_inverse_cusp(start, m_level)
    s_end = sigma_inverse_cusp(end, m_level)
    raw = lift.ball_moments(b0, 1, s_start, s_end)
    centered = _centered_moments(raw, b0, modulus)
    b0_inv = pow(b0, -1, modulus)
    inverse_moments = [raw[0]]
    for i in range(1, w):
        acc = 0
        for k in range(w):
            term = comb(i + k - 1, k) * pow(b0_inv, i + k, modulus) * centered[k]
            acc += -term if k % 2 else term
        inverse_moments.append(acc % modulus)
    taupow = one
    for j in range(1, w):
        taupow = taupow * tau
        i_j = 0
        for i in range(j + 1):
            i_j += comb(j, i) * pow(m_level, j - i) * inverse_moments[i]
        i_j %= modulus
        if i_j == 0:
            continue
        logsum = logsum - taupow * _log_factor(i_j, j, p, w)

    return total * padic_exp(logsum)
