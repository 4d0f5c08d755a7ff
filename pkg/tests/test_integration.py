"""Cross-validation of the two multiplicative-integral evaluators.

The Riemann evaluator is the definition (exact integer measure values, one
sample per ball); the moment evaluator reconstructs the same limit from an
overconvergent lift.  They share no code beyond the measure system, so their
agreement at the predicted precision checks both, together with the laws the
limit must satisfy (path additivity, conjugation, equivariance).
"""

import random
from fractions import Fraction

import pytest

from starkheegner.curves import EllipticCurve
from starkheegner.integration import mobius_cusp, moment_product, riemann_product
from starkheegner.measures import BoundaryMeasure
from starkheegner.modsym import eigensymbol_for_curve
from starkheegner.overconvergent import MomentLift
from starkheegner.padics import QuadExtElement, smallest_nonresidue

LIFTS: dict = {}


def _lift(label: str, p: int, w: int) -> MomentLift:
    key = (label, p, w)
    if key not in LIFTS:
        symbol = eigensymbol_for_curve(EllipticCurve.from_label(label))
        LIFTS[key] = MomentLift(symbol, p, w)
    return LIFTS[key]


def _random_tau(rng, p: int, prec: int) -> QuadExtElement:
    """A unit of Q_p(omega) with irrational residue: a legal integration
    point, not necessarily attached to any embedding."""
    nonres = smallest_nonresidue(p)
    ua = rng.randrange(p**prec)
    ub = rng.randrange(p ** (prec - 1)) * p + rng.randrange(1, p)
    return QuadExtElement(p, nonres, 0, ua, ub, prec)


def _random_cusp(rng):
    if rng.random() < 0.15:
        return None
    return Fraction(rng.randint(-30, 30), rng.randint(1, 18))


def _random_path(rng):
    start = _random_cusp(rng)
    while True:
        end = _random_cusp(rng)
        if end != start:
            return start, end


def _assert_unit_ratio(a: QuadExtElement, b: QuadExtElement, digits: int):
    diff = a / b - 1
    assert diff.is_zero() or diff.valuation >= digits, (
        f"agreement only to {diff.valuation} digits, wanted {digits}"
    )


def test_riemann_products_stabilize_with_depth():
    rng = random.Random(61)
    measure = BoundaryMeasure(eigensymbol_for_curve(EllipticCurve.from_label("11a")), 11)
    for _ in range(4):
        start, end = _random_path(rng)
        tau = _random_tau(rng, 11, 8)
        values = [
            riemann_product(measure, tau, start, end, depth) for depth in (1, 2, 3)
        ]
        _assert_unit_ratio(values[1], values[0], 1)
        _assert_unit_ratio(values[2], values[1], 2)


@pytest.mark.parametrize(
    "label,p,w,depth,samples",
    [("11a", 11, 8, 3, 6), ("37a", 37, 6, 2, 3)],
)
def test_moment_product_matches_riemann_product(label, p, w, depth, samples):
    rng = random.Random(p)
    lift = _lift(label, p, w)
    measure = BoundaryMeasure(lift.symbol, p)
    for _ in range(samples):
        start, end = _random_path(rng)
        tau = _random_tau(rng, p, w)
        by_moments = moment_product(lift, tau, start, end)
        by_riemann = riemann_product(measure, tau, start, end, depth)
        _assert_unit_ratio(by_moments, by_riemann, min(depth, w - 1))


def test_moment_product_is_additive_in_the_path():
    rng = random.Random(7)
    lift = _lift("11a", 11, 8)
    for _ in range(4):
        r, s = _random_path(rng)
        t = _random_cusp(rng)
        while t in (r, s):
            t = _random_cusp(rng)
        tau = _random_tau(rng, 11, 8)
        left = moment_product(lift, tau, r, s) * moment_product(lift, tau, s, t)
        right = moment_product(lift, tau, r, t)
        _assert_unit_ratio(left, right, lift.w - 2)


def test_moment_product_commutes_with_conjugation():
    rng = random.Random(8)
    lift = _lift("11a", 11, 8)
    for _ in range(3):
        start, end = _random_path(rng)
        tau = _random_tau(rng, 11, 8)
        conjugated = moment_product(lift, tau.frobenius(), start, end)
        _assert_unit_ratio(conjugated, moment_product(lift, tau, start, end).frobenius(), lift.w - 2)


def test_ratio_integrand_is_gamma0_equivariant():
    """xint (t-tau)/(t-tau') d mu_{g r -> g s} = xint (t - g^(-1)tau)/(t - g^(-1)tau')
    d mu_{r->s} for g in Gamma_0(N): the constants the substitution produces
    cancel because the total mass is zero."""
    rng = random.Random(9)
    lift = _lift("11a", 11, 8)
    gamma = (1, 0, 11, 1)
    a, b, c, d = gamma
    inv = (d, -b, -c, a)

    def pullback(tau):
        ia, ib, ic, id_ = inv
        return (tau * ia + ib) / (tau * ic + id_)

    for _ in range(3):
        start, end = _random_path(rng)
        tau = _random_tau(rng, 11, 8)
        tau2 = tau.frobenius()
        moved = moment_product(
            lift, tau, mobius_cusp(gamma, start), mobius_cusp(gamma, end)
        ) / moment_product(lift, tau2, mobius_cusp(gamma, start), mobius_cusp(gamma, end))
        fixed = moment_product(lift, pullback(tau), start, end) / moment_product(
            lift, pullback(tau2), start, end
        )
        _assert_unit_ratio(moved, fixed, lift.w - 2)
