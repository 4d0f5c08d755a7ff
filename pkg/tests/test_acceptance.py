"""Acceptance gate: nine end-to-end criteria, each with an explicit numeric
tolerance and a wall-clock budget.

Nothing here consults the network or any table shipped with the package:
every expected value is an exact structural identity, an independent
recomputation inside the test (genus formula, finite-field point counts,
naive global point searches, j-inversion), or a byte comparison against the
golden certificates stored in the repository.
"""

import random
import time
from contextlib import contextmanager
from fractions import Fraction
from math import gcd, prod
from pathlib import Path

import mpmath as mp
import pytest

from starkheegner.cache import CACHE_ENV
from starkheegner.certificates import load_certificate, verify_certificate
from starkheegner.cli import main as cli_main
from starkheegner.curves import (
    EllipticCurve,
    ec_add,
    ec_equation_residual,
    torsion_order,
)
from starkheegner.heegner import heegner_point, match_rational_point, split_periods
from starkheegner.integration import moment_product, riemann_product
from starkheegner.linvariant import l_invariant, tate_l_invariant
from starkheegner.measures import Ball, BoundaryMeasure, depth_partition, zp_ball
from starkheegner.modsym import ModularSymbolSpace, eigensymbol_for_curve
from starkheegner.overconvergent import MomentLift
from starkheegner.padics import (
    PadicElement,
    QuadExtElement,
    smallest_nonresidue,
    valuation_of_int,
)
from starkheegner.points import (
    class_periods,
    combine_periods,
    conjugate_ratio_period,
    darmon_point,
    recognize_global_point,
)
from starkheegner.quadfields import (
    embedding_for_class,
    genus_character,
    kronecker_symbol,
    narrow_class_representatives,
)
from starkheegner.tate import TateCurve, tate_parameter

GOLDEN = Path(__file__).resolve().parent.parent / "golden"

LIFTS: dict = {}


def _lift(label: str, p: int, w: int) -> MomentLift:
    key = (label, p, w)
    if key not in LIFTS:
        symbol = eigensymbol_for_curve(EllipticCurve.from_label(label))
        LIFTS[key] = MomentLift(symbol, p, w)
    return LIFTS[key]


@contextmanager
def _budget(seconds: float):
    t0 = time.monotonic()
    yield
    elapsed = time.monotonic() - t0
    assert elapsed < seconds, f"budget exceeded: {elapsed:.1f}s >= {seconds}s"


def _vanishes_mod(x, k: int) -> bool:
    """x == 0 mod p^k, certified: either exactly zero at absolute precision
    >= k, or of valuation >= k."""
    if x.is_zero():
        return x.absprec >= k
    return x.valuation >= k


def _exactly_one(x) -> bool:
    return (x - 1).is_zero()


# ---------------------------------------------------------------------------
# criterion 1: modular symbols against independent genus and point counts


def _prime_factors(n: int) -> list[int]:
    out, q = [], 2
    while q * q <= n:
        if n % q == 0:
            out.append(q)
            while n % q == 0:
                n //= q
        q += 1
    if n > 1:
        out.append(n)
    return out


def _euler_phi(n: int) -> int:
    result = n
    for q in _prime_factors(n):
        result = result // q * (q - 1)
    return result


def _genus_gamma0(n: int) -> int:
    primes = _prime_factors(n)
    mu = n
    for q in primes:
        mu = mu // q * (q + 1)
    nu2 = 0 if n % 4 == 0 else prod(1 + kronecker_symbol(-1, q) for q in primes if q != 2)
    nu3 = 0 if n % 9 == 0 else prod(1 + kronecker_symbol(-3, q) for q in primes if q != 3)
    nu_inf = sum(_euler_phi(gcd(d, n // d)) for d in range(1, n + 1) if n % d == 0)
    genus = Fraction(mu, 12) - Fraction(nu2, 4) - Fraction(nu3, 3) - Fraction(nu_inf, 2) + 1
    assert genus.denominator == 1
    return int(genus)


def _count_affine_points(curve: EllipticCurve, ell: int) -> int:
    a1, a2, a3, a4, a6 = (a % ell for a in curve.ainvs)
    count = 0
    for x in range(ell):
        rhs = (x * x * x + a2 * x * x + a4 * x + a6) % ell
        for y in range(ell):
            if (y * y + a1 * x * y + a3 * y) % ell == rhs:
                count += 1
    return count


def test_criterion_1_modular_symbol_correctness():
    instances = [(11, ["11a"]), (14, ["14a"]), (15, ["15a"]), (37, ["37a", "37b"])]
    with _budget(10):
        for n, labels in instances:
            space = ModularSymbolSpace(n)
            assert space.cuspidal_dimension() == 2 * _genus_gamma0(n), n
            for label in labels:
                curve = EllipticCurve.from_label(label)
                symbol = eigensymbol_for_curve(curve, sign=1, space=space)
                for ell in (2, 3, 5, 7, 11, 13, 17, 19):
                    if n % ell == 0:
                        continue
                    a_ell = ell + 1 - (1 + _count_affine_points(curve, ell))
                    image = space.apply_hecke(symbol.values, ell)
                    assert image == [a_ell * v for v in symbol.values], (label, ell)


# ---------------------------------------------------------------------------
# criterion 2: measure laws, exact at depths <= 3, on every corpus instance


MEASURE_INSTANCES = [
    ("11a", 11),
    ("14a", 2),
    ("14a", 7),
    ("15a", 3),
    ("15a", 5),
    ("37a", 37),
    ("37b", 37),
]


def test_criterion_2_measure_laws_exact_to_depth_three():
    paths = [(None, Fraction(0)), (Fraction(0), Fraction(1, 3)), (Fraction(2, 5), None)]
    with _budget(30):
        for label, p in MEASURE_INSTANCES:
            rng = random.Random(1000 + p)
            measure = BoundaryMeasure(
                eigensymbol_for_curve(EllipticCurve.from_label(label)), p
            )
            for r, s in paths:
                assert measure.total_mass(r, s) == 0, (label, p)
            # partition of P^1 at each depth has total mass zero
            for depth in (1, 2, 3):
                balls = depth_partition(p, depth)
                if len(balls) > 1500:
                    continue  # covered ball-by-ball by sampled harmonicity below
                for r, s in paths[:2]:
                    assert sum(measure.of(b, r, s) for b in balls) == 0, (label, p, depth)
            # harmonicity: each ball of depth <= 2 equals the sum of its
            # p children (so the laws hold down to depth-3 balls); for
            # p = 37 the depth-2 layer is sampled at fixed seed
            for depth in (0, 1, 2):
                parents = depth_partition(p, depth)
                if len(parents) > 200:
                    parents = rng.sample(parents, 60)
                for ball in parents:
                    for r, s in paths[:2]:
                        assert measure.harmonicity_defect(ball, r, s) == 0, (label, p, ball)
            # U_p-refinement identity
            for a in range(min(p, 6)):
                for r, s in paths[:2]:
                    assert measure.refinement_defect(Ball(False, a, 1), r, s) == 0
            assert measure.refinement_defect(zp_ball(), Fraction(1, 2), Fraction(3)) == 0


# ---------------------------------------------------------------------------
# criterion 3: the two integral evaluators agree at the stated modulus


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


def _random_tau(rng, p: int, prec: int) -> QuadExtElement:
    nonres = smallest_nonresidue(p)
    ua = rng.randrange(p**prec)
    ub = rng.randrange(p ** (prec - 1)) * p + rng.randrange(1, p)
    return QuadExtElement(p, nonres, 0, ua, ub, prec)


def test_criterion_3_integral_oracle_equivalence():
    specs = [("11a", 11, 8, (1, 2, 3)), ("37a", 37, 6, (1, 2))]
    with _budget(120):
        for label, p, w, depths in specs:
            lift = _lift(label, p, w)
            measure = BoundaryMeasure(lift.symbol, p)
            rng = random.Random(333 + p)
            for i in range(20):
                depth = depths[i % len(depths)]
                start, end = _random_path(rng)
                tau = _random_tau(rng, p, w)
                by_moments = moment_product(lift, tau, start, end)
                by_riemann = riemann_product(measure, tau, start, end, depth)
                ratio = by_moments / by_riemann - 1
                need = min(depth, w - 1)
                assert _vanishes_mod(ratio, need), (label, i, depth)


# ---------------------------------------------------------------------------
# criterion 4: automorphic L-invariant == log(q)/ord(q) from j-inversion


def test_criterion_4_l_invariant_matches_tate_side():
    moments = 10
    with _budget(120):
        for label, p in [("11a", 11), ("37a", 37)]:
            automorphic = l_invariant(label, p, moments, lift=_lift(label, p, moments))
            tate_side = tate_l_invariant(label, p, moments + 2)
            diff = automorphic.value - tate_side
            assert _vanishes_mod(diff, moments - 2), (label, diff)


# ---------------------------------------------------------------------------
# criterion 5: the Tate layer


def _random_unit(p, nonres, prec, rng):
    while True:
        a = rng.randrange(p**prec)
        b = rng.randrange(p**prec)
        if a % p != 0 or b % p != 0:
            break
    return QuadExtElement.from_pair(
        PadicElement.from_int(a, p, prec), PadicElement.from_int(b, p, prec), nonres
    )


def test_criterion_5_tate_layer():
    moments = 10
    # parameters congruent to 1 mod p^2 sit near the identity and honestly
    # cost ~12 digits of absolute precision, so certify mod p^(M-2) from a
    # working precision with that much headroom
    working = 24
    with _budget(10):
        for label, p in [("11a", 11), ("37a", 37)]:
            curve = EllipticCurve.from_label(label)
            j = curve.j_invariant
            ord_j = valuation_of_int(j.numerator, p) - valuation_of_int(j.denominator, p)
            q = tate_parameter(curve, p, moments)
            assert q.valuation == -ord_j, label

            tc = TateCurve(curve, p, working)
            rng = random.Random(91 + p)
            samples = []
            for _ in range(25):
                u = _random_unit(p, tc.nonres, working, rng)
                if rng.random() < 0.3:
                    u = u * tc._to_ext(tc.q) ** rng.randrange(-2, 3)
                pt = tc.parametrize(u)
                assert pt is not None
                residual = ec_equation_residual(curve, pt)
                assert residual.is_zero() and residual.absprec >= moments - 2, label
                samples.append((u, pt))

            exact_eq = lambda s, t: (s - t).is_zero()
            for _ in range(12):
                (u1, pt1), (u2, pt2) = rng.sample(samples, 2)
                combined = tc.parametrize(u1 * u2)
                added = ec_add(curve, pt1, pt2, exact_eq)
                if combined is None or added is None:
                    assert combined is None and added is None
                    continue
                for got, want in zip(added, combined):
                    assert _vanishes_mod(got - want, moments - 2), label


# ---------------------------------------------------------------------------
# criterion 6: the headline rationality surrogate (must fail the build if
# the p-adic point does not match a globally searched point)


def test_criterion_6_darmon_point_matches_global_point():
    moments = 12
    digits = moments - 4
    with _budget(600):
        result = darmon_point("37a", 37, 5, moments, lift=_lift("37a", 37, moments))
        assert result.point is not None
        match = recognize_global_point(result.point, result.curve, 37, 5, digits)
        assert match is not None, (
            "the combined point matched no global point of E(Q(sqrt 5)): "
            "this failure is fatal by design"
        )
        # the matched global point comes from an infinite-order generator
        assert torsion_order(result.curve, match.generator, bound=16) is None
        assert match.multiple >= 1
        # re-check the agreement at the stated modulus in both coordinates
        nonres = smallest_nonresidue(37)
        for got, want in zip(result.point, match.point):
            diff = got - want.embed_padic(37, nonres, moments)
            assert _vanishes_mod(diff, digits)


# ---------------------------------------------------------------------------
# criterion 7: CM particularization through the complex oracle


def test_criterion_7_cm_particularization():
    with _budget(120):
        with mp.workdps(40):
            curve = EllipticCurve.from_label("37a")
            omega_plus, omega_minus, residual = split_periods(curve)
            assert residual < mp.mpf("1e-30")
            ratio = omega_minus / omega_plus
            assert abs(ratio.real) < mp.mpf("1e-20"), "ratio must be purely imaginary"
            assert abs(ratio.imag) > mp.mpf("0.1")

            point = heegner_point(curve, -7)
            assert point is not None
            matched = match_rational_point(curve, point, mp.mpf("1e-15"))
            assert matched is not None, "Heegner trace matched no rational point"
            x, y = point
            assert abs(x - mp.mpf(matched[0].numerator) / matched[0].denominator) < mp.mpf("1e-15")
            assert abs(y - mp.mpf(matched[1].numerator) / matched[1].denominator) < mp.mpf("1e-15")
            assert torsion_order(curve, matched) is None, "matched point must be non-torsion"


# ---------------------------------------------------------------------------
# criterion 8: reciprocity surrogate on a narrow class number two field


def test_criterion_8_reciprocity_surrogate():
    p, disc, moments = 11, 21, 8
    with _budget(600):
        forms = narrow_class_representatives(disc)
        assert len(forms) == 2  # h+ = 2
        assert kronecker_symbol(disc, p) == -1  # p inert: preconditions hold
        lift = _lift("11a", p, moments)
        periods = class_periods(lift, disc)

        # Frobenius consistency, class by class: every period has norm one,
        # so conjugation inverts it
        for cp in periods:
            assert _exactly_one(cp.period * cp.period.frobenius())

        # genus character: the two classes carry opposite signs
        weights = tuple(genus_character(-3, cp.form) for cp in periods)
        assert sorted(weights) == [-1, 1]

        # class-permutation re-summation invariance (stated: mod p^{M-4};
        # found: exact)
        forward = combine_periods(periods, weights)
        backward = combine_periods(list(reversed(periods)), tuple(reversed(weights)))
        assert _vanishes_mod(forward / backward - 1, moments - 4)
        assert _exactly_one(forward / backward)

        # re-summation through different representatives of the same classes
        for mat in (((1, 1), (0, 1)), ((2, 1), (1, 1))):
            alt = QuadExtElement.one(p, smallest_nonresidue(p), moments)
            for cp, w in zip(periods, weights):
                embedding = embedding_for_class(cp.form.transform(mat), 1, p)
                alt = alt * conjugate_ratio_period(lift, embedding) ** w
            assert _vanishes_mod(alt / forward - 1, moments - 4)

        # the genus-character sum is Frobenius-consistent: sigma acts on it
        # by kronecker(-3, p) = -1, i.e. by inversion...
        assert kronecker_symbol(-3, p) == -1
        assert _exactly_one(forward * forward.frobenius())
        # ...and here it is exactly trivial (both twists have rank zero)
        assert _exactly_one(forward)

        # the trivial-character trace lies in the minus eigenspace of
        # Frobenius: x descends to Q_p and conjugation negates the point
        trace = darmon_point("11a", p, disc, moments, lift=lift)
        x, y = trace.point
        assert x.is_in_base()
        a1, _, a3, _, _ = trace.curve.ainvs
        assert _vanishes_mod(y.frobenius() + y + a1 * x + a3, moments - 4)


# ---------------------------------------------------------------------------
# criterion 9: determinism and replay


GOLDEN_JOBS = {
    "eigensymbol-11a.json": ["eigensymbol", "--curve", "11a"],
    "lift-11a-p11-m6.json": ["lift", "--curve", "11a", "--p", "11", "--moments", "6"],
    "l-invariant-11a-p11-m8.json": [
        "l-invariant", "--curve", "11a", "--p", "11", "--moments", "8",
    ],
    "darmon-point-11a-p11-d21-m8.json": [
        "darmon-point", "--curve", "11a", "--p", "11", "--disc", "21",
        "--moments", "8", "--digits", "4",
    ],
    "darmon-point-37a-p37-d5-m12.json": [
        "darmon-point", "--curve", "37a", "--p", "37", "--disc", "5", "--moments", "12",
    ],
    "heegner-point-37a-d7.json": ["heegner-point", "--curve", "37a", "--disc", "-7"],
}


def test_criterion_9_determinism_and_replay(tmp_path, monkeypatch):
    with _budget(60):
        produced = {}
        for run in ("first", "second"):
            monkeypatch.setenv(CACHE_ENV, str(tmp_path / f"cache-{run}"))
            produced[run] = {}
            for name, argv in GOLDEN_JOBS.items():
                out = tmp_path / f"{run}-{name}"
                assert cli_main(argv + ["--out", str(out)]) == 0
                produced[run][name] = out.read_bytes()
        for name in GOLDEN_JOBS:
            assert produced["first"][name] == produced["second"][name], name
            assert produced["first"][name] == (GOLDEN / name).read_bytes(), (
                f"{name}: regenerated certificate differs from the shipped golden file"
            )
        golden_files = sorted(GOLDEN.glob("*.json"))
        assert len(golden_files) == len(GOLDEN_JOBS)
        for path in golden_files:
            ok, checks = verify_certificate(load_certificate(str(path)))
            assert ok, (path.name, checks)
