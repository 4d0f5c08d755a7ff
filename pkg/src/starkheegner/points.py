"""Stark-Heegner points: p-adic periods attached to real quadratic classes,
pushed through the rigid uniformization and recognized as global points.

For an optimal embedding of discriminant D > 0 (p inert in Q(sqrt D)) with
fixed point tau in the unramified quadratic extension and automorph gamma,
the period of the narrow class is the conjugate ratio

    J = u / sigma(u),   u = x-integral of (t - tau) d mu_{x0 -> gamma x0},

sigma the Frobenius.  The single-tau period u is only well defined up to
base-field factors --- moving the base cusp x0 multiplies it by one --- but
sigma(u) absorbs the same factor, so J is independent of x0 and of the
representative chosen for the class (both exact, see the tests).  J has
norm 1; on a nonsplit curve the uniformization therefore lands in the
base-field points.  Character-weighted products of class periods give the
points attached to characters of the narrow class group; the trivial
character gives the candidate trace to the ground field, and the match of
that trace against an independently searched global point is the package's
headline consistency check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .curves import (
    EllipticCurve,
    ec_add,
    ec_negate,
    infinite_order_points,
    quadratic_twist_short,
    rational_points_naive,
    torsion_order,
)
from .integration import check_integration_point, mobius_cusp, moment_product
from .modsym import eigensymbol_for_curve
from .overconvergent import MomentLift
from .padics import QuadExtElement, smallest_nonresidue
from .quadfields import (
    BinaryQF,
    OptimalEmbedding,
    QuadNumber,
    embedding_for_class,
    genus_character,
    kronecker_symbol,
    narrow_class_representatives,
)
from .tate import TateCurve


# ---------------------------------------------------------------------------
# class periods


def conjugate_ratio_period(
    lift: MomentLift, embedding: OptimalEmbedding, base_cusp=None
) -> QuadExtElement:
    """J = u/sigma(u) over the automorph path {x0 -> gamma x0}; norm 1."""
    tau = embedding.tau_padic(smallest_nonresidue(lift.p), lift.w)
    check_integration_point(tau)
    end = mobius_cusp(embedding.automorph(), base_cusp)
    u = moment_product(lift, tau, base_cusp, end)
    return u / u.frobenius()


@dataclass(frozen=True)
class ClassPeriod:
    form: BinaryQF  # the class label (a chosen reduced representative)
    embedding: OptimalEmbedding  # the admissible representative actually used
    period: QuadExtElement  # J, norm 1


def class_periods(
    lift: MomentLift, disc: int, base_cusp=None
) -> list[ClassPeriod]:
    """One conjugate-ratio period per narrow ideal class of discriminant disc."""
    p = lift.p
    if kronecker_symbol(disc, p) != -1:
        raise ValueError(f"{p} must be inert in the field of discriminant {disc}")
    level_m = lift.level // p
    out = []
    for form in narrow_class_representatives(disc):
        emb = embedding_for_class(form, level_m, p)
        out.append(ClassPeriod(form, emb, conjugate_ratio_period(lift, emb, base_cusp)))
    return out


def combine_periods(periods, weights) -> QuadExtElement:
    """prod J_i^(w_i) for integer weights (character values on the classes)."""
    total = None
    for cp, w in zip(periods, weights, strict=True):
        if w == 0:
            continue
        factor = cp.period**w
        total = factor if total is None else total * factor
    if total is None:
        raise ValueError("all weights vanish")
    return total


# ---------------------------------------------------------------------------
# assembly


@dataclass
class DarmonPointResult:
    curve: EllipticCurve
    p: int
    disc: int
    moments: int
    character_disc: int | None  # None = trivial weights; else a genus-character factor
    class_periods: list[ClassPeriod]
    weights: tuple[int, ...]
    parameter: QuadExtElement  # combined period, normalized mod q^Z
    point: tuple | None  # coordinates over the quadratic extension, None = identity

    def point_in_base(self):
        """(x, y) as base-field elements when both coordinates descend."""
        if self.point is None:
            return None
        x, y = self.point
        if x.is_in_base() and y.is_in_base():
            return (x.to_base(), y.to_base())
        return None


def darmon_point(
    curve_or_label,
    p: int,
    disc: int,
    moments: int,
    character: int | None = None,
    lift: MomentLift | None = None,
    base_cusp=None,
) -> DarmonPointResult:
    """The character-weighted combination of class periods, uniformized.

    character = None uses the trivial character (the trace).  An integer
    selects the genus character attached to that factor of the discriminant
    (see quadfields.genus_character)."""
    curve = (
        curve_or_label
        if isinstance(curve_or_label, EllipticCurve)
        else EllipticCurve.from_label(curve_or_label)
    )
    if lift is None:
        lift = MomentLift(eigensymbol_for_curve(curve), p, moments)
    periods = class_periods(lift, disc, base_cusp)
    if character is None:
        weights = tuple(1 for _ in periods)
    else:
        weights = tuple(genus_character(character, cp.form) for cp in periods)
    combined = combine_periods(periods, weights)
    tate = TateCurve(curve, p, moments)
    parameter = tate.normalize_parameter(combined)
    return DarmonPointResult(
        curve=curve,
        p=p,
        disc=disc,
        moments=moments,
        character_disc=character,
        class_periods=periods,
        weights=weights,
        parameter=parameter,
        point=tate.parametrize(parameter),
    )


# ---------------------------------------------------------------------------
# recognition against independently searched global points


def quadratic_field_points(
    curve: EllipticCurve, disc: int, max_x_height: int = 40, max_den: int = 12
):
    """Small points of E over Q(sqrt disc) from two rational naive searches:
    the curve itself and its disc-twist (whose points have x rational and y a
    rational multiple of sqrt(disc) on the original model, up to the model
    shift).  Coordinates are exact QuadNumber pairs."""
    found = []
    for x, y in rational_points_naive(curve, max_x_height, max_den):
        found.append((QuadNumber.make(disc, x), QuadNumber.make(disc, y)))
    twist = quadratic_twist_short(curve, disc)
    for X, Y in infinite_order_points(
        twist, rational_points_naive(twist, max_x_height, max_den)
    ):
        xs = QuadNumber.make(disc, X / disc)
        ys = QuadNumber(disc, Fraction(0), Y / disc**2)
        found.append(tuple(curve.from_short_point((xs, ys))))
    return found


def _embed_coordinate(c: QuadNumber, p: int, nonres: int, prec: int) -> QuadExtElement:
    return c.embed_padic(p, nonres, prec)


def _coordinates_match(pt_padic, cand_exact, p, nonres, prec, digits) -> bool:
    for got, want in zip(pt_padic, cand_exact):
        diff = got - _embed_coordinate(want, p, nonres, prec)
        if not (diff.is_zero() or diff.valuation >= digits):
            return False
    return True


@dataclass(frozen=True)
class RecognizedPoint:
    generator: tuple  # exact QuadNumber pair
    multiple: int  # P == sign * (multiple * generator + torsion)
    sign: int
    torsion: tuple | None  # exact torsion translate used (None = identity)
    point: tuple  # the matched exact point, sign included


def recognize_global_point(
    point,
    curve: EllipticCurve,
    p: int,
    disc: int,
    digits: int,
    mult_bound: int = 8,
    max_x_height: int = 40,
    max_den: int = 12,
) -> RecognizedPoint | None:
    """Match a p-adic point against sign * (k * G + T) for searched global
    points G of infinite order, small k, and rational torsion T.

    The search is independent of the p-adic computation: it enumerates exact
    points of E(Q) and of the disc-twist by brute force.  Agreement is
    required in both coordinates to the stated number of p-adic digits."""
    if point is None:
        return None
    nonres = smallest_nonresidue(p)
    prec = digits + 4

    rational_pts = rational_points_naive(curve, max_x_height, max_den)
    torsion = [None] + [
        (QuadNumber.make(disc, x), QuadNumber.make(disc, y))
        for x, y in rational_pts
        if torsion_order(curve, (x, y)) is not None
    ]
    field_pts = quadratic_field_points(curve, disc, max_x_height, max_den)
    generators = [
        pt for pt in field_pts if torsion_order(curve, pt, bound=16) is None
    ]

    for gen in generators:
        acc = None
        for k in range(1, mult_bound + 1):
            acc = gen if acc is None else ec_add(curve, acc, gen)
            if acc is None:
                break
            for tors in torsion:
                cand = acc if tors is None else ec_add(curve, acc, tors)
                if cand is None:
                    continue
                for sign in (1, -1):
                    signed = cand if sign == 1 else ec_negate(curve, cand)
                    if _coordinates_match(point, signed, p, nonres, prec, digits):
                        return RecognizedPoint(
                            generator=gen,
                            multiple=k,
                            sign=sign,
                            torsion=tors,
                            point=signed,
                        )
    return None


# ---------------------------------------------------------------------------
# integer-relation reconstruction of the x-coordinate


def _gram_schmidt(basis):
    """Exact Gram-Schmidt data (mu coefficients and squared norms)."""
    count = len(basis)
    star: list[list[Fraction]] = []
    mu = [[Fraction(0)] * count for _ in range(count)]
    norms: list[Fraction] = []
    for i, row in enumerate(basis):
        vec = [Fraction(entry) for entry in row]
        for j in range(i):
            if norms[j] == 0:
                continue
            proj = sum(Fraction(row[t]) * star[j][t] for t in range(len(row)))
            mu[i][j] = proj / norms[j]
            vec = [vec[t] - mu[i][j] * star[j][t] for t in range(len(vec))]
        star.append(vec)
        norms.append(sum(entry * entry for entry in vec))
    return mu, norms


def _lll_reduce(rows, delta=Fraction(3, 4)):
    """Exact LLL reduction of an integer lattice basis (small dimensions).

    Gram-Schmidt data is recomputed after every basis change; with the
    half-dozen rows used here that costs nothing and keeps the arithmetic
    straightforwardly exact.
    """
    basis = [[int(entry) for entry in row] for row in rows]
    count = len(basis)
    mu, norms = _gram_schmidt(basis)
    k = 1
    while k < count:
        changed = False
        for j in range(k - 1, -1, -1):
            q = math.floor(mu[k][j] + Fraction(1, 2))
            if q:
                basis[k] = [a - q * b for a, b in zip(basis[k], basis[j])]
                changed = True
        if changed:
            mu, norms = _gram_schmidt(basis)
        if norms[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * norms[k - 1]:
            k += 1
        else:
            basis[k - 1], basis[k] = basis[k], basis[k - 1]
            mu, norms = _gram_schmidt(basis)
            k = max(k - 1, 1)
    return basis


def _integer_pair(x: QuadExtElement, digits: int) -> tuple[int, int]:
    """Coordinates of x (val >= 0) as an integer pair modulo p**digits."""
    if x.valuation < 0:
        raise ValueError("negative valuation: not a p-adic integer")
    if x.absprec < digits:
        raise ValueError("fewer digits known than requested")
    modulus = x.p**digits
    shift = x.p ** min(x.val, digits)
    return (x.ua * shift % modulus, x.ub * shift % modulus)


def _normalized_relation(coeffs) -> tuple[int, ...] | None:
    """Strip content and trailing zeros; make the leading coefficient
    positive.  Lists are constant term first."""
    entries = list(coeffs)
    while entries and entries[-1] == 0:
        entries.pop()
    if not entries:
        return None
    content = 0
    for entry in entries:
        content = math.gcd(content, entry)
    entries = [entry // content for entry in entries]
    if entries[-1] < 0:
        entries = [-entry for entry in entries]
    return tuple(entries)


@dataclass(frozen=True)
class AlgebraicCandidate:
    """A primitive integer polynomial relation satisfied by a p-adic number.

    ``coefficients`` lists the constant term first and has positive leading
    coefficient.  The relation was fitted on ``fit_digits`` p-adic digits and
    then confirmed on ``checked_digits`` further digits that played no part
    in the fit.
    """

    coefficients: tuple[int, ...]
    fit_digits: int
    checked_digits: int

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1


def algebraic_x_candidate(
    x: QuadExtElement, degree_bound: int = 2, guard: int = 4
) -> AlgebraicCandidate | None:
    """Reconstruct x as an algebraic number of degree <= degree_bound over Q.

    The known digits are split into a fitting window and a held-out check:
    lattice reduction over the powers 1, x, ..., x^degree_bound (both
    coordinates over the base field, weighted so that any violation of the
    congruence modulo p**fit dominates) proposes primitive integer
    relations, a height gate discards fits whose coefficients are large
    enough to arise by accident, and back-substitution at full precision
    must then vanish on the held-out digits.  Returns None when nothing
    convincing fits; a None is a statement about the available precision,
    not a proof of transcendence.
    """
    if degree_bound < 1:
        raise ValueError("degree bound must be at least 1")
    if x.valuation < 0 and not x.is_zero():
        flipped = algebraic_x_candidate(x.inverse(), degree_bound, guard)
        if flipped is None or flipped.coefficients[0] == 0:
            return None
        reversed_relation = _normalized_relation(
            tuple(reversed(flipped.coefficients))
        )
        return AlgebraicCandidate(
            reversed_relation, flipped.fit_digits, flipped.checked_digits
        )

    dim = degree_bound + 1
    powers = [QuadExtElement.one(x.p, x.nonres, x.absprec)]
    for _ in range(degree_bound):
        powers.append(powers[-1] * x)
    known = min(power.absprec for power in powers)
    check = max(guard, known // 4)
    fit = known - check
    if fit < 4:
        return None
    big = x.p**fit
    pairs = [_integer_pair(power, fit) for power in powers]

    # Rows [e_i | big * a_i, big * b_i] plus two congruence rows make short
    # vectors exactly the small-coefficient relations that vanish mod p**fit
    # in both coordinates.
    rows = []
    for i in range(dim):
        row = [0] * dim
        row[i] = 1
        row.extend((big * pairs[i][0], big * pairs[i][1]))
        rows.append(row)
    rows.append([0] * dim + [big * big, 0])
    rows.append([0] * dim + [0, big * big])

    best: AlgebraicCandidate | None = None
    for row in _lll_reduce(rows):
        if row[dim] != 0 or row[dim + 1] != 0:
            continue
        coeffs = _normalized_relation(row[:dim])
        if coeffs is None:
            continue
        if not x.is_zero():
            while len(coeffs) > 1 and coeffs[0] == 0:
                coeffs = coeffs[1:]  # x is a unit times p^v, v >= 0: cancel T
        if len(coeffs) < 2:
            continue
        height = max(abs(entry) for entry in coeffs)
        if height**dim > x.p ** max(fit - guard, 1):
            continue
        total = QuadExtElement.zero(x.p, x.nonres, x.absprec)
        power = QuadExtElement.one(x.p, x.nonres, x.absprec)
        for entry in coeffs:
            if entry:
                total = total + entry * power
            power = power * x
        if not total.is_zero() or total.absprec < fit + min(check, guard):
            continue
        candidate = AlgebraicCandidate(coeffs, fit, total.absprec - fit)
        if best is None or (candidate.degree, height) < (
            best.degree,
            max(abs(entry) for entry in best.coefficients),
        ):
            best = candidate
    return best


def recognition_outcome(
    point,
    curve: EllipticCurve,
    p: int,
    disc: int,
    digits: int,
    mult_bound: int = 8,
    max_x_height: int = 40,
    max_den: int = 12,
    degree_bound: int = 2,
):
    """Classify a p-adic point against the global curve.

    Returns ("matched", RecognizedPoint) when a searched global point agrees
    with the input to ``digits`` digits, ("algebraic", AlgebraicCandidate)
    when no global point matched but the x-coordinate satisfies a verified
    small integer relation, and ("unrecognized", None) otherwise.
    """
    matched = recognize_global_point(
        point,
        curve,
        p,
        disc,
        digits,
        mult_bound=mult_bound,
        max_x_height=max_x_height,
        max_den=max_den,
    )
    if matched is not None:
        return "matched", matched
    if point is not None:
        candidate = algebraic_x_candidate(point[0], degree_bound=degree_bound)
        if candidate is not None:
            return "algebraic", candidate
    return "unrecognized", None
