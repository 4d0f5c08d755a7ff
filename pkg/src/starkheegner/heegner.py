"""The archimedean oracle: period lattice, eigensymbol-split periods, and
Heegner points by direct evaluation of the modular parametrization.

Everything here is classical complex analysis, deliberately independent of
the p-adic layers: the period lattice comes from the arithmetic-geometric
mean on the short model, loop periods come from numerically integrating the
newform (its antiderivative is the rapidly convergent q-series F(z) =
sum a_n/n e^(2 pi i n z)), and the two are reconciled through the integer
eigensymbol values -- the same homology pairing the p-adic side is built on.
Heegner points evaluate F at a CM point of the upper half plane and pass
through the complex Tate parametrization (the same universal series as the
p-adic one, run on mpmath numbers)."""

from __future__ import annotations

from fractions import Fraction
from math import gcd

import mpmath as mp

from .curves import EllipticCurve, rational_points_naive
from .modsym import eigensymbol_for_curve
from .quadfields import heegner_form, negative_class_number
from .tate import evaluate_series, solve_model_transport, tate_model_series, xy_from_parameter


def _terms_for(im_z, digits: int) -> int:
    """Terms of the q-series needed for 10^-digits accuracy at height im_z."""
    return int((digits + 6) * mp.log(10) / (2 * mp.pi * im_z)) + 20


def fourier_antiderivative(curve_or_an, z, terms: int):
    """F(z) = sum_{n <= terms} a_n/n e^(2 pi i n z); F' = 2 pi i f."""
    an = (
        curve_or_an
        if isinstance(curve_or_an, list)
        else curve_or_an.an_coefficients(terms)
    )
    terms = min(terms, len(an) - 1)
    q = mp.exp(2j * mp.pi * z)
    acc = mp.mpc(0)
    qp = mp.mpc(1)
    for n in range(1, terms + 1):
        qp *= q
        if an[n]:
            acc += mp.mpf(an[n]) / n * qp
    return acc


def lattice_periods(curve: EllipticCurve):
    """(omega1, omega2) generating the period lattice of the invariant
    differential, via the AGM on the short model.  Rectangular case only
    (positive discriminant: three real roots); omega1 real, omega2 imaginary."""
    if curve.discriminant < 0:
        raise ValueError("rectangular lattices only (curve discriminant < 0)")
    a, b = curve.short_model()
    roots = sorted((r.real for r in mp.polyroots([1, 0, a, b])), reverse=True)
    e1, e2, e3 = roots
    # the short model scales the differential by 6
    omega1 = 6 * mp.pi / mp.agm(mp.sqrt(e1 - e3), mp.sqrt(e1 - e2))
    omega2 = 6 * mp.mpc(0, 1) * mp.pi / mp.agm(mp.sqrt(e1 - e3), mp.sqrt(e2 - e3))
    return omega1, omega2


def loop_period(an, n_level: int, a: int, c: int):
    """The period of 2 pi i f dz over the loop of gamma = (a, *; c, *) in
    Gamma_0(N), evaluated as F(gamma z0) - F(z0) at the balanced base point
    z0 = (-d + i/sqrt(N))/c."""
    d = pow(a, -1, c)
    b = (a * d - 1) // c
    z0 = mp.mpc(-d, 1 / mp.sqrt(n_level)) / c
    gz0 = (a * z0 + b) / (c * z0 + d)
    terms = _terms_for(z0.imag, mp.mp.dps)
    return fourier_antiderivative(an, gz0, terms) - fourier_antiderivative(
        an, z0, terms
    )


def split_periods(curve: EllipticCurve, scan: int = 40):
    """(Omega+, Omega-, residual): the periods attached to the plus and minus
    eigensymbols, solved from loop integrals.

    Every loop satisfies I(gamma) = phi+(gamma) Omega+ + phi-(gamma) Omega-
    with the integer symbol values; two independent loops determine Omega+-
    and the rest of the scanned loops cross-check (the returned residual is
    the worst |I - predicted|).  Omega+ is real and Omega- imaginary up to
    the working precision; their actual signs follow the symbol
    normalization and are deterministic."""
    n = curve.conductor()
    plus = eigensymbol_for_curve(curve, sign=1)
    minus = eigensymbol_for_curve(curve, sign=-1, space=plus.space)
    terms_hint = _terms_for(mp.mpf(1) / (2 * n * mp.sqrt(n)), mp.mp.dps)
    an = curve.an_coefficients(terms_hint)
    rows = []
    for c in (n, 2 * n):
        for a in range(1, min(scan, c)):
            if gcd(a, c) != 1:
                continue
            sp = plus.path_value(None, Fraction(a, c))
            sm = minus.path_value(None, Fraction(a, c))
            if sp == 0 and sm == 0:
                continue
            rows.append((sp, sm, loop_period(an, n, a, c)))
            have_plus = any(r[0] for r in rows)
            have_minus = any(r[1] for r in rows)
            if len(rows) >= 6 and have_plus and have_minus:
                break
        else:
            continue
        break
    solution = None
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            det = rows[i][0] * rows[j][1] - rows[i][1] * rows[j][0]
            if det in (1, -1):
                solution = (i, j, det)
                break
        if solution:
            break
    if solution is None:
        raise RuntimeError("no unimodular pair of loops found")
    i, j, det = solution
    omega_plus = (rows[i][2] * rows[j][1] - rows[j][2] * rows[i][1]) / det
    omega_minus = (rows[i][0] * rows[j][2] - rows[j][0] * rows[i][2]) / det
    residual = max(
        abs(period - (sp * omega_plus + sm * omega_minus))
        for sp, sm, period in rows
    )
    return omega_plus, omega_minus, residual


def complex_tate_point(curve: EllipticCurve, z, omega1, omega2):
    """The point of E(C) with elliptic logarithm z, via the Tate series on
    u = e^(2 pi i z/omega1), q = e^(2 pi i omega2/omega1)."""
    q = mp.exp(2j * mp.pi * (omega2 / omega1))
    u = mp.exp(2j * mp.pi * (z / omega1))
    while abs(u) > 1:
        u = u * q
    while abs(u) <= abs(q):
        u = u / q
    if abs(u - 1) < mp.mpf(10) ** (-mp.mp.dps + 8):
        return None
    nterms = int(mp.mp.dps * mp.log(10) / -mp.log(abs(q))) + 8
    a4c, a6c, s1c = tate_model_series(nterms + 1)
    a4q = evaluate_series(a4c, q, nterms + 1)
    a6q = evaluate_series(a6c, q, nterms + 1)
    s1v = evaluate_series(s1c, q, nterms + 1)
    u0, r, s, t = solve_model_transport(curve, a4q, a6q, mp.sqrt)
    xs, ys = xy_from_parameter(u, q, s1v, nterms)
    x = (xs - r) / (u0 * u0)
    y = (ys - s * (xs - r) - t) / (u0**3)
    return (x, y)


def heegner_point(curve_or_label, disc: int):
    """The Heegner point of discriminant disc < 0 on E, as a complex pair.

    Evaluates the modular parametrization at the CM point of the level-N
    form of discriminant disc.  Class number one only: there the single
    point already equals its trace and lands in E(Q) (up to the usual
    conjectural identification, which the caller checks numerically)."""
    curve = (
        curve_or_label
        if isinstance(curve_or_label, EllipticCurve)
        else EllipticCurve.from_label(curve_or_label)
    )
    if negative_class_number(disc) != 1:
        raise ValueError("class number one discriminants only")
    n = curve.conductor()
    form = heegner_form(n, disc)
    tau = (-form.b + mp.sqrt(mp.mpc(disc))) / (2 * form.a)
    terms = _terms_for(tau.imag, mp.mp.dps)
    z = fourier_antiderivative(curve.an_coefficients(terms), tau, terms)
    omega1, omega2 = lattice_periods(curve)
    return complex_tate_point(curve, z, omega1, omega2)


def match_rational_point(
    curve: EllipticCurve, xy, tol, max_x_height: int = 40, max_den: int = 12
):
    """The searched rational point within tol of the complex pair, or None."""
    if xy is None:
        return None
    x, y = xy
    for cx, cy in rational_points_naive(curve, max_x_height, max_den):
        dx = abs(x - mp.mpf(cx.numerator) / cx.denominator)
        dy = abs(y - mp.mpf(cy.numerator) / cy.denominator)
        if dx < tol and dy < tol:
            return (cx, cy)
    return None
