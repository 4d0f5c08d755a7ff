"""Command-line orchestrator.

Every computing subcommand emits a versioned JSON certificate (stdout, or
--out FILE): a deterministic record of inputs, results, and residuals that
`verify` can recheck later without redoing the expensive moment lift.

    starkheegner eigensymbol  --curve 11a
    starkheegner lift         --curve 11a --p 11 --moments 8
    starkheegner darmon-point --curve 37a --p 37 --disc 5 --moments 12
    starkheegner heegner-point --curve 37a --disc -7
    starkheegner l-invariant  --curve 37a --p 37 --moments 10
    starkheegner recognize    --certificate cert.json --digits 8
    starkheegner verify       --certificate cert.json
    starkheegner selftest

Exit status: 0 on success, 1 on a failed computation/verification, 2 on
usage errors.
"""

from __future__ import annotations

import argparse
import random
import sys
from fractions import Fraction

import mpmath as mp

from . import certificates as certs
from .cache import cached_moment_lift
from .curves import EllipticCurve
from .heegner import heegner_point, lattice_periods, match_rational_point, split_periods
from .integration import moment_product, riemann_product
from .linvariant import l_invariant
from .measures import BoundaryMeasure, depth_partition
from .modsym import eigensymbol_for_curve
from .overconvergent import MomentLift
from .padics import PadicElement, QuadExtElement, padic_log, smallest_nonresidue
from .points import darmon_point, recognition_outcome
from .tate import TateCurve, tate_parameter


def _emit(cert: dict, out: str | None) -> None:
    text = certs.dumps_certificate(cert)
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_eigensymbol(args) -> int:
    curve = EllipticCurve.from_label(args.curve)
    cert = certs.build_eigensymbol_certificate(curve, args.sign)
    _emit(cert, args.out)
    return 0


def cmd_lift(args) -> int:
    lift = cached_moment_lift(args.curve, args.p, args.moments)
    cert = certs.build_lift_certificate(lift)
    _emit(cert, args.out)
    return 0


def cmd_darmon_point(args) -> int:
    lift = cached_moment_lift(args.curve, args.p, args.moments)
    result = darmon_point(
        args.curve, args.p, args.disc, args.moments, character=args.character, lift=lift
    )
    digits = args.digits if args.digits is not None else max(4, args.moments - 4)
    kind, found = recognition_outcome(
        result.point, result.curve, args.p, args.disc, digits
    )
    recognized = found if kind == "matched" else None
    algebraic = found if kind == "algebraic" else None
    cert = certs.build_darmon_certificate(result, recognized, digits, algebraic)
    _emit(cert, args.out)
    return 0


def cmd_heegner_point(args) -> int:
    curve = EllipticCurve.from_label(args.curve)
    with mp.workdps(args.dps):
        omega_plus, omega_minus, _residual = split_periods(curve)
        point = heegner_point(curve, args.disc)
        if point is None:
            print("error: the CM point maps to the identity", file=sys.stderr)
            return 1
        matched = match_rational_point(curve, point, mp.mpf(args.tol))
        cert = certs.build_heegner_certificate(
            curve, args.disc, omega_plus, omega_minus, point, matched, args.dps
        )
    _emit(cert, args.out)
    return 0


def cmd_l_invariant(args) -> int:
    curve = EllipticCurve.from_label(args.curve)
    lift = cached_moment_lift(curve, args.p, args.moments)
    result = l_invariant(curve, args.p, args.moments, disc=args.disc, lift=lift)
    cert = certs.build_linvariant_certificate(result, curve)
    _emit(cert, args.out)
    return 0


def cmd_recognize(args) -> int:
    cert = certs.load_certificate(args.certificate)
    if cert["kind"] not in ("darmon-point", "recognize"):
        print(
            f"error: recognize needs a darmon-point certificate, got {cert['kind']!r}",
            file=sys.stderr,
        )
        return 1
    inputs = cert["inputs"]
    curve = EllipticCurve.from_label(inputs["curve"])
    p, disc = int(inputs["p"]), int(inputs["disc"])
    digits = args.digits if args.digits is not None else int(inputs["digits"])
    nonres = int(cert["data"]["nonresidue"])
    point_enc = cert["data"]["point"]
    point = None
    if point_enc is not None:
        point = (
            certs.dec_quad(point_enc[0], p, nonres),
            certs.dec_quad(point_enc[1], p, nonres),
        )
    kind, found = recognition_outcome(point, curve, p, disc, digits)
    recognized = found if kind == "matched" else None
    out_cert = dict(cert)
    out_cert["kind"] = "recognize"
    out_cert["inputs"] = dict(inputs, digits=str(digits))
    data = dict(cert["data"])
    residuals = dict(cert["residuals"])
    data["algebraic"] = (
        certs._enc_algebraic(found) if kind == "algebraic" else None
    )
    if recognized is None:
        data["recognized"] = None
        residuals["match_digits"] = None
    else:
        data["recognized"] = {
            "generator": [certs.enc_quadnumber(c) for c in recognized.generator],
            "multiple": str(recognized.multiple),
            "point": [certs.enc_quadnumber(c) for c in recognized.point],
            "sign": str(recognized.sign),
            "torsion": None
            if recognized.torsion is None
            else [certs.enc_quadnumber(c) for c in recognized.torsion],
        }
        residuals["match_digits"] = str(digits)
    out_cert["data"] = data
    out_cert["residuals"] = residuals
    _emit(out_cert, args.out)
    # an unrecognized outcome is a recorded result, not a failure
    return 0


def cmd_verify(args) -> int:
    cert = certs.load_certificate(args.certificate)
    ok, checks = certs.verify_certificate(cert)
    for name in sorted(checks):
        status = checks[name]
        line = f"ok    {name}" if status == "ok" else f"FAIL  {name}: {status}"
        print(line)
    print(f"verify: {'accepted' if ok else 'REJECTED'} ({cert['kind']})")
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# selftest: a fast battery over every layer


def _check_padic_arithmetic() -> None:
    p = 11
    x = PadicElement.from_int(1 + p, p, 10)
    lg = padic_log(x)
    assert lg.valuation == 1, "log(1+p) should have valuation 1"
    s = PadicElement.from_int(4, p, 10).sqrt()
    assert (s * s - 4).is_zero(), "sqrt(4)^2 != 4"
    nonres = smallest_nonresidue(p)
    a = QuadExtElement(p, nonres, 0, 7, 3, 8)
    b = QuadExtElement(p, nonres, 0, 2, 9, 8)
    lhs = (a * b).norm()
    rhs = a.norm() * b.norm()
    assert (lhs - rhs).is_zero(), "norm is not multiplicative"
    assert (a * a.inverse() - 1).is_zero(), "inverse failed"


def _check_eigensymbols() -> None:
    expected = {"11a": 2, "37a": 0}
    for label, value in expected.items():
        symbol = eigensymbol_for_curve(EllipticCurve.from_label(label))
        got = symbol.path_value(Fraction(0), None)
        assert got == value, f"{label}: path value {got} != {value}"


def _check_measure_laws() -> None:
    symbol = eigensymbol_for_curve(EllipticCurve.from_label("11a"))
    measure = BoundaryMeasure(symbol, 11)
    for path in [(Fraction(0), None), (Fraction(1, 3), Fraction(2, 5))]:
        for ball in depth_partition(11, 1):
            defect = measure.harmonicity_defect(ball, *path)
            assert defect == 0, f"harmonicity defect {defect} on {ball}"


def _check_moment_lift() -> None:
    symbol = eigensymbol_for_curve(EllipticCurve.from_label("11a"))
    lift = MomentLift(symbol, 11, 4)
    for i in range(lift.space.nreps):
        assert lift.vectors[i][0] % lift.modulus == symbol.values[i] % lift.modulus
    parent = lift.path_moments(Fraction(0), None)
    children = [lift.ball_moments(b, 1, Fraction(0), None) for b in range(11)]
    for k in range(4):
        total = sum(row[k] for row in children) - parent[k]
        assert total % 11 ** (4 - k) == 0, f"partition additivity failed at {k}"


def _check_integral_evaluators() -> None:
    rng = random.Random(20260815)
    symbol = eigensymbol_for_curve(EllipticCurve.from_label("11a"))
    lift = MomentLift(symbol, 11, 4)
    measure = BoundaryMeasure(symbol, 11)
    nonres = smallest_nonresidue(11)
    tau = QuadExtElement(11, nonres, 0, rng.randrange(11**4), 11 * 3 + 5, 4)
    path = (Fraction(0), Fraction(1, 2))
    a = moment_product(lift, tau, *path)
    b = riemann_product(measure, tau, *path, 2)
    diff = a / b - 1
    assert diff.is_zero() or diff.valuation >= 2, "evaluators disagree"


def _check_l_invariant() -> None:
    result = l_invariant("11a", 11, 6)
    q = tate_parameter(EllipticCurve.from_label("11a"), 11, 8)
    identity = result.log_part * q.valuation - result.ord_part * padic_log(q)
    assert identity.is_zero(), "L-invariant cross identity failed"
    assert result.value.valuation >= 1


def _check_tate() -> None:
    for label, p, ord_q in [("11a", 11, 5), ("37a", 37, 1)]:
        curve = EllipticCurve.from_label(label)
        q = tate_parameter(curve, p, 8)
        assert q.valuation == ord_q, f"{label}: ord q {q.valuation} != {ord_q}"
        assert ord_q == -_ord_fraction(curve.j_invariant, p), "ord q != -ord_p(j)"
        tate = TateCurve(curve, p, 6)
        u = PadicElement.from_int(1 + p * 3, p, 6)
        pt = tate.parametrize(u)
        assert pt is not None
        x, y = pt
        a1, a2, a3, a4, a6 = curve.ainvs
        defect = y * y + a1 * x * y + a3 * y - (x**3 + a2 * x * x + a4 * x + a6)
        assert defect.is_zero() or defect.valuation >= 4, "point off the curve"


def _ord_fraction(x: Fraction, p: int) -> int:
    from .padics import valuation_of_int

    return valuation_of_int(x.numerator, p) - valuation_of_int(x.denominator, p)


def _check_archimedean() -> None:
    with mp.workdps(25):
        curve = EllipticCurve.from_label("37a")
        omega1, omega2 = lattice_periods(curve)
        assert abs(omega1.imag) < mp.mpf("1e-20") and abs(omega2.real) < mp.mpf(
            "1e-20"
        ), "lattice not rectangular"
        omega_plus, omega_minus, residual = split_periods(curve)
        assert residual < mp.mpf("1e-12"), f"period residual {residual}"
        ratio = omega_minus / omega_plus
        assert abs(ratio.real) < mp.mpf("1e-15"), "ratio not purely imaginary"


def _check_darmon_engine() -> None:
    curve = EllipticCurve.from_label("11a")
    lift = MomentLift(eigensymbol_for_curve(curve), 11, 4)
    result = darmon_point("11a", 11, 21, 4, lift=lift)
    norm_defect = result.parameter * result.parameter.frobenius() - 1
    assert norm_defect.is_zero(), "trace parameter is not norm one"
    x, y = result.point
    assert x.is_in_base(), "trace x-coordinate did not descend to Q_p"
    a1, _, a3, _, _ = curve.ainvs
    flipped = y.frobenius() + y + a1 * x + a3
    assert flipped.is_zero() or flipped.valuation >= 2, (
        "trace y-coordinate is not in the Frobenius-minus eigenspace"
    )


SELFTEST = [
    ("p-adic field arithmetic", _check_padic_arithmetic),
    ("eigensymbol path values", _check_eigensymbols),
    ("boundary measure laws", _check_measure_laws),
    ("overconvergent moment lift", _check_moment_lift),
    ("integral evaluator agreement", _check_integral_evaluators),
    ("automorphic l-invariant identity", _check_l_invariant),
    ("tate uniformization", _check_tate),
    ("archimedean periods", _check_archimedean),
    ("darmon trace descends", _check_darmon_engine),
]


def cmd_selftest(_args) -> int:
    failures = 0
    for name, check in SELFTEST:
        try:
            check()
        except AssertionError as exc:
            failures += 1
            print(f"FAIL  {name}: {exc}")
        else:
            print(f"ok    {name}")
    total = len(SELFTEST)
    print(f"selftest: {total - failures}/{total} checks passed")
    return 0 if failures == 0 else 1


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="starkheegner",
        description="Stark-Heegner (Darmon) and Heegner points on elliptic curves",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_out(p):
        p.add_argument("--out", metavar="FILE", help="write the certificate here (default stdout)")

    p = sub.add_parser("eigensymbol", help="weight-2 rational eigensymbol of a curve")
    p.add_argument("--curve", required=True, help="curve label, e.g. 37a")
    p.add_argument("--sign", type=int, default=1, choices=(1, -1))
    add_out(p)
    p.set_defaults(func=cmd_eigensymbol)

    p = sub.add_parser("lift", help="overconvergent moment lift of the eigensymbol")
    p.add_argument("--curve", required=True)
    p.add_argument("--p", type=int, required=True, help="prime of multiplicative reduction")
    p.add_argument("--moments", type=int, required=True, help="number of moments / working precision")
    add_out(p)
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser("darmon-point", help="p-adic construction of a Stark-Heegner point")
    p.add_argument("--curve", required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--disc", type=int, required=True, help="real quadratic discriminant, inert at p")
    p.add_argument("--moments", type=int, required=True)
    p.add_argument("--character", type=int, default=None, help="genus character factor (default: trivial / trace)")
    p.add_argument("--digits", type=int, default=None, help="p-adic digits for recognition (default moments-4)")
    add_out(p)
    p.set_defaults(func=cmd_darmon_point)

    p = sub.add_parser("heegner-point", help="complex CM construction (archimedean oracle)")
    p.add_argument("--curve", required=True)
    p.add_argument("--disc", type=int, required=True, help="imaginary quadratic discriminant, class number one")
    p.add_argument("--dps", type=int, default=40, help="working decimal precision")
    p.add_argument("--tol", default="1e-15", help="matching tolerance for the rational point search")
    add_out(p)
    p.set_defaults(func=cmd_heegner_point)

    p = sub.add_parser("l-invariant", help="automorphic L-invariant at a split/nonsplit prime")
    p.add_argument("--curve", required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--moments", type=int, required=True)
    p.add_argument("--disc", type=int, default=None, help="quadratic character discriminant (default: scan)")
    add_out(p)
    p.set_defaults(func=cmd_l_invariant)

    p = sub.add_parser("recognize", help="re-run global recognition against a stored certificate")
    p.add_argument("--certificate", required=True, metavar="FILE")
    p.add_argument("--digits", type=int, default=None, help="agreement digits (default: as stored)")
    add_out(p)
    p.set_defaults(func=cmd_recognize)

    p = sub.add_parser("verify", help="recheck a certificate's residuals without redoing the lift")
    p.add_argument("--certificate", required=True, metavar="FILE")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("selftest", help="fast battery across every layer")
    p.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
