"""Certificates: canonical JSON records of the package's computations,
designed for cheap replay verification.

Conventions, chosen so the same inputs always produce byte-identical files:
- "format" tags the schema version.
- every integer is a decimal string (no JSON reader can silently round it);
  rationals are "num/den"; p-adic numbers are {"val", "unit", "absprec"} (or
  {"val", "a", "b", "absprec"} in the quadratic extension) relative to the
  p and nonresidue recorded alongside; complex numbers are {"re", "im"}
  decimal strings at the stated working precision.
- keys are sorted, indentation is fixed, and nothing environmental is
  recorded: no timestamps, hostnames, library versions, or paths.
- each certificate carries residuals that verify_certificate rechecks from
  the stored data alone --- the expensive fixed-point lift never reruns;
  only cheap series evaluations and exact integer arithmetic do.
"""

from __future__ import annotations

import json
from fractions import Fraction

import mpmath as mp

from .curves import EllipticCurve, ec_mul
from .modsym import eigensymbol_for_curve
from .overconvergent import MomentLift
from .padics import PadicElement, QuadExtElement, padic_log, smallest_nonresidue
from .quadfields import QuadNumber
from .tate import TateCurve, tate_parameter

CERT_FORMAT = "shp.cert/1"


# ---------------------------------------------------------------------------
# encoding primitives


def enc_int(n: int) -> str:
    return str(int(n))


def enc_fraction(x) -> str:
    f = Fraction(x)
    return f"{f.numerator}/{f.denominator}"


def dec_fraction(s: str) -> Fraction:
    num, _, den = s.partition("/")
    return Fraction(int(num), int(den or 1))


def enc_padic(x: PadicElement) -> dict:
    return {"absprec": str(x.absprec), "unit": str(x.unit), "val": str(x.val)}


def dec_padic(obj: dict, p: int) -> PadicElement:
    return PadicElement(p, int(obj["val"]), int(obj["unit"]), int(obj["absprec"]))


def enc_quad(x: QuadExtElement) -> dict:
    return {
        "a": str(x.ua),
        "absprec": str(x.absprec),
        "b": str(x.ub),
        "val": str(x.val),
    }


def dec_quad(obj: dict, p: int, nonres: int) -> QuadExtElement:
    return QuadExtElement(
        p, nonres, int(obj["val"]), int(obj["a"]), int(obj["b"]), int(obj["absprec"])
    )


def enc_quadnumber(x: QuadNumber) -> dict:
    return {"rational": enc_fraction(x.a), "surd": enc_fraction(x.b)}


def dec_quadnumber(obj: dict, disc: int) -> QuadNumber:
    return QuadNumber(disc, dec_fraction(obj["rational"]), dec_fraction(obj["surd"]))


def enc_complex(z, digits: int) -> dict:
    z = mp.mpc(z)
    return {
        "im": mp.nstr(z.imag, digits, strip_zeros=False),
        "re": mp.nstr(z.real, digits, strip_zeros=False),
    }


def dec_complex(obj: dict) -> mp.mpc:
    return mp.mpc(mp.mpf(obj["re"]), mp.mpf(obj["im"]))


def valuation_str(x) -> str:
    """Valuation of a defect: "inf" when it vanishes at working precision."""
    return "inf" if x.is_zero() else str(x.valuation)


def _at_least(stated: str, found: str) -> bool:
    """Is the found defect valuation at least the stated one?"""
    if found == "inf":
        return True
    if stated == "inf":
        return False
    return int(found) >= int(stated)


# ---------------------------------------------------------------------------
# serialization


def dumps_certificate(cert: dict) -> str:
    return json.dumps(cert, sort_keys=True, indent=2, ensure_ascii=True) + "\n"


def load_certificate(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        cert = json.load(fh)
    if not isinstance(cert, dict) or cert.get("format") != CERT_FORMAT:
        raise ValueError(f"{path}: not a {CERT_FORMAT} certificate")
    return cert


# ---------------------------------------------------------------------------
# builders


def _envelope(kind: str, inputs: dict, data: dict, residuals: dict) -> dict:
    return {
        "format": CERT_FORMAT,
        "kind": kind,
        "inputs": inputs,
        "data": data,
        "residuals": residuals,
    }


def build_eigensymbol_certificate(curve: EllipticCurve, sign: int) -> dict:
    symbol = eigensymbol_for_curve(curve, sign=sign)
    ap_table = {str(ell): str(curve.ap(ell)) for ell in (2, 3, 5, 7, 11, 13)}
    data = {
        "ap": ap_table,
        "level": str(curve.conductor()),
        "path_zero_to_infinity": str(symbol.path_value(Fraction(0), None)),
        "values": [str(v) for v in symbol.values],
    }
    return _envelope(
        "eigensymbol",
        {"curve": curve.label, "sign": str(sign)},
        data,
        {"recomputation": "matches"},
    )


def build_lift_certificate(lift: MomentLift) -> dict:
    zero_inf = lift.path_moments(Fraction(0), None)
    partition = [lift.ball_moments(b, 1, Fraction(0), None) for b in range(lift.p)]
    defect = "inf"
    for k in range(lift.w):
        total = sum(row[k] for row in partition) - zero_inf[k]
        certified = lift.p ** (lift.w - k)
        if total % certified != 0:
            defect = str(k)
            break
    data = {
        "ap": str(lift.ap),
        "classes": str(lift.space.nreps),
        "vectors": [[str(x) for x in row] for row in lift.vectors],
    }
    residuals = {
        "partition_additivity_defect": defect,
        "zeroth_moments_equal_symbol": "exact",
    }
    return _envelope(
        "lift",
        {
            "curve": lift.symbol.curve.label,
            "moments": str(lift.w),
            "p": str(lift.p),
        },
        data,
        residuals,
    )


def _enc_algebraic(candidate) -> dict:
    """An integer relation on the x-coordinate, with its digit accounting."""
    return {
        "checked_digits": str(candidate.checked_digits),
        "coefficients": [str(c) for c in candidate.coefficients],
        "fit_digits": str(candidate.fit_digits),
    }


def build_darmon_certificate(result, recognized, digits: int, algebraic=None) -> dict:
    p = result.p
    nonres = smallest_nonresidue(p)
    classes = []
    for cp, w in zip(result.class_periods, result.weights):
        classes.append(
            {
                "embedding": [str(v) for v in (cp.embedding.form.a, cp.embedding.form.b, cp.embedding.form.c)],
                "form": [str(v) for v in (cp.form.a, cp.form.b, cp.form.c)],
                "period": enc_quad(cp.period),
                "weight": str(w),
            }
        )
    point = result.point
    norm_defect = valuation_str(result.parameter * result.parameter.frobenius() - 1)
    if point is None:
        point_enc = None
        equation_defect = "inf"
    else:
        x, y = point
        point_enc = [enc_quad(x), enc_quad(y)]
        a1, a2, a3, a4, a6 = result.curve.ainvs
        defect = (
            y * y
            + a1 * x * y
            + a3 * y
            - (x * x * x + a2 * x * x + a4 * x + a6)
        )
        equation_defect = valuation_str(defect)
    base = result.point_in_base()
    recognized_enc = None
    if recognized is not None:
        recognized_enc = {
            "generator": [enc_quadnumber(c) for c in recognized.generator],
            "multiple": str(recognized.multiple),
            "point": [enc_quadnumber(c) for c in recognized.point],
            "sign": str(recognized.sign),
            "torsion": None
            if recognized.torsion is None
            else [enc_quadnumber(c) for c in recognized.torsion],
        }
    data = {
        "algebraic": None if algebraic is None else _enc_algebraic(algebraic),
        "classes": classes,
        "nonresidue": str(nonres),
        "parameter": enc_quad(result.parameter),
        "point": point_enc,
        "point_base": None if base is None else [enc_padic(c) for c in base],
        "recognized": recognized_enc,
    }
    residuals = {
        "curve_equation": equation_defect,
        "match_digits": None if recognized is None else str(digits),
        "parameter_norm_minus_one": norm_defect,
    }
    inputs = {
        "character": "none"
        if result.character_disc is None
        else str(result.character_disc),
        "curve": result.curve.label,
        "digits": str(digits),
        "disc": str(result.disc),
        "moments": str(result.moments),
        "p": str(p),
    }
    return _envelope("darmon-point", inputs, data, residuals)


def build_linvariant_certificate(result, curve: EllipticCurve) -> dict:
    p = result.p
    prec = result.moments + 2
    q = tate_parameter(curve, p, prec)
    log_q = padic_log(q)
    identity = result.log_part * q.valuation - result.ord_part * log_q
    data = {
        "character_disc": str(result.character_disc),
        "log_part": enc_padic(result.log_part),
        "ord_part": str(result.ord_part),
        "tate": {"log_q": enc_padic(log_q), "ord_q": str(q.valuation)},
        "value": enc_padic(result.value),
    }
    residuals = {"cross_identity": valuation_str(identity)}
    inputs = {
        "curve": curve.label,
        "moments": str(result.moments),
        "p": str(p),
    }
    return _envelope("l-invariant", inputs, data, residuals)


def build_heegner_certificate(
    curve: EllipticCurve, disc: int, omega_plus, omega_minus, point, matched, dps: int
) -> dict:
    digits = dps - 8
    ratio = omega_minus / omega_plus
    x, y = point
    a1, a2, a3, a4, a6 = curve.ainvs
    eq_err = abs(
        y * y + a1 * x * y + a3 * y - (x * x * x + a2 * x * x + a4 * x + a6)
    )
    match_err = None
    if matched is not None:
        mx = mp.mpf(matched[0].numerator) / matched[0].denominator
        my = mp.mpf(matched[1].numerator) / matched[1].denominator
        match_err = mp.nstr(max(abs(x - mx), abs(y - my)), 5)
    data = {
        "matched": None
        if matched is None
        else [enc_fraction(matched[0]), enc_fraction(matched[1])],
        "omega_minus": enc_complex(omega_minus, digits),
        "omega_plus": enc_complex(omega_plus, digits),
        "point": [enc_complex(x, digits), enc_complex(y, digits)],
    }
    residuals = {
        "curve_equation_error": mp.nstr(eq_err, 5),
        "match_error": match_err,
        "period_ratio_real_part": mp.nstr(abs(ratio.real), 5),
    }
    inputs = {"curve": curve.label, "disc": str(disc), "dps": str(dps)}
    return _envelope("heegner-point", inputs, data, residuals)


# ---------------------------------------------------------------------------
# the replay verifier: rechecks residuals without redoing the lift


def _verify_eigensymbol(cert: dict, checks: dict):
    curve = EllipticCurve.from_label(cert["inputs"]["curve"])
    symbol = eigensymbol_for_curve(curve, sign=int(cert["inputs"]["sign"]))
    stored = [int(v) for v in cert["data"]["values"]]
    checks["values"] = "ok" if list(symbol.values) == stored else "FAIL: values differ"
    stated = int(cert["data"]["path_zero_to_infinity"])
    got = symbol.path_value(Fraction(0), None)
    checks["path_zero_to_infinity"] = (
        "ok" if got == stated else f"FAIL: {got} != {stated}"
    )
    for ell, ap in cert["data"]["ap"].items():
        if curve.ap(int(ell)) != int(ap):
            checks[f"ap_{ell}"] = "FAIL: eigenvalue mismatch"


def _verify_lift(cert: dict, checks: dict):
    inputs = cert["inputs"]
    curve = EllipticCurve.from_label(inputs["curve"])
    p, moments = int(inputs["p"]), int(inputs["moments"])
    symbol = eigensymbol_for_curve(curve)
    vectors = [[int(x) for x in row] for row in cert["data"]["vectors"]]
    lift = MomentLift.from_vectors(symbol, p, moments, vectors)
    zeros_ok = all(
        lift.vectors[i][0] % lift.modulus == symbol.values[i] % lift.modulus
        for i in range(lift.space.nreps)
    )
    checks["zeroth_moments_equal_symbol"] = (
        "ok" if zeros_ok else "FAIL: zeroth moments drifted"
    )
    zero_inf = lift.path_moments(Fraction(0), None)
    partition = [lift.ball_moments(b, 1, Fraction(0), None) for b in range(p)]
    defect = "inf"
    for k in range(moments):
        total = sum(row[k] for row in partition) - zero_inf[k]
        if total % p ** (moments - k) != 0:
            defect = str(k)
            break
    stated = cert["residuals"]["partition_additivity_defect"]
    checks["partition_additivity"] = (
        "ok" if defect == stated else f"FAIL: defect {defect} != stated {stated}"
    )


def _verify_darmon(cert: dict, checks: dict):
    inputs = cert["inputs"]
    curve = EllipticCurve.from_label(inputs["curve"])
    p = int(inputs["p"])
    moments = int(inputs["moments"])
    disc = int(inputs["disc"])
    nonres = int(cert["data"]["nonresidue"])
    parameter = dec_quad(cert["data"]["parameter"], p, nonres)

    norm_defect = valuation_str(parameter * parameter.frobenius() - 1)
    stated = cert["residuals"]["parameter_norm_minus_one"]
    checks["parameter_norm"] = (
        "ok"
        if _at_least(stated, norm_defect)
        else f"FAIL: norm defect {norm_defect} < stated {stated}"
    )

    point_enc = cert["data"]["point"]
    tate = TateCurve(curve, p, moments)
    recomputed = tate.parametrize(parameter)
    if point_enc is None:
        checks["point"] = "ok" if recomputed is None else "FAIL: stored identity, recomputed a point"
        return
    x = dec_quad(point_enc[0], p, nonres)
    y = dec_quad(point_enc[1], p, nonres)
    if recomputed is None:
        checks["point"] = "FAIL: recomputed identity, stored a point"
        return
    dx, dy = recomputed[0] - x, recomputed[1] - y
    checks["point"] = (
        "ok"
        if dx.is_zero() and dy.is_zero()
        else "FAIL: uniformization does not reproduce the stored point"
    )
    a1, a2, a3, a4, a6 = curve.ainvs
    defect = (
        y * y + a1 * x * y + a3 * y - (x * x * x + a2 * x * x + a4 * x + a6)
    )
    stated = cert["residuals"]["curve_equation"]
    found = valuation_str(defect)
    checks["curve_equation"] = (
        "ok"
        if _at_least(stated, found)
        else f"FAIL: equation defect {found} < stated {stated}"
    )
    recognized = cert["data"]["recognized"]
    if recognized is not None:
        digits = int(cert["residuals"]["match_digits"])
        exact = [dec_quadnumber(c, disc) for c in recognized["point"]]
        ok = True
        for got, want in zip((x, y), exact):
            diff = got - want.embed_padic(p, nonres, digits + 4)
            if not (diff.is_zero() or diff.valuation >= digits):
                ok = False
        checks["recognized_match"] = (
            "ok" if ok else f"FAIL: stored global point no longer matches to {digits} digits"
        )
        gen = [dec_quadnumber(c, disc) for c in recognized["generator"]]
        mult = int(recognized["multiple"])
        sign = int(recognized["sign"])
        combo = ec_mul(curve, mult, tuple(gen))
        if recognized["torsion"] is not None:
            from .curves import ec_add

            tors = tuple(dec_quadnumber(c, disc) for c in recognized["torsion"])
            combo = ec_add(curve, combo, tors)
        if sign == -1:
            from .curves import ec_negate

            combo = ec_negate(curve, combo)
        checks["recognized_arithmetic"] = (
            "ok"
            if combo is not None and list(combo) == exact
            else "FAIL: sign * (multiple * generator + torsion) != stored point"
        )
    algebraic = cert["data"].get("algebraic")
    if algebraic is not None:
        coeffs = [int(c) for c in algebraic["coefficients"]]
        fit = int(algebraic["fit_digits"])
        checked = int(algebraic["checked_digits"])
        height = max(abs(c) for c in coeffs)
        if height ** len(coeffs) > p**fit:
            checks["algebraic_relation"] = (
                "FAIL: coefficients too large for the stated fitting window"
            )
        else:
            target = x if x.valuation >= 0 else x.inverse()
            if x.valuation < 0:
                coeffs = list(reversed(coeffs))
            total = QuadExtElement.zero(p, nonres, target.absprec)
            power = QuadExtElement.one(p, nonres, target.absprec)
            for c in coeffs:
                if c:
                    total = total + c * power
                power = power * target
            checks["algebraic_relation"] = (
                "ok"
                if total.is_zero() and total.absprec >= fit + checked
                else "FAIL: relation does not annihilate the stored x-coordinate"
            )


def _verify_linvariant(cert: dict, checks: dict):
    inputs = cert["inputs"]
    curve = EllipticCurve.from_label(inputs["curve"])
    p = int(inputs["p"])
    moments = int(inputs["moments"])
    log_part = dec_padic(cert["data"]["log_part"], p)
    ord_part = int(cert["data"]["ord_part"])
    q = tate_parameter(curve, p, moments + 2)
    log_q = padic_log(q)
    checks["tate_ord"] = (
        "ok"
        if q.valuation == int(cert["data"]["tate"]["ord_q"])
        else "FAIL: ord_p(q) differs"
    )
    stored_log_q = dec_padic(cert["data"]["tate"]["log_q"], p)
    checks["tate_log"] = (
        "ok" if (log_q - stored_log_q).is_zero() else "FAIL: log_p(q) differs"
    )
    identity = log_part * q.valuation - ord_part * log_q
    stated = cert["residuals"]["cross_identity"]
    found = valuation_str(identity)
    checks["cross_identity"] = (
        "ok"
        if _at_least(stated, found)
        else f"FAIL: identity defect {found} < stated {stated}"
    )
    value = dec_padic(cert["data"]["value"], p)
    recon = value * ord_part - log_part
    checks["value_quotient"] = (
        "ok" if recon.is_zero() else "FAIL: value != log_part/ord_part"
    )


def _verify_heegner(cert: dict, checks: dict):
    inputs = cert["inputs"]
    curve = EllipticCurve.from_label(inputs["curve"])
    dps = int(inputs["dps"])
    with mp.workdps(dps):
        omega_plus = dec_complex(cert["data"]["omega_plus"])
        omega_minus = dec_complex(cert["data"]["omega_minus"])
        ratio = omega_minus / omega_plus
        stated = mp.mpf(cert["residuals"]["period_ratio_real_part"])
        checks["period_ratio"] = (
            "ok"
            if abs(ratio.real) <= stated + mp.mpf(10) ** (-dps + 12)
            else "FAIL: ratio real part exceeds stated residual"
        )
        x = dec_complex(cert["data"]["point"][0])
        y = dec_complex(cert["data"]["point"][1])
        a1, a2, a3, a4, a6 = curve.ainvs
        eq_err = abs(
            y * y + a1 * x * y + a3 * y - (x * x * x + a2 * x * x + a4 * x + a6)
        )
        tol = mp.mpf(cert["residuals"]["curve_equation_error"]) + mp.mpf(10) ** (
            -dps + 14
        )
        checks["curve_equation"] = (
            "ok" if eq_err <= tol else "FAIL: stored point is off the curve"
        )
        if cert["data"]["matched"] is not None:
            fx = dec_fraction(cert["data"]["matched"][0])
            fy = dec_fraction(cert["data"]["matched"][1])
            mx = mp.mpf(fx.numerator) / fx.denominator
            my = mp.mpf(fy.numerator) / fy.denominator
            err = max(abs(x - mx), abs(y - my))
            stated_err = mp.mpf(cert["residuals"]["match_error"])
            checks["match"] = (
                "ok"
                if err <= stated_err + mp.mpf(10) ** (-dps + 14)
                else "FAIL: matched rational point drifted"
            )


_VERIFIERS = {
    "eigensymbol": _verify_eigensymbol,
    "lift": _verify_lift,
    "darmon-point": _verify_darmon,
    "recognize": _verify_darmon,
    "l-invariant": _verify_linvariant,
    "heegner-point": _verify_heegner,
}


def verify_certificate(cert: dict) -> tuple[bool, dict]:
    """(all_ok, per-check report).  Rechecks stored residuals cheaply: exact
    integer arithmetic, series evaluations, and searches, but never the
    distribution-lift fixed point."""
    kind = cert.get("kind")
    if kind not in _VERIFIERS:
        return False, {"kind": f"FAIL: unknown certificate kind {kind!r}"}
    checks: dict = {}
    _VERIFIERS[kind](cert, checks)
    ok = all(v == "ok" for v in checks.values())
    return ok, checks
