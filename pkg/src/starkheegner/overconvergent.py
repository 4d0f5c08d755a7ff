"""Moment lifts of U_p-eigensymbols to distribution-valued symbols.

The boundary measure of an eigensymbol phi assigns exact integers to balls;
this module upgrades it to moments: for every path {r -> s} the vector
m_k = integral over Z_p of t^k d mu_{r->s}(t), k < W, computed mod p^W and
certified mod p^{W-k} (the natural filtration).

Construction.  The measure's refinement law forces the dilation identity

    int_{b + p Z_p} f(t) dmu_{r->s} = a_p * int_{Z_p} f(b + p u) dmu_{(r-b)/p -> (s-b)/p}

so the moment system V must satisfy the self-consistency ("harmonicity in
moment coordinates")

    V({r -> s}) = a_p * sum_{b < p} D(b) V({(r-b)/p -> (s-b)/p}),

with D(b)_{ki} = C(k, i) b^{k-i} p^i.  Each right-hand path reduces through
continued fractions to unimodular pieces {g 0 -> g oo}; writing g = gamma g_j
with gamma in Gamma_0(N) and g_j the stored lift of the P^1(Z/N) class of g,
equivariance converts the piece into T(gamma) V_j where T(gamma) is the
moment transport of t -> (alpha t + beta)/(c t + d) (valid since p | c: the
map preserves Z_p and the expansion has v_p(T_kj) >= j - k, so the
filtration survives).  Iterating V <- a_p * sum_b D(b) * (reduce) from the
zero-padded classical symbol gains one filtration step per pass (the 0-th
moments are exactly stable because a_p^2 = 1), hence converges; we iterate
to an exact integer fixed point mod p^W.

Everything here is plain integer arithmetic mod p^W for speed; consumers
wrap results into tracked p-adic elements with the documented precisions.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb

from .curves import EllipticCurve
from .modsym import EigenSymbol, convergents, eigensymbol_for_curve


# ---------------------------------------------------------------------------
# paths as sums of unimodular pieces


def pieces_from_infinity(cusp):
    """{oo -> cusp} = sum of {g 0 -> g oo} over the returned (sign, g).

    g = (p_k, s p_{k-1}, q_k, s q_{k-1}) with s = (-1)^(k-1) has det 1 and
    matches the class (q_k : s q_{k-1}) used by the scalar path evaluator."""
    if cusp is None:
        return []
    f = Fraction(cusp)
    pieces = []
    pprev, qprev = 1, 0
    sign = -1
    for pk, qk in convergents(f.numerator, f.denominator):
        g = (pk, sign * pprev, qk, sign * qprev)
        assert g[0] * g[3] - g[1] * g[2] == 1
        pieces.append((1, g))
        pprev, qprev = pk, qk
        sign = -sign
    return pieces


def unimodular_path_pieces(start, end):
    """{start -> end} as a signed list of unimodular matrices g: the formal
    sum of {g 0 -> g oo}.  Cusps are Fractions or None (= infinity)."""
    out = [(-s, g) for (s, g) in pieces_from_infinity(start)]
    out.extend(pieces_from_infinity(end))
    return out


def _mat_mul2(m1, m2):
    a, b, c, d = m1
    e, f, g, h = m2
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def _mat_inv2(m):
    a, b, c, d = m
    assert a * d - b * c == 1
    return (d, -b, -c, a)


# ---------------------------------------------------------------------------
# moment transport matrices (integer, mod p^W)


def transport_matrix(mat, w: int, p: int, modulus: int):
    """T with (T v)_k = moments of the pushforward under t -> (at+b)/(ct+d).

    Requires p | c and p coprime to d, so the map preserves Z_p and
    v_p(T_kj) >= j - k (filtration-safe).  Row k holds [t^j] ((at+b)/(ct+d))^k."""
    a, b, c, d = mat
    assert c % p == 0 and d % p != 0
    dinv = pow(d, -1, modulus)
    ratio = (-c * dinv) % modulus  # v_p >= 1
    inv_series = [dinv]
    for _ in range(w - 1):
        inv_series.append(inv_series[-1] * ratio % modulus)
    # R(t) = (b + a t) (c t + d)^{-1}  truncated at t^w
    r_poly = [b * inv_series[0] % modulus]
    for m in range(1, w):
        r_poly.append((b * inv_series[m] + a * inv_series[m - 1]) % modulus)
    rows = [[1] + [0] * (w - 1)]
    cur = rows[0]
    for _ in range(1, w):
        new = [0] * w
        for i, ci in enumerate(cur):
            if ci:
                for j in range(w - i):
                    rj = r_poly[j]
                    if rj:
                        new[i + j] = (new[i + j] + ci * rj) % modulus
        rows.append(new)
        cur = new
    return rows


def dilation_matrix(b: int, p: int, w: int, modulus: int, scale: int = 1):
    """D with (D v)_k = scale * moments of u -> b + p u: sum_i C(k,i) b^(k-i) p^i v_i."""
    rows = []
    for k in range(w):
        row = [0] * w
        for i in range(k + 1):
            row[i] = scale * comb(k, i) * pow(b, k - i) * pow(p, i) % modulus
        rows.append(row)
    return rows


def _mat_mul(m1, m2, w, modulus):
    out = [[0] * w for _ in range(w)]
    for i in range(w):
        row1 = m1[i]
        outi = out[i]
        for k in range(w):
            c = row1[k]
            if c:
                row2 = m2[k]
                for j in range(w):
                    if row2[j]:
                        outi[j] = (outi[j] + c * row2[j]) % modulus
    return out


def _mat_add_into(dst, src, modulus):
    w = len(dst)
    for i in range(w):
        di, si = dst[i], src[i]
        for j in range(w):
            di[j] = (di[j] + si[j]) % modulus


def _mat_vec(m, v, modulus):
    out = []
    for row in m:
        acc = 0
        for c, x in zip(row, v):
            if c and x:
                acc += c * x
        out.append(acc % modulus)
    return out


# ---------------------------------------------------------------------------
# the lift


class MomentLift:
    """Distribution-valued lift of a p-new eigensymbol with a_p = +-1.

    vectors[i][k] is the k-th moment on Z_p of the measure of the path
    attached to the i-th P^1(Z/N) class, mod p^W, certified mod p^(W-k)."""

    def __init__(self, symbol: EigenSymbol, p: int, moments: int,
                 max_iterations: int | None = None):
        self._init_fields(symbol, p, moments)
        self._compile()
        self._iterate(max_iterations or 2 * moments + 8)

    def _init_fields(self, symbol: EigenSymbol, p: int, moments: int):
        n = symbol.curve.conductor()
        if n % p != 0 or (n // p) % p == 0:
            raise ValueError("p must divide the level exactly once")
        self.symbol = symbol
        self.p = p
        self.level = n
        self.w = moments
        self.modulus = p**moments
        self.ap = symbol.curve.ap(p)
        assert self.ap in (1, -1)
        self.space = symbol.space

    @classmethod
    def from_vectors(cls, symbol: EigenSymbol, p: int, moments: int, vectors):
        """A lift restored from stored fixed-point vectors (cache hits);
        queries work immediately, no transfer-operator iteration runs."""
        self = cls.__new__(cls)
        self._init_fields(symbol, p, moments)
        if len(vectors) != self.space.nreps or any(
            len(row) != moments for row in vectors
        ):
            raise ValueError("stored vectors do not fit the symbol space")
        self.vectors = [[int(x) % self.modulus for x in row] for row in vectors]
        self.iterations = 0
        return self

    # -- setup ----------------------------------------------------------------

    def _reduce_path_to_blocks(self, start, end):
        """{start -> end} as [(sign, class index j, gamma in Gamma_0(N))]."""
        out = []
        for sign, g in unimodular_path_pieces(start, end):
            j = self.space.index(g[2], g[3])
            gamma = _mat_mul2(g, _mat_inv2(self.space.lifts[j]))
            assert gamma[2] % self.level == 0
            assert gamma[0] * gamma[3] - gamma[1] * gamma[2] == 1
            out.append((sign, j, gamma))
        return out

    def _compile(self):
        """Per-class transfer blocks A[i][j] with V_i = sum_j A[i][j] V_j."""
        w, p, modulus = self.w, self.p, self.modulus
        blocks: list[dict[int, list[list[int]]]] = []
        for i in range(self.space.nreps):
            a, b, c, d = self.space.lifts[i]
            start = Fraction(b, d) if d else None
            end = Fraction(a, c) if c else None
            acc: dict[int, list[list[int]]] = {}
            for shift in range(p):
                s_start = None if start is None else (start - shift) / p
                s_end = None if end is None else (end - shift) / p
                dil = dilation_matrix(shift, p, w, modulus, scale=self.ap)
                per_j: dict[int, list[list[int]]] = {}
                for sign, j, gamma in self._reduce_path_to_blocks(s_start, s_end):
                    t_mat = transport_matrix(gamma, w, p, modulus)
                    if sign < 0:
                        t_mat = [[(-x) % modulus for x in row] for row in t_mat]
                    if j in per_j:
                        _mat_add_into(per_j[j], t_mat, modulus)
                    else:
                        per_j[j] = t_mat
                for j, t_sum in per_j.items():
                    prod = _mat_mul(dil, t_sum, w, modulus)
                    if j in acc:
                        _mat_add_into(acc[j], prod, modulus)
                    else:
                        acc[j] = prod
            blocks.append(acc)
        self._blocks = blocks

    def _iterate(self, max_iterations: int):
        modulus = self.modulus
        v = [
            [self.symbol.values[i] % modulus] + [0] * (self.w - 1)
            for i in range(self.space.nreps)
        ]
        for it in range(max_iterations):
            new = []
            for i in range(self.space.nreps):
                acc = [0] * self.w
                for j, block in self._blocks[i].items():
                    term = _mat_vec(block, v[j], modulus)
                    for k in range(self.w):
                        acc[k] = (acc[k] + term[k]) % modulus
                new.append(acc)
            if new == v:
                self.iterations = it + 1
                self.vectors = v
                return
            v = new
        raise RuntimeError("moment lift did not reach a fixed point")

    # -- queries ---------------------------------------------------------------

    def path_moments(self, start, end) -> list[int]:
        """Moments on Z_p of mu_{start->end}: k-th certified mod p^(W-k)."""
        acc = [0] * self.w
        for sign, j, gamma in self._reduce_path_to_blocks(start, end):
            t_mat = transport_matrix(gamma, self.w, self.p, self.modulus)
            term = _mat_vec(t_mat, self.vectors[j], self.modulus)
            for k in range(self.w):
                acc[k] = (acc[k] + sign * term[k]) % self.modulus
        return acc

    def ball_moments(self, center: int, depth: int, start, end) -> list[int]:
        """Moments of mu_{start->end} on the ball center + p^depth Z_p.

        For depth >= 1 every entry is certified mod p^W; at depth 0 the k-th
        entry is certified mod p^(W-k)."""
        if depth == 0:
            assert center % 1 == 0
            return self.path_moments(start, end)
        pn = self.p**depth
        s_start = None if start is None else (start - center) / pn
        s_end = None if end is None else (end - center) / pn
        base = self.path_moments(s_start, s_end)
        scale = self.ap if depth % 2 else 1
        out = []
        for k in range(self.w):
            acc = 0
            for i in range(k + 1):
                acc += comb(k, i) * pow(center, k - i) * pow(pn, i) * base[i]
            out.append(scale * acc % self.modulus)
        return out


def moment_lift_for_curve(label_or_curve, p: int, moments: int) -> MomentLift:
    curve = (
        label_or_curve
        if isinstance(label_or_curve, EllipticCurve)
        else EllipticCurve.from_label(label_or_curve)
    )
    return MomentLift(eigensymbol_for_curve(curve), p, moments)
