"""Weight-2 modular symbols for Gamma_0(N) on the function side.

The space is V_N = { v : P^1(Z/N) -> Q  with  v + v|S = 0,  v + v|T + v|T^2 = 0 }
where S = [[0,-1],[1,0]], T = [[0,-1],[1,-1]] and (v|g)(x) = v(x g) for a row
vector x = (c:d).  V_N is the linear dual of the space of weight-2 modular
symbols, dim V_N = 2 g(X_0(N)) + #cusps - 1.

A class x = (c:d) with unimodular lift g (bottom row congruent to (c, d))
corresponds to the geodesic path {g 0 -> g oo}; a vector v therefore induces
path integrals phi_v{r -> s} for cusps r, s via continued-fraction convergents.
Hecke operators act through their coset matrices on the path side, so the dual
eigenvector attached to a rational newform is cut out by exact kernel
intersections (T_ell - a_ell with a_ell from point counting).

Everything is exact: Fraction linear algebra, integer eigensymbols normalized
to content 1 with a fixed sign.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .curves import EllipticCurve, prime_sieve


# ---------------------------------------------------------------------------
# exact linear algebra over Q


def rref(rows):
    """Reduced row echelon form (in place on a copy); returns (rows, pivots)."""
    mat = [list(r) for r in rows]
    nrows = len(mat)
    ncols = len(mat[0]) if nrows else 0
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, nrows) if mat[i][c] != 0), None)
        if pivot is None:
            continue
        mat[r], mat[pivot] = mat[pivot], mat[r]
        inv = Fraction(1) / mat[r][c]
        mat[r] = [inv * t for t in mat[r]]
        for i in range(nrows):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return mat[:r], pivots


def kernel_basis(rows, ncols):
    """Basis of the right kernel of the matrix (list of row lists)."""
    if not rows:
        return [
            [Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)
        ]
    red, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * ncols
        vec[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            vec[pc] = -red[r][fc]
        basis.append(vec)
    return basis


def solve_in_span(basis, target):
    """Coefficients c with sum c_i basis_i == target, or None if insoluble."""
    ncols = len(basis)
    n = len(target)
    aug = [[basis[j][i] for j in range(ncols)] + [target[i]] for i in range(n)]
    red, pivots = rref(aug)
    if ncols in pivots:
        return None
    coeffs = [Fraction(0)] * ncols
    for r, pc in enumerate(pivots):
        coeffs[pc] = red[r][ncols]
    return coeffs


# ---------------------------------------------------------------------------
# P^1(Z/N) and unimodular lifts


def p1_classes(n: int):
    """Canonical representatives of P^1(Z/N) and a full lookup table."""
    units = [u for u in range(n) if gcd(u, n) == 1]
    reps = []
    lookup = {}
    for c in range(n):
        for d in range(n):
            if gcd(gcd(c, d), n) != 1:
                continue
            if (c, d) in lookup:
                continue
            idx = len(reps)
            reps.append((c, d))
            for u in units:
                lookup[(u * c % n, u * d % n)] = idx
    return reps, lookup


def lift_to_sl2z(c: int, d: int, n: int):
    """A matrix (a, b, c', d') of determinant 1 with (c', d') == (c, d) mod N."""
    c %= n
    d %= n
    if c == 0:
        if gcd(d, n) != 1:
            raise ValueError("not a P^1 class")
        return (1, 0, 0, 1) if d % n == 1 or n == 1 else _lift_nonzero(n, d, n)
    return _lift_nonzero(c, d, n)


def _lift_nonzero(c: int, d: int, n: int):
    # adjust d within its residue class until gcd(c, d) == 1
    dd = d
    while gcd(c, dd) != 1:
        dd += n
        if dd > d + 100 * n:  # cannot happen for valid classes
            raise ValueError("lift failed")
    g, x, y = _xgcd(c, dd)
    assert g == 1
    # a*dd - b*c = 1 with a = y?? choose a = y, b = -x: y*dd - (-x)*c ... careful
    # we need det = a*dd - b*c = 1; xgcd gives x*c + y*dd = 1
    a, b = y, -x
    assert a * dd - b * c == 1
    return (a, b, c, dd)


def _xgcd(a: int, b: int):
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_r, old_s, old_t


# ---------------------------------------------------------------------------
# cusps


def cusp_normalize(cusp):
    """Return (p, q) in lowest terms with q >= 0; infinity is (1, 0)."""
    if cusp is None:
        return (1, 0)
    f = Fraction(cusp)
    return (f.numerator, f.denominator)


def _cusp_inverse_witness(p: int, q: int) -> int:
    """s with p*s == 1 (mod q); exact inverse for q == 0 (p is then +-1)."""
    if q == 0:
        return p  # p in {1, -1} and p*p == 1 exactly
    if q == 1:
        return 0
    return pow(p, -1, q)


def cusps_equivalent(n: int, cusp1, cusp2) -> bool:
    """Gamma_0(N)-equivalence of cusps (classical s1 q2 == s2 q1 criterion)."""
    p1, q1 = cusp_normalize(cusp1)
    p2, q2 = cusp_normalize(cusp2)
    s1 = _cusp_inverse_witness(p1, q1)
    s2 = _cusp_inverse_witness(p2, q2)
    m = gcd(q1 * q2, n)
    return (s1 * q2 - s2 * q1) % m == 0


def moebius(mat, cusp):
    """Action of an integer matrix on a cusp (None = infinity)."""
    a, b, c, d = mat
    if cusp is None:
        return Fraction(a, c) if c else None
    x = Fraction(cusp)
    den = c * x + d
    if den == 0:
        return None
    return (a * x + b) / den


def convergents(num: int, den: int):
    """Continued-fraction convergents of num/den as a list of (p, q), q > 0."""
    if den < 0:
        num, den = -num, -den
    out = []
    p0, q0, p1, q1 = 1, 0, 0, 1  # p0/q0 = previous, starts at infinity
    while den:
        a = num // den
        num, den = den, num - a * den
        p0, q0, p1, q1 = a * p0 + p1, a * q0 + q1, p0, q0
        out.append((p0, q0))
    return out


# ---------------------------------------------------------------------------
# the symbol space


class ModularSymbolSpace:
    """V_N with exact arithmetic; vectors are value tuples on the P^1 reps."""

    def __init__(self, n: int):
        self.n = n
        self.reps, self._lookup = p1_classes(n)
        self.nreps = len(self.reps)
        self.lifts = [lift_to_sl2z(c, d, n) for (c, d) in self.reps]
        self.basis = self._solve_relations()

    # -- structure -----------------------------------------------------------

    def index(self, c: int, d: int) -> int:
        try:
            return self._lookup[(c % self.n, d % self.n)]
        except KeyError:
            raise ValueError(f"({c}:{d}) is not a P^1(Z/{self.n}) class") from None

    def act_index(self, idx: int, mat) -> int:
        """Index of x*g for the rep x at idx and a 2x2 integer matrix g."""
        c, d = self.reps[idx]
        a, b, cc, dd = mat
        return self.index(c * a + d * cc, c * b + d * dd)

    def _solve_relations(self):
        sigma = (0, -1, 1, 0)
        tau = (0, -1, 1, -1)
        rows = []
        for i in range(self.nreps):
            row = [Fraction(0)] * self.nreps
            row[i] += 1
            row[self.act_index(i, sigma)] += 1
            rows.append(row)
            row = [Fraction(0)] * self.nreps
            row[i] += 1
            row[self.act_index(i, tau)] += 1
            j = self.act_index(self.act_index(i, tau), tau)
            row[j] += 1
            rows.append(row)
        return kernel_basis(rows, self.nreps)

    @property
    def dimension(self) -> int:
        return len(self.basis)

    # -- cusps / boundary ------------------------------------------------------

    def cusp_classes(self):
        """Representatives of the Gamma_0(N)-classes of cusps hit by the lifts."""
        seen = []
        for g in self.lifts:
            a, b, c, d = g
            for cusp in (
                Fraction(b, d) if d else None,
                Fraction(a, c) if c else None,
            ):
                if not any(cusps_equivalent(self.n, cusp, s) for s in seen):
                    seen.append(cusp)
        return seen

    def eisenstein_dual_basis(self):
        """Span of the boundary pullbacks h -> (x |-> h[g oo] - h[g 0])."""
        classes = self.cusp_classes()

        def class_index(cusp):
            for k, s in enumerate(classes):
                if cusps_equivalent(self.n, cusp, s):
                    return k
            raise AssertionError("cusp escaped classification")

        vecs = []
        for k in range(len(classes)):
            vec = []
            for g in self.lifts:
                a, b, c, d = g
                start = Fraction(b, d) if d else None
                end = Fraction(a, c) if c else None
                vec.append(
                    Fraction(int(class_index(end) == k) - int(class_index(start) == k))
                )
            vecs.append(vec)
        # quotient out the constant-h degeneracy by rref
        red, _ = rref(vecs)
        return [row for row in red if any(t != 0 for t in row)]

    def cuspidal_dimension(self) -> int:
        return self.dimension - len(self.eisenstein_dual_basis())

    # -- path evaluation -------------------------------------------------------

    def value(self, vec, c: int, d: int):
        return vec[self.index(c, d)]

    def _value_inf_to(self, vec, cusp):
        """phi_vec of the path {infinity -> cusp}."""
        if cusp is None:
            return 0 * vec[0]
        f = Fraction(cusp)
        total = 0 * vec[0]
        qprev, sign = 0, -1  # (-1)^(k-1) for k = 0 is -1 applied to q_{-1} = 0
        for p, q in convergents(f.numerator, f.denominator):
            total = total + vec[self.index(q, sign * qprev)]
            qprev = q
            sign = -sign
        return total

    def path_value(self, vec, start, end):
        """phi_vec{start -> end} for cusps (Fraction or None = infinity)."""
        return self._value_inf_to(vec, end) - self._value_inf_to(vec, start)

    # -- operators ---------------------------------------------------------------

    def apply_path_matrices(self, vec, mats):
        """The vector x |-> sum_m phi_vec{ m g_x 0 -> m g_x oo }."""
        out = []
        for g in self.lifts:
            a, b, c, d = g
            start = Fraction(b, d) if d else None
            end = Fraction(a, c) if c else None
            acc = 0 * vec[0]
            for m in mats:
                acc = acc + self.path_value(vec, moebius(m, start), moebius(m, end))
            out.append(acc)
        return out

    def hecke_coset_matrices(self, ell: int):
        mats = [(1, b, 0, ell) for b in range(ell)]
        if self.n % ell != 0:
            mats.append((ell, 0, 0, 1))
        return mats

    def apply_hecke(self, vec, ell: int):
        return self.apply_path_matrices(vec, self.hecke_coset_matrices(ell))

    def apply_involution(self, vec):
        """(iota v)(c:d) = v(-c:d); the real-structure involution on symbols."""
        return [vec[self.index(-c, d)] for (c, d) in self.reps]

    def restrict_to_eigenspace(self, basis, apply_op, eigenvalue):
        """Basis of the subspace where the operator acts by the eigenvalue."""
        if not basis:
            return []
        cols = []
        for v in basis:
            img = apply_op(v)
            cols.append([img[i] - eigenvalue * v[i] for i in range(self.nreps)])
        rows = [[cols[j][i] for j in range(len(basis))] for i in range(self.nreps)]
        combos = kernel_basis(rows, len(basis))
        out = []
        for combo in combos:
            vec = [
                sum(combo[j] * basis[j][i] for j in range(len(basis)))
                for i in range(self.nreps)
            ]
            out.append(vec)
        return out


# ---------------------------------------------------------------------------
# eigensymbols


@dataclass(frozen=True)
class EigenSymbol:
    """Integer-valued dual eigenvector for a rational newform of level N.

    values[i] is the symbol at the i-th P^1 rep; path values follow by the
    continued-fraction decomposition.  content(values) == 1 and the first
    nonzero value is positive (this pins the normalization scalar up to the
    lattice automorphisms +-1, and the scalar is recorded downstream)."""

    space: ModularSymbolSpace
    curve: EllipticCurve
    sign: int
    values: tuple

    def value(self, c: int, d: int) -> int:
        return self.values[self.space.index(c, d)]

    def path_value(self, start, end) -> int:
        return self.space.path_value(self.values, start, end)

    def apply_up(self, p: int):
        return self.space.apply_path_matrices(
            self.values, [(1, b, 0, p) for b in range(p)]
        )


def eigensymbol_for_curve(
    curve: EllipticCurve, sign: int = 1, space: ModularSymbolSpace | None = None
) -> EigenSymbol:
    """The sign-eigencomponent of the dual eigenvector attached to the curve.

    Cuts the eigenspace by exact kernel intersections T_ell = a_ell (a_ell from
    point counting) and the involution; raises if the result is not a line."""
    n = curve.conductor()
    if space is None:
        space = ModularSymbolSpace(n)
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    basis = space.basis
    for ell in prime_sieve(50):
        if n % ell == 0:
            continue
        a_ell = curve.ap(ell)
        basis = space.restrict_to_eigenspace(
            basis, lambda v, e=ell: space.apply_hecke(v, e), Fraction(a_ell)
        )
        if len(basis) <= 2:
            break
    basis = space.restrict_to_eigenspace(
        basis, space.apply_involution, Fraction(sign)
    )
    if len(basis) != 1:
        raise ValueError(
            f"eigenspace for {curve.label or curve.ainvs} sign {sign} has "
            f"dimension {len(basis)}, expected 1"
        )
    vec = basis[0]
    lcm = 1
    for t in vec:
        lcm = lcm * t.denominator // gcd(lcm, t.denominator)
    ints = [int(t * lcm) for t in vec]
    content = 0
    for t in ints:
        content = gcd(content, t)
    ints = [t // content for t in ints]
    first = next(t for t in ints if t != 0)
    if first < 0:
        ints = [-t for t in ints]
    return EigenSymbol(space=space, curve=curve, sign=sign, values=tuple(ints))
