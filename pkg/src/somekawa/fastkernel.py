"""Compiled candidate evaluation for long searches.

Works in O_K / p^M with M as large as int64 products allow.  A candidate
x0 = X0 / pi^s is turned into integral Jacobian triples for sigma1(P) and
sigma2(P), so the hot loop never inverts anything:

    sigma1: (u (X0^2 - v pi^2s), u y', pi^s)
    sigma2: (u s t (X0^2 - r pi^2s), -u r s t y', X0)

with y' = pi^3s y0.  Formal depth is read off as v(X) + v(Z) - v(Y) after
multiplying by the order of the reduction.  Whenever a valuation is not
determined at the working precision the kernel answers UNDECIDED and the
caller falls back to the exact reference path.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

from .elliptic import ReducedCurve
from .localfield import FieldDesc, sqrt_mod_p

__all__ = ["NO_POINT", "UNDECIDED", "FastPair", "available", "decode", "encode", "order_digits"]

NO_POINT = -1
UNDECIDED = -2
_INT_LIMIT = 2**31


def available() -> bool:
    return numba is not None


def encode(sig: tuple, e: int) -> int:
    i, j = (e + 1 if c == float("inf") else c for c in sig)
    return (i - 1) * (e + 1) + (j - 1)


def decode(code: int, e: int) -> tuple:
    i, j = divmod(code, e + 1)
    return tuple(float("inf") if c == e else c + 1 for c in (i, j))


# -- candidate order without materialising the generator ---------------------


def _order_segments(p: int, e: int):
    sizes = [(p - 1) * p ** (e - k) for k in range(-e, e + 1)]
    segs = []  # (first position, first round, rounds, alive class offsets)
    pos, rnd = 1, 0
    for alive in range(2 * e + 1, 0, -1):
        last = sizes[alive - 1]
        if last > rnd:
            segs.append((pos, rnd, last - rnd, alive))
            pos += (last - rnd) * alive
            rnd = last
    return segs


def order_digits(p: int, e: int, start: int, stop: int) -> np.ndarray:
    """Rows start..stop-1 of the candidate order as digit vectors c_-e..c_e."""
    width = 2 * e + 1
    pos = np.arange(start, stop, dtype=np.int64)
    out = np.zeros((len(pos), width), dtype=np.int64)
    segs = _order_segments(p, e)
    for seg_pos, seg_rnd, rounds, alive in segs:
        hi = seg_pos + rounds * alive
        sel = (pos >= seg_pos) & (pos < hi)
        if not sel.any():
            continue
        off = pos[sel] - seg_pos
        rnd = seg_rnd + off // alive
        cls = off % alive  # 0 is valuation -e
        sub = np.zeros((len(off), width), dtype=np.int64)
        for ci in range(alive):
            m = cls == ci
            if not m.any():
                continue
            tail = width - 1 - ci
            j = rnd[m]
            rows = np.zeros((len(j), width), dtype=np.int64)
            rows[:, ci] = 1 + j // p**tail
            rest = j % p**tail
            for col in range(width - 1, ci, -1):
                rows[:, col] = rest % p
                rest //= p
            sub[m] = rows
        out[sel] = sub
    return out


# -- compiled core ------------------------------------------------------------

if numba is not None:
    _jit = numba.njit(cache=True, nogil=True)
else:  # pragma: no cover
    def _jit(f):
        return f


@_jit
def _mul(a1, b1, a2, b2, p, P, c):
    bb = (b1 * b2) % P
    return (a1 * a2 + c * p * bb) % P, ((a1 * b2) % P + (a2 * b1) % P) % P


@_jit
def _vp(a, p, M):
    if a == 0:
        return M
    v = 0
    while a % p == 0:
        a //= p
        v += 1
    return v


@_jit
def _val(a, b, p, M, e, cap):
    if e == 1:
        v = _vp(a, p, M)
    else:
        v = min(2 * _vp(a, p, M), 2 * _vp(b, p, M) + 1)
    return min(v, cap)


@_jit
def _div_pi(a, b, p, P, c, e):
    if e == 1:
        return a // p, 0
    return b, (c * (a // p)) % P


@_jit
def _div_pi_n(a, b, n, p, P, c, e):
    for _ in range(n):
        a, b = _div_pi(a, b, p, P, c, e)
    return a, b


@_jit
def _inv_p(a, p):
    # a^(p-2) mod p
    r, base, k = 1, a % p, p - 2
    while k:
        if k & 1:
            r = r * base % p
        base = base * base % p
        k >>= 1
    return r


@_jit
def _double(X, Y, Z, ash, p, P, c):
    XXa, XXb = _mul(X[0], X[1], X[0], X[1], p, P, c)
    YYa, YYb = _mul(Y[0], Y[1], Y[0], Y[1], p, P, c)
    Y4a, Y4b = _mul(YYa, YYb, YYa, YYb, p, P, c)
    ZZa, ZZb = _mul(Z[0], Z[1], Z[0], Z[1], p, P, c)
    Z4a, Z4b = _mul(ZZa, ZZb, ZZa, ZZb, p, P, c)
    Sa, Sb = _mul(X[0], X[1], YYa, YYb, p, P, c)
    Sa, Sb = 4 * Sa % P, 4 * Sb % P
    Ma, Mb = _mul(ash, 0, Z4a, Z4b, p, P, c)
    Ma, Mb = (3 * XXa + Ma) % P, (3 * XXb + Mb) % P
    X3a, X3b = _mul(Ma, Mb, Ma, Mb, p, P, c)
    X3a, X3b = (X3a - 2 * Sa) % P, (X3b - 2 * Sb) % P
    Ta, Tb = _mul(Ma, Mb, (Sa - X3a) % P, (Sb - X3b) % P, p, P, c)
    Y3a, Y3b = (Ta - 8 * Y4a) % P, (Tb - 8 * Y4b) % P
    Z3a, Z3b = _mul(Y[0], Y[1], Z[0], Z[1], p, P, c)
    return (X3a, X3b), (Y3a, Y3b), (2 * Z3a % P, 2 * Z3b % P)


@_jit
def _add(X1, Y1, Z1, X2, Y2, Z2, p, P, c):
    Z11 = _mul(Z1[0], Z1[1], Z1[0], Z1[1], p, P, c)
    Z22 = _mul(Z2[0], Z2[1], Z2[0], Z2[1], p, P, c)
    U1 = _mul(X1[0], X1[1], Z22[0], Z22[1], p, P, c)
    U2 = _mul(X2[0], X2[1], Z11[0], Z11[1], p, P, c)
    t = _mul(Z2[0], Z2[1], Z22[0], Z22[1], p, P, c)
    S1 = _mul(Y1[0], Y1[1], t[0], t[1], p, P, c)
    t = _mul(Z1[0], Z1[1], Z11[0], Z11[1], p, P, c)
    S2 = _mul(Y2[0], Y2[1], t[0], t[1], p, P, c)
    H = ((U2[0] - U1[0]) % P, (U2[1] - U1[1]) % P)
    R = ((S2[0] - S1[0]) % P, (S2[1] - S1[1]) % P)
    HH = _mul(H[0], H[1], H[0], H[1], p, P, c)
    HHH = _mul(H[0], H[1], HH[0], HH[1], p, P, c)
    V = _mul(U1[0], U1[1], HH[0], HH[1], p, P, c)
    RR = _mul(R[0], R[1], R[0], R[1], p, P, c)
    X3 = ((RR[0] - HHH[0] - 2 * V[0]) % P, (RR[1] - HHH[1] - 2 * V[1]) % P)
    t = _mul(R[0], R[1], (V[0] - X3[0]) % P, (V[1] - X3[1]) % P, p, P, c)
    u = _mul(S1[0], S1[1], HHH[0], HHH[1], p, P, c)
    Y3 = ((t[0] - u[0]) % P, (t[1] - u[1]) % P)
    t = _mul(Z1[0], Z1[1], Z2[0], Z2[1], p, P, c)
    Z3 = _mul(t[0], t[1], H[0], H[1], p, P, c)
    return X3, Y3, Z3


@_jit
def _normalize(X, Y, Z, prec, p, P, M, c, e):
    """Strip a common pi^k from a Jacobian triple; returns ok flag, triple, precision."""
    vX = _val(X[0], X[1], p, M, e, prec)
    vY = _val(Y[0], Y[1], p, M, e, prec)
    vZ = _val(Z[0], Z[1], p, M, e, prec)
    big = 1 << 30
    known = big
    bound = big
    for v, d in ((vZ, 1), (vX, 2), (vY, 3)):
        if v < prec:
            known = min(known, v // d)
        else:
            bound = min(bound, v // d)
    if known == big or known > bound:
        return False, X, Y, Z, prec
    k = known
    if prec - 3 * k <= e + 1:
        return False, X, Y, Z, prec
    if k:
        X = _div_pi_n(X[0], X[1], 2 * k, p, P, c, e)
        Y = _div_pi_n(Y[0], Y[1], 3 * k, p, P, c, e)
        Z = _div_pi_n(Z[0], Z[1], k, p, P, c, e)
    return True, X, Y, Z, prec - 3 * k


@_jit
def _point_code(X, Y, Z, prec, shift, ash, ordtab, p, P, M, c, e):
    """Signature component (1..e, e+1 for infinity) of an integral Jacobian point, or -2."""
    ZZ = _mul(Z[0], Z[1], Z[0], Z[1], p, P, c)
    t = _mul(shift, 0, ZZ[0], ZZ[1], p, P, c)
    X = ((X[0] + t[0]) % P, (X[1] + t[1]) % P)
    ok, X, Y, Z, prec = _normalize(X, Y, Z, prec, p, P, M, c, e)
    if not ok:
        return -2
    vZ = _val(Z[0], Z[1], p, M, e, prec)
    if vZ == 0:
        zi = _inv_p(Z[0] % p, p)
        xr = X[0] % p * zi % p * zi % p
        yr = Y[0] % p * zi % p * zi % p * zi % p
        m = ordtab[xr * p + yr]
        if m <= 1:
            return -2
        # left-to-right double-and-add
        top = 0
        while (m >> (top + 1)) > 0:
            top += 1
        QX, QY, QZ = X, Y, Z
        for bit in range(top - 1, -1, -1):
            QX, QY, QZ = _double(QX, QY, QZ, ash, p, P, c)
            if (m >> bit) & 1:
                QX, QY, QZ = _add(QX, QY, QZ, X, Y, Z, p, P, c)
        ok, X, Y, Z, prec = _normalize(QX, QY, QZ, prec, p, P, M, c, e)
        if not ok:
            return -2
        vZ = _val(Z[0], Z[1], p, M, e, prec)
        if vZ == 0:
            return -2
    if _val(X[0], X[1], p, M, e, prec) != 0 or _val(Y[0], Y[1], p, M, e, prec) != 0:
        return -2
    if vZ > e:
        return e + 1
    return vZ


@_jit
def _evaluate(digits, out, p, P, M, c, e, pipow, sqrt_tab, gcoef, rows_c, curves, ordtabs):
    N = e * M
    nrows = gcoef.shape[0]
    width = 2 * e + 1
    inv2 = (P + 1) // 2
    for idx in range(digits.shape[0]):
        first = -1
        for i in range(width):
            if digits[idx, i] != 0:
                first = i
                break
        if first < 0:
            for r in range(nrows):
                out[idx, r] = -1
            continue
        s = max(0, e - first)  # x0 = X0 / pi^s with X0 integral
        Xa, Xb = 0, 0
        for i in range(first, width):
            d = digits[idx, i]
            if d:
                k = i - e + s
                Xa = (Xa + d * pipow[k, 0]) % P
                Xb = (Xb + d * pipow[k, 1]) % P
        X2a, X2b = _mul(Xa, Xb, Xa, Xb, p, P, c)
        for r in range(nrows):
            # G(X0) = pi^6s F(x0), Horner in X0^2
            ga, gb = gcoef[r, s, 3, 0], gcoef[r, s, 3, 1]
            for j in range(2, -1, -1):
                ga, gb = _mul(ga, gb, X2a, X2b, p, P, c)
                ga, gb = (ga + gcoef[r, s, j, 0]) % P, (gb + gcoef[r, s, j, 1]) % P
            vG = _val(ga, gb, p, M, e, N)
            if vG >= N:
                out[idx, r] = -2
                continue
            if vG % 2 == 1:
                out[idx, r] = -1
                continue
            wa, wb = _div_pi_n(ga, gb, vG, p, P, c, e)
            if N - vG < e + 2:
                out[idx, r] = -2
                continue
            root = sqrt_tab[wa % p]
            if root < 0:
                out[idx, r] = -1
                continue
            za, zb = _inv_p(root, p), 0
            for _ in range(7):  # inverse square root, precision doubles each step
                ta, tb = _mul(za, zb, za, zb, p, P, c)
                ta, tb = _mul(ta, tb, wa, wb, p, P, c)
                ta, tb = (3 - ta) % P, (-tb) % P
                za, zb = _mul(za, zb, ta, tb, p, P, c)
                za, zb = za * inv2 % P, zb * inv2 % P
            ya, yb = _mul(wa, wb, za, zb, p, P, c)
            h = vG // 2
            ya, yb = _mul(ya, yb, pipow[h, 0], pipow[h, 1], p, P, c)
            prec = N - h
            # sigma1 onto E_lam
            ta, tb = (X2a - rows_c[r, s, 1, 0]) % P, (X2b - rows_c[r, s, 1, 1]) % P
            A1 = _mul(rows_c[r, 0, 0, 0], rows_c[r, 0, 0, 1], ta, tb, p, P, c)
            B1 = _mul(rows_c[r, 0, 0, 0], rows_c[r, 0, 0, 1], ya, yb, p, P, c)
            Z1 = (pipow[s, 0], pipow[s, 1])
            c1 = _point_code(A1, B1, Z1, prec, curves[0, 0], curves[0, 1], ordtabs[0], p, P, M, c, e)
            if c1 == -2:
                out[idx, r] = -2
                continue
            # sigma2 onto E_mu
            ta, tb = (X2a - rows_c[r, s, 2, 0]) % P, (X2b - rows_c[r, s, 2, 1]) % P
            A2 = _mul(rows_c[r, 0, 3, 0], rows_c[r, 0, 3, 1], ta, tb, p, P, c)
            B2 = _mul(rows_c[r, 0, 4, 0], rows_c[r, 0, 4, 1], ya, yb, p, P, c)
            c2 = _point_code(A2, B2, (Xa, Xb), prec, curves[1, 0], curves[1, 1], ordtabs[1], p, P, M, c, e)
            if c2 == -2:
                out[idx, r] = -2
                continue
            out[idx, r] = (c1 - 1) * (e + 1) + (c2 - 1)


# -- host side -----------------------------------------------------------------


def _working_digits(p: int) -> int:
    M = 1
    while p ** (M + 1) < _INT_LIMIT:
        M += 1
    return M


def _frac_mod(q: Fraction, P: int) -> int:
    return q.numerator * pow(q.denominator, -1, P) % P


def _row_constants(lam: int, mu: int):
    """(delta, u, r, s, t, v) for every row as exact fractions (None when delta = 0)."""
    lam, mu = Fraction(lam), Fraction(mu)
    lam1, mu1 = 1 - lam, 1 - mu
    table = [
        (mu - lam, mu1 / lam1, Fraction(1), mu / lam, mu1 / lam1),
        (1 - lam * mu, -mu1 / lam1, 1 / lam, mu, -mu1 / lam1),
        (mu - 1 + lam, -mu1 / lam, -mu / lam1, Fraction(-1), -mu / lam1),
        (1 - mu + lam * mu, mu1 / lam, -1 / lam1, -mu, -1 / lam1),
        (lam * mu - mu - lam, mu1, 1 / lam1, -mu / lam, 1 / lam1),
        (lam - 1 - lam * mu, mu - 1, mu / lam1, -1 / lam, mu / lam1),
    ]
    out = {}
    for i, (delta, r, s, t, v) in enumerate(table, start=1):
        u = None if delta == 0 else lam * lam1 / delta
        out[i] = (delta, u, r, s, t, v)
    return out


class FastPair:
    """Compiled evaluator for one (lam, mu) over a fixed field and row list."""

    def __init__(self, lam: int, mu: int, fd: FieldDesc, rows: list[int]):
        if numba is None:
            raise RuntimeError("numba is required for the compiled search engine")
        p, e, c = fd.p, fd.e, fd.c
        self.p, self.e, self.c = p, e, c
        self.M = M = _working_digits(p)
        self.P = P = p**M
        self.rows = list(rows)
        consts = _row_constants(lam, mu)
        npow = 2 * e * M + 2
        pipow = np.zeros((npow, 2), dtype=np.int64)
        for k in range(npow):
            if e == 1:
                pipow[k] = (pow(p, k, P), 0)
            elif k % 2 == 0:
                pipow[k] = (pow(c * p, k // 2, P), 0)
            else:
                pipow[k] = (0, pow(c * p, k // 2, P))
        self.pipow = pipow
        sq = np.full(p, -1, dtype=np.int64)
        for a in range(1, p):
            r = sqrt_mod_p(a, p)
            if r is not None:
                sq[a] = r
        self.sqrt_tab = sq
        n = len(self.rows)
        gcoef = np.zeros((n, e + 1, 4, 2), dtype=np.int64)
        rows_c = np.zeros((n, e + 1, 5, 2), dtype=np.int64)
        for ri, idx in enumerate(self.rows):
            _, u, r, s, t, v = consts[idx]
            if u is None:
                raise ValueError(f"row {idx} is singular")
            e1, e2, e3 = r + s + t, r * s + r * t + s * t, r * s * t
            f = [-u * e3, u * e2, -u * e1, u]  # coefficients of X^0, X^2, X^4, X^6
            for sc in range(e + 1):
                for j in range(4):
                    # pi^(sc (6 - 2j)) f_j
                    g = _mul_py(_frac_mod(f[j], P), 0, *pipow[sc * (6 - 2 * j)], p, P, c)
                    gcoef[ri, sc, j] = g
                rows_c[ri, sc, 1] = _mul_py(_frac_mod(v, P), 0, *pipow[2 * sc], p, P, c)
                rows_c[ri, sc, 2] = _mul_py(_frac_mod(r, P), 0, *pipow[2 * sc], p, P, c)
            rows_c[ri, 0, 0] = (_frac_mod(u, P), 0)
            rows_c[ri, 0, 3] = (_frac_mod(u * s * t, P), 0)
            rows_c[ri, 0, 4] = (_frac_mod(-u * r * s * t, P), 0)
        self.gcoef, self.rows_c = gcoef, rows_c
        curves = np.zeros((2, 2), dtype=np.int64)
        ordtabs = np.zeros((2, p * p), dtype=np.int64)
        for k, L in enumerate((lam, mu)):
            a2, a4 = Fraction(-(1 + L)), Fraction(L)
            shift = a2 / 3
            curves[k] = (_frac_mod(shift, P), _frac_mod(a4 - a2 * a2 / 3, P))
            sp = _frac_mod(shift, p)
            for pt, m in ReducedCurve(L % p, p).order_table().items():
                if pt is not None:
                    ordtabs[k, (pt[0] + sp) % p * p + pt[1]] = m
        self.curves, self.ordtabs = curves, ordtabs

    def evaluate(self, digits: np.ndarray) -> np.ndarray:
        """Codes per (candidate, row): a signature code, NO_POINT or UNDECIDED."""
        digits = np.ascontiguousarray(digits, dtype=np.int64)
        out = np.empty((digits.shape[0], len(self.rows)), dtype=np.int64)
        _evaluate(
            digits, out, self.p, self.P, self.M, self.c, self.e, self.pipow, self.sqrt_tab,
            self.gcoef, self.rows_c, self.curves, self.ordtabs,
        )
        return out


def _mul_py(a1, b1, a2, b2, p, P, c):
    a1, b1, a2, b2 = int(a1), int(b1), int(a2), int(b2)
    return (a1 * a2 + c * p * b1 * b2) % P, (a1 * b2 + a2 * b1) % P
