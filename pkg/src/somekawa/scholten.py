"""Genus-2 Scholten spans E_lam <- C -> E_mu and their diagonal points.

Each of the six rows is a curve ``C: y^2 = u (x^2 - r)(x^2 - s)(x^2 - t)``
with maps

    sigma1(x, y) = (u (x^2 - v), u y)                      onto E_lam
    sigma2(x, y) = (u s t (x^2 - r) / x^2, -u r s t y / x^3)  onto E_mu

Row i comes from the Scholten curve C_{a,b,c,d} with the (a, b, c, d) listed
in ``ROW_ABCD``, followed by a translation onto the Legendre model.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .elliptic import INF, CurvePoint, LegendreCurve, is_supersingular_deuring
from .localfield import FieldDesc, LocalElement, LocalFieldError, PrecisionError, hensel_lift, lf_sqrt

__all__ = [
    "DiagonalWitness",
    "SpanDiagnostics",
    "SpanRow",
    "build_spans",
    "diagonal_point",
    "good_span",
    "resultant",
    "sigma_maps",
    "span_diagnostics",
]


class SpanError(LocalFieldError):
    pass


def ROW_ABCD(lam, mu):
    """(a, b, c, d) of the Scholten curve behind each row, as a dict row -> tuple."""
    return {
        1: (1, lam, 1, mu),
        2: (lam, 1, 1, mu),
        3: (-1, lam - 1, 1, mu),
        4: (lam - 1, -1, 1, mu),
        5: (1 - lam, -lam, 1, mu),
        6: (-lam, 1 - lam, 1, mu),
    }


@dataclass(frozen=True, eq=False)
class SpanRow:
    index: int
    lam: LocalElement
    mu: LocalElement
    delta: LocalElement
    u: LocalElement | None
    r: LocalElement
    s: LocalElement
    t: LocalElement
    v: LocalElement

    @property
    def field(self) -> FieldDesc:
        return self.lam.field

    @property
    def usable(self) -> bool:
        """The curve is smooth over K (delta != 0)."""
        return self.u is not None

    @property
    def nondegenerate(self) -> bool:
        return self.usable and self.delta.valuation() == 0

    def F(self, x: LocalElement) -> LocalElement:
        x2 = x * x
        return self.u * (x2 - self.r) * (x2 - self.s) * (x2 - self.t)

    def dF(self, x: LocalElement) -> LocalElement:
        # d/dx of u (X - r)(X - s)(X - t) at X = x^2
        X = x * x
        g = (X - self.s) * (X - self.t) + (X - self.r) * (X - self.t) + (X - self.r) * (X - self.s)
        return 2 * x * self.u * g

    def sextic(self) -> list[LocalElement]:
        """Coefficients of F, low to high."""
        r, s, t, u = self.r, self.s, self.t, self.u
        e1 = r + s + t
        e2 = r * s + r * t + s * t
        e3 = r * s * t
        z = self.field.zero()
        return [-u * e3, z, u * e2, z, -u * e1, z, u]

    def contains(self, P: tuple) -> bool:
        x, y = P
        return (y * y - self.F(x)).is_zero()

    @property
    def curves(self) -> tuple[LegendreCurve, LegendreCurve]:
        return LegendreCurve(self.lam), LegendreCurve(self.mu)

    def to_json(self, diagnostics: SpanDiagnostics | None = None) -> dict:
        out = {
            "row": self.index,
            "u": self.u.to_json() if self.u is not None else None,
            "r": self.r.to_json(),
            "s": self.s.to_json(),
            "t": self.t.to_json(),
            "v": self.v.to_json(),
            "delta_val": _val_json(self.delta),
        }
        if diagnostics is not None:
            out["nondegenerate"] = diagnostics.nondegenerate
            out["squares"] = diagnostics.squares
            out["weierstrass"] = [w.to_json() for w in diagnostics.weierstrass_abscissae]
            out["resultants_match"] = diagnostics.resultants_match
        return out


def _val_json(x: LocalElement):
    # None: zero at the working precision
    return None if x.is_zero() else int(x.valuation())


def build_spans(lam: LocalElement, mu: LocalElement) -> list[SpanRow]:
    """The six rows of spans between E_lam and E_mu."""
    fd = lam.field
    lam, mu = fd(lam), fd(mu)
    one = fd.one()
    lam1 = one - lam
    mu1 = one - mu
    num = lam * lam1
    rows = [
        (mu - lam, mu1 / lam1, one, mu / lam, mu1 / lam1),
        (one - lam * mu, -mu1 / lam1, one / lam, mu, -mu1 / lam1),
        (mu - one + lam, -mu1 / lam, -mu / lam1, -one, -mu / lam1),
        (one - mu + lam * mu, mu1 / lam, -one / lam1, -mu, -one / lam1),
        (lam * mu - mu - lam, mu1, one / lam1, -mu / lam, one / lam1),
        (lam - one - lam * mu, mu - one, mu / lam1, -one / lam, mu / lam1),
    ]
    out = []
    for i, (delta, r, s, t, v) in enumerate(rows, start=1):
        u = None if delta.is_zero() else num / delta
        out.append(SpanRow(i, lam, mu, delta, u, r, s, t, v))
    return out


@dataclass
class SpanDiagnostics:
    nondegenerate: bool
    squares: dict[str, bool]
    weierstrass_abscissae: list[LocalElement]
    resultants: dict[str, LocalElement]
    resultants_match: bool
    reduced_separable: bool | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def weierstrass_points(self) -> list[tuple[LocalElement, LocalElement]]:
        if not self.weierstrass_abscissae:
            return []
        z = self.weierstrass_abscissae[0].field.zero()
        return [(w, z) for w in self.weierstrass_abscissae]


def resultant(f: list, g: list) -> LocalElement:
    """Resultant of two polynomials (coefficients low to high) via the Sylvester matrix."""
    fd = next(c.field for c in list(f) + list(g) if isinstance(c, LocalElement))
    f = [fd(c) for c in f]
    g = [fd(c) for c in g]
    m, n = len(f) - 1, len(g) - 1
    size = m + n
    zero = fd.zero()
    rows = []
    for i in range(n):
        rows.append([zero] * i + f[::-1] + [zero] * (size - m - 1 - i))
    for i in range(m):
        rows.append([zero] * i + g[::-1] + [zero] * (size - n - 1 - i))
    return _det(rows, fd)


def _det(M: list[list[LocalElement]], fd: FieldDesc) -> LocalElement:
    M = [row[:] for row in M]
    n = len(M)
    det = fd.one()
    for col in range(n):
        # pivot of minimal valuation keeps the elimination stable
        best = None
        for r in range(col, n):
            if not M[r][col].is_zero() and (best is None or M[r][col].valuation() < M[best][col].valuation()):
                best = r
        if best is None:
            return fd.zero()
        if best != col:
            M[col], M[best] = M[best], M[col]
            det = -det
        piv = M[col][col]
        det = det * piv
        for r in range(col + 1, n):
            if M[r][col].is_zero():
                continue
            f = M[r][col] / piv
            M[r] = [M[r][k] - f * M[col][k] for k in range(n)]
    return det


def span_diagnostics(row: SpanRow) -> SpanDiagnostics:
    fd = row.field
    squares = {}
    ws = []
    for name in ("r", "s", "t"):
        w = lf_sqrt(getattr(row, name))
        squares[name] = w is not None
        if w is not None:
            ws.extend([w, -w])
    resultants = {}
    match = True
    if row.usable:
        abcd = ROW_ABCD(row.lam, row.mu)[row.index]
        a, b, c, d = (fd(x) for x in abcd)
        quads = {"r": [-(c - d), 0, a - b], "s": [-c, 0, a], "t": [-d, 0, b]}
        if row.index in (3, 6):
            # these rows list s and t in the opposite order to c/a, d/b
            quads["s"], quads["t"] = quads["t"], quads["s"]
        delta2 = row.delta * row.delta
        for p1, p2 in (("r", "s"), ("r", "t"), ("s", "t")):
            res = resultant(quads[p1], quads[p2])
            resultants[p1 + p2] = res
            match = match and (res - delta2).is_zero()
            # normalized factors x^2 - r etc. rescale the resultant by the leading coefficients
            lead = quads[p1][2] * quads[p2][2]
            normalized = resultant([-getattr(row, p1), 0, 1], [-getattr(row, p2), 0, 1])
            match = match and (normalized * lead * lead - delta2).is_zero()
    else:
        match = False
    separable = None
    if row.nondegenerate:
        separable = _reduced_separable(row)
    return SpanDiagnostics(
        nondegenerate=row.nondegenerate,
        squares=squares,
        weierstrass_abscissae=ws,
        resultants=resultants,
        resultants_match=match,
        reduced_separable=separable,
    )


def _reduced_separable(row: SpanRow) -> bool:
    p = row.field.p
    roots2 = [row.r.residue(), row.s.residue(), row.t.residue()]
    return len(set(roots2)) == 3 and 0 not in roots2 and row.u.residue() != 0 and p > 2


# -- the maps ---------------------------------------------------------------


def sigma_maps(row: SpanRow, P: tuple, check: bool = True) -> tuple[CurvePoint, CurvePoint]:
    """Images of a point (x, y) of the span curve on E_lam and E_mu."""
    x, y = P
    if check and not row.contains(P):
        raise SpanError("point is not on the span curve")
    if x.is_zero():
        raise SpanError("sigma2 is undefined at x = 0")
    u = row.u
    x2 = x * x
    p1 = CurvePoint(u * (x2 - row.v), u * y)
    ust = u * row.s * row.t
    p2 = CurvePoint(ust * (x2 - row.r) / x2, -(ust * row.r) * y / (x2 * x))
    return p1, p2


def good_span(lam: LocalElement, mu: LocalElement) -> tuple[SpanRow, LocalElement]:
    """First nondegenerate row with a K-rational Weierstrass point of unit abscissa."""
    fd = lam.field
    for name, x in (("lambda", lam), ("mu", mu)):
        LegendreCurve(x)
        if not is_supersingular_deuring(x.residue(), fd.p):
            raise SpanError(f"precondition: E_{name} is not supersingular")
    for row in build_spans(lam, mu):
        if not row.nondegenerate:
            continue
        for name in ("r", "s", "t"):
            w = lf_sqrt(getattr(row, name))
            if w is not None and w.valuation() == 0:
                return row, w
    raise AssertionError("no good span found for a supersingular pair")


@dataclass
class DiagonalWitness:
    row: SpanRow
    w: LocalElement
    N: int
    x0: LocalElement
    y0: LocalElement
    x0_minus_w_val: int
    depths: tuple
    signature: tuple

    def to_json(self) -> dict:
        return {
            "schema": 1,
            "row": self.row.index,
            "N": self.N,
            "w": self.w.to_json(),
            "x0": self.x0.to_json(),
            "y0": self.y0.to_json(),
            "x0_minus_w_val": self.x0_minus_w_val,
            "depths": list(self.depths),
            "signature": [_sig_json(s) for s in self.signature],
        }


def _sig_json(s):
    return "inf" if s == INF else int(s)


def diagonal_point(row: SpanRow, w: LocalElement, N: int) -> DiagonalWitness:
    """Hensel-lift x0 from w with F(x0) = pi^(2N); P = (x0, pi^N) gives depths (N, N)."""
    if N < 1:
        raise ValueError("N must be positive")
    fd = row.field
    if not row.nondegenerate:
        raise SpanError("row is degenerate")
    if not (w.valuation() == 0 and row.F(w).is_zero()):
        raise SpanError("w is not a unit Weierstrass abscissa")
    need = 2 * N + 8
    if fd.cap < need:
        raise PrecisionError(f"precision too low for N={N}: need at least {(need + fd.e - 1) // fd.e} digits")
    target = fd.pi_power(2 * N)
    coeffs = row.sextic()
    coeffs[0] = coeffs[0] - target
    x0 = hensel_lift(coeffs, w)
    y0 = fd.pi_power(N)
    dv = (x0 - w).valuation()
    if dv != 2 * N:
        raise AssertionError(f"v(x0 - w) = {dv}, expected {2 * N}")
    E1, E2 = row.curves
    P1, P2 = sigma_maps(row, (x0, y0))
    d1 = E1.formal_depth(E1.double(P1))
    d2 = E2.formal_depth(E2.double(P2))
    if (d1, d2) != (N, N):
        raise AssertionError(f"diagonal depths {(d1, d2)} != {(N, N)}")
    e = fd.e
    sig = tuple(d if d <= e else INF for d in (d1, d2))
    return DiagonalWitness(row, w, N, x0, y0, dv, (d1, d2), sig)
