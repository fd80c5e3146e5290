"""Legendre-form elliptic curves over local fields and over F_p.

Points are affine pairs of :class:`LocalElement` or the point at infinity.
Depth in the formal group is read directly off valuations: a point in the
kernel of reduction with ``v(x) = -2n`` lies in E^(m^n) minus E^(m^(n+1)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from math import comb

from .localfield import FieldDesc, LocalElement, LocalFieldError, PrecisionError, check_prime, lf_sqrt, sqrt_mod_p

__all__ = [
    "INF",
    "BadReductionError",
    "CurvePoint",
    "LegendreCurve",
    "NotFormalError",
    "ReducedCurve",
    "curve_new",
    "is_supersingular_deuring",
    "legendre_from_roots",
    "reduced_orders",
    "supersingular_lambdas",
]

INF = math.inf
NAIVE_COUNT_BOUND = 10_000

# results closer than this many pi-digits to the precision horizon are recomputed
HORIZON_SLACK = 4


class BadReductionError(LocalFieldError):
    pass


class NotFormalError(LocalFieldError):
    pass


@dataclass(frozen=True, eq=False)
class CurvePoint:
    x: LocalElement | None = None
    y: LocalElement | None = None

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def to_json(self) -> dict:
        if self.x is None:
            return {"inf": True, "x": None, "y": None}
        return {"inf": False, "x": self.x.to_json(), "y": self.y.to_json()}

    @classmethod
    def from_json(cls, fd: FieldDesc, obj: dict) -> CurvePoint:
        if obj["inf"]:
            return cls()
        return cls(LocalElement.from_json(fd, obj["x"]), LocalElement.from_json(fd, obj["y"]))

    def __repr__(self) -> str:
        if self.x is None:
            return "O"
        return f"({self.x}, {self.y})"


O = CurvePoint()


class LegendreCurve:
    """y^2 = x(x - 1)(x - lam) with good reduction."""

    def __init__(self, lam: LocalElement, fd: FieldDesc | None = None):
        fd = fd or lam.field
        lam = fd(lam)
        if lam.is_zero() or lam.valuation() != 0:
            raise BadReductionError("bad reduction parameter: v(lambda) != 0")
        if (1 - lam).is_zero() or (1 - lam).valuation() != 0:
            raise BadReductionError("bad reduction parameter: v(1 - lambda) != 0")
        self.field = fd
        self.lam = lam
        self._a2 = -(lam + 1)

    def __repr__(self) -> str:
        return f"LegendreCurve(lambda={self.lam.render(4)} over {self.field.describe()})"

    # -- curve data -------------------------------------------------------

    def rhs(self, x: LocalElement) -> LocalElement:
        return x * (x - 1) * (x - self.lam)

    def contains(self, P: CurvePoint) -> bool:
        if P.is_infinity:
            return True
        return (P.y * P.y - self.rhs(P.x)).is_zero()

    def two_torsion(self) -> list[CurvePoint]:
        z = self.field.zero()
        return [O, CurvePoint(z, z), CurvePoint(self.field.one(), z), CurvePoint(self.lam, z)]

    def lift_x(self, x: LocalElement) -> CurvePoint | None:
        y = lf_sqrt(self.rhs(x))
        return None if y is None else CurvePoint(x, y)

    def j_invariant(self) -> LocalElement:
        lam = self.lam
        return 256 * (lam * lam - lam + 1) ** 3 / (lam * lam * (1 - lam) ** 2)

    @property
    def reduction(self) -> ReducedCurve:
        return ReducedCurve(self.lam.residue(), self.field.p)

    # -- group law --------------------------------------------------------

    def neg(self, P: CurvePoint) -> CurvePoint:
        if P.is_infinity:
            return P
        return CurvePoint(P.x, -P.y)

    def add(self, P: CurvePoint, Q: CurvePoint) -> CurvePoint:
        if P.is_infinity:
            return Q
        if Q.is_infinity:
            return P
        dx = Q.x - P.x
        if dx.is_zero():
            if (P.y + Q.y).is_zero():
                return O
            if (P.y - Q.y).is_zero():
                return self.double(P)
            raise PrecisionError("x-coordinates agree but points are neither equal nor opposite")
        s = (Q.y - P.y) / dx
        x3 = s * s - self._a2 - P.x - Q.x
        y3 = s * (P.x - x3) - P.y
        return CurvePoint(x3, y3)

    def double(self, P: CurvePoint) -> CurvePoint:
        if P.is_infinity or P.y.is_zero():
            return O
        x = P.x
        s = (3 * x * x + 2 * self._a2 * x + self.lam) / (2 * P.y)
        x3 = s * s - self._a2 - 2 * x
        y3 = s * (x - x3) - P.y
        return CurvePoint(x3, y3)

    def sub(self, P: CurvePoint, Q: CurvePoint) -> CurvePoint:
        return self.add(P, self.neg(Q))

    def mul(self, m: int, P: CurvePoint) -> CurvePoint:
        if m < 0:
            return self.mul(-m, self.neg(P))
        result = O
        for bit in bin(m)[2:]:
            result = self.double(result)
            if bit == "1":
                result = self.add(result, P)
        return result

    # -- reduction and the formal group ------------------------------------

    def reduce_point(self, P: CurvePoint):
        if P.is_infinity:
            return None
        if P.x.valuation() < 0:
            return None
        return (P.x.residue(), P.y.residue())

    def formal_depth(self, P: CurvePoint):
        """v(-x/y) for a point in the kernel of reduction; INF for O."""
        if P.is_infinity:
            return INF
        vx = P.x.valuation()
        if not vx < 0:
            raise NotFormalError("not in formal group: point has nonzero reduction")
        vy = P.y.valuation()
        n = vx - vy
        if vx != -2 * n or vy != -3 * n:
            raise PrecisionError(f"inconsistent formal valuations v(x)={vx}, v(y)={vy}")
        return n

    def reduced_point_order(self, P: CurvePoint) -> int:
        Pbar = self.reduce_point(P)
        return self.reduction.point_order(Pbar)

    def associated_formal_point(self, P: CurvePoint) -> CurvePoint:
        """m_P * P with m_P the order of the reduction of P."""
        red = self.reduction
        if red.order() % self.field.p == 0:
            raise BadReductionError("reduction has p-torsion: curve is not supersingular")
        return self.mul(red.point_order(self.reduce_point(P)), P)

    def signature_class(self, P: CurvePoint):
        """Formal depth of the associated formal point, capped: d if d <= e else INF."""
        e = self.field.e
        if not e < self.field.p - 1:
            raise ValueError("signature needs e < p - 1")
        Q = self.associated_formal_point(P)
        d = self.formal_depth(Q)
        if d is not INF and Q.x.rel < HORIZON_SLACK:
            raise PrecisionError("signature too close to the precision horizon")
        return d if d <= e else INF

    def change_field(self, fd: FieldDesc) -> LegendreCurve:
        return LegendreCurve(self.lam.change_field(fd), fd)

    def to_json(self) -> dict:
        fd = self.field
        return {"p": fd.p, "e": fd.e, "c": fd.c, "lambda": self.lam.to_json()}


def curve_new(lam, fd: FieldDesc) -> LegendreCurve:
    return LegendreCurve(fd(lam), fd)


def legendre_from_roots(e1: LocalElement, e2: LocalElement, e3: LocalElement) -> LegendreCurve:
    """Legendre model of y^2 = (x - e1)(x - e2)(x - e3) over K with p = 3 mod 4."""
    for d in (e1 - e2, e1 - e3, e2 - e3):
        if d.is_zero() or d.valuation() != 0:
            raise BadReductionError("not good reduction: root differences must be units")
    d12 = e1 - e2
    if lf_sqrt(d12) is not None:
        lam = (e3 - e2) / d12
    else:
        lam = (e3 - e1) / (e2 - e1)
    return LegendreCurve(lam, e1.field)


# -- curves over F_p -------------------------------------------------------


@dataclass(frozen=True)
class ReducedCurve:
    """y^2 = x(x - 1)(x - lam) over F_p; points are (x, y) tuples or None."""

    lam: int
    p: int

    def __post_init__(self):
        if self.lam % self.p in (0, 1):
            raise BadReductionError("singular reduction")

    def rhs(self, x: int) -> int:
        return x * (x - 1) * (x - self.lam) % self.p

    def contains(self, P) -> bool:
        return P is None or (P[1] * P[1] - self.rhs(P[0])) % self.p == 0

    def add(self, P, Q):
        if P is None:
            return Q
        if Q is None:
            return P
        p = self.p
        x1, y1 = P
        x2, y2 = Q
        if x1 == x2:
            if (y1 + y2) % p == 0:
                return None
            s = (3 * x1 * x1 - 2 * (1 + self.lam) * x1 + self.lam) * pow(2 * y1, -1, p) % p
        else:
            s = (y2 - y1) * pow(x2 - x1, -1, p) % p
        x3 = (s * s + 1 + self.lam - x1 - x2) % p
        return (x3, (s * (x1 - x3) - y1) % p)

    def mul(self, m: int, P):
        result = None
        for bit in bin(m)[2:]:
            result = self.add(result, result)
            if bit == "1":
                result = self.add(result, P)
        return result

    def points(self) -> list:
        p = self.p
        pts = [None]
        for x in range(p):
            f = self.rhs(x)
            if f == 0:
                pts.append((x, 0))
            elif pow(f, (p - 1) // 2, p) == 1:
                y = sqrt_mod_p(f, p)
                pts.extend([(x, min(y, p - y)), (x, max(y, p - y))])
        return pts

    def order(self) -> int:
        return _group_order(self.lam, self.p)

    def point_order(self, P) -> int:
        n = self.order()
        for d in _divisors(n):
            if self.mul(d, P) is None:
                return d
        raise AssertionError("point order must divide the group order")

    def order_table(self) -> dict:
        return _order_table(self.lam, self.p)


def _divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


@lru_cache(maxsize=None)
def _group_order(lam: int, p: int) -> int:
    if p > NAIVE_COUNT_BOUND:
        raise ValueError(f"naive point counting limited to p <= {NAIVE_COUNT_BOUND}")
    total = 1
    for x in range(p):
        f = x * (x - 1) * (x - lam) % p
        total += 1 if f == 0 else (2 if pow(f, (p - 1) // 2, p) == 1 else 0)
    return total


@lru_cache(maxsize=None)
def _order_table(lam: int, p: int) -> dict:
    E = ReducedCurve(lam, p)
    return {P: E.point_order(P) for P in E.points()}


def reduced_orders(E: ReducedCurve, P) -> tuple[int, int]:
    return E.order(), E.point_order(P)


def is_supersingular_deuring(lam: int, p: int) -> bool:
    """Coefficient of x^(p-1) in (x(x-1)(x-lam))^((p-1)/2) over F_p vanishes."""
    lam %= p
    if lam in (0, 1):
        raise ValueError("lambda must not reduce to 0 or 1")
    f = [0, lam, (-1 - lam) % p, 1]  # x^3 - (1+lam) x^2 + lam x, low to high
    result = [1]
    base = f
    n = (p - 1) // 2
    while n:
        if n & 1:
            result = _polymul_trunc(result, base, p)
        n >>= 1
        if n:
            base = _polymul_trunc(base, base, p)
    return len(result) < p or result[p - 1] == 0


def _polymul_trunc(f: list[int], g: list[int], p: int) -> list[int]:
    # product mod (p, x^p): only coefficients up to x^(p-1) matter
    out = [0] * min(len(f) + len(g) - 1, p)
    for i, a in enumerate(f):
        if a:
            for j in range(min(len(g), p - i)):
                out[i + j] = (out[i + j] + a * g[j]) % p
    return out


def hasse_polynomial(p: int) -> list[int]:
    m = (p - 1) // 2
    return [comb(m, i) ** 2 % p for i in range(m + 1)]


@lru_cache(maxsize=None)
def _supersingular(p: int) -> tuple[int, ...]:
    H = hasse_polynomial(p)
    roots = []
    for t in range(p):
        acc = 0
        for c in reversed(H):
            acc = (acc * t + c) % p
        if acc == 0:
            roots.append(t)
    return tuple(roots)


def supersingular_lambdas(p: int) -> list[int]:
    """Roots in F_p of H_p(T) = sum C(m, i)^2 T^i, m = (p - 1)/2."""
    check_prime(p)
    return list(_supersingular(p))
