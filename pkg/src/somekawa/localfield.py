"""Truncated arithmetic in Q_p and its totally ramified quadratic extensions.

An element of K = Q_p(pi), pi^2 = c*p, is stored as ``pi^val * (a + b*pi)``
where ``a + b*pi`` is a unit known modulo ``pi^rel`` (capped relative
precision).  For e = 1 we take pi = p and ``b`` is always zero.

Elements whose stored digits all vanish are "effective zeros": they carry an
absolute precision instead of a valuation and never pretend to be exact.
The integer 0 embeds as an exact zero (absolute precision ``inf``).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

__all__ = [
    "AtLeast",
    "FieldDesc",
    "HenselError",
    "LocalElement",
    "LocalFieldError",
    "NotIntegralError",
    "PrecisionError",
    "candidate_count",
    "candidate_digit_vectors",
    "enumerate_candidates",
    "hensel_lift",
    "is_square_residue",
    "lf_sqrt",
    "sqrt_mod_p",
]

DEFAULT_PRECISION = 48


class LocalFieldError(ArithmeticError):
    """Base class for domain errors raised by the arithmetic substrate."""


class PrecisionError(LocalFieldError):
    """Raised when a computation runs out of significant digits."""


class NotIntegralError(LocalFieldError):
    pass


class HenselError(LocalFieldError):
    pass


class AtLeast(int):
    """Lower bound on a valuation, returned for effective zeros."""

    def __repr__(self) -> str:
        return f"AtLeast({int(self)})"

    def __str__(self) -> str:
        return f">={int(self)}"


def check_prime(p: int) -> None:
    if p <= 3 or any(p % d == 0 for d in range(2, math.isqrt(p) + 1)):
        raise ValueError(f"precondition: p must be a prime > 3, got {p}")


def _vp(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of 0")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def is_square_residue(a: int, p: int) -> bool:
    a %= p
    return a == 0 or pow(a, (p - 1) // 2, p) == 1


def sqrt_mod_p(a: int, p: int) -> int | None:
    """Square root of ``a`` modulo an odd prime, smallest of the pair."""
    a %= p
    if a == 0:
        return 0
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        r = pow(a, (p + 1) // 4, p)
    else:
        # Tonelli-Shanks
        q, s = p - 1, 0
        while q % 2 == 0:
            q //= 2
            s += 1
        z = 2
        while pow(z, (p - 1) // 2, p) != p - 1:
            z += 1
        m, cc, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
        while t != 1:
            i, t2 = 0, t
            while t2 != 1:
                t2 = t2 * t2 % p
                i += 1
            b = pow(cc, 1 << (m - i - 1), p)
            m, cc = i, b * b % p
            t, r = t * cc % p, r * b % p
    return min(r, p - r)


@dataclass(frozen=True)
class FieldDesc:
    """Q_p (e = 1) or Q_p(pi) with pi^2 = c*p (e = 2).

    ``precision`` counts p-adic digits per basis coordinate, so elements carry
    up to ``e * precision`` pi-adic digits of relative precision.
    """

    p: int
    e: int = 1
    c: int = 1
    precision: int = DEFAULT_PRECISION
    _pows: tuple = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        p = self.p
        check_prime(p)
        if self.e not in (1, 2):
            raise ValueError("ramification index must be 1 or 2")
        if self.c not in (1, -1):
            raise ValueError("c must be +1 or -1")
        if self.precision < 2:
            raise ValueError("precision must be at least 2")
        object.__setattr__(self, "_pows", tuple(p**k for k in range(self.precision + 3)))

    @property
    def cap(self) -> int:
        """Maximal relative precision, in pi-adic digits."""
        return self.e * self.precision

    @property
    def ext(self) -> str:
        return "+" if self.c == 1 else "-"

    def with_precision(self, precision: int) -> FieldDesc:
        return FieldDesc(self.p, self.e, self.c, precision)

    def describe(self) -> str:
        if self.e == 1:
            return f"Q_{self.p}"
        return f"Q_{self.p}(sqrt({'' if self.c == 1 else '-'}{self.p}))"

    # -- constructors -----------------------------------------------------

    def __call__(self, value) -> LocalElement:
        if isinstance(value, LocalElement):
            if value.field != self:
                raise ValueError("element belongs to a different field")
            return value
        if isinstance(value, int):
            return self._from_fraction(value, 1)
        if isinstance(value, Fraction):
            return self._from_fraction(value.numerator, value.denominator)
        raise TypeError(f"cannot embed {type(value).__name__} into {self.describe()}")

    def zero(self) -> LocalElement:
        return LocalElement(self, math.inf, 0, 0, 0)

    def one(self) -> LocalElement:
        return LocalElement(self, 0, self.cap, 1, 0)

    @property
    def pi(self) -> LocalElement:
        return LocalElement(self, 1, self.cap, 1, 0)

    def pi_power(self, n: int) -> LocalElement:
        return LocalElement(self, n, self.cap, 1, 0)

    def _from_fraction(self, num: int, den: int) -> LocalElement:
        if num == 0:
            return self.zero()
        p = self.p
        v = _vp(num, p) - _vp(den, p)
        num //= p ** _vp(num, p)
        den //= p ** _vp(den, p)
        ma, mb = self._moduli(self.cap)
        a = num * pow(den, -1, ma) % ma
        if self.e == 2 and self.c == -1 and v % 2:
            a = -a % ma  # p^v = (c pi^2)^v
        return LocalElement(self, self.e * v, self.cap, a, 0)

    def from_digits(self, digits: Sequence[int], val: int = 0, rel: int | None = None) -> LocalElement:
        """Element ``sum(d_i * pi^(val + i))``; exact up to the cap unless ``rel`` is given."""
        a, b = self._digits_to_pair(digits)
        if rel is None:
            return self._normalize_exact(a, b, val)
        return _normalize(self, a, b, val, min(rel, self.cap))

    def _digits_to_pair(self, digits: Sequence[int]) -> tuple[int, int]:
        if self.e == 1:
            a = 0
            for d in reversed(digits):
                a = a * self.p + d
            return a, 0
        cp = self.c * self.p
        a = b = 0
        for d in reversed(digits[0::2]):
            a = a * cp + d
        for d in reversed(digits[1::2]):
            b = b * cp + d
        return a, b

    def _normalize_exact(self, a: int, b: int, val: int) -> LocalElement:
        # exact integer pair: shift out the valuation without losing digits
        if a == 0 and b == 0:
            return self.zero()
        p = self.p
        if self.e == 1:
            k = _vp(a, p)
            a //= p**k
            val += k
        else:
            while a % p == 0:
                # (a + b pi) / pi = b + (a / (c p)) pi
                a, b = b, (a // p) * self.c
                val += 1
        ma, mb = self._moduli(self.cap)
        return LocalElement(self, val, self.cap, a % ma, b % mb)

    def _moduli(self, rel: int) -> tuple[int, int]:
        pw = self._pows
        if self.e == 1:
            return pw[rel], 1
        return pw[(rel + 1) // 2], pw[rel // 2]

    def residue_field_lift(self, r: int) -> LocalElement:
        return self(r % self.p)


def _unit_val(fd: FieldDesc, a: int, b: int, rel: int) -> int:
    """pi-adic valuation of a + b*pi reduced to ``rel`` digits (>= rel means zero)."""
    p = fd.p
    if a % p:
        return 0
    if fd.e == 1:
        if a == 0:
            return rel
        return min(_vp(a, p), rel)
    va = 2 * _vp(a, p) if a else rel
    vb = 2 * _vp(b, p) + 1 if b else rel
    return min(va, vb, rel)


def _normalize(fd: FieldDesc, a: int, b: int, val, rel: int) -> LocalElement:
    """Build an element from a pair known modulo pi^rel, relative to pi^val."""
    if rel <= 0:
        return LocalElement(fd, val + max(rel, 0), 0, 0, 0)
    ma, mb = fd._moduli(rel)
    a %= ma
    b %= mb
    k = _unit_val(fd, a, b, rel)
    if k >= rel:
        return LocalElement(fd, val + rel, 0, 0, 0)
    if k:
        p = fd.p
        if fd.e == 1:
            a //= fd._pows[k]
        else:
            h = fd._pows[k // 2]
            a //= h
            b //= h
            if fd.c == -1 and (k // 2) % 2:
                a, b = -a, -b  # pi^k = (c p)^(k/2) pi^(k mod 2)
            if k % 2:
                a, b = b, (a // p) * fd.c
        rel -= k
        val += k
        ma, mb = fd._moduli(rel)
        a %= ma
        b %= mb
    return LocalElement(fd, val, rel, a, b)


class LocalElement:
    """Immutable truncated element of a local field.

    Nonzero: ``val`` is the valuation, ``rel >= 1`` and ``a + b*pi`` is a unit.
    Effective zero: ``rel == 0`` and ``val`` is the absolute precision
    (``math.inf`` for an exact zero).
    """

    __slots__ = ("field", "val", "rel", "a", "b")

    def __init__(self, fd: FieldDesc, val, rel: int, a: int, b: int):
        self.field = fd
        self.val = val
        self.rel = rel
        self.a = a
        self.b = b

    # -- predicates -------------------------------------------------------

    def is_zero(self) -> bool:
        """True when no significant digit survives."""
        return self.rel == 0

    def is_exact_zero(self) -> bool:
        return self.rel == 0 and self.val == math.inf

    def valuation(self):
        if self.rel:
            return self.val
        if self.val == math.inf:
            return math.inf
        return AtLeast(self.val)

    @property
    def precision_abs(self):
        """Absolute pi-adic precision: the element is known modulo pi^this."""
        return self.val + self.rel

    def is_unit(self) -> bool:
        return self.rel > 0 and self.val == 0

    def is_integral(self) -> bool:
        return self.rel == 0 or self.val >= 0

    def residue(self) -> int:
        if self.rel == 0:
            if self.val <= 0:
                raise PrecisionError("residue of an element with no significant digits")
            return 0
        if self.val < 0:
            raise NotIntegralError("not integral")
        if self.val > 0:
            return 0
        return self.a % self.field.p

    def unit_part(self) -> LocalElement:
        if self.rel == 0:
            raise PrecisionError("zero has no unit part")
        return LocalElement(self.field, 0, self.rel, self.a, self.b)

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other) -> LocalElement:
        if isinstance(other, LocalElement):
            if other.field is not self.field and other.field != self.field:
                raise ValueError("elements from different fields")
            return other
        return self.field(other)

    def __add__(self, other) -> LocalElement:
        y = self._coerce(other)
        x = self
        fd = x.field
        if x.rel == 0 or y.rel == 0:
            if x.rel == 0 and y.rel == 0:
                return LocalElement(fd, min(x.val, y.val), 0, 0, 0)
            if x.rel == 0:
                x, y = y, x
            # x nonzero, y effective zero with absolute precision y.val
            if y.val == math.inf:
                return x
            if x.val >= y.val:
                return LocalElement(fd, y.val, 0, 0, 0)
            if x.val + x.rel <= y.val:
                return x
            return _normalize(fd, x.a, x.b, x.val, y.val - x.val)
        if x.val > y.val:
            x, y = y, x
        d = y.val - x.val
        rel = min(x.rel, y.rel + d)
        if rel <= 0:
            return LocalElement(fd, x.val, 0, 0, 0)
        ya, yb = y.a, y.b
        if d:
            if fd.e == 1:
                ya *= fd._pows[d] if d < len(fd._pows) else fd.p**d
            else:
                h = d // 2
                if h:
                    m = (fd.c * fd.p) ** h
                    ya *= m
                    yb *= m
                if d % 2:
                    ya, yb = fd.c * fd.p * yb, ya
        if d == 0:
            return _normalize(fd, x.a + ya, x.b + yb, x.val, rel)
        # a unit plus a non-unit stays a unit
        ma, mb = fd._moduli(rel)
        return LocalElement(fd, x.val, rel, (x.a + ya) % ma, (x.b + yb) % mb)

    __radd__ = __add__

    def __neg__(self) -> LocalElement:
        if self.rel == 0:
            return self
        ma, mb = self.field._moduli(self.rel)
        return LocalElement(self.field, self.val, self.rel, -self.a % ma, -self.b % mb)

    def __sub__(self, other) -> LocalElement:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> LocalElement:
        return self._coerce(other) + (-self)

    def __mul__(self, other) -> LocalElement:
        y = self._coerce(other)
        x = self
        fd = x.field
        if x.rel == 0 or y.rel == 0:
            if x.rel == 0 and y.rel == 0:
                return LocalElement(fd, x.val + y.val, 0, 0, 0)
            z, w = (x, y) if x.rel == 0 else (y, x)
            return LocalElement(fd, z.val + w.val, 0, 0, 0)
        rel = min(x.rel, y.rel)
        ma, mb = fd._moduli(rel)
        if fd.e == 1:
            return LocalElement(fd, x.val + y.val, rel, x.a * y.a % ma, 0)
        a = (x.a * y.a + fd.c * fd.p * x.b * y.b) % ma
        b = (x.a * y.b + x.b * y.a) % mb
        return LocalElement(fd, x.val + y.val, rel, a, b)

    __rmul__ = __mul__

    def inverse(self) -> LocalElement:
        if self.rel == 0:
            raise ZeroDivisionError("division by an element indistinguishable from zero")
        fd = self.field
        ma, mb = fd._moduli(self.rel)
        if fd.e == 1:
            return LocalElement(fd, -self.val, self.rel, pow(self.a, -1, ma), 0)
        a, b = self.a, self.b
        ninv = pow((a * a - fd.c * fd.p * b * b) % ma, -1, ma)
        return LocalElement(fd, -self.val, self.rel, a * ninv % ma, -b * ninv % mb)

    def __truediv__(self, other) -> LocalElement:
        y = self._coerce(other)
        if y.rel == 0:
            raise ZeroDivisionError("division by an element indistinguishable from zero")
        if self.rel == 0:
            return LocalElement(self.field, self.val - y.val, 0, 0, 0)
        return self * y.inverse()

    def __rtruediv__(self, other) -> LocalElement:
        return self._coerce(other) / self

    def __pow__(self, n: int) -> LocalElement:
        if n < 0:
            return self.inverse() ** (-n)
        result = self.field.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        try:
            return (self - other).is_zero()
        except (TypeError, ValueError):
            return NotImplemented

    __hash__ = None  # type: ignore[assignment]

    def truncate(self, rel: int) -> LocalElement:
        """Drop relative precision down to ``rel`` digits."""
        if self.rel == 0 or rel >= self.rel:
            return self
        return _normalize(self.field, self.a, self.b, self.val, rel)

    def change_field(self, fd: FieldDesc) -> LocalElement:
        """Reinterpret the stored digits in ``fd`` (same p, e, c); precision is not invented."""
        if (fd.p, fd.e, fd.c) != (self.field.p, self.field.e, self.field.c):
            raise ValueError("incompatible field")
        if self.rel == 0:
            return LocalElement(fd, self.val, 0, 0, 0)
        return _normalize(fd, self.a, self.b, self.val, min(self.rel, fd.cap))

    # -- digits and rendering -------------------------------------------

    def digits(self, n: int | None = None) -> list[int]:
        """pi-adic digits c_val, c_{val+1}, ... of the stored expansion."""
        if self.rel == 0:
            return []
        fd = self.field
        p = fd.p
        n = self.rel if n is None else min(n, self.rel)
        out = []
        a, b = self.a, self.b
        if fd.e == 1:
            for _ in range(n):
                out.append(a % p)
                a //= p
            return out
        for _ in range(n):
            d = a % p
            out.append(d)
            a = (a - d) // p * fd.c
            a, b = b, a
        return out

    def sqrt(self) -> LocalElement | None:
        return lf_sqrt(self)

    def to_json(self) -> dict:
        if self.rel == 0:
            return {"val": None if self.val == math.inf else int(self.val), "digits": []}
        return {"val": self.val, "digits": self.digits()}

    @classmethod
    def from_json(cls, fd: FieldDesc, obj: dict) -> LocalElement:
        digits = list(obj["digits"])
        val = obj["val"]
        if not digits:
            return fd.zero() if val is None else LocalElement(fd, int(val), 0, 0, 0)
        if any(not 0 <= d < fd.p for d in digits):
            raise ValueError("digit out of range")
        return fd.from_digits(digits, int(val), rel=len(digits))

    def render(self, terms: int = 8) -> str:
        if self.rel == 0:
            return "0" if self.val == math.inf else f"O(pi^{self.val})"
        sym = "pi" if self.field.e == 2 else str(self.field.p)
        parts = []
        for i, d in enumerate(self.digits(terms)):
            if d == 0:
                continue
            k = self.val + i
            if k == 0:
                parts.append(str(d))
            elif k == 1:
                parts.append(f"{d}*{sym}")
            else:
                parts.append(f"{d}*{sym}^{k}")
        parts.append(f"O({sym}^{self.val + min(terms, self.rel)})")
        return " + ".join(parts)

    def __str__(self) -> str:
        return self.render()

    def __repr__(self) -> str:
        return f"LocalElement({self.render()})"


def lf_sqrt(x: LocalElement) -> LocalElement | None:
    """Square root in K, or None when x is not a square.

    x is a square iff its valuation is even and its unit part reduces to a
    quadratic residue.  The returned root has leading digit in [1, (p-1)/2].
    """
    fd = x.field
    if x.rel == 0:
        if x.val == math.inf:
            return x
        return LocalElement(fd, x.val // 2, 0, 0, 0)
    if x.val % 2:
        return None
    p = fd.p
    s0 = sqrt_mod_p(x.a, p)
    if s0 is None:
        return None
    rel = x.rel
    # Newton on the unit part y <- y - (y^2 - u) / (2y), doubling correct digits
    ma, mb = fd._moduli(rel)
    ya, yb = s0, 0
    ua, ub = x.a, x.b
    correct = 1
    cp = fd.c * p
    while correct < rel:
        if fd.e == 1:
            inv2y = pow(2 * ya, -1, ma)
            ya = (ya - (ya * ya - ua) * inv2y) % ma
        else:
            # residual r = y^2 - u
            ra = ya * ya + cp * yb * yb - ua
            rb = 2 * ya * yb - ub
            # 1 / (2y)
            na, nb = 2 * ya, 2 * yb
            ninv = pow((na * na - cp * nb * nb) % ma, -1, ma)
            ia, ib = na * ninv, -nb * ninv
            ya = (ya - (ra * ia + cp * rb * ib)) % ma
            yb = (yb - (ra * ib + rb * ia)) % ma
        correct *= 2
    root = LocalElement(fd, x.val // 2, rel, ya % ma, yb % mb)
    if (root * root - x).rel != 0:
        raise PrecisionError("square root failed to converge")
    return root


def _poly_eval(coeffs: Sequence[LocalElement], x: LocalElement) -> LocalElement:
    acc = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = acc * x + c
    return acc


def hensel_lift(f: Sequence, a0: LocalElement, max_iter: int = 64) -> LocalElement:
    """Newton-refine ``a0`` to a root of the polynomial with coefficients ``f`` (low to high).

    Requires v(f(a0)) > 2 v(f'(a0)).
    """
    fd = a0.field
    coeffs = [fd(c) for c in f]
    if len(coeffs) < 2:
        raise HenselError("Hensel hypothesis fails: constant polynomial")
    deriv = [coeffs[i] * i for i in range(1, len(coeffs))]
    fa = _poly_eval(coeffs, a0)
    if fa.is_zero():
        return a0
    dfa = _poly_eval(deriv, a0)
    if dfa.is_zero() or not fa.valuation() > 2 * dfa.valuation():
        raise HenselError("Hensel hypothesis fails")
    bound = fa.valuation() - dfa.valuation()
    a = a0
    for _ in range(max_iter):
        fa = _poly_eval(coeffs, a)
        if fa.is_zero():
            break
        a = a - fa / _poly_eval(deriv, a)
    else:
        raise PrecisionError("Newton iteration did not converge")
    diff = a - a0
    if not diff.valuation() >= bound:
        raise HenselError("lifted root left the Hensel disc")
    return a


def enumerate_candidates(fd: FieldDesc) -> Iterator[LocalElement]:
    """All truncated Laurent series sum_{i=-e}^{e} c_i pi^i, lexicographic in (c_-e, ..., c_e)."""
    for digits in candidate_digit_vectors(fd):
        yield fd.from_digits(digits, -fd.e)


def candidate_digit_vectors(fd: FieldDesc) -> Iterable[tuple[int, ...]]:
    return itertools.product(range(fd.p), repeat=2 * fd.e + 1)


def candidate_count(fd: FieldDesc) -> int:
    return fd.p ** (2 * fd.e + 1)
