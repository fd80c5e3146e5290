import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from somekawa.localfield import (
    AtLeast,
    FieldDesc,
    HenselError,
    NotIntegralError,
    candidate_count,
    enumerate_candidates,
    hensel_lift,
    lf_sqrt,
    sqrt_mod_p,
)

fractions = st.fractions(min_value=-(10**9), max_value=10**9, max_denominator=10**6)
nonzero = fractions.filter(lambda q: q != 0)


def vp_fraction(q: Fraction, p: int) -> int:
    v, n, d = 0, q.numerator, q.denominator
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v


def random_unit(fd, rng):
    digits = [rng.randrange(1, fd.p)] + [rng.randrange(fd.p) for _ in range(fd.cap - 1)]
    return fd.from_digits(digits)


# -- construction -------------------------------------------------------------


def test_field_validation():
    for bad in (2, 3, 9, 15):
        with pytest.raises(ValueError):
            FieldDesc(bad)
    with pytest.raises(ValueError):
        FieldDesc(7, e=3)
    with pytest.raises(ValueError):
        FieldDesc(7, 2, c=2)


def test_uniformizer_squares_to_plus_or_minus_p():
    for c in (1, -1):
        fd = FieldDesc(11, 2, c)
        assert fd.pi * fd.pi == fd(c * 11)
        assert fd.pi.valuation() == 1
        assert fd(11).valuation() == 2


def test_pi_power_signs_for_minus_p():
    # p = c pi^2, so 1/p^2 has unit part c^2 = 1 and p^3 has unit part c
    fd = FieldDesc(7, 2, -1)
    assert fd(7**3) == -fd.pi_power(6)
    assert fd(Fraction(1, 49)) == fd.pi_power(-4)
    assert fd(Fraction(1, 7)) == -fd.pi_power(-2)


@given(nonzero)
def test_valuation_and_residue_match_rational_oracle(q):
    for fd in (FieldDesc(7), FieldDesc(7, 2, 1), FieldDesc(7, 2, -1)):
        x = fd(q)
        v = vp_fraction(q, 7)
        assert x.valuation() == fd.e * v
        w = q / Fraction(7) ** v
        expected = w.numerator * pow(w.denominator, -1, 7) % 7
        if fd.e == 2 and fd.c == -1 and v % 2:
            expected = -expected % 7
        assert x.unit_part().residue() == expected


@given(fractions, fractions)
def test_embedding_is_a_ring_homomorphism(a, b):
    for fd in (FieldDesc(7), FieldDesc(7, 2, -1), FieldDesc(11, 2, 1)):
        x, y = fd(a), fd(b)
        assert x + y == fd(a + b)
        assert x - y == fd(a - b)
        assert x * y == fd(a * b)
        if b != 0:
            assert x / y == fd(a / b)


@given(nonzero, nonzero)
def test_ultrametric_inequality(a, b):
    for fd in (FieldDesc(7), FieldDesc(7, 2, 1)):
        x, y = fd(a), fd(b)
        s = x + y
        vx, vy = x.valuation(), y.valuation()
        if vx != vy:
            assert s.valuation() == min(vx, vy)
        elif not s.is_zero():
            assert s.valuation() >= vx
        assert (x * y).valuation() == vx + vy


def test_exact_zero_and_effective_zero():
    fd = FieldDesc(7, 2, 1, precision=8)
    z = fd.zero()
    assert z.is_exact_zero() and z.valuation() == math.inf
    x = fd(Fraction(3, 5))
    d = x - x
    assert d.is_zero() and not d.is_exact_zero()
    assert isinstance(d.valuation(), AtLeast)
    assert str(d.valuation()).startswith(">=")


def test_precision_is_capped_and_tracked():
    fd = FieldDesc(7, 2, 1, precision=5)
    assert fd.cap == 10
    x = fd.one() + fd.pi_power(12)
    assert x == fd.one()
    y = fd.pi_power(3) * fd(Fraction(2, 3))
    assert y.precision_abs == 3 + fd.cap


def test_inverse_and_powers(fd):
    rng = random.Random(1)
    for _ in range(20):
        u = random_unit(fd, rng) * fd.pi_power(rng.randrange(-3, 4))
        assert u * u.inverse() == fd.one()
        assert u**3 == u * u * u
        assert u**-2 == (u * u).inverse()


def test_residue_of_non_integral_raises():
    fd = FieldDesc(7, 2, 1)
    with pytest.raises(NotIntegralError):
        fd.pi_power(-1).residue()


# -- digits and serialisation --------------------------------------------------


def test_digit_round_trip(fd):
    rng = random.Random(2)
    for _ in range(30):
        x = random_unit(fd, rng) * fd.pi_power(rng.randrange(-4, 5))
        back = fd.from_digits(x.digits(), x.val, rel=x.rel)
        assert back == x and back.rel == x.rel
        assert type(x).from_json(fd, x.to_json()) == x


def test_digits_of_small_integers():
    fd = FieldDesc(7, 2, 1)
    # 10 = 3 + 7 = 3 + pi^2
    assert fd(10).digits(4) == [3, 0, 1, 0]
    assert FieldDesc(7)(10).digits(3) == [3, 1, 0]
    assert fd.from_digits([2, 0, 5], -1) == 2 * fd.pi_power(-1) + 5 * fd.pi


def test_json_zero():
    fd = FieldDesc(7, 2, 1)
    assert fd.zero().to_json() == {"val": None, "digits": []}
    assert type(fd.zero()).from_json(fd, {"val": None, "digits": []}).is_exact_zero()


def test_render():
    fd = FieldDesc(7, 2, 1)
    assert fd(10).render(3) == "3 + 1*pi^2 + O(pi^3)"
    assert FieldDesc(7)(10).render(2) == "3 + 1*7 + O(7^2)"


# -- square roots ----------------------------------------------------------------


def test_sqrt_mod_p_returns_small_root():
    for p in (7, 11, 23, 71):
        for a in range(1, p):
            r = sqrt_mod_p(a, p)
            if r is None:
                assert pow(a, (p - 1) // 2, p) == p - 1
            else:
                assert r * r % p == a and 1 <= r <= (p - 1) // 2


def test_sqrt_soundness_and_completeness(fd):
    rng = random.Random(3)
    half = (fd.p - 1) // 2
    for _ in range(40):
        u = random_unit(fd, rng)
        r = lf_sqrt(u)
        if pow(u.residue(), half, fd.p) == 1:
            assert r is not None and r * r == u
            assert 1 <= r.residue() <= half
        else:
            assert r is None
        v = random_unit(fd, rng) * fd.pi_power(rng.randrange(-2, 3))
        s = lf_sqrt(v * v)
        assert s is not None and (s == v or s == -v)


def test_odd_valuation_is_never_a_square():
    fd = FieldDesc(11, 2, -1)
    assert lf_sqrt(fd.pi) is None
    assert lf_sqrt(fd.pi_power(-3) * 4) is None


def test_four_square_classes_in_ramified_quadratic_field():
    fd = FieldDesc(7, 2, 1, precision=12)
    rng = random.Random(4)
    elems = [random_unit(fd, rng) * fd.pi_power(rng.randrange(-2, 3)) for _ in range(24)]

    def cls(x):
        return (x.valuation() % 2, pow(x.unit_part().residue(), 3, 7) == 1)

    assert len({cls(x) for x in elems}) == 4
    for x, y in itertools.combinations(elems[:12], 2):
        assert (lf_sqrt(x * y) is not None) == (cls(x) == cls(y))


# -- Hensel -------------------------------------------------------------------------


def test_hensel_lifts_a_simple_root():
    fd = FieldDesc(7)
    r = hensel_lift([-2, 0, 1], fd(3))
    assert r * r == fd(2)
    assert (r - fd(3)).valuation() >= 1


def test_hensel_in_ramified_field():
    fd = FieldDesc(7, 2, -1)
    # x^3 - x - pi has a root near 0
    r = hensel_lift([-fd.pi, -1, 0, 1], fd.zero())
    assert (r**3 - r - fd.pi).is_zero()
    assert r.valuation() == 1


def test_hensel_refuses_bad_start():
    fd = FieldDesc(7)
    with pytest.raises(HenselError):
        hensel_lift([-2, 0, 1], fd(1))


@given(st.integers(1, 6), st.integers(0, 6))
def test_hensel_root_of_unity_oracle(a, b):
    # Teichmuller lift: roots of x^6 - 1 in Z_7, one per nonzero residue
    fd = FieldDesc(7, precision=20)
    r = hensel_lift([-1, 0, 0, 0, 0, 0, 1], fd(a + 7 * b))
    assert r**6 == fd.one() and r.residue() == a


# -- candidate set ----------------------------------------------------------------


def test_candidate_enumeration():
    fd = FieldDesc(7, 2, 1, precision=6)
    assert candidate_count(fd) == 7**5
    first = list(itertools.islice(enumerate_candidates(fd), 3))
    assert first[0].is_zero()
    assert first[1] == fd.pi_power(2)
    assert first[2] == 2 * fd.pi_power(2)
    assert candidate_count(FieldDesc(11)) == 11**3
