import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from somekawa.elliptic import LegendreCurve, supersingular_lambdas
from somekawa.localfield import FieldDesc, PrecisionError
from somekawa.scholten import (
    ROW_ABCD,
    SpanError,
    build_spans,
    diagonal_point,
    good_span,
    resultant,
    sigma_maps,
    span_diagnostics,
)


def spans(p, c, lam, mu, precision=24):
    fd = FieldDesc(p, 2, c, precision)
    return fd, build_spans(fd(lam), fd(mu))


def frac_row(lam, mu, index):
    """(u, r, s, t, v) from the Scholten parameters (a, b, c, d) and exact arithmetic."""
    a, b, c, d = (Fraction(x) for x in ROW_ABCD(lam, mu)[index])
    delta = a * d - b * c
    u = (a - b) * a * b / delta
    r = (c - d) / (a - b)
    s, t = c / a, d / b
    if index in (3, 6):
        s, t = t, s
    return u, r, s, t


# -- the table against its (a, b, c, d) origin --------------------------------------


@pytest.mark.parametrize("lam,mu", [(2, 6), (3, 5), (Fraction(1, 3), 7), (-4, Fraction(2, 9))])
def test_rows_match_scholten_parameters(lam, mu):
    fd = FieldDesc(101, 2, 1, 12)
    for row in build_spans(fd(lam), fd(mu)):
        u, r, s, t = frac_row(lam, mu, row.index)
        assert row.u == fd(u)
        assert (row.r, row.s, row.t) == (fd(r), fd(s), fd(t))
        assert row.v in (row.r, row.s, row.t)


def _sigma_identity(lam, mu, u, r, s, t, v, X):
    # both sides as rationals in X = x^2; y^2 = u (X - r)(X - s)(X - t)
    Fx = u * (X - r) * (X - s) * (X - t)
    x1 = u * (X - v)
    ok1 = u * u * Fx == x1 * (x1 - 1) * (x1 - lam)
    x2 = u * s * t * (X - r) / X
    ok2 = (u * r * s * t) ** 2 * Fx / X**3 == x2 * (x2 - 1) * (x2 - mu)
    return ok1, ok2


@pytest.mark.parametrize("lam,mu", [(2, 6), (3, 5), (Fraction(1, 3), 7), (11, Fraction(-2, 5))])
def test_sigma_maps_are_polynomial_identities(lam, mu):
    fd = FieldDesc(101, 2, 1, 12)
    for row in build_spans(fd(lam), fd(mu)):
        u, r, s, t = frac_row(lam, mu, row.index)
        v = next(q for q in (r, s, t) if row.v == fd(q))
        for X in (Fraction(2), Fraction(-3, 7), Fraction(5, 11), Fraction(13), Fraction(1, 2)):
            assert _sigma_identity(Fraction(lam), Fraction(mu), u, r, s, t, v, X) == (True, True)


@given(st.integers(0, 10**6))
def test_sigma_images_lie_on_the_curves(seed):
    rng = random.Random(seed)
    fd, rows = spans(7, rng.choice((1, -1)), 2, 6)
    row = rng.choice([r for r in rows if r.nondegenerate])
    E1, E2 = LegendreCurve(row.lam), LegendreCurve(row.mu)
    for _ in range(20):
        x = fd.from_digits([rng.randrange(7) for _ in range(5)], -2)
        y = None if x.is_zero() else row.F(x).sqrt()
        if y is not None:
            break
    else:
        return
    P1, P2 = sigma_maps(row, (x, y))
    assert E1.contains(P1) and E2.contains(P2)
    # the involution x -> -x fixes sigma1 and negates sigma2
    Q1, Q2 = sigma_maps(row, (-x, y))
    assert Q1.x == P1.x and Q1.y == P1.y
    assert Q2.x == P2.x and Q2.y == -P2.y


def test_sigma_rejects_bad_input():
    fd, rows = spans(7, 1, 2, 6)
    row = rows[0]
    with pytest.raises(SpanError):
        sigma_maps(row, (fd(1), fd(1)))
    w = row.s.sqrt()
    with pytest.raises(SpanError):
        sigma_maps(row, (fd.zero(), row.F(fd.zero()).sqrt() or fd.one()), check=False)
    assert w is not None


# -- the worked example over Q_7(sqrt 7) --------------------------------------------------


def test_degenerate_rows_for_2_6():
    fd, rows = spans(7, 1, 2, 6)
    assert [r.index for r in rows if not r.nondegenerate] == [3, 4]
    for r in rows[2:4]:
        assert r.delta.valuation() > 0


def test_example_sextics_as_residues():
    fd, rows = spans(7, 1, 2, 6)
    got = {r.index: (r.u.residue(), sorted(x.residue() for x in (r.r, r.s, r.t))) for r in rows if r.nondegenerate}
    inv = lambda n, d: n * pow(d, -1, 7) % 7  # noqa: E731
    expected = {
        1: (inv(-1, 2), sorted([5, 3, 1])),
        2: (inv(2, 11), sorted([-5 % 7, 6, inv(1, 2)])),
        5: (inv(-1, 2), sorted([-5 % 7, -3 % 7, -1 % 7])),
        6: (inv(2, 11), sorted([5, -6 % 7, inv(-1, 2)])),
    }
    assert got == expected


@pytest.mark.parametrize("lam,mu", [(3, 5), (Fraction(1, 3), 7), (12, 22), (2, 13)])
def test_resultants_match_for_generic_parameters(lam, mu):
    fd = FieldDesc(101, 2, -1, 12)
    for row in build_spans(fd(lam), fd(mu)):
        assert span_diagnostics(row).resultants_match


def test_span_diagnostics_for_example():
    fd, rows = spans(7, 1, 2, 6)
    for row in rows:
        d = span_diagnostics(row)
        assert d.resultants_match
        assert d.nondegenerate == row.nondegenerate
        if row.nondegenerate:
            assert d.reduced_separable
            for w, _ in d.weierstrass_points:
                assert row.F(w).is_zero()
    d1 = span_diagnostics(rows[0])
    assert d1.squares == {"r": False, "s": True, "t": False}


def test_resultant_oracle():
    fd = FieldDesc(7, 2, 1, 12)
    # Res(x^2 - 2, x - 3) = 9 - 2
    f = [fd(-2), fd(0), fd(1)]
    g = [fd(-3), fd(1)]
    assert resultant(f, g) == fd(7)
    # common root gives zero
    assert resultant([fd(-6), fd(1), fd(1)], [fd(-2), fd(1)]).is_zero()


def test_to_json_of_rows():
    fd, rows = spans(7, 1, 2, 6)
    obj = rows[0].to_json(span_diagnostics(rows[0]))
    assert obj["row"] == 1 and obj["delta_val"] == 0 and obj["nondegenerate"]
    fd2, rows2 = spans(7, 1, 2, 2)
    assert rows2[0].to_json()["delta_val"] is None
    assert not rows2[0].usable


# -- good spans and diagonal points ------------------------------------------------------


@pytest.mark.parametrize("p", [7, 11, 19, 23, 31])
@pytest.mark.parametrize("c", [1, -1])
def test_good_span_exists_for_every_pair(p, c):
    fd = FieldDesc(p, 2, c, 12)
    for lam in supersingular_lambdas(p):
        for mu in supersingular_lambdas(p):
            row, w = good_span(fd(lam), fd(mu))
            assert row.nondegenerate and w.valuation() == 0 and row.F(w).is_zero()


def test_good_span_requires_supersingular():
    fd = FieldDesc(7, 2, 1)
    with pytest.raises(SpanError):
        good_span(fd(3), fd(6))


@pytest.mark.parametrize("p", [7, 11])
@pytest.mark.parametrize("c", [1, -1])
@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_diagonal_point_has_signature_N_N(p, c, N):
    fd = FieldDesc(p, 2, c, 24)
    lams = supersingular_lambdas(p)
    for lam in lams:
        for mu in lams:
            row, w = good_span(fd(lam), fd(mu))
            wit = diagonal_point(row, w, N)
            assert wit.depths == (N, N)
            assert wit.x0_minus_w_val == 2 * N
            assert (wit.x0 - w).valuation() == 2 * N
            assert row.contains((wit.x0, wit.y0))


def test_diagonal_point_precision_guard():
    fd = FieldDesc(7, 2, 1, precision=6)
    row, w = good_span(fd(2), fd(6))
    with pytest.raises(PrecisionError):
        diagonal_point(row, w, 4)
    with pytest.raises(ValueError):
        diagonal_point(row, w, 0)
