"""Q(phi) arithmetic, checked against sympy and an independent sqrt5-basis model."""

from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from infpeg.golden import (
    ONE,
    PHI,
    SIGMA,
    SQRT5,
    ZERO,
    GoldenNum,
    approx,
    decimal_str,
    fibonacci,
    geometric_sum,
    phi_pow,
    rational_root_upper,
    ring_op,
    sigma_pow,
    sign,
)

SYM_PHI = (1 + sympy.sqrt(5)) / 2


def sym(x: GoldenNum):
    return sympy.Rational(x.a.numerator, x.a.denominator) + sympy.Rational(x.b.numerator, x.b.denominator) * SYM_PHI


rationals = st.fractions(min_value=-50, max_value=50, max_denominator=30)
golden = st.builds(GoldenNum, rationals, rationals)


def test_defining_relation():
    assert ring_op(PHI, PHI, "mul") == GoldenNum(1, 1)


def test_inverse_of_phi():
    assert ring_op(ONE, PHI, "div") == GoldenNum(-1, 1)


def test_additive_identity():
    assert ring_op(ONE, ZERO, "add") == ONE


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        ring_op(ONE, ZERO, "div")


def test_unknown_op():
    with pytest.raises(ValueError):
        ring_op(ONE, ONE, "pow")


def test_sigma_powers():
    assert sigma_pow(0) == ONE
    assert sigma_pow(1) == SIGMA
    assert sigma_pow(2) == GoldenNum(2, -1)
    assert sigma_pow(1) == sigma_pow(2) + sigma_pow(3)
    with pytest.raises(ValueError):
        sigma_pow(-1)


@pytest.mark.parametrize("i", range(0, 65))
def test_sigma_identity(i):
    assert sigma_pow(i) == ring_op(sigma_pow(i + 1), sigma_pow(i + 2), "add")


def test_sigma_pow_coefficients_are_fibonacci():
    for n in range(1, 80):
        s = sigma_pow(n)
        assert s.is_integral()
        assert {abs(s.a), abs(s.b)} == {fibonacci(n + 1), fibonacci(n)} or (abs(s.a), abs(s.b)) == (
            fibonacci(n + 1),
            fibonacci(n),
        )
    big = sigma_pow(300)
    assert abs(big.b) == fibonacci(300)


def test_sigma_pow_matches_sympy():
    for n in (0, 1, 5, 17, 40):
        assert sympy.simplify(sym(sigma_pow(n)) - SYM_PHI ** (-n)) == 0


def test_fibonacci_negative():
    assert [fibonacci(-n) for n in range(1, 7)] == [1, -1, 2, -3, 5, -8]
    for n in range(-10, 10):
        assert phi_pow(n) * phi_pow(-n) == ONE


def test_sign_examples():
    assert sign(ZERO) == 0
    assert sign(GoldenNum(-1, 1)) == 1
    assert sign(GoldenNum(2, -1)) == 1
    assert sign(GoldenNum(1, -1)) == -1  # 1 - phi
    assert sign(SQRT5 * SQRT5 - 5) == 0


def test_approx_examples():
    iv = approx(PHI, Fraction(1, 10**5))
    assert iv.width <= Fraction(1, 10**5)
    assert abs(iv.lo - Fraction(161803, 100000)) < Fraction(1, 10**5)
    iv = approx(SIGMA, Fraction(1, 10**5))
    assert abs(iv.lo - Fraction(61803, 100000)) < Fraction(1, 10**5)
    z = approx(ZERO, Fraction(1, 10))
    assert (z.lo, z.hi) == (0, 0)
    with pytest.raises(ValueError):
        approx(PHI, 0)


def test_geometric_sum_examples():
    assert geometric_sum(1, 1) == GoldenNum(1, 1)
    assert geometric_sum(SIGMA, 2) == ONE
    assert geometric_sum(0, 3) == ZERO
    with pytest.raises(ValueError):
        geometric_sum(1, 0)


@pytest.mark.parametrize("t", range(1, 9))
def test_geometric_sum_inverse(t):
    assert geometric_sum(1, t) * (ONE - sigma_pow(t)) == ONE


def test_one_minus_sigma_identities():
    assert ONE - SIGMA == sigma_pow(2)
    assert ONE - sigma_pow(2) == SIGMA


def test_json_round_trip():
    x = GoldenNum(Fraction(-3, 7), Fraction(5, 2))
    assert x.to_json() == {"a": "-3/7", "b": "5/2"}
    assert GoldenNum.from_json(x.to_json()) == x


def test_immutable():
    with pytest.raises(AttributeError):
        PHI.a = 3


def test_rational_root_upper():
    r = rational_root_upper(sigma_pow(1), 2, Fraction(1, 10**9))
    assert sign(GoldenNum(r * r) - SIGMA) >= 0
    assert r - Fraction(1, 10**9) <= sympy.sqrt(sym(SIGMA)).evalf(30) + 1e-12


def test_decimal_str():
    assert decimal_str(PHI, 6) == "1.61803"


def root5(x: GoldenNum) -> tuple[Fraction, Fraction]:
    """Coordinates (p, q) of x = p + q*sqrt5, the oracle's basis."""
    return (x.a + x.b / 2, x.b / 2)


def r5_mul(x, y):
    (p, q), (r, s) = x, y
    return (p * r + 5 * q * s, p * s + q * r)


def r5_div(x, y):
    r, s = y
    n = r * r - 5 * s * s
    return r5_mul(x, (r / n, -s / n))


@given(golden, golden)
def test_ring_ops_match_sqrt5_basis(x, y):
    px, py = root5(x), root5(y)
    assert root5(x + y) == (px[0] + py[0], px[1] + py[1])
    assert root5(x * y) == r5_mul(px, py)
    if y != ZERO:
        assert root5(x / y) == r5_div(px, py)


@given(golden, golden, golden)
def test_ring_axioms(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x * y == y * x
    assert x - x == ZERO


@settings(max_examples=300)
@given(golden)
def test_sign_agrees_with_interval(x):
    iv = approx(x, Fraction(1, 10**6))
    assert iv.contains(iv.lo)
    if iv.excludes_zero():
        assert sign(x) == (1 if iv.lo > 0 else -1)
    expected = sympy.sign(sym(x))
    assert sign(x) == int(expected)


@given(golden, st.fractions(min_value=Fraction(1, 10**8), max_value=1))
def test_approx_contains_value(x, eps):
    iv = approx(x, eps)
    assert iv.width <= eps
    val = sym(x)
    assert sympy.Rational(iv.lo.numerator, iv.lo.denominator) <= val <= sympy.Rational(iv.hi.numerator, iv.hi.denominator)


@given(golden)
def test_norm_is_multiplicative_with_conjugate(x):
    assert x * x.conjugate() == GoldenNum(x.norm())
