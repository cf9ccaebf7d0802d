"""Exact arithmetic in Q(phi), phi the golden ratio.

Every element is stored as ``a + b*phi`` with rational ``a`` and ``b``.
Multiplication reduces with ``phi**2 = phi + 1`` and division goes through
the Galois conjugate ``phi -> 1 - phi``.  Nothing here touches a float
except ``__float__``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

Rational = Union[int, Fraction]


def _frac(x: Rational | str) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class RationalInterval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, x: Rational) -> bool:
        return self.lo <= x <= self.hi

    def excludes_zero(self) -> bool:
        return self.lo > 0 or self.hi < 0

    def __str__(self) -> str:
        return f"[{float(self.lo):.12g}, {float(self.hi):.12g}]"


class GoldenNum:
    """An element ``a + b*phi`` of Q(phi)."""

    __slots__ = ("a", "b")

    def __init__(self, a: Rational = 0, b: Rational = 0) -> None:
        object.__setattr__(self, "a", _frac(a))
        object.__setattr__(self, "b", _frac(b))

    def __setattr__(self, name, value):
        raise AttributeError("GoldenNum is immutable")

    # -- coercion -------------------------------------------------------
    @staticmethod
    def coerce(x: GoldenNum | Rational) -> GoldenNum:
        if isinstance(x, GoldenNum):
            return x
        if isinstance(x, (int, Fraction)):
            return GoldenNum(x, 0)
        raise TypeError(f"cannot coerce {type(x).__name__} to GoldenNum")

    # -- ring operations ------------------------------------------------
    def __add__(self, other):
        try:
            o = GoldenNum.coerce(other)
        except TypeError:
            return NotImplemented
        return GoldenNum(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self) -> GoldenNum:
        return GoldenNum(-self.a, -self.b)

    def __sub__(self, other):
        try:
            o = GoldenNum.coerce(other)
        except TypeError:
            return NotImplemented
        return GoldenNum(self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        return GoldenNum.coerce(other) - self

    def __mul__(self, other):
        try:
            o = GoldenNum.coerce(other)
        except TypeError:
            return NotImplemented
        # (a + b phi)(c + d phi) = ac + (ad + bc) phi + bd (phi + 1)
        bd = self.b * o.b
        return GoldenNum(self.a * o.a + bd, self.a * o.b + self.b * o.a + bd)

    __rmul__ = __mul__

    def conjugate(self) -> GoldenNum:
        """Image under phi -> 1 - phi."""
        return GoldenNum(self.a + self.b, -self.b)

    def norm(self) -> Fraction:
        """``x * conj(x)``, always rational: a^2 + ab - b^2."""
        return self.a * self.a + self.a * self.b - self.b * self.b

    def __truediv__(self, other):
        try:
            o = GoldenNum.coerce(other)
        except TypeError:
            return NotImplemented
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(phi)")
        num = self * o.conjugate()
        return GoldenNum(num.a / n, num.b / n)

    def __rtruediv__(self, other):
        return GoldenNum.coerce(other) / self

    def __pow__(self, n: int) -> GoldenNum:
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return GoldenNum(1) / (self ** (-n))
        result = GoldenNum(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- comparison -----------------------------------------------------
    def sign(self) -> int:
        return sign(self)

    def __eq__(self, other) -> bool:
        try:
            o = GoldenNum.coerce(other)
        except TypeError:
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __hash__(self) -> int:
        return hash((self.a, self.b))

    def _cmp(self, other) -> int:
        return sign(self - GoldenNum.coerce(other))

    def __lt__(self, other) -> bool:
        return self._cmp(other) < 0

    def __le__(self, other) -> bool:
        return self._cmp(other) <= 0

    def __gt__(self, other) -> bool:
        return self._cmp(other) > 0

    def __ge__(self, other) -> bool:
        return self._cmp(other) >= 0

    def __bool__(self) -> bool:
        return bool(self.a) or bool(self.b)

    def __float__(self) -> float:
        iv = approx(self, Fraction(1, 10**18))
        return float((iv.lo + iv.hi) / 2)

    def is_rational(self) -> bool:
        return self.b == 0

    def is_integral(self) -> bool:
        return self.a.denominator == 1 and self.b.denominator == 1

    # -- display / serialization ----------------------------------------
    def __repr__(self) -> str:
        return f"GoldenNum({self.a}, {self.b})"

    def __str__(self) -> str:
        if self.b == 0:
            return str(self.a)
        if self.a == 0:
            return f"{self.b}*phi"
        op = "+" if self.b > 0 else "-"
        return f"{self.a} {op} {abs(self.b)}*phi"

    def to_json(self) -> dict[str, str]:
        return {
            "a": f"{self.a.numerator}/{self.a.denominator}",
            "b": f"{self.b.numerator}/{self.b.denominator}",
        }

    @classmethod
    def from_json(cls, data: dict[str, str]) -> GoldenNum:
        return cls(Fraction(data["a"]), Fraction(data["b"]))


ZERO = GoldenNum(0, 0)
ONE = GoldenNum(1, 0)
PHI = GoldenNum(0, 1)
SIGMA = GoldenNum(-1, 1)  # 1/phi = phi - 1
SQRT5 = GoldenNum(-1, 2)  # 2*phi - 1


def ring_op(x: GoldenNum, y: GoldenNum, op: str) -> GoldenNum:
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    if op == "div":
        return x / y
    raise ValueError(f"unknown ring operation {op!r}")


def sign(x: GoldenNum) -> int:
    """Exact sign of ``a + b*phi``.

    ``2(a + b*phi) = p + b*sqrt5`` with ``p = 2a + b``; when ``p`` and ``b``
    disagree in sign, compare ``p**2`` with ``5*b**2``.  sqrt5 is
    irrational so the two squares only tie at zero.
    """
    p = 2 * x.a + x.b
    b = x.b
    if p >= 0 and b >= 0:
        return 0 if (p == 0 and b == 0) else 1
    if p <= 0 and b <= 0:
        return -1
    diff = p * p - 5 * b * b
    if p > 0:
        return 1 if diff > 0 else -1
    return 1 if diff < 0 else -1


@lru_cache(maxsize=None)
def fibonacci(n: int) -> int:
    """F(0)=0, F(1)=1, extended to negative n by F(-n) = (-1)^(n+1) F(n)."""
    if n < 0:
        f = fibonacci(-n)
        return f if (-n) % 2 == 1 else -f
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def phi_pow(n: int) -> GoldenNum:
    """phi^n = F(n-1) + F(n) phi, valid for all integers n."""
    return GoldenNum(fibonacci(n - 1), fibonacci(n))


@lru_cache(maxsize=4096)
def sigma_pow(n: int) -> GoldenNum:
    """sigma^n = phi^(-n); integer coefficients for every n."""
    if n < 0:
        raise ValueError("sigma_pow expects n >= 0; use phi_pow for negative exponents")
    return phi_pow(-n)


def geometric_sum(first: GoldenNum | Rational, ratio_exponent: int) -> GoldenNum:
    """Closed form of ``sum_{n>=0} first * sigma^(t*n)``."""
    if ratio_exponent < 1:
        raise ValueError("ratio exponent must be >= 1 so that sigma^t < 1")
    first = GoldenNum.coerce(first)
    if not first:
        return ZERO
    return first / (ONE - sigma_pow(ratio_exponent))


def _phi_bounds(k: int) -> tuple[Fraction, Fraction]:
    """Consecutive Fibonacci ratios bracket phi from both sides."""
    r1 = Fraction(fibonacci(k + 1), fibonacci(k))
    r2 = Fraction(fibonacci(k + 2), fibonacci(k + 1))
    return (r1, r2) if r1 < r2 else (r2, r1)


def approx(x: GoldenNum, eps: Rational) -> RationalInterval:
    """Rational enclosure of ``x`` with width at most ``eps``."""
    eps = _frac(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if x.b == 0:
        return RationalInterval(x.a, x.a)
    k = 2
    # width of the phi bracket is 1/(F(k) F(k+1))
    while abs(x.b) > eps * fibonacci(k) * fibonacci(k + 1):
        k += 1
    lo, hi = _phi_bounds(k)
    ends = (x.a + x.b * lo, x.a + x.b * hi)
    return RationalInterval(min(ends), max(ends))


def rational_root_upper(x: GoldenNum, q: int, eps: Rational = Fraction(1, 10**12)) -> Fraction:
    """A rational ``r`` with ``x**(1/q) <= r <= x**(1/q) + eps`` for ``x > 0``.

    Bisection with exact comparisons ``r**q`` vs ``x``; used when a tail
    bound needs an irrational power such as ``sigma**(1 - epsilon)``.
    """
    if sign(x) <= 0:
        raise ValueError("root of a non-positive number")
    eps = _frac(eps)
    hi_iv = approx(x, Fraction(1, 10))
    lo, hi = Fraction(0), max(Fraction(1), hi_iv.hi)
    while hi - lo > eps:
        mid = (lo + hi) / 2
        if sign(GoldenNum(mid**q) - x) >= 0:
            hi = mid
        else:
            lo = mid
    return hi


def decimal_str(x: GoldenNum, digits: int = 12) -> str:
    iv = approx(x, Fraction(1, 10 ** (digits + 2)))
    return f"{float((iv.lo + iv.hi) / 2):.{digits}g}"
