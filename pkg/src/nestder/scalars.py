"""Exact scalars: rationals (gmpy2 ``mpq``) and Gaussian rationals.

Every decision in the package (rank, feasibility, equality of maps) is made
on these types, so nothing here ever touches floating point.
"""
from __future__ import annotations

import re
from fractions import Fraction

from gmpy2 import mpq

RATIONAL = "rational"
GAUSSIAN = "gaussian"
FIELDS = (RATIONAL, GAUSSIAN)

Q = mpq


_RATIONAL_TYPES = (int, type(mpq(0)), Fraction)


class GaussQ:
    """Element ``re + im*i`` of Q[i], with both parts stored as ``mpq``."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = mpq(re)
        self.im = mpq(im)

    @staticmethod
    def _parts(other):
        if isinstance(other, GaussQ):
            return other.re, other.im
        if isinstance(other, _RATIONAL_TYPES):
            return other, 0
        return None

    def __add__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return GaussQ(self.re + p[0], self.im + p[1])

    __radd__ = __add__

    def __sub__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return GaussQ(self.re - p[0], self.im - p[1])

    def __rsub__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return GaussQ(p[0] - self.re, p[1] - self.im)

    def __mul__(self, other):
        if isinstance(other, GaussQ):
            return GaussQ(self.re * other.re - self.im * other.im,
                          self.re * other.im + self.im * other.re)
        if not isinstance(other, _RATIONAL_TYPES):
            return NotImplemented
        return GaussQ(self.re * other, self.im * other)

    __rmul__ = __mul__

    def __neg__(self):
        return GaussQ(-self.re, -self.im)

    def __pos__(self):
        return self

    def conjugate(self):
        return GaussQ(self.re, -self.im)

    def norm(self):
        return self.re * self.re + self.im * self.im

    def __truediv__(self, other):
        if isinstance(other, GaussQ):
            n = other.norm()
            if not n:
                raise ZeroDivisionError("division by zero Gaussian rational")
            return self * other.conjugate() * (1 / n)
        other = mpq(other)
        return GaussQ(self.re / other, self.im / other)

    def __rtruediv__(self, other):
        return GaussQ(other) / self

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if isinstance(other, GaussQ):
            return self.re == other.re and self.im == other.im
        try:
            return not self.im and self.re == other
        except TypeError:
            return NotImplemented

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __repr__(self):
        return f"GaussQ({format_scalar(self)})"

    def __str__(self):
        return format_scalar(self)

    def __reduce__(self):
        return (GaussQ, (self.re, self.im))


def zero(field=RATIONAL):
    return GaussQ() if field == GAUSSIAN else mpq(0)


def one(field=RATIONAL):
    return GaussQ(1) if field == GAUSSIAN else mpq(1)


def coerce(x, field=RATIONAL):
    """Lift an int, ``mpq`` or ``GaussQ`` into ``field``."""
    if field == GAUSSIAN:
        return x if isinstance(x, GaussQ) else GaussQ(x)
    if isinstance(x, GaussQ):
        if x.im:
            raise ValueError(f"{x} is not rational")
        return x.re
    return mpq(x)


def field_of(x):
    return GAUSSIAN if isinstance(x, GaussQ) else RATIONAL


def _fmt_q(x):
    x = mpq(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def format_scalar(x) -> str:
    if isinstance(x, GaussQ):
        if not x.im:
            return _fmt_q(x.re)
        im = _fmt_q(x.im)
        if not x.re:
            return f"{im}*i"
        sign = "" if im.startswith("-") else "+"
        return f"{_fmt_q(x.re)}{sign}{im}*i"
    return _fmt_q(x)


_RAT = r"[+-]?\d+(?:/\d+)?"
_GAUSS_RE = re.compile(
    rf"^(?:(?P<re>{_RAT})(?=$|[+-]))?(?:(?P<im>[+-]?(?:\d+(?:/\d+)?)?)\*?i)?$"
)


def _q(txt: str):
    try:
        return mpq(txt[1:] if txt.startswith("+") else txt)
    except ZeroDivisionError as exc:
        raise ValueError(f"zero denominator in {txt!r}") from exc


def parse_scalar(text: str, field=RATIONAL):
    """Parse ``p``, ``p/q`` or, in Gaussian mode, ``p/q+r/s*i``."""
    s = text.strip().replace(" ", "")
    if not s:
        raise ValueError("empty scalar")
    if "i" not in s:
        if not re.fullmatch(_RAT, s):
            raise ValueError(f"cannot parse scalar {text!r}")
        return coerce(_q(s), field)
    if field != GAUSSIAN:
        raise ValueError(f"imaginary entry {text!r} outside Gaussian mode")
    m = _GAUSS_RE.match(s)
    if not m or not s:
        raise ValueError(f"cannot parse scalar {text!r}")
    re_part = _q(m.group("re")) if m.group("re") else mpq(0)
    im_txt = m.group("im")
    if im_txt in ("", "+"):
        im_part = mpq(1)
    elif im_txt == "-":
        im_part = mpq(-1)
    else:
        im_part = _q(im_txt)
    return GaussQ(re_part, im_part)


def random_scalar(rng, field=RATIONAL):
    """Numerator uniform on [-9, 9], denominator uniform on {1, 2, 3}.

    Gaussian mode draws the real part first, then the imaginary part.
    """
    re_part = mpq(rng.randint(-9, 9), rng.randint(1, 3))
    if field == GAUSSIAN:
        return GaussQ(re_part, mpq(rng.randint(-9, 9), rng.randint(1, 3)))
    return re_part
