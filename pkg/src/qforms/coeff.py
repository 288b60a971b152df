"""Coefficient rings for the whole package.

``VElem`` is an element of Q(v), stored as ``v**shift * num/den`` with integer
polynomials ``num`` and ``den`` that have nonzero constant terms.  ``KElem`` is
an element of Q(v)(T), stored the same way over Z[v, T].  Both are kept in a
reduced canonical form so that ``==`` and ``hash`` are structural.
"""

from __future__ import annotations

import ast
import math
from fractions import Fraction
from typing import Iterable, Sequence

import flint

INF = math.inf

_P = flint.fmpz_poly
_CTX = flint.fmpz_mpoly_ctx.get(("v", "T"), "lex")
_MV, _MT = _CTX.gens()
_P_ONE = _P([1])
_M_ONE = _CTX.from_dict({(0, 0): 1})
_M_ZERO = _CTX.from_dict({})


class NegativeOrder(ValueError):
    """Raised when a series at T = 1 is requested for an element with a pole there."""


class BadBranch(ValueError):
    """Raised when a square-root branch does not square to the leading coefficient."""


class ParseError(ValueError):
    pass


def _low_index(coeffs: Sequence[int]) -> int:
    for i, c in enumerate(coeffs):
        if c:
            return i
    raise ValueError("zero polynomial")


# ---------------------------------------------------------------------------
# Q(v)
# ---------------------------------------------------------------------------


class VElem:
    """Element of Q(v) in canonical reduced form.

    Canonical form: ``num`` and ``den`` coprime with nonzero constant terms, the
    integer content of the pair is 1, and the constant term of ``den`` is
    positive.  Zero is ``0/1`` with shift 0.
    """

    __slots__ = ("num", "den", "shift", "_hash")

    def __init__(self, value: int | Fraction | "VElem" = 0):
        if isinstance(value, VElem):
            self.num, self.den, self.shift = value.num, value.den, value.shift
        elif isinstance(value, Fraction):
            self.num, self.den, self.shift = _P([value.numerator]), _P([value.denominator]), 0
            if value == 0:
                self.num = _P([])
        elif isinstance(value, int):
            self.num, self.den, self.shift = _P([value]), _P_ONE, 0
        else:
            raise TypeError(f"cannot build VElem from {type(value).__name__}")
        self._hash = None

    @classmethod
    def _raw(cls, num, den, shift: int) -> "VElem":
        obj = cls.__new__(cls)
        obj.num, obj.den, obj.shift, obj._hash = num, den, shift, None
        return obj

    @classmethod
    def _make(cls, num, den, shift: int) -> "VElem":
        if num.is_zero():
            return cls._raw(_P([]), _P_ONE, 0)
        nc = num.coeffs()
        k = _low_index(nc)
        if k:
            num = num.right_shift(k)
            shift += k
        if den.degree() > 0:
            dc = den.coeffs()
            k = _low_index(dc)
            if k:
                den = den.right_shift(k)
                shift -= k
            g = num.gcd(den)
            if g.degree() > 0:
                num = num / g
                den = den / g
        c = math.gcd(int(num.content()), int(den.content()))
        if c != 1:
            num = num / c
            den = den / c
        if int(den[0]) < 0:
            num, den = -num, -den
        return cls._raw(num, den, shift)

    @classmethod
    def laurent(cls, terms: dict[int, int]) -> "VElem":
        """Build the Laurent polynomial sum(c * v**k)."""
        terms = {k: c for k, c in terms.items() if c}
        if not terms:
            return cls(0)
        lo = min(terms)
        coeffs = [0] * (max(terms) - lo + 1)
        for k, c in terms.items():
            coeffs[k - lo] = c
        return cls._make(_P(coeffs), _P_ONE, lo)

    @classmethod
    def vpow(cls, k: int) -> "VElem":
        return cls._raw(_P_ONE, _P_ONE, k)

    # -- predicates -------------------------------------------------------
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_laurent(self) -> bool:
        return self.den.degree() == 0 and int(self.den[0]) == 1

    def __bool__(self) -> bool:
        return not self.num.is_zero()

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        other = _as_velem(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        lo = min(self.shift, other.shift)
        a = self.num.left_shift(self.shift - lo)
        b = other.num.left_shift(other.shift - lo)
        if self.den == other.den:
            return VElem._make(a + b, self.den, lo)
        return VElem._make(a * other.den + b * self.den, self.den * other.den, lo)

    __radd__ = __add__

    def __neg__(self):
        return VElem._raw(-self.num, self.den, self.shift)

    def __sub__(self, other):
        other = _as_velem(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _as_velem(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return VElem(0)
        shift = self.shift + other.shift
        if self.den.degree() == 0 and other.den.degree() == 0:
            return VElem._make(self.num * other.num, self.den * other.den, shift)
        g1 = self.num.gcd(other.den)
        g2 = other.num.gcd(self.den)
        num = (self.num / g1) * (other.num / g2)
        den = (self.den / g2) * (other.den / g1)
        return VElem._make(num, den, shift)

    __rmul__ = __mul__

    def inverse(self) -> "VElem":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in Q(v)")
        return VElem._make(self.den, self.num, -self.shift)

    def __truediv__(self, other):
        other = _as_velem(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        if self.is_zero():
            return VElem(1) if e == 0 else VElem(0)
        return VElem._raw(self.num**e, self.den**e, self.shift * e)

    def __eq__(self, other):
        other = _as_velem(other)
        if other is NotImplemented:
            return NotImplemented
        return self.shift == other.shift and self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.shift, tuple(int(c) for c in self.num.coeffs()),
                               tuple(int(c) for c in self.den.coeffs())))
        return self._hash

    # -- involutions ------------------------------------------------------
    def bar(self) -> "VElem":
        """The ring involution v -> 1/v."""
        if self.is_zero():
            return self
        rn = _P(list(reversed(self.num.coeffs())))
        rd = _P(list(reversed(self.den.coeffs())))
        return VElem._make(rn, rd, -self.shift - self.num.degree() + self.den.degree())

    # -- conversions ------------------------------------------------------
    def to_kelem(self) -> "KElem":
        return KElem._from_velem(self)

    def laurent_terms(self) -> dict[int, int]:
        """Exponent -> coefficient map; only valid for Laurent polynomials."""
        if not self.is_laurent():
            raise ValueError(f"{self} is not a Laurent polynomial")
        return {self.shift + i: int(c) for i, c in enumerate(self.num.coeffs()) if c}

    def as_fraction(self) -> Fraction:
        """Return the rational value of a constant element."""
        if self.is_zero():
            return Fraction(0)
        if self.shift or self.num.degree() or self.den.degree():
            raise ValueError(f"{self} is not a constant")
        return Fraction(int(self.num[0]), int(self.den[0]))

    def evaluate(self, point: Fraction) -> Fraction:
        """Evaluate at a rational value of v."""
        point = Fraction(point)
        n = sum((Fraction(int(c)) * point**i for i, c in enumerate(self.num.coeffs())), Fraction(0))
        d = sum((Fraction(int(c)) * point**i for i, c in enumerate(self.den.coeffs())), Fraction(0))
        return n / d * point**self.shift

    def __str__(self) -> str:
        num = _poly_str(self.num.coeffs(), self.shift)
        if self.den == 1:
            return f"({num})"
        return f"({num})/({_poly_str(self.den.coeffs(), 0)})"

    def __repr__(self) -> str:
        return f"VElem('{self}')"


def _poly_str(coeffs: Sequence, shift: int) -> str:
    terms = [(i + shift, int(c)) for i, c in enumerate(coeffs) if c]
    if not terms:
        return "0"
    return " + ".join(f"{c}*v^{k}" for k, c in sorted(terms, reverse=True))


def _as_velem(x):
    if isinstance(x, VElem):
        return x
    if isinstance(x, (int, Fraction)):
        return VElem(x)
    return NotImplemented


# ---------------------------------------------------------------------------
# Q(v)(T)
# ---------------------------------------------------------------------------


def _mono(a: int, b: int):
    return _CTX.from_dict({(a, b): 1})


def _mpoly_key(p) -> tuple:
    return tuple(sorted((tuple(int(e) for e in k), int(c)) for k, c in p.to_dict().items()))


def _mpoly_from_velem_num(x: VElem):
    return _CTX.from_dict({(i, 0): int(c) for i, c in enumerate(x.num.coeffs()) if c})


def _mpoly_from_velem_den(x: VElem):
    return _CTX.from_dict({(i, 0): int(c) for i, c in enumerate(x.den.coeffs()) if c})


class KElem:
    """Element of Q(v)(T) in canonical reduced form.

    Stored as ``v**sv * T**st * num/den`` with ``num, den`` coprime in Z[v, T],
    neither divisible by v or T, joint integer content 1 and a positive leading
    coefficient on ``den`` (lex order, v before T).
    """

    __slots__ = ("num", "den", "sv", "st", "_hash")

    def __init__(self, value: int | Fraction | VElem | "KElem" = 0):
        if isinstance(value, KElem):
            self.num, self.den, self.sv, self.st = value.num, value.den, value.sv, value.st
            self._hash = value._hash
            return
        if not isinstance(value, VElem):
            value = VElem(value)
        k = KElem._from_velem(value)
        self.num, self.den, self.sv, self.st, self._hash = k.num, k.den, k.sv, k.st, None

    @classmethod
    def _raw(cls, num, den, sv: int, st: int) -> "KElem":
        obj = cls.__new__(cls)
        obj.num, obj.den, obj.sv, obj.st, obj._hash = num, den, sv, st, None
        return obj

    @classmethod
    def _from_velem(cls, x: VElem) -> "KElem":
        if x.is_zero():
            return cls._raw(_M_ZERO, _M_ONE, 0, 0)
        return cls._raw(_mpoly_from_velem_num(x), _mpoly_from_velem_den(x), x.shift, 0)

    @classmethod
    def _make(cls, num, den, sv: int, st: int) -> "KElem":
        if num.is_zero():
            return cls._raw(_M_ZERO, _M_ONE, 0, 0)
        if not den.is_constant():
            g = num.gcd(den)
            if not g.is_constant():
                num = num / g
                den = den / g
        for p_is_num in (True, False):
            p = num if p_is_num else den
            ((a, b), _c), = p.term_content().to_dict().items()
            if a or b:
                p = p / _mono(a, b)
                sign = 1 if p_is_num else -1
                sv += sign * a
                st += sign * b
                if p_is_num:
                    num = p
                else:
                    den = p
        c = math.gcd(int(num.content()), int(den.content()))
        if c != 1:
            num = num / c
            den = den / c
        if int(den.leading_coefficient()) < 0:
            num, den = -num, -den
        return cls._raw(num, den, sv, st)

    @classmethod
    def T(cls, k: int = 1) -> "KElem":
        return cls._raw(_M_ONE, _M_ONE, 0, k)

    @classmethod
    def monomial(cls, coeff: int, vexp: int, texp: int) -> "KElem":
        return cls._make(_CTX.from_dict({(0, 0): coeff}), _M_ONE, vexp, texp)

    @classmethod
    def from_terms(cls, terms: dict[tuple[int, int], int]) -> "KElem":
        """Build sum(c * v**a * T**b) from ``{(a, b): c}``."""
        terms = {k: c for k, c in terms.items() if c}
        if not terms:
            return cls(0)
        la = min(a for a, _ in terms)
        lb = min(b for _, b in terms)
        num = _CTX.from_dict({(a - la, b - lb): c for (a, b), c in terms.items()})
        return cls._make(num, _M_ONE, la, lb)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self) -> bool:
        return not self.num.is_zero()

    def _shift_num(self, lo_v: int, lo_t: int):
        dv, dt = self.sv - lo_v, self.st - lo_t
        if dv or dt:
            return self.num * _mono(dv, dt)
        return self.num

    def __add__(self, other):
        other = _as_kelem(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        lv, lt = min(self.sv, other.sv), min(self.st, other.st)
        a = self._shift_num(lv, lt)
        b = other._shift_num(lv, lt)
        if self.den == other.den:
            return KElem._make(a + b, self.den, lv, lt)
        return KElem._make(a * other.den + b * self.den, self.den * other.den, lv, lt)

    __radd__ = __add__

    def __neg__(self):
        return KElem._raw(-self.num, self.den, self.sv, self.st)

    def __sub__(self, other):
        other = _as_kelem(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _as_kelem(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return KElem(0)
        sv, st = self.sv + other.sv, self.st + other.st
        if self.den.is_constant() and other.den.is_constant():
            return KElem._make(self.num * other.num, self.den * other.den, sv, st)
        g1 = self.num.gcd(other.den)
        g2 = other.num.gcd(self.den)
        num = (self.num / g1) * (other.num / g2)
        den = (self.den / g2) * (other.den / g1)
        return KElem._make(num, den, sv, st)

    __rmul__ = __mul__

    def inverse(self) -> "KElem":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in Q(v)(T)")
        return KElem._make(self.den, self.num, -self.sv, -self.st)

    def __truediv__(self, other):
        other = _as_kelem(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        if e == 0:
            return KElem(1)
        if self.is_zero():
            return KElem(0)
        return KElem._raw(self.num**e, self.den**e, self.sv * e, self.st * e)

    def __eq__(self, other):
        other = _as_kelem(other)
        if other is NotImplemented:
            return NotImplemented
        return (self.sv == other.sv and self.st == other.st
                and self.num == other.num and self.den == other.den)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.sv, self.st, _mpoly_key(self.num), _mpoly_key(self.den)))
        return self._hash

    # -- involutions ------------------------------------------------------
    def s(self) -> "KElem":
        """The involution T -> 1/T."""
        return self._reflect(1)

    def bar(self) -> "KElem":
        """The involution v -> 1/v (T fixed)."""
        return self._reflect(0)

    def _reflect(self, axis: int) -> "KElem":
        if self.is_zero():
            return self

        def flip(p):
            d = p.to_dict()
            top = max(k[axis] for k in d)
            out = {}
            for k, c in d.items():
                k = list(k)
                k[axis] = top - k[axis]
                out[tuple(k)] = c
            return _CTX.from_dict(out), top

        n, tn = flip(self.num)
        d, td = flip(self.den)
        shift = [self.sv, self.st]
        shift[axis] = -shift[axis] - tn + td
        return KElem._make(n, d, shift[0], shift[1])

    # -- T = 1 ------------------------------------------------------------
    def has_T(self) -> bool:
        return self.st != 0 or any(k[1] for k in self.num.to_dict()) or any(k[1] for k in self.den.to_dict())

    def to_velem(self) -> VElem:
        """Convert to Q(v); raises ValueError if T occurs."""
        if self.has_T():
            raise ValueError(f"{self} depends on T")
        return self._collapse(self.num, self.den)

    def _collapse(self, num, den) -> VElem:
        def to_p(p):
            d = {k[0]: int(c) for k, c in p.to_dict().items()}
            return _P([d.get(i, 0) for i in range(max(d) + 1)]) if d else _P([])
        return VElem._make(to_p(num), to_p(den), self.sv)

    def at_T1(self) -> VElem:
        """Value at T = 1; raises ZeroDivisionError at a pole."""
        n = self.num.subs({"T": 1})
        d = self.den.subs({"T": 1})
        if d.is_zero():
            raise ZeroDivisionError(f"{self} has a pole at T = 1")
        return self._collapse(n, d)

    def __str__(self) -> str:
        return kelem_str(self)

    def __repr__(self) -> str:
        return f"KElem('{self}')"


def _as_kelem(x):
    if isinstance(x, KElem):
        return x
    if isinstance(x, VElem):
        return KElem._from_velem(x)
    if isinstance(x, (int, Fraction)):
        return KElem(x)
    return NotImplemented


def _t_coefficients(p, vshift: int) -> dict[int, VElem]:
    """Split an element of Z[v, T] into T-degree -> Laurent coefficient in v."""
    by_t: dict[int, dict[int, int]] = {}
    for (a, b), c in p.to_dict().items():
        by_t.setdefault(int(b), {})[int(a) + vshift] = int(c)
    return {b: VElem.laurent(t) for b, t in by_t.items()}


def kelem_parts(x: KElem) -> tuple[dict[int, VElem], dict[int, VElem]]:
    """Numerator and denominator as T-polynomials over Q(v), denominator monic."""
    if x.is_zero():
        return {}, {0: VElem(1)}
    tn = x.st if x.st > 0 else 0
    td = -x.st if x.st < 0 else 0
    num = _t_coefficients(x.num * _mono(0, tn), x.sv)
    den = _t_coefficients(x.den * _mono(0, td), 0)
    lead = den[max(den)]
    num = {k: c / lead for k, c in num.items()}
    den = {k: c / lead for k, c in den.items()}
    return num, den


def kelem_str(x: KElem) -> str:
    """Canonical string: T-polynomials over Q(v), denominator monic in T."""
    num, den = kelem_parts(x)

    def side(d: dict[int, VElem]) -> str:
        if not d:
            return "0"
        return " + ".join(f"{c}*T^{k}" for k, c in sorted(d.items(), reverse=True))

    if den == {0: VElem(1)}:
        return f"[{side(num)}]"
    return f"[{side(num)}]/[{side(den)}]"


# ---------------------------------------------------------------------------
# Valuation and series at T = 1
# ---------------------------------------------------------------------------

_T_MINUS_1 = _MT - 1


def _t1_multiplicity(p) -> int:
    k = 0
    while p.subs({"T": 1}).is_zero():
        p = p / _T_MINUS_1
        k += 1
    return k


def ord_T1(x: KElem | VElem | int) -> int | float:
    """(T-1)-adic valuation; INF for zero."""
    x = _as_kelem(x)
    if x.is_zero():
        return INF
    return _t1_multiplicity(x.num) - _t1_multiplicity(x.den)


class SeriesT1:
    """Truncated power series in t = T - 1 with coefficients in Q(v)."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[VElem | int]):
        self.coeffs = tuple(c if isinstance(c, VElem) else VElem(c) for c in coeffs)

    def __len__(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, i: int) -> VElem:
        return self.coeffs[i]

    def _n(self, other: "SeriesT1") -> int:
        return min(len(self), len(other))

    @staticmethod
    def _coerce(x, n: int) -> "SeriesT1":
        if isinstance(x, SeriesT1):
            return x
        if isinstance(x, (int, Fraction, VElem)):
            return SeriesT1([VElem(x)] + [VElem(0)] * (n - 1))
        if isinstance(x, KElem):
            return expand_T1(x, n)
        raise TypeError(type(x).__name__)

    def __add__(self, other):
        other = self._coerce(other, len(self))
        n = self._n(other)
        return SeriesT1(self.coeffs[i] + other.coeffs[i] for i in range(n))

    __radd__ = __add__

    def __neg__(self):
        return SeriesT1(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-self._coerce(other, len(self)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, VElem)):
            return SeriesT1(c * other for c in self.coeffs)
        other = self._coerce(other, len(self))
        n = self._n(other)
        out = []
        for k in range(n):
            acc = VElem(0)
            for i in range(k + 1):
                a, b = self.coeffs[i], other.coeffs[k - i]
                if a and b:
                    acc = acc + a * b
            out.append(acc)
        return SeriesT1(out)

    __rmul__ = __mul__

    def inverse(self) -> "SeriesT1":
        c0 = self.coeffs[0]
        if c0.is_zero():
            raise NegativeOrder("series with zero constant term is not invertible")
        inv0 = c0.inverse()
        out = [inv0]
        for k in range(1, len(self)):
            acc = VElem(0)
            for i in range(1, k + 1):
                acc = acc + self.coeffs[i] * out[k - i]
            out.append(-acc * inv0)
        return SeriesT1(out)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, VElem)):
            return self * VElem(other).inverse()
        return self * self._coerce(other, len(self)).inverse()

    def truncate(self, n: int) -> "SeriesT1":
        return SeriesT1(self.coeffs[:n])

    def __eq__(self, other):
        if not isinstance(other, SeriesT1):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def order(self) -> int | float:
        for i, c in enumerate(self.coeffs):
            if c:
                return i
        return INF

    def to_strings(self) -> list[str]:
        return [str(c) for c in self.coeffs]

    def __repr__(self) -> str:
        return f"SeriesT1({self.to_strings()})"


def expand_T1(x: KElem | VElem | int, n: int = 8) -> SeriesT1:
    """First ``n`` coefficients of the expansion of ``x`` in powers of T - 1."""
    x = _as_kelem(x)
    if x.is_zero():
        return SeriesT1([0] * n)
    tn = x.st if x.st > 0 else 0
    td = -x.st if x.st < 0 else 0
    num = _t_coefficients((x.num * _mono(0, tn)).compose(_MV, _MT + 1), x.sv)
    den = _t_coefficients((x.den * _mono(0, td)).compose(_MV, _MT + 1), 0)
    n0, d0 = min(num), min(den)
    if n0 < d0:
        raise NegativeOrder(f"{x} has a pole of order {d0 - n0} at T = 1")
    a = [num.get(i, VElem(0)) for i in range(d0, d0 + n)]
    b = [den.get(i, VElem(0)) for i in range(d0, d0 + n)]
    return SeriesT1(a) / SeriesT1(b)


def series_sqrt(x: SeriesT1, branch: VElem | int) -> SeriesT1:
    """Square root of a series by Newton iteration, with constant term ``branch``."""
    branch = VElem(branch)
    if branch * branch != x[0]:
        raise BadBranch(f"branch {branch} does not square to {x[0]}")
    n = len(x)
    y = SeriesT1([branch] + [VElem(0)] * (n - 1))
    half = VElem(Fraction(1, 2))
    prec = 1
    while prec < n:
        prec = min(2 * prec, n)
        y = (y + x / y) * half
    return y


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_NAMES = {"v": lambda: KElem(VElem.vpow(1)), "T": lambda: KElem.T(1)}


def _eval_node(node):
    if isinstance(node, ast.Expression):
        return _eval_node(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, int):
        return KElem(node.value)
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]()
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        val = _eval_node(node.operand)
        return -val if isinstance(node.op, ast.USub) else val
    if isinstance(node, ast.BinOp):
        if isinstance(node.op, ast.Pow):
            exp = _eval_node(node.right)
            if exp.has_T() or exp.to_velem().shift or exp.to_velem().num.degree() > 0:
                raise ParseError("exponents must be integers")
            e = exp.to_velem().as_fraction()
            if e.denominator != 1:
                raise ParseError("exponents must be integers")
            return _eval_node(node.left) ** int(e)
        left, right = _eval_node(node.left), _eval_node(node.right)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        if isinstance(node.op, ast.Mult):
            return left * right
        if isinstance(node.op, ast.Div):
            return left / right
    raise ParseError(f"unsupported syntax: {ast.dump(node)}")


def parse_kelem(text: str) -> KElem:
    """Parse an expression in v and T, e.g. ``"(T-1)^2/(v+v^-1)"``.

    Accepts the canonical output of ``str`` for both element types.
    """
    src = text.replace("[", "(").replace("]", ")").replace("^", "**")
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"cannot parse {text!r}: {exc.msg}") from exc
    try:
        return _eval_node(tree)
    except ZeroDivisionError as exc:
        raise ParseError(f"division by zero in {text!r}") from exc


def parse_velem(text: str) -> VElem:
    x = parse_kelem(text)
    if x.has_T():
        raise ParseError(f"{text!r} depends on T")
    return x.to_velem()


V = VElem.vpow(1)
