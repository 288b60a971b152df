"""Quantum integers, binomials, the [T;r] family and identity checkers."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Any, Callable

from .coeff import KElem, VElem, expand_T1, ord_T1

V = VElem.vpow(1)
_VINV = VElem.vpow(-1)
_ONE = VElem(1)


class Unsupported(ValueError):
    """Raised for parameters outside the range where an identity is asserted."""


class QSymbolTable:
    """Memoized q-symbols.  Each instance owns its caches, so workers can hold their own."""

    def __init__(self):
        self._cache: dict[tuple, Any] = {}
        self._lock = threading.Lock()

    def _memo(self, key: tuple, compute: Callable[[], Any]):
        try:
            return self._cache[key]
        except KeyError:
            pass
        value = compute()
        with self._lock:
            self._cache.setdefault(key, value)
        return value

    # -- Q(v) symbols -----------------------------------------------------
    def qint(self, m: int) -> VElem:
        """[m] = (v^m - v^-m)/(v - v^-1)."""
        def compute():
            if m < 0:
                return -self.qint(-m)
            return VElem.laurent({m - 1 - 2 * i: 1 for i in range(m)})
        return self._memo(("qint", m), compute)

    def qfall(self, m: int, n: int) -> VElem:
        """[m]_(n) = [m][m-1]...[m-n+1]."""
        if n < 0:
            raise ValueError("qfall needs n >= 0")

        def compute():
            if n == 0:
                return _ONE
            return self.qfall(m, n - 1) * self.qint(m - n + 1)
        return self._memo(("qfall", m, n), compute)

    def qfact(self, m: int) -> VElem:
        if m < 0:
            raise ValueError("qfact needs m >= 0")
        return self.qfall(m, m)

    def qbinom(self, m: int, n: int) -> VElem:
        """Quantum binomial; zero for n < 0, any integer m."""
        if n < 0:
            return VElem(0)
        return self._memo(("qbinom", m, n), lambda: self.qfall(m, n) / self.qfact(n))

    def braced(self, n: int) -> VElem:
        """{n} = prod_{a=1}^{n} (v^a - v^-a)."""
        if n < 0:
            raise ValueError("braced needs n >= 0")

        def compute():
            if n == 0:
                return _ONE
            return self.braced(n - 1) * VElem.laurent({n: 1, -n: -1})
        return self._memo(("braced", n), compute)

    # -- the [T;r] family -------------------------------------------------
    def tsym(self, r: int) -> KElem:
        """[T;r] = (v^r T - v^-r T^-1)/(v - v^-1)."""
        def compute():
            num = KElem.from_terms({(r, 1): 1, (-r, -1): -1})
            return num / VElem.laurent({1: 1, -1: -1})
        return self._memo(("tsym", r), compute)

    def tfall(self, r: int, j: int) -> KElem:
        """[T;r]_(j) = [T;r][T;r-1]...[T;r-j+1]."""
        if j < 0:
            raise ValueError("tfall needs j >= 0")

        def compute():
            if j == 0:
                return KElem(1)
            return self.tfall(r, j - 1) * self.tsym(r - j + 1)
        return self._memo(("tfall", r, j), compute)

    def trise(self, r: int, j: int) -> KElem:
        """[T;r]^(j) = [T;r+1][T;r+2]...[T;r+j]."""
        if j < 0:
            raise ValueError("trise needs j >= 0")
        return self.tfall(r + j, j)

    def tbinom(self, r: int, j: int) -> KElem:
        if j < 0:
            return KElem(0)
        return self._memo(("tbinom", r, j), lambda: self.tfall(r, j) / self.qfact(j))


DEFAULT_TABLE = QSymbolTable()
qint = DEFAULT_TABLE.qint
qfall = DEFAULT_TABLE.qfall
qfact = DEFAULT_TABLE.qfact
qbinom = DEFAULT_TABLE.qbinom
braced = DEFAULT_TABLE.braced
tsym = DEFAULT_TABLE.tsym
tfall = DEFAULT_TABLE.tfall
trise = DEFAULT_TABLE.trise
tbinom = DEFAULT_TABLE.tbinom


def vpow(k: int) -> VElem:
    return VElem.vpow(k)


def sign(k: int) -> int:
    return -1 if k % 2 else 1


# ---------------------------------------------------------------------------
# Identity checkers
# ---------------------------------------------------------------------------


@dataclass
class CheckResult:
    identity: str
    params: dict
    ok: bool
    lhs: str = ""
    rhs: str = ""
    details: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok

    def record(self) -> dict:
        out = {"identity": self.identity, "params": self.params, "ok": self.ok}
        if not self.ok:
            out["lhs"], out["rhs"] = self.lhs, self.rhs
            if self.details:
                out["details"] = self.details
        return out


def _compare(identity: str, params: dict, lhs, rhs) -> CheckResult:
    if lhs == rhs:
        return CheckResult(identity, params, True)
    return CheckResult(identity, params, False, str(lhs), str(rhs))


def _poly_mul(a: list, b: list, cap: int | None = None) -> list:
    n = len(a) + len(b) - 1
    if cap is not None:
        n = min(n, cap + 1)
    out = [VElem(0)] * n
    for i, x in enumerate(a):
        if not x:
            continue
        for j, y in enumerate(b):
            if i + j >= n:
                break
            if y:
                out[i + j] = out[i + j] + x * y
    return out


def check_gauss(j: int, variant: str = "finite", z_degree: int = 6) -> CheckResult:
    """Gauss binomial theorem as a polynomial identity in z (or series for 'infinite')."""
    if j < 0:
        raise Unsupported("j must be nonnegative")
    params = {"j": j, "variant": variant, "z_degree": z_degree}
    if variant == "finite":
        lhs = [_ONE]
        for l in range(1, j + 1):
            lhs = _poly_mul(lhs, [_ONE, -vpow(2 * (l - 1))])
        rhs = [sign(k) * qbinom(j, k) * vpow(k * (j - 1)) for k in range(j + 1)]
    elif variant == "infinite":
        lhs = [_ONE] + [VElem(0)] * z_degree
        for l in range(1, j + 1):
            geometric = [vpow(2 * (l - 1) * i) for i in range(z_degree + 1)]
            lhs = _poly_mul(lhs, geometric, z_degree)
        rhs = [sign(k) * qbinom(-j, k) * vpow(k * (j - 1)) for k in range(z_degree + 1)]
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return _compare("gauss", params, tuple(lhs), tuple(rhs))


def ma1_sides(s: int, u: int, r: int, sgn: int) -> tuple[VElem, VElem]:
    lhs = qbinom(s - u, r)
    rhs = VElem(0)
    for p in range(0, r + 1):
        term = qbinom(u, p) * qbinom(s - p, r - p)
        if term:
            rhs = rhs + sign(p) * vpow(sgn * (p * (s - u - r + 1) + r * u)) * term
    return lhs, rhs


def check_ma1(s: int, u: int, r: int, sgn: int) -> CheckResult:
    if sgn not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if r < 0:
        raise Unsupported("r must be nonnegative")
    return _compare("ma1", {"s": s, "u": u, "r": r, "sign": sgn}, *ma1_sides(s, u, r, sgn))


def ma2_sides(u: int, w: int, r: int, sgn: int) -> tuple[VElem, VElem]:
    lhs = qbinom(u + w + r - 1, r)
    rhs = VElem(0)
    for p in range(0, r + 1):
        term = qbinom(u + p - 1, p) * qbinom(w + r - p - 1, r - p)
        if term:
            rhs = rhs + vpow(sgn * (p * (u + w) - r * u)) * term
    return lhs, rhs


def check_ma2(u: int, w: int, r: int, sgn: int) -> CheckResult:
    if sgn not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if r < 0:
        raise Unsupported("r must be nonnegative")
    return _compare("ma2", {"u": u, "w": w, "r": r, "sign": sgn}, *ma2_sides(u, w, r, sgn))


def check_third_binomial(n: int, k: int) -> CheckResult:
    if not 0 <= k <= n:
        raise Unsupported("need 0 <= k <= n")
    lhs = vpow(k * (n + 1 - k)) * tfall(2 * k - n - 1, k)
    rhs = KElem(0)
    for j in range(k + 1):
        coef = sign(j) * vpow(j * (n - 2 * k + 1)) * qbinom(k, j) * qfall(n - k + j, j)
        rhs = rhs + coef * KElem.T(-j) * tfall(k, k - j)
    return _compare("third_binomial", {"n": n, "k": k}, lhs, rhs)


def check_chu_vandermonde(k: int, r: int) -> CheckResult:
    if not 0 <= k <= r:
        raise Unsupported("need 0 <= k <= r")
    lhs = KElem(0)
    for l in range(k + 1):
        lhs = lhs + sign(l) * vpow(l * (r - k + 1)) * tbinom(k, l) * tbinom(r + k - l, k - l)
    rhs = vpow(-k * k) * KElem.T(-k) * qbinom(r, k)
    return _compare("chu_vandermonde", {"k": k, "r": r}, lhs, rhs)


def matrixentry_linear_term(r: int) -> VElem:
    """r - (2/(v - v^-1)) * sum_{k=1}^{r} v^k/[k]."""
    acc = VElem(0)
    for k in range(1, r + 1):
        acc = acc + vpow(k) / qint(k)
    return VElem(r) - 2 * acc / braced(1)


def check_matrixentry(r: int) -> CheckResult:
    if r < 1:
        raise Unsupported("need r >= 1")
    series = expand_T1(qfact(r) / tfall(r, r), 2)
    lhs = (series[0], series[1])
    rhs = (_ONE, matrixentry_linear_term(r))
    return _compare("matrixentry", {"r": r}, lhs, rhs)


def tsym_order(r: int) -> int:
    return ord_T1(tsym(r))
