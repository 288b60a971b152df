"""Quantum Clebsch-Gordan data for F_m (x) F_n and lowest/highest vectors in M (x) F_n."""

from __future__ import annotations

from functools import lru_cache

from .coeff import KElem, VElem
from .qcalc import braced, qbinom, qfact, qfall, sign, tfall, vpow
from .repn import (
    E1,
    F1,
    FiniteIrrep,
    ModuleElem,
    Tensor,
    Twist,
    Verma,
    VermaQuot,
    act,
    F,
)


class BadRange(ValueError):
    pass


class SupportMismatch(ValueError):
    pass


def _check_mnp(m: int, n: int, p: int) -> None:
    if m < 0 or n < 0 or not 0 <= p <= min(m, n):
        raise BadRange(f"need 0 <= p <= min(m, n), got m={m}, n={n}, p={p}")


def _tensor_space(m: int, n: int, twisted: bool = False) -> Tensor:
    right = Twist(FiniteIrrep(n), "rho1") if twisted else FiniteIrrep(n)
    return Tensor(FiniteIrrep(m), right)


# ---------------------------------------------------------------------------
# Singular and lowest vectors
# ---------------------------------------------------------------------------


def cg_singular(m: int, n: int, p: int) -> ModuleElem:
    """Highest-weight vector of the F_{m+n-2p} summand of F_m (x) F_n."""
    _check_mnp(m, n, p)
    terms = {}
    for k in range(p + 1):
        c = sign(k) * vpow((k - p) * (m - p - k + 1)) * qfall(n - p + k, k) / qfall(m, k)
        terms[(k, p - k)] = c
    return ModuleElem(_tensor_space(m, n), terms)


def cg_lowest(m: int, n: int, p: int) -> ModuleElem:
    """Lowest-weight vector of the F_{m+n-2p} summand."""
    _check_mnp(m, n, p)
    terms = {}
    for k in range(p + 1):
        c = (vpow(p * (n - m)) * sign(p + k) * vpow(-k * (n + k - 2 * p + 1))
             * qfall(n + k - p, k) / qfall(m, k))
        terms[(m - k, n + k - p)] = c
    return ModuleElem(_tensor_space(m, n), terms)


def rho1_iso(n: int, k: int) -> ModuleElem:
    """The isomorphism F_n^rho1 -> F_n on u_k: (-v)^-k u_{n-k}."""
    return FiniteIrrep(n).basis_vector(n - k) * (sign(k) * vpow(-k))


def transport_to_twisted(x: ModuleElem) -> ModuleElem:
    """Apply 1 (x) phi^-1 : F_m (x) F_n -> F_m (x) F_n^rho1."""
    par = x.parent
    n = par.right.m
    target = Tensor(par.left, Twist(par.right, "rho1"))
    return ModuleElem(target, {(i, n - l): c * sign(n - l) * vpow(n - l) for (i, l), c in x.terms.items()})


def transport_from_twisted(x: ModuleElem) -> ModuleElem:
    """Apply 1 (x) phi : F_m (x) F_n^rho1 -> F_m (x) F_n."""
    par = x.parent
    base = par.right.base
    target = Tensor(par.left, base)
    return ModuleElem(target, {(i, base.m - j): c * sign(j) * vpow(-j) for (i, j), c in x.terms.items()})


def cg_rho1_singular(m: int, n: int, p: int) -> ModuleElem:
    """The displayed highest-weight vector in F_m (x) F_n^rho1 (requires m >= n)."""
    _check_mnp(m, n, p)
    if m < n:
        raise BadRange("the twisted display assumes m >= n")
    terms = {}
    for k in range(p + 1):
        c = (sign(n - p) * qfact(n - p + k) * qfact(m - k) / (qfact(n - p) * qfact(m))
             * vpow((k - p) * (2 + m) + p * p - k * k + n))
        terms[(k, n - p + k)] = c
    return ModuleElem(_tensor_space(m, n, twisted=True), terms)


# ---------------------------------------------------------------------------
# 3j-symbols and norms
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _basis_vectors(m: int, n: int, p: int) -> tuple:
    """u^{(m+n-2p)}_k = F^(k) Phi(u^{(m+n-2p)}) for k = 0..m+n-2p."""
    top = cg_singular(m, n, p)
    return tuple(act(F(k), top) for k in range(m + n - 2 * p + 1))


def cg_basis_vector(m: int, n: int, p: int, k: int) -> ModuleElem:
    _check_mnp(m, n, p)
    if not 0 <= k <= m + n - 2 * p:
        raise BadRange(f"k={k} out of range")
    return _basis_vectors(m, n, p)[k]


def threej(m: int, n: int, p: int, i: int, j: int, k: int) -> VElem:
    """Coefficient of u_i (x) u_j in u^{(m+n-2p)}_k."""
    _check_mnp(m, n, p)
    if not (0 <= i <= m and 0 <= j <= n and 0 <= k <= m + n - 2 * p):
        raise BadRange("index out of range")
    if i + j != p + k:
        return VElem(0)
    return VElem(0) + _basis_vectors(m, n, p)[k].coeff((i, j))


def threej_table(m: int, n: int) -> dict:
    """All nonzero entries keyed by (m, n, p, i, j, k)."""
    out = {}
    for p in range(min(m, n) + 1):
        for k, vec in enumerate(_basis_vectors(m, n, p)):
            for (i, j), c in vec.terms.items():
                out[(m, n, p, i, j, k)] = c
    return out


def finite_norm(m: int, j: int) -> VElem:
    """(u_j, u_j) on F_m with (u_0, u_0) = 1."""
    return vpow(j * j - m * j) * qbinom(m, j)


def product_pairing(x: ModuleElem, y: ModuleElem) -> VElem:
    """The tensor product of the normalized forms on F_m and F_n."""
    left, right = x.parent.left, x.parent.right
    right = getattr(right, "base", right)
    acc = VElem(0)
    for (i, j), c in x.terms.items():
        d = y.terms.get((i, j))
        if d:
            acc = acc + c * d * finite_norm(left.m, i) * finite_norm(right.m, j)
    return acc


def cg_hw_norm(m: int, n: int, p: int) -> VElem:
    _check_mnp(m, n, p)
    return (vpow(p * (2 * p - 2 * m - 1)) * qfact(n) * qfact(m + n - p + 1) * qfact(m - p)
            / (qfact(m) * qfact(p) * qfact(m + n - 2 * p + 1) * qfact(n - p)))


def cg_norm(m: int, n: int, p: int, k: int) -> VElem:
    """Closed form for <u^{(m+n-2p)}_k, u^{(m+n-2p)}_k>."""
    _check_mnp(m, n, p)
    if not 0 <= k <= m + n - 2 * p:
        raise BadRange("k out of range")
    return (vpow(p * (2 * p - 2 * m - 1) - (m + n - 2 * p - k) * k)
            * qbinom(n, p) * qbinom(m + n - p + 1, p) * qbinom(m + n - 2 * p, k) / qbinom(m, p))


def cg_norm_gram(m: int, n: int, p: int, k: int) -> VElem:
    """The same norm computed from the 3j table and the factor norms."""
    vec = cg_basis_vector(m, n, p, k)
    return product_pairing(vec, vec)


# ---------------------------------------------------------------------------
# Inverse expansions
# ---------------------------------------------------------------------------


def expand_product_basis(m: int, n: int, i: int, j: int, twisted: bool = False) -> dict[int, VElem]:
    """Closed-form coefficients c_p with u_i (x) u_j = sum_p c_p u^{(m+n-2p)}_{k(p)}.

    Untwisted: k(p) = i + j - p.  Twisted (second factor through rho1, basis transported
    by 1 (x) phi^-1): k(p) = n + i - j - p.
    """
    if not (0 <= i <= m and 0 <= j <= n):
        raise BadRange("index out of range")
    out = {}
    for p in range(min(m, n) + 1):
        hw = cg_hw_norm(m, n, p)
        if twisted:
            k = n + i - j - p
            if not 0 <= k <= m + n - 2 * p:
                continue
            c = (sign(j) * vpow(m * (n - j) + n * i - 2 * i * (n - j) - j)
                 * qbinom(m, i) * qbinom(n, n - j) * vpow(-p * (m + n - p)) / hw
                 * qfact(n + i - j - p) * qfact(m - i + j - p) / qfact(m + n - 2 * p)
                 * threej(m, n, p, i, n - j, k))
        else:
            k = i + j - p
            if not 0 <= k <= m + n - 2 * p:
                continue
            c = (vpow(m * j + n * i - 2 * i * j) * qbinom(m, i) * qbinom(n, j)
                 * qfact(i + j - p) * qfact(m + n - i - j - p)
                 / (vpow(p * (m + n - p)) * hw * qfact(m + n - 2 * p))
                 * threej(m, n, p, i, j, k))
        if c:
            out[p] = c
    return out


def expand_product_basis_gram(m: int, n: int, i: int, j: int) -> dict[int, VElem]:
    """c_p from orthogonality: c_p <u_k, u_k> = 3j * (u_i,u_i)(u_j,u_j)."""
    out = {}
    for p in range(min(m, n) + 1):
        k = i + j - p
        if not 0 <= k <= m + n - 2 * p:
            continue
        c = threej(m, n, p, i, j, k) * finite_norm(m, i) * finite_norm(n, j) / cg_norm_gram(m, n, p, k)
        if c:
            out[p] = c
    return out


def twisted_basis_vector(m: int, n: int, p: int, k: int) -> ModuleElem:
    """Transported basis vector (1 (x) phi^-1) u^{(m+n-2p)}_k of F_m (x) F_n^rho1."""
    return transport_to_twisted(cg_basis_vector(m, n, p, k))


def recombine(m: int, n: int, coeffs: dict[int, VElem], k_of_p, twisted: bool) -> ModuleElem:
    space = _tensor_space(m, n, twisted)
    out = ModuleElem(space, {})
    for p, c in coeffs.items():
        vec = twisted_basis_vector(m, n, p, k_of_p(p)) if twisted else cg_basis_vector(m, n, p, k_of_p(p))
        out = out + vec * c
    return out


# ---------------------------------------------------------------------------
# Vectors in M (x) F_n and M_pi (x) F_n
# ---------------------------------------------------------------------------


def _t_inv_fall(k: int) -> KElem:
    """[T^-1; k]_(k)."""
    return tfall(k, k).s()


def _verma_f_divided(k: int) -> ModuleElem:
    """F^(k) w_{0,-1} in Verma(0)."""
    return act(F(k), Verma(0).basis_vector(-1))


def hw_lw_vectors(n: int, p: int, side: str, eps: int) -> ModuleElem:
    """Highest-weight vectors w_{+-r, +-r-1} in M (x) F_n or lowest-weight m_{+-r, +-r+1} in M_pi (x) F_n."""
    r = n - 2 * p
    if n < 0 or p < 0 or r < 0:
        raise BadRange("need n - 2p >= 0")
    if eps not in (1, -1):
        raise ValueError("eps must be +1 or -1")
    fin = FiniteIrrep(n)
    T = KElem.T
    if side == "hw":
        space = Tensor(Verma(0), fin)
        out = ModuleElem(space, {})
        top, first = (p, n - p) if eps == 1 else (n - p, p)
        for k in range(top + 1):
            c = qfall(first + k, k) * vpow(-k * k) * T(k) / _t_inv_fall(k)
            vec = _verma_f_divided(k)
            for idx, d in vec.terms.items():
                out = out + ModuleElem(space, {(idx, top - k): c * d})
        return out
    if side == "lw":
        space = Tensor(VermaQuot(0), fin)
        sigma = p if eps == 1 else n - p
        terms = {}
        for k in range(n - sigma + 1):
            c = (sign(k) * qfall(sigma + k, k) * vpow(-k * (-eps * r + 2 * k + 1))
                 / (T(k) * tfall(k, k)))
            terms[(k, sigma + k)] = c
        return ModuleElem(space, terms)
    raise ValueError(f"unknown side {side!r}")


def sigma_of(eps: int, n: int, p: int) -> int:
    return p if eps == 1 else n - p


def a_coeff(eps: int, n: int, p: int, k: int) -> KElem:
    sigma = sigma_of(eps, n, p)
    return sign(k) * qfall(sigma + k, k) / (KElem.T(k) * tfall(k, k))


def linv_lowest(n: int, p: int, eps: int) -> ModuleElem:
    """Closed form for L^-1 applied to the lowest-weight vector m_{eps r, eps r + 1}.

    Both branches carry the alternating sign (-1)^s that the recurrence
    B_s[T;s] + B_{s-1} T^-1 v^(...) [.] = 0 forces.
    """
    r = n - 2 * p
    if r < 0 or p < 0:
        raise BadRange("need n - 2p >= 0")
    space = Tensor(VermaQuot(0), FiniteIrrep(n))
    T = KElem.T
    terms = {}
    if eps == 1:
        pre = vpow(-2 * (n - p) * (p + 1))
        for s in range(n - p + 1):
            terms[(s, p + s)] = pre * sign(s) * vpow(s * (1 - r)) * qfall(p + s, s) / (T(s) * tfall(s, s))
    else:
        pre = vpow(-2 * p * (n - p + 1))
        for s in range(p + 1):
            terms[(s, n - p + s)] = pre * sign(s) * vpow(s * (1 + r)) * qfall(n - p + s, s) / (T(s) * tfall(s, s))
    return ModuleElem(space, terms)


def linv_lowest_unified(n: int, p: int, eps: int) -> ModuleElem:
    """The sigma/a-notation form; the sign (-1)^s is already inside a_coeff."""
    r = n - 2 * p
    sigma = sigma_of(eps, n, p)
    space = Tensor(VermaQuot(0), FiniteIrrep(n))
    pre = vpow(-2 * (n - sigma) * (sigma + 1))
    terms = {}
    for s in range(n - sigma + 1):
        terms[(s, sigma + s)] = pre * vpow(s * (1 - eps * r)) * a_coeff(eps, n, p, s)
    return ModuleElem(space, terms)


def link_sides(n: int, p: int, s: int) -> tuple[VElem, VElem]:
    r = n - 2 * p
    lhs = vpow(s * (1 - r) + 2 * (p - n) * (p + 1)) * qfall(p + s, s)
    rhs = VElem(0)
    for k in range(s, n - p + 1):
        num = sign(k + s) * qfall(p + k, k) * qbinom(n - p - s, k - s) * braced(k - s)
        e2 = 2 * k * (r - 2 * k - 1) + (k - s) * (3 * k + s - 1)
        rhs = rhs + num / qfact(k - s) * vpow(e2 // 2)
    return lhs, rhs


def check_link(n: int, p: int, s: int) -> bool:
    if not (0 <= s <= n - p and n - 2 * p >= 0):
        raise BadRange("need 0 <= s <= n - p and n >= 2p")
    lhs, rhs = link_sides(n, p, s)
    return lhs == rhs


# ---------------------------------------------------------------------------
# The d-coefficient transform
# ---------------------------------------------------------------------------


def d_coeffs(m: int, n: int, c: dict) -> dict:
    """Coefficients of T''_1 curlyL^-1 applied to sum c_{ij} u_i (x) u_j."""
    sums = {i + j for i, j in c}
    if len(sums) > 1:
        raise SupportMismatch("input must be supported on a single i + j")
    if not c:
        return {}
    total = sums.pop()
    out = {}
    for r in range(m + 1):
        s = m + n - total - r
        if not 0 <= s <= n:
            continue
        acc = VElem(0)
        for pp in range(0, min(r, n - s) + 1):
            cij = c.get((m - r + pp, n - s - pp))
            if not cij:
                continue
            e2 = -pp * (pp - 1) + 2 * pp * (2 * pp + m - n - 2 * r + 2 * s)
            acc = acc + (sign(pp) * vpow(e2 // 2) * braced(pp) * qbinom(r, pp) * qbinom(n - s, pp)) * cij
        d = sign(r + s) * vpow(r * (r - m - 1) + s * (s - n - 1)) * acc
        if d:
            out[(r, s)] = d
    return out
