"""Invariant bilinear forms, maps into the harmonics, the sharp operation and DVR tools."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

from .cg import (
    hw_lw_vectors,
    cg_hw_norm,
    expand_product_basis_gram,
    threej,
)
from .coeff import INF, KElem, SeriesT1, VElem, expand_T1, ord_T1, series_sqrt
from .qcalc import braced, qbinom, qfact, qfall, qint, sign, tbinom, tfall, tsym, vpow
from .repn import (
    E1,
    F1,
    K1,
    KINV,
    AlgElem,
    E,
    F,
    FiniteIrrep,
    GenPower,
    K,
    ModuleDesc,
    ModuleElem,
    Tensor,
    Twist,
    Verma,
    VermaLoc,
    VermaQuot,
    Lmap,
    act,
    casimir,
    casimir_scalar,
    loc_to_quot,
    lusztig_T_alg,
    lusztig_T_closed,
    rho1,
    varrho_image,
)


class NotInvariant(ValueError):
    pass


class DomainMismatch(ValueError):
    pass


class NotSelfSharp(ValueError):
    pass


class NotInR(ValueError):
    pass


class BothZero(ValueError):
    pass


class BadRange(ValueError):
    pass


def _k(x) -> KElem:
    return x if isinstance(x, KElem) else KElem(x)


# ---------------------------------------------------------------------------
# Form handles
# ---------------------------------------------------------------------------


class BilinearForm:
    """A bilinear form given by its values on basis pairs (memoized)."""

    def __init__(self, left: ModuleDesc, right: ModuleDesc,
                 pair: Callable[[object, object], object], provenance: str):
        self.left = left
        self.right = right
        self.provenance = provenance
        self._pair = pair
        self._cache: dict = {}

    def pair_basis(self, i, j) -> KElem:
        key = (i, j)
        try:
            return self._cache[key]
        except KeyError:
            pass
        value = _k(self._pair(i, j))
        self._cache[key] = value
        return value

    def __call__(self, x: ModuleElem, y: ModuleElem) -> KElem:
        if x.parent != self.left or y.parent != self.right:
            raise DomainMismatch(f"{self.provenance} form lives on {self.left} x {self.right}")
        acc = KElem(0)
        for i, c in x.terms.items():
            for j, d in y.terms.items():
                val = self.pair_basis(i, j)
                if val:
                    acc = acc + c * d * val
        return acc

    def gram(self, left_indices: Sequence, right_indices: Sequence) -> list[list[KElem]]:
        return [[self.pair_basis(i, j) for j in right_indices] for i in left_indices]

    def invariance_failures(self, depth: int, gens: Sequence[GenPower] = (E1, F1, K1)) -> list:
        """Basis pairs (g, i, j) where phi(g a_i, a_j) != phi(a_i, varrho(g) a_j)."""
        bad = []
        lefts = self.left.basis(depth)
        rights = self.right.basis(depth)
        for g in gens:
            rg = varrho_image(g)
            for i in lefts:
                gi = _act_vec(g, self.left.basis_vector(i))
                for j in rights:
                    lhs = self(gi, self.right.basis_vector(j)) if gi else KElem(0)
                    rhs = self(self.left.basis_vector(i), rg.apply(self.right.basis_vector(j)))
                    if lhs != rhs:
                        bad.append((str(g), i, j))
        return bad

    def is_symmetric(self, depth: int) -> bool:
        idx = self.left.basis(depth)
        return all(self.pair_basis(i, j) == self.pair_basis(j, i) for i in idx for j in idx)


def _act_vec(g: GenPower, x: ModuleElem) -> ModuleElem:
    return AlgElem.word(g).apply(x)


def _cyclic_data(module: ModuleDesc):
    """Generator index and a rule idx -> (coefficient, X^(k)) with a_idx = coefficient * X^(k) a_gen."""
    if isinstance(module, FiniteIrrep):
        return 0, lambda j: (VElem(1), F(j))
    if isinstance(module, VermaQuot):
        lam = module.lam
        return 0, lambda k: (sign(k) * vpow(k * (lam + k)) * KElem.T(k), E(k))
    if isinstance(module, Verma) and not isinstance(module, VermaLoc):
        def rule(j):
            k = module.k_of(j)
            return qfact(k), F(k)
        return module.lam - 1, rule
    raise DomainMismatch(f"no cyclic description for {module}")


def cyclic_form(module: ModuleDesc, value, provenance: str) -> BilinearForm:
    """The varrho-invariant form on a cyclic module with phi(gen, gen) = value."""
    gen, rule = _cyclic_data(module)
    value = _k(value)

    def pair(i, j):
        if module.weight(i) != module.weight(j):
            return KElem(0)
        coef, g = rule(i)
        y = varrho_image(g).apply(module.basis_vector(j))
        return coef * value * y.coeff(gen)

    return BilinearForm(module, module, pair, provenance)


def shapovalov(lam: int) -> BilinearForm:
    """Shapovalov form on Verma(lam) normalized by phi(w, w) = 1."""
    return cyclic_form(Verma(lam), 1, "shapovalov")


def finite_form(m: int) -> BilinearForm:
    """The normalized invariant form on F_m with (u_0, u_0) = 1."""
    return cyclic_form(FiniteIrrep(m), 1, "finite")


def product_form(first: BilinearForm, second: BilinearForm) -> BilinearForm:
    left = Tensor(first.left, second.left)
    right = Tensor(first.right, second.right)

    def pair(i, j):
        a = first.pair_basis(i[0], j[0])
        if not a:
            return KElem(0)
        return a * second.pair_basis(i[1], j[1])

    return BilinearForm(left, right, pair, "product")


def lift_constant(lam: int) -> KElem:
    """phi_pi(eta, eta) / phi(w, w) for the Verma module with highest weight T v^(lam-1)."""
    return vpow(-abs(lam)) * tsym(0) / tsym(lam)


def quotient_form(lam: int, value=1) -> BilinearForm:
    """phi_pi on VermaQuot(lam) with phi_pi(eta, eta) = lift_constant(lam) * value."""
    return cyclic_form(VermaQuot(lam), lift_constant(lam) * _k(value), "quotient")


def lift_form(phi: BilinearForm, check_depth: int = 2) -> tuple[BilinearForm, BilinearForm]:
    """Return (phi_F, phi_pi) for a form on a Verma module."""
    mod = phi.left
    if phi.right != mod or not isinstance(mod, Verma) or isinstance(mod, VermaLoc):
        raise DomainMismatch("lift_form expects a form on a single Verma module")
    if phi.invariance_failures(check_depth):
        raise NotInvariant("the input form is not varrho-invariant")
    hw = mod.lam - 1
    phi_pi = quotient_form(mod.lam, phi.pair_basis(hw, hw))
    phi_pi.provenance = "quotient"
    loc = VermaLoc(mod.lam)

    def pair(i, j):
        a = loc_to_quot(loc.basis_vector(i))
        b = loc_to_quot(loc.basis_vector(j))
        if not a or not b:
            return KElem(0)
        return phi_pi(a, b)

    return BilinearForm(loc, loc, pair, "lifted"), phi_pi


# ---------------------------------------------------------------------------
# Maps into the harmonics
# ---------------------------------------------------------------------------


def _ek(r: int) -> AlgElem:
    return AlgElem.word(E(r), K(-r))


def ad_F(y: AlgElem) -> AlgElem:
    """ad F (y) = F y K - y F K."""
    return AlgElem.word(F1) * y * AlgElem.word(K1) - y * AlgElem.word(F1, K1)


@lru_cache(maxsize=None)
def ad_F_divided(a: int, b: int, method: str = "display") -> AlgElem:
    """ad F^(a) (E^(b) K^-b), by iterating ad F or by the closed sum over m."""
    if method == "iterate":
        y = _ek(b)
        for _ in range(a):
            y = ad_F(y)
        return y * qfact(a).inverse()
    if method == "display":
        out = AlgElem()
        for m in range(a + 1):
            c = sign(a - m) * vpow(-(a - 1) * (a - m))
            out = out + AlgElem.word(F(m), E(b), K(-b), F(a - m), K(a), coeff=c)
        return out
    raise ValueError(f"unknown method {method!r}")


def _check_beta_range(m: int, n: int, r: int) -> None:
    if m < 0 or n < 0 or (m + n) % 2:
        raise BadRange("need m, n >= 0 with m + n even")
    if not abs(m - n) <= 2 * r <= m + n:
        raise BadRange(f"need |m-n| <= 2r <= m+n, got m={m}, n={n}, r={r}")


def _check_ij(m: int, n: int, i: int, j: int) -> None:
    if not (0 <= i <= m and 0 <= j <= n):
        raise BadRange("index out of range")


def twisted_coefficient(m: int, n: int, r: int, i: int, j: int) -> VElem:
    """Coefficient of the transported u^{(2r)}_{d+r} in u_i (x) u_j of F_m (x) F_n^rho1."""
    p = (m + n) // 2 - r
    c = expand_product_basis_gram(m, n, i, n - j).get(p)
    if not c:
        return VElem(0)
    return sign(j) * vpow(-j) * c


@lru_cache(maxsize=None)
def beta_alg(m: int, n: int, r: int, i: int, j: int, method: str = "display") -> AlgElem:
    """beta^{m,n}_{2r}(u_i (x) u_j) as an algebra element."""
    _check_beta_range(m, n, r)
    _check_ij(m, n, i, j)
    a = i - j + (n - m) // 2 + r
    if not 0 <= a <= 2 * r:
        return AlgElem()
    c = twisted_coefficient(m, n, r, i, j)
    if not c:
        return AlgElem()
    return ad_F_divided(a, r, method) * c


@dataclass(frozen=True)
class BetaMap:
    """beta = sum_r coeff_r beta^{m,n}_{2r}."""

    m: int
    n: int
    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(sorted((r, _k(c)) for r, c in dict(self.coeffs).items())))
        for r, _ in self.coeffs:
            _check_beta_range(self.m, self.n, r)

    @classmethod
    def single(cls, m: int, n: int, r: int, coeff=1) -> "BetaMap":
        return cls(m, n, ((r, coeff),))

    def s(self) -> "BetaMap":
        return BetaMap(self.m, self.n, tuple((r, c.s()) for r, c in self.coeffs))

    def alg(self, i: int, j: int) -> AlgElem:
        out = AlgElem()
        for r, c in self.coeffs:
            if c:
                out = out + beta_alg(self.m, self.n, r, i, j) * c
        return out

    def to_json(self) -> dict:
        return {"m": self.m, "n": self.n, "coeffs": {str(r): str(c) for r, c in self.coeffs}}


@lru_cache(maxsize=None)
def _rho1_beta(m: int, n: int, r: int, i: int, j: int, tprime: bool) -> AlgElem:
    x = beta_alg(m, n, r, i, j)
    if tprime:
        x = lusztig_T_alg("Tprime", -1, x)
    return rho1(x)


def beta_oracle(m: int, n: int, r: int, i: int, j: int, vec: ModuleElem, tprime: bool = False) -> ModuleElem:
    """rho1(beta^{m,n}_{2r}(u_i (x) u_j)) (optionally after T'_-1) applied to a vector."""
    return _rho1_beta(m, n, r, i, j, tprime).apply(vec)


def _beta_prefactor(m: int, n: int, r: int, i: int, j: int) -> VElem:
    d = i - j + (n - m) // 2
    a = d + r
    p = (m + n) // 2 - r
    if not (0 <= a <= 2 * r and 0 <= p <= min(m, n)):
        return VElem(0)
    e = m * (n - j) + n * i - 2 * i * (n - j) - j + r * r - (m + n) ** 2 // 4
    tj = threej(m, n, p, i, n - j, a)
    return (sign(j) * vpow(e) * qbinom(m, i) * qbinom(n, j) * tj
            / (cg_hw_norm(m, n, p) * qbinom(2 * r, a)))


def beta_on_fminus(m: int, n: int, r: int, i: int, j: int, c: int, lam: int = 0,
                   tprime: bool = False) -> ModuleElem:
    """Closed form for rho1(beta(u_i (x) u_j)) F^(-c) eta on VermaQuot(lam)."""
    _check_beta_range(m, n, r)
    _check_ij(m, n, i, j)
    d = i - j + (n - m) // 2
    if r < max(abs(m - n) // 2, abs(d)):
        raise BadRange("r below the admissible range")
    mod = VermaQuot(lam)
    pre = _beta_prefactor(m, n, r, i, j)
    acc = KElem(0)
    if not tprime:
        target = d + c
        for l in range(d + r + 1):
            acc = acc + (sign(r - l) * vpow(l * (r - d + 1)) * qbinom(d + c, d + r - l)
                         * tbinom(lam + l + c, r) * qbinom(l + c, l))
        acc = acc * (KElem.monomial(1, 2 * lam + 2 + d + 4 * c, 2) ** (-d))
    else:
        target = c - d
        for l in range(d + r + 1):
            acc = acc + (sign(r - l) * vpow(l * (r - d + 1)) * tbinom(lam + c, l)
                         * tbinom(lam + r + c - l, d + r - l) * qbinom(r + c - l, r))
        acc = acc * (KElem.monomial(1, 2 * c + lam, 1) ** d)
    if target < 0:
        # a positive divided power of F kills eta
        return mod.zero()
    return ModuleElem(mod, {target: pre * acc})


def first_beta_cor(m: int, r: int, i: int, c: int, lam: int = 0, printed: bool = False) -> ModuleElem:
    """Closed form for rho1(beta^{m,m}_{2r}(u_i (x) u_i)) F^(c) zeta on Verma(lam).

    The default exponents are the ones forced by specializing beta_on_fminus to
    m = n, i = j and by the direct commutation on a highest-weight vector.
    ``printed=True`` keeps the alternative exponents 2i(i-m-1) + r^2 and
    (l-r)(r-1); these disagree with the ad-expansion for i > 0 or r >= 2.
    """
    _check_beta_range(m, m, r)
    _check_ij(m, m, i, i)
    mod = Verma(lam)
    p = m - r
    e_pre = 2 * i * (i - m - 1) + r * r if printed else 2 * i * (i - m) - i + r * r
    pre = (sign(i) * vpow(e_pre) * qbinom(m, i) ** 2
           * threej(m, m, p, i, m - i, r) / (cg_hw_norm(m, m, p) * qbinom(2 * r, r)))
    mu = lam - 1
    acc = KElem(0)
    for l in range(r + 1):
        e_sum = (l - r) * (r - 1) if printed else (r - l) * (r + 1)
        acc = acc + (sign(l - r) * vpow(e_sum) * tbinom(mu - c + r - l, r - l)
                     * qbinom(l + c, r) * tbinom(mu - c, l))
    idx = mod.index_of(c)
    return ModuleElem(mod, {idx: pre * acc * qfact(c).inverse()})


def second_beta_cor(m: int, n: int, r: int, i: int, j: int, k: int, s: int) -> ModuleElem:
    """Closed form for rho1(beta(u_i (x) u_j)) u^{(k)}_s on F_k."""
    _check_beta_range(m, n, r)
    _check_ij(m, n, i, j)
    d = i - j + (n - m) // 2
    if r < max(abs(m - n) // 2, abs(d)):
        raise BadRange("r below the admissible range")
    if not 0 <= s <= k:
        raise BadRange("s out of range")
    mod = FiniteIrrep(k)
    a = d + r
    p = (m + n) // 2 - r
    e = (m * (n - j) + n * i - 2 * i * (n - j) - j + r * r - (m + n) ** 2 // 4
         + (j - i - (n - m) // 2) * (k - 2 * s + 1))
    pre = (sign(i + (n - m) // 2) * vpow(e) * qbinom(m, i) * qbinom(n, j)
           * threej(m, n, p, i, n - j, a) / (cg_hw_norm(m, n, p) * qbinom(2 * r, a)))
    acc = VElem(0)
    for q in range(a + 1):
        acc = acc + (sign(q) * vpow(-(d - r - 1) * q) * qbinom(k + q - s, q)
                     * qbinom(r + s - q, s - q) * qbinom(k + d - s, a - q))
    target = s - d
    val = pre * acc
    if not 0 <= target <= k:
        return mod.zero()
    return ModuleElem(mod, {target: val})


# ---------------------------------------------------------------------------
# Induced forms
# ---------------------------------------------------------------------------


def induced_form(beta: BetaMap, phi: BilinearForm, via_rmatrix: bool = False) -> BilinearForm:
    """chi(x (x) e, y (x) f) = phi(x, rho1(beta(e (x) f)) y) on (M (x) F_m) x (N (x) F_n)."""
    left = Tensor(phi.left, FiniteIrrep(beta.m))
    right = Tensor(phi.right, FiniteIrrep(beta.n))

    def pair(a, b):
        (x, e), (y, f) = a, b
        acc = KElem(0)
        for r, c in beta.coeffs:
            if not c:
                continue
            image = _rho1_beta(beta.m, beta.n, r, e, f, False).apply(phi.right.basis_vector(y))
            if image:
                acc = acc + c * phi(phi.left.basis_vector(x), image)
        return acc

    form = BilinearForm(left, right, pair, "induced")
    if not via_rmatrix:
        return form
    from .repn import rmatrix_inv

    def pair_r(a, b):
        xa = rmatrix_inv(ModuleElem(Tensor(FiniteIrrep(beta.m), phi.left), {(a[1], a[0]): VElem(1)}))
        xb = rmatrix_inv(ModuleElem(Tensor(FiniteIrrep(beta.n), phi.right), {(b[1], b[0]): VElem(1)}))
        return form(xa, xb)

    return BilinearForm(Tensor(FiniteIrrep(beta.m), phi.left), Tensor(FiniteIrrep(beta.n), phi.right),
                        lambda a, b: pair_r(a, b), "induced-rmatrix")


# ---------------------------------------------------------------------------
# The cycle and the sharp operation
# ---------------------------------------------------------------------------


def cycle_psi(x: ModuleElem) -> ModuleElem:
    """Psi : VermaQuot(0) -> Verma(0), F^(-k) eta -> F^(k) w, s-semilinear in coefficients."""
    if x.parent != VermaQuot(0):
        raise DomainMismatch("the cycle is defined on VermaQuot(0)")
    mod = Verma(0)
    return ModuleElem(mod, {mod.index_of(k): _k(c).s() * qfact(k).inverse() for k, c in x.terms.items()})


def cycle_psi_coefficient(k: int) -> KElem:
    """Psi(F^-k eta) = coefficient * F^k w."""
    return sign(k) * vpow(-k * k) * KElem.T(k) / (qfact(k) * tfall(-1, k))


def psi_bar(a: ModuleElem) -> ModuleElem:
    """(Psi (x) s T''_1) L^-1 on VermaQuot(0) (x) F_m."""
    par = a.parent
    if not (isinstance(par, Tensor) and par.left == VermaQuot(0) and isinstance(par.right, FiniteIrrep)):
        raise DomainMismatch("psi_bar expects VermaQuot(0) (x) F_m")
    m = par.right.m
    target = Tensor(Verma(0), FiniteIrrep(m))
    y = Lmap(a, inverse=True)
    out: dict = {}
    mod = Verma(0)
    for (k, j), c in y.terms.items():
        sc = _k(c).s() * qfact(k).inverse()
        for jj, d in lusztig_T_closed("Tdoubleprime", 1, m, j).terms.items():
            key = (mod.index_of(k), jj)
            val = out.get(key, KElem(0)) + sc * d
            if val:
                out[key] = val
            else:
                out.pop(key, None)
    return ModuleElem(target, out)


def sharp_pair(chi_pi: BilinearForm, a: ModuleElem, b: ModuleElem) -> KElem:
    """s(chi_pi(L(a (x) b))): the value chi^sharp(Psi_bar a, Psi_bar b)."""
    if a.parent != chi_pi.left or b.parent != chi_pi.right:
        raise DomainMismatch("inputs must live on the quotient-side domains of chi_pi")
    twisted = Twist(b.parent, "rho1")
    ab = ModuleElem(Tensor(a.parent, twisted), {(i, j): c * d for i, c in a.terms.items()
                                                for j, d in b.terms.items()})
    acc = KElem(0)
    for (i, j), c in Lmap(ab).terms.items():
        val = chi_pi.pair_basis(i, j)
        if val:
            acc = acc + c * val
    return acc.s()


@dataclass
class PairVerdict:
    k: int
    j: int
    lhs: str
    rhs: str
    equal: bool

    def to_json(self) -> dict:
        out = {"k": self.k, "j": self.j, "equal": self.equal}
        if not self.equal:
            out["lhs"], out["rhs"] = self.lhs, self.rhs
        return out


def verify_main_theorem(m: int, n: int, r: int, depth: int, coeff=1) -> dict:
    """Compare chi^sharp_beta with chi_{s beta} on the spanning pairs for beta = coeff * beta^{m,n}_{2r}."""
    beta = BetaMap.single(m, n, r, coeff)
    chi_pi = induced_form(beta, quotient_form(0))
    chi_s = induced_form(beta.s(), shapovalov(0))
    a = ModuleElem(Tensor(VermaQuot(0), FiniteIrrep(m)), {(0, 0): VElem(1)})
    psi_a = psi_bar(a)
    verdicts = []
    for k in range(depth + 1):
        for j in range(n + 1):
            b = ModuleElem(Tensor(VermaQuot(0), FiniteIrrep(n)), {(k, j): VElem(1)})
            lhs = sharp_pair(chi_pi, a, b)
            rhs = chi_s(psi_a, psi_bar(b))
            verdicts.append(PairVerdict(k, j, str(lhs), str(rhs), lhs == rhs))
    return {
        "m": m, "n": n, "r": r, "depth": depth,
        "pairs": [v.to_json() for v in verdicts],
        "ok": all(v.equal for v in verdicts),
    }


# ---------------------------------------------------------------------------
# The Clebsch-Gordan identity behind the main theorem
# ---------------------------------------------------------------------------


def _threej_or_zero(m, n, p, i, j, k) -> VElem:
    if not (0 <= i <= m and 0 <= j <= n and 0 <= k <= m + n - 2 * p):
        return VElem(0)
    return threej(m, n, p, i, j, k)


def cg_identity_sides(m: int, n: int, sigma: int, l: int, r: int) -> tuple[VElem, VElem]:
    p = (m + n) // 2 - r
    e0 = (2 * n + n * n - 2 * m - m * m) // 4 + n - 2 * sigma + r * (r + 1)
    lhs = VElem(0)
    rhs = VElem(0)
    for k in range(n - sigma + 1):
        common = braced(1) ** k * qfall(sigma + k, k) * qfact(r + k) / qfact(k) * qbinom(n, sigma + k)
        t1 = _threej_or_zero(m, n, p, (m - n) // 2 + sigma, n - k - sigma, r - k)
        if t1 and r - k >= 0:
            lhs = lhs + sign(k) * vpow(e0 - k * (k + 2 * l + 3) // 2) * common * qbinom(r - k, l) * t1
        t2 = _threej_or_zero(m, n, p, (m + n) // 2 - sigma, sigma + k, r + k)
        if t2 and r - k >= 0:
            rhs = rhs + vpow(k * (3 + k - 2 * l + 4 * sigma - 2 * n + 2 * r) // 2) * common * qbinom(r - k, l - k) * t2
    return lhs, sign((m + n) // 2 + r) * rhs


def check_cg_identity(m: int, n: int, sigma: int, l: int, r: int) -> bool:
    if (m + n) % 2 or not 0 <= sigma <= n or not abs(m - n) <= 2 * r <= m + n or not 0 <= l <= r:
        raise BadRange("need m+n even, 0<=sigma<=n, |m-n|<=2r<=m+n, 0<=l<=r")
    lhs, rhs = cg_identity_sides(m, n, sigma, l, r)
    return lhs == rhs


# ---------------------------------------------------------------------------
# Gamma constants
# ---------------------------------------------------------------------------


def series_s(x: SeriesT1) -> SeriesT1:
    """Apply T -> T^-1 to a series in t = T - 1, i.e. substitute t -> -t/(1+t)."""
    n = len(x)
    one_plus_t_inv = SeriesT1([sign(k) for k in range(n)])
    sub = SeriesT1([0, -1] + [0] * (n - 2)) * one_plus_t_inv if n > 1 else SeriesT1([0])
    out = SeriesT1([0] * n)
    power = SeriesT1([1] + [0] * (n - 1))
    for c in x.coeffs:
        if c:
            out = out + power * c
        power = power * sub
    return out


def alpha_const(r: int) -> VElem:
    acc = VElem(0)
    for s in range(1, r + 1):
        acc = acc + vpow(s) / qint(s)
    return VElem(Fraction(r, 2)) - acc / braced(1)


def _t_inv_fall(r: int) -> KElem:
    """[T^-1; r]_(r)."""
    return tfall(r, r).s()


@dataclass
class GammaData:
    r: int
    order: int
    a_r: SeriesT1
    a_minus_r: SeriesT1
    b_r_plus: SeriesT1
    b_r_minus: SeriesT1
    alpha_r: VElem
    matrix: tuple
    u_plus: SeriesT1
    u_minus: SeriesT1

    def checks(self) -> dict[str, bool]:
        r, n = self.r, self.order
        fr = qfact(r)
        out = {}
        out["a_square"] = self.a_r * self.a_r == expand_T1((fr * _t_inv_fall(r)).inverse(), n)
        out["a_branch"] = self.a_r[0] == sign(r + 1) * fr.inverse()
        out["a_minus_is_s"] = self.a_minus_r == series_s(self.a_r)
        for eps, b in ((1, self.b_r_plus), (-1, self.b_r_minus)):
            tag = "plus" if eps == 1 else "minus"
            rhs = fr / (_t_inv_fall(r) if eps == 1 else tfall(r, r))
            out[f"b_square_{tag}"] = b * b == expand_T1(rhs, n)
            out[f"b_branch_{tag}"] = b[0] == VElem(-1)
            out[f"b_congruence_{tag}"] = (b[0], b[1]) == (VElem(-1), -eps * self.alpha_r)
            out[f"b_from_a_{tag}"] = b == (self.a_r if eps == 1 else self.a_minus_r) * fr * sign(r)
        out["alpha_matches_matrixentry"] = 2 * self.alpha_r == expand_T1(fr / tfall(r, r), 2)[1]
        one, zero = VElem(1), VElem(0)
        out["matrix"] = self.matrix == ((one, -self.alpha_r * braced(1)), (zero, one))
        out["u_units"] = self.u_plus[0] == one and self.u_minus[0] == one
        return out

    def to_json(self) -> dict:
        return {
            "r": self.r,
            "order": self.order,
            "a_r": self.a_r.to_strings(),
            "a_minus_r": self.a_minus_r.to_strings(),
            "b_r_plus": self.b_r_plus.to_strings(),
            "b_r_minus": self.b_r_minus.to_strings(),
            "alpha_r": str(self.alpha_r),
            "matrix": [[str(x) for x in row] for row in self.matrix],
            "checks": self.checks(),
        }


def gamma_constants(r: int, order: int = 8) -> GammaData:
    if r < 1:
        raise BadRange("need r >= 1")
    if order < 2:
        raise BadRange("series order must be at least 2")
    fr = qfact(r)
    a_r = series_sqrt(expand_T1((fr * _t_inv_fall(r)).inverse(), order), sign(r + 1) * fr.inverse())
    a_minus = series_sqrt(expand_T1((fr * tfall(r, r)).inverse(), order), sign(r + 1) * fr.inverse())
    b_plus = series_sqrt(expand_T1(fr / _t_inv_fall(r), order), -1)
    b_minus = series_sqrt(expand_T1(fr / tfall(r, r), order), -1)
    # Gamma-bar on L/(T-1)L in the basis ([T;0]w_+, z): column images
    diag = -b_plus[0]
    corner = (b_plus[1] - b_minus[1]) * braced(1) * VElem(Fraction(1, 2))
    matrix = ((diag, corner), (VElem(0), diag))
    t_inv_r = expand_T1(KElem.T(-r), order)
    u_plus = t_inv_r * expand_T1(fr / _t_inv_fall(r), order)
    u_minus = t_inv_r * expand_T1(fr / tfall(r, r), order)
    return GammaData(r, order, a_r, a_minus, b_plus, b_minus, alpha_const(r), matrix, u_plus, u_minus)


# ---------------------------------------------------------------------------
# Matrices over R = Q(v)[T] localized at T = 1
# ---------------------------------------------------------------------------

PI = KElem.T(1) - 1


def _ord(x) -> int | float:
    return ord_T1(_k(x))


def mat_mul(a: list, b: list) -> list:
    n, m, p = len(a), len(b), len(b[0]) if b else 0
    out = []
    for i in range(n):
        row = []
        for j in range(p):
            acc = KElem(0)
            for k in range(m):
                if a[i][k] and b[k][j]:
                    acc = acc + a[i][k] * b[k][j]
            row.append(acc)
        out.append(row)
    return out


def mat_identity(n: int) -> list:
    return [[KElem(1) if i == j else KElem(0) for j in range(n)] for i in range(n)]


def mat_transpose(a: list) -> list:
    return [list(col) for col in zip(*a)] if a else []


def mat_det(a: list) -> KElem:
    """Determinant by Gaussian elimination over the fraction field."""
    m = [[_k(x) for x in row] for row in a]
    n = len(m)
    det = KElem(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c]), None)
        if piv is None:
            return KElem(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det = det * m[c][c]
        inv = m[c][c].inverse()
        for r in range(c + 1, n):
            if m[r][c]:
                f = m[r][c] * inv
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return det


def mat_inverse(a: list) -> list:
    n = len(a)
    m = [[_k(x) for x in row] + ident for row, ident in zip(a, mat_identity(n))]
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c]), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        m[c], m[piv] = m[piv], m[c]
        inv = m[c][c].inverse()
        m[c] = [x * inv for x in m[c]]
        for r in range(n):
            if r != c and m[r][c]:
                f = m[r][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return [row[n:] for row in m]


def mat_ord(a: list) -> int | float:
    return min((_ord(x) for row in a for x in row), default=INF)


@dataclass
class Diagonalization:
    U: list
    D: list
    V: list
    exponents: list
    units: list | None = None

    def to_json(self) -> dict:
        out = {
            "exponents": [e if e != INF else "inf" for e in self.exponents],
            "U": [[str(x) for x in row] for row in self.U],
            "D": [[str(x) for x in row] for row in self.D],
            "V": [[str(x) for x in row] for row in self.V],
        }
        if self.units is not None:
            out["units"] = [str(u) for u in self.units]
        return out


def _check_in_R(gram: list) -> list:
    out = [[_k(x) for x in row] for row in gram]
    for row in out:
        for x in row:
            if _ord(x) < 0:
                raise NotInR(f"entry {x} has a pole at T = 1")
    return out


def _min_entry(a: list, start: int):
    best = None
    for i in range(start, len(a)):
        for j in range(start, len(a[0])):
            o = _ord(a[i][j])
            if o != INF and (best is None or o < best[0]):
                best = (o, i, j)
    return best


def diagonalize_form(gram: list, symmetric: bool = False) -> Diagonalization:
    """Greedy minimal-order pivoting: U gram V = diag(pi^d_1, ..., 0) with U, V invertible over R."""
    a = _check_in_R(gram)
    if symmetric:
        return _diagonalize_symmetric(a)
    n, m = len(a), len(a[0]) if a else 0
    U, V = mat_identity(n), mat_identity(m)
    exps: list = []
    for t in range(min(n, m)):
        best = _min_entry(a, t)
        if best is None:
            break
        d, i, j = best
        a[t], a[i] = a[i], a[t]
        U[t], U[i] = U[i], U[t]
        for row in a:
            row[t], row[j] = row[j], row[t]
        for row in V:
            row[t], row[j] = row[j], row[t]
        piv_inv = a[t][t].inverse()
        for r in range(t + 1, n):
            if a[r][t]:
                f = a[r][t] * piv_inv
                a[r] = [x - f * y for x, y in zip(a[r], a[t])]
                U[r] = [x - f * y for x, y in zip(U[r], U[t])]
        for c in range(t + 1, m):
            if a[t][c]:
                f = a[t][c] * piv_inv
                for row in a:
                    row[c] = row[c] - f * row[t]
                for row in V:
                    row[c] = row[c] - f * row[t]
        unit_inv = (PI ** d) * piv_inv
        a[t] = [x * unit_inv for x in a[t]]
        U[t] = [x * unit_inv for x in U[t]]
        exps.append(d)
    exps += [INF] * (min(n, m) - len(exps))
    return Diagonalization(U, a, V, exps)


def _diagonalize_symmetric(a: list) -> Diagonalization:
    n = len(a)
    B = mat_identity(n)
    exps: list = []
    units: list = []
    for t in range(n):
        best = _min_entry(a, t)
        if best is None:
            break
        d, i, j = best
        if i != j:
            diag = [k for k in range(t, n) if _ord(a[k][k]) == d]
            if diag:
                i = j = diag[0]
            else:
                # replace e_i by e_i + e_j: the new diagonal entry has order d
                a[i] = [x + y for x, y in zip(a[i], a[j])]
                for row in a:
                    row[i] = row[i] + row[j]
                B[i] = [x + y for x, y in zip(B[i], B[j])]
        a[t], a[i] = a[i], a[t]
        for row in a:
            row[t], row[i] = row[i], row[t]
        B[t], B[i] = B[i], B[t]
        piv_inv = a[t][t].inverse()
        for r in range(t + 1, n):
            if a[r][t]:
                f = a[r][t] * piv_inv
                a[r] = [x - f * y for x, y in zip(a[r], a[t])]
                for row in a:
                    row[r] = row[r] - f * row[t]
                B[r] = [x - f * y for x, y in zip(B[r], B[t])]
        exps.append(d)
        units.append(a[t][t] / PI ** d)
    exps += [INF] * (n - len(exps))
    return Diagonalization(B, a, mat_transpose(B), exps, units)


def is_unit(x) -> bool:
    return _ord(x) == 0


# ---------------------------------------------------------------------------
# Filtration types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FiltrationType:
    a: int | float
    b: int | float
    c: int | float

    def as_tuple(self) -> tuple:
        return (self.a, self.b, self.c)

    def to_json(self) -> list:
        return [x if x != INF else "inf" for x in self.as_tuple()]


class FiltrationMismatch(AssertionError):
    pass


def weight_space_matrix(b_plus, b_minus) -> list:
    bp, bm = _k(b_plus), _k(b_minus)
    t0 = tsym(0)
    return [[bp + bm, t0 * bp], [t0 * bp, t0 * t0 * bp]]


def filtration_case(b_plus, b_minus) -> tuple[str, FiltrationType]:
    """The three-case analysis on ord(b+), ord(b-), ord(b+ + b-)."""
    bp, bm = _k(b_plus), _k(b_minus)
    if not bp and not bm:
        raise BothZero("b+ and b- are both zero")
    op, om, osum = _ord(bp), _ord(bm), _ord(bp + bm)
    if min(op, om) < 0:
        raise NotInR("b+ and b- must lie in R")
    return case_from_orders(op, om, osum)


def case_from_orders(op, om, osum) -> tuple[str, FiltrationType]:
    """Case analysis on the orders of b+, b- and b+ + b-; valid for any integer orders."""
    if op == om and op < osum:
        return "a", FiltrationType(op + 1, op + 1, op + 1)
    if osum == op and op <= om:
        return "b", FiltrationType(op, op + 1, om + 2)
    if osum == om and om <= op:
        return "c", FiltrationType(om, op + 1, op + 2)
    raise FiltrationMismatch("orders fit none of the three cases")


def filtration_direct(b_plus, b_minus) -> FiltrationType:
    """a = ord M, c = ord det M - ord M, b = order of the form on the highest-weight space."""
    bp, bm = _k(b_plus), _k(b_minus)
    if not bp and not bm:
        raise BothZero("b+ and b- are both zero")
    mat = weight_space_matrix(bp, bm)
    a = mat_ord(mat)
    c = _ord(mat_det(mat)) - a
    b = _ord(tsym(0) * bp)
    return FiltrationType(a, b, c)


def filtration_type(b_plus, b_minus) -> FiltrationType:
    _, case = filtration_case(b_plus, b_minus)
    direct = filtration_direct(b_plus, b_minus)
    if case != direct:
        raise FiltrationMismatch(f"case analysis {case} != direct {direct}")
    return case


# ---------------------------------------------------------------------------
# Orthogonal decomposition of (M (x) F, phi) over R
# ---------------------------------------------------------------------------


def _content_order(x: ModuleElem) -> int | float:
    return min((_ord(c) for _, c in x), default=INF)


def primitive(x: ModuleElem) -> ModuleElem:
    """Rescale by a power of T - 1 so the coordinates lie in R with one of them a unit."""
    o = _content_order(x)
    if o == INF:
        raise ValueError("zero vector has no primitive rescaling")
    return x * (PI ** (-o)) if o else x


def _weight_indices(n: int, r: int) -> list:
    """Basis of M (x) F_n at weight T v^(-r-1): pairs F^k w (x) u_i with k + i = (n + r)/2."""
    top = (n + r) // 2
    verma = Verma(0)
    return [(verma.index_of(top - i), i) for i in range(top + 1)]


def _coords(x: ModuleElem, indices: list) -> list:
    return [_k(x.coeff(i)) for i in indices]


def _casimir_matrix(space: Tensor, indices: list) -> list:
    """Column j holds the coordinates of Omega applied to basis vector j."""
    cols = [_coords(casimir(space.basis_vector(i)), indices) for i in indices]
    return mat_transpose(cols)


def _eigen_projector(C: list, eigen, others: list) -> list:
    n = len(C)
    P = mat_identity(n)
    for c in others:
        shifted = [[C[i][j] - (c if i == j else 0) for j in range(n)] for i in range(n)]
        scale = _k(eigen - c).inverse()
        P = [[x * scale for x in row] for row in mat_mul(shifted, P)]
    return P


def _mat_add(a: list, b: list) -> list:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def _image_basis(P: list) -> list:
    """An R-basis (as coordinate columns) of P R^N."""
    diag = diagonalize_form(P)
    u_inv = mat_inverse(diag.U)
    out = []
    for t, d in enumerate(diag.exponents):
        if d == INF:
            break
        out.append([row[t] * PI ** d for row in u_inv])
    return out


def _solve2(cols: list, target: list) -> tuple:
    """Solve target = x cols[0] + y cols[1] using a nonsingular 2x2 minor."""
    n = len(target)
    for i in range(n):
        for j in range(i + 1, n):
            det = cols[0][i] * cols[1][j] - cols[1][i] * cols[0][j]
            if det:
                x = (target[i] * cols[1][j] - cols[1][i] * target[j]) / det
                y = (cols[0][i] * target[j] - target[i] * cols[0][j]) / det
                return x, y
    raise ValueError("columns are dependent")


@dataclass
class Summand:
    n: int
    r: int
    kind: str
    basis: list
    filtration: dict | None
    certificates: dict

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "r": self.r,
            "kind": self.kind,
            "basis": [[str(c) for c in col] for col in self.basis],
            "filtration": self.filtration,
            "certificates": self.certificates,
        }


def _block_analysis(n: int, p: int, phi: BilinearForm) -> Summand:
    r = n - 2 * p
    space = Tensor(Verma(0), FiniteIrrep(n))
    if r == 0:
        h = primitive(hw_lw_vectors(n, p, "hw", 1))
        certs = {
            "highest_weight": act(E1, h).is_zero(),
            "form_order": _ord(phi(h, h)),
        }
        return Summand(n, 0, "M", [_coords(h, _weight_indices(n, 0))], None, certs)

    indices = _weight_indices(n, r)
    C = _casimir_matrix(space, indices)
    shifts = list(range(n, -r - 1, -2))
    eig = {s: casimir_scalar((1, s - 1)) for s in shifts}
    proj = {s: _eigen_projector(C, eig[s], [eig[t] for t in shifts if t != s]) for s in shifts}
    block = _mat_add(proj[r], proj[-r])
    lattice = _image_basis(block)

    h_plus = primitive(hw_lw_vectors(n, p, "hw", 1))
    y_plus = primitive(act(F(r), h_plus))
    y_minus = primitive(hw_lw_vectors(n, p, "hw", -1))
    yp, ym = _coords(y_plus, indices), _coords(y_minus, indices)

    # pick a partner l with {y_plus, l} an R-basis of the block lattice
    cp = _solve2(lattice, yp)
    partner = lattice[1] if _ord(cp[0]) == 0 else lattice[0]
    alpha, beta = _solve2([yp, ym], partner)
    t0 = tsym(0)
    z = [x / (alpha * t0) for x in partner]
    w_plus = y_plus * t0.inverse()
    w_minus = y_minus * (beta / (alpha * t0))
    b_plus, b_minus = phi(w_plus, w_plus), phi(w_minus, w_minus)

    def vec(col):
        return ModuleElem(space, dict(zip(indices, col)))

    gram = [[phi(vec(a), vec(b)) for b in (z, yp)] for a in (z, yp)]
    smith = diagonalize_form(gram).exponents
    direct = FiltrationType(smith[0], _ord(phi(h_plus, h_plus)), smith[1])
    orders = (_ord(b_plus), _ord(b_minus), _ord(b_plus + b_minus))
    try:
        case_name, case = case_from_orders(*orders)
        case_json = case.to_json()
    except FiltrationMismatch:
        case_name, case, case_json = "none", None, None

    others = []
    for size in sorted({abs(s) for s in shifts} - {r}):
        group = [proj[s] for s in sorted({size, -size}) if s in proj]
        total = group[0]
        for extra in group[1:]:
            total = _mat_add(total, extra)
        others.append(total)
    rest = [vec(col) for P in others for col in _image_basis(P)]
    orth = all(not phi(vec(a), b) and not phi(b, vec(a)) for a in (yp, z) for b in rest)
    all_cols = [yp, z] + [_coords(b, indices) for b in rest]
    certs = {
        "block_projector_integral": mat_ord(block) >= 0,
        "eigen_projector_order": mat_ord(proj[r]),
        "non_split": mat_ord(proj[r]) < 0,
        "alpha_order": _ord(alpha),
        "b_orders": list(orders),
        "orthogonal_to_other_blocks": orth,
        "transition_unit": is_unit(mat_det(mat_transpose(all_cols))),
        "gram_matches_weight_space_matrix": gram == weight_space_matrix(b_plus, b_minus),
        "case": case_name,
        "case_matches_direct": case is not None and case == direct,
    }
    filt = {"case_analysis": case_json, "direct": direct.to_json()}
    return Summand(n, r, "P", [yp, z], filt, certs)


def orthogonal_decomposition(finite_dims: Sequence[int], sharp_sign: int | None) -> list[Summand]:
    """Split M (x) (F_n1 + F_n2 + ...) with the product form into orthogonal M- and P-type summands.

    The form is the orthogonal sum over the F_nj of Shapovalov (x) finite, so each F_nj is
    treated on its own; inside it the summands are cut out by Casimir eigenprojectors.
    """
    if sharp_sign not in (1, -1):
        raise NotSelfSharp("a declared sharp sign of +1 or -1 is required")
    out = []
    for n in finite_dims:
        if n < 0:
            raise BadRange("finite dimensions must be nonnegative")
        phi = product_form(shapovalov(0), finite_form(n))
        for p in range(n // 2 + 1):
            out.append(_block_analysis(n, p, phi))
    return out
