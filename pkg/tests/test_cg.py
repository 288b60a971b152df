import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qforms.cg import (
    BadRange,
    SupportMismatch,
    cg_lowest,
    cg_norm,
    cg_norm_gram,
    cg_rho1_singular,
    cg_singular,
    check_link,
    d_coeffs,
    expand_product_basis,
    expand_product_basis_gram,
    hw_lw_vectors,
    linv_lowest,
    linv_lowest_unified,
    recombine,
    threej,
    transport_from_twisted,
    transport_to_twisted,
)
from qforms.coeff import VElem
from qforms.qcalc import vpow
from qforms.repn import E1, F1, K1, FiniteIrrep, Lmap, ModuleElem, Tensor, act, curlyL, lusztig_T

MNP = [(m, n, p) for m in range(6) for n in range(6) for p in range(min(m, n) + 1)]


@pytest.mark.parametrize("m, n, p", MNP)
def test_singular_and_lowest_vectors(m, n, p):
    x = cg_singular(m, n, p)
    assert act(E1, x).is_zero()
    assert act(K1, x) == x * vpow(m + n - 2 * p)
    assert act(F1, cg_lowest(m, n, p)).is_zero()


@pytest.mark.parametrize("m, n, p", MNP)
def test_lowest_is_bottom_of_the_string(m, n, p):
    from qforms.repn import F
    bottom = act(F(m + n - 2 * p), cg_singular(m, n, p))
    low = cg_lowest(m, n, p)
    ratios = {bottom.coeff(k) / c for k, c in low.terms.items()}
    assert set(bottom.terms) == set(low.terms)
    assert len(ratios) == 1


def test_threej_small_values():
    # singular vector of F_0 in F_1 (x) F_1 is u0 (x) u1 - v^-1... up to normalisation
    assert threej(1, 1, 1, 0, 1, 0) == vpow(-1)
    assert threej(1, 1, 1, 1, 0, 0) == VElem(-1)
    assert threej(1, 1, 0, 0, 0, 0) == VElem(1)
    assert threej(2, 1, 0, 1, 1, 0) == VElem(0)


def test_threej_bad_range():
    with pytest.raises(BadRange):
        threej(1, 1, 2, 0, 0, 0)
    with pytest.raises(BadRange):
        cg_singular(-1, 1, 0)


@pytest.mark.parametrize("m, n, p", [t for t in MNP if t[0] <= 4 and t[1] <= 4])
def test_norm_closed_form_matches_gram(m, n, p):
    for k in range(m + n - 2 * p + 1):
        assert cg_norm(m, n, p, k) == cg_norm_gram(m, n, p, k)


@pytest.mark.parametrize("m", range(4))
@pytest.mark.parametrize("n", range(4))
def test_expansion_inverts_cg_basis(m, n):
    for i in range(m + 1):
        for j in range(n + 1):
            closed = expand_product_basis(m, n, i, j)
            assert closed == expand_product_basis_gram(m, n, i, j)
            x = recombine(m, n, closed, lambda p: i + j - p, False)
            assert x == ModuleElem(x.parent, {(i, j): VElem(1)})
            tw = expand_product_basis(m, n, i, j, twisted=True)
            xt = recombine(m, n, tw, lambda p: n + i - j - p, True)
            assert xt == ModuleElem(xt.parent, {(i, j): VElem(1)})


@pytest.mark.parametrize("m, n, p", [t for t in MNP if t[1] <= t[0]])
def test_twisted_singular_is_proportional_to_transport(m, n, p):
    x = cg_rho1_singular(m, n, p)
    y = transport_to_twisted(cg_singular(m, n, p))
    assert act(E1, x).is_zero()
    assert act(E1, y).is_zero()
    assert set(x.terms) == set(y.terms)
    assert len({x.coeff(k) / c for k, c in y.terms.items()}) == 1


@pytest.mark.parametrize("m, n, p", MNP[:40])
def test_transport_round_trip(m, n, p):
    x = cg_singular(m, n, p)
    assert transport_from_twisted(transport_to_twisted(x)) == x


def test_twisted_display_needs_m_at_least_n():
    with pytest.raises(BadRange):
        cg_rho1_singular(1, 2, 0)


NPE = [(n, p, eps) for n in range(7) for p in range(n // 2 + 1) for eps in (1, -1)]


@pytest.mark.parametrize("n, p, eps", NPE)
def test_highest_and_lowest_vectors(n, p, eps):
    assert act(E1, hw_lw_vectors(n, p, "hw", eps)).is_zero()
    lw = hw_lw_vectors(n, p, "lw", eps)
    assert act(F1, lw).is_zero()
    assert curlyL(lw) == lw


@pytest.mark.parametrize("n, p, eps", NPE)
def test_inverse_L_on_lowest_vector(n, p, eps):
    d = Lmap(hw_lw_vectors(n, p, "lw", eps), True)
    assert d == linv_lowest(n, p, eps)
    assert d == linv_lowest_unified(n, p, eps)


def test_hw_lw_bad_arguments():
    with pytest.raises(BadRange):
        hw_lw_vectors(1, 1, "hw", 1)
    with pytest.raises(ValueError):
        hw_lw_vectors(2, 0, "hw", 0)
    with pytest.raises(ValueError):
        hw_lw_vectors(2, 0, "middle", 1)


@pytest.mark.parametrize("n", range(9))
def test_link_identity(n):
    for p in range(n // 2 + 1):
        for s in range(n - p + 1):
            assert check_link(n, p, s)


def test_link_range():
    with pytest.raises(BadRange):
        check_link(2, 2, 0)


@pytest.mark.parametrize("m", range(4))
@pytest.mark.parametrize("n", range(4))
def test_d_coefficients_match_direct_action(m, n):
    rng = random.Random(m * 10 + n)
    space = Tensor(FiniteIrrep(m), FiniteIrrep(n))
    for tot in range(m + n + 1):
        c = {(i, tot - i): VElem(rng.randint(-3, 3)) for i in range(m + 1) if 0 <= tot - i <= n}
        c = {k: x for k, x in c.items() if x}
        direct = lusztig_T("Tdoubleprime", 1, curlyL(ModuleElem(space, c), True))
        assert ModuleElem(space, d_coeffs(m, n, c)) == direct


def test_d_coefficients_need_single_weight():
    with pytest.raises(SupportMismatch):
        d_coeffs(1, 1, {(0, 0): VElem(1), (1, 0): VElem(1)})


@given(st.integers(0, 5), st.integers(0, 5), st.data())
def test_norm_is_a_power_of_v_times_bar_invariant(m, n, data):
    p = data.draw(st.integers(0, min(m, n)))
    k = data.draw(st.integers(0, m + n - 2 * p))
    e = p * (2 * p - 2 * m - 1) - (m + n - 2 * p - k) * k
    core = cg_norm(m, n, p, k) * vpow(-e)
    assert core
    assert core.bar() == core
