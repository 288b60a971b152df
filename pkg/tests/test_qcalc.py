import pytest
from hypothesis import given
from hypothesis import strategies as st

from qforms.coeff import KElem, VElem, expand_T1, ord_T1
from qforms.qcalc import (
    QSymbolTable,
    Unsupported,
    braced,
    check_chu_vandermonde,
    check_gauss,
    check_ma1,
    check_ma2,
    check_matrixentry,
    check_third_binomial,
    matrixentry_linear_term,
    qbinom,
    qfact,
    qint,
    tbinom,
    tfall,
    tsym,
    vpow,
)

v = vpow(1)


def test_small_quantum_integers():
    assert qint(0) == VElem(0)
    assert qint(1) == VElem(1)
    assert qint(2) == v + vpow(-1)
    assert qint(3) == vpow(2) + 1 + vpow(-2)
    assert qint(-2) == -qint(2)


@given(st.integers(-8, 8))
def test_qint_bar_invariant(m):
    assert qint(m).bar() == qint(m)


@given(st.integers(1, 9), st.integers(0, 9))
def test_qbinom_pascal(n, k):
    # [n, k] = v^k [n-1, k] + v^(k-n) [n-1, k-1]
    assert qbinom(n, k) == vpow(k) * qbinom(n - 1, k) + vpow(k - n) * qbinom(n - 1, k - 1)


@given(st.integers(0, 7), st.integers(0, 7))
def test_qbinom_symmetry(m, k):
    if k <= m:
        assert qbinom(m, k) == qbinom(m, m - k)


def test_qbinom_negative_lower_is_zero():
    assert qbinom(4, -1) == VElem(0)


def test_qbinom_known_value():
    assert qbinom(4, 2) == qint(4) * qint(3) / qint(2)


@given(st.integers(-5, 5))
def test_tsym_at_T_equal_one_is_qint(r):
    assert tsym(r).at_T1() == qint(r)


@given(st.integers(-4, 4))
def test_tsym_s_involution(r):
    assert tsym(r).s() == -tsym(-r)


@pytest.mark.parametrize("r, order", [(0, 1), (1, 0), (-1, 0), (3, 0)])
def test_tsym_orders(r, order):
    assert ord_T1(tsym(r)) == order


def test_tfall_and_tbinom():
    assert tfall(2, 2) == tsym(2) * tsym(1)
    assert tbinom(3, 2) == tsym(3) * tsym(2) / qfact(2)
    assert tbinom(3, -1) == KElem(0)


def test_braced():
    assert braced(0) == VElem(1)
    assert braced(2) == (v - vpow(-1)) * (vpow(2) - vpow(-2))


def test_tables_are_independent():
    a, b = QSymbolTable(), QSymbolTable()
    assert a.qbinom(6, 3) == b.qbinom(6, 3)
    assert a._cache is not b._cache


@pytest.mark.parametrize("j", range(0, 13, 3))
@pytest.mark.parametrize("variant", ["finite", "infinite"])
def test_gauss(j, variant):
    assert check_gauss(j, variant, 6).ok


def test_gauss_rejects_negative():
    with pytest.raises(Unsupported):
        check_gauss(-1)


@given(st.integers(-8, 8), st.integers(-8, 8), st.integers(0, 8), st.sampled_from([1, -1]))
def test_ma1_property(s, u, r, sgn):
    assert check_ma1(s, u, r, sgn).ok


@given(st.integers(-8, 8), st.integers(-8, 8), st.integers(0, 8), st.sampled_from([1, -1]))
def test_ma2_property(u, w, r, sgn):
    assert check_ma2(u, w, r, sgn).ok


def test_ma_negative_r_unsupported():
    with pytest.raises(Unsupported):
        check_ma1(1, 1, -1, 1)
    with pytest.raises(Unsupported):
        check_ma2(1, 1, -1, 1)


@given(st.integers(0, 10).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n))))
def test_third_binomial_property(nk):
    assert check_third_binomial(*nk).ok


@given(st.integers(0, 10).flatmap(lambda r: st.tuples(st.integers(0, r), st.just(r))))
def test_chu_vandermonde_property(kr):
    assert check_chu_vandermonde(*kr).ok


@pytest.mark.parametrize("r", range(1, 7))
def test_matrixentry(r):
    assert check_matrixentry(r).ok


def test_matrixentry_r1_value():
    # r - 2v/(v - v^-1) at r = 1 equals -(v + v^-1)/(v - v^-1)
    assert matrixentry_linear_term(1) == -(v + vpow(-1)) / (v - vpow(-1))


def test_failed_check_records_sides():
    from qforms.qcalc import _compare

    res = _compare("demo", {"x": 1}, VElem(1), VElem(2))
    assert not res
    assert res.record()["lhs"] == "(1*v^0)"
