"""Rank-two examples: solve for the coefficients r_0, r_2, ... of the map beta from paired values.

Only pairing values enter; no rank-two algebra is constructed.  The coefficient rows come
from the closed form of rho_1 beta on (u_i, u_i) applied to the highest-weight vector,
scaled by the gauge f(zeta, -1)^-2 of the twisted R-matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .coeff import KElem, VElem
from .forms import first_beta_cor, mat_det, mat_inverse
from .qcalc import braced, qbinom, qint, tbinom, tsym, vpow
from .repn import Verma, f_value


class SingularSystem(ArithmeticError):
    pass


def qbeta_sym(d: int, r: int, vdeg: int) -> KElem:
    """[T^d; r]_beta = (v_b^r T^d - v_b^-r T^-d)/(v_b - v_b^-1) with v_b = v^vdeg."""
    if vdeg < 1:
        raise ValueError("vdeg must be at least 1")
    num = KElem.monomial(1, vdeg * r, d) - KElem.monomial(1, -vdeg * r, -d)
    return num / VElem.laurent({vdeg: 1, -vdeg: -1})


@dataclass
class Rank2Input:
    case: str
    pairing_values: list
    f_gauge: KElem
    vbeta_degree: int

    def __post_init__(self):
        unknowns = {"sl3": 2, "sp4": 3}[self.case]
        if len(self.pairing_values) != unknowns:
            raise ValueError(f"{self.case} needs {unknowns} pairing values")


@dataclass
class Rank2Solution:
    case: str
    variant: str
    m: int
    coefficients: list
    matrix: list
    rhs: list
    residuals: list
    printed_rows_diff: list = field(default_factory=list)
    printed_solution_diff: list = field(default_factory=list)

    @property
    def residual_zero(self) -> bool:
        return all(not r for r in self.residuals)

    def to_json(self) -> dict:
        return {
            "case": self.case,
            "variant": self.variant,
            "coefficients": {f"r{2 * k}": str(c) for k, c in enumerate(self.coefficients)},
            "matrix": [[str(x) for x in row] for row in self.matrix],
            "rhs": [str(x) for x in self.rhs],
            "residual_zero": self.residual_zero,
            "printed_rows_diff": self.printed_rows_diff,
            "printed_solution_diff": self.printed_solution_diff,
        }


def _gauge(m: int, i: int) -> KElem:
    """f at (weight of u_i in F_m, weight of the highest-weight vector)."""
    return f_value(m - 2 * i, -1)


def coefficient_matrix(m: int) -> list:
    """Row i, column k: f(m - 2i, -1)^-2 times rho_1 beta^{m,m}_{2k}(u_i, u_i) on the top vector."""
    top = Verma(0).index_of(0)
    rows = []
    for i in range(m + 1):
        g = _gauge(m, i)
        scale = (g * g).inverse()
        rows.append([scale * first_beta_cor(m, k, i, 0, 0).coeff(top) for k in range(m + 1)])
    return rows


def _solve(matrix: list, rhs: list) -> list:
    if not mat_det(matrix):
        raise SingularSystem("coefficient matrix is singular")
    inv = mat_inverse(matrix)
    return [sum((a * b for a, b in zip(row, rhs)), KElem(0)) for row in inv]


def _residuals(matrix: list, sol: list, rhs: list) -> list:
    return [sum((a * x for a, x in zip(row, sol)), KElem(0)) - b for row, b in zip(matrix, rhs)]


def _diff(label: str, computed, printed) -> dict | None:
    if computed == printed:
        return None
    ratio = computed / printed if printed else None
    return {"entry": label, "computed": str(computed), "printed": str(printed),
            "ratio": str(ratio) if ratio is not None else "printed is zero"}


def _diffs(pairs: list) -> list:
    return [d for d in (_diff(*p) for p in pairs) if d is not None]


# ---------------------------------------------------------------------------
# sl(3)
# ---------------------------------------------------------------------------


def sl3_input() -> Rank2Input:
    T = KElem.T
    v = vpow(1)
    first = v * T(1) * tsym(0)
    second = first + vpow(2) * T(3) * tsym(-1)
    return Rank2Input("sl3", [first, second], f_value(1, -1), 1)


def sl3_printed_rows() -> list:
    """Coefficient rows as displayed, before the gauge factor."""
    return [[qint(2).inverse(), vpow(1) * tsym(-1) / qint(2)]]


def sl3_printed_solution(f11) -> list:
    T = KElem.T
    f2 = f11 * f11
    r0 = f2 * (T(2) * (T(1) + T(-1)) * tsym(0) + vpow(1) * T(5) * tsym(-1))
    r2 = -f2 * T(2) * (braced(1) * tsym(0) + T(3))
    return [r0, r2]


def solve_sl3() -> Rank2Solution:
    data = sl3_input()
    matrix = coefficient_matrix(1)
    sol = _solve(matrix, data.pairing_values)
    g = _gauge(1, 0)
    rows = [[x * g * g for x in matrix[0]]]
    row_diff = _diffs([(f"row0[{k}]", rows[0][k], sl3_printed_rows()[0][k]) for k in range(2)])
    sol_diff = _diffs([(f"r{2 * k}", sol[k], p) for k, p in enumerate(sl3_printed_solution(data.f_gauge))])
    return Rank2Solution("sl3", "pairing", 1, sol, matrix, data.pairing_values,
                         _residuals(matrix, sol, data.pairing_values), row_diff, sol_diff)


# ---------------------------------------------------------------------------
# sp(4)
# ---------------------------------------------------------------------------


def sp4_input(first_v_power: int = 3) -> Rank2Input:
    """Pairing values; the top one is v^k T^2 [T^2;1]_b with k = 3 (pairing display) or 4."""
    T = KElem.T
    tb1, tb2, tb3 = qbeta_sym(2, 1, 2), qbeta_sym(2, 2, 2), qbeta_sym(2, 3, 2)
    t1 = tbinom(-1, 1)
    t2 = tbinom(-1, 2)
    first = vpow(first_v_power) * T(2) * tb1
    second = vpow(1) * T(2) * qint(2) * tb1 + vpow(6) * T(5) * tsym(-1)
    third = T(4) * (vpow(4) * (T(-2) - T(-1) * t1 + t2) * tb1
                    + vpow(5) * (T(-1) - vpow(1) * tsym(-2)) * tsym(-1) * tb2
                    + vpow(6) * t2 * tb3)
    return Rank2Input("sp4", [first, second, third], f_value(2, -1), 2)


def sp4_printed_rows() -> list:
    """Coefficient rows as displayed, with the gauge written as f(2,-1)^-2 times a monomial."""
    T = KElem.T
    t1, t2 = tbinom(-1, 1), tbinom(-1, 2)
    q2, q3, q4, q42 = qint(2), qint(3), qint(4), qbinom(4, 2)
    row0 = [q3.inverse(), vpow(2) * t1 / q4, vpow(4) * q2 * t2 / (q4 * q3)]
    row1 = [vpow(-2) * q2 / q3, vpow(-1) * q2 * braced(1) * t1 / q4, -vpow(-1) * q2 * t2 / q42]
    row2 = [vpow(-2) / q3, -vpow(-2) * t1 / q4, vpow(-4) * t2 / q42]
    pre = [KElem(1), vpow(2) * T(-2), vpow(4) * T(-4)]
    return [[p * x for x in row] for p, row in zip(pre, (row0, row1, row2))]


def sp4_printed_solution(f21) -> list:
    T = KElem.T
    v = vpow(1)
    f = f21 * f21
    mat = [[vpow(-2), vpow(2) / qint(2), vpow(4)],
           [qint(2) / vpow(2), v * braced(1), -vpow(2) * qint(2)],
           [VElem(1), -v, VElem(1)]]
    vec = [vpow(4) * T(2) * qbeta_sym(2, 1, 2),
           v * T(4) * qint(2) * qbeta_sym(2, 1, 2) + vpow(6) * T(7) * tsym(-1),
           T(11) * (T(1) * vpow(5) * braced(1) + qbeta_sym(3, 1, 2) + T(4) * vpow(4) * qbeta_sym(1, -1, 2))]
    scaled = [f * sum((a * b for a, b in zip(row, vec)), KElem(0)) for row in mat]
    return [scaled[0], scaled[1] / tbinom(-1, 1), scaled[2] / tbinom(-1, 2)]


def solve_sp4(first_v_power: int = 3) -> Rank2Solution:
    data = sp4_input(first_v_power)
    matrix = coefficient_matrix(2)
    sol = _solve(matrix, data.pairing_values)
    g = _gauge(2, 0)
    unscaled = [[x * g * g for x in row] for row in matrix]
    printed_rows = sp4_printed_rows()
    row_diff = _diffs([(f"row{i}[{k}]", unscaled[i][k], printed_rows[i][k])
                       for i in range(3) for k in range(3)])
    sol_diff = _diffs([(f"r{2 * k}", sol[k], p) for k, p in enumerate(sp4_printed_solution(data.f_gauge))])
    return Rank2Solution("sp4", f"top_v{first_v_power}", 2, sol, matrix, data.pairing_values,
                         _residuals(matrix, sol, data.pairing_values), row_diff, sol_diff)


def solve_sp4_printed_system(first_v_power: int = 4) -> Rank2Solution:
    """Solve the displayed relation rows (gauge f(2,-1)^-2) instead of the computed ones."""
    data = sp4_input(first_v_power)
    g = _gauge(2, 0)
    scale = (g * g).inverse()
    matrix = [[scale * x for x in row] for row in sp4_printed_rows()]
    sol = _solve(matrix, data.pairing_values)
    sol_diff = _diffs([(f"r{2 * k}", sol[k], p) for k, p in enumerate(sp4_printed_solution(data.f_gauge))])
    return Rank2Solution("sp4", f"printed_rows_v{first_v_power}", 2, sol, matrix, data.pairing_values,
                         _residuals(matrix, sol, data.pairing_values), [], sol_diff)


def rank2_report(case: str) -> dict:
    if case == "sl3":
        sol = solve_sl3()
        return {"case": "sl3", "f(1,-1)": str(f_value(1, -1)), "solutions": [sol.to_json()]}
    if case == "sp4":
        sols = [solve_sp4(3), solve_sp4(4), solve_sp4_printed_system(3), solve_sp4_printed_system(4)]
        return {"case": "sp4", "f(2,-1)": str(f_value(2, -1)),
                "solutions": [s.to_json() for s in sols],
                "matches_printed": [s.variant for s in sols if not s.printed_solution_diff]}
    raise ValueError(f"unknown case {case!r}")
