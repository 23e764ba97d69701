"""Built-in solver tests.

The reference oracle is plain brute force: enumerate all integer points in a
small box and compare against the solver's answer. Models returned by the
solver are additionally checked by evaluation.
"""

import itertools
import random

import pytest

from abpress.formula import (
    FALSE,
    TRUE,
    Formula,
    Lin,
    conj,
    disj,
    eq_cmp,
    evaluate,
    fvars,
    le,
    le_cmp,
    lt_cmp,
    neq_cmp,
)
from abpress.solver import Solver, SolverFailure

X = ("x", None)
Y = ("y", None)
Z = ("z", None)


def lv(v, c=1):
    return Lin.of_var(v, c)


def brute_force_sat(f: Formula, bound: int = 8) -> bool:
    vs = sorted(fvars(f))
    for point in itertools.product(range(-bound, bound + 1), repeat=len(vs)):
        if evaluate(f, dict(zip(vs, point))):
            return True
    return False


@pytest.fixture()
def solver():
    return Solver()


def test_trivial_unsat(solver):
    f = conj((eq_cmp(lv(X), Lin.of_const(1)), eq_cmp(lv(X), Lin.of_const(2))))
    assert not solver.sat(f).is_sat


def test_unique_solution(solver):
    # x + y = 3 and x - y = 1 has the single solution x=2, y=1
    f = conj((
        eq_cmp(lv(X) + lv(Y), Lin.of_const(3)),
        eq_cmp(lv(X) - lv(Y), Lin.of_const(1)),
    ))
    res = solver.sat(f)
    assert res.is_sat
    assert res.model[X] == 2 and res.model[Y] == 1


def test_integer_only_infeasibility(solver):
    # 2x = 1 has no integer solution
    f = eq_cmp(lv(X, 2), Lin.of_const(1))
    assert not solver.sat(f).is_sat
    # 3x - 3y = 1 has no integer solution either (rationally feasible)
    g = eq_cmp(lv(X, 3) - lv(Y, 3), Lin.of_const(1))
    assert not solver.sat(g).is_sat


def test_non_unit_equality_with_solutions(solver):
    # 2x + 3y = 1 is integer-solvable (e.g. x=2, y=-1)
    f = eq_cmp(lv(X, 2) + lv(Y, 3), Lin.of_const(1))
    res = solver.sat(f)
    assert res.is_sat
    assert 2 * res.model[X] + 3 * res.model[Y] == 1


def test_strict_band_infeasible(solver):
    # 1 <= 3x - 3y <= 2 has no integer points
    t = lv(X, 3) - lv(Y, 3)
    f = conj((le(Lin.of_const(1) - t), le(t - Lin.of_const(2))))
    assert not solver.sat(f).is_sat


def test_disjunction_model(solver):
    f = disj((eq_cmp(lv(X), Lin.of_const(7)), FALSE))
    res = solver.sat(f)
    assert res.is_sat and res.model[X] == 7


def test_true_false(solver):
    assert solver.sat(TRUE).is_sat
    assert solver.sat(TRUE).model == {}
    assert not solver.sat(FALSE).is_sat


def test_implies(solver):
    assert solver.implies(eq_cmp(lv(X), Lin.of_const(1)), le(Lin.of_const(0) - lv(X)))
    assert not solver.implies(TRUE, le(Lin.of_const(0) - lv(X)))
    assert solver.implies(FALSE, eq_cmp(lv(X), Lin.of_const(5)))


def test_integer_gap_implication(solver):
    # Over the integers, x <= 2 implies x >= 2 or x <= 1.
    f = le_cmp(lv(X), Lin.of_const(2))
    g = disj((le(Lin.of_const(2) - lv(X)), le_cmp(lv(X), Lin.of_const(1))))
    assert solver.implies(f, g)


def _random_formula(rng, vars_, depth):
    if depth == 0 or rng.random() < 0.45:
        coeffs = {v: rng.randint(-3, 3) for v in rng.sample(vars_, k=rng.randint(1, len(vars_)))}
        k = rng.randint(-6, 6)
        kind = rng.randrange(3)
        if kind == 0:
            return le(Lin.make(coeffs, k))
        if kind == 1:
            return eq_cmp(Lin.make(coeffs, 0), Lin.of_const(-k))
        return neq_cmp(Lin.make(coeffs, 0), Lin.of_const(-k))
    args = [_random_formula(rng, vars_, depth - 1) for _ in range(rng.randint(2, 3))]
    return conj(args) if rng.random() < 0.5 else disj(args)


def test_random_against_brute_force():
    rng = random.Random(20240811)
    solver = Solver()
    vars_ = [X, Y, Z]
    for i in range(250):
        f = _random_formula(rng, vars_, rng.randint(1, 3))
        res = solver.sat(f)
        if res.is_sat:
            assert evaluate(f, res.model), f"bad model for {f}"
        else:
            assert not brute_force_sat(f, bound=8), f"solver unsat but point exists: {f}"


def test_random_sat_models_valid_wide_coefficients():
    rng = random.Random(99)
    solver = Solver()
    vars_ = [X, Y]
    for _ in range(120):
        parts = []
        for _ in range(rng.randint(1, 4)):
            coeffs = {v: rng.randint(-9, 9) for v in vars_}
            parts.append(le(Lin.make(coeffs, rng.randint(-20, 20))))
        f = conj(parts)
        res = solver.sat(f)
        if res.is_sat:
            assert evaluate(f, res.model)
        else:
            assert not brute_force_sat(f, bound=25)


def test_cache_and_stats():
    solver = Solver()
    f = eq_cmp(lv(X), Lin.of_const(1))
    solver.sat(f)
    calls = solver.stats.calls
    solver.sat(f)
    assert solver.stats.calls == calls
