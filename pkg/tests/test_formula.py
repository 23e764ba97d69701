import random

from abpress.formula import (
    FALSE,
    TRUE,
    And,
    Le,
    Lin,
    Or,
    conj,
    disj,
    eq_cmp,
    evaluate,
    fvars,
    le,
    le_cmp,
    lt_cmp,
    neg,
    neq_cmp,
    render,
    state_at,
    subst_f,
    trans_at,
)

X = ("x", None)
Y = ("y", None)


def lx(c=1):
    return Lin.of_var(X, c)


def ly(c=1):
    return Lin.of_var(Y, c)


def test_lin_arithmetic():
    e = lx() + ly(2) + Lin.of_const(3)
    assert e.evaluate({X: 1, Y: 2}) == 8
    assert (e - e).coeffs == ()
    assert (-e).const == -3
    assert e.scale(2).evaluate({X: 1, Y: 2}) == 16


def test_atom_tightening():
    # 2x - 7 <= 0 tightens to x - 4 <= 0 over the integers (x <= 3.5 -> x <= 3)
    a = le(lx(2) + Lin.of_const(-7))
    assert isinstance(a, Le)
    assert a.expr == lx() + Lin.of_const(-4)


def test_constant_folding():
    assert le(Lin.of_const(-1)) == TRUE
    assert le(Lin.of_const(0)) == TRUE
    assert le(Lin.of_const(1)) == FALSE


def test_negation_is_involutive_on_atoms():
    a = le_cmp(lx(), Lin.of_const(5))
    assert neg(neg(a)) == a


def test_integer_negation():
    # not (x <= 5) is x >= 6
    a = le_cmp(lx(), Lin.of_const(5))
    n = neg(a)
    assert evaluate(n, {X: 6}) and not evaluate(n, {X: 5})


def test_conj_contradiction_and_disj_tautology():
    a = le_cmp(lx(), Lin.of_const(0))  # x <= 0
    b = neg(a)  # x >= 1
    assert conj((a, b)) == FALSE
    assert disj((a, b)) == TRUE


def test_conj_keeps_strongest_same_coeff_atom():
    weak = le_cmp(lx(), Lin.of_const(5))
    strong = le_cmp(lx(), Lin.of_const(2))
    assert conj((weak, strong)) == strong
    assert disj((weak, strong)) == weak


def test_equality_expands_to_atom_pair():
    f = eq_cmp(lx(), Lin.of_const(3))
    assert isinstance(f, And) and len(f.args) == 2
    assert evaluate(f, {X: 3}) and not evaluate(f, {X: 2})
    assert render(f) == "x == 3"


def test_neq_is_disjunction():
    f = neq_cmp(lx(), Lin.of_const(0))
    assert isinstance(f, Or)
    assert evaluate(f, {X: 1}) and evaluate(f, {X: -1}) and not evaluate(f, {X: 0})


def test_structural_equality_and_determinism():
    f1 = conj((le_cmp(lx(), ly()), eq_cmp(ly(), Lin.of_const(2))))
    f2 = conj((eq_cmp(ly(), Lin.of_const(2)), le_cmp(lx(), ly())))
    assert f1 == f2
    assert hash(f1) == hash(f2)
    assert render(f1) == render(f2)


def test_subst():
    f = le_cmp(lx(), Lin.of_const(2))  # x <= 2
    g = subst_f(f, {X: lx() + Lin.of_const(1)})  # x+1 <= 2
    assert evaluate(g, {X: 1}) and not evaluate(g, {X: 2})


def test_frames():
    f = le_cmp(lx(), ly())
    assert fvars(state_at(f, 3)) == frozenset({("x", 3), ("y", 3)})
    t = le_cmp(Lin.of_var(("x", 1)), Lin.of_var(("x", 0)))
    assert fvars(trans_at(t, 2)) == frozenset({("x", 3), ("x", 2)})


def test_random_negation_semantics():
    rng = random.Random(7)
    vars_ = [X, Y]
    for _ in range(200):
        coeffs = {v: rng.randint(-3, 3) for v in vars_}
        f = le(Lin.make(coeffs, rng.randint(-4, 4)))
        g = conj((f, le(Lin.make({v: rng.randint(-3, 3) for v in vars_}, rng.randint(-4, 4)))))
        h = neg(g)
        for _ in range(20):
            env = {v: rng.randint(-5, 5) for v in vars_}
            assert evaluate(h, env) == (not evaluate(g, env))
