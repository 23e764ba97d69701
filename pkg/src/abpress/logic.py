"""Path formulas, weakest preconditions and sequent interpolants.

An infeasible root-to-error path is explained by a backward weakest
precondition chain: the last interpolant is False and each earlier one is
``wp`` of the action into its successor. The chain is quantifier-free by
construction (assignments substitute, assumes implicate) and satisfies the
sequent conditions the refinement step needs; an optional debug check
re-verifies them with solver queries.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from abpress import model
from abpress.formula import (
    FALSE,
    TRUE,
    Formula,
    Lin,
    conj,
    disj,
    eq_cmp,
    neg,
    state_at,
    subst_f,
    trans_at,
)
from abpress.solver import Solver


def init_formula(program: model.Program) -> Formula:
    """Conjunction of v == c over every shared variable's initial constant."""
    return conj(
        eq_cmp(Lin.of_var((name, None)), Lin.of_const(val))
        for name, val in program.shared.items()
    )


@dataclass(frozen=True)
class PathFormula:
    """Frame-indexed conjunction Init@0, R_0@(0,1), ..., R_N@(N,N+1)."""

    conjuncts: tuple  # (Init@0, shifted transition formulas...)

    @property
    def formula(self) -> Formula:
        return conj(self.conjuncts)


def path_formula(program: model.Program, actions) -> PathFormula:
    """Shift each action's transition formula i frames into the future."""
    parts = [state_at(init_formula(program), 0)]
    for i, a in enumerate(actions):
        parts.append(trans_at(a.trans, i))
    return PathFormula(tuple(parts))


def wp(a: model.Action, q: Formula) -> Formula:
    """Weakest precondition of one action for a current-frame postcondition."""
    if a.kind == model.ASSIGN:
        return subst_f(q, {(a.assign_var, None): a.assign_expr})
    if a.kind == model.ASSUME:
        return disj((neg(a.cond), q))
    if a.kind == model.LOCK:
        m = (a.lock_var, None)
        q1 = subst_f(q, {m: Lin.of_const(1)})
        return disj((neg(eq_cmp(Lin.of_var(m), Lin.of_const(0))), q1))
    if a.kind == model.UNLOCK:
        return subst_f(q, {(a.lock_var, None): Lin.of_const(0)})
    raise ValueError(f"unknown action kind {a.kind}")


@dataclass
class Interpolants:
    """Annotations for the path's nodes: chain[i] holds before action i."""

    chain: list  # len(actions) + 1 current-frame formulas, chain[-1] is False


@dataclass
class Feasible:
    model: dict  # frame-indexed variable assignment satisfying F(pi)


class InterpolationError(Exception):
    """A WP chain failed its validity side-conditions (debug mode only)."""


def interpolate(program: model.Program, actions, solver: Solver, debug: bool = False):
    """Explain a root-to-error path: Feasible(model) or a WP interpolant chain."""
    pf = path_formula(program, actions)
    res = solver.sat(pf.formula)
    if res.is_sat:
        return Feasible(res.model)
    chain = [FALSE]
    for a in reversed(actions):
        chain.append(wp(a, chain[-1]))
    chain.reverse()
    if debug:
        check_chain(program, actions, chain, solver)
    return Interpolants(chain)


def check_chain(program: model.Program, actions, chain, solver: Solver) -> None:
    """Assert the sequent conditions: Init => A_0, A_{i-1} /\\ R_i => A_i',
    and A_N == False. Raises InterpolationError on any failure."""
    if chain[-1] != FALSE:
        raise InterpolationError("last interpolant is not False")
    if not solver.implies(init_formula(program), chain[0]):
        raise InterpolationError("Init does not imply the first interpolant")
    for i, a in enumerate(actions):
        pre = state_at(chain[i], 0)
        post = state_at(chain[i + 1], 1)
        step = conj((pre, a.trans, neg(post)))
        if solver.sat(step).is_sat:
            raise InterpolationError(
                f"interpolant chain not inductive at step {i} ({a.label})")
