"""Satisfiability for quantifier-free linear integer arithmetic.

The built-in backend does a DPLL-style search over the boolean skeleton
(atoms are ``lin <= 0`` facts) and checks each boolean solution for theory
consistency: equalities are eliminated by integer substitution (with the
modular trick for equalities without a unit coefficient), the remaining
inequalities go through Fourier-Motzkin elimination over the rationals, and
a non-integral sample point triggers branch-and-bound.

A :class:`Solver` front end adds result caching, statistics, an optional
query log, and can delegate to an external SMT-LIB2 process instead.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, floor, gcd
from typing import Optional

from abpress.formula import (
    FALSE,
    TRUE,
    And,
    Bool,
    Formula,
    Le,
    Lin,
    Or,
    Var,
    conj,
    disj,
    evaluate,
    fvars,
    neg,
    var_key,
)


class SolverFailure(Exception):
    """The backend could not decide the query (resource cap or process error)."""


@dataclass
class SatResult:
    status: str  # "sat" | "unsat"
    model: Optional[dict] = None  # Var -> int, total over the query's variables

    @property
    def is_sat(self) -> bool:
        return self.status == "sat"


_BB_DEPTH_CAP = 80
_FM_CONSTRAINT_CAP = 200_000
_EQ_ITERATION_CAP = 400


def _tighten(expr: Lin) -> Optional[Lin]:
    """gcd-normalize ``expr <= 0``; None means trivially true."""
    if not expr.coeffs:
        return None if expr.const <= 0 else expr
    g = 0
    for _, c in expr.coeffs:
        g = gcd(g, abs(c))
    if g > 1:
        expr = Lin(tuple((v, c // g) for v, c in expr.coeffs), expr.const // g)
    return expr


def _sym_mod(a: int, m: int) -> int:
    """Symmetric residue of a modulo m, in (-m/2, m/2]."""
    r = a % m
    if r > m // 2:
        r -= m
    return r


def _theory_check(ineqs: list, depth: int = 0) -> Optional[dict]:
    """Integer-feasibility of a conjunction of ``lin <= 0`` constraints.

    Returns a model (Var -> int) or None when infeasible.
    """
    if depth > _BB_DEPTH_CAP:
        raise SolverFailure("branch-and-bound depth cap exceeded")

    work: list = []
    for t in ineqs:
        t = _tighten(t)
        if t is None:
            continue
        if not t.coeffs:
            if t.const > 0:
                return None
            continue
        work.append(t)

    # --- equality elimination -------------------------------------------
    subs: list = []  # (var, Lin replacement) in order of substitution
    aux_counter = 0
    iterations = 0
    while True:
        iterations += 1
        if iterations > _EQ_ITERATION_CAP:
            raise SolverFailure("equality elimination cap exceeded")
        eq = None
        neg_index = None
        fallback = None
        by_key = {}
        for idx, t in enumerate(work):
            k = (t.coeffs, t.const)
            by_key[k] = idx
        for idx, t in enumerate(work):
            mk = (tuple((v, -c) for v, c in t.coeffs), -t.const)
            j = by_key.get(mk)
            if j is None or j == idx:
                continue
            if any(abs(c) == 1 for _, c in t.coeffs):
                eq = t
                neg_index = j
                break
            if fallback is None:
                fallback = (idx, j)
        if eq is None and fallback is not None:
            eq = work[fallback[0]]
            neg_index = fallback[1]
        if eq is None:
            break
        # Remove the defining pair; solve eq == 0.
        work = [t for i, t in enumerate(work) if t is not eq and i != neg_index]
        g = 0
        for _, c in eq.coeffs:
            g = gcd(g, abs(c))
        if g == 0:
            if eq.const != 0:
                return None
            continue
        if eq.const % g != 0:
            return None
        if g > 1:
            eq = Lin(tuple((v, c // g) for v, c in eq.coeffs), eq.const // g)
        unit = next(((v, c) for v, c in eq.coeffs if abs(c) == 1), None)
        if unit is not None:
            v, c = unit
            rest = Lin(tuple((w, d) for w, d in eq.coeffs if w != v), eq.const)
            rep = rest.scale(-1) if c == 1 else rest  # c*v + rest = 0
            subs.append((v, rep))
            work = [t for t in (u.subst({v: rep}) for u in work) if t.coeffs or t.const > 0]
            bad = [t for t in work if not t.coeffs and t.const > 0]
            if bad:
                return None
            work = [_tighten(t) or Lin((), 0) for t in work]
            work = [t for t in work if t.coeffs or t.const > 0]
        else:
            # Modular reduction: introduce a fresh variable so that some
            # coefficient becomes a unit; coefficients strictly shrink.
            v_min, c_min = min(eq.coeffs, key=lambda it: (abs(it[1]), var_key(it[0])))
            m = abs(c_min) + 1
            sigma: Var = (f"$e{aux_counter}_{depth}", None)
            aux_counter += 1
            coeffs = {w: _sym_mod(d, m) for w, d in eq.coeffs}
            coeffs = {w: d for w, d in coeffs.items() if d != 0}
            coeffs[sigma] = -m
            reduced = Lin.make(coeffs, _sym_mod(eq.const, m))
            work.append(reduced)
            work.append(-reduced)
            work.append(eq)
            work.append(-eq)

    # --- Fourier-Motzkin over the rationals ------------------------------
    all_vars = sorted({v for t in work for v in t.vars()}, key=var_key)
    snapshots = []  # (var, lowers, uppers) for sample back-substitution
    constraints = work
    for v in all_vars:
        lowers = []  # (b, rest): b*v >= -rest  with b > 0 ... from -b*v + rest <= 0
        uppers = []  # (a, rest): a*v <= -rest  with a > 0 ... from a*v + rest <= 0
        others = []
        for t in constraints:
            c = dict(t.coeffs).get(v, 0)
            rest = Lin(tuple((w, d) for w, d in t.coeffs if w != v), t.const)
            if c > 0:
                uppers.append((c, rest))
            elif c < 0:
                lowers.append((-c, rest))
            else:
                others.append(t)
        snapshots.append((v, lowers, uppers))
        new = others
        for b, p in lowers:  # v >= p/b is wrong sign; see derivation below
            for a, q in uppers:
                # a*v + q <= 0 and -b*v + p <= 0  =>  b*q + a*p <= 0
                t = q.scale(b) + p.scale(a)
                t = _tighten(t)
                if t is None:
                    continue
                if not t.coeffs:
                    if t.const > 0:
                        return None
                    continue
                new.append(t)
        if len(new) > _FM_CONSTRAINT_CAP:
            raise SolverFailure("Fourier-Motzkin constraint cap exceeded")
        constraints = new
    for t in constraints:
        if not t.coeffs and t.const > 0:
            return None

    # --- sample construction ---------------------------------------------
    sample: dict = {}
    fractional: Optional[Var] = None
    for v, lowers, uppers in reversed(snapshots):
        lo: Optional[Fraction] = None
        hi: Optional[Fraction] = None
        for b, p in lowers:  # v >= p_val / b ... from -b*v + p <= 0 => v >= p/b
            val = Fraction(p.const + sum(d * sample[w] for w, d in p.coeffs), b)
            lo = val if lo is None or val > lo else lo
        for a, q in uppers:  # v <= -q_val / a
            val = Fraction(-(q.const + sum(d * sample[w] for w, d in q.coeffs)), a)
            hi = val if hi is None or val < hi else hi
        if lo is not None and hi is not None and lo > hi:
            return None  # numeric guard; FM should have caught this
        ilo = ceil(lo) if lo is not None else None
        ihi = floor(hi) if hi is not None else None
        if ilo is None and ihi is None:
            sample[v] = Fraction(0)
        elif ilo is None:
            sample[v] = Fraction(min(0, ihi))
        elif ihi is None:
            sample[v] = Fraction(max(0, ilo))
        elif ilo <= ihi:
            sample[v] = Fraction(min(max(0, ilo), ihi))
        else:
            sample[v] = (lo + hi) / 2  # rational only; no integer in [lo, hi]
            fractional = v
    if fractional is not None:
        f = fractional
        fval = sample[f]
        lo_branch = list(ineqs) + [Lin.of_var(f) + Lin.of_const(-floor(fval))]
        hi_branch = list(ineqs) + [Lin.of_var(f, -1) + Lin.of_const(ceil(fval))]
        m = _theory_check(lo_branch, depth + 1)
        if m is not None:
            return m
        return _theory_check(hi_branch, depth + 1)

    model = {v: int(val) for v, val in sample.items()}
    # Undo equality substitutions in reverse order.
    for v, rep in reversed(subs):
        model[v] = rep.evaluate(model)
    return {v: val for v, val in model.items() if not v[0].startswith("$e")}


def _builtin_sat(f: Formula) -> SatResult:
    """DPLL over the boolean skeleton with lazy theory checks."""

    def assign(g: Formula, atom: Le, value: bool) -> Formula:
        if isinstance(g, Bool):
            return g
        if isinstance(g, Le):
            return (TRUE if value else FALSE) if g == atom else g
        if isinstance(g, And):
            return conj(assign(a, atom, value) for a in g.args)
        return disj(assign(a, atom, value) for a in g.args)

    def first_atom(g: Formula) -> Optional[Le]:
        if isinstance(g, Le):
            return g
        if isinstance(g, (And, Or)):
            for a in g.args:
                found = first_atom(a)
                if found is not None:
                    return found
        return None

    def search(g: Formula, trail: list) -> Optional[dict]:
        if g == FALSE:
            return None
        if g == TRUE:
            return _theory_check(trail)
        atom = first_atom(g)
        assert atom is not None
        for value in (True, False):
            lit = atom.expr if value else (-atom.expr).plus_const(1)
            model = search(assign(g, atom, value), trail + [lit])
            if model is not None:
                return model
        return None

    model = search(f, [])
    if model is None:
        return SatResult("unsat")
    for v in fvars(f):
        model.setdefault(v, 0)
    assert evaluate(f, model), "builtin solver produced an invalid model"
    return SatResult("sat", model)


# ---------------------------------------------------------------------------
# Front end
# ---------------------------------------------------------------------------


@dataclass
class SolverStats:
    calls: int = 0
    time_s: float = 0.0


class Solver:
    """Caching satisfiability front end with pluggable backends.

    ``backend`` is ``"builtin"`` or an external SMT-LIB2 command line
    (handled by :mod:`abpress.smtlib`).
    """

    def __init__(self, backend: str = "builtin", log_path: Optional[str] = None):
        self.backend = backend
        self.stats = SolverStats()
        self._cache: dict = {}
        self._log_path = log_path
        self._log_file = None
        self._external = None
        if backend != "builtin":
            from abpress.smtlib import ExternalSolver

            self._external = ExternalSolver(backend)

    def close(self) -> None:
        if self._external is not None:
            self._external.close()
        if self._log_file is not None:
            self._log_file.close()
            self._log_file = None

    def _log(self, f: Formula, status: str) -> None:
        if self._log_path is None:
            return
        from abpress.smtlib import serialize_formula

        if self._log_file is None:
            self._log_file = open(self._log_path, "w", encoding="utf-8")
        self._log_file.write(f"(query {serialize_formula(f)} {status})\n")

    def sat(self, f: Formula) -> SatResult:
        cached = self._cache.get(f)
        if cached is not None:
            return cached
        self.stats.calls += 1
        start = time.perf_counter()
        if self._external is not None:
            result = self._external.sat(f)
        else:
            result = _builtin_sat(f)
        self.stats.time_s += time.perf_counter() - start
        self._log(f, result.status)
        self._cache[f] = result
        return result

    def implies(self, f: Formula, g: Formula) -> bool:
        if g == TRUE or f == FALSE or f == g:
            return True
        if isinstance(g, And) and isinstance(f, And) and set(g.args) <= set(f.args):
            return True
        return not self.sat(conj((f, neg(g)))).is_sat

    def equivalent(self, f: Formula, g: Formula) -> bool:
        return self.implies(f, g) and self.implies(g, f)
