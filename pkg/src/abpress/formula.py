"""Quantifier-free formulas over linear integer arithmetic.

Variables are ``(name, frame)`` pairs. State formulas (annotations,
interpolants, guards) use frame ``None``; transition formulas use frame 0
for the pre-state and frame 1 for the post-state; path formulas shift
transitions to absolute frames i, i+1.

Every atom is kept in the normalized shape ``lin <= 0`` with coprime
coefficients and a floored constant, which makes atoms closed under integer
negation: ``not (t <= 0)`` is ``(1 - t) <= 0``. Equalities expand into atom
pairs, so formulas never contain negation nodes (construction keeps them in
negation normal form). Connective children are deduplicated and sorted by a
structural key, giving structural-hash equality and deterministic printing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import Callable, Iterable, Mapping, Optional, Union

# A variable is (name, frame); frame None denotes the current program frame.
Var = tuple


def var_key(v: Var):
    name, frame = v
    return (name, -1 if frame is None else frame)


@dataclass(frozen=True)
class Lin:
    """Linear integer expression: sum of coeff*var terms plus a constant."""

    coeffs: tuple  # tuple[(Var, int), ...] sorted by var_key, coeffs nonzero
    const: int
    _h: int = field(init=False, repr=False, compare=False, default=0)

    def __post_init__(self):
        object.__setattr__(self, "_h", hash((self.coeffs, self.const)))

    def __hash__(self):
        return self._h

    @staticmethod
    def make(coeffs: Mapping[Var, int], const: int = 0) -> "Lin":
        items = tuple(sorted(((v, c) for v, c in coeffs.items() if c != 0), key=lambda it: var_key(it[0])))
        return Lin(items, const)

    @staticmethod
    def of_const(k: int) -> "Lin":
        return Lin((), k)

    @staticmethod
    def of_var(v: Var, c: int = 1) -> "Lin":
        if c == 0:
            return Lin((), 0)
        return Lin(((v, c),), 0)

    def coeff_map(self) -> dict:
        return dict(self.coeffs)

    def __add__(self, other: "Lin") -> "Lin":
        m = self.coeff_map()
        for v, c in other.coeffs:
            m[v] = m.get(v, 0) + c
        return Lin.make(m, self.const + other.const)

    def __sub__(self, other: "Lin") -> "Lin":
        return self + other.scale(-1)

    def __neg__(self) -> "Lin":
        return self.scale(-1)

    def scale(self, k: int) -> "Lin":
        if k == 0:
            return Lin((), 0)
        return Lin(tuple((v, c * k) for v, c in self.coeffs), self.const * k)

    def plus_const(self, k: int) -> "Lin":
        return Lin(self.coeffs, self.const + k)

    def subst(self, mapping: Mapping[Var, "Lin"]) -> "Lin":
        out = Lin.of_const(self.const)
        for v, c in self.coeffs:
            rep = mapping.get(v)
            if rep is None:
                out = out + Lin.of_var(v, c)
            else:
                out = out + rep.scale(c)
        return out

    def rebind(self, fn: Callable[[Var], Var]) -> "Lin":
        m: dict = {}
        for v, c in self.coeffs:
            w = fn(v)
            m[w] = m.get(w, 0) + c
        return Lin.make(m, self.const)

    def evaluate(self, env: Mapping[Var, int]) -> int:
        return self.const + sum(c * env.get(v, 0) for v, c in self.coeffs)

    def vars(self) -> frozenset:
        return frozenset(v for v, _ in self.coeffs)

    def render(self) -> str:
        if not self.coeffs:
            return str(self.const)
        parts = []
        for v, c in self.coeffs:
            name = render_var(v)
            term = name if abs(c) == 1 else f"{abs(c)}*{name}"
            if not parts:
                parts.append(term if c > 0 else f"-{term}")
            else:
                parts.append(f"+ {term}" if c > 0 else f"- {term}")
        if self.const > 0:
            parts.append(f"+ {self.const}")
        elif self.const < 0:
            parts.append(f"- {-self.const}")
        return " ".join(parts)


def render_var(v: Var) -> str:
    name, frame = v
    return name if frame is None else f"{name}@{frame}"


# ---------------------------------------------------------------------------
# Formula nodes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Bool:
    val: bool
    _h: int = field(init=False, repr=False, compare=False, default=0)

    def __post_init__(self):
        object.__setattr__(self, "_h", hash(("bool", self.val)))

    def __hash__(self):
        return self._h


@dataclass(frozen=True)
class Le:
    """Atom ``expr <= 0`` with coprime coefficients, constant floored."""

    expr: Lin
    _h: int = field(init=False, repr=False, compare=False, default=0)

    def __post_init__(self):
        object.__setattr__(self, "_h", hash(("le", self.expr)))

    def __hash__(self):
        return self._h


@dataclass(frozen=True)
class And:
    args: tuple
    _h: int = field(init=False, repr=False, compare=False, default=0)

    def __post_init__(self):
        object.__setattr__(self, "_h", hash(("and", self.args)))

    def __hash__(self):
        return self._h


@dataclass(frozen=True)
class Or:
    args: tuple
    _h: int = field(init=False, repr=False, compare=False, default=0)

    def __post_init__(self):
        object.__setattr__(self, "_h", hash(("or", self.args)))

    def __hash__(self):
        return self._h


Formula = Union[Bool, Le, And, Or]

TRUE = Bool(True)
FALSE = Bool(False)


def skey(f: Formula):
    """Structural sort key; total and deterministic across runs."""
    if isinstance(f, Bool):
        return (0, f.val)
    if isinstance(f, Le):
        return (1, tuple((var_key(v), c) for v, c in f.expr.coeffs), f.expr.const)
    if isinstance(f, And):
        return (2, tuple(skey(a) for a in f.args))
    return (3, tuple(skey(a) for a in f.args))


# ---------------------------------------------------------------------------
# Smart constructors (always produce canonical NNF formulas)
# ---------------------------------------------------------------------------


def le(expr: Lin) -> Formula:
    """Atom ``expr <= 0``, integer-tightened."""
    if not expr.coeffs:
        return TRUE if expr.const <= 0 else FALSE
    g = 0
    for _, c in expr.coeffs:
        g = gcd(g, abs(c))
    if g > 1:
        expr = Lin(tuple((v, c // g) for v, c in expr.coeffs), expr.const // g)  # floor tightening
    return Le(expr)


def conj(args: Iterable[Formula]) -> Formula:
    flat: list = []
    seen = set()
    stack = list(args)
    stack.reverse()
    while stack:
        f = stack.pop()
        if isinstance(f, Bool):
            if not f.val:
                return FALSE
            continue
        if isinstance(f, And):
            stack.extend(reversed(f.args))
            continue
        if f not in seen:
            seen.add(f)
            flat.append(f)
    # Same-coefficient atoms: keep the strongest (largest constant).
    by_coeffs: dict = {}
    out: list = []
    for f in flat:
        if isinstance(f, Le):
            prev = by_coeffs.get(f.expr.coeffs)
            if prev is None or f.expr.const > prev.expr.const:
                by_coeffs[f.expr.coeffs] = f
        else:
            out.append(f)
    atoms = list(by_coeffs.values())
    # Contradiction: a <= 0 and b <= 0 with coeffs(b) == -coeffs(a) and
    # a.const + b.const >= 1 (checking strongest representatives suffices).
    for f in atoms:
        mate = by_coeffs.get(tuple((v, -c) for v, c in f.expr.coeffs))
        if mate is not None and f.expr.const + mate.expr.const >= 1:
            return FALSE
    out.extend(atoms)
    out.sort(key=skey)
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return And(tuple(out))


def disj(args: Iterable[Formula]) -> Formula:
    flat: list = []
    seen = set()
    stack = list(args)
    stack.reverse()
    while stack:
        f = stack.pop()
        if isinstance(f, Bool):
            if f.val:
                return TRUE
            continue
        if isinstance(f, Or):
            stack.extend(reversed(f.args))
            continue
        if f not in seen:
            seen.add(f)
            flat.append(f)
    by_coeffs: dict = {}
    out: list = []
    for f in flat:
        if isinstance(f, Le):
            prev = by_coeffs.get(f.expr.coeffs)
            if prev is None or f.expr.const < prev.expr.const:
                by_coeffs[f.expr.coeffs] = f
        else:
            out.append(f)
    atoms = list(by_coeffs.values())
    # Integer tautology: a <= 0 or b <= 0 with coeffs(b) == -coeffs(a) and
    # a.const + b.const <= 1 (weakest representatives suffice).
    for f in atoms:
        mate = by_coeffs.get(tuple((v, -c) for v, c in f.expr.coeffs))
        if mate is not None and f.expr.const + mate.expr.const <= 1:
            return TRUE
    out.extend(atoms)
    out.sort(key=skey)
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return Or(tuple(out))


def neg(f: Formula) -> Formula:
    if isinstance(f, Bool):
        return FALSE if f.val else TRUE
    if isinstance(f, Le):
        return le((-f.expr).plus_const(1))
    if isinstance(f, And):
        return disj(neg(a) for a in f.args)
    return conj(neg(a) for a in f.args)


def nnf(f: Formula) -> Formula:
    """Formulas are negation-normal by construction; provided for clarity."""
    return f


def le_cmp(a: Lin, b: Lin) -> Formula:
    return le(a - b)


def lt_cmp(a: Lin, b: Lin) -> Formula:
    return le((a - b).plus_const(1))


def eq_cmp(a: Lin, b: Lin) -> Formula:
    t = a - b
    return conj((le(t), le(-t)))


def neq_cmp(a: Lin, b: Lin) -> Formula:
    t = a - b
    return disj((le(t.plus_const(1)), le((-t).plus_const(1))))


def implies_shape(f: Formula, g: Formula) -> Formula:
    """The formula ``f -> g`` (not an entailment check)."""
    return disj((neg(f), g))


# ---------------------------------------------------------------------------
# Traversals
# ---------------------------------------------------------------------------


def atoms(f: Formula) -> list:
    out: list = []
    seen = set()

    def walk(g: Formula) -> None:
        if isinstance(g, Le):
            if g not in seen:
                seen.add(g)
                out.append(g)
        elif isinstance(g, (And, Or)):
            for a in g.args:
                walk(a)

    walk(f)
    return out


def fvars(f: Formula) -> frozenset:
    vs: set = set()
    for a in atoms(f):
        vs |= a.expr.vars()
    return frozenset(vs)


def rebind_f(f: Formula, fn: Callable[[Var], Var]) -> Formula:
    if isinstance(f, Bool):
        return f
    if isinstance(f, Le):
        return le(f.expr.rebind(fn))
    if isinstance(f, And):
        return conj(rebind_f(a, fn) for a in f.args)
    return disj(rebind_f(a, fn) for a in f.args)


def subst_f(f: Formula, mapping: Mapping[Var, Lin]) -> Formula:
    if isinstance(f, Bool):
        return f
    if isinstance(f, Le):
        return le(f.expr.subst(mapping))
    if isinstance(f, And):
        return conj(subst_f(a, mapping) for a in f.args)
    return disj(subst_f(a, mapping) for a in f.args)


def state_at(f: Formula, i: int) -> Formula:
    """Place a current-frame state formula at absolute frame i."""
    return rebind_f(f, lambda v: (v[0], i) if v[1] is None else v)


def trans_at(f: Formula, i: int) -> Formula:
    """Shift a transition formula (frames 0/1) to absolute frames i, i+1."""
    return rebind_f(f, lambda v: (v[0], v[1] + i) if v[1] is not None else v)


def evaluate(f: Formula, env: Mapping[Var, int]) -> bool:
    if isinstance(f, Bool):
        return f.val
    if isinstance(f, Le):
        return f.expr.evaluate(env) <= 0
    if isinstance(f, And):
        return all(evaluate(a, env) for a in f.args)
    return any(evaluate(a, env) for a in f.args)


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------


def _render_atom(a: Le) -> str:
    lhs = Lin(a.expr.coeffs, 0)
    return f"{lhs.render()} <= {-a.expr.const}"


def render(f: Formula) -> str:
    if isinstance(f, Bool):
        return "true" if f.val else "false"
    if isinstance(f, Le):
        return _render_atom(f)
    if isinstance(f, And):
        atom_parts = [p for p in f.args if isinstance(p, Le)]
        by_expr = {a.expr: a for a in atom_parts}
        used = set()
        parts: list = []
        for a in atom_parts:
            if a in used:
                continue
            mate = by_expr.get(-a.expr)
            if mate is not None and mate is not a and mate not in used:
                used.add(a)
                used.add(mate)
                pos = a if skey(a) <= skey(mate) else mate
                lhs = Lin(pos.expr.coeffs, 0)
                parts.append(f"{lhs.render()} == {-pos.expr.const}")
            else:
                used.add(a)
                parts.append(_render_atom(a))
        for p in f.args:
            if isinstance(p, Le):
                continue
            s = render(p)
            parts.append(f"({s})" if isinstance(p, Or) else s)
        return " && ".join(parts)
    parts = []
    for a in f.args:
        s = render(a)
        parts.append(f"({s})" if isinstance(a, (And, Or)) else s)
    return " || ".join(parts)
