"""Runtime program model: threads, actions, global locations, footprints.

An action is one CFG edge ``(entry, instr, exit)`` carrying a transition
formula over frames 0 (pre) and 1 (post) in which every shared variable it
does not write is framed with an explicit ``v@1 == v@0`` equality. Dependence
between actions is the syntactic footprint over-approximation: same thread,
or a write overlapping the other action's reads or writes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from abpress.formula import Formula, Lin

# Kinds of lowered instructions.
ASSIGN = "assign"
ASSUME = "assume"
LOCK = "lock"
UNLOCK = "unlock"

GlobalLoc = tuple  # tuple[int, ...], one location per thread


@dataclass(frozen=True)
class Action:
    id: int
    thread: int
    entry: int
    exit: int
    kind: str
    label: str
    reads: frozenset
    writes: frozenset
    trans: Formula  # over frames 0/1, with explicit frame equalities
    # kind-specific payload
    assign_var: Optional[str] = None
    assign_expr: Optional[Lin] = None  # over frame-None vars
    cond: Optional[Formula] = None  # over frame-None vars (assume)
    lock_var: Optional[str] = None
    loop_entry: bool = False

    def __repr__(self):  # compact, used in test failure output
        return f"Action({self.id}, T{self.thread}, {self.entry}->{self.exit}, {self.label!r})"


@dataclass
class Thread:
    id: int
    name: str
    entry: int
    error: int
    locations: set = field(default_factory=set)
    actions: list = field(default_factory=list)
    by_loc: dict = field(default_factory=dict)  # entry loc -> [Action]

    def add_action(self, a: Action) -> None:
        self.actions.append(a)
        self.by_loc.setdefault(a.entry, []).append(a)
        self.locations.add(a.entry)
        self.locations.add(a.exit)


@dataclass
class Program:
    shared: dict  # name -> initial constant, declaration order
    threads: list  # [Thread]; checker thread last when present
    checker: Optional[int] = None  # thread id of the final-assert checker
    final_cond: Optional[Formula] = None

    @property
    def real_thread_ids(self) -> list:
        return [t.id for t in self.threads if t.id != self.checker]

    def thread(self, tid: int) -> Thread:
        return self.threads[tid]

    def action(self, aid: int) -> Action:
        return self._actions[aid]

    def finalize(self) -> None:
        self._actions = {}
        for t in self.threads:
            for a in t.actions:
                self._actions[a.id] = a

    def initial_loc(self) -> GlobalLoc:
        return tuple(t.entry for t in self.threads)


def proc(a: Action) -> int:
    """Thread executing the action."""
    return a.thread


def footprint(a: Action):
    return (a.reads, a.writes)


def dependent(a1: Action, a2: Action) -> bool:
    if a1.thread == a2.thread:
        return True
    if a1.writes & (a2.reads | a2.writes):
        return True
    if a2.writes & (a1.reads | a1.writes):
        return True
    return False


def thread_done(program: Program, loc: GlobalLoc, tid: int) -> bool:
    """True when the thread has no actions at its current location."""
    return not program.thread(tid).by_loc.get(loc[tid])


def all_real_done(program: Program, loc: GlobalLoc) -> bool:
    return all(thread_done(program, loc, tid) for tid in program.real_thread_ids)


def next_actions(program: Program, loc: GlobalLoc, tid: int) -> list:
    """Actions of one thread available at the global location (may be several
    at branch points, empty for a terminated thread)."""
    if tid == program.checker and not all_real_done(program, loc):
        return []
    return list(program.thread(tid).by_loc.get(loc[tid], ()))


def enabled(program: Program, loc: GlobalLoc) -> list:
    """All actions available at the global location, in (thread, id) order.

    The checker thread is gated: its action shows up only once every real
    thread sits at a terminal location.
    """
    out = []
    for t in program.threads:
        out.extend(next_actions(program, loc, t.id))
    return out


def enabled_threads(program: Program, loc: GlobalLoc) -> list:
    return [t.id for t in program.threads if next_actions(program, loc, t.id)]


def step_loc(loc: GlobalLoc, a: Action) -> GlobalLoc:
    out = list(loc)
    out[a.thread] = a.exit
    return tuple(out)


def at_error(program: Program, loc: GlobalLoc) -> bool:
    return any(loc[t.id] == t.error for t in program.threads)


def dump_cfg(program: Program) -> str:
    """One line per action: ``thread:entry -> exit : instr ; R={..} W={..}``."""
    lines = []
    actions = sorted(
        (a for t in program.threads for a in t.actions),
        key=lambda a: (a.thread, a.entry, a.id),
    )
    for a in actions:
        r = ",".join(sorted(a.reads))
        w = ",".join(sorted(a.writes))
        name = program.thread(a.thread).name
        lines.append(f"{name}:{a.entry} -> {a.exit} : {a.label} ; R={{{r}}} W={{{w}}}")
    return "\n".join(lines) + ("\n" if lines else "")
