"""Symbolic conditional-independence statements and derivations.

Statements are triples of disjoint symbol sets.  Derivations replay a
proof step by step against a fixed rule table; the closure operation
forward-chains the four core rules (symmetry, decomposition, weak
union, contraction) from a set of axioms over a finite ground set.

Two further rules are accepted in replayed derivations but never used
generatively.  The partition rule turns block-versus-rest splits of a
common ground set into any split along the meet of those partitions.
The copy rule adjoins formal copies of conditioning symbols (spelled
with a prime suffix) to the right-hand side.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import BudgetExceeded, ShapeMismatch, UnknownWire, WireOverlap
from .kernels import DEFAULT_ATOL, JointState


@dataclass(frozen=True)
class CIStatement:
    """left independent of right, conditional on given."""

    left: frozenset[str]
    right: frozenset[str]
    given: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "left", frozenset(self.left))
        object.__setattr__(self, "right", frozenset(self.right))
        object.__setattr__(self, "given", frozenset(self.given))
        if not self.left or not self.right:
            raise ShapeMismatch("a statement needs nonempty sides")
        if (
            self.left & self.right
            or self.left & self.given
            or self.right & self.given
        ):
            raise WireOverlap(f"statement groups overlap: {self}")

    @property
    def symbols(self) -> frozenset[str]:
        return self.left | self.right | self.given

    def swapped(self) -> "CIStatement":
        return CIStatement(self.right, self.left, self.given)

    def __str__(self) -> str:
        def fmt(s: frozenset[str]) -> str:
            return ",".join(sorted(s))

        return f"{fmt(self.left)} _||_ {fmt(self.right)} | {fmt(self.given)}"


def statement_key(stmt: CIStatement):
    """A sortable canonical key for deterministic orderings."""
    return (
        tuple(sorted(stmt.left)),
        tuple(sorted(stmt.right)),
        tuple(sorted(stmt.given)),
    )


def statement_holds(stmt: CIStatement, p: JointState, atol: float = DEFAULT_ATOL) -> bool:
    """Evaluate a symbolic statement numerically on a joint state."""
    from .ci import check_ci

    return check_ci(p, stmt.left, stmt.right, stmt.given, atol)


def _is_symmetry(premises: Sequence[CIStatement], c: CIStatement) -> bool:
    if len(premises) != 1:
        return False
    (p,) = premises
    return c.left == p.right and c.right == p.left and c.given == p.given


def _is_decomposition(premises: Sequence[CIStatement], c: CIStatement) -> bool:
    # X1,X2 _||_ Y | W entails X1 _||_ Y | W
    if len(premises) != 1:
        return False
    (p,) = premises
    return c.left <= p.left and c.right == p.right and c.given == p.given


def _is_weak_union(premises: Sequence[CIStatement], c: CIStatement) -> bool:
    # X1,X2 _||_ Y | W entails X1 _||_ Y | W,X2
    if len(premises) != 1:
        return False
    (p,) = premises
    if not c.left <= p.left or c.right != p.right:
        return False
    return c.given == p.given | (p.left - c.left)


def _contraction_once(p1: CIStatement, p2: CIStatement, c: CIStatement) -> bool:
    # p1: X _||_ Y | Z,W and p2: X _||_ Z | W entail X _||_ Z,Y | W
    if p1.left != p2.left or c.left != p2.left:
        return False
    if c.given != p2.given or p1.given != p2.right | p2.given:
        return False
    return c.right == p2.right | p1.right


def _is_contraction(premises: Sequence[CIStatement], c: CIStatement) -> bool:
    if len(premises) != 2:
        return False
    a, b = premises
    return _contraction_once(a, b, c) or _contraction_once(b, a, c)


def _is_partition(premises: Sequence[CIStatement], c: CIStatement) -> bool:
    # Premises split a common ground set into block versus rest under a
    # common conditioning set; the conclusion may split the ground set
    # along any union of cells of the meet of those two-block partitions.
    if not premises:
        return False
    given = premises[0].given
    ground = premises[0].left | premises[0].right
    for p in premises:
        if p.given != given or p.left | p.right != ground:
            return False
    if c.given != given or c.left | c.right != ground:
        return False
    signature = {s: tuple(s in p.left for p in premises) for s in ground}
    cells: dict[tuple[bool, ...], set[str]] = {}
    for s, sig in signature.items():
        cells.setdefault(sig, set()).add(s)
    return all(cell <= c.left or cell <= c.right for cell in cells.values())


def _is_copy(premises: Sequence[CIStatement], c: CIStatement) -> bool:
    # X _||_ Y | W entails X _||_ Y,W' | W with W' formal copies of
    # conditioning symbols, spelled with a prime suffix.
    if len(premises) != 1:
        return False
    (p,) = premises
    if c.left != p.left or c.given != p.given or not p.right <= c.right:
        return False
    extra = c.right - p.right
    return all(s.endswith("'") and s[:-1] in p.given for s in extra)


RULES = {
    "symmetry": _is_symmetry,
    "decomposition": _is_decomposition,
    "weak_union": _is_weak_union,
    "contraction": _is_contraction,
    "partition": _is_partition,
    "copy_axiom": _is_copy,
}

CLOSURE_RULES = ("symmetry", "decomposition", "weak_union", "contraction")


@dataclass(frozen=True)
class DerivationStep:
    rule: str
    premises: tuple[int, ...]
    conclusion: CIStatement

    def __post_init__(self):
        object.__setattr__(self, "premises", tuple(int(i) for i in self.premises))


@dataclass(frozen=True)
class Derivation:
    """A replayable proof: axioms, then steps over a shared index space.

    Premise indices below ``len(axioms)`` refer to axioms; higher
    indices refer to conclusions of earlier steps, offset by the axiom
    count.
    """

    symbols: tuple[str, ...]
    axioms: tuple[CIStatement, ...]
    steps: tuple[DerivationStep, ...]

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        object.__setattr__(self, "axioms", tuple(self.axioms))
        object.__setattr__(self, "steps", tuple(self.steps))
        allowed = set(self.symbols) | {s + "'" for s in self.symbols}
        for stmt in itertools.chain(
            self.axioms, (s.conclusion for s in self.steps)
        ):
            stray = stmt.symbols - allowed
            if stray:
                raise UnknownWire(
                    f"statement uses undeclared symbols {sorted(stray)}"
                )

    def statements(self) -> list[CIStatement]:
        """Axioms followed by step conclusions, in premise-index order."""
        return list(self.axioms) + [s.conclusion for s in self.steps]


@dataclass(frozen=True)
class DerivationReport:
    ok: bool
    failed_step: int | None = None
    failed_rule: str | None = None
    message: str = ""

    def __bool__(self) -> bool:
        return self.ok


def validate_derivation(d: Derivation) -> DerivationReport:
    """Replay a derivation; report the first step that is not a rule instance."""
    known: list[CIStatement] = list(d.axioms)
    for k, step in enumerate(d.steps):
        checker = RULES.get(step.rule)
        if checker is None:
            return DerivationReport(False, k, step.rule, f"unknown rule {step.rule!r}")
        if any(i < 0 or i >= len(known) for i in step.premises):
            return DerivationReport(
                False, k, step.rule, f"premise index out of range in step {k}"
            )
        premises = [known[i] for i in step.premises]
        if not checker(premises, step.conclusion):
            return DerivationReport(
                False,
                k,
                step.rule,
                f"step {k} is not an instance of {step.rule}: {step.conclusion}",
            )
        known.append(step.conclusion)
    return DerivationReport(True)


Provenance = tuple[str, tuple[CIStatement, ...]]


@dataclass(frozen=True, eq=False)
class Closure:
    """Statements reachable from the axioms, with their provenance."""

    statements: frozenset[CIStatement]
    complete: bool
    ground: tuple[str, ...]
    axioms: tuple[CIStatement, ...]
    provenance: Mapping[CIStatement, Provenance] = field(repr=False)

    def derivation(self, stmt: CIStatement) -> Derivation:
        """A replayable derivation of one closure statement from the axioms."""
        if stmt not in self.statements:
            raise UnknownWire(f"statement not in closure: {stmt}")
        order: list[CIStatement] = []
        seen: set[CIStatement] = set()

        def visit(s: CIStatement):
            if s in seen:
                return
            seen.add(s)
            rule, premises = self.provenance[s]
            for q in premises:
                visit(q)
            if rule != "axiom":
                order.append(s)

        visit(stmt)
        index = {s: i for i, s in enumerate(self.axioms)}
        steps = []
        for s in order:
            rule, premises = self.provenance[s]
            steps.append(
                DerivationStep(rule, tuple(index[q] for q in premises), s)
            )
            index[s] = len(index)
        return Derivation(self.ground, self.axioms, tuple(steps))


def _proper_subsets(symbols: frozenset[str]):
    ordered = sorted(symbols)
    for size in range(1, len(ordered)):
        yield from (frozenset(c) for c in itertools.combinations(ordered, size))


def semigraphoid_closure(
    axioms: Iterable[CIStatement],
    ground: Iterable[str],
    budget: int = 10_000,
) -> Closure:
    """Forward-chain the four core rules from the axioms to a fixed point.

    ``budget`` caps the number of statements derived beyond the axioms;
    exceeding it raises BudgetExceeded with the partial closure (its
    ``complete`` flag cleared) attached.
    """
    ground = tuple(sorted(set(ground)))
    ground_set = set(ground)
    axioms = tuple(dict.fromkeys(axioms))
    for a in axioms:
        stray = a.symbols - ground_set
        if stray:
            raise UnknownWire(f"axiom uses symbols outside ground: {sorted(stray)}")

    provenance: dict[CIStatement, Provenance] = {}
    by_left: dict[frozenset[str], list[CIStatement]] = {}
    queue: deque[CIStatement] = deque()
    derived = 0

    def partial() -> Closure:
        return Closure(
            statements=frozenset(provenance),
            complete=False,
            ground=ground,
            axioms=axioms,
            provenance=dict(provenance),
        )

    def admit(stmt: CIStatement, rule: str, premises: tuple[CIStatement, ...]):
        nonlocal derived
        if stmt in provenance:
            return
        if rule != "axiom":
            if derived >= budget:
                raise BudgetExceeded(
                    f"closure budget of {budget} exhausted", partial=partial()
                )
            derived += 1
        provenance[stmt] = (rule, premises)
        by_left.setdefault(stmt.left, []).append(stmt)
        queue.append(stmt)

    for a in axioms:
        admit(a, "axiom", ())

    while queue:
        s = queue.popleft()
        admit(s.swapped(), "symmetry", (s,))
        for x1 in _proper_subsets(s.left):
            admit(CIStatement(x1, s.right, s.given), "decomposition", (s,))
            admit(
                CIStatement(x1, s.right, s.given | (s.left - x1)),
                "weak_union",
                (s,),
            )
        # contraction partners share their left set; a statement can never
        # pair with itself since its right side is disjoint from its given
        for t in list(by_left.get(s.left, ())):
            for p1, p2 in ((s, t), (t, s)):
                if p1.given == p2.right | p2.given:
                    admit(
                        CIStatement(p2.left, p2.right | p1.right, p2.given),
                        "contraction",
                        (p1, p2),
                    )
    return Closure(
        statements=frozenset(provenance),
        complete=True,
        ground=ground,
        axioms=axioms,
        provenance=provenance,
    )
