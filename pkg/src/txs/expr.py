"""Core expression model: indices, tensor factors, terms, expressions.

Everything is immutable.  A Term is an exact rational-function coefficient
times a product of tensor factors; an Expression is a sum of Terms (the empty
sum is zero).  Dummy indices are ordinary labels occurring twice with opposite
variance; fresh dummies drawn mid-computation use a reserved "%k" namespace
that canonicalization later renames into unused alphabet letters.
"""

from __future__ import annotations

import itertools
from typing import Iterable, NamedTuple

import sympy as sp

from .errors import (
    IndexPairingError,
    InhomogeneousFreeIndicesError,
    RankMismatchError,
)

_fresh_counter = itertools.count(1)


def fresh_label() -> str:
    """Next label from the reserved dummy namespace."""
    return f"%{next(_fresh_counter)}"


class Index(NamedTuple):
    label: str
    up: bool

    def flipped(self) -> "Index":
        return Index(self.label, not self.up)

    def __str__(self):
        return self.label if self.up else "-" + self.label


def idx(text: str) -> Index:
    """Index from '-a' / 'a' shorthand."""
    if text.startswith("-"):
        return Index(text[1:], False)
    return Index(text, True)


class Factor(NamedTuple):
    """One tensor factor: head applied to indices, optionally wrapped in
    covariant derivatives (outermost first) and raised to an integer power.

    Powers other than 1 are only allowed on scalar (rank-0, underived)
    factors; negative powers appear in solver rule templates.
    """

    head: str
    indices: tuple[Index, ...]
    wrappers: tuple[Index, ...] = ()
    power: int = 1

    @property
    def slots(self) -> tuple[Index, ...]:
        """All slots in canonical comparison order: indices, then wrappers
        innermost-first."""
        return self.indices + tuple(reversed(self.wrappers))

    def with_slots(self, slots: Iterable[Index]) -> "Factor":
        slots = tuple(slots)
        nidx = len(self.indices)
        indices = slots[:nidx]
        wrappers = tuple(reversed(slots[nidx:]))
        return Factor(self.head, indices, wrappers, self.power)

    def is_scalar(self) -> bool:
        return not self.indices and not self.wrappers


class Term(NamedTuple):
    coefficient: sp.Expr
    factors: tuple[Factor, ...]


class Expression(NamedTuple):
    terms: tuple[Term, ...]

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "Expression") -> "Expression":
        return Expression(self.terms + other.terms)


ZERO = Expression(())


def expression(terms: Iterable[Term]) -> Expression:
    """Expression from terms, dropping exact-zero coefficients."""
    kept = tuple(t for t in terms if t.coefficient != 0)
    return Expression(kept)


def single(term: Term) -> Expression:
    return expression([term])


def scalar_expr(coeff) -> Expression:
    return expression([Term(sp.sympify(coeff), ())])


# ---------------------------------------------------------------------------
# factor ordering and term construction
# ---------------------------------------------------------------------------


def factor_sort_key(factor: Factor, session):
    is_metric = 0 if session.is_metric(factor.head) else 1
    return (
        is_metric,
        factor.head,
        len(factor.wrappers),
        factor.power,
        tuple((i.label, i.up) for i in factor.slots),
    )


def make_term(coeff, factors: Iterable[Factor], session) -> Term:
    """Normalized term: scalar powers merged, factors sorted, ranks checked."""
    coeff = sp.sympify(coeff)
    merged: list[Factor] = []
    scalars: dict[str, int] = {}
    for f in factors:
        decl = session.tensor(f.head)
        if len(f.indices) != decl.rank:
            raise RankMismatchError(
                f"{f.head} takes {decl.rank} indices, got {len(f.indices)}"
            )
        if f.power != 1 and not f.is_scalar():
            raise IndexPairingError(
                f"power {f.power} on non-scalar factor {f.head}"
            )
        if f.is_scalar():
            scalars[f.head] = scalars.get(f.head, 0) + f.power
        else:
            merged.append(f)
    for head, power in sorted(scalars.items()):
        if power != 0:
            merged.append(Factor(head, (), (), power))
    merged.sort(key=lambda f: factor_sort_key(f, session))
    term = Term(coeff, tuple(merged))
    validate_pairing(term)
    return term


def validate_pairing(term: Term):
    seen: dict[str, list[bool]] = {}
    for f in term.factors:
        for index in f.slots:
            seen.setdefault(index.label, []).append(index.up)
    for label, ups in seen.items():
        if len(ups) > 2:
            raise IndexPairingError(f"label {label} occurs {len(ups)} times")
        if len(ups) == 2 and ups[0] == ups[1]:
            raise IndexPairingError(
                f"label {label} occurs twice with the same variance"
            )


def term_slots(term: Term) -> list[Index]:
    out = []
    for f in term.factors:
        out.extend(f.slots)
    return out


def term_free_indices(term: Term) -> set[Index]:
    counts: dict[str, list[Index]] = {}
    for index in term_slots(term):
        counts.setdefault(index.label, []).append(index)
    return {v[0] for v in counts.values() if len(v) == 1}


def term_dummy_labels(term: Term) -> set[str]:
    counts: dict[str, int] = {}
    for index in term_slots(term):
        counts[index.label] = counts.get(index.label, 0) + 1
    return {label for label, c in counts.items() if c == 2}


def free_indices(expr: Expression) -> set[Index]:
    """Common free-index set of all terms; error when terms disagree."""
    if expr.is_zero():
        return set()
    frees = term_free_indices(expr.terms[0])
    for term in expr.terms[1:]:
        if term_free_indices(term) != frees:
            raise InhomogeneousFreeIndicesError(
                "terms do not share the same free indices"
            )
    return frees


# ---------------------------------------------------------------------------
# relabeling and algebra
# ---------------------------------------------------------------------------


def relabel_term(term: Term, mapping: dict[str, str]) -> Term:
    """Rename labels everywhere they occur (variance untouched)."""

    def ren(i: Index) -> Index:
        return Index(mapping.get(i.label, i.label), i.up)

    factors = tuple(
        Factor(
            f.head,
            tuple(ren(i) for i in f.indices),
            tuple(ren(i) for i in f.wrappers),
            f.power,
        )
        for f in term.factors
    )
    return Term(term.coefficient, factors)


def freshen_dummies(term: Term) -> Term:
    mapping = {label: fresh_label() for label in term_dummy_labels(term)}
    return relabel_term(term, mapping)


def term_mul(t1: Term, t2: Term, session) -> Term:
    """Product of two terms; the second term's dummies are freshened so that
    its internal pairings never collide with the first's labels."""
    t2 = freshen_dummies(t2)
    return make_term(
        t1.coefficient * t2.coefficient, t1.factors + t2.factors, session
    )


def mul(e1: Expression, e2: Expression, session) -> Expression:
    out = []
    for t1 in e1.terms:
        for t2 in e2.terms:
            out.append(term_mul(t1, t2, session))
    return expression(out)


def scale(e: Expression, coeff) -> Expression:
    coeff = sp.sympify(coeff)
    return expression(
        [Term(t.coefficient * coeff, t.factors) for t in e.terms]
    )


def sub(e1: Expression, e2: Expression) -> Expression:
    return e1 + scale(e2, -1)


# ---------------------------------------------------------------------------
# metric contraction
# ---------------------------------------------------------------------------


def contract_metric(expr: Expression, session) -> Expression:
    """Remove every metric factor that shares a dummy with another factor or
    with another metric, raising/lowering as needed; metric self-traces become
    the manifold dimension."""
    return expression(
        [_contract_metric_term(t, session) for t in expr.terms]
    )


def _contract_metric_term(term: Term, session) -> Term:
    coeff = term.coefficient
    factors = list(term.factors)
    changed = True
    while changed:
        changed = False
        for i, f in enumerate(factors):
            if not session.is_metric(f.head) or f.wrappers:
                continue
            a, b = f.indices
            if a.label == b.label:
                # metric trace: g^a_a = dim
                coeff = coeff * session.dimension_value()
                del factors[i]
                changed = True
                break
            partner = _find_partner(factors, i, a)
            if partner is not None:
                j, k = partner
                g = factors[j]
                slots = list(g.slots)
                slots[k] = b
                factors[j] = g.with_slots(slots)
                del factors[i]
                changed = True
                break
            partner = _find_partner(factors, i, b)
            if partner is not None:
                j, k = partner
                g = factors[j]
                slots = list(g.slots)
                slots[k] = a
                factors[j] = g.with_slots(slots)
                del factors[i]
                changed = True
                break
    if not factors:
        return Term(coeff, ())
    from_session = make_term(coeff, factors, session)
    return from_session


def _find_partner(factors, skip, index: Index):
    """Position (factor, slot) of the opposite-variance occurrence of label."""
    for j, f in enumerate(factors):
        if j == skip:
            continue
        for k, other in enumerate(f.slots):
            if other.label == index.label and other.up != index.up:
                return (j, k)
    return None
