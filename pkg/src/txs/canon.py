"""Canonical forms for terms under mono-term symmetries.

A term's slot arrangement is minimized over the product of per-factor
slot-symmetry groups and exchanges of identical factors, with dummy pairs
renamed to a canonical sequence (first occurrence ordered, oriented up) as
part of the comparison.  The result is the lexicographically minimal
arrangement; the sign of the minimizing group element is tracked, and a term
whose orbit contains its own negation canonicalizes to zero.

Curvature relations (Riemann self-trace to Ricci, Ricci trace to the scalar,
metric trace to the dimension) are applied before minimization when the
session enables them.
"""

from __future__ import annotations

from .errors import TxsError
from .expr import (
    ZERO,
    Expression,
    Factor,
    Index,
    Term,
    expression,
    single,
)
from .perm import SymmetrySpec, apply_perm, closure

_factor_group_cache: dict = {}

# contraction of Riemann index slots (i, j) -> sign of the resulting Ricci
_RIEMANN_TRACE_SIGN = {(0, 2): 1, (0, 3): -1, (1, 2): -1, (1, 3): 1}


def _factor_elements(spec: SymmetrySpec, nwrap: int, flat: bool):
    """Signed permutations of one factor's slots (indices + wrappers)."""
    key = (spec, nwrap, flat)
    cached = _factor_group_cache.get(key)
    if cached is not None:
        return cached
    total = spec.rank + nwrap
    gens = list(spec.embedded(0, total))
    if flat and nwrap > 1:
        for k in range(spec.rank, total - 1):
            images = list(range(total))
            images[k], images[k + 1] = images[k + 1], images[k]
            gens.append((tuple(images), 1))
    elems = tuple(closure(gens, total))
    _factor_group_cache[key] = elems
    return elems


def _apply_relations(term: Term, session) -> Term | None:
    """Rewrite curvature self-traces; None means the term is zero."""
    coeff = term.coefficient
    factors = list(term.factors)
    changed = True
    while changed:
        changed = False
        for i, f in enumerate(factors):
            decl = session.tensor(f.head)
            if decl.is_metric and f.wrappers:
                return None  # metric-compatible derivative
            pair = _internal_index_pair(f)
            if pair is None:
                continue
            a, b = pair
            if decl.is_metric:
                coeff = coeff * session.dimension_value()
                del factors[i]
                changed = True
                break
            if not session.curvature_relations:
                continue
            if decl.curvature == "riemann":
                if (a, b) in ((0, 1), (2, 3)):
                    return None
                sign = _RIEMANN_TRACE_SIGN[(a, b)] * session.ricci_sign
                rest = [f.indices[k] for k in range(4) if k not in (a, b)]
                factors[i] = Factor("Ricci", tuple(rest), f.wrappers)
                coeff = coeff * sign
                changed = True
                break
            if decl.curvature == "ricci":
                factors[i] = Factor("RS", (), f.wrappers)
                changed = True
                break
            if decl.curvature == "weyl":
                return None
    if coeff == 0:
        return None
    return Term(coeff, tuple(factors))


def _internal_index_pair(f: Factor):
    """First (i, j) with i < j where two index slots carry the same label."""
    for i in range(len(f.indices)):
        for j in range(i + 1, len(f.indices)):
            if f.indices[i].label == f.indices[j].label:
                return (i, j)
    return None


def _block_key(f: Factor, session):
    return (
        0 if session.is_metric(f.head) else 1,
        f.head,
        len(f.wrappers),
        f.power,
    )


def canonicalize(term: Term, session) -> Expression:
    """Canonical form of one term as an Expression (zero or a single term)."""
    reduced = _apply_relations(term, session)
    if reduced is None:
        return ZERO
    if not reduced.factors or all(not f.slots for f in reduced.factors):
        return single(reduced)
    factors = sorted(reduced.factors, key=lambda f: _block_key(f, session))

    # label classification
    occurrences: dict[str, int] = {}
    for f in factors:
        for index in f.slots:
            occurrences[index.label] = occurrences.get(index.label, 0) + 1
    free_list = sorted(
        (
            index
            for f in factors
            for index in f.slots
            if occurrences[index.label] == 1
        ),
        key=lambda i: (session.alphabet_rank(i.label), i.up),
    )
    free_value = {index.label: v for v, index in enumerate(free_list)}
    n_free = len(free_list)

    # blocks of exchange-identical factors
    blocks: list[list[int]] = []
    keys = [_block_key(f, session) for f in factors]
    for j, key in enumerate(keys):
        if blocks and keys[blocks[-1][0]] == key and len(factors[j].slots) > 0:
            blocks[-1].append(j)
        else:
            blocks.append([j])
    flat = session.is_flat()
    elements = []
    for f in factors:
        decl = session.tensor(f.head)
        elements.append(_factor_elements(decl.spec, len(f.wrappers), flat))
    slot_lists = [f.slots for f in factors]

    best: dict = {"values": None, "signs": set()}

    def descend(block_i, pos_in_block, used, values, assigned, counter, sign, tied):
        if block_i == len(blocks):
            bv = best["values"]
            if bv is None or values < bv:
                best["values"] = list(values)
                best["signs"] = {sign}
            elif values == bv:
                best["signs"].add(sign)
            return
        block = blocks[block_i]
        if pos_in_block == len(block):
            descend(block_i + 1, 0, used, values, assigned, counter, sign, tied)
            return
        base = len(values)
        width = len(slot_lists[block[0]])
        for j in block:
            if used & (1 << j):
                continue
            for images, esign in elements[j]:
                content = apply_perm(images, slot_lists[j])
                new_assigned = None
                new_counter = counter
                ok = True
                still_tied = tied
                added = 0
                for k, index in enumerate(content):
                    v = free_value.get(index.label)
                    if v is None:
                        src = new_assigned if new_assigned is not None else assigned
                        v = src.get(index.label)
                        if v is None:
                            v = n_free + new_counter
                            new_counter += 1
                            if new_assigned is None:
                                new_assigned = dict(assigned)
                            new_assigned[index.label] = v
                    if still_tied and best["values"] is not None:
                        ref = best["values"][base + k]
                        if v > ref:
                            ok = False
                            break
                        if v < ref:
                            still_tied = False
                    values.append(v)
                    added += 1
                if ok:
                    descend(
                        block_i,
                        pos_in_block + 1,
                        used | (1 << j),
                        values,
                        new_assigned if new_assigned is not None else assigned,
                        new_counter,
                        sign * esign,
                        still_tied,
                    )
                del values[len(values) - added :]

    n_total = sum(len(s) for s in slot_lists)
    descend(0, 0, 0, [], {}, 0, 1, True)
    if best["values"] is None:
        raise TxsError("canonicalization search failed")
    if 1 in best["signs"] and -1 in best["signs"]:
        return ZERO
    sign = next(iter(best["signs"]))

    # rebuild from the minimal value sequence
    n_dummies = max([v - n_free + 1 for v in best["values"] if v >= n_free], default=0)
    letters = _dummy_letters(session, {i.label for i in free_list}, n_dummies)
    seen: set[int] = set()
    rebuilt_slots: list[Index] = []
    for v in best["values"]:
        if v < n_free:
            rebuilt_slots.append(free_list[v])
        else:
            k = v - n_free
            if k in seen:
                rebuilt_slots.append(Index(letters[k], False))
            else:
                seen.add(k)
                rebuilt_slots.append(Index(letters[k], True))
    new_factors = []
    pos = 0
    for j, f in enumerate(factors):
        width = len(slot_lists[j])
        new_factors.append(f.with_slots(rebuilt_slots[pos : pos + width]))
        pos += width
    assert pos == n_total
    return single(Term(reduced.coefficient * sign, tuple(new_factors)))


def _dummy_letters(session, free_labels, count):
    pool = [l for l in session.alphabet if l not in free_labels]
    k = 1
    while len(pool) < count:
        cand = f"x{k}"
        if cand not in free_labels:
            pool.append(cand)
        k += 1
    return pool[:count]


def canonicalize_expression(expr: Expression, session) -> Expression:
    """Canonicalize every term; identical tensorial parts are not merged here
    (collect_tensors does that)."""
    out = []
    for term in expr.terms:
        canon = canonicalize(term, session)
        out.extend(canon.terms)
    return expression(out)
