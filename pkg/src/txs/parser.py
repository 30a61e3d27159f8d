"""Text format: recursive-descent parser and plain/latex/json printers.

Grammar (whitespace insignificant)::

    expression := ['-'] term (('+'|'-') term)*
    term       := atom (('*'|'/') atom)*
    atom       := rational | constant | tensor | wrapper | '(' expression ')'
    tensor     := head '[' [index (',' index)*] ']' ['^' ['-'] integer]
    wrapper    := deriv '[' index '][' (tensor | wrapper) ']'
    index      := ['-'] label
    rational   := integer ['/' integer]

A parenthesized group containing no tensor factors is a coefficient;
divisors must be pure coefficients.  Plain printing round-trips through
``parse`` for expressions in normal form.
"""

from __future__ import annotations

import json
import re

import sympy as sp

from .errors import ParseError, UndeclaredHeadError
from .expr import (
    Expression,
    Factor,
    Index,
    Term,
    ZERO,
    expression,
    make_term,
    mul as expr_mul,
    term_free_indices,
)

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<ident>[A-Za-z][A-Za-z0-9]*)"
    r"|(?P<sym>\*\*|[-+*/^\[\](),]))"
)


class _Lexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.tokens: list[tuple[str, str, int]] = []
        while self.pos < len(text):
            m = _TOKEN_RE.match(text, self.pos)
            if m is None or m.end() == self.pos:
                if text[self.pos :].strip() == "":
                    break
                raise ParseError(
                    f"unexpected character {text[self.pos]!r}",
                    *self._linecol(self.pos),
                )
            if m.group("num"):
                self.tokens.append(("num", m.group("num"), m.start()))
            elif m.group("ident"):
                self.tokens.append(("ident", m.group("ident"), m.start()))
            else:
                sym = m.group("sym")
                if sym == "**":
                    sym = "^"
                self.tokens.append(("sym", sym, m.start()))
            self.pos = m.end()
        self.tokens.append(("end", "", len(text)))
        self.i = 0

    def _linecol(self, offset):
        upto = self.text[:offset]
        line = upto.count("\n") + 1
        col = offset - (upto.rfind("\n") + 1) + 1
        return line, col

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, text, off = self.next()
        if text != value:
            raise ParseError(
                f"expected {value!r}, found {text or 'end of input'!r}",
                *self._linecol(off),
            )

    def error(self, message):
        _, _, off = self.peek()
        raise ParseError(message, *self._linecol(off))


def valid_label(label: str, session) -> bool:
    if label in session.alphabet:
        return True
    return (
        len(label) > 1
        and label[0] in session.alphabet
        and label[1:].isdigit()
    )


class _Parser:
    def __init__(self, text: str, session):
        self.lex = _Lexer(text)
        self.session = session

    def parse_expression(self) -> Expression:
        terms = []
        sign = 1
        if self.lex.peek()[1] == "-":
            self.lex.next()
            sign = -1
        terms.append(self._term(sign))
        while self.lex.peek()[1] in ("+", "-"):
            op = self.lex.next()[1]
            terms.append(self._term(1 if op == "+" else -1))
        out = ZERO
        for t in terms:
            out = out + t
        return expression(out.terms)

    def _term(self, sign: int) -> Expression:
        coeff = sp.Integer(sign)
        factors: list[Factor] = []
        parts: list[Expression] = []
        while True:
            c, f, e = self._atom()
            if c is not None:
                coeff *= c
            if f is not None:
                factors.append(f)
            if e is not None:
                parts.append(e)
            nxt = self.lex.peek()[1]
            if nxt == "*":
                self.lex.next()
                continue
            if nxt == "/":
                self.lex.next()
                c, f, e = self._atom()
                if f is not None or e is not None:
                    self.lex.error("divisor must be a pure coefficient")
                coeff /= c
                continue
            break
        base = expression([make_term(coeff, factors, self.session)])
        for part in parts:
            base = expr_mul(base, part, self.session)
        return base

    def _atom(self):
        """One multiplicand: (coefficient, factor, expression) with exactly
        one slot non-None."""
        kind, text, off = self.lex.peek()
        if text == "(":
            self.lex.next()
            inner = self.parse_expression()
            self.lex.expect(")")
            if all(not t.factors for t in inner.terms):
                value = sum(
                    (t.coefficient for t in inner.terms), sp.Integer(0)
                )
                return value, None, None
            return None, None, inner
        if kind == "num":
            self.lex.next()
            value = sp.Integer(int(text))
            if self.lex.peek()[1] == "/":
                save = self.lex.i
                self.lex.next()
                k2, t2, _ = self.lex.peek()
                if k2 == "num":
                    self.lex.next()
                    return value / sp.Integer(int(t2)), None, None
                self.lex.i = save
            return value, None, None
        if kind == "ident":
            self.lex.next()
            if self.lex.peek()[1] == "[":
                return None, self._tensor_or_wrapper(text), None
            if text in self.session.constants:
                return sp.Symbol(text), None, None
            raise ParseError(
                f"undeclared constant symbol {text!r}",
                *self.lex._linecol(off),
            )
        self.lex.error(f"unexpected {text or 'end of input'!r}")

    def _tensor_or_wrapper(self, head: str) -> Factor:
        if head in self.session.derivatives:
            self.lex.expect("[")
            windex = self._index()
            self.lex.expect("]")
            self.lex.expect("[")
            kind, inner_head, off = self.lex.next()
            if kind != "ident":
                raise ParseError(
                    "expected a tensor inside a derivative",
                    *self.lex._linecol(off),
                )
            inner = self._tensor_or_wrapper(inner_head)
            self.lex.expect("]")
            if inner.power != 1:
                self.lex.error("cannot differentiate a powered factor")
            return Factor(
                inner.head, inner.indices, (windex,) + inner.wrappers, 1
            )
        decl = self.session.tensor(head)  # raises UndeclaredHeadError
        self.lex.expect("[")
        indices = []
        if self.lex.peek()[1] != "]":
            indices.append(self._index())
            while self.lex.peek()[1] == ",":
                self.lex.next()
                indices.append(self._index())
        self.lex.expect("]")
        power = 1
        if self.lex.peek()[1] == "^":
            self.lex.next()
            psign = 1
            if self.lex.peek()[1] == "-":
                self.lex.next()
                psign = -1
            kind, text, off = self.lex.next()
            if kind != "num":
                raise ParseError("expected integer power", *self.lex._linecol(off))
            power = psign * int(text)
        return Factor(head, tuple(indices), (), power)

    def _index(self) -> Index:
        up = True
        if self.lex.peek()[1] == "-":
            self.lex.next()
            up = False
        kind, text, off = self.lex.next()
        if kind != "ident":
            raise ParseError("expected an index label", *self.lex._linecol(off))
        if not valid_label(text, self.session):
            raise ParseError(
                f"label {text!r} is not in the manifold alphabet",
                *self.lex._linecol(off),
            )
        return Index(text, up)


def parse(text: str, session) -> Expression:
    parser = _Parser(text, session)
    expr = parser.parse_expression()
    kind, text_, off = parser.lex.peek()
    if kind != "end":
        raise ParseError(
            f"unexpected trailing input {text_!r}", *parser.lex._linecol(off)
        )
    return expr


# ---------------------------------------------------------------------------
# printers
# ---------------------------------------------------------------------------


def _display_mapping(term: Term, session) -> dict[str, str]:
    """Map reserved '%k' labels to unused display letters for printing."""
    labels = set()
    internal = []
    for f in term.factors:
        for i in f.slots:
            labels.add(i.label)
            if i.label.startswith("%") and i.label not in internal:
                internal.append(i.label)
    if not internal:
        return {}
    pool = [l for l in session.alphabet if l not in labels]
    k = 1
    while len(pool) < len(internal):
        cand = f"{session.alphabet[0]}{k}"
        if cand not in labels:
            pool.append(cand)
        k += 1
    return dict(zip(internal, pool))


def _coeff_str(coeff: sp.Expr) -> tuple[str, bool]:
    """Coefficient text and whether it already carries its own sign."""
    coeff = sp.nsimplify(coeff) if coeff.is_Float else coeff
    text = str(coeff).replace("**", "^")
    if coeff.is_Rational or coeff.is_Symbol:
        return text, True
    if coeff.is_Mul or coeff.is_Pow:
        # products of rationals and symbol powers stay inline
        if all(
            part.is_Rational or part.is_Symbol
            or (part.is_Pow and part.base.is_Symbol and part.exp.is_Integer)
            for part in coeff.as_ordered_factors()
        ):
            return text.replace(" ", ""), True
    return "(" + text + ")", False


def print_factor(f: Factor, session, mapping) -> str:
    def fmt(i: Index) -> str:
        label = mapping.get(i.label, i.label)
        return label if i.up else "-" + label

    core = f.head + "[" + ",".join(fmt(i) for i in f.indices) + "]"
    if f.power != 1:
        core += f"^{f.power}"
    deriv = session.derivative_name() if f.wrappers else ""
    for w in reversed(f.wrappers):
        core = f"{deriv}[{fmt(w)}][{core}]"
    return core


def print_term(term: Term, session) -> str:
    mapping = _display_mapping(term, session)
    parts = [print_factor(f, session, mapping) for f in term.factors]
    coeff = term.coefficient
    if coeff == 1 and parts:
        return "*".join(parts)
    if coeff == -1 and parts:
        return "-" + "*".join(parts)
    text, _ = _coeff_str(coeff)
    return "*".join([text] + parts)


def print_plain(expr: Expression, session) -> str:
    if expr.is_zero():
        return "0"
    out = ""
    for i, term in enumerate(expr.terms):
        text = print_term(term, session)
        if i == 0:
            out = text
        elif text.startswith("-"):
            out += " - " + text[1:]
        else:
            out += " + " + text
    return out


def _latex_indices(indices) -> str:
    out = ""
    prev_up = None
    for i in indices:
        if i.up != prev_up and prev_up is not None:
            out += "{}"
        out += ("^{%s}" % i.label) if i.up else ("_{%s}" % i.label)
        prev_up = i.up
    return out


def print_latex(expr: Expression, session) -> str:
    if expr.is_zero():
        return "0"
    parts = []
    for term in expr.terms:
        mapping = _display_mapping(term, session)
        body = []
        for f in term.factors:
            decl = session.tensor(f.head)
            shown = [Index(mapping.get(i.label, i.label), i.up) for i in f.indices]
            text = decl.print_name + _latex_indices(shown)
            if f.power != 1:
                text = "(%s)^{%d}" % (text, f.power)
            nabla = r"\partial" if session.is_flat() else r"\nabla"
            for w in reversed(f.wrappers):
                wi = Index(mapping.get(w.label, w.label), w.up)
                text = nabla + _latex_indices([wi]) + " " + text
            body.append(text)
        coeff = term.coefficient
        if coeff == 1 and body:
            coeff_text = ""
        elif coeff == -1 and body:
            coeff_text = "-"
        else:
            coeff_text = sp.latex(coeff)
            if coeff.is_Add:
                coeff_text = r"\left(%s\right)" % coeff_text
        parts.append(coeff_text + " ".join(body))
    out = parts[0]
    for p in parts[1:]:
        out += " - " + p[1:] if p.startswith("-") else " + " + p
    return out


def print_json(expr: Expression, session) -> str:
    terms = []
    for term in expr.terms:
        mapping = _display_mapping(term, session)

        def fmt(i: Index) -> str:
            label = mapping.get(i.label, i.label)
            return label if i.up else "-" + label

        factors = [
            {
                "head": f.head,
                "indices": [fmt(i) for i in f.indices],
                "derivatives": [fmt(w) for w in f.wrappers],
                "power": f.power,
            }
            for f in term.factors
        ]
        terms.append(
            {"coefficient": str(term.coefficient), "factors": factors}
        )
    return json.dumps({"schema": 1, "terms": terms})


def print_expr(expr: Expression, session, fmt: str = "plain") -> str:
    if fmt == "plain":
        return print_plain(expr, session)
    if fmt == "latex":
        return print_latex(expr, session)
    if fmt == "json":
        return print_json(expr, session)
    raise ValueError(f"unknown format {fmt!r}")
