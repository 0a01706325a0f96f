"""Infix expression language: workspaces, parser and printer.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := ('-'|'+') factor | base ('^' ['-'] integer)?
    base   := number | ident | ident '(' expr (',' expr)* ')'
            | 'exp' '(' expr ')' | 'ln' '(' expr ')' | '(' expr ')'

A function identifier may carry a positional-derivative suffix: ``H_1`` is
the first partial of ``H`` in its first slot, ``F2_45`` the mixed partial in
slots 4 and 5.  Slots above 9 are written with dots, e.g. ``K2_1.13``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .expr import (
    Add,
    Const,
    Exp,
    Expr,
    Func,
    Ln,
    Mul,
    Pow,
    Var,
    add,
    exp,
    ln,
    mul,
    neg,
    power,
)


class DSLError(ValueError):
    """Raised for malformed or ill-typed DSL input; carries the offset."""

    def __init__(self, message: str, position: int | None = None, text: str | None = None):
        self.position = position
        self.text = text
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message)


@dataclass
class Workspace:
    """Declared variables and function symbols (name -> arity)."""

    variables: dict[str, Var] = field(default_factory=dict)
    functions: dict[str, int] = field(default_factory=dict)

    def declare(self, name: str, kind: str = "dependent") -> Var:
        existing = self.variables.get(name)
        if existing is not None:
            if existing.kind != kind:
                raise ValueError(f"{name} already declared as {existing.kind}")
            return existing
        if name in self.functions:
            raise ValueError(f"{name} already declared as a function")
        v = Var(name, kind)
        self.variables[name] = v
        return v

    def declare_function(self, name: str, arity: int) -> None:
        if name in self.variables:
            raise ValueError(f"{name} already declared as a variable")
        if self.functions.get(name, arity) != arity:
            raise ValueError(f"{name} already declared with arity {self.functions[name]}")
        if "_" in name or name in ("exp", "ln"):
            raise ValueError(f"invalid function name {name!r}")
        self.functions[name] = arity

    def var(self, name: str) -> Var:
        return self.variables[name]

    def __getitem__(self, name: str) -> Var:
        return self.variables[name]

    def extended(self, functions: Mapping[str, int] | None = None, variables: Iterable[Var] = ()) -> "Workspace":
        ws = Workspace(dict(self.variables), dict(self.functions))
        for v in variables:
            ws.declare(v.name, v.kind)
        for name, arity in (functions or {}).items():
            ws.functions[name] = arity
        return ws

    def parse(self, text: str) -> Expr:
        return parse(text, self)


_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>\d+(?:\.\d+)?)"
    r"|(?P<ident>[A-Za-z][A-Za-z0-9]*(?:_[0-9]+(?:\.[0-9]+)*)?)"
    r"|(?P<op>[-+*/^(),])"
    r")"
)


def _tokenize(text: str):
    pos = 0
    tokens = []
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise DSLError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


def _split_derivative(ident: str, pos: int, text: str) -> tuple[str, list[int]]:
    if "_" not in ident:
        return ident, []
    name, suffix = ident.split("_", 1)
    if "." in suffix:
        slots = [int(s) for s in suffix.split(".")]
    else:
        slots = [int(ch) for ch in suffix]
    if any(s < 1 for s in slots):
        raise DSLError("derivative slots are 1-based", pos, text)
    return name, slots


class _Parser:
    def __init__(self, text: str, ws: Workspace):
        self.text = text
        self.ws = ws
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, value: str | None = None):
        tok = self.tokens[self.i]
        if value is not None and tok[1] != value:
            found = tok[1] or "end of input"
            raise DSLError(f"expected {value!r}, found {found!r}", tok[2], self.text)
        self.i += 1
        return tok

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise DSLError(f"unexpected {tok[1]!r}", tok[2], self.text)
        return e

    def expr(self) -> Expr:
        terms = [self.term()]
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            t = self.term()
            terms.append(t if op == "+" else neg(t))
        return add(*terms)

    def term(self) -> Expr:
        factors = [self.factor()]
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            f = self.factor()
            factors.append(f if op == "*" else power(f, -1))
        return mul(*factors)

    def factor(self) -> Expr:
        tok = self.peek()
        if tok[0] == "op" and tok[1] in ("-", "+"):
            self.take()
            inner = self.factor()
            return neg(inner) if tok[1] == "-" else inner
        b = self.base()
        if self.peek()[1] == "^":
            self.take()
            sign = 1
            if self.peek()[1] == "-":
                self.take()
                sign = -1
            ntok = self.take()
            if ntok[0] != "num" or "." in ntok[1]:
                raise DSLError("exponent must be an integer", ntok[2], self.text)
            try:
                return power(b, sign * int(ntok[1]))
            except ZeroDivisionError:
                raise DSLError("zero raised to a negative power", ntok[2], self.text) from None
        return b

    def base(self) -> Expr:
        kind, value, pos = self.take()
        if kind == "num":
            return Const(Fraction(value))
        if kind == "op" and value == "(":
            e = self.expr()
            self.take(")")
            return e
        if kind != "ident":
            found = value or "end of input"
            raise DSLError(f"unexpected {found!r}", pos, self.text)
        if value in ("exp", "ln"):
            self.take("(")
            arg = self.expr()
            self.take(")")
            return exp(arg) if value == "exp" else ln(arg)
        name, slots = _split_derivative(value, pos, self.text)
        if self.peek()[1] == "(":
            if name not in self.ws.functions:
                raise DSLError(f"undeclared function {name!r}", pos, self.text)
            self.take("(")
            args = [self.expr()]
            while self.peek()[1] == ",":
                self.take()
                args.append(self.expr())
            self.take(")")
            arity = self.ws.functions[name]
            if len(args) != arity:
                raise DSLError(
                    f"{name} expects {arity} argument(s), got {len(args)}", pos, self.text
                )
            mindex = [0] * arity
            for s in slots:
                if s > arity:
                    raise DSLError(f"derivative slot {s} exceeds arity of {name}", pos, self.text)
                mindex[s - 1] += 1
            return Func(name, args, mindex)
        if slots:
            raise DSLError(f"derivative suffix on non-function {name!r}", pos, self.text)
        if name in self.ws.variables:
            return self.ws.variables[name]
        if name in self.ws.functions:
            raise DSLError(f"function {name!r} used without arguments", pos, self.text)
        raise DSLError(f"undeclared identifier {name!r}", pos, self.text)


def parse(text: str, ws: Workspace) -> Expr:
    """Parse ``text`` against the declarations in ``ws``."""
    return _Parser(text, ws).parse()


# -- printing -----------------------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4


def _func_name(f: Func) -> str:
    if not f.order:
        return f.name
    slots = [i + 1 for i, m in enumerate(f.mindex) for _ in range(m)]
    if f.arity > 9:
        return f.name + "_" + ".".join(str(s) for s in slots)
    return f.name + "_" + "".join(str(s) for s in slots)


def _fraction(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def _split_sign(e: Expr) -> tuple[bool, Expr]:
    """Return (negative, magnitude) for a term when it has a negative coefficient."""
    if isinstance(e, Const) and e.value < 0:
        return True, Const(-e.value)
    if isinstance(e, Mul) and isinstance(e.factors[0], Const) and e.factors[0].value < 0:
        c = -e.factors[0].value
        rest = e.factors[1:]
        return True, mul(Const(c), *rest) if c != 1 else (rest[0] if len(rest) == 1 else Mul(rest))
    return False, e


def _print(e: Expr) -> tuple[str, int]:
    if isinstance(e, Const):
        v = e.value
        if v < 0:
            return "-" + _print(Const(-v))[0], _PREC_ADD
        if v.denominator != 1:
            return _fraction(v), _PREC_MUL
        return str(v.numerator), _PREC_ATOM
    if isinstance(e, Var):
        return e.name, _PREC_ATOM
    if isinstance(e, Func):
        return _func_name(e) + "(" + ", ".join(to_dsl(a) for a in e.args) + ")", _PREC_ATOM
    if isinstance(e, Exp):
        return "exp(" + to_dsl(e.arg) + ")", _PREC_ATOM
    if isinstance(e, Ln):
        return "ln(" + to_dsl(e.arg) + ")", _PREC_ATOM
    if isinstance(e, Pow):
        if e.exp < 0:
            return "1/" + _wrap(power(e.base, -e.exp), _PREC_POW), _PREC_MUL
        return _wrap(e.base, _PREC_ATOM) + "^" + str(e.exp), _PREC_POW
    if isinstance(e, Mul):
        num, den = [], []
        for f in e.factors:
            if isinstance(f, Pow) and f.exp < 0:
                den.append(power(f.base, -f.exp))
            else:
                num.append(f)
        sign = ""
        if num and isinstance(num[0], Const) and num[0].value < 0:
            sign = "-"
            c = -num[0].value
            num = ([Const(c)] if c != 1 else []) + num[1:]
        if num and isinstance(num[0], Const) and num[0].value.denominator != 1:
            c = num[0].value
            num = ([Const(c.numerator)] if c.numerator != 1 else []) + num[1:]
            den.insert(0, Const(c.denominator))
        numstr = "*".join(_wrap(f, _PREC_MUL) for f in num) if num else "1"
        if not den:
            return sign + numstr, _PREC_ADD if sign else _PREC_MUL
        if len(den) == 1:
            denstr = _wrap(den[0], _PREC_POW)
        else:
            denstr = "(" + "*".join(_wrap(f, _PREC_MUL) for f in den) + ")"
        return sign + numstr + "/" + denstr, _PREC_ADD if sign else _PREC_MUL
    if isinstance(e, Add):
        parts = []
        for i, t in enumerate(e.terms):
            negative, mag = _split_sign(t)
            s = _wrap(mag, _PREC_MUL) if negative else _print(t)[0]
            if i == 0:
                parts.append(("-" + s) if negative else s)
            else:
                parts.append((" - " + s) if negative else (" + " + s))
        return "".join(parts), _PREC_ADD
    raise TypeError(type(e).__name__)


def _wrap(e: Expr, min_prec: int) -> str:
    s, prec = _print(e)
    return s if prec >= min_prec else "(" + s + ")"


def to_dsl(e: Expr) -> str:
    """Render ``e`` in the DSL; ``parse(to_dsl(e))`` rebuilds an equal value."""
    return _print(e)[0]
