"""Immutable expression trees over jet-space variables.

Nodes are hashable and compare structurally.  The arithmetic operators build
lightly simplified trees (flattened sums/products, folded constants); the
canonical form lives in :mod:`vortexsym.kernel.normal`.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Union

KINDS = ("independent", "dependent", "jet", "second_jet", "parameter")

Number = Union[int, Fraction]


class Expr:
    __slots__ = ("_hash", "_key")

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), neg(self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return mul(self, power(as_expr(other), -1))

    def __rtruediv__(self, other):
        return mul(as_expr(other), power(self, -1))

    def __neg__(self):
        return neg(self)

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("only integer powers are supported")
        return power(self, n)

    # -- identity ---------------------------------------------------------
    def _fields(self) -> tuple:
        raise NotImplementedError

    def __eq__(self, other):
        if self is other:
            return True
        if type(self) is not type(other):
            return NotImplemented
        return hash(self) == hash(other) and self._fields() == other._fields()

    def __hash__(self):
        try:
            return self._hash
        except AttributeError:
            h = hash((type(self).__name__,) + self._fields())
            object.__setattr__(self, "_hash", h)
            return h

    def __setattr__(self, name, value):
        raise AttributeError("Expr nodes are immutable")

    def __repr__(self):
        from .dsl import to_dsl

        return f"{type(self).__name__}({to_dsl(self)!r})"

    def __str__(self):
        from .dsl import to_dsl

        return to_dsl(self)

    @property
    def sort_key(self) -> tuple:
        try:
            return self._key
        except AttributeError:
            k = self._make_key()
            object.__setattr__(self, "_key", k)
            return k

    def _make_key(self) -> tuple:
        raise NotImplementedError

    def children(self) -> tuple:
        return ()


def _init(obj, **attrs):
    for name, value in attrs.items():
        object.__setattr__(obj, name, value)


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value: Number):
        _init(self, value=Fraction(value))

    def _fields(self):
        return (self.value,)

    def _make_key(self):
        return (0, self.value)


class Var(Expr):
    """A named coordinate; ``kind`` is fixed at creation."""

    __slots__ = ("name", "kind")

    def __init__(self, name: str, kind: str = "dependent"):
        if kind not in KINDS:
            raise ValueError(f"unknown variable kind {kind!r}")
        _init(self, name=name, kind=kind)

    def _fields(self):
        return (self.name, self.kind)

    def _make_key(self):
        return (1, self.name)


class Func(Expr):
    """Application of an opaque function symbol.

    ``mindex`` counts derivatives per argument position, so mixed partials
    commute by construction.
    """

    __slots__ = ("name", "mindex", "args")

    def __init__(self, name: str, args: Iterable[Expr], mindex: Iterable[int] | None = None):
        args = tuple(as_expr(a) for a in args)
        if not args:
            raise ValueError("function symbols need at least one argument")
        mindex = tuple(mindex) if mindex is not None else (0,) * len(args)
        if len(mindex) != len(args) or any(m < 0 for m in mindex):
            raise ValueError(f"bad multi-index {mindex} for {name}/{len(args)}")
        _init(self, name=name, mindex=mindex, args=args)

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def order(self) -> int:
        return sum(self.mindex)

    def derivative(self, position: int) -> "Func":
        m = list(self.mindex)
        m[position] += 1
        return Func(self.name, self.args, m)

    def _fields(self):
        return (self.name, self.mindex, self.args)

    def _make_key(self):
        return (2, self.name, self.mindex, tuple(a.sort_key for a in self.args))

    def children(self):
        return self.args


class Exp(Expr):
    __slots__ = ("arg",)

    def __init__(self, arg: Expr):
        _init(self, arg=as_expr(arg))

    def _fields(self):
        return (self.arg,)

    def _make_key(self):
        return (3, self.arg.sort_key)

    def children(self):
        return (self.arg,)


class Ln(Expr):
    __slots__ = ("arg",)

    def __init__(self, arg: Expr):
        _init(self, arg=as_expr(arg))

    def _fields(self):
        return (self.arg,)

    def _make_key(self):
        return (4, self.arg.sort_key)

    def children(self):
        return (self.arg,)


class Pow(Expr):
    __slots__ = ("base", "exp")

    def __init__(self, base: Expr, exp: int):
        _init(self, base=as_expr(base), exp=int(exp))

    def _fields(self):
        return (self.base, self.exp)

    def _make_key(self):
        return (5, self.base.sort_key, self.exp)

    def children(self):
        return (self.base,)


class Mul(Expr):
    __slots__ = ("factors",)

    def __init__(self, factors: Iterable[Expr]):
        _init(self, factors=tuple(factors))

    def _fields(self):
        return self.factors

    def _make_key(self):
        return (6, tuple(f.sort_key for f in self.factors))

    def children(self):
        return self.factors


class Add(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[Expr]):
        _init(self, terms=tuple(terms))

    def _fields(self):
        return self.terms

    def _make_key(self):
        return (7, tuple(t.sort_key for t in self.terms))

    def children(self):
        return self.terms


ZERO = Const(0)
ONE = Const(1)


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)):
        return Const(x)
    raise TypeError(f"cannot convert {type(x).__name__} to Expr")


def is_const(e: Expr, value=None) -> bool:
    return isinstance(e, Const) and (value is None or e.value == value)


# -- light-simplifying constructors ------------------------------------------


def add(*terms: Expr) -> Expr:
    flat: list[Expr] = []
    c = Fraction(0)
    for t in terms:
        t = as_expr(t)
        if isinstance(t, Add):
            for u in t.terms:
                if isinstance(u, Const):
                    c += u.value
                else:
                    flat.append(u)
        elif isinstance(t, Const):
            c += t.value
        else:
            flat.append(t)
    if c != 0:
        flat.insert(0, Const(c))
    if not flat:
        return ZERO
    if len(flat) == 1:
        return flat[0]
    return Add(flat)


def mul(*factors: Expr) -> Expr:
    flat: list[Expr] = []
    c = Fraction(1)
    for f in factors:
        f = as_expr(f)
        parts = f.factors if isinstance(f, Mul) else (f,)
        for u in parts:
            if isinstance(u, Const):
                c *= u.value
            else:
                flat.append(u)
    if c == 0:
        return ZERO
    if c != 1:
        flat.insert(0, Const(c))
    if not flat:
        return Const(c)
    if len(flat) == 1:
        return flat[0]
    return Mul(flat)


def neg(e: Expr) -> Expr:
    return mul(Const(-1), e)


def power(base: Expr, n: int) -> Expr:
    base = as_expr(base)
    if n == 0:
        return ONE
    if n == 1:
        return base
    if isinstance(base, Const):
        if base.value == 0 and n < 0:
            raise ZeroDivisionError("0 raised to a negative power")
        return Const(base.value**n)
    if isinstance(base, Pow):
        return power(base.base, base.exp * n)
    return Pow(base, n)


def exp(u) -> Expr:
    u = as_expr(u)
    if is_const(u, 0):
        return ONE
    return Exp(u)


def ln(u) -> Expr:
    u = as_expr(u)
    if is_const(u, 1):
        return ZERO
    return Ln(u)


def sum_of(items: Iterable[Expr]) -> Expr:
    return add(*items)


# -- traversal helpers --------------------------------------------------------


def free_vars(e: Expr) -> frozenset:
    out = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            out.add(node)
        else:
            stack.extend(node.children())
    return frozenset(out)


def functions_in(e: Expr) -> frozenset:
    """All Func nodes (with their multi-index and arguments)."""
    out = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Func):
            out.add(node)
        stack.extend(node.children())
    return frozenset(out)


def contains(e: Expr, target: Expr) -> bool:
    stack = [e]
    while stack:
        node = stack.pop()
        if node == target:
            return True
        stack.extend(node.children())
    return False


def rebuild(e: Expr, children: tuple) -> Expr:
    if isinstance(e, Func):
        return Func(e.name, children, e.mindex)
    if isinstance(e, Exp):
        return exp(children[0])
    if isinstance(e, Ln):
        return ln(children[0])
    if isinstance(e, Pow):
        return power(children[0], e.exp)
    if isinstance(e, Mul):
        return mul(*children)
    if isinstance(e, Add):
        return add(*children)
    return e


def substitute(e: Expr, bindings: Mapping[Var, Expr]) -> Expr:
    """Simultaneous replacement of variables."""
    if not bindings:
        return e
    bindings = {k: as_expr(v) for k, v in bindings.items()}
    cache: dict[Expr, Expr] = {}

    def go(node: Expr) -> Expr:
        if node in cache:
            return cache[node]
        if isinstance(node, Var):
            out = bindings.get(node, node)
        elif isinstance(node, Const):
            out = node
        else:
            kids = node.children()
            new = tuple(go(k) for k in kids)
            out = node if new == kids else rebuild(node, new)
        cache[node] = out
        return out

    return go(e)


def replace_nodes(e: Expr, mapping: Mapping[Expr, Expr]) -> Expr:
    """Replace whole subtrees (any node kind) by structural match."""
    cache: dict[Expr, Expr] = {}

    def go(node: Expr) -> Expr:
        if node in mapping:
            return mapping[node]
        if node in cache:
            return cache[node]
        kids = node.children()
        if not kids:
            out = node
        else:
            new = tuple(go(k) for k in kids)
            out = node if new == kids else rebuild(node, new)
        cache[node] = out
        return out

    return go(e)
