"""Partial derivatives and function-symbol instantiation."""

from __future__ import annotations

from typing import Mapping, Sequence

from .expr import (
    ONE,
    ZERO,
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
    as_expr,
    mul,
    power,
    rebuild,
    substitute,
)


def differentiate(e: Expr, v: Var) -> Expr:
    """Return the partial derivative of ``e`` with respect to ``v``.

    Opaque functions are differentiated by the chain rule, bumping the
    multi-index at each argument position.
    """
    cache: dict[Expr, Expr] = {}

    def d(node: Expr) -> Expr:
        hit = cache.get(node)
        if hit is not None:
            return hit
        out = _d(node)
        cache[node] = out
        return out

    def _d(node: Expr) -> Expr:
        if isinstance(node, Const):
            return ZERO
        if isinstance(node, Var):
            return ONE if node == v else ZERO
        if isinstance(node, Add):
            return add(*(d(t) for t in node.terms))
        if isinstance(node, Mul):
            fs = node.factors
            terms = []
            for i, f in enumerate(fs):
                df = d(f)
                if df == ZERO:
                    continue
                terms.append(mul(*fs[:i], df, *fs[i + 1 :]))
            return add(*terms)
        if isinstance(node, Pow):
            db = d(node.base)
            if db == ZERO:
                return ZERO
            return mul(Const(node.exp), power(node.base, node.exp - 1), db)
        if isinstance(node, Exp):
            du = d(node.arg)
            return ZERO if du == ZERO else mul(node, du)
        if isinstance(node, Ln):
            du = d(node.arg)
            return ZERO if du == ZERO else mul(du, power(node.arg, -1))
        if isinstance(node, Func):
            terms = []
            for i, a in enumerate(node.args):
                da = d(a)
                if da == ZERO:
                    continue
                terms.append(mul(node.derivative(i), da))
            return add(*terms)
        raise TypeError(f"cannot differentiate {type(node).__name__}")

    return d(e)


def differentiate_many(e: Expr, vars_: Sequence[Var]) -> Expr:
    for v in vars_:
        e = differentiate(e, v)
    return e


def instantiate(e: Expr, definitions: Mapping[str, tuple[Sequence[Var], Expr]]) -> Expr:
    """Replace opaque functions by concrete bodies.

    ``definitions`` maps a function name to ``(params, body)``.  An
    application ``F_{m}(x1..xr)`` becomes the ``m``-th partial of ``body``
    with ``params`` replaced by the arguments.  Arguments are instantiated
    first; the replacement itself is not re-scanned.
    """
    derivative_cache: dict[tuple[str, tuple], Expr] = {}

    def body_derivative(name: str, mindex: tuple) -> Expr:
        key = (name, mindex)
        if key not in derivative_cache:
            params, body = definitions[name]
            out = as_expr(body)
            for p, m in zip(params, mindex):
                for _ in range(m):
                    out = differentiate(out, p)
            derivative_cache[key] = out
        return derivative_cache[key]

    cache: dict[Expr, Expr] = {}

    def go(node: Expr) -> Expr:
        if node in cache:
            return cache[node]
        kids = node.children()
        new = tuple(go(k) for k in kids)
        if isinstance(node, Func) and node.name in definitions:
            params, _ = definitions[node.name]
            if len(params) != node.arity:
                raise ValueError(
                    f"{node.name} has arity {node.arity}, definition takes {len(params)}"
                )
            out = substitute(body_derivative(node.name, node.mindex), dict(zip(params, new)))
        elif new == kids:
            out = node
        else:
            out = rebuild(node, new)
        cache[node] = out
        return out

    return go(e)
