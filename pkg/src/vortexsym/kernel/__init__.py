"""Symbolic kernel: expressions, the DSL, calculus, normal forms, zero tests."""

from .calculus import differentiate, instantiate
from .dsl import DSLError, Workspace, parse, to_dsl
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
    exp,
    free_vars,
    functions_in,
    ln,
    replace_nodes,
    substitute,
)
from .normal import NonPolynomialError, collect, normalize, rational_form
from .numeric import KernelInconsistency, ZeroTest, compile_expr, evaluate, is_zero, numeric_check

__all__ = [
    "Add", "Const", "DSLError", "Exp", "Expr", "Func", "KernelInconsistency", "Ln", "Mul",
    "NonPolynomialError", "ONE", "Pow", "Var", "Workspace", "ZERO", "ZeroTest", "collect",
    "compile_expr", "differentiate", "evaluate", "exp", "free_vars", "functions_in",
    "instantiate", "is_zero", "ln", "normalize", "numeric_check", "parse", "rational_form",
    "replace_nodes", "substitute", "to_dsl",
]
