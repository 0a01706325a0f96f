"""Symmetry residuals, on-shell reduction and determining systems."""

from __future__ import annotations

from dataclasses import dataclass, field

from .jet import JetSpace, VectorField, apply, prolong
from .kernel import (
    ZERO,
    Const,
    Expr,
    Var,
    collect,
    differentiate,
    free_vars,
    functions_in,
    is_zero,
    normalize,
    replace_nodes,
    substitute,
    to_dsl,
)
from .kernel.expr import add, mul, power
from .report import VerificationReport


class ModeError(ValueError):
    """Residual mode incompatible with the field's scope."""


class LinearSolveError(ValueError):
    pass


@dataclass(frozen=True)
class Equation:
    """A residual asserted to vanish, with the jet variable used as pivot."""

    name: str
    residual: Expr
    space: JetSpace
    pivot: Var

    def __post_init__(self):
        if normalize(differentiate(self.residual, self.pivot)) == ZERO:
            raise ValueError(f"{self.name}: residual does not depend on pivot {self.pivot.name}")

    @property
    def pivot_index(self) -> int:
        return self.space.jets.index(self.pivot) + 1

    def solved_pivot(self) -> Expr:
        """The pivot jet variable expressed through the remaining coordinates."""
        r = normalize(self.residual)
        a = normalize(differentiate(r, self.pivot))
        if free_vars(a) & {self.pivot} or normalize(differentiate(a, self.pivot)) != ZERO:
            raise ValueError(f"{self.name} is not linear in {self.pivot.name}")
        b = normalize(substitute(r, {self.pivot: ZERO}))
        return normalize(mul(-1, b, power(a, -1)))


@dataclass
class DeterminingSystem:
    """Ordered ``{jet monomial: coefficient}``; every coefficient must vanish."""

    equations: dict
    provenance: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.equations)

    def members(self) -> list:
        return list(self.equations.values())

    def reconstruct(self) -> Expr:
        return normalize(add(*(mul(m, c) for m, c in self.equations.items())))

    def to_json(self) -> list:
        return [
            {"monomial": to_dsl(m), "coefficient": to_dsl(c)} for m, c in self.equations.items()
        ]


def symmetry_residual(v: VectorField, eq: Equation, mode: str = "prolonged", normalized: bool = True) -> Expr:
    """v^(1)[residual] (prolonged mode) or v[residual] (direct mode)."""
    if mode == "prolonged":
        if not v.is_base_only(eq.space):
            raise ModeError("prolonged mode needs a field on (x, u) only")
        return apply(prolong(v, eq.space), eq.residual, normalized)
    if mode == "direct":
        return apply(v, eq.residual, normalized)
    raise ModeError(f"unknown mode {mode!r}")


def reduce_on_shell(e: Expr, eq: Equation) -> Expr:
    """Substitute the solved pivot derivative, restricting ``e`` to the equation."""
    return normalize(substitute(e, {eq.pivot: eq.solved_pivot()}))


def derive_determining(ansatz: VectorField, eq: Equation, reduction: str = "free", mode: str = "prolonged") -> DeterminingSystem:
    """Split the symmetry residual over jet monomials.

    ``free`` treats every jet variable as arbitrary; ``on_shell`` first
    eliminates the pivot, then collects over the remaining jets.
    """
    residual = symmetry_residual(ansatz, eq, mode)
    if reduction == "on_shell":
        residual = reduce_on_shell(residual, eq)
        jets = [j for j in eq.space.jets if j != eq.pivot]
    elif reduction == "free":
        jets = list(eq.space.jets)
    else:
        raise ValueError(f"unknown reduction {reduction!r}")
    system = collect(residual, jets)
    return DeterminingSystem(
        system,
        {"equation": eq.name, "reduction": reduction, "mode": mode, "collected_over": [j.name for j in jets]},
    )


def _scalar_multiple(a: Expr, b: Expr):
    """Return c with a == c*b for a nonzero rational c, else None."""
    if b == ZERO:
        return None
    try:
        r = normalize(mul(a, power(b, -1)))
    except ZeroDivisionError:
        return None
    if isinstance(r, Const) and r.value != 0:
        return r.value
    return None


def _membership(xs: list, ys: list) -> list:
    missing = []
    for x in xs:
        if not any(_scalar_multiple(x, y) is not None for y in ys):
            missing.append(x)
    return missing


def compare_systems(derived: list, expected: list, claim: str = "determining systems equivalent") -> VerificationReport:
    """Mutual membership of normalized members, allowing nonzero rational scaling."""
    a = [normalize(x) for x in derived if normalize(x) != ZERO]
    b = [normalize(x) for x in expected if normalize(x) != ZERO]
    extra = _membership(a, b)
    missing = _membership(b, a)
    verdict = "verified" if not extra and not missing else "refuted"
    return VerificationReport(
        claim,
        verdict,
        residual=extra[0] if extra else (missing[0] if missing else None),
        details={
            "derived_count": len(a),
            "expected_count": len(b),
            "derived_not_expected": [to_dsl(x) for x in extra],
            "expected_not_derived": [to_dsl(x) for x in missing],
        },
    )


def solve_linear_coefficient(ansatz: VectorField, eq: Equation, target: str) -> Expr:
    """Solve v[residual] = 0 for the opaque coefficient named ``target``.

    The direct residual must be linear in the undifferentiated ``target``
    application with a multiplier that is not identically zero.
    """
    residual = symmetry_residual(ansatz, eq, "direct")
    nodes = [f for f in functions_in(residual) if f.name == target]
    if not nodes:
        raise LinearSolveError(f"{target} does not occur in the residual")
    if any(f.order for f in nodes) or len(nodes) > 1:
        raise LinearSolveError(f"{target} must occur once and undifferentiated")
    placeholder = Var(f"__{target}", "parameter")
    r = normalize(replace_nodes(residual, {nodes[0]: placeholder}))
    multiplier = normalize(differentiate(r, placeholder))
    if normalize(differentiate(multiplier, placeholder)) != ZERO:
        raise LinearSolveError(f"residual is not linear in {target}")
    if is_zero(multiplier).verdict == "zero":
        raise LinearSolveError(f"multiplier of {target} vanishes identically")
    rest = normalize(substitute(r, {placeholder: ZERO}))
    return normalize(mul(-1, rest, power(multiplier, -1)))
