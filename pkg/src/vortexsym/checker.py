"""High-level verifiers: generators, invariants, general solutions, flows, brackets."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from .detsys import Equation, symmetry_residual
from .jet import JetSpace, VectorField, apply, commutator
from .kernel import (
    ZERO,
    Expr,
    Func,
    Var,
    differentiate,
    free_vars,
    is_zero,
    normalize,
    substitute,
    to_dsl,
)
from .kernel.expr import add, mul
from .kernel.numeric import DEFAULT_SEED, DEFAULT_TOL
from .report import VerificationReport

GENERATOR_SAMPLES = 100


@dataclass(frozen=True)
class Invariant:
    label: str
    expression: Expr
    domain: str = ""  # e.g. "k2 != 0"

    def check_jet_free(self, js: JetSpace) -> None:
        if free_vars(self.expression) & set(js.jets + js.second_jets):
            raise ValueError(f"invariant {self.label} mentions jet variables")


@dataclass(frozen=True)
class FlowMap:
    """Per-coordinate images under the one-parameter group, in terms of ``s``."""

    images: Mapping[Var, Expr]
    parameter: Var

    def __getitem__(self, v: Var) -> Expr:
        return self.images.get(v, v)

    def coordinates(self) -> tuple:
        return tuple(sorted(self.images, key=lambda v: v.name))

    def at(self, s: Expr) -> dict:
        return {v: substitute(e, {self.parameter: s}) for v, e in self.images.items()}

    def apply_to(self, e: Expr, s: Expr | None = None) -> Expr:
        images = self.images if s is None else self.at(s)
        return substitute(e, dict(images))


@dataclass(frozen=True)
class GeneralSolution:
    function: str
    invariants: tuple

    @property
    def arity(self) -> int:
        return len(self.invariants)

    def expression(self) -> Expr:
        return Func(self.function, [I.expression for I in self.invariants])


def _zero_report(claim: str, e: Expr, seed: int, samples: int, tol: float = DEFAULT_TOL, **kw) -> VerificationReport:
    zt = is_zero(e, samples=samples, seed=seed, tol=tol)
    return VerificationReport.from_zero_test(claim, e, zt, **kw)


def check_generator(
    v: VectorField,
    eq: Equation,
    mode: str = "prolonged",
    reduction: str = "identical",
    seed: int = DEFAULT_SEED,
    samples: int = GENERATOR_SAMPLES,
    claim: str | None = None,
    tol: float = DEFAULT_TOL,
) -> VerificationReport:
    """Does ``v`` annihilate ``eq`` (identically, or on the solution variety)?"""
    residual = symmetry_residual(v, eq, mode, normalized=False)
    if reduction == "on_shell":
        residual = substitute(residual, {eq.pivot: eq.solved_pivot()})
    elif reduction != "identical":
        raise ValueError(f"unknown reduction {reduction!r}")
    claim = claim or f"generator annihilates {eq.name} ({mode}, {reduction})"
    return _zero_report(claim, residual, seed, samples, tol, details={"mode": mode, "reduction": reduction})


def check_invariant(I: Invariant, v: VectorField, seed: int = DEFAULT_SEED, samples: int = GENERATOR_SAMPLES, tol: float = DEFAULT_TOL) -> VerificationReport:
    """v[I] = 0, with v restricted to coordinates the invariant can see."""
    return _zero_report(f"v[{I.label}] = 0", apply(v, I.expression, normalized=False), seed, samples, tol)


def check_general_solution(S: GeneralSolution, v: VectorField, seed: int = DEFAULT_SEED, samples: int = GENERATOR_SAMPLES, tol: float = DEFAULT_TOL) -> VerificationReport:
    """v[mu(I1..Im)] = sum_i mu_i * v[I_i]; verified when every v[I_i] vanishes."""
    parts = [(I.label, check_invariant(I, v, seed, samples, tol)) for I in S.invariants]
    report = VerificationReport.aggregate(f"v[{S.function}(I1..I{S.arity})] = 0", parts)
    full = apply(v, S.expression())
    report.residual = full if report.verdict != "verified" else normalize(full)
    return report


def check_flow(
    phi: FlowMap,
    v: VectorField,
    seed: int = DEFAULT_SEED,
    samples: int = GENERATOR_SAMPLES,
    tol: float = DEFAULT_TOL,
) -> VerificationReport:
    """Phi_0 = id and d/ds Phi_s = v(Phi_s), componentwise."""
    s = phi.parameter
    coords = sorted(set(phi.coordinates()) | set(v.coordinates()), key=lambda x: x.name)
    parts = []
    at_zero = phi.at(ZERO)
    for x in coords:
        identity = add(at_zero.get(x, x), mul(-1, x))
        parts.append((f"identity at s=0 [{x.name}]", _zero_report(f"Phi_0({x.name}) = {x.name}", identity, seed, samples, tol)))
    for x in coords:
        lhs = differentiate(phi[x], s)
        rhs = phi.apply_to(v[x])
        parts.append((f"generator ODE [{x.name}]", _zero_report(f"d/ds Phi({x.name}) = v({x.name})(Phi)", add(lhs, mul(-1, rhs)), seed, samples, tol)))
    return VerificationReport.aggregate("flow is generated by the field", parts)


def check_group_law(phi: FlowMap, s1: Var, s2: Var, seed: int = DEFAULT_SEED, samples: int = GENERATOR_SAMPLES, tol: float = DEFAULT_TOL) -> VerificationReport:
    """Phi_{s1} o Phi_{s2} = Phi_{s1+s2}."""
    inner = phi.at(s2)
    outer = phi.at(s1)
    total = phi.at(add(s1, s2))
    parts = []
    for x in phi.coordinates():
        composed = substitute(outer[x], inner)
        parts.append((x.name, _zero_report(f"group law [{x.name}]", add(composed, mul(-1, total[x])), seed, samples, tol)))
    return VerificationReport.aggregate("one-parameter group law", parts)


def check_invariant_along_flow(I: Invariant, phi: FlowMap, seed: int = DEFAULT_SEED, samples: int = GENERATOR_SAMPLES, tol: float = DEFAULT_TOL) -> VerificationReport:
    return _zero_report(f"{I.label} o Phi_s = {I.label}", add(phi.apply_to(I.expression), mul(-1, I.expression)), seed, samples, tol)


# -- commutator tables ------------------------------------------------------------


@dataclass
class Family:
    """A parametric generator family read off one designated coordinate.

    ``read`` returns the family parameter for a field (or None when the
    field cannot belong to the family); ``build`` returns the member for a
    parameter.
    """

    name: str
    read: Callable[[VectorField], Expr | None]
    build: Callable[[Expr], VectorField]
    describe: Callable[[Expr], str] = to_dsl


@dataclass
class BracketEntry:
    left: str
    right: str
    bracket: VectorField
    components: dict  # family name -> parameter expression
    remainder: VectorField
    zero: bool

    @property
    def matched(self) -> bool:
        return len(self.remainder) == 0

    def describe(self) -> str:
        if self.zero:
            return "0"
        if not self.matched:
            return "unmatched: " + repr(self.remainder)
        return " + ".join(f"{name}[{to_dsl(p)}]" for name, p in self.components.items())

    def to_json(self) -> dict:
        return {
            "left": self.left,
            "right": self.right,
            "zero": self.zero,
            "matched": self.matched,
            "components": {k: to_dsl(p) for k, p in self.components.items()},
            "bracket": {x.name: to_dsl(c) for x, c in self.bracket.items()},
            "remainder": {x.name: to_dsl(c) for x, c in self.remainder.items()},
        }


def decompose(field_: VectorField, families: Sequence[Family]) -> tuple[dict, VectorField]:
    """Peel family members off ``field_`` in order; returns (parameters, remainder)."""
    remainder = field_.normalized()
    components = {}
    for fam in families:
        if not len(remainder):
            break
        param = fam.read(remainder)
        if param is None:
            continue
        param = normalize(param)
        if param == ZERO:
            continue
        member = fam.build(param)
        candidate = (remainder - member).normalized()
        components[fam.name] = param
        remainder = candidate
    return components, remainder


@dataclass
class CommutatorTable:
    names: list
    entries: dict  # (i, j) -> BracketEntry

    def entry(self, a: str, b: str) -> BracketEntry:
        return self.entries[(a, b)]

    def all_zero(self) -> bool:
        return all(e.zero for e in self.entries.values())

    def to_json(self) -> dict:
        return {
            "generators": self.names,
            "entries": [self.entries[k].to_json() for k in sorted(self.entries)],
        }

    def render(self) -> str:
        width = max(len(n) for n in self.names)
        rows = []
        for a in self.names:
            cells = []
            for b in self.names:
                key = (a, b) if (a, b) in self.entries else None
                if key:
                    cells.append(self.entries[key].describe())
                else:
                    cells.append("-" + self.entries[(b, a)].describe() if not self.entries[(b, a)].zero else "0")
            rows.append(a.ljust(width) + " | " + " ; ".join(cells))
        return "\n".join(rows)


def commutator_table(gens: Mapping[str, VectorField], families: Sequence[Family] = ()) -> CommutatorTable:
    """All brackets [g_i, g_j] for i <= j, each matched against the families."""
    names = list(gens)
    entries = {}
    for i, a in enumerate(names):
        for b in names[i:]:
            br = commutator(gens[a], gens[b]) if a != b else VectorField()
            zero = len(br.normalized()) == 0
            components, remainder = ({}, VectorField()) if zero else decompose(br, families)
            entries[(a, b)] = BracketEntry(a, b, br, components, remainder, zero)
    return CommutatorTable(names, entries)
