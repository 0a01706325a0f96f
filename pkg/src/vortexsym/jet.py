"""First-order jet space, total derivatives, prolongation and Lie brackets."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .kernel import (
    ZERO,
    DSLError,
    Expr,
    Var,
    Workspace,
    differentiate,
    free_vars,
    normalize,
    to_dsl,
)
from .kernel.expr import add, mul

SPACE_TAG = "J1(R,R6)"


class ProlongationError(RuntimeError):
    """Prolongation left second-order jet variables behind (an engine bug)."""


@dataclass(frozen=True)
class JetSpace:
    """Coordinates of J^1(R, R^6): independent x, dependents u, jets u_x, u_xx."""

    independent: Var
    dependent: tuple
    jets: tuple  # jets[i] is d(dependent[i])/dx
    second_jets: tuple
    workspace: Workspace = field(compare=False, hash=False)

    def __post_init__(self):
        if not (len(self.dependent) == len(self.jets) == len(self.second_jets)):
            raise ValueError("each dependent variable needs exactly one jet variable")
        if len(set(self.jets)) != len(self.jets):
            raise ValueError("jet pairing must be a bijection")

    @property
    def base(self) -> tuple:
        return (self.independent,) + self.dependent

    @property
    def coordinates(self) -> tuple:
        return self.base + self.jets

    def jet_of(self, u: Var) -> Var:
        return self.jets[self.dependent.index(u)]

    def second_jet_of(self, u: Var) -> Var:
        return self.second_jets[self.dependent.index(u)]

    def parse(self, text: str) -> Expr:
        return self.workspace.parse(text)


def make_jet_space(independent: str = "t") -> JetSpace:
    """The space with coordinates (x, k1..k3, n1..n3, q1..q3, p1..p3).

    ``q_i`` pairs with ``k_i`` and ``p_j`` with ``n_j``; second jets are
    ``q1t``.. and ``p1t``.. (or ``q1phi``.. when the independent variable is
    ``phi``).
    """
    ws = Workspace()
    x = ws.declare(independent, "independent")
    ks = [ws.declare(f"k{i}") for i in (1, 2, 3)]
    ns = [ws.declare(f"n{i}") for i in (1, 2, 3)]
    qs = [ws.declare(f"q{i}", "jet") for i in (1, 2, 3)]
    ps = [ws.declare(f"p{i}", "jet") for i in (1, 2, 3)]
    q2 = [ws.declare(f"q{i}{independent}", "second_jet") for i in (1, 2, 3)]
    p2 = [ws.declare(f"p{i}{independent}", "second_jet") for i in (1, 2, 3)]
    return JetSpace(x, tuple(ks + ns), tuple(qs + ps), tuple(q2 + p2), ws)


class VectorField:
    """Immutable map coordinate -> coefficient; zero coefficients are dropped."""

    __slots__ = ("_coeffs",)

    def __init__(self, coefficients: Mapping[Var, Expr] | Iterable = ()):
        items = coefficients.items() if isinstance(coefficients, Mapping) else coefficients
        coeffs = {}
        for var, c in items:
            if c == ZERO:
                continue
            coeffs[var] = coeffs[var] + c if var in coeffs else c
        object.__setattr__(self, "_coeffs", dict(sorted(coeffs.items(), key=lambda kv: kv[0].name)))

    def __setattr__(self, name, value):
        raise AttributeError("VectorField is immutable")

    def __getitem__(self, var: Var) -> Expr:
        return self._coeffs.get(var, ZERO)

    def coordinates(self) -> tuple:
        return tuple(self._coeffs)

    def items(self):
        return self._coeffs.items()

    def __iter__(self):
        return iter(self._coeffs)

    def __len__(self):
        return len(self._coeffs)

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(list(self.items()) + list(other.items()))

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + other.scale(-1)

    def scale(self, c) -> "VectorField":
        return VectorField({v: mul(c, e) for v, e in self.items()})

    def normalized(self) -> "VectorField":
        return VectorField({v: normalize(e) for v, e in self.items()})

    def __eq__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        a, b = self.normalized(), other.normalized()
        return a._coeffs == b._coeffs

    def __hash__(self):
        return hash(tuple(self.normalized().items()))

    def is_base_only(self, js: JetSpace) -> bool:
        return all(v in js.base for v in self._coeffs)

    def mentioned(self) -> frozenset:
        out = set(self._coeffs)
        for c in self._coeffs.values():
            out |= free_vars(c)
        return frozenset(out)

    def __repr__(self):
        body = ", ".join(f"{v.name}: {to_dsl(c)}" for v, c in self.items())
        return f"VectorField({{{body}}})"

    def to_json(self, functions: Mapping[str, int] | None = None) -> dict:
        out = {
            "space": SPACE_TAG,
            "coefficients": {v.name: to_dsl(c) for v, c in self.items()},
        }
        if functions:
            out["functions"] = dict(sorted(functions.items()))
        return out

    @classmethod
    def from_json(cls, data: Mapping | str, js: JetSpace) -> "VectorField":
        if isinstance(data, str):
            data = json.loads(data)
        if data.get("space", SPACE_TAG) != SPACE_TAG:
            raise ValueError(f"unsupported space {data.get('space')!r}")
        ws = js.workspace.extended(data.get("functions"))
        coeffs = {}
        for name, text in data.get("coefficients", {}).items():
            if name not in ws.variables:
                raise DSLError(f"unknown coordinate {name!r}")
            try:
                coeffs[ws.variables[name]] = ws.parse(text)
            except DSLError as exc:
                raise DSLError(f"coefficient of {name}: {exc}") from exc
        return cls(coeffs)


def field_from(js: JetSpace, workspace: Workspace | None = None, **coefficients: str) -> VectorField:
    """Build a field from DSL strings keyed by coordinate name."""
    ws = workspace or js.workspace
    return VectorField({ws.variables[name]: ws.parse(text) for name, text in coefficients.items()})


def total_derivative(e: Expr, js: JetSpace) -> Expr:
    """D_x e over first jets; second jets enter through derivatives in q and p."""
    terms = [differentiate(e, js.independent)]
    for u, uj, ujj in zip(js.dependent, js.jets, js.second_jets):
        du = differentiate(e, u)
        if du != ZERO:
            terms.append(mul(uj, du))
        duj = differentiate(e, uj)
        if duj != ZERO:
            terms.append(mul(ujj, duj))
    return add(*terms)


class ProlongedField(VectorField):
    """First prolongation of a base field: base coefficients plus jet coefficients."""

    __slots__ = ()

    def base_field(self, js: JetSpace) -> VectorField:
        return VectorField({v: c for v, c in self.items() if v in js.base})


def prolong(v: VectorField, js: JetSpace) -> ProlongedField:
    """First prolongation of a base-only field.

    Each jet coefficient is computed twice, through the characteristic
    ``D_x(U - X u_x) + X u_xx`` and as ``D_x U - u_x D_x X``; the two must
    agree and be free of second jets.
    """
    if not v.is_base_only(js):
        raise ValueError("prolong expects a field on the base coordinates only")
    X = v[js.independent]
    DX = total_derivative(X, js)
    coeffs = dict(v.items())
    for u, uj, ujj in zip(js.dependent, js.jets, js.second_jets):
        U = v[u]
        via_characteristic = add(total_derivative(add(U, mul(-1, X, uj)), js), mul(X, ujj))
        direct = add(total_derivative(U, js), mul(-1, uj, DX))
        a = normalize(via_characteristic)
        b = normalize(direct)
        if a != b:
            raise ProlongationError(f"prolongation formulas disagree on {uj.name}")
        if free_vars(a) & set(js.second_jets):
            raise ProlongationError(f"second jets survive in the {uj.name} coefficient")
        # keep the raw form so numeric checks do not depend on the normal form
        coeffs[uj] = direct
    return ProlongedField(coeffs)


def apply(v: VectorField, e: Expr, normalized: bool = True) -> Expr:
    """v[e]: the derivation sum(coefficient * de/dcoordinate)."""
    terms = []
    for var, c in v.items():
        d = differentiate(e, var)
        if d != ZERO:
            terms.append(mul(c, d))
    out = add(*terms)
    return normalize(out) if normalized else out


def commutator(v: VectorField, u: VectorField) -> VectorField:
    """Lie bracket [v, u], coordinate by coordinate."""
    coords = sorted(set(v.coordinates()) | set(u.coordinates()), key=lambda x: x.name)
    out = {}
    for x in coords:
        out[x] = normalize(add(apply(v, u[x]), mul(-1, apply(u, v[x]))))
    return VectorField(out)
