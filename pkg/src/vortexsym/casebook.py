"""Machine-readable catalog of the equations, generators, flows and tables under study.

Payloads are plain JSON-able dicts of DSL strings; :class:`Casebook`
materializes them into kernel objects.  Entries record what the source
prints, including its inconsistencies; verdicts about them belong to the
claim suite.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping

from .checker import FlowMap, GeneralSolution, Invariant
from .detsys import DeterminingSystem, Equation
from .jet import VectorField, make_jet_space
from .kernel import ZERO as ZERO_EXPR, Var, Workspace, instantiate, normalize

ARGS7 = "t, k1, k2, k3, n1, n2, n3"
ARGS13 = "t, k1, k2, k3, n1, n2, n3, q1, q2, q3, p1, p2, p3"
AH = "k1*exp(-t), k2*exp(-t), k3*exp(-t)"  # the arguments of H
SLOT7 = {"t": 1, "k1": 2, "k2": 3, "k3": 4, "n1": 5, "n2": 6, "n3": 7}

POINT_ANSATZ_FUNCS = {name: 7 for name in ("T", "K1", "K2", "K3", "N1", "N2", "N3")}
CONTACT_FUNCS = {
    name: 13
    for name in ("T", "K1", "K2", "K3", "N1", "N2", "N3", "Q1", "Q2", "Q3", "P1", "P2", "P3")
}
CATALOG_FUNCS = {"T": 1, "H": 3, "mu": 6}

# Display equations that the catalog deliberately does not carry as claims.
OUT_OF_SCOPE = {
    8: "intermediate step of the hand solution of the determining system",
    9: "intermediate step (K1 in terms of F1)",
    10: "intermediate step (PDEs for K2)",
    11: "intermediate step (PDEs for K3)",
    12: "intermediate step (K2 in terms of F2)",
    13: "intermediate step (K3 in terms of F3)",
    14: "integral relation among F2, G",
    15: "integral relation for F2",
    16: "integral relation among F2, G",
    17: "F1 after eliminating integrals",
    18: "F3 after eliminating integrals",
    19: "PDE for F2",
    22: "characteristic system; invariants are verified instead of derived",
}


class UnknownEntry(KeyError):
    pass


@dataclass(frozen=True)
class CaseEntry:
    id: str
    kind: str
    payload: dict
    locator: str
    quote: str
    equations: tuple = ()  # display-equation numbers covered
    domain: str = ""

    def to_json(self) -> dict:
        out = {
            "id": self.id,
            "kind": self.kind,
            "locator": self.locator,
            "quote": self.quote,
            "payload": self.payload,
        }
        if self.equations:
            out["equations"] = list(self.equations)
        if self.domain:
            out["domain"] = self.domain
        return out


# -- payload helpers -----------------------------------------------------------


def _vT(T: str = "T(t)", Tt: str = "T_1(t)") -> dict:
    c = {"t": T}
    for i in (1, 2, 3):
        c[f"k{i}"] = f"k{i}*{T}"
    for j in (1, 2, 3):
        c[f"n{j}"] = f"n{j}*({Tt} - {T})"
    return c


def _vH() -> dict:
    c = {"k1": f"exp(t)*H({AH})"}
    for j in (1, 2, 3):
        c[f"n{j}"] = f"-n1*H_{j}({AH})"
    return c


def _gen20() -> dict:
    c = {"t": "T(t)", "k1": f"k1*T(t) + exp(t)*H({AH})", "k2": "k2*T(t)", "k3": "k3*T(t)"}
    for j in (1, 2, 3):
        c[f"n{j}"] = f"n{j}*(T_1(t) - T(t)) - n1*H_{j}({AH})"
    return c


def _det4() -> list:
    out = []
    for i in (1, 2, 3):
        s = SLOT7[f"k{i}"]
        ks = " + ".join(f"n{j}*K{j}_{s}({ARGS7})" for j in (1, 2, 3))
        out.append(f"N{i}({ARGS7}) - n{i}*T_1({ARGS7}) + {ks}")
    return out


def _det5() -> list:
    out = []
    for i in (1, 2, 3):
        s = SLOT7[f"n{i}"]
        out.append(" + ".join(f"n{j}*K{j}_{s}({ARGS7})" for j in (1, 2, 3)))
    return out


def _det6() -> list:
    out = [f"n{i}*T_{SLOT7[f'k{i}']}({ARGS7})" for i in (1, 2, 3)]
    out += [f"n{i}*T_{SLOT7[f'n{j}']}({ARGS7})" for i in (1, 2, 3) for j in (1, 2, 3)]
    out += [
        f"n{i}*T_{SLOT7[f'k{j}']}({ARGS7}) + n{j}*T_{SLOT7[f'k{i}']}({ARGS7})"
        for i in (1, 2, 3)
        for j in (1, 2, 3)
        if i < j
    ]
    return out


def _det7() -> list:
    return [
        " + ".join(
            f"n{i}*(K{i}_1({ARGS7}) - K{i}({ARGS7})) - N{i}({ARGS7})*k{i}" for i in (1, 2, 3)
        )
    ]


def _contact_basis() -> dict:
    f = lambda name: f"{name}({ARGS13})"  # noqa: E731
    return {
        "v1": {"t": f("T")},
        "v2": {"k2": f("K2"), "k1": f"-n2/n1*{f('K2')}"},
        "v3": {"k3": f("K3"), "k1": f"-n3/n1*{f('K3')}"},
        "v4": {"q1": f("Q1"), "k1": f("Q1")},
        "v5": {"q2": f("Q2"), "k1": f"n2/n1*{f('Q2')}"},
        "v6": {"q3": f("Q3"), "k1": f"n3/n1*{f('Q3')}"},
        "v7": {"n1": f("N1"), "k1": f"(q1 - k1)/n1*{f('N1')}"},
        "v8": {"n2": f("N2"), "k1": f"(q2 - k2)/n1*{f('N2')}"},
        "v9": {"n3": f("N3"), "k1": f"(q3 - k3)/n1*{f('N3')}"},
        "v10": {"p1": f("P1")},
        "v11": {"p2": f("P2")},
        "v12": {"p3": f("P3")},
    }


# Direction of each contact family: designated coordinate first.
CONTACT_DIRECTIONS = {
    "v1": ("t", {"t": "1"}),
    "v2": ("k2", {"k2": "1", "k1": "-n2/n1"}),
    "v3": ("k3", {"k3": "1", "k1": "-n3/n1"}),
    "v4": ("q1", {"q1": "1", "k1": "1"}),
    "v5": ("q2", {"q2": "1", "k1": "n2/n1"}),
    "v6": ("q3", {"q3": "1", "k1": "n3/n1"}),
    "v7": ("n1", {"n1": "1", "k1": "(q1 - k1)/n1"}),
    "v8": ("n2", {"n2": "1", "k1": "(q2 - k2)/n1"}),
    "v9": ("n3", {"n3": "1", "k1": "(q3 - k3)/n1"}),
    "v10": ("p1", {"p1": "1"}),
    "v11": ("p2", {"p2": "1"}),
    "v12": ("p3", {"p3": "1"}),
}


def _contact24() -> dict:
    f = lambda name: f"{name}({ARGS13})"  # noqa: E731
    k1 = (
        f"-n2/n1*{f('K2')} - n3/n1*{f('K3')}"
        + "".join(f" + n{j}/n1*{f(f'Q{j}')}" for j in (1, 2, 3))
        + "".join(f" + (q{j} - k{j})/n1*{f(f'N{j}')}" for j in (1, 2, 3))
    )
    c = {"t": f("T"), "k1": k1, "k2": f("K2"), "k3": f("K3")}
    for j in (1, 2, 3):
        c[f"q{j}"] = f(f"Q{j}")
        c[f"n{j}"] = f(f"N{j}")
        c[f"p{j}"] = f(f"P{j}")
    return c


def _eq1_residual() -> str:
    kn = "(k1*n1 + k2*n2 + k3*n3)"
    kk = "(k1^2 + k2^2 + k3^2 + w)"
    return " + ".join(f"q{i}*(n{i} - {kn}/{kk}*k{i})" for i in (1, 2, 3))


_ENTRIES: list[CaseEntry] = [
    CaseEntry(
        "eq1", "equation",
        {"independent": "phi", "parameters": ["w"], "residual": _eq1_residual(), "pivot": "q1"},
        "§1, Eq. (1)", "is defined as a first order ODE", (1,),
    ),
    CaseEntry(
        "eq2", "equation",
        {"independent": "t", "residual": "n1*(q1 - k1) + n2*(q2 - k2) + n3*(q3 - k3)", "pivot": "q1"},
        "§1, Eq. (2)", "we find the new form as follows", (2,),
    ),
    CaseEntry(
        "reparam", "expression",
        {"independent": "phi", "parameters": ["w"], "expression": "ln(k1^2 + k2^2 + k3^2 + w)/2"},
        "§1, change of parameter", "By applying the following change of parameter",
    ),
    CaseEntry(
        "point-ansatz", "field",
        {"functions": POINT_ANSATZ_FUNCS,
         "coefficients": {c: f"{n}({ARGS7})" for c, n in
                          [("t", "T"), ("k1", "K1"), ("k2", "K2"), ("k3", "K3"),
                           ("n1", "N1"), ("n2", "N2"), ("n3", "N3")]}},
        "§2, general generator", "be the general form of infinitesimal generators",
    ),
    CaseEntry(
        "residual-3", "expression",
        {"functions": POINT_ANSATZ_FUNCS, "expression": "<derived: prolonged point ansatz applied to eq2>",
         "monomials": ["1", "q_i", "p_i", "q_i^2", "q_i*q_j", "q_i*p_j"]},
        "§2, Eq. (3)", "we obtain the following expression", (3,),
    ),
    CaseEntry("det-4", "determining", {"functions": POINT_ANSATZ_FUNCS, "equations": _det4()},
              "§2, Eq. (4)", "N_i - n_i\\,T_t + n_1K_{1k_i}", (4,)),
    CaseEntry("det-5", "determining", {"functions": POINT_ANSATZ_FUNCS, "equations": _det5()},
              "§2, Eq. (5)", "n_1K_{1n_i}+n_2K_{2n_i}+n_3K_{3n_i}= 0", (5,)),
    CaseEntry("det-6", "determining", {"functions": POINT_ANSATZ_FUNCS, "equations": _det6()},
              "§2, Eq. (6)", "n_i\\,T_{k_j}+n_j\\,T_{k_i}=0", (6,)),
    CaseEntry("det-7", "determining", {"functions": POINT_ANSATZ_FUNCS, "equations": _det7()},
              "§2, Eq. (7)", "\\Big(n_i(K_{i\\,t}-K_i)-N_i\\,k_i\\Big)=0", (7,)),
    CaseEntry(
        "coeffs-final", "field",
        {"functions": {"T": 1, "H": 3},
         "coefficients": {**_gen20(), "k3": "k1*T(t)"},
         "note": "closing coefficient list before Eq. (20); prints K3 = k1*T"},
        "§2, coefficient list before Eq. (20)", "K_3 = k_1\\,T", (),
    ),
    CaseEntry("gen-20", "field", {"functions": {"T": 1, "H": 3}, "coefficients": _gen20()},
              "§2, Eq. (20)", "the general form of infinitesimal generators", (20,)),
    CaseEntry("gen-vT", "field", {"functions": {"T": 1}, "coefficients": _vT()},
              "§2, Eq. (21)", "v_T = T\\Big(\\frac{\\partial}{\\partial t}", (21,)),
    CaseEntry("gen-vH", "field", {"functions": {"H": 3}, "coefficients": _vH()},
              "§2, Eq. (21)", "v_H = e^t\\,H\\,\\frac{\\partial}{\\partial k_1}- n_1\\,\\sum", (21,)),
    CaseEntry(
        "table-1", "table",
        {"functions": {"T": 1, "H": 3},
         "generators": {"vT[1]": _vT("1", "0"), "vT[t]": _vT("t", "1"),
                        "vH[a1]": {"k1": "k1", "n1": "-n1"}},
         "expected": "all-zero"},
        "§2, Table 1", "The commutators table of", (),
    ),
    CaseEntry(
        "invariants-23", "invariant-template",
        {"functions": {"T": 1, "H": 3},
         "invariants": [
             {"label": "I1", "expression": f"(k1*T(t) + H({AH}))/k2", "domain": "k2 != 0"},
             {"label": "I2", "expression": "ln(k2) - t"},
             {"label": "I3", "expression": "ln(k3) - t"},
             {"label": "I4", "expression": f"(T_1(t) - T(t) - H_1({AH}))*ln(k1) - T(t)*ln(n1)"},
             {"label": "I5", "expression": f"(T_1(t) - T(t))*ln(k2) - T(t)*ln(n2*(T_1(t) - T(t)) - n1*H({AH}))"},
             {"label": "I6", "expression": f"(T_1(t) - T(t))*ln(k3) - T(t)*ln(n3*(T_1(t) - T(t)) - n1*H({AH}))"},
         ],
         "instances": [{"T": "1", "H": "0"}, {"T": "t", "H": "0"}, {"T": "1", "H": "a1"}],
         "note": "I5, I6 printed with index j = 5, 6 on k_j, n_j; read as k2, n2 and k3, n3"},
        "§2, Eq. (23)", "we (locally) find the following general solutions", (23,), "k2 != 0",
    ),
    CaseEntry(
        "example-1", "example",
        {"instance": {"T": "1", "H": "0"},
         "fields": {"printed": {"t": "1", "k1": "k1", "k2": "k2", "k3": "k3",
                                "n1": "-n1", "n2": "-n2", "n3": "-n3"}},
         "flow": {"parameter": "s", "images": {"t": "t + s", "k1": "k1*exp(s)", "k2": "k2*exp(s)",
                                               "k3": "k3*exp(s)", "n1": "n1*exp(-s)",
                                               "n2": "n2*exp(-s)", "n3": "n3*exp(-s)"}},
         "invariants": [{"label": f"I{i}", "expression": f"ln(k{i}) - t"} for i in (1, 2, 3)]
         + [{"label": f"I{j + 3}", "expression": f"ln(n{j}) + t"} for j in (1, 2, 3)],
         "general_solution": "mu"},
        "§2, Example 1", "If we assume that $T=1$ and $H=0$", (),
    ),
    CaseEntry(
        "example-2", "example",
        {"instance": {"T": "t", "H": "0"},
         "fields": {"printed": {"t": "t", **{f"k{i}": f"k{i}*t" for i in (1, 2, 3)},
                                **{f"n{j}": f"n{j}*(1 - t)" for j in (1, 2, 3)}}},
         "flow": {"parameter": "s", "images": {"t": "t*exp(s)",
                                               **{f"k{i}": f"k{i}*exp(t*(exp(s) - 1))" for i in (1, 2, 3)},
                                               **{f"n{j}": f"n{j}*exp(s - t*(exp(s) - 1))" for j in (1, 2, 3)}}},
         "invariants": [{"label": f"I{i}", "expression": f"ln(k{i}) - t"} for i in (1, 2, 3)]
         + [{"label": f"I{j + 3}", "expression": f"ln(n{j}/t) + t", "domain": "t != 0"} for j in (1, 2, 3)],
         "general_solution": "mu"},
        "§2, Example 2", "Let $T=t$ and $H=0$", (),
    ),
    CaseEntry(
        "example-3", "example",
        {"instance": {"T": "0", "H": "a1"},
         "fields": {"printed": {"k1": "k1", "n1": "-n1", "n2": "-n1", "n3": "-n1"},
                    "instantiated": {"k1": "k1", "n1": "-n1"}},
         "flow": {"parameter": "s", "images": {"t": "t", "k1": "k1*exp(s)", "k2": "k2", "k3": "k3",
                                               "n1": "n1*exp(-s)", "n2": "n2*exp(-s) - n1 + n2",
                                               "n3": "n3*exp(-s) - n1 + n3"}},
         "invariants": [{"label": "I1", "expression": "t"}, {"label": "I2", "expression": "k2"},
                        {"label": "I3", "expression": "k3"}, {"label": "I4", "expression": "k1/n1"},
                        {"label": "I5", "expression": "ln(k1) - n2/n1"},
                        {"label": "I6", "expression": "ln(k1) - n3/n1"}],
         "general_solution": "mu"},
        "§2, Example 3", "For the case which $T=0$ and", (), "k2 != 0, k3 != 0",
    ),
    CaseEntry(
        "example-4", "example",
        {"instance": {"T": "t", "H": "a1 + a2 + a3"},
         "fields": {"printed": {"t": "t", "k1": "t*(2*k1 + k2 + k3)", "k2": "t*k2", "k3": "t*k3",
                                **{f"n{j}": f"n{j}*(1 - t) - n1*t" for j in (1, 2, 3)}},
                    "instantiated": {"t": "t", "k1": "t*k1 + k1 + k2 + k3", "k2": "t*k2", "k3": "t*k3",
                                     **{f"n{j}": f"n{j}*(1 - t) - n1" for j in (1, 2, 3)}}},
         "flow": {"parameter": "s", "images": {
             "t": "t*exp(s)",
             "k1": "-(k2 + k3)*exp(t*(exp(s) - 1)) + (k1 + k2 + k3)*exp(2*t*(exp(s) - 1))",
             "k2": "k2*exp(t*(exp(s) - 1))", "k3": "k3*exp(t*(exp(s) - 1))",
             "n1": "n1*exp(s - 2*t*(exp(s) - 1))",
             "n2": "n1*exp(s - 2*t*(exp(s) - 1)) + (n2 - n1)*exp(s - t*(exp(s) - 1))",
             "n3": "n1*exp(s - 2*t*(exp(s) - 1)) + (n3 - n1)*exp(s - t*(exp(s) - 1))"}},
         "invariants": [
             {"label": "I1", "expression": "(1 - 2*t)*ln(k3) - t*ln(n1*(1 - 2*t))"},
             {"label": "I2", "expression": "2*t - ln(2*k1 + k2 + k3)"},
             {"label": "I3", "expression": "(1 - t)*ln(k2) - t*ln(n2*(1 - t) - n1*t)"},
             {"label": "I4", "expression": "t - ln(k2)"},
             {"label": "I5", "expression": "(1 - t)*ln(k3) - t*ln(n3*(1 - t) - n1*t)"},
             {"label": "I6", "expression": "k2/k3"}],
         "general_solution": "mu"},
        "§2, Example 4", "then we have the following vector field", (),
    ),
    CaseEntry(
        "contact-ansatz", "field",
        {"functions": CONTACT_FUNCS,
         "coefficients": {**{c: f"{c.upper()}({ARGS13})" for c in
                             ("k1", "k2", "k3", "n1", "n2", "n3", "q1", "q2", "q3", "p1", "p2", "p3")},
                          "t": f"T({ARGS13})"}},
        "§3, general contact generator", "an infinitesimal generator which is", (),
    ),
    CaseEntry(
        "contact-k1", "expression",
        {"functions": CONTACT_FUNCS,
         "expression": f"Q1({ARGS13}) + (n2*(Q2({ARGS13}) - K2({ARGS13})) + n3*(Q3({ARGS13}) - K3({ARGS13}))"
                       + "".join(f" + N{j}({ARGS13})*(q{j} - k{j})" for j in (1, 2, 3)) + ")/n1"},
        "§3, solved K1", "the solution to this equation", (),
    ),
    CaseEntry("contact-24", "field", {"functions": CONTACT_FUNCS, "coefficients": _contact24()},
              "§3, Eq. (24)", "contact infinitesimal generator", (24,)),
    CaseEntry("contact-basis-25", "fields", {"functions": CONTACT_FUNCS, "fields": _contact_basis()},
              "§3, Eq. (25)", "consist a basis for Lie algebra", (25,)),
    CaseEntry(
        "table-2", "table",
        {"functions": CONTACT_FUNCS, "generators": "contact-basis-25", "expected": "pairwise-span"},
        "§3, Table 2", "provided by contact symmetry", (),
    ),
]

ENTRY_IDS = tuple(e.id for e in _ENTRIES)
_BY_ID = {e.id: e for e in _ENTRIES}


def entry(id: str) -> CaseEntry:
    try:
        return _BY_ID[id]
    except KeyError:
        raise UnknownEntry(f"unknown casebook entry {id!r}") from None


def list_entries() -> list:
    return list(_ENTRIES)


def coverage() -> dict:
    """Display equation number -> entry id or out-of-scope reason, for (1)..(25)."""
    out = {}
    for n in range(1, 26):
        ids = [e.id for e in _ENTRIES if n in e.equations]
        out[n] = ids[0] if ids else OUT_OF_SCOPE.get(n)
    return out


# -- materialization ---------------------------------------------------------------


@dataclass
class Example:
    id: str
    fields: dict
    flow: FlowMap
    invariants: tuple
    general_solution: GeneralSolution
    instance: dict


class Casebook:
    """Builds kernel objects from catalog payloads over one shared jet space."""

    def __init__(self):
        self.space = make_jet_space("t")
        ws = self.space.workspace
        for name in ("s", "s1", "s2"):
            ws.declare(name, "independent")
        for name in ("a1", "a2", "a3"):
            ws.declare(name, "parameter")
        ws.declare("w", "parameter")
        self.phi_space = make_jet_space("phi")
        self.phi_space.workspace.declare("w", "parameter")

    # workspaces and variables
    def ws(self, functions: Mapping[str, int] | None = None) -> Workspace:
        """The shared workspace plus ``functions`` (default: T, H and mu)."""
        return self.space.workspace.extended(CATALOG_FUNCS if functions is None else functions)

    def var(self, name: str) -> Var:
        return self.space.workspace.variables[name]

    @property
    def h_args(self) -> tuple:
        return tuple(self.var(a) for a in ("a1", "a2", "a3"))

    def _field(self, coefficients: Mapping[str, str], functions=None) -> VectorField:
        ws = self.ws(functions if functions is not None else CATALOG_FUNCS)
        return VectorField({ws.variables[c]: ws.parse(text) for c, text in coefficients.items()})

    # entries
    def equation(self, id: str = "eq2") -> Equation:
        e = entry(id)
        if e.kind != "equation":
            raise ValueError(f"{id} is not an equation")
        js = self.phi_space if e.payload["independent"] == "phi" else self.space
        residual = js.workspace.parse(e.payload["residual"])
        return Equation(id, residual, js, js.workspace.variables[e.payload["pivot"]])

    def field(self, id: str, name: str | None = None) -> VectorField:
        e = entry(id)
        funcs = e.payload.get("functions", CATALOG_FUNCS)
        if e.kind == "field":
            return self._field(e.payload["coefficients"], funcs)
        if e.kind == "fields":
            return self._field(e.payload["fields"][name], funcs)
        if e.kind == "example":
            return self._field(e.payload["fields"][name or "printed"], CATALOG_FUNCS)
        raise ValueError(f"{id} does not hold a vector field")

    def fields(self, id: str) -> dict:
        e = entry(id)
        if e.kind == "fields":
            return {n: self.field(id, n) for n in e.payload["fields"]}
        if e.kind == "example":
            return {n: self.field(id, n) for n in e.payload["fields"]}
        if e.kind == "table":
            gens = e.payload["generators"]
            if isinstance(gens, str):
                return self.fields(gens)
            return {n: self._field(c, e.payload["functions"]) for n, c in gens.items()}
        return {id: self.field(id)}

    def expression(self, id: str):
        e = entry(id)
        if e.payload.get("independent") == "phi":
            ws = self.phi_space.workspace
        else:
            ws = self.ws(e.payload.get("functions", CATALOG_FUNCS))
        return ws.parse(e.payload["expression"])

    def determining(self, id: str) -> list:
        e = entry(id)
        ws = self.ws(e.payload["functions"])
        return [ws.parse(x) for x in e.payload["equations"]]

    def expected_point_system(self) -> DeterminingSystem:
        """The printed determining equations (4)-(7), keyed by source label."""
        eqs = {}
        for id in ("det-4", "det-5", "det-6", "det-7"):
            for i, x in enumerate(self.determining(id), 1):
                eqs[f"{id}.{i}"] = x
        return DeterminingSystem(eqs, {"source": "printed (4)-(7)"})

    def point_ansatz(self) -> VectorField:
        return self.field("point-ansatz")

    def contact_ansatz(self) -> VectorField:
        return self.field("contact-ansatz")

    def invariant_template(self) -> list:
        e = entry("invariants-23")
        ws = self.ws(e.payload["functions"])
        return [Invariant(d["label"], ws.parse(d["expression"]), d.get("domain", "")) for d in e.payload["invariants"]]

    def instances_23(self) -> list:
        return list(entry("invariants-23").payload["instances"])

    def example(self, id: str) -> Example:
        e = entry(id)
        if e.kind != "example":
            raise ValueError(f"{id} is not an example")
        p = e.payload
        ws = self.ws(CATALOG_FUNCS)
        fields = {n: self._field(c) for n, c in p["fields"].items()}
        flow = FlowMap(
            {ws.variables[c]: ws.parse(x) for c, x in p["flow"]["images"].items()},
            ws.variables[p["flow"]["parameter"]],
        )
        invs = tuple(Invariant(d["label"], ws.parse(d["expression"]), d.get("domain", "")) for d in p["invariants"])
        return Example(id, fields, flow, invs, GeneralSolution(p["general_solution"], invs), dict(p["instance"]))

    # family instantiation
    def definitions(self, T: str | None = None, H: str | None = None) -> dict:
        ws = self.ws()
        defs = {}
        if T is not None:
            defs["T"] = ((self.var("t"),), ws.parse(T))
        if H is not None:
            defs["H"] = (self.h_args, ws.parse(H))
        return defs

    def instantiate_field(self, v: VectorField, T: str | None = None, H: str | None = None) -> VectorField:
        defs = self.definitions(T, H)
        return VectorField({x: normalize(instantiate(c, defs)) for x, c in v.items()})

    def gen20(self, T: str, H: str) -> VectorField:
        return self.instantiate_field(self.field("gen-20"), T, H)

    def vT(self, T: str) -> VectorField:
        return self.instantiate_field(self.field("gen-vT"), T=T)

    def vH(self, H: str) -> VectorField:
        return self.instantiate_field(self.field("gen-vH"), H=H)


@lru_cache(maxsize=1)
def default_casebook() -> Casebook:
    return Casebook()


def expected_point_system() -> DeterminingSystem:
    return default_casebook().expected_point_system()


def claims():
    """The executable claim suite (see :mod:`vortexsym.claims`)."""
    from .claims import all_claims

    return all_claims()


def emit(id: str) -> str:
    return json.dumps(entry(id).to_json(), indent=2, sort_keys=True)


# -- generator families for bracket matching ----------------------------------------


def contact_families(cb: Casebook | None = None) -> list:
    """One family per basis field of the contact algebra, read off its designated coordinate."""
    from .checker import Family
    from .kernel.expr import mul

    cb = cb or default_casebook()
    ws = cb.ws(CONTACT_FUNCS)
    fams = []
    for name, (coord, direction) in CONTACT_DIRECTIONS.items():
        x = ws.variables[coord]
        d = {ws.variables[c]: ws.parse(e) for c, e in direction.items()}
        fams.append(
            Family(
                name,
                read=lambda f, x=x: f[x] if len(f) and f[x] != ZERO_EXPR else None,
                build=lambda p, d=d: VectorField({c: mul(p, e) for c, e in d.items()}),
            )
        )
    return fams


def point_families(cb: Casebook | None = None) -> list:
    """The v_T and v_H families of the point algebra.

    v_T is read from the t coefficient (a function of t alone); v_H from
    e^{-t} times the k1 coefficient, rewritten in the arguments a_i = k_i e^{-t}.
    """
    from .checker import Family
    from .kernel import free_vars, substitute
    from .kernel.expr import exp, mul

    cb = cb or default_casebook()
    t = cb.var("t")
    ks = [cb.var(f"k{i}") for i in (1, 2, 3)]
    a = cb.h_args
    template_T = cb.field("gen-vT")
    template_H = cb.field("gen-vH")

    def read_T(f):
        tau = normalize(f[t])
        if tau == ZERO_EXPR or not free_vars(tau) <= {t}:
            return None
        return tau

    def build_T(tau):
        defs = {"T": ((t,), tau)}
        return VectorField({x: normalize(instantiate(c, defs)) for x, c in template_T.items()})

    def read_H(f):
        eta = normalize(mul(f[ks[0]], exp(mul(-1, t))))
        eta = normalize(substitute(eta, {k: mul(ai, exp(t)) for k, ai in zip(ks, a)}))
        if eta == ZERO_EXPR or not free_vars(eta) <= set(a):
            return None
        return eta

    def build_H(eta):
        defs = {"H": (a, eta)}
        return VectorField({x: normalize(instantiate(c, defs)) for x, c in template_H.items()})

    return [Family("vT", read_T, build_T), Family("vH", read_H, build_H)]
