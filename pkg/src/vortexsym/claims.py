"""The executable claim suite.

Each claim pairs a checker invocation with two expectations: the verdict the
source document asserts (``paper``) and the verdict obtained by hand
(``hand``).  The runner reports paper agreement; a mismatch against the hand
verdict is an engine failure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .casebook import Casebook, contact_families, default_casebook, point_families
from .checker import (
    check_flow,
    check_general_solution,
    check_generator,
    check_group_law,
    check_invariant,
    commutator_table,
)
from .detsys import compare_systems, derive_determining, solve_linear_coefficient
from .jet import VectorField, commutator
from .kernel import ZERO, is_zero, normalize, to_dsl
from .kernel.expr import add, mul
from .kernel.numeric import DEFAULT_SEED
from .report import VerificationReport

T_INSTANCES = ("1", "t", "t^2", "t^3 - 2*t + 1")
H_INSTANCES = ("a1", "a2*a3", "a1 + a2 + a3")
TRANSPORT_S = (-1.0, -0.25, 0.25, 1.0)


@dataclass(frozen=True)
class Claim:
    id: str
    description: str
    locator: str
    run: Callable  # (casebook, seed) -> VerificationReport
    paper: str | None  # verdict asserted by the source, if any
    hand: str | None  # verdict from the hand computation, if any

    def evaluate(self, cb: Casebook | None = None, seed: int = DEFAULT_SEED) -> VerificationReport:
        report = self.run(cb or default_casebook(), seed).with_expectation(self.paper)
        report.claim = self.id
        report.details = {**report.details, "description": self.description, "locator": self.locator}
        if self.hand is not None:
            report.details["hand_verdict"] = self.hand
        return report

    def engine_ok(self, report: VerificationReport) -> bool:
        return self.hand is None or report.verdict == self.hand


# -- claim bodies ------------------------------------------------------------------


def _gen(case: str, name: str | None = None, mode="prolonged"):
    return lambda cb, seed: check_generator(cb.field(case, name), cb.equation("eq2"), mode=mode, seed=seed)


def _instance(T: str, H: str):
    return lambda cb, seed: check_generator(cb.gen20(T, H), cb.equation("eq2"), seed=seed)


def _bracket_zero(left, right, label):
    def run(cb, seed):
        br = commutator(left(cb), right(cb))
        parts = [
            (x.name, VerificationReport.from_zero_test(f"{label}[{x.name}]", c, is_zero(c, seed=seed)))
            for x, c in br.items()
        ]
        rep = VerificationReport.aggregate(label, parts) if parts else VerificationReport(label, "verified", ZERO)
        rep.details = {"bracket": {x.name: to_dsl(c) for x, c in br.items()}}
        return rep

    return run


def _table1(cb, seed):
    gens = {name: cb.fields("table-1")[name] for name in cb.fields("table-1")}
    tab = commutator_table(gens, point_families(cb))
    nonzero = [e for e in tab.entries.values() if not e.zero]
    rep = VerificationReport(
        "table-1",
        "verified" if not nonzero else "refuted",
        residual=next(iter(nonzero[0].bracket.items()))[1] if nonzero else ZERO,
        details={"table": tab.to_json(), "nonzero": [f"[{e.left}, {e.right}] = {e.describe()}" for e in nonzero]},
    )
    return rep


def _table2(cb, seed):
    tab = commutator_table(cb.fields("contact-basis-25"), contact_families(cb))
    bad = [
        e for e in tab.entries.values()
        if not e.zero and (not e.matched or not set(e.components) <= {e.left, e.right})
    ]
    return VerificationReport(
        "table-2",
        "verified" if not bad else "refuted",
        residual=next(iter(bad[0].remainder.items()))[1] if bad and len(bad[0].remainder) else None,
        details={
            "brackets": len(tab.entries),
            "outside_pair_span": [f"[{e.left}, {e.right}]" for e in bad],
        },
    )


def _detsys(cb, seed):
    derived = derive_determining(cb.point_ansatz(), cb.equation("eq2"), "free")
    rep = compare_systems(derived.members(), cb.expected_point_system().members(), "det-system")
    rep.details["derived_members"] = len(derived)
    return rep


def _contact_k1(cb, seed):
    eq = cb.equation("eq2")
    ansatz = cb.contact_ansatz()
    solved = solve_linear_coefficient(ansatz, eq, "K1")
    printed = cb.expression("contact-k1")
    diff = add(solved, mul(-1, printed))
    same = VerificationReport.from_zero_test("solved K1 = printed K1", diff, is_zero(diff, seed=seed))
    k1 = eq.space.workspace.variables["k1"]
    back = VectorField({**dict(ansatz.items()), k1: printed})
    sub = check_generator(back, eq, mode="direct", seed=seed, claim="substitute-back")
    rep = VerificationReport.aggregate("contact-k1", [("matches printed", same), ("substitute back", sub)])
    rep.details = {"solved": to_dsl(solved)}
    return rep


def _example(id: str, what: str, field_name: str = "printed", label: str | None = None):
    def run(cb, seed):
        ex = cb.example(id)
        v = ex.fields[field_name]
        if what == "flow":
            return check_flow(ex.flow, v, seed=seed)
        if what == "flow-identity":
            rep = check_flow(ex.flow, v, seed=seed)
            parts = [(lab, r) for lab, r in rep.breakdown if lab.startswith("identity")]
            return VerificationReport.aggregate("flow identity at s=0", parts)
        if what == "group-law":
            ws = cb.space.workspace
            return check_group_law(ex.flow, ws.variables["s1"], ws.variables["s2"], seed=seed)
        if what == "invariants":
            parts = [(I.label, check_invariant(I, v, seed=seed)) for I in ex.invariants]
            return VerificationReport.aggregate("invariants", parts)
        if what == "invariant":
            I = next(I for I in ex.invariants if I.label == label)
            return check_invariant(I, v, seed=seed)
        if what == "solution":
            return check_general_solution(ex.general_solution, v, seed=seed)
        if what == "generator":
            return check_generator(v, cb.equation("eq2"), seed=seed)
        raise ValueError(what)

    return run


def _inv23(T: str, H: str):
    def run(cb, seed):
        v = cb.gen20(T, H)
        defs = cb.definitions(T, H)
        from .checker import Invariant
        from .kernel import instantiate

        parts = []
        for I in cb.invariant_template():
            inst = Invariant(I.label, normalize(instantiate(I.expression, defs)), I.domain)
            parts.append((I.label, check_invariant(inst, v, seed=seed)))
        return VerificationReport.aggregate(f"invariants (23) at T={T}, H={H}", parts)

    return run


# numeric claims


def scenario_specs():
    from .numlab import ScenarioSpec

    return {
        "exp": (ScenarioSpec("1", "0", "0", "0", "0", 1.0), "exp(t)"),
        "plus-one": (ScenarioSpec("1", "1", "0", "1", "0", 0.0), "exp(t) - 1"),
    }


def _transport(id: str):
    def run(cb, seed):
        from .numlab import DEFAULT_CONFIG, integrate_solution, transport

        eq = cb.equation("eq2")
        ex = cb.example(id)
        worst = 0.0
        rows = {}
        for name, (spec, _) in scenario_specs().items():
            curve = integrate_solution(spec, eq)
            for s in TRANSPORT_S:
                r = transport(curve, ex.flow, s, eq).provenance["residual"]
                rows[f"{name}@s={s:+g}"] = r
                worst = max(worst, r)
        ok = worst < DEFAULT_CONFIG.verify_tol
        return VerificationReport(
            f"transport along {id} flow",
            "verified" if ok else "refuted",
            details={"max_residual": worst, "tolerance": DEFAULT_CONFIG.verify_tol, "residuals": rows},
        )

    return run


def _reparam(cb, seed):
    from .numlab import DEFAULT_CONFIG, ScenarioSpec, curve_from_closed_form, integrate_solution, reparametrize_phi_to_t, residual

    eq1, eq2 = cb.equation("eq1"), cb.equation("eq2")
    spec = ScenarioSpec("1", "0", "0", "phi", "0", 1.5, a=0.5, b=1.5, equation="eq1", parameters={"w": 2})
    r_int = residual(reparametrize_phi_to_t(integrate_solution(spec, eq1), 2.0), eq2)
    orth = curve_from_closed_form({"k1": "exp(phi)", "k2": "0", "k3": "0", "n1": "0", "n2": "1", "n3": "0"},
                                  eq1, 0.0, 1.0, DEFAULT_CONFIG.h, {"w": 1})
    r_orth = residual(reparametrize_phi_to_t(orth, 1.0), eq2)
    ok = r_int < DEFAULT_CONFIG.verify_tol and r_orth < DEFAULT_CONFIG.exact_tol
    return VerificationReport("reparametrization", "verified" if ok else "refuted",
                              details={"integrated_residual": r_int, "orthogonal_residual": r_orth})


def _rk4(cb, seed):
    from .numlab import rk4_order

    spec, exact = scenario_specs()["exp"]
    e1, e2, ratio = rk4_order(spec, cb.equation("eq2"), exact)
    ok = 12 <= ratio <= 20
    return VerificationReport("rk4 order", "verified" if ok else "refuted",
                              details={"error_h": e1, "error_h2": e2, "ratio": ratio})


# -- registry ----------------------------------------------------------------------------


def all_claims() -> list:
    V, R = "verified", "refuted"
    c = [
        Claim("det-system", "free determining system of the point ansatz equals (4)-(7)", "Eqs. (4)-(7)", _detsys, V, V),
        Claim("thm1-membership", "v_T annihilates prolonged eq2 identically", "Theorem 1", _gen("gen-vT"), V, V),
        Claim("thm1-membership-vH", "v_H annihilates prolonged eq2 identically", "Theorem 1", _gen("gen-vH"), V, V),
        Claim("gen20-membership", "general point generator annihilates eq2", "Eq. (20)", _gen("gen-20"), V, V),
        Claim("k3-typo", "coefficient list with K3 = k1*T annihilates eq2", "coefficient list before Eq. (20)",
              _gen("coeffs-final"), V, R),
        Claim("table1-abelian", "[v_{T=1}, v_{T=t}] = 0", "Table 1",
              _bracket_zero(lambda cb: cb.vT("1"), lambda cb: cb.vT("t"), "[v_{T=1}, v_{T=t}]"), V, R),
        Claim("table1-vT-vH", "[v_T, v_H] = 0 for opaque T, H", "Table 1",
              _bracket_zero(lambda cb: cb.field("gen-vT"), lambda cb: cb.field("gen-vH"), "[v_T, v_H]"), V, V),
        Claim("table1-vH-vH", "[v_{H=a1}, v_{H=a2*a3}] = 0", "Table 1",
              _bracket_zero(lambda cb: cb.vH("a1"), lambda cb: cb.vH("a2*a3"), "[v_{H=a1}, v_{H=a2*a3}]"), V, R),
        Claim("table1-table", "commutator table of v_{T=1}, v_{T=t}, v_{H=a1} is zero", "Table 1", _table1, V, R),
        Claim("table2-closure", "each [v_i, v_j] of the contact basis lies in the span of families i and j",
              "Table 2", _table2, V, V),
        Claim("contact-24", "general contact generator annihilates eq2 directly", "Eq. (24)",
              _gen("contact-24", mode="direct"), V, V),
        Claim("contact-k1", "linear solve for K1 reproduces the printed expression", "§3", _contact_k1, V, V),
    ]
    for i in range(1, 13):
        c.append(Claim(f"contact-basis-{i:02d}", f"basis field v{i} annihilates eq2 directly", "Eq. (25)",
                       _gen("contact-basis-25", f"v{i}", mode="direct"), V, V))
    for ti, T in enumerate(T_INSTANCES):
        for hi, H in enumerate(H_INSTANCES):
            c.append(Claim(f"gen20-instance-{ti}{hi}", f"generator (20) at T={T}, H={H}", "Eq. (20)",
                           _instance(T, H), V, V))
    for n in (1, 2):
        ex = f"example-{n}"
        loc = f"Example {n}"
        c += [
            Claim(f"ex{n}-generator", "field annihilates eq2", loc, _example(ex, "generator"), V, V),
            Claim(f"ex{n}-flow", "flow is generated by the field", loc, _example(ex, "flow"), V, V),
            Claim(f"ex{n}-group-law", "flow satisfies the group law", loc, _example(ex, "group-law"), V, V),
            Claim(f"ex{n}-invariants", "printed invariants satisfy v[I] = 0", loc, _example(ex, "invariants"), V, V),
            Claim(f"ex{n}-solution", "mu(I1..I6) is annihilated", loc, _example(ex, "solution"), V, V),
            Claim(f"ex{n}-transport", "transported scenarios stay solutions", loc, _transport(ex), V, V),
        ]
    c += [
        Claim("ex3-generator", "printed field annihilates eq2", "Example 3", _example("example-3", "generator"), V, R),
        Claim("ex3-generator-instantiated", "field (20) at T=0, H=a1 annihilates eq2", "Example 3",
              _example("example-3", "generator", "instantiated"), None, V),
        Claim("ex3-flow-identity", "printed flow is the identity at s=0", "Example 3",
              _example("example-3", "flow-identity"), V, R),
        Claim("ex3-invariant-I4", "k1/n1 is invariant under the instantiated field", "Example 3",
              _example("example-3", "invariant", "instantiated", "I4"), V, R),
        Claim("ex3-transport", "transport along the printed flow keeps solutions", "Example 3",
              _transport("example-3"), V, R),
        Claim("ex4-generator", "printed field annihilates eq2", "Example 4", _example("example-4", "generator"), V, R),
        Claim("ex4-generator-instantiated", "field (20) at T=t, H=a1+a2+a3 annihilates eq2", "Example 4",
              _example("example-4", "generator", "instantiated"), None, V),
        Claim("ex4-flow", "printed flow is generated by the printed field", "Example 4",
              _example("example-4", "flow"), V, V),
        Claim("ex4-invariant-I2", "2t - ln(2k1+k2+k3) is invariant", "Example 4",
              _example("example-4", "invariant", "printed", "I2"), V, R),
        Claim("ex4-invariant-I4", "t - ln(k2) is invariant", "Example 4",
              _example("example-4", "invariant", "printed", "I4"), V, V),
        Claim("ex4-invariant-I6", "k2/k3 is invariant", "Example 4",
              _example("example-4", "invariant", "printed", "I6"), V, V),
        Claim("inv23-T1-H0", "invariants (23) at T=1, H=0", "Eq. (23)", _inv23("1", "0"), V, V),
        Claim("inv23-Tt-H0", "invariants (23) at T=t, H=0", "Eq. (23)", _inv23("t", "0"), V, R),
        Claim("inv23-T1-Ha1", "invariants (23) at T=1, H=a1", "Eq. (23)", _inv23("1", "a1"), V, R),
        Claim("num-reparam", "eq1 solutions map to eq2 solutions under t = ln(k^2+w)/2", "§1", _reparam, V, V),
        Claim("num-rk4-order", "RK4 error ratio under step halving lies in [12, 20]", "numeric harness", _rk4, None, V),
    ]
    return sorted(c, key=lambda cl: cl.id)


def claim_ids() -> list:
    return [c.id for c in all_claims()]


def run_claims(ids=None, seed: int = DEFAULT_SEED, cb: Casebook | None = None) -> list:
    """Evaluate claims (all, or those in ``ids``) in canonical id order."""
    cb = cb or default_casebook()
    claims = all_claims()
    if ids is not None:
        known = {c.id for c in claims}
        unknown = [i for i in ids if i not in known]
        if unknown:
            raise KeyError(f"unknown claim ids: {', '.join(unknown)}")
        claims = [c for c in claims if c.id in set(ids)]
    return [(c, c.evaluate(cb, seed)) for c in claims]
