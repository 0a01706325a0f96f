from hypothesis import given, settings
from hypothesis import strategies as st

from vortexsym.casebook import contact_families, point_families
from vortexsym.checker import (
    Invariant,
    check_flow,
    check_general_solution,
    check_generator,
    check_group_law,
    check_invariant,
    check_invariant_along_flow,
    commutator_table,
    decompose,
)
from vortexsym.kernel import ZERO, to_dsl


def test_vT_and_vH_are_symmetries(cb, eq2):
    for case in ("gen-vT", "gen-vH", "gen-20"):
        rep = check_generator(cb.field(case), eq2)
        assert rep.verdict == "verified"
        assert rep.numeric.samples >= 100 and rep.numeric.max_abs < 1e-9


def test_on_shell_reduction_of_a_symmetry(cb, eq2):
    assert check_generator(cb.field("gen-vT"), eq2, reduction="on_shell").verdict == "verified"


def test_non_symmetry_is_refuted_with_witness(cb, eq2):
    rep = check_generator(cb.field("example-3"), eq2)
    assert rep.verdict == "refuted"
    # residual is -n1 [(q2 - k2) + (q3 - k3)]
    assert to_dsl(rep.residual) == "k2*n1 + k3*n1 - n1*q2 - n1*q3"
    assert rep.numeric.witness is not None


def test_k3_typo_residual(cb, eq2):
    rep = check_generator(cb.field("coeffs-final"), eq2)
    assert rep.verdict == "refuted"
    ws = cb.ws()
    expected = ws.parse("n3*((q1 - q3)*T(t) + (k1 - k3)*(T_1(t) - T(t)))")
    from vortexsym.kernel import normalize
    from vortexsym.kernel.expr import add, mul

    assert normalize(add(rep.residual, mul(-1, expected))) == ZERO


def test_example1_flow_and_group_law(cb):
    ex = cb.example("example-1")
    v = ex.fields["printed"]
    assert check_flow(ex.flow, v).verdict == "verified"
    ws = cb.space.workspace
    assert check_group_law(ex.flow, ws["s1"], ws["s2"]).verdict == "verified"


def test_example1_invariants_and_general_solution(cb):
    ex = cb.example("example-1")
    v = ex.fields["printed"]
    for I in ex.invariants:
        assert check_invariant(I, v).verdict == "verified"
        assert check_invariant_along_flow(I, ex.flow).verdict == "verified"
    rep = check_general_solution(ex.general_solution, v)
    assert rep.verdict == "verified"


def test_general_solution_pinpoints_bad_invariant(cb):
    ex = cb.example("example-3")
    rep = check_general_solution(ex.general_solution, ex.fields["instantiated"])
    bad = [label for label, r in rep.breakdown if r.verdict == "refuted"]
    assert bad == ["I4", "I5", "I6"]


def test_example3_flow_is_not_identity_at_zero(cb):
    ex = cb.example("example-3")
    rep = check_flow(ex.flow, ex.fields["printed"])
    failing = {label for label, r in rep.breakdown if r.verdict == "refuted"}
    assert "identity at s=0 [n2]" in failing and "identity at s=0 [n3]" in failing


def test_example4_printed_flow_matches_printed_field(cb):
    ex = cb.example("example-4")
    assert check_flow(ex.flow, ex.fields["printed"]).verdict == "verified"


def test_custom_invariant(cb):
    ws = cb.ws()
    v = cb.gen20("1", "0")
    assert check_invariant(Invariant("I", ws.parse("k1/k2")), v).verdict == "verified"
    assert check_invariant(Invariant("J", ws.parse("k1*k2")), v).verdict == "refuted"


def test_point_table_entries(cb):
    gens = {"a": cb.vT("1"), "b": cb.vT("t"), "c": cb.vH("a1"), "d": cb.vH("a2*a3")}
    tab = commutator_table(gens, point_families(cb))
    assert tab.entry("a", "b").describe() == "vT[1]"
    assert tab.entry("a", "c").zero and tab.entry("b", "d").zero
    assert tab.entry("c", "d").describe() == "vH[-a2*a3]"
    assert not tab.all_zero()


def test_contact_brackets_stay_in_pair_span(cb):
    tab = commutator_table(cb.fields("contact-basis-25"), contact_families(cb))
    for (a, b), e in tab.entries.items():
        assert e.zero or (e.matched and set(e.components) <= {a, b}), (a, b)


def test_decompose_reports_remainder(cb):
    # a contact field cannot be matched by the point families
    comps, rem = decompose(cb.field("contact-basis-25", "v10"), point_families(cb))
    assert not comps and len(rem) == 1


def test_single_direction_is_refuted_on_shell(cb, eq2):
    ws = cb.ws()
    from vortexsym.jet import VectorField

    rep = check_generator(VectorField({ws["k1"]: ws.parse("1")}), eq2, reduction="on_shell")
    assert rep.verdict == "refuted" and to_dsl(rep.residual) == "-n1"


def test_non_invariant_residual(cb):
    ws = cb.ws()
    rep = check_invariant(Invariant("k1", ws["k1"]), cb.example("example-1").fields["printed"])
    assert rep.verdict == "refuted" and rep.residual == ws["k1"]


def test_general_solution_of_wrong_invariant(cb):
    from vortexsym.checker import GeneralSolution

    ws = cb.ws()
    S = GeneralSolution("mu", (Invariant("I1", ws["k1"]),))
    assert S.arity == 1
    assert check_general_solution(S, cb.example("example-1").fields["printed"]).verdict == "refuted"


def test_identity_flow_of_zero_field(cb):
    from vortexsym.checker import FlowMap
    from vortexsym.jet import VectorField

    ws = cb.ws()
    flow = FlowMap({ws["k1"]: ws["k1"]}, ws["s"])
    assert check_flow(flow, VectorField()).verdict == "verified"


def test_disjoint_constant_contact_fields_commute(cb):
    from vortexsym.jet import VectorField

    ws = cb.ws()
    tab = commutator_table({"v10": VectorField({ws["p1"]: ws.parse("2")}),
                            "v11": VectorField({ws["p2"]: ws.parse("3")})}, contact_families(cb))
    assert tab.all_zero()


def test_example2_invariants_and_flow(cb):
    ex = cb.example("example-2")
    v = ex.fields["printed"]
    assert check_flow(ex.flow, v).verdict == "verified"
    for I in ex.invariants:
        assert check_invariant_along_flow(I, ex.flow).verdict == "verified"


_coef = st.integers(-3, 3)


@settings(max_examples=40, deadline=None, derandomize=True)
@given(st.lists(_coef, min_size=4, max_size=4), st.lists(_coef, min_size=10, max_size=10))
def test_polynomial_instances_of_the_general_generator(cb, eq2, tc, hc):
    T = " + ".join(f"({c})*t^{i}" for i, c in enumerate(tc))
    monos = ["1", "a1", "a2", "a3", "a1^2", "a2^2", "a3^2", "a1*a2", "a1*a3", "a2*a3"]
    H = " + ".join(f"({c})*{m}" for c, m in zip(hc, monos))
    assert check_generator(cb.gen20(T, H), eq2).verdict == "verified"
