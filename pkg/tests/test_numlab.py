import json

import numpy as np
import pytest

from vortexsym.kernel import evaluate
from vortexsym.numlab import (
    NonMonotoneMap,
    NumericError,
    PivotUnderflow,
    SampledCurve,
    ScenarioSpec,
    curve_from_closed_form,
    integrate_solution,
    reparametrize_phi_to_t,
    residual,
    rk4_order,
    transport,
)

EXP = ScenarioSpec("1", "0", "0", "0", "0", 1.0)
PLUS_ONE = ScenarioSpec("1", "1", "0", "1", "0", 0.0)
MIXED = ScenarioSpec("1", "t", "1", "sin(t)", "t^2", 1.0)


@pytest.fixture(scope="module")
def exp_curve(eq2):
    return integrate_solution(EXP, eq2)


@pytest.fixture(scope="module")
def plus_one_curve(eq2):
    return integrate_solution(PLUS_ONE, eq2)


@pytest.fixture(scope="module")
def mixed_curve(eq2):
    return integrate_solution(MIXED, eq2)


def test_exponential_scenario(exp_curve):
    assert np.max(np.abs(exp_curve["k1"] - np.exp(exp_curve.grid))) < 1e-10


def test_plus_one_scenario(plus_one_curve, eq2):
    assert np.max(np.abs(plus_one_curve["k1"] - (np.exp(plus_one_curve.grid) - 1))) < 1e-10
    assert residual(plus_one_curve, eq2) < 1e-10


def test_mixed_scenario_residual(mixed_curve, eq2):
    assert residual(mixed_curve, eq2) < 1e-8


def test_exact_curve_residual(eq2):
    c = curve_from_closed_form({"k1": "exp(t)", "k2": "0", "k3": "0", "n1": "1 + t^2", "n2": "t", "n3": "3"},
                               eq2, 0.0, 1.0, 1e-3)
    assert residual(c, eq2) < 1e-10


def test_corrupted_curve_is_detected(plus_one_curve, eq2):
    bad = SampledCurve(plus_one_curve.grid, plus_one_curve.values * np.array([1.01, 1, 1, 1, 1, 1]),
                       "t", plus_one_curve.provenance)
    assert residual(bad, eq2) > 1e-3


def test_rk4_order_ratio(eq2):
    e1, e2, ratio = rk4_order(EXP, eq2, "exp(t)")
    assert 12 <= ratio <= 20
    assert e2 < e1


def test_pivot_underflow(eq2):
    with pytest.raises(PivotUnderflow):
        integrate_solution(ScenarioSpec("t - 0.5", "1", "0", "0", "0", 1.0), eq2)


def test_closed_forms_may_not_mention_state(eq2):
    with pytest.raises(NumericError):
        integrate_solution(ScenarioSpec("1", "k1", "0", "0", "0", 1.0), eq2)


def test_grid_too_short(eq2):
    c = SampledCurve(np.arange(4.0), np.ones((4, 6)))
    with pytest.raises(NumericError, match="too short"):
        residual(c, eq2)


def test_curve_rejects_bad_grids():
    with pytest.raises(NumericError):
        SampledCurve([0.0, 0.0, 1.0], np.ones((3, 6)))
    with pytest.raises(NumericError):
        SampledCurve([0.0, 1.0], [[np.nan] * 6, [1.0] * 6])


def test_csv_round_trip(plus_one_curve):
    text = plus_one_curve.to_csv()
    assert text.splitlines()[0] == "t,k1,k2,k3,n1,n2,n3"
    back = SampledCurve.from_csv(text)
    assert np.array_equal(back.values, plus_one_curve.values)
    json.dumps(plus_one_curve.to_json())


def test_scenario_json_round_trip():
    assert ScenarioSpec.from_json(json.dumps(MIXED.to_json())) == MIXED


def test_transport_identity(exp_curve, cb, eq2):
    out = transport(exp_curve, cb.example("example-1").flow, 0.0, eq2)
    assert np.allclose(out.values, exp_curve.values, rtol=0, atol=1e-14)
    assert np.allclose(out.grid, exp_curve.grid)


def test_transport_example1(exp_curve, cb, eq2):
    out = transport(exp_curve, cb.example("example-1").flow, 0.7, eq2)
    assert out.provenance["residual"] < 1e-8
    assert out.grid[0] == pytest.approx(0.7)


def test_transport_example2(plus_one_curve, cb, eq2):
    out = transport(plus_one_curve, cb.example("example-2").flow, 0.3, eq2)
    assert out.provenance["residual"] < 1e-6


def test_transport_regrids_nonuniform_time(mixed_curve, cb, eq2):
    from vortexsym.checker import FlowMap

    ws = cb.ws()
    flow = FlowMap({ws["t"]: ws.parse("t + s*t^2")}, ws["s"])
    out = transport(mixed_curve, flow, 0.5)
    assert out.provenance["regridded"] and out.is_uniform()


def test_transport_non_monotone(mixed_curve, cb):
    from vortexsym.checker import FlowMap

    ws = cb.ws()
    flow = FlowMap({ws["t"]: ws.parse("(t - 1/2)^2 + s")}, ws["s"])
    with pytest.raises(NonMonotoneMap):
        transport(mixed_curve, flow, 0.1)


def test_printed_example3_flow_breaks_solutions(plus_one_curve, cb, eq2):
    flow = cb.example("example-3").flow
    assert max(transport(plus_one_curve, flow, s, eq2).provenance["residual"] for s in (0.25, 1.0)) > 1e-3


@pytest.mark.parametrize("ex", ["example-1", "example-2"])
def test_invariants_constant_along_own_flow(mixed_curve, cb, ex):
    E = cb.example(ex)
    ws = cb.ws()
    pick = mixed_curve.grid >= 0.2
    base = {ws["t"]: mixed_curve.grid[pick]}
    for name in ("k1", "k2", "k3", "n1", "n2", "n3"):
        base[ws[name]] = mixed_curve[name][pick]
    for I in E.invariants:
        ref = evaluate(I.expression, base)
        for s in np.linspace(0, 1, 11):
            moved = {v: evaluate(E.flow.images.get(v, v), {**base, E.flow.parameter: s}) for v in base}
            assert np.max(np.abs(evaluate(I.expression, moved) - ref)) < 1e-6


def test_reparametrization_orthogonal(eq1, eq2):
    c = curve_from_closed_form({"k1": "exp(phi)", "k2": "0", "k3": "0", "n1": "0", "n2": "1", "n3": "0"},
                               eq1, 0.0, 1.0, 1e-3, {"w": 1})
    assert residual(c, eq1) < 1e-10
    assert residual(reparametrize_phi_to_t(c, 1.0), eq2) < 1e-8


def test_reparametrization_integrated(eq1, eq2):
    spec = ScenarioSpec("1", "0", "0", "phi", "0", 1.5, a=0.5, b=1.5, equation="eq1", parameters={"w": 2})
    c = integrate_solution(spec, eq1)
    # k1 = C sqrt(phi^2 + 2) with C = 1 here
    assert np.max(np.abs(c["k1"] - np.sqrt(c.grid ** 2 + 2))) < 1e-10
    assert residual(reparametrize_phi_to_t(c, 2.0), eq2) < 1e-6


def test_reparametrization_degenerate(eq1):
    c = curve_from_closed_form({"k1": "1", "k2": "2", "k3": "0", "n1": "1", "n2": "0", "n3": "0"},
                               eq1, 0.0, 1.0, 0.1, {"w": 1})
    with pytest.raises(NonMonotoneMap):
        reparametrize_phi_to_t(c, 1.0)


def test_reparametrization_nonpositive(eq1):
    c = curve_from_closed_form({"k1": "phi", "k2": "0", "k3": "0", "n1": "1", "n2": "0", "n3": "0"},
                               eq1, 0.0, 1.0, 0.1, {"w": -5})
    with pytest.raises(NumericError, match="positive"):
        reparametrize_phi_to_t(c, -5.0)
