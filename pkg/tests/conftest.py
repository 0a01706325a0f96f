from __future__ import annotations

import pytest
from hypothesis import strategies as st

from vortexsym.casebook import Casebook
from vortexsym.kernel import Workspace
from vortexsym.kernel.expr import Const, Func, add, exp, ln, mul, power


@pytest.fixture(scope="session")
def cb():
    return Casebook()


@pytest.fixture(scope="session")
def eq2(cb):
    return cb.equation("eq2")


@pytest.fixture(scope="session")
def eq1(cb):
    return cb.equation("eq1")


def small_workspace() -> Workspace:
    ws = Workspace()
    for name in ("x", "y", "z"):
        ws.declare(name, "independent")
    ws.declare_function("F", 2)
    ws.declare_function("G", 1)
    return ws


WS = small_workspace()
X, Y, Z = WS["x"], WS["y"], WS["z"]


def expressions(max_leaves: int = 8):
    """Random expression trees over x, y, z with opaque F(., .) and G(.)."""
    leaves = st.one_of(
        st.sampled_from([X, Y, Z]),
        st.integers(-3, 3).map(Const),
        st.fractions(min_value=-2, max_value=2, max_denominator=4).map(Const),
    )

    def extend(children):
        return st.one_of(
            st.tuples(children, children).map(lambda ab: add(*ab)),
            st.tuples(children, children).map(lambda ab: mul(*ab)),
            st.tuples(children, st.integers(1, 3)).map(lambda bn: power(bn[0], bn[1])),
            # denominators kept away from zero: 1/(1 + u^2)
            children.map(lambda u: power(add(1, mul(u, u)), -1)),
            st.tuples(st.sampled_from([X, Y, Z]), st.integers(-2, 2)).map(lambda vn: exp(mul(vn[1], vn[0]))),
            children.map(lambda u: ln(add(2, mul(u, u)))),
            st.tuples(children, children).map(lambda ab: Func("F", ab, (0, 0))),
            children.map(lambda u: Func("G", (u,), (0,))),
        )

    return st.recursive(leaves, extend, max_leaves=max_leaves)
