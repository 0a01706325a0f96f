"""Numerical lab: integrate scenario solutions, measure residuals, transport along flows.

A scenario fixes n1..n3, k2, k3 as closed-form functions of the independent
variable and integrates the pivot component k1 with classical RK4.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from typing import Mapping

import numpy as np
from scipy.interpolate import CubicSpline

from .checker import FlowMap
from .detsys import Equation
from .kernel import Var, compile_expr, differentiate, evaluate, free_vars, normalize

COMPONENTS = ("k1", "k2", "k3", "n1", "n2", "n3")
CLOSED = ("k2", "k3", "n1", "n2", "n3")


def _shifted(f):
    # the m-th derivative of sin/cos is a quarter-period shift
    return lambda mindex, args: f(np.asarray(args[0], dtype=float) + mindex[0] * np.pi / 2)


# Elementary functions allowed in scenario closed forms.  The symbolic kernel
# treats them as opaque function symbols; only numeric evaluation knows them.
KNOWN_FUNCTIONS = {"sin": 1, "cos": 1}
KNOWN_MODELS = {("sin", 1): _shifted(np.sin), ("cos", 1): _shifted(np.cos)}


@dataclass
class NumConfig:
    """Tolerances and defaults for the numeric lab; all are overridable."""

    h: float = 1e-3
    verify_tol: float = 1e-6
    exact_tol: float = 1e-8
    pivot_threshold: float = 1e-8
    uniform_rtol: float = 1e-9
    min_points: int = 5


DEFAULT_CONFIG = NumConfig()


class NumericError(ValueError):
    pass


class PivotUnderflow(NumericError):
    pass


class NonMonotoneMap(NumericError):
    pass


@dataclass
class ScenarioSpec:
    n1: str
    n2: str
    n3: str
    k2: str
    k3: str
    k1_0: float
    a: float = 0.0
    b: float = 1.0
    h: float = DEFAULT_CONFIG.h
    equation: str = "eq2"
    parameters: dict = field(default_factory=dict)

    @property
    def steps(self) -> int:
        n = int(round((self.b - self.a) / self.h))
        if n < 1 or not np.isclose(n * self.h, self.b - self.a, rtol=1e-9, atol=1e-12):
            raise NumericError(f"step {self.h} does not divide [{self.a}, {self.b}]")
        return n

    def closed_forms(self) -> dict:
        return {name: getattr(self, name) for name in CLOSED}

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data) -> "ScenarioSpec":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(**data)


@dataclass
class SampledCurve:
    """Values of (k1..k3, n1..n3) on a strictly increasing grid."""

    grid: np.ndarray
    values: np.ndarray  # shape (len(grid), 6)
    independent: str = "t"
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.grid), len(COMPONENTS)):
            raise NumericError(f"values must have shape ({len(self.grid)}, 6)")
        if np.any(np.diff(self.grid) <= 0):
            raise NumericError("grid must be strictly increasing")
        if not (np.all(np.isfinite(self.grid)) and np.all(np.isfinite(self.values))):
            raise NumericError("non-finite values in curve")

    def __getitem__(self, name: str) -> np.ndarray:
        return self.values[:, COMPONENTS.index(name)]

    @property
    def closed_form(self) -> dict:
        return dict(self.provenance.get("closed_form", {}))

    def is_uniform(self, rtol: float = DEFAULT_CONFIG.uniform_rtol) -> bool:
        d = np.diff(self.grid)
        return bool(np.allclose(d, d[0], rtol=rtol, atol=0))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([self.independent, *COMPONENTS])
        for x, row in zip(self.grid, self.values):
            w.writerow([repr(float(x))] + [repr(float(v)) for v in row])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "independent": self.independent,
            "grid": self.grid.tolist(),
            "values": {name: self[name].tolist() for name in COMPONENTS},
            "provenance": self.provenance,
        }

    @classmethod
    def from_csv(cls, text: str) -> "SampledCurve":
        rows = list(csv.reader(io.StringIO(text)))
        header, body = rows[0], rows[1:]
        if tuple(header[1:]) != COMPONENTS:
            raise NumericError(f"unexpected CSV header {header}")
        data = np.array([[float(x) for x in r] for r in body])
        return cls(data[:, 0], data[:, 1:], header[0])


# -- closed forms ---------------------------------------------------------------------


def _closed(eq: Equation, forms: Mapping[str, str], params: Mapping[str, float]):
    """Compile closed-form components and their exact derivatives."""
    ws = eq.space.workspace.extended(KNOWN_FUNCTIONS)
    x = eq.space.independent
    out = {}
    for name, text in forms.items():
        e = ws.parse(text)
        extra = free_vars(e) - {x} - {ws.variables[p] for p in params}
        if extra:
            raise NumericError(f"{name}(…) may only depend on {x.name}: found {sorted(v.name for v in extra)}")
        de = normalize(differentiate(e, x))
        out[name] = (e, de)
    return out


def _eval(e, x: Var, grid, params: Mapping[Var, float]):
    val = evaluate(e, {x: grid, **params}, KNOWN_MODELS)
    return np.broadcast_to(np.asarray(val, dtype=float), np.shape(grid)).copy()


def _param_env(eq: Equation, params: Mapping[str, float]) -> dict:
    ws = eq.space.workspace
    return {ws.variables[k]: float(v) for k, v in params.items()}


def integrate_solution(spec: ScenarioSpec, eq: Equation, config: NumConfig = DEFAULT_CONFIG) -> SampledCurve:
    """RK4 for the pivot k1; k2, k3, n are closed forms with exact derivatives."""
    if eq.pivot.name != "q1":
        raise NumericError("scenarios integrate the k1 component (pivot q1)")
    js = eq.space
    x = js.independent
    params = _param_env(eq, spec.parameters)
    forms = _closed(eq, spec.closed_forms(), spec.parameters)
    rhs_expr = eq.solved_pivot()
    names = [v.name for v in free_vars(rhs_expr)]
    ws = js.workspace
    q1 = compile_expr(rhs_expr, [ws.variables[n] for n in sorted(names)])
    order = sorted(names)

    def state(tt, k1):
        env = {x.name: tt, "k1": k1}
        for name, (e, de) in forms.items():
            env[name] = _eval(e, x, tt, params)
            env["q" + name[1:] if name.startswith("k") else "p" + name[1:]] = _eval(de, x, tt, params)
        for p, val in spec.parameters.items():
            env[p] = val
        return env

    def f(tt, k1):
        env = state(tt, k1)
        if np.any(np.abs(env["n1"]) < config.pivot_threshold):
            raise PivotUnderflow(f"|n1| below {config.pivot_threshold} near {x.name}={float(np.min(tt))}")
        return q1(*(np.broadcast_to(np.asarray(env[n], dtype=float), np.shape(tt)) for n in order))

    n = spec.steps
    grid = spec.a + spec.h * np.arange(n + 1)
    k1 = np.empty(n + 1)
    k1[0] = spec.k1_0
    h = spec.h
    for i in range(n):
        tt = np.array([grid[i]])
        y = np.array([k1[i]])
        s1 = f(tt, y)
        s2 = f(tt + h / 2, y + h / 2 * s1)
        s3 = f(tt + h / 2, y + h / 2 * s2)
        s4 = f(tt + h, y + h * s3)
        k1[i + 1] = (y + h / 6 * (s1 + 2 * s2 + 2 * s3 + s4))[0]
        if not np.isfinite(k1[i + 1]):
            raise NumericError(f"non-finite state at {x.name}={grid[i + 1]}")
    f(grid, k1)  # pivot check on the whole grid
    cols = [k1] + [_eval(forms[name][0], x, grid, params) for name in CLOSED]
    return SampledCurve(
        grid,
        np.column_stack(cols),
        x.name,
        {
            "equation": eq.name,
            "integrated": "k1",
            "closed_form": spec.closed_forms(),
            "parameters": dict(spec.parameters),
            "method": "rk4",
            "h": h,
        },
    )


def curve_from_closed_form(forms: Mapping[str, str], eq: Equation, a: float, b: float, h: float, parameters=None) -> SampledCurve:
    """Sample a curve whose six components are all given in closed form."""
    parameters = parameters or {}
    n = int(round((b - a) / h))
    grid = a + h * np.arange(n + 1)
    compiled = _closed(eq, forms, parameters)
    params = _param_env(eq, parameters)
    cols = [_eval(compiled[name][0], eq.space.independent, grid, params) for name in COMPONENTS]
    return SampledCurve(grid, np.column_stack(cols), eq.space.independent.name,
                        {"equation": eq.name, "closed_form": dict(forms), "parameters": dict(parameters)})


# -- residuals ---------------------------------------------------------------------


def fd4(values: np.ndarray, h: float) -> np.ndarray:
    """4th-order central differences at interior points 2..N-2."""
    v = values
    return (v[:-4] - 8 * v[1:-3] + 8 * v[3:-1] - v[4:]) / (12 * h)


def residual_profile(curve: SampledCurve, eq: Equation, config: NumConfig = DEFAULT_CONFIG) -> tuple:
    """(interior grid, residual values) of ``eq`` along ``curve``."""
    if len(curve.grid) < config.min_points:
        raise NumericError(f"grid too short: need at least {config.min_points} points")
    if not curve.is_uniform(config.uniform_rtol):
        raise NumericError("residual needs a uniform grid; re-grid first")
    js = eq.space
    if curve.independent != js.independent.name:
        raise NumericError(f"curve is parametrized by {curve.independent}, equation by {js.independent.name}")
    h = curve.grid[1] - curve.grid[0]
    inner = curve.grid[2:-2]
    params = curve.provenance.get("parameters", {})
    forms = _closed(eq, curve.closed_form, params) if curve.closed_form else {}
    penv = _param_env(eq, params)
    env = {js.independent: inner, **penv}
    for u, uj in zip(js.dependent, js.jets):
        env[u] = curve[u.name][2:-2]
        if u.name in forms:
            env[uj] = _eval(forms[u.name][1], js.independent, inner, penv)
        else:
            env[uj] = fd4(curve[u.name], h)
    missing = free_vars(eq.residual) - set(env)
    if missing:
        raise NumericError("unbound in residual: " + ", ".join(sorted(v.name for v in missing)))
    r = np.broadcast_to(np.asarray(evaluate(eq.residual, env), dtype=float), inner.shape)
    return inner, r


def residual(curve: SampledCurve, eq: Equation, config: NumConfig = DEFAULT_CONFIG) -> float:
    """Max |residual| of ``eq`` along ``curve`` at interior grid points."""
    return float(np.max(np.abs(residual_profile(curve, eq, config)[1])))


def regrid(grid: np.ndarray, values: np.ndarray, n: int | None = None) -> tuple:
    """Cubic-spline resampling onto a uniform grid over the same range."""
    n = len(grid) - 1 if n is None else n
    new = np.linspace(grid[0], grid[-1], n + 1)
    spline = CubicSpline(grid, values, axis=0)
    return new, spline(new)


# -- transport and reparametrization -----------------------------------------------------


def transport(curve: SampledCurve, phi: FlowMap, s: float, eq: Equation | None = None, config: NumConfig = DEFAULT_CONFIG) -> SampledCurve:
    """Apply Phi_s pointwise; re-grid when the induced time map is non-uniform."""
    ws_vars = {v.name: v for v in phi.images}
    indep = curve.independent
    env = {phi.parameter: float(s)}
    for v in list(phi.images) + [w for img in phi.images.values() for w in free_vars(img)]:
        if v.name == indep:
            env[v] = curve.grid
        elif v.name in COMPONENTS:
            env[v] = curve[v.name]
    params = curve.provenance.get("parameters", {})
    for v in {w for img in phi.images.values() for w in free_vars(img)}:
        if v.name in params:
            env[v] = float(params[v.name])

    def image(name):
        var = ws_vars.get(name)
        if var is None:
            return curve.grid if name == indep else curve[name]
        out = np.broadcast_to(np.asarray(evaluate(phi.images[var], env), dtype=float), curve.grid.shape)
        return out.copy()

    new_t = image(indep)
    new_vals = np.column_stack([image(name) for name in COMPONENTS])
    d = np.diff(new_t)
    if not (np.all(d > 0) or np.all(d < 0)):
        raise NonMonotoneMap("the transported time map is not monotone")
    if d[0] < 0:
        new_t, new_vals = new_t[::-1], new_vals[::-1]
    regridded = not np.allclose(np.diff(new_t), np.diff(new_t)[0], rtol=config.uniform_rtol, atol=0)
    if regridded:
        new_t, new_vals = regrid(new_t, new_vals)
    prov = {
        "equation": curve.provenance.get("equation"),
        "parameters": dict(params),
        "transported_by": {v.name: str(e) for v, e in phi.images.items()},
        "s": float(s),
        "regridded": bool(regridded),
        "source": {k: v for k, v in curve.provenance.items() if k != "transported_by"},
    }
    out = SampledCurve(new_t, new_vals, indep, prov)
    if eq is not None:
        out.provenance["residual"] = residual(out, eq, config)
    return out


def reparametrize_phi_to_t(curve: SampledCurve, w: float) -> SampledCurve:
    """Map a curve in phi to one in t = ln(|k|^2 + w)/2, re-gridded uniformly."""
    k = curve.values[:, :3]
    m = np.sum(k * k, axis=1) + w
    if np.any(m <= 0):
        raise NumericError("k^2 + w must be positive along the curve")
    t = 0.5 * np.log(m)
    d = np.diff(t)
    if not (np.all(d > 0) or np.all(d < 0)):
        raise NonMonotoneMap("t(phi) is not strictly monotone on the sampled range")
    vals = curve.values
    if d[0] < 0:
        t, vals = t[::-1], vals[::-1]
    new_t, new_vals = regrid(t, vals)
    return SampledCurve(new_t, new_vals, "t", {
        "equation": "eq2",
        "reparametrized_from": curve.independent,
        "w": float(w),
        "source": dict(curve.provenance),
    })


def rk4_order(spec: ScenarioSpec, eq: Equation, exact: str, h1: float = 0.1) -> tuple:
    """Max error vs the exact k1 at steps h1 and h1/2, and their ratio."""
    x = eq.space.independent
    exact_e = eq.space.workspace.parse(exact)
    errs = []
    for h in (h1, h1 / 2):
        sp = ScenarioSpec(**{**spec.to_json(), "h": h})
        c = integrate_solution(sp, eq)
        ref = _eval(exact_e, x, c.grid, _param_env(eq, sp.parameters))
        errs.append(float(np.max(np.abs(c["k1"] - ref))))
    return errs[0], errs[1], errs[0] / errs[1]
