"""Vectorized numeric evaluation and the two-stage zero test."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement
from math import prod
from typing import Callable, Mapping, Sequence

import numpy as np

from .dsl import to_dsl
from .expr import Add, Const, Exp, Expr, Func, Ln, Mul, Pow, Var, free_vars, functions_in
from .normal import normalize

DEFAULT_SAMPLES = 50
DEFAULT_TOL = 1e-9
DEFAULT_SEED = 20240917
SAMPLE_LOW, SAMPLE_HIGH, SAMPLE_DEN = 16, 256, 64  # rationals in [1/4, 4]


class KernelInconsistency(AssertionError):
    """The normal form says zero but sampling disagrees: a kernel bug."""


class UnboundFunction(KeyError):
    pass


class PolynomialModel:
    """A concrete polynomial standing in for an opaque function symbol.

    Derivatives by multi-index are the exact derivatives of the polynomial,
    so every occurrence of ``F``, ``F_1``, ``F_12``... stays consistent.
    """

    def __init__(self, coeffs: Mapping[tuple, Fraction]):
        self.coeffs = {k: Fraction(v) for k, v in coeffs.items() if v != 0}
        self._derivs: dict[tuple, dict] = {}

    @classmethod
    def random(cls, rng: np.random.Generator, arity: int, degree: int) -> "PolynomialModel":
        coeffs = {}
        for d in range(degree + 1):
            for combo in combinations_with_replacement(range(arity), d):
                exps = [0] * arity
                for i in combo:
                    exps[i] += 1
                num = int(rng.integers(-8, 9))
                if num == 0:
                    num = 1
                coeffs[tuple(exps)] = Fraction(num, 8)
        return cls(coeffs)

    def derivative(self, mindex: tuple) -> dict:
        if mindex not in self._derivs:
            out = {}
            for exps, c in self.coeffs.items():
                factor = 1
                new = []
                for e, m in zip(exps, mindex):
                    if m > e:
                        factor = 0
                        break
                    factor *= prod(range(e - m + 1, e + 1))
                    new.append(e - m)
                if factor:
                    key = tuple(new)
                    out[key] = out.get(key, 0) + c * factor
            self._derivs[mindex] = {k: float(v) for k, v in out.items() if v != 0}
        return self._derivs[mindex]

    def __call__(self, mindex: tuple, args: Sequence):
        terms = self.derivative(mindex)
        total = 0.0
        for exps, c in terms.items():
            term = c
            for a, e in zip(args, exps):
                if e:
                    term = term * a**e
            total = total + term
        if isinstance(total, float) and args and isinstance(args[0], np.ndarray):
            total = np.full_like(args[0], total, dtype=float)
        return total


def _degree_for(arity: int) -> int:
    return 5 if arity <= 3 else 3


def random_models(functions: Sequence[Func], rng: np.random.Generator) -> dict:
    models = {}
    for key in sorted({(f.name, f.arity) for f in functions}):
        models[key] = PolynomialModel.random(rng, key[1], _degree_for(key[1]))
    return models


def evaluate(
    e: Expr,
    env: Mapping[Var, object],
    models: Mapping[tuple, Callable] | None = None,
    with_magnitude: bool = False,
):
    """Evaluate ``e`` on floats or numpy arrays.

    ``ln`` evaluates as ``log|x|`` so that derivative identities hold off the
    positive domain.  With ``with_magnitude`` a second value is returned:
    the same tree evaluated with every sum replaced by a sum of absolute
    values, used as the scale for relative zero tolerances.
    """
    models = models or {}
    memo: dict = {}

    def ev(node: Expr):
        hit = memo.get(node)
        if hit is not None:
            return hit
        if isinstance(node, Const):
            v = float(node.value)
            out = (v, abs(v))
        elif isinstance(node, Var):
            try:
                v = env[node]
            except KeyError:
                raise KeyError(f"no value for variable {node.name}") from None
            out = (v, np.abs(v))
        elif isinstance(node, Add):
            vals = [ev(t) for t in node.terms]
            out = (sum(v for v, _ in vals), sum(m for _, m in vals))
        elif isinstance(node, Mul):
            v, m = 1.0, 1.0
            for f in node.factors:
                fv, fm = ev(f)
                v = v * fv
                m = m * fm
            out = (v, m)
        elif isinstance(node, Pow):
            bv, bm = ev(node.base)
            if node.exp >= 0:
                out = (bv**node.exp, bm**node.exp)
            else:
                with np.errstate(divide="ignore", invalid="ignore"):
                    v = np.float64(1.0) / np.asarray(bv, dtype=float) ** (-node.exp)
                out = (v, np.abs(v))
        elif isinstance(node, Exp):
            av, _ = ev(node.arg)
            with np.errstate(over="ignore"):
                v = np.exp(av)
            out = (v, np.abs(v))
        elif isinstance(node, Ln):
            av, _ = ev(node.arg)
            with np.errstate(divide="ignore", invalid="ignore"):
                v = np.log(np.abs(av))
            out = (v, np.abs(v))
        elif isinstance(node, Func):
            model = models.get((node.name, node.arity))
            if model is None:
                raise UnboundFunction(f"no numeric model for {node.name}/{node.arity}")
            args = [ev(a)[0] for a in node.args]
            v = model(node.mindex, args)
            out = (v, np.abs(v))
        else:
            raise TypeError(type(node).__name__)
        memo[node] = out
        return out

    v, m = ev(e)
    return (v, m) if with_magnitude else v


def compile_expr(e: Expr, variables: Sequence[Var], models=None) -> Callable:
    """Return ``f(*values)`` evaluating ``e`` with ``variables`` bound positionally."""
    variables = list(variables)
    missing = free_vars(e) - set(variables)
    if missing:
        raise ValueError("unbound variables: " + ", ".join(sorted(v.name for v in missing)))

    def f(*values):
        out = evaluate(e, dict(zip(variables, values)), models)
        if values and isinstance(values[0], np.ndarray) and np.ndim(out) == 0:
            out = np.full_like(values[0], float(out), dtype=float)
        return out

    return f


@dataclass
class SampleEvidence:
    samples: int
    max_abs: float
    max_rel: float
    witness: dict | None = None  # variable name -> value at the worst point
    witness_value: float | None = None
    retries: int = 0

    def to_json(self) -> dict:
        out = {"samples": self.samples, "max_abs": self.max_abs}
        if self.witness is not None:
            out["witness"] = self.witness
            out["witness_value"] = self.witness_value
        return out


def sample_points(variables: Sequence[Var], n: int, rng: np.random.Generator) -> dict:
    return {
        v: rng.integers(SAMPLE_LOW, SAMPLE_HIGH + 1, size=n) / SAMPLE_DEN for v in variables
    }


def numeric_check(
    e: Expr,
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    tol: float = DEFAULT_TOL,
    retry_budget: int = 5,
    models: Mapping | None = None,
) -> tuple[bool, SampleEvidence]:
    """Evaluate ``e`` at random rational points in [1/4, 4].

    Returns ``(vanishes, evidence)``.  Points where evaluation is singular
    are redrawn, at most ``retry_budget`` rounds.
    """
    rng = np.random.default_rng(seed)
    if models is None:
        models = random_models(list(functions_in(e)), rng)
    variables = sorted(free_vars(e), key=lambda v: v.name)
    pts = sample_points(variables, samples, rng)
    retries = 0
    while True:
        with np.errstate(all="ignore"):
            val, mag = evaluate(e, pts, models, with_magnitude=True)
        val = np.broadcast_to(np.asarray(val, dtype=float), (samples,)).copy()
        mag = np.broadcast_to(np.asarray(mag, dtype=float), (samples,)).copy()
        bad = ~(np.isfinite(val) & np.isfinite(mag))
        if not bad.any():
            break
        if retries >= retry_budget:
            keep = ~bad
            if not keep.any():
                return True, SampleEvidence(0, float("nan"), float("nan"), retries=retries)
            val, mag = val[keep], mag[keep]
            pts = {v: a[keep] for v, a in pts.items()}
            break
        retries += 1
        fresh = sample_points(variables, samples, rng)
        pts = {v: np.where(bad, fresh[v], pts[v]) for v in variables}
    absval = np.abs(val)
    rel = absval / np.maximum(mag, 1e-300)
    worst = int(np.argmax(rel)) if len(rel) else 0
    vanishes = bool(np.all((rel <= tol) | (absval <= 1e-300)))
    witness = None
    if not vanishes:
        witness = {v.name: float(pts[v][worst]) for v in variables}
    ev = SampleEvidence(
        samples=int(len(val)),
        max_abs=float(absval.max()) if len(absval) else 0.0,
        max_rel=float(rel.max()) if len(rel) else 0.0,
        witness=witness,
        witness_value=float(val[worst]) if witness is not None else None,
        retries=retries,
    )
    return vanishes, ev


@dataclass
class ZeroTest:
    verdict: str  # "zero" | "nonzero" | "inconclusive"
    normal_form: Expr | None
    evidence: SampleEvidence
    notes: list = field(default_factory=list)

    @property
    def is_zero(self) -> bool:
        return self.verdict == "zero"

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "normal_form": to_dsl(self.normal_form) if self.normal_form is not None else None,
            "numeric": self.evidence.to_json(),
        }


def is_zero(
    e: Expr,
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    tol: float = DEFAULT_TOL,
) -> ZeroTest:
    """Two-stage zero test: canonical normal form, then random evaluation.

    The raw (unnormalized) expression is always sampled, so a ``zero``
    verdict carries independent numeric evidence.
    """
    notes = []
    try:
        nf = normalize(e)
    except (ZeroDivisionError, ValueError) as exc:
        nf = None
        notes.append(f"normalization failed: {exc}")
    vanishes, ev = numeric_check(e, samples=samples, seed=seed, tol=tol)
    if nf is not None and nf == Const(0):
        if not vanishes:
            raise KernelInconsistency(
                f"normal form is zero but sampling found {ev.witness_value} at {ev.witness}"
            )
        return ZeroTest("zero", nf, ev, notes)
    if not vanishes:
        return ZeroTest("nonzero", nf, ev, notes)
    notes.append("normal form nonzero but every sample vanishes")
    return ZeroTest("inconclusive", nf, ev, notes)
