"""Canonical rational normal form and monomial collection.

Every expression is read as a rational function over *atoms*: variables,
opaque function applications (with normalized arguments), ``ln`` atoms and
exponential bases.  Exponentials are merged per monomial, ``exp(a)*exp(b)``
becoming ``exp(a+b)``, by giving each exponent monomial ``m`` one generator
``exp(g*m)`` where ``g`` is the gcd of the coefficients with which ``m``
occurs.  Polynomial arithmetic and gcd cancellation use sympy's sparse
rings over QQ.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, reduce
from math import gcd
from typing import Iterable, Sequence

from sympy.polys.domains import QQ
from sympy.polys.orderings import lex
from sympy.polys.rings import PolyRing

from .expr import (
    ONE,
    ZERO,
    Add,
    Const,
    Exp,
    Expr,
    Func,
    Ln,
    Mul,
    Pow,
    Var,
    add,
    exp,
    free_vars,
    mul,
    power,
)


class NonPolynomialError(ValueError):
    """Raised by :func:`collect` when the requested variables enter non-polynomially."""


Factor = tuple  # (atom: Expr, exponent: int)


@dataclass(frozen=True)
class Term:
    coef: Fraction
    factors: tuple  # sorted tuple of (atom, exponent); at most one Exp atom, exponent 1

    def expr(self) -> Expr:
        return mul(Const(self.coef), *(power(a, k) for a, k in self.factors))

    def monomial(self) -> Expr:
        return mul(*(power(a, k) for a, k in self.factors))

    @property
    def key(self) -> tuple:
        return tuple((a.sort_key, k) for a, k in self.factors)


@dataclass(frozen=True)
class RationalForm:
    """``sum(num) / sum(den)`` with coprime numerator and denominator.

    ``den`` is ``None`` when the denominator is a monomial (then folded into
    the numerator as negative exponents).  ``common_exp`` is the exponent of
    the exponential factor shared by all numerator terms.
    """

    num: tuple
    den: tuple | None
    common_exp: Expr

    @property
    def is_zero(self) -> bool:
        return not self.num

    def expr(self) -> Expr:
        n = add(*(t.expr() for t in self.num))
        if self.den is None:
            return n
        d = add(*(t.expr() for t in self.den))
        return mul(n, power(d, -1))


# -- rings ----------------------------------------------------------------------


@lru_cache(maxsize=None)
def _ring(n: int) -> PolyRing:
    return PolyRing(tuple(f"g{i}" for i in range(max(n, 1))), QQ, lex)


def _frac(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


def _qq(f: Fraction):
    return QQ(f.numerator, f.denominator)


def _frac_gcd(values: Iterable[Fraction]) -> Fraction:
    values = [abs(v) for v in values if v != 0]
    num = reduce(gcd, (v.numerator for v in values), 0)
    den = reduce(lambda a, b: a * b // gcd(a, b), (v.denominator for v in values), 1)
    return Fraction(num, den)


# -- preparation: normalize everything below the atom level ---------------------

_prep_cache: dict = {}


def _prepare(e: Expr) -> Expr:
    hit = _prep_cache.get(e)
    if hit is not None:
        return hit
    if isinstance(e, (Const, Var)):
        out = e
    elif isinstance(e, Func):
        out = Func(e.name, tuple(normalize(a) for a in e.args), e.mindex)
    elif isinstance(e, Exp):
        out = exp(normalize(e.arg))
    elif isinstance(e, Ln):
        out = _normalize_ln(e.arg)
    elif isinstance(e, Pow):
        out = power(_prepare(e.base), e.exp) if not isinstance(e.base, Pow) else _prepare(power(e.base, e.exp))
    elif isinstance(e, Mul):
        out = Mul(tuple(_prepare(f) for f in e.factors))
    elif isinstance(e, Add):
        out = Add(tuple(_prepare(t) for t in e.terms))
    else:
        raise TypeError(type(e).__name__)
    if len(_prep_cache) > 500_000:
        _prep_cache.clear()
    _prep_cache[e] = out
    return out


def _normalize_ln(arg: Expr) -> Expr:
    """ln with exponential factors pulled out: ln(exp(u)*r) -> u + ln(r)."""
    rf = rational_form(arg)
    if rf.is_zero:
        raise ValueError("ln(0) is undefined")
    u = rf.common_exp
    if u == ZERO:
        rest = rf.expr()
    else:
        rest = normalize(mul(rf.expr(), Exp(mul(Const(-1), u))))
    if rest == ONE:
        return u
    if u == ZERO:
        return Ln(rest)
    return add(u, Ln(rest))


def _exp_parts(u: Expr) -> list[tuple[Expr, Fraction]]:
    """Split a normalized exponent into (monomial, coefficient) pairs."""
    rf = rational_form(u)
    if rf.den is None:
        return [(t.monomial(), t.coef) for t in rf.num]
    c = rf.num[0].coef
    return [(normalize(mul(Const(1 / c), u)), c)]


# -- the rational evaluator -------------------------------------------------------


class _Builder:
    def __init__(self, root: Expr):
        self.atoms: dict[Expr, None] = {}
        self.exp_coeffs: dict[Expr, set] = {}
        self.exp_parts: dict[Expr, list] = {}
        self._scan(root, set())
        entries = [(a.sort_key, "atom", a) for a in self.atoms]
        entries += [((3, m.sort_key), "exp", m) for m in self.exp_coeffs]
        entries.sort(key=lambda x: x[0])
        self.gens_info = []  # (kind, payload, g)
        self.index: dict[tuple, int] = {}
        for i, (_, kind, payload) in enumerate(entries):
            g = _frac_gcd(self.exp_coeffs[payload]) if kind == "exp" else None
            self.gens_info.append((kind, payload, g))
            self.index[(kind, payload)] = i
        self.ring = _ring(len(entries))
        self.gens = self.ring.gens
        self.memo: dict[Expr, tuple] = {}

    def _scan(self, e: Expr, seen: set) -> None:
        stack = [e]
        while stack:
            node = stack.pop()
            if node in seen:
                continue
            seen.add(node)
            if isinstance(node, (Var, Func, Ln)):
                self.atoms[node] = None
            elif isinstance(node, Exp):
                parts = _exp_parts(node.arg)
                self.exp_parts[node] = parts
                for m, c in parts:
                    self.exp_coeffs.setdefault(m, set()).add(c)
            elif isinstance(node, Const):
                pass
            else:
                stack.extend(node.children())

    def value(self, e: Expr):
        hit = self.memo.get(e)
        if hit is not None:
            return hit
        R = self.ring
        if isinstance(e, Const):
            out = (R(_qq(e.value)), R.one)
        elif isinstance(e, (Var, Func, Ln)):
            out = (self.gens[self.index[("atom", e)]], R.one)
        elif isinstance(e, Exp):
            p, q = R.one, R.one
            for m, c in self.exp_parts[e]:
                i = self.index[("exp", m)]
                k = c / self.gens_info[i][2]
                assert k.denominator == 1
                k = int(k)
                if k > 0:
                    p = p * self.gens[i] ** k
                elif k < 0:
                    q = q * self.gens[i] ** (-k)
            out = (p, q)
        elif isinstance(e, Add):
            p, q = R.zero, R.one
            for t in e.terms:
                tp, tq = self.value(t)
                if tq == q:
                    p = p + tp
                elif tq == R.one:
                    p = p + tp * q
                elif q == R.one:
                    p, q = p * tq + tp, tq
                else:
                    p, q = p * tq + tp * q, q * tq
            out = (p, q)
        elif isinstance(e, Mul):
            p, q = R.one, R.one
            for f in e.factors:
                fp, fq = self.value(f)
                p = p * fp
                if fq != R.one:
                    q = q * fq
                if not p:
                    return (R.zero, R.one)
            out = (p, q)
        elif isinstance(e, Pow):
            bp, bq = self.value(e.base)
            n = e.exp
            if n >= 0:
                out = (bp**n, bq**n)
            else:
                if not bp:
                    raise ZeroDivisionError("division by an expression that normalizes to zero")
                out = (bq ** (-n), bp ** (-n))
        else:
            raise TypeError(type(e).__name__)
        self.memo[e] = out
        return out

    # -- reduction and read-back ---------------------------------------------

    def reduce(self, p, q):
        R = self.ring
        ngens = R.ngens
        if not p:
            return p, R.one, (0,) * ngens
        if len(q) != 1:
            p, q = p.cancel(q)
        shift = [0] * ngens
        if len(q) == 1:
            (mono, coef), = q.terms()
            # monomial denominator: fold into negative exponents
            p = p.quo_ground(coef)
            shift = [-k for k in mono]
            return p, R.one, tuple(shift)
        # pull exponential content out of a polynomial denominator
        monos = q.monoms()
        for i, (kind, _, _) in enumerate(self.gens_info):
            if kind == "exp":
                k = min(m[i] for m in monos)
                if k:
                    shift[i] = -k
        if any(shift):
            divisor = R({tuple(-s for s in shift): QQ(1)})
            q = q.exquo(divisor)
        lc = q.LC
        return p.quo_ground(lc), q.quo_ground(lc), tuple(shift)

    def terms(self, poly, shift) -> tuple:
        out = []
        for mono, coef in poly.terms():
            out.append(self._term(mono, shift, _frac(coef)))
        out.sort(key=lambda t: t.key)
        return tuple(out)

    def _term(self, mono, shift, coef) -> Term:
        factors = []
        exponent_terms = []
        for i, k in enumerate(mono):
            k = k + shift[i]
            if not k:
                continue
            kind, payload, g = self.gens_info[i]
            if kind == "atom":
                factors.append((payload, k))
            else:
                exponent_terms.append(mul(Const(g * k), payload))
        if exponent_terms:
            u = normalize(add(*exponent_terms))
            if u != ZERO:
                factors.append((Exp(u), 1))
        factors.sort(key=lambda f: f[0].sort_key)
        return Term(coef, tuple(factors))

    def common_exp(self, poly, shift) -> Expr:
        monos = poly.monoms()
        parts = []
        for i, (kind, payload, g) in enumerate(self.gens_info):
            if kind == "exp":
                k = min(m[i] for m in monos) + shift[i]
                if k:
                    parts.append(mul(Const(g * k), payload))
        return normalize(add(*parts)) if parts else ZERO


_rf_cache: dict = {}


def rational_form(e: Expr) -> RationalForm:
    """Reduced rational-function view of ``e`` (see :class:`RationalForm`)."""
    hit = _rf_cache.get(e)
    if hit is not None:
        return hit
    prepared = _prepare(e)
    b = _Builder(prepared)
    p, q = b.value(prepared)
    p, q, shift = b.reduce(p, q)
    if not p:
        rf = RationalForm((), None, ZERO)
    else:
        num = b.terms(p, shift)
        den = None if q == b.ring.one else b.terms(q, (0,) * b.ring.ngens)
        rf = RationalForm(num, den, b.common_exp(p, shift))
    if len(_rf_cache) > 500_000:
        _rf_cache.clear()
    _rf_cache[e] = rf
    return rf


_norm_cache: dict = {}


def normalize(e: Expr) -> Expr:
    """Canonical form: expanded, exponentials merged, common factors cancelled.

    Idempotent, and equal inputs in the supported class (rational functions
    of variables, opaque applications, ``ln`` atoms and exponentials of
    such) map to node-identical outputs.
    """
    hit = _norm_cache.get(e)
    if hit is not None:
        return hit
    if isinstance(e, (Const, Var)):
        out = e
    else:
        out = rational_form(e).expr()
    if len(_norm_cache) > 500_000:
        _norm_cache.clear()
    _norm_cache[e] = out
    _norm_cache.setdefault(out, out)
    return out


def clear_caches() -> None:
    _prep_cache.clear()
    _rf_cache.clear()
    _norm_cache.clear()


# -- collection ----------------------------------------------------------------


def _mentions(e: Expr, targets: frozenset) -> bool:
    return bool(free_vars(e) & targets)


def collect(e: Expr, variables: Sequence[Var]) -> dict[Expr, Expr]:
    """Split ``e`` into ``{monomial: coefficient}`` over ``variables``.

    Coefficients are normalized and free of the listed variables; zero
    coefficients are dropped.  Keys are ordered by total degree, then by
    the order of ``variables``.
    """
    variables = list(variables)
    targets = frozenset(variables)
    rf = rational_form(normalize(e))
    if rf.den is not None and any(_mentions(t.monomial(), targets) for t in rf.den):
        raise NonPolynomialError("listed variables occur in the denominator")
    groups: dict[tuple, list[Expr]] = {}
    for term in rf.num:
        exps = [0] * len(variables)
        rest = []
        for atom, k in term.factors:
            if isinstance(atom, Var) and atom in targets:
                if k < 0:
                    raise NonPolynomialError(f"{atom.name} occurs with negative power")
                exps[variables.index(atom)] += k
            else:
                if _mentions(atom, targets):
                    raise NonPolynomialError(f"listed variable inside {atom}")
                rest.append(power(atom, k))
        groups.setdefault(tuple(exps), []).append(mul(Const(term.coef), *rest))
    den = None if rf.den is None else add(*(t.expr() for t in rf.den))
    out = {}
    for exps in sorted(groups, key=lambda x: (sum(x), tuple(-v for v in x))):
        coeff = add(*groups[exps])
        if den is not None:
            coeff = mul(coeff, power(den, -1))
        coeff = normalize(coeff)
        if coeff == ZERO:
            continue
        mono = mul(*(power(v, k) for v, k in zip(variables, exps)))
        out[mono] = coeff
    return out
