"""Quasi-modular forms as polynomials in E2 over the field C(E4, E6).

A form of weight k and depth p is stored as ``g_0 + g_1 E2 + ... + g_p E2^p``
where each ``g_i`` is a homogeneous rational function of E4, E6 (weights 4
and 6) of weight ``k - 2i``.  sympy's sparse rational-function field keeps
these in lowest terms, which gives unique normal forms and exact equality.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

import mpmath
from mpmath import mp
from sympy import QQ
from sympy.polys.fields import field

from .errors import InvalidWeightError, NotModularError, PrecisionError
from .qseries import QSeries, ScalarPi, delta_series, eisenstein, eisenstein_values

__all__ = [
    "FIELD", "E4_SYM", "E6_SYM",
    "ModularFn", "QuasiForm", "Component", "ComponentVec", "AlmostHolo",
    "Decomposition",
    "E2", "E4", "E6", "DELTA", "const",
    "binom", "rising", "make_quasiform", "components", "d", "d_power", "serre",
    "maass_shimura", "maass_shimura_iterated", "decompose", "depth_of_power_d",
    "slash_check", "qexp", "evaluate", "modular_weight",
]

FIELD, E4_SYM, E6_SYM = field("E4,E6", QQ)
_RING = FIELD.ring
_P = _RING.gens[0] ** 3 - _RING.gens[1] ** 2  # 1728 * Delta


def binom(a: int, b: int) -> Fraction:
    """Generalized binomial: 0 for b < 0, falling factorial / b! otherwise."""
    if b < 0:
        return Fraction(0)
    num = 1
    for i in range(b):
        num *= a - i
    return Fraction(num, factorial(b))


def rising(x, m: int):
    """Pochhammer symbol (x)_m = x (x+1) ... (x+m-1)."""
    out = 1
    for i in range(m):
        out *= x + i
    return out


def _frac(c) -> Fraction:
    return Fraction(int(c.numerator), int(c.denominator))


def _poly_weight(p):
    """Weighted degree of a homogeneous polynomial, or None if inhomogeneous."""
    ws = {4 * a + 6 * b for a, b in p.monoms()}
    if len(ws) > 1:
        return None
    return ws.pop() if ws else None


def modular_weight(g) -> int | None:
    """Weight of a homogeneous element of C(E4,E6); None for zero."""
    if g == 0:
        return None
    wn = _poly_weight(g.numer)
    wd = _poly_weight(g.denom)
    if wn is None or wd is None:
        raise InvalidWeightError(f"{g} is not homogeneous in E4, E6")
    return wn - wd


def _to_field(x):
    if isinstance(x, ModularFn):
        return x.expr
    if isinstance(x, QuasiForm):
        if x.depth > 0:
            raise NotModularError("expected a depth-0 form")
        return x.coeffs[0] if x.coeffs else FIELD(0)
    if isinstance(x, Fraction):
        return FIELD(x.numerator) / x.denominator
    if isinstance(x, int):
        return FIELD(x)
    return FIELD(x)


def _theta(g):
    """Serre derivative of a modular function: D g - (w/12) E2 g."""
    return -(E6_SYM / 3) * g.diff(E4_SYM) - (E4_SYM ** 2 / 2) * g.diff(E6_SYM)


# ---------------------------------------------------------------------------
# formatting helpers

def _strip_p(poly):
    e = 0
    while poly != 0 and len(poly.monoms()) > 1:
        q, r = divmod(poly, _P)
        if r != 0:
            break
        poly, e = q, e + 1
    return poly, e


def _fmt_rat(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _fmt_mono(a: int, b: int) -> str:
    parts = []
    if a:
        parts.append("E4" if a == 1 else f"E4^{a}")
    if b:
        parts.append("E6" if b == 1 else f"E6^{b}")
    return "*".join(parts)


def _fmt_terms(poly, scale: Fraction = Fraction(1)) -> list[str]:
    out = []
    for (a, b), c in sorted(poly.terms(), key=lambda t: (-t[0][0], t[0][1])):
        c = _frac(c) * scale
        mono = _fmt_mono(a, b)
        if not mono:
            out.append(_fmt_rat(c))
        elif c == 1:
            out.append(mono)
        elif c == -1:
            out.append("-" + mono)
        else:
            out.append(f"{_fmt_rat(c)}*{mono}")
    return out


def _join_terms(terms: list[str]) -> str:
    s = terms[0]
    for t in terms[1:]:
        s += " - " + t[1:] if t.startswith("-") else " + " + t
    return s


def format_modular(g) -> str:
    """Parseable text for an element of C(E4,E6), with Delta shorthand."""
    if g == 0:
        return "0"
    num, en = _strip_p(g.numer)
    den, ed = _strip_p(g.denom)
    e = en - ed
    lc = _frac(den.LC)
    scale = Fraction(1728) ** e / lc
    den = den.quo_ground(den.LC)
    terms = _fmt_terms(num, scale)
    simple_den = den == 1
    if e == 0 and simple_den:
        return _join_terms(terms)
    if len(terms) == 1:
        head = terms[0]
    else:
        head = "(" + _join_terms(terms) + ")"
    if e > 0:
        dl = "Delta" if e == 1 else f"Delta^{e}"
        head = dl if head == "1" else "-" + dl if head == "-1" else head + "*" + dl
    elif e < 0:
        head += "/Delta" if e == -1 else f"/Delta^{-e}"
    if not simple_den:
        dterms = _fmt_terms(den)
        if len(dterms) == 1 and "*" not in dterms[0]:
            head += "/" + dterms[0]
        else:
            head += "/(" + _join_terms(dterms) + ")"
    return head


def _poly_json(p):
    return [[a, b, _fmt_rat(_frac(c))] for (a, b), c in sorted(p.terms())]


def _poly_from_json(terms):
    p = _RING(0)
    for a, b, c in terms:
        c = Fraction(c)
        p += _RING.gens[0] ** int(a) * _RING.gens[1] ** int(b) * QQ(c.numerator, c.denominator)
    return p


# ---------------------------------------------------------------------------
# core types

class ModularFn:
    """A meromorphic modular form: homogeneous ratio of polynomials in E4, E6."""

    __slots__ = ("expr", "weight")

    def __init__(self, expr, weight: int | None = None):
        expr = _to_field(expr)
        w = modular_weight(expr)
        if w is None:
            if weight is None:
                raise InvalidWeightError("the zero form needs an explicit weight")
            w = weight
        elif weight is not None and weight != w:
            raise InvalidWeightError(f"expected weight {weight}, got {w}")
        self.expr = expr
        self.weight = w

    @property
    def num(self):
        return self.expr.numer

    @property
    def den(self):
        return self.expr.denom

    def __eq__(self, other):
        if isinstance(other, ModularFn):
            return self.expr == other.expr and (self.expr == 0 or self.weight == other.weight)
        return NotImplemented

    def __hash__(self):
        return hash(self.expr)

    def __repr__(self):
        return f"ModularFn({format_modular(self.expr)}, weight={self.weight})"

    def __str__(self):
        return format_modular(self.expr)


class QuasiForm:
    """``sum_i g_i E2^i`` of pure weight ``k``; ``coeffs[i]`` has weight k - 2i."""

    __slots__ = ("weight", "coeffs")

    def __init__(self, weight: int, coeffs):
        coeffs = [_to_field(c) for c in coeffs]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        for i, g in enumerate(coeffs):
            w = modular_weight(g)
            if w is not None and w != weight - 2 * i:
                raise InvalidWeightError(
                    f"coefficient of E2^{i} has weight {w}, expected {weight - 2 * i}")
        self.weight = int(weight)
        self.coeffs = tuple(coeffs)

    # -- structure -------------------------------------------------------
    @property
    def depth(self) -> int:
        return max(len(self.coeffs) - 1, 0)

    @property
    def parts(self) -> list[ModularFn]:
        return [ModularFn(g, self.weight - 2 * i) for i, g in enumerate(self.coeffs)]

    def coeff(self, i: int):
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else FIELD(0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_modular(self) -> bool:
        return self.depth == 0

    # -- arithmetic ------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, QuasiForm):
            return other
        if isinstance(other, ModularFn):
            return QuasiForm(other.weight, [other.expr])
        if isinstance(other, (int, Fraction)):
            return QuasiForm(0, [other])
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.weight != other.weight:
            raise InvalidWeightError(f"cannot add weights {self.weight} and {other.weight}")
        n = max(len(self.coeffs), len(other.coeffs))
        return QuasiForm(self.weight, [self.coeff(i) + other.coeff(i) for i in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return QuasiForm(self.weight, [-g for g in self.coeffs])

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "QuasiForm":
        c = _to_field(Fraction(c))
        return QuasiForm(self.weight, [c * g for g in self.coeffs])

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = [FIELD(0)] * (len(self.coeffs) + len(other.coeffs) - 1) if self.coeffs and other.coeffs else []
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return QuasiForm(self.weight + other.weight, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(1 / Fraction(other))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.depth > 0:
            raise NotModularError("division is only defined by depth-0 forms")
        if other.is_zero():
            raise ZeroDivisionError("division by the zero form")
        g = other.coeffs[0]
        return QuasiForm(self.weight - other.weight, [c / g for c in self.coeffs])

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, e: int):
        if e < 0:
            if self.depth > 0:
                raise NotModularError("negative powers need a depth-0 form")
            return const(1) / (self ** (-e))
        out = const(1)
        base = self
        while e:
            if e & 1:
                out = out * base
            e >>= 1
            if e:
                base = base * base
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, ModularFn)):
            other = self._coerce(other)
        if not isinstance(other, QuasiForm):
            return NotImplemented
        if self.is_zero() and other.is_zero():
            return True
        return self.weight == other.weight and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.weight, self.coeffs))

    def __repr__(self):
        return f"QuasiForm(weight={self.weight}, depth={self.depth}, {self})"

    def __str__(self):
        if self.is_zero():
            return "0"
        pieces = []
        for i, g in enumerate(self.coeffs):
            if g == 0:
                continue
            if i == 0:
                pieces.append(format_modular(g))
                continue
            e2 = "E2" if i == 1 else f"E2^{i}"
            if g.denom == 1:
                for t in _fmt_terms(g.numer):
                    if t in ("1", "-1"):
                        pieces.append(t[:-1] + e2)
                    else:
                        pieces.append(f"{t}*{e2}")
            else:
                s = format_modular(g)
                if s.startswith("(") or " " in s:
                    s = f"({s})"
                pieces.append(f"{s}*{e2}")
        return _join_terms(pieces)

    # -- serialization ---------------------------------------------------
    def to_json(self) -> dict:
        return {
            "weight": self.weight,
            "depth": self.depth,
            "parts": [{"num": _poly_json(g.numer), "den": _poly_json(g.denom)} for g in self.coeffs],
        }

    @classmethod
    def from_json(cls, data) -> "QuasiForm":
        parts = [FIELD(_poly_from_json(p["num"])) / FIELD(_poly_from_json(p["den"]))
                 for p in data["parts"]]
        return cls(int(data["weight"]), parts)


E2 = QuasiForm(2, [0, 1])
E4 = QuasiForm(4, [E4_SYM])
E6 = QuasiForm(6, [E6_SYM])
DELTA = QuasiForm(12, [(E4_SYM ** 3 - E6_SYM ** 2) / 1728])


def const(c) -> QuasiForm:
    return QuasiForm(0, [Fraction(c)])


def make_quasiform(parts, k: int) -> QuasiForm:
    """Build ``sum parts[i] E2^i`` checking that part i has weight k - 2i."""
    return QuasiForm(k, parts)


# ---------------------------------------------------------------------------
# components

@dataclass(frozen=True)
class Component:
    """``scalar * form`` where the scalar carries the pi and i powers."""

    scalar: ScalarPi
    form: QuasiForm

    def normalized(self) -> "Component":
        return Component(ScalarPi(1, self.scalar.a, self.scalar.b), self.form.scale(self.scalar.r))

    def __eq__(self, other):
        if not isinstance(other, Component):
            return NotImplemented
        a, b = self.normalized(), other.normalized()
        if a.form.is_zero() and b.form.is_zero():
            return True
        return (a.scalar.a, a.scalar.b) == (b.scalar.a, b.scalar.b) and a.form == b.form

    def __hash__(self):
        return 0

    def evaluate(self, tau, prec: int = 256):
        with mp.workprec(prec + 20):
            return self.scalar.to_complex() * evaluate(self.form, tau, prec)

    def __str__(self):
        s = self.scalar
        return f"[{_fmt_rat(s.r)} * pi^{s.a} * i^{s.b}] * ({self.form})"


class ComponentVec(tuple):
    """Components ``f_0, ..., f_p`` with ``f_0 = f``."""

    @property
    def depth(self) -> int:
        return len(self) - 1


def _component_form(f: QuasiForm, r: int) -> QuasiForm:
    return QuasiForm(f.weight - 2 * r,
                     [int(comb(i, r)) * f.coeffs[i] for i in range(r, len(f.coeffs))])


def components(f: QuasiForm) -> ComponentVec:
    """f_r = (6/(pi i))^r sum_{i>=r} C(i,r) g_i E2^(i-r)."""
    out = []
    for r in range(f.depth + 1):
        out.append(Component(ScalarPi(6 ** r, -r, -r), _component_form(f, r)))
    return ComponentVec(out)


# ---------------------------------------------------------------------------
# derivatives

def d(f: QuasiForm) -> QuasiForm:
    """D = (1/2 pi i) d/dtau on the E2-polynomial representation."""
    k = f.weight
    out = [FIELD(0)] * (len(f.coeffs) + 1)
    for i, g in enumerate(f.coeffs):
        if g == 0:
            continue
        out[i + 1] += g * QQ(k - i, 12)
        out[i] += _theta(g)
        if i:
            out[i - 1] -= QQ(i, 12) * E4_SYM * g
    return QuasiForm(k + 2, out)


def d_power(f: QuasiForm, n: int) -> QuasiForm:
    for _ in range(n):
        f = d(f)
    return f


def serre(f: QuasiForm, p: int | None = None) -> QuasiForm:
    """Serre derivative Df - ((k - p)/12) E2 f; maps depth <= p to depth <= p."""
    if p is None:
        p = f.depth
    return d(f) - (E2 * f).scale(Fraction(f.weight - p, 12))


class AlmostHolo:
    """Polynomial ``sum_a Y^a h_a`` in ``Y = -1/(4 pi y)`` with quasi-form coefficients."""

    __slots__ = ("weight", "terms")

    def __init__(self, weight: int, terms: dict):
        self.weight = weight
        self.terms = {a: h for a, h in terms.items() if not h.is_zero()}

    @property
    def y_degree(self) -> int:
        return max(self.terms, default=0)

    def coeff(self, a: int) -> QuasiForm:
        return self.terms.get(a, QuasiForm(self.weight + 2 * a, []))

    def __eq__(self, other):
        if not isinstance(other, AlmostHolo):
            return NotImplemented
        return self.terms == other.terms

    def evaluate(self, tau, prec: int = 256):
        with mp.workprec(prec + 20):
            tau = mpmath.mpc(tau)
            Y = -1 / (4 * mp.pi * tau.imag)
            return sum((Y ** a * evaluate(h, tau, prec) for a, h in self.terms.items()), mpmath.mpc(0))

    def __repr__(self):
        body = " + ".join(f"Y^{a}*({h})" for a, h in sorted(self.terms.items()))
        return f"AlmostHolo({body or '0'})"


def maass_shimura(f: QuasiForm, n: int) -> AlmostHolo:
    """n-fold Maass-Shimura derivative by its closed binomial formula."""
    k = f.weight
    terms = {}
    Dj = f
    for j in range(n + 1):
        c = comb(n, j) * rising(k + j, n - j)
        if c:
            terms[n - j] = Dj.scale(c)
        if j < n:
            Dj = d(Dj)
    return AlmostHolo(k + 2 * n, terms)


def maass_shimura_iterated(f: QuasiForm, n: int) -> AlmostHolo:
    """Same operator applied one step at a time using D(Y) = -Y^2."""
    k = f.weight
    terms = {0: f}
    for step in range(n):
        w = k + 2 * step
        new: dict[int, QuasiForm] = {}
        for a, h in terms.items():
            dh = d(h)
            new[a] = new[a] + dh if a in new else dh
            if w - a:
                t = h.scale(w - a)
                new[a + 1] = new[a + 1] + t if a + 1 in new else t
        terms = new
    return AlmostHolo(k + 2 * n, terms)


def depth_of_power_d(k: int, p: int) -> int:
    """Depth of D^p g for a nonzero modular g of weight k."""
    if k <= 0 and p >= 1 - k:
        return p + k - 1
    return p


# ---------------------------------------------------------------------------
# decomposition into derivatives

@dataclass
class Decomposition:
    """f = sum D^l F (first) + sum D^l h (middle) + sum D^l F (third)."""

    weight: int
    first: list = dc_field(default_factory=list)
    middle: list = dc_field(default_factory=list)
    third: list = dc_field(default_factory=list)

    def resynthesize(self) -> QuasiForm:
        total = QuasiForm(self.weight, [])
        for block in (self.first, self.middle, self.third):
            for l, F in block:
                total = total + d_power(F, l)
        return total

    def to_json(self) -> dict:
        def enc(block):
            return [{"l": l, "form": str(F), "weight": F.weight, "depth": F.depth} for l, F in block]
        return {"weight": self.weight, "modular": enc(self.first),
                "middle": enc(self.middle), "high": enc(self.third)}


def _add_entry(entries: dict, l: int, F: QuasiForm):
    entries[l] = entries[l] + F if l in entries else F


def _middle(g, k: int, p: int) -> dict:
    """Write g E2^p (k/2 <= p <= k-1) as sum_l D^l h_l with depth(h_l) <= k - 2l - 1."""
    mono = QuasiForm(k, [0] * p + [g])
    if p == k - 1:
        return {0: mono}
    inner = _middle(g, k - 2, p - 1)
    c = Fraction(12, k - p - 1)
    return {l + 1: h.scale(c) for l, h in inner.items()}


def decompose(f: QuasiForm) -> Decomposition:
    """Split f into iterated derivatives of modular forms and middle-block pieces."""
    k = f.weight
    first: dict = {}
    middle: dict = {}
    third: dict = {}
    rem = f
    while not rem.is_zero():
        p = rem.depth
        g = rem.coeffs[p]
        if k > 0 and k / 2 <= p <= k - 1:
            pieces = _middle(g, k, p)
            for l, h in pieces.items():
                _add_entry(middle, l, h)
                rem = rem - d_power(h, l)
        else:
            F = QuasiForm(k - 2 * p, [g * QQ(12 ** p) / QQ(factorial(p) * binom(k - p - 1, p))])
            if k > 0 and p < k / 2:
                _add_entry(first, p, F)
            else:
                _add_entry(third, p, F)
            rem = rem - d_power(F, p)
        if rem.depth >= p and not rem.is_zero():
            raise ArithmeticError("decomposition failed to reduce depth")
    def srt(dct):
        return [(l, F) for l, F in sorted(dct.items()) if not F.is_zero()]
    return Decomposition(k, srt(first), srt(middle), srt(third))


# ---------------------------------------------------------------------------
# q-expansions and numerics

@lru_cache(maxsize=32)
def _gen_powers(N: int):
    return {"E2": eisenstein(2, N), "E4": eisenstein(4, N), "E6": eisenstein(6, N)}


def _poly_series(poly, N: int) -> QSeries:
    gens = _gen_powers(N)
    p4 = {0: QSeries.one(N)}
    p6 = {0: QSeries.one(N)}
    total = QSeries(N + 1, [], N)
    for (a, b), c in poly.terms():
        for dct, key, e in ((p4, "E4", a), (p6, "E6", b)):
            m = max(dct)
            while m < e:
                dct[m + 1] = dct[m] * gens[key]
                m += 1
        total = total + (p4[a] * p6[b]).scale(_frac(c))
    return total


def _field_series(g, N: int) -> QSeries:
    num, den = g.numer, g.denom
    den_p, e = _strip_p(den)
    if den_p == 1 and e == 0:
        return _poly_series(num, N).truncate(N)
    wd = _poly_weight(den_p) or 0
    M = N + 2 * e + 2 * (wd // 12) + 2
    s = _poly_series(num, M)
    if e:
        s = s * (delta_series(M) ** e).scale(Fraction(1728) ** e).invert()
    if den_p != 1:
        s = s * _poly_series(den_p, M).invert()
    if s.trunc < N:
        raise PrecisionError("insufficient working order for q-expansion")
    return s.truncate(N)


def qexp(f: QuasiForm, N: int) -> QSeries:
    """Exact q-expansion of f through q^N."""
    if f.is_zero():
        return QSeries(N + 1, [], N)
    total = None
    e2 = _gen_powers(N + 2)["E2"]
    e2pow = QSeries.one(N + 2)
    for i, g in enumerate(f.coeffs):
        if i:
            e2pow = e2pow * e2
        if g == 0:
            continue
        gs = _field_series(g, N + 2)
        term = gs * e2pow if i else gs
        total = term if total is None else total + term
    return total.truncate(N)


def _eval_poly(poly, e4, e6):
    acc = mpmath.mpc(0)
    for (a, b), c in poly.terms():
        c = _frac(c)
        acc += mpmath.mpf(c.numerator) / c.denominator * e4 ** a * e6 ** b
    return acc


def evaluate_field(g, e4, e6):
    return _eval_poly(g.numer, e4, e6) / _eval_poly(g.denom, e4, e6)


def evaluate(f: QuasiForm, tau, prec: int = 256, values=None):
    """Numerical value of f at tau from Lambert-series values of E2, E4, E6."""
    with mp.workprec(prec + 20):
        e2, e4, e6 = values if values is not None else eisenstein_values(tau, prec + 20)
        acc = mpmath.mpc(0)
        for g in reversed(f.coeffs):
            acc = acc * e2 + (evaluate_field(g, e4, e6) if g != 0 else 0)
        return acc


def slash_check(f: QuasiForm, gamma, tau, prec: int = 256, relative: bool = False):
    """Residual of the transformation law f|_k gamma = sum_r f_r (c/(c tau + d))^r."""
    (a, b), (c, dd) = gamma
    if a * dd - b * c != 1:
        raise ValueError("gamma must have determinant 1")
    with mp.workprec(prec + 40):
        tau = mpmath.mpc(tau)
        gt = (a * tau + b) / (c * tau + dd)
        j = c * tau + dd
        lhs = j ** (-f.weight) * evaluate(f, gt, prec + 40)
        vals = eisenstein_values(tau, prec + 40)
        rhs = mpmath.mpc(0)
        for r, comp in enumerate(components(f)):
            rhs += comp.scalar.to_complex() * evaluate(comp.form, tau, prec + 40, vals) * (c / j) ** r
        res = abs(lhs - rhs)
        if relative:
            res /= max(abs(lhs), 1)
        return +res
