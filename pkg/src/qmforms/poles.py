"""Poles in the strip -1/2 <= Re tau < 1/2 above a floor, their principal parts, and pole-subtracted expansions."""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from math import factorial, log

import mpmath
from mpmath import mp

from .errors import QMFormsError
from .forms import Component, QuasiForm, _RING, _frac, evaluate, qexp
from .qseries import eisenstein_values
from .specfun import polylog

__all__ = [
    "SearchDegeneracyError", "GeometryError", "MissingPoleError",
    "PoleRecord", "TildeExpansion",
    "denominator_factors", "find_poles", "principal_part", "tilde_expansion",
    "coefficient_asymptotics", "pole_term_value", "refine_records", "cancellation_bits",
]


class SearchDegeneracyError(QMFormsError, ArithmeticError):
    pass


class GeometryError(QMFormsError, ValueError):
    pass


class MissingPoleError(QMFormsError, ArithmeticError):
    pass


def _digits(prec: int) -> int:
    return int(prec * 0.30103) + 5


@dataclass
class PoleRecord:
    """A pole alpha with principal part sum_m c(m) / (tau - alpha)^m."""

    alpha: mpmath.mpc
    order: int
    coeffs: dict = dc_field(default_factory=dict)
    prec: int = 256

    def c(self, m: int):
        return self.coeffs.get(m, mpmath.mpc(0))

    def to_json(self) -> dict:
        dg = _digits(self.prec)
        pair = lambda z: [mpmath.nstr(mpmath.re(z), dg), mpmath.nstr(mpmath.im(z), dg)]
        return {"alpha": pair(self.alpha), "order": self.order,
                "coeffs": [pair(self.c(m)) for m in range(1, self.order + 1)]}

    @classmethod
    def from_json(cls, data, prec: int = 256) -> "PoleRecord":
        with mp.workprec(prec):
            z = lambda p: mpmath.mpc(mpmath.mpf(p[0]), mpmath.mpf(p[1]))
            coeffs = {m + 1: z(p) for m, p in enumerate(data["coeffs"])}
            return cls(z(data["alpha"]), int(data["order"]), coeffs, prec)


# ---------------------------------------------------------------------------
# denominators

def _denominator(f: QuasiForm):
    den = _RING.one
    for g in f.coeffs:
        if g != 0:
            den = den.lcm(g.denom)
    return den


def denominator_factors(f) -> list:
    """Irreducible factors (poly, exponent) of the denominator that vanish somewhere in H.

    Powers of E4^3 - E6^2 (a multiple of Delta) are dropped since Delta has no zeros.
    """
    if isinstance(f, Component):
        f = f.form
    den = _denominator(f)
    E4, E6 = _RING.gens
    P = E4 ** 3 - E6 ** 2
    _, facs = den.factor_list()
    out = []
    for q, e in facs:
        if q.is_ground:
            continue
        lc = q.LC
        if q * lc ** -1 == P * P.LC ** -1:
            continue
        out.append((q, e))
    return out


def _poly_eval(q, e4, e6):
    acc = mpmath.mpc(0)
    for (a, b), c in q.terms():
        c = _frac(c)
        acc += mpmath.mpf(c.numerator) / c.denominator * e4 ** a * e6 ** b
    return acc


def _poly_fn(q, prec):
    def fn(tau):
        with mp.workprec(prec):
            _, e4, e6 = eisenstein_values(tau, prec, floor=0.05)
            return _poly_eval(q, e4, e6)
    return fn


def _weight(q) -> int:
    (a, b), _ = q.terms()[0]
    return 4 * a + 6 * b


def _t_max(q, floor) -> float:
    # above this height the leading q-power dominates, so there are no zeros
    s = qexp(QuasiForm(_weight(q), [q]), 40)
    v = s.valuation
    lead = abs(s[v])
    T = max(1.0, floor + 0.5)
    while True:
        tail = sum(abs(float(s[n] / lead)) * mpmath.exp(-2 * mpmath.pi * (n - v) * T)
                   for n in range(v + 1, s.trunc + 1))
        if tail < 0.25:
            return T
        T += 0.25


# ---------------------------------------------------------------------------
# argument principle

class _Degenerate(Exception):
    pass


def _winding(fn, corners, scale):
    """Number of zeros of fn inside the polygon, by tracking arg along its edges."""
    total = mpmath.mpf(0)
    for z0, z1 in zip(corners, corners[1:] + corners[:1]):
        total += _edge_phase(fn, z0, z1, fn(z0), fn(z1), scale, 0)
    n = total / (2 * mp.pi)
    k = int(mpmath.nint(n))
    if abs(n - k) > 0.1:
        raise _Degenerate()
    return k


def _edge_phase(fn, z0, z1, v0, v1, scale, depth):
    for v in (v0, v1):
        if abs(v) < 1e-12 * scale:
            raise _Degenerate()
    dphi = mpmath.arg(v1 / v0)
    if abs(dphi) < 0.5 and depth >= 3:
        return dphi
    if depth > 24:
        raise _Degenerate()
    zm = (z0 + z1) / 2
    vm = fn(zm)
    return (_edge_phase(fn, z0, zm, v0, vm, scale, depth + 1)
            + _edge_phase(fn, zm, z1, vm, v1, scale, depth + 1))


def _rect_corners(x0, x1, y0, y1):
    return [mpmath.mpc(x0, y0), mpmath.mpc(x1, y0), mpmath.mpc(x1, y1), mpmath.mpc(x0, y1)]


def _search(fn, rect, scale, out, split=0.4871):
    x0, x1, y0, y1 = rect
    n = _winding(fn, _rect_corners(*rect), scale)
    if n == 0:
        return
    w, h = x1 - x0, y1 - y0
    if max(w, h) < 0.02:
        out.append((mpmath.mpc((x0 + x1) / 2, (y0 + y1) / 2), n))
        return
    if w >= h:
        xm = x0 + split * w
        _search(fn, (x0, xm, y0, y1), scale, out, split)
        _search(fn, (xm, x1, y0, y1), scale, out, split)
    else:
        ym = y0 + split * h
        _search(fn, (x0, x1, y0, ym), scale, out, split)
        _search(fn, (x0, x1, ym, y1), scale, out, split)


def _zeros_of(q, floor: float, prec: int):
    fast = _poly_fn(q, 64)
    T = _t_max(q, floor)
    scale = max(abs(fast(mpmath.mpc(x, y))) for x in (-0.3, 0.1, 0.4) for y in (floor, (floor + T) / 2))
    shift = mpmath.mpf("0.0137")
    for attempt in range(8):
        rect = (-0.5 - shift, 0.5 - shift, floor * (1 - 0.003 * attempt), T)
        found = []
        try:
            with mp.workprec(64):
                _search(fast, rect, scale, found, 0.4871 - 0.0173 * attempt)
            break
        except _Degenerate:
            shift += mpmath.mpf("0.0071")
    else:
        raise SearchDegeneracyError("zero on a search boundary after 8 retries")
    slow = _poly_fn(q, prec + 32)
    roots = []
    for z0, mult in found:
        with mp.workprec(prec + 32):
            z = mpmath.findroot(slow, mpmath.mpc(z0), tol=mpmath.mpf(2) ** (-2 * prec))
        roots.append((_normalize(z, prec), mult))
    return roots


def _normalize(z, prec):
    tol = mpmath.mpf(2) ** (-prec // 2)
    x, y = mpmath.re(z), mpmath.im(z)
    if x < -0.5 - tol:
        x += 1
    elif x >= 0.5 - tol:
        x -= 1
    for snap in (mpmath.mpf(-0.5), mpmath.mpf(0)):
        if abs(x - snap) < tol:
            x = snap
    return mpmath.mpc(x, y)


# ---------------------------------------------------------------------------
# principal parts

def _evaluator(f, prec):
    if isinstance(f, QuasiForm):
        return lambda t: evaluate(f, t, prec)
    if isinstance(f, Component):
        return lambda t: f.evaluate(t, prec)
    return f


def _radius(alpha, others):
    r = min(mpmath.im(alpha) / 2, mpmath.mpf("0.1"))
    for beta in others:
        for shift in (-1, 0, 1):
            d = abs(beta + shift - alpha)
            if d > 0:
                r = min(r, d / 2)
    if r < 1e-6:
        raise GeometryError("no feasible contour radius around the pole")
    return r


def principal_part(f, alpha, order: int | None = None, prec: int = 256, others=(),
                   max_order: int = 8, nodes: int | None = None) -> PoleRecord:
    """c(m) = (1/2 pi i) * contour integral of f(tau) (tau - alpha)^(m-1) on a small circle.

    With ``order=None`` the order is the largest m whose coefficient is
    numerically nonzero (0 when there is no pole).
    """
    wp = prec + 32
    with mp.workprec(wp):
        alpha = mpmath.mpc(alpha)
        r = _radius(alpha, [mpmath.mpc(b) for b in others])
        M = order if order is not None else max_order
        # aliasing from the regular part decays like (r / R)^K with R >= 2 r
        K = nodes or (wp + 16 + 2 * M)
        fn = _evaluator(f, wp)
        vals = []
        for l in range(K):
            w = mpmath.expjpi(mpmath.mpf(2 * l) / K)
            vals.append((w, fn(alpha + r * w)))
        coeffs = {}
        for m in range(1, M + 1):
            coeffs[m] = mpmath.fsum(v * w ** m for w, v in vals) * r ** m / K
        tol = mpmath.mpf(2) ** (-prec + 24)
        if order is None:
            big = max([abs(c) * r ** (-m) for m, c in coeffs.items()] + [abs(vals[0][1])])
            order = 0
            for m, c in coeffs.items():
                if abs(c) * r ** (-m) > tol * big:
                    order = m
            coeffs = {m: c for m, c in coeffs.items() if m <= order}
        return PoleRecord(alpha, order, coeffs, prec)


def find_poles(f, t_floor: float = 0.85, prec: int = 256, with_coeffs: bool = True) -> list:
    """All poles alpha with -1/2 <= Re alpha < 1/2 and Im alpha >= t_floor."""
    positions = []
    for q, e in denominator_factors(f):
        for z, mult in _zeros_of(q, t_floor, prec):
            positions.append((z, e * mult))
    records = []
    allz = [z for z, _ in positions]
    for z, bound in positions:
        if with_coeffs:
            rec = principal_part(f, z, None, prec, [w for w in allz if w != z], max_order=bound + 1)
            if rec.order == 0:
                continue
        else:
            rec = PoleRecord(z, bound, {}, prec)
        records.append(rec)
    records.sort(key=lambda r: (-float(mpmath.im(r.alpha)), float(mpmath.re(r.alpha))))
    return records


# ---------------------------------------------------------------------------
# pole-subtracted expansion

def _pole_weights(rec: PoleRecord):
    # P_alpha = sum_m w_m Li_{1-m}(e(tau - alpha)),  w_m = (-2 pi i)^m / (m-1)! c(m)
    return {m: (-2j * mp.pi) ** m / factorial(m - 1) * rec.c(m) for m in range(1, rec.order + 1)}


def pole_term_value(rec: PoleRecord, tau, prec: int = 256):
    """P_alpha(f)(tau) in its periodic polylogarithm form."""
    with mp.workprec(prec + 16):
        x = mpmath.expj(2 * mp.pi * (mpmath.mpc(tau) - rec.alpha))
        return mpmath.fsum(w * polylog(1 - m, x, prec) for m, w in _pole_weights(rec).items())


def coefficient_asymptotics(f, records, n: int, prec: int = 256):
    """Predicted a(n) = sum_alpha sum_m (-2 pi i)^m / (m-1)! c(m) n^(m-1) e^(-2 pi i n alpha)."""
    with mp.workprec(prec + 16):
        total = mpmath.mpc(0)
        for rec in records:
            ph = mpmath.expj(-2 * mp.pi * n * rec.alpha)
            for m, w in _pole_weights(rec).items():
                total += w * mpmath.mpf(n) ** (m - 1) * ph
        return total


@dataclass
class TildeExpansion:
    """Coefficients of f minus the polylogarithm forms of the subtracted poles."""

    coeffs: dict
    n_min: int
    N: int
    t0: float
    poles: list
    prec: int

    def __getitem__(self, n):
        return self.coeffs.get(n, mpmath.mpc(0))

    def evaluate(self, tau):
        with mp.workprec(self.prec + 16):
            q = mpmath.expj(2 * mp.pi * mpmath.mpc(tau))
            return mpmath.fsum(c * q ** n for n, c in self.coeffs.items())

    def direct(self, f, tau):
        """f(tau) minus the pole terms, evaluated in closed form."""
        with mp.workprec(self.prec + 16):
            val = _evaluator(f, self.prec + 16)(mpmath.mpc(tau))
            for rec in self.poles:
                val -= pole_term_value(rec, tau, self.prec)
            return val


def _exact_coeffs(f, N):
    if isinstance(f, Component):
        s = f.scalar.to_complex()
        series = qexp(f.form, N)
    else:
        s = 1
        series = qexp(f, N)
    return s, series


def cancellation_bits(records, N: int, damping: float = 0.0) -> int:
    """Extra bits lost subtracting pole terms of size e^(2 pi n Im alpha) from a(n).

    When the a~(n) are only consumed against weights decaying like
    e^(-2 pi n damping), that much of the loss is harmless.
    """
    top = max([float(mpmath.im(r.alpha)) for r in records], default=0.0)
    order = max([r.order for r in records], default=1)
    growth = max(top - damping, 0.0)
    return int(2 * 3.14159265 * N * growth / log(2) + order * log(N + 1, 2)) + 32


def tilde_expansion(f, records, t0, N: int, prec: int = 256, check_growth: bool = True,
                    damping: float = 0.0) -> TildeExpansion:
    """a~(n) = a(n) - sum_{alpha, m} (-2 pi i)^m / (m-1)! c(m) n^(m-1) e^(-2 pi i n alpha) for n >= 1.

    The records' coefficients must carry about ``cancellation_bits`` extra
    bits beyond ``prec``; ``refine_records`` recomputes them when needed.
    """
    wp = prec + cancellation_bits(records, N, damping)
    with mp.workprec(wp):
        scal, series = _exact_coeffs(f, N)
        scal = mpmath.mpmathify(scal)
        weights = [(rec.alpha, _pole_weights(rec)) for rec in records]
        out = {}
        for n in range(series.n_min, N + 1):
            a = series[n]
            v = scal * mpmath.mpf(a.numerator) / a.denominator
            if n >= 1:
                for alpha, ws in weights:
                    ph = mpmath.expj(-2 * mp.pi * n * alpha)
                    for m, w in ws.items():
                        v -= w * mpmath.mpf(n) ** (m - 1) * ph
            out[n] = v
    tx = TildeExpansion(out, series.n_min, N, t0, list(records), prec)
    if check_growth and N >= 24:
        _growth_check(tx, t0)
    return tx


def _growth_check(tx: TildeExpansion, t0):
    # holomorphy above t0 forces |a~(n)| = O(e^{2 pi n (t0 - eps)})
    rates = []
    for n in range(tx.N // 2, tx.N + 1):
        c = abs(tx[n])
        if c > 0:
            rates.append(float(mpmath.log(c)) / (2 * 3.141592653589793 * n))
    if rates and min(rates[-4:]) > float(t0) + 0.02:
        raise MissingPoleError(
            f"coefficients grow like e^(2 pi n {min(rates[-4:]):.3f}) above the floor {float(t0):.3f}")


def refine_records(f, records, N: int, prec: int = 256, others=None, damping: float = 0.0) -> list:
    """Recompute principal parts with enough precision for tilde_expansion."""
    wp = prec + cancellation_bits(records, N, damping)
    allz = [r.alpha for r in records] if others is None else others
    out = []
    for rec in records:
        if rec.prec >= wp:
            out.append(rec)
            continue
        out.append(principal_part(f, rec.alpha, rec.order, wp, [z for z in allz if z != rec.alpha]))
    return out
