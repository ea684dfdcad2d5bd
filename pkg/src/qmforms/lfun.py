"""Completed and Dirichlet L-functions of meromorphic quasi-modular forms.

Lambda(f, s) is the regularized Mellin transform of f(it).  Splitting the
ray at t0 and inverting the lower half gives

    Lambda(f, s) = U(f, s, t0) + sum_r i^(k-r) U(f_r, k-r-s, 1/t0),

where U(g, s, T) is the regularized integral of g(it) t^(s-1) over [T, inf):
incomplete-gamma sums over the pole-subtracted coefficients plus one entire
term G_{m-1} per principal-part coefficient.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from math import comb, log

import mpmath
from mpmath import mp

from .errors import QMFormsError
from .forms import Component, QuasiForm, components, d_power, rising
from .poles import (TildeExpansion, _pole_weights, find_poles,
                    refine_records, tilde_expansion)
from .specfun import (DEFAULT_BRANCH, BranchConfig, branch_pow, hurwitz_zeta,
                      polylog, upper_gamma)

__all__ = [
    "CaseBoundaryError", "NearPoleError", "NotAPoleError",
    "LContext", "LValueReport",
    "g_function", "i_function", "upper_integral", "lambda_value", "dirichlet_l",
    "residue", "residue_by_contour", "pole_locations",
    "verify_functional_equation", "verify_shift",
]


class CaseBoundaryError(QMFormsError, ValueError):
    pass


class NearPoleError(QMFormsError, ArithmeticError):
    def __init__(self, message, s=None, residue=None):
        super().__init__(message)
        self.s = s
        self.residue = residue


class NotAPoleError(QMFormsError, ValueError):
    pass


# ---------------------------------------------------------------------------
# G_m(s, alpha, T) = regularized int_T^inf Li_{-m}(e(it - alpha)) t^(s-1) dt

def g_function(m: int, s, alpha, t0, prec: int = 256, branch: BranchConfig = DEFAULT_BRANCH):
    """The entire function G_m(s, alpha, t0); alpha must be normalized to -1/2 <= Re < 1/2."""
    with mp.workprec(prec + 24):
        s = mpmath.mpmathify(s)
        alpha = mpmath.mpc(alpha)
        t0 = mpmath.mpf(t0)
        if abs(mpmath.im(alpha) - t0) < mpmath.mpf(2) ** (-prec // 2):
            raise CaseBoundaryError("Im alpha equals t0")
        if mpmath.im(alpha) < t0:
            return _g_below(m, s, alpha, t0, prec, branch)
        # the singular pieces cancel at s = m; evaluate there as a circle mean
        d = abs(s - m)
        eps = mpmath.mpf(2) ** (-prec // 4)
        if d < eps:
            extra = prec // 4 + 16
            with mp.workprec(prec + 24 + extra):
                pts = [m + eps * u for u in (1, 1j, -1, -1j)]
                vals = [_g_above(m, z, alpha, t0, prec + extra, branch) for z in pts]
                return sum(vals) / 4
        extra = int(max(0, -float(mpmath.log(d, 2)))) + 8
        with mp.workprec(prec + 24 + extra):
            return _g_above(m, s, alpha, t0, prec + extra, branch)


def _g_below(m, s, alpha, t0, prec, branch):
    # (2 pi)^-m sum_{n>=1} e^{-2 pi i n alpha} Gamma(s, 2 pi n t0) / (2 pi n)^(s-m)
    tol = mpmath.mpf(2) ** (-prec - 8)
    total = mpmath.mpc(0)
    n = 0
    small = 0
    while True:
        n += 1
        x = 2 * mp.pi * n
        t = mpmath.expj(-x * alpha) * upper_gamma(s, x * t0, prec, branch) / mpmath.power(x, s - m)
        total += t
        if abs(t) < tol * max(abs(total), tol):
            small += 1
            if small >= 3:
                break
        else:
            small = 0
        if n > 200000:
            raise ArithmeticError("G_m series did not converge")
    return total / (2 * mp.pi) ** m


def _g_above(m, s, alpha, t0, prec, branch):
    sig = s - m
    two_pi = 2 * mp.pi
    poch = rising(sig, m) if m else 1  # Gamma(s)/Gamma(s-m)
    a = mpmath.floor(mpmath.re(alpha)) + 1 - alpha
    total = mpmath.expjpi(sig / 2) / two_pi ** m * poch * hurwitz_zeta(1 - sig, a, prec)
    total += (-1) ** (m - 1) * 2j * mp.pi * mpmath.rgamma(1 - s) / mpmath.power(two_pi, s) \
        * polylog(sig, mpmath.expj(two_pi * alpha), prec)
    if mpmath.re(alpha) == 0:
        total += mpmath.expjpi(s / 2) / (2 * (2j * mp.pi) ** m) * poch * mpmath.power(-alpha, sig - 1)
    if m == 0:
        total += mpmath.power(t0, s) / s
    # - e^{-i pi sigma} (2 pi)^-m sum_n e^{2 pi i n alpha} Gamma(s, -2 pi n t0) / (2 pi n)^sigma
    tol = mpmath.mpf(2) ** (-prec - 8)
    acc = mpmath.mpc(0)
    n = 0
    small = 0
    while True:
        n += 1
        x = two_pi * n
        t = mpmath.expj(x * alpha) * upper_gamma(s, -x * t0, prec, branch) / mpmath.power(x, sig)
        acc += t
        if abs(t) < tol * max(abs(acc), abs(total), tol):
            small += 1
            if small >= 3:
                break
        else:
            small = 0
        if n > 200000:
            raise ArithmeticError("G_m series did not converge")
    total -= mpmath.expjpi(-sig) / two_pi ** m * acc
    return total


# ---------------------------------------------------------------------------
# contexts

@dataclass
class _FormData:
    records: list
    tilde: TildeExpansion
    N: int


@dataclass
class LContext:
    """Truncation, precision, branch and per-form pole data for L-value evaluation.

    Pole sets contain every pole at or above ``0.95 * min(t_floor, t0, 1/t0)``,
    so one pole-subtracted expansion serves both halves of the ray.  When a
    pole lies within ``gap`` of t0 or 1/t0, t0 is nudged upward.
    """

    t0: float = 1.05
    prec: int = 256
    branch: BranchConfig = DEFAULT_BRANCH
    t_floor: float = 0.85
    gap: float = 0.02
    max_terms: int = 800
    trunc: int | None = None
    requested_t0: float | None = None
    cache: dict = dc_field(default_factory=dict)

    @property
    def search_floor(self) -> float:
        return 0.95 * min(self.t_floor, self.t0, 1 / self.t0)

    @classmethod
    def for_form(cls, f: QuasiForm, t0: float = 1.05, prec: int = 256,
                 branch: BranchConfig = DEFAULT_BRANCH, t_floor: float = 0.85,
                 trunc: int | None = None) -> "LContext":
        ctx = cls(t0=t0, prec=prec, branch=branch, t_floor=t_floor, trunc=trunc, requested_t0=t0)
        for _ in range(40):
            heights = set()
            for comp in components(f):
                for rec in find_poles(comp.form, ctx.search_floor, prec, with_coeffs=False):
                    heights.add(float(mpmath.im(rec.alpha)))
            bad = [h for h in heights
                   if abs(h - ctx.t0) < ctx.gap or abs(h - 1 / ctx.t0) < ctx.gap]
            if not bad:
                break
            ctx.t0 = ctx.t0 + 0.03
        else:
            raise CaseBoundaryError("could not place t0 away from the pole heights")
        return ctx

    def data(self, g: QuasiForm) -> _FormData:
        key = (g.weight, g.coeffs)
        if key in self.cache:
            return self.cache[key]
        records = find_poles(g, self.search_floor, self.prec)
        for rec in records:
            h = mpmath.im(rec.alpha)
            for T in (self.t0, 1 / self.t0):
                if abs(h - T) < mpmath.mpf(2) ** (-self.prec // 2):
                    raise CaseBoundaryError("a pole lies on the integration ray height")
        N = self._choose_n(g, records)
        # the a~(n) only meet Gamma(s, 2 pi n T) with T >= min(t0, 1/t0)
        damp = min(self.t0, 1 / self.t0)
        refined = refine_records(g, records, N, self.prec, damping=damp)
        tilde = tilde_expansion(g, refined, self.search_floor, N, self.prec, check_growth=False,
                                damping=damp)
        out = _FormData(refined, tilde, N)
        self.cache[key] = out
        return out

    def _choose_n(self, g, records) -> int:
        if self.trunc is not None:
            return self.trunc
        # rate of growth of the subtracted coefficients from a cheap probe
        probe = 48
        rec = refine_records(g, records, probe, 64)
        tx = tilde_expansion(g, rec, self.search_floor, probe, 64, check_growth=False)
        rates = []
        for n in range(probe // 2, probe + 1):
            c = abs(tx[n])
            if c > 0:
                rates.append(float(mpmath.log(c)) / (2 * 3.141592653589793 * n))
        h = max(rates[-8:]) if rates else 0.0
        T = min(self.t0, 1 / self.t0)
        margin = T - max(h, 0.0)
        if margin <= 0.02:
            raise QMFormsError("coefficient growth too close to the integration height")
        N = int((self.prec + 48) * log(2) / (2 * 3.141592653589793 * margin) * 1.1) + 8
        return min(max(N, 16), self.max_terms)


@dataclass
class LValueReport:
    s: object
    lam: object
    L: object
    terms: dict
    error_bound: float
    t0: float

    def to_json(self, digits: int = 30) -> dict:
        pair = lambda z: [mpmath.nstr(mpmath.re(z), digits), mpmath.nstr(mpmath.im(z), digits)]
        return {"s": pair(self.s), "lambda": pair(self.lam),
                "l": None if self.L is None else pair(self.L),
                "terms": {k: pair(v) for k, v in self.terms.items()},
                "err": self.error_bound, "t0": self.t0}


# ---------------------------------------------------------------------------
# building blocks

def i_function(records, s, t0, prec: int = 256, branch: BranchConfig = DEFAULT_BRANCH):
    """sum_alpha sum_m (-2 pi i)^m / (m-1)! c(m) G_{m-1}(s, alpha, t0)."""
    with mp.workprec(prec + 24):
        total = mpmath.mpc(0)
        for rec in records:
            for m, w in _pole_weights(rec).items():
                if w != 0:
                    total += w * g_function(m - 1, s, rec.alpha, t0, prec, branch)
        return total


def _gamma_sum(tilde: TildeExpansion, s, T, prec, branch):
    total = mpmath.mpc(0)
    for n in range(tilde.n_min, tilde.N + 1):
        if n == 0:
            continue
        a = tilde[n]
        if a == 0:
            continue
        x = 2 * mp.pi * n
        total += a * upper_gamma(s, x * T, prec, branch) / branch_pow(x, s, branch)
    return total


def upper_integral(g: QuasiForm, s, T, ctx: LContext) -> dict:
    """Regularized int_T^inf g(it) t^(s-1) dt split into its three pieces."""
    data = ctx.data(g)
    prec = ctx.prec
    with mp.workprec(prec + 24):
        s = mpmath.mpmathify(s)
        T = mpmath.mpf(T)
        a0 = data.tilde[0]
        const = -a0 * mpmath.power(T, s) / s if a0 != 0 else mpmath.mpc(0)
        gsum = _gamma_sum(data.tilde, s, T, prec, ctx.branch)
        iterm = i_function(data.records, s, T, prec, ctx.branch)
        return {"constant": const, "gamma_sum": gsum, "poles": iterm}


def _split(f):
    if isinstance(f, Component):
        return f.scalar.to_complex(), f.form
    return 1, f


def _pole_set(f: QuasiForm):
    """Poles of Lambda with their residues: {s: residue}."""
    k = f.weight
    comps = components(f)
    out = {}
    from .forms import qexp
    a0 = qexp(f, 0)[0]
    if a0:
        out[0] = -mpmath.mpf(a0.numerator) / a0.denominator
    for r, comp in enumerate(comps):
        c0 = qexp(comp.form, 0)[0]
        if c0 == 0:
            continue
        val = comp.scalar.to_complex() * mpmath.mpf(c0.numerator) / c0.denominator
        n = k - r
        res = mpmath.expjpi(mpmath.mpf(n) / 2) * val
        out[n] = out.get(n, 0) + res
    return {n: v for n, v in out.items() if v != 0}


def lambda_value(f, s, ctx: LContext) -> LValueReport:
    """Lambda(f, s) with its term breakdown."""
    scal, f = _split(f)
    k = f.weight
    prec = ctx.prec
    with mp.workprec(prec + 24):
        s = mpmath.mpmathify(s)
        for n, res in _pole_set(f).items():
            if abs(s - n) < mpmath.mpf(2) ** (-prec // 2):
                raise NearPoleError(f"s is at a pole of Lambda (s = {n})", n, scal * res)
        t0 = mpmath.mpf(ctx.t0)
        terms = {}
        up = upper_integral(f, s, t0, ctx)
        for name, v in up.items():
            terms[f"f0@t0:{name}"] = v
        for r, comp in enumerate(components(f)):
            w = k - r
            fac = mpmath.expjpi(mpmath.mpf(w) / 2) * comp.scalar.to_complex()
            if comp.form.is_zero():
                continue
            low = upper_integral(comp.form, w - s, 1 / t0, ctx)
            for name, v in low.items():
                terms[f"f{r}@1/t0:{name}"] = fac * v
        lam = scal * mpmath.fsum(terms.values())
        terms = {key: scal * v for key, v in terms.items()}
        L = _l_from_lambda(s, lam)
        return LValueReport(s, +lam, L, terms, float(mpmath.mpf(2) ** (-prec + 24)), float(t0))


def _l_from_lambda(s, lam):
    return mpmath.power(2 * mp.pi, s) * mpmath.rgamma(s) * lam


def dirichlet_l(f, s, ctx: LContext):
    """L(f, s) = (2 pi)^s / Gamma(s) Lambda(f, s), with limits at the poles of Gamma."""
    scal, g = _split(f)
    with mp.workprec(ctx.prec + 24):
        s = mpmath.mpmathify(s)
        n = mpmath.nint(mpmath.re(s))
        at_int = mpmath.im(s) == 0 and abs(s - n) < mpmath.mpf(2) ** (-ctx.prec // 2)
        if at_int and n <= 0:
            n = int(n)
            poles = _pole_set(g)
            if n in poles:
                # Lambda ~ R / (s - n) and 1/Gamma(s) ~ (-1)^n (-n)! (s - n)
                return scal * mpmath.power(2 * mp.pi, n) * (-1) ** n * mpmath.factorial(-n) * poles[n]
            return mpmath.mpc(0)
        return lambda_value(f, s, ctx).L


def residue(f, n: int, ctx: LContext | None = None):
    """Residue of Lambda(f, s) at s = n from the Fourier constant terms."""
    scal, g = _split(f)
    k, p = g.weight, g.depth
    if not (n == 0 or k - p <= n <= k):
        raise NotAPoleError(f"s = {n} is not among the possible poles 0, {k - p}..{k}")
    return scal * _pole_set(g).get(n, mpmath.mpc(0))


def pole_locations(f) -> dict:
    """Poles of Lambda(f, s) with their closed-form residues."""
    scal, g = _split(f)
    return {n: scal * r for n, r in _pole_set(g).items()}


def residue_by_contour(f, n: int, ctx: LContext, radius=0.25, nodes: int = 32):
    """Residue of Lambda at s = n as the mean of (s - n) Lambda(s) over a circle."""
    with mp.workprec(ctx.prec + 24):
        acc = mpmath.mpc(0)
        for l in range(nodes):
            u = radius * mpmath.expjpi(mpmath.mpf(2 * l) / nodes)
            acc += u * lambda_value(f, n + u, ctx).lam
        return acc / nodes


# ---------------------------------------------------------------------------
# identities

def verify_functional_equation(f: QuasiForm, samples, ctx: LContext, m: int = 0):
    """max |Lambda(f_m, s) - sum_r i^(k-2m-r) C(m+r, r) Lambda(f_{m+r}, k-2m-r-s)|."""
    comps = components(f)
    k, p = f.weight, f.depth
    worst = mpmath.mpf(0)
    for s in samples:
        lhs = lambda_value(comps[m], s, ctx).lam
        rhs = mpmath.mpc(0)
        for r in range(p - m + 1):
            e = k - 2 * m - r
            rhs += mpmath.expjpi(mpmath.mpf(e) / 2) * comb(m + r, r) \
                * lambda_value(comps[m + r], e - s, ctx).lam
        worst = max(worst, abs(lhs - rhs))
    return worst


def verify_shift(f: QuasiForm, l: int, samples, ctx: LContext):
    """Residuals of Lambda(D^l f, s) = (s-l)_l (2 pi)^-l Lambda(f, s-l) and L(D^l f, s) = L(f, s-l)."""
    g = d_power(f, l)
    worst_lam = mpmath.mpf(0)
    worst_l = mpmath.mpf(0)
    for s in samples:
        s = mpmath.mpmathify(s)
        lhs = lambda_value(g, s, ctx)
        rhs = lambda_value(f, s - l, ctx)
        pred = rising(s - l, l) / (2 * mp.pi) ** l * rhs.lam
        worst_lam = max(worst_lam, abs(lhs.lam - pred))
        worst_l = max(worst_l, abs(lhs.L - rhs.L))
    return worst_lam, worst_l
