"""Rankin-Cohen brackets, Cohen-Kuznetsov series and the Lanphier-El Gradechi basis change."""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from math import factorial

from .errors import NotModularError, QMFormsError
from .forms import (AlmostHolo, QuasiForm, binom, d, d_power, decompose,
                    maass_shimura, qexp, serre)
from .qseries import QSeries, d_operator, delta_series, eisenstein

__all__ = [
    "InapplicableParametersError",
    "rc_bracket", "rc_bracket_quasi", "serre_rc_bracket", "rc_bracket_series",
    "CKSeries", "ck_series",
    "lanphier_c", "lanphier_b",
    "ProductDecomposition", "product_decomposition",
    "monomial_basis_solve",
]


class InapplicableParametersError(QMFormsError, ValueError):
    pass


def _binom_sum(f: QuasiForm, g: QuasiForm, n: int, a: int, b: int, op) -> QuasiForm:
    """sum_j (-1)^j C(n+a-1, j) C(n+b-1, n-j) op^{n-j} f op^j g."""
    fpow = [f]
    gpow = [g]
    for _ in range(n):
        fpow.append(op(fpow[-1]))
        gpow.append(op(gpow[-1]))
    total = QuasiForm(f.weight + g.weight + 2 * n, [])
    for j in range(n + 1):
        c = binom(n + a - 1, j) * binom(n + b - 1, n - j)
        if c:
            total = total + (fpow[n - j] * gpow[j]).scale(-c if j % 2 else c)
    return total


def rc_bracket(f: QuasiForm, g: QuasiForm, n: int) -> QuasiForm:
    """n-th Rankin-Cohen bracket of two meromorphic modular forms."""
    if f.depth or g.depth:
        raise NotModularError("rc_bracket needs depth-0 inputs; use rc_bracket_quasi")
    if n < 0:
        raise ValueError("bracket index must be >= 0")
    out = _binom_sum(f, g, n, f.weight, g.weight, d)
    if out.depth:
        raise ArithmeticError("bracket failed to be modular")
    return out


def rc_bracket_quasi(f: QuasiForm, g: QuasiForm, n: int) -> QuasiForm:
    """Bracket of quasi-modular forms with binomials shifted by the depths."""
    return _binom_sum(f, g, n, f.weight + f.depth, g.weight + g.depth, d)


def serre_rc_bracket(f: QuasiForm, g: QuasiForm, n: int) -> QuasiForm:
    """Bracket built from Serre derivatives, each at the input's declared depth."""
    s, t = f.depth, g.depth
    fpow, gpow = [f], [g]
    for _ in range(n):
        fpow.append(serre(fpow[-1], s))
        gpow.append(serre(gpow[-1], t))
    total = QuasiForm(f.weight + g.weight + 2 * n, [])
    for j in range(n + 1):
        c = binom(n + f.weight - 1, j) * binom(n + g.weight - 1, n - j)
        if c:
            total = total + (fpow[n - j] * gpow[j]).scale(-c if j % 2 else c)
    return total


def rc_bracket_series(fs: QSeries, gs: QSeries, k: int, l: int, n: int) -> QSeries:
    """The bracket computed on q-expansions alone (independent of the form algebra)."""
    fp, gp = [fs], [gs]
    for _ in range(n):
        fp.append(d_operator(fp[-1]))
        gp.append(d_operator(gp[-1]))
    total = None
    for j in range(n + 1):
        c = binom(n + k - 1, j) * binom(n + l - 1, n - j)
        if c:
            term = (fp[n - j] * gp[j]).scale(-c if j % 2 else c)
            total = term if total is None else total + term
    if total is None:
        N = min(fs.trunc + gs.n_min, gs.trunc + fs.n_min)
        return QSeries(N + 1, [], N)
    return total


# ---------------------------------------------------------------------------
# Cohen-Kuznetsov series

@dataclass
class CKSeries:
    """Truncated generating series sum_n c_n T^n with form-valued coefficients."""

    variant: str
    operator: str
    weight: int
    t_order: int
    coeffs: dict = dc_field(default_factory=dict)

    def coeff(self, n: int):
        return self.coeffs.get(n)

    @property
    def min_power(self):
        return min(self.coeffs, default=None)

    def q_expansions(self, N: int) -> dict:
        if self.operator != "D":
            raise InapplicableParametersError("q-expansions exist only for the D variant")
        return {n: qexp(c, N) for n, c in self.coeffs.items()}

    def evaluate(self, tau, T, prec: int = 256):
        import mpmath
        from .forms import evaluate
        total = mpmath.mpc(0)
        for n, c in self.coeffs.items():
            v = c.evaluate(tau, prec) if isinstance(c, AlmostHolo) else evaluate(c, tau, prec)
            total += v * mpmath.mpc(T) ** n
        return total

    def negate_t(self) -> "CKSeries":
        """Substitute T -> -T."""
        out = {}
        for n, c in self.coeffs.items():
            out[n] = c if n % 2 == 0 else _neg(c)
        return CKSeries(self.variant, self.operator, self.weight, self.t_order, out)

    def __mul__(self, other: "CKSeries") -> dict:
        """Coefficientwise Cauchy product (D variant), valid to the smaller order."""
        order = min(self.t_order, other.t_order)
        out: dict[int, QuasiForm] = {}
        for a, x in self.coeffs.items():
            for b, y in other.coeffs.items():
                if a + b <= order:
                    out[a + b] = out[a + b] + x * y if a + b in out else x * y
        return out


def _neg(c):
    if isinstance(c, AlmostHolo):
        return AlmostHolo(c.weight, {a: -h for a, h in c.terms.items()})
    return -c


def ck_series(f: QuasiForm, variant: str = "plus", operator: str = "D", t_order: int = 10) -> CKSeries:
    """Cohen-Kuznetsov series of a modular form up to T^t_order."""
    if f.depth:
        raise NotModularError("Cohen-Kuznetsov series need a modular input")
    if variant not in ("plus", "minus") or operator not in ("D", "delta"):
        raise ValueError("variant must be plus/minus and operator D/delta")
    k = f.weight
    coeffs = {}

    def deriv(n):
        if operator == "D":
            return d_power(f, n)
        return maass_shimura(f, n)

    def scaled(x, c):
        if isinstance(x, AlmostHolo):
            return AlmostHolo(x.weight, {a: h.scale(c) for a, h in x.terms.items()})
        return x.scale(c)

    if variant == "minus":
        if k <= 0:
            for n in range(0, min(-k, t_order) + 1):
                c = Fraction((-1) ** ((n + k) % 2) * factorial(-k - n), factorial(n))
                coeffs[n] = scaled(deriv(n), c)
    else:
        for n in range(max(0, 1 - k), t_order + 1):
            c = Fraction(1, factorial(n) * factorial(n + k - 1))
            coeffs[n] = scaled(deriv(n), c)
    return CKSeries(variant, operator, k, t_order, coeffs)


# ---------------------------------------------------------------------------
# Lanphier-El Gradechi coefficients

def lanphier_c(i: int, j: int, k: int, l: int, n: int) -> Fraction:
    total = Fraction(0)
    for r in range(i + 1):
        term = binom(n - i, n - j - r) * binom(k + i - 1, i - r) * binom(l + i - 1, r)
        total += -term if r % 2 else term
    return total


def lanphier_b(i: int, j: int, k: int, l: int, n: int) -> Fraction:
    den = binom(n, i) * binom(k + l + n + j - 1, n - j) * binom(k + l + 2 * j - 2, j)
    if den == 0:
        raise InapplicableParametersError(
            f"b coefficient undefined for (i,j,k,l,n)=({i},{j},{k},{l},{n})")
    total = Fraction(0)
    for r in range(j + 1):
        term = binom(j, r) * binom(k + n - i - 1, n - i - r) * binom(l + i - 1, r + i - j)
        total += -term if r % 2 else term
    return binom(n, j) * total / den


# ---------------------------------------------------------------------------
# products as derivatives of brackets

@dataclass
class ProductDecomposition:
    """f g = modular + sum_m D^m derivative[m]."""

    weight: int
    modular: QuasiForm
    derivative: dict = dc_field(default_factory=dict)

    def is_cusp(self, m: int) -> bool:
        form = self.derivative[m]
        if form.is_zero():
            return True
        s = qexp(form, 0)
        return s[0] == 0

    def resynthesize(self) -> QuasiForm:
        total = self.modular
        for m, M in self.derivative.items():
            total = total + d_power(M, m)
        return total

    def to_json(self) -> dict:
        return {
            "weight": self.weight,
            "modular": str(self.modular),
            "derivatives": [{"order": m, "form": str(M), "cusp": self.is_cusp(m)}
                            for m, M in sorted(self.derivative.items())],
        }


def _cone(f: QuasiForm) -> str:
    if f.weight == 0 and f.depth == 0 and (f.is_zero() or f.coeffs[0].numer.is_ground):
        return "both"
    if f.weight > 0 and 2 * f.depth <= f.weight - 2:
        return "plus"
    if f.weight <= 0:
        return "minus"
    return "none"


def product_decomposition(f: QuasiForm, g: QuasiForm) -> ProductDecomposition:
    """Rewrite f g as a modular form plus derivatives of modular forms via brackets."""
    cf, cg = _cone(f), _cone(g)
    if "none" in (cf, cg) or (cf != cg and "both" not in (cf, cg)):
        raise InapplicableParametersError("both factors must lie in the same cone")
    w = f.weight + g.weight
    if cf == "both" or cg == "both":
        return _scalar_product(f, g)

    def pieces(h):
        dec = decompose(h)
        if dec.middle:
            raise InapplicableParametersError("factor has a middle-block component")
        return dec.first + dec.third

    modular = QuasiForm(w, [])
    deriv: dict[int, QuasiForm] = {}
    for a, F in pieces(f):
        for b, G in pieces(g):
            n = a + b
            for j in range(n + 1):
                # b is stated for the opposite sign convention of the bracket
                c = lanphier_b(b, j, F.weight, G.weight, n) * (-1) ** j
                if not c:
                    continue
                br = rc_bracket(F, G, j).scale(c)
                m = n - j
                if m == 0:
                    modular = modular + br
                else:
                    deriv[m] = deriv[m] + br if m in deriv else br
    deriv = {m: M for m, M in deriv.items() if not M.is_zero()}
    return ProductDecomposition(w, modular, deriv)


def _scalar_product(f, g):
    # one factor is a constant, so the other's own decomposition already has the right shape
    c, h = (f, g) if _cone(f) == "both" else (g, f)
    dec = decompose(h)
    modular = QuasiForm(h.weight, [])
    deriv = {}
    for l, F in dec.first + dec.third:
        F = F * c
        if l == 0:
            modular = modular + F
        else:
            deriv[l] = deriv[l] + F if l in deriv else F
    return ProductDecomposition(h.weight, modular, deriv)


# ---------------------------------------------------------------------------
# membership in the span of E4^a E6^b Delta^c

def monomial_basis_solve(series: QSeries, weight: int):
    """Express a q-series in the basis {Delta^c E4^a E6^e : e in (0,1)} of weight ``weight``.

    The basis element for each c is unique and has valuation c, so the system
    is triangular.  Returns ``(coefficients, residual)`` where ``residual``
    is the leftover series (zero exactly when the input lies in the span).
    """
    N = series.trunc
    rem = series
    coeffs = {}
    c = series.n_min
    c_max = weight // 12 if weight >= 0 else -1
    c = min(c, c_max + 1)
    while c <= c_max and not rem.is_zero() and c <= N:
        wp = weight - 12 * c
        basis = _basis_element(wp, c, N)
        if basis is not None:
            a = rem[c]
            if a:
                coeffs[c] = a
                rem = rem - basis.scale(a)
        c += 1
    return coeffs, rem


def _basis_element(wp: int, c: int, N: int):
    if wp < 0 or wp == 2 or wp % 2:
        return None
    e = 0 if wp % 4 == 0 else 1
    a = (wp - 6 * e) // 4
    M = N - c + 2 * max(0, -c) + 2
    s = eisenstein(4, M) ** a if a else QSeries.one(M)
    if e:
        s = s * eisenstein(6, M)
    dl = delta_series(M + 2)
    s = s * (dl ** c if c >= 0 else dl.invert() ** (-c))
    return s.truncate(N)
