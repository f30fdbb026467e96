"""Truncated q-expansions with rational exponents and Gaussian-rational coefficients.

A series is stored as ``q^shift * sum_j c_j q^(j/step)`` with integer
numerator lists for the real and imaginary parts over one common
denominator. Everything is exact; ``evaluate`` is the only numeric step.
"""

from __future__ import annotations

import math
import os
from fractions import Fraction
from math import gcd

import numpy as np

from . import kernels

MAX_DENOM = 48
DEFAULT_ORDER = 32


class SeriesError(ValueError):
    pass


def _lcm(*xs):
    out = 1
    for x in xs:
        out = out * x // gcd(out, x)
    return out


def _ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


class GaussianRational:
    """An element re + i*im of Q(i)."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def coerce(cls, x):
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, complex):
            return cls(Fraction(x.real), Fraction(x.imag))
        return cls(Fraction(x))

    def __add__(self, o):
        o = GaussianRational.coerce(o)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, o):
        return self + (-GaussianRational.coerce(o))

    def __rsub__(self, o):
        return GaussianRational.coerce(o) - self

    def __mul__(self, o):
        o = GaussianRational.coerce(o)
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = GaussianRational.coerce(o)
        n = o.re * o.re + o.im * o.im
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(i)")
        return self * GaussianRational(o.re / n, -o.im / n)

    def __eq__(self, o):
        try:
            o = GaussianRational.coerce(o)
        except (TypeError, ValueError):
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def is_real(self):
        return self.im == 0

    def __repr__(self):
        if self.im == 0:
            return str(self.re)
        return f"({self.re}+{self.im}i)"

    def to_json(self):
        return {
            "re": [self.re.numerator, self.re.denominator],
            "im": [self.im.numerator, self.im.denominator],
        }


_I_POWERS = ((1, 0), (0, 1), (-1, 0), (0, -1))


class PuiseuxSeries:
    """Truncated series in q with exponents on a grid shift + (1/step)Z.

    Coefficients are known exactly for all exponents below ``order``.
    """

    __slots__ = ("_shift", "_step", "_re", "_im", "_den", "_prec")

    def __init__(self, shift, step, re, im, den, prec):
        shift = Fraction(shift)
        prec = Fraction(prec)
        step = int(step)
        den = int(den)
        if step <= 0 or den == 0:
            raise SeriesError("step and denominator must be nonzero")
        if den < 0:
            den = -den
            re = [-x for x in re]
            im = None if im is None else [-x for x in im]
        n = max(0, _ceil((prec - shift) * step))
        re = list(re[:n]) + [0] * (n - len(re))
        if im is not None:
            im = list(im[:n]) + [0] * (n - len(im))
            if not any(im):
                im = None
        first = next(
            (j for j in range(n) if re[j] or (im is not None and im[j])),
            None,
        )
        if first is None:
            self._shift, self._step, self._re, self._im = prec, 1, (), None
            self._den, self._prec = 1, prec
            return
        if first:
            shift += Fraction(first, step)
            re = re[first:]
            if im is not None:
                im = im[first:]
        c = step
        for j in range(1, len(re)):
            if c == 1:
                break
            if re[j] or (im is not None and im[j]):
                c = gcd(c, j)
        if c > 1:
            step //= c
            re = re[::c]
            if im is not None:
                im = im[::c]
        d = den
        for x in re:
            if d == 1:
                break
            if x:
                d = gcd(d, x)
        if im is not None:
            for x in im:
                if d == 1:
                    break
                if x:
                    d = gcd(d, x)
        if d > 1:
            den //= d
            re = [x // d for x in re]
            if im is not None:
                im = [x // d for x in im]
        if _lcm(shift.denominator, step) > MAX_DENOM:
            raise SeriesError(f"exponent denominator exceeds {MAX_DENOM}")
        self._shift, self._step, self._re, self._im = shift, step, tuple(re), (
            None if im is None else tuple(im)
        )
        self._den, self._prec = den, prec

    # -- constructors --------------------------------------------------------

    @classmethod
    def zero(cls, order=DEFAULT_ORDER):
        return cls(order, 1, [], None, 1, order)

    @classmethod
    def one(cls, order=DEFAULT_ORDER):
        return cls.monomial(0, 1, order)

    @classmethod
    def monomial(cls, exponent, coeff=1, order=DEFAULT_ORDER):
        c = GaussianRational.coerce(coeff)
        d = _lcm(c.re.denominator, c.im.denominator)
        re = int(c.re * d)
        im = int(c.im * d)
        return cls(exponent, 1, [re], [im] if im else None, d, order)

    @classmethod
    def from_terms(cls, terms, order=DEFAULT_ORDER):
        """Build from a mapping exponent -> coefficient."""
        items = [(Fraction(e), GaussianRational.coerce(c)) for e, c in dict(terms).items()]
        items = [(e, c) for e, c in items if c and e < Fraction(order)]
        if not items:
            return cls.zero(order)
        shift = min(e for e, _ in items)
        step = _lcm(*[(e - shift).denominator for e, _ in items])
        den = _lcm(*[x.denominator for _, c in items for x in (c.re, c.im)])
        n = _ceil((Fraction(order) - shift) * step)
        re = [0] * n
        im = [0] * n
        for e, c in items:
            j = int((e - shift) * step)
            re[j] += int(c.re * den)
            im[j] += int(c.im * den)
        return cls(shift, step, re, im, den, order)

    # -- inspection ----------------------------------------------------------

    @property
    def order(self) -> Fraction:
        return self._prec

    @property
    def valuation(self):
        """Lowest exponent with nonzero coefficient, or None for O(q^order)."""
        return self._shift if self._re else None

    @property
    def denom(self) -> int:
        if not self._re:
            return 1
        return _lcm(self._shift.denominator, self._step)

    def is_zero(self):
        return not self._re

    def is_real(self):
        return self._im is None

    def _coeff_at(self, j):
        re = Fraction(self._re[j], self._den)
        im = Fraction(self._im[j], self._den) if self._im is not None else 0
        return GaussianRational(re, im)

    def terms(self) -> dict:
        """Nonzero coefficients keyed by exponent (as Fraction)."""
        out = {}
        for j in range(len(self._re)):
            if self._re[j] or (self._im is not None and self._im[j]):
                out[self._shift + Fraction(j, self._step)] = self._coeff_at(j)
        return out

    def coefficient(self, exponent) -> GaussianRational:
        e = Fraction(exponent)
        if e >= self._prec:
            raise SeriesError(f"coefficient of q^{e} is beyond the truncation order {self._prec}")
        if not self._re or e < self._shift:
            return GaussianRational(0)
        j = (e - self._shift) * self._step
        if j.denominator != 1 or j >= len(self._re):
            return GaussianRational(0)
        return self._coeff_at(int(j))

    def __getitem__(self, exponent):
        return self.coefficient(exponent)

    def principal_part(self) -> dict:
        return {e: c for e, c in self.terms().items() if e <= 0}

    def common_denominator(self) -> int:
        return self._den

    def integer_coefficients(self):
        """(shift, step, list) when all coefficients are rational integers."""
        if self._im is not None or self._den != 1:
            raise SeriesError("series does not have integral real coefficients")
        return self._shift, self._step, list(self._re)

    def __repr__(self):
        shown = []
        for e, c in list(self.terms().items())[:6]:
            shown.append(f"{c}*q^{e}")
        body = " + ".join(shown) if shown else "0"
        return f"{body} + O(q^{self._prec})"

    def __eq__(self, other):
        if not isinstance(other, PuiseuxSeries):
            return NotImplemented
        return self._prec == other._prec and self.terms() == other.terms()

    def __hash__(self):
        return hash((self._prec, tuple(self.terms().items())))

    # -- arithmetic ----------------------------------------------------------

    def _spread(self, step, shift, n):
        """Numerator lists placed on a finer grid starting at ``shift``."""
        re = [0] * n
        im = [0] * n if self._im is not None else None
        if not self._re:
            return re, im
        f = step // self._step
        off = (self._shift - shift) * step
        assert off.denominator == 1 and step % self._step == 0
        off = int(off)
        for j, x in enumerate(self._re):
            k = off + j * f
            if k >= n:
                break
            re[k] = x
            if im is not None:
                im[k] = self._im[j]
        return re, im

    def truncate(self, order) -> "PuiseuxSeries":
        order = Fraction(order)
        if order > self._prec:
            raise SeriesError("cannot raise the truncation order")
        return PuiseuxSeries(self._shift, self._step, self._re, self._im, self._den, order)

    def __neg__(self):
        im = None if self._im is None else [-x for x in self._im]
        return PuiseuxSeries(self._shift, self._step, [-x for x in self._re], im, self._den, self._prec)

    def __add__(self, other):
        if not isinstance(other, PuiseuxSeries):
            other = PuiseuxSeries.monomial(0, other, self._prec)
        prec = min(self._prec, other._prec)
        if not self._re:
            return other.truncate(prec)
        if not other._re:
            return self.truncate(prec)
        shift = min(self._shift, other._shift)
        step = _lcm(self._step, other._step, (self._shift - other._shift).denominator)
        n = max(0, _ceil((prec - shift) * step))
        den = _lcm(self._den, other._den)
        ra, ia = self._spread(step, shift, n)
        rb, ib = other._spread(step, shift, n)
        fa, fb = den // self._den, den // other._den
        re = [fa * x + fb * y for x, y in zip(ra, rb)]
        if ia is None and ib is None:
            im = None
        else:
            ia = ia or [0] * n
            ib = ib or [0] * n
            im = [fa * x + fb * y for x, y in zip(ia, ib)]
        return PuiseuxSeries(shift, step, re, im, den, prec)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, PuiseuxSeries):
            other = PuiseuxSeries.monomial(0, other, self._prec)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "PuiseuxSeries":
        c = GaussianRational.coerce(c)
        d = _lcm(c.re.denominator, c.im.denominator)
        cr, ci = int(c.re * d), int(c.im * d)
        re = [cr * x for x in self._re]
        im = [ci * x for x in self._re] if ci else None
        if self._im is not None:
            re = [x - ci * y for x, y in zip(re, self._im)]
            extra = [cr * y for y in self._im]
            im = extra if im is None else [x + y for x, y in zip(im, extra)]
        return PuiseuxSeries(self._shift, self._step, re, im, self._den * d, self._prec)

    def shift(self, e) -> "PuiseuxSeries":
        """Multiply by q^e."""
        e = Fraction(e)
        return PuiseuxSeries(self._shift + e, self._step, self._re, self._im, self._den, self._prec + e)

    def __mul__(self, other):
        if not isinstance(other, PuiseuxSeries):
            return self.scale(other)
        prec = min(self._prec + other._shift, other._prec + self._shift)
        shift = self._shift + other._shift
        if not self._re or not other._re:
            return PuiseuxSeries.zero(prec)
        step = _lcm(self._step, other._step)
        n = max(0, _ceil((prec - shift) * step))
        ra, ia = self._spread(step, self._shift, n)
        rb, ib = other._spread(step, other._shift, n)
        re = kernels.convolve(ra, rb, n)
        im = None
        if ia is not None and ib is not None:
            re = [x - y for x, y in zip(re, kernels.convolve(ia, ib, n))]
        if ia is not None:
            im = kernels.convolve(ia, rb, n)
        if ib is not None:
            t = kernels.convolve(ra, ib, n)
            im = t if im is None else [x + y for x, y in zip(im, t)]
        return PuiseuxSeries(shift, step, re, im, self._den * other._den, prec)

    def __rmul__(self, other):
        return self.scale(other)

    def _unit_integral(self):
        """Leading coefficient c and the integer list of self/(c q^v), if integral."""
        if self._im is not None:
            return None
        lead = self._re[0]
        if any(x % lead for x in self._re):
            return None
        return Fraction(lead, self._den), [x // lead for x in self._re]

    def inverse(self) -> "PuiseuxSeries":
        if not self._re:
            raise SeriesError("cannot invert a series with zero leading coefficient")
        rel = self._prec - self._shift
        n = len(self._re)
        unit = self._unit_integral()
        if unit is not None:
            lead, u = unit
            g = _newton_inverse(u, n)
            out = PuiseuxSeries(-self._shift, self._step, g, None, 1, -self._shift + rel)
            return out.scale(1 / lead)
        coeffs = [self._coeff_at(j) for j in range(n)]
        inv0 = GaussianRational(1) / coeffs[0]
        g = [inv0]
        for m in range(1, n):
            s = GaussianRational(0)
            for k in range(1, m + 1):
                if coeffs[k]:
                    s = s + coeffs[k] * g[m - k]
            g.append(-(s * inv0))
        terms = {-self._shift + Fraction(j, self._step): c for j, c in enumerate(g)}
        return PuiseuxSeries.from_terms(terms, -self._shift + rel)

    def __truediv__(self, other):
        if isinstance(other, PuiseuxSeries):
            return self * other.inverse()
        return self.scale(GaussianRational(1) / GaussianRational.coerce(other))

    def __rtruediv__(self, other):
        return self.inverse().scale(other)

    def __pow__(self, p):
        p = int(p)
        if not self._re:
            if p <= 0:
                raise SeriesError("cannot raise a series with zero leading coefficient to a power <= 0")
            return PuiseuxSeries.zero(self._prec * p)
        rel = self._prec - self._shift
        if p == 0:
            return PuiseuxSeries.one(rel)
        unit = self._unit_integral()
        nnz = sum(1 for x in self._re if x)
        if unit is not None and (p < 0 or nnz * 8 < len(self._re)):
            lead, u = unit
            g = _miller_power(u, p, len(self._re))
            out = PuiseuxSeries(p * self._shift, self._step, g, None, 1, p * self._shift + rel)
            return out.scale(lead**p)
        if p < 0:
            return self.inverse() ** (-p)
        result = None
        base = self
        while p:
            if p & 1:
                result = base if result is None else result * base
            p >>= 1
            if p:
                base = base * base
        return result

    # -- substitutions -------------------------------------------------------

    def rescale_variable(self, c) -> "PuiseuxSeries":
        """Substitute q -> q^c for a positive rational c (tau -> c*tau)."""
        c = Fraction(c)
        if c <= 0:
            raise SeriesError("rescaling factor must be positive")
        if not self._re:
            return PuiseuxSeries.zero(self._prec * c)
        spacing = c / self._step
        step, spread = spacing.denominator, spacing.numerator
        n = len(self._re)
        re = [0] * ((n - 1) * spread + 1)
        im = None if self._im is None else [0] * len(re)
        for j in range(n):
            re[j * spread] = self._re[j]
            if im is not None:
                im[j * spread] = self._im[j]
        return PuiseuxSeries(self._shift * c, step, re, im, self._den, self._prec * c)

    def translate(self, t) -> "PuiseuxSeries":
        """Substitute tau -> tau + t; every phase e(exponent*t) must be a power of i."""
        t = Fraction(t)
        re, im = [], []
        src_im = self._im or (0,) * len(self._re)
        for j, (x, y) in enumerate(zip(self._re, src_im)):
            ph = (self._shift + Fraction(j, self._step)) * t * 4
            if (x or y) and ph.denominator != 1:
                raise SeriesError("translation phase is not a fourth root of unity")
            cr, ci = _I_POWERS[int(ph) % 4] if ph.denominator == 1 else (1, 0)
            re.append(cr * x - ci * y)
            im.append(ci * x + cr * y)
        return PuiseuxSeries(self._shift, self._step, re, im, self._den, self._prec)

    def conjugate_coefficients(self) -> "PuiseuxSeries":
        im = None if self._im is None else [-x for x in self._im]
        return PuiseuxSeries(self._shift, self._step, self._re, im, self._den, self._prec)

    def real_part(self) -> "PuiseuxSeries":
        return PuiseuxSeries(self._shift, self._step, self._re, None, self._den, self._prec)

    def imag_part(self) -> "PuiseuxSeries":
        im = self._im or [0] * len(self._re)
        return PuiseuxSeries(self._shift, self._step, im, None, self._den, self._prec)

    def restrict_exponents(self, residue, modulus) -> "PuiseuxSeries":
        """Keep only exponents congruent to ``residue`` modulo ``modulus``."""
        residue, modulus = Fraction(residue), Fraction(modulus)
        keep = {e: c for e, c in self.terms().items() if ((e - residue) / modulus).denominator == 1}
        return PuiseuxSeries.from_terms(keep, self._prec)

    # -- numerics ------------------------------------------------------------

    def evaluate(self, tau, tol=None, precision=None):
        """Numeric value at tau (Im tau > 0) and an estimate of the truncation error.

        The tail estimate extrapolates the geometric decay of the last known
        terms. With ``tol`` set, an estimate above ``tol`` raises SeriesError.
        """
        precision = precision or os.environ.get("K3KIT_PRECISION", "double")
        tau = complex(tau)
        if tau.imag <= 0:
            raise SeriesError("tau must lie in the upper half plane")
        if precision == "high":
            value, mags = self._evaluate_mp(tau)
        else:
            value, mags = self._evaluate_np(tau)
        bound = _tail_estimate(mags, math.exp(-2 * math.pi * tau.imag / self._step))
        if tol is not None and not bound <= tol:
            raise SeriesError(f"truncation error estimate {bound:.3g} exceeds tolerance {tol:.3g}")
        return value, bound

    def _coeff_floats(self):
        den = self._den
        re = np.array([x / den for x in self._re], dtype=float)
        im = np.array([x / den for x in self._im], dtype=float) if self._im is not None else 0.0
        return re + 1j * im

    def _evaluate_np(self, tau):
        if not self._re:
            return 0j, np.zeros(0)
        try:
            c = self._coeff_floats()
        except OverflowError:
            v, m = self._evaluate_mp(tau)
            return v, m
        j = np.arange(len(c))
        expo = float(self._shift) + j / self._step
        w = np.exp(2j * np.pi * expo * tau)
        terms = c * w
        return complex(terms.sum()), np.abs(terms)

    def _evaluate_mp(self, tau):
        import mpmath

        with mpmath.workdps(40):
            if not self._re:
                return 0j, np.zeros(0)
            t = mpmath.mpc(tau.real, tau.imag)
            x = mpmath.exp(2j * mpmath.pi * t / self._step)
            base = mpmath.exp(2j * mpmath.pi * self._shift.numerator * t / self._shift.denominator)
            total = mpmath.mpc(0)
            mags = []
            p = base
            im = self._im or (0,) * len(self._re)
            for a, b in zip(self._re, im):
                term = mpmath.mpc(mpmath.mpf(a) / self._den, mpmath.mpf(b) / self._den) * p
                total += term
                mags.append(float(abs(term)))
                p *= x
            return complex(total), np.array(mags)

    # -- serialisation -------------------------------------------------------

    def to_json(self):
        n = self.denom
        terms = []
        for e, c in self.terms().items():
            d = c.to_json()
            terms.append({"num": int(e * n), "re": d["re"], "im": d["im"]})
        return {"denom": n, "terms": terms, "order": _json_order(self._prec)}

    @classmethod
    def from_json(cls, obj):
        n = int(obj["denom"])
        terms = {}
        for t in obj["terms"]:
            re = Fraction(*t["re"])
            im = Fraction(*t.get("im", [0, 1]))
            terms[Fraction(t["num"], n)] = GaussianRational(re, im)
        order = obj["order"]
        order = Fraction(*order) if isinstance(order, list) else Fraction(order)
        return cls.from_terms(terms, order)


def _json_order(prec: Fraction):
    return int(prec) if prec.denominator == 1 else [prec.numerator, prec.denominator]


def _tail_estimate(mags, ratio_bound):
    mags = np.asarray(mags, dtype=float)
    n = len(mags)
    if n == 0:
        return 0.0
    w = max(4, n // 8)
    if n < 2 * w:
        return float(mags.max()) if n else 0.0
    late = mags[n - w:].max()
    early = mags[n - 2 * w:n - w].max()
    if late == 0.0:
        return 0.0
    if early == 0.0:
        return math.inf
    rho = (late / early) ** (1.0 / w)
    if rho >= 1.0:
        return math.inf
    return float(late * rho / (1.0 - rho))


def _newton_inverse(u, n):
    """Integer list g with (sum u_j x^j)(sum g_j x^j) = 1 mod x^n, given u_0 = 1."""
    g = [1]
    m = 1
    while m < n:
        m = min(2 * m, n)
        ug = kernels.convolve(u[:m], g, m)
        e = [-x for x in ug]
        e[0] += 2
        g = kernels.convolve(g, e, m)
    return g[:n]


def _miller_power(f, alpha, n):
    """Integer coefficients of f^alpha mod x^n for f_0 = 1 (J.C.P. Miller recurrence)."""
    nz = [(k, c) for k, c in enumerate(f[:n]) if c and k]
    g = [1] + [0] * (n - 1)
    a1 = alpha + 1
    for m in range(1, n):
        s = 0
        for k, c in nz:
            if k > m:
                break
            gv = g[m - k]
            if gv:
                s += (a1 * k - m) * c * gv
        q, r = divmod(s, m)
        if r:
            raise SeriesError("power recurrence produced a non-integral coefficient")
        g[m] = q
    return g


# --- special series -----------------------------------------------------------


def _euler_product(n):
    """Coefficients of prod (1 - x^k) below x^n via the pentagonal theorem."""
    c = [0] * n
    k = 0
    while True:
        done = True
        for m in ((k, k * (3 * k - 1) // 2), (-k, k * (3 * k + 1) // 2)) if k else ((0, 0),):
            e = m[1]
            if e < n:
                c[e] += -1 if k % 2 else 1
                done = False
        if done and k:
            break
        k += 1
    return c


def eta_power(scale: int, power: int, order=DEFAULT_ORDER) -> PuiseuxSeries:
    """eta(scale*tau)^power truncated below q^order."""
    scale = int(scale)
    if scale <= 0:
        raise SeriesError("scale must be a positive integer")
    lead = Fraction(scale * power, 24)
    order = Fraction(order)
    if power == 0:
        return PuiseuxSeries.one(order)
    n = max(1, _ceil((order - lead) / scale))
    g = _miller_power(_euler_product(n), power, n)
    base = PuiseuxSeries(0, 1, g, None, 1, n)
    return base.rescale_variable(scale).shift(lead).truncate(order)


def theta_a1(eps: int, order=DEFAULT_ORDER) -> PuiseuxSeries:
    """Theta series of A1+ (eps = 0) or of its shifted coset A1+ + 1/2 (eps = 1)."""
    order = Fraction(order)
    if eps not in (0, 1):
        raise SeriesError("eps must be 0 or 1")
    terms = {}
    m = Fraction(eps, 2)
    while m * m < order:
        terms[m * m] = terms.get(m * m, 0) + (1 if m == 0 else 2)
        m += 1
    return PuiseuxSeries.from_terms(terms, order)


def sigma(k, n):
    return sum(d**k for d in range(1, n + 1) if n % d == 0)


def eisenstein_e4(order=DEFAULT_ORDER) -> PuiseuxSeries:
    order = Fraction(order)
    n = max(1, _ceil(order))
    coeffs = [1] + [240 * sigma(3, m) for m in range(1, n)]
    return PuiseuxSeries(0, 1, coeffs, None, 1, order)


def substitute_quarter(series: PuiseuxSeries, k: int) -> PuiseuxSeries:
    """f((tau + k)/4) for f with integral exponents: a_n q^n -> a_n i^(kn) q^(n/4)."""
    if series.denom != 1:
        raise SeriesError("substitute_quarter needs integral exponents")
    return series.rescale_variable(Fraction(1, 4)).translate(k)


def eta_quotient(factors, order=DEFAULT_ORDER) -> PuiseuxSeries:
    """prod eta(s*tau)^p over (s, p) pairs, truncated below q^order."""
    order = Fraction(order)
    leads = [Fraction(s * p, 24) for s, p in factors]
    total = sum(leads, Fraction(0))
    out = PuiseuxSeries.one(order - total)
    for (s, p), lead in zip(factors, leads):
        need = order - (total - lead)
        out = out * eta_power(s, p, need)
    return out.truncate(order)
