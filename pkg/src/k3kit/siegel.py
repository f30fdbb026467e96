"""Siegel theta constants with characteristics, chi_g^8, Upsilon_g, Petersson norms.

Characteristics are stored as bit tuples: bit 1 means the entry 1/2.
Double precision by default; ``precision="high"`` (or K3KIT_PRECISION=high)
switches the lattice sums to mpmath.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass

import mpmath
import numpy as np

from . import kernels

MAX_GENUS = 5
MAX_POINTS = 20_000_000


class ThetaError(ValueError):
    pass


@dataclass(frozen=True)
class ThetaChar:
    a: tuple
    b: tuple

    @property
    def genus(self):
        return len(self.a)

    @property
    def is_even(self):
        return sum(x & y for x, y in zip(self.a, self.b)) % 2 == 0

    def halves(self):
        return np.array(self.a, dtype=float) / 2, np.array(self.b, dtype=float) / 2

    @classmethod
    def parse(cls, text):
        """'a,b' with a and b bit strings, e.g. '10,01'."""
        a, b = text.split(",")
        if len(a) != len(b) or set(a + b) - {"0", "1"}:
            raise ThetaError(f"bad characteristic {text!r}")
        return cls(tuple(int(c) for c in a), tuple(int(c) for c in b))

    def __str__(self):
        return "".join(map(str, self.a)) + "," + "".join(map(str, self.b))


def count_even_characteristics(g):
    if g < 0:
        raise ThetaError("genus must be nonnegative")
    return 1 if g == 0 else 2 ** (g - 1) * (2**g + 1)


def even_characteristics(g):
    """All even characteristics in genus g; genus 0 has the single empty one."""
    if g < 0:
        raise ThetaError("genus must be nonnegative")
    out = []
    for a in itertools.product((0, 1), repeat=g):
        for b in itertools.product((0, 1), repeat=g):
            ch = ThetaChar(a, b)
            if ch.is_even:
                out.append(ch)
    return out


class SiegelPoint:
    """A point of the Siegel upper half space: symmetric with positive definite imaginary part."""

    def __init__(self, omega, margin=1e-12):
        om = np.atleast_2d(np.array(omega, dtype=complex))
        if om.size == 0:
            om = np.zeros((0, 0), dtype=complex)
        if om.shape[0] != om.shape[1]:
            raise ThetaError("period matrix must be square")
        if om.size and not np.allclose(om, om.T, atol=1e-13, rtol=0):
            raise ThetaError("period matrix must be symmetric")
        self.omega = (om + om.T) / 2
        self.g = om.shape[0]
        y = self.omega.imag
        if self.g:
            try:
                np.linalg.cholesky(y - margin * np.eye(self.g))
            except np.linalg.LinAlgError as exc:
                raise ThetaError("imaginary part is not positive definite") from exc
            self.lambda_min = float(np.linalg.eigvalsh(y).min())
        else:
            self.lambda_min = math.inf

    @property
    def x(self):
        return self.omega.real

    @property
    def y(self):
        return self.omega.imag

    def det_im(self):
        return float(np.linalg.det(self.y)) if self.g else 1.0

    # generators of Sp_2g(Z)
    def translate(self, B):
        B = np.array(B)
        if not np.array_equal(B, B.T) or not np.array_equal(B, np.round(B)):
            raise ThetaError("translation needs an integral symmetric matrix")
        return SiegelPoint(self.omega + B)

    def invert(self):
        return SiegelPoint(-np.linalg.inv(self.omega))

    def rotate(self, A):
        A = np.array(A)
        if abs(abs(round(np.linalg.det(A))) - 1) > 1e-9 or not np.array_equal(A, np.round(A)):
            raise ThetaError("rotation needs a unimodular integral matrix")
        return SiegelPoint(A @ self.omega @ A.T)

    def to_json(self):
        return [[[float(z.real), float(z.imag)] for z in row] for row in self.omega]

    @classmethod
    def from_json(cls, obj):
        return cls([[complex(re, im) for re, im in row] for row in obj])


def _as_point(omega):
    return omega if isinstance(omega, SiegelPoint) else SiegelPoint(omega)


def _high(precision):
    precision = precision or os.environ.get("K3KIT_PRECISION", "double")
    if precision not in ("double", "high"):
        raise ThetaError(f"precision must be 'double' or 'high', got {precision!r}")
    return precision == "high"


@dataclass
class ThetaValue:
    value: complex
    tail_bound: float
    points: int
    cutoff: float


def _radius(pt: SiegelPoint, tol):
    """Cutoff T with every excluded term bounded in total by tol.

    For v'Yv > T: exp(-pi v'Yv) <= exp(-pi T/2) exp(-pi lambda |v|^2/2), and the
    sum of the latter over any shifted lattice is at most (2 + sqrt(2/lambda))^g.
    """
    g = pt.g
    lam = pt.lambda_min
    factor = (2 + math.sqrt(2 / lam)) ** g
    T = 2 * (math.log(factor) - math.log(tol)) / math.pi
    return max(T, 1.0), factor


def _box(pt, a, T):
    yinv = np.linalg.inv(pt.y)
    half = np.sqrt(np.maximum(T * np.diag(yinv), 0))
    lo = np.floor(-half - a).astype(int)
    hi = np.ceil(half - a).astype(int)
    return lo, hi


def theta_constant(ch: ThetaChar, omega, tol=1e-14, precision=None, backend=None) -> ThetaValue:
    """theta[a,b](Omega) = sum_n exp(pi i (n+a)'Omega(n+a) + 2 pi i (n+a)'b) with a tail bound."""
    pt = _as_point(omega)
    if ch.genus != pt.g:
        raise ThetaError("characteristic and period matrix have different genus")
    if pt.g > MAX_GENUS:
        raise ThetaError(f"evaluation is limited to genus <= {MAX_GENUS}")
    if tol <= 0:
        raise ThetaError("tolerance must be positive")
    if pt.g == 0:
        return ThetaValue(1.0 + 0j, 0.0, 1, 0.0)
    a, b = ch.halves()
    T, factor = _radius(pt, tol)
    lo, hi = _box(pt, a, T)
    points = int(np.prod(hi - lo + 1))
    if points > MAX_POINTS:
        raise ThetaError(f"tail bound {tol} needs {points} lattice points; raise tol or Im(Omega)")
    bound = math.exp(-math.pi * T / 2) * factor
    if _high(precision):
        value, count = _theta_mp(pt, a, b, lo, hi, T)
    else:
        re, im, count = kernels.theta_box(pt.x, pt.y, a, b, lo, hi, T, backend=backend)
        value = complex(re, im)
    return ThetaValue(value, bound, count, T)


def _theta_mp(pt, a, b, lo, hi, T):
    om = [[mpmath.mpc(z.real, z.imag) for z in row] for row in pt.omega]
    y = pt.y
    total = mpmath.mpc(0)
    count = 0
    g = pt.g
    for n in itertools.product(*[range(lo[i], hi[i] + 1) for i in range(g)]):
        v = [n[i] + a[i] for i in range(g)]
        if float(np.dot(v, y @ v)) > T:
            continue
        quad = mpmath.fsum(v[i] * om[i][j] * v[j] for i in range(g) for j in range(g))
        lin = mpmath.fsum(v[i] * b[i] for i in range(g))
        total += mpmath.exp(mpmath.pi * 1j * quad + 2 * mpmath.pi * 1j * lin)
        count += 1
    return complex(total), count


@dataclass
class ThetaProduct:
    value: complex
    error: float
    thetas: dict

    def to_json(self):
        return {"value": [self.value.real, self.value.imag], "error": self.error}


def all_thetas(omega, tol=1e-14, precision=None, backend=None):
    pt = _as_point(omega)
    if pt.g > 4:
        raise ThetaError("products over characteristics are limited to genus <= 4")
    return {ch: theta_constant(ch, pt, tol, precision, backend) for ch in even_characteristics(pt.g)}


def _eighth_powers(thetas):
    vals = np.array([t.value for t in thetas.values()], dtype=complex)
    errs = np.array([t.tail_bound for t in thetas.values()])
    p8 = vals**8
    # |(t + e)^8 - t^8| <= (|t| + e)^8 - |t|^8
    e8 = (np.abs(vals) + errs) ** 8 - np.abs(vals) ** 8
    return p8, e8


def chi8(omega, tol=1e-14, precision=None, thetas=None) -> ThetaProduct:
    """Product of theta^8 over the even characteristics."""
    thetas = thetas if thetas is not None else all_thetas(omega, tol, precision)
    p8, e8 = _eighth_powers(thetas)
    value = complex(np.prod(p8)) if len(p8) else 1.0 + 0j
    upper = float(np.prod(np.abs(p8) + e8)) if len(p8) else 1.0
    return ThetaProduct(value, upper - abs(value), thetas)


def upsilon(omega, tol=1e-14, precision=None, thetas=None) -> ThetaProduct:
    """Sum over characteristics of the product of the other theta^8 (no division)."""
    thetas = thetas if thetas is not None else all_thetas(omega, tol, precision)
    p8, e8 = _eighth_powers(thetas)
    n = len(p8)
    if n == 0:
        return ThetaProduct(1.0 + 0j, 0.0, thetas)
    prefix = np.ones(n + 1, dtype=complex)
    suffix = np.ones(n + 1, dtype=complex)
    prefix_abs = np.ones(n + 1)
    suffix_abs = np.ones(n + 1)
    mags = np.abs(p8) + e8
    for i in range(n):
        prefix[i + 1] = prefix[i] * p8[i]
        prefix_abs[i + 1] = prefix_abs[i] * mags[i]
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] * p8[i]
        suffix_abs[i] = suffix_abs[i + 1] * mags[i]
    terms = prefix[:n] * suffix[1:]
    value = complex(terms.sum())
    upper = float((prefix_abs[:n] * suffix_abs[1:]).sum())
    lower = float(np.abs(terms).sum())
    return ThetaProduct(value, upper - lower, thetas)


def chi8_weight(g):
    return 4 * count_even_characteristics(g)


def upsilon_weight(g):
    return 4 * (count_even_characteristics(g) - 1)


def petersson(value, weight, omega):
    """(det Im Omega)^weight |value|^2."""
    pt = _as_point(omega)
    if value == 0:
        return 0.0
    return pt.det_im() ** weight * abs(value) ** 2


def log_petersson(value, weight, omega):
    """Logarithm of the Petersson norm; stays finite where the norm under- or overflows."""
    pt = _as_point(omega)
    if value == 0:
        return -math.inf
    return weight * math.log(pt.det_im()) + 2 * math.log(abs(value))


@dataclass
class ProbeResult:
    status: str
    vanishing: list
    chi: complex
    upsilon: complex
    consistent: bool

    def to_json(self):
        return {
            "status": self.status,
            "vanishing": [str(c) for c in self.vanishing],
            "chi8": [self.chi.real, self.chi.imag],
            "upsilon": [self.upsilon.real, self.upsilon.imag],
            "consistent": self.consistent,
        }


def classify_vanishing(values, tol):
    """'none', 'one', 'at_least_two' or 'inconclusive' from a map char -> |theta|."""
    small = [c for c, v in values.items() if v < tol]
    marginal = [c for c, v in values.items() if tol <= v < 10 * tol]
    if marginal:
        return "inconclusive", small
    return ("none", "one", "at_least_two")[min(len(small), 2)], small


def two_vanish_probe(omega, tol=1e-8, precision=None) -> ProbeResult:
    """Count vanishing even theta constants and cross-check against chi8 and Upsilon.

    With m vanishing constants: m = 0 means chi8 != 0; m = 1 means chi8 ~ 0
    and Upsilon equals the product of the other theta^8; m >= 2 means both ~ 0.
    """
    pt = _as_point(omega)
    thetas = all_thetas(pt, min(tol, 1e-14) / 10, precision)
    status, small = classify_vanishing({c: abs(t.value) for c, t in thetas.items()}, tol)
    c = chi8(pt, thetas=thetas)
    u = upsilon(pt, thetas=thetas)
    p8 = {ch: t.value**8 for ch, t in thetas.items()}
    others = float(np.prod([abs(v) for ch, v in p8.items() if ch not in small])) if p8 else 1.0
    chi_small = abs(c.value) <= (tol**8) * others * 2 + c.error
    if status == "none":
        consistent = not chi_small
    elif status == "one":
        rest = complex(np.prod([v for ch, v in p8.items() if ch not in small]))
        consistent = chi_small and abs(u.value - rest) <= 1e-6 * abs(rest) + u.error + tol**8 * others
    elif status == "at_least_two":
        consistent = chi_small and abs(u.value) <= len(p8) * tol**8 * others * 2 + u.error
    else:
        consistent = True
    return ProbeResult(status, small, c.value, u.value, consistent)


# --- the bosonization constant ----------------------------------------------------


def zeta_prime_minus_one(dps=30):
    with mpmath.workdps(dps):
        return mpmath.zeta(-1, derivative=1)


def bosonization_constant(g, precision=None):
    """(4 pi)^-g exp(6(1-g)(2 zeta'(-1) + zeta(-1))); exactly 1/(4 pi) at g = 1."""
    if g < 0:
        raise ThetaError("genus must be nonnegative")
    if _high(precision):
        with mpmath.workdps(40):
            expo = 6 * (1 - g) * (2 * zeta_prime_minus_one(40) + mpmath.zeta(-1))
            return (4 * mpmath.pi) ** (-g) * mpmath.exp(expo)
    if g == 1:
        return 1 / (4 * math.pi)
    expo = 6 * (1 - g) * (2 * float(zeta_prime_minus_one()) - 1 / 12)
    return (4 * math.pi) ** (-g) * math.exp(expo)
