"""Vector-valued forms over C[A_Lambda]: F_Lambda, f_Lambda, principal parts, modularity.

Weil representation convention (fixed by the numeric checks in the tests):

    rho(T) e_x = e(q(x)/2) e_x
    rho(S) e_x = e((b- - b+)/8) / sqrt|A| * sum_y e(-b(x, y)) e_y
    F(-1/tau) = sqrt(tau)^(2k) rho(S) F(tau),  principal branch of sqrt.

Here q takes values mod 2 (q(x) = x^2), so component x carries exponents in
q(x)/2 + Z.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .lattice import (
    DiscriminantForm,
    Lattice,
    discriminant_form,
    invariants,
    lattice_from_json,
)
from .qseries import (
    PuiseuxSeries,
    eisenstein_e4,
    eta_power,
    eta_quotient,
    substitute_quarter,
    theta_a1,
)


class FormError(ValueError):
    pass


@dataclass
class VectorValuedForm:
    """A family of q-series indexed by the cosets of A_Lambda."""

    lattice: Lattice
    df: DiscriminantForm
    components: dict
    weight: Fraction
    label: str = ""
    notes: list = field(default_factory=list)

    def __post_init__(self):
        missing = [x for x in self.df.cosets() if x not in self.components]
        if missing:
            raise FormError(f"missing components for cosets {missing[:4]}")

    @property
    def order(self):
        return min(s.order for s in self.components.values())

    def component(self, x) -> PuiseuxSeries:
        return self.components[x]

    def __add__(self, other):
        if self.df != other.df or self.weight != other.weight:
            raise FormError("forms live on different spaces")
        comps = _shared_map(self.components, lambda x: self.components[x] + other.components[x])
        return VectorValuedForm(self.lattice, self.df, comps, self.weight, f"{self.label}+{other.label}")

    def scale(self, c):
        comps = _shared_map(self.components, lambda x: self.components[x].scale(c))
        return VectorValuedForm(self.lattice, self.df, comps, self.weight, f"{c}*{self.label}")

    def is_zero(self):
        return all(s.is_zero() for s in self.components.values())

    def to_json(self):
        return {
            "lattice": self.lattice.to_json(),
            "weight": [self.weight.numerator, self.weight.denominator],
            "components": [
                {"coset": self.df.bits(x), "series": self.components[x].to_json()}
                for x in self.df.cosets()
            ],
        }

    @classmethod
    def from_json(cls, obj):
        lat = lattice_from_json(obj["lattice"])
        df = discriminant_form(lat)
        comps = {
            df.from_bits(c["coset"]): PuiseuxSeries.from_json(c["series"]) for c in obj["components"]
        }
        return cls(lat, df, comps, Fraction(*obj["weight"]))


def _shared_map(components, fn):
    """Apply fn per coset but evaluate it once per distinct pair of inputs."""
    cache = {}
    out = {}
    for x, s in components.items():
        key = id(s)
        if key not in cache:
            cache[key] = fn(x)
        out[x] = cache[key]
    return out


# --- the Weil representation ---------------------------------------------------


class WeilRep:
    """rho_L on C[A_L] for a 2-elementary discriminant form."""

    def __init__(self, df: DiscriminantForm):
        self.df = df
        bp, bm = df.signature
        self.prefactor = cmath.exp(2j * math.pi * (bm - bp) / 8) / math.sqrt(df.size)
        self.t_phases = np.array([cmath.exp(1j * math.pi * df.q4[x] / 4) for x in df.cosets()])
        rows = df.parity_rows()
        # y -> B y as a bitmask, so (-1)^(2 b(x, y)) = (-1)^popcount(x & By)
        self._twist = np.array(
            [sum(((bin(rows[i] & y).count("1") & 1) << i) for i in range(df.l)) for y in df.cosets()],
            dtype=np.int64,
        )

    def apply_t(self, vec):
        return self.t_phases * np.asarray(vec)

    def apply_s(self, vec):
        v = np.array(vec, dtype=complex)
        h = v.copy()
        n = len(h)
        span = 1
        while span < n:
            for start in range(0, n, 2 * span):
                a = h[start:start + span].copy()
                b = h[start + span:start + 2 * span]
                h[start:start + span] = a + b
                h[start + span:start + 2 * span] = a - b
            span *= 2
        return self.prefactor * h[self._twist]

    def s_matrix(self):
        n = self.df.size
        return np.column_stack([self.apply_s(np.eye(n)[:, j]) for j in range(n)])

    def t_matrix(self):
        return np.diag(self.t_phases)


# --- F_Lambda and f_Lambda -----------------------------------------------------


def build_phi_psi(lattice: Lattice, order=8):
    """The scalar eta-theta quotients phi_Lambda and psi_Lambda to the given order."""
    r = lattice.rank
    if r > 21:
        raise FormError("rank must be at most 21")
    order = Fraction(order)
    theta_power = 12 - r
    theta = theta_a1(0, order + 2) ** theta_power
    phi = eta_quotient([(1, -8), (2, 8), (4, -8)], order + 1) * theta
    phi = phi.truncate(order)
    # psi = -16 eta(2t)^-16 eta(4t)^8 theta_{A1+ + 1/2}^(12-r); the theta factor starts at 2^(12-r) q^((12-r)/4)
    shifted = Fraction(theta_power, 4)
    inner = max(order, shifted)
    half_theta = theta_a1(1, inner - shifted + Fraction(9, 4)) ** theta_power
    psi = eta_quotient([(2, -16), (4, 8)], inner - shifted + 1) * half_theta
    psi = psi.scale(-16).truncate(order)
    return phi, psi


def _check_real(series, where):
    if not series.is_real():
        raise FormError(f"imaginary residue in {where}: Weil representation convention bug")


def build_F_lambda(lattice: Lattice, order=8) -> VectorValuedForm:
    """F = phi e_0 + 2^(g-2) sum_j sum_k phi((tau+k)/4) i^(-jk) v_j + psi e_char."""
    df = discriminant_form(lattice)
    inv = invariants(lattice)
    if inv.role != "Lambda":
        raise FormError("F_Lambda needs a lattice with b+ = 2")
    order = Fraction(order)
    phi_long, _ = build_phi_psi(lattice, 4 * order)
    phi, psi = build_phi_psi(lattice, order)
    quarters = [substitute_quarter(phi_long, k) for k in range(4)]
    weight_v = Fraction(2) ** (inv.g - 2)
    v_series = []
    for j in range(4):
        acc = PuiseuxSeries.zero(order)
        for k in range(4):
            acc = acc + quarters[k].scale(_i_power(-j * k))
        acc = acc.scale(weight_v)
        _check_real(acc, f"v_{j}")
        v_series.append(acc)
    char = df.char_elem
    cache = {}
    comps = {}
    for x in df.cosets():
        j = (df.q4[x] // 2) % 4
        key = (x == 0, j, x == char)
        if key not in cache:
            s = v_series[j]
            if x == 0:
                s = s + phi
            if x == char:
                s = s + psi
            _check_real(s, f"coset {x}")
            cache[key] = s
        comps[x] = cache[key]
    weight = Fraction(1) - Fraction(lattice.rank - 2, 2)
    return VectorValuedForm(lattice, df, comps, weight, "F")


def _i_power(n):
    from .qseries import GaussianRational

    return GaussianRational(*((1, 0), (0, 1), (-1, 0), (0, -1))[n % 4])


def build_f_lambda(lattice: Lattice, order=8) -> VectorValuedForm:
    """The auxiliary form f_Lambda attached to M = Lambda^perp."""
    df = discriminant_form(lattice)
    inv = invariants(lattice)
    if inv.role != "Lambda":
        raise FormError("f_Lambda needs a lattice with b+ = 2")
    order = Fraction(order)
    r_m = 22 - inv.r
    weight = Fraction(1) - Fraction(lattice.rank - 2, 2)
    zero = PuiseuxSeries.zero(order)
    if r_m == 2 and inv.l == 0:
        f = eisenstein_e4(order + 1) * eta_power(1, -24, order + 1)
        return VectorValuedForm(lattice, df, {0: f.truncate(order)}, weight, "f")
    if r_m == 2 and inv.l == 2 and inv.delta == 0:
        f1 = eta_power(1, -8, order + 1) * eta_power(1, -8, 2 * order + 2).rescale_variable(Fraction(1, 2))
        f1 = f1.truncate(order)
        f1_shift = f1.translate(1)
        base = eta_quotient([(1, -8), (2, -8)], order)
        comps = {}
        for x in df.cosets():
            sign = -1 if df.q4[x] == 4 else 1
            s = (f1 + f1_shift.scale(sign)).scale(8)
            if x == 0:
                s = s + base
            _check_real(s, f"coset {x}")
            comps[x] = s
        return VectorValuedForm(lattice, df, comps, weight, "f")
    if r_m == 10:
        out = build_F_lambda(lattice, order)
        out.label = "f"
        return out
    return VectorValuedForm(lattice, df, {x: zero for x in df.cosets()}, weight, "f")


# --- principal parts and modularity ---------------------------------------------


def principal_part(form: VectorValuedForm):
    """All (coset, exponent <= 0, coefficient) with nonzero coefficient."""
    out = []
    seen = {}
    for x in form.df.cosets():
        s = form.components[x]
        if id(s) not in seen:
            seen[id(s)] = sorted(s.principal_part().items())
        for e, c in seen[id(s)]:
            out.append((x, e, c.re if c.is_real() else c))
    return out


@dataclass
class ModularityReport:
    ok: bool
    residual_t: float
    residual_s: float
    worst: tuple
    samples: list
    tail: float

    def to_json(self):
        return {
            "ok": self.ok,
            "residual_T": self.residual_t,
            "residual_S": self.residual_s,
            "worst": list(self.worst),
            "samples": [str(t) for t in self.samples],
            "tail_estimate": self.tail,
        }


def evaluate_form(form: VectorValuedForm, tau):
    """Vector of component values at tau and the largest tail estimate."""
    values = {}
    tail = 0.0
    vec = np.zeros(form.df.size, dtype=complex)
    for x in form.df.cosets():
        s = form.components[x]
        if id(s) not in values:
            values[id(s)] = s.evaluate(tau)
        v, b = values[id(s)]
        vec[x] = v
        tail = max(tail, b)
    return vec, tail


def check_modularity(form: VectorValuedForm, samples, tol=1e-6) -> ModularityReport:
    """Compare F(tau+1) with rho(T)F(tau) and F(-1/tau) with sqrt(tau)^(2k) rho(S)F(tau).

    Residuals are measured relative to the largest component of the
    right-hand side (or absolutely when that is below 1).
    """
    rho = WeilRep(form.df)
    two_k = 2 * form.weight
    worst_t = worst_s = 0.0
    worst = ("", None, -1)
    tail = 0.0
    for tau in samples:
        tau = complex(tau)
        f, t0 = evaluate_form(form, tau)
        f1, t1 = evaluate_form(form, tau + 1)
        fs, t2 = evaluate_form(form, -1 / tau)
        tail = max(tail, t0, t1, t2)
        rhs_t = rho.apply_t(f)
        scale_t = max(1.0, np.abs(rhs_t).max())
        res_t = np.abs(f1 - rhs_t) / scale_t
        factor = cmath.exp(two_k / 2 * cmath.log(tau))
        rhs_s = factor * rho.apply_s(f)
        scale_s = max(1.0, np.abs(rhs_s).max())
        res_s = np.abs(fs - rhs_s) / scale_s
        if res_t.max() > worst_t:
            worst_t = float(res_t.max())
            if worst_t >= worst_s:
                worst = ("T", str(tau), int(res_t.argmax()))
        if res_s.max() > worst_s:
            worst_s = float(res_s.max())
            if worst_s >= worst_t:
                worst = ("S", str(tau), int(res_s.argmax()))
    ok = worst_t < tol and worst_s < tol and tail < tol / 10
    return ModularityReport(ok, worst_t, worst_s, worst, list(samples), tail)
