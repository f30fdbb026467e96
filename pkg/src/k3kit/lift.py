"""Weight and Heegner divisor of a Borcherds lift, read off from a principal part."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .divisor import D_KEY, PLUS_N, FormalDivisor, expand_raw, lambda_context
from .lattice import (
    Lattice,
    classify_table,
    complement_class,
    discriminant_form,
    invariants,
    parse_lattice,
)
from .vvmf import build_f_lambda, build_F_lambda, principal_part


class LiftError(ValueError):
    pass


@dataclass(frozen=True)
class PrincipalPart:
    """Terms c * q^n e_x with n <= 0, as a sorted tuple of (x, n, c)."""

    entries: tuple
    df: object = field(compare=False, repr=False)

    def __post_init__(self):
        for x, n, c in self.entries:
            if n > 0:
                raise LiftError(f"exponent {n} is not in the principal part")
            if not c:
                raise LiftError("zero coefficient stored in a principal part")

    @classmethod
    def from_terms(cls, terms, df):
        acc = {}
        for x, n, c in terms:
            key = (x, Fraction(n))
            acc[key] = acc.get(key, 0) + Fraction(c)
        return cls(tuple(sorted((x, n, c) for (x, n), c in acc.items() if c)), df)

    @classmethod
    def from_form(cls, form):
        terms = []
        for x, n, c in principal_part(form):
            if not isinstance(c, Fraction):
                raise LiftError(f"non-real coefficient {c} at coset {x}, exponent {n}")
            terms.append((x, n, c))
        return cls.from_terms(terms, form.df)

    def as_dict(self):
        return {(x, n): c for x, n, c in self.entries}

    def __add__(self, other):
        return PrincipalPart.from_terms(self.entries + other.entries, self.df)

    def scale(self, c):
        c = Fraction(c)
        return PrincipalPart.from_terms([(x, n, c * v) for x, n, v in self.entries], self.df)

    def to_json(self):
        return [
            {"coset": self.df.bits(x), "exponent": str(n), "coefficient": str(c)}
            for x, n, c in self.entries
        ]


@dataclass
class LiftProfile:
    weight: Fraction
    divisor: dict
    named: FormalDivisor
    unclassified: list
    notes: list

    def scale(self, c):
        c = Fraction(c)
        return LiftProfile(
            c * self.weight,
            {k: c * v for k, v in self.divisor.items() if c * v},
            self.named * c,
            [(k, c * v) for k, v in self.unclassified],
            list(self.notes),
        )

    def to_json(self):
        return {
            "weight": str(self.weight),
            "divisor": [
                {"n": str(n), "coset": x, "multiplicity": str(v)}
                for (n, x), v in sorted(self.divisor.items())
            ],
            "named": self.named.to_json(),
            "unclassified": [
                {"n": str(n), "coset": x, "multiplicity": str(v)} for (n, x), v in self.unclassified
            ],
            "notes": self.notes,
        }


def _node(lattice):
    inv = invariants(lattice)
    if inv.role != "Lambda":
        raise LiftError("lifts live on lattices with b+ = 2")
    return inv


def render_named(divisor: dict, lattice: Lattice):
    """Split a raw (n, x) divisor into named classes plus whatever does not fit.

    Returns (FormalDivisor, unclassified, notes).
    """
    inv = _node(lattice)
    ctx = lambda_context(inv.r, inv.l, inv.delta)
    raw = dict(divisor)
    used = set()
    notes = []
    coeffs = {}

    d = raw.get(D_KEY, Fraction(0))
    used.add(D_KEY)
    coeffs["D-"] = d
    coeffs["D+"] = d

    key_h = ctx.h_key
    if ctx.merge_h_into_d:
        notes.append("characteristic class (-1, 0) coincides with the root class: H = D")
    if ctx.merge_h_into_plus:
        notes.append("the characteristic coset is the only q = 3/2 coset: H = D+")

    plus_level = Fraction(0)
    if ctx.plus_cosets:
        others = [x for x in ctx.plus_cosets if ctx.merge_h_into_plus or (PLUS_N, x) != key_h]
        values = {raw.get((PLUS_N, x), Fraction(0)) for x in others}
        if len(values) == 1:
            plus_level = values.pop()
            coeffs["D+"] += plus_level
            used.update((PLUS_N, x) for x in others)
        else:
            notes.append("multiplicities at n = -1/4 differ across q = 3/2 cosets")

    if key_h is not None and not ctx.merge_h_into_d and not ctx.merge_h_into_plus:
        h = raw.get(key_h, Fraction(0))
        if key_h[0] == PLUS_N and key_h[1] in ctx.plus_cosets:
            h -= plus_level
        coeffs["H"] = h
        used.add(key_h)
        if key_h[0] == Fraction(-9, 4) and h:
            notes.append("H includes the hyperplanes of 3d/2 for plus roots d (they also lie on D+)")

    if ctx.e11 is not None:
        key = (Fraction(-1, 2), ctx.e11)
        coeffs["H(-1,e11)"] = raw.get(key, Fraction(0))
        used.add(key)

    unclassified = sorted((k, v) for k, v in raw.items() if k not in used and v)
    return FormalDivisor(ctx.node, coeffs), unclassified, notes


def lift_profile(pp: PrincipalPart, lattice: Lattice) -> LiftProfile:
    """Weight c_0(0)/2 and divisor sum c_x(n) H(n, x) over n < 0."""
    weight = Fraction(0)
    divisor = {}
    for x, n, c in pp.entries:
        if n == 0:
            if x == 0:
                weight += c / 2
        else:
            divisor[(n, x)] = divisor.get((n, x), 0) + c
    divisor = {k: v for k, v in divisor.items() if v}
    named, unclassified, notes = render_named(divisor, lattice)
    return LiftProfile(weight, divisor, named, unclassified, notes)


def round_trip(profile: LiftProfile, lattice: Lattice) -> dict:
    """Re-expand the named layer and the unclassified list into raw multiplicities."""
    inv = _node(lattice)
    ctx = lambda_context(inv.r, inv.l, inv.delta)
    raw = expand_raw(profile.named, ctx)
    for k, v in profile.unclassified:
        raw[k] = raw.get(k, 0) + v
    return {k: v for k, v in raw.items() if v}


# --- closed forms ---------------------------------------------------------------


def closed_form_principal_part(lattice: Lattice) -> PrincipalPart:
    """Principal part of F from its closed expression in r, g and the q-values of cosets.

    {q^-1 + 2(16-r)} e_0 + 2^(g+1)(16-r) v_0 + 2^g q^(-1/4) v_3
        - 2^(16-r) q^((12-r)/4) {1 + (28-r) q^2} e_char
    """
    inv = _node(lattice)
    df = discriminant_form(lattice)
    r, g = inv.r, inv.g
    two_g = Fraction(2) ** g
    terms = [(0, -1, 1), (0, 0, 2 * (16 - r))]
    for x in df.cosets():
        qx = df.q(x)
        if qx == 0:
            terms.append((x, 0, 2 * two_g * (16 - r)))
        elif qx == Fraction(3, 2):
            terms.append((x, Fraction(-1, 4), two_g))
    lead = Fraction(12 - r, 4)
    scale = Fraction(2) ** (16 - r)
    if lead <= 0:
        terms.append((df.char_elem, lead, -scale))
    if lead + 2 <= 0:
        terms.append((df.char_elem, lead + 2, -scale * (28 - r)))
    return PrincipalPart.from_terms(terms, df)


def expected_lift(lattice: Lattice):
    """Weight and named divisor of the lift of F per unit scale, from the closed formulas."""
    inv = _node(lattice)
    r, g, delta = inv.r, inv.g, inv.delta
    node = (r, inv.l, delta)
    two_g = 2**g
    if r == 21:
        weight = Fraction(-(5**3) * 41)
        div = FormalDivisor(node, {"D-": 1, "D+": Fraction(3 * 17 * 643, 32), "H": Fraction(-1, 32)})
        return weight, div
    weight = Fraction((16 - r) * (two_g + 1))
    if r == 12:
        weight -= 8 * (1 - delta)
    if r == 20:
        weight -= Fraction((28 - r) * (1 - delta), 2 ** (r - 15))
    div = FormalDivisor(node, {"D-": 1, "D+": two_g + 1, "H": -Fraction(2) ** (16 - r)})
    return weight, div


# --- integrality ------------------------------------------------------------------


@dataclass
class IntegralityReport:
    ell: int
    bound: int
    divides_bound: bool
    power_of_two_ok: bool

    @property
    def ok(self):
        return self.divides_bound and self.power_of_two_ok

    def to_json(self):
        return {
            "ell": self.ell,
            "bound": self.bound,
            "divides_bound": self.divides_bound,
            "power_of_two_condition": self.power_of_two_ok,
        }


def integrality_scale(lattice: Lattice, order=8, form=None) -> IntegralityReport:
    """Smallest ell making every coefficient of ell*F integral on the truncation window."""
    inv = _node(lattice)
    form = form if form is not None else build_F_lambda(lattice, order)
    ell = 1
    seen = set()
    for s in form.components.values():
        if id(s) not in seen:
            seen.add(id(s))
            ell = math.lcm(ell, s.common_denominator())
    bound = 2 ** max(0, inv.r - 16) * 2 ** max(0, 2 - inv.g)
    power_ok = True
    if inv.r >= 16:
        # any admissible ell is a multiple of 2^(r-16); the minimal one must divide that power
        power_ok = (2 ** (inv.r - 16)) % ell == 0
    return IntegralityReport(ell, bound, bound % ell == 0, power_ok)


# --- combined lifts ---------------------------------------------------------------


def _lambda_of(M):
    if isinstance(M, str):
        M = parse_lattice(M)
    inv = invariants(M)
    if inv.role == "Lambda":
        return None, inv.dual(), M
    return M, inv, complement_class(M)


def combined_lift_profile(M, order=3):
    """Profile of the lift of 2^(g-1) F + f for Lambda = M^perp (linearity on principal parts).

    ``M`` may also be given as Lambda itself (a b+ = 2 lattice).

    Returns (profile_combined, profile_F, profile_f, lambda_lattice).
    """
    M, inv_m, lam = _lambda_of(M)
    g = inv_m.g
    F = build_F_lambda(lam, order)
    f = build_f_lambda(lam, order)
    pp_F = PrincipalPart.from_form(F)
    pp_f = PrincipalPart.from_form(f)
    prof_F = lift_profile(pp_F, lam)
    prof_f = lift_profile(pp_f, lam)
    combined = lift_profile(pp_F.scale(Fraction(2) ** (g - 1)) + pp_f, lam)
    return combined, prof_F, prof_f, lam


# --- the sweep --------------------------------------------------------------------


@dataclass
class LiftCheck:
    name: str
    node: tuple
    weight: Fraction
    expected_weight: Fraction
    divisor: FormalDivisor
    expected_divisor: FormalDivisor
    principal_ok: bool
    round_trip_ok: bool
    unclassified: list
    notes: list

    @property
    def ok(self):
        return (
            self.principal_ok
            and self.round_trip_ok
            and not self.unclassified
            and self.weight == self.expected_weight
            and self.divisor.equivalent(self.expected_divisor)
        )

    def to_json(self):
        return {
            "lattice": self.name,
            "node": list(self.node),
            "ok": self.ok,
            "weight": str(self.weight),
            "expected_weight": str(self.expected_weight),
            "divisor": self.divisor.canonical().render(),
            "expected_divisor": self.expected_divisor.canonical().render(),
            "principal_part_matches_closed_form": self.principal_ok,
            "round_trip": self.round_trip_ok,
            "unclassified": [[str(n), x, str(v)] for (n, x), v in self.unclassified],
            "notes": self.notes,
        }


def check_lattice(lattice: Lattice, order=1, name=None) -> LiftCheck:
    F = build_F_lambda(lattice, order)
    pp = PrincipalPart.from_form(F)
    profile = lift_profile(pp, lattice)
    weight, div = expected_lift(lattice)
    inv = invariants(lattice)
    closed = closed_form_principal_part(lattice)
    return LiftCheck(
        name or lattice.name or "?",
        (inv.r, inv.l, inv.delta),
        profile.weight,
        weight,
        profile.named,
        div,
        closed.as_dict() == pp.as_dict(),
        round_trip(profile, lattice) == profile.divisor,
        profile.unclassified,
        profile.notes,
    )


def _check_entry(args):
    name, gram, order = args
    return check_lattice(Lattice(gram, name), order, name)


def verify_lift_formulas(entries=None, order=1, jobs=1):
    """Compare every Lambda of the classification with the closed weight/divisor formulas."""
    entries = entries if entries is not None else classify_table()
    work = [(e.name, e.lattice.gram, order) for e in entries if e.inv.role == "Lambda"]
    if jobs and jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            return list(pool.map(_check_entry, work))
    return [_check_entry(w) for w in work]
