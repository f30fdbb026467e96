"""Formal divisor calculus on the Lambda tower: pullbacks, theta-null divisors, balance checks.

Everything here is symbolic. Orthogonal-side weights are paired with Siegel
weights as (w_orth, w_siegel); the form Phi_M has weight (r(M) - 6, 4) and
divisor D per unit scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .divisor import FormalDivisor
from .lattice import (
    InvariantTriple,
    Lattice,
    LatticeError,
    classify_table,
    invariants,
    invariants_of_m,
    is_exceptional,
    lookup_lambda,
    parse_lattice,
)
from .lift import (
    LiftError,
    PrincipalPart,
    combined_lift_profile,
    expected_lift,
    lift_profile,
)
from .vvmf import build_F_lambda

C10 = Fraction(2**4 * 7)


class CalculusError(ValueError):
    pass


def m_invariants(M) -> InvariantTriple:
    """Invariants of M from a lattice, a name, an InvariantTriple or an (r, l, delta) tuple."""
    if isinstance(M, InvariantTriple):
        inv = M
    elif isinstance(M, tuple):
        inv = invariants_of_m(*M)
    elif isinstance(M, str):
        inv = invariants(parse_lattice(M))
    elif isinstance(M, Lattice):
        inv = invariants(M)
    else:
        raise CalculusError(f"cannot read invariants from {M!r}")
    if inv.role == "Lambda":
        inv = inv.dual()
    return inv


def lambda_node(inv_m: InvariantTriple):
    return (22 - inv_m.r, inv_m.l, inv_m.delta)


# --- pullback along a plus root ---------------------------------------------------


def pullback(div: FormalDivisor, steps=1) -> FormalDivisor:
    """Restrict to Lambda cap d^perp for a plus root d, `steps` times.

    D- and D+ keep their coefficients (the -H_d part of D+ is the hyperplane
    being restricted to), H doubles.
    """
    out = div
    for _ in range(steps):
        r, l, delta = out.node
        if delta != 1:
            raise CalculusError(f"node {out.node}: plus roots need delta = 1")
        target = (r - 1, l - 1, delta)
        try:
            lookup_lambda(*target)
        except LatticeError as exc:
            raise CalculusError(f"no class at {target} below {out.node}") from exc
        if out["H(-1,e11)"]:
            raise CalculusError("H(-1,e11) has no pullback rule")
        out = FormalDivisor(
            target, {"D-": out["D-"], "D+": out["D+"], "H": 2 * out["H"]}
        )
    return out


# --- the theta-null divisors ----------------------------------------------------


@dataclass
class DivisorRow:
    m_node: tuple
    lambda_node: tuple
    item: int
    divisor: FormalDivisor | None
    printed: FormalDivisor | None
    vanishes: bool = False
    notes: list = field(default_factory=list)

    @property
    def matches_printed(self):
        if self.vanishes:
            return self.printed is None
        return self.printed is not None and self.divisor.equivalent(self.printed)

    def to_json(self):
        return {
            "M": list(self.m_node),
            "Lambda": list(self.lambda_node),
            "item": self.item,
            "vanishes_identically": self.vanishes,
            "divisor": None if self.divisor is None else self.divisor.canonical().render(),
            "printed": None if self.printed is None else self.printed.canonical().render(),
            "matches_printed": self.matches_printed,
            "notes": self.notes,
        }


def _check_non_exceptional(inv):
    if is_exceptional(inv):
        raise CalculusError("exceptional M has no theta-null formula")


def chi8_divisor(M, a=None, b=None, c=None) -> DivisorRow:
    """div J_M^* chi_g^8 built from (a_g, b_g, c_g), next to the printed closed form.

    The rule is a_g D- + c_g D+ + 2^k b_g H on the Lambda node, reduced by
    the relations of that node. Defaults: a_g = 2^(2g-1), b_g = 16, c_g = 0
    except c = 112 for (r, delta) = (1, 1).
    """
    inv = m_invariants(M)
    _check_non_exceptional(inv)
    r, l, delta, g, k = inv.r, inv.l, inv.delta, inv.g, inv.k
    node = lambda_node(inv)
    two = Fraction(2)
    if g == 0:
        zero = FormalDivisor(node)
        return DivisorRow(inv.triple, node, 1, zero, zero)
    if delta == 0 and r in (2, 10):
        return DivisorRow(inv.triple, node, 5, None, None, vanishes=True,
                          notes=["J_M^* chi_g vanishes identically; the divisor is undefined"])
    a = two ** (2 * g - 1) if a is None else Fraction(a)
    b = Fraction(16) if b is None else Fraction(b)
    if c is None:
        c = C10 if (r, delta) == (1, 1) else Fraction(0)
    derived = FormalDivisor(node, {"D-": a, "D+": c, "H": two**k * b}).canonical()
    notes = []
    if delta == 1 and r >= 2:
        item = 2
        printed = FormalDivisor(node, {"D-": two ** (2 * g - 1), "H": two ** (k + 4)})
    elif delta == 1:
        item = 3
        printed = FormalDivisor(node, {"D-": two**19, "D+": C10, "H": 16})
    else:
        item = 4
        printed = FormalDivisor(node, {"D": two ** (g - 1) * (two**g + 1)})
        if r == 6:
            if g - 1 != k + 4:
                raise CalculusError(f"expected g - 1 = k + 4 at {inv.triple}")
            notes.append("H = D on this node; 2^(2g-1) + 2^(k+4) = 2^(g-1)(2^g + 1) since g - 1 = k + 4")
    row = DivisorRow(inv.triple, node, item, derived, printed.canonical(), notes=notes)
    if not row.matches_printed:
        row.notes.append(
            f"printed closed form {row.printed.render()} differs from the a_g/b_g rule "
            f"{derived.render()}; the rule is the one that balances"
        )
    return row


def upsilon_divisor(M, alpha=None, beta=None) -> DivisorRow:
    """div J_M^* Upsilon_g for (r, delta) in {(10, 0), (2, 0)}."""
    inv = m_invariants(M)
    _check_non_exceptional(inv)
    r, l, delta, g = inv.r, inv.l, inv.delta, inv.g
    node = lambda_node(inv)
    two = Fraction(2)
    if (r, delta) == (10, 0):
        item, d, h_sym, h = 6, 2 * (two ** (2 * (g - 1)) - 1), None, Fraction(0)
    elif (r, l, delta) == (2, 0, 0):
        item, d, h_sym, h = 7, 2 * (two**18 - 1), "H", Fraction(32)
    elif (r, l, delta) == (2, 2, 0):
        item, d, h_sym, h = 8, 2 * (two**16 - 1), "H1", Fraction(16)
    else:
        raise CalculusError(f"Upsilon formula only for (r, delta) in {{(10,0), (2,0)}}, got {inv.triple}")
    printed = FormalDivisor(node, {"D": d} | ({h_sym: h} if h_sym else {}))
    d = d if alpha is None else Fraction(alpha)
    h = h if beta is None else Fraction(beta)
    derived = FormalDivisor(node, {"D": d} | ({h_sym: h} if h_sym else {}))
    return DivisorRow(inv.triple, node, item, derived.canonical(), printed.canonical())


def divisor_table():
    """Every non-exceptional M of the classification with its chi8 (and Upsilon) row."""
    rows = []
    for e in classify_table():
        inv_m = e.inv.dual()
        if is_exceptional(inv_m):
            continue
        row = {"lambda_name": e.name, "chi8": chi8_divisor(inv_m)}
        if inv_m.delta == 0 and inv_m.r in (2, 10):
            row["upsilon"] = upsilon_divisor(inv_m)
        rows.append(row)
    return rows


def pullback_chain_check():
    """chi8 at (g, k+1) equals the pullback of chi8 at (g, k) wherever both nodes exist.

    Returns a list of (source node, target node, ok).
    """
    out = []
    for e in classify_table():
        r, l, delta = e.inv.triple
        if delta != 1:
            continue
        try:
            lookup_lambda(r - 1, l - 1, 1)
        except LatticeError:
            continue
        src = chi8_divisor(e.inv.dual())
        dst = chi8_divisor(invariants_of_m(22 - (r - 1), l - 1, 1))
        raw_src = _raw_chi8(e.inv.dual())
        ok = pullback(raw_src).canonical() == dst.divisor.canonical()
        out.append((src.lambda_node, dst.lambda_node, ok))
    return out


def _raw_chi8(inv_m):
    """a_g D- + c D+ + 2^k b_g H before any node relation is applied."""
    g, k = inv_m.g, inv_m.k
    c = C10 if (inv_m.r, inv_m.delta) == (1, 1) else 0
    two = Fraction(2)
    if g == 0:
        return FormalDivisor(lambda_node(inv_m))
    return FormalDivisor(lambda_node(inv_m), {"D-": two ** (2 * g - 1), "D+": c, "H": two**k * 16})


# --- balance ---------------------------------------------------------------------


@dataclass
class BalanceReport:
    m_node: tuple
    kind: str
    weight_lhs: tuple
    weight_rhs: tuple
    residual: FormalDivisor
    notes: list = field(default_factory=list)

    @property
    def ok(self):
        return self.weight_lhs == self.weight_rhs and self.residual.canonical().is_zero()

    def to_json(self):
        return {
            "M": list(self.m_node),
            "kind": self.kind,
            "ok": self.ok,
            "weight_lhs": [str(x) for x in self.weight_lhs],
            "weight_rhs": [str(x) for x in self.weight_rhs],
            "residual": self.residual.canonical().render(),
            "notes": self.notes,
        }


_F_CLOSED_FORM = {
    (2, 0, 0): (Fraction(4 * 33), {"D": 1}),
    (2, 2, 0): (Fraction(68), {"D": 1, "H(-1,e11)": 16}),
}


def _closed_lift_data(inv_m):
    """(weight, divisor) of Psi(F) and of Psi(f) per unit scale, from the closed formulas."""
    node = lambda_node(inv_m)
    wF, dF = expected_lift(lookup_lambda(*node).lattice)
    if inv_m.triple in _F_CLOSED_FORM:
        wf, cf = _F_CLOSED_FORM[inv_m.triple]
        return (wF, dF), (wf, FormalDivisor(node, cf))
    if inv_m.delta == 0 and inv_m.r == 10:
        return (wF, dF), (wF, dF)
    return (wF, dF), (Fraction(0), FormalDivisor(node))


def _computed_lift_data(inv_m, order):
    node = lambda_node(inv_m)
    if inv_m.triple in _F_CLOSED_FORM:
        _, prof_F, prof_f, _ = combined_lift_profile(_m_lattice_stub(inv_m), order)
        return (prof_F.weight, prof_F.named), (prof_f.weight, prof_f.named)
    lam = lookup_lambda(*node).lattice
    prof = lift_profile(PrincipalPart.from_form(build_F_lambda(lam, order)), lam)
    F = (prof.weight, prof.named)
    if inv_m.delta == 0 and inv_m.r == 10:
        return F, F
    return F, (Fraction(0), FormalDivisor(node))


def _m_lattice_stub(inv_m):
    """A concrete M with the given invariants, for routes that need actual forms."""
    names = {(2, 0, 0): "U", (2, 2, 0): "U(2)"}
    if inv_m.triple in names:
        return parse_lattice(names[inv_m.triple])
    raise CalculusError(f"no computed f-route for M with invariants {inv_m.triple}")


def weight_balance_check(M, a=None, b=None, c=None, alpha=None, beta=None,
                         lift_source="closed", order=1) -> BalanceReport:
    """Weights and divisors of the quotient of lift-times-theta-null by a power of Phi_M.

    chi8 case:    Psi(2^(g-1) F) (x) chi_g^8  vs  Phi_M^(2^(g-1)(2^g+1))
    Upsilon case: Psi(2^(g-1) F + f) (x) Upsilon_g  vs  Phi_M^((2^(g-1)+1)(2^g-1))

    For (r, delta) = (10, 0) the f-term is F itself, so the lift is of
    (2^(g-1) + 1) F. The residual divisor must vanish and the weights agree.
    """
    inv = m_invariants(M)
    _check_non_exceptional(inv)
    g = inv.g
    node = lambda_node(inv)
    two = Fraction(2)
    phi_weight = (Fraction(inv.r - 6), Fraction(4))
    D = FormalDivisor(node, {"D": 1})
    if lift_source == "computed":
        (wF, dF), (wf, df_) = _computed_lift_data(inv, order)
    elif lift_source == "closed":
        (wF, dF), (wf, df_) = _closed_lift_data(inv)
    else:
        raise CalculusError(f"unknown lift source {lift_source!r}")
    scale_F = two ** (g - 1)
    if inv.delta == 0 and inv.r in (2, 10):
        row = upsilon_divisor(inv, alpha, beta)
        n_chars = two ** (g - 1) * (two**g + 1)
        power = (two ** (g - 1) + 1) * (two**g - 1)
        w_lhs = (scale_F * wF + wf, 4 * (n_chars - 1))
        div_lhs = dF * scale_F + df_ + row.divisor
        kind = "upsilon"
    else:
        row = chi8_divisor(inv, a, b, c)
        power = two ** (g - 1) * (two**g + 1)
        w_lhs = (scale_F * wF, two ** (g + 1) * (two**g + 1))
        div_lhs = dF * scale_F + row.divisor
        kind = "chi8"
    w_rhs = (power * phi_weight[0], power * phi_weight[1])
    residual = (div_lhs - D * power).canonical()
    return BalanceReport(inv.triple, kind, w_lhs, w_rhs, residual, list(row.notes))


def balance_sweep(**overrides):
    out = []
    for e in classify_table():
        inv_m = e.inv.dual()
        if is_exceptional(inv_m):
            continue
        out.append(weight_balance_check(inv_m, **overrides))
    return out


__all__ = [
    "CalculusError",
    "DivisorRow",
    "BalanceReport",
    "m_invariants",
    "pullback",
    "chi8_divisor",
    "upsilon_divisor",
    "divisor_table",
    "pullback_chain_check",
    "weight_balance_check",
    "balance_sweep",
    "LiftError",
]
