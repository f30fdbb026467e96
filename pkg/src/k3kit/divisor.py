"""Formal divisor combinations on Omega_Lambda and the lattice-dependent relations.

Symbols: ``D-`` and ``D+`` (minus/plus root hyperplanes), ``H`` (the
characteristic Heegner divisor) and ``H(-1,e11)`` (norm -1 vectors in the
unique q = 1 coset when A_Lambda has order 4 and delta = 0). ``D`` means
D- + D+ and ``H1`` means H - H(-1,e11).

Raw Heegner classes are keyed by (n, x) with n = lambda^2/2 < 0 and x a
coset bitmask. The dictionary between the two layers:

    (-1, 0)                         -> D- + D+
    sum of (-1/4, x) over q(x) = 3/2 -> D+
    (epsilon/2, char)               -> H
    (-1/2, e11)                     -> H(-1,e11)
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction

from .lattice import discriminant_form, invariants_of_lambda, lookup_lambda

SYMBOLS = ("D-", "D+", "H", "H(-1,e11)")
D_KEY = (Fraction(-1), 0)
PLUS_N = Fraction(-1, 4)


@dataclass(frozen=True)
class LambdaContext:
    node: tuple
    g: int
    epsilon: Fraction
    char: int
    plus_cosets: tuple
    e11: int | None

    @property
    def h_key(self):
        n = self.epsilon / 2
        return (n, self.char) if n < 0 else None

    @property
    def merge_h_into_d(self):
        return self.h_key == D_KEY

    @property
    def merge_h_into_plus(self):
        key = self.h_key
        return key is not None and key[0] == PLUS_N and self.plus_cosets == (self.char,)

    @property
    def delta(self):
        return self.node[2]


@functools.lru_cache(maxsize=None)
def lambda_context(r, l, delta) -> LambdaContext:
    entry = lookup_lambda(r, l, delta)
    df = discriminant_form(entry.lattice)
    inv = invariants_of_lambda(r, l, delta)
    plus = tuple(df.cosets_with_q(Fraction(3, 2)))
    e11 = None
    if df.size == 4 and delta == 0:
        ones = df.cosets_with_q(1)
        if len(ones) == 1:
            e11 = ones[0]
    return LambdaContext((r, l, delta), inv.g, inv.epsilon, df.char_elem, plus, e11)


def _frac_map(coeffs):
    out = {}
    for k, v in dict(coeffs).items():
        if k == "D":
            for s in ("D-", "D+"):
                out[s] = out.get(s, 0) + Fraction(v)
        elif k == "H1":
            out["H"] = out.get("H", 0) + Fraction(v)
            out["H(-1,e11)"] = out.get("H(-1,e11)", 0) - Fraction(v)
        elif k in SYMBOLS:
            out[k] = out.get(k, 0) + Fraction(v)
        else:
            raise KeyError(f"unknown divisor symbol {k!r}")
    return {k: v for k, v in out.items() if v}


class FormalDivisor:
    """A rational combination of divisor symbols living on the node (r, l, delta) of Lambda."""

    __slots__ = ("node", "coeffs")

    def __init__(self, node, coeffs=None):
        self.node = tuple(node)
        self.coeffs = _frac_map(coeffs or {})

    def __getitem__(self, sym):
        return self.coeffs.get(sym, Fraction(0))

    def _check(self, other):
        if self.node != other.node:
            raise ValueError(f"divisors on different nodes {self.node} and {other.node}")

    def __add__(self, other):
        self._check(other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) + v
        return FormalDivisor(self.node, out)

    def __neg__(self):
        return FormalDivisor(self.node, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        c = Fraction(c)
        return FormalDivisor(self.node, {k: c * v for k, v in self.coeffs.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, FormalDivisor):
            return NotImplemented
        return self.node == other.node and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.node, tuple(sorted(self.coeffs.items()))))

    def is_zero(self):
        return not self.coeffs

    def canonical(self) -> "FormalDivisor":
        """Apply the relations that hold on this node.

        D+ is empty when no coset has q = 3/2 (always the case for
        delta = 0), g = 0 kills D-, epsilon >= 0 kills H; H merges
        into D when (epsilon/2, char) = (-1, 0) and into D+ when the
        characteristic coset is the only q = 3/2 coset at n = -1/4.
        """
        r, l, delta = self.node
        g = (r - l) // 2
        c = dict(self.coeffs)
        h = c.pop("H", Fraction(0))
        eps = Fraction(12 - r, 2)
        try:
            ctx = lambda_context(r, l, delta)
        except ValueError:
            ctx = None
        if ctx is not None and ctx.merge_h_into_d:
            c["D-"] = c.get("D-", 0) + h
            c["D+"] = c.get("D+", 0) + h
        elif ctx is not None and ctx.merge_h_into_plus:
            c["D+"] = c.get("D+", 0) + h
        elif eps < 0:
            c["H"] = h
        if delta == 0 or (ctx is not None and not ctx.plus_cosets):
            c.pop("D+", None)
        if g == 0:
            c.pop("D-", None)
        if ctx is None or ctx.e11 is None:
            c.pop("H(-1,e11)", None)
        return FormalDivisor(self.node, c)

    def equivalent(self, other) -> bool:
        return self.canonical() == other.canonical()

    def render(self) -> str:
        """Human-readable form; uses D when D- and D+ agree and H1 when H and H(-1,e11) cancel."""
        c = dict(self.coeffs)
        parts = []
        dm, dp = c.pop("D-", 0), c.pop("D+", 0)
        delta = self.node[2]
        if delta == 0 and dp == 0 and dm:
            parts.append((dm, "D"))
        elif dm and dm == dp:
            parts.append((dm, "D"))
        else:
            if dm:
                parts.append((dm, "D-"))
            if dp:
                parts.append((dp, "D+"))
        h, e = c.pop("H", 0), c.pop("H(-1,e11)", 0)
        if h and e == -h:
            parts.append((h, "H1"))
        else:
            if h:
                parts.append((h, "H"))
            if e:
                parts.append((e, "H(-1,e11)"))
        if not parts:
            return "0"
        out = ""
        for coef, sym in parts:
            sign = "-" if coef < 0 else "+"
            mag = abs(coef)
            body = sym if mag == 1 else f"{mag}*{sym}"
            out += f" {sign} {body}" if out else (f"-{body}" if coef < 0 else body)
        return out

    def to_json(self):
        return {
            "node": list(self.node),
            "coeffs": {k: [v.numerator, v.denominator] for k, v in sorted(self.coeffs.items())},
            "text": self.render(),
        }

    def __repr__(self):
        return f"FormalDivisor({self.node}: {self.render()})"


def expand_raw(div: FormalDivisor, ctx: LambdaContext) -> dict:
    """Raw (n, coset) multiplicities represented by a named divisor."""
    out = {}

    def add(key, v):
        if v:
            out[key] = out.get(key, 0) + v

    dm, dp = div["D-"], div["D+"]
    add(D_KEY, dm)
    for x in ctx.plus_cosets:
        add((PLUS_N, x), dp - dm)
    if div["H"]:
        if ctx.h_key is None:
            raise ValueError("H is not a Heegner divisor on this node")
        add(ctx.h_key, div["H"])
    if div["H(-1,e11)"]:
        add((Fraction(-1, 2), ctx.e11), div["H(-1,e11)"])
    return {k: v for k, v in out.items() if v}
