"""Even lattices, their 2-elementary discriminant forms, and the b+ = 2 catalogue.

Lattices are given by integer Gram matrices. Root lattices are negative
definite, ``U`` is the hyperbolic plane and ``A1+`` is ``A1(-1)``.
"""

from __future__ import annotations

import functools
import re
from dataclasses import dataclass, field
from fractions import Fraction

from . import intmat


class LatticeError(ValueError):
    pass


def _as_gram(gram):
    rows = tuple(tuple(int(x) for x in row) for row in gram)
    n = len(rows)
    if n == 0 or any(len(r) != n for r in rows):
        raise LatticeError("Gram matrix must be square and nonempty")
    for i in range(n):
        for j in range(i):
            if rows[i][j] != rows[j][i]:
                raise LatticeError("Gram matrix must be symmetric")
    return rows


@dataclass(frozen=True)
class Lattice:
    """A nondegenerate integral lattice Z^r with the given Gram matrix."""

    gram: tuple
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        g = _as_gram(self.gram)
        object.__setattr__(self, "gram", g)
        if intmat.determinant(g) == 0:
            raise LatticeError("Gram matrix is singular")

    @property
    def rank(self):
        return len(self.gram)

    @property
    def det(self):
        return intmat.determinant(self.gram)

    @property
    def is_even(self):
        return all(self.gram[i][i] % 2 == 0 for i in range(self.rank))

    def pair(self, x, y):
        return sum(x[i] * self.gram[i][j] * y[j] for i in range(self.rank) for j in range(self.rank))

    def to_json(self):
        return {"name": self.name, "gram": [list(r) for r in self.gram]}

    def __repr__(self):
        label = self.name or f"rank {self.rank}"
        return f"Lattice({label})"


def direct_sum(a: Lattice, b: Lattice, name=None) -> Lattice:
    n, m = a.rank, b.rank
    gram = [list(r) + [0] * m for r in a.gram] + [[0] * n + list(r) for r in b.gram]
    if name is None and a.name and b.name:
        name = f"{a.name}+{b.name}"
    return Lattice(gram, name)


def rescale(a: Lattice, k: int) -> Lattice:
    """The lattice L(k): same module, form multiplied by k."""
    if k == 0:
        raise LatticeError("rescaling factor must be nonzero")
    name = f"{a.name}({k})" if a.name else None
    return Lattice([[k * x for x in r] for r in a.gram], name)


def signature(a: Lattice):
    pos, neg, zero = intmat.inertia(a.gram)
    if zero:
        raise LatticeError("Gram matrix is singular")
    return pos, neg


# --- named lattices -------------------------------------------------------


def _neg_cartan(edges, n):
    g = [[-2 if i == j else 0 for j in range(n)] for i in range(n)]
    for i, j in edges:
        g[i][j] = g[j][i] = 1
    return g


def _d_edges(n):
    return [(i, i + 1) for i in range(n - 2)] + [(n - 3, n - 1)]


_E8_EDGES = [(0, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (1, 3)]

_BASE = {
    "U": [[0, 1], [1, 0]],
    "A1": [[-2]],
    "A1+": [[2]],
    "D4": _neg_cartan(_d_edges(4), 4),
    "D6": _neg_cartan(_d_edges(6), 6),
    "D8": _neg_cartan(_d_edges(8), 8),
    "E7": _neg_cartan(_E8_EDGES[:-2] + [(1, 3)], 7),
    "E8": _neg_cartan(_E8_EDGES, 8),
}


def named(base: str, scale: int = 1) -> Lattice:
    if base not in _BASE:
        raise LatticeError(f"unknown lattice {base!r}")
    lat = Lattice(_BASE[base], base)
    if scale != 1:
        lat = Lattice(rescale(lat, scale).gram, f"{base}({scale})")
    return lat


_TOKEN = re.compile(
    r"(?P<base>\(A1\+\)|A1\+(?=$|[+*^)⊕]|\+)|U|A1|D4|D6|D8|E7|E8)"
    r"(?:\((?P<scale>-?\d+)\))?"
    r"(?:[*^](?P<mult>\d+))?"
)


def parse_lattice(text: str) -> Lattice:
    """Parse names such as ``U+U(2)+E8(2)+A1*3``, ``A1+*2+A1*4`` or ``(A1+)perp``.

    A trailing ``perp`` denotes the b+ = 2 catalogue class orthogonal to the
    given lattice inside the K3 lattice, resolved through its invariants.
    """
    s = text.replace(" ", "").replace("⊕", "+")
    if s.endswith("perp"):
        return complement_class(parse_lattice(s[:-4]))
    pos = 0
    parts = []
    while pos < len(s):
        m = _TOKEN.match(s, pos)
        if not m:
            raise LatticeError(f"cannot parse lattice name {text!r} at position {pos}")
        base = m.group("base").strip("()")
        scale = int(m.group("scale") or 1)
        mult = int(m.group("mult") or 1)
        if mult == 0:
            raise LatticeError("multiplicity must be positive")
        parts.extend([named(base, scale)] * mult)
        pos = m.end()
        if pos < len(s):
            if s[pos] != "+":
                raise LatticeError(f"expected '+' in {text!r} at position {pos}")
            pos += 1
            if pos == len(s):
                raise LatticeError(f"dangling '+' in {text!r}")
    if not parts:
        raise LatticeError("empty lattice name")
    lat = parts[0]
    for p in parts[1:]:
        lat = direct_sum(lat, p)
    return Lattice(lat.gram, text)


def lattice_from_json(obj) -> Lattice:
    if isinstance(obj, str):
        return parse_lattice(obj)
    if "gram" in obj:
        return Lattice(obj["gram"], obj.get("name"))
    if "name" in obj:
        return parse_lattice(obj["name"])
    raise LatticeError("lattice JSON needs 'gram' or 'name'")


# --- discriminant forms -----------------------------------------------------


@dataclass(frozen=True)
class DiscriminantForm:
    """Finite quadratic module A_L = L^v/L of a 2-elementary even lattice.

    Elements are encoded as l-bit integers; bit i is the coefficient of the
    i-th generator. ``q4[x]`` stores 4*q(x) mod 8, ``pair4[i][j]`` stores
    4*(e_i, e_j) for the generators.
    """

    l: int
    generators: tuple
    pair4: tuple
    q4: tuple
    char_elem: int
    signature: tuple

    @property
    def size(self):
        return 1 << self.l

    @property
    def delta(self):
        return int(self.char_elem != 0)

    def cosets(self):
        return range(self.size)

    def q(self, x) -> Fraction:
        return Fraction(self.q4[x], 4)

    def b(self, x, y) -> Fraction:
        s = 0
        for i in range(self.l):
            if x >> i & 1:
                row = self.pair4[i]
                for j in range(self.l):
                    if y >> j & 1:
                        s += row[j]
        return Fraction(s % 4, 4)

    def parity_rows(self):
        """Bit rows of the F2 matrix 2*b(e_i, e_j) mod 2."""
        rows = []
        for i in range(self.l):
            m = 0
            for j in range(self.l):
                if (self.pair4[i][j] // 2) % 2:
                    m |= 1 << j
            rows.append(m)
        return rows

    def bits(self, x):
        return [x >> i & 1 for i in range(self.l)]

    def from_bits(self, bits):
        return sum(int(b) << i for i, b in enumerate(bits))

    def cosets_with_q(self, value) -> list:
        v4 = int(Fraction(value) * 4) % 8
        return [x for x in self.cosets() if self.q4[x] == v4]


def _discriminant_form(gram) -> DiscriminantForm:
    n = len(gram)
    if any(gram[i][i] % 2 for i in range(n)):
        raise LatticeError("odd lattice: discriminant quadratic form needs an even lattice")
    d, _, v = intmat.smith_normal_form(gram)
    divisors = [d[i][i] for i in range(n)]
    if any(x not in (1, 2) for x in divisors):
        raise LatticeError(f"not 2-elementary: elementary divisors {divisors}")
    cols = [[v[r][i] for r in range(n)] for i in range(n) if divisors[i] == 2]
    l = len(cols)
    pair4 = tuple(
        tuple(sum(ci[a] * gram[a][b] * cj[b] for a in range(n) for b in range(n)) for cj in cols)
        for ci in cols
    )
    q4 = [0] * (1 << l)
    for x in range(1, 1 << l):
        i = x.bit_length() - 1
        rest = x ^ (1 << i)
        cross = sum(pair4[j][i] for j in range(l) if rest >> j & 1)
        q4[x] = (q4[rest] + pair4[i][i] + 2 * cross) % 8
    gens = tuple(tuple(Fraction(c, 2) for c in col) for col in cols)
    partial = DiscriminantForm(l, gens, pair4, tuple(q4), 0, intmat.inertia(gram)[:2])
    rows = partial.parity_rows()
    rhs = [(q4[1 << i] // 2) % 2 for i in range(l)]
    char, rank = intmat.solve_gf2(rows, rhs)
    if rank != l:
        raise LatticeError("degenerate discriminant bilinear form")
    return DiscriminantForm(l, gens, pair4, tuple(q4), char, partial.signature)


@functools.lru_cache(maxsize=512)
def _df_cached(gram):
    return _discriminant_form(gram)


def discriminant_form(a: Lattice) -> DiscriminantForm:
    return _df_cached(a.gram)


def elementary_divisors(a: Lattice):
    return intmat.elementary_divisors(a.gram)


# --- invariants -------------------------------------------------------------


@dataclass(frozen=True)
class InvariantTriple:
    """(r, l, delta) of a 2-elementary lattice with the derived g, k, epsilon.

    ``role`` is "Lambda" for b+ = 2 and "M" for b+ = 1. In both roles g, k
    refer to the pair (M, Lambda = M^perp) and epsilon to Lambda.
    """

    r: int
    l: int
    delta: int
    g: int
    k: int
    epsilon: Fraction
    role: str

    @property
    def triple(self):
        return (self.r, self.l, self.delta)

    def dual(self) -> "InvariantTriple":
        """Invariants of the orthogonal complement inside the K3 lattice."""
        if self.role == "Lambda":
            return invariants_of_m(22 - self.r, self.l, self.delta)
        return invariants_of_lambda(22 - self.r, self.l, self.delta)


def invariants_of_lambda(r, l, delta) -> InvariantTriple:
    if (r - l) % 2:
        raise LatticeError("r - l must be even")
    return InvariantTriple(r, l, delta, (r - l) // 2, (22 - r - l) // 2, Fraction(12 - r, 2), "Lambda")


def invariants_of_m(r, l, delta) -> InvariantTriple:
    if (r - l) % 2:
        raise LatticeError("r - l must be even")
    return InvariantTriple(r, l, delta, (22 - r - l) // 2, (r - l) // 2, Fraction(r - 10, 2), "M")


def invariants(a: Lattice) -> InvariantTriple:
    df = discriminant_form(a)
    bp, _ = df.signature
    if bp == 2:
        return invariants_of_lambda(a.rank, df.l, df.delta)
    if bp == 1:
        return invariants_of_m(a.rank, df.l, df.delta)
    raise LatticeError(f"expected b+ in {{1, 2}}, got {bp}")


def is_exceptional(inv: InvariantTriple) -> bool:
    lam = inv if inv.role == "Lambda" else inv.dual()
    return lam.triple == (12, 10, 0)


# --- the b+ = 2 catalogue --------------------------------------------------


@dataclass(frozen=True)
class ClassEntry:
    name: str
    lattice: Lattice
    inv: InvariantTriple
    sign: tuple

    @property
    def g(self):
        return self.inv.g

    @property
    def delta(self):
        return self.inv.delta


def _family(prefix, ts):
    out = []
    for t in ts:
        tail = "" if t == 0 else ("+A1" if t == 1 else f"+A1*{t}")
        out.append(prefix + tail)
    return out


CATALOGUE_DELTA1 = {
    0: _family("A1+*2", range(0, 10)),
    1: _family("U+A1+", range(0, 10)),
    2: _family("U*2", range(1, 10)),
    3: _family("U*2+D4", range(1, 7)),
    4: _family("U*2+D6", range(0, 6)),
    5: _family("U*2+E7", range(0, 6)),
    6: _family("U*2+E8", range(1, 6)),
    7: _family("U*2+D4+E8", range(1, 3)),
    8: _family("U*2+D6+E8", range(0, 2)),
    9: _family("U*2+E7+E8", range(0, 2)),
    10: ["U*2+E8*2+A1"],
}

CATALOGUE_DELTA0 = {
    0: ["U(2)*2"],
    1: ["U+U(2)", "U(2)*2+D4", "U+U(2)+E8(2)"],
    2: ["U*2", "U+U(2)+D4", "U*2+E8(2)"],
    3: ["U*2+D4", "U+U(2)+D4*2"],
    4: ["U*2+D4*2"],
    5: ["U*2+D8"],
    6: ["U*2+E8", "U*2+D4+D8"],
    7: ["U*2+D4+E8"],
    8: [],
    9: ["U*2+D8+E8"],
    10: ["U*2+E8*2"],
}

EXPECTED_BIN_COUNTS = {
    (g, d): len(names)
    for d, table in ((1, CATALOGUE_DELTA1), (0, CATALOGUE_DELTA0))
    for g, names in table.items()
}


@functools.lru_cache(maxsize=1)
def classify_table() -> tuple:
    """Build every catalogue lattice, compute invariants and check the bins."""
    entries = []
    for d, table in ((1, CATALOGUE_DELTA1), (0, CATALOGUE_DELTA0)):
        for g, names in table.items():
            for name in names:
                lat = parse_lattice(name)
                inv = invariants(lat)
                sign = discriminant_form(lat).signature
                if sign[0] != 2:
                    raise AssertionError(f"{name}: expected b+ = 2, got signature {sign}")
                if (inv.g, inv.delta) != (g, d):
                    raise AssertionError(
                        f"{name}: listed in row (g={g}, delta={d}) but computed "
                        f"(g={inv.g}, delta={inv.delta})"
                    )
                entries.append(ClassEntry(name, lat, inv, sign))
    seen = {}
    for e in entries:
        key = (e.sign, e.inv.l, e.inv.delta)
        if key in seen:
            raise AssertionError(f"{e.name} and {seen[key]} share invariants {key}")
        seen[key] = e.name
    bins = {}
    for e in entries:
        bins[(e.g, e.delta)] = bins.get((e.g, e.delta), 0) + 1
    for key, count in EXPECTED_BIN_COUNTS.items():
        if bins.get(key, 0) != count:
            raise AssertionError(f"row {key}: expected {count} classes, found {bins.get(key, 0)}")
    if len(entries) != 75:
        raise AssertionError(f"expected 75 classes, found {len(entries)}")
    return tuple(entries)


def bins(entries=None) -> dict:
    out = {}
    for e in entries or classify_table():
        out.setdefault((e.g, e.delta), []).append(e)
    return out


def lookup_lambda(r, l, delta) -> ClassEntry:
    for e in classify_table():
        if e.inv.triple == (r, l, delta):
            return e
    raise LatticeError(f"no catalogue class with (r, l, delta) = {(r, l, delta)}")


def complement_class(m: Lattice) -> Lattice:
    """Catalogue representative of M^perp for a b+ = 1 lattice M."""
    inv = invariants(m)
    if inv.role != "M":
        raise LatticeError("complement resolution needs a b+ = 1 lattice")
    e = lookup_lambda(22 - inv.r, inv.l, inv.delta)
    return Lattice(e.lattice.gram, e.name)


# --- sublattices and roots -------------------------------------------------


def _columns(sub_basis):
    if sub_basis and not isinstance(sub_basis[0], (list, tuple)):
        return [[int(x)] for x in sub_basis]
    return [[int(x) for x in row] for row in sub_basis]


def complement_basis(sub_basis, ambient: Lattice):
    """Rows spanning the primitive sublattice orthogonal to the given columns."""
    cols = _columns(sub_basis)
    if len(cols) != ambient.rank:
        raise LatticeError("sub_basis must have one row per ambient coordinate")
    s = len(cols[0])
    if sum(1 for x in intmat.elementary_divisors(cols) if x) != s:
        raise LatticeError("sub_basis columns are linearly dependent")
    pairing = intmat.matmul(intmat.transpose(cols), [list(r) for r in ambient.gram])
    kernel = intmat.integer_kernel(pairing)
    return intmat.hermite_rows(intmat.transpose(kernel))


def orthogonal_complement(sub_basis, ambient: Lattice) -> Lattice:
    """Gram matrix of {v in ambient : <v, sub> = 0} as a lattice.

    ``sub_basis`` is an integer matrix whose columns are vectors of the
    ambient lattice (a flat list is read as a single column).
    """
    rows = complement_basis(sub_basis, ambient)
    if not rows:
        raise LatticeError("orthogonal complement is zero")
    g = [list(r) for r in ambient.gram]
    gram = intmat.matmul(intmat.matmul(rows, g), intmat.transpose(rows))
    return Lattice(gram)


def root_type(d, a: Lattice) -> str:
    """'plus' when d/2 lies in the dual lattice, 'minus' otherwise."""
    d = [int(x) for x in d]
    if len(d) != a.rank:
        raise LatticeError("vector length does not match lattice rank")
    if a.pair(d, d) != -2:
        raise LatticeError("not a root: <d, d> must be -2")
    gd = [sum(a.gram[i][j] * d[j] for j in range(a.rank)) for i in range(a.rank)]
    return "plus" if all(x % 2 == 0 for x in gd) else "minus"
