from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from k3kit.lattice import (
    Lattice,
    LatticeError,
    bins,
    classify_table,
    complement_class,
    direct_sum,
    discriminant_form,
    invariants,
    is_exceptional,
    lattice_from_json,
    orthogonal_complement,
    parse_lattice,
    rescale,
    root_type,
    signature,
)

# per-(g, delta) counts as printed in the classification table
TABLE_DELTA1 = [10, 10, 9, 6, 6, 6, 5, 2, 2, 2, 1]
TABLE_DELTA0 = [1, 3, 3, 2, 1, 1, 2, 1, 0, 1, 1]


def brute_q_values(lat):
    """Sorted 4q mod 8 over A_L, enumerating subset sums of dual basis columns mod Z^n."""
    g = np.array(lat.gram, dtype=float)
    dual = np.linalg.inv(g)
    seen = {}
    n = lat.rank
    cols = [dual[:, i] for i in range(n)]
    for mask in range(1 << n):
        v = sum((cols[i] for i in range(n) if mask >> i & 1), np.zeros(n))
        key = tuple(np.round(v * 2).astype(int) % 2)
        seen.setdefault(key, v)
    out = []
    for v in seen.values():
        q = float(v @ g @ v)
        out.append(int(round(4 * q)) % 8)
    return sorted(out)


SMALL = ["A1+*2+A1*3", "U+A1+", "U(2)*2", "U+U(2)", "U*2+D4+A1", "U+U(2)+D4", "U*2+A1*4", "U(2)*2+D4"]


@pytest.mark.parametrize("name", SMALL)
def test_discriminant_form_matches_brute_enumeration(name):
    lat = parse_lattice(name)
    df = discriminant_form(lat)
    assert sorted(df.q4) == brute_q_values(lat)


def test_table_has_75_classes_in_the_printed_bins():
    entries = classify_table()
    assert len(entries) == 75
    b = bins(entries)
    for g in range(11):
        assert len(b.get((g, 1), [])) == TABLE_DELTA1[g]
        assert len(b.get((g, 0), [])) == TABLE_DELTA0[g]
    keys = {(e.sign, e.inv.l, e.inv.delta) for e in entries}
    assert len(keys) == 75


def test_every_class_has_b_plus_two_and_rank_at_most_21():
    for e in classify_table():
        assert e.sign[0] == 2
        assert e.inv.r == e.lattice.rank <= 21
        assert e.inv.r - e.inv.l == 2 * e.inv.g


@pytest.mark.parametrize("entry", classify_table(), ids=lambda e: e.name)
def test_characteristic_element_is_characteristic(entry):
    df = discriminant_form(entry.lattice)
    c = df.char_elem
    for x in df.cosets():
        assert (df.b(x, c) - df.q(x)) % 1 == 0
    assert df.delta == int(any(v % 4 for v in df.q4))


def test_invariant_formulas():
    inv = invariants(parse_lattice("U*2+E8*2+A1"))
    assert (inv.r, inv.l, inv.delta, inv.g, inv.k, inv.epsilon) == (21, 1, 1, 10, 0, Fraction(-9, 2))
    m = invariants(parse_lattice("U"))
    assert m.role == "M" and (m.g, m.k) == (10, 1)
    assert m.dual().triple == (20, 0, 0)


def test_eleven_generator_discriminant_group_exists():
    inv = invariants(parse_lattice("A1+*2+A1*9"))
    assert inv.l == 11 and inv.g == 0


def test_exceptional_pair():
    assert is_exceptional(invariants(parse_lattice("U+U(2)+E8(2)")))
    assert is_exceptional(invariants(parse_lattice("U(2)+E8(2)")))
    assert not is_exceptional(invariants(parse_lattice("U*2+E8(2)")))


def test_parse_grammar_variants():
    a = parse_lattice("U+U(2)+E8(2)+A1*3")
    assert a.rank == 15
    assert parse_lattice("U⊕U").gram == parse_lattice("U*2").gram
    assert parse_lattice("A1+*2").gram == ((2, 0), (0, 2))
    assert parse_lattice("(A1+)").gram == ((2,),)
    assert complement_class(parse_lattice("A1+")).rank == 21
    assert parse_lattice("(A1+)perp").rank == 21
    assert lattice_from_json({"gram": [[0, 1], [1, 0]]}).gram == ((0, 1), (1, 0))


@pytest.mark.parametrize("bad", ["", "V", "U+", "U*0", "U U x", "E8(2)A1"])
def test_parse_errors(bad):
    with pytest.raises(LatticeError):
        parse_lattice(bad)


def test_non_two_elementary_and_odd_rejected():
    with pytest.raises(LatticeError):
        discriminant_form(Lattice([[6]]))
    with pytest.raises(LatticeError):
        discriminant_form(Lattice([[1]]))
    with pytest.raises(LatticeError):
        Lattice([[1, 1], [1, 1]])


@given(st.lists(st.sampled_from(["U", "A1", "A1+", "U(2)", "D4"]), min_size=1, max_size=4))
def test_direct_sum_adds_l_and_signature(parts):
    lats = [parse_lattice(p) for p in parts]
    total = lats[0]
    for x in lats[1:]:
        total = direct_sum(total, x)
    dfs = [discriminant_form(x) for x in lats]
    df = discriminant_form(total)
    assert df.l == sum(d.l for d in dfs)
    assert signature(total) == tuple(map(sum, zip(*[signature(x) for x in lats])))
    assert df.delta == max(d.delta for d in dfs)


def test_rescale_two_doubles_every_generator():
    lat = rescale(parse_lattice("E8"), 2)
    assert discriminant_form(lat).l == 8
    assert discriminant_form(lat).delta == 0


def test_orthogonal_complement_of_a_root_in_u_plus_a1():
    amb = parse_lattice("U+A1")
    comp = orthogonal_complement([0, 0, 1], amb)
    assert comp.gram == ((0, 1), (1, 0)) or abs(comp.det) == 1


def test_root_types():
    lat = parse_lattice("U+A1")
    assert root_type([0, 0, 1], lat) == "plus"
    u2 = parse_lattice("U(2)+A1")
    assert root_type([1, -1, 0], parse_lattice("U+A1")) in ("plus", "minus")
    with pytest.raises(LatticeError):
        root_type([1, 0, 0], lat)
    assert root_type([0, 0, 1], u2) == "plus"
    d4 = parse_lattice("U+D4")
    assert root_type([0, 0, 1, 0, 0, 0], d4) == "minus"
