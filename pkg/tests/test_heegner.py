import time
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from k3kit.divisor import FormalDivisor
from k3kit.heegner import (
    C10,
    CalculusError,
    balance_sweep,
    chi8_divisor,
    divisor_table,
    m_invariants,
    pullback,
    pullback_chain_check,
    upsilon_divisor,
    weight_balance_check,
)
from k3kit.lattice import LatticeError, classify_table, lookup_lambda

CHAIN_NODES = []
for _e in classify_table():
    _r, _l, _d = _e.inv.triple
    if _d == 1:
        try:
            lookup_lambda(_r - 1, _l - 1, 1)
            CHAIN_NODES.append(_e.inv.triple)
        except LatticeError:
            pass

coef = st.fractions(-100, 100, max_denominator=16)


def raw(node, dm, dp, h):
    return FormalDivisor(node, {"D-": dm, "D+": dp, "H": h})


@given(st.sampled_from(CHAIN_NODES), coef, coef, coef, coef, coef, coef, coef)
def test_pullback_is_linear(node, a1, b1, c1, a2, b2, c2, s):
    x, y = raw(node, a1, b1, c1), raw(node, a2, b2, c2)
    assert pullback(x + y * s) == pullback(x) + pullback(y) * s


@given(st.sampled_from(CHAIN_NODES), coef, coef, coef)
def test_pullback_keeps_d_and_doubles_h(node, a, b, c):
    out = pullback(raw(node, a, b, c))
    assert out.node == (node[0] - 1, node[1] - 1, 1)
    assert (out["D-"], out["D+"], out["H"]) == (a, b, 2 * c)


@given(st.sampled_from(CHAIN_NODES), coef, coef, coef)
def test_pullback_steps_compose(node, a, b, c):
    x = raw(node, a, b, c)
    try:
        two = pullback(x, 2)
    except CalculusError:
        return
    assert two == pullback(pullback(x))
    assert two["H"] == 4 * c


def test_pullback_needs_odd_parity():
    with pytest.raises(CalculusError):
        pullback(FormalDivisor((20, 0, 0), {"D": 1}))


def test_pullback_chain_reproduces_every_neighbour():
    chain = pullback_chain_check()
    assert len(chain) == len(CHAIN_NODES)
    assert all(ok for _, _, ok in chain)


def test_b_coefficient_doubles_along_k():
    # b_{g,k} = 2^k b_g: the H coefficient of chi8 at fixed g grows by 2 per step in k
    for src, dst, _ in pullback_chain_check():
        a = chi8_divisor(m_invariants((22 - src[0], src[1], 1)))
        b = chi8_divisor(m_invariants((22 - dst[0], dst[1], 1)))
        if a.item == b.item == 2 and a.divisor["H"] and b.divisor["H"]:
            assert b.divisor["H"] == 2 * a.divisor["H"]
            assert b.divisor["D-"] == a.divisor["D-"]


ITEM4_DIFFERENT = {(18, 2, 0), (14, 6, 0), (18, 0, 0), (14, 4, 0), (14, 2, 0)}


def test_items_one_to_five():
    rows = divisor_table()
    by_item = {}
    for row in rows:
        chi = row["chi8"]
        by_item.setdefault(chi.item, []).append(chi)
        if chi.item == 4 and chi.m_node in ITEM4_DIFFERENT:
            assert not chi.matches_printed
            assert chi.notes
        else:
            assert chi.matches_printed, chi.to_json()
    assert set(by_item) == {1, 2, 3, 4, 5}
    assert all(r.divisor.is_zero() for r in by_item[1])
    assert all(r.vanishes for r in by_item[5])
    (r1,) = by_item[3]
    assert r1.divisor.coeffs == {"D-": 2**19, "D+": C10, "H": 16}


def test_item_four_at_rank_six_uses_the_h_equals_d_merge():
    rows = [r["chi8"] for r in divisor_table() if r["chi8"].item == 4 and r["chi8"].m_node[0] == 6]
    assert rows
    for row in rows:
        g = m_invariants(row.m_node).g
        assert row.matches_printed
        assert row.divisor.equivalent(FormalDivisor(row.lambda_node, {"D": 2 ** (g - 1) * (2**g + 1)}))


def test_upsilon_items():
    u10 = upsilon_divisor((10, 0, 0))
    g = m_invariants((10, 0, 0)).g
    assert u10.item == 6 and u10.divisor.equivalent(FormalDivisor(u10.lambda_node, {"D": 2 * (2 ** (2 * (g - 1)) - 1)}))
    u = upsilon_divisor((2, 0, 0))
    assert u.divisor.equivalent(FormalDivisor(u.lambda_node, {"D": 2 * (2**18 - 1), "H": 32}))
    u2 = upsilon_divisor((2, 2, 0))
    assert u2.divisor.equivalent(FormalDivisor(u2.lambda_node, {"D": 2 * (2**16 - 1), "H1": 16}))
    with pytest.raises(CalculusError):
        upsilon_divisor((4, 2, 1))


def test_exceptional_m_is_refused():
    with pytest.raises(CalculusError):
        chi8_divisor("U(2)+E8(2)")


def test_balance_for_every_non_exceptional_m():
    t = time.perf_counter()
    reports = balance_sweep()
    elapsed = time.perf_counter() - t
    assert len(reports) == 74
    assert all(r.ok for r in reports), [r.to_json() for r in reports if not r.ok]
    assert elapsed < 1.0


def test_balance_with_computed_lifts():
    reports = balance_sweep(lift_source="computed")
    assert all(r.ok for r in reports)


def test_balance_weight_pairs():
    rep = weight_balance_check("U")
    assert rep.kind == "upsilon"
    g = 10
    assert rep.weight_lhs[1] == 4 * (2 ** (g - 1) * (2**g + 1) - 1)
    assert rep.weight_rhs == ((2 ** (g - 1) + 1) * (2**g - 1) * Fraction(-4), (2 ** (g - 1) + 1) * (2**g - 1) * 4)


def test_wrong_coefficients_leave_a_residual():
    rep = weight_balance_check((1, 1, 1), c=0)
    assert not rep.ok and rep.residual.coeffs == {"D+": -112}
    rep = weight_balance_check("U(2)", alpha=0)
    assert not rep.ok and rep.residual.render() == "-131070*D"
    assert not weight_balance_check((5, 5, 1), b=8).ok
