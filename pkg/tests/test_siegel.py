import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from k3kit import siegel
from k3kit.siegel import (
    SiegelPoint,
    ThetaChar,
    ThetaError,
    all_thetas,
    bosonization_constant,
    chi8,
    count_even_characteristics,
    even_characteristics,
    log_petersson,
    theta_constant,
    two_vanish_probe,
    upsilon,
)

# log of the Glaisher-Kinkelin constant by Euler-Maclaurin on sum k log k (no zeta involved)
BERNOULLI = {4: Fraction(-1, 30), 6: Fraction(1, 42), 8: Fraction(-1, 30), 10: Fraction(5, 66), 12: Fraction(-691, 2730)}


def log_glaisher(n=200, dps=40):
    with mpmath.workdps(dps):
        s = mpmath.fsum(k * mpmath.log(k) for k in range(1, n + 1))
        nn = mpmath.mpf(n)
        corr = mpmath.mpf(0)
        for j2, b in BERNOULLI.items():
            corr += mpmath.mpf(b.numerator) / b.denominator * math.factorial(j2 - 3) / math.factorial(j2) / nn ** (j2 - 2)
        return s - (nn**2 / 2 + nn / 2 + mpmath.mpf(1) / 12) * mpmath.log(nn) + nn**2 / 4 + corr


def random_point(rng, g):
    y = rng.normal(size=(g, g))
    y = y @ y.T / g + 0.9 * np.eye(g)
    x = rng.uniform(-0.5, 0.5, size=(g, g))
    return SiegelPoint((x + x.T) / 2 + 1j * y)


def test_even_counts():
    assert [len(even_characteristics(g)) for g in range(1, 5)] == [3, 10, 36, 136]
    assert [count_even_characteristics(g) for g in range(1, 6)] == [
        len(even_characteristics(g)) for g in range(1, 6)
    ]
    assert count_even_characteristics(10) == 524800


def test_theta_at_i():
    ref = complex(mpmath.pi ** mpmath.mpf(0.25) / mpmath.gamma(mpmath.mpf(0.75)))
    v = theta_constant(ThetaChar((0,), (0,)), [[1j]])
    assert abs(v.value - ref) < 1e-14
    hv = theta_constant(ThetaChar((0,), (0,)), [[1j]], precision="high")
    assert abs(hv.value - ref) < 1e-14


@given(st.floats(-0.5, 0.5), st.floats(0.6, 2.0))
def test_jacobi_quartic_identity(x, y):
    om = [[complex(x, y)]]
    th = {str(c): t.value for c, t in all_thetas(om).items()}
    assert abs(th["0,0"] ** 4 - th["0,1"] ** 4 - th["1,0"] ** 4) < 1e-12 * abs(th["0,0"]) ** 4


@given(st.floats(-0.5, 0.5), st.floats(0.7, 1.6))
def test_chi1_is_256_eta24(x, y):
    tau = complex(x, y)
    q = mpmath.exp(2j * mpmath.pi * tau)
    eta24 = complex(q * mpmath.qp(q) ** 24)
    c = chi8([[tau]]).value
    assert abs(c - 256 * eta24) < 1e-10 * abs(c)


@pytest.mark.parametrize("g", [1, 2, 3])
def test_upsilon_is_elementary_symmetric(g):
    rng = np.random.default_rng(g)
    for _ in range(5):
        pt = random_point(rng, g)
        th = all_thetas(pt)
        v = np.array([t.value**8 for t in th.values()])
        u = upsilon(pt, thetas=th)
        coeffs = np.poly(-v)
        assert abs(u.value - coeffs[len(v) - 1]) < 1e-8 * abs(u.value)
        c = chi8(pt, thetas=th)
        assert abs(c.value - coeffs[len(v)]) < 1e-8 * abs(c.value)


@pytest.mark.parametrize("split", [(1, 1), (1, 2), (2, 1)])
def test_block_diagonal_factorisation(split):
    rng = np.random.default_rng(sum(split))
    p1, p2 = random_point(rng, split[0]), random_point(rng, split[1])
    g = sum(split)
    om = np.zeros((g, g), dtype=complex)
    om[: split[0], : split[0]] = p1.omega
    om[split[0]:, split[0]:] = p2.omega
    for ch in even_characteristics(g) + [ThetaChar((1,) + (0,) * (g - 1), (1,) + (0,) * (g - 1))]:
        c1 = ThetaChar(ch.a[: split[0]], ch.b[: split[0]])
        c2 = ThetaChar(ch.a[split[0]:], ch.b[split[0]:])
        whole = theta_constant(ch, om).value
        parts = theta_constant(c1, p1).value * theta_constant(c2, p2).value
        assert abs(whole - parts) <= 1e-10 * max(1.0, abs(parts))


@pytest.mark.parametrize("g", [1, 2, 3])
def test_tail_bound_is_honest(g):
    rng = np.random.default_rng(10 + g)
    pt = random_point(rng, g)
    for ch in even_characteristics(g)[:4]:
        loose = theta_constant(ch, pt, tol=1e-4)
        tight = theta_constant(ch, pt, tol=1e-15)
        assert loose.tail_bound <= 1e-4 * (1 + 1e-9)
        assert abs(loose.value - tight.value) <= loose.tail_bound + tight.tail_bound


def test_high_precision_matches_double():
    pt = random_point(np.random.default_rng(5), 2)
    for ch in even_characteristics(2):
        a = theta_constant(ch, pt).value
        b = theta_constant(ch, pt, precision="high").value
        assert abs(a - b) < 1e-12


@pytest.mark.parametrize("g", [1, 2])
def test_petersson_norm_is_invariant(g):
    rng = np.random.default_rng(20 + g)
    w = siegel.chi8_weight(g)
    eye = np.eye(g, dtype=int)
    for _ in range(3):
        pt = random_point(rng, g)
        base = log_petersson(chi8(pt).value, w, pt)
        for moved in (pt.translate(eye), pt.invert(), pt.rotate(eye[::-1])):
            assert abs(log_petersson(chi8(moved).value, w, moved) - base) < 1e-8 * max(1.0, abs(base))


def test_probe_on_diagonal_points():
    two = two_vanish_probe(np.diag([1.1j, 0.9j + 0.2]))
    assert two.status == "one" and two.consistent
    three = two_vanish_probe(np.diag([1.1j, 0.9j + 0.2, 1.3j]))
    assert three.status == "at_least_two" and three.consistent
    generic = two_vanish_probe(random_point(np.random.default_rng(1), 2))
    assert generic.status == "none" and generic.consistent


def test_bosonization_constants():
    assert bosonization_constant(1) == 1 / (4 * math.pi)
    with mpmath.workdps(30):
        ref = mpmath.exp(12 * (mpmath.mpf(1) / 12 - log_glaisher()) - mpmath.mpf(1) / 2)
    c0 = bosonization_constant(0, precision="high")
    assert abs(c0 - ref) < mpmath.mpf(10) ** -20
    assert abs(bosonization_constant(0) - float(ref)) < 1e-10 * float(ref)


def test_bad_inputs():
    with pytest.raises(ThetaError):
        SiegelPoint([[1j, 0.1], [0.2, 1j]])
    with pytest.raises(ThetaError):
        SiegelPoint([[-1j]])
    with pytest.raises(ThetaError):
        theta_constant(ThetaChar((0,), (0,)), [[1j]], tol=0)
    with pytest.raises(ThetaError):
        ThetaChar.parse("10,0")
    with pytest.raises(ThetaError):
        SiegelPoint([[1j]]).translate([[0.5]])
