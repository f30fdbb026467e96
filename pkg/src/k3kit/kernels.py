"""Backend selection for the hot loops.

The compiled module ``_ckernels`` is used when it imports; setting
``K3KIT_PURE=1`` forces the pure-Python fallback. Both backends return
identical results (exact integers for convolution, doubles for theta sums).
"""

import os

import numpy as np

from . import _pykernels

_compiled = None
if not os.environ.get("K3KIT_PURE"):
    try:
        from . import _ckernels as _compiled
    except ImportError:
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"


def _is_prime(n):
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for base in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(base, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


_PRIMES = []


def _primes(k):
    """The k largest primes below 2**62, generated on demand."""
    cand = _PRIMES[-1] - 2 if _PRIMES else (1 << 62) - 1
    while len(_PRIMES) < k:
        if _is_prime(cand):
            _PRIMES.append(cand)
        cand -= 2
    return _PRIMES[:k]


def _crt_weights(primes):
    modulus = 1
    for p in primes:
        modulus *= p
    weights = []
    for p in primes:
        m = modulus // p
        weights.append(m * pow(m, -1, p))
    return modulus, weights


def convolve(a, b, n, backend=None):
    """First ``n`` coefficients of the product of integer lists ``a`` and ``b``."""
    if n <= 0:
        return []
    a = list(a[:n])
    b = list(b[:n])
    use = backend or BACKEND
    if use == "python" or _compiled is None or not a or not b:
        return _pykernels.conv_exact(a, b, n)
    ma = max(abs(v) for v in a)
    mb = max(abs(v) for v in b)
    if ma == 0 or mb == 0:
        return [0] * n
    bits = ma.bit_length() + mb.bit_length() + min(len(a), len(b)).bit_length() + 1
    if bits <= 62:
        out = np.zeros(n, dtype=np.int64)
        _compiled.conv_i64(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64), out)
        return [int(v) for v in out]
    k = bits // 61 + 1
    primes = _primes(k)
    modulus, weights = _crt_weights(primes)
    residues = []
    for p in primes:
        ra = np.array([v % p for v in a], dtype=np.uint64)
        rb = np.array([v % p for v in b], dtype=np.uint64)
        out = np.zeros(n, dtype=np.uint64)
        _compiled.conv_mod(ra, rb, out, p)
        residues.append(out.tolist())
    half = modulus // 2
    result = []
    for j in range(n):
        x = sum(r[j] * w for r, w in zip(residues, weights)) % modulus
        result.append(x - modulus if x > half else x)
    return result


def theta_box(x, y, a, b, lo, hi, cutoff, backend=None):
    """Lattice sum for a theta constant over a box of integer points."""
    x = np.ascontiguousarray(x, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    a = np.ascontiguousarray(a, dtype=float)
    b = np.ascontiguousarray(b, dtype=float)
    use = backend or BACKEND
    if use == "python" or _compiled is None:
        return _pykernels.theta_box(x, y, a, b, lo, hi, cutoff)
    lo = np.ascontiguousarray(lo, dtype=np.int_)
    hi = np.ascontiguousarray(hi, dtype=np.int_)
    return _compiled.theta_box(x, y, a, b, lo, hi, float(cutoff))
