"""Pure-Python fallbacks for the compiled kernels."""

import numpy as np


def conv_exact(a, b, n):
    """First n coefficients of the product of two integer coefficient lists."""
    out = [0] * n
    nb = len(b)
    for i, ai in enumerate(a[:n]):
        if not ai:
            continue
        for j in range(min(nb, n - i)):
            bj = b[j]
            if bj:
                out[i + j] += ai * bj
    return out


def theta_box(x, y, a, b, lo, hi, cutoff):
    g = len(a)
    if g == 0:
        return 1.0, 0.0, 1
    axes = [np.arange(lo[i], hi[i] + 1, dtype=float) + a[i] for i in range(g)]
    grids = np.meshgrid(*axes, indexing="ij")
    v = np.stack([gr.ravel() for gr in grids], axis=1)
    qy = np.einsum("ni,ij,nj->n", v, y, v)
    keep = qy <= cutoff
    v = v[keep]
    qy = qy[keep]
    qx = np.einsum("ni,ij,nj->n", v, x, v)
    terms = np.exp(-np.pi * qy + 1j * (np.pi * qx + 2.0 * np.pi * (v @ b)))
    s = terms.sum()
    return float(s.real), float(s.imag), int(keep.sum())
