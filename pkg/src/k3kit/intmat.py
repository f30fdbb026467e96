"""Exact integer and rational matrix routines on nested lists of Python ints."""

from fractions import Fraction


def identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(a, b):
    bt = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def transpose(a):
    return [list(r) for r in zip(*a)]


def smith_normal_form(a):
    """Return (D, U, V) with U*A*V = D, U and V unimodular, D diagonal.

    The diagonal entries are nonnegative and each divides the next.
    """
    A = [list(map(int, row)) for row in a]
    m = len(A)
    n = len(A[0]) if m else 0
    U = identity(m)
    V = identity(n)

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for M in (A, V):
            for row in M:
                row[i], row[j] = row[j], row[i]

    def add_row(dst, src, c):
        for M in (A, U):
            rs, rd = M[src], M[dst]
            for k in range(len(rd)):
                rd[k] += c * rs[k]

    def add_col(dst, src, c):
        for M in (A, V):
            for row in M:
                row[dst] += c * row[src]

    for t in range(min(m, n)):
        while True:
            best = None
            for i in range(t, m):
                for j in range(t, n):
                    v = A[i][j]
                    if v and (best is None or abs(v) < abs(A[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                break
            swap_rows(t, best[0])
            swap_cols(t, best[1])
            p = A[t][t]
            clean = True
            for i in range(t + 1, m):
                if A[i][t]:
                    add_row(i, t, -(A[i][t] // p))
                    clean = clean and A[i][t] == 0
            for j in range(t + 1, n):
                if A[t][j]:
                    add_col(j, t, -(A[t][j] // p))
                    clean = clean and A[t][j] == 0
            if not clean:
                continue
            bad = next(
                (i for i in range(t + 1, m) for j in range(t + 1, n) if A[i][j] % p),
                None,
            )
            if bad is None:
                break
            add_row(t, bad, 1)
        if A[t][t] < 0:
            for M in (A, U):
                M[t] = [-v for v in M[t]]
    return A, U, V


def elementary_divisors(a):
    d, _, _ = smith_normal_form(a)
    return [d[i][i] for i in range(min(len(d), len(d[0]) if d else 0))]


def integer_kernel(a):
    """Basis (as columns) of the integer kernel {x in Z^n : A x = 0}.

    The kernel from the Smith form is automatically primitive (saturated).
    """
    n = len(a[0])
    d, _, v = smith_normal_form(a)
    rank = sum(1 for i in range(min(len(d), n)) if d[i][i])
    return [[v[i][j] for j in range(rank, n)] for i in range(n)]


def hermite_rows(rows):
    """Row-style Hermite normal form of an integer matrix (zero rows dropped)."""
    H = [list(map(int, r)) for r in rows]
    if not H:
        return H
    n = len(H[0])
    r = 0
    for c in range(n):
        if r >= len(H):
            break
        while True:
            nz = [i for i in range(r, len(H)) if H[i][c]]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(H[i][c]))
            H[r], H[piv] = H[piv], H[r]
            done = True
            for i in range(r + 1, len(H)):
                if H[i][c]:
                    q = H[i][c] // H[r][c]
                    H[i] = [x - q * y for x, y in zip(H[i], H[r])]
                    done = done and H[i][c] == 0
            if done:
                break
        if r < len(H) and H[r][c]:
            if H[r][c] < 0:
                H[r] = [-x for x in H[r]]
            for i in range(r):
                q = H[i][c] // H[r][c]
                if q:
                    H[i] = [x - q * y for x, y in zip(H[i], H[r])]
            r += 1
    return [row for row in H if any(row)]


def determinant(a):
    """Exact determinant by fraction-free Bareiss elimination."""
    M = [list(map(int, row)) for row in a]
    n = len(M)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if M[i][k]), None)
            if swap is None:
                return 0
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def inertia(a):
    """(positive, negative, zero) counts of a rational symmetric matrix.

    Symmetric Gaussian elimination over Q. When every remaining diagonal
    entry vanishes, a congruence e_i -> e_i + e_j makes one nonzero.
    """
    M = [[Fraction(x) for x in row] for row in a]
    pos = neg = 0
    while M:
        n = len(M)
        k = next((i for i in range(n) if M[i][i]), None)
        if k is None:
            off = next(((i, j) for i in range(n) for j in range(n) if M[i][j]), None)
            if off is None:
                return pos, neg, n
            i, j = off
            for c in range(n):
                M[i][c] += M[j][c]
            for r in range(n):
                M[r][i] += M[r][j]
            k = i
        p = M[k][k]
        if p > 0:
            pos += 1
        else:
            neg += 1
        rest = [i for i in range(n) if i != k]
        M = [[M[i][j] - M[i][k] * M[k][j] / p for j in rest] for i in rest]
    return pos, neg, 0


def solve_gf2(rows, rhs):
    """Solve A x = b over F2. Rows and x are bitmasks; returns (x, rank).

    Raises ValueError when inconsistent.
    """
    n = len(rows)
    aug = [(rows[i], rhs[i] & 1) for i in range(n)]
    pivots = []
    r = 0
    width = max((row.bit_length() for row in rows), default=0)
    for c in range(width):
        bit = 1 << c
        piv = next((i for i in range(r, n) if aug[i][0] & bit), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        pr, pb = aug[r]
        for i in range(n):
            if i != r and aug[i][0] & bit:
                aug[i] = (aug[i][0] ^ pr, aug[i][1] ^ pb)
        pivots.append(c)
        r += 1
    if any(row == 0 and b for row, b in aug[r:]):
        raise ValueError("inconsistent system over F2")
    x = 0
    for i, c in enumerate(pivots):
        if aug[i][1]:
            x |= 1 << c
    return x, r
