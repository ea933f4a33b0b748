"""Exact integer and rational matrix routines.

Everything here runs on arbitrary-precision Python ints and Fractions;
no floating point is used anywhere.  Matrices are lists (or tuples) of
rows.  All functions are pure: inputs are never mutated.
"""

from __future__ import annotations

from fractions import Fraction

IntMat = list[list[int]]


def egcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with g = gcd(a, b) = x*a + y*b and g >= 0."""
    x, nx = 1, 0
    y, ny = 0, 1
    g, ng = a, b
    while ng:
        q = g // ng
        x, nx = nx, x - q * nx
        y, ny = ny, y - q * ny
        g, ng = ng, g - q * ng
    if g < 0:
        g, x, y = -g, -x, -y
    return g, x, y


def copy_mat(m) -> IntMat:
    return [list(row) for row in m]


def identity(n: int) -> IntMat:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def transpose(m) -> list[list]:
    return [list(col) for col in zip(*m)]


def mat_mul(a, b) -> list[list]:
    bt = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def mat_vec(m, v) -> list:
    return [sum(x * y for x, y in zip(row, v)) for row in m]


def det_int(m) -> int:
    """Determinant of an integer matrix by fraction-free (Bareiss) elimination."""
    n = len(m)
    a = copy_mat(m)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def signature(gram) -> tuple[int, int]:
    """Signature (n_plus, n_minus) of a nondegenerate symmetric integer matrix.

    Computed by exact congruent diagonalization over the rationals.
    """
    n = len(gram)
    a = [[Fraction(x) for x in row] for row in gram]
    pos = neg = 0
    for i in range(n):
        if a[i][i] == 0:
            piv = next((j for j in range(i + 1, n) if a[j][j] != 0), None)
            if piv is not None:
                a[i], a[piv] = a[piv], a[i]
                for row in a:
                    row[i], row[piv] = row[piv], row[i]
            else:
                j = next((j for j in range(i + 1, n) if a[i][j] != 0), None)
                if j is None:
                    raise ValueError("degenerate symmetric matrix")
                for k in range(n):
                    a[i][k] += a[j][k]
                for row in a:
                    row[i] += row[j]
        d = a[i][i]
        if d > 0:
            pos += 1
        else:
            neg += 1
        for j in range(i + 1, n):
            if a[j][i] != 0:
                f = a[j][i] / d
                for k in range(n):
                    a[j][k] -= f * a[i][k]
                for row in a:
                    row[j] -= f * row[i]
    return pos, neg


def smith_normal_form(m) -> tuple[IntMat, IntMat, IntMat]:
    """Smith normal form of an integer matrix.

    Returns (d, u, v) with u*m*v = d, u and v unimodular, d diagonal with
    nonnegative entries satisfying d[0] | d[1] | ...
    """
    a = copy_mat(m)
    rows, cols = len(a), len(a[0])
    u = identity(rows)
    v = identity(cols)

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def addmul_row(dst, src, c):
        a[dst] = [x + c * y for x, y in zip(a[dst], a[src])]
        u[dst] = [x + c * y for x, y in zip(u[dst], u[src])]

    def addmul_col(dst, src, c):
        for row in a:
            row[dst] += c * row[src]
        for row in v:
            row[dst] += c * row[src]

    t = 0
    while t < min(rows, cols):
        # pivot: smallest nonzero entry in the remaining block
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                if a[i][j] != 0 and (best is None or abs(a[i][j]) < abs(a[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        while True:
            dirty = False
            for i in range(t + 1, rows):
                if a[i][t] % a[t][t] != 0:
                    dirty = True
                addmul_row(i, t, -(a[i][t] // a[t][t]))
            for j in range(t + 1, cols):
                if a[t][j] % a[t][t] != 0:
                    dirty = True
                addmul_col(j, t, -(a[t][j] // a[t][t]))
            nzr = next((i for i in range(t + 1, rows) if a[i][t] != 0), None)
            nzc = next((j for j in range(t + 1, cols) if a[t][j] != 0), None)
            if nzr is not None:
                swap_rows(t, nzr)
                continue
            if nzc is not None:
                swap_cols(t, nzc)
                continue
            if not dirty:
                # pivot must divide every remaining entry
                bad = next(((i, j) for i in range(t + 1, rows) for j in range(t + 1, cols)
                            if a[i][j] % a[t][t] != 0), None)
                if bad is None:
                    break
                addmul_row(t, bad[0], 1)
                continue
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
        t += 1
    return a, u, v


def invariant_factors(m) -> list[int]:
    """Diagonal of the Smith normal form, nonzero entries only."""
    d, _, _ = smith_normal_form(m)
    return [d[i][i] for i in range(min(len(d), len(d[0]))) if d[i][i] != 0]


def hnf_rows(rows, ncols: int | None = None) -> list[list[int]]:
    """Canonical (row-style Hermite) basis of the integer row span.

    Pivots are positive, entries above each pivot are reduced into
    [0, pivot).  Zero input yields an empty list.
    """
    work = [list(r) for r in rows if any(r)]
    if not work:
        return []
    n = ncols if ncols is not None else len(work[0])
    by_pivot: dict[int, list[int]] = {}
    for vec in work:
        v = list(vec)
        while any(v):
            j = next(i for i, x in enumerate(v) if x != 0)
            b = by_pivot.get(j)
            if b is None:
                by_pivot[j] = v
                break
            g, s, t = egcd(b[j], v[j])
            bj, vj = b[j] // g, v[j] // g
            by_pivot[j] = [s * x + t * y for x, y in zip(b, v)]
            v = [bj * y - vj * x for x, y in zip(b, v)]
    basis = [by_pivot[j] for j in sorted(by_pivot)]
    # normalize: positive pivots, reduce entries above each pivot
    for b in basis:
        j = next(i for i, x in enumerate(b) if x != 0)
        if b[j] < 0:
            b[:] = [-x for x in b]
    for i in range(len(basis)):
        for k in range(i + 1, len(basis)):
            j = next(c for c, x in enumerate(basis[k]) if x != 0)
            q = basis[i][j] // basis[k][j]
            if q:
                basis[i] = [x - q * y for x, y in zip(basis[i], basis[k])]
    return basis


def kernel_int(m) -> list[list[int]]:
    """Basis (rows) of the saturated right kernel {x : m @ x = 0}."""
    rows, cols = len(m), len(m[0])
    d, _, v = smith_normal_form(m)
    rank = sum(1 for i in range(min(rows, cols)) if d[i][i] != 0)
    vt = transpose(v)
    return [vt[j] for j in range(rank, cols)]


def saturate_rows(rows, ncols: int) -> list[list[int]]:
    """Saturation (primitive closure) of an integer row span inside Z^ncols."""
    basis = hnf_rows(rows, ncols)
    if not basis:
        return []
    orth = kernel_int(basis)
    if not orth:
        return hnf_rows(identity(ncols))
    return hnf_rows(kernel_int(orth), ncols)


def frac_inverse(m) -> list[list[Fraction]]:
    """Exact inverse of a nonsingular integer (or Fraction) matrix."""
    n = len(m)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(m)]
    for i in range(n):
        piv = next((r for r in range(i, n) if a[r][i] != 0), None)
        if piv is None:
            raise ValueError("singular matrix")
        a[i], a[piv] = a[piv], a[i]
        d = a[i][i]
        a[i] = [x / d for x in a[i]]
        for r in range(n):
            if r != i and a[r][i] != 0:
                f = a[r][i]
                a[r] = [x - f * y for x, y in zip(a[r], a[i])]
    return [row[n:] for row in a]


def int_inverse_unimodular(m) -> IntMat:
    """Inverse of a unimodular integer matrix, as an integer matrix."""
    inv = frac_inverse(m)
    out = [[int(x) for x in row] for row in inv]
    if any(Fraction(out[i][j]) != inv[i][j] for i in range(len(m)) for j in range(len(m))):
        raise ValueError("matrix is not unimodular")
    return out


def lll_gram(gram, delta: Fraction = Fraction(3, 4)) -> tuple[IntMat, IntMat]:
    """Exact LLL reduction driven by the Gram matrix alone.

    The input must be definite (all-positive or all-negative diagonal after
    reduction).  Returns (g2, t) with t unimodular and t * gram * t^T = g2.
    Rows of t are the reduced basis in the original coordinates.  GSO data
    is maintained incrementally in exact rational arithmetic.
    """
    n = len(gram)
    neg = all(gram[i][i] < 0 for i in range(n))
    g = [[-x for x in row] for row in gram] if neg else copy_mat(gram)
    t = identity(n)
    if n == 1:
        return copy_mat(gram), t

    # initial GSO: mu (strictly lower) and squared lengths b of the GS vectors
    mu = [[Fraction(0)] * n for _ in range(n)]
    b = [Fraction(0)] * n
    for i in range(n):
        b[i] = Fraction(g[i][i])
        for j in range(i):
            mu[i][j] = Fraction(g[i][j])
            for k in range(j):
                mu[i][j] -= mu[i][k] * mu[j][k] * b[k]
            mu[i][j] /= b[j]
            b[i] -= mu[i][j] ** 2 * b[j]
        if b[i] <= 0:
            raise ValueError("matrix is not definite")

    def red(k, j):
        q = round(mu[k][j])
        if not q:
            return
        for c in range(n):
            g[k][c] -= q * g[j][c]
        for c in range(n):
            g[c][k] -= q * g[c][j]
        t[k] = [x - q * y for x, y in zip(t[k], t[j])]
        mu[k][j] -= q
        for i in range(j):
            mu[k][i] -= q * mu[j][i]

    k = 1
    while k < n:
        red(k, k - 1)
        if b[k] >= (delta - mu[k][k - 1] ** 2) * b[k - 1]:
            for j in range(k - 2, -1, -1):
                red(k, j)
            k += 1
        else:
            g[k], g[k - 1] = g[k - 1], g[k]
            for row in g:
                row[k], row[k - 1] = row[k - 1], row[k]
            t[k], t[k - 1] = t[k - 1], t[k]
            m = mu[k][k - 1]
            bp = b[k] + m * m * b[k - 1]
            for j in range(k - 1):
                mu[k - 1][j], mu[k][j] = mu[k][j], mu[k - 1][j]
            mu[k][k - 1] = m * b[k - 1] / bp
            b[k] = b[k - 1] * b[k] / bp
            b[k - 1] = bp
            for i in range(k + 1, n):
                tt = mu[i][k]
                mu[i][k] = mu[i][k - 1] - m * tt
                mu[i][k - 1] = tt + mu[k][k - 1] * mu[i][k]
            k = max(k - 1, 1)
    if neg:
        g = [[-x for x in row] for row in g]
    return g, t


def enumerate_up_to(gram, bound: int):
    """All nonzero x with x^T gram x <= bound, one per +-pair (gram positive definite).

    Canonical choice: first nonzero coordinate positive.  Exact rational
    Fincke-Pohst; yields (vector, norm) in no particular order.
    """
    n = len(gram)
    q = [[Fraction(x) for x in row] for row in gram]
    for i in range(n):
        if q[i][i] <= 0:
            raise ValueError("matrix is not positive definite")
        for j in range(i + 1, n):
            q[j][i] = q[i][j]
            q[i][j] = q[i][j] / q[i][i]
        for r in range(i + 1, n):
            for c in range(r, n):
                q[r][c] -= q[r][i] * q[i][c]
    x = [0] * n
    out = []

    def dfs(i, budget):
        # budget = remaining bound for levels 0..i
        center = -sum(q[i][j] * x[j] for j in range(i + 1, n))
        qi = q[i][i]
        x0 = round(center)
        for start, step in ((x0, 1), (x0 - 1, -1)):
            xi = start
            while True:
                val = qi * (xi - center) ** 2
                if val > budget:
                    break
                x[i] = xi
                if i == 0:
                    if any(x):
                        v = tuple(x)
                        # canonical representative of {v, -v}
                        first = next(c for c in v if c)
                        if first < 0:
                            v = tuple(-c for c in v)
                        nrm = sum(v[a] * gram[a][b] * v[b] for a in range(n) for b in range(n))
                        out.append((v, nrm))
                else:
                    dfs(i - 1, budget - val)
                xi += step
        x[i] = 0

    dfs(n - 1, Fraction(bound))
    # each +-pair appears twice (once per sign branch); dedupe
    seen = set()
    uniq = []
    for v, nrm in out:
        if v not in seen:
            seen.add(v)
            uniq.append((v, nrm))
    return uniq
