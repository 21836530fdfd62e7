"""Independent reference computations used to cross-check the package.

Nothing here imports derivkit.  Matrices are dense lists of Fractions,
complexes are (dims, diff) dicts with diff[n] a dims[n-1] x dims[n] matrix.
"""

from fractions import Fraction
from itertools import combinations, product


def dense(rows):
    return [[Fraction(x) for x in r] for r in rows]


def rank(M):
    A = [list(r) for r in M]
    if not A or not A[0]:
        return 0
    rk, cols = 0, len(A[0])
    for c in range(cols):
        piv = next((i for i in range(rk, len(A)) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[rk], A[piv] = A[piv], A[rk]
        for i in range(len(A)):
            if i != rk and A[i][c] != 0:
                t = A[i][c] / A[rk][c]
                A[i] = [a - t * b for a, b in zip(A[i], A[rk])]
        rk += 1
    return rk


def matmul(A, B, inner=None):
    if not A:
        return []
    n = len(B[0]) if B else 0
    k = len(B) if inner is None else inner
    return [[sum((A[i][t] * B[t][j] for t in range(k)), Fraction(0)) for j in range(n)]
            for i in range(len(A))]


def zeros(r, c):
    return [[Fraction(0)] * c for _ in range(r)]


def homology_dims(dims, diff):
    """dim H_n = dim C_n - rank d_n - rank d_{n+1}."""
    out = {}
    for n, k in dims.items():
        r_out = rank(diff[n]) if n in diff and k else 0
        r_in = rank(diff[n + 1]) if n + 1 in diff and dims.get(n + 1, 0) else 0
        h = k - r_out - r_in
        if h:
            out[n] = h
    return out


def cone(dimX, diffX, dimY, diffY, f):
    """Cone_n = X_{n-1} + Y_n with d(x, y) = (-dx, f x + dy)."""
    degs = set(dimY) | {n + 1 for n in dimX}
    dims = {n: dimX.get(n - 1, 0) + dimY.get(n, 0) for n in degs}
    diff = {}
    for n in degs:
        if n - 1 not in dims:
            continue
        a, b = dimX.get(n - 1, 0), dimY.get(n, 0)
        a2, b2 = dimX.get(n - 2, 0), dimY.get(n - 1, 0)
        D = zeros(a2 + b2, a + b)
        dx = diffX.get(n - 1)
        dy = diffY.get(n)
        fx = f.get(n - 1)
        for i in range(a2):
            for j in range(a):
                D[i][j] = -dx[i][j] if dx else Fraction(0)
        for i in range(b2):
            for j in range(a):
                D[a2 + i][j] = fx[i][j] if fx else Fraction(0)
            for j in range(b):
                D[a2 + i][a + j] = dy[i][j] if dy else Fraction(0)
        diff[n] = D
    return dims, diff


def homology_map_rank(dimX, diffX, dimY, diffY, f, n):
    """Rank of H_n(f) = dim(f(Z_n X) + B_n Y) - dim B_n Y."""
    ZX = kernel(diffX.get(n), dimX.get(n, 0))
    cols = [matvec(f[n], z) for z in ZX] if n in f else []
    B = columns(diffY[n + 1]) if n + 1 in diffY else []
    return rank_cols(cols + B, dimY.get(n, 0)) - rank_cols(B, dimY.get(n, 0))


def columns(M):
    if not M:
        return []
    return [[M[i][j] for i in range(len(M))] for j in range(len(M[0]))]


def rank_cols(cols, n):
    if not cols or n == 0:
        return 0
    return rank([[c[i] for c in cols] for i in range(n)])


def matvec(M, v):
    return [sum((a * b for a, b in zip(row, v)), Fraction(0)) for row in M]


def kernel(M, ncols):
    """Basis of the kernel of M (None means the zero map)."""
    if M is None or not M:
        return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    A = [list(r) for r in M]
    pivots = []
    rk = 0
    for c in range(ncols):
        piv = next((i for i in range(rk, len(A)) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[rk], A[piv] = A[piv], A[rk]
        A[rk] = [x / A[rk][c] for x in A[rk]]
        for i in range(len(A)):
            if i != rk and A[i][c] != 0:
                t = A[i][c]
                A[i] = [a - t * b for a, b in zip(A[i], A[rk])]
        pivots.append(c)
        rk += 1
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fcol in free:
        v = [Fraction(0)] * ncols
        v[fcol] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -A[r][fcol]
        basis.append(v)
    return basis


# --- order theory ------------------------------------------------------------------------------


def closure(labels, pairs):
    le = {(a, a) for a in labels} | set(pairs)
    changed = True
    while changed:
        changed = False
        for (a, b), (c, d) in product(list(le), list(le)):
            if b == c and (a, d) not in le:
                le.add((a, d))
                changed = True
    return le


def strict_chains(labels, le, length):
    """Strictly increasing chains with ``length`` + 1 elements."""
    out = []
    for combo in combinations(labels, length + 1):
        for perm in _orders(list(combo), le):
            out.append(tuple(perm))
    return out


def _orders(items, le):
    if len(items) <= 1:
        yield items
        return
    for i, x in enumerate(items):
        rest = items[:i] + items[i + 1:]
        if all((x, y) in le for y in rest):
            for tail in _orders(rest, le):
                yield [x] + tail


def hocolim_euler_dims(labels, le, dims_at):
    """Total dimension per degree of the hocolim replacement of a diagram of
    vector spaces in degree 0: sum over n-chains of dim at the first element."""
    out = {}
    n = 0
    while True:
        ch = strict_chains(labels, le, n)
        if not ch:
            break
        out[n] = sum(dims_at[c[0]] for c in ch)
        n += 1
    return out


def les_exact(ranks_and_dims):
    """A cyclic sequence of maps V_0 -> V_1 -> ... is exact at every joint iff
    rank(in) + rank(out) = dim at each term."""
    return all(r_in + r_out == d for r_in, d, r_out in ranks_and_dims)
