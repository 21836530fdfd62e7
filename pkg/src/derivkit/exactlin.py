"""Exact linear algebra over the rationals or a prime field.

Matrices are stored row-wise as dictionaries of nonzero entries.  Every
equality is exact; there is no floating point anywhere in this module.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd


class LinAlgError(ValueError):
    pass


class RationalField:
    """The field Q, elements are ``Fraction`` values."""

    name = "q"
    p = None

    def elem(self, x):
        if isinstance(x, Fraction):
            return x
        if isinstance(x, str):
            return Fraction(x.strip())
        return Fraction(x)

    def fmt(self, a):
        return f"{a.numerator}/{a.denominator}"

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("q")

    def __repr__(self):
        return "QQ"


class PrimeField:
    """Residues modulo a prime p, elements are ints in [0, p)."""

    def __init__(self, p):
        p = int(p)
        if p < 2 or any(p % d == 0 for d in range(2, int(p ** 0.5) + 1)):
            raise LinAlgError(f"{p} is not a prime")
        self.p = p
        self.name = f"fp:{p}"

    def elem(self, x):
        p = self.p
        if isinstance(x, str):
            x = Fraction(x.strip())
        if isinstance(x, Fraction):
            if x.denominator % p == 0:
                raise LinAlgError(f"denominator of {x} vanishes mod {p}")
            return x.numerator * pow(x.denominator, -1, p) % p
        return int(x) % p

    def fmt(self, a):
        return f"{a}/1"

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("fp", self.p))

    def __repr__(self):
        return f"GF({self.p})"


QQ = RationalField()


def GF(p):
    return PrimeField(p)


def parse_field(spec):
    """Parse ``q`` or ``fp:P``."""
    if spec in (None, "q", "Q", "QQ"):
        return QQ
    if isinstance(spec, str) and spec.startswith("fp:"):
        return PrimeField(int(spec[3:]))
    raise LinAlgError(f"unknown field {spec!r}")


def _addrow(acc, row, c, p):
    # acc += c * row, in place
    if p is None:
        for j, v in row.items():
            w = acc.get(j)
            if w is None:
                acc[j] = c * v
            else:
                w = w + c * v
                if w:
                    acc[j] = w
                else:
                    del acc[j]
    else:
        for j, v in row.items():
            w = (acc.get(j, 0) + c * v) % p
            if w:
                acc[j] = w
            else:
                acc.pop(j, None)


class QMatrix:
    """An exact matrix with ``rows`` x ``cols`` entries in ``field``."""

    __slots__ = ("rows", "cols", "field", "_r", "_hash")

    def __init__(self, rows, cols, data=None, field=QQ):
        self.rows = int(rows)
        self.cols = int(cols)
        self.field = field
        self._hash = None
        if data is None:
            self._r = tuple({} for _ in range(self.rows))
            return
        if isinstance(data, dict):
            r = [dict() for _ in range(self.rows)]
            for (i, j), v in data.items():
                v = field.elem(v)
                if v:
                    if not (0 <= i < self.rows and 0 <= j < self.cols):
                        raise LinAlgError("entry out of range")
                    r[i][j] = v
            self._r = tuple(r)
            return
        data = list(data)
        if len(data) != self.rows:
            raise LinAlgError("row count mismatch")
        r = []
        for row in data:
            row = list(row)
            if len(row) != self.cols:
                raise LinAlgError("column count mismatch")
            d = {}
            for j, v in enumerate(row):
                v = field.elem(v)
                if v:
                    d[j] = v
            r.append(d)
        self._r = tuple(r)

    @classmethod
    def _from_rows(cls, rows, cols, rowdicts, field):
        m = cls.__new__(cls)
        m.rows = rows
        m.cols = cols
        m.field = field
        m._r = tuple(rowdicts)
        m._hash = None
        return m

    # construction helpers
    @classmethod
    def zeros(cls, rows, cols, field=QQ):
        return cls(rows, cols, None, field)

    @classmethod
    def identity(cls, n, field=QQ):
        one = field.elem(1)
        return cls._from_rows(n, n, [{i: one} for i in range(n)], field)

    @classmethod
    def scalar(cls, n, c, field=QQ):
        c = field.elem(c)
        if not c:
            return cls.zeros(n, n, field)
        return cls._from_rows(n, n, [{i: c} for i in range(n)], field)

    @classmethod
    def from_columns(cls, cols, nrows, field=QQ):
        """Build from a list of column vectors (dicts or lists)."""
        r = [dict() for _ in range(nrows)]
        for j, col in enumerate(cols):
            items = col.items() if isinstance(col, dict) else enumerate(col)
            for i, v in items:
                v = field.elem(v)
                if v:
                    r[i][j] = v
        return cls._from_rows(nrows, len(cols), r, field)

    # access
    @property
    def shape(self):
        return (self.rows, self.cols)

    def row(self, i):
        return self._r[i]

    def entry(self, i, j):
        return self._r[i].get(j, self.field.elem(0))

    def to_lists(self):
        z = self.field.elem(0)
        return [[r.get(j, z) for j in range(self.cols)] for r in self._r]

    def nnz(self):
        return sum(len(r) for r in self._r)

    def column(self, j):
        return {i: r[j] for i, r in enumerate(self._r) if j in r}

    def columns(self):
        cs = [dict() for _ in range(self.cols)]
        for i, r in enumerate(self._r):
            for j, v in r.items():
                cs[j][i] = v
        return cs

    def is_zero(self):
        return not any(self._r)

    def __eq__(self, other):
        if not isinstance(other, QMatrix):
            return NotImplemented
        return self.shape == other.shape and self._r == other._r

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.rows, self.cols, tuple(tuple(sorted(r.items())) for r in self._r)))
        return self._hash

    def __repr__(self):
        body = "; ".join(" ".join(str(x) for x in row) for row in self.to_lists())
        return f"QMatrix({self.rows}x{self.cols}: [{body}])"

    # arithmetic
    def _check_field(self, other):
        if self.field != other.field:
            raise LinAlgError("field mismatch")

    def __matmul__(self, other):
        self._check_field(other)
        if self.cols != other.rows:
            raise LinAlgError(f"shape mismatch {self.shape} @ {other.shape}")
        p = self.field.p
        orows = other._r
        out = []
        for r in self._r:
            acc = {}
            for k, a in r.items():
                o = orows[k]
                if o:
                    _addrow(acc, o, a, p)
            out.append(acc)
        return QMatrix._from_rows(self.rows, other.cols, out, self.field)

    def __add__(self, other):
        self._check_field(other)
        if self.shape != other.shape:
            raise LinAlgError(f"shape mismatch {self.shape} + {other.shape}")
        p = self.field.p
        one = self.field.elem(1)
        out = []
        for a, b in zip(self._r, other._r):
            acc = dict(a)
            _addrow(acc, b, one, p)
            out.append(acc)
        return QMatrix._from_rows(self.rows, self.cols, out, self.field)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = self.field.elem(c)
        if not c:
            return QMatrix.zeros(self.rows, self.cols, self.field)
        p = self.field.p
        if p is None:
            out = [{j: c * v for j, v in r.items()} for r in self._r]
        else:
            out = [{j: c * v % p for j, v in r.items()} for r in self._r]
        return QMatrix._from_rows(self.rows, self.cols, out, self.field)

    @property
    def T(self):
        return QMatrix._from_rows(self.cols, self.rows, self.columns(), self.field)

    def apply(self, vec):
        """Multiply a vector given as a dict or list; returns a dict."""
        items = vec.items() if isinstance(vec, dict) else enumerate(vec)
        v = {i: self.field.elem(x) for i, x in items}
        p = self.field.p
        out = {}
        for i, r in enumerate(self._r):
            s = 0
            for j, a in r.items():
                x = v.get(j)
                if x:
                    s += a * x
            if p is not None:
                s %= p
            if s:
                out[i] = s
        return out

    def submatrix(self, rows=None, cols=None):
        ridx = range(self.rows) if rows is None else list(rows)
        if cols is None:
            out = [dict(self._r[i]) for i in ridx]
            return QMatrix._from_rows(len(out), self.cols, out, self.field)
        cols = list(cols)
        pos = {c: k for k, c in enumerate(cols)}
        out = []
        for i in ridx:
            r = self._r[i]
            out.append({pos[j]: v for j, v in r.items() if j in pos})
        return QMatrix._from_rows(len(out), len(cols), out, self.field)

    def to_json(self):
        f = self.field.fmt
        return [[f(x) for x in row] for row in self.to_lists()]

    @classmethod
    def from_json(cls, data, rows=None, cols=None, field=QQ):
        data = list(data)
        if rows is None:
            rows = len(data)
        if cols is None:
            cols = len(data[0]) if data else 0
        if rows == 0:
            return cls.zeros(0, cols, field)
        return cls(rows, cols, data, field)

    def convert(self, field):
        """Reinterpret the entries in another field."""
        if field == self.field:
            return self
        out = []
        for r in self._r:
            d = {}
            for j, v in r.items():
                w = field.elem(v)
                if w:
                    d[j] = w
            out.append(d)
        return QMatrix._from_rows(self.rows, self.cols, out, field)


def hstack(mats, rows=None, field=None):
    mats = list(mats)
    if not mats:
        return QMatrix.zeros(rows or 0, 0, field or QQ)
    field = mats[0].field
    rows = mats[0].rows
    out = [dict() for _ in range(rows)]
    off = 0
    for m in mats:
        if m.rows != rows:
            raise LinAlgError("hstack row mismatch")
        for i, r in enumerate(m._r):
            if r:
                o = out[i]
                for j, v in r.items():
                    o[j + off] = v
        off += m.cols
    return QMatrix._from_rows(rows, off, out, field)


def vstack(mats, cols=None, field=None):
    mats = list(mats)
    if not mats:
        return QMatrix.zeros(0, cols or 0, field or QQ)
    field = mats[0].field
    cols = mats[0].cols
    out = []
    for m in mats:
        if m.cols != cols:
            raise LinAlgError("vstack column mismatch")
        out.extend(dict(r) for r in m._r)
    return QMatrix._from_rows(len(out), cols, out, field)


def block_diag(mats, field=QQ):
    mats = list(mats)
    if mats:
        field = mats[0].field
    rows = sum(m.rows for m in mats)
    cols = sum(m.cols for m in mats)
    out = []
    off = 0
    for m in mats:
        for r in m._r:
            out.append({j + off: v for j, v in r.items()})
        off += m.cols
    return QMatrix._from_rows(rows, cols, out, field)


class BlockBuilder:
    """Accumulates a sparse matrix from blocks placed at offsets."""

    def __init__(self, rows, cols, field=QQ):
        self.rows = rows
        self.cols = cols
        self.field = field
        self._r = [dict() for _ in range(rows)]

    def add(self, roff, coff, m, sign=1):
        p = self.field.p
        if sign == 1:
            for i, r in enumerate(m._r):
                if r:
                    _addrow_shift(self._r[roff + i], r, coff, None, p)
        else:
            c = self.field.elem(sign)
            for i, r in enumerate(m._r):
                if r:
                    _addrow_shift(self._r[roff + i], r, coff, c, p)

    def add_entry(self, i, j, v):
        v = self.field.elem(v)
        acc = self._r[i]
        w = acc.get(j, 0) + v
        if self.field.p is not None:
            w %= self.field.p
        if w:
            acc[j] = w
        else:
            acc.pop(j, None)

    def build(self):
        return QMatrix._from_rows(self.rows, self.cols, self._r, self.field)


def _addrow_shift(acc, row, off, c, p):
    for j, v in row.items():
        if c is not None:
            v = c * v
        k = j + off
        w = acc.get(k)
        w = v if w is None else w + v
        if p is not None:
            w %= p
        if w:
            acc[k] = w
        else:
            acc.pop(k, None)


# --- elimination -------------------------------------------------------------


def _lcm(a, b):
    return a * b // gcd(a, b)


def _primitive_int_row(row):
    """Scale a row of Fractions to a primitive integer row."""
    den = reduce(_lcm, (v.denominator for v in row.values()), 1)
    r = {j: int(v * den) for j, v in row.items()}
    g = reduce(gcd, r.values(), 0)
    if g > 1:
        r = {j: v // g for j, v in r.items()}
    return r


def _rank_rational(rows):
    """Fraction-free elimination over Z with content removal."""
    pivots = {}
    for row in rows:
        if not row:
            continue
        r = _primitive_int_row(row)
        while r:
            c = min(r)
            prow = pivots.get(c)
            if prow is None:
                pivots[c] = r
                break
            a = prow[c]
            b = r[c]
            g = gcd(a, b)
            a //= g
            b //= g
            new = {}
            for j, v in r.items():
                new[j] = a * v
            for j, v in prow.items():
                w = new.get(j, 0) - b * v
                if w:
                    new[j] = w
                else:
                    new.pop(j, None)
            if new:
                g = reduce(gcd, new.values(), 0)
                if g > 1:
                    new = {j: v // g for j, v in new.items()}
            r = new
    return len(pivots)


def _rank_modp(rows, p):
    pivots = {}
    for row in rows:
        r = dict(row)
        while r:
            c = min(r)
            prow = pivots.get(c)
            if prow is None:
                inv = pow(r[c], -1, p)
                pivots[c] = {j: v * inv % p for j, v in r.items()}
                break
            _addrow(r, prow, (-r[c]) % p, p)
    return len(pivots)


def rank(M):
    """Rank of M, computed exactly."""
    rows = M._r
    if M.rows > M.cols:
        rows = M.columns()
    if M.field.p is None:
        return _rank_rational(rows)
    return _rank_modp(rows, M.field.p)


def _rref(M):
    """Reduced row echelon form data: (pivot column list, pivot rows dict)."""
    field = M.field
    p = field.p
    pivots = {}
    for row in M._r:
        r = dict(row)
        while r:
            c = min(r)
            prow = pivots.get(c)
            if prow is None:
                if p is None:
                    inv = 1 / r[c]
                    pivots[c] = {j: v * inv for j, v in r.items()}
                else:
                    inv = pow(r[c], -1, p)
                    pivots[c] = {j: v * inv % p for j, v in r.items()}
                break
            _addrow(r, prow, -r[c] if p is None else (-r[c]) % p, p)
    order = sorted(pivots)
    # back substitution, from the last pivot upward
    for idx in range(len(order) - 1, -1, -1):
        c = order[idx]
        prow = pivots[c]
        for c2 in order[:idx]:
            r2 = pivots[c2]
            v = r2.get(c)
            if v:
                _addrow(r2, prow, -v if p is None else (-v) % p, p)
    return order, pivots


def kernel(M):
    """Columns form a basis of the kernel of M (deterministic)."""
    order, pivots = _rref(M)
    pset = set(order)
    free = [j for j in range(M.cols) if j not in pset]
    field = M.field
    p = field.p
    one = field.elem(1)
    cols = []
    for f in free:
        v = {f: one}
        for c in order:
            x = pivots[c].get(f)
            if x:
                v[c] = -x if p is None else (-x) % p
        cols.append(v)
    return QMatrix.from_columns(cols, M.cols, field)


def image(M):
    """Columns form a basis of the image of M: the pivot columns of M."""
    order, _ = _rref(M)
    return M.submatrix(None, order)


def solve_space(M, which):
    if which == "kernel":
        return kernel(M)
    if which == "image":
        return image(M)
    raise LinAlgError(f"unknown space {which!r}")


def is_iso(M):
    return M.rows == M.cols and rank(M) == M.rows


def solve(M, b):
    """Some exact x with M x = b, or None.  b is a list or dict; x is a list."""
    field = M.field
    p = field.p
    items = b.items() if isinstance(b, dict) else enumerate(b)
    bb = {i: field.elem(x) for i, x in items}
    bb = {i: x for i, x in bb.items() if x}
    aug = QMatrix._from_rows(
        M.rows, M.cols + 1,
        [{**r, M.cols: bb[i]} if i in bb else dict(r) for i, r in enumerate(M._r)],
        field,
    )
    order, pivots = _rref(aug)
    if M.cols in pivots:
        return None
    x = [field.elem(0)] * M.cols
    for c in order:
        x[c] = pivots[c].get(M.cols, field.elem(0))
    return x


def solve_matrix(M, B):
    """Some exact X with M X = B, or None if some column is unsolvable."""
    field = M.field
    p = field.p
    k = B.cols
    rows = []
    for i in range(M.rows):
        r = dict(M._r[i])
        for j, v in B._r[i].items():
            r[M.cols + j] = v
        rows.append(r)
    aug = QMatrix._from_rows(M.rows, M.cols + k, rows, field)
    order, pivots = _rref(aug)
    if any(c >= M.cols for c in order):
        return None
    out = [dict() for _ in range(M.cols)]
    for c in order:
        for j, v in pivots[c].items():
            if j >= M.cols:
                out[c][j - M.cols] = v
    return QMatrix._from_rows(M.cols, k, out, field)


def inverse(M):
    if not is_iso(M):
        raise LinAlgError("matrix is not invertible")
    return solve_matrix(M, QMatrix.identity(M.rows, M.field))


def complement_basis(B, n):
    """Standard basis vectors extending the column span of B to all of F^n.

    Returns the list of chosen standard indices (greedy, ascending)."""
    field = B.field
    p = field.p
    pivots = {}

    def insert(r):
        while r:
            c = min(r)
            prow = pivots.get(c)
            if prow is None:
                if p is None:
                    inv = 1 / r[c]
                    pivots[c] = {j: v * inv for j, v in r.items()}
                else:
                    inv = pow(r[c], -1, p)
                    pivots[c] = {j: v * inv % p for j, v in r.items()}
                return True
            _addrow(r, prow, -r[c] if p is None else (-r[c]) % p, p)
        return False

    for col in B.columns():
        insert(dict(col))
    chosen = []
    one = field.elem(1)
    for i in range(n):
        if insert({i: one}):
            chosen.append(i)
    return chosen


def quotient_data(R, n):
    """For relations R (columns in F^n), return (pi, sigma) with
    pi: F^n -> F^n / im R surjective, pi R = 0, and sigma a section (pi sigma = 1)."""
    field = R.field
    extra = complement_basis(R, n)
    basis = image(R) if R.cols else QMatrix.zeros(n, 0, field)
    one = field.elem(1)
    E = QMatrix.from_columns([{i: one} for i in extra], n, field)
    full = hstack([basis, E]) if basis.cols else E
    inv = inverse(full) if n else QMatrix.zeros(0, 0, field)
    pi = inv.submatrix(range(basis.cols, n), None)
    return pi, E


def extend_basis(B, C):
    """Indices of columns of C that, taken greedily, extend the span of B."""
    field = B.field
    p = field.p
    pivots = {}

    def insert(r):
        r = dict(r)
        while r:
            c = min(r)
            prow = pivots.get(c)
            if prow is None:
                if p is None:
                    inv = 1 / r[c]
                    pivots[c] = {j: v * inv for j, v in r.items()}
                else:
                    inv = pow(r[c], -1, p)
                    pivots[c] = {j: v * inv % p for j, v in r.items()}
                return True
            _addrow(r, prow, -r[c] if p is None else (-r[c]) % p, p)
        return False

    for col in B.columns():
        insert(col)
    return [j for j, col in enumerate(C.columns()) if insert(col)]


def left_inverse(M):
    """L with L M = 1 for M of full column rank."""
    if M.cols == 0:
        return QMatrix.zeros(0, M.rows, M.field)
    X = solve_matrix(M.T, QMatrix.identity(M.cols, M.field))
    if X is None:
        raise LinAlgError("matrix does not have full column rank")
    return X.T
