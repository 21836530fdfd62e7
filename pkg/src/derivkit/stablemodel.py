"""Bounded rational chain complexes over finite posets.

Homotopy Kan extensions are the normalized Bousfield-Kan (co)simplicial
replacements, computed pointwise over the slices of the functor.

Sign convention.  For a diagram X over a poset P the homotopy colimit has a
summand X_{x0} in total degree n + p for every strict chain x0 < ... < xn and
every internal degree p, with differential

    D(s, x) = sum_i (-1)^i (d_i s, x_i) + (-1)^n (s, dx)

where d_0 pushes x along x0 -> x1 and d_i (i >= 1) drops x_i.  Dually the
homotopy limit has a summand X_{xn} in degree p - n, with D = (-1)^n d + delta
and (delta c)(t) = sum_i (-1)^i c(d_i t), the last face being pushed along
t_n -> t_{n+1}.  The classical mapping cone is Cone(f)_n = X_{n-1} + Y_n with
d(x, y) = (-dx, fx + dy); the fiber is Cone(f)[-1].
"""

from __future__ import annotations

from . import exactlin as el
from .exactlin import QMatrix, QQ
from . import fincat as fc
from .fincat import FinPoset, FunctorData, chain, nerve_chains


class StableModelError(ValueError):
    pass


class InvariantError(StableModelError):
    pass


class NotMonotone(StableModelError):
    pass


class WrongShape(StableModelError):
    pass


class NotASieve(StableModelError):
    pass


class NotACosieve(StableModelError):
    pass


class CompositionMismatch(StableModelError):
    pass


# --- complexes ---------------------------------------------------------------------------


class Complex:
    """A bounded complex of finite-dimensional spaces, d_n: C_n -> C_{n-1}."""

    def __init__(self, dims, diff=None, field=QQ, check=True):
        self.field = field
        self.dims = {int(n): int(k) for n, k in dict(dims).items() if int(k)}
        self.diff = {}
        for n, M in dict(diff or {}).items():
            n = int(n)
            if not M.is_zero():
                self.diff[n] = M
        self._hom = None
        self._acyc = None
        if check:
            self.validate()

    def dim(self, n):
        return self.dims.get(n, 0)

    def d(self, n):
        M = self.diff.get(n)
        if M is None:
            return QMatrix.zeros(self.dim(n - 1), self.dim(n), self.field)
        return M

    @property
    def degrees(self):
        return sorted(self.dims)

    @property
    def window(self):
        if not self.dims:
            return (0, -1)
        return (min(self.dims), max(self.dims))

    def total_dim(self):
        return sum(self.dims.values())

    def is_zero(self):
        return not self.dims

    def validate(self):
        for n, M in self.diff.items():
            if M.shape != (self.dim(n - 1), self.dim(n)):
                raise InvariantError(f"differential in degree {n} has shape {M.shape}")
        for n in self.diff:
            if n - 1 in self.diff and not (self.diff[n - 1] @ self.diff[n]).is_zero():
                raise InvariantError(f"d o d is not zero in degree {n}")

    def shift(self, k):
        """X[k]: X[k]_n = X_{n-k}, differential (-1)^k d."""
        s = -1 if k % 2 else 1
        return Complex({n + k: v for n, v in self.dims.items()},
                       {n + k: (M if s == 1 else -M) for n, M in self.diff.items()},
                       self.field, check=False)

    def __eq__(self, other):
        return (isinstance(other, Complex) and self.dims == other.dims
                and self.diff == other.diff)

    def __hash__(self):
        return hash(tuple(sorted(self.dims.items())))

    def __repr__(self):
        return f"Complex(dims={dict(sorted(self.dims.items()))})"

    def to_json(self):
        lo, hi = self.window
        return {"window": [lo, hi],
                "dims": {str(n): k for n, k in sorted(self.dims.items())},
                "diff": {str(n): M.to_json() for n, M in sorted(self.diff.items())}}

    @classmethod
    def from_json(cls, doc, field=QQ):
        dims = {int(n): int(k) for n, k in doc.get("dims", {}).items()}
        lo, hi = doc.get("window", [0, -1])
        for n in dims:
            if dims[n] and not (lo <= n <= hi):
                raise InvariantError(f"degree {n} lies outside the window")
        diff = {}
        for n, data in doc.get("diff", {}).items():
            n = int(n)
            diff[n] = QMatrix.from_json(data, dims.get(n - 1, 0), dims.get(n, 0), field)
        return cls(dims, diff, field)

    @classmethod
    def zero(cls, field=QQ):
        return cls({}, {}, field)

    @classmethod
    def point(cls, degree=0, dim=1, field=QQ):
        """Q^dim concentrated in one degree."""
        return cls({degree: dim}, {}, field)


class ChainMap:
    """A chain map, given by its matrices in each degree."""

    def __init__(self, source, target, comps=None, check=True):
        self.source = source
        self.target = target
        self.comps = {}
        for n, M in dict(comps or {}).items():
            if not M.is_zero():
                self.comps[int(n)] = M
        if check:
            self.validate()

    def at(self, n):
        M = self.comps.get(n)
        if M is None:
            return QMatrix.zeros(self.target.dim(n), self.source.dim(n), self.source.field)
        return M

    def validate(self):
        X, Y = self.source, self.target
        for n, M in self.comps.items():
            if M.shape != (Y.dim(n), X.dim(n)):
                raise InvariantError(f"chain map component in degree {n} has shape {M.shape}")
        degs = set(X.dims) | set(Y.dims)
        for n in degs:
            if Y.d(n) @ self.at(n) != self.at(n - 1) @ X.d(n):
                raise InvariantError(f"chain map does not commute with d in degree {n}")

    def then(self, other):
        """other . self"""
        return ChainMap(self.source, other.target,
                        {n: other.at(n) @ M for n, M in self.comps.items()}, check=False)

    def __add__(self, other):
        degs = set(self.comps) | set(other.comps)
        return ChainMap(self.source, self.target, {n: self.at(n) + other.at(n) for n in degs},
                        check=False)

    def __neg__(self):
        return ChainMap(self.source, self.target, {n: -M for n, M in self.comps.items()},
                        check=False)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return ChainMap(self.source, self.target, {n: M.scale(c) for n, M in self.comps.items()},
                        check=False)

    def is_zero(self):
        return not self.comps

    def __eq__(self, other):
        return (isinstance(other, ChainMap) and self.source == other.source
                and self.target == other.target and self.comps == other.comps)

    def __hash__(self):
        return hash((self.source, self.target))

    def __repr__(self):
        return f"ChainMap({self.source!r} -> {self.target!r})"

    def to_json(self):
        return {"source": self.source.to_json(), "target": self.target.to_json(),
                "maps": {str(n): M.to_json() for n, M in sorted(self.comps.items())}}

    @classmethod
    def from_json(cls, doc, field=QQ):
        X = Complex.from_json(doc["source"], field)
        Y = Complex.from_json(doc["target"], field)
        comps = {int(n): QMatrix.from_json(m, Y.dim(int(n)), X.dim(int(n)), field)
                 for n, m in doc.get("maps", {}).items()}
        return cls(X, Y, comps)

    @classmethod
    def identity(cls, X):
        return cls(X, X, {n: QMatrix.identity(k, X.field) for n, k in X.dims.items()},
                   check=False)

    @classmethod
    def zero(cls, X, Y):
        return cls(X, Y, {}, check=False)


def shift_map(f, k):
    """f[k], with the same matrices in shifted degrees."""
    return ChainMap(f.source.shift(k), f.target.shift(k),
                    {n + k: M for n, M in f.comps.items()}, check=False)


def direct_sum(complexes):
    """Direct sum with the inclusions and projections."""
    complexes = list(complexes)
    field = complexes[0].field if complexes else QQ
    degs = sorted(set().union(*[set(c.dims) for c in complexes])) if complexes else []
    dims = {n: sum(c.dim(n) for c in complexes) for n in degs}
    diff = {n: el.block_diag([c.d(n) for c in complexes], field) for n in degs}
    S = Complex(dims, diff, field, check=False)
    incs, projs = [], []
    for idx, c in enumerate(complexes):
        inc, proj = {}, {}
        for n in c.dims:
            off = sum(complexes[t].dim(n) for t in range(idx))
            k = c.dim(n)
            inc[n] = _embed(dims[n], off, k, field)
            proj[n] = inc[n].T
        incs.append(ChainMap(c, S, inc, check=False))
        projs.append(ChainMap(S, c, proj, check=False))
    return S, incs, projs


def _embed(n, off, k, field):
    one = field.elem(1)
    rows = [dict() for _ in range(n)]
    for i in range(k):
        rows[off + i][i] = one
    return QMatrix._from_rows(n, k, rows, field)


def classical_cone(f):
    """Cone(f)_n = X_{n-1} + Y_n, d(x, y) = (-dx, fx + dy).

    Returns (cone, inclusion Y -> cone, projection cone -> X[1])."""
    X, Y = f.source, f.target
    F = X.field
    degs = sorted(set(n + 1 for n in X.dims) | set(Y.dims))
    dims = {n: X.dim(n - 1) + Y.dim(n) for n in degs}
    diff = {}
    for n in degs:
        bb = el.BlockBuilder(X.dim(n - 2) + Y.dim(n - 1), dims[n], F)
        bb.add(0, 0, X.d(n - 1), -1)
        bb.add(X.dim(n - 2), 0, f.at(n - 1))
        bb.add(X.dim(n - 2), X.dim(n - 1), Y.d(n))
        diff[n] = bb.build()
    C = Complex(dims, diff, F, check=False)
    inc = ChainMap(Y, C, {n: _embed(dims[n], X.dim(n - 1), Y.dim(n), F) for n in Y.dims},
                   check=False)
    X1 = X.shift(1)
    proj = ChainMap(C, X1, {n: _embed(dims[n], 0, X.dim(n - 1), F).T for n in X1.dims},
                    check=False)
    return C, inc, proj


def classical_fiber(f):
    """Fib(f)_n = X_n + Y_{n+1}, d(x, y) = (dx, -fx - dy); returns (fib, projection to X)."""
    X, Y = f.source, f.target
    F = X.field
    degs = sorted(set(X.dims) | set(n - 1 for n in Y.dims))
    dims = {n: X.dim(n) + Y.dim(n + 1) for n in degs}
    diff = {}
    for n in degs:
        bb = el.BlockBuilder(X.dim(n - 1) + Y.dim(n), dims[n], F)
        bb.add(0, 0, X.d(n))
        bb.add(X.dim(n - 1), 0, f.at(n), -1)
        bb.add(X.dim(n - 1), X.dim(n), Y.d(n + 1), -1)
        diff[n] = bb.build()
    Fb = Complex(dims, diff, F, check=False)
    proj = ChainMap(Fb, X, {n: _embed(dims[n], 0, X.dim(n), F).T for n in X.dims}, check=False)
    return Fb, proj


def cone_functoriality(f, f2, alpha, beta):
    """Cone(f) -> Cone(f2) induced by a strictly commuting square beta f = f2 alpha."""
    C1, _, _ = classical_cone(f)
    C2, _, _ = classical_cone(f2)
    comps = {}
    for n in C1.dims:
        comps[n] = el.block_diag([alpha.at(n - 1), beta.at(n)], C1.field)
    return ChainMap(C1, C2, comps)


def fiber_functoriality(f, f2, alpha, beta):
    F1, _ = classical_fiber(f)
    F2, _ = classical_fiber(f2)
    comps = {n: el.block_diag([alpha.at(n), beta.at(n + 1)], F1.field) for n in F1.dims}
    return ChainMap(F1, F2, comps)


# --- homology ------------------------------------------------------------------------------


class GradedDims(dict):
    """Homology dimensions by degree; only nonzero entries are stored."""

    def __init__(self, data=()):
        super().__init__({int(n): int(k) for n, k in dict(data).items() if int(k)})

    def __repr__(self):
        return "H{" + ", ".join(f"{n}: {k}" for n, k in sorted(self.items())) + "}"

    def to_json(self):
        return {str(n): k for n, k in sorted(self.items())}


class _HomologyData:
    """Deterministic homology bases: boundaries first, then a greedy choice of cycles."""

    def __init__(self, X):
        self.X = X
        self.reps = {}
        self._coord = {}
        self._bd = {}
        for n in X.degrees:
            Z = el.kernel(X.d(n))
            Bd = el.image(X.d(n + 1))
            idx = el.extend_basis(Bd, Z)
            R = Z.submatrix(None, idx)
            self.reps[n] = R
            self._bd[n] = Bd
        self.dims = GradedDims({n: R.cols for n, R in self.reps.items()})

    def rep(self, n):
        R = self.reps.get(n)
        if R is None:
            return QMatrix.zeros(self.X.dim(n), 0, self.X.field)
        return R

    def coords(self, n, V):
        """Coordinates in the homology basis of the cycles given as columns of V."""
        R = self.rep(n)
        if R.cols == 0:
            return QMatrix.zeros(0, V.cols, self.X.field)
        L = self._coord.get(n)
        if L is None:
            Bd = self._bd[n]
            M = el.hstack([Bd, R]) if Bd.cols else R
            L = el.left_inverse(M).submatrix(range(Bd.cols, Bd.cols + R.cols), None)
            self._coord[n] = L
        return L @ V


def _hdata(X):
    if X._hom is None:
        X._hom = _HomologyData(X)
    return X._hom


def homology(X):
    return _hdata(X).dims


def homology_map(f, degrees=None):
    """Per-degree matrices of H(f) in the deterministic homology bases."""
    hs, ht = _hdata(f.source), _hdata(f.target)
    if degrees is None:
        degrees = sorted(set(hs.dims) | set(ht.dims))
    out = {}
    for n in degrees:
        R = hs.rep(n)
        out[n] = ht.coords(n, f.at(n) @ R) if R.cols else QMatrix.zeros(ht.dims.get(n, 0), 0,
                                                                         f.source.field)
    return out


_CERT_PRIME = 2147483647


def _acyclic_over(X, field):
    for n in X.degrees:
        a = el.rank(X.d(n).convert(field)) if field != X.field else el.rank(X.d(n))
        b = el.rank(X.d(n + 1).convert(field)) if field != X.field else el.rank(X.d(n + 1))
        if a + b != X.dim(n):
            return False
    return True


def is_acyclic(X):
    """All homology vanishes.

    A large-prime computation is tried first: acyclicity mod p implies
    acyclicity over Q (ranks can only drop mod p, and d o d = 0 bounds the
    sum of ranks by the dimension).  Otherwise the exact check over Q decides."""
    if X._acyc is not None:
        return X._acyc
    res = None
    if X.field == QQ:
        try:
            if _acyclic_over(X, el.GF(_CERT_PRIME)):
                res = True
        except el.LinAlgError:
            pass
    if res is None:
        res = _acyclic_over(X, X.field)
    X._acyc = res
    return res


def is_quasi_iso(f):
    """True iff f induces isomorphisms on homology (cone acyclic)."""
    C, _, _ = classical_cone(f)
    return is_acyclic(C)


def is_quasi_iso_by_homology(f):
    """Same predicate through homology matrices; an independent route."""
    H = homology_map(f)
    return all(el.is_iso(M) for M in H.values())


def homology_inverse(f):
    """Inverses of the homology isomorphisms of a quasi-isomorphism."""
    return {n: el.inverse(M) for n, M in homology_map(f).items()}


def shift_identification(X, k=1):
    """H_n(X[k]) -> H_{n-k}(X) in the chosen bases."""
    Xk = X.shift(k)
    hk, h = _hdata(Xk), _hdata(X)
    return {n: h.coords(n - k, hk.rep(n)) for n in sorted(set(hk.dims) | {m + k for m in h.dims})}


class Contraction:
    """Splitting data s, p with d s + s d = 1 - p and p the projection onto
    homology representatives."""

    def __init__(self, X):
        self.X = X
        F = X.field
        self.s = {}
        self.p = {}
        self.hc = {}
        for n in X.degrees:
            dn1 = X.d(n + 1)
            piv_next = el._rref(dn1)[0]
            Bd = dn1.submatrix(None, piv_next)
            R = _hdata(X).rep(n)
            piv_here = el._rref(X.d(n))[0]
            E = QMatrix.from_columns([{j: F.elem(1)} for j in piv_here], X.dim(n), F)
            parts = [m for m in (Bd, R, E) if m.cols]
            M = el.hstack(parts) if parts else QMatrix.zeros(X.dim(n), 0, F)
            Minv = el.inverse(M)
            b, r = Bd.cols, R.cols
            coordB = Minv.submatrix(range(0, b), None)
            coordR = Minv.submatrix(range(b, b + r), None)
            En = QMatrix.from_columns([{j: F.elem(1)} for j in piv_next], X.dim(n + 1), F)
            self.s[n] = En @ coordB
            self.p[n] = R @ coordR
            self.hc[n] = coordR

    def s_at(self, n):
        M = self.s.get(n)
        return M if M is not None else QMatrix.zeros(self.X.dim(n + 1), self.X.dim(n), self.X.field)

    def p_at(self, n):
        M = self.p.get(n)
        return M if M is not None else QMatrix.zeros(self.X.dim(n), self.X.dim(n), self.X.field)


def nullhomotopy(phi):
    """H with phi = dH + Hd (H_n: A_n -> B_{n+1}), or None if H(phi) != 0."""
    if any(not M.is_zero() for M in homology_map(phi).values()):
        return None
    A, B = phi.source, phi.target
    cA, cB = Contraction(A), Contraction(B)
    H = {}
    for n in A.degrees:
        term = cB.s_at(n) @ phi.at(n)
        term2 = cB.p_at(n + 1) @ phi.at(n + 1) @ cA.s_at(n)
        H[n] = term + term2
    for n in set(A.degrees) | set(B.degrees):
        lhs = phi.at(n)
        Hn = H.get(n, QMatrix.zeros(B.dim(n + 1), A.dim(n), A.field))
        Hm = H.get(n - 1, QMatrix.zeros(B.dim(n), A.dim(n - 1), A.field))
        if lhs != B.d(n + 1) @ Hn + Hm @ A.d(n):
            raise InvariantError("nullhomotopy construction failed")
    return H


# --- zigzag witnesses -------------------------------------------------------------------


class QuasiIsoWitness:
    """A zigzag of chain maps between two complexes, each step a quasi-isomorphism.

    steps: list of (map, +1 | -1); +1 means the map points towards the target."""

    def __init__(self, name, steps):
        self.name = name
        self.steps = list(steps)
        m0, d0 = self.steps[0]
        self.source = m0.source if d0 > 0 else m0.target
        cur = self.source
        for m, d in self.steps:
            a, b = (m.source, m.target) if d > 0 else (m.target, m.source)
            if a is not cur and a != cur:
                raise InvariantError(f"zigzag {name} does not compose")
            cur = b
        self.target = cur

    def verify(self):
        return all(is_quasi_iso(m) for m, _ in self.steps)

    def homology_iso(self):
        """Per-degree matrices H_n(source) -> H_n(target)."""
        degs = set(homology(self.source)) | set(homology(self.target))
        out = None
        for m, d in self.steps:
            H = homology_map(m, sorted(degs | set(homology(m.source)) | set(homology(m.target))))
            if d < 0:
                H = {n: el.inverse(M) for n, M in H.items()}
            out = H if out is None else {n: H[n] @ out[n] for n in out}
        return {n: out[n] for n in sorted(degs)}

    def to_json(self):
        return {"name": self.name,
                "steps": [{"direction": d, "map": m.to_json()} for m, d in self.steps]}


# --- diagrams -------------------------------------------------------------------------------


class ChainDiagram:
    """A strict diagram of complexes over a finite poset.

    ``maps`` may give the cover relations only; the remaining relations are
    filled in by composition and every composite is re-checked."""

    def __init__(self, shape, values, maps, check=True):
        self.shape = shape
        self.values = {x: values[x] for x in shape.elements}
        field = next(iter(self.values.values())).field if self.values else QQ
        self.field = field
        full = {}
        for (a, b), m in dict(maps).items():
            if a != b:
                full[(a, b)] = m
        rel = shape.relations()
        if any(r not in full for r in rel):
            full = self._close(full)
        self.maps = full
        if check:
            self.validate()

    def _close(self, known):
        P = self.shape
        # fill in by increasing distance along covers
        order = sorted(P.relations(), key=lambda r: len(_longest_path(P, r[0], r[1])))
        for a, b in order:
            if (a, b) in known:
                continue
            mids = [c for c in P.elements if c != a and c != b and P.le(a, c) and P.le(c, b)]
            done = False
            for c in mids:
                if (a, c) in known and (c, b) in known:
                    known[(a, b)] = known[(a, c)].then(known[(c, b)])
                    done = True
                    break
            if not done:
                raise InvariantError(f"no map given for {a} <= {b}")
        return known

    def value(self, x):
        return self.values[x]

    def map(self, a, b):
        if a == b:
            return ChainMap.identity(self.values[a])
        return self.maps[(a, b)]

    def validate(self):
        P = self.shape
        for (a, b), m in self.maps.items():
            if not P.lt(a, b):
                raise InvariantError(f"map given for unrelated pair {a}, {b}")
            if m.source != self.values[a] or m.target != self.values[b]:
                raise InvariantError(f"map {a}->{b} has wrong endpoints")
            m.validate()
        for a, b in P.relations():
            for c in P.elements:
                if c not in (a, b) and P.le(a, c) and P.le(c, b):
                    if self.maps[(a, c)].then(self.maps[(c, b)]) != self.maps[(a, b)]:
                        raise InvariantError(f"square {a} -> {c} -> {b} does not commute")

    def restrict(self, u):
        """u* X along a monotone map u into this shape."""
        if u.target != self.shape:
            raise WrongShape("functor does not land in the diagram's shape")
        J = u.source
        vals = {j: self.values[u(j)] for j in J.elements}
        maps = {}
        for a, b in J.relations():
            ua, ub = u(a), u(b)
            maps[(a, b)] = self.map(ua, ub) if ua != ub else ChainMap.identity(vals[a])
        return ChainDiagram(J, vals, maps, check=False)

    def __eq__(self, other):
        return (isinstance(other, ChainDiagram) and self.shape == other.shape
                and self.values == other.values
                and all(self.map(a, b) == other.map(a, b) for a, b in self.shape.relations()))

    def __repr__(self):
        return f"ChainDiagram({ {x: c.dims for x, c in self.values.items()} })"

    def to_json(self):
        P = self.shape
        return {"shape": P.to_json(),
                "complexes": {x: self.values[x].to_json() for x in P.elements},
                "maps": {f"{a}->{b}": {str(n): M.to_json() for n, M in sorted(self.maps[(a, b)].comps.items())}
                         for a, b in P.covers()}}

    @classmethod
    def from_json(cls, doc, field=QQ):
        P = FinPoset.from_json(doc["shape"])
        vals = {x: Complex.from_json(doc["complexes"][x], field) for x in P.elements}
        maps = {}
        covers = set(P.covers())
        for key, comps in doc.get("maps", {}).items():
            a, b = key.split("->")
            if (a, b) not in covers:
                raise InvariantError(f"{key} is not a cover relation")
            X, Y = vals[a], vals[b]
            maps[(a, b)] = ChainMap(X, Y, {int(n): QMatrix.from_json(m, Y.dim(int(n)), X.dim(int(n)), field)
                                           for n, m in comps.items()})
        return cls(P, vals, maps)


def _longest_path(P, a, b):
    return [x for x in P.elements if P.le(a, x) and P.le(x, b)]


def zero_diagram(shape, field=QQ):
    Z = Complex.zero(field)
    return ChainDiagram(shape, {x: Z for x in shape.elements},
                        {r: ChainMap.zero(Z, Z) for r in shape.relations()}, check=False)


def lift_morphism(f):
    """The diagram on [1] with edge f."""
    return ChainDiagram(chain(1), {"0": f.source, "1": f.target}, {("0", "1"): f})


def lift_chain(maps):
    """The diagram on [n] for composable chain maps."""
    n = len(maps)
    for a, b in zip(maps, maps[1:]):
        if a.target != b.source:
            raise CompositionMismatch("maps are not composable")
    vals = {"0": maps[0].source}
    for i, m in enumerate(maps):
        vals[str(i + 1)] = m.target
    return ChainDiagram(chain(n), vals, {(str(i), str(i + 1)): m for i, m in enumerate(maps)})


class DiagramMap:
    """A natural transformation of chain diagrams on the same shape."""

    def __init__(self, source, target, comps, check=True):
        self.source, self.target = source, target
        self.comps = dict(comps)
        if check:
            self.validate()

    def validate(self):
        for x in self.source.shape.elements:
            c = self.comps[x]
            c.validate()
        for a, b in self.source.shape.relations():
            if self.source.map(a, b).then(self.comps[b]) != self.comps[a].then(self.target.map(a, b)):
                raise InvariantError(f"naturality fails at {a} <= {b}")

    def is_levelwise_quasi_iso(self):
        return all(is_quasi_iso(c) for c in self.comps.values())


# --- (co)simplicial replacement ------------------------------------------------------------


class Replacement:
    """Total complex of the normalized replacement of X over a full subposet."""

    def __init__(self, X, elements, kind):
        if kind not in ("hocolim", "holim"):
            raise ValueError(f"unknown replacement {kind!r}")
        self.X = X
        self.kind = kind
        P = X.shape.sub(elements)
        self.P = P
        self.chains = []
        n = 0
        while True:
            ch = nerve_chains(P, n)
            if not ch:
                break
            self.chains.extend(ch)
            n += 1
        field = X.field
        self.field = field
        # blocks per total degree
        self.blocks = {}
        self.index = {}
        for s in self.chains:
            ln = len(s) - 1
            V = X.values[s[0] if kind == "hocolim" else s[-1]]
            for p, k in sorted(V.dims.items()):
                m = p + ln if kind == "hocolim" else p - ln
                lst = self.blocks.setdefault(m, [])
                off = sum(b[2] for b in lst)
                lst.append((s, p, k))
                self.index[(s, p)] = (m, off, k)
        dims = {m: sum(b[2] for b in lst) for m, lst in self.blocks.items()}
        builders = {m: el.BlockBuilder(dims.get(m - 1, 0), dims[m], field) for m in dims}
        if kind == "hocolim":
            self._build_hocolim(builders)
        else:
            self._build_holim(builders)
        diff = {m: b.build() for m, b in builders.items()}
        self.total = Complex(dims, diff, field, check=False)

    def _build_hocolim(self, builders):
        X = self.X
        for (s, p), (m, off, k) in self.index.items():
            n = len(s) - 1
            bb = builders[m]
            V = X.values[s[0]]
            if n >= 1:
                t = s[1:]
                tgt = self.index.get((t, p))
                if tgt is not None:
                    bb.add(tgt[1], off, X.map(s[0], s[1]).at(p))
                for i in range(1, n + 1):
                    t = s[:i] + s[i + 1:]
                    tgt = self.index.get((t, p))
                    if tgt is not None:
                        bb.add(tgt[1], off, QMatrix.identity(k, self.field), -1 if i % 2 else 1)
            tgt = self.index.get((s, p - 1))
            if tgt is not None:
                bb.add(tgt[1], off, V.d(p), -1 if n % 2 else 1)

    def _build_holim(self, builders):
        X = self.X
        for (s, p), (m, off, k) in self.index.items():
            n = len(s) - 1
            V = X.values[s[-1]]
            tgt = self.index.get((s, p - 1))
            if tgt is not None:
                builders[m].add(tgt[1], off, V.d(p), -1 if n % 2 else 1)
        # coboundary, organized by the longer chain t
        for t in self.chains:
            n1 = len(t) - 1
            if n1 < 1:
                continue
            Vt = X.values[t[-1]]
            for p in Vt.dims:
                tgt = self.index.get((t, p))
                if tgt is None:
                    continue
                for i in range(n1 + 1):
                    s = t[:i] + t[i + 1:]
                    Vs = X.values[s[-1]]
                    src = self.index.get((s, p))
                    if src is None:
                        continue
                    if i == n1:
                        M = X.map(t[-2], t[-1]).at(p)
                    else:
                        M = QMatrix.identity(Vs.dim(p), self.field)
                    builders[src[0]].add(tgt[1], src[1], M, -1 if i % 2 else 1)

    # elementary maps ----------------------------------------------------------

    def _vertex_matrix(self, x, p, transpose=False):
        V = self.X.values[x]
        loc = self.index.get(((x,), p))
        m = p
        n = self.total.dim(m)
        if loc is None:
            M = QMatrix.zeros(n, V.dim(p), self.field)
        else:
            M = _embed(n, loc[1], loc[2], self.field)
        return M.T if transpose else M

    def insertion(self, x):
        """X_x -> hocolim at the 0-chain (x)."""
        if self.kind != "hocolim":
            raise ValueError("insertion is defined for homotopy colimits")
        V = self.X.values[x]
        return ChainMap(V, self.total, {p: self._vertex_matrix(x, p) for p in V.dims}, check=False)

    def projection(self, x):
        """holim -> X_x at the 0-chain (x)."""
        if self.kind != "holim":
            raise ValueError("projection is defined for homotopy limits")
        V = self.X.values[x]
        return ChainMap(self.total, V, {p: self._vertex_matrix(x, p, True) for p in V.dims},
                        check=False)

    def augmentation(self, cocone, target):
        """hocolim -> target from compatible maps X_x -> target (0-chains only)."""
        comps = {}
        for m, lst in self.blocks.items():
            bb = el.BlockBuilder(target.dim(m), self.total.dim(m), self.field)
            off = 0
            for s, p, k in lst:
                if len(s) == 1:
                    bb.add(0, off, cocone[s[0]].at(p))
                off += k
            comps[m] = bb.build()
        return ChainMap(self.total, target, comps, check=False)

    def coaugmentation(self, cone, source):
        """source -> holim from compatible maps source -> X_x (0-chains only)."""
        comps = {}
        for m, lst in self.blocks.items():
            bb = el.BlockBuilder(self.total.dim(m), source.dim(m), self.field)
            off = 0
            for s, p, k in lst:
                if len(s) == 1:
                    bb.add(off, 0, cone[s[0]].at(p))
                off += k
            comps[m] = bb.build()
        return ChainMap(source, self.total, comps, check=False)

    def induced(self, other, phi, theta=None):
        """Map of total complexes along a monotone map of index posets.

        hocolim: phi maps self.P -> other.P and theta[x]: X_x -> Y_phi(x).
        holim:   phi maps other.P -> self.P and theta[y]: X_phi(y) -> Y_y.
        Degenerate image chains contribute zero (normalized chains)."""
        F = self.field
        comps = {}
        if self.kind == "hocolim":
            builders = {}
            for (s, p), (m, off, k) in self.index.items():
                t = tuple(phi[x] for x in s)
                if len(set(t)) != len(t):
                    continue
                loc = other.index.get((t, p))
                if loc is None:
                    continue
                M = theta[s[0]].at(p) if theta is not None else QMatrix.identity(k, F)
                bb = builders.get(m)
                if bb is None:
                    bb = builders[m] = el.BlockBuilder(other.total.dim(m), self.total.dim(m), F)
                bb.add(loc[1], off, M)
            comps = {m: b.build() for m, b in builders.items()}
        else:
            builders = {}
            for (t, p), (m, off, k) in other.index.items():
                s = tuple(phi[y] for y in t)
                if len(set(s)) != len(s):
                    continue
                loc = self.index.get((s, p))
                if loc is None:
                    continue
                M = theta[t[-1]].at(p) if theta is not None else QMatrix.identity(k, F)
                bb = builders.get(m)
                if bb is None:
                    bb = builders[m] = el.BlockBuilder(other.total.dim(m), self.total.dim(m), F)
                bb.add(off, loc[1], M)
            comps = {m: b.build() for m, b in builders.items()}
        return ChainMap(self.total, other.total, comps, check=False)


def _as_poset_map(u):
    if not isinstance(u, FunctorData) or not u.is_poset_map:
        raise NotMonotone("homotopy Kan extensions need a map of posets")
    try:
        u.validate()
    except fc.FincatError as exc:
        raise NotMonotone(str(exc)) from None
    return u


class HKan:
    """u_! X (side left) or u_* X (side right) with the pointwise replacements."""

    def __init__(self, u, X, side, check=True):
        u = _as_poset_map(u)
        if u.source != X.shape:
            raise WrongShape("diagram does not live on the source of u")
        self.u, self.X, self.side = u, X, side
        J, K = u.source, u.target
        self.rep = {}
        for k in K.elements:
            if side == "left":
                els = [j for j in J.elements if K.le(u(j), k)]
                self.rep[k] = Replacement(X, els, "hocolim")
            elif side == "right":
                els = [j for j in J.elements if K.le(k, u(j))]
                self.rep[k] = Replacement(X, els, "holim")
            else:
                raise ValueError(f"unknown side {side!r}")
        vals = {k: self.rep[k].total for k in K.elements}
        maps = {}
        for a, b in K.relations():
            ra, rb = self.rep[a], self.rep[b]
            if side == "left":
                maps[(a, b)] = ra.induced(rb, {x: x for x in ra.P.elements})
            else:
                maps[(a, b)] = ra.induced(rb, {x: x for x in rb.P.elements})
        self.result = ChainDiagram(K, vals, maps, check=check)

    def apply(self, phi, other):
        """The levelwise map self.result -> other.result induced by phi: X -> X'."""
        comps = {}
        for k in self.u.target.elements:
            a, b = self.rep[k], other.rep[k]
            ident = {x: x for x in (a.P.elements if self.side == "left" else b.P.elements)}
            comps[k] = a.induced(b, ident, phi.comps)
        return DiagramMap(self.result, other.result, comps, check=False)


def hkan(u, X, side):
    return HKan(u, X, side).result


def hoKanExt_point(P, X, side):
    """(total complex, structure maps) of hocolim or holim of X over all of P."""
    if X.shape != P:
        raise WrongShape("diagram shape differs from P")
    kind = {"hocolim": "hocolim", "holim": "holim", "left": "hocolim", "right": "holim"}[side]
    R = Replacement(X, P.elements, kind)
    if kind == "hocolim":
        legs = {x: R.insertion(x) for x in P.elements}
    else:
        legs = {x: R.projection(x) for x in P.elements}
    return R.total, legs


# --- squares ----------------------------------------------------------------------------------


BOX = fc.product(chain(1), chain(1))
PUSH = BOX.sub(["0,0", "1,0", "0,1"])
PULL = BOX.sub(["1,0", "0,1", "1,1"])


def _square_status(Q):
    Rp = Replacement(Q, ["0,0", "1,0", "0,1"], "hocolim")
    top = Q.values["1,1"]
    aug = Rp.augmentation({x: Q.map(x, "1,1") for x in ["0,0", "1,0", "0,1"]}, top)
    Rl = Replacement(Q, ["1,0", "0,1", "1,1"], "holim")
    bot = Q.values["0,0"]
    coaug = Rl.coaugmentation({x: Q.map("0,0", x) for x in ["1,0", "0,1", "1,1"]}, bot)
    return aug, coaug


def cocartesian_status(Q):
    """coCartesian: hocolim over the corner -> Q(1,1) is a quasi-iso; cartesian dually."""
    if Q.shape != BOX:
        raise WrongShape("cocartesian_status needs a diagram on [1]x[1]")
    aug, coaug = _square_status(Q)
    return {"coCartesian": is_quasi_iso(aug), "cartesian": is_quasi_iso(coaug)}


def square_embedding(D, corners):
    """Restrict D along [1]x[1] -> shape with images of (0,0),(1,0),(0,1),(1,1)."""
    u = FunctorData(BOX, D.shape, dict(zip(["0,0", "1,0", "0,1", "1,1"], corners)))
    return D.restrict(u)


def square_status(D, corners):
    return cocartesian_status(square_embedding(D, corners))


def is_bicartesian(D, corners):
    s = square_status(D, corners)
    return s["coCartesian"] and s["cartesian"]


# --- suspension, loops, cones, fibers ---------------------------------------------------------


def _point_diagram(V, label="*"):
    return ChainDiagram(fc.terminal_poset(label), {label: V}, {}, check=False)


def _point_map(P, x):
    return FunctorData(fc.terminal_poset(), P, {"*": x})


def suspension(X):
    """Sigma X = (1,1)* (i_push)_! (0,0)_* X."""
    A = HKan(_point_map(PUSH, "0,0"), _point_diagram(X), "right")
    B = HKan(fc.inclusion(PUSH, BOX), A.result, "left")
    return B.result.values["1,1"]


def loop(X):
    """Omega X = (0,0)* (i_pull)_* (1,1)_! X."""
    A = HKan(_point_map(PULL, "1,1"), _point_diagram(X), "left")
    B = HKan(fc.inclusion(PULL, BOX), A.result, "right")
    return B.result.values["0,0"]


def _corner_diagram(values, labels, P, maps):
    return ChainDiagram(P, dict(zip(labels, values)), maps, check=False)


def suspension_data(X):
    """Sigma X with its corner replacement, for identifications."""
    Z = Complex.zero(X.field)
    W = ChainDiagram(PUSH, {"0,0": X, "1,0": Z, "0,1": Z},
                     {("0,0", "1,0"): ChainMap.zero(X, Z), ("0,0", "0,1"): ChainMap.zero(X, Z)},
                     check=False)
    R = Replacement(W, PUSH.elements, "hocolim")
    return R


def suspension_map(f):
    """Sigma f."""
    RA, RB = suspension_data(f.source), suspension_data(f.target)
    theta = {"0,0": f, "1,0": ChainMap.zero(RA.X.values["1,0"], RB.X.values["1,0"]),
             "0,1": ChainMap.zero(RA.X.values["0,1"], RB.X.values["0,1"])}
    return RA.induced(RB, {x: x for x in PUSH.elements}, theta)


def sigma_projection(X, which="b"):
    """Sigma X -> X[1], keeping the summand of the chain (0,0) < (0,1) (or (1,0) for "a")."""
    R = suspension_data(X)
    key = ("0,0", "0,1") if which == "b" else ("0,0", "1,0")
    X1 = X.shift(1)
    comps = {}
    for p in X.dims:
        loc = R.index[(key, p)]
        comps[p + 1] = _embed(R.total.dim(p + 1), loc[1], loc[2], X.field).T
    return ChainMap(R.total, X1, comps)


def sigma_homology_iso(X):
    """H_n(Sigma X) -> H_{n-1}(X), through sigma_projection."""
    pb = sigma_projection(X)
    H = homology_map(pb)
    sh = shift_identification(X, 1)
    return {n: sh[n] @ H[n] for n in H}


def loop_data(X):
    Z = Complex.zero(X.field)
    W = ChainDiagram(PULL, {"1,0": Z, "0,1": Z, "1,1": X},
                     {("1,0", "1,1"): ChainMap.zero(Z, X), ("0,1", "1,1"): ChainMap.zero(Z, X)},
                     check=False)
    return Replacement(W, PULL.elements, "holim")


def loop_map(f):
    RA, RB = loop_data(f.source), loop_data(f.target)
    theta = {"1,1": f, "1,0": ChainMap.zero(RA.X.values["1,0"], RB.X.values["1,0"]),
             "0,1": ChainMap.zero(RA.X.values["0,1"], RB.X.values["0,1"])}
    return RA.induced(RB, {x: x for x in PULL.elements}, theta)


def cone_projection(R, a, b, c):
    """For a corner replacement over {a < b, a < c} with X_c = 0, the chain map
    hocolim -> Cone(X_a -> X_b) keeping (b) and (a < b)."""
    X = R.X
    g = X.map(a, b)
    C, _, _ = classical_cone(g)
    A, B = X.values[a], X.values[b]
    F = R.field
    comps = {}
    for m in R.total.dims:
        bb = el.BlockBuilder(C.dim(m), R.total.dim(m), F)
        loc = R.index.get(((b,), m))
        if loc is not None:
            bb.add(A.dim(m - 1), loc[1], QMatrix.identity(loc[2], F))
        loc = R.index.get(((a, b), m - 1))
        if loc is not None:
            bb.add(0, loc[1], QMatrix.identity(loc[2], F))
        comps[m] = bb.build()
    return ChainMap(R.total, C, comps)


def fiber_projection(R, a, b, c):
    """For a corner replacement over {a < c, b < c} with X_b = 0, the chain map
    holim -> Fib(X_a -> X_c), (c(a), c(a<c) - c(b<c))."""
    X = R.X
    g = X.map(a, c)
    Fb, _ = classical_fiber(g)
    A = X.values[a]
    F = R.field
    comps = {}
    for m in R.total.dims:
        bb = el.BlockBuilder(Fb.dim(m), R.total.dim(m), F)
        loc = R.index.get(((a,), m))
        if loc is not None:
            bb.add(0, loc[1], QMatrix.identity(loc[2], F))
        loc = R.index.get(((a, c), m + 1))
        if loc is not None:
            bb.add(A.dim(m), loc[1], QMatrix.identity(loc[2], F))
        loc = R.index.get(((b, c), m + 1))
        if loc is not None:
            bb.add(A.dim(m), loc[1], QMatrix.identity(loc[2], F), -1)
        comps[m] = bb.build()
    return ChainMap(R.total, Fb, comps)


class ConeResult:
    """C(f) with the canonical map Y -> C(f) and an identification with the
    classical cone."""

    def __init__(self, f):
        self.f = f
        I = chain(1)
        i = FunctorData(I, PUSH, {"0": "0,0", "1": "1,0"})
        W = HKan(i, lift_morphism(f), "right")
        T = HKan(fc.inclusion(PUSH, BOX), W.result, "left")
        self.W, self.T = W, T
        vert = FunctorData(I, BOX, {"0": "1,0", "1": "1,1"})
        self.diagram = T.result.restrict(vert)
        self.C = T.result.values["1,1"]
        insY = T.rep["1,0"].insertion("1,0")
        self.g = insY.then(T.result.map("1,0", "1,1"))
        # identification with the classical cone of f
        H = W.result.values["0,0"]
        kappa = W.rep["0,0"].coaugmentation({"0": ChainMap.identity(f.source), "1": f}, f.source)
        gW = W.result.map("0,0", "1,0")
        psi = cone_projection(T.rep["1,1"], "0,0", "1,0", "0,1")
        up = cone_functoriality(f, gW, kappa, ChainMap.identity(f.target))
        self.witness = QuasiIsoWitness("C(f) ~ Cone(f)", [(up, 1), (psi, -1)])
        self.kappa = kappa
        self.H = H


class FiberResult:
    def __init__(self, f):
        self.f = f
        I = chain(1)
        j = FunctorData(I, PULL, {"0": "1,0", "1": "1,1"})
        W = HKan(j, lift_morphism(f), "left")
        T = HKan(fc.inclusion(PULL, BOX), W.result, "right")
        self.W, self.T = W, T
        hor = FunctorData(I, BOX, {"0": "0,0", "1": "1,0"})
        self.diagram = T.result.restrict(hor)
        self.F = T.result.values["0,0"]
        toX = _hocolim_point_value(W.rep["1,0"], "0", f.source)
        self.p = T.result.map("0,0", "1,0").then(T.rep["1,0"].projection("1,0")).then(toX)
        aug = W.rep["1,1"].augmentation({"0": f, "1": ChainMap.identity(f.target)}, f.target)
        pi = fiber_projection(T.rep["0,0"], "1,0", "0,1", "1,1")
        gW = W.result.map("1,0", "1,1")
        down = fiber_functoriality(gW, f, _hocolim_point_value(W.rep["1,0"], "0", f.source), aug)
        self.witness = QuasiIsoWitness("F(f) ~ Fib(f)", [(pi, 1), (down, 1)])


def _hocolim_point_value(R, x, V):
    """hocolim over a one-element poset {x} is X_x itself; the identification map."""
    if len(R.P) != 1:
        raise StableModelError("expected a one-point replacement")
    return R.augmentation({x: ChainMap.identity(V)}, V)


def pointed_functor(kind, arg):
    if kind == "suspension":
        return suspension_map(arg) if isinstance(arg, ChainMap) else suspension(arg)
    if kind == "loop":
        return loop_map(arg) if isinstance(arg, ChainMap) else loop(arg)
    if kind == "cone":
        r = ConeResult(arg)
        return r.C, r.g
    if kind == "fiber":
        r = FiberResult(arg)
        return r.F, r.p
    raise ValueError(f"unknown pointed functor {kind!r}")


# --- identifications inside Kan extension diagrams --------------------------------------


def sigma_square_witness(HK, corners, name="Sigma"):
    """Sigma D_a ~ D_d for a biCartesian square (a, b, c, d) of HK.result whose
    off-corners b, c are acyclic.

    Zigzag: Sigma D_a <- hocolim of D over the corner -> D_d."""
    D = HK.result if isinstance(HK, HKan) else HK
    a, b, c, d = corners
    Q = square_embedding(D, corners)
    Rq = Replacement(Q, ["0,0", "1,0", "0,1"], "hocolim")
    aug = Rq.augmentation({x: Q.map(x, "1,1") for x in ["0,0", "1,0", "0,1"]}, Q.values["1,1"])
    A = D.values[a]
    Rs = suspension_data(A)
    Zb, Zc = Rs.X.values["1,0"], Rs.X.values["0,1"]
    theta = {"0,0": ChainMap.identity(A), "1,0": ChainMap.zero(Q.values["1,0"], Zb),
             "0,1": ChainMap.zero(Q.values["0,1"], Zc)}
    r = Rq.induced(Rs, {x: x for x in PUSH.elements}, theta)
    return QuasiIsoWitness(name, [(r, -1), (aug, 1)])


def sub_corner_replacement(HK, k, labels):
    """(replacement over a sub-corner of the slice at k, its inclusion into HK.rep[k]).

    labels are the images of (0,0), (1,0), (0,1)."""
    R = HK.rep[k]
    Rs = Replacement(HK.X, list(labels), "hocolim")
    inc = Rs.induced(R, {x: x for x in labels})
    return Rs, inc


def sub_sigma_witness(HK, k, labels, name="Sigma"):
    """Sigma W_a ~ D_k through a sub-corner a < b, a < c with W_b = W_c = 0."""
    a, b, c = labels
    Rs = suspension_data(HK.X.values[a])
    R = HK.rep[k]
    inc = Rs.induced(R, {"0,0": a, "1,0": b, "0,1": c})
    return QuasiIsoWitness(name, [(inc, 1)])


def sub_cone_witness(HK, k, labels, f=None, alpha=None, beta=None, name="Cone"):
    """Cone(W_a -> W_b) ~ D_k through a sub-corner with W_c = 0.

    With f, alpha, beta given (beta f = W(a->b) alpha) the witness starts at Cone(f)."""
    a, b, c = labels
    Rs, inc = sub_corner_replacement(HK, k, labels)
    psi = cone_projection(Rs, a, b, c)
    steps = [(psi, -1), (inc, 1)]
    if f is not None:
        steps.insert(0, (cone_functoriality(f, HK.X.map(a, b), alpha, beta), 1))
    return QuasiIsoWitness(name, steps)


# --- triangles --------------------------------------------------------------------------------


class Triangle:
    """X -f-> Y -g-> C -h-> S with an identification H_n(S) ~ H_{n-1}(X)."""

    def __init__(self, f, g, h, shift_iso, witnesses=(), name="triangle"):
        if f.target != g.source or g.target != h.source:
            raise CompositionMismatch("triangle maps are not composable")
        self.f, self.g, self.h = f, g, h
        self.X, self.Y, self.C, self.S = f.source, f.target, g.target, h.target
        self.shift_iso = dict(shift_iso)
        self.witnesses = list(witnesses)
        self.name = name

    def dims(self):
        return {k: dict(homology(getattr(self, k))) for k in "XYCS"}

    def verify_witnesses(self):
        return {w.name: w.verify() for w in self.witnesses}

    def __repr__(self):
        return f"Triangle({self.name}: {self.dims()})"


def _shift_iso_from(witness, X):
    """H_n(S) -> H_{n-1}(X) from a witness Sigma X ~ S."""
    iso = witness.homology_iso()
    sig = sigma_homology_iso(X)
    out = {}
    for n in sorted(set(iso) | set(sig)):
        if n in iso and n in sig:
            out[n] = sig[n] @ el.inverse(iso[n])
    return out


def diagram_triangle(HK, path, sigma_corners, name="triangle", witnesses=()):
    """Triangle from a path a -> b -> c -> d in a Kan extension diagram, with the
    shift identification from the Sigma square (a, b', c', d)."""
    D = HK.result
    a, b, c, d = path
    sw = sigma_square_witness(HK, sigma_corners, name=f"Sigma {a} ~ {d}")
    shift = _shift_iso_from(sw, D.values[a])
    return Triangle(D.map(a, b), D.map(b, c), D.map(c, d), shift,
                    [sw] + list(witnesses), name)


def standard_triangle(f):
    """X -> Y -> Cone(f) -> X[1]."""
    C, inc, proj = classical_cone(f)
    return Triangle(f, inc, proj, shift_identification(f.source, 1), name="standard")


T_SHAPE = fc.product(chain(2), chain(1))
K_T = T_SHAPE.sub(["0,0", "1,0", "2,0", "0,1"])


def triangle(f):
    """T(f) on [2]x[1] and the triangle along (0,0) -> (1,0) -> (1,1) -> (2,1)."""
    i0 = FunctorData(chain(1), K_T, {"0": "0,0", "1": "1,0"})
    W = HKan(i0, lift_morphism(f), "right")
    T = HKan(fc.inclusion(K_T, T_SHAPE), W.result, "left")
    squares = [("0,0", "1,0", "0,1", "1,1"), ("1,0", "2,0", "1,1", "2,1"),
               ("0,0", "2,0", "0,1", "2,1")]
    status = {sq: square_status(T.result, sq) for sq in squares}
    kappa = W.rep["0,0"].coaugmentation({"0": ChainMap.identity(f.source), "1": f}, f.source)
    toD00 = T.rep["0,0"].insertion("0,0")
    toD10 = T.rep["1,0"].insertion("1,0")
    X_w = QuasiIsoWitness("X ~ D(0,0)", [(kappa.then(toD00), 1)])
    Y_w = QuasiIsoWitness("Y ~ D(1,0)", [(toD10, 1)])
    C_w = sub_cone_witness(T, "1,1", ("0,0", "1,0", "0,1"), f, kappa,
                           ChainMap.identity(f.target), name="Cone(f) ~ C")
    S_w = sub_sigma_witness(T, "2,1", ("0,0", "2,0", "0,1"), name="Sigma H ~ S")
    S_w = QuasiIsoWitness("Sigma X ~ S", [(suspension_map(kappa), 1)] + S_w.steps)
    t = diagram_triangle(T, ("0,0", "1,0", "1,1", "2,1"), ("0,0", "2,0", "0,1", "2,1"),
                         "T(f)", [X_w, Y_w, C_w, S_w])
    t.diagram = T.result
    t.square_status = status
    return t


ROT_K = fc.product(chain(2), chain(2)).sub(
    [x for x in fc.product(chain(2), chain(2)).elements if x != "0,2"])
ROT_J = ROT_K.sub(["0,0", "1,0", "2,0", "0,1", "1,2"])


class RotationResult:
    def __init__(self, triangle, comparison, sigma_f, sign_ok, diagram):
        self.triangle = triangle
        self.comparison = comparison
        self.sigma_f = sigma_f
        self.sign_ok = sign_ok
        self.diagram = diagram

    def sign(self):
        """-1 when the last map is -Sigma f and Sigma f is nonzero on homology."""
        nz = [n for n, M in self.sigma_f.items() if not M.is_zero()]
        if not nz:
            return 0
        return -1 if self.sign_ok else None

    def to_json(self):
        return {"sign": self.sign(), "matches_minus_sigma_f": self.sign_ok,
                "comparison": {str(n): M.to_json() for n, M in sorted(self.comparison.items())},
                "sigma_f": {str(n): M.to_json() for n, M in sorted(self.sigma_f.items())}}


def rotate(f):
    """The rotated triangle Y -> C(f) -> Sigma X -> Sigma Y from j_! i_* f and the
    homology comparison of its last map with Sigma f."""
    i = FunctorData(chain(1), ROT_J, {"0": "0,0", "1": "1,0"})
    W = HKan(i, lift_morphism(f), "right")
    D = HKan(fc.inclusion(ROT_J, ROT_K), W.result, "left")
    kappa = W.rep["0,0"].coaugmentation({"0": ChainMap.identity(f.source), "1": f}, f.source)
    aX = sub_sigma_witness(D, "2,1", ("0,0", "2,0", "0,1"))
    aY = sub_sigma_witness(D, "2,2", ("1,0", "1,2", "2,0"))
    hp = D.result.map("2,1", "2,2")
    Hk = homology_map(suspension_map(kappa))
    HaX = aX.homology_iso()
    HaY = aY.homology_iso()
    Hh = homology_map(hp)
    Sf = homology_map(suspension_map(f))
    comp = {}
    ok = True
    for n in sorted(set(Sf)):
        if Sf[n].rows == 0 or Sf[n].cols == 0:
            comp[n] = -Sf[n]
            continue
        M = el.inverse(HaY[n]) @ Hh[n] @ HaX[n] @ Hk[n]
        comp[n] = M
        if M != -Sf[n]:
            ok = False
    Y_w = QuasiIsoWitness("Y ~ D(1,0)", [(D.rep["1,0"].insertion("1,0"), 1)])
    C_w = sub_cone_witness(D, "1,1", ("0,0", "1,0", "0,1"), f, kappa,
                           ChainMap.identity(f.target), name="Cone(f) ~ C")
    SX_w = QuasiIsoWitness("Sigma X ~ D(2,1)", [(suspension_map(kappa), 1)] + aX.steps)
    SY_w = QuasiIsoWitness("Sigma Y ~ D(2,2)", aY.steps)
    t = diagram_triangle(D, ("1,0", "1,1", "2,1", "2,2"), ("1,0", "2,0", "1,2", "2,2"),
                         "rotated", [Y_w, C_w, SX_w, SY_w])
    return RotationResult(t, comp, Sf, ok, D.result)


OCTA_K = fc.product(chain(4), chain(2)).sub(
    [x for x in fc.product(chain(4), chain(2)).elements if x not in ("4,0", "0,2")])
OCTA_J = OCTA_K.sub(["0,0", "1,0", "2,0", "3,0", "0,1", "4,1", "1,2"])


def _rectangles(P):
    out = []
    for x in P.elements:
        a, b = x.split(",")
        for y in P.elements:
            a2, b2 = y.split(",")
            if int(a2) > int(a) and int(b2) > int(b):
                c1, c2 = f"{a2},{b}", f"{a},{b2}"
                if c1 in P and c2 in P:
                    out.append((x, c1, c2, y))
    return out


class OctahedronResult:
    def __init__(self, diagram, squares, triangles, witnesses, model):
        self.diagram = diagram
        self.squares = squares
        self.triangles = triangles
        self.witnesses = witnesses
        self.model = model

    def all_bicartesian(self):
        return all(s["coCartesian"] and s["cartesian"] for s in self.squares.values())


def extension_by_zero(F, shape, embedding):
    """The strict diagram with F at the embedded chain and 0 elsewhere (the
    image must be a convex subset whose complement receives no maps from it
    in the relevant direction; used with the octahedron shape only)."""
    Z = Complex.zero(F.field)
    inv = {embedding(x): x for x in F.shape.elements}
    vals = {k: (F.values[inv[k]] if k in inv else Z) for k in shape.elements}
    maps = {}
    for a, b in shape.relations():
        if a in inv and b in inv:
            maps[(a, b)] = F.map(inv[a], inv[b])
        else:
            maps[(a, b)] = ChainMap.zero(vals[a], vals[b])
    return ChainDiagram(shape, vals, maps)


def octahedron(f1, f2, model="reduced"):
    """D = j_! E on the octahedron shape, with the (T4) triangles.

    model "reduced" uses the strict extension by zero E of (f1, f2); "literal"
    uses E = i_*(f1, f2).  The coaugmentation E_reduced -> E_literal is a
    levelwise quasi-isomorphism, checked by reduced_vs_literal."""
    if f1.target != f2.source:
        raise CompositionMismatch("target of f1 differs from source of f2")
    F = lift_chain([f1, f2])
    i = FunctorData(chain(2), OCTA_J, {"0": "0,0", "1": "1,0", "2": "2,0"})
    if model == "reduced":
        E = extension_by_zero(F, OCTA_J, i)
    elif model == "literal":
        E = HKan(i, F, "right").result
    else:
        raise ValueError(f"unknown model {model!r}")
    D = HKan(fc.inclusion(OCTA_J, OCTA_K), E, "left")
    squares = {sq: square_status(D.result, sq) for sq in _rectangles(OCTA_K)}
    wit = {}
    if model == "reduced":
        wit["C1"] = sub_cone_witness(D, "1,1", ("0,0", "1,0", "0,1"), name="Cone(f1) ~ D(1,1)")
        wit["C3"] = sub_cone_witness(D, "2,1", ("0,0", "2,0", "0,1"), name="Cone(f2 f1) ~ D(2,1)")
        wit["C2"] = sub_cone_witness(D, "2,2", ("1,0", "2,0", "1,2"), name="Cone(f2) ~ D(2,2)")
        wit["SX"] = sub_sigma_witness(D, "3,1", ("0,0", "3,0", "0,1"), name="Sigma X ~ D(3,1)")
        wit["SY"] = sub_sigma_witness(D, "3,2", ("1,0", "3,0", "1,2"), name="Sigma Y ~ D(3,2)")
    tri = {
        "T1": diagram_triangle(D, ("0,0", "1,0", "1,1", "3,1"), ("0,0", "3,0", "0,1", "3,1"), "T1"),
        "T3": diagram_triangle(D, ("0,0", "2,0", "2,1", "3,1"), ("0,0", "3,0", "0,1", "3,1"), "T3"),
        "T2": diagram_triangle(D, ("1,0", "2,0", "2,2", "3,2"), ("1,0", "3,0", "1,2", "3,2"), "T2"),
        "T4": diagram_triangle(D, ("1,1", "2,1", "2,2", "4,2"), ("1,1", "4,1", "1,2", "4,2"), "T4"),
    }
    return OctahedronResult(D.result, squares, tri, wit, model)


def reduced_vs_literal(f1, f2):
    """The coaugmentation from the strict extension by zero to i_*(f1, f2)."""
    F = lift_chain([f1, f2])
    i = FunctorData(chain(2), OCTA_J, {"0": "0,0", "1": "1,0", "2": "2,0"})
    E = extension_by_zero(F, OCTA_J, i)
    HK = HKan(i, F, "right")
    comps = {}
    for k in OCTA_J.elements:
        R = HK.rep[k]
        cone = {j: F.map(E_label, j) for j in R.P.elements
                for E_label in [next((x for x in F.shape.elements if i(x) == k), None)]
                if E_label is not None}
        if cone:
            comps[k] = R.coaugmentation(cone, E.values[k])
        else:
            comps[k] = ChainMap.zero(E.values[k], R.total)
    return DiagramMap(E, HK.result, comps)


# --- biproducts -----------------------------------------------------------------------------


class BiproductResult:
    def __init__(self, Q, B, squares, witnesses):
        self.Q, self.B = Q, B
        self.squares = squares
        self.witnesses = witnesses


def biproduct(X, Y):
    """Q = j3_! j2_! j1_* (X, Y) on [2]x[2] and B = Q(1,1)."""
    sh = fc.named_shape("biproduct_L")
    j1 = fc.named_shape("biproduct_L2").maps["j1"]
    j2 = sh.maps["j2"]
    j3 = sh.maps["j3"]
    ee = j1.source
    V0 = ChainDiagram(ee, {"0|*": X, "1|*": Y}, {}, check=False)
    A = HKan(j1, V0, "right")
    Bk = HKan(j2, A.result, "left")
    C = HKan(j3, Bk.result, "left")
    Q = C.result
    squares = {}
    for a in range(2):
        for b in range(2):
            sq = (f"{a},{b}", f"{a+1},{b}", f"{a},{b+1}", f"{a+1},{b+1}")
            squares[sq] = square_status(Q, sq)
    # X = A(1,0) exactly (a one-point holim), then Bk(1,0) and Q(1,0)
    xA = ChainMap.identity(X)
    x1 = A.rep["1,0"].coaugmentation({"0|*": xA}, X)
    x2 = Bk.rep["1,0"].insertion("1,0")
    x3 = C.rep["1,0"].insertion("1,0")
    y1 = A.rep["0,1"].coaugmentation({"1|*": ChainMap.identity(Y)}, Y)
    y2 = Bk.rep["0,1"].insertion("0,1")
    y3 = C.rep["0,1"].insertion("0,1")
    wit = {
        "X ~ X'": QuasiIsoWitness("X ~ Q(1,2)", [(x1, 1), (x2, 1), (x3, 1),
                                                 (Q.map("1,0", "1,2"), 1)]),
        "Y ~ Y'": QuasiIsoWitness("Y ~ Q(2,1)", [(y1, 1), (y2, 1), (y3, 1),
                                                 (Q.map("0,1", "2,1"), 1)]),
    }
    res = BiproductResult(Q, Q.values["1,1"], squares, wit)
    res.Z = Q.values["2,2"]
    return res


# --- loops and the pull_n shapes ---------------------------------------------------------------


def pull_shape(n):
    return fc.named_shape("pull_n", {"n": n}).poset


def _pn_replacement(X, n):
    P = pull_shape(n)
    D = HKan(FunctorData(fc.terminal_poset(), P, {"*": "t"}), _point_diagram(X), "left").result
    return Replacement(D, P.elements, "holim")


def _pull_map(R_big, R_small, mapping):
    return R_big.induced(R_small, mapping)


def P_n(X, n):
    return _pn_replacement(X, n).total


def segal_map(X, n):
    """P_n X -> (P_1 X)^n assembled from the restrictions (k-1, k)*."""
    Rn = _pn_replacement(X, n)
    R1 = _pn_replacement(X, 1)
    S, incs, _ = direct_sum([R1.total] * n)
    total = None
    for k in range(1, n + 1):
        m = Rn.induced(R1, {"e0": f"e{k-1}", "e1": f"e{k}", "t": "t"}).then(incs[k - 1])
        total = m if total is None else total + m
    return total


def invert_map(X):
    """sigma*: P_1 X -> P_1 X from the swap of e0 and e1."""
    R1 = _pn_replacement(X, 1)
    return R1.induced(R1, {"e0": "e1", "e1": "e0", "t": "t"})


def concat_homology(X):
    """H(Omega X)^2 -> H(Omega X): H((0,2)*) after the inverse Segal map."""
    R2 = _pn_replacement(X, 2)
    R1 = _pn_replacement(X, 1)
    c = R2.induced(R1, {"e0": "e0", "e1": "e2", "t": "t"})
    Hs = homology_map(segal_map(X, 2))
    Hc = homology_map(c)
    return {n: Hc[n] @ el.inverse(Hs[n]) for n in Hs}


def loop_to_pull(X):
    """The relabelling isomorphism Omega X = holim over the corner -> P_1 X."""
    Rl = loop_data(X)
    R1 = _pn_replacement(X, 1)
    return Rl.induced(R1, {"e0": "1,0", "e1": "0,1", "t": "1,1"})


def loop_calculus(op, X, n=None):
    if op == "P_n":
        if n is None or n < 1:
            raise ValueError("P_n needs n >= 1")
        return P_n(X, n)
    if op == "segal":
        if n is None or n < 1:
            raise ValueError("segal needs n >= 1")
        return segal_map(X, n)
    if op == "invert":
        return invert_map(X)
    if op == "concat":
        return concat_homology(X)
    raise ValueError(f"unknown operation {op!r}")


# --- exceptional functors and recollements -------------------------------------------------


def _complement(u):
    P = u.target
    img = {u(x) for x in u.source.elements}
    rest = [k for k in P.elements if k not in img]
    return fc.inclusion(P.sub(rest), P)


def _left_exceptional_data(u, X):
    st = fc.sieve_status(u)
    if st not in ("cosieve", "both"):
        raise NotACosieve("left_exceptional needs a cosieve")
    v = _complement(u)
    C, _, s, q = fc.mapping_cylinder(v, "cyl")
    S = HKan(s, X, "right")
    Q = HKan(q, S.result, "left")
    return S, Q


def _right_coexceptional_data(u, X):
    st = fc.sieve_status(u)
    if st not in ("sieve", "both"):
        raise NotASieve("right_coexceptional needs a sieve")
    v = _complement(u)
    C, _, s, q = fc.mapping_cylinder(v, "cyl_prime")
    S = HKan(s, X, "left")
    Q = HKan(q, S.result, "right")
    return S, Q


def left_exceptional(u, X):
    """u^? X = u* q_! s_* X over the cylinder of the complementary sieve."""
    S, Q = _left_exceptional_data(u, X)
    return Q.result.restrict(u)


def right_coexceptional(u, X):
    """u^! X = u* q'_* s'_! X over the primed cylinder of the complementary cosieve."""
    S, Q = _right_coexceptional_data(u, X)
    return Q.result.restrict(u)


def cone_as_exceptional(f):
    """1^? applied to f, with a witness Cone(f) ~ 1^?(f)."""
    X = lift_morphism(f)
    u = FunctorData(fc.terminal_poset(), chain(1), {"*": "1"})
    S, Q = _left_exceptional_data(u, X)
    R = Q.rep["1"]
    kappa = S.rep["0,0"].coaugmentation({"0": ChainMap.identity(f.source), "1": f}, f.source)
    g = S.result.map("0,0", "1,0")
    psi = cone_projection(R, "0,0", "1,0", "0,1")
    up = cone_functoriality(f, g, kappa, ChainMap.identity(f.target))
    return R.total, QuasiIsoWitness("Cone(f) ~ 1^?(f)", [(up, 1), (psi, -1)])


def fiber_as_coexceptional(f):
    """0^! applied to f, with a witness 0^!(f) ~ Fib(f)."""
    X = lift_morphism(f)
    u = FunctorData(fc.terminal_poset(), chain(1), {"*": "0"})
    S, Q = _right_coexceptional_data(u, X)
    R = Q.rep["0"]
    pi = fiber_projection(R, "0,1", "1,0", "1,1")
    g = S.result.map("0,1", "1,1")
    toX0 = _hocolim_point_value(S.rep["0,1"], "0", f.source)
    aug = S.rep["1,1"].augmentation({"0": f, "1": ChainMap.identity(f.target)}, f.target)
    down = fiber_functoriality(g, f, toX0, aug)
    return R.total, QuasiIsoWitness("0^!(f) ~ Fib(f)", [(pi, 1), (down, 1)])


def exceptional(u, X, kind):
    if kind in ("left_exceptional", "u?"):
        return left_exceptional(u, X)
    if kind in ("right_coexceptional", "u!"):
        return right_coexceptional(u, X)
    raise ValueError(f"unknown kind {kind!r}")


def _zero_or(M, rows, cols, field):
    return M if M is not None else QMatrix.zeros(rows, cols, field)


def les_check(dX, dY, dC, Hf, Hg, Hd, field=QQ):
    """Exactness of ... -> H_n X -> H_n Y -> H_n C -> H_{n-1} X -> ...

    dX, dY, dC are homology dimensions; Hf, Hg map degree n to matrices and
    Hd maps n to the connecting matrix H_n C -> H_{n-1} X.  Returns
    (ok, witness) where the witness names the first failing joint."""
    degs = sorted(set(dX) | set(dY) | set(dC) | {n + 1 for n in dX})
    def f(n):
        return _zero_or(Hf.get(n), dY.get(n, 0), dX.get(n, 0), field)
    def g(n):
        return _zero_or(Hg.get(n), dC.get(n, 0), dY.get(n, 0), field)
    def dd(n):
        return _zero_or(Hd.get(n), dX.get(n - 1, 0), dC.get(n, 0), field)
    for n in degs:
        joints = [("Y", n, f(n), g(n), dY.get(n, 0)),
                  ("C", n, g(n), dd(n), dC.get(n, 0)),
                  ("X", n - 1, dd(n), f(n - 1), dX.get(n - 1, 0))]
        for name, deg, m1, m2, dim in joints:
            if not (m2 @ m1).is_zero():
                return False, {"joint": name, "degree": deg, "reason": "composite not zero"}
            if el.rank(m1) + el.rank(m2) != dim:
                return False, {"joint": name, "degree": deg, "reason": "rank defect",
                               "ranks": [el.rank(m1), el.rank(m2)], "dim": dim}
    return True, None


def complete_connecting_map(a, b):
    """A connecting map making H(A) -> H(X) -> H(B) -> H(A)[-1] exact, or None.

    Over a field a pair A -> X -> B lies in a distinguished triangle iff such a
    map exists: im H(b) gets sent to zero and a complement of it is sent
    isomorphically onto ker H(a) one degree down."""
    Ha, Hb = homology_map(a), homology_map(b)
    dA, dX, dB = homology(a.source), homology(a.target), homology(b.target)
    F = a.source.field
    out = {}
    for n in sorted(set(dB)):
        Bn = _zero_or(Hb.get(n), dB.get(n, 0), dX.get(n, 0), F)
        K = el.kernel(_zero_or(Ha.get(n - 1), dX.get(n - 1, 0), dA.get(n - 1, 0), F))
        im = el.image(Bn)
        comp = el.complement_basis(im, dB[n])
        if len(comp) != K.cols:
            return None
        E = QMatrix.from_columns([{j: F.elem(1)} for j in comp], dB[n], F)
        basis = el.hstack([im, E], dB[n], F) if im.cols else E
        coords = el.inverse(basis)
        out[n] = K @ coords.submatrix(range(im.cols, dB[n]), None)
    ok, _ = les_check(dA, dX, dB, Ha, Hb, out, F)
    return out if ok else None


def is_distinguished(a, b):
    """A -a-> X -b-> B extends to a distinguished triangle."""
    return complete_connecting_map(a, b) is not None


def recollement_triangles(j, X):
    """The gluing sequences of a sieve j: U -> P and its complement cosieve i.

    Returns {name: (A, X, B, a, b)} with levelwise maps a: A -> X, b: X -> B for
      R2a: i_! i* X -> X -> j_* j* X
      R1a: j_* j^! X -> X -> i_* i* X
      R2b: j_! j* X -> X -> i_! i^? X"""
    if fc.sieve_status(j) not in ("sieve", "both"):
        raise NotASieve("recollement needs a sieve")
    P = X.shape
    i = _complement(j)
    out = {}
    # R2a
    iL = HKan(i, X.restrict(i), "left")
    jR = HKan(j, X.restrict(j), "right")
    a = {k: iL.rep[k].augmentation({z: X.map(i(z), k) for z in iL.rep[k].P.elements}, X.values[k])
         for k in P.elements}
    b = {k: jR.rep[k].coaugmentation({u: X.map(k, j(u)) for u in jR.rep[k].P.elements}, X.values[k])
         for k in P.elements}
    out["R2a"] = (iL.result, X, jR.result, DiagramMap(iL.result, X, a), DiagramMap(X, jR.result, b))
    # R1a
    C, _, s, q = fc.mapping_cylinder(i, "cyl_prime")
    S1 = HKan(s, X, "left")
    Q1 = HKan(q, S1.result, "right")
    jshriek = Q1.result.restrict(j)
    jJ = HKan(j, jshriek, "right")
    iR = HKan(i, X.restrict(i), "right")
    a, b = {}, {}
    for k in P.elements:
        Rk = jJ.rep[k]
        if k in {j(x) for x in j.source.elements}:
            u = next(x for x in j.source.elements if j(x) == k)
            m = Rk.projection(u)
            m = m.then(Q1.rep[k].projection(f"{k},1"))
            m = m.then(S1.rep[f"{k},1"].augmentation(
                {y: X.map(y, k) for y in S1.rep[f"{k},1"].P.elements}, X.values[k]))
            a[k] = m
        else:
            a[k] = ChainMap.zero(Rk.total, X.values[k])
        Rr = iR.rep[k]
        b[k] = Rr.coaugmentation({z: X.map(k, i(z)) for z in Rr.P.elements}, X.values[k])
    # the counit is natural only up to homotopy: j_* is a strict extension by zero
    out["R1a"] = (jJ.result, X, iR.result, DiagramMap(jJ.result, X, a, check=False),
                  DiagramMap(X, iR.result, b))
    # R2b
    C, _, s, q = fc.mapping_cylinder(j, "cyl")
    S2 = HKan(s, X, "right")
    Q2 = HKan(q, S2.result, "left")
    ique = Q2.result.restrict(i)
    iI = HKan(i, ique, "left")
    jL = HKan(j, X.restrict(j), "left")
    a, b = {}, {}
    iimg = {i(x): x for x in i.source.elements}
    for k in P.elements:
        Rl = jL.rep[k]
        a[k] = Rl.augmentation({u: X.map(j(u), k) for u in Rl.P.elements}, X.values[k])
        Rk = iI.rep[k]
        if k in iimg:
            z = iimg[k]
            m = S2.rep[f"{k},0"].coaugmentation(
                {y: X.map(k, y) for y in S2.rep[f"{k},0"].P.elements}, X.values[k])
            m = m.then(Q2.rep[k].insertion(f"{k},0"))
            m = m.then(Rk.insertion(z))
            b[k] = m
        else:
            b[k] = ChainMap.zero(X.values[k], Rk.total)
    # dually the unit into i_! i^? X is natural only up to homotopy
    out["R2b"] = (jL.result, X, iI.result, DiagramMap(jL.result, X, a),
                  DiagramMap(X, iI.result, b, check=False))
    return out
