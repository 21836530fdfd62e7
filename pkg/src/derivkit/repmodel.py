"""Diagrams of finite-dimensional vector spaces with strict Kan extensions.

Kan extensions are computed pointwise from slice categories and then
assembled into a diagram whose functoriality is checked again.  Poset shapes
are turned into categories on entry, so every diagram here lives on a
``FinCategory``.
"""

from __future__ import annotations

from . import exactlin as el
from .exactlin import QMatrix, QQ
from .fincat import (FinCategory, FinPoset, FunctorData, NatTransData, SquareData,
                     TO_W_U1, TO_U2_V, as_category, compose)


class ShapeMismatch(ValueError):
    pass


class FunctorialityError(ValueError):
    pass


def _cat(J):
    return as_category(J)


def _functor(u):
    return u.cat() if u.is_poset_map else u


class VecDiagram:
    """A functor from a finite category to finite-dimensional vector spaces."""

    def __init__(self, shape, dims, maps, field=QQ, check=True):
        self.shape = _cat(shape)
        self.field = field
        self.dims = {o: int(dims[o]) for o in self.shape.objects}
        full = {}
        for m, s, t in self.shape.morphisms:
            if self.shape.ident(s) == m:
                full[m] = QMatrix.identity(self.dims[s], field)
            elif m in maps:
                full[m] = maps[m]
        missing = [m for m, _, _ in self.shape.morphisms if m not in full]
        if missing:
            full = _close(self.shape, full)
        self.maps = full
        if check:
            self.validate()

    def validate(self):
        C = self.shape
        for m, s, t in C.morphisms:
            M = self.maps.get(m)
            if M is None:
                raise FunctorialityError(f"no matrix for {m}")
            if M.shape != (self.dims[t], self.dims[s]):
                raise FunctorialityError(f"matrix for {m} has shape {M.shape}")
        for (g, f), h in C.comp.items():
            if self.maps[g] @ self.maps[f] != self.maps[h]:
                raise FunctorialityError(f"composite {g} . {f} differs from {h}")

    def __call__(self, o):
        return self.dims[o]

    def map(self, m):
        return self.maps[m]

    def total_dim(self):
        return sum(self.dims.values())

    def __eq__(self, other):
        return (isinstance(other, VecDiagram) and self.shape == other.shape
                and self.dims == other.dims and self.maps == other.maps)

    def __repr__(self):
        return f"VecDiagram(dims={self.dims})"

    def to_json(self, shape_doc=None):
        C = self.shape
        gens = {m: self.maps[m].to_json() for m in _generators(C)}
        return {"shape": shape_doc, "dims": dict(self.dims), "maps": gens}

    @classmethod
    def from_json(cls, doc, shape, field=QQ):
        C = _cat(shape)
        dims = {o: int(doc["dims"][o]) for o in C.objects}
        maps = {}
        for m, data in doc.get("maps", {}).items():
            if m not in {x for x, _, _ in C.morphisms}:
                raise FunctorialityError(f"unknown morphism {m}")
            s, t = C.src(m), C.tgt(m)
            maps[m] = QMatrix.from_json(data, dims[t], dims[s], field)
        return cls(C, dims, maps, field)


def _generators(C):
    """Non-identity morphisms that are not composites of two non-identities."""
    comps = set()
    for (g, f), h in C.comp.items():
        if not C.is_identity(g) and not C.is_identity(f):
            comps.add(h)
    return [m for m in C.non_identity() if m not in comps]


def _close(C, known):
    known = dict(known)
    changed = True
    while changed:
        changed = False
        for (g, f), h in C.comp.items():
            if g in known and f in known:
                M = known[g] @ known[f]
                if h not in known:
                    known[h] = M
                    changed = True
    missing = [m for m, _, _ in C.morphisms if m not in known]
    if missing:
        raise FunctorialityError(f"cannot determine maps for {missing}")
    return known


def zero_diagram(shape, field=QQ):
    C = _cat(shape)
    return VecDiagram(C, {o: 0 for o in C.objects}, {}, field)


def constant_diagram(shape, n, field=QQ):
    C = _cat(shape)
    return VecDiagram(C, {o: n for o in C.objects},
                      {m: QMatrix.identity(n, field) for m, _, _ in C.morphisms}, field)


def diagram_from_chain(spaces, maps, field=QQ):
    """A diagram on [n] from dims and the n consecutive matrices."""
    from .fincat import chain
    n = len(spaces) - 1
    P = chain(n)
    C = P.as_category()
    gens = {f"{i}->{i + 1}": maps[i] for i in range(n)}
    return VecDiagram(C, {str(i): spaces[i] for i in range(n + 1)}, gens, field)


class DiagramMorphism:
    """A natural transformation between diagrams on the same shape."""

    def __init__(self, source, target, components, check=True):
        if source.shape != target.shape:
            raise ShapeMismatch("morphism between diagrams on different shapes")
        self.source = source
        self.target = target
        self.components = dict(components)
        if check:
            self.validate()

    def validate(self):
        X, Y = self.source, self.target
        for o in X.shape.objects:
            c = self.components.get(o)
            if c is None or c.shape != (Y.dims[o], X.dims[o]):
                raise FunctorialityError(f"bad component at {o}")
        for m, s, t in X.shape.morphisms:
            if Y.maps[m] @ self.components[s] != self.components[t] @ X.maps[m]:
                raise FunctorialityError(f"naturality fails at {m}")

    def __getitem__(self, o):
        return self.components[o]

    def is_iso(self):
        return all(el.is_iso(c) for c in self.components.values())

    def then(self, other):
        """other . self"""
        if other.source != self.target:
            raise ShapeMismatch("morphisms are not composable")
        return DiagramMorphism(self.source, other.target,
                               {o: other.components[o] @ self.components[o]
                                for o in self.source.shape.objects}, check=False)

    def __eq__(self, other):
        return (isinstance(other, DiagramMorphism) and self.source == other.source
                and self.target == other.target and self.components == other.components)

    def __repr__(self):
        return f"DiagramMorphism({ {o: c.shape for o, c in self.components.items()} })"


def identity_morphism(X):
    return DiagramMorphism(X, X, {o: QMatrix.identity(X.dims[o], X.field)
                                  for o in X.shape.objects}, check=False)


# --- restriction ------------------------------------------------------------------------


def restrict(u, X):
    """u* X"""
    u = _functor(u)
    if u.target != X.shape:
        raise ShapeMismatch("diagram does not live on the target of u")
    J = u.source
    dims = {j: X.dims[u(j)] for j in J.objects}
    maps = {m: X.maps[u.mor(m)] for m, _, _ in J.morphisms}
    return VecDiagram(J, dims, maps, X.field, check=False)


def restrict_morphism(u, phi):
    u = _functor(u)
    return DiagramMorphism(restrict(u, phi.source), restrict(u, phi.target),
                           {j: phi.components[u(j)] for j in u.source.objects}, check=False)


def cell_morphism(alpha, Z):
    """alpha*: a* Z -> b* Z for a cell alpha: a => b, components Z(alpha_j)."""
    a = _functor(alpha.source_functor)
    b = _functor(alpha.target_functor)
    comps = alpha.components
    if alpha.source_functor.is_poset_map:
        comps = {x: f"{a(x)}->{b(x)}" for x in a.source.objects}
    return DiagramMorphism(restrict(a, Z), restrict(b, Z),
                           {j: Z.maps[comps[j]] for j in a.source.objects}, check=False)


# --- limits and colimits ----------------------------------------------------------------


def _extremal(objs, mors, which):
    """An index object with a morphism to (from) every other object, if any."""
    for o in objs:
        if which == "initial":
            reach = {b for a, b, _ in mors if a == o}
        else:
            reach = {a for a, b, _ in mors if b == o}
        if all(x in reach for x in objs if x != o):
            return o
    return None


class _Colim:
    """colim of X over a category presented as a cokernel of sum_j X_j."""

    def __init__(self, objs, mors, dims, mapof, field):
        # objs: list of index objects; mors: list of (a, b, matrix X_a -> X_b)
        self.objs = objs
        self.offsets = {}
        n = 0
        for o in objs:
            self.offsets[o] = n
            n += dims[o]
        self.n = n
        self.dims = dims
        bb = el.BlockBuilder(n, sum(dims[a] for a, _, _ in mors), field)
        col = 0
        for a, b, M in mors:
            da = dims[a]
            bb.add(self.offsets[a], col, QMatrix.identity(da, field))
            bb.add(self.offsets[b], col, M, -1)
            col += da
        self.relations = bb.build()
        self.pi, self.sigma = el.quotient_data(self.relations, n)
        self.dim = self.pi.rows
        self.field = field
        # with a terminal index object t, use X_t's basis so that its leg is the identity
        t = _extremal(objs, mors, "terminal")
        if t is not None:
            L = self.leg(t)
            self.pi = el.inverse(L) @ self.pi
            self.sigma = self.sigma @ L

    def leg(self, o):
        off, d = self.offsets[o], self.dims[o]
        return self.pi.submatrix(None, range(off, off + d))

    def out(self, cocone):
        """The map colim -> V induced by a cocone {o: X_o -> V}."""
        if not cocone:
            return None
        rows = next(iter(cocone.values())).rows
        F = el.hstack([cocone[o] for o in self.objs], rows=rows, field=self.field)
        if not (F @ self.relations).is_zero():
            raise FunctorialityError("cocone does not respect the relations")
        return F @ self.sigma


class _Lim:
    """lim of X over a category presented as a kernel in prod_j X_j."""

    def __init__(self, objs, mors, dims, field):
        self.objs = objs
        self.offsets = {}
        n = 0
        for o in objs:
            self.offsets[o] = n
            n += dims[o]
        self.n = n
        self.dims = dims
        bb = el.BlockBuilder(sum(dims[b] for _, b, _ in mors), n, field)
        row = 0
        for a, b, M in mors:
            db = dims[b]
            bb.add(row, self.offsets[a], M)
            bb.add(row, self.offsets[b], QMatrix.identity(db, field), -1)
            row += db
        self.constraints = bb.build()
        self.K = el.kernel(self.constraints)
        self.dim = self.K.cols
        self.field = field
        i = _extremal(objs, mors, "initial")
        if i is not None:
            self.K = self.K @ el.inverse(self.leg(i))
        if self.dim:
            self.retract = el.solve_matrix(self.K.T, QMatrix.identity(self.dim, field)).T
        else:
            self.retract = QMatrix.zeros(0, n, field)

    def leg(self, o):
        off, d = self.offsets[o], self.dims[o]
        return self.K.submatrix(range(off, off + d), None)

    def into(self, cone, src_dim):
        """The map V -> lim induced by a cone {o: V -> X_o}."""
        F = el.vstack([cone[o] for o in self.objs], cols=src_dim, field=self.field)
        if not (self.constraints @ F).is_zero():
            raise FunctorialityError("cone does not satisfy the constraints")
        return self.retract @ F


def _index_data(C, X):
    objs = list(C.objects)
    mors = [(s, t, X.maps[m]) for m, s, t in C.morphisms if not C.is_identity(m)]
    return objs, mors


def lim_colim(J, X, side):
    """(dimension, legs) of the limit or colimit of X over J."""
    C = _cat(J)
    if C != X.shape:
        raise ShapeMismatch("diagram is not on the given shape")
    objs, mors = _index_data(C, X)
    if side == "colim":
        c = _Colim(objs, mors, X.dims, None, X.field)
        return c.dim, {o: c.leg(o) for o in objs}
    if side == "lim":
        l = _Lim(objs, mors, X.dims, X.field)
        return l.dim, {o: l.leg(o) for o in objs}
    raise ValueError(f"unknown side {side!r}")


# --- Kan extensions ---------------------------------------------------------------------


def _over(u, k):
    """Objects (j, f: u j -> k) and morphisms of the slice u/k."""
    J, K = u.source, u.target
    objs = [(j, f) for j in J.objects for f in K.hom(u(j), k)]
    mors = []
    for a in objs:
        for b in objs:
            for g in J.hom(a[0], b[0]):
                if J.is_identity(g) and a == b:
                    continue
                if K.compose(b[1], u.mor(g)) == a[1]:
                    mors.append((a, b, g))
    return objs, mors


def _under(u, k):
    """Objects (j, f: k -> u j) and morphisms of the slice k/u."""
    J, K = u.source, u.target
    objs = [(j, f) for j in J.objects for f in K.hom(k, u(j))]
    mors = []
    for a in objs:
        for b in objs:
            for g in J.hom(a[0], b[0]):
                if J.is_identity(g) and a == b:
                    continue
                if K.compose(u.mor(g), a[1]) == b[1]:
                    mors.append((a, b, g))
    return objs, mors


class KanExtension:
    """u_! X or u_* X with the pointwise (co)limit data kept for later use."""

    def __init__(self, u, X, side):
        u = _functor(u)
        if u.source != X.shape:
            raise ShapeMismatch("diagram does not live on the source of u")
        self.u, self.X, self.side = u, X, side
        K = u.target
        self.point = {}
        for k in K.objects:
            if side == "left":
                objs, mors = _over(u, k)
                dims = {o: X.dims[o[0]] for o in objs}
                self.point[k] = _Colim(objs, [(a, b, X.maps[g]) for a, b, g in mors],
                                       dims, None, X.field)
            elif side == "right":
                objs, mors = _under(u, k)
                dims = {o: X.dims[o[0]] for o in objs}
                self.point[k] = _Lim(objs, [(a, b, X.maps[g]) for a, b, g in mors],
                                     dims, X.field)
            else:
                raise ValueError(f"unknown side {side!r}")
        maps = {}
        for m, s, t in K.morphisms:
            maps[m] = self._structure(m, s, t)
        self.result = VecDiagram(K, {k: self.point[k].dim for k in K.objects}, maps, X.field,
                                 check=False)
        self.result.validate()

    def _structure(self, m, s, t):
        K = self.u.target
        F = self.X.field
        if self.side == "left":
            cs, ct = self.point[s], self.point[t]
            # (j, f) over s goes to (j, m f) over t
            cocone = {o: ct.leg((o[0], K.compose(m, o[1]))) for o in cs.objs}
            if not cs.objs:
                return QMatrix.zeros(ct.dim, 0, F)
            return cs.out(cocone)
        ls, lt = self.point[s], self.point[t]
        # (j, f) under t is (j, f m) under s
        cone = {o: ls.leg((o[0], K.compose(o[1], m))) for o in lt.objs}
        if not lt.objs:
            return QMatrix.zeros(0, ls.dim, F)
        return lt.into(cone, ls.dim)

    def apply(self, phi, other):
        """The induced morphism self.result -> other.result for phi: X -> X'."""
        F = self.X.field
        comps = {}
        for k in self.u.target.objects:
            a, b = self.point[k], other.point[k]
            if self.side == "left":
                if not a.objs:
                    comps[k] = QMatrix.zeros(b.dim, 0, F)
                    continue
                comps[k] = a.out({o: b.leg(o) @ phi.components[o[0]] for o in a.objs})
            else:
                if not b.objs:
                    comps[k] = QMatrix.zeros(0, a.dim, F)
                    continue
                comps[k] = b.into({o: phi.components[o[0]] @ a.leg(o) for o in b.objs}, a.dim)
        return DiagramMorphism(self.result, other.result, comps)


def kan(u, X, side):
    return KanExtension(u, X, side).result


def kan_morphism(u, phi, side):
    A = KanExtension(u, phi.source, side)
    B = KanExtension(u, phi.target, side)
    return A.apply(phi, B)


def unit_counit(u, arg, which):
    """Units and counits of u_! -| u* and u* -| u_*.

    unit_left: X -> u* u_! X;  counit_left: u_! u* Y -> Y;
    unit_right: Y -> u_* u* Y; counit_right: u* u_* X -> X."""
    u = _functor(u)
    K = u.target
    F = arg.field
    if which == "unit_left":
        E = KanExtension(u, arg, "left")
        tgt = restrict(u, E.result)
        comps = {j: E.point[u(j)].leg((j, K.ident(u(j)))) for j in u.source.objects}
        return DiagramMorphism(arg, tgt, comps)
    if which == "counit_left":
        E = KanExtension(u, restrict(u, arg), "left")
        comps = {}
        for k in K.objects:
            c = E.point[k]
            if not c.objs:
                comps[k] = QMatrix.zeros(arg.dims[k], 0, F)
            else:
                comps[k] = c.out({o: arg.maps[o[1]] for o in c.objs})
        return DiagramMorphism(E.result, arg, comps)
    if which == "unit_right":
        E = KanExtension(u, restrict(u, arg), "right")
        comps = {}
        for k in K.objects:
            l = E.point[k]
            if not l.objs:
                comps[k] = QMatrix.zeros(0, arg.dims[k], F)
            else:
                comps[k] = l.into({o: arg.maps[o[1]] for o in l.objs}, arg.dims[k])
        return DiagramMorphism(arg, E.result, comps)
    if which == "counit_right":
        E = KanExtension(u, arg, "right")
        src = restrict(u, E.result)
        comps = {j: E.point[u(j)].leg((j, K.ident(u(j)))) for j in u.source.objects}
        return DiagramMorphism(src, arg, comps)
    raise ValueError(f"unknown adjunction morphism {which!r}")


def mate(square, side, sample):
    """The mate of the square's cell, evaluated at ``sample`` (a diagram on J2).

    left:  u1_! v* X -> w* u2_! X  (cell u2 v => w u1)
    right: w* u2_* X -> u1_* v* X  (cell w u1 => u2 v)"""
    u1, u2, v, w = (_functor(square.u1), _functor(square.u2),
                    _functor(square.v), _functor(square.w))
    X = sample
    if X.shape != u2.source:
        raise ShapeMismatch("sample must live on the source of u2")
    if side == "left":
        if square.direction != TO_W_U1:
            raise ShapeMismatch("left mates need a cell u2 v => w u1")
        eta = unit_counit(u2, X, "unit_left")                          # X -> u2* u2_! X
        step1 = restrict_morphism(v, eta)                               # v*X -> (u2 v)* u2_!X
        U = KanExtension(u2, X, "left").result                          # u2_! X on K2
        step2 = cell_morphism(square.cell, U)                           # (u2 v)* U -> (w u1)* U
        mid = step1.then(step2)                                         # v* X -> u1* w* U
        A = KanExtension(u1, mid.source, "left")
        B = KanExtension(u1, mid.target, "left")
        lifted = A.apply(mid, B)                                        # u1_! v* X -> u1_! u1* w* U
        eps = unit_counit(u1, restrict(w, U), "counit_left")            # u1_! u1* (w* U) -> w* U
        return lifted.then(eps)
    if side == "right":
        if square.direction != TO_U2_V:
            raise ShapeMismatch("right mates need a cell w u1 => u2 v")
        R = KanExtension(u2, X, "right").result                         # u2_* X on K2
        WR = restrict(w, R)
        eta = unit_counit(u1, WR, "unit_right")                         # w*R -> u1_* u1* w* R
        step = cell_morphism(square.cell, R)                            # (w u1)* R -> (u2 v)* R
        eps = unit_counit(u2, X, "counit_right")                        # u2* R -> X
        mid = step.then(restrict_morphism(v, eps))                      # (w u1)* R -> v* X
        A = KanExtension(u1, mid.source, "right")
        B = KanExtension(u1, mid.target, "right")
        return eta.then(A.apply(mid, B))
    raise ValueError(f"unknown side {side!r}")


def recover_cell(square, Z, beta=None):
    """Undo the left mate: v* u2* Z -> u1* w* Z rebuilt from u1_! v* -> w* u2_!.

    For a left-mate square this equals the cell's action alpha* on Z."""
    u1, u2, v, w = (_functor(square.u1), _functor(square.u2),
                    _functor(square.v), _functor(square.w))
    X = restrict(u2, Z)
    if beta is None:
        beta = mate(square, "left", X)                                  # u1_! v* X -> w* u2_! X
    eta = unit_counit(u1, restrict(v, X), "unit_left")                  # v* X -> u1* u1_! v* X
    eps = unit_counit(u2, Z, "counit_left")                             # u2_! u2* Z -> Z
    return eta.then(restrict_morphism(u1, beta)).then(
        restrict_morphism(u1, restrict_morphism(w, eps)))


def paste_horizontal(sq1, sq2):
    """Paste J1 -> J2 -> J3 over K1 -> K2 -> K3 (left-mate cells)."""
    if sq1.u2.object_map != sq2.u1.object_map or sq1.u2.source != sq2.u1.source:
        raise ShapeMismatch("squares do not share the middle leg")
    v = compose(sq2.v, sq1.v)
    w = compose(sq2.w, sq1.w)
    if sq1.u1.is_poset_map and sq2.u2.is_poset_map and sq1.v.is_poset_map:
        return SquareData(sq1.u1, sq2.u2, v, w, None, TO_W_U1)
    a, b = sq1.cell, sq2.cell
    T = as_category(sq2.w.target)
    w2 = _functor(sq2.w)
    v1 = _functor(sq1.v)
    comps = {j: T.compose(w2.mor(a.components[j]), b.components[v1(j)])
             for j in a.components}
    src = compose(sq2.u2, v)
    tgt = compose(w, sq1.u1)
    return SquareData(sq1.u1, sq2.u2, v, w, NatTransData(src, tgt, comps), TO_W_U1)


class Verdict:
    """Outcome of one check."""

    def __init__(self, name, passed, seed=None, witness=None, info=None):
        self.name = name
        self.passed = bool(passed)
        self.seed = seed
        self.witness = witness
        self.info = info or {}

    def to_json(self):
        d = {"name": self.name, "pass": self.passed, "instance_seed": self.seed}
        if self.witness is not None:
            d["witness"] = self.witness
        if self.info:
            d["info"] = self.info
        return d

    def __bool__(self):
        return self.passed

    def __repr__(self):
        return f"Verdict({self.name!r}, pass={self.passed})"


def exact_square_verdict(square, samples, name="exact_square"):
    """Pass iff the mate matching the cell direction is invertible on every sample."""
    side = "left" if square.direction == TO_W_U1 else "right"
    for idx, X in enumerate(samples):
        phi = mate(square, side, X)
        for k, M in phi.components.items():
            if not el.is_iso(M):
                return Verdict(name, False, witness={
                    "sample": idx, "object": k, "side": side,
                    "rows": M.rows, "cols": M.cols, "rank": el.rank(M),
                    "matrix": M.to_json(), "dims": dict(X.dims),
                })
    return Verdict(name, True, info={"samples": len(samples), "side": side})


def nat_dim(X, Y):
    """dim Nat(X, Y) as the kernel dimension of the naturality system."""
    if X.shape != Y.shape:
        raise ShapeMismatch("diagrams live on different shapes")
    C = X.shape
    off = {}
    n = 0
    for o in C.objects:
        off[o] = n
        n += Y.dims[o] * X.dims[o]
    rows = []
    for m, s, t in C.morphisms:
        if C.is_identity(m):
            continue
        A, B = Y.maps[m], X.maps[m]
        # (A phi_s - phi_t B)[a, b]
        ds, dt = X.dims[s], X.dims[t]
        for a in range(Y.dims[t]):
            for b in range(ds):
                r = {}
                for c, val in A.row(a).items():
                    idx = off[s] + c * ds + b
                    r[idx] = r.get(idx, 0) + val
                for c in range(dt):
                    val = B.entry(c, b)
                    if val:
                        idx = off[t] + a * dt + c
                        r[idx] = r.get(idx, 0) - val
                rows.append({i: v for i, v in r.items() if v})
    M = QMatrix._from_rows(len(rows), n, rows, X.field)
    return n - el.rank(M)


def reconstruct_coproduct(A, B, X):
    """(Der1) as a structural identity: split X on A + B into the two restrictions
    and glue them back; returns (X_A, X_B, glued)."""
    from .fincat import coproduct_inclusions
    C, (i1, i2) = coproduct_inclusions(A, B)
    XA, XB = restrict(i1, X), restrict(i2, X)
    Cc = as_category(C)
    dims = {}
    maps = {}
    for part, tag in ((XA, "0"), (XB, "1")):
        for o in part.shape.objects:
            dims[f"{tag}|{o}"] = part.dims[o]
        for m, _, _ in part.shape.morphisms:
            key = f"{tag}|{m}" if not isinstance(C, FinPoset) else None
            if key is None:
                s, t = part.shape.src(m), part.shape.tgt(m)
                key = f"{tag}|{s}->{tag}|{t}"
            maps[key] = part.maps[m]
    return XA, XB, VecDiagram(Cc, dims, maps, X.field)
