"""Finite posets and finite categories, the index shapes of both models.

Posets carry an explicit relation matrix; a poset is turned into a
``FinCategory`` only when a construction needs hom-sets.  Labels are opaque
strings, and product labels are written ``"a,b"``.
"""

from __future__ import annotations

from itertools import product as _iproduct


class FincatError(ValueError):
    pass


class DuplicateLabel(FincatError):
    pass


class CycleDetected(FincatError):
    pass


class UnknownShape(FincatError):
    pass


class BadParams(FincatError):
    pass


class ObjectNotInTarget(FincatError):
    pass


class TargetMismatch(FincatError):
    pass


class NotAPoset(FincatError):
    pass


class InvalidFunctor(FincatError):
    pass


def _label(x):
    return x if isinstance(x, str) else str(x)


class FinPoset:
    """A finite partial order on labelled elements."""

    __slots__ = ("elements", "leq", "_index", "_hash")

    def __init__(self, elements, leq, check=True):
        self.elements = tuple(_label(x) for x in elements)
        self.leq = tuple(tuple(bool(b) for b in row) for row in leq)
        self._index = {x: i for i, x in enumerate(self.elements)}
        self._hash = None
        if check:
            self._validate()

    def _validate(self):
        n = len(self.elements)
        if len(self._index) != n:
            seen = set()
            for x in self.elements:
                if x in seen:
                    raise DuplicateLabel(x)
                seen.add(x)
        L = self.leq
        if len(L) != n or any(len(r) != n for r in L):
            raise FincatError("relation matrix has wrong shape")
        for i in range(n):
            if not L[i][i]:
                raise FincatError(f"not reflexive at {self.elements[i]}")
        for i in range(n):
            for j in range(n):
                if i != j and L[i][j] and L[j][i]:
                    raise CycleDetected(f"{self.elements[i]} <= {self.elements[j]} <= {self.elements[i]}")
                if L[i][j]:
                    for k in range(n):
                        if L[j][k] and not L[i][k]:
                            raise FincatError("relation is not transitive")

    # basic access
    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, x):
        return x in self._index

    def index(self, x):
        try:
            return self._index[x]
        except KeyError:
            raise ObjectNotInTarget(f"{x!r} is not an element") from None

    def le(self, a, b):
        return self.leq[self.index(a)][self.index(b)]

    def lt(self, a, b):
        return a != b and self.le(a, b)

    def down(self, x):
        j = self.index(x)
        return [y for i, y in enumerate(self.elements) if self.leq[i][j]]

    def up(self, x):
        i = self.index(x)
        return [y for j, y in enumerate(self.elements) if self.leq[i][j]]

    def relations(self, strict=True):
        n = len(self.elements)
        E = self.elements
        return [(E[i], E[j]) for i in range(n) for j in range(n)
                if self.leq[i][j] and (i != j or not strict)]

    def covers(self):
        """Covering pairs a < b with nothing strictly between."""
        n = len(self.elements)
        L = self.leq
        out = []
        for i in range(n):
            for j in range(n):
                if i != j and L[i][j]:
                    if not any(k != i and k != j and L[i][k] and L[k][j] for k in range(n)):
                        out.append((self.elements[i], self.elements[j]))
        return out

    def sub(self, labels):
        """Full subposet on the given labels, in ambient order."""
        keep = set(labels)
        for x in keep:
            self.index(x)
        idx = [i for i, x in enumerate(self.elements) if x in keep]
        return FinPoset([self.elements[i] for i in idx],
                        [[self.leq[i][j] for j in idx] for i in idx], check=False)

    def minimal(self):
        n = len(self.elements)
        return [self.elements[j] for j in range(n)
                if not any(i != j and self.leq[i][j] for i in range(n))]

    def maximal(self):
        n = len(self.elements)
        return [self.elements[i] for i in range(n)
                if not any(i != j and self.leq[i][j] for j in range(n))]

    def terminal(self):
        n = len(self.elements)
        for j in range(n):
            if all(self.leq[i][j] for i in range(n)):
                return self.elements[j]
        return None

    def initial(self):
        n = len(self.elements)
        for i in range(n):
            if all(self.leq[i][j] for j in range(n)):
                return self.elements[i]
        return None

    def relabel(self, mapping):
        return FinPoset([mapping[x] for x in self.elements], self.leq)

    def __eq__(self, other):
        return (isinstance(other, FinPoset) and self.elements == other.elements
                and self.leq == other.leq)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.elements, self.leq))
        return self._hash

    def __repr__(self):
        return f"FinPoset({list(self.elements)}, covers={self.covers()})"

    def to_json(self):
        return {"objects": list(self.elements), "leq": [list(p) for p in self.covers()]}

    @classmethod
    def from_json(cls, doc):
        return build_poset(doc["objects"], [tuple(p) for p in doc.get("leq", [])])

    def as_category(self):
        return FinCategory.from_poset(self)


def build_poset(labels, generating_pairs=()):
    """The poset generated by ``generating_pairs`` (reflexive-transitive closure)."""
    labels = [_label(x) for x in labels]
    index = {}
    for i, x in enumerate(labels):
        if x in index:
            raise DuplicateLabel(x)
        index[x] = i
    n = len(labels)
    M = [[i == j for j in range(n)] for i in range(n)]
    for a, b in generating_pairs:
        a, b = _label(a), _label(b)
        if a not in index or b not in index:
            raise FincatError(f"pair ({a}, {b}) uses an unknown label")
        M[index[a]][index[b]] = True
    for k in range(n):
        Mk = M[k]
        for i in range(n):
            if M[i][k]:
                Mi = M[i]
                for j in range(n):
                    if Mk[j]:
                        Mi[j] = True
    for i in range(n):
        for j in range(i + 1, n):
            if M[i][j] and M[j][i]:
                raise CycleDetected(f"{labels[i]} and {labels[j]} lie on a cycle")
    return FinPoset(labels, M, check=False)


def chain(n):
    """The ordinal [n] = {0 < 1 < ... < n}."""
    if n < 0:
        return FinPoset([], [])
    return FinPoset([str(i) for i in range(n + 1)],
                    [[i <= j for j in range(n + 1)] for i in range(n + 1)], check=False)


def terminal_poset(label="*"):
    return FinPoset([label], [[True]], check=False)


EMPTY = FinPoset([], [], check=False)


# --- finite categories ----------------------------------------------------------


class FinCategory:
    """A finite category given by its full composition table.

    ``comp[(g, f)]`` is the composite g . f for tgt(f) = src(g)."""

    def __init__(self, objects, morphisms, comp, identities, check=True):
        self.objects = tuple(_label(o) for o in objects)
        self.morphisms = tuple((m, s, t) for m, s, t in morphisms)
        self.comp = dict(comp)
        self.identities = dict(identities)
        self._src = {m: s for m, s, _ in self.morphisms}
        self._tgt = {m: t for m, _, t in self.morphisms}
        self._hom = {}
        for m, s, t in self.morphisms:
            self._hom.setdefault((s, t), []).append(m)
        if check:
            self._validate()

    def _validate(self):
        if len(set(self.objects)) != len(self.objects):
            raise DuplicateLabel("duplicate object")
        if len(self._src) != len(self.morphisms):
            raise FincatError("duplicate morphism id")
        obj = set(self.objects)
        for m, s, t in self.morphisms:
            if s not in obj or t not in obj:
                raise FincatError(f"morphism {m} has unknown endpoints")
        for o in self.objects:
            i = self.identities.get(o)
            if i is None or self._src.get(i) != o or self._tgt.get(i) != o:
                raise FincatError(f"bad identity at {o}")
        pairs = set()
        for f, sf, tf in self.morphisms:
            for g in self._hom_from(tf):
                pairs.add((g, f))
                h = self.comp.get((g, f))
                if h is None:
                    raise FincatError(f"composite {g}.{f} missing")
                if self._src.get(h) != sf or self._tgt.get(h) != self._tgt[g]:
                    raise FincatError(f"composite {g}.{f} has wrong endpoints")
        if set(self.comp) != pairs:
            raise FincatError("composition table has entries for non-composable pairs")
        for f, sf, tf in self.morphisms:
            if self.comp[(self.identities[tf], f)] != f or self.comp[(f, self.identities[sf])] != f:
                raise FincatError(f"identity law fails at {f}")
        for f, sf, tf in self.morphisms:
            for g in self._hom_from(tf):
                for h in self._hom_from(self._tgt[g]):
                    if self.comp[(h, self.comp[(g, f)])] != self.comp[(self.comp[(h, g)], f)]:
                        raise FincatError("composition is not associative")

    def _hom_from(self, a):
        return [m for m, s, _ in self.morphisms if s == a]

    def src(self, m):
        return self._src[m]

    def tgt(self, m):
        return self._tgt[m]

    def hom(self, a, b):
        return list(self._hom.get((a, b), ()))

    def compose(self, g, f):
        return self.comp[(g, f)]

    def ident(self, o):
        return self.identities[o]

    def is_identity(self, m):
        return self.identities.get(self._src[m]) == m

    def non_identity(self):
        return [m for m, s, t in self.morphisms if self.identities[s] != m]

    def __len__(self):
        return len(self.objects)

    def __contains__(self, o):
        return o in set(self.objects)

    def is_thin(self):
        return all(len(v) <= 1 for v in self._hom.values())

    def to_poset(self):
        """The poset, if this category is one (thin, no isomorphic distinct objects)."""
        if not self.is_thin():
            raise NotAPoset("category has parallel morphisms")
        n = len(self.objects)
        M = [[bool(self._hom.get((a, b))) for b in self.objects] for a in self.objects]
        for i in range(n):
            for j in range(n):
                if i != j and M[i][j] and M[j][i]:
                    raise NotAPoset("distinct isomorphic objects")
        return FinPoset(self.objects, M, check=False)

    def is_poset(self):
        try:
            self.to_poset()
            return True
        except NotAPoset:
            return False

    @classmethod
    def from_poset(cls, P):
        mors = []
        comp = {}
        ident = {}
        for a, b in P.relations(strict=False):
            mors.append((f"{a}->{b}", a, b))
        for a in P.elements:
            ident[a] = f"{a}->{a}"
        for a, b in P.relations(strict=False):
            for c in P.up(b):
                comp[(f"{b}->{c}", f"{a}->{b}")] = f"{a}->{c}"
        return cls(P.elements, mors, comp, ident, check=False)

    def opposite(self):
        mors = [(m, t, s) for m, s, t in self.morphisms]
        comp = {(f, g): h for (g, f), h in self.comp.items()}
        return FinCategory(self.objects, mors, comp, self.identities, check=False)

    def __eq__(self, other):
        return (isinstance(other, FinCategory) and self.objects == other.objects
                and self.morphisms == other.morphisms and self.comp == other.comp
                and self.identities == other.identities)

    def __hash__(self):
        return hash((self.objects, self.morphisms))

    def __repr__(self):
        return f"FinCategory({len(self.objects)} objects, {len(self.morphisms)} morphisms)"


def as_category(X):
    return X if isinstance(X, FinCategory) else FinCategory.from_poset(X)


def _objects(X):
    return X.elements if isinstance(X, FinPoset) else X.objects


# --- functors and natural transformations ------------------------------------------


class FunctorData:
    """A functor between finite posets or finite categories.

    For posets only the object map is needed; morphisms map as relations."""

    def __init__(self, source, target, object_map, morphism_map=None, check=True):
        self.source = source
        self.target = target
        self.object_map = {_label(k): _label(v) for k, v in dict(object_map).items()}
        self._mor = dict(morphism_map) if morphism_map is not None else None
        if check:
            self.validate()

    @property
    def is_poset_map(self):
        return isinstance(self.source, FinPoset) and isinstance(self.target, FinPoset)

    def __call__(self, x):
        return self.object_map[x]

    def obj(self, x):
        return self.object_map[x]

    @property
    def morphism_map(self):
        if self._mor is None:
            S = as_category(self.source)
            self._mor = {}
            for m, s, t in S.morphisms:
                self._mor[m] = f"{self.object_map[s]}->{self.object_map[t]}"
        return self._mor

    def mor(self, m):
        return self.morphism_map[m]

    def validate(self):
        src = _objects(self.source)
        tgt = set(_objects(self.target))
        if set(self.object_map) != set(src):
            raise InvalidFunctor("object map is not total on the source")
        for x, y in self.object_map.items():
            if y not in tgt:
                raise InvalidFunctor(f"{x} maps outside the target")
        if self.is_poset_map and self._mor is None:
            S, T = self.source, self.target
            for a, b in S.relations():
                if not T.le(self.object_map[a], self.object_map[b]):
                    raise InvalidFunctor(f"not monotone on {a} <= {b}")
            return
        S, T = as_category(self.source), as_category(self.target)
        M = self.morphism_map
        for m, s, t in S.morphisms:
            fm = M.get(m)
            if fm is None or T.src(fm) != self.object_map[s] or T.tgt(fm) != self.object_map[t]:
                raise InvalidFunctor(f"morphism {m} is not mapped compatibly")
        for o in S.objects:
            if M[S.ident(o)] != T.ident(self.object_map[o]):
                raise InvalidFunctor(f"identity at {o} not preserved")
        for (g, f), h in S.comp.items():
            if T.compose(M[g], M[f]) != M[h]:
                raise InvalidFunctor(f"composition {g}.{f} not preserved")

    def cat(self):
        """The same functor between the associated categories."""
        return FunctorData(as_category(self.source), as_category(self.target),
                           self.object_map, self.morphism_map, check=False)

    def __eq__(self, other):
        return (isinstance(other, FunctorData) and self.source == other.source
                and self.target == other.target and self.object_map == other.object_map
                and (self.is_poset_map or self.morphism_map == other.morphism_map))

    def __hash__(self):
        return hash(tuple(sorted(self.object_map.items())))

    def __repr__(self):
        return f"FunctorData({self.object_map})"

    def to_json(self):
        return {"source": _shape_json(self.source), "target": _shape_json(self.target),
                "map": dict(self.object_map)}


def _shape_json(X):
    if isinstance(X, FinPoset):
        return X.to_json()
    raise FincatError("only poset shapes serialize")


def poset_map(source, target, mapping):
    return FunctorData(source, target, mapping)


def identity_functor(X):
    objs = _objects(X)
    if isinstance(X, FinPoset):
        return FunctorData(X, X, {o: o for o in objs}, check=False)
    return FunctorData(X, X, {o: o for o in objs}, {m: m for m, _, _ in X.morphisms}, check=False)


def inclusion(sub, ambient):
    return FunctorData(sub, ambient, {o: o for o in _objects(sub)})


def constant(source, target, value):
    if isinstance(source, FinPoset) and isinstance(target, FinPoset):
        return FunctorData(source, target, {o: value for o in source.elements})
    T = as_category(target)
    S = as_category(source)
    return FunctorData(source, target, {o: value for o in S.objects},
                       {m: T.ident(value) for m, _, _ in S.morphisms})


def point(target, value, label="*"):
    """The functor e -> target picking out ``value``."""
    if isinstance(target, FinPoset):
        return FunctorData(terminal_poset(label), target, {label: value})
    e = FinCategory([label], [(f"{label}->{label}", label, label)],
                    {(f"{label}->{label}", f"{label}->{label}"): f"{label}->{label}"},
                    {label: f"{label}->{label}"})
    return FunctorData(e, target, {label: value}, {f"{label}->{label}": target.ident(value)})


def compose(v, u):
    """v . u"""
    if u.target != v.source:
        raise TargetMismatch("functors are not composable")
    om = {x: v.object_map[y] for x, y in u.object_map.items()}
    if u.is_poset_map and v.is_poset_map:
        return FunctorData(u.source, v.target, om, check=False)
    return FunctorData(u.source, v.target, om,
                       {m: v.morphism_map[fm] for m, fm in u.morphism_map.items()}, check=False)


class NatTransData:
    """A natural transformation between parallel functors."""

    def __init__(self, source_functor, target_functor, components=None, check=True):
        self.source_functor = source_functor
        self.target_functor = target_functor
        u, v = source_functor, target_functor
        if u.source != v.source or u.target != v.target:
            raise FincatError("functors are not parallel")
        if components is None:
            if not (u.is_poset_map):
                raise FincatError("components required for category functors")
            components = {x: f"{u(x)}->{v(x)}" for x in u.source.elements}
        self.components = dict(components)
        if check:
            self.validate()

    def validate(self):
        u, v = self.source_functor, self.target_functor
        if u.is_poset_map:
            for x in u.source.elements:
                if not u.target.le(u(x), v(x)):
                    raise FincatError(f"no component {u(x)} -> {v(x)} at {x}")
            return
        T = as_category(u.target)
        S = as_category(u.source)
        for x in S.objects:
            c = self.components.get(x)
            if c is None or T.src(c) != u(x) or T.tgt(c) != v(x):
                raise FincatError(f"bad component at {x}")
        for m, s, t in S.morphisms:
            lhs = T.compose(self.components[t], u.mor(m))
            rhs = T.compose(v.mor(m), self.components[s])
            if lhs != rhs:
                raise FincatError(f"naturality fails at {m}")

    def __repr__(self):
        return f"NatTransData({self.components})"


def poset_cell(u, v):
    """The unique cell u => v between poset maps (u(x) <= v(x) everywhere)."""
    return NatTransData(u, v)


TO_W_U1 = "to_w_u1"
TO_U2_V = "to_u2_v"


class SquareData:
    """A square

        J1 --v--> J2
        |u1       |u2
        K1 --w--> K2

    with a cell either u2.v => w.u1 (direction ``to_w_u1``, the input of
    left mates) or w.u1 => u2.v (direction ``to_u2_v``, right mates)."""

    def __init__(self, u1, u2, v, w, cell=None, direction=TO_W_U1):
        if direction not in (TO_W_U1, TO_U2_V):
            raise FincatError(f"unknown direction {direction!r}")
        self.u1, self.u2, self.v, self.w = u1, u2, v, w
        self.direction = direction
        if v.source != u1.source or v.target != u2.source or w.source != u1.target \
                or w.target != u2.target:
            raise FincatError("square legs do not fit together")
        a = compose(u2, v)
        b = compose(w, u1)
        if cell is None:
            cell = NatTransData(a, b) if direction == TO_W_U1 else NatTransData(b, a)
        self.cell = cell
        src, tgt = (a, b) if direction == TO_W_U1 else (b, a)
        if cell.source_functor.object_map != src.object_map or \
                cell.target_functor.object_map != tgt.object_map:
            raise FincatError("cell endpoints do not match the square")

    def reversed(self):
        """The same square with the cell read in the other direction.

        Only meaningful when the cell is an identity (a commutative square)."""
        a = compose(self.u2, self.v)
        b = compose(self.w, self.u1)
        if a.object_map != b.object_map:
            raise FincatError("only commutative squares can be reversed")
        d = TO_U2_V if self.direction == TO_W_U1 else TO_W_U1
        return SquareData(self.u1, self.u2, self.v, self.w, None if a.is_poset_map else
                          NatTransData(a, b, {x: as_category(a.target).ident(a(x))
                                              for x in _objects(a.source)}), d)


# --- constructions ----------------------------------------------------------------


def product(A, B):
    """Product with labels "a,b" in lexicographic order."""
    if isinstance(A, FinPoset) and isinstance(B, FinPoset):
        els = [f"{a},{b}" for a in A.elements for b in B.elements]
        nA, nB = len(A), len(B)
        M = [[A.leq[i // nB][j // nB] and B.leq[i % nB][j % nB] for j in range(nA * nB)]
             for i in range(nA * nB)]
        return FinPoset(els, M, check=False)
    A, B = as_category(A), as_category(B)
    objs = [f"{a},{b}" for a in A.objects for b in B.objects]
    mors = []
    for f, sf, tf in A.morphisms:
        for g, sg, tg in B.morphisms:
            mors.append((f"({f},{g})", f"{sf},{sg}", f"{tf},{tg}"))
    comp = {}
    for (f2, f1), f3 in A.comp.items():
        for (g2, g1), g3 in B.comp.items():
            comp[(f"({f2},{g2})", f"({f1},{g1})")] = f"({f3},{g3})"
    ident = {f"{a},{b}": f"({A.ident(a)},{B.ident(b)})" for a in A.objects for b in B.objects}
    return FinCategory(objs, mors, comp, ident, check=False)


def coproduct(A, B):
    """Disjoint union; labels are tagged "0|a" and "1|b"."""
    if isinstance(A, FinPoset) and isinstance(B, FinPoset):
        els = [f"0|{a}" for a in A.elements] + [f"1|{b}" for b in B.elements]
        nA, n = len(A), len(A) + len(B)
        M = [[False] * n for _ in range(n)]
        for i in range(nA):
            for j in range(nA):
                M[i][j] = A.leq[i][j]
        for i in range(len(B)):
            for j in range(len(B)):
                M[nA + i][nA + j] = B.leq[i][j]
        return FinPoset(els, M, check=False)
    A, B = as_category(A), as_category(B)
    objs = [f"0|{a}" for a in A.objects] + [f"1|{b}" for b in B.objects]
    mors = [(f"0|{m}", f"0|{s}", f"0|{t}") for m, s, t in A.morphisms] + \
           [(f"1|{m}", f"1|{s}", f"1|{t}") for m, s, t in B.morphisms]
    comp = {(f"0|{g}", f"0|{f}"): f"0|{h}" for (g, f), h in A.comp.items()}
    comp.update({(f"1|{g}", f"1|{f}"): f"1|{h}" for (g, f), h in B.comp.items()})
    ident = {f"0|{a}": f"0|{A.ident(a)}" for a in A.objects}
    ident.update({f"1|{b}": f"1|{B.ident(b)}" for b in B.objects})
    return FinCategory(objs, mors, comp, ident, check=False)


def coproduct_inclusions(A, B):
    C = coproduct(A, B)
    if isinstance(C, FinPoset):
        return C, (FunctorData(A, C, {a: f"0|{a}" for a in A.elements}),
                   FunctorData(B, C, {b: f"1|{b}" for b in B.elements}))
    A2, B2 = as_category(A), as_category(B)
    return C, (FunctorData(A2, C, {a: f"0|{a}" for a in A2.objects},
                           {m: f"0|{m}" for m, _, _ in A2.morphisms}),
               FunctorData(B2, C, {b: f"1|{b}" for b in B2.objects},
                           {m: f"1|{m}" for m, _, _ in B2.morphisms}))


def opposite(A):
    if isinstance(A, FinPoset):
        n = len(A)
        return FinPoset(A.elements, [[A.leq[j][i] for j in range(n)] for i in range(n)], check=False)
    return A.opposite()


def combine(kind, A, B=None):
    if kind == "opposite":
        if B is not None:
            raise BadParams("opposite takes one argument")
        return opposite(A)
    if B is None:
        raise BadParams(f"{kind} needs two arguments")
    if kind == "product":
        return product(A, B)
    if kind == "coproduct":
        return coproduct(A, B)
    raise BadParams(f"unknown combination {kind!r}")


def projections(A, B):
    """pr1: A x B -> A and pr2: A x B -> B for posets."""
    P = product(A, B)
    pr1 = FunctorData(P, A, {f"{a},{b}": a for a in A.elements for b in B.elements})
    pr2 = FunctorData(P, B, {f"{a},{b}": b for a in A.elements for b in B.elements})
    return P, pr1, pr2


def product_map(u, v):
    """u x v between product posets."""
    S = product(u.source, v.source)
    T = product(u.target, v.target)
    return FunctorData(S, T, {f"{a},{b}": f"{u(a)},{v(b)}"
                              for a in u.source.elements for b in v.source.elements})


# --- slices, commas, cylinders --------------------------------------------------------


def slice(u, k, side):
    """The slice of objects u-under k (side "under") or u-over k ("over").

    Returns (slice, projection).  For poset functors the slice is the full
    subposet of the source it is isomorphic to."""
    if k not in _objects(u.target):
        raise ObjectNotInTarget(f"{k!r} is not an object of the target")
    if side not in ("under", "over"):
        raise BadParams(f"unknown side {side!r}")
    if u.is_poset_map:
        T = u.target
        if side == "over":
            keep = [j for j in u.source.elements if T.le(u(j), k)]
        else:
            keep = [j for j in u.source.elements if T.le(k, u(j))]
        S = u.source.sub(keep)
        return S, FunctorData(S, u.source, {j: j for j in keep}, check=False)
    J = as_category(u.source)
    K = as_category(u.target)
    uc = u.cat()
    objs = []
    for j in J.objects:
        if side == "over":
            for f in K.hom(uc(j), k):
                objs.append((j, f))
        else:
            for f in K.hom(k, uc(j)):
                objs.append((j, f))
    lab = {o: f"({o[0]},{o[1]})" for o in objs}
    mors = []
    for (j1, f1) in objs:
        for (j2, f2) in objs:
            for g in J.hom(j1, j2):
                if side == "over":
                    ok = K.compose(f2, uc.mor(g)) == f1
                else:
                    ok = K.compose(uc.mor(g), f1) == f2
                if ok:
                    mors.append((f"{lab[(j1, f1)]}:{g}", lab[(j1, f1)], lab[(j2, f2)], g))
    info = {m: g for m, _, _, g in mors}
    comp = {}
    for m1, s1, t1, g1 in mors:
        for m2, s2, t2, g2 in mors:
            if t1 == s2:
                comp[(m2, m1)] = f"{s1}:{J.compose(g2, g1)}"
    ident = {lab[o]: f"{lab[o]}:{J.ident(o[0])}" for o in objs}
    C = FinCategory([lab[o] for o in objs], [(m, s, t) for m, s, t, _ in mors], comp, ident)
    pr = FunctorData(C, J, {lab[o]: o[0] for o in objs}, info)
    return C, pr


def comma(u1, u2):
    """The comma category (u1/u2) with projections and the canonical cell
    u1.pr1 => u2.pr2."""
    if u1.target != u2.target:
        raise TargetMismatch("functors do not share a target")
    if u1.is_poset_map and u2.is_poset_map:
        K = u1.target
        J1, J2 = u1.source, u2.source
        pairs = [(a, b) for a in J1.elements for b in J2.elements if K.le(u1(a), u2(b))]
        els = [f"{a},{b}" for a, b in pairs]
        n = len(pairs)
        M = [[J1.le(pairs[i][0], pairs[j][0]) and J2.le(pairs[i][1], pairs[j][1])
              for j in range(n)] for i in range(n)]
        C = FinPoset(els, M, check=False)
        pr1 = FunctorData(C, J1, {f"{a},{b}": a for a, b in pairs})
        pr2 = FunctorData(C, J2, {f"{a},{b}": b for a, b in pairs})
        cell = NatTransData(compose(u1, pr1), compose(u2, pr2))
        return C, pr1, pr2, cell
    K = as_category(u1.target)
    J1, J2 = as_category(u1.source), as_category(u2.source)
    a1, a2 = u1.cat(), u2.cat()
    objs = [(x, y, f) for x in J1.objects for y in J2.objects for f in K.hom(a1(x), a2(y))]
    lab = {o: f"({o[0]},{o[1]},{o[2]})" for o in objs}
    mors = []
    for o in objs:
        for p in objs:
            for g1 in J1.hom(o[0], p[0]):
                for g2 in J2.hom(o[1], p[1]):
                    if K.compose(p[2], a1.mor(g1)) == K.compose(a2.mor(g2), o[2]):
                        mors.append((f"{lab[o]}:{g1}:{g2}", lab[o], lab[p], g1, g2))
    comp = {}
    for m1, s1, t1, g1, h1 in mors:
        for m2, s2, t2, g2, h2 in mors:
            if t1 == s2:
                comp[(m2, m1)] = f"{s1}:{J1.compose(g2, g1)}:{J2.compose(h2, h1)}"
    ident = {lab[o]: f"{lab[o]}:{J1.ident(o[0])}:{J2.ident(o[1])}" for o in objs}
    C = FinCategory([lab[o] for o in objs], [(m, s, t) for m, s, t, _, _ in mors], comp, ident)
    pr1 = FunctorData(C, J1, {lab[o]: o[0] for o in objs}, {m[0]: m[3] for m in mors})
    pr2 = FunctorData(C, J2, {lab[o]: o[1] for o in objs}, {m[0]: m[4] for m in mors})
    cell = NatTransData(compose(a1, pr1), compose(a2, pr2), {lab[o]: o[2] for o in objs})
    return C, pr1, pr2, cell


def mapping_cylinder(u, orientation="cyl"):
    """Mapping cylinder of u: J -> K inside K x [1].

    ``cyl`` is spanned by (u(j),1) and (k,0) with i(j) = (u(j),1), s(k) = (k,0);
    ``cyl_prime`` swaps the roles of 0 and 1.  Returns (cyl, i, s, q)."""
    if orientation not in ("cyl", "cyl_prime"):
        raise BadParams(f"unknown orientation {orientation!r}")
    top, bot = ("1", "0") if orientation == "cyl" else ("0", "1")
    K = u.target
    img = []
    for j in _objects(u.source):
        if u(j) not in img:
            img.append(u(j))
    keep = {f"{k},{bot}" for k in _objects(K)} | {f"{k},{top}" for k in img}
    if isinstance(K, FinPoset) and u.is_poset_map:
        KI = product(K, chain(1))
        C = KI.sub(keep)
        i = FunctorData(u.source, C, {j: f"{u(j)},{top}" for j in u.source.elements})
        s = FunctorData(K, C, {k: f"{k},{bot}" for k in K.elements})
        q = FunctorData(C, K, {x: x.rsplit(",", 1)[0] for x in C.elements})
        return C, i, s, q
    KI = product(as_category(K), as_category(chain(1)))
    objs = [o for o in KI.objects if o in keep]
    mors = [(m, s_, t) for m, s_, t in KI.morphisms if s_ in keep and t in keep]
    mset = {m for m, _, _ in mors}
    comp = {k: v for k, v in KI.comp.items() if k[0] in mset and k[1] in mset}
    ident = {o: KI.ident(o) for o in objs}
    C = FinCategory(objs, mors, comp, ident)
    K = as_category(K)
    uc = u.cat()
    I1 = as_category(chain(1))
    i = FunctorData(uc.source, C, {j: f"{uc(j)},{top}" for j in uc.source.objects},
                    {m: f"({uc.mor(m)},{I1.ident(top)})" for m, _, _ in uc.source.morphisms})
    s = FunctorData(K, C, {k: f"{k},{bot}" for k in K.objects},
                    {m: f"({m},{I1.ident(bot)})" for m, _, _ in K.morphisms})
    qm = {}
    for m, _, _ in mors:
        inner = m[1:-1]
        # morphism ids are "(f,g)" with g a [1]-morphism id "a->b" (no commas)
        f, _g = inner.rsplit(",", 1)
        qm[m] = f
    q = FunctorData(C, K, {x: x.rsplit(",", 1)[0] for x in objs}, qm)
    return C, i, s, q


# --- predicates ---------------------------------------------------------------------


def functor_props(u):
    """fully_faithful and injective_on_objects by exhaustive hom-set comparison."""
    objs = list(_objects(u.source))
    inj = len({u(x) for x in objs}) == len(objs)
    if u.is_poset_map:
        S, T = u.source, u.target
        ff = all(S.le(a, b) == T.le(u(a), u(b)) for a in objs for b in objs)
    else:
        S, T = as_category(u.source), as_category(u.target)
        ff = True
        for a in objs:
            for b in objs:
                img = sorted(u.mor(m) for m in S.hom(a, b))
                if len(set(img)) != len(img) or set(img) != set(T.hom(u(a), u(b))):
                    ff = False
    return {"fully_faithful": ff, "injective_on_objects": inj}


def category_props(J):
    """has_initial / has_terminal with witnesses."""
    if isinstance(J, FinPoset):
        t, i = J.terminal(), J.initial()
    else:
        t = i = None
        for o in J.objects:
            if t is None and all(len(J.hom(x, o)) == 1 for x in J.objects):
                t = o
            if i is None and all(len(J.hom(o, x)) == 1 for x in J.objects):
                i = o
    return {"has_initial": i is not None, "initial": i,
            "has_terminal": t is not None, "terminal": t}


def sieve_status(u):
    props = functor_props(u)
    base = props["fully_faithful"] and props["injective_on_objects"]
    image = {u(x) for x in _objects(u.source)}
    T = u.target
    if isinstance(T, FinPoset):
        down_closed = all(k in image for y in image for k in T.down(y))
        up_closed = all(k in image for y in image for k in T.up(y))
    else:
        down_closed = all(T.src(m) in image for m, s, t in T.morphisms if t in image)
        up_closed = all(T.tgt(m) in image for m, s, t in T.morphisms if s in image)
    sv = base and down_closed
    cs = base and up_closed
    if sv and cs:
        return "both"
    if sv:
        return "sieve"
    if cs:
        return "cosieve"
    return "neither"


def _is_cartesian(J, K, u, g):
    """g: j' -> j is u-cartesian."""
    jp, j = J.src(g), J.tgt(g)
    f = u.mor(g)
    for h, jpp, _ in J.morphisms:
        if J.tgt(h) != j:
            continue
        # factorizations u(h) = f . m
        for m in K.hom(u(jpp), u(jp)):
            if K.compose(f, m) != u.mor(h):
                continue
            lifts = [hp for hp in J.hom(jpp, jp) if J.compose(g, hp) == h and u.mor(hp) == m]
            if len(lifts) != 1:
                return False
    return True


def _is_cocartesian(J, K, u, g):
    j, jp = J.src(g), J.tgt(g)
    f = u.mor(g)
    for h, _, jpp in J.morphisms:
        if J.src(h) != j:
            continue
        for m in K.hom(u(jp), u(jpp)):
            if K.compose(m, f) != u.mor(h):
                continue
            lifts = [hp for hp in J.hom(jp, jpp) if J.compose(hp, g) == h and u.mor(hp) == m]
            if len(lifts) != 1:
                return False
    return True


def fibration_status(u):
    """Exhaustive search for (co)cartesian lifts."""
    uc = u.cat()
    J, K = uc.source, uc.target
    fib = True
    for j in J.objects:
        for f, k, _ in K.morphisms:
            if K.tgt(f) != uc(j):
                continue
            if not any(uc.mor(g) == f and _is_cartesian(J, K, uc, g)
                       for g, _, t in J.morphisms if t == j):
                fib = False
                break
        if not fib:
            break
    opfib = True
    for j in J.objects:
        for f, s, _ in K.morphisms:
            if s != uc(j):
                continue
            if not any(uc.mor(g) == f and _is_cocartesian(J, K, uc, g)
                       for g, s2, _ in J.morphisms if s2 == j):
                opfib = False
                break
        if not opfib:
            break
    discrete = all(uc.mor(m) != K.ident(uc(s)) or J.is_identity(m)
                   for m, s, t in J.morphisms)
    return {"fibration": fib, "opfibration": opfib, "discrete_fibers": discrete}


def find_adjoint(u, side):
    """The right (or left) adjoint of a poset map, or None."""
    if not u.is_poset_map:
        raise NotAPoset("adjoint search needs poset functors")
    S, T = u.source, u.target
    om = {}
    for y in T.elements:
        if side == "right":
            cand = [x for x in S.elements if T.le(u(x), y)]
            best = [c for c in cand if all(S.le(d, c) for d in cand)]
        elif side == "left":
            cand = [x for x in S.elements if T.le(y, u(x))]
            best = [c for c in cand if all(S.le(c, d) for d in cand)]
        else:
            raise BadParams(f"unknown side {side!r}")
        if not best:
            return None
        om[y] = best[0]
    r = FunctorData(T, S, om, check=False)
    for a, b in T.relations():
        if not S.le(om[a], om[b]):
            return None
    for x in S.elements:
        for y in T.elements:
            if side == "right":
                ok = T.le(u(x), y) == S.le(x, om[y])
            else:
                ok = T.le(y, u(x)) == S.le(om[y], x)
            if not ok:
                return None
    return r


def pullback(u, w):
    """The pullback of posets u: J -> K along w: L -> K.

    Elements are "l,j" with w(l) = u(j), ordered componentwise.  Returns
    (pullback, projection to L, projection to J)."""
    if not (u.is_poset_map and w.is_poset_map):
        raise NotAPoset("pullbacks are built for poset maps")
    if u.target != w.target:
        raise TargetMismatch("maps do not share a target")
    L, J = w.source, u.source
    pairs = [(l, j) for l in L.elements for j in J.elements if w(l) == u(j)]
    labels = [f"{l},{j}" for l, j in pairs]
    M = [[L.le(a[0], b[0]) and J.le(a[1], b[1]) for b in pairs] for a in pairs]
    P = FinPoset(labels, M, check=False)
    pl = FunctorData(P, L, {x: p[0] for x, p in zip(labels, pairs)}, check=False)
    pj = FunctorData(P, J, {x: p[1] for x, p in zip(labels, pairs)}, check=False)
    return P, pl, pj


def detection_hypothesis(i, f, side="coCartesian"):
    """Hypothesis for detecting (co)Cartesian squares i: box -> J of f_! Y (f_* Y).

    coCartesian: i(1,1) is not in the image of f and the corner
    (0,0),(1,0),(0,1) -> {x < i(1,1)} has a left adjoint; Cartesian dually."""
    J = i.target
    if len({i(x) for x in i.source.elements}) != 4:
        return False
    img = {f(x) for x in f.source.elements}
    if side == "coCartesian":
        top = i("1,1")
        corner = ["0,0", "1,0", "0,1"]
        rest = [x for x in J.elements if J.lt(x, top)]
        adj = "left"
    else:
        top = i("0,0")
        corner = ["1,0", "0,1", "1,1"]
        rest = [x for x in J.elements if J.lt(top, x)]
        adj = "right"
    if top in img:
        return False
    C = i.source.sub(corner)
    R = J.sub(rest)
    t = FunctorData(C, R, {c: i(c) for c in corner}, check=False)
    return find_adjoint(t, adj) is not None


def nerve_chains(P, n):
    """All strictly increasing chains x0 < ... < xn, in lexicographic index order."""
    if n < 0:
        return []
    N = len(P)
    L = P.leq
    succ = [[j for j in range(N) if j != i and L[i][j]] for i in range(N)]
    out = []

    def extend(ch):
        if len(ch) == n + 1:
            out.append(tuple(P.elements[i] for i in ch))
            return
        for j in succ[ch[-1]]:
            extend(ch + [j])

    for i in range(N):
        extend([i])
    return out


def all_chains(P):
    """Every nondegenerate chain, grouped by length: list index n holds n-simplices."""
    out = []
    n = 0
    while True:
        ch = nerve_chains(P, n)
        if not ch:
            break
        out.append(ch)
        n += 1
    return out


# --- named shapes -------------------------------------------------------------------


class NamedShape:
    """A poset together with the distinguished functors of its construction."""

    def __init__(self, name, poset, maps=None):
        self.name = name
        self.poset = poset
        self.maps = dict(maps or {})

    def __repr__(self):
        return f"NamedShape({self.name}, {len(self.poset)} elements, maps={sorted(self.maps)})"


def _pt(a, b):
    return f"{a},{b}"


def coface(n, i):
    """d^i: [n-1] -> [n], skipping i."""
    return FunctorData(chain(n - 1), chain(n),
                       {str(k): str(k if k < i else k + 1) for k in range(n)})


def codegeneracy(n, i):
    """s^i: [n+1] -> [n], hitting i twice."""
    return FunctorData(chain(n + 1), chain(n),
                       {str(k): str(k if k <= i else k - 1) for k in range(n + 2)})


def _grid_sub(a, b, drop=()):
    P = product(chain(a), chain(b))
    return P.sub([x for x in P.elements if x not in set(drop)])


def _square_embedding(target, corners):
    """Map [1]x[1] -> target given the images of (0,0),(1,0),(0,1),(1,1)."""
    box = product(chain(1), chain(1))
    keys = ["0,0", "1,0", "0,1", "1,1"]
    return FunctorData(box, target, dict(zip(keys, corners)))


def named_shape(name, params=None):
    params = dict(params or {})
    box = product(chain(1), chain(1))
    push = box.sub(["0,0", "1,0", "0,1"])
    pull = box.sub(["1,0", "0,1", "1,1"])
    if name == "chain":
        n = params.get("n")
        if not isinstance(n, int) or n < 0:
            raise BadParams("chain needs an integer n >= 0")
        return NamedShape(name, chain(n))
    if name == "box":
        return NamedShape(name, box, {"i_push": inclusion(push, box), "i_pull": inclusion(pull, box)})
    if name == "corner_push":
        return NamedShape(name, push, {
            "incl": inclusion(push, box),
            "i": FunctorData(chain(1), push, {"0": "0,0", "1": "1,0"}),
            "corner": point(push, "0,0"),
        })
    if name == "corner_pull":
        return NamedShape(name, pull, {
            "incl": inclusion(pull, box),
            "j": FunctorData(chain(1), pull, {"0": "1,0", "1": "1,1"}),
            "corner": point(pull, "1,1"),
        })
    if name == "pull_n":
        n = params.get("n")
        if not isinstance(n, int) or n < 1:
            raise BadParams("pull_n needs an integer n >= 1")
        labels = [f"e{i}" for i in range(n + 1)] + ["t"]
        P = build_poset(labels, [(f"e{i}", "t") for i in range(n + 1)])
        return NamedShape(name, P, {"t": point(P, "t")})
    if name == "T_shape":
        G = product(chain(2), chain(1))
        KT = G.sub(["0,0", "1,0", "2,0", "0,1"])
        return NamedShape(name, G, {
            "K_T": inclusion(KT, G),
            "i0": FunctorData(chain(1), KT, {"0": "0,0", "1": "1,0"}),
            "i1": inclusion(KT, G),
        })
    if name in ("rotation_J", "rotation_K"):
        K = _grid_sub(2, 2, ["0,2"])
        J = K.sub(["0,0", "1,0", "2,0", "0,1", "1,2"])
        maps = {"i": FunctorData(chain(1), J, {"0": "0,0", "1": "1,0"}), "j": inclusion(J, K)}
        return NamedShape(name, J if name == "rotation_J" else K, maps)
    if name in ("octa_J", "octa_K"):
        K = _grid_sub(4, 2, ["4,0", "0,2"])
        J = K.sub(["0,0", "1,0", "2,0", "3,0", "0,1", "4,1", "1,2"])
        maps = {"i": FunctorData(chain(2), J, {"0": "0,0", "1": "1,0", "2": "2,0"}),
                "j": inclusion(J, K)}
        return NamedShape(name, J if name == "octa_J" else K, maps)
    if name in ("biproduct_L2", "biproduct_L3", "biproduct_L"):
        L = product(chain(2), chain(2))
        L3 = L.sub(["0,0", "1,0", "2,0", "0,1", "0,2"])
        L2 = L.sub(["1,0", "2,0", "0,1", "0,2"])
        ee = coproduct(terminal_poset(), terminal_poset())
        maps = {
            "j1": FunctorData(ee, L2, {"0|*": "1,0", "1|*": "0,1"}),
            "j2": inclusion(L2, L3),
            "j3": inclusion(L3, L),
        }
        P = {"biproduct_L2": L2, "biproduct_L3": L3, "biproduct_L": L}[name]
        return NamedShape(name, P, maps)
    raise UnknownShape(name)
