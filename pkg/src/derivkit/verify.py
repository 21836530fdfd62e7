"""Seeded instance generators and theorem suites.

Every suite runs a battery of checks on ``trials`` generated instances and a
few built-in negative controls.  A control passes when the check it wraps
fails and produces a witness.  Reports are deterministic functions of
(suite, seed, trials); wall-clock time is kept out of the serialized form.
"""

from __future__ import annotations

import json
import random
import time

from . import exactlin as el
from . import fincat as fc
from . import repmodel as rm
from . import stablemodel as sm
from .exactlin import QMatrix, QQ
from .fincat import FunctorData, SquareData, TO_W_U1, TO_U2_V
from .repmodel import Verdict
from .stablemodel import ChainMap, Complex, ChainDiagram

__all__ = ["Verdict", "Report", "UnknownSuite", "gen_instance", "run_suite",
           "long_exact_check", "SUITES"]


class UnknownSuite(ValueError):
    pass


DEFAULT_BOUNDS = {"elements": 6, "dims": 3, "window": (-2, 3)}

REPORT_NOTE = ("Each check realizes a theorem about derivators; a failing positive "
               "verdict indicates an implementation defect.")


def _bounds(size_bounds=None, **over):
    b = dict(DEFAULT_BOUNDS)
    if isinstance(size_bounds, int):
        b["elements"] = size_bounds
    elif size_bounds:
        b.update(size_bounds)
    b.update(over)
    if b["elements"] < 1 or b["dims"] < 0:
        raise ValueError("size bounds must be positive")
    return b


def instance_seed(seed, trial):
    return seed * 100003 + trial


# --- generators ------------------------------------------------------------------------------


def _q(x):
    return QQ.elem(x)


def random_matrix(rng, rows, cols, density=0.6, lo=-2, hi=2):
    data = []
    for _ in range(rows):
        r = {}
        for j in range(cols):
            if rng.random() < density:
                v = rng.randint(lo, hi)
                if v:
                    r[j] = _q(v)
        data.append(r)
    return QMatrix._from_rows(rows, cols, data, QQ)


def random_invertible(rng, n):
    while True:
        M = random_matrix(rng, n, n, 0.7)
        if el.is_iso(M):
            return M


def random_poset(rng, n_max, prefix="p", n_min=1):
    n = rng.randint(n_min, max(n_min, n_max))
    labels = [f"{prefix}{i}" for i in range(n)]
    pairs = [(labels[i], labels[j]) for i in range(n) for j in range(i + 1, n)
             if rng.random() < 0.35]
    return fc.build_poset(labels, pairs)


def _topological(P):
    return sorted(P.elements, key=lambda x: (len(P.down(x)), P.index(x)))


def random_monotone(rng, J, K):
    m = {}
    for j in _topological(J):
        preds = [m[x] for x in J.down(j) if x != j]
        cands = [k for k in K.elements if all(K.le(p, k) for p in preds)]
        if not cands:
            k0 = rng.choice(K.elements)
            return FunctorData(J, K, {x: k0 for x in J.elements})
        m[j] = rng.choice(cands)
    return FunctorData(J, K, m)


def random_sieve(rng, P, kind="sieve"):
    """Inclusion of a random proper nonempty sieve (or cosieve) when one exists."""
    els = list(P.elements)
    for _ in range(20):
        seed_set = [x for x in els if rng.random() < 0.4] or [rng.choice(els)]
        if kind == "sieve":
            keep = {y for x in seed_set for y in P.down(x)}
        else:
            keep = {y for x in seed_set for y in P.up(x)}
        if 0 < len(keep) < len(els) or len(els) == 1:
            break
    S = P.sub([x for x in els if x in keep])
    return fc.inclusion(S, P)


def random_vec_diagram(rng, P, max_dim=3):
    """Cokernel of a random map between sums of representables on a poset."""
    C = P.as_category()
    for _ in range(50):
        a = [rng.choice(P.elements) for _ in range(rng.randint(1, max_dim + 1))]
        b = [rng.choice(P.elements) for _ in range(rng.randint(0, 2))]
        vecs = []
        for bj in b:
            vecs.append({i: _q(rng.randint(-2, 2)) for i, ai in enumerate(a)
                         if P.le(ai, bj)})
        basis = {k: [i for i, ai in enumerate(a) if P.le(ai, k)] for k in P.elements}
        quot = {}
        ok = True
        for k in P.elements:
            idx = basis[k]
            pos = {i: t for t, i in enumerate(idx)}
            cols = []
            for j, bj in enumerate(b):
                if P.le(bj, k):
                    cols.append({pos[i]: v for i, v in vecs[j].items() if v})
            R = QMatrix.from_columns(cols, len(idx), QQ)
            pi, E = el.quotient_data(R, len(idx))
            quot[k] = (pos, pi, E)
            if pi.rows > max_dim:
                ok = False
        if not ok:
            continue
        dims = {k: quot[k][1].rows for k in P.elements}
        maps = {}
        for s, t in P.relations():
            pos_s, _, Es = quot[s]
            pos_t, pit, _ = quot[t]
            inc = QMatrix.from_columns([{pos_t[i]: _q(1)} for i in pos_s], len(pos_t), QQ)
            maps[f"{s}->{t}"] = pit @ inc @ Es
        return rm.VecDiagram(C, dims, maps, QQ)
    return rm.zero_diagram(C)


def random_complex(rng, b):
    lo_w, hi_w = b["window"]
    length = rng.randint(1, min(b.get("length", 3), hi_w - lo_w + 1))
    lo = rng.randint(lo_w, hi_w - length + 1)
    dims = {n: rng.randint(0, b["dims"]) for n in range(lo, lo + length)}
    diff = {}
    for n in range(lo + 1, lo + length):
        K = el.kernel(diff[n - 1]) if n - 1 in diff else QMatrix.identity(dims[n - 1], QQ)
        diff[n] = K @ random_matrix(rng, K.cols, dims[n], 0.5)
    return Complex(dims, diff, QQ)


def random_chain_map(rng, X, Y, homotopy=True):
    """A homology-level part through cycle bases plus a random nullhomotopic part."""
    cX = sm.Contraction(X)
    comps = {}
    for n in X.degrees:
        hc = cX.hc.get(n)
        if hc is None or hc.rows == 0 or Y.dim(n) == 0:
            continue
        Z = el.kernel(Y.d(n))
        if Z.cols == 0:
            continue
        comps[n] = Z @ random_matrix(rng, Z.cols, hc.rows) @ hc
    f = ChainMap(X, Y, comps)
    return f + _nullhomotopic(rng, X, Y) if homotopy else f


def random_quasi_iso(rng, X, b):
    """X -> X + Cone(id_Z), perturbed by a nullhomotopic map."""
    Z = random_complex(rng, b)
    C, _, _ = sm.classical_cone(ChainMap.identity(Z))
    S, incs, _ = sm.direct_sum([X, C])
    return incs[0] + _nullhomotopic(rng, X, S)


def _nullhomotopic(rng, X, Y):
    h = {n: random_matrix(rng, Y.dim(n + 1), X.dim(n), 0.4) for n in X.degrees}
    comps = {}
    for n in set(X.degrees) | set(Y.degrees):
        term = QMatrix.zeros(Y.dim(n), X.dim(n), QQ)
        if n in h:
            term = term + Y.d(n + 1) @ h[n]
        if n - 1 in h:
            term = term + h[n - 1] @ X.d(n)
        comps[n] = term
    return ChainMap(X, Y, comps)


def random_map_pair(rng, b, quasi_iso=None):
    X = random_complex(rng, b)
    if quasi_iso is None:
        quasi_iso = rng.random() < 0.3
    if quasi_iso:
        return random_quasi_iso(rng, X, b)
    Y = random_complex(rng, b)
    return random_chain_map(rng, X, Y)


def random_forest(rng, P):
    """A forest on P's elements: each element keeps at most one lower cover."""
    pairs = []
    for x in P.elements:
        lower = [a for a, c in P.covers() if c == x]
        if lower and rng.random() < 0.8:
            pairs.append((rng.choice(lower), x))
    return fc.build_poset(P.elements, pairs)


def random_chain_diagram(rng, P, b):
    """hkan along a random forest in P of free data on the forest."""
    T = random_forest(rng, P)
    vals = {x: random_complex(rng, b) for x in P.elements}
    maps = {}
    for a, c in T.covers():
        maps[(a, c)] = random_chain_map(rng, vals[a], vals[c])
    Y = ChainDiagram(T, vals, maps)
    return sm.HKan(FunctorData(T, P, {x: x for x in P.elements}), Y, "left").result


def gen_instance(kind, seed, size_bounds=None):
    """Deterministic random instance of the given kind."""
    b = _bounds(size_bounds)
    rng = random.Random(seed)
    n = b["elements"]
    if kind == "poset":
        return random_poset(rng, n)
    if kind == "monotone_map":
        J = random_poset(rng, n, "j")
        K = random_poset(rng, n, "k")
        return random_monotone(rng, J, K)
    if kind == "vec_diagram":
        return random_vec_diagram(rng, random_poset(rng, n), b["dims"])
    if kind == "chain_diagram":
        return random_chain_diagram(rng, random_poset(rng, min(n, 4)), b)
    if kind == "chain_map":
        return random_map_pair(rng, b)
    raise ValueError(f"unknown instance kind {kind!r}")


# --- reports -----------------------------------------------------------------------------------


class Report:
    def __init__(self, suite, seed, trials, verdicts, duration=0.0):
        self.suite = suite
        self.seed = seed
        self.trials = trials
        self.verdicts = list(verdicts)
        self.duration = duration

    @property
    def totals(self):
        p = sum(1 for v in self.verdicts if v.passed)
        return {"total": len(self.verdicts), "passed": p, "failed": len(self.verdicts) - p}

    @property
    def passed(self):
        return all(v.passed for v in self.verdicts)

    def failures(self):
        return [v for v in self.verdicts if not v.passed]

    def to_json(self):
        return {"suite": self.suite, "seed": self.seed, "trials": self.trials,
                "note": REPORT_NOTE, "verdicts": [v.to_json() for v in self.verdicts],
                "totals": self.totals, "pass": self.passed}

    def dumps(self):
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    def table(self):
        w = max([len(v.name) for v in self.verdicts] + [7])
        lines = [f"suite {self.suite}  seed {self.seed}  trials {self.trials}",
                 f"{'verdict'.ljust(w)}  result  instance",
                 f"{'-' * w}  ------  --------"]
        for v in self.verdicts:
            seed = "-" if v.seed is None else str(v.seed)
            lines.append(f"{v.name.ljust(w)}  {'pass' if v.passed else 'FAIL':6}  {seed}")
        t = self.totals
        lines.append(f"{t['passed']}/{t['total']} passed; overall {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def _collect(name, seed, checks, info=None):
    """The first failing (ok, witness) pair decides the verdict."""
    for ok, wit in checks:
        if not ok:
            return Verdict(name, False, seed, wit if wit is not None else {"reason": "failed"},
                           info)
    return Verdict(name, True, seed, None, info)


def _control(name, verdict):
    """A negative control passes when the wrapped check fails with a witness."""
    ok = (not verdict.passed) and verdict.witness is not None
    return Verdict(f"control:{name}", ok, verdict.seed, verdict.witness,
                   {"expected": "fail", "observed": "fail" if not verdict.passed else "pass"})


def _gd(d):
    return {str(n): k for n, k in sorted(d.items()) if k}


def _hdims(X):
    return {n: k for n, k in sm.homology(X).items() if k}


# --- Model A suites ----------------------------------------------------------------------------


E = fc.terminal_poset()


def kan_formula_square(u, k, side):
    """The comparison square of the slice over (under) k; its mate is the
    pointwise formula map."""
    S, pr = fc.slice(u, k, side="over" if side == "left" else "under")
    p = FunctorData(S, E, {x: "*" for x in S.elements})
    w = FunctorData(E, u.target, {"*": k})
    return SquareData(p, u, pr, w, direction=TO_W_U1 if side == "left" else TO_U2_V)


def reversed_cell_control():
    """A square read against its cell: the right mate is lim X -> X_1 on [1]."""
    I = fc.chain(1)
    p = FunctorData(I, E, {"0": "*", "1": "*"})
    v = FunctorData(I, I, {"0": "1", "1": "1"})
    w = FunctorData(E, E, {"*": "*"})
    sq = SquareData(p, p, v, w, direction=TO_U2_V)
    X = rm.diagram_from_chain([1, 0], [QMatrix.zeros(0, 1, QQ)])
    return rm.exact_square_verdict(sq, [X], "reversed_cell")


def _mate_verdict(name, seed, square, samples):
    v = rm.exact_square_verdict(square, samples, name)
    v.seed = seed
    return v


def _trial_der_axioms_A(rng, s, b):
    n = b["elements"]
    J = random_poset(rng, n, "j")
    K = random_poset(rng, n, "k")
    u = random_monotone(rng, J, K)
    X = random_vec_diagram(rng, J, b["dims"])
    Y = random_vec_diagram(rng, K, b["dims"])
    out = []
    for side in ("left", "right"):
        checks = []
        for k in K.elements:
            v = rm.exact_square_verdict(kan_formula_square(u, k, side), [X], "der4")
            checks.append((v.passed, None if v.passed else dict(v.witness, k=k)))
        out.append(_collect(f"der4_{side}", s, checks))
    a = rm.nat_dim(rm.kan(u, X, "left"), Y)
    c = rm.nat_dim(X, rm.restrict(u, Y))
    out.append(_collect("adjunction_left", s, [(a == c, {"lhs": a, "rhs": c})]))
    Xk = rm.kan(u, X, "right")
    a = rm.nat_dim(Y, Xk)
    c = rm.nat_dim(rm.restrict(u, Y), X)
    out.append(_collect("adjunction_right", s, [(a == c, {"lhs": a, "rhs": c})]))
    # (Der1): splitting over a coproduct and gluing back is the identity
    A = random_poset(rng, 3, "a")
    B = random_poset(rng, 3, "b")
    C = fc.coproduct(A, B)
    Z = random_vec_diagram(rng, C, b["dims"])
    _, _, glued = rm.reconstruct_coproduct(A, B, Z)
    out.append(_collect("der1_coproduct", s, [(glued == Z, {"dims": Z.dims})]))
    return out


def _opfibration(rng, b):
    for _ in range(30):
        J = random_poset(rng, 4, "j")
        K = random_poset(rng, 3, "k")
        u = random_monotone(rng, J, K)
        if fc.fibration_status(u)["opfibration"]:
            return u
    K = random_poset(rng, 3, "k")
    F = random_poset(rng, 2, "f")
    P, pr1, _ = fc.projections(K, F)
    return pr1


def _right_adjoint(rng):
    for _ in range(30):
        J = random_poset(rng, 4, "j")
        K = random_poset(rng, 4, "k")
        R = random_monotone(rng, J, K)
        if fc.find_adjoint(R, "left") is not None:
            return R
    K = random_poset(rng, 3, "k")
    M = fc.build_poset(["m0", "m1", "m2"], [("m0", "m1"), ("m0", "m2")])
    P, pr1, _ = fc.projections(K, M)
    return pr1


def _trial_exact_squares(rng, s, b):
    d = b["dims"]
    out = []
    # comma square
    A = random_poset(rng, 4, "a")
    B = random_poset(rng, 4, "b")
    C = random_poset(rng, 4, "c")
    u1 = random_monotone(rng, A, C)
    u2 = random_monotone(rng, B, C)
    Cm, pr1, pr2, cell = fc.comma(u1, u2)
    sq = SquareData(pr2, u1, pr1, u2, cell, TO_W_U1)
    out.append(_mate_verdict("comma", s, sq, [random_vec_diagram(rng, A, d)]))
    # Kan formula square
    J = random_poset(rng, 5, "j")
    K = random_poset(rng, 5, "k")
    u = random_monotone(rng, J, K)
    k = rng.choice(K.elements)
    out.append(_mate_verdict("kan_formula", s, kan_formula_square(u, k, "left"),
                             [random_vec_diagram(rng, J, d)]))
    # pullback along an opfibration
    p = _opfibration(rng, b)
    L = random_poset(rng, 3, "l")
    w = random_monotone(rng, L, p.target)
    P, pl, pj = fc.pullback(p, w)
    sq = SquareData(pl, p, pj, w, direction=TO_W_U1)
    out.append(_mate_verdict("opfibration_pullback", s, sq,
                             [random_vec_diagram(rng, p.source, d)]))
    # cofinality of a right adjoint
    R = _right_adjoint(rng)
    pJ = FunctorData(R.source, E, {x: "*" for x in R.source.elements})
    pK = FunctorData(R.target, E, {x: "*" for x in R.target.elements})
    ide = FunctorData(E, E, {"*": "*"})
    sq = SquareData(pJ, pK, R, ide, direction=TO_W_U1)
    out.append(_mate_verdict("cofinality", s, sq, [random_vec_diagram(rng, R.target, d)]))
    return out


# --- Model B helpers ------------------------------------------------------------------------------


def long_exact_check(t, name="les"):
    """Exactness of the homology long exact sequence of a Triangle."""
    Hf = sm.homology_map(t.f)
    Hg = sm.homology_map(t.g)
    Hh = sm.homology_map(t.h)
    dX, dY, dC = sm.homology(t.X), sm.homology(t.Y), sm.homology(t.C)
    dS = sm.homology(t.S)
    F = t.X.field
    Hd = {}
    for n in dC:
        if n in t.shift_iso and n in Hh:
            Hd[n] = t.shift_iso[n] @ Hh[n]
        else:
            Hd[n] = QMatrix.zeros(dX.get(n - 1, 0), dC[n], F)
    ok, wit = sm.les_check(dX, dY, dC, Hf, Hg, Hd, F)
    if ok:
        for n, M in t.shift_iso.items():
            if not el.is_iso(M):
                ok, wit = False, {"reason": "shift identification not invertible", "degree": n}
                break
    if not ok:
        wit = dict(wit, dims={"X": _gd(dX), "Y": _gd(dY), "C": _gd(dC), "S": _gd(dS)})
    return Verdict(name, ok, None, wit)


def corrupted_triangle_control():
    """triangle(Q -> 0) with its third map replaced by zero."""
    Q0 = Complex.point(0)
    t = sm.triangle(ChainMap.zero(Q0, Complex.zero()))
    bad = sm.Triangle(t.f, t.g, ChainMap.zero(t.C, t.S), t.shift_iso, name="corrupted")
    return long_exact_check(bad, "les_corrupted")


def _square_witness(Q):
    aug, coaug = sm._square_status(Q)
    return {"corner_homology": _gd(sm.homology(aug.source)),
            "top_homology": _gd(sm.homology(aug.target))}


def _dims_witness(**cs):
    return {k: _gd(sm.homology(c)) for k, c in cs.items()}


def _small(b, **kw):
    c = dict(b)
    c.update(kw)
    return c


# --- pointed ------------------------------------------------------------------------------------


def _detection_instance(rng, b):
    """A square i in J and f: K -> J satisfying the detection hypothesis."""
    for _ in range(40):
        J = random_poset(rng, 5, "j", n_min=4)
        box = sm.BOX
        cands = []
        for a in J.elements:
            for c in J.elements:
                for d in J.elements:
                    for e in J.elements:
                        if len({a, c, d, e}) == 4 and J.lt(a, c) and J.lt(a, d) \
                                and J.lt(c, e) and J.lt(d, e):
                            cands.append((a, c, d, e))
        if not cands:
            continue
        corners = rng.choice(cands)
        i = FunctorData(box, J, dict(zip(["0,0", "1,0", "0,1", "1,1"], corners)))
        rest = [x for x in J.elements if x != corners[3]]
        Ksub = J.sub(rest)
        keep = [x for x in rest if rng.random() < 0.7] or rest
        Kp = Ksub.sub(keep)
        f = FunctorData(Kp, J, {x: x for x in Kp.elements})
        if fc.detection_hypothesis(i, f, "coCartesian"):
            return i, f
    box = sm.BOX
    return (FunctorData(box, box, {x: x for x in box.elements}),
            FunctorData(sm.PUSH, box, {x: x for x in sm.PUSH.elements}))


def _trial_pointed(rng, s, b):
    out = []
    bb = _small(b, dims=2, length=2)
    P = random_poset(rng, 5, "p")
    kind = rng.choice(["sieve", "cosieve"])
    u = random_sieve(rng, P, kind)
    X = random_chain_diagram(rng, u.source, bb)
    side = "left" if kind == "cosieve" else "right"
    D = sm.hkan(u, X, side)
    img = {u(x) for x in u.source.elements}
    bad = [k for k in P.elements if k not in img and not D.values[k].is_zero()]
    out.append(_collect("extension_by_zero", s, [(not bad, {"kind": kind, "nonzero_at": bad})]))
    # C ~ 1^? and F ~ 0^!
    f = random_map_pair(rng, bb)
    C, w = sm.cone_as_exceptional(f)
    Cc = sm.classical_cone(f)[0]
    out.append(_collect("cone_is_1?", s, [
        (_hdims(C) == _hdims(Cc), _dims_witness(exceptional=C, cone=Cc)),
        (w.verify(), {"reason": "witness is not a quasi-isomorphism"})]))
    F, w = sm.fiber_as_coexceptional(f)
    Fc = sm.classical_fiber(f)[0]
    out.append(_collect("fiber_is_0!", s, [
        (_hdims(F) == _hdims(Fc), _dims_witness(exceptional=F, fiber=Fc)),
        (w.verify(), {"reason": "witness is not a quasi-isomorphism"})]))
    # detection of coCartesian squares
    i, g = _detection_instance(rng, b)
    Y = random_chain_diagram(rng, g.source, bb)
    Xd = sm.hkan(g, Y, "left")
    Q = Xd.restrict(i)
    st = sm.cocartesian_status(Q)
    out.append(_collect("detection", s, [(st["coCartesian"], _square_witness(Q))]))
    return out


def nonzero_extension_control():
    """Left Kan extension along the sieve 0: e -> [1] is not zero at 1."""
    X = sm._point_diagram(Complex.point(0))
    u = FunctorData(E, fc.chain(1), {"*": "0"})
    D = sm.hkan(u, X, "left")
    bad = [k for k in ["1"] if not D.values[k].is_zero()]
    return _collect("extension_by_zero_sieve", None,
                    [(not bad, {"nonzero_at": bad, "homology": _gd(sm.homology(D.values["1"]))})])


# --- stable squares -----------------------------------------------------------------------------


def _random_corner(rng, P, source, b):
    """Random data on a corner shape with the given source vertex."""
    others = [x for x in P.elements if x != source]
    vals = {source: random_complex(rng, b)}
    maps = {}
    for x in others:
        vals[x] = random_complex(rng, b)
        if source == "0,0":
            maps[(source, x)] = random_chain_map(rng, vals[source], vals[x])
        else:
            maps[(x, source)] = random_chain_map(rng, vals[x], vals[source])
    return ChainDiagram(P, vals, maps)


def cancellation_instance(rng, b):
    """X on [2]x[1]: i_! of data on K_T with the value at (2,1) post-composed
    by a random map r (the identity half of the time)."""
    vals = {x: random_complex(rng, b) for x in sm.K_T.elements}
    maps = {("0,0", "1,0"): random_chain_map(rng, vals["0,0"], vals["1,0"]),
            ("1,0", "2,0"): random_chain_map(rng, vals["1,0"], vals["2,0"]),
            ("0,0", "0,1"): random_chain_map(rng, vals["0,0"], vals["0,1"])}
    W = ChainDiagram(sm.K_T, vals, maps)
    X = sm.hkan(fc.inclusion(sm.K_T, sm.T_SHAPE), W, "left")
    if rng.random() < 0.5:
        return X, True
    V = X.values["2,1"]
    if rng.random() < 0.5:
        r = random_quasi_iso(rng, V, b)
    else:
        r = random_chain_map(rng, V, random_complex(rng, b))
    vals = dict(X.values)
    vals["2,1"] = r.target
    maps = {}
    for (a, c), m in X.maps.items():
        maps[(a, c)] = m.then(r) if c == "2,1" else m
    return ChainDiagram(sm.T_SHAPE, vals, maps), False


def _trial_stable_squares(rng, s, b):
    out = []
    bb = _small(b, dims=2, length=2)
    W = _random_corner(rng, sm.PUSH, "0,0", bb)
    Q = sm.hkan(fc.inclusion(sm.PUSH, sm.BOX), W, "left")
    st = sm.cocartesian_status(Q)
    out.append(_collect("pushout_bicartesian", s,
                        [(st["coCartesian"] and st["cartesian"], dict(st, **_square_witness(Q)))]))
    W = _random_corner(rng, sm.PULL, "1,1", bb)
    Q = sm.hkan(fc.inclusion(sm.PULL, sm.BOX), W, "right")
    st = sm.cocartesian_status(Q)
    out.append(_collect("pullback_bicartesian", s,
                        [(st["coCartesian"] and st["cartesian"], dict(st, **_square_witness(Q)))]))
    X, _ = cancellation_instance(rng, bb)
    d2 = sm.is_bicartesian(X, ("0,0", "1,0", "0,1", "1,1"))
    d0 = sm.is_bicartesian(X, ("1,0", "2,0", "1,1", "2,1"))
    d1 = sm.is_bicartesian(X, ("0,0", "2,0", "0,1", "2,1"))
    out.append(Verdict("cancellation", (not d2) or (d0 == d1), s,
                       None if ((not d2) or d0 == d1) else {"d2": d2, "d0": d0, "d1": d1},
                       {"d0": d0, "d1": d1, "d2": d2}))
    f = random_map_pair(rng, bb, quasi_iso=rng.random() < 0.5)
    qi = sm.is_quasi_iso_by_homology(f)
    C, _ = sm.pointed_functor("cone", f)
    acyc = sm.is_acyclic(C)
    out.append(Verdict("isocone", qi == acyc, s,
                       None if qi == acyc else {"quasi_iso": qi, "cone_acyclic": acyc,
                                                 "cone": _gd(sm.homology(C))},
                       {"quasi_iso": qi}))
    Y = random_complex(rng, bb)
    h0 = _hdims(Y)
    h1 = _hdims(sm.loop(sm.suspension(Y)))
    h2 = _hdims(sm.suspension(sm.loop(Y)))
    out.append(_collect("loop_suspension", s, [(h0 == h1 == h2, {
        "X": _gd(h0), "loop_suspension": _gd(h1), "suspension_loop": _gd(h2)})]))
    return out


def not_cocartesian_control():
    """0 <- Q -> 0 with Q in degree 0 at (1,1): not coCartesian."""
    Q0 = Complex.point(0)
    Z = Complex.zero()
    vals = {"0,0": Q0, "1,0": Z, "0,1": Z, "1,1": Q0}
    maps = {("0,0", "1,0"): ChainMap.zero(Q0, Z), ("0,0", "0,1"): ChainMap.zero(Q0, Z),
            ("1,0", "1,1"): ChainMap.zero(Z, Q0), ("0,1", "1,1"): ChainMap.zero(Z, Q0)}
    Q = ChainDiagram(sm.BOX, vals, maps)
    st = sm.cocartesian_status(Q)
    return _collect("not_cocartesian", None, [(st["coCartesian"], _square_witness(Q))])


# --- triangulation ------------------------------------------------------------------------------


def _trial_triangulation(rng, s, b):
    out = []
    bb = _small(b, dims=2, length=2)
    f = random_map_pair(rng, bb)
    t = sm.triangle(f)
    sq_ok = all(v["coCartesian"] and v["cartesian"] for v in t.square_status.values())
    out.append(_collect("triangle_squares", s, [(sq_ok, {str(k): v for k, v in t.square_status.items()})]))
    wv = t.verify_witnesses()
    out.append(_collect("triangle_witnesses", s, [(all(wv.values()), wv)]))
    v = long_exact_check(t, "triangle_les")
    v.seed = s
    out.append(v)
    r = sm.rotate(f)
    out.append(_collect("rotation_sign", s, [(r.sign_ok, r.to_json())], {"sign": r.sign()}))
    v = long_exact_check(r.triangle, "rotated_les")
    v.seed = s
    out.append(v)
    bo = _small(b, dims=1, length=2)
    X = random_complex(rng, bo)
    Y = random_complex(rng, bo)
    Z = random_complex(rng, bo)
    f1 = random_chain_map(rng, X, Y)
    f2 = random_chain_map(rng, Y, Z)
    o = sm.octahedron(f1, f2)
    bad = [list(k) for k, st in o.squares.items() if not (st["coCartesian"] and st["cartesian"])]
    out.append(_collect("octahedron_squares", s, [(not bad, {"failing": bad})]))
    wv = {k: w.verify() for k, w in o.witnesses.items()}
    out.append(_collect("octahedron_witnesses", s, [(all(wv.values()), wv)]))
    for name, tri in o.triangles.items():
        v = long_exact_check(tri, f"octahedron_{name}_les")
        v.seed = s
        out.append(v)
    return out


# --- additivity -------------------------------------------------------------------------------


def _trial_additivity(rng, s, b):
    out = []
    bb = _small(b, dims=2, length=2)
    X = random_complex(rng, bb)
    Y = random_complex(rng, bb)
    r = sm.biproduct(X, Y)
    hX, hY, hB = _hdims(X), _hdims(Y), _hdims(r.B)
    want = {n: hX.get(n, 0) + hY.get(n, 0) for n in set(hX) | set(hY)}
    want = {n: k for n, k in want.items() if k}
    sq = all(v["coCartesian"] and v["cartesian"] for v in r.squares.values())
    wv = {k: w.verify() for k, w in r.witnesses.items()}
    out.append(_collect("biproduct", s, [
        (hB == want, {"B": _gd(hB), "expected": _gd(want)}),
        (sq, {"squares": {str(k): v for k, v in r.squares.items()}}),
        (all(wv.values()), wv),
        (sm.is_acyclic(r.Z), {"Z": _gd(sm.homology(r.Z))})]))
    W = random_complex(rng, bb)
    checks = []
    for n in (2, 3):
        m = sm.segal_map(W, n)
        checks.append((sm.is_quasi_iso_by_homology(m), {"n": n}))
    out.append(_collect("segal", s, checks))
    H = sm.homology_map(sm.invert_map(W))
    checks = [(M == -QMatrix.identity(M.rows, QQ), {"degree": n, "matrix": M.to_json()})
              for n, M in H.items()]
    out.append(_collect("invert_is_minus_id", s, checks))
    cm = sm.concat_homology(W)
    checks = []
    for n, M in cm.items():
        h = M.rows
        g1 = random_matrix(rng, h, 1, 0.8)
        g2 = random_matrix(rng, h, 1, 0.8)
        lhs = M @ el.vstack([g1, g2], 1, QQ)
        checks.append((lhs == g1 + g2, {"degree": n, "concat": lhs.to_json(),
                                         "sum": (g1 + g2).to_json()}))
    out.append(_collect("concat_is_sum", s, checks))
    return out


def invert_plus_id_control():
    """sigma* = +id must fail on Omega Q."""
    H = sm.homology_map(sm.invert_map(Complex.point(0)))
    checks = [(M == QMatrix.identity(M.rows, QQ), {"degree": n, "matrix": M.to_json()})
              for n, M in H.items()]
    return _collect("invert_is_plus_id", None, checks)


# --- recollement ------------------------------------------------------------------------------


def _recollement_verdicts(j, X, s, tag):
    out = []
    for name, (A, Xd, B, a, b) in sorted(sm.recollement_triangles(j, X).items()):
        checks = []
        for k in X.shape.elements:
            ak, bk = a.comps[k], b.comps[k]
            ok = sm.is_distinguished(ak, bk)
            checks.append((ok, {"level": k, "A": _gd(sm.homology(ak.source)),
                                "X": _gd(sm.homology(ak.target)),
                                "B": _gd(sm.homology(bk.target))}))
        out.append(_collect(f"{tag}_{name}", s, checks))
    return out


def _trial_recollement(rng, s, b):
    bb = _small(b, dims=2, length=2)
    I = fc.chain(1)
    X = random_chain_diagram(rng, I, bb)
    j = fc.inclusion(I.sub(["0"]), I)
    out = _recollement_verdicts(j, X, s, "interval")
    P = random_poset(rng, 4, "p", n_min=4)
    j = random_sieve(rng, P, "sieve")
    X = random_chain_diagram(rng, P, _small(b, dims=1, length=2))
    out += _recollement_verdicts(j, X, s, "poset4")
    return out


def recollement_control():
    """(a, 0) in place of the gluing pair on Q = Q over [1] is not distinguished."""
    I = fc.chain(1)
    Q0 = Complex.point(0)
    X = ChainDiagram(I, {"0": Q0, "1": Q0}, {("0", "1"): ChainMap.identity(Q0)})
    j = fc.inclusion(I.sub(["0"]), I)
    A, Xd, B, a, b = sm.recollement_triangles(j, X)["R2a"]
    k = "0"
    z = ChainMap.zero(b.comps[k].source, b.comps[k].target)
    ok = sm.is_distinguished(a.comps[k], z)
    return _collect("zero_gluing_map", None, [(ok, {"level": k,
                                                    "X": _gd(sm.homology(Xd.values[k]))})])


# --- products with a fixed shape -----------------------------------------------------------


def _evaluation_checks(M, u, X, m):
    """Evaluation at m commutes with (id x u)_! and (id x u)_*: comparison maps."""
    J, K = u.source, u.target
    iu = fc.product_map(fc.identity_functor(M), u)
    at_m = FunctorData(J, X.shape, {j: f"{m},{j}" for j in J.elements})
    Xm = X.restrict(at_m)
    res = []
    for side in ("left", "right"):
        A = sm.HKan(iu, X, side)
        B = sm.HKan(u, Xm, side)
        for k in K.elements:
            ra, rb = A.rep[f"{m},{k}"], B.rep[k]
            phi = {j: f"{m},{j}" for j in rb.P.elements}
            c = rb.induced(ra, phi) if side == "left" else ra.induced(rb, phi)
            res.append((sm.is_quasi_iso(c), {"side": side, "m": m, "k": k,
                                             "product": _gd(sm.homology(ra.total)),
                                             "evaluated": _gd(sm.homology(rb.total))}))
    return res


def _trial_dprime_shift(rng, s, b):
    bb = _small(b, dims=2, length=2)
    M = random_poset(rng, 3, "m")
    J = random_poset(rng, 3, "j")
    K = random_poset(rng, 3, "k")
    u = random_monotone(rng, J, K)
    X = random_chain_diagram(rng, fc.product(M, J), bb)
    checks = []
    for m in M.elements:
        checks += _evaluation_checks(M, u, X, m)
    return [_collect("evaluation_preserves_kan", s, checks)]


def shifted_evaluation_control():
    """Comparing against the value at a smaller m fails on Q -> 0."""
    M = fc.chain(1)
    u = FunctorData(E, E, {"*": "*"})
    Q0 = Complex.point(0)
    Z = Complex.zero()
    P = fc.product(M, E)
    X = ChainDiagram(P, {"0,*": Q0, "1,*": Z}, {("0,*", "1,*"): ChainMap.zero(Q0, Z)})
    iu = fc.product_map(fc.identity_functor(M), u)
    A = sm.HKan(iu, X, "left")
    Xm = X.restrict(FunctorData(E, P, {"*": "0,*"}))
    B = sm.HKan(u, Xm, "left")
    c = B.rep["*"].induced(A.rep["1,*"], {"*": "0,*"})
    return _collect("wrong_fiber", None, [(sm.is_quasi_iso(c), {
        "source": _gd(sm.homology(c.source)), "target": _gd(sm.homology(c.target))})])


# --- dispatch ----------------------------------------------------------------------------------


SUITES = {
    "der_axioms_A": (_trial_der_axioms_A, [("reversed_cell", reversed_cell_control)]),
    "exact_squares": (_trial_exact_squares, [("reversed_cell", reversed_cell_control)]),
    "pointed": (_trial_pointed, [("extension_along_sieve", nonzero_extension_control)]),
    "stable_squares": (_trial_stable_squares, [("not_cocartesian", not_cocartesian_control)]),
    "triangulation": (_trial_triangulation, [("corrupted_triangle", corrupted_triangle_control)]),
    "additivity": (_trial_additivity, [("invert_plus_id", invert_plus_id_control)]),
    "recollement": (_trial_recollement, [("zero_gluing_map", recollement_control)]),
    "dprime_shift": (_trial_dprime_shift, [("wrong_fiber", shifted_evaluation_control)]),
}


def run_trial(name, inst_seed, size_bounds=None):
    """Replay one trial from its instance seed."""
    if name not in SUITES:
        raise UnknownSuite(name)
    trial, _ = SUITES[name]
    return trial(random.Random(inst_seed), inst_seed, _bounds(size_bounds))


def run_suite(name, seed=1, trials=10, size_bounds=None):
    if name not in SUITES:
        raise UnknownSuite(name)
    if trials < 1:
        raise ValueError("trials must be at least 1")
    t0 = time.perf_counter()
    trial, controls = SUITES[name]
    b = _bounds(size_bounds)
    verdicts = []
    for t in range(trials):
        s = instance_seed(seed, t)
        for v in trial(random.Random(s), s, b):
            v.name = f"{v.name}[{t}]"
            verdicts.append(v)
    for cname, fn in controls:
        verdicts.append(_control(cname, fn()))
    return Report(name, seed, trials, verdicts, time.perf_counter() - t0)
