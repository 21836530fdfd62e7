import random

import pytest
from hypothesis import given, settings, strategies as st

from derivkit import fincat as fc
from derivkit.fincat import FunctorData, build_poset, chain, terminal_poset

import oracles

E = terminal_poset()


def pt(P, x):
    return FunctorData(E, P, {"*": x})


@st.composite
def posets(draw, max_n=5, prefix="p"):
    n = draw(st.integers(1, max_n))
    labels = [f"{prefix}{i}" for i in range(n)]
    pairs = [(labels[i], labels[j]) for i in range(n) for j in range(i + 1, n)
             if draw(st.booleans())]
    return build_poset(labels, pairs), pairs


@st.composite
def monotone_maps(draw, max_n=4):
    J, _ = draw(posets(max_n, "j"))
    K, _ = draw(posets(max_n, "k"))
    seed = draw(st.integers(0, 10 ** 6))
    rng = random.Random(seed)
    m = {}
    order = sorted(J.elements, key=lambda x: len(J.down(x)))
    for j in order:
        preds = [m[x] for x in J.down(j) if x != j]
        cands = [k for k in K.elements if all(K.le(p, k) for p in preds)]
        if not cands:
            c = rng.choice(K.elements)
            return FunctorData(J, K, {x: c for x in J.elements})
        m[j] = rng.choice(cands)
    return FunctorData(J, K, m)


def test_build_poset_examples():
    P = build_poset(["0", "1"], [("0", "1")])
    assert P == chain(1)
    assert len(build_poset(["a"], [])) == 1
    with pytest.raises(fc.CycleDetected):
        build_poset(["x", "y"], [("x", "y"), ("y", "x")])
    with pytest.raises(fc.DuplicateLabel):
        build_poset(["x", "x"], [])


def test_named_shapes():
    p2 = fc.named_shape("pull_n", {"n": 2}).poset
    assert sorted(p2.elements) == ["e0", "e1", "e2", "t"]
    assert sorted(p2.relations()) == [("e0", "t"), ("e1", "t"), ("e2", "t")]
    assert len(fc.named_shape("box").poset) == 4
    K = fc.named_shape("octa_K").poset
    # enumerate [4]x[2] minus the two corners independently
    expected = {f"{a},{b}" for a in range(5) for b in range(3)} - {"4,0", "0,2"}
    assert len(K) == 13 and set(K.elements) == expected
    assert len(fc.named_shape("rotation_K").poset) == 8
    with pytest.raises(fc.UnknownShape):
        fc.named_shape("hexagon")
    with pytest.raises(fc.BadParams):
        fc.named_shape("pull_n", {"n": 0})


def test_named_shape_maps_are_monotone():
    for name in ("box", "corner_push", "corner_pull", "T_shape", "rotation_K", "octa_K",
                 "biproduct_L"):
        for u in fc.named_shape(name).maps.values():
            u.validate()


def test_combine():
    B = fc.combine("product", chain(1), chain(1))
    assert B == fc.named_shape("box").poset
    C = fc.combine("coproduct", E, E)
    assert len(C) == 2 and not C.relations()
    O = fc.combine("opposite", chain(2))
    assert O.le("2", "0") and not O.le("0", "2")
    assert fc.combine("opposite", O) == chain(2)


def test_slice_examples():
    S, _ = fc.slice(fc.identity_functor(chain(2)), "1", "over")
    assert sorted(S.elements) == ["0", "1"] and S.le("0", "1")
    S, _ = fc.slice(pt(chain(1), "1"), "0", "over")
    assert len(S) == 0
    d1 = fc.coface(2, 1)
    assert d1.object_map == {"0": "0", "1": "2"}
    S, _ = fc.slice(d1, "1", "over")
    assert list(S.elements) == ["0"]


def test_comma_examples():
    C, _, _, _ = fc.comma(fc.identity_functor(E), fc.identity_functor(E))
    assert len(C) == 1
    C, _, _, _ = fc.comma(pt(chain(1), "0"), pt(chain(1), "1"))
    assert len(C) == 1
    C, _, _, _ = fc.comma(pt(chain(1), "1"), pt(chain(1), "0"))
    assert len(C) == 0


def test_mapping_cylinder_examples():
    C, i, s, q = fc.mapping_cylinder(pt(chain(1), "0"), "cyl")
    P = C if isinstance(C, fc.FinPoset) else C.to_poset()
    assert sorted(P.elements) == ["0,0", "0,1", "1,0"]
    assert P.lt("0,0", "0,1") and P.lt("0,0", "1,0")
    C, i, s, q = fc.mapping_cylinder(fc.identity_functor(E), "cyl")
    P = C if isinstance(C, fc.FinPoset) else C.to_poset()
    assert len(P) == 2 and len(P.relations()) == 1
    top = [x for x in P.elements if P.up(x) == [x]][0]
    assert i("*") == top and s("*") != top


def test_sieve_status_examples():
    assert fc.sieve_status(pt(chain(1), "0")) == "sieve"
    assert fc.sieve_status(pt(chain(1), "1")) == "cosieve"
    i = fc.named_shape("corner_push").maps["i"]
    assert fc.sieve_status(i) == "sieve"
    assert fc.sieve_status(fc.identity_functor(chain(2))) == "both"
    assert fc.sieve_status(fc.constant(chain(1), chain(1), "0")) == "neither"


def test_fibration_status_examples():
    M = build_poset(["m0", "m1"], [("m0", "m1")])
    _, _, pr = fc.projections(M, chain(2))
    st_ = fc.fibration_status(pr)
    assert st_["fibration"] and st_["opfibration"]
    p = fc.constant(chain(1), E, "*")
    st_ = fc.fibration_status(p)
    assert st_["fibration"] and st_["opfibration"]
    assert not fc.fibration_status(pt(chain(1), "0"))["opfibration"]


def test_find_adjoint_examples():
    s0 = fc.codegeneracy(1, 0)
    r = fc.find_adjoint(s0, "right")
    assert r.object_map == fc.coface(2, 0).object_map
    p = fc.constant(chain(1), E, "*")
    assert fc.find_adjoint(p, "left").object_map == {"*": "0"}
    assert fc.find_adjoint(p, "right").object_map == {"*": "1"}
    empty = build_poset([], [])
    u = FunctorData(empty, chain(0), {})
    assert fc.find_adjoint(u, "right") is None


def test_props_examples():
    box = fc.named_shape("box")
    assert fc.functor_props(box.maps["i_push"])["fully_faithful"]
    cp = fc.category_props(chain(2))
    assert cp["initial"] == "0" and cp["terminal"] == "2"


def test_nerve_chains_examples():
    assert fc.nerve_chains(chain(1), 1) == [("0", "1")]
    push = fc.named_shape("corner_push").poset
    assert fc.nerve_chains(push, 2) == []
    box = fc.named_shape("box").poset
    ch = fc.nerve_chains(box, 2)
    assert sorted(ch) == [("0,0", "0,1", "1,1"), ("0,0", "1,0", "1,1")]


def test_pullback_of_opfibration():
    M = build_poset(["m0", "m1"], [("m0", "m1")])
    P, pr1, _ = fc.projections(chain(1), M)
    w = pt(chain(1), "1")
    Q, pl, pj = fc.pullback(pr1, w)
    assert sorted(Q.elements) == ["*,1,m0", "*,1,m1"]


def test_detection_hypothesis_on_box():
    box = fc.named_shape("box").poset
    i = fc.identity_functor(box)
    f = fc.inclusion(fc.named_shape("corner_push").poset, box)
    assert fc.detection_hypothesis(i, f, "coCartesian")
    assert not fc.detection_hypothesis(i, fc.identity_functor(box), "coCartesian")


@settings(max_examples=60, deadline=None)
@given(posets())
def test_poset_is_partial_order(data):
    P, pairs = data
    le = oracles.closure(P.elements, pairs)
    for a in P.elements:
        for b in P.elements:
            assert P.le(a, b) == ((a, b) in le)
    for n in range(4):
        assert sorted(fc.nerve_chains(P, n)) == sorted(oracles.strict_chains(P.elements, le, n))


@settings(max_examples=60, deadline=None)
@given(monotone_maps())
def test_slice_and_comma(u):
    J, K = u.source, u.target
    for k in K.elements:
        S, pr = fc.slice(u, k, "over")
        assert set(S.elements) == {j for j in J.elements if K.le(u(j), k)}
        S2, _ = fc.slice(u, k, "under")
        C, p1, p2, _ = fc.comma(pt(K, k), u)
        # comma(k, u) is the under-slice: relabel (*, j) -> j
        iso = {x: p2(x) for x in C.elements}
        assert sorted(iso.values()) == sorted(S2.elements)
        for a in C.elements:
            for b in C.elements:
                assert C.le(a, b) == S2.le(iso[a], iso[b])


@settings(max_examples=60, deadline=None)
@given(monotone_maps())
def test_adjoints_satisfy_triangle_inequalities(u):
    J, K = u.source, u.target
    r = fc.find_adjoint(u, "right")
    if r is not None:
        for x in J.elements:
            assert J.le(x, r(u(x)))
        for y in K.elements:
            assert K.le(u(r(y)), y)
    l = fc.find_adjoint(u, "left")
    if l is not None:
        for x in J.elements:
            assert J.le(l(u(x)), x)
        for y in K.elements:
            assert K.le(y, u(l(y)))


@settings(max_examples=60, deadline=None)
@given(monotone_maps())
def test_sieves_have_empty_slices_outside(u):
    if fc.sieve_status(u) in ("sieve", "both"):
        img = {u(j) for j in u.source.elements}
        for k in u.target.elements:
            if k not in img:
                # nothing in the image of a sieve lies above k
                S, _ = fc.slice(u, k, "under")
                assert len(S) == 0


@settings(max_examples=40, deadline=None)
@given(monotone_maps(), st.sampled_from(["cyl", "cyl_prime"]))
def test_mapping_cylinder_relations(u, orient):
    C, i, s, q = fc.mapping_cylinder(u, orient)
    for j in u.source.elements:
        assert q(i(j)) == u(j)
    for k in u.target.elements:
        assert q(s(k)) == k


@settings(max_examples=40, deadline=None)
@given(posets(3, "a"), posets(3, "b"), posets(2, "c"))
def test_opposite_involution_and_product_associative(A, B, C):
    A, B, C = A[0], B[0], C[0]
    assert fc.opposite(fc.opposite(A)) == A
    L = fc.product(fc.product(A, B), C)
    R = fc.product(A, fc.product(B, C))
    assert sorted(L.elements) == sorted(R.elements)
    for x in L.elements:
        for y in L.elements:
            assert L.le(x, y) == R.le(x, y)
