import json

import pytest
from hypothesis import given, settings, strategies as st

from derivkit import cli, verify
from derivkit import stablemodel as sm
from derivkit.stablemodel import ChainMap, Complex

Q0 = Complex.point(0)
KINDS = ["poset", "monotone_map", "vec_diagram", "chain_diagram", "chain_map"]


def test_instance_seed_spreads_trials():
    seeds = {verify.instance_seed(s, t) for s in range(5) for t in range(20)}
    assert len(seeds) == 100


@pytest.mark.parametrize("kind", KINDS)
def test_gen_instance_is_deterministic_and_valid(kind):
    a = verify.gen_instance(kind, 17)
    b = verify.gen_instance(kind, 17)
    assert cli.serialize(a) == cli.serialize(b)
    # a round trip through the document layer re-runs every validation
    doc = json.loads(json.dumps(cli.serialize(a)))
    assert cli.serialize(cli.load_document(doc).value) == doc


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_generated_posets_respect_bounds(seed):
    P = verify.gen_instance("poset", seed, {"elements": 4})
    assert 1 <= len(P) <= 4
    f = verify.gen_instance("chain_map", seed)
    lo, hi = verify.DEFAULT_BOUNDS["window"]
    for n in f.source.degrees:
        assert lo - 1 <= n <= hi + 1


def test_unknown_suite():
    with pytest.raises(verify.UnknownSuite):
        verify.run_suite("nope")
    with pytest.raises(verify.UnknownSuite):
        verify.run_trial("nope", 1)
    with pytest.raises(ValueError):
        verify.gen_instance("sheaf", 1)


def test_long_exact_check_examples():
    assert verify.long_exact_check(sm.triangle(ChainMap.identity(Q0))).passed
    t = sm.triangle(ChainMap.zero(Q0, Complex.zero()))
    v = verify.long_exact_check(t)
    assert v.passed and t.dims()["C"].get(1) == 1
    bad = verify.corrupted_triangle_control()
    assert not bad.passed and bad.witness is not None


@pytest.mark.parametrize("name", sorted(verify.SUITES))
def test_negative_controls_fail_with_witness(name):
    for _, fn in verify.SUITES[name][1]:
        v = fn()
        assert not v.passed and v.witness


@pytest.mark.parametrize("name", sorted(verify.SUITES))
def test_suites_pass_small(name):
    rep = verify.run_suite(name, seed=3, trials=2)
    assert rep.passed, rep.failures()
    controls = [v for v in rep.verdicts if v.name.startswith("control:")]
    assert controls and all(v.info["observed"] == "fail" for v in controls)
    assert all(v.name.endswith("]") for v in rep.verdicts if v not in controls)


def test_report_is_byte_stable():
    a = verify.run_suite("stable_squares", seed=5, trials=3)
    b = verify.run_suite("stable_squares", seed=5, trials=3)
    assert a.dumps() == b.dumps()
    doc = json.loads(a.dumps())
    assert doc["totals"]["failed"] == 0 and doc["pass"] is True
    assert "duration" not in doc and doc["note"]


def test_run_trial_replays_suite_trial():
    rep = verify.run_suite("pointed", seed=2, trials=2)
    s = verify.instance_seed(2, 1)
    replay = verify.run_trial("pointed", s)
    names = [v.name + "[1]" for v in replay]
    assert names == [v.name for v in rep.verdicts if v.name.endswith("[1]")]
    assert all(v.seed == s for v in replay)


def test_report_table_and_failures():
    v_ok = verify.Verdict("a", True, 1)
    v_bad = verify.Verdict("b", False, 2, {"reason": "x"})
    rep = verify.Report("demo", 1, 1, [v_ok, v_bad])
    assert rep.totals == {"total": 2, "passed": 1, "failed": 1}
    assert not rep.passed and rep.failures() == [v_bad]
    assert rep.table().splitlines()[-1] == "1/2 passed; overall FAIL"
