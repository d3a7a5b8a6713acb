import json
import urllib.error
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from torsion3 import datastore as ds
from torsion3.arith import is_fundamental
from torsion3.quadfield import three_torsion


@pytest.fixture
def fixture_path(fixtures_dir):
    return fixtures_dir / "d4_quartics.jsonl"


@pytest.fixture
def records(fixture_path):
    return ds.FieldCache(fixture_path).load()


def _remote(label, disc, r2=0, cg=(1,), subs=(5,), galois="4T3", degree=4):
    return {"label": label, "degree": degree, "disc_abs": abs(disc), "disc_sign": 1 if disc > 0 else -1, "r2": r2,
            "class_group": list(cg), "galois_label": galois, "subfield_discs": list(subs)}


def test_fixture_count_matches_lines(fixture_path, records):
    lines = [l for l in fixture_path.read_text().splitlines() if l.strip()]
    assert len(records) == len(lines) - 1  # minus the schema header
    assert len({r.label for r in records}) == len(records)


def test_fixture_records_are_consistent(records):
    for r in records:
        (dF,) = r.quadratic_subfields
        assert is_fundamental(dF)
        assert r.h3 % ds._h3_quadratic(dF) == 0
        assert r.r1 + 2 * r.r2 == r.degree == 4


def test_record_validation():
    with pytest.raises(ds.RecordParseError):
        ds.FieldRecord("x", 4, 100, "4T3", (1,), 4, 1, (5,))  # r1 + 2 r2 != 4
    with pytest.raises(ds.RecordParseError):
        ds.FieldRecord("x", 4, 100, "4T3", (0,), 4, 0, (5,))
    with pytest.raises(ds.RecordParseError):
        ds.FieldRecord("x", 4, 100, "4T3", (1,), 4, 0, (5, 8))  # two quadratic subfields
    with pytest.raises(ds.RecordParseError):
        ds.FieldRecord("x", 4, -100, "4T3", (1,), 4, 0, (5,))  # sign vs r2
    r = ds.FieldRecord("x", 4, 725, "4T3", (3,), 4, 0, (5,))
    assert r.h3 == 3
    assert ds.FieldRecord("y", 4, 725, "4T3", (3, 6, 2), 4, 0, (5,)).h3 == 9


records_st = st.builds(
    lambda label, r2, D, cg, dF: ds.FieldRecord(label, 4, D if r2 != 1 else -D, "4T3", tuple(cg), 4 - 2 * r2, r2, (dF,)),
    st.text("abc.0123456789", min_size=1, max_size=12),
    st.integers(0, 2),
    st.integers(1, 10 ** 9),
    st.lists(st.integers(1, 60), max_size=3),
    st.sampled_from([5, -3, -4, 8, 12, -23, 229]),
)


@settings(max_examples=200)
@given(records_st)
def test_cache_round_trip(r):
    assert ds.FieldRecord.from_json(r.to_json()) == r


def test_parse_remote_record_and_drift():
    r = ds.parse_remote_record(_remote("4.2.1025.1", -1025, r2=1, subs=[5]))
    assert (r.r1, r.r2, r.disc) == (2, 1, -1025)
    with pytest.raises(ds.RecordParseError) as err:
        ds.parse_remote_record({"label": "4.0.1.1", "degree": 4})
    assert err.value.label == "4.0.1.1"
    with pytest.raises(ds.RecordParseError):
        ds.parse_remote_record(_remote("bad", 725, cg=["three"]))


def test_cache_add_idempotent(tmp_path, records):
    cache = ds.FieldCache(tmp_path / "c.jsonl")
    assert cache.load() == []
    assert cache.add(records[:50]) == 50
    assert cache.add(records[:50]) == 0
    assert cache.add(records[40:60]) == 10
    assert len(cache) == 60
    assert cache.load() == records[:60]
    header = json.loads((tmp_path / "c.jsonl").read_text().splitlines()[0])
    assert header == {"schema": ds.SCHEMA, "version": ds.SCHEMA_VERSION}


def test_cache_rejects_unknown_header(tmp_path):
    p = tmp_path / "c.jsonl"
    p.write_text('{"schema": "other", "version": 9}\n')
    with pytest.raises(ValueError):
        ds.FieldCache(p).load()


class FakeRemote:
    def __init__(self, pages):
        self.pages = pages
        self.calls = []

    def __call__(self, url, params):
        self.calls.append(params)
        return self.pages[params["_offset"]]


def test_fetch_pages_and_errors(tmp_path):
    pages = {
        0: {"data": [_remote("a", 725), _remote("b", 1025, r2=1, subs=[-4]) | {"disc_sign": -1},
                     {"label": "broken"}], "next": 2},
        2: {"data": [_remote("c", 1088, subs=[8])], "next": None},
    }
    remote = FakeRemote(pages)
    cache = ds.FieldCache(tmp_path / "c.jsonl")
    q = ds.FieldQuery(disc_max=2000)
    res = ds.fetch(q, 0, cache=cache, transport=remote, rate_limit=0)
    assert [r.label for r in res.records] == ["a", "b"] and res.next_token == 2 and not res.degraded
    assert [e.label for e in res.errors] == ["broken"] and res.added == 2
    res = ds.fetch(q, res.next_token, cache=cache, transport=remote, rate_limit=0)
    assert res.next_token is None and res.added == 1
    # a repeated fetch leaves the cache unchanged
    res = ds.fetch(q, 0, cache=cache, transport=remote, rate_limit=0)
    assert res.added == 0 and len(cache) == 3
    assert remote.calls[0]["disc_abs"] == "1-2000"


def test_fetch_degrades_to_cache(tmp_path, records):
    cache = ds.FieldCache(tmp_path / "c.jsonl")
    cache.add(records[:20])

    def down(url, params):
        raise urllib.error.URLError("no route")

    q = ds.FieldQuery(disc_max=10 ** 9)
    res = ds.fetch(q, 0, cache=cache, transport=down, rate_limit=0, retries=2)
    assert res.degraded and len(res.records) == 20 and res.next_token is None
    res = ds.fetch(q, 0, cache=cache, network=False)
    assert res.degraded and len(res.records) == 20
    assert len(cache) == 20


def test_signature_and_unit_rank():
    mk = lambda D, r1, r2, dF: ds.FieldRecord("x", 4, D, "4T3", (1,), r1, r2, (dF,))  # noqa: E731
    assert ds.d4_signature(mk(725, 4, 0, 5)) == "()"
    assert ds.d4_signature(mk(-1025, 2, 1, 5)) == "(24)"
    assert ds.d4_signature(mk(1088, 0, 2, 8)) == "(13)(24)"
    assert ds.d4_signature(mk(117, 0, 2, -3)) == "(12)(34)"
    assert [ds.relative_unit_rank(r) for r in (mk(725, 4, 0, 5), mk(-1025, 2, 1, 5), mk(1088, 0, 2, 8),
                                               mk(117, 0, 2, -3))] == [2, 1, 0, 1]


def test_relative_h3_integrity():
    r = ds.FieldRecord("x", 4, 23 * 23 * 5, "4T3", (3,), 0, 2, (-23,))
    assert ds.relative_h3(r) == 1 and three_torsion(-23) == 3
    bad = ds.FieldRecord("y", 4, 23 * 23 * 5, "4T3", (2,), 0, 2, (-23,))
    with pytest.raises(ds.DataIntegrityError):
        ds.relative_h3(bad)


def test_empty_report():
    rep = ds.empirical_average([], "signature", (100, 1000))
    assert rep.empty and rep.rows() == [] and rep.families == ()
    with pytest.raises(ValueError):
        ds.empirical_average([], "galois")


def test_grouping_partitions_records(records):
    top = max(abs(r.disc) for r in records)
    rep = ds.empirical_average(records, "signature", (top,))
    assert {f.family for f in rep.families} == {"()", "(24)", "(13)(24)", "(12)(34)"}
    assert sum(f.counts[-1] for f in rep.families) == len(records)
    rep_u = ds.empirical_average(records, "unit_rank", (top,))
    assert sum(f.counts[-1] for f in rep_u.families) == len(records)
    assert {f.family for f in rep_u.families} == {"0", "1", "2"}


def test_unit_rank_zero_family_prediction(records):
    rep = ds.empirical_average(records, "unit_rank", (5000, 20000))
    fam = next(f for f in rep.families if f.u == 0)
    assert fam.predictions["cm_relative"] == 2
    assert all(a is not None and a >= 1 for a in fam.avg_h3_relative)
    rows = [r for r in rep.rows() if r["family"] == "0"]
    assert [r["X"] for r in rows] == [5000, 20000] and rows[0]["cm_relative"] == 2.0


def test_signature_predictions_and_completeness(records):
    rep = ds.empirical_average(records, "signature", (2000, 20000))
    preds = {f.family: f.predictions for f in rep.families}
    assert preds["()"]["cm_full"] == Fraction(40, 27)
    assert preds["(13)(24)"]["cm_relative"] == 2
    # the synthetic fixture is drawn to be complete below its top bound
    for f in rep.families:
        assert not f.incomplete[-1], f.family
    # truncated data is flagged
    half = [r for r in records if abs(r.disc) <= 10000]
    rep = ds.empirical_average(half, "signature", (20000,))
    assert all(f.incomplete[0] for f in rep.families)


def test_report_is_deterministic(records):
    a = ds.empirical_average(records, "signature", (1000, 20000)).rows()
    b = ds.empirical_average(list(reversed(records)), "signature", (1000, 20000)).rows()
    assert a == b
