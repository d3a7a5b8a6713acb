import csv
import io
import json

import pytest
from click.testing import CliRunner

from torsion3 import cli


def run(*args, **kw):
    res = CliRunner().invoke(cli.main, list(args), catch_exceptions=False, **kw)
    return res


def rows(res):
    return list(csv.DictReader(io.StringIO(res.stdout)))


def test_classgroup():
    res = run("classgroup", "--", "-23")
    assert res.exit_code == 0
    (r,) = rows(res)
    assert (r["h"], r["invariants"], r["h3"]) == ("3", "3", "3")
    res = run("--format", "json", "classgroup", "229")
    assert json.loads(res.stdout)[0]["h3"] == 3


def test_invalid_discriminant_exit_code():
    res = run("classgroup", "--", "-12")
    assert res.exit_code == cli.EXIT_DISC and "fundamental" in res.stderr


def test_precision_failure_exit_code(monkeypatch):
    from torsion3 import quadfield

    def boom(d):
        raise quadfield.PrecisionError("cannot certify")

    monkeypatch.setattr(quadfield, "class_group", boom)
    assert run("classgroup", "5").exit_code == cli.EXIT_PRECISION


def test_predict():
    res = run("predict", "--group", "D4", "--sigma", "(13)(24)")
    assert res.exit_code == 0
    (r,) = rows(res)
    assert r["cm_full"] == "8/3" and r["cm_relative"] == "2" and r["u"] == "0"
    res = run("predict", "--group", "D4")
    assert sorted(r["cm_full"] for r in rows(res)) == sorted(["40/27", "16/9", "8/3", "8/3"])
    assert run("predict", "--group", "Q8").exit_code == cli.EXIT_GROUP
    assert run("predict", "--group", "D4", "--sigma", "(12)").exit_code == cli.EXIT_GROUP


def test_predict_unsupported_full_prediction_is_blank():
    res = run("predict", "--group", "C2wrC4")
    assert res.exit_code == 0
    # the sum-zero module of C4 over F3 is reducible, so only the relative prediction is given
    assert all(r["cm_full"] == "" and r["cm_relative"] for r in rows(res))
    res = run("--format", "json", "predict", "--group", "C2wrV4")
    assert res.exit_code == 0 and all(r["cm_full"] is None for r in json.loads(res.stdout))


def test_constants_formats():
    res = run("constants", "--target", "CD4", "--truncation", "1000")
    (r,) = rows(res)
    assert float(r["lower"]) <= float(r["estimate"]) <= float(r["upper"])
    res = run("--format", "json", "constants", "--target", "DD4:(24)", "--truncation", "1000")
    assert json.loads(res.stdout)[0]["target"] == "DD4:(24)"
    res = run("--format", "human", "constants", "--target", "table", "--truncation", "1000")
    assert res.exit_code == 0 and len(res.stdout.splitlines()) == 1 + 13
    assert run("constants", "--target", "CD4:(1234)", "--truncation", "1000").exit_code == cli.EXIT_GROUP
    assert run("constants", "--target", "CD4", "--truncation", "10").exit_code == 2


def test_h3_avg_and_plot(tmp_path):
    res = run("--plot", str(tmp_path), "h3-avg", "--bound", "10000", "--sign", "-")
    assert res.exit_code == 0
    rs = rows(res)
    assert [int(r["X"]) for r in rs] == [100, 1000, 10000]
    assert 1.3 < float(rs[-1]["avg_h3"]) < 2 and rs[-1]["limit"] == "2.0"
    assert (tmp_path / "h3_avg_neg.png").stat().st_size > 1000


def test_count_cubic():
    (r,) = rows(run("count-cubic", "--bound", "1000", "--sign", "-"))
    assert int(r["fields"]) == int(r["s3"]) + int(r["c3"]) and r["c3"] == "0"
    (r,) = rows(run("count-cubic", "--bound", "49", "--sign", "+"))
    assert r["fields"] == "1" and r["c3"] == "1"


def test_rings_slope_and_plot(tmp_path):
    res = run("--plot", str(tmp_path), "rings-slope", "--bound", "10000")
    assert res.exit_code == 0
    rs = rows(res)
    assert {r["sign"] for r in rs} == {"+", "-"}
    assert (tmp_path / "rings_slope_pos.png").exists() and (tmp_path / "rings_slope_neg.png").exists()


def test_orders_check():
    res = run("orders-check", "--max-index", "4")
    assert res.exit_code == 0
    assert all(r["match"] == "True" for r in rows(res))
    assert run("orders-check", "--disc", "-24").exit_code == cli.EXIT_DISC


def test_resolvent_check():
    res = run("resolvent-check", "--disc", "-23", "--depth", "2")
    assert res.exit_code == 0 and [r["ok"] for r in rows(res)] == ["True", "True"]
    res = run("resolvent-check", "--disc", "-23", "--upto", "40")
    assert res.exit_code == 2  # mutually exclusive
    assert run("resolvent-check", "--disc", "-12").exit_code == cli.EXIT_DISC


def test_ingest_network_off(tmp_path):
    res = run("--no-network", "--cache", str(tmp_path / "c.jsonl"), "ingest")
    assert res.exit_code == cli.EXIT_NETWORK


def test_ingest_with_fake_remote(tmp_path, monkeypatch):
    from torsion3 import datastore

    page = {"data": [{"label": "4.4.725.1", "degree": 4, "disc_abs": 725, "disc_sign": 1, "r2": 0,
                      "class_group": [], "galois_label": "4T3", "subfield_discs": [5]}], "next": None}
    monkeypatch.setattr(datastore, "urllib_transport", lambda url, params: page)
    path = tmp_path / "c.jsonl"
    res = run("--cache", str(path), "ingest", "--rate-limit", "0")
    assert res.exit_code == 0 and rows(res)[0]["added"] == "1"
    res = run("--cache", str(path), "ingest", "--rate-limit", "0")
    assert rows(res)[0]["added"] == "0"


def test_ingest_network_failure_degrades(tmp_path, monkeypatch):
    from torsion3 import datastore

    def down(url, params):
        raise OSError("unreachable")

    monkeypatch.setattr(datastore, "urllib_transport", down)
    res = run("--cache", str(tmp_path / "c.jsonl"), "ingest", "--rate-limit", "0")
    assert res.exit_code == cli.EXIT_NETWORK and "cache" in res.stderr


def test_compare(fixtures_dir, tmp_path):
    res = run("--cache", str(fixtures_dir / "d4_quartics.jsonl"), "--plot", str(tmp_path), "compare",
              "--grid", "5000", "--grid", "20000")
    assert res.exit_code == 0
    rs = rows(res)
    assert {r["family"] for r in rs} == {"()", "(24)", "(13)(24)", "(12)(34)"}
    assert (tmp_path / "compare_signature.png").exists()
    res = run("--cache", str(fixtures_dir / "d4_quartics.jsonl"), "compare", "--grouping", "unit_rank")
    assert {r["u"] for r in rows(res)} == {"0", "1", "2"}


def test_compare_integrity_error(tmp_path):
    from torsion3.datastore import FieldCache, FieldRecord

    path = tmp_path / "bad.jsonl"
    FieldCache(path).add([FieldRecord("y", 4, 23 * 23 * 5, "4T3", (2,), 0, 2, (-23,))])
    res = run("--cache", str(path), "compare")
    assert res.exit_code == cli.EXIT_INTEGRITY


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("format = json\n\n[constants]\ntruncation = 1000\n")
    res = run("--config", str(cfg), "constants", "--target", "Dm")
    data = json.loads(res.stdout)
    assert data[0]["truncation"] == 1000
    res = run("--config", str(cfg), "--format", "csv", "constants", "--target", "Dm", "--truncation", "2000")
    assert rows(res)[0]["truncation"] == "2000"


def test_run_config_validation():
    with pytest.raises(Exception):
        cli.RunConfig(fmt="xml")
    with pytest.raises(Exception):
        cli.RunConfig(jobs=0)


def test_jobs_do_not_change_output():
    a = run("--jobs", "1", "count-cubic", "--bound", "30000", "--sign", "+").stdout
    b = run("--jobs", "2", "count-cubic", "--bound", "30000", "--sign", "+").stdout
    assert a == b
    a = run("--jobs", "1", "rings-slope", "--bound", "20000", "--sign", "-").stdout
    b = run("--jobs", "2", "rings-slope", "--bound", "20000", "--sign", "-").stdout
    assert a == b


def test_constant_plot(tmp_path):
    res = run("--plot", str(tmp_path), "constants", "--target", "CD4:(24)", "--truncation", "2000")
    assert res.exit_code == 0
    assert (tmp_path / "CD4_24.png").exists()
