import csv
import io

import pytest

from eslab.cli import G_376, G_377, run
from eslab.records import CACHE_ENV, OutputRecord, ResultCache, encode_value, to_csv


def call(*argv):
    out = io.StringIO()
    code = run(list(argv), stdout=out)
    return code, out.getvalue()


def records(text):
    return [OutputRecord.from_json(line) for line in text.splitlines() if line.strip()]


@pytest.fixture(autouse=True)
def no_env_cache(monkeypatch):
    monkeypatch.delenv(CACHE_ENV, raising=False)


def test_ghat_exact():
    code, out = call("ghat", "--k", "5", "--exact")
    assert code == 0
    (rec,) = records(out)
    assert rec.results["numerator"] == "45" and rec.results["denominator"] == "2"


def test_ghat_log_and_decompose():
    code, out = call("ghat", "--k", "1000", "--log", "--decompose")
    assert code == 0
    r = records(out)[0].results
    assert "numerator" not in r
    assert r["log_F_small"] + r["log_F1"] + r["log_F0"] == pytest.approx(r["log_ghat"], rel=1e-12)


def test_ghat_exact_above_cutoff_fails():
    assert call("ghat", "--k", str(10**5 + 1), "--exact")[0] == 1


def test_search():
    code, out = call("search", "--k", "5")
    assert code == 0
    r = records(out)[0].results
    assert r["g"] == "23" and r["certificate_ok"] is True
    assert r["certificate"].startswith("2:101<=10111")


def test_search_naive_with_workers():
    a = records(call("search", "--k", "17", "--method", "naive")[1])[0]
    b = records(call("search", "--k", "17", "--method", "naive", "--workers", "2")[1])[0]
    assert a.results == b.results and a.parameters == b.parameters


def test_search_not_found_exit_1():
    assert call("search", "--k", "13", "--bound", "100")[0] == 1


def test_constant():
    code, out = call("constant", "--tol", "5e-8")
    assert code == 0
    r = records(out)[0].results
    assert r["lower"] <= r["value"] <= r["upper"]
    assert r["upper"] - r["lower"] <= 5e-8 * (1 + 1e-9)
    assert r["value"] == pytest.approx(0.78853057, abs=1e-7)


def test_ratio():
    r = records(call("ratio", "--k", "4")[1])[0].results
    assert all(r[f] for f in ("m_identity_ok", "r_identity_ok", "digit_increment_ok", "bound_ok"))
    assert (r["ratio_numerator"], r["ratio_denominator"]) == ("5", "1")


def test_ratio_composite_is_usage_error():
    assert call("ratio", "--k", "5")[0] == 2


def test_pieces_psi_mertens():
    r = records(call("pieces", "--k", "10000")[1])[0].results
    assert r["sum"] == pytest.approx(r["f0_direct"], rel=1e-9)
    r = records(call("psi", "--x", "10")[1])[0].results
    assert r["value"] == pytest.approx(7.832014, abs=1e-6)
    r = records(call("mertens", "--x", "10")[1])[0].results
    assert r["value"] == pytest.approx(4.375)


def test_converge_rows():
    code, out = call("converge", "--kmin", "1000", "--kmax", "100000", "--points", "3")
    assert code == 0
    assert [r.parameters["k"] for r in records(out)] == ["1000", "10000", "100000"]


def test_fixtures_verbatim():
    r = records(call("fixtures")[1])[0].results
    assert r["g_376"] == "7778804220120654420924631668091" == str(G_376)
    assert r["g_377"] == "5973303871796437264595936954237" == str(G_377)
    assert r["ghat_decreases"] is True


@pytest.mark.parametrize(
    "argv",
    [["bogus"], [], ["ghat"], ["ghat", "--k", "5", "--frobnicate"], ["search", "--k", "5", "--method", "x"],
     ["ghat", "--k", "5", "--exact", "--log"], ["constant", "--tol", "-1"]],
)
def test_usage_errors(argv, capsys):
    assert call(*argv)[0] == 2
    assert "usage" in capsys.readouterr().err


def test_invalid_values_exit_2():
    assert call("ghat", "--k", "1")[0] == 2
    assert call("search", "--k", "5", "--workers", "0")[0] == 2


def test_diagnostics_on_stderr_only(capsys):
    out = io.StringIO()
    run(["search", "--k", "7", "-v"], stdout=out)
    err = capsys.readouterr().err
    assert "finished" in err
    assert "finished" not in out.getvalue()


@pytest.mark.parametrize("cmd", [["ghat", "--k", "60", "--decompose"], ["search", "--k", "9"], ["ratio", "--k", "12"],
                                 ["constant", "--tol", "1e-6"], ["fixtures"]])
def test_json_round_trip(cmd):
    for rec in records(call(*cmd)[1]):
        assert OutputRecord.from_json(rec.to_json()) == rec


@pytest.mark.parametrize("cmd", [["ghat", "--k", "60", "--decompose"], ["converge", "--kmin", "10", "--kmax", "500", "--points", "4"],
                                 ["constant", "--tol", "1e-6"], ["ratio", "--k", "12"]])
def test_csv_matches_json(cmd):
    js = records(call(*cmd)[1])
    code, text = call(*cmd, "--csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == len(js)
    for rec, row in zip(js, rows):
        assert row["command"] == rec.command
        for k, v in rec.parameters.items():
            assert row[f"param.{k}"] == ("" if v is None else str(v).lower() if isinstance(v, bool) else str(v))
        for k, v in rec.results.items():
            cell = row[f"result.{k}"]
            if isinstance(v, bool):
                assert cell == str(v).lower()
            elif isinstance(v, float):
                assert float(cell) == v
            else:
                assert cell == v


def test_csv_header_always_present():
    text = call("psi", "--x", "2", "--csv")[1]
    assert text.splitlines()[0].startswith("command,version,timestamp")


def test_big_integers_never_float():
    assert encode_value(10**40) == str(10**40)
    assert encode_value(True) is True
    rec = records(call("ghat", "--k", "300", "--exact")[1])[0]
    assert isinstance(rec.results["numerator"], str)
    assert "e" not in rec.results["numerator"]


def test_cache_flag(tmp_path):
    path = tmp_path / "cache.jsonl"
    first = records(call("ghat", "--k", "50", "--cache", str(path))[1])[0]
    second = records(call("ghat", "--k", "50", "--cache", str(path))[1])[0]
    assert first == second  # same timestamp: served from cache
    lines = path.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 1 and OutputRecord.from_json(lines[0]) == first
    call("ghat", "--k", "51", "--cache", str(path))
    assert len(path.read_text(encoding="utf-8").splitlines()) == 2


def test_cache_env(tmp_path, monkeypatch):
    path = tmp_path / "env.jsonl"
    monkeypatch.setenv(CACHE_ENV, str(path))
    call("converge", "--kmin", "10", "--kmax", "100", "--points", "3")
    assert len(path.read_text().splitlines()) == 3
    cache = ResultCache(path)
    assert cache.get("converge", {"k": 10}) is not None
    assert cache.get("converge", {"k": 11}) is None


def test_cache_keyed_by_version(tmp_path):
    path = tmp_path / "v.jsonl"
    rec = OutputRecord.build("psi", {"x": 2}, {"value": 0.5})
    rec.version = "0.0.0"
    path.write_text(rec.to_json() + "\n")
    out = records(call("psi", "--x", "2", "--cache", str(path))[1])[0]
    assert out.results["value"] != 0.5


def test_to_csv_quoting():
    rec = OutputRecord.build("x", {"s": 'a,"b"'}, {"v": 1.5})
    row = list(csv.reader(io.StringIO(to_csv([rec]))))[1]
    assert row[3] == 'a,"b"'
