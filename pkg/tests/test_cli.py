"""Command-line front end and the evaluation cache."""
import json
import multiprocessing as mp
import time

import pytest

from hardykernels.cache import EvalCache, frame, parse
from hardykernels.cli import main
from hardykernels.specfun import coupling_psi


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


POINT = ("--t", "1", "--r", "1", "--s", "1")


# eval


def test_eval_alpha1_closed(capsys):
    code, out, _ = run(capsys, "eval", "--zeta", "0", "--alpha", "1", *POINT)
    assert code == 0
    fields = dict(kv.split("=") for kv in out.split())
    assert float(fields["value"]) == pytest.approx(0.381972, abs=1e-6)
    assert fields["method"] == "closed_alpha1"


def test_eval_channel_input(capsys):
    code, out, _ = run(capsys, "eval", "--d", "3", "--ell", "0", "--alpha", "2", "--kappa", "0", *POINT, "--format", "json")
    assert code == 0
    d = json.loads(out)
    _, ref, _ = run(capsys, "eval", "--zeta", "1", "--alpha", "2", *POINT, "--format", "json")
    assert d == json.loads(ref)
    assert d["method"] == "closed_alpha2"


def test_eval_channel_matches_direct_perturbed(capsys):
    kappa = coupling_psi(1.0, 2.0, 0.5)
    _, a, _ = run(capsys, "eval", "--d", "3", "--ell", "0", "--alpha", "2", "--kappa", repr(kappa), *POINT, "--format", "json")
    _, b, _ = run(capsys, "eval", "--zeta", "1", "--alpha", "2", "--eta", "0.5", *POINT, "--format", "json")
    assert json.loads(a)["value"] == pytest.approx(json.loads(b)["value"], rel=1e-10)


def test_eval_alpha2_perturbed(capsys):
    code, out, _ = run(capsys, "eval", "--zeta", "1", "--alpha", "2", "--eta", "0.5", *POINT, "--format", "json")
    assert code == 0
    d = json.loads(out)
    assert d["method"] == "closed_alpha2"
    assert d["value"] == pytest.approx(0.322517635224575, rel=1e-12)


def test_eval_forced_method(capsys):
    _, out, _ = run(capsys, "eval", "--zeta", "1", "--alpha", "1", *POINT, "--method", "subordination", "--format", "json")
    d = json.loads(out)
    assert d["method"] == "subordination"
    assert d["value"] == pytest.approx(4 / (5 * 3.141592653589793), rel=1e-8)


def test_eval_errors(capsys):
    code, _, err = run(capsys, "eval", "--zeta", "1", "--alpha", "1", "--eta", "2", *POINT)
    assert code == 64 and "inadmissible" in err and len(err.strip().splitlines()) == 1
    code, _, _ = run(capsys, "eval", "--zeta", "1", "--alpha", "1.5", *POINT, "--method", "closed")
    assert code == 64
    code, _, _ = run(capsys, "eval", "--zeta", "1", "--alpha", "1", "--t", "-1", "--r", "1", "--s", "1")
    assert code == 64
    code, _, _ = run(capsys, "frobnicate")
    assert code == 64


def test_config_file_with_flag_override(capsys, tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"zeta": 0, "alpha": 1, "t": 1, "r": 1, "s": 1, "format": "json"}))
    _, out, _ = run(capsys, "eval", "--config", str(cfg))
    assert json.loads(out)["value"] == pytest.approx(6 / (5 * 3.141592653589793), rel=1e-12)
    _, out, _ = run(capsys, "eval", "--config", str(cfg), "--zeta", "1")
    assert json.loads(out)["value"] == pytest.approx(4 / (5 * 3.141592653589793), rel=1e-12)


# sweep

GRID10 = json.dumps({"zeta_values": [1.0], "alpha_values": [1.0], "t_values": [1.0], "rs_values": [2.0 ** k for k in range(-5, 5)]})


def test_sweep_rows_and_determinism(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, "sweep", "--zeta", "1", "--alpha", "1", "--grid", GRID10, "--out", str(a))[0] == 0
    assert run(capsys, "sweep", "--zeta", "1", "--alpha", "1", "--grid", GRID10, "--out", str(b))[0] == 0
    lines = a.read_text().splitlines()
    assert len(lines) == 101
    assert lines[0].split(",")[:7] == ["check", "zeta", "alpha", "eta", "t", "r", "s"]
    assert a.read_bytes() == b.read_bytes()


def test_sweep_envelope_ratio(capsys):
    code, out, _ = run(capsys, "sweep", "--zeta", "1", "--alpha", "1", "--grid", GRID10, "--ratio", "envelope", "--format", "json")
    assert code == 0
    rows = json.loads(out)
    assert len(rows) == 100
    assert all(r["ratio"] == pytest.approx(r["value"] / r["envelope"], rel=1e-14) for r in rows)


def test_sweep_partial_failure(capsys):
    code, out, _ = run(capsys, "sweep", "--zeta", "1", "--alpha", "1.5", "--grid", GRID10, "--method", "closed")
    assert code == 2
    header = out.splitlines()[0].split(",")
    assert header[-1] == "error"


# certify


def test_certify_unknown_suite(capsys):
    code, _, err = run(capsys, "certify", "--suite", "nonsense")
    assert code == 64 and "normalization" in err


def test_certify_report_schema(capsys, tmp_path):
    out = tmp_path / "r.json"
    code, _, _ = run(capsys, "certify", "--suite", "threeg", "--out", str(out))
    assert code == 0
    d = json.loads(out.read_text())
    assert d["suite"] == "threeg" and d["status"] == "pass"
    rep = d["reports"][0]
    for k in ("check_name", "params", "grid", "status", "constants", "residuals", "runtime_seconds"):
        assert k in rep
    assert set(rep["constants"]) >= {"c_lower", "c_upper", "drift"}
    assert set(rep["residuals"]) == {"max", "median"}


def test_certify_sandwich_free_alpha1(capsys):
    code, out, _ = run(capsys, "certify", "--suite", "sandwich-free", "--alpha", "1")
    assert code == 0
    rep = json.loads(out)["reports"][0]
    assert rep["grid"]["alpha_values"] == [1.0]
    assert {0.0, 1.0} <= set(rep["grid"]["zeta_values"])
    assert 0 < rep["constants"]["c_lower"] <= rep["constants"]["c_upper"]


def test_certify_cache_hit_is_fast(capsys, tmp_path):
    cache = tmp_path / "cache.log"
    t0 = time.perf_counter()
    code, first, _ = run(capsys, "certify", "--suite", "regimes", "--cache", str(cache))
    t1 = time.perf_counter()
    code2, second, _ = run(capsys, "certify", "--suite", "regimes", "--cache", str(cache))
    t2 = time.perf_counter()
    assert code == code2 == 0
    assert first == second
    assert (t2 - t1) * 10 <= (t1 - t0)


# forms


def test_forms_command(capsys):
    fn = json.dumps({"kind": "smooth_bump", "center": 1.0, "width": 1.0})
    code, out, _ = run(capsys, "forms", "--zeta", "1", "--alpha", "1", "--eta", "0.5", "--function", fn)
    assert code == 0
    d = json.loads(out)
    row = d[0] if isinstance(d, list) else d
    text = json.dumps(row)
    assert "gsr" in text


# cache


def test_cache_framing_roundtrip():
    rec = {"key": {"kind": "eval", "x": [1, 2]}, "value": 0.5}
    line = frame(rec)
    assert line.endswith(b"\n")
    assert parse(line[:-1]) == rec
    assert parse(line[:-2]) is None
    bad = bytearray(line[:-1])
    bad[-3] ^= 1
    assert parse(bytes(bad)) is None


def test_cache_budget_compatibility(tmp_path):
    c = EvalCache(tmp_path / "c.log")
    key = {"kind": "eval", "p": 1}
    c.put(key, 1.25, {"rel_tol": 1e-8})
    assert c.get(key, {"rel_tol": 1e-8}) == 1.25
    assert c.get(key, {"rel_tol": 1e-6}) == 1.25
    assert c.get(key, {"rel_tol": 1e-10}) is None
    assert EvalCache(tmp_path / "c.log").get(key, {"rel_tol": 1e-8}) == 1.25


def test_cache_tightened_budget_via_cli(capsys, tmp_path):
    cache = tmp_path / "c.log"
    args = ("eval", "--zeta", "1", "--alpha", "1.5", *POINT, "--cache", str(cache))
    run(capsys, *args, "--budget", '{"rel_tol": 1e-6}')
    assert EvalCache(cache).stats().records == 1
    run(capsys, *args, "--budget", '{"rel_tol": 1e-6}')
    assert EvalCache(cache).stats().records == 1
    run(capsys, *args, "--budget", '{"rel_tol": 1e-9}')
    assert EvalCache(cache).stats().records == 2


def test_cache_skips_corrupt_records(tmp_path):
    path = tmp_path / "c.log"
    c = EvalCache(path)
    c.put({"kind": "eval", "i": 1}, 1.0, {})
    with open(path, "ab") as f:
        f.write(b"00000042 deadbeef {\"key\": {\"kind\": \"eval\", \"i\": 2}, \"value\": 99}\n")
        f.write(b"garbage\n")
    c.put({"kind": "eval", "i": 3}, 3.0, {})
    with pytest.warns(UserWarning, match="damaged"):
        d = EvalCache(path)
    assert d.get({"kind": "eval", "i": 1}, {}) == 1.0
    assert d.get({"kind": "eval", "i": 2}, {}) is None
    assert d.get({"kind": "eval", "i": 3}, {}) == 3.0
    with pytest.warns(UserWarning, match="damaged"):
        assert d.stats().corrupt == 2


def _writer(path, k):
    c = EvalCache(path)
    for i in range(200):
        c.put({"kind": "eval", "w": k, "i": i}, [k, i, "x" * 300], {"rel_tol": 1e-8})


def test_cache_concurrent_writers(tmp_path):
    path = str(tmp_path / "c.log")
    ctx = mp.get_context("fork")
    procs = [ctx.Process(target=_writer, args=(path, k)) for k in range(4)]
    for p in procs:
        p.start()
    for p in procs:
        p.join()
        assert p.exitcode == 0
    c = EvalCache(path)
    st = c.stats()
    assert st.records == 800 and st.corrupt == 0
    assert c.get({"kind": "eval", "w": 3, "i": 199}, {"rel_tol": 1e-8}) == [3, 199, "x" * 300]


def test_cache_cli_stats_and_clear(capsys, tmp_path):
    path = tmp_path / "c.log"
    EvalCache(path).put({"kind": "eval"}, 1.0, {})
    code, out, _ = run(capsys, "cache", "stats", "--cache", str(path))
    assert code == 0 and json.loads(out)["records"] == 1
    code, _, _ = run(capsys, "cache", "clear", "--cache", str(path))
    assert code == 0 and EvalCache(path).stats().records == 0
    assert run(capsys, "cache", "stats")[0] == 64
