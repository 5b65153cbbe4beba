import csv
import json
import subprocess
import sys

import pytest

from tesselwalk.chain import default_pair
from tesselwalk.cli import main
from tesselwalk.families import kite_cover


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def kite_cover_path(tmp_path):
    path = tmp_path / "kite_cover.json"
    assert main(["gen", "kite_cover", "--out", str(path)]) == 0
    return path


def test_gen_random_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert main(["gen", "random_bipartite", "5", "7", "0.5", "2", "--seed", "42", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_gen_usage_errors(capsys):
    assert run(["gen", "petersen"], capsys)[0] == 2
    assert run(["gen", "complete_bipartite", "3"], capsys)[0] == 2
    assert run(["gen", "complete_bipartite", "x", "3"], capsys)[0] == 2


def test_verify_kite_cover_passes(kite_cover_path, capsys):
    code, out, _ = run(["verify", "--graph", str(kite_cover_path)], capsys)
    report = json.loads(out)
    assert code == 0 and report["passed"]
    assert report["max_residual"] < 1e-10


def test_verify_kite_multi_with_phases(tmp_path, capsys):
    path = tmp_path / "g.json"
    main(["gen", "kite_cover_multiedge", "--out", str(path)])
    code, out, _ = run(["verify", "--graph", str(path), "--random-phases", "--seed", "7"], capsys)
    checks = {c["name"]: c for c in json.loads(out)["checks"]}
    assert code == 0
    assert checks["QDB amplitudes"]["residual"] < 1e-12


def test_verify_flags_corrupted_column(kite_cover_path, tmp_path, capsys):
    p1 = default_pair(kite_cover()).p1.copy()
    p1[1, 0] += 0.1
    chain = tmp_path / "chain.json"
    chain.write_text(json.dumps({"p1": p1.tolist()}))
    code, out, err = run(["verify", "--graph", str(kite_cover_path), "--chain", str(chain)], capsys)
    assert code == 1
    assert "p1 column-stochastic" in json.loads(out)["failed"]
    assert "p1 column-stochastic" in err


def test_verify_parse_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n1": 2,\n  "n2": oops}')
    code, _, err = run(["verify", "--graph", str(bad)], capsys)
    assert code == 2
    assert "line 2" in err
    assert run(["verify", "--graph", str(tmp_path / "missing.json")], capsys)[0] == 2
    assert run(["verify"], capsys)[0] == 2


def test_verify_csv_and_dump(kite_cover_path, tmp_path, capsys):
    dump = tmp_path / "ops.json"
    code, out, _ = run(["verify", "--graph", str(kite_cover_path), "--format", "csv", "--dump-ops", str(dump)], capsys)
    rows = list(csv.reader(out.splitlines()))
    assert code == 0 and rows[0] == ["check", "residual", "tolerance", "passed"]
    assert all(r[3] == "true" for r in rows[1:])
    assert set(json.loads(dump.read_text())) >= {"Acal", "B", "W"}


def test_operator_cache(kite_cover_path, tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("TESSELWALK_CACHE", str(tmp_path / "cache"))
    first = run(["verify", "--graph", str(kite_cover_path), "--random-phases", "--seed", "3"], capsys)
    assert len(list((tmp_path / "cache").iterdir())) == 1
    second = run(["verify", "--graph", str(kite_cover_path), "--random-phases", "--seed", "3"], capsys)
    assert first == second and first[0] == 0


def test_ht_complete_bipartite(tmp_path, capsys):
    path = tmp_path / "k44.json"
    main(["gen", "complete_bipartite", "4", "4", "--out", str(path)])
    code, out, _ = run(["ht", "--graph", str(path), "--marks", "0"], capsys)
    assert code == 0 and out == "3.000000000000\n"
    code, out, _ = run(["ht", "--graph", str(path), "--marks", "0", "--format", "json"], capsys)
    assert json.loads(out)["hitting_time"] == pytest.approx(3.0)


def test_search_kite_cover_json(kite_cover_path, capsys):
    code, out, _ = run(["search", "--graph", str(kite_cover_path), "--marks", "3"], capsys)
    rec = json.loads(out)
    assert code == 0
    assert 0 < rec["success_probability"] <= 1
    assert rec["marks"] == [3]
    assert run(["search", "--graph", str(kite_cover_path), "--marks", "9"], capsys)[0] == 2


def test_search_from_cover_matches_graph(kite_cover_path, tmp_path, capsys):
    cover = tmp_path / "cover.json"
    assert main(["tessellate", "--graph", str(kite_cover_path), "--out", str(cover)]) == 0
    back = tmp_path / "back.json"
    assert main(["tessellate", "--cover", str(cover), "--out", str(back)]) == 0
    assert back.read_bytes() == kite_cover_path.read_bytes()
    a = run(["search", "--graph", str(kite_cover_path), "--marks", "3", "--force-walk", "--kappa", "0.25"], capsys)
    b = run(["search", "--cover", str(cover), "--marks", "3", "--force-walk", "--kappa", "0.25"], capsys)
    assert a == b


def test_search_probe_and_csv(tmp_path, capsys):
    path = tmp_path / "k.json"
    main(["gen", "complete_bipartite", "10", "10", "--out", str(path)])
    code, out, _ = run(["search", "--graph", str(path), "--kappa", "0.25", "--probe"], capsys)
    rec = json.loads(out)
    assert code == 0 and rec["path"] == "quantum"
    assert len(rec["c_probe"]["fixed"]) == rec["config"]["c_max"] + 1
    code, out, _ = run(["search", "--graph", str(path), "--kappa", "0.25", "--format", "csv"], capsys)
    rows = list(csv.DictReader(out.splitlines()))
    assert rows[0]["path"] == "quantum"
    assert float(rows[0]["success_probability"]) == pytest.approx(rec["success_probability"], rel=1e-11)


def test_search_marks_by_count_is_seeded(tmp_path, capsys):
    path = tmp_path / "k.json"
    main(["gen", "complete_bipartite", "18", "18", "--out", str(path)])
    a = run(["search", "--graph", str(path), "--marks", "count:1", "--seed", "5", "--kappa", "0.1"], capsys)
    b = run(["search", "--graph", str(path), "--marks", "count:1", "--seed", "5", "--kappa", "0.1"], capsys)
    assert a == b and a[0] == 0


def test_sweep_small(tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert main(["sweep", "--sizes", "4,8,16", "--jobs", "2", "--out", str(out)]) == 0
    rows = list(csv.reader(out.read_text().splitlines()))
    assert rows[0] == ["n", "HT", "queries", "success_probability", "slope_so_far"]
    assert [r[0] for r in rows[1:]] == ["4", "8", "16", "summary"]
    assert rows[1][1] == "3" and rows[1][4] == "nan"
    serial = tmp_path / "t.csv"
    main(["sweep", "--sizes", "4,8,16", "--jobs", "1", "--out", str(serial)])
    assert serial.read_bytes() == out.read_bytes()
    assert run(["sweep", "--sizes", "a,b"], capsys)[0] == 2


def test_console_script_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "tesselwalk.cli", "gen", "kite_cover"],
                         capture_output=True, text=True, check=True)
    assert json.loads(out.stdout)["n1"] == 4
