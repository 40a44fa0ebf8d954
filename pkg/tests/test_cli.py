import json
import math
import subprocess
import sys

import pytest

from derivlab.cli import main, parse_range, rows_to_csv, UsageError
from derivlab.seqspace import SeqVector


@pytest.fixture
def vec(tmp_path):
    def make(mapping, name="v.json"):
        p = tmp_path / name
        p.write_text(SeqVector.from_mapping(mapping).to_json())
        return str(p)
    return make


def test_norm_command(vec, capsys):
    assert main(["norm", "--space", "T", "--input", vec({3: 1.0, 4: 1.0})]) == 0
    assert capsys.readouterr().out.strip() == "1.0"


def test_norm_missing_file(capsys, tmp_path):
    assert main(["norm", "--space", "T", "--input", str(tmp_path / "none.json")]) == 2
    assert "does not exist" in capsys.readouterr().err


def test_norm_malformed_json(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert main(["norm", "--space", "l2", "--input", str(p)]) == 2
    assert "malformed JSON" in capsys.readouterr().err


def test_bad_space_is_usage_error(vec, capsys):
    assert main(["norm", "--space", "lp:0.5", "--input", vec({1: 1.0})]) == 2


def test_argparse_errors_exit_two():
    with pytest.raises(SystemExit) as exc:
        main(["kappa"])
    assert exc.value.code == 2


def test_parse_range():
    assert list(parse_range("2..4")) == [2, 3, 4]
    assert list(parse_range("3")) == [3]
    for bad in ("0..3", "4..2", "a..b"):
        with pytest.raises(UsageError):
            parse_range(bad)


def test_rows_to_csv_uses_repr():
    text = rows_to_csv([{"n": 1, "x": 0.1 + 0.2}])
    assert text == "n,x\n1,0.30000000000000004\n"


def test_kappa_csv_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["kappa", "--space", "c0", "--range", "1..4", "--seed", "3", "--out", str(a)]) == 0
    assert main(["kappa", "--space", "c0", "--range", "1..4", "--seed", "3", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == "n,kappa,kappa_star,log_kappa,floor_log_kappa,certified_gap"
    assert float(lines[4].split(",")[1]) == pytest.approx(2.0, rel=1e-12)


def test_kappa_plot_next_to_csv(tmp_path):
    out = tmp_path / "k.csv"
    assert main(["kappa", "--space", "c0", "--range", "1..3", "--out", str(out), "--plot"]) == 0
    png = tmp_path / "k.png"
    assert png.exists() and png.read_bytes()[:4] == b"\x89PNG"


def test_plot_without_out_is_usage_error(capsys):
    assert main(["kappa", "--space", "c0", "--range", "1..2", "--plot"]) == 2
    assert "--plot needs --out" in capsys.readouterr().err


def test_distance_command(capsys):
    assert main(["distance", "--couple", "l1,l2", "--range", "4"]) == 0
    row = capsys.readouterr().out.splitlines()[1].split(",")
    assert float(row[3]) == pytest.approx(0.5 * math.log(4), abs=1e-12)


def test_derive_round_trip(vec, tmp_path):
    out = tmp_path / "o.json"
    assert main(["derive", "--map", "kalton_peck", "--input", vec({1: 0.5, 2: 0.5, 3: 0.5, 4: 0.5}),
                 "--out", str(out)]) == 0
    w = SeqVector.from_json(out.read_text())
    # ||b||_2 = 1, so every coordinate maps to 2 * 0.5 * log 0.5
    assert w.values == pytest.approx([math.log(0.5)] * 4, rel=1e-15)


def test_derive_params(vec, capsys):
    assert main(["derive", "--map", "lions_peetre", "--input", vec({1: 1.0, 2: 1.0}),
                 "--p0", "1", "--p1", "2", "--theta", "0.5"]) == 0
    out = SeqVector.from_json(capsys.readouterr().out)
    assert out.values == (math.exp(-0.5), math.exp(-0.5))
    assert main(["derive", "--map", "zero", "--input", vec({1: 1.0}), "--params", "oops"]) == 2


def test_selector_command(vec, capsys):
    assert main(["selector", "--kind", "slot", "--input", vec({1: 3.0, 2: 4.0}), "--floor", "1"]) == 0
    obj = json.loads(capsys.readouterr().out)
    assert SeqVector.from_json_obj(obj["delta"]) == SeqVector.from_mapping({1: 3.0, 2: 4.0})
    assert obj["jseq"]["slots"][0]["n"] == -2
    assert main(["selector", "--kind", "lions-peetre", "--input", vec({1: 1.0})]) == 2


def test_growth_and_slow_growth(tmp_path, capsys):
    out = tmp_path / "g.csv"
    assert main(["growth", "--couple", "l2", "--range", "1..4", "--out", str(out)]) == 0
    assert all(line.split(",")[1] == "1.0" for line in out.read_text().splitlines()[1:])
    assert main(["slow-growth", "--n-max", "5"]) == 0
    rows = capsys.readouterr().out.splitlines()
    assert rows[0].startswith("n,kappa")
    assert len(rows) == 6


def test_config_file(tmp_path, vec):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"seed": 5, "tol": 1e-7}))
    assert main(["kappa", "--space", "c0", "--range", "2", "--config", str(cfg)]) == 0
    cfg.write_text(json.dumps({"seed": {"nested": 1}}))
    assert main(["kappa", "--space", "c0", "--range", "2", "--config", str(cfg)]) == 2


def test_verify_suite_exit_code(capsys):
    assert main(["verify", "--suite", "twisted", "--seed", "7"]) == 0
    assert capsys.readouterr().out.strip().endswith("checks passed")
    assert main(["verify", "--suite", "nope"]) == 2


def test_console_script():
    r = subprocess.run([sys.executable, "-m", "derivlab.cli", "norm", "--space", "c0",
                        "--input", "/nonexistent.json"], capture_output=True, text=True)
    assert r.returncode == 2 and "does not exist" in r.stderr


def test_verify_all_passes(capsys):
    assert main(["verify", "--seed", "7"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out
