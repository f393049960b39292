import csv
import io
import json
import subprocess
import sys

import pytest

from gpcforge.toolfront import (
    BENCH_SHAPES, CSV_COLUMNS, PUBLISHED_COUNTS, bench_counters, bench_csv, env_seed, run_cli,
)


def cli(capsys, *argv):
    code = run_cli(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_synth_stats_examples(capsys):
    code, out, _ = cli(capsys, "synth", "--shape", "popcount:7", "--order", "efficiency",
                       "--tie-break", "slack", "--emit", "stats")
    assert code == 0 and out == "FA:2 stages:1\n"
    code, out, _ = cli(capsys, "synth", "--shape", "popcount:7", "--order", "strength")
    assert out == "(6):1 stages:1\n"


def test_synth_json(capsys):
    code, out, _ = cli(capsys, "synth", "--shape", "popcount:7", "--tie-break", "slack", "--emit", "json")
    doc = json.loads(out)
    assert sum(n["kind"] == "counter" for n in doc["nodes"]) == 2
    assert len(doc["sum"]) == 3


def test_synth_schedule_and_dots(capsys):
    code, out, _ = cli(capsys, "synth", "--shape", "cols:3,3,3", "--emit", "schedule")
    assert json.loads(out)["stages"] == []
    code, out, _ = cli(capsys, "synth", "--shape", "popcount:7", "--emit", "dots")
    assert out.startswith("input: [7]\n")
    assert "after stage 1" in out


def test_synth_hdl_to_file(capsys, tmp_path):
    path = tmp_path / "m.vhd"
    code, out, _ = cli(capsys, "synth", "--shape", "mul:4x4", "--emit", "hdl", "--dialect", "vhdl",
                       "--pipeline", "1", "-o", str(path))
    assert code == 0 and out == ""
    text = path.read_text()
    assert "entity sum_mul_4x4 is" in text
    assert "rising_edge(clk)" in text


def test_verify_exit_codes(capsys):
    code, out, _ = cli(capsys, "verify", "--shape", "mul:4x4", "--order", "strength", "--exhaustive")
    assert code == 0 and out.startswith("pass: 65536 exhaustive")
    code, _, err = cli(capsys, "verify", "--shape", "popcount:64", "--exhaustive")
    assert code == 2 and "exhaustive" in err
    code, out, _ = cli(capsys, "verify", "--shape", "popcount:300", "--samples", "500", "--seed", "4")
    assert code == 0 and "500 random" in out


def test_usage_errors(capsys):
    assert cli(capsys, "synth", "--shape", "cols:0")[0] == 2
    assert cli(capsys, "synth", "--shape", "file:/nonexistent/shape")[0] == 2
    assert cli(capsys, "synth", "--shape", "popcount:7", "--order", "random")[0] == 2
    assert cli(capsys, "verify", "--shape", "popcount:7")[0] == 2
    assert cli(capsys)[0] == 2


def test_catalog_cli(capsys):
    code, out, _ = cli(capsys, "catalog", "--order", "strength")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 13 and rows[-1]["name"] == "FA"


def test_env_seed(monkeypatch):
    monkeypatch.delenv("GPCFORGE_SEED", raising=False)
    assert env_seed() == 1
    monkeypatch.setenv("GPCFORGE_SEED", "42")
    assert env_seed() == 42


def test_reference_table_complete():
    assert len(PUBLISHED_COUNTS) == 21
    assert {label for label, _ in PUBLISHED_COUNTS} == {label for label, _ in BENCH_SHAPES}


@pytest.fixture(scope="module")
def bench_rows():
    return bench_counters(samples=1000, seed=1)


def test_bench_csv_layout(bench_rows):
    text = bench_csv(bench_rows)
    reader = csv.DictReader(io.StringIO(text))
    assert reader.fieldnames == CSV_COLUMNS
    rows = list(reader)
    assert len(rows) == 21
    assert all(r["verify"] == "pass" for r in rows)


def test_bench_stage_counts(bench_rows):
    assert all(r.stages == r.ref_stages for r in bench_rows)


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "gpcforge", "synth", "--shape", "popcount:7", "--order", "strength"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and proc.stdout == "(6):1 stages:1\n"
