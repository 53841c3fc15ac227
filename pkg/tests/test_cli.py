import csv
import io
import json
import math
import os
import subprocess
import sys

import pytest

from qamp.cli import SCHEMA_VERSION, int_list, main, run
from qamp.errors import ValidationError
from qamp.results import ResultTable, format_cell, write_atomic

SCHEMAS = {
    "machine": ["p", "q", "fidelity", "disturbance", "eta", "snr_index", "snr_grows"],
    "snr-sweep": [
        "p", "q", "L", "n0", "eta_L", "clone_count", "total_factor",
        "snr_analytic", "snr_statistical", "snr_mc",
    ],
    "cascade": ["k", "a_k", "b_k", "a_closed", "b_closed", "eta_k", "clone_count"],
    "attack": [
        "p", "q", "L", "n0", "split", "mode", "aux", "trials",
        "rate", "ci95", "mean_angular_error", "failures", "snr_analytic",
    ],
    "y00": [
        "M", "alpha_sq", "p", "q", "L", "J", "split", "mode", "trials",
        "rate", "ci95", "k_error_rate",
        "baseline_rate", "baseline_ci95", "baseline_k_error_rate", "failures",
    ],
}

MINIMAL = {
    "machine": ["machine", "--p", "1", "--q", "2"],
    "snr-sweep": ["snr-sweep", "--levels", "0-2"],
    "cascade": ["cascade"],
    "attack": ["attack", "--seed", "1", "--trials", "5"],
    "y00": ["y00", "--seed", "1", "--trials", "5"],
}


def parse_csv(text):
    meta_line, _, body = text.partition("\n")
    assert meta_line.startswith("# ")
    rows = list(csv.reader(io.StringIO(body)))
    return json.loads(meta_line[2:]), rows[0], rows[1:]


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestIntList:
    @pytest.mark.parametrize("text, expected", [("1,3", [1, 3]), ("0-3", [0, 1, 2, 3]), ("0-1,5", [0, 1, 5]), (4, [4])])
    def test_parse(self, text, expected):
        assert int_list(text) == expected

    @pytest.mark.parametrize("text", ["", "a", "5-2", ","])
    def test_reject(self, text):
        with pytest.raises(ValidationError):
            int_list(text)


class TestMachine:
    def test_row(self, capsys):
        code, out, _ = run_cli(capsys, "machine", "--p", "1", "--q", "2")
        assert code == 0
        meta, header, rows = parse_csv(out)
        assert header == SCHEMAS["machine"]
        assert len(rows) == 1
        vals = [float(x) for x in rows[0][2:6]]
        assert vals == pytest.approx([0.833333, 0.166667, 0.666667, 0.888889], abs=1e-6)
        assert rows[0][6] == "false"
        assert meta["command"] == "machine" and meta["schema"] == SCHEMA_VERSION

    def test_sweep(self):
        table, _ = run(["machine", "--p-max", "5", "--q-max", "10"])
        assert len(table.rows) == 35
        for f, d in zip(table.column("fidelity"), table.column("disturbance")):
            assert abs(f + d - 1) <= 1e-15

    def test_invalid_machine_exit(self, capsys):
        code, out, err = run_cli(capsys, "machine", "--p", "3", "--q", "3")
        assert code == 2 and out == ""
        assert err.startswith("qamp: error:") and err.count("\n") == 1


class TestSnrSweep:
    def test_analytic_column(self):
        table, _ = run(["snr-sweep", "--p", "1", "--q", "5", "--levels", "0-10"])
        for L, snr in zip(table.column("L"), table.column("snr_analytic")):
            assert abs(snr - (49 / 45) ** (L / 2)) <= 1e-12
        assert all(math.isnan(x) for x in table.column("snr_mc"))

    def test_boundary_machine_constant(self):
        table, _ = run(["snr-sweep", "--p", "1", "--q", "4", "--levels", "0-10"])
        assert table.column("snr_analytic") == pytest.approx([1.0] * 11, abs=1e-12)

    def test_total_factor(self):
        table, _ = run(["snr-sweep", "--p", "1", "--q", "5", "--levels", "3"])
        assert table.column("total_factor") == [pytest.approx(343 / 27)]
        assert table.column("clone_count") == [125.0]

    def test_mc_column(self):
        table, _ = run(["snr-sweep", "--p", "1", "--q", "5", "--levels", "2,6", "--mc", "--trials", "10000", "--seed", "3"])
        for stat, mc in zip(table.column("snr_statistical"), table.column("snr_mc")):
            assert mc == pytest.approx(stat, rel=0.1)

    def test_mc_needs_seed(self, capsys):
        code, _, err = run_cli(capsys, "snr-sweep", "--mc", "--trials", "10")
        assert code == 2 and "seed" in err


class TestCascade:
    def test_columns_agree(self):
        table, _ = run(["cascade", "--p", "1", "--q", "5", "--levels", "3"])
        assert list(table.columns) == SCHEMAS["cascade"]
        assert len(table.rows) == 4
        for row in table.rows:
            assert row[1] == pytest.approx(row[3], abs=1e-12)
        assert table.rows[-1][1] == pytest.approx(1859 / 3375, abs=1e-15)


class TestAttack:
    def test_byte_identical(self, tmp_path):
        argv = ["attack", "--p", "1", "--q", "2,5", "--levels", "2,6", "--trials", "50", "--seed", "4"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(argv + ["--out", str(a)]) == 0
        assert main(argv + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_zero_trials(self, capsys):
        assert run_cli(capsys, "attack", "--seed", "1", "--trials", "0")[0] == 2

    def test_missing_seed(self, capsys):
        code, _, err = run_cli(capsys, "attack", "--trials", "10")
        assert code == 2 and "seed" in err

    def test_bad_split(self, capsys):
        assert run_cli(capsys, "attack", "--seed", "1", "--trials", "5", "--split", "1.5")[0] == 2

    def test_exact_aux(self):
        table, _ = run(["attack", "--seed", "2", "--trials", "100", "--aux", "exact", "--q", "2"])
        assert table.column("rate") == [1.0]

    def test_ordering(self):
        table, _ = run(["attack", "--p", "1", "--q", "2,5", "--levels", "8", "--trials", "1000", "--seed", "1"])
        (r2, r5), (c2, c5) = table.column("rate"), table.column("ci95")
        assert r5 >= r2 - c5


class TestY00:
    def test_meta_and_baseline(self, capsys):
        code, out, _ = run_cli(capsys, "y00", "--seed", "1", "--trials", "20", "--levels", "1,2")
        assert code == 0
        meta, header, rows = parse_csv(out)
        assert header == SCHEMAS["y00"]
        assert meta["security_secure"] is True
        assert meta["security_ratio"] == pytest.approx(2.037, abs=1e-3)
        assert sorted(map(tuple, meta["wheel"])) == [(-1, 0, 1), (-1, 1, 0), (1, 0, 0), (1, 1, 1)]
        i = header.index("baseline_rate")
        assert len(rows) == 2 and all(r[i] != "" for r in rows)

    def test_split_violating_weak_pulse_regime(self, capsys):
        assert run_cli(capsys, "y00", "--seed", "1", "--trials", "5", "--j", "10")[0] == 2


class TestConfigAndFormats:
    @pytest.mark.parametrize("command", list(SCHEMAS))
    def test_schema_pinned(self, command):
        table, _ = run(MINIMAL[command])
        assert list(table.columns) == SCHEMAS[command]
        assert all(len(r) == len(table.columns) for r in table.rows)

    def test_precedence(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"seed": 3, "trials": 7, "levels": "4", "q": "2"}))
        table, resolved = run(["attack", "--config", str(cfg), "--trials", "9"])
        assert resolved["trials"] == 9
        assert resolved["seed"] == 3
        assert table.column("L") == [4] and table.column("q") == [2]
        assert table.meta["config"]["trials"] == 9

    def test_unknown_config_key(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"bogus": 1}))
        assert run_cli(capsys, "machine", "--config", str(cfg))[0] == 2

    def test_json_round_trip(self, capsys):
        code, out, _ = run_cli(capsys, "snr-sweep", "--levels", "0-3", "--format", "json")
        assert code == 0
        table = ResultTable.from_json(out)
        assert table.columns == SCHEMAS["snr-sweep"]
        assert table.meta["config"]["levels"] == "0-3"
        assert table.rows[0][8] == "inf"  # L = 0 has no statistical noise
        assert ResultTable.from_json(table.to_json()).to_json() == table.to_json()
        direct, _ = run(["snr-sweep", "--levels", "0-3"])
        assert table.rows[2][7] == direct.rows[2][7]

    def test_csv_floats_round_trip(self, capsys):
        _, out, _ = run_cli(capsys, "machine", "--p", "2", "--q", "7")
        _, _, rows = parse_csv(out)
        table, _ = run(["machine", "--p", "2", "--q", "7"])
        assert float(rows[0][4]) == table.rows[0][4]

    def test_format_cell(self):
        assert format_cell(0.1) == "0.1"
        assert format_cell(math.inf) == "inf" and format_cell(-math.inf) == "-inf"
        assert format_cell(math.nan) == "nan"
        assert format_cell(True) == "true" and format_cell(None) == ""

    def test_atomic_write_leaves_no_temp(self, tmp_path):
        target = tmp_path / "sub" / "out.csv"
        write_atomic(target, "x\n")
        write_atomic(target, "y\n")
        assert target.read_text() == "y\n"
        assert os.listdir(target.parent) == ["out.csv"]

    def test_schema_length_enforced(self):
        t = ResultTable(["a", "b"])
        with pytest.raises(ValueError):
            t.add_row(1)

    def test_module_entry_point(self):
        proc = subprocess.run(
            [sys.executable, "-m", "qamp", "machine", "--p", "1", "--q", "5", "--format", "json"],
            capture_output=True, text=True, check=True,
        )
        assert json.loads(proc.stdout)["rows"][0][6] is True
