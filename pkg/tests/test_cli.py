import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from phyndn.cli import main


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# schema:")
    return list(csv.DictReader(lines[1:]))


class TestBoundariesCommand:
    def test_table_shape(self, tmp_path):
        out = tmp_path / "b.csv"
        code = main(
            [
                "boundaries",
                "--M",
                "20",
                "--theta-m",
                "0.4363",
                "--alpha-m",
                "0.04",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        rows = read_csv(out)
        assert len(rows) == 21
        max_entropy = [float(r["max_entropy"]) for r in rows]
        assert all(b > a for a, b in zip(max_entropy, max_entropy[1:]))
        uniform = [float(r["uniform"]) for r in rows]
        steps = np.diff(uniform)
        assert np.allclose(steps, steps[0])

    def test_manifest_written(self, tmp_path):
        out = tmp_path / "b.csv"
        main(["boundaries", "--M", "10", "--out", str(out)])
        manifest = json.loads((out.parent / "b.csv.manifest.json").read_text())
        assert manifest["seed"] == 1
        assert "scenario_digest" in manifest


class TestDiffrateCommand:
    def test_rows_and_ordering(self, tmp_path):
        out = tmp_path / "d.csv"
        code = main(
            [
                "diffrate",
                "--Ns",
                "400",
                "--r",
                "0.01,0.02,0.04",
                "--rho",
                "0.01,0.05,0.1",
                "--test",
                "np,glrt",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        rows = read_csv(out)
        assert len(rows) == 2 * 3 * 3
        np_at_rho = {
            float(r["r"]): float(r["r_d"])
            for r in rows
            if r["test"] == "np" and float(r["rho"]) == 0.05
        }
        assert np_at_rho[0.04] > np_at_rho[0.02] > np_at_rho[0.01]

    def test_json_format(self, tmp_path):
        out = tmp_path / "d.json"
        main(["diffrate", "--r", "0.02", "--rho", "0.05", "--test", "np", "--format", "json", "--out", str(out)])
        rows = json.loads(out.read_text())
        assert rows[0]["test"] == "np"


class TestCapCommand:
    def test_small_run(self, tmp_path):
        out = tmp_path / "cap.csv"
        scenario = tmp_path / "s.toml"
        scenario.write_text(
            "rounds = 400\n[population]\ncount = 50\n[quantizer]\nlevels = 200\n"
        )
        code = main(
            [
                "cap",
                "--scenario",
                str(scenario),
                "--populations",
                "25,50",
                "--seeds",
                "2",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        rows = read_csv(out)
        # 2 populations x 2 seeds x 3 quantizers x 2 step configs
        assert len(rows) == 24
        assert all(0.0 <= float(r["cap"]) <= 1.0 for r in rows)

    def test_rounds_log(self, tmp_path):
        out = tmp_path / "cap.csv"
        log = tmp_path / "rounds.jsonl"
        scenario = tmp_path / "s.toml"
        scenario.write_text(
            "rounds = 100\n[population]\ncount = 30\n[quantizer]\nlevels = 100\n"
        )
        code = main(
            [
                "cap",
                "--scenario",
                str(scenario),
                "--populations",
                "30",
                "--seeds",
                "1",
                "--out",
                str(out),
                "--rounds-log",
                str(log),
            ]
        )
        assert code == 0
        lines = log.read_text().splitlines()
        assert len(lines) == 100
        row = json.loads(lines[0])
        assert {"round", "actor", "decision", "correct"} <= set(row)


class TestAttacksCommand:
    def test_runs(self, tmp_path):
        out = tmp_path / "a.csv"
        scenario = tmp_path / "s.toml"
        scenario.write_text(
            "[population]\ncount = 100\n[quantizer]\nlevels = 300\n[attack]\ntrials = 2000\n"
        )
        code = main(["attacks", "--scenario", str(scenario), "--out", str(out)])
        assert code == 0
        rows = read_csv(out)
        assert {r["attack"] for r in rows} == {"replay", "close_iqi", "key_compromise"}


class TestOffloadCommand:
    def test_runs(self, tmp_path):
        out = tmp_path / "o.csv"
        scenario = tmp_path / "s.toml"
        scenario.write_text("[offload]\nkey_bits = [1024]\ntiming_reps = 3\n")
        code = main(["offload", "--scenario", str(scenario), "--out", str(out)])
        assert code == 0
        rows = read_csv(out)
        assert len(rows) == 6


class TestPacketCommand:
    def test_make_and_show(self, tmp_path, capsys):
        out = tmp_path / "p.bin"
        assert main(["packet", "make", "--name", "/app/x/1", "--content", "hi", "--out", str(out)]) == 0
        assert main(["packet", "show", str(out)]) == 0
        captured = capsys.readouterr().out
        assert "/app/x/1" in captured
        assert "signed: False" in captured

    def test_sign_with_pem_key(self, tmp_path, capsys):
        from phyndn.ndn import generate_rsa_key, save_private_key_pem

        pem = tmp_path / "k.pem"
        save_private_key_pem(generate_rsa_key(1024), str(pem))
        out = tmp_path / "p.bin"
        assert main(["packet", "make", "--key", str(pem), "--out", str(out)]) == 0
        main(["packet", "show", str(out)])
        assert "signed: True" in capsys.readouterr().out

    def test_signed_packet(self, tmp_path, capsys):
        out = tmp_path / "p.bin"
        main(["packet", "make", "--sign", "--key-bits", "1024", "--out", str(out)])
        main(["packet", "show", str(out)])
        assert "signed: True" in capsys.readouterr().out

    def test_malformed_exits_2(self, tmp_path):
        bad = tmp_path / "bad.bin"
        bad.write_bytes(b"\x00\x01")
        assert main(["packet", "show", str(bad)]) == 2


class TestErrorPaths:
    def test_unknown_scenario_key_exit_1(self, tmp_path):
        scenario = tmp_path / "s.toml"
        scenario.write_text("[population]\ncuont = 3\n")
        assert main(["cap", "--scenario", str(scenario), "--populations", "10"]) == 1

    def test_missing_scenario_file_exit_1(self):
        assert main(["attacks", "--scenario", "/does/not/exist.toml"]) == 1


class TestReproducibility:
    def test_same_command_same_bytes(self, tmp_path):
        scenario = tmp_path / "s.toml"
        scenario.write_text(
            "rounds = 200\n[population]\ncount = 40\n[quantizer]\nlevels = 100\n"
            "[attack]\ntrials = 500\n"
        )
        outs = []
        for name in ("a.csv", "b.csv"):
            out = tmp_path / name
            assert main(["attacks", "--scenario", str(scenario), "--out", str(out)]) == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_seed_override_changes_output(self, tmp_path):
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        scenario = tmp_path / "s.toml"
        scenario.write_text(
            "rounds = 200\n[population]\ncount = 40\n[quantizer]\nlevels = 100\n"
            "[attack]\ntrials = 500\n"
        )
        main(["attacks", "--scenario", str(scenario), "--out", str(out1)])
        main(["attacks", "--scenario", str(scenario), "--seed", "999", "--out", str(out2)])
        assert out1.read_bytes() != out2.read_bytes()


class TestSelftest:
    def test_selftest_passes(self, capsys):
        assert main(["selftest"]) == 0
        out = capsys.readouterr().out
        assert "FAIL" not in out


class TestConsoleEntry:
    def test_module_invocation(self):
        proc = subprocess.run(
            [sys.executable, "-m", "phyndn.cli", "--version"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert "phyndn" in proc.stdout
