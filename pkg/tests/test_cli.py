import json
import math

import numpy as np
import pytest

from qflo.cli import main

ONE_QUBIT = "0.5 X\n0.5 Z\n"
OBS_Z = "1.0 Z\n"
DEPOLARIZING = "0.25 I\n0.25 X\n0.25 Y\n0.25 Z\n"


@pytest.fixture
def ham_file(tmp_path):
    path = tmp_path / "ham.txt"
    path.write_text(ONE_QUBIT)
    return str(path)


@pytest.fixture
def obs_file(tmp_path):
    path = tmp_path / "obs.txt"
    path.write_text(OBS_Z)
    return str(path)


def run_cli(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestNodes:
    def test_table_values(self, capsys):
        code, out, _ = run_cli(["nodes", "--m", "2"], capsys)
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == "j,x_j,k_j,y_j,b_j"
        first = lines[1].split(",")
        assert first[0] == "1"
        assert first[2] == "10"
        assert first[3] == "100"
        assert float(first[4]) == pytest.approx(25 / 21)
        second = lines[2].split(",")
        assert second[2] == "4"
        assert second[3] == "16"

    def test_byte_determinism(self, capsys):
        _, out1, _ = run_cli(["nodes", "--m", "6"], capsys)
        _, out2, _ = run_cli(["nodes", "--m", "6"], capsys)
        assert out1 == out2

    def test_seventeen_digit_floats(self, capsys):
        _, out, _ = run_cli(["nodes", "--m", "2"], capsys)
        x_field = out.strip().split("\n")[1].split(",")[1]
        assert x_field == f"{math.sin(math.pi / 16) ** 2:.17g}"

    def test_json_summary(self, tmp_path, capsys):
        json_path = tmp_path / "nodes.json"
        code, _, _ = run_cli(["nodes", "--m", "2", "--json", str(json_path)], capsys)
        assert code == 0
        payload = json.loads(json_path.read_text())
        assert payload["command"] == "nodes"
        assert payload["outputs"]["R"] == pytest.approx(math.sqrt(8) * 2 / math.pi)
        assert payload["outputs"]["one_norm"] == pytest.approx(29 / 21)

    def test_out_file(self, tmp_path, capsys):
        out_path = tmp_path / "nodes.csv"
        code, out, _ = run_cli(["nodes", "--m", "3", "--out", str(out_path)], capsys)
        assert code == 0
        assert out == ""
        assert out_path.read_text().startswith("j,x_j,k_j,y_j,b_j\n")


class TestQdrift:
    def _argv(self, ham_file, obs_file, seed="7"):
        return [
            "qdrift", "--hamiltonian", ham_file, "--observable", obs_file,
            "--time", "1.0", "--steps", "20", "--shots", "16", "--seed", seed,
        ]

    def test_shot_table(self, ham_file, obs_file, capsys):
        code, out, _ = run_cli(self._argv(ham_file, obs_file), capsys)
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == "shot,value"
        assert len(lines) == 17
        for line in lines[1:]:
            value = float(line.split(",")[1])
            assert value in (1.0, -1.0)

    def test_determinism(self, ham_file, obs_file, capsys):
        _, out1, _ = run_cli(self._argv(ham_file, obs_file), capsys)
        _, out2, _ = run_cli(self._argv(ham_file, obs_file), capsys)
        assert out1 == out2

    def test_seed_zero_is_derived(self, ham_file, obs_file, capsys):
        code, _, err = run_cli(self._argv(ham_file, obs_file, seed="0"), capsys)
        assert code == 0
        assert "derived master seed:" in err

    def test_default_state_is_all_zeros(self, ham_file, obs_file, tmp_path, capsys):
        json_path = tmp_path / "q.json"
        argv = self._argv(ham_file, obs_file) + ["--json", str(json_path)]
        run_cli(argv, capsys)
        payload = json.loads(json_path.read_text())
        assert payload["inputs"]["state"] == "0"


class TestScan:
    def test_first_order_slope(self, ham_file, obs_file, tmp_path, capsys):
        json_path = tmp_path / "scan.json"
        code, out, _ = run_cli(
            [
                "scan", "--hamiltonian", ham_file, "--observable", obs_file,
                "--time", "1.0", "--n-list", "8,16,32,64,128",
                "--json", str(json_path),
            ],
            capsys,
        )
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == "N,s,value,exact,abs_error"
        errors = [float(l.split(",")[4]) for l in lines[1:]]
        assert errors == sorted(errors, reverse=True)
        payload = json.loads(json_path.read_text())
        assert payload["outputs"]["slope"] == pytest.approx(1.0, abs=0.1)
        assert payload["outputs"]["exact"] == pytest.approx(np.cos(1 / np.sqrt(2)) ** 2)

    def test_bad_n_list(self, ham_file, obs_file, capsys):
        code, _, err = run_cli(
            [
                "scan", "--hamiltonian", ham_file, "--observable", obs_file,
                "--time", "1.0", "--n-list", "8,sixteen",
            ],
            capsys,
        )
        assert code == 2
        assert "error:" in err


class TestGenerator:
    def test_deviation_slope(self, ham_file, tmp_path, capsys):
        json_path = tmp_path / "gen.json"
        code, out, _ = run_cli(
            [
                "generator", "--hamiltonian", ham_file, "--time", "1.0",
                "--s-list", "0.0625,0.03125,0.015625,0.0078125",
                "--json", str(json_path),
            ],
            capsys,
        )
        assert code == 0
        assert out.startswith("s,t,min_eig_modulus,log_exists,deviation\n")
        payload = json.loads(json_path.read_text())
        assert payload["outputs"]["slope"] == pytest.approx(1.0, abs=0.05)

    def test_missing_log_exits_numerical(self, tmp_path, capsys):
        dep = tmp_path / "dep.txt"
        dep.write_text(DEPOLARIZING)
        # s * T * lambda = pi/2 kills the superoperator spectrum
        code, out, err = run_cli(
            [
                "generator", "--hamiltonian", str(dep),
                "--time", f"{math.pi / 2}", "--s-list", "1.0",
            ],
            capsys,
        )
        assert code == 3
        assert "numerical failure" in err
        row = out.strip().split("\n")[1].split(",")
        assert row[3] == "false"


class TestQflo:
    def _argv(self, ham_file, obs_file, **kw):
        args = {
            "--time": "0.4", "--epsilon": "0.3", "--delta": "0.3", "--seed": "11",
        }
        args.update(kw)
        argv = ["qflo", "--hamiltonian", ham_file, "--observable", obs_file]
        for flag, value in args.items():
            argv += [flag, value]
        return argv

    def test_noiseless_estimate(self, ham_file, obs_file, tmp_path, capsys):
        json_path = tmp_path / "qflo.json"
        argv = self._argv(ham_file, obs_file) + ["--json", str(json_path)]
        code, out, err = run_cli(argv, capsys)
        assert code == 0
        assert out.startswith("node,step_count,shots,mean,standard_error,weight\n")
        assert "estimate:" in err
        payload = json.loads(json_path.read_text())
        exact = np.cos(0.4 / np.sqrt(2)) ** 2
        assert payload["outputs"]["estimate"] == pytest.approx(exact, abs=0.3)
        assert payload["outputs"]["bound_convergent"] is True
        assert payload["outputs"]["order"] == 2

    def test_shot_sampled_determinism(self, ham_file, obs_file, capsys):
        argv = self._argv(ham_file, obs_file, **{"--mode": "shot_sampled"})
        _, out1, _ = run_cli(argv, capsys)
        _, out2, _ = run_cli(argv, capsys)
        assert out1 == out2

    def test_bad_epsilon_is_usage_error(self, ham_file, obs_file, capsys):
        argv = self._argv(ham_file, obs_file, **{"--epsilon": "2.0"})
        code, _, err = run_cli(argv, capsys)
        assert code == 2
        assert "error:" in err


class TestOrderfit:
    def test_order_two_slope(self, ham_file, obs_file, tmp_path, capsys):
        json_path = tmp_path / "fit.json"
        code, out, _ = run_cli(
            [
                "orderfit", "--hamiltonian", ham_file, "--observable", obs_file,
                "--time", "1.0", "--m-list", "2",
                "--scale-list", "1,0.5,0.25,0.125",
                "--json", str(json_path),
            ],
            capsys,
        )
        assert code == 0
        assert out.startswith("m,scale,N_m,s_m,abs_error\n")
        payload = json.loads(json_path.read_text())
        assert payload["outputs"]["slopes"]["2"]["slope"] == pytest.approx(2.0, abs=0.3)


class TestErrorHandling:
    def test_missing_hamiltonian_file(self, obs_file, capsys):
        code, _, err = run_cli(
            ["generator", "--hamiltonian", "/nonexistent.txt",
             "--time", "1.0", "--s-list", "0.1"],
            capsys,
        )
        assert code == 2
        assert "not found" in err

    def test_malformed_hamiltonian(self, tmp_path, obs_file, capsys):
        bad = tmp_path / "bad.txt"
        bad.write_text("0.5 XQ\n")
        code, _, err = run_cli(
            ["generator", "--hamiltonian", str(bad), "--time", "1.0", "--s-list", "0.1"],
            capsys,
        )
        assert code == 2

    def test_state_length_mismatch(self, ham_file, obs_file, capsys):
        code, _, err = run_cli(
            [
                "qdrift", "--hamiltonian", ham_file, "--observable", obs_file,
                "--state", "00", "--time", "1.0", "--steps", "5",
                "--shots", "1", "--seed", "1",
            ],
            capsys,
        )
        assert code == 2
        assert "--state" in err

    def test_invalid_thread_cap(self, ham_file, capsys, monkeypatch):
        monkeypatch.setenv("QFLO_THREADS", "zero")
        code, _, err = run_cli(["nodes", "--m", "2"], capsys)
        assert code == 2
        assert "QFLO_THREADS" in err

    def test_valid_thread_cap(self, capsys, monkeypatch):
        monkeypatch.setenv("QFLO_THREADS", "4")
        code, _, _ = run_cli(["nodes", "--m", "2"], capsys)
        assert code == 0

    def test_missing_subcommand_is_argparse_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2
