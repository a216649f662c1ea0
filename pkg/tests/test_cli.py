import io
import json
from contextlib import redirect_stdout

import numpy as np
import pytest

from conftest import FIXTURES
from fracdelay.cli import dump_json, main


def run_cli(*argv):
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(list(argv))
    return code, buf.getvalue()


class TestJsonEmitter:
    def test_scalar_types(self):
        assert dump_json(None) == "null"
        assert dump_json(True) == "true"
        assert dump_json(3) == "3"
        assert dump_json(0.1) == "0.1"
        assert dump_json(float("inf")) == "Infinity"

    def test_fifteen_digits(self):
        assert dump_json(1 / 3) == "0.333333333333333"

    def test_key_order_preserved(self):
        assert dump_json({"b": 1, "a": 2}).index('"b"') < \
            dump_json({"b": 1, "a": 2}).index('"a"')


class TestCommands:
    def test_certify_contractive_exit_zero(self):
        code, out = run_cli("certify", "--problem",
                            f"{FIXTURES}/scalar_contractive.json")
        assert code == 0
        doc = json.loads(out)
        assert doc["verdict"] == "ContractiveGAS"
        assert doc["bounds"] is None

    def test_certify_inconclusive_exit_two(self):
        code, out = run_cli("certify", "--problem",
                            f"{FIXTURES}/scalar_inconclusive.json")
        assert code == 2
        assert json.loads(out)["verdict"] == "Inconclusive"

    def test_certify_delay_free_includes_bounds(self):
        code, out = run_cli("certify", "--problem",
                            f"{FIXTURES}/exp_decay.json")
        assert code == 0
        doc = json.loads(out)
        assert doc["bounds"]["K1"] == pytest.approx(1.0, abs=1e-6)

    def test_simulate_writes_artifacts(self, tmp_path):
        code, out = run_cli("simulate", "--problem",
                            f"{FIXTURES}/exp_decay.json",
                            "--step", "0.001", "--horizon", "1",
                            "--out", str(tmp_path))
        assert code == 0
        doc = json.loads(out)
        assert doc["final_state"][0] == pytest.approx(np.exp(-1), abs=1e-4)
        csv = (tmp_path / "trajectory.csv").read_text().strip().split("\n")
        assert csv[0] == "t,x1"
        assert float(csv[-1].split(",")[1]) == pytest.approx(np.exp(-1),
                                                             abs=1e-4)
        assert (tmp_path / "summary.json").exists()

    def test_spectral_verdict(self):
        code, out = run_cli("spectral", "--problem",
                            f"{FIXTURES}/spectral_t34.json")
        assert code == 0
        doc = json.loads(out)
        assert doc["verdict"] == "GloballyAsymptoticallyStable"
        assert doc["composite_norm"] == pytest.approx(0.5, abs=1e-10)

    def test_ml_values(self):
        code, out = run_cli("ml", "--problem", f"{FIXTURES}/frac_nodelay.json",
                            "--t", "1.0")
        assert code == 0
        doc = json.loads(out)
        assert doc["phi_j"][0][0][0] == pytest.approx(0.4275836, abs=5e-8)

    def test_verify_bounds(self):
        code, out = run_cli("verify-bounds", "--problem",
                            f"{FIXTURES}/frac_nodelay.json")
        assert code == 0
        assert json.loads(out)["all_passed"] is True

    def test_missing_file_is_error(self, capsys):
        code, _ = run_cli("certify", "--problem", "/nonexistent.json")
        assert code == 1

    def test_invalid_problem_is_error(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({
            "alpha": 1.0, "delays": [0.0, 1.0, 1.0],
            "A": [[[-1.0]], [[0.5]], [[0.5]]],
            "phi": [{"times": [-1.0], "values": [[1.0]], "interp": "const"}],
        }))
        code, _ = run_cli("certify", "--problem", str(bad))
        assert code == 1

    def test_dump_normalized_round_trip(self, tmp_path):
        code, out = run_cli("certify", "--problem",
                            f"{FIXTURES}/scalar_contractive.json",
                            "--dump-normalized")
        assert code == 0
        doc = json.loads(out)
        echo = tmp_path / "echo.json"
        echo.write_text(out)
        code2, out2 = run_cli("certify", "--problem", str(echo),
                              "--dump-normalized")
        assert code2 == 0
        assert out == out2


class TestDeterminism:
    @pytest.mark.parametrize("argv", [
        ("certify", "--problem", f"{FIXTURES}/scalar_contractive.json"),
        ("simulate", "--problem", f"{FIXTURES}/frac_delay_a07.json",
         "--step", "0.01", "--horizon", "2"),
        ("spectral", "--problem", f"{FIXTURES}/spectral_t34.json"),
        ("ml", "--problem", f"{FIXTURES}/frac_nodelay.json", "--t", "0.7"),
    ])
    def test_repeat_runs_byte_identical(self, argv):
        _, first = run_cli(*argv)
        _, second = run_cli(*argv)
        assert first == second
