import json
import os
import subprocess
import sys

import pytest

from biphoton_transfer.cli import EXIT_IO, EXIT_PARSE, EXIT_PARTIAL, EXIT_PHYSICS, main
from biphoton_transfer.scenario import (
    ScenarioError,
    load_scenario,
    run_scenario,
    scenario_from_dict,
    serialize_scenario,
)

from conftest import SCENARIO_DIR

FAST_1D = """
name = "fast"
[lattice]
dims = 1
modes_per_axis = 31
lambda_x = 0.14285714285714285
[mask]
terms = [{fn = "sin", amplitude = 1.9}]
[input]
modes = [0, 1]
coefficients = [[0.7071067811865476, 0.0], [0.0, 0.7071067811865476]]
[camera]
pixels_per_mode = 5
window = 4
counts_total = 10000.0
[noise]
seed = 7
[gs]
n_runs = 2
n_iters = 10
seed = 3
"""

FAST_2D = """
name = "fast2d"
[lattice]
dims = 2
modes_per_axis = 19
lambda_x = 0.14285714285714285
[mask]
terms = [{fn = "sin", amplitude = 1.4, axis = "x"}, {fn = "sin", amplitude = 1.4, axis = "y"}]
[camera]
pixels_per_mode = 5
window = 3
counts_total = 10000.0
[gs]
n_runs = 2
n_iters = 10
"""


def write_scenario(tmp_path, text, name="sc.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestScenarioFiles:
    @pytest.mark.parametrize("fname", sorted(
        f for f in os.listdir(SCENARIO_DIR) if f.endswith(".toml")))
    def test_bundled_round_trip(self, fname, tmp_path):
        sc = load_scenario(os.path.join(SCENARIO_DIR, fname))
        rendered = serialize_scenario(sc)
        again = load_scenario(write_scenario(tmp_path, rendered))
        assert again == sc

    def test_json_encoding_accepted(self, tmp_path):
        sc = load_scenario(write_scenario(tmp_path, FAST_1D))
        doc_path = tmp_path / "sc.json"
        from biphoton_transfer.scenario import scenario_to_dict
        doc_path.write_text(json.dumps(scenario_to_dict(sc)))
        assert load_scenario(str(doc_path)) == sc

    def test_mask_and_unitary_both_rejected(self):
        doc = {"lattice": {"modes_per_axis": 7},
               "mask": {"terms": [{"fn": "sin", "amplitude": 1.0}]},
               "unitary": {"seed": 3}}
        with pytest.raises(ScenarioError):
            scenario_from_dict(doc)

    def test_neither_mask_nor_unitary_rejected(self):
        with pytest.raises(ScenarioError):
            scenario_from_dict({"lattice": {"modes_per_axis": 7}})

    def test_window_exceeding_lattice_rejected(self):
        doc = {"lattice": {"modes_per_axis": 7},
               "mask": {"terms": [{"fn": "sin", "amplitude": 1.0}]},
               "camera": {"window": 5}}
        with pytest.raises(ScenarioError):
            scenario_from_dict(doc)

    def test_mismatched_input_lengths_rejected(self):
        doc = {"lattice": {"modes_per_axis": 7},
               "mask": {"terms": [{"fn": "sin", "amplitude": 1.0}]},
               "input": {"modes": [0, 1], "coefficients": [[1.0, 0.0]]}}
        with pytest.raises(ScenarioError):
            scenario_from_dict(doc)


class TestRunScenario:
    def test_outputs_deterministic(self, tmp_path):
        sc = load_scenario(write_scenario(tmp_path, FAST_1D))
        a, b = str(tmp_path / "a"), str(tmp_path / "b")
        run_scenario(sc, out_dir=a)
        run_scenario(sc, out_dir=b)
        for fname in ("distribution_theory.csv", "distribution_sampled.csv",
                      "phase_retrieved.csv", "phase_reference.csv"):
            pa, pb = os.path.join(a, fname), os.path.join(b, fname)
            assert open(pa, "rb").read() == open(pb, "rb").read(), fname

    def test_report_contents(self, tmp_path):
        sc = load_scenario(write_scenario(tmp_path, FAST_1D))
        rep = run_scenario(sc, out_dir=str(tmp_path / "out"))
        assert rep.transfer_fidelity == pytest.approx(1.0, abs=1e-10)
        assert rep.success_probability == pytest.approx(1.0 / 31.0, abs=1e-10)
        assert rep.route_total_variation <= 1e-9
        assert rep.similarity_noiseless >= 0.999  # bolduc-encoded route
        assert 0.9 <= rep.similarity_noisy <= 1.0
        doc = json.loads(open(tmp_path / "out" / "report.json").read())
        assert doc["name"] == "fast"
        assert len(doc["theory_window"]) == 9

    def test_unitary_scenario_skips_optics(self, tmp_path):
        text = ('name = "dense"\n[lattice]\nmodes_per_axis = 15\n'
                '[unitary]\nseed = 4\n[camera]\nwindow = 4\n')
        sc = load_scenario(write_scenario(tmp_path, text))
        rep = run_scenario(sc, out_dir=str(tmp_path / "out"))
        assert rep.similarity_noisy is None
        assert rep.route_total_variation is None
        assert rep.transfer_fidelity == pytest.approx(1.0, abs=1e-10)


class TestCliExitCodes:
    def test_parse_error_is_2(self, tmp_path):
        bad = write_scenario(tmp_path, "name = [unclosed\n")
        assert main(["transfer", bad]) == EXIT_PARSE

    def test_physics_error_is_3(self, tmp_path):
        # a = 6.0 on a 15-mode lattice leaks far past the truncation
        text = ('[lattice]\nmodes_per_axis = 15\n'
                '[mask]\nterms = [{fn = "sin", amplitude = 6.0}]\n'
                '[camera]\nwindow = 4\n')
        assert main(["transfer", write_scenario(tmp_path, text)]) == EXIT_PHYSICS

    def test_io_error_is_4(self, tmp_path):
        assert main(["transfer", str(tmp_path / "missing.toml")]) == EXIT_IO

    def test_success_is_0(self, tmp_path, capsys):
        sc_path = write_scenario(tmp_path, FAST_1D)
        assert main(["--out", str(tmp_path / "out"), "transfer", sc_path]) == 0
        assert "transfer fidelity" in capsys.readouterr().out

    def test_empty_suite_is_0(self, tmp_path, capsys):
        empty = tmp_path / "suite"
        empty.mkdir()
        assert main(["suite", str(empty)]) == 0

    def test_suite_with_failing_member_is_5(self, tmp_path, capsys):
        d = tmp_path / "suite"
        d.mkdir()
        (d / "good.toml").write_text(FAST_1D)
        (d / "bad.toml").write_text("name = [broken\n")
        code = main(["--out", str(tmp_path / "out"), "suite", str(d), "--no-gs"])
        assert code == EXIT_PARTIAL
        table = open(tmp_path / "out" / "summary.csv").read()
        assert table.splitlines()[0] == "scenario,fidelity,similarity,success_probability"
        assert "bad.toml,ERROR" in table
        assert any(line.startswith("fast,") for line in table.splitlines())


class TestCliOptions:
    def test_seed_override_changes_samples(self, tmp_path):
        sc_path = write_scenario(tmp_path, FAST_1D)
        a, b = str(tmp_path / "a"), str(tmp_path / "b")
        assert main(["--out", a, "simulate", sc_path]) == 0
        assert main(["--out", b, "--seed-override", "1234", "simulate", sc_path]) == 0
        sa = open(os.path.join(a, "distribution_sampled.csv")).read()
        sb = open(os.path.join(b, "distribution_sampled.csv")).read()
        assert sa != sb

    def test_out_env_variable(self, tmp_path, monkeypatch):
        sc_path = write_scenario(tmp_path, FAST_1D)
        monkeypatch.setenv("BIPHOTON_TRANSFER_OUT", str(tmp_path / "env_out"))
        assert main(["transfer", sc_path]) == 0
        assert os.path.exists(tmp_path / "env_out" / "fast" / "report.json")

    def test_console_script_installed(self, tmp_path):
        sc_path = write_scenario(tmp_path, FAST_1D)
        proc = subprocess.run(
            ["biphoton-transfer", "--out", str(tmp_path / "out"), "transfer", sc_path],
            capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        assert "transfer fidelity" in proc.stdout


class TestEmitPlots:
    def run_and_emit(self, tmp_path, text):
        sc_path = write_scenario(tmp_path, text)
        out = str(tmp_path / "out")
        assert main(["--out", out, "simulate", sc_path]) == 0
        assert main(["emit-plots", os.path.join(out, "report.json")]) == 0
        return out

    def test_1d_rows_match_window(self, tmp_path):
        out = self.run_and_emit(tmp_path, FAST_1D)
        lines = open(os.path.join(out, "fast_modes.csv")).read().splitlines()
        assert lines[0] == "m,P_theory,P_sampled,poisson_error"
        assert len(lines) == 1 + 9  # window 4 -> modes -4..4
        assert lines[1].startswith("-4,")

    def test_2d_long_format(self, tmp_path):
        out = self.run_and_emit(tmp_path, FAST_2D)
        lines = open(os.path.join(out, "fast2d_modes.csv")).read().splitlines()
        assert lines[0].startswith("m_x,m_y,P_theory")
        assert len(lines) == 1 + 7 * 7  # window 3 per axis
        assert lines[1].startswith("-3,-3,")

    def test_sampled_column_omitted_without_sampling(self, tmp_path):
        text = FAST_1D.replace("counts_total = 10000.0", "counts_total = 0.0")
        sc_path = write_scenario(tmp_path, text)
        out = str(tmp_path / "out")
        assert main(["--out", out, "simulate", sc_path]) == 0
        assert main(["emit-plots", os.path.join(out, "report.json")]) == 0
        lines = open(os.path.join(out, "fast_modes.csv")).read().splitlines()
        assert lines[0] == "m,P_theory"

    def test_corrupt_report_is_parse_error(self, tmp_path):
        path = tmp_path / "report.json"
        path.write_text("{not json")
        assert main(["emit-plots", str(path)]) == EXIT_PARSE
