import csv
import json

import numpy as np
import pytest

from holosplit.cli import (
    cmd_decompose,
    cmd_demo,
    cmd_export,
    cmd_gauge_check,
    cmd_separability,
)
from holosplit.config import (
    ConfigError,
    load_run_config,
    load_sampled_hamiltonian,
    matrix_from_json,
    matrix_to_json,
    report_from_json,
    report_to_json,
    write_sampled_hamiltonian,
)
from holosplit.dynamics import TimeGrid
from holosplit.instances import refutation_instance

SQRT3 = np.sqrt(3.0)


def write_config(path, **overrides):
    cfg = {
        "system": {"kind": "lambda", "omega0": SQRT3, "delta": 1.0,
                   "omega1": [1.0, 0.0], "omega2": [0.0, 0.0], "eta": np.pi / 3},
        "subspace": {"lambda_case": "ii"},
        "section": {"rule": "phase_anchored"},
        "grid": {"tau": np.pi / 2, "steps": 4096},
    }
    cfg.update(overrides)
    path.write_text(json.dumps(cfg))
    return path


@pytest.fixture
def case_ii_config(tmp_path):
    return write_config(tmp_path / "case_ii.json")


class TestConfigParsing:
    def test_rejects_unknown_keys(self, tmp_path):
        path = write_config(tmp_path / "c.json", extra={"x": 1})
        with pytest.raises(ConfigError, match="unknown keys"):
            load_run_config(path)

    def test_rejects_missing_sections(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"system": {"kind": "lambda"}}))
        with pytest.raises(ConfigError, match="missing keys"):
            load_run_config(path)

    def test_rejects_small_grid(self, tmp_path):
        path = write_config(tmp_path / "c.json", grid={"tau": 1.0, "steps": 1})
        with pytest.raises(ConfigError, match="steps"):
            load_run_config(path)

    def test_overrides_apply(self, case_ii_config):
        cfg = load_run_config(case_ii_config, tau_override=1.0, steps_override=16)
        assert cfg.grid.tau == 1.0 and cfg.grid.steps == 16

    def test_constant_system_with_matrix_subspace(self, tmp_path):
        h = np.diag([0.0, 1.0, 2.0]).astype(complex)
        psi0 = np.eye(3)[:, :2].astype(complex)
        path = tmp_path / "c.json"
        path.write_text(json.dumps({
            "system": {"kind": "constant", "matrix": matrix_to_json(h)},
            "subspace": {"matrix": matrix_to_json(psi0)},
            "section": {"rule": "phase_anchored"},
            "grid": {"tau": 1.0, "steps": 32},
        }))
        cfg = load_run_config(path)
        assert cfg.psi0.shape == (3, 2)

    def test_sampled_roundtrip(self, tmp_path):
        spec, _ = refutation_instance(3, TimeGrid.uniform(1.0, 8))
        f = tmp_path / "ham.json"
        write_sampled_hamiltonian(f, spec.grid.times, spec.samples)
        back = load_sampled_hamiltonian(f)
        np.testing.assert_allclose(back.samples, spec.samples, atol=0)

    def test_matrix_json_roundtrip(self):
        m = np.array([[1 + 2j, 0.5], [-1j, 3.0]])
        np.testing.assert_array_equal(matrix_from_json(matrix_to_json(m)), m)


class TestDecompose:
    def test_case_ii_report(self, case_ii_config, tmp_path):
        out = tmp_path / "report.json"
        assert cmd_decompose(str(case_ii_config), str(out)) == 0
        data = json.loads(out.read_text())
        assert data["classification"] == "case_ii"
        w = matrix_from_json(data["w_final"], "w_final")
        assert np.abs(w - np.diag([1.0, 1j])).max() <= 1e-6

    def test_case_i_report(self, tmp_path):
        path = write_config(tmp_path / "ci.json",
                            system={"kind": "lambda", "omega0": 1.0, "delta": 0.0},
                            subspace={"lambda_case": "i"},
                            section={"rule": "auto"},
                            grid={"tau": np.pi, "steps": 4096})
        out = tmp_path / "report.json"
        assert cmd_decompose(str(path), str(out)) == 0
        data = json.loads(out.read_text())
        u = matrix_from_json(data["time_evolution"], "time_evolution")
        assert np.abs(u + np.eye(2)).max() <= 1e-8
        assert data["classification"] == "case_i"

    def test_fixed_on_moving_subspace_is_config_error(self, tmp_path, capsys):
        path = write_config(tmp_path / "bad.json", section={"rule": "fixed"})
        out = tmp_path / "report.json"
        assert cmd_decompose(str(path), str(out)) == 3
        assert "constant subspace" in capsys.readouterr().err

    def test_missing_config_is_config_error(self, tmp_path):
        assert cmd_decompose(str(tmp_path / "nope.json"), str(tmp_path / "o.json")) == 3

    def test_deterministic_reruns(self, case_ii_config, tmp_path):
        out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
        assert cmd_decompose(str(case_ii_config), str(out1), steps=512) == 0
        assert cmd_decompose(str(case_ii_config), str(out2), steps=512) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_report_roundtrip(self, case_ii_config, tmp_path):
        out = tmp_path / "report.json"
        cmd_decompose(str(case_ii_config), str(out), steps=512)
        data = json.loads(out.read_text())
        report = report_from_json(data)
        assert report_to_json(report) == data


class TestDemo:
    @pytest.mark.parametrize("case", ["i", "ii", "iii"])
    def test_demo_runs_clean(self, case, capsys):
        assert cmd_demo(case) == 0
        text = capsys.readouterr().out
        assert "classification: case_" + case in text

    def test_demo_ii_deviation_small(self, capsys):
        assert cmd_demo("ii") == 0
        text = capsys.readouterr().out
        worst = float(text.rsplit("worst deviation:", 1)[1].strip())
        assert worst <= 1e-6

    def test_demo_i_resonant_override(self, capsys):
        assert cmd_demo("i", delta=0.0, omega0=1.0, tau=np.pi) == 0
        text = capsys.readouterr().out
        worst = float(text.rsplit("worst deviation:", 1)[1].strip())
        assert worst <= 1e-8

    def test_demo_iii_reports_commutator(self, capsys):
        assert cmd_demo("iii") == 0
        text = capsys.readouterr().out
        line = [l for l in text.splitlines() if l.startswith("max_commutator")][0]
        assert float(line.split(":")[1]) <= 1e-8

    def test_demo_rejects_unknown_case(self, capsys):
        assert cmd_demo("iv") == 3


class TestSeparability:
    def test_lambda_cases_exit_zero(self, tmp_path, capsys):
        for case, rule in (("i", "auto"), ("iii", "auto")):
            path = write_config(tmp_path / f"c{case}.json",
                                subspace={"lambda_case": case},
                                section={"rule": rule})
            assert cmd_separability(str(path)) == 0
            assert f"case_{case}" in capsys.readouterr().out

    def test_generic_instance_exits_one(self, tmp_path, capsys):
        spec, psi0 = refutation_instance(7)
        ham = tmp_path / "ham.json"
        write_sampled_hamiltonian(ham, spec.grid.times, spec.samples)
        path = tmp_path / "c.json"
        path.write_text(json.dumps({
            "system": {"kind": "sampled", "path": str(ham)},
            "subspace": {"matrix": matrix_to_json(psi0)},
            "section": {"rule": "phase_anchored"},
            "grid": {"tau": 2.0, "steps": 4096},
        }))
        assert cmd_separability(str(path)) == 1
        out = capsys.readouterr().out
        prod = float([l for l in out.splitlines() if "product_residual" in l][0].split(":")[1])
        sep = float([l for l in out.splitlines() if "separation_residual" in l][0].split(":")[1])
        assert prod <= 1e-6 and sep > 1e-2


class TestExport:
    def test_case_ii_columns(self, case_ii_config, tmp_path):
        out = tmp_path / "traj.csv"
        assert cmd_export(str(case_ii_config), str(out), steps=1024) == 0
        with open(out) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 1025
        k22 = np.array([float(r["K_22_re"]) for r in rows])
        assert np.abs(k22).max() <= 1e-10
        first = rows[0]
        assert float(first["W_11_re"]) == 1.0 and float(first["W_12_re"]) == 0.0
        assert float(first["W_22_re"]) == 1.0 and float(first["W_21_im"]) == 0.0
        o22 = np.array([float(r["O_22_re"]) for r in rows])
        t = np.array([float(r["t"]) for r in rows])
        ref = np.sqrt(1 - 0.75 * np.sin(2 * t) ** 2)
        assert np.abs(o22 - ref).max() <= 1e-8

    def test_deterministic(self, case_ii_config, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        cmd_export(str(case_ii_config), str(a), steps=256)
        cmd_export(str(case_ii_config), str(b), steps=256)
        assert a.read_bytes() == b.read_bytes()

    def test_unwritable_path_is_io_error(self, case_ii_config, tmp_path):
        assert cmd_export(str(case_ii_config), str(tmp_path / "no" / "dir.csv"),
                          steps=64) == 4


class TestGaugeCheck:
    @pytest.mark.parametrize("case", ["i", "ii", "iii"])
    def test_lambda_cases_covariant(self, case, tmp_path, capsys):
        path = write_config(tmp_path / f"g{case}.json",
                            subspace={"lambda_case": case},
                            section={"rule": "auto"})
        assert cmd_gauge_check(str(path), seed=1) == 0
        assert "unchanged" in capsys.readouterr().out

    def test_verdict_stable_across_seeds(self, tmp_path, capsys):
        spec, psi0 = refutation_instance(7, TimeGrid.uniform(2.0, 2048))
        ham = tmp_path / "ham.json"
        write_sampled_hamiltonian(ham, spec.grid.times, spec.samples)
        path = tmp_path / "c.json"
        path.write_text(json.dumps({
            "system": {"kind": "sampled", "path": str(ham)},
            "subspace": {"matrix": matrix_to_json(psi0)},
            "section": {"rule": "phase_anchored"},
            "grid": {"tau": 2.0, "steps": 2048},
        }))
        verdicts = set()
        for seed in (0, 1, 2):
            assert cmd_gauge_check(str(path), seed=seed) == 0
            out = capsys.readouterr().out
            line = [l for l in out.splitlines() if l.startswith("classification")][0]
            verdicts.add(line)
        assert len(verdicts) == 1
