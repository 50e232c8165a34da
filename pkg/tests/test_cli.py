import csv
import json
import math
from pathlib import Path

import numpy as np
import pytest

from mediated_gates.main import main
from mediated_gates.services.linalg import matrix_to_json


def run(output_dir, *argv):
    return main([*argv, "--output", str(output_dir)])


def read_json(path):
    return json.loads(path.read_text())


def read_csv(path):
    lines = path.read_text().splitlines()
    header = {}
    for line in lines:
        if line.startswith("# "):
            key, _, value = line[2:].partition("=")
            header[key] = value
    rows = list(csv.DictReader(line for line in lines if not line.startswith("#")))
    return header, rows


# ---------- derive ----------
def test_derive_linear(output_dir, capsys):
    assert run(output_dir, "derive", "--geometry", "linear-3", "--t-max", str(5 * math.pi)) == 0
    report = read_json(output_dir / "derive-linear-3.json")
    periods = [m["t"] for m in report["members"]]
    assert periods == pytest.approx([4 * math.pi / 3, 8 * math.pi / 3, 4 * math.pi], abs=1e-6)
    assert [m["gate_tag"] for m in report["members"]] == ["U2", "U2^2", "I"]
    assert report["members"][0]["gate"]["dim"] == 4
    assert report["config"]["options"]["geometry"] == "linear-3"
    assert "derive linear-3" in capsys.readouterr().out


def test_derive_unequal_couplings(output_dir):
    assert run(output_dir, "derive", "--geometry", "linear-3", "--J-ratio", "2") == 0
    report = read_json(output_dir / "derive-linear-3.json")
    assert report["members"] == []
    assert report["analytic_periods"] == []
    assert "unequal" in report["note"]


def test_derive_star3(output_dir):
    assert run(output_dir, "derive", "--geometry", "star-3") == 0
    report = read_json(output_dir / "derive-star-3.json")
    assert report["members"][0]["gate_tag"] == "U3"
    assert report["base_period"] == pytest.approx(2 * math.pi, abs=1e-6)


def test_derive_invalid_geometry(output_dir):
    assert run(output_dir, "derive", "--geometry", "ring-4") == 2


# ---------- weyl ----------
def test_weyl_u2(output_dir):
    assert run(output_dir, "weyl", "u2", "--restarts", "8") == 0
    report = read_json(output_dir / "weyl-u2.json")
    assert [report["weyl"][k] for k in ("c1", "c2", "c3")] == pytest.approx(
        [2 * math.pi / 3, math.pi / 3, math.pi / 3], abs=1e-8)
    assert report["perfect_entangler"] is False
    assert report["max_concurrence"] == pytest.approx(math.sqrt(3) / 2, abs=1e-6)


def test_weyl_cnot(output_dir):
    assert run(output_dir, "weyl", "CNOT", "--restarts", "8") == 0
    report = read_json(output_dir / "weyl-CNOT.json")
    assert report["perfect_entangler"] is True
    assert report["max_concurrence"] == pytest.approx(1.0, abs=1e-6)


def test_weyl_identity_file(output_dir, tmp_path):
    path = tmp_path / "identity.json"
    path.write_text(json.dumps(matrix_to_json(np.eye(4))))
    assert run(output_dir, "weyl", str(path), "--restarts", "4") == 0
    report = read_json(output_dir / "weyl-identity.json")
    assert list(report["weyl"].values()) == pytest.approx([0, 0, 0], abs=1e-12)
    assert report["max_concurrence"] == pytest.approx(0.0, abs=1e-9)


def test_weyl_exit_codes(output_dir, tmp_path):
    not_unitary = tmp_path / "scaled.json"
    not_unitary.write_text(json.dumps(matrix_to_json(2 * np.eye(4))))
    assert run(output_dir, "weyl", str(not_unitary)) == 3
    garbage = tmp_path / "garbage.json"
    garbage.write_text("{not json")
    assert run(output_dir, "weyl", str(garbage)) == 2
    wrong_size = tmp_path / "wrong.json"
    wrong_size.write_text(json.dumps({"dim": 4, "entries": [[1, 0]]}))
    assert run(output_dir, "weyl", str(wrong_size)) == 2
    assert run(output_dir, "weyl", "no-such-gate") == 2


# ---------- synth ----------
def test_synth_unknown_target(output_dir):
    assert run(output_dir, "synth", "--target", "teleporter") == 2


def test_synth_require_converged(output_dir):
    argv = ["synth", "--target", "bell", "--menu", "U2", "--depth", "1", "--restarts", "2", "--time-budget", "2"]
    assert run(output_dir, *argv) == 0
    assert run(output_dir, *argv, "--require-converged") == 4
    report = read_json(output_dir / "synth-bell.json")
    assert report["converged"] is False
    assert report["depth"] == 1


def test_synth_rejects_bad_optimizer_flags(output_dir):
    assert run(output_dir, "synth", "--target", "bell", "--restarts", "0") == 2


def test_synth_target_budget_flag(output_dir):
    argv = ["synth", "--target", "bell", "--menu", "U2", "--depth", "1", "--restarts", "2", "--time-budget", "2"]
    assert run(output_dir, *argv, "--target-budget", "none") == 0
    assert read_json(output_dir / "synth-bell.json")["config"]["options"]["optimizer"]["target_budget"] is None
    assert run(output_dir, *argv, "--target-budget", "30") == 0
    assert read_json(output_dir / "synth-bell.json")["config"]["options"]["optimizer"]["target_budget"] == 30.0
    assert run(output_dir, *argv, "--target-budget", "-1") == 2


@pytest.mark.slow
def test_synth_bell_incremental(output_dir):
    assert run(output_dir, "synth", "--target", "bell", "--menu", "U2") == 0
    assert read_json(output_dir / "synth-bell.json")["depth"] == 2


@pytest.mark.slow
def test_synth_ghz3(output_dir):
    assert run(output_dir, "synth", "--target", "ghz3", "--menu", "U3", "--require-converged") == 0
    assert read_json(output_dir / "synth-ghz3.json")["depth"] == 1


@pytest.mark.slow
def test_synth_cnot_fixed_depth(output_dir):
    assert run(output_dir, "synth", "--target", "cnot", "--menu", "U2", "--depth", "4", "--require-converged") == 0


# ---------- replay and wodd ----------
def test_replay_bell_in_pi_units(output_dir):
    assert run(output_dir, "replay", "fig3a", "--angles-in-pi", "--require-converged") == 0
    report = read_json(output_dir / "replay-fig3a.json")
    assert report["angles_unit"] == "pi"
    assert report["objective"] <= 1e-10
    # Ry(pi) on q1 in the first local layer
    assert report["angles"][1] == pytest.approx(1.0)


def test_replay_unknown_figure(output_dir):
    assert run(output_dir, "replay", "fig9") == 2


def test_replay_uses_recorded_fixture(output_dir, tmp_path):
    fixtures = tmp_path / "replays.json"
    fixtures.write_text(json.dumps({"fig5d": {"params": [0.0] * 27, "seed": 3}}))
    assert run(output_dir, "replay", "fig5d", "--fixtures", str(fixtures)) == 0
    report = read_json(output_dir / "replay-fig5d.json")
    assert report["restarts"] == 0
    assert report["figure_derived"]
    assert report["caption_reproduces"] is not None
    # zero angles leave |000> orthogonal to W
    assert run(output_dir, "replay", "fig5d", "--fixtures", str(fixtures), "--require-converged") == 4


def test_wodd_w3(output_dir):
    assert run(output_dir, "wodd", "--n", "1", "--restarts", "1") == 0
    report = read_json(output_dir / "wodd-w3.json")
    probabilities = [p["probability"] for p in report["projections"]]
    assert probabilities == pytest.approx([2 / 3, 1 / 3])
    assert report["total_depth"] == 3


# ---------- robustness and scaling ----------
def test_robustness_csv(output_dir):
    assert run(output_dir, "robustness") == 0
    header, rows = read_csv(output_dir / "robustness.csv")
    assert header["config.command"] == "robustness"
    assert float(header["coefficient"]) == pytest.approx(0.97, abs=0.02)
    assert len(rows) == 41
    assert float(rows[0]["infidelity"]) == pytest.approx(0.0, abs=1e-12)


def test_csv_and_json_carry_identical_numbers(output_dir):
    assert run(output_dir, "robustness", "--points", "5") == 0
    assert run(output_dir, "robustness", "--points", "5", "--format", "json") == 0
    _, rows = read_csv(output_dir / "robustness.csv")
    report = read_json(output_dir / "robustness.json")
    assert [float(r["infidelity"]) for r in rows] == [p["infidelity"] for p in report["points"]]


def test_scaling(output_dir):
    assert run(output_dir, "scaling", "--n", "1", "9", "25") == 0
    _, rows = read_csv(output_dir / "scaling-bell.csv")
    assert [float(r["mediated_time_factor"]) for r in rows] == [1.0, 3.0, 5.0]
    assert {r["mediated_depth"] for r in rows} == {"2"}
    assert rows[0]["pairwise_depth"] == "4"


def test_scaling_even_bus(output_dir):
    assert run(output_dir, "scaling", "--n", "2") == 2


def test_output_file_path(tmp_path):
    target = tmp_path / "custom" / "table.csv"
    assert main(["scaling", "--output", str(target), "--format", "csv"]) == 0
    assert target.is_file()


# ---------- table ----------
@pytest.mark.slow
def test_table1(output_dir):
    assert run(output_dir, "table1") == 0
    _, rows = read_csv(output_dir / "table1.csv")
    by_name = {r["target"]: r for r in rows}
    assert by_name["bell"]["found"] == "2"
    assert by_name["bell"]["reference_pairwise"] == "4"
    assert by_name["cnot"]["found"] == "4"
    assert by_name["toffoli"]["status"].startswith("skipped")


def test_table1_script_defaults_to_one_worker():
    script = Path(__file__).resolve().parents[1] / "scripts" / "run_table1.sh"
    assert '--workers "${MEDIATED_WORKERS:-1}"' in script.read_text()
