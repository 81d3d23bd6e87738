"""Command line interface: outputs, exit codes, file artifacts."""

import json
import math

import pytest

from radialmot import save
from radialmot.cli import main


@pytest.fixture()
def blocks_file(tmp_path, blocks):
    p = tmp_path / "blocks.json"
    save(blocks, p)
    return str(p)


@pytest.fixture()
def uniform_file(tmp_path, uniform):
    p = tmp_path / "uniform.json"
    save(uniform, p)
    return str(p)


def run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestCost:
    def test_aligned_triple(self, capsys):
        code, out, _ = run(capsys, ["cost", "1", "2", "15"])
        assert code == 0
        assert "argmin collinear = yes" in out
        assert "phi(r1, r2)" in out

    def test_json_payload(self, capsys):
        code, out, _ = run(capsys, ["cost", "1", "2", "15", "--json"])
        assert code == 0
        doc = json.loads(out)
        assert doc["schema_version"] == 1
        assert doc["command"] == "cost"
        assert doc["value"] == pytest.approx(
            1.0 / 3.0 + 1.0 / 14.0 + 1.0 / 17.0, rel=1e-12
        )
        assert doc["alignment"] == 170.0
        assert doc["argmin_collinear"] is True

    def test_unaligned_triple(self, capsys):
        code, out, _ = run(capsys, ["cost", "1", "2", "14", "--json"])
        assert code == 0
        doc = json.loads(out)
        assert doc["argmin_collinear"] is False
        assert doc["value"] < doc["c_pi"]

    def test_explicit_angles(self, capsys):
        code, out, _ = run(
            capsys,
            ["cost", "1", "2", "3", "--angles", str(math.pi), "0", "--json"],
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["at_angles"]["total"] == pytest.approx(31.0 / 30.0, rel=1e-12)

    def test_invalid_radii_usage_error(self, capsys):
        code, _, err = run(capsys, ["cost", "-1", "2", "3"])
        assert code == 2
        assert "error" in err

    def test_degenerate_cost_failure(self, capsys):
        # two charges pinned at the origin: mathematically infeasible
        code, _, err = run(capsys, ["cost", "0", "0", "1"])
        assert code == 1
        assert "error" in err


class TestMap:
    def test_table_output(self, capsys, blocks_file):
        code, out, _ = run(capsys, ["map", blocks_file, "--samples", "4"])
        assert code == 0
        lines = [l for l in out.splitlines() if l and not l.startswith("#")]
        assert lines[0] == "x,t_x,t2_x"
        assert len(lines) == 1 + 4  # header + one orbit row per sampled start

    def test_check_passes(self, capsys, blocks_file):
        code, out, _ = run(
            capsys, ["map", blocks_file, "--check", "--probes", "99", "--json"]
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["check"]["ok"] is True
        assert doc["check"]["max_cycle_error"] < 1e-9

    def test_pattern_choice_validated(self, blocks_file):
        with pytest.raises(SystemExit):
            main(["map", blocks_file, "--pattern", "XYZ"])

    def test_csv_file_with_config_echo(self, tmp_path, capsys, blocks_file):
        out_file = tmp_path / "map.csv"
        code, _, _ = run(
            capsys,
            ["map", blocks_file, "--samples", "3", "--out", str(out_file)],
        )
        assert code == 0
        text = out_file.read_text()
        assert text.startswith("#")
        assert "pattern=DDI" in text
        assert "x,t_x,t2_x" in text

    def test_malformed_density_file(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{\"schema_version\": 1, \"segments\": []}")
        code, _, err = run(capsys, ["map", str(bad)])
        assert code == 2
        assert "error" in err

    def test_missing_density_file(self, tmp_path, capsys):
        code, _, err = run(capsys, ["map", str(tmp_path / "none.json")])
        assert code == 2


class TestSolve:
    def test_blocks_monge_optimal(self, capsys, blocks_file):
        code, out, _ = run(capsys, ["solve", blocks_file, "--n", "2", "--json"])
        assert code == 0
        doc = json.loads(out)
        assert doc["verdict"] == "monge-optimal"
        assert abs(doc["exact_value"] - doc["monge_value"]) <= doc["tol"]
        cert = doc["lp_certificate"]
        assert cert["marginal_residual"] <= 1e-9
        assert cert["max_dual_violation"] <= 1e-9
        assert abs(cert["duality_gap"]) <= 1e-9
        # six atoms is inside the brute cross-check budget
        assert doc["brute_value"] == pytest.approx(doc["exact_value"], abs=1e-9)

    def test_brute_method(self, capsys, blocks_file):
        code, out, _ = run(
            capsys, ["solve", blocks_file, "--n", "2", "--method", "brute", "--json"]
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["method"] == "brute"

    def test_brute_size_cap_is_failure_exit(self, capsys, blocks_file):
        code, _, err = run(
            capsys, ["solve", blocks_file, "--n", "3", "--method", "brute"]
        )
        assert code == 1
        assert "error" in err


class TestCounterexample:
    def test_end_to_end_artifacts(self, tmp_path, capsys):
        rho_file = tmp_path / "cex.json"
        certs_file = tmp_path / "certs.json"
        code, out, _ = run(
            capsys,
            [
                "counterexample",
                "--k",
                "1",
                "--graph-probes",
                "32",
                "--out",
                str(rho_file),
                "--certs",
                str(certs_file),
                "--json",
            ],
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["gates"]["ratio_gate"] is True
        assert doc["gates"]["boundary_gate"] is True
        assert doc["gates"]["graph_condition_worst"] >= -1e-9
        for pattern in ("III", "DDI", "DID", "IDD"):
            assert doc["certificates"][pattern]["gap"] > 0.0

        # density artifact loads back
        from radialmot import load

        rho = load(rho_file)
        assert rho.total_mass() == pytest.approx(1.0, abs=1e-10)

        # certificates artifact carries the documented record shape
        certs = json.loads(certs_file.read_text())
        ddi = certs["certificates"]["DDI"]
        for key in (
            "pattern",
            "l",
            "r",
            "triples",
            "swap_triples",
            "exact_costs",
            "gap",
            "eps",
            "M",
            "gates",
        ):
            assert key in ddi
        assert ddi["gap"] > 0.0
        assert len(ddi["triples"]) == 2
        assert len(ddi["swap_triples"]) == 2

    def test_failed_gate_exits_one(self, capsys):
        code, _, err = run(capsys, ["counterexample", "--s1", "0.8"])
        assert code == 1
        assert "error" in err


class TestSweep:
    def test_condition_sweep_brackets_threshold(self, capsys):
        code, out, _ = run(
            capsys,
            [
                "sweep",
                "--what",
                "condition",
                "--r3-min",
                "14",
                "--r3-max",
                "15",
                "--steps",
                "3",
            ],
        )
        assert code == 0
        lines = [l for l in out.splitlines() if l and not l.startswith("#")]
        assert lines[0] == "r3,alignment,phi_gap"
        first = [float(v) for v in lines[1].split(",")]
        last = [float(v) for v in lines[-1].split(",")]
        assert first[1] < 0.0 < last[1]

    def test_curves_sweep_config_echo(self, capsys):
        code, out, _ = run(
            capsys,
            ["sweep", "--what", "curves", "--r3", "15", "--steps", "5"],
        )
        assert code == 0
        assert "slope_alpha_pi=" in out
        lines = [l for l in out.splitlines() if l and not l.startswith("#")]
        assert lines[0] == "beta,alpha_pi,alpha_0,alpha_hat_pi,alpha_hat_0"
        assert len(lines) == 6

    def test_stationary_sweep_counts(self, capsys):
        code, out, _ = run(
            capsys,
            [
                "sweep",
                "--what",
                "stationary",
                "--r3-min",
                "14",
                "--r3-max",
                "15",
                "--steps",
                "2",
                "--json",
            ],
        )
        assert code == 0
        doc = json.loads(out)
        cols = doc["columns"]
        rows = doc["rows"]
        i_pts = cols.index("n_points")
        i_corners = cols.index("only_corners")
        assert rows[0][i_pts] == 6
        assert rows[-1][i_pts] == 4
        assert rows[-1][i_corners] is True

    def test_empty_range_gives_header_only(self, capsys):
        code, out, _ = run(
            capsys,
            ["sweep", "--what", "condition", "--r3-min", "14", "--r3-max", "15", "--steps", "0"],
        )
        assert code == 0
        lines = [l for l in out.splitlines() if l and not l.startswith("#")]
        assert lines == ["r3,alignment,phi_gap"]


class TestTopLevel:
    def test_unknown_subcommand(self):
        with pytest.raises(SystemExit):
            main(["frobnicate"])

    def test_seed_echoed_in_sweep_config(self, capsys):
        code, out, _ = run(
            capsys,
            [
                "--seed",
                "7",
                "sweep",
                "--what",
                "condition",
                "--r3-min",
                "14",
                "--r3-max",
                "15",
                "--steps",
                "2",
                "--json",
            ],
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["config"]["seed"] == 7

    def test_seed_in_csv_config_echo(self, capsys):
        code, out, _ = run(
            capsys,
            ["--seed", "3", "sweep", "--what", "condition", "--r3-min", "14", "--r3-max", "15", "--steps", "2"],
        )
        assert code == 0
        assert "# seed=3" in out
