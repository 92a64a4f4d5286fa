import json
import math

import pytest

from nct import cli, potential
from nct.config import ConfigError, RunConfig, parse_config


def run_cli(args, capsys):
    code = cli.main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_csv(text):
    lines = text.strip().split("\n")
    header = lines[0].split(",")
    rows = [dict(zip(header, line.split(","))) for line in lines[1:]]
    return header, rows


class TestConfigParsing:
    def test_defaults_valid(self):
        cfg = RunConfig()
        cfg.beam_spec()
        cfg.potential_spec()

    def test_sections_and_comments(self):
        cfg = parse_config("""
        # reference tube
        [beam]
        radius_m = 2e-9
        l_max = 3
        [gas]
        density_per_cm3 = 5e13   # converted to per m^3
        """)
        assert cfg.radius_m == 2e-9
        assert cfg.l_max == 3
        assert cfg.density_per_m3 == 5e19

    def test_unknown_key_is_hard_error_with_line(self):
        with pytest.raises(ConfigError, match="line 3"):
            parse_config("[beam]\nradius_m = 1e-9\nbogus_key = 3\n")

    def test_unknown_section(self):
        with pytest.raises(ConfigError, match="unknown section"):
            parse_config("[nonsense]\nx = 1\n")

    def test_duplicate_key(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config("[beam]\nradius_m = 1\nradius_m = 2\n")

    def test_exclusive_stiffness(self):
        with pytest.raises(ConfigError):
            parse_config("[beam]\nomega0_rad_per_s = 1e6\nei_n_m2 = 1e-28\n")
        cfg = parse_config("[beam]\nei_n_m2 = 5.06e-28\n")
        assert cfg.omega0_rad_per_s is None
        assert cfg.ei_n_m2 == 5.06e-28

    def test_exclusive_temperature(self):
        with pytest.raises(ConfigError):
            parse_config("[gas]\ntemperature_k = 1e-6\n"
                         "temperature_over_tbec = 2\n")
        cfg = parse_config("[gas]\ntemperature_k = 1e-6\n")
        assert cfg.temperature_over_tbec is None

    def test_potential_coefficients(self):
        cfg = parse_config("[potential]\nc3_j_m3 = 1e-49\nc5_j_m5 = 6e-65\n")
        assert cfg.coefficients == ((3, 1e-49), (5, 6e-65))
        with pytest.raises(ConfigError, match="suffix"):
            parse_config("[potential]\nc3_j_m5 = 1e-49\n")

    def test_bad_value(self):
        with pytest.raises(ConfigError, match="line 2"):
            parse_config("[beam]\nradius_m = not_a_number\n")

    def test_key_outside_section(self):
        with pytest.raises(ConfigError, match="outside"):
            parse_config("radius_m = 1e-9\n")

    def test_every_section_round_trips(self):
        cfg = parse_config("""
        [beam]
        radius_m = 1.5e-9
        length_m = 2e-6
        linear_density_kg_per_m = 2e-15
        omega0_rad_per_s = 3e6
        l_max = 4
        tip_l_cut = 15
        [potential]
        cutoff_radius_m = 1.5e-9
        c5_j_m5 = 5e-65
        [gas]
        density_per_m3 = 2e19
        temperature_over_tbec = 2.5
        mass_kg = 1.4e-25
        [sweep]
        densities_per_cm3 = 1e12, 1e13
        t_over_tbec_min = 1.2
        t_over_tbec_max = 4.0
        t_points = 5
        [cool]
        tube_temperature_k = 2.0
        t_end_s = 1e-9
        samples = 50
        beta_mode = energy
        [output]
        path = /tmp/x.csv
        format = json
        [tolerances]
        series_rel_tol = 1e-14
        series_max_terms = 5000
        quad_rel_tol = 1e-9
        """)
        assert cfg.l_max == 4 and cfg.tip_l_cut == 15
        assert cfg.sweep_densities_per_m3 == (1e18, 1e19)
        assert cfg.t_points == 5
        assert cfg.beta_mode == "energy" and cfg.cool_samples == 50
        assert cfg.output_format == "json"
        assert cfg.series_control().max_terms == 5000
        spec = cfg.beam_spec()
        assert spec.radius == 1.5e-9 and spec.omega0 == 3e6


class TestOutputs:
    def test_modes_reference_row(self, capsys):
        code, out, _ = run_cli(["modes"], capsys)
        assert code == 0
        header, rows = parse_csv(out)
        assert header == ["l", "kappa_L", "omega_over_2pi_hz", "a_m",
                          "atilde_over_a", "I_m"]
        first = rows[0]
        assert float(first["omega_over_2pi_hz"]) == pytest.approx(398e3)
        assert float(first["kappa_L"]) == pytest.approx(1.8751040687,
                                                        rel=1e-9)
        assert float(first["a_m"]) == pytest.approx(0.2e-9, rel=0.03)
        assert float(rows[3]["kappa_L"]) == pytest.approx(3.5 * math.pi,
                                                          abs=0.01)

    def test_thermo_row(self, capsys):
        code, out, _ = run_cli(["thermo"], capsys)
        assert code == 0
        header, rows = parse_csv(out)
        assert header == ["n_per_m3", "T_a_K", "T_BEC_K", "lambda_dB_m",
                          "eta", "mu_J", "condensate_fraction"]
        row = rows[0]
        assert float(row["T_a_K"]) == pytest.approx(
            1.5 * float(row["T_BEC_K"]), rel=1e-10)
        assert 0.0 < float(row["eta"]) < 1.0

    def test_rates_methods(self, capsys):
        values = {}
        for method in ("series", "fgr", "simplified", "c5", "oracle"):
            code, out, _ = run_cli(
                ["rates", "--method", method, "--density-per-cm3", "1e14",
                 "--t-over-tbec", "3"], capsys)
            assert code == 0
            _, rows = parse_csv(out)
            assert rows[0]["method"] in (method, "quadrature")
            values[method] = float(rows[0]["gamma_per_s"])
        assert values["series"] == pytest.approx(values["oracle"], rel=2e-2)
        assert values["series"] >= values["fgr"]

    def test_sweep_structure(self, capsys):
        code, out, _ = run_cli(["sweep"], capsys)
        assert code == 0
        header, rows = parse_csv(out)
        assert header == ["n_cm3", "T_over_Tbec", "rate_per_s",
                          "omega0_per_s"]
        assert len(rows) == 5 * 20
        # grid ordering: density-major, temperature ascending
        assert float(rows[0]["n_cm3"]) == 1e12
        temps = [float(r["T_over_Tbec"]) for r in rows[:20]]
        assert temps == sorted(temps)

    def test_cool_header_and_relaxation(self, capsys):
        code, out, _ = run_cli(["cool"], capsys)
        assert code == 0
        header, rows = parse_csv(out)
        assert header[:2] == ["t_s", "Tc_eff_K"]
        assert header[2:] == [f"p{l}" for l in range(6)]
        assert float(rows[0]["Tc_eff_K"]) == pytest.approx(4.0, rel=1e-10)
        t_final = float(rows[-1]["Tc_eff_K"])
        t_first = float(rows[0]["Tc_eff_K"])
        assert t_final < 1e-3 * t_first

    def test_tables_statuses(self, capsys):
        code, out, _ = run_cli(["tables"], capsys)
        assert code == 0
        _, rows = parse_csv(out)
        by_quantity = {r["quantity"]: r for r in rows}
        assert float(by_quantity["a0_m"]["rel_dev"]) < 0.03
        for q, row in by_quantity.items():
            if q.startswith("u("):
                assert float(row["rel_dev"]) < 0.10
            if q.startswith("T_BEC"):
                assert float(row["rel_dev"]) < 0.05
            if q.startswith("lambda_at_Tbec("):
                assert row["status"] == "NON-REPRODUCED"
            if q.startswith("n*lambda^3"):
                assert float(row["rel_dev"]) < 2e-6
                assert row["status"] == "OK"

    def test_modes_full_flag(self, capsys):
        code, out, _ = run_cli(["modes", "--full"], capsys)
        assert code == 0
        _, rows = parse_csv(out)
        assert len(rows) == 21  # tip_l_cut + 1

    def test_csv_fields_reject_separators(self):
        with pytest.raises(ValueError):
            cli.write_records([{"a": "x,y"}], "-", "csv")

    def test_json_mirror(self, capsys):
        code, out, _ = run_cli(["thermo", "--format", "json"], capsys)
        assert code == 0
        records = json.loads(out)
        assert isinstance(records, list)
        assert set(records[0]) == {"n_per_m3", "T_a_K", "T_BEC_K",
                                   "lambda_dB_m", "eta", "mu_J",
                                   "condensate_fraction"}


class TestDeterminismAndUnits:
    def test_byte_identical_runs(self, capsys):
        _, out1, _ = run_cli(["modes"], capsys)
        _, out2, _ = run_cli(["modes"], capsys)
        assert out1 == out2

    def test_jobs_do_not_change_output(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert cli.main(["sweep", "--output", str(a)]) == 0
        assert cli.main(["sweep", "--output", str(b), "--jobs", "4"]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_unit_suffix_equivalence(self, tmp_path, capsys):
        cfg_cm = tmp_path / "cm.cfg"
        cfg_m = tmp_path / "m.cfg"
        cfg_cm.write_text("[gas]\ndensity_per_cm3 = 5e13\n")
        cfg_m.write_text("[gas]\ndensity_per_m3 = 5e19\n")
        _, out_cm, _ = run_cli(["thermo", "--config", str(cfg_cm)], capsys)
        _, out_m, _ = run_cli(["thermo", "--config", str(cfg_m)], capsys)
        assert out_cm == out_m

    def test_output_file_newlines(self, tmp_path):
        target = tmp_path / "modes.csv"
        assert cli.main(["modes", "--output", str(target)]) == 0
        raw = target.read_bytes()
        assert b"\r" not in raw
        assert raw.endswith(b"\n")


class TestExitCodes:
    def test_config_error_is_one(self, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text("[beam]\nbogus = 1\n")
        code, _, err = run_cli(["modes", "--config", str(bad)], capsys)
        assert code == 1
        assert "line 2" in err

    def test_missing_config_is_one(self, capsys):
        code, _, _ = run_cli(["modes", "--config", "/nonexistent.cfg"],
                             capsys)
        assert code == 1

    def test_usage_error_is_one(self, capsys):
        code, _, _ = run_cli(["not-a-command"], capsys)
        assert code == 1

    def test_numerical_failure_is_two(self, tmp_path, capsys):
        # a condensed gas cannot feed the rate formulas
        cfg = tmp_path / "sub.cfg"
        cfg.write_text("[gas]\ntemperature_over_tbec = 0.5\n")
        code, _, err = run_cli(["rates", "--config", str(cfg)], capsys)
        assert code == 2
        assert "numerical failure" in err

    def test_selfcheck_clean(self, capsys):
        code, out, _ = run_cli(["selfcheck"], capsys)
        assert code == 0
        _, rows = parse_csv(out)
        assert all(r["status"] == "ok" for r in rows)
        assert len(rows) == 5

    def test_selfcheck_detects_mutation(self, capsys, monkeypatch):
        # a 1e-3 perturbation of the closed form must trip the oracle gate
        original = potential.vn_dimensionless

        def mutated(n, qbar, ctrl=None):
            value = original(n, qbar) if ctrl is None \
                else original(n, qbar, ctrl)
            return value * (1.0 + 1e-3)

        monkeypatch.setattr(potential, "vn_dimensionless", mutated)
        code, out, _ = run_cli(["selfcheck"], capsys)
        assert code == 3
        _, rows = parse_csv(out)
        failed = {r["check"] for r in rows if r["status"] != "ok"}
        assert "potential_closed_form_vs_quadrature" in failed
