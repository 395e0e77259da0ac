"""End-to-end command-line behavior on synthetic fixtures."""

import json

import pytest

from gdptrend import cli
from gdptrend import (ModelParams, NoiseSpec, emit_gdp_csv,
                      emit_population_csv, generate, generate_population,
                      linear_ratio_path)
from gdptrend.datastore import PopulationTable


@pytest.fixture
def workspace(tmp_path):
    """Synthetic three-country EKS panel + population + matching GK panel."""
    series, gk_series, entries = [], [], {}
    specs = [("Alphaland", 450.0), ("Betavia", 500.0), ("USA", 557.0)]
    for i, (name, a) in enumerate(specs):
        params = ModelParams(increment=a, base_level=10000.0, base_year=1950)
        s, _ = generate(params, NoiseSpec.normal(359.0, seed=300 + i), 54,
                        country=name)
        series.append(s)
        gk_params = ModelParams(increment=0.75 * a, base_level=8000.0,
                                base_year=1950)
        gs, _ = generate(gk_params, NoiseSpec.normal(250.0, seed=400 + i), 54,
                         country=name)
        gk_series.append(gs)
        pop = generate_population(name, 1950, linear_ratio_path(1.45, 1.27, 54),
                                  base_adult=10 ** 6)
        entries.update(pop.entries)

    eks_path = tmp_path / "eks.csv"
    eks_path.write_text(emit_gdp_csv(series), encoding="utf-8")
    gk_path = tmp_path / "gk.csv"
    gk_path.write_text(emit_gdp_csv(gk_series), encoding="utf-8")
    pop_path = tmp_path / "population.csv"
    pop_path.write_text(emit_population_csv(PopulationTable(entries=entries)),
                        encoding="utf-8")
    return tmp_path


def run(args):
    return cli.main([str(a) for a in args])


class TestValidate:
    def test_clean_fixture_exits_zero(self, workspace, capsys):
        out = workspace / "val"
        code = run(["validate", "--gdp-eks", workspace / "eks.csv",
                    "--population", workspace / "population.csv",
                    "--out", out])
        assert code == 0
        assert (out / "validation_report.txt").read_text() == "clean\n"
        doc = json.loads((out / "validation_report.json").read_text())
        assert doc == {"gaps": [], "nonpositive": [], "filled": []}

    def test_unfillable_gap_names_the_year(self, workspace, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("country,year,value\nX,1950,1\nX,1951,2\nX,1953,4\n",
                       encoding="utf-8")
        # interior gap 1952 is fillable; truncate the tail to break it
        code = run(["validate", "--gdp-eks", bad, "--out", tmp_path / "v1"])
        assert code == 0  # fillable gap is repaired, not an error
        text = (tmp_path / "v1" / "validation_report.txt").read_text()
        assert "filled: X 1952 <- 1953" in text

        pop = tmp_path / "pop.csv"
        pop.write_text("country,year,total,pop15plus\nX,1950,130,100\n",
                       encoding="utf-8")
        code = run(["validate", "--gdp-eks", bad, "--population", pop,
                    "--out", tmp_path / "v2"])
        assert code == 1  # population cannot reach 1953 forward
        err = capsys.readouterr().err
        assert "1951" in err

    def test_duplicate_is_a_parse_error(self, tmp_path, capsys):
        bad = tmp_path / "dup.csv"
        bad.write_text("country,year,value\nX,1950,1\nX,1950,2\n",
                       encoding="utf-8")
        code = run(["validate", "--gdp-eks", bad, "--out", tmp_path])
        assert code == 1
        assert "duplicate" in capsys.readouterr().err

    def test_needs_at_least_one_input(self, tmp_path, capsys):
        assert run(["validate", "--out", tmp_path]) == 1


class TestTable1:
    def test_emits_csv_and_text(self, workspace, capsys):
        out = workspace / "tab"
        code = run(["table1", "--gdp-eks", workspace / "eks.csv",
                    "--gdp-gk", workspace / "gk.csv",
                    "--population", workspace / "population.csv",
                    "--out", out])
        assert code == 0
        csv_text = (out / "table1.csv").read_text()
        header, *rows = csv_text.splitlines()
        assert header.startswith("country,mean_original,mean_corrected")
        assert len(rows) == 3
        assert rows[0].startswith("Alphaland,")
        # corrected means exceed originals under a ratio >= 1
        first = rows[0].split(",")
        assert float(first[2]) > float(first[1])
        assert capsys.readouterr().out == (out / "table1.txt").read_text()

    def test_age_adjustments_written_for_configured_countries(self, workspace):
        out = workspace / "tab2"
        run(["table1", "--gdp-eks", workspace / "eks.csv",
             "--population", workspace / "population.csv", "--out", out])
        text = (out / "age_adjustments.csv").read_text()
        lines = text.splitlines()
        assert lines[0].startswith("country,ppp_basis,mean_increment,factor")
        assert any(line.startswith("USA,EKS_2002,") and ",0.82," in line
                   for line in lines[1:])

    def test_byte_identical_reruns(self, workspace):
        out1, out2 = workspace / "t1", workspace / "t2"
        for out in (out1, out2):
            run(["table1", "--gdp-eks", workspace / "eks.csv",
                 "--population", workspace / "population.csv", "--out", out])
        assert (out1 / "table1.csv").read_bytes() \
            == (out2 / "table1.csv").read_bytes()
        assert (out1 / "table1.txt").read_bytes() \
            == (out2 / "table1.txt").read_bytes()

    def test_missing_panel(self, tmp_path, capsys):
        assert run(["table1", "--out", tmp_path]) == 1
        assert "gdp-eks" in capsys.readouterr().err


class TestDist:
    def test_eks_original_summary(self, workspace):
        out = workspace / "dist"
        code = run(["dist", "eks_original", "--gdp-eks",
                    workspace / "eks.csv", "--out", out])
        assert code == 0
        doc = json.loads((out / "dist_eks_original.json").read_text())
        assert doc["variant"] == "eks_original"
        assert doc["ppp_basis"] == "EKS_2002"
        assert doc["centering"] == "PER_COUNTRY_MEAN_SUBTRACTED"
        assert doc["n"] == 3 * 53
        assert abs(doc["fit"]["mu"]) < 1e-9
        csv_lines = (out / "dist_eks_original.csv").read_text().splitlines()
        assert csv_lines[0] == "bin_center,observed,expected"
        assert sum(int(r.split(",")[1]) for r in csv_lines[1:]) == doc["n"]

    def test_variant_casing_is_flexible(self, workspace):
        code = run(["dist", "EKS_ORIGINAL", "--gdp-eks", workspace / "eks.csv",
                    "--out", workspace / "d2"])
        assert code == 0

    def test_subset_reports_uncentered_mean(self, workspace):
        out = workspace / "d3"
        code = run(["dist", "subset", "--gdp-eks", workspace / "eks.csv",
                    "--population", workspace / "population.csv",
                    "--exclude", "USA", "--out", out])
        assert code == 0
        doc = json.loads((out / "dist_subset.json").read_text())
        assert doc["centering"] == "UNCENTERED"
        assert doc["excluded"] == ["USA"]
        assert doc["n"] == 2 * 53
        assert doc["pool_mean"] > 0

    def test_subset_excluding_everyone_fails(self, workspace, capsys):
        code = run(["dist", "subset", "--gdp-eks", workspace / "eks.csv",
                    "--population", workspace / "population.csv",
                    "--exclude", "USA,Alphaland,Betavia",
                    "--out", workspace / "d4"])
        assert code == 1
        assert "every country" in capsys.readouterr().err

    def test_corrected_variant_needs_population(self, workspace, capsys):
        code = run(["dist", "eks_corrected", "--gdp-eks",
                    workspace / "eks.csv", "--out", workspace / "d5"])
        assert code == 1
        assert "population" in capsys.readouterr().err

    def test_unknown_variant_is_a_usage_error(self, workspace):
        with pytest.raises(SystemExit) as exc:
            run(["dist", "nonsense", "--gdp-eks", workspace / "eks.csv"])
        assert exc.value.code == 2


class TestCompare:
    def test_target_rows_and_ratios(self, workspace):
        out = workspace / "cmp"
        code = run(["compare", "Alphaland", "--gdp-gk", workspace / "gk.csv",
                    "--reference", "USA", "--out", out])
        assert code == 0
        lines = (out / "compare_Alphaland.csv").read_text().splitlines()
        assert lines[0] == "year,target_increment,reference_mean"
        assert len(lines) == 1 + 53
        ratios = (out / "compare_ratios.csv").read_text().splitlines()
        assert ratios[0] == ("country,ppp_basis,mean_increment,"
                             "reference_mean_increment,ratio")
        assert ratios[1].startswith("Alphaland,GK_1990,")

    def test_reference_compared_to_itself_is_one(self, workspace):
        out = workspace / "cmp2"
        run(["compare", "USA", "--gdp-gk", workspace / "gk.csv",
             "--reference", "USA", "--out", out])
        line = (out / "compare_ratios.csv").read_text().splitlines()[1]
        assert line.endswith(",1.0")

    def test_unknown_target(self, workspace, capsys):
        code = run(["compare", "Ruritania", "--gdp-gk", workspace / "gk.csv",
                    "--out", workspace / "cmp3"])
        assert code == 1
        assert "Ruritania" in capsys.readouterr().err


SIM_SPEC = {
    "start_year": 1950,
    "years": 54,
    "seed": 42,
    "noise": {"kind": "NORMAL", "sigma": 359.0},
    "countries": [
        {"country": "A", "increment": 450.0, "base_level": 10000.0},
        {"country": "B", "increment": 500.0, "base_level": 12000.0,
         "noise": {"kind": "NONE"}},
    ],
    "population": {"base_adult": 1000000,
                   "ratio_start": 1.45, "ratio_end": 1.27},
}


class TestSimulate:
    def write_spec(self, tmp_path, doc=SIM_SPEC):
        p = tmp_path / "sim.json"
        p.write_text(json.dumps(doc), encoding="utf-8")
        return p

    def test_outputs_parse_and_match_ground_truth(self, tmp_path):
        spec = self.write_spec(tmp_path)
        out = tmp_path / "sim"
        assert run(["simulate", spec, "--out", out]) == 0
        truth = json.loads((out / "ground_truth.json").read_text())
        assert [c["country"] for c in truth["countries"]] == ["A", "B"]
        # the NONE-noise country recovers its trend exactly
        b = truth["countries"][1]
        assert b["mean_increment"] == 500.0
        from gdptrend import parse_gdp_csv, fit_model
        panel = {s.country: s
                 for s in parse_gdp_csv((out / "gdp.csv").read_text())}
        fitted = fit_model(panel["B"])
        assert fitted.increment == 500.0
        assert fitted.base_level == 12000.0
        assert (out / "population.csv").exists()

    def test_reruns_are_bit_identical(self, tmp_path):
        spec = self.write_spec(tmp_path)
        outs = []
        for name in ("s1", "s2"):
            out = tmp_path / name
            run(["simulate", spec, "--out", out])
            outs.append(out)
        for fname in ("gdp.csv", "population.csv", "ground_truth.json"):
            assert (outs[0] / fname).read_bytes() \
                == (outs[1] / fname).read_bytes()

    def test_negative_sigma_is_a_config_error(self, tmp_path, capsys):
        doc = json.loads(json.dumps(SIM_SPEC))
        doc["noise"] = {"kind": "NORMAL", "sigma": -1.0}
        spec = self.write_spec(tmp_path, doc)
        assert run(["simulate", spec, "--out", tmp_path / "x"]) == 1
        assert "sigma" in capsys.readouterr().err

    def test_seed_flag_overrides_spec(self, tmp_path):
        spec = self.write_spec(tmp_path)
        out1, out2, out3 = (tmp_path / n for n in ("a", "b", "c"))
        run(["simulate", spec, "--out", out1])
        run(["simulate", spec, "--seed", "42", "--out", out2])
        run(["simulate", spec, "--seed", "7", "--out", out3])
        assert (out1 / "gdp.csv").read_bytes() == (out2 / "gdp.csv").read_bytes()
        assert (out1 / "gdp.csv").read_bytes() != (out3 / "gdp.csv").read_bytes()


class TestConfigFile:
    def test_flags_beat_config_beat_defaults(self, workspace, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            f"# analysis defaults\n"
            f"gdp_eks = {workspace / 'eks.csv'}\n"
            f"bin_width = 100\n"
            f"reference = Betavia\n",
            encoding="utf-8")
        out = tmp_path / "o1"
        code = run(["dist", "eks_original", "--config", cfg,
                    "--bin-width", "400", "--out", out])
        assert code == 0
        doc = json.loads((out / "dist_eks_original.json").read_text())
        assert doc["bin_width"] == 400.0  # flag wins over config's 100

    def test_unknown_key_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("no_such_key = 1\n", encoding="utf-8")
        assert run(["validate", "--config", cfg]) == 1
        assert "no_such_key" in capsys.readouterr().err

    def test_exclude_and_factors_parsing(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("exclude = USA, New Zealand\n"
                       "adjustment_factors = USA:0.82, France:0.97\n",
                       encoding="utf-8")
        values = cli.parse_config_file(cfg)
        assert cli._parse_exclude(values["exclude"]) == ("USA", "New Zealand")
        assert cli._parse_factors(values["adjustment_factors"]) == (
            ("France", 0.97), ("USA", 0.82))


def test_input_files_are_never_mutated(workspace):
    before = (workspace / "eks.csv").read_bytes()
    run(["table1", "--gdp-eks", workspace / "eks.csv",
         "--population", workspace / "population.csv",
         "--out", workspace / "mut"])
    run(["dist", "eks_original", "--gdp-eks", workspace / "eks.csv",
         "--out", workspace / "mut"])
    assert (workspace / "eks.csv").read_bytes() == before
