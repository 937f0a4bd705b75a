"""CLI surface: run/price/table3/fig1, exit codes, output formats."""

import json

import pytest
from click.testing import CliRunner

from lcsim import scenario
from lcsim.cli import main, provider_count_for_value
from lcsim.harness import ConfigInvalidError


@pytest.fixture
def runner():
    return CliRunner()


class TestScenarioFiles:
    def test_builtin_scenarios_present(self):
        names = scenario.list_builtin_scenarios()
        assert {"honest", "wrong_hash", "exit_scam", "insured", "maintenance"} <= set(names)

    def test_unknown_strategy_rejected(self, tmp_path):
        bad = tmp_path / "bad.ini"
        bad.write_text(
            "[scenario]\nseed = 1\n"
            "[provider.x]\nstake_eth = 32\nstrategy = creative\n"
            "[client.y]\nchallenge_period = 13\ntarget_value_eth = 1\n"
        )
        with pytest.raises(ConfigInvalidError, match="strategy"):
            scenario.load_scenario(bad)

    def test_missing_sections_rejected(self, tmp_path):
        empty = tmp_path / "empty.ini"
        empty.write_text("[scenario]\nseed = 1\n")
        with pytest.raises(ConfigInvalidError, match="provider"):
            scenario.load_scenario(empty)

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(ConfigInvalidError, match="not found"):
            scenario.load_scenario(tmp_path / "nope.ini")


class TestRun:
    def test_honest_scenario_exits_zero(self, runner, tmp_path):
        result = runner.invoke(
            main,
            ["run", str(scenario.builtin_scenario_path("honest")), "-o", str(tmp_path)],
        )
        assert result.exit_code == 0, result.output
        metrics = json.loads((tmp_path / "metrics.json").read_text())
        assert metrics["violations"] == []
        assert (tmp_path / "events.log").exists()

    def test_exit_scam_scenario_exits_zero_with_one_slash(self, runner, tmp_path):
        result = runner.invoke(
            main,
            ["run", str(scenario.builtin_scenario_path("exit_scam")), "-o", str(tmp_path)],
        )
        assert result.exit_code == 0, result.output
        metrics = json.loads((tmp_path / "metrics.json").read_text())
        assert metrics["slash_count"] == 1

    def test_malformed_file_exits_two(self, runner, tmp_path):
        path = tmp_path / "broken.ini"
        path.write_text("this is not an ini [\n")
        result = runner.invoke(main, ["run", str(path), "-o", str(tmp_path / "out")])
        assert result.exit_code == 2

    def test_violation_exits_one_and_names_invariant(self, runner, tmp_path):
        # T_cp = 0 against a lying provider: the eco-safety invariant must
        # trip and be named.
        path = tmp_path / "unsafe.ini"
        path.write_text(
            "[scenario]\nseed = 3\nupdate_epoch_blocks = 32\n"
            "max_challenge_period = 16\ndelta_ticks = 2\ntotal_ticks = 160\n"
            "[provider.adv]\nstake_eth = 64\nstrategy = wrong_hash\n"
            "[provider.ok]\nstake_eth = 32\nstrategy = honest\n"
            "[client.main]\nprotocol = eco\nchallenge_period = 0\n"
            "target_value_eth = 10\n"
        )
        result = runner.invoke(main, ["run", str(path), "-o", str(tmp_path / "out")])
        assert result.exit_code == 1
        assert "eco-safety" in result.output


class TestPrice:
    def test_worked_example(self, runner):
        result = runner.invoke(
            main, ["price", "--value", "100", "--duration", "1500"]
        )
        assert result.exit_code == 0
        assert "premium: 0.004566 ETH" in result.output

    def test_ten_eth_total(self, runner):
        result = runner.invoke(
            main,
            [
                "price",
                "--value", "10",
                "--duration", "1500",
                "--eth-usd", "3200",
                "--gas-gwei", "9.377",
                "--gas-units", "200000",
            ],
        )
        assert result.exit_code == 0
        assert "gas: $6.00" in result.output
        total = float(result.output.split("total: $")[1].strip())
        assert abs(total - 7.45) <= 0.02

    def test_zero_value_pays_gas_only(self, runner):
        result = runner.invoke(main, ["price", "--value", "0", "--duration", "1500"])
        assert "premium: 0.000000 ETH" in result.output
        assert "total: $6.00" in result.output

    def test_missing_flags_usage_error(self, runner):
        result = runner.invoke(main, ["price", "--value", "10"])
        assert result.exit_code == 2


class TestTable3:
    def test_rows_match_headline_numbers(self, runner, tmp_path):
        out = tmp_path / "table3.csv"
        result = runner.invoke(main, ["table3", str(out)])
        assert result.exit_code == 0
        lines = out.read_text().strip().splitlines()
        header, rows = lines[0], [line.split(",") for line in lines[1:]]
        assert header.startswith("covered_value_eth,")
        assert [int(r[0]) for r in rows] == [10, 32, 160, 320]
        totals = [float(r[4]) for r in rows]
        for got, expected in zip(totals, (7.45, 10.68, 29.38, 52.76)):
            assert abs(got - expected) <= 0.02
        assert [int(r[5]) for r in rows] == [1, 1, 5, 10]
        assert all(int(r[6]) == 1500 for r in rows)
        # total equals premium plus gas to the cent
        for r in rows:
            assert round(float(r[2]) + float(r[3]), 2) == float(r[4])

    def test_provider_counts(self):
        assert [provider_count_for_value(v) for v in (10, 32, 160, 320)] == [1, 1, 5, 10]


class TestFig1:
    def test_single_point_matches_price(self, runner, tmp_path):
        out = tmp_path / "fig1.csv"
        result = runner.invoke(
            main, ["fig1", str(out), "--durations", "1500", "--values", "10"]
        )
        assert result.exit_code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "value_eth,duration_blocks,total_usd"
        value, duration, total = lines[1].split(",")
        assert (value, duration) == ("10", "1500")
        price = runner.invoke(main, ["price", "--value", "10", "--duration", "1500"])
        assert f"total: ${total}" in price.output

    def test_grid_size(self, runner, tmp_path):
        out = tmp_path / "grid.csv"
        runner.invoke(
            main, ["fig1", str(out), "--durations", "500,1500", "--values", "1,10,100"]
        )
        assert len(out.read_text().strip().splitlines()) == 1 + 2 * 3
