"""Tests for the command-line benchmark driver."""

import json
import sys

import numpy as np
import pytest

import monobo.cli as cli
from monobo.cli import (
    BaselineConfig,
    RunConfig,
    main,
    mean_square,
    parse_cli,
    random_search_baseline,
    rank_of,
)
from monobo.composite import Strategy
from monobo.problems import IllustrativeProblem


class TestRank:
    def test_counting_example(self):
        assert rank_of(2.0, (5.0, 3.0, 1.0)) == 3

    def test_best_of_all(self):
        assert rank_of(9.0, (5.0, 3.0, 1.0)) == 1

    def test_worst_of_all(self):
        assert rank_of(0.0, (5.0, 3.0, 1.0)) == 4

    def test_tie_beats_baseline(self):
        # Strictly-greater counting: tying a baseline value outranks it.
        assert rank_of(3.0, (5.0, 3.0, 1.0)) == 2

    def test_empty_baseline_rejected(self):
        with pytest.raises(ValueError):
            rank_of(1.0, ())


class TestMeanSquare:
    def test_example(self):
        assert mean_square([1.0, 3.0]) == 5.0

    def test_equals_squared_mean_plus_variance(self):
        values = [1.0, 3.0]
        mean = np.mean(values)
        var = np.var(values)
        assert mean_square(values) == pytest.approx(mean**2 + var)

    def test_constant(self):
        assert mean_square([4.0, 4.0, 4.0]) == pytest.approx(16.0)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            mean_square([])


class TestParseCli:
    def test_run_defaults(self):
        config = parse_cli(["run", "--problem", "illustrative", "--seed", "42"])
        assert isinstance(config, RunConfig)
        assert config.n_init == 4
        assert config.budget == 8
        assert config.n_trials == 10
        assert config.base_seed == 42
        assert config.strategies == (
            Strategy.STANDARD,
            Strategy.DECOMPOSED,
            Strategy.DECOMPOSED_MONOTONE,
        )

    def test_strategy_subset_preserves_order(self):
        config = parse_cli(
            ["run", "--problem", "elastic", "--strategies", "decomp-mono,standard"]
        )
        assert config.strategies == (Strategy.DECOMPOSED_MONOTONE, Strategy.STANDARD)

    def test_baseline_subcommand(self):
        config = parse_cli(
            ["baseline", "--problem", "elastic", "--n", "100", "--seed", "7"]
        )
        assert config == BaselineConfig(problem="elastic", n=100, seed=7)

    @pytest.mark.parametrize(
        "argv",
        [
            ["run", "--problem", "illustrative", "--budget", "-1"],
            ["run", "--problem", "illustrative", "--trials", "0"],
            ["run", "--problem", "nonexistent"],
            ["run", "--problem", "illustrative", "--strategies", "sobol"],
            ["run", "--problem", "illustrative", "--frobnicate"],
            ["baseline", "--problem", "mystery"],
        ],
    )
    def test_usage_errors_exit_2(self, argv):
        with pytest.raises(SystemExit) as info:
            parse_cli(argv)
        assert info.value.code == 2


class TestBaseline:
    def test_sorted_descending_and_deterministic(self):
        problem = IllustrativeProblem()
        a = random_search_baseline(problem, 50, seed=3)
        b = random_search_baseline(problem, 50, seed=3)
        assert a == b
        assert len(a) == 50
        assert all(x >= y for x, y in zip(a, a[1:]))

    def test_subcommand_prints_values(self, capsys):
        code = main(["baseline", "--problem", "illustrative", "--n", "10", "--seed", "1"])
        assert code == 0
        lines = capsys.readouterr().out.strip().split("\n")
        values = [float(line) for line in lines]
        assert len(values) == 10
        assert values == sorted(values, reverse=True)


SMALL_RUN = [
    "run",
    "--problem",
    "illustrative",
    "--strategies",
    "all",
    "--trials",
    "2",
    "--init",
    "2",
    "--budget",
    "1",
    "--baseline",
    "20",
    "--seed",
    "5",
]


def read_csv(path):
    lines = path.read_text().strip().split("\n")
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    return header, rows


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("bench")
    code = main(SMALL_RUN + ["--out", str(out)])
    assert code == 0
    return out


class TestRunBenchmark:
    def test_csv_row_count(self, run_dir):
        header, rows = read_csv(run_dir / "results.csv")
        assert header == [
            "strategy", "trial", "iteration", "x0", "c0", "c1",
            "total", "best_so_far", "rank",
        ]
        assert len(rows) == 3 * 2 * (2 + 1)

    def test_rank_curve_non_increasing_per_trial(self, run_dir):
        header, rows = read_csv(run_dir / "results.csv")
        ranks = {}
        for row in rows:
            key = (row[0], row[1])
            ranks.setdefault(key, []).append(int(row[-1]))
        for curve in ranks.values():
            assert all(b <= a for a, b in zip(curve, curve[1:]))

    def test_summary_shape(self, run_dir):
        summary = json.loads((run_dir / "summary.json").read_text())
        assert summary["failures"] == []
        assert set(summary["strategies"]) == {"standard", "decomp", "decomp-mono"}
        entry = summary["strategies"]["decomp"]
        assert len(entry["mean_best_so_far"]) == 3
        assert len(entry["mean_rank"]) == 3
        assert len(entry["mean_square_rank"]) == 3
        assert entry["n_complete_trials"] == 2

    def test_mean_rank_within_bounds(self, run_dir):
        summary = json.loads((run_dir / "summary.json").read_text())
        for entry in summary["strategies"].values():
            for r in entry["mean_rank"]:
                assert 1.0 <= r <= 21.0

    def test_rerun_is_byte_identical(self, run_dir, tmp_path):
        code = main(SMALL_RUN + ["--out", str(tmp_path)])
        assert code == 0
        assert (tmp_path / "results.csv").read_bytes() == (
            run_dir / "results.csv"
        ).read_bytes()
        assert (tmp_path / "summary.json").read_bytes() == (
            run_dir / "summary.json"
        ).read_bytes()

    def test_jobs_do_not_change_bytes(self, run_dir, tmp_path):
        code = main(SMALL_RUN + ["--out", str(tmp_path), "--jobs", "2"])
        assert code == 0
        assert (tmp_path / "results.csv").read_bytes() == (
            run_dir / "results.csv"
        ).read_bytes()

    def test_baseline_shared_across_strategies(self, monkeypatch, tmp_path):
        calls = []
        original = cli.random_search_baseline

        def spy(problem, n, seed):
            calls.append(seed)
            return original(problem, n, seed)

        monkeypatch.setattr(cli, "random_search_baseline", spy)
        code = main(
            [
                "run", "--problem", "illustrative", "--strategies",
                "standard,decomp", "--trials", "1", "--init", "2",
                "--budget", "0", "--baseline", "10", "--out", str(tmp_path),
            ]
        )
        assert code == 0
        assert len(calls) == 1

    def test_failing_adapter_recorded_with_nonzero_exit(self, tmp_path):
        descriptor = {
            "name": "broken",
            "dimension": 1,
            "components": [{"name": "a", "signs": [0]}],
            "command": [sys.executable, "-c", "import sys; sys.exit(9)"],
            "timeout_s": 10,
        }
        desc_path = tmp_path / "broken.json"
        desc_path.write_text(json.dumps(descriptor))
        out = tmp_path / "out"
        code = main(
            [
                "run", "--problem", f"external:{desc_path}", "--strategies",
                "standard", "--trials", "2", "--init", "1", "--budget", "0",
                "--baseline", "5", "--out", str(out),
            ]
        )
        assert code == 2  # baseline evaluation hits the broken adapter first
        assert not (out / "results.csv").exists()

    def test_failing_trial_listed_in_summary(self, tmp_path, monkeypatch):
        # Baseline succeeds, trials fail: patch the loop, not the problem.
        from monobo.errors import TrialError

        def explode(*args, **kwargs):
            return [TrialError("oracle died", [])]

        monkeypatch.setattr(cli, "run_trials", explode)
        out = tmp_path / "out"
        code = main(
            [
                "run", "--problem", "illustrative", "--strategies", "standard",
                "--trials", "1", "--init", "1", "--budget", "0",
                "--baseline", "5", "--out", str(out),
            ]
        )
        assert code == 1
        summary = json.loads((out / "summary.json").read_text())
        assert summary["failures"] == [
            {"strategy": "standard", "trial": 0, "error": "oracle died"}
        ]
        assert summary["strategies"]["standard"] == {"n_complete_trials": 0}
        header, rows = read_csv(out / "results.csv")
        assert rows == []

    def test_missing_descriptor_is_usage_style_error(self, tmp_path, capsys):
        out = tmp_path / "out"
        code = main(
            [
                "run", "--problem", "external:/no/such/file.json",
                "--strategies", "standard", "--out", str(out),
            ]
        )
        assert code == 2
        assert not out.exists()
        assert "monobo:" in capsys.readouterr().err
